//! Reference designs for `b = 1..5`, regenerated from their initial vectors.

use serde::Serialize;

use crate::analysis::{alphas, PerformanceProfile};
use crate::coxeter::{select_clique, Negation};
use crate::error::Result;
use crate::linecode::{search_roots, LineCode};
use crate::pmset::InitialVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub b: usize,
    pub w1: &'static [i64],
}

pub const REFERENCE_DESIGNS: [CatalogEntry; 9] = [
    CatalogEntry { b: 1, w1: &[1, -1] },
    CatalogEntry { b: 2, w1: &[-1, 0, 1] },
    CatalogEntry { b: 3, w1: &[-3, -1, 1, 3] },
    CatalogEntry { b: 3, w1: &[-1, 0, 0, 1] },
    CatalogEntry { b: 3, w1: &[-3, 1, 1, 1] },
    CatalogEntry { b: 4, w1: &[-2, -1, 0, 1, 2] },
    CatalogEntry { b: 5, w1: &[1, -1, 3, -3, 5, -5] },
    CatalogEntry { b: 5, w1: &[-2, -1, 0, 0, 1, 2] },
    CatalogEntry { b: 5, w1: &[1, -1, -3, -1, 1, 3] },
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub b: usize,
    pub w1: Vec<i64>,
    /// Roots ordered by ascending alpha.
    pub roots: Vec<Vec<i64>>,
    /// Ascending.
    pub alphas: Vec<f64>,
    pub rounded: Vec<f64>,
    pub negation_used: bool,
    pub cliques: usize,
    #[serde(skip)]
    pub code: LineCode,
    #[serde(skip)]
    pub profile: PerformanceProfile,
}

pub fn reproduce_row(entry: &CatalogEntry) -> Result<TableRow> {
    let w1 = InitialVector::new(entry.w1.to_vec())?;
    let (report, negation_used) = search_roots(&w1, Negation::Auto)?;
    let code = LineCode::from_root_set(select_clique(&report)?)?;
    let profile = alphas(&code)?;
    let mut order: Vec<usize> = (0..code.bits()).collect();
    order.sort_by(|&i, &j| profile.alpha_sq[i].cmp(&profile.alpha_sq[j]));
    let alphas: Vec<f64> = order.iter().map(|&i| profile.alphas[i]).collect();
    Ok(TableRow {
        b: entry.b,
        w1: entry.w1.to_vec(),
        roots: order.iter().map(|&i| code.root_set.roots[i].clone()).collect(),
        rounded: alphas.iter().map(|a| (a * 100.0).round() / 100.0).collect(),
        alphas,
        negation_used,
        cliques: report.len(),
        code,
        profile,
    })
}

/// Rows for every reference design with `b` in `filter` (all when `None`).
pub fn reproduce_table(filter: Option<usize>) -> Result<Vec<TableRow>> {
    REFERENCE_DESIGNS
        .iter()
        .filter(|e| filter.is_none_or(|b| e.b == b))
        .map(reproduce_row)
        .collect()
}
