//! Design search over integer partitions, plus the hypercube-optimal
//! initial vector for a fixed root structure and its integer roundings.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{alpha_sq_for_vector, alphas, alphas_for_vector, PerformanceProfile};
use crate::coxeter::{candidate_differences, select_clique, Negation, RootSet};
use crate::error::{Error, Result};
use crate::exactla::{dot_i64, primitive_i64, to_f64, Rational};
use crate::linecode::{search_roots, LineCode};
use crate::pmset::{initial_vector_from_partition, pm_cardinality, InitialVector};

pub const DEFAULT_MAX_BITS: usize = 8;
pub const DEFAULT_MAX_CANDIDATES: usize = 6000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DesignOptions {
    pub negation: Negation,
    pub max_bits: usize,
    /// Orbits with more nonzero differences than this are not searched.
    pub max_candidates: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            negation: Negation::Auto,
            max_bits: DEFAULT_MAX_BITS,
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Infeasibility {
    /// All parts equal: the balanced vector would be zero.
    ConstantVector,
    /// u64 keeps the tagged form readable by serde_json; counts at the bit cap are far below it.
    TooFewPermutations { available: u64, needed: u64 },
    NoClique,
    SearchLimit { candidates: usize, limit: usize },
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Infeasibility::ConstantVector => write!(f, "single level, balanced vector is zero"),
            Infeasibility::TooFewPermutations { available, needed } => {
                write!(f, "{available} permutations, {needed} codewords needed")
            }
            Infeasibility::NoClique => write!(f, "no orthogonal clique of full size"),
            Infeasibility::SearchLimit { candidates, limit } => {
                write!(f, "{candidates} differences exceed the search limit of {limit}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleDesign {
    pub code: LineCode,
    pub profile: PerformanceProfile,
    pub negation_used: bool,
    pub cliques: usize,
    /// Distinct amplitudes over the whole codebook.
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Feasible(Box<FeasibleDesign>),
    Infeasible(Infeasibility),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignCandidate {
    /// Parts in descending order.
    pub partition: Vec<usize>,
    pub w1: Option<InitialVector>,
    pub outcome: Outcome,
}

impl DesignCandidate {
    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, Outcome::Feasible(_))
    }

    pub fn design(&self) -> Option<&FeasibleDesign> {
        match &self.outcome {
            Outcome::Feasible(d) => Some(d),
            Outcome::Infeasible(_) => None,
        }
    }
}

/// Flat, serialisable view of a candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub partition: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<Vec<i64>>,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<Infeasibility>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roots: Vec<Vec<i64>>,
    #[serde(default)]
    pub negation_used: bool,
    #[serde(default)]
    pub cliques: usize,
}

impl From<&DesignCandidate> for CandidateSummary {
    fn from(c: &DesignCandidate) -> Self {
        let mut s = CandidateSummary {
            partition: c.partition.clone(),
            w1: c.w1.as_ref().map(|w| w.components().to_vec()),
            feasible: c.is_feasible(),
            reason: None,
            alphas: Vec::new(),
            roots: Vec::new(),
            negation_used: false,
            cliques: 0,
        };
        match &c.outcome {
            Outcome::Feasible(d) => {
                s.alphas = d.profile.alphas.clone();
                s.roots = d.code.root_set.roots.clone();
                s.negation_used = d.negation_used;
                s.cliques = d.cliques;
            }
            Outcome::Infeasible(why) => s.reason = Some(why.clone()),
        }
        s
    }
}

/// Integer partitions of `n`, parts descending, in reverse lexicographic order.
pub fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=cap.min(left)).rev() {
            cur.push(p);
            rec(left - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Builds and ranks one candidate per partition of `b + 1`.
pub fn enumerate_designs(b: usize, options: &DesignOptions) -> Result<Vec<DesignCandidate>> {
    if b == 0 || b > options.max_bits {
        return Err(Error::InvalidInput(format!(
            "b must lie in 1..={}, got {b}",
            options.max_bits
        )));
    }
    let mut all: Vec<DesignCandidate> = integer_partitions(b + 1)
        .into_par_iter()
        .map(|p| evaluate_partition(p, b, options))
        .collect::<Result<_>>()?;
    // stable: equal keys keep partition order
    all.sort_by(|x, y| match (x.design(), y.design()) {
        (Some(a), Some(c)) => compare_designs(a, c),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    Ok(all)
}

fn evaluate_partition(partition: Vec<usize>, b: usize, options: &DesignOptions) -> Result<DesignCandidate> {
    let infeasible = |w1, why| DesignCandidate {
        partition: partition.clone(),
        w1,
        outcome: Outcome::Infeasible(why),
    };
    if partition.len() < 2 {
        return Ok(infeasible(None, Infeasibility::ConstantVector));
    }
    let w1 = initial_vector_from_partition(&partition, b)?;
    let negate = match options.negation {
        Negation::Off => false,
        Negation::On | Negation::Auto => !w1.is_sign_symmetric(),
    };
    let perms = pm_cardinality(&partition);
    let available = if negate { 2 * perms } else { perms };
    let needed = 1u128 << b;
    if available < needed {
        return Ok(infeasible(
            Some(w1),
            Infeasibility::TooFewPermutations {
                available: u64::try_from(available).unwrap_or(u64::MAX),
                needed: u64::try_from(needed).unwrap_or(u64::MAX),
            },
        ));
    }
    let candidates = candidate_differences(&w1, negate).len();
    if candidates > options.max_candidates {
        return Ok(infeasible(
            Some(w1),
            Infeasibility::SearchLimit {
                candidates,
                limit: options.max_candidates,
            },
        ));
    }
    let (report, negation_used) = match search_roots(&w1, options.negation) {
        Ok(r) => r,
        Err(Error::DesignInfeasible(_)) => return Ok(infeasible(Some(w1), Infeasibility::NoClique)),
        Err(e) => return Err(e),
    };
    let code = LineCode::from_root_set(select_clique(&report)?)?;
    let profile = alphas(&code)?;
    let levels = code
        .codebook
        .w
        .row_iter()
        .flatten()
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    Ok(DesignCandidate {
        partition,
        w1: Some(w1),
        outcome: Outcome::Feasible(Box::new(FeasibleDesign {
            code,
            profile,
            negation_used,
            cliques: report.len(),
            levels,
        })),
    })
}

/// Larger energy-normalised distance spectrum first, then the profile
/// closest to all-ones, then fewer amplitude levels.
fn compare_designs(a: &FeasibleDesign, b: &FeasibleDesign) -> Ordering {
    let spectrum = |d: &FeasibleDesign| {
        let mut s: Vec<Rational> = d.profile.alpha_sq.clone();
        s.sort();
        s
    };
    spectrum(b)
        .cmp(&spectrum(a))
        .then_with(|| hypercube_deviation(&a.profile.alphas).total_cmp(&hypercube_deviation(&b.profile.alphas)))
        .then(a.levels.cmp(&b.levels))
}

/// `max_j |alpha_j - 1|`.
pub fn hypercube_deviation(alphas: &[f64]) -> f64 {
    alphas.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max)
}

/// `sum_j d_j / ||d_j||`: equidistant from every mirror of the group.
pub fn optimal_initial_vector(rs: &RootSet) -> Vec<f64> {
    let mut w = vec![0.0; rs.w1.len()];
    for d in &rs.diffs {
        let norm = (dot_i64(d, d) as f64).sqrt();
        for (x, &c) in w.iter_mut().zip(d) {
            *x += c as f64 / norm;
        }
    }
    w
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegerApproximation {
    pub w1: InitialVector,
    pub scale: usize,
    pub alpha_sq: Vec<Rational>,
    pub alphas: Vec<f64>,
    pub max_deviation: f64,
}

/// Rounds `s * w_opt` for `s = 1..=max_scale`, keeping the balanced integer
/// vector whose profile is closest to all-ones. Ties go to the smaller scale.
pub fn integer_approximation(rs: &RootSet, w_opt: &[f64], max_scale: usize) -> Result<IntegerApproximation> {
    if w_opt.len() != rs.w1.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for {} wires",
            w_opt.len(),
            rs.w1.len()
        )));
    }
    let scale_ref = w_opt.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if w_opt.iter().sum::<f64>().abs() > 1e-9 * scale_ref.max(1.0) {
        return Err(Error::InvalidInput("initial vector is not balanced".into()));
    }
    let mut best: Option<IntegerApproximation> = None;
    for s in 1..=max_scale {
        let target: Vec<f64> = w_opt.iter().map(|x| x * s as f64).collect();
        let Some(v) = balanced_rounding(&target) else { continue };
        // a vector on a mirror collapses the orbit
        if v.iter().all(|&x| x == 0) || rs.diffs.iter().any(|d| dot_i64(d, &v) == 0) {
            continue;
        }
        let v = primitive_i64(&v)?;
        let alpha_sq = alpha_sq_for_vector(&rs.diffs, &v);
        let alphas: Vec<f64> = alpha_sq.iter().map(|a| to_f64(a).sqrt()).collect();
        let max_deviation = hypercube_deviation(&alphas);
        if best.as_ref().is_none_or(|b| max_deviation < b.max_deviation) {
            best = Some(IntegerApproximation {
                w1: InitialVector::new(v)?,
                scale: s,
                alpha_sq,
                alphas,
                max_deviation,
            });
        }
    }
    best.ok_or(Error::NoBalancedRounding)
}

/// Nearest-integer rounding with the coordinate sum forced to zero by moving
/// the coordinates whose rounding error is largest in the needed direction.
fn balanced_rounding(target: &[f64]) -> Option<Vec<i64>> {
    if target.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut v: Vec<i64> = target.iter().map(|x| x.round() as i64).collect();
    let excess: i64 = v.iter().sum();
    if excess.unsigned_abs() as usize > v.len() {
        return None;
    }
    let step = -excess.signum();
    let mut order: Vec<usize> = (0..v.len()).collect();
    // coordinates rounded furthest against the needed direction move first
    order.sort_by(|&i, &j| {
        let ei = (target[i] - v[i] as f64) * step as f64;
        let ej = (target[j] - v[j] as f64) * step as f64;
        ej.total_cmp(&ei).then(i.cmp(&j))
    });
    for &i in order.iter().take(excess.unsigned_abs() as usize) {
        v[i] += step;
    }
    Some(v)
}

/// Alphas of the group of `rs` applied to a real initial vector.
pub fn profile_for_vector(rs: &RootSet, w: &[f64]) -> PerformanceProfile {
    PerformanceProfile::from_alphas(&alphas_for_vector(&rs.diffs, w))
}
