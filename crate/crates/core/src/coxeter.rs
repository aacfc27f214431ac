//! Root permutations, reflection generators and the group code they span.
//!
//! A root permutation `w` of the initial vector `w1` contributes the
//! difference `d = w1 - w`. When `b` such differences are mutually
//! orthogonal, the reflections `I - 2 d d^T / <d,d>` commute and generate
//! a group isomorphic to `Z_2^b`; its orbit of `w1` is an orthotope.
//!
//! Differences are kept as unnormalised integer vectors throughout, so every
//! generator is an exact rational matrix.

use std::collections::HashSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::{dot_i64, mat_mul, rat, rat_vec, RatMatrix, Rational};
use crate::pmset::{permutations_of, InitialVector};

/// Whether roots may be drawn from the permutations of `-w1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Negation {
    /// On exactly when the plain permutation orbit cannot host a code.
    #[default]
    Auto,
    On,
    Off,
}

impl std::str::FromStr for Negation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Negation::Auto),
            "on" => Ok(Negation::On),
            "off" => Ok(Negation::Off),
            other => Err(Error::InvalidInput(format!(
                "negation must be auto, on or off, got {other:?}"
            ))),
        }
    }
}

/// One vertex of the orthogonality graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub root: Vec<i64>,
    pub diff: Vec<i64>,
    /// The root is a permutation of `-w1` rather than of `w1`.
    pub negated: bool,
}

impl Candidate {
    pub fn norm_sq(&self) -> i64 {
        dot_i64(&self.diff, &self.diff)
    }
}

/// Every permutation of `w1` other than `w1` itself, followed (when allowed
/// and not redundant) by every permutation of `-w1`.
pub fn candidate_differences(w1: &InitialVector, allow_negation: bool) -> Vec<Candidate> {
    let base = w1.components();
    let make = |root: Vec<i64>, negated: bool| Candidate {
        diff: base.iter().zip(&root).map(|(a, b)| a - b).collect(),
        root,
        negated,
    };
    let mut out: Vec<Candidate> = permutations_of(base)
        .into_iter()
        .filter(|p| p != base)
        .map(|p| make(p, false))
        .collect();
    if allow_negation && !w1.is_sign_symmetric() {
        out.extend(
            permutations_of(w1.negated().components())
                .into_iter()
                .map(|p| make(p, true)),
        );
    }
    out
}

/// `b` root permutations with mutually orthogonal differences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSet {
    pub w1: InitialVector,
    pub roots: Vec<Vec<i64>>,
    pub diffs: Vec<Vec<i64>>,
    pub norms_sq: Vec<i64>,
}

impl RootSet {
    /// Validates explicit roots: each must be a permutation of `w1` or `-w1`
    /// and the differences must be nonzero and pairwise orthogonal.
    pub fn new(w1: InitialVector, roots: Vec<Vec<i64>>) -> Result<Self> {
        let n = w1.len();
        let neg = w1.negated();
        let mut diffs = Vec::with_capacity(roots.len());
        for r in &roots {
            if r.len() != n {
                return Err(Error::InvalidInput(format!(
                    "root {r:?} has length {}, expected {n}",
                    r.len()
                )));
            }
            if !w1.is_permutation(r) && !neg.is_permutation(r) {
                return Err(Error::InvalidInput(format!(
                    "root {r:?} is not a permutation of {w1} or its negation"
                )));
            }
            let d: Vec<i64> = w1.components().iter().zip(r).map(|(a, b)| a - b).collect();
            if d.iter().all(|&x| x == 0) {
                return Err(Error::ZeroVector("root difference"));
            }
            diffs.push(d);
        }
        for i in 0..diffs.len() {
            for j in i + 1..diffs.len() {
                if dot_i64(&diffs[i], &diffs[j]) != 0 {
                    return Err(Error::InvalidInput(format!(
                        "differences {:?} and {:?} are not orthogonal",
                        diffs[i], diffs[j]
                    )));
                }
            }
        }
        let norms_sq = diffs.iter().map(|d| dot_i64(d, d)).collect();
        Ok(RootSet {
            w1,
            roots,
            diffs,
            norms_sq,
        })
    }

    pub fn bits(&self) -> usize {
        self.roots.len()
    }

    /// Squared edge lengths, ascending.
    pub fn sorted_norms(&self) -> Vec<i64> {
        let mut v = self.norms_sq.clone();
        v.sort_unstable();
        v
    }

    pub fn generators(&self) -> Result<Vec<RatMatrix>> {
        self.diffs.iter().map(|d| reflection_matrix(d)).collect()
    }

    /// Orthotope vertices `w1 - sum_{i in S} d_i`, indexed by subset mask.
    pub fn vertices(&self) -> Vec<Vec<i64>> {
        orthotope_vertices(self.w1.components(), &self.diffs)
    }
}

fn orthotope_vertices(w1: &[i64], diffs: &[Vec<i64>]) -> Vec<Vec<i64>> {
    (0..1usize << diffs.len())
        .map(|mask| {
            let mut v = w1.to_vec();
            for (i, d) in diffs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v.iter_mut().zip(d).for_each(|(x, y)| *x -= y);
                }
            }
            v
        })
        .collect()
}

/// One size-`b` clique of the orthogonality graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clique {
    /// Candidate indices, ascending.
    pub members: Vec<usize>,
    /// Squared difference norms, ascending.
    pub ranking: Vec<i64>,
    /// Every orthotope vertex is `w1` or one of the candidates.
    pub pm_closed: bool,
}

#[derive(Clone, Debug)]
pub struct CliqueReport {
    pub w1: InitialVector,
    pub candidates: Vec<Candidate>,
    pub cliques: Vec<Clique>,
}

impl CliqueReport {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn root_set(&self, index: usize) -> Result<RootSet> {
        let roots = self.cliques[index]
            .members
            .iter()
            .map(|&i| self.candidates[i].root.clone())
            .collect();
        RootSet::new(self.w1.clone(), roots)
    }
}

struct BitSet(Vec<u64>);

impl BitSet {
    fn empty(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn intersect_above(&self, other: &BitSet, floor: usize) -> BitSet {
        let mut out: Vec<u64> = self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect();
        let (word, bit) = (floor / 64, floor % 64);
        for w in out.iter_mut().take(word) {
            *w = 0;
        }
        if word < out.len() {
            out[word] &= !0u64 << bit;
        }
        BitSet(out)
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    wi * 64 + t
                })
            })
        })
    }
}

/// Enumerates every size-`b` set of mutually orthogonal candidate differences.
///
/// Cliques come out in lexicographic order of their candidate indices.
/// `b` mutually orthogonal differences span the balanced hyperplane, so
/// these are exactly the maximal cliques of the graph.
pub fn orthogonal_cliques(
    w1: &InitialVector,
    candidates: Vec<Candidate>,
    b: usize,
) -> Result<CliqueReport> {
    if b == 0 {
        return Err(Error::InvalidInput("need at least one bit".into()));
    }
    let n = candidates.len();
    let mut adj: Vec<BitSet> = (0..n).map(|_| BitSet::empty(n)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if dot_i64(&candidates[i].diff, &candidates[j].diff) == 0 {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }

    let orbit: HashSet<&[i64]> = candidates
        .iter()
        .map(|c| c.root.as_slice())
        .chain(std::iter::once(w1.components()))
        .collect();

    let mut all = BitSet::empty(n);
    (0..n).for_each(|i| all.insert(i));
    let mut found = Vec::new();
    let mut stack = Vec::with_capacity(b);
    extend_clique(&adj, &all, b, &mut stack, &mut found);

    let cliques: Vec<Clique> = found
        .into_iter()
        .map(|members| {
            let diffs: Vec<Vec<i64>> = members.iter().map(|&i| candidates[i].diff.clone()).collect();
            let mut ranking: Vec<i64> = diffs.iter().map(|d| dot_i64(d, d)).collect();
            ranking.sort_unstable();
            let pm_closed = orthotope_vertices(w1.components(), &diffs)
                .iter()
                .all(|v| orbit.contains(v.as_slice()));
            Clique {
                members,
                ranking,
                pm_closed,
            }
        })
        .collect();

    if cliques.is_empty() {
        return Err(Error::DesignInfeasible(format!(
            "no size-{b} orthogonal clique among the {n} differences of {w1}"
        )));
    }
    Ok(CliqueReport {
        w1: w1.clone(),
        candidates,
        cliques,
    })
}

fn extend_clique(
    adj: &[BitSet],
    pool: &BitSet,
    b: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if stack.len() == b {
        out.push(stack.clone());
        return;
    }
    if stack.len() + pool.count() < b {
        return;
    }
    for v in pool.iter() {
        stack.push(v);
        let next = pool.intersect_above(&adj[v], v + 1);
        extend_clique(adj, &next, b, stack, out);
        stack.pop();
    }
}

/// Picks the clique whose ascending norm tuple is lexicographically largest.
///
/// Cliques whose orthotope stays inside the permutation set are preferred;
/// remaining ties go to the earliest clique in enumeration order.
pub fn select_clique(report: &CliqueReport) -> Result<RootSet> {
    let best = report
        .cliques
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            (a.pm_closed, &a.ranking)
                .cmp(&(b.pm_closed, &b.ranking))
                .then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::DesignInfeasible("empty clique report".into()))?;
    report.root_set(best)
}

/// `I - 2 d d^T / <d, d>`.
pub fn reflection_matrix(d: &[i64]) -> Result<RatMatrix> {
    let nsq = dot_i64(d, d);
    if nsq == 0 {
        return Err(Error::ZeroVector("reflection"));
    }
    let n = d.len();
    let mut o = RatMatrix::identity(n);
    let scale = Rational::new(2.into(), nsq.into());
    for i in 0..n {
        for j in 0..n {
            o[(i, j)] -= &scale * rat(d[i] * d[j]);
        }
    }
    Ok(o)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflectionGroup {
    pub generators: Vec<RatMatrix>,
    /// Element `k` is the product of the generators whose bit is set in `k`.
    pub elements: Vec<RatMatrix>,
}

impl ReflectionGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Checks the relations `O_i^2 = I`, `(O_i O_j)^2 = I` and forms all subset
/// products in binary-counting order (`I, O1, O2, O1 O2, O3, ...`).
pub fn generate_group(gens: &[RatMatrix]) -> Result<ReflectionGroup> {
    let Some(first) = gens.first() else {
        return Err(Error::InvalidInput("no generators".into()));
    };
    let n = first.rows();
    if gens.iter().any(|g| g.rows() != n || g.cols() != n) {
        return Err(Error::DimensionMismatch("generators differ in shape".into()));
    }
    let id = RatMatrix::identity(n);
    for (i, g) in gens.iter().enumerate() {
        if mat_mul(g, g)? != id {
            return Err(Error::RelationViolation(format!("O{}^2 != I", i + 1)));
        }
    }
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let p = mat_mul(&gens[i], &gens[j])?;
            if mat_mul(&p, &p)? != id {
                return Err(Error::RelationViolation(format!(
                    "(O{} O{})^2 != I",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let mut elements: Vec<RatMatrix> = Vec::with_capacity(1 << gens.len());
    elements.push(id);
    for g in gens {
        let doubled: Vec<RatMatrix> = elements
            .iter()
            .map(|e| mat_mul(e, g))
            .collect::<Result<_>>()?;
        elements.extend(doubled);
    }
    let distinct: HashSet<&RatMatrix> = elements.iter().collect();
    if distinct.len() != elements.len() {
        return Err(Error::DegenerateGroup {
            expected: elements.len(),
            found: distinct.len(),
        });
    }
    Ok(ReflectionGroup {
        generators: gens.to_vec(),
        elements,
    })
}

/// `2^b x (b+1)` codebook, one row per group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    pub w: RatMatrix,
    pub b: usize,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.w.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.w.rows() == 0
    }
}

/// Row `k` is `w1 * elements[k]` (row-vector convention).
pub fn build_codebook(w1: &InitialVector, g: &ReflectionGroup) -> Result<Codebook> {
    let w = rat_vec(w1.components());
    let rows: Vec<Vec<Rational>> = g
        .elements
        .iter()
        .map(|e| e.left_mul_vec(&w))
        .collect::<Result<_>>()?;
    let distinct: HashSet<&Vec<Rational>> = rows.iter().collect();
    if distinct.len() != rows.len() {
        return Err(Error::DegenerateCodebook);
    }
    Ok(Codebook {
        w: RatMatrix::from_rows(rows)?,
        b: g.generators.len(),
    })
}

/// True when the matrix permutes coordinates.
pub fn is_permutation_matrix(m: &RatMatrix) -> bool {
    m.row_iter().all(|r| {
        r.iter().filter(|x| x.is_one()).count() == 1
            && r.iter().all(|x| x.is_zero() || x.is_one())
    }) && (0..m.cols()).all(|j| m.column(j).iter().filter(|x| x.is_one()).count() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::ratio;

    fn iv(v: &[i64]) -> InitialVector {
        InitialVector::new(v.to_vec()).unwrap()
    }

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn candidate_counts() {
        assert_eq!(candidate_differences(&iv(&[-1, 0, 1]), false).len(), 5);
        let enrz = candidate_differences(&iv(&[-3, 1, 1, 1]), true);
        assert_eq!(enrz.len(), 7);
        assert!(enrz.iter().any(|c| c.root == vec![-1, 3, -1, -1] && c.negated));
        assert_eq!(candidate_differences(&iv(&[-1, -1, 1, 1]), true).len(), 5);
    }

    #[test]
    fn hexagon_has_two_cliques() {
        let w1 = iv(&[-1, 0, 1]);
        let report = orthogonal_cliques(&w1, candidate_differences(&w1, false), 2).unwrap();
        assert_eq!(report.len(), 2);
        assert_eq!(report.cliques[0].ranking, report.cliques[1].ranking);
        assert!(report.cliques.iter().all(|c| c.pm_closed));
    }

    #[test]
    fn five_wire_single_pair_is_infeasible() {
        let w1 = iv(&[-1, 0, 0, 0, 1]);
        let err = orthogonal_cliques(&w1, candidate_differences(&w1, false), 4).unwrap_err();
        assert!(matches!(err, Error::DesignInfeasible(_)));
    }

    #[test]
    fn six_wire_clique_count() {
        let w1 = iv(&[1, -1, -3, -1, 1, 3]);
        let report = orthogonal_cliques(&w1, candidate_differences(&w1, false), 5).unwrap();
        assert_eq!(report.candidates.len(), 179);
        assert_eq!(report.len(), 24);
    }

    #[test]
    fn selection_prefers_largest_minimum_norm() {
        let w1 = iv(&[-3, -1, 1, 3]);
        let report = orthogonal_cliques(&w1, candidate_differences(&w1, false), 3).unwrap();
        let rs = select_clique(&report).unwrap();
        assert_eq!(rs.sorted_norms(), vec![16, 32, 32]);
        assert_eq!(
            rs.roots,
            vec![vec![-3, 3, 1, -1], vec![-1, -3, 3, 1], vec![1, -1, -3, 3]]
        );
    }

    #[test]
    fn selection_tie_goes_to_first() {
        let w1 = iv(&[-1, 0, 1]);
        let report = orthogonal_cliques(&w1, candidate_differences(&w1, false), 2).unwrap();
        let rs = select_clique(&report).unwrap();
        assert_eq!(rs, report.root_set(0).unwrap());
    }

    #[test]
    fn single_clique_report() {
        let w1 = iv(&[-3, 1, 1, 1]);
        let report = orthogonal_cliques(&w1, candidate_differences(&w1, true), 3).unwrap();
        assert_eq!(report.len(), 1);
        assert_eq!(select_clique(&report).unwrap().sorted_norms(), vec![16, 16, 16]);
    }

    #[test]
    fn reflection_fixtures() {
        assert_eq!(
            reflection_matrix(&[0, -1, 1]).unwrap(),
            m(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]])
        );
        assert_eq!(
            reflection_matrix(&[-2, 1, 1]).unwrap(),
            m(&[&[-1, 2, 2], &[2, 2, -1], &[2, -1, 2]]).scale(&ratio(1, 3))
        );
        assert_eq!(
            reflection_matrix(&[-1, 1, -1, 1]).unwrap(),
            m(&[&[1, 1, -1, 1], &[1, 1, 1, -1], &[-1, 1, 1, 1], &[1, -1, 1, 1]])
                .scale(&ratio(1, 2))
        );
        assert_eq!(reflection_matrix(&[0, 0]), Err(Error::ZeroVector("reflection")));
    }

    #[test]
    fn reflection_swaps_w1_with_root() {
        let w1 = iv(&[-3, -1, 1, 3]);
        let rs = RootSet::new(
            w1.clone(),
            vec![vec![-3, 3, 1, -1], vec![-1, -3, 3, 1], vec![1, -1, -3, 3]],
        )
        .unwrap();
        for (g, root) in rs.generators().unwrap().iter().zip(&rs.roots) {
            assert!(g.is_symmetric());
            assert_eq!(mat_mul(g, &g.transpose()).unwrap(), RatMatrix::identity(4));
            assert_eq!(g.left_mul_vec(&rat_vec(w1.components())).unwrap(), rat_vec(root));
        }
    }

    #[test]
    fn hexagon_group_order_four() {
        let g = generate_group(&[
            reflection_matrix(&[0, -1, 1]).unwrap(),
            reflection_matrix(&[-2, 1, 1]).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.elements[0], RatMatrix::identity(3));
        assert_eq!(g.elements[3], mat_mul(&g.generators[0], &g.generators[1]).unwrap());
    }

    #[test]
    fn single_generator_group() {
        let o = reflection_matrix(&[1, -1]).unwrap();
        let g = generate_group(std::slice::from_ref(&o)).unwrap();
        assert_eq!(g.elements, vec![RatMatrix::identity(2), o]);
    }

    #[test]
    fn relation_violation_detected() {
        // reflections in non-orthogonal mirrors do not commute
        let err = generate_group(&[
            reflection_matrix(&[1, -1, 0]).unwrap(),
            reflection_matrix(&[0, 1, -1]).unwrap(),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::RelationViolation(_)));
        let not_involution = m(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        assert!(matches!(
            generate_group(&[not_involution]),
            Err(Error::RelationViolation(_))
        ));
    }

    #[test]
    fn degenerate_group_detected() {
        let o = reflection_matrix(&[0, -1, 1]).unwrap();
        let err = generate_group(&[o.clone(), o]).unwrap_err();
        assert_eq!(err, Error::DegenerateGroup { expected: 4, found: 2 });
    }

    #[test]
    fn codebook_on_mirror_is_degenerate() {
        // O1 swaps the equal second and third components, fixing w1
        let w1 = iv(&[-2, 1, 1]);
        let g = generate_group(&[reflection_matrix(&[0, -1, 1]).unwrap()]).unwrap();
        assert_eq!(build_codebook(&w1, &g), Err(Error::DegenerateCodebook));
    }

    #[test]
    fn hexagon_codebook() {
        let w1 = iv(&[-1, 0, 1]);
        let rs = RootSet::new(w1.clone(), vec![vec![-1, 1, 0], vec![1, -1, 0]]).unwrap();
        let g = generate_group(&rs.generators().unwrap()).unwrap();
        let cb = build_codebook(&w1, &g).unwrap();
        // binary-counting order: I, O1, O2, O1 O2
        assert_eq!(cb.w, m(&[&[-1, 0, 1], &[-1, 1, 0], &[1, -1, 0], &[1, 0, -1]]));
        let verts: Vec<Vec<Rational>> = rs.vertices().iter().map(|v| rat_vec(v)).collect();
        assert_eq!(cb.w.to_rows(), verts);
    }

    #[test]
    fn root_set_validation() {
        let w1 = iv(&[-1, 0, 1]);
        assert!(RootSet::new(w1.clone(), vec![vec![-1, 1, 0], vec![0, -1, 1]]).is_err());
        assert!(RootSet::new(w1.clone(), vec![vec![-1, 0, 1]]).is_err());
        assert!(RootSet::new(w1.clone(), vec![vec![2, -1, -1]]).is_err());
        assert!(RootSet::new(w1, vec![vec![1, 0]]).is_err());
    }

    #[test]
    fn negation_parse() {
        assert_eq!("auto".parse::<Negation>().unwrap(), Negation::Auto);
        assert_eq!("on".parse::<Negation>().unwrap(), Negation::On);
        assert_eq!("off".parse::<Negation>().unwrap(), Negation::Off);
        assert!("maybe".parse::<Negation>().is_err());
    }
}
