//! Permutation-modulation sets and their initial vectors.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::{rat, Rational};

/// A balanced integer vector whose permutations seed a code.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct InitialVector {
    components: Vec<i64>,
}

impl InitialVector {
    pub fn new(components: Vec<i64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidInput(
                "initial vector needs at least two components".into(),
            ));
        }
        if components.iter().sum::<i64>() != 0 {
            return Err(Error::InvalidInput(format!(
                "initial vector {components:?} is not balanced"
            )));
        }
        if components.iter().all(|&x| x == 0) {
            return Err(Error::ZeroVector("initial vector"));
        }
        Ok(InitialVector { components })
    }

    pub fn components(&self) -> &[i64] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Number of information bits carried on `len()` wires.
    pub fn bits(&self) -> usize {
        self.components.len() - 1
    }

    pub fn norm_sq(&self) -> i64 {
        self.components.iter().map(|x| x * x).sum()
    }

    pub fn negated(&self) -> InitialVector {
        InitialVector {
            components: self.components.iter().map(|x| -x).collect(),
        }
    }

    /// Distinct values in ascending order with their multiplicities.
    pub fn value_counts(&self) -> Vec<(i64, usize)> {
        let mut sorted = self.components.clone();
        sorted.sort_unstable();
        let mut out: Vec<(i64, usize)> = Vec::new();
        for x in sorted {
            match out.last_mut() {
                Some((v, c)) if *v == x => *c += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.value_counts().into_iter().map(|(_, c)| c).collect()
    }

    /// True when `v` is a rearrangement of this vector.
    pub fn is_permutation(&self, v: &[i64]) -> bool {
        let mut a = self.components.clone();
        let mut b = v.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// True when `-w1` is itself a rearrangement of `w1`.
    pub fn is_sign_symmetric(&self) -> bool {
        self.is_permutation(self.negated().components())
    }
}

impl TryFrom<Vec<i64>> for InitialVector {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        InitialVector::new(v)
    }
}

impl From<InitialVector> for Vec<i64> {
    fn from(w: InitialVector) -> Vec<i64> {
        w.components
    }
}

impl fmt::Debug for InitialVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for InitialVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All distinct permutations of an initial vector, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmSet {
    pub initial: InitialVector,
    pub vectors: Vec<Vec<i64>>,
}

impl PmSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn next_permutation(v: &mut [i64]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Lexicographic enumeration of the distinct rearrangements of `values`.
pub fn permutations_of(values: &[i64]) -> Vec<Vec<i64>> {
    let mut cur = values.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

pub fn distinct_permutations(w1: &InitialVector) -> PmSet {
    PmSet {
        initial: w1.clone(),
        vectors: permutations_of(w1.components()),
    }
}

/// Multinomial coefficient `n! / (m1! m2! ... mr!)`.
pub fn pm_cardinality(multiplicities: &[usize]) -> u128 {
    // product of binomials avoids the n! overflow
    let mut total = 0u128;
    let mut acc = 1u128;
    for &m in multiplicities {
        for k in 1..=m as u128 {
            total += 1;
            acc = acc * total / k;
        }
    }
    acc
}

/// Builds the equally spaced initial vector for a partition of `b + 1`.
///
/// Multiplicities are sorted ascending (ties keep their input order) and
/// dealt to the levels `0, k-1, 1, k-2, ...`; the result is centred and
/// reduced to the smallest integer realisation, listed in ascending order.
pub fn initial_vector_from_partition(partition: &[usize], b: usize) -> Result<InitialVector> {
    if partition.contains(&0) {
        return Err(Error::InvalidInput("partition parts must be positive".into()));
    }
    let n: usize = partition.iter().sum();
    if n != b + 1 {
        return Err(Error::InvalidInput(format!(
            "partition {partition:?} sums to {n}, expected {}",
            b + 1
        )));
    }
    let k = partition.len();
    if k < 2 {
        return Err(Error::DesignInfeasible(
            "a single level cannot form a balanced nonzero vector".into(),
        ));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (partition[i], i));

    let (mut lo, mut hi) = (0i64, k as i64 - 1);
    let mut levels = Vec::with_capacity(n);
    for (rank, &i) in order.iter().enumerate() {
        let mu = if rank % 2 == 0 {
            lo += 1;
            lo - 1
        } else {
            hi -= 1;
            hi + 1
        };
        levels.extend(std::iter::repeat_n(mu, partition[i]));
    }
    levels.sort_unstable();

    // n * (mu - mean) is integral
    let total: i64 = levels.iter().sum();
    let scaled: Vec<i64> = levels.iter().map(|&mu| n as i64 * mu - total).collect();
    let g = scaled.iter().fold(0i64, |acc, x| acc.gcd(x));
    InitialVector::new(scaled.into_iter().map(|x| x / g).collect())
}

/// Minimum squared distance between two distinct members of the set.
///
/// For a permutation set this is attained by swapping two adjacent levels,
/// so it equals twice the smallest squared gap between distinct values.
pub fn pm_min_distance(s: &PmSet) -> Result<Rational> {
    if s.len() < 2 {
        return Err(Error::InvalidInput(
            "minimum distance needs at least two vectors".into(),
        ));
    }
    let counts = s.initial.value_counts();
    let gap = counts
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .min()
        .expect("two distinct values");
    Ok(rat(2 * gap * gap))
}
