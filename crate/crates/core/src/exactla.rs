//! Dense matrices over the rationals.
//!
//! Every design-time quantity (generators, codebooks, detection and encoding
//! matrices) lives here so that equality checks are exact.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats as `p` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Row-major dense rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RatMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn diagonal(diag: &[Rational]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor for integer fixtures.
    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| rat(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Rational]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.row_iter().map(<[Rational]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, s: &Rational) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn diag(&self) -> Vec<Rational> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].clone())
            .collect()
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> Rational {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn map<F: Fn(&Rational) -> Rational>(&self, f: F) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.row_iter()
            .map(|r| r.iter().map(to_f64).collect())
            .collect()
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} times {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.cols)
            .map(|j| v.iter().enumerate().map(|(i, x)| x * &self[(i, j)]).sum())
            .collect())
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self
            .row_iter()
            .map(|r| r.iter().map(format_rational).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for row in &cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "  {}", line.join(" "))?;
        }
        Ok(())
    }
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> Result<RatMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = RatMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = &a[(i, k)];
            if aik.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let bkj = &b[(k, j)];
                if !bkj.is_zero() {
                    out[(i, j)] += aik * bkj;
                }
            }
        }
    }
    Ok(out)
}

/// Gauss-Jordan inversion in exact arithmetic.
pub fn mat_inverse(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = RatMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[(r, col)].is_zero())
            .ok_or(Error::SingularMatrix)?;
        if pivot != col {
            for j in 0..n {
                a.data.swap(pivot * n + j, col * n + j);
                inv.data.swap(pivot * n + j, col * n + j);
            }
        }
        let p = a[(col, col)].recip();
        for j in 0..n {
            a[(col, j)] *= &p;
            inv[(col, j)] *= &p;
        }
        for r in 0..n {
            if r == col || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for j in 0..n {
                let t = &f * &a[(col, j)];
                a[(r, j)] -= t;
                let t = &f * &inv[(col, j)];
                inv[(r, j)] -= t;
            }
        }
    }
    Ok(inv)
}

/// `d * d^T`.
pub fn gram(d: &RatMatrix) -> RatMatrix {
    let n = d.rows;
    let mut g = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: Rational = d.row(i).iter().zip(d.row(j)).map(|(x, y)| x * y).sum();
            g[(j, i)] = v.clone();
            g[(i, j)] = v;
        }
    }
    g
}

/// Scales `v` by the positive rational that makes its entries coprime integers.
pub fn primitive(v: &[Rational]) -> Result<Vec<BigInt>> {
    if v.iter().all(Zero::is_zero) {
        return Err(Error::ZeroVector("primitive scaling"));
    }
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints
        .iter()
        .fold(BigInt::zero(), |acc, x| acc.gcd(x))
        .abs();
    Ok(ints.into_iter().map(|x| x / &g).collect())
}

/// Integer specialisation of [`primitive`].
pub fn primitive_i64(v: &[i64]) -> Result<Vec<i64>> {
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g == 0 {
        return Err(Error::ZeroVector("primitive scaling"));
    }
    Ok(v.iter().map(|x| x / g).collect())
}

pub fn dot_i64(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rat_vec(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| rat(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_i64_rows(rows).unwrap()
    }

    fn eq5() -> RatMatrix {
        m(&[&[1, 1, 1], &[2, -1, -1], &[0, 1, -1]])
    }

    fn eq4() -> RatMatrix {
        m(&[&[-1, 0, 1], &[-1, 1, 0], &[1, 0, -1], &[1, -1, 0]])
    }

    #[test]
    fn identity_product() {
        assert_eq!(mat_mul(&RatMatrix::identity(3), &eq5()).unwrap(), eq5());
    }

    #[test]
    fn transformed_codebook() {
        let wm = mat_mul(&eq4(), &eq5().transpose()).unwrap();
        assert_eq!(wm, m(&[&[0, -3, -1], &[0, -3, 1], &[0, 3, 1], &[0, 3, -1]]));
    }

    #[test]
    fn encoding_with_half_detection_matrix() {
        let b = m(&[&[0, -1, -1], &[0, -1, 1], &[0, 1, 1], &[0, 1, -1]]);
        let k = eq5().scale(&ratio(1, 2));
        assert_eq!(mat_mul(&b, &k).unwrap(), eq4());
    }

    #[test]
    fn mul_dimension_mismatch() {
        assert!(matches!(
            mat_mul(&eq4(), &eq4()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn inverse_of_diagonal() {
        let d = RatMatrix::diagonal(&[rat(1), rat(2), rat(4)]);
        let inv = mat_inverse(&d).unwrap();
        assert_eq!(inv, RatMatrix::diagonal(&[rat(1), ratio(1, 2), ratio(1, 4)]));
        assert_eq!(mat_inverse(&RatMatrix::identity(4)).unwrap(), RatMatrix::identity(4));
    }

    #[test]
    fn inverse_multiplies_back() {
        let m2 = m(&[&[1, 1, 1, 1], &[0, -1, 0, 1], &[-1, 1, -1, 1], &[-1, 0, 1, 0]]);
        let inv = mat_inverse(&m2).unwrap();
        assert_eq!(mat_mul(&m2, &inv).unwrap(), RatMatrix::identity(4));
        assert_eq!(mat_mul(&inv, &m2).unwrap(), RatMatrix::identity(4));
    }

    #[test]
    fn singular_and_non_square() {
        let s = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(mat_inverse(&s), Err(Error::SingularMatrix));
        assert!(matches!(
            mat_inverse(&eq4()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn gram_small_cases() {
        assert_eq!(gram(&m(&[&[0, -1, 1]])), m(&[&[2]]));
        assert_eq!(gram(&m(&[&[0, -1, 1], &[-2, 1, 1]])), m(&[&[2, 0], &[0, 6]]));
    }

    #[test]
    fn gram_zero_pattern_matches_dot_products() {
        // every nontrivial permutation of (-1, 0, 1)
        let w1 = [-1i64, 0, 1];
        let others: [[i64; 3]; 5] = [[-1, 1, 0], [0, -1, 1], [0, 1, -1], [1, -1, 0], [1, 0, -1]];
        let diffs: Vec<Vec<i64>> = others
            .iter()
            .map(|p| w1.iter().zip(p).map(|(a, b)| a - b).collect())
            .collect();
        let g = gram(&RatMatrix::from_i64_rows(&diffs).unwrap());
        assert!(g.is_symmetric());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(g[(i, j)], rat(dot_i64(&diffs[i], &diffs[j])));
            }
        }
        // two orthogonal pairs, each seen from both sides
        let zeros = (0..5)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .filter(|&(i, j)| g[(i, j)].is_zero())
            .count();
        assert_eq!(zeros, 4);
    }

    #[test]
    fn primitive_examples() {
        let p = primitive(&rat_vec(&[0, -2, 2])).unwrap();
        assert_eq!(p, vec![BigInt::from(0), BigInt::from(-1), BigInt::from(1)]);
        let half = [ratio(-1, 2), ratio(1, 2), ratio(-1, 2), ratio(1, 2)];
        let p = primitive(&half).unwrap();
        assert_eq!(p, [-1, 1, -1, 1].map(BigInt::from).to_vec());
        assert_eq!(primitive_i64(&[-2, 1, 1]).unwrap(), vec![-2, 1, 1]);
        assert_eq!(primitive(&rat_vec(&[0, 0])), Err(Error::ZeroVector("primitive scaling")));
    }

    #[test]
    fn rational_text_round_trip() {
        for r in [ratio(-7, 3), rat(0), rat(12), ratio(1, 2)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = RatMatrix> {
        proptest::collection::vec((-6i64..=6, 1i64..=4), n * n).prop_map(move |v| {
            RatMatrix::new(n, n, v.into_iter().map(|(a, b)| ratio(a, b)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn inverse_is_exact(a in small_matrix(4)) {
            if let Ok(inv) = mat_inverse(&a) {
                prop_assert_eq!(mat_mul(&a, &inv).unwrap(), RatMatrix::identity(4));
            }
        }

        #[test]
        fn gram_symmetric_with_norm_diagonal(rows in proptest::collection::vec(proptest::collection::vec(-5i64..=5, 4), 1..6)) {
            let d = RatMatrix::from_i64_rows(&rows).unwrap();
            let g = gram(&d);
            prop_assert!(g.is_symmetric());
            for (i, r) in rows.iter().enumerate() {
                prop_assert_eq!(&g[(i, i)], &rat(dot_i64(r, r)));
            }
        }

        #[test]
        fn primitive_scale_invariant(v in proptest::collection::vec(-9i64..=9, 1..6), num in 1i64..20, den in 1i64..20) {
            prop_assume!(v.iter().any(|&x| x != 0));
            let c = ratio(num, den);
            let scaled: Vec<Rational> = rat_vec(&v).iter().map(|x| x * &c).collect();
            prop_assert_eq!(primitive(&scaled).unwrap(), primitive(&rat_vec(&v)).unwrap());
        }
    }
}
