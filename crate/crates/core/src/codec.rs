//! Detection matrix, the `W M^T = B D` factorisation, linear encoding and
//! slicer decoding.
//!
//! Row `j >= 1` of `M` is the primitive integer form of `d_j = w1 - w_{j+1}`,
//! so the first codeword maps to the all-`+1` bit pattern.

use num_traits::{One, Signed, Zero};

use crate::coxeter::{Codebook, RootSet};
use crate::error::{Error, Result};
use crate::exactla::{
    mat_inverse, mat_mul, primitive, rat, rat_vec, to_f64, RatMatrix, Rational,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectionMatrix {
    pub m: RatMatrix,
    /// Squared row norms `xi_j^2`, first entry `b + 1`.
    pub row_norms_sq: Vec<Rational>,
}

impl DetectionMatrix {
    pub fn from_matrix(m: RatMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("detection matrix must be square".into()));
        }
        let row_norms_sq = m.row_iter().map(|r| r.iter().map(|x| x * x).sum()).collect();
        Ok(DetectionMatrix { m, row_norms_sq })
    }

    pub fn bits(&self) -> usize {
        self.m.rows() - 1
    }

    pub fn to_f64(&self) -> FloatSlicer {
        FloatSlicer {
            rows: self.m.to_f64_rows(),
        }
    }
}

pub fn detection_matrix(rs: &RootSet) -> Result<DetectionMatrix> {
    let n = rs.w1.len();
    let mut rows = vec![vec![Rational::one(); n]];
    for d in &rs.diffs {
        let p = primitive(&rat_vec(d))?;
        rows.push(p.into_iter().map(Rational::from_integer).collect());
    }
    DetectionMatrix::from_matrix(RatMatrix::from_rows(rows)?)
}

/// `B` and the diagonal of `D` from `W M^T = B D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub info: RatMatrix,
    /// `(0, d_1, ..., d_b)`.
    pub diag: Vec<Rational>,
}

impl Factorization {
    pub fn diag_matrix(&self) -> RatMatrix {
        RatMatrix::diagonal(&self.diag)
    }
}

pub fn factor_bd(w: &Codebook, m: &DetectionMatrix) -> Result<Factorization> {
    let wm = mat_mul(&w.w, &m.m.transpose())?;
    let cols = wm.cols();
    let first = wm.row(0);
    let mut diag = vec![Rational::zero()];
    for j in 1..cols {
        let d = first[j].abs();
        if d.is_zero() {
            return Err(Error::NotOrthotope(format!("slicer {j} has zero eye opening")));
        }
        diag.push(d);
    }
    let mut info = RatMatrix::zeros(wm.rows(), cols);
    for i in 0..wm.rows() {
        if !wm[(i, 0)].is_zero() {
            return Err(Error::NotOrthotope(format!("codeword {i} is not balanced")));
        }
        for j in 1..cols {
            let x = &wm[(i, j)];
            if x.abs() != diag[j] {
                return Err(Error::NotOrthotope(format!(
                    "entry ({i},{j}) has magnitude {} but column magnitude is {}",
                    x.abs(),
                    diag[j]
                )));
            }
            info[(i, j)] = x.signum();
        }
    }
    Ok(Factorization { info, diag })
}

/// `K = D M^{-T}` with its free first row set to zero.
pub fn encoding_matrix(f: &Factorization, m: &DetectionMatrix) -> Result<RatMatrix> {
    let m_inv_t = mat_inverse(&m.m)?.transpose();
    let mut k = mat_mul(&f.diag_matrix(), &m_inv_t)?;
    for j in 0..k.cols() {
        k[(0, j)] = Rational::zero();
    }
    Ok(k)
}

/// `B`, `D` and `K` for one code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodecBundle {
    pub info: RatMatrix,
    pub diag: Vec<Rational>,
    pub k: RatMatrix,
}

impl CodecBundle {
    pub fn new(w: &Codebook, m: &DetectionMatrix) -> Result<Self> {
        let f = factor_bd(w, m)?;
        let k = encoding_matrix(&f, m)?;
        Ok(CodecBundle {
            info: f.info,
            diag: f.diag,
            k,
        })
    }

    pub fn diag_matrix(&self) -> RatMatrix {
        RatMatrix::diagonal(&self.diag)
    }
}

fn check_bits(bits: &[i8]) -> Result<()> {
    if let Some(b) = bits.iter().find(|&&b| b != 1 && b != -1) {
        return Err(Error::InvalidInput(format!("bit value {b} is not +1 or -1")));
    }
    Ok(())
}

/// `(0, bits) K`.
pub fn encode(bits: &[i8], k: &RatMatrix) -> Result<Vec<Rational>> {
    check_bits(bits)?;
    if bits.len() + 1 != k.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} bits for a {}-row encoding matrix",
            bits.len(),
            k.rows()
        )));
    }
    let row: Vec<Rational> = std::iter::once(Rational::zero())
        .chain(bits.iter().map(|&b| rat(b as i64)))
        .collect();
    k.left_mul_vec(&row)
}

/// Slicer output for one received vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub bits: Vec<i8>,
    /// `<y, 1>`, ignored by the slicer.
    pub common_mode: f64,
    /// Some slicer input was exactly zero and was resolved to `+1`.
    pub ambiguous: bool,
}

/// Floating-point copy of `M` for the per-sample path.
#[derive(Clone, Debug)]
pub struct FloatSlicer {
    rows: Vec<Vec<f64>>,
}

impl FloatSlicer {
    pub fn bits(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn decide(&self, y: &[f64]) -> Decision {
        let mut ambiguous = false;
        let mut proj = self.rows.iter().map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum::<f64>());
        let common_mode = proj.next().unwrap_or(0.0);
        let bits = proj
            .map(|v| {
                if v == 0.0 {
                    ambiguous = true;
                }
                if v < 0.0 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        Decision {
            bits,
            common_mode,
            ambiguous,
        }
    }

    /// Decision as a mask: bit `j` set when slicer `j` reads `-1`.
    pub fn decide_mask(&self, y: &[f64]) -> (usize, bool) {
        let mut mask = 0usize;
        let mut ambiguous = false;
        for (j, r) in self.rows[1..].iter().enumerate() {
            let v: f64 = r.iter().zip(y).map(|(a, b)| a * b).sum();
            if v < 0.0 {
                mask |= 1 << j;
            } else if v == 0.0 {
                ambiguous = true;
            }
        }
        (mask, ambiguous)
    }
}

pub fn decode(y: &[f64], m: &DetectionMatrix) -> Result<Decision> {
    if y.len() != m.m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "received vector of length {} for {} wires",
            y.len(),
            m.m.cols()
        )));
    }
    Ok(m.to_f64().decide(y))
}

/// Bits for mask `k`: bit `j` is `-1` when bit `j` of `k` is set.
pub fn bits_from_mask(mask: usize, b: usize) -> Vec<i8> {
    (0..b).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect()
}

/// Projection onto the balanced hyperplane plus the all-ones axis.
#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    Exact(Vec<Rational>),
    Approx(Vec<f64>),
}

impl Projection {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Projection::Exact(v) => v.iter().map(to_f64).collect(),
            Projection::Approx(v) => v.clone(),
        }
    }
}

fn exact_sqrt(n: usize) -> Option<i64> {
    let r = (n as f64).sqrt().round() as i64;
    (r * r == n as i64).then_some(r)
}

/// Peterson's `n x n` projection matrix when `sqrt(n)` is an integer.
pub fn peterson_matrix_exact(n: usize) -> Option<RatMatrix> {
    let s = exact_sqrt(n)?;
    if n < 2 {
        return None;
    }
    let gamma = Rational::new(1.into(), s.into());
    let beta = Rational::new((-1).into(), (n as i64 - s).into());
    let mut a = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = if j == n - 1 || i == n - 1 {
                gamma.clone()
            } else if i == j {
                Rational::one() + &beta
            } else {
                beta.clone()
            };
        }
    }
    Some(a)
}

pub fn peterson_matrix_f64(n: usize) -> Vec<Vec<f64>> {
    let nf = n as f64;
    let gamma = 1.0 / nf.sqrt();
    let beta = -1.0 / (nf - nf.sqrt());
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j == n - 1 || i == n - 1 {
                        gamma
                    } else if i == j {
                        1.0 + beta
                    } else {
                        beta
                    }
                })
                .collect()
        })
        .collect()
}

/// `w A`; exact when `n` is a perfect square, floating point otherwise.
pub fn peterson_project(w: &[Rational], n: usize) -> Result<Projection> {
    if w.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for n = {n}",
            w.len()
        )));
    }
    if let Some(a) = peterson_matrix_exact(n) {
        return Ok(Projection::Exact(a.left_mul_vec(w)?));
    }
    let a = peterson_matrix_f64(n);
    let wf: Vec<f64> = w.iter().map(to_f64).collect();
    Ok(Projection::Approx(
        (0..n)
            .map(|j| wf.iter().zip(&a).map(|(x, row)| x * row[j]).sum())
            .collect(),
    ))
}
