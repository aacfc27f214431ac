//! Error-rate descriptors of an orthotope code on the AWGN channel.
//!
//! Each slicer sees an independent Gaussian with its own scale, so the word
//! error probability factors over slicers. The per-slicer distance to
//! threshold, normalised by the energy per bit, is `alpha_j`; the exact
//! values are carried as `alpha_j^2` rationals and square-rooted once.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::{dot_i64, mat_mul, rat, to_f64, Rational};
use crate::linecode::LineCode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceProfile {
    pub alphas: Vec<f64>,
    #[serde(skip)]
    pub alpha_sq: Vec<Rational>,
    pub alpha_min: f64,
    pub nu: usize,
    #[serde(skip)]
    pub d_min_sq: Rational,
    #[serde(skip)]
    pub energy_per_tuple: Rational,
    /// First row of `|W M^T|` without the common-mode entry.
    #[serde(skip)]
    pub eye_row: Vec<Rational>,
    /// `xi_j^2` for the slicer rows of `M`.
    #[serde(skip)]
    pub xi_sq: Vec<Rational>,
}

impl PerformanceProfile {
    /// Builds a profile from bare alpha values, for analytic comparisons.
    pub fn from_alphas(alphas: &[f64]) -> Self {
        let alpha_min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
        let nu = alphas.iter().filter(|&&a| a == alpha_min).count();
        PerformanceProfile {
            alphas: alphas.to_vec(),
            alpha_sq: Vec::new(),
            alpha_min,
            nu,
            d_min_sq: Rational::zero(),
            energy_per_tuple: Rational::zero(),
            eye_row: Vec::new(),
            xi_sq: Vec::new(),
        }
    }

    pub fn bits(&self) -> usize {
        self.alphas.len()
    }

    /// `sum alpha_j^2`, exact.
    pub fn alpha_sq_sum(&self) -> Rational {
        self.alpha_sq.iter().sum()
    }

    /// Alphas rounded to two decimals for display.
    pub fn rounded(&self) -> Vec<f64> {
        self.alphas.iter().map(|a| (a * 100.0).round() / 100.0).collect()
    }
}

/// Computes alpha through the eye openings of `W M^T` and, independently,
/// through the root distances; the two must agree exactly.
pub fn alphas(code: &LineCode) -> Result<PerformanceProfile> {
    let b = code.bits();
    let w = &code.codebook.w;
    let wm = mat_mul(w, &code.detection.m.transpose())?;
    let abs_rows: Vec<Vec<Rational>> = wm
        .row_iter()
        .map(|r| r.iter().map(num_traits::Signed::abs).collect())
        .collect();
    if abs_rows.iter().any(|r| *r != abs_rows[0]) {
        return Err(Error::ProfileMismatch(
            "rows of |W M^T| differ, error probability is not uniform".into(),
        ));
    }
    let eye_row: Vec<Rational> = abs_rows[0][1..].to_vec();
    let xi_sq: Vec<Rational> = code.detection.row_norms_sq[1..].to_vec();
    let frob = w.frobenius_sq();
    let tuples = rat(1i64 << b);
    let bb = rat(b as i64);

    // (|W M^T| (M M^T)^{-1/2})_{1j}^2 / (||W||^2 / (b 2^b))
    let via_eye: Vec<Rational> = eye_row
        .iter()
        .zip(&xi_sq)
        .map(|(e, x)| e * e / x * &bb * &tuples / &frob)
        .collect();

    // b ||w1 - w_j||^2 / (4 ||w1||^2)
    let w1_sq = rat(code.w1().norm_sq());
    let via_roots: Vec<Rational> = code
        .root_set
        .diffs
        .iter()
        .map(|d| &bb * rat(dot_i64(d, d)) / (rat(4) * &w1_sq))
        .collect();

    if via_eye != via_roots {
        return Err(Error::ProfileMismatch(format!(
            "eye-opening route gives {via_eye:?}, root-distance route gives {via_roots:?}"
        )));
    }
    let alphas: Vec<f64> = via_eye.iter().map(|a| to_f64(a).sqrt()).collect();
    let alt: Vec<f64> = code
        .root_set
        .diffs
        .iter()
        .map(|d| (b as f64).sqrt() * (dot_i64(d, d) as f64).sqrt() / (2.0 * (w1_sq.to_f64().unwrap()).sqrt()))
        .collect();
    if alphas.iter().zip(&alt).any(|(a, c)| (a - c).abs() > 1e-12) {
        return Err(Error::ProfileMismatch(format!("{alphas:?} vs {alt:?}")));
    }

    let min_sq = via_eye.iter().min().cloned().expect("at least one slicer");
    let nu = via_eye.iter().filter(|a| **a == min_sq).count();
    Ok(PerformanceProfile {
        alpha_min: to_f64(&min_sq).sqrt(),
        alphas,
        alpha_sq: via_eye,
        nu,
        d_min_sq: codebook_min_distance(code)?,
        energy_per_tuple: frob / tuples,
        eye_row,
        xi_sq,
    })
}

/// Alpha values for an arbitrary real initial vector under the group of
/// `diffs`: `sqrt(b) |<w, d_j>| / (||d_j|| ||w||)`.
pub fn alphas_for_vector(diffs: &[Vec<i64>], w: &[f64]) -> Vec<f64> {
    let b = diffs.len() as f64;
    let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    diffs
        .iter()
        .map(|d| {
            let dn = (dot_i64(d, d) as f64).sqrt();
            let p: f64 = d.iter().zip(w).map(|(&a, x)| a as f64 * x).sum();
            b.sqrt() * p.abs() / (dn * wn)
        })
        .collect()
}

/// Exact `alpha_j^2 = b <w, d_j>^2 / (||d_j||^2 ||w||^2)` for an integer vector.
pub fn alpha_sq_for_vector(diffs: &[Vec<i64>], w: &[i64]) -> Vec<Rational> {
    let b = rat(diffs.len() as i64);
    let wn = rat(dot_i64(w, w));
    diffs
        .iter()
        .map(|d| {
            let p = rat(dot_i64(d, w));
            &b * &p * &p / (rat(dot_i64(d, d)) * &wn)
        })
        .collect()
}

/// Gaussian tail probability `P(N(0,1) > x)`.
///
/// Relative error stays within a few ulp for `x` up to about 26, where the
/// result underflows.
pub fn qfunc(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("eta must be positive, got {eta}")))
    }
}

/// `1 - prod_j (1 - Q(alpha_j sqrt(2 eta)))`.
pub fn exact_word_error(profile: &PerformanceProfile, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let s = (2.0 * eta).sqrt();
    // 1 - prod(1 - q) = -expm1(sum ln(1 - q)) keeps precision for tiny q
    let log_ok: f64 = profile.alphas.iter().map(|a| (-qfunc(a * s)).ln_1p()).sum();
    Ok(-log_ok.exp_m1())
}

/// `sum_j Q(alpha_j sqrt(2 eta))`.
pub fn union_bound(profile: &PerformanceProfile, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let s = (2.0 * eta).sqrt();
    Ok(profile.alphas.iter().map(|a| qfunc(a * s)).sum())
}

/// `nu Q(alpha_min sqrt(2 eta))`.
pub fn asymptotic_wer(profile: &PerformanceProfile, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(profile.nu as f64 * qfunc(profile.alpha_min * (2.0 * eta).sqrt()))
}

/// Bit error probability averaged over the `b` slicers.
pub fn exact_bit_error(profile: &PerformanceProfile, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let s = (2.0 * eta).sqrt();
    Ok(profile.alphas.iter().map(|a| qfunc(a * s)).sum::<f64>() / profile.bits() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eta: f64,
    pub p_exact: f64,
    pub p_union: f64,
    pub p_asymptotic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
}

pub fn error_curve(profile: &PerformanceProfile, etas: &[f64]) -> Result<ErrorCurve> {
    let points = etas
        .iter()
        .map(|&eta| {
            Ok(CurvePoint {
                eta,
                p_exact: exact_word_error(profile, eta)?,
                p_union: union_bound(profile, eta)?,
                p_asymptotic: asymptotic_wer(profile, eta)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ErrorCurve { points })
}

/// `N0 = ||W||^2 / (2^b b eta)`.
pub fn snr_noise_map(code: &LineCode, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let b = code.bits() as f64;
    let energy = to_f64(&code.codebook.w.frobenius_sq()) / (1u64 << code.bits()) as f64;
    Ok(energy / (b * eta))
}

/// Inverse of [`snr_noise_map`].
pub fn eta_from_noise(code: &LineCode, n0: f64) -> Result<f64> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::InvalidInput(format!("N0 must be positive, got {n0}")));
    }
    let b = code.bits() as f64;
    let energy = to_f64(&code.codebook.w.frobenius_sq()) / (1u64 << code.bits()) as f64;
    Ok(energy / (b * n0))
}

/// Minimum over nontrivial group elements of `||w1 - w1 O||^2`.
pub fn codebook_min_distance(code: &LineCode) -> Result<Rational> {
    let w = &code.codebook.w;
    if w.rows() < 2 {
        return Err(Error::InvalidInput("codebook has fewer than two words".into()));
    }
    let first = w.row(0);
    Ok((1..w.rows())
        .map(|i| {
            w.row(i)
                .iter()
                .zip(first)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<Rational>()
        })
        .min()
        .expect("at least one other word"))
}
