//! Self-contained JSON record of a design.
//!
//! Rationals are stored as `"p"` or `"p/q"` strings. Loading re-derives
//! every matrix from `w1` and the roots and demands exact equality.

use serde::{Deserialize, Serialize};

use crate::analysis::{alphas, PerformanceProfile};
use crate::codec::{encoding_matrix, factor_bd, DetectionMatrix};
use crate::coxeter::{Codebook, RootSet};
use crate::error::{Error, Result};
use crate::exactla::{format_rational, parse_rational, RatMatrix, Rational};
use crate::linecode::LineCode;
use crate::optimizer::CandidateSummary;
use crate::pmset::InitialVector;

pub const SCHEMA_VERSION: u32 = 1;

pub type StrMatrix = Vec<Vec<String>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub alphas: Vec<f64>,
    pub alpha_sq: Vec<String>,
    pub alpha_min: f64,
    pub nu: usize,
    pub d_min_sq: String,
    /// Mean codeword energy `||W||^2 / 2^b`.
    pub energy: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub negation_used: bool,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance {
            tool: "coxcode".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: None,
            negation_used: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignDocument {
    pub schema_version: u32,
    pub b: usize,
    pub w1: Vec<i64>,
    pub root_permutations: Vec<Vec<i64>>,
    pub generators: Vec<StrMatrix>,
    #[serde(rename = "W")]
    pub w: StrMatrix,
    #[serde(rename = "M")]
    pub m: StrMatrix,
    #[serde(rename = "B")]
    pub info: StrMatrix,
    #[serde(rename = "D")]
    pub diag: StrMatrix,
    #[serde(rename = "K")]
    pub k: StrMatrix,
    pub profile: ProfileRecord,
    pub provenance: Provenance,
    /// Ranked alternatives when the design came out of a search.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub search: Vec<CandidateSummary>,
}

fn encode_matrix(m: &RatMatrix) -> StrMatrix {
    m.row_iter().map(|r| r.iter().map(format_rational).collect()).collect()
}

fn decode_matrix(name: &str, rows: &StrMatrix) -> Result<RatMatrix> {
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::MalformedDocument(format!("{name}: {e}")))?;
    RatMatrix::from_rows(parsed).map_err(|e| Error::MalformedDocument(format!("{name}: {e}")))
}

fn profile_record(p: &PerformanceProfile) -> ProfileRecord {
    ProfileRecord {
        alphas: p.alphas.clone(),
        alpha_sq: p.alpha_sq.iter().map(format_rational).collect(),
        alpha_min: p.alpha_min,
        nu: p.nu,
        d_min_sq: format_rational(&p.d_min_sq),
        energy: format_rational(&p.energy_per_tuple),
    }
}

impl DesignDocument {
    pub fn from_code(code: &LineCode, provenance: Provenance) -> Result<Self> {
        let profile = alphas(code)?;
        Ok(DesignDocument {
            schema_version: SCHEMA_VERSION,
            b: code.bits(),
            w1: code.w1().components().to_vec(),
            root_permutations: code.root_set.roots.clone(),
            generators: code.group.generators.iter().map(encode_matrix).collect(),
            w: encode_matrix(&code.codebook.w),
            m: encode_matrix(&code.detection.m),
            info: encode_matrix(&code.codec.info),
            diag: encode_matrix(&code.codec.diag_matrix()),
            k: encode_matrix(&code.codec.k),
            profile: profile_record(&profile),
            provenance,
            search: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::MalformedDocument(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DesignDocument =
            serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::MalformedDocument(format!(
                "schema_version {} is not supported",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    /// Rebuilds the code from `w1` and the roots and checks every stored
    /// field against it, then re-derives `B`, `D`, `K` from the stored `W`
    /// and `M` alone.
    pub fn verify(&self) -> Result<LineCode> {
        let w1 = InitialVector::new(self.w1.clone())
            .map_err(|e| Error::MalformedDocument(format!("w1: {e}")))?;
        let rs = RootSet::new(w1, self.root_permutations.clone())
            .map_err(|e| Error::MalformedDocument(format!("root_permutations: {e}")))?;
        if rs.bits() != self.b {
            return Err(Error::DocumentMismatch(format!(
                "b is {} but {} roots are listed",
                self.b,
                rs.bits()
            )));
        }
        let code = LineCode::from_root_set(rs)?;
        code.verify()?;

        let stored_w = decode_matrix("W", &self.w)?;
        let stored_m = decode_matrix("M", &self.m)?;
        let stored_b = decode_matrix("B", &self.info)?;
        let stored_d = decode_matrix("D", &self.diag)?;
        let stored_k = decode_matrix("K", &self.k)?;
        if self.generators.len() != code.group.generators.len() {
            return Err(Error::DocumentMismatch("generator count".into()));
        }
        for (i, (g, want)) in self.generators.iter().zip(&code.group.generators).enumerate() {
            if decode_matrix("generator", g)? != *want {
                return Err(Error::DocumentMismatch(format!("generator {}", i + 1)));
            }
        }
        let same = [
            ("W", &stored_w, &code.codebook.w),
            ("M", &stored_m, &code.detection.m),
            ("B", &stored_b, &code.codec.info),
            ("D", &stored_d, &code.codec.diag_matrix()),
            ("K", &stored_k, &code.codec.k),
        ];
        for (name, stored, derived) in same {
            if stored != derived {
                return Err(Error::DocumentMismatch(format!("{name} differs from the rebuilt design")));
            }
        }

        // B, D, K from the stored W and M only
        let wm = Codebook {
            w: stored_w,
            b: self.b,
        };
        let dm = DetectionMatrix::from_matrix(stored_m).map_err(|e| Error::DocumentMismatch(e.to_string()))?;
        let f = factor_bd(&wm, &dm).map_err(|e| Error::DocumentMismatch(e.to_string()))?;
        if f.info != stored_b || f.diag_matrix() != stored_d {
            return Err(Error::DocumentMismatch("B or D do not factor W M^T".into()));
        }
        if encoding_matrix(&f, &dm)? != stored_k {
            return Err(Error::DocumentMismatch("K is not D M^-T".into()));
        }

        let profile = profile_record(&alphas(&code)?);
        let exact_fields = |p: &ProfileRecord| (p.alpha_sq.clone(), p.nu, p.d_min_sq.clone(), p.energy.clone());
        if exact_fields(&profile) != exact_fields(&self.profile) {
            return Err(Error::DocumentMismatch("profile".into()));
        }
        Ok(code)
    }

    pub fn alpha_sq(&self) -> Result<Vec<Rational>> {
        self.profile
            .alpha_sq
            .iter()
            .map(|s| parse_rational(s).map_err(|e| Error::MalformedDocument(e.to_string())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::Negation;

    fn doc(v: &[i64]) -> DesignDocument {
        let code = LineCode::design(&InitialVector::new(v.to_vec()).unwrap(), Negation::Auto).unwrap();
        DesignDocument::from_code(&code, Provenance::default()).unwrap()
    }

    #[test]
    fn round_trip_verifies() {
        for v in [&[1i64, -1][..], &[-1, 0, 1], &[-3, 1, 1, 1], &[-3, -1, 1, 3], &[1, -1, -3, -1, 1, 3]] {
            let d = doc(v);
            let back = DesignDocument::from_json(&d.to_json().unwrap()).unwrap();
            assert_eq!(back, d);
            back.verify().unwrap();
        }
    }

    #[test]
    fn rationals_are_strings() {
        let d = doc(&[-1, 0, 1]);
        let json = d.to_json().unwrap();
        assert!(json.contains("\"schema_version\": 1"));
        assert!(json.contains("\"1/2\""));
        assert_eq!(d.profile.alpha_sq, vec!["1/2", "3/2"]);
    }

    #[test]
    fn tampered_k_is_rejected() {
        let mut d = doc(&[-1, 0, 1]);
        d.k[1][0] = "7/3".into();
        assert!(matches!(d.verify(), Err(Error::DocumentMismatch(_))));
    }

    #[test]
    fn tampered_profile_is_rejected() {
        let mut d = doc(&[-3, -1, 1, 3]);
        d.profile.alpha_sq[0] = "1".into();
        assert!(matches!(d.verify(), Err(Error::DocumentMismatch(_))));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(DesignDocument::from_json("{"), Err(Error::MalformedDocument(_))));
        let mut d = doc(&[-1, 0, 1]);
        d.schema_version = 2;
        let json = serde_json::to_string(&d).unwrap();
        assert!(matches!(DesignDocument::from_json(&json), Err(Error::MalformedDocument(_))));
        let mut d = doc(&[-1, 0, 1]);
        d.w[0][0] = "x".into();
        assert!(matches!(d.verify(), Err(Error::MalformedDocument(_))));
        let mut d = doc(&[-1, 0, 1]);
        d.root_permutations[0] = vec![5, 0, -5];
        assert!(matches!(d.verify(), Err(Error::MalformedDocument(_))));
    }
}
