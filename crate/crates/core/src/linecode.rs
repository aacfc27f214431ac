//! A complete design: roots, group, codebook, detection and encoding.

use std::collections::HashSet;

use num_traits::Zero;

use crate::codec::{detection_matrix, encode, factor_bd, CodecBundle, DetectionMatrix};
use crate::coxeter::{
    build_codebook, candidate_differences, generate_group, orthogonal_cliques, select_clique,
    Codebook, CliqueReport, Negation, ReflectionGroup, RootSet,
};
use crate::error::{Error, Result};
use crate::exactla::{mat_mul, rat_vec, to_f64, RatMatrix, Rational};
use crate::pmset::{pm_cardinality, InitialVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineCode {
    pub root_set: RootSet,
    pub group: ReflectionGroup,
    pub codebook: Codebook,
    pub detection: DetectionMatrix,
    pub codec: CodecBundle,
}

impl LineCode {
    pub fn from_root_set(root_set: RootSet) -> Result<Self> {
        let group = generate_group(&root_set.generators()?)?;
        let codebook = build_codebook(&root_set.w1, &group)?;
        let detection = detection_matrix(&root_set)?;
        let codec = CodecBundle::new(&codebook, &detection)?;
        Ok(LineCode {
            root_set,
            group,
            codebook,
            detection,
            codec,
        })
    }

    /// Searches roots for `w1` and builds the best code.
    pub fn design(w1: &InitialVector, negation: Negation) -> Result<Self> {
        let (report, _) = search_roots(w1, negation)?;
        LineCode::from_root_set(select_clique(&report)?)
    }

    pub fn bits(&self) -> usize {
        self.root_set.bits()
    }

    pub fn w1(&self) -> &InitialVector {
        &self.root_set.w1
    }

    pub fn wires(&self) -> usize {
        self.root_set.w1.len()
    }

    pub fn encode(&self, bits: &[i8]) -> Result<Vec<Rational>> {
        encode(bits, &self.codec.k)
    }

    /// Codewords as floats, indexed by bit mask (see [`crate::codec::bits_from_mask`]).
    pub fn float_codewords(&self) -> Result<Vec<Vec<f64>>> {
        (0..1usize << self.bits())
            .map(|mask| {
                let bits = crate::codec::bits_from_mask(mask, self.bits());
                Ok(self.encode(&bits)?.iter().map(to_f64).collect())
            })
            .collect()
    }

    /// Re-checks every structural invariant of the design exactly.
    pub fn verify(&self) -> Result<()> {
        let b = self.bits();
        let n = self.wires();
        let id = RatMatrix::identity(n);
        let gens = &self.group.generators;
        for (i, g) in gens.iter().enumerate() {
            if mat_mul(g, g)? != id || !g.is_symmetric() || mat_mul(g, &g.transpose())? != id {
                return Err(Error::RelationViolation(format!(
                    "O{} is not a symmetric orthogonal involution",
                    i + 1
                )));
            }
            for (j, h) in gens.iter().enumerate().skip(i + 1) {
                let p = mat_mul(g, h)?;
                if mat_mul(&p, &p)? != id {
                    return Err(Error::RelationViolation(format!("(O{} O{})^2 != I", i + 1, j + 1)));
                }
            }
        }
        if self.group.order() != 1 << b {
            return Err(Error::DegenerateGroup {
                expected: 1 << b,
                found: self.group.order(),
            });
        }

        let w = &self.codebook.w;
        let energy = rat_vec(self.w1().components())
            .iter()
            .map(|x| x * x)
            .sum::<Rational>();
        let rows: HashSet<Vec<Rational>> = w.row_iter().map(<[Rational]>::to_vec).collect();
        if rows.len() != 1 << b {
            return Err(Error::DegenerateCodebook);
        }
        for r in w.row_iter() {
            if !r.iter().sum::<Rational>().is_zero() {
                return Err(Error::NotOrthotope("unbalanced codeword".into()));
            }
            if r.iter().map(|x| x * x).sum::<Rational>() != energy {
                return Err(Error::NotOrthotope("codeword energy differs from w1".into()));
            }
            let neg: Vec<Rational> = r.iter().map(|x| -x).collect();
            if !rows.contains(&neg) {
                return Err(Error::NotOrthotope("codebook not closed under negation".into()));
            }
        }

        let m = &self.detection.m;
        let mmt = mat_mul(m, &m.transpose())?;
        if !mmt.is_diagonal() || mmt.diag() != self.detection.row_norms_sq {
            return Err(Error::NotOrthotope("detection rows are not orthogonal".into()));
        }
        let f = factor_bd(&self.codebook, &self.detection)?;
        if f.info != self.codec.info || f.diag != self.codec.diag {
            return Err(Error::NotOrthotope("stored B or D differ from W M^T".into()));
        }
        if mat_mul(w, &m.transpose())? != mat_mul(&self.codec.info, &self.codec.diag_matrix())? {
            return Err(Error::NotOrthotope("W M^T != B D".into()));
        }
        let patterns: HashSet<Vec<Rational>> =
            self.codec.info.row_iter().map(<[Rational]>::to_vec).collect();
        if patterns.len() != 1 << b {
            return Err(Error::NotOrthotope("B repeats a sign pattern".into()));
        }
        if mat_mul(&self.codec.info, &self.codec.k)? != *w {
            return Err(Error::NotOrthotope("B K != W".into()));
        }
        Ok(())
    }
}

/// Resolves the negation policy and enumerates the orthogonal cliques.
///
/// Returns the report and whether negated roots were admitted.
pub fn search_roots(w1: &InitialVector, negation: Negation) -> Result<(CliqueReport, bool)> {
    let b = w1.bits();
    match negation {
        Negation::On => Ok((orthogonal_cliques(w1, candidate_differences(w1, true), b)?, true)),
        Negation::Off => Ok((orthogonal_cliques(w1, candidate_differences(w1, false), b)?, false)),
        Negation::Auto => {
            let orbit = pm_cardinality(&w1.multiplicities());
            let can_negate = !w1.is_sign_symmetric();
            if orbit >= 1u128 << b {
                match orthogonal_cliques(w1, candidate_differences(w1, false), b) {
                    Ok(r) => return Ok((r, false)),
                    Err(e) if !can_negate => return Err(e),
                    Err(_) => {}
                }
            }
            let report = orthogonal_cliques(w1, candidate_differences(w1, can_negate), b)?;
            Ok((report, can_negate))
        }
    }
}
