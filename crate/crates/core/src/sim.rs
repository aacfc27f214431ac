//! Monte Carlo estimate of error rates on the AWGN channel.
//!
//! Each eta point is split into fixed-size batches. Batch `k` of point `i`
//! draws from ChaCha8 keyed by `(seed, i)` on stream `k`, so tallies do not
//! depend on how batches are spread over worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{alphas, asymptotic_wer, exact_word_error, snr_noise_map, union_bound, PerformanceProfile};
use crate::error::{Error, Result};
use crate::linecode::LineCode;

pub const BATCH_TRIALS: u64 = 10_000;
pub const SAMPLER: &str = "ziggurat (rand_distr StandardNormal)";
pub const GENERATOR: &str = "ChaCha8, key = seed || eta index, stream = batch index";
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub eta_grid: Vec<f64>,
    pub trials_per_point: u64,
    pub seed: u64,
    pub shards: usize,
    /// Cross-check every decision against nearest-codeword search.
    pub oracle: bool,
}

impl SimConfig {
    pub fn new(eta_grid: Vec<f64>, trials_per_point: u64, seed: u64) -> Self {
        SimConfig {
            eta_grid,
            trials_per_point,
            seed,
            shards: 1,
            oracle: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials_per_point == 0 {
            return Err(Error::InvalidInput("need at least one trial per point".into()));
        }
        if self.shards == 0 {
            return Err(Error::InvalidInput("need at least one shard".into()));
        }
        if let Some(e) = self.eta_grid.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {e}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    pub word_errors: u64,
    pub bit_errors: u64,
    /// Some slicer input was exactly zero.
    pub ambiguous: u64,
    /// Two codewords were equally near, oracle comparison skipped.
    pub oracle_ties: u64,
    pub oracle_disagreements: u64,
}

impl std::ops::AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        self.trials += o.trials;
        self.word_errors += o.word_errors;
        self.bit_errors += o.bit_errors;
        self.ambiguous += o.ambiguous;
        self.oracle_ties += o.oracle_ties;
        self.oracle_disagreements += o.oracle_disagreements;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub eta: f64,
    pub n0: f64,
    pub tally: Tally,
    pub word_error_rate: f64,
    pub bit_error_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub theory_exact: f64,
    pub z_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub points: Vec<SimPoint>,
    pub seed: u64,
    pub batch_trials: u64,
    pub sampler: String,
    pub generator: String,
}

impl SimResult {
    pub fn oracle_disagreements(&self) -> u64 {
        self.points.iter().map(|p| p.tally.oracle_disagreements).sum()
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds touch 0 and 1 exactly at the extreme counts
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Standardised deviation of the measured rate from `p`, under `p`.
pub fn z_score(errors: u64, trials: u64, p: f64) -> f64 {
    let measured = errors as f64 / trials as f64;
    let var = p * (1.0 - p) / trials as f64;
    if var > 0.0 {
        (measured - p) / var.sqrt()
    } else if measured == p {
        0.0
    } else {
        f64::INFINITY
    }
}

struct Channel<'a> {
    code: &'a LineCode,
    codewords: Vec<Vec<f64>>,
    slicer: crate::codec::FloatSlicer,
    sigma: f64,
    oracle: bool,
}

impl Channel<'_> {
    fn run_batch(&self, key: [u8; 32], stream: u64, trials: u64) -> Tally {
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        let words = self.codewords.len();
        let mut y = vec![0.0; self.code.wires()];
        let mut t = Tally {
            trials,
            ..Tally::default()
        };
        for _ in 0..trials {
            let sent = rng.random_range(0..words);
            for (yi, &c) in y.iter_mut().zip(&self.codewords[sent]) {
                let n: f64 = rng.sample(StandardNormal);
                *yi = c + self.sigma * n;
            }
            let (got, ambiguous) = self.slicer.decide_mask(&y);
            t.ambiguous += ambiguous as u64;
            if got != sent {
                t.word_errors += 1;
                t.bit_errors += (got ^ sent).count_ones() as u64;
            }
            if self.oracle {
                match nearest_codeword(&self.codewords, &y) {
                    Some(ml) if ml != got => t.oracle_disagreements += 1,
                    Some(_) => {}
                    None => t.oracle_ties += 1,
                }
            }
        }
        t
    }
}

/// Index of the unique nearest codeword, `None` on a tie.
pub fn nearest_codeword(codewords: &[Vec<f64>], y: &[f64]) -> Option<usize> {
    let dist = |c: &[f64]| c.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut best = (f64::INFINITY, 0usize);
    let mut second = f64::INFINITY;
    for (i, c) in codewords.iter().enumerate() {
        let d = dist(c);
        if d < best.0 {
            second = best.0;
            best = (d, i);
        } else if d < second {
            second = d;
        }
    }
    let tol = 1e-12 * best.0.max(1.0);
    (second - best.0 > tol).then_some(best.1)
}

fn point_key(seed: u64, eta_index: usize) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(eta_index as u64).to_le_bytes());
    key
}

pub fn simulate(code: &LineCode, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let profile = alphas(code)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.shards)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let codewords = code.float_codewords()?;
    let slicer = code.detection.to_f64();
    let b = code.bits() as f64;

    let mut points = Vec::with_capacity(cfg.eta_grid.len());
    for (i, &eta) in cfg.eta_grid.iter().enumerate() {
        let n0 = snr_noise_map(code, eta)?;
        let channel = Channel {
            code,
            codewords: codewords.clone(),
            slicer: slicer.clone(),
            sigma: (n0 / 2.0).sqrt(),
            oracle: cfg.oracle,
        };
        let key = point_key(cfg.seed, i);
        let batches = cfg.trials_per_point.div_ceil(BATCH_TRIALS);
        let tallies: Vec<Tally> = pool.install(|| {
            (0..batches)
                .into_par_iter()
                .map(|k| {
                    let trials = BATCH_TRIALS.min(cfg.trials_per_point - k * BATCH_TRIALS);
                    channel.run_batch(key, k, trials)
                })
                .collect()
        });
        let mut tally = Tally::default();
        tallies.into_iter().for_each(|t| tally += t);

        let theory = exact_word_error(&profile, eta)?;
        let (lo, hi) = wilson_interval(tally.word_errors, tally.trials);
        points.push(SimPoint {
            eta,
            n0,
            tally,
            word_error_rate: tally.word_errors as f64 / tally.trials as f64,
            bit_error_rate: tally.bit_errors as f64 / (tally.trials as f64 * b),
            wilson_low: lo,
            wilson_high: hi,
            theory_exact: theory,
            z_score: z_score(tally.word_errors, tally.trials, theory),
        });
    }
    Ok(SimResult {
        points,
        seed: cfg.seed,
        batch_trials: BATCH_TRIALS,
        sampler: SAMPLER.into(),
        generator: GENERATOR.into(),
    })
}

pub const FLAG_Z: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub eta: f64,
    pub measured: f64,
    /// Binomial standard deviation under the exact prediction.
    pub sigma: f64,
    pub p_exact: f64,
    pub p_union: f64,
    pub p_asymptotic: f64,
    pub z_score: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub rows: Vec<TheoryRow>,
}

impl TheoryReport {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged).count()
    }

    /// Union bound never falls below the measurement by more than three sigma.
    pub fn union_bound_holds(&self) -> bool {
        self.rows.iter().all(|r| r.p_union >= r.measured - 3.0 * r.sigma)
    }
}

pub fn compare_theory(result: &SimResult, profile: &PerformanceProfile) -> Result<TheoryReport> {
    let rows = result
        .points
        .iter()
        .map(|p| {
            let p_exact = exact_word_error(profile, p.eta)?;
            let n = p.tally.trials as f64;
            let z = z_score(p.tally.word_errors, p.tally.trials, p_exact);
            Ok(TheoryRow {
                eta: p.eta,
                measured: p.word_error_rate,
                sigma: (p_exact * (1.0 - p_exact) / n).sqrt(),
                p_exact,
                p_union: union_bound(profile, p.eta)?,
                p_asymptotic: asymptotic_wer(profile, p.eta)?,
                z_score: z,
                flagged: z.abs() > FLAG_Z,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TheoryReport { rows })
}
