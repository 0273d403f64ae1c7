//! The numerical study: sweep chain sizes, sample interconnections, collect
//! spectral gaps, aggregate quartile stripes and fit slopes.
//!
//! Every trial is reproducible from `(config, seed)`: the per-trial seed is
//! derived deterministically from `(base_seed, n, kind, trial)`, the trial
//! samples its own interconnection matrix and chain from a ChaCha stream, and
//! aggregation is a deterministic fold over the seed-sorted record list, so
//! worker count and scheduling cannot change any output number.

use std::collections::HashSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use cyclegap_core::chain::{expand, sample_cyclemod, symmetrize};
use cyclegap_core::interconnect::InterconnectMatrix;
use cyclegap_core::spectral::{
    absolute_spectral_gap, eigenvalues_dense_with_limit, eigenvalues_symmetric,
};

use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("group (n={n}, kind={kind}) has only {got} records, need at least 3")]
    TooFewRecords { n: usize, kind: &'static str, got: usize },
    #[error("slope fit needs at least 4 grid points, got {got}")]
    TooFewPoints { got: usize },
    #[error("median gap {median} at n = {n} is not positive; cannot fit in log space")]
    NonPositiveMedian { n: usize, median: f64 },
    #[error("worker pool: {0}")]
    Pool(String),
}

/// The four interconnection structures of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Complete,
    RegularHalf,
    Regular4,
    BollobasChung,
}

pub const ALL_KINDS: [SweepKind; 4] = [
    SweepKind::Complete,
    SweepKind::RegularHalf,
    SweepKind::Regular4,
    SweepKind::BollobasChung,
];

impl SweepKind {
    pub fn ordinal(self) -> u64 {
        match self {
            SweepKind::Complete => 0,
            SweepKind::RegularHalf => 1,
            SweepKind::Regular4 => 2,
            SweepKind::BollobasChung => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SweepKind::Complete => "complete",
            SweepKind::RegularHalf => "regular-half",
            SweepKind::Regular4 => "regular-4",
            SweepKind::BollobasChung => "bollobas-chung",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "complete" => Some(SweepKind::Complete),
            "regular-half" => Some(SweepKind::RegularHalf),
            "regular-4" => Some(SweepKind::Regular4),
            "bollobas-chung" => Some(SweepKind::BollobasChung),
            _ => None,
        }
    }

    /// Minimal even `k` this kind is defined for.
    fn min_k(self) -> usize {
        match self {
            SweepKind::Complete => 4,
            SweepKind::RegularHalf => 6,
            SweepKind::Regular4 => 6,
            SweepKind::BollobasChung => 4,
        }
    }

    fn degree(self, k: usize) -> Option<usize> {
        match self {
            SweepKind::RegularHalf => Some(k / 2),
            SweepKind::Regular4 => Some(4),
            _ => None,
        }
    }
}

/// How `k` is derived from `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KRule {
    /// `k = 2 round(sqrt(n) / 2)`, the even rounding of `sqrt(n)`.
    SqrtEven,
    Fixed { k: usize },
    /// `k = 2 round(n^(1/rho) / 2)`.
    PowerLaw { rho: f64 },
}

impl KRule {
    pub fn k_for(self, n: usize) -> usize {
        match self {
            KRule::SqrtEven => even_round((n as f64).sqrt()),
            KRule::Fixed { k } => k,
            KRule::PowerLaw { rho } => even_round((n as f64).powf(1.0 / rho)),
        }
    }
}

fn even_round(x: f64) -> usize {
    (2.0 * (x / 2.0).round()) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Natural-log n values of the grid.
    pub log_n_grid: Vec<f64>,
    pub k_rule: KRule,
    pub kinds: Vec<SweepKind>,
    pub trials_per_point: usize,
    pub base_seed: u64,
    pub dense_limit: usize,
    /// Also compute the gap of the symmetrized chain per trial.
    #[serde(default)]
    pub symmetrized: bool,
}

/// Desk-scale grid: `ln n` from 4.62 to 7.0 in steps of 0.17
/// (n roughly 101 to 1097).
pub fn desk_log_grid() -> Vec<f64> {
    (0..15).map(|i| 4.62 + 0.17 * i as f64).collect()
}

/// Paper-scale grid extends to `ln n = 8.0` (n to 2981); the 0.17 step
/// lands on 7.85, so the endpoint is appended.
pub fn full_log_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..20).map(|i| 4.62 + 0.17 * i as f64).collect();
    grid.push(8.0);
    grid
}

impl ExperimentConfig {
    pub fn desk_scale() -> Self {
        Self {
            log_n_grid: desk_log_grid(),
            k_rule: KRule::SqrtEven,
            kinds: ALL_KINDS.to_vec(),
            trials_per_point: 30,
            base_seed: 0x5eed_2024,
            dense_limit: 2048,
            symmetrized: false,
        }
    }

    pub fn full_scale() -> Self {
        Self {
            log_n_grid: full_log_grid(),
            trials_per_point: 500,
            dense_limit: 4096,
            ..Self::desk_scale()
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.log_n_grid.is_empty() {
            return Err(ExperimentError::Validation("empty grid".into()));
        }
        if self.kinds.is_empty() {
            return Err(ExperimentError::Validation("no interconnection kinds selected".into()));
        }
        if self.trials_per_point == 0 {
            return Err(ExperimentError::Validation("trials_per_point must be >= 1".into()));
        }
        for &log_n in &self.log_n_grid {
            let n = log_n.exp().round() as usize;
            if n > self.dense_limit {
                return Err(ExperimentError::Validation(format!(
                    "n = {n} exceeds dense_limit {}",
                    self.dense_limit
                )));
            }
            for &kind in &self.kinds {
                let (k, _) = resolve_k(kind, self.k_rule.k_for(n));
                if k < kind.min_k() {
                    return Err(ExperimentError::Validation(format!(
                        "kind {} undefined at n = {n} (k = {k})",
                        kind.label()
                    )));
                }
                if k > n {
                    return Err(ExperimentError::Validation(format!(
                        "k = {k} exceeds n = {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Adjusts `k` for a kind whose degree would make `d k` odd (never triggers
/// for even `k`; kept for fixed odd `k` rules).
fn resolve_k(kind: SweepKind, mut k: usize) -> (usize, Option<usize>) {
    if let Some(d) = kind.degree(k) {
        if (d * k) % 2 == 1 {
            k += 2;
        }
        let d = kind.degree(k);
        (k, d)
    } else {
        (k, None)
    }
}

/// One planned trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub n: usize,
    pub k: usize,
    pub kind: SweepKind,
    pub trial: usize,
    pub seed: u64,
}

/// One Monte-Carlo observation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub k: usize,
    pub kind: SweepKind,
    pub seed: u64,
    pub gap: f64,
    pub gap_symmetrized: Option<f64>,
    pub lambda_a: f64,
    pub wall_time: f64,
}

/// A trial whose eigensolve failed; excluded from quartiles, tallied.
#[derive(Debug, Clone)]
pub struct TrialFailure {
    pub plan: TrialPlan,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

/// Expands a config into the deterministic trial list, sorted by
/// `(n, kind, seed)`.
pub fn plan(config: &ExperimentConfig) -> Result<Vec<TrialPlan>, ExperimentError> {
    config.validate()?;
    let mut plans = Vec::new();
    for &log_n in &config.log_n_grid {
        let n = log_n.exp().round() as usize;
        for &kind in &config.kinds {
            let (k, _) = resolve_k(kind, config.k_rule.k_for(n));
            for trial in 0..config.trials_per_point {
                let seed = derive_seed(config.base_seed, n as u64, kind.ordinal(), trial as u64);
                plans.push(TrialPlan { n, k, kind, trial, seed });
            }
        }
    }
    plans.sort_by_key(|p| (p.n, p.kind, p.seed));
    Ok(plans)
}

fn run_one(plan: &TrialPlan, dense_limit: usize, symmetrized: bool) -> Result<TrialRecord, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let a = match plan.kind {
        SweepKind::Complete => InterconnectMatrix::complete(plan.k),
        SweepKind::RegularHalf => InterconnectMatrix::random_regular(plan.k, plan.k / 2, &mut rng),
        SweepKind::Regular4 => InterconnectMatrix::random_regular(plan.k, 4, &mut rng),
        SweepKind::BollobasChung => InterconnectMatrix::bollobas_chung(plan.k, &mut rng),
    }
    .map_err(|e| e.to_string())?;
    let lambda_a = a.spectral_gap().map_err(|e| e.to_string())?;
    let chain = sample_cyclemod(plan.n, plan.k, a, &mut rng).map_err(|e| e.to_string())?;
    let m = expand(&chain);
    let spec = eigenvalues_dense_with_limit(&m, dense_limit).map_err(|e| e.to_string())?;
    let gap = absolute_spectral_gap(&spec).map_err(|e| e.to_string())?;
    let gap_symmetrized = if symmetrized {
        let sym = symmetrize(&m);
        let spec = eigenvalues_symmetric(&sym, dense_limit).map_err(|e| e.to_string())?;
        Some(absolute_spectral_gap(&spec).map_err(|e| e.to_string())?)
    } else {
        None
    };
    Ok(TrialRecord {
        n: plan.n,
        k: plan.k,
        kind: plan.kind,
        seed: plan.seed,
        gap,
        gap_symmetrized,
        lambda_a,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Runs the given trials on a pool of `workers` threads. Results are sorted
/// by `(n, kind, seed)` regardless of scheduling.
pub fn run_trials(
    plans: &[TrialPlan],
    dense_limit: usize,
    symmetrized: bool,
    workers: usize,
) -> Result<SweepResult, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let outcomes: Vec<Result<TrialRecord, TrialFailure>> = pool.install(|| {
        plans
            .par_iter()
            .map(|p| run_one(p, dense_limit, symmetrized).map_err(|error| TrialFailure {
                plan: *p,
                error,
            }))
            .collect()
    });
    let mut result = SweepResult::default();
    for o in outcomes {
        match o {
            Ok(r) => result.records.push(r),
            Err(f) => result.failures.push(f),
        }
    }
    result.records.sort_by_key(|r| (r.n, r.kind, r.seed));
    Ok(result)
}

/// Plan + run in one call.
pub fn run_sweep(config: &ExperimentConfig, workers: usize) -> Result<SweepResult, ExperimentError> {
    let plans = plan(config)?;
    run_trials(&plans, config.dense_limit, config.symmetrized, workers)
}

/// Quartiles of the gap for one `(n, kind)` group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartilePoint {
    pub n: usize,
    pub k: usize,
    pub kind: SweepKind,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Groups records by `(n, kind)` and computes q1/median/q3 of the gap.
pub fn quartiles(records: &[TrialRecord]) -> Result<Vec<QuartilePoint>, ExperimentError> {
    let mut groups: Vec<(usize, usize, SweepKind, Vec<f64>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(n, _, kind, _)| *n == r.n && *kind == r.kind) {
            Some((_, _, _, gaps)) => gaps.push(r.gap),
            None => groups.push((r.n, r.k, r.kind, vec![r.gap])),
        }
    }
    groups.sort_by_key(|&(n, _, kind, _)| (n, kind));
    let mut out = Vec::with_capacity(groups.len());
    for (n, k, kind, mut gaps) in groups {
        if gaps.len() < 3 {
            return Err(ExperimentError::TooFewRecords { n, kind: kind.label(), got: gaps.len() });
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push(QuartilePoint {
            n,
            k,
            kind,
            q1: quantile_type7(&gaps, 0.25),
            median: quantile_type7(&gaps, 0.5),
            q3: quantile_type7(&gaps, 0.75),
        });
    }
    Ok(out)
}

/// Same quartiles on the symmetrized gaps (records lacking one are skipped).
pub fn quartiles_symmetrized(records: &[TrialRecord]) -> Result<Vec<QuartilePoint>, ExperimentError> {
    let sym: Vec<TrialRecord> = records
        .iter()
        .filter(|r| r.gap_symmetrized.is_some())
        .map(|r| TrialRecord { gap: r.gap_symmetrized.unwrap(), ..r.clone() })
        .collect();
    quartiles(&sym)
}

/// Multiplies each quartile by `L = n/k`, the compensated series.
pub fn compensated_series(series: &[QuartilePoint]) -> Vec<QuartilePoint> {
    series
        .iter()
        .map(|q| {
            let l = q.n as f64 / q.k as f64;
            QuartilePoint { q1: q.q1 * l, median: q.median * l, q3: q.q3 * l, ..*q }
        })
        .collect()
}

/// Least-squares slope and intercept of `ln(median gap)` against `ln n` for
/// one kind.
pub fn fit_slope(series: &[QuartilePoint], kind: SweepKind) -> Result<(f64, f64), ExperimentError> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|q| q.kind == kind)
        .map(|q| {
            if q.median <= 0.0 {
                Err(ExperimentError::NonPositiveMedian { n: q.n, median: q.median })
            } else {
                Ok(((q.n as f64).ln(), q.median.ln()))
            }
        })
        .collect::<Result<_, _>>()?;
    if pts.len() < 4 {
        return Err(ExperimentError::TooFewPoints { got: pts.len() });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok((slope, intercept))
}

/// Records whose gap violates the proven rate `k / (n ln^gamma k)`.
pub fn theorem_rate_violations(records: &[TrialRecord], gamma: f64) -> Vec<&TrialRecord> {
    records
        .iter()
        .filter(|r| {
            let lnk = cyclegap_core::ln_plus(r.k);
            r.gap < r.k as f64 / (r.n as f64 * lnk.powf(gamma))
        })
        .collect()
}

/// Keys already present in an output file, for `--resume`.
pub fn existing_keys(records: &[TrialRecord]) -> HashSet<(usize, u64, u64)> {
    records.iter().map(|r| (r.n, r.kind.ordinal(), r.seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, k: usize, kind: SweepKind, seed: u64, gap: f64) -> TrialRecord {
        TrialRecord {
            n,
            k,
            kind,
            seed,
            gap,
            gap_symmetrized: None,
            lambda_a: 1.0,
            wall_time: 0.0,
        }
    }

    #[test]
    fn quantile_type7_examples() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile_type7(&v, 0.25) - 1.75).abs() < 1e-15);
        assert!((quantile_type7(&v, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_type7(&v, 0.75) - 3.25).abs() < 1e-15);
    }

    #[test]
    fn quartiles_constant_and_permutation_invariant() {
        let mut records: Vec<TrialRecord> =
            (0..7).map(|i| rec(100, 10, SweepKind::Complete, i, 0.25)).collect();
        let q = quartiles(&records).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!((q[0].q1, q[0].median, q[0].q3), (0.25, 0.25, 0.25));

        let mut varied: Vec<TrialRecord> = (0..9)
            .map(|i| rec(100, 10, SweepKind::Complete, i, 0.1 + 0.01 * i as f64))
            .collect();
        let before = quartiles(&varied).unwrap();
        varied.reverse();
        records.reverse();
        let after = quartiles(&varied).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn quartiles_too_few() {
        let records = vec![rec(100, 10, SweepKind::Complete, 0, 0.5); 2];
        assert!(matches!(
            quartiles(&records),
            Err(ExperimentError::TooFewRecords { got: 2, .. })
        ));
    }

    #[test]
    fn fit_slope_exact_lines() {
        let mk = |expo: f64| -> Vec<QuartilePoint> {
            [101usize, 200, 400, 800, 1600]
                .iter()
                .map(|&n| {
                    let g = 3.0 * (n as f64).powf(expo);
                    QuartilePoint {
                        n,
                        k: 10,
                        kind: SweepKind::Complete,
                        q1: g,
                        median: g,
                        q3: g,
                    }
                })
                .collect()
        };
        let (s, _) = fit_slope(&mk(-0.5), SweepKind::Complete).unwrap();
        assert!((s + 0.5).abs() < 1e-12, "slope {s}");
        let (s, b) = fit_slope(&mk(-1.0), SweepKind::Complete).unwrap();
        assert!((s + 1.0).abs() < 1e-12);
        assert!((b - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn compensated_example() {
        let series = vec![QuartilePoint {
            n: 1000,
            k: 10,
            kind: SweepKind::Complete,
            q1: 0.005,
            median: 0.01,
            q3: 0.02,
        }];
        let comp = compensated_series(&series);
        assert!((comp[0].median - 1.0).abs() < 1e-15);
        assert!(comp[0].q1 <= comp[0].median && comp[0].median <= comp[0].q3);
    }

    #[test]
    fn plan_is_deterministic_and_sorted() {
        let config = ExperimentConfig {
            log_n_grid: vec![4.62, 5.0],
            k_rule: KRule::SqrtEven,
            kinds: vec![SweepKind::Complete, SweepKind::BollobasChung],
            trials_per_point: 3,
            base_seed: 7,
            dense_limit: 2048,
            symmetrized: false,
        };
        let p1 = plan(&config).unwrap();
        let p2 = plan(&config).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1.len(), 2 * 2 * 3);
        assert!(p1.windows(2).all(|w| (w[0].n, w[0].kind, w[0].seed)
            <= (w[1].n, w[1].kind, w[1].seed)));
        // n = round(e^4.62) = 101, k = even round of sqrt(101) = 10
        assert_eq!(p1[0].n, 101);
        assert_eq!(p1[0].k, 10);
    }

    #[test]
    fn sweep_smoke_and_reproducibility() {
        let config = ExperimentConfig {
            log_n_grid: vec![4.62],
            k_rule: KRule::SqrtEven,
            kinds: vec![SweepKind::Complete],
            trials_per_point: 3,
            base_seed: 11,
            dense_limit: 2048,
            symmetrized: true,
        };
        let r1 = run_sweep(&config, 1).unwrap();
        let r2 = run_sweep(&config, 4).unwrap();
        assert_eq!(r1.records.len(), 3);
        assert!(r1.failures.is_empty());
        assert_eq!(r1.records.len(), r2.records.len());
        for (a, b) in r1.records.iter().zip(r2.records.iter()) {
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.gap.to_bits(), b.gap.to_bits(), "gap not bit-identical");
            assert_eq!(
                a.gap_symmetrized.unwrap().to_bits(),
                b.gap_symmetrized.unwrap().to_bits()
            );
            assert_eq!(a.lambda_a.to_bits(), b.lambda_a.to_bits());
            assert!(a.gap >= 0.0 && a.gap < 1.0);
        }
        // distinct seeds, same (n, k, kind)
        assert_ne!(r1.records[0].seed, r1.records[1].seed);
        assert!(r1.records.iter().all(|r| r.n == 101 && r.k == 10));

        // desk-scale median sanity at one point: gap within a factor 4 of k/n
        let gaps: Vec<f64> = r1.records.iter().map(|r| r.gap).collect();
        for g in gaps {
            assert!(g > 0.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut config = ExperimentConfig::desk_scale();
        config.validate().unwrap();
        config.dense_limit = 500;
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::desk_scale();
        config.kinds.clear();
        assert!(config.validate().is_err());

        // regular-half needs k >= 6
        let config = ExperimentConfig {
            log_n_grid: vec![(20f64).ln()],
            k_rule: KRule::Fixed { k: 4 },
            kinds: vec![SweepKind::RegularHalf],
            trials_per_point: 1,
            base_seed: 0,
            dense_limit: 2048,
            symmetrized: false,
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn grids_cover_the_stated_ranges() {
        let desk = desk_log_grid();
        assert_eq!(desk.len(), 15);
        assert!((desk[0] - 4.62).abs() < 1e-12);
        assert!((desk[14] - 7.0).abs() < 1e-12);
        let full = full_log_grid();
        assert!((full[0] - 4.62).abs() < 1e-12);
        assert_eq!(*full.last().unwrap(), 8.0);
        assert_eq!(ExperimentConfig::full_scale().trials_per_point, 500);
    }

    #[test]
    fn config_json_round_trip() {
        let config = ExperimentConfig::desk_scale();
        let json = serde_json::to_string_pretty(&config).unwrap();
        assert!(json.contains("sqrt_even"));
        assert!(json.contains("bollobas-chung"));
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn theorem_rate_violation_detection() {
        let good = rec(1024, 32, SweepKind::Complete, 0, 0.02);
        let bad = rec(1024, 32, SweepKind::Complete, 1, 1e-9);
        let records = vec![good, bad];
        let v = theorem_rate_violations(&records, 8.0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].seed, 1);
    }
}
