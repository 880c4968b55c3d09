//! Monte Carlo campaigns over graph realizations and their summaries.
//!
//! Trial `t` of a campaign with master seed `s` samples its graph from the
//! stream keyed by `(s, Trial, t)`, so the record set does not depend on the
//! number of workers or on scheduling. Records are kept sorted by trial index.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::binomial_moments::{moment_set, MomentSet};
use crate::graphs::{check_probability, sample_connected_er, DEFAULT_MAX_ATTEMPTS};
use crate::output::{opt_real, real, Json};
use crate::rng::{derive_seed, Purpose};
use crate::sum::sum;
use crate::ustat::hitting_statistics;
use crate::walk_spectra::init_dense_backend;
use crate::{Error, Result};

/// Campaigns abort when more than this fraction of trials fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;
pub const DEFAULT_BINS: usize = 40;
pub const MIN_KS_SAMPLES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialMode {
    /// Spectral `H^i`; the truncated form comes along for free.
    Exact,
    /// `(n - 2) + tr(B^2)` only, no eigenvalues.
    Truncated,
    Both,
}

impl TrialMode {
    fn needs_spectrum(self) -> bool {
        self != TrialMode::Truncated
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialConfig {
    pub n: usize,
    pub p: f64,
    pub p_star: f64,
    pub m_trials: usize,
    pub master_seed: u64,
    pub mode: TrialMode,
    pub workers: usize,
    pub max_attempts: u32,
    /// Store measured wall times in records. Off by default so that reruns
    /// produce identical files.
    pub record_timing: bool,
}

impl TrialConfig {
    pub fn new(n: usize, p: f64, m_trials: usize, master_seed: u64) -> Self {
        Self {
            n,
            p,
            p_star: p,
            m_trials,
            master_seed,
            mode: TrialMode::Exact,
            workers: 1,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if !(0.0..=1.0).contains(&self.p_star) {
            return Err(Error::InvalidProbability(self.p_star));
        }
        if self.n < 2 {
            return Err(Error::TooFewVertices(self.n + 1));
        }
        if self.m_trials == 0 {
            return Err(Error::InvalidArgument("at least one trial is required".into()));
        }
        if self.workers == 0 || self.max_attempts == 0 {
            return Err(Error::InvalidArgument("workers and max_attempts must be positive".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        Json::obj()
            .field("n", self.n)
            .field("p", self.p)
            .field("p_star", self.p_star)
            .field("m_trials", self.m_trials)
            .field("master_seed", self.master_seed)
            .field("mode", format!("{:?}", self.mode).to_lowercase())
            .field("workers", self.workers)
            .field("max_attempts", self.max_attempts)
            .field("record_timing", self.record_timing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    pub attempts: u32,
    pub h_i_exact: Option<f64>,
    pub h_i_truncated: f64,
    pub stat_exact: Option<f64>,
    pub stat_truncated: f64,
    pub un: f64,
    pub remainder: Option<f64>,
    pub wall_ms: f64,
}

impl TrialRecord {
    /// The statistic a summary is built from: exact when available.
    pub fn statistic(&self) -> f64 {
        self.stat_exact.unwrap_or(self.stat_truncated)
    }

    pub fn h_i(&self) -> f64 {
        self.h_i_exact.unwrap_or(self.h_i_truncated)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialFailure {
    pub trial_index: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialBatch {
    pub config: TrialConfig,
    pub moments: MomentSet,
    pub records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

impl TrialBatch {
    pub fn acceptance_rate(&self) -> f64 {
        self.records.len() as f64 / (self.records.len() + self.failures.len()) as f64
    }
}

fn run_one(cfg: &TrialConfig, m: &MomentSet, t: usize) -> std::result::Result<TrialRecord, TrialFailure> {
    let start = Instant::now();
    let seed = derive_seed(cfg.master_seed, Purpose::Trial, &[t as u64]);
    let fail = |e: Error| TrialFailure { trial_index: t, seed, reason: e.to_string() };
    let g = sample_connected_er(cfg.n + 1, cfg.p, seed, cfg.max_attempts).map_err(fail)?;
    let hs = hitting_statistics(&g, m, cfg.mode.needs_spectrum()).map_err(fail)?;
    Ok(TrialRecord {
        trial_index: t,
        seed,
        n: cfg.n,
        p: cfg.p,
        attempts: g.attempts(),
        h_i_exact: hs.h_i_exact,
        h_i_truncated: hs.h_i_truncated,
        stat_exact: hs.stat_exact,
        stat_truncated: hs.stat_truncated,
        un: hs.un,
        remainder: hs.remainder(),
        wall_ms: if cfg.record_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
    })
}

/// Run `m_trials` independent trials on `workers` threads.
pub fn run_trials(cfg: &TrialConfig) -> Result<TrialBatch> {
    cfg.validate()?;
    init_dense_backend();
    let moments = moment_set(cfg.n, cfg.p)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let outcomes: Vec<_> =
        pool.install(|| (0..cfg.m_trials).into_par_iter().map(|t| run_one(cfg, &moments, t)).collect());
    let mut records = Vec::with_capacity(cfg.m_trials);
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * cfg.m_trials as f64 {
        return Err(Error::BatchAborted { failed: failures.len(), total: cfg.m_trials });
    }
    Ok(TrialBatch { config: cfg.clone(), moments, records, failures })
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// `N(0, target_variance)`.
pub fn ks_distance(samples: &[f64], target_variance: f64) -> Result<f64> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(Error::TooFewSamples { got: samples.len(), need: MIN_KS_SAMPLES });
    }
    if !(target_variance > 0.0) || samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("KS needs finite samples and a positive variance".into()));
    }
    let normal = Normal::new(0.0, target_variance.sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal.cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok(d)
}

/// Pass thresholds applied by [`empirical_summary`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub ks: f64,
    pub mean_abs: f64,
    /// Variance bracket as multiples of the target variance.
    pub variance_low: f64,
    pub variance_high: f64,
    pub skewness_abs: f64,
    pub kurtosis_abs: f64,
    pub lln_low: f64,
    pub lln_high: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ks: 0.10,
            mean_abs: 0.15,
            variance_low: 0.8,
            variance_high: 1.3,
            skewness_abs: 0.35,
            kurtosis_abs: 0.7,
            lln_low: 0.98,
            lln_high: 1.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PassFlags {
    pub ks: bool,
    pub mean: bool,
    pub variance: bool,
    pub skewness: bool,
    pub kurtosis: bool,
    pub lln: bool,
}

impl PassFlags {
    pub fn all(&self) -> bool {
        self.ks && self.mean && self.variance && self.skewness && self.kurtosis && self.lln
    }
}

/// Sample moments up to order four with their standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    pub skewness: f64,
    pub skewness_stderr: f64,
    pub excess_kurtosis: f64,
    pub kurtosis_stderr: f64,
}

pub fn sample_moments(xs: &[f64]) -> Result<Moments> {
    if xs.len() < 2 {
        return Err(Error::TooFewSamples { got: xs.len(), need: 2 });
    }
    let m = xs.len() as f64;
    let mean = sum(xs.iter().copied()) / m;
    let c = |k: i32| sum(xs.iter().map(|x| (x - mean).powi(k))) / m;
    let (m2, m3, m4) = (c(2), c(3), c(4));
    let variance = m2 * m / (m - 1.0);
    let (skewness, excess_kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) } else { (0.0, 0.0) };
    Ok(Moments {
        count: xs.len(),
        mean,
        mean_stderr: (variance / m).sqrt(),
        variance,
        variance_stderr: ((m4 - m2 * m2).max(0.0) / m).sqrt(),
        skewness,
        skewness_stderr: (6.0 / m).sqrt(),
        excess_kurtosis,
        kurtosis_stderr: (24.0 / m).sqrt(),
    })
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { 0.5 * (v[k - 1] + v[k]) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltSummary {
    pub m_trials: usize,
    pub failed_trials: usize,
    pub acceptance_rate: f64,
    /// `exact` when spectral values were computed, else `truncated`.
    pub statistic: &'static str,
    pub moments: Moments,
    pub ks_distance: f64,
    pub p_star: f64,
    pub target_variance: f64,
    /// `mean(H^i) / n`
    pub lln_ratio: f64,
    /// `median |stat_exact - stat_truncated|`
    pub remainder_median: Option<f64>,
    pub tolerances: Tolerances,
    pub pass_flags: PassFlags,
}

impl CltSummary {
    pub fn to_json(&self) -> Json {
        let mo = &self.moments;
        let f = &self.pass_flags;
        Json::obj()
            .field("m_trials", self.m_trials)
            .field("failed_trials", self.failed_trials)
            .field("acceptance_rate", self.acceptance_rate)
            .field("statistic", self.statistic)
            .field("mean", mo.mean)
            .field("mean_stderr", mo.mean_stderr)
            .field("variance", mo.variance)
            .field("variance_stderr", mo.variance_stderr)
            .field("skewness", mo.skewness)
            .field("skewness_stderr", mo.skewness_stderr)
            .field("excess_kurtosis", mo.excess_kurtosis)
            .field("kurtosis_stderr", mo.kurtosis_stderr)
            .field("ks_distance", self.ks_distance)
            .field("p_star", self.p_star)
            .field("target_variance", self.target_variance)
            .field("lln_ratio", self.lln_ratio)
            .field("remainder_median", self.remainder_median)
            .field(
                "pass_flags",
                Json::obj()
                    .field("ks", f.ks)
                    .field("mean", f.mean)
                    .field("variance", f.variance)
                    .field("skewness", f.skewness)
                    .field("kurtosis", f.kurtosis)
                    .field("lln", f.lln),
            )
    }
}

pub fn empirical_summary(batch: &TrialBatch, p_star: f64) -> Result<CltSummary> {
    empirical_summary_with(batch, p_star, &Tolerances::default())
}

pub fn empirical_summary_with(batch: &TrialBatch, p_star: f64, tol: &Tolerances) -> Result<CltSummary> {
    if batch.records.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    if !(0.0..=1.0).contains(&p_star) {
        return Err(Error::InvalidProbability(p_star));
    }
    let exact = batch.records.iter().all(|r| r.stat_exact.is_some());
    let stats: Vec<f64> = batch.records.iter().map(|r| if exact { r.statistic() } else { r.stat_truncated }).collect();
    let moments = sample_moments(&stats).or_else(|_| sample_moments(&[stats[0], stats[0]]))?;
    let target_variance = 1.0 + p_star * (1.0 - p_star) / 2.0;
    let ks = if stats.len() >= MIN_KS_SAMPLES { ks_distance(&stats, target_variance)? } else { f64::NAN };
    let n = batch.config.n as f64;
    let lln_ratio = sum(batch.records.iter().map(|r| r.h_i() / n)) / stats.len() as f64;
    let remainders: Vec<f64> = batch.records.iter().filter_map(|r| r.remainder.map(f64::abs)).collect();
    let pass_flags = PassFlags {
        ks: ks <= tol.ks,
        mean: moments.mean.abs() <= tol.mean_abs,
        variance: (tol.variance_low * target_variance..=tol.variance_high * target_variance).contains(&moments.variance),
        skewness: moments.skewness.abs() <= tol.skewness_abs,
        kurtosis: moments.excess_kurtosis.abs() <= tol.kurtosis_abs,
        lln: (tol.lln_low..=tol.lln_high).contains(&lln_ratio),
    };
    Ok(CltSummary {
        m_trials: batch.records.len(),
        failed_trials: batch.failures.len(),
        acceptance_rate: batch.acceptance_rate(),
        statistic: if exact { "exact" } else { "truncated" },
        moments,
        ks_distance: ks,
        p_star,
        target_variance,
        lln_ratio,
        remainder_median: median(&remainders),
        tolerances: *tol,
        pass_flags,
    })
}

pub const CSV_HEADER: &str = "trial,seed,n,p,attempts,h_i_exact,h_i_truncated,stat_exact,stat_truncated,un,remainder,wall_ms";

/// One row per trial, reals with 17 significant digits; values not computed
/// in the chosen mode are left empty.
pub fn records_csv(batch: &TrialBatch) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &batch.records {
        let row = [
            r.trial_index.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            real(r.p),
            r.attempts.to_string(),
            opt_real(r.h_i_exact),
            real(r.h_i_truncated),
            opt_real(r.stat_exact),
            real(r.stat_truncated),
            real(r.un),
            opt_real(r.remainder),
            real(r.wall_ms),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn failures_csv(batch: &TrialBatch) -> String {
    let mut out = String::from("trial,seed,reason\n");
    for f in &batch.failures {
        out.push_str(&format!("{},{},\"{}\"\n", f.trial_index, f.seed, f.reason.replace('"', "'")));
    }
    out
}

/// Equal-width bins over `[min, max]`; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<(f64, f64, usize)>> {
    if bins == 0 || values.is_empty() {
        return Err(Error::InvalidArgument("histogram needs values and at least one bin".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width }, c))
        .collect())
}

pub fn histogram_csv(hist: &[(f64, f64, usize)]) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for (l, r, c) in hist {
        out.push_str(&format!("{},{},{}\n", real(*l), real(*r), c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_draws(m: usize, var: f64, seed: u64) -> Vec<f64> {
        let mut rng = substream(seed, Purpose::SelfTest, &[]);
        (0..m).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); var.sqrt() * z }).collect()
    }

    fn synthetic_batch(stats: &[f64], n: usize) -> TrialBatch {
        let records = stats
            .iter()
            .enumerate()
            .map(|(t, &s)| TrialRecord {
                trial_index: t,
                seed: t as u64,
                n,
                p: 0.1,
                attempts: 1,
                h_i_exact: Some(n as f64),
                h_i_truncated: n as f64,
                stat_exact: Some(s),
                stat_truncated: s,
                un: s,
                remainder: Some(0.0),
                wall_ms: 0.0,
            })
            .collect();
        TrialBatch {
            config: TrialConfig::new(n, 0.1, stats.len(), 0),
            moments: moment_set(n, 0.1).unwrap(),
            records,
            failures: vec![],
        }
    }

    #[test]
    fn ks_examples() {
        let target = 1.045;
        let xs = normal_draws(10_000, target, 1);
        assert!(ks_distance(&xs, target).unwrap() < 0.02);
        assert_eq!(ks_distance(&[0.0; 50], 1.0).unwrap(), 0.5);
        let a = ks_distance(&xs, target).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| 3.0 * x).collect();
        let b = ks_distance(&scaled, 9.0 * target).unwrap();
        assert!((a - b).abs() <= 1e-12);
        assert!(matches!(ks_distance(&xs[..29], 1.0), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn calibration_and_negative_control() {
        let target = 1.045;
        let good = empirical_summary(&synthetic_batch(&normal_draws(2000, target, 2), 1000), 0.1).unwrap();
        assert!(good.pass_flags.all(), "{good:?}");
        let bad = empirical_summary(&synthetic_batch(&normal_draws(2000, 2.0 * target, 3), 1000), 0.1).unwrap();
        assert!(!bad.pass_flags.variance);
        assert!((good.target_variance - 1.045).abs() < 1e-15);
    }

    #[test]
    fn small_path_graph_batches_are_deterministic() {
        let mut cfg = TrialConfig::new(2, 0.5, 10, 99);
        cfg.max_attempts = 1000;
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&cfg).unwrap();
        assert_eq!(records_csv(&a), records_csv(&b));
        assert!(a.records.iter().all(|r| r.h_i_exact.unwrap().is_finite() && r.attempts >= 1));
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let mut cfg = TrialConfig::new(120, 0.15, 12, 5);
        let one = run_trials(&cfg).unwrap();
        cfg.workers = 4;
        let four = run_trials(&cfg).unwrap();
        assert_eq!(one.records, four.records);
    }

    #[test]
    fn failing_batches_abort() {
        let mut cfg = TrialConfig::new(49, 0.01, 10, 1);
        cfg.max_attempts = 5;
        assert!(matches!(run_trials(&cfg), Err(Error::BatchAborted { .. })));
    }

    #[test]
    fn histogram_covers_all_values() {
        let xs = normal_draws(500, 1.0, 4);
        let h = histogram(&xs, DEFAULT_BINS).unwrap();
        assert_eq!(h.len(), 40);
        assert_eq!(h.iter().map(|b| b.2).sum::<usize>(), 500);
        assert_eq!(histogram(&[1.0, 1.0], 4).unwrap().iter().map(|b| b.2).sum::<usize>(), 2);
    }

    #[test]
    fn csv_layout() {
        let b = synthetic_batch(&[0.25; 3], 10);
        let text = records_csv(&b);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.split(',').count() == 12));
    }
}
