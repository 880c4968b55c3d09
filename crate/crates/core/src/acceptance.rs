//! The eleven acceptance criteria, shared by the `acceptance` test target and
//! the `selftest` subcommand. Each criterion runs at its stated tolerance and
//! reports a one-line outcome.

use std::fmt;
use std::time::Instant;

use rand::Rng;

use crate::appendix::{bound_ratio_scan, frozen_max_ratio, weighted_config_sum, MAX_VERTICES};
use crate::binomial_moments::{inverse_moment, inverse_moment_asymptotic, moment_set, mu_closed_form};
use crate::graphs::{sample_connected_er, sample_coupled_sequence, stationary_distribution};
use crate::harness::{ks_distance, median, run_trials, sample_moments, TrialConfig, TrialMode};
use crate::rng::{derive_seed, substream, Purpose};
use crate::ustat::{
    condition_diagnostics, hoeffding_split, kernel_h, limit_variance, synthetic_statistics, synthetic_variance,
    tilde_phi_second_exact, tn_second_moment,
};
use crate::walk_spectra::{
    avg_starting_from_matrix, avg_starting_spectral_scalar, graph_spectrum, hitting_matrix_exact,
    hitting_matrix_spectral, init_dense_backend, trace_b2_direct,
};
use crate::Result;

pub const DEFAULT_SEED: u64 = 0x5eed_2026;
pub const CRITERIA: usize = 11;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {:<22} {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub fn name(id: usize) -> &'static str {
    match id {
        1 => "hitting-oracle",
        2 => "closed-form-identities",
        3 => "lln",
        4 => "clt-synthetic",
        5 => "clt-hitting",
        6 => "remainder-decay",
        7 => "condition-decay",
        8 => "inverse-expansion",
        9 => "appendix-enumeration",
        10 => "limit-prefactor",
        11 => "coupling-marginals",
        _ => "unknown",
    }
}

/// Run criterion `id` with master seed `seed` on `workers` threads.
pub fn run(id: usize, seed: u64, workers: usize) -> Outcome {
    init_dense_backend();
    let start = Instant::now();
    let seed = derive_seed(seed, Purpose::SelfTest, &[id as u64]);
    let result = match id {
        1 => hitting_oracle(seed),
        2 => closed_forms(seed),
        3 => lln(seed, workers),
        4 => clt_synthetic(seed),
        5 => clt_hitting(seed, workers),
        6 => remainder_decay(seed, workers),
        7 => condition_decay(seed),
        8 => inverse_expansion(),
        9 => appendix_enumeration(),
        10 => limit_prefactor(),
        11 => coupling_marginals(seed),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome { id, name: name(id), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all(seed: u64, workers: usize, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    (1..=CRITERIA)
        .map(|id| {
            let o = run(id, seed, workers);
            report(&o);
            o
        })
        .collect()
}

type Check = Result<(bool, String)>;

fn hitting_oracle(seed: u64) -> Check {
    let (mut rel, mut indep) = (0.0f64, 0.0f64);
    for (c, (m, p)) in [(30usize, 0.3), (100, 0.2), (200, 0.1)].into_iter().enumerate() {
        for t in 0..50u64 {
            let g = sample_connected_er(m, p, derive_seed(seed, Purpose::Graph, &[c as u64, t]), 1000)?;
            let s = graph_spectrum(&g, true)?;
            let exact = hitting_matrix_exact(&g)?;
            let spectral = hitting_matrix_spectral(&g, &s)?;
            rel = rel.max(exact.max_relative_difference(&spectral));
            let scalar = avg_starting_spectral_scalar(&s.eigenvalues);
            let per_vertex = avg_starting_from_matrix(&exact, &stationary_distribution(&g)?);
            indep = indep.max(per_vertex.iter().map(|h| (h - scalar).abs() / scalar).fold(0.0, f64::max));
        }
    }
    Ok((rel <= 1e-6 && indep <= 1e-7, format!("max rel diff {rel:.2e} (<= 1e-6), H^i spread {indep:.2e} (<= 1e-7)")))
}

fn closed_forms(seed: u64) -> Check {
    let mut mu_err = 0.0f64;
    for n in [10, 100, 1000, 5000] {
        for p in [0.01, 0.1, 0.5, 0.9] {
            let (c, d) = (mu_closed_form(n, p)?, inverse_moment(n, p, 1)?);
            mu_err = mu_err.max((c - d).abs() / d);
        }
    }
    let mut rng = substream(seed, Purpose::SelfTest, &[0]);
    let mut hoeff = 0.0f64;
    for _ in 0..100_000 {
        let (x, y) = (rng.gen_range(0..2000usize), rng.gen_range(0..2000usize));
        let mu: f64 = rng.gen_range(1e-4..0.5);
        let (phi, a, b, t) = hoeffding_split(x, y, true, mu);
        hoeff = hoeff.max((phi - a - b - t).abs()).max((phi - kernel_h(x, y, mu)).abs());
    }
    let mut phi2 = 0.0f64;
    for (n, p) in [(50, 0.3), (200, 0.2), (1000, 0.1), (2000, 0.05)] {
        let m = moment_set(n, p)?;
        phi2 = phi2.max((tilde_phi_second_exact(&m)? / m.tilde_phi_second - 1.0).abs());
    }
    let mut trace = 0.0f64;
    for (t, (m, p)) in [(30usize, 0.3), (100, 0.2), (300, 0.1), (300, 0.5)].into_iter().enumerate() {
        for k in 0..5u64 {
            let g = sample_connected_er(m, p, derive_seed(seed, Purpose::Graph, &[t as u64, k]), 1000)?;
            let s = graph_spectrum(&g, false)?;
            let t2: f64 = crate::sum::sum(s.eigenvalues.iter().map(|l| l * l));
            trace = trace.max((t2 - trace_b2_direct(&g)).abs());
        }
    }
    Ok((
        mu_err <= 1e-13 && hoeff <= 1e-15 && phi2 <= 1e-10 && trace <= 1e-9,
        format!("mu {mu_err:.1e} (<= 1e-13), split {hoeff:.1e} (<= 1e-15), E[phi~^2] {phi2:.1e} (<= 1e-10), tr B^2 {trace:.1e} (<= 1e-9)"),
    ))
}

fn lln(seed: u64, workers: usize) -> Check {
    let mut cfg = TrialConfig::new(2000, 0.05, 50, seed);
    cfg.workers = workers;
    let batch = run_trials(&cfg)?;
    let ratio = crate::sum::sum(batch.records.iter().map(|r| r.h_i() / 2000.0)) / batch.records.len() as f64;
    Ok(((0.97..=1.06).contains(&ratio), format!("mean(H^i)/n = {ratio:.5} in [0.97, 1.06]")))
}

fn clt_synthetic(seed: u64) -> Check {
    let (n, p) = (400, 0.2);
    let m = moment_set(n, p)?;
    let values: Vec<f64> = (0..2000u64)
        .map(|s| synthetic_statistics(n, p, &m, derive_seed(seed, Purpose::Synthetic, &[s])).map(|v| v.vn_plus_zn))
        .collect::<Result<_>>()?;
    let target = 1.0 + p * (1.0 - p) / 2.0;
    let ks = ks_distance(&values, target)?;
    let var = sample_moments(&values)?.variance;
    let (lo, hi) = (0.85 * target, 1.25 * target);
    Ok((
        ks <= 0.05 && (lo..=hi).contains(&var),
        format!(
            "KS {ks:.4} (<= 0.05), variance {var:.4} in [{lo:.3}, {hi:.3}]; exact finite-n variance {:.4}",
            synthetic_variance(&m)
        ),
    ))
}

fn clt_hitting(seed: u64, workers: usize) -> Check {
    let target = 1.0 + 0.1 * 0.9 / 2.0;
    let batch_for = |n: usize, family: u64| {
        let mut cfg = TrialConfig::new(n, 0.1, 500, derive_seed(seed, Purpose::Trial, &[family]));
        cfg.workers = workers;
        cfg.mode = TrialMode::Exact;
        run_trials(&cfg)
    };
    let stats = |b: &crate::harness::TrialBatch| b.records.iter().map(|r| r.statistic()).collect::<Vec<f64>>();
    let main = batch_for(1000, 0)?;
    let main_stats = stats(&main);
    let mo = sample_moments(&main_stats)?;
    let ks_main = ks_distance(&main_stats, target)?;
    let un = sample_moments(&main.records.iter().map(|r| r.un).collect::<Vec<_>>())?;
    let mut wins = 0;
    let mut pairs = Vec::new();
    for family in 0..5u64 {
        let big = if family == 0 { ks_main } else { ks_distance(&stats(&batch_for(1000, family)?), target)? };
        let small = ks_distance(&stats(&batch_for(250, family)?), target)?;
        if big <= small {
            wins += 1;
        }
        pairs.push(format!("{big:.3}/{small:.3}"));
    }
    let (lo, hi) = (0.8 * target, 1.3 * target);
    let passed = ks_main <= 0.10 && mo.mean.abs() <= 0.15 && (lo..=hi).contains(&mo.variance) && wins >= 4;
    Ok((
        passed,
        format!(
            "KS {ks_main:.4} (<= 0.10), mean {:.4} (|.| <= 0.15), variance {:.4} in [{lo:.3}, {hi:.3}], \
             KS n=1000/n=250 per family [{}] {wins}/5 (>= 4); truncated statistic mean {:.4} variance {:.4}",
            mo.mean,
            mo.variance,
            pairs.join(" "),
            un.mean,
            un.variance
        ),
    ))
}

fn remainder_decay(seed: u64, workers: usize) -> Check {
    let med = |n: usize| -> Result<f64> {
        let mut cfg = TrialConfig::new(n, 0.1, 100, seed);
        cfg.workers = workers;
        let b = run_trials(&cfg)?;
        let r: Vec<f64> = b.records.iter().filter_map(|r| r.remainder.map(f64::abs)).collect();
        Ok(median(&r).unwrap_or(f64::NAN))
    };
    let (small, big) = (med(250)?, med(1000)?);
    Ok((big < small, format!("median |remainder| n=1000 {big:.5} < n=250 {small:.5}")))
}

fn condition_decay(seed: u64) -> Check {
    let p = 0.2;
    let mut rows = Vec::new();
    for n in [200usize, 400, 800] {
        let d = condition_diagnostics(n, p, 0.5, 10_000, seed)?;
        rows.push((n, d.c1 * n as f64, d.c1_exact * n as f64, d.c4 * n as f64 * p));
    }
    let (_, c1_0, c1e_0, c4_0) = rows[0];
    let ok = rows.iter().all(|&(_, a, b, c)| a <= 2.0 * c1_0 && b <= 2.0 * c1e_0 && c <= 2.0 * c4_0);
    let text: Vec<String> =
        rows.iter().map(|(n, a, b, c)| format!("n={n}: c1*n {a:.2e} (exact {b:.2e}), c4*np {c:.3e}")).collect();
    Ok((ok, format!("{} (each <= 2x its n=200 value)", text.join("; "))))
}

fn inverse_expansion() -> Check {
    let p = 0.1;
    let mut ok = true;
    let mut text = Vec::new();
    for r in [2u32, 3] {
        let scaled: Vec<f64> = [50.0f64, 100.0, 200.0, 400.0]
            .iter()
            .map(|&np| {
                let n = (np / p).round() as usize;
                Ok((inverse_moment(n, p, r)? - inverse_moment_asymptotic(n, p, r)?).abs() * np.powi(r as i32 + 2))
            })
            .collect::<Result<_>>()?;
        let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        ok &= hi / lo < 2.0;
        text.push(format!("r={r}: max/min {:.3}", hi / lo));
    }
    Ok((ok, format!("{} (< 2)", text.join(", "))))
}

fn appendix_enumeration() -> Check {
    let mut exact = true;
    for m in 2..=MAX_VERTICES {
        for p in [0.5, 0.25, 0.3, 0.7] {
            exact &= weighted_config_sum(m, 1, p, false)?.value == (m * (m - 1) / 2) as f64 * p;
        }
    }
    let mut bounded = true;
    let mut text = Vec::new();
    for (k, ns) in [(1usize, vec![4usize, 5, 6, 7, 8, 9]), (2, vec![4, 5, 6])] {
        for ordered in [false, true] {
            let s = bound_ratio_scan(k, &ns, 0.5, ordered)?;
            let frozen = frozen_max_ratio(k, ordered).unwrap_or(f64::NAN);
            bounded &= s.max_ratio <= frozen;
            text.push(format!("k={k}{} {:.4}/{:.4}", if ordered { " ordered" } else { "" }, s.max_ratio, frozen));
        }
    }
    Ok((exact && bounded, format!("k=1 closed form exact: {exact}; max ratio/frozen: {}", text.join(", "))))
}

fn limit_prefactor() -> Check {
    let m = moment_set(2000, 0.1)?;
    let r = limit_variance(0.1, 2000, 0.1, &m)?.prelimit_ratio;
    let target = 0.045f64.sqrt();
    let t2 = tn_second_moment(&m);
    let rel = (r / target - 1.0).abs();
    Ok((
        rel <= 0.05 && (0.95..=1.05).contains(&t2),
        format!("prelimit ratio {r:.5} vs {target:.5} ({:.2}% <= 5%), E[T_n^2] {t2:.5} in [0.95, 1.05]", 100.0 * rel),
    ))
}

fn coupling_marginals(seed: u64) -> Check {
    let runs = 100_000u64;
    let (mut first, mut second) = (0u64, 0u64);
    let mut monotone = true;
    for r in 0..runs {
        let s = sample_coupled_sequence(&[0.5, 0.25], &[10, 11], derive_seed(seed, Purpose::Coupling, &[r]))?;
        let (a, b) = (&s.graphs[0], &s.graphs[1]);
        first += a.has_edge(0, 1) as u64;
        second += b.has_edge(0, 1) as u64;
        monotone &= (0..10).all(|i| (i + 1..10).all(|j| !b.has_edge(i, j) || a.has_edge(i, j)));
    }
    let z = |count: u64, p: f64| (count as f64 / runs as f64 - p) / (p * (1.0 - p) / runs as f64).sqrt();
    let (z1, z2) = (z(first, 0.5), z(second, 0.25));
    Ok((
        z1.abs() <= 4.0 && z2.abs() <= 4.0 && monotone,
        format!(
            "edge frequency step 1 {:.5} (z {z1:.2}), step 2 {:.5} (z {z2:.2}), |z| <= 4; monotone on all runs: {monotone}",
            first as f64 / runs as f64,
            second as f64 / runs as f64
        ),
    ))
}
