//! The kernel `h(x, y) = 1/((x+1)(y+1)) - mu^2`, its Hoeffding split, the
//! incomplete U-statistics built from it and the standardized hitting
//! statistic.
//!
//! Two data sources feed the statistics. A [`SyntheticSample`] has i.i.d.
//! `Bin(n-1, p)` labels `x` and an independent Bernoulli mask `z`; a [`Graph`]
//! supplies degrees and adjacency instead, where the two are dependent.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::binomial_moments::{BinomialPmf, MomentSet};
use crate::graphs::{check_probability, Graph};
use crate::rng::{substream, Purpose};
use crate::sum::CompensatedSum;
use crate::walk_spectra::{avg_starting_spectral_scalar, graph_spectrum, trace_b2_direct};
use crate::{Error, Result};

/// Mask samples below this count give a noisy `c1`; the diagnostic warns.
pub const MIN_MC_SAMPLES: usize = 1000;
pub const DEFAULT_EPS: f64 = 0.5;

#[inline]
fn inv(x: usize) -> f64 {
    1.0 / (x + 1) as f64
}

fn pairs(m: usize) -> f64 {
    (m * m.saturating_sub(1)) as f64 / 2.0
}

pub fn kernel_h(x: usize, y: usize, mu: f64) -> f64 {
    inv(x) * inv(y) - mu * mu
}

/// `(phi, psi_ji, psi_ij, phi_tilde)` for one pair.
///
/// `psi_ji` is the projection onto `x_i`, `psi_ij` onto `x_j`, and
/// `phi = psi_ji + psi_ij + phi_tilde`.
pub fn hoeffding_split(x_i: usize, x_j: usize, z: bool, mu: f64) -> (f64, f64, f64, f64) {
    if !z {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let (di, dj) = (inv(x_i) - mu, inv(x_j) - mu);
    let psi_ji = mu * di;
    let psi_ij = mu * dj;
    let phi_tilde = di * dj;
    // phi = (mu + di)(mu + dj) - mu^2, written in the same pieces so the
    // identity holds to rounding of a three-term sum.
    let phi = psi_ji + psi_ij + phi_tilde;
    (phi, psi_ji, psi_ij, phi_tilde)
}

/// `E[Phi_tilde^2] = p E[(u-mu)^2]^2` by exact double sum over the labels.
pub fn tilde_phi_second_exact(m: &MomentSet) -> Result<f64> {
    let pmf = BinomialPmf::new(m.n - 1, m.p)?;
    let mut acc = CompensatedSum::new();
    for (x, &wx) in pmf.probs().iter().enumerate() {
        for (y, &wy) in pmf.probs().iter().enumerate() {
            let (_, _, _, t) = hoeffding_split(x, y, true, m.mu);
            acc.add(wx * wy * t * t);
        }
    }
    Ok(m.p * acc.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum StatName {
    Un,
    Vn,
    Zn,
    Tn,
    VnPlusZn,
    StandardizedH,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatisticValue {
    pub name: StatName,
    pub value: f64,
    pub n: usize,
    pub p: f64,
    /// Intermediate sums, for audit output.
    pub components: BTreeMap<String, f64>,
}

impl StatisticValue {
    fn new(name: StatName, value: f64, n: usize, p: f64) -> Self {
        Self { name, value, n, p, components: BTreeMap::new() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.components.insert(key.to_string(), v);
        self
    }

    pub fn component(&self, key: &str) -> Option<f64> {
        self.components.get(key).copied()
    }
}

/// i.i.d. labels `x_1..x_{n+1} ~ Bin(n-1, p)` and an independent symmetric
/// `Bernoulli(p)` mask.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSample {
    n: usize,
    p: f64,
    x: Vec<usize>,
    /// Upper triangle, row-major.
    z: Vec<bool>,
    seed: u64,
}

impl SyntheticSample {
    pub fn draw(n: usize, p: f64, seed: u64) -> Result<Self> {
        check_probability(p)?;
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
        }
        let mut rng = substream(seed, Purpose::Synthetic, &[n as u64, p.to_bits()]);
        let bin = Binomial::new((n - 1) as u64, p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let x = (0..=n).map(|_| bin.sample(&mut rng) as usize).collect();
        let z = (0..pairs(n + 1) as usize).map(|_| rng.gen_bool(p)).collect();
        Ok(Self { n, p, x, z, seed })
    }

    /// Assemble a sample from given labels and mask (upper triangle,
    /// row-major).
    pub fn from_parts(n: usize, p: f64, x: Vec<usize>, z: Vec<bool>) -> Result<Self> {
        check_probability(p)?;
        if x.len() != n + 1 || z.len() != pairs(n + 1) as usize {
            return Err(Error::InvalidArgument("sample shape does not match n".into()));
        }
        if x.iter().any(|&v| v + 1 > n) {
            return Err(Error::InvalidArgument("labels must lie in 0..=n-1".into()));
        }
        Ok(Self { n, p, x, z, seed: 0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn z(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let m = self.n + 1;
        self.z[a * (2 * m - a - 1) / 2 + (b - a - 1)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SyntheticStatistics {
    pub vn: f64,
    pub zn: f64,
    pub vn_plus_zn: f64,
    pub tn: f64,
    /// `(1/(n theta)) sum_{i<j} (z_ij u_i u_j - mu^2 p)`, evaluated directly.
    pub direct: f64,
}

fn check_moments(m: &MomentSet, n: usize, p: f64) -> Result<()> {
    if m.n != n || m.p != p {
        return Err(Error::MomentMismatch { moments_n: m.n, moments_p: m.p, graph_n: n, graph_p: p });
    }
    Ok(())
}

pub fn evaluate_synthetic(s: &SyntheticSample, m: &MomentSet) -> Result<SyntheticStatistics> {
    check_moments(m, s.n, s.p)?;
    let u: Vec<f64> = s.x.iter().map(|&x| inv(x)).collect();
    let mu2 = m.mu * m.mu;
    let (mut zh, mut zp, mut h, mut direct) =
        (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    let mut k = 0;
    for i in 0..=s.n {
        for j in i + 1..=s.n {
            let uu = u[i] * u[j];
            let hij = uu - mu2;
            h.add(hij);
            if s.z[k] {
                zh.add(hij);
                zp.add(mu2 * (1.0 - s.p));
                direct.add(uu - mu2 * s.p);
            } else {
                zp.add(-mu2 * s.p);
                direct.add(-mu2 * s.p);
            }
            k += 1;
        }
    }
    let nf = s.n as f64;
    let nt = nf * m.theta();
    let vn = zh.value() / nt;
    let zn = zp.value() / nt;
    Ok(SyntheticStatistics {
        vn,
        zn,
        vn_plus_zn: vn + zn,
        tn: h.value() / (nf * m.alpha()),
        direct: direct.value() / nt,
    })
}

/// Draw one synthetic sample and evaluate `V_n`, `Z_n`, `V_n + Z_n`, `T_n`.
pub fn synthetic_statistics(n: usize, p: f64, m: &MomentSet, seed: u64) -> Result<SyntheticStatistics> {
    check_moments(m, n, p)?;
    evaluate_synthetic(&SyntheticSample::draw(n, p, seed)?, m)
}

/// Exact finite-`n` variance of `V_n + Z_n` over `n + 1` labels.
pub fn synthetic_variance(m: &MomentSet) -> f64 {
    let (n, p) = (m.n as f64, m.p);
    let mu2 = m.mu * m.mu;
    let single = pairs(m.n + 1) * (p * m.sigma2 * m.sigma2 - p * p * mu2 * mu2);
    let shared = (n + 1.0) * n * (n - 1.0) * p * p * mu2 * m.var_inv;
    (single + shared) / (n * n * m.theta2)
}

/// Exact finite-`n` variance of `Z_n` alone.
pub fn zn_variance(m: &MomentSet) -> f64 {
    let mu2 = m.mu * m.mu;
    pairs(m.n + 1) * mu2 * mu2 * m.p * (1.0 - m.p) / (m.n as f64 * m.n as f64 * m.theta2)
}

/// `U_n = (1/(n theta)) sum_{i<j} (a_ij/(d_i d_j) - mu^2 p)` from the degrees.
pub fn statistic_un(g: &Graph, m: &MomentSet) -> Result<StatisticValue> {
    g.require_connected()?;
    check_moments(m, g.n(), g.p())?;
    let t2 = trace_b2_direct(g);
    let centering = pairs(g.n_plus_1()) * m.mu * m.mu * m.p;
    let nt = g.n() as f64 * m.theta();
    Ok(StatisticValue::new(StatName::Un, (t2 / 2.0 - centering) / nt, g.n(), g.p())
        .with("pair_sum", t2 / 2.0)
        .with("centering", centering)
        .with("n_theta", nt))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HittingMode {
    /// `H^i` from the full spectrum.
    Exact,
    /// `H^i` replaced by `(n - 2) + tr(B^2)`.
    Truncated,
}

/// Both forms of the standardized hitting statistic for one graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HittingStatistics {
    pub h_i_exact: Option<f64>,
    pub h_i_truncated: f64,
    pub stat_exact: Option<f64>,
    /// Equal to `U_n` by construction.
    pub stat_truncated: f64,
    pub un: f64,
}

impl HittingStatistics {
    /// `stat_exact - stat_truncated`
    pub fn remainder(&self) -> Option<f64> {
        self.stat_exact.map(|s| s - self.stat_truncated)
    }
}

/// `(H - (n-2) - 2 mu^2 C(n+1, 2) p) / (2 n theta)`.
pub fn standardize(h: f64, m: &MomentSet) -> f64 {
    let n = m.n as f64;
    (h - (n - 2.0) - 2.0 * m.mu * m.mu * pairs(m.n + 1) * m.p) / (2.0 * n * m.theta())
}

pub fn hitting_statistics(g: &Graph, m: &MomentSet, exact: bool) -> Result<HittingStatistics> {
    g.require_connected()?;
    check_moments(m, g.n(), g.p())?;
    let t2 = trace_b2_direct(g);
    let h_i_truncated = (g.n() as f64 - 2.0) + t2;
    let h_i_exact = if exact {
        Some(avg_starting_spectral_scalar(&graph_spectrum(g, false)?.eigenvalues))
    } else {
        None
    };
    let nt = g.n() as f64 * m.theta();
    Ok(HittingStatistics {
        h_i_exact,
        h_i_truncated,
        stat_exact: h_i_exact.map(|h| standardize(h, m)),
        stat_truncated: standardize(h_i_truncated, m),
        un: (t2 / 2.0 - pairs(g.n_plus_1()) * m.mu * m.mu * m.p) / nt,
    })
}

/// The standardized average starting hitting time. In exact mode the
/// components also carry the truncated value and the remainder.
pub fn standardized_hitting(g: &Graph, m: &MomentSet, mode: HittingMode) -> Result<StatisticValue> {
    let hs = hitting_statistics(g, m, mode == HittingMode::Exact)?;
    let (n, p) = (g.n(), g.p());
    let base = |v: f64, h: f64| {
        StatisticValue::new(StatName::StandardizedH, v, n, p)
            .with("h_i", h)
            .with("normalizer", 2.0 * n as f64 * m.theta())
            .with("centering", (n as f64 - 2.0) + 2.0 * m.mu * m.mu * pairs(n + 1) * p)
    };
    Ok(match (hs.h_i_exact, hs.stat_exact) {
        (Some(h), Some(s)) => base(s, h)
            .with("h_i_truncated", hs.h_i_truncated)
            .with("stat_truncated", hs.stat_truncated)
            .with("remainder", s - hs.stat_truncated),
        _ => base(hs.stat_truncated, hs.h_i_truncated),
    })
}

/// Left-hand sides of the four conditions of the triangular-array CLT.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionDiagnostics {
    pub n: usize,
    pub p: f64,
    pub eps: f64,
    /// Monte Carlo estimate over `(X_1, Z-row)`.
    pub c1: f64,
    pub stderr_c1: f64,
    /// The same quantity by exact double sum over `(X_1, row sum)`.
    pub c1_exact: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub mc_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Numeric diagnostics for the conditions at `(n, p)` and threshold `eps`.
///
/// The row sum `sum_j Psi_j(1)` runs over `j = 2..=n+1`, i.e. all `n` other
/// labels of the `n + 1` in the array.
pub fn condition_diagnostics(n: usize, p: f64, eps: f64, mc_samples: usize, seed: u64) -> Result<ConditionDiagnostics> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if mc_samples == 0 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let m = crate::binomial_moments::moment_set(n, p)?;
    let (mu, theta2, nf) = (m.mu, m.theta2, n as f64);
    let theta = theta2.sqrt();
    let labels = BinomialPmf::new(n - 1, p)?;
    let row = BinomialPmf::new(n, p)?;

    let c1_cut = eps * theta * nf;
    let c1_term = |x: usize, b: usize| {
        let s = mu * (inv(x) - mu) * b as f64;
        if s.abs() >= c1_cut {
            s * s
        } else {
            0.0
        }
    };
    let mut exact = CompensatedSum::new();
    for (x, &wx) in labels.probs().iter().enumerate() {
        if wx == 0.0 {
            continue;
        }
        for (b, &wb) in row.probs().iter().enumerate() {
            if wb != 0.0 {
                exact.add(wx * wb * c1_term(x, b));
            }
        }
    }
    let c1_exact = exact.value() / (nf * theta2);

    let mut rng = substream(seed, Purpose::Diagnostics, &[n as u64, p.to_bits(), eps.to_bits()]);
    let bx = Binomial::new((n - 1) as u64, p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut s1 = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    for _ in 0..mc_samples {
        let x = bx.sample(&mut rng) as usize;
        let b = (0..n).filter(|_| rng.gen_bool(p)).count();
        let v = c1_term(x, b) / (nf * theta2);
        s1.add(v);
        s2.add(v * v);
    }
    let mf = mc_samples as f64;
    let c1 = s1.value() / mf;
    let var = if mc_samples > 1 { ((s2.value() - mf * c1 * c1) / (mf - 1.0)).max(0.0) } else { 0.0 };

    let c2_cut = eps * theta * nf;
    let c3_cut = eps * theta2 * nf / p;
    let mut c2 = CompensatedSum::new();
    let mut c3 = CompensatedSum::new();
    let mut c4 = CompensatedSum::new();
    for (x, &wx) in labels.probs().iter().enumerate() {
        let dx = inv(x) - mu;
        let h_tilde_11 = dx * dx * m.var_inv;
        if h_tilde_11.abs() >= c3_cut {
            c3.add(wx * h_tilde_11);
        }
        for (y, &wy) in labels.probs().iter().enumerate() {
            let w = wx * wy;
            if w == 0.0 {
                continue;
            }
            let t = dx * (inv(y) - mu);
            if t.abs() >= c2_cut {
                c2.add(w * t * t);
            }
            let h = inv(x) * inv(y) * m.sigma2 - mu * mu * mu * (inv(x) + inv(y)) + mu.powi(4);
            c4.add(w * h * h);
        }
    }
    Ok(ConditionDiagnostics {
        n,
        p,
        eps,
        c1,
        stderr_c1: (var / mf).sqrt(),
        c1_exact,
        c2: p * c2.value() / theta2,
        c3: p * c3.value() / theta2,
        c4: p * p * c4.value() / (theta2 * theta2),
        mc_samples,
        warning: (mc_samples < MIN_MC_SAMPLES)
            .then(|| format!("only {mc_samples} Monte Carlo samples for c1 (recommended >= {MIN_MC_SAMPLES})")),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitVariance {
    /// `1 + p*(1 - p*)/2`
    pub target_var: f64,
    /// `mu^2 sqrt(C(n+1, 2)) p (1-p) / (n theta)`
    pub prelimit_ratio: f64,
}

pub fn limit_variance(p_star: f64, n: usize, p: f64, m: &MomentSet) -> Result<LimitVariance> {
    if !(0.0..=1.0).contains(&p_star) {
        return Err(Error::InvalidProbability(p_star));
    }
    check_moments(m, n, p)?;
    Ok(LimitVariance {
        target_var: 1.0 + p_star * (1.0 - p_star) / 2.0,
        prelimit_ratio: m.mu * m.mu * pairs(n + 1).sqrt() * p * (1.0 - p) / (n as f64 * m.theta()),
    })
}

/// `(1/(n^2 alpha^2)) C(n, 2) (2 n gamma_tilde^2 + beta_tilde^2)`.
pub fn tn_second_moment(m: &MomentSet) -> f64 {
    let n = m.n as f64;
    pairs(m.n) * (2.0 * n * m.gamma2_tilde + m.beta2_tilde) / (n * n * m.alpha2)
}

/// Monte Carlo `E[(V_n + Z_n)^2]` and `E[(V_n + Z_n)^4]` with standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvenMoments {
    pub n: usize,
    pub second: f64,
    pub second_stderr: f64,
    pub fourth: f64,
    pub fourth_stderr: f64,
}

pub fn even_moments(n: usize, p: f64, samples: usize, seed: u64) -> Result<EvenMoments> {
    if samples < 2 {
        return Err(Error::TooFewSamples { got: samples, need: 2 });
    }
    let m = crate::binomial_moments::moment_set(n, p)?;
    let values: Vec<f64> = (0..samples as u64)
        .map(|s| {
            let key = crate::rng::derive_seed(seed, Purpose::Synthetic, &[s]);
            synthetic_statistics(n, p, &m, key).map(|v| v.vn_plus_zn)
        })
        .collect::<Result<_>>()?;
    let stats = |k: i32| {
        let xs: Vec<f64> = values.iter().map(|v| v.powi(k)).collect();
        let mean = crate::sum::sum(xs.iter().copied()) / samples as f64;
        let var = crate::sum::sum(xs.iter().map(|x| (x - mean).powi(2))) / (samples as f64 - 1.0);
        (mean, (var / samples as f64).sqrt())
    };
    let (second, second_stderr) = stats(2);
    let (fourth, fourth_stderr) = stats(4);
    Ok(EvenMoments { n, second, second_stderr, fourth, fourth_stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binomial_moments::moment_set;
    use crate::graphs::sample_connected_er;
    use proptest::prelude::*;

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_h(0, 0, 0.3), 1.0 - 0.09);
        let m = moment_set(50, 0.3).unwrap();
        let pmf = BinomialPmf::new(49, 0.3).unwrap();
        let mut acc = CompensatedSum::new();
        for (x, &wx) in pmf.probs().iter().enumerate() {
            for (y, &wy) in pmf.probs().iter().enumerate() {
                acc.add(wx * wy * kernel_h(x, y, m.mu));
            }
        }
        assert!(acc.value().abs() <= 1e-12);
    }

    #[test]
    fn masked_pair_vanishes() {
        assert_eq!(hoeffding_split(3, 7, false, 0.2), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn conditional_centering_of_tilde_phi() {
        let n = 40;
        let m = moment_set(n, 0.25).unwrap();
        let pmf = BinomialPmf::new(n - 1, 0.25).unwrap();
        for a in [0, 5, n - 1] {
            let mut acc = CompensatedSum::new();
            for (y, &w) in pmf.probs().iter().enumerate() {
                acc.add(w * hoeffding_split(a, y, true, m.mu).3);
            }
            assert!(acc.value().abs() <= 1e-12, "a={a}: {}", acc.value());
        }
    }

    #[test]
    fn tilde_phi_second_moment() {
        for (n, p) in [(50, 0.3), (400, 0.2), (1000, 0.1)] {
            let m = moment_set(n, p).unwrap();
            let exact = tilde_phi_second_exact(&m).unwrap();
            assert!((exact / m.tilde_phi_second - 1.0).abs() <= 1e-10, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn hoeffding_identity(x in 0usize..500, y in 0usize..500, mu in 1e-4f64..0.5) {
            let (phi, a, b, t) = hoeffding_split(x, y, true, mu);
            let direct = kernel_h(x, y, mu);
            prop_assert!((phi - a - b - t).abs() <= 1e-15);
            prop_assert!((phi - direct).abs() <= 1e-15);
        }

        #[test]
        fn kernel_symmetric(x in 0usize..10_000, y in 0usize..10_000, mu in 0.0f64..1.0) {
            prop_assert_eq!(kernel_h(x, y, mu), kernel_h(y, x, mu));
        }
    }

    #[test]
    fn synthetic_identity_and_shape() {
        let m = moment_set(100, 0.2).unwrap();
        let s = SyntheticSample::draw(100, 0.2, 11).unwrap();
        assert_eq!(s.x().len(), 101);
        assert!(s.x().iter().all(|&x| x <= 99));
        assert!(!s.z(4, 4));
        assert_eq!(s.z(3, 9), s.z(9, 3));
        let v = evaluate_synthetic(&s, &m).unwrap();
        assert!((v.vn_plus_zn - v.direct).abs() <= 1e-12);
        assert_eq!(SyntheticSample::draw(100, 0.2, 11).unwrap(), s);
    }

    #[test]
    fn full_mask_near_one_has_no_mask_noise() {
        let n = 30;
        let p = 1.0 - 1e-12;
        let x = vec![n - 1; n + 1];
        let z = vec![true; n * (n + 1) / 2];
        let s = SyntheticSample::from_parts(n, p, x, z).unwrap();
        let m = MomentSet { n, p, mu: 1.0 / n as f64, theta2: 1.0, alpha2: 1.0, ..moment_set(n, 0.5).unwrap() };
        let v = evaluate_synthetic(&s, &m).unwrap();
        assert!(v.zn.abs() <= 1e-12 * (n * n) as f64);
    }

    #[test]
    fn mismatched_moments_rejected() {
        let m = moment_set(100, 0.2).unwrap();
        assert!(matches!(synthetic_statistics(101, 0.2, &m, 1), Err(Error::MomentMismatch { .. })));
    }

    #[test]
    fn un_matches_rearranged_pair_sum() {
        for seed in 0..5 {
            let g = sample_connected_er(80, 0.3, seed, 100).unwrap();
            let m = moment_set(g.n(), g.p()).unwrap();
            let u = statistic_un(&g, &m).unwrap();
            let d = g.degrees();
            let direct: f64 = g.edges().map(|(i, j)| 1.0 / (d[i] * d[j]) as f64).sum();
            let lhs = u.value * g.n() as f64 * m.theta() + pairs(g.n_plus_1()) * m.mu * m.mu * m.p;
            assert!((lhs - direct).abs() <= 1e-10);
            let hs = hitting_statistics(&g, &m, true).unwrap();
            assert!((hs.stat_truncated - u.value).abs() <= 1e-12);
            assert!((hs.un - u.value).abs() <= 1e-12);
        }
    }

    #[test]
    fn complete_graph_degenerate_moments() {
        let g = Graph::complete(4).unwrap();
        assert!(matches!(moment_set(g.n(), g.p()), Err(Error::DegenerateNormalization { .. })));
    }

    #[test]
    fn path_statistic_pinned() {
        let g = Graph::path(3).unwrap().with_p(0.5);
        let m = moment_set(2, 0.5).unwrap();
        let s = standardized_hitting(&g, &m, HittingMode::Exact).unwrap();
        assert!((s.component("h_i").unwrap() - 1.5).abs() <= 1e-12);
        // mu = 3/4, sigma2 = 5/8; theta2 = 37/1024
        let theta = (37.0f64 / 1024.0).sqrt();
        let expected = (1.5 - 0.0 - 2.0 * 0.5625 * 3.0 * 0.5) / (4.0 * theta);
        assert!((s.value - expected).abs() <= 1e-12, "{} vs {expected}", s.value);
        assert!((m.theta2 - 37.0 / 1024.0).abs() <= 1e-15);
        // truncated: (n-2) + tr B^2 = 0 + 2
        let t = standardized_hitting(&g, &m, HittingMode::Truncated).unwrap();
        assert!((t.component("h_i").unwrap() - 2.0).abs() <= 1e-12);
        assert!((s.component("remainder").unwrap() - (s.value - t.value)).abs() <= 1e-15);
    }

    #[test]
    fn standardized_rejects_disconnected() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)], 0.5, 0).unwrap();
        let m = moment_set(3, 0.5).unwrap();
        assert!(matches!(standardized_hitting(&g, &m, HittingMode::Exact), Err(Error::Disconnected { .. })));
    }

    #[test]
    fn diagnostics_finite_nonnegative() {
        let d = condition_diagnostics(200, 0.2, 0.5, 2000, 3).unwrap();
        for v in [d.c1, d.c1_exact, d.c2, d.c3, d.c4, d.stderr_c1] {
            assert!(v.is_finite() && v >= 0.0, "{d:?}");
        }
        assert!(d.warning.is_none());
        assert!(condition_diagnostics(200, 0.2, 0.5, 10, 3).unwrap().warning.is_some());
        assert!(condition_diagnostics(200, 0.2, 0.0, 10, 3).is_err());
    }

    #[test]
    fn diagnostics_without_truncation_reduce_to_second_moments() {
        // With a vanishing threshold every indicator is one.
        let (n, p) = (120, 0.3);
        let m = moment_set(n, p).unwrap();
        let d = condition_diagnostics(n, p, 1e-300, 1000, 5).unwrap();
        // E[(mu (u-mu) B)^2] = mu^2 var_inv E[B^2]
        let eb2 = n as f64 * p * (1.0 - p) + (n as f64 * p).powi(2);
        let c1 = m.mu * m.mu * m.var_inv * eb2 / (n as f64 * m.theta2);
        assert!((d.c1_exact / c1 - 1.0).abs() <= 1e-9);
        assert!((d.c2 * m.theta2 / m.tilde_phi_second - 1.0).abs() <= 1e-9);
        assert!((d.c3 * m.theta2 / (p * m.var_inv * m.var_inv) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn limit_variance_examples() {
        let m = moment_set(2000, 0.1).unwrap();
        assert_eq!(limit_variance(0.0, 2000, 0.1, &m).unwrap().target_var, 1.0);
        assert_eq!(limit_variance(0.5, 2000, 0.1, &m).unwrap().target_var, 1.125);
        let r = limit_variance(0.1, 2000, 0.1, &m).unwrap().prelimit_ratio;
        assert!((r / 0.045f64.sqrt() - 1.0).abs() <= 0.05, "{r}");
        let t = tn_second_moment(&m);
        assert!((0.95..=1.05).contains(&t), "{t}");
    }

    #[test]
    fn exact_variance_formula_matches_simulation() {
        let (n, p) = (60, 0.3);
        let m = moment_set(n, p).unwrap();
        let vals: Vec<f64> =
            (0..4000u64).map(|s| synthetic_statistics(n, p, &m, s).unwrap().vn_plus_zn).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        let exact = synthetic_variance(&m);
        // stderr of a sample variance is about var * sqrt(2/M)
        assert!((var - exact).abs() <= 5.0 * exact * (2.0 / 4000.0f64).sqrt(), "{var} vs {exact}");
        assert!(mean.abs() <= 5.0 * (exact / 4000.0).sqrt());
    }

    #[test]
    fn vn_variance_matches_normalization() {
        let (n, p) = (400, 0.2);
        let m = moment_set(n, p).unwrap();
        let vals: Vec<f64> = (0..1000u64).map(|s| synthetic_statistics(n, p, &m, s).unwrap().vn).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        assert!((0.8..=1.2).contains(&var), "{var}");
    }

    #[test]
    fn even_moments_do_not_grow() {
        let ms: Vec<EvenMoments> = [200, 400, 800].iter().map(|&n| even_moments(n, 0.2, 600, 3).unwrap()).collect();
        let spread = |f: fn(&EvenMoments) -> f64| {
            let v: Vec<f64> = ms.iter().map(f).collect();
            v.iter().copied().fold(f64::MIN, f64::max) / v.iter().copied().fold(f64::MAX, f64::min)
        };
        assert!(spread(|e| e.second) < 1.25, "{ms:?}");
        assert!(spread(|e| e.fourth) < 1.6, "{ms:?}");
    }
}
