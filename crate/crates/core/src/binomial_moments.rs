//! Exact inverse and central moments of the binomial distribution.
//!
//! Throughout, `X ~ Bin(n - 1, p)` is the reduced degree of a vertex in
//! `G(n + 1, p)` with one neighbour removed, `mu = E[1/(X+1)]` and
//! `sigma2 = E[1/(X+1)^2]`. Probability masses are built by ratio recursion
//! outward from the mode and normalized by their compensated sum, which
//! avoids both `lgamma` round-off and underflow of `(1-p)^n`.

use serde::Serialize;

use crate::graphs::check_probability;
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Probability mass function of `Bin(trials, p)` on `0..=trials`.
#[derive(Clone, Debug)]
pub struct BinomialPmf {
    trials: usize,
    p: f64,
    probs: Vec<f64>,
}

impl BinomialPmf {
    pub fn new(trials: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        let odds = p / (1.0 - p);
        let mode = (((trials + 1) as f64 * p).floor() as usize).min(trials);
        let mut terms = vec![0.0f64; trials + 1];
        terms[mode] = 1.0;
        for k in mode..trials {
            terms[k + 1] = terms[k] * ((trials - k) as f64 / (k + 1) as f64) * odds;
        }
        for k in (1..=mode).rev() {
            terms[k - 1] = terms[k] * (k as f64 / (trials - k + 1) as f64) / odds;
        }
        let total: CompensatedSum = terms.iter().copied().collect();
        let total = total.value();
        for t in &mut terms {
            *t /= total;
        }
        Ok(Self { trials, p, probs: terms })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `E[f(X)]` with compensated accumulation.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (k, &w) in self.probs.iter().enumerate() {
            if w != 0.0 {
                acc.add(w * f(k));
            }
        }
        acc.value()
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")))
    } else {
        Ok(())
    }
}

/// `E[(1/(X+1))^r]` for `X ~ Bin(n-1, p)`, `1 <= r <= 8`.
pub fn inverse_moment(n: usize, p: f64, r: u32) -> Result<f64> {
    check_size(n)?;
    if !(1..=8).contains(&r) {
        return Err(Error::InvalidArgument(format!("inverse moment order {r} outside 1..=8")));
    }
    shifted_inverse_moment(n - 1, p, 0, r)
}

/// `E[(1/(X+shift+1))^r]` for `X ~ Bin(trials, p)`.
pub fn shifted_inverse_moment(trials: usize, p: f64, shift: usize, r: u32) -> Result<f64> {
    let pmf = BinomialPmf::new(trials, p)?;
    Ok(pmf.expect(|k| (1.0 / (k + shift + 1) as f64).powi(r as i32)))
}

/// `mu = (1 - (1-p)^n) / (n p)`, with `(1-p)^n` evaluated in the log domain.
pub fn mu_closed_form(n: usize, p: f64) -> Result<f64> {
    check_size(n)?;
    check_probability(p)?;
    let nf = n as f64;
    let one_minus = -(nf * (-p).ln_1p()).exp_m1();
    Ok(one_minus / (nf * p))
}

/// Two-term expansion `(np)^{-r} (1 + r(r-1)(1-p) / (2np))` of
/// `E[(1/(X+1))^r]`, valid for `np >= 10`.
pub fn inverse_moment_asymptotic(n: usize, p: f64, r: u32) -> Result<f64> {
    check_size(n)?;
    check_probability(p)?;
    if r < 2 {
        return Err(Error::InvalidArgument("expansion needs r >= 2".into()));
    }
    let np = n as f64 * p;
    if np < 10.0 {
        return Err(Error::InvalidArgument(format!("np = {np} below the expansion regime (np >= 10)")));
    }
    let rf = r as f64;
    Ok(np.powi(-(r as i32)) * (1.0 + rf * (rf - 1.0) * (1.0 - p) / (2.0 * np)))
}

/// The scalar family entering the normalization of the U-statistics.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct MomentSet {
    pub n: usize,
    pub p: f64,
    /// `E[1/(X+1)]`
    pub mu: f64,
    /// `E[1/(X+1)^2]`
    pub sigma2: f64,
    /// `Var[1/(X+1)] = sigma2 - mu^2`, summed in centred form.
    pub var_inv: f64,
    /// `p mu^2 (sigma2 - mu^2)`
    pub gamma2: f64,
    /// `p (sigma2^2 - mu^4)`
    pub beta2: f64,
    /// `n p gamma2 + beta2 / 2`
    pub theta2: f64,
    /// `gamma2 / p`
    pub gamma2_tilde: f64,
    /// `beta2 / p`
    pub beta2_tilde: f64,
    /// `n gamma2_tilde + beta2_tilde / 2`
    pub alpha2: f64,
    /// `E[Phi_tilde^2] = beta2 - 2 gamma2`
    pub tilde_phi_second: f64,
    /// `(n - 1) p`
    pub nu: f64,
    /// `gamma2 (np)^5 / p`; stays in a fixed bracket as `n` grows.
    pub gamma2_order: f64,
    /// `beta2 (np)^5 / p`
    pub beta2_order: f64,
}

impl MomentSet {
    pub fn theta(&self) -> f64 {
        self.theta2.sqrt()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha2.sqrt()
    }
}

/// All fields of [`MomentSet`] from exact sums over `Bin(n-1, p)`.
pub fn moment_set(n: usize, p: f64) -> Result<MomentSet> {
    check_size(n)?;
    let pmf = BinomialPmf::new(n - 1, p)?;
    let inv = |k: usize| 1.0 / (k + 1) as f64;
    let mu = pmf.expect(inv);
    let sigma2 = pmf.expect(|k| inv(k) * inv(k));
    let var_inv = pmf.expect(|k| (inv(k) - mu).powi(2));
    if !(var_inv > 1e-10 * sigma2) {
        return Err(Error::DegenerateNormalization { n, p });
    }
    let nf = n as f64;
    let gamma2 = p * mu * mu * var_inv;
    let beta2 = p * var_inv * (sigma2 + mu * mu);
    let theta2 = nf * p * gamma2 + beta2 / 2.0;
    let gamma2_tilde = gamma2 / p;
    let beta2_tilde = beta2 / p;
    let np5 = (nf * p).powi(5);
    Ok(MomentSet {
        n,
        p,
        mu,
        sigma2,
        var_inv,
        gamma2,
        beta2,
        theta2,
        gamma2_tilde,
        beta2_tilde,
        alpha2: nf * gamma2_tilde + beta2_tilde / 2.0,
        tilde_phi_second: beta2 - 2.0 * gamma2,
        nu: (nf - 1.0) * p,
        gamma2_order: gamma2 * np5 / p,
        beta2_order: beta2 * np5 / p,
    })
}

/// A moment together with its value normalized by the predicted order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedMoment {
    pub value: f64,
    pub ratio: f64,
}

/// `E[(Y - nu)^order]` for `Y ~ Bin(n-1, p)`, `nu = (n-1)p`, with the ratio to
/// `(np(1-p))^{order/2}`.
pub fn central_moment(n: usize, p: f64, order: u32) -> Result<NormalizedMoment> {
    check_size(n)?;
    if order == 0 || order % 2 == 1 || order > 8 {
        return Err(Error::InvalidArgument(format!("central moment order must be even and <= 8, got {order}")));
    }
    let pmf = BinomialPmf::new(n - 1, p)?;
    let nu = (n - 1) as f64 * p;
    let value = pmf.expect(|k| (k as f64 - nu).powi(order as i32));
    let scale = (n as f64 * p * (1.0 - p)).powi((order / 2) as i32);
    Ok(NormalizedMoment { value, ratio: value / scale })
}

/// `E[(1/(Y+1) - mu)^k]` for `Y ~ Bin(n-1, p)`, with the ratio
/// `value (np)^{1.5 k}`.
pub fn centered_inverse_moment(n: usize, p: f64, k: u32) -> Result<NormalizedMoment> {
    check_size(n)?;
    if !(1..=6).contains(&k) {
        return Err(Error::InvalidArgument(format!("centered inverse moment order {k} outside 1..=6")));
    }
    let pmf = BinomialPmf::new(n - 1, p)?;
    let mu = pmf.expect(|x| 1.0 / (x + 1) as f64);
    let value = pmf.expect(|x| (1.0 / (x + 1) as f64 - mu).powi(k as i32));
    Ok(NormalizedMoment { value, ratio: value * (n as f64 * p).powf(1.5 * k as f64) })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct evaluation with binomial coefficients, for small n only.
    fn brute_force(trials: usize, p: f64, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..=trials {
            let mut c = 1.0;
            for i in 0..k {
                c = c * (trials - i) as f64 / (i + 1) as f64;
            }
            acc += c * p.powi(k as i32) * (1.0 - p).powi((trials - k) as i32) * f(k);
        }
        acc
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn pmf_matches_direct_formula() {
        for (t, p) in [(0, 0.3), (1, 0.5), (7, 0.2), (20, 0.9), (40, 0.05)] {
            let pmf = BinomialPmf::new(t, p).unwrap();
            for (k, &w) in pmf.probs().iter().enumerate() {
                let direct = brute_force(t, p, |x| if x == k { 1.0 } else { 0.0 });
                assert!((w - direct).abs() <= 1e-14, "t={t} k={k}");
            }
        }
    }

    #[test]
    fn inverse_moment_examples() {
        // (1/8)(1 + 3/2 + 1 + 1/4)
        assert!((inverse_moment(4, 0.5, 1).unwrap() - 0.46875).abs() < 1e-15);
        // Bin(1, 1/2): (1/2)(1) + (1/2)(1/4)
        assert!((inverse_moment(2, 0.5, 2).unwrap() - 0.625).abs() < 1e-15);
        assert!((mu_closed_form(4, 0.5).unwrap() - 0.46875).abs() < 1e-15);
        for r in 1..=8 {
            let exact = inverse_moment(12, 0.37, r).unwrap();
            let direct = brute_force(11, 0.37, |k| (1.0 / (k + 1) as f64).powi(r as i32));
            assert!(rel(exact, direct) < 1e-13);
        }
        assert!(inverse_moment(10, 0.5, 0).is_err());
        assert!(inverse_moment(10, 0.5, 9).is_err());
        assert!(inverse_moment(1, 0.5, 1).is_err());
        assert!(inverse_moment(10, 1.0, 1).is_err());
    }

    #[test]
    fn closed_form_matches_direct_sum_on_grid() {
        for n in [10, 100, 1000, 5000] {
            for p in [0.01, 0.1, 0.5, 0.9] {
                let closed = mu_closed_form(n, p).unwrap();
                let direct = inverse_moment(n, p, 1).unwrap();
                assert!(rel(closed, direct) <= 1e-13, "n={n} p={p}: {closed} vs {direct}");
                assert!(closed <= 1.0 / (n as f64 * p));
            }
        }
    }

    #[test]
    fn mu_degenerate_limit() {
        let n = 50;
        let mu = mu_closed_form(n, 1.0 - 1e-12).unwrap();
        assert!((mu - 1.0 / n as f64).abs() < 1e-12);
        assert!(mu_closed_form(n, 0.0).is_err());
    }

    #[test]
    fn monotone_in_order_and_probability() {
        let mut prev = f64::INFINITY;
        for r in 1..=8 {
            let v = inverse_moment(200, 0.1, r).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for p in [0.01, 0.05, 0.1, 0.3, 0.6, 0.9] {
            let v = inverse_moment(200, p, 2).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn expansion_is_two_term_accurate() {
        // n - 1 = 1000 trials
        let exact = inverse_moment(1001, 0.1, 2).unwrap();
        let asym = inverse_moment_asymptotic(1001, 0.1, 2).unwrap();
        assert!((exact / asym - 1.0).abs() <= 5e-3);
        let near_one = inverse_moment_asymptotic(1000, 1.0 - 1e-12, 2).unwrap();
        assert!((near_one * 1e6 - 1.0).abs() < 1e-9);
        assert!(inverse_moment_asymptotic(50, 0.1, 2).is_err());
        assert!(inverse_moment_asymptotic(1000, 0.1, 1).is_err());
    }

    #[test]
    fn expansion_residual_scales_like_np_minus_two() {
        for r in [2u32, 3] {
            let scaled: Vec<f64> = [50.0, 100.0, 200.0, 400.0]
                .iter()
                .map(|&np| {
                    let n = (np / 0.1f64).round() as usize;
                    let e = inverse_moment(n, 0.1, r).unwrap();
                    let a = inverse_moment_asymptotic(n, 0.1, r).unwrap();
                    (e - a).abs() * np.powi(r as i32 + 2)
                })
                .collect();
            for w in scaled.windows(2) {
                let q = w[1] / w[0];
                assert!((0.5..=2.0).contains(&q), "r={r} {scaled:?}");
            }
        }
    }

    #[test]
    fn moment_set_identities_and_orders() {
        let m = moment_set(1000, 0.1).unwrap();
        assert!(rel(m.gamma2, m.p * m.mu * m.mu * (m.sigma2 - m.mu * m.mu)) < 1e-9);
        assert!(rel(m.beta2, m.p * (m.sigma2 - m.mu * m.mu) * (m.sigma2 + m.mu * m.mu)) < 1e-9);
        assert!(rel(m.theta2, 1000.0 * 0.1 * m.gamma2 + m.beta2 / 2.0) < 1e-15);
        assert!(m.sigma2 > m.mu * m.mu && m.gamma2 > 0.0 && m.beta2 > 0.0);
        assert!(m.tilde_phi_second >= 0.0);
        assert!((0.5..=3.0).contains(&m.gamma2_order), "{}", m.gamma2_order);
        assert!((0.5..=3.0).contains(&m.beta2_order), "{}", m.beta2_order);
        assert!(rel(m.mu, mu_closed_form(1000, 0.1).unwrap()) < 1e-13);
    }

    #[test]
    fn inverse_variance_matches_leading_order() {
        for (n, p) in [(1000, 0.1), (2000, 0.1), (400, 0.5)] {
            let m = moment_set(n, p).unwrap();
            let np = n as f64 * p;
            let ratio = m.var_inv * np.powi(3) / (1.0 - p);
            assert!((0.9..=1.1).contains(&ratio), "n={n} p={p}: {ratio}");
        }
    }

    #[test]
    fn beta_term_negligible_against_gamma_term() {
        let m = moment_set(2000, 0.1).unwrap();
        assert!(m.beta2 / (2.0 * 2000.0 * 0.1 * m.gamma2) <= 0.05);
    }

    #[test]
    fn degenerate_normalization_rejected() {
        assert!(matches!(moment_set(3, 1.0 - 1e-12), Err(Error::DegenerateNormalization { .. })));
        assert!(moment_set(3, 0.999_999).is_ok());
    }

    #[test]
    fn central_moment_examples() {
        let v = central_moment(50, 0.3, 2).unwrap().value;
        assert!((v - 49.0 * 0.3 * 0.7).abs() < 1e-12);
        // Bin(2, 1/2): (1/4)(1) + (1/2)(0) + (1/4)(1)
        assert!((central_moment(3, 0.5, 4).unwrap().value - 0.5).abs() < 1e-15);
        assert!(central_moment(10, 0.5, 3).is_err());
        let ratios: Vec<f64> = [100, 400, 1600].iter().map(|&n| central_moment(n, 0.1, 4).unwrap().ratio).collect();
        // E[(Y-nu)^4] = 3 s^4 + s^2 (1 - 6pq) with s^2 = (n-1)pq -> ratio ~ 3
        assert!(ratios.iter().all(|r| (2.5..=3.5).contains(r)), "{ratios:?}");
    }

    #[test]
    fn centered_inverse_moment_examples() {
        assert!(centered_inverse_moment(300, 0.2, 1).unwrap().value.abs() < 1e-17);
        let m = moment_set(300, 0.2).unwrap();
        let c2 = centered_inverse_moment(300, 0.2, 2).unwrap().value;
        assert!(rel(c2, m.sigma2 - m.mu * m.mu) < 1e-9);
        let r = centered_inverse_moment(2000, 0.1, 2).unwrap().ratio;
        assert!((r / 0.9 - 1.0).abs() <= 0.1, "{r}");
        assert!(centered_inverse_moment(300, 0.2, 7).is_err());
    }

    #[test]
    fn removing_a_few_vertices_barely_changes_inverse_moments() {
        let (n, p) = (1000usize, 0.1);
        let np = n as f64 * p;
        for shift in 0..=3 {
            for removed in 0..=3 {
                for k in 1..=2u32 {
                    let e = shifted_inverse_moment(n - 1 - removed, p, shift, k).unwrap();
                    let ratio = e * np.powi(k as i32);
                    assert!((ratio - 1.0).abs() <= 10.0 / np, "K={shift} l={removed} k={k}: {ratio}");
                }
            }
        }
    }
}
