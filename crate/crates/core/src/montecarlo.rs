//! Parallel Monte Carlo estimation of moments `E[‖Y_N^N‖_H^p]` and event
//! probabilities, with explicit explosion accounting.
//!
//! Exploded paths contribute the guard value `10^150` raised to `p` (in log
//! space) instead of being discarded or set to `∞`: discarding would bias
//! the estimate downward, `∞` destroys the statistic, and clamping yields a
//! certified lower bound on the (possibly infinite) true moment — the
//! direction the divergence statements call for.
//!
//! Trajectories are embarrassingly parallel; noise streams are keyed by
//! trajectory index and results are reduced in a fixed order, so the output
//! is bit-identical for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::SeedSpec;
use crate::schemes::{
    run_trajectory_1d, SchemeConfig, SchemeContext, Sode1dConfig, TrajectoryResult,
};
use crate::spectral::EXPLOSION_GUARD;

/// `ln Σ exp(x_i)`, stable against large magnitudes; `-∞` entries drop out
/// and an empty slice gives `-∞`.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Log-domain mean of clamped `p`-th powers: finite paths contribute their
/// `p·ln‖Y‖`, exploded paths contribute `p·ln(guard)`.
pub fn saturated_log_mean(finite_ln_norms: &[f64], n_exploded: usize, p: f64, guard: f64) -> f64 {
    let n_total = finite_ln_norms.len() + n_exploded;
    if n_total == 0 {
        return f64::NAN;
    }
    let mut terms: Vec<f64> = finite_ln_norms.iter().map(|l| p * l).collect();
    terms.extend(std::iter::repeat(p * guard.ln()).take(n_exploded));
    logsumexp(&terms) - (n_total as f64).ln()
}

/// Mean and standard error of the mean for values given as logarithms,
/// computed entirely in log space. Returns `(ln_mean, relative_se)` where
/// `relative_se = se(mean)/mean`, the delta-method standard error of
/// `ln(mean)`.
pub fn log_mean_and_relative_se(ln_values: &[f64]) -> (f64, f64) {
    let n = ln_values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let lse = logsumexp(ln_values);
    let ln_mean = lse - (n as f64).ln();
    if n < 2 || !ln_mean.is_finite() {
        return (ln_mean, f64::NAN);
    }
    // Σx² - n·mean² = exp(lse2)·(1 - exp(2·lse - ln n - lse2)); the inner
    // exponent is ≤ 0 by Cauchy-Schwarz.
    let lse2 = logsumexp(&ln_values.iter().map(|l| 2.0 * l).collect::<Vec<_>>());
    let delta = 2.0 * lse - (n as f64).ln() - lse2;
    let diff = (-delta.exp()).ln_1p(); // ln(1 - exp(delta)), ≤ 0
    if !diff.is_finite() {
        // all values equal: zero variance
        return (ln_mean, 0.0);
    }
    let ln_var = lse2 + diff - ((n - 1) as f64).ln();
    let ln_se_mean = 0.5 * (ln_var - (n as f64).ln());
    (ln_mean, (ln_se_mean - ln_mean).exp())
}

/// Overflow-aware Monte Carlo statistic of `E[‖Y‖^p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub p: f64,
    pub samples: usize,
    pub finite_samples: usize,
    /// `exploded / samples`.
    pub explosion_fraction: f64,
    /// Log-domain mean of `‖Y‖^p` over non-exploded paths; `NaN` when every
    /// path exploded.
    pub log_mean_finite: f64,
    /// Log-domain mean with exploded paths clamped at the guard value — a
    /// certified lower bound on the true (possibly infinite) moment.
    pub log_saturated_mean: f64,
    /// `exp(log_saturated_mean)`; may overflow to `+∞` for large `p`, in
    /// which case `log_saturated_mean` remains the usable statistic.
    pub saturated_mean: f64,
    /// Delta-method standard error of `log_mean_finite` (finite paths
    /// only); explosion_fraction carries its own binomial error.
    pub std_error_log: f64,
}

fn assemble_estimate(ln_norms_finite: Vec<f64>, n_exploded: usize, p: f64) -> MomentEstimate {
    let samples = ln_norms_finite.len() + n_exploded;
    let ln_powers: Vec<f64> = ln_norms_finite.iter().map(|l| p * l).collect();
    let (log_mean_finite, std_error_log) = log_mean_and_relative_se(&ln_powers);
    let log_saturated_mean =
        saturated_log_mean(&ln_norms_finite, n_exploded, p, EXPLOSION_GUARD);
    MomentEstimate {
        p,
        samples,
        finite_samples: ln_norms_finite.len(),
        explosion_fraction: n_exploded as f64 / samples as f64,
        log_mean_finite,
        log_saturated_mean,
        saturated_mean: log_saturated_mean.exp(),
        std_error_log,
    }
}

/// Estimate `E[‖Y_N^N‖_{H_0}^p]` over `n_samples` independent trajectories.
///
/// Deterministic given the seed: trajectory `i` uses the stream labelled
/// `seed.with_trajectory(i)`, and the reduction order is fixed.
pub fn estimate_moment(
    cfg: &SchemeConfig,
    p: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<MomentEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidConfig(format!("p must be > 0, got {p}")));
    }
    let ctx = SchemeContext::new(cfg)?;
    let per_trajectory: Vec<Option<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let r = ctx.run(seed.with_trajectory(i as u64));
            match r.exploded_at {
                Some(_) => None,
                None => Some(r.final_state.l2_norm().ln()),
            }
        })
        .collect();
    let mut finite = Vec::with_capacity(n_samples);
    let mut exploded = 0usize;
    for v in per_trajectory {
        match v {
            Some(l) => finite.push(l),
            None => exploded += 1,
        }
    }
    Ok(assemble_estimate(finite, exploded, p))
}

/// 1-D analogue of [`estimate_moment`] for the Euler–Maruyama scheme:
/// estimates `E[|Y_N|^p]` with the same explosion accounting.
pub fn estimate_moment_1d(
    cfg: &Sode1dConfig,
    p: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<MomentEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidConfig(format!("p must be > 0, got {p}")));
    }
    cfg.validate()?;
    let per_trajectory: Vec<Option<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let (y, exploded_at) =
                run_trajectory_1d(cfg, seed.with_trajectory(i as u64)).expect("validated config");
            match exploded_at {
                Some(_) => None,
                None => Some(y.abs().ln()),
            }
        })
        .collect();
    let mut finite = Vec::with_capacity(n_samples);
    let mut exploded = 0usize;
    for v in per_trajectory {
        match v {
            Some(l) => finite.push(l),
            None => exploded += 1,
        }
    }
    Ok(assemble_estimate(finite, exploded, p))
}

/// One mode of the Ornstein–Uhlenbeck validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVarianceRow {
    pub mode: i64,
    pub empirical: f64,
    /// Closed form `(T/N)·Σ_{j=0}^{N-1} σ_m^{2(j+1)}`.
    pub analytic: f64,
    /// Standard error of the empirical variance under Gaussianity:
    /// `analytic·√(2/(n-1))`.
    pub std_error: f64,
}

/// Per-mode empirical vs analytic variance of `Y_N` for the zero-drift
/// scheme (each mode is a scalar OU recursion with the closed-form
/// variance above). Requires an all-zero drift polynomial.
pub fn ou_mode_variances(
    cfg: &SchemeConfig,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<Vec<ModeVarianceRow>> {
    if cfg.a.iter().any(|&c| c != 0.0) {
        return Err(Error::InvalidConfig(
            "OU validation requires an all-zero drift polynomial".into(),
        ));
    }
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    let ctx = SchemeContext::new(cfg)?;
    let n = cfg.steps;
    let width = 2 * n + 1;
    let per_trajectory: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let r = ctx.run(seed.with_trajectory(i as u64));
            r.final_state.coeffs().to_vec()
        })
        .collect();
    let mut sums = vec![0.0; width];
    let mut sums2 = vec![0.0; width];
    for coeffs in &per_trajectory {
        for (idx, &c) in coeffs.iter().enumerate() {
            sums[idx] += c;
            sums2[idx] += c * c;
        }
    }
    let dt = cfg.dt();
    let nf = n_samples as f64;
    let rows = (0..width)
        .map(|idx| {
            let mode = idx as i64 - n as i64;
            let mean = sums[idx] / nf;
            let empirical = sums2[idx] / nf - mean * mean;
            let sig = crate::spectral::semigroup_multiplier(cfg.semigroup, mode, dt);
            let analytic: f64 = (0..n).map(|j| dt * sig.powi(2 * (j as i32 + 1))).sum();
            ModeVarianceRow {
                mode,
                empirical,
                analytic,
                std_error: analytic * (2.0 / (nf - 1.0)).sqrt(),
            }
        })
        .collect();
    Ok(rows)
}

/// Empirical probability of `event` over trajectory outputs, with binomial
/// standard error.
pub fn estimate_event_probability<F>(
    cfg: &SchemeConfig,
    n_samples: usize,
    seed: SeedSpec,
    event: F,
) -> Result<(f64, f64)>
where
    F: Fn(&TrajectoryResult) -> bool + Sync,
{
    if n_samples < 100 {
        return Err(Error::InvalidConfig(format!(
            "need at least 100 samples, got {n_samples}"
        )));
    }
    let ctx = SchemeContext::new(cfg)?;
    let hits: usize = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let r = ctx.run(seed.with_trajectory(i as u64));
            usize::from(event(&r))
        })
        .sum();
    let p_hat = hits as f64 / n_samples as f64;
    let se = (p_hat * (1.0 - p_hat) / n_samples as f64).sqrt();
    Ok((p_hat, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{Initial1d, SchemeConfig};

    #[test]
    fn logsumexp_agrees_with_naive_sum() {
        let xs = [0.3f64, -1.2, 2.4, 0.0, -0.7];
        let naive: f64 = xs.iter().map(|x| f64::exp(*x)).sum();
        assert!((logsumexp(&xs) - naive.ln()).abs() < 1e-10 * naive.ln().abs().max(1.0));
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_mean_se_against_plain_arithmetic() {
        let vals = [1.0f64, 2.0, 3.0, 4.0];
        let lns: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        let (lm, rse) = log_mean_and_relative_se(&lns);
        let mean = 2.5;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 3.0;
        let se = (var / 4.0).sqrt();
        assert!((lm - mean.ln()).abs() < 1e-12);
        assert!((rse - se / mean).abs() < 1e-10);
    }

    #[test]
    fn saturated_mean_monotone_in_guard() {
        let finite = [0.1f64, -0.4, 0.9];
        let mut prev = f64::NEG_INFINITY;
        for guard in [1e10, 1e50, 1e100, 1e150] {
            let m = saturated_log_mean(&finite, 2, 2.0, guard);
            assert!(m >= prev);
            prev = m;
        }
        // with no explosions the guard is irrelevant
        let a = saturated_log_mean(&finite, 0, 2.0, 1e10);
        let b = saturated_log_mean(&finite, 0, 2.0, 1e150);
        assert_eq!(a, b);
    }

    #[test]
    fn noise_off_zero_drift_estimates_zero() {
        let cfg = SchemeConfig {
            noise_scale: 0.0,
            ..SchemeConfig::zero_drift(4)
        };
        let est = estimate_moment(&cfg, 2.0, 16, SeedSpec::new(1)).unwrap();
        assert_eq!(est.explosion_fraction, 0.0);
        assert_eq!(est.log_mean_finite, f64::NEG_INFINITY);
        assert_eq!(est.saturated_mean, 0.0);
    }

    #[test]
    fn estimate_is_bit_identical_across_worker_counts() {
        let cfg = SchemeConfig::allen_cahn(8);
        let seed = SeedSpec::new(31);
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| estimate_moment(&cfg, 2.0, 200, seed).unwrap())
        };
        let one = run_with(1);
        let four = run_with(4);
        assert_eq!(one, four);
    }

    #[test]
    fn ou_second_moment_matches_closed_form() {
        // all a_k = 0, exponential kind: E‖Y_N‖² = Σ_m Σ_j (T/N)σ_m^{2(j+1)}
        let n = 8usize;
        let cfg = SchemeConfig::zero_drift(n);
        let est = estimate_moment(&cfg, 2.0, 4000, SeedSpec::new(5)).unwrap();
        let dt = cfg.dt();
        let want: f64 = (-(n as i64)..=n as i64)
            .map(|m| {
                let sig = crate::spectral::semigroup_multiplier(cfg.semigroup, m, dt);
                (0..n).map(|j| dt * sig.powi(2 * (j as i32 + 1))).sum::<f64>()
            })
            .sum();
        let got = est.log_mean_finite.exp();
        let se = got * est.std_error_log;
        assert!(
            (got - want).abs() < 4.0 * se,
            "got {got}, want {want}, se {se}"
        );
        assert_eq!(est.explosion_fraction, 0.0);
    }

    #[test]
    fn event_probability_edges_and_gaussian_ball() {
        let cfg = SchemeConfig::zero_drift(1);
        let seed = SeedSpec::new(9);
        let (p, se) = estimate_event_probability(&cfg, 1000, seed, |_| true).unwrap();
        assert_eq!((p, se), (1.0, 0.0));
        let (p, se) = estimate_event_probability(&cfg, 1000, seed, |_| false).unwrap();
        assert_eq!((p, se), (0.0, 0.0));

        // 1-step pure-noise trajectory: ⟨e_0, Y_1⟩ ~ N(0,1)
        let cfg = SchemeConfig {
            steps: 1,
            t_final: 1.0,
            ..SchemeConfig::zero_drift(1)
        };
        let (p, se) =
            estimate_event_probability(&cfg, 100_000, seed, |r| r.final_state.coeff(0).abs() <= 1.0)
                .unwrap();
        assert!((p - 0.6826894921370859).abs() < 3.5 * se.max(1e-4), "p = {p}");
    }

    #[test]
    fn one_d_moment_estimate_matches_direct_loop() {
        let cfg = Sode1dConfig {
            t_final: 1.0,
            steps: 16,
            mu: vec![0.0, 0.0, 0.0, -1.0],
            sigma: vec![1.0],
            xi0: Initial1d::Constant(0.0),
        };
        let est = estimate_moment_1d(&cfg, 2.0, 500, SeedSpec::new(2)).unwrap();
        assert_eq!(est.samples, 500);
        assert_eq!(est.explosion_fraction, 0.0);
        // direct recomputation of the mean
        let mut sum = 0.0;
        for i in 0..500u64 {
            let (y, e) = run_trajectory_1d(&cfg, SeedSpec::new(2).with_trajectory(i)).unwrap();
            assert!(e.is_none());
            sum += y * y;
        }
        let want = (sum / 500.0).ln();
        assert!((est.log_mean_finite - want).abs() < 1e-10);
    }
}
