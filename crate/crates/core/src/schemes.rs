//! Time steppers: the full-discrete Euler-type SPDE scheme (exponential or
//! linear-implicit semigroup), a tamed contrast scheme, and the plain 1-D
//! Euler–Maruyama scheme.
//!
//! One step of the full-discrete scheme is
//!
//! ```text
//! Y_{n+1} = P_N S_N ( Y_n + (T/N)·Σ_k a_k [Y_n]^k + ΔW_n ),
//! ```
//!
//! with the pointwise polynomial evaluated dealiasing-exactly before the
//! semigroup is applied. Explosion is data, not an error: a step whose
//! output has a non-finite coefficient or an L² norm above
//! [`EXPLOSION_GUARD`] returns a state flagged exploded, and trajectory
//! drivers stop there and record the step index.

use crate::error::{Error, Result};
use crate::noise::{sample_increment, sample_scalar_increment, NoiseIncrement, SeedSpec};
use crate::spectral::{
    horner, project, semigroup_multiplier, PolyEvaluator, PolyScratch, SemigroupKind,
    SpectralState, EXPLOSION_GUARD,
};

/// Which drift treatment the stepper applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// The scheme under study: raw explicit drift increment.
    FullDiscrete,
    /// Contrast baseline: drift increment divided by `1 + dt·‖F(Y)‖`.
    Tamed,
}

/// Full problem description. The spatial cutoff and the number of time
/// steps are coupled through the single parameter `steps` (the scheme
/// refines both together).
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    /// Time horizon `T > 0`.
    pub t_final: f64,
    /// `N`: number of steps and spectral cutoff.
    pub steps: usize,
    /// Drift polynomial coefficients `a_0..a_q`. Divergence-bound
    /// computations additionally require `a_q ≠ 0`; plain simulation does
    /// not (an all-zero polynomial gives the stochastic heat flow).
    pub a: Vec<f64>,
    /// `ν ∈ (1/4, 3/4)`.
    pub nu: f64,
    /// `χ > 1/4`.
    pub chi: f64,
    /// `η > 0`, the spectral shift.
    pub eta: f64,
    /// Initial condition as a finite spectral sum (membership in `H_χ` is
    /// automatic).
    pub xi: SpectralState,
    pub semigroup: SemigroupKind,
    pub scheme: SchemeKind,
    /// Multiplies every sampled noise coefficient; `0.0` switches the
    /// noise off (test hook), `1.0` is the model.
    pub noise_scale: f64,
}

impl SchemeConfig {
    /// Stochastic Allen–Cahn defaults: `T = 1`, `a = (0, 1, 0, -1)`,
    /// `ν = χ = 1/2`, `η = 1`, `ξ = 0`, exponential semigroup.
    pub fn allen_cahn(steps: usize) -> Self {
        Self {
            t_final: 1.0,
            steps,
            a: vec![0.0, 1.0, 0.0, -1.0],
            nu: 0.5,
            chi: 0.5,
            eta: 1.0,
            xi: SpectralState::zeros(0),
            semigroup: SemigroupKind::ExponentialEuler,
            scheme: SchemeKind::FullDiscrete,
            noise_scale: 1.0,
        }
    }

    /// Pure projected noise / heat flow: all drift coefficients zero.
    pub fn zero_drift(steps: usize) -> Self {
        Self {
            a: vec![0.0, 0.0, 0.0, 0.0],
            ..Self::allen_cahn(steps)
        }
    }

    /// Polynomial degree `q = len(a) - 1`.
    pub fn degree(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// Invariants needed by the steppers.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "T must be > 0, got {}",
                self.t_final
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be >= 1".into()));
        }
        if self.degree() < 2 {
            return Err(Error::InvalidConfig(format!(
                "drift polynomial needs degree q >= 2, got {}",
                self.degree()
            )));
        }
        if !(self.nu > 0.25 && self.nu < 0.75) {
            return Err(Error::InvalidExponent {
                name: "nu",
                value: self.nu,
                range: "(1/4, 3/4)",
            });
        }
        if !(self.chi > 0.25) {
            return Err(Error::InvalidExponent {
                name: "chi",
                value: self.chi,
                range: "(1/4, inf)",
            });
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "eta must be > 0, got {}",
                self.eta
            )));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise_scale must be >= 0, got {}",
                self.noise_scale
            )));
        }
        Ok(())
    }

    /// Additional invariant for divergence-constant evaluation: `a_q ≠ 0`.
    pub fn validate_for_bounds(&self) -> Result<()> {
        self.validate()?;
        match self.a.last() {
            Some(&aq) if aq != 0.0 => Ok(()),
            _ => Err(Error::InvalidConfig(
                "leading drift coefficient a_q must be nonzero".into(),
            )),
        }
    }
}

/// Output of one trajectory run.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub final_state: SpectralState,
    /// 0-based index of the step whose update produced the explosion;
    /// `None` if the trajectory survived all `N` steps.
    pub exploded_at: Option<usize>,
}

/// Scratch buffers owned by one trajectory worker.
#[derive(Debug)]
pub struct StepWorkspace {
    drift: Vec<f64>,
    poly: Option<PolyScratch>,
}

/// Precomputed stepping context: semigroup multipliers and dealiasing
/// transform tables, shared read-only across parallel trajectories.
#[derive(Debug, Clone)]
pub struct SchemeContext {
    cfg: SchemeConfig,
    dt: f64,
    multipliers: Vec<f64>,
    poly: Option<PolyEvaluator>,
    xi_projected: SpectralState,
}

impl SchemeContext {
    pub fn new(cfg: &SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.steps;
        let dt = cfg.dt();
        let multipliers: Vec<f64> = (-(n as i64)..=n as i64)
            .map(|m| semigroup_multiplier(cfg.semigroup, m, dt))
            .collect();
        let drift_active = cfg.a.iter().any(|&c| c != 0.0);
        let poly = if drift_active {
            Some(PolyEvaluator::new(n, cfg.degree())?)
        } else {
            None
        };
        let xi_projected = project(&cfg.xi, n).with_cutoff(n);
        Ok(Self {
            cfg: cfg.clone(),
            dt,
            multipliers,
            poly,
            xi_projected,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Initial state `Y_0 = P_N(ξ)`.
    pub fn initial_state(&self) -> SpectralState {
        self.xi_projected.clone()
    }

    pub fn workspace(&self) -> StepWorkspace {
        let width = 2 * self.cfg.steps + 1;
        StepWorkspace {
            drift: vec![0.0; width],
            poly: self.poly.as_ref().map(|p| p.scratch()),
        }
    }

    /// One step of the configured scheme.
    pub fn step(
        &self,
        y: &SpectralState,
        dw: &NoiseIncrement,
        ws: &mut StepWorkspace,
    ) -> SpectralState {
        let n = self.cfg.steps;
        assert_eq!(y.cutoff(), n, "state cutoff must equal cfg.steps");
        assert_eq!(dw.cutoff, n, "noise cutoff must equal cfg.steps");
        let width = 2 * n + 1;
        let mut out = SpectralState::zeros(n);

        let drift_scale = match &self.poly {
            Some(poly) => {
                let scratch = ws.poly.as_mut().expect("workspace built for this context");
                poly.eval_into(y.coeffs(), &self.cfg.a, &mut ws.drift, scratch);
                match self.cfg.scheme {
                    SchemeKind::FullDiscrete => self.dt,
                    SchemeKind::Tamed => {
                        let norm = ws.drift.iter().map(|d| d * d).sum::<f64>().sqrt();
                        self.dt / (1.0 + self.dt * norm)
                    }
                }
            }
            None => 0.0,
        };

        let mut norm2 = 0.0;
        {
            let out_c = out.coeffs_mut();
            for idx in 0..width {
                let u = if self.poly.is_some() {
                    y.coeffs()[idx] + drift_scale * ws.drift[idx] + dw.coeffs[idx]
                } else {
                    y.coeffs()[idx] + dw.coeffs[idx]
                };
                let v = self.multipliers[idx] * u;
                out_c[idx] = v;
                norm2 += v * v;
            }
        }
        // NaN fails the comparison, so non-finite coefficients are caught here too.
        if !(norm2 <= EXPLOSION_GUARD * EXPLOSION_GUARD) {
            out.mark_exploded();
        }
        out
    }

    /// Iterate the scheme `N` times from `P_N(ξ)`, stopping at explosion.
    /// `seed` carries the trajectory label; step labels are filled in here.
    pub fn run(&self, seed: SeedSpec) -> TrajectoryResult {
        let mut ws = self.workspace();
        let mut y = self.initial_state();
        for step in 0..self.cfg.steps {
            let dw = self.sample_step_noise(&seed, step);
            y = self.step(&y, &dw, &mut ws);
            if y.is_exploded() {
                return TrajectoryResult {
                    final_state: y,
                    exploded_at: Some(step),
                };
            }
        }
        TrajectoryResult {
            final_state: y,
            exploded_at: None,
        }
    }

    /// Like [`Self::run`], also recording `(‖Y‖_{H_0}, ⟨e_0,Y⟩, exploded)`
    /// after every step (plus the initial state) for trajectory dumps.
    pub fn run_recorded(&self, seed: SeedSpec) -> (TrajectoryResult, Vec<(f64, f64, bool)>) {
        let mut ws = self.workspace();
        let mut y = self.initial_state();
        let center = self.cfg.steps;
        let mut rows = vec![(y.l2_norm(), y.coeffs()[center], false)];
        for step in 0..self.cfg.steps {
            let dw = self.sample_step_noise(&seed, step);
            y = self.step(&y, &dw, &mut ws);
            rows.push((y.l2_norm(), y.coeffs()[center], y.is_exploded()));
            if y.is_exploded() {
                return (
                    TrajectoryResult {
                        final_state: y,
                        exploded_at: Some(step),
                    },
                    rows,
                );
            }
        }
        (
            TrajectoryResult {
                final_state: y,
                exploded_at: None,
            },
            rows,
        )
    }

    fn sample_step_noise(&self, seed: &SeedSpec, step: usize) -> NoiseIncrement {
        let mut dw = sample_increment(&seed.with_step(step as u64), self.cfg.steps, self.dt);
        if self.cfg.noise_scale != 1.0 {
            for c in dw.coeffs.iter_mut() {
                *c *= self.cfg.noise_scale;
            }
        }
        dw
    }
}

/// One step of the full-discrete scheme
/// `P_N S_N(Y + (T/N)·Σ a_k Y^k + ΔW)`, independent of `cfg.scheme`.
pub fn step_full_discrete(
    y: &SpectralState,
    cfg: &SchemeConfig,
    dw: &NoiseIncrement,
) -> Result<SpectralState> {
    let cfg = SchemeConfig {
        scheme: SchemeKind::FullDiscrete,
        ..cfg.clone()
    };
    let ctx = SchemeContext::new(&cfg)?;
    let mut ws = ctx.workspace();
    Ok(ctx.step(y, dw, &mut ws))
}

/// One tamed step: drift increment `(T/N)·F(Y) / (1 + (T/N)·‖F(Y)‖_{H_0})`,
/// otherwise the same pipeline.
pub fn step_tamed(
    y: &SpectralState,
    cfg: &SchemeConfig,
    dw: &NoiseIncrement,
) -> Result<SpectralState> {
    let cfg = SchemeConfig {
        scheme: SchemeKind::Tamed,
        ..cfg.clone()
    };
    let ctx = SchemeContext::new(&cfg)?;
    let mut ws = ctx.workspace();
    Ok(ctx.step(y, dw, &mut ws))
}

/// Run one trajectory of the configured scheme.
pub fn run_trajectory(cfg: &SchemeConfig, seed: SeedSpec) -> Result<TrajectoryResult> {
    Ok(SchemeContext::new(cfg)?.run(seed))
}

/// Initial law for the 1-D scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial1d {
    Constant(f64),
    Normal { mean: f64, std_dev: f64 },
}

/// 1-D SODE description for the Euler–Maruyama scheme.
///
/// The divergence theory behind this scheme assumes a growth bound of the
/// form `|μ(x)| + |σ(x)| ≥ |x|^α / c` outside a compact interval, plus a
/// non-degeneracy condition on `(σ(ξ), ξ)`. Neither is enforced at
/// runtime; they delimit which configurations the theory speaks about.
#[derive(Debug, Clone, PartialEq)]
pub struct Sode1dConfig {
    pub t_final: f64,
    pub steps: usize,
    /// Drift polynomial coefficients `μ(x) = Σ mu_k x^k`.
    pub mu: Vec<f64>,
    /// Diffusion polynomial coefficients `σ(x) = Σ sigma_k x^k`.
    pub sigma: Vec<f64>,
    pub xi0: Initial1d,
}

impl Sode1dConfig {
    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "T must be > 0, got {}",
                self.t_final
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// `y + (T/N)·μ(y) + σ(y)·dW`. Non-finite outputs are flagged by the
/// trajectory driver, not here.
pub fn step_euler_maruyama_1d(y: f64, cfg: &Sode1dConfig, dw: f64) -> f64 {
    y + cfg.dt() * horner(&cfg.mu, y) + horner(&cfg.sigma, y) * dw
}

/// Step label reserved for drawing the initial condition.
const INITIAL_DRAW_STEP: u64 = u64::MAX;

/// Run one 1-D trajectory; returns the final value and the explosion step.
pub fn run_trajectory_1d(cfg: &Sode1dConfig, seed: SeedSpec) -> Result<(f64, Option<usize>)> {
    cfg.validate()?;
    let mut y = match cfg.xi0 {
        Initial1d::Constant(c) => c,
        Initial1d::Normal { mean, std_dev } => {
            mean + std_dev * sample_scalar_increment(&seed.with_step(INITIAL_DRAW_STEP), 1.0)
        }
    };
    let dt = cfg.dt();
    for step in 0..cfg.steps {
        let dw = sample_scalar_increment(&seed.with_step(step as u64), dt);
        y = step_euler_maruyama_1d(y, cfg, dw);
        if !(y.abs() <= EXPLOSION_GUARD) {
            return Ok((y, Some(step)));
        }
    }
    Ok((y, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::SeedSpec;
    use crate::spectral::SemigroupKind;

    fn zero_noise(n: usize, dt: f64) -> NoiseIncrement {
        NoiseIncrement::zeros(n, dt)
    }

    #[test]
    fn constant_state_is_fixed_without_drift_and_noise() {
        let cfg = SchemeConfig {
            steps: 3,
            xi: SpectralState::basis(0, 0, 2.5),
            ..SchemeConfig::zero_drift(3)
        };
        let y = SpectralState::basis(3, 0, 2.5);
        let out = step_full_discrete(&y, &cfg, &zero_noise(3, cfg.dt())).unwrap();
        assert_eq!(out.coeff(0), 2.5);
        assert!(out.coeffs().iter().filter(|&&c| c != 0.0).count() == 1);
    }

    #[test]
    fn constant_drift_passes_through_semigroup() {
        // Y = 0, a = (1,0,0,...), dW = 0, N = 1, T = 1: one step gives e_0.
        let cfg = SchemeConfig {
            steps: 1,
            a: vec![1.0, 0.0, 0.0],
            ..SchemeConfig::allen_cahn(1)
        };
        let y = SpectralState::zeros(1);
        let out = step_full_discrete(&y, &cfg, &zero_noise(1, 1.0)).unwrap();
        assert_eq!(out.coeff(0), 1.0);
        // other modes carry only trig-table roundoff dust
        assert!(out.coeff(1).abs() < 1e-14);
        assert!(out.coeff(-1).abs() < 1e-14);
    }

    #[test]
    fn pure_resolvent_action_on_single_mode() {
        let cfg = SchemeConfig {
            steps: 1,
            semigroup: SemigroupKind::LinearImplicitEuler,
            ..SchemeConfig::zero_drift(1)
        };
        let y = SpectralState::basis(1, 1, 1.0);
        let out = step_full_discrete(&y, &cfg, &zero_noise(1, 1.0)).unwrap();
        assert!((out.coeff(1) - 0.02470452303185764).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_zero_drift_is_the_semigroup_flow() {
        // mode-m coefficient of Y_N equals σ_m^N ⟨e_m, ξ⟩ exactly
        for kind in [
            SemigroupKind::ExponentialEuler,
            SemigroupKind::LinearImplicitEuler,
        ] {
            let n = 6;
            let mut xi = SpectralState::zeros(n);
            for m in -(n as i64)..=n as i64 {
                xi.set_coeff(m, 0.1 * m as f64 + 1.0);
            }
            let cfg = SchemeConfig {
                xi: xi.clone(),
                semigroup: kind,
                noise_scale: 0.0,
                ..SchemeConfig::zero_drift(n)
            };
            let r = run_trajectory(&cfg, SeedSpec::new(1)).unwrap();
            assert!(r.exploded_at.is_none());
            let dt = cfg.dt();
            for m in -(n as i64)..=n as i64 {
                let sig = semigroup_multiplier(kind, m, dt);
                // bit-exact against the iterated product, close to σ^N
                let mut want = xi.coeff(m);
                for _ in 0..n {
                    want *= sig;
                }
                assert_eq!(r.final_state.coeff(m), want, "mode {m}");
                let closed = sig.powi(n as i32) * xi.coeff(m);
                assert!((want - closed).abs() <= 1e-13 * closed.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn linear_drift_matches_scalar_recursion() {
        // a = (0, a_1): every mode satisfies y ← σ(y(1 + a_1·dt) + w)
        let n = 64;
        let a1 = -0.8;
        let mut xi = SpectralState::zeros(2);
        xi.set_coeff(0, 0.4);
        xi.set_coeff(1, -0.2);
        xi.set_coeff(-2, 0.9);
        let cfg = SchemeConfig {
            a: vec![0.0, a1, 0.0],
            xi: xi.clone(),
            ..SchemeConfig::allen_cahn(n)
        };
        let seed = SeedSpec::new(99).with_trajectory(5);
        let got = run_trajectory(&cfg, seed).unwrap();
        assert!(got.exploded_at.is_none());

        let dt = cfg.dt();
        let xi_n = xi.with_cutoff(n);
        for m in -(n as i64)..=n as i64 {
            let sig = semigroup_multiplier(cfg.semigroup, m, dt);
            let mut y = xi_n.coeff(m);
            for step in 0..n {
                let dw = sample_increment(&seed.with_step(step as u64), n, dt);
                y = sig * (y + dt * (a1 * y) + dw.coeffs[(m + n as i64) as usize]);
            }
            assert!(
                (got.final_state.coeff(m) - y).abs() <= 1e-12 * (1.0 + y.abs()),
                "mode {m}: {} vs {y}",
                got.final_state.coeff(m)
            );
        }
    }

    #[test]
    fn e0_bookkeeping_is_exact() {
        // ⟨e_0, step output⟩ = ⟨e_0, Y⟩ + dt·⟨e_0, F(Y)⟩ + ⟨e_0, dW⟩,
        // since the semigroup fixes e_0.
        let cfg = SchemeConfig::allen_cahn(8);
        let ctx = SchemeContext::new(&cfg).unwrap();
        let mut ws = ctx.workspace();
        let mut y = SpectralState::zeros(8);
        for m in -8i64..=8 {
            y.set_coeff(m, (m as f64 * 0.77).sin());
        }
        let dw = sample_increment(&SeedSpec::new(3), 8, cfg.dt());
        let drift = crate::spectral::poly_eval_projected(&y, &cfg.a, 8).unwrap();
        let out = ctx.step(&y, &dw, &mut ws);
        let want = y.coeff(0) + cfg.dt() * drift.coeff(0) + dw.coeffs[8];
        assert_eq!(out.coeff(0), want);
    }

    #[test]
    fn em_1d_hand_arithmetic() {
        let cfg = Sode1dConfig {
            t_final: 1.0,
            steps: 10,
            mu: vec![0.0, 0.0, 0.0, -1.0],
            sigma: vec![0.0],
            xi0: Initial1d::Constant(0.0),
        };
        assert_eq!(step_euler_maruyama_1d(0.0, &cfg, 0.0), 0.0);
        assert!((step_euler_maruyama_1d(1.0, &cfg, 0.0) - 0.9).abs() < 1e-15);
        assert!((step_euler_maruyama_1d(10.0, &cfg, 0.0) + 90.0).abs() < 1e-12);
    }

    #[test]
    fn tamed_matches_full_discrete_when_drift_vanishes() {
        // F(Y) = 0 at Y = 0 for a polynomial with a_0 = 0
        let cfg = SchemeConfig::allen_cahn(4);
        let y = SpectralState::zeros(4);
        let dw = sample_increment(&SeedSpec::new(17), 4, cfg.dt());
        let full = step_full_discrete(&y, &cfg, &dw).unwrap();
        let tamed = step_tamed(&y, &cfg, &dw).unwrap();
        assert_eq!(full.coeffs(), tamed.coeffs());
    }

    #[test]
    fn tamed_drift_increment_is_bounded() {
        // ‖dt·F/(1 + dt‖F‖)‖ ≤ 1 no matter how large F is
        let cfg = SchemeConfig {
            steps: 2,
            scheme: SchemeKind::Tamed,
            ..SchemeConfig::allen_cahn(2)
        };
        let ctx = SchemeContext::new(&cfg).unwrap();
        let mut ws = ctx.workspace();
        let y = SpectralState::basis(2, 0, 1e40);
        let out = ctx.step(&y, &zero_noise(2, cfg.dt()), &mut ws);
        // increment = out - y on e_0 (semigroup fixes e_0)
        let inc = out.coeff(0) - y.coeff(0);
        assert!(inc.abs() <= 1.0 + 1e-12);
        assert!(!out.is_exploded());
    }

    #[test]
    fn explosion_is_detected_and_recorded() {
        // unstable quadratic drift from a large constant state blows up fast
        let cfg = SchemeConfig {
            steps: 8,
            a: vec![0.0, 0.0, 1.0],
            xi: SpectralState::basis(0, 0, 1e20),
            noise_scale: 0.0,
            ..SchemeConfig::allen_cahn(8)
        };
        let r = run_trajectory(&cfg, SeedSpec::new(0)).unwrap();
        assert!(r.exploded_at.is_some());
        assert!(r.final_state.is_exploded());
    }

    #[test]
    fn trajectories_are_deterministic() {
        let cfg = SchemeConfig::allen_cahn(16);
        let seed = SeedSpec::new(123).with_trajectory(4);
        let a = run_trajectory(&cfg, seed).unwrap();
        let b = run_trajectory(&cfg, seed).unwrap();
        assert_eq!(a.final_state.coeffs(), b.final_state.coeffs());
        assert_eq!(a.exploded_at, b.exploded_at);
    }

    #[test]
    fn ou_variance_smoke() {
        // all a_k = 0, exponential kind: mode-m coefficient of Y_N is a
        // centered Gaussian with variance (T/N)·Σ_{j=0}^{N-1} σ_m^{2(j+1)}.
        let n = 4;
        let n_traj = 4000;
        let cfg = SchemeConfig::zero_drift(n);
        let ctx = SchemeContext::new(&cfg).unwrap();
        let seed = SeedSpec::new(2024);
        let mut sums = vec![0.0; 2 * n + 1];
        let mut sums2 = vec![0.0; 2 * n + 1];
        for i in 0..n_traj {
            let r = ctx.run(seed.with_trajectory(i as u64));
            for (idx, &c) in r.final_state.coeffs().iter().enumerate() {
                sums[idx] += c;
                sums2[idx] += c * c;
            }
        }
        let dt = cfg.dt();
        for m in -(n as i64)..=n as i64 {
            let idx = (m + n as i64) as usize;
            let sig = semigroup_multiplier(cfg.semigroup, m, dt);
            let want: f64 = (0..n).map(|j| dt * sig.powi(2 * (j as i32 + 1))).sum();
            let mean = sums[idx] / n_traj as f64;
            let var = sums2[idx] / n_traj as f64 - mean * mean;
            let se = want * (2.0 / (n_traj as f64 - 1.0)).sqrt();
            assert!(
                (var - want).abs() < 4.0 * se,
                "mode {m}: var {var} vs {want} (se {se})"
            );
        }
    }

    #[test]
    fn run_1d_explodes_from_huge_start() {
        let cfg = Sode1dConfig {
            t_final: 1.0,
            steps: 16,
            mu: vec![0.0, 0.0, 0.0, -1.0],
            sigma: vec![1.0],
            xi0: Initial1d::Constant(1e60),
        };
        let (_, exploded) = run_trajectory_1d(&cfg, SeedSpec::new(9)).unwrap();
        assert!(exploded.is_some());
    }
}
