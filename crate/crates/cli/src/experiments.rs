//! Experiment runners. Each returns structured rows plus a CSV rendering;
//! the binary wires them to config files and output paths, and the
//! acceptance suite drives them directly.

use rayon::prelude::*;
use statrs::function::erf::erfc;

use spde_lab_core::bounds::{
    abstract_product_bound, compute_constants_with, divergence_lower_bound,
    gaussian_interval_bound, projected_noise_ball_bound, smoothed_ball_bound, AbstractSetup,
    ConstantsOptions, DivergenceConstants,
};
use spde_lab_core::montecarlo::{
    estimate_moment, estimate_moment_1d, ou_mode_variances, ModeVarianceRow,
};
use spde_lab_core::noise::{sample_increment, standard_normals};
use spde_lab_core::schemes::{SchemeContext, Sode1dConfig};
use spde_lab_core::spectral::{
    eigenvalue, semigroup_multiplier, SemigroupKind, SpectralState, TrigTransform,
};
use spde_lab_core::{MomentEstimate, SchemeConfig, SeedSpec};

use crate::config::{ConfigError, ExperimentConfig};

/// Experiment-id bases for the noise streams; sweep-style experiments fold
/// the level `N` into the id so levels draw independent noise.
pub mod experiment_ids {
    pub const SWEEP: u64 = 0x0100_0000;
    pub const SIMULATE: u64 = 0x0200_0000;
    pub const VALIDATE_OU: u64 = 0x0400_0000;
    pub const GAUSS_BALL: u64 = 0x0500_0000;
    pub const GAUSS_SMOOTHED: u64 = 0x0600_0000;
    pub const ABSTRACT_BOUND: u64 = 0x0700_0000;
    pub const SODE1D: u64 = 0x0800_0000;
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Error)]
#[error("{0}")]
pub struct ExperimentError(pub String);

use thiserror::Error;

impl From<spde_lab_core::Error> for ExperimentError {
    fn from(e: spde_lab_core::Error) -> Self {
        Self(e.to_string())
    }
}

impl From<ConfigError> for ExperimentError {
    fn from(e: ConfigError) -> Self {
        Self(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ExperimentError>;

// ---------------------------------------------------------------------
// sweep / simulate / sode1d-sweep: moment estimates
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub n: usize,
    pub estimate: MomentEstimate,
    pub master_seed: u64,
}

pub const MOMENT_CSV_HEADER: &str =
    "N,p,samples,explosion_fraction,log_mean_finite,saturated_mean,std_error_log,master_seed";

pub fn moment_rows_csv(rows: &[MomentRow]) -> String {
    let mut out = String::from(MOMENT_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let e = &row.estimate;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.n,
            fmt(e.p),
            e.samples,
            fmt(e.explosion_fraction),
            fmt(e.log_mean_finite),
            fmt(e.saturated_mean),
            fmt(e.std_error_log),
            row.master_seed,
        ));
    }
    out
}

/// Moment sweep over `n_list × p_list` for one scheme configuration.
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<MomentRow>> {
    let scheme = cfg.scheme()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let core = scheme.to_core(n)?;
        for &p in &cfg.p_list {
            let seed = SeedSpec::new(cfg.master_seed)
                .with_experiment(experiment_ids::SWEEP + n as u64);
            let estimate = estimate_moment(&core, p, cfg.n_samples, seed)?;
            rows.push(MomentRow {
                n,
                estimate,
                master_seed: cfg.master_seed,
            });
        }
    }
    Ok(rows)
}

/// 1-D Euler–Maruyama sweep over `n_list × p_list`.
pub fn sode1d_rows(cfg: &ExperimentConfig) -> Result<Vec<MomentRow>> {
    let section = cfg.sode1d()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let core: Sode1dConfig = section.to_core(n);
        for &p in &cfg.p_list {
            let seed = SeedSpec::new(cfg.master_seed)
                .with_experiment(experiment_ids::SODE1D + n as u64);
            let estimate = estimate_moment_1d(&core, p, cfg.n_samples, seed)?;
            rows.push(MomentRow {
                n,
                estimate,
                master_seed: cfg.master_seed,
            });
        }
    }
    Ok(rows)
}

pub const TRAJECTORY_CSV_HEADER: &str = "step,h0_norm,e0_coeff,exploded";

/// Step-by-step dump of trajectory 0 (`simulate` with `dump_trajectory`).
pub fn trajectory_dump_csv(cfg: &ExperimentConfig) -> Result<String> {
    let scheme = cfg.scheme()?;
    let n = cfg.n_list[0];
    let core = scheme.to_core(n)?;
    let ctx = SchemeContext::new(&core)?;
    let seed = SeedSpec::new(cfg.master_seed)
        .with_experiment(experiment_ids::SIMULATE + n as u64)
        .with_trajectory(0);
    let (_, rows) = ctx.run_recorded(seed);
    let mut out = String::from(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    for (step, (norm, e0, exploded)) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            step,
            fmt(*norm),
            fmt(*e0),
            u8::from(*exploded)
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// bounds: divergence lower bound with constant audit columns
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub m: usize,
    pub r: f64,
    pub log_lower_bound: f64,
    pub kappa: f64,
    pub vartheta: f64,
    pub rho: f64,
    pub theta: f64,
    pub c_small: f64,
    pub gamma: f64,
    pub y: f64,
    pub log_z: f64,
    pub log_g: f64,
    pub zeta_chi: f64,
    pub zeta_nu_s: f64,
    pub embedding_constant: f64,
    pub op_norm_neg_s: f64,
    pub p_exponent: f64,
    pub s_exponent: f64,
}

pub const BOUNDS_CSV_HEADER: &str = "M,r,log_lower_bound,kappa,vartheta,rho,theta,c,gamma,y,\
log_z,log_g,zeta_chi,zeta_nu_s,embedding_constant,op_norm_neg_s,p_exponent,s_exponent";

pub fn bounds_rows_csv(rows: &[BoundsRow]) -> String {
    let mut out = String::from(BOUNDS_CSV_HEADER);
    out.push('\n');
    for b in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            b.m,
            fmt(b.r),
            fmt(b.log_lower_bound),
            fmt(b.kappa),
            fmt(b.vartheta),
            fmt(b.rho),
            fmt(b.theta),
            fmt(b.c_small),
            fmt(b.gamma),
            fmt(b.y),
            fmt(b.log_z),
            fmt(b.log_g),
            fmt(b.zeta_chi),
            fmt(b.zeta_nu_s),
            fmt(b.embedding_constant),
            fmt(b.op_norm_neg_s),
            fmt(b.p_exponent),
            fmt(b.s_exponent),
        ));
    }
    out
}

pub fn bounds_rows(cfg: &ExperimentConfig) -> Result<(DivergenceConstants, Vec<BoundsRow>)> {
    let scheme = cfg.scheme()?;
    // constants do not depend on the per-run N; any valid steps value works
    let core = scheme.to_core(cfg.n_list[0])?;
    let opts: ConstantsOptions = cfg
        .bounds
        .clone()
        .unwrap_or_default()
        .to_options();
    let consts = compute_constants_with(&core, &opts)?;
    let mut rows = Vec::new();
    for &m in &cfg.n_list {
        for &r in &cfg.r_list {
            rows.push(BoundsRow {
                m,
                r,
                log_lower_bound: divergence_lower_bound(&consts, m, r)?,
                kappa: consts.kappa,
                vartheta: consts.vartheta,
                rho: consts.rho(m, r),
                theta: consts.theta(m, r),
                c_small: consts.c_small(m, r),
                gamma: consts.gamma(m),
                y: consts.y(m),
                log_z: consts.ln_z(m, r),
                log_g: consts.ln_g(m, r),
                zeta_chi: consts.zeta_chi,
                zeta_nu_s: consts.zeta_nu_s,
                embedding_constant: consts.c_embed,
                op_norm_neg_s: consts.op_norm_neg_s,
                p_exponent: consts.p_exponent,
                s_exponent: consts.s_exponent,
            });
        }
    }
    Ok((consts, rows))
}

// ---------------------------------------------------------------------
// validate-ou
// ---------------------------------------------------------------------

pub const OU_CSV_HEADER: &str = "mode,empirical_variance,analytic_variance,standard_error,within_3se";

pub fn ou_rows(cfg: &ExperimentConfig) -> Result<Vec<ModeVarianceRow>> {
    let scheme = cfg.scheme()?;
    let n = cfg.n_list[0];
    let core = scheme.to_core(n)?;
    let seed =
        SeedSpec::new(cfg.master_seed).with_experiment(experiment_ids::VALIDATE_OU + n as u64);
    Ok(ou_mode_variances(&core, cfg.n_samples, seed)?)
}

pub fn ou_rows_csv(rows: &[ModeVarianceRow]) -> String {
    let mut out = String::from(OU_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let ok = (r.empirical - r.analytic).abs() <= 3.0 * r.std_error;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.mode,
            fmt(r.empirical),
            fmt(r.analytic),
            fmt(r.std_error),
            u8::from(ok)
        ));
    }
    out
}

// ---------------------------------------------------------------------
// validate-gaussian-bounds: the three bound families against references
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GaussRow {
    /// `interval`, `ball`, or `smoothed`.
    pub family: &'static str,
    /// Semigroup kind for the smoothed family; empty otherwise.
    pub semigroup: &'static str,
    pub nu: f64,
    pub s: f64,
    pub n: usize,
    pub t: f64,
    /// Interval center `c`, or 0 for the ball families.
    pub c: f64,
    /// Interval half-width `ε` or ball radius `x`.
    pub x: f64,
    /// Which `v` the ball is centered at: `0`, `e0`, or `e1`.
    pub v_label: &'static str,
    pub log_bound: f64,
    /// ln of the reference: exact erf probability (interval) or the Monte
    /// Carlo estimate (ball families; `-inf` when no draw hit).
    pub log_reference: f64,
    /// Binomial standard error of the MC estimate; 0 for the exact family.
    pub mc_se: f64,
    /// reference (+3·se for MC) dominates exp(log_bound)
    pub ok: bool,
}

pub const GAUSS_CSV_HEADER: &str =
    "family,semigroup,nu,s,N,T,c,x,v,log_bound,log_reference,mc_se,ok";

pub fn gauss_rows_csv(rows: &[GaussRow]) -> String {
    let mut out = String::from(GAUSS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.family,
            r.semigroup,
            fmt(r.nu),
            fmt(r.s),
            r.n,
            fmt(r.t),
            fmt(r.c),
            fmt(r.x),
            r.v_label,
            fmt(r.log_bound),
            fmt(r.log_reference),
            fmt(r.mc_se),
            u8::from(r.ok)
        ));
    }
    out
}

/// ln P(Y ∈ [c-ε, c+ε]) for `Y ~ N(0, sd²)`, via `erfc` so that far-tail
/// intervals do not cancel to zero.
fn ln_gaussian_interval_prob(c: f64, eps: f64, sd: f64) -> f64 {
    let z_lo = (c - eps) / (sd * std::f64::consts::SQRT_2);
    let z_hi = (c + eps) / (sd * std::f64::consts::SQRT_2);
    let p = 0.5 * (erfc(z_lo) - erfc(z_hi));
    p.ln()
}

/// 200-point grid for the interval-bound validity check: the full
/// `5c × 5ε × 8N × 3T` lattice thinned by a factor of three.
pub fn interval_grid() -> Vec<(f64, f64, u32, f64)> {
    let cs = [0.0, 1.25, 2.5, 3.75, 5.0];
    let epss = [0.01, 0.047287, 0.223607, 1.057371, 5.0];
    let ts = [0.5, 1.0, 2.0];
    let mut grid = Vec::new();
    let mut idx = 0usize;
    for &c in &cs {
        for &eps in &epss {
            for n in 1..=8u32 {
                for &t in &ts {
                    if idx % 3 == 0 {
                        grid.push((c, eps, n, t));
                    }
                    idx += 1;
                }
            }
        }
    }
    grid
}

/// Interval bound vs exact Gaussian probability on the 200-point grid.
pub fn interval_grid_rows() -> Vec<GaussRow> {
    interval_grid()
        .into_iter()
        .map(|(c, eps, n, t)| {
            let log_bound = gaussian_interval_bound(c, eps, t, n).expect("valid grid entry");
            let sd = (t / n as f64).sqrt();
            let log_exact = ln_gaussian_interval_prob(c, eps, sd);
            GaussRow {
                family: "interval",
                semigroup: "",
                nu: f64::NAN,
                s: f64::NAN,
                n: n as usize,
                t,
                c,
                x: eps,
                v_label: "",
                log_bound,
                log_reference: log_exact,
                mc_se: 0.0,
                ok: log_bound.is_finite() && log_exact >= log_bound,
            }
        })
        .collect()
}

const BALL_NUS: [f64; 3] = [0.3, 0.5, 0.7];
const BALL_XS: [f64; 3] = [0.5, 1.0, 2.0];
const V_LABELS: [&str; 3] = ["0", "e0", "e1"];

fn ball_center(label: &str, cutoff: usize) -> SpectralState {
    match label {
        "0" => SpectralState::zeros(cutoff),
        "e0" => SpectralState::basis(cutoff, 0, 1.0),
        "e1" => SpectralState::basis(cutoff, 1, 1.0),
        _ => unreachable!(),
    }
}

/// Projected-noise ball bound vs Monte Carlo on the
/// `N ∈ {1,2,3} × ν × x × v` grid (`T = 1`, `η = 1`, 1e5 draws per cell).
pub fn ball_grid_rows(master_seed: u64, n_draws: usize) -> Vec<GaussRow> {
    let t = 1.0;
    let eta = 1.0;
    let mut cells = Vec::new();
    for n in 1..=3usize {
        for &nu in &BALL_NUS {
            for &x in &BALL_XS {
                for v_label in V_LABELS {
                    cells.push((n, nu, x, v_label));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .enumerate()
        .map(|(cell_idx, (n, nu, x, v_label))| {
            let v = ball_center(v_label, n);
            let v_norm = v.l2_norm();
            let log_bound =
                projected_noise_ball_bound(v_norm * v_norm, x, n, t, eta, nu).expect("valid cell");
            let dt = t / n as f64;
            let weights: Vec<f64> = (-(n as i64)..=n as i64)
                .map(|m| eigenvalue(m, eta).powf(-2.0 * nu))
                .collect();
            let seed = SeedSpec::new(master_seed)
                .with_experiment(experiment_ids::GAUSS_BALL)
                .with_trajectory(cell_idx as u64);
            let mut hits = 0usize;
            for draw in 0..n_draws {
                let inc = sample_increment(&seed.with_step(draw as u64), n, dt);
                let sum: f64 = weights
                    .iter()
                    .zip(inc.coeffs.iter().zip(v.coeffs()))
                    .map(|(w, (wn, vn))| {
                        let d = vn - wn;
                        w * d * d
                    })
                    .sum();
                if sum <= x * x {
                    hits += 1;
                }
            }
            let p_hat = hits as f64 / n_draws as f64;
            let mc_se = (p_hat * (1.0 - p_hat) / n_draws as f64).sqrt();
            GaussRow {
                family: "ball",
                semigroup: "",
                nu,
                s: f64::NAN,
                n,
                t,
                c: 0.0,
                x,
                v_label,
                log_bound,
                log_reference: p_hat.ln(),
                mc_se,
                ok: p_hat + 3.0 * mc_se >= log_bound.exp(),
            }
        })
        .collect()
}

/// Smoothed ball bound vs Monte Carlo with grid-based `L^p` norms on the
/// `N ∈ {1,2} × kind × ν × x × v` grid (`q = 3`, `p = 2q`,
/// `s = min(1/2, 1-ν)`, 1e5 draws per cell).
pub fn smoothed_grid_rows(master_seed: u64, n_draws: usize) -> Vec<GaussRow> {
    let t = 1.0;
    let p = 6.0;
    let kinds = [
        (SemigroupKind::ExponentialEuler, "exponential"),
        (SemigroupKind::LinearImplicitEuler, "linear-implicit"),
    ];
    // one constant pack per (ν, kind); the pack's op-norm estimate feeds
    // the substituted radius
    let mut cells = Vec::new();
    for &(kind, kind_name) in &kinds {
        for &nu in &BALL_NUS {
            for n in 1..=2usize {
                for &x in &BALL_XS {
                    for v_label in V_LABELS {
                        cells.push((kind, kind_name, nu, n, x, v_label));
                    }
                }
            }
        }
    }
    let packs: Vec<((SemigroupKind, u64), DivergenceConstants)> = kinds
        .iter()
        .flat_map(|&(kind, _)| BALL_NUS.iter().map(move |&nu| (kind, nu)))
        .map(|(kind, nu)| {
            let cfg = SchemeConfig {
                nu,
                semigroup: kind,
                ..SchemeConfig::allen_cahn(4)
            };
            let opts = ConstantsOptions {
                p_exponent: Some(p),
                s_exponent: Some(0.5f64.min(1.0 - nu)),
                ..Default::default()
            };
            (
                (kind, nu.to_bits()),
                compute_constants_with(&cfg, &opts).expect("valid pack"),
            )
        })
        .collect();
    let pack_for = |kind: SemigroupKind, nu: f64| -> &DivergenceConstants {
        packs
            .iter()
            .find(|((k, nb), _)| *k == kind && *nb == nu.to_bits())
            .map(|(_, c)| c)
            .expect("pack exists")
    };

    cells
        .into_par_iter()
        .enumerate()
        .map(|(cell_idx, (kind, kind_name, nu, n, x, v_label))| {
            let consts = pack_for(kind, nu);
            let s = consts.s_exponent;
            let v = ball_center(v_label, n);
            let log_bound = smoothed_ball_bound(&v, x, consts, n, kind).expect("valid cell");

            let dt = t / n as f64;
            let sig: Vec<f64> = (-(n as i64)..=n as i64)
                .map(|m| semigroup_multiplier(kind, m, dt))
                .collect();
            // grid fine enough that the integral of |u|^6 is exact
            let grid = spde_lab_core::spectral::next_smooth(6 * n + 1);
            let transform = TrigTransform::new(n, grid).expect("grid above limit");
            let seed = SeedSpec::new(master_seed)
                .with_experiment(experiment_ids::GAUSS_SMOOTHED)
                .with_trajectory(cell_idx as u64);
            let mut diff = vec![0.0; 2 * n + 1];
            let mut values = vec![0.0; grid];
            let mut hits = 0usize;
            let x_pow = x.powf(p);
            for draw in 0..n_draws {
                let inc = sample_increment(&seed.with_step(draw as u64), n, dt);
                for (d, ((vn, wn), sg)) in diff
                    .iter_mut()
                    .zip(v.coeffs().iter().zip(inc.coeffs.iter()).zip(sig.iter()))
                {
                    *d = sg * (vn - wn);
                }
                transform.to_grid_into(&diff, &mut values);
                let mean_p =
                    values.iter().map(|u| u.abs().powf(p)).sum::<f64>() / grid as f64;
                if mean_p <= x_pow {
                    hits += 1;
                }
            }
            let p_hat = hits as f64 / n_draws as f64;
            let mc_se = (p_hat * (1.0 - p_hat) / n_draws as f64).sqrt();
            GaussRow {
                family: "smoothed",
                semigroup: kind_name,
                nu,
                s,
                n,
                t,
                c: 0.0,
                x,
                v_label,
                log_bound,
                log_reference: p_hat.ln(),
                mc_se,
                ok: p_hat + 3.0 * mc_se >= log_bound.exp(),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------
// validate-abstract-bound: 1-D cubic-drift toy
// ---------------------------------------------------------------------

/// Fixed parameters of the toy check: `Φ(y,z) = y + Δt(y - y³) + z`,
/// `V = |·|²`, `N = 2`, `Δt = 1/4`, `z ~ N(0, Δt)`.
pub struct AbstractToy {
    pub setup: AbstractSetup<f64, f64>,
    pub dt: f64,
    pub y0: f64,
}

impl AbstractToy {
    /// `c = 1`, `α = 6/5`, `θ = 9`, `Y_0 = 7/2`: the infimum regions then
    /// sit where the transition probabilities are estimable by plain Monte
    /// Carlo (the drift has no zero crossing above the region boundary).
    pub fn new() -> Self {
        let dt = 0.25;
        let setup = AbstractSetup::new(
            move |y: &f64, z: &f64| y + dt * (y - y * y * y) + z,
            |y: &f64| y * y,
            1.0,
            1.2,
            9.0,
            2,
        )
        .expect("valid toy constants");
        Self {
            setup,
            dt,
            y0: 3.5,
        }
    }
}

impl Default for AbstractToy {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
pub struct AbstractBoundReport {
    /// Grid-search lower estimates of the two transition infima.
    pub p_lower: [f64; 2],
    pub p_init: f64,
    pub log_bound: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub ok: bool,
}

pub const ABSTRACT_CSV_HEADER: &str = "horizon,c,alpha,theta,p1,p2,p_init,log_bound,mc_mean,mc_se,ok";

pub fn abstract_report_csv(r: &AbstractBoundReport) -> String {
    let toy = AbstractToy::new();
    format!(
        "{}\n{},{},{},{},{},{},{},{},{},{},{}\n",
        ABSTRACT_CSV_HEADER,
        toy.setup.horizon,
        fmt(toy.setup.c),
        fmt(toy.setup.alpha),
        fmt(toy.setup.theta),
        fmt(r.p_lower[0]),
        fmt(r.p_lower[1]),
        fmt(r.p_init),
        fmt(r.log_bound),
        fmt(r.mc_mean),
        fmt(r.mc_se),
        u8::from(r.ok)
    )
}

/// Estimate the step-`n` transition infimum by a dense grid over the
/// region `{V(v) ≥ θ^{α^{n-1}}}` with Monte Carlo at every grid point.
/// `Φ(-v, -z) = -Φ(v, z)` and the noise is symmetric, so the positive
/// half-line suffices.
fn transition_infimum(
    toy: &AbstractToy,
    region_lo: f64,
    master_seed: u64,
    stream: u64,
    draws_per_point: usize,
) -> f64 {
    // dense near the boundary (where the infimum sits), coarse far out
    let mut points: Vec<f64> = (0..200)
        .map(|i| region_lo + 0.02 * i as f64)
        .collect();
    points.extend((1..40).map(|i| region_lo + 4.0 + 0.5 * i as f64));
    points
        .into_par_iter()
        .enumerate()
        .map(|(idx, v)| {
            let seed = SeedSpec::new(master_seed)
                .with_experiment(experiment_ids::ABSTRACT_BOUND + stream)
                .with_trajectory(idx as u64);
            let zs = standard_normals(&seed, draws_per_point);
            let sd = toy.dt.sqrt();
            let threshold = (toy.setup.c * (v * v).powf(toy.setup.alpha)).sqrt();
            let hits = zs
                .iter()
                .filter(|&&z| {
                    let phi = (toy.setup.transition)(&v, &(sd * z));
                    phi.abs() >= threshold
                })
                .count();
            hits as f64 / draws_per_point as f64
        })
        .reduce(|| 1.0f64, f64::min)
}

/// Run the full toy check: grid-search infima, the product bound, and a
/// Monte Carlo estimate of `E[V(Y_2)]` over `n_paths` paths.
pub fn abstract_bound_report(master_seed: u64, n_paths: usize) -> Result<AbstractBoundReport> {
    let toy = AbstractToy::new();
    let setup = &toy.setup;

    let p1 = transition_infimum(&toy, setup.region_threshold(1).sqrt(), master_seed, 1, 20_000);
    let p2 = transition_infimum(&toy, setup.region_threshold(2).sqrt(), master_seed, 2, 20_000);
    let p_init = if toy.y0 * toy.y0 >= setup.initial_threshold() {
        1.0
    } else {
        0.0
    };
    let log_bound = abstract_product_bound(setup, &[p1, p2], p_init)?;

    let values: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let seed = SeedSpec::new(master_seed)
                .with_experiment(experiment_ids::ABSTRACT_BOUND)
                .with_trajectory(i as u64);
            let zs = standard_normals(&seed, setup.horizon);
            let sd = toy.dt.sqrt();
            let mut y = toy.y0;
            for z in zs {
                y = (setup.transition)(&y, &(sd * z));
            }
            (setup.lyapunov)(&y)
        })
        .collect();
    let n = values.len() as f64;
    let mc_mean = values.iter().sum::<f64>() / n;
    let var = values
        .iter()
        .map(|v| (v - mc_mean) * (v - mc_mean))
        .sum::<f64>()
        / (n - 1.0);
    let mc_se = (var / n).sqrt();
    Ok(AbstractBoundReport {
        p_lower: [p1, p2],
        p_init,
        log_bound,
        mc_mean,
        mc_se,
        ok: mc_mean >= log_bound.exp() - 3.0 * mc_se,
    })
}
