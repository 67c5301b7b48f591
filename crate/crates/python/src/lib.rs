//! Python bindings: spectral states, the full-discrete schemes, Monte
//! Carlo moment estimation, and the log-space lower bounds.
//!
//! Build with `cargo build --release -p spde-lab-python`; the smoke test
//! in `python/smoke_test.py` locates the resulting `libspde_lab.so` and
//! imports it as `spde_lab`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use spde_lab_core::bounds;
use spde_lab_core::montecarlo;
use spde_lab_core::noise;
use spde_lab_core::schemes;
use spde_lab_core::spectral;
use spde_lab_core::spectral::SemigroupKind;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_semigroup(kind: &str) -> PyResult<SemigroupKind> {
    match kind {
        "exponential" => Ok(SemigroupKind::ExponentialEuler),
        "linear-implicit" => Ok(SemigroupKind::LinearImplicitEuler),
        _ => Err(PyValueError::new_err(format!(
            "unknown semigroup kind '{kind}' (use 'exponential' or 'linear-implicit')"
        ))),
    }
}

fn parse_scheme(kind: &str) -> PyResult<schemes::SchemeKind> {
    match kind {
        "full-discrete" => Ok(schemes::SchemeKind::FullDiscrete),
        "tamed" => Ok(schemes::SchemeKind::Tamed),
        _ => Err(PyValueError::new_err(format!(
            "unknown scheme '{kind}' (use 'full-discrete' or 'tamed')"
        ))),
    }
}

/// A real trigonometric polynomial on (0,1), stored as coefficients on the
/// basis e_0 = 1, e_n = √2·cos(2nπx), e_{-n} = √2·sin(2nπx).
#[pyclass(name = "SpectralState")]
#[derive(Clone)]
struct PySpectralState {
    inner: spectral::SpectralState,
}

#[pymethods]
impl PySpectralState {
    /// Build from the flat coefficient list c_{-N}..c_N (odd length).
    #[new]
    fn new(coeffs: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: spectral::SpectralState::from_coeffs(coeffs).map_err(err)?,
        })
    }

    #[staticmethod]
    fn zeros(cutoff: usize) -> Self {
        Self {
            inner: spectral::SpectralState::zeros(cutoff),
        }
    }

    #[staticmethod]
    fn basis(cutoff: usize, n: i64, value: f64) -> Self {
        Self {
            inner: spectral::SpectralState::basis(cutoff, n, value),
        }
    }

    #[getter]
    fn cutoff(&self) -> usize {
        self.inner.cutoff()
    }

    #[getter]
    fn exploded(&self) -> bool {
        self.inner.is_exploded()
    }

    fn coeff(&self, n: i64) -> f64 {
        self.inner.coeff(n)
    }

    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn sobolev_norm(&self, r: f64, eta: f64) -> f64 {
        spectral::sobolev_norm(&self.inner, r, eta)
    }

    fn lp_norm(&self, p: f64) -> f64 {
        spectral::lp_norm(&self.inner, p)
    }

    fn to_csv_row(&self) -> String {
        self.inner.to_csv_row()
    }

    #[staticmethod]
    fn from_csv_row(row: &str) -> PyResult<Self> {
        Ok(Self {
            inner: spectral::SpectralState::from_csv_row(row).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectralState(cutoff={}, l2_norm={:.6e})",
            self.inner.cutoff(),
            self.inner.l2_norm()
        )
    }
}

/// Label tuple keying one reproducible noise stream.
#[pyclass(name = "SeedSpec")]
#[derive(Clone)]
struct PySeedSpec {
    inner: noise::SeedSpec,
}

#[pymethods]
impl PySeedSpec {
    #[new]
    #[pyo3(signature = (master_seed, experiment_id = 0, trajectory = 0, step = 0))]
    fn new(master_seed: u64, experiment_id: u64, trajectory: u64, step: u64) -> Self {
        Self {
            inner: noise::SeedSpec {
                master_seed,
                experiment_id,
                trajectory,
                step,
            },
        }
    }

    fn with_experiment(&self, experiment_id: u64) -> Self {
        Self {
            inner: self.inner.with_experiment(experiment_id),
        }
    }

    fn with_trajectory(&self, trajectory: u64) -> Self {
        Self {
            inner: self.inner.with_trajectory(trajectory),
        }
    }

    fn with_step(&self, step: u64) -> Self {
        Self {
            inner: self.inner.with_step(step),
        }
    }
}

/// Full problem description for the full-discrete SPDE schemes.
#[pyclass(name = "SchemeConfig")]
#[derive(Clone)]
struct PySchemeConfig {
    inner: schemes::SchemeConfig,
}

#[pymethods]
impl PySchemeConfig {
    #[new]
    #[pyo3(signature = (t_final, steps, a, nu = 0.5, chi = 0.5, eta = 1.0,
                        xi = None, semigroup = "exponential",
                        scheme = "full-discrete", noise_scale = 1.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        t_final: f64,
        steps: usize,
        a: Vec<f64>,
        nu: f64,
        chi: f64,
        eta: f64,
        xi: Option<PySpectralState>,
        semigroup: &str,
        scheme: &str,
        noise_scale: f64,
    ) -> PyResult<Self> {
        let cfg = schemes::SchemeConfig {
            t_final,
            steps,
            a,
            nu,
            chi,
            eta,
            xi: xi.map_or_else(|| spectral::SpectralState::zeros(0), |s| s.inner),
            semigroup: parse_semigroup(semigroup)?,
            scheme: parse_scheme(scheme)?,
            noise_scale,
        };
        cfg.validate().map_err(err)?;
        Ok(Self { inner: cfg })
    }

    /// Double-well defaults: T = 1, a = (0, 1, 0, -1), ν = χ = 1/2, η = 1,
    /// ξ = 0, exponential semigroup.
    #[staticmethod]
    fn allen_cahn(steps: usize) -> Self {
        Self {
            inner: schemes::SchemeConfig::allen_cahn(steps),
        }
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }
}

/// Overflow-aware Monte Carlo moment statistic.
#[pyclass(name = "MomentEstimate")]
struct PyMomentEstimate {
    #[pyo3(get)]
    p: f64,
    #[pyo3(get)]
    samples: usize,
    #[pyo3(get)]
    finite_samples: usize,
    #[pyo3(get)]
    explosion_fraction: f64,
    #[pyo3(get)]
    log_mean_finite: f64,
    #[pyo3(get)]
    log_saturated_mean: f64,
    #[pyo3(get)]
    saturated_mean: f64,
    #[pyo3(get)]
    std_error_log: f64,
}

impl From<montecarlo::MomentEstimate> for PyMomentEstimate {
    fn from(e: montecarlo::MomentEstimate) -> Self {
        Self {
            p: e.p,
            samples: e.samples,
            finite_samples: e.finite_samples,
            explosion_fraction: e.explosion_fraction,
            log_mean_finite: e.log_mean_finite,
            log_saturated_mean: e.log_saturated_mean,
            saturated_mean: e.saturated_mean,
            std_error_log: e.std_error_log,
        }
    }
}

/// The divergence-bound constant pack.
#[pyclass(name = "DivergenceConstants")]
struct PyDivergenceConstants {
    inner: bounds::DivergenceConstants,
}

#[pymethods]
impl PyDivergenceConstants {
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn vartheta(&self) -> f64 {
        self.inner.vartheta
    }

    #[getter]
    fn embedding_constant(&self) -> f64 {
        self.inner.c_embed
    }

    #[getter]
    fn op_norm_neg_s(&self) -> f64 {
        self.inner.op_norm_neg_s
    }

    #[getter]
    fn p_exponent(&self) -> f64 {
        self.inner.p_exponent
    }

    #[getter]
    fn s_exponent(&self) -> f64 {
        self.inner.s_exponent
    }

    fn c_small(&self, n: usize, r: f64) -> f64 {
        self.inner.c_small(n, r)
    }

    fn theta(&self, n: usize, r: f64) -> f64 {
        self.inner.theta(n, r)
    }

    fn rho(&self, n: usize, r: f64) -> f64 {
        self.inner.rho(n, r)
    }

    fn gamma(&self, n: usize) -> f64 {
        self.inner.gamma(n)
    }

    fn y(&self, n: usize) -> f64 {
        self.inner.y(n)
    }

    fn ln_z(&self, n: usize, r: f64) -> f64 {
        self.inner.ln_z(n, r)
    }

    fn ln_g(&self, n: usize, r: f64) -> f64 {
        self.inner.ln_g(n, r)
    }
}

/// Eigenvalue of η - A on e_n: η + 4π²n².
#[pyfunction]
fn eigenvalue(n: i64, eta: f64) -> f64 {
    spectral::eigenvalue(n, eta)
}

/// Per-mode semigroup application with step size dt.
#[pyfunction]
fn apply_semigroup(v: &PySpectralState, kind: &str, dt: f64) -> PyResult<PySpectralState> {
    let params = spectral::OperatorParams::new(1.0, 1.0, parse_semigroup(kind)?).map_err(err)?;
    Ok(PySpectralState {
        inner: spectral::apply_semigroup(&v.inner, &params, dt),
    })
}

/// Galerkin projection to modes |n| <= m.
#[pyfunction]
fn project(v: &PySpectralState, m: usize) -> PySpectralState {
    PySpectralState {
        inner: spectral::project(&v.inner, m),
    }
}

/// Values of v at the M uniform grid points j/M.
#[pyfunction]
fn to_grid(v: &PySpectralState, m: usize) -> PyResult<Vec<f64>> {
    Ok(spectral::to_grid(&v.inner, m).map_err(err)?.values)
}

/// Spectral coefficients of a sampled trig polynomial.
#[pyfunction]
fn from_grid(values: Vec<f64>, n: usize) -> PyResult<PySpectralState> {
    let m = values.len();
    let g = spectral::GridState {
        grid_size: m,
        values,
    };
    Ok(PySpectralState {
        inner: spectral::from_grid(&g, n).map_err(err)?,
    })
}

/// Dealiased coefficients of the pointwise polynomial Σ a_k v^k, truncated
/// to modes |n| <= n_out.
#[pyfunction]
fn poly_eval_projected(v: &PySpectralState, a: Vec<f64>, n_out: usize) -> PyResult<PySpectralState> {
    Ok(PySpectralState {
        inner: spectral::poly_eval_projected(&v.inner, &a, n_out).map_err(err)?,
    })
}

/// One projected Wiener increment: 2N+1 draws of N(0, dt) as a state.
#[pyfunction]
fn sample_increment(seed: &PySeedSpec, n: usize, dt: f64) -> PySpectralState {
    let inc = noise::sample_increment(&seed.inner, n, dt);
    PySpectralState {
        inner: spectral::SpectralState::from_coeffs(inc.coeffs).expect("odd length"),
    }
}

/// Run one trajectory; returns (final_state, exploded_at_or_None).
#[pyfunction]
fn run_trajectory(
    cfg: &PySchemeConfig,
    seed: &PySeedSpec,
) -> PyResult<(PySpectralState, Option<usize>)> {
    let r = schemes::run_trajectory(&cfg.inner, seed.inner).map_err(err)?;
    Ok((
        PySpectralState {
            inner: r.final_state,
        },
        r.exploded_at,
    ))
}

/// Monte Carlo estimate of E[||Y_N||^p] with explosion accounting.
#[pyfunction]
fn estimate_moment(
    cfg: &PySchemeConfig,
    p: f64,
    n_samples: usize,
    seed: &PySeedSpec,
) -> PyResult<PyMomentEstimate> {
    Ok(montecarlo::estimate_moment(&cfg.inner, p, n_samples, seed.inner)
        .map_err(err)?
        .into())
}

/// ln of the reverse-Gronwall lower bound.
#[pyfunction]
fn reverse_gronwall(c: f64, alpha: f64, e0: f64, n: u32) -> PyResult<f64> {
    bounds::reverse_gronwall(c, alpha, e0, n).map_err(err)
}

/// ln of the Gaussian interval bound for Y ~ N(0, T/N).
#[pyfunction]
fn gaussian_interval_bound(c: f64, eps: f64, t: f64, n: u32) -> PyResult<f64> {
    bounds::gaussian_interval_bound(c, eps, t, n).map_err(err)
}

/// ln of the projected-noise ball bound.
#[pyfunction]
fn projected_noise_ball_bound(
    v_norm_sq: f64,
    x: f64,
    n: usize,
    t: f64,
    eta: f64,
    nu: f64,
) -> PyResult<f64> {
    bounds::projected_noise_ball_bound(v_norm_sq, x, n, t, eta, nu).map_err(err)
}

/// ln of the smoothed ball bound for the given semigroup kind.
#[pyfunction]
fn smoothed_ball_bound(
    v: &PySpectralState,
    x: f64,
    consts: &PyDivergenceConstants,
    n: usize,
    kind: &str,
) -> PyResult<f64> {
    bounds::smoothed_ball_bound(&v.inner, x, &consts.inner, n, parse_semigroup(kind)?)
        .map_err(err)
}

/// Evaluate the divergence constant pack for a scheme configuration.
#[pyfunction]
#[pyo3(signature = (cfg, embedding_constant = None, p_exponent = None,
                    s_exponent = None, op_norm_neg_s = None))]
fn compute_constants(
    cfg: &PySchemeConfig,
    embedding_constant: Option<f64>,
    p_exponent: Option<f64>,
    s_exponent: Option<f64>,
    op_norm_neg_s: Option<f64>,
) -> PyResult<PyDivergenceConstants> {
    let opts = bounds::ConstantsOptions {
        embedding_constant,
        p_exponent,
        s_exponent,
        op_norm_neg_s,
    };
    Ok(PyDivergenceConstants {
        inner: bounds::compute_constants_with(&cfg.inner, &opts).map_err(err)?,
    })
}

/// ln of the assembled divergence lower bound at horizon m, exponent r.
#[pyfunction]
fn divergence_lower_bound(consts: &PyDivergenceConstants, m: usize, r: f64) -> PyResult<f64> {
    bounds::divergence_lower_bound(&consts.inner, m, r).map_err(err)
}

/// Smoothing constant ζ_r for a semigroup kind.
#[pyfunction]
fn zeta_smoothing(kind: &str, r: f64, eta: f64, t: f64) -> PyResult<f64> {
    bounds::zeta_smoothing(parse_semigroup(kind)?, r, eta, t).map_err(err)
}

#[pymodule]
fn spde_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectralState>()?;
    m.add_class::<PySeedSpec>()?;
    m.add_class::<PySchemeConfig>()?;
    m.add_class::<PyMomentEstimate>()?;
    m.add_class::<PyDivergenceConstants>()?;
    m.add_function(wrap_pyfunction!(eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(apply_semigroup, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(to_grid, m)?)?;
    m.add_function(wrap_pyfunction!(from_grid, m)?)?;
    m.add_function(wrap_pyfunction!(poly_eval_projected, m)?)?;
    m.add_function(wrap_pyfunction!(sample_increment, m)?)?;
    m.add_function(wrap_pyfunction!(run_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_moment, m)?)?;
    m.add_function(wrap_pyfunction!(reverse_gronwall, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_interval_bound, m)?)?;
    m.add_function(wrap_pyfunction!(projected_noise_ball_bound, m)?)?;
    m.add_function(wrap_pyfunction!(smoothed_ball_bound, m)?)?;
    m.add_function(wrap_pyfunction!(compute_constants, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_smoothing, m)?)?;
    Ok(())
}
