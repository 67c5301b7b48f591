//! Fourier basis arithmetic on the unit interval with periodic boundary
//! conditions.
//!
//! States are real trigonometric polynomials expanded in the L²(0,1)
//! orthonormal basis
//!
//! ```text
//! e_0(x) = 1,   e_n(x) = √2 cos(2nπx),   e_{-n}(x) = √2 sin(2nπx),   n ≥ 1,
//! ```
//!
//! stored as the coefficient vector `(c_{-N}, …, c_N)` (flat index
//! `n + N`). The negative Laplacian acts diagonally on this basis with
//! eigenvalues `4π²n²`, so semigroup application, Sobolev norms and
//! Galerkin projection are all per-mode operations. The only non-diagonal
//! operation is the pointwise polynomial nonlinearity, which is evaluated
//! exactly (no aliasing error) by transforming to a sufficiently fine
//! physical grid and back.

use crate::error::{Error, Result};

/// Overflow guard: a state whose L² norm exceeds this value is treated as
/// exploded before its polynomial powers can wrap to ±∞ in `f64`.
pub const EXPLOSION_GUARD: f64 = 1e150;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Which discrete semigroup `S_N` the scheme applies each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemigroupKind {
    /// `S = e^{dt·A}`: per-mode multiplier `exp(-4π²n²·dt)`.
    ExponentialEuler,
    /// `S = (I - dt·A)^{-1}`: per-mode multiplier `1/(1 + 4π²n²·dt)`.
    LinearImplicitEuler,
}

/// Spectral shift and time horizon shared by the interpolation-space
/// machinery (`η - A`) and the semigroup normalization.
#[derive(Debug, Clone, Copy)]
pub struct OperatorParams {
    pub eta: f64,
    pub t_final: f64,
    pub kind: SemigroupKind,
}

impl OperatorParams {
    pub fn new(eta: f64, t_final: f64, kind: SemigroupKind) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidConfig(format!("eta must be > 0, got {eta}")));
        }
        if !(t_final > 0.0) {
            return Err(Error::InvalidConfig(format!("T must be > 0, got {t_final}")));
        }
        Ok(Self { eta, t_final, kind })
    }
}

/// A real trigonometric polynomial on (0,1), stored spectrally.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    cutoff: usize,
    coeffs: Vec<f64>,
    exploded: bool,
}

impl SpectralState {
    /// The zero state with modes `-cutoff..=cutoff`.
    pub fn zeros(cutoff: usize) -> Self {
        Self {
            cutoff,
            coeffs: vec![0.0; 2 * cutoff + 1],
            exploded: false,
        }
    }

    /// Build from the flat coefficient vector `(c_{-N}, …, c_N)`.
    /// The length must be odd.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "coefficient vector must have odd length 2N+1, got {}",
                coeffs.len()
            )));
        }
        let cutoff = (coeffs.len() - 1) / 2;
        Ok(Self {
            cutoff,
            coeffs,
            exploded: false,
        })
    }

    /// The basis vector `e_n` (scaled by `value`) represented at `cutoff`.
    pub fn basis(cutoff: usize, n: i64, value: f64) -> Self {
        let mut s = Self::zeros(cutoff);
        s.set_coeff(n, value);
        s
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient on `e_n`; zero outside the stored range.
    pub fn coeff(&self, n: i64) -> f64 {
        let c = self.cutoff as i64;
        if n < -c || n > c {
            0.0
        } else {
            self.coeffs[(n + c) as usize]
        }
    }

    pub fn set_coeff(&mut self, n: i64, value: f64) {
        let c = self.cutoff as i64;
        assert!(
            (-c..=c).contains(&n),
            "mode {n} outside stored range ±{c}"
        );
        self.coeffs[(n + c) as usize] = value;
    }

    /// Whether the state was flagged as exploded by a time stepper.
    pub fn is_exploded(&self) -> bool {
        self.exploded
    }

    pub fn mark_exploded(&mut self) {
        self.exploded = true;
    }

    /// L²(0,1) norm (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Same state represented with a (larger or smaller) cutoff. Shrinking
    /// truncates modes, growing pads with zeros.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let mut out = Self::zeros(cutoff);
        out.exploded = self.exploded;
        let keep = cutoff.min(self.cutoff) as i64;
        for n in -keep..=keep {
            out.set_coeff(n, self.coeff(n));
        }
        out
    }

    /// Serialize as the CSV row `N, c_{-N}, …, c_N` with 17 significant
    /// digits (lossless for `f64`).
    pub fn to_csv_row(&self) -> String {
        let mut row = self.cutoff.to_string();
        for c in &self.coeffs {
            row.push(',');
            row.push_str(&format!("{c:.16e}"));
        }
        row
    }

    /// Parse the CSV row produced by [`Self::to_csv_row`].
    pub fn from_csv_row(row: &str) -> Result<Self> {
        let mut parts = row.split(',').map(str::trim);
        let cutoff: usize = parts
            .next()
            .ok_or_else(|| Error::InvalidConfig("empty CSV row".into()))?
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("bad cutoff field: {e}")))?;
        let coeffs: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("bad coefficient '{p}': {e}")))
            })
            .collect::<Result<_>>()?;
        if coeffs.len() != 2 * cutoff + 1 {
            return Err(Error::InvalidConfig(format!(
                "expected {} coefficients for cutoff {cutoff}, got {}",
                2 * cutoff + 1,
                coeffs.len()
            )));
        }
        Ok(Self {
            cutoff,
            coeffs,
            exploded: false,
        })
    }
}

/// Samples of a trigonometric polynomial at the uniform grid `x_j = j/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub grid_size: usize,
    pub values: Vec<f64>,
}

/// Eigenvalue of `η - A` on `e_n`: `η + 4π²n²`.
pub fn eigenvalue(n: i64, eta: f64) -> f64 {
    let k = n as f64;
    eta + TWO_PI * TWO_PI * k * k
}

/// Interpolation-space norm `‖v‖_{H_r} = (Σ (η+4π²n²)^{2r} c_n²)^{1/2}`.
///
/// `r = 0` is the L² norm; negative `r` is valid because every state is a
/// finite spectral sum.
pub fn sobolev_norm(v: &SpectralState, r: f64, eta: f64) -> f64 {
    let c = v.cutoff() as i64;
    let mut sum = 0.0;
    for n in -c..=c {
        let w = eigenvalue(n, eta).powf(2.0 * r);
        let x = v.coeff(n);
        sum += w * x * x;
    }
    sum.sqrt()
}

/// Per-mode multiplier of the discrete semigroup at step size `dt`.
///
/// Both kinds fix `e_0` (`σ_0 = 1`), lie in `(0, 1]`, and are symmetric in
/// `n`.
pub fn semigroup_multiplier(kind: SemigroupKind, n: i64, dt: f64) -> f64 {
    let k = n as f64;
    let lam = TWO_PI * TWO_PI * k * k * dt;
    match kind {
        SemigroupKind::ExponentialEuler => (-lam).exp(),
        SemigroupKind::LinearImplicitEuler => 1.0 / (1.0 + lam),
    }
}

/// Apply `S` per mode: `c_n ← σ_n c_n`.
pub fn apply_semigroup(v: &SpectralState, params: &OperatorParams, dt: f64) -> SpectralState {
    assert!(dt > 0.0, "dt must be positive");
    let mut out = v.clone();
    let c = v.cutoff() as i64;
    for n in -c..=c {
        out.set_coeff(n, v.coeff(n) * semigroup_multiplier(params.kind, n, dt));
    }
    out
}

/// Galerkin projection `P_M`: zero all modes `|n| > M` and truncate the
/// representation to cutoff `min(M, cutoff)`.
pub fn project(v: &SpectralState, m: usize) -> SpectralState {
    v.with_cutoff(m.min(v.cutoff()))
}

/// Smallest integer `>= n` whose prime factors are all in {2, 3, 5}
/// (transform-friendly grid sizes).
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2usize, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// Precomputed tables for the real trigonometric transform pair between a
/// cutoff-`N` state and an `M`-point uniform grid. Reused across many
/// transforms; the tables are the hot data of the time steppers.
#[derive(Debug, Clone)]
pub struct TrigTransform {
    grid_size: usize,
    cutoff: usize,
    /// Row-major `grid_size × (2·cutoff+1)`: `basis[j][idx] = e_n(j/M)`.
    basis: Vec<f64>,
}

impl TrigTransform {
    pub fn new(cutoff: usize, grid_size: usize) -> Result<Self> {
        let min = 2 * cutoff + 1;
        if grid_size < min {
            return Err(Error::GridTooCoarse {
                grid: grid_size,
                cutoff,
                min,
            });
        }
        let width = 2 * cutoff + 1;
        let mut basis = vec![0.0; grid_size * width];
        for j in 0..grid_size {
            let row = &mut basis[j * width..(j + 1) * width];
            row[cutoff] = 1.0;
            for n in 1..=cutoff {
                // Reduce n·j modulo M before forming the angle; keeps the
                // trig argument small for accuracy on large tables.
                let angle = TWO_PI * ((n * j) % grid_size) as f64 / grid_size as f64;
                let (sin, cos) = angle.sin_cos();
                row[cutoff + n] = std::f64::consts::SQRT_2 * cos;
                row[cutoff - n] = std::f64::consts::SQRT_2 * sin;
            }
        }
        Ok(Self {
            grid_size,
            cutoff,
            basis,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Evaluate the state on the grid: `out[j] = Σ_n c_n e_n(x_j)`.
    pub fn to_grid_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let width = 2 * self.cutoff + 1;
        debug_assert_eq!(coeffs.len(), width);
        debug_assert_eq!(out.len(), self.grid_size);
        for (j, o) in out.iter_mut().enumerate() {
            let row = &self.basis[j * width..(j + 1) * width];
            *o = row.iter().zip(coeffs).map(|(b, c)| b * c).sum();
        }
    }

    /// Coefficients by the `M`-point trapezoidal rule:
    /// `c_n = (1/M) Σ_j v_j e_n(x_j)`, exact for trig polynomials of
    /// max frequency `< M - cutoff`.
    pub fn from_grid_into(&self, values: &[f64], coeffs: &mut [f64]) {
        let width = 2 * self.cutoff + 1;
        debug_assert_eq!(values.len(), self.grid_size);
        debug_assert_eq!(coeffs.len(), width);
        coeffs.fill(0.0);
        for (j, &v) in values.iter().enumerate() {
            let row = &self.basis[j * width..(j + 1) * width];
            for (c, b) in coeffs.iter_mut().zip(row) {
                *c += v * b;
            }
        }
        let scale = 1.0 / self.grid_size as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
    }
}

/// Evaluate `v` at the `M` uniform grid points `x_j = j/M`.
///
/// Rejects `M < 2·cutoff+1`, where sampling would alias silently.
pub fn to_grid(v: &SpectralState, m: usize) -> Result<GridState> {
    let t = TrigTransform::new(v.cutoff(), m)?;
    let mut values = vec![0.0; m];
    t.to_grid_into(v.coeffs(), &mut values);
    Ok(GridState {
        grid_size: m,
        values,
    })
}

/// Recover spectral coefficients of a sampled trig polynomial; exact when
/// the underlying function has max frequency `≤ ⌊(M-1)/2⌋`.
pub fn from_grid(g: &GridState, n: usize) -> Result<SpectralState> {
    let t = TrigTransform::new(n, g.grid_size)?;
    let mut out = SpectralState::zeros(n);
    t.from_grid_into(&g.values, out.coeffs_mut());
    Ok(out)
}

/// Horner evaluation of `Σ a_k x^k`.
pub fn horner(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Scratch buffers for one [`PolyEvaluator`] user; each parallel worker
/// owns its own.
#[derive(Debug, Clone)]
pub struct PolyScratch {
    buf: Vec<Complex<f64>>,
    fft: Vec<Complex<f64>>,
}

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Dealiased evaluation of `P_N(Σ_k a_k v^k)`.
///
/// The quadrature grid has `M = next_smooth((q+1)·n + 1)` points, the
/// smallest transform-friendly size strictly larger than the maximal
/// frequency `(q+1)·n` of the integrands `v^k·e_m`, so the projected
/// coefficients carry no aliasing error. The grid transforms run through a
/// complex FFT (the real basis maps to `u_0 = c_0`,
/// `u_{±n} = (c_n ∓ i·c_{-n})/√2`); plans are built once and shared
/// read-only across time steps and trajectories.
#[derive(Clone)]
pub struct PolyEvaluator {
    cutoff: usize,
    grid_size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PolyEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolyEvaluator")
            .field("cutoff", &self.cutoff)
            .field("grid_size", &self.grid_size)
            .finish()
    }
}

impl PolyEvaluator {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        let m = next_smooth((q.max(1) + 1) * n + 1).max(2 * n + 1);
        let mut planner = FftPlanner::new();
        Ok(Self {
            cutoff: n,
            grid_size: m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn scratch(&self) -> PolyScratch {
        let fft_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        PolyScratch {
            buf: vec![Complex::new(0.0, 0.0); self.grid_size],
            fft: vec![Complex::new(0.0, 0.0); fft_len],
        }
    }

    /// `out ← coefficients of P_N(Σ_k a_k v^k)`.
    pub fn eval_into(&self, coeffs: &[f64], a: &[f64], out: &mut [f64], ws: &mut PolyScratch) {
        let n = self.cutoff;
        let m = self.grid_size;
        debug_assert_eq!(coeffs.len(), 2 * n + 1);
        debug_assert_eq!(out.len(), 2 * n + 1);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

        // pack the complex spectrum u_k, k mod M
        ws.buf.fill(Complex::new(0.0, 0.0));
        ws.buf[0] = Complex::new(coeffs[n], 0.0);
        for k in 1..=n {
            let re = coeffs[n + k] * inv_sqrt2;
            let im = -coeffs[n - k] * inv_sqrt2;
            ws.buf[k] = Complex::new(re, im);
            ws.buf[m - k] = Complex::new(re, -im);
        }
        // grid values v_j = Σ_k u_k e^{2πijk/M}
        self.inverse.process_with_scratch(&mut ws.buf, &mut ws.fft);
        for v in ws.buf.iter_mut() {
            *v = Complex::new(horner(a, v.re), 0.0);
        }
        // quadrature: c-coefficients from the forward transform over M points
        self.forward.process_with_scratch(&mut ws.buf, &mut ws.fft);
        let scale = 1.0 / m as f64;
        let sqrt2 = std::f64::consts::SQRT_2;
        out[n] = ws.buf[0].re * scale;
        for k in 1..=n {
            out[n + k] = sqrt2 * ws.buf[k].re * scale;
            out[n - k] = -sqrt2 * ws.buf[k].im * scale;
        }
    }

    pub fn eval(&self, v: &SpectralState, a: &[f64]) -> SpectralState {
        let mut out = SpectralState::zeros(self.cutoff);
        let mut ws = self.scratch();
        self.eval_into(v.coeffs(), a, out.coeffs_mut(), &mut ws);
        out
    }
}

/// Exact Fourier coefficients of the pointwise polynomial `Σ_k a_k v^k`,
/// truncated to modes `|n| ≤ N`.
///
/// One-shot convenience over [`PolyEvaluator`]; time steppers hold the
/// evaluator instead so the tables are built once.
pub fn poly_eval_projected(v: &SpectralState, a: &[f64], n: usize) -> Result<SpectralState> {
    let v = if v.cutoff() == n {
        v.clone()
    } else {
        v.with_cutoff(n)
    };
    let q = a.len().saturating_sub(1);
    let eval = PolyEvaluator::new(n, q)?;
    Ok(eval.eval(&v, a))
}

/// `‖v‖_{L^p(0,1)}` by quadrature on a uniform grid.
///
/// For even integer `p` the grid is chosen fine enough that the integral of
/// `|v|^p` is exact; for other `p` the quadrature is approximate.
pub fn lp_norm(v: &SpectralState, p: f64) -> f64 {
    let need = (p.ceil().max(2.0) as usize) * v.cutoff() + 1;
    let m = next_smooth(need.max(2 * v.cutoff() + 1));
    let g = to_grid(v, m).expect("grid size chosen above the aliasing limit");
    let mean = g
        .values
        .iter()
        .map(|&x| x.abs().powf(p))
        .sum::<f64>()
        / m as f64;
    mean.powf(1.0 / p)
}
