//! Property tests for the spectral kernel: Parseval, semigroup contraction
//! and symmetry, projection commutation, dealiasing exactness against a
//! symbolic convolution oracle, and the smoothing-constant envelope.

use proptest::prelude::*;
use spde_lab_core::bounds::zeta_smoothing;
use spde_lab_core::montecarlo::logsumexp;
use spde_lab_core::spectral::{
    apply_semigroup, eigenvalue, poly_eval_projected, project, semigroup_multiplier, sobolev_norm,
    to_grid, OperatorParams, SemigroupKind, SpectralState,
};

const KINDS: [SemigroupKind; 2] = [
    SemigroupKind::ExponentialEuler,
    SemigroupKind::LinearImplicitEuler,
];

fn state_strategy(max_cutoff: usize) -> impl Strategy<Value = SpectralState> {
    (0..=max_cutoff)
        .prop_flat_map(|n| prop::collection::vec(-3.0..3.0f64, 2 * n + 1))
        .prop_map(|c| SpectralState::from_coeffs(c).unwrap())
}

// -------------------------------------------------------------------------
// Symbolic convolution oracle for the projected polynomial.
//
// A real trig polynomial maps to complex exponential coefficients
// u_0 = c_0, u_k = (c_k - i·c_{-k})/√2, u_{-k} = conj(u_k); pointwise
// products of functions are convolutions of the u-sequences. The oracle
// convolves coefficient sequences exactly and never touches a grid.
// -------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
struct C(f64, f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn mul(self, o: C) -> C {
        C(
            self.0 * o.0 - self.1 * o.1,
            self.0 * o.1 + self.1 * o.0,
        )
    }
    fn scale(self, s: f64) -> C {
        C(self.0 * s, self.1 * s)
    }
}

/// complex exponential coefficients, flat index k + half
fn to_complex(v: &SpectralState) -> Vec<C> {
    let n = v.cutoff() as i64;
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    (-n..=n)
        .map(|k| {
            if k == 0 {
                C(v.coeff(0), 0.0)
            } else if k > 0 {
                C(v.coeff(k) * inv, -v.coeff(-k) * inv)
            } else {
                C(v.coeff(-k) * inv, v.coeff(k) * inv)
            }
        })
        .collect()
}

fn convolve(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![C(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(x.mul(y));
        }
    }
    out
}

/// coefficients of P_N(Σ a_k v^k) by symbolic convolution
fn poly_oracle(v: &SpectralState, a: &[f64], n_out: usize) -> SpectralState {
    let q = a.len() - 1;
    let width = (q.max(1) * v.cutoff() + n_out) * 2 + 1;
    let half = (width - 1) / 2;
    let mut acc = vec![C(0.0, 0.0); width];
    acc[half] = C(a[0], 0.0);
    let base = to_complex(v);
    let mut power = vec![C(1.0, 0.0)]; // v^0
    for coeff in a.iter().skip(1) {
        power = convolve(&power, &base);
        let offset = half - (power.len() - 1) / 2;
        for (i, &p) in power.iter().enumerate() {
            acc[offset + i] = acc[offset + i].add(p.scale(*coeff));
        }
    }
    // back to the real basis, truncated to |k| <= n_out
    let mut out = SpectralState::zeros(n_out);
    let sqrt2 = std::f64::consts::SQRT_2;
    out.set_coeff(0, acc[half].0);
    for k in 1..=n_out as i64 {
        let u = acc[half + k as usize];
        out.set_coeff(k, sqrt2 * u.0);
        out.set_coeff(-k, -sqrt2 * u.1);
    }
    out
}

proptest! {
    #[test]
    fn parseval_norm_matches_grid_rms(v in state_strategy(8), extra in 0usize..8) {
        let m = 2 * v.cutoff() + 2 + extra;
        let g = to_grid(&v, m).unwrap();
        let rms = (g.values.iter().map(|x| x * x).sum::<f64>() / m as f64).sqrt();
        prop_assert!((rms - sobolev_norm(&v, 0.0, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn semigroup_contracts_l2(v in state_strategy(8), dt in 1e-6..10.0f64) {
        for kind in KINDS {
            let params = OperatorParams::new(1.0, 1.0, kind).unwrap();
            let out = apply_semigroup(&v, &params, dt);
            prop_assert!(out.l2_norm() <= v.l2_norm() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn semigroup_is_self_adjoint(
        v in state_strategy(6),
        w in state_strategy(6),
        dt in 1e-6..10.0f64,
    ) {
        for kind in KINDS {
            // multiplier symmetry makes S self-adjoint mode by mode
            for n in 0..=8i64 {
                prop_assert_eq!(
                    semigroup_multiplier(kind, n, dt),
                    semigroup_multiplier(kind, -n, dt)
                );
            }
            let params = OperatorParams::new(1.0, 1.0, kind).unwrap();
            let cut = v.cutoff().max(w.cutoff());
            let (v, w) = (v.with_cutoff(cut), w.with_cutoff(cut));
            let sv = apply_semigroup(&v, &params, dt);
            let sw = apply_semigroup(&w, &params, dt);
            let dot = |a: &SpectralState, b: &SpectralState| -> f64 {
                a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y).sum()
            };
            let lhs = dot(&sv, &w);
            let rhs = dot(&v, &sw);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs() + rhs.abs() + 1.0));
        }
    }

    #[test]
    fn projection_commutes_with_semigroup(
        v in state_strategy(8),
        m in 0usize..8,
        dt in 1e-6..10.0f64,
    ) {
        for kind in KINDS {
            let params = OperatorParams::new(1.0, 1.0, kind).unwrap();
            let a = project(&apply_semigroup(&v, &params, dt), m);
            let b = apply_semigroup(&project(&v, m), &params, dt);
            prop_assert_eq!(a.coeffs(), b.coeffs());
        }
    }

    #[test]
    fn dealiased_polynomial_matches_convolution_oracle(
        v in state_strategy(6),
        a in prop::collection::vec(-2.0..2.0f64, 3..=6),
    ) {
        let n = v.cutoff();
        let got = poly_eval_projected(&v, &a, n).unwrap();
        let want = poly_oracle(&v, &a, n);
        for k in -(n as i64)..=n as i64 {
            prop_assert!(
                (got.coeff(k) - want.coeff(k)).abs() < 1e-10,
                "mode {}: {} vs {}", k, got.coeff(k), want.coeff(k)
            );
        }
    }

    #[test]
    fn logsumexp_matches_naive_when_safe(
        xs in prop::collection::vec(-20.0..20.0f64, 1..40),
    ) {
        let naive: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        prop_assert!((logsumexp(&xs) - naive).abs() <= 1e-10 * naive.abs().max(1.0));
    }

    #[test]
    fn csv_row_roundtrip_is_lossless(
        coeffs in prop::collection::vec(
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
            1..=9,
        ).prop_filter("odd length", |c| c.len() % 2 == 1),
    ) {
        let v = SpectralState::from_coeffs(coeffs).unwrap();
        let back = SpectralState::from_csv_row(&v.to_csv_row()).unwrap();
        prop_assert_eq!(back, v);
    }
}

/// The computed `ζ_r` dominates the observed operator ratios
/// `M^{-r}·(η+4π²m²)^r·σ_m(T/M)·T^r` over a dense scan of modes and step
/// counts, for both kinds and several parameter sets.
#[test]
fn smoothing_constant_envelopes_observed_ratios() {
    for kind in KINDS {
        for (eta, t) in [(1.0, 1.0), (2.3, 0.7), (0.4, 2.0)] {
            for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let zeta = zeta_smoothing(kind, r, eta, t).unwrap();
                assert!(zeta.is_finite() && zeta > 0.0);
                let mut observed: f64 = 0.0;
                for m_steps in 1..=128usize {
                    let dt = t / m_steps as f64;
                    for mode in 0..=1024i64 {
                        let ratio = (m_steps as f64).powf(-r)
                            * eigenvalue(mode, eta).powf(r)
                            * semigroup_multiplier(kind, mode, dt);
                        observed = observed.max(ratio);
                    }
                }
                assert!(
                    observed <= zeta * t.powf(-r) * (1.0 + 1e-12),
                    "{kind:?} eta={eta} T={t} r={r}: observed {observed} > bound {}",
                    zeta * t.powf(-r)
                );
            }
        }
    }
}

/// Sup over tested `M` of `M^{-r}‖S_M w‖_{H_r}/‖w‖_H` stays below the
/// `ζ_r·T^{-r}` envelope for random states.
#[test]
fn smoothing_constant_envelopes_state_norm_ratios() {
    let mut w = SpectralState::zeros(16);
    for n in -16i64..=16 {
        w.set_coeff(n, ((n * 3 + 1) as f64).sin());
    }
    let norm0 = w.l2_norm();
    for kind in KINDS {
        for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (eta, t) = (1.0, 1.0);
            let zeta = zeta_smoothing(kind, r, eta, t).unwrap();
            let params = OperatorParams::new(eta, t, kind).unwrap();
            let mut sup: f64 = 0.0;
            for m in 1..=64usize {
                let sw = apply_semigroup(&w, &params, t / m as f64);
                sup = sup.max((m as f64).powf(-r) * sobolev_norm(&sw, r, eta) / norm0);
            }
            assert!(sup <= zeta * t.powf(-r) * (1.0 + 1e-12));
        }
    }
}
