use std::time::Instant;

use spde_lab_cli::config::ExperimentConfig;
use spde_lab_cli::experiments::*;
use spde_lab_core::bounds::{compute_constants_with, divergence_lower_bound, ConstantsOptions};
use spde_lab_core::montecarlo::ou_mode_variances;
use spde_lab_core::schemes::SchemeConfig;
use spde_lab_core::SeedSpec;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();

    if which == "ou" || which.is_empty() {
        for seed in [20260101u64, 1, 2, 3, 4] {
            let cfg = SchemeConfig::zero_drift(16);
            let t0 = Instant::now();
            let rows = ou_mode_variances(
                &cfg,
                10_000,
                SeedSpec::new(seed).with_experiment(experiment_ids::VALIDATE_OU + 16),
            )
            .unwrap();
            let bad: Vec<i64> = rows
                .iter()
                .filter(|r| (r.empirical - r.analytic).abs() > 3.0 * r.std_error)
                .map(|r| r.mode)
                .collect();
            println!("ou seed {seed}: bad modes {bad:?} in {:?}", t0.elapsed());
        }
    }

    if which == "ball" || which.is_empty() {
        let t0 = Instant::now();
        let rows = ball_grid_rows(42, 100_000);
        let worst = rows
            .iter()
            .map(|r| (r.log_reference.exp() + 3.0 * r.mc_se) - r.log_bound.exp())
            .fold(f64::INFINITY, f64::min);
        println!(
            "ball: {} rows, all ok: {}, worst margin {:.3e}, {:?}",
            rows.len(),
            rows.iter().all(|r| r.ok),
            worst,
            t0.elapsed()
        );
    }

    if which == "smoothed" || which.is_empty() {
        let t0 = Instant::now();
        let rows = smoothed_grid_rows(42, 100_000);
        let worst = rows
            .iter()
            .map(|r| (r.log_reference.exp() + 3.0 * r.mc_se) - r.log_bound.exp())
            .fold(f64::INFINITY, f64::min);
        println!(
            "smoothed: {} rows, all ok: {}, worst margin {:.3e}, {:?}",
            rows.len(),
            rows.iter().all(|r| r.ok),
            worst,
            t0.elapsed()
        );
        for r in rows.iter().take(6) {
            println!(
                "  {} {} nu={} N={} x={} v={}: bound {:.3e} mc {:.4}",
                r.family,
                r.semigroup,
                r.nu,
                r.n,
                r.x,
                r.v_label,
                r.log_bound.exp(),
                r.log_reference.exp()
            );
        }
    }

    if which == "abstract" || which.is_empty() {
        let t0 = Instant::now();
        let rep = abstract_bound_report(42, 100_000).unwrap();
        println!(
            "abstract: p={:?} init={} bound(exp)={:.4} mc={:.2} +- {:.2} ok={} {:?}",
            rep.p_lower,
            rep.p_init,
            rep.log_bound.exp(),
            rep.mc_mean,
            rep.mc_se,
            rep.ok,
            t0.elapsed()
        );
    }

    if which == "trend" || which.is_empty() {
        let cfg = SchemeConfig::allen_cahn(8);
        let opts = ConstantsOptions {
            embedding_constant: Some(1.0),
            ..Default::default()
        };
        let consts = compute_constants_with(&cfg, &opts).unwrap();
        for r in [1.0, 2.0] {
            let b10 = divergence_lower_bound(&consts, 10, r).unwrap();
            let b60 = divergence_lower_bound(&consts, 60, r).unwrap();
            let b2 = divergence_lower_bound(&consts, 2, r).unwrap();
            println!("trend r={r}: b(2)={b2:.4e} b(10)={b10:.4e} b(60)={b60:.4e} diff={:.4e} (need ≥ 59049)", b60-b10);
        }
        println!("op_norm estimate: {}", consts.op_norm_neg_s);
        println!("C estimate would be: {}", spde_lab_core::bounds::estimate_embedding_constant(0.5, 6.0, 1.0));
    }

    if which == "sweep" || which.is_empty() {
        let toml = r#"
kind = "sweep"
master_seed = 42
n_samples = 1000
n_list = [8, 16, 32, 64, 128, 256]
p_list = [2.0]
output_prefix = "probe"

[scheme]
t_final = 1.0
a = [0.0, 1.0, 0.0, -1.0]
semigroup = "exponential"
"#;
        let cfg = ExperimentConfig::from_toml(toml).unwrap();
        let t0 = Instant::now();
        let rows = sweep_rows(&cfg).unwrap();
        println!("sweep (exponential) in {:?}:", t0.elapsed());
        for row in &rows {
            println!(
                "  N={:4} frac={:.4} log_sat={:.4}",
                row.n, row.estimate.explosion_fraction, row.estimate.log_saturated_mean
            );
        }
    }

    if which == "sode" || which.is_empty() {
        let toml = r#"
kind = "sode1d-sweep"
master_seed = 42
n_samples = 10000
n_list = [8, 16, 32, 64, 128, 256, 512, 1024]
p_list = [2.0]
output_prefix = "probe"

[sode1d]
t_final = 1.0
mu = [0.0, 0.0, 0.0, -1.0]
sigma = [1.0]
"#;
        let cfg = ExperimentConfig::from_toml(toml).unwrap();
        let t0 = Instant::now();
        let rows = sode1d_rows(&cfg).unwrap();
        println!("sode1d in {:?}:", t0.elapsed());
        for row in &rows {
            println!(
                "  N={:5} frac={:.5} log_sat={:.4}",
                row.n, row.estimate.explosion_fraction, row.estimate.log_saturated_mean
            );
        }
    }
}
