//! One full SCA run: trace, convergence and the AN power split.
//!
//! ```bash
//! cargo run --release --example secure_power_control
//! ```

use cfsec::baselines::{heuristic_init, run_an_sca};
use cfsec::channel::{lmmse_stats, PilotConfig};
use cfsec::cli::normalize_power;
use cfsec::network::{deploy_from_seed, DeploymentConfig};
use cfsec::optimizer::ScaConfig;
use cfsec::rates::secrecy_report;

fn main() {
    let p_t = normalize_power(100.0, -94.0);
    let net = deploy_from_seed(&DeploymentConfig {
        num_aps: 30,
        num_users: 2,
        num_eves: 1,
        seed: 7,
        ..DeploymentConfig::default()
    })
    .unwrap();
    let stats = lmmse_stats(
        &net,
        &PilotConfig {
            tau_p: 2,
            p_p: normalize_power(200.0, -94.0),
        },
    )
    .unwrap();

    let cfg = ScaConfig {
        p_t,
        ..ScaConfig::default()
    };
    let init = heuristic_init(&stats, &net, p_t).unwrap();
    let init_report = secrecy_report(&init, &stats, &net).unwrap();
    println!(
        "heuristic initializer: min secrecy {:.4} bits/use",
        init_report.min_secrecy
    );

    let trace = run_an_sca(&stats, &net, &cfg).unwrap();
    println!(
        "SCA: converged = {}, iterations = {}",
        trace.converged, trace.iterations_used
    );
    for (n, t) in trace.t_values.iter().enumerate().skip(1) {
        println!("  iter {n:2}: t = {t:.5}  (subproblem optimum {:.5})", trace.surrogate_t_values[n]);
    }
    let report = &trace.final_report;
    println!("final min secrecy: {:.4} bits/use", report.min_secrecy);
    println!(
        "improvement over initializer: {:+.4} bits/use",
        report.min_secrecy - init_report.min_secrecy
    );

    let alloc = trace.final_allocation();
    let an_share: f64 = alloc.p_v.sum() / (p_t * net.num_aps() as f64);
    println!("network-wide AN budget share: {:.1}%", 100.0 * an_share);
    let used = alloc.budget_used(&stats);
    let max_used = used.iter().cloned().fold(f64::MIN, f64::max) / p_t;
    println!("largest per-AP budget usage: {:.4} of p_t", max_used);
}
