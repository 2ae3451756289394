//! LMMSE estimation statistics and their Monte-Carlo verification.
//!
//! ```bash
//! cargo run --release --example channel_estimation
//! ```

use cfsec::channel::{draw_channels, estimate_channels, lmmse_stats, PilotConfig};
use cfsec::cli::normalize_power;
use cfsec::network::{deploy_from_seed, DeploymentConfig};
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

fn main() {
    let config = DeploymentConfig {
        num_aps: 4,
        num_users: 2,
        num_eves: 0,
        seed: 3,
        ..DeploymentConfig::default()
    };
    let net = deploy_from_seed(&config).unwrap();
    let pilots = PilotConfig {
        tau_p: 2,
        p_p: normalize_power(200.0, -94.0),
    };
    let stats = lmmse_stats(&net, &pilots).unwrap();

    println!("per-link estimate quality (gamma/beta is the saved fraction):");
    for m in 0..net.num_aps() {
        for k in 0..net.num_users() {
            println!(
                "  AP {m} -> user {k}: beta {:.3e}, gamma {:.3e} ({:.1}%)",
                net.beta[(m, k)],
                stats.gamma[(m, k)],
                100.0 * stats.gamma[(m, k)] / net.beta[(m, k)]
            );
        }
    }

    // verify E[|ghat|^2] = gamma empirically
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 50_000;
    let mut acc = vec![0.0; net.num_aps() * net.num_users()];
    for _ in 0..draws {
        let (g, _) = draw_channels(&net, &mut rng);
        let ghat = estimate_channels(&g, &pilots, &stats, &mut rng);
        for (slot, est) in acc.iter_mut().zip(ghat.iter()) {
            *slot += est.norm_sqr();
        }
    }
    println!("\nempirical E[|ghat|^2] over {draws} draws vs gamma:");
    for (m, row) in acc.chunks(net.num_users()).enumerate() {
        for (k, sum) in row.iter().enumerate() {
            let emp = sum / draws as f64;
            let gamma = stats.gamma[(m, k)];
            println!(
                "  AP {m} -> user {k}: {emp:.3e} vs {gamma:.3e} (rel err {:.2}%)",
                100.0 * (emp - gamma).abs() / gamma
            );
        }
    }
}
