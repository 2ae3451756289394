//! Drop a random network and inspect the path-loss model.
//!
//! ```bash
//! cargo run --release --example deploy_network
//! ```

use cfsec::network::{cost_hata_offset_db, deploy_from_seed, path_loss, DeploymentConfig};

fn main() {
    let config = DeploymentConfig {
        num_aps: 20,
        num_users: 2,
        num_eves: 1,
        seed: 7,
        ..DeploymentConfig::default()
    };

    println!("COST-Hata offset: {:.2} dB", cost_hata_offset_db(&config));
    println!("three-slope gain profile:");
    for d in [1.0, 5.0, 10.0, 25.0, 50.0, 100.0, 300.0, 1000.0] {
        let gain = path_loss(d, &config).unwrap();
        println!("  d = {d:7.1} m   gain = {gain:.3e}  ({:.1} dB)", 10.0 * gain.log10());
    }

    let net = deploy_from_seed(&config).unwrap();
    println!(
        "\ndeployed {} APs, {} users, {} eavesdropper(s) on a {:.0} m square",
        net.num_aps(),
        net.num_users(),
        net.num_eves(),
        config.area_side_m
    );
    for k in 0..net.num_users() {
        let col = net.beta.column(k);
        let best = col.iter().cloned().fold(f64::MIN, f64::max);
        let sum: f64 = col.sum();
        println!(
            "  user {k}: position {:?}, strongest link {best:.3e}, sum over APs {sum:.3e}",
            net.user_positions[k].map(|c| c.round())
        );
    }

    // realizations serialize for replay
    let json = serde_json::to_string(&net).unwrap();
    println!("\nserialized realization: {} bytes of JSON", json.len());
}
