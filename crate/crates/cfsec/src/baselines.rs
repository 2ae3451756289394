//! Competing power-control schemes.
//!
//! - [`heuristic_init`]: closed-form AN-aware split that also serves as the
//!   SCA initializer. Each AP weights data slots by `1/sqrt(gamma)` and the
//!   AN slot by the nearby-Eve strength, saturating its budget exactly:
//!   more power goes to data when users are close, to AN when Eves are.
//! - [`run_no_an`]: the secrecy optimizer restricted to `p_mv = 0`.
//! - [`run_maxmin_rate`]: security-oblivious max-min user rate (the classic
//!   cell-free power control); secrecy is evaluated afterwards against the
//!   realization's eavesdroppers, never optimized.

use ndarray::Array1;

use crate::channel::ChannelStats;
use crate::network::NetworkRealization;
use crate::optimizer::{run_sca, ScaConfig, ScaTrace};
use crate::rates::{secrecy_report, PowerAllocation};
use crate::{Error, Result};

/// AN-aware heuristic allocation. Saturates every AP's budget:
/// `sum_k p_mk gamma_mk + p_mv = p_t` exactly.
pub fn heuristic_init(
    stats: &ChannelStats,
    net: &NetworkRealization,
    p_t: f64,
) -> Result<PowerAllocation> {
    let (m_n, k_n) = stats.gamma.dim();
    if net.beta_eve.nrows() != m_n {
        return Err(Error::Dimension("stats/network AP counts differ".into()));
    }
    if stats.gamma.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Domain(
            "heuristic initializer needs strictly positive gamma".into(),
        ));
    }
    let mut alloc = PowerAllocation::zeros(m_n, k_n);
    for m in 0..m_n {
        let gamma_sum: f64 = (0..k_n).map(|k| stats.gamma[(m, k)].sqrt()).sum();
        let eve_sum: f64 = net.beta_eve.row(m).iter().map(|&b| b.sqrt()).sum();
        let denom = gamma_sum + eve_sum;
        for k in 0..k_n {
            alloc.p[(m, k)] = p_t / (stats.gamma[(m, k)].sqrt() * denom);
        }
        alloc.p_v[m] = p_t * eve_sum / denom;
    }
    Ok(alloc)
}

/// Heuristic split with the Eve terms removed: all budget goes to data,
/// `p_mk = p_t / (sqrt(gamma_mk) sum_k' sqrt(gamma_mk'))`, `p_mv = 0`.
/// Used to start the schemes that do not transmit AN.
pub fn heuristic_init_data_only(stats: &ChannelStats, p_t: f64) -> Result<PowerAllocation> {
    let (m_n, k_n) = stats.gamma.dim();
    if stats.gamma.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Domain(
            "heuristic initializer needs strictly positive gamma".into(),
        ));
    }
    let mut alloc = PowerAllocation::zeros(m_n, k_n);
    for m in 0..m_n {
        let gamma_sum: f64 = (0..k_n).map(|k| stats.gamma[(m, k)].sqrt()).sum();
        for k in 0..k_n {
            alloc.p[(m, k)] = p_t / (stats.gamma[(m, k)].sqrt() * gamma_sum);
        }
    }
    alloc.p_v = Array1::zeros(m_n);
    Ok(alloc)
}

/// The proposed scheme: AN-aided SCA from the heuristic initializer.
pub fn run_an_sca(
    stats: &ChannelStats,
    net: &NetworkRealization,
    cfg: &ScaConfig,
) -> Result<ScaTrace> {
    let init = heuristic_init(stats, net, cfg.p_t)?;
    let cfg = ScaConfig {
        enable_an: true,
        ..*cfg
    };
    run_sca(&init, stats, net, &cfg)
}

/// The proposed scheme with the AN powers pinned to zero.
pub fn run_no_an(
    stats: &ChannelStats,
    net: &NetworkRealization,
    cfg: &ScaConfig,
) -> Result<ScaTrace> {
    let init = heuristic_init_data_only(stats, cfg.p_t)?;
    let cfg = ScaConfig {
        enable_an: false,
        ..*cfg
    };
    run_sca(&init, stats, net, &cfg)
}

/// Security-oblivious max-min rate control: optimize `min_k Rbar_k` with no
/// AN and no leakage constraints, then evaluate secrecy against the true
/// eavesdroppers.
pub fn run_maxmin_rate(
    stats: &ChannelStats,
    net: &NetworkRealization,
    cfg: &ScaConfig,
) -> Result<ScaTrace> {
    let init = heuristic_init_data_only(stats, cfg.p_t)?;
    let cfg_no_an = ScaConfig {
        enable_an: false,
        ..*cfg
    };
    let eveless = net.without_eves();
    let mut trace = run_sca(&init, stats, &eveless, &cfg_no_an)?;
    trace.final_report = secrecy_report(trace.final_allocation(), stats, net)?;
    Ok(trace)
}
