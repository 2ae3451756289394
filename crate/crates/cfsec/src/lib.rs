//! Secure power control for downlink cell-free massive MIMO under passive
//! eavesdropping.
//!
//! A network of `M` single-antenna access points jointly serves `K` users
//! with conjugate beamforming while `J` passive eavesdroppers overhear the
//! downlink. Every AP splits its budget between per-user data powers and an
//! artificial-noise (AN) broadcast that degrades the eavesdroppers' SINR.
//! This crate provides:
//!
//! - random network deployment with COST-Hata / three-slope path loss
//!   ([`network`]),
//! - LMMSE channel-estimation statistics and Monte-Carlo channel draws
//!   ([`channel`]),
//! - closed-form user-rate lower bounds, leakage-rate upper bounds and
//!   secrecy rates, plus Monte-Carlo validators for both ([`rates`]),
//! - the successive-convex-approximation (SCA) max-min secrecy power
//!   optimizer built on second-order-cone subproblems ([`optimizer`]),
//! - competing schemes: the heuristic initializer, the no-AN variant and the
//!   security-oblivious max-min rate control ([`baselines`]),
//! - a deterministic Monte-Carlo experiment harness producing minimum
//!   secrecy-rate CDFs and outage statistics ([`experiments`]),
//! - configuration ingestion, unit conversion and result emission for the
//!   `cfsec` command-line binary ([`cli`]).
//!
//! Powers are noise-normalized throughout the library: physical mW / dBm
//! inputs are converted once at configuration ingestion (see
//! [`cli::normalize_power`]). Rates are in bits per channel use.
//!
//! See the crate examples for runnable walkthroughs of each capability:
//!
//! ```bash
//! cargo run --release --example deploy_network
//! cargo run --release --example channel_estimation
//! cargo run --release --example rate_bounds
//! cargo run --release --example secure_power_control
//! cargo run --release --example scheme_comparison
//! cargo run --release --example cdf_experiment
//! ```

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod experiments;
pub mod network;
pub mod optimizer;
pub mod rates;

pub use channel::{lmmse_stats, ChannelStats, PilotConfig};
pub use experiments::{run_experiment, ExperimentResult, ExperimentSpec, Scheme};
pub use network::{deploy, deploy_from_seed, path_loss, DeploymentConfig, NetworkRealization};
pub use optimizer::{run_sca, ScaConfig, ScaTrace};
pub use rates::{secrecy_report, PowerAllocation, RateReport};

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("conic solver failure: {0}")]
    Solver(String),
    #[error("excessive solver failures: {failed} of {total} realizations")]
    ExcessiveFailures { failed: usize, total: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv parse error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
