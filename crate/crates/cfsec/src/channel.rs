//! LMMSE channel-estimation statistics and Monte-Carlo channel synthesis.
//!
//! Each AP estimates its channel to every user from orthonormal uplink
//! pilots. With pilot length `tau_p >= K` user `k` occupies the `k`-th
//! orthonormal pilot, so the projected observation for the `(m, k)` link is
//! `y = sqrt(tau_p * p_p) * g_mk + w` with unit-variance noise `w`. The LMMSE
//! scaling and the estimate quality are then
//!
//! ```text
//! c_mk     = sqrt(tau_p p_p) beta_mk / (tau_p p_p beta_mk + 1)
//! gamma_mk = sqrt(tau_p p_p) beta_mk c_mk = E[g_mk ghat*_mk] = E[|ghat_mk|^2]
//! ```
//!
//! Small-scale channels are i.i.d. unit-variance circularly-symmetric complex
//! Gaussian; draws are used only by the Monte-Carlo validators in
//! [`crate::rates`].

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::network::NetworkRealization;
use crate::{Error, Result};

/// Uplink pilot parameters. `p_p` is noise-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    /// Pilot length in symbols. Orthonormal pilots require `tau_p >= K`.
    pub tau_p: usize,
    /// Pilot transmit power over noise power (dimensionless).
    pub p_p: f64,
}

impl PilotConfig {
    pub fn validate(&self, num_users: usize) -> Result<()> {
        if self.tau_p < num_users {
            return Err(Error::Config(format!(
                "tau_p = {} cannot carry {} orthonormal pilots",
                self.tau_p, num_users
            )));
        }
        if !(self.p_p > 0.0) {
            return Err(Error::Config("pilot power must be positive".into()));
        }
        Ok(())
    }

    /// `tau_p * p_p`, the effective pilot energy.
    pub fn pilot_energy(&self) -> f64 {
        self.tau_p as f64 * self.p_p
    }
}

/// Per-link LMMSE scaling coefficients `c` and estimate qualities `gamma`,
/// both `M x K`. `0 <= gamma_mk < beta_mk` with equality only at `beta = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub c: Array2<f64>,
    pub gamma: Array2<f64>,
}

/// Closed-form LMMSE statistics for every AP-user link.
pub fn lmmse_stats(net: &NetworkRealization, pilots: &PilotConfig) -> Result<ChannelStats> {
    pilots.validate(net.num_users())?;
    let energy = pilots.pilot_energy();
    let root = energy.sqrt();
    let c = net.beta.mapv(|beta| root * beta / (energy * beta + 1.0));
    let gamma = &net.beta * &c * root;
    Ok(ChannelStats { c, gamma })
}

/// Draw one small-scale realization: `g_mk = sqrt(beta_mk) h_mk` with
/// `h ~ CN(0, 1)`, for user links and eavesdropper links. Draw order is
/// row-major users first, then eavesdroppers.
pub fn draw_channels(
    net: &NetworkRealization,
    rng: &mut impl Rng,
) -> (Array2<Complex64>, Array2<Complex64>) {
    let mut draw = |beta: &Array2<f64>| {
        let mut out = Array2::from_elem(beta.dim(), Complex64::new(0.0, 0.0));
        for (dst, &b) in out.iter_mut().zip(beta.iter()) {
            *dst = b.sqrt() * standard_complex(rng);
        }
        out
    };
    let g = draw(&net.beta);
    let g_eve = draw(&net.beta_eve);
    (g, g_eve)
}

/// LMMSE estimates for one drawn realization: `ghat = c * y` with the
/// projected observation `y = sqrt(tau_p p_p) g + w`, `w ~ CN(0, 1)`.
pub fn estimate_channels(
    g: &Array2<Complex64>,
    pilots: &PilotConfig,
    stats: &ChannelStats,
    rng: &mut impl Rng,
) -> Array2<Complex64> {
    assert_eq!(g.dim(), stats.c.dim(), "channel/stats shape mismatch");
    let root = pilots.pilot_energy().sqrt();
    let mut out = Array2::from_elem(g.dim(), Complex64::new(0.0, 0.0));
    for ((dst, &gv), &cv) in out.iter_mut().zip(g.iter()).zip(stats.c.iter()) {
        let y = root * gv + standard_complex(rng);
        *dst = cv * y;
    }
    out
}

/// One CN(0, 1) sample.
#[inline]
pub(crate) fn standard_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
