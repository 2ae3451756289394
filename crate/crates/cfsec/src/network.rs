//! Network deployment and large-scale fading.
//!
//! Access points, users and eavesdroppers are dropped i.i.d. uniformly over a
//! square service area. Large-scale gains come from the COST-Hata model
//! combined with the classic three-slope distance rule: free exponent 3.5
//! beyond the outer reference distance `d1`, exponent 2 between `d0` and
//! `d1`, and a flat segment below `d0`. Antenna heights and carrier frequency
//! enter only through the COST-Hata constant.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Geometry and propagation parameters for one deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentConfig {
    /// Side of the square service area in meters.
    pub area_side_m: f64,
    /// Number of access points `M`.
    pub num_aps: usize,
    /// Number of users `K`.
    pub num_users: usize,
    /// Number of passive eavesdroppers `J`.
    pub num_eves: usize,
    /// Carrier frequency in Hz.
    pub carrier_freq_hz: f64,
    /// AP antenna height in meters.
    pub ap_height_m: f64,
    /// User antenna height in meters.
    pub user_height_m: f64,
    /// Inner path-loss reference distance `d0` in meters.
    pub ref_dist_d0_m: f64,
    /// Outer path-loss reference distance `d1` in meters.
    pub ref_dist_d1_m: f64,
    /// Apply log-normal shadowing beyond `d1`.
    pub shadowing_enabled: bool,
    /// Shadowing standard deviation in dB (used only when enabled).
    pub shadowing_sigma_db: f64,
    /// RNG seed for stand-alone deployments.
    pub seed: u64,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        Self {
            area_side_m: 1000.0,
            num_aps: 100,
            num_users: 2,
            num_eves: 1,
            carrier_freq_hz: 1.9e9,
            ap_height_m: 15.0,
            user_height_m: 1.65,
            ref_dist_d0_m: 10.0,
            ref_dist_d1_m: 50.0,
            shadowing_enabled: false,
            shadowing_sigma_db: 8.0,
            seed: 1,
        }
    }
}

impl DeploymentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_aps == 0 || self.num_users == 0 {
            return Err(Error::Config("need at least one AP and one user".into()));
        }
        if !(self.area_side_m > 0.0) {
            return Err(Error::Config("area side must be positive".into()));
        }
        for (name, v) in [
            ("carrier frequency", self.carrier_freq_hz),
            ("AP height", self.ap_height_m),
            ("user height", self.user_height_m),
            ("d0", self.ref_dist_d0_m),
            ("d1", self.ref_dist_d1_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite")));
            }
        }
        let diagonal = self.area_side_m * std::f64::consts::SQRT_2;
        if !(self.ref_dist_d0_m < self.ref_dist_d1_m && self.ref_dist_d1_m < diagonal) {
            return Err(Error::Config(
                "reference distances must satisfy 0 < d0 < d1 < area diagonal".into(),
            ));
        }
        if self.shadowing_enabled && !(self.shadowing_sigma_db >= 0.0) {
            return Err(Error::Config("shadowing sigma must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One drawn network: terminal positions and large-scale gains.
///
/// `beta[(m, k)]` is the linear-scale gain from AP `m` to user `k`;
/// `beta_eve[(m, j)]` the gain to eavesdropper `j`. All entries are strictly
/// positive for a valid deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRealization {
    pub ap_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    pub eve_positions: Vec<[f64; 2]>,
    pub beta: Array2<f64>,
    pub beta_eve: Array2<f64>,
}

impl NetworkRealization {
    pub fn num_aps(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.beta.ncols()
    }

    pub fn num_eves(&self) -> usize {
        self.beta_eve.ncols()
    }

    /// View of the same network with all eavesdroppers removed. Used by the
    /// security-oblivious baseline, which optimizes as if no Eve existed.
    pub fn without_eves(&self) -> NetworkRealization {
        NetworkRealization {
            ap_positions: self.ap_positions.clone(),
            user_positions: self.user_positions.clone(),
            eve_positions: Vec::new(),
            beta: self.beta.clone(),
            beta_eve: Array2::zeros((self.num_aps(), 0)),
        }
    }
}

/// COST-Hata fixed offset in dB, assembled from carrier frequency and
/// antenna heights. Frequency enters in MHz, heights in meters.
pub fn cost_hata_offset_db(config: &DeploymentConfig) -> f64 {
    let f_mhz = config.carrier_freq_hz / 1e6;
    let lf = f_mhz.log10();
    46.3 + 33.9 * lf - 13.82 * config.ap_height_m.log10()
        - (1.1 * lf - 0.7) * config.user_height_m
        + (1.56 * lf - 0.8)
}

/// Median large-scale gain (linear scale) at planar distance `distance_m`.
///
/// Three-slope rule with distances in km and `L` the COST-Hata offset:
/// `-L - 35 log10(d)` beyond `d1`, `-L - 15 log10(d1) - 20 log10(d)` between
/// `d0` and `d1`, and the constant `-L - 15 log10(d1) - 20 log10(d0)` below
/// `d0`. Shadowing is drawn separately in [`deploy`].
pub fn path_loss(distance_m: f64, config: &DeploymentConfig) -> Result<f64> {
    if !(distance_m >= 0.0) {
        return Err(Error::Domain(format!(
            "distance must be nonnegative, got {distance_m}"
        )));
    }
    let l = cost_hata_offset_db(config);
    let d0 = config.ref_dist_d0_m / 1000.0;
    let d1 = config.ref_dist_d1_m / 1000.0;
    let d = distance_m / 1000.0;
    let pl_db = if d > d1 {
        -l - 35.0 * d.log10()
    } else if d > d0 {
        -l - 15.0 * d1.log10() - 20.0 * d.log10()
    } else {
        -l - 15.0 * d1.log10() - 20.0 * d0.log10()
    };
    Ok(10f64.powf(pl_db / 10.0))
}

/// Draw a network: positions i.i.d. uniform over the square, gains from
/// [`path_loss`], log-normal shadowing beyond `d1` when enabled.
///
/// Reproducible: the same `(config, rng stream)` yields the same realization.
/// Draw order is fixed (APs, users, Eves, then shadowing per user column and
/// per Eve column).
pub fn deploy(config: &DeploymentConfig, rng: &mut impl Rng) -> Result<NetworkRealization> {
    config.validate()?;
    let (m, k, j) = (config.num_aps, config.num_users, config.num_eves);
    let side = config.area_side_m;
    let draw_points = |n: usize, rng: &mut dyn rand::RngCore| -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| {
                let x: f64 = rand::Rng::gen_range(rng, 0.0..side);
                let y: f64 = rand::Rng::gen_range(rng, 0.0..side);
                [x, y]
            })
            .collect()
    };
    let ap_positions = draw_points(m, rng);
    let user_positions = draw_points(k, rng);
    let eve_positions = draw_points(j, rng);

    let gains = |targets: &[[f64; 2]], rng: &mut dyn rand::RngCore| -> Result<Array2<f64>> {
        let mut out = Array2::zeros((m, targets.len()));
        for (t, pos) in targets.iter().enumerate() {
            for (a, ap) in ap_positions.iter().enumerate() {
                let d = ((ap[0] - pos[0]).powi(2) + (ap[1] - pos[1]).powi(2)).sqrt();
                let mut gain = path_loss(d, config)?;
                if config.shadowing_enabled && d > config.ref_dist_d1_m {
                    let z: f64 = rand_distr::Distribution::sample(&StandardNormal, rng);
                    gain *= 10f64.powf(config.shadowing_sigma_db * z / 10.0);
                }
                out[(a, t)] = gain;
            }
        }
        Ok(out)
    };
    let beta = gains(&user_positions, rng)?;
    let beta_eve = gains(&eve_positions, rng)?;

    Ok(NetworkRealization {
        ap_positions,
        user_positions,
        eve_positions,
        beta,
        beta_eve,
    })
}

/// [`deploy`] with a ChaCha stream seeded from `config.seed`.
pub fn deploy_from_seed(config: &DeploymentConfig) -> Result<NetworkRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    deploy(config, &mut rng)
}
