//! Closed-form rate bounds and their Monte-Carlo validators.
//!
//! The user rate is lower-bounded with the use-and-then-forget (UatF)
//! technique: only the mean effective channel carries signal, every
//! deviation is treated as noise. The leakage rate is upper-bounded under
//! the worst case that eavesdroppers perfectly know their channels, with the
//! expectation moved inside the log. Both bounds are rational functions of
//! six nonnegative terms:
//!
//! ```text
//! DS_k   = (sum_m sqrt(p_mk) gamma_mk)^2        desired signal
//! BU_k   = sum_m p_mk gamma_mk beta_mk          beamforming uncertainty
//! UI_kk' = sum_m p_mk' gamma_mk' beta_mk        inter-user interference
//! AN_k   = sum_m p_mv beta_mk                   artificial noise at user k
//! LS_jk  = sum_m p_mk gamma_mk beta^e_mj        leakage signal at Eve j
//! ANe_j  = sum_m p_mv beta^e_mj                 artificial noise at Eve j
//! ```
//!
//! giving `Rbar_k = log2(1 + DS / (BU + sum UI + AN + 1))` and
//! `Rbar^e_jk = log2(1 + LS_jk / (sum_{k'!=k} LS_jk' + ANe_j + 1))`, and the
//! per-pair secrecy rate `[Rbar_k - Rbar^e_jk]^+`.
//!
//! The Monte-Carlo validators estimate the same moments (and, for leakage,
//! the exact expectation of the instantaneous log) from channel draws; they
//! certify the closed forms and the moment-swap approximation quality.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde::{Deserialize, Serialize};

use crate::channel::{draw_channels, estimate_channels, standard_complex, ChannelStats, PilotConfig};
use crate::network::NetworkRealization;
use crate::{Error, Result};

/// Data powers `p[(m, k)]` and AN powers `p_v[m]`, noise-normalized.
///
/// A feasible allocation satisfies the per-AP budget
/// `sum_k p_mk gamma_mk + p_mv <= p_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p: Array2<f64>,
    pub p_v: Array1<f64>,
}

impl PowerAllocation {
    pub fn zeros(num_aps: usize, num_users: usize) -> Self {
        Self {
            p: Array2::zeros((num_aps, num_users)),
            p_v: Array1::zeros(num_aps),
        }
    }

    pub fn num_aps(&self) -> usize {
        self.p.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.p.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_v.len() != self.p.nrows() {
            return Err(Error::Dimension("p_v length must match AP count".into()));
        }
        if self.p.iter().chain(self.p_v.iter()).any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain("powers must be nonnegative and finite".into()));
        }
        Ok(())
    }

    /// Per-AP consumed budget `sum_k p_mk gamma_mk + p_mv`.
    pub fn budget_used(&self, stats: &ChannelStats) -> Array1<f64> {
        let mut used = self.p_v.clone();
        for m in 0..self.num_aps() {
            for k in 0..self.num_users() {
                used[m] += self.p[(m, k)] * stats.gamma[(m, k)];
            }
        }
        used
    }

    /// Scale every AN power by `factor`, leaving data powers untouched.
    pub fn with_an_scaled(&self, factor: f64) -> Self {
        Self {
            p: self.p.clone(),
            p_v: self.p_v.mapv(|v| v * factor),
        }
    }
}

/// The six SINR building blocks evaluated at one allocation.
///
/// `ui[(k, k')]` stores `sum_m p_mk' gamma_mk' beta_mk` for every pair, so
/// its diagonal equals `bu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrDecomposition {
    pub ds: Array1<f64>,
    pub bu: Array1<f64>,
    pub ui: Array2<f64>,
    pub an: Array1<f64>,
    pub ls: Array2<f64>,
    pub an_eve: Array1<f64>,
}

impl SinrDecomposition {
    pub fn compute(
        alloc: &PowerAllocation,
        stats: &ChannelStats,
        net: &NetworkRealization,
    ) -> Result<Self> {
        alloc.validate()?;
        let (m_n, k_n, j_n) = (net.num_aps(), net.num_users(), net.num_eves());
        if alloc.p.dim() != (m_n, k_n) || stats.gamma.dim() != (m_n, k_n) {
            return Err(Error::Dimension(
                "allocation/stats shapes must match the network".into(),
            ));
        }

        let mut ds = Array1::zeros(k_n);
        let mut bu = Array1::zeros(k_n);
        let mut ui = Array2::zeros((k_n, k_n));
        let mut an = Array1::zeros(k_n);
        for k in 0..k_n {
            let mut root = 0.0;
            for m in 0..m_n {
                root += alloc.p[(m, k)].sqrt() * stats.gamma[(m, k)];
                an[k] += alloc.p_v[m] * net.beta[(m, k)];
            }
            ds[k] = root * root;
            for kp in 0..k_n {
                let mut acc = 0.0;
                for m in 0..m_n {
                    acc += alloc.p[(m, kp)] * stats.gamma[(m, kp)] * net.beta[(m, k)];
                }
                ui[(k, kp)] = acc;
            }
            bu[k] = ui[(k, k)];
        }

        let mut ls = Array2::zeros((j_n, k_n));
        let mut an_eve = Array1::zeros(j_n);
        for j in 0..j_n {
            for m in 0..m_n {
                an_eve[j] += alloc.p_v[m] * net.beta_eve[(m, j)];
            }
            for k in 0..k_n {
                let mut acc = 0.0;
                for m in 0..m_n {
                    acc += alloc.p[(m, k)] * stats.gamma[(m, k)] * net.beta_eve[(m, j)];
                }
                ls[(j, k)] = acc;
            }
        }

        Ok(Self { ds, bu, ui, an, ls, an_eve })
    }

    /// Denominator of user `k`'s SINR: `BU + sum_{k'!=k} UI + AN + 1`.
    pub fn user_interference(&self, k: usize) -> f64 {
        let mut acc = 1.0 + self.an[k];
        for kp in 0..self.ui.ncols() {
            acc += self.ui[(k, kp)]; // diagonal term is BU_k
        }
        acc
    }

    pub fn user_sinr(&self, k: usize) -> f64 {
        self.ds[k] / self.user_interference(k)
    }

    /// Denominator of Eve `j`'s SINR on user `k`.
    pub fn leakage_interference(&self, j: usize, k: usize) -> f64 {
        let mut acc = 1.0 + self.an_eve[j];
        for kp in 0..self.ls.ncols() {
            if kp != k {
                acc += self.ls[(j, kp)];
            }
        }
        acc
    }

    pub fn leakage_sinr(&self, j: usize, k: usize) -> f64 {
        self.ls[(j, k)] / self.leakage_interference(j, k)
    }
}

/// UatF lower bound on every user's achievable rate, bits per channel use.
pub fn user_rate_bound(
    alloc: &PowerAllocation,
    stats: &ChannelStats,
    net: &NetworkRealization,
) -> Result<Array1<f64>> {
    let terms = SinrDecomposition::compute(alloc, stats, net)?;
    Ok(Array1::from_iter(
        (0..net.num_users()).map(|k| (1.0 + terms.user_sinr(k)).log2()),
    ))
}

/// Worst-case leakage-rate upper bound for every (Eve, user) pair.
pub fn leakage_rate_bound(
    alloc: &PowerAllocation,
    stats: &ChannelStats,
    net: &NetworkRealization,
) -> Result<Array2<f64>> {
    let terms = SinrDecomposition::compute(alloc, stats, net)?;
    let (j_n, k_n) = (net.num_eves(), net.num_users());
    let mut out = Array2::zeros((j_n, k_n));
    for j in 0..j_n {
        for k in 0..k_n {
            out[(j, k)] = (1.0 + terms.leakage_sinr(j, k)).log2();
        }
    }
    Ok(out)
}

/// Full rate picture at one allocation: user bounds, leakage bounds, the
/// clamped per-pair secrecy rates and their minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `Rbar_k`, length K.
    pub user_rate: Array1<f64>,
    /// `Rbar^e_jk`, J x K.
    pub leakage: Array2<f64>,
    /// `[Rbar_k - Rbar^e_jk]^+`, J x K.
    pub secrecy: Array2<f64>,
    /// Unclamped `Rbar_k - Rbar^e_jk`, kept alongside the clamped value.
    pub raw_gap: Array2<f64>,
    /// Minimum clamped secrecy rate over all pairs; with no eavesdroppers
    /// this degenerates to the minimum user rate.
    pub min_secrecy: f64,
    pub min_user_rate: f64,
}

pub fn secrecy_report(
    alloc: &PowerAllocation,
    stats: &ChannelStats,
    net: &NetworkRealization,
) -> Result<RateReport> {
    let user_rate = user_rate_bound(alloc, stats, net)?;
    let leakage = leakage_rate_bound(alloc, stats, net)?;
    let (j_n, k_n) = leakage.dim();
    let mut secrecy = Array2::zeros((j_n, k_n));
    let mut raw_gap = Array2::zeros((j_n, k_n));
    for j in 0..j_n {
        for k in 0..k_n {
            let gap = user_rate[k] - leakage[(j, k)];
            raw_gap[(j, k)] = gap;
            secrecy[(j, k)] = gap.max(0.0);
        }
    }
    let min_user_rate = user_rate.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_secrecy = if j_n == 0 {
        min_user_rate
    } else {
        secrecy.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    Ok(RateReport {
        user_rate,
        leakage,
        secrecy,
        raw_gap,
        min_secrecy,
        min_user_rate,
    })
}

// ---------------------------------------------------------------------------
// Monte-Carlo validators
// ---------------------------------------------------------------------------

/// Empirical counterpart of the UatF bound, with the moments the closed form
/// predicts. `rate` is the plug-in estimate over all draws; `rate_se` is the
/// standard error over batches. `ergodic_rate` averages the instantaneous
/// `log2(1 + SINR)` of the received-signal model with the realized effective
/// channel known at the receiver; the UatF closed form lower-bounds it.
#[derive(Debug, Clone)]
pub struct McUserRateReport {
    pub rate: Array1<f64>,
    pub rate_se: Array1<f64>,
    pub ergodic_rate: Array1<f64>,
    pub ergodic_rate_se: Array1<f64>,
    /// `|empirical E[f_kk]|`; the closed form predicts `sum_m sqrt(p) gamma`.
    pub mean_signal: Array1<f64>,
    /// Empirical variance of `f_kk`; the closed form predicts `BU_k`.
    pub var_signal: Array1<f64>,
    /// Empirical `E|f_kk'|^2`, K x K (receiving user k, symbol k').
    pub interference: Array2<f64>,
    /// Empirical `E|z_k|^2`; the closed form predicts `AN_k`.
    pub an_power: Array1<f64>,
    pub num_draws: usize,
}

/// Empirical leakage statistics. `rate` is the expectation of the
/// instantaneous `log2(1 + SINR^e)` (which the closed form approximates by
/// moving the expectation inside), `leak_signal` the empirical
/// `E|f^e_jk|^2` that the closed form predicts as `LS_jk`.
#[derive(Debug, Clone)]
pub struct McLeakageReport {
    pub rate: Array2<f64>,
    pub rate_se: Array2<f64>,
    pub leak_signal: Array2<f64>,
    pub an_power: Array1<f64>,
    pub num_draws: usize,
}

struct UserMoments {
    sum_f: Vec<Complex64>,
    sum_f2_diag: Vec<f64>,
    sum_ui: Vec<f64>, // K*K row-major, E|f_kk'|^2 accumulator
    sum_z2: Vec<f64>,
    sum_log: Vec<f64>, // instantaneous log2(1 + SINR) accumulator
    draws: usize,
}

impl UserMoments {
    fn new(k: usize) -> Self {
        Self {
            sum_f: vec![Complex64::default(); k],
            sum_f2_diag: vec![0.0; k],
            sum_ui: vec![0.0; k * k],
            sum_z2: vec![0.0; k],
            sum_log: vec![0.0; k],
            draws: 0,
        }
    }

    fn merge(&mut self, other: &UserMoments) {
        for (a, b) in self.sum_f.iter_mut().zip(&other.sum_f) {
            *a += b;
        }
        for (a, b) in self.sum_f2_diag.iter_mut().zip(&other.sum_f2_diag) {
            *a += b;
        }
        for (a, b) in self.sum_ui.iter_mut().zip(&other.sum_ui) {
            *a += b;
        }
        for (a, b) in self.sum_z2.iter_mut().zip(&other.sum_z2) {
            *a += b;
        }
        for (a, b) in self.sum_log.iter_mut().zip(&other.sum_log) {
            *a += b;
        }
        self.draws += other.draws;
    }

    /// Plug-in UatF rate per user from the accumulated moments.
    fn rates(&self) -> Vec<f64> {
        let k_n = self.sum_f.len();
        let n = self.draws as f64;
        (0..k_n)
            .map(|k| {
                let mean = self.sum_f[k] / n;
                let var = (self.sum_f2_diag[k] / n - mean.norm_sqr()).max(0.0);
                let mut ui = 0.0;
                for kp in 0..k_n {
                    if kp != k {
                        ui += self.sum_ui[k * k_n + kp] / n;
                    }
                }
                let z2 = self.sum_z2[k] / n;
                (1.0 + mean.norm_sqr() / (var + ui + z2 + 1.0)).log2()
            })
            .collect()
    }
}

fn accumulate_user_draws(
    alloc: &PowerAllocation,
    stats: &ChannelStats,
    pilots: &PilotConfig,
    net: &NetworkRealization,
    draws: usize,
    rng: &mut impl Rng,
) -> UserMoments {
    let (m_n, k_n) = (net.num_aps(), net.num_users());
    let sqrt_p: Array2<f64> = alloc.p.mapv(f64::sqrt);
    let sqrt_pv: Array1<f64> = alloc.p_v.mapv(f64::sqrt);
    let mut acc = UserMoments::new(k_n);
    let mut f2 = vec![0.0; k_n];
    for _ in 0..draws {
        let (g, _) = draw_channels(net, rng);
        let ghat = estimate_channels(&g, pilots, stats, rng);
        let v: Vec<Complex64> = (0..m_n).map(|_| standard_complex(rng)).collect();
        for k in 0..k_n {
            // f_kk' for all symbols k', plus the AN term z_k
            for kp in 0..k_n {
                let mut f = Complex64::default();
                for m in 0..m_n {
                    f += sqrt_p[(m, kp)] * ghat[(m, kp)].conj() * g[(m, k)];
                }
                f2[kp] = f.norm_sqr();
                acc.sum_ui[k * k_n + kp] += f2[kp];
                if kp == k {
                    acc.sum_f[k] += f;
                    acc.sum_f2_diag[k] += f2[kp];
                }
            }
            let mut z = Complex64::default();
            for m in 0..m_n {
                z += sqrt_pv[m] * g[(m, k)] * v[m];
            }
            let z2 = z.norm_sqr();
            acc.sum_z2[k] += z2;
            let interference: f64 = f2.iter().sum::<f64>() - f2[k];
            acc.sum_log[k] += (1.0 + f2[k] / (interference + z2 + 1.0)).log2();
        }
        acc.draws += 1;
    }
    acc
}

fn batch_layout(num_draws: usize) -> (usize, usize) {
    let batches = if num_draws >= 2000 {
        20
    } else if num_draws >= 100 {
        10
    } else {
        2
    };
    (batches, num_draws / batches)
}

/// Monte-Carlo counterpart of [`user_rate_bound`]: draws channels, estimates
/// and AN symbols, accumulates the UatF moments and plugs them into the same
/// rate expression. Batches run in parallel with derived seeds, so the result
/// is deterministic for a given `rng` state regardless of thread count.
pub fn mc_validate_user_rate(
    alloc: &PowerAllocation,
    stats: &ChannelStats,
    pilots: &PilotConfig,
    net: &NetworkRealization,
    num_draws: usize,
    rng: &mut impl Rng,
) -> Result<McUserRateReport> {
    alloc.validate()?;
    let k_n = net.num_users();
    let (batches, per_batch) = batch_layout(num_draws);
    let seeds: Vec<u64> = (0..batches).map(|_| rng.gen()).collect();

    use rayon::prelude::*;
    let parts: Vec<UserMoments> = seeds
        .par_iter()
        .map(|&s| {
            let mut brng = ChaCha8Rng::seed_from_u64(s);
            accumulate_user_draws(alloc, stats, pilots, net, per_batch, &mut brng)
        })
        .collect();

    let mut total = UserMoments::new(k_n);
    let mut batch_rates: Vec<Vec<f64>> = Vec::with_capacity(batches);
    for part in &parts {
        batch_rates.push(part.rates());
        total.merge(part);
    }

    let batch_se = |values: &[f64]| {
        let mean = values.iter().sum::<f64>() / batches as f64;
        let var =
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
        (var / batches as f64).sqrt()
    };

    let n = total.draws as f64;
    let rate = Array1::from(total.rates());
    let mut rate_se = Array1::zeros(k_n);
    let mut ergodic_rate = Array1::zeros(k_n);
    let mut ergodic_rate_se = Array1::zeros(k_n);
    for k in 0..k_n {
        let vals: Vec<f64> = batch_rates.iter().map(|r| r[k]).collect();
        rate_se[k] = batch_se(&vals);
        ergodic_rate[k] = total.sum_log[k] / n;
        let vals: Vec<f64> = parts
            .iter()
            .map(|p| p.sum_log[k] / p.draws as f64)
            .collect();
        ergodic_rate_se[k] = batch_se(&vals);
    }
    let mean_signal = Array1::from_iter(total.sum_f.iter().map(|f| (f / n).norm()));
    let var_signal = Array1::from_iter((0..k_n).map(|k| {
        let mean = total.sum_f[k] / n;
        (total.sum_f2_diag[k] / n - mean.norm_sqr()).max(0.0)
    }));
    let interference =
        Array2::from_shape_vec((k_n, k_n), total.sum_ui.iter().map(|s| s / n).collect())
            .expect("shape");
    let an_power = Array1::from_iter(total.sum_z2.iter().map(|s| s / n));

    Ok(McUserRateReport {
        rate,
        rate_se,
        ergodic_rate,
        ergodic_rate_se,
        mean_signal,
        var_signal,
        interference,
        an_power,
        num_draws: total.draws,
    })
}

struct LeakMoments {
    sum_log: Vec<f64>, // J*K
    sum_f2: Vec<f64>,  // J*K
    sum_z2: Vec<f64>,  // J
    draws: usize,
}

fn accumulate_leak_draws(
    alloc: &PowerAllocation,
    stats: &ChannelStats,
    pilots: &PilotConfig,
    net: &NetworkRealization,
    draws: usize,
    rng: &mut impl Rng,
) -> LeakMoments {
    let (m_n, k_n, j_n) = (net.num_aps(), net.num_users(), net.num_eves());
    let sqrt_p: Array2<f64> = alloc.p.mapv(f64::sqrt);
    let sqrt_pv: Array1<f64> = alloc.p_v.mapv(f64::sqrt);
    let mut acc = LeakMoments {
        sum_log: vec![0.0; j_n * k_n],
        sum_f2: vec![0.0; j_n * k_n],
        sum_z2: vec![0.0; j_n],
        draws: 0,
    };
    let mut f2 = vec![0.0; k_n];
    for _ in 0..draws {
        let (g, g_eve) = draw_channels(net, rng);
        let ghat = estimate_channels(&g, pilots, stats, rng);
        let v: Vec<Complex64> = (0..m_n).map(|_| standard_complex(rng)).collect();
        for j in 0..j_n {
            for (kp, slot) in f2.iter_mut().enumerate() {
                let mut f = Complex64::default();
                for m in 0..m_n {
                    f += sqrt_p[(m, kp)] * ghat[(m, kp)].conj() * g_eve[(m, j)];
                }
                *slot = f.norm_sqr();
                acc.sum_f2[j * k_n + kp] += *slot;
            }
            let mut z = Complex64::default();
            for m in 0..m_n {
                z += sqrt_pv[m] * g_eve[(m, j)] * v[m];
            }
            let z2 = z.norm_sqr();
            acc.sum_z2[j] += z2;
            let total: f64 = f2.iter().sum();
            for k in 0..k_n {
                let denom = total - f2[k] + z2 + 1.0;
                acc.sum_log[j * k_n + k] += (1.0 + f2[k] / denom).log2();
            }
        }
        acc.draws += 1;
    }
    acc
}

/// Monte-Carlo counterpart of [`leakage_rate_bound`]: averages the
/// instantaneous `log2(1 + SINR^e_jk)` over joint channel/estimate draws and
/// reports the first moments used by the closed form. Empty for `J = 0`.
pub fn mc_validate_leakage(
    alloc: &PowerAllocation,
    stats: &ChannelStats,
    pilots: &PilotConfig,
    net: &NetworkRealization,
    num_draws: usize,
    rng: &mut impl Rng,
) -> Result<McLeakageReport> {
    alloc.validate()?;
    let (k_n, j_n) = (net.num_users(), net.num_eves());
    if j_n == 0 {
        return Ok(McLeakageReport {
            rate: Array2::zeros((0, k_n)),
            rate_se: Array2::zeros((0, k_n)),
            leak_signal: Array2::zeros((0, k_n)),
            an_power: Array1::zeros(0),
            num_draws: 0,
        });
    }
    let (batches, per_batch) = batch_layout(num_draws);
    let seeds: Vec<u64> = (0..batches).map(|_| rng.gen()).collect();

    use rayon::prelude::*;
    let parts: Vec<LeakMoments> = seeds
        .par_iter()
        .map(|&s| {
            let mut brng = ChaCha8Rng::seed_from_u64(s);
            accumulate_leak_draws(alloc, stats, pilots, net, per_batch, &mut brng)
        })
        .collect();

    let total_draws: usize = parts.iter().map(|p| p.draws).sum();
    let n = total_draws as f64;
    let mut rate = Array2::zeros((j_n, k_n));
    let mut rate_se = Array2::zeros((j_n, k_n));
    let mut leak_signal = Array2::zeros((j_n, k_n));
    let mut an_power = Array1::zeros(j_n);
    for j in 0..j_n {
        for k in 0..k_n {
            let idx = j * k_n + k;
            let overall: f64 = parts.iter().map(|p| p.sum_log[idx]).sum::<f64>() / n;
            rate[(j, k)] = overall;
            let means: Vec<f64> = parts
                .iter()
                .map(|p| p.sum_log[idx] / p.draws as f64)
                .collect();
            let mean = means.iter().sum::<f64>() / batches as f64;
            let var =
                means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
            rate_se[(j, k)] = (var / batches as f64).sqrt();
            leak_signal[(j, k)] = parts.iter().map(|p| p.sum_f2[idx]).sum::<f64>() / n;
        }
        an_power[j] = parts.iter().map(|p| p.sum_z2[j]).sum::<f64>() / n;
    }

    Ok(McLeakageReport {
        rate,
        rate_se,
        leak_signal,
        an_power,
        num_draws: total_draws,
    })
}

/// Random allocation satisfying the per-AP budget: each AP spreads a random
/// fraction of `p_t` over its K data slots and the AN slot. Links with
/// `gamma = 0` get no data power.
pub fn random_feasible_allocation(
    stats: &ChannelStats,
    p_t: f64,
    rng: &mut impl Rng,
) -> PowerAllocation {
    let (m_n, k_n) = stats.gamma.dim();
    let mut alloc = PowerAllocation::zeros(m_n, k_n);
    for m in 0..m_n {
        let weights: Vec<f64> = (0..=k_n)
            .map(|_| -(rng.gen_range(1e-12..1.0f64)).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        let usage: f64 = rng.gen_range(0.05..1.0);
        for k in 0..k_n {
            let gamma = stats.gamma[(m, k)];
            if gamma > 0.0 {
                alloc.p[(m, k)] = usage * weights[k] / total * p_t / gamma;
            }
        }
        alloc.p_v[m] = usage * weights[k_n] / total * p_t;
    }
    alloc
}
