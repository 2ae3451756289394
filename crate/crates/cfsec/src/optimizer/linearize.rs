//! Convex surrogates of the two rate bounds around an expansion point.
//!
//! Write the user bound as `log2(1 + x^2 / y)` with `x = sqrt(DS_k)` and
//! `y = IN_k` (the interference-plus-noise denominator). The function
//! `-log2(1 - x^2 / z)` with `z = x^2 + y` is jointly convex for `x >= 0`,
//! `z > x^2`, so its tangent plane at the expansion point, pulled back to
//! `(x, y)` coordinates, is a global lower bound:
//!
//! ```text
//! log2(1 + x^2/y) >= R0 + C * ( (2x - x0)/x0 - y/y0 - (x - x0)^2/y0 )
//! C = (1/ln 2) * SINR0 / (1 + SINR0)
//! ```
//!
//! The quadratic term carries a minus sign; dropping it would overshoot the
//! true rate on a large part of the feasible box, so it is kept and handled
//! with one rotated-cone epigraph per user in the subproblem. The expression
//! is tight (value and gradient) at the expansion point and concave in
//! `(x, y)`, hence conic-representable.
//!
//! The leakage bound `log2(1 + x/y)` with `x = LS_jk`, `y = IN^e_jk` is
//! replaced by its first-order Taylor expansion
//!
//! ```text
//! R0 + B * ( x/x0 - y/y0 ),   B = (1/ln 2) * SINR0 / (1 + SINR0)
//! ```
//!
//! which matches value and gradient at the expansion point but is *not* a
//! one-sided bound; the SCA driver therefore always re-evaluates the true
//! rates at the final allocation.

use ndarray::{Array1, Array2};

use crate::channel::ChannelStats;
use crate::network::NetworkRealization;
use crate::rates::{PowerAllocation, SinrDecomposition};
use crate::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Concave minorant of `Rbar_k` around one expansion point.
///
/// With a degenerate expansion point (zero desired signal) the surrogate
/// collapses to the trivial bound `Rbar_k >= 0`.
#[derive(Debug, Clone)]
pub struct UserRateSurrogate {
    pub k: usize,
    pub degenerate: bool,
    /// `Rbar_k` at the expansion point.
    pub r0: f64,
    /// `C = SINR0 / ((1 + SINR0) ln 2)`.
    pub coef: f64,
    /// `x0 = sqrt(DS_k)` at the expansion point.
    pub sqrt_ds0: f64,
    /// `y0 = IN_k` at the expansion point.
    pub in0: f64,
    /// Coefficient of `sqrt(p_mk)` in `x`: the column `gamma[:, k]`.
    pub x_coef: Array1<f64>,
    /// Coefficient of `p_mk'` in `y`: `gamma_mk' * beta_mk`, all columns.
    pub in_coef_p: Array2<f64>,
    /// Coefficient of `p_mv` in `y`: `beta[:, k]`.
    pub in_coef_pv: Array1<f64>,
}

impl UserRateSurrogate {
    /// Surrogate value at an allocation, with the auxiliaries at their tight
    /// setting `u = sqrt(p)`.
    pub fn evaluate(&self, alloc: &PowerAllocation) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        let x = self.sqrt_ds(alloc);
        let y = self.interference(alloc);
        self.value_at(x, y)
    }

    /// Surrogate as a function of the transformed coordinates.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        let (x0, y0) = (self.sqrt_ds0, self.in0);
        self.r0
            + self.coef * ((2.0 * x - x0) / x0 - y / y0 - (x - x0) * (x - x0) / y0)
    }

    pub fn sqrt_ds(&self, alloc: &PowerAllocation) -> f64 {
        self.x_coef
            .iter()
            .zip(alloc.p.column(self.k).iter())
            .map(|(&g, &p)| g * p.sqrt())
            .sum()
    }

    pub fn interference(&self, alloc: &PowerAllocation) -> f64 {
        let mut y = 1.0;
        for (c, &p) in self.in_coef_p.iter().zip(alloc.p.iter()) {
            y += c * p;
        }
        for (c, &pv) in self.in_coef_pv.iter().zip(alloc.p_v.iter()) {
            y += c * pv;
        }
        y
    }
}

/// Affine first-order model of `Rbar^e_jk` around one expansion point.
///
/// Degenerate expansion (zero leakage signal) collapses the constraint to
/// `omega_jk >= 0`.
#[derive(Debug, Clone)]
pub struct LeakageSurrogate {
    pub j: usize,
    pub k: usize,
    pub degenerate: bool,
    pub r0: f64,
    /// `B = SINR0^e / ((1 + SINR0^e) ln 2)`.
    pub coef: f64,
    /// `LS_jk` at the expansion point.
    pub ls0: f64,
    /// `IN^e_jk` at the expansion point.
    pub ine0: f64,
    /// Coefficient of `p_mk` in `LS_jk`: `gamma_mk * beta_eve_mj`.
    pub ls_coef_p: Array1<f64>,
    /// Coefficient of `p_mk'`, `k' != k`, in `IN^e` (column `k` is zero).
    pub ine_coef_p: Array2<f64>,
    /// Coefficient of `p_mv` in `IN^e`: `beta_eve[:, j]`.
    pub ine_coef_pv: Array1<f64>,
}

impl LeakageSurrogate {
    pub fn evaluate(&self, alloc: &PowerAllocation) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        let ls = self.leak_signal(alloc);
        let ine = self.interference(alloc);
        self.r0 + self.coef * (ls / self.ls0 - ine / self.ine0)
    }

    pub fn leak_signal(&self, alloc: &PowerAllocation) -> f64 {
        self.ls_coef_p
            .iter()
            .zip(alloc.p.column(self.k).iter())
            .map(|(&c, &p)| c * p)
            .sum()
    }

    pub fn interference(&self, alloc: &PowerAllocation) -> f64 {
        let mut y = 1.0;
        for (c, &p) in self.ine_coef_p.iter().zip(alloc.p.iter()) {
            y += c * p;
        }
        for (c, &pv) in self.ine_coef_pv.iter().zip(alloc.p_v.iter()) {
            y += c * pv;
        }
        y
    }
}

/// Build the user-rate minorant for user `k` at the expansion point
/// `alloc_n`.
pub fn linearize_user_rate(
    alloc_n: &PowerAllocation,
    stats: &ChannelStats,
    net: &NetworkRealization,
    k: usize,
) -> Result<UserRateSurrogate> {
    if k >= net.num_users() {
        return Err(Error::Dimension(format!("user index {k} out of range")));
    }
    let terms = SinrDecomposition::compute(alloc_n, stats, net)?;
    let (m_n, k_n) = stats.gamma.dim();

    let x_coef = stats.gamma.column(k).to_owned();
    let mut in_coef_p = Array2::zeros((m_n, k_n));
    for m in 0..m_n {
        for kp in 0..k_n {
            in_coef_p[(m, kp)] = stats.gamma[(m, kp)] * net.beta[(m, k)];
        }
    }
    let in_coef_pv = net.beta.column(k).to_owned();

    let ds0 = terms.ds[k];
    let in0 = terms.user_interference(k);
    if ds0 <= 0.0 {
        return Ok(UserRateSurrogate {
            k,
            degenerate: true,
            r0: 0.0,
            coef: 0.0,
            sqrt_ds0: 0.0,
            in0,
            x_coef,
            in_coef_p,
            in_coef_pv,
        });
    }
    let sinr0 = ds0 / in0;
    Ok(UserRateSurrogate {
        k,
        degenerate: false,
        r0: (1.0 + sinr0).log2(),
        coef: sinr0 / ((1.0 + sinr0) * LN2),
        sqrt_ds0: ds0.sqrt(),
        in0,
        x_coef,
        in_coef_p,
        in_coef_pv,
    })
}

/// Build the leakage Taylor model for pair `(j, k)` at the expansion point.
pub fn linearize_leakage_rate(
    alloc_n: &PowerAllocation,
    stats: &ChannelStats,
    net: &NetworkRealization,
    j: usize,
    k: usize,
) -> Result<LeakageSurrogate> {
    if j >= net.num_eves() || k >= net.num_users() {
        return Err(Error::Dimension(format!(
            "eavesdropper/user index ({j}, {k}) out of range"
        )));
    }
    let terms = SinrDecomposition::compute(alloc_n, stats, net)?;
    let (m_n, k_n) = stats.gamma.dim();

    let mut ls_coef_p = Array1::zeros(m_n);
    for m in 0..m_n {
        ls_coef_p[m] = stats.gamma[(m, k)] * net.beta_eve[(m, j)];
    }
    let mut ine_coef_p = Array2::zeros((m_n, k_n));
    for m in 0..m_n {
        for kp in 0..k_n {
            if kp != k {
                ine_coef_p[(m, kp)] = stats.gamma[(m, kp)] * net.beta_eve[(m, j)];
            }
        }
    }
    let ine_coef_pv = net.beta_eve.column(j).to_owned();

    let ls0 = terms.ls[(j, k)];
    let ine0 = terms.leakage_interference(j, k);
    if ls0 <= 0.0 {
        return Ok(LeakageSurrogate {
            j,
            k,
            degenerate: true,
            r0: 0.0,
            coef: 0.0,
            ls0: 0.0,
            ine0,
            ls_coef_p,
            ine_coef_p,
            ine_coef_pv,
        });
    }
    let sinr0 = ls0 / ine0;
    Ok(LeakageSurrogate {
        j,
        k,
        degenerate: false,
        r0: (1.0 + sinr0).log2(),
        coef: sinr0 / ((1.0 + sinr0) * LN2),
        ls0,
        ine0,
        ls_coef_p,
        ine_coef_p,
        ine_coef_pv,
    })
}
