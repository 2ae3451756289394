//! Assembly of the per-iteration conic subproblem.
//!
//! Maximize `t` subject to, for every eavesdropper/user pair, the user-rate
//! minorant staying at least `t + omega_jk` and the leakage Taylor model
//! staying below `omega_jk`; per-AP power budgets; nonnegativity; and the
//! cone couplings that make the square roots and the quadratic correction of
//! the minorant conic. With no eavesdroppers the pair constraints collapse
//! to plain max-min rate (`minorant_k >= t`, no `omega`).
//!
//! Decision variables, in scaled units chosen so every variable is O(1):
//!
//! ```text
//! x_mk   = p_mk * gamma_mk / p_t     data power, per-link budget fraction
//! y_m    = p_mv / p_t                AN power fraction
//! u_mk   with u^2 <= x               stands in for sqrt(x_mk)
//! w_k    >= (X_k - x0_k)^2           quadratic correction epigraph,
//!                                    X_k = sum_m sqrt(gamma_mk p_t) u_mk
//! omega_jk                           leakage slack
//! t                                  objective
//! ```
//!
//! Both quadratic couplings are 3-dimensional second-order cones. Fixed
//! variables (AN powers when AN is disabled, `w_k` for a degenerate user) are
//! pinned with equality rows so the variable layout never changes shape.

use ndarray::Array2;

use crate::channel::ChannelStats;
use crate::network::NetworkRealization;
use crate::optimizer::linearize::{
    linearize_leakage_rate, linearize_user_rate, LeakageSurrogate, UserRateSurrogate,
};
use crate::optimizer::ScaConfig;
use crate::rates::PowerAllocation;
use crate::{Error, Result};

/// One linear constraint row `sum coeff * var (<=, =) rhs`, or one slack row
/// of a second-order-cone block (`s = rhs - sum coeff * var`).
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Row {
    fn dot(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * x[i]).sum()
    }
}

/// Variable offsets for the scaled subproblem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct VarLayout {
    pub m: usize,
    pub k: usize,
    pub j: usize,
}

impl VarLayout {
    pub fn x(&self, m: usize, k: usize) -> usize {
        m * self.k + k
    }
    pub fn y(&self, m: usize) -> usize {
        self.m * self.k + m
    }
    pub fn u(&self, m: usize, k: usize) -> usize {
        self.m * self.k + self.m + m * self.k + k
    }
    pub fn w(&self, k: usize) -> usize {
        2 * self.m * self.k + self.m + k
    }
    pub fn omega(&self, j: usize, k: usize) -> usize {
        2 * self.m * self.k + self.m + self.k + j * self.k + k
    }
    pub fn t(&self) -> usize {
        2 * self.m * self.k + self.m + self.k + self.j * self.k
    }
    pub fn total(&self) -> usize {
        self.t() + 1
    }
}

/// Structural row/cone tally, exposed for introspection and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubproblemCounts {
    pub variables: usize,
    /// Equality pins: AN powers when AN is off, `w` for degenerate users.
    pub equality_rows: usize,
    pub user_rate_rows: usize,
    pub leakage_rows: usize,
    pub power_budget_rows: usize,
    /// Sign constraints on data and AN powers (`MK + M`).
    pub nonnegativity_rows: usize,
    /// 3-dim cones: `MK` square-root couplings plus one quadratic-correction
    /// epigraph per non-degenerate user.
    pub soc_cones: usize,
}

/// The assembled convex subproblem for one SCA iteration.
pub struct ConicSubproblem {
    pub(crate) layout: VarLayout,
    pub(crate) zero_rows: Vec<Row>,
    pub(crate) nonneg_rows: Vec<Row>,
    pub(crate) soc_blocks: Vec<[Row; 3]>,
    /// Per-link power scale `p_t / gamma_mk`.
    pub(crate) sigma: Array2<f64>,
    pub(crate) p_t: f64,
    pub(crate) enable_an: bool,
    pub(crate) counts: SubproblemCounts,
    pub(crate) user_surrogates: Vec<UserRateSurrogate>,
    pub(crate) leakage_surrogates: Vec<LeakageSurrogate>,
    pub(crate) expansion: PowerAllocation,
}

impl ConicSubproblem {
    pub fn num_vars(&self) -> usize {
        self.layout.total()
    }

    pub fn counts(&self) -> SubproblemCounts {
        self.counts
    }

    /// Objective vector of `minimize q'v` (the solver minimizes `-t`).
    pub(crate) fn objective(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.layout.total()];
        q[self.layout.t()] = -1.0;
        q
    }

    /// Map a solver point back to raw powers and the achieved `t`.
    pub(crate) fn extract(&self, v: &[f64]) -> (PowerAllocation, f64) {
        let lay = self.layout;
        let mut alloc = PowerAllocation::zeros(lay.m, lay.k);
        for m in 0..lay.m {
            for k in 0..lay.k {
                alloc.p[(m, k)] = v[lay.x(m, k)].max(0.0) * self.sigma[(m, k)];
            }
            if self.enable_an {
                alloc.p_v[m] = v[lay.y(m)].max(0.0) * self.p_t;
            }
        }
        (alloc, v[lay.t()])
    }

    /// The expansion point lifted into the scaled variable space, with
    /// `u = sqrt(x)`, `w = 0`, `omega` at the expansion leakage values and
    /// `t` at the expansion min gap. This point is feasible by construction,
    /// which is what makes the SCA objective non-decreasing.
    pub fn incumbent_point(&self) -> Vec<f64> {
        let lay = self.layout;
        let mut v = vec![0.0; lay.total()];
        for m in 0..lay.m {
            for k in 0..lay.k {
                let x = self.expansion.p[(m, k)] / self.sigma[(m, k)];
                v[lay.x(m, k)] = x;
                v[lay.u(m, k)] = x.sqrt();
            }
            v[lay.y(m)] = if self.enable_an {
                self.expansion.p_v[m] / self.p_t
            } else {
                0.0
            };
        }
        let mut t = f64::INFINITY;
        if lay.j == 0 {
            for sur in &self.user_surrogates {
                t = t.min(if sur.degenerate { 0.0 } else { sur.r0 });
            }
        } else {
            for sur in &self.leakage_surrogates {
                v[lay.omega(sur.j, sur.k)] = sur.r0;
                let user_r0 = if self.user_surrogates[sur.k].degenerate {
                    0.0
                } else {
                    self.user_surrogates[sur.k].r0
                };
                t = t.min(user_r0 - sur.r0);
            }
        }
        v[lay.t()] = t;
        v
    }

    /// Largest constraint violation of a point in the scaled space.
    /// Nonnegative rows count `lhs - rhs`, equality rows `|lhs - rhs|`, cone
    /// blocks `||tail|| - head`.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for row in &self.zero_rows {
            worst = worst.max((row.dot(v) - row.rhs).abs());
        }
        for row in &self.nonneg_rows {
            worst = worst.max(row.dot(v) - row.rhs);
        }
        for block in &self.soc_blocks {
            let s: Vec<f64> = block.iter().map(|r| r.rhs - r.dot(v)).collect();
            worst = worst.max((s[1] * s[1] + s[2] * s[2]).sqrt() - s[0]);
        }
        worst
    }
}

/// Build the subproblem around the expansion point `alloc_n`.
pub fn build_subproblem(
    alloc_n: &PowerAllocation,
    stats: &ChannelStats,
    net: &NetworkRealization,
    cfg: &ScaConfig,
) -> Result<ConicSubproblem> {
    let (m_n, k_n, j_n) = (net.num_aps(), net.num_users(), net.num_eves());
    if stats.gamma.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Config(
            "power control requires strictly positive estimate qualities".into(),
        ));
    }
    if !(cfg.p_t > 0.0) {
        return Err(Error::Config("power budget must be positive".into()));
    }
    let lay = VarLayout {
        m: m_n,
        k: k_n,
        j: j_n,
    };

    let user_surrogates: Vec<UserRateSurrogate> = (0..k_n)
        .map(|k| linearize_user_rate(alloc_n, stats, net, k))
        .collect::<Result<_>>()?;
    let mut leakage_surrogates = Vec::with_capacity(j_n * k_n);
    for j in 0..j_n {
        for k in 0..k_n {
            leakage_surrogates.push(linearize_leakage_rate(alloc_n, stats, net, j, k)?);
        }
    }

    let sigma = stats.gamma.mapv(|g| cfg.p_t / g);
    // sqrt(DS) in scaled coordinates: X_k = sum_m d[(m,k)] u_mk
    let d = {
        let mut d = Array2::zeros((m_n, k_n));
        for m in 0..m_n {
            for k in 0..k_n {
                d[(m, k)] = stats.gamma[(m, k)] * sigma[(m, k)].sqrt();
            }
        }
        d
    };

    let mut zero_rows = Vec::new();
    if !cfg.enable_an {
        for m in 0..m_n {
            zero_rows.push(Row {
                coeffs: vec![(lay.y(m), 1.0)],
                rhs: 0.0,
            });
        }
    }
    for sur in &user_surrogates {
        if sur.degenerate {
            zero_rows.push(Row {
                coeffs: vec![(lay.w(sur.k), 1.0)],
                rhs: 0.0,
            });
        }
    }

    let mut nonneg_rows = Vec::new();
    // per-AP budget: sum_k x_mk + y_m <= 1
    for m in 0..m_n {
        let mut coeffs: Vec<(usize, f64)> = (0..k_n).map(|k| (lay.x(m, k), 1.0)).collect();
        coeffs.push((lay.y(m), 1.0));
        nonneg_rows.push(Row { coeffs, rhs: 1.0 });
    }
    let power_budget_rows = m_n;

    // user-rate rows: t (+ omega_jk) <= minorant_k
    let mut user_rate_rows = 0;
    let user_row = |sur: &UserRateSurrogate, omega: Option<usize>| -> Row {
        let mut coeffs = vec![(lay.t(), 1.0)];
        if let Some(idx) = omega {
            coeffs.push((idx, 1.0));
        }
        if sur.degenerate {
            return Row { coeffs, rhs: 0.0 };
        }
        let (x0, y0, c) = (sur.sqrt_ds0, sur.in0, sur.coef);
        for m in 0..m_n {
            coeffs.push((lay.u(m, sur.k), -2.0 * c / x0 * d[(m, sur.k)]));
        }
        coeffs.push((lay.w(sur.k), c / y0));
        for m in 0..m_n {
            for kp in 0..k_n {
                let raw = sur.in_coef_p[(m, kp)];
                if raw != 0.0 {
                    coeffs.push((lay.x(m, kp), c / y0 * raw * sigma[(m, kp)]));
                }
            }
            let raw_pv = sur.in_coef_pv[m];
            if raw_pv != 0.0 {
                coeffs.push((lay.y(m), c / y0 * raw_pv * cfg.p_t));
            }
        }
        Row {
            coeffs,
            rhs: sur.r0 - c * (1.0 + 1.0 / y0),
        }
    };
    if j_n == 0 {
        for sur in &user_surrogates {
            nonneg_rows.push(user_row(sur, None));
            user_rate_rows += 1;
        }
    } else {
        for j in 0..j_n {
            for sur in &user_surrogates {
                nonneg_rows.push(user_row(sur, Some(lay.omega(j, sur.k))));
                user_rate_rows += 1;
            }
        }
    }

    // leakage rows: taylor_jk <= omega_jk
    let mut leakage_rows = 0;
    for sur in &leakage_surrogates {
        let omega = lay.omega(sur.j, sur.k);
        if sur.degenerate {
            nonneg_rows.push(Row {
                coeffs: vec![(omega, -1.0)],
                rhs: 0.0,
            });
        } else {
            let b = sur.coef;
            let mut coeffs = vec![(omega, -1.0)];
            for m in 0..m_n {
                let mut on_k = b / sur.ls0 * sur.ls_coef_p[m] * sigma[(m, sur.k)];
                for kp in 0..k_n {
                    let raw = sur.ine_coef_p[(m, kp)];
                    if raw != 0.0 {
                        let v = -b / sur.ine0 * raw * sigma[(m, kp)];
                        if kp == sur.k {
                            on_k += v;
                        } else {
                            coeffs.push((lay.x(m, kp), v));
                        }
                    }
                }
                if on_k != 0.0 {
                    coeffs.push((lay.x(m, sur.k), on_k));
                }
                let raw_pv = sur.ine_coef_pv[m];
                if raw_pv != 0.0 {
                    coeffs.push((lay.y(m), -b / sur.ine0 * raw_pv * cfg.p_t));
                }
            }
            nonneg_rows.push(Row {
                coeffs,
                rhs: -sur.r0 + b / sur.ine0,
            });
        }
        leakage_rows += 1;
    }

    // sign constraints on the raw powers
    for m in 0..m_n {
        for k in 0..k_n {
            nonneg_rows.push(Row {
                coeffs: vec![(lay.x(m, k), -1.0)],
                rhs: 0.0,
            });
        }
    }
    for m in 0..m_n {
        nonneg_rows.push(Row {
            coeffs: vec![(lay.y(m), -1.0)],
            rhs: 0.0,
        });
    }
    let nonnegativity_rows = m_n * k_n + m_n;

    // cones: u_mk^2 <= x_mk, then w_k >= (X_k - x0_k)^2
    let mut soc_blocks = Vec::with_capacity(m_n * k_n + k_n);
    for m in 0..m_n {
        for k in 0..k_n {
            soc_blocks.push([
                Row {
                    coeffs: vec![(lay.x(m, k), -0.5)],
                    rhs: 0.5,
                },
                Row {
                    coeffs: vec![(lay.u(m, k), -1.0)],
                    rhs: 0.0,
                },
                Row {
                    coeffs: vec![(lay.x(m, k), -0.5)],
                    rhs: -0.5,
                },
            ]);
        }
    }
    for sur in &user_surrogates {
        if sur.degenerate {
            continue;
        }
        let mut mid: Vec<(usize, f64)> = Vec::with_capacity(m_n);
        for m in 0..m_n {
            mid.push((lay.u(m, sur.k), -d[(m, sur.k)]));
        }
        soc_blocks.push([
            Row {
                coeffs: vec![(lay.w(sur.k), -0.5)],
                rhs: 0.5,
            },
            Row {
                coeffs: mid,
                rhs: -sur.sqrt_ds0,
            },
            Row {
                coeffs: vec![(lay.w(sur.k), -0.5)],
                rhs: -0.5,
            },
        ]);
    }

    let counts = SubproblemCounts {
        variables: lay.total(),
        equality_rows: zero_rows.len(),
        user_rate_rows,
        leakage_rows,
        power_budget_rows,
        nonnegativity_rows,
        soc_cones: soc_blocks.len(),
    };

    Ok(ConicSubproblem {
        layout: lay,
        zero_rows,
        nonneg_rows,
        soc_blocks,
        sigma,
        p_t: cfg.p_t,
        enable_an: cfg.enable_an,
        counts,
        user_surrogates,
        leakage_surrogates,
        expansion: alloc_n.clone(),
    })
}
