//! Successive convex approximation for max-min secrecy power control.
//!
//! Starting from a strictly positive feasible allocation, each iteration
//! rebuilds the convex surrogates of both rate bounds around the current
//! iterate, solves the resulting second-order-cone program and moves the
//! expansion point toward the solution. The loop stops once `|t_n - t_{n-1}|`
//! falls below the convergence threshold or the iteration cap is hit.
//!
//! The user-rate surrogate is a true minorant, but the leakage side is
//! first-order only, so the raw subproblem optimum can overstate the
//! objective and the bare fixed-point iteration can enter a limit cycle
//! (observed on roughly one desk-scale network in ten). The driver therefore
//! runs a monotone safeguard: a candidate is accepted only if the exact
//! min gap `min_jk (Rbar_k - Rbar^e_jk)` improves, backtracking halfway
//! toward the incumbent otherwise (convex combinations stay feasible since
//! the budget set is convex). The reported `t_n` is the exact min gap of the
//! accepted iterate, which makes the trace non-decreasing by construction
//! and equal to the surrogate gap re-linearized at the final iterate; the
//! optimistic per-solve optimum is kept alongside in
//! [`ScaTrace::surrogate_t_values`].

pub mod linearize;
pub mod solver;
pub mod subproblem;

pub use linearize::{
    linearize_leakage_rate, linearize_user_rate, LeakageSurrogate, UserRateSurrogate,
};
pub use solver::{solve_subproblem, ClarabelSolver, SubproblemSolution, SubproblemSolver};
pub use subproblem::{build_subproblem, ConicSubproblem, SubproblemCounts};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelStats;
use crate::network::NetworkRealization;
use crate::rates::{secrecy_report, PowerAllocation, RateReport};
use crate::{Error, Result};

/// SCA driver parameters. Powers are noise-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaConfig {
    /// Stop once `|t_n - t_{n-1}| <= epsilon` (bits).
    pub epsilon: f64,
    /// Iteration cap; hitting it marks the trace unconverged.
    pub max_iters: usize,
    /// Feasibility/optimality tolerance handed to the conic solver.
    pub solver_tol: f64,
    /// Optimize AN powers; when false they are pinned to zero.
    pub enable_an: bool,
    /// Per-AP transmit budget `p_t`, noise-normalized.
    pub p_t: f64,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            max_iters: 50,
            solver_tol: 1e-8,
            enable_an: true,
            // 100 mW over -94 dBm thermal noise
            p_t: 2.511886431509582e11,
        }
    }
}

impl ScaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.solver_tol > 0.0) || !(self.p_t > 0.0) {
            return Err(Error::Config("solver_tol and p_t must be positive".into()));
        }
        Ok(())
    }
}

/// Full record of one SCA run. `t_values[0]` is the initial `t = 0`;
/// entry `n >= 1` is the exact min gap of the accepted iterate of iteration
/// `n`, and `allocations[n]` the matching iterate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaTrace {
    pub t_values: Vec<f64>,
    /// Raw subproblem optima, before the monotone safeguard.
    pub surrogate_t_values: Vec<f64>,
    pub allocations: Vec<PowerAllocation>,
    pub converged: bool,
    pub iterations_used: usize,
    /// Objective at the final iterate (last entry of `t_values`).
    pub final_t: f64,
    /// Exact bounds re-evaluated at the final allocation.
    pub final_report: RateReport,
    /// Diagnostic when the conic solver gave up; the trace then holds the
    /// last feasible iterate.
    pub solver_failure: Option<String>,
}

impl ScaTrace {
    pub fn final_allocation(&self) -> &PowerAllocation {
        self.allocations.last().expect("trace holds the initializer")
    }
}

/// Exact objective of the max-min problem at one allocation: the smallest
/// unclamped gap `Rbar_k - Rbar^e_jk`, or the smallest user rate when there
/// are no eavesdroppers.
fn exact_min_gap(
    alloc: &PowerAllocation,
    stats: &ChannelStats,
    net: &NetworkRealization,
) -> Result<f64> {
    let report = secrecy_report(alloc, stats, net)?;
    Ok(if net.num_eves() == 0 {
        report.min_user_rate
    } else {
        report.raw_gap.iter().cloned().fold(f64::INFINITY, f64::min)
    })
}

fn blend(a: &PowerAllocation, b: &PowerAllocation, alpha: f64) -> PowerAllocation {
    PowerAllocation {
        p: &a.p * (1.0 - alpha) + &b.p * alpha,
        p_v: &a.p_v * (1.0 - alpha) + &b.p_v * alpha,
    }
}

/// Run the SCA loop from a strictly positive feasible initializer
/// (see [`crate::baselines::heuristic_init`]).
pub fn run_sca(
    initial: &PowerAllocation,
    stats: &ChannelStats,
    net: &NetworkRealization,
    cfg: &ScaConfig,
) -> Result<ScaTrace> {
    cfg.validate()?;
    initial.validate()?;
    if initial.p.iter().any(|&p| p <= 0.0) {
        return Err(Error::Domain(
            "initial data powers must be strictly positive".into(),
        ));
    }
    let budget = initial.budget_used(stats);
    if budget.iter().any(|&b| b > cfg.p_t * (1.0 + 1e-9)) {
        return Err(Error::Domain("initial allocation exceeds the budget".into()));
    }

    let mut current = initial.clone();
    if !cfg.enable_an {
        current.p_v.fill(0.0);
    }
    let mut gap = exact_min_gap(&current, stats, net)?;
    let mut t_values = vec![0.0];
    let mut surrogate_t_values = vec![0.0];
    let mut allocations = vec![current.clone()];
    let mut converged = false;
    let mut solver_failure = None;

    for _ in 1..=cfg.max_iters {
        let sp = build_subproblem(&current, stats, net, cfg)?;
        match solve_subproblem(&sp, cfg) {
            Err(Error::Solver(msg)) => {
                solver_failure = Some(msg);
                break;
            }
            Err(other) => return Err(other),
            Ok((candidate, t_star)) => {
                // Monotone safeguard: accept the first backtracked point
                // that improves the exact objective.
                let mut accepted = None;
                let mut alpha = 1.0;
                for _ in 0..12 {
                    let trial = blend(&current, &candidate, alpha);
                    let trial_gap = exact_min_gap(&trial, stats, net)?;
                    if trial_gap >= gap {
                        accepted = Some((trial, trial_gap));
                        break;
                    }
                    alpha *= 0.5;
                }
                let Some((next, next_gap)) = accepted else {
                    // No direction of improvement left: stationary.
                    converged = true;
                    break;
                };
                current = next;
                if !cfg.enable_an {
                    current.p_v.fill(0.0);
                }
                let t_prev = *t_values.last().expect("nonempty");
                gap = next_gap;
                t_values.push(next_gap);
                surrogate_t_values.push(t_star);
                allocations.push(current.clone());
                if (next_gap - t_prev).abs() <= cfg.epsilon {
                    converged = true;
                    break;
                }
            }
        }
    }

    let final_report = secrecy_report(&current, stats, net)?;
    Ok(ScaTrace {
        final_t: *t_values.last().expect("nonempty"),
        iterations_used: t_values.len() - 1,
        t_values,
        surrogate_t_values,
        allocations,
        converged,
        final_report,
        solver_failure,
    })
}
