//! Monte-Carlo experiment harness.
//!
//! Draws independent network realizations, runs the selected power-control
//! schemes on each and aggregates the minimum secrecy rate into empirical
//! CDFs and outage probabilities. Realizations execute in whatever Rayon
//! pool is current; per-realization RNG streams are derived from the master
//! seed by a fixed rule, so serial and parallel executions produce identical
//! results.

use std::time::Instant;

use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{heuristic_init, run_an_sca, run_maxmin_rate, run_no_an};
use crate::channel::{lmmse_stats, PilotConfig};
use crate::network::{deploy, DeploymentConfig};
use crate::optimizer::{ScaConfig, ScaTrace};
use crate::rates::secrecy_report;
use crate::{Error, Result};

/// Power-control scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Proposed AN-aided SCA.
    AnSca,
    /// Proposed SCA with AN disabled.
    NoAnSca,
    /// Security-oblivious max-min user rate.
    MaxminRate,
    /// Heuristic initializer alone, no optimization.
    HeuristicOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::AnSca,
        Scheme::NoAnSca,
        Scheme::MaxminRate,
        Scheme::HeuristicOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::AnSca => "an_sca",
            Scheme::NoAnSca => "no_an_sca",
            Scheme::MaxminRate => "maxmin_rate",
            Scheme::HeuristicOnly => "heuristic_only",
        }
    }

    pub fn from_name(name: &str) -> Option<Scheme> {
        Scheme::ALL.iter().copied().find(|s| s.name() == name)
    }

    fn run(
        self,
        stats: &crate::channel::ChannelStats,
        net: &crate::network::NetworkRealization,
        cfg: &ScaConfig,
    ) -> Result<ScaTrace> {
        match self {
            Scheme::AnSca => run_an_sca(stats, net, cfg),
            Scheme::NoAnSca => run_no_an(stats, net, cfg),
            Scheme::MaxminRate => run_maxmin_rate(stats, net, cfg),
            Scheme::HeuristicOnly => {
                let alloc = heuristic_init(stats, net, cfg.p_t)?;
                let report = secrecy_report(&alloc, stats, net)?;
                Ok(ScaTrace {
                    t_values: vec![0.0],
                    surrogate_t_values: vec![0.0],
                    allocations: vec![alloc],
                    converged: true,
                    iterations_used: 0,
                    final_t: 0.0,
                    final_report: report,
                    solver_failure: None,
                })
            }
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub deployment: DeploymentConfig,
    pub pilots: PilotConfig,
    pub sca: ScaConfig,
    pub schemes: Vec<Scheme>,
    pub num_realizations: usize,
    pub master_seed: u64,
    /// Multiplier applied to reported rates (1, or `tau_d / tau_c` when the
    /// pre-log factor is requested at configuration time).
    pub rate_scale: f64,
    /// Measure per-run wall time. Disable to make result files byte-stable
    /// across reruns.
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.deployment.validate()?;
        self.pilots.validate(self.deployment.num_users)?;
        self.sca.validate()?;
        if self.num_realizations == 0 {
            return Err(Error::Config("need at least one realization".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("scheme list must not be empty".into()));
        }
        if !(self.rate_scale > 0.0) {
            return Err(Error::Config("rate_scale must be positive".into()));
        }
        Ok(())
    }
}

/// One scheme's outcome on one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationOutcome {
    pub realization_id: usize,
    pub scheme: Scheme,
    pub min_secrecy: f64,
    pub min_user_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_ms: u64,
}

/// Aggregates for one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    /// Right-continuous step CDF of the minimum secrecy rate.
    pub cdf: Vec<(f64, f64)>,
    /// Probability of zero minimum secrecy rate (the CDF atom at 0).
    pub outage: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// One row per (realization, scheme), realization-major, scheme order as
    /// configured. Failed realizations contribute no rows.
    pub rows: Vec<RealizationOutcome>,
    pub summaries: Vec<SchemeSummary>,
    /// Realizations dropped because a solver gave up on some scheme.
    pub failed_realizations: Vec<usize>,
}

/// Fixed, documented seed-derivation rule: ChaCha8 keyed with the master
/// seed, the realization index and a domain tag.
pub fn realization_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&index.to_le_bytes());
    seed[16..].copy_from_slice(b"cfsec-mc-stream!");
    ChaCha8Rng::from_seed(seed)
}

struct RealizationRows {
    id: usize,
    rows: Vec<RealizationOutcome>,
    failed: bool,
}

fn run_realization(spec: &ExperimentSpec, id: usize) -> Result<RealizationRows> {
    let mut rng = realization_rng(spec.master_seed, id as u64);
    let net = deploy(&spec.deployment, &mut rng)?;
    let stats = lmmse_stats(&net, &spec.pilots)?;
    let mut rows = Vec::with_capacity(spec.schemes.len());
    for &scheme in &spec.schemes {
        let start = Instant::now();
        let trace = scheme.run(&stats, &net, &spec.sca)?;
        let wall_ms = if spec.record_timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        if trace.solver_failure.is_some() {
            return Ok(RealizationRows {
                id,
                rows: Vec::new(),
                failed: true,
            });
        }
        rows.push(RealizationOutcome {
            realization_id: id,
            scheme,
            min_secrecy: trace.final_report.min_secrecy * spec.rate_scale,
            min_user_rate: trace.final_report.min_user_rate * spec.rate_scale,
            iterations: trace.iterations_used,
            converged: trace.converged,
            wall_ms,
        });
    }
    Ok(RealizationRows {
        id,
        rows,
        failed: false,
    })
}

/// Run the full experiment. Realizations are independent Rayon work items;
/// rows are assembled in realization order, so the output is identical for
/// any worker-thread count. Fails with [`Error::ExcessiveFailures`] when
/// more than 5% of realizations lose their solver.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let per_realization: Vec<Result<RealizationRows>> = (0..spec.num_realizations)
        .into_par_iter()
        .map(|i| run_realization(spec, i))
        .collect();

    let mut rows = Vec::new();
    let mut failed_realizations = Vec::new();
    for item in per_realization {
        let item = item?;
        if item.failed {
            failed_realizations.push(item.id);
        } else {
            rows.extend(item.rows);
        }
    }
    if failed_realizations.len() * 20 > spec.num_realizations {
        return Err(Error::ExcessiveFailures {
            failed: failed_realizations.len(),
            total: spec.num_realizations,
        });
    }

    let summaries = summarize(&rows, &spec.schemes);
    Ok(ExperimentResult {
        rows,
        summaries,
        failed_realizations,
    })
}

/// Per-scheme CDF/outage aggregation of result rows.
pub fn summarize(rows: &[RealizationOutcome], schemes: &[Scheme]) -> Vec<SchemeSummary> {
    schemes
        .iter()
        .map(|&scheme| {
            let samples: Vec<f64> = rows
                .iter()
                .filter(|r| r.scheme == scheme)
                .map(|r| r.min_secrecy)
                .collect();
            let cdf = empirical_cdf(&samples);
            SchemeSummary {
                scheme,
                outage: outage_probability(&samples),
                samples: samples.len(),
                cdf,
            }
        })
        .collect()
}

/// Right-continuous step CDF over the distinct sample values, including the
/// atom at zero when present.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    if samples.is_empty() {
        return Vec::new();
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("rates must not be NaN"));
    let n = sorted.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let prob = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == v => last.1 = prob,
            _ => points.push((v, prob)),
        }
    }
    points
}

/// Fraction of samples exactly at zero: the CDF atom at the origin.
pub fn outage_probability(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|&&v| v == 0.0).count() as f64 / samples.len() as f64
}

/// Evaluate a step CDF at `r` (right-continuous).
pub fn cdf_value(cdf: &[(f64, f64)], r: f64) -> f64 {
    let mut value = 0.0;
    for &(x, p) in cdf {
        if x <= r {
            value = p;
        } else {
            break;
        }
    }
    value
}

/// Outcome of a first-order stochastic-dominance comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// `F_a(r) <= F_b(r) + slack` everywhere on the merged support.
    pub holds: bool,
    /// Largest `F_a(r) - F_b(r)` observed.
    pub max_violation: f64,
    /// Rate at which the largest violation occurs.
    pub at_rate: f64,
}

/// Check whether distribution `a` first-order dominates distribution `b`
/// (its CDF lies below) up to `slack`, on the union of both supports.
pub fn stochastic_dominance_check(
    cdf_a: &[(f64, f64)],
    cdf_b: &[(f64, f64)],
    slack: f64,
) -> DominanceReport {
    let mut grid: Vec<f64> = cdf_a.iter().chain(cdf_b.iter()).map(|&(x, _)| x).collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    grid.dedup();
    let mut max_violation = f64::NEG_INFINITY;
    let mut at_rate = f64::NAN;
    for &r in &grid {
        let diff = cdf_value(cdf_a, r) - cdf_value(cdf_b, r);
        if diff > max_violation {
            max_violation = diff;
            at_rate = r;
        }
    }
    if grid.is_empty() {
        max_violation = 0.0;
        at_rate = 0.0;
    }
    DominanceReport {
        holds: max_violation <= slack,
        max_violation,
        at_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            deployment: DeploymentConfig {
                num_aps: 6,
                num_users: 2,
                num_eves: 1,
                ..DeploymentConfig::default()
            },
            pilots: PilotConfig {
                tau_p: 2,
                p_p: 5.023772863019164e11,
            },
            sca: ScaConfig::default(),
            schemes: vec![Scheme::AnSca, Scheme::MaxminRate],
            num_realizations: 3,
            master_seed: 42,
            rate_scale: 1.0,
            record_timing: false,
        }
    }

    #[test]
    fn cdf_definition_examples() {
        let cdf = empirical_cdf(&[0.0, 0.0, 1.0, 2.0]);
        assert_eq!(cdf, vec![(0.0, 0.5), (1.0, 0.75), (2.0, 1.0)]);
        assert_eq!(outage_probability(&[0.0, 0.0, 1.0, 2.0]), 0.5);

        let flat = empirical_cdf(&[3.0, 3.0, 3.0]);
        assert_eq!(flat, vec![(3.0, 1.0)]);

        let cdf = empirical_cdf(&[0.4, 0.1, 0.9, 0.1]);
        for w in cdf.windows(2) {
            assert!(w[1].0 > w[0].0 && w[1].1 >= w[0].1);
        }
        assert_eq!(cdf.last().unwrap().1, 1.0);
    }

    #[test]
    fn dominance_basics() {
        let a = empirical_cdf(&[1.0, 2.0, 3.0]);
        let same = stochastic_dominance_check(&a, &a, 0.0);
        assert!(same.holds);
        assert_eq!(same.max_violation, 0.0);

        let worse = empirical_cdf(&[0.0, 1.0, 2.0]);
        assert!(stochastic_dominance_check(&a, &worse, 0.0).holds);
        let rep = stochastic_dominance_check(&worse, &a, 0.0);
        assert!(!rep.holds && rep.max_violation > 0.0);
    }

    #[test]
    fn seed_rule_is_stable_and_distinct() {
        use rand::RngCore;
        let mut a = realization_rng(7, 0);
        let mut b = realization_rng(7, 0);
        assert_eq!(a.next_u64(), b.next_u64());
        let mut c = realization_rng(7, 1);
        let mut d = realization_rng(8, 0);
        let base = realization_rng(7, 0).next_u64();
        assert_ne!(base, c.next_u64());
        assert_ne!(base, d.next_u64());
    }

    #[test]
    fn experiment_is_deterministic_across_thread_counts() {
        let spec = tiny_spec();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_experiment(&spec))
            .unwrap();
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_experiment(&spec))
            .unwrap();
        assert_eq!(serial, parallel);
        let again = run_experiment(&spec).unwrap();
        assert_eq!(serial, again);
    }

    #[test]
    fn maxmin_without_eves_has_no_outage() {
        let mut spec = tiny_spec();
        spec.deployment.num_eves = 0;
        spec.schemes = vec![Scheme::MaxminRate];
        let result = run_experiment(&spec).unwrap();
        assert!(result.rows.iter().all(|r| r.min_user_rate > 0.0));
        assert_eq!(result.summaries[0].outage, 0.0);
    }

    #[test]
    fn rows_are_realization_major() {
        let spec = tiny_spec();
        let result = run_experiment(&spec).unwrap();
        assert_eq!(result.rows.len(), 6);
        for (i, row) in result.rows.iter().enumerate() {
            assert_eq!(row.realization_id, i / 2);
            assert_eq!(row.scheme, spec.schemes[i % 2]);
            assert_eq!(row.wall_ms, 0);
        }
        assert!(result.failed_realizations.is_empty());
    }

    #[test]
    fn rate_scale_multiplies_reported_rates() {
        let spec = tiny_spec();
        let mut scaled = spec.clone();
        scaled.rate_scale = 0.5;
        let base = run_experiment(&spec).unwrap();
        let half = run_experiment(&scaled).unwrap();
        for (a, b) in base.rows.iter().zip(half.rows.iter()) {
            assert!((b.min_secrecy - 0.5 * a.min_secrecy).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = tiny_spec();
        spec.num_realizations = 0;
        assert!(run_experiment(&spec).is_err());
        let mut spec = tiny_spec();
        spec.schemes.clear();
        assert!(run_experiment(&spec).is_err());
    }
}
