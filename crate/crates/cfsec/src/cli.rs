//! Configuration ingestion, unit conversion and the `cfsec` command line.
//!
//! The config file is flat JSON mirroring the simulation-parameter names;
//! every field has a default matching the reference parameter table
//! (1 km square, 1.9 GHz, 10/50 m reference distances, 15/1.65 m heights,
//! `tau_c = 200`, `tau_p = K`, 200 mW pilots, 100 mW downlink budget,
//! -94 dBm noise, `epsilon = 0.01`). Command-line flags override config
//! fields. Physical powers are converted to noise-normalized units once,
//! here, and the resolved config is embedded in every summary file.
//!
//! Subcommands:
//!
//! - `run`      full Monte-Carlo experiment -> `results.csv` + `summary.json`
//! - `single`   one realization, one scheme -> JSON trace
//! - `validate` Monte-Carlo validation of the closed-form bounds
//! - `cdf`      recompute CDF/dominance reports from a stored `results.csv`
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 excessive solver
//! failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::heuristic_init;
use crate::channel::{lmmse_stats, PilotConfig};
use crate::experiments::{
    empirical_cdf, outage_probability, run_experiment, stochastic_dominance_check,
    DominanceReport, ExperimentSpec, RealizationOutcome, Scheme, SchemeSummary,
};
use crate::network::{deploy_from_seed, DeploymentConfig};
use crate::optimizer::ScaConfig;
use crate::rates::{
    leakage_rate_bound, mc_validate_leakage, mc_validate_user_rate, random_feasible_allocation,
    user_rate_bound, PowerAllocation,
};
use crate::{Error, Result};

/// Pilot-length policy: track the user count or pin a fixed length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TauPRepr", into = "TauPRepr")]
pub enum TauPMode {
    EqualK,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TauPRepr {
    Num(usize),
    Text(String),
}

impl TryFrom<TauPRepr> for TauPMode {
    type Error = String;
    fn try_from(value: TauPRepr) -> std::result::Result<Self, String> {
        match value {
            TauPRepr::Num(n) => Ok(TauPMode::Fixed(n)),
            TauPRepr::Text(s) if s == "K" => Ok(TauPMode::EqualK),
            TauPRepr::Text(s) => Err(format!("tau_p must be a number or \"K\", got {s:?}")),
        }
    }
}

impl From<TauPMode> for TauPRepr {
    fn from(value: TauPMode) -> Self {
        match value {
            TauPMode::EqualK => TauPRepr::Text("K".into()),
            TauPMode::Fixed(n) => TauPRepr::Num(n),
        }
    }
}

/// Flat experiment configuration in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub area_side_m: f64,
    pub num_aps: usize,
    pub num_users: usize,
    pub num_eves: usize,
    pub carrier_freq_hz: f64,
    pub ap_height_m: f64,
    pub user_height_m: f64,
    pub ref_dist_d0_m: f64,
    pub ref_dist_d1_m: f64,
    pub shadowing_enabled: bool,
    pub shadowing_sigma_db: f64,
    pub tau_c: usize,
    pub tau_p: TauPMode,
    /// Apply the `tau_d / tau_c` pre-log factor to reported rates.
    pub apply_prelog: bool,
    pub p_p_mw: f64,
    pub p_t_mw: f64,
    pub noise_dbm: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub solver_tol: f64,
    pub enable_an: bool,
    pub schemes: Vec<Scheme>,
    pub num_realizations: usize,
    pub master_seed: u64,
    pub record_timing: bool,
    pub out_dir: String,
    /// Rayon worker threads; 0 keeps the global default.
    pub threads: usize,
}

impl Default for RunConfig {
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
            tau_c: 200,
            tau_p: TauPMode::EqualK,
            apply_prelog: false,
            p_p_mw: 200.0,
            p_t_mw: 100.0,
            noise_dbm: -94.0,
            epsilon: 0.01,
            max_iters: 50,
            solver_tol: 1e-8,
            enable_an: true,
            schemes: vec![Scheme::AnSca, Scheme::NoAnSca, Scheme::MaxminRate],
            num_realizations: 1000,
            master_seed: 1,
            record_timing: true,
            out_dir: "out".into(),
            threads: 0,
        }
    }
}

/// Convert a physical power in mW to noise-normalized units given the noise
/// floor in dBm: `p / (10^((noise_dbm - 30)/10) * 1000)`.
pub fn normalize_power(p_mw: f64, noise_dbm: f64) -> f64 {
    p_mw / (10f64.powf((noise_dbm - 30.0) / 10.0) * 1000.0)
}

/// A validated [`RunConfig`] with derived quantities.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub config: RunConfig,
    pub tau_p: usize,
    pub tau_d: usize,
    pub p_t_normalized: f64,
    pub p_p_normalized: f64,
    #[serde(skip)]
    pub spec: ExperimentSpec,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let tau_p = match self.tau_p {
            TauPMode::EqualK => self.num_users,
            TauPMode::Fixed(n) => n,
        };
        if tau_p < self.num_users {
            return Err(Error::Config(format!(
                "tau_p = {tau_p} is below the user count {}",
                self.num_users
            )));
        }
        if tau_p >= self.tau_c {
            return Err(Error::Config(format!(
                "tau_p = {tau_p} leaves no downlink symbols in tau_c = {}",
                self.tau_c
            )));
        }
        if !(self.p_p_mw > 0.0) || !(self.p_t_mw > 0.0) {
            return Err(Error::Config("transmit powers must be positive".into()));
        }
        if !self.noise_dbm.is_finite() {
            return Err(Error::Config("noise power must be finite".into()));
        }
        let tau_d = self.tau_c - tau_p;
        let p_t_normalized = normalize_power(self.p_t_mw, self.noise_dbm);
        let p_p_normalized = normalize_power(self.p_p_mw, self.noise_dbm);
        let rate_scale = if self.apply_prelog {
            tau_d as f64 / self.tau_c as f64
        } else {
            1.0
        };
        let spec = ExperimentSpec {
            deployment: DeploymentConfig {
                area_side_m: self.area_side_m,
                num_aps: self.num_aps,
                num_users: self.num_users,
                num_eves: self.num_eves,
                carrier_freq_hz: self.carrier_freq_hz,
                ap_height_m: self.ap_height_m,
                user_height_m: self.user_height_m,
                ref_dist_d0_m: self.ref_dist_d0_m,
                ref_dist_d1_m: self.ref_dist_d1_m,
                shadowing_enabled: self.shadowing_enabled,
                shadowing_sigma_db: self.shadowing_sigma_db,
                seed: self.master_seed,
            },
            pilots: PilotConfig {
                tau_p,
                p_p: p_p_normalized,
            },
            sca: ScaConfig {
                epsilon: self.epsilon,
                max_iters: self.max_iters,
                solver_tol: self.solver_tol,
                enable_an: self.enable_an,
                p_t: p_t_normalized,
            },
            schemes: self.schemes.clone(),
            num_realizations: self.num_realizations,
            master_seed: self.master_seed,
            rate_scale,
            record_timing: self.record_timing,
        };
        spec.validate()?;
        Ok(ResolvedConfig {
            config: self.clone(),
            tau_p,
            tau_d,
            p_t_normalized,
            p_p_normalized,
            spec,
        })
    }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "cfsec",
    about = "Secure power control experiments for cell-free massive MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full Monte-Carlo experiment from a config file.
    Run(CommonArgs),
    /// Run one realization and dump the optimizer trace as JSON.
    Single(SingleArgs),
    /// Monte-Carlo validation of the closed-form rate bounds.
    Validate(ValidateArgs),
    /// Recompute CDF and dominance reports from a stored results.csv.
    Cdf(CdfArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// JSON config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of access points.
    #[arg(long = "M")]
    num_aps: Option<usize>,
    /// Number of users.
    #[arg(long = "K")]
    num_users: Option<usize>,
    /// Number of eavesdroppers.
    #[arg(long = "J")]
    num_eves: Option<usize>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Comma-separated scheme list: an_sca,no_an_sca,maxmin_rate,heuristic_only.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Disable artificial noise in the optimizer.
    #[arg(long)]
    no_an: bool,
    /// SCA convergence threshold in bits.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Worker threads (0 = library default).
    #[arg(long)]
    threads: Option<usize>,
    /// Skip wall-clock measurement for byte-stable outputs.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct SingleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Scheme to trace.
    #[arg(long, default_value = "an_sca")]
    trace_scheme: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Monte-Carlo draws per estimate.
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
}

#[derive(Args, Debug)]
struct CdfArgs {
    /// Stored results.csv from a previous run.
    #[arg(long)]
    results: PathBuf,
    /// Dominance slack.
    #[arg(long, default_value_t = 0.05)]
    slack: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(m) = args.num_aps {
        cfg.num_aps = m;
    }
    if let Some(k) = args.num_users {
        cfg.num_users = k;
    }
    if let Some(j) = args.num_eves {
        cfg.num_eves = j;
    }
    if let Some(n) = args.realizations {
        cfg.num_realizations = n;
    }
    if let Some(schemes) = &args.scheme {
        cfg.schemes = schemes
            .iter()
            .map(|s| {
                Scheme::from_name(s)
                    .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
            })
            .collect::<Result<_>>()?;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = dir.display().to_string();
    }
    if args.no_an {
        cfg.enable_an = false;
    }
    if let Some(eps) = args.epsilon {
        cfg.epsilon = eps;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if args.no_timing {
        cfg.record_timing = false;
    }
    Ok(cfg)
}

/// Run a closure inside a Rayon pool of the requested size (0 = current).
fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

// ---------------------------------------------------------------------------
// results.csv
// ---------------------------------------------------------------------------

pub const RESULTS_HEADER: &str =
    "realization_id,scheme,min_secrecy_bits,min_user_rate_bits,iterations,converged,wall_ms";

/// Serialize result rows. Floats use the shortest round-trip representation,
/// so re-parsing reproduces the exact binary values.
pub fn results_to_csv(rows: &[RealizationOutcome]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.realization_id,
            r.scheme.name(),
            r.min_secrecy,
            r.min_user_rate,
            r.iterations,
            r.converged,
            r.wall_ms
        ));
    }
    out
}

pub fn parse_results_csv(text: &str) -> Result<Vec<RealizationOutcome>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == RESULTS_HEADER => {}
        other => {
            return Err(Error::Csv(format!(
                "unexpected header {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Csv(format!("line {}: expected 7 fields", idx + 2)));
        }
        let parse_err = |what: &str| Error::Csv(format!("line {}: bad {what}", idx + 2));
        rows.push(RealizationOutcome {
            realization_id: fields[0].parse().map_err(|_| parse_err("realization_id"))?,
            scheme: Scheme::from_name(fields[1]).ok_or_else(|| parse_err("scheme"))?,
            min_secrecy: fields[2].parse().map_err(|_| parse_err("min_secrecy"))?,
            min_user_rate: fields[3].parse().map_err(|_| parse_err("min_user_rate"))?,
            iterations: fields[4].parse().map_err(|_| parse_err("iterations"))?,
            converged: fields[5].parse().map_err(|_| parse_err("converged"))?,
            wall_ms: fields[6].parse().map_err(|_| parse_err("wall_ms"))?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// summary.json / cdf reports
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub config: RunConfig,
    pub tau_p: usize,
    pub tau_d: usize,
    pub p_t_normalized: f64,
    pub p_p_normalized: f64,
    pub schemes: Vec<SchemeSummary>,
    pub failed_realizations: Vec<usize>,
    pub total_wall_ms: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DominancePair {
    pub a: Scheme,
    pub b: Scheme,
    pub slack: f64,
    #[serde(flatten)]
    pub report: DominanceReport,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CdfReport {
    pub schemes: Vec<SchemeSummary>,
    pub dominance: Vec<DominancePair>,
}

/// Build the CDF report from parsed result rows: per-scheme CDFs in
/// first-appearance order plus all ordered dominance comparisons.
pub fn cdf_report(rows: &[RealizationOutcome], slack: f64) -> CdfReport {
    let mut order: Vec<Scheme> = Vec::new();
    for r in rows {
        if !order.contains(&r.scheme) {
            order.push(r.scheme);
        }
    }
    let schemes: Vec<SchemeSummary> = order
        .iter()
        .map(|&scheme| {
            let samples: Vec<f64> = rows
                .iter()
                .filter(|r| r.scheme == scheme)
                .map(|r| r.min_secrecy)
                .collect();
            SchemeSummary {
                scheme,
                cdf: empirical_cdf(&samples),
                outage: outage_probability(&samples),
                samples: samples.len(),
            }
        })
        .collect();
    let mut dominance = Vec::new();
    for a in &schemes {
        for b in &schemes {
            if a.scheme != b.scheme {
                dominance.push(DominancePair {
                    a: a.scheme,
                    b: b.scheme,
                    slack,
                    report: stochastic_dominance_check(&a.cdf, &b.cdf, slack),
                });
            }
        }
    }
    CdfReport { schemes, dominance }
}

// ---------------------------------------------------------------------------
// Subcommand drivers
// ---------------------------------------------------------------------------

fn cmd_run(args: &CommonArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let resolved = cfg.resolve()?;
    let start = std::time::Instant::now();
    let result = with_pool(cfg.threads, || run_experiment(&resolved.spec))?;
    let total_wall_ms = if cfg.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };

    let out_dir = Path::new(&cfg.out_dir);
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("results.csv"), results_to_csv(&result.rows))?;
    let summary = Summary {
        config: cfg.clone(),
        tau_p: resolved.tau_p,
        tau_d: resolved.tau_d,
        p_t_normalized: resolved.p_t_normalized,
        p_p_normalized: resolved.p_p_normalized,
        schemes: result.summaries.clone(),
        failed_realizations: result.failed_realizations.clone(),
        total_wall_ms,
    };
    fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;

    println!(
        "{} realizations, {} failed, outputs in {}",
        cfg.num_realizations,
        result.failed_realizations.len(),
        out_dir.display()
    );
    for s in &result.summaries {
        println!(
            "  {:<14} outage = {:.4}  samples = {}",
            s.scheme.name(),
            s.outage,
            s.samples
        );
    }
    Ok(())
}

fn cmd_single(args: &SingleArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let resolved = cfg.resolve()?;
    let scheme = Scheme::from_name(&args.trace_scheme)
        .ok_or_else(|| Error::Config(format!("unknown scheme {:?}", args.trace_scheme)))?;
    let net = deploy_from_seed(&resolved.spec.deployment)?;
    let stats = lmmse_stats(&net, &resolved.spec.pilots)?;
    let trace = match scheme {
        Scheme::AnSca => crate::baselines::run_an_sca(&stats, &net, &resolved.spec.sca)?,
        Scheme::NoAnSca => crate::baselines::run_no_an(&stats, &net, &resolved.spec.sca)?,
        Scheme::MaxminRate => crate::baselines::run_maxmin_rate(&stats, &net, &resolved.spec.sca)?,
        Scheme::HeuristicOnly => {
            let alloc = heuristic_init(&stats, &net, resolved.spec.sca.p_t)?;
            let report = crate::rates::secrecy_report(&alloc, &stats, &net)?;
            crate::optimizer::ScaTrace {
                t_values: vec![0.0],
                surrogate_t_values: vec![0.0],
                allocations: vec![alloc],
                converged: true,
                iterations_used: 0,
                final_t: 0.0,
                final_report: report,
                solver_failure: None,
            }
        }
    };
    let doc = serde_json::json!({
        "scheme": scheme,
        "network": net,
        "trace": trace,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let resolved = cfg.resolve()?;
    let spec = &resolved.spec;
    let net = deploy_from_seed(&spec.deployment)?;
    let stats = lmmse_stats(&net, &spec.pilots)?;
    let mut rng = crate::experiments::realization_rng(spec.master_seed, u64::MAX);

    let mut checks: Vec<Check> = Vec::new();
    let allocations: Vec<(&str, PowerAllocation)> = vec![
        ("heuristic", heuristic_init(&stats, &net, spec.sca.p_t)?),
        (
            "random",
            random_feasible_allocation(&stats, spec.sca.p_t, &mut rng),
        ),
    ];

    for (label, alloc) in &allocations {
        let closed = user_rate_bound(alloc, &stats, &net)?;
        let mc = with_pool(cfg.threads, || {
            mc_validate_user_rate(alloc, &stats, &spec.pilots, &net, args.draws, &mut rng)
        })?;
        for k in 0..net.num_users() {
            let bound_ok = closed[k] <= mc.ergodic_rate[k] + 2.0 * mc.ergodic_rate_se[k];
            checks.push(Check {
                name: format!("user bound below MC ergodic rate [{label}, user {k}]"),
                pass: bound_ok,
                detail: format!(
                    "closed {:.6}, ergodic {:.6} +/- {:.6}, moment plug-in {:.6}",
                    closed[k], mc.ergodic_rate[k], mc.ergodic_rate_se[k], mc.rate[k]
                ),
            });
            let expect: f64 = (0..net.num_aps())
                .map(|m| alloc.p[(m, k)].sqrt() * stats.gamma[(m, k)])
                .sum();
            let rel = (mc.mean_signal[k] - expect).abs() / expect.max(1e-300);
            checks.push(Check {
                name: format!("E[f_kk] identity [{label}, user {k}]"),
                pass: rel <= 0.03,
                detail: format!("relative error {rel:.4}"),
            });
            let an: f64 = (0..net.num_aps())
                .map(|m| alloc.p_v[m] * net.beta[(m, k)])
                .sum();
            if an > 0.0 {
                let rel = (mc.an_power[k] - an).abs() / an;
                checks.push(Check {
                    name: format!("E[|z_k|^2] identity [{label}, user {k}]"),
                    pass: rel <= 0.03,
                    detail: format!("relative error {rel:.4}"),
                });
            }
        }
        if net.num_eves() > 0 {
            let leak_closed = leakage_rate_bound(alloc, &stats, &net)?;
            let mc = with_pool(cfg.threads, || {
                mc_validate_leakage(alloc, &stats, &spec.pilots, &net, args.draws, &mut rng)
            })?;
            let terms =
                crate::rates::SinrDecomposition::compute(alloc, &stats, &net)?;
            for j in 0..net.num_eves() {
                for k in 0..net.num_users() {
                    let rel = (mc.leak_signal[(j, k)] - terms.ls[(j, k)]).abs()
                        / terms.ls[(j, k)].max(1e-300);
                    checks.push(Check {
                        name: format!("E[|f^e|^2] identity [{label}, pair ({j},{k})]"),
                        pass: rel <= 0.03,
                        detail: format!("relative error {rel:.4}"),
                    });
                    let rel = (mc.rate[(j, k)] - leak_closed[(j, k)]).abs()
                        / leak_closed[(j, k)].max(1e-300);
                    checks.push(Check {
                        name: format!("leakage approximation [{label}, pair ({j},{k})]"),
                        pass: rel <= 0.05,
                        detail: format!("relative error {rel:.4}"),
                    });
                }
            }
        }
    }

    let mut all_pass = true;
    for c in &checks {
        println!(
            "{} {} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        all_pass &= c.pass;
    }
    if all_pass {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(Error::Config("validation checks failed".into()))
    }
}

fn cmd_cdf(args: &CdfArgs) -> Result<()> {
    let text = fs::read_to_string(&args.results).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", args.results.display()))
    })?;
    let rows = parse_results_csv(&text)?;
    let report = cdf_report(&rows, args.slack);
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => {
            fs::write(path, &text)?;
            println!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

/// Entry point for the `cfsec` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Single(args) => cmd_single(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Cdf(args) => cmd_cdf(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::ExcessiveFailures { failed, total }) => {
            eprintln!("error: {failed} of {total} realizations lost their solver");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normalize_power_examples() {
        // unity: 1 mW signal over 0 dBm (= 1 mW) noise
        assert_relative_eq!(normalize_power(1.0, 0.0), 1.0, max_relative = 1e-12);
        // -30 dBm is a microwatt, giving a factor of 1000
        assert_relative_eq!(normalize_power(1.0, -30.0), 1000.0, max_relative = 1e-12);
        // frozen from independent dBm arithmetic: 100 mW over -94 dBm
        assert_relative_eq!(
            normalize_power(100.0, -94.0),
            2.5118864315095822e11,
            max_relative = 1e-12
        );
        // linearity
        let base = normalize_power(50.0, -94.0);
        assert_relative_eq!(normalize_power(100.0, -94.0), 2.0 * base, max_relative = 1e-12);
    }

    #[test]
    fn config_round_trip_identity() {
        let cfg = RunConfig {
            tau_p: TauPMode::Fixed(8),
            schemes: vec![Scheme::NoAnSca],
            ..RunConfig::default()
        };
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
        let json2 = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn tau_p_modes_parse() {
        let cfg: RunConfig = serde_json::from_str(r#"{"tau_p": "K"}"#).unwrap();
        assert_eq!(cfg.tau_p, TauPMode::EqualK);
        let cfg: RunConfig = serde_json::from_str(r#"{"tau_p": 16}"#).unwrap();
        assert_eq!(cfg.tau_p, TauPMode::Fixed(16));
        assert!(serde_json::from_str::<RunConfig>(r#"{"tau_p": "k"}"#).is_err());
    }

    #[test]
    fn resolve_derives_tdd_split() {
        let cfg = RunConfig {
            num_users: 4,
            ..RunConfig::default()
        };
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.tau_p, 4);
        assert_eq!(resolved.tau_d, 196);
        assert_eq!(resolved.spec.rate_scale, 1.0);

        let with_prelog = RunConfig {
            apply_prelog: true,
            ..cfg
        };
        let resolved = with_prelog.resolve().unwrap();
        assert_relative_eq!(resolved.spec.rate_scale, 196.0 / 200.0, max_relative = 1e-15);
    }

    #[test]
    fn resolve_rejects_bad_tdd() {
        let cfg = RunConfig {
            tau_p: TauPMode::Fixed(1),
            num_users: 2,
            ..RunConfig::default()
        };
        assert!(cfg.resolve().is_err());
        let cfg = RunConfig {
            tau_c: 2,
            num_users: 2,
            ..RunConfig::default()
        };
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            RealizationOutcome {
                realization_id: 0,
                scheme: Scheme::AnSca,
                min_secrecy: 2.3007502789124695,
                min_user_rate: 3.5,
                iterations: 9,
                converged: true,
                wall_ms: 12,
            },
            RealizationOutcome {
                realization_id: 0,
                scheme: Scheme::MaxminRate,
                min_secrecy: 0.0,
                min_user_rate: 4.25,
                iterations: 7,
                converged: true,
                wall_ms: 8,
            },
        ];
        let text = results_to_csv(&rows);
        let back = parse_results_csv(&text).unwrap();
        assert_eq!(rows, back);
        // shortest round-trip float formatting is exact
        assert_eq!(back[0].min_secrecy, 2.3007502789124695);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"nonsense": 1}"#);
        assert!(err.is_err());
    }
}
