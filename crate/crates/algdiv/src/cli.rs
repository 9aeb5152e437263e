//! Argument parsing and command dispatch. Exit codes: 0 success, 2 usage or
//! configuration error, 3 numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use algdiv_core::diagnostics::diagnostics_record;
use algdiv_core::equalize::EqualizerConfig;
use algdiv_core::estimators::{fast_path_abelian, group_avg_covariance, CovEstimate};
use algdiv_core::groups::{make_group, GroupSpec, Representation, DEFAULT_GROUP_CAP};
use algdiv_core::matching::{pipeline, sequential_gevp, BasisSpec, GeneratorBasis, PipelineConfig, SeqGevpTrace};
use algdiv_core::rankpromo::{mc_pi, PiMode};
use algdiv_core::rng::seeded_rng;
use algdiv_core::signals::{build_covariance, ChannelModel, SnapshotSampler};
use algdiv_core::{Error, C64};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::{read_config_file, resolve, ConfigError, ExperimentConfig};
use crate::experiments::{ensemble, run_experiment, ExpParams, NAMES};
use crate::io::{model_from_config, parse_constellation, parse_cost, phase_grid};
use crate::output::{append_log, num, render_json, write_outputs, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "algdiv",
    version,
    about = "Group-averaged covariance estimation, diagnostics and blind group matching"
)]
pub struct Cli {
    /// Base seed; trial t uses stream t of this seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo trials (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory for JSON and CSV files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Config file: `key = value` lines or a JSON object.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Signal dimension.
    #[arg(long = "M", global = true)]
    pub m: Option<u64>,
    /// SNR in dB.
    #[arg(long = "snr-db", global = true, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Monte Carlo trials.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// white | ar1 | ar | tones | chirp | multipath | graph | heat
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Comma-separated AR coefficients.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Option<Vec<f64>>,
    /// Comma-separated tone frequencies in bins.
    #[arg(long, value_delimiter = ',')]
    pub freqs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub amps: Option<Vec<f64>>,
    #[arg(long = "noise-var")]
    pub noise_var: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Edge-list file, or K<n>, C<n>, petersen.
    #[arg(long)]
    pub graph: Option<String>,
    /// Heat-kernel time.
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Population diagnostics (alpha, psi, kappa, H_struct, r_eff) of a covariance model.
    Diagnose {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Group-averaged covariance estimate from sampled snapshots.
    Estimate {
        #[command(flatten)]
        model: ModelArgs,
        /// Group spec: Z8, Z4xZ2, E2^3, D6, trivial, gen:(0 1 2);(0 1)
        #[arg(long)]
        group: Option<String>,
        #[arg(long = "L")]
        l: Option<u64>,
        /// Use the FFT estimator (Abelian groups only).
        #[arg(long = "fast-path")]
        fast_path: bool,
    },
    /// Blind matching pipeline: whiteness gate, sequential GEVP, D_CV ranking.
    Match {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "L")]
        l: Option<u64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "alpha-gate")]
        alpha_gate: Option<f64>,
        #[arg(long = "kappa-threshold")]
        kappa_threshold: Option<f64>,
        /// natural | transpositions
        #[arg(long)]
        basis: Option<String>,
    },
    /// Sequential GEVP on a graph diffusion or model covariance.
    Seqgevp {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        tau: Option<f64>,
        /// natural | transpositions
        #[arg(long)]
        basis: Option<String>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Residual-phase ensemble of a blind equalizer over random Rayleigh channels.
    Equalize {
        /// cma | mma | ad<M>
        #[arg(long)]
        cost: Option<String>,
        /// qpsk | 8psk | bpsk | 16qam
        #[arg(long = "const")]
        constellation: Option<String>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        taps: Option<u64>,
        #[arg(long)]
        symbols: Option<u64>,
    },
    /// Monte Carlo estimate of pi, plain or stratified.
    McPi {
        /// plain | stratified
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        strata: Option<u64>,
        #[arg(long = "n-total")]
        n_total: Option<u64>,
    },
    /// Named acceptance experiment, or `all`.
    Experiment {
        /// One of the names listed by `experiment list`, or `all`.
        name: String,
    },
}

/// Why a command failed, already classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        // Bad inputs are the caller's to fix; everything else is a numerical outcome.
        match e {
            Error::Parse(_)
            | Error::InvalidParameter(_)
            | Error::Dimension { .. }
            | Error::InvalidPermutation
            | Error::NotDivisible { .. }
            | Error::InsufficientSnapshots { .. }
            | Error::UnstableAr
            | Error::Infeasible(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn put<T: Into<Value>>(flags: &mut BTreeMap<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        flags.insert(key.to_string(), v.into());
    }
}

fn model_flags(flags: &mut BTreeMap<String, Value>, m: &ModelArgs) {
    put(flags, "model", m.model.clone());
    put(flags, "rho", m.rho);
    put(flags, "coeffs", m.coeffs.clone());
    put(flags, "freqs", m.freqs.clone());
    put(flags, "amps", m.amps.clone());
    put(flags, "noise_var", m.noise_var);
    put(flags, "mu", m.mu);
    put(flags, "graph", m.graph.clone());
    put(flags, "t", m.t);
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Diagnose { .. } => "diagnose",
        Command::Estimate { .. } => "estimate",
        Command::Match { .. } => "match",
        Command::Seqgevp { .. } => "seqgevp",
        Command::Equalize { .. } => "equalize",
        Command::McPi { .. } => "mc-pi",
        Command::Experiment { .. } => "experiment",
    }
}

/// Collects every flag that was given into config keys.
fn flag_map(cli: &Cli) -> BTreeMap<String, Value> {
    let mut f = BTreeMap::new();
    put(&mut f, "seed", cli.seed);
    put(&mut f, "threads", cli.threads.map(|t| t as u64));
    put(&mut f, "out", cli.out.as_ref().map(|p| p.display().to_string()));
    put(&mut f, "M", cli.m);
    put(&mut f, "snr_db", cli.snr_db);
    put(&mut f, "trials", cli.trials);
    match &cli.command {
        Command::Diagnose { model } => model_flags(&mut f, model),
        Command::Estimate { model, group, l, fast_path } => {
            model_flags(&mut f, model);
            put(&mut f, "group", group.clone());
            put(&mut f, "L", *l);
            if *fast_path {
                f.insert("fast_path".into(), Value::Bool(true));
            }
        }
        Command::Match { model, l, tau, alpha_gate, kappa_threshold, basis } => {
            model_flags(&mut f, model);
            put(&mut f, "L", *l);
            put(&mut f, "tau", *tau);
            put(&mut f, "alpha_gate", *alpha_gate);
            put(&mut f, "kappa_threshold", *kappa_threshold);
            put(&mut f, "basis", basis.clone());
        }
        Command::Seqgevp { model, tau, basis, cap } => {
            model_flags(&mut f, model);
            put(&mut f, "tau", *tau);
            put(&mut f, "basis", basis.clone());
            put(&mut f, "cap", *cap);
        }
        Command::Equalize { cost, constellation, step, taps, symbols } => {
            put(&mut f, "cost", cost.clone());
            put(&mut f, "constellation", constellation.clone());
            put(&mut f, "step", *step);
            put(&mut f, "taps", *taps);
            put(&mut f, "symbols", *symbols);
        }
        Command::McPi { mode, strata, n_total } => {
            put(&mut f, "mode", mode.clone());
            put(&mut f, "strata", *strata);
            put(&mut f, "n_total", *n_total);
        }
        Command::Experiment { .. } => {}
    }
    f
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let mut cfg = resolve(command_name(&cli.command), file, flag_map(cli))?;
    let threads = cfg.usize_or("threads", 0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let stem = pool.install(|| dispatch(&cli.command, &mut cfg))?;
    // Timings are kept out of the deterministic outputs.
    append_log(&cfg.output_dir, &format!("{stem}: {:.3} s", started.elapsed().as_secs_f64()))?;
    Ok(())
}

fn emit(cfg: &ExperimentConfig, stem: &str, result: Value, table: &Table) -> CliResult<()> {
    print!("{}", render_json(cfg, result.clone()));
    write_outputs(&cfg.output_dir, stem, cfg, result, table)?;
    Ok(())
}

fn snr(cfg: &ExperimentConfig) -> Option<f64> {
    cfg.get("snr_db").and_then(Value::as_f64)
}

fn basis_spec(name: &str) -> CliResult<BasisSpec> {
    match name {
        "natural" => Ok(BasisSpec::Natural),
        "transpositions" => Ok(BasisSpec::Transpositions),
        other => Err(CliError::Config(format!("unknown basis '{other}'; expected natural or transpositions"))),
    }
}

fn trace_json(t: &SeqGevpTrace) -> Value {
    json!({
        "tau": t.tau,
        "termination": t.termination.as_str(),
        "final_order": t.final_group.order(),
        "generators": t.iterations.iter().filter(|i| i.accepted).map(|i| i.rounded_perm.to_string()).collect::<Vec<_>>(),
        "iterations": t.iterations.iter().map(|i| json!({
            "lambda_min": i.lambda_min,
            "rounded_perm": i.rounded_perm.to_string(),
            "residual": i.residual,
            "accepted": i.accepted,
        })).collect::<Vec<_>>(),
    })
}

fn trace_table(t: &SeqGevpTrace) -> Table {
    let mut table = Table::new(&["iteration", "lambda_min", "rounded_perm", "residual", "accepted"]);
    for (k, i) in t.iterations.iter().enumerate() {
        table.push(vec![
            k.to_string(),
            num(i.lambda_min),
            i.rounded_perm.to_string(),
            num(i.residual),
            i.accepted.to_string(),
        ]);
    }
    table
}

fn matrix_table(r: &algdiv_core::HermitianMatrix) -> Table {
    let mut t = Table::new(&["row", "col", "re", "im"]);
    let m = r.dim();
    for a in 0..m {
        for b in 0..m {
            let z: C64 = r[(a, b)];
            t.push(vec![a.to_string(), b.to_string(), num(z.re), num(z.im)]);
        }
    }
    t
}

fn dispatch(cmd: &Command, cfg: &mut ExperimentConfig) -> CliResult<String> {
    let stem = command_name(cmd).to_string();
    match cmd {
        Command::Diagnose { .. } => {
            let model = model_from_config(cfg)?;
            let r = build_covariance(&model)?;
            let d = diagnostics_record(&r)?;
            let result = json!({
                "model": model.label(), "M": r.dim(),
                "alpha": d.alpha, "psi": d.psi, "kappa": d.kappa, "h_struct": d.h_struct, "r_eff": d.r_eff,
            });
            let mut t = Table::new(&["k", "eigenvalue"]);
            for (k, l) in r.eig()?.eigenvalues.iter().enumerate() {
                t.push(vec![k.to_string(), num(*l)]);
            }
            emit(cfg, &stem, result, &t)?;
        }
        Command::Estimate { .. } => {
            let model = model_from_config(cfg)?;
            let m = model.m;
            let spec = GroupSpec::parse(&cfg.take_str("group", &format!("Z{m}")), Some(m))?;
            let g = make_group(&spec)?;
            let l = cfg.take_usize("L", 1);
            let fast = cfg.take_bool("fast_path", false);
            let mut rng = seeded_rng(cfg.seed);
            let snaps = SnapshotSampler::new(&model, snr(cfg))?.draw(l, &mut rng, cfg.seed)?;
            let est: CovEstimate = if fast {
                let factors = g
                    .abelian_factors()
                    .ok_or_else(|| {
                        CliError::Config(format!("fast path needs an Abelian product group, got {}", g.label()))
                    })?
                    .to_vec();
                fast_path_abelian(&factors, &snaps)?
            } else {
                group_avg_covariance(&Representation::permutation(g), &snaps)?
            };
            let population = build_covariance(&model)?;
            let err = est.r_hat.as_matrix().sub(population.as_matrix())?.frobenius_norm() / population.frobenius_norm();
            let d = diagnostics_record(&est.r_hat)?;
            let result = json!({
                "model": model.label(), "group": est.group_label, "L": est.l_used, "d_eff_claimed": est.d_eff_claimed,
                "fast_path": est.fast_path, "rel_frobenius_error": err,
                "diagnostics": {"alpha": d.alpha, "psi": d.psi, "kappa": d.kappa, "h_struct": d.h_struct},
            });
            emit(cfg, &stem, result, &matrix_table(&est.r_hat))?;
        }
        Command::Match { .. } => {
            let model = model_from_config(cfg)?;
            let l = cfg.take_usize("L", 64);
            let pc = PipelineConfig {
                alpha_gate: cfg.take_f64("alpha_gate", PipelineConfig::default().alpha_gate),
                tau: cfg.take_f64("tau", PipelineConfig::default().tau),
                kappa_threshold: cfg.take_f64("kappa_threshold", PipelineConfig::default().kappa_threshold),
                basis: basis_spec(&cfg.take_str("basis", "natural"))?,
                cap: cfg.take_usize("cap", DEFAULT_GROUP_CAP),
                library: None,
            };
            let mut rng = seeded_rng(cfg.seed);
            let snaps = SnapshotSampler::new(&model, snr(cfg))?.draw(l, &mut rng, cfg.seed)?;
            let rep = pipeline(&snaps, &pc)?;
            let result = json!({
                "model": model.label(), "selected": rep.selected, "alpha": rep.alpha, "alpha_gate": rep.alpha_gate,
                "kappa_trajectory": rep.kappa_trajectory, "kappa_verdict": rep.kappa_verdict,
                "seqgevp": rep.seqgevp.as_ref().map(trace_json), "notes": rep.notes,
            });
            let mut t = Table::new(&["rank", "label", "order", "dcv"]);
            for (i, g) in rep.ranked.iter().enumerate() {
                t.push(vec![i.to_string(), g.label.clone(), g.order.to_string(), num(g.dcv)]);
            }
            emit(cfg, &stem, result, &t)?;
        }
        Command::Seqgevp { .. } => {
            if cfg.get("graph").is_none() && cfg.get("model").is_none() {
                return Err(CliError::Config("seqgevp needs --graph or --model".into()));
            }
            let model = model_from_config(cfg)?;
            let r = build_covariance(&model)?;
            let tau = cfg.take_f64("tau", 0.05);
            let basis = GeneratorBasis::build(r.dim(), &basis_spec(&cfg.take_str("basis", "natural"))?)?;
            let cap = cfg.take_usize("cap", DEFAULT_GROUP_CAP);
            let trace = sequential_gevp(&r, &basis, tau, cap)?;
            let mut result = trace_json(&trace);
            result["model"] = json!(model.label());
            emit(cfg, &stem, result, &trace_table(&trace))?;
        }
        Command::Equalize { .. } => {
            let c = parse_constellation(&cfg.take_str("constellation", "qpsk"))?;
            let cost = parse_cost(&cfg.take_str("cost", "cma"))?;
            let mut template = EqualizerConfig::new(c, cost, ChannelModel::from_taps(vec![C64::new(1.0, 0.0)]));
            template.step = cfg.take_f64("step", template.step);
            template.n_taps = cfg.take_usize("taps", template.n_taps);
            template.n_symbols = cfg.take_usize("symbols", template.n_symbols);
            template.snr_db = Some(cfg.take_f64("snr_db", 25.0));
            let n = cfg.take_usize("trials", 200);
            if n < 50 {
                return Err(CliError::Config("equalize needs at least 50 trials".into()));
            }
            let grid = phase_grid(c);
            let s = ensemble(&template, grid, n, cfg.seed)?;
            let result = json!({
                "constellation": c.label(), "cost": cost.label(), "trials": n, "failures": s.failures,
                "std_deg": s.std_deg, "predicted_deg": s.predicted_deg, "ks": s.ks, "mean_symbol_mse": s.mean_symbol_mse,
            });
            let mut t = Table::new(&["trial", "residual_deg", "converged_cost", "symbol_mse"]);
            for tr in &s.trials {
                t.push(vec![
                    tr.trial.to_string(),
                    num(tr.residual.to_degrees()),
                    num(tr.converged_cost),
                    num(tr.symbol_mse),
                ]);
            }
            emit(cfg, &stem, result, &t)?;
        }
        Command::McPi { .. } => {
            let mode = match cfg.take_str("mode", "stratified").as_str() {
                "plain" => PiMode::Plain,
                "stratified" => PiMode::Stratified,
                other => return Err(CliError::Config(format!("unknown mode '{other}'"))),
            };
            let strata = cfg.take_usize("strata", 64);
            let n_total = cfg.take_usize("n_total", 6400);
            let e = mc_pi(mode, strata, n_total, cfg.seed)?;
            let result =
                json!({"estimate": e.estimate, "abs_error": e.abs_error, "rounds": e.rounds, "draws": e.draws});
            emit(cfg, &stem, result, &Table::default())?;
        }
        Command::Experiment { name } => return experiment(name, cfg),
    }
    Ok(stem)
}

fn experiment(name: &str, cfg: &mut ExperimentConfig) -> CliResult<String> {
    if name == "list" {
        for n in NAMES {
            println!("{n}");
        }
        return Ok("experiment-list".into());
    }
    let names: Vec<&str> = if name == "all" { NAMES.to_vec() } else { vec![name] };
    if let Some(bad) = names.iter().find(|n| !NAMES.contains(n)) {
        return Err(CliError::Config(format!(
            "unknown experiment '{bad}'; expected one of {}, or all",
            NAMES.join(", ")
        )));
    }
    let p = ExpParams { seed: cfg.seed, trials: cfg.get("trials").and_then(Value::as_u64).map(|t| t as usize) };
    for n in &names {
        let report = run_experiment(n, &p)?;
        println!("{} {}: {}", if report.passed { "PASS" } else { "FAIL" }, report.name, report.criterion);
        let mut c = cfg.clone();
        c.command = format!("experiment {n}");
        write_outputs(&cfg.output_dir, &format!("experiment-{n}"), &c, report.to_json(), &report.table)?;
    }
    Ok(format!("experiment-{name}"))
}
