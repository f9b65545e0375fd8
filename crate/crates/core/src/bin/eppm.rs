use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use eppm::codes::{find_difference_set_with_budget, Catalog, Codebook, DesignParams, DEFAULT_SEARCH_NODES, TABLE_I};
use eppm::harness::{
    points_to_csv, rate_table, rate_table_csv, reproduce_figure, run_ber, ChannelSpec, FigureOptions, InterleaverSpec,
    PhotonSpec, RunOptions, SchemeSpec, SearchBudgetSpec, SimConfig, FIGURES, PATH_ENERGY,
};
use eppm::interleaver::{BinaryProgram, SearchBudget};
use eppm::Error;

#[derive(Parser)]
#[command(name = "eppm", version, about = "Expurgated PPM code, interleaver and BER tools")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search cyclic difference sets and print them in catalog format.
    Codegen(CodegenArgs),
    /// Check a base set (or catalog file) and report PAPR and complement.
    ValidateCode(ValidateArgs),
    /// Find an interleaver for a dispersive channel.
    OptimizeInterleaver(OptimizeArgs),
    /// Monte Carlo BER sweep from a JSON config.
    BerSweep(SweepArgs),
    /// Regenerate a figure's curves as CSV.
    Reproduce(ReproduceArgs),
    /// Overlapped-pulse bit rates.
    RateTable(RateArgs),
}

#[derive(Args)]
struct CodegenArgs {
    /// `Q,K,lambda`; repeatable.
    #[arg(long = "code", value_parser = parse_code)]
    codes: Vec<DesignParams>,
    /// Every design in the reference table.
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = DEFAULT_SEARCH_NODES)]
    max_nodes: u64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_parser = parse_code, required_unless_present = "catalog")]
    code: Option<DesignParams>,
    /// Comma-separated base set; defaults to the shipped one.
    #[arg(long, value_delimiter = ',')]
    base: Option<Vec<usize>>,
    /// Validate every entry of a catalog file instead.
    #[arg(long, conflicts_with_all = ["code", "base"])]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Take the scheme and channel from a sweep config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_code, default_value = "11,5,2")]
    code: DesignParams,
    #[arg(long, default_value_t = 0.05)]
    sigma_over_tb: f64,
    #[arg(long, default_value_t = 1.0)]
    tau_over_tb: f64,
    #[arg(long, default_value_t = PATH_ENERGY)]
    e_bit_los: f64,
    #[arg(long, default_value_t = PATH_ENERGY)]
    e_bit_nlos: f64,
    /// Explicit chip taps, `h_0` first; overrides the geometry.
    #[arg(long, value_delimiter = ',')]
    taps: Option<Vec<f64>>,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    anneal_steps: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Also write the binary program in LP format.
    #[arg(long)]
    lp: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config field: `trials=200000`, `channel.sigma_over_tb=0.1`,
    /// `scheme={"kind":"ppm","order":4}`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    target_errors: Option<u64>,
    /// Fill the wall_time_s column.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
    figure: String,
    /// Multiplies the per-point symbol caps.
    #[arg(long, default_value_t = 1.0)]
    effort: f64,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long = "q", value_delimiter = ',', default_values_t = [35usize])]
    qs: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    levels: Vec<usize>,
    /// Largest overlap; every `v` from 1 up is listed.
    #[arg(long, default_value_t = 70)]
    max_overlap: usize,
    #[arg(long, default_value_t = 20e-9)]
    t_led: f64,
}

/// Failure that maps onto a process exit code.
enum Failure {
    Config(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Other(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

/// Whether a search ran out of budget.
type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Codegen(a) => codegen(&cli, a),
        Command::ValidateCode(a) => validate_code(&cli, a),
        Command::OptimizeInterleaver(a) => optimize(&cli, a),
        Command::BerSweep(a) => ber_sweep(&cli, a),
        Command::Reproduce(a) => reproduce(&cli, a),
        Command::RateTable(a) => rates(&cli, a),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("search budget exhausted; partial output written");
            ExitCode::from(3)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}

fn parse_code(s: &str) -> Result<DesignParams, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [q, k, lambda] => Ok(DesignParams::new(q, k, lambda)),
        _ => Err("expected Q,K,lambda".into()),
    }
}

/// Writes to `--out` when given, otherwise to stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn codegen(cli: &Cli, a: &CodegenArgs) -> Outcome {
    let mut codes = a.codes.clone();
    if a.all {
        codes.extend(TABLE_I);
    }
    if codes.is_empty() {
        return Err(Failure::Config("give --code Q,K,lambda or --all".into()));
    }
    let mut catalog = Catalog::default();
    let mut exhausted = false;
    for p in codes {
        p.validate()?;
        match find_difference_set_with_budget(p, a.max_nodes) {
            Ok(base) => catalog.insert(Codebook::build(p, &base)?),
            Err(Error::NoDesignFound { .. }) => {
                eprintln!("{p}: no difference set within {} nodes", a.max_nodes);
                catalog.mark_missing(p);
                exhausted = true;
            }
            Err(e) => return Err(e.into()),
        }
    }
    emit(cli.out.as_deref(), &catalog.to_text())?;
    Ok(exhausted)
}

fn code_summary(cb: &Codebook) -> Value {
    let p = cb.params();
    let papr = cb.papr();
    let comp = cb.complement().params();
    json!({
        "q": p.q,
        "k": p.k,
        "lambda": p.lambda,
        "base_set": cb.base_set(),
        "papr": format!("{}/{}", papr.numer(), papr.denom()),
        "papr_value": *papr.numer() as f64 / *papr.denom() as f64,
        "gamma": p.gamma().to_string(),
        "complement": [comp.q, comp.k, comp.lambda],
    })
}

fn validate_code(cli: &Cli, a: &ValidateArgs) -> Outcome {
    let books: Vec<Codebook> = match (&a.catalog, a.code) {
        (Some(path), _) => Catalog::parse(&fs::read_to_string(path)?)?.codebooks().cloned().collect(),
        (None, Some(p)) => vec![match &a.base {
            Some(base) => Codebook::build(p, base)?,
            None => Catalog::shipped().codebook(p)?,
        }],
        (None, None) => unreachable!("clap requires one of them"),
    };
    let report: Vec<Value> = books.iter().map(code_summary).collect();
    let text = serde_json::to_string_pretty(&report).expect("json") + "\n";
    emit(cli.out.as_deref(), &text)?;
    Ok(false)
}

fn read_config(path: &Path) -> Result<SimConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(SimConfig::from_json(&text)?)
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Outcome {
    let mut cfg = match &a.config {
        Some(p) => read_config(p)?,
        None => {
            let p = a.code;
            let mut cfg = SimConfig::new(
                "interleaver",
                SchemeSpec::Eppm {
                    q: p.q,
                    k: p.k,
                    lambda: p.lambda,
                },
            );
            cfg.channel = ChannelSpec {
                sigma_over_tb: a.sigma_over_tb,
                tau_over_tb: a.tau_over_tb,
                taps: a.taps.clone(),
                ..ChannelSpec::default()
            };
            cfg.photon = PhotonSpec {
                e_bit_los: Some(a.e_bit_los),
                e_bit_nlos: Some(a.e_bit_nlos),
                ..PhotonSpec::default()
            };
            cfg
        }
    };
    let defaults = SearchBudget::default();
    let budget = SearchBudgetSpec {
        max_nodes: a.max_nodes.unwrap_or(defaults.max_nodes),
        anneal_steps: a.anneal_steps.unwrap_or(defaults.anneal_steps),
        restarts: a.restarts.unwrap_or(defaults.restarts),
        seed: cli.seed.unwrap_or(defaults.seed),
    };
    cfg.interleaver = InterleaverSpec::Optimized { budget: Some(budget) };
    cfg.sweep = None;
    cfg.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| Failure::Other(e.to_string()))?;
    let prepared = pool.install(|| cfg.prepare())?;
    let report = prepared.interleaver_report.clone().expect("optimized interleaver reports");
    let json = report.to_json() + "\n";
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("interleaver.json"), &json)?;
            let perm = prepared.scheme.interleaver().expect("interleaver set");
            fs::write(dir.join("permutation.txt"), perm.to_text())?;
            if a.lp {
                let cb = prepared.scheme.codebook().expect("EPPM codebook");
                let h = prepared.taps.cyclic_taps(cb.q());
                fs::write(dir.join("program.lp"), BinaryProgram::build(cb, &h).to_lp())?;
            }
            eprintln!("wrote {}", dir.display());
        }
        None => print!("{json}"),
    }
    Ok(report.budget_exhausted)
}

/// Sets `path` (dot-separated) in a JSON object. The value is parsed as
/// JSON when possible and taken as a string otherwise.
fn set_path(root: &mut Value, assignment: &str) -> Result<(), Failure> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::Config(format!("--set {assignment}: expected PATH=VALUE")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Failure::Config(format!("--set {path}: not an object")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| json!({}));
    }
    node.as_object_mut()
        .ok_or_else(|| Failure::Config(format!("--set {path}: not an object")))?
        .insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn ber_sweep(cli: &Cli, a: &SweepArgs) -> Outcome {
    let mut doc: Value = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => json!({}),
    };
    for s in &a.overrides {
        set_path(&mut doc, s)?;
    }
    let mut cfg = SimConfig::from_json(&doc.to_string())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(t) = a.target_errors {
        cfg.target_errors = t;
    }
    let points = run_ber(
        &cfg,
        RunOptions {
            workers: cli.workers,
            timing: a.timing,
        },
    )?;
    let sweep_name = cfg.sweep.as_ref().map_or(cfg.name.as_str(), |s| s.parameter.as_str());
    emit(cli.out.as_deref(), &points_to_csv(sweep_name, &points))?;
    Ok(points
        .iter()
        .any(|p| p.interleaver.as_ref().is_some_and(|r| r.budget_exhausted)))
}

fn reproduce(cli: &Cli, a: &ReproduceArgs) -> Outcome {
    let opts = FigureOptions {
        seed: cli.seed.unwrap_or(FigureOptions::default().seed),
        workers: cli.workers,
        timing: a.timing,
        effort: a.effort,
    };
    let out = reproduce_figure(&a.figure, &opts)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    for path in out.write(&dir)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(out.budget_exhausted)
}

fn rates(cli: &Cli, a: &RateArgs) -> Outcome {
    if a.max_overlap == 0 || a.qs.is_empty() || a.levels.contains(&0) || !a.t_led.is_finite() || a.t_led <= 0.0 {
        return Err(Failure::Config("need Q values, levels ≥ 1, max overlap ≥ 1 and t_led > 0".into()));
    }
    let overlaps: Vec<usize> = (1..=a.max_overlap).collect();
    let rows = rate_table(&a.qs, &a.levels, &overlaps, a.t_led);
    emit(cli.out.as_deref(), &rate_table_csv(&rows))?;
    Ok(false)
}
