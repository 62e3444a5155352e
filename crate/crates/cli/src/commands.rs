//! Subcommand dispatch. Exit codes: 0 success (including a clean check),
//! 1 for check violations and solver failures, 2 for unreadable or malformed
//! files, 3 for bad flags (unknown method or generator kind included).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use mrfmoves::generators::{self, GridSpec, PairwiseKind, UnaryKind};
use mrfmoves::schedule::{relative_energy_report, render_table};
use mrfmoves::{
    check_pairwise_submodular, check_triangle, run, run_icm, Instance, Labeling, Method, RunReport,
    DEFAULT_EPS,
};

use crate::format::{
    parse_instance, parse_labeling, pgm_bytes, serialize_instance, serialize_labeling, FormatError,
};

#[derive(Parser)]
#[command(
    name = "mrfmoves",
    version,
    about = "Move-making energy minimization on pairwise discrete MRFs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize an instance with one sweep method and write the results.
    Solve(SolveArgs),
    /// Test every edge table for a structural property, edge by edge.
    Check(CheckArgs),
    /// Tabulate run reports as energies relative to a baseline run.
    Report(ReportArgs),
    /// Write a synthetic instance file.
    Generate(GenerateArgs),
    /// Render a labeling file as a grayscale PGM image.
    #[command(name = "export-pgm")]
    ExportPgm(ExportPgmArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    #[arg(long = "in")]
    input: PathBuf,
    /// icm, swap, expansion, expshrink-random, expshrink-prev,
    /// expshrink-next, or expshrink-all.
    #[arg(long)]
    method: String,
    /// Either the literal `first-state` or a labeling file.
    #[arg(long, default_value = "first-state")]
    init: String,
    /// Seed for expshrink-random; recorded in the report either way.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    max_sweeps: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Where to write the final labeling (one 1-based state per line).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(
    clap::ArgGroup::new("property")
        .required(true)
        .multiple(false)
        .args(["pairwise_submodular", "triangle"])
))]
struct CheckArgs {
    /// Instance file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Diagonal-dominance test: E(a,a)+E(b,b) <= E(b,a)+E(a,b) for all pairs.
    #[arg(long)]
    pairwise_submodular: bool,
    /// Triangle test: E(a,a)+E(g1,g2) <= E(g1,a)+E(a,g2) for all triples.
    #[arg(long)]
    triangle: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON run report the others are measured against.
    #[arg(long)]
    baseline: PathBuf,
    /// JSON run reports from the same instance.
    #[arg(long, num_args = 1.., required = true)]
    runs: Vec<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// potts-grid, trunclin-grid, quad-grid, random-grid, or random-small.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    #[arg(long, default_value_t = 2)]
    states: usize,
    /// Potts penalty for differing neighbor states.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Per-step cost of the truncated-linear pairwise.
    #[arg(long, default_value_t = 1.0)]
    slope: f64,
    /// Squared-step multiplier of the truncated-quadratic pairwise.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Truncation ceiling for trunclin-grid and quad-grid.
    #[arg(long, default_value_t = 4.0)]
    cap: f64,
    /// Largest off-diagonal entry for random-grid tables.
    #[arg(long, default_value_t = 10)]
    magnitude: u32,
    /// Project random-grid tables onto the triangle condition.
    #[arg(long)]
    force_triangle: bool,
    /// Unary energies drawn uniformly in [0, this].
    #[arg(long, default_value_t = 10)]
    unary_magnitude: u32,
    /// Use masked-observation unaries instead of random ones (grid kinds).
    #[arg(long)]
    observe: bool,
    /// Fraction of nodes left unobserved with --observe.
    #[arg(long, default_value_t = 0.3)]
    mask_fraction: f64,
    /// Data-term weight with --observe.
    #[arg(long, default_value_t = 2.0)]
    weight: f64,
    /// Node budget for random-small.
    #[arg(long, default_value_t = 6)]
    max_nodes: usize,
    /// State budget for random-small.
    #[arg(long, default_value_t = 4)]
    max_states: usize,
    /// Keep random-small tables inside the triangle condition.
    #[arg(long)]
    triangle: bool,
    /// Instance file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportPgmArgs {
    /// Labeling file (one 1-based state per line, row-major).
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Number of states the labeling is drawn from; fixes the gray scale.
    #[arg(long)]
    states: usize,
    /// PGM file to write.
    #[arg(long)]
    out: PathBuf,
}

/// Everything a run report file carries. The instance hash is the 16-digit
/// hex form of the instance content hash.
#[derive(Serialize, Deserialize)]
struct RunJson {
    method: String,
    seed: u64,
    instance_hash: String,
    initial_energy: f64,
    final_energy: f64,
    sweep_energies: Vec<f64>,
    sweeps: usize,
    accepted_moves: usize,
    truncation_used: bool,
}

impl RunJson {
    fn new(report: &RunReport, seed: u64) -> Self {
        RunJson {
            method: report.method.clone(),
            seed,
            instance_hash: format!("{:016x}", report.instance_hash),
            initial_energy: report.initial_energy,
            final_energy: report.final_energy,
            sweep_energies: report.sweep_energies.clone(),
            sweeps: report.sweeps,
            accepted_moves: report.accepted_moves,
            truncation_used: report.truncation_used,
        }
    }
}

struct CmdError {
    code: u8,
    msg: String,
}

fn data_err(msg: impl Into<String>) -> CmdError {
    CmdError {
        code: 2,
        msg: msg.into(),
    }
}

fn flag_err(msg: impl Into<String>) -> CmdError {
    CmdError {
        code: 3,
        msg: msg.into(),
    }
}

fn read_text(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| data_err(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CmdError> {
    std::fs::write(path, bytes).map_err(|e| data_err(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, err: FormatError) -> CmdError {
    data_err(format!("{}: {err}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance, CmdError> {
    parse_instance(&read_text(path)?).map_err(|e| in_file(path, e))
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(3)
                }
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Solve(args) => solve(args),
        Cmd::Check(args) => check(args),
        Cmd::Report(args) => report(args),
        Cmd::Generate(args) => generate(args),
        Cmd::ExportPgm(args) => export_pgm(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.msg);
            ExitCode::from(err.code)
        }
    }
}

fn solve(args: SolveArgs) -> Result<ExitCode, CmdError> {
    let inst = load_instance(&args.input)?;
    let init = match args.init.as_str() {
        "first-state" => Labeling::constant(inst.num_nodes(), 0),
        path => {
            let path = Path::new(path);
            let labeling = parse_labeling(&read_text(path)?).map_err(|e| in_file(path, e))?;
            inst.validate_labeling(&labeling)
                .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
            labeling
        }
    };
    let report = match args.method.as_str() {
        "icm" => run_icm(&inst, &init, None, args.max_sweeps, args.eps),
        "swap" => run(&inst, &init, Method::SwapSweep, args.max_sweeps, args.eps),
        "expansion" => run(&inst, &init, Method::ExpansionSweep, args.max_sweeps, args.eps),
        "expshrink-random" => run(
            &inst,
            &init,
            Method::ExpShrinkRandomBeta { seed: args.seed },
            args.max_sweeps,
            args.eps,
        ),
        "expshrink-prev" => run(&inst, &init, Method::ExpShrinkBetaPrev, args.max_sweeps, args.eps),
        "expshrink-next" => run(&inst, &init, Method::ExpShrinkBetaNext, args.max_sweeps, args.eps),
        "expshrink-all" => run(&inst, &init, Method::ExpShrinkAllBeta, args.max_sweeps, args.eps),
        other => return Err(flag_err(format!("unknown method '{other}'"))),
    }
    .map_err(|e| CmdError {
        code: 1,
        msg: e.to_string(),
    })?;

    println!(
        "{} final energy {} after {} sweeps ({})",
        report.method,
        report.final_energy,
        report.sweeps,
        if report.converged { "converged" } else { "sweep limit" }
    );
    if let Some(out) = &args.out {
        write_bytes(out, serialize_labeling(&report.final_labeling).as_bytes())?;
    }
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&RunJson::new(&report, args.seed))
            .expect("report serialization cannot fail");
        write_bytes(path, format!("{json}\n").as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn check(args: CheckArgs) -> Result<ExitCode, CmdError> {
    let inst = load_instance(&args.input)?;
    let mut violations = 0usize;
    for edge in inst.edges() {
        if args.pairwise_submodular {
            match check_pairwise_submodular(&edge.table, DEFAULT_EPS) {
                None => println!("edge {} {} ok", edge.i, edge.j),
                Some(v) => {
                    violations += 1;
                    println!(
                        "edge {} {} violation alpha={} beta={}",
                        edge.i,
                        edge.j,
                        v.alpha + 1,
                        v.beta + 1
                    );
                }
            }
        } else {
            match check_triangle(&edge.table, DEFAULT_EPS) {
                None => println!("edge {} {} ok", edge.i, edge.j),
                Some(v) => {
                    violations += 1;
                    println!(
                        "edge {} {} violation alpha={} gamma1={} gamma2={}",
                        edge.i,
                        edge.j,
                        v.alpha + 1,
                        v.gamma1 + 1,
                        v.gamma2 + 1
                    );
                }
            }
        }
    }
    println!("{} edges, {} violations", inst.edges().len(), violations);
    Ok(if violations == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn load_run(path: &Path) -> Result<RunReport, CmdError> {
    let json: RunJson = serde_json::from_str(&read_text(path)?)
        .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    let hash = u64::from_str_radix(&json.instance_hash, 16).map_err(|_| {
        data_err(format!(
            "{}: instance hash '{}' is not 16 hex digits",
            path.display(),
            json.instance_hash
        ))
    })?;
    Ok(RunReport {
        method: json.method,
        instance_hash: hash,
        initial_energy: json.initial_energy,
        final_energy: json.final_energy,
        final_labeling: Labeling(Vec::new()),
        moves: Vec::new(),
        sweep_energies: json.sweep_energies,
        sweeps: json.sweeps,
        accepted_moves: json.accepted_moves,
        truncation_used: json.truncation_used,
        converged: true,
    })
}

fn report(args: ReportArgs) -> Result<ExitCode, CmdError> {
    let baseline = load_run(&args.baseline)?;
    let runs: Vec<RunReport> = args
        .runs
        .iter()
        .map(|p| load_run(p))
        .collect::<Result<_, _>>()?;
    let table = relative_energy_report(&runs, &baseline)
        .map_err(|e| data_err(e.to_string()))?;
    let text = render_table(&table);
    match &args.out {
        Some(path) => write_bytes(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn generate(args: GenerateArgs) -> Result<ExitCode, CmdError> {
    let inst = match args.kind.as_str() {
        "random-small" => {
            if args.max_nodes == 0 || args.max_states == 0 {
                return Err(flag_err("random-small needs max-nodes and max-states >= 1"));
            }
            generators::random_small(args.seed, args.max_nodes, args.max_states, args.triangle)
        }
        kind => {
            let pairwise = match kind {
                "potts-grid" => PairwiseKind::Potts { lambda: args.lambda },
                "trunclin-grid" => PairwiseKind::TruncatedLinear {
                    slope: args.slope,
                    cap: args.cap,
                },
                "quad-grid" => PairwiseKind::TruncatedQuadratic {
                    scale: args.scale,
                    cap: args.cap,
                },
                "random-grid" => PairwiseKind::RandomTable {
                    seed: args.seed,
                    magnitude: args.magnitude,
                    force_triangle: args.force_triangle,
                },
                other => return Err(flag_err(format!("unknown generator kind '{other}'"))),
            };
            if args.rows == 0 || args.cols == 0 || args.states == 0 {
                return Err(flag_err("grid kinds need rows, cols, and states >= 1"));
            }
            let unary = if args.observe {
                if !(0.0..=1.0).contains(&args.mask_fraction) {
                    return Err(flag_err("mask-fraction must be in [0, 1]"));
                }
                UnaryKind::Observation {
                    values: generators::masked_observation(
                        args.seed,
                        args.rows,
                        args.cols,
                        args.states,
                        args.mask_fraction,
                    ),
                    weight: args.weight,
                }
            } else {
                UnaryKind::RandomUnary {
                    seed: args.seed.wrapping_add(1_000_000_007),
                    magnitude: args.unary_magnitude,
                }
            };
            let spec = GridSpec {
                rows: args.rows,
                cols: args.cols,
                num_states: args.states,
                pairwise,
                unary,
            };
            generators::generate(&spec).map_err(|e| flag_err(e.to_string()))?
        }
    };
    write_bytes(&args.out, serialize_instance(&inst).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn export_pgm(args: ExportPgmArgs) -> Result<ExitCode, CmdError> {
    let labeling =
        parse_labeling(&read_text(&args.labels)?).map_err(|e| in_file(&args.labels, e))?;
    let bytes = pgm_bytes(&labeling, args.rows, args.cols, args.states)
        .map_err(|e| in_file(&args.labels, e))?;
    write_bytes(&args.out, &bytes)?;
    Ok(ExitCode::SUCCESS)
}
