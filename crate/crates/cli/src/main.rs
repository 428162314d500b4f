//! `dhom`: witness sets and diagonal homotopy cascades from the command line.
//!
//! Exit codes: 0 success, 1 negative membership, 2 usage, parse, I/O or
//! inconclusive membership, 3 containment (`A∩B = B`), 4 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dhom::diagonal::{Containment, DiagonalError, DiagonalProblem, Mode, RunOptions};
use dhom::fixtures::Example;
use dhom::linalg::CVec;
use dhom::membership::member;
use dhom::polysys::{parse_constant, parse_system};
use dhom::polysys::PolySystem;
use dhom::report::{bench, intersect};
use dhom::tracker::TrackSettings;
use dhom::witness::{read_witness, witness_hypersurface, witness_linear, write_witness, WitnessSet};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONTAINED: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "dhom", version, about = "Intersect solution components with diagonal homotopy cascades")]
struct Cli {
    /// Worker threads for path tracking (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a witness set for a hypersurface or a linear component.
    Witness(WitnessArgs),
    /// Compute a witness superset for A∩B.
    Intersect(IntersectArgs),
    /// Test whether a point lies on a witnessed component.
    Member(MemberArgs),
    /// Time the built-in examples in both modes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SeedArg {
    #[arg(long, env = "DHOM_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct WitnessArgs {
    /// System file holding a single polynomial.
    #[arg(long, conflicts_with_all = ["linear", "system"], required_unless_present = "linear")]
    hypersurface: Option<PathBuf>,
    /// System file with the linear equations of the component.
    #[arg(long, requires = "system")]
    linear: Option<PathBuf>,
    /// System file the linear component belongs to.
    #[arg(long, requires = "linear")]
    system: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Intrinsic,
    Extrinsic,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeArg::Intrinsic => vec![Mode::Intrinsic],
            ModeArg::Extrinsic => vec![Mode::Extrinsic],
            ModeArg::Both => vec![Mode::Intrinsic, Mode::Extrinsic],
        }
    }
}

#[derive(Args)]
struct Tolerances {
    /// Relative slack threshold for witness candidates.
    #[arg(long)]
    classify_tol: Option<f64>,
    /// Endpoint matching distance in membership tests.
    #[arg(long)]
    member_tol: Option<f64>,
    /// Corrector tolerance of the path tracker.
    #[arg(long)]
    newton_tol: Option<f64>,
    /// Endgame refinement tolerance.
    #[arg(long)]
    refine_tol: Option<f64>,
}

impl Tolerances {
    fn options(&self) -> RunOptions {
        let mut o = RunOptions::default();
        if let Some(t) = self.classify_tol {
            o.classify_tol = t;
        }
        if let Some(t) = self.member_tol {
            o.member_tol = t;
        }
        if let Some(t) = self.newton_tol {
            o.track.newton_tol = t;
        }
        if let Some(t) = self.refine_tol {
            o.track.refine_tol = t;
        }
        o
    }
}

#[derive(Args)]
struct IntersectArgs {
    #[arg(long, requires = "wb", required_unless_present = "example")]
    wa: Option<PathBuf>,
    #[arg(long, requires = "wa")]
    wb: Option<PathBuf>,
    /// Built-in example: 1, 2, synthetic3, disjoint or containment.
    #[arg(long, conflicts_with_all = ["wa", "wb"])]
    example: Option<Example>,
    #[arg(long, value_enum, default_value = "intrinsic")]
    mode: ModeArg,
    #[command(flatten)]
    seed: SeedArg,
    /// Highest cascade level to visit.
    #[arg(long)]
    hmax: Option<usize>,
    /// Lowest cascade level to visit.
    #[arg(long)]
    h0: Option<usize>,
    #[command(flatten)]
    tol: Tolerances,
    /// Output directory for the report and per-dimension witness files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MemberArgs {
    #[arg(long)]
    witness: PathBuf,
    /// Comma-separated coordinates, e.g. "1, 0, 2-3*i".
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long, default_value_t = dhom::membership::MATCH_TOL)]
    tol: f64,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Also write the tables as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error paired with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }
}

impl From<DiagonalError> for Failure {
    fn from(e: DiagonalError) -> Self {
        let code = match e {
            DiagonalError::Degenerate { .. } | DiagonalError::Linalg(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn read_system(path: &Path) -> Result<PolySystem, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_system(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_witness(path: &Path) -> Result<WitnessSet, Failure> {
    read_witness(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_witness(args: &WitnessArgs) -> Outcome {
    let seed = args.seed.seed;
    let ws = match (&args.hypersurface, &args.linear, &args.system) {
        (Some(f), _, _) => witness_hypersurface(&read_system(f)?, seed),
        (None, Some(comp), Some(sys)) => witness_linear(&read_system(comp)?, &read_system(sys)?, seed),
        _ => return Err(Failure::usage("give --hypersurface, or --linear with --system")),
    }
    .map_err(Failure::usage)?;
    write_witness(&ws, &args.out).map_err(Failure::usage)?;
    println!("dim {} degree {}", ws.dim(), ws.degree());
    Ok(0)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_intersect(args: &IntersectArgs) -> Outcome {
    let seed = args.seed.seed;
    let problem = match (&args.example, &args.wa, &args.wb) {
        (Some(ex), _, _) => ex.problem(seed)?,
        (None, Some(a), Some(b)) => DiagonalProblem::new(load_witness(a)?, load_witness(b)?, seed)?,
        _ => return Err(Failure::usage("give --wa and --wb, or --example")),
    };
    let problem = problem.with_bounds(args.hmax, args.h0)?;
    let options = args.tol.options();
    let (report, supersets) = intersect(&problem, &args.mode.modes(), &options)?;
    print!("{}", report.table());
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
        let json = serde_json::to_string_pretty(&report).map_err(Failure::usage)?;
        write_file(&dir.join("report.json"), &json)?;
        write_file(&dir.join("report.txt"), &report.table())?;
        for s in &supersets {
            let mode = serde_json::to_value(s.mode).map_err(Failure::usage)?;
            let mode = mode.as_str().unwrap_or("run");
            for ws in &s.witness_sets {
                let path = dir.join(format!("{mode}_dim{}.wit", ws.dim()));
                write_witness(ws, &path).map_err(Failure::usage)?;
            }
        }
    }
    if report.containment == Containment::BContainedInA {
        println!("A∩B = B");
        return Ok(EXIT_CONTAINED);
    }
    let failed: usize = supersets.iter().map(|s| s.failed_paths).sum();
    if failed > 0 {
        return Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!("{failed} path(s) failed after restart"),
        });
    }
    Ok(0)
}

fn parse_point(text: &str) -> Result<CVec, Failure> {
    let coords = text
        .split(',')
        .map(|s| parse_constant(s).map_err(|e| Failure::usage(format!("point entry `{}`: {e}", s.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CVec::from_vec(coords))
}

fn cmd_member(args: &MemberArgs) -> Outcome {
    let ws = load_witness(&args.witness)?;
    let point = parse_point(&args.point)?;
    // inconclusive answers share the usage exit code
    let r = member(&ws, &point, args.tol, args.seed.seed, &TrackSettings::default()).map_err(Failure::usage)?;
    println!(
        "{} distance {:.3e} residual {:.3e}",
        if r.member { "member" } else { "not a member" },
        r.distance,
        r.residual
    );
    Ok(if r.member { 0 } else { EXIT_NEGATIVE })
}

fn cmd_bench(args: &BenchArgs) -> Outcome {
    let report = bench(args.seed.seed, args.repeats, &RunOptions::default());
    print!("{}", report.tables());
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(Failure::usage)?;
        write_file(path, &json)?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("dhom: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match &cli.command {
        Command::Witness(a) => cmd_witness(a),
        Command::Intersect(a) => cmd_intersect(a),
        Command::Member(a) => cmd_member(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("dhom: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
