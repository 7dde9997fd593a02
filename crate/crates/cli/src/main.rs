//! `interlock`: generate assemblies, compute interlocking flows and screen
//! every tiling of a grid.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use interlock::assembly::{build_assembly, tiling_from_group, TruchetTiling};
use interlock::blocking::dbg_combinatorial;
use interlock::enumeration::{enumerate_tilings, screen, Metric};
use interlock::export;
use interlock::flows::{closed_form, initial_load, iterate, transfer_matrix, DEFAULT_MAX_ITER, DEFAULT_TOL};
use interlock::isometry::{GroupName, WallpaperGroup};
use interlock::Error;

const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_UNCONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "interlock", version, about = "Interlocking assemblies of the Versatile Block")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write per-block STLs, a combined STL and a JSON manifest.
    Assemble(AssembleArgs),
    /// Compute the converged frame loads of an assembly.
    Flow(FlowArgs),
    /// Enumerate all tilings of a grid up to symmetry and rank them.
    Enumerate(EnumerateArgs),
}

#[derive(Args)]
struct Source {
    /// Wallpaper group generating the tiling.
    #[arg(long, conflicts_with = "tiling")]
    group: Option<GroupName>,
    /// JSON tiling file with "rows", "cols" and row-major "orientations".
    #[arg(long)]
    tiling: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    rows: usize,
    #[arg(long, default_value_t = 10)]
    cols: usize,
}

#[derive(Args)]
struct AssembleArgs {
    #[command(flatten)]
    source: Source,
    /// Spacing between neighbouring blocks, in block units.
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    /// Scale factors a,b,c along x, y, z.
    #[arg(long, default_value = "1,1,1", value_parser = parse_scale)]
    scale: [f64; 3],
    #[arg(long, short, default_value = "out")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    /// Absorbing-chain closed form.
    Exact,
    /// Repeated propagation steps.
    Iterate,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = Solver::Iterate)]
    solver: Solver,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Also write an SVG heatmap.
    #[arg(long)]
    svg: bool,
    #[arg(long, short, default_value = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value = "max_load", value_parser = parse_metric)]
    metric: Metric,
    /// Largest allowed m + n − 3.
    #[arg(long, default_value_t = 20)]
    cap: usize,
    #[arg(long, short, default_value = "out")]
    output: PathBuf,
}

fn parse_scale(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| "scale needs three comma-separated values".to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            Error::NotConverged { .. } => EXIT_UNCONVERGED,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_IO, message: e.to_string() }
    }
}

fn invalid(message: String) -> Failure {
    Failure { code: EXIT_INVALID, message }
}

fn load_tiling(s: &Source) -> Result<TruchetTiling, Failure> {
    let t = match (&s.group, &s.tiling) {
        (_, Some(path)) => {
            let text = fs::read_to_string(path)?;
            TruchetTiling::from_json(&text)?
        }
        (Some(g), None) => tiling_from_group(&WallpaperGroup::by_name(*g), s.rows, s.cols)?,
        (None, None) => return Err(invalid("either --group or --tiling is required".into())),
    };
    t.ensure_valid()?;
    Ok(t)
}

/// Prints to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn assemble(a: AssembleArgs) -> Result<(), Failure> {
    let t = load_tiling(&a.source)?;
    let asm = build_assembly(&t, a.gap, a.scale)?;
    let files = export::write_assembly(&a.output, &asm)?;
    emit(&format!(
        "blocks={} frame={} core={} files={}\n",
        asm.blocks.len(),
        asm.frame.len(),
        asm.core.len(),
        files.len()
    ));
    Ok(())
}

fn flow(a: FlowArgs) -> Result<(), Failure> {
    let t = load_tiling(&a.source)?;
    if !(a.tol > 0.0) || a.max_iter == 0 {
        return Err(invalid("--tol must be positive and --max-iter at least 1".into()));
    }
    let m = transfer_matrix(&dbg_combinatorial(&t)?)?;
    let x = initial_load(&t, 1.0)?;
    let mass: f64 = x.iter().sum();
    let r = match a.solver {
        Solver::Exact => closed_form(&m, &x, (t.rows, t.cols))?,
        Solver::Iterate => iterate(&m, &x, (t.rows, t.cols), a.tol, a.max_iter)?,
    };
    write(&a.output, "flow.csv", &export::flow_csv(&r))?;
    write(&a.output, "flow.json", &export::flow_json(&r, mass))?;
    if a.svg {
        write(&a.output, "flow.svg", &export::flow_svg(&r))?;
    }
    let diag = export::flow_diagnostics(&r, mass);
    write(&a.output, "diagnostics.txt", &diag)?;
    emit(&export::flow_csv(&r));
    emit(&diag);
    if !r.converged {
        return Err(Failure {
            code: EXIT_UNCONVERGED,
            message: format!(
                "not converged after {} iterations, residual {}",
                r.iterations,
                export::fixed(r.residual_core_mass)
            ),
        });
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs) -> Result<(), Failure> {
    if a.rows < 3 || a.cols < 3 {
        return Err(invalid(format!("grid {}×{} has no core; need at least 3×3", a.rows, a.cols)));
    }
    let need = a.rows + a.cols - 3;
    if need > a.cap {
        return Err(invalid(format!("m+n-3 = {need} exceeds --cap {}; rerun with --cap {need}", a.cap)));
    }
    let start = Instant::now();
    let set = enumerate_tilings(a.rows, a.cols)?;
    let ranked = screen(&set, a.metric)?;
    write(&a.output, "ranked.csv", &export::ranked_csv(&ranked))?;
    write(&a.output, "ranked.json", &export::ranked_json(&ranked, a.metric, set.symmetry))?;
    let unconverged = ranked.iter().filter(|r| !r.converged).count();
    // timing goes to stderr so stdout stays reproducible
    emit(&format!(
        "candidates={} symmetry={} metric={} unconverged={}\n",
        ranked.len(),
        set.symmetry.as_str(),
        a.metric,
        unconverged
    ));
    eprintln!("elapsed={:.3}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("INTERLOCK_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(format!("INTERLOCK_THREADS must be a positive integer, got {v:?}")))?;
    interlock::par::set_threads(n).map_err(Failure::from)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Assemble(a) => assemble(a),
        Command::Flow(a) => flow(a),
        Command::Enumerate(a) => enumerate(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
