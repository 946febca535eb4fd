//! Command-line front end: parameter sweeps, diagnostic reports and a
//! self-check of the core library.

mod report;
mod spec;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use report::{Params, Report};
use spec::{named_spec, parse_grid, SweepSpec, NAMED_SPECS};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser)]
#[command(name = "zeropi", version, about = "Spectra and symmetry diagnostics for the 0-pi qubit and its rotor models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep from a JSON spec file or a built-in name.
    Sweep {
        /// Path to a JSON spec, or one of fig1b, fig2, fig3a, fig3b, fig3c, fig3d.
        spec: String,
        /// Sweep a different parameter; it is removed from the fixed set.
        #[arg(long)]
        axis: Option<String>,
        /// Fixed parameter `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
        set: Vec<String>,
        /// Grid as `a,b,c` or `start:stop:num`.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// CSV destination; the metadata sidecar goes to `<out>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        count: Option<usize>,
        /// Absolute convergence tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print a diagnostic report.
    Report {
        kind: ReportKind,
        /// Parameter override `key=value`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Write the report table as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the library invariants and reference spectra.
    Selfcheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Symmetry,
    Swcheck,
    Semiclassics,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn threads() -> usize {
    std::env::var("ZEROPI_THREADS").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

fn load_spec(arg: &str) -> Result<SweepSpec, String> {
    if let Some(s) = named_spec(arg) {
        return Ok(s);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(format!("`{arg}` is neither a spec file nor a built-in spec ({})", NAMED_SPECS.join(", ")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {arg}: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid spec {arg}: {e}"))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

struct SweepArgs {
    spec: String,
    axis: Option<String>,
    set: Vec<String>,
    grid: Option<String>,
    out: Option<PathBuf>,
    count: Option<usize>,
    tol: Option<f64>,
}

fn sweep(args: SweepArgs) -> ExitCode {
    let SweepArgs { spec, axis, set, grid, out, count, tol } = args;
    let mut spec = match load_spec(&spec) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    match parse_params(&set) {
        Ok(p) => spec.fixed.extend(p),
        Err(e) => return fail(EXIT_VALIDATION, e),
    }
    if let Some(a) = axis {
        spec.fixed.remove(&a);
        if grid.is_none() && a != spec.axis.name {
            return fail(EXIT_VALIDATION, "--axis needs --grid");
        }
        spec.axis.name = a;
    }
    if let Some(g) = grid {
        match parse_grid(&g) {
            Ok(v) => spec.axis.grid = v,
            Err(e) => return fail(EXIT_VALIDATION, e),
        }
    }
    if let Some(c) = count {
        spec.count = c;
    }
    if let Some(t) = tol {
        spec.tolerances.abs_tol = t;
    }
    let points = match spec.validate() {
        Ok(p) => p,
        Err(e) if e.starts_with("missing parameter") => return fail(EXIT_VALIDATION, format!("{e}; supply it with --set")),
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    zeropi_core::spectral::set_blas_threads(1);
    let rows = sweep::run_sweep(&spec, &points, threads());
    let csv = sweep::to_csv(&rows, spec.count);
    let out = out.or_else(|| spec.output_path.clone().map(PathBuf::from));
    match &out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &csv) {
                return fail(EXIT_VALIDATION, format!("cannot write {}: {e}", path.display()));
            }
            let meta = serde_json::to_string_pretty(&sweep::sidecar(&spec, &rows)).expect("sidecar serializes");
            if let Err(e) = std::fs::write(sidecar_path(path), meta + "\n") {
                return fail(EXIT_VALIDATION, format!("cannot write sidecar: {e}"));
            }
        }
        None => print!("{csv}"),
    }
    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for r in &failed {
            eprintln!("warning: {} = {}: {}", spec.axis.name, r.axis, r.error.as_deref().unwrap_or_default());
        }
        ExitCode::from(EXIT_NOT_CONVERGED)
    }
}

fn parse_params(kv: &[String]) -> Result<Params, String> {
    let mut p = Params::new();
    for s in kv {
        let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("bad value in `{s}`"))?;
        p.insert(k.trim().to_string(), v);
    }
    Ok(p)
}

fn emit(rep: zeropi_core::Result<Report>, out: Option<PathBuf>) -> ExitCode {
    let rep = match rep {
        Ok(r) => r,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    print!("{}", rep.text);
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&rep).expect("report serializes");
        if let Err(e) = std::fs::write(&path, json + "\n") {
            return fail(EXIT_VALIDATION, format!("cannot write {}: {e}", path.display()));
        }
    }
    if rep.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INVARIANT)
    }
}

/// OpenBLAS picks its kernels when the library loads, so a faulty
/// autodetected kernel can only be replaced by restarting the process.
fn ensure_sound_blas() {
    const VAR: &str = "OPENBLAS_CORETYPE";
    if std::env::var_os(VAR).is_some() || zeropi_core::spectral::blas_self_test(256) < 1e-12 {
        return;
    }
    use std::os::unix::process::CommandExt;
    let Ok(exe) = std::env::current_exe() else { return };
    let err = std::process::Command::new(exe).args(std::env::args_os().skip(1)).env(VAR, "Haswell").exec();
    eprintln!("warning: linked BLAS failed its self-test and restarting with {VAR}=Haswell failed: {err}");
}

fn main() -> ExitCode {
    ensure_sound_blas();
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep { spec, axis, set, grid, out, count, tol } => sweep(SweepArgs { spec, axis, set, grid, out, count, tol }),
        Command::Report { kind, params, out } => {
            let p = match parse_params(&params) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_VALIDATION, e),
            };
            let rep = match kind {
                ReportKind::Symmetry => report::symmetry(&p),
                ReportKind::Swcheck => report::swcheck(&p),
                ReportKind::Semiclassics => report::semiclassics(&p),
            };
            emit(rep, out)
        }
        Command::Selfcheck => emit(report::selfcheck(), None),
    }
}
