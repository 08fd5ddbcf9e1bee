use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcd_bench::{
    export_trace, hedar_suite, jones_suite, run_one_with, run_suite, write_records, Algorithm, BenchError, Result,
    RunRecord, RunSpec, SuiteFile,
};
use abcd_core::testbed::catalog;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "abcd-bench", version, about = "Run DIRECT, block coordinate DIRECT and the local optimizer on benchmark functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one function with one algorithm.
    Run(RunArgs),
    /// Run a suite of specs and print the aggregate table.
    Suite(SuiteArgs),
    /// List registered functions with dimensions, bounds and optima.
    ListFunctions {
        #[arg(long)]
        json: bool,
    },
}

/// Flags shared by `run` and `suite`; each overrides the config file.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_evals: Option<u64>,
    /// Wall-clock seconds per repetition; 0 disables the cap.
    #[arg(long)]
    time_budget: Option<f64>,
    #[arg(long)]
    target_accuracy: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long)]
    t1: Option<usize>,
    #[arg(long)]
    switch_eps: Option<f64>,
    #[arg(long)]
    sqp_first: bool,
    /// Disable the consecutive-stall stopping rule.
    #[arg(long)]
    no_stall: bool,
}

#[derive(Args)]
struct RunArgs {
    /// JSON file holding one run spec.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    algo: Option<Algorithm>,
    #[command(flatten)]
    overrides: Overrides,
    /// Trace CSV; with several repetitions `-r<k>` is inserted before the extension.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// JSON-lines report; printed to stdout when absent.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Hedar,
    Jones,
}

#[derive(Args)]
struct SuiteArgs {
    /// JSON file of the form `{"specs": [...]}`.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Algorithms for a preset suite; repeatable.
    #[arg(long, value_enum)]
    algo: Vec<Algorithm>,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
}

fn apply(spec: &mut RunSpec, o: &Overrides) {
    if let Some(v) = o.eps {
        spec.eps = v;
    }
    if let Some(v) = o.max_evals {
        spec.max_evals = v;
    }
    if let Some(v) = o.time_budget {
        spec.max_wall_seconds = (v > 0.0).then_some(v);
    }
    if let Some(v) = o.target_accuracy {
        spec.target_accuracy = v;
    }
    if let Some(v) = o.seed {
        spec.seed = v;
    }
    if let Some(v) = o.reps {
        spec.repetitions = v;
    }
    if let Some(v) = o.m1 {
        spec.abcd.m1 = v;
    }
    if let Some(v) = o.m2 {
        spec.abcd.m2 = v;
    }
    if let Some(v) = o.t1 {
        spec.abcd.t1 = v;
    }
    if let Some(v) = o.switch_eps {
        spec.abcd.switch_eps = v;
    }
    if o.sqp_first {
        spec.abcd.sqp_first = true;
    }
    if o.no_stall {
        spec.global_stall = false;
    }
}

fn trace_path(base: &Path, rep: usize, reps: usize) -> PathBuf {
    if reps == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}-r{rep}.{}", ext.to_string_lossy()),
        None => format!("{stem}-r{rep}"),
    };
    base.with_file_name(name)
}

fn run(args: RunArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(path) => read_json::<RunSpec>(path)?,
        None => {
            let (Some(f), Some(n)) = (&args.function, args.dim) else {
                return Err(BenchError::Config("--function and --dim are required without --config".into()));
            };
            RunSpec::new(f.clone(), n, Algorithm::AbcdFull)
        }
    };
    if let Some(f) = &args.function {
        spec.function = f.clone();
    }
    if let Some(n) = args.dim {
        spec.dim = n;
    }
    if let Some(a) = args.algo {
        spec.algorithm = a;
    }
    apply(&mut spec, &args.overrides);
    if let Some(path) = &args.report_out {
        // Fail on an unwritable path before spending any evaluations.
        fs::File::create(path).map_err(|e| BenchError::Io {
            path: path.clone(),
            source: e,
        })?;
    }

    let mut records: Vec<RunRecord> = Vec::new();
    let mut trace_err = None;
    let stdout = std::io::stdout();
    run_one_with(&spec, |rec, report| {
        if let Some(base) = &args.trace_out {
            if let Err(e) = export_trace(report, &trace_path(base, rec.repetition, spec.repetitions)) {
                trace_err.get_or_insert(e);
            }
        }
        if args.report_out.is_none() {
            let line = serde_json::to_string(rec).expect("records serialize");
            let _ = writeln!(stdout.lock(), "{line}");
        } else {
            eprintln!(
                "rep {}: best_f = {:e}, evals = {}, {:?}",
                rec.repetition, rec.best_f, rec.evals, rec.termination
            );
        }
        records.push(rec.clone());
    })?;
    if let Some(e) = trace_err {
        return Err(e);
    }
    if let Some(path) = &args.report_out {
        write_records(&records, path)?;
    }
    Ok(())
}

fn suite(args: SuiteArgs) -> Result<()> {
    let algos = if args.algo.is_empty() {
        vec![Algorithm::Direct, Algorithm::AbcdFull]
    } else {
        args.algo.clone()
    };
    let mut specs = match (&args.config, args.preset) {
        (Some(path), _) => read_json::<SuiteFile>(path)?.specs,
        (None, Some(Preset::Hedar)) => hedar_suite(&algos),
        (None, Some(Preset::Jones)) => jones_suite(&algos),
        (None, None) => return Err(BenchError::Config("suite needs --config or --preset".into())),
    };
    for s in &mut specs {
        apply(s, &args.overrides);
    }
    let report = run_suite(&specs, args.parallel)?;
    print!("{}", report.table());
    if let Some(path) = &args.report_out {
        write_records(&report.records, path)?;
    }
    Ok(())
}

fn list_functions(json: bool) -> Result<()> {
    let all = catalog();
    let mut out = String::new();
    if json {
        out = serde_json::to_string_pretty(&all).expect("catalog serializes");
        out.push('\n');
    } else {
        out.push_str(&format!(
            "{:<14} {:<6} {:<12} {:<24} {:>22}\n",
            "name", "set", "dims", "bounds (dim 0)", "f*"
        ));
        for f in all {
            out.push_str(&format!(
                "{:<14} {:<6} {:<12} {:<24} {:>22}\n",
                f.name,
                format!("{:?}", f.set).to_lowercase(),
                f.dims.to_string(),
                format!("[{}, {}]", f.bounds.lower()[0], f.bounds.upper()[0]),
                f.f_star
            ));
        }
    }
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().write_all(out.as_bytes());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Suite(a) => suite(a),
        Command::ListFunctions { json } => list_functions(json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
