use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bosonlab::config::{parse_check_list, parse_config, Format, RunConfig};
use bosonlab::pipeline::{build_model, evaluate_cell};
use bosonlab::report::{emit_report, num, write_cells_csv, write_json_lines, write_line, FailureKind, Provenance, Report};
use bosonlab::sweep::{default_threads, run_sweep, SweepPlan};
use bosonlab_core::model::ModelKind;
use bosonlab_core::spectral::full_spectrum_small;
use bosonlab_core::verifier::Status;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_FAIL: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(name = "bosonlab", version, about = "Truncated Fock-space models of an atom coupled to a boson field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the model and print its dimensions.
    Build(Args),
    /// Compute the ground eigenspace.
    Solve(Args),
    /// Run the enabled checks on one model.
    Verify(Args),
    /// Run the sweep plan from the `[sweep]` section.
    Sweep(Args),
    /// Print the full spectrum of a small model.
    Spectrum(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `solver.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<CliFormat>,
    /// Comma-separated check names replacing the configured selection.
    #[arg(long)]
    checks: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliFormat {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

type Outcome = Result<u8, (u8, String)>;

fn load(args: &Args) -> Result<RunConfig, (u8, String)> {
    let text = fs::read_to_string(&args.config).map_err(|e| (EXIT_CONFIG, format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| (EXIT_CONFIG, e.to_string().trim_end().to_string()))?;
    if let Some(s) = args.seed {
        cfg.solver.seed = s;
    }
    if let Some(list) = &args.checks {
        cfg.checks.enabled = parse_check_list(list).map_err(|e| (EXIT_CONFIG, format!("--checks: {e}")))?;
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = Some(dir.clone());
    }
    if let Some(f) = args.format {
        cfg.output.formats = vec![match f {
            CliFormat::Json => Format::Json,
            CliFormat::Csv => Format::Csv,
        }];
    }
    Ok(cfg)
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Build(a) => build(&load(&a)?),
        Command::Solve(a) => {
            let mut cfg = load(&a)?;
            cfg.checks.enabled.clear();
            single(&cfg)
        }
        Command::Verify(a) => single(&load(&a)?),
        Command::Sweep(a) => {
            let cfg = load(&a)?;
            let plan = SweepPlan::from_config(&cfg).map_err(|e| (EXIT_CONFIG, format!("sweep: {e}")))?;
            let report = run_sweep(&plan, a.threads.unwrap_or_else(default_threads));
            finish(&cfg, &report)
        }
        Command::Spectrum(a) => spectrum(&load(&a)?),
    }
}

fn single(cfg: &RunConfig) -> Outcome {
    let report = Report {
        provenance: Provenance::new(&cfg.config_hash, cfg.seed()),
        cells: vec![evaluate_cell(cfg, 0, &[])],
        families: Vec::new(),
    };
    finish(cfg, &report)
}

fn io_err(e: impl std::fmt::Display) -> (u8, String) {
    (EXIT_FAIL, e.to_string())
}

fn finish(cfg: &RunConfig, report: &Report) -> Outcome {
    match &cfg.output.dir {
        Some(dir) => {
            for p in emit_report(report, dir, &cfg.output.name, &cfg.output.formats).map_err(io_err)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            let out = io::stdout().lock();
            if cfg.output.formats.first() == Some(&Format::Csv) {
                write_cells_csv(report, out).map_err(io_err)?;
            } else {
                write_json_lines(report, out).map_err(io_err)?;
            }
        }
    }
    let failed_cells = report.cells.iter().filter(|c| c.failure.is_some()).count();
    eprintln!(
        "{} cell(s), {} failed; checks: {} pass, {} fail, {} skipped, {} inconclusive",
        report.cells.len(),
        failed_cells,
        report.count(Status::Pass),
        report.count(Status::Fail),
        report.count(Status::Skipped),
        report.count(Status::Inconclusive),
    );
    Ok(report.exit_code() as u8)
}

fn exit_for(e: &bosonlab_core::Error) -> u8 {
    match FailureKind::of(e) {
        FailureKind::Config => EXIT_CONFIG,
        FailureKind::Solver => EXIT_SOLVER,
        FailureKind::Other => EXIT_FAIL,
    }
}

/// Writes rows as JSON lines or CSV, to stdout or `<dir>/<name>_<suffix>`.
fn emit_rows(cfg: &RunConfig, suffix: &str, header: &[&str], rows: &[Vec<Value>]) -> Result<(), (u8, String)> {
    let csv = cfg.output.formats.first() == Some(&Format::Csv);
    let mut w: Box<dyn Write> = match &cfg.output.dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err)?;
            let path = dir.join(format!("{}_{suffix}.{}", cfg.output.name, if csv { "csv" } else { "jsonl" }));
            eprintln!("wrote {}", path.display());
            Box::new(io::BufWriter::new(fs::File::create(path).map_err(io_err)?))
        }
        None => Box::new(io::stdout().lock()),
    };
    if csv {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(header).map_err(io_err)?;
        for r in rows {
            c.write_record(r.iter().map(|v| match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => match n.as_f64() {
                    Some(x) if n.is_f64() => format!("{x:.16e}"),
                    _ => n.to_string(),
                },
                other => other.to_string(),
            }))
            .map_err(io_err)?;
        }
        c.flush().map_err(io_err)?;
    } else {
        for r in rows {
            let obj: serde_json::Map<String, Value> = header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect();
            write_line(&mut w, &Value::Object(obj)).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    Ok(())
}

fn build(cfg: &RunConfig) -> Outcome {
    let m = build_model(cfg).map_err(|e| (exit_for(&e), e.to_string()))?;
    let row = vec![
        json!(match m.kind {
            ModelKind::Gsb => "gsb",
            ModelKind::PfToy => "pf-toy",
        }),
        json!(m.left_dim),
        json!(m.basis.modes()),
        json!(m.basis.n_max()),
        json!(m.basis.dim()),
        json!(m.dim()),
        json!(m.h.nnz()),
        num(m.coupling),
        num(m.mass),
        json!(cfg.config_hash),
    ];
    let header = ["kind", "atom_dim", "modes", "n_max", "fock_dim", "dim", "nnz", "coupling", "mass", "config_hash"];
    emit_rows(cfg, "build", &header, &[row])?;
    Ok(0)
}

fn spectrum(cfg: &RunConfig) -> Outcome {
    let m = build_model(cfg).map_err(|e| (exit_for(&e), e.to_string()))?;
    let eig = full_spectrum_small(&m.h, &cfg.solver).map_err(|e| (exit_for(&e), e.to_string()))?;
    let rows: Vec<Vec<Value>> = eig.iter().enumerate().map(|(i, &e)| vec![json!(i), num(e)]).collect();
    emit_rows(cfg, "spectrum", &["index", "energy"], &rows)?;
    Ok(0)
}
