//! Command-line surface for workflow execution signatures.
//!
//! Exit codes are scriptable: 0 success (and full match for `compare`),
//! 1 runtime or validation failure, 2 unreadable input, 3 comparison
//! mismatch.

use std::borrow::Cow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tenetdag::demo::{self, TrialSpec};
use tenetdag::record::{read_record, ExecutionRecord};
use tenetdag::signal::FilterMethod;
use tenetdag::tenets::{compare, default_matrix, load_matrix, sign, FieldMatrix, Tenet};
use tenetdag::WorkflowGraph;

#[derive(Parser)]
#[command(
    name = "tenetdag",
    version,
    about = "Sign workflow executions and compare them under reproducibility tenets"
)]
struct Cli {
    /// Field-matrix config file (overrides the TENETDAG_MATRIX env var and
    /// the built-in table).
    #[arg(long, global = true, value_name = "FILE")]
    matrix: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one demo trial and write its execution record.
    Run(RunArgs),
    /// Print tenet signatures of a stored execution record.
    Sign(SignArgs),
    /// Compare two execution records tenet by tenet.
    Compare(CompareArgs),
    /// Run the full trial matrix and emit records plus a signature table.
    Batch(BatchArgs),
    /// Check a workflow graph or execution record file.
    Validate(ValidateArgs),
    /// Dump the active field matrix as a JSON config.
    MatrixDump(MatrixDumpArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Filter implementation: pointwise, fft-iter, or fft-rec.
    #[arg(long, default_value = "fft-iter")]
    method: String,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append the cross-correlation stage.
    #[arg(long)]
    extended: bool,
    /// Record file to write (defaults to <method>-<seed>.json).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Pin the run id so traces (and recompute signatures) repeat.
    #[arg(long)]
    deterministic_trace: bool,
    /// Signal length in samples.
    #[arg(long, default_value_t = 512)]
    length: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.1)]
    stddev: f64,
}

#[derive(Args)]
struct SignArgs {
    /// Execution record file.
    record: PathBuf,
    /// A tenet name, or "all".
    #[arg(long, default_value = "all")]
    tenet: String,
}

#[derive(Args)]
struct CompareArgs {
    record_a: PathBuf,
    record_b: PathBuf,
    /// A tenet name, or "all".
    #[arg(long, default_value = "all")]
    tenet: String,
    /// Emit the reports as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// Comma-separated filter methods.
    #[arg(long, default_value = "pointwise,fft-iter,fft-rec")]
    methods: String,
    /// Seeds 0..N per method.
    #[arg(long, default_value_t = 10)]
    trials: u64,
    /// Append the cross-correlation stage.
    #[arg(long)]
    extended: bool,
    /// Directory for records, payloads, and tables.
    #[arg(long, default_value = "batch-out", value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Workflow graph or execution record file.
    path: PathBuf,
}

#[derive(Args)]
struct MatrixDumpArgs {
    /// Write to a file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Die quietly on closed pipes (`tenetdag batch | head`) instead of
/// panicking mid-print.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    let matrix = match resolve_matrix(cli.matrix.as_deref()) {
        Ok(matrix) => matrix,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args, &matrix),
        Command::Sign(args) => cmd_sign(args, &matrix),
        Command::Compare(args) => cmd_compare(args, &matrix),
        Command::Batch(args) => cmd_batch(args, &matrix),
        Command::Validate(args) => cmd_validate(args),
        Command::MatrixDump(args) => cmd_matrix_dump(args, &matrix),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn resolve_matrix(flag: Option<&Path>) -> Result<Cow<'static, FieldMatrix>> {
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("TENETDAG_MATRIX").map(PathBuf::from));
    match path {
        Some(path) => {
            let matrix = load_matrix(&path)
                .with_context(|| format!("loading field matrix {}", path.display()))?;
            Ok(Cow::Owned(matrix))
        }
        None => Ok(Cow::Borrowed(default_matrix())),
    }
}

fn parse_tenets(selector: &str) -> Result<Vec<Tenet>> {
    if selector == "all" {
        return Ok(Tenet::ALL.to_vec());
    }
    let tenet = Tenet::from_str(selector).map_err(|e| anyhow::anyhow!(e))?;
    Ok(vec![tenet])
}

fn print_signatures(
    record: &ExecutionRecord,
    tenets: &[Tenet],
    matrix: &FieldMatrix,
) -> Result<()> {
    for tenet in tenets {
        let signature = sign(record, *tenet, matrix)?;
        println!(
            "{:<5} {} {}",
            tenet.label(),
            signature.short(),
            signature.hex()
        );
    }
    Ok(())
}

fn cmd_run(args: RunArgs, matrix: &FieldMatrix) -> Result<ExitCode> {
    let method = FilterMethod::from_str(&args.method).map_err(|e| anyhow::anyhow!(e))?;
    let mut spec = TrialSpec::new(method, args.seed).extended(args.extended);
    spec.length = args.length;
    spec.stddev = args.stddev;
    spec.deterministic_trace = args.deterministic_trace;

    let run = demo::execute(&spec)?;
    let path = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", spec.trial_name())));
    run.write(&path)?;
    println!("record: {}", path.display());
    print_signatures(&run.record, &Tenet::ALL, matrix)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sign(args: SignArgs, matrix: &FieldMatrix) -> Result<ExitCode> {
    let tenets = parse_tenets(&args.tenet)?;
    let record = match read_record(&args.record) {
        Ok(record) => record,
        Err(err) => {
            eprintln!("error: {}: {err}", args.record.display());
            return Ok(ExitCode::from(2));
        }
    };
    print_signatures(&record, &tenets, matrix)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: CompareArgs, matrix: &FieldMatrix) -> Result<ExitCode> {
    let tenets = parse_tenets(&args.tenet)?;
    let mut records = Vec::new();
    for path in [&args.record_a, &args.record_b] {
        match read_record(path) {
            Ok(record) => records.push(record),
            Err(err) => {
                eprintln!("error: {}: {err}", path.display());
                return Ok(ExitCode::from(2));
            }
        }
    }

    let mut all_matched = true;
    let mut reports = Vec::new();
    for tenet in &tenets {
        let report = compare(&records[0], &records[1], *tenet, matrix)?;
        all_matched &= report.matched;
        reports.push(report);
    }

    if args.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for report in &reports {
            println!("{}", report.render_text());
        }
    }
    Ok(if all_matched {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn cmd_batch(args: BatchArgs, matrix: &FieldMatrix) -> Result<ExitCode> {
    let mut methods = Vec::new();
    for token in args.methods.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        methods.push(FilterMethod::from_str(token).map_err(|e| anyhow::anyhow!(e))?);
    }
    if methods.is_empty() {
        bail!("no filter methods given");
    }

    let batch = demo::run_batch(&methods, args.trials, args.extended, matrix)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for row in &batch.rows {
        let path = args.out_dir.join(format!("{}.json", row.trial));
        row.run.write(&path)?;
    }
    let text = batch.table_text();
    std::fs::write(args.out_dir.join("table.txt"), &text)?;
    std::fs::write(
        args.out_dir.join("table.json"),
        serde_json::to_string_pretty(&batch.table_json())?,
    )?;
    print!("{text}");
    println!("records: {}", args.out_dir.display());

    let failed = batch.rows.iter().filter(|r| r.failed).count();
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let text = match std::fs::read_to_string(&args.path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: {}: {err}", args.path.display());
            return Ok(ExitCode::from(2));
        }
    };
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(value) => value,
        Err(err) => {
            eprintln!("error: {}: {err}", args.path.display());
            return Ok(ExitCode::from(2));
        }
    };

    if value.get("schema").is_some() {
        // Execution record: schema parsing plus record-level validation.
        let record: ExecutionRecord = match serde_json::from_value(value) {
            Ok(record) => record,
            Err(err) => {
                eprintln!("error: {}: {err}", args.path.display());
                return Ok(ExitCode::from(2));
            }
        };
        return Ok(match record.validate() {
            Ok(()) => {
                println!(
                    "valid execution record ({} components)",
                    record.graph().len()
                );
                ExitCode::SUCCESS
            }
            Err(err) => {
                println!("invalid: {err}");
                ExitCode::from(1)
            }
        });
    }

    let graph: WorkflowGraph = match serde_json::from_value(value) {
        Ok(graph) => graph,
        Err(err) => {
            eprintln!("error: {}: {err}", args.path.display());
            return Ok(ExitCode::from(2));
        }
    };
    let report = graph.validate();
    if report.is_empty() {
        println!("valid workflow graph ({} components)", graph.len());
        Ok(ExitCode::SUCCESS)
    } else {
        for violation in &report.violations {
            println!("{violation}");
        }
        Ok(ExitCode::from(1))
    }
}

fn cmd_matrix_dump(args: MatrixDumpArgs, matrix: &FieldMatrix) -> Result<ExitCode> {
    let json = serde_json::to_string_pretty(&matrix.to_entries())?;
    match args.out {
        Some(path) => {
            std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}
