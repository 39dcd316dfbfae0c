use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use twoway_denoise::experiments::{
    generate_instance, run_experiment, table1_scenarios, table2_scenarios, write_reports_json, write_summary_csv,
    GeneratorSpec, ReplicationSettings, Scale,
};
use twoway_denoise::init::{estimate_sigma, initialize, rank_cutoff, InitConfig};
use twoway_denoise::io::{read_matrix_file, write_matrix_file};
use twoway_denoise::{compose_signal, run_pipeline, Error, IterationRecord, ObservedMatrix, PipelineConfig, Result, StoppingMode, ThresholdRule};

#[derive(Parser)]
#[command(name = "twoway", version, about = "Sparse low-rank matrix denoising")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a CSV matrix.
    Denoise(DenoiseArgs),
    /// Print the selected rank and screening summary as JSON.
    Rank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "auto")]
        sigma: String,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
    },
    /// Draw one synthetic instance.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the seed in the spec file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run a benchmark table.
    Bench {
        table: Table,
        #[arg(long, default_value = "desk")]
        scale: String,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Aggregate CSV; defaults to the JSON path with a .csv extension.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Table1,
    Table2,
}

#[derive(clap::Args)]
struct DenoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "auto")]
    rank: String,
    #[arg(long, default_value = "auto")]
    sigma: String,
    #[arg(long, default_value_t = 4.0)]
    beta: f64,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    #[arg(long, default_value = "hard")]
    threshold: String,
    #[arg(long)]
    scad_a: Option<f64>,
    #[arg(long)]
    mcp_b: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Stop on the tolerance rule only, ignoring the step budget.
    #[arg(long)]
    tolerance_only: bool,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_auto<T: std::str::FromStr>(name: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" {
        return Ok(None);
    }
    value
        .parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("--{name}: expected a number or \"auto\", got {value:?}")))
}

fn threshold_rule(args: &DenoiseArgs) -> Result<ThresholdRule> {
    match args.threshold.as_str() {
        "scad" => ThresholdRule::scad(args.scad_a.unwrap_or(3.7)),
        "mcp" => ThresholdRule::mcp(args.mcp_b.unwrap_or(3.0)),
        other => other.parse(),
    }
}

fn load(path: &Path) -> Result<ObservedMatrix> {
    ObservedMatrix::new(read_matrix_file(path)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}

fn denoise(args: &DenoiseArgs) -> Result<()> {
    let x = load(&args.input)?;
    let config = PipelineConfig {
        rank: parse_auto("rank", &args.rank)?,
        sigma: parse_auto("sigma", &args.sigma)?,
        alpha: args.alpha,
        beta: args.beta,
        threshold_rule: threshold_rule(args)?,
        stopping: if args.tolerance_only { StoppingMode::Tolerance } else { StoppingMode::Combined },
        eps: args.eps,
        max_iterations: args.max_iter,
    };
    let out = run_pipeline(&x, &config)?;
    write_matrix_file(&args.output, &out.estimate)?;
    if let Some(path) = &args.report {
        let res = out.result.as_ref();
        let trace: &[IterationRecord] = res.map_or(&[], |r| &r.trace);
        let report = json!({
            "r_hat": out.init.r_hat,
            "rank": out.rank(),
            "sigma_hat": out.noise_estimate.map(|e| e.sigma),
            "sigma": out.sigma,
            "gamma": out.gamma,
            "t_hat": out.t_hat.steps,
            "iterations_run": res.map_or(0, |r| r.iterations_run),
            "stop_reason": res.map(|r| r.stop_reason),
            "row_support": res.map(|r| r.row_support.clone()),
            "col_support": res.map(|r| r.col_support.clone()),
            "transposed": out.transposed,
            "trace": trace,
        });
        write_json(path, &report)?;
    }
    Ok(())
}

fn rank(input: &Path, sigma: &str, alpha: f64) -> Result<()> {
    let x = load(input)?;
    let sigma_hat = estimate_sigma(&x)?.sigma;
    let sigma = match parse_auto::<f64>("sigma", sigma)? {
        Some(s) => s,
        None if sigma_hat > 0.0 => sigma_hat,
        None => return Err(Error::DegenerateNoise),
    };
    // the rank rule is stated for m >= n
    let x = if x.nrows() < x.ncols() { x.transpose() } else { x };
    let (m, n) = x.shape();
    let init = initialize(&x, sigma, &InitConfig { alpha, ..InitConfig::default() })?;
    let sets = &init.sets;
    let delta = rank_cutoff(sets.rows.len(), sets.cols.len(), m, n);
    let report = json!({
        "r_hat": init.r_hat,
        "screened_rows": sets.rows.len(),
        "screened_cols": sets.cols.len(),
        "sigma_hat": sigma_hat,
        "sigma": sigma,
        "delta": delta,
        "cutoff": delta.map(|d| sigma * d),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn simulate(spec: &Path, seed: Option<u64>, out: &Path, truth: Option<&Path>) -> Result<()> {
    let mut spec: GeneratorSpec = serde_json::from_reader(std::fs::File::open(spec)?)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let (factors, x) = generate_instance(&spec)?;
    write_matrix_file(out, x.matrix())?;
    if let Some(path) = truth {
        write_matrix_file(path, &compose_signal(&factors))?;
    }
    Ok(())
}

fn bench(table: Table, scale: &str, reps: usize, seed: u64, out: &Path, summary: Option<&Path>) -> Result<()> {
    let scale: Scale = scale.parse()?;
    let scenarios = match table {
        Table::Table1 => table1_scenarios(scale),
        Table::Table2 => table2_scenarios(scale),
    };
    let settings = ReplicationSettings::default();
    let mut reports = Vec::new();
    for (label, spec) in &scenarios {
        let report = run_experiment(label, spec, reps, seed, &settings)?;
        eprintln!(
            "{label}: L2 {:.2} ({:.2})  L1 {:.2} ({:.2})  rescaled {:.2} / {:.2}  rank recovery {:.2}",
            report.mean_l2,
            report.se_l2,
            report.mean_l1,
            report.se_l1,
            report.rescaled_l2,
            report.rescaled_l1,
            report.rank_recovery_rate
        );
        reports.push(report);
    }
    write_reports_json(&reports, out)?;
    let csv_path = summary.map_or_else(|| out.with_extension("csv"), Path::to_path_buf);
    write_summary_csv(&reports, &csv_path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Denoise(args) => denoise(args),
        Command::Rank { input, sigma, alpha } => rank(input, sigma, *alpha),
        Command::Simulate { spec, seed, out, truth } => simulate(spec, *seed, out, truth.as_deref()),
        Command::Bench {
            table,
            scale,
            reps,
            seed,
            out,
            summary,
        } => bench(*table, scale, *reps, *seed, out, summary.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
