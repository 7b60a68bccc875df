mod config;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lanedrift::bench::run_bench;
use lanedrift::csvio::{read_drive_log, write_drive_log, write_profile};
use lanedrift::evaluation::{run_mode, summarize, EvalModels, EvaluationMode};
use lanedrift::persist::write_atomic;
use lanedrift::synthetic::{
    make_model, simulate_drive_log, KernelSpec, SyntheticSpec, TransitionFamily,
};
use lanedrift::{
    calibrate, generate_profile, load_model, prepare_segments, save_model, DriveLogSample, Error,
    ModelMetadata,
};

use config::{Overrides, RunConfig};

const EXIT_OTHER: u8 = 1;
const EXIT_ARGUMENT: u8 = 2;
const EXIT_SCHEMA: u8 = 3;
const EXIT_CALIBRATION: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "lanedrift",
    version,
    about = "Calibrate, generate and evaluate lateral-offset models"
)]
struct Cli {
    /// TOML file with run settings; flags override it.
    #[arg(long, global = true, env = "LANEDRIFT_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to one or more drive logs.
    Calibrate {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write an artificial profile as `t,x` CSV.
    Generate {
        #[arg(long)]
        model: PathBuf,
        /// Initial relative offset in [-0.5, 0.5].
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        /// Seconds.
        #[arg(long)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare real snippets with artificial ones, per mode.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "shift,coarse,fine,full")]
        modes: Vec<EvaluationMode>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for `<mode>.json` and `<mode>_summary.csv`.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Simulate a drive log from a synthetic model.
    Synth {
        #[arg(long, value_enum, default_value_t = Family::Banded)]
        family: Family,
        /// Stay probability of the banded chain.
        #[arg(long, default_value_t = 0.9)]
        p: f64,
        #[arg(long, default_value_t = 20)]
        n_c: usize,
        #[arg(long, value_enum, default_value_t = Kernel::Reference)]
        kernel: Kernel,
        #[arg(long, default_value_t = 50.0)]
        minutes: f64,
        /// Lane width in meters.
        #[arg(long, default_value_t = 3.6)]
        lane_width: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the ground-truth model.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Time profile generation.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 18_000)]
        steps: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Banded,
    Uniform,
    Identity,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kernel {
    Reference,
    Identity,
    Zero,
}

#[derive(Serialize)]
struct EvaluationOutput<'a> {
    config: &'a RunConfig,
    model: &'a Path,
    inputs: &'a [PathBuf],
    report: &'a lanedrift::evaluation::EvaluationReport,
}

fn read_tours(paths: &[PathBuf]) -> anyhow::Result<Vec<(String, Vec<DriveLogSample>)>> {
    paths
        .iter()
        .map(|p| {
            let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let log = read_drive_log(BufReader::new(file))
                .with_context(|| format!("reading {}", p.display()))?;
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, log))
        })
        .collect()
}

fn echo_config(config: &RunConfig) -> anyhow::Result<()> {
    eprintln!("effective config: {}", serde_json::to_string(config)?);
    Ok(())
}

fn cmd_calibrate(config: &RunConfig, input: &[PathBuf], out: &Path) -> anyhow::Result<()> {
    echo_config(config)?;
    let params = config.params();
    let cal_cfg = config.calibration(params);
    let tours = read_tours(input)?;
    let segments = prepare_segments(&tours, &cal_cfg)?;
    let metadata = ModelMetadata {
        source_tour: tours
            .iter()
            .map(|(n, _)| n.as_str())
            .collect::<Vec<_>>()
            .join(","),
        calibrated_at: std::env::var("SOURCE_DATE_EPOCH").ok(),
    };
    let cal = calibrate(&segments, &cal_cfg, metadata)?;
    save_model(&cal.model, out)?;
    println!("segments: {}", cal.segment_count);
    println!("usable minutes: {:.2}", cal.usable_minutes);
    let visits: Vec<String> = cal.visits.iter().map(u64::to_string).collect();
    println!("row visits: {}", visits.join(" "));
    println!("spectrum fit residual: {:.6}", cal.spectrum.residual);
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_generate(
    model: &Path,
    x0: f64,
    duration: f64,
    seed: u64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let model = load_model(model)?;
    let profile = generate_profile(&model, x0, duration, seed)?;
    let mut buf = Vec::new();
    write_profile(&mut buf, &profile)?;
    match out {
        Some(path) => write_atomic(path, &buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn cmd_evaluate(
    config: &RunConfig,
    model_path: &Path,
    input: &[PathBuf],
    modes: &[EvaluationMode],
    seed: u64,
    out: &Path,
) -> anyhow::Result<()> {
    echo_config(config)?;
    let model = load_model(model_path)?;
    // segments are cut with the model's own parameters
    let cal_cfg = config.calibration(model.params);
    let segments = prepare_segments(&read_tours(input)?, &cal_cfg)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut models = EvalModels::from(&model);
    models.rounding = cal_cfg.rounding;
    for &mode in modes {
        let report = run_mode(mode, &segments, models, seed)?;
        let name = mode.short_name();
        let json = serde_json::to_string_pretty(&EvaluationOutput {
            config,
            model: model_path,
            inputs: input,
            report: &report,
        })?;
        write_atomic(&out.join(format!("{name}.json")), json.as_bytes())?;
        write_atomic(
            &out.join(format!("{name}_summary.csv")),
            summarize(&report)?.as_bytes(),
        )?;
        let agreeing = report.metrics.len() - report.rejected().count();
        println!(
            "{}: {} snippets, {agreeing} of {} metrics below the KS critical value",
            mode,
            report.snippet_count,
            report.metrics.len()
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    family: Family,
    p: f64,
    n_c: usize,
    kernel: Kernel,
    minutes: f64,
    lane_width: f64,
    seed: u64,
    out: &Path,
    model_out: Option<&Path>,
) -> anyhow::Result<()> {
    let spec = SyntheticSpec {
        n_c,
        family: match family {
            Family::Banded => TransitionFamily::Banded { p },
            Family::Uniform => TransitionFamily::Uniform,
            Family::Identity => TransitionFamily::Identity,
        },
        kernel: match kernel {
            Kernel::Reference => KernelSpec::Taps(lanedrift::synthetic::reference_taps()),
            Kernel::Identity => KernelSpec::Identity,
            Kernel::Zero => KernelSpec::Zero,
        },
        tour_seconds: minutes * 60.0,
        lane_width,
        seed,
        ..SyntheticSpec::default()
    };
    let model = make_model(&spec)?;
    let log = simulate_drive_log(&model, spec.tour_seconds, lane_width, seed)?;
    let mut buf = Vec::new();
    write_drive_log(&mut buf, &log)?;
    write_atomic(out, &buf)?;
    if let Some(path) = model_out {
        save_model(&model, path)?;
    }
    Ok(())
}

fn cmd_bench(model: &Path, steps: usize, reps: usize, seed: u64) -> anyhow::Result<()> {
    let model = load_model(model)?;
    let report = run_bench(&model, steps, reps, seed)?;
    writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&report)?
    )?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = |o: &Overrides| {
        RunConfig::resolve(cli.config.as_deref(), o)
            .map_err(|e| anyhow!(ArgError(format!("{e:#}"))))
    };
    match &cli.command {
        Command::Calibrate {
            input,
            out,
            overrides,
        } => cmd_calibrate(&config(overrides)?, input, out),
        Command::Generate {
            model,
            x0,
            duration,
            seed,
            out,
        } => cmd_generate(model, *x0, *duration, *seed, out.as_deref()),
        Command::Evaluate {
            model,
            input,
            modes,
            seed,
            out,
            overrides,
        } => cmd_evaluate(&config(overrides)?, model, input, modes, *seed, out),
        Command::Synth {
            family,
            p,
            n_c,
            kernel,
            minutes,
            lane_width,
            seed,
            out,
            model_out,
        } => cmd_synth(
            *family,
            *p,
            *n_c,
            *kernel,
            *minutes,
            *lane_width,
            *seed,
            out,
            model_out.as_deref(),
        ),
        Command::Bench {
            model,
            steps,
            reps,
            seed,
        } => cmd_bench(model, *steps, *reps, *seed),
    }
}

#[derive(Debug)]
struct ArgError(String);

impl std::fmt::Display for ArgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ArgError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ArgError>() {
            return EXIT_ARGUMENT;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidParameter { .. } | Error::InvalidSample { .. } => EXIT_ARGUMENT,
                Error::Schema { .. }
                | Error::Load(_)
                | Error::Csv(_)
                | Error::NonMonotonicTime { .. } => EXIT_SCHEMA,
                Error::InsufficientData { .. }
                | Error::EmptySeries(_)
                | Error::Calibration(_)
                | Error::NotCalibrated { .. } => EXIT_CALIBRATION,
                _ => EXIT_OTHER,
            };
        }
    }
    EXIT_OTHER
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
