use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ortholab::experiments::{self, builtin_functions, dyadic_schedule, NamedFunction, OutputFormat, ScanConfig};
use ortholab::{BvFunction, SystemKind, WeightPlan};

/// Caps the worker pool size.
const THREADS_ENV: &str = "ORTHOLAB_THREADS";

#[derive(Parser)]
#[command(name = "ortholab", version, about = "Exact scans of weighted orthonormal-series kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Trig,
    Walsh,
    Haar,
}

impl From<SystemArg> for SystemKind {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Trig => SystemKind::Trigonometric,
            SystemArg::Walsh => SystemKind::WalshPaley,
            SystemArg::Haar => SystemKind::Haar,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// U_n(f), B_n and the three-term split over a dyadic schedule.
    ScanBounded {
        #[arg(long, value_enum)]
        system: SystemArg,
        /// Weight plan JSON; defaults to maximal d with a_k = 1/k.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// JSON array of functions; defaults to the built-in x, ramp and two_step.
        #[arg(long)]
        functions: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        nmax: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[arg(long)]
        out: PathBuf,
        /// Output format; inferred from the extension of --out when omitted.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// k, sup|Φ_k| and k·sup|Φ_k| for k = 1..=kmax.
    Decay {
        #[arg(long, value_enum)]
        system: SystemArg,
        #[arg(long, default_value_t = 1024)]
        kmax: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// B_n, the maximizing ramp and its functional value.
    Sharpness {
        #[arg(long, value_enum)]
        system: SystemArg,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        nmax: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Partial sums of the weighted and Menshov-Rademacher coefficient sums.
    Criteria {
        #[arg(long, value_enum)]
        system: SystemArg,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 1024)]
        nmax: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized check of the three-term identity; exits 1 on any failure.
    LemmaCheck {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(file).with_context(|| format!("parsing {}", path.display()))
}

fn load_plan(path: Option<&Path>) -> Result<WeightPlan> {
    path.map_or_else(|| Ok(WeightPlan::canonical()), read_json)
}

fn output_format(format: Option<FormatArg>, out: &Path) -> OutputFormat {
    match format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => OutputFormat::Json,
        None => OutputFormat::Csv,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value.parse().with_context(|| format!("{THREADS_ENV}={value} is not a count"))?;
        if threads == 0 {
            bail!("{THREADS_ENV} must be at least 1");
        }
        builder = builder.num_threads(threads);
    }
    Ok(builder.build()?)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::ScanBounded { system, plan, functions, nmax, tolerance, out, format } => {
            let functions = match functions {
                Some(path) => read_json::<Vec<BvFunction>>(&path)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, f)| NamedFunction::new(format!("f{i}"), f))
                    .collect(),
                None => builtin_functions(),
            };
            let mut config = ScanConfig::new(system.into(), load_plan(plan.as_deref())?)
                .with_schedule(dyadic_schedule(nmax))
                .with_functions(functions);
            config.tolerance = tolerance;
            config.output_format = output_format(format, &out);
            let scan = experiments::run_boundedness_scan(&config)?;
            match config.output_format {
                OutputFormat::Csv => scan.table.write_csv(create(&out)?)?,
                OutputFormat::Json => write_json(&out, &scan)?,
            }
            for flag in &scan.flags {
                let verdict = match flag.bounded {
                    Some(true) => "stabilized (heuristic)",
                    Some(false) => "still growing (heuristic)",
                    None => "no verdict",
                };
                eprintln!(
                    "{}: max|U_n| first half {:.6e}, second half {:.6e}: {verdict}",
                    flag.function, flag.first_half_max, flag.last_half_max
                );
            }
            eprintln!("max scaled residual of the three-term split: {:.3e}", scan.max_scaled_residual);
        }
        Command::Decay { system, kmax, out } => {
            let table = experiments::run_decay_check(system.into(), kmax)?;
            table.write_csv(create(&out)?)?;
            eprintln!("max_(k>=2) k·sup|Φ_k| = {:.6}", table.max_scaled);
            if table.envelope_ok == Some(false) {
                eprintln!("envelope {} exceeded", experiments::DECAY_ENVELOPE);
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Sharpness { system, plan, nmax, out, format } => {
            let config = ScanConfig::new(system.into(), load_plan(plan.as_deref())?)
                .with_schedule(dyadic_schedule(nmax))
                .with_functions(vec![]);
            let scan = experiments::run_sharpness_scan(&config)?;
            match output_format(format, &out) {
                OutputFormat::Csv => scan.table.write_csv(create(&out)?)?,
                OutputFormat::Json => write_json(&out, &scan)?,
            }
            match scan.growth_exponent {
                Some(g) => eprintln!("growth exponent of B_n: {g:.4}"),
                None => eprintln!("growth exponent of B_n: undefined (B_n vanishes)"),
            }
            if let Some(s) = scan.max_slack {
                eprintln!("max slack: {s:.6e}");
            }
        }
        Command::Criteria { system, function, plan, nmax, out } => {
            let f: BvFunction = read_json(&function)?;
            let config = ScanConfig::new(system.into(), load_plan(plan.as_deref())?)
                .with_schedule(std::iter::once(1).chain(dyadic_schedule(nmax)).collect());
            let report = experiments::run_coefficient_criteria(&f, &config)?;
            write_json(&out, &report)?;
        }
        Command::LemmaCheck { seed, cases, tolerance } => {
            let report = experiments::lemma_check(seed, cases, tolerance);
            println!(
                "{} cases, {} failures, max scaled residual {:.3e}",
                report.cases, report.failures, report.max_scaled_residual
            );
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_pool().and_then(|pool| pool.install(|| run(cli.command)));
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
