use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdiqkd::channel::DEFAULT_ALPHA_DB_PER_KM;
use mdiqkd::io::{self, output::csv_header, OutputRow};
use mdiqkd::sweep::{self, ArmSplit, SweepConfig, SweepResult};
use mdiqkd::{validate, Error};

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_SUITE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "mdiqkd",
    version,
    about = "MDI-QKD key rates over depolarizing and dephasing fiber links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a single operating point.
    Point(PointArgs),
    /// Evaluate a grid of distances and noise levels and write it as CSV.
    Sweep(SweepArgs),
    /// Run the consistency suites.
    Validate,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Human,
}

#[derive(Args, Debug)]
struct PointArgs {
    /// Mean thermal photon number per arm.
    #[arg(long, allow_negative_numbers = true)]
    nth: f64,
    /// Phase-noise standard deviation in radians.
    #[arg(long, allow_negative_numbers = true)]
    sigma: f64,
    /// Total Alice-to-Bob distance in km. Implied by an explicit arm split.
    #[arg(long = "L", allow_negative_numbers = true)]
    length: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ALPHA_DB_PER_KM, allow_negative_numbers = true)]
    alpha: f64,
    /// Error-correction efficiency.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    f: f64,
    /// `symmetric` or `a=KM,b=KM`.
    #[arg(long, default_value = "symmetric", value_parser = parse_split)]
    arm_split: ArmSplit,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// key = value grid file; the default grid is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Write one skr_clamped column per curve instead of one row per point.
    #[arg(long)]
    pivot: bool,
    /// Overrides `alpha_db_per_km` from the config.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Overrides `f` from the config.
    #[arg(long, allow_negative_numbers = true)]
    f: Option<f64>,
    /// Overrides `arm_split` from the config.
    #[arg(long, value_parser = parse_split)]
    arm_split: Option<ArmSplit>,
    /// Worker threads; all available cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_split(s: &str) -> Result<ArmSplit, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn point(args: PointArgs) -> mdiqkd::Result<()> {
    let l_km = match (args.arm_split, args.length) {
        (ArmSplit::Explicit { a_km, b_km }, Some(l)) if l != a_km + b_km => {
            return Err(Error::Config {
                key: "L".into(),
                message: format!(
                    "{l} km does not equal the arm split total {} km",
                    a_km + b_km
                ),
            })
        }
        (ArmSplit::Explicit { a_km, b_km }, _) => a_km + b_km,
        (ArmSplit::Symmetric, Some(l)) => l,
        (ArmSplit::Symmetric, None) => {
            return Err(Error::Config {
                key: "L".into(),
                message: "required with a symmetric arm split".into(),
            })
        }
    };
    let row = sweep::evaluate_point(
        l_km,
        args.nth,
        args.sigma,
        args.alpha,
        args.f,
        args.arm_split,
    )?;
    let out = OutputRow::from(&row);
    match args.format {
        Format::Csv => println!("{}\n{}", csv_header(), out.to_csv_line()),
        Format::Human => print!("{}", out.to_human()),
    }
    Ok(())
}

fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn print_summary(result: &SweepResult) -> mdiqkd::Result<()> {
    let cfg = &result.metadata.config;
    println!("rows: {}", result.rows.len());
    let l_max = cfg.distances_km.iter().copied().fold(0.0, f64::max);
    if cfg.arm_split != ArmSplit::Symmetric || l_max <= 0.0 {
        println!("cutoff search skipped: needs a symmetric split and a positive maximum distance");
        return Ok(());
    }
    for &n in &cfg.n_th_values {
        for &s in &cfg.sigma_theta_values {
            let cutoff = sweep::find_cutoff_distance(n, s, cfg.alpha_db_per_km, cfg.f, l_max)?;
            let text = match cutoff {
                Some(l) => format!("{l:.2} km"),
                None => format!("none within {l_max} km"),
            };
            println!("cutoff n_th={n} sigma_theta={s}: {text}");
        }
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> mdiqkd::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => io::load_config(path)?,
        None => SweepConfig::default(),
    };
    if let Some(alpha) = args.alpha {
        cfg.alpha_db_per_km = alpha;
    }
    if let Some(f) = args.f {
        cfg.f = f;
    }
    if let Some(split) = args.arm_split {
        cfg.arm_split = split;
    }
    let result = match args.threads {
        Some(t) => sweep::run_sweep_with_threads(&cfg, t)?,
        None => sweep::run_sweep(&cfg)?,
    };
    io::save_sweep(&result, &args.out, args.pivot)?;
    io::save_metadata(&result, &metadata_path(&args.out))?;
    println!("wrote {}", args.out.display());
    print_summary(&result)
}

fn run_validate() -> mdiqkd::Result<ExitCode> {
    let report = validate::run_validation()?;
    print!("{report}");
    if !report.passed() {
        match report.first_failure() {
            Some((suite, case)) => eprintln!("validation failed in `{suite}`: {case}"),
            None => eprintln!("validation failed: a suite ran no cases"),
        }
        return Ok(ExitCode::from(EXIT_SUITE));
    }
    println!("all asserted suites passed");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Point(args) => point(args).map(|_| ExitCode::SUCCESS),
        Command::Sweep(args) => run_sweep(args).map(|_| ExitCode::SUCCESS),
        Command::Validate => run_validate(),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(if e.is_validation() {
            EXIT_VALIDATION
        } else {
            EXIT_IO
        })
    })
}
