//! madreg: median-regression MAD estimation, bias corrections, and the
//! Monte Carlo simulation grid.
//!
//! Exit codes: 0 success, 1 validation error, 2 computational failure.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use madreg::{
    fit_median_regression, gamma_check, kde_f0, silverman_bandwidth, standardized_residuals,
    DesignKind, DesignMatrix, Error,
};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Compute(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(1),
            CliError::Compute(_) => ExitCode::from(2),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDimensions(_)
            | Error::DimensionMismatch(_)
            | Error::RankDeficientDesign
            | Error::UnknownToken { .. }
            | Error::Io(_)
            | Error::Csv(_) => CliError::Validation(e.to_string()),
            Error::SolverFailure(_)
            | Error::ZeroMad
            | Error::CorrectionTooLarge { .. }
            | Error::DegenerateSample
            | Error::NegativeGap { .. }
            | Error::InsufficientData(_)
            | Error::ExcessiveFailures { .. } => CliError::Compute(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "madreg",
    version,
    about = "Median regression MAD estimation with exact and empirical bias corrections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Design matrix CSV (row-major, no header)
    #[arg(long)]
    design: PathBuf,
    /// Response vector CSV (one column, no header)
    #[arg(long)]
    response: PathBuf,
    /// Prepend a column of ones
    #[arg(long)]
    intercept: bool,
    /// Objective tolerance
    #[arg(long, default_value_t = madreg::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a median regression; prints coefficients and objective as CSV
    Fit {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Estimate gamma with the empirical bias correction
    Estimate {
        #[command(flatten)]
        data: DataArgs,
        /// `silverman` or a fixed positive bandwidth
        #[arg(long, default_value = "silverman")]
        bandwidth: String,
    },
    /// Run the Monte Carlo grid; writes records.csv, summary.csv, meta.txt
    Simulate {
        /// TOML run configuration; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap worker threads; results do not depend on this
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
        #[arg(long)]
        bandwidth: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Grid axis override, e.g. --p 4,8,16
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        designs: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        errors: Option<Vec<String>>,
    },
    /// Summaries and QQ-plot SVG figures from a records.csv
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write summary.csv only, skip figure rendering
        #[arg(long)]
        csv_only: bool,
    },
    /// Emit a design matrix as CSV (debugging aid)
    Design {
        /// `normal` or `anova`
        #[arg(long)]
        kind: String,
        /// Rows (normal designs)
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: usize,
        /// Group size (anova designs)
        #[arg(long)]
        replicates_per_group: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Fit { data } => {
            let (x, y) = load_problem(&data)?;
            let fit = fit_median_regression(&x, &y, data.tol).map_err(CliError::from)?;
            let mut header: Vec<String> =
                (1..=x.p()).map(|j| format!("beta_{j}")).collect();
            header.push("objective".into());
            println!("{}", header.join(","));
            let mut row: Vec<String> = fit.beta_hat.iter().map(|v| v.to_string()).collect();
            row.push(fit.objective.to_string());
            println!("{}", row.join(","));
            eprintln!(
                "status: {} after {} pivots",
                fit.status.token(),
                fit.iterations
            );
            Ok(())
        }
        Command::Estimate { data, bandwidth } => {
            let bw = config::parse_bandwidth(&bandwidth)?;
            let (x, y) = load_problem(&data)?;
            let fit = fit_median_regression(&x, &y, data.tol).map_err(CliError::from)?;
            let res = standardized_residuals(&x, &y, &fit).map_err(CliError::from)?;
            let h = match bw {
                madreg::Bandwidth::Fixed(h) => h,
                madreg::Bandwidth::Silverman => {
                    silverman_bandwidth(&res).map_err(CliError::from)?
                }
            };
            let f0_hat = kde_f0(&res, madreg::Bandwidth::Fixed(h)).map_err(CliError::from)?;
            let g_check = gamma_check(fit.objective, x.p(), x.n(), f0_hat).map_err(CliError::from)?;
            let c_hat = (x.p() as f64 / x.n() as f64) / (4.0 * f0_hat);
            println!("# n = {}", x.n());
            println!("# p = {}", x.p());
            println!("# bandwidth = {h}");
            println!("gamma_hat,f0_hat,c_hat,gamma_check");
            println!("{},{},{},{}", fit.objective, f0_hat, c_hat, g_check);
            Ok(())
        }
        Command::Simulate {
            config,
            out,
            threads,
            replicates,
            base_seed,
            bandwidth,
            tol,
            p,
            k,
            designs,
            errors,
        } => {
            let mut cfg = match config {
                Some(path) => RunConfig::load(&path)?,
                None => RunConfig::default(),
            };
            if let Some(v) = replicates {
                cfg.replicates = v;
            }
            if let Some(v) = base_seed {
                cfg.base_seed = v;
            }
            if let Some(v) = bandwidth {
                cfg.bandwidth = v;
            }
            if let Some(v) = tol {
                cfg.tol = v;
            }
            if let Some(v) = p {
                cfg.p = v;
            }
            if let Some(v) = k {
                cfg.k = v;
            }
            if let Some(v) = designs {
                cfg.designs = v;
            }
            if let Some(v) = errors {
                cfg.errors = v;
            }
            if let Some(v) = out {
                cfg.output_dir = v;
            }
            simulate(&cfg, threads)
        }
        Command::Report {
            records,
            out,
            csv_only,
        } => {
            let file = File::open(&records).map_err(|e| {
                CliError::Validation(format!("cannot read {}: {e}", records.display()))
            })?;
            let recs = madreg::simulation::read_records_csv(file).map_err(CliError::from)?;
            if recs.is_empty() {
                return Err(CliError::Compute("records file has no rows".into()));
            }
            std::fs::create_dir_all(&out)
                .map_err(|e| CliError::Validation(format!("cannot create output dir: {e}")))?;
            let rows = madreg::reporting::summarize(&recs);
            let summary = File::create(out.join("summary.csv"))
                .map_err(|e| CliError::Validation(e.to_string()))?;
            madreg::reporting::write_summary_csv(&rows, BufWriter::new(summary))
                .map_err(CliError::from)?;
            if !csv_only {
                let written =
                    madreg::reporting::render_qq_grid(&recs, &out).map_err(CliError::from)?;
                for p in &written {
                    eprintln!("wrote {}", p.display());
                }
            }
            Ok(())
        }
        Command::Design {
            kind,
            n,
            p,
            replicates_per_group,
            seed,
            out,
        } => {
            let kind: DesignKind = kind.parse().map_err(|e: Error| CliError::from(e))?;
            let x = match kind {
                DesignKind::Normal => {
                    let n = n.ok_or_else(|| {
                        CliError::Validation("--n is required for normal designs".into())
                    })?;
                    DesignMatrix::normal(n, p, seed).map_err(CliError::from)?
                }
                DesignKind::Anova => {
                    let reps = replicates_per_group.ok_or_else(|| {
                        CliError::Validation(
                            "--replicates-per-group is required for anova designs".into(),
                        )
                    })?;
                    DesignMatrix::anova(p, reps).map_err(CliError::from)?
                }
                DesignKind::External => {
                    return Err(CliError::Validation(
                        "generate `normal` or `anova` designs".into(),
                    ))
                }
            };
            match out {
                Some(path) => {
                    let f = File::create(&path).map_err(|e| CliError::Validation(e.to_string()))?;
                    x.write_csv(BufWriter::new(f)).map_err(CliError::from)?;
                }
                None => x
                    .write_csv(std::io::stdout().lock())
                    .map_err(CliError::from)?,
            }
            Ok(())
        }
    }
}

fn simulate(cfg: &RunConfig, threads: Option<usize>) -> Result<(), CliError> {
    let cells = cfg.cells()?;
    let opts = cfg.options()?;
    let table = match threads {
        Some(t) => {
            if t == 0 {
                return Err(CliError::Validation("--threads must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            pool.install(|| madreg::run_grid_with(&cells, &opts))
        }
        None => madreg::run_grid_with(&cells, &opts),
    }
    .map_err(CliError::from)?;

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Validation(format!("cannot create output dir: {e}")))?;
    let records = File::create(dir.join("records.csv"))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    table
        .write_records_csv(BufWriter::new(records))
        .map_err(CliError::from)?;
    let rows = madreg::reporting::summarize(&table.records);
    let summary = File::create(dir.join("summary.csv"))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    madreg::reporting::write_summary_csv(&rows, BufWriter::new(summary))
        .map_err(CliError::from)?;
    let mut meta = File::create(dir.join("meta.txt"))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    meta.write_all(cfg.to_meta().as_bytes())
        .map_err(|e| CliError::Validation(e.to_string()))?;
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn load_problem(data: &DataArgs) -> Result<(DesignMatrix, Vec<f64>), CliError> {
    let rows = read_numeric_csv(&data.design)?;
    let x = DesignMatrix::from_rows(&rows).map_err(CliError::from)?;
    let x = if data.intercept {
        x.with_intercept().map_err(CliError::from)?
    } else {
        x
    };
    let yrows = read_numeric_csv(&data.response)?;
    let mut y = Vec::with_capacity(yrows.len());
    for (i, row) in yrows.iter().enumerate() {
        if row.len() != 1 {
            return Err(CliError::Validation(format!(
                "response row {i} has {} fields, expected a single column",
                row.len()
            )));
        }
        y.push(row[0]);
    }
    Ok((x, y))
}

fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(e.to_string()))?;
        let mut row = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            row.push(field.parse::<f64>().map_err(|_| {
                CliError::Validation(format!(
                    "{}: row {i}: `{field}` is not a number",
                    path.display()
                ))
            })?);
        }
        rows.push(row);
    }
    Ok(rows)
}
