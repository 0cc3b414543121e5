//! Monte Carlo engine over the (p, k) grid.
//!
//! Every replicate is a pure function of (cell, replicate index): seeds are
//! derived with a stable 64-bit mix, so tables are identical under any
//! parallel schedule.

use std::fmt::Write as _;
use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::design::{DesignKind, DesignMatrix};
use crate::distributions::ErrorDistribution;
use crate::error::{Error, Result};
use crate::estimators::{
    self, Bandwidth, EstimatorSet,
};
use crate::l1fit::{self, FitStatus};

/// Default grid of the simulation study: every combination of these axes,
/// both designs and both error laws, 1000 replicates per cell.
pub const DEFAULT_P: [usize; 4] = [4, 8, 16, 32];
pub const DEFAULT_K: [usize; 4] = [2, 4, 8, 16];
pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_BASE_SEED: u64 = 20260811;

/// SplitMix64 finalizer; the stable mixing step behind all seed derivation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit mix of a base seed and an index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(splitmix64(index)))
}

/// One cell of the simulation grid: n = k * p observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimCell {
    pub p: usize,
    /// Sample information ratio k = n / p.
    pub k: usize,
    pub design: DesignKind,
    pub error: ErrorDistribution,
    pub replicates: usize,
    /// Cell-level seed; replicate seeds are derived from it.
    pub base_seed: u64,
}

impl SimCell {
    pub fn new(
        p: usize,
        k: usize,
        design: DesignKind,
        error: ErrorDistribution,
        replicates: usize,
        base_seed: u64,
    ) -> Result<Self> {
        if p == 0 || k < 2 || replicates == 0 {
            return Err(Error::InvalidDimensions(format!(
                "cell needs p >= 1, k >= 2, replicates >= 1; got p = {p}, k = {k}, replicates = {replicates}"
            )));
        }
        if design == DesignKind::External {
            return Err(Error::InvalidDimensions(
                "simulation cells use the normal or anova design".into(),
            ));
        }
        Ok(SimCell {
            p,
            k,
            design,
            error,
            replicates,
            base_seed,
        })
    }

    pub fn n(&self) -> usize {
        self.p * self.k
    }

    pub fn id(&self) -> String {
        format!(
            "{}_{}_p{}_k{}",
            self.error.token(),
            self.design.token(),
            self.p,
            self.k
        )
    }
}

/// Which part of a replicate failed; failed records are kept and flagged,
/// never dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FailureFlags {
    pub fit: bool,
    pub exact_correction: bool,
    pub empirical_correction: bool,
}

impl FailureFlags {
    pub fn any(&self) -> bool {
        self.fit || self.exact_correction || self.empirical_correction
    }

    pub fn token(&self) -> String {
        let mut parts = Vec::new();
        if self.fit {
            parts.push("fit");
        }
        if self.exact_correction {
            parts.push("exact_correction");
        }
        if self.empirical_correction {
            parts.push("empirical_correction");
        }
        parts.join("+")
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut f = FailureFlags::default();
        if s.is_empty() {
            return Ok(f);
        }
        for part in s.split('+') {
            match part {
                "fit" => f.fit = true,
                "exact_correction" => f.exact_correction = true,
                "empirical_correction" => f.empirical_correction = true,
                _ => {
                    return Err(Error::UnknownToken {
                        what: "failure flag",
                        token: part.to_string(),
                    })
                }
            }
        }
        Ok(f)
    }
}

/// All estimates and Z statistics for one replicate. Undefined quantities
/// are NaN and the corresponding failure flag is set.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub cell_id: String,
    pub error: ErrorDistribution,
    pub design: DesignKind,
    pub p: usize,
    pub k: usize,
    pub n: usize,
    pub replicate: usize,
    pub fit_status: FitStatus,
    pub failure: FailureFlags,
    pub estimates: EstimatorSet,
    pub z_bar: f64,
    pub z_hat: f64,
    pub z_tilde: f64,
    pub z_check: f64,
}

/// Run-level knobs that do not change the grid itself.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub tol: f64,
    pub bandwidth: Bandwidth,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            tol: l1fit::DEFAULT_TOL,
            bandwidth: Bandwidth::Silverman,
        }
    }
}

/// Z = (G / gamma - 1) / sqrt(v / n).
pub fn z_statistic(estimate: f64, gamma_true: f64, abs_variance: f64, n: usize) -> f64 {
    assert!(gamma_true > 0.0, "gamma_true must be positive");
    assert!(abs_variance > 0.0, "abs_variance must be positive");
    assert!(n >= 1, "n must be positive");
    (estimate / gamma_true - 1.0) / (abs_variance / n as f64).sqrt()
}

/// One synthetic replicate: Y = gamma * eps with beta = 0, gamma = 1.
pub fn run_replicate(cell: &SimCell, replicate_index: usize) -> ReplicateRecord {
    run_replicate_with(cell, replicate_index, &SimOptions::default())
}

pub fn run_replicate_with(
    cell: &SimCell,
    replicate_index: usize,
    opts: &SimOptions,
) -> ReplicateRecord {
    let n = cell.n();
    let p = cell.p;
    let rep_seed = derive_seed(cell.base_seed, replicate_index as u64);
    let design_seed = derive_seed(rep_seed, 1);
    let error_seed = derive_seed(rep_seed, 2);

    let x = match cell.design {
        DesignKind::Normal => DesignMatrix::normal(n, p, design_seed),
        DesignKind::Anova => DesignMatrix::anova(p, cell.k),
        DesignKind::External => unreachable!("validated in SimCell::new"),
    }
    .expect("cell dimensions are validated");
    // true parameters: beta = 0, gamma = 1
    let y = cell.error.sample_errors(n, error_seed);

    let gamma_true = 1.0;
    let v = cell.error.abs_variance();
    let f0_true = cell.error.density_at_zero();
    let beta_true = vec![0.0; p];
    let gamma_bar = estimators::gamma_bar(&x, &y, &beta_true).expect("dimensions agree");

    let mut failure = FailureFlags::default();
    let mut est = EstimatorSet {
        gamma_bar,
        gamma_hat: f64::NAN,
        gamma_tilde: f64::NAN,
        gamma_check: f64::NAN,
        c_exact: f64::NAN,
        c_hat: f64::NAN,
        f0_hat: f64::NAN,
    };
    let mut fit_status = FitStatus::Failed;

    match l1fit::fit_median_regression(&x, &y, opts.tol) {
        Err(_) => failure.fit = true,
        Ok(fit) => {
            fit_status = fit.status;
            // gamma_hat <= gamma_bar is exact in real arithmetic, but when
            // beta = 0 itself minimizes the criterion (routine at even k:
            // every group straddles zero) the two sums are equal reals that
            // can round one ulp apart. Snap such ties; anything beyond
            // term-level rounding is a genuine violation and stays visible.
            let tie = 1e-13 * gamma_bar.max(1.0);
            est.gamma_hat = if fit.objective > gamma_bar && fit.objective - gamma_bar <= tie {
                gamma_bar
            } else {
                fit.objective
            };

            let gamma_hat = est.gamma_hat;

            match estimators::exact_correction_factor(p, n, f0_true)
                .and_then(|c| estimators::gamma_tilde(gamma_hat, c).map(|g| (c, g)))
            {
                Ok((c, g)) => {
                    est.c_exact = c;
                    est.gamma_tilde = g;
                }
                Err(_) => failure.exact_correction = true,
            }

            match l1fit::standardized_residuals(&x, &y, &fit)
                .and_then(|res| estimators::kde_f0(&res, opts.bandwidth))
            {
                Ok(f0_hat) => {
                    est.f0_hat = f0_hat;
                    match estimators::exact_correction_factor(p, n, f0_hat)
                        .and_then(|c| estimators::gamma_tilde(gamma_hat, c).map(|g| (c, g)))
                    {
                        Ok((c, g)) => {
                            est.c_hat = c;
                            est.gamma_check = g;
                        }
                        Err(_) => failure.empirical_correction = true,
                    }
                }
                Err(_) => failure.empirical_correction = true,
            }
        }
    }

    ReplicateRecord {
        cell_id: cell.id(),
        error: cell.error,
        design: cell.design,
        p,
        k: cell.k,
        n,
        replicate: replicate_index,
        fit_status,
        failure,
        z_bar: z_statistic(est.gamma_bar, gamma_true, v, n),
        z_hat: z_statistic(est.gamma_hat, gamma_true, v, n),
        z_tilde: z_statistic(est.gamma_tilde, gamma_true, v, n),
        z_check: z_statistic(est.gamma_check, gamma_true, v, n),
        estimates: est,
    }
}

/// Run metadata echoed into `meta.txt` and kept with the table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub version: String,
    pub rng: String,
    pub bandwidth: String,
    pub tol: f64,
}

impl RunMeta {
    fn for_options(opts: &SimOptions) -> Self {
        RunMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: crate::distributions::RNG_NAME.to_string(),
            bandwidth: match opts.bandwidth {
                Bandwidth::Silverman => "silverman".to_string(),
                Bandwidth::Fixed(h) => h.to_string(),
            },
            tol: opts.tol,
        }
    }
}

/// All replicate records of a run, in deterministic (cell, replicate) order.
#[derive(Debug, Clone)]
pub struct SimulationTable {
    pub records: Vec<ReplicateRecord>,
    pub meta: RunMeta,
}

/// Execute every replicate of every cell, in parallel. The resulting table
/// depends only on the cells (order included), never on the schedule.
/// Fails when any cell has more than 50% failed replicates.
pub fn run_grid(cells: &[SimCell]) -> Result<SimulationTable> {
    run_grid_with(cells, &SimOptions::default())
}

pub fn run_grid_with(cells: &[SimCell], opts: &SimOptions) -> Result<SimulationTable> {
    if cells.is_empty() {
        return Err(Error::InsufficientData("empty cell list".into()));
    }
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(ci, cell)| (0..cell.replicates).map(move |r| (ci, r)))
        .collect();
    let total = jobs.len();
    let done = AtomicUsize::new(0);
    let step = (total / 20).max(1);

    let records: Vec<ReplicateRecord> = jobs
        .par_iter()
        .map(|&(ci, r)| {
            let rec = run_replicate_with(&cells[ci], r, opts);
            let d = done.fetch_add(1, Ordering::Relaxed) + 1;
            if d.is_multiple_of(step) || d == total {
                eprintln!("replicate {d}/{total}");
            }
            rec
        })
        .collect();

    let mut offset = 0;
    for cell in cells {
        let slice = &records[offset..offset + cell.replicates];
        let failed = slice.iter().filter(|r| r.failure.any()).count();
        if 2 * failed > cell.replicates {
            return Err(Error::ExcessiveFailures {
                cell: cell.id(),
                failed,
                total: cell.replicates,
            });
        }
        offset += cell.replicates;
    }

    Ok(SimulationTable {
        records,
        meta: RunMeta::for_options(opts),
    })
}

/// The full default grid with per-cell seeds derived from `base_seed` by
/// cell ordinal.
pub fn default_grid(base_seed: u64) -> Vec<SimCell> {
    expand_grid(
        &DEFAULT_P,
        &DEFAULT_K,
        &[DesignKind::Normal, DesignKind::Anova],
        &[
            ErrorDistribution::StandardizedNormal,
            ErrorDistribution::StandardizedLaplace,
        ],
        DEFAULT_REPLICATES,
        base_seed,
    )
    .expect("default grid axes are valid")
}

/// Cross product of the axes in (design, error, p, k) order; the ordinal in
/// this order seeds each cell.
pub fn expand_grid(
    ps: &[usize],
    ks: &[usize],
    designs: &[DesignKind],
    errors: &[ErrorDistribution],
    replicates: usize,
    base_seed: u64,
) -> Result<Vec<SimCell>> {
    let mut cells = Vec::new();
    let mut ordinal = 0u64;
    for &design in designs {
        for &error in errors {
            for &p in ps {
                for &k in ks {
                    cells.push(SimCell::new(
                        p,
                        k,
                        design,
                        error,
                        replicates,
                        derive_seed(base_seed, ordinal),
                    )?);
                    ordinal += 1;
                }
            }
        }
    }
    Ok(cells)
}

pub const RECORDS_HEADER: [&str; 20] = [
    "cell_id",
    "error",
    "design",
    "p",
    "k",
    "n",
    "replicate",
    "fit_status",
    "failure",
    "gamma_bar",
    "gamma_hat",
    "gamma_tilde",
    "gamma_check",
    "c_exact",
    "c_hat",
    "f0_hat",
    "z_bar",
    "z_hat",
    "z_tilde",
    "z_check",
];

impl SimulationTable {
    /// One CSV row per record, in table order, with the documented header.
    /// Output bytes depend only on the records.
    pub fn write_records_csv<W: io::Write>(&self, w: W) -> Result<()> {
        write_records_csv(&self.records, w)
    }
}

pub fn write_records_csv<W: io::Write>(records: &[ReplicateRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(RECORDS_HEADER)?;
    let mut buf = String::new();
    for r in records {
        buf.clear();
        let e = &r.estimates;
        let _ = write!(
            buf,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.cell_id,
            r.error.token(),
            r.design.token(),
            r.p,
            r.k,
            r.n,
            r.replicate,
            r.fit_status.token(),
            r.failure.token(),
            e.gamma_bar,
            e.gamma_hat,
            e.gamma_tilde,
            e.gamma_check,
            e.c_exact,
            e.c_hat,
            e.f0_hat,
            r.z_bar,
            r.z_hat,
            r.z_tilde,
            r.z_check,
        );
        wtr.write_record(buf.split(','))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records_csv<R: io::Read>(r: R) -> Result<Vec<ReplicateRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if row.len() != RECORDS_HEADER.len() {
            return Err(Error::DimensionMismatch(format!(
                "records row has {} fields, expected {}",
                row.len(),
                RECORDS_HEADER.len()
            )));
        }
        let f = |i: usize| -> Result<f64> {
            row[i].parse::<f64>().map_err(|_| Error::UnknownToken {
                what: "numeric field",
                token: row[i].to_string(),
            })
        };
        let u = |i: usize| -> Result<usize> {
            row[i].parse::<usize>().map_err(|_| Error::UnknownToken {
                what: "integer field",
                token: row[i].to_string(),
            })
        };
        out.push(ReplicateRecord {
            cell_id: row[0].to_string(),
            error: row[1].parse()?,
            design: row[2].parse()?,
            p: u(3)?,
            k: u(4)?,
            n: u(5)?,
            replicate: u(6)?,
            fit_status: row[7].parse()?,
            failure: FailureFlags::parse(&row[8])?,
            estimates: EstimatorSet {
                gamma_bar: f(9)?,
                gamma_hat: f(10)?,
                gamma_tilde: f(11)?,
                gamma_check: f(12)?,
                c_exact: f(13)?,
                c_hat: f(14)?,
                f0_hat: f(15)?,
            },
            z_bar: f(16)?,
            z_hat: f(17)?,
            z_tilde: f(18)?,
            z_check: f(19)?,
        });
    }
    Ok(out)
}

/// Normal QQ pairs (Phi^-1((i - 0.5)/m), z_(i)) over the finite values.
pub fn qq_data(z_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut z: Vec<f64> = z_values.iter().copied().filter(|v| v.is_finite()).collect();
    let m = z.len();
    if m < 2 {
        return Err(Error::InsufficientData(format!(
            "QQ data needs at least 2 finite values, got {m}"
        )));
    }
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(z
        .into_iter()
        .enumerate()
        .map(|(i, zi)| {
            let q = (i as f64 + 0.5) / m as f64;
            (normal.inverse_cdf(q), zi)
        })
        .collect())
}
