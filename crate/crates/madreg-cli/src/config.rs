//! Run configuration for the `simulate` subcommand: a TOML file with full
//! command-line override. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use madreg::{Bandwidth, DesignKind, ErrorDistribution, SimCell, SimOptions};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub p: Vec<usize>,
    pub k: Vec<usize>,
    pub designs: Vec<String>,
    pub errors: Vec<String>,
    pub replicates: usize,
    pub base_seed: u64,
    pub tol: f64,
    /// "silverman" or a fixed positive bandwidth.
    pub bandwidth: String,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: madreg::simulation::DEFAULT_P.to_vec(),
            k: madreg::simulation::DEFAULT_K.to_vec(),
            designs: vec!["normal".into(), "anova".into()],
            errors: vec!["normal".into(), "laplace".into()],
            replicates: madreg::simulation::DEFAULT_REPLICATES,
            base_seed: madreg::simulation::DEFAULT_BASE_SEED,
            tol: madreg::DEFAULT_TOL,
            bandwidth: "silverman".into(),
            output_dir: PathBuf::from("madreg-out"),
        }
    }
}

fn no_duplicates<T: PartialEq>(values: &[T]) -> bool {
    values
        .iter()
        .enumerate()
        .all(|(i, v)| !values[..i].contains(v))
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }

    pub fn bandwidth(&self) -> Result<Bandwidth, CliError> {
        parse_bandwidth(&self.bandwidth)
    }

    fn designs(&self) -> Result<Vec<DesignKind>, CliError> {
        self.designs
            .iter()
            .map(|s| match s.parse::<DesignKind>() {
                Ok(DesignKind::External) => Err(CliError::Validation(
                    "simulation designs are `normal` or `anova`".into(),
                )),
                Ok(d) => Ok(d),
                Err(e) => Err(CliError::Validation(e.to_string())),
            })
            .collect()
    }

    fn errors(&self) -> Result<Vec<ErrorDistribution>, CliError> {
        self.errors
            .iter()
            .map(|s| {
                s.parse::<ErrorDistribution>()
                    .map_err(|e| CliError::Validation(e.to_string()))
            })
            .collect()
    }

    /// Validate and expand into seeded cells.
    pub fn cells(&self) -> Result<Vec<SimCell>, CliError> {
        if self.p.is_empty() || self.k.is_empty() || self.designs.is_empty() || self.errors.is_empty()
        {
            return Err(CliError::Validation(
                "grid axes p, k, designs, errors must be nonempty".into(),
            ));
        }
        if !(no_duplicates(&self.p)
            && no_duplicates(&self.k)
            && no_duplicates(&self.designs)
            && no_duplicates(&self.errors))
        {
            return Err(CliError::Validation(
                "grid axes must not contain duplicates".into(),
            ));
        }
        self.bandwidth()?;
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(CliError::Validation(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        madreg::expand_grid(
            &self.p,
            &self.k,
            &self.designs()?,
            &self.errors()?,
            self.replicates,
            self.base_seed,
        )
        .map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn options(&self) -> Result<SimOptions, CliError> {
        Ok(SimOptions {
            tol: self.tol,
            bandwidth: self.bandwidth()?,
        })
    }

    /// TOML echo, itself a valid config reproducing the run.
    pub fn to_meta(&self) -> String {
        let body = toml::to_string(self).expect("config serializes");
        format!(
            "# madreg {} (rng: {})\n# reproduce with: madreg simulate --config <this file>\n{body}",
            env!("CARGO_PKG_VERSION"),
            madreg::distributions::RNG_NAME,
        )
    }
}

pub fn parse_bandwidth(s: &str) -> Result<Bandwidth, CliError> {
    if s == "silverman" {
        return Ok(Bandwidth::Silverman);
    }
    match s.parse::<f64>() {
        Ok(h) if h > 0.0 => Ok(Bandwidth::Fixed(h)),
        _ => Err(CliError::Validation(format!(
            "bandwidth must be `silverman` or a positive number, got `{s}`"
        ))),
    }
}
