//! Design matrices: i.i.d. standard normal covariates or balanced ANOVA
//! dummy blocks.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignKind {
    /// Entries are i.i.d. N(0,1).
    Normal,
    /// Balanced group indicators: one 1 per row, n/p ones per column.
    Anova,
    /// Loaded from external data; no structural guarantees.
    External,
}

impl DesignKind {
    pub fn token(self) -> &'static str {
        match self {
            DesignKind::Normal => "normal",
            DesignKind::Anova => "anova",
            DesignKind::External => "external",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(DesignKind::Normal),
            "anova" => Ok(DesignKind::Anova),
            "external" => Ok(DesignKind::External),
            _ => Err(Error::UnknownToken {
                what: "design kind",
                token: s.to_string(),
            }),
        }
    }
}

/// An immutable n x p covariate matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    kind: DesignKind,
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    /// n x p matrix of i.i.d. standard normal entries, filled row-major.
    /// Deterministic in (n, p, seed).
    pub fn normal(n: usize, p: usize, seed: u64) -> Result<Self> {
        if p == 0 || n < p {
            return Err(Error::InvalidDimensions(format!(
                "normal design needs n >= p >= 1, got n = {n}, p = {p}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * p)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(DesignMatrix {
            kind: DesignKind::Normal,
            n,
            p,
            data,
        })
    }

    /// Balanced block-indicator matrix: rows i in group g carry a single 1
    /// in column g; each group has `replicates_per_group` rows.
    pub fn anova(p: usize, replicates_per_group: usize) -> Result<Self> {
        if p == 0 || replicates_per_group == 0 {
            return Err(Error::InvalidDimensions(format!(
                "anova design needs p >= 1 and replicates_per_group >= 1, got p = {p}, replicates_per_group = {replicates_per_group}"
            )));
        }
        let n = p * replicates_per_group;
        let mut data = vec![0.0; n * p];
        for i in 0..n {
            let g = i / replicates_per_group;
            data[i * p + g] = 1.0;
        }
        Ok(DesignMatrix {
            kind: DesignKind::Anova,
            n,
            p,
            data,
        })
    }

    /// Wrap externally supplied rows (all of equal length, n >= p >= 1).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if p == 0 || n < p {
            return Err(Error::InvalidDimensions(format!(
                "external design needs n >= p >= 1, got n = {n}, p = {p}"
            )));
        }
        let mut data = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(DesignMatrix {
            kind: DesignKind::External,
            n,
            p,
            data,
        })
    }

    /// Copy of this design with a leading column of ones.
    pub fn with_intercept(&self) -> Result<Self> {
        let mut rows = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut row = Vec::with_capacity(self.p + 1);
            row.push(1.0);
            row.extend_from_slice(self.row(i));
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    /// Row-major CSV, no header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.n {
            let line = self
                .row(i)
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
