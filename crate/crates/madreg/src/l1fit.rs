//! Median (L1) regression: the MAD criterion and its exact minimization.
//!
//! The criterion gamma(b) = (1/n) sum_i |y_i - x_i^T b| is convex and
//! piecewise linear, with minimizers at vertices where p residuals vanish.
//! The solver is a simplex specialization equivalent to the u/v-split linear
//! program: a basis of p interpolated rows fixes a vertex, directional
//! derivatives along the p edge directions give the optimality certificate,
//! and each pivot runs a weighted-median line search that can pass many
//! breakpoints at once.

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Default tolerance on the objective.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Rank-check threshold, relative to the largest pivot scale.
const RANK_REL_TOL: f64 = 1e-10;
/// Directions with |derivative| below this (times a column norm) count as flat.
const FLAT_REL_TOL: f64 = 1e-9;
/// Rebuild the tableau from scratch this often to stop drift.
const REFACTOR_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitStatus {
    Optimal,
    /// The minimizer set is not a singleton (a zero reduced cost was found);
    /// the reported vertex is the lexicographically smallest one visited.
    DegenerateOptimal,
    Failed,
}

impl FitStatus {
    pub fn token(self) -> &'static str {
        match self {
            FitStatus::Optimal => "optimal",
            FitStatus::DegenerateOptimal => "degenerate_optimal",
            FitStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for FitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for FitStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(FitStatus::Optimal),
            "degenerate_optimal" => Ok(FitStatus::DegenerateOptimal),
            "failed" => Ok(FitStatus::Failed),
            _ => Err(Error::UnknownToken {
                what: "fit status",
                token: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    /// Minimized criterion, recomputed from beta_hat (never trusted from the
    /// solver's internal bookkeeping).
    pub objective: f64,
    pub iterations: usize,
    pub status: FitStatus,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean absolute residual (1/n) sum |y_i - x_i^T b|.
///
/// The sum is compensated (Neumaier), so the result is the correctly
/// rounded true sum of the residual magnitudes; comparisons between
/// criterion values at different coefficient vectors are then meaningful
/// down to term-level rounding.
pub fn mad_criterion(x: &DesignMatrix, y: &[f64], b: &[f64]) -> Result<f64> {
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries, design has {} rows",
            y.len(),
            x.n()
        )));
    }
    if b.len() != x.p() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector has {} entries, design has {} columns",
            b.len(),
            x.p()
        )));
    }
    let n = x.n();
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (i, yi) in y.iter().enumerate() {
        let v = (yi - dot(x.row(i), b)).abs();
        let t = sum + v;
        comp += if sum >= v { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    Ok((sum + comp) / n as f64)
}

/// Standardized residuals (y_i - x_i^T beta_hat) / gamma_hat.
///
/// Their mean absolute value is 1 by construction. Fails with `ZeroMad`
/// when the fit is exact and the scale vanishes.
pub fn standardized_residuals(x: &DesignMatrix, y: &[f64], fit: &FitResult) -> Result<Vec<f64>> {
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries, design has {} rows",
            y.len(),
            x.n()
        )));
    }
    let n = x.n();
    let y_scale = y.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    if fit.objective <= 16.0 * f64::EPSILON * y_scale {
        return Err(Error::ZeroMad);
    }
    Ok((0..n)
        .map(|i| (y[i] - dot(x.row(i), &fit.beta_hat)) / fit.objective)
        .collect())
}

/// Exact minimizer of the MAD criterion.
///
/// The design must have full column rank (pivoted elimination with a
/// relative threshold of 1e-10 decides). Degenerate optima are reported via
/// `FitStatus::DegenerateOptimal` with the lexicographically smallest vertex
/// found.
pub fn fit_median_regression(x: &DesignMatrix, y: &[f64], tol: f64) -> Result<FitResult> {
    if x.p() == 0 || x.n() < x.p() {
        return Err(Error::InvalidDimensions(format!(
            "fit needs n >= p >= 1, got n = {}, p = {}",
            x.n(),
            x.p()
        )));
    }
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries, design has {} rows",
            y.len(),
            x.n()
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidDimensions(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let basis = select_initial_basis(x)?;
    let mut tab = Tableau::new(x, y, basis)?;
    let max_pivots = 50 * (x.n() + x.p());

    loop {
        if tab.pivots > max_pivots {
            return Err(Error::SolverFailure(format!(
                "pivot cap {max_pivots} exceeded"
            )));
        }
        let scan = tab.scan();
        match tab.entering(&scan) {
            None => break,
            Some((k, sigma, g)) => {
                let (t, row) = tab.line_search(k, sigma, g, &scan)?;
                tab.apply_pivot(k, sigma, t, row)?;
            }
        }
    }

    let degenerate = tab.lex_walk(tol)?;
    tab.refactor()?;
    let beta_hat = tab.b.clone();
    let objective = mad_criterion(x, y, &beta_hat)?;
    Ok(FitResult {
        beta_hat,
        objective,
        iterations: tab.pivots,
        status: if degenerate {
            FitStatus::DegenerateOptimal
        } else {
            FitStatus::Optimal
        },
    })
}

/// Greedy pivoted elimination: selects p linearly independent rows and
/// doubles as the column-rank check.
fn select_initial_basis(x: &DesignMatrix) -> Result<Vec<usize>> {
    let (n, p) = (x.n(), x.p());
    let mut w: Vec<f64> = (0..n).flat_map(|i| x.row(i).to_vec()).collect();
    let scale = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::RankDeficientDesign);
    }
    let mut selected = vec![false; n];
    let mut basis = Vec::with_capacity(p);
    for col in 0..p {
        let mut best = usize::MAX;
        let mut best_abs = RANK_REL_TOL * scale;
        for i in 0..n {
            if !selected[i] {
                let a = w[i * p + col].abs();
                if a > best_abs {
                    best_abs = a;
                    best = i;
                }
            }
        }
        if best == usize::MAX {
            return Err(Error::RankDeficientDesign);
        }
        selected[best] = true;
        basis.push(best);
        let pivot = w[best * p + col];
        for i in 0..n {
            if !selected[i] && w[i * p + col] != 0.0 {
                let f = w[i * p + col] / pivot;
                for l in col..p {
                    w[i * p + l] -= f * w[best * p + l];
                }
            }
        }
    }
    Ok(basis)
}

/// Per-direction statistics from one pass over the nonbasic rows.
struct Scan {
    /// sum of sign(r_i) * U_ik over nonbasic rows with nonzero residual
    t: Vec<f64>,
    /// sum of |U_ik| over nonbasic rows with zero residual
    d: Vec<f64>,
    /// 1 + sum of |U_ik| over all nonbasic rows; tolerance scale
    norm: Vec<f64>,
}

struct Tableau<'a> {
    x: &'a DesignMatrix,
    y: &'a [f64],
    n: usize,
    p: usize,
    /// Row index of each basic observation, one per coordinate.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// (n + p) x p, row-major. Rows 0..n hold X * inv(X_J); rows n..n+p hold
    /// inv(X_J) itself, so column k of the bottom block is the edge
    /// direction for coordinate k.
    u: Vec<f64>,
    b: Vec<f64>,
    r: Vec<f64>,
    zero_tol: f64,
    pivots: usize,
}

impl<'a> Tableau<'a> {
    fn new(x: &'a DesignMatrix, y: &'a [f64], basis: Vec<usize>) -> Result<Self> {
        let n = x.n();
        let p = x.p();
        let y_scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let mut in_basis = vec![false; n];
        for &i in &basis {
            in_basis[i] = true;
        }
        let mut tab = Tableau {
            x,
            y,
            n,
            p,
            basis,
            in_basis,
            u: vec![0.0; (n + p) * p],
            b: vec![0.0; p],
            r: vec![0.0; n],
            zero_tol: 1e-11 * y_scale,
            pivots: 0,
        };
        tab.refactor()?;
        Ok(tab)
    }

    /// Rebuild inv(X_J), the tableau, coefficients and residuals from the
    /// current basis.
    fn refactor(&mut self) -> Result<()> {
        let p = self.p;
        let n = self.n;
        // Gauss-Jordan inversion of the basis submatrix with partial pivoting.
        let mut a = vec![0.0; p * 2 * p];
        for l in 0..p {
            a[l * 2 * p..l * 2 * p + p].copy_from_slice(self.x.row(self.basis[l]));
            a[l * 2 * p + p + l] = 1.0;
        }
        for col in 0..p {
            let mut piv = col;
            for rr in col + 1..p {
                if a[rr * 2 * p + col].abs() > a[piv * 2 * p + col].abs() {
                    piv = rr;
                }
            }
            if a[piv * 2 * p + col].abs() < 1e-300 {
                return Err(Error::SolverFailure("basis became singular".into()));
            }
            if piv != col {
                for l in 0..2 * p {
                    a.swap(col * 2 * p + l, piv * 2 * p + l);
                }
            }
            let d = a[col * 2 * p + col];
            for l in 0..2 * p {
                a[col * 2 * p + l] /= d;
            }
            for rr in 0..p {
                if rr != col {
                    let f = a[rr * 2 * p + col];
                    if f != 0.0 {
                        for l in 0..2 * p {
                            a[rr * 2 * p + l] -= f * a[col * 2 * p + l];
                        }
                    }
                }
            }
        }
        // inv[c][k] = a[c][p + k]
        for i in 0..n {
            let xi = self.x.row(i);
            for k in 0..p {
                let mut s = 0.0;
                for c in 0..p {
                    s += xi[c] * a[c * 2 * p + p + k];
                }
                self.u[i * p + k] = s;
            }
        }
        for c in 0..p {
            for k in 0..p {
                self.u[(n + c) * p + k] = a[c * 2 * p + p + k];
            }
        }
        for c in 0..p {
            let mut s = 0.0;
            for l in 0..p {
                s += a[c * 2 * p + p + l] * self.y[self.basis[l]];
            }
            self.b[c] = s;
        }
        for i in 0..n {
            self.r[i] = self.y[i] - dot(self.x.row(i), &self.b);
        }
        for &i in &self.basis {
            self.r[i] = 0.0;
        }
        Ok(())
    }

    fn scan(&self) -> Scan {
        let p = self.p;
        let mut t = vec![0.0; p];
        let mut d = vec![0.0; p];
        let mut norm = vec![1.0; p];
        for i in 0..self.n {
            if self.in_basis[i] {
                continue;
            }
            let row = &self.u[i * p..(i + 1) * p];
            if self.r[i].abs() > self.zero_tol {
                let s = if self.r[i] > 0.0 { 1.0 } else { -1.0 };
                for k in 0..p {
                    t[k] += s * row[k];
                    norm[k] += row[k].abs();
                }
            } else {
                for k in 0..p {
                    d[k] += row[k].abs();
                    norm[k] += row[k].abs();
                }
            }
        }
        Scan { t, d, norm }
    }

    /// Directional derivative of the criterion (times n) along sigma * edge k.
    #[inline]
    fn derivative(scan: &Scan, k: usize, sigma: f64) -> f64 {
        1.0 + scan.d[k] - sigma * scan.t[k]
    }

    /// Most violated direction, or None at optimality.
    fn entering(&self, scan: &Scan) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for k in 0..self.p {
            let tol = FLAT_REL_TOL * scan.norm[k];
            for sigma in [1.0, -1.0] {
                let g = Self::derivative(scan, k, sigma);
                if g < -tol && best.is_none_or(|(_, _, bg)| g < bg) {
                    best = Some((k, sigma, g));
                }
            }
        }
        best
    }

    /// Breakpoints along sigma * edge k: rows whose residual crosses zero,
    /// sorted by step length.
    fn breakpoints(&self, k: usize, sigma: f64, norm_k: f64) -> Vec<(f64, usize, f64)> {
        let w_floor = 1e-13 * norm_k;
        let mut bps = Vec::new();
        for i in 0..self.n {
            if self.in_basis[i] || self.r[i].abs() <= self.zero_tol {
                continue;
            }
            let w = sigma * self.u[i * self.p + k];
            if w.abs() <= w_floor {
                continue;
            }
            let t = self.r[i] / w;
            if t > 0.0 {
                bps.push((t, i, w.abs()));
            }
        }
        bps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        bps
    }

    /// Weighted-median line search: walk breakpoints until the slope turns
    /// nonnegative.
    fn line_search(&self, k: usize, sigma: f64, g: f64, scan: &Scan) -> Result<(f64, usize)> {
        let mut slope = g;
        for (t, i, wabs) in self.breakpoints(k, sigma, scan.norm[k]) {
            slope += 2.0 * wabs;
            if slope >= 0.0 {
                return Ok((t, i));
            }
        }
        Err(Error::SolverFailure(
            "descent direction never turned: design is numerically rank deficient".into(),
        ))
    }

    /// Step to t along sigma * edge k and swap `row` into the basis.
    fn apply_pivot(&mut self, k: usize, sigma: f64, t: f64, row: usize) -> Result<()> {
        let n = self.n;
        let p = self.p;
        for c in 0..p {
            self.b[c] += t * sigma * self.u[(n + c) * p + k];
        }
        for i in 0..n {
            self.r[i] -= t * sigma * self.u[i * p + k];
        }
        self.r[row] = 0.0;

        let leave = self.basis[k];
        self.in_basis[leave] = false;
        self.in_basis[row] = true;
        self.basis[k] = row;

        let alpha: Vec<f64> = self.u[row * p..(row + 1) * p].to_vec();
        let ak = alpha[k];
        for rr in 0..n + p {
            let urk = self.u[rr * p + k];
            if urk != 0.0 {
                for l in 0..p {
                    if l != k {
                        self.u[rr * p + l] -= urk * alpha[l] / ak;
                    }
                }
            }
            self.u[rr * p + k] = urk / ak;
        }

        self.pivots += 1;
        if self.pivots.is_multiple_of(REFACTOR_EVERY) {
            self.refactor()?;
        }
        Ok(())
    }

    /// At an optimum, walk flat edges toward lexicographically smaller
    /// vertices. Returns whether any flat direction exists (the minimizer
    /// set is then not a singleton).
    fn lex_walk(&mut self, tol: f64) -> Result<bool> {
        let p = self.p;
        let mut degenerate = false;
        let mut moves = 0usize;
        'outer: loop {
            let scan = self.scan();
            for k in 0..p {
                for sigma in [1.0, -1.0] {
                    let g = Self::derivative(&scan, k, sigma);
                    if g.abs() > FLAT_REL_TOL * scan.norm[k] {
                        continue;
                    }
                    degenerate = true;
                    if moves > 2 * p + 8 {
                        break 'outer;
                    }
                    let Some(&(t, row, _)) = self.breakpoints(k, sigma, scan.norm[k]).first()
                    else {
                        continue;
                    };
                    // keep the objective contract: a near-flat move may not
                    // drift by more than the tolerance
                    if g.abs() * t > 0.5 * tol {
                        continue;
                    }
                    let candidate: Vec<f64> = (0..p)
                        .map(|c| self.b[c] + t * sigma * self.u[(self.n + c) * p + k])
                        .collect();
                    if lex_less(&candidate, &self.b) {
                        self.apply_pivot(k, sigma, t, row)?;
                        moves += 1;
                        continue 'outer;
                    }
                }
            }
            break;
        }
        Ok(degenerate)
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}
