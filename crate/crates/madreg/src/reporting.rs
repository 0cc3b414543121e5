//! Summaries and QQ-plot figures from simulation records.
//!
//! Rendering never filters data beyond the documented NaN handling: a curve
//! is omitted (and annotated) only when fewer than two finite Z values are
//! available for it at a cell.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::simulation::{qq_data, ReplicateRecord};

pub const ESTIMATORS: [&str; 4] = ["gamma_bar", "gamma_hat", "gamma_tilde", "gamma_check"];

/// (estimator, value, z) triples of one record.
fn estimator_columns(r: &ReplicateRecord) -> [(&'static str, f64, f64); 4] {
    [
        ("gamma_bar", r.estimates.gamma_bar, r.z_bar),
        ("gamma_hat", r.estimates.gamma_hat, r.z_hat),
        ("gamma_tilde", r.estimates.gamma_tilde, r.z_tilde),
        ("gamma_check", r.estimates.gamma_check, r.z_check),
    ]
}

/// Per-cell, per-estimator moments over the defined (finite) replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cell_id: String,
    pub error: String,
    pub design: String,
    pub p: usize,
    pub k: usize,
    pub n: usize,
    pub estimator: &'static str,
    /// Replicates with a finite value for this estimator.
    pub n_used: usize,
    /// Flagged replicates for this estimator (cell count minus n_used).
    pub n_failed: usize,
    pub mean: f64,
    /// Sample variance (n-1 denominator); NaN when fewer than 2 values.
    pub variance: f64,
    pub z_mean: f64,
    pub z_variance: f64,
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

type CellKey = (String, String, usize, usize);

fn group_by_cell(records: &[ReplicateRecord]) -> BTreeMap<CellKey, Vec<&ReplicateRecord>> {
    let mut groups: BTreeMap<CellKey, Vec<&ReplicateRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((
                r.error.token().to_string(),
                r.design.token().to_string(),
                r.p,
                r.k,
            ))
            .or_default()
            .push(r);
    }
    groups
}

/// Mean, variance, Z moments and failure counts per cell and estimator.
pub fn summarize(records: &[ReplicateRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for ((error, design, p, k), cell_records) in group_by_cell(records) {
        let total = cell_records.len();
        let first = cell_records[0];
        for (idx, name) in ESTIMATORS.iter().enumerate() {
            let mut values = Vec::with_capacity(total);
            let mut zs = Vec::with_capacity(total);
            for r in &cell_records {
                let (_, v, z) = {
                    let cols = estimator_columns(r);
                    cols[idx]
                };
                if v.is_finite() {
                    values.push(v);
                    zs.push(z);
                }
            }
            let (mean, variance) = mean_var(&values);
            let (z_mean, z_variance) = mean_var(&zs);
            rows.push(SummaryRow {
                cell_id: first.cell_id.clone(),
                error: error.clone(),
                design: design.clone(),
                p,
                k,
                n: first.n,
                estimator: name,
                n_used: values.len(),
                n_failed: total - values.len(),
                mean,
                variance,
                z_mean,
                z_variance,
            });
        }
    }
    rows
}

pub const SUMMARY_HEADER: [&str; 13] = [
    "cell_id",
    "error",
    "design",
    "p",
    "k",
    "n",
    "estimator",
    "n_used",
    "n_failed",
    "mean",
    "variance",
    "z_mean",
    "z_variance",
];

pub fn write_summary_csv<W: io::Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SUMMARY_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.cell_id.as_str(),
            r.error.as_str(),
            r.design.as_str(),
            &r.p.to_string(),
            &r.k.to_string(),
            &r.n.to_string(),
            r.estimator,
            &r.n_used.to_string(),
            &r.n_failed.to_string(),
            &r.mean.to_string(),
            &r.variance.to_string(),
            &r.z_mean.to_string(),
            &r.z_variance.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// One panel of a QQ figure: the four estimator curves at a single cell.
#[derive(Debug, Clone)]
pub struct QQPanel {
    pub p: usize,
    pub k: usize,
    pub error: String,
    pub design: String,
    /// Present curves, in `ESTIMATORS` order.
    pub curves: Vec<(&'static str, Vec<(f64, f64)>)>,
    /// Estimators with fewer than two finite Z values at this cell.
    pub omitted: Vec<&'static str>,
}

/// Panels grouped per (design, error) figure.
pub fn build_qq_panels(
    records: &[ReplicateRecord],
) -> BTreeMap<(String, String), Vec<QQPanel>> {
    let mut figures: BTreeMap<(String, String), Vec<QQPanel>> = BTreeMap::new();
    for ((error, design, p, k), cell_records) in group_by_cell(records) {
        let mut curves = Vec::new();
        let mut omitted = Vec::new();
        for (idx, name) in ESTIMATORS.iter().enumerate() {
            let zs: Vec<f64> = cell_records
                .iter()
                .map(|r| estimator_columns(r)[idx].2)
                .collect();
            match qq_data(&zs) {
                Ok(pairs) => curves.push((*name, pairs)),
                Err(_) => omitted.push(*name),
            }
        }
        figures
            .entry((design.clone(), error.clone()))
            .or_default()
            .push(QQPanel {
                p,
                k,
                error,
                design,
                curves,
                omitted,
            });
    }
    figures
}

const AXIS_MIN: f64 = -4.0;
const AXIS_MAX: f64 = 4.0;
const PANEL: f64 = 200.0;
const GAP: f64 = 48.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_TOP: f64 = 56.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 92.0;

/// (name, stroke color, dash pattern); gamma_bar is the solid reference.
const CURVE_STYLE: [(&str, &str, &str); 4] = [
    ("gamma_bar", "#444444", ""),
    ("gamma_hat", "#d62728", "7,3"),
    ("gamma_tilde", "#1f77b4", "2,3"),
    ("gamma_check", "#2ca02c", "8,2,2,2"),
];

fn style_for(name: &str) -> (&'static str, &'static str) {
    for (n, color, dash) in CURVE_STYLE {
        if n == name {
            return (color, dash);
        }
    }
    ("#000000", "")
}

#[inline]
fn px(v: f64) -> f64 {
    (v - AXIS_MIN) / (AXIS_MAX - AXIS_MIN) * PANEL
}

/// Render every (design, error) figure as a standalone SVG in `out_dir`.
/// Output bytes are a pure function of the records. Returns the paths
/// written.
pub fn render_qq_grid(records: &[ReplicateRecord], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for ((design, error), panels) in build_qq_panels(records) {
        let svg = render_figure(&design, &error, &panels);
        let path = out_dir.join(format!("qq_{design}_{error}.svg"));
        std::fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

fn render_figure(design: &str, error: &str, panels: &[QQPanel]) -> String {
    let mut ps: Vec<usize> = panels.iter().map(|c| c.p).collect();
    ps.sort_unstable();
    ps.dedup();
    let mut ks: Vec<usize> = panels.iter().map(|c| c.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let cols = ps.len();
    let rows = ks.len();
    let width = MARGIN_LEFT + cols as f64 * PANEL + (cols - 1) as f64 * GAP + MARGIN_RIGHT;
    let height = MARGIN_TOP + rows as f64 * PANEL + (rows - 1) as f64 * GAP + MARGIN_BOTTOM;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"##
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="28" font-family="sans-serif" font-size="15" text-anchor="middle">Z statistic normal QQ-plots (design: {design}, error: {error})</text>"##,
        width / 2.0
    );
    let _ = writeln!(
        s,
        r##"<defs><clipPath id="panel"><rect x="0" y="0" width="{PANEL}" height="{PANEL}"/></clipPath></defs>"##
    );

    // p increases left-to-right, k increases top-to-bottom
    for (ri, &k) in ks.iter().enumerate() {
        for (ci, &p) in ps.iter().enumerate() {
            let gx = MARGIN_LEFT + ci as f64 * (PANEL + GAP);
            let gy = MARGIN_TOP + ri as f64 * (PANEL + GAP);
            let _ = writeln!(s, r##"<g transform="translate({gx:.1},{gy:.1})">"##);
            let _ = writeln!(
                s,
                r##"<rect x="0" y="0" width="{PANEL}" height="{PANEL}" fill="none" stroke="#333333" stroke-width="1"/>"##
            );
            let _ = writeln!(
                s,
                r##"<text x="{:.1}" y="-8" font-family="sans-serif" font-size="11" text-anchor="middle">p = {p}, k = {k}</text>"##,
                PANEL / 2.0
            );
            // ticks
            for tick in [-4.0_f64, -2.0, 0.0, 2.0, 4.0] {
                let tx = px(tick);
                let ty = PANEL - px(tick);
                let _ = writeln!(
                    s,
                    r##"<line x1="{tx:.1}" y1="{PANEL}" x2="{tx:.1}" y2="{:.1}" stroke="#333333" stroke-width="0.7"/>"##,
                    PANEL - 4.0
                );
                let _ = writeln!(
                    s,
                    r##"<line x1="0" y1="{ty:.1}" x2="4" y2="{ty:.1}" stroke="#333333" stroke-width="0.7"/>"##
                );
                if ri == rows - 1 {
                    let _ = writeln!(
                        s,
                        r##"<text x="{tx:.1}" y="{:.1}" font-family="sans-serif" font-size="9" text-anchor="middle">{tick:.0}</text>"##,
                        PANEL + 14.0
                    );
                }
                if ci == 0 {
                    let _ = writeln!(
                        s,
                        r##"<text x="-7" y="{:.1}" font-family="sans-serif" font-size="9" text-anchor="end">{tick:.0}</text>"##,
                        ty + 3.0
                    );
                }
            }
            // dashed grey diagonal
            let _ = writeln!(
                s,
                r##"<line x1="0" y1="{PANEL}" x2="{PANEL}" y2="0" stroke="#aaaaaa" stroke-width="1" stroke-dasharray="5,4"/>"##
            );
            match panels.iter().find(|c| c.p == p && c.k == k) {
                Some(panel) => {
                    for (name, pairs) in &panel.curves {
                        let (color, dash) = style_for(name);
                        let dash_attr = if dash.is_empty() {
                            String::new()
                        } else {
                            format!(r##" stroke-dasharray="{dash}""##)
                        };
                        let mut points = String::with_capacity(pairs.len() * 12);
                        for (theo, emp) in pairs {
                            let _ = write!(points, "{:.2},{:.2} ", px(*theo), PANEL - px(*emp));
                        }
                        let _ = writeln!(
                            s,
                            r##"<polyline clip-path="url(#panel)" fill="none" stroke="{color}" stroke-width="1.3"{dash_attr} points="{}"/>"##,
                            points.trim_end()
                        );
                    }
                    for (j, name) in panel.omitted.iter().enumerate() {
                        let (color, _) = style_for(name);
                        let _ = writeln!(
                            s,
                            r##"<text x="6" y="{:.1}" font-family="sans-serif" font-size="9" fill="{color}">{name}: no data</text>"##,
                            14.0 + 12.0 * j as f64
                        );
                    }
                }
                None => {
                    let _ = writeln!(
                        s,
                        r##"<text x="6" y="14" font-family="sans-serif" font-size="9" fill="#666666">no cell</text>"##
                    );
                }
            }
            let _ = writeln!(s, "</g>");
        }
    }

    // axis labels and legend
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">theoretical N(0,1) quantile</text>"##,
        width / 2.0,
        height - MARGIN_BOTTOM + 44.0
    );
    let _ = writeln!(
        s,
        r##"<text x="16" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.1})">empirical quantile</text>"##,
        height / 2.0,
        height / 2.0
    );
    let legend_y = height - 26.0;
    let mut lx = MARGIN_LEFT;
    for (name, color, dash) in CURVE_STYLE {
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r##" stroke-dasharray="{dash}""##)
        };
        let _ = writeln!(
            s,
            r##"<line x1="{lx:.1}" y1="{legend_y:.1}" x2="{:.1}" y2="{legend_y:.1}" stroke="{color}" stroke-width="1.5"{dash_attr}/>"##,
            lx + 30.0
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{name}</text>"##,
            lx + 36.0,
            legend_y + 4.0
        );
        lx += 36.0 + 9.0 * name.len() as f64 + 24.0;
    }
    let _ = writeln!(
        s,
        r##"<line x1="{lx:.1}" y1="{legend_y:.1}" x2="{:.1}" y2="{legend_y:.1}" stroke="#aaaaaa" stroke-width="1" stroke-dasharray="5,4"/>"##,
        lx + 30.0
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">reference diagonal</text>"##,
        lx + 36.0,
        legend_y + 4.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::DesignKind;
    use crate::distributions::ErrorDistribution;
    use crate::simulation::{run_grid, run_replicate_with, SimCell, SimOptions};
    use crate::estimators::Bandwidth;
    use approx::assert_relative_eq;

    fn small_table() -> Vec<ReplicateRecord> {
        let c = SimCell::new(
            2,
            4,
            DesignKind::Anova,
            ErrorDistribution::StandardizedLaplace,
            20,
            3,
        )
        .unwrap();
        run_grid(&[c]).unwrap().records
    }

    #[test]
    fn summarize_single_record_flags_variance() {
        let c = SimCell::new(
            2,
            2,
            DesignKind::Anova,
            ErrorDistribution::StandardizedLaplace,
            1,
            5,
        )
        .unwrap();
        let records = run_grid(&[c]).unwrap().records;
        let rows = summarize(&records);
        assert_eq!(rows.len(), 4);
        let hat = rows.iter().find(|r| r.estimator == "gamma_hat").unwrap();
        assert_eq!(hat.n_used, 1);
        assert!(hat.mean.is_finite());
        assert!(hat.variance.is_nan());
    }

    #[test]
    fn summarize_counts_failures_exactly() {
        // The huge fixed bandwidth fails every empirical correction.
        let c = SimCell::new(
            2,
            4,
            DesignKind::Anova,
            ErrorDistribution::StandardizedLaplace,
            5,
            7,
        )
        .unwrap();
        let opts = SimOptions {
            bandwidth: Bandwidth::Fixed(1e9),
            ..SimOptions::default()
        };
        let records: Vec<ReplicateRecord> =
            (0..5).map(|i| run_replicate_with(&c, i, &opts)).collect();
        let flagged = records.iter().filter(|r| r.failure.any()).count();
        assert_eq!(flagged, 5);
        let rows = summarize(&records);
        let check = rows.iter().find(|r| r.estimator == "gamma_check").unwrap();
        assert_eq!(check.n_failed, flagged);
        assert_eq!(check.n_used, 0);
        let hat = rows.iter().find(|r| r.estimator == "gamma_hat").unwrap();
        assert_eq!(hat.n_failed, 0);
    }

    #[test]
    fn summary_matches_independent_recomputation() {
        let records = small_table();
        let rows = summarize(&records);
        let hat = rows.iter().find(|r| r.estimator == "gamma_hat").unwrap();
        // naive sum-of-squares route
        let vals: Vec<f64> = records.iter().map(|r| r.estimates.gamma_hat).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = (vals.iter().map(|v| v * v).sum::<f64>() - n * mean * mean) / (n - 1.0);
        assert_relative_eq!(hat.mean, mean, epsilon = 1e-12);
        assert_relative_eq!(hat.variance, var, epsilon = 1e-12);
    }

    #[test]
    fn qq_theoretical_coordinates_shared_across_estimators() {
        let records = small_table();
        let figures = build_qq_panels(&records);
        let panel = &figures.values().next().unwrap()[0];
        assert_eq!(panel.curves.len(), 4);
        let theo: Vec<f64> = panel.curves[0].1.iter().map(|p| p.0).collect();
        for (_, pairs) in &panel.curves[1..] {
            let other: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            assert_eq!(theo, other);
        }
    }

    #[test]
    fn render_contains_curves_and_diagonal() {
        let records = small_table();
        let dir = tempfile::tempdir().unwrap();
        let paths = render_qq_grid(&records, dir.path()).unwrap();
        assert_eq!(paths.len(), 1);
        let svg = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("stroke-dasharray=\"5,4\""));
        assert!(svg.contains("gamma_check"));
    }

    #[test]
    fn render_is_deterministic() {
        let records = small_table();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let p1 = render_qq_grid(&records, d1.path()).unwrap();
        let p2 = render_qq_grid(&records, d2.path()).unwrap();
        assert_eq!(
            std::fs::read(&p1[0]).unwrap(),
            std::fs::read(&p2[0]).unwrap()
        );
    }

    #[test]
    fn render_omits_and_annotates_dead_curves() {
        let c = SimCell::new(
            4,
            2,
            DesignKind::Anova,
            ErrorDistribution::StandardizedLaplace,
            10,
            9,
        )
        .unwrap();
        let opts = SimOptions {
            bandwidth: Bandwidth::Fixed(1e9),
            ..SimOptions::default()
        };
        let records: Vec<ReplicateRecord> =
            (0..10).map(|i| run_replicate_with(&c, i, &opts)).collect();
        assert!(records.iter().all(|r| r.z_check.is_nan()));
        let dir = tempfile::tempdir().unwrap();
        let paths = render_qq_grid(&records, dir.path()).unwrap();
        let svg = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("gamma_check: no data"));
    }
}
