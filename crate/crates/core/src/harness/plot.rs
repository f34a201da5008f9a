//! SVG figures of seed-aggregated sweep results: a mean line per algorithm
//! with a min/max band over seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::AlgorithmId;
use super::output::SweepRow;
use crate::error::{Error, Result};
use crate::metrics::SLOPE_FLOOR;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Regret,
    Violation,
    CumulativeViolation,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Regret, Metric::Violation, Metric::CumulativeViolation];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Regret => "regret",
            Metric::Violation => "violation",
            Metric::CumulativeViolation => "cumulative_violation",
        }
    }

    fn value(self, row: &SweepRow) -> f64 {
        match self {
            Metric::Regret => row.regret,
            Metric::Violation => row.violation,
            Metric::CumulativeViolation => row.cumulative_violation,
        }
    }

    /// Signed violation stays on a linear axis; the others are log-log on
    /// their magnitudes.
    fn log_y(self) -> bool {
        !matches!(self, Metric::Violation)
    }
}

/// Mean, min and max over seeds at one horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub horizon: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-algorithm bands, sorted by horizon.
pub fn aggregate(rows: &[SweepRow], metric: Metric) -> BTreeMap<AlgorithmId, Vec<Band>> {
    let mut groups: BTreeMap<(AlgorithmId, usize), Vec<f64>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.algorithm, row.horizon))
            .or_default()
            .push(metric.value(row));
    }
    let mut out: BTreeMap<AlgorithmId, Vec<Band>> = BTreeMap::new();
    for ((alg, horizon), vals) in groups {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.entry(alg).or_default().push(Band { horizon, mean, min, max });
    }
    out
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, log: bool, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
        if hi - lo < 1e-12 {
            let pad = if log { 0.5 } else { lo.abs().max(1.0) * 0.5 };
            lo -= pad;
            hi += pad;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, log, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        let u = if self.log { v.log10() } else { v };
        self.px_lo + (u - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn contains(&self, v: f64) -> bool {
        let u = if self.log { v.log10() } else { v };
        u >= self.lo - 1e-12 && u <= self.hi + 1e-12
    }

    /// Tick values: 1-2-5 steps per decade on log axes, a 1-2-5 grid otherwise.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let mut out = Vec::new();
            let span = self.hi - self.lo;
            let mults: &[f64] = if span > 3.0 { &[1.0] } else { &[1.0, 2.0, 5.0] };
            for e in self.lo.floor() as i32..=self.hi.ceil() as i32 {
                for m in mults {
                    let v = m * 10f64.powi(e);
                    if self.contains(v) {
                        out.push(v);
                    }
                }
            }
            out
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last).map(|i| i as f64 * step).collect()
        }
    }
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn color(alg: AlgorithmId) -> &'static str {
    match alg {
        AlgorithmId::Alg1 => "#1f77b4",
        AlgorithmId::Pdmfw => "#d62728",
    }
}

/// Renders one metric as a standalone SVG document.
pub fn render_svg(rows: &[SweepRow], metric: Metric) -> Result<String> {
    let bands = aggregate(rows, metric);
    if bands.is_empty() {
        return Err(Error::Config("no sweep rows to plot".into()));
    }
    let log_y = metric.log_y();
    let y_of = |v: f64| if log_y { v.abs().max(SLOPE_FLOOR) } else { v };
    let all: Vec<&Band> = bands.values().flatten().collect();
    let t_min = all.iter().map(|b| b.horizon).min().unwrap_or(1) as f64;
    let t_max = all.iter().map(|b| b.horizon).max().unwrap_or(1) as f64;
    let ys = all.iter().flat_map(|b| [y_of(b.min), y_of(b.max), y_of(b.mean)]);
    let (y_min, y_max) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (y_min, y_max) = if log_y { (y_min, y_max) } else { (y_min.min(0.0), y_max.max(0.0)) };

    let x_axis = Axis::new(t_min, t_max, true, LEFT, WIDTH - RIGHT);
    let y_axis = Axis::new(y_min, y_max, log_y, HEIGHT - BOTTOM, TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let title = if log_y {
        format!("{} vs T (log-log)", metric.name())
    } else {
        format!("{} vs T", metric.name())
    };
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, (LEFT + WIDTH - RIGHT) / 2.0);

    // Grid and ticks.
    let mut x_ticks: Vec<usize> = all.iter().map(|b| b.horizon).collect();
    x_ticks.sort_unstable();
    x_ticks.dedup();
    for t in x_ticks {
        let px = x_axis.map(t as f64);
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}" stroke="#e0e0e0"/>"##, HEIGHT - BOTTOM);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{t}</text>"#, HEIGHT - BOTTOM + 18.0);
    }
    for v in y_axis.ticks() {
        let py = y_axis.map(v);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#e0e0e0"/>"##, WIDTH - RIGHT);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, label(v));
    }
    if !log_y && y_axis.contains(0.0) {
        let py = y_axis.map(0.0);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#888" stroke-dasharray="4 3"/>"##, WIDTH - RIGHT);
    }
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        WIDTH - RIGHT - LEFT,
        HEIGHT - BOTTOM - TOP
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">T</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, HEIGHT - 16.0);
    let y_label = if log_y { format!("|{}|", metric.name()) } else { metric.name().to_string() };
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{y_label}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0
    );

    // Bands, mean lines and legend.
    for (i, (alg, series)) in bands.iter().enumerate() {
        let c = color(*alg);
        let upper: Vec<String> = series
            .iter()
            .map(|b| format!("{:.2},{:.2}", x_axis.map(b.horizon as f64), y_axis.map(y_of(b.max))))
            .collect();
        let lower: Vec<String> = series
            .iter()
            .rev()
            .map(|b| format!("{:.2},{:.2}", x_axis.map(b.horizon as f64), y_axis.map(y_of(b.min))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{} {}" fill="{c}" fill-opacity="0.15" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let mean: Vec<String> = series
            .iter()
            .map(|b| format!("{:.2},{:.2}", x_axis.map(b.horizon as f64), y_axis.map(y_of(b.mean))))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, mean.join(" "));
        for b in series {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#,
                x_axis.map(b.horizon as f64),
                y_axis.map(y_of(b.mean))
            );
        }
        let ly = TOP + 16.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 14.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, alg.as_str());
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes `<metric>.svg` for every metric into `dir`.
pub fn plot_sweep(rows: &[SweepRow], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    Metric::ALL
        .iter()
        .map(|&m| {
            let path = dir.join(format!("{}.svg", m.name()));
            std::fs::write(&path, render_svg(rows, m)?)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: AlgorithmId, t: usize, seed: u64, regret: f64) -> SweepRow {
        SweepRow {
            algorithm: alg,
            oracle: None,
            horizon: t,
            beta: 0.0,
            seed,
            regret,
            violation: -regret / 10.0,
            cumulative_violation: regret / 2.0,
            lambda_sq_sum: 0.0,
            benchmark_gap: 0.0,
            benchmark_converged: true,
        }
    }

    #[test]
    fn aggregates_mean_min_max() {
        let rows = vec![
            row(AlgorithmId::Pdmfw, 64, 1, 2.0),
            row(AlgorithmId::Pdmfw, 64, 2, 4.0),
            row(AlgorithmId::Pdmfw, 128, 1, 8.0),
        ];
        let bands = &aggregate(&rows, Metric::Regret)[&AlgorithmId::Pdmfw];
        assert_eq!(bands[0], Band { horizon: 64, mean: 3.0, min: 2.0, max: 4.0 });
        assert_eq!(bands[1].horizon, 128);
    }

    #[test]
    fn svg_has_one_series_per_algorithm() {
        let mut rows = Vec::new();
        for &t in &[64, 128, 256] {
            for seed in 0..3 {
                rows.push(row(AlgorithmId::Alg1, t, seed, t as f64 * 0.1 + seed as f64));
                rows.push(row(AlgorithmId::Pdmfw, t, seed, (t as f64).sqrt() + seed as f64));
            }
        }
        for m in Metric::ALL {
            let svg = render_svg(&rows, m).unwrap();
            assert!(svg.starts_with("<svg"));
            assert_eq!(svg.matches("<polyline").count(), 2);
            assert_eq!(svg.matches("<polygon").count(), 2);
            assert!(!svg.contains("NaN"));
        }
    }

    #[test]
    fn log_ticks_cover_range() {
        let axis = Axis::new(3.0, 300.0, true, 0.0, 100.0);
        let ticks = axis.ticks();
        assert!(ticks.contains(&10.0) && ticks.contains(&100.0));
        let lin = Axis::new(-2.0, 3.0, false, 0.0, 100.0);
        assert!(lin.ticks().contains(&0.0));
    }
}
