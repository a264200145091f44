//! Static SVG plots from result CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{HarnessError, Result};
use crate::table::CsvTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Percentile bands (10/50/90) of `exact_f` against cumulative shots.
    LossVsShots,
    /// Histogram of `exact_f` reached within a shot budget.
    DistAtBudget,
    /// Percentile bands of the MSE bound against cumulative shots.
    ErrorBoundVsShots,
    /// Mean shots spent per iteration.
    ShotsPerIter,
    /// Ensemble MSE next to the mean bound, per iteration.
    MseBoundVsActual,
    /// Share of estimates outside the κ = 2 interval, per iteration.
    CiCheck,
}

impl PlotKind {
    pub const ALL: [PlotKind; 6] = [
        PlotKind::LossVsShots,
        PlotKind::DistAtBudget,
        PlotKind::ErrorBoundVsShots,
        PlotKind::ShotsPerIter,
        PlotKind::MseBoundVsActual,
        PlotKind::CiCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::LossVsShots => "loss_vs_shots",
            PlotKind::DistAtBudget => "dist_at_budget",
            PlotKind::ErrorBoundVsShots => "error_bound_vs_shots",
            PlotKind::ShotsPerIter => "shots_per_iter",
            PlotKind::MseBoundVsActual => "mse_bound_vs_actual",
            PlotKind::CiCheck => "ci_check",
        }
    }

    fn columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::LossVsShots | PlotKind::DistAtBudget => {
                &["trial", "cumulative_shots", "exact_f"]
            }
            PlotKind::ErrorBoundVsShots => &["trial", "cumulative_shots", "mse_bound"],
            PlotKind::ShotsPerIter => &["trial", "iteration", "cumulative_shots"],
            PlotKind::MseBoundVsActual => &["iteration", "estimate_value", "exact_f", "mse_bound"],
            PlotKind::CiCheck => &["iteration", "estimate_value", "exact_f", "ci_radius_k2"],
        }
    }
}

impl FromStr for PlotKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = PlotKind::ALL.iter().map(|k| k.name()).collect();
                HarnessError::config(format!(
                    "unknown plot kind {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRequest {
    pub kind: PlotKind,
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    /// Keep only these variants; `None` keeps all.
    pub variants: Option<Vec<String>>,
    /// Shot budget for `dist_at_budget`; defaults to the smallest final
    /// shot count over all trials.
    pub budget: Option<u64>,
}

/// Rows of one variant: the requested columns in order, as numbers.
type Columns = BTreeMap<String, Vec<Vec<f64>>>;

fn load(req: &PlotRequest) -> Result<Columns> {
    let kind = req.kind.name();
    let mut out = Columns::new();
    for path in &req.inputs {
        let t = CsvTable::read(path)?;
        let vcol = t.column("variant", kind)?;
        let cols = req
            .kind
            .columns()
            .iter()
            .map(|c| t.column(c, kind))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..t.rows.len() {
            let variant = &t.rows[i][vcol];
            if req
                .variants
                .as_ref()
                .is_some_and(|keep| !keep.iter().any(|v| v == variant))
            {
                continue;
            }
            let values = cols
                .iter()
                .map(|&c| {
                    t.num(i, c)?.ok_or_else(|| {
                        HarnessError::Plot(format!(
                            "{}: row {}: empty {:?}",
                            path.display(),
                            i + 2,
                            t.headers[c]
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.entry(variant.clone()).or_default().push(values);
        }
    }
    if out.is_empty() {
        return Err(HarnessError::Plot(match &req.variants {
            Some(v) => format!("no rows match variant filter {v:?}"),
            None => "input tables have no rows".to_string(),
        }));
    }
    Ok(out)
}

/// Render `req` and write the SVG. Nothing is written on error.
pub fn emit_plot(req: &PlotRequest) -> Result<()> {
    let data = load(req)?;
    let chart = match req.kind {
        PlotKind::LossVsShots => step_bands(&data, "exact f", false, "Exact value vs shots"),
        PlotKind::ErrorBoundVsShots => step_bands(&data, "MSE bound", true, "Error bound vs shots"),
        PlotKind::DistAtBudget => dist_at_budget(&data, req.budget),
        PlotKind::ShotsPerIter => shots_per_iter(&data),
        PlotKind::MseBoundVsActual => mse_vs_bound(&data),
        PlotKind::CiCheck => ci_check(&data),
    };
    let svg = chart.render()?;
    if let Some(dir) = req.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(&req.out, svg).map_err(|e| HarnessError::io(&req.out, e))
}

/// Linear-interpolation percentile of sorted values, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Group rows (first column = trial) by trial, keeping file order.
fn trials(rows: &[Vec<f64>]) -> Vec<&[Vec<f64>]> {
    rows.chunk_by(|a, b| a[0] == b[0]).collect()
}

/// Value of a per-trial step function at `x`: the last row with
/// `cumulative_shots ≤ x`.
fn step_at(trial: &[Vec<f64>], x: f64) -> Option<f64> {
    trial.iter().rev().find(|r| r[1] <= x).map(|r| r[2])
}

fn step_bands(data: &Columns, y_label: &str, log_y: bool, title: &str) -> Chart {
    let mut chart = Chart::new(
        &format!("{title} (median, 10–90% band)"),
        "cumulative shots",
        y_label,
        log_y,
    );
    for (i, (variant, rows)) in data.iter().enumerate() {
        let ts = trials(rows);
        let x_max = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
        let mut band = Vec::new();
        let mut mid = Vec::new();
        for g in 0..=200 {
            let x = x_max * g as f64 / 200.0;
            let mut ys: Vec<f64> = ts.iter().filter_map(|t| step_at(t, x)).collect();
            if ys.is_empty() {
                continue;
            }
            ys.sort_by(f64::total_cmp);
            band.push((x, percentile(&ys, 0.1), percentile(&ys, 0.9)));
            mid.push((x, percentile(&ys, 0.5)));
        }
        chart.bands.push(Band {
            points: band,
            color: color(i),
        });
        chart.lines.push(Line {
            label: variant.clone(),
            points: mid,
            color: color(i),
            dashed: false,
        });
    }
    chart
}

fn dist_at_budget(data: &Columns, budget: Option<u64>) -> Chart {
    let budget = budget.map(|b| b as f64).unwrap_or_else(|| {
        data.values()
            .flat_map(|rows| trials(rows).into_iter().filter_map(|t| t.last().map(|r| r[1])))
            .fold(f64::INFINITY, f64::min)
    });
    let values: BTreeMap<&String, Vec<f64>> = data
        .iter()
        .map(|(v, rows)| {
            let vals = trials(rows)
                .into_iter()
                .filter_map(|t| step_at(t, budget).or_else(|| t.first().map(|r| r[2])))
                .collect();
            (v, vals)
        })
        .collect();
    let lo = values.values().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = values.values().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let bins = 24;
    let width = (hi - lo) / bins as f64;
    let mut chart = Chart::new(
        &format!("Distribution of exact f at {budget} shots"),
        "exact f",
        "trials",
        false,
    );
    for (i, (variant, vals)) in values.iter().enumerate() {
        let mut counts = vec![0.0; bins];
        for &v in vals {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1.0;
        }
        chart.bars.push(Bars {
            label: variant.to_string(),
            x0: lo,
            width,
            heights: counts,
            color: color(i),
        });
    }
    chart
}

/// Mean over trials of a per-iteration quantity.
fn per_iteration(rows: &[Vec<f64>], iter_col: usize, value: impl Fn(&[f64]) -> f64) -> Vec<(f64, f64)> {
    let mut acc: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r[iter_col] as u64).or_insert((0.0, 0));
        e.0 += value(r);
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(i, (s, n))| (i as f64, s / n as f64))
        .collect()
}

fn shots_per_iter(data: &Columns) -> Chart {
    let mut chart = Chart::new("Shots per iteration", "iteration", "mean shots", false);
    for (i, (variant, rows)) in data.iter().enumerate() {
        let mut spent = Vec::with_capacity(rows.len());
        for t in trials(rows) {
            let mut prev = 0.0;
            for r in t {
                spent.push(vec![r[1], r[2] - prev]);
                prev = r[2];
            }
        }
        chart.lines.push(Line {
            label: variant.clone(),
            points: per_iteration(&spent, 0, |r| r[1]),
            color: color(i),
            dashed: false,
        });
    }
    chart
}

fn mse_vs_bound(data: &Columns) -> Chart {
    let mut chart = Chart::new("Empirical MSE vs bound", "iteration", "MSE", true);
    for (i, (variant, rows)) in data.iter().enumerate() {
        chart.lines.push(Line {
            label: format!("{variant} empirical"),
            points: per_iteration(rows, 0, |r| (r[1] - r[2]).powi(2)),
            color: color(i),
            dashed: false,
        });
        chart.lines.push(Line {
            label: format!("{variant} bound"),
            points: per_iteration(rows, 0, |r| r[3]),
            color: color(i),
            dashed: true,
        });
    }
    chart
}

fn ci_check(data: &Columns) -> Chart {
    let mut chart = Chart::new(
        "Confidence interval check (κ = 2)",
        "iteration",
        "violation rate",
        false,
    );
    let mut x_max: f64 = 0.0;
    for (i, (variant, rows)) in data.iter().enumerate() {
        let pts = per_iteration(rows, 0, |r| f64::from(u8::from((r[1] - r[2]).abs() > r[3])));
        x_max = pts.iter().map(|p| p.0).fold(x_max, f64::max);
        chart.lines.push(Line {
            label: variant.clone(),
            points: pts,
            color: color(i),
            dashed: false,
        });
    }
    let tail = 2.0 * (-2.0f64).exp();
    chart.lines.push(Line {
        label: "tail bound 2e^(−2)".into(),
        points: vec![(0.0, tail), (x_max.max(1.0), tail)],
        color: "#555555",
        dashed: true,
    });
    chart
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Line {
    label: String,
    points: Vec<(f64, f64)>,
    color: &'static str,
    dashed: bool,
}

struct Band {
    points: Vec<(f64, f64, f64)>,
    color: &'static str,
}

struct Bars {
    label: String,
    x0: f64,
    width: f64,
    heights: Vec<f64>,
    color: &'static str,
}

struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    log_y: bool,
    lines: Vec<Line>,
    bands: Vec<Band>,
    bars: Vec<Bars>,
}

const W: f64 = 820.0;
const H: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 240.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick step to 1, 2 or 5 times a power of ten.
fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

/// Multiples of `step` within `[lo, hi]`, snapped so that zero prints as 0.
fn ticks(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 1e5 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl Chart {
    fn new(title: &str, x_label: &str, y_label: &str, log_y: bool) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_y,
            lines: Vec::new(),
            bands: Vec::new(),
            bars: Vec::new(),
        }
    }

    fn ty(&self, y: f64) -> Option<f64> {
        if self.log_y {
            (y > 0.0 && y.is_finite()).then(|| y.log10())
        } else {
            y.is_finite().then_some(y)
        }
    }

    fn extent(&self) -> Option<(f64, f64, f64, f64)> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for l in &self.lines {
            for &(x, y) in &l.points {
                if let Some(y) = self.ty(y) {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        for b in &self.bands {
            for &(x, lo, hi) in &b.points {
                xs.push(x);
                ys.extend([lo, hi].into_iter().filter_map(|v| self.ty(v)));
            }
        }
        for b in &self.bars {
            xs.push(b.x0);
            xs.push(b.x0 + b.width * b.heights.len() as f64);
            ys.push(0.0);
            ys.extend(b.heights.iter().copied());
        }
        let fold = |v: &[f64]| {
            (
                v.iter().copied().fold(f64::INFINITY, f64::min),
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        if xs.is_empty() || ys.is_empty() {
            return None;
        }
        let (x0, x1) = fold(&xs);
        let (y0, y1) = fold(&ys);
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        let margin = 0.05 * (y1 - y0);
        let y_lo = if self.bars.is_empty() { y0 - margin } else { y0 };
        Some((x0, x1, y_lo, y1 + margin))
    }

    fn render(&self) -> Result<String> {
        let (x0, x1, y0, y1) = self
            .extent()
            .ok_or_else(|| HarnessError::Plot("nothing to plot".into()))?;
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="28" font-size="16" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );

        // grid and ticks
        let xs = nice_step(x1 - x0, 6);
        for t in ticks(x0, x1, xs) {
            let px = sx(t);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#e5e5e5"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 18.0,
                fmt_tick(t)
            );
        }
        let ys = if self.log_y {
            nice_step(y1 - y0, 6).max(1.0).round()
        } else {
            nice_step(y1 - y0, 6)
        };
        for t in ticks(y0, y1, ys) {
            let py = sy(t);
            let label = if self.log_y {
                fmt_tick(10f64.powf(t))
            } else {
                fmt_tick(t)
            };
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e5e5e5"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            s,
            r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&format!(
                "{}{}",
                self.y_label,
                if self.log_y { " (log)" } else { "" }
            ))
        );

        for b in &self.bands {
            let upper: Vec<String> = b
                .points
                .iter()
                .filter_map(|&(x, _, hi)| self.ty(hi).map(|y| format!("{:.2},{:.2}", sx(x), sy(y))))
                .collect();
            let lower: Vec<String> = b
                .points
                .iter()
                .rev()
                .filter_map(|&(x, lo, _)| self.ty(lo).map(|y| format!("{:.2},{:.2}", sx(x), sy(y))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polygon points="{} {}" fill="{}" fill-opacity="0.18" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" "),
                b.color
            );
        }
        for b in &self.bars {
            for (k, &h) in b.heights.iter().enumerate() {
                if h <= 0.0 {
                    continue;
                }
                let xa = sx(b.x0 + b.width * k as f64);
                let xb = sx(b.x0 + b.width * (k + 1) as f64);
                let _ = writeln!(
                    s,
                    r#"<rect x="{xa:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.4" stroke="{}"/>"#,
                    sy(h),
                    xb - xa,
                    sy(0.0) - sy(h),
                    b.color,
                    b.color
                );
            }
        }
        for l in &self.lines {
            let pts: Vec<String> = l
                .points
                .iter()
                .filter_map(|&(x, y)| self.ty(y).map(|y| format!("{:.2},{:.2}", sx(x), sy(y))))
                .collect();
            let dash = if l.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#,
                pts.join(" "),
                l.color
            );
        }

        // legend
        let mut ly = TOP + 10.0;
        let lx = LEFT + pw + 14.0;
        let entries = self
            .lines
            .iter()
            .map(|l| (l.label.as_str(), l.color, l.dashed))
            .chain(self.bars.iter().map(|b| (b.label.as_str(), b.color, false)));
        for (label, c, dashed) in entries {
            let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="3"{dash}/><text x="{}" y="{}">{}</text>"#,
                lx + 22.0,
                lx + 28.0,
                ly + 4.0,
                escape(label)
            );
            ly += 20.0;
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}
