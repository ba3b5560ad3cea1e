//! Minimal SVG rendering for result tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use crate::table::Loaded;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Draw point markers.
    pub markers: bool,
}

pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn open(title: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>", (LEFT + W - RIGHT) / 2.0, escape(title));
    s
}

impl LineChart {
    pub fn render(&self) -> Result<String> {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|p| p.0.is_finite() && p.1.is_finite() && (!self.log_y || p.1 > 0.0))
            .collect();
        if pts.is_empty() {
            bail!("nothing to plot");
        }
        let fy = |y: f64| if self.log_y { y.log10() } else { y };
        let (mut x0, mut x1) = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.0), a.1.max(p.0)));
        let (mut y0, mut y1) = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(fy(p.1)), a.1.max(fy(p.1))));
        if x1 - x0 < 1e-12 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
        let py = |y: f64| H - BOTTOM - (fy(y) - y0) / (y1 - y0) * (H - TOP - BOTTOM);

        let mut s = open(&self.title);
        let _ = writeln!(
            s,
            "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            W - LEFT - RIGHT,
            H - TOP - BOTTOM
        );
        for t in ticks(x0, x1) {
            let x = px(t);
            let _ = writeln!(s, "<line x1=\"{x:.1}\" y1=\"{}\" x2=\"{x:.1}\" y2=\"{}\" stroke=\"black\"/>", H - BOTTOM, H - BOTTOM + 5.0);
            let _ = writeln!(s, "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>", H - BOTTOM + 18.0, label(t));
        }
        let y_ticks: Vec<f64> = if self.log_y {
            (y0.ceil() as i32..=y1.floor() as i32).map(f64::from).collect()
        } else {
            ticks(y0, y1)
        };
        for t in y_ticks {
            let v = if self.log_y { 10f64.powf(t) } else { t };
            let y = py(v);
            let _ = writeln!(s, "<line x1=\"{}\" y1=\"{y:.1}\" x2=\"{LEFT}\" y2=\"{y:.1}\" stroke=\"black\"/>", LEFT - 5.0);
            let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>", LEFT - 8.0, y + 4.0, label(v));
        }
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", (LEFT + W - RIGHT) / 2.0, H - 10.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>",
            (TOP + H - BOTTOM) / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite() && (!self.log_y || p.1 > 0.0))
                .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
                .collect();
            let dash = if series.dashed { " stroke-dasharray=\"6,4\"" } else { "" };
            let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>", path.join(" "));
            if series.markers {
                for p in &path {
                    let (x, y) = p.split_once(',').unwrap();
                    let _ = writeln!(s, "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{color}\"/>");
                }
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = W - RIGHT + 10.0;
            let _ = writeln!(s, "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>", lx + 20.0);
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{}</text>", lx + 25.0, ly + 4.0, escape(&series.label));
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

/// Color grid with rows and columns labeled; values in `[0, 1]`.
pub fn heatmap(title: &str, row_labels: &[String], col_labels: &[String], values: &[Vec<f64>]) -> String {
    let cw = (W - LEFT - RIGHT) / col_labels.len().max(1) as f64;
    let ch = (H - TOP - BOTTOM) / row_labels.len().max(1) as f64;
    let mut s = open(title);
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let t = v.clamp(0.0, 1.0);
            let (r, g, b) = (255.0 - 200.0 * t, 255.0 - 170.0 * t, 255.0 - 40.0 * t);
            let _ = writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{cw:.1}\" height=\"{ch:.1}\" fill=\"rgb({:.0},{:.0},{:.0})\" stroke=\"white\"/>",
                LEFT + j as f64 * cw,
                TOP + i as f64 * ch,
                r,
                g,
                b
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"10\">{v:.2}</text>",
                LEFT + (j as f64 + 0.5) * cw,
                TOP + (i as f64 + 0.5) * ch + 4.0
            );
        }
    }
    for (i, l) in row_labels.iter().enumerate() {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>", LEFT - 6.0, TOP + (i as f64 + 0.5) * ch + 4.0, escape(l));
    }
    for (j, l) in col_labels.iter().enumerate() {
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>", LEFT + (j as f64 + 0.5) * cw, H - BOTTOM + 18.0, escape(l));
    }
    s.push_str("</svg>\n");
    s
}

fn group_by(keys: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for k in keys {
        if !out.contains(k) {
            out.push(k.clone());
        }
    }
    out
}

fn scaling(t: &Loaded) -> Result<String> {
    let methods = t.strings("method")?;
    let n = t.floats("n")?;
    let mean = t.floats("f_evals_mean")?;
    let mut series: Vec<Series> = group_by(&methods)
        .into_iter()
        .map(|m| Series {
            points: (0..n.len()).filter(|&i| methods[i] == m).map(|i| (n[i], mean[i])).collect(),
            label: m,
            dashed: false,
            markers: true,
        })
        .collect();
    let (lo, hi) = n.iter().fold((f64::MAX, f64::MIN), |a, &x| (a.0.min(x), a.1.max(x)));
    let grid: Vec<f64> = (0..=50).map(|i| lo + (hi - lo) * i as f64 / 50.0).collect();
    series.push(Series { label: "n^2/2 - n/4".into(), points: grid.iter().map(|&x| (x, x * x / 2.0 - x / 4.0)).collect(), dashed: true, markers: false });
    series.push(Series { label: "2^n/2".into(), points: grid.iter().map(|&x| (x, 2f64.powf(x) / 2.0)).collect(), dashed: true, markers: false });
    LineChart { title: "Loss evaluations to solution".into(), x_label: "n = D".into(), y_label: "mean f_evals".into(), log_y: true, series }.render()
}

fn landscape_heatmap(t: &Loaded) -> Result<String> {
    let betas = t.floats("beta")?;
    let metrics = ["non_unimodal", "non_separable", "non_monotonic"];
    let values = metrics.iter().map(|m| t.floats(m)).collect::<Result<Vec<_>>>()?;
    let cols: Vec<String> = betas.iter().map(|b| label(*b)).collect();
    let rows: Vec<String> = metrics.iter().map(|m| m.replace('_', "-")).collect();
    Ok(heatmap("Landscape classification fractions by beta", &rows, &cols, &values))
}

fn success(t: &Loaded) -> Result<String> {
    let n = t.strings("n")?;
    let sigma = t.floats("sigma")?;
    let rate = t.floats("success_rate")?;
    let series = group_by(&n)
        .into_iter()
        .map(|k| Series {
            points: (0..n.len()).filter(|&i| n[i] == k).map(|i| (sigma[i], rate[i])).collect(),
            label: format!("n = {k}"),
            dashed: false,
            markers: true,
        })
        .collect();
    LineChart { title: "Noisy hill climbing success".into(), x_label: "sigma".into(), y_label: "success rate".into(), log_y: false, series }.render()
}

fn trace(t: &Loaded) -> Result<String> {
    let inst = t.strings("instance")?;
    let cz = t.strings("cz_enabled")?;
    let sweep = t.floats("sweep")?;
    let loss = t.floats("current_loss")?;
    let keys: Vec<String> = inst.iter().zip(&cz).map(|(i, c)| format!("{i}/{c}")).collect();
    let series = group_by(&keys)
        .into_iter()
        .map(|k| {
            let idx: Vec<usize> = (0..keys.len()).filter(|&i| keys[i] == k).collect();
            let dashed = cz[idx[0]] == "false";
            Series {
                points: idx.iter().map(|&i| (sweep[i], loss[i].max(1e-17))).collect(),
                label: format!("inst {}{}", inst[idx[0]], if dashed { " no CZ" } else { "" }),
                dashed,
                markers: false,
            }
        })
        .collect();
    LineChart { title: "Loss per sweep".into(), x_label: "sweep".into(), y_label: "loss".into(), log_y: true, series }.render()
}

/// Error for an input whose columns match no known table.
#[derive(Debug)]
pub struct SchemaMismatch(pub String);

impl std::fmt::Display for SchemaMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SchemaMismatch {}

/// Renders one table to `<out_dir>/<stem>.svg`.
pub fn plot_file(input: &Path, out_dir: &Path) -> Result<PathBuf> {
    let t = Loaded::read(input)?;
    if t.rows.is_empty() {
        return Err(SchemaMismatch(format!("{} has no rows", input.display())).into());
    }
    let svg = if t.has(&["method", "n", "f_evals_mean"]) {
        scaling(&t)?
    } else if t.has(&["beta", "non_unimodal", "non_separable", "non_monotonic"]) {
        landscape_heatmap(&t)?
    } else if t.has(&["n", "sigma", "success_rate"]) {
        success(&t)?
    } else if t.has(&["instance", "cz_enabled", "sweep", "current_loss"]) {
        trace(&t)?
    } else {
        return Err(SchemaMismatch(format!("{}: unrecognized columns {:?}", input.display(), t.columns)).into());
    };
    std::fs::create_dir_all(out_dir)?;
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "plot".into());
    let path = out_dir.join(format!("{stem}.svg"));
    std::fs::write(&path, svg)?;
    Ok(path)
}
