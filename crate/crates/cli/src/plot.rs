//! Static SVG figures: MSE box plots, mean-rank curves, dissociation curves
//! and shot-noise curves.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use siqnn::bench::{aggregate_boxplot, aggregate_ranking, BoxRow, RankRow, RunRecord, ShotRow};

use crate::commands::PredictionRow;
use crate::output::{read_csv, slug, VERSION};

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn color(name: &str, k: usize) -> &'static str {
    const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
    match name {
        "siqnn" | "checkpoint" => "#1f77b4",
        "siqnn_nn" | "trained" => "#d62728",
        "nn" | "trained_eval_high" => "#2ca02c",
        "gpr" | "upper_bound" => "#9467bd",
        "svr" | "qwc" => "#ff7f0e",
        _ => PALETTE[k % PALETTE.len()],
    }
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl IntoIterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.into_iter().filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Self { lo: if log { 0.1 } else { 0.0 }, hi: 1.0, log };
        }
        if log {
            Self {
                lo: 10f64.powf(lo.log10().floor()),
                hi: 10f64.powf(hi.log10().ceil().max(lo.log10().floor() + 1.0)),
                log,
            }
        } else {
            let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
            Self { lo: lo - pad, hi: hi + pad, log }
        }
    }

    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.max(f64::MIN_POSITIVE).log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
            let stride = ((b - a) as f64 / 8.0).ceil().max(1.0) as i32;
            return (a..=b).step_by(stride as usize).map(|e| (10f64.powi(e), format!("1e{e}"))).collect();
        }
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let digits = (-step.log10().floor()).max(0.0) as usize;
        let mut out = Vec::new();
        let mut v = (self.lo / step).ceil() * step;
        while v <= self.hi + 1e-9 * step {
            out.push((v, format!("{:.*}", digits, v + 0.0)));
            v += step;
        }
        out
    }
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        LEFT + self.x.frac(v) * (W - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        H - BOTTOM - self.y.frac(v) * (H - TOP - BOTTOM)
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str, desc: &[String]) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, "<title>{}</title>", esc(title));
        let mut d = vec![format!("siqnn {VERSION}")];
        d.extend(desc.iter().cloned());
        let _ = writeln!(body, "<desc>{}</desc>", esc(&d.join("; ")));
        let _ = writeln!(body, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            (LEFT + W - RIGHT) / 2.0,
            esc(title)
        );
        Self { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"{extra}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, esc(s));
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, extra: &str) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"{extra}/>"#,
            p.join(" ")
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#);
    }

    fn cross(&mut self, x: f64, y: f64, stroke: &str) {
        let s = 5.0;
        self.line(x - s, y - s, x + s, y + s, stroke, r#" stroke-width="2""#);
        self.line(x - s, y + s, x + s, y - s, stroke, r#" stroke-width="2""#);
    }

    fn axes(&mut self, f: &Frame, x_label: &str, y_label: &str, x_ticks: &[(f64, String)]) {
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for (v, label) in f.y.ticks() {
            let y = f.py(v);
            self.line(x0, y, x1, y, "#dddddd", "");
            self.line(x0 - 4.0, y, x0, y, "black", "");
            self.text(x0 - 6.0, y + 4.0, "end", &label);
        }
        for (v, label) in x_ticks {
            let x = f.px(*v);
            self.line(x, y0, x, y0 + 4.0, "black", "");
            self.text(x, y0 + 18.0, "middle", label);
        }
        self.text((x0 + x1) / 2.0, H - 18.0, "middle", x_label);
        let _ = writeln!(
            self.body,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            esc(y_label)
        );
    }

    fn legend(&mut self, entries: &[(String, &str, &str)]) {
        for (k, (name, stroke, dash)) in entries.iter().enumerate() {
            let y = TOP + 14.0 + 20.0 * k as f64;
            let x = W - RIGHT + 14.0;
            self.line(x, y, x + 24.0, y, stroke, &format!(r#" stroke-width="3"{dash}"#));
            self.text(x + 30.0, y + 4.0, "start", name);
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `#` header lines of a CSV written by this tool.
fn provenance(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .map(|t| {
            t.lines()
                .take_while(|l| l.starts_with('#'))
                .map(|l| l.trim_start_matches('#').trim().to_string())
                .filter(|l| !l.starts_with("siqnn "))
                .collect()
        })
        .unwrap_or_default()
}

fn models_in<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    const ORDER: [&str; 5] = ["siqnn_nn", "siqnn", "nn", "gpr", "svr"];
    let set: BTreeSet<&str> = names.collect();
    let mut out: Vec<String> = ORDER.iter().filter(|m| set.contains(**m)).map(|m| m.to_string()).collect();
    out.extend(set.iter().filter(|m| !ORDER.contains(m)).map(|m| m.to_string()));
    out
}

pub fn boxplot_svg(target: &str, rows: &[&BoxRow], desc: &[String]) -> String {
    let models = models_in(rows.iter().map(|r| r.model.as_str()));
    let ls: Vec<usize> = rows.iter().map(|r| r.l).collect::<BTreeSet<_>>().into_iter().collect();
    let y = Axis::fit(
        rows.iter().flat_map(|r| {
            let s = &r.stats;
            [s.whisker_lo, s.whisker_hi].into_iter().chain(s.outliers.iter().copied())
        }),
        true,
    );
    let f = Frame { x: Axis { lo: -0.5, hi: ls.len() as f64 - 0.5, log: false }, y };
    let mut svg = Svg::new(&format!("Test MSE, {target}"), desc);
    let x_ticks: Vec<(f64, String)> = ls.iter().enumerate().map(|(k, l)| (k as f64, l.to_string())).collect();
    svg.axes(&f, "training points L", "test MSE", &x_ticks);
    let slot = 0.8 / models.len() as f64;
    for r in rows {
        let (Some(li), Some(mi)) = (ls.iter().position(|&l| l == r.l), models.iter().position(|m| *m == r.model))
        else {
            continue;
        };
        let c = color(&r.model, mi);
        let center = li as f64 - 0.4 + slot * (mi as f64 + 0.5);
        let (xl, xc, xr) = (f.px(center - 0.4 * slot), f.px(center), f.px(center + 0.4 * slot));
        let s = &r.stats;
        svg.line(xc, f.py(s.whisker_lo), xc, f.py(s.q1), c, "");
        svg.line(xc, f.py(s.q3), xc, f.py(s.whisker_hi), c, "");
        svg.line(xl, f.py(s.whisker_lo), xr, f.py(s.whisker_lo), c, "");
        svg.line(xl, f.py(s.whisker_hi), xr, f.py(s.whisker_hi), c, "");
        let (top, bottom) = (f.py(s.q3), f.py(s.q1));
        let _ = writeln!(
            svg.body,
            r#"<rect x="{xl:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{c}" fill-opacity="0.25" stroke="{c}"/>"#,
            xr - xl,
            (bottom - top).max(0.5)
        );
        svg.line(xl, f.py(s.median), xr, f.py(s.median), c, r#" stroke-width="2""#);
        for &o in &s.outliers {
            svg.circle(xc, f.py(o), 2.0, c);
        }
    }
    let entries: Vec<(String, &str, &str)> =
        models.iter().enumerate().map(|(k, m)| (m.clone(), color(m, k), "")).collect();
    svg.legend(&entries);
    svg.finish()
}

pub fn ranking_svg(rows: &[RankRow], desc: &[String]) -> String {
    let models = models_in(rows.iter().map(|r| r.model.as_str()));
    let ls: Vec<usize> = rows.iter().map(|r| r.l).collect::<BTreeSet<_>>().into_iter().collect();
    let y = Axis::fit(
        rows.iter().flat_map(|r| [r.mean_rank - r.sem, r.mean_rank + r.sem]).chain([1.0, models.len() as f64]),
        false,
    );
    let x = Axis { lo: ls[0] as f64 - 0.5, hi: ls[ls.len() - 1] as f64 + 0.5, log: false };
    let f = Frame { x, y };
    let mut svg = Svg::new("Mean rank of the models", desc);
    let x_ticks: Vec<(f64, String)> = ls.iter().map(|&l| (l as f64, l.to_string())).collect();
    svg.axes(&f, "training points L", "mean rank", &x_ticks);
    for (mi, m) in models.iter().enumerate() {
        let c = color(m, mi);
        let mine: Vec<&RankRow> = rows.iter().filter(|r| &r.model == m).collect();
        let pts: Vec<(f64, f64)> = mine.iter().map(|r| (f.px(r.l as f64), f.py(r.mean_rank))).collect();
        svg.polyline(&pts, c, "");
        for r in &mine {
            let xc = f.px(r.l as f64);
            svg.line(xc, f.py(r.mean_rank - r.sem), xc, f.py(r.mean_rank + r.sem), c, "");
            svg.line(xc - 4.0, f.py(r.mean_rank - r.sem), xc + 4.0, f.py(r.mean_rank - r.sem), c, "");
            svg.line(xc - 4.0, f.py(r.mean_rank + r.sem), xc + 4.0, f.py(r.mean_rank + r.sem), c, "");
            svg.circle(xc, f.py(r.mean_rank), 3.0, c);
        }
    }
    let entries: Vec<(String, &str, &str)> =
        models.iter().enumerate().map(|(k, m)| (m.clone(), color(m, k), "")).collect();
    svg.legend(&entries);
    svg.finish()
}

pub fn curve_svg(title: &str, rows: &[PredictionRow], desc: &[String]) -> String {
    let f = Frame {
        x: Axis::fit(rows.iter().map(|r| r.r), false),
        y: Axis::fit(rows.iter().flat_map(|r| [r.exact, r.siqnn, r.siqnn_nn]), false),
    };
    let mut svg = Svg::new(title, desc);
    svg.axes(&f, "R (Å)", title, &f.x.ticks());
    let series: [(&str, &str, fn(&PredictionRow) -> f64); 3] = [
        ("exact", "black", |r| r.exact),
        ("siqnn", color("siqnn", 0), |r| r.siqnn),
        ("siqnn_nn", color("siqnn_nn", 1), |r| r.siqnn_nn),
    ];
    for (name, c, get) in series {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (f.px(r.r), f.py(get(r)))).collect();
        let dash = if name == "exact" { r#" stroke-dasharray="6 4""# } else { "" };
        svg.polyline(&pts, c, dash);
    }
    for r in rows.iter().filter(|r| r.train == 1) {
        svg.cross(f.px(r.r), f.py(r.exact), "black");
    }
    svg.legend(&[
        ("exact".into(), "black", r#" stroke-dasharray="6 4""#),
        ("siqnn".into(), color("siqnn", 0), ""),
        ("siqnn_nn".into(), color("siqnn_nn", 1), ""),
    ]);
    svg.finish()
}

pub fn shots_svg(rows: &[ShotRow], desc: &[String]) -> String {
    let f = Frame {
        x: Axis::fit(rows.iter().map(|r| r.shots as f64), true),
        y: Axis::fit(rows.iter().map(|r| r.mse), true),
    };
    let mut svg = Svg::new("MSE versus shots", desc);
    svg.axes(&f, "shots", "MSE", &f.x.ticks());
    let mut curves: BTreeMap<String, Vec<&ShotRow>> = BTreeMap::new();
    for r in rows {
        curves.entry(r.curve.to_string()).or_default().push(r);
    }
    let mut entries = Vec::new();
    for (k, (name, pts)) in curves.iter().enumerate() {
        let c = color(name, k);
        let p: Vec<(f64, f64)> = pts.iter().map(|r| (f.px(r.shots as f64), f.py(r.mse))).collect();
        svg.polyline(&p, c, "");
        for (x, y) in &p {
            svg.circle(*x, *y, 3.0, c);
        }
        entries.push((name.clone(), c, ""));
    }
    svg.legend(&entries);
    svg.finish()
}

/// Render every figure the inputs allow; returns the written files.
pub fn plot(records: &[PathBuf], predictions: &[PathBuf], shots: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() && predictions.is_empty() && shots.is_empty() {
        bail!("nothing to plot: pass --records, --predictions or --shots");
    }
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let mut write = |name: String, svg: String| -> Result<()> {
        let p = out.join(name);
        std::fs::write(&p, svg)?;
        written.push(p);
        Ok(())
    };
    if !records.is_empty() {
        let mut all: Vec<RunRecord> = Vec::new();
        let mut desc = Vec::new();
        for p in records {
            all.extend(read_csv::<RunRecord>(p)?);
            desc.extend(provenance(p));
        }
        if all.iter().all(|r| r.test_mse.is_none()) {
            bail!("no successful runs in the given records");
        }
        let boxes = aggregate_boxplot(&all)?;
        let targets: BTreeSet<&str> = boxes.iter().map(|b| b.target.as_str()).collect();
        for t in targets {
            let rows: Vec<&BoxRow> = boxes.iter().filter(|b| b.target == t).collect();
            write(format!("boxplot_{}.svg", slug(t)), boxplot_svg(t, &rows, &desc))?;
        }
        write("ranking.svg".into(), ranking_svg(&aggregate_ranking(&all)?, &desc))?;
    }
    for p in predictions {
        let rows: Vec<PredictionRow> = read_csv(p)?;
        if rows.is_empty() {
            bail!("{} holds no predictions", p.display());
        }
        let desc = provenance(p);
        let title = desc
            .iter()
            .find_map(|l| l.strip_prefix("target: "))
            .map_or_else(|| "prediction".to_string(), str::to_string);
        let stem = p.file_stem().map_or_else(|| "predictions".into(), |s| s.to_string_lossy().into_owned());
        write(format!("curve_{}.svg", stem.trim_start_matches("predictions_")), curve_svg(&title, &rows, &desc))?;
    }
    for p in shots {
        let rows: Vec<ShotRow> = read_csv(p)?;
        if rows.is_empty() {
            bail!("{} holds no shot rows", p.display());
        }
        write("shots.svg".into(), shots_svg(&rows, &provenance(p)))?;
    }
    Ok(written)
}
