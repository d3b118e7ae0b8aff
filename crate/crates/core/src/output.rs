//! CSV, gnuplot `.dat` and SVG emission.
//!
//! Numbers are written with 12 significant digits. Plots are rendered from
//! the CSV files after they are written, so they can never disagree with
//! the numeric output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{cycle_efficiency, cycle_power, SweepPoint};
use crate::cycle::{CycleRecord, EngineTrace};
use crate::error::Result;

/// Formats `x` with 12 significant digits: positional notation for
/// magnitudes in [1e-5, 1e12), scientific otherwise.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn opt_number(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), format_number)
}

/// `t, omega, U, S, stroke_label, P_0..P_{k-1}` plus `P_rest` (mass above
/// the listed levels) when `levels` does not cover the whole ladder.
pub fn write_timeseries_csv<W: Write>(trace: &EngineTrace, levels: Option<usize>, out: W) -> Result<()> {
    let ladder = trace.samples.first().map_or(0, |s| s.dist.probs().len());
    let shown = levels.map_or(ladder, |k| k.min(ladder));
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["t", "omega", "U", "S", "stroke_label"].map(String::from).to_vec();
    header.extend((0..shown).map(|n| format!("P_{n}")));
    let with_rest = shown < ladder;
    if with_rest {
        header.push("P_rest".into());
    }
    w.write_record(&header)?;
    for s in &trace.samples {
        let probs = s.dist.probs();
        let mut row = vec![
            format_number(s.time),
            format_number(s.omega),
            format_number(s.energy),
            format_number(s.entropy),
            s.label.to_string(),
        ];
        row.extend(probs[..shown].iter().map(|p| format_number(*p)));
        if with_rest {
            row.push(format_number(probs[shown..].iter().sum()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const CYCLE_COLUMNS: [&str; 21] = [
    "cycle",
    "q_in",
    "q_out",
    "w_out",
    "w_in",
    "w_eff",
    "q_pump",
    "pump_energy",
    "efficiency",
    "power",
    "U_A",
    "U_B",
    "U_C",
    "U_D",
    "U_A_prime",
    "S_A",
    "S_B",
    "S_C",
    "S_D",
    "tv_cycle",
    "first_law_residual",
];

pub fn write_cycles_csv<W: Write>(records: &[CycleRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CYCLE_COLUMNS)?;
    for r in records {
        let (h, c) = (r.omega_h, r.omega_c);
        let row = [
            r.cycle_index.to_string(),
            format_number(r.q_in),
            format_number(r.q_out),
            format_number(r.w_out),
            format_number(r.w_in),
            format_number(r.w_eff),
            format_number(r.q_pump),
            format_number(r.pump_energy),
            opt_number(cycle_efficiency(r)),
            format_number(cycle_power(r, r.period)),
            format_number(h * r.a.mean_occupation()),
            format_number(h * r.b.mean_occupation()),
            format_number(c * r.c.mean_occupation()),
            format_number(c * r.d.mean_occupation()),
            format_number(h * r.a_prime.mean_occupation()),
            format_number(r.a.entropy()),
            format_number(r.b.entropy()),
            format_number(r.c.entropy()),
            format_number(r.d.entropy()),
            format_number(r.cyclostationarity()),
            format_number(r.first_law_residual()),
        ];
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "T_h",
        "ratio",
        "efficiency",
        "power",
        "q_in",
        "w_eff",
        "converged",
        "degenerate",
    ])?;
    for p in points {
        w.write_record([
            format_number(p.t_h),
            format_number(p.ratio),
            opt_number(p.efficiency),
            format_number(p.power),
            format_number(p.q_in),
            format_number(p.w_eff),
            p.converged.to_string(),
            p.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Minimal multi-series line chart.
#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#ff7f0e", "#17becf", "#2ca02c", "#9467bd", "#8c564b", "#e377c2",
];

impl LineChart {
    pub fn to_svg(&self) -> String {
        let (width, height) = (800.0, 500.0);
        let (left, right, top, bottom) = (80.0, 160.0, 40.0, 60.0);
        let plot_w = width - left - right;
        let plot_h = height - top - bottom;

        let finite = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in finite {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let sx = |x: f64| left + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| top + (y1 - y) / (y1 - y0) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            left + plot_w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(xv),
                top + plot_h + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
                left - 6.0,
                sy(yv),
                tick(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            left + plot_w / 2.0,
            height - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            top + plot_h / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut d = String::new();
            let mut pen_down = false;
            for &(x, y) in &s.points {
                if !(x.is_finite() && y.is_finite()) {
                    pen_down = false;
                    continue;
                }
                let _ = write!(d, "{}{:.2} {:.2} ", if pen_down { 'L' } else { 'M' }, sx(x), sy(y));
                pen_down = true;
            }
            let _ = writeln!(
                svg,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                d.trim_end()
            );
            let ly = top + 14.0 + 18.0 * i as f64;
            let _ = writeln!(
                svg,
                r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{2}" y="{ly}" dominant-baseline="middle">{3}</text>"#,
                left + plot_w + 10.0,
                left + plot_w + 30.0,
                left + plot_w + 36.0,
                escape(&s.name)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }

    /// Gnuplot-readable blocks, one per series, separated by two blank lines.
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {}\n# {}\t{}\n", self.title, self.x_label, self.y_label);
        for (i, s) in self.series.iter().enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            let _ = writeln!(out, "# {}", s.name);
            for &(x, y) in &s.points {
                let _ = writeln!(out, "{}\t{}", format_number(x), format_number(y));
            }
        }
        out
    }

    /// Writes `<stem>.svg` and `<stem>.dat` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        let svg = dir.join(format!("{stem}.svg"));
        let dat = dir.join(format!("{stem}.dat"));
        fs::write(&svg, self.to_svg())?;
        fs::write(&dat, self.to_dat())?;
        Ok(vec![svg, dat])
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Column-oriented view of a CSV file written by this module.
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a column; non-numeric cells become NaN (and break the plotted line).
    pub fn column(&self, name: &str) -> Vec<f64> {
        match self.index(name) {
            Some(i) => self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect(),
            None => Vec::new(),
        }
    }

    pub fn text_column(&self, name: &str) -> Vec<String> {
        match self.index(name) {
            Some(i) => self.rows.iter().map(|r| r[i].clone()).collect(),
            None => Vec::new(),
        }
    }
}

/// Energy-versus-time plus efficiency and power per cycle, from the engine CSVs.
pub fn engine_charts(timeseries: &Path, cycles: &Path) -> Result<Vec<(String, LineChart)>> {
    let ts = CsvTable::read(timeseries)?;
    let t = ts.column("t");
    let u = ts.column("U");
    let labels = ts.text_column("stroke_label");
    // one series per stroke type so the strokes are distinguishable
    let mut by_label: Vec<Series> = Vec::new();
    let mut prev: Option<&str> = None;
    for ((ti, ui), label) in t.iter().zip(&u).zip(&labels) {
        let idx = match by_label.iter().position(|s| s.name == *label) {
            Some(i) => i,
            None => {
                by_label.push(Series {
                    name: label.clone(),
                    points: Vec::new(),
                });
                by_label.len() - 1
            }
        };
        if prev.is_some_and(|p| p != label) {
            by_label[idx].points.push((f64::NAN, f64::NAN));
        }
        by_label[idx].points.push((*ti, *ui));
        prev = Some(label);
    }
    let energy = LineChart {
        title: "Internal energy".into(),
        x_label: "t (2π/ω_c)".into(),
        y_label: "U (ħω_c)".into(),
        series: by_label,
    };

    let cy = CsvTable::read(cycles)?;
    let n = cy.column("cycle");
    let per_cycle = |col: &str, title: &str, y: &str| LineChart {
        title: title.into(),
        x_label: "cycle N".into(),
        y_label: y.into(),
        series: vec![Series {
            name: col.into(),
            points: n.iter().copied().zip(cy.column(col)).collect(),
        }],
    };
    Ok(vec![
        ("energy".into(), energy),
        (
            "efficiency".into(),
            per_cycle("efficiency", "Efficiency per cycle", "η"),
        ),
        ("power".into(), per_cycle("power", "Power per cycle", "P_W")),
    ])
}

/// Efficiency against power, one series per hot temperature, from `sweep.csv`.
pub fn sweep_chart(sweep: &Path) -> Result<LineChart> {
    let table = CsvTable::read(sweep)?;
    let t_h = table.text_column("T_h");
    let eff = table.column("efficiency");
    let power = table.column("power");
    let mut series: Vec<Series> = Vec::new();
    for ((t, e), p) in t_h.iter().zip(eff).zip(power) {
        let name = format!("T_h = {t}");
        match series.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push((p, e)),
            None => series.push(Series {
                name,
                points: vec![(p, e)],
            }),
        }
    }
    Ok(LineChart {
        title: "Efficiency versus power".into(),
        x_label: "P_W".into(),
        y_label: "η".into(),
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(160.0), "160.000000000");
        assert_eq!(format_number(-0.0039015703582), "-0.00390157035820");
        assert_eq!(format_number(1.5e-20), "1.50000000000e-20");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn chart_renders_every_series() {
        let chart = LineChart {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![
                Series {
                    name: "one".into(),
                    points: vec![(0.0, 1.0), (1.0, 2.0)],
                },
                Series {
                    name: "two".into(),
                    points: vec![(0.0, 0.0), (f64::NAN, f64::NAN), (1.0, 3.0)],
                },
            ],
        };
        let svg = chart.to_svg();
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains("a &lt; b"));
        let dat = chart.to_dat();
        assert!(dat.contains("# two"));
        assert_eq!(dat.matches("\n\n\n").count(), 1);
    }
}
