//! CSV time series and SVG line plots.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::engine::SimLog;
use crate::error::{Error, Result};

/// Numeric table with named columns, as written to and read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Number of followers implied by the `f<k>_x` columns.
    pub fn follower_count(&self) -> usize {
        (1..).take_while(|k| self.column_index(&format!("f{k}_x")).is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, x) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{x:.8e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for Table {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty CSV".into(),
        })?;
        let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if row.len() != header.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {} fields, found {}", header.len(), row.len()),
                });
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];

/// Flatten a log and its diagnostics into one row per logged sample.
pub fn log_table(log: &SimLog) -> Table {
    let (n, p) = (log.n, log.p);
    let axes = |prefix: &str, h: &mut Vec<String>| {
        for a in 0..p {
            h.push(format!("{prefix}{}", AXES.get(a).map_or_else(|| a.to_string(), |s| s.to_string())));
        }
    };
    let mut header = vec!["t".to_string()];
    axes("leader_", &mut header);
    axes("leader_v", &mut header);
    let first = &log.samples[0];
    for (i, f) in first.followers.iter().enumerate() {
        let k = i + 1;
        axes(&format!("f{k}_"), &mut header);
        axes(&format!("f{k}_v"), &mut header);
        axes(&format!("f{k}_est_v"), &mut header);
        for j in 0..f.ctrl.theta_hat.len() {
            header.push(format!("f{k}_theta{j}"));
        }
        for slot in 0..f.ctrl.alpha.len() {
            header.push(format!("f{k}_alpha{slot}"));
        }
        header.push(format!("f{k}_beta"));
    }
    header.extend(["V1", "V_est", "V2", "V3", "V"].map(String::from));
    for k in 1..=n {
        header.push(format!("verr{k}"));
    }
    header.extend(["min_dist", "max_connected_dist", "lambda_min_h", "edge_count"].map(String::from));

    let d = &log.diagnostics;
    let rows = log
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut row = Vec::with_capacity(header.len());
            row.push(s.t);
            row.extend(s.leader_q.iter());
            row.extend(s.leader_qd.iter());
            for f in &s.followers {
                row.extend(f.q.iter());
                row.extend(f.qd.iter());
                row.extend(f.ctrl.v.iter());
                row.extend(f.ctrl.theta_hat.iter());
                row.extend(f.ctrl.alpha.iter());
                row.push(f.ctrl.beta);
            }
            row.extend([d.v1[k], d.v_est[k], d.v2[k], d.v3[k], d.total[k]]);
            row.extend(d.velocity_errors[k].iter());
            row.extend([
                d.min_distance[k],
                d.max_connected_distance[k],
                d.lambda_min_h[k],
                d.edge_count[k] as f64,
            ]);
            row
        })
        .collect();
    Table { header, rows }
}

pub fn emit_csv(log: &SimLog, path: &Path) -> Result<()> {
    std::fs::write(path, log_table(log).to_csv()).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Table> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    TrajectoryXy,
    VelocityError,
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "trajectory_xy" => Ok(PlotKind::TrajectoryXy),
            "velocity_error" => Ok(PlotKind::VelocityError),
            other => Err(format!("unknown plot kind `{other}` (trajectory_xy, velocity_error)")),
        }
    }
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::TrajectoryXy => "trajectory_xy",
            PlotKind::VelocityError => "velocity_error",
        }
    }
}

pub fn emit_plot(log: &SimLog, path: &Path, kind: PlotKind) -> Result<()> {
    let svg = plot_table(&log_table(log), kind, log.radius)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Render an SVG from a table produced by [`log_table`]. `radius` selects the
/// initial edges overlaid on trajectory plots.
pub fn plot_table(table: &Table, kind: PlotKind, radius: f64) -> Result<String> {
    let col = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| Error::Config(format!("log has no `{name}` column")))
    };
    let n = table.follower_count();
    let mut plot = Plot::default();
    match kind {
        PlotKind::TrajectoryXy => {
            plot.title = "Planar trajectories".into();
            plot.x_label = "x (m)".into();
            plot.y_label = "y (m)".into();
            plot.equal_aspect = true;
            let lx = col("leader_x")?;
            let ly = col("leader_y")?;
            let z0 = |name: &str| table.column(name).map_or(0.0, |z| z[0]);
            let mut starts = vec![(lx[0], ly[0], z0("leader_z"))];
            let mut series = Vec::new();
            for k in 1..=n {
                let (x, y) = (col(&format!("f{k}_x"))?, col(&format!("f{k}_y"))?);
                starts.push((x[0], y[0], z0(&format!("f{k}_z"))));
                series.push(Series::new(format!("follower {k}"), x, y, PALETTE[(k - 1) % PALETTE.len()]));
            }
            for a in 0..starts.len() {
                for b in (a + 1)..starts.len() {
                    let (pa, pb) = (starts[a], starts[b]);
                    let d2 = (pa.0 - pb.0).powi(2) + (pa.1 - pb.1).powi(2) + (pa.2 - pb.2).powi(2);
                    if d2.sqrt() < radius {
                        plot.segments.push(((pa.0, pa.1), (pb.0, pb.1)));
                    }
                }
            }
            let mut leader = Series::new("leader".into(), lx, ly, "#000000");
            leader.width = 2.5;
            leader.dash = true;
            leader.square_marker = true;
            series.push(leader);
            plot.series = series;
        }
        PlotKind::VelocityError => {
            plot.title = "Velocity error to leader".into();
            plot.x_label = "t (s)".into();
            plot.y_label = "|v_i - v_0| (m/s)".into();
            plot.y_from_zero = true;
            let t = col("t")?;
            for k in 1..=n {
                plot.series.push(Series::new(
                    format!("follower {k}"),
                    t.clone(),
                    col(&format!("verr{k}"))?,
                    PALETTE[(k - 1) % PALETTE.len()],
                ));
            }
        }
    }
    Ok(plot.render())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Series {
    label: String,
    x: Vec<f64>,
    y: Vec<f64>,
    color: &'static str,
    width: f64,
    dash: bool,
    square_marker: bool,
}

impl Series {
    fn new(label: String, x: Vec<f64>, y: Vec<f64>, color: &'static str) -> Self {
        Self {
            label,
            x,
            y,
            color,
            width: 1.5,
            dash: false,
            square_marker: false,
        }
    }
}

#[derive(Default)]
struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
    segments: Vec<((f64, f64), (f64, f64))>,
    equal_aspect: bool,
    y_from_zero: bool,
}

const W: f64 = 720.0;
const H: f64 = 540.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-9 * step { 0.0 } else { t });
        t += step;
    }
    out
}

impl Plot {
    fn render(&self) -> String {
        let all_x = self.series.iter().flat_map(|s| s.x.iter().copied());
        let all_y = self.series.iter().flat_map(|s| s.y.iter().copied());
        let (mut x0, mut x1) = bounds(all_x);
        let (mut y0, mut y1) = bounds(all_y);
        if self.y_from_zero {
            y0 = 0.0;
        }
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        if self.equal_aspect {
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            (x0, x1) = (cx - 0.5 * scale * pw, cx + 0.5 * scale * pw);
            (y0, y1) = (cy - 0.5 * scale * ph, cy + 0.5 * scale * ph);
        }
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        )
        .unwrap();
        for t in ticks(x0, x1) {
            let x = sx(t);
            writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e6e6e6"/>"##, TOP + ph).unwrap();
            writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, fmt_tick(t)).unwrap();
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e6e6e6"/>"##, LEFT + pw).unwrap();
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, fmt_tick(t)).unwrap();
        }
        writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 18.0, escape(&self.x_label)).unwrap();
        writeln!(
            s,
            r#"<text transform="translate(22 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        )
        .unwrap();

        for ((ax, ay), (bx, by)) in &self.segments {
            writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="2 3"/>"##,
                sx(*ax),
                sy(*ay),
                sx(*bx),
                sy(*by)
            )
            .unwrap();
        }

        for ser in &self.series {
            let pts: Vec<(f64, f64)> = ser
                .x
                .iter()
                .zip(&ser.y)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| (sx(*x), sy(*y)))
                .collect();
            if pts.len() > 1 {
                let mut d = String::new();
                for (k, (x, y)) in pts.iter().enumerate() {
                    write!(d, "{}{x:.2},{y:.2}", if k == 0 { "" } else { " " }).unwrap();
                }
                let dash = if ser.dash { r#" stroke-dasharray="8 4""# } else { "" };
                writeln!(
                    s,
                    r#"<polyline points="{d}" fill="none" stroke="{}" stroke-width="{}"{dash}/>"#,
                    ser.color, ser.width
                )
                .unwrap();
            }
            // start marker always; a lone sample shows only its marker
            if let Some(&(x, y)) = pts.first() {
                marker(&mut s, x, y, ser);
            }
            if pts.len() > 1 && ser.square_marker {
                let &(x, y) = pts.last().unwrap();
                marker(&mut s, x, y, ser);
            }
        }

        for (k, ser) in self.series.iter().enumerate() {
            let y = TOP + 14.0 + 20.0 * k as f64;
            let x = LEFT + pw + 14.0;
            let dash = if ser.dash { r#" stroke-dasharray="8 4""# } else { "" };
            writeln!(
                s,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="{}"{dash}/>"#,
                x + 24.0,
                ser.color,
                ser.width
            )
            .unwrap();
            writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 30.0, y + 4.0, escape(&ser.label)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn marker(s: &mut String, x: f64, y: f64, ser: &Series) {
    if ser.square_marker {
        writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="9" height="9" fill="{}"/>"#, x - 4.5, y - 4.5, ser.color).unwrap();
    } else {
        writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}"/>"#, ser.color).unwrap();
    }
}

fn fmt_tick(t: f64) -> String {
    if t == 0.0 {
        "0".into()
    } else if t.abs() >= 1e4 || t.abs() < 1e-3 {
        format!("{t:.1e}")
    } else {
        let s = format!("{t:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_nine_digits() {
        let t = Table {
            header: vec!["t".into(), "a".into()],
            rows: vec![vec![0.0, std::f64::consts::PI], vec![0.1, -1.234_567_891_23e-7]],
        };
        let text = t.to_csv();
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().next(), Some("t,a"));
        let back: Table = text.parse().unwrap();
        for (r, s) in t.rows.iter().zip(&back.rows) {
            for (a, b) in r.iter().zip(s) {
                assert!((a - b).abs() <= 5e-9 * a.abs(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let err = "t,a\n1,2\n3\n".parse::<Table>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 300.0), vec![0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0]);
        assert_eq!(ticks(-0.01, 0.26).first(), Some(&0.0));
    }

    #[test]
    fn single_point_plot_uses_markers() {
        let t = Table {
            header: ["t", "leader_x", "leader_y", "f1_x", "f1_y", "verr1"].map(String::from).to_vec(),
            rows: vec![vec![0.0, 0.0, 0.0, 50.0, 0.0, 0.3]],
        };
        for kind in [PlotKind::TrajectoryXy, PlotKind::VelocityError] {
            let svg = plot_table(&t, kind, 200.0).unwrap();
            assert!(!svg.contains("<polyline"));
            assert!(svg.contains("<circle"));
        }
        let svg = plot_table(&t, PlotKind::TrajectoryXy, 200.0).unwrap();
        assert_eq!(svg.matches("stroke-dasharray=\"2 3\"").count(), 1);
    }
}
