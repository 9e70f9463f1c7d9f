//! Curve plotting: CSV samples plus a self-contained SVG overlay.
//!
//! The SVG is hand-rolled (inline styles, no fonts or scripts) so plots are
//! dependency-free and diffable in tests. Axis labels are cosmetic; the CSV
//! carries the full-precision values.

use crate::curves::{
    price_allocative, sample_grid, AllocativeParams, CurveError, LinearBondingCurve,
};
use crate::numeric::Dec;

/// What to draw over `[0, s_max]`.
#[derive(Debug, Clone)]
pub enum CurveSelection {
    /// The bare bonding curve only.
    Bonding,
    /// The bonding curve overlaid with one allocative curve per (a, τ) pair.
    Allocative { assessments: Vec<Dec>, taus: Vec<Dec> },
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub k: Dec,
    pub curve: CurveSelection,
    pub s_max: Dec,
    pub samples: u32,
    /// Output path prefix: `<out>.csv` and `<out>.svg`.
    pub out: std::path::PathBuf,
}

/// One sampled curve plus its asymptote guide (allocative curves only).
pub struct PlotSeries {
    pub label: String,
    pub values: Vec<Dec>,
    pub asymptote: Option<Dec>,
}

pub struct PlotData {
    pub grid: Vec<Dec>,
    pub series: Vec<PlotSeries>,
}

/// Samples every selected curve on a shared grid. The first series is always
/// the bonding curve.
pub fn sample_curves(spec: &PlotSpec) -> Result<PlotData, CurveError> {
    let curve = LinearBondingCurve::new(spec.k)?;
    let grid = sample_grid(spec.s_max, spec.samples)?;
    let mut series = Vec::new();

    let mut p_values = Vec::with_capacity(grid.len());
    for &s in &grid {
        p_values.push(curve.price(s)?);
    }
    series.push(PlotSeries {
        label: format!("p(k={})", trim(spec.k)),
        values: p_values,
        asymptote: None,
    });

    if let CurveSelection::Allocative { assessments, taus } = &spec.curve {
        for &a in assessments {
            for &tau in taus {
                let params = AllocativeParams::new(a, tau)?;
                let mut values = Vec::with_capacity(grid.len());
                for &s in &grid {
                    values.push(price_allocative(&curve, &params, s)?);
                }
                series.push(PlotSeries {
                    label: format!("q(a={};tau={})", trim(a), trim(tau)),
                    values,
                    asymptote: Some(crate::curves::allocative_sup(&params)),
                });
            }
        }
    }
    Ok(PlotData { grid, series })
}

/// CSV: one row per grid point, full-precision decimals.
pub fn plot_csv(data: &PlotData) -> String {
    let mut out = String::from("s");
    for s in &data.series {
        out.push(',');
        out.push_str(&s.label);
    }
    out.push('\n');
    for (i, s) in data.grid.iter().enumerate() {
        out.push_str(&s.to_string());
        for series in &data.series {
            out.push(',');
            out.push_str(&series.values[i].to_string());
        }
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 6] = ["#2b6cb0", "#c53030", "#2f855a", "#b7791f", "#6b46c1", "#97266d"];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn trim(v: Dec) -> String {
    let s = v.to_string();
    let trimmed = s.trim_end_matches('0');
    let trimmed = trimmed.strip_suffix('.').unwrap_or(trimmed);
    trimmed.to_string()
}

fn axis_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 1e6 || v.abs() < 1e-3 {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

/// Self-contained SVG: axes, the sampled polylines, and dashed horizontal
/// guides at each allocative asymptote `a + (1−τ)/τ`.
pub fn plot_svg(data: &PlotData, title: &str) -> String {
    let x_max = data.grid.last().map(|v| v.to_f64()).unwrap_or(1.0).max(1e-18);
    let mut y_max = 0.0f64;
    for s in &data.series {
        for v in &s.values {
            y_max = y_max.max(v.to_f64());
        }
        if let Some(a) = s.asymptote {
            y_max = y_max.max(a.to_f64());
        }
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    y_max *= 1.05;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_x = |v: f64| MARGIN_LEFT + v / x_max * plot_w;
    let to_y = |v: f64| MARGIN_TOP + (1.0 - v / y_max) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    ));

    // axes
    svg.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM,
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">share supply</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.2})\">price</text>\n",
        MARGIN_TOP + plot_h / 2.0
    ));

    // ticks
    for i in 0..=4 {
        let fx = i as f64 / 4.0;
        let xv = fx * x_max;
        let x = to_x(xv);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{b:.2}\" x2=\"{x:.2}\" y2=\"{b2:.2}\" stroke=\"black\"/>\n\
             <text x=\"{x:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"middle\">{label}</text>\n",
            b = HEIGHT - MARGIN_BOTTOM,
            b2 = HEIGHT - MARGIN_BOTTOM + 5.0,
            ty = HEIGHT - MARGIN_BOTTOM + 18.0,
            label = axis_label(xv),
        ));
        let yv = fx * y_max;
        let y = to_y(yv);
        svg.push_str(&format!(
            "<line x1=\"{l2:.2}\" y1=\"{y:.2}\" x2=\"{l:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\n\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"end\">{label}</text>\n",
            l = MARGIN_LEFT,
            l2 = MARGIN_LEFT - 5.0,
            tx = MARGIN_LEFT - 8.0,
            ty = y + 3.0,
            label = axis_label(yv),
        ));
    }

    // asymptote guides
    for (idx, s) in data.series.iter().enumerate() {
        if let Some(sup) = s.asymptote {
            let v = sup.to_f64();
            if v <= y_max {
                let y = to_y(v);
                let color = PALETTE[idx % PALETTE.len()];
                svg.push_str(&format!(
                    "<line x1=\"{l:.2}\" y1=\"{y:.2}\" x2=\"{r:.2}\" y2=\"{y:.2}\" \
                     stroke=\"{color}\" stroke-dasharray=\"6,4\" opacity=\"0.6\"/>\n\
                     <text x=\"{r:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
                     text-anchor=\"end\" fill=\"{color}\">sup {label}</text>\n",
                    l = MARGIN_LEFT,
                    r = WIDTH - MARGIN_RIGHT,
                    ty = y - 4.0,
                    label = axis_label(v),
                ));
            }
        }
    }

    // curves
    for (idx, s) in data.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut points = String::new();
        for (i, v) in s.values.iter().enumerate() {
            let x = to_x(data.grid[i].to_f64());
            let y = to_y(v.to_f64().min(y_max));
            points.push_str(&format!("{x:.2},{y:.2} "));
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            points.trim_end()
        ));
        // legend entry
        let ly = MARGIN_TOP + 16.0 * idx as f64 + 10.0;
        svg.push_str(&format!(
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{lx2:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\" font-family=\"sans-serif\" \
             font-size=\"11\">{label}</text>\n",
            lx = MARGIN_LEFT + 10.0,
            lx2 = MARGIN_LEFT + 34.0,
            tx = MARGIN_LEFT + 40.0,
            ty = ly + 4.0,
            label = s.label,
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> Dec {
        s.parse().unwrap()
    }

    fn spec(k: &str, a: &[&str], tau: &[&str], s_max: &str, samples: u32) -> PlotSpec {
        PlotSpec {
            k: dec(k),
            curve: CurveSelection::Allocative {
                assessments: a.iter().map(|v| dec(v)).collect(),
                taus: tau.iter().map(|v| dec(v)).collect(),
            },
            s_max: dec(s_max),
            samples,
            out: "unused".into(),
        }
    }

    #[test]
    fn allocative_samples_stay_below_asymptote() {
        let data = sample_curves(&spec("1", &["2"], &["0.55"], "50", 200)).unwrap();
        let q = &data.series[1];
        let sup = q.asymptote.unwrap();
        for v in &q.values {
            assert!(*v < sup, "sample {v} not below sup {sup}");
        }
    }

    #[test]
    fn higher_tax_pulls_curve_down_where_price_exceeds_assessment() {
        // ∂q/∂τ < 0 exactly where p(s) > a−1; sample the tail region.
        let data = sample_curves(&spec("1", &["2"], &["0.2", "0.4", "0.9"], "10", 101)).unwrap();
        let q_02 = &data.series[1].values;
        let q_04 = &data.series[2].values;
        let q_09 = &data.series[3].values;
        for (i, s) in data.grid.iter().enumerate() {
            if data.series[0].values[i] > dec("1") {
                assert!(q_04[i] < q_02[i], "τ=0.4 not below τ=0.2 at s={s}");
                assert!(q_09[i] < q_04[i], "τ=0.9 not below τ=0.4 at s={s}");
            }
        }
    }

    #[test]
    fn two_samples_draw_a_segment() {
        let data = sample_curves(&spec("1", &["2"], &["0.5"], "4", 2)).unwrap();
        assert_eq!(data.grid.len(), 2);
        let svg = plot_svg(&data, "degenerate");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn csv_has_one_column_per_series() {
        let data = sample_curves(&spec("0.4", &["2", "1"], &["0.7"], "5", 3)).unwrap();
        let csv = plot_csv(&data);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 4); // s, p, q, q
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn svg_is_self_contained_and_deterministic() {
        let s = spec("1", &["2"], &["0.5"], "10", 16);
        let a = plot_svg(&sample_curves(&s).unwrap(), "t");
        let b = plot_svg(&sample_curves(&s).unwrap(), "t");
        assert_eq!(a, b);
        assert!(!a.contains("http://") || a.starts_with("<svg xmlns"));
        assert!(!a.contains("<script"));
        assert!(a.contains("stroke-dasharray")); // asymptote guide present
    }
}
