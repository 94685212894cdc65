//! Minimal self-contained SVG line plots for sweep and analysis output.

use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 62.0;
const PALETTE: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1e4 || a < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn from_values(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if v.is_finite() && (!log || v > 0.0) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = if log { 0.1 } else { 0.0 };
            hi = 1.0;
        }
        if lo == hi {
            if log {
                lo /= 2.0;
                hi *= 2.0;
            } else {
                lo -= 1.0;
                hi += 1.0;
            }
        }
        Axis { lo, hi, log }
    }

    fn fraction(&self, v: f64) -> f64 {
        if self.log {
            (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            // Decade ticks; the slack absorbs log10 rounding at exact powers.
            let first = (self.lo.log10() - 1e-9).ceil() as i32;
            let last = (self.hi.log10() + 1e-9).floor() as i32;
            let mut t: Vec<f64> = (first..=last).map(|e| 10f64.powi(e)).collect();
            if t.is_empty() {
                t = vec![self.lo, self.hi];
            }
            t
        } else {
            (0..=5)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 5.0)
                .collect()
        }
    }
}

/// Renders the plot as a standalone SVG document.
pub fn render_svg(spec: &PlotSpec, series: &[Series]) -> String {
    let x_axis = Axis::from_values(
        series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
        spec.log_x,
    );
    let y_axis = Axis::from_values(
        series.iter().flat_map(|s| s.points.iter().map(|p| p.1)),
        spec.log_y,
    );
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |v: f64| MARGIN_LEFT + x_axis.fraction(v) * plot_w;
    let py = |v: f64| MARGIN_TOP + (1.0 - y_axis.fraction(v)) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">{}</text>\n",
        WIDTH / 2.0,
        escape(&spec.title)
    ));

    // Frame.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333\"/>\n"
    ));

    for t in x_axis.ticks() {
        let x = px(t);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#333\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 6.0
        ));
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{MARGIN_TOP}\" x2=\"{x}\" y2=\"{}\" \
             stroke=\"#ddd\" stroke-dasharray=\"3,4\"/>\n",
            MARGIN_TOP + plot_h
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
            MARGIN_TOP + plot_h + 22.0,
            tick_label(t)
        ));
    }
    for t in y_axis.ticks() {
        let y = py(t);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{MARGIN_LEFT}\" y2=\"{y}\" stroke=\"#333\"/>\n",
            MARGIN_LEFT - 6.0
        ));
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" \
             stroke=\"#ddd\" stroke-dasharray=\"3,4\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"12\">{}</text>\n",
            MARGIN_LEFT - 10.0,
            y + 4.0,
            tick_label(t)
        ));
    }

    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(&spec.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" \
         transform=\"rotate(-90 20 {})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&spec.y_label)
    ));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| {
                x.is_finite() && y.is_finite() && (!spec.log_x || *x > 0.0) && (!spec.log_y || *y > 0.0)
            })
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        if pts.len() > 1 {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                pts.join(" ")
            ));
        }
        for p in &pts {
            let (x, y) = p.split_once(',').unwrap();
            svg.push_str(&format!(
                "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{color}\"/>\n"
            ));
        }
    }

    if series.len() > 1 {
        let lx = MARGIN_LEFT + plot_w - 220.0;
        let mut ly = MARGIN_TOP + 14.0;
        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            svg.push_str(&format!(
                "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
                 stroke-width=\"2\"/>\n",
                lx + 26.0
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
                lx + 32.0,
                ly + 4.0,
                escape(&s.label)
            ));
            ly += 18.0;
        }
    }

    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(path: &Path, spec: &PlotSpec, series: &[Series]) -> Result<()> {
    std::fs::write(path, render_svg(spec, series))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_spec() -> PlotSpec {
        PlotSpec {
            title: "gain vs angle".to_string(),
            x_label: "surface angle (deg)".to_string(),
            y_label: "mean wall collisions".to_string(),
            log_x: false,
            log_y: false,
        }
    }

    #[test]
    fn svg_contains_axes_series_and_legend() {
        let series = vec![
            Series {
                label: "cosine_law".to_string(),
                points: vec![(10.0, 5.5), (45.0, 1.4), (90.0, 1.0)],
            },
            Series {
                label: "isotropic_half_space".to_string(),
                points: vec![(10.0, 4.0), (45.0, 1.3), (90.0, 1.0)],
            },
        ];
        let svg = render_svg(&demo_spec(), &series);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("surface angle (deg)"));
        assert!(svg.contains("mean wall collisions"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("cosine_law"));
        assert!(svg.contains("isotropic_half_space"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn log_axis_uses_decade_ticks() {
        let series = vec![Series {
            label: "capture".to_string(),
            points: vec![(1e-4, 5.5), (1e-2, 5.0), (1.0, 2.0)],
        }];
        let spec = PlotSpec {
            title: "capture vs sticking".to_string(),
            x_label: "sticking probability".to_string(),
            y_label: "gain".to_string(),
            log_x: true,
            log_y: false,
        };
        let svg = render_svg(&spec, &series);
        assert!(svg.contains("1.0e-4"));
        assert!(svg.contains("0.01"));
        // Single series: no legend entries.
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn degenerate_ranges_do_not_break_rendering() {
        let series = vec![Series { label: "one".into(), points: vec![(2.0, 3.0)] }];
        let svg = render_svg(&demo_spec(), &series);
        assert!(svg.contains("<circle"));
        let empty: Vec<Series> = Vec::new();
        let svg2 = render_svg(&demo_spec(), &empty);
        assert!(svg2.starts_with("<svg"));
    }
}
