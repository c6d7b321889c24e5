//! Hand-emitted deterministic SVG figures.
//!
//! No plotting dependency: a fixed header, six-decimal coordinates, and a
//! fixed palette make the output byte-stable for golden comparisons.  The
//! figure shows the sample hull (filled), the clipped `Pi` outline, an
//! optional identified-region overlay, and the sample points, with a
//! legend carrying the polygon areas.

use crate::polyhedra::VPolytope;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 40.0;
const COLOR_CONV: &str = "#4c72b0";
const COLOR_PI: &str = "#c44e52";
const COLOR_IDENT: &str = "#55a868";
const COLOR_SAMPLE: &str = "#2a2a2a";

/// Everything one figure needs.
#[derive(Debug, Clone)]
pub struct PlotInput<'a> {
    /// Clip box `[x0, y0, x1, y1]`; also the drawing window.
    pub clip: [f64; 4],
    pub conv: &'a VPolytope,
    /// Vertices of `Pi` intersected with the clip box (CCW).
    pub pi_clipped: &'a [Vec<f64>],
    pub samples: &'a [Vec<f64>],
    pub ident: Option<&'a VPolytope>,
    pub conv_area: f64,
    pub pi_clipped_area: f64,
    pub ident_area: Option<f64>,
}

struct Mapper {
    clip: [f64; 4],
}

impl Mapper {
    fn map(&self, p: &[f64]) -> (f64, f64) {
        let w = self.clip[2] - self.clip[0];
        let h = self.clip[3] - self.clip[1];
        let x = MARGIN + (p[0] - self.clip[0]) / w * (WIDTH - 2.0 * MARGIN);
        let y = HEIGHT - MARGIN - (p[1] - self.clip[1]) / h * (HEIGHT - 2.0 * MARGIN);
        (x, y)
    }
}

fn polygon_path(m: &Mapper, verts: &[Vec<f64>]) -> String {
    let mut d = String::new();
    for (i, v) in verts.iter().enumerate() {
        let (x, y) = m.map(v);
        if i == 0 {
            d.push_str(&format!("M {x:.6} {y:.6}"));
        } else {
            d.push_str(&format!(" L {x:.6} {y:.6}"));
        }
    }
    d.push_str(" Z");
    d
}

/// Render the figure; identical inputs produce identical bytes.
pub fn render_svg(input: &PlotInput<'_>) -> String {
    let m = Mapper { clip: input.clip };
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");

    // Pi (clipped): outline with a faint fill so the gap region reads.
    if input.pi_clipped.len() >= 3 {
        s.push_str(&format!(
            "<path d=\"{}\" fill=\"{COLOR_PI}\" fill-opacity=\"0.08\" stroke=\"{COLOR_PI}\" \
             stroke-width=\"2\"/>\n",
            polygon_path(&m, input.pi_clipped)
        ));
    }
    // Identified region overlay.
    if let Some(ident) = input.ident {
        if ident.num_vertices() >= 3 {
            s.push_str(&format!(
                "<path d=\"{}\" fill=\"{COLOR_IDENT}\" fill-opacity=\"0.25\" \
                 stroke=\"{COLOR_IDENT}\" stroke-width=\"1.5\"/>\n",
                polygon_path(&m, &ident.vertices)
            ));
        }
    }
    // Sample hull.
    if input.conv.num_vertices() >= 3 {
        s.push_str(&format!(
            "<path d=\"{}\" fill=\"{COLOR_CONV}\" fill-opacity=\"0.35\" stroke=\"{COLOR_CONV}\" \
             stroke-width=\"1.5\"/>\n",
            polygon_path(&m, &input.conv.vertices)
        ));
    }
    // Samples.
    for p in input.samples {
        let (x, y) = m.map(p);
        if (MARGIN..=WIDTH - MARGIN).contains(&x) && (MARGIN..=HEIGHT - MARGIN).contains(&y) {
            s.push_str(&format!(
                "<circle cx=\"{x:.6}\" cy=\"{y:.6}\" r=\"2.5\" fill=\"{COLOR_SAMPLE}\"/>\n"
            ));
        }
    }

    // Legend.
    let mut legend: Vec<(String, &str)> = vec![
        (format!("Conv(samples), area {:.6}", input.conv_area), COLOR_CONV),
        (
            format!("Pi clipped, area {:.6}", input.pi_clipped_area),
            COLOR_PI,
        ),
    ];
    if let Some(a) = input.ident_area {
        legend.push((format!("identified region, area {a:.6}"), COLOR_IDENT));
    }
    for (i, (label, color)) in legend.iter().enumerate() {
        let y = MARGIN + 18.0 * i as f64;
        s.push_str(&format!(
            "<rect x=\"{:.6}\" y=\"{:.6}\" width=\"12\" height=\"12\" fill=\"{color}\" \
             fill-opacity=\"0.6\"/>\n",
            MARGIN,
            y - 10.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.6}\" y=\"{:.6}\" font-family=\"monospace\" font-size=\"13\">{label}</text>\n",
            MARGIN + 18.0,
            y
        ));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::convex_hull_2d;

    #[test]
    fn svg_is_byte_stable() {
        let conv = convex_hull_2d(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let pi = conv.vertices.clone();
        let samples = vec![vec![0.2, 0.3], vec![0.8, 0.6]];
        let input = PlotInput {
            clip: [-0.5, -0.5, 1.5, 1.5],
            conv: &conv,
            pi_clipped: &pi,
            samples: &samples,
            ident: None,
            conv_area: 1.0,
            pi_clipped_area: 1.0,
            ident_area: None,
        };
        let a = render_svg(&input);
        let b = render_svg(&input);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("area 1.000000"));
        assert_eq!(a.matches("<circle").count(), 2);
    }
}
