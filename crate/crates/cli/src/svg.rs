//! Static SVG 1.1 figure of the walls crossed by a run. Floating point is
//! used for drawing only.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use num_traits::ToPrimitive;
use sphcoh::walls::{WallCircle, WallShape};
use sphcoh::Surface;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 40.0;

enum Arc {
    Circle { c: f64, r: f64 },
    Line { s: f64 },
}

fn arcs(walls: &[WallCircle]) -> Vec<(Arc, &WallCircle)> {
    walls
        .iter()
        .filter_map(|w| match &w.shape {
            WallShape::Semicircle { center, radius_sq } => {
                let r = radius_sq.to_f64()?.max(0.0).sqrt();
                Some((Arc::Circle { c: center.to_f64()?, r }, w))
            }
            WallShape::Vertical { s0 } => Some((Arc::Line { s: s0.to_f64()? }, w)),
            WallShape::Empty => None,
        })
        .collect()
}

/// The figure as a string: one `path` per wall, labeled by its pair, and
/// the Brill-Noether point `(0, 1/sqrt(n))`.
pub fn walls_svg(x: &Surface, walls: &[WallCircle]) -> String {
    let bn_t = 1.0 / x.n().to_f64().unwrap_or(f64::INFINITY).sqrt();
    let arcs = arcs(walls);
    let (mut smin, mut smax, mut tmax) = (-bn_t, bn_t, bn_t);
    for (a, _) in &arcs {
        match *a {
            Arc::Circle { c, r } => {
                smin = smin.min(c - r);
                smax = smax.max(c + r);
                tmax = tmax.max(r);
            }
            Arc::Line { s } => {
                smin = smin.min(s);
                smax = smax.max(s);
            }
        }
    }
    tmax *= 1.1;
    let scale = ((WIDTH - 2.0 * MARGIN) / (smax - smin)).min((HEIGHT - 2.0 * MARGIN) / tmax);
    let px = |s: f64| MARGIN + (s - smin) * scale;
    let py = |t: f64| HEIGHT - MARGIN - t * scale;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"gray\"/>",
        MARGIN,
        py(0.0),
        WIDTH - MARGIN,
        py(0.0)
    );
    for (a, w) in &arcs {
        let label = format!("{} {}", w.pair.0, w.pair.1);
        let (d, lx, ly) = match *a {
            Arc::Circle { c, r } => (
                format!(
                    "M {:.3} {:.3} A {:.3} {:.3} 0 0 1 {:.3} {:.3}",
                    px(c - r),
                    py(0.0),
                    r * scale,
                    r * scale,
                    px(c + r),
                    py(0.0)
                ),
                px(c),
                py(r) - 4.0,
            ),
            Arc::Line { s } => {
                (format!("M {:.3} {:.3} L {:.3} {:.3}", px(s), py(0.0), px(s), py(tmax)), px(s), py(tmax) - 4.0)
            }
        };
        let _ = writeln!(out, "<path class=\"wall\" d=\"{d}\" fill=\"none\" stroke=\"black\"/>");
        let _ =
            writeln!(out, "<text x=\"{lx:.3}\" y=\"{ly:.3}\" font-size=\"10\" text-anchor=\"middle\">{label}</text>");
    }
    let _ = writeln!(out, "<circle class=\"bn\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"red\"/>", px(0.0), py(bn_t));
    let _ = writeln!(out, "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"10\">BN</text>", px(0.0) + 5.0, py(bn_t));
    out.push_str("</svg>\n");
    out
}

pub fn emit_walls_svg(x: &Surface, walls: &[WallCircle], path: &Path) -> io::Result<()> {
    std::fs::write(path, walls_svg(x, walls))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sphcoh::walls::numerical_wall;
    use sphcoh::MukaiVector;

    #[test]
    fn one_path_per_wall() {
        let x = Surface::new(1).unwrap();
        let w = numerical_wall(&x, &MukaiVector::new(2, 3, 5), &MukaiVector::new(1, 1, 2)).unwrap();
        let svg = walls_svg(&x, &[w.clone(), w]);
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(walls_svg(&x, &[]).matches("<path").count(), 0);
    }
}
