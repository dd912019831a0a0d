//! CSV and SVG input/output for polylines.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::vec::PlaneVec;

/// Shortest representation that still round-trips: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,x,y` header and one row per vertex.
pub fn polyline_csv(params: &[f64], points: &[PlaneVec]) -> String {
    assert_eq!(params.len(), points.len());
    let mut out = String::with_capacity(64 * points.len() + 8);
    out.push_str("t,x,y\n");
    for (t, p) in params.iter().zip(points) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(p.x), fmt_f64(p.y));
    }
    out
}

/// Reads a `t,x,y` polyline as written by [`polyline_csv`].
pub fn read_polyline_csv(path: &Path) -> Result<(Vec<f64>, Vec<PlaneVec>)> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(1, e.to_string()))?;
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["t", "x", "y"] {
        return Err(parse_err(
            1,
            format!(
                "expected header t,x,y, got {:?}",
                header.iter().collect::<Vec<_>>()
            ),
        ));
    }
    let (mut params, mut points) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut vals = [0.0; 3];
        for (v, field) in vals.iter_mut().zip(rec.iter()) {
            *v = field
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| {
                    parse_err(line, format!("cannot parse {field:?} as a finite number"))
                })?;
        }
        params.push(vals[0]);
        points.push(PlaneVec::new(vals[1], vals[2]));
    }
    Ok((params, points))
}

/// A single polyline, y axis pointing up, view box fitted to the bounding
/// box with a 5% margin and a stroke of 0.002 box diagonals.
pub fn polyline_svg(points: &[PlaneVec]) -> String {
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    if points.is_empty() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let mut diag = (x1 - x0).hypot(y1 - y0);
    if diag == 0.0 {
        diag = 1.0;
    }
    let mx = 0.05 * (x1 - x0).max(diag * 1e-3);
    let my = 0.05 * (y1 - y0).max(diag * 1e-3);
    let (vx, vy) = (x0 - mx, -(y1 + my));
    let (vw, vh) = (x1 - x0 + 2.0 * mx, y1 - y0 + 2.0 * my);
    let mut pts = String::with_capacity(40 * points.len());
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{},{}", p.x, -p.y);
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vx} {vy} {vw} {vh}\">\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-linejoin=\"round\" points=\"{pts}\"/>\n\
         </svg>\n",
        0.002 * diag
    )
}
