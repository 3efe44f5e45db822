//! Text formats for triangulations and reliefs.
//!
//! A triangulation file has two CSV sections, each introduced by a marker
//! line and followed by its own header:
//!
//! ```text
//! #points
//! px,py
//! 10.5,20
//! ...
//! #triangles
//! i,j,k
//! 0,1,2
//! ```

use super::{GeometryError, Point, ReliefSurface, Triangulation};
use crate::table::{parse_records, write_record};

const POINTS_MARKER: &str = "#points";
const TRIANGLES_MARKER: &str = "#triangles";

pub fn triangulation_csv(tri: &Triangulation) -> String {
    let mut out = String::new();
    out.push_str(POINTS_MARKER);
    out.push('\n');
    write_record(&mut out, &["px", "py"]);
    for p in tri.points() {
        write_record(&mut out, &[p.x.to_string(), p.y.to_string()]);
    }
    out.push_str(TRIANGLES_MARKER);
    out.push('\n');
    write_record(&mut out, &["i", "j", "k"]);
    for t in tri.triangles() {
        write_record(&mut out, &t.map(|v| v.to_string()));
    }
    out
}

pub fn parse_triangulation_csv(text: &str) -> Result<Triangulation, GeometryError> {
    let fmt = |m: String| GeometryError::Format(m);
    let records = parse_records(text).map_err(|e| fmt(e.to_string()))?;
    let mut lines = records.into_iter().enumerate().map(|(i, r)| (i + 1, r));

    let mut expect = |marker: &[&str]| -> Result<(), GeometryError> {
        match lines.next() {
            Some((_, r)) if r.iter().map(String::as_str).eq(marker.iter().copied()) => Ok(()),
            Some((line, r)) => Err(fmt(format!(
                "line {line}: expected `{}`, found `{}`",
                marker.join(","),
                r.join(",")
            ))),
            None => Err(fmt(format!("missing `{}`", marker.join(",")))),
        }
    };
    expect(&[POINTS_MARKER])?;
    expect(&["px", "py"])?;

    let mut points = Vec::new();
    let mut triangles = Vec::new();
    let mut in_triangles = false;
    let mut saw_triangle_header = false;
    for (line, r) in lines {
        if !in_triangles {
            if r.len() == 1 && r[0] == TRIANGLES_MARKER {
                in_triangles = true;
                continue;
            }
            let [x, y] = r.as_slice() else {
                return Err(fmt(format!("line {line}: expected px,py")));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| fmt(format!("line {line}: `{s}` is not a number")))
            };
            points.push(Point::new(parse(x)?, parse(y)?));
        } else if !saw_triangle_header {
            if !r.iter().map(String::as_str).eq(["i", "j", "k"]) {
                return Err(fmt(format!("line {line}: expected `i,j,k`")));
            }
            saw_triangle_header = true;
        } else {
            let idx: Result<Vec<usize>, _> = r.iter().map(|s| s.parse::<usize>()).collect();
            match idx.ok().as_deref() {
                Some(&[i, j, k]) => triangles.push([i, j, k]),
                _ => return Err(fmt(format!("line {line}: expected i,j,k vertex indices"))),
            }
        }
    }
    if !saw_triangle_header {
        return Err(fmt(format!("missing `{TRIANGLES_MARKER}` section")));
    }
    Triangulation::new(points, triangles)
}

/// Relief as `vertex,px,py,z`.
pub fn relief_csv(tri: &Triangulation, surface: &ReliefSurface) -> String {
    let mut out = String::new();
    write_record(&mut out, &["vertex", "px", "py", "z"]);
    for (i, (p, z)) in tri.points().iter().zip(&surface.depths).enumerate() {
        write_record(
            &mut out,
            &[
                i.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                z.to_string(),
            ],
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::delaunay_triangulate;

    #[test]
    fn triangulation_round_trip() {
        let pts: Vec<Point> = (0..12)
            .map(|i| Point::new((i * 37 % 11) as f64 + 0.25, (i * 53 % 7) as f64 * 1.5))
            .collect();
        let tri = delaunay_triangulate(&pts).unwrap();
        let text = triangulation_csv(&tri);
        assert!(text.starts_with("#points\npx,py\n"));
        assert_eq!(parse_triangulation_csv(&text).unwrap(), tri);
    }

    #[test]
    fn malformed_files() {
        assert!(parse_triangulation_csv("px,py\n1,2\n").is_err());
        assert!(parse_triangulation_csv("#points\npx,py\n1,2\n").is_err());
        let bad = "#points\npx,py\n0,0\n1,0\n0,1\n#triangles\ni,j,k\n0,1,7\n";
        assert_eq!(
            parse_triangulation_csv(bad),
            Err(GeometryError::BadIndex(0))
        );
        let bad = "#points\npx,py\n0,0\n1,0\n0,1\n#triangles\ni,j,k\n0,1\n";
        assert!(matches!(
            parse_triangulation_csv(bad),
            Err(GeometryError::Format(_))
        ));
    }
}
