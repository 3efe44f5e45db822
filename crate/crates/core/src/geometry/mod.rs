//! Gauge-figure geometry: probe attitude conversions, triangulated sampling
//! and integration of per-triangle depth gradients into a relief.
//!
//! Coordinates are image pixels with x to the right and y pointing *down*.
//! Depth z increases toward the viewer. A gradient `(p, q)` is
//! `(∂z/∂x, ∂z/∂y)` in that frame, and tilt is measured from +x toward +y,
//! so a tilt of 90° points down the image. To express a relief with y up,
//! negate `q` (equivalently, mirror the tilt: `τ_up = 2π − τ`).

mod delaunay;
mod gauge;
mod io;
mod relief;

use thiserror::Error;

pub use delaunay::delaunay_triangulate;
pub use gauge::{
    gradient_to_slant_tilt, slant_tilt_to_gradient, GaugeSetting, GradientSample, MAX_SLANT,
    MAX_SLANT_DEG,
};
pub use io::{parse_triangulation_csv, relief_csv, triangulation_csv};
pub use relief::{reconstruct_relief, relief_depth_range, ReliefSurface};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("slant {0} rad exceeds the maximum of 89 degrees")]
    SlantOverflow(f64),
    #[error("slant {0} rad is negative or not finite")]
    BadSlant(f64),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all points are collinear")]
    Collinear,
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("point {0} is not finite")]
    NonFinitePoint(usize),
    #[error("triangle {0} references a missing vertex")]
    BadIndex(usize),
    #[error("triangle {0} has zero area")]
    Degenerate(usize),
    #[error("expected one gradient sample per triangle ({expected}), got {found}")]
    SampleCount { expected: usize, found: usize },
    #[error("gradient for triangle {0} is not finite")]
    NonFiniteGradient(usize),
    #[error("triangulation is disconnected; depth offset is ambiguous")]
    Disconnected,
    #[error("triangulation file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Twice the signed area of `abc`; positive when counter-clockwise in a
/// y-up frame.
pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Points with vertex-index triangles. Barycentres are derived on
/// construction and kept in triangle order.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    points: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    barycentres: Vec<Point>,
}

impl Triangulation {
    pub fn new(points: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(GeometryError::NonFinitePoint(i));
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= points.len()) {
                return Err(GeometryError::BadIndex(t));
            }
            let [a, b, c] = tri.map(|v| points[v]);
            if orient(a, b, c) == 0.0 {
                return Err(GeometryError::Degenerate(t));
            }
        }
        let barycentres = triangles
            .iter()
            .map(|tri| centroid(tri.map(|v| points[v])))
            .collect();
        Ok(Self {
            points,
            triangles,
            barycentres,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn barycentres(&self) -> &[Point] {
        &self.barycentres
    }
}

fn centroid([a, b, c]: [Point; 3]) -> Point {
    Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
}

/// Per-triangle arithmetic mean of the three vertices.
pub fn barycentres(tri: &Triangulation) -> Vec<Point> {
    tri.barycentres.clone()
}
