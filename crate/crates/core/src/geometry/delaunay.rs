//! Delaunay triangulation by lexicographic sweep followed by Lawson flips.
//!
//! Points are inserted in lexicographic (x, y) order, so each new point lies
//! outside the hull built so far and is fanned to the hull edges it sees.
//! Every interior edge is then flipped until the empty-circumcircle property
//! holds. For co-circular quadrilaterals the diagonal incident to the
//! lowest vertex index wins. Output triangles are rotated to start at their
//! lowest index and sorted, which makes the result independent of the
//! order in which flips happened to be applied.

use std::collections::HashMap;

use super::{orient, GeometryError, Point, Triangulation};

/// Relative tolerance under which an in-circle determinant counts as zero.
const INCIRCLE_EPS: f64 = 1e-12;

pub fn delaunay_triangulate(points: &[Point]) -> Result<Triangulation, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::TooFewPoints(points.len()));
    }
    for (i, p) in points.iter().enumerate() {
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(GeometryError::NonFinitePoint(i));
        }
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a], points[b]);
        pa.x.total_cmp(&pb.x)
            .then(pa.y.total_cmp(&pb.y))
            .then(a.cmp(&b))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(GeometryError::DuplicatePoint(a, b));
        }
    }

    let mut mesh = Mesh::new(points);
    mesh.sweep(&order)?;
    mesh.legalize_all();
    Triangulation::new(points.to_vec(), mesh.canonical_triangles())
}

struct Mesh<'a> {
    pts: &'a [Point],
    tris: Vec<[usize; 3]>,
    /// Directed edge (a, b) to the triangle that contains it in CCW order.
    edges: HashMap<(usize, usize), usize>,
}

impl<'a> Mesh<'a> {
    fn new(pts: &'a [Point]) -> Self {
        Self {
            pts,
            tris: Vec::new(),
            edges: HashMap::new(),
        }
    }

    fn orient(&self, a: usize, b: usize, c: usize) -> f64 {
        orient(self.pts[a], self.pts[b], self.pts[c])
    }

    fn add(&mut self, mut t: [usize; 3]) -> usize {
        if self.orient(t[0], t[1], t[2]) < 0.0 {
            t.swap(1, 2);
        }
        let id = self.tris.len();
        self.tris.push(t);
        self.index(id);
        id
    }

    fn index(&mut self, id: usize) {
        let [a, b, c] = self.tris[id];
        for e in [(a, b), (b, c), (c, a)] {
            self.edges.insert(e, id);
        }
    }

    fn unindex(&mut self, id: usize) {
        let [a, b, c] = self.tris[id];
        for e in [(a, b), (b, c), (c, a)] {
            self.edges.remove(&e);
        }
    }

    /// Builds an initial (non-Delaunay) triangulation. The hull is kept as a
    /// CCW vertex cycle.
    fn sweep(&mut self, order: &[usize]) -> Result<(), GeometryError> {
        let (a, b) = (order[0], order[1]);
        let k = (2..order.len())
            .find(|&k| self.orient(a, b, order[k]) != 0.0)
            .ok_or(GeometryError::Collinear)?;
        let apex = order[k];

        // order[..k] lie on one line, sorted along it; fan them to the apex.
        for w in order[..k].windows(2) {
            self.add([w[0], w[1], apex]);
        }
        let mut hull: Vec<usize> = if self.orient(a, b, apex) > 0.0 {
            order[..k].iter().copied().chain([apex]).collect()
        } else {
            std::iter::once(apex)
                .chain(order[..k].iter().rev().copied())
                .collect()
        };

        for &p in &order[k + 1..] {
            let n = hull.len();
            let visible: Vec<bool> = (0..n)
                .map(|i| self.orient(hull[i], hull[(i + 1) % n], p) < 0.0)
                .collect();
            // Lexicographic order guarantees at least one visible edge and
            // that the visible edges form one contiguous run.
            let start = (0..n)
                .find(|&i| visible[i] && !visible[(i + n - 1) % n])
                .expect("new point sees the hull");
            let mut end = start;
            while visible[end % n] {
                let (u, v) = (hull[end % n], hull[(end + 1) % n]);
                self.add([v, u, p]);
                end += 1;
            }
            // Replace hull[start+1 .. end] (the hidden vertices) with p.
            let mut next = Vec::with_capacity(n + 1);
            next.push(hull[start]);
            next.push(p);
            let mut i = end % n;
            while i != start {
                next.push(hull[i]);
                i = (i + 1) % n;
            }
            hull = next;
        }
        Ok(())
    }

    /// True when the edge shared by `[a, b, c]` and `[b, a, d]` should be
    /// replaced by `c–d`.
    fn should_flip(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        let [pa, pb, pc, pd] = [a, b, c, d].map(|i| self.pts[i]);
        // The flipped triangles must stay non-degenerate.
        if orient(pa, pd, pc) <= 0.0 || orient(pd, pb, pc) <= 0.0 {
            return false;
        }
        let (det, scale) = incircle(pa, pb, pc, pd);
        if det > INCIRCLE_EPS * scale {
            true
        } else if det < -INCIRCLE_EPS * scale {
            false
        } else {
            c.min(d) < a.min(b)
        }
    }

    fn legalize_all(&mut self) {
        let mut stack: Vec<(usize, usize)> =
            self.edges.keys().copied().filter(|&(a, b)| a < b).collect();
        stack.sort_unstable();
        // Each flip strictly improves the Delaunay order except on exact
        // ties; the cap only guards against a tie cycle.
        let mut budget = 64 * self.pts.len() * self.pts.len() + 1024;
        while let Some((a, b)) = stack.pop() {
            let (Some(&t1), Some(&t2)) = (self.edges.get(&(a, b)), self.edges.get(&(b, a))) else {
                continue;
            };
            let c = third(self.tris[t1], a, b);
            let d = third(self.tris[t2], b, a);
            if !self.should_flip(a, b, c, d) {
                continue;
            }
            if budget == 0 {
                break;
            }
            budget -= 1;
            self.unindex(t1);
            self.unindex(t2);
            self.tris[t1] = [a, d, c];
            self.tris[t2] = [d, b, c];
            self.index(t1);
            self.index(t2);
            for (u, v) in [(a, d), (d, b), (b, c), (c, a)] {
                stack.push((u.min(v), u.max(v)));
            }
        }
    }

    fn canonical_triangles(&self) -> Vec<[usize; 3]> {
        let mut out: Vec<[usize; 3]> = self
            .tris
            .iter()
            .map(|&t| {
                let m = (0..3).min_by_key(|&i| t[i]).unwrap();
                [t[m], t[(m + 1) % 3], t[(m + 2) % 3]]
            })
            .collect();
        out.sort_unstable();
        out
    }
}

fn third(t: [usize; 3], a: usize, b: usize) -> usize {
    t.into_iter()
        .find(|&v| v != a && v != b)
        .expect("edge belongs to triangle")
}

/// In-circle determinant of `d` against CCW triangle `abc` (positive when
/// inside) and the magnitude bound used to scale the zero tolerance.
pub(crate) fn incircle(a: Point, b: Point, c: Point, d: Point) -> (f64, f64) {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    let det = alift * (bdx * cdy - bdy * cdx)
        + blift * (cdx * ady - cdy * adx)
        + clift * (adx * bdy - ady * bdx);
    let scale = alift * (bdx * cdy).abs().max((bdy * cdx).abs())
        + blift * (cdx * ady).abs().max((cdy * adx).abs())
        + clift * (adx * bdy).abs().max((ady * bdx).abs());
    (det, scale)
}
