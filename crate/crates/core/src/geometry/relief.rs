use super::{GeometryError, GradientSample, Triangulation};

/// Depths at the triangulation vertices, gauge-fixed to zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliefSurface {
    pub depths: Vec<f64>,
    /// Least-squares objective at the solution.
    pub residual: f64,
}

impl ReliefSurface {
    pub fn depth_range(&self) -> f64 {
        relief_depth_range(self)
    }
}

/// Integrates one depth gradient per triangle into vertex depths.
///
/// Each triangle `[v0, v1, v2]` contributes the two edge equations
/// `z[vk] − z[v0] = p·(xk − x0) + q·(yk − y0)` for `k = 1, 2`. The normal
/// equations form a weighted graph Laplacian, solved by conjugate gradients
/// inside the mean-zero subspace.
pub fn reconstruct_relief(
    tri: &Triangulation,
    samples: &[GradientSample],
) -> Result<ReliefSurface, GeometryError> {
    let n = tri.points().len();
    let m = tri.triangles().len();
    if samples.len() != m {
        return Err(GeometryError::SampleCount {
            expected: m,
            found: samples.len(),
        });
    }
    let mut gradient = vec![None; m];
    for s in samples {
        if s.triangle_index >= m || gradient[s.triangle_index].is_some() {
            return Err(GeometryError::SampleCount {
                expected: m,
                found: samples.len(),
            });
        }
        if !(s.p.is_finite() && s.q.is_finite()) {
            return Err(GeometryError::NonFiniteGradient(s.triangle_index));
        }
        gradient[s.triangle_index] = Some((s.p, s.q));
    }
    check_connected(n, tri.triangles())?;

    let equations: Vec<(usize, usize, f64)> = tri
        .triangles()
        .iter()
        .zip(&gradient)
        .flat_map(|(t, g)| {
            let (p, q) = g.expect("all triangles sampled");
            let origin = tri.points()[t[0]];
            [t[1], t[2]].map(|j| {
                let pj = tri.points()[j];
                (t[0], j, p * (pj.x - origin.x) + q * (pj.y - origin.y))
            })
        })
        .collect();

    let laplacian = Laplacian::new(n, &equations);
    let mut rhs = vec![0.0; n];
    for &(i, j, d) in &equations {
        rhs[j] += d;
        rhs[i] -= d;
    }
    let depths = conjugate_gradient(&laplacian, &rhs);
    let residual = equations
        .iter()
        .map(|&(i, j, d)| (depths[j] - depths[i] - d).powi(2))
        .sum();
    Ok(ReliefSurface { depths, residual })
}

/// `max(z) − min(z)`.
pub fn relief_depth_range(surface: &ReliefSurface) -> f64 {
    let (lo, hi) = surface
        .depths
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &z| {
            (lo.min(z), hi.max(z))
        });
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

fn check_connected(n: usize, triangles: &[[usize; 3]]) -> Result<(), GeometryError> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for t in triangles {
        for &v in &t[1..] {
            let (a, b) = (find(&mut parent, t[0]), find(&mut parent, v));
            parent[a] = b;
        }
    }
    let root = find(&mut parent, 0);
    if (1..n).any(|v| find(&mut parent, v) != root) {
        return Err(GeometryError::Disconnected);
    }
    Ok(())
}

/// Sparse symmetric Laplacian in adjacency-list form.
struct Laplacian {
    diag: Vec<f64>,
    off: Vec<Vec<(usize, f64)>>,
}

impl Laplacian {
    fn new(n: usize, equations: &[(usize, usize, f64)]) -> Self {
        let mut diag = vec![0.0; n];
        let mut off: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, _) in equations {
            diag[i] += 1.0;
            diag[j] += 1.0;
            for (a, b) in [(i, j), (j, i)] {
                match off[a].iter_mut().find(|(k, _)| *k == b) {
                    Some(entry) => entry.1 -= 1.0,
                    None => off[a].push((b, -1.0)),
                }
            }
        }
        Self { diag, off }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.diag[i] * x[i] + self.off[i].iter().map(|&(j, w)| w * x[j]).sum::<f64>();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn conjugate_gradient(a: &Laplacian, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    remove_mean(&mut r);
    let b_norm = dot(&r, &r).sqrt();
    if b_norm == 0.0 {
        return x;
    }
    let tol = 1e-15 * b_norm;
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..(10 * n).max(100) {
        a.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        remove_mean(&mut r);
        let rr_next = dot(&r, &r);
        if rr_next.sqrt() <= tol {
            break;
        }
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
    }
    remove_mean(&mut x);
    x
}
