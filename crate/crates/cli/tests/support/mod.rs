#![allow(dead_code)]

/// Dense least-squares solve of the triangle edge equations, gauge-fixed by
/// a Lagrange multiplier, with gradients taken straight from slant and tilt.
#[allow(clippy::needless_range_loop)]
pub fn dense_relief(
    points: &[(f64, f64)],
    triangles: &[[usize; 3]],
    grads: &[(f64, f64)],
) -> Vec<f64> {
    let n = points.len();
    let size = n + 1;
    let mut m = vec![vec![0.0; size + 1]; size];
    for (t, &(p, q)) in triangles.iter().zip(grads) {
        for &j in &t[1..] {
            let i = t[0];
            let b = p * (points[j].0 - points[i].0) + q * (points[j].1 - points[i].1);
            for (r, sr) in [(j, 1.0), (i, -1.0)] {
                for (c, sc) in [(j, 1.0), (i, -1.0)] {
                    m[r][c] += sr * sc;
                }
                m[r][size] += sr * b;
            }
        }
    }
    for i in 0..n {
        m[i][n] = 1.0;
        m[n][i] = 1.0;
    }
    for col in 0..size {
        let piv = (col..size)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in 0..size {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=size {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    (0..n).map(|i| m[i][size] / m[i][i]).collect()
}

pub fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}
