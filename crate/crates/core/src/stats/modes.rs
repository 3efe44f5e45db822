//! Peaks of a one-dimensional Gaussian kernel density.

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub x: f64,
    pub density: f64,
}

/// Gaussian kernel density estimate at `x`.
pub fn kde(xs: &[f64], bandwidth: f64, x: f64) -> f64 {
    let norm = 1.0 / (xs.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    norm * xs
        .iter()
        .map(|xi| (-0.5 * ((x - xi) / bandwidth).powi(2)).exp())
        .sum::<f64>()
}

/// Strict local maxima of the density, densest first.
///
/// Each distinct placement is moved uphill by Gaussian mean shift, which
/// converges to a stationary point of the density, then refined by Newton
/// steps on the density derivative. Endpoints closer than
/// 1e-3 bandwidths are merged, and stationary points that are not maxima
/// are discarded.
pub fn composition_modes(xs: &[f64], bandwidth: f64) -> Result<Vec<Mode>, StatsError> {
    if xs.is_empty() {
        return Err(StatsError::TooFewSamples {
            needed: 1,
            found: 0,
        });
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(StatsError::NonPositive("bandwidth"));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut starts = xs.to_vec();
    starts.sort_by(f64::total_cmp);
    starts.dedup();

    let mut peaks: Vec<f64> = Vec::new();
    for &start in &starts {
        let x = newton_polish(xs, bandwidth, mean_shift(xs, bandwidth, start));
        if !peaks.iter().any(|&p| (p - x).abs() < 1e-3 * bandwidth) {
            peaks.push(x);
        }
    }

    let probe = 1e-2 * bandwidth;
    let mut modes: Vec<Mode> = peaks
        .into_iter()
        .map(|x| Mode {
            x,
            density: kde(xs, bandwidth, x),
        })
        .filter(|m| {
            kde(xs, bandwidth, m.x - probe) < m.density
                && kde(xs, bandwidth, m.x + probe) < m.density
        })
        .collect();
    // Densities equal to 9 significant digits count as ties and are ordered
    // by position, so symmetric layouts sort the same after translation.
    let top = modes.iter().map(|m| m.density).fold(0.0, f64::max);
    let level = |m: &Mode| (m.density / top * 1e9).round() as i64;
    modes.sort_by(|a, b| level(b).cmp(&level(a)).then(a.x.total_cmp(&b.x)));
    Ok(modes)
}

fn mean_shift(xs: &[f64], bandwidth: f64, mut x: f64) -> f64 {
    for _ in 0..10_000 {
        let (mut num, mut den) = (0.0, 0.0);
        for &xi in xs {
            let w = (-0.5 * ((x - xi) / bandwidth).powi(2)).exp();
            num += w * xi;
            den += w;
        }
        if den == 0.0 {
            break;
        }
        let next = num / den;
        let step = (next - x).abs();
        x = next;
        if step <= 1e-12 * bandwidth {
            break;
        }
    }
    x
}

/// Mean shift slows down on flat peaks; a few Newton steps on the first
/// derivative finish the job while the curvature stays negative.
fn newton_polish(xs: &[f64], bandwidth: f64, mut x: f64) -> f64 {
    for _ in 0..100 {
        let (mut slope, mut curvature) = (0.0, 0.0);
        for &xi in xs {
            let u = (xi - x) / bandwidth;
            let w = (-0.5 * u * u).exp();
            slope += w * u;
            curvature += w * (u * u - 1.0);
        }
        if curvature >= 0.0 {
            break;
        }
        let step = bandwidth * slope / curvature;
        if !step.is_finite() || step.abs() > bandwidth {
            break;
        }
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(bandwidth) {
            break;
        }
    }
    x
}
