use statrs::function::beta::beta_reg;

use super::{mean, sum_sq_dev, StatsError};

/// Pooled-variance two-sample Student's t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Sample (n − 1) standard deviations.
    pub sd_a: f64,
    pub sd_b: f64,
    pub t: f64,
    pub df: u32,
    /// Two-sided.
    pub p: f64,
}

pub fn ttest_independent(a: &[f64], b: &[f64]) -> Result<TTestResult, StatsError> {
    for xs in [a, b] {
        if xs.len() < 2 {
            return Err(StatsError::TooFewSamples {
                needed: 2,
                found: xs.len(),
            });
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (ssa, ssb) = (sum_sq_dev(a, ma), sum_sq_dev(b, mb));
    let df = a.len() + b.len() - 2;
    let pooled = (ssa + ssb) / df as f64;
    if pooled == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let se = (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let t = (ma - mb) / se;
    Ok(TTestResult {
        n_a: a.len(),
        n_b: b.len(),
        mean_a: ma,
        mean_b: mb,
        sd_a: (ssa / (na - 1.0)).sqrt(),
        sd_b: (ssb / (nb - 1.0)).sqrt(),
        t,
        df: df as u32,
        p: student_t_two_sided_p(t, df as f64),
    })
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom, via the
/// regularized incomplete beta function `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}
