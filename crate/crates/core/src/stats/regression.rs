//! Horizon-ratio elevation fits and the elevation-over-time trend.

use super::{mean, student_t_two_sided_p, sum_sq_dev, StatsError};

/// One annotated person: feet and head in pixel coordinates (y down).
#[derive(Debug, Clone, PartialEq)]
pub struct FigureAnnotation {
    pub image_name: String,
    pub annotator: String,
    pub foot_x: f64,
    pub foot_y: f64,
    pub head_x: f64,
    pub head_y: f64,
}

impl FigureAnnotation {
    /// Image height of the figure, feet below head.
    pub fn height(&self) -> f64 {
        self.foot_y - self.head_y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OffsetMode {
    ThroughOrigin,
    FreeOffset,
}

impl OffsetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OffsetMode::ThroughOrigin => "through-origin",
            OffsetMode::FreeOffset => "free-offset",
        }
    }
}

/// Viewpoint elevation in body heights, with slope inference.
///
/// `t` is infinite and `p` zero when the fit is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElevationEstimate {
    pub h: f64,
    pub stderr: f64,
    pub t: f64,
    pub df: u32,
    pub p: f64,
    pub mode: OffsetMode,
    pub offset: Option<f64>,
    pub n: usize,
}

/// Regresses feet-to-horizon distance on figure height.
///
/// Under the horizon ratio, a figure standing on the ground plane is cut by
/// the horizon at the eye height of the viewpoint, so
/// `footY − horizonY = h · (footY − headY)` with `h` the viewpoint elevation
/// measured in figure heights.
pub fn fit_elevation(
    figures: &[FigureAnnotation],
    horizon_y: f64,
    mode: OffsetMode,
) -> Result<ElevationEstimate, StatsError> {
    let needed = match mode {
        OffsetMode::ThroughOrigin => 2,
        OffsetMode::FreeOffset => 3,
    };
    if figures.len() < needed {
        return Err(StatsError::TooFewSamples {
            needed,
            found: figures.len(),
        });
    }
    if !horizon_y.is_finite() {
        return Err(StatsError::NonFinite);
    }
    let mut sizes = Vec::with_capacity(figures.len());
    let mut distances = Vec::with_capacity(figures.len());
    for (i, f) in figures.iter().enumerate() {
        let s = f.height();
        if !s.is_finite() || !f.foot_y.is_finite() {
            return Err(StatsError::NonFinite);
        }
        if s <= 0.0 {
            return Err(StatsError::ZeroHeight(i));
        }
        sizes.push(s);
        distances.push(f.foot_y - horizon_y);
    }
    let n = figures.len();
    match mode {
        OffsetMode::ThroughOrigin => {
            let sxx: f64 = sizes.iter().map(|s| s * s).sum();
            let sxy: f64 = sizes.iter().zip(&distances).map(|(s, d)| s * d).sum();
            let h = sxy / sxx;
            let sse: f64 = sizes
                .iter()
                .zip(&distances)
                .map(|(s, d)| (d - h * s).powi(2))
                .sum();
            let df = n - 1;
            let stderr = (sse / df as f64 / sxx).sqrt();
            let t = h / stderr;
            Ok(ElevationEstimate {
                h,
                stderr,
                t,
                df: df as u32,
                p: student_t_two_sided_p(t, df as f64),
                mode,
                offset: None,
                n,
            })
        }
        OffsetMode::FreeOffset => {
            let fit = ols(&sizes, &distances)?;
            Ok(ElevationEstimate {
                h: fit.slope,
                stderr: fit.slope_stderr,
                t: fit.t,
                df: fit.df,
                p: fit.p,
                mode,
                offset: Some(fit.intercept),
                n,
            })
        }
    }
}

/// Simple linear regression with intercept; inference is for the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatResult {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub intercept_stderr: f64,
    pub t: f64,
    pub df: u32,
    pub p: f64,
}

/// One row of a regression report.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub t: f64,
    pub df: u32,
    pub p: f64,
}

impl StatResult {
    pub fn coefficients(&self) -> [Coefficient; 2] {
        let t_int = self.intercept / self.intercept_stderr;
        let df = self.df as f64;
        [
            Coefficient {
                name: "slope".into(),
                estimate: self.slope,
                stderr: self.slope_stderr,
                t: self.t,
                df: self.df,
                p: self.p,
            },
            Coefficient {
                name: "intercept".into(),
                estimate: self.intercept,
                stderr: self.intercept_stderr,
                t: t_int,
                df: self.df,
                p: student_t_two_sided_p(t_int, df),
            },
        ]
    }
}

/// Elevation against year, ordinary least squares with intercept.
pub fn fit_trend(years: &[f64], elevations: &[f64]) -> Result<StatResult, StatsError> {
    if years.len() != elevations.len() {
        return Err(StatsError::LengthMismatch(years.len(), elevations.len()));
    }
    if years.len() < 3 {
        return Err(StatsError::TooFewSamples {
            needed: 3,
            found: years.len(),
        });
    }
    if years.iter().chain(elevations).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    ols(years, elevations)
}

fn ols(x: &[f64], y: &[f64]) -> Result<StatResult, StatsError> {
    let n = x.len();
    let (mx, my) = (mean(x), mean(y));
    let sxx = sum_sq_dev(x, mx);
    if sxx == 0.0 {
        return Err(StatsError::SingularDesign);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let df = n - 2;
    let s2 = sse / df as f64;
    let slope_stderr = (s2 / sxx).sqrt();
    let intercept_stderr = (s2 * (1.0 / n as f64 + mx * mx / sxx)).sqrt();
    let t = slope / slope_stderr;
    Ok(StatResult {
        slope,
        slope_stderr,
        intercept,
        intercept_stderr,
        t,
        df: df as u32,
        p: student_t_two_sided_p(t, df as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure(foot_y: f64, head_y: f64) -> FigureAnnotation {
        FigureAnnotation {
            image_name: "img".into(),
            annotator: "a".into(),
            foot_x: 10.0,
            foot_y,
            head_x: 10.0,
            head_y,
        }
    }

    #[test]
    fn heads_on_horizon_give_unit_elevation() {
        let horizon = 120.0;
        let figs: Vec<_> = [200.0, 150.0, 300.0, 131.0]
            .iter()
            .map(|&f| figure(f, horizon))
            .collect();
        for mode in [OffsetMode::ThroughOrigin, OffsetMode::FreeOffset] {
            let e = fit_elevation(&figs, horizon, mode).unwrap();
            assert!((e.h - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn horizon_below_feet_is_allowed() {
        let figs = vec![
            figure(100.0, 80.0),
            figure(150.0, 110.0),
            figure(90.0, 80.0),
        ];
        let e = fit_elevation(&figs, 500.0, OffsetMode::ThroughOrigin).unwrap();
        assert!(e.h < 0.0);
        assert_eq!(e.df, 2);
    }

    #[test]
    fn elevation_errors() {
        let figs = vec![figure(100.0, 80.0), figure(150.0, 150.0)];
        assert_eq!(
            fit_elevation(&figs, 50.0, OffsetMode::ThroughOrigin),
            Err(StatsError::ZeroHeight(1))
        );
        assert!(matches!(
            fit_elevation(&figs[..1], 50.0, OffsetMode::ThroughOrigin),
            Err(StatsError::TooFewSamples {
                needed: 2,
                found: 1
            })
        ));
        let figs = vec![figure(100.0, 80.0), figure(150.0, 110.0)];
        assert!(matches!(
            fit_elevation(&figs, 50.0, OffsetMode::FreeOffset),
            Err(StatsError::TooFewSamples {
                needed: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn free_offset_recovers_offset() {
        // d = 5 + 1.5 s exactly.
        let figs: Vec<_> = [10.0, 20.0, 35.0, 50.0]
            .iter()
            .map(|&s| {
                let d = 5.0 + 1.5 * s;
                figure(100.0 + d, 100.0 + d - s)
            })
            .collect();
        let e = fit_elevation(&figs, 100.0, OffsetMode::FreeOffset).unwrap();
        assert!((e.h - 1.5).abs() < 1e-12);
        assert!((e.offset.unwrap() - 5.0).abs() < 1e-10);
        assert_eq!(e.df, 2);
    }

    #[test]
    fn through_origin_inference_by_hand() {
        // s = (1, 2, 3), d = (2, 5, 5): h = 27/14.
        let figs = vec![figure(2.0, 1.0), figure(5.0, 3.0), figure(5.0, 2.0)];
        let e = fit_elevation(&figs, 0.0, OffsetMode::ThroughOrigin).unwrap();
        assert!((e.h - 27.0 / 14.0).abs() < 1e-15);
        let h: f64 = 27.0 / 14.0;
        let sse = (2.0 - h).powi(2) + (5.0 - 2.0 * h).powi(2) + (5.0 - 3.0 * h).powi(2);
        let se = (sse / 2.0 / 14.0f64).sqrt();
        assert!((e.stderr - se).abs() < 1e-15);
        assert!((e.t - h / se).abs() < 1e-12);
    }

    #[test]
    fn trend_on_constant_and_exact_data() {
        let years: Vec<f64> = (0..10).map(|i| 1600.0 + i as f64).collect();
        let flat = vec![2.5; 10];
        let r = fit_trend(&years, &flat).unwrap();
        assert_eq!(r.slope, 0.0);

        let years: Vec<f64> = (0..34).map(|i| 1600.0 + i as f64 * 1.5).collect();
        let elev: Vec<f64> = years.iter().map(|y| -0.1 * y + 165.0).collect();
        let r = fit_trend(&years, &elev).unwrap();
        assert!((r.slope + 0.1).abs() < 1e-12);
        assert_eq!(r.df, 32);
    }

    #[test]
    fn trend_errors() {
        assert_eq!(
            fit_trend(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::SingularDesign)
        );
        assert_eq!(
            fit_trend(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch(2, 1))
        );
        assert!(matches!(
            fit_trend(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewSamples { .. })
        ));
    }
}
