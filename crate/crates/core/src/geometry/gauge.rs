use std::f64::consts::TAU;

use super::GeometryError;

pub const MAX_SLANT_DEG: f64 = 89.0;
/// Largest accepted slant. Steeper settings give gradients that would
/// dominate the least-squares fit.
pub const MAX_SLANT: f64 = MAX_SLANT_DEG * std::f64::consts::PI / 180.0;

/// One probe setting: slant and tilt in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeSetting {
    pub point_index: usize,
    pub slant: f64,
    pub tilt: f64,
}

impl GaugeSetting {
    pub fn new(point_index: usize, slant: f64, tilt: f64) -> Result<Self, GeometryError> {
        check_slant(slant)?;
        Ok(Self {
            point_index,
            slant,
            tilt: normalize_angle(tilt),
        })
    }

    pub fn from_degrees(
        point_index: usize,
        slant_deg: f64,
        tilt_deg: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(point_index, slant_deg.to_radians(), tilt_deg.to_radians())
    }

    pub fn gradient(&self) -> GradientSample {
        let (p, q) =
            slant_tilt_to_gradient(self.slant, self.tilt).expect("validated on construction");
        GradientSample {
            triangle_index: self.point_index,
            p,
            q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSample {
    pub triangle_index: usize,
    pub p: f64,
    pub q: f64,
}

fn check_slant(slant: f64) -> Result<(), GeometryError> {
    if !(slant.is_finite() && slant >= 0.0) {
        return Err(GeometryError::BadSlant(slant));
    }
    if slant > MAX_SLANT {
        return Err(GeometryError::SlantOverflow(slant));
    }
    Ok(())
}

fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `(p, q) = (tan σ cos τ, tan σ sin τ)`.
pub fn slant_tilt_to_gradient(slant: f64, tilt: f64) -> Result<(f64, f64), GeometryError> {
    check_slant(slant)?;
    let m = slant.tan();
    Ok((m * tilt.cos(), m * tilt.sin()))
}

/// Inverse of [`slant_tilt_to_gradient`]; tilt is 0 for a zero gradient.
pub fn gradient_to_slant_tilt(p: f64, q: f64) -> (f64, f64) {
    let m = p.hypot(q);
    if m == 0.0 {
        return (0.0, 0.0);
    }
    (m.atan(), normalize_angle(q.atan2(p)))
}
