//! Click scoring for the flicker task and click-density maps.

use std::collections::HashMap;

use super::StatsError;
use crate::geometry::Point;
use crate::model::FlickerRecord;

/// Correct-click radius in units of image width.
pub const CORRECT_RADIUS: f64 = 0.1;
/// Time after which the target is shown to the participant.
pub const REVEAL_MS: f64 = 60_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickEvent {
    pub x: f64,
    pub y: f64,
    pub t_ms: f64,
    pub revealed: bool,
}

/// True when the click is within `CORRECT_RADIUS` of the target center, with
/// both axes normalized by the image width. The boundary is inclusive; a
/// relative slack of 1e-12 absorbs rounding in the normalization.
pub fn classify_click(click: &ClickEvent, target: Point, image_width: f64) -> bool {
    let dx = (click.x - target.x) / image_width;
    let dy = (click.y - target.y) / image_width;
    dx * dx + dy * dy <= CORRECT_RADIUS * CORRECT_RADIUS * (1.0 + 1e-12)
}

/// Target center in image pixels together with the image width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlickerTarget {
    pub center: Point,
    pub image_width: f64,
}

/// Keeps trials answered within the reveal window with a correct click.
/// Records for images without a known target are dropped.
pub fn filter_valid_trials<'a>(
    records: &'a [FlickerRecord],
    targets: &HashMap<String, FlickerTarget>,
) -> Vec<&'a FlickerRecord> {
    records
        .iter()
        .filter(|r| {
            let Some(target) = targets.get(&r.image_name) else {
                return false;
            };
            let click = ClickEvent {
                x: r.click_x,
                y: r.click_y,
                t_ms: r.rt_ms,
                revealed: r.revealed,
            };
            !r.revealed
                && r.rt_ms <= REVEAL_MS
                && classify_click(&click, target.center, target.image_width)
        })
        .collect()
}

/// Per-pixel click counts; cell `(col, row)` sits at pixel `(col, row)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<u32>,
}

impl DensityGrid {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![0; width * height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> u32 {
        self.cells[row * self.width + col]
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().map(|&c| c as u64).sum()
    }

    pub fn max(&self) -> u32 {
        self.cells.iter().copied().max().unwrap_or(0)
    }

    /// One line per image row, counts separated by commas.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 2);
        for row in self.cells.chunks(self.width.max(1)) {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Binary 8-bit PGM scaled so the densest cell is 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        let max = self.max();
        out.extend(self.cells.iter().map(|&c| {
            if max == 0 {
                0
            } else {
                ((c as u64 * 255 + max as u64 / 2) / max as u64) as u8
            }
        }));
        out
    }
}

/// Adds 1 to every cell within `radius` (inclusive) of each click.
pub fn click_density(
    clicks: &[Point],
    width: usize,
    height: usize,
    radius: f64,
) -> Result<DensityGrid, StatsError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(StatsError::NonPositive("radius"));
    }
    let mut grid = DensityGrid::zeros(width, height);
    for c in clicks {
        if !(c.x >= 0.0 && c.y >= 0.0 && c.x < width as f64 && c.y < height as f64) {
            return Err(StatsError::ClickOutside {
                x: c.x,
                y: c.y,
                width,
                height,
            });
        }
        let r2 = radius * radius;
        let row_lo = (c.y - radius).ceil().max(0.0) as usize;
        let row_hi = ((c.y + radius).floor() as usize).min(height - 1);
        for row in row_lo..=row_hi {
            let dy = row as f64 - c.y;
            let span = (r2 - dy * dy).max(0.0).sqrt();
            let col_lo = (c.x - span).ceil().max(0.0) as usize;
            let col_hi = ((c.x + span).floor() as usize).min(width - 1);
            for col in col_lo..=col_hi {
                let dx = col as f64 - c.x;
                if dx * dx + dy * dy <= r2 {
                    grid.cells[row * width + col] += 1;
                }
            }
        }
    }
    Ok(grid)
}
