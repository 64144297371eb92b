//! Grid maxima with three-point parabolic refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which part of the detuning axis the maximum is searched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Negative,
    Global,
}

impl Branch {
    fn admits(&self, x: f64) -> bool {
        match self {
            Branch::Positive => x >= 0.0,
            Branch::Negative => x <= 0.0,
            Branch::Global => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakResult {
    /// Refined location of the maximum.
    pub delta_max: f64,
    /// Refined value at the maximum.
    pub rate_max: f64,
    pub grid_index: usize,
    pub grid_step: f64,
    /// Parabolic shift applied to the grid argmax.
    pub correction: f64,
    pub branch: Branch,
    /// The grid argmax sits on the edge of the searched branch.
    pub on_boundary: bool,
}

/// Maximum of sampled `values` over `grid` restricted to `branch`.
///
/// Non-finite samples (e.g. angles that do not exist) are skipped. The
/// parabolic correction is clamped to one grid step.
pub fn find_peak(grid: &[f64], values: &[f64], branch: Branch) -> Result<PeakResult> {
    if grid.len() != values.len() {
        return Err(Error::Domain("grid and values differ in length".into()));
    }
    if grid.len() < 3 {
        return Err(Error::Domain("peak search needs at least 3 points".into()));
    }
    let admitted = |k: usize| branch.admits(grid[k]) && values[k].is_finite();
    let (first, last) = match ((0..grid.len()).find(|&k| admitted(k)), (0..grid.len()).rev().find(|&k| admitted(k))) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Domain("no admissible samples in the requested branch".into())),
    };
    let mut best = first;
    for k in first..=last {
        if admitted(k) && values[k] > values[best] {
            best = k;
        }
    }

    let on_boundary = best == first || best == last;
    let mut result = PeakResult {
        delta_max: grid[best],
        rate_max: values[best],
        grid_index: best,
        grid_step: if best + 1 < grid.len() { grid[best + 1] - grid[best] } else { grid[best] - grid[best - 1] },
        correction: 0.0,
        branch,
        on_boundary,
    };
    if on_boundary || !admitted(best - 1) || !admitted(best + 1) {
        return Ok(result);
    }

    let (x0, x1, x2) = (grid[best - 1], grid[best], grid[best + 1]);
    let (y0, y1, y2) = (values[best - 1], values[best], values[best + 1]);
    // Vertex of the interpolating parabola through three (possibly
    // unevenly spaced) points.
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature < 0.0 {
        let slope_mid = d01 + curvature * (x1 - x0);
        let shift = -slope_mid / (2.0 * curvature);
        let step = result.grid_step;
        let shift = shift.clamp(-step, step);
        result.correction = shift;
        result.delta_max = x1 + shift;
        result.rate_max = y1 + slope_mid * shift + curvature * shift * shift;
    }
    Ok(result)
}
