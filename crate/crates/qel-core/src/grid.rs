//! Rectilinear sampling grids in one to three dimensions.
//!
//! Periodic axes sample `[x_min, x_max)` with spacing `(x_max - x_min)/n`;
//! non-periodic axes sample the closed interval with spacing
//! `(x_max - x_min)/(n - 1)`.

use crate::error::{QelError, Result};
use serde::{Deserialize, Serialize};

/// Hard cap on total grid points (memory budget: a 3-D complex spinor on a
/// grid of this size is ~2 GiB).
pub const MAX_POINTS: usize = 1 << 26;

pub const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub periodic: bool,
}

impl AxisSpec {
    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.x_max - self.x_min) / self.n_points as f64
        } else {
            (self.x_max - self.x_min) / (self.n_points - 1) as f64
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid {
    axes: Vec<AxisSpec>,
}

impl Grid {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(QelError::InvalidGrid(format!(
                "dimension must be 1..=3, got {}",
                axes.len()
            )));
        }
        let mut total: usize = 1;
        for (i, ax) in axes.iter().enumerate() {
            if ax.n_points < 8 {
                return Err(QelError::InvalidGrid(format!(
                    "axis {i}: n_points must be >= 8, got {}",
                    ax.n_points
                )));
            }
            if !(ax.x_max > ax.x_min) {
                return Err(QelError::InvalidGrid(format!(
                    "axis {i}: x_max must exceed x_min ({} <= {})",
                    ax.x_max, ax.x_min
                )));
            }
            if !ax.x_min.is_finite() || !ax.x_max.is_finite() {
                return Err(QelError::NonFinite(format!("axis {i} extent")));
            }
            total = total.saturating_mul(ax.n_points);
        }
        if total > MAX_POINTS {
            return Err(QelError::InvalidGrid(format!(
                "total point count {total} exceeds the memory budget of {MAX_POINTS}"
            )));
        }
        Ok(Self { axes })
    }

    /// Uniform periodic grid on `[-l/2, l/2)^dim`.
    pub fn periodic(dim: usize, n: usize, l: f64) -> Result<Self> {
        Self::new(
            (0..dim)
                .map(|_| AxisSpec {
                    n_points: n,
                    x_min: -l / 2.0,
                    x_max: l / 2.0,
                    periodic: true,
                })
                .collect(),
        )
    }

    /// Uniform non-periodic grid on `[-l/2, l/2]^dim`.
    pub fn bounded(dim: usize, n: usize, l: f64) -> Result<Self> {
        Self::new(
            (0..dim)
                .map(|_| AxisSpec {
                    n_points: n,
                    x_min: -l / 2.0,
                    x_max: l / 2.0,
                    periodic: false,
                })
                .collect(),
        )
    }

    /// 1-D periodic grid on `[x_min, x_max)`.
    pub fn line_periodic(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(vec![AxisSpec {
            n_points: n,
            x_min,
            x_max,
            periodic: true,
        }])
    }

    /// 1-D non-periodic grid on `[x_min, x_max]`.
    pub fn line(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(vec![AxisSpec {
            n_points: n,
            x_min,
            x_max,
            periodic: false,
        }])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &AxisSpec {
        &self.axes[i]
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n_points).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n_points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.axes[axis].spacing()
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.spacing())
            .fold(f64::MIN, f64::max)
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let ax = &self.axes[axis];
        (0..ax.n_points).map(|i| ax.coord(i)).collect()
    }

    /// Coordinates of the point at a row-major multi-index.
    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .zip(&self.axes)
            .map(|(&i, ax)| ax.coord(i))
            .collect()
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            Err(QelError::AxisOutOfRange {
                axis,
                dim: self.dim(),
            })
        } else {
            Ok(())
        }
    }

    /// True when every axis is symmetric about the origin, so the map
    /// `r -> -r` permutes grid points exactly.
    pub fn is_reflection_symmetric(&self) -> bool {
        self.axes.iter().all(|ax| {
            let tol = 1e-12 * (ax.x_max - ax.x_min);
            (ax.x_min + ax.x_max).abs() < tol
        })
    }
}
