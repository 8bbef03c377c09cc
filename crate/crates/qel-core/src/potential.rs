//! External potentials, including a sinusoidal drive with an analytic time
//! derivative (the work term of the conservation law) and the uniform
//! magnetic field in the Landau gauge A = (-B y, 0, 0).

use crate::error::{QelError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use ndarray::ArrayD;
use serde::{Deserialize, Serialize};

/// Scalar multiplier lambda(t) applied to the base potential.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Drive {
    #[default]
    Static,
    /// lambda(t) = 1 + amp sin(freq t)
    Sinusoidal { amp: f64, freq: f64 },
}

impl Drive {
    pub fn lambda(&self, t: f64) -> f64 {
        match self {
            Drive::Static => 1.0,
            Drive::Sinusoidal { amp, freq } => 1.0 + amp * (freq * t).sin(),
        }
    }

    pub fn lambda_dot(&self, t: f64) -> f64 {
        match self {
            Drive::Static => 0.0,
            Drive::Sinusoidal { amp, freq } => amp * freq * (freq * t).cos(),
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Drive::Static)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum PotentialKind {
    #[default]
    None,
    Harmonic {
        omega: f64,
    },
    Table(ScalarField),
    /// Uniform B along z in the Landau gauge A = (-B y, 0, 0).
    UniformMagnetic {
        b_field: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub drive: Drive,
}

impl PotentialSpec {
    pub fn free() -> Self {
        Self::default()
    }

    pub fn harmonic(omega: f64) -> Self {
        Self { kind: PotentialKind::Harmonic { omega }, drive: Drive::Static }
    }

    pub fn uniform_magnetic(b_field: f64) -> Self {
        Self { kind: PotentialKind::UniformMagnetic { b_field }, drive: Drive::Static }
    }

    pub fn with_drive(mut self, drive: Drive) -> Result<Self> {
        if matches!(self.kind, PotentialKind::UniformMagnetic { .. }) && !drive.is_static() {
            return Err(QelError::InvalidPotential(
                "a driven magnetic field is not supported".into(),
            ));
        }
        self.drive = drive;
        Ok(self)
    }

    pub fn is_magnetic(&self) -> bool {
        matches!(self.kind, PotentialKind::UniformMagnetic { .. })
    }

    pub fn b_field(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::UniformMagnetic { b_field } => Some(b_field),
            _ => None,
        }
    }

    pub fn validate(&self, grid: &Grid, mass: f64) -> Result<()> {
        let _ = mass;
        match &self.kind {
            PotentialKind::Table(f) => {
                if f.grid != *grid {
                    return Err(QelError::GridMismatch(
                        "table potential grid does not match the field grid".into(),
                    ));
                }
                f.check_finite("table potential")?;
            }
            PotentialKind::UniformMagnetic { b_field } => {
                if !(*b_field > 0.0) || grid.dim() < 2 {
                    return Err(QelError::InvalidPotential(
                        "uniform magnetic field needs B > 0 and a 2-D or 3-D grid".into(),
                    ));
                }
                if !self.drive.is_static() {
                    return Err(QelError::InvalidPotential(
                        "a driven magnetic field is not supported".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Undriven scalar potential U0(r); `None` for free motion and for the
    /// magnetic variant (where the field enters through gauge-elongated
    /// derivatives, not a scalar U).
    pub fn base_values(&self, grid: &Grid, mass: f64) -> Result<Option<ArrayD<f64>>> {
        self.validate(grid, mass)?;
        match &self.kind {
            PotentialKind::None | PotentialKind::UniformMagnetic { .. } => Ok(None),
            PotentialKind::Harmonic { omega } => {
                let f = ScalarField::from_fn(grid, |p| {
                    0.5 * mass * omega * omega * p.iter().map(|x| x * x).sum::<f64>()
                });
                Ok(Some(f.values))
            }
            PotentialKind::Table(f) => Ok(Some(f.values.clone())),
        }
    }

    /// U(r, t) = lambda(t) U0(r).
    pub fn values_at(&self, grid: &Grid, mass: f64, t: f64) -> Result<Option<ArrayD<f64>>> {
        Ok(self
            .base_values(grid, mass)?
            .map(|u| u * self.drive.lambda(t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn drive_lambda_and_derivative() {
        let d = Drive::Sinusoidal { amp: 0.1, freq: 2.0 };
        let (t, h) = (0.37, 1e-6);
        let fd = (d.lambda(t + h) - d.lambda(t - h)) / (2.0 * h);
        assert!((d.lambda_dot(t) - fd).abs() < 1e-8);
        assert_eq!(Drive::Static.lambda(3.0), 1.0);
        assert_eq!(Drive::Static.lambda_dot(3.0), 0.0);
    }

    #[test]
    fn harmonic_values() {
        let grid = Grid::line(64, -2.0, 2.0).unwrap();
        let u = PotentialSpec::harmonic(2.0)
            .base_values(&grid, 1.0)
            .unwrap()
            .unwrap();
        let x = grid.coords(0)[10];
        assert!((u[ndarray::IxDyn(&[10])] - 2.0 * x * x).abs() < 1e-14);
    }

    #[test]
    fn magnetic_rejects_drive_and_1d() {
        let err = PotentialSpec::uniform_magnetic(1.0)
            .with_drive(Drive::Sinusoidal { amp: 0.1, freq: 1.0 });
        assert!(err.is_err());
        let grid = Grid::line(64, -2.0, 2.0).unwrap();
        assert!(PotentialSpec::uniform_magnetic(1.0).validate(&grid, 1.0).is_err());
    }
}
