//! Fields sampled on a [`Grid`]: real scalar/vector observables and
//! complex two- and four-component wavefunctions.

use crate::error::{QelError, Result};
use crate::grid::Grid;
use ndarray::{ArrayD, Dimension, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysConstants {
    pub hbar: f64,
    pub mass: f64,
    pub c: f64,
    pub charge_magnitude: f64,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            c: 1.0,
            charge_magnitude: 1.0,
        }
    }
}

impl PhysConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("c", self.c),
            ("charge_magnitude", self.charge_magnitude),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(QelError::InvalidPacket(format!(
                    "constant {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Real-valued density on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: ArrayD<f64>,
    pub time: f64,
}

impl ScalarField {
    pub fn new(grid: Grid, values: ArrayD<f64>, time: f64) -> Result<Self> {
        if values.shape() != grid.shape().as_slice() {
            return Err(QelError::GridMismatch(format!(
                "scalar field shape {:?} does not match grid shape {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            values: ArrayD::zeros(IxDyn(&grid.shape())),
            grid: grid.clone(),
            time: 0.0,
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for (idx, v) in out.values.indexed_iter_mut() {
            *v = f(&grid.point(idx.slice()));
        }
        out
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(QelError::NonFinite(what.to_string()))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Real vector field; `comps[i]` holds the i-th Cartesian component.
/// The number of components may exceed the grid dimension (out-of-plane
/// components of a cross product on a low-dimensional grid); axes beyond
/// the grid dimension carry no spatial variation.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub comps: Vec<ArrayD<f64>>,
    pub time: f64,
}

impl VectorField {
    pub fn zeros(grid: &Grid, n_comps: usize) -> Self {
        Self {
            comps: (0..n_comps)
                .map(|_| ArrayD::zeros(IxDyn(&grid.shape())))
                .collect(),
            grid: grid.clone(),
            time: 0.0,
        }
    }

    pub fn from_scalars(comps: Vec<ScalarField>) -> Result<Self> {
        let first = comps
            .first()
            .ok_or_else(|| QelError::DimensionMismatch("vector field needs components".into()))?;
        let grid = first.grid.clone();
        let time = first.time;
        for c in &comps {
            if c.grid != grid {
                return Err(QelError::GridMismatch(
                    "vector components on different grids".into(),
                ));
            }
        }
        Ok(Self {
            grid,
            comps: comps.into_iter().map(|c| c.values).collect(),
            time,
        })
    }

    pub fn component(&self, i: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.comps[i].clone(),
            time: self.time,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Two-component complex wavefunction with its unit system.
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub grid: Grid,
    pub comps: [ArrayD<Complex64>; 2],
    pub time: f64,
    pub constants: PhysConstants,
    /// Set when the state is normalizable and was normalized at creation.
    pub normalized: bool,
}

impl SpinorField {
    pub fn zeros(grid: &Grid, constants: PhysConstants) -> Self {
        let z = ArrayD::zeros(IxDyn(&grid.shape()));
        Self {
            comps: [z.clone(), z],
            grid: grid.clone(),
            time: 0.0,
            constants,
            normalized: false,
        }
    }

    /// Pointwise construction from coordinates.
    pub fn from_fn(
        grid: &Grid,
        constants: PhysConstants,
        f: impl Fn(&[f64]) -> [Complex64; 2],
    ) -> Self {
        let mut out = Self::zeros(grid, constants);
        let shape = IxDyn(&grid.shape());
        let mut up = ArrayD::zeros(shape.clone());
        let mut dn = ArrayD::zeros(shape);
        for (idx, v) in up.indexed_iter_mut() {
            let pair = f(&grid.point(idx.slice()));
            *v = pair[0];
            dn[idx.slice()] = pair[1];
        }
        out.comps = [up, dn];
        out
    }

    /// Spin-component densities summed: phi^dag phi.
    pub fn density(&self) -> ScalarField {
        let mut values = ArrayD::zeros(IxDyn(&self.grid.shape()));
        for c in &self.comps {
            values += &c.mapv(|z| z.norm_sqr());
        }
        ScalarField {
            grid: self.grid.clone(),
            values,
            time: self.time,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        crate::calculus::integrate(&self.density(), None).unwrap_or(f64::NAN)
    }

    pub fn scale(&mut self, s: Complex64) {
        for c in &mut self.comps {
            c.mapv_inplace(|z| z * s);
        }
    }

    pub fn check_same_grid(&self, other: &SpinorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(QelError::GridMismatch(
                "spinor fields live on different grids".into(),
            ));
        }
        Ok(())
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        for c in &self.comps {
            if !c.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(QelError::NonFinite(what.to_string()));
            }
        }
        Ok(())
    }
}

/// Four-component Dirac wavefunction. Components 0,1 are the upper
/// (large) spinor, 2,3 the lower one.
#[derive(Debug, Clone)]
pub struct BispinorField {
    pub grid: Grid,
    pub comps: [ArrayD<Complex64>; 4],
    pub time: f64,
    pub constants: PhysConstants,
}

impl BispinorField {
    pub fn zeros(grid: &Grid, constants: PhysConstants) -> Self {
        let z: ArrayD<Complex64> = ArrayD::zeros(IxDyn(&grid.shape()));
        Self {
            comps: [z.clone(), z.clone(), z.clone(), z],
            grid: grid.clone(),
            time: 0.0,
            constants,
        }
    }

    pub fn density(&self) -> ScalarField {
        let mut values = ArrayD::zeros(IxDyn(&self.grid.shape()));
        for c in &self.comps {
            values += &c.mapv(|z| z.norm_sqr());
        }
        ScalarField {
            grid: self.grid.clone(),
            values,
            time: self.time,
        }
    }

    pub fn check_same_grid(&self, other: &BispinorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(QelError::GridMismatch(
                "bispinor fields live on different grids".into(),
            ));
        }
        Ok(())
    }
}
