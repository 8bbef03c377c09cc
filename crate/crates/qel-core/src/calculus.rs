//! Differentiation and quadrature on gridded fields.
//!
//! Periodic axes differentiate spectrally (FFT, multiply by (ik)^order);
//! non-periodic axes use 4th-order finite differences with one-sided
//! stencils near the boundary. Quadrature is trapezoid on non-periodic
//! axes and the (equivalent) rectangle rule on periodic ones.

use crate::error::{QelError, Result};
use crate::field::{ScalarField, SpinorField, VectorField};
use crate::grid::Grid;
use ndarray::{ArrayD, Axis, Dimension, IxDyn};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::Mutex;
use std::sync::OnceLock;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// In-place FFT along one axis. `inverse` applies the 1/n scaling.
pub(crate) fn fft_axis(a: &mut ArrayD<Complex64>, axis: usize, inverse: bool) {
    let n = a.shape()[axis];
    let fft = {
        let mut p = planner().lock().unwrap();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    };
    let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
    let mut buf = vec![Complex64::default(); n];
    for mut lane in a.lanes_mut(Axis(axis)) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        fft.process(&mut buf);
        for (v, b) in lane.iter_mut().zip(buf.iter()) {
            *v = *b * scale;
        }
    }
}

/// Signed integer wavenumber index for bin `j` of an n-point FFT.
fn k_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn spectral_derivative(
    values: &ArrayD<Complex64>,
    grid: &Grid,
    axis: usize,
    order: usize,
) -> ArrayD<Complex64> {
    let ax = grid.axis(axis);
    let n = ax.n_points;
    let dk = 2.0 * PI / (ax.x_max - ax.x_min);
    let mut hat = values.clone();
    fft_axis(&mut hat, axis, false);
    for j in 0..n {
        let kj = k_index(j, n);
        // the Nyquist mode has no well-defined sign for odd derivatives
        let factor = if n % 2 == 0 && j == n / 2 && order % 2 == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, kj as f64 * dk).powu(order as u32)
        };
        hat.index_axis_mut(Axis(axis), j).mapv_inplace(|z| z * factor);
    }
    fft_axis(&mut hat, axis, true);
    hat
}

/// Fornberg weights for the m-th derivative at `z` given nodes `x`.
fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Per-row stencils for a 4th-order finite-difference derivative on a
/// uniform non-periodic axis: (start index, weights).
fn fd_stencils(n: usize, h: f64, order: usize) -> Vec<(usize, Vec<f64>)> {
    // centered width: 5 points for orders 1-2, 7 for order 3;
    // boundary rows widen so one-sided accuracy stays at order 4
    let centered = if order <= 2 { 5 } else { 7 };
    let edge = order + 5;
    let half = centered / 2;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let center_w = {
        let x: Vec<f64> = (0..centered).map(|i| i as f64 * h).collect();
        fd_weights(x[half], &x, order)
    };
    (0..n)
        .map(|i| {
            if i >= half && i + half < n {
                (i - half, center_w.clone())
            } else {
                let width = edge.min(n);
                let start = if i < half { 0 } else { n - width };
                let w = fd_weights(xs[i], &xs[start..start + width], order);
                (start, w)
            }
        })
        .collect()
}

fn fd_derivative(
    values: &ArrayD<Complex64>,
    grid: &Grid,
    axis: usize,
    order: usize,
) -> ArrayD<Complex64> {
    let ax = grid.axis(axis);
    let stencils = fd_stencils(ax.n_points, ax.spacing(), order);
    let n = ax.n_points;
    let mut out = values.clone();
    let mut buf = vec![Complex64::default(); n];
    for (lane_in, mut lane_out) in values
        .lanes(Axis(axis))
        .into_iter()
        .zip(out.lanes_mut(Axis(axis)))
    {
        for (b, v) in buf.iter_mut().zip(lane_in.iter()) {
            *b = *v;
        }
        for (i, o) in lane_out.iter_mut().enumerate() {
            let (start, w) = &stencils[i];
            let mut acc = Complex64::default();
            for (k, wk) in w.iter().enumerate() {
                acc += buf[start + k] * *wk;
            }
            *o = acc;
        }
    }
    out
}

/// Partial derivative of a complex-valued array along one grid axis.
pub fn derivative_values(
    values: &ArrayD<Complex64>,
    grid: &Grid,
    axis: usize,
    order: usize,
) -> Result<ArrayD<Complex64>> {
    grid.check_axis(axis)?;
    if order == 0 || order > 3 {
        return Err(QelError::DerivativeOrder(order));
    }
    if grid.axis(axis).periodic {
        Ok(spectral_derivative(values, grid, axis, order))
    } else {
        Ok(fd_derivative(values, grid, axis, order))
    }
}

impl ScalarField {
    pub fn derivative(&self, axis: usize, order: usize) -> Result<ScalarField> {
        self.check_finite("derivative input")?;
        let complex = self.values.mapv(|v| Complex64::new(v, 0.0));
        let d = derivative_values(&complex, &self.grid, axis, order)?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: d.mapv(|z| z.re),
            time: self.time,
        })
    }
}

impl SpinorField {
    pub fn derivative(&self, axis: usize, order: usize) -> Result<SpinorField> {
        self.check_finite("derivative input")?;
        let mut out = self.clone();
        for (c, o) in self.comps.iter().zip(out.comps.iter_mut()) {
            *o = derivative_values(c, &self.grid, axis, order)?;
        }
        Ok(out)
    }

    pub fn laplacian(&self) -> Result<SpinorField> {
        let mut out = SpinorField::zeros(&self.grid, self.constants);
        out.time = self.time;
        out.normalized = false;
        for axis in 0..self.grid.dim() {
            for (c, o) in self.comps.iter().zip(out.comps.iter_mut()) {
                *o += &derivative_values(c, &self.grid, axis, 2)?;
            }
        }
        Ok(out)
    }

    /// Per-axis first derivatives of both spin components.
    pub fn gradient(&self) -> Result<Vec<[ArrayD<Complex64>; 2]>> {
        (0..self.grid.dim())
            .map(|axis| {
                Ok([
                    derivative_values(&self.comps[0], &self.grid, axis, 1)?,
                    derivative_values(&self.comps[1], &self.grid, axis, 1)?,
                ])
            })
            .collect()
    }
}

/// Divergence of a vector field, summed over the grid axes (components
/// beyond the grid dimension have no spatial variation).
pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    let mut out = ScalarField::zeros(&v.grid);
    out.time = v.time;
    for axis in 0..v.grid.dim().min(v.comps.len()) {
        let complex = v.comps[axis].mapv(|x| Complex64::new(x, 0.0));
        out.values += &derivative_values(&complex, &v.grid, axis, 1)?.mapv(|z| z.re);
    }
    Ok(out)
}

/// Axis-aligned box region used for restricted integrals and fluxes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(QelError::InvalidBox("lo/hi dimension mismatch".into()));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(h > l) {
                return Err(QelError::InvalidBox(format!("hi {h} must exceed lo {l}")));
            }
        }
        Ok(Self { lo, hi })
    }
}

/// Quadrature weights along one axis, optionally restricted to an index
/// range (trapezoid endpoints on restrictions and non-periodic axes).
fn axis_weights(grid: &Grid, axis: usize, range: Option<(usize, usize)>) -> Vec<f64> {
    let ax = grid.axis(axis);
    let h = ax.spacing();
    let n = ax.n_points;
    let (lo, hi) = range.unwrap_or((0, n - 1));
    let full_periodic = ax.periodic && range.is_none();
    let mut w = vec![0.0; n];
    if full_periodic {
        for wi in w.iter_mut() {
            *wi = h;
        }
    } else {
        for (i, wi) in w.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *wi = if i == lo || i == hi { 0.5 * h } else { h };
        }
    }
    w
}

fn index_range(grid: &Grid, axis: usize, lo: f64, hi: f64) -> Result<(usize, usize)> {
    let ax = grid.axis(axis);
    let h = ax.spacing();
    let eps = 1e-9 * h;
    let i_lo = ((lo - ax.x_min - eps) / h).ceil().max(0.0) as usize;
    let i_hi = (((hi - ax.x_min + eps) / h).floor() as isize).min(ax.n_points as isize - 1);
    if i_hi < i_lo as isize {
        return Err(QelError::EmptyRegion);
    }
    Ok((i_lo, i_hi as usize))
}

/// Integral of a scalar field over the whole grid or a box region.
pub fn integrate(f: &ScalarField, region: Option<&BoxRegion>) -> Result<f64> {
    let grid = &f.grid;
    let mut weights = Vec::with_capacity(grid.dim());
    match region {
        None => {
            for axis in 0..grid.dim() {
                weights.push(axis_weights(grid, axis, None));
            }
        }
        Some(b) => {
            if b.lo.len() != grid.dim() {
                return Err(QelError::DimensionMismatch(
                    "region dimension does not match grid".into(),
                ));
            }
            for axis in 0..grid.dim() {
                let r = index_range(grid, axis, b.lo[axis], b.hi[axis])?;
                weights.push(axis_weights(grid, axis, Some(r)));
            }
        }
    }
    let mut acc = 0.0;
    for (idx, v) in f.values.indexed_iter() {
        let mut w = 1.0;
        for (axis, &i) in idx.slice().iter().enumerate() {
            w *= weights[axis][i];
            if w == 0.0 {
                break;
            }
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Multilinear interpolation of one array at physical coordinates.
fn interpolate(values: &ArrayD<f64>, grid: &Grid, point: &[f64]) -> Result<f64> {
    let dim = grid.dim();
    let mut base = vec![0usize; dim];
    let mut frac = vec![0.0f64; dim];
    for axis in 0..dim {
        let ax = grid.axis(axis);
        let h = ax.spacing();
        let u = (point[axis] - ax.x_min) / h;
        if ax.periodic {
            let n = ax.n_points as f64;
            let wrapped = u.rem_euclid(n);
            base[axis] = (wrapped.floor() as usize) % ax.n_points;
            frac[axis] = wrapped - wrapped.floor();
        } else {
            if u < -1e-9 || u > (ax.n_points - 1) as f64 + 1e-9 {
                return Err(QelError::InvalidBox(format!(
                    "interpolation point {} outside axis {axis}",
                    point[axis]
                )));
            }
            let clamped = u.clamp(0.0, (ax.n_points - 1) as f64);
            base[axis] = (clamped.floor() as usize).min(ax.n_points - 2);
            frac[axis] = clamped - base[axis] as f64;
        }
    }
    let mut acc = 0.0;
    let mut idx = vec![0usize; dim];
    for corner in 0..(1usize << dim) {
        let mut w = 1.0;
        for axis in 0..dim {
            let up = (corner >> axis) & 1 == 1;
            let n = grid.axis(axis).n_points;
            idx[axis] = if up { (base[axis] + 1) % n } else { base[axis] };
            w *= if up { frac[axis] } else { 1.0 - frac[axis] };
        }
        if w != 0.0 {
            acc += w * values[IxDyn(&idx)];
        }
    }
    Ok(acc)
}

/// Outward flux of a vector field through the boundary of a box.
/// Midpoint rule per face cell, with face values obtained by multilinear
/// interpolation; face cells match the grid spacing of the transverse axes.
pub fn surface_integral(v: &VectorField, region: &BoxRegion) -> Result<f64> {
    let grid = &v.grid;
    let dim = grid.dim();
    if region.lo.len() != dim {
        return Err(QelError::DimensionMismatch(
            "box dimension does not match grid".into(),
        ));
    }
    for axis in 0..dim {
        let ax = grid.axis(axis);
        let pad = 1e-9 * ax.spacing();
        if !ax.periodic && (region.lo[axis] < ax.x_min + pad || region.hi[axis] > ax.x_max - pad) {
            return Err(QelError::BoxTouchesBoundary);
        }
    }
    let mut flux = 0.0;
    for axis in 0..dim.min(v.comps.len()) {
        for (side, sign) in [(region.lo[axis], -1.0), (region.hi[axis], 1.0)] {
            // transverse cell counts at the grid's own resolution
            let t_axes: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
            let cells: Vec<usize> = t_axes
                .iter()
                .map(|&a| {
                    let h = grid.spacing(a);
                    (((region.hi[a] - region.lo[a]) / h).round() as usize).max(1)
                })
                .collect();
            let steps: Vec<f64> = t_axes
                .iter()
                .zip(&cells)
                .map(|(&a, &m)| (region.hi[a] - region.lo[a]) / m as f64)
                .collect();
            let total: usize = cells.iter().product();
            let area: f64 = steps.iter().product();
            let mut point = vec![0.0; dim];
            point[axis] = side;
            for cell in 0..total {
                let mut rem = cell;
                for (t, &a) in t_axes.iter().enumerate() {
                    let i = rem % cells[t];
                    rem /= cells[t];
                    point[a] = region.lo[a] + (i as f64 + 0.5) * steps[t];
                }
                flux += sign * area * interpolate(&v.comps[axis], grid, &point)?;
            }
        }
    }
    Ok(flux)
}

/// Momentum-space kinetic expectation <P^n> along one axis of a 1-D field
/// (used by transport); normalized by the field norm.
pub fn spectral_moment(phi: &SpinorField, order: u32) -> Result<f64> {
    if phi.grid.dim() != 1 {
        return Err(QelError::DimensionMismatch(
            "momentum moments are defined for 1-D fields".into(),
        ));
    }
    let ax = phi.grid.axis(0);
    if !ax.periodic {
        return Err(QelError::Unsupported(
            "momentum moments need a periodic grid".into(),
        ));
    }
    let n = ax.n_points;
    let dk = 2.0 * PI / (ax.x_max - ax.x_min);
    let hbar = phi.constants.hbar;
    let mut num = 0.0;
    let mut den = 0.0;
    for c in &phi.comps {
        let mut hat = c.clone();
        fft_axis(&mut hat, 0, false);
        for (j, z) in hat.iter().enumerate() {
            let p = hbar * k_index(j, n) as f64 * dk;
            let w = z.norm_sqr();
            num += w * p.powi(order as i32);
            den += w;
        }
    }
    if den == 0.0 {
        return Err(QelError::NonFinite("empty field in spectral moment".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhysConstants;
    use crate::grid::{AxisSpec, Grid};
    use approx::assert_abs_diff_eq;

    fn line_field(n: usize, periodic: bool, f: impl Fn(f64) -> f64) -> ScalarField {
        let grid = if periodic {
            Grid::line_periodic(n, 0.0, 1.0).unwrap()
        } else {
            Grid::line(n, 0.0, 1.0).unwrap()
        };
        ScalarField::from_fn(&grid, |p| f(p[0]))
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        for periodic in [true, false] {
            let f = line_field(64, periodic, |_| 3.25);
            let d = f.derivative(0, 1).unwrap();
            assert!(d.max_abs() < 1e-12, "{periodic}: {}", d.max_abs());
        }
    }

    #[test]
    fn spectral_derivative_of_plane_wave() {
        // d/dx e^{ikx} = ik e^{ikx} for a grid wavenumber k
        let grid = Grid::line_periodic(64, 0.0, 2.0).unwrap();
        let k = 2.0 * PI / 2.0 * 5.0;
        let phi = SpinorField::from_fn(&grid, PhysConstants::default(), |p| {
            [Complex64::new(0.0, k * p[0]).exp(), Complex64::default()]
        });
        let d = phi.derivative(0, 1).unwrap();
        let mut err: f64 = 0.0;
        for (v, o) in phi.comps[0].iter().zip(d.comps[0].iter()) {
            err = err.max((o - Complex64::new(0.0, k) * v).norm());
        }
        assert!(err < 1e-12, "max err {err}");
    }

    #[test]
    fn second_derivative_of_sine() {
        let grid = Grid::line_periodic(64, 0.0, 1.0).unwrap();
        let f = ScalarField::from_fn(&grid, |p| (2.0 * PI * p[0]).sin());
        let d2 = f.derivative(0, 2).unwrap();
        let w = 2.0 * PI;
        let mut err: f64 = 0.0;
        for (idx, v) in d2.values.indexed_iter() {
            let x = grid.point(idx.slice())[0];
            err = err.max((v + w * w * (w * x).sin()).abs());
        }
        assert!(err < 1e-10, "max err {err}");
    }

    #[test]
    fn finite_difference_fourth_order_convergence() {
        // halving h must cut the error of every supported order by >= 2^4
        let f = |x: f64| (3.0 * x).sin() * (-x).exp();
        let exact = [
            |x: f64| (-x).exp() * (3.0 * (3.0 * x).cos() - (3.0 * x).sin()),
            |x: f64| (-x).exp() * ((3.0 * x).sin() * (1.0 - 9.0) - 6.0 * (3.0 * x).cos()),
            |x: f64| (-x).exp() * (26.0 * (3.0 * x).sin() - 18.0 * (3.0 * x).cos()),
        ];
        for order in 1..=3usize {
            let mut errs = Vec::new();
            for n in [101usize, 201] {
                let field = line_field(n, false, f);
                let d = field.derivative(0, order).unwrap();
                let mut err: f64 = 0.0;
                for (idx, v) in d.values.indexed_iter() {
                    let x = field.grid.point(idx.slice())[0];
                    err = err.max((v - exact[order - 1](x)).abs());
                }
                errs.push(err);
            }
            let gain = errs[0] / errs[1];
            assert!(gain >= 16.0 * 0.85, "order {order}: gain {gain}");
        }
    }

    #[test]
    fn derivative_is_linear() {
        let g = Grid::line(96, -1.0, 1.5).unwrap();
        let f1 = ScalarField::from_fn(&g, |p| (2.0 * p[0]).cos());
        let f2 = ScalarField::from_fn(&g, |p| p[0].powi(3));
        let combo = ScalarField::new(
            g.clone(),
            2.5 * &f1.values - 0.75 * &f2.values,
            0.0,
        )
        .unwrap();
        let d_combo = combo.derivative(0, 2).unwrap();
        let expect = 2.5 * &f1.derivative(0, 2).unwrap().values
            - 0.75 * &f2.derivative(0, 2).unwrap().values;
        let err = (&d_combo.values - &expect)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-10, "linearity violated by {err}");
    }

    #[test]
    fn integrate_constant_over_unit_box() {
        for periodic in [true, false] {
            let f = line_field(32, periodic, |_| 1.0);
            assert_abs_diff_eq!(integrate(&f, None).unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn integrate_rejects_empty_region() {
        let f = line_field(32, false, |_| 1.0);
        let region = BoxRegion::new(vec![0.4001], vec![0.4002]).unwrap();
        assert!(matches!(
            integrate(&f, Some(&region)),
            Err(QelError::EmptyRegion)
        ));
    }

    #[test]
    fn surface_integral_linear_field_unit_cube() {
        // v = (x, 0, 0): flux through any box = volume
        let grid = Grid::bounded(3, 16, 2.0).unwrap();
        let mut v = VectorField::zeros(&grid, 3);
        for (idx, val) in v.comps[0].indexed_iter_mut() {
            *val = grid.point(idx.slice())[0];
        }
        let cube = BoxRegion::new(vec![-0.5; 3], vec![0.5; 3]).unwrap();
        assert_abs_diff_eq!(surface_integral(&v, &cube).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn surface_integral_uniform_field_is_zero() {
        let grid = Grid::bounded(2, 24, 2.0).unwrap();
        let mut v = VectorField::zeros(&grid, 2);
        v.comps[0].fill(1.7);
        v.comps[1].fill(-0.4);
        let b = BoxRegion::new(vec![-0.62, -0.41], vec![0.33, 0.55]).unwrap();
        assert!(surface_integral(&v, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn surface_integral_rejects_boundary_box() {
        let grid = Grid::bounded(2, 16, 2.0).unwrap();
        let v = VectorField::zeros(&grid, 2);
        let b = BoxRegion::new(vec![-1.0, -0.2], vec![0.2, 0.2]).unwrap();
        assert!(matches!(
            surface_integral(&v, &b),
            Err(QelError::BoxTouchesBoundary)
        ));
    }

    #[test]
    fn divergence_theorem_closes() {
        // smooth decaying v on a periodic grid: volume integral of div v
        // over a box equals the boundary flux to quadrature accuracy
        let grid = Grid::new(vec![
            AxisSpec { n_points: 192, x_min: -8.0, x_max: 8.0, periodic: true },
            AxisSpec { n_points: 192, x_min: -8.0, x_max: 8.0, periodic: true },
        ])
        .unwrap();
        let mut v = VectorField::zeros(&grid, 2);
        for (idx, val) in v.comps[0].indexed_iter_mut() {
            let p = grid.point(idx.slice());
            *val = 1e-3 * (-0.25 * (p[0] * p[0] + p[1] * p[1])).exp() * p[1].cos();
        }
        for (idx, val) in v.comps[1].indexed_iter_mut() {
            let p = grid.point(idx.slice());
            *val = 1e-3 * (-0.2 * (p[0] * p[0] + p[1] * p[1])).exp() * (0.5 * p[0]).sin();
        }
        let div = divergence(&v).unwrap();
        let b = BoxRegion::new(vec![-2.0, -1.5], vec![1.5, 2.5]).unwrap();
        let vol = integrate(&div, Some(&b)).unwrap();
        let surf = surface_integral(&v, &b).unwrap();
        assert!(
            (vol - surf).abs() < 1e-6,
            "divergence theorem gap {}",
            (vol - surf).abs()
        );
    }
}
