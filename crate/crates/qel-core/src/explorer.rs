//! Negativity-region mapping for the free-motion energy density and a
//! derivative-free search for states whose density stays non-negative.
//!
//! The search space is finite superpositions of 1-D Gaussian packets:
//! they evolve freely in closed form, so the inner loop never touches a
//! grid solver. Records carry the sampling lattice so negative verdicts
//! stay falsifiable.

use crate::error::{QelError, Result};
use crate::field::{PhysConstants, SpinorField};
use crate::grid::Grid;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One Gaussian component: coeff * (pi s^2)^{-1/4}
/// exp[-(x - center)^2 / (2 s^2) + i momentum (x - center) / hbar].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussComponent {
    pub coeff_re: f64,
    pub coeff_im: f64,
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

impl GaussComponent {
    fn coeff(&self) -> Complex64 {
        Complex64::new(self.coeff_re, self.coeff_im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionSpec {
    pub components: Vec<GaussComponent>,
    #[serde(default)]
    pub normalized: bool,
}

impl SuperpositionSpec {
    pub fn new(components: Vec<GaussComponent>) -> Result<Self> {
        let spec = Self { components, normalized: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(QelError::InvalidSearch("superposition needs N >= 1 components".into()));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.width > 0.0) || !c.width.is_finite() {
                return Err(QelError::InvalidSearch(format!(
                    "component {i}: width must be > 0, got {}",
                    c.width
                )));
            }
            if ![c.coeff_re, c.coeff_im, c.center, c.momentum]
                .iter()
                .all(|v| v.is_finite())
            {
                return Err(QelError::InvalidSearch(format!("component {i}: non-finite parameter")));
            }
        }
        Ok(())
    }

    /// Closed-form overlap <G_i|G_j> of two unit-coefficient components.
    fn overlap(a: &GaussComponent, b: &GaussComponent, hbar: f64) -> Complex64 {
        let (s1, s2) = (a.width, b.width);
        let quad = 1.0 / (2.0 * s1 * s1) + 1.0 / (2.0 * s2 * s2);
        let lin = Complex64::new(
            a.center / (s1 * s1) + b.center / (s2 * s2),
            (b.momentum - a.momentum) / hbar,
        );
        let constant = Complex64::new(
            -a.center * a.center / (2.0 * s1 * s1) - b.center * b.center / (2.0 * s2 * s2),
            (a.momentum * a.center - b.momentum * b.center) / hbar,
        );
        let pref = (std::f64::consts::PI * s1 * s1).powf(-0.25)
            * (std::f64::consts::PI * s2 * s2).powf(-0.25)
            * (std::f64::consts::PI / quad).sqrt();
        pref * (lin * lin / (4.0 * quad) + constant).exp()
    }

    pub fn norm_sqr(&self, constants: PhysConstants) -> f64 {
        let mut acc = Complex64::default();
        for a in &self.components {
            for b in &self.components {
                acc += a.coeff().conj() * b.coeff() * Self::overlap(a, b, constants.hbar);
            }
        }
        acc.re
    }

    /// Rescale coefficients so the state has unit norm.
    pub fn normalize(&mut self, constants: PhysConstants) -> Result<()> {
        let n = self.norm_sqr(constants);
        if !(n > 1e-300) || !n.is_finite() {
            return Err(QelError::InvalidSearch(format!(
                "superposition norm^2 = {n} cannot be normalized"
            )));
        }
        let scale = 1.0 / n.sqrt();
        for c in &mut self.components {
            c.coeff_re *= scale;
            c.coeff_im *= scale;
        }
        self.normalized = true;
        Ok(())
    }

    /// phi(x, t) and its second x-derivative under free evolution, from the
    /// quadratic-exponent closed form of each component.
    fn phi_and_second_derivative(
        &self,
        x: f64,
        t: f64,
        constants: PhysConstants,
    ) -> (Complex64, Complex64) {
        let hbar = constants.hbar;
        let m = constants.mass;
        let mut phi = Complex64::default();
        let mut d2 = Complex64::default();
        for comp in &self.components {
            let a = comp.width / hbar;
            let b = a * comp.momentum;
            let tau = t / (m * a * a * hbar);
            let denom = Complex64::new(1.0, tau);
            let xi = (x - comp.center) / (a * hbar);
            let amp = std::f64::consts::PI.powf(-0.25) / (a * hbar * denom).sqrt();
            let q = -Complex64::new(b * b / 2.0, 0.0)
                - (Complex64::new(xi, -b)).powi(2) / (2.0 * denom);
            // d/dx and d2/dx2 of the exponent
            let qp = -Complex64::new(xi, -b) / denom / (a * hbar);
            let qpp = -Complex64::new(1.0, 0.0) / denom / (a * hbar * a * hbar);
            let val = comp.coeff() * amp * q.exp();
            phi += val;
            d2 += val * (qpp + qp * qp);
        }
        (phi, d2)
    }

    /// Free-motion energy density rho(x, t) = -hbar^2/2m Re[phi* phi''].
    pub fn rho(&self, x: f64, t: f64, constants: PhysConstants) -> f64 {
        let (phi, d2) = self.phi_and_second_derivative(x, t, constants);
        -constants.hbar * constants.hbar / (2.0 * constants.mass) * (phi.conj() * d2).re
    }

    pub fn density(&self, x: f64, t: f64, constants: PhysConstants) -> f64 {
        self.phi_and_second_derivative(x, t, constants).0.norm_sqr()
    }

    /// Grid realization of the superposition at time t (for cross-checks
    /// against the gridded observables pipeline).
    pub fn realize(&self, grid: &Grid, t: f64, constants: PhysConstants) -> Result<SpinorField> {
        if grid.dim() != 1 {
            return Err(QelError::DimensionMismatch("superpositions are 1-D".into()));
        }
        let mut f = SpinorField::from_fn(grid, constants, |p| {
            [
                self.phi_and_second_derivative(p[0], t, constants).0,
                Complex64::default(),
            ]
        });
        f.time = t;
        f.normalized = self.normalized;
        Ok(f)
    }
}

/// Sampling lattice standing in for "all x and t".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchLattice {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
}

impl Default for SearchLattice {
    fn default() -> Self {
        Self { x_min: -48.0, x_max: 48.0, n_x: 193, t_min: -3.0, t_max: 3.0, n_t: 49 }
    }
}

impl SearchLattice {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > self.x_min) || !(self.t_max > self.t_min) || self.n_x < 8 || self.n_t < 3 {
            return Err(QelError::InvalidSearch("degenerate search lattice".into()));
        }
        Ok(())
    }

    fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.n_x - 1) as f64
    }

    fn t(&self, j: usize) -> f64 {
        self.t_min + (self.t_max - self.t_min) * j as f64 / (self.n_t - 1) as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NegativityRecord {
    pub spec: SuperpositionSpec,
    pub min_rho: f64,
    pub argmin_x: f64,
    pub argmin_t: f64,
    pub lattice: SearchLattice,
    pub budget_spent: usize,
}

/// Minimum of rho over the lattice with a 3-point parabolic refinement in
/// x and t around the lattice minimum.
pub fn lattice_min_rho(
    spec: &SuperpositionSpec,
    lattice: &SearchLattice,
    constants: PhysConstants,
) -> Result<(f64, f64, f64)> {
    lattice.validate()?;
    spec.validate()?;
    let dx = (lattice.x_max - lattice.x_min) / (lattice.n_x - 1) as f64;
    // unresolved spec: a component narrower than two lattice cells can
    // hide negativity between samples
    for c in &spec.components {
        if c.width < 2.0 * dx {
            return Err(QelError::InvalidSearch(format!(
                "component width {} below two lattice cells ({})",
                c.width,
                2.0 * dx
            )));
        }
    }
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut best_idx = (0usize, 0usize);
    for j in 0..lattice.n_t {
        let t = lattice.t(j);
        for i in 0..lattice.n_x {
            let x = lattice.x(i);
            let v = spec.rho(x, t, constants);
            if v < best.0 {
                best = (v, x, t);
                best_idx = (i, j);
            }
        }
    }
    // parabolic refinement along x, then t
    let (i, j) = best_idx;
    let (mut x_star, mut t_star) = (best.1, best.2);
    if i > 0 && i + 1 < lattice.n_x {
        let (ym, y0, yp) = (
            spec.rho(lattice.x(i - 1), t_star, constants),
            best.0,
            spec.rho(lattice.x(i + 1), t_star, constants),
        );
        let denom = ym - 2.0 * y0 + yp;
        if denom.abs() > 1e-300 {
            x_star += 0.5 * dx * (ym - yp) / denom;
        }
    }
    let dt = (lattice.t_max - lattice.t_min) / (lattice.n_t - 1) as f64;
    if j > 0 && j + 1 < lattice.n_t {
        let (ym, y0, yp) = (
            spec.rho(x_star, lattice.t(j - 1), constants),
            spec.rho(x_star, t_star, constants),
            spec.rho(x_star, lattice.t(j + 1), constants),
        );
        let denom = ym - 2.0 * y0 + yp;
        if denom.abs() > 1e-300 {
            t_star += 0.5 * dt * (ym - yp) / denom;
        }
    }
    let refined = spec.rho(x_star, t_star, constants);
    if refined < best.0 {
        Ok((refined, x_star, t_star))
    } else {
        Ok((best.0, best.1, best.2))
    }
}

/// rho(x, t) of a spec over an (x, t) lattice, returned as a scalar field
/// on a two-axis grid (axis 0: x, axis 1: t), plus the minimum record.
pub fn negativity_map(
    spec: &SuperpositionSpec,
    lattice: &SearchLattice,
    constants: PhysConstants,
) -> Result<(crate::field::ScalarField, NegativityRecord)> {
    let mut spec = spec.clone();
    if !spec.normalized {
        spec.normalize(constants)?;
    }
    let grid = Grid::new(vec![
        crate::grid::AxisSpec {
            n_points: lattice.n_x,
            x_min: lattice.x_min,
            x_max: lattice.x_max,
            periodic: false,
        },
        crate::grid::AxisSpec {
            n_points: lattice.n_t,
            x_min: lattice.t_min,
            x_max: lattice.t_max,
            periodic: false,
        },
    ])?;
    let field = crate::field::ScalarField::from_fn(&grid, |p| spec.rho(p[0], p[1], constants));
    let (min_rho, argmin_x, argmin_t) = lattice_min_rho(&spec, lattice, constants)?;
    let record = NegativityRecord {
        spec,
        min_rho,
        argmin_x,
        argmin_t,
        lattice: *lattice,
        budget_spent: lattice.n_x * lattice.n_t,
    };
    Ok((field, record))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: NegativityRecord,
    /// Whether any evaluated state reached min rho >= 0.
    pub reached_nonnegative: bool,
    pub evaluations: usize,
    /// Every improvement over the previous best, in order.
    pub improvements: Vec<NegativityRecord>,
}

struct Objective<'a> {
    lattice: &'a SearchLattice,
    constants: PhysConstants,
    evaluations: usize,
}

impl Objective<'_> {
    /// Maximized quantity: min rho over the lattice for the normalized
    /// spec encoded by `params` (5 per component). Returns None for
    /// un-normalizable or under-resolved parameter points.
    fn eval(&mut self, params: &[f64]) -> Option<(f64, NegativityRecord)> {
        self.evaluations += 1;
        let mut comps = Vec::with_capacity(params.len() / 5);
        for chunk in params.chunks_exact(5) {
            comps.push(GaussComponent {
                coeff_re: chunk[0],
                coeff_im: chunk[1],
                center: chunk[2],
                momentum: chunk[3],
                width: chunk[4].exp(), // log-parameterized, always > 0
            });
        }
        let mut spec = SuperpositionSpec { components: comps, normalized: false };
        spec.normalize(self.constants).ok()?;
        let (min_rho, x, t) = lattice_min_rho(&spec, self.lattice, self.constants).ok()?;
        Some((
            min_rho,
            NegativityRecord {
                spec,
                min_rho,
                argmin_x: x,
                argmin_t: t,
                lattice: *self.lattice,
                budget_spent: self.evaluations,
            },
        ))
    }
}

/// Derivative-free ascent (Nelder-Mead simplex with random restarts) on
/// min rho over Gaussian-superposition parameters. Deterministic for a
/// fixed seed and budget; exhausting the budget is the normal exit.
pub fn conjecture_search(
    n_components: usize,
    budget: usize,
    seed: u64,
    lattice: &SearchLattice,
    constants: PhysConstants,
) -> Result<SearchOutcome> {
    if n_components == 0 {
        return Err(QelError::InvalidSearch("need at least one component".into()));
    }
    if budget < 100 {
        return Err(QelError::InvalidSearch(format!(
            "budget must be at least 100 evaluations, got {budget}"
        )));
    }
    lattice.validate()?;
    let dim = 5 * n_components;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obj = Objective { lattice, constants, evaluations: 0 };
    let mut best: Option<(f64, NegativityRecord)> = None;
    let mut improvements = Vec::new();

    let random_point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut p = Vec::with_capacity(dim);
        for _ in 0..dim / 5 {
            p.push(rng.gen_range(-1.0..1.0)); // coeff re
            p.push(rng.gen_range(-1.0..1.0)); // coeff im
            p.push(rng.gen_range(-6.0..6.0)); // center
            p.push(rng.gen_range(-2.0..2.0)); // momentum
            p.push(rng.gen_range(0.0..1.2)); // ln width in [1, ~3.3]
        }
        p
    };

    // a failed normalization or resolution guard scores -inf so the
    // simplex retreats from that region
    let mut score = |obj: &mut Objective, p: &[f64]| -> f64 {
        match obj.eval(p) {
            Some((v, rec)) => {
                let improved = best.as_ref().map_or(true, |(b, _)| v > *b);
                if improved {
                    best = Some((v, rec.clone()));
                    improvements.push(rec);
                }
                v
            }
            None => f64::NEG_INFINITY,
        }
    };

    while obj.evaluations < budget {
        // fresh simplex around a random start
        let x0 = random_point(&mut rng);
        let mut simplex: Vec<Vec<f64>> = vec![x0.clone()];
        for i in 0..dim {
            let mut p = x0.clone();
            p[i] += if i % 5 == 4 { 0.1 } else { 0.25 };
            simplex.push(p);
        }
        let mut values: Vec<f64> = simplex.iter().map(|p| score(&mut obj, p)).collect();
        let (alpha, gamma, beta_c, sigma) = (1.0, 2.0, 0.5, 0.5);
        while obj.evaluations < budget {
            // sort descending: maximizing
            let mut order: Vec<usize> = (0..simplex.len()).collect();
            order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
            let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
            let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
            simplex = reordered;
            values = revalues;
            let spread = values[0] - values[dim];
            if !spread.is_finite() || spread < 1e-10 {
                break; // converged or degenerate: restart
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|d| simplex[..dim].iter().map(|p| p[d]).sum::<f64>() / dim as f64)
                .collect();
            let worst = simplex[dim].clone();
            let reflect: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + alpha * (centroid[d] - worst[d]))
                .collect();
            let fr = score(&mut obj, &reflect);
            if fr > values[0] {
                let expand: Vec<f64> = (0..dim)
                    .map(|d| centroid[d] + gamma * (centroid[d] - worst[d]))
                    .collect();
                let fe = score(&mut obj, &expand);
                if fe > fr {
                    simplex[dim] = expand;
                    values[dim] = fe;
                } else {
                    simplex[dim] = reflect;
                    values[dim] = fr;
                }
            } else if fr > values[dim - 1] {
                simplex[dim] = reflect;
                values[dim] = fr;
            } else {
                let contract: Vec<f64> = (0..dim)
                    .map(|d| centroid[d] + beta_c * (worst[d] - centroid[d]))
                    .collect();
                let fc = score(&mut obj, &contract);
                if fc > values[dim] {
                    simplex[dim] = contract;
                    values[dim] = fc;
                } else {
                    // shrink toward the best vertex
                    for i in 1..=dim {
                        for d in 0..dim {
                            simplex[i][d] = simplex[0][d] + sigma * (simplex[i][d] - simplex[0][d]);
                        }
                        values[i] = score(&mut obj, &simplex[i]);
                        if obj.evaluations >= budget {
                            break;
                        }
                    }
                }
            }
        }
    }
    let (best_val, best_rec) = best.ok_or_else(|| {
        QelError::InvalidSearch("search produced no evaluable state".into())
    })?;
    Ok(SearchOutcome {
        reached_nonnegative: best_val >= 0.0,
        best: best_rec,
        evaluations: obj.evaluations,
        improvements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn consts() -> PhysConstants {
        PhysConstants::default()
    }

    fn single(a: f64, b: f64) -> SuperpositionSpec {
        // paper parameterization: width = a hbar, momentum = b/a
        let mut s = SuperpositionSpec::new(vec![GaussComponent {
            coeff_re: 1.0,
            coeff_im: 0.0,
            center: 0.0,
            momentum: b / a,
            width: a,
        }])
        .unwrap();
        s.normalize(consts()).unwrap();
        s
    }

    #[test]
    fn single_gaussian_rho_matches_closed_form() {
        let (a, b) = (1.0, 0.7);
        let spec = single(a, b);
        for &(xi, tau) in &[(0.0, 0.0), (1.5, 0.5), (-2.0, 2.0), (3.0, -1.0)] {
            let x = xi * a;
            let t = tau * a * a;
            let forms = crate::catalog::gaussian_closed_forms(a, b, xi, tau, consts());
            let dens = crate::catalog::gaussian_density(a, b, xi, tau, consts());
            assert_abs_diff_eq!(
                spec.rho(x, t, consts()),
                forms.rho_over_density * dens,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn overlap_normalization() {
        let mut spec = SuperpositionSpec::new(vec![
            GaussComponent { coeff_re: 0.8, coeff_im: 0.0, center: -3.0, momentum: 1.0, width: 1.0 },
            GaussComponent { coeff_re: 0.5, coeff_im: 0.3, center: 2.0, momentum: -0.5, width: 1.4 },
        ])
        .unwrap();
        spec.normalize(consts()).unwrap();
        assert_abs_diff_eq!(spec.norm_sqr(consts()), 1.0, epsilon = 1e-12);
        // numeric quadrature agrees
        let (n, l) = (16384, 160.0);
        let mut acc = 0.0;
        for i in 0..n {
            let x = -l / 2.0 + l * i as f64 / n as f64;
            acc += spec.density(x, 0.0, consts());
        }
        assert_abs_diff_eq!(acc * l / n as f64, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn negativity_confined_to_unit_tau_window() {
        // b = 0: negative region exists exactly for |tau| < 1
        let spec = single(1.0, 0.0);
        let lattice = SearchLattice { x_min: -48.0, x_max: 48.0, n_x: 385, t_min: -0.1, t_max: 0.1, n_t: 5 };
        for &tau in &[0.0, 0.5, 0.9] {
            let lat = SearchLattice { t_min: tau - 0.01, t_max: tau + 0.01, n_t: 3, ..lattice };
            let (min, _, _) = lattice_min_rho(&spec, &lat, consts()).unwrap();
            assert!(min < 0.0, "tau={tau}: min {min}");
        }
        for &tau in &[1.0, 1.05, 2.0] {
            let lat = SearchLattice { t_min: tau - 0.01, t_max: tau + 0.01, n_t: 3, ..lattice };
            let (min, _, _) = lattice_min_rho(&spec, &lat, consts()).unwrap();
            assert!(min >= -1e-300, "tau={tau}: min {min}");
        }
    }

    #[test]
    fn single_gaussian_negative_at_xi_beyond_one() {
        // tau = 0, b = 0: rho < 0 exactly where xi^2 > 1
        let spec = single(1.0, 0.0);
        assert!(spec.rho(1.2, 0.0, consts()) < 0.0);
        assert!(spec.rho(0.8, 0.0, consts()) > 0.0);
        let root_gap = spec.rho(1.0, 0.0, consts());
        assert!(root_gap.abs() < 1e-12, "rho at xi=1: {root_gap}");
    }

    #[test]
    fn widening_lattice_never_raises_min() {
        let spec = single(1.0, 0.4);
        let narrow = SearchLattice { x_min: -8.0, x_max: 8.0, n_x: 65, t_min: -0.5, t_max: 0.5, n_t: 9 };
        let wide = SearchLattice { x_min: -16.0, x_max: 16.0, n_x: 129, ..narrow };
        let (m_narrow, _, _) = lattice_min_rho(&spec, &narrow, consts()).unwrap();
        let (m_wide, _, _) = lattice_min_rho(&spec, &wide, consts()).unwrap();
        assert!(m_wide <= m_narrow + 1e-15);
    }

    #[test]
    fn under_resolved_spec_rejected() {
        let spec = SuperpositionSpec::new(vec![GaussComponent {
            coeff_re: 1.0,
            coeff_im: 0.0,
            center: 0.0,
            momentum: 0.0,
            width: 0.05,
        }])
        .unwrap();
        let lattice = SearchLattice::default();
        assert!(matches!(
            lattice_min_rho(&spec, &lattice, consts()),
            Err(QelError::InvalidSearch(_))
        ));
    }

    #[test]
    fn search_is_deterministic_and_single_gaussians_stay_negative() {
        let lattice = SearchLattice { x_min: -24.0, x_max: 24.0, n_x: 97, t_min: -2.0, t_max: 2.0, n_t: 17 };
        let a = conjecture_search(1, 300, 7, &lattice, consts()).unwrap();
        let b = conjecture_search(1, 300, 7, &lattice, consts()).unwrap();
        assert_eq!(serde_json::to_string(&a.best).unwrap(), serde_json::to_string(&b.best).unwrap());
        assert_eq!(a.evaluations, b.evaluations);
        assert!(a.best.min_rho < 0.0);
        assert!(!a.reached_nonnegative);
    }
}
