//! Energy densities and currents evaluated on fields: the symmetrized
//! (Laplacian / TMH) density rho and its current J, the alternative pair
//! (rho~, J_D), the Madelung decomposition, the spin vector Upsilon with
//! its holographic density rho_s, the rest-energy split, and the Dirac
//! density/flux used by the non-relativistic limit checks.

use crate::calculus::{derivative_values, divergence, integrate};
use crate::error::{QelError, Result};
use crate::field::{BispinorField, PhysConstants, ScalarField, SpinorField, VectorField};
use crate::potential::{PotentialKind, PotentialSpec};
use ndarray::{ArrayD, Dimension, IxDyn};
use num_complex::Complex64;

type SpinPair = [ArrayD<Complex64>; 2];

fn zeros_like(phi: &SpinorField) -> ArrayD<Complex64> {
    ArrayD::zeros(IxDyn(&phi.grid.shape()))
}

/// sigma_j applied to a spin pair.
fn sigma_apply(j: usize, pair: &SpinPair) -> SpinPair {
    let i = Complex64::new(0.0, 1.0);
    match j {
        0 => [pair[1].clone(), pair[0].clone()],
        1 => [pair[1].mapv(|v| -i * v), pair[0].mapv(|v| i * v)],
        2 => [pair[0].clone(), pair[1].mapv(|v| -v)],
        _ => unreachable!("pauli index"),
    }
}

/// Pointwise bra^dag ket summed over spin components.
fn pair_inner(bra: &SpinPair, ket: &SpinPair) -> ArrayD<Complex64> {
    let mut out = bra[0].mapv(|v| v.conj()) * &ket[0];
    out += &(bra[1].mapv(|v| v.conj()) * &ket[1]);
    out
}

fn real_part(a: &ArrayD<Complex64>) -> ArrayD<f64> {
    a.mapv(|z| z.re)
}

fn imag_part(a: &ArrayD<Complex64>) -> ArrayD<f64> {
    a.mapv(|z| z.im)
}

fn potential_values(phi: &SpinorField, pot: &PotentialSpec) -> Result<Option<ArrayD<f64>>> {
    pot.values_at(&phi.grid, phi.constants.mass, phi.time)
}

/// Non-relativistic energy density
/// rho = -hbar^2/4m ([Lap phi^dag] phi + phi^dag Lap phi) + U phi^dag phi.
pub fn rho(phi: &SpinorField, pot: &PotentialSpec) -> Result<ScalarField> {
    let c = phi.constants;
    let lap = phi.laplacian()?;
    // conjugate before differentiating: [Lap phi^dag] phi
    let mut conj_phi = phi.clone();
    for comp in &mut conj_phi.comps {
        comp.mapv_inplace(|z| z.conj());
    }
    let lap_conj = conj_phi.laplacian()?;
    let mut values = ArrayD::zeros(IxDyn(&phi.grid.shape()));
    for s in 0..2 {
        values += &real_part(&(&lap_conj.comps[s] * &phi.comps[s]));
        values += &real_part(&(phi.comps[s].mapv(|z| z.conj()) * &lap.comps[s]));
    }
    values *= -c.hbar * c.hbar / (4.0 * c.mass);
    if let Some(u) = potential_values(phi, pot)? {
        values += &(&u * &phi.density().values);
    }
    ScalarField::new(phi.grid.clone(), values, phi.time)
}

/// The same density through the anticommutator route,
/// Re[phi^dag (H phi)]; agrees with [`rho`] to machine precision.
pub fn tmh_rho(phi: &SpinorField, pot: &PotentialSpec) -> Result<ScalarField> {
    let h_phi = crate::propagate::apply_h(phi, pot)?;
    let values = real_part(&pair_inner(&phi.comps, &h_phi.comps));
    ScalarField::new(phi.grid.clone(), values, phi.time)
}

/// Energy current J = hbar^2/2m Re[phi^dag grad(phidot) - (grad phi^dag) phidot].
/// `phidot` must be -(i/hbar) H phi.
pub fn current_j(phi: &SpinorField, phidot: &SpinorField) -> Result<VectorField> {
    phi.check_same_grid(phidot)?;
    let c = phi.constants;
    let scale = c.hbar * c.hbar / (2.0 * c.mass);
    let mut comps = Vec::with_capacity(phi.grid.dim());
    for axis in 0..phi.grid.dim() {
        let dphi = phi.derivative(axis, 1)?;
        let dphidot = phidot.derivative(axis, 1)?;
        let mut v = real_part(&pair_inner(&phi.comps, &dphidot.comps));
        v -= &real_part(&pair_inner(&dphi.comps, &phidot.comps));
        v *= scale;
        comps.push(v);
    }
    Ok(VectorField { grid: phi.grid.clone(), comps, time: phi.time })
}

/// Alternative (gradient-form) density rho~ = hbar^2/2m grad phi^dag . grad phi
/// + U phi^dag phi; non-negative for free motion.
pub fn rho_alt(phi: &SpinorField, pot: &PotentialSpec) -> Result<ScalarField> {
    let c = phi.constants;
    let mut values = ArrayD::zeros(IxDyn(&phi.grid.shape()));
    for axis in 0..phi.grid.dim() {
        let d = phi.derivative(axis, 1)?;
        for s in 0..2 {
            values += &d.comps[s].mapv(|z| z.norm_sqr());
        }
    }
    values *= c.hbar * c.hbar / (2.0 * c.mass);
    if let Some(u) = potential_values(phi, pot)? {
        values += &(&u * &phi.density().values);
    }
    ScalarField::new(phi.grid.clone(), values, phi.time)
}

/// Current of the Dirac-limit route,
/// J_D = i hbar U/2m (grad phi^dag phi - phi^dag grad phi)
///     + i hbar^3/8m^2 (phi^dag grad Lap phi - [d_i phi^dag] grad d_i phi
///                      + grad d_i phi^dag [d_i phi] - [grad Lap phi^dag] phi).
/// Differs from [`current_j`] by a rotor.
pub fn current_jd(phi: &SpinorField, pot: &PotentialSpec) -> Result<VectorField> {
    let c = phi.constants;
    let dim = phi.grid.dim();
    let u = potential_values(phi, pot)?;
    let grad: Vec<SpinorField> = (0..dim)
        .map(|axis| phi.derivative(axis, 1))
        .collect::<Result<_>>()?;
    let lap = phi.laplacian()?;
    let mut comps = Vec::with_capacity(dim);
    for j in 0..dim {
        // i hbar U/2m (d_j phi^dag phi - phi^dag d_j phi) = hbar U/m Im[phi^dag d_j phi]
        let mut v = ArrayD::zeros(IxDyn(&phi.grid.shape()));
        if let Some(u) = &u {
            let probe = imag_part(&pair_inner(&phi.comps, &grad[j].comps));
            v += &(&probe * u);
            v *= c.hbar / c.mass;
        }
        // -hbar^3/4m^2 ( Im[phi^dag d_j Lap phi] - sum_i Im[d_i phi^dag d_j d_i phi] )
        let d_j_lap = lap.derivative(j, 1)?;
        let mut second = imag_part(&pair_inner(&phi.comps, &d_j_lap.comps));
        for g_i in grad.iter() {
            let d_j_d_i = g_i.derivative(j, 1)?;
            second -= &imag_part(&pair_inner(&g_i.comps, &d_j_d_i.comps));
        }
        second *= -c.hbar.powi(3) / (4.0 * c.mass * c.mass);
        v += &second;
        comps.push(v);
    }
    Ok(VectorField { grid: phi.grid.clone(), comps, time: phi.time })
}

/// Modulus threshold below which Madelung velocities are masked.
pub const MADELUNG_NODE_THRESHOLD: f64 = 1e-10;

/// One spin component of the hydrodynamic decomposition.
#[derive(Debug, Clone)]
pub struct MadelungComponent {
    pub density: ScalarField,
    pub velocity: VectorField,
    pub kinetic: ScalarField,
    pub potential: ScalarField,
    pub quantum: ScalarField,
}

#[derive(Debug, Clone)]
pub struct MadelungDecomposition {
    pub comps: Vec<MadelungComponent>,
}

impl MadelungDecomposition {
    /// Pointwise sum of all terms over spin components; equals rho away
    /// from wavefunction nodes.
    pub fn total(&self) -> ScalarField {
        let mut out = ScalarField::zeros(&self.comps[0].density.grid);
        out.time = self.comps[0].density.time;
        for c in &self.comps {
            out.values += &c.kinetic.values;
            out.values += &c.potential.values;
            out.values += &c.quantum.values;
        }
        out
    }
}

/// Hydrodynamic (Madelung) decomposition per spin component: fluid
/// velocity from the phase gradient, kinetic, potential, and quantum
/// (Bohm) energy terms weighted by the component density.
pub fn madelung(phi: &SpinorField, pot: &PotentialSpec) -> Result<MadelungDecomposition> {
    let c = phi.constants;
    let dim = phi.grid.dim();
    let u = potential_values(phi, pot)?;
    let mut comps = Vec::with_capacity(2);
    for s in 0..2 {
        let n = phi.comps[s].mapv(|z| z.norm_sqr());
        let modulus = ScalarField::new(phi.grid.clone(), n.mapv(f64::sqrt), phi.time)?;
        let mask = modulus.values.mapv(|m| if m > MADELUNG_NODE_THRESHOLD { 1.0 } else { 0.0 });
        // v = hbar Im[phi* grad phi] / (m n)
        let mut vel = Vec::with_capacity(dim);
        let mut v2 = ArrayD::zeros(IxDyn(&phi.grid.shape()));
        for axis in 0..dim {
            let d = derivative_values(&phi.comps[s], &phi.grid, axis, 1)?;
            let mut va = (phi.comps[s].mapv(|z| z.conj()) * &d).mapv(|z| z.im);
            va *= c.hbar / c.mass;
            va.zip_mut_with(&n, |v, nn| {
                *v = if *nn > MADELUNG_NODE_THRESHOLD * MADELUNG_NODE_THRESHOLD {
                    *v / *nn
                } else {
                    0.0
                }
            });
            va *= &mask;
            v2 += &va.mapv(|x| x * x);
            vel.push(va);
        }
        let kinetic = ScalarField::new(
            phi.grid.clone(),
            0.5 * c.mass * &v2 * &n,
            phi.time,
        )?;
        let potential = ScalarField::new(
            phi.grid.clone(),
            match &u {
                Some(u) => u * &n,
                None => ArrayD::zeros(IxDyn(&phi.grid.shape())),
            },
            phi.time,
        )?;
        // quantum term -(hbar^2/2m) |phi| Lap|phi|, masked at nodes
        let mut lap_mod = ArrayD::zeros(IxDyn(&phi.grid.shape()));
        for axis in 0..dim {
            lap_mod += &modulus.derivative(axis, 2)?.values;
        }
        let quantum = ScalarField::new(
            phi.grid.clone(),
            -(c.hbar * c.hbar / (2.0 * c.mass)) * &modulus.values * &lap_mod * &mask,
            phi.time,
        )?;
        comps.push(MadelungComponent {
            density: ScalarField::new(phi.grid.clone(), n, phi.time)?,
            velocity: VectorField { grid: phi.grid.clone(), comps: vel, time: phi.time },
            kinetic,
            potential,
            quantum,
        });
    }
    Ok(MadelungDecomposition { comps })
}

/// Landau-gauge vector potential components A_k(r) on the grid, when the
/// potential carries a uniform magnetic field.
fn gauge_field(phi: &SpinorField, pot: &PotentialSpec) -> Result<Option<ArrayD<f64>>> {
    match pot.kind {
        PotentialKind::UniformMagnetic { b_field } => {
            if phi.grid.dim() < 2 {
                return Err(QelError::InvalidPotential(
                    "uniform magnetic field needs a 2-D or 3-D grid".into(),
                ));
            }
            let mut a_x = ArrayD::zeros(IxDyn(&phi.grid.shape()));
            for (idx, v) in a_x.indexed_iter_mut() {
                *v = -b_field * phi.grid.axis(1).coord(idx[1]);
            }
            Ok(Some(a_x))
        }
        _ => Ok(None),
    }
}

/// Spin energy vector Upsilon = hbar/4m Re[phi^dag sigma x (P + |e|A) phi].
/// Always a 3-vector; components beyond the grid dimension are still
/// meaningful (they just have no in-grid divergence contribution).
pub fn upsilon(phi: &SpinorField, pot: &PotentialSpec) -> Result<VectorField> {
    let c = phi.constants;
    let dim = phi.grid.dim();
    let grad = phi.gradient()?;
    let a_x = gauge_field(phi, pot)?;
    let minus_i_hbar = Complex64::new(0.0, -c.hbar);
    // V_k phi = -i hbar d_k phi + |e| A_k phi
    let mut v: Vec<SpinPair> = (0..3)
        .map(|k| {
            if k < dim {
                [
                    grad[k][0].mapv(|z| minus_i_hbar * z),
                    grad[k][1].mapv(|z| minus_i_hbar * z),
                ]
            } else {
                [zeros_like(phi), zeros_like(phi)]
            }
        })
        .collect();
    if let Some(a_x) = &a_x {
        let q = c.charge_magnitude;
        for s in 0..2 {
            v[0][s] += &(&phi.comps[s] * &a_x.mapv(|a| Complex64::new(q * a, 0.0)));
        }
    }
    let scale = c.hbar / (4.0 * c.mass);
    let mut comps = Vec::with_capacity(3);
    for i in 0..3 {
        let (j1, k1, j2, k2) = match i {
            0 => (1, 2, 2, 1), // sigma_y V_z - sigma_z V_y
            1 => (2, 0, 0, 2), // sigma_z V_x - sigma_x V_z
            _ => (0, 1, 1, 0), // sigma_x V_y - sigma_y V_x
        };
        let plus = pair_inner(&phi.comps, &sigma_apply(j1, &v[k1]));
        let minus = pair_inner(&phi.comps, &sigma_apply(j2, &v[k2]));
        let mut vals = real_part(&plus);
        vals -= &real_part(&minus);
        vals *= scale;
        comps.push(vals);
    }
    Ok(VectorField { grid: phi.grid.clone(), comps, time: phi.time })
}

/// Holographic spin energy density rho_s = div Upsilon (definitionally a
/// divergence, so its whole-grid integral vanishes).
pub fn rho_s(phi: &SpinorField, pot: &PotentialSpec) -> Result<ScalarField> {
    divergence(&upsilon(phi, pot)?)
}

/// Cross-gradient route to the same density,
/// rho_s = hbar^2/4m Im[eps_ijk d_i phi^dag sigma_j d_k phi] + gauge terms;
/// kept as an independent cross-check of [`rho_s`].
pub fn rho_s_cross(phi: &SpinorField, pot: &PotentialSpec) -> Result<ScalarField> {
    let c = phi.constants;
    let grad = phi.gradient()?;
    let mut values = cross_gradient_term(phi, &grad);
    if let PotentialKind::UniformMagnetic { b_field } = pot.kind {
        // div of the |e| A part: hbar|e|/4m [ (curl m) . A - m . B ]
        let q = c.charge_magnitude;
        let m_z = real_part(&pair_inner(&phi.comps, &sigma_apply(2, &phi.comps)));
        let m_z_field = ScalarField::new(phi.grid.clone(), m_z.clone(), phi.time)?;
        let d_y_mz = m_z_field.derivative(1, 1)?.values;
        let mut curl_dot_a = ArrayD::zeros(IxDyn(&phi.grid.shape()));
        for (idx, v) in curl_dot_a.indexed_iter_mut() {
            let y = phi.grid.axis(1).coord(idx[1]);
            *v = d_y_mz[idx.slice()] * (-b_field * y);
        }
        if phi.grid.dim() == 3 {
            let m_y = real_part(&pair_inner(&phi.comps, &sigma_apply(1, &phi.comps)));
            let m_y_field = ScalarField::new(phi.grid.clone(), m_y, phi.time)?;
            let d_z_my = m_y_field.derivative(2, 1)?.values;
            for (idx, v) in curl_dot_a.indexed_iter_mut() {
                let y = phi.grid.axis(1).coord(idx[1]);
                *v -= d_z_my[idx.slice()] * (-b_field * y);
            }
        }
        values += &(curl_dot_a * (c.hbar * q / (4.0 * c.mass)));
        values -= &(m_z * (c.hbar * q * b_field / (4.0 * c.mass)));
    }
    ScalarField::new(phi.grid.clone(), values, phi.time)
}

fn cross_gradient_term(phi: &SpinorField, grad: &[SpinPair]) -> ArrayD<f64> {
    let c = phi.constants;
    let dim = phi.grid.dim();
    let mut values = ArrayD::zeros(IxDyn(&phi.grid.shape()));
    const EPS: [(usize, usize, usize, f64); 6] = [
        (0, 1, 2, 1.0),
        (1, 2, 0, 1.0),
        (2, 0, 1, 1.0),
        (0, 2, 1, -1.0),
        (2, 1, 0, -1.0),
        (1, 0, 2, -1.0),
    ];
    for &(i, j, k, sign) in &EPS {
        if i >= dim || k >= dim {
            continue;
        }
        let term = pair_inner(&grad[i], &sigma_apply(j, &grad[k]));
        values += &(imag_part(&term) * sign);
    }
    values * (c.hbar * c.hbar / (4.0 * c.mass))
}

/// Output of the rest-energy split: the lower spinor chi, the bulk density
/// n0 >= 0, and the spin part rho_s, satisfying pointwise
/// m c^2 (phi^dag phi + chi^dag chi) = m c^2 n0 + rho_s.
#[derive(Debug, Clone)]
pub struct RestSplit {
    pub chi: SpinorField,
    pub n0: ScalarField,
    pub rho_s: ScalarField,
}

/// Lower-spinor split chi = -i hbar/(2 m c) (sigma . grad) phi at a given
/// speed of light.
pub fn rest_split(phi: &SpinorField, c_light: f64) -> Result<RestSplit> {
    if !(c_light > 0.0) {
        return Err(QelError::InvalidPacket(format!(
            "speed of light must be positive, got {c_light}"
        )));
    }
    let c = phi.constants;
    let dim = phi.grid.dim();
    let grad = phi.gradient()?;
    let mut chi = SpinorField::zeros(&phi.grid, PhysConstants { c: c_light, ..c });
    chi.time = phi.time;
    for k in 0..dim {
        let sg = sigma_apply(k, &grad[k]);
        chi.comps[0] += &sg[0];
        chi.comps[1] += &sg[1];
    }
    let pref = Complex64::new(0.0, -c.hbar / (2.0 * c.mass * c_light));
    for comp in &mut chi.comps {
        comp.mapv_inplace(|z| pref * z);
    }
    // n0 = phi^dag phi + hbar^2/(4 m^2 c^2) grad phi^dag . grad phi
    let mut grad_sq = ArrayD::zeros(IxDyn(&phi.grid.shape()));
    for g in &grad {
        for s in 0..2 {
            grad_sq += &g[s].mapv(|z| z.norm_sqr());
        }
    }
    let mut n0 = phi.density().values;
    n0 += &(grad_sq * (c.hbar * c.hbar / (4.0 * c.mass * c.mass * c_light * c_light)));
    let rho_s_vals = cross_gradient_term(phi, &grad);
    Ok(RestSplit {
        chi,
        n0: ScalarField::new(phi.grid.clone(), n0, phi.time)?,
        rho_s: ScalarField::new(phi.grid.clone(), rho_s_vals, phi.time)?,
    })
}

/// Bispinor assembled from the upper/lower split with the rest-energy
/// phase factor e^{-i m c^2 t / hbar}.
pub fn assemble_bispinor(phi: &SpinorField, chi: &SpinorField) -> Result<BispinorField> {
    phi.check_same_grid(chi)?;
    let constants = chi.constants;
    let phase = Complex64::new(
        0.0,
        -constants.mass * constants.c * constants.c * phi.time / constants.hbar,
    )
    .exp();
    let mut out = BispinorField::zeros(&phi.grid, constants);
    out.time = phi.time;
    for s in 0..2 {
        out.comps[s] = phi.comps[s].mapv(|z| z * phase);
        out.comps[s + 2] = chi.comps[s].mapv(|z| z * phase);
    }
    Ok(out)
}

/// alpha_i for a bispinor: swaps upper and lower blocks through sigma_i.
fn alpha_apply(i: usize, psi: &BispinorField) -> [ArrayD<Complex64>; 4] {
    let upper: SpinPair = [psi.comps[0].clone(), psi.comps[1].clone()];
    let lower: SpinPair = [psi.comps[2].clone(), psi.comps[3].clone()];
    let su = sigma_apply(i, &lower);
    let sl = sigma_apply(i, &upper);
    [su[0].clone(), su[1].clone(), sl[0].clone(), sl[1].clone()]
}

/// Dirac Hamiltonian: H psi = m c^2 beta psi + U psi - i hbar c (alpha . grad) psi.
pub fn dirac_apply_h(psi: &BispinorField, pot: &PotentialSpec) -> Result<BispinorField> {
    if pot.is_magnetic() {
        return Err(QelError::Unsupported(
            "magnetic fields are not supported for the Dirac operator".into(),
        ));
    }
    let c = psi.constants;
    let rest = c.mass * c.c * c.c;
    let mut out = BispinorField::zeros(&psi.grid, c);
    out.time = psi.time;
    // beta: +1 on the upper block, -1 on the lower
    for s in 0..2 {
        out.comps[s] = psi.comps[s].mapv(|z| z * rest);
        out.comps[s + 2] = psi.comps[s + 2].mapv(|z| z * -rest);
    }
    if let Some(u) = pot.values_at(&psi.grid, c.mass, psi.time)? {
        // the potential acts diagonally on all four components
        let uc = u.mapv(|x| Complex64::new(x, 0.0));
        for (s, comp) in out.comps.iter_mut().enumerate() {
            *comp += &(&uc * &psi.comps[s]);
        }
    }
    let pref = Complex64::new(0.0, -c.hbar * c.c);
    for axis in 0..psi.grid.dim() {
        let mut dpsi = BispinorField::zeros(&psi.grid, c);
        for s in 0..4 {
            dpsi.comps[s] = derivative_values(&psi.comps[s], &psi.grid, axis, 1)?;
        }
        let a = alpha_apply(axis, &dpsi);
        for s in 0..4 {
            out.comps[s] += &a[s].mapv(|z| pref * z);
        }
    }
    Ok(out)
}

/// psidot = -(i/hbar) H psi for the Dirac Hamiltonian.
pub fn dirac_psidot(psi: &BispinorField, pot: &PotentialSpec) -> Result<BispinorField> {
    let mut h = dirac_apply_h(psi, pot)?;
    let pref = Complex64::new(0.0, -1.0 / psi.constants.hbar);
    for comp in &mut h.comps {
        comp.mapv_inplace(|z| pref * z);
    }
    Ok(h)
}

/// Dirac energy density: rho_D = i hbar/2 (psi^dag psidot - psidot^dag psi).
pub fn dirac_rho(psi: &BispinorField, psidot: &BispinorField) -> Result<ScalarField> {
    psi.check_same_grid(psidot)?;
    let mut values = ArrayD::zeros(IxDyn(&psi.grid.shape()));
    for s in 0..4 {
        values += &(psi.comps[s].mapv(|z| z.conj()) * &psidot.comps[s]).mapv(|z| z.im);
    }
    values *= -psi.constants.hbar;
    ScalarField::new(psi.grid.clone(), values, psi.time)
}

/// Dirac energy flux: J_D,i = i hbar c/2 (psi^dag alpha_i psidot - psidot^dag alpha_i psi).
pub fn dirac_j(psi: &BispinorField, psidot: &BispinorField) -> Result<VectorField> {
    psi.check_same_grid(psidot)?;
    let c = psi.constants;
    let mut comps = Vec::with_capacity(psi.grid.dim());
    for axis in 0..psi.grid.dim() {
        let a = alpha_apply(axis, psidot);
        let mut v = ArrayD::zeros(IxDyn(&psi.grid.shape()));
        for s in 0..4 {
            v += &(psi.comps[s].mapv(|z| z.conj()) * &a[s]).mapv(|z| z.im);
        }
        v *= -c.hbar * c.c;
        comps.push(v);
    }
    Ok(VectorField { grid: psi.grid.clone(), comps, time: psi.time })
}

/// Independent mean-energy route: spectral kinetic term plus the position
/// expectation of U. Requires all axes periodic (the spectral route) or
/// falls back to the gradient-square form on bounded grids.
pub fn mean_energy(phi: &SpinorField, pot: &PotentialSpec) -> Result<f64> {
    if pot.is_magnetic() {
        return Err(QelError::Unsupported(
            "mean energy for magnetic potentials uses <phi|H|phi> directly".into(),
        ));
    }
    let c = phi.constants;
    // <T> = hbar^2/2m integral |grad phi|^2 (integration by parts)
    let mut kinetic_density = ScalarField::zeros(&phi.grid);
    for axis in 0..phi.grid.dim() {
        let d = phi.derivative(axis, 1)?;
        for s in 0..2 {
            kinetic_density.values += &d.comps[s].mapv(|z| z.norm_sqr());
        }
    }
    let mut total = c.hbar * c.hbar / (2.0 * c.mass) * integrate(&kinetic_density, None)?;
    if let Some(u) = potential_values(phi, pot)? {
        let pu = ScalarField::new(phi.grid.clone(), u * &phi.density().values, phi.time)?;
        total += integrate(&pu, None)?;
    }
    Ok(total)
}

/// Time-reversed spinor pi_hat phi^* with pi_hat = [[0, -1], [1, 0]].
pub fn time_reverse(phi: &SpinorField) -> SpinorField {
    let mut out = phi.clone();
    out.comps[0] = phi.comps[1].mapv(|z| -z.conj());
    out.comps[1] = phi.comps[0].mapv(|z| z.conj());
    out
}

/// Space-inverted field phi(-r); the grid must be reflection symmetric.
pub fn space_invert(phi: &SpinorField) -> Result<SpinorField> {
    if !phi.grid.is_reflection_symmetric() {
        return Err(QelError::Unsupported(
            "space inversion needs a grid symmetric about the origin".into(),
        ));
    }
    let mut out = phi.clone();
    let shape = phi.grid.shape();
    for s in 0..2 {
        for (idx, v) in out.comps[s].indexed_iter_mut() {
            let src: Vec<usize> = idx
                .slice()
                .iter()
                .zip(&shape)
                .zip(phi.grid.axes())
                .map(|((&i, &n), ax)| {
                    if ax.periodic {
                        (n - i) % n
                    } else {
                        n - 1 - i
                    }
                })
                .collect();
            *v = phi.comps[s][IxDyn(&src)];
        }
    }
    Ok(out)
}

pub fn space_invert_scalar(f: &ScalarField) -> Result<ScalarField> {
    if !f.grid.is_reflection_symmetric() {
        return Err(QelError::Unsupported(
            "space inversion needs a grid symmetric about the origin".into(),
        ));
    }
    let mut out = f.clone();
    let shape = f.grid.shape();
    for (idx, v) in out.values.indexed_iter_mut() {
        let src: Vec<usize> = idx
            .slice()
            .iter()
            .zip(&shape)
            .zip(f.grid.axes())
            .map(|((&i, &n), ax)| if ax.periodic { (n - i) % n } else { n - 1 - i })
            .collect();
        *v = f.values[IxDyn(&src)];
    }
    Ok(out)
}
