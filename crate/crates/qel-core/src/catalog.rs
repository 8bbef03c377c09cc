//! Analytic states and their closed-form observables, used as oracles for
//! the numeric pipeline: free Gaussian packets, Airy packets, plane waves,
//! oscillator eigenstates, stationary scattering states, and Landau levels.

use crate::error::{QelError, Result};
use crate::field::{PhysConstants, SpinorField};
use crate::grid::Grid;
use crate::special::{airy_ai, hermite_fn_pair};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

/// Normalized two-component spin state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinKet(pub [Complex64; 2]);

impl Default for SpinKet {
    fn default() -> Self {
        Self([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
    }
}

impl SpinKet {
    pub fn up() -> Self {
        Self::default()
    }

    pub fn down() -> Self {
        Self([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let ket = Self([up, down]);
        ket.validate()?;
        Ok(ket)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.0[0].norm_sqr() + self.0[1].norm_sqr();
        if (n.sqrt() - 1.0).abs() > 1e-12 {
            return Err(QelError::InvalidPacket(format!(
                "spin_ket must be normalized to 1 +/- 1e-12, got norm {}",
                n.sqrt()
            )));
        }
        Ok(())
    }

    /// Mean magnetization <s|sigma|s>.
    pub fn magnetization(&self) -> [f64; 3] {
        let [u, d] = self.0;
        let cross = u.conj() * d;
        [
            2.0 * cross.re,
            2.0 * cross.im,
            u.norm_sqr() - d.norm_sqr(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PacketKind {
    PlaneWave { k: Vec<f64> },
    Gaussian { a: f64, b: f64 },
    Airy { beta: f64 },
    Scattering { k: f64, f: f64 },
    Landau { n: u32, k_x: f64, k_z: f64, s: f64, b_field: f64 },
    HoEigen { n: u32, omega: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketSpec {
    pub kind: PacketKind,
    pub spin_ket: SpinKet,
}

impl PacketSpec {
    pub fn new(kind: PacketKind) -> Self {
        Self { kind, spin_ket: SpinKet::default() }
    }

    pub fn with_spin(kind: PacketKind, spin_ket: SpinKet) -> Self {
        Self { kind, spin_ket }
    }

    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            PacketKind::PlaneWave { .. } => "plane_wave",
            PacketKind::Gaussian { .. } => "gaussian",
            PacketKind::Airy { .. } => "airy",
            PacketKind::Scattering { .. } => "scattering",
            PacketKind::Landau { .. } => "landau",
            PacketKind::HoEigen { .. } => "ho_eigen",
        }
    }

    /// True when the state has a finite norm on the whole space.
    pub fn normalizable(&self) -> bool {
        matches!(
            self.kind,
            PacketKind::Gaussian { .. } | PacketKind::HoEigen { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.spin_ket.validate()?;
        let bad = |msg: String| Err(QelError::InvalidPacket(msg));
        match &self.kind {
            PacketKind::PlaneWave { k } => {
                if k.is_empty() || k.len() > 3 {
                    return bad(format!("plane_wave k must have 1-3 components, got {}", k.len()));
                }
                if !k.iter().all(|v| v.is_finite()) {
                    return bad("plane_wave k must be finite".into());
                }
            }
            PacketKind::Gaussian { a, b } => {
                if !(*a > 0.0) || !a.is_finite() {
                    return bad(format!("gaussian a must be > 0, got {a}"));
                }
                if !b.is_finite() {
                    return bad("gaussian b must be finite".into());
                }
            }
            PacketKind::Airy { beta } => {
                if !(*beta > 0.0) || !beta.is_finite() {
                    return bad(format!("airy beta must be > 0, got {beta}"));
                }
            }
            PacketKind::Scattering { k, f } => {
                if !(*k > 0.0) || !k.is_finite() {
                    return bad(format!("scattering k must be > 0, got {k}"));
                }
                if !f.is_finite() {
                    return bad("scattering f must be finite".into());
                }
            }
            PacketKind::Landau { s, b_field, k_x, k_z, .. } => {
                if (s.abs() - 0.5).abs() > 1e-12 {
                    return bad(format!("landau s must be +/- 1/2, got {s}"));
                }
                if !(*b_field > 0.0) || !b_field.is_finite() {
                    return bad(format!("landau B must be > 0, got {b_field}"));
                }
                if !k_x.is_finite() || !k_z.is_finite() {
                    return bad("landau k_x, k_z must be finite".into());
                }
            }
            PacketKind::HoEigen { omega, .. } => {
                if !(*omega > 0.0) || !omega.is_finite() {
                    return bad(format!("ho_eigen omega must be > 0, got {omega}"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("variant".into(), json!(self.variant_name()));
        match &self.kind {
            PacketKind::PlaneWave { k } => {
                map.insert("k".into(), json!(k));
            }
            PacketKind::Gaussian { a, b } => {
                map.insert("a".into(), json!(a));
                map.insert("b".into(), json!(b));
            }
            PacketKind::Airy { beta } => {
                map.insert("beta".into(), json!(beta));
            }
            PacketKind::Scattering { k, f } => {
                map.insert("k".into(), json!(k));
                map.insert("f".into(), json!(f));
            }
            PacketKind::Landau { n, k_x, k_z, s, b_field } => {
                map.insert("n".into(), json!(n));
                map.insert("k_x".into(), json!(k_x));
                map.insert("k_z".into(), json!(k_z));
                map.insert("s".into(), json!(s));
                map.insert("B".into(), json!(b_field));
            }
            PacketKind::HoEigen { n, omega } => {
                map.insert("n".into(), json!(n));
                map.insert("omega".into(), json!(omega));
            }
        }
        let ket = self.spin_ket.0;
        map.insert(
            "spin_ket".into(),
            json!([[ket[0].re, ket[0].im], [ket[1].re, ket[1].im]]),
        );
        Value::Object(map)
    }

    /// Parses the exact config-file shape; unknown keys are rejected.
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| QelError::Parse("packet spec must be a JSON object".into()))?;
        let mut map = obj.clone();
        let variant = map
            .remove("variant")
            .and_then(|v| v.as_str().map(str::to_string))
            .ok_or_else(|| QelError::Parse("packet spec needs a string `variant`".into()))?;
        let spin_ket = match map.remove("spin_ket") {
            None => SpinKet::default(),
            Some(v) => parse_spin_ket(&v)?,
        };
        fn num(map: &mut Map<String, Value>, variant: &str, key: &str) -> Result<f64> {
            map.remove(key)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| QelError::Parse(format!("{variant} needs numeric `{key}`")))
        }
        let kind = match variant.as_str() {
            "plane_wave" => {
                let kv = map
                    .remove("k")
                    .ok_or_else(|| QelError::Parse("plane_wave needs `k`".into()))?;
                let k = match kv {
                    Value::Number(n) => vec![n.as_f64().unwrap_or(f64::NAN)],
                    Value::Array(items) => items
                        .iter()
                        .map(|x| x.as_f64().ok_or_else(|| QelError::Parse("k entries must be numbers".into())))
                        .collect::<Result<Vec<_>>>()?,
                    _ => return Err(QelError::Parse("k must be a number or array".into())),
                };
                PacketKind::PlaneWave { k }
            }
            "gaussian" => PacketKind::Gaussian { a: num(&mut map, &variant, "a")?, b: num(&mut map, &variant, "b")? },
            "airy" => PacketKind::Airy { beta: num(&mut map, &variant, "beta")? },
            "scattering" => PacketKind::Scattering { k: num(&mut map, &variant, "k")?, f: num(&mut map, &variant, "f")? },
            "landau" => {
                let n = map
                    .remove("n")
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| QelError::Parse("landau needs integer `n` >= 0".into()))?;
                PacketKind::Landau {
                    n: u32::try_from(n).map_err(|_| QelError::Parse("landau n too large".into()))?,
                    k_x: num(&mut map, &variant, "k_x")?,
                    k_z: num(&mut map, &variant, "k_z")?,
                    s: num(&mut map, &variant, "s")?,
                    b_field: num(&mut map, &variant, "B")?,
                }
            }
            "ho_eigen" => {
                let n = map
                    .remove("n")
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| QelError::Parse("ho_eigen needs integer `n` >= 0".into()))?;
                PacketKind::HoEigen {
                    n: u32::try_from(n).map_err(|_| QelError::Parse("ho_eigen n too large".into()))?,
                    omega: num(&mut map, &variant, "omega")?,
                }
            }
            other => return Err(QelError::Parse(format!("unknown packet variant `{other}`"))),
        };
        if let Some(key) = map.keys().next() {
            return Err(QelError::Parse(format!(
                "unknown key `{key}` in {variant} packet spec"
            )));
        }
        let spec = Self { kind, spin_ket };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_spin_ket(v: &Value) -> Result<SpinKet> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| QelError::Parse("spin_ket must be [[re,im],[re,im]]".into()))?;
    let mut comps = [Complex64::default(); 2];
    for (c, item) in comps.iter_mut().zip(arr) {
        let pair = item
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| QelError::Parse("spin_ket components must be [re,im]".into()))?;
        let re = pair[0].as_f64().ok_or_else(|| QelError::Parse("spin_ket re must be a number".into()))?;
        let im = pair[1].as_f64().ok_or_else(|| QelError::Parse("spin_ket im must be a number".into()))?;
        *c = Complex64::new(re, im);
    }
    SpinKet::new(comps[0], comps[1])
}

impl serde::Serialize for PacketSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for PacketSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        PacketSpec::from_json_value(&v).map_err(serde::de::Error::custom)
    }
}

/// Minimum distance (in units of the coarsest grid spacing) that scattering
/// grids must keep from the 1/r singularity at the origin.
pub const SCATTERING_R_MIN_CELLS: f64 = 2.0;

/// Evaluate the closed-form wavefunction of a catalog state on a grid.
pub fn realize(spec: &PacketSpec, grid: &Grid, t: f64, constants: PhysConstants) -> Result<SpinorField> {
    spec.validate()?;
    constants.validate()?;
    let hbar = constants.hbar;
    let m = constants.mass;
    let ket = spec.spin_ket;
    let dim = grid.dim();
    let need_dim = |want: usize, what: &str| -> Result<()> {
        if dim != want {
            Err(QelError::DimensionMismatch(format!(
                "{what} states need a {want}-D grid, got {dim}-D"
            )))
        } else {
            Ok(())
        }
    };
    let mut field = match &spec.kind {
        PacketKind::Gaussian { a, b } => {
            need_dim(1, "gaussian")?;
            let (a, b) = (*a, *b);
            let tau = t / (m * a * a * hbar);
            let denom = Complex64::new(1.0, tau);
            let amp = std::f64::consts::PI.powf(-0.25) / (a * hbar * denom).sqrt();
            let mut f = SpinorField::from_fn(grid, constants, |p| {
                let xi = p[0] / (a * hbar);
                let gauss = (-(xi - b * tau).powi(2) / (2.0 * (1.0 + tau * tau))).exp();
                let phase = 0.5 * (2.0 * b * xi + tau * (xi * xi - b * b)) / (1.0 + tau * tau);
                let val = amp * gauss * Complex64::new(0.0, phase).exp();
                [val * ket.0[0], val * ket.0[1]]
            });
            f.normalized = true;
            f
        }
        PacketKind::PlaneWave { k } => {
            if k.len() != dim {
                return Err(QelError::DimensionMismatch(format!(
                    "plane_wave k has {} components for a {dim}-D grid",
                    k.len()
                )));
            }
            let k = k.clone();
            let k2: f64 = k.iter().map(|v| v * v).sum();
            let omega = hbar * k2 / (2.0 * m);
            SpinorField::from_fn(grid, constants, |p| {
                let kr: f64 = k.iter().zip(p).map(|(kv, xv)| kv * xv).sum();
                let val = Complex64::new(0.0, kr - omega * t).exp();
                [val * ket.0[0], val * ket.0[1]]
            })
        }
        PacketKind::Airy { beta } => {
            need_dim(1, "airy")?;
            let beta = *beta;
            let b3 = beta.powi(3);
            let shift = b3 * t * t / (4.0 * m * m);
            let phase_scale = t * b3 / (2.0 * m * hbar);
            let phase_const = b3 * t * t / (12.0 * m * m);
            let arg_scale = beta / hbar.powf(2.0 / 3.0);
            SpinorField::from_fn(grid, constants, |p| {
                let xi_t = p[0] - shift;
                let val = airy_ai(arg_scale * xi_t)
                    * Complex64::new(0.0, phase_scale * (xi_t + phase_const)).exp();
                [val * ket.0[0], val * ket.0[1]]
            })
        }
        PacketKind::HoEigen { n, omega } => {
            need_dim(1, "ho_eigen")?;
            let (n, omega) = (*n as usize, *omega);
            let alpha = (m * omega / hbar).sqrt();
            let energy = (n as f64 + 0.5) * hbar * omega;
            let phase = Complex64::new(0.0, -energy * t / hbar).exp();
            let mut f = SpinorField::from_fn(grid, constants, |p| {
                let val = alpha.sqrt() * hermite_fn_pair(n, alpha * p[0]).0 * phase;
                [val * ket.0[0], val * ket.0[1]]
            });
            f.normalized = true;
            f
        }
        PacketKind::Scattering { k, f } => {
            need_dim(3, "scattering")?;
            // the grid is a product set, so the point nearest the origin has
            // each coordinate independently closest to zero
            let r_min = SCATTERING_R_MIN_CELLS * grid.max_spacing();
            let near2: f64 = (0..3)
                .map(|axis| {
                    let ax = grid.axis(axis);
                    (0..ax.n_points)
                        .map(|i| ax.coord(i).abs())
                        .fold(f64::MAX, f64::min)
                        .powi(2)
                })
                .sum();
            if near2.sqrt() < r_min {
                return Err(QelError::OriginInGrid { r_min });
            }
            let (k, f) = (*k, *f);
            let energy = hbar * hbar * k * k / (2.0 * m);
            let phase = Complex64::new(0.0, -energy * t / hbar).exp();
            SpinorField::from_fn(grid, constants, |p| {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let val = (Complex64::new(0.0, k * p[2]).exp()
                    + f * Complex64::new(0.0, k * r).exp() / r)
                    * phase;
                [val * ket.0[0], val * ket.0[1]]
            })
        }
        PacketKind::Landau { n, k_x, k_z, s, b_field } => {
            if dim != 2 && dim != 3 {
                return Err(QelError::DimensionMismatch(format!(
                    "landau states need a 2-D or 3-D grid, got {dim}-D"
                )));
            }
            if dim == 2 && *k_z != 0.0 {
                return Err(QelError::DimensionMismatch(
                    "landau k_z must be 0 on a 2-D grid".into(),
                ));
            }
            let lc = LandauClosedForm::new(*n, *k_x, *k_z, *s, *b_field, constants)?;
            let spinor = if *s > 0.0 { SpinKet::up() } else { SpinKet::down() };
            let phase_t = Complex64::new(0.0, -lc.energy() * t / hbar).exp();
            // box normalization over the plane-wave directions
            let mut plane_norm = grid.axis(0).x_max - grid.axis(0).x_min;
            if dim == 3 {
                plane_norm *= grid.axis(2).x_max - grid.axis(2).x_min;
            }
            let amp = phase_t / plane_norm.sqrt();
            let (k_x, k_z) = (*k_x, *k_z);
            let mut fld = SpinorField::from_fn(grid, constants, |p| {
                let z = if p.len() == 3 { p[2] } else { 0.0 };
                let val = amp
                    * lc.phi_tilde(p[1])
                    * Complex64::new(0.0, k_x * p[0] + k_z * z).exp();
                [val * spinor.0[0], val * spinor.0[1]]
            });
            fld.normalized = true;
            fld
        }
    };
    field.time = t;
    field.check_finite("realized state")?;
    Ok(field)
}

/// Closed-form Gaussian observables in the dimensionless variables
/// xi = x/(a hbar), tau = t/(m a^2 hbar).
#[derive(Debug, Clone, Copy)]
pub struct GaussianClosedForms {
    pub rho_over_density: f64,
    pub v: f64,
    pub j_over_density: f64,
}

pub fn gaussian_closed_forms(a: f64, b: f64, xi: f64, tau: f64, constants: PhysConstants) -> GaussianClosedForms {
    let m = constants.mass;
    let t2 = tau * tau;
    let rho_over_density =
        ((t2 - 1.0) * (xi * xi - b * b) + 4.0 * b * tau * xi + t2 + 1.0)
            / (2.0 * m * a * a * (t2 + 1.0).powi(2));
    let v = (b + xi * tau) / (m * a * (1.0 + t2));
    // cubic-in-xi energy-current polynomial; the xi coefficient is
    // b^2 (5 - tau^2), fixed by direct differentiation of phi
    let j_over_density = (2.0 * tau * (t2 - 1.0) * xi.powi(3)
        + 2.0 * b * (5.0 * t2 - 1.0) * xi * xi
        + 2.0 * tau * (3.0 * (1.0 + t2) + b * b * (5.0 - t2)) * xi
        + 2.0 * b * (2.0 + (1.0 - t2) * (b * b + t2)))
        / (4.0 * m * m * a.powi(3) * (1.0 + t2).powi(3));
    GaussianClosedForms { rho_over_density, v, j_over_density }
}

/// |phi(xi, tau)|^2 of the Gaussian packet, per unit x.
pub fn gaussian_density(a: f64, b: f64, xi: f64, tau: f64, constants: PhysConstants) -> f64 {
    let spread = 1.0 + tau * tau;
    (-(xi - b * tau).powi(2) / spread).exp()
        / (std::f64::consts::PI.sqrt() * a * constants.hbar * spread.sqrt())
}

/// Closed-form energy density of the Airy packet.
pub fn airy_energy_density(beta: f64, x: f64, t: f64, constants: PhysConstants) -> f64 {
    let m = constants.mass;
    let b3 = beta.powi(3);
    let drift = b3 * t * t / (4.0 * m * m);
    let xi_t = x - drift;
    let ai = airy_ai(beta * xi_t / constants.hbar.powf(2.0 / 3.0));
    b3 / (2.0 * m) * (drift - xi_t) * ai * ai
}

/// Closed-form holographic energy density of the stationary scattering state.
pub fn scattering_rho_s(
    k: f64,
    f: f64,
    mu: [f64; 3],
    point: [f64; 3],
    constants: PhysConstants,
) -> Result<f64> {
    let [x, y, z] = point;
    let r2 = x * x + y * y + z * z;
    if r2 == 0.0 {
        return Err(QelError::InvalidPacket(
            "scattering rho_s is undefined at the origin".into(),
        ));
    }
    let r = r2.sqrt();
    let hbar = constants.hbar;
    let m = constants.mass;
    let arg = k * z - k * r;
    Ok(hbar * hbar * k * k * (mu[0] * y - mu[1] * x) * f / (2.0 * m * r2)
        * (arg.sin() - arg.cos() / (k * r)))
}

/// Landau-level closed forms in the gauge A = (-B y, 0, 0).
#[derive(Debug, Clone, Copy)]
pub struct LandauClosedForm {
    pub n: u32,
    pub k_x: f64,
    pub k_z: f64,
    pub s: f64,
    pub b_field: f64,
    pub constants: PhysConstants,
}

impl LandauClosedForm {
    pub fn new(n: u32, k_x: f64, k_z: f64, s: f64, b_field: f64, constants: PhysConstants) -> Result<Self> {
        if !(b_field > 0.0) {
            return Err(QelError::InvalidPacket(format!("landau B must be > 0, got {b_field}")));
        }
        if (s.abs() - 0.5).abs() > 1e-12 {
            return Err(QelError::InvalidPacket(format!("landau s must be +/- 1/2, got {s}")));
        }
        Ok(Self { n, k_x, k_z, s, b_field, constants })
    }

    /// Cyclotron frequency |e| B / m.
    pub fn omega_b(&self) -> f64 {
        self.constants.charge_magnitude * self.b_field / self.constants.mass
    }

    /// Oscillator center y_0 = hbar k_x / (m omega_B).
    pub fn y_center(&self) -> f64 {
        self.constants.hbar * self.k_x / (self.constants.mass * self.omega_b())
    }

    fn alpha(&self) -> f64 {
        (self.constants.mass * self.omega_b() / self.constants.hbar).sqrt()
    }

    /// Normalized transverse profile phi~_n(y).
    pub fn phi_tilde(&self, y: f64) -> f64 {
        let alpha = self.alpha();
        alpha.sqrt() * hermite_fn_pair(self.n as usize, alpha * (y - self.y_center())).0
    }

    pub fn phi_tilde_prime(&self, y: f64) -> f64 {
        let alpha = self.alpha();
        alpha.powf(1.5) * hermite_fn_pair(self.n as usize, alpha * (y - self.y_center())).1
    }

    /// Upsilon_y(y) = s (hbar omega_B / 2) phi~^2 (y_0 - y).
    pub fn upsilon_y(&self, y: f64) -> f64 {
        let p = self.phi_tilde(y);
        self.s * self.constants.hbar * self.omega_b() / 2.0 * p * p * (self.y_center() - y)
    }

    /// rho_s(y) = s (hbar omega_B / 2) [2 (y_0 - y) phi~ phi~' - phi~^2].
    pub fn rho_s(&self, y: f64) -> f64 {
        let p = self.phi_tilde(y);
        let dp = self.phi_tilde_prime(y);
        self.s * self.constants.hbar * self.omega_b() / 2.0
            * (2.0 * (self.y_center() - y) * p * dp - p * p)
    }

    /// E_n = (n + 1/2 + s) hbar omega_B + hbar^2 k_z^2 / 2m.
    pub fn energy(&self) -> f64 {
        let c = &self.constants;
        (self.n as f64 + 0.5 + self.s) * c.hbar * self.omega_b()
            + c.hbar * c.hbar * self.k_z * self.k_z / (2.0 * c.mass)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LandauClosedForms {
    pub upsilon_y: f64,
    pub rho_s: f64,
    pub e_n: f64,
}

pub fn landau_closed_forms(
    n: u32,
    k_x: f64,
    k_z: f64,
    s: f64,
    b_field: f64,
    y: f64,
    constants: PhysConstants,
) -> Result<LandauClosedForms> {
    let lc = LandauClosedForm::new(n, k_x, k_z, s, b_field, constants)?;
    Ok(LandauClosedForms {
        upsilon_y: lc.upsilon_y(y),
        rho_s: lc.rho_s(y),
        e_n: lc.energy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_abs_diff_eq;

    fn consts() -> PhysConstants {
        PhysConstants::default()
    }

    #[test]
    fn gaussian_peak_at_origin_at_t0() {
        let grid = Grid::line_periodic(256, -10.0, 10.0).unwrap();
        let spec = PacketSpec::new(PacketKind::Gaussian { a: 1.0, b: 0.7 });
        let phi = realize(&spec, &grid, 0.0, consts()).unwrap();
        let dens = phi.density();
        let mut best = (0usize, 0.0f64);
        for (i, v) in dens.values.iter().enumerate() {
            if *v > best.1 {
                best = (i, *v);
            }
        }
        let x_peak = grid.coords(0)[best.0];
        assert!(x_peak.abs() < grid.spacing(0) + 1e-12, "peak at {x_peak}");
    }

    #[test]
    fn gaussian_density_matches_closed_form() {
        let (a, b) = (0.8, -0.6);
        let grid = Grid::line_periodic(128, -12.0, 12.0).unwrap();
        for tau in [0.0, 0.5, 2.0] {
            let t = tau * a * a; // m = hbar = 1
            let phi = realize(&PacketSpec::new(PacketKind::Gaussian { a, b }), &grid, t, consts()).unwrap();
            let dens = phi.density();
            for (i, v) in dens.values.iter().enumerate() {
                let xi = grid.coords(0)[i] / a;
                let want = gaussian_density(a, b, xi, tau, consts());
                assert!((v - want).abs() <= 1e-14 * want.max(1e-30) + 1e-300, "tau={tau} i={i}");
            }
        }
    }

    #[test]
    fn gaussian_normalization() {
        let grid = Grid::line_periodic(512, -20.0, 20.0).unwrap();
        let phi = realize(&PacketSpec::new(PacketKind::Gaussian { a: 1.0, b: 1.0 }), &grid, 0.0, consts()).unwrap();
        assert_abs_diff_eq!(phi.norm_sqr(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn gaussian_closed_form_reference_points() {
        // substitution into the closed form: (a, b=0, xi=0, tau=0) and (xi=2)
        let c = consts();
        let a = 1.3;
        let f0 = gaussian_closed_forms(a, 0.0, 0.0, 0.0, c);
        assert_abs_diff_eq!(f0.rho_over_density, 1.0 / (2.0 * a * a), epsilon = 1e-14);
        let f2 = gaussian_closed_forms(a, 0.0, 2.0, 0.0, c);
        assert_abs_diff_eq!(f2.rho_over_density, -3.0 / (2.0 * a * a), epsilon = 1e-14);
        // tau = 2: positive for every xi
        for i in -300..300 {
            let xi = i as f64 * 0.1;
            assert!(gaussian_closed_forms(a, 0.0, xi, 2.0, c).rho_over_density > 0.0);
        }
    }

    #[test]
    fn airy_density_at_t0() {
        let beta = 1.0;
        let grid = Grid::line(512, -20.0, 5.0).unwrap();
        let phi = realize(&PacketSpec::new(PacketKind::Airy { beta }), &grid, 0.0, consts()).unwrap();
        for (i, x) in grid.coords(0).iter().enumerate() {
            let want = airy_ai(beta * x).powi(2);
            let got = phi.comps[0][ndarray::IxDyn(&[i])].norm_sqr();
            assert!((got - want).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn airy_energy_density_signs() {
        let c = consts();
        // at a zero of Ai the density vanishes
        let z1 = -2.33810741045976703849;
        assert!(airy_energy_density(1.0, z1, 0.0, c).abs() < 1e-25);
        // t = 0, x > 0: negative
        for &x in &[0.5, 1.0, 2.0] {
            assert!(airy_energy_density(1.0, x, 0.0, c) < 0.0);
        }
        // deep oscillatory tail: envelope of rho grows ~ sqrt(-x)
        let peak_near = |x0: f64| {
            let mut best: f64 = 0.0;
            let mut x = x0 - 3.0;
            while x < x0 + 3.0 {
                best = best.max(airy_energy_density(1.0, x, 0.0, c));
                x += 1e-3;
            }
            best
        };
        assert!(peak_near(-80.0) > peak_near(-40.0));
        assert!(peak_near(-40.0) > peak_near(-10.0));
    }

    #[test]
    fn scattering_rho_s_symmetry_zeros() {
        let c = consts();
        // z-polarized spin: mu_x = mu_y = 0 kills rho_s everywhere
        for &p in &[[1.0, 2.0, -0.5], [0.3, -0.4, 1.2]] {
            let v = scattering_rho_s(1.0, 0.5, [0.0, 0.0, 1.0], p, c).unwrap();
            assert_eq!(v, 0.0);
        }
        // on the z-axis mu_x y - mu_y x = 0
        let v = scattering_rho_s(1.0, 0.5, [1.0, 0.0, 0.0], [0.0, 0.0, 3.0], c).unwrap();
        assert_eq!(v, 0.0);
        assert!(scattering_rho_s(1.0, 0.5, [1.0, 0.0, 0.0], [0.0, 0.0, 0.0], c).is_err());
    }

    #[test]
    fn scattering_full_sphere_average_vanishes() {
        let c = consts();
        // tilted spin state with nonzero mu_x and mu_y
        let mu = SpinKet::new(
            Complex64::new(0.8, 0.0),
            Complex64::new(0.36, 0.48),
        )
        .unwrap()
        .magnetization();
        let (k, f, r) = (1.0, 0.7, 8.0);
        let (n_u, n_phi) = (400, 400);
        let mut total = 0.0;
        for iu in 0..n_u {
            let u = -1.0 + (iu as f64 + 0.5) * 2.0 / n_u as f64;
            let st = (1.0 - u * u).sqrt();
            for ip in 0..n_phi {
                let phi = (ip as f64) * 2.0 * std::f64::consts::PI / n_phi as f64;
                let p = [r * st * phi.cos(), r * st * phi.sin(), r * u];
                total += scattering_rho_s(k, f, mu, p, c).unwrap();
            }
        }
        total *= r * r * (2.0 / n_u as f64) * (2.0 * std::f64::consts::PI / n_phi as f64);
        assert!(total.abs() < 1e-8, "sphere average {total}");
    }

    #[test]
    fn landau_closed_form_identities() {
        let c = consts();
        let lc = LandauClosedForm::new(0, 0.5, 0.0, 0.5, 1.0, c).unwrap();
        let y0 = lc.y_center();
        assert_abs_diff_eq!(lc.upsilon_y(y0), 0.0, epsilon = 1e-300);
        // n = 0: rho_s(y0) = -s (hbar wB / 2) phi0^2(y0)
        let want = -0.5 * 0.5 * lc.phi_tilde(y0).powi(2);
        assert_abs_diff_eq!(lc.rho_s(y0), want, epsilon = 1e-14);
        // global content along y vanishes
        for n in [0u32, 1, 2] {
            let lc = LandauClosedForm::new(n, 0.5, 0.0, 0.5, 1.0, c).unwrap();
            let (mut acc, ny, dy) = (0.0, 20001, 40.0 / 20000.0);
            for i in 0..ny {
                let y = -20.0 + i as f64 * dy;
                let w = if i == 0 || i == ny - 1 { 0.5 } else { 1.0 };
                acc += w * lc.rho_s(y);
            }
            assert!((acc * dy).abs() < 1e-8, "n={n}: integral {}", acc * dy);
        }
        // Landau energy ladder
        let e0 = LandauClosedForm::new(0, 0.0, 0.3, 0.5, 2.0, c).unwrap().energy();
        assert_abs_diff_eq!(e0, (0.5 + 0.5) * 2.0 + 0.3 * 0.3 / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn realize_dimension_checks() {
        let grid2 = Grid::periodic(2, 16, 8.0).unwrap();
        let err = realize(&PacketSpec::new(PacketKind::Gaussian { a: 1.0, b: 0.0 }), &grid2, 0.0, consts());
        assert!(matches!(err, Err(QelError::DimensionMismatch(_))));

        // scattering grid containing the origin is rejected
        let grid3 = Grid::periodic(3, 16, 8.0).unwrap();
        let err = realize(&PacketSpec::new(PacketKind::Scattering { k: 1.0, f: 0.5 }), &grid3, 0.0, consts());
        assert!(matches!(err, Err(QelError::OriginInGrid { .. })));
    }

    #[test]
    fn packet_spec_json_round_trip() {
        let specs = vec![
            PacketSpec::new(PacketKind::Gaussian { a: 1.0, b: -0.25 }),
            PacketSpec::new(PacketKind::PlaneWave { k: vec![1.0, 2.0] }),
            PacketSpec::new(PacketKind::Airy { beta: 0.8 }),
            PacketSpec::new(PacketKind::Scattering { k: 1.5, f: 0.3 }),
            PacketSpec::new(PacketKind::Landau { n: 2, k_x: 0.5, k_z: 0.0, s: -0.5, b_field: 1.0 }),
            PacketSpec::new(PacketKind::HoEigen { n: 3, omega: 2.0 }),
        ];
        for spec in specs {
            let v = spec.to_json_value();
            let back = PacketSpec::from_json_value(&v).unwrap();
            assert_eq!(spec, back);
        }
    }

    #[test]
    fn packet_spec_rejects_unknown_keys_and_bad_values() {
        let v = serde_json::json!({"variant": "gaussian", "a": 1.0, "b": 0.0, "bogus": 3});
        assert!(PacketSpec::from_json_value(&v).is_err());
        let v = serde_json::json!({"variant": "gaussian", "a": -1.0, "b": 0.0});
        assert!(PacketSpec::from_json_value(&v).is_err());
        let v = serde_json::json!({"variant": "landau", "n": 0, "k_x": 0.0, "k_z": 0.0, "s": 0.3, "B": 1.0});
        assert!(PacketSpec::from_json_value(&v).is_err());
        let v = serde_json::json!({"variant": "nope"});
        assert!(PacketSpec::from_json_value(&v).is_err());
    }

    #[test]
    fn spin_ket_magnetization() {
        let up = SpinKet::up().magnetization();
        assert_eq!(up, [0.0, 0.0, 1.0]);
        let x = SpinKet::new(
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        )
        .unwrap()
        .magnetization();
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1].abs() < 1e-14 && x[2].abs() < 1e-14);
    }
}
