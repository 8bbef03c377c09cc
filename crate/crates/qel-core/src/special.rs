//! Airy and Hermite special functions used by the analytic state catalog.

use std::sync::OnceLock;

const TABLE_LO: f64 = -130.0;
const TABLE_HI: f64 = 12.0;
const TABLE_STEP: f64 = 0.25;
const TAYLOR_TERMS: usize = 30;

/// Taylor coefficients of a solution of y'' = x y around `a`, from initial
/// values (y, y'). The recurrence is c_{k+2} = (a c_k + c_{k-1}) / ((k+1)(k+2)).
fn airy_taylor_coeffs(a: f64, y: f64, yp: f64) -> [f64; TAYLOR_TERMS] {
    let mut c = [0.0; TAYLOR_TERMS];
    c[0] = y;
    c[1] = yp;
    for k in 0..TAYLOR_TERMS - 2 {
        let prev = if k == 0 { 0.0 } else { c[k - 1] };
        c[k + 2] = (a * c[k] + prev) / ((k + 1) as f64 * (k + 2) as f64);
    }
    c
}

fn taylor_eval(c: &[f64; TAYLOR_TERMS], dx: f64) -> (f64, f64) {
    let mut y = 0.0;
    let mut yp = 0.0;
    for k in (1..TAYLOR_TERMS).rev() {
        y = y * dx + c[k];
        yp = yp * dx + k as f64 * c[k];
    }
    (y * dx + c[0], yp)
}

fn u_coeffs(z: f64) -> Vec<f64> {
    let mut us = vec![1.0f64];
    let mut u = 1.0;
    for k in 1..=24usize {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        us.push(u);
        if u / z.powi(k as i32) < 1e-18 {
            break;
        }
    }
    us
}

fn v_coeff(us: &[f64], k: usize) -> f64 {
    us[k] * (6.0 * k as f64 + 1.0) / (1.0 - 6.0 * k as f64)
}

/// Exponentially decaying expansion for x >= 8 (DLMF 9.7.5-6).
fn airy_asymptotic_pos(x: f64) -> (f64, f64) {
    let z = 2.0 / 3.0 * x.powf(1.5);
    let us = u_coeffs(z);
    let mut sum_ai = 0.0;
    let mut sum_aip = 0.0;
    for (k, &uk) in us.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum_ai += sign * uk / z.powi(k as i32);
        sum_aip += sign * v_coeff(&us, k) / z.powi(k as i32);
    }
    let pref = (-z).exp() / (2.0 * std::f64::consts::PI.sqrt());
    (pref * sum_ai / x.powf(0.25), -pref * x.powf(0.25) * sum_aip)
}

/// Oscillatory expansion for deeply negative x (DLMF 9.7.9-10).
fn airy_asymptotic_neg(x: f64) -> (f64, f64) {
    let t = -x;
    let z = 2.0 / 3.0 * t.powf(1.5);
    let us = u_coeffs(z);
    let (mut u_even, mut u_odd, mut v_even, mut v_odd) = (0.0, 0.0, 0.0, 0.0);
    let mut k = 0usize;
    while 2 * k < us.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        u_even += sign * us[2 * k] / z.powi(2 * k as i32);
        v_even += sign * v_coeff(&us, 2 * k) / z.powi(2 * k as i32);
        if 2 * k + 1 < us.len() {
            u_odd += sign * us[2 * k + 1] / z.powi(2 * k as i32 + 1);
            v_odd += sign * v_coeff(&us, 2 * k + 1) / z.powi(2 * k as i32 + 1);
        }
        k += 1;
    }
    let phase = z - std::f64::consts::FRAC_PI_4;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let ai = (phase.cos() * u_even + phase.sin() * u_odd) / (sqrt_pi * t.powf(0.25));
    let aip = t.powf(0.25) / sqrt_pi * (phase.sin() * v_even - phase.cos() * v_odd);
    (ai, aip)
}

struct AiryTable {
    nodes: Vec<(f64, f64)>, // (Ai, Ai') at TABLE_LO + i*TABLE_STEP
}

/// Checkpoint table built once by integrating y'' = x y downward from an
/// asymptotic seed at TABLE_HI. Backward integration is stable here: the
/// contaminating second solution decays in this direction.
fn airy_table() -> &'static AiryTable {
    static TABLE: OnceLock<AiryTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = ((TABLE_HI - TABLE_LO) / TABLE_STEP).round() as usize + 1;
        let mut nodes = vec![(0.0, 0.0); n];
        let (mut y, mut yp) = airy_asymptotic_pos(TABLE_HI);
        nodes[n - 1] = (y, yp);
        let mut x = TABLE_HI;
        for i in (0..n - 1).rev() {
            let c = airy_taylor_coeffs(x, y, yp);
            let (ny, nyp) = taylor_eval(&c, -TABLE_STEP);
            y = ny;
            yp = nyp;
            x -= TABLE_STEP;
            nodes[i] = (y, yp);
        }
        AiryTable { nodes }
    })
}

/// Airy function Ai(x) and its derivative.
pub fn airy_ai_pair(x: f64) -> (f64, f64) {
    if x >= 8.0 {
        return airy_asymptotic_pos(x);
    }
    if x <= TABLE_LO + 1.0 {
        return airy_asymptotic_neg(x);
    }
    let table = airy_table();
    let idx = (((x - TABLE_LO) / TABLE_STEP).round() as usize).min(table.nodes.len() - 1);
    let a = TABLE_LO + idx as f64 * TABLE_STEP;
    let (y, yp) = table.nodes[idx];
    let c = airy_taylor_coeffs(a, y, yp);
    taylor_eval(&c, x - a)
}

pub fn airy_ai(x: f64) -> f64 {
    airy_ai_pair(x).0
}

/// Normalized Hermite function h_n(u) = pi^{-1/4} (2^n n!)^{-1/2} H_n(u) e^{-u^2/2}
/// and its derivative, by stable upward recurrence. The Gaussian weight is
/// carried as an exponent shift so deep-tail evaluations stay representable.
pub fn hermite_fn_pair(n: usize, u: f64) -> (f64, f64) {
    // h_{k+1} = sqrt(2/(k+1)) u h_k - sqrt(k/(k+1)) h_{k-1}
    let mut exp_shift = -0.5 * u * u;
    let mut prev = 0.0f64;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    for k in 0..n {
        let next =
            (2.0 / (k as f64 + 1.0)).sqrt() * u * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs().max(prev.abs()) > 1e250 {
            cur *= 1e-250;
            prev *= 1e-250;
            exp_shift += 250.0 * std::f64::consts::LN_10;
        }
    }
    let weight = exp_shift.exp();
    let h = cur * weight;
    let h_prev = prev * weight;
    // d/du h_n = sqrt(2n) h_{n-1} - u h_n
    let dh = if n == 0 {
        -u * h
    } else {
        (2.0 * n as f64).sqrt() * h_prev - u * h
    };
    (h, dh)
}

pub fn hermite_fn(n: usize, u: f64) -> f64 {
    hermite_fn_pair(n, u).0
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values computed independently with scipy.special.airy
    const AIRY_REF: [(f64, f64, f64); 12] = [
        (-100.0, 0.17675339323955203, -0.24229703166065122),
        (-50.0, -0.16188142361232213, 0.9689898372767385),
        (-20.0, -0.17640612707798434, 0.8928628567364726),
        (-10.0, 0.040241238486441955, 0.9962650441327905),
        (-5.0, 0.3507610090241142, 0.3271928185544436),
        (-1.0, 0.5355608832923522, -0.010160567116645175),
        (0.0, 0.3550280538878172, -0.2588194037928068),
        (0.5, 0.23169360648083343, -0.224910532664684),
        (1.0, 0.13529241631288147, -0.15914744129679328),
        (2.0, 0.03492413042327436, -0.05309038443365388),
        (5.0, 0.00010834442813607433, -0.0002474138908684623),
        (8.0, 4.6922076160992236e-8, -1.3414392979067844e-7),
    ];

    #[test]
    fn airy_matches_reference() {
        for &(x, ai, aip) in &AIRY_REF {
            let (a, ap) = airy_ai_pair(x);
            assert!(
                (a - ai).abs() < 1e-12,
                "Ai({x}): got {a}, want {ai}, diff {}",
                (a - ai).abs()
            );
            assert!((ap - aip).abs() < 1e-11, "Ai'({x}): got {ap}, want {aip}");
        }
    }

    #[test]
    fn airy_far_negative_branch() {
        // scipy: Ai(-150), Ai'(-150), Ai(-140), Ai'(-140)
        let (a, ap) = airy_ai_pair(-150.0);
        assert!((a - 0.04903808270239697).abs() < 1e-12, "Ai(-150) = {a}");
        assert!((ap - -1.8808154281541456).abs() < 1e-10, "Ai'(-150) = {ap}");
        let (a, ap) = airy_ai_pair(-140.0);
        assert!((a - -0.10819891830825655).abs() < 1e-12, "Ai(-140) = {a}");
        assert!((ap - -1.4587241730158311).abs() < 1e-10, "Ai'(-140) = {ap}");
    }

    #[test]
    fn airy_first_zero() {
        let z1 = -2.33810741045976703849;
        assert!(airy_ai(z1).abs() < 1e-13);
    }

    #[test]
    fn airy_ode_residual() {
        for &x in &[-30.0, -3.0, 0.7, 4.0] {
            let h = 1e-5;
            let ypp = (airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h);
            assert!(
                (ypp - x * airy_ai(x)).abs() < 1e-5,
                "ODE residual at {x}: {}",
                (ypp - x * airy_ai(x)).abs()
            );
        }
    }

    // scipy-based reference for pi^{-1/4}/sqrt(2^n n!) H_n(u) e^{-u^2/2}
    const HERMITE_REF: [(usize, f64, f64); 8] = [
        (0, 0.0, 0.7511255444649425),
        (0, 1.0, 0.45558067201133257),
        (1, 0.5, 0.46871701988925174),
        (2, -1.3, 0.5429947790742691),
        (3, 2.0, 0.5868984204285566),
        (5, 0.7, 0.32729676349851067),
        (10, 3.0, -0.42352000783766164),
        (50, 9.0, -0.2664644860814679),
    ];

    #[test]
    fn hermite_matches_reference() {
        for &(n, u, want) in &HERMITE_REF {
            let got = hermite_fn(n, u);
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1.0),
                "h_{n}({u}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn hermite_derivative_ladder() {
        for &(n, u) in &[(0usize, 0.3), (2, -1.1), (7, 2.2)] {
            let h = 1e-6;
            let (_, dh) = hermite_fn_pair(n, u);
            let fd = (hermite_fn(n, u + h) - hermite_fn(n, u - h)) / (2.0 * h);
            assert!((dh - fd).abs() < 1e-8, "n={n} u={u}: {dh} vs {fd}");
        }
    }

    #[test]
    fn hermite_deep_tail_is_finite() {
        let (h, dh) = hermite_fn_pair(50, 40.0);
        assert!(h.is_finite() && dh.is_finite());
        assert!(h.abs() < 1e-100);
    }
}
