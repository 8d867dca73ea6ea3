//! Quadrature oracles shared by the integration suites.
//!
//! Everything here recomputes target quantities from their defining
//! integrals with composite Gauss-Legendre panels and panel doubling,
//! independently of the closed forms and assemblies under test.
#![allow(dead_code)]

use num_complex::Complex64;
use oscikg::{FieldState, MassModel, SpectralGrid};

/// 10-point Gauss-Legendre rule on [-1, 1]: (node, weight).
pub const GL10: [(f64, f64); 10] = [
    (-0.9739065285171717, 0.0666713443086881),
    (-0.8650633666889845, 0.1494513491505806),
    (-0.6794095682990244, 0.2190863625159820),
    (-0.4333953941292472, 0.2692667193099963),
    (-0.1488743389816312, 0.2955242247147529),
    (0.1488743389816312, 0.2955242247147529),
    (0.4333953941292472, 0.2692667193099963),
    (0.6794095682990244, 0.2190863625159820),
    (0.8650633666889845, 0.1494513491505806),
    (0.9739065285171717, 0.0666713443086881),
];

fn composite_scalar(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, panels: usize) -> Complex64 {
    let w = (b - a) / panels as f64;
    let mut acc = Complex64::default();
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        for &(xi, wi) in &GL10 {
            acc += wi * f(mid + 0.5 * w * xi);
        }
    }
    acc * (w / 2.0)
}

/// Adaptive composite quadrature of a complex scalar integrand over [a, b].
/// `phase` is the total oscillation a*|omega| expected over the interval and
/// only seeds the initial panel count.
pub fn quad_scalar(f: impl Fn(f64) -> Complex64, a: f64, b: f64, phase: f64) -> Complex64 {
    let mut panels = ((phase.abs() / 3.0) as usize).max(8);
    let mut prev = composite_scalar(&f, a, b, panels);
    loop {
        panels *= 2;
        let cur = composite_scalar(&f, a, b, panels);
        if (cur - prev).norm() <= 1e-14 * (1.0 + cur.norm()) || panels > 1 << 21 {
            return cur;
        }
        prev = cur;
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// One evaluation pass of the two variation-of-constants integrals
///
/// ```text
/// int_0^h (h-tau) sinc((h-tau)G) m(t_k+tau) u(tau) dtau
/// int_0^h cos((h-tau)G)          m(t_k+tau) u(tau) dtau
/// ```
///
/// with `u(tau) = psi + tau psi' + q(tau) w3`, by brute-force composite
/// Gauss-Legendre in time; the operator is applied mode-wise per node.
fn duhamel_composite(
    grid: &SpectralGrid,
    model: &MassModel,
    state: &FieldState,
    w3: &[Complex64],
    h: f64,
    first_step: bool,
    panels: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.len();
    let mut acc_sin = vec![Complex64::default(); n];
    let mut acc_cos = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); grid.scratch_len()];
    let mut mass = vec![Complex64::default(); n];
    let pw = h / panels as f64;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * pw;
        for &(xi, wi) in &GL10 {
            let tau = mid + 0.5 * pw * xi;
            let q = if first_step {
                tau * tau / 2.0
            } else {
                tau * tau / (2.0 * h)
            };
            model.evaluate_into(grid, state.t + tau, &mut mass);
            let mut v: Vec<Complex64> = (0..n)
                .map(|j| mass[j] * (state.psi[j] + tau * state.dpsi[j] + q * w3[j]))
                .collect();
            grid.forward_with(&mut v, &mut scratch);
            let weight = wi * pw / 2.0;
            for (j, &g) in grid.symbols().iter().enumerate() {
                let arg = (h - tau) * g;
                let s = if g == 0.0 { h - tau } else { arg.sin() / g };
                acc_sin[j] += weight * s * v[j];
                acc_cos[j] += weight * arg.cos() * v[j];
            }
        }
    }
    grid.inverse_with(&mut acc_sin, &mut scratch);
    grid.inverse_with(&mut acc_cos, &mut scratch);
    (acc_sin, acc_cos)
}

/// Oracle values of the two Duhamel integrals, refined until two successive
/// panel doublings agree to near machine precision.
pub fn duhamel_oracle(
    grid: &SpectralGrid,
    model: &MassModel,
    state: &FieldState,
    w3: &[Complex64],
    h: f64,
    first_step: bool,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut panels = ((model.omega_max() * h / 3.0) as usize).max(8);
    let mut prev = duhamel_composite(grid, model, state, w3, h, first_step, panels);
    loop {
        panels *= 2;
        let cur = duhamel_composite(grid, model, state, w3, h, first_step, panels);
        let d = cur
            .0
            .iter()
            .zip(&prev.0)
            .chain(cur.1.iter().zip(&prev.1))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = l2(&cur.0) + l2(&cur.1);
        if d <= 1e-13 * (1.0 + scale) || panels > 1 << 14 {
            return cur;
        }
        prev = cur;
    }
}
