//! Modulated-envelope representation of the mass coefficient
//! `m(x,t) = sum_n a_n(x,t) e^{i omega_n t}`.
//!
//! Envelope time derivatives are supplied explicitly, never differenced:
//! the quadrature assembly needs `a_n'` at interval endpoints and numerical
//! differencing would reintroduce a frequency dependence into its error.

use std::sync::Arc;

use num_complex::Complex64;

use crate::spectral::SpectralGrid;

/// Samples an envelope (or its time derivative) on the grid nodes at time `t`.
pub type EnvelopeFn = Arc<dyn Fn(&SpectralGrid, f64, &mut [Complex64]) + Send + Sync>;

/// One modulated term `a(x,t) e^{i omega t}`.
#[derive(Clone)]
pub struct MassTerm {
    omega: f64,
    envelope: EnvelopeFn,
    envelope_dt: EnvelopeFn,
}

impl std::fmt::Debug for MassTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MassTerm").field("omega", &self.omega).finish()
    }
}

impl MassTerm {
    pub fn new(omega: f64, envelope: EnvelopeFn, envelope_dt: EnvelopeFn) -> Self {
        Self {
            omega,
            envelope,
            envelope_dt,
        }
    }

    /// Term whose envelope depends on space only; the time derivative is zero.
    pub fn time_constant(omega: f64, profile: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        let envelope: EnvelopeFn = Arc::new(move |grid, _t, out| {
            for (o, &x) in out.iter_mut().zip(grid.nodes()) {
                *o = profile(x);
            }
        });
        let zero: EnvelopeFn = Arc::new(|_grid, _t, out| out.fill(Complex64::default()));
        Self::new(omega, envelope, zero)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn envelope_into(&self, grid: &SpectralGrid, t: f64, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), grid.len());
        (self.envelope)(grid, t, out);
    }

    pub fn envelope_dt_into(&self, grid: &SpectralGrid, t: f64, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), grid.len());
        (self.envelope_dt)(grid, t, out);
    }
}

/// Sum of modulated terms with the cached maximal frequency.
#[derive(Clone, Debug)]
pub struct MassModel {
    terms: Vec<MassTerm>,
    omega_max: f64,
}

impl MassModel {
    pub fn new(terms: Vec<MassTerm>) -> Self {
        assert!(!terms.is_empty(), "mass model needs at least one term");
        let omega_max = terms.iter().fold(0.0f64, |acc, t| acc.max(t.omega.abs()));
        Self { terms, omega_max }
    }

    /// Identically zero coefficient; the free wave equation.
    pub fn zero() -> Self {
        Self::new(vec![MassTerm::time_constant(0.0, |_| Complex64::default())])
    }

    /// Constant coefficient `m(x,t) = m0`.
    pub fn constant(m0: f64) -> Self {
        Self::new(vec![MassTerm::time_constant(0.0, move |_| Complex64::new(m0, 0.0))])
    }

    /// Single-frequency preset: `m(x,t) = -(1 + cos(omega t)) x^2` split into
    /// the terms `(0, -x^2)`, `(+omega, -x^2/2)`, `(-omega, -x^2/2)`.
    pub fn preset_example1(omega: f64) -> Self {
        assert!(omega > 0.0, "preset_example1 requires omega > 0");
        Self::new(vec![
            MassTerm::time_constant(0.0, |x| Complex64::new(-x * x, 0.0)),
            MassTerm::time_constant(omega, |x| Complex64::new(-x * x / 2.0, 0.0)),
            MassTerm::time_constant(-omega, |x| Complex64::new(-x * x / 2.0, 0.0)),
        ])
    }

    /// Multi-frequency preset: `m(x,t) = -sum_{n=0}^{5} (1 + cos(10^n t)) x^2`,
    /// realized as one non-oscillatory term `-6 x^2` plus conjugate pairs
    /// `(+-10^n, -x^2/2)` for `n = 0..5`. Frequencies span 1 to 1e5.
    pub fn preset_example2() -> Self {
        let mut terms = vec![MassTerm::time_constant(0.0, |x| Complex64::new(-6.0 * x * x, 0.0))];
        for n in 0..6 {
            let omega = 10f64.powi(n);
            terms.push(MassTerm::time_constant(omega, |x| {
                Complex64::new(-x * x / 2.0, 0.0)
            }));
            terms.push(MassTerm::time_constant(-omega, |x| {
                Complex64::new(-x * x / 2.0, 0.0)
            }));
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> &[MassTerm] {
        &self.terms
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// Pointwise value `sum_n a_n(x,t) e^{i omega_n t}` on the nodes.
    pub fn evaluate(&self, grid: &SpectralGrid, t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); grid.len()];
        self.evaluate_into(grid, t, &mut out);
        out
    }

    pub fn evaluate_into(&self, grid: &SpectralGrid, t: f64, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), grid.len());
        out.fill(Complex64::default());
        let mut env = vec![Complex64::default(); grid.len()];
        for term in &self.terms {
            term.envelope_into(grid, t, &mut env);
            let phase = Complex64::cis(term.omega * t);
            for (o, e) in out.iter_mut().zip(&env) {
                *o += e * phase;
            }
        }
    }
}
