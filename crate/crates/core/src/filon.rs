//! Oscillatory moments and the Filon-type assembly of the two
//! variation-of-constants integrals
//!
//! ```text
//! int_0^h  (h-tau) sinc((h-tau)G)  m(t_k+tau) [psi_k + tau psi'_k + q(tau) w3] dtau
//! int_0^h  cos((h-tau)G)           m(t_k+tau) [psi_k + tau psi'_k + q(tau) w3] dtau
//! ```
//!
//! with `q(tau) = tau^2/(2h)` on ordinary steps and `tau^2/2` on the first
//! step. Per modulated term the oscillatory phase `e^{i omega_n tau}` is
//! pulled out of the integrand; the remaining smooth factor is interpolated
//! by the quadratic matching value and derivative at `tau = 0` and the
//! derivative at `tau = h`, and the products `polynomial * e^{i omega tau}`
//! are integrated exactly through the moments
//! `mu_j = int_0^h tau^{j-1} e^{i omega tau} dtau`. The local error of this
//! rule is `O(h^4)` with a constant independent of `omega`.
//!
//! Derivatives of the smooth factors are formed from the identities
//!
//! ```text
//! d/dtau [ G^{-1}sin((h-tau)G) a(.) ] = -cos((h-tau)G) a + G^{-1}sin((h-tau)G) a'
//! d/dtau [ cos((h-tau)G) a(.) ]      =  G sin((h-tau)G) a + cos((h-tau)G) a'
//! ```
//!
//! so that every `tau = h` evaluation of a kernel reduces to a pointwise
//! envelope multiplication (sin kernel vanishes, cos kernel is the
//! identity) and needs no transform. Envelope multiplication is applied in
//! physical space first, the trig operator in transform space second; the
//! two orderings differ since the operators do not commute.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mass::MassModel;
use crate::spectral::{operator_symbol, FieldState, OperatorKind, SpectralGrid};

/// Below this value of `|omega h|` the closed-form moments lose too many
/// digits to cancellation and the series branch is used instead. At the
/// boundary the closed form is still good to ~1e-13 relative and the series
/// converges in about twenty terms.
pub const SERIES_THRESHOLD: f64 = 0.5;

/// The three moments `mu_j = int_0^h tau^{j-1} e^{i omega tau} dtau` with the
/// phase `e^{i omega t_k}` factored out; the full integrals over
/// `[t_k, t_k+h]` are `e^{i omega t_k} mu_j`.
#[derive(Debug, Clone, Copy)]
pub struct OscillatoryMoments {
    pub omega: f64,
    pub h: f64,
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub mu3: Complex64,
}

/// Compute the moments for one `(omega, h)` pair.
///
/// For `|omega h| >= SERIES_THRESHOLD` the closed forms are used, arranged
/// around `e^{iz}-1` (evaluated cancellation-free via the half-angle sine)
/// so the subtractive losses stay bounded. Below the threshold the
/// absolutely convergent series `sum_m (i omega)^m h^{m+j} / (m! (m+j))`
/// is summed to machine precision.
pub fn moments(omega: f64, h: f64) -> Result<OscillatoryMoments> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    let z = omega * h;
    let (mu1, mu2, mu3) = if z.abs() >= SERIES_THRESHOLD {
        closed_form(omega, z)
    } else {
        series(omega, h)
    };
    Ok(OscillatoryMoments {
        omega,
        h,
        mu1,
        mu2,
        mu3,
    })
}

/// Closed-form branch regardless of the threshold; `omega` must be nonzero.
/// Exposed so the agreement of the two branches around the switch point can
/// be checked from outside.
pub fn moments_closed_form(omega: f64, h: f64) -> Result<OscillatoryMoments> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    if omega == 0.0 {
        return Err(Error::InvalidConfig(
            "closed-form moments need omega != 0".into(),
        ));
    }
    let (mu1, mu2, mu3) = closed_form(omega, omega * h);
    Ok(OscillatoryMoments {
        omega,
        h,
        mu1,
        mu2,
        mu3,
    })
}

/// Series branch regardless of the threshold; converges for moderate
/// `|omega h|` only.
pub fn moments_series(omega: f64, h: f64) -> Result<OscillatoryMoments> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    let (mu1, mu2, mu3) = series(omega, h);
    Ok(OscillatoryMoments {
        omega,
        h,
        mu1,
        mu2,
        mu3,
    })
}

fn closed_form(omega: f64, z: f64) -> (Complex64, Complex64, Complex64) {
    let i = Complex64::i();
    let e = Complex64::cis(z);
    // e^{iz} - 1 without cancellation: cos z - 1 = -2 sin^2(z/2)
    let em1 = Complex64::new(-2.0 * (z / 2.0).sin().powi(2), z.sin());
    let mu1 = -i * em1 / omega;
    let mu2 = (em1 - i * z * e) / (omega * omega);
    // e^{iz}(-i z^2 + 2z + 2i) - 2i = 2i (e^{iz}-1) + e^{iz} z (2 - i z)
    let mu3 = (2.0 * i * em1 + e * z * Complex64::new(2.0, -z)) / (omega * omega * omega);
    (mu1, mu2, mu3)
}

fn series(omega: f64, h: f64) -> (Complex64, Complex64, Complex64) {
    let iwh = Complex64::new(0.0, omega * h);
    let hp = [h, h * h, h * h * h];
    let mut mu = [Complex64::default(); 3];
    // c = (i omega h)^m / m!
    let mut c = Complex64::new(1.0, 0.0);
    for m in 0..64u32 {
        for (j, acc) in mu.iter_mut().enumerate() {
            *acc += c * hp[j] / (m as f64 + j as f64 + 1.0);
        }
        c *= iwh / (m as f64 + 1.0);
        if c.norm() < 1e-18 {
            break;
        }
    }
    (mu[0], mu[1], mu[2])
}

/// Moments for every term of a model at a fixed step size.
///
/// Built once per run; per step only the phases `e^{i omega_n t_k}` change,
/// one complex multiply per term.
#[derive(Debug, Clone)]
pub struct MomentCache {
    h: f64,
    per_term: Vec<OscillatoryMoments>,
}

impl MomentCache {
    pub fn new(model: &MassModel, h: f64) -> Result<Self> {
        let per_term = model
            .terms()
            .iter()
            .map(|t| moments(t.omega(), h))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { h, per_term })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn get(&self, term_index: usize) -> &OscillatoryMoments {
        &self.per_term[term_index]
    }

    fn check(&self, h: f64, n_terms: usize) -> Result<()> {
        if self.h != h {
            return Err(Error::StaleMoments {
                cached: self.h,
                requested: h,
            });
        }
        if self.per_term.len() != n_terms {
            return Err(Error::LengthMismatch {
                expected: n_terms,
                got: self.per_term.len(),
            });
        }
        Ok(())
    }
}

/// Scratch buffers for one assembly; contents carry no meaning across calls.
///
/// Holds the four envelope samples a step needs (`a`, `a'` at both interval
/// endpoints), three product/transform buffers, the spectral and physical
/// accumulators for each kernel, transform scratch, and the per-`h` symbol
/// tables `cos(h g)`, `(h) sinc(h g)`, `g sin(h g)` (recomputed only when
/// `h` changes).
pub struct FilonWorkspace {
    a0: Vec<Complex64>,
    a0_dt: Vec<Complex64>,
    ah: Vec<Complex64>,
    ah_dt: Vec<Complex64>,
    prod_a: Vec<Complex64>,
    prod_b: Vec<Complex64>,
    prod_c: Vec<Complex64>,
    acc_sin: Vec<Complex64>,
    acc_cos: Vec<Complex64>,
    phys_sin: Vec<Complex64>,
    phys_cos: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
    kernel_h: f64,
    sym_sin: Vec<f64>,
    sym_cos: Vec<f64>,
    sym_gsin: Vec<f64>,
}

impl FilonWorkspace {
    pub fn new(grid: &SpectralGrid) -> Self {
        let m = grid.len();
        let zeros = vec![Complex64::default(); m];
        Self {
            a0: zeros.clone(),
            a0_dt: zeros.clone(),
            ah: zeros.clone(),
            ah_dt: zeros.clone(),
            prod_a: zeros.clone(),
            prod_b: zeros.clone(),
            prod_c: zeros.clone(),
            acc_sin: zeros.clone(),
            acc_cos: zeros.clone(),
            phys_sin: zeros.clone(),
            phys_cos: zeros,
            fft_scratch: vec![Complex64::default(); grid.scratch_len()],
            kernel_h: f64::NAN,
            sym_sin: vec![0.0; m],
            sym_cos: vec![0.0; m],
            sym_gsin: vec![0.0; m],
        }
    }

    fn ensure_kernels(&mut self, grid: &SpectralGrid, h: f64) {
        if self.kernel_h == h {
            return;
        }
        for (((s, c), gs), &g) in self
            .sym_sin
            .iter_mut()
            .zip(self.sym_cos.iter_mut())
            .zip(self.sym_gsin.iter_mut())
            .zip(grid.symbols())
        {
            *s = operator_symbol(OperatorKind::SincScaled, h, g);
            *c = operator_symbol(OperatorKind::Cos, h, g);
            *gs = operator_symbol(OperatorKind::GSin, h, g);
        }
        self.kernel_h = h;
    }
}

fn check_lengths(grid: &SpectralGrid, state: &FieldState, w3: &[Complex64]) -> Result<()> {
    for len in [state.psi.len(), state.dpsi.len(), w3.len()] {
        if len != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: len,
            });
        }
    }
    Ok(())
}

/// Taylor-weight data for the `w3` vector: `q(h)` and `q'(h)`.
fn tail_weights(h: f64, first_step: bool) -> (f64, f64) {
    if first_step {
        (h * h / 2.0, h)
    } else {
        (h / 2.0, 1.0)
    }
}

/// Filon assembly of both Duhamel integrals at once.
///
/// `state_k` holds `(psi_k, psi'_k)` at `t_k`; `w3` is `psi'_k - psi'_{k-1}`
/// on ordinary steps or `psi''_0` on the first step (selected by
/// `first_step`, which also switches the `tau^2` weight between `1/(2h)`
/// and `1/2`). Returns `(sin-kernel integral, cos-kernel integral)`.
///
/// The three transform-requiring kernel evaluations at `tau = 0` per term
/// (`a psi`, `a' psi`, `a psi'`) are shared between the two kernels and all
/// three interpolation weights; results are accumulated in transform space
/// so only one inverse transform per kernel is spent per call.
pub fn filon_duhamel_integrals(
    grid: &SpectralGrid,
    model: &MassModel,
    cache: &MomentCache,
    state_k: &FieldState,
    w3: &[Complex64],
    h: f64,
    first_step: bool,
    ws: &mut FilonWorkspace,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    check_lengths(grid, state_k, w3)?;
    cache.check(h, model.terms().len())?;
    ws.ensure_kernels(grid, h);

    let t_k = state_k.t;
    let (qh, qdh) = tail_weights(h, first_step);
    let half_h_inv = 1.0 / (2.0 * h);

    ws.acc_sin.fill(Complex64::default());
    ws.acc_cos.fill(Complex64::default());
    ws.phys_sin.fill(Complex64::default());
    ws.phys_cos.fill(Complex64::default());

    for (n, term) in model.terms().iter().enumerate() {
        let mom = cache.get(n);
        let phase = Complex64::cis(term.omega() * t_k);
        let int1 = phase * mom.mu1;
        let int2 = phase * mom.mu2;
        let int3 = phase * mom.mu3;
        // coefficient of the interior (tau=0) derivative data and of the
        // pointwise tau=h endpoint data
        let gamma = int3 * half_h_inv;
        let beta = int2 - gamma;

        term.envelope_into(grid, t_k, &mut ws.a0);
        term.envelope_dt_into(grid, t_k, &mut ws.a0_dt);
        term.envelope_into(grid, t_k + h, &mut ws.ah);
        term.envelope_dt_into(grid, t_k + h, &mut ws.ah_dt);

        for j in 0..grid.len() {
            ws.prod_a[j] = ws.a0[j] * state_k.psi[j];
            ws.prod_b[j] = ws.a0_dt[j] * state_k.psi[j];
            ws.prod_c[j] = ws.a0[j] * state_k.dpsi[j];
        }
        grid.forward_with(&mut ws.prod_a, &mut ws.fft_scratch);
        grid.forward_with(&mut ws.prod_b, &mut ws.fft_scratch);
        grid.forward_with(&mut ws.prod_c, &mut ws.fft_scratch);

        for j in 0..grid.len() {
            let a = ws.prod_a[j];
            let bc = ws.prod_b[j] + ws.prod_c[j];
            let s = ws.sym_sin[j];
            let c = ws.sym_cos[j];
            let gs = ws.sym_gsin[j];
            ws.acc_sin[j] += (int1 * s - beta * c) * a + beta * s * bc;
            ws.acc_cos[j] += (int1 * c + beta * gs) * a + beta * c * bc;
        }
        for j in 0..grid.len() {
            let ah = ws.ah[j];
            let ahd = ws.ah_dt[j];
            ws.phys_sin[j] -=
                gamma * ah * (state_k.psi[j] + h * state_k.dpsi[j] + qh * w3[j]);
            ws.phys_cos[j] += gamma
                * (ahd * state_k.psi[j]
                    + (h * ahd + ah) * state_k.dpsi[j]
                    + (qh * ahd + qdh * ah) * w3[j]);
        }
    }

    let mut out_sin = ws.acc_sin.clone();
    let mut out_cos = ws.acc_cos.clone();
    grid.inverse_with(&mut out_sin, &mut ws.fft_scratch);
    grid.inverse_with(&mut out_cos, &mut ws.fft_scratch);
    for j in 0..grid.len() {
        out_sin[j] += ws.phys_sin[j];
        out_cos[j] += ws.phys_cos[j];
    }
    Ok((out_sin, out_cos))
}

/// Filon approximation of the sin-kernel integral alone.
pub fn filon_sin_integral(
    grid: &SpectralGrid,
    model: &MassModel,
    cache: &MomentCache,
    state_k: &FieldState,
    w3: &[Complex64],
    h: f64,
    first_step: bool,
    ws: &mut FilonWorkspace,
) -> Result<Vec<Complex64>> {
    filon_duhamel_integrals(grid, model, cache, state_k, w3, h, first_step, ws).map(|(s, _)| s)
}

/// Filon approximation of the cos-kernel integral alone.
pub fn filon_cos_integral(
    grid: &SpectralGrid,
    model: &MassModel,
    cache: &MomentCache,
    state_k: &FieldState,
    w3: &[Complex64],
    h: f64,
    first_step: bool,
    ws: &mut FilonWorkspace,
) -> Result<Vec<Complex64>> {
    filon_duhamel_integrals(grid, model, cache, state_k, w3, h, first_step, ws).map(|(_, c)| c)
}

/// Gauss-Legendre node count for a quadrature of the given order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlOrder {
    Four,
    Six,
    Eight,
}

impl GlOrder {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            4 => Ok(Self::Four),
            6 => Ok(Self::Six),
            8 => Ok(Self::Eight),
            other => Err(Error::UnsupportedOrder(other)),
        }
    }

    /// Nodes and weights on the reference interval `[-1, 1]`.
    pub fn rule(self) -> &'static [(f64, f64)] {
        const TWO: [(f64, f64); 2] = [
            (-0.577_350_269_189_625_8, 1.0),
            (0.577_350_269_189_625_8, 1.0),
        ];
        const THREE: [(f64, f64); 3] = [
            (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
            (0.0, 0.888_888_888_888_888_9),
            (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
        ];
        const FOUR: [(f64, f64); 4] = [
            (-0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
            (-0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
            (0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
            (0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
        ];
        match self {
            Self::Four => &TWO,
            Self::Six => &THREE,
            Self::Eight => &FOUR,
        }
    }
}

/// Gauss-Legendre evaluation of the same two integrals, oscillatory phases
/// and all. Exists as the degradation baseline: its error constant grows
/// with the frequencies, unlike the Filon rule.
pub fn gauss_legendre_integrals(
    order: GlOrder,
    grid: &SpectralGrid,
    model: &MassModel,
    state_k: &FieldState,
    w3: &[Complex64],
    h: f64,
    first_step: bool,
    ws: &mut FilonWorkspace,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    check_lengths(grid, state_k, w3)?;

    let t_k = state_k.t;
    let q_scale = if first_step { 0.5 } else { 1.0 / (2.0 * h) };

    let mut out_sin = vec![Complex64::default(); grid.len()];
    let mut out_cos = vec![Complex64::default(); grid.len()];

    for &(xi, w) in order.rule() {
        let tau = 0.5 * h * (xi + 1.0);
        let weight = 0.5 * h * w;
        // full integrand value m(t_k+tau) * [psi + tau psi' + q(tau) w3]
        model.evaluate_into(grid, t_k + tau, &mut ws.prod_b);
        let q = q_scale * tau * tau;
        for j in 0..grid.len() {
            ws.prod_a[j] =
                ws.prod_b[j] * (state_k.psi[j] + tau * state_k.dpsi[j] + q * w3[j]);
        }
        grid.forward_with(&mut ws.prod_a, &mut ws.fft_scratch);
        ws.acc_sin.copy_from_slice(&ws.prod_a);
        ws.acc_cos.copy_from_slice(&ws.prod_a);
        let t_rem = h - tau;
        for (j, &g) in grid.symbols().iter().enumerate() {
            ws.acc_sin[j] *= operator_symbol(OperatorKind::SincScaled, t_rem, g);
            ws.acc_cos[j] *= operator_symbol(OperatorKind::Cos, t_rem, g);
        }
        grid.inverse_with(&mut ws.acc_sin, &mut ws.fft_scratch);
        grid.inverse_with(&mut ws.acc_cos, &mut ws.fft_scratch);
        for j in 0..grid.len() {
            out_sin[j] += weight * ws.acc_sin[j];
            out_cos[j] += weight * ws.acc_cos[j];
        }
    }
    Ok((out_sin, out_cos))
}
