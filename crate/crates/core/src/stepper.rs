//! Third-order exponential time stepper.
//!
//! Each step advances the exact free flow `R(h)` and adds the two Duhamel
//! integrals with the unknown `psi(t_k + tau)` closed by its quadratic
//! Taylor polynomial. The `tau^2` coefficient uses `psi''_0` recovered from
//! the equation on the first step and the backward difference
//! `(psi'_k - psi'_{k-1})/h` afterwards, so no second derivative is ever
//! formed past step one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filon::{
    filon_duhamel_integrals, gauss_legendre_integrals, FilonWorkspace, GlOrder, MomentCache,
};
use crate::mass::MassModel;
use crate::spectral::{FieldState, SpectralGrid};

/// Quadrature used for the Duhamel integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Filon,
    Gl4,
    Gl6,
    Gl8,
}

/// Run parameters. The run interval is `[t0, t0 + steps * h]`.
#[derive(Debug, Clone)]
pub struct StepperConfig {
    pub h: f64,
    pub steps: usize,
    pub quadrature: Quadrature,
    /// Diagnostic bound on imaginary drift for problems declared
    /// real-valued; reported, not enforced.
    pub real_tolerance: f64,
    /// Flip the sign of the `m(t0) psi_0` contribution to `psi''_0`.
    /// Deliberately wrong; exists so the test suite can verify that the
    /// flipped sign destroys third-order convergence.
    pub negate_initial_curvature: bool,
}

impl StepperConfig {
    pub fn new(h: f64, steps: usize, quadrature: Quadrature) -> Self {
        Self {
            h,
            steps,
            quadrature,
            real_tolerance: 1e-8,
            negate_initial_curvature: false,
        }
    }
}

/// State of the recurrence after `k >= 1` steps.
#[derive(Debug, Clone)]
pub struct StepperState {
    pub current: FieldState,
    /// `psi'_{k-1}`; present exactly from step one onward.
    pub prev_dpsi: Vec<Complex64>,
    pub k: usize,
}

/// Driver owning the per-run moment cache and scratch workspace.
///
/// A run is strictly sequential in `k`; independent runs over distinct
/// steppers may execute concurrently.
pub struct Stepper<'a> {
    grid: &'a SpectralGrid,
    model: &'a MassModel,
    cfg: StepperConfig,
    cache: MomentCache,
    ws: FilonWorkspace,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: &'a SpectralGrid, model: &'a MassModel, cfg: StepperConfig) -> Result<Self> {
        if !(cfg.h > 0.0) {
            return Err(Error::NonPositiveStep(cfg.h));
        }
        let cache = MomentCache::new(model, cfg.h)?;
        let ws = FilonWorkspace::new(grid);
        Ok(Self {
            grid,
            model,
            cfg,
            cache,
            ws,
        })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// `psi''_0 = Delta psi_0 + m(t_0) psi_0`, with the Laplacian applied
    /// spectrally as `-G^2`.
    pub fn second_derivative_initial(&self, state0: &FieldState) -> Result<Vec<Complex64>> {
        let mut out = self.grid.laplacian(&state0.psi)?;
        let mass = self.model.evaluate(self.grid, state0.t);
        let sign = if self.cfg.negate_initial_curvature {
            -1.0
        } else {
            1.0
        };
        for ((o, m), p) in out.iter_mut().zip(&mass).zip(&state0.psi) {
            *o += sign * m * p;
        }
        Ok(out)
    }

    fn integrals(
        &mut self,
        state: &FieldState,
        w3: &[Complex64],
        first_step: bool,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        match self.cfg.quadrature {
            Quadrature::Filon => filon_duhamel_integrals(
                self.grid,
                self.model,
                &self.cache,
                state,
                w3,
                self.cfg.h,
                first_step,
                &mut self.ws,
            ),
            Quadrature::Gl4 | Quadrature::Gl6 | Quadrature::Gl8 => {
                let order = match self.cfg.quadrature {
                    Quadrature::Gl4 => GlOrder::Four,
                    Quadrature::Gl6 => GlOrder::Six,
                    _ => GlOrder::Eight,
                };
                gauss_legendre_integrals(
                    order,
                    self.grid,
                    self.model,
                    state,
                    w3,
                    self.cfg.h,
                    first_step,
                    &mut self.ws,
                )
            }
        }
    }

    fn advance(
        &mut self,
        state: &FieldState,
        w3: &[Complex64],
        first_step: bool,
    ) -> Result<FieldState> {
        let (int_sin, int_cos) = self.integrals(state, w3, first_step)?;
        let mut next = self.grid.free_propagator(self.cfg.h, state)?;
        for j in 0..self.grid.len() {
            next.psi[j] += int_sin[j];
            next.dpsi[j] += int_cos[j];
        }
        Ok(next)
    }

    /// First step: the `tau^2/2` weight applies to `psi''_0`.
    pub fn step_first(&mut self, state0: &FieldState) -> Result<StepperState> {
        let w3 = self.second_derivative_initial(state0)?;
        let next = self.advance(state0, &w3, true)?;
        Ok(StepperState {
            current: next,
            prev_dpsi: state0.dpsi.clone(),
            k: 1,
        })
    }

    /// Ordinary step: `w3 = psi'_k - psi'_{k-1}` with the `tau^2/(2h)` weight.
    pub fn step(&mut self, s: StepperState) -> Result<StepperState> {
        debug_assert!(s.k >= 1);
        let w3: Vec<Complex64> = s
            .current
            .dpsi
            .iter()
            .zip(&s.prev_dpsi)
            .map(|(a, b)| a - b)
            .collect();
        let next = self.advance(&s.current, &w3, false)?;
        Ok(StepperState {
            current: next,
            prev_dpsi: s.current.dpsi,
            k: s.k + 1,
        })
    }

    /// Drive the recurrence over all configured steps, streaming every
    /// intermediate state to `observer` when one is provided. Aborts with
    /// the offending step index if a state stops being finite.
    pub fn run(
        &mut self,
        state0: &FieldState,
        mut observer: Option<&mut dyn FnMut(&FieldState)>,
    ) -> Result<FieldState> {
        if self.cfg.steps == 0 {
            return Ok(state0.clone());
        }
        let mut s = self.step_first(state0)?;
        if !s.current.is_finite() {
            return Err(Error::NonFinite(1));
        }
        if let Some(obs) = observer.as_deref_mut() {
            obs(&s.current);
        }
        for _ in 1..self.cfg.steps {
            s = self.step(s)?;
            if !s.current.is_finite() {
                return Err(Error::NonFinite(s.k));
            }
            if let Some(obs) = observer.as_deref_mut() {
                obs(&s.current);
            }
        }
        Ok(s.current)
    }
}
