//! Periodic Fourier collocation grid and diagonal operator functions.
//!
//! The grid carries the collocation nodes together with the symbols
//! `g_k = |2 pi k / L|` of the operator `G = sqrt(-Delta)` in the native
//! (unshifted) transform ordering. Operator functions of `G` are applied
//! diagonally in transform space. Transform normalization is fixed:
//! the forward transform is unnormalized, the inverse carries `1/M`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Trigonometric operator functions applied diagonally in transform space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `cos(tG)`.
    Cos,
    /// `G^{-1} sin(tG)` defined through the entire function `t sinc(tG)`,
    /// finite at the zero mode where it reduces to multiplication by `t`.
    SincScaled,
    /// `G sin(tG)`; zero at the zero mode.
    GSin,
}

/// Per-mode multiplier of an operator function at symbol `g`.
pub fn operator_symbol(kind: OperatorKind, t: f64, g: f64) -> f64 {
    match kind {
        OperatorKind::Cos => (t * g).cos(),
        OperatorKind::SincScaled => {
            if g == 0.0 {
                t
            } else {
                (t * g).sin() / g
            }
        }
        OperatorKind::GSin => g * (t * g).sin(),
    }
}

/// Complex field pair `(psi, psi')` sampled on the grid at one time level.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub psi: Vec<Complex64>,
    pub dpsi: Vec<Complex64>,
    pub t: f64,
}

impl FieldState {
    pub fn new(psi: Vec<Complex64>, dpsi: Vec<Complex64>, t: f64) -> Result<Self> {
        if psi.len() != dpsi.len() {
            return Err(Error::LengthMismatch {
                expected: psi.len(),
                got: dpsi.len(),
            });
        }
        Ok(Self { psi, dpsi, t })
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.psi
            .iter()
            .chain(self.dpsi.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest imaginary magnitude over both components; diagnostic for
    /// problems declared real-valued.
    pub fn max_imag(&self) -> f64 {
        self.psi
            .iter()
            .chain(self.dpsi.iter())
            .fold(0.0f64, |acc, z| acc.max(z.im.abs()))
    }
}

/// Periodic 1-D collocation grid with the symbols of `G = sqrt(-Delta)`.
///
/// Immutable after construction; transform plans are shared and pure to
/// apply, so a grid may be used from several solver instances at once.
#[derive(Clone)]
pub struct SpectralGrid {
    x0: f64,
    x1: f64,
    size: usize,
    nodes: Vec<f64>,
    symbols_g: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("x0", &self.x0)
            .field("x1", &self.x1)
            .field("size", &self.size)
            .finish()
    }
}

impl SpectralGrid {
    /// Build a grid over `[x0, x1)` with `m` subintervals (`m` even, >= 4).
    ///
    /// Node `j` is `x0 + j dx`; the right endpoint is excluded by
    /// periodicity. Symbol ordering follows the native transform layout:
    /// index `k < m/2` holds integer frequency `k`, index `k >= m/2` holds
    /// `k - m`; the Nyquist index `m/2` carries `g = pi m / L`.
    pub fn new(x0: f64, x1: f64, m: usize) -> Result<Self> {
        if !(x1 > x0) {
            return Err(Error::InvalidInterval { x0, x1 });
        }
        if m < 4 || m % 2 != 0 {
            return Err(Error::InvalidGridSize(m));
        }
        let length = x1 - x0;
        let dx = length / m as f64;
        let nodes = (0..m).map(|j| x0 + j as f64 * dx).collect();
        let symbols_g = (0..m)
            .map(|k| {
                let freq = if k < m / 2 { k as isize } else { k as isize - m as isize };
                (2.0 * std::f64::consts::PI * freq as f64 / length).abs()
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        Ok(Self {
            x0,
            x1,
            size: m,
            nodes,
            symbols_g,
            fwd,
            inv,
        })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / self.size as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols_g
    }

    /// Largest symbol, `pi m / L`; governs explicit stability limits.
    pub fn max_symbol(&self) -> f64 {
        std::f64::consts::PI * self.size as f64 / (self.x1 - self.x0)
    }

    /// Scratch length needed by [`forward_with`](Self::forward_with) /
    /// [`inverse_with`](Self::inverse_with).
    pub fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
    }

    /// In-place unnormalized forward transform using caller scratch.
    pub fn forward_with(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.fwd
            .process_with_scratch(buf, &mut scratch[..self.fwd.get_inplace_scratch_len()]);
    }

    /// In-place inverse transform carrying the `1/M` normalization.
    pub fn inverse_with(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inv
            .process_with_scratch(buf, &mut scratch[..self.inv.get_inplace_scratch_len()]);
        let scale = 1.0 / self.size as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    fn check_len(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.size {
            return Err(Error::LengthMismatch {
                expected: self.size,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Apply `cos(tG)`, `t sinc(tG)` or `G sin(tG)` to `v`.
    pub fn apply_operator_function(
        &self,
        kind: OperatorKind,
        t: f64,
        v: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        self.check_len(v)?;
        let mut buf = v.to_vec();
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.forward_with(&mut buf, &mut scratch);
        for (z, &g) in buf.iter_mut().zip(&self.symbols_g) {
            *z *= operator_symbol(kind, t, g);
        }
        self.inverse_with(&mut buf, &mut scratch);
        Ok(buf)
    }

    /// Advance a state by the free flow `R(t)`:
    /// `(cos(tG) psi + t sinc(tG) psi', -G sin(tG) psi + cos(tG) psi')`.
    pub fn free_propagator(&self, t: f64, state: &FieldState) -> Result<FieldState> {
        self.check_len(&state.psi)?;
        self.check_len(&state.dpsi)?;
        let mut psi = state.psi.clone();
        let mut dpsi = state.dpsi.clone();
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.forward_with(&mut psi, &mut scratch);
        self.forward_with(&mut dpsi, &mut scratch);
        for ((p, q), &g) in psi.iter_mut().zip(dpsi.iter_mut()).zip(&self.symbols_g) {
            let c = operator_symbol(OperatorKind::Cos, t, g);
            let s = operator_symbol(OperatorKind::SincScaled, t, g);
            let gs = operator_symbol(OperatorKind::GSin, t, g);
            let new_p = c * *p + s * *q;
            let new_q = -gs * *p + c * *q;
            *p = new_p;
            *q = new_q;
        }
        self.inverse_with(&mut psi, &mut scratch);
        self.inverse_with(&mut dpsi, &mut scratch);
        Ok(FieldState {
            psi,
            dpsi,
            t: state.t + t,
        })
    }

    /// Apply the discrete Laplacian `-G^2` spectrally.
    pub fn laplacian(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(v)?;
        let mut buf = v.to_vec();
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.forward_with(&mut buf, &mut scratch);
        for (z, &g) in buf.iter_mut().zip(&self.symbols_g) {
            *z *= -g * g;
        }
        self.inverse_with(&mut buf, &mut scratch);
        Ok(buf)
    }

    /// Quadratic form `||G psi||^2 + ||psi'||^2` conserved by the free flow.
    pub fn free_energy(&self, state: &FieldState) -> Result<f64> {
        self.check_len(&state.psi)?;
        self.check_len(&state.dpsi)?;
        let mut psi = state.psi.clone();
        let mut dpsi = state.dpsi.clone();
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.forward_with(&mut psi, &mut scratch);
        self.forward_with(&mut dpsi, &mut scratch);
        // Parseval with the 1/M inverse normalization: physical-space l2
        // equals spectral l2 / M.
        let scale = 1.0 / self.size as f64;
        let mut energy = 0.0;
        for ((p, q), &g) in psi.iter().zip(&dpsi).zip(&self.symbols_g) {
            energy += (g * g * p.norm_sqr() + q.norm_sqr()) * scale;
        }
        Ok(energy)
    }
}

/// Build a grid; free-function spelling of [`SpectralGrid::new`].
pub fn build_grid(x0: f64, x1: f64, m: usize) -> Result<SpectralGrid> {
    SpectralGrid::new(x0, x1, m)
}
