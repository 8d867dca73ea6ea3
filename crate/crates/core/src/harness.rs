//! Experiment orchestration: problem presets, convergence sweeps,
//! frequency sweeps, timing, and CSV emission.

use std::fmt;
use std::io::Write as _;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mass::MassModel;
use crate::reference::{self, ReferenceSpec};
use crate::spectral::{FieldState, SpectralGrid};
use crate::stepper::{Quadrature, Stepper, StepperConfig};

/// Built-in problems selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Single-frequency oscillatory potential `-(1+cos(omega t)) x^2`.
    Example1,
    /// Multi-frequency potential with frequencies 1 to 1e5.
    Example2,
    /// Constant coefficient `m = -1`, with a closed-form solution.
    ConstantMass,
    /// Zero coefficient; the free wave equation.
    Free,
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(Self::Example1),
            "example2" => Ok(Self::Example2),
            "constant_mass" | "constant-mass" => Ok(Self::ConstantMass),
            "free" => Ok(Self::Free),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::ConstantMass => "constant_mass",
            Self::Free => "free",
        };
        f.write_str(s)
    }
}

/// Method identifiers shared between the library and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MethodId {
    Rk2,
    Rk4,
    Xi3Filon,
    Xi3Gl4,
    Xi3Gl6,
    Xi3Gl8,
    Xi3Fine,
}

impl MethodId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rk2 => "rk2",
            Self::Rk4 => "rk4",
            Self::Xi3Filon => "xi3-filon",
            Self::Xi3Gl4 => "xi3-gl4",
            Self::Xi3Gl6 => "xi3-gl6",
            Self::Xi3Gl8 => "xi3-gl8",
            Self::Xi3Fine => "xi3-fine",
        }
    }
}

impl FromStr for MethodId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk2" => Ok(Self::Rk2),
            "rk4" => Ok(Self::Rk4),
            "xi3-filon" => Ok(Self::Xi3Filon),
            "xi3-gl4" => Ok(Self::Xi3Gl4),
            "xi3-gl6" => Ok(Self::Xi3Gl6),
            "xi3-gl8" => Ok(Self::Xi3Gl8),
            "xi3-fine" => Ok(Self::Xi3Fine),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One experiment: a problem, a grid, a step ladder and a method list.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: Problem,
    /// Frequency for [`Problem::Example1`]; must be `None` otherwise.
    pub omega: Option<f64>,
    pub x0: f64,
    pub x1: f64,
    pub grid_m: usize,
    pub t0: f64,
    pub t_final: f64,
    pub steps_list: Vec<usize>,
    pub methods: Vec<MethodId>,
    pub reference: ReferenceSpec,
    pub out_path: Option<String>,
    pub seed: u64,
    /// Timing repetitions per run; the minimum wall time is reported.
    pub timing_reps: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_list.is_empty() {
            return Err(Error::InvalidConfig("steps list is empty".into()));
        }
        if !self.steps_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "steps list must be strictly increasing".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("method list is empty".into()));
        }
        if self.omega.is_some() && self.problem != Problem::Example1 {
            return Err(Error::InvalidConfig(format!(
                "--omega only applies to example1, not {}",
                self.problem
            )));
        }
        if !(self.t_final > self.t0) {
            return Err(Error::InvalidConfig("t_final must exceed t0".into()));
        }
        Ok(())
    }
}

/// One measured run, destined for a CSV row.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub method: MethodId,
    pub steps: usize,
    pub h: f64,
    pub omega_max: f64,
    pub error_l2: f64,
    pub runtime_seconds: f64,
    pub slope_estimate: Option<f64>,
}

/// Build the mass model for a problem.
pub fn build_model(problem: Problem, omega: Option<f64>) -> Result<MassModel> {
    match problem {
        Problem::Example1 => {
            let omega = omega.unwrap_or(10.0);
            if !(omega > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "example1 requires omega > 0, got {omega}"
                )));
            }
            Ok(MassModel::preset_example1(omega))
        }
        Problem::Example2 => Ok(MassModel::preset_example2()),
        Problem::ConstantMass => Ok(MassModel::constant(-1.0)),
        Problem::Free => Ok(MassModel::zero()),
    }
}

/// Low-frequency companion model used for the RK4 cross-check of the
/// fine-step self-reference. For the multi-frequency preset this keeps
/// only the terms with `|omega| <= 10`.
pub fn cross_check_model(problem: Problem, _omega: Option<f64>) -> Result<MassModel> {
    match problem {
        Problem::Example1 => Ok(MassModel::preset_example1(10.0)),
        Problem::Example2 => {
            let model = MassModel::preset_example2();
            let terms: Vec<_> = model
                .terms()
                .iter()
                .filter(|t| t.omega().abs() <= 10.0)
                .cloned()
                .collect();
            Ok(MassModel::new(terms))
        }
        Problem::ConstantMass => Ok(MassModel::constant(-1.0)),
        Problem::Free => Ok(MassModel::zero()),
    }
}

/// Shared initial data of the presets: `psi0 = e^{-x^2/2}`, `psi0' = 0`.
/// Its periodization error at the domain edge is ~e^{-50}, below roundoff.
pub fn initial_state(grid: &SpectralGrid, t0: f64) -> FieldState {
    let psi: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&x| Complex64::new((-x * x / 2.0).exp(), 0.0))
        .collect();
    let dpsi = vec![Complex64::default(); grid.len()];
    FieldState { psi, dpsi, t: t0 }
}

/// Unweighted discrete l2 distance over nodes (no dx factor).
pub fn error_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Run one method once.
pub fn solve_with_method(
    grid: &SpectralGrid,
    model: &MassModel,
    method: MethodId,
    steps: usize,
    t_final: f64,
    state0: &FieldState,
) -> Result<FieldState> {
    let h = (t_final - state0.t) / steps as f64;
    match method {
        MethodId::Rk2 => reference::rk_run(2, grid, model, state0, h, steps),
        MethodId::Rk4 => reference::rk_run(4, grid, model, state0, h, steps),
        MethodId::Xi3Filon | MethodId::Xi3Fine => {
            let mut stepper =
                Stepper::new(grid, model, StepperConfig::new(h, steps, Quadrature::Filon))?;
            stepper.run(state0, None)
        }
        MethodId::Xi3Gl4 | MethodId::Xi3Gl6 | MethodId::Xi3Gl8 => {
            let quad = match method {
                MethodId::Xi3Gl4 => Quadrature::Gl4,
                MethodId::Xi3Gl6 => Quadrature::Gl6,
                _ => Quadrature::Gl8,
            };
            let mut stepper = Stepper::new(grid, model, StepperConfig::new(h, steps, quad))?;
            stepper.run(state0, None)
        }
    }
}

/// Least-squares slope of `log(error)` against `log(h)`. Only finite,
/// positive errors participate; fewer than two valid points yields `None`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let valid: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| h.is_finite() && *h > 0.0 && e.is_finite() && *e > 0.0)
        .map(|&(h, e)| (h.ln(), e.ln()))
        .collect();
    if valid.len() < 2 {
        return None;
    }
    let n = valid.len() as f64;
    let sx: f64 = valid.iter().map(|p| p.0).sum();
    let sy: f64 = valid.iter().map(|p| p.1).sum();
    let sxx: f64 = valid.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = valid.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

fn measure(
    grid: &SpectralGrid,
    model: &MassModel,
    method: MethodId,
    steps: usize,
    t_final: f64,
    state0: &FieldState,
    reps: usize,
) -> Result<(FieldState, f64)> {
    let reps = reps.max(1);
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps {
        let start = Instant::now();
        let state = solve_with_method(grid, model, method, steps, t_final, state0)?;
        best = best.min(start.elapsed().as_secs_f64());
        out = Some(state);
    }
    Ok((out.expect("at least one rep"), best))
}

fn run_methods_against_reference(
    cfg: &ExperimentConfig,
    grid: &SpectralGrid,
    model: &MassModel,
    state0: &FieldState,
    records: &mut Vec<RunRecord>,
) -> Result<()> {
    let finest = *cfg.steps_list.last().expect("validated nonempty");
    if cfg.reference.steps < 50 * finest {
        return Err(Error::InvalidConfig(format!(
            "reference steps {} must be at least 50x the finest run ({finest})",
            cfg.reference.steps
        )));
    }
    let psi_ref = reference::reference_solution(grid, model, cfg.t_final, &cfg.reference, state0)?;

    for &method in &cfg.methods {
        let mut points = Vec::new();
        let first_record = records.len();
        for &steps in &cfg.steps_list {
            let h = (cfg.t_final - cfg.t0) / steps as f64;
            let (record_err, runtime) =
                match measure(grid, model, method, steps, cfg.t_final, state0, cfg.timing_reps) {
                    Ok((state, runtime)) => (error_l2(&state.psi, &psi_ref.psi), runtime),
                    // blow-ups (expected for explicit methods out of their
                    // regime) are recorded as non-finite and skipped by the
                    // slope fit
                    Err(Error::NonFinite(_)) => (f64::INFINITY, 0.0),
                    Err(e) => return Err(e),
                };
            points.push((h, record_err));
            records.push(RunRecord {
                method,
                steps,
                h,
                omega_max: model.omega_max(),
                error_l2: record_err,
                runtime_seconds: runtime,
                slope_estimate: None,
            });
        }
        if let Some(slope) = fit_slope(&points) {
            if let Some(last) = records[first_record..].last_mut() {
                last.slope_estimate = Some(slope);
            }
        }
    }
    Ok(())
}

/// Convergence sweep: every `(method, steps)` pair against a fine-step
/// reference, with the per-method slope attached to its finest run.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let grid = SpectralGrid::new(cfg.x0, cfg.x1, cfg.grid_m)?;
    let model = build_model(cfg.problem, cfg.omega)?;
    let state0 = initial_state(&grid, cfg.t0);

    if cfg.problem != Problem::Free {
        let check_model = cross_check_model(cfg.problem, cfg.omega)?;
        let check_steps = cfg.reference.steps.min(20_000).max(50 * cfg.steps_list.last().unwrap());
        reference::cross_check_reference(
            &grid,
            &check_model,
            cfg.t_final,
            check_steps,
            cfg.reference.cross_check_tolerance,
            &state0,
        )?;
    }

    let mut records = Vec::new();
    run_methods_against_reference(cfg, &grid, &model, &state0, &mut records)?;
    Ok(records)
}

/// Frequency sweep for the single-frequency problem: the step ladder is
/// crossed with each `omega`, one record per `(method, steps, omega)`.
pub fn run_omega_sweep(cfg: &ExperimentConfig, omegas: &[f64]) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    if cfg.problem != Problem::Example1 {
        return Err(Error::InvalidConfig(
            "omega sweep applies to example1 only".into(),
        ));
    }
    if omegas.is_empty() {
        return Err(Error::InvalidConfig("omega list is empty".into()));
    }
    let grid = SpectralGrid::new(cfg.x0, cfg.x1, cfg.grid_m)?;
    let state0 = initial_state(&grid, cfg.t0);

    let check_model = cross_check_model(cfg.problem, cfg.omega)?;
    let check_steps = cfg.reference.steps.min(20_000).max(50 * cfg.steps_list.last().unwrap());
    reference::cross_check_reference(
        &grid,
        &check_model,
        cfg.t_final,
        check_steps,
        cfg.reference.cross_check_tolerance,
        &state0,
    )?;

    let mut records = Vec::new();
    for &omega in omegas {
        let model = build_model(Problem::Example1, Some(omega))?;
        run_methods_against_reference(cfg, &grid, &model, &state0, &mut records)?;
    }
    Ok(records)
}

fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Write records as CSV, ordered by `(method, steps)`, floats carried to
/// 17 significant digits so they round-trip. Absent slopes leave the field
/// empty.
pub fn emit_csv(records: &[RunRecord], out: &mut dyn std::io::Write) -> std::io::Result<()> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.steps.cmp(&b.steps))
            .then(a.omega_max.total_cmp(&b.omega_max))
    });
    writeln!(
        out,
        "method,K,h,omega_max,error_l2,runtime_seconds,slope_estimate"
    )?;
    for r in sorted {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            r.steps,
            fmt_float(r.h),
            fmt_float(r.omega_max),
            fmt_float(r.error_l2),
            fmt_float(r.runtime_seconds),
            r.slope_estimate.map(fmt_float).unwrap_or_default()
        )?;
    }
    Ok(())
}

/// Write records to a file path.
pub fn emit_csv_path(records: &[RunRecord], path: &str) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    let mut writer = std::io::BufWriter::new(file);
    emit_csv(records, &mut writer).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    writer.flush().map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}

/// Dump a final state as CSV rows `x,re_psi,im_psi,re_dpsi,im_dpsi`.
pub fn emit_state_csv(
    grid: &SpectralGrid,
    state: &FieldState,
    out: &mut dyn std::io::Write,
) -> std::io::Result<()> {
    writeln!(out, "x,re_psi,im_psi,re_dpsi,im_dpsi")?;
    for (j, &x) in grid.nodes().iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(x),
            fmt_float(state.psi[j].re),
            fmt_float(state.psi[j].im),
            fmt_float(state.dpsi[j].re),
            fmt_float(state.dpsi[j].im)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::RefMethod;

    fn base_cfg() -> ExperimentConfig {
        ExperimentConfig {
            problem: Problem::Free,
            omega: None,
            x0: -10.0,
            x1: 10.0,
            grid_m: 64,
            t0: 0.0,
            t_final: 1.0,
            steps_list: vec![10, 20],
            methods: vec![MethodId::Xi3Filon],
            reference: ReferenceSpec {
                method: RefMethod::Xi3Fine,
                steps: 1000,
                cross_check_tolerance: 1e-8,
            },
            out_path: None,
            seed: 0,
            timing_reps: 1,
        }
    }

    #[test]
    fn validate_rejects_bad_configs() {
        let mut cfg = base_cfg();
        cfg.steps_list = vec![];
        assert!(cfg.validate().is_err());

        let mut cfg = base_cfg();
        cfg.steps_list = vec![20, 10];
        assert!(cfg.validate().is_err());

        let mut cfg = base_cfg();
        cfg.methods = vec![];
        assert!(cfg.validate().is_err());

        let mut cfg = base_cfg();
        cfg.problem = Problem::Example2;
        cfg.omega = Some(10.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn free_problem_errors_at_roundoff() {
        let records = run_convergence(&base_cfg()).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(r.error_l2 <= 1e-12, "free-problem error {}", r.error_l2);
        }
    }

    #[test]
    fn reference_must_be_much_finer() {
        let mut cfg = base_cfg();
        cfg.reference.steps = 100; // only 5x the finest run
        assert!(run_convergence(&cfg).is_err());
    }

    #[test]
    fn slope_fit_ignores_invalid_points() {
        assert!(fit_slope(&[(0.1, f64::INFINITY), (0.05, 1.0)]).is_none());
        assert!(fit_slope(&[(0.1, 1.0)]).is_none());
        let s = fit_slope(&[(0.1, 1e-3), (0.05, 1.25e-4), (0.025, 1.5625e-5)]).unwrap();
        assert!((s - 3.0).abs() < 1e-12);
    }

    #[test]
    fn method_ids_round_trip() {
        for id in [
            MethodId::Rk2,
            MethodId::Rk4,
            MethodId::Xi3Filon,
            MethodId::Xi3Gl4,
            MethodId::Xi3Gl6,
            MethodId::Xi3Gl8,
            MethodId::Xi3Fine,
        ] {
            assert_eq!(id.as_str().parse::<MethodId>().unwrap(), id);
        }
        assert!("xi9".parse::<MethodId>().is_err());
    }

    #[test]
    fn csv_header_only_for_empty_records() {
        let mut buf = Vec::new();
        emit_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "method,K,h,omega_max,error_l2,runtime_seconds,slope_estimate\n"
        );
    }

    #[test]
    fn csv_single_record_round_trips() {
        let record = RunRecord {
            method: MethodId::Xi3Filon,
            steps: 40,
            h: 0.025,
            omega_max: 1e4,
            error_l2: 3.25e-7,
            runtime_seconds: 0.0125,
            slope_estimate: None,
        };
        let mut buf = Vec::new();
        emit_csv(&[record], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "xi3-filon");
        assert_eq!(fields[1].parse::<usize>().unwrap(), 40);
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.025);
        assert_eq!(fields[4].parse::<f64>().unwrap(), 3.25e-7);
        assert!(fields[6].is_empty());
    }

    #[test]
    fn csv_sorted_by_method_then_steps() {
        let mk = |method, steps| RunRecord {
            method,
            steps,
            h: 1.0 / steps as f64,
            omega_max: 10.0,
            error_l2: 1e-3,
            runtime_seconds: 0.1,
            slope_estimate: Some(3.0),
        };
        let records = vec![
            mk(MethodId::Xi3Filon, 80),
            mk(MethodId::Rk4, 40),
            mk(MethodId::Xi3Filon, 20),
            mk(MethodId::Rk4, 80),
        ];
        let mut buf = Vec::new();
        emit_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let order: Vec<String> = text
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{}:{}", f[0], f[1])
            })
            .collect();
        assert_eq!(order, vec!["rk4:40", "rk4:80", "xi3-filon:20", "xi3-filon:80"]);
    }
}
