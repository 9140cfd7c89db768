//! The SOLVE → ESTIMATE → MARK → REFINE loop and the quantities it monitors.

use alloc::vec::Vec;
use core::fmt;

use crate::assembly::{self, MethodKind};
use crate::dg::{self, CrFunction, DgFunction, PiecewiseGradient};
use crate::estimate::{self, EstimatorBreakdown};
use crate::marking::{self, MarkBranch, MarkResult, MarkingConfig};
use crate::math;
use crate::mesh::{self, Mesh, Point2};
use crate::postprocess;
use crate::problem::Problem;
use crate::quadrature::{TriangleRule, DEGREE_6};
use crate::solver::{self, SolveReport};
use crate::sparse::SparseSymMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaPolicy {
    /// Recomputed on every mesh: IP gets 1.01 times its threshold,
    /// LDG and Brezzi get 0.01, Bassi gets 3.01.
    Auto,
    Fixed(f64),
}

impl AlphaPolicy {
    pub fn resolve(&self, mesh: &Mesh, method: MethodKind) -> f64 {
        match *self {
            Self::Auto => auto_alpha(mesh, method),
            Self::Fixed(a) => a,
        }
    }
}

impl fmt::Display for AlphaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(a) => write!(f, "{a}"),
        }
    }
}

pub fn auto_alpha(mesh: &Mesh, method: MethodKind) -> f64 {
    match method {
        MethodKind::Ip => 1.01 * assembly::min_alpha(mesh, method),
        MethodKind::Ldg | MethodKind::BrezziEtAl => 0.01,
        MethodKind::BassiEtAl => 3.01,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub method: MethodKind,
    pub alpha: AlphaPolicy,
    pub marking: MarkingConfig,
    pub max_dofs: usize,
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub gamma_monitor: f64,
    pub uniform: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: MethodKind::Ip,
            alpha: AlphaPolicy::Auto,
            marking: MarkingConfig::default(),
            max_dofs: 50_000,
            max_iterations: 40,
            rel_tol: solver::DEFAULT_REL_TOL,
            gamma_monitor: 10.0,
            uniform: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.marking.validate()?;
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if let AlphaPolicy::Fixed(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return bad(alloc::format!("alpha = {a} must be positive and finite"));
            }
        }
        if self.max_dofs == 0 {
            return bad("max_dofs must be positive".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad(alloc::format!("rel_tol = {} must lie in (0, 1)", self.rel_tol));
        }
        if !(self.gamma_monitor >= 0.0 && self.gamma_monitor.is_finite()) {
            return bad(alloc::format!(
                "gamma_monitor = {} must be non-negative and finite",
                self.gamma_monitor
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub iteration: usize,
    pub ndof: usize,
    pub ntriangles: usize,
    /// `‖∇_h(u − u_h)‖`, when the exact gradient is known.
    pub energy_error: Option<f64>,
    /// `‖∇_h(u − u_h*)‖`, when the exact gradient is known.
    pub cr_error: Option<f64>,
    pub eta_sq_total: f64,
    pub jump_total: f64,
    pub volume_total: f64,
    /// `‖u_h − u_h*‖²_{1,h}`.
    pub diff_norm_sq: f64,
    /// `e² + γ_mon ‖hf‖²`, with `e² = eta_sq_total` when the error is unknown.
    pub contraction_quantity: f64,
    pub ratio: Option<f64>,
    /// `‖hf‖² / ‖Hf‖²` against the previous mesh.
    pub volume_ratio: Option<f64>,
    pub alpha: f64,
    pub solver_iterations: usize,
    pub solver_residual: f64,
    pub marked_edges: usize,
    pub marked_triangles: usize,
    pub branch: Option<MarkBranch>,
    pub wall_time: f64,
}

impl ConvergenceRecord {
    /// Squared error entering the contraction quantity.
    pub fn error_sq(&self) -> f64 {
        match self.energy_error {
            Some(e) => e * e,
            None => self.eta_sq_total,
        }
    }

    pub fn uses_proxy(&self) -> bool {
        self.energy_error.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceHistory {
    pub records: Vec<ConvergenceRecord>,
}

impl ConvergenceHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&ConvergenceRecord> {
        self.records.last()
    }
}

/// The run stopped early; `history` holds every completed iteration.
#[derive(Debug, Clone)]
pub struct AdaptFailure {
    pub error: Error,
    pub history: ConvergenceHistory,
}

impl fmt::Display for AdaptFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} completed iterations)",
            self.error,
            self.history.len()
        )
    }
}

/// Everything computed on one mesh, handed to the observer before refining.
pub struct IterationView<'a> {
    pub mesh: &'a Mesh,
    pub matrix: &'a SparseSymMatrix,
    pub rhs: &'a [f64],
    pub solution: &'a DgFunction,
    pub averaged: &'a CrFunction,
    pub estimate: &'a EstimatorBreakdown,
    /// `None` on the final iteration.
    pub marks: Option<&'a MarkResult>,
    pub record: &'a ConvergenceRecord,
}

pub fn energy_error<G: PiecewiseGradient>(u: &G, exact_gradient: impl Fn(Point2) -> [f64; 2], mesh: &Mesh) -> f64 {
    energy_error_with_rule(u, exact_gradient, mesh, &DEGREE_6)
}

pub fn energy_error_with_rule<G: PiecewiseGradient>(
    u: &G,
    exact_gradient: impl Fn(Point2) -> [f64; 2],
    mesh: &Mesh,
    rule: &TriangleRule,
) -> f64 {
    let sq = math::ordered_sum((0..mesh.n_triangles()).map(|t| {
        let gh = u.gradient(mesh, t);
        rule.integrate(mesh, t, |p, _| {
            let d = math::sub(exact_gradient(p), gh);
            math::dot(d, d)
        })
    }));
    math::sqrt(sq)
}

/// Runs the adaptive loop. `clock` returns seconds from an arbitrary origin.
pub fn adapt_loop(
    problem: &Problem,
    cfg: &RunConfig,
    clock: &mut dyn FnMut() -> f64,
    observer: &mut dyn FnMut(&IterationView<'_>),
) -> core::result::Result<ConvergenceHistory, AdaptFailure> {
    let mut history = ConvergenceHistory::default();
    if let Err(error) = cfg.validate().and_then(|()| problem.check_load()) {
        return Err(AdaptFailure { error, history });
    }
    let mut mesh = problem.mesh.clone();
    for iteration in 0..cfg.max_iterations {
        let start = clock();
        let step = run_iteration(problem, cfg, &mesh, iteration, &history);
        let (mut record, state) = match step {
            Ok(v) => v,
            Err(error) => return Err(AdaptFailure { error, history }),
        };
        let last = iteration + 1 == cfg.max_iterations || record.ndof >= cfg.max_dofs;
        let marks = if last {
            None
        } else if cfg.uniform {
            Some(MarkResult {
                marked_edges: (0..mesh.n_edges()).collect(),
                marked_triangles: Vec::new(),
                branch: None,
            })
        } else {
            Some(marking::mark(&state.estimate, &cfg.marking))
        };
        if let Some(m) = &marks {
            record.marked_edges = m.marked_edges.len();
            record.marked_triangles = m.marked_triangles.len();
            record.branch = m.branch;
        }
        record.wall_time = clock() - start;
        observer(&IterationView {
            mesh: &mesh,
            matrix: &state.matrix,
            rhs: &state.rhs,
            solution: &state.solution,
            averaged: &state.averaged,
            estimate: &state.estimate,
            marks: marks.as_ref(),
            record: &record,
        });
        history.records.push(record);
        let Some(m) = marks else { break };
        if m.is_empty() {
            break;
        }
        match mesh::refine(&mesh, &m.marked_edges, &m.marked_triangles) {
            Ok((next, _)) => mesh = next,
            Err(error) => return Err(AdaptFailure { error, history }),
        }
    }
    Ok(history)
}

struct IterationState {
    matrix: SparseSymMatrix,
    rhs: Vec<f64>,
    solution: DgFunction,
    averaged: CrFunction,
    estimate: EstimatorBreakdown,
}

fn run_iteration(
    problem: &Problem,
    cfg: &RunConfig,
    mesh: &Mesh,
    iteration: usize,
    history: &ConvergenceHistory,
) -> Result<(ConvergenceRecord, IterationState)> {
    let f = problem.f;
    let alpha = cfg.alpha.resolve(mesh, cfg.method);
    let matrix = assembly::assemble_system(mesh, cfg.method, alpha)?;
    let rhs = assembly::assemble_rhs(mesh, f);
    let (x, report): (Vec<f64>, SolveReport) = solver::solve_spd(&matrix, &rhs, cfg.rel_tol)?;
    let solution = DgFunction::from_coeffs(mesh, x)?;
    let averaged = postprocess::average_to_cr(&solution, mesh);
    let est = estimate::estimate(&averaged, f, mesh);
    let diff_norm_sq = dg::norm_1h_sq(&solution.sub(&averaged.to_dg(mesh)), mesh);
    let dg_error = problem
        .exact_gradient
        .map(|g| energy_error(&solution, g, mesh));
    let cr_error = problem
        .exact_gradient
        .map(|g| energy_error(&averaged, g, mesh));

    let mut record = ConvergenceRecord {
        iteration,
        ndof: 3 * mesh.n_triangles(),
        ntriangles: mesh.n_triangles(),
        energy_error: dg_error,
        cr_error,
        eta_sq_total: est.eta_sq_total,
        jump_total: est.jump_total,
        volume_total: est.volume_total,
        diff_norm_sq,
        contraction_quantity: 0.0,
        ratio: None,
        volume_ratio: None,
        alpha,
        solver_iterations: report.iterations,
        solver_residual: report.relative_residual,
        marked_edges: 0,
        marked_triangles: 0,
        branch: None,
        wall_time: 0.0,
    };
    record.contraction_quantity = record.error_sq() + cfg.gamma_monitor * record.volume_total;
    if let Some(prev) = history.last() {
        record.ratio = ratio(record.contraction_quantity, prev.contraction_quantity);
        record.volume_ratio = ratio(record.volume_total, prev.volume_total);
    }
    Ok((
        record,
        IterationState {
            matrix,
            rhs,
            solution,
            averaged,
            estimate: est,
        },
    ))
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// `(e_k² + γ v_k) / (e_{k−1}² + γ v_{k−1})` for consecutive records, where
/// `e²` falls back to the estimator when the exact error is unknown.
/// Pairs with a vanishing denominator are skipped.
pub fn contraction_ratios(history: &ConvergenceHistory, gamma_mon: f64) -> Result<Vec<f64>> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let q = |r: &ConvergenceRecord| r.error_sq() + gamma_mon * r.volume_total;
    Ok(history
        .records
        .windows(2)
        .filter_map(|w| ratio(q(&w[1]), q(&w[0])))
        .collect())
}

/// Constants observed over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedConstants {
    /// `max_k ‖u_h − u_h*‖²_{1,h} / ‖hf‖²`.
    pub c_star: Option<f64>,
    /// `max_k ‖hf‖² / ‖Hf‖²`.
    pub rho2: Option<f64>,
    /// Largest contraction ratio from `from_iteration` on.
    pub max_ratio: Option<f64>,
}

pub fn observed_constants(history: &ConvergenceHistory, from_iteration: usize) -> ObservedConstants {
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    ObservedConstants {
        c_star: max(&mut history
            .records
            .iter()
            .filter_map(|r| ratio(r.diff_norm_sq, r.volume_total))),
        rho2: max(&mut history.records.iter().filter_map(|r| r.volume_ratio)),
        max_ratio: max(&mut history
            .records
            .iter()
            .filter(|r| r.iteration >= from_iteration)
            .filter_map(|r| r.ratio)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_square;
    use crate::problem::sine_gradient;
    use alloc::vec;

    fn record(err: Option<f64>, volume: f64) -> ConvergenceRecord {
        ConvergenceRecord {
            iteration: 0,
            ndof: 6,
            ntriangles: 2,
            energy_error: err,
            cr_error: None,
            eta_sq_total: 1.0,
            jump_total: 0.0,
            volume_total: volume,
            diff_norm_sq: 0.0,
            contraction_quantity: 0.0,
            ratio: None,
            volume_ratio: None,
            alpha: 1.0,
            solver_iterations: 0,
            solver_residual: 0.0,
            marked_edges: 0,
            marked_triangles: 0,
            branch: None,
            wall_time: 0.0,
        }
    }

    #[test]
    fn ratio_arithmetic() {
        let h = ConvergenceHistory {
            records: vec![record(Some(4.0), 0.0), record(Some(2.0), 0.0), record(Some(1.0), 0.0)],
        };
        assert_eq!(contraction_ratios(&h, 1.0).unwrap(), vec![0.25, 0.25]);
        let flat = ConvergenceHistory {
            records: vec![record(Some(1.5), 0.2); 4],
        };
        assert_eq!(contraction_ratios(&flat, 10.0).unwrap(), vec![1.0; 3]);
        assert!(matches!(
            contraction_ratios(&ConvergenceHistory::default(), 1.0),
            Err(Error::EmptyHistory)
        ));
    }

    #[test]
    fn energy_error_of_zero_against_sine() {
        let mesh = structured_square(8);
        let e = energy_error(&DgFunction::zeros(&mesh), sine_gradient, &mesh);
        // ∫|∇u|² = π²/2 up to quadrature error on an 8×8 grid.
        assert!((e - core::f64::consts::PI / core::f64::consts::SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn linear_interpolant_has_no_error() {
        let mesh = structured_square(3);
        let u = DgFunction::interpolate(&mesh, |p| 2.0 * p.x - 0.5 * p.y);
        assert!(energy_error(&u, |_| [2.0, -0.5], &mesh) < 1e-13);
    }

    #[test]
    fn zero_load_stops_immediately() {
        fn zero(_: Point2) -> f64 {
            0.0
        }
        let mut problem = Problem::lshape_const();
        problem.f = zero;
        let mut seen = 0;
        let h = adapt_loop(&problem, &RunConfig::default(), &mut || 0.0, &mut |v| {
            assert!(v.solution.coeffs().iter().all(|&c| c == 0.0));
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, 1);
        assert_eq!(h.len(), 1);
        assert_eq!(h.records[0].eta_sq_total, 0.0);
        assert_eq!(h.records[0].marked_edges + h.records[0].marked_triangles, 0);
    }

    #[test]
    fn stops_at_dof_budget() {
        let problem = Problem::lshape_const();
        let cfg = RunConfig {
            max_dofs: 200,
            ..RunConfig::default()
        };
        let h = adapt_loop(&problem, &cfg, &mut || 0.0, &mut |_| {}).unwrap();
        let last = h.last().unwrap();
        assert!(last.ndof >= 200);
        assert!(h.records[..h.len() - 1].iter().all(|r| r.ndof < 200));
        assert!(h.records.windows(2).all(|w| w[0].ndof <= w[1].ndof));
    }

    #[test]
    fn invalid_config_is_reported_with_empty_history() {
        let cfg = RunConfig {
            alpha: AlphaPolicy::Fixed(-1.0),
            ..RunConfig::default()
        };
        let err = adapt_loop(&Problem::square_sine(), &cfg, &mut || 0.0, &mut |_| {}).unwrap_err();
        assert!(matches!(err.error, Error::InvalidConfig(_)));
        assert!(err.history.is_empty());
    }

    #[test]
    fn inadmissible_penalty_keeps_partial_history() {
        let cfg = RunConfig {
            alpha: AlphaPolicy::Fixed(0.5),
            method: MethodKind::BassiEtAl,
            ..RunConfig::default()
        };
        let err = adapt_loop(&Problem::square_sine(), &cfg, &mut || 0.0, &mut |_| {}).unwrap_err();
        assert!(matches!(err.error, Error::InadmissiblePenalty(_)));
    }
}
