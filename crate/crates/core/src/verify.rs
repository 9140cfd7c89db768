//! Checks of the exact identities linking the DG solution, the averaged CR
//! solution and the lifting operators. Shared by the test suite and the
//! `verify` subcommand.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::adapt::auto_alpha;
use crate::assembly::{self, MethodKind};
use crate::dg::{self, DgFunction};
use crate::mesh::{Mesh, Point2};
use crate::postprocess;
use crate::solver;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    Positive,
    /// Informational only.
    Reported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(b) => self.value <= b,
            Bound::Positive => self.value > 0.0,
            Bound::Reported => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub samples: usize,
    pub rel_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            rel_tol: 1e-12,
        }
    }
}

/// Draws a DG function with coefficients from `rng` (expected in `[-1, 1]`).
pub fn random_dg(mesh: &Mesh, rng: &mut dyn FnMut() -> f64) -> DgFunction {
    let c = (0..3 * mesh.n_triangles()).map(|_| rng()).collect();
    DgFunction::from_coeffs(mesh, c).expect("length matches")
}

/// Largest `|∫ r_e(w)·τ + ∫_e w·{τ}|` over every edge, both unit vectors `w`
/// and every elementwise-constant unit field `τ`.
pub fn lifting_adjoint_residual(mesh: &Mesh) -> f64 {
    let mut worst: f64 = 0.0;
    for (e, edge) in mesh.edges().iter().enumerate() {
        for w in [[1.0, 0.0], [0.0, 1.0]] {
            let r = dg::lift_local(e, w, mesh);
            for t in 0..mesh.n_triangles() {
                for d in 0..2 {
                    let volume = mesh.area(t) * r.0[t][d];
                    let adjacent = t == edge.t_minus || Some(t) == edge.t_plus;
                    let weight = if !adjacent {
                        0.0
                    } else if edge.is_boundary() {
                        1.0
                    } else {
                        0.5
                    };
                    let edge_term = edge.length * w[d] * weight;
                    worst = worst.max((volume + edge_term).abs());
                }
            }
        }
    }
    worst
}

/// Largest `|Π_e⟦u*⟧|` over all edges, relative to the largest midpoint value.
pub fn cr_membership_residual(u: &DgFunction, mesh: &Mesh) -> f64 {
    let star = postprocess::average_to_cr(u, mesh);
    let scale = star
        .midpoint_values()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let emb = star.to_dg(mesh);
    (0..mesh.n_edges())
        .map(|e| dg::jump_scalar(&emb, mesh, e).abs())
        .fold(0.0, f64::max)
        / scale
}

/// `min A_h(v, v) / ‖v‖²_{1,h}` over random `v`.
pub fn coercivity_sample(
    mesh: &Mesh,
    method: MethodKind,
    alpha: f64,
    samples: usize,
    rng: &mut dyn FnMut() -> f64,
) -> f64 {
    let a = assembly::assemble_unchecked(mesh, method, alpha);
    (0..samples)
        .map(|_| {
            let v = random_dg(mesh, rng);
            a.bilinear(v.coeffs(), v.coeffs()) / dg::norm_1h_sq(&v, mesh)
        })
        .fold(f64::INFINITY, f64::min)
}

/// DG solution for `method` with the automatic penalty.
pub fn solve_dg(
    mesh: &Mesh,
    f: &dyn Fn(Point2) -> f64,
    method: MethodKind,
    alpha: f64,
    rel_tol: f64,
) -> Result<DgFunction> {
    let a = assembly::assemble_system(mesh, method, alpha)?;
    let b = assembly::assemble_rhs(mesh, f);
    let (x, _) = solver::solve_spd(&a, &b, rel_tol)?;
    DgFunction::from_coeffs(mesh, x)
}

/// Runs the full suite on one mesh and load.
pub fn run_suite(
    mesh: &Mesh,
    f: &dyn Fn(Point2) -> f64,
    methods: &[MethodKind],
    cfg: &VerifyConfig,
    rng: &mut dyn FnMut() -> f64,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    checks.push(Check::new(
        "lifting adjoint identity",
        lifting_adjoint_residual(mesh),
        Bound::AtMost(1e-13),
    ));

    let mut relation: f64 = 0.0;
    let mut membership: f64 = 0.0;
    let mut jump_ratio: f64 = 0.0;
    for _ in 0..cfg.samples {
        let u = random_dg(mesh, rng);
        let v = random_dg(mesh, rng);
        relation = relation.max(postprocess::integral_relation_residual(&u, &v, mesh).relative());
        membership = membership.max(cr_membership_residual(&u, mesh));
        if let Some(r) = postprocess::jump_control_ratio(&u, mesh) {
            jump_ratio = jump_ratio.max(r);
        }
    }
    checks.push(Check::new("integral relation (relative)", relation, Bound::AtMost(1e-12)));
    checks.push(Check::new("averaged function is CR", membership, Bound::AtMost(1e-14)));
    checks.push(Check::new("jump control constant (observed)", jump_ratio, Bound::Reported));

    let (u_cr, _) = postprocess::solve_cr(mesh, f, cfg.rel_tol)?;
    let cr_norm = dg::broken_h1(&u_cr, mesh);
    for &method in methods {
        let alpha = auto_alpha(mesh, method);
        let name = method.name();
        checks.push(Check::new(
            format!("{name}: coercivity ratio (alpha {alpha:.4})"),
            coercivity_sample(mesh, method, alpha, cfg.samples, rng),
            Bound::Positive,
        ));
        let u = solve_dg(mesh, f, method, alpha, cfg.rel_tol)?;
        let r = postprocess::energy_identity_residual(&u, f, mesh, method, alpha);
        checks.push(Check::new(
            format!("{name}: energy identity residual"),
            r.residual,
            Bound::AtMost(1e-8 * r.scale + 1e-12),
        ));
        let star = postprocess::average_to_cr(&u, mesh);
        let dist = postprocess::cr_distance(&star, &u_cr, mesh);
        let rel = if cr_norm > 0.0 { dist / cr_norm } else { dist };
        checks.push(Check::new(
            format!("{name}: distance to CR solution (relative)"),
            rel,
            Bound::AtMost(1e-8),
        ));
        if let Some(c) = postprocess::volume_bound_constant(&u, &star, f, mesh) {
            checks.push(Check::new(format!("{name}: volume bound constant (observed)"), c, Bound::Reported));
        }
    }
    Ok(checks)
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}
