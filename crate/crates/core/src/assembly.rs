//! The four weakly penalized symmetric DG forms, the load vector and the
//! Crouzeix–Raviart system.
//!
//! All forms share
//!
//! ```text
//! Σ_T ∫_T ∇w·∇v − Σ_e ∫_e {∇w}·⟦v⟧ − Σ_e ∫_e {∇v}·⟦w⟧
//! ```
//!
//! and differ in the stabilization, which only ever sees the edge means
//! `Π_e⟦·⟧`:
//!
//! | method | stabilization |
//! |--------|---------------|
//! | IP     | `Σ_e (α/h_e) ∫_e Π_e⟦w⟧·Π_e⟦v⟧` |
//! | LDG    | `∫_Ω r(Π⟦w⟧)·r(Π⟦v⟧)` + the IP term |
//! | Brezzi | `∫_Ω r(Π⟦w⟧)·r(Π⟦v⟧) + α Σ_e ∫_Ω r_e(Π_e⟦w⟧)·r_e(Π_e⟦v⟧)` |
//! | Bassi  | `α Σ_e ∫_Ω r_e(Π_e⟦w⟧)·r_e(Π_e⟦v⟧)` |
//!
//! Every integral is evaluated in closed form. Degrees of freedom are
//! numbered triangle-major, vertex-minor (`3 t + i`).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dg::{self, DgFunction, PiecewiseGradient};
use crate::math::{self, Vec2};
use crate::mesh::{Mesh, Point2};
use crate::quadrature::DEGREE_4;
use crate::sparse::{SparseSymMatrix, TripletBuilder};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodKind {
    /// Symmetric interior penalty.
    Ip,
    /// Local discontinuous Galerkin.
    Ldg,
    BrezziEtAl,
    BassiEtAl,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [
        MethodKind::Ip,
        MethodKind::Ldg,
        MethodKind::BrezziEtAl,
        MethodKind::BassiEtAl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Ip => "ip",
            MethodKind::Ldg => "ldg",
            MethodKind::BrezziEtAl => "brezzi",
            MethodKind::BassiEtAl => "bassi",
        }
    }

    fn has_jump_penalty(self) -> bool {
        matches!(self, MethodKind::Ip | MethodKind::Ldg)
    }

    fn has_global_lift(self) -> bool {
        matches!(self, MethodKind::Ldg | MethodKind::BrezziEtAl)
    }

    fn has_local_lift(self) -> bool {
        matches!(self, MethodKind::BrezziEtAl | MethodKind::BassiEtAl)
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ip" => Ok(MethodKind::Ip),
            "ldg" => Ok(MethodKind::Ldg),
            "brezzi" => Ok(MethodKind::BrezziEtAl),
            "bassi" => Ok(MethodKind::BassiEtAl),
            other => Err(Error::InvalidConfig(alloc::format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyReport {
    pub method: MethodKind,
    pub alpha: f64,
    pub alpha_min: f64,
    pub admissible: bool,
}

/// `[S_T]_{mn} = ∫_T ∇λ_m·∇λ_n`.
pub fn local_stiffness(mesh: &Mesh, t: usize) -> [[f64; 3]; 3] {
    let g = mesh.barycentric_gradients(t);
    let area = mesh.area(t);
    let mut s = [[0.0; 3]; 3];
    for m in 0..3 {
        for n in 0..3 {
            s[m][n] = area * math::dot(g[m], g[n]);
        }
    }
    s
}

/// Spectral radius of the local stiffness matrix.
///
/// Rows of `S_T` sum to zero, so the characteristic polynomial is
/// `λ (λ² − tr λ + m₂)` with `m₂` the sum of principal 2×2 minors.
pub fn local_stiffness_spectral_radius(mesh: &Mesh, t: usize) -> f64 {
    let s = local_stiffness(mesh, t);
    let tr = s[0][0] + s[1][1] + s[2][2];
    let m2 = (s[0][0] * s[1][1] - s[0][1] * s[1][0])
        + (s[0][0] * s[2][2] - s[0][2] * s[2][0])
        + (s[1][1] * s[2][2] - s[1][2] * s[2][1]);
    let disc = (tr * tr - 4.0 * m2).max(0.0);
    0.5 * (tr + math::sqrt(disc))
}

/// Stability threshold on `α`: the penalty must be strictly larger.
pub fn min_alpha(mesh: &Mesh, method: MethodKind) -> f64 {
    match method {
        MethodKind::Ip => {
            4.0 * (0..mesh.n_triangles())
                .map(|t| local_stiffness_spectral_radius(mesh, t))
                .fold(0.0, f64::max)
        }
        MethodKind::Ldg | MethodKind::BrezziEtAl => 0.0,
        MethodKind::BassiEtAl => 3.0,
    }
}

pub fn penalty_report(mesh: &Mesh, method: MethodKind, alpha: f64) -> PenaltyReport {
    let alpha_min = min_alpha(mesh, method);
    PenaltyReport {
        method,
        alpha,
        alpha_min,
        admissible: alpha.is_finite() && alpha > alpha_min,
    }
}

/// Short sparse linear functional on the DG dofs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil<const N: usize> {
    entries: [(usize, f64); N],
    len: usize,
}

impl<const N: usize> Stencil<N> {
    fn new() -> Self {
        Self {
            entries: [(0, 0.0); N],
            len: 0,
        }
    }

    fn push(&mut self, dof: usize, c: f64) {
        self.entries[self.len] = (dof, c);
        self.len += 1;
    }

    pub(crate) fn as_slice(&self) -> &[(usize, f64)] {
        &self.entries[..self.len]
    }
}

/// Midpoint jump `s_e(v)` (so `Π_e⟦v⟧ = s_e(v) n_e`) as a functional.
pub(crate) fn jump_stencil(mesh: &Mesh, e: usize) -> Stencil<4> {
    let edge = &mesh.edges()[e];
    let mut s = Stencil::new();
    let k = edge.local_minus;
    s.push(3 * edge.t_minus + (k + 1) % 3, 0.5);
    s.push(3 * edge.t_minus + (k + 2) % 3, 0.5);
    if let Some(tp) = edge.t_plus {
        let k = edge.local_plus;
        s.push(3 * tp + (k + 1) % 3, -0.5);
        s.push(3 * tp + (k + 2) % 3, -0.5);
    }
    s
}

/// `{∇v}·n_e` as a functional.
pub(crate) fn flux_stencil(mesh: &Mesh, e: usize) -> Stencil<6> {
    let edge = &mesh.edges()[e];
    let mut s = Stencil::new();
    let weight = if edge.is_boundary() { 1.0 } else { 0.5 };
    let mut side = |t: usize| {
        let g = mesh.barycentric_gradients(t);
        for (m, gm) in g.iter().enumerate() {
            s.push(3 * t + m, weight * math::dot(*gm, edge.normal));
        }
    };
    side(edge.t_minus);
    if let Some(tp) = edge.t_plus {
        side(tp);
    }
    s
}

/// `r(Π⟦v⟧)|_T` as a vector-valued functional of the dofs of `t` and its
/// neighbours.
fn global_lift_stencil(mesh: &Mesh, t: usize) -> Vec<(usize, Vec2)> {
    let mut out: Vec<(usize, Vec2)> = Vec::with_capacity(9);
    for e in mesh.triangle_edges(t) {
        let (factors, n) = dg::local_lift_factors(mesh, e);
        let c = factors[..n]
            .iter()
            .find(|(tt, _)| *tt == t)
            .map(|&(_, c)| c)
            .unwrap_or(0.0);
        let normal = mesh.edges()[e].normal;
        for &(dof, j) in jump_stencil(mesh, e).as_slice() {
            let contrib = math::scale(c * j, normal);
            match out.iter_mut().find(|(d, _)| *d == dof) {
                Some((_, acc)) => *acc = math::add(*acc, contrib),
                None => out.push((dof, contrib)),
            }
        }
    }
    out
}

/// `Σ_T |T| c_T²` with `r_e(w)|_T = c_T w`, so that
/// `∫_Ω r_e(Π_e⟦w⟧)·r_e(Π_e⟦v⟧) = weight · s_e(w) s_e(v)`.
fn local_lift_weight(mesh: &Mesh, e: usize) -> f64 {
    let (factors, n) = dg::local_lift_factors(mesh, e);
    factors[..n]
        .iter()
        .map(|&(t, c)| mesh.area(t) * c * c)
        .sum()
}

/// One additive piece of the DG forms, with unit coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormTerm {
    /// `Σ_T ∫_T ∇w·∇v`
    Stiffness,
    /// `−Σ_e ∫_e ({∇w}·⟦v⟧ + {∇v}·⟦w⟧)`
    Consistency,
    /// `Σ_e (1/h_e) ∫_e Π_e⟦w⟧·Π_e⟦v⟧`
    JumpPenalty,
    /// `∫_Ω r(Π⟦w⟧)·r(Π⟦v⟧)`
    GlobalLift,
    /// `Σ_e ∫_Ω r_e(Π_e⟦w⟧)·r_e(Π_e⟦v⟧)`
    LocalLift,
}

fn push_term(b: &mut TripletBuilder, mesh: &Mesh, term: FormTerm, coeff: f64) {
    match term {
        FormTerm::Stiffness => {
            for t in 0..mesh.n_triangles() {
                let s = local_stiffness(mesh, t);
                for m in 0..3 {
                    for n in 0..3 {
                        b.push(3 * t + m, 3 * t + n, coeff * s[m][n]);
                    }
                }
            }
        }
        FormTerm::Consistency => {
            for e in 0..mesh.n_edges() {
                let h = mesh.edges()[e].length;
                let flux = flux_stencil(mesh, e);
                let jump = jump_stencil(mesh, e);
                for &(a, ga) in flux.as_slice() {
                    for &(bb, jb) in jump.as_slice() {
                        b.push_mirrored(a, bb, -coeff * h * (ga * jb));
                    }
                }
            }
        }
        FormTerm::JumpPenalty => {
            for e in 0..mesh.n_edges() {
                b.push_outer(coeff, jump_stencil(mesh, e).as_slice());
            }
        }
        FormTerm::GlobalLift => {
            for t in 0..mesh.n_triangles() {
                let r = global_lift_stencil(mesh, t);
                let area = mesh.area(t);
                for &(i, ri) in &r {
                    for &(j, rj) in &r {
                        b.push(i, j, coeff * area * math::dot(ri, rj));
                    }
                }
            }
        }
        FormTerm::LocalLift => {
            for e in 0..mesh.n_edges() {
                let w = local_lift_weight(mesh, e);
                b.push_outer(coeff * w, jump_stencil(mesh, e).as_slice());
            }
        }
    }
}

/// Assembles a single term with unit coefficient.
pub fn assemble_term(mesh: &Mesh, term: FormTerm) -> SparseSymMatrix {
    let mut b = TripletBuilder::new(3 * mesh.n_triangles());
    push_term(&mut b, mesh, term, 1.0);
    b.build()
}

/// The terms making up a method's form and their coefficients.
pub fn form_terms(method: MethodKind, alpha: f64) -> Vec<(FormTerm, f64)> {
    let mut terms = vec![(FormTerm::Stiffness, 1.0), (FormTerm::Consistency, 1.0)];
    if method.has_global_lift() {
        terms.push((FormTerm::GlobalLift, 1.0));
    }
    if method.has_jump_penalty() {
        terms.push((FormTerm::JumpPenalty, alpha));
    }
    if method.has_local_lift() {
        terms.push((FormTerm::LocalLift, alpha));
    }
    terms
}

/// The system matrix of `A_h` on the DG basis. Rejects inadmissible `α`.
pub fn assemble_system(mesh: &Mesh, method: MethodKind, alpha: f64) -> Result<SparseSymMatrix> {
    let report = penalty_report(mesh, method, alpha);
    if !report.admissible {
        return Err(Error::InadmissiblePenalty(report));
    }
    Ok(assemble_unchecked(mesh, method, alpha))
}

/// Same as [`assemble_system`] without the penalty check.
pub fn assemble_unchecked(mesh: &Mesh, method: MethodKind, alpha: f64) -> SparseSymMatrix {
    let n = 3 * mesh.n_triangles();
    let mut b = TripletBuilder::with_capacity(n, 40 * n);
    for (term, coeff) in form_terms(method, alpha) {
        push_term(&mut b, mesh, term, coeff);
    }
    b.build()
}

/// Evaluates `A_h(w, v)` directly from the jump and lifting operators,
/// without going through a matrix.
pub fn evaluate_form(
    mesh: &Mesh,
    method: MethodKind,
    alpha: f64,
    w: &DgFunction,
    v: &DgFunction,
) -> f64 {
    let stiffness = math::ordered_sum((0..mesh.n_triangles()).map(|t| {
        mesh.area(t) * math::dot(w.gradient(mesh, t), v.gradient(mesh, t))
    }));

    let mean_grad = |u: &DgFunction, e: usize| -> Vec2 {
        let edge = &mesh.edges()[e];
        let gm = u.gradient(mesh, edge.t_minus);
        match edge.t_plus {
            Some(tp) => math::scale(0.5, math::add(gm, u.gradient(mesh, tp))),
            None => gm,
        }
    };
    let pw = dg::jump_mean_projection(w, mesh);
    let pv = dg::jump_mean_projection(v, mesh);
    // ⟦·⟧ is linear along the edge and {∇·} constant, so ∫_e is h_e times
    // the midpoint value, i.e. the edge mean.
    let consistency = math::ordered_sum((0..mesh.n_edges()).map(|e| {
        let h = mesh.edges()[e].length;
        h * (math::dot(mean_grad(w, e), pv.0[e]) + math::dot(mean_grad(v, e), pw.0[e]))
    }));

    let mut total = stiffness - consistency;
    if method.has_global_lift() {
        let rw = dg::lift_global(&pw, mesh);
        let rv = dg::lift_global(&pv, mesh);
        total += rw.inner(&rv, mesh);
    }
    if method.has_jump_penalty() {
        total += alpha
            * math::ordered_sum((0..mesh.n_edges()).map(|e| {
                let h = mesh.edges()[e].length;
                h * math::dot(pw.0[e], pv.0[e]) / h
            }));
    }
    if method.has_local_lift() {
        total += alpha
            * math::ordered_sum((0..mesh.n_edges()).map(|e| {
                let (factors, n) = dg::local_lift_factors(mesh, e);
                factors[..n]
                    .iter()
                    .map(|&(t, c)| {
                        mesh.area(t) * math::dot(math::scale(c, pw.0[e]), math::scale(c, pv.0[e]))
                    })
                    .sum::<f64>()
            }));
    }
    total
}

/// Load vector `(f, φ_i)` on the DG basis, degree-4 quadrature.
pub fn assemble_rhs<F: Fn(Point2) -> f64>(mesh: &Mesh, f: F) -> Vec<f64> {
    let mut b = vec![0.0; 3 * mesh.n_triangles()];
    for t in 0..mesh.n_triangles() {
        let mut local = [0.0; 3];
        for &(bary, w) in DEGREE_4.points {
            let fx = w * f(mesh.map_point(t, bary));
            for m in 0..3 {
                local[m] += fx * bary[m];
            }
        }
        let area = mesh.area(t);
        for m in 0..3 {
            b[3 * t + m] = area * local[m];
        }
    }
    b
}

/// Crouzeix–Raviart system on interior edges (boundary midpoints are zero).
#[derive(Debug, Clone)]
pub struct CrSystem {
    pub matrix: SparseSymMatrix,
    pub rhs: Vec<f64>,
    /// Global edge index of each unknown.
    pub interior_edges: Vec<usize>,
}

pub fn assemble_cr_system<F: Fn(Point2) -> f64>(mesh: &Mesh, f: F) -> CrSystem {
    let mut dof_of = vec![usize::MAX; mesh.n_edges()];
    let mut interior_edges = Vec::with_capacity(mesh.n_interior_edges());
    for e in 0..mesh.n_edges() {
        if !mesh.is_boundary_edge(e) {
            dof_of[e] = interior_edges.len();
            interior_edges.push(e);
        }
    }
    let n = interior_edges.len();
    let mut b = TripletBuilder::with_capacity(n, 9 * mesh.n_triangles());
    let mut rhs = vec![0.0; n];
    for t in 0..mesh.n_triangles() {
        let ids = mesh.triangle_edges(t);
        let g = mesh.barycentric_gradients(t);
        let area = mesh.area(t);
        let mut load = [0.0; 3];
        for &(bary, w) in DEGREE_4.points {
            let fx = w * f(mesh.map_point(t, bary));
            for k in 0..3 {
                load[k] += fx * (1.0 - 2.0 * bary[k]);
            }
        }
        for k in 0..3 {
            let i = dof_of[ids[k]];
            if i == usize::MAX {
                continue;
            }
            rhs[i] += area * load[k];
            for l in 0..3 {
                let j = dof_of[ids[l]];
                if j != usize::MAX {
                    b.push(i, j, 4.0 * area * math::dot(g[k], g[l]));
                }
            }
        }
    }
    CrSystem {
        matrix: b.build(),
        rhs,
        interior_edges,
    }
}

/// Parses `ip`, `ldg`, `brezzi`, `bassi` into a list; used by config code.
/// Comma-separated method names, or `all`.
pub fn parse_methods(list: &str) -> Result<Vec<MethodKind>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(MethodKind::ALL.to_vec());
    }
    list.split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse())
        .collect::<Result<Vec<_>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::InvalidConfig(String::from("empty method list")))
            } else {
                Ok(v)
            }
        })
}
