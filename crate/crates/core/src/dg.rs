//! Discrete spaces and the edge operators shared by all four methods.
//!
//! A [`DgFunction`] stores vertex values per triangle, so the trace of a
//! P1 function at an edge midpoint is the average of two coefficients and
//! the edge mean of its jump is exactly that midpoint jump. Every jump
//! `⟦v⟧` on an edge is a scalar times the stored edge normal; most of the
//! crate works with that scalar, see [`jump_scalar`].

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, Vec2};
use crate::mesh::{Mesh, Point2};

/// Piecewise-linear, fully discontinuous function.
#[derive(Debug, Clone, PartialEq)]
pub struct DgFunction {
    coeffs: Vec<f64>,
}

impl DgFunction {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            coeffs: vec![0.0; 3 * mesh.n_triangles()],
        }
    }

    /// Wraps coefficients laid out triangle-major, vertex-minor.
    pub fn from_coeffs(mesh: &Mesh, coeffs: Vec<f64>) -> crate::Result<Self> {
        if coeffs.len() != 3 * mesh.n_triangles() {
            return Err(crate::Error::DimensionMismatch {
                expected: 3 * mesh.n_triangles(),
                found: coeffs.len(),
            });
        }
        Ok(Self { coeffs })
    }

    /// Vertex interpolant of `g`, taken element by element.
    pub fn interpolate<F: Fn(Point2) -> f64>(mesh: &Mesh, g: F) -> Self {
        let mut coeffs = Vec::with_capacity(3 * mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            for p in mesh.triangle_points(t) {
                coeffs.push(g(p));
            }
        }
        Self { coeffs }
    }

    pub fn constant(mesh: &Mesh, c: f64) -> Self {
        Self {
            coeffs: vec![c; 3 * mesh.n_triangles()],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn local(&self, t: usize) -> [f64; 3] {
        [self.coeffs[3 * t], self.coeffs[3 * t + 1], self.coeffs[3 * t + 2]]
    }

    /// Value at the midpoint of local edge `k` of `t`.
    pub fn midpoint_trace(&self, t: usize, k: usize) -> f64 {
        let v = self.local(t);
        0.5 * (v[(k + 1) % 3] + v[(k + 2) % 3])
    }

    pub fn sub(&self, other: &DgFunction) -> DgFunction {
        DgFunction {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Crouzeix–Raviart function: one value per edge midpoint, zero on the
/// boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct CrFunction {
    midpoint_values: Vec<f64>,
}

impl CrFunction {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            midpoint_values: vec![0.0; mesh.n_edges()],
        }
    }

    /// Builds from per-edge values; boundary entries are forced to zero.
    pub fn from_edge_values(mesh: &Mesh, mut values: Vec<f64>) -> crate::Result<Self> {
        if values.len() != mesh.n_edges() {
            return Err(crate::Error::DimensionMismatch {
                expected: mesh.n_edges(),
                found: values.len(),
            });
        }
        for (e, v) in values.iter_mut().enumerate() {
            if mesh.is_boundary_edge(e) {
                *v = 0.0;
            }
        }
        Ok(Self {
            midpoint_values: values,
        })
    }

    /// Builds from values on interior edges only, in ascending edge order.
    pub fn from_interior_values(mesh: &Mesh, interior: &[f64]) -> crate::Result<Self> {
        let mut values = vec![0.0; mesh.n_edges()];
        let mut it = interior.iter();
        for (e, slot) in values.iter_mut().enumerate() {
            if !mesh.is_boundary_edge(e) {
                *slot = *it.next().ok_or(crate::Error::DimensionMismatch {
                    expected: mesh.n_interior_edges(),
                    found: interior.len(),
                })?;
            }
        }
        if it.next().is_some() {
            return Err(crate::Error::DimensionMismatch {
                expected: mesh.n_interior_edges(),
                found: interior.len(),
            });
        }
        Ok(Self {
            midpoint_values: values,
        })
    }

    pub fn midpoint_values(&self) -> &[f64] {
        &self.midpoint_values
    }

    pub fn local(&self, mesh: &Mesh, t: usize) -> [f64; 3] {
        let ids = mesh.triangle_edges(t);
        [
            self.midpoint_values[ids[0]],
            self.midpoint_values[ids[1]],
            self.midpoint_values[ids[2]],
        ]
    }

    /// The same function in the DG vertex basis: with midpoint values `m_k`
    /// the vertex value is `m_0 + m_1 + m_2 - 2 m_i`.
    pub fn to_dg(&self, mesh: &Mesh) -> DgFunction {
        let mut coeffs = Vec::with_capacity(3 * mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            let m = self.local(mesh, t);
            let s = m[0] + m[1] + m[2];
            for mi in m {
                coeffs.push(s - 2.0 * mi);
            }
        }
        DgFunction { coeffs }
    }
}

/// Per-triangle constant 2-vectors (the space `W_h`).
#[derive(Debug, Clone, PartialEq)]
pub struct PwConstVec(pub Vec<Vec2>);

impl PwConstVec {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self(vec![[0.0; 2]; mesh.n_triangles()])
    }

    /// `∫_Ω self · other`.
    pub fn inner(&self, other: &PwConstVec, mesh: &Mesh) -> f64 {
        math::ordered_sum(
            self.0
                .iter()
                .zip(&other.0)
                .enumerate()
                .map(|(t, (a, b))| mesh.area(t) * math::dot(*a, *b)),
        )
    }
}

/// Per-edge constant 2-vectors, e.g. the edge means of jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeConstVec(pub Vec<Vec2>);

/// Elementwise-constant gradient of a piecewise-linear function.
pub trait PiecewiseGradient {
    fn gradient(&self, mesh: &Mesh, t: usize) -> Vec2;
}

impl PiecewiseGradient for DgFunction {
    fn gradient(&self, mesh: &Mesh, t: usize) -> Vec2 {
        let g = mesh.barycentric_gradients(t);
        let v = self.local(t);
        [
            v[0] * g[0][0] + v[1] * g[1][0] + v[2] * g[2][0],
            v[0] * g[0][1] + v[1] * g[1][1] + v[2] * g[2][1],
        ]
    }
}

impl PiecewiseGradient for CrFunction {
    fn gradient(&self, mesh: &Mesh, t: usize) -> Vec2 {
        // Basis of edge k on t is 1 - 2 λ_k.
        let g = mesh.barycentric_gradients(t);
        let m = self.local(mesh, t);
        [
            -2.0 * (m[0] * g[0][0] + m[1] * g[1][0] + m[2] * g[2][0]),
            -2.0 * (m[0] * g[0][1] + m[1] * g[1][1] + m[2] * g[2][1]),
        ]
    }
}

/// Scalar edge mean of the jump of `v` across edge `e`, so that
/// `Π_e(⟦v⟧) = jump_scalar · n_e`. On the boundary it is the trace mean.
pub fn jump_scalar(v: &DgFunction, mesh: &Mesh, e: usize) -> f64 {
    let edge = &mesh.edges()[e];
    let minus = v.midpoint_trace(edge.t_minus, edge.local_minus);
    match edge.t_plus {
        Some(tp) => minus - v.midpoint_trace(tp, edge.local_plus),
        None => minus,
    }
}

/// `Π_e(⟦v⟧)` on every edge.
pub fn jump_mean_projection(v: &DgFunction, mesh: &Mesh) -> EdgeConstVec {
    EdgeConstVec(
        (0..mesh.n_edges())
            .map(|e| math::scale(jump_scalar(v, mesh, e), mesh.edges()[e].normal))
            .collect(),
    )
}

/// The triangles carrying `r_e` and the factor `c` with `r_e(w)|_T = c w`.
///
/// Interior: `c = -h_e / (2|T±|)` on both sides. Boundary: `c = -h_e / |T|`.
pub fn local_lift_factors(mesh: &Mesh, e: usize) -> ([(usize, f64); 2], usize) {
    let edge = &mesh.edges()[e];
    match edge.t_plus {
        Some(tp) => (
            [
                (edge.t_minus, -edge.length / (2.0 * mesh.area(edge.t_minus))),
                (tp, -edge.length / (2.0 * mesh.area(tp))),
            ],
            2,
        ),
        None => (
            [(edge.t_minus, -edge.length / mesh.area(edge.t_minus)), (0, 0.0)],
            1,
        ),
    }
}

/// Local lifting `r_e(w)` of a constant vector on edge `e`.
pub fn lift_local(e: usize, w: Vec2, mesh: &Mesh) -> PwConstVec {
    let mut out = PwConstVec::zeros(mesh);
    let (factors, n) = local_lift_factors(mesh, e);
    for &(t, c) in &factors[..n] {
        out.0[t] = math::scale(c, w);
    }
    out
}

/// Global lifting `r(w) = Σ_e r_e(w_e)`.
pub fn lift_global(w: &EdgeConstVec, mesh: &Mesh) -> PwConstVec {
    let mut out = PwConstVec::zeros(mesh);
    for (e, &we) in w.0.iter().enumerate() {
        let (factors, n) = local_lift_factors(mesh, e);
        for &(t, c) in &factors[..n] {
            out.0[t] = math::add(out.0[t], math::scale(c, we));
        }
    }
    out
}

/// Broken `H¹` seminorm `‖∇_h v‖`.
pub fn broken_h1<F: PiecewiseGradient>(v: &F, mesh: &Mesh) -> f64 {
    math::sqrt(broken_h1_sq(v, mesh))
}

pub fn broken_h1_sq<F: PiecewiseGradient>(v: &F, mesh: &Mesh) -> f64 {
    math::ordered_sum((0..mesh.n_triangles()).map(|t| {
        let g = v.gradient(mesh, t);
        mesh.area(t) * math::dot(g, g)
    }))
}

/// Sum of squared jump means, `Σ_e |Π_e(⟦v⟧)|²`.
pub fn jump_mean_sq(v: &DgFunction, mesh: &Mesh) -> f64 {
    math::ordered_sum((0..mesh.n_edges()).map(|e| {
        let s = jump_scalar(v, mesh, e);
        s * s
    }))
}

/// Squared mesh-dependent norm `‖v‖²_{1,h}`.
pub fn norm_1h_sq(v: &DgFunction, mesh: &Mesh) -> f64 {
    broken_h1_sq(v, mesh) + jump_mean_sq(v, mesh)
}

pub fn norm_1h(v: &DgFunction, mesh: &Mesh) -> f64 {
    math::sqrt(norm_1h_sq(v, mesh))
}

/// `‖v‖²_{L²(T)}` for a P1 function given by vertex values.
pub fn local_l2_sq(area: f64, v: [f64; 3]) -> f64 {
    let s = v[0] + v[1] + v[2];
    area / 12.0 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + s * s)
}
