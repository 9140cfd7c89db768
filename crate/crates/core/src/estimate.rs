//! Residual estimator built on the averaged CR solution.
//!
//! `η² = Σ_T h_T² ‖f‖²_{L²(T)} + Σ_{e interior} ∫_e h_e ⟦∂u*/∂s⟧² ds`.
//! For P1 the tangential derivative is constant per side, so the edge term
//! is `h_e² · (jump of tangential slope)²`.

use alloc::vec::Vec;

use crate::dg::{CrFunction, PiecewiseGradient};
use crate::math;
use crate::mesh::{Mesh, Point2};
use crate::postprocess::volume_indicator;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorBreakdown {
    /// Indexed by global edge; boundary edges carry 0.
    pub per_edge_jump: Vec<f64>,
    /// Indexed by triangle.
    pub per_element_volume: Vec<f64>,
    pub jump_total: f64,
    pub volume_total: f64,
    pub eta_sq_total: f64,
}

impl EstimatorBreakdown {
    pub fn eta(&self) -> f64 {
        math::sqrt(self.eta_sq_total)
    }
}

/// `h_e² (∂_s u_− − ∂_s u_+)²` on interior edges, 0 on the boundary.
pub fn tangential_jump_indicator<G: PiecewiseGradient>(u_star: &G, mesh: &Mesh, e: usize) -> f64 {
    let edge = &mesh.edges()[e];
    let Some(tp) = edge.t_plus else {
        return 0.0;
    };
    let tau = edge.tangent();
    let jump = math::dot(u_star.gradient(mesh, edge.t_minus), tau)
        - math::dot(u_star.gradient(mesh, tp), tau);
    edge.length * edge.length * jump * jump
}

pub fn estimate<F: Fn(Point2) -> f64>(u_star: &CrFunction, f: F, mesh: &Mesh) -> EstimatorBreakdown {
    let per_edge_jump: Vec<f64> = (0..mesh.n_edges())
        .map(|e| tangential_jump_indicator(u_star, mesh, e))
        .collect();
    let per_element_volume: Vec<f64> = (0..mesh.n_triangles())
        .map(|t| volume_indicator(&f, mesh, t))
        .collect();
    let jump_total = math::ordered_sum(per_edge_jump.iter().copied());
    let volume_total = math::ordered_sum(per_element_volume.iter().copied());
    EstimatorBreakdown {
        per_edge_jump,
        per_element_volume,
        jump_total,
        volume_total,
        eta_sq_total: jump_total + volume_total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::DgFunction;
    use crate::mesh::{lshape_fan, unit_square_two_triangles};
    use crate::postprocess::average_to_cr;
    use alloc::vec;

    #[test]
    fn continuous_function_has_no_jump_terms() {
        // A globally continuous P1 function vanishing on the boundary: the hat
        // at the origin of a refined L-shape is interior there, so use the
        // square with a centre vertex instead.
        let sq = unit_square_two_triangles();
        let diag = sq.triangle_edges(0)[sq.triangles()[0].refinement_edge];
        let (mesh, _) = crate::mesh::refine(&sq, &[diag], &[]).unwrap();
        let centre = mesh
            .vertices()
            .iter()
            .position(|p| (p.x - 0.5).abs() < 1e-15 && (p.y - 0.5).abs() < 1e-15)
            .unwrap();
        let mut c = vec![0.0; 3 * mesh.n_triangles()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for i in 0..3 {
                if tri.vertices[i] == centre {
                    c[3 * t + i] = 1.0;
                }
            }
        }
        let hat = DgFunction::from_coeffs(&mesh, c).unwrap();
        let star = average_to_cr(&hat, &mesh);
        let est = estimate(&star, |_| 0.0, &mesh);
        assert!(est.jump_total < 1e-28);
        assert_eq!(est.volume_total, 0.0);
    }

    #[test]
    fn slope_jump_on_diagonal() {
        // Tangential slopes +1 / −1 on the two sides of the diagonal
        // (h_e = √2): η_e² = 2 · 2² = 8.
        let mesh = unit_square_two_triangles();
        let e = (0..mesh.n_edges()).find(|&e| !mesh.is_boundary_edge(e)).unwrap();
        let edge = mesh.edges()[e];
        let tau = edge.tangent();
        let mut c = vec![0.0; 6];
        for (t, sign) in [(edge.t_minus, 1.0), (edge.t_plus.unwrap(), -1.0)] {
            for (i, p) in mesh.triangle_points(t).iter().enumerate() {
                c[3 * t + i] = sign * (tau[0] * p.x + tau[1] * p.y);
            }
        }
        let u = DgFunction::from_coeffs(&mesh, c).unwrap();
        let eta = tangential_jump_indicator(&u, &mesh, e);
        // Direct edge integration of h_e · 2² over a segment of length h_e.
        let direct = edge.length * 4.0 * edge.length;
        assert!((eta - 8.0).abs() < 1e-13);
        assert!((eta - direct).abs() < 1e-13);
    }

    #[test]
    fn totals_are_sums() {
        let mesh = lshape_fan();
        let u = DgFunction::interpolate(&mesh, |p| libm::sin(3.0 * p.x) * p.y);
        let star = average_to_cr(&u, &mesh);
        let est = estimate(&star, |p| 1.0 + p.x, &mesh);
        let js: f64 = est.per_edge_jump.iter().sum();
        let vs: f64 = est.per_element_volume.iter().sum();
        assert!((js - est.jump_total).abs() <= 1e-12 * js.max(1e-300));
        assert!((vs - est.volume_total).abs() <= 1e-12 * vs);
        assert!(est.per_edge_jump.iter().chain(&est.per_element_volume).all(|&x| x >= 0.0));
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.is_boundary() {
                assert_eq!(est.per_edge_jump[e], 0.0);
            }
        }
    }
}
