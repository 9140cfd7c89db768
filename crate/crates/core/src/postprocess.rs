//! The averaged Crouzeix–Raviart function `u_h*` and the identities that
//! tie it to the DG solution. Each identity is exposed as a residual so the
//! test suite and `adaptive-dg verify` evaluate exactly the same code.

use crate::assembly::{self, MethodKind};
use crate::dg::{self, CrFunction, DgFunction, PiecewiseGradient};
use crate::math;
use crate::mesh::{Mesh, Point2};
use crate::Result;

use alloc::vec::Vec;

/// `u_h*(m_e) = {u_h}(m_e)` on interior midpoints and `0` on the boundary.
pub fn average_to_cr(u: &DgFunction, mesh: &Mesh) -> CrFunction {
    let values: Vec<f64> = mesh
        .edges()
        .iter()
        .map(|edge| match edge.t_plus {
            Some(tp) => {
                0.5 * (u.midpoint_trace(edge.t_minus, edge.local_minus)
                    + u.midpoint_trace(tp, edge.local_plus))
            }
            None => 0.0,
        })
        .collect();
    CrFunction::from_edge_values(mesh, values).expect("one value per edge")
}

/// An identity residual together with the magnitude of the terms involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub residual: f64,
    pub scale: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

/// `|Σ_T ∫∇u·∇v − Σ_e ∫{∇v}·⟦u⟧ − Σ_T ∫∇u*·∇v|`, which vanishes for all
/// `u, v` in the DG space. Scaled by `‖u‖_{1,h} ‖v‖_{1,h}`.
pub fn integral_relation_residual(u: &DgFunction, v: &DgFunction, mesh: &Mesh) -> IdentityResidual {
    let u_star = average_to_cr(u, mesh);
    let mut stiff = 0.0;
    let mut star = 0.0;
    for t in 0..mesh.n_triangles() {
        let gv = v.gradient(mesh, t);
        stiff += mesh.area(t) * math::dot(u.gradient(mesh, t), gv);
        star += mesh.area(t) * math::dot(u_star.gradient(mesh, t), gv);
    }
    let mut flux = 0.0;
    for (e, edge) in mesh.edges().iter().enumerate() {
        let gm = v.gradient(mesh, edge.t_minus);
        let mean = match edge.t_plus {
            Some(tp) => math::scale(0.5, math::add(gm, v.gradient(mesh, tp))),
            None => gm,
        };
        flux += edge.length * math::dot(mean, edge.normal) * dg::jump_scalar(u, mesh, e);
    }
    IdentityResidual {
        residual: (stiff - flux - star).abs(),
        scale: dg::norm_1h(u, mesh) * dg::norm_1h(v, mesh),
    }
}

/// `|A_h(d, d) − (f, d)|` with `d = u_h − u_h*`, for the discrete solution
/// `u_h` of the given method.
pub fn energy_identity_residual<F: Fn(Point2) -> f64>(
    u: &DgFunction,
    f: F,
    mesh: &Mesh,
    method: MethodKind,
    alpha: f64,
) -> IdentityResidual {
    let d = u.sub(&average_to_cr(u, mesh).to_dg(mesh));
    let energy = assembly::evaluate_form(mesh, method, alpha, &d, &d);
    let load = assembly::assemble_rhs(mesh, f);
    let fd = math::ordered_sum(load.iter().zip(d.coeffs()).map(|(b, x)| b * x));
    IdentityResidual {
        residual: (energy - fd).abs(),
        scale: energy.abs(),
    }
}

/// `‖hf‖² = Σ_T h_T² ‖f‖²_{L²(T)}`, degree-4 quadrature.
pub fn data_term<F: Fn(Point2) -> f64>(f: F, mesh: &Mesh) -> f64 {
    math::ordered_sum((0..mesh.n_triangles()).map(|t| volume_indicator(&f, mesh, t)))
}

pub(crate) fn volume_indicator<F: Fn(Point2) -> f64>(f: &F, mesh: &Mesh, t: usize) -> f64 {
    let h = mesh.diameter(t);
    h * h * crate::quadrature::DEGREE_4.integrate(mesh, t, |p, _| {
        let v = f(p);
        v * v
    })
}

/// Observed `‖u_h* − u_h‖²_{1,h} / ‖hf‖²`; `None` when `‖hf‖ = 0`.
pub fn volume_bound_constant<F: Fn(Point2) -> f64>(
    u: &DgFunction,
    u_star: &CrFunction,
    f: F,
    mesh: &Mesh,
) -> Option<f64> {
    let hf = data_term(f, mesh);
    if hf > 0.0 {
        Some(dg::norm_1h_sq(&u.sub(&u_star.to_dg(mesh)), mesh) / hf)
    } else {
        None
    }
}

/// Observed ratio
/// `Σ_T (h_T⁻² ‖u − u*‖²_{L²(T)} + ‖∇(u − u*)‖²_{L²(T)}) / Σ_e |Π_e⟦u⟧|²`;
/// `None` when `u` has no jump means at all.
pub fn jump_control_ratio(u: &DgFunction, mesh: &Mesh) -> Option<f64> {
    let jumps = dg::jump_mean_sq(u, mesh);
    if jumps <= 0.0 {
        return None;
    }
    let d = u.sub(&average_to_cr(u, mesh).to_dg(mesh));
    let num = math::ordered_sum((0..mesh.n_triangles()).map(|t| {
        let h = mesh.diameter(t);
        let g = d.gradient(mesh, t);
        dg::local_l2_sq(mesh.area(t), d.local(t)) / (h * h) + mesh.area(t) * math::dot(g, g)
    }));
    Some(num / jumps)
}

/// Solves the Crouzeix–Raviart problem directly.
pub fn solve_cr<F: Fn(Point2) -> f64>(
    mesh: &Mesh,
    f: F,
    rel_tol: f64,
) -> Result<(CrFunction, crate::solver::SolveReport)> {
    let sys = assembly::assemble_cr_system(mesh, f);
    let (x, report) = crate::solver::solve_spd(&sys.matrix, &sys.rhs, rel_tol)?;
    Ok((CrFunction::from_interior_values(mesh, &x)?, report))
}

/// `‖∇_h(a − b)‖` for two CR functions on the same mesh.
pub fn cr_distance(a: &CrFunction, b: &CrFunction, mesh: &Mesh) -> f64 {
    let diff: Vec<f64> = a
        .midpoint_values()
        .iter()
        .zip(b.midpoint_values())
        .map(|(x, y)| x - y)
        .collect();
    let d = CrFunction::from_edge_values(mesh, diff).expect("same mesh");
    dg::broken_h1(&d, mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{lshape_fan, unit_square_two_triangles};
    use alloc::vec;

    #[test]
    fn average_of_traces() {
        let mesh = unit_square_two_triangles();
        let e = (0..mesh.n_edges()).find(|&e| !mesh.is_boundary_edge(e)).unwrap();
        let edge = mesh.edges()[e];
        let mut c = vec![0.0; 6];
        // Minus-side midpoint trace 2, plus-side trace 4.
        let (km, kp) = (edge.local_minus, edge.local_plus);
        c[3 * edge.t_minus + (km + 1) % 3] = 2.0;
        c[3 * edge.t_minus + (km + 2) % 3] = 2.0;
        c[3 * edge.t_plus.unwrap() + (kp + 1) % 3] = 4.0;
        c[3 * edge.t_plus.unwrap() + (kp + 2) % 3] = 4.0;
        // Boundary traces are non-zero too; they must be dropped.
        c[3 * edge.t_minus + km] = 7.0;
        let u = DgFunction::from_coeffs(&mesh, c).unwrap();
        let s = average_to_cr(&u, &mesh);
        assert_eq!(s.midpoint_values()[e], 3.0);
        for b in (0..mesh.n_edges()).filter(|&b| mesh.is_boundary_edge(b)) {
            assert_eq!(s.midpoint_values()[b], 0.0);
        }
    }

    #[test]
    fn cr_functions_are_fixed_points() {
        let mesh = lshape_fan();
        let vals = (0..mesh.n_edges()).map(|e| 1.0 + e as f64).collect();
        let cr = CrFunction::from_edge_values(&mesh, vals).unwrap();
        let again = average_to_cr(&cr.to_dg(&mesh), &mesh);
        for (a, b) in cr.midpoint_values().iter().zip(again.midpoint_values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn integral_relation_constant_and_cr() {
        let mesh = lshape_fan();
        let v = DgFunction::interpolate(&mesh, |p| p.x * 0.3 - p.y);
        let c = DgFunction::constant(&mesh, 2.0);
        assert!(integral_relation_residual(&c, &v, &mesh).relative() < 1e-14);
        let vals = (0..mesh.n_edges()).map(|e| libm::sin(e as f64)).collect();
        let cr = CrFunction::from_edge_values(&mesh, vals).unwrap().to_dg(&mesh);
        let r = integral_relation_residual(&cr, &v, &mesh);
        assert!(r.relative() < 1e-14, "{r:?}");
    }

    #[test]
    fn zero_data() {
        let mesh = lshape_fan();
        let u = DgFunction::zeros(&mesh);
        let s = average_to_cr(&u, &mesh);
        assert_eq!(volume_bound_constant(&u, &s, |_| 0.0, &mesh), None);
        assert_eq!(jump_control_ratio(&u, &mesh), None);
        let r = energy_identity_residual(&u, |_| 0.0, &mesh, MethodKind::Ip, 10.0);
        assert_eq!(r.residual, 0.0);
    }
}
