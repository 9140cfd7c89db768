//! Built-in model problems with homogeneous Dirichlet data.

use core::f64::consts::PI;

use crate::mesh::{lshape_fan, structured_square, Mesh, Point2};
use crate::{Error, Result};

pub type ScalarField = fn(Point2) -> f64;
pub type VectorField = fn(Point2) -> [f64; 2];

#[derive(Debug, Clone)]
pub struct Problem {
    pub name: &'static str,
    pub mesh: Mesh,
    pub f: ScalarField,
    pub exact_gradient: Option<VectorField>,
    pub description: &'static str,
}

pub const BUILT_IN: [&str; 2] = ["square-sine", "lshape-const"];

pub fn sine_solution(p: Point2) -> f64 {
    libm::sin(PI * p.x) * libm::sin(PI * p.y)
}

pub fn sine_load(p: Point2) -> f64 {
    2.0 * PI * PI * sine_solution(p)
}

pub fn sine_gradient(p: Point2) -> [f64; 2] {
    let (sx, cx) = (libm::sin(PI * p.x), libm::cos(PI * p.x));
    let (sy, cy) = (libm::sin(PI * p.y), libm::cos(PI * p.y));
    [PI * cx * sy, PI * sx * cy]
}

pub fn unit_load(_: Point2) -> f64 {
    1.0
}

impl Problem {
    /// `u = sin(πx) sin(πy)` on the unit square, starting from a 4×4 grid.
    pub fn square_sine() -> Self {
        Self {
            name: "square-sine",
            mesh: structured_square(4),
            f: sine_load,
            exact_gradient: Some(sine_gradient),
            description: "unit square, u = sin(pi x) sin(pi y), f = 2 pi^2 u",
        }
    }

    /// `f ≡ 1` on the L-shaped domain `(-1,1)² \ [0,1)×(-1,0]`.
    pub fn lshape_const() -> Self {
        Self {
            name: "lshape-const",
            mesh: lshape_fan(),
            f: unit_load,
            exact_gradient: None,
            description: "L-shaped domain, f = 1, exact solution unknown",
        }
    }

    /// `f ≡ 1` on a user-supplied mesh.
    pub fn from_mesh(mesh: Mesh) -> Self {
        Self {
            name: "mesh-file",
            mesh,
            f: unit_load,
            exact_gradient: None,
            description: "user mesh, f = 1",
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "square-sine" => Ok(Self::square_sine()),
            "lshape-const" => Ok(Self::lshape_const()),
            other => Err(Error::InvalidConfig(alloc::format!("unknown problem `{other}`"))),
        }
    }

    /// Rejects a load that is not finite at the degree-4 quadrature points.
    pub fn check_load(&self) -> Result<()> {
        for t in 0..self.mesh.n_triangles() {
            for &(bary, _) in crate::quadrature::DEGREE_4.points {
                let v = (self.f)(self.mesh.map_point(t, bary));
                if !v.is_finite() {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "load is not finite on triangle {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_gradient_matches_difference_quotient() {
        let p = Point2::new(0.3, 0.7);
        let h = 1e-6;
        let g = sine_gradient(p);
        let dx = (sine_solution(Point2::new(p.x + h, p.y)) - sine_solution(Point2::new(p.x - h, p.y))) / (2.0 * h);
        let dy = (sine_solution(Point2::new(p.x, p.y + h)) - sine_solution(Point2::new(p.x, p.y - h))) / (2.0 * h);
        assert!((g[0] - dx).abs() < 1e-8);
        assert!((g[1] - dy).abs() < 1e-8);
    }

    #[test]
    fn load_is_minus_laplacian() {
        let p = Point2::new(0.21, 0.64);
        let h = 1e-4;
        let u = sine_solution;
        let lap = (u(Point2::new(p.x + h, p.y)) + u(Point2::new(p.x - h, p.y)) + u(Point2::new(p.x, p.y + h))
            + u(Point2::new(p.x, p.y - h))
            - 4.0 * u(p))
            / (h * h);
        assert!((sine_load(p) + lap).abs() < 1e-5);
    }

    #[test]
    fn lookup() {
        for name in BUILT_IN {
            let p = Problem::by_name(name).unwrap();
            assert_eq!(p.name, name);
            p.check_load().unwrap();
        }
        assert!(Problem::by_name("nope").is_err());
        assert!(Problem::lshape_const().exact_gradient.is_none());
    }
}
