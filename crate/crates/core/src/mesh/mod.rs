//! Conforming triangulations with full edge adjacency.
//!
//! Conventions used throughout the crate:
//!
//! * triangle vertices are stored counter-clockwise;
//! * local edge `k` of a triangle is the edge *opposite* local vertex `k`,
//!   i.e. it joins vertices `k + 1` and `k + 2` (mod 3);
//! * every edge has a minus side `t_minus` (the lower global triangle index)
//!   and, for interior edges, a plus side `t_plus`. The stored unit normal is
//!   the outer normal of `t_minus`, so it points into `t_plus`. Boundary
//!   edges have no plus side and their normal points out of the domain.

mod refine;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, Vec2};
use crate::{Error, Result};

pub use refine::{refine, uniform_refinement, RefinementMap};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn to(self, other: Point2) -> Vec2 {
        [other.x - self.x, other.y - self.y]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    /// Counter-clockwise vertex indices.
    pub vertices: [usize; 3],
    /// Local index of the edge that is bisected next.
    pub refinement_edge: usize,
    pub generation: u32,
    /// Index of the triangle this one was created from in the previous mesh.
    pub parent: Option<usize>,
}

impl Triangle {
    pub fn local_edge_vertices(&self, k: usize) -> [usize; 2] {
        [self.vertices[(k + 1) % 3], self.vertices[(k + 2) % 3]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub t_minus: usize,
    /// Local edge index of this edge inside `t_minus`.
    pub local_minus: usize,
    pub t_plus: Option<usize>,
    /// Local edge index inside `t_plus` (meaningless on the boundary).
    pub local_plus: usize,
    /// Unit outer normal of `t_minus`.
    pub normal: Vec2,
    pub length: f64,
    pub midpoint: Point2,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.t_plus.is_none()
    }

    /// Unit tangent, the normal rotated counter-clockwise.
    pub fn tangent(&self) -> Vec2 {
        [-self.normal[1], self.normal[0]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point2>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
    areas: Vec<f64>,
}

impl Mesh {
    /// Builds a mesh from raw coordinates and vertex triples.
    ///
    /// Clockwise triples are reordered, and every triangle gets its longest
    /// edge as refinement edge (ties go to the lowest global edge index).
    pub fn new(vertices: Vec<Point2>, triples: &[[usize; 3]]) -> Result<Self> {
        for (i, p) in vertices.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteVertex { vertex: i });
            }
        }
        let mut triangles = Vec::with_capacity(triples.len());
        for (t, tri) in triples.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::VertexOutOfRange {
                        triangle: t,
                        vertex: v,
                        count: vertices.len(),
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::RepeatedVertex { triangle: t });
            }
            let mut tri = *tri;
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area == 0.0 {
                return Err(Error::DegenerateTriangle { triangle: t });
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
            triangles.push(Triangle {
                vertices: tri,
                refinement_edge: 0,
                generation: 0,
                parent: None,
            });
        }

        let mut mesh = Self::from_parts(vertices, triangles)?;
        mesh.check_hanging_nodes()?;

        for t in 0..mesh.triangles.len() {
            let ids = mesh.triangle_edges[t];
            let mut best = 0;
            for k in 1..3 {
                let (lk, lb) = (mesh.edge_length_sq(ids[k]), mesh.edge_length_sq(ids[best]));
                if lk > lb || (lk == lb && ids[k] < ids[best]) {
                    best = k;
                }
            }
            mesh.triangles[t].refinement_edge = best;
        }
        Ok(mesh)
    }

    /// Derives edges and adjacency for triangles that already carry their
    /// orientation and refinement edges.
    pub(crate) fn from_parts(vertices: Vec<Point2>, triangles: Vec<Triangle>) -> Result<Self> {
        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.vertices;
            let area = signed_area(vertices[a], vertices[b], vertices[c]);
            if area <= 0.0 {
                return Err(Error::DegenerateTriangle { triangle: t });
            }
            areas.push(area);
        }

        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::with_capacity(3 * triangles.len() / 2 + 2);
        let mut triangle_edges = vec![[0usize; 3]; triangles.len()];

        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let [a, b] = tri.local_edge_vertices(k);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let id = edges.len();
                        lookup.insert(key, id);
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let d = pa.to(pb);
                        let length = math::norm(d);
                        edges.push(Edge {
                            vertices: [a, b],
                            t_minus: t,
                            local_minus: k,
                            t_plus: None,
                            local_plus: 0,
                            normal: [d[1] / length, -d[0] / length],
                            length,
                            midpoint: pa.midpoint(pb),
                        });
                        triangle_edges[t][k] = id;
                    }
                    Some(&id) => {
                        let edge = &mut edges[id];
                        if edge.t_plus.is_some() {
                            return Err(Error::NonManifoldEdge { a: key.0, b: key.1 });
                        }
                        edge.t_plus = Some(t);
                        edge.local_plus = k;
                        triangle_edges[t][k] = id;
                    }
                }
            }
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            triangle_edges,
            areas,
        })
    }

    fn check_hanging_nodes(&self) -> Result<()> {
        for edge in self.edges.iter().filter(|e| e.is_boundary()) {
            let [a, b] = edge.vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let d = pa.to(pb);
            let len_sq = math::dot(d, d);
            for (v, &p) in self.vertices.iter().enumerate() {
                if v == a || v == b {
                    continue;
                }
                let w = pa.to(p);
                let cross = d[0] * w[1] - d[1] * w[0];
                let s = math::dot(d, w) / len_sq;
                if cross.abs() <= 1e-12 * len_sq && s > 1e-12 && s < 1.0 - 1e-12 {
                    return Err(Error::HangingNode { vertex: v, a, b });
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_boundary()).count()
    }

    pub fn n_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].is_boundary()
    }

    /// Global edge indices of the three local edges of `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t].vertices;
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn total_area(&self) -> f64 {
        math::ordered_sum(self.areas.iter().copied())
    }

    fn edge_length_sq(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        let d = self.vertices[a].to(self.vertices[b]);
        math::dot(d, d)
    }

    /// Diameter of `t`, i.e. its longest edge.
    pub fn diameter(&self, t: usize) -> f64 {
        self.triangle_edges[t]
            .iter()
            .map(|&e| self.edges[e].length)
            .fold(0.0, f64::max)
    }

    /// Gradients of the three barycentric coordinates of `t` (constant).
    pub fn barycentric_gradients(&self, t: usize) -> [Vec2; 3] {
        let p = self.triangle_points(t);
        let two_area = 2.0 * self.areas[t];
        let mut g = [[0.0; 2]; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            let (pj, pk) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            *gi = [(pj.y - pk.y) / two_area, (pk.x - pj.x) / two_area];
        }
        g
    }

    /// Maps barycentric coordinates of `t` to a physical point.
    pub fn map_point(&self, t: usize, bary: [f64; 3]) -> Point2 {
        let p = self.triangle_points(t);
        Point2::new(
            bary[0] * p[0].x + bary[1] * p[1].x + bary[2] * p[2].x,
            bary[0] * p[0].y + bary[1] * p[1].y + bary[2] * p[2].y,
        )
    }

    /// Smallest interior angle of `t` in radians.
    pub fn min_angle(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        (0..3)
            .map(|i| {
                let u = p[i].to(p[(i + 1) % 3]);
                let v = p[i].to(p[(i + 2) % 3]);
                let cos = math::dot(u, v) / (math::norm(u) * math::norm(v));
                libm::acos(cos.clamp(-1.0, 1.0))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest angle over all triangles.
    pub fn min_mesh_angle(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| self.min_angle(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Triangles sharing an edge with `t` (`None` across the boundary),
    /// indexed by local edge.
    pub fn neighbors(&self, t: usize) -> [Option<usize>; 3] {
        let mut out = [None; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let e = &self.edges[self.triangle_edges[t][k]];
            *slot = if e.t_minus == t { e.t_plus } else { Some(e.t_minus) };
        }
        out
    }
}

pub(crate) fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Unit square split along the (0,0)–(1,1) diagonal.
pub fn unit_square_two_triangles() -> Mesh {
    structured_square(1)
}

/// `n × n` grid on the unit square, every cell split along its
/// lower-left to upper-right diagonal.
pub fn structured_square(n: usize) -> Mesh {
    let n = n.max(1);
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 * h, j as f64 * h));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triples = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triples.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triples.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(vertices, &triples).expect("structured square is a valid mesh")
}

/// The L-shaped domain `(-1,1)² \ [0,1)×(-1,0)` as six triangles fanned
/// around the re-entrant corner at the origin.
pub fn lshape_fan() -> Mesh {
    let vertices = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
        Point2::new(-1.0, 1.0),
        Point2::new(-1.0, 0.0),
        Point2::new(-1.0, -1.0),
        Point2::new(0.0, -1.0),
    ];
    let triples = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 6], [0, 6, 7]];
    Mesh::new(vertices, &triples).expect("L-shape fan is a valid mesh")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_triangle() -> Mesh {
        Mesh::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            &[[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn two_triangle_square_counts() {
        let m = unit_square_two_triangles();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.n_edges(), 5);
        assert_eq!(m.n_interior_edges(), 1);
    }

    #[test]
    fn single_triangle_counts() {
        let m = single_triangle();
        assert_eq!(m.n_edges(), 3);
        assert_eq!(m.n_boundary_edges(), 3);
        assert_eq!(m.n_interior_edges(), 0);
    }

    #[test]
    fn lshape_counts() {
        // 8 vertices, 6 triangles; Euler gives 13 edges, 5 of them the
        // interior spokes out of the origin.
        let m = lshape_fan();
        assert_eq!(m.n_vertices(), 8);
        assert_eq!(m.n_triangles(), 6);
        assert_eq!(m.n_edges(), 13);
        assert_eq!(m.n_interior_edges(), 5);
        assert!((m.total_area() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_input_is_reordered() {
        let m = Mesh::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            &[[0, 2, 1]],
        )
        .unwrap();
        assert!(m.area(0) > 0.0);
        assert!((m.area(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_invalid_input() {
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        assert!(matches!(
            Mesh::new(pts.clone(), &[[0, 1, 2]]),
            Err(Error::DegenerateTriangle { triangle: 0 })
        ));
        assert!(matches!(
            Mesh::new(pts.clone(), &[[0, 1, 1]]),
            Err(Error::RepeatedVertex { .. })
        ));
        assert!(matches!(
            Mesh::new(pts, &[[0, 1, 7]]),
            Err(Error::VertexOutOfRange { vertex: 7, .. })
        ));
    }

    #[test]
    fn hanging_node_rejected() {
        // Big triangle on the left, two small ones on the right sharing the
        // midpoint of its right edge.
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        ];
        let res = Mesh::new(pts, &[[0, 1, 2], [1, 4, 3], [3, 4, 2]]);
        assert!(matches!(res, Err(Error::HangingNode { vertex: 3, .. })));
    }

    #[test]
    fn edge_orientation_and_normals() {
        let m = lshape_fan();
        for (id, e) in m.edges().iter().enumerate() {
            assert!((math::norm(e.normal) - 1.0).abs() < 1e-14);
            assert_eq!(m.triangle_edges(e.t_minus)[e.local_minus], id);
            if let Some(tp) = e.t_plus {
                assert!(e.t_minus < tp);
                assert_eq!(m.triangle_edges(tp)[e.local_plus], id);
            }
            // Outer normal of t_minus: points away from the opposite vertex.
            let opp = m.triangle_points(e.t_minus)[e.local_minus];
            let w = opp.to(e.midpoint);
            assert!(math::dot(w, e.normal) > 0.0);
        }
    }

    #[test]
    fn refinement_edge_is_longest() {
        let m = lshape_fan();
        for t in 0..m.n_triangles() {
            let r = m.triangles()[t].refinement_edge;
            let e = m.triangle_edges(t)[r];
            assert!((m.edges()[e].length - m.diameter(t)).abs() < 1e-15);
        }
        // Both halves of the square agree on the diagonal.
        let sq = unit_square_two_triangles();
        let d0 = sq.triangle_edges(0)[sq.triangles()[0].refinement_edge];
        let d1 = sq.triangle_edges(1)[sq.triangles()[1].refinement_edge];
        assert_eq!(d0, d1);
        assert!(!sq.is_boundary_edge(d0));
    }

    #[test]
    fn tie_break_lowest_edge_index() {
        // Isosceles with two exactly equal long legs (opposite vertices 0
        // and 1); a single triangle numbers its edges by local index.
        let m = Mesh::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 3.0)],
            &[[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(m.triangle_edges(0), [0, 1, 2]);
        assert_eq!(m.edge_length_sq(0), m.edge_length_sq(1));
        assert_eq!(m.triangles()[0].refinement_edge, 0);
    }

    #[test]
    fn barycentric_gradients_unit_triangle() {
        let m = single_triangle();
        let g = m.barycentric_gradients(0);
        assert_eq!(g, [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
    }
}
