//! Newest-vertex bisection checked against a recursive bisect-until-compatible
//! reference and against the mesh invariants.

use std::collections::{BTreeMap, BTreeSet};

use adaptive_dg_core::mesh::{lshape_fan, refine, structured_square, unit_square_two_triangles, uniform_refinement};
use adaptive_dg_core::{Mesh, Point2};
use proptest::prelude::*;

/// Triangles stored as `[newest, a, b]` with refinement edge `a`–`b`.
struct Reference {
    points: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    midpoints: BTreeMap<(usize, usize), usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn has_edge(t: &[usize; 3], e: (usize, usize)) -> bool {
    t.contains(&e.0) && t.contains(&e.1)
}

impl Reference {
    fn from_mesh(mesh: &Mesh) -> Self {
        let triangles = mesh
            .triangles()
            .iter()
            .map(|t| {
                let k = t.refinement_edge;
                [t.vertices[k], t.vertices[(k + 1) % 3], t.vertices[(k + 2) % 3]]
            })
            .collect();
        Self {
            points: mesh.vertices().to_vec(),
            triangles,
            midpoints: BTreeMap::new(),
        }
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        if let Some(&m) = self.midpoints.get(&key(a, b)) {
            return m;
        }
        let (p, q) = (self.points[a], self.points[b]);
        self.points.push(Point2::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y)));
        let m = self.points.len() - 1;
        self.midpoints.insert(key(a, b), m);
        m
    }

    fn split(&mut self, i: usize) {
        let [p0, p1, p2] = self.triangles[i];
        let m = self.midpoint(p1, p2);
        self.triangles[i] = [m, p0, p1];
        self.triangles.push([m, p2, p0]);
    }

    fn find_other(&self, i: usize, e: (usize, usize)) -> Option<usize> {
        (0..self.triangles.len()).find(|&j| j != i && has_edge(&self.triangles[j], e))
    }

    /// Bisects triangle `i`, first making its neighbour across the refinement
    /// edge compatible.
    fn bisect(&mut self, i: usize) {
        let [_, a, b] = self.triangles[i];
        let e = key(a, b);
        if let Some(j) = self.find_other(i, e) {
            let [_, c, d] = self.triangles[j];
            if key(c, d) != e {
                self.bisect(j);
            }
            let j = self.find_other(i, e).expect("neighbour child shares the edge");
            let [_, c, d] = self.triangles[j];
            assert_eq!(key(c, d), e, "neighbour is compatible after recursion");
            self.split(j);
        }
        self.split(i);
    }

    fn refine_edges(&mut self, edges: &[(usize, usize)]) {
        for &e in edges {
            while let Some(i) = (0..self.triangles.len()).find(|&i| has_edge(&self.triangles[i], e)) {
                self.bisect(i);
            }
        }
    }

    fn shapes(&self) -> BTreeSet<[(i64, i64); 3]> {
        self.triangles
            .iter()
            .map(|t| shape_key(t.map(|v| self.points[v])))
            .collect()
    }
}

fn shape_key(p: [Point2; 3]) -> [(i64, i64); 3] {
    let q = |p: Point2| ((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64);
    let mut k = p.map(q);
    k.sort();
    k
}

fn mesh_shapes(mesh: &Mesh) -> BTreeSet<[(i64, i64); 3]> {
    (0..mesh.n_triangles())
        .map(|t| shape_key(mesh.triangle_points(t)))
        .collect()
}

fn edges_as_pairs(mesh: &Mesh, ids: &[usize]) -> Vec<(usize, usize)> {
    ids.iter()
        .map(|&e| {
            let [a, b] = mesh.edges()[e].vertices;
            key(a, b)
        })
        .collect()
}

fn check_against_reference(mesh: &Mesh, marked_edges: &[usize], marked_triangles: &[usize]) -> Mesh {
    let (fine, map) = refine(mesh, marked_edges, marked_triangles).unwrap();
    let mut reference = Reference::from_mesh(mesh);
    let mut pairs = edges_as_pairs(mesh, marked_edges);
    for &t in marked_triangles {
        let r = mesh.triangles()[t].refinement_edge;
        pairs.push(edges_as_pairs(mesh, &[mesh.triangle_edges(t)[r]])[0]);
    }
    reference.refine_edges(&pairs);
    assert_eq!(fine.n_triangles(), reference.triangles.len());
    assert_eq!(mesh_shapes(&fine), reference.shapes());
    assert_eq!(map.child_to_parent.len(), fine.n_triangles());
    fine
}

fn assert_mesh_invariants(coarse: &Mesh, fine: &Mesh) {
    // Rebuilding from raw vertices and triangles re-derives the adjacency and
    // rejects hanging nodes.
    let triples: Vec<[usize; 3]> = fine.triangles().iter().map(|t| t.vertices).collect();
    let rebuilt = Mesh::new(fine.vertices().to_vec(), &triples).unwrap();
    assert_eq!(rebuilt.n_edges(), fine.n_edges());
    assert_eq!(rebuilt.n_interior_edges(), fine.n_interior_edges());
    for e in fine.edges() {
        assert!((e.normal[0].hypot(e.normal[1]) - 1.0).abs() < 1e-14);
    }
    let (a, b) = (coarse.total_area(), fine.total_area());
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn diagonal_bisection_matches_reference() {
    let mesh = unit_square_two_triangles();
    let diag = (0..mesh.n_edges()).find(|&e| !mesh.is_boundary_edge(e)).unwrap();
    let fine = check_against_reference(&mesh, &[diag], &[]);
    assert_eq!(fine.n_triangles(), 4);
}

#[test]
fn boundary_mark_cascades_like_reference() {
    let mesh = unit_square_two_triangles();
    for e in (0..mesh.n_edges()).filter(|&e| mesh.is_boundary_edge(e)) {
        let fine = check_against_reference(&mesh, &[e], &[]);
        // The marked edge is gone from the fine mesh: both halves are present.
        let [a, b] = mesh.edges()[e].vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let m = pa.midpoint(pb);
        let has = |p: Point2, q: Point2| {
            fine.edges().iter().any(|f| {
                let [u, v] = f.vertices.map(|i| fine.vertices()[i]);
                (u == p && v == q) || (u == q && v == p)
            })
        };
        assert!(has(pa, m) && has(m, pb));
        assert!(!has(pa, pb));
    }
}

#[test]
fn children_partition_parents() {
    let mesh = structured_square(3);
    let marks: Vec<usize> = (0..mesh.n_edges()).step_by(4).collect();
    let (fine, map) = refine(&mesh, &marks, &[1, 7]).unwrap();
    let mut child_area = vec![0.0; mesh.n_triangles()];
    for (c, &p) in map.child_to_parent.iter().enumerate() {
        child_area[p] += fine.area(c);
    }
    for (t, a) in child_area.iter().enumerate() {
        assert!((a - mesh.area(t)).abs() <= 1e-12 * mesh.area(t));
    }
}

/// Smallest angle over generations 0 to 2 of `mesh`, obtained by bisecting
/// each triangle twice without regard to conformity.
fn generation_two_min_angle(mesh: &Mesh) -> f64 {
    let mut reference = Reference::from_mesh(mesh);
    let mut min = mesh.min_mesh_angle();
    for _ in 0..2 {
        let n = reference.triangles.len();
        for i in 0..n {
            reference.split(i);
        }
        for t in &reference.triangles {
            let p = t.map(|v| reference.points[v]);
            min = min.min(angle(p));
        }
    }
    min
}

fn angle(p: [Point2; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
            let u = (b.x - a.x, b.y - a.y);
            let v = (c.x - a.x, c.y - a.y);
            let cos = (u.0 * v.0 + u.1 * v.1) / (u.0.hypot(u.1) * v.0.hypot(v.1));
            cos.clamp(-1.0, 1.0).acos()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn uniform_refinement_halves_sizes() {
    let mesh = lshape_fan();
    let (fine, _) = uniform_refinement(&mesh).unwrap();
    assert_eq!(fine.n_triangles(), 4 * mesh.n_triangles());
    let h = |m: &Mesh| (0..m.n_triangles()).map(|t| m.diameter(t)).fold(0.0, f64::max);
    assert!((h(&fine) - 0.5 * h(&mesh)).abs() < 1e-14);
    // Euler characteristic of a simply connected domain.
    let chi = fine.n_vertices() as i64 - fine.n_edges() as i64 + fine.n_triangles() as i64;
    assert_eq!(chi, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_refinements_match_reference(
        seed_marks in proptest::collection::vec((0usize..1000, 0usize..1000), 1..6),
        use_square in any::<bool>(),
        rounds in 1usize..4,
    ) {
        let mut mesh = if use_square { structured_square(2) } else { lshape_fan() };
        let floor = generation_two_min_angle(&mesh);
        for round in 0..rounds {
            let ne = mesh.n_edges();
            let nt = mesh.n_triangles();
            let edges: Vec<usize> = seed_marks.iter().map(|&(e, _)| (e + 7 * round) % ne).collect();
            let tris: Vec<usize> = seed_marks.iter().take(2).map(|&(_, t)| (t + round) % nt).collect();
            let fine = check_against_reference(&mesh, &edges, &tris);
            assert_mesh_invariants(&mesh, &fine);
            prop_assert!(fine.n_triangles() > mesh.n_triangles());
            prop_assert!(fine.min_mesh_angle() >= floor - 1e-12);
            mesh = fine;
        }
    }
}
