//! Newest-vertex bisection with closure.
//!
//! Marks live on edges. A triangle that has any marked edge must also have
//! its refinement edge marked; this closure is propagated to a fixed point,
//! after which every triangle is split into 2, 3 or 4 children depending on
//! which of its edges carry marks. Children created by a bisection have the
//! new midpoint as local vertex 0 and refinement edge 0.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::{Mesh, Triangle};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementMap {
    /// For every triangle of the refined mesh, its ancestor in the old mesh.
    pub child_to_parent: Vec<usize>,
    /// Old-mesh edges that received a midpoint, ascending.
    pub bisected_edges: Vec<usize>,
}

impl RefinementMap {
    pub fn identity(n_triangles: usize) -> Self {
        Self {
            child_to_parent: (0..n_triangles).collect(),
            bisected_edges: Vec::new(),
        }
    }
}

/// Refines `mesh` so that every marked edge is bisected and every marked
/// triangle is bisected at least once (through its refinement edge).
pub fn refine(
    mesh: &Mesh,
    marked_edges: &[usize],
    marked_triangles: &[usize],
) -> Result<(Mesh, RefinementMap)> {
    let ne = mesh.n_edges();
    let nt = mesh.n_triangles();
    let mut marked = vec![false; ne];
    let mut queue = VecDeque::new();

    for &e in marked_edges {
        if e >= ne {
            return Err(Error::IndexOutOfRange { index: e, len: ne });
        }
        marked[e] = true;
    }
    for &t in marked_triangles {
        if t >= nt {
            return Err(Error::IndexOutOfRange { index: t, len: nt });
        }
        let r = mesh.triangles[t].refinement_edge;
        marked[mesh.triangle_edges[t][r]] = true;
    }

    for (e, &m) in marked.iter().enumerate() {
        if m {
            push_sides(mesh, e, &mut queue);
        }
    }
    while let Some(t) = queue.pop_front() {
        let r = mesh.triangles[t].refinement_edge;
        let re = mesh.triangle_edges[t][r];
        if !marked[re] {
            marked[re] = true;
            push_sides(mesh, re, &mut queue);
        }
    }

    if !marked.iter().any(|&m| m) {
        return Ok((mesh.clone(), RefinementMap::identity(nt)));
    }

    let mut vertices = mesh.vertices.clone();
    let mut midpoint_of = vec![usize::MAX; ne];
    let mut bisected_edges = Vec::new();
    for e in 0..ne {
        if marked[e] {
            midpoint_of[e] = vertices.len();
            vertices.push(mesh.edges[e].midpoint);
            bisected_edges.push(e);
        }
    }

    let mut triangles = Vec::with_capacity(nt + 2 * bisected_edges.len());
    let mut child_to_parent = Vec::with_capacity(triangles.capacity());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let ids = mesh.triangle_edges[t];
        let r = tri.refinement_edge;
        if !marked[ids[r]] {
            triangles.push(Triangle {
                parent: Some(t),
                ..*tri
            });
            child_to_parent.push(t);
            continue;
        }
        let peak = tri.vertices[r];
        let a = tri.vertices[(r + 1) % 3];
        let b = tri.vertices[(r + 2) % 3];
        let m = midpoint_of[ids[r]];
        let gen = tri.generation + 1;
        // Child (m, peak, a) has refinement edge peak–a, the parent's edge
        // opposite b; child (m, b, peak) has b–peak, opposite a.
        let left = ids[(r + 2) % 3];
        let right = ids[(r + 1) % 3];

        let mut emit = |verts: [usize; 3], generation: u32| {
            triangles.push(Triangle {
                vertices: verts,
                refinement_edge: 0,
                generation,
                parent: Some(t),
            });
            child_to_parent.push(t);
        };

        if marked[left] {
            let m2 = midpoint_of[left];
            emit([m2, m, peak], gen + 1);
            emit([m2, a, m], gen + 1);
        } else {
            emit([m, peak, a], gen);
        }
        if marked[right] {
            let m3 = midpoint_of[right];
            emit([m3, m, b], gen + 1);
            emit([m3, peak, m], gen + 1);
        } else {
            emit([m, b, peak], gen);
        }
    }

    let refined = Mesh::from_parts(vertices, triangles)?;
    Ok((
        refined,
        RefinementMap {
            child_to_parent,
            bisected_edges,
        },
    ))
}

fn push_sides(mesh: &Mesh, e: usize, queue: &mut VecDeque<usize>) {
    let edge = &mesh.edges[e];
    queue.push_back(edge.t_minus);
    if let Some(tp) = edge.t_plus {
        queue.push_back(tp);
    }
}

/// Marks every edge: each triangle is split into four.
pub fn uniform_refinement(mesh: &Mesh) -> Result<(Mesh, RefinementMap)> {
    let all: Vec<usize> = (0..mesh.n_edges()).collect();
    refine(mesh, &all, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{lshape_fan, unit_square_two_triangles};

    #[test]
    fn mark_nothing_is_identity() {
        let m = lshape_fan();
        let (r, map) = refine(&m, &[], &[]).unwrap();
        assert_eq!(r, m);
        assert_eq!(map, RefinementMap::identity(6));
    }

    #[test]
    fn bisect_diagonal_of_square() {
        let m = unit_square_two_triangles();
        let diag = m.triangle_edges(0)[m.triangles()[0].refinement_edge];
        let (r, map) = refine(&m, &[diag], &[]).unwrap();
        assert_eq!(r.n_triangles(), 4);
        assert_eq!(r.n_vertices(), 5);
        // Four boundary edges plus four spokes to the centre (Euler: 5 - E + 4 = 1).
        assert_eq!(r.n_edges(), 8);
        assert_eq!(map.bisected_edges, vec![diag]);
        assert_eq!(map.child_to_parent, vec![0, 0, 1, 1]);
        for t in r.triangles() {
            assert_eq!(t.generation, 1);
        }
    }

    #[test]
    fn boundary_edge_mark_cascades() {
        let m = unit_square_two_triangles();
        let boundary: Vec<usize> = (0..m.n_edges()).filter(|&e| m.is_boundary_edge(e)).collect();
        let (r, map) = refine(&m, &[boundary[0]], &[]).unwrap();
        // Diagonal forced by closure: one side splits into 3, the other into 2.
        assert_eq!(r.n_triangles(), 5);
        assert_eq!(map.bisected_edges.len(), 2);
        assert!((r.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_refinement_quadruples() {
        let m = lshape_fan();
        let (r, _) = uniform_refinement(&m).unwrap();
        assert_eq!(r.n_triangles(), 24);
        for t in 0..r.n_triangles() {
            let p = r.triangles()[t].parent.unwrap();
            assert!((r.diameter(t) - 0.5 * m.diameter(p)).abs() < 1e-14);
        }
    }

    #[test]
    fn marked_triangle_bisected() {
        let m = lshape_fan();
        let (r, map) = refine(&m, &[], &[3]).unwrap();
        assert!(map.child_to_parent.iter().filter(|&&p| p == 3).count() >= 2);
        assert!(r.n_triangles() > m.n_triangles());
    }

    #[test]
    fn out_of_range_marks() {
        let m = lshape_fan();
        assert!(refine(&m, &[99], &[]).is_err());
        assert!(refine(&m, &[], &[6]).is_err());
    }
}
