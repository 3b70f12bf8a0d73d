use alloc::vec::Vec;

use super::{distances_from, Graph, UNREACHABLE};

/// Radius within which edges are oriented toward the root.
const ORIENTATION_RADIUS: usize = 2;

/// The graph seen from a root `w`: every edge within distance 2 of `w`
/// (distance of an edge = smaller endpoint distance) is oriented toward `w`.
///
/// `N*(x)` keeps the neighbors `z` of `x` whose edge is unoriented or points
/// at `x`. So a vertex loses exactly the neighbors one step closer to `w`,
/// provided that neighbor sits within distance 2. Edges whose endpoints are
/// equidistant from `w` have no direction toward `w` and stay unoriented.
#[derive(Debug, Clone)]
pub struct OrientedView<'g> {
    base: &'g Graph,
    root: usize,
    in_offsets: Vec<usize>,
    in_neighbors: Vec<usize>,
    out_offsets: Vec<usize>,
    watchers: Vec<usize>,
    oriented: Vec<(usize, usize)>,
}

impl<'g> OrientedView<'g> {
    pub fn new(base: &'g Graph, root: usize) -> Self {
        let dist = distances_from(base, root, Some(ORIENTATION_RADIUS + 1));
        // Arc x -> z is dropped from N*(x) when z is the head of an oriented edge.
        let points_away = |x: usize, z: usize| {
            dist[z] != UNREACHABLE && dist[z] <= ORIENTATION_RADIUS && dist[z] < dist[x]
        };
        let n = base.vertex_count();
        let mut in_offsets = Vec::with_capacity(n + 1);
        let mut in_neighbors = Vec::new();
        let mut out_offsets = Vec::with_capacity(n + 1);
        let mut watchers = Vec::new();
        let mut oriented = Vec::new();
        in_offsets.push(0);
        out_offsets.push(0);
        for x in 0..n {
            for &z in base.neighbors(x) {
                if points_away(x, z) {
                    oriented.push((x, z));
                } else {
                    in_neighbors.push(z);
                }
                // x ∈ N*(z) unless z is a tail whose head is x.
                if !points_away(z, x) {
                    watchers.push(z);
                }
            }
            in_offsets.push(in_neighbors.len());
            out_offsets.push(watchers.len());
        }
        Self {
            base,
            root,
            in_offsets,
            in_neighbors,
            out_offsets,
            watchers,
            oriented,
        }
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// `N*(x)`: the neighbors whose occupancy can block `x`.
    #[inline]
    pub fn in_neighbors(&self, x: usize) -> &[usize] {
        &self.in_neighbors[self.in_offsets[x]..self.in_offsets[x + 1]]
    }

    /// Vertices `y` with `x ∈ N*(y)`.
    #[inline]
    pub fn watchers(&self, x: usize) -> &[usize] {
        &self.watchers[self.out_offsets[x]..self.out_offsets[x + 1]]
    }

    /// Oriented edges as `(tail, head)` pairs, head closer to the root.
    pub fn oriented_edges(&self) -> &[(usize, usize)] {
        &self.oriented
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_points_at_center() {
        let g = Graph::star(4);
        let view = OrientedView::new(&g, 0);
        assert_eq!(view.in_neighbors(0), g.neighbors(0));
        for leaf in 1..=4 {
            assert!(view.in_neighbors(leaf).is_empty());
            assert_eq!(view.watchers(leaf), [0]);
        }
        assert_eq!(view.oriented_edges().len(), 4);
    }

    #[test]
    fn path_orients_three_nearest_edges() {
        let g = Graph::path(8);
        let view = OrientedView::new(&g, 0);
        assert_eq!(view.oriented_edges(), [(1, 0), (2, 1), (3, 2)]);
        assert_eq!(view.in_neighbors(3), [4]);
        assert_eq!(view.in_neighbors(4), [3, 5]);
    }

    #[test]
    fn watchers_invert_in_neighbors() {
        let g = Graph::petersen();
        let view = OrientedView::new(&g, 3);
        for y in 0..10 {
            for &x in view.in_neighbors(y) {
                assert!(view.watchers(x).contains(&y));
            }
            for &x in view.watchers(y) {
                assert!(view.in_neighbors(x).contains(&y));
            }
        }
    }
}
