//! Simple undirected graphs stored in compressed adjacency form.
//!
//! Vertices are dense indices `0..n`. Every undirected edge `{u, v}` is kept
//! as two arcs `u -> v` and `v -> u`; arcs are numbered so that the arcs
//! leaving `v` occupy a contiguous range, which lets per-arc data (BP
//! messages, Jacobian entries) live in flat vectors.

mod generate;
mod oriented;
mod structure;

pub use generate::{
    gnp, random_connected, random_regular, random_regular_bipartite, random_tree, PairingMethod,
    RegularGenerator,
};
pub use oriented::OrientedView;
pub use structure::{ball, distances_from, girth, short_cycle_count, sphere, UNREACHABLE};

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for a graph on {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(&'static str),
    #[error("no simple pairing found within {0} attempts")]
    AttemptsExhausted(usize),
}

/// Immutable simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    heads: Vec<usize>,
    tails: Vec<usize>,
    reverse: Vec<usize>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops and repeated edges.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); vertex_count];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: w,
                        vertex_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = if u < w[0] { (u, w[0]) } else { (w[0], u) };
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        Ok(Self::from_sorted_adjacency(adjacency))
    }

    /// Caller guarantees sorted, duplicate-free, symmetric lists without loops.
    pub(crate) fn from_sorted_adjacency(adjacency: Vec<Vec<usize>>) -> Self {
        let n = adjacency.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut heads = Vec::new();
        let mut tails = Vec::new();
        let mut max_degree = 0;
        for (v, list) in adjacency.iter().enumerate() {
            max_degree = max_degree.max(list.len());
            heads.extend_from_slice(list);
            tails.extend(core::iter::repeat_n(v, list.len()));
            offsets.push(heads.len());
        }
        let mut graph = Self {
            offsets,
            heads,
            tails,
            reverse: Vec::new(),
            max_degree,
        };
        graph.reverse = (0..graph.heads.len())
            .map(|a| {
                graph
                    .arc_index(graph.heads[a], graph.tails[a])
                    .expect("adjacency must be symmetric")
            })
            .collect();
        graph
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_adjacency(vec![Vec::new(); n])
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
    }

    /// Cycle on `n >= 3` vertices; smaller `n` falls back to a path.
    pub fn cycle(n: usize) -> Self {
        if n < 3 {
            return Self::path(n);
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::from_edges(n, edges).expect("complete graph is simple")
    }

    /// Star with center `0` and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("star is simple")
    }

    /// Complete bipartite graph with sides `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let edges = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v)));
        Self::from_edges(a + b, edges).expect("complete bipartite graph is simple")
    }

    /// The Heawood graph: 14 vertices, 3-regular, girth 6.
    pub fn heawood() -> Self {
        let ring = (0..14).map(|i| (i, (i + 1) % 14));
        let chords = (0..14).step_by(2).map(|i| (i, (i + 5) % 14));
        Self::from_edges(14, ring.chain(chords)).expect("Heawood graph is simple")
    }

    /// The Petersen graph: 10 vertices, 3-regular, girth 5.
    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Self::from_edges(10, outer.chain(spokes).chain(inner)).expect("Petersen graph is simple")
    }

    /// `rows x cols` grid graph.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::from_edges(rows * cols, edges).expect("grid is simple")
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.heads.len() / 2
    }

    #[inline]
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Sorted neighbor list of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.heads[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.tails
            .iter()
            .zip(&self.heads)
            .filter(|(u, v)| u < v)
            .map(|(&u, &v)| (u, v))
    }

    pub fn arc_count(&self) -> usize {
        self.heads.len()
    }

    /// Arcs leaving `v`; arc `offsets[v] + k` points at the `k`-th neighbor.
    #[inline]
    pub fn arcs_from(&self, v: usize) -> Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    #[inline]
    pub fn arc_tail(&self, arc: usize) -> usize {
        self.tails[arc]
    }

    #[inline]
    pub fn arc_head(&self, arc: usize) -> usize {
        self.heads[arc]
    }

    /// The arc `head -> tail` for arc `tail -> head`.
    #[inline]
    pub fn reverse_arc(&self, arc: usize) -> usize {
        self.reverse[arc]
    }

    pub fn arc_index(&self, tail: usize, head: usize) -> Option<usize> {
        self.neighbors(tail)
            .binary_search(&head)
            .ok()
            .map(|k| self.offsets[tail] + k)
    }

    /// Induced subgraph on the vertices with `keep[v] == true`.
    ///
    /// Returns the subgraph and the original index of each new vertex. The
    /// relabeling preserves vertex order.
    pub fn induced_subgraph(&self, keep: &[bool]) -> (Graph, Vec<usize>) {
        assert_eq!(keep.len(), self.vertex_count());
        let original: Vec<usize> = (0..self.vertex_count()).filter(|&v| keep[v]).collect();
        let mut relabel = vec![usize::MAX; self.vertex_count()];
        for (new, &old) in original.iter().enumerate() {
            relabel[old] = new;
        }
        let adjacency = original
            .iter()
            .map(|&old| {
                self.neighbors(old)
                    .iter()
                    .filter(|&&w| keep[w])
                    .map(|&w| relabel[w])
                    .collect()
            })
            .collect();
        (Self::from_sorted_adjacency(adjacency), original)
    }

    /// Removes the listed vertices. See [`Graph::induced_subgraph`].
    pub fn without_vertices(&self, removed: &[usize]) -> (Graph, Vec<usize>) {
        let mut keep = vec![true; self.vertex_count()];
        for &v in removed {
            keep[v] = false;
        }
        self.induced_subgraph(&keep)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        n == 0
            || distances_from(self, 0, None)
                .iter()
                .all(|&d| d != UNREACHABLE)
    }

    /// Proper two-coloring if one exists.
    pub fn two_coloring(&self) -> Option<Vec<bool>> {
        let n = self.vertex_count();
        let mut color: Vec<Option<bool>> = vec![None; n];
        let mut queue = alloc::collections::VecDeque::new();
        for s in 0..n {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(false);
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let cu = color[u].unwrap();
                for &w in self.neighbors(u) {
                    match color[w] {
                        None => {
                            color[w] = Some(!cu);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cu => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert_eq!(
            Graph::from_edges(2, [(0, 0)]),
            Err(GraphError::SelfLoop(0))
        );
        assert_eq!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            Graph::from_edges(2, [(0, 2)]),
            Err(GraphError::VertexOutOfRange { vertex: 2, .. })
        ));
    }

    #[test]
    fn arcs_are_symmetric() {
        for g in [Graph::heawood(), Graph::petersen(), Graph::grid(3, 4), Graph::star(5)] {
            for a in 0..g.arc_count() {
                let r = g.reverse_arc(a);
                assert_eq!(g.arc_tail(a), g.arc_head(r));
                assert_eq!(g.arc_head(a), g.arc_tail(r));
                assert_eq!(g.reverse_arc(r), a);
            }
            for u in 0..g.vertex_count() {
                for &v in g.neighbors(u) {
                    assert!(g.has_edge(v, u));
                }
            }
            let true_max = (0..g.vertex_count()).map(|v| g.degree(v)).max().unwrap();
            assert_eq!(g.max_degree(), true_max);
        }
    }

    #[test]
    fn named_graphs() {
        let h = Graph::heawood();
        assert_eq!(h.edge_count(), 21);
        assert!((0..14).all(|v| h.degree(v) == 3));
        assert!(h.two_coloring().is_some());
        let p = Graph::petersen();
        assert_eq!(p.edge_count(), 15);
        assert!(p.two_coloring().is_none());
    }

    #[test]
    fn induced_subgraph_relabels_in_order() {
        let g = Graph::path(5);
        let (h, original) = g.without_vertices(&[2]);
        assert_eq!(original, [0, 1, 3, 4]);
        assert_eq!(h.edges().collect::<Vec<_>>(), [(0, 1), (2, 3)]);
    }
}
