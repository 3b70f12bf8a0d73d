use hardcore_core::graph::{
    ball, girth, random_connected, random_regular, random_regular_bipartite, random_tree,
    short_cycle_count, sphere, Graph, OrientedView,
};
use proptest::prelude::*;
use std::collections::{BTreeSet, VecDeque};

/// Shortest cycle through each edge: remove it and BFS between its endpoints.
fn girth_by_edge_removal(g: &Graph) -> Option<usize> {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut best = None;
    for &(a, b) in &edges {
        let mut dist = vec![usize::MAX; g.vertex_count()];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if (u, w) == (a, b) || (u, w) == (b, a) || dist[w] != usize::MAX {
                    continue;
                }
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
        if dist[b] != usize::MAX {
            let len = dist[b] + 1;
            best = Some(best.map_or(len, |x: usize| x.min(len)));
        }
    }
    best
}

/// Cycles through `v` shorter than `max_len`, by enumerating edge subsets
/// that form a single cycle.
fn cycles_by_edge_subsets(g: &Graph, v: usize, max_len: usize) -> usize {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let m = edges.len();
    assert!(m <= 20);
    let mut count = 0;
    for mask in 1u32..(1 << m) {
        let len = mask.count_ones() as usize;
        if len < 3 || len >= max_len {
            continue;
        }
        let mut degree = vec![0; g.vertex_count()];
        let mut adj = vec![Vec::new(); g.vertex_count()];
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                degree[a] += 1;
                degree[b] += 1;
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        if degree[v] != 2 || degree.iter().any(|&d| d != 0 && d != 2) {
            continue;
        }
        // Connected: walk from v must see every touched vertex.
        let touched = degree.iter().filter(|&&d| d == 2).count();
        let mut seen = BTreeSet::from([v]);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        if seen.len() == touched {
            count += 1;
        }
    }
    count
}

#[test]
fn heawood_girth_matches_edge_removal_oracle() {
    let h = Graph::heawood();
    assert_eq!(h.vertex_count(), 14);
    assert!((0..14).all(|v| h.degree(v) == 3));
    assert_eq!(girth(&h), Some(6));
    assert_eq!(girth_by_edge_removal(&h), Some(6));
}

#[test]
fn short_cycles_match_edge_subset_oracle() {
    let mut graphs = vec![Graph::complete(4), Graph::petersen(), Graph::grid(3, 3), Graph::complete_bipartite(2, 3)];
    for seed in 0..6 {
        graphs.push(random_connected(7, 5, seed));
    }
    for g in &graphs {
        for v in [0, g.vertex_count() - 1] {
            for max_len in 3..9 {
                assert_eq!(short_cycle_count(g, v, max_len), cycles_by_edge_subsets(g, v, max_len));
            }
        }
    }
}

#[test]
fn oriented_heawood_audit() {
    let h = Graph::heawood();
    for w in 0..14 {
        let view = OrientedView::new(&h, w);
        let dist = hardcore_core::graph::distances_from(&h, w, None);
        // Recompute the oriented edge set from scratch.
        let mut expected = BTreeSet::new();
        for (a, b) in h.edges() {
            if dist[a].min(dist[b]) <= 2 && dist[a] != dist[b] {
                expected.insert(if dist[a] > dist[b] { (a, b) } else { (b, a) });
            }
        }
        let oriented: BTreeSet<_> = view.oriented_edges().iter().copied().collect();
        assert_eq!(oriented, expected);
        let tails: BTreeSet<usize> = expected.iter().map(|e| e.0).collect();
        let changed = (0..14).filter(|&x| view.in_neighbors(x) != h.neighbors(x)).count();
        assert_eq!(changed, tails.len());
        let removed: usize = (0..14).map(|x| h.degree(x) - view.in_neighbors(x).len()).sum();
        assert_eq!(removed, expected.len());
    }
}

#[test]
fn regular_generators() {
    let k4 = random_regular(4, 3, 99).unwrap();
    assert_eq!(k4.edge_count(), 6);
    let a = random_regular(10, 3, 5).unwrap();
    let b = random_regular(10, 3, 5).unwrap();
    assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
    let big = random_regular(1000, 10, 1).unwrap();
    assert!((0..1000).all(|v| big.degree(v) == 10));
    let k33 = random_regular_bipartite(3, 3, 4).unwrap();
    assert_eq!(k33.edge_count(), 9);
    let bip = random_regular_bipartite(500, 8, 2).unwrap();
    assert!(girth(&bip).unwrap() >= 4);
    assert!(girth(&bip).unwrap().is_multiple_of(2));
    let colors = bip.two_coloring().unwrap();
    assert!(bip.edges().all(|(u, v)| colors[u] != colors[v]));
}

fn ball_bound(d: usize, r: usize) -> usize {
    if d <= 2 {
        return 1 + 2 * r + d;
    }
    1 + d * ((d - 1).pow(r as u32) - 1) / (d - 2) + d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjacency_is_symmetric(n in 2usize..40, extra in 0usize..30, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        for v in 0..n {
            for &w in g.neighbors(v) {
                prop_assert!(g.neighbors(w).contains(&v));
                prop_assert!(w != v);
            }
            prop_assert!(g.degree(v) <= g.max_degree());
        }
        prop_assert!((0..n).any(|v| g.degree(v) == g.max_degree()));
    }

    #[test]
    fn ball_sizes_are_bounded(n in 3usize..60, extra in 0usize..40, seed in any::<u64>(), r in 0usize..4) {
        let g = random_connected(n, extra, seed);
        let d = g.max_degree();
        for v in 0..n {
            let b = ball(&g, v, r);
            prop_assert!(b.len() <= ball_bound(d, r));
            prop_assert!(b.contains(&v));
            let s = sphere(&g, v, r);
            prop_assert!(s.iter().all(|x| b.contains(x)));
        }
    }

    #[test]
    fn girth_bounds_short_cycles(n in 4usize..14, extra in 0usize..8, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let gi = girth(&g);
        prop_assert_eq!(gi, girth_by_edge_removal(&g));
        for v in 0..n {
            // No cycle shorter than the girth.
            let below = gi.unwrap_or(n + 1);
            prop_assert_eq!(short_cycle_count(&g, v, below), 0);
        }
    }

    #[test]
    fn regular_degrees_hold(half_n in 5usize..60, d in 3usize..9, seed in any::<u64>()) {
        let n = 2 * half_n;
        prop_assume!(d < n);
        let g = random_regular(n, d, seed).unwrap();
        prop_assert!((0..n).all(|v| g.degree(v) == d));
    }

    #[test]
    fn oriented_removals_count_oriented_edges(n in 3usize..40, extra in 0usize..30, seed in any::<u64>(), root in 0usize..40) {
        let g = random_connected(n, extra, seed);
        let view = OrientedView::new(&g, root % n);
        let removed: usize = (0..n).map(|x| g.degree(x) - view.in_neighbors(x).len()).sum();
        prop_assert_eq!(removed, view.oriented_edges().len());
        for x in 0..n {
            prop_assert!(view.in_neighbors(x).iter().all(|z| g.neighbors(x).contains(z)));
        }
    }

    #[test]
    fn trees_are_forests(n in 1usize..50, seed in any::<u64>()) {
        let t = random_tree(n, seed);
        prop_assert_eq!(girth(&t), None);
        prop_assert!(t.is_connected());
        for v in 0..n {
            prop_assert_eq!(short_cycle_count(&t, v, 10), 0);
        }
    }
}
