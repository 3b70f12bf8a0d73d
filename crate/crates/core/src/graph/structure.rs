use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::Graph;

/// Distance sentinel for vertices outside the explored region.
pub const UNREACHABLE: usize = usize::MAX;

/// BFS distances from `source`, exploring no further than `limit` when given.
pub fn distances_from(g: &Graph, source: usize, limit: Option<usize>) -> Vec<usize> {
    let mut dist = vec![UNREACHABLE; g.vertex_count()];
    let limit = limit.unwrap_or(usize::MAX);
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        if dist[u] >= limit {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == UNREACHABLE {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Vertices within distance `radius` of `center`, sorted.
pub fn ball(g: &Graph, center: usize, radius: usize) -> Vec<usize> {
    let dist = distances_from(g, center, Some(radius));
    (0..g.vertex_count())
        .filter(|&v| dist[v] <= radius)
        .collect()
}

/// Vertices at distance exactly `radius` from `center`, sorted.
pub fn sphere(g: &Graph, center: usize, radius: usize) -> Vec<usize> {
    let dist = distances_from(g, center, Some(radius));
    (0..g.vertex_count())
        .filter(|&v| dist[v] == radius)
        .collect()
}

/// Length of the shortest cycle, `None` for forests.
///
/// Runs a BFS from every vertex; a non-tree edge `{u, w}` met from root `s`
/// closes a closed walk of length `d(u) + d(w) + 1` through `s`, and the
/// minimum over all roots is the girth.
pub fn girth(g: &Graph) -> Option<usize> {
    let n = g.vertex_count();
    let mut best = usize::MAX;
    let mut dist = vec![UNREACHABLE; n];
    let mut parent = vec![usize::MAX; n];
    let mut touched = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for root in 0..n {
        for &v in &touched {
            dist[v] = UNREACHABLE;
            parent[v] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[root] = 0;
        touched.push(root);
        queue.push_back(root);
        'bfs: while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for &w in g.neighbors(u) {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else if parent[u] != w {
                    best = best.min(dist[u] + dist[w] + 1);
                    if best == 3 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == 3 {
            break;
        }
    }
    (best != usize::MAX).then_some(best)
}

/// Number of distinct simple cycles of length `< max_len` through `v`.
pub fn short_cycle_count(g: &Graph, v: usize, max_len: usize) -> usize {
    if max_len <= 3 {
        return 0;
    }
    let longest = max_len - 1;
    let dist = distances_from(g, v, Some(longest / 2 + 1));
    let mut on_path = vec![false; g.vertex_count()];
    on_path[v] = true;
    // Each cycle is found once per direction.
    let closed = extend_path(g, v, v, 0, longest, &dist, &mut on_path);
    closed / 2
}

fn extend_path(
    g: &Graph,
    start: usize,
    at: usize,
    len: usize,
    longest: usize,
    dist: &[usize],
    on_path: &mut [bool],
) -> usize {
    let mut found = 0;
    for &w in g.neighbors(at) {
        if w == start {
            if len + 1 >= 3 {
                found += 1;
            }
            continue;
        }
        // Still need to get back to `start`.
        if on_path[w] || dist[w] == UNREACHABLE || len + 1 + dist[w] > longest {
            continue;
        }
        on_path[w] = true;
        found += extend_path(g, start, w, len + 1, longest, dist, on_path);
        on_path[w] = false;
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn girth_of_small_graphs() {
        assert_eq!(girth(&Graph::cycle(6)), Some(6));
        assert_eq!(girth(&Graph::path(5)), None);
        assert_eq!(girth(&Graph::complete(4)), Some(3));
        assert_eq!(girth(&Graph::petersen()), Some(5));
        assert_eq!(girth(&Graph::grid(3, 3)), Some(4));
        assert_eq!(girth(&Graph::empty(3)), None);
    }

    #[test]
    fn short_cycles() {
        assert_eq!(short_cycle_count(&Graph::complete(3), 0, 7), 1);
        assert_eq!(short_cycle_count(&Graph::star(4), 0, 10), 0);
        assert_eq!(short_cycle_count(&Graph::complete(4), 2, 4), 3);
        // K4 has 3 triangles and 3 four-cycles through each vertex.
        assert_eq!(short_cycle_count(&Graph::complete(4), 2, 5), 6);
        assert_eq!(short_cycle_count(&Graph::cycle(6), 0, 6), 0);
        assert_eq!(short_cycle_count(&Graph::cycle(6), 0, 7), 1);
    }

    #[test]
    fn balls_and_spheres() {
        let c6 = Graph::cycle(6);
        assert_eq!(ball(&c6, 0, 0), [0]);
        assert_eq!(sphere(&c6, 0, 3), [3]);
        assert_eq!(ball(&c6, 0, 1), [0, 1, 5]);
        assert_eq!(sphere(&c6, 0, 4), Vec::<usize>::new());
    }
}
