//! Bipartite threshold graphs and maximum-cardinality matching.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::Instance;

/// Largest left side accepted by [`brute_force_matching_size`].
pub const BRUTE_FORCE_MAX_LEFT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("left vertex {left} lists right vertex {right}, but there are only {right_count}")]
    EdgeOutOfRange {
        left: usize,
        right: usize,
        right_count: usize,
    },
    #[error("adjacency of left vertex {0} is not strictly increasing")]
    Unsorted(usize),
    #[error("adjacency has {found} rows for {expected} left vertices")]
    RowCount { expected: usize, found: usize },
    #[error("brute force is limited to {BRUTE_FORCE_MAX_LEFT} left vertices, got {0}")]
    TooLarge(usize),
}

/// Simple bipartite graph stored as sorted adjacency lists of the left side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    left_count: usize,
    right_count: usize,
    adjacency: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(
        left_count: usize,
        right_count: usize,
        adjacency: Vec<Vec<usize>>,
    ) -> Result<Self, MatchingError> {
        if adjacency.len() != left_count {
            return Err(MatchingError::RowCount {
                expected: left_count,
                found: adjacency.len(),
            });
        }
        for (left, row) in adjacency.iter().enumerate() {
            if let Some(&right) = row.iter().find(|&&r| r >= right_count) {
                return Err(MatchingError::EdgeOutOfRange {
                    left,
                    right,
                    right_count,
                });
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(MatchingError::Unsorted(left));
            }
        }
        Ok(BipartiteGraph {
            left_count,
            right_count,
            adjacency,
        })
    }

    /// Builds a graph from an edge list; duplicates are dropped.
    pub fn from_edges(
        left_count: usize,
        right_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, MatchingError> {
        let mut adjacency = vec![Vec::new(); left_count];
        for (l, r) in edges {
            if l >= left_count || r >= right_count {
                return Err(MatchingError::EdgeOutOfRange {
                    left: l,
                    right: r,
                    right_count,
                });
            }
            adjacency[l].push(r);
        }
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
        }
        Self::new(left_count, right_count, adjacency)
    }

    pub fn left_count(&self) -> usize {
        self.left_count
    }

    pub fn right_count(&self) -> usize {
        self.right_count
    }

    pub fn neighbors(&self, left: usize) -> &[usize] {
        &self.adjacency[left]
    }

    pub fn has_edge(&self, left: usize, right: usize) -> bool {
        self.adjacency[left].binary_search(&right).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }
}

/// For each left vertex, the matched right vertex if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pair: Vec<Option<usize>>,
}

impl Matching {
    pub fn pairs(&self) -> &[Option<usize>] {
        &self.pair
    }

    pub fn partner(&self, left: usize) -> Option<usize> {
        self.pair[left]
    }

    pub fn size(&self) -> usize {
        self.pair.iter().flatten().count()
    }

    /// Every left vertex is matched.
    pub fn is_perfect(&self) -> bool {
        self.pair.iter().all(Option::is_some)
    }

    /// Checks that the matching uses only edges of `g` and no right vertex twice.
    pub fn is_valid_for(&self, g: &BipartiteGraph) -> bool {
        if self.pair.len() != g.left_count {
            return false;
        }
        let mut used = vec![false; g.right_count];
        for (l, r) in self.pair.iter().enumerate() {
            if let Some(r) = *r {
                if r >= g.right_count || used[r] || !g.has_edge(l, r) {
                    return false;
                }
                used[r] = true;
            }
        }
        true
    }
}

/// Graph over agents and the goods of `block`: agent `i` is adjacent to
/// position `p` iff `u_i(block[p]) >= thresholds[i]`.
///
/// Panics if `thresholds` does not have one entry per agent or a block
/// index is out of range.
pub fn threshold_graph(inst: &Instance, block: &[usize], thresholds: &[f64]) -> BipartiteGraph {
    assert_eq!(thresholds.len(), inst.agents(), "one threshold per agent");
    assert!(block.iter().all(|&g| g < inst.goods()), "block index out of range");
    let adjacency = (0..inst.agents())
        .map(|i| {
            let row = inst.row(i);
            block
                .iter()
                .enumerate()
                .filter(|(_, &g)| row[g] >= thresholds[i])
                .map(|(p, _)| p)
                .collect()
        })
        .collect();
    BipartiteGraph {
        left_count: inst.agents(),
        right_count: block.len(),
        adjacency,
    }
}

const UNMATCHED: usize = usize::MAX;
const INF: usize = usize::MAX;

/// Hopcroft-Karp: phases of layered BFS from free left vertices followed by
/// vertex-disjoint shortest augmenting paths. Vertices and neighbours are
/// scanned in ascending order, so the result is a pure function of `g`.
pub fn maximum_matching(g: &BipartiteGraph) -> Matching {
    let mut left_pair = vec![UNMATCHED; g.left_count];
    let mut right_pair = vec![UNMATCHED; g.right_count];
    let mut dist = vec![INF; g.left_count];
    let mut queue = VecDeque::with_capacity(g.left_count);

    loop {
        // layer left vertices by alternating-path distance from a free vertex
        queue.clear();
        for l in 0..g.left_count {
            if left_pair[l] == UNMATCHED {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = INF;
            }
        }
        let mut found_free = false;
        while let Some(l) = queue.pop_front() {
            for &r in &g.adjacency[l] {
                let next = right_pair[r];
                if next == UNMATCHED {
                    found_free = true;
                } else if dist[next] == INF {
                    dist[next] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found_free {
            break;
        }

        let mut augmented = false;
        let mut cursor = vec![0usize; g.left_count];
        for l in 0..g.left_count {
            if left_pair[l] == UNMATCHED
                && augment(g, l, &mut left_pair, &mut right_pair, &mut dist, &mut cursor)
            {
                augmented = true;
            }
        }
        if !augmented {
            break;
        }
    }

    Matching {
        pair: left_pair
            .into_iter()
            .map(|r| (r != UNMATCHED).then_some(r))
            .collect(),
    }
}

/// Iterative DFS along the BFS layers starting at free vertex `root`.
fn augment(
    g: &BipartiteGraph,
    root: usize,
    left_pair: &mut [usize],
    right_pair: &mut [usize],
    dist: &mut [usize],
    cursor: &mut [usize],
) -> bool {
    let mut stack = vec![root];
    while let Some(&l) = stack.last() {
        let adj = &g.adjacency[l];
        if cursor[l] == adj.len() {
            // dead end: drop it from this phase and move the parent on
            dist[l] = INF;
            stack.pop();
            if let Some(&parent) = stack.last() {
                cursor[parent] += 1;
            }
            continue;
        }
        let r = adj[cursor[l]];
        let next = right_pair[r];
        if next == UNMATCHED {
            // flip the path root .. l, r
            let mut right = r;
            while let Some(left) = stack.pop() {
                let prev = left_pair[left];
                left_pair[left] = right;
                right_pair[right] = left;
                right = prev;
            }
            return true;
        }
        if dist[next] != INF && dist[next] == dist[l] + 1 {
            stack.push(next);
        } else {
            cursor[l] += 1;
        }
    }
    false
}

/// Exact maximum matching size by exhaustive recursion over left vertices.
/// Intended as a test oracle; limited to [`BRUTE_FORCE_MAX_LEFT`] left vertices.
pub fn brute_force_matching_size(g: &BipartiteGraph) -> Result<usize, MatchingError> {
    if g.left_count > BRUTE_FORCE_MAX_LEFT {
        return Err(MatchingError::TooLarge(g.left_count));
    }
    fn go(g: &BipartiteGraph, left: usize, used: &mut Vec<bool>) -> usize {
        if left == g.left_count {
            return 0;
        }
        let mut best = go(g, left + 1, used);
        for &r in &g.adjacency[left] {
            if !used[r] {
                used[r] = true;
                best = best.max(1 + go(g, left + 1, used));
                used[r] = false;
            }
        }
        best
    }
    Ok(go(g, 0, &mut vec![false; g.right_count]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> BipartiteGraph {
        BipartiteGraph::new(n, n, vec![(0..n).collect(); n]).unwrap()
    }

    #[test]
    fn threshold_graph_examples() {
        let ones = Instance::from_rows(2, 2, vec![vec![1.0; 2]; 2]).unwrap();
        assert_eq!(threshold_graph(&ones, &[0, 1], &[0.5, 0.5]), complete(2));

        let zeros = Instance::from_rows(2, 2, vec![vec![0.0; 2]; 2]).unwrap();
        assert_eq!(threshold_graph(&zeros, &[0, 1], &[0.5, 0.5]).edge_count(), 0);

        let mixed =
            Instance::from_rows(2, 2, vec![vec![0.8, 0.2], vec![0.3, 0.9]]).unwrap();
        let g = threshold_graph(&mixed, &[0, 1], &[0.5, 0.5]);
        assert_eq!(g, BipartiteGraph::from_edges(2, 2, [(0, 0), (1, 1)]).unwrap());
    }

    #[test]
    fn threshold_graph_on_a_block() {
        let inst = Instance::from_rows(
            2,
            4,
            vec![vec![0.0, 0.0, 0.9, 0.1], vec![0.0, 0.0, 0.6, 0.7]],
        )
        .unwrap();
        let g = threshold_graph(&inst, &[2, 3], &[0.5, 0.65]);
        assert_eq!(g.neighbors(0), &[0]);
        assert_eq!(g.neighbors(1), &[1]);
    }

    #[test]
    fn complete_and_empty() {
        for n in 0..7 {
            let m = maximum_matching(&complete(n));
            assert_eq!(m.size(), n);
            assert!(m.is_perfect());
            assert!(m.is_valid_for(&complete(n)));
        }
        let empty = BipartiteGraph::new(4, 4, vec![vec![]; 4]).unwrap();
        assert_eq!(maximum_matching(&empty).size(), 0);
    }

    #[test]
    fn needs_augmenting_path() {
        // greedy 0-0 blocks vertex 1; the optimum is 0-1, 1-0
        let g = BipartiteGraph::from_edges(2, 2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        let m = maximum_matching(&g);
        assert_eq!(m.size(), 2);
        assert_eq!(m.pairs(), &[Some(1), Some(0)]);
    }

    #[test]
    fn long_augmenting_chain() {
        // path graph l0-r0-l1-r1-...; matching must be perfect
        let n = 200;
        let edges = (0..n).flat_map(|i| {
            let mut e = vec![(i, i)];
            if i + 1 < n {
                e.push((i + 1, i));
            }
            e
        });
        let g = BipartiteGraph::from_edges(n, n, edges).unwrap();
        let m = maximum_matching(&g);
        assert!(m.is_perfect());
        assert!(m.is_valid_for(&g));
    }

    #[test]
    fn rectangular_graphs() {
        let g = BipartiteGraph::from_edges(3, 1, [(0, 0), (1, 0), (2, 0)]).unwrap();
        assert_eq!(maximum_matching(&g).size(), 1);
        let g = BipartiteGraph::from_edges(1, 3, [(0, 2)]).unwrap();
        assert_eq!(maximum_matching(&g).partner(0), Some(2));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_matching_size(&complete(3)).unwrap(), 3);
        let isolated = BipartiteGraph::from_edges(3, 3, [(0, 0), (1, 1), (1, 2)]).unwrap();
        assert!(brute_force_matching_size(&isolated).unwrap() < 3);
        assert_eq!(
            brute_force_matching_size(&complete(11)),
            Err(MatchingError::TooLarge(11))
        );
    }

    #[test]
    fn rejects_malformed_adjacency() {
        assert!(matches!(
            BipartiteGraph::new(1, 2, vec![vec![0, 2]]),
            Err(MatchingError::EdgeOutOfRange { .. })
        ));
        assert_eq!(
            BipartiteGraph::new(1, 3, vec![vec![1, 1]]),
            Err(MatchingError::Unsorted(0))
        );
        assert!(BipartiteGraph::new(2, 3, vec![vec![]]).is_err());
    }

    #[test]
    fn deterministic() {
        let g = BipartiteGraph::from_edges(
            4,
            4,
            [(0, 1), (0, 2), (1, 0), (1, 2), (2, 2), (2, 3), (3, 0), (3, 3)],
        )
        .unwrap();
        assert_eq!(maximum_matching(&g), maximum_matching(&g.clone()));
    }
}
