//! Maximum bipartite matching and Hall-violator extraction.

use std::collections::VecDeque;

use crate::graph::VertexSet;

/// Bipartite graph with left vertices `0..left` and right vertices `0..right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartite {
    right: usize,
    adj: Vec<Vec<usize>>,
}

impl Bipartite {
    pub fn new(left: usize, right: usize) -> Self {
        Bipartite { right, adj: vec![Vec::new(); left] }
    }

    /// Panics if an endpoint is out of range.
    pub fn add_edge(&mut self, l: usize, r: usize) {
        assert!(r < self.right, "right vertex {r} out of range");
        if !self.adj[l].contains(&r) {
            self.adj[l].push(r);
            self.adj[l].sort_unstable();
        }
    }

    pub fn left(&self) -> usize {
        self.adj.len()
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn neighbors(&self, l: usize) -> &[usize] {
        &self.adj[l]
    }

    /// Right vertices adjacent to some member of `set`.
    pub fn neighborhood(&self, set: &VertexSet) -> VertexSet {
        VertexSet::from_ids(self.right, set.iter().flat_map(|l| self.adj[l].iter().copied()))
    }
}

/// A matching as a left-to-right partial map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub pair_left: Vec<Option<usize>>,
    pub pair_right: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.pair_left.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_left_perfect(&self) -> bool {
        self.pair_left.iter().all(Option::is_some)
    }
}

/// Maximum-cardinality matching by phases of shortest augmenting paths.
///
/// Deterministic: vertices and neighbours are scanned in ascending order.
pub fn max_matching(b: &Bipartite) -> Matching {
    let nl = b.left();
    let mut pair_left = vec![None; nl];
    let mut pair_right: Vec<Option<usize>> = vec![None; b.right()];
    let mut dist = vec![usize::MAX; nl];

    loop {
        // Layer free left vertices, stop at the first layer touching a free right vertex.
        let mut queue = VecDeque::new();
        for l in 0..nl {
            if pair_left[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = usize::MAX;
        while let Some(l) = queue.pop_front() {
            if dist[l] >= found {
                continue;
            }
            for &r in b.neighbors(l) {
                match pair_right[r] {
                    None => found = found.min(dist[l] + 1),
                    Some(l2) if dist[l2] == usize::MAX => {
                        dist[l2] = dist[l] + 1;
                        queue.push_back(l2);
                    }
                    _ => {}
                }
            }
        }
        if found == usize::MAX {
            break;
        }
        let mut augmented = false;
        for l in 0..nl {
            if pair_left[l].is_none() && augment(b, l, &mut dist, &mut pair_left, &mut pair_right, found) {
                augmented = true;
            }
        }
        if !augmented {
            break;
        }
    }
    Matching { pair_left, pair_right }
}

fn augment(
    b: &Bipartite,
    l: usize,
    dist: &mut [usize],
    pair_left: &mut [Option<usize>],
    pair_right: &mut [Option<usize>],
    limit: usize,
) -> bool {
    for &r in b.neighbors(l) {
        let next_ok = match pair_right[r] {
            None => dist[l] + 1 == limit,
            Some(l2) => dist[l2] == dist[l] + 1 && augment(b, l2, dist, pair_left, pair_right, limit),
        };
        if next_ok {
            pair_left[l] = Some(r);
            pair_right[r] = Some(l);
            return true;
        }
    }
    dist[l] = usize::MAX;
    false
}

/// A left set `S` with `|N(S)| < |S|`, or `None` when a left-perfect matching exists.
///
/// Built as the alternating-path closure of the smallest unmatched left vertex
/// of a maximum matching, so `|N(S)| = |S| − 1`.
pub fn hall_violator(b: &Bipartite) -> Option<VertexSet> {
    let m = max_matching(b);
    hall_violator_from(b, &m)
}

/// As [`hall_violator`], reusing a maximum matching already computed.
pub fn hall_violator_from(b: &Bipartite, m: &Matching) -> Option<VertexSet> {
    let root = (0..b.left()).find(|&l| m.pair_left[l].is_none())?;
    let mut seen_left = VertexSet::new(b.left());
    let mut seen_right = vec![false; b.right()];
    let mut queue = VecDeque::from([root]);
    seen_left.insert(root);
    while let Some(l) = queue.pop_front() {
        for &r in b.neighbors(l) {
            if seen_right[r] {
                continue;
            }
            seen_right[r] = true;
            let mate = m.pair_right[r].expect("maximum matching leaves no augmenting path");
            if seen_left.insert(mate) {
                queue.push_back(mate);
            }
        }
    }
    Some(seen_left)
}
