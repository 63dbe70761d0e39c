//! Undirected simple graphs over `0..n` with bitset neighbourhoods.

mod gen;
mod io;
mod set;

use std::collections::{BTreeSet, VecDeque};

pub use gen::{
    blowup, cycle_power, degenerate_random, factor, gnp, k_factor, random_bounded_degree,
    random_regular,
};
pub use io::{load_graph, parse_graph, save_graph, write_graph};
pub use set::VertexSet;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("empty part in density computation")]
    EmptyPart,
    #[error("edge probability must be positive, got {0}")]
    BadP(f64),
    #[error("vertex {vertex} out of range for {n} vertices")]
    OutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An undirected simple graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(into = "EdgeForm", try_from = "EdgeForm")]
pub struct Graph {
    adj: Vec<VertexSet>,
    edges: usize,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct EdgeForm {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl From<Graph> for EdgeForm {
    fn from(g: Graph) -> Self {
        EdgeForm { n: g.n(), edges: g.edges().collect() }
    }
}

impl TryFrom<EdgeForm> for Graph {
    type Error = GraphError;
    fn try_from(f: EdgeForm) -> Result<Self, GraphError> {
        Graph::from_edges(f.n, &f.edges)
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n(), self.edges)
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![VertexSet::new(n); n], edges: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::OutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Adds `uv`; returns false if it was already present.
    ///
    /// Panics on self-loops or ids out of range.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert_ne!(u, v, "self-loop at {u}");
        let fresh = self.adj[u].insert(v);
        self.adj[v].insert(u);
        if fresh {
            self.edges += 1;
        }
        fresh
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// `|N(v) ∩ set|`.
    pub fn degree_into(&self, v: usize, set: &VertexSet) -> usize {
        self.adj[v].count_and(set)
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| self.adj[u].iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Edge density `e / C(n, 2)`; zero for fewer than two vertices.
    pub fn density(&self) -> f64 {
        let n = self.n() as f64;
        if self.n() < 2 {
            0.0
        } else {
            self.edges as f64 / (n * (n - 1.0) / 2.0)
        }
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    /// First edge of `self` missing from `other`, if any.
    pub fn first_edge_not_in(&self, other: &Graph) -> Option<(usize, usize)> {
        self.edges().find(|&(u, v)| u >= other.n() || v >= other.n() || !other.has_edge(u, v))
    }

    /// Breadth-first distances from `src`, truncated at `radius` (farther vertices get `None`).
    pub fn distances_within(&self, src: usize, radius: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            if du == radius {
                continue;
            }
            for w in self.adj[u].iter() {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Vertices at distance at most `radius` from `src`, including `src`.
    pub fn ball(&self, src: usize, radius: usize) -> VertexSet {
        let dist = self.distances_within(src, radius);
        VertexSet::from_ids(self.n(), (0..self.n()).filter(|&v| dist[v].is_some()))
    }

    /// Vertices at distance at most `radius` from some vertex of `srcs`.
    pub fn ball_of_set(&self, srcs: &VertexSet, radius: usize) -> VertexSet {
        let mut reached = srcs.clone();
        let mut frontier = srcs.clone();
        for _ in 0..radius {
            let mut next = VertexSet::new(self.n());
            for u in frontier.iter() {
                next.union_with(&self.adj[u]);
            }
            next.difference_with(&reached);
            if next.is_empty() {
                break;
            }
            reached.union_with(&next);
            frontier = next;
        }
        reached
    }

    /// The subgraph induced on `keep`, with vertices relabelled in increasing id order.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut g = Graph::empty(keep.len());
        for (i, &u) in keep.iter().enumerate() {
            for (j, &v) in keep.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            let dist = self.distances_within(s, usize::MAX);
            let comp: Vec<usize> = (0..self.n()).filter(|&v| dist[v].is_some()).collect();
            for &v in &comp {
                seen[v] = true;
            }
            out.push(comp);
        }
        out
    }
}

/// Ordered incidences `|{(a, b) : a ∈ A, b ∈ B, ab ∈ E}|`.
///
/// For disjoint sets this is the number of edges between them; an edge inside
/// `A ∩ B` is counted twice.
pub fn edges_between(g: &Graph, a: &VertexSet, b: &VertexSet) -> usize {
    a.iter().map(|u| g.degree_into(u, b)).sum()
}

/// `e(A, B) / (p |A| |B|)`.
pub fn p_density(g: &Graph, a: &VertexSet, b: &VertexSet, p: f64) -> Result<f64, GraphError> {
    if !(p > 0.0) {
        return Err(GraphError::BadP(p));
    }
    if a.is_empty() || b.is_empty() {
        return Err(GraphError::EmptyPart);
    }
    Ok(edges_between(g, a, b) as f64 / (p * a.len() as f64 * b.len() as f64))
}

/// `A ∩ ⋂_{s ∈ S} N(s)`; returns `A` when `S` is empty.
pub fn common_neighborhood(g: &Graph, s: &VertexSet, a: &VertexSet) -> VertexSet {
    let mut out = a.clone();
    for v in s.iter() {
        out.intersect_with(g.neighbors(v));
    }
    out
}

/// Same as [`common_neighborhood`] for a slice of vertices.
pub fn common_neighborhood_of(g: &Graph, s: &[usize], a: &VertexSet) -> VertexSet {
    let mut out = a.clone();
    for &v in s {
        out.intersect_with(g.neighbors(v));
    }
    out
}

/// An order in which every vertex has at most `degen` earlier neighbours.
///
/// Repeatedly deletes a minimum-degree vertex (smallest id on ties) and
/// returns the deletion order reversed, with the largest back-degree seen.
pub fn degeneracy_order(h: &Graph) -> (Vec<usize>, usize) {
    let n = h.n();
    let mut deg: Vec<usize> = (0..n).map(|v| h.degree(v)).collect();
    let mut heap: BTreeSet<(usize, usize)> = (0..n).map(|v| (deg[v], v)).collect();
    let mut removed = vec![false; n];
    let mut removal = Vec::with_capacity(n);
    let mut degen = 0;
    while let Some((d, v)) = heap.pop_first() {
        degen = degen.max(d);
        removed[v] = true;
        removal.push(v);
        for w in h.neighbors(v).iter() {
            if !removed[w] {
                heap.remove(&(deg[w], w));
                deg[w] -= 1;
                heap.insert((deg[w], w));
            }
        }
    }
    removal.reverse();
    (removal, degen)
}

/// All `k`-cliques of `h` containing `x`, each as a sorted vertex list.
pub fn cliques_through(h: &Graph, x: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(h: &Graph, current: &mut Vec<usize>, cand: &VertexSet, need: usize, out: &mut Vec<Vec<usize>>) {
        if need == 0 {
            let mut c = current.clone();
            c.sort_unstable();
            out.push(c);
            return;
        }
        let last = *current.last().unwrap_or(&0);
        // Extend with ids above the last non-root pick to avoid duplicates.
        for w in cand.iter() {
            if current.len() > 1 && w <= last {
                continue;
            }
            let next = cand.intersection(h.neighbors(w));
            current.push(w);
            extend(h, current, &next, need - 1, out);
            current.pop();
        }
    }
    if k == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current = vec![x];
    extend(h, &mut current, h.neighbors(x), k - 1, &mut out);
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn k34() -> (Graph, VertexSet, VertexSet) {
        let mut g = Graph::empty(7);
        for a in 0..3 {
            for b in 3..7 {
                g.add_edge(a, b);
            }
        }
        (g, VertexSet::from_ids(7, 0..3), VertexSet::from_ids(7, 3..7))
    }

    #[test]
    fn complete_bipartite_counts() {
        let (g, a, b) = k34();
        assert_eq!(edges_between(&g, &a, &b), 12);
        assert_eq!(p_density(&g, &a, &b, 1.0).unwrap(), 1.0);
        assert_eq!(p_density(&g, &a, &b, 0.5).unwrap(), 2.0);
    }

    #[test]
    fn density_errors() {
        let (g, a, _) = k34();
        assert!(matches!(p_density(&g, &a, &VertexSet::new(7), 1.0), Err(GraphError::EmptyPart)));
        assert!(matches!(p_density(&g, &a, &a, 0.0), Err(GraphError::BadP(_))));
    }

    #[test]
    fn six_edges_at_half() {
        // e=6, |A|=3, |B|=4 at p=1/2 has p-density one.
        let mut g = Graph::empty(7);
        for (u, v) in [(0, 3), (0, 4), (1, 5), (1, 6), (2, 3), (2, 6)] {
            g.add_edge(u, v);
        }
        let a = VertexSet::from_ids(7, 0..3);
        let b = VertexSet::from_ids(7, 3..7);
        assert_eq!(p_density(&g, &a, &b, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn overlapping_sets_count_inner_edges_twice() {
        let g = Graph::complete(3);
        let all = g.vertex_set();
        assert_eq!(edges_between(&g, &all, &all), 6);
    }

    #[test]
    fn disjoint_in_empty_graph() {
        let g = Graph::empty(6);
        assert_eq!(edges_between(&g, &VertexSet::from_ids(6, 0..3), &VertexSet::from_ids(6, 3..6)), 0);
    }

    #[test]
    fn edges_between_matches_pair_scan() {
        for seed in 0..20 {
            let mut rng = Rng::new(seed);
            let g = gnp(20, 0.5, &mut rng);
            let a = VertexSet::from_ids(20, 0..8);
            let b = VertexSet::from_ids(20, 10..18);
            let brute = (0..8).flat_map(|u| (10..18).map(move |v| (u, v))).filter(|&(u, v)| g.has_edge(u, v)).count();
            assert_eq!(edges_between(&g, &a, &b), brute);
        }
    }

    #[test]
    fn common_neighborhood_cases() {
        let g = Graph::complete(4);
        let v = g.vertex_set();
        assert_eq!(common_neighborhood(&g, &VertexSet::new(4), &v), v);
        let s = VertexSet::from_ids(4, [0, 1]);
        let a = VertexSet::from_ids(4, [2, 3]);
        assert_eq!(common_neighborhood(&g, &s, &a), a);
        let mut rng = Rng::new(4);
        let g = gnp(30, 0.5, &mut rng);
        let s = VertexSet::from_ids(30, [3, 17]);
        let a = VertexSet::full(30);
        let brute: Vec<usize> = (0..30).filter(|&v| g.has_edge(3, v) && g.has_edge(17, v)).collect();
        assert_eq!(common_neighborhood(&g, &s, &a).to_vec(), brute);
    }

    #[test]
    fn degeneracy_small_cases() {
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(degeneracy_order(&p4).1, 1);
        assert_eq!(degeneracy_order(&Graph::complete(5)).1, 4);
    }

    fn back_degrees_ok(h: &Graph, order: &[usize], degen: usize) -> bool {
        let mut pos = vec![0; h.n()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        (0..h.n()).all(|v| h.neighbors(v).iter().filter(|&w| pos[w] < pos[v]).count() <= degen)
    }

    fn min_degree_max_over_subgraphs(h: &Graph) -> usize {
        let n = h.n();
        let mut best = 0;
        for mask in 1u32..(1 << n) {
            let set = VertexSet::from_ids(n, (0..n).filter(|&v| mask >> v & 1 == 1));
            let md = set.iter().map(|v| h.degree_into(v, &set)).min().unwrap_or(0);
            best = best.max(md);
        }
        best
    }

    #[test]
    fn cliques_through_cases() {
        let tri = Graph::complete(3);
        assert_eq!(cliques_through(&tri, 1, 3), vec![vec![0, 1, 2]]);
        let star = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        assert!(cliques_through(&star, 0, 3).is_empty());
        assert_eq!(cliques_through(&star, 0, 1), vec![vec![0]]);
    }

    #[test]
    fn cliques_through_matches_brute_force() {
        let mut rng = Rng::new(11);
        let g = gnp(25, 0.5, &mut rng);
        for x in [0, 7, 24] {
            let mut brute = Vec::new();
            for a in 0..25 {
                for b in a + 1..25 {
                    for c in b + 1..25 {
                        for d in c + 1..25 {
                            let q = [a, b, c, d];
                            if !q.contains(&x) {
                                continue;
                            }
                            let ok = (0..4).all(|i| (i + 1..4).all(|j| g.has_edge(q[i], q[j])));
                            if ok {
                                brute.push(q.to_vec());
                            }
                        }
                    }
                }
            }
            assert_eq!(cliques_through(&g, x, 4), brute);
        }
    }

    #[test]
    fn ball_and_distances() {
        let path = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(path.ball(0, 2).to_vec(), vec![0, 1, 2]);
        assert_eq!(path.ball_of_set(&VertexSet::from_ids(5, [0, 4]), 1).to_vec(), vec![0, 1, 3, 4]);
        assert_eq!(path.distances_within(0, 10)[4], Some(4));
    }

    proptest! {
        #[test]
        fn degeneracy_is_exact_on_small_graphs(seed in any::<u64>(), n in 1usize..=10, p in 0.0f64..1.0) {
            let mut rng = Rng::new(seed);
            let h = gnp(n, p, &mut rng);
            let (order, degen) = degeneracy_order(&h);
            let mut sorted = order.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            prop_assert!(back_degrees_ok(&h, &order, degen));
            prop_assert_eq!(degen, min_degree_max_over_subgraphs(&h));
        }

        #[test]
        fn common_neighborhood_adds_one_vertex_at_a_time(seed in any::<u64>(), s in proptest::collection::vec(0usize..30, 0..4), extra in 0usize..30) {
            let mut rng = Rng::new(seed);
            let g = gnp(30, 0.4, &mut rng);
            let sset = VertexSet::from_ids(30, s.iter().copied());
            let mut bigger = sset.clone();
            bigger.insert(extra);
            let a = VertexSet::full(30);
            let lhs = common_neighborhood(&g, &bigger, &a);
            let rhs = common_neighborhood(&g, &sset, &a).intersection(g.neighbors(extra));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn adjacency_is_symmetric(seed in any::<u64>(), n in 0usize..40, p in 0.0f64..1.0) {
            let mut rng = Rng::new(seed);
            let g = gnp(n, p, &mut rng);
            for u in 0..n {
                prop_assert!(!g.has_edge(u, u));
                for v in g.neighbors(u).iter() {
                    prop_assert!(g.has_edge(v, u));
                }
            }
            prop_assert_eq!(g.edges().count(), g.edge_count());
        }
    }
}
