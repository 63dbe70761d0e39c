use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{Graph, VertexSet};
use crate::rng::Rng;

/// Binomial random graph: each of the `C(n, 2)` pairs is an edge with probability `p`.
pub fn gnp(n: usize, p: f64, rng: &mut Rng) -> Graph {
    let p = p.clamp(0.0, 1.0);
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Blow-up of `r`: part `i` gets `sizes[i]` consecutive ids, and each pair across an
/// edge `ij` of `r` is present with probability `p_inter`.
pub fn blowup(r: &Graph, sizes: &[usize], p_inter: f64, rng: &mut Rng) -> (Graph, Vec<VertexSet>) {
    assert_eq!(sizes.len(), r.n(), "one size per vertex of the reduced graph");
    let n: usize = sizes.iter().sum();
    let mut starts = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for &s in sizes {
        starts.push(acc);
        acc += s;
    }
    let parts: Vec<VertexSet> = (0..sizes.len()).map(|i| VertexSet::from_ids(n, starts[i]..starts[i] + sizes[i])).collect();
    let p = p_inter.clamp(0.0, 1.0);
    let mut g = Graph::empty(n);
    for (i, j) in r.edges() {
        for u in starts[i]..starts[i] + sizes[i] {
            for v in starts[j]..starts[j] + sizes[j] {
                if p >= 1.0 || rng.random_bool(p) {
                    g.add_edge(u, v);
                }
            }
        }
    }
    (g, parts)
}

/// `copies` vertex-disjoint copies of `motif`; copy `c` occupies ids `c·k .. c·k + k`.
pub fn factor(motif: &Graph, copies: usize) -> Graph {
    let k = motif.n();
    let mut g = Graph::empty(k * copies);
    for c in 0..copies {
        for (u, v) in motif.edges() {
            g.add_edge(c * k + u, c * k + v);
        }
    }
    g
}

/// A `K_k`-factor with `copies` cliques, together with the partition into
/// `k` classes where class `j` holds vertex `j` of every clique.
pub fn k_factor(k: usize, copies: usize) -> (Graph, Vec<VertexSet>) {
    let g = factor(&Graph::complete(k), copies);
    let n = g.n();
    let parts = (0..k).map(|j| VertexSet::from_ids(n, (0..copies).map(|c| c * k + j))).collect();
    (g, parts)
}

/// The `k`-th power of the cycle `C_n`: `u ~ v` iff their cyclic distance is in `1..=k`.
pub fn cycle_power(n: usize, k: usize) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for s in 1..=k {
            let v = (u + s) % n;
            if v != u {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Union of `delta` uniformly random (near-)perfect matchings; maximum degree at most `delta`.
pub fn random_bounded_degree(n: usize, delta: usize, rng: &mut Rng) -> Graph {
    let mut g = Graph::empty(n);
    let mut ids: Vec<usize> = (0..n).collect();
    for _ in 0..delta {
        ids.shuffle(rng);
        for pair in ids.chunks_exact(2) {
            if !g.has_edge(pair[0], pair[1]) {
                g.add_edge(pair[0], pair[1]);
            }
        }
    }
    g
}

/// Random `degen`-degenerate graph: vertex `i` joins up to `degen` uniformly chosen
/// earlier vertices whose degree is still below `max_degree`.
pub fn degenerate_random(n: usize, degen: usize, max_degree: usize, rng: &mut Rng) -> Graph {
    let mut g = Graph::empty(n);
    for v in 1..n {
        let mut open: Vec<usize> = (0..v).filter(|&u| g.degree(u) < max_degree).collect();
        open.shuffle(rng);
        let take = degen.min(max_degree).min(open.len());
        for &u in &open[..take] {
            g.add_edge(u, v);
        }
    }
    g
}

/// Uniform-ish `d`-regular graph by the pairing model with restarts; `None` if
/// `n·d` is odd, `d ≥ n`, or 1000 attempts all produce loops or multi-edges.
pub fn random_regular(n: usize, d: usize, rng: &mut Rng) -> Option<Graph> {
    if (n * d) % 2 == 1 || (d >= n && n > 0) {
        return None;
    }
    'attempt: for _ in 0..1000 {
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        points.shuffle(rng);
        let mut g = Graph::empty(n);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || g.has_edge(u, v) {
                continue 'attempt;
            }
            g.add_edge(u, v);
        }
        return Some(g);
    }
    None
}
