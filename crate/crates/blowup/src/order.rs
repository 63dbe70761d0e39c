//! Embedding orders: buffer-first orders for the greedy embeddings, and
//! validation of bounded orders.

use serde::{Deserialize, Serialize};

use crate::graph::{cliques_through, Graph, VertexSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("not a permutation of its domain: vertex {0} repeated or out of range")]
    NotPermutation(usize),
    #[error("buffer vertex {0} has degree Δ, is in no K_(Δ+1), yet its neighbourhood is a clique")]
    NoNonAdjacentPair(usize),
    #[error("precondition: {0}")]
    Precondition(String),
}

/// A linear order on a subset of `V(H)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OrderForm", into = "OrderForm")]
pub struct EmbedOrder {
    tau: Vec<usize>,
    pos: Vec<Option<usize>>,
}

#[derive(Serialize, Deserialize)]
struct OrderForm {
    n: usize,
    tau: Vec<usize>,
}

impl From<EmbedOrder> for OrderForm {
    fn from(o: EmbedOrder) -> Self {
        OrderForm { n: o.pos.len(), tau: o.tau }
    }
}

impl TryFrom<OrderForm> for EmbedOrder {
    type Error = OrderError;
    fn try_from(f: OrderForm) -> Result<Self, OrderError> {
        EmbedOrder::new(f.n, f.tau)
    }
}

impl EmbedOrder {
    /// `tau` lists distinct vertices of `0..n`.
    pub fn new(n: usize, tau: Vec<usize>) -> Result<Self, OrderError> {
        let mut pos = vec![None; n];
        for (i, &x) in tau.iter().enumerate() {
            match pos.get_mut(x) {
                Some(slot @ None) => *slot = Some(i),
                _ => return Err(OrderError::NotPermutation(x)),
            }
        }
        Ok(EmbedOrder { tau, pos })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.tau
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn position(&self, x: usize) -> Option<usize> {
        self.pos.get(x).copied().flatten()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.position(x).is_some()
    }

    pub fn domain(&self) -> VertexSet {
        VertexSet::from_ids(self.pos.len(), self.tau.iter().copied())
    }

    fn before(&self, y: usize, x: usize) -> bool {
        matches!((self.position(y), self.position(x)), (Some(a), Some(b)) if a < b)
    }
}

/// `|J_x|` plus the number of neighbours of `x` placed before it.
/// Neighbours outside the order's domain count as later.
pub fn pi_tau(h: &Graph, restricting: &[Vec<usize>], order: &EmbedOrder, x: usize) -> usize {
    restricting.get(x).map_or(0, Vec::len) + h.neighbors(x).iter().filter(|&y| order.before(y, x)).count()
}

fn in_clique(h: &Graph, x: usize, delta: usize) -> bool {
    h.degree(x) == delta && !cliques_through(h, x, delta + 1).is_empty()
}

/// Neighbourhood blocks of non-clique buffer vertices first, then those of
/// clique-buffer vertices, then the rest of `main`, each in id order. A
/// degree-`Δ` non-clique block ends with its lexicographically first
/// non-adjacent pair.
pub fn build_tau_buffer_first(h: &Graph, xbuf: &VertexSet, main: &VertexSet, delta: usize) -> Result<EmbedOrder, OrderError> {
    let mut covered = VertexSet::new(h.n());
    for x in xbuf.iter() {
        let nb = h.neighbors(x);
        if !nb.is_subset(main) {
            return Err(OrderError::Precondition(format!("N({x}) not inside the main set")));
        }
        if !nb.is_disjoint(&covered) {
            return Err(OrderError::Precondition(format!("N({x}) meets another buffer neighbourhood")));
        }
        covered.union_with(nb);
    }
    let (clique, plain): (Vec<usize>, Vec<usize>) = xbuf.iter().partition(|&x| in_clique(h, x, delta));
    let mut tau = Vec::with_capacity(main.len());
    for x in plain {
        let mut block = h.neighbors(x).to_vec();
        if h.degree(x) == delta && delta >= 2 {
            let pair = block
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| block[i + 1..].iter().map(move |&b| (a, b)))
                .find(|&(a, b)| !h.has_edge(a, b))
                .ok_or(OrderError::NoNonAdjacentPair(x))?;
            block.retain(|&y| y != pair.0 && y != pair.1);
            block.extend([pair.0, pair.1]);
        }
        tau.extend(block);
    }
    for x in clique {
        tau.extend(h.neighbors(x).iter());
    }
    tau.extend(main.difference(&covered).iter());
    EmbedOrder::new(h.n(), tau)
}

/// Checks the three buffer-first conditions: buffer neighbourhoods precede
/// everything else; each is a consecutive block, ending in a non-adjacent
/// pair for degree-`Δ` non-clique buffers; non-clique blocks come first.
pub fn validate_tau_buffer_first(h: &Graph, xbuf: &VertexSet, main: &VertexSet, delta: usize, order: &EmbedOrder) -> Result<(), String> {
    if order.domain() != *main {
        return Err("order domain differs from the main set".into());
    }
    let nbuf = h.ball_of_set(xbuf, 1).difference(xbuf);
    let last_nbuf = nbuf.iter().filter_map(|y| order.position(y)).max();
    let first_other = main.difference(&nbuf).iter().filter_map(|x| order.position(x)).min();
    if let (Some(a), Some(b)) = (last_nbuf, first_other) {
        if b < a {
            return Err(format!("{} precedes a buffer neighbour", order.as_slice()[b]));
        }
    }
    let mut last_plain = None;
    let mut first_clique = None;
    for x in xbuf.iter() {
        let mut ps: Vec<usize> = h.neighbors(x).iter().filter_map(|y| order.position(y)).collect();
        ps.sort_unstable();
        if ps.len() != h.degree(x) || ps.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(format!("N({x}) is not a consecutive block"));
        }
        let Some((&lo, &hi)) = ps.first().zip(ps.last()) else { continue };
        if in_clique(h, x, delta) {
            first_clique = Some(first_clique.map_or(lo, |f: usize| f.min(lo)));
        } else {
            last_plain = Some(last_plain.map_or(hi, |l: usize| l.max(hi)));
            if h.degree(x) == delta && delta >= 2 {
                let t = order.as_slice();
                if h.has_edge(t[hi - 1], t[hi]) {
                    return Err(format!("block of {x} ends in an edge"));
                }
            }
        }
    }
    if let (Some(p), Some(c)) = (last_plain, first_clique) {
        if c < p {
            return Err("a clique-buffer block precedes a non-clique block".into());
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderClause {
    Ord1,
    Ord2,
    Ord3,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderViolation {
    pub vertex: usize,
    pub clause: OrderClause,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderReport {
    pub violations: Vec<OrderViolation>,
}

impl OrderReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Inputs of a bounded-order check besides the order itself.
#[derive(Clone, Debug)]
pub struct BoundedOrderSpec<'a> {
    pub tilde: &'a VertexSet,
    pub restricted: &'a VertexSet,
    pub restricting: &'a [Vec<usize>],
    pub exceptional: &'a VertexSet,
    pub d: usize,
    pub p: f64,
    pub m: f64,
}

/// Checks the bounded-order conditions for every vertex in the order's domain
/// and reports every violated clause.
pub fn validate_bounded_order(h: &Graph, order: &EmbedOrder, spec: &BoundedOrderSpec<'_>) -> OrderReport {
    let d = spec.d as i64;
    let pi: Vec<usize> = (0..h.n()).map(|x| if order.contains(x) { pi_tau(h, spec.restricting, order, x) } else { 0 }).collect();
    let mut near_tilde = VertexSet::new(h.n());
    spec.tilde.iter().for_each(|x| near_tilde.union_with(h.neighbors(x)));
    let max_pi = order.as_slice().iter().filter(|&&z| !spec.exceptional.contains(z)).map(|&z| pi[z]).max().unwrap_or(0) as i64;
    let gap_ok = |x: usize, y: usize, k: f64| {
        let gap = (order.position(x).unwrap() - order.position(y).unwrap()) as f64;
        gap <= (spec.p.powf(k) * spec.m).floor()
    };
    let mut rep = OrderReport::default();
    let mut push = |vertex, clause, detail: String| rep.violations.push(OrderViolation { vertex, clause, detail });
    for &x in order.as_slice() {
        let later: Vec<usize> = h.neighbors(x).iter().filter(|&y| !order.before(y, x)).collect();
        let later_edge = later.iter().enumerate().any(|(i, &y)| later[i + 1..].iter().any(|&z| h.has_edge(y, z)));
        let dx = if later_edge { d - 2 } else if !later.is_empty() { d - 1 } else { d };
        let cap = if near_tilde.contains(x) { dx - 1 } else { dx };
        if pi[x] as i64 > cap {
            push(x, OrderClause::Ord1, format!("π = {} > {cap}", pi[x]));
        }
        if spec.tilde.contains(x) && h.degree(x) > spec.d {
            push(x, OrderClause::Ord1, format!("potential buffer of degree {} > D", h.degree(x)));
        }
        let earlier: Vec<usize> = h.neighbors(x).iter().filter(|&y| order.before(y, x)).collect();
        let ord2 = spec.exceptional.contains(x)
            || 2 * pi[x] <= spec.d
            || (!spec.restricted.contains(x) && earlier.iter().all(|&y| gap_ok(x, y, pi[x] as f64)));
        if !ord2 {
            push(x, OrderClause::Ord2, format!("π = {} with a distant earlier neighbour", pi[x]));
        }
        if near_tilde.contains(x) {
            let far = earlier.iter().filter(|&&y| !gap_ok(x, y, spec.d as f64)).count() as i64;
            let budget = d - 1 - max_pi;
            if far > budget {
                push(x, OrderClause::Ord3, format!("{far} distant earlier neighbours > {budget}"));
            }
        }
    }
    rep
}

/// Stable reorder with `xbuf` as the final segment.
pub fn move_buffer_last(order: &EmbedOrder, xbuf: &VertexSet) -> EmbedOrder {
    let (buf, rest): (Vec<usize>, Vec<usize>) = order.as_slice().iter().partition(|&&x| xbuf.contains(x));
    let mut tau = rest;
    tau.extend(buf);
    EmbedOrder::new(order.pos.len(), tau).expect("reordering preserves distinctness")
}
