//! Partition structures for the embedding: equitable independent
//! partitions, refined `H`- and `G`-partitions with buffers and splits,
//! reserved cliques, and validators for every condition they promise.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::graph::{cliques_through, common_neighborhood_of, Graph, VertexSet};
use crate::regularity::{
    inheritance_failures, verify_lower, EpsLattice, RegParams, RegularityError, SampleBudget, VerdictKind, Verifier,
};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PartitionError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("malformed input: {0}")]
    Shape(String),
    #[error("need at least {needed} parts for maximum degree {degree}, got {k}")]
    TooFewParts { k: usize, needed: usize, degree: usize },
    #[error("buffer selection in part {part} found {found} of {needed} vertices ({blocking})")]
    InfeasibleBuffer { part: usize, needed: usize, found: usize, blocking: String },
    #[error("clique reservation in part {part} found {found} of {needed} cliques")]
    InfeasibleReservation { part: usize, needed: usize, found: usize },
    #[error("G-partition rejected after {attempts} attempts; last failure {condition}: {witness}")]
    PartitionRejected { attempts: usize, condition: String, witness: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Regularity(#[from] RegularityError),
}

/// Instance parameters. Defaults are desk-scale values, not the constants the
/// asymptotic statements need.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub eps: f64,
    pub eps_prime: f64,
    pub d: f64,
    pub p: f64,
    pub mu: f64,
    pub rho: f64,
    pub alpha: f64,
    pub zeta: f64,
    pub kappa: f64,
    /// Maximum degree bound for `H`.
    pub delta: usize,
    /// Maximum degree bound for the super-regular reduced graph.
    pub delta_rp: usize,
    /// How many restricting sets a host vertex may belong to.
    pub delta_j: usize,
    /// Exponent on `p` in the restricted-vertex budget `ρp^θ`.
    pub theta: u32,
    /// Vertices of one part must be at least this far apart in `H`.
    pub conflict_distance: usize,
    /// Also assert the inequalities among parameters that the proofs assume.
    pub strict: bool,
    /// Added to every real threshold comparison in the embedding state.
    pub slack: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            eps: 0.1,
            eps_prime: 0.2,
            d: 0.3,
            p: 1.0,
            mu: 0.1,
            rho: 0.05,
            alpha: 0.2,
            zeta: 0.5,
            kappa: 2.0,
            delta: 2,
            delta_rp: 2,
            delta_j: 0,
            theta: 0,
            conflict_distance: 10,
            strict: false,
            slack: 0.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), PartitionError> {
        let bad = |msg: String| Err(PartitionError::Params(msg));
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad(format!("p = {} outside (0, 1]", self.p));
        }
        if !(0.0 < self.eps && self.eps < self.eps_prime && self.eps_prime < self.d && self.d <= 1.0) {
            return bad(format!("need 0 < eps < eps' < d <= 1, got {} {} {}", self.eps, self.eps_prime, self.d));
        }
        if !(self.mu > 0.0 && 3.0 * self.mu < 1.0) {
            return bad(format!("mu = {} outside (0, 1/3)", self.mu));
        }
        if self.rho <= 0.0 || self.alpha <= 0.0 || self.zeta <= 0.0 || self.kappa < 1.0 {
            return bad("rho, alpha, zeta must be positive and kappa >= 1".into());
        }
        if self.strict {
            let checks = [
                (self.eps < self.eps_prime * self.eps_prime, "eps < eps'^2"),
                (self.mu <= 1.0 / 6.0, "mu <= 1/6"),
                (self.rho < self.mu, "rho < mu"),
                (
                    self.eps_prime
                        <= self.mu * self.d.powi(self.delta as i32) * self.zeta
                            / (1000.0 * self.kappa * (self.delta * self.delta).max(1) as f64),
                    "eps' <= mu d^Delta zeta / (1000 kappa Delta^2)",
                ),
                (
                    (self.d - self.eps_prime).powi(10 * self.delta as i32) > 0.5 * self.d.powi(10 * self.delta as i32),
                    "(d - eps')^(10 Delta) > d^(10 Delta) / 2",
                ),
            ];
            if let Some((_, name)) = checks.iter().find(|(ok, _)| !ok) {
                return bad(format!("strict mode: {name} fails"));
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> EpsLattice {
        EpsLattice::new(self.eps, self.eps_prime, self.delta)
    }

    pub fn reg(&self) -> RegParams {
        RegParams::new(self.eps, self.d, self.p)
    }

    /// `ρp^θ`.
    pub fn rho_eff(&self) -> f64 {
        self.rho * self.p.powi(self.theta as i32)
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<(), PartitionError> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| PartitionError::Params(format!("expected key=value, got {item:?}")))?;
            let f = || v.parse::<f64>().map_err(|_| PartitionError::Params(format!("{k}: not a number: {v:?}")));
            let u = || v.parse::<usize>().map_err(|_| PartitionError::Params(format!("{k}: not a count: {v:?}")));
            match k {
                "eps" => self.eps = f()?,
                "eps_prime" => self.eps_prime = f()?,
                "d" => self.d = f()?,
                "p" => self.p = f()?,
                "mu" => self.mu = f()?,
                "rho" => self.rho = f()?,
                "alpha" => self.alpha = f()?,
                "zeta" => self.zeta = f()?,
                "kappa" => self.kappa = f()?,
                "delta" => self.delta = u()?,
                "delta_rp" => self.delta_rp = u()?,
                "delta_j" => self.delta_j = u()?,
                "theta" => self.theta = u()? as u32,
                "conflict_distance" => self.conflict_distance = u()?,
                "strict" => self.strict = v == "true" || v == "1",
                "slack" => self.slack = f()?,
                _ => return Err(PartitionError::Params(format!("unknown parameter {k:?}"))),
            }
        }
        Ok(())
    }
}

/// `⌊c·n⌋` with a small guard against values like `39.999999`.
pub fn floor_of(c: f64, n: usize) -> usize {
    (c * n as f64 + 1e-9).floor().max(0.0) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub id: String,
    pub status: CheckStatus,
    pub witness: Option<String>,
    pub note: Option<String>,
}

/// Named conditions with Pass/Fail and the first witness of each failure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub checks: Vec<ConditionCheck>,
}

impl PartitionReport {
    pub fn record(&mut self, id: &str, outcome: Result<(), String>) {
        let (status, witness) = match outcome {
            Ok(()) => (CheckStatus::Pass, None),
            Err(w) => (CheckStatus::Fail, Some(w)),
        };
        self.checks.push(ConditionCheck { id: id.into(), status, witness, note: None });
    }

    pub fn note(&mut self, id: &str, note: String) {
        if let Some(c) = self.checks.iter_mut().rev().find(|c| c.id == id) {
            c.note = Some(note);
        }
    }

    pub fn is_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.status == CheckStatus::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn extend(&mut self, other: PartitionReport) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for PartitionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{:<18} {:?}", c.id, c.status)?;
            if let Some(w) = &c.witness {
                write!(f, "  {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Equitable independent partitions

/// Checks: parts cover `domain` disjointly, are independent in `f`, sizes
/// differ by at most one, and so do the sizes of `part ∩ x`.
pub fn check_equitable_independent(f: &Graph, domain: &VertexSet, x: &VertexSet, parts: &[VertexSet]) -> Result<(), String> {
    let mut seen = VertexSet::new(domain.universe());
    for (i, part) in parts.iter().enumerate() {
        if !part.is_disjoint(&seen) {
            return Err(format!("part {i} overlaps an earlier part"));
        }
        seen.union_with(part);
        for v in part.iter() {
            if let Some(w) = f.neighbors(v).intersection(part).first() {
                return Err(format!("part {i} contains edge {v}-{w}"));
            }
        }
    }
    if seen != *domain {
        return Err("parts do not cover the domain".into());
    }
    let spread = |sizes: Vec<usize>| sizes.iter().max().unwrap_or(&0) - sizes.iter().min().unwrap_or(&0);
    if spread(parts.iter().map(VertexSet::len).collect()) > 1 {
        return Err("part sizes differ by more than one".into());
    }
    if spread(parts.iter().map(|p| p.count_and(x)).collect()) > 1 {
        return Err("distinguished-set counts differ by more than one".into());
    }
    Ok(())
}

/// Partition of `V(F)` into `8·max(Δ(F), 1)` independent parts, equitable
/// overall and on `X`.
pub fn equitable_independent_partition(f: &Graph, x: &VertexSet, rng: &mut Rng) -> Result<Vec<VertexSet>, PartitionError> {
    let k = 8 * f.max_degree().max(1);
    equitable_partition_of(f, &f.vertex_set(), x, k, rng)
}

/// As [`equitable_independent_partition`] over `domain` with `k ≥ 8·Δ(F[domain])` parts.
pub fn equitable_partition_of(
    f: &Graph,
    domain: &VertexSet,
    x: &VertexSet,
    k: usize,
    rng: &mut Rng,
) -> Result<Vec<VertexSet>, PartitionError> {
    let n = f.n();
    let degree = domain.iter().map(|v| f.neighbors(v).count_and(domain)).max().unwrap_or(0);
    if k == 0 || k < 8 * degree {
        return Err(PartitionError::TooFewParts { k, needed: (8 * degree).max(1), degree });
    }
    let in_x = domain.intersection(x);
    let out_x = domain.difference(x);
    let mut parts = vec![VertexSet::new(n); k];
    if degree == 0 {
        // Round-robin: X first, then the rest continuing from the next slot.
        let mut slot = 0;
        for set in [&in_x, &out_x] {
            let mut ids = set.to_vec();
            ids.shuffle(rng);
            for v in ids {
                parts[slot % k].insert(v);
                slot += 1;
            }
        }
    } else {
        for (set, movable) in [(&in_x, &in_x), (&out_x, &out_x)] {
            let mut ids = set.to_vec();
            ids.shuffle(rng);
            for v in ids {
                let target = (0..k)
                    .filter(|&i| f.neighbors(v).is_disjoint(&parts[i]))
                    .min_by_key(|&i| parts[i].len())
                    .ok_or_else(|| PartitionError::Internal(format!("no admissible part for {v}")))?;
                parts[target].insert(v);
            }
            rebalance(f, &mut parts, movable)?;
        }
    }
    check_equitable_independent(f, domain, x, &parts).map_err(PartitionError::Internal)?;
    Ok(parts)
}

/// Moves vertices of `movable` along chains of parts until all part sizes
/// differ by at most one. A chain `A → B₁ → … → small` moves one vertex out of
/// each part into the next; every moved vertex has no neighbour in its new part.
fn rebalance(f: &Graph, parts: &mut [VertexSet], movable: &VertexSet) -> Result<(), PartitionError> {
    let k = parts.len();
    for _ in 0..(f.n() + 1) * k {
        let sizes: Vec<usize> = parts.iter().map(VertexSet::len).collect();
        let (small, &min) = sizes.iter().enumerate().min_by_key(|&(i, s)| (*s, i)).expect("k > 0");
        let max = *sizes.iter().max().expect("k > 0");
        if max <= min + 1 {
            return Ok(());
        }
        // Backwards search from `small`: pred[a] = (next part, vertex moving a → next).
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; k];
        let mut seen = vec![false; k];
        seen[small] = true;
        let mut queue = std::collections::VecDeque::from([small]);
        let mut source = None;
        'bfs: while let Some(b) = queue.pop_front() {
            for a in 0..k {
                if seen[a] {
                    continue;
                }
                let mover = parts[a].intersection(movable).iter().find(|&u| f.neighbors(u).is_disjoint(&parts[b]));
                if let Some(u) = mover {
                    seen[a] = true;
                    pred[a] = Some((b, u));
                    if sizes[a] >= min + 2 {
                        source = Some(a);
                        break 'bfs;
                    }
                    queue.push_back(a);
                }
            }
        }
        let Some(mut a) = source else {
            return Err(PartitionError::Internal("no rebalancing chain exists".into()));
        };
        while let Some((b, u)) = pred[a] {
            parts[a].remove(u);
            parts[b].insert(u);
            a = b;
        }
    }
    Err(PartitionError::Internal("rebalancing did not converge".into()))
}

// ---------------------------------------------------------------------------
// Inputs and instances

/// The coarse inputs: host graphs, the graph to embed, coarse partitions and
/// reduced graphs, potential buffers, and image restrictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blueprint {
    pub gamma: Graph,
    pub g: Graph,
    pub h: Graph,
    pub r: Graph,
    pub rp: Graph,
    pub xparts: Vec<VertexSet>,
    pub vparts: Vec<VertexSet>,
    pub tilde: Vec<VertexSet>,
    /// `None` means the whole part.
    pub restrict: Vec<Option<VertexSet>>,
    pub restricting: Vec<Vec<usize>>,
}

impl Blueprint {
    /// Plain instance: `R = R′`, every vertex a potential buffer, no restrictions.
    pub fn unrestricted(gamma: Graph, g: Graph, h: Graph, r: Graph, xparts: Vec<VertexSet>, vparts: Vec<VertexSet>) -> Self {
        let nh = h.n();
        Blueprint {
            tilde: xparts.clone(),
            rp: r.clone(),
            restrict: vec![None; nh],
            restricting: vec![Vec::new(); nh],
            gamma,
            g,
            h,
            r,
            xparts,
            vparts,
        }
    }

    /// `H`-vertices that carry an image restriction.
    pub fn restricted(&self) -> VertexSet {
        let mut out = VertexSet::new(self.h.n());
        for x in 0..self.h.n() {
            if self.restrict[x].is_some() || !self.restricting[x].is_empty() {
                out.insert(x);
            }
        }
        out
    }

    fn check_shape(&self) -> Result<(), PartitionError> {
        let shape = |m: String| Err(PartitionError::Shape(m));
        let r = self.r.n();
        if self.rp.n() != r || self.xparts.len() != r || self.vparts.len() != r || self.tilde.len() != r {
            return shape("reduced graphs and partitions disagree on the number of parts".into());
        }
        if self.gamma.n() != self.g.n() {
            return shape("G and Γ must share a vertex id space".into());
        }
        if let Some((u, v)) = self.g.first_edge_not_in(&self.gamma) {
            return shape(format!("edge {u}-{v} of G is not in Γ"));
        }
        if let Some((u, v)) = self.rp.first_edge_not_in(&self.r) {
            return shape(format!("edge {u}-{v} of R′ is not in R"));
        }
        if self.restrict.len() != self.h.n() || self.restricting.len() != self.h.n() {
            return shape("restriction lists must have one entry per H-vertex".into());
        }
        let mut cover = VertexSet::new(self.h.n());
        for (i, xp) in self.xparts.iter().enumerate() {
            if xp.universe() != self.h.n() || !xp.is_disjoint(&cover) {
                return shape(format!("H-part {i} overlaps another or has the wrong universe"));
            }
            cover.union_with(xp);
            if xp.len() != self.vparts[i].len() {
                return shape(format!("part {i}: |X| = {} but |V| = {}", xp.len(), self.vparts[i].len()));
            }
            if !self.tilde[i].is_subset(xp) {
                return shape(format!("potential buffer {i} is not inside its part"));
            }
        }
        if cover.len() != self.h.n() {
            return shape("H-parts do not cover V(H)".into());
        }
        let mut vcover = VertexSet::new(self.gamma.n());
        for (i, vp) in self.vparts.iter().enumerate() {
            if vp.universe() != self.gamma.n() || !vp.is_disjoint(&vcover) {
                return shape(format!("G-part {i} overlaps another or has the wrong universe"));
            }
            vcover.union_with(vp);
        }
        for (x, js) in self.restricting.iter().enumerate() {
            if let Some(&j) = js.iter().find(|&&j| j >= self.gamma.n() || vcover.contains(j)) {
                return shape(format!("restricting vertex {j} of {x} is not in V(Γ) ∖ V(G)"));
            }
        }
        Ok(())
    }
}

/// Which buffer class a part uses: degree `b`, and whether its vertices lie in
/// copies of `K_{Δ+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BufferKind {
    pub degree: usize,
    pub clique: bool,
}

/// Output of [`build_good_h_partition`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPartition {
    pub xparts: Vec<VertexSet>,
    pub tilde: Vec<VertexSet>,
    pub xbuf: Vec<VertexSet>,
    pub kinds: Vec<BufferKind>,
    pub r: Graph,
    pub rp: Graph,
    /// Coarse part each refined part came from.
    pub parent: Vec<usize>,
    pub report: PartitionReport,
}

/// The four slots each host part is split into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Main,
    Queue,
    Clique,
    Buffer,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::Main, Slot::Queue, Slot::Clique, Slot::Buffer];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Splits {
    pub main: VertexSet,
    pub queue: VertexSet,
    pub clique: VertexSet,
    pub buffer: VertexSet,
}

impl Splits {
    pub fn get(&self, s: Slot) -> &VertexSet {
        match s {
            Slot::Main => &self.main,
            Slot::Queue => &self.queue,
            Slot::Clique => &self.clique,
            Slot::Buffer => &self.buffer,
        }
    }
}

/// A fully prepared embedding problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupInstance {
    pub gamma: Graph,
    pub g: Graph,
    pub h: Graph,
    pub r: Graph,
    pub rp: Graph,
    pub xparts: Vec<VertexSet>,
    pub vparts: Vec<VertexSet>,
    pub tilde: Vec<VertexSet>,
    pub xbuf: Vec<VertexSet>,
    pub kinds: Vec<BufferKind>,
    pub splits: Vec<Splits>,
    /// Reserved copies of `K_{Δ+1}` per part, each a sorted vertex list.
    pub cliques: Vec<Vec<Vec<usize>>>,
    /// Vertices of reserved cliques, per part.
    pub xc: Vec<VertexSet>,
    pub restrict: Vec<VertexSet>,
    pub restricting: Vec<Vec<usize>>,
    pub params: Params,
    part_h: Vec<usize>,
    part_g: Vec<usize>,
}

impl BlowupInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        gamma: Graph,
        g: Graph,
        h: Graph,
        hp: HPartition,
        vparts: Vec<VertexSet>,
        splits: Vec<Splits>,
        restrict: Vec<VertexSet>,
        restricting: Vec<Vec<usize>>,
        params: Params,
    ) -> Self {
        let r = hp.xparts.len();
        let mut inst = BlowupInstance {
            part_h: Vec::new(),
            part_g: Vec::new(),
            gamma,
            g,
            h,
            r: hp.r,
            rp: hp.rp,
            xparts: hp.xparts,
            vparts,
            tilde: hp.tilde,
            xbuf: hp.xbuf,
            kinds: hp.kinds,
            splits,
            cliques: vec![Vec::new(); r],
            xc: Vec::new(),
            restrict,
            restricting,
            params,
        };
        inst.xc = vec![VertexSet::new(inst.h.n()); r];
        inst.reindex();
        inst
    }

    /// Rebuilds the vertex → part lookups.
    pub fn reindex(&mut self) {
        self.part_h = vec![usize::MAX; self.h.n()];
        for (i, xp) in self.xparts.iter().enumerate() {
            xp.iter().for_each(|x| self.part_h[x] = i);
        }
        self.part_g = vec![usize::MAX; self.gamma.n()];
        for (i, vp) in self.vparts.iter().enumerate() {
            vp.iter().for_each(|v| self.part_g[v] = i);
        }
    }

    pub fn parts(&self) -> usize {
        self.xparts.len()
    }

    pub fn part_of(&self, x: usize) -> usize {
        self.part_h[x]
    }

    /// Part of a host vertex, if it lies in `V(G)`.
    pub fn host_part_of(&self, v: usize) -> Option<usize> {
        self.part_g.get(v).copied().filter(|&i| i != usize::MAX)
    }

    pub fn slot_of(&self, v: usize) -> Option<Slot> {
        let i = self.host_part_of(v)?;
        Slot::ALL.into_iter().find(|&s| self.splits[i].get(s).contains(v))
    }

    pub fn all_buffers(&self) -> VertexSet {
        let mut out = VertexSet::new(self.h.n());
        self.xbuf.iter().for_each(|b| out.union_with(b));
        out
    }

    pub fn all_reserved(&self) -> VertexSet {
        let mut out = VertexSet::new(self.h.n());
        self.xc.iter().for_each(|b| out.union_with(b));
        out
    }

    /// `x` with `I_x ≠ V_i`.
    pub fn is_restricted(&self, x: usize) -> bool {
        self.restrict[x] != self.vparts[self.part_of(x)]
    }

    /// `|V^slot_i| / |V_i|`: the realized split fraction used in place of `1 − 3μ` and `μ`.
    pub fn fraction(&self, i: usize, s: Slot) -> f64 {
        let total = self.vparts[i].len();
        if total == 0 {
            0.0
        } else {
            self.splits[i].get(s).len() as f64 / total as f64
        }
    }
}

// ---------------------------------------------------------------------------
// H-partition

/// Conflict graph on one part: vertices closer than `distance` in `H`, or
/// sharing a restricting vertex, are adjacent.
pub fn conflict_graph(h: &Graph, part: &VertexSet, restricting: &[Vec<usize>], distance: usize) -> Graph {
    let mut f = Graph::empty(h.n());
    for x in part.iter() {
        let near = h.ball(x, distance.saturating_sub(1)).intersection(part);
        for y in near.iter().filter(|&y| y > x) {
            f.add_edge(x, y);
        }
    }
    let mut owners: HashMap<usize, Vec<usize>> = HashMap::new();
    for x in part.iter() {
        for &j in &restricting[x] {
            owners.entry(j).or_default().push(x);
        }
    }
    for xs in owners.values() {
        for (a, &x) in xs.iter().enumerate() {
            for &y in &xs[a + 1..] {
                f.add_edge(x, y);
            }
        }
    }
    f
}

/// Degree class of `x`: `(deg, in a K_{Δ+1})`.
pub fn buffer_kind_of(h: &Graph, x: usize, delta: usize) -> BufferKind {
    let degree = h.degree(x);
    let clique = degree == delta && !cliques_through(h, x, delta + 1).is_empty();
    BufferKind { degree, clique }
}

fn kind_rank(k: BufferKind, delta: usize) -> usize {
    if k.clique {
        delta + 1
    } else {
        k.degree
    }
}

/// Refines the coarse partition, blows up the reduced graphs, and greedily
/// selects buffer vertices.
pub fn build_good_h_partition(bp: &Blueprint, params: &Params, rng: &mut Rng) -> Result<HPartition, PartitionError> {
    params.validate()?;
    bp.check_shape()?;
    let h = &bp.h;
    let nh = h.n();
    let r_bl = bp.xparts.len();
    let conflicts: Vec<Graph> =
        bp.xparts.iter().map(|xp| conflict_graph(h, xp, &bp.restricting, params.conflict_distance)).collect();
    let max_deg = conflicts
        .iter()
        .zip(&bp.xparts)
        .map(|(f, xp)| xp.iter().map(|v| f.degree(v)).max().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let k = if max_deg == 0 { 1 } else { 8 * max_deg };

    let mut xparts = Vec::with_capacity(r_bl * k);
    let mut tilde = Vec::with_capacity(r_bl * k);
    let mut parent = Vec::with_capacity(r_bl * k);
    for (i, xp) in bp.xparts.iter().enumerate() {
        let pieces = if k == 1 {
            vec![xp.clone()]
        } else {
            equitable_partition_of(&conflicts[i], xp, &bp.tilde[i], k, rng)?
        };
        for piece in pieces {
            tilde.push(bp.tilde[i].intersection(&piece));
            xparts.push(piece);
            parent.push(i);
        }
    }
    let blow = |base: &Graph| {
        let mut g = Graph::empty(parent.len());
        for a in 0..parent.len() {
            for b in a + 1..parent.len() {
                if base.has_edge(parent[a], parent[b]) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    };
    let r = blow(&bp.r);
    let rp = blow(&bp.rp);

    let restricted = bp.restricted();
    let near_restricted = h.ball_of_set(&restricted, 2);
    let mut blocked = VertexSet::new(nh);
    let mut xbuf = Vec::with_capacity(xparts.len());
    let mut kinds = Vec::with_capacity(xparts.len());
    for (i, xp) in xparts.iter().enumerate() {
        let needed = floor_of(4.0 * params.mu, xp.len());
        let allowed = tilde[i].difference(&near_restricted);
        let mut by_kind: HashMap<BufferKind, Vec<usize>> = HashMap::new();
        for x in allowed.iter() {
            by_kind.entry(buffer_kind_of(h, x, params.delta)).or_default().push(x);
        }
        let kind = by_kind
            .iter()
            .max_by_key(|(k, v)| (v.len(), std::cmp::Reverse(kind_rank(**k, params.delta))))
            .map(|(k, _)| *k)
            .unwrap_or(BufferKind { degree: 0, clique: false });
        let mut pool = by_kind.remove(&kind).unwrap_or_default();
        pool.shuffle(rng);
        let mut chosen = VertexSet::new(nh);
        for x in pool {
            if chosen.len() == needed {
                break;
            }
            if !blocked.contains(x) {
                chosen.insert(x);
                blocked.union_with(&h.ball(x, 4));
            }
        }
        if chosen.len() < needed {
            return Err(PartitionError::InfeasibleBuffer {
                part: i,
                needed,
                found: chosen.len(),
                blocking: format!(
                    "class degree {} clique {}: pairwise distance 5 among buffers and distance 3 from restricted vertices",
                    kind.degree, kind.clique
                ),
            });
        }
        xbuf.push(chosen);
        kinds.push(kind);
    }
    let mut hp = HPartition { xparts, tilde, xbuf, kinds, r, rp, parent, report: PartitionReport::default() };
    hp.report = validate_h_partition(h, &hp, &restricted, &bp.restricting, params);
    Ok(hp)
}

/// Each part independent in `H`; every cross edge on an `R`-edge.
pub fn validate_r_partition(h: &Graph, xparts: &[VertexSet], r: &Graph) -> PartitionReport {
    let mut rep = PartitionReport::default();
    rep.record("H1:R-partition", r_partition_violation(h, xparts, r));
    rep
}

fn part_index(n: usize, xparts: &[VertexSet]) -> Vec<usize> {
    let mut idx = vec![usize::MAX; n];
    for (i, xp) in xparts.iter().enumerate() {
        xp.iter().for_each(|x| idx[x] = i);
    }
    idx
}

fn r_partition_violation(h: &Graph, xparts: &[VertexSet], r: &Graph) -> Result<(), String> {
    let idx = part_index(h.n(), xparts);
    for (u, v) in h.edges() {
        let (i, j) = (idx[u], idx[v]);
        if i == usize::MAX || j == usize::MAX {
            return Err(format!("edge {u}-{v} leaves the partition"));
        }
        if i == j {
            return Err(format!("edge {u}-{v} inside part {i}"));
        }
        if !r.has_edge(i, j) {
            return Err(format!("edge {u}-{v} between parts {i},{j} with no reduced edge"));
        }
    }
    Ok(())
}

/// `|X̃_i| ≥ α|X_i|`, and first and second neighbourhoods of potential buffer
/// vertices go along `R′`.
pub fn validate_buffer(h: &Graph, xparts: &[VertexSet], tilde: &[VertexSet], rp: &Graph, alpha: f64) -> PartitionReport {
    let mut rep = PartitionReport::default();
    rep.record("H1:buffer", buffer_violation(h, xparts, tilde, rp, alpha));
    rep
}

fn buffer_violation(h: &Graph, xparts: &[VertexSet], tilde: &[VertexSet], rp: &Graph, alpha: f64) -> Result<(), String> {
    let idx = part_index(h.n(), xparts);
    for (i, t) in tilde.iter().enumerate() {
        if (t.len() as f64) < alpha * xparts[i].len() as f64 - 1e-9 {
            return Err(format!("part {i}: |X̃| = {} < α|X| = {:.2}", t.len(), alpha * xparts[i].len() as f64));
        }
        for x in t.iter() {
            for y in h.neighbors(x).iter() {
                if !rp.has_edge(idx[x], idx[y]) {
                    return Err(format!("path {x}-{y}: parts {},{} not on R′", idx[x], idx[y]));
                }
                for z in h.neighbors(y).iter().filter(|&z| z != x) {
                    if !rp.has_edge(idx[y], idx[z]) {
                        return Err(format!("path {x}-{y}-{z}: parts {},{} not on R′", idx[y], idx[z]));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Every condition of a good `H`-partition.
pub fn validate_h_partition(
    h: &Graph,
    hp: &HPartition,
    restricted: &VertexSet,
    restricting: &[Vec<usize>],
    params: &Params,
) -> PartitionReport {
    let mut rep = validate_r_partition(h, &hp.xparts, &hp.r);
    rep.extend(validate_buffer(h, &hp.xparts, &hp.tilde, &hp.rp, params.alpha));
    let dist = params.conflict_distance;
    rep.record(
        "PtH:dist",
        (|| {
            for (i, xp) in hp.xparts.iter().enumerate() {
                for x in xp.iter() {
                    if let Some(y) = h.ball(x, dist.saturating_sub(1)).intersection(xp).iter().find(|&y| y != x) {
                        return Err(format!("part {i}: {x} and {y} closer than {dist}"));
                    }
                    for y in xp.iter().filter(|&y| y > x) {
                        if restricting[x].iter().any(|j| restricting[y].contains(j)) {
                            return Err(format!("part {i}: {x} and {y} share a restricting vertex"));
                        }
                    }
                }
            }
            Ok(())
        })(),
    );
    let all_buf = {
        let mut s = VertexSet::new(h.n());
        hp.xbuf.iter().for_each(|b| s.union_with(b));
        s
    };
    let mut buf_nbrs = VertexSet::new(h.n());
    all_buf.iter().for_each(|x| buf_nbrs.union_with(h.neighbors(x)));
    rep.record(
        "BUF1",
        (|| {
            for (i, xp) in hp.xparts.iter().enumerate() {
                let want = floor_of(4.0 * params.mu, xp.len());
                if hp.xbuf[i].len() != want {
                    return Err(format!("part {i}: {} buffer vertices, expected {want}", hp.xbuf[i].len()));
                }
                if !hp.xbuf[i].is_subset(&hp.tilde[i]) {
                    return Err(format!("part {i}: buffer vertex outside X̃"));
                }
                let cap = 4.0 * params.kappa * params.delta_rp as f64 * params.mu * xp.len() as f64;
                let count = buf_nbrs.count_and(xp);
                if count as f64 > cap + 1e-9 {
                    return Err(format!("part {i}: {count} buffer neighbours > {cap:.2}"));
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "BUF2",
        (|| {
            for x in all_buf.iter() {
                if let Some(y) = h.ball(x, 4).intersection(&all_buf).iter().find(|&y| y != x) {
                    return Err(format!("buffer vertices {x} and {y} closer than 5"));
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "BUF3",
        (|| {
            for x in all_buf.iter() {
                if let Some(y) = h.ball(x, 2).intersection(restricted).first() {
                    return Err(format!("buffer vertex {x} within distance 2 of restricted {y}"));
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "BUF4",
        (|| {
            for (i, b) in hp.xbuf.iter().enumerate() {
                if let Some(x) = b.iter().find(|&x| h.degree(x) != hp.kinds[i].degree) {
                    return Err(format!("part {i}: buffer vertex {x} has degree {} not {}", h.degree(x), hp.kinds[i].degree));
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "BUF5",
        (|| {
            for (i, b) in hp.xbuf.iter().enumerate() {
                if let Some(x) = b.iter().find(|&x| buffer_kind_of(h, x, params.delta).clique != hp.kinds[i].clique) {
                    return Err(format!("part {i}: buffer vertex {x} breaks the clique classification"));
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "BUF6",
        (|| {
            let blocked = restricted.union(&all_buf);
            for (i, b) in hp.xbuf.iter().enumerate() {
                if !hp.kinds[i].clique || b.is_empty() {
                    continue;
                }
                let good = hp.tilde[i]
                    .iter()
                    .filter(|&x| cliques_through(h, x, params.delta + 1).iter().any(|c| c.iter().all(|&y| !blocked.contains(y))))
                    .count();
                let need = params.alpha * hp.xparts[i].len() as f64 / (2 * params.delta + 4) as f64;
                if (good as f64) < need - 1e-9 {
                    return Err(format!("part {i}: {good} free clique vertices in X̃ < {need:.2}"));
                }
            }
            Ok(())
        })(),
    );
    rep
}

// ---------------------------------------------------------------------------
// G-partition

/// How the `G`-partition validator checks regularity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GCheck {
    pub verifier: Verifier,
    pub retries: usize,
}

impl GCheck {
    pub fn desk(eps: f64) -> Self {
        GCheck { verifier: Verifier::Auto(SampleBudget { eps_gap: eps / 2.0, budget: 64 }), retries: 20 }
    }
}

/// Random refinement and split of the host parts, retried until every
/// `G`-partition condition holds.
pub fn build_good_g_partition(
    bp: &Blueprint,
    hp: HPartition,
    params: &Params,
    check: &GCheck,
    rng: &mut Rng,
) -> Result<(BlowupInstance, PartitionReport), PartitionError> {
    let mut last = None;
    for attempt in 0..check.retries.max(1) {
        let mut vparts = vec![VertexSet::new(bp.gamma.n()); hp.xparts.len()];
        for (i, vp) in bp.vparts.iter().enumerate() {
            let mut ids = vp.to_vec();
            ids.shuffle(rng);
            let mut rest = &ids[..];
            for (a, &par) in hp.parent.iter().enumerate() {
                if par == i {
                    let take = hp.xparts[a].len();
                    vparts[a] = VertexSet::from_ids(bp.gamma.n(), rest[..take].iter().copied());
                    rest = &rest[take..];
                }
            }
        }
        let splits: Vec<Splits> = vparts.iter().map(|vp| random_split(vp, params.mu, rng)).collect();
        let restrict: Vec<VertexSet> = (0..bp.h.n())
            .map(|x| {
                let vp = &vparts[hp.xparts.iter().position(|xp| xp.contains(x)).expect("covered")];
                match &bp.restrict[x] {
                    Some(set) => set.intersection(vp),
                    None => vp.clone(),
                }
            })
            .collect();
        let inst = BlowupInstance::assemble(
            bp.gamma.clone(),
            bp.g.clone(),
            bp.h.clone(),
            hp.clone(),
            vparts,
            splits,
            restrict,
            bp.restricting.clone(),
            *params,
        );
        let mut vrng = rng.derive_indexed("g-partition-check", attempt as u64);
        let report = validate_g_partition(&inst, &check.verifier, &mut vrng)?;
        if report.is_pass() {
            return Ok((inst, report));
        }
        last = report.first_failure().cloned();
    }
    let fail = last.expect("at least one attempt");
    Err(PartitionError::PartitionRejected {
        attempts: check.retries.max(1),
        condition: fail.id,
        witness: fail.witness.unwrap_or_default(),
    })
}

/// `|V^q| = |V^c| = |V^buf| = ⌊μ|V|⌋`, the rest to `V^main`.
pub fn split_sizes(len: usize, mu: f64) -> [usize; 4] {
    let s = floor_of(mu, len);
    [len - 3 * s, s, s, s]
}

fn random_split(vp: &VertexSet, mu: f64, rng: &mut Rng) -> Splits {
    let n = vp.universe();
    let mut ids = vp.to_vec();
    ids.shuffle(rng);
    let [m, q, c, _] = split_sizes(ids.len(), mu);
    let take = |a: usize, b: usize| VertexSet::from_ids(n, ids[a..b].iter().copied());
    Splits { main: take(0, m), queue: take(m, m + q), clique: take(m + q, m + q + c), buffer: take(m + q + c, ids.len()) }
}

fn window(value: usize, lo: f64, hi: f64) -> bool {
    let v = value as f64;
    v >= lo - 1e-9 && v <= hi + 1e-9
}

/// Every condition of a good `G`-partition.
pub fn validate_g_partition(inst: &BlowupInstance, verifier: &Verifier, rng: &mut Rng) -> Result<PartitionReport, PartitionError> {
    let prm = &inst.params;
    let mut rep = PartitionReport::default();
    let r = inst.parts();
    rep.record(
        "G1",
        (|| {
            for i in 0..r {
                let s = &inst.splits[i];
                let want = split_sizes(inst.vparts[i].len(), prm.mu);
                let got = [s.main.len(), s.queue.len(), s.clique.len(), s.buffer.len()];
                if got != want {
                    return Err(format!("part {i}: split sizes {got:?}, expected {want:?}"));
                }
                let mut u = s.main.union(&s.queue);
                u.union_with(&s.clique);
                u.union_with(&s.buffer);
                if u != inst.vparts[i] || u.len() != got.iter().sum::<usize>() {
                    return Err(format!("part {i}: splits do not partition V_i"));
                }
            }
            Ok(())
        })(),
    );
    let (g2, note) = g2_violation(inst, verifier, rng)?;
    rep.record("G2", g2);
    if let Some(n) = note {
        rep.note("G2", n);
    }
    rep.record(
        "G3",
        (|| {
            for (i, j) in inst.rp.edges().flat_map(|(a, b)| [(a, b), (b, a)]) {
                for v in inst.vparts[i].iter() {
                    let gamma_deg = inst.gamma.degree_into(v, &inst.vparts[j]) as f64;
                    let base = (prm.d - prm.eps) * (prm.p * inst.vparts[j].len() as f64).max(gamma_deg / 2.0);
                    for s in [Slot::Main, Slot::Queue, Slot::Clique] {
                        let need = inst.fraction(j, s) * base;
                        let have = inst.g.degree_into(v, inst.splits[j].get(s));
                        if (have as f64) < need - 1e-9 {
                            return Err(format!("v={v} into {s:?} of part {j}: degree {have} < {need:.2}"));
                        }
                    }
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "G4",
        (|| {
            for x in 0..inst.h.n() {
                let i = inst.part_of(x);
                let ix = &inst.restrict[x];
                let common = common_neighborhood_of(&inst.gamma, &inst.restricting[x], &inst.vparts[i]);
                let pj = prm.p.powi(inst.restricting[x].len() as i32);
                for s in Slot::ALL {
                    let split = inst.splits[i].get(s);
                    let need = (1.0 - prm.eps) * inst.fraction(i, s) * ix.len() as f64;
                    if (ix.count_and(split) as f64) < need - 1e-9 {
                        return Err(format!("x={x}: |I ∩ {s:?}| = {} < {need:.2}", ix.count_and(split)));
                    }
                    let target = pj * split.len() as f64;
                    let got = common.count_and(split);
                    if !window(got, (1.0 - prm.eps) * target, (1.0 + prm.eps) * target) {
                        return Err(format!("x={x}: |N*(J) ∩ {s:?}| = {got} outside (1±ε)·{target:.2}"));
                    }
                }
            }
            Ok(())
        })(),
    );
    let restr = validate_restriction_pair(inst, prm.rho_eff(), prm.zeta, prm.delta, prm.delta_j, verifier, rng)?;
    rep.record("G5", restr.first_failure().map_or(Ok(()), |c| Err(format!("{}: {}", c.id, c.witness.clone().unwrap_or_default()))));
    rep.record(
        "G6",
        (|| {
            for (i, xp) in inst.xparts.iter().enumerate() {
                let count = xp.iter().filter(|&x| inst.is_restricted(x)).count();
                let cap = prm.rho_eff() * xp.len() as f64;
                if count as f64 > cap + 1e-9 {
                    return Err(format!("part {i}: {count} restricted vertices > {cap:.2}"));
                }
            }
            Ok(())
        })(),
    );
    Ok(rep)
}

/// Regular `R`-partition, one-sided inheritance on `R′`, two-sided inheritance
/// for triangles through potential buffers. Inconclusive sampled probes are
/// counted and reported in the note, not as failures.
fn g2_violation(inst: &BlowupInstance, verifier: &Verifier, rng: &mut Rng) -> Result<(Result<(), String>, Option<String>), PartitionError> {
    let prm = inst.params.reg();
    let mut inconclusive = 0usize;
    for (i, j) in inst.r.edges() {
        let v = verify_lower(&inst.g, &inst.vparts[i], &inst.vparts[j], &prm, verifier, rng)?;
        match v.kind {
            VerdictKind::Witness => return Ok((Err(format!("pair ({i},{j}) not regular: {:?}", v.witness)), None)),
            VerdictKind::Inconclusive => inconclusive += 1,
            VerdictKind::Certified => {}
        }
    }
    let r = inst.parts();
    let mut triples = Vec::new();
    for j in 0..r {
        for i in inst.rp.neighbors(j).iter() {
            for k in inst.rp.neighbors(j).iter() {
                triples.push((i, j, k, false));
            }
        }
    }
    let mut two = std::collections::BTreeSet::new();
    for (i, t) in inst.tilde.iter().enumerate() {
        for x in t.iter() {
            for y in inst.h.neighbors(x).iter() {
                for z in inst.h.neighbors(x).intersection(inst.h.neighbors(y)).iter() {
                    two.insert((i, inst.part_of(y), inst.part_of(z)));
                }
            }
        }
    }
    triples.extend(two.into_iter().map(|(i, j, k)| (i, j, k, true)));
    for (i, j, k, two_sided) in triples {
        let rep = inheritance_failures(
            &inst.gamma,
            &inst.g,
            &inst.vparts[j],
            &inst.vparts[k],
            &inst.vparts[i],
            &prm,
            two_sided,
            verifier,
            &rng.derive_indexed("g2", (i * r + j) as u64 * r as u64 + k as u64),
        )?;
        inconclusive += rep.inconclusive.len();
        if let Some(&u) = rep.failures.first() {
            let kind = if two_sided { "two-sided" } else { "one-sided" };
            return Ok((Err(format!("{kind} inheritance ({i},{j},{k}) fails at u={u}")), None));
        }
    }
    Ok((Ok(()), (inconclusive > 0).then(|| format!("{inconclusive} inconclusive probes"))))
}

/// Conditions (a)–(f) of a restriction pair.
pub fn validate_restriction_pair(
    inst: &BlowupInstance,
    rho_eff: f64,
    zeta: f64,
    delta: usize,
    delta_j: usize,
    verifier: &Verifier,
    rng: &mut Rng,
) -> Result<PartitionReport, PartitionError> {
    let prm = &inst.params;
    let mut rep = PartitionReport::default();
    let nh = inst.h.n();
    let commons: Vec<VertexSet> = (0..nh)
        .map(|x| common_neighborhood_of(&inst.gamma, &inst.restricting[x], &inst.vparts[inst.part_of(x)]))
        .collect();
    rep.record(
        "restriction(a)",
        (|| {
            for (i, xp) in inst.xparts.iter().enumerate() {
                let count = xp.iter().filter(|&x| inst.is_restricted(x)).count();
                if count as f64 > rho_eff * xp.len() as f64 + 1e-9 {
                    return Err(format!("part {i}: {count} restricted vertices"));
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "restriction(b)",
        (|| {
            for x in (0..nh).filter(|&x| inst.is_restricted(x)) {
                let i = inst.part_of(x);
                if !inst.restrict[x].is_subset(&commons[x]) {
                    return Err(format!("x={x}: I_x not inside N*(J_x; V_i)"));
                }
                let need = zeta * (prm.d * prm.p).powi(inst.restricting[x].len() as i32) * inst.vparts[i].len() as f64;
                if (inst.restrict[x].len() as f64) < need - 1e-9 {
                    return Err(format!("x={x}: |I_x| = {} < {need:.2}", inst.restrict[x].len()));
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "restriction(c)",
        (|| {
            for x in 0..nh {
                if inst.is_restricted(x) {
                    if inst.restricting[x].len() + inst.h.degree(x) > delta {
                        return Err(format!("x={x}: |J_x| + deg(x) > {delta}"));
                    }
                } else if !inst.restricting[x].is_empty() {
                    return Err(format!("x={x}: unrestricted but J_x nonempty"));
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "restriction(d)",
        (|| {
            let mut count: HashMap<usize, usize> = HashMap::new();
            for js in &inst.restricting {
                for &j in js {
                    *count.entry(j).or_default() += 1;
                }
            }
            match count.into_iter().filter(|&(_, c)| c > delta_j).min() {
                Some((j, c)) => Err(format!("host vertex {j} restricts {c} vertices")),
                None => Ok(()),
            }
        })(),
    );
    rep.record(
        "restriction(e)",
        (|| {
            for x in 0..nh {
                let i = inst.part_of(x);
                let k = inst.restricting[x].len() as i32;
                let v = inst.vparts[i].len() as f64;
                let (lo, hi) = ((prm.p - prm.eps * prm.p).powi(k) * v, (prm.p + prm.eps * prm.p).powi(k) * v);
                if !window(commons[x].len(), lo, hi) {
                    return Err(format!("x={x}: |N*(J_x; V_i)| = {} outside [{lo:.2}, {hi:.2}]", commons[x].len()));
                }
            }
            Ok(())
        })(),
    );
    let mut f_result = Ok(());
    'outer: for x in (0..nh).filter(|&x| inst.is_restricted(x)) {
        for y in inst.h.neighbors(x).iter() {
            let v = verify_lower(&inst.g, &commons[x], &commons[y], &prm.reg(), verifier, rng)?;
            if v.kind == VerdictKind::Witness {
                f_result = Err(format!("edge {x}-{y}: restricted pair not regular"));
                break 'outer;
            }
        }
    }
    rep.record("restriction(f)", f_result);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Reserved cliques

/// For each clique-buffer part, `⌊2ρ|X_i|⌋` vertex-disjoint copies of
/// `K_{Δ+1}`, each through a potential buffer vertex of the part and avoiding
/// restricted vertices, buffer vertices and their neighbours, and earlier
/// reservations.
pub fn select_reserved_cliques(inst: &mut BlowupInstance) -> Result<PartitionReport, PartitionError> {
    let prm = inst.params;
    let h = &inst.h;
    let mut used = h.ball_of_set(&inst.all_buffers(), 1);
    for x in (0..h.n()).filter(|&x| inst.is_restricted(x)) {
        used.insert(x);
    }
    let mut cliques = vec![Vec::new(); inst.parts()];
    let mut xc = vec![VertexSet::new(h.n()); inst.parts()];
    for i in 0..inst.parts() {
        if !inst.kinds[i].clique {
            continue;
        }
        let needed = floor_of(2.0 * prm.rho, inst.xparts[i].len());
        for x in inst.tilde[i].iter() {
            if cliques[i].len() == needed {
                break;
            }
            if used.contains(x) {
                continue;
            }
            if let Some(c) = cliques_through(h, x, prm.delta + 1).into_iter().find(|c| c.iter().all(|&y| !used.contains(y))) {
                for &y in &c {
                    used.insert(y);
                    xc[inst.part_of(y)].insert(y);
                }
                cliques[i].push(c);
            }
        }
        if cliques[i].len() < needed {
            return Err(PartitionError::InfeasibleReservation { part: i, needed, found: cliques[i].len() });
        }
    }
    inst.cliques = cliques;
    inst.xc = xc;
    Ok(validate_reserved_cliques(inst))
}

/// RSC1–RSC3.
pub fn validate_reserved_cliques(inst: &BlowupInstance) -> PartitionReport {
    let prm = &inst.params;
    let mut rep = PartitionReport::default();
    rep.record(
        "RSC1",
        (|| {
            let mut seen = VertexSet::new(inst.h.n());
            for (i, fam) in inst.cliques.iter().enumerate() {
                let want = if inst.kinds[i].clique { floor_of(2.0 * prm.rho, inst.xparts[i].len()) } else { 0 };
                if fam.len() != want {
                    return Err(format!("part {i}: {} cliques, expected {want}", fam.len()));
                }
                for c in fam {
                    if c.len() != prm.delta + 1 || c.iter().filter(|&&y| inst.part_of(y) == i).count() != 1 {
                        return Err(format!("part {i}: clique {c:?} malformed"));
                    }
                    for (a, &u) in c.iter().enumerate() {
                        if !seen.insert(u) {
                            return Err(format!("vertex {u} in two reserved cliques"));
                        }
                        if let Some(&w) = c[a + 1..].iter().find(|&&w| !inst.h.has_edge(u, w)) {
                            return Err(format!("clique {c:?} misses edge {u}-{w}"));
                        }
                    }
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "RSC2",
        (|| {
            for c in inst.cliques.iter().flatten() {
                for (a, &u) in c.iter().enumerate() {
                    for &w in &c[a + 1..] {
                        if !inst.rp.has_edge(inst.part_of(u), inst.part_of(w)) {
                            return Err(format!("clique {c:?}: {u}-{w} not along R′"));
                        }
                    }
                }
            }
            Ok(())
        })(),
    );
    rep.record(
        "RSC3",
        (|| {
            for (i, xp) in inst.xparts.iter().enumerate() {
                let cap = 2.0 * prm.kappa * (prm.delta_rp + 1) as f64 * prm.rho * xp.len() as f64;
                if inst.xc[i].len() as f64 > cap + 1e-9 {
                    return Err(format!("part {i}: |X^c| = {} > {cap:.2}", inst.xc[i].len()));
                }
            }
            Ok(())
        })(),
    );
    rep
}

/// Size compatibility and `κ`-balance.
pub fn validate_balance(inst: &BlowupInstance) -> PartitionReport {
    let mut rep = PartitionReport::default();
    rep.record(
        "size-compatible",
        (0..inst.parts())
            .find(|&i| inst.xparts[i].len() != inst.vparts[i].len())
            .map_or(Ok(()), |i| Err(format!("part {i}: |X| ≠ |V|"))),
    );
    let sizes: Vec<usize> = inst.vparts.iter().map(VertexSet::len).collect();
    let (lo, hi) = (sizes.iter().min().copied().unwrap_or(0), sizes.iter().max().copied().unwrap_or(0));
    rep.record(
        "balance",
        if hi as f64 <= inst.params.kappa * lo as f64 + 1e-9 && lo > 0 {
            Ok(())
        } else {
            Err(format!("part sizes range over [{lo}, {hi}]"))
        },
    );
    rep
}

/// Builds the full instance: `H`-partition, `G`-partition and, when
/// `reserve` is set, reserved cliques. The combined report is returned with it.
pub fn prepare(
    bp: &Blueprint,
    params: &Params,
    check: &GCheck,
    reserve: bool,
    rng: &mut Rng,
) -> Result<(BlowupInstance, PartitionReport), PartitionError> {
    let hp = build_good_h_partition(bp, params, &mut rng.derive("h-partition"))?;
    let mut report = hp.report.clone();
    let (mut inst, grep) = build_good_g_partition(bp, hp, params, check, &mut rng.derive("g-partition"))?;
    report.extend(grep);
    report.extend(validate_balance(&inst));
    if reserve {
        report.extend(select_reserved_cliques(&mut inst)?);
    }
    Ok((inst, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{blowup, k_factor, random_bounded_degree};
    use crate::rng::Rng;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn cycle(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    #[test]
    fn empty_graph_round_robin() {
        let f = Graph::empty(12);
        let x = VertexSet::from_ids(12, 0..6);
        let parts = equitable_independent_partition(&f, &x, &mut Rng::new(1)).unwrap();
        assert_eq!(parts.len(), 8);
        assert!(parts.iter().all(|p| (1..=2).contains(&p.len())));
        assert!(parts.iter().all(|p| p.count_and(&x) <= 1));
    }

    #[test]
    fn cycle_five_gets_sixteen_parts() {
        let f = cycle(5);
        let parts = equitable_independent_partition(&f, &VertexSet::new(5), &mut Rng::new(2)).unwrap();
        assert_eq!(parts.len(), 16);
        check_equitable_independent(&f, &f.vertex_set(), &VertexSet::new(5), &parts).unwrap();
    }

    #[test]
    fn too_few_parts_rejected() {
        let f = cycle(6);
        let err = equitable_partition_of(&f, &f.vertex_set(), &VertexSet::new(6), 15, &mut Rng::new(0));
        assert!(matches!(err, Err(PartitionError::TooFewParts { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn equitable_partition_postconditions(seed in any::<u64>(), n in 2usize..60, delta in 1usize..=5, frac in 0.0f64..1.0) {
            let mut rng = Rng::new(seed);
            let f = random_bounded_degree(n, delta, &mut rng);
            let x = VertexSet::from_ids(n, (0..n).filter(|_| rng.random_bool(frac)));
            let parts = equitable_independent_partition(&f, &x, &mut rng).unwrap();
            prop_assert!(check_equitable_independent(&f, &f.vertex_set(), &x, &parts).is_ok());
        }
    }

    #[test]
    fn conflict_graph_links_distance_three() {
        // Path 0-1-2-3: 0 and 3 are at distance 3.
        let mut h = Graph::empty(6);
        for i in 0..3 {
            h.add_edge(i, i + 1);
        }
        let part = VertexSet::from_ids(6, [0, 3, 5]);
        let f = conflict_graph(&h, &part, &vec![Vec::new(); 6], 10);
        assert!(f.has_edge(0, 3));
        assert!(!f.has_edge(0, 5));
    }

    #[test]
    fn conflict_graph_links_shared_restricting_vertex() {
        let h = Graph::empty(4);
        let part = VertexSet::from_ids(4, [0, 1, 2]);
        let j = vec![vec![9], vec![9], vec![8], vec![]];
        let f = conflict_graph(&h, &part, &j, 10);
        assert!(f.has_edge(0, 1) && !f.has_edge(0, 2));
    }

    fn matching_blueprint() -> Blueprint {
        let mut h = Graph::empty(40);
        for i in 0..20 {
            h.add_edge(2 * i, 2 * i + 1);
        }
        let gamma = Graph::complete(40);
        Blueprint::unrestricted(
            gamma.clone(),
            gamma,
            h,
            Graph::empty(1),
            vec![VertexSet::full(40)],
            vec![VertexSet::full(40)],
        )
    }

    #[test]
    fn matching_refines_into_independent_parts() {
        let bp = matching_blueprint();
        let params = Params { mu: 0.05, delta: 1, ..Params::default() };
        let hp = build_good_h_partition(&bp, &params, &mut Rng::new(3)).unwrap();
        assert_eq!(hp.xparts.len(), 8);
        for xp in &hp.xparts {
            assert!(xp.iter().all(|x| bp.h.neighbors(x).is_disjoint(xp)));
        }
        for id in ["PtH:dist", "BUF1", "BUF2", "BUF3", "BUF4", "BUF5", "BUF6"] {
            assert_eq!(hp.report.get(id).unwrap().status, CheckStatus::Pass, "{id}: {:?}", hp.report.get(id));
        }
    }

    fn factor_blueprint(k: usize, copies: usize, p: f64, seed: u64) -> Blueprint {
        let (h, xparts) = k_factor(k, copies);
        let (gamma, vparts) = blowup(&Graph::complete(k), &vec![copies; k], p, &mut Rng::new(seed));
        Blueprint::unrestricted(gamma.clone(), gamma, h, Graph::complete(k), xparts, vparts)
    }

    #[test]
    fn triangle_factor_gets_clique_buffers() {
        let bp = factor_blueprint(3, 60, 1.0, 0);
        let params = Params { mu: 0.04, rho: 0.02, delta: 2, ..Params::default() };
        let hp = build_good_h_partition(&bp, &params, &mut Rng::new(0)).unwrap();
        assert_eq!(hp.xparts.len(), 3);
        assert!(hp.kinds.iter().all(|k| k.clique && k.degree == 2));
        assert!(hp.report.is_pass(), "{}", hp.report);
    }

    #[test]
    fn infeasible_buffers_reported() {
        // 100 triangles cannot host 120 pairwise distant buffer vertices.
        let bp = factor_blueprint(3, 100, 1.0, 0);
        let params = Params { mu: 0.1, delta: 2, ..Params::default() };
        assert!(matches!(
            build_good_h_partition(&bp, &params, &mut Rng::new(0)),
            Err(PartitionError::InfeasibleBuffer { .. })
        ));
    }

    #[test]
    fn split_rounding_rule() {
        assert_eq!(split_sizes(101, 0.1), [71, 10, 10, 10]);
        assert_eq!(split_sizes(100, 0.1), [70, 10, 10, 10]);
    }

    #[test]
    fn complete_multipartite_passes_first_attempt() {
        let bp = factor_blueprint(3, 30, 1.0, 0);
        let params = Params { mu: 0.04, rho: 0.02, delta: 2, ..Params::default() };
        let check = GCheck { retries: 1, ..GCheck::desk(params.eps) };
        let (inst, report) = prepare(&bp, &params, &check, true, &mut Rng::new(5)).unwrap();
        assert!(report.is_pass(), "{report}");
        assert_eq!(inst.cliques.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 1, 1]);
        let all: Vec<usize> = inst.cliques.iter().flatten().flatten().copied().collect();
        let mut dedup = all.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(all.len(), dedup.len());
    }

    #[test]
    fn r_partition_validator_finds_inner_edge() {
        let mut h = Graph::empty(4);
        h.add_edge(0, 1);
        let parts = vec![VertexSet::from_ids(4, [0, 1]), VertexSet::from_ids(4, [2, 3])];
        let rep = validate_r_partition(&h, &parts, &Graph::complete(2));
        assert_eq!(rep.first_failure().unwrap().witness.as_deref(), Some("edge 0-1 inside part 0"));
    }

    #[test]
    fn r_partition_matches_brute_force() {
        let mut rng = Rng::new(8);
        for _ in 0..50 {
            let h = random_bounded_degree(20, 3, &mut rng);
            let idx: Vec<usize> = (0..20).map(|_| rng.random_range(0..4)).collect();
            let parts: Vec<VertexSet> = (0..4).map(|i| VertexSet::from_ids(20, (0..20).filter(|&x| idx[x] == i))).collect();
            let mut r = Graph::empty(4);
            for a in 0..4 {
                for b in a + 1..4 {
                    if rng.random_bool(0.6) {
                        r.add_edge(a, b);
                    }
                }
            }
            let brute = h.edges().all(|(u, v)| idx[u] != idx[v] && r.has_edge(idx[u], idx[v]));
            assert_eq!(validate_r_partition(&h, &parts, &r).is_pass(), brute);
        }
    }

    #[test]
    fn buffer_validator_cases() {
        // Isolated potential buffers pass vacuously.
        let h = Graph::empty(4);
        let parts = vec![VertexSet::from_ids(4, [0, 1]), VertexSet::from_ids(4, [2, 3])];
        assert!(validate_buffer(&h, &parts, &parts, &Graph::empty(2), 0.5).is_pass());
        // Path 0-2-1 with parts {0,1},{2}: the second step 2-1 must be on R′.
        let mut h = Graph::empty(3);
        h.add_edge(0, 2);
        h.add_edge(2, 1);
        let parts = vec![VertexSet::from_ids(3, [0, 1]), VertexSet::from_ids(3, [2])];
        let tilde = vec![VertexSet::from_ids(3, [0]), VertexSet::new(3)];
        assert!(validate_buffer(&h, &parts, &tilde, &Graph::complete(2), 0.0).is_pass());
        assert!(!validate_buffer(&h, &parts, &tilde, &Graph::empty(2), 0.0).is_pass());
    }

    #[test]
    fn buffer_validator_matches_bfs_oracle() {
        let mut rng = Rng::new(13);
        for _ in 0..40 {
            let h = random_bounded_degree(16, 3, &mut rng);
            let idx: Vec<usize> = (0..16).map(|v| v % 4).collect();
            let parts: Vec<VertexSet> = (0..4).map(|i| VertexSet::from_ids(16, (0..16).filter(|&x| idx[x] == i))).collect();
            let tilde: Vec<VertexSet> = parts.iter().map(|p| VertexSet::from_ids(16, p.iter().filter(|_| rng.random_bool(0.5)))).collect();
            let mut rp = Graph::empty(4);
            for a in 0..4 {
                for b in a + 1..4 {
                    if rng.random_bool(0.7) {
                        rp.add_edge(a, b);
                    }
                }
            }
            let oracle = tilde.iter().flat_map(|t| t.iter()).all(|x| {
                let dist = h.distances_within(x, 2);
                (0..16).all(|y| match dist[y] {
                    Some(1) => rp.has_edge(idx[x], idx[y]),
                    Some(2) => h.neighbors(y).iter().filter(|&m| dist[m] == Some(1)).all(|m| rp.has_edge(idx[m], idx[y])),
                    _ => true,
                }) && h.neighbors(x).iter().all(|y| h.neighbors(y).iter().filter(|&z| z != x).all(|z| rp.has_edge(idx[y], idx[z])))
            });
            assert_eq!(validate_buffer(&h, &parts, &tilde, &rp, 0.0).is_pass(), oracle);
        }
    }

    fn restricted_instance() -> BlowupInstance {
        let bp = factor_blueprint(3, 30, 1.0, 0);
        let params = Params { mu: 0.04, rho: 0.02, delta: 2, ..Params::default() };
        prepare(&bp, &params, &GCheck::desk(0.1), false, &mut Rng::new(5)).unwrap().0
    }

    #[test]
    fn restriction_pair_trivial_passes() {
        let inst = restricted_instance();
        let rep = validate_restriction_pair(&inst, 0.02, 0.5, 2, 0, &Verifier::Exact, &mut Rng::new(0)).unwrap();
        assert!(rep.is_pass(), "{rep}");
    }

    #[test]
    fn restriction_pair_overused_host_vertex() {
        let mut inst = restricted_instance();
        inst.restricting[0] = vec![0];
        inst.restricting[3] = vec![0];
        let rep = validate_restriction_pair(&inst, 1.0, 0.5, 2, 1, &Verifier::Exact, &mut Rng::new(0)).unwrap();
        assert_eq!(rep.get("restriction(d)").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn restriction_pair_undersized_image() {
        let mut inst = restricted_instance();
        let x = inst.xparts[0].first().unwrap();
        inst.restrict[x] = VertexSet::from_ids(inst.gamma.n(), inst.vparts[0].iter().take(3));
        let rep = validate_restriction_pair(&inst, 1.0, 0.5, 2, 0, &GCheck::desk(0.1).verifier, &mut Rng::new(0)).unwrap();
        assert_eq!(rep.get("restriction(b)").unwrap().status, CheckStatus::Fail);
        assert_eq!(rep.get("restriction(a)").unwrap().status, CheckStatus::Pass);
    }

    #[test]
    fn reserved_cliques_overlapping_family_is_infeasible() {
        // Two K4s sharing a triangle: only one disjoint K4 exists.
        let mut h = Graph::empty(5);
        for (u, v) in [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3), (0, 4), (1, 4), (2, 4)] {
            h.add_edge(u, v);
        }
        let mut inst = restricted_instance();
        inst.h = h;
        inst.params.delta = 3;
        inst.params.rho = 1.0;
        inst.xparts = vec![VertexSet::from_ids(5, [0, 4]), VertexSet::from_ids(5, [1]), VertexSet::from_ids(5, [2, 3])];
        inst.tilde = inst.xparts.clone();
        inst.xbuf = vec![VertexSet::new(5); 3];
        inst.kinds = vec![BufferKind { degree: 3, clique: true }; 3];
        inst.restrict = (0..5).map(|_| VertexSet::new(inst.gamma.n())).collect();
        inst.restricting = vec![Vec::new(); 5];
        inst.reindex();
        // Mark everything unrestricted.
        for x in 0..5 {
            inst.restrict[x] = inst.vparts[inst.part_of(x)].clone();
        }
        assert!(matches!(select_reserved_cliques(&mut inst), Err(PartitionError::InfeasibleReservation { .. })));
    }

    #[test]
    fn overrides_parse() {
        let mut p = Params::default();
        p.apply_overrides("mu=0.04, rho=0.02,delta=3").unwrap();
        assert_eq!((p.mu, p.rho, p.delta), (0.04, 0.02, 3));
        assert!(p.apply_overrides("bogus=1").is_err());
    }
}
