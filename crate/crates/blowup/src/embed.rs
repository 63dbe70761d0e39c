//! Partial embeddings with cached underlying, candidate and available sets,
//! the good-partial-embedding checks, bad vertices, and the queue.

use serde::{Deserialize, Serialize};

use crate::graph::{common_neighborhood_of, VertexSet};
use crate::partition::{BlowupInstance, Slot};
use crate::regularity::{verify_lower, RegParams, RegularityError, VerdictKind, Verifier};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("vertex {0} is already embedded")]
    AlreadyEmbedded(usize),
    #[error("host vertex {v} already carries {owner}")]
    Collision { v: usize, owner: usize },
    #[error("host vertex {v} is not an available candidate for {x}")]
    NotAvailable { x: usize, v: usize },
}

/// An injective partial map `V(H) → V(G)` with per-vertex caches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialEmbedding {
    psi: Vec<Option<usize>>,
    inverse: Vec<Option<usize>>,
    used: VertexSet,
    u: Vec<VertexSet>,
    c: Vec<VertexSet>,
    a: Vec<VertexSet>,
    pi: Vec<usize>,
}

impl PartialEmbedding {
    /// The empty embedding: `U(x) = N*_Γ(J_x; V(x))`, `C(x) = A(x) = I_x`.
    pub fn new(inst: &BlowupInstance) -> Self {
        let nh = inst.h.n();
        let ng = inst.gamma.n();
        let u = (0..nh)
            .map(|x| common_neighborhood_of(&inst.gamma, &inst.restricting[x], &inst.vparts[inst.part_of(x)]))
            .collect();
        PartialEmbedding {
            psi: vec![None; nh],
            inverse: vec![None; ng],
            used: VertexSet::new(ng),
            u,
            c: inst.restrict.clone(),
            a: inst.restrict.clone(),
            pi: vec![0; nh],
        }
    }

    pub fn image(&self, x: usize) -> Option<usize> {
        self.psi[x]
    }

    pub fn preimage(&self, v: usize) -> Option<usize> {
        self.inverse[v]
    }

    pub fn is_embedded(&self, x: usize) -> bool {
        self.psi[x].is_some()
    }

    pub fn embedded_count(&self) -> usize {
        self.used.len()
    }

    pub fn is_total(&self) -> bool {
        self.psi.iter().all(Option::is_some)
    }

    pub fn psi(&self) -> &[Option<usize>] {
        &self.psi
    }

    pub fn used(&self) -> &VertexSet {
        &self.used
    }

    pub fn u(&self, x: usize) -> &VertexSet {
        &self.u[x]
    }

    pub fn c(&self, x: usize) -> &VertexSet {
        &self.c[x]
    }

    pub fn a(&self, x: usize) -> &VertexSet {
        &self.a[x]
    }

    /// `A(x) ∩ V^slot(x)`.
    pub fn a_in(&self, inst: &BlowupInstance, x: usize, s: Slot) -> VertexSet {
        self.a[x].intersection(inst.splits[inst.part_of(x)].get(s))
    }

    pub fn c_in(&self, inst: &BlowupInstance, x: usize, s: Slot) -> VertexSet {
        self.c[x].intersection(inst.splits[inst.part_of(x)].get(s))
    }

    /// Number of embedded neighbours.
    pub fn pi(&self, x: usize) -> usize {
        self.pi[x]
    }

    pub fn pi_star(&self, inst: &BlowupInstance, x: usize) -> usize {
        self.pi[x] + inst.restricting[x].len()
    }

    /// Adds `x → v` and updates caches of unembedded neighbours of `x` and of
    /// unembedded vertices in the part of `x`.
    pub fn extend(&mut self, inst: &BlowupInstance, x: usize, v: usize) -> Result<(), EmbedError> {
        if self.psi[x].is_some() {
            return Err(EmbedError::AlreadyEmbedded(x));
        }
        if let Some(owner) = self.inverse[v] {
            return Err(EmbedError::Collision { v, owner });
        }
        if !self.a[x].contains(v) {
            return Err(EmbedError::NotAvailable { x, v });
        }
        self.psi[x] = Some(v);
        self.inverse[v] = Some(x);
        self.used.insert(v);
        for y in inst.h.neighbors(x).iter().filter(|&y| self.psi[y].is_none()) {
            self.u[y].intersect_with(inst.gamma.neighbors(v));
            self.c[y].intersect_with(inst.g.neighbors(v));
            self.a[y].intersect_with(inst.g.neighbors(v));
            self.pi[y] += 1;
        }
        for y in inst.xparts[inst.part_of(x)].iter().filter(|&y| self.psi[y].is_none()) {
            self.a[y].remove(v);
        }
        Ok(())
    }

    /// `(U(x), C(x), A(x))` computed from the definitions.
    pub fn scratch(&self, inst: &BlowupInstance, x: usize) -> (VertexSet, VertexSet, VertexSet) {
        let images: Vec<usize> = inst.h.neighbors(x).iter().filter_map(|y| self.psi[y]).collect();
        let mut gamma_set = images.clone();
        gamma_set.extend(&inst.restricting[x]);
        let u = common_neighborhood_of(&inst.gamma, &gamma_set, &inst.vparts[inst.part_of(x)]);
        let c = common_neighborhood_of(&inst.g, &images, &inst.restrict[x]);
        let a = c.difference(&self.used);
        (u, c, a)
    }

    /// Every cache of an unembedded vertex equals its scratch value.
    pub fn audit_coherence(&self, inst: &BlowupInstance) -> Result<(), String> {
        for x in (0..self.psi.len()).filter(|&x| self.psi[x].is_none()) {
            let (u, c, a) = self.scratch(inst, x);
            let pi = inst.h.neighbors(x).iter().filter(|&y| self.psi[y].is_some()).count();
            if u != self.u[x] || c != self.c[x] || a != self.a[x] || pi != self.pi[x] {
                return Err(format!("cache of {x} differs from recomputation"));
            }
        }
        Ok(())
    }

    /// First embedded edge of `H` whose image is not an edge of `G`.
    pub fn homomorphism_violation(&self, inst: &BlowupInstance) -> Option<(usize, usize)> {
        inst.h.edges().find(|&(x, y)| match (self.psi[x], self.psi[y]) {
            (Some(a), Some(b)) => !inst.g.has_edge(a, b),
            _ => false,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GpeMode {
    SizesOnly,
    Full(Verifier),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GpeClause {
    Gpe1,
    Gpe2,
    Gpe3,
    Gpe4,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GpeViolation {
    pub clause: GpeClause,
    pub vertex: usize,
    pub other: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GpeReport {
    pub violations: Vec<GpeViolation>,
    pub regularity_checked: usize,
    pub regularity_inconclusive: usize,
}

impl GpeReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

const ALL_SLOTS: [Option<Slot>; 5] = [None, Some(Slot::Main), Some(Slot::Queue), Some(Slot::Clique), Some(Slot::Buffer)];

fn slot_name(s: Option<Slot>) -> &'static str {
    match s {
        None => "all",
        Some(Slot::Main) => "main",
        Some(Slot::Queue) => "q",
        Some(Slot::Clique) => "c",
        Some(Slot::Buffer) => "buf",
    }
}

fn restrict_to<'a>(inst: &'a BlowupInstance, i: usize, s: Option<Slot>) -> &'a VertexSet {
    match s {
        None => &inst.vparts[i],
        Some(s) => inst.splits[i].get(s),
    }
}

/// Size windows on an underlying set with `k` embedded or restricting
/// neighbours: `|U ∩ V^s| ∈ (p ± εp)^k |V^s|` for the whole part and each split.
pub fn underlying_size_violation(inst: &BlowupInstance, x: usize, u: &VertexSet, k: usize) -> Option<String> {
    let prm = &inst.params;
    let i = inst.part_of(x);
    let lo = (prm.p - prm.eps * prm.p).powi(k as i32);
    let hi = (prm.p + prm.eps * prm.p).powi(k as i32);
    ALL_SLOTS.iter().find_map(|&s| {
        let base = restrict_to(inst, i, s);
        let got = u.count_and(base) as f64;
        let n = base.len() as f64;
        (got < lo * n - prm.slack || got > hi * n + prm.slack)
            .then(|| format!("|U_{}({x})| = {got} outside [{:.3}, {:.3}]", slot_name(s), lo * n, hi * n))
    })
}

/// Candidate floors with `k` embedded neighbours:
/// `|C ∩ V^s| ≥ (1 − ε′)·(|V^s|/|V|)·(dp − ε′p)^k |I_x|`.
pub fn candidate_size_violation(inst: &BlowupInstance, x: usize, c: &VertexSet, k: usize) -> Option<String> {
    let prm = &inst.params;
    let i = inst.part_of(x);
    let base = (1.0 - prm.eps_prime) * (prm.d * prm.p - prm.eps_prime * prm.p).powi(k as i32) * inst.restrict[x].len() as f64;
    ALL_SLOTS.iter().find_map(|&s| {
        let frac = s.map_or(1.0, |s| inst.fraction(i, s));
        let got = c.count_and(restrict_to(inst, i, s)) as f64;
        (got < frac * base - prm.slack).then(|| format!("|C_{}({x})| = {got} < {:.3}", slot_name(s), frac * base))
    })
}

/// All four good-partial-embedding conditions; `Full` adds regularity of
/// `(U(x), U(y))` on every unembedded edge.
pub fn check_gpe(inst: &BlowupInstance, st: &PartialEmbedding, mode: &GpeMode, rng: &mut Rng) -> Result<GpeReport, RegularityError> {
    let mut rep = GpeReport::default();
    let nh = inst.h.n();
    for x in 0..nh {
        match st.image(x) {
            Some(v) => {
                if !inst.restrict[x].contains(v) {
                    rep.violations.push(GpeViolation { clause: GpeClause::Gpe1, vertex: x, other: None, detail: format!("image {v} outside I_x") });
                }
            }
            None => {
                if let Some(d) = underlying_size_violation(inst, x, st.u(x), st.pi_star(inst, x)) {
                    rep.violations.push(GpeViolation { clause: GpeClause::Gpe2, vertex: x, other: None, detail: d });
                }
                if let Some(d) = candidate_size_violation(inst, x, st.c(x), st.pi(x)) {
                    rep.violations.push(GpeViolation { clause: GpeClause::Gpe3, vertex: x, other: None, detail: d });
                }
            }
        }
    }
    if let GpeMode::Full(verifier) = mode {
        let lattice = inst.params.lattice();
        for (x, y) in inst.h.edges().filter(|&(x, y)| !st.is_embedded(x) && !st.is_embedded(y)) {
            let eps = lattice.get(st.pi_star(inst, x), st.pi_star(inst, y));
            let prm = RegParams::new(eps, inst.params.d, inst.params.p);
            let v = verify_lower(&inst.g, st.u(x), st.u(y), &prm, verifier, rng)?;
            rep.regularity_checked += 1;
            match v.kind {
                VerdictKind::Witness => rep.violations.push(GpeViolation {
                    clause: GpeClause::Gpe4,
                    vertex: x,
                    other: Some(y),
                    detail: format!("(U({x}), U({y})) not ({eps:.3}, d, p)-regular"),
                }),
                VerdictKind::Inconclusive => rep.regularity_inconclusive += 1,
                VerdictKind::Certified => {}
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BadMode {
    Relaxed,
    Oracle(Verifier),
}

/// Available candidates `v` of `x` such that `x → v` breaks a size condition
/// for a neighbour, (in `Oracle` mode) a regularity condition on a pair it
/// touches, or violates the badness degree condition for some unembedded
/// neighbour outside `queue`.
pub fn bad_set(
    inst: &BlowupInstance,
    st: &PartialEmbedding,
    queue: &VertexSet,
    x: usize,
    mode: &BadMode,
    rng: &mut Rng,
) -> Result<VertexSet, RegularityError> {
    let prm = &inst.params;
    let mut bad = VertexSet::new(inst.gamma.n());
    let nbrs: Vec<usize> = inst.h.neighbors(x).iter().filter(|&y| !st.is_embedded(y)).collect();
    if nbrs.is_empty() {
        return Ok(bad);
    }
    let a_main: Vec<VertexSet> = nbrs.iter().map(|&y| st.a_in(inst, y, Slot::Main)).collect();
    let lattice = prm.lattice();
    for v in st.a(x).iter() {
        let mut is_bad = false;
        for (k, &y) in nbrs.iter().enumerate() {
            let u = st.u(y).intersection(inst.gamma.neighbors(v));
            let c = st.c(y).intersection(inst.g.neighbors(v));
            if underlying_size_violation(inst, y, &u, st.pi_star(inst, y) + 1).is_some()
                || candidate_size_violation(inst, y, &c, st.pi(y) + 1).is_some()
            {
                is_bad = true;
                break;
            }
            if !queue.contains(y) {
                let am = &a_main[k];
                let deg = inst.g.degree_into(v, am) as f64;
                if deg < (prm.d - prm.eps_prime) * prm.p * am.len() as f64 - prm.slack {
                    is_bad = true;
                    break;
                }
            }
        }
        if !is_bad {
            if let BadMode::Oracle(verifier) = mode {
                let new_u = |z: usize| {
                    if inst.h.has_edge(x, z) {
                        st.u(z).intersection(inst.gamma.neighbors(v))
                    } else {
                        st.u(z).clone()
                    }
                };
                let new_pi = |z: usize| st.pi_star(inst, z) + usize::from(inst.h.has_edge(x, z));
                'pairs: for &y in &nbrs {
                    for z in inst.h.neighbors(y).iter().filter(|&z| z != x && !st.is_embedded(z)) {
                        let eps = lattice.get(new_pi(y), new_pi(z));
                        let rp = RegParams::new(eps, prm.d, prm.p);
                        if verify_lower(&inst.g, &new_u(y), &new_u(z), &rp, verifier, rng)?.is_witness() {
                            is_bad = true;
                            break 'pairs;
                        }
                    }
                }
            }
        }
        if is_bad {
            bad.insert(v);
        }
    }
    Ok(bad)
}

/// Vertices deferred to the queue, with the step at which each entered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Queue {
    members: VertexSet,
    entered: VertexSet,
    log: Vec<(usize, usize)>,
}

impl Queue {
    pub fn new(nh: usize) -> Self {
        Queue { members: VertexSet::new(nh), entered: VertexSet::new(nh), log: Vec::new() }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(x)
    }

    pub fn members(&self) -> &VertexSet {
        &self.members
    }

    /// Every vertex that was ever queued, embedded or not.
    pub fn entered(&self) -> &VertexSet {
        &self.entered
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn log(&self) -> &[(usize, usize)] {
        &self.log
    }

    pub fn push(&mut self, x: usize, t: usize) -> bool {
        let fresh = self.members.insert(x);
        if fresh {
            self.entered.insert(x);
            self.log.push((x, t));
        }
        fresh
    }

    /// Drops an embedded vertex from the live set; the log keeps it.
    pub fn settle(&mut self, x: usize) {
        self.members.remove(x);
    }
}

/// `½μ(d − ε′)^{π*} p^{π*} |V^main(y)|`.
pub fn queue_threshold(inst: &BlowupInstance, st: &PartialEmbedding, y: usize) -> f64 {
    let prm = &inst.params;
    let k = st.pi_star(inst, y) as i32;
    0.5 * prm.mu * (prm.d - prm.eps_prime).powi(k) * prm.p.powi(k) * inst.splits[inst.part_of(y)].main.len() as f64
}

fn below_threshold(inst: &BlowupInstance, st: &PartialEmbedding, y: usize) -> bool {
    (st.a(y).count_and(&inst.splits[inst.part_of(y)].main) as f64) < queue_threshold(inst, st, y) - inst.params.slack
}

/// Vertices whose image restriction is too small from the start:
/// `|I_x| < ½μ(d − ε)^{|J_x|} p^{|J_x|} |V^main(x)|`.
pub fn initial_queue(inst: &BlowupInstance, domain: &VertexSet) -> Queue {
    let prm = &inst.params;
    let mut q = Queue::new(inst.h.n());
    for x in domain.iter() {
        let k = inst.restricting[x].len() as i32;
        let floor = 0.5 * prm.mu * (prm.d - prm.eps).powi(k) * prm.p.powi(k) * inst.splits[inst.part_of(x)].main.len() as f64;
        if (inst.restrict[x].len() as f64) < floor - prm.slack {
            q.push(x, 0);
        }
    }
    q
}

/// After `x → v`, enqueues unembedded vertices of `domain` whose available
/// main candidates fell below the threshold. Only neighbours of `x` and
/// vertices in its part can change, so only those are examined.
pub fn update_queue(inst: &BlowupInstance, st: &PartialEmbedding, q: &mut Queue, domain: &VertexSet, x: usize, t: usize) -> Vec<usize> {
    let mut touched = inst.h.neighbors(x).union(&inst.xparts[inst.part_of(x)]);
    touched.intersect_with(domain);
    let mut added = Vec::new();
    for y in touched.iter() {
        if !st.is_embedded(y) && !q.contains(y) && below_threshold(inst, st, y) && q.push(y, t) {
            added.push(y);
        }
    }
    added
}

/// The same rule applied to every unembedded vertex of `domain`, for audits.
pub fn full_scan_queue(inst: &BlowupInstance, st: &PartialEmbedding, q: &Queue, domain: &VertexSet) -> VertexSet {
    let mut out = VertexSet::new(inst.h.n());
    for y in domain.iter() {
        if !st.is_embedded(y) && !q.contains(y) && below_threshold(inst, st, y) {
            out.insert(y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{blowup, gnp, k_factor, Graph};
    use crate::partition::{prepare, Blueprint, GCheck, Params};
    use rand::seq::IteratorRandom;

    pub(crate) fn complete_instance(k: usize, copies: usize) -> BlowupInstance {
        let (h, xparts) = k_factor(k, copies);
        let (gamma, vparts) = blowup(&Graph::complete(k), &vec![copies; k], 1.0, &mut Rng::new(0));
        let bp = Blueprint::unrestricted(gamma.clone(), gamma, h, Graph::complete(k), xparts, vparts);
        let params = Params { mu: 0.04, rho: 0.02, delta: k - 1, delta_rp: k - 1, ..Params::default() };
        prepare(&bp, &params, &GCheck::desk(0.1), false, &mut Rng::new(1)).unwrap().0
    }

    fn random_instance(seed: u64) -> BlowupInstance {
        // Γ = G(90, 0.6) with parts i mod 3, G = Γ minus edges inside parts,
        // and a triangle factor. Partition conditions are not required here.
        let mut rng = Rng::new(seed);
        let gamma = gnp(90, 0.6, &mut rng);
        let (h, xparts) = k_factor(3, 30);
        let vparts: Vec<VertexSet> = (0..3).map(|i| VertexSet::from_ids(90, (0..90).filter(|v| v % 3 == i))).collect();
        let mut g = Graph::empty(90);
        for (u, v) in gamma.edges().filter(|&(u, v)| u % 3 != v % 3) {
            g.add_edge(u, v);
        }
        let bp = Blueprint::unrestricted(gamma, g, h, Graph::complete(3), xparts, vparts);
        let params = Params { mu: 0.04, rho: 0.02, p: 0.6, ..Params::default() };
        let hp = crate::partition::build_good_h_partition(&bp, &params, &mut rng).unwrap();
        assert_eq!(hp.xparts, bp.xparts);
        let splits = bp
            .vparts
            .iter()
            .map(|vp| {
                let ids = vp.to_vec();
                let [m, q, c, _] = crate::partition::split_sizes(ids.len(), params.mu);
                let take = |a: usize, b: usize| VertexSet::from_ids(90, ids[a..b].iter().copied());
                crate::partition::Splits { main: take(0, m), queue: take(m, m + q), clique: take(m + q, m + q + c), buffer: take(m + q + c, ids.len()) }
            })
            .collect();
        let restrict = (0..90).map(|x| bp.vparts[x % 3].clone()).collect();
        BlowupInstance::assemble(bp.gamma.clone(), bp.g.clone(), bp.h.clone(), hp, bp.vparts.clone(), splits, restrict, vec![Vec::new(); 90], params)
    }

    #[test]
    fn unrestricted_candidates_are_parts() {
        let inst = complete_instance(3, 20);
        let st = PartialEmbedding::new(&inst);
        for x in 0..inst.h.n() {
            assert_eq!(st.c(x), &inst.vparts[inst.part_of(x)]);
            assert_eq!(st.u(x), &inst.vparts[inst.part_of(x)]);
        }
    }

    #[test]
    fn restricting_vertex_shapes_underlying_set() {
        let mut inst = complete_instance(3, 20);
        let x = inst.xparts[0].first().unwrap();
        // Make host vertex g = a vertex of part 1 act as the restricting vertex.
        let g = inst.vparts[1].first().unwrap();
        inst.restricting[x] = vec![g];
        let st = PartialEmbedding::new(&inst);
        assert_eq!(st.u(x), &inst.gamma.neighbors(g).intersection(&inst.vparts[0]));
    }

    #[test]
    fn extend_errors() {
        let inst = complete_instance(3, 20);
        let mut st = PartialEmbedding::new(&inst);
        let x = inst.xparts[0].first().unwrap();
        let y = inst.xparts[0].iter().nth(1).unwrap();
        let v = inst.vparts[0].first().unwrap();
        st.extend(&inst, x, v).unwrap();
        assert_eq!(st.extend(&inst, x, v), Err(EmbedError::AlreadyEmbedded(x)));
        assert_eq!(st.extend(&inst, y, v), Err(EmbedError::Collision { v, owner: x }));
        let w = inst.vparts[1].first().unwrap();
        assert_eq!(st.extend(&inst, y, w), Err(EmbedError::NotAvailable { x: y, v: w }));
    }

    #[test]
    fn complete_host_neighbours_shrink_to_neighbourhood() {
        let inst = complete_instance(3, 20);
        let mut st = PartialEmbedding::new(&inst);
        let x = 0;
        let v = st.a(x).first().unwrap();
        st.extend(&inst, x, v).unwrap();
        for y in inst.h.neighbors(x).iter() {
            assert_eq!(st.c(y), &inst.vparts[inst.part_of(y)].intersection(inst.g.neighbors(v)));
            assert_eq!(st.pi(y), 1);
        }
        assert!(check_gpe(&inst, &st, &GpeMode::SizesOnly, &mut Rng::new(0)).unwrap().is_pass());
    }

    #[test]
    fn random_extensions_stay_coherent_and_monotone() {
        for seed in 0..3 {
            let inst = random_instance(seed);
            let mut st = PartialEmbedding::new(&inst);
            let mut rng = Rng::new(seed + 100);
            for _ in 0..100 {
                let Some(x) = (0..inst.h.n()).filter(|&x| !st.is_embedded(x) && !st.a(x).is_empty()).choose(&mut rng) else { break };
                let v = st.a(x).iter().choose(&mut rng).unwrap();
                let before: Vec<VertexSet> = (0..inst.h.n()).map(|y| st.a(y).clone()).collect();
                st.extend(&inst, x, v).unwrap();
                st.audit_coherence(&inst).unwrap();
                assert_eq!(st.homomorphism_violation(&inst), None);
                for y in (0..inst.h.n()).filter(|&y| !st.is_embedded(y)) {
                    assert!(st.a(y).is_subset(&before[y]));
                }
            }
        }
    }

    #[test]
    fn trivial_embedding_meets_size_conditions() {
        let inst = complete_instance(4, 25);
        let st = PartialEmbedding::new(&inst);
        assert!(check_gpe(&inst, &st, &GpeMode::SizesOnly, &mut Rng::new(0)).unwrap().is_pass());
        let full = GpeMode::Full(GCheck::desk(0.1).verifier);
        assert!(check_gpe(&inst, &st, &full, &mut Rng::new(0)).unwrap().is_pass());
    }

    #[test]
    fn undersized_underlying_set_flags_gpe2() {
        // Γ misses most edges from one host vertex into part 1.
        let mut inst = complete_instance(3, 20);
        let v = inst.vparts[0].first().unwrap();
        let mut gamma = Graph::empty(inst.gamma.n());
        for (a, b) in inst.gamma.edges() {
            let drop = (a == v && inst.vparts[1].contains(b) && b % 2 == 0) || (b == v && inst.vparts[1].contains(a) && a % 2 == 0);
            if !drop {
                gamma.add_edge(a, b);
            }
        }
        inst.gamma = gamma.clone();
        inst.g = gamma;
        let mut st = PartialEmbedding::new(&inst);
        let x = inst.xparts[0].first().unwrap();
        st.extend(&inst, x, v).unwrap();
        let rep = check_gpe(&inst, &st, &GpeMode::SizesOnly, &mut Rng::new(0)).unwrap();
        assert!(rep.violations.iter().any(|w| w.clause == GpeClause::Gpe2 && inst.h.has_edge(w.vertex, x)));
    }

    #[test]
    fn no_bad_vertices_without_unembedded_neighbours() {
        let inst = complete_instance(3, 20);
        let mut st = PartialEmbedding::new(&inst);
        let (a, b) = (0, 1);
        st.extend(&inst, a, st.a(a).first().unwrap()).unwrap();
        st.extend(&inst, b, st.a(b).first().unwrap()).unwrap();
        let q = VertexSet::new(inst.h.n());
        assert!(bad_set(&inst, &st, &q, 2, &BadMode::Relaxed, &mut Rng::new(0)).unwrap().is_empty());
    }

    #[test]
    fn complete_host_has_no_bad_vertices() {
        let inst = complete_instance(3, 20);
        let st = PartialEmbedding::new(&inst);
        let q = VertexSet::new(inst.h.n());
        let oracle = BadMode::Oracle(GCheck::desk(0.1).verifier);
        for x in [0, 5, 17] {
            assert!(bad_set(&inst, &st, &q, x, &BadMode::Relaxed, &mut Rng::new(0)).unwrap().is_empty());
            assert!(bad_set(&inst, &st, &q, x, &oracle, &mut Rng::new(0)).unwrap().is_empty());
        }
    }

    #[test]
    fn bad_choice_breaks_gpe_and_good_choice_keeps_it() {
        let inst = random_instance(7);
        let st = PartialEmbedding::new(&inst);
        let q = VertexSet::new(inst.h.n());
        let x = 0;
        let bad = bad_set(&inst, &st, &q, x, &BadMode::Relaxed, &mut Rng::new(0)).unwrap();
        for v in st.a(x).iter().take(30) {
            let mut next = st.clone();
            next.extend(&inst, x, v).unwrap();
            let sizes_ok = check_gpe(&inst, &next, &GpeMode::SizesOnly, &mut Rng::new(0)).unwrap().is_pass();
            if !bad.contains(v) {
                assert!(sizes_ok, "good choice {v} broke the size conditions");
            }
        }
    }

    #[test]
    fn isolated_vertex_only_touches_its_part() {
        let mut inst = complete_instance(3, 20);
        // Remove all H-edges at vertex 0.
        let mut h = Graph::empty(inst.h.n());
        for (a, b) in inst.h.edges().filter(|&(a, b)| a != 0 && b != 0) {
            h.add_edge(a, b);
        }
        inst.h = h;
        let mut st = PartialEmbedding::new(&inst);
        let domain = inst.h.vertex_set();
        let mut q = Queue::new(inst.h.n());
        st.extend(&inst, 0, st.a(0).first().unwrap()).unwrap();
        let added = update_queue(&inst, &st, &mut q, &domain, 0, 1);
        assert!(added.iter().all(|&y| inst.part_of(y) == inst.part_of(0)));
    }

    #[test]
    fn tiny_restriction_starts_in_queue() {
        let mut inst = complete_instance(3, 40);
        let x = inst.xparts[0].first().unwrap();
        inst.restrict[x] = VertexSet::new(inst.gamma.n());
        let q = initial_queue(&inst, &inst.h.vertex_set());
        assert!(q.contains(x));
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn near_threshold_vertex_is_enqueued() {
        // Shrink I_y to just above the threshold inside V^main, then embed a
        // neighbour off y's candidates so |A^main(y)| drops below it.
        let mut inst = complete_instance(3, 60);
        let y = 1;
        let x = 0;
        assert!(inst.h.has_edge(x, y));
        let i = inst.part_of(y);
        let main: Vec<usize> = inst.splits[i].main.to_vec();
        let st0 = PartialEmbedding::new(&inst);
        let need = queue_threshold(&inst, &st0, y).ceil() as usize;
        inst.restrict[y] = VertexSet::from_ids(inst.gamma.n(), main[..need].iter().copied());
        // Drop G-edges from one host vertex of x's part into all of I_y.
        let vx = inst.splits[inst.part_of(x)].main.first().unwrap();
        let mut g = inst.g.clone();
        g = {
            let mut out = Graph::empty(g.n());
            for (a, b) in g.edges() {
                let cut = (a == vx && main[..need].contains(&b)) || (b == vx && main[..need].contains(&a));
                if !cut {
                    out.add_edge(a, b);
                }
            }
            out
        };
        inst.g = g;
        let mut st = PartialEmbedding::new(&inst);
        let domain = inst.h.vertex_set();
        let mut q = Queue::new(inst.h.n());
        st.extend(&inst, x, vx).unwrap();
        let added = update_queue(&inst, &st, &mut q, &domain, x, 1);
        assert!(added.contains(&y));
    }

    #[test]
    fn incremental_queue_matches_full_scan() {
        for seed in 0..3 {
            let inst = random_instance(seed);
            let domain = inst.h.vertex_set();
            let mut st = PartialEmbedding::new(&inst);
            let mut q = initial_queue(&inst, &domain);
            let mut rng = Rng::new(seed);
            for t in 1..=100 {
                let Some(x) = (0..inst.h.n()).filter(|&x| !st.is_embedded(x) && !st.a(x).is_empty()).choose(&mut rng) else { break };
                let v = st.a(x).iter().choose(&mut rng).unwrap();
                st.extend(&inst, x, v).unwrap();
                q.settle(x);
                let expect = full_scan_queue(&inst, &st, &q, &domain);
                let added = update_queue(&inst, &st, &mut q, &domain, x, t);
                assert_eq!(VertexSet::from_ids(inst.h.n(), added), expect);
            }
        }
    }
}
