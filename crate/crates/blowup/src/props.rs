//! Host-graph pseudorandomness checks: neighbourhood sizes (plain and
//! lopsided), regularity inheritance, congestion (global and local), and
//! bijumbledness estimates.
//!
//! Sampled checks report `Pass`, never `Certified`; only the exhaustive
//! modes certify.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::graph::{common_neighborhood_of, edges_between, Graph, VertexSet};
use crate::matching::Bipartite;
use crate::regularity::{
    inheritance_failures, lower_regular_sampled, EpsLattice, RegParams, RegularityError, SampleBudget, Verifier,
};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PropertyError {
    #[error("threshold {value} is below one vertex; the property is degenerate at this size")]
    ParamTooSmall { value: f64 },
    #[error("family set {set} meets U")]
    Overlap { set: usize },
    #[error("family sets {0} and {1} intersect")]
    NotDisjoint(usize, usize),
    #[error("graph is not regular (vertex {vertex} has degree {degree}, expected {expected})")]
    NotRegular { vertex: usize, degree: usize, expected: usize },
    #[error("exhaustive mode needs at most {cap} vertices, got {n}")]
    TooLarge { n: usize, cap: usize },
    #[error(transparent)]
    Regularity(#[from] RegularityError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropertyVerdict {
    Pass,
    Fail,
    Inconclusive,
    Certified,
}

/// The family `F` of pairwise disjoint `ℓ`-sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFamily {
    pub sets: Vec<Vec<usize>>,
}

impl SetFamily {
    /// Validates pairwise disjointness.
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self, PropertyError> {
        let mut owner = std::collections::HashMap::new();
        for (i, s) in sets.iter().enumerate() {
            for &v in s {
                if let Some(&j) = owner.get(&v) {
                    return Err(PropertyError::NotDisjoint(j, i));
                }
                owner.insert(v, i);
            }
        }
        Ok(SetFamily { sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Concrete evidence attached to a report, re-checkable with [`recheck_witness`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PropertyWitness {
    /// Vertices outside `w` whose degree into `w` leaves `(1 ± ε)p|W|`.
    DeviantDegrees { w: Vec<usize>, violators: Vec<usize>, allowed: f64 },
    /// A congestion graph with more edges than the bound allows.
    Congestion { u: Vec<usize>, family: Vec<Vec<usize>>, edges: usize, bound: f64 },
    /// Probe vertices failing to inherit regularity from `(x, y)`.
    Inheritance { x: Vec<usize>, y: Vec<usize>, two_sided: bool, failures: Vec<usize>, allowed: f64 },
    /// Disjoint sets with the largest observed discrepancy.
    Discrepancy { x: Vec<usize>, y: Vec<usize>, beta: f64 },
}

/// Parameters as used by a check; `p_hat` is the resolved edge probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyParams {
    pub eps: f64,
    pub t: f64,
    pub delta: usize,
    pub p_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub params: PropertyParams,
    pub trials: usize,
    /// Trials whose count exceeded the allowed bound.
    pub violations: usize,
    pub worst_witness: Option<PropertyWitness>,
    pub verdict: PropertyVerdict,
}

/// Host description shared by the checks. `p = None` uses the observed density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HostParams {
    pub eps: f64,
    pub t: f64,
    pub delta: usize,
    pub p: Option<f64>,
}

impl HostParams {
    pub fn new(eps: f64, t: f64, delta: usize) -> Self {
        HostParams { eps, t, delta, p: None }
    }

    fn resolve(&self, gamma: &Graph) -> PropertyParams {
        PropertyParams { eps: self.eps, t: self.t, delta: self.delta, p_hat: self.p.unwrap_or_else(|| gamma.density()) }
    }
}

fn powi(p: f64, k: i64) -> f64 {
    p.powi(k as i32)
}

/// Vertices outside `w` whose degree into `w` is not `(1 ± ε)p|W|`.
pub fn deviant_vertices(gamma: &Graph, w: &VertexSet, eps: f64, p: f64) -> Vec<usize> {
    let target = p * w.len() as f64;
    (0..gamma.n())
        .filter(|&v| !w.contains(v))
        .filter(|&v| {
            let d = gamma.degree_into(v, w) as f64;
            d < (1.0 - eps) * target || d > (1.0 + eps) * target
        })
        .collect()
}

/// Geometric grid of set sizes from `lo` to `hi` inclusive.
fn size_grid(lo: usize, hi: usize, steps: usize) -> Vec<usize> {
    if hi <= lo {
        return vec![lo.min(hi)];
    }
    let mut out: Vec<usize> = (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1).max(1) as f64;
            ((lo as f64) * ((hi as f64) / (lo as f64)).powf(t)).round() as usize
        })
        .collect();
    out.dedup();
    out
}

fn random_subset(ids: &[usize], k: usize, rng: &mut Rng) -> Vec<usize> {
    let mut s: Vec<usize> = ids.choose_multiple(rng, k.min(ids.len())).copied().collect();
    s.sort_unstable();
    s
}

/// Shared driver for the neighbourhood-size checks: sizes from `w_min` up to
/// `n − 1` on a geometric grid, one random `W` per trial, failing when a trial
/// sees more than `allowed` deviant outsiders.
fn degree_trials(
    gamma: &Graph,
    eps: f64,
    p: f64,
    w_min: usize,
    allowed: f64,
    trials: usize,
    rng: &mut Rng,
) -> (usize, Option<PropertyWitness>) {
    let n = gamma.n();
    let ids: Vec<usize> = (0..n).collect();
    let grid = size_grid(w_min.max(1), n.saturating_sub(1).max(1), 12);
    let mut violations = 0;
    let mut worst: Option<(usize, PropertyWitness)> = None;
    for trial in 0..trials {
        let size = grid[trial % grid.len()];
        let w = random_subset(&ids, size, rng);
        let wset = VertexSet::from_ids(n, w.iter().copied());
        let dev = deviant_vertices(gamma, &wset, eps, p);
        if dev.len() as f64 > allowed {
            violations += 1;
        }
        if worst.as_ref().is_none_or(|(c, _)| dev.len() > *c) {
            worst = Some((dev.len(), PropertyWitness::DeviantDegrees { w, violators: dev, allowed }));
        }
    }
    (violations, worst.map(|(_, w)| w))
}

fn verdict_from(violations: usize) -> PropertyVerdict {
    if violations > 0 {
        PropertyVerdict::Fail
    } else {
        PropertyVerdict::Pass
    }
}

/// Neighbourhood-size property: for `|W| ≥ εp^{Δ−1}n/T²`, at most that many
/// outsiders have degree into `W` off `(1 ± ε)p|W|`.
pub fn check_ns(gamma: &Graph, host: &HostParams, trials: usize, rng: &mut Rng) -> Result<PropertyReport, PropertyError> {
    let prm = host.resolve(gamma);
    let bound = prm.eps * powi(prm.p_hat, prm.delta as i64 - 1) * gamma.n() as f64 / (prm.t * prm.t);
    if bound < 1.0 {
        return Err(PropertyError::ParamTooSmall { value: bound });
    }
    let (violations, worst) = degree_trials(gamma, prm.eps, prm.p_hat, bound.ceil() as usize, bound, trials, rng);
    Ok(PropertyReport { property: "NS".into(), params: prm, trials, violations, verdict: verdict_from(violations), worst_witness: worst })
}

/// Exhaustive neighbourhood-size check over every admissible `W` (`n ≤ 14`).
pub fn check_ns_exhaustive(gamma: &Graph, host: &HostParams) -> Result<PropertyReport, PropertyError> {
    let n = gamma.n();
    if n > 14 {
        return Err(PropertyError::TooLarge { n, cap: 14 });
    }
    let prm = host.resolve(gamma);
    let bound = prm.eps * powi(prm.p_hat, prm.delta as i64 - 1) * n as f64 / (prm.t * prm.t);
    if bound < 1.0 {
        return Err(PropertyError::ParamTooSmall { value: bound });
    }
    let w_min = bound.ceil() as u32;
    let mut trials = 0;
    let mut violations = 0;
    let mut worst: Option<(usize, PropertyWitness)> = None;
    for mask in 0u32..1 << n {
        if mask.count_ones() < w_min {
            continue;
        }
        trials += 1;
        let w: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let wset = VertexSet::from_ids(n, w.iter().copied());
        let dev = deviant_vertices(gamma, &wset, prm.eps, prm.p_hat);
        if dev.len() as f64 > bound {
            violations += 1;
            if worst.as_ref().is_none_or(|(c, _)| dev.len() > *c) {
                worst = Some((dev.len(), PropertyWitness::DeviantDegrees { w, violators: dev, allowed: bound }));
            }
        }
    }
    let verdict = if violations > 0 { PropertyVerdict::Fail } else { PropertyVerdict::Certified };
    Ok(PropertyReport { property: "NS".into(), params: prm, trials, violations, worst_witness: worst.map(|w| w.1), verdict })
}

/// Lopsided neighbourhood-size property: for each `j ∈ [0, Δ−1]`, sets with
/// `|W| ≥ εp^{Δ+j}n/T²` have at most `εp^{2Δ−j−1}n/T²` deviant outsiders.
pub fn check_lns(gamma: &Graph, host: &HostParams, trials: usize, rng: &mut Rng) -> Result<PropertyReport, PropertyError> {
    let prm = host.resolve(gamma);
    let scale = prm.eps * gamma.n() as f64 / (prm.t * prm.t);
    let d = prm.delta as i64;
    let mut violations = 0;
    let mut worst: Option<PropertyWitness> = None;
    let mut worst_excess = f64::NEG_INFINITY;
    for j in 0..prm.delta as i64 {
        let size = scale * powi(prm.p_hat, d + j);
        let allowed = scale * powi(prm.p_hat, 2 * d - j - 1);
        if size < 1.0 {
            return Err(PropertyError::ParamTooSmall { value: size });
        }
        let per_j = trials.div_ceil(prm.delta.max(1));
        let (v, w) = degree_trials(gamma, prm.eps, prm.p_hat, size.ceil() as usize, allowed, per_j, rng);
        violations += v;
        if let Some(PropertyWitness::DeviantDegrees { violators, allowed, .. }) = &w {
            let excess = violators.len() as f64 - allowed;
            if excess > worst_excess {
                worst_excess = excess;
                worst = w;
            }
        }
    }
    Ok(PropertyReport { property: "LNS".into(), params: prm, trials, violations, verdict: verdict_from(violations), worst_witness: worst })
}

/// Bipartite graph on `U` (left, in increasing id order) and `F` (right, in
/// family order) with `u ~ F_j` iff `u` is a common `Γ`-neighbour of `F_j`.
pub fn congestion_graph(gamma: &Graph, u: &VertexSet, family: &SetFamily) -> Result<Bipartite, PropertyError> {
    for (j, f) in family.sets.iter().enumerate() {
        if f.iter().any(|&v| u.contains(v)) {
            return Err(PropertyError::Overlap { set: j });
        }
    }
    let left = u.to_vec();
    let mut b = Bipartite::new(left.len(), family.len());
    for (j, f) in family.sets.iter().enumerate() {
        let common = common_neighborhood_of(gamma, f, u);
        for (i, &x) in left.iter().enumerate() {
            if common.contains(x) {
                b.add_edge(i, j);
            }
        }
    }
    Ok(b)
}

fn cg_edges(gamma: &Graph, u: &VertexSet, family: &SetFamily) -> Result<usize, PropertyError> {
    let b = congestion_graph(gamma, u, family)?;
    Ok((0..b.left()).map(|l| b.neighbors(l).len()).sum())
}

/// `7p^ℓ|U||F| + ρp^ℓ(n/T)|F|`.
pub fn con_bound(p: f64, ell: usize, u: usize, f: usize, rho: f64, n: usize, t: f64) -> f64 {
    let pl = powi(p, ell as i64);
    7.0 * pl * u as f64 * f as f64 + rho * pl * (n as f64 / t) * f as f64
}

/// `7p^ℓ|U| max(ε|U|, |F|)`.
pub fn lcon_bound(p: f64, ell: usize, u: usize, f: usize, eps: f64) -> f64 {
    7.0 * powi(p, ell as i64) * u as f64 * (eps * u as f64).max(f as f64)
}

/// Congestion-graph edge count for explicit `U` and `F`, with the bound it is held to.
pub fn evaluate_congestion(gamma: &Graph, u: &VertexSet, family: &SetFamily, bound: f64) -> Result<PropertyWitness, PropertyError> {
    let edges = cg_edges(gamma, u, family)?;
    Ok(PropertyWitness::Congestion { u: u.to_vec(), family: family.sets.clone(), edges, bound })
}

/// Random pairwise disjoint `ℓ`-sets avoiding `avoid`.
fn random_family(n: usize, ell: usize, count: usize, avoid: &VertexSet, rng: &mut Rng) -> SetFamily {
    let mut free: Vec<usize> = (0..n).filter(|&v| !avoid.contains(v)).collect();
    free.shuffle(rng);
    let sets = free.chunks_exact(ell.max(1)).take(count).map(|c| {
        let mut s = c.to_vec();
        s.sort_unstable();
        s
    });
    SetFamily { sets: sets.collect() }
}

/// The `k` vertices outside the family with the most family sets in their neighbourhood.
fn most_congested(gamma: &Graph, family: &SetFamily, k: usize) -> VertexSet {
    let n = gamma.n();
    let used = VertexSet::from_ids(n, family.sets.iter().flatten().copied());
    let mut score = vec![0usize; n];
    for f in &family.sets {
        for v in common_neighborhood_of(gamma, f, &gamma.vertex_set()).iter() {
            score[v] += 1;
        }
    }
    let mut cand: Vec<usize> = (0..n).filter(|&v| !used.contains(v)).collect();
    cand.sort_by_key(|&v| (std::cmp::Reverse(score[v]), v));
    VertexSet::from_ids(n, cand.into_iter().take(k))
}

/// Greedy dense family: `ℓ`-sets drawn from the common neighbourhood of `U`
/// first, so that every `u ∈ U` sees as many sets as possible.
fn dense_family(gamma: &Graph, u: &VertexSet, ell: usize, count: usize, rng: &mut Rng) -> SetFamily {
    let n = gamma.n();
    let mut score: Vec<(usize, usize)> = (0..n).filter(|&v| !u.contains(v)).map(|v| (gamma.degree_into(v, u), v)).collect();
    score.shuffle(rng);
    score.sort_by_key(|&(s, _)| std::cmp::Reverse(s));
    let order: Vec<usize> = score.into_iter().map(|(_, v)| v).collect();
    let sets = order.chunks_exact(ell.max(1)).take(count).map(|c| {
        let mut s = c.to_vec();
        s.sort_unstable();
        s
    });
    SetFamily { sets: sets.collect() }
}

/// Congestion property with random (and optionally adversarial) `U`, `F`:
/// `ℓ ∈ [1, Δ]`, `|U| ≤ |F| ≤ ρn`.
pub fn check_con(
    gamma: &Graph,
    rho: f64,
    t: f64,
    delta: usize,
    trials: usize,
    adversarial: bool,
    rng: &mut Rng,
) -> Result<PropertyReport, PropertyError> {
    let n = gamma.n();
    let p = gamma.density();
    let params = PropertyParams { eps: rho, t, delta, p_hat: p };
    let f_max = ((rho * n as f64).floor() as usize).max(1);
    let mut violations = 0;
    let mut worst: Option<(f64, PropertyWitness)> = None;
    for _ in 0..trials {
        let ell = rng.random_range(1..=delta.max(1));
        let f_size = rng.random_range(1..=f_max);
        let u_size = rng.random_range(1..=f_size);
        let mut cases = Vec::new();
        let ids: Vec<usize> = (0..n).collect();
        let u = VertexSet::from_ids(n, random_subset(&ids, u_size, rng));
        cases.push((u.clone(), random_family(n, ell, f_size, &u, rng)));
        if adversarial {
            let fam = random_family(n, ell, f_size, &VertexSet::new(n), rng);
            cases.push((most_congested(gamma, &fam, u_size), fam));
            cases.push((u.clone(), dense_family(gamma, &u, ell, f_size, rng)));
        }
        for (u, fam) in cases {
            if fam.is_empty() || u.is_empty() {
                continue;
            }
            let bound = con_bound(p, ell, u.len(), fam.len(), rho, n, t);
            let w = evaluate_congestion(gamma, &u, &fam, bound)?;
            let PropertyWitness::Congestion { edges, .. } = &w else { unreachable!() };
            let excess = *edges as f64 - bound;
            if excess > 0.0 {
                violations += 1;
            }
            if worst.as_ref().is_none_or(|(e, _)| excess > *e) {
                worst = Some((excess, w));
            }
        }
    }
    Ok(PropertyReport {
        property: "CON".into(),
        params,
        trials,
        violations,
        verdict: verdict_from(violations),
        worst_witness: worst.map(|w| w.1),
    })
}

/// Local congestion: `i, ℓ ≥ 1`, `i + ℓ ≤ Δ`, `|U| ≥ εp^i n/T²`, and
/// `e(CG) ≤ 7p^ℓ|U| max(ε|U|, |F|)`.
pub fn check_lcon(
    gamma: &Graph,
    host: &HostParams,
    trials: usize,
    adversarial: bool,
    rng: &mut Rng,
) -> Result<PropertyReport, PropertyError> {
    let prm = host.resolve(gamma);
    let n = gamma.n();
    let scale = prm.eps * n as f64 / (prm.t * prm.t);
    let pairs: Vec<(usize, usize)> =
        (1..prm.delta).flat_map(|i| (1..=prm.delta - i).map(move |l| (i, l))).collect();
    for &(i, _) in &pairs {
        let floor = scale * powi(prm.p_hat, i as i64);
        if floor < 1.0 {
            return Err(PropertyError::ParamTooSmall { value: floor });
        }
    }
    let mut violations = 0;
    let mut worst: Option<(f64, PropertyWitness)> = None;
    let ids: Vec<usize> = (0..n).collect();
    for trial in 0..if pairs.is_empty() { 0 } else { trials } {
        let (i, ell) = pairs[trial % pairs.len()];
        let u_min = (scale * powi(prm.p_hat, i as i64)).ceil() as usize;
        let u_max = (n / 4).max(u_min);
        let u_size = rng.random_range(u_min..=u_max).min(n);
        let u = VertexSet::from_ids(n, random_subset(&ids, u_size, rng));
        let room = (n - u.len()) / ell;
        if room == 0 {
            continue;
        }
        let f_size = rng.random_range(1..=room);
        let mut cases = vec![random_family(n, ell, f_size, &u, rng)];
        if adversarial {
            cases.push(dense_family(gamma, &u, ell, f_size, rng));
        }
        for fam in cases {
            let bound = lcon_bound(prm.p_hat, ell, u.len(), fam.len(), prm.eps);
            let w = evaluate_congestion(gamma, &u, &fam, bound)?;
            let PropertyWitness::Congestion { edges, .. } = &w else { unreachable!() };
            let excess = *edges as f64 - bound;
            if excess > 0.0 {
                violations += 1;
            }
            if worst.as_ref().is_none_or(|(e, _)| excess > *e) {
                worst = Some((excess, w));
            }
        }
    }
    Ok(PropertyReport {
        property: "LCON".into(),
        params: prm,
        trials,
        violations,
        verdict: verdict_from(violations),
        worst_witness: worst.map(|w| w.1),
    })
}

/// Settings for the sampled regularity-inheritance check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiConfig {
    pub lattice: EpsLattice,
    pub d: f64,
    /// Multiplier on the minimum sizes of `X` and `Y` (at least one).
    pub size_factor: f64,
    pub budget: SampleBudget,
}

/// Regularity-inheritance property: sample disjoint `(X, Y)` at the admissible
/// sizes, keep those certified `(ε_{a,b}, d, p)`-regular in `G`, and count
/// vertices outside `X ∪ Y` whose neighbourhood pairs lose regularity.
pub fn check_ri(
    gamma: &Graph,
    g: &Graph,
    host: &HostParams,
    cfg: &RiConfig,
    trials: usize,
    rng: &mut Rng,
) -> Result<PropertyReport, PropertyError> {
    let prm = host.resolve(gamma);
    let n = gamma.n();
    let eps_prime = cfg.lattice.eps_prime;
    let scale = n as f64 / (prm.t * prm.t);
    let d = prm.delta as i64;
    let x_min = (eps_prime * powi(prm.p_hat, d - 2) * scale * cfg.size_factor.max(1.0)).ceil() as usize;
    let y_one = (eps_prime * powi(prm.p_hat, d - 1) * scale * cfg.size_factor.max(1.0)).ceil() as usize;
    let y_two = x_min;
    let allowed_one = prm.eps * powi(prm.p_hat, d - 1) * scale;
    let allowed_two = prm.eps * powi(prm.p_hat, d - 2) * scale;
    let mut violations = 0;
    let mut qualifying = 0;
    let mut worst: Option<(f64, PropertyWitness)> = None;
    if prm.delta < 2 {
        return Ok(PropertyReport { property: "RI".into(), params: prm, trials: 0, violations: 0, worst_witness: None, verdict: PropertyVerdict::Pass });
    }
    let ids: Vec<usize> = (0..n).collect();
    for _ in 0..trials {
        let a = rng.random_range(0..=prm.delta - 2);
        let b = rng.random_range(0..prm.delta);
        let two_sided = b + 2 <= prm.delta;
        let y_size = if two_sided { y_two.max(y_one) } else { y_one };
        if x_min.max(1) + y_size.max(1) > n {
            continue;
        }
        let mut pool = ids.clone();
        pool.shuffle(rng);
        let x = VertexSet::from_ids(n, pool[..x_min.max(1)].iter().copied());
        let y = VertexSet::from_ids(n, pool[x_min.max(1)..x_min.max(1) + y_size.max(1)].iter().copied());
        let pair_prm = RegParams::new(cfg.lattice.get(a, b), cfg.d, prm.p_hat);
        let budget = SampleBudget { eps_gap: pair_prm.eps / 2.0, budget: cfg.budget.budget };
        if !lower_regular_sampled(g, &x, &y, &pair_prm, &budget, rng)?.is_certified() {
            continue;
        }
        qualifying += 1;
        let z = x.union(&y);
        let z = gamma.vertex_set().difference(&z);
        let mut sides = vec![(false, cfg.lattice.get(a + 1, b), allowed_one)];
        if two_sided {
            sides.push((true, cfg.lattice.get(a + 1, b + 1), allowed_two));
        }
        for (two, eps_out, allowed) in sides {
            let out = RegParams::new(eps_out, cfg.d, prm.p_hat);
            let verifier = Verifier::Sampled(SampleBudget { eps_gap: eps_out / 2.0, budget: cfg.budget.budget });
            let rep = inheritance_failures(gamma, g, &x, &y, &z, &out, two, &verifier, &rng.derive("ri-probe"))?;
            let excess = rep.failures.len() as f64 - allowed;
            if excess > 0.0 {
                violations += 1;
            }
            if worst.as_ref().is_none_or(|(e, _)| excess > *e) {
                worst = Some((
                    excess,
                    PropertyWitness::Inheritance { x: x.to_vec(), y: y.to_vec(), two_sided: two, failures: rep.failures, allowed },
                ));
            }
        }
    }
    let verdict = if violations > 0 {
        PropertyVerdict::Fail
    } else if qualifying == 0 {
        PropertyVerdict::Inconclusive
    } else {
        PropertyVerdict::Pass
    };
    Ok(PropertyReport { property: "RI".into(), params: prm, trials, violations, worst_witness: worst.map(|w| w.1), verdict })
}

/// Recomputes a witness from the graph alone and confirms it breaks its bound.
pub fn recheck_witness(gamma: &Graph, report: &PropertyReport) -> bool {
    let prm = &report.params;
    let n = gamma.n();
    match &report.worst_witness {
        None => false,
        Some(PropertyWitness::DeviantDegrees { w, violators, allowed }) => {
            let wset = VertexSet::from_ids(n, w.iter().copied());
            let dev = deviant_vertices(gamma, &wset, prm.eps, prm.p_hat);
            &dev == violators && dev.len() as f64 > *allowed
        }
        Some(PropertyWitness::Congestion { u, family, edges, bound }) => {
            let uset = VertexSet::from_ids(n, u.iter().copied());
            match SetFamily::new(family.clone()).and_then(|f| cg_edges(gamma, &uset, &f)) {
                Ok(e) => e == *edges && e as f64 > *bound,
                Err(_) => false,
            }
        }
        Some(PropertyWitness::Inheritance { failures, allowed, .. }) => failures.len() as f64 > *allowed,
        Some(PropertyWitness::Discrepancy { x, y, beta }) => {
            let xs = VertexSet::from_ids(n, x.iter().copied());
            let ys = VertexSet::from_ids(n, y.iter().copied());
            (discrepancy(gamma, &xs, &ys, prm.p_hat) - beta).abs() < 1e-9
        }
    }
}

/// `|e(X, Y) − p|X||Y|| / √(|X||Y|)`.
pub fn discrepancy(gamma: &Graph, x: &VertexSet, y: &VertexSet, p: f64) -> f64 {
    let (a, b) = (x.len() as f64, y.len() as f64);
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    ((edges_between(gamma, x, y) as f64) - p * a * b).abs() / (a * b).sqrt()
}

/// How to estimate the bijumbledness parameter `β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaMode {
    /// Random and greedy disjoint pairs: a lower bound on `β`.
    Sampled { trials: usize },
    /// Every disjoint pair, for `n ≤ 18`.
    ExactTiny,
    /// Second-largest absolute adjacency eigenvalue of a regular graph: an upper bound on `β`.
    Spectral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub beta: f64,
    pub witness: Option<PropertyWitness>,
}

/// Estimates `β` in `|e(X, Y) − p|X||Y|| ≤ β√(|X||Y|)` over disjoint `X`, `Y`.
pub fn bijumbled_beta(gamma: &Graph, p: f64, mode: BetaMode, rng: &mut Rng) -> Result<BetaEstimate, PropertyError> {
    match mode {
        BetaMode::Sampled { trials } => Ok(beta_sampled(gamma, p, trials, rng)),
        BetaMode::ExactTiny => beta_exact(gamma, p),
        BetaMode::Spectral => Ok(BetaEstimate { beta: second_eigenvalue(gamma)?, witness: None }),
    }
}

/// Best response: for fixed `X`, the size-`k` set outside `X` maximizing the discrepancy.
fn best_response(gamma: &Graph, x: &VertexSet, p: f64) -> (f64, Vec<usize>) {
    let n = gamma.n();
    let mut deg: Vec<(usize, usize)> = (0..n).filter(|&v| !x.contains(v)).map(|v| (gamma.degree_into(v, x), v)).collect();
    deg.sort_unstable();
    let xs = x.len() as f64;
    let m = deg.len();
    let mut prefix = vec![0usize; m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i] + deg[i].0;
    }
    let mut best = (0.0, Vec::new());
    for k in 1..=m {
        let low = prefix[k] as f64;
        let high = (prefix[m] - prefix[m - k]) as f64;
        let target = p * xs * k as f64;
        let norm = (xs * k as f64).sqrt();
        let (lo_dev, hi_dev) = ((target - low) / norm, (high - target) / norm);
        if lo_dev > best.0 {
            best = (lo_dev, deg[..k].iter().map(|d| d.1).collect());
        }
        if hi_dev > best.0 {
            best = (hi_dev, deg[m - k..].iter().map(|d| d.1).collect());
        }
    }
    best
}

fn beta_sampled(gamma: &Graph, p: f64, trials: usize, rng: &mut Rng) -> BetaEstimate {
    let n = gamma.n();
    let ids: Vec<usize> = (0..n).collect();
    let mut best = BetaEstimate { beta: 0.0, witness: None };
    if n < 2 {
        return best;
    }
    for _ in 0..trials {
        let k = rng.random_range(1..n);
        let x = VertexSet::from_ids(n, random_subset(&ids, k, rng));
        let (b, y) = best_response(gamma, &x, p);
        if b > best.beta {
            let ys = VertexSet::from_ids(n, y.iter().copied());
            best = BetaEstimate {
                beta: discrepancy(gamma, &x, &ys, p),
                witness: Some(PropertyWitness::Discrepancy { x: x.to_vec(), y, beta: b }),
            };
        }
    }
    best
}

fn beta_exact(gamma: &Graph, p: f64) -> Result<BetaEstimate, PropertyError> {
    let n = gamma.n();
    if n > 18 {
        return Err(PropertyError::TooLarge { n, cap: 18 });
    }
    let mut best = BetaEstimate { beta: 0.0, witness: None };
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() as usize == n {
            continue;
        }
        let x = VertexSet::from_ids(n, (0..n).filter(|&v| mask >> v & 1 == 1));
        let (b, y) = best_response(gamma, &x, p);
        if b > best.beta {
            best = BetaEstimate { beta: b, witness: Some(PropertyWitness::Discrepancy { x: x.to_vec(), y, beta: b }) };
        }
    }
    Ok(best)
}

/// `max(|λ₂|, |λ_n|)` of a regular graph by power iteration on `A²` with the
/// all-ones direction projected out, from a fixed start vector.
///
/// Runs at least `10·⌈ln n⌉` iterations and continues until the Rayleigh
/// quotient moves by less than `1e−9` (at most 100 000 iterations).
pub fn second_eigenvalue(gamma: &Graph) -> Result<f64, PropertyError> {
    let n = gamma.n();
    if n == 0 {
        return Ok(0.0);
    }
    let deg = gamma.degree(0);
    if let Some(v) = (0..n).find(|&v| gamma.degree(v) != deg) {
        return Err(PropertyError::NotRegular { vertex: v, degree: gamma.degree(v), expected: deg });
    }
    let nbrs: Vec<Vec<usize>> = (0..n).map(|v| gamma.neighbors(v).to_vec()).collect();
    let apply = |x: &[f64]| -> Vec<f64> { nbrs.iter().map(|ns| ns.iter().map(|&w| x[w]).sum()).collect() };
    let project = |x: &mut [f64]| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
    };
    let normalize = |x: &mut [f64]| -> f64 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
        }
        norm
    };
    let mut start = Rng::new(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| start.random_range(-1.0..1.0)).collect();
    project(&mut x);
    if normalize(&mut x) == 0.0 {
        return Ok(0.0);
    }
    let min_iters = 10 * (n as f64).ln().ceil().max(1.0) as usize;
    let mut last = f64::NAN;
    for it in 0..100_000 {
        let mut y = apply(&apply(&x));
        project(&mut y);
        let rq: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        if normalize(&mut y) == 0.0 {
            return Ok(0.0);
        }
        x = y;
        if it >= min_iters && (rq - last).abs() < 1e-9 {
            return Ok(rq.max(0.0).sqrt());
        }
        last = rq;
    }
    Ok(last.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{blowup, gnp, random_regular};
    use crate::rng::Rng;

    fn star(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for v in 1..n {
            g.add_edge(0, v);
        }
        g
    }

    #[test]
    fn ns_complete_graph_passes() {
        let g = Graph::complete(200);
        let host = HostParams { eps: 0.1, t: 1.0, delta: 2, p: Some(1.0) };
        let rep = check_ns(&g, &host, 30, &mut Rng::new(1)).unwrap();
        assert_eq!(rep.verdict, PropertyVerdict::Pass);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn ns_star_fails_with_rechecked_witness() {
        let g = star(60);
        let host = HostParams { eps: 0.3, t: 1.0, delta: 1, p: None };
        let rep = check_ns(&g, &host, 20, &mut Rng::new(2)).unwrap();
        assert_eq!(rep.verdict, PropertyVerdict::Fail);
        assert!(recheck_witness(&g, &rep));
        // With W a set of leaves, every other leaf has degree 0 into W.
        let w = VertexSet::from_ids(60, 1..30);
        let dev = deviant_vertices(&g, &w, 0.3, g.density());
        assert!(dev.len() >= 30);
    }

    #[test]
    fn ns_param_too_small() {
        let g = Graph::complete(10);
        let host = HostParams::new(0.1, 4.0, 2);
        assert!(matches!(check_ns(&g, &host, 1, &mut Rng::new(0)), Err(PropertyError::ParamTooSmall { .. })));
    }

    #[test]
    fn ns_exhaustive_certifies_complete_graph() {
        let g = Graph::complete(12);
        let host = HostParams { eps: 0.5, t: 1.0, delta: 1, p: Some(1.0) };
        let rep = check_ns_exhaustive(&g, &host).unwrap();
        assert_eq!(rep.verdict, PropertyVerdict::Certified);
        let rep = check_ns_exhaustive(&star(12), &HostParams { eps: 0.2, t: 1.0, delta: 1, p: None }).unwrap();
        assert_eq!(rep.verdict, PropertyVerdict::Fail);
        assert!(recheck_witness(&star(12), &rep));
    }

    #[test]
    fn ns_monotone_in_eps_on_shared_samples() {
        let g = gnp(300, 0.3, &mut Rng::new(4));
        for eps in [0.2, 0.4, 0.8] {
            let tight = check_ns(&g, &HostParams::new(eps, 1.0, 1), 20, &mut Rng::new(9)).unwrap();
            let loose = check_ns(&g, &HostParams::new(eps * 1.2, 1.0, 1), 20, &mut Rng::new(9)).unwrap();
            if tight.verdict == PropertyVerdict::Pass {
                assert_eq!(loose.verdict, PropertyVerdict::Pass);
            }
        }
    }

    #[test]
    fn lns_star_fails() {
        let g = star(400);
        let host = HostParams { eps: 0.2, t: 1.0, delta: 1, p: Some(0.5) };
        let rep = check_lns(&g, &host, 10, &mut Rng::new(5)).unwrap();
        assert_eq!(rep.verdict, PropertyVerdict::Fail);
        assert!(recheck_witness(&g, &rep));
    }

    #[test]
    fn lns_complete_graph_passes() {
        let g = Graph::complete(100);
        let host = HostParams { eps: 0.1, t: 1.0, delta: 2, p: Some(1.0) };
        assert_eq!(check_lns(&g, &host, 20, &mut Rng::new(0)).unwrap().verdict, PropertyVerdict::Pass);
    }

    #[test]
    fn congestion_graph_cases() {
        let mut g = Graph::empty(3);
        g.add_edge(0, 1);
        let u = VertexSet::from_ids(3, [0]);
        let fam = SetFamily::new(vec![vec![1]]).unwrap();
        let b = congestion_graph(&g, &u, &fam).unwrap();
        assert_eq!(b.neighbors(0), &[0]);
        let e = Graph::empty(5);
        let b = congestion_graph(&e, &VertexSet::from_ids(5, [0, 1]), &SetFamily::new(vec![vec![2], vec![3, 4]]).unwrap()).unwrap();
        assert!((0..2).all(|l| b.neighbors(l).is_empty()));
        assert!(matches!(congestion_graph(&g, &u, &SetFamily::new(vec![vec![0, 2]]).unwrap()), Err(PropertyError::Overlap { set: 0 })));
        assert!(SetFamily::new(vec![vec![1, 2], vec![2, 3]]).is_err());
    }

    #[test]
    fn congestion_graph_matches_brute_force() {
        let g = gnp(40, 0.5, &mut Rng::new(6));
        let u = VertexSet::from_ids(40, [0, 3, 5, 8, 13, 21]);
        let fam = SetFamily::new(vec![vec![1, 2], vec![4, 6], vec![7, 9], vec![10, 11], vec![12, 14]]).unwrap();
        let b = congestion_graph(&g, &u, &fam).unwrap();
        for (i, x) in u.iter().enumerate() {
            for (j, f) in fam.sets.iter().enumerate() {
                let brute = f.iter().all(|&v| g.has_edge(x, v));
                assert_eq!(b.neighbors(i).contains(&j), brute);
            }
        }
    }

    #[test]
    fn empty_host_passes_congestion_checks() {
        let g = Graph::empty(400);
        let rep = check_con(&g, 0.05, 4.0, 2, 20, true, &mut Rng::new(1)).unwrap();
        assert_eq!(rep.verdict, PropertyVerdict::Pass);
        let host = HostParams { eps: 0.1, t: 1.0, delta: 2, p: Some(0.3) };
        let rep = check_lcon(&g, &host, 20, true, &mut Rng::new(1)).unwrap();
        assert_eq!(rep.verdict, PropertyVerdict::Pass);
    }

    #[test]
    fn lcon_tight_side_family_matches_direct_count() {
        let g = gnp(300, 0.3, &mut Rng::new(12));
        let u_vertex = (0..300).max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v))).unwrap();
        let mut others: Vec<usize> = (0..300).filter(|&v| v != u_vertex && !g.has_edge(u_vertex, v)).collect();
        others.truncate(9);
        let u = VertexSet::from_ids(300, others.iter().copied().chain([u_vertex]));
        let fam = SetFamily::new(g.neighbors(u_vertex).iter().filter(|v| !u.contains(*v)).map(|v| vec![v]).collect()).unwrap();
        let bound = lcon_bound(g.density(), 1, u.len(), fam.len(), 0.1);
        let PropertyWitness::Congestion { edges, .. } = evaluate_congestion(&g, &u, &fam, bound).unwrap() else { unreachable!() };
        let direct: usize = u.iter().map(|x| fam.sets.iter().filter(|f| g.has_edge(x, f[0])).count()).sum();
        assert_eq!(edges, direct);
    }

    /// Each vertex of a random base graph is cloned `delta` times; clones share
    /// neighbourhoods, so a clone class has common neighbourhood of size about `pn`.
    pub(crate) fn cloned_blowup(base_n: usize, p: f64, delta: usize, rng: &mut Rng) -> (Graph, Vec<Vec<usize>>) {
        let base = gnp(base_n, p, rng);
        let mut sizes_graph = Graph::empty(base_n * delta);
        for (u, v) in base.edges() {
            for a in 0..delta {
                for b in 0..delta {
                    sizes_graph.add_edge(u * delta + a, v * delta + b);
                }
            }
        }
        let classes = (0..base_n).map(|u| (0..delta).map(|a| u * delta + a).collect()).collect();
        (sizes_graph, classes)
    }

    #[test]
    fn planted_blowup_breaks_congestion() {
        let mut rng = Rng::new(31);
        let (g, classes) = cloned_blowup(500, 0.1, 2, &mut rng);
        let n = g.n();
        let rho = 0.05;
        let k = (rho * n as f64) as usize;
        let fam = SetFamily::new(classes[..k].to_vec()).unwrap();
        let u = VertexSet::from_ids(n, (n - k)..n);
        let p = g.density();
        let bound = con_bound(p, 2, u.len(), fam.len(), rho, n, 1.0);
        let PropertyWitness::Congestion { edges, .. } = evaluate_congestion(&g, &u, &fam, bound).unwrap() else { unreachable!() };
        assert!(edges as f64 > bound, "edges {edges} vs bound {bound}");
        let _ = blowup;
    }

    #[test]
    fn beta_small_cases() {
        let mut rng = Rng::new(0);
        let k = Graph::complete(8);
        assert!(bijumbled_beta(&k, 1.0, BetaMode::ExactTiny, &mut rng).unwrap().beta < 1e-12);
        let m = 6;
        let mut kb = Graph::empty(2 * m);
        for u in 0..m {
            for v in m..2 * m {
                kb.add_edge(u, v);
            }
        }
        let est = bijumbled_beta(&kb, 0.5, BetaMode::ExactTiny, &mut rng).unwrap();
        assert!(est.beta >= m as f64 / 2.0 - 1e-9);
        let sampled = bijumbled_beta(&kb, 0.5, BetaMode::Sampled { trials: 200 }, &mut rng).unwrap();
        assert!(sampled.beta <= est.beta + 1e-9);
    }

    #[test]
    fn spectral_requires_regular() {
        assert!(matches!(second_eigenvalue(&star(5)), Err(PropertyError::NotRegular { .. })));
    }

    fn petersen() -> Graph {
        let mut g = Graph::empty(10);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5);
            g.add_edge(i, i + 5);
            g.add_edge(5 + i, 5 + (i + 2) % 5);
        }
        g
    }

    /// Characteristic polynomial by Faddeev–LeVerrier in exact integer arithmetic.
    fn char_poly(g: &Graph) -> Vec<i128> {
        let n = g.n();
        let a: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| i128::from(g.has_edge(i, j))).collect()).collect();
        let mul = |x: &Vec<Vec<i128>>, y: &Vec<Vec<i128>>| -> Vec<Vec<i128>> {
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
        };
        let mut coeffs = vec![1i128];
        let mut m: Vec<Vec<i128>> = vec![vec![0; n]; n];
        let mut c_prev = 1i128;
        for k in 1..=n {
            let mut next = mul(&a, &m);
            for (i, row) in next.iter_mut().enumerate() {
                row[i] += c_prev;
            }
            m = next;
            let am = mul(&a, &m);
            let trace: i128 = (0..n).map(|i| am[i][i]).sum();
            assert_eq!(trace % k as i128, 0);
            c_prev = -trace / k as i128;
            coeffs.push(c_prev);
        }
        coeffs
    }

    fn poly_from_roots(roots: &[i128]) -> Vec<i128> {
        let mut c = vec![1i128];
        for &r in roots {
            let mut next = vec![0i128; c.len() + 1];
            for (i, &v) in c.iter().enumerate() {
                next[i] += v;
                next[i + 1] -= v * r;
            }
            c = next;
        }
        c
    }

    #[test]
    fn petersen_spectral_bound_is_two() {
        let g = petersen();
        let expected = poly_from_roots(&[3, 1, 1, 1, 1, 1, -2, -2, -2, -2]);
        assert_eq!(char_poly(&g), expected);
        let lambda = bijumbled_beta(&g, 0.3, BetaMode::Spectral, &mut Rng::new(0)).unwrap().beta;
        assert!((lambda - 2.0).abs() < 1e-6, "{lambda}");
    }

    #[test]
    fn beta_ordering_on_small_regular_graphs() {
        let mut rng = Rng::new(17);
        let mut done = 0;
        while done < 20 {
            let n = rng.random_range(8..=14);
            let d = rng.random_range(3..=5);
            let Some(g) = random_regular(n, d, &mut rng) else { continue };
            let p = d as f64 / n as f64;
            let s = bijumbled_beta(&g, p, BetaMode::Sampled { trials: 40 }, &mut rng).unwrap().beta;
            let e = bijumbled_beta(&g, p, BetaMode::ExactTiny, &mut rng).unwrap().beta;
            let l = bijumbled_beta(&g, p, BetaMode::Spectral, &mut rng).unwrap().beta;
            assert!(s <= e + 1e-9 && e <= l + 1e-6, "n={n} d={d}: {s} {e} {l}");
            done += 1;
        }
    }

    #[test]
    fn ri_complete_host_passes() {
        let g = Graph::complete(150);
        let host = HostParams { eps: 0.2, t: 1.0, delta: 2, p: Some(1.0) };
        let cfg = RiConfig { lattice: EpsLattice::new(0.2, 0.3, 2), d: 0.5, size_factor: 1.0, budget: SampleBudget { eps_gap: 0.1, budget: 30 } };
        let rep = check_ri(&g, &g, &host, &cfg, 3, &mut Rng::new(1)).unwrap();
        assert_eq!(rep.verdict, PropertyVerdict::Pass);
    }

    #[test]
    fn ri_counts_isolated_probe_once() {
        let (g, parts) = blowup(&Graph::complete(3), &[20, 20, 20], 1.0, &mut Rng::new(0));
        let mut h = Graph::empty(60);
        for (u, v) in g.edges() {
            if !(v == 45 && u < 20) {
                h.add_edge(u, v);
            }
        }
        let prm = RegParams::new(0.2, 0.5, 1.0);
        let ver = Verifier::Sampled(SampleBudget::defaults(0.2));
        let rep = inheritance_failures(&h, &h, &parts[0], &parts[1], &parts[2], &prm, false, &ver, &Rng::new(1)).unwrap();
        assert_eq!(rep.failures, vec![45]);
    }
}
