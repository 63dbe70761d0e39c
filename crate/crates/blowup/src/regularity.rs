//! Sparse regularity verifiers.
//!
//! A pair `(A, B)` is `(ε, d, p)`-lower-regular in `G` when every `A' ⊆ A`,
//! `B' ⊆ B` with `|A'| ≥ ε|A|`, `|B'| ≥ ε|B|` has p-density at least `d − ε`.
//! It is fully regular when some `d' ≥ d` has every such subpair at `d' ± ε`.

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexSet};
use crate::rng::Rng;

/// Largest side the exact verifiers accept by default.
pub const EXACT_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegularityError {
    #[error("side of size {size} exceeds the exact-mode cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("sampling gap {gap} must lie in (0, eps = {eps})")]
    BadGap { gap: f64, eps: f64 },
    #[error("edge probability must be positive, got {0}")]
    BadP(f64),
    #[error("G-edge {0}-{1} is missing from the host")]
    NotSubgraph(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    pub eps: f64,
    pub d: f64,
    pub p: f64,
}

impl RegParams {
    pub fn new(eps: f64, d: f64, p: f64) -> Self {
        RegParams { eps, d, p }
    }

    fn floor_density(&self) -> f64 {
        self.d - self.eps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Certified,
    Witness,
    Inconclusive,
}

/// A subpair together with its p-density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subpair {
    pub a: VertexSet,
    pub b: VertexSet,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegVerdict {
    pub kind: VerdictKind,
    /// The violating subpair (for full regularity: the lowest-density one).
    pub witness: Option<Subpair>,
    /// For a two-sided violation of full regularity: a subpair more than `2ε` denser than `witness`.
    pub partner: Option<Subpair>,
    /// A common density `d'` when full regularity is certified.
    pub d_prime: Option<f64>,
    pub checks: usize,
}

impl RegVerdict {
    fn certified(checks: usize, d_prime: Option<f64>) -> Self {
        RegVerdict { kind: VerdictKind::Certified, witness: None, partner: None, d_prime, checks }
    }

    fn witness(w: Subpair, partner: Option<Subpair>, checks: usize) -> Self {
        RegVerdict { kind: VerdictKind::Witness, witness: Some(w), partner, d_prime: None, checks }
    }

    fn inconclusive(checks: usize) -> Self {
        RegVerdict { kind: VerdictKind::Inconclusive, witness: None, partner: None, d_prime: None, checks }
    }

    pub fn is_certified(&self) -> bool {
        self.kind == VerdictKind::Certified
    }

    pub fn is_witness(&self) -> bool {
        self.kind == VerdictKind::Witness
    }
}

/// Smallest subset size allowed by the `ε|S|` threshold (at least one).
pub fn min_subset_size(eps: f64, len: usize) -> usize {
    ((eps * len as f64 - 1e-9).ceil().max(1.0) as usize).min(len.max(1))
}

fn density(g: &Graph, a: &VertexSet, b: &VertexSet, p: f64) -> f64 {
    let e: usize = a.iter().map(|u| g.degree_into(u, b)).sum();
    e as f64 / (p * a.len() as f64 * b.len() as f64)
}

fn check_p(p: f64) -> Result<(), RegularityError> {
    if p > 0.0 {
        Ok(())
    } else {
        Err(RegularityError::BadP(p))
    }
}

/// Re-checks a lower-regularity witness from scratch: sizes, containment and density.
pub fn lower_witness_is_valid(g: &Graph, a: &VertexSet, b: &VertexSet, prm: &RegParams, w: &Subpair) -> bool {
    let sizes_ok = w.a.len() >= min_subset_size(prm.eps, a.len()) && w.b.len() >= min_subset_size(prm.eps, b.len());
    sizes_ok
        && w.a.is_subset(a)
        && w.b.is_subset(b)
        && (density(g, &w.a, &w.b, prm.p) - w.density).abs() < 1e-9
        && w.density < prm.floor_density()
}

/// Re-checks a full-regularity verdict witness: either a lower violation or a
/// pair of subpairs whose densities differ by more than `2ε`.
pub fn full_witness_is_valid(g: &Graph, a: &VertexSet, b: &VertexSet, prm: &RegParams, v: &RegVerdict) -> bool {
    let Some(w) = &v.witness else { return false };
    match &v.partner {
        None => lower_witness_is_valid(g, a, b, prm, w),
        Some(q) => {
            let ok = |s: &Subpair| {
                s.a.len() >= min_subset_size(prm.eps, a.len())
                    && s.b.len() >= min_subset_size(prm.eps, b.len())
                    && s.a.is_subset(a)
                    && s.b.is_subset(b)
                    && (density(g, &s.a, &s.b, prm.p) - s.density).abs() < 1e-9
            };
            ok(w) && ok(q) && q.density - w.density > 2.0 * prm.eps
        }
    }
}

/// Per-size extreme subpairs over all qualifying `A'`, found exactly.
struct ExactScan {
    a_ids: Vec<usize>,
    b_ids: Vec<usize>,
    /// Bit `i` of `masks[j]` is set when `b_ids[j] ~ a_ids[i]`.
    masks: Vec<u32>,
    sa: usize,
    sb: usize,
    universe: usize,
}

impl ExactScan {
    fn new(g: &Graph, a: &VertexSet, b: &VertexSet, eps: f64, cap: usize) -> Result<Self, RegularityError> {
        for s in [a, b] {
            if s.len() > cap.min(31) {
                return Err(RegularityError::TooLarge { size: s.len(), cap });
            }
        }
        let a_ids = a.to_vec();
        let b_ids = b.to_vec();
        let masks = b_ids
            .iter()
            .map(|&v| a_ids.iter().enumerate().fold(0u32, |m, (i, &u)| if g.has_edge(u, v) { m | 1 << i } else { m }))
            .collect();
        Ok(ExactScan {
            sa: min_subset_size(eps, a_ids.len()),
            sb: min_subset_size(eps, b_ids.len()),
            universe: a.universe(),
            a_ids,
            b_ids,
            masks,
        })
    }

    fn subpair(&self, amask: u32, b_order: &[usize], s: usize, edges: usize, p: f64) -> Subpair {
        let n = self.universe;
        let a = VertexSet::from_ids(n, (0..self.a_ids.len()).filter(|&i| amask >> i & 1 == 1).map(|i| self.a_ids[i]));
        let b = VertexSet::from_ids(n, b_order[..s].iter().map(|&j| self.b_ids[j]));
        let density = edges as f64 / (p * a.len() as f64 * s as f64);
        Subpair { a, b, density }
    }
}

/// Visits every qualifying `A'` (in decreasing bitmask order, so `A' = A` first) and, for each
/// size `s` of `B'`, the minimum- and maximum-density `B'` of that size.
/// The visitor returns `false` to stop.
fn scan_extremes<F>(scan: &ExactScan, mut visit: F) -> usize
where
    F: FnMut(u32, usize, &[usize], usize, &[usize], usize) -> bool,
{
    let na = scan.a_ids.len();
    let nb = scan.b_ids.len();
    let mut checks = 0;
    if na == 0 || nb == 0 {
        return 0;
    }
    let mut asc: Vec<usize> = (0..nb).collect();
    let mut desc: Vec<usize> = (0..nb).collect();
    let mut deg = vec![0usize; nb];
    for amask in (1u32..(1u32 << na)).rev() {
        if (amask.count_ones() as usize) < scan.sa {
            continue;
        }
        for j in 0..nb {
            deg[j] = (scan.masks[j] & amask).count_ones() as usize;
        }
        asc.sort_by_key(|&j| (deg[j], j));
        desc.sort_by_key(|&j| (std::cmp::Reverse(deg[j]), j));
        let total: usize = deg.iter().sum();
        let (mut lo, mut hi) = (total, total);
        for s in (scan.sb..=nb).rev() {
            if s < nb {
                lo -= deg[asc[s]];
                hi -= deg[desc[s]];
            }
            checks += 1;
            if !visit(amask, s, &asc, lo, &desc, hi) {
                return checks;
            }
        }
    }
    checks
}

/// Exact lower-regularity check for sides of at most [`EXACT_CAP`] vertices.
///
/// Returns the first violating subpair in enumeration order: `A'` by
/// decreasing bitmask over the sorted members of `A` (so the whole pair comes
/// first), then `|B'|` decreasing, with `B'` the lowest-degree vertices into
/// `A'` (ties by id).
pub fn lower_regular_exact(g: &Graph, a: &VertexSet, b: &VertexSet, prm: &RegParams) -> Result<RegVerdict, RegularityError> {
    lower_regular_exact_with_cap(g, a, b, prm, EXACT_CAP)
}

pub fn lower_regular_exact_with_cap(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    prm: &RegParams,
    cap: usize,
) -> Result<RegVerdict, RegularityError> {
    check_p(prm.p)?;
    let scan = ExactScan::new(g, a, b, prm.eps, cap)?;
    let floor = prm.floor_density();
    let mut found = None;
    let checks = scan_extremes(&scan, |amask, s, asc, lo, _, _| {
        let k = amask.count_ones() as f64;
        if (lo as f64) < floor * prm.p * k * s as f64 {
            found = Some(scan.subpair(amask, asc, s, lo, prm.p));
            return false;
        }
        true
    });
    Ok(match found {
        Some(w) => RegVerdict::witness(w, None, checks),
        None => RegVerdict::certified(checks, None),
    })
}

/// Exact full-regularity check: certified with `d' = max(d, (m + M)/2)` when
/// the extreme subpair densities `m ≤ M` satisfy `M − m ≤ 2ε` and `m + ε ≥ d`.
pub fn full_regular_exact(g: &Graph, a: &VertexSet, b: &VertexSet, prm: &RegParams) -> Result<RegVerdict, RegularityError> {
    check_p(prm.p)?;
    let scan = ExactScan::new(g, a, b, prm.eps, EXACT_CAP)?;
    let mut min: Option<(f64, u32, usize, Vec<usize>, usize)> = None;
    let mut max: Option<(f64, u32, usize, Vec<usize>, usize)> = None;
    let checks = scan_extremes(&scan, |amask, s, asc, lo, desc, hi| {
        let denom = prm.p * amask.count_ones() as f64 * s as f64;
        let (dlo, dhi) = (lo as f64 / denom, hi as f64 / denom);
        if min.as_ref().is_none_or(|m| dlo < m.0) {
            min = Some((dlo, amask, s, asc.to_vec(), lo));
        }
        if max.as_ref().is_none_or(|m| dhi > m.0) {
            max = Some((dhi, amask, s, desc.to_vec(), hi));
        }
        true
    });
    let (Some(mn), Some(mx)) = (min, max) else {
        return Ok(RegVerdict::certified(checks, Some(prm.d)));
    };
    let low = scan.subpair(mn.1, &mn.3, mn.2, mn.4, prm.p);
    if mn.0 < prm.floor_density() {
        return Ok(RegVerdict::witness(low, None, checks));
    }
    if mx.0 - mn.0 > 2.0 * prm.eps {
        let high = scan.subpair(mx.1, &mx.3, mx.2, mx.4, prm.p);
        return Ok(RegVerdict::witness(low, Some(high), checks));
    }
    Ok(RegVerdict::certified(checks, Some(prm.d.max((mn.0 + mx.0) / 2.0))))
}

/// Regularity parameters `ε_{a,b}` indexed by the number of embedded
/// neighbours on each side: a geometric interpolation from `ε` (at `a + b = 0`)
/// to `ε'` (at `a + b = 2Δ`), nondecreasing in both indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsLattice {
    pub eps: f64,
    pub eps_prime: f64,
    pub delta: usize,
}

impl EpsLattice {
    pub fn new(eps: f64, eps_prime: f64, delta: usize) -> Self {
        EpsLattice { eps, eps_prime, delta }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        let top = (2 * self.delta).max(1) as f64;
        let t = ((a + b) as f64 / top).min(1.0);
        self.eps * (self.eps_prime / self.eps).powf(t)
    }
}

/// Sampling effort for the randomized verifiers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    /// Certification margin: every checked subpair must clear `d − eps_gap`.
    pub eps_gap: f64,
    /// Maximum number of subpair densities evaluated.
    pub budget: usize,
}

impl SampleBudget {
    /// `eps_gap = ε/2`, `budget = 200·⌈1/ε⌉²`.
    pub fn defaults(eps: f64) -> Self {
        let k = (1.0 / eps).ceil() as usize;
        SampleBudget { eps_gap: eps / 2.0, budget: 200 * k * k }
    }
}

/// Which regularity verifier to run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verifier {
    Exact,
    Sampled(SampleBudget),
    /// Exact when both sides fit under [`EXACT_CAP`], sampled otherwise.
    Auto(SampleBudget),
}

fn extreme_vertices(g: &Graph, from: &[usize], into: &VertexSet, k: usize, lowest: bool) -> Vec<usize> {
    let mut keyed: Vec<(usize, usize)> = from.iter().map(|&v| (g.degree_into(v, into), v)).collect();
    if lowest {
        keyed.sort_unstable();
    } else {
        keyed.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    }
    keyed.into_iter().take(k).map(|(_, v)| v).collect()
}

/// Equitable split of `ids` into as many cells as keep every cell at least `min` large.
fn cells(ids: &[usize], min: usize) -> Vec<Vec<usize>> {
    let k = (ids.len() / min.max(1)).max(1);
    let mut out = vec![Vec::new(); k];
    for (i, &v) in ids.iter().enumerate() {
        out[i % k].push(v);
    }
    out
}

#[derive(Default)]
struct Extremes {
    min: Option<Subpair>,
    max: Option<Subpair>,
}

impl Extremes {
    fn record(&mut self, sa: VertexSet, sb: VertexSet, density: f64) {
        if self.min.as_ref().is_none_or(|m| density < m.density) {
            self.min = Some(Subpair { a: sa.clone(), b: sb.clone(), density });
        }
        if self.max.as_ref().is_none_or(|m| density > m.density) {
            self.max = Some(Subpair { a: sa, b: sb, density });
        }
    }

    fn lo(&self) -> f64 {
        self.min.as_ref().map_or(f64::INFINITY, |m| m.density)
    }

    fn hi(&self) -> f64 {
        self.max.as_ref().map_or(f64::NEG_INFINITY, |m| m.density)
    }
}

/// Densities seen so far. `cert` holds the whole pair, refinement cells and
/// uniform samples; `search` holds the descents, which may only produce witnesses.
struct Tracker<'a> {
    g: &'a Graph,
    p: f64,
    universe: usize,
    checks: usize,
    cert: Extremes,
    search: Extremes,
}

impl Tracker<'_> {
    fn eval(&mut self, a: &[usize], b: &[usize], searching: bool) {
        let sa = VertexSet::from_ids(self.universe, a.iter().copied());
        let sb = VertexSet::from_ids(self.universe, b.iter().copied());
        let density = density(self.g, &sa, &sb, self.p);
        self.checks += 1;
        if searching { &mut self.search } else { &mut self.cert }.record(sa, sb, density);
    }

    /// Lowest density over every check.
    fn lowest(&self) -> Option<&Subpair> {
        match (&self.cert.min, &self.search.min) {
            (Some(c), Some(s)) => Some(if s.density < c.density { s } else { c }),
            (c, s) => c.as_ref().or(s.as_ref()),
        }
    }

    fn highest(&self) -> Option<&Subpair> {
        match (&self.cert.max, &self.search.max) {
            (Some(c), Some(s)) => Some(if s.density > c.density { s } else { c }),
            (c, s) => c.as_ref().or(s.as_ref()),
        }
    }

    fn min_density(&self) -> f64 {
        self.cert.lo().min(self.search.lo())
    }

    fn spread(&self) -> f64 {
        match (self.lowest(), self.highest()) {
            (Some(lo), Some(hi)) => hi.density - lo.density,
            _ => 0.0,
        }
    }
}

/// Whole pair, the cells of a random equitable refinement, then rounds of one
/// uniform threshold-size sample plus alternating best-response descents from
/// random threshold-size subsets, until a genuine violation appears or the
/// budget runs out.
fn sample_extremes<'a>(
    g: &'a Graph,
    a: &VertexSet,
    b: &VertexSet,
    prm: &RegParams,
    budget: &SampleBudget,
    rng: &mut Rng,
    full: bool,
) -> Tracker<'a> {
    let mut t = Tracker { g, p: prm.p, universe: a.universe(), checks: 0, cert: Extremes::default(), search: Extremes::default() };
    let a_ids = a.to_vec();
    let b_ids = b.to_vec();
    let sa = min_subset_size(prm.eps, a_ids.len());
    let sb = min_subset_size(prm.eps, b_ids.len());
    let violated = |t: &Tracker| t.min_density() < prm.floor_density() || (full && t.spread() > 2.0 * prm.eps);

    t.eval(&a_ids, &b_ids, false);
    let mut a_shuf = a_ids.clone();
    let mut b_shuf = b_ids.clone();
    a_shuf.shuffle(rng);
    b_shuf.shuffle(rng);
    for ca in cells(&a_shuf, sa) {
        for cb in cells(&b_shuf, sb) {
            t.eval(&ca, &cb, false);
        }
    }
    let directions: &[bool] = if full { &[true, false] } else { &[true] };
    let n = a.universe();
    while t.checks < budget.budget && !violated(&t) {
        let ua: Vec<usize> = a_ids.choose_multiple(rng, sa).copied().collect();
        let ub: Vec<usize> = b_ids.choose_multiple(rng, sb).copied().collect();
        t.eval(&ua, &ub, false);
        for &lowest in directions {
            let mut aa: Vec<usize> = a_ids.choose_multiple(rng, sa).copied().collect();
            let mut bb = extreme_vertices(g, &b_ids, &VertexSet::from_ids(n, aa.iter().copied()), sb, lowest);
            t.eval(&aa, &bb, true);
            for _ in 0..2 {
                aa = extreme_vertices(g, &a_ids, &VertexSet::from_ids(n, bb.iter().copied()), sa, lowest);
                t.eval(&aa, &bb, true);
                bb = extreme_vertices(g, &b_ids, &VertexSet::from_ids(n, aa.iter().copied()), sb, lowest);
                t.eval(&aa, &bb, true);
            }
        }
    }
    t
}

fn check_gap(prm: &RegParams, budget: &SampleBudget) -> Result<(), RegularityError> {
    check_p(prm.p)?;
    if budget.eps_gap > 0.0 && budget.eps_gap < prm.eps {
        Ok(())
    } else {
        Err(RegularityError::BadGap { gap: budget.eps_gap, eps: prm.eps })
    }
}

/// Randomized lower-regularity check.
///
/// Returns `Witness` only for a subpair that genuinely violates `d − ε`,
/// `Certified` when the whole pair, the refinement cells and the uniform
/// samples all clear `d − eps_gap`, and `Inconclusive` otherwise. Descents
/// only hunt for witnesses.
pub fn lower_regular_sampled(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    prm: &RegParams,
    budget: &SampleBudget,
    rng: &mut Rng,
) -> Result<RegVerdict, RegularityError> {
    check_gap(prm, budget)?;
    if a.is_empty() || b.is_empty() {
        return Ok(RegVerdict::certified(0, None));
    }
    let t = sample_extremes(g, a, b, prm, budget, rng, false);
    Ok(if t.min_density() < prm.floor_density() {
        RegVerdict::witness(t.lowest().expect("at least one check").clone(), None, t.checks)
    } else if t.cert.lo() < prm.d - budget.eps_gap {
        RegVerdict::inconclusive(t.checks)
    } else {
        RegVerdict::certified(t.checks, None)
    })
}

/// Randomized full-regularity check around the estimate `d' = max(d, d_p(A, B))`.
///
/// Witnesses are genuine: a subpair below `d − ε`, or two subpairs more than
/// `2ε` apart. Certified when the non-descent densities lie within `d' ± eps_gap`.
pub fn full_regular_sampled(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    prm: &RegParams,
    budget: &SampleBudget,
    rng: &mut Rng,
) -> Result<RegVerdict, RegularityError> {
    check_gap(prm, budget)?;
    if a.is_empty() || b.is_empty() {
        return Ok(RegVerdict::certified(0, Some(prm.d)));
    }
    let d_prime = prm.d.max(density(g, a, b, prm.p));
    let t = sample_extremes(g, a, b, prm, budget, rng, true);
    Ok(if t.min_density() < prm.floor_density() {
        RegVerdict::witness(t.lowest().expect("at least one check").clone(), None, t.checks)
    } else if t.spread() > 2.0 * prm.eps {
        RegVerdict::witness(t.lowest().expect("checked").clone(), t.highest().cloned(), t.checks)
    } else if t.cert.lo() >= d_prime - budget.eps_gap && t.cert.hi() <= d_prime + budget.eps_gap {
        RegVerdict::certified(t.checks, Some(d_prime))
    } else {
        RegVerdict::inconclusive(t.checks)
    })
}

/// Lower-regularity with the chosen verifier.
pub fn verify_lower(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    prm: &RegParams,
    verifier: &Verifier,
    rng: &mut Rng,
) -> Result<RegVerdict, RegularityError> {
    match verifier {
        Verifier::Exact => lower_regular_exact(g, a, b, prm),
        Verifier::Sampled(budget) => lower_regular_sampled(g, a, b, prm, budget, rng),
        Verifier::Auto(budget) => {
            if a.len() <= EXACT_CAP && b.len() <= EXACT_CAP {
                lower_regular_exact(g, a, b, prm)
            } else {
                lower_regular_sampled(g, a, b, prm, budget, rng)
            }
        }
    }
}

/// Vertices violating the minimum-degree half of super-regularity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperRegReport {
    pub failing_a: Vec<usize>,
    pub failing_b: Vec<usize>,
}

impl SuperRegReport {
    pub fn is_clean(&self) -> bool {
        self.failing_a.is_empty() && self.failing_b.is_empty()
    }
}

/// Lists `u ∈ A` with `deg_G(u; B) ≤ (d − ε)·max{p|B|, deg_Γ(u; B)/2}`, and symmetrically for `B`.
///
/// The pair is super-regular iff it is regular and both lists are empty.
pub fn check_super_regular(
    g: &Graph,
    gamma: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    prm: &RegParams,
) -> Result<SuperRegReport, RegularityError> {
    if let Some((u, v)) = g.first_edge_not_in(gamma) {
        return Err(RegularityError::NotSubgraph(u, v));
    }
    let failing = |side: &VertexSet, other: &VertexSet| -> Vec<usize> {
        side.iter()
            .filter(|&u| {
                let floor = prm.floor_density() * (prm.p * other.len() as f64).max(gamma.degree_into(u, other) as f64 / 2.0);
                g.degree_into(u, other) as f64 <= floor
            })
            .collect()
    };
    Ok(SuperRegReport { failing_a: failing(a, b), failing_b: failing(b, a) })
}

/// Outcome of an inheritance measurement over the probe vertices `Z`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InheritanceReport {
    /// Probe vertices whose neighbourhood pair has a genuine violation.
    pub failures: Vec<usize>,
    /// Probe vertices the sampled verifier could neither certify nor refute.
    pub inconclusive: Vec<usize>,
    pub tested: usize,
}

/// Regularity of a pair whose sides may be too small for the subset
/// quantifier to bite: an empty side fails when `d − ε > 0`, and a side
/// smaller than `1/ε` fails when the whole pair is below `d − ε`.
pub fn small_side_verdict(g: &Graph, a: &VertexSet, b: &VertexSet, prm: &RegParams) -> Option<bool> {
    if a.is_empty() || b.is_empty() {
        return Some(prm.floor_density() <= 0.0);
    }
    let small = (a.len() as f64) < 1.0 / prm.eps || (b.len() as f64) < 1.0 / prm.eps;
    small.then(|| density(g, a, b, prm.p) >= prm.floor_density())
}

/// For each `z ∈ Z`, tests `(N_Γ(z; X), Y)`, or `(N_Γ(z; X), N_Γ(z; Y))` when
/// `two_sided`, for lower-regularity in `G` and reports the failures.
#[allow(clippy::too_many_arguments)]
pub fn inheritance_failures(
    gamma: &Graph,
    g: &Graph,
    x: &VertexSet,
    y: &VertexSet,
    z: &VertexSet,
    prm: &RegParams,
    two_sided: bool,
    verifier: &Verifier,
    rng: &Rng,
) -> Result<InheritanceReport, RegularityError> {
    let mut report = InheritanceReport::default();
    for v in z.iter() {
        report.tested += 1;
        let a = gamma.neighbors(v).intersection(x);
        let b = if two_sided { gamma.neighbors(v).intersection(y) } else { y.clone() };
        if let Some(ok) = small_side_verdict(g, &a, &b, prm) {
            if !ok {
                report.failures.push(v);
            }
            continue;
        }
        let mut stream = rng.derive_indexed("inheritance", v as u64);
        let verdict = verify_lower(g, &a, &b, prm, verifier, &mut stream)?;
        match verdict.kind {
            VerdictKind::Witness => report.failures.push(v),
            VerdictKind::Inconclusive => report.inconclusive.push(v),
            VerdictKind::Certified => {}
        }
    }
    Ok(report)
}
