//! The randomized greedy embedding algorithms, queue embedding, buffer-defect
//! repair, the final buffer matching, and the pipeline that chains them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::embed::{
    bad_set, check_gpe, full_scan_queue, initial_queue, update_queue, BadMode, EmbedError, GpeMode, PartialEmbedding,
    Queue,
};
use crate::graph::{degeneracy_order, VertexSet};
use crate::matching::{hall_violator_from, max_matching, Bipartite};
use crate::order::{
    build_tau_buffer_first, move_buffer_last, pi_tau, validate_bounded_order, BoundedOrderSpec, EmbedOrder,
};
use crate::partition::{floor_of, BlowupInstance, PartitionReport, Slot};
use crate::regularity::{verify_lower, RegParams, RegularityError, Verifier};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Random,
    Bijumbled,
    Degenerate,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Random, Mode::Bijumbled, Mode::Degenerate];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Random => "random",
            Mode::Bijumbled => "bijumbled",
            Mode::Degenerate => "degenerate",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Mode::Random),
            "bijumbled" => Ok(Mode::Bijumbled),
            "degenerate" => Ok(Mode::Degenerate),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

/// Coefficients of the failure floor `c·μζ(dp)^{π*}|V(x)|` and of the clique
/// degree floor `c·μd·max(p|V_j|, deg_Γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub failure: f64,
    pub mindeg: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { failure: 0.1, mindeg: 0.125 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub bad: BadMode,
    pub thresholds: Thresholds,
    /// Upper bound on greedy steps; `None` means `|V(H)|`.
    pub step_cap: Option<usize>,
    /// Run the size conditions after every extension and the queue audit after every greedy step.
    pub instrument: bool,
    /// Also run the regularity conditions after every extension.
    pub gpe_full: Option<Verifier>,
    pub trace: bool,
    /// Order supplied to the degenerate algorithm; a degeneracy order if absent.
    pub order: Option<Vec<usize>>,
    pub exceptional: Vec<usize>,
    /// Order bound `D`; derived from the degeneracy if absent.
    pub order_bound: Option<usize>,
}

impl RunConfig {
    pub fn new(mode: Mode, seed: u64) -> Self {
        RunConfig {
            mode,
            seed,
            bad: BadMode::Relaxed,
            thresholds: Thresholds::default(),
            step_cap: None,
            instrument: false,
            gpe_full: None,
            trace: false,
            order: None,
            exceptional: Vec::new(),
            order_bound: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let t = &self.thresholds;
        for (name, v) in [("failure", t.failure), ("mindeg", t.mindeg)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("threshold {name} = {v} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Rga,
    Queue,
    BufferDefects,
    BufferMatch,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Rga => "rga",
            Stage::Queue => "queue",
            Stage::BufferDefects => "buffer-defects",
            Stage::BufferMatch => "buffer-match",
            Stage::Verify => "verify",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefectSet {
    Poor,
    Deficient,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RgaError {
    #[error("no available good candidate for {x}")]
    EmptyChoiceSet { x: usize },
    #[error("{x}: {size} available good candidates, floor {floor:.3}")]
    BelowFloor { x: usize, size: usize, floor: f64 },
    #[error("no system of distinct representatives in part {part}; violator {violator:?}")]
    HallFailure { part: usize, violator: Vec<usize> },
    #[error("part {part}: {set:?} set reached {size}, cap {cap:.2}")]
    CapExceeded { part: usize, set: DefectSet, size: usize, cap: f64 },
    #[error("clique extension failed at step {step}")]
    NoExtension { step: usize },
    #[error("host vertex {v} misses the degree premise into part {part}")]
    Premise { v: usize, part: usize },
    #[error("part {part} has reserved cliques left but no host vertex to start one")]
    Exhausted { part: usize },
    #[error("part {part}: {left} buffer vertices for {right} host vertices")]
    SizeMismatch { part: usize, left: usize, right: usize },
    #[error("order rejected: {0}")]
    OrderInvalid(String),
    #[error("step cap {0} reached")]
    StepCap(usize),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Regularity(#[from] RegularityError),
}

impl RgaError {
    fn vertex(&self) -> Option<usize> {
        match self {
            RgaError::EmptyChoiceSet { x } | RgaError::BelowFloor { x, .. } => Some(*x),
            RgaError::Premise { v, .. } => Some(*v),
            RgaError::HallFailure { violator, .. } => violator.first().copied(),
            RgaError::Embed(EmbedError::AlreadyEmbedded(x)) | RgaError::Embed(EmbedError::NotAvailable { x, .. }) => Some(*x),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub x: usize,
    pub v: usize,
    pub available: usize,
    pub bad: usize,
    pub queue: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    /// Vertices that ever entered the queue, per part.
    pub queue_per_part: Vec<usize>,
    pub bad_histogram: BTreeMap<usize, usize>,
    /// For each unused host vertex before the buffer matching: how many
    /// remaining buffer vertices it is a candidate for.
    pub buffer_candidate_histogram: BTreeMap<usize, usize>,
    /// Main-slot choices drawn from a set below the failure floor.
    pub floor_shortfalls: usize,
    pub gpe_checks: usize,
    pub gpe_violations: Vec<String>,
    pub invariant_violations: Vec<String>,
    /// Per clique-buffer part: `(part, |P_i|, |D_i|)`.
    pub defects: Vec<(usize, usize, usize)>,
    pub conditions: PartitionReport,
    pub trace: Vec<TraceRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunStatus {
    Success,
    HaltFailure { stage: Stage, vertex: Option<usize>, reason: String },
    SetupInvalid { condition: String },
}

/// Totality, injectivity, edge preservation and image restrictions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingCheck {
    pub unembedded: Vec<usize>,
    /// `(x, y, v)` with `ψ(x) = ψ(y) = v`.
    pub collision: Option<(usize, usize, usize)>,
    pub non_edge: Option<(usize, usize)>,
    pub outside_restriction: Option<usize>,
}

impl EmbeddingCheck {
    pub fn is_pass(&self) -> bool {
        self.unembedded.is_empty() && self.collision.is_none() && self.non_edge.is_none() && self.outside_restriction.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub mode: Mode,
    pub seed: u64,
    pub status: RunStatus,
    pub psi: Vec<Option<usize>>,
    pub stats: RunStats,
    pub verification: Option<EmbeddingCheck>,
}

impl EmbeddingResult {
    pub fn setup_invalid(mode: Mode, seed: u64, condition: String) -> Self {
        EmbeddingResult {
            mode,
            seed,
            status: RunStatus::SetupInvalid { condition },
            psi: Vec::new(),
            stats: RunStats::default(),
            verification: None,
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == RunStatus::Success
    }
}

/// Checks `ψ` against the instance in `O(|V(H)| + e(H))` set operations.
pub fn verify_embedding(inst: &BlowupInstance, psi: &[Option<usize>]) -> EmbeddingCheck {
    let mut out = EmbeddingCheck::default();
    let mut owner: Vec<Option<usize>> = vec![None; inst.g.n()];
    for x in 0..inst.h.n() {
        match psi.get(x).copied().flatten() {
            None => out.unembedded.push(x),
            Some(v) => {
                if v >= inst.g.n() {
                    out.outside_restriction.get_or_insert(x);
                    continue;
                }
                if let Some(y) = owner[v] {
                    out.collision.get_or_insert((y, x, v));
                } else {
                    owner[v] = Some(x);
                }
                if !inst.restrict[x].contains(v) {
                    out.outside_restriction.get_or_insert(x);
                }
            }
        }
    }
    out.non_edge = inst.h.edges().find(|&(x, y)| match (psi.get(x).copied().flatten(), psi.get(y).copied().flatten()) {
        (Some(a), Some(b)) => a >= inst.g.n() || b >= inst.g.n() || !inst.g.has_edge(a, b),
        _ => false,
    });
    out
}

/// Structural preconditions of the pipeline. Regularity is not rechecked here.
pub fn validate_instance(inst: &BlowupInstance) -> PartitionReport {
    let mut rep = PartitionReport::default();
    let (nh, ng, r) = (inst.h.n(), inst.g.n(), inst.parts());
    rep.record(
        "shape",
        (|| {
            if inst.vparts.len() != r || inst.splits.len() != r || inst.xbuf.len() != r || inst.restrict.len() != nh {
                return Err("part counts disagree".into());
            }
            if inst.gamma.n() != ng || inst.restricting.len() != nh {
                return Err("vertex counts disagree".into());
            }
            if let Some(x) = (0..nh).find(|&x| inst.part_of(x) >= r) {
                return Err(format!("{x} lies in no part"));
            }
            if let Some((u, v)) = inst.g.first_edge_not_in(&inst.gamma) {
                return Err(format!("G edge {u}-{v} missing from Γ"));
            }
            Ok(())
        })(),
    );
    if !rep.is_pass() {
        return rep;
    }
    rep.record(
        "size-compatible",
        (0..r).find(|&i| inst.xparts[i].len() != inst.vparts[i].len()).map_or(Ok(()), |i| Err(format!("part {i}: |X| ≠ |V|"))),
    );
    rep.record(
        "splits",
        (0..r)
            .find(|&i| {
                let s = &inst.splits[i];
                let mut all = VertexSet::new(ng);
                let mut total = 0;
                for slot in Slot::ALL {
                    all.union_with(s.get(slot));
                    total += s.get(slot).len();
                }
                all != inst.vparts[i] || total != inst.vparts[i].len()
            })
            .map_or(Ok(()), |i| Err(format!("part {i}: splits do not partition V_i"))),
    );
    rep.record(
        "restriction",
        (0..nh).find(|&x| !inst.restrict[x].is_subset(&inst.vparts[inst.part_of(x)])).map_or(Ok(()), |x| Err(format!("I_{x} leaves V(x)"))),
    );
    rep.record(
        "buffer",
        (|| {
            let all = inst.all_buffers();
            for (i, b) in inst.xbuf.iter().enumerate() {
                if !b.is_subset(&inst.xparts[i]) {
                    return Err(format!("part {i}: buffer outside X_i"));
                }
            }
            if let Some((x, y)) = inst.h.edges().find(|&(x, y)| all.contains(x) && all.contains(y)) {
                return Err(format!("buffer vertices {x} and {y} adjacent"));
            }
            Ok(())
        })(),
    );
    rep.record(
        "reserved",
        (|| {
            let near = inst.h.ball_of_set(&inst.all_buffers(), 1);
            match inst.all_reserved().intersection(&near).first() {
                Some(x) => Err(format!("reserved vertex {x} meets a buffer neighbourhood")),
                None => Ok(()),
            }
        })(),
    );
    rep
}

/// One run's mutable state: the partial embedding, statistics and random stream.
pub struct Engine<'a> {
    pub inst: &'a BlowupInstance,
    pub cfg: &'a RunConfig,
    pub st: PartialEmbedding,
    pub stats: RunStats,
    rng: Rng,
    bad_rng: Rng,
    gpe_rng: Rng,
    t: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Variant {
    /// Queued vertices are skipped and embedded later by matching.
    Defer,
    /// Queued vertices are embedded on the spot.
    Immediate,
}

impl<'a> Engine<'a> {
    pub fn new(inst: &'a BlowupInstance, cfg: &'a RunConfig) -> Self {
        let root = Rng::new(cfg.seed);
        Engine {
            inst,
            cfg,
            st: PartialEmbedding::new(inst),
            stats: RunStats { queue_per_part: vec![0; inst.parts()], ..RunStats::default() },
            rng: root.derive("rga"),
            bad_rng: root.derive("bad-set"),
            gpe_rng: root.derive("gpe-audit"),
            t: 0,
        }
    }

    /// `c·μζ(dp)^{π*}|V(x)|`.
    pub fn failure_floor(&self, x: usize) -> f64 {
        let prm = &self.inst.params;
        let k = self.st.pi_star(self.inst, x) as i32;
        self.cfg.thresholds.failure * prm.mu * prm.zeta * (prm.d * prm.p).powi(k) * self.inst.vparts[self.inst.part_of(x)].len() as f64
    }

    fn place(&mut self, x: usize, v: usize, stage: Stage) -> Result<(), RgaError> {
        self.place_all(&[(x, v)], stage)
    }

    /// Extends by every pair, then runs the instrumented check once: the
    /// pairs form a single extension.
    fn place_all(&mut self, pairs: &[(usize, usize)], stage: Stage) -> Result<(), RgaError> {
        for &(x, v) in pairs {
            self.st.extend(self.inst, x, v)?;
            self.t += 1;
        }
        if self.cfg.instrument || self.cfg.gpe_full.is_some() {
            let mode = match self.cfg.gpe_full {
                Some(ver) => GpeMode::Full(ver),
                None => GpeMode::SizesOnly,
            };
            let rep = check_gpe(self.inst, &self.st, &mode, &mut self.gpe_rng)?;
            self.stats.gpe_checks += 1;
            for w in rep.violations {
                self.stats.gpe_violations.push(format!("{stage} t={} {:?} at {}: {}", self.t, w.clause, w.vertex, w.detail));
            }
        }
        Ok(())
    }

    fn bad(&mut self, queue: &VertexSet, x: usize) -> Result<VertexSet, RgaError> {
        let b = bad_set(self.inst, &self.st, queue, x, &self.cfg.bad, &mut self.bad_rng)?;
        *self.stats.bad_histogram.entry(b.len()).or_default() += 1;
        Ok(b)
    }

    fn pick(&mut self, set: &VertexSet) -> usize {
        let ids = set.to_vec();
        ids[self.rng.random_range(0..ids.len())]
    }

    fn greedy(&mut self, order: &[usize], variant: Variant, xe: &VertexSet) -> Result<Queue, RgaError> {
        let inst = self.inst;
        let domain = VertexSet::from_ids(inst.h.n(), order.iter().copied());
        let mut queue = initial_queue(inst, &domain);
        let cap = self.cfg.step_cap.unwrap_or(inst.h.n());
        let mut steps = 0;
        for &x in order {
            let queued = queue.contains(x);
            if queued && variant == Variant::Defer {
                continue;
            }
            if steps == cap {
                return Err(RgaError::StepCap(cap));
            }
            steps += 1;
            let target = if xe.contains(x) {
                Slot::Clique
            } else if queued {
                Slot::Queue
            } else {
                Slot::Main
            };
            let bad = self.bad(queue.members(), x)?;
            let mut choice = self.st.a_in(inst, x, target);
            choice.difference_with(&bad);
            let floor = self.failure_floor(x);
            if queued && (choice.len() as f64) < floor - inst.params.slack {
                return Err(RgaError::BelowFloor { x, size: choice.len(), floor });
            }
            if choice.is_empty() {
                return Err(RgaError::EmptyChoiceSet { x });
            }
            if !queued && (choice.len() as f64) < floor - inst.params.slack {
                self.stats.floor_shortfalls += 1;
            }
            let v = self.pick(&choice);
            let available = self.st.a(x).len();
            self.place(x, v, Stage::Rga)?;
            queue.settle(x);
            update_queue(inst, &self.st, &mut queue, &domain, x, self.t);
            if self.cfg.instrument {
                let missed = full_scan_queue(inst, &self.st, &queue, &domain);
                if let Some(y) = missed.first() {
                    self.stats.invariant_violations.push(format!("t={}: {y} below the queue threshold but not queued", self.t));
                }
            }
            if self.cfg.trace {
                self.stats.trace.push(TraceRecord { t: self.t, x, v, available, bad: bad.len(), queue: queue.len() });
            }
        }
        self.stats.steps = steps;
        for x in queue.entered().iter() {
            self.stats.queue_per_part[inst.part_of(x)] += 1;
        }
        Ok(queue)
    }

    /// Iterates `order`, skipping queued vertices; each other vertex goes
    /// uniformly into its available main candidates minus bad vertices.
    pub fn rga_random(&mut self, order: &EmbedOrder) -> Result<Queue, RgaError> {
        self.greedy(order.as_slice(), Variant::Defer, &VertexSet::new(self.inst.h.n()))
    }

    /// As [`Engine::rga_random`], but queued vertices are embedded into the
    /// queue slot when reached, halting below the failure floor.
    pub fn rga_bijumbled(&mut self, order: &EmbedOrder) -> Result<Queue, RgaError> {
        self.greedy(order.as_slice(), Variant::Immediate, &VertexSet::new(self.inst.h.n()))
    }

    /// As [`Engine::rga_bijumbled`], with exceptional vertices sent to the clique slot.
    pub fn rga_degenerate(&mut self, order: &EmbedOrder, exceptional: &VertexSet) -> Result<Queue, RgaError> {
        self.greedy(order.as_slice(), Variant::Immediate, exceptional)
    }

    /// Embeds the queued vertices part by part through a matching onto the
    /// queue slot, avoiding bad vertices taken with respect to the whole of `V(H)`.
    pub fn embed_queue(&mut self, queue: &Queue) -> Result<(), RgaError> {
        let inst = self.inst;
        let everything = VertexSet::full(inst.h.n());
        for i in 0..inst.parts() {
            let left: Vec<usize> = queue.members().intersection(&inst.xparts[i]).iter().filter(|&x| !self.st.is_embedded(x)).collect();
            if left.is_empty() {
                continue;
            }
            let right = inst.splits[i].queue.to_vec();
            let col: BTreeMap<usize, usize> = right.iter().enumerate().map(|(k, &v)| (v, k)).collect();
            let mut b = Bipartite::new(left.len(), right.len());
            for (l, &x) in left.iter().enumerate() {
                let bad = self.bad(&everything, x)?;
                let mut cand = self.st.a_in(inst, x, Slot::Queue);
                cand.difference_with(&bad);
                cand.iter().for_each(|v| b.add_edge(l, col[&v]));
            }
            let m = max_matching(&b);
            if !m.is_left_perfect() {
                let s = hall_violator_from(&b, &m).expect("an unmatched left vertex exists");
                return Err(RgaError::HallFailure { part: i, violator: s.iter().map(|l| left[l]).collect() });
            }
            for (l, &x) in left.iter().enumerate() {
                self.place(x, right[m.pair_left[l].expect("left-perfect")], Stage::Queue)?;
            }
        }
        Ok(())
    }

    fn unembedded_buffer(&self, i: usize) -> Vec<usize> {
        self.inst.xbuf[i].iter().filter(|&x| !self.st.is_embedded(x)).collect()
    }

    fn unused_in(&self, i: usize) -> Vec<usize> {
        self.inst.vparts[i].iter().filter(|&v| self.st.preimage(v).is_none()).collect()
    }

    /// Poor host vertices `P_i` and deficient buffer vertices `D_i` of a
    /// clique-buffer part, grown alternately to a fixpoint.
    pub fn identify_bad(&self, i: usize) -> Result<(VertexSet, VertexSet), RgaError> {
        let inst = self.inst;
        let prm = &inst.params;
        let dp = prm.d * prm.p;
        let delta = prm.delta as i32;
        let xi = inst.xparts[i].len() as f64;
        let vi = inst.vparts[i].len() as f64;
        let poor_floor = prm.mu * (dp / 100.0).powi(delta) * xi - prm.slack;
        let deficient_floor = prm.mu * dp.powi(delta) * vi / 4.0 - prm.slack;
        let buffers = self.unembedded_buffer(i);
        let hosts = self.unused_in(i);
        let vbuf = &inst.splits[i].buffer;
        let mut poor = VertexSet::new(inst.g.n());
        let mut deficient = VertexSet::new(inst.h.n());
        loop {
            let mut changed = false;
            let new_poor: Vec<usize> = hosts
                .iter()
                .copied()
                .filter(|&v| !poor.contains(v))
                .filter(|&v| {
                    let count = buffers.iter().filter(|&&x| !deficient.contains(x) && self.st.c(x).contains(v)).count();
                    (count as f64) < poor_floor
                })
                .collect();
            changed |= !new_poor.is_empty();
            new_poor.into_iter().for_each(|v| {
                poor.insert(v);
            });
            let new_deficient: Vec<usize> = buffers
                .iter()
                .copied()
                .filter(|&x| !deficient.contains(x))
                .filter(|&x| {
                    let mut good = self.st.a(x).intersection(vbuf);
                    good.difference_with(&poor);
                    (good.len() as f64) < deficient_floor
                })
                .collect();
            changed |= !new_deficient.is_empty();
            new_deficient.into_iter().for_each(|x| {
                deficient.insert(x);
            });
            let (pcap, dcap) = (2.0 * prm.rho * vi, 2.0 * prm.rho * xi);
            if !poor.is_empty() && poor.len() as f64 >= pcap {
                return Err(RgaError::CapExceeded { part: i, set: DefectSet::Poor, size: poor.len(), cap: pcap });
            }
            if !deficient.is_empty() && deficient.len() as f64 >= dcap {
                return Err(RgaError::CapExceeded { part: i, set: DefectSet::Deficient, size: deficient.len(), cap: dcap });
            }
            if !changed {
                return Ok((poor, deficient));
            }
        }
    }

    fn clique_premise(&self, v: usize, j: usize) -> f64 {
        let prm = &self.inst.params;
        let deg_gamma = self.inst.gamma.degree_into(v, &self.inst.vparts[j]) as f64;
        self.cfg.thresholds.mindeg * prm.mu * prm.d * (prm.p * self.inst.vparts[j].len() as f64).max(deg_gamma)
    }

    fn free_clique_slot(&self, j: usize) -> VertexSet {
        let mut s = self.inst.splits[j].clique.clone();
        s.difference_with(self.st.used());
        s
    }

    /// Extends `v ∈ V_i` to a clique `v, v_1, …, v_k` of `G` with
    /// `v_s ∈ V^c_{j_s}` unused, choosing the lowest admissible id each step.
    pub fn find_clique(&mut self, v: usize, i: usize, parts: &[usize]) -> Result<Vec<usize>, RgaError> {
        let inst = self.inst;
        let prm = &inst.params;
        let _ = i;
        let free: Vec<VertexSet> = parts.iter().map(|&j| self.free_clique_slot(j)).collect();
        let floors: Vec<f64> = parts.iter().map(|&j| self.clique_premise(v, j)).collect();
        let deg_gamma: Vec<f64> = parts.iter().map(|&j| inst.gamma.degree_into(v, &inst.vparts[j]) as f64).collect();
        for (k, &j) in parts.iter().enumerate() {
            if (inst.g.degree_into(v, &free[k]) as f64) < floors[k] - prm.slack {
                return Err(RgaError::Premise { v, part: j });
            }
        }
        let lattice = prm.lattice();
        let mut chosen: Vec<usize> = Vec::with_capacity(parts.len());
        let mut n_gamma = inst.gamma.neighbors(v).clone();
        let mut n_g = inst.g.neighbors(v).clone();
        for (s0, _) in parts.iter().enumerate() {
            let s = s0 + 1;
            let pool = n_g.intersection(&free[s0]);
            let mut found = None;
            'cand: for w in pool.iter() {
                let ng_gamma = n_gamma.intersection(inst.gamma.neighbors(w));
                let ng_g = n_g.intersection(inst.g.neighbors(w));
                let lo = (prm.p - prm.eps * prm.p).powi(s as i32);
                let hi = (prm.p + prm.eps * prm.p).powi(s as i32);
                for k in s..parts.len() {
                    let jk = parts[k];
                    let got = ng_gamma.count_and(&inst.vparts[jk]) as f64;
                    if got < lo * deg_gamma[k] - prm.slack || got > hi * deg_gamma[k] + prm.slack {
                        continue 'cand;
                    }
                    let floor = (prm.d * prm.p / 4.0).powi(s as i32) * floors[k];
                    if (ng_g.count_and(&free[k]) as f64) < floor - prm.slack {
                        continue 'cand;
                    }
                }
                if let BadMode::Oracle(verifier) = self.cfg.bad {
                    if s + 1 < parts.len() {
                        let rp = RegParams::new(lattice.get(s, s), prm.d, prm.p);
                        for k in s..parts.len() {
                            for k2 in k + 1..parts.len() {
                                let a = ng_gamma.intersection(&inst.vparts[parts[k]]);
                                let b = ng_gamma.intersection(&inst.vparts[parts[k2]]);
                                if verify_lower(&inst.g, &a, &b, &rp, &verifier, &mut self.bad_rng)?.is_witness() {
                                    continue 'cand;
                                }
                            }
                        }
                    }
                }
                found = Some((w, ng_gamma, ng_g));
                break;
            }
            let Some((w, a, b)) = found else { return Err(RgaError::NoExtension { step: s }) };
            chosen.push(w);
            n_gamma = a;
            n_g = b;
        }
        Ok(chosen)
    }

    /// `min_j deg_G(v; V^c_j \ Im) / max(p|V_j|, deg_Γ(v; V_j))` over `R′`-neighbours `j` of `v`'s part.
    pub fn mindeg(&self, v: usize) -> f64 {
        let inst = self.inst;
        let i = inst.host_part_of(v).expect("host vertex in a part");
        inst.rp
            .neighbors(i)
            .iter()
            .filter(|&j| j != i)
            .map(|j| {
                let deg = inst.g.degree_into(v, &self.free_clique_slot(j)) as f64;
                let scale = (inst.params.p * inst.vparts[j].len() as f64).max(inst.gamma.degree_into(v, &inst.vparts[j]) as f64);
                if scale > 0.0 {
                    deg / scale
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Covers poor host vertices with reserved cliques, then embeds every
    /// remaining reserved clique, and records the resulting buffer conditions.
    pub fn fix_buffer_defects(&mut self) -> Result<(), RgaError> {
        let inst = self.inst;
        let r = inst.parts();
        let mut poor_left = VertexSet::new(inst.g.n());
        for i in (0..r).filter(|&i| inst.kinds[i].clique) {
            let (poor, deficient) = self.identify_bad(i)?;
            self.stats.defects.push((i, poor.len(), deficient.len()));
            let left = deficient.to_vec();
            if !left.is_empty() {
                let right = poor.intersection(&inst.splits[i].buffer).to_vec();
                let mut b = Bipartite::new(left.len(), right.len());
                for (l, &x) in left.iter().enumerate() {
                    for (k, &v) in right.iter().enumerate() {
                        if self.st.a(x).contains(v) {
                            b.add_edge(l, k);
                        }
                    }
                }
                let m = max_matching(&b);
                if !m.is_left_perfect() {
                    let s = hall_violator_from(&b, &m).expect("an unmatched left vertex exists");
                    return Err(RgaError::HallFailure { part: i, violator: s.iter().map(|l| left[l]).collect() });
                }
                for (l, &x) in left.iter().enumerate() {
                    self.place(x, right[m.pair_left[l].expect("left-perfect")], Stage::BufferDefects)?;
                }
            }
            poor.iter().filter(|&v| self.st.preimage(v).is_none()).for_each(|v| {
                poor_left.insert(v);
            });
        }
        let mut next: Vec<usize> = vec![0; r];
        loop {
            let open: Vec<bool> = (0..r).map(|i| next[i] < inst.cliques[i].len()).collect();
            if !open.iter().any(|&o| o) {
                break;
            }
            let unused = |v: &usize| self.st.preimage(*v).is_none();
            let mut pool: Vec<usize> = poor_left.iter().filter(unused).filter(|&v| open[inst.host_part_of(v).unwrap()]).collect();
            if pool.is_empty() {
                pool = (0..r).filter(|&i| open[i]).flat_map(|i| inst.splits[i].clique.iter()).filter(unused).collect();
            }
            let Some(v) = pool
                .iter()
                .copied()
                .map(|v| (self.mindeg(v), v))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, v)| v)
            else {
                return Err(RgaError::Exhausted { part: open.iter().position(|&o| o).unwrap() });
            };
            let i = inst.host_part_of(v).unwrap();
            let clique = &inst.cliques[i][next[i]];
            next[i] += 1;
            let anchor = *clique.iter().find(|&&x| inst.part_of(x) == i).expect("reserved clique meets its part");
            let others: Vec<usize> = clique.iter().copied().filter(|&x| x != anchor).collect();
            let parts: Vec<usize> = others.iter().map(|&x| inst.part_of(x)).collect();
            let images = self.find_clique(v, i, &parts)?;
            let pairs: Vec<(usize, usize)> = std::iter::once((anchor, v)).chain(others.iter().copied().zip(images)).collect();
            self.place_all(&pairs, Stage::BufferDefects)?;
        }
        self.record_defect_conditions();
        Ok(())
    }

    fn record_defect_conditions(&mut self) {
        let inst = self.inst;
        let prm = &inst.params;
        let reserved = inst.all_reserved();
        self.stats.conditions.record(
            "BD1",
            reserved.iter().find(|&x| !self.st.is_embedded(x)).map_or(Ok(()), |x| Err(format!("reserved vertex {x} unembedded"))),
        );
        let mut bd2 = Ok(());
        let mut bd3 = Ok(());
        for i in 0..inst.parts() {
            let b = inst.kinds[i].degree as i32;
            let bufs = self.unembedded_buffer(i);
            let floor2 = prm.mu * (prm.d * prm.p).powi(b) * inst.vparts[i].len() as f64 / 4.0;
            if let Some(&x) = bufs.iter().find(|&&x| (self.st.a_in(inst, x, Slot::Buffer).len() as f64) < floor2 - prm.slack) {
                if bd2.is_ok() {
                    bd2 = Err(format!("{x}: |A^buf| below {floor2:.3}"));
                }
            }
            let floor3 = prm.mu * (prm.d.powi(prm.delta as i32) * prm.p / 100.0).powi(b) * inst.xparts[i].len() as f64;
            for v in self.unused_in(i) {
                let count = bufs.iter().filter(|&&x| self.st.c(x).contains(v)).count();
                if (count as f64) < floor3 - prm.slack && bd3.is_ok() {
                    bd3 = Err(format!("{v}: candidate for {count} < {floor3:.3}"));
                }
            }
        }
        self.stats.conditions.record("BD2", bd2);
        self.stats.conditions.record("BD3", bd3);
    }

    /// Perfect matching of every remaining buffer vertex onto the unused host
    /// vertices of its part; the buffer-matching premises are logged, not enforced.
    pub fn embed_buffer(&mut self) -> Result<(), RgaError> {
        let inst = self.inst;
        let prm = &inst.params;
        let mut logs: [Result<(), String>; 3] = [Ok(()), Ok(()), Ok(())];
        for i in 0..inst.parts() {
            let left = self.unembedded_buffer(i);
            let right = self.unused_in(i);
            if left.len() != right.len() {
                return Err(RgaError::SizeMismatch { part: i, left: left.len(), right: right.len() });
            }
            if left.is_empty() {
                continue;
            }
            let b_deg = inst.kinds[i].degree as i32;
            let mut b = Bipartite::new(left.len(), right.len());
            let mut per_host = vec![0usize; right.len()];
            for (l, &x) in left.iter().enumerate() {
                for (k, &v) in right.iter().enumerate() {
                    if self.st.c(x).contains(v) {
                        b.add_edge(l, k);
                        per_host[k] += 1;
                    }
                }
                let floor = prm.mu * (prm.d * prm.p).powi(b_deg) * inst.vparts[i].len() as f64 / 4.0;
                if (b.neighbors(l).len() as f64) < floor - prm.slack && logs[0].is_ok() {
                    logs[0] = Err(format!("{x}: {} candidates < {floor:.3}", b.neighbors(l).len()));
                }
            }
            for &c in &per_host {
                *self.stats.buffer_candidate_histogram.entry(c).or_default() += 1;
            }
            let w_size = (prm.rho * inst.vparts[i].len() as f64).ceil() as usize;
            if w_size > 0 && w_size <= right.len() {
                let mut probe = Rng::new(self.cfg.seed).derive_indexed("buffer-probe", i as u64);
                for _ in 0..32 {
                    let w: Vec<usize> = rand::seq::index::sample(&mut probe, right.len(), w_size).into_vec();
                    let wset = VertexSet::from_ids(right.len(), w);
                    let missing = (0..left.len()).filter(|&l| b.neighbors(l).iter().all(|&k| !wset.contains(k))).count();
                    if missing as f64 > prm.rho * inst.xparts[i].len() as f64 && logs[1].is_ok() {
                        logs[1] = Err(format!("part {i}: {missing} buffer vertices miss a sampled W"));
                    }
                }
            }
            let delta = prm.mu * (prm.d.powi(prm.delta as i32) / 100.0).powi(b_deg);
            let floor3 = delta * prm.p.powi(b_deg) * inst.xparts[i].len() as f64;
            if let Some(k) = per_host.iter().position(|&c| (c as f64) < floor3 - prm.slack) {
                if logs[2].is_ok() {
                    logs[2] = Err(format!("{}: candidate for {} < {floor3:.3}", right[k], per_host[k]));
                }
            }
            let m = max_matching(&b);
            if !m.is_left_perfect() {
                let s = hall_violator_from(&b, &m).expect("an unmatched left vertex exists");
                self.record_buffer_logs(logs);
                return Err(RgaError::HallFailure { part: i, violator: s.iter().map(|l| left[l]).collect() });
            }
            for (l, &x) in left.iter().enumerate() {
                self.place(x, right[m.pair_left[l].expect("left-perfect")], Stage::BufferMatch)?;
            }
        }
        self.record_buffer_logs(logs);
        Ok(())
    }

    fn record_buffer_logs(&mut self, logs: [Result<(), String>; 3]) {
        for (id, outcome) in ["BUF-match1", "BUF-match2", "BUF-match3"].into_iter().zip(logs) {
            self.stats.conditions.record(id, outcome);
        }
    }

    pub fn finish(self, status: RunStatus) -> EmbeddingResult {
        EmbeddingResult {
            mode: self.cfg.mode,
            seed: self.cfg.seed,
            status,
            psi: self.st.psi().to_vec(),
            stats: self.stats,
            verification: None,
        }
    }
}

/// `D` for the degenerate precondition: large enough that a degeneracy order
/// with buffers moved last can meet every clause.
pub fn default_order_bound(degeneracy: usize, max_degree: usize) -> usize {
    (2 * degeneracy + 1).max(degeneracy + 3).max(max_degree + 1)
}

/// Checks the bounded-order precondition and the size of the exceptional set.
pub fn check_degenerate_order(inst: &BlowupInstance, tau: &EmbedOrder, exceptional: &VertexSet, bound: usize) -> Result<(), String> {
    let prm = &inst.params;
    let mut tilde = VertexSet::new(inst.h.n());
    inst.tilde.iter().for_each(|t| tilde.union_with(t));
    let restricted = VertexSet::from_ids(inst.h.n(), (0..inst.h.n()).filter(|&x| inst.is_restricted(x)));
    let m = prm.eps * inst.g.n() as f64 / inst.parts().max(1) as f64;
    let spec = BoundedOrderSpec { tilde: &tilde, restricted: &restricted, restricting: &inst.restricting, exceptional, d: bound, p: prm.p, m };
    let rep = validate_bounded_order(&inst.h, tau, &spec);
    if let Some(v) = rep.violations.first() {
        return Err(format!("{:?} at {}: {}", v.clause, v.vertex, v.detail));
    }
    if !exceptional.is_empty() {
        let top = exceptional.iter().map(|x| pi_tau(&inst.h, &inst.restricting, tau, x)).max().unwrap_or(0);
        let cap = prm.p.powi(top as i32) * m;
        if exceptional.len() as f64 > cap + prm.slack {
            return Err(format!("|X^e| = {} > {cap:.3}", exceptional.len()));
        }
    }
    Ok(())
}

fn halt(stage: Stage, e: &RgaError) -> RunStatus {
    RunStatus::HaltFailure { stage, vertex: e.vertex(), reason: e.to_string() }
}

/// Runs the stages of the chosen mode and verifies the final map.
pub fn run_pipeline(inst: &BlowupInstance, cfg: &RunConfig) -> EmbeddingResult {
    let (mode, seed) = (cfg.mode, cfg.seed);
    if let Err(e) = cfg.validate() {
        return EmbeddingResult::setup_invalid(mode, seed, format!("config: {e}"));
    }
    let rep = validate_instance(inst);
    if let Some(c) = rep.first_failure() {
        return EmbeddingResult::setup_invalid(mode, seed, format!("{}: {}", c.id, c.witness.clone().unwrap_or_default()));
    }
    let nh = inst.h.n();
    let xbuf = inst.all_buffers();
    let mut engine = Engine::new(inst, cfg);
    let outcome: Result<(), (Stage, RgaError)> = match mode {
        Mode::Random => {
            let mut main = VertexSet::full(nh);
            main.difference_with(&xbuf);
            main.difference_with(&inst.all_reserved());
            let tau = match build_tau_buffer_first(&inst.h, &xbuf, &main, inst.params.delta) {
                Ok(t) => t,
                Err(e) => return EmbeddingResult::setup_invalid(mode, seed, format!("order: {e}")),
            };
            (|| {
                let q = engine.rga_random(&tau).map_err(|e| (Stage::Rga, e))?;
                engine.embed_queue(&q).map_err(|e| (Stage::Queue, e))?;
                engine.fix_buffer_defects().map_err(|e| (Stage::BufferDefects, e))?;
                engine.embed_buffer().map_err(|e| (Stage::BufferMatch, e))
            })()
        }
        Mode::Bijumbled => {
            let main = VertexSet::full(nh).difference(&xbuf);
            let tau = match build_tau_buffer_first(&inst.h, &xbuf, &main, inst.params.delta) {
                Ok(t) => t,
                Err(e) => return EmbeddingResult::setup_invalid(mode, seed, format!("order: {e}")),
            };
            (|| {
                engine.rga_bijumbled(&tau).map_err(|e| (Stage::Rga, e))?;
                engine.embed_buffer().map_err(|e| (Stage::BufferMatch, e))
            })()
        }
        Mode::Degenerate => {
            let (degen_order, degen) = degeneracy_order(&inst.h);
            let supplied = cfg.order.clone().unwrap_or(degen_order);
            let tau = match EmbedOrder::new(nh, supplied) {
                Ok(t) if t.len() == nh => move_buffer_last(&t, &xbuf),
                Ok(_) => return EmbeddingResult::setup_invalid(mode, seed, "order: does not cover V(H)".into()),
                Err(e) => return EmbeddingResult::setup_invalid(mode, seed, format!("order: {e}")),
            };
            let xe = VertexSet::from_ids(nh, cfg.exceptional.iter().copied().filter(|&x| x < nh));
            let bound = cfg.order_bound.unwrap_or_else(|| default_order_bound(degen, inst.h.max_degree()));
            if let Err(e) = check_degenerate_order(inst, &tau, &xe, bound) {
                return EmbeddingResult::setup_invalid(mode, seed, RgaError::OrderInvalid(e).to_string());
            }
            let main_tau: Vec<usize> = tau.as_slice().iter().copied().filter(|&x| !xbuf.contains(x)).collect();
            let main_order = EmbedOrder::new(nh, main_tau).expect("sub-order of a permutation");
            (|| {
                engine.rga_degenerate(&main_order, &xe).map_err(|e| (Stage::Rga, e))?;
                engine.embed_buffer().map_err(|e| (Stage::BufferMatch, e))
            })()
        }
    };
    let status = match &outcome {
        Ok(()) => RunStatus::Success,
        Err((stage, e)) => halt(*stage, e),
    };
    let mut result = engine.finish(status);
    let check = verify_embedding(inst, &result.psi);
    if result.is_success() && !check.is_pass() {
        result.status = RunStatus::HaltFailure { stage: Stage::Verify, vertex: None, reason: format!("{check:?}") };
    }
    result.verification = Some(check);
    result
}

/// Used by tests and the acceptance suite: the fraction of a part's vertices
/// that entered the queue against the `2ρ|X_i|` bound.
pub fn queue_within_bound(inst: &BlowupInstance, stats: &RunStats) -> bool {
    stats.queue_per_part.iter().enumerate().all(|(i, &q)| q as f64 <= 2.0 * inst.params.rho * inst.xparts[i].len() as f64 + 1e-9)
}

/// `⌊2ρ|X_i|⌋`, the reserved-clique count of a clique-buffer part.
pub fn reserved_count(inst: &BlowupInstance, i: usize) -> usize {
    floor_of(2.0 * inst.params.rho, inst.xparts[i].len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{blowup, gnp, k_factor, Graph};
    use crate::partition::{prepare, Blueprint, GCheck, Params};

    fn complete_instance(k: usize, copies: usize, params: Params, reserve: bool) -> BlowupInstance {
        let (h, xparts) = k_factor(k, copies);
        let (gamma, vparts) = blowup(&Graph::complete(k), &vec![copies; k], 1.0, &mut Rng::new(0));
        let bp = Blueprint::unrestricted(gamma.clone(), gamma, h, Graph::complete(k), xparts, vparts);
        prepare(&bp, &params, &GCheck::desk(params.eps), reserve, &mut Rng::new(1)).unwrap().0
    }

    fn dense_params(k: usize) -> Params {
        Params { mu: 0.04, rho: 0.005, delta: k - 1, delta_rp: k - 1, ..Params::default() }
    }

    #[test]
    fn complete_host_succeeds_in_every_mode() {
        for mode in Mode::ALL {
            let inst = complete_instance(3, 100, dense_params(3), mode == Mode::Random);
            let mut cfg = RunConfig::new(mode, 7);
            cfg.instrument = true;
            let res = run_pipeline(&inst, &cfg);
            assert!(res.is_success(), "{mode}: {:?}", res.status);
            assert!(res.stats.gpe_violations.is_empty(), "{:?}", &res.stats.gpe_violations[..1]);
            assert!(res.stats.invariant_violations.is_empty());
            assert!(res.stats.queue_per_part.iter().all(|&q| q == 0));
        }
    }

    #[test]
    fn random_mode_embeds_reserved_cliques() {
        let inst = complete_instance(3, 100, dense_params(3), true);
        assert!(inst.cliques.iter().all(|c| c.len() == 1));
        let res = run_pipeline(&inst, &RunConfig::new(Mode::Random, 3));
        assert!(res.is_success());
        assert_eq!(res.stats.conditions.get("BD1").unwrap().status, crate::partition::CheckStatus::Pass);
        for x in inst.all_reserved().iter() {
            let v = res.psi[x].unwrap();
            assert!(inst.splits[inst.part_of(x)].clique.contains(v));
        }
    }

    #[test]
    fn same_seed_same_result() {
        let inst = complete_instance(3, 40, dense_params(3), true);
        let cfg = RunConfig { trace: true, ..RunConfig::new(Mode::Random, 11) };
        let a = run_pipeline(&inst, &cfg);
        let b = run_pipeline(&inst, &cfg);
        assert_eq!(a, b);
        assert_eq!(a.stats.trace.len(), a.stats.steps);
        let c = run_pipeline(&inst, &RunConfig { seed: 12, ..cfg });
        assert_ne!(a.psi, c.psi);
    }

    #[test]
    fn degenerate_without_exceptions_matches_bijumbled() {
        let inst = complete_instance(3, 40, dense_params(3), false);
        let xbuf = inst.all_buffers();
        let main = VertexSet::full(inst.h.n()).difference(&xbuf);
        let tau = build_tau_buffer_first(&inst.h, &xbuf, &main, 2).unwrap();
        let cfg = RunConfig { trace: true, ..RunConfig::new(Mode::Bijumbled, 5) };
        let mut a = Engine::new(&inst, &cfg);
        a.rga_bijumbled(&tau).unwrap();
        let mut b = Engine::new(&inst, &cfg);
        b.rga_degenerate(&tau, &VertexSet::new(inst.h.n())).unwrap();
        assert_eq!(a.stats.trace, b.stats.trace);
        assert_eq!(a.st, b.st);
    }

    #[test]
    fn exceptional_vertex_lands_in_clique_slot() {
        let inst = complete_instance(3, 40, dense_params(3), false);
        let x = inst.xparts[0].iter().find(|&x| !inst.all_buffers().contains(x)).unwrap();
        let cfg = RunConfig { exceptional: vec![x], ..RunConfig::new(Mode::Degenerate, 2) };
        let res = run_pipeline(&inst, &cfg);
        assert!(res.is_success(), "{:?}", res.status);
        assert!(inst.splits[0].clique.contains(res.psi[x].unwrap()));
    }

    #[test]
    fn tiny_restriction_enters_initial_queue() {
        let mut inst = complete_instance(3, 40, dense_params(3), false);
        let x = inst.xparts[0].iter().find(|&x| !inst.all_buffers().contains(x)).unwrap();
        inst.restrict[x] = VertexSet::new(inst.g.n());
        let q = initial_queue(&inst, &inst.h.vertex_set());
        assert!(q.contains(x));
        // Bijumbled mode must then halt at x: nothing is available in the queue slot.
        let res = run_pipeline(&inst, &RunConfig::new(Mode::Bijumbled, 1));
        assert!(matches!(res.status, RunStatus::HaltFailure { stage: Stage::Rga, vertex: Some(v), .. } if v == x), "{:?}", res.status);
    }

    #[test]
    fn queue_vertices_sharing_one_candidate_violate_hall() {
        let mut inst = complete_instance(3, 100, dense_params(3), false);
        let bufs = inst.all_buffers();
        let mut xs = inst.xparts[0].iter().filter(|&x| !bufs.contains(x) && inst.h.ball(x, 1).is_disjoint(&bufs));
        let (x1, x2) = (xs.next().unwrap(), xs.next().unwrap());
        let v = inst.splits[0].queue.first().unwrap();
        inst.restrict[x1] = VertexSet::from_ids(inst.g.n(), [v]);
        inst.restrict[x2] = VertexSet::from_ids(inst.g.n(), [v]);
        let cfg = RunConfig::new(Mode::Random, 0);
        let mut eng = Engine::new(&inst, &cfg);
        let mut q = Queue::new(inst.h.n());
        q.push(x1, 0);
        q.push(x2, 0);
        match eng.embed_queue(&q) {
            Err(RgaError::HallFailure { part: 0, violator }) => assert_eq!(violator, vec![x1, x2]),
            other => panic!("{other:?}"),
        }
        assert!(eng.embed_queue(&Queue::new(inst.h.n())).is_ok());
    }

    #[test]
    fn verify_embedding_flags_tampering() {
        let inst = complete_instance(3, 40, dense_params(3), true);
        let res = run_pipeline(&inst, &RunConfig::new(Mode::Random, 4));
        assert!(res.verification.as_ref().unwrap().is_pass());
        let mut psi = res.psi.clone();
        // Move 0 onto the image of a vertex in its own part: collision and edge loss.
        let y = inst.xparts[inst.part_of(0)].iter().find(|&y| y != 0 && !inst.h.has_edge(0, y)).unwrap();
        psi[0] = psi[y];
        let chk = verify_embedding(&inst, &psi);
        assert!(chk.collision.is_some());
        psi[0] = None;
        assert_eq!(verify_embedding(&inst, &psi).unembedded, vec![0]);
    }

    #[test]
    fn identity_embedding_verifies() {
        let inst = complete_instance(3, 20, dense_params(3), false);
        // In the complete blow-up, x ↦ x is not a map into V(x); build a valid one by part order.
        let psi: Vec<Option<usize>> = (0..inst.h.n())
            .map(|x| {
                let i = inst.part_of(x);
                let rank = inst.xparts[i].iter().position(|y| y == x).unwrap();
                inst.vparts[i].iter().nth(rank)
            })
            .collect();
        assert!(verify_embedding(&inst, &psi).is_pass());
    }

    #[test]
    fn invalid_instance_is_setup_invalid() {
        let mut inst = complete_instance(3, 20, dense_params(3), false);
        let v = inst.vparts[0].first().unwrap();
        inst.vparts[0].remove(v);
        let res = run_pipeline(&inst, &RunConfig::new(Mode::Random, 0));
        assert!(matches!(res.status, RunStatus::SetupInvalid { .. }));
    }

    fn planted_poor_instance() -> (BlowupInstance, usize) {
        let params = Params { mu: 0.06, rho: 0.01, delta: 2, delta_rp: 2, ..Params::default() };
        let mut inst = complete_instance(3, 100, params, true);
        let v = inst.splits[0].buffer.first().unwrap();
        let mut g = Graph::empty(inst.g.n());
        for (a, b) in inst.g.edges() {
            let hits_main = |u: usize, w: usize| u == v && inst.slot_of(w) == Some(Slot::Main);
            if !hits_main(a, b) && !hits_main(b, a) {
                g.add_edge(a, b);
            }
        }
        inst.g = g;
        (inst, v)
    }

    #[test]
    fn planted_poor_vertex_is_found_and_covered() {
        let (inst, v) = planted_poor_instance();
        let cfg = RunConfig::new(Mode::Random, 9);
        let mut eng = Engine::new(&inst, &cfg);
        let bufs = inst.all_buffers();
        let main = VertexSet::full(inst.h.n()).difference(&bufs).difference(&inst.all_reserved());
        let tau = build_tau_buffer_first(&inst.h, &bufs, &main, 2).unwrap();
        let q = eng.rga_random(&tau).unwrap();
        eng.embed_queue(&q).unwrap();
        let (poor, deficient) = eng.identify_bad(0).unwrap();
        assert!(poor.contains(v));
        assert!(deficient.is_empty());
        assert_eq!(eng.identify_bad(0).unwrap(), (poor, deficient));
        eng.fix_buffer_defects().unwrap();
        let x = eng.st.preimage(v).expect("poor vertex covered");
        assert!(inst.all_reserved().contains(x));
        eng.embed_buffer().unwrap();
        assert!(verify_embedding(&inst, eng.st.psi()).is_pass());
    }

    #[test]
    fn find_clique_on_complete_host_returns_a_clique() {
        let inst = complete_instance(3, 100, dense_params(3), true);
        let cfg = RunConfig::new(Mode::Random, 0);
        let mut eng = Engine::new(&inst, &cfg);
        let v = inst.splits[0].clique.first().unwrap();
        let got = eng.find_clique(v, 0, &[1, 2]).unwrap();
        assert_eq!(got.len(), 2);
        assert!(inst.g.has_edge(v, got[0]) && inst.g.has_edge(v, got[1]) && inst.g.has_edge(got[0], got[1]));
        assert!(inst.splits[1].clique.contains(got[0]) && inst.splits[2].clique.contains(got[1]));
    }

    #[test]
    fn find_clique_surfaces_missing_premise() {
        let mut inst = complete_instance(3, 100, dense_params(3), true);
        let v = inst.splits[0].clique.first().unwrap();
        let mut g = Graph::empty(inst.g.n());
        for (a, b) in inst.g.edges() {
            let cut = (a == v && inst.splits[1].clique.contains(b)) || (b == v && inst.splits[1].clique.contains(a));
            if !cut {
                g.add_edge(a, b);
            }
        }
        inst.g = g;
        let cfg = RunConfig::new(Mode::Random, 0);
        let mut eng = Engine::new(&inst, &cfg);
        assert_eq!(eng.find_clique(v, 0, &[1, 2]), Err(RgaError::Premise { v, part: 1 }));
    }

    #[test]
    fn find_clique_in_random_host_returns_a_clique_when_it_succeeds() {
        let mut seen = 0;
        for seed in 0..6 {
            let mut rng = Rng::new(seed);
            let gamma = gnp(400, 0.5, &mut rng);
            let (h, xparts) = k_factor(3, 133);
            let keep = 399;
            let vparts: Vec<VertexSet> = (0..3).map(|i| VertexSet::from_ids(400, (0..keep).filter(|v| v % 3 == i))).collect();
            let mut g = Graph::empty(400);
            for (a, b) in gamma.edges().filter(|&(a, b)| a % 3 != b % 3) {
                g.add_edge(a, b);
            }
            let bp = Blueprint::unrestricted(gamma, g, h, Graph::complete(3), xparts, vparts);
            let params = Params { p: 0.5, mu: 0.06, rho: 0.01, slack: 2.0, ..Params::default() };
            let hp = crate::partition::build_good_h_partition(&bp, &params, &mut rng).unwrap();
            let splits = bp.vparts.iter().map(|vp| crate::partition::Splits {
                clique: VertexSet::from_ids(400, vp.iter().take(40)),
                main: VertexSet::from_ids(400, vp.iter().skip(40)),
                queue: VertexSet::new(400),
                buffer: VertexSet::new(400),
            });
            let restrict = (0..399).map(|x| bp.vparts[x % 3].clone()).collect();
            let inst = BlowupInstance::assemble(bp.gamma.clone(), bp.g.clone(), bp.h.clone(), hp, bp.vparts.clone(), splits.collect(), restrict, vec![Vec::new(); 399], params);
            let cfg = RunConfig::new(Mode::Random, seed);
            let mut eng = Engine::new(&inst, &cfg);
            let v = inst.vparts[0].iter().nth(50).unwrap();
            if let Ok(c) = eng.find_clique(v, 0, &[1, 2]) {
                seen += 1;
                assert!(inst.g.has_edge(v, c[0]) && inst.g.has_edge(v, c[1]) && inst.g.has_edge(c[0], c[1]));
                assert!(inst.splits[1].clique.contains(c[0]) && inst.splits[2].clique.contains(c[1]));
            }
        }
        assert!(seen > 0);
    }
}
