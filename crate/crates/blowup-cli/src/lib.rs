//! Command-line front end: instance generation, embedding runs, validators
//! and property checks, and parallel parameter sweeps.
//!
//! Exit codes: 0 success, 2 halt or failed check, 3 invalid setup, 4 I/O,
//! schema, digest or flag errors.

pub mod bench;
pub mod manifest;

#[doc = include_str!("../../../book/src/ch7-cli.md")]
pub mod guide {}

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use blowup::graph::{
    cycle_power, degenerate_random, factor, gnp, random_bounded_degree, Graph, GraphError,
};
use blowup::partition::{prepare, BlowupInstance, Blueprint, GCheck, Params, PartitionError, PartitionReport};
use blowup::props::{self, BetaMode, HostParams, PropertyError, PropertyVerdict};
use blowup::regularity::{SampleBudget, Verifier};
use blowup::rga::{run_pipeline, verify_embedding, EmbeddingResult, Mode, RunConfig, RunStatus};
use blowup::scenario::{clique_factor, HostKind};
use blowup::embed::BadMode;
use blowup::Rng;
use clap::{Args, Parser, Subcommand, ValueEnum};

use manifest::{rebase, write_graph_file, GpeSummary, Graphs, InstanceSummary, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_SETUP: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("digest mismatch for {path}: manifest records {expected}, file has {found}")]
    Digest { path: String, expected: String, found: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error("invalid flag: {0}")]
    Flag(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

#[derive(Parser, Debug)]
#[command(name = "blowup", version, about = "Randomized greedy embeddings of bounded-degree graphs into sparse hosts")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate graphs and instance manifests.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Partition an instance and run the embedding pipeline.
    Embed(EmbedArgs),
    /// Run one validator suite against a manifest.
    Check(CheckArgs),
    /// Sweep clique-factor instances over a grid and print a table.
    Bench(bench::BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GenOut {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the edge lists and `manifest.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum GenCmd {
    /// Binomial random graph, written as the host.
    Gnp {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        p: f64,
        #[command(flatten)]
        out: GenOut,
    },
    /// Random blow-up of a reduced graph (complete on `--parts` unless `--reduced` is given).
    Blowup {
        #[arg(long)]
        parts: usize,
        #[arg(long)]
        size: usize,
        #[arg(short)]
        p: f64,
        #[arg(long)]
        reduced: Option<PathBuf>,
        #[command(flatten)]
        out: GenOut,
    },
    /// Disjoint copies of a motif (`K<k>`, `C<k>` or `P<k>`) on `n` vertices.
    Factor {
        #[arg(long)]
        motif: String,
        #[arg(short)]
        n: usize,
        #[command(flatten)]
        out: GenOut,
    },
    /// Random graph of maximum degree at most `delta` from random matching layers.
    Bounded {
        #[arg(short)]
        n: usize,
        #[arg(long)]
        delta: usize,
        #[command(flatten)]
        out: GenOut,
    },
    /// Random `degen`-degenerate graph with maximum degree at most `max_degree`.
    Degenerate {
        #[arg(short)]
        n: usize,
        #[arg(long)]
        degen: usize,
        #[arg(long)]
        max_degree: usize,
        #[command(flatten)]
        out: GenOut,
    },
    /// `k`-th power of the cycle on `n` vertices.
    CyclePower {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        k: usize,
        #[command(flatten)]
        out: GenOut,
    },
    /// Complete instance: `K_k`-factor against a host with `k` parts of `size`.
    Instance {
        #[arg(short)]
        k: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value = "multipartite")]
        host: HostKind,
        #[arg(short, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        mode: Option<Mode>,
        /// Parameter overrides `key=value,...`; `p` defaults to the host probability.
        #[arg(long, default_value = "")]
        params: String,
        #[command(flatten)]
        out: GenOut,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RunFlags {
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long, default_value = "")]
    pub params: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bad sets also test regularity of the pairs a placement touches.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub trace: bool,
    /// Record wall-clock times in the output (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
    /// Output manifest; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub run: RunFlags,
    /// Audit the size conditions and the queue after every step.
    #[arg(long)]
    pub instrument: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Partitions,
    Properties,
    Gpe,
    Embedding,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub which: Which,
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long)]
    pub ns: bool,
    #[arg(long)]
    pub lns: bool,
    #[arg(long)]
    pub con: bool,
    #[arg(long)]
    pub lcon: bool,
    /// Sampled bijumbledness estimate, plus the spectral bound on regular hosts.
    #[arg(long)]
    pub beta: bool,
    /// Add adversarial samples to the congestion checks.
    #[arg(long)]
    pub adversarial: bool,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 4.0)]
    pub t: f64,
    /// Defaults to the manifest's `eps`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Defaults to the manifest's `rho`.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Defaults to the manifest's `delta`.
    #[arg(long)]
    pub delta: Option<usize>,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}

pub fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Gen(g) => cmd_gen(g).map(|_| EXIT_OK),
        Command::Embed(a) => cmd_embed(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Bench(a) => bench::cmd_bench(&a),
    }
}

// ---------------------------------------------------------------------------
// gen

fn flag(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Flag(msg()))
    }
}

fn check_prob(p: f64) -> Result<(), CliError> {
    flag(p > 0.0 && p <= 1.0, || format!("p = {p} outside (0, 1]"))
}

/// `K<k>`, `C<k>` or `P<k>`.
pub fn parse_motif(spec: &str) -> Result<Graph, CliError> {
    let bad = || CliError::Flag(format!("motif {spec:?}: expected K<k>, C<k> or P<k>"));
    let (kind, k) = spec.split_at(1.min(spec.len()));
    let k: usize = k.parse().map_err(|_| bad())?;
    match kind {
        "K" if k >= 1 => Ok(Graph::complete(k)),
        "C" if k >= 3 => {
            let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
            Ok(Graph::from_edges(k, &edges)?)
        }
        "P" if k >= 1 => {
            let edges: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
            Ok(Graph::from_edges(k, &edges)?)
        }
        _ => Err(bad()),
    }
}

fn gen_rng(seed: u64) -> Rng {
    Rng::new(seed).derive("gen")
}

fn write_manifest(m: &Manifest, path: &Path) -> Result<(), CliError> {
    fs::write(path, m.to_json()).map_err(|e| CliError::io(path, e))
}

fn save_role(m: &mut Manifest, dir: &Path, role: &str, g: &Graph) -> Result<(), CliError> {
    let name = format!("{role}.edges");
    let r = write_graph_file(g, &dir.join(&name), &name)?;
    m.graphs.insert(role.to_string(), r);
    Ok(())
}

fn parts_lists(parts: &[blowup::VertexSet]) -> Vec<Vec<usize>> {
    parts.iter().map(|p| p.to_vec()).collect()
}

/// Writes the blueprint's graphs into `dir` and returns the manifest describing them.
pub fn write_instance(bp: &Blueprint, params: Params, seed: u64, mode: Option<Mode>, dir: &Path) -> Result<Manifest, CliError> {
    let mut m = Manifest::new(seed, params);
    m.mode = mode;
    save_role(&mut m, dir, "gamma", &bp.gamma)?;
    if bp.g != bp.gamma {
        save_role(&mut m, dir, "g", &bp.g)?;
    }
    save_role(&mut m, dir, "h", &bp.h)?;
    save_role(&mut m, dir, "r", &bp.r)?;
    m.xparts = parts_lists(&bp.xparts);
    m.vparts = parts_lists(&bp.vparts);
    Ok(m)
}

/// Instance stream used by `gen instance` and `bench`.
pub fn instance_rng(seed: u64) -> Rng {
    Rng::new(seed).derive("instance")
}

pub fn cmd_gen(cmd: GenCmd) -> Result<PathBuf, CliError> {
    let (out, mut m) = match &cmd {
        GenCmd::Gnp { out, .. }
        | GenCmd::Blowup { out, .. }
        | GenCmd::Factor { out, .. }
        | GenCmd::Bounded { out, .. }
        | GenCmd::Degenerate { out, .. }
        | GenCmd::CyclePower { out, .. }
        | GenCmd::Instance { out, .. } => (out.clone(), Manifest::new(out.seed, Params::default())),
    };
    fs::create_dir_all(&out.out).map_err(|e| CliError::io(&out.out, e))?;
    let dir = out.out.as_path();
    let mut rng = gen_rng(out.seed);
    match cmd {
        GenCmd::Gnp { n, p, .. } => {
            check_prob(p)?;
            m.params.p = p;
            save_role(&mut m, dir, "gamma", &gnp(n, p, &mut rng))?;
        }
        GenCmd::Blowup { parts, size, p, reduced, .. } => {
            check_prob(p)?;
            let r = match reduced {
                Some(path) => manifest::read_plain_graph(&path)?,
                None => Graph::complete(parts),
            };
            flag(r.n() == parts, || format!("reduced graph has {} vertices, --parts is {parts}", r.n()))?;
            let (g, vparts) = blowup::graph::blowup(&r, &vec![size; parts], p, &mut rng);
            m.params.p = p;
            save_role(&mut m, dir, "gamma", &g)?;
            save_role(&mut m, dir, "r", &r)?;
            m.vparts = parts_lists(&vparts);
        }
        GenCmd::Factor { motif, n, .. } => {
            let f = parse_motif(&motif)?;
            flag(n % f.n() == 0, || format!("n = {n} is not a multiple of the motif order {}", f.n()))?;
            save_role(&mut m, dir, "h", &factor(&f, n / f.n()))?;
        }
        GenCmd::Bounded { n, delta, .. } => {
            m.params.delta = delta;
            save_role(&mut m, dir, "h", &random_bounded_degree(n, delta, &mut rng))?;
        }
        GenCmd::Degenerate { n, degen, max_degree, .. } => {
            flag(degen <= max_degree, || "degen exceeds max-degree".into())?;
            m.params.delta = max_degree;
            save_role(&mut m, dir, "h", &degenerate_random(n, degen, max_degree, &mut rng))?;
        }
        GenCmd::CyclePower { n, k, .. } => {
            flag(n > 2 * k, || format!("need n > 2k, got n = {n}, k = {k}"))?;
            m.params.delta = 2 * k;
            save_role(&mut m, dir, "h", &cycle_power(n, k))?;
        }
        GenCmd::Instance { k, size, host, p, mode, params, .. } => {
            check_prob(p)?;
            flag(k >= 2 && size >= 1, || "need k >= 2 and size >= 1".into())?;
            let mut prm = Params { p, delta: k - 1, delta_rp: k - 1, ..Params::default() };
            prm.apply_overrides(&params).map_err(|e| CliError::Flag(e.to_string()))?;
            let bp = clique_factor(k, size, host, p, &mut instance_rng(out.seed));
            m = write_instance(&bp, prm, out.seed, mode, dir)?;
        }
    }
    let path = dir.join("manifest.json");
    write_manifest(&m, &path)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// shared pipeline plumbing

/// Parameters, mode and seed after applying the run flags to a manifest.
pub fn resolve(m: &Manifest, run: &RunFlags) -> Result<(Params, Mode, u64), CliError> {
    let mut params = m.params;
    params.apply_overrides(&run.params).map_err(|e| CliError::Flag(e.to_string()))?;
    Ok((params, run.mode.or(m.mode).unwrap_or(Mode::Random), run.seed.unwrap_or(m.seed)))
}

/// Partitions the blueprint. Reserved cliques are only needed by the random mode.
pub fn prepare_instance(bp: &Blueprint, params: &Params, mode: Mode, seed: u64) -> Result<(BlowupInstance, PartitionReport), PartitionError> {
    params.validate()?;
    prepare(bp, params, &GCheck::desk(params.eps), mode == Mode::Random, &mut Rng::new(seed).derive("prepare"))
}

pub fn run_config(mode: Mode, seed: u64, params: &Params, oracle: bool, trace: bool) -> RunConfig {
    let mut cfg = RunConfig::new(mode, seed);
    if oracle {
        cfg.bad = BadMode::Oracle(GCheck::desk(params.eps).verifier);
    }
    cfg.trace = trace;
    cfg
}

/// Everything one pipeline execution produces.
pub struct Execution {
    pub result: EmbeddingResult,
    pub partition: Option<PartitionReport>,
    pub instance: Option<InstanceSummary>,
    pub timing_ms: BTreeMap<String, f64>,
}

pub fn execute(bp: &Blueprint, params: &Params, cfg: &RunConfig) -> Execution {
    let t0 = Instant::now();
    let prepared = prepare_instance(bp, params, cfg.mode, cfg.seed);
    let t1 = Instant::now();
    let mut timing_ms = BTreeMap::new();
    timing_ms.insert("prepare".to_string(), (t1 - t0).as_secs_f64() * 1e3);
    match prepared {
        Err(e) => Execution {
            result: EmbeddingResult::setup_invalid(cfg.mode, cfg.seed, e.to_string()),
            partition: None,
            instance: None,
            timing_ms,
        },
        Ok((inst, report)) => {
            let result = run_pipeline(&inst, cfg);
            timing_ms.insert("embed".to_string(), t1.elapsed().as_secs_f64() * 1e3);
            Execution { result, partition: Some(report), instance: Some(InstanceSummary::of(&inst)), timing_ms }
        }
    }
}

/// One clique-factor run, seeded exactly as `gen instance` followed by `embed`.
pub fn run_factor_case(k: usize, size: usize, host: HostKind, p: f64, params: &Params, mode: Mode, seed: u64) -> Execution {
    let bp = clique_factor(k, size, host, p, &mut instance_rng(seed));
    execute(&bp, params, &RunConfig::new(mode, seed))
}

pub fn status_code(status: &RunStatus) -> i32 {
    match status {
        RunStatus::Success => EXIT_OK,
        RunStatus::HaltFailure { .. } => EXIT_FAIL,
        RunStatus::SetupInvalid { .. } => EXIT_SETUP,
    }
}

fn load(path: &Path) -> Result<(Manifest, PathBuf, Graphs), CliError> {
    let (m, dir) = Manifest::load(path)?;
    let graphs = m.load_graphs(&dir)?;
    Ok((m, dir, graphs))
}

/// Writes `m` to `--out` (graph paths rebased there) or to stdout.
fn emit(mut m: Manifest, from_dir: &Path, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let to_dir = path.parent().unwrap_or(Path::new(""));
            for r in m.graphs.values_mut() {
                let file = from_dir.join(&r.path);
                r.path = rebase(&file, to_dir);
            }
            write_manifest(&m, path)
        }
        None => {
            print!("{}", m.to_json());
            Ok(())
        }
    }
}

fn stamp(m: &mut Manifest, params: Params, mode: Mode, seed: u64) {
    m.params = params;
    m.mode = Some(mode);
    m.seed = seed;
}

// ---------------------------------------------------------------------------
// embed

pub fn cmd_embed(a: &EmbedArgs) -> Result<i32, CliError> {
    let (mut m, dir, graphs) = load(&a.manifest)?;
    let (params, mode, seed) = resolve(&m, &a.run)?;
    let bp = m.blueprint(&graphs)?;
    let mut cfg = run_config(mode, seed, &params, a.run.oracle, a.run.trace);
    cfg.instrument = a.instrument;
    let ex = execute(&bp, &params, &cfg);
    let code = status_code(&ex.result.status);
    stamp(&mut m, params, mode, seed);
    m.results.partition = ex.partition;
    m.results.instance = ex.instance;
    m.results.embedding = Some(ex.result);
    if a.run.timing {
        m.results.timing_ms = ex.timing_ms;
    }
    emit(m, &dir, a.run.out.as_deref())?;
    Ok(code)
}

// ---------------------------------------------------------------------------
// check

fn property_code(e: PropertyError) -> i32 {
    eprintln!("error: {e}");
    EXIT_SETUP
}

pub fn cmd_check(a: &CheckArgs) -> Result<i32, CliError> {
    let (mut m, dir, graphs) = load(&a.manifest)?;
    let (params, mode, seed) = resolve(&m, &a.run)?;
    let code = match a.which {
        Which::Properties => {
            flag(a.trials >= 1, || "--trials must be at least 1".into())?;
            let gamma = graphs.get("gamma")?;
            let eps = a.eps.unwrap_or(params.eps);
            let rho = a.rho.unwrap_or(params.rho);
            let delta = a.delta.unwrap_or(params.delta);
            let host = HostParams::new(eps, a.t, delta);
            let any = a.ns || a.lns || a.con || a.lcon || a.beta;
            let root = Rng::new(seed);
            let mut reports = Vec::new();
            let run = |r: Result<props::PropertyReport, PropertyError>, out: &mut Vec<_>| r.map(|rep| out.push(rep));
            let outcome = (|| {
                if a.ns || !any {
                    run(props::check_ns(gamma, &host, a.trials, &mut root.derive("ns")), &mut reports)?;
                }
                if a.lns {
                    run(props::check_lns(gamma, &host, a.trials, &mut root.derive("lns")), &mut reports)?;
                }
                if a.con || !any {
                    let r = props::check_con(gamma, rho, a.t, delta, a.trials, a.adversarial, &mut root.derive("con"));
                    run(r, &mut reports)?;
                }
                if a.lcon || !any {
                    let r = props::check_lcon(gamma, &host, a.trials, a.adversarial, &mut root.derive("lcon"));
                    run(r, &mut reports)?;
                }
                if a.beta {
                    let p = gamma.density();
                    let est = props::bijumbled_beta(gamma, p, BetaMode::Sampled { trials: a.trials }, &mut root.derive("beta"))?;
                    m.results.beta.insert("sampled".into(), est.beta);
                    if let Ok(est) = props::bijumbled_beta(gamma, p, BetaMode::Spectral, &mut root.derive("beta")) {
                        m.results.beta.insert("spectral".into(), est.beta);
                    }
                }
                Ok::<_, PropertyError>(())
            })();
            let failed = reports.iter().any(|r| r.verdict == PropertyVerdict::Fail);
            m.results.properties.extend(reports);
            match outcome {
                Err(e) => property_code(e),
                Ok(()) if failed => EXIT_FAIL,
                Ok(()) => EXIT_OK,
            }
        }
        Which::Partitions => {
            let bp = m.blueprint(&graphs)?;
            match prepare_instance(&bp, &params, mode, seed) {
                Err(e) => {
                    eprintln!("error: {e}");
                    let mut report = PartitionReport::default();
                    report.record("prepare", Err(e.to_string()));
                    m.results.partition = Some(report);
                    EXIT_SETUP
                }
                Ok((inst, report)) => {
                    let pass = report.is_pass();
                    m.results.partition = Some(report);
                    m.results.instance = Some(InstanceSummary::of(&inst));
                    if pass {
                        EXIT_OK
                    } else {
                        EXIT_FAIL
                    }
                }
            }
        }
        Which::Gpe => {
            let bp = m.blueprint(&graphs)?;
            let mut cfg = run_config(mode, seed, &params, false, a.run.trace);
            cfg.instrument = true;
            if a.run.oracle {
                cfg.gpe_full = Some(Verifier::Auto(SampleBudget::defaults(params.eps)));
            }
            let ex = execute(&bp, &params, &cfg);
            let stats = &ex.result.stats;
            let gpe = GpeSummary {
                checks: stats.gpe_checks,
                violations: stats.gpe_violations.clone(),
                invariant_violations: stats.invariant_violations.clone(),
            };
            let code = match &ex.result.status {
                RunStatus::SetupInvalid { .. } => EXIT_SETUP,
                _ if !gpe.violations.is_empty() || !gpe.invariant_violations.is_empty() => EXIT_FAIL,
                _ => EXIT_OK,
            };
            m.results.gpe = Some(gpe);
            m.results.partition = ex.partition;
            m.results.instance = ex.instance;
            m.results.embedding = Some(ex.result);
            if a.run.timing {
                m.results.timing_ms = ex.timing_ms;
            }
            code
        }
        Which::Embedding => {
            let psi = match &m.results.embedding {
                Some(r) if !r.psi.is_empty() => r.psi.clone(),
                _ => return Err(CliError::Schema("manifest holds no embedding to check".into())),
            };
            let bp = m.blueprint(&graphs)?;
            match prepare_instance(&bp, &params, mode, seed) {
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_SETUP
                }
                Ok((inst, _)) => {
                    if psi.len() != inst.h.n() {
                        return Err(CliError::Schema(format!("psi has {} entries for {} vertices", psi.len(), inst.h.n())));
                    }
                    let check = verify_embedding(&inst, &psi);
                    let pass = check.is_pass();
                    m.results.embedding_check = Some(check);
                    if pass {
                        EXIT_OK
                    } else {
                        EXIT_FAIL
                    }
                }
            }
        }
    };
    stamp(&mut m, params, mode, seed);
    emit(m, &dir, a.run.out.as_deref())?;
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn motifs_parse() {
        assert_eq!(parse_motif("K4").unwrap().edge_count(), 6);
        assert_eq!(parse_motif("C5").unwrap().edge_count(), 5);
        assert_eq!(parse_motif("P3").unwrap().edge_count(), 2);
        assert!(parse_motif("C2").is_err());
        assert!(parse_motif("X3").is_err());
        assert!(parse_motif("").is_err());
    }

    #[test]
    fn bad_flags_exit_four() {
        assert_eq!(main_with(["blowup", "embed"]), EXIT_IO);
        assert_eq!(main_with(["blowup", "gen", "gnp", "-n", "10", "-p", "2"]), EXIT_IO);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(main_with(["blowup", "--help"]), EXIT_OK);
    }
}
