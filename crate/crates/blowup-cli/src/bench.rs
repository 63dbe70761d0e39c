//! Grid sweeps over clique-factor instances. Cells run in parallel, each run
//! single-threaded; rows come out in grid order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use blowup::partition::Params;
use blowup::rga::{Mode, RunStatus};
use blowup::scenario::HostKind;
use clap::Args;
use rayon::prelude::*;

use crate::{flag, run_factor_case, CliError, EXIT_OK};

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Total host sizes; each must be a multiple of the family's clique order.
    #[arg(long, value_delimiter = ',', default_values_t = [150usize, 300])]
    pub n: Vec<usize>,
    #[arg(short, long, value_delimiter = ',', default_values_t = [0.9f64, 1.0])]
    pub p: Vec<f64>,
    /// Clique-factor families, `K3`, `K4`, ...
    #[arg(long, value_delimiter = ',', default_values_t = [String::from("K3")])]
    pub family: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = [Mode::Random])]
    pub mode: Vec<Mode>,
    /// Runs per cell, seeded `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "multipartite")]
    pub host: HostKind,
    /// Overrides applied after `p` and `delta` are set per cell.
    #[arg(long, default_value = "")]
    pub params: String,
    /// Append a mean runtime column (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub k: usize,
    pub n: usize,
    pub p: f64,
    pub mode: Mode,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellStats {
    pub runs: usize,
    pub success: usize,
    pub halt: usize,
    pub setup_invalid: usize,
    /// Largest `|X^q_i| / |X_i|` over runs and parts.
    pub queue_max_frac: f64,
    /// Per-part queue size → count.
    pub queue_hist: BTreeMap<usize, usize>,
    /// Bad-set size bucket (0, 1, 2, 4, ...) → count.
    pub bad_hist: BTreeMap<usize, usize>,
    pub total_ms: f64,
}

fn bucket(b: usize) -> usize {
    if b == 0 {
        0
    } else {
        1 << b.ilog2()
    }
}

fn hist(h: &BTreeMap<usize, usize>) -> String {
    if h.is_empty() {
        return "-".into();
    }
    h.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(";")
}

fn family_order(f: &str) -> Result<usize, CliError> {
    match f.strip_prefix('K').and_then(|k| k.parse::<usize>().ok()) {
        Some(k) if k >= 2 => Ok(k),
        _ => Err(CliError::Flag(format!("family {f:?}: expected K<k> with k >= 2"))),
    }
}

pub fn cells(a: &BenchArgs) -> Result<Vec<Cell>, CliError> {
    let mut out = Vec::new();
    for f in &a.family {
        let k = family_order(f)?;
        for &n in &a.n {
            flag(n > 0 && n % k == 0, || format!("n = {n} is not a positive multiple of {k}"))?;
            for &p in &a.p {
                flag(p > 0.0 && p <= 1.0, || format!("p = {p} outside (0, 1]"))?;
                for &mode in &a.mode {
                    out.push(Cell { k, n, p, mode });
                }
            }
        }
    }
    Ok(out)
}

fn cell_params(c: &Cell, overrides: &str) -> Result<Params, CliError> {
    let mut prm = Params { p: c.p, delta: c.k - 1, delta_rp: c.k - 1, ..Params::default() };
    prm.apply_overrides(overrides).map_err(|e| CliError::Flag(e.to_string()))?;
    Ok(prm)
}

/// Thread count from `BLOWUP_THREADS`, or rayon's default.
pub fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var("BLOWUP_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.parse::<usize>() {
            Ok(t) if t >= 1 => Ok(Some(t)),
            _ => Err(CliError::Flag(format!("BLOWUP_THREADS={s:?} is not a positive count"))),
        },
    }
}

pub fn run_grid(a: &BenchArgs) -> Result<Vec<(Cell, CellStats)>, CliError> {
    flag(a.seeds >= 1, || "--seeds must be at least 1".into())?;
    let grid = cells(a)?;
    let params: Vec<Params> = grid.iter().map(|c| cell_params(c, &a.params)).collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, u64)> = (0..grid.len()).flat_map(|c| (0..a.seeds).map(move |s| (c, a.seed + s))).collect();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads()? {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Flag(e.to_string()))?;
    let runs = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, seed)| {
                let cell = &grid[c];
                let ex = run_factor_case(cell.k, cell.n / cell.k, a.host, cell.p, &params[c], cell.mode, seed);
                (c, ex.result, ex.timing_ms.values().copied().max_by(f64::total_cmp).unwrap_or(0.0))
            })
            .collect::<Vec<_>>()
    });
    let mut stats = vec![CellStats::default(); grid.len()];
    for (c, res, ms) in runs {
        let st = &mut stats[c];
        let size = grid[c].n / grid[c].k;
        st.runs += 1;
        st.total_ms += ms;
        match res.status {
            RunStatus::Success => st.success += 1,
            RunStatus::HaltFailure { .. } => st.halt += 1,
            RunStatus::SetupInvalid { .. } => st.setup_invalid += 1,
        }
        for &q in &res.stats.queue_per_part {
            *st.queue_hist.entry(q).or_default() += 1;
            st.queue_max_frac = st.queue_max_frac.max(q as f64 / size as f64);
        }
        for (&b, &cnt) in &res.stats.bad_histogram {
            *st.bad_hist.entry(bucket(b)).or_default() += cnt;
        }
    }
    Ok(grid.into_iter().zip(stats).collect())
}

pub fn table(rows: &[(Cell, CellStats)], timing: bool) -> String {
    let mut s = String::from("family\tn\tp\tmode\truns\tsuccess\thalt\tsetup_invalid\tsuccess_rate\tqueue_max_frac\tqueue_hist\tbad_hist");
    if timing {
        s.push_str("\tmean_ms");
    }
    s.push('\n');
    for (c, st) in rows {
        let _ = write!(
            s,
            "K{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{:.4}\t{}\t{}",
            c.k,
            c.n,
            c.p,
            c.mode,
            st.runs,
            st.success,
            st.halt,
            st.setup_invalid,
            st.success as f64 / st.runs.max(1) as f64,
            st.queue_max_frac,
            hist(&st.queue_hist),
            hist(&st.bad_hist)
        );
        if timing {
            let _ = write!(s, "\t{:.1}", st.total_ms / st.runs.max(1) as f64);
        }
        s.push('\n');
    }
    s
}

pub fn cmd_bench(a: &BenchArgs) -> Result<i32, CliError> {
    let text = table(&run_grid(a)?, a.timing);
    match &a.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e))?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}
