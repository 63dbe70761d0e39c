//! Pilot run for the triangle factor in a random host: success counts and
//! queue sizes per parameter row. Output is recorded in `calibration.txt`.
//!
//! cargo run --release -p blowup-cli --example calibrate

use std::collections::BTreeMap;

use blowup::partition::Params;
use blowup::rga::{Mode, RunStatus};
use blowup::scenario::HostKind;
use blowup_cli::run_factor_case;

const SEEDS: u64 = 20;

/// Condition text up to its first `:` or ` found`, without vertex details.
fn condition_key(c: &str) -> String {
    let end = [c.find(": "), c.find(" found")].into_iter().flatten().min().unwrap_or(c.len());
    c[..end].to_string()
}

fn main() {
    let rows: [(&str, f64, &str); 6] = [
        ("defaults", 0.5, ""),
        ("defaults", 0.9, ""),
        ("small buffers", 0.5, "mu=0.05,rho=0.005"),
        ("small buffers", 0.9, "mu=0.05,rho=0.005"),
        ("small buffers, slack 2", 0.5, "mu=0.05,rho=0.005,slack=2"),
        ("small buffers, slack 2", 0.9, "mu=0.05,rho=0.005,slack=2"),
    ];
    println!("row\tp\tsuccess\tqueue_max\tqueue_cap\toutcomes");
    for (name, p, over) in rows {
        let mut prm = Params { p, delta: 2, delta_rp: 2, ..Params::default() };
        prm.apply_overrides(over).expect("valid overrides");
        let (mut success, mut qmax) = (0, 0);
        let mut other: BTreeMap<String, usize> = BTreeMap::new();
        for seed in 0..SEEDS {
            let ex = run_factor_case(3, 100, HostKind::Gnp, p, &prm, Mode::Random, seed);
            match &ex.result.status {
                RunStatus::Success => {
                    success += 1;
                    qmax = qmax.max(ex.result.stats.queue_per_part.iter().copied().max().unwrap_or(0));
                }
                RunStatus::SetupInvalid { condition } => *other.entry(condition_key(condition)).or_default() += 1,
                RunStatus::HaltFailure { stage, .. } => *other.entry(format!("halt at {stage}")).or_default() += 1,
            }
        }
        let cap = 2.0 * prm.rho * 100.0;
        println!("{name}\t{p}\t{success}/{SEEDS}\t{qmax}\t{cap}\t{other:?}");
    }
}
