//! End-to-end runs of the `blowup` binary in scratch directories.

use std::fs;
use std::path::Path;
use std::process::Command;

use blowup::graph::load_graph;
use blowup::rga::RunStatus;
use blowup_cli::manifest::Manifest;

fn blowup(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_blowup")).args(args).current_dir(dir).output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).expect("utf-8 stdout"))
}

fn manifest(path: &Path) -> Manifest {
    Manifest::load(path).expect("manifest loads").0
}

/// Complete tripartite host with a triangle factor, at parameters the desk-scale
/// partitioner accepts.
fn complete_instance(dir: &Path, mode: &str) {
    let (code, _) = blowup(
        &["gen", "instance", "-k", "3", "--size", "60", "--mode", mode, "--params", "mu=0.05,rho=0.005", "--seed", "3", "--out", "inst"],
        dir,
    );
    assert_eq!(code, 0);
}

#[test]
fn gen_gnp_writes_graph_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _) = blowup(&["gen", "gnp", "-n", "300", "-p", "0.5", "--seed", "1", "--out", "g"], tmp.path());
    assert_eq!(code, 0);
    let m = manifest(&tmp.path().join("g/manifest.json"));
    let gamma = load_graph(tmp.path().join("g").join(&m.graphs["gamma"].path)).unwrap();
    assert_eq!(gamma.n(), 300);
    assert_eq!(gamma.edge_count(), m.graphs["gamma"].edges);
    let frac = gamma.edge_count() as f64 / (300.0 * 299.0 / 2.0);
    assert!((frac - 0.5).abs() < 0.03, "edge fraction {frac}");
}

#[test]
fn gen_factor_components_are_copies_of_the_motif() {
    let tmp = tempfile::tempdir().unwrap();
    for (motif, order, edges) in [("K3", 3, 3), ("C5", 5, 5), ("P4", 4, 3)] {
        let dir = format!("f{motif}");
        let n = (300 / order * order).to_string();
        let (code, _) = blowup(&["gen", "factor", "--motif", motif, "-n", &n, "--out", &dir], tmp.path());
        assert_eq!(code, 0);
        let h = load_graph(tmp.path().join(&dir).join("h.edges")).unwrap();
        let comps = h.components();
        assert_eq!(comps.len(), h.n() / order);
        for c in comps {
            assert_eq!(c.len(), order);
            let degs: Vec<usize> = c.iter().map(|&v| h.degree(v)).collect();
            assert_eq!(degs.iter().sum::<usize>(), 2 * edges);
            match motif {
                "K3" | "C5" => assert!(degs.iter().all(|&d| d == 2)),
                _ => assert_eq!(degs.iter().filter(|&&d| d == 1).count(), 2),
            }
        }
    }
}

#[test]
fn corrupted_graph_file_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    complete_instance(tmp.path(), "random");
    let file = tmp.path().join("inst/h.edges");
    let mut text = fs::read_to_string(&file).unwrap();
    text.push_str("# tampered\n");
    fs::write(&file, text).unwrap();
    let (code, _) = blowup(&["embed", "inst/manifest.json"], tmp.path());
    assert_eq!(code, 4);
}

#[test]
fn default_parameters_are_setup_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _) = blowup(&["gen", "instance", "-k", "3", "--size", "60", "--seed", "3", "--out", "inst"], tmp.path());
    assert_eq!(code, 0);
    let (code, out) = blowup(&["embed", "inst/manifest.json"], tmp.path());
    assert_eq!(code, 3);
    let m = Manifest::parse(&out).unwrap();
    assert!(matches!(m.results.embedding.unwrap().status, RunStatus::SetupInvalid { .. }));
}

#[test]
fn complete_host_embeds_in_every_mode() {
    for mode in ["random", "bijumbled", "degenerate"] {
        let tmp = tempfile::tempdir().unwrap();
        complete_instance(tmp.path(), mode);
        let (code, _) = blowup(&["embed", "inst/manifest.json", "--out", "run.json"], tmp.path());
        assert_eq!(code, 0, "mode {mode}");
        let m = manifest(&tmp.path().join("run.json"));
        let res = m.results.embedding.unwrap();
        assert!(res.is_success());
        assert!(res.verification.unwrap().is_pass());
        // Paths were rebased to the output's directory.
        let (code, _) = blowup(&["check", "run.json", "--which", "embedding"], tmp.path());
        assert_eq!(code, 0, "mode {mode}");
    }
}

#[test]
fn complete_host_partitions_pass() {
    let tmp = tempfile::tempdir().unwrap();
    complete_instance(tmp.path(), "random");
    let (code, out) = blowup(&["check", "inst/manifest.json", "--which", "partitions"], tmp.path());
    assert_eq!(code, 0);
    let m = Manifest::parse(&out).unwrap();
    assert!(m.results.partition.unwrap().is_pass());
}

#[test]
fn tampered_embedding_reports_a_non_edge() {
    let tmp = tempfile::tempdir().unwrap();
    complete_instance(tmp.path(), "random");
    let (code, _) = blowup(&["embed", "inst/manifest.json", "--out", "inst/run.json"], tmp.path());
    assert_eq!(code, 0);
    let path = tmp.path().join("inst/run.json");
    let mut m = manifest(&path);
    let h = load_graph(tmp.path().join("inst/h.edges")).unwrap();
    let res = m.results.embedding.as_mut().unwrap();
    // Move x onto the image of its clique partner: same part, so no Γ edge.
    let x = 0;
    let y = h.neighbors(x).iter().next().unwrap();
    let partner_part: Vec<usize> = m.xparts.iter().find(|p| p.contains(&y)).unwrap().clone();
    let z = partner_part.iter().copied().find(|&z| z != y).unwrap();
    res.psi.swap(x, z);
    fs::write(&path, m.to_json()).unwrap();
    let (code, out) = blowup(&["check", "inst/run.json", "--which", "embedding"], tmp.path());
    assert_eq!(code, 2);
    let check = Manifest::parse(&out).unwrap().results.embedding_check.unwrap();
    assert!(check.non_edge.is_some(), "{check:?}");
}

#[test]
fn bench_rows_match_the_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "bench", "--n", "60,90", "-p", "0.9,1.0", "--seeds", "5", "--params", "mu=0.05,rho=0.005,slack=2", "--out", "t.tsv",
    ];
    let (code, _) = blowup(&args, tmp.path());
    assert_eq!(code, 0);
    let table = fs::read_to_string(tmp.path().join("t.tsv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 1 + 4);
    for row in &lines[1..] {
        assert_eq!(row.split('\t').nth(4), Some("5"));
    }
    let (code, _) = blowup(&args[..args.len() - 1].iter().chain(["u.tsv"].iter()).copied().collect::<Vec<_>>(), tmp.path());
    assert_eq!(code, 0);
    assert_eq!(fs::read_to_string(tmp.path().join("u.tsv")).unwrap(), table);
}

#[test]
fn embed_output_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    complete_instance(tmp.path(), "bijumbled");
    let (_, out) = blowup(&["embed", "inst/manifest.json", "--trace"], tmp.path());
    let m = Manifest::parse(&out).unwrap();
    assert_eq!(Manifest::parse(&m.to_json()).unwrap(), m);
    assert_eq!(m.to_json(), out);
}

#[test]
fn unknown_subcommand_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(blowup(&["frobnicate"], tmp.path()).0, 4);
    assert_eq!(blowup(&["embed", "missing.json"], tmp.path()).0, 4);
}
