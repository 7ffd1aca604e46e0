//! End-to-end tests of the sgvec binary: exit codes, the
//! generate → embed → classify → report pipeline, and run-to-run
//! determinism at --threads 1.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sgvec"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn sgvec");
    assert!(
        out.status.success(),
        "sgvec {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> i32 {
    bin()
        .args(args)
        .output()
        .expect("spawn sgvec")
        .status
        .code()
        .expect("exit code")
}

fn generate_small(dir: &Path) -> PathBuf {
    run_ok(&[
        "generate",
        "--out",
        dir.to_str().unwrap(),
        "--n-graphs",
        "30",
        "--n-min",
        "10",
        "--n-max",
        "14",
        "--k-min",
        "1",
        "--k-max",
        "3",
        "--seed",
        "11",
    ]);
    dir.join("manifest.csv")
}

/// Embedding file with header comments stripped, for byte comparisons
/// that must ignore the timing line.
fn strip_comments(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn full_pipeline_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate_small(&tmp.path().join("coll"));
    let emb = tmp.path().join("emb.txt");
    run_ok(&[
        "embed",
        "--collection",
        manifest.to_str().unwrap(),
        "--method",
        "sg2vsb",
        "--depth",
        "2",
        "--dim",
        "16",
        "--epochs",
        "5",
        "--out",
        emb.to_str().unwrap(),
        "--seed",
        "11",
    ]);
    let header = std::fs::read_to_string(&emb).unwrap();
    assert!(header.contains("# method=sg2vsb"));
    assert!(header.contains("# depth=2"));
    assert!(header.contains("# seed=11"));
    assert!(header.contains("# seconds_per_graph="));

    let scores = tmp.path().join("scores.csv");
    run_ok(&[
        "classify",
        "--embeddings",
        emb.to_str().unwrap(),
        "--collection",
        manifest.to_str().unwrap(),
        "--folds",
        "5",
        "--out",
        scores.to_str().unwrap(),
        "--seed",
        "11",
    ]);
    let csv = std::fs::read_to_string(&scores).unwrap();
    assert!(csv.starts_with("method,parameter,macro_precision,macro_recall,macro_f"));
    assert!(csv.lines().nth(1).unwrap().starts_with("sg2vsb,2,"));

    let out = run_ok(&["report", scores.to_str().unwrap()]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("sg2vsb"));
    // The single row holds every column maximum, so all three scores are marked.
    assert_eq!(table.matches('*').count(), 6);
}

#[test]
fn embedding_is_deterministic_modulo_timing() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate_small(&tmp.path().join("coll"));
    let run = |out: &Path| {
        run_ok(&[
            "embed",
            "--collection",
            manifest.to_str().unwrap(),
            "--method",
            "sine-sum",
            "--dim",
            "8",
            "--epochs",
            "10",
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "3",
            "--threads",
            "1",
        ]);
    };
    let (a, b) = (tmp.path().join("a.txt"), tmp.path().join("b.txt"));
    run(&a);
    run(&b);
    assert_eq!(strip_comments(&a), strip_comments(&b));
}

#[test]
fn generate_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let m1 = generate_small(&tmp.path().join("c1"));
    let m2 = generate_small(&tmp.path().join("c2"));
    assert_eq!(
        std::fs::read_to_string(&m1).unwrap(),
        std::fs::read_to_string(&m2).unwrap()
    );
    // Spot-check one edge file byte-for-byte.
    let edges = |m: &Path| {
        let dir = m.parent().unwrap();
        let first = std::fs::read_to_string(m)
            .unwrap()
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .to_string();
        std::fs::read_to_string(dir.join(first)).unwrap()
    };
    assert_eq!(edges(&m1), edges(&m2));
}

#[test]
fn convolution_methods_write_metadata_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate_small(&tmp.path().join("coll"));
    let emb = tmp.path().join("w.txt");
    run_ok(&[
        "embed",
        "--collection",
        manifest.to_str().unwrap(),
        "--method",
        "wsgcn-gb",
        "--depth",
        "1",
        "--dim",
        "4",
        "--epochs",
        "2",
        "--out",
        emb.to_str().unwrap(),
        "--seed",
        "5",
    ]);
    let meta = std::fs::read_to_string(tmp.path().join("w.meta")).unwrap();
    let mut lines = meta.lines();
    assert_eq!(
        lines.next().unwrap(),
        "graph_id scheme masters partition_checksum frustration"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 30);
    for row in rows {
        let fields: Vec<&str> = row.split(' ').collect();
        assert_eq!(fields[1], "gb");
        assert!(fields[2].parse::<usize>().unwrap() >= 1);
        assert_eq!(fields[3].len(), 16, "checksum is 8 hex bytes");
        fields[4].parse::<usize>().expect("frustration count");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate_small(&tmp.path().join("coll"));
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "method=g2v\ndepth=4\ndim=8\nepochs=3\n").unwrap();
    let emb = tmp.path().join("cfg.txt");
    run_ok(&[
        "embed",
        "--collection",
        manifest.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--depth",
        "2",
        "--out",
        emb.to_str().unwrap(),
    ]);
    let header = std::fs::read_to_string(&emb).unwrap();
    assert!(header.contains("# method=g2v"), "method from config file");
    assert!(header.contains("# depth=2"), "flag overrides config depth");
    assert!(header.contains("# dim=8"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(exit_code(&["embed", "--collection", "x", "--out", "y"]), 2); // no method
    assert_eq!(
        exit_code(&[
            "embed",
            "--collection",
            "x",
            "--method",
            "g2v",
            "--depth",
            "9",
            "--out",
            "y"
        ]),
        2
    );
    assert_eq!(exit_code(&["no-such-command"]), 2);
    assert_eq!(exit_code(&["report"]), 2);
}

#[test]
fn data_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        exit_code(&[
            "stats",
            "--collection",
            tmp.path().join("missing.csv").to_str().unwrap()
        ]),
        3
    );

    // Embedding ids that do not appear in the manifest.
    let manifest = generate_small(&tmp.path().join("coll"));
    let emb = tmp.path().join("bad.txt");
    std::fs::write(&emb, "2 2 1\nghost-a 0.1 0.2\nghost-b 0.3 0.4\n").unwrap();
    let out = bin()
        .args([
            "classify",
            "--embeddings",
            emb.to_str().unwrap(),
            "--collection",
            manifest.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ghost-a"), "offending ids are listed: {err}");
}

#[test]
fn classify_report_chain_marks_best_method() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    let head = "method,parameter,macro_precision,macro_recall,macro_f,seconds_per_graph\n";
    std::fs::write(&a, format!("{head}g2v,1,50.00,50.00,50.00,0.001\ng2v,2,60.00,61.00,60.50,0.002\n")).unwrap();
    std::fs::write(&b, format!("{head}sg2vn,3,70.00,69.00,69.50,0.003\n")).unwrap();
    let out = run_ok(&["report", a.to_str().unwrap(), b.to_str().unwrap()]);
    let table = String::from_utf8_lossy(&out.stdout);
    // Best g2v row (depth 2) survives; sg2vn holds every maximum.
    assert!(table.contains("g2v          2"));
    assert!(!table.contains("g2v          1"));
    assert!(table.contains("*70.00*"));
    assert!(table.contains("*69.50*"));
    assert!(table.contains("60.50"));
    assert!(!table.contains("*60.50*"));
}
