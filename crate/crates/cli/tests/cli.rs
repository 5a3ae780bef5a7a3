use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use displacer_core::harness::ExperimentReport;

fn displacer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_displacer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gen(dir: &Path, preset: &str, seed: &str) -> PathBuf {
    let out = dir.join(format!("{preset}-{seed}"));
    let o = displacer(&[
        "gen-world",
        "--preset",
        preset,
        "--seed",
        seed,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn gen_world_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = gen(tmp.path(), "demo", "3");
    let b = tmp.path().join("again");
    let o = displacer(&[
        "gen-world",
        "--preset",
        "demo",
        "--seed",
        "3",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    for name in [
        "embeddings.txt",
        "kb.kb",
        "lexicon.tsv",
        "gold.tsv",
        "names.csv",
        "machines.txt",
        "sswr.txt",
        "sat.txt",
    ] {
        let (x, y) = (
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
        );
        assert!(!x.is_empty() && x == y, "{name}");
    }
}

#[test]
fn gen_world_from_spec_file() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.toml");
    std::fs::write(
        &spec,
        "seed = 4\ndim = 8\nfiller_words = 10\n[[relations]]\nmembers = 6\nheld_out = 1\n",
    )
    .unwrap();
    let out = tmp.path().join("w");
    let o = displacer(&[
        "gen-world",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(out.join("embeddings.txt"))
        .unwrap()
        .starts_with("22 8\n"));

    std::fs::write(&spec, "dim = 8\n[[relations]]\noffset_norm = 0.0\n").unwrap();
    let o = displacer(&[
        "gen-world",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn query_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let w = gen(tmp.path(), "capitals", "1");
    let w = w.to_str().unwrap();
    let o = displacer(&["query", "--world", w, "(capitalCity ?X Country02)"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("capital_02"));

    let o = displacer(&[
        "query",
        "--world",
        w,
        "--mode",
        "hybrid-single",
        "(capitalCity ?X Country27)",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert!(first.contains("capital_27") && first.contains("support="), "{first}");

    let o = displacer(&["query", "--world", w, "(capitalCity ?X Country02"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("byte"), "{}", stderr(&o));
}

#[test]
fn gender_report_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let w = gen(tmp.path(), "gender", "2");
    let out = tmp.path().join("gender.jsonl");
    let o = displacer(&["gender", "--world", w.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("confusion[male->male]"));
    let report = ExperimentReport::from_jsonl(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.is_consistent());
    assert!(report.metric("accuracy").unwrap() >= 0.95);
    assert!(report.source.contains("synthetic world"));
}

#[test]
fn analogy_and_parts_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let w = gen(tmp.path(), "demo", "5");
    let w = w.to_str().unwrap();
    for mode in ["dsvs", "kb", "combined"] {
        let o = displacer(&["sswr", "--world", w, "--mode", mode]);
        assert!(o.status.success(), "{mode}: {}", stderr(&o));
        assert!(stdout(&o).contains(&format!("sswr-{mode}")));
    }
    let o = displacer(&["sat", "--world", w, "--mode", "combined"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = displacer(&["parts", "--world", w, "--mode", "approximate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("mean[top3_precision]"));
    let o = displacer(&["sweep", "--world", w, "--min", "2", "--max", "3"]);
    assert!(stdout(&o).contains("p_rank1[n=03]"), "{}", stderr(&o));
    let o = displacer(&["rank-prob", "--world", w, "--domain", "(isa ?X Country)"]);
    assert!(stdout(&o).contains("p_missed"), "{}", stderr(&o));
}

#[test]
fn config_file_then_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let w = gen(tmp.path(), "capitals", "6");
    let w = w.to_str().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# settings\nn_neighbors = 0\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = displacer(&["rank-prob", "--world", w, "--config", cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = displacer(&["rank-prob", "--world", w, "--config", cfg, "--set", "n_neighbors=3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("p_rank1"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let w = gen(tmp.path(), "analogy", "1");
    let ws = w.to_str().unwrap();

    assert_eq!(displacer(&["--help"]).status.code(), Some(0));
    assert_eq!(displacer(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(
        displacer(&["query", "--mode", "sideways", "--world", ws, "(p ?X)"])
            .status
            .code(),
        Some(3)
    );
    // no stores given
    assert_eq!(displacer(&["query", "(p ?X)"]).status.code(), Some(3));
    assert_eq!(
        displacer(&["sweep", "--world", ws, "--min", "0"]).status.code(),
        Some(3)
    );
    assert_eq!(
        displacer(&["sswr", "--world", ws, "--set", "bogus=1"]).status.code(),
        Some(3)
    );

    let missing = displacer(&[
        "query",
        "--world",
        tmp.path().join("nowhere").to_str().unwrap(),
        "(p ?X)",
    ]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = tmp.path().join("bad.txt");
    std::fs::write(&bad, ": c\nverb_01_ing verb_01_ed verb_02_ing\n").unwrap();
    let o = displacer(&["sswr", "--world", ws, "--file", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let empty = tmp.path().join("names.csv");
    std::fs::write(&empty, "name,gender\n").unwrap();
    let o = displacer(&["gender", "--world", ws, "--names", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no items"));
}
