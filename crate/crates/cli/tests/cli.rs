use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run_cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrfmoves"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn put(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

/// Two nodes, one edge: unaries (0,2) and (3,0), pairwise 1 off the diagonal.
const TWO_NODE: &str = "\
mrf 2 1 2
unary 0 0 2
unary 1 3 0
edge 0 1 0 1 1 0
";

/// Three isolated nodes whose optimum (2,1,1) no single swap or expansion
/// reaches from (1,2,3), but one expansion-shrink move does.
const PICKY: &str = "\
mrf 3 0 3
unary 0 5 0 5
unary 1 0 5 5
unary 2 0 5 5
";

/// One edge whose table satisfies pairwise submodularity but spikes E(1,2)
/// above the two-hop route through state 3.
const SPIKED: &str = "\
mrf 2 1 3
unary 0 0 0 0
unary 1 0 0 0
edge 0 1 0 5 1 1 0 1 1 1 0
";

#[test]
fn solve_writes_labels_and_report() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "a.mrf", TWO_NODE);
    let out = run_cli(
        dir.path(),
        &[
            "solve", "--in", "a.mrf", "--method", "expansion", "--out", "a.labels", "--report",
            "a.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("expansion final energy 1 after"), "{}", stdout(&out));
    assert!(stdout(&out).contains("(converged)"));

    assert_eq!(fs::read_to_string(dir.path().join("a.labels")).unwrap(), "1\n2\n");

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(json["method"], "expansion");
    assert_eq!(json["initial_energy"], 3.0);
    assert_eq!(json["final_energy"], 1.0);
    assert_eq!(json["seed"], 0);
    assert_eq!(json["truncation_used"], false);
    assert_eq!(json["instance_hash"].as_str().unwrap().len(), 16);
    assert!(!json["sweep_energies"].as_array().unwrap().is_empty());
}

#[test]
fn solve_accepts_a_labeling_file_as_init() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "a.mrf", TWO_NODE);
    put(dir.path(), "start.labels", "1\n2\n");
    let out = run_cli(
        dir.path(),
        &["solve", "--in", "a.mrf", "--method", "icm", "--init", "start.labels"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("icm final energy 1 after"), "{}", stdout(&out));

    let short = put(dir.path(), "short.labels", "1\n");
    let out = run_cli(
        dir.path(),
        &["solve", "--in", "a.mrf", "--method", "icm", "--init", short.to_str().unwrap()],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn shrink_pairing_escapes_in_one_move() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "picky.mrf", PICKY);
    put(dir.path(), "start.labels", "1\n2\n3\n");
    let out = run_cli(
        dir.path(),
        &[
            "solve", "--in", "picky.mrf", "--method", "expshrink-next", "--init", "start.labels",
            "--out", "final.labels", "--report", "r.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("final energy 0 after"), "{}", stdout(&out));
    assert_eq!(fs::read_to_string(dir.path().join("final.labels")).unwrap(), "2\n1\n1\n");

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(json["initial_energy"], 15.0);
    assert_eq!(json["final_energy"], 0.0);
    assert_eq!(json["accepted_moves"], 1);
}

#[test]
fn check_prints_one_based_verdicts_per_edge() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "spiked.mrf", SPIKED);

    let out = run_cli(dir.path(), &["check", "--in", "spiked.mrf", "--triangle"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("edge 0 1 violation alpha=3 gamma1=1 gamma2=2"), "{text}");
    assert!(text.contains("1 edges, 1 violations"), "{text}");

    let out = run_cli(dir.path(), &["check", "--in", "spiked.mrf", "--pairwise-submodular"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("edge 0 1 ok"));

    // The property flag is mandatory and exclusive.
    let out = run_cli(dir.path(), &["check", "--in", "spiked.mrf"]);
    assert_eq!(code(&out), 3);
    let out = run_cli(
        dir.path(),
        &["check", "--in", "spiked.mrf", "--triangle", "--pairwise-submodular"],
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn check_passes_an_edgeless_instance() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "picky.mrf", PICKY);
    let out = run_cli(dir.path(), &["check", "--in", "picky.mrf", "--triangle"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("0 edges, 0 violations"));
}

fn run_json(method: &str, hash: &str, final_energy: f64) -> String {
    format!(
        r#"{{"method":"{method}","seed":0,"instance_hash":"{hash}","initial_energy":200.0,"final_energy":{final_energy},"sweep_energies":[{final_energy}],"sweeps":1,"accepted_moves":1,"truncation_used":false}}"#
    )
}

#[test]
fn report_renders_the_ratio_table() {
    let dir = tempfile::tempdir().unwrap();
    let hash = "00000000deadbeef";
    put(dir.path(), "base.json", &run_json("expansion", hash, 100.0));
    put(dir.path(), "swap.json", &run_json("swap", hash, 97.58));
    put(dir.path(), "icm.json", &run_json("icm", hash, 100.0));

    let out = run_cli(
        dir.path(),
        &["report", "--baseline", "base.json", "--runs", "swap.json", "icm.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "method ratio\nexpansion 1\nswap 0.9758\nicm 1\n");
}

#[test]
fn report_switches_to_absolute_energies_on_a_zero_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let hash = "0123456789abcdef";
    put(dir.path(), "base.json", &run_json("expshrink-next", hash, 0.0));
    put(dir.path(), "swap.json", &run_json("swap", hash, 3.5));
    let out = run_cli(
        dir.path(),
        &["report", "--baseline", "base.json", "--runs", "swap.json", "--out", "table.txt"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        fs::read_to_string(dir.path().join("table.txt")).unwrap(),
        "method energy\nexpshrink-next 0\nswap 3.5\n"
    );
}

#[test]
fn report_refuses_runs_from_different_instances() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "base.json", &run_json("expansion", "00000000deadbeef", 10.0));
    put(dir.path(), "other.json", &run_json("swap", "00000000deadbeee", 10.0));
    let out = run_cli(
        dir.path(),
        &["report", "--baseline", "base.json", "--runs", "other.json"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("different instances"), "{}", stderr(&out));
}

#[test]
fn solve_and_report_agree_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "a.mrf", TWO_NODE);
    for method in ["expansion", "swap"] {
        let report = format!("{method}.json");
        let out = run_cli(
            dir.path(),
            &["solve", "--in", "a.mrf", "--method", method, "--report", &report],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let out = run_cli(
        dir.path(),
        &["report", "--baseline", "expansion.json", "--runs", "swap.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "method ratio\nexpansion 1\nswap 1\n");
}

#[test]
fn generate_is_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate", "--kind", "potts-grid", "--rows", "3", "--cols", "3", "--states", "2",
        "--seed", "7", "--out",
    ];
    let mut first = args.to_vec();
    first.push("g1.mrf");
    let mut second = args.to_vec();
    second.push("g2.mrf");
    assert_eq!(code(&run_cli(dir.path(), &first)), 0);
    assert_eq!(code(&run_cli(dir.path(), &second)), 0);

    let g1 = fs::read_to_string(dir.path().join("g1.mrf")).unwrap();
    let g2 = fs::read_to_string(dir.path().join("g2.mrf")).unwrap();
    assert_eq!(g1, g2);
    assert!(g1.starts_with("mrf 9 12 2\n"), "{}", &g1[..20.min(g1.len())]);

    let out = run_cli(dir.path(), &["solve", "--in", "g1.mrf", "--method", "swap"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn generated_triangle_instances_pass_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(
        dir.path(),
        &[
            "generate", "--kind", "random-grid", "--rows", "2", "--cols", "3", "--states", "3",
            "--seed", "11", "--force-triangle", "--out", "t.mrf",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run_cli(dir.path(), &["check", "--in", "t.mrf", "--triangle"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn quadratic_grids_violate_the_triangle_but_still_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(
        dir.path(),
        &[
            "generate", "--kind", "quad-grid", "--rows", "4", "--cols", "4", "--states", "4",
            "--cap", "25", "--seed", "3", "--out", "q.mrf",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run_cli(dir.path(), &["check", "--in", "q.mrf", "--triangle"]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));

    let out = run_cli(
        dir.path(),
        &["solve", "--in", "q.mrf", "--method", "expshrink-all", "--report", "q.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("q.json")).unwrap()).unwrap();
    assert!(json["final_energy"].as_f64().unwrap() <= json["initial_energy"].as_f64().unwrap());
}

#[test]
fn export_pgm_writes_the_expected_bytes() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "ramp.labels", "1\n2\n3\n3\n2\n1\n");
    let out = run_cli(
        dir.path(),
        &[
            "export-pgm", "--labels", "ramp.labels", "--rows", "2", "--cols", "3", "--states",
            "3", "--out", "ramp.pgm",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let bytes = fs::read(dir.path().join("ramp.pgm")).unwrap();
    let mut expected = b"P5\n3 2\n255\n".to_vec();
    expected.extend([0u8, 128, 255, 255, 128, 0]);
    assert_eq!(bytes, expected);

    // A constant labeling renders as constant gray.
    put(dir.path(), "flat.labels", "1\n1\n1\n1\n1\n1\n");
    let out = run_cli(
        dir.path(),
        &[
            "export-pgm", "--labels", "flat.labels", "--rows", "2", "--cols", "3", "--states",
            "2", "--out", "flat.pgm",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let bytes = fs::read(dir.path().join("flat.pgm")).unwrap();
    assert_eq!(&bytes[bytes.len() - 6..], &[0u8; 6]);

    let out = run_cli(
        dir.path(),
        &[
            "export-pgm", "--labels", "ramp.labels", "--rows", "2", "--cols", "4", "--states",
            "3", "--out", "bad.pgm",
        ],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn malformed_inputs_exit_2_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "bad.mrf", "mrf 2 0 2\nunary 0 0 x\nunary 1 0 0\n");
    let out = run_cli(dir.path(), &["solve", "--in", "bad.mrf", "--method", "icm"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    put(dir.path(), "trunc.mrf", "mrf 2 1 2\nunary 0 0 0\nunary 1 0 0\n");
    let out = run_cli(dir.path(), &["check", "--in", "trunc.mrf", "--triangle"]);
    assert_eq!(code(&out), 2);

    let out = run_cli(dir.path(), &["solve", "--in", "missing.mrf", "--method", "icm"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_flags_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "a.mrf", TWO_NODE);
    let out = run_cli(dir.path(), &["solve", "--in", "a.mrf", "--method", "annealing"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("unknown method"), "{}", stderr(&out));

    let out = run_cli(dir.path(), &["solve", "--in", "a.mrf"]);
    assert_eq!(code(&out), 3);

    let out = run_cli(dir.path(), &["generate", "--kind", "nope", "--out", "x.mrf"]);
    assert_eq!(code(&out), 3);

    let out = run_cli(dir.path(), &["--help"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn random_beta_runs_reproduce_with_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(
        dir.path(),
        &[
            "generate", "--kind", "random-small", "--seed", "42", "--max-nodes", "6",
            "--max-states", "4", "--triangle", "--out", "rs.mrf",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for name in ["r1.json", "r2.json"] {
        let out = run_cli(
            dir.path(),
            &[
                "solve", "--in", "rs.mrf", "--method", "expshrink-random", "--seed", "9",
                "--report", name,
            ],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let r1 = fs::read_to_string(dir.path().join("r1.json")).unwrap();
    let r2 = fs::read_to_string(dir.path().join("r2.json")).unwrap();
    assert_eq!(r1, r2);
}
