use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_smallcanc"));
    c.env_remove("SMALLCANC_SEED");
    c
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../presentations")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn kv(o: &Output, key: &str) -> Vec<String> {
    stdout(o)
        .lines()
        .filter_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
        .collect()
}

fn write_pres(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let pass = run(&["check", shipped("corpus-letter-gf2.pres").to_str().unwrap()]);
    assert_eq!(pass.status.code(), Some(0));
    assert!(stdout(&pass).contains("ring: true"));

    let fail = run(&["check", shipped("corpus-relator-two.pres").to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(stdout(&fail).contains("ring: false"));

    let missing = run(&["check", "/definitely/not/here.pres"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn malformed_and_divergent_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_pres(&dir, "bad.pres", "field Q\nalphabet x\nrel 1 + q\n");
    assert_eq!(run(&["check", bad.to_str().unwrap()]).status.code(), Some(2));

    let tri = write_pres(&dir, "tri.pres", "field GF(2)\ntau 10\nalphabet x y\nrel 1 + y + y*x\n");
    let o = run(&["check", tri.to_str().unwrap(), "--max-relations", "200"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
}

#[test]
fn every_report_starts_with_the_config_header() {
    let f = shipped("corpus-mixed-q.pres");
    let o = run(&["query", f.to_str().unwrap(), "pieces", "--format", "kv"]);
    let text = stdout(&o);
    assert!(text.starts_with("section=config\n"));
    assert!(text.contains("order=<_f: f-characteristic, then length, then letter order"));
    assert!(text.contains("lambda_identity=0"));
    assert_eq!(kv(&o, "count"), ["3"]);
}

#[test]
fn member_query_reports_a_verified_certificate() {
    let f = shipped("corpus-mixed-q.pres");
    for policy in ["first", "all"] {
        let o = run(&[
            "query",
            f.to_str().unwrap(),
            "member",
            "y*z*y^-1*x - x",
            "--policy",
            policy,
            "--format",
            "kv",
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(kv(&o, "verdict"), ["member"]);
        assert_eq!(kv(&o, "certificate_verified"), ["true"]);
    }
    let o = run(&["query", f.to_str().unwrap(), "member", "x*y", "--format", "kv"]);
    assert_eq!(kv(&o, "verdict"), ["nonmember"]);
}

#[test]
fn oracle_default_bound_is_input_length_plus_two() {
    let f = shipped("corpus-letter-gf2.pres");
    let o = run(&["query", f.to_str().unwrap(), "oracle", "x*y*x + y*x", "--format", "kv"]);
    assert_eq!(kv(&o, "oracle_bound"), ["5"]);
    assert_eq!(kv(&o, "outcome"), ["member"]);
    assert_eq!(kv(&o, "recombines"), ["true"]);
}

#[test]
fn nontrivial_failure_exits_one() {
    let ok = run(&["query", shipped("corpus-letter-q.pres").to_str().unwrap(), "nontrivial"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = run(&[
        "query",
        shipped("corpus-constant-combination.pres").to_str().unwrap(),
        "nontrivial",
        "--oracle-bound",
        "4",
        "--format",
        "kv",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(kv(&bad, "passes"), ["false"]);
}

#[test]
fn chart_queries_need_tau_five() {
    let f = shipped("corpus-letter-gf2.pres");
    let o = run(&["query", f.to_str().unwrap(), "chart", "x*y", "--tau", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["query", f.to_str().unwrap(), "chart", "x*y", "--tau", "5", "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(kv(&o, "warning"), ["tau below 10"]);
}

#[test]
fn turn_query_has_zero_defect() {
    let f = shipped("corpus-mixed-q.pres");
    let o = run(&["query", f.to_str().unwrap(), "turn", "y*z*y^-1*x", "1", "0", "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(kv(&o, "defect_zero"), ["true"]);
}

#[test]
fn output_is_deterministic() {
    let f = shipped("corpus-two-letters-gf3.pres");
    let args = ["query", f.to_str().unwrap(), "basis-sample", "2"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
    let c = ["check", f.to_str().unwrap()];
    assert_eq!(stdout(&run(&c)), stdout(&run(&c)));
}

#[test]
fn corpus_seed_comes_from_flag_or_environment() {
    let flag = stdout(&run(&["gen", "corpus", "--seed", "3"]));
    let env = bin().args(["gen", "corpus"]).env("SMALLCANC_SEED", "3").output().unwrap();
    assert_eq!(flag, stdout(&env));
    assert_ne!(flag, stdout(&run(&["gen", "corpus"])));
    assert_eq!(stdout(&run(&["gen", "corpus"])), stdout(&run(&["gen", "corpus", "--seed", "0"])));
}

#[test]
fn shipped_files_match_the_generator() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen", "shipped", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut count = 0;
    for entry in fs::read_dir(dir.path()).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name();
        let committed = fs::read_to_string(shipped(name.to_str().unwrap())).unwrap();
        assert_eq!(fs::read_to_string(entry.path()).unwrap(), committed, "{name:?}");
        count += 1;
    }
    assert_eq!(count, 22);
}

#[test]
fn generated_presentations_round_trip_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen", "group-algebra", "--alphabet", "a,b", "a*b*a^-1*b^-1*a*a"]);
    let p = write_pres(&dir, "ga.pres", &stdout(&o));
    assert!(run(&["check", p.to_str().unwrap()]).status.code().unwrap() < 2);

    let o = run(&["gen", "cm", "--alphabet", "a,b,c", "--length", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let p = write_pres(&dir, "cm.pres", &stdout(&o));
    assert_eq!(run(&["check", p.to_str().unwrap()]).status.code(), Some(1));

    let o = run(&["gen", "trinomial", "--alphabet", "x,y", "--w", "x", "--v", "y"]);
    assert!(stdout(&o).starts_with("# inverse query: "));
}
