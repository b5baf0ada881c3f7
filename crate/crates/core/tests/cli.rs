use std::io::Cursor;
use std::process::Command;

use dscalc::cli::run_command;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn ds(args: &[&str]) -> Run {
    ds_stdin(args, "")
}

fn ds_stdin(args: &[&str], input: &str) -> Run {
    let mut argv = vec!["ds"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_command(
        argv,
        &mut Cursor::new(input.as_bytes().to_vec()),
        &mut out,
        &mut err,
    );
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("dscalc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn combine_reports_conflict() {
    let r = ds(&["combine", "ex-cano-1.bpa", "ex-cano-2.bpa"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.lines().any(|l| l == "conflict=9/25"));
    assert!(r.out.lines().filter(|l| l.starts_with("focal=")).count() > 5);
}

#[test]
fn intrinsic_query_on_a_written_file() {
    let path = tmp("bel12.bpa");
    let p = path.to_str().unwrap();
    assert_eq!(
        ds(&["combine", "ex-cano-1.bpa", "ex-cano-2.bpa", "-o", p]).code,
        0
    );
    let r = ds(&[
        "indep",
        "--type",
        "intrinsic",
        "-q",
        "Y",
        "-r",
        "Z",
        "-p",
        "X",
        p,
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("verdict=true"));
    assert!(r.out.contains("left.focal="));
    assert!(r.out.contains("right.focal="));
    assert!(r.out.contains("cross_check=true"));
    let r = ds(&["indep", "--type", "cano", "-p", "X", p]);
    assert_eq!(r.code, 3);
}

#[test]
fn verdict_exit_codes() {
    assert_eq!(
        ds(&[
            "indep",
            "--type",
            "unconditional",
            "-p",
            "X",
            "-q",
            "Y",
            "ex-square.bpa"
        ])
        .code,
        3
    );
    assert_eq!(
        ds(&[
            "indep",
            "--type",
            "unconditional",
            "-q",
            "X",
            "-r",
            "Y",
            "ex-xor.bpa"
        ])
        .code,
        0
    );
    assert_eq!(
        ds(&[
            "indep",
            "--type",
            "shenoy",
            "-q",
            "X",
            "-r",
            "Y",
            "-p",
            "Z",
            "ex-xor.bpa"
        ])
        .code,
        3
    );
    assert_eq!(
        ds(&[
            "indep",
            "--type",
            "shenoy",
            "-q",
            "X",
            "-r",
            "Y",
            "-p",
            "Z",
            "ex-chain.bpa"
        ])
        .code,
        0
    );
    assert_eq!(
        ds(&["universe-focal", "--size", "3", "--eps", "1/10"]).code,
        3
    );
    assert_eq!(ds(&["universe-focal", "--size", "3", "--eps", "0"]).code, 0);
}

#[test]
fn solver_cap_gives_unknown() {
    let doc = "frame X = x1 x2 ; Y = y1 y2\nm { (x1 y1) } = 1/2\nm { (x1 y2) } = 1/2\n";
    let args = ["indep", "--type", "cano", "-p", "X", "-"];
    assert_eq!(ds_stdin(&args, doc).code, 0);
    let mut capped = vec!["--solver-cap", "0"];
    capped.extend_from_slice(&args);
    let r = ds_stdin(&capped, doc);
    assert_eq!(r.code, 4, "{}{}", r.out, r.err);
    assert!(r.out.contains("verdict=unknown"));
}

#[test]
fn examples_replay() {
    let r = ds(&["examples", "--run", "all"]);
    assert_eq!(r.code, 0, "{}", r.out);
    assert!(r.out.contains("failed=0"));
    assert_eq!(ds(&["examples", "--run", "ex-diag"]).code, 0);
    assert_eq!(ds(&["examples", "--run", "nothing"]).code, 64);
}

#[test]
fn error_exit_codes() {
    assert_eq!(ds(&["frobnicate"]).code, 64);
    assert_eq!(ds(&["show", "/nonexistent/file.bpa"]).code, 74);
    let r = ds_stdin(&["show", "-"], "frame X = x1 x2\nm { } = 1\n");
    assert_eq!(r.code, 65);
    assert!(r.err.contains("line 2"));
    assert_eq!(
        ds_stdin(
            &["show", "-"],
            "frame X = x1 x2\nm { (x1) } = -1\nm { (x2) } = 1\n"
        )
        .code,
        65
    );
    assert_eq!(ds(&["--lattice-gate", "4", "show", "ex-xor.bpa"]).code, 0);
    assert_eq!(
        ds(&[
            "--lattice-gate",
            "4",
            "indep",
            "--type",
            "shenoy",
            "-q",
            "X",
            "-r",
            "Y",
            "-p",
            "Z",
            "ex-xor.bpa"
        ])
        .code,
        66
    );
    let disjoint = "frame X = x1 x2\nm { (x1) } = 1\n";
    let path = tmp("x1.bpa");
    std::fs::write(&path, disjoint).unwrap();
    let other = tmp("x2.bpa");
    std::fs::write(&other, "frame X = x1 x2\nm { (x2) } = 1\n").unwrap();
    assert_eq!(
        ds(&["combine", path.to_str().unwrap(), other.to_str().unwrap()]).code,
        67
    );
    assert_eq!(
        ds(&[
            "indep",
            "--type",
            "shenoy",
            "-q",
            "X",
            "-r",
            "X",
            "ex-xor.bpa"
        ])
        .code,
        64
    );
}

#[test]
fn condition_and_project() {
    let path = tmp("sq-x1.bpa");
    let p = path.to_str().unwrap();
    let r = ds(&["condition", "ex-square.bpa", "--evidence", "X=x1", "-o", p]);
    assert_eq!(r.code, 0, "{}", r.err);
    let r = ds(&["project", p, "--onto", "Y"]);
    assert_eq!(
        r.out,
        "frame=Y = y1 y2\nfocal=1/4 { (y1) }\nfocal=1/2 { (y1) (y2) }\nfocal=1/4 { (y2) }\n"
    );
    let r = ds(&["project", "ex-diag.bpa", "--onto", "Y,Z", "-o", "-"]);
    assert!(r.out.ends_with(dscalc::fixtures::EX_DIAG_YZ));
}

#[test]
fn extend_adds_variables() {
    let r = ds(&[
        "extend",
        "ex-diag-xy.bpa",
        "--onto",
        "Z = z1 z2 z3",
        "-o",
        "-",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.ends_with(dscalc::fixtures::EX_DIAG_CANDIDATE));
}

#[test]
fn anticonditional_commands() {
    let r = ds(&[
        "anticond",
        "ex-diag.bpa",
        "--given",
        "Y,Z",
        "--verify",
        "ex-diag-candidate.bpa",
    ]);
    assert_eq!(r.code, 0, "{}", r.out);
    assert!(r.out.contains("valid=true"));
    let r = ds(&[
        "anticond",
        "ex-diag.bpa",
        "--given",
        "Y,Z",
        "--solve",
        "compress:Z",
        "-o",
        "-",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.ends_with(dscalc::fixtures::EX_DIAG_CANDIDATE));
    let r = ds(&[
        "anticond",
        "ex-twocond.bpa",
        "--given",
        "Y",
        "--verify",
        "ex-twocond-first.bpa",
    ]);
    assert_eq!(r.code, 3);
    assert!(r.out.contains("residual="));
    assert_eq!(
        ds(&["anticond", "ex-diag.bpa", "--given", "Y", "--solve", "what"]).code,
        64
    );
}

#[test]
fn removal_reports_masses() {
    let r = ds(&["remove", "ex-cano-1.bpa", "ex-cano-1.bpa"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r
        .out
        .contains("focal=1 { (x1 y1) (x1 y2) (x2 y1) (x2 y2) }"));
    assert!(r.out.contains("negative_mass=false"));
}

#[test]
fn graphoid_single_tuple_and_sweep() {
    let r = ds(&[
        "graphoid",
        "ex-chain.bpa",
        "--axioms",
        "intersection",
        "--relation",
        "shenoy",
        "--q",
        "Y",
        "--r",
        "Z",
        "--s",
        "X",
    ]);
    assert_eq!(r.code, 3);
    assert!(r.out.contains("status=violated"));
    let r = ds(&[
        "graphoid",
        "ex-chain.bpa",
        "--axioms",
        "intersection",
        "--q",
        "Y",
        "--r",
        "Z",
        "--s",
        "X",
    ]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("status=gate-failed(diversity)"));
    let r = ds(&[
        "graphoid",
        "ex-xor.bpa",
        "--relation",
        "unconditional",
        "--brief",
    ]);
    assert_eq!(r.code, 0, "{}", r.out);
    assert!(r.out.contains("violated=0"));
}

#[test]
fn gen_is_deterministic_and_parses() {
    let a = ds(&["gen", "--vars", "2,3", "--seed", "9", "--diverse"]);
    let b = ds(&["gen", "--vars", "2,3", "--seed", "9", "--diverse"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.out, b.out);
    let shown = ds_stdin(&["show", "-"], &a.out);
    assert!(shown.out.contains("diverse=true"));
    let f = ds(&[
        "gen",
        "--vars",
        "2,2,2",
        "--seed",
        "1",
        "--factorized",
        "X,Y|Y,Z",
        "--diverse",
    ]);
    let s = ds_stdin(
        &[
            "indep", "--type", "shenoy", "-q", "X", "-r", "Z", "-p", "Y", "-",
        ],
        &f.out,
    );
    assert_eq!(s.code, 0, "{}", s.out);
}

#[test]
fn table_format_aligns() {
    let r = ds(&["--format", "table", "show", "ex-chain.bpa"]);
    assert!(r.out.lines().any(|l| l.starts_with("probabilistic  true")));
}

#[test]
fn kv_output_is_byte_identical() {
    let args = ["graphoid", "ex-xor.bpa", "--relation", "shenoy"];
    assert_eq!(ds(&args).out, ds(&args).out);
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_ds"))
        .args(["combine", "ex-cano-1.bpa", "ex-cano-2.bpa"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("conflict=9/25"));
    let out = Command::new(env!("CARGO_BIN_EXE_ds"))
        .args(["examples", "--run", "ex-xor"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
