use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn fmtk(dir: &Path, args: &[&str]) -> Run {
    let Output { status, stdout, stderr } =
        Command::new(env!("CARGO_BIN_EXE_fmtk")).current_dir(dir).args(args).output().expect("binary runs");
    Run {
        code: status.code().expect("exited normally"),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn json(dir: &Path, args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let r = fmtk(dir, &all);
    let v: Value = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", r.stdout));
    assert_eq!(v["exit_code"], r.code, "{args:?}");
    (r.code, v)
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

/// Undirected path with `n` vertices.
fn path_text(n: u32) -> String {
    let mut s = format!("vocab E/2\nuniverse {}\n", (1..=n).map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
    for i in 1..n {
        s += &format!("E {i} {}\nE {} {i}\n", i + 1, i + 1);
    }
    s
}

fn workspace() -> TempDir {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write(p, "path9.str", &path_text(9));
    write(p, "path10.str", &path_text(10));
    write(p, "path3.str", &path_text(3));
    write(p, "e12.str", "vocab E/2\nuniverse 1 2\nE 1 2\nE 2 1\n");
    write(p, "e23.str", "vocab E/2\nuniverse 2 3\nE 2 3\nE 3 2\n");
    write(p, "e13.str", "vocab E/2\nuniverse 1 3\n");
    write(p, "total.fml", "forall x. exists y. E(x,y)\n");
    write(p, "not_total.fml", "!(forall x. exists y. E(x,y))\n");
    write(p, "edge.fml", "exists x. exists y. E(x,y)\n");
    write(p, "free.fml", "E(x,y) & X(x)\n");
    write(p, "word.nw", "letters: abaabba\nedges: (2,6) (4,5)\n");
    write(p, "cotree.tree", "fn:0110\n  leaf:1:a\n  fn:1001\n    leaf:1:a\n    leaf:2:b\n");
    write(p, "optree.tree", "join\n  ◇\n  complement\n    ◇\n");
    d
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

#[test]
fn long_paths_are_two_equivalent() {
    let d = workspace();
    let r = fmtk(d.path(), &["equiv", "path9.str", "path10.str", "--m", "2", "--logic", "fo"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "equivalent\n"));
    let r = fmtk(d.path(), &["equiv", "path3.str", "path9.str", "--m", "2"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "not equivalent\n"));
}

#[test]
fn glt_fixture_separates_a_and_b() {
    let d = workspace();
    let r = fmtk(d.path(), &["fixture", "glt-counterexample", "1", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for f in ["A.str", "B.str", "psi_k.fml"] {
        assert!(d.path().join(f).exists(), "{f} written");
    }
    assert_eq!(fmtk(d.path(), &["eval", "A.str", "psi_k.fml"]).stdout, "true\n");
    assert_eq!(fmtk(d.path(), &["eval", "B.str", "psi_k.fml"]).stdout, "false\n");
}

#[test]
fn malformed_input_is_a_parse_error_with_location() {
    let d = workspace();
    write(d.path(), "bad.str", "vocab E/2\nuniverse 1\nE 1 x\n");
    write(d.path(), "f.fml", "true\n");
    let r = fmtk(d.path(), &["eval", "bad.str", "f.fml"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("bad.str:3:5"), "{}", r.stderr);
    write(d.path(), "bad.fml", "exists x. E(x\n");
    let r = fmtk(d.path(), &["eval", "e12.str", "bad.fml"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("bad.fml:1:"), "{}", r.stderr);
    assert_eq!(fmtk(d.path(), &["eval", "missing.str", "f.fml"]).code, 2);
    assert_eq!(fmtk(d.path(), &["no-such-verb"]).code, 2);
    assert_eq!(fmtk(d.path(), &["glt-translate", "edge.fml", "--k", "1"]).code, 2, "missing --p");
}

#[test]
fn caps_exit_three() {
    let d = workspace();
    let r = fmtk(d.path(), &["equiv", "path9.str", "path10.str", "--max-universe", "5"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("cap exceeded"));
    let r = fmtk(d.path(), &["pce-check", "not_total.fml", "--family", "graphs/4", "--k", "1", "--cover-cap", "1"]);
    assert_eq!(r.code, 3, "an exhausted cover search is never a silent answer");
    assert!(r.stdout.contains("inconclusive"));
    assert_eq!(fmtk(d.path(), &["psc-check", "edge.fml", "--family", "graphs/99"]).code, 3);
}

#[test]
fn refutations_exit_one_with_counterexample() {
    let d = workspace();
    let (code, v) = json(d.path(), &["psc-check", "total.fml", "--family", "graphs/4", "--k", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["verdict"], "violated");
    assert!(v["result"]["counterexample"].as_str().unwrap().starts_with("vocab E/2"));
    let (code, v) = json(d.path(), &["pce-check", "not_total.fml", "--family", "graphs/4", "--k", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["witness"], serde_json::json!([[1], [2]]));

    let (code, v) = json(d.path(), &["psc-check", "edge.fml", "--family", "graphs/4", "--k", "2"]);
    assert_eq!((code, v["result"]["verdict"].as_str()), (0, Some("holds")));
    let (code, _) = json(d.path(), &["pce-check", "edge.fml", "--family", "graphs/4", "--k", "1"]);
    assert_eq!(code, 0);
}

#[test]
fn crux_and_cover() {
    let d = workspace();
    let r = fmtk(d.path(), &["crux", "path3.str", "edge.fml", "--family", "graphs/4", "--k", "2"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "{1,2}\n{2,3}\n"));
    let r = fmtk(d.path(), &["crux", "path3.str", "edge.fml", "--family", "graphs/4", "--k", "1"]);
    assert_eq!(r.code, 1);

    let parts = ["e12.str", "e23.str", "e13.str"];
    let mut args = vec!["cover-check", "path3.str", "--k", "2"];
    args.extend(parts);
    assert_eq!(fmtk(d.path(), &args).stdout, "cover\n");
    args[3] = "3";
    let r = fmtk(d.path(), &args);
    assert_eq!((r.code, r.stdout.as_str()), (1, "not a cover\n"));
}

#[test]
fn formula_verbs() {
    let d = workspace();
    assert_eq!(fmtk(d.path(), &["rank", "total.fml"]).stdout, "2\n");
    let r = fmtk(d.path(), &["relativize", "total.fml", "--vars", "a,b"]);
    assert_eq!(r.code, 0);
    // Quantifiers over {a, b} unfold into finite disjunctions and conjunctions.
    assert_eq!(r.stdout, "((E(a,a) | E(a,b)) & (E(b,a) | E(b,b)))\n");
    let r = fmtk(d.path(), &["ccq", "e12.str", "--tuple", "1"]);
    assert_eq!(r.stdout, "exists x2. (E(x1,x2) & E(x2,x1))\n");
    let r = fmtk(d.path(), &["eval", "path3.str", "free.fml", "--assign", "x=1", "--assign", "y=2", "--set", "X=1"]);
    assert_eq!(r.stdout, "true\n");
    let r = fmtk(d.path(), &["eval", "path3.str", "free.fml", "--assign", "x=1", "--assign", "y=3", "--set", "X=1"]);
    assert_eq!(r.stdout, "false\n");

    let (_, v) = json(d.path(), &["glt-translate", "edge.fml", "--k", "1", "--p", "2"]);
    assert_eq!(v["result"]["rank"], 3);
    let r = fmtk(d.path(), &["hpt-translate", "edge.fml", "--family", "graphs/3", "--k", "1", "--p", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("forall"), "{}", r.stdout);
}

#[test]
fn type_fingerprints_follow_equivalence() {
    let d = workspace();
    let a = fmtk(d.path(), &["type", "path9.str", "--m", "2"]).stdout;
    let b = fmtk(d.path(), &["type", "path10.str", "--m", "2"]).stdout;
    let c = fmtk(d.path(), &["type", "path3.str", "--m", "2"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
    let end = fmtk(d.path(), &["type", "path9.str", "--tuple", "1"]).stdout;
    let mid = fmtk(d.path(), &["type", "path9.str", "--tuple", "5"]).stdout;
    assert_ne!(end, mid);
}

#[test]
fn schemes_and_operation_trees() {
    let d = workspace();
    let r = fmtk(d.path(), &["scheme-apply", "complement", "structure", "path3.str"]);
    assert_eq!(r.stdout, "vocab E/2\nuniverse 1 2 3\nE 1 3\nE 3 1\n");
    let r = fmtk(d.path(), &["scheme-apply", "complement", "formula", "edge.fml"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("!E("), "{}", r.stdout);

    let r = fmtk(d.path(), &["fixture", "scheme", "xi1"]);
    write(d.path(), "xi1.sch", &r.stdout);
    let (_, v) = json(d.path(), &["fixture", "scheme", "xi1"]);
    assert_eq!(v["result"]["quantifier_free"], false);
    write(d.path(), "lo.fml", "exists x. exists y. E(x,y)\n");
    assert_eq!(fmtk(d.path(), &["scheme-apply", "xi1.sch", "formula", "lo.fml"]).code, 0);
    assert_eq!(fmtk(d.path(), &["scheme-apply", "nope", "formula", "lo.fml"]).code, 2);

    let (code, v) = json(d.path(), &["optree-eval", "optree.tree", "e12.str", "e13.str"]);
    assert_eq!(code, 0);
    // K2 joined with the complement of an empty pair: K4.
    assert_eq!(v["result"]["size"], 4);
    assert_eq!(v["result"]["structure"].as_str().unwrap().matches("\nE ").count(), 12);
    assert_eq!(fmtk(d.path(), &["optree-eval", "optree.tree", "e12.str"]).code, 2);
}

#[test]
fn nested_words_and_cotrees() {
    let d = workspace();
    let tree = fmtk(d.path(), &["nw-encode", "word.nw"]).stdout;
    assert_eq!(tree, "∘\n  a\n  (b,b)\n    ∘\n      a\n      (a,b)\n  a\n");
    write(d.path(), "word.tree", &tree);
    let back = fmtk(d.path(), &["nw-decode", "word.tree"]).stdout;
    assert_eq!(back, std::fs::read_to_string(d.path().join("word.nw")).unwrap());

    // Root table 0110 joins parts 1 and 2; the inner 1001 links equal parts only.
    let r = fmtk(d.path(), &["cotree-graph", "cotree.tree"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_, v) = json(d.path(), &["cotree-graph", "cotree.tree"]);
    assert_eq!(v["result"]["size"], 3);

    let r = fmtk(d.path(), &["prune", "word.tree", "--oracle", "nested", "--m", "2", "--logic", "mso"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(fmtk(d.path(), &["prune", "word.tree", "--oracle", "bogus"]).code, 2);
}

#[test]
fn ebsp_verbs() {
    let d = workspace();
    let r = fmtk(d.path(), &["ebsp-search", "path10.str", "--family", "paths/10", "--m", "1", "--tuple", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("universe 1 2 3\n"), "{}", r.stdout);
    let (code, v) = json(d.path(), &["ebsp-search", "path10.str", "--family", "paths/10", "--m", "2", "--bound", "3"]);
    assert_eq!(code, 1);
    assert!(v["result"]["counterexample"].is_string());
    let (code, v) = json(d.path(), &["ebsp-search", "path10.str", "--family", "paths/10", "--m", "1", "--tuple", "1", "--labelled"]);
    assert_eq!(code, 0);
    assert!(v["result"]["rank"].as_u64().unwrap() >= 1);

    let csv = fmtk(d.path(), &["witness-profile", "--family", "unary:2/6", "--k", "1", "--m", "2", "--samples", "5"]).stdout;
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("m,k,logic,family,max_bound,sample_count"));
    assert_eq!(rows.count(), 3);

    write(d.path(), "has_a.fml", "exists x. a(x)\n");
    let r = fmtk(d.path(), &["decide-theory", "has_a.fml", "--family", "words:ab/6", "--p", "3"]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stdout.starts_with("refuted by"));
    write(d.path(), "le_refl.fml", "forall x. Le(x,x)\n");
    let r = fmtk(d.path(), &["decide-theory", "le_refl.fml", "--family", "words:ab/6", "--p", "3"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "holds\n"), "{}", r.stderr);
    assert_eq!(fmtk(d.path(), &["decide-theory", "le_refl.fml", "--family", "words:ab/6", "--p", "7"]).code, 3);
}

#[test]
fn explicit_and_union_families() {
    let d = workspace();
    let members = format!("{}---\n{}---\n{}", path_text(2), path_text(3), path_text(4));
    write(d.path(), "paths.fam", &members);
    let (code, v) = json(d.path(), &["psc-check", "edge.fml", "--family", "@paths.fam", "--k", "2"]);
    assert_eq!((code, v["result"]["verdict"].as_str()), (0, Some("holds")));
    write(d.path(), "broken.fam", &format!("{}---\nvocab E/2\nuniverse 1\nE 1 q\n", path_text(2)));
    let r = fmtk(d.path(), &["psc-check", "edge.fml", "--family", "@broken.fam"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("broken.fam:8:5"), "{}", r.stderr);
    let r = fmtk(d.path(), &["psc-check", "edge.fml", "--family", "paths/4+path_unions:2/3", "--k", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(fmtk(d.path(), &["psc-check", "edge.fml", "--family", "paths"]).code, 2);
    write(d.path(), "connected_ish.fml", "exists x. exists y. E(x,y)\n");
    let r = fmtk(d.path(), &["psc-check", "edge.fml", "--family", "graphs/3", "--modulo", "connected_ish.fml", "--k", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn fixture_formulas() {
    let d = workspace();
    let phi = fmtk(d.path(), &["fixture", "phi-k", "2"]);
    assert_eq!(phi.code, 0);
    write(d.path(), "phi2.fml", &phi.stdout);
    // phi_2 holds in two disjoint edges (four degree-1 vertices), not in a 5-path.
    write(d.path(), "two_edges.str", "vocab E/2\nuniverse 1 2 3 4\nE 1 2\nE 2 1\nE 3 4\nE 4 3\n");
    assert_eq!(fmtk(d.path(), &["eval", "two_edges.str", "phi2.fml"]).stdout, "true\n");
    write(d.path(), "path5.str", &path_text(5));
    assert_eq!(fmtk(d.path(), &["eval", "path5.str", "phi2.fml"]).stdout, "false\n");
    let psi = fmtk(d.path(), &["fixture", "psi-k", "1"]);
    assert_eq!(psi.code, 0);
    fmtk(d.path(), &["fixture", "glt-counterexample", "1", "1", "--out", "fx"]);
    assert_eq!(std::fs::read_to_string(d.path().join("fx/psi_k.fml")).unwrap(), psi.stdout);
}

#[test]
fn reports_are_deterministic() {
    let d = workspace();
    let cases: [&[&str]; 4] = [
        &["witness-profile", "--family", "unary:2/6", "--k", "1", "--m", "2", "--samples", "6", "--seed", "7", "--json"],
        &["pce-check", "not_total.fml", "--family", "graphs/4", "--k", "1", "--json"],
        &["type", "path9.str", "--m", "2", "--json"],
        &["nw-encode", "word.nw"],
    ];
    for args in cases {
        let a = fmtk(d.path(), args);
        let b = fmtk(d.path(), args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.code, b.code);
    }
    let other_seed = fmtk(d.path(), &["witness-profile", "--family", "unary:2/6", "--k", "1", "--m", "2", "--samples", "6", "--seed", "8", "--json"]);
    assert_eq!(other_seed.code, 0);
}

#[test]
fn json_reports_match_schema() {
    let d = workspace();
    fmtk(d.path(), &["fixture", "glt-counterexample", "1", "1"]);
    write(d.path(), "bad.str", "vocab E/2\nuniverse 1\nE 1 x\n");
    let calls: Vec<Vec<&str>> = vec![
        vec!["eval", "A.str", "psi_k.fml"],
        vec!["eval", "bad.str", "edge.fml"],
        vec!["rank", "total.fml"],
        vec!["equiv", "path9.str", "path10.str"],
        vec!["equiv", "path9.str", "path10.str", "--max-universe", "4"],
        vec!["type", "path3.str", "--tuple", "2"],
        vec!["relativize", "total.fml", "--vars", "a"],
        vec!["ccq", "path3.str"],
        vec!["crux", "path3.str", "edge.fml", "--family", "graphs/4", "--k", "1"],
        vec!["psc-check", "total.fml", "--family", "graphs/4"],
        vec!["pce-check", "not_total.fml", "--family", "graphs/4", "--cover-cap", "1"],
        vec!["cover-check", "path3.str", "e12.str", "e23.str", "--k", "1"],
        vec!["glt-translate", "edge.fml", "--p", "2"],
        vec!["hpt-translate", "edge.fml", "--family", "graphs/3", "--p", "2"],
        vec!["scheme-apply", "line_graph", "structure", "path3.str"],
        vec!["optree-eval", "optree.tree", "e12.str", "e13.str"],
        vec!["ebsp-search", "path10.str", "--family", "paths/10", "--m", "2", "--bound", "3"],
        vec!["witness-profile", "--family", "paths/6", "--k", "0", "--m", "1", "--samples", "3"],
        vec!["decide-theory", "edge.fml", "--family", "graphs/4", "--p", "3"],
        vec!["nw-encode", "word.nw"],
        vec!["cotree-graph", "cotree.tree"],
        vec!["fixture", "phi-k", "1"],
        vec!["fixture", "scheme", "xi1"],
    ];
    let validator = schema();
    for args in calls {
        let (_, v) = json(d.path(), &args);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}\n{v:#}");
    }
    let broken = serde_json::json!({ "verb": "eval", "status": "refuted", "exit_code": 1, "result": {} });
    assert!(!validator.is_valid(&broken), "refutations must carry a counterexample");
}
