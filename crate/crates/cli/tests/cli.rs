use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;

use toposforge::holonomy::DEFAULT_CLOSURE_CAP;
use toposforge_cli::report::REPORT_SCHEMA;
use toposforge_cli::run;
use toposforge_cli::workspace::{parse_raw, parse_workspace, serialize};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

const FIXTURES: [&str; 4] = ["c4.json", "wrap.json", "p3.json", "bigon.json"];

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["toposforge"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn on(name: &str, args: &[&str]) -> (i32, String, String) {
    let path = fixture(name);
    let mut full = vec!["-w", path.to_str().unwrap()];
    full.extend_from_slice(args);
    invoke(&full)
}

fn json_on(name: &str, args: &[&str]) -> (i32, Value) {
    let path = fixture(name);
    let mut full = vec!["--json", "-w", path.to_str().unwrap()];
    full.extend_from_slice(args);
    let (code, out, _) = invoke(&full);
    (code, serde_json::from_str(&out).expect("report is JSON"))
}

#[test]
fn fixtures_are_canonical() {
    for name in FIXTURES {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let ws = parse_workspace(&text, DEFAULT_CLOSURE_CAP).unwrap();
        let once = serialize(&ws);
        assert_eq!(once, text, "{name}");
        let again = serialize(&parse_workspace(&once, DEFAULT_CLOSURE_CAP).unwrap());
        assert_eq!(again, once, "{name}");
    }
}

#[test]
fn c4_workspace_counts() {
    let text = std::fs::read_to_string(fixture("c4.json")).unwrap();
    let ws = parse_workspace(&text, DEFAULT_CLOSURE_CAP).unwrap();
    let c4 = &ws.categories["C4"];
    assert_eq!((c4.num_objects(), c4.num_arrows()), (8, 16));
    let identities = c4.arrow_ids().filter(|&a| c4.is_identity(a)).count();
    assert_eq!(identities, 8);
    let (code, out, _) = on("c4.json", &["check"]);
    assert_eq!(code, 0);
    assert!(out.contains("category C4: 8 objects, 16 arrows"));
}

#[test]
fn diagnostics_carry_location() {
    let text = std::fs::read_to_string(fixture("invalid/unknown_arrow.json")).unwrap();
    let d = parse_workspace(&text, DEFAULT_CLOSURE_CAP).unwrap_err();
    assert_eq!(d.code, "UNRESOLVED_REFERENCE");
    assert_eq!(d.pointer, "/sheaves/swap/restrictions/v9>e1");
    assert_eq!(d.entity.as_deref(), Some("sheaf `swap`"));

    let text = std::fs::read_to_string(fixture("invalid/truncated.json")).unwrap();
    let d = parse_workspace(&text, DEFAULT_CLOSURE_CAP).unwrap_err();
    assert_eq!(d.code, "SYNTAX");
    assert!(d.line.is_some() && d.column.is_some());

    let text = std::fs::read_to_string(fixture("invalid/unstable.json")).unwrap();
    let d = parse_workspace(&text, DEFAULT_CLOSURE_CAP).unwrap_err();
    assert_eq!(d.code, "NOT_STABLE");
    assert!(d.message.contains("v4>e1"), "{}", d.message);

    let d = parse_raw(r#"{"categories": {}, "bogus": 1}"#).unwrap_err();
    assert_eq!(d.code, "SCHEMA");
}

#[test]
fn pointer_escapes_slashes() {
    let text = r#"{"categories": {"a/b": {"objects": ["x"], "arrows": [{"name": "f", "src": "x", "dst": "y"}]}}}"#;
    let d = parse_workspace(text, DEFAULT_CLOSURE_CAP).unwrap_err();
    assert_eq!(d.pointer, "/categories/a~1b");
}

#[test]
fn documented_examples() {
    let (code, out, _) = on("c4.json", &["holonomy", "--sheaf", "swap", "--family", "edges", "--base", "e1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("holonomy group order 2"));

    let (code, out, _) = on("wrap.json", &["cg-check", "--atlas", "wrap64"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("cocycle verified; holonomy image order 2"));

    let (code, report) = json_on("c4.json", &["sheaf-check", "--sheaf", "swap", "--topology", "fine"]);
    assert_eq!(code, 1);
    let w = &report["witnesses"][0];
    assert_eq!(w["object"], "e1");
    assert_eq!(w["cover"], serde_json::json!(["v1>e1", "v4>e1"]));
    assert_eq!((w["sections"].as_u64(), w["matching_families"].as_u64()), (Some(2), Some(4)));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(on("c4.json", &["holonomy", "--sheaf", "nope", "--family", "edges", "--base", "e1"]).0, 2);
    assert_eq!(on("c4.json", &["holonomy", "--sheaf", "swap", "--family", "edges", "--base", "v9"]).0, 2);
    assert_eq!(on("c4.json", &["holonomy", "--sheaf", "swap"]).0, 2);
    assert_eq!(on("c4.json", &["frobnicate"]).0, 2);
    assert_eq!(on("c4.json", &["simply-connected", "--family", "edges", "--k", "two"]).0, 2);
    assert_eq!(invoke(&["check"]).0, 2);
    assert_eq!(invoke(&["-w", "/nonexistent/ws.json", "check"]).0, 2);
    assert_eq!(on("invalid/truncated.json", &["check"]).0, 2);
    // A germ label that is not an element of the structure sheaf.
    assert_eq!(on("wrap.json", &["develop", "--atlas", "wrap64", "--basepoint", "f1:sigma"]).0, 2);
}

fn schema() -> jsonschema::Validator {
    let s: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    jsonschema::validator_for(&s).expect("schema compiles")
}

#[test]
fn every_report_matches_the_schema() {
    let v = schema();
    let cases: Vec<(&str, Vec<&str>, i32)> = vec![
        ("c4.json", vec!["check"], 0),
        ("c4.json", vec!["fmt", "--check"], 0),
        ("c4.json", vec!["components", "--family", "all"], 0),
        ("c4.json", vec!["sheaf-check", "--sheaf", "rot3", "--topology", "min"], 0),
        ("c4.json", vec!["sheaf-check", "--sheaf", "swap", "--topology", "fine"], 1),
        ("c4.json", vec!["sheaf-check", "--sheaf", "const", "--topology", "degenerate"], 1),
        ("c4.json", vec!["holonomy", "--sheaf", "rot3", "--family", "edges", "--base", "e2", "--compare", "all"], 0),
        ("c4.json", vec!["pi1", "--family", "edges", "--sheaf", "swap", "--sheaf", "rot3"], 0),
        ("c4.json", vec!["simply-connected", "--family", "edges", "--k", "2"], 1),
        ("p3.json", vec!["simply-connected", "--family", "arcs", "--k", "3"], 0),
        // The arcs overlap in two points, which the nerve cannot trivialize.
        ("bigon.json", vec!["holonomy", "--sheaf", "swap", "--family", "arcs", "--base", "U"], 1),
        ("wrap.json", vec!["cg-check", "--atlas", "wrap44"], 0),
        ("wrap.json", vec!["cg-check", "--atlas", "wrap64", "--morphism", "turn6", "--target", "wrap64"], 0),
        ("wrap.json", vec!["cg-check", "--atlas", "wrap64", "--morphism", "flip6", "--target", "wrap64"], 1),
        ("wrap.json", vec!["develop", "--atlas", "wrap64"], 0),
        ("wrap.json", vec!["develop", "--atlas", "wrap64", "--basepoint", "f3:rho"], 0),
        ("wrap.json", vec!["bundle", "--atlas", "wrap64"], 0),
        ("wrap.json", vec!["bundle", "--atlas", "wrap44", "--section", "collapse"], 1),
        ("wrap.json", vec!["deform", "--atlas", "wrap64"], 0),
        ("c4.json", vec!["holonomy", "--sheaf", "nope", "--family", "edges", "--base", "e1"], 2),
        ("invalid/unstable.json", vec!["check"], 2),
        ("invalid/truncated.json", vec!["check"], 2),
    ];
    for (file, args, expected) in cases {
        let (code, report) = json_on(file, &args);
        assert_eq!(code, expected, "{file} {args:?}: {report}");
        let errors: Vec<String> = v.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{file} {args:?}: {errors:?}");
        assert_eq!(report["exit_code"], code);
        if code == 1 {
            assert!(!report["witnesses"].as_array().unwrap().is_empty());
        }
        if code != 2 {
            let hash = report["inputs"]["workspace_sha256"].as_str().unwrap();
            let bytes = std::fs::read(fixture(file)).unwrap();
            assert_eq!(hash, toposforge_cli::report::sha256_hex(&bytes));
        }
    }
}

#[test]
fn schema_rejects_a_silent_failure() {
    let v = schema();
    let (_, mut report) = json_on("c4.json", &["sheaf-check", "--sheaf", "swap", "--topology", "fine"]);
    report["witnesses"] = serde_json::json!([]);
    assert!(!v.is_valid(&report));
}

#[test]
fn bigon_overlap_is_reported() {
    let (code, r) = json_on("bigon.json", &["holonomy", "--sheaf", "swap", "--family", "arcs", "--base", "U"]);
    assert_eq!(code, 1);
    assert_eq!(r["witnesses"][0]["code"], "OVERLAP_NOT_TRIVIAL");
}

#[test]
fn develop_and_deform_results() {
    let (_, r) = json_on("wrap.json", &["develop", "--atlas", "wrap44"]);
    assert_eq!(r["result"]["components"].as_array().unwrap().len(), 4);
    let (_, r) = json_on("wrap.json", &["develop", "--atlas", "wrap64"]);
    let c = &r["result"]["components"][0];
    assert_eq!((c["degree"].as_u64(), c["member_germs"].as_u64(), c["wrapping"].as_u64()), (Some(2), Some(12), Some(3)));
    assert_eq!(c["dev_local_iso"], true);
    let (_, r) = json_on("wrap.json", &["deform", "--atlas", "wrap64"]);
    assert_eq!(r["result"]["representations"].as_array().unwrap().len(), 2);
    let (_, r) = json_on("wrap.json", &["deform", "--atlas", "wrap44"]);
    assert_eq!(r["result"]["representations"].as_array().unwrap().len(), 1);
}

#[test]
fn fmt_check_and_write() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ws.json");
    let text = std::fs::read_to_string(fixture("p3.json")).unwrap();
    let compact: Value = serde_json::from_str(&text).unwrap();
    std::fs::write(&path, serde_json::to_string(&compact).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(invoke(&["-w", p, "fmt", "--check"]).0, 1);
    let (code, out, _) = invoke(&["-w", p, "fmt"]);
    assert_eq!((code, out.as_str()), (0, text.as_str()));
    assert_eq!(invoke(&["-w", p, "fmt", "--write"]).0, 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    assert_eq!(invoke(&["-w", p, "fmt", "--check"]).0, 0);
}

#[test]
fn binary_exit_codes_and_closure_cap() {
    let bin = env!("CARGO_BIN_EXE_toposforge");
    let c4 = fixture("c4.json");
    let status = |cap: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(bin);
        cmd.arg("-w").arg(&c4).args(args);
        match cap {
            Some(c) => cmd.env("TOPOSFORGE_CLOSURE_CAP", c),
            None => cmd.env_remove("TOPOSFORGE_CLOSURE_CAP"),
        };
        cmd.output().unwrap()
    };
    let hol = ["holonomy", "--sheaf", "rot3", "--family", "edges", "--base", "e1"];
    assert_eq!(status(None, &hol).status.code(), Some(0));
    assert_eq!(status(None, &["sheaf-check", "--sheaf", "swap", "--topology", "fine"]).status.code(), Some(1));
    assert_eq!(status(None, &["components"]).status.code(), Some(2));
    assert_eq!(status(Some("3"), &hol).status.code(), Some(2));
    let out = status(Some("2"), &["holonomy", "--sheaf", "swap", "--family", "edges", "--base", "e1"]);
    // The rotation group of order 4 is closed on load and also trips the cap.
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CLOSURE_CAP_EXCEEDED"));
    assert_eq!(status(Some("zero"), &["check"]).status.code(), Some(2));
    assert_eq!(status(Some("64"), &hol).status.code(), Some(0));
}

fn c4_text(twists: &[(usize, Vec<usize>)], extra_covers: &[usize]) -> String {
    let mut restrictions = serde_json::Map::new();
    let arrows = ["v1>e1", "v1>e2", "v2>e2", "v2>e3", "v3>e3", "v3>e4", "v4>e4", "v4>e1"];
    for (a, p) in twists {
        let m: serde_json::Map<String, Value> = p.iter().enumerate().map(|(x, &y)| (x.to_string(), Value::String(y.to_string()))).collect();
        restrictions.insert(arrows[*a].to_string(), Value::Object(m));
    }
    let labels: Vec<String> = (0..3).map(|x| x.to_string()).collect();
    let objects = ["e1", "e2", "e3", "e4", "v1", "v2", "v3", "v4"];
    let values: serde_json::Map<String, Value> = objects.iter().map(|o| (o.to_string(), serde_json::json!(labels))).collect();
    let mut covers = serde_json::Map::new();
    for &i in extra_covers {
        let prev = (i + 3) % 4;
        covers.insert(
            format!("e{}", i + 1),
            serde_json::json!([[format!("v{}>e{}", i + 1, i + 1), format!("v{}>e{}", prev + 1, i + 1)]]),
        );
    }
    serde_json::json!({
        "categories": { "C4": {
            "objects": objects,
            "arrows": arrows.iter().map(|a| {
                let (s, d) = a.split_once('>').unwrap();
                serde_json::json!({ "name": a, "src": s, "dst": d })
            }).collect::<Vec<_>>(),
        }},
        "topologies": { "t": { "on": "C4", "covers": covers } },
        "sheaves": { "f": { "on": "C4", "values": values, "restrictions": restrictions } },
    })
    .to_string()
}

fn perm3() -> impl Strategy<Value = Vec<usize>> {
    Just(vec![0usize, 1, 2]).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn serialize_is_a_fixed_point(
        twists in proptest::collection::vec((0usize..8, perm3()), 0..5),
        covers in proptest::collection::btree_set(0usize..4, 0..5),
    ) {
        let covers: Vec<usize> = covers.into_iter().collect();
        let text = c4_text(&twists, &covers);
        let ws = parse_workspace(&text, DEFAULT_CLOSURE_CAP).unwrap();
        let canonical = serialize(&ws);
        let reparsed = parse_workspace(&canonical, DEFAULT_CLOSURE_CAP).unwrap();
        prop_assert_eq!(serialize(&reparsed), canonical.clone());
        // Same restrictions after the round trip.
        let cat = &ws.categories["C4"];
        for a in cat.arrow_ids() {
            prop_assert_eq!(ws.sheaves["f"].presheaf.restriction(a), reparsed.sheaves["f"].presheaf.restriction(a));
        }
        prop_assert_eq!(ws.topologies["t"].site.raw_covers(), reparsed.topologies["t"].site.raw_covers());
    }
}
