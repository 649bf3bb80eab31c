use std::path::Path;

use ocokit_cli::{parse_json, GenerateKind};

fn root() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("docs/instance.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

#[test]
fn bundled_instances_match_the_schema() {
    let v = validator();
    let mut n = 0;
    for e in std::fs::read_dir(root().join("instances")).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "json") {
            let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
            let errs: Vec<String> = v.iter_errors(&doc).take(3).map(|e| e.to_string()).collect();
            assert!(errs.is_empty(), "{}: {errs:?}", p.display());
            n += 1;
        }
    }
    assert!(n >= 9);
}

#[test]
fn every_generated_kind_matches_the_schema() {
    let v = validator();
    let dir = std::env::temp_dir().join(format!("ocokit-schema-{}", std::process::id()));
    for kind in GenerateKind::ALL {
        let out = dir.join(format!("{kind:?}.json"));
        let args = ocokit_cli::GenerateArgs { kind, seed: 11, count: 5, out: out.clone() };
        ocokit_cli::generate(&args).unwrap();
        let doc: serde_json::Value = parse_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!(v.is_valid(&doc), "{kind:?}");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn schema_rejects_unknown_fields() {
    let v = validator();
    let doc = serde_json::json!({
        "kind": "functions",
        "setup": {"kind": "simplex", "dim": 2},
        "functions": [{"hess_diag": [0, 0], "lin": [1, 0], "extra": 1}],
        "constants": {"G": 1.0}
    });
    assert!(!v.is_valid(&doc));
}
