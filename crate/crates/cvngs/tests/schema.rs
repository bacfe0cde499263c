use std::fs;
use std::path::Path;

use cvngs::manifest::{Command, Manifest};
use serde_json::Value;

fn schema() -> Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/manifest.schema.json");
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn resolve<'a>(root: &'a Value, node: &'a Value) -> &'a Value {
    match node.get("$ref").and_then(Value::as_str) {
        Some(r) => root.pointer(r.trim_start_matches('#')).unwrap(),
        None => node,
    }
}

// Every key in `value` must be declared somewhere under `node`.
fn covered(root: &Value, node: &Value, value: &Value, path: &str) {
    let node = resolve(root, node);
    if let Some(alts) = node.get("oneOf").and_then(Value::as_array) {
        let fits = |alt: &Value| match (value, alt.get("properties")) {
            (Value::Object(o), Some(Value::Object(props))) => {
                o.keys().all(|k| props.contains_key(k))
                    && o.get("kind")
                        .is_none_or(|k| props["kind"].get("const").is_none_or(|c| c == k))
            }
            (Value::Array(_), _) => alt["type"] == "array",
            _ => false,
        };
        assert!(alts.iter().any(fits), "{path}: no alternative fits {value}");
        return;
    }
    match value {
        Value::Object(o) => {
            for (k, v) in o {
                let sub = node["properties"]
                    .get(k)
                    .unwrap_or_else(|| panic!("{path}.{k} not in schema"));
                covered(root, sub, v, &format!("{path}.{k}"));
            }
        }
        Value::Array(items) => {
            if let Some(item) = node.get("items") {
                for v in items {
                    covered(root, item, v, &format!("{path}[]"));
                }
            }
        }
        _ => {}
    }
}

#[test]
fn schema_declares_every_manifest_field() {
    let root = schema();
    let mut manifests: Vec<Value> = Vec::new();
    for c in [
        Command::EntanglementSweep,
        Command::GainSolve,
        Command::Figures,
    ] {
        manifests.push(serde_json::from_str(&Manifest::new(c).to_json()).unwrap());
    }
    for id in cvngs::figures::CATALOG {
        let m = cvngs::figures::figure_manifest(id).unwrap();
        manifests.push(serde_json::from_str(&m.to_json()).unwrap());
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for e in fs::read_dir(golden).unwrap() {
        let p = e.unwrap().path().join("manifest.json");
        manifests.push(serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap());
    }
    for m in &manifests {
        covered(&root, &root, m, "$");
    }
}

#[test]
fn schema_commands_match_cli() {
    let root = schema();
    let listed: Vec<&str> = root["properties"]["command"]["enum"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(Value::as_str)
        .collect();
    for c in [
        Command::EntanglementSweep,
        Command::Eps,
        Command::GainSolve,
        Command::FourCat,
        Command::Imperfections,
        Command::Oracle,
        Command::Figures,
    ] {
        assert!(listed.contains(&c.name()), "{}", c.name());
    }
    assert_eq!(listed.len(), 7);
}
