#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn ladcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ladcd"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("report.schema.json");
    read_json(&path)
}

pub fn p(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

pub fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// The 3-point fixture `x = 0, 1, 2`, `y = 0, 1, 5`.
pub fn fixture(dir: &Path) -> PathBuf {
    let path = dir.join("fixture.csv");
    std::fs::write(&path, "x,y\n0,0\n1,1\n2,5\n").unwrap();
    path
}

/// Checks `doc` against `schema`, covering the keywords the shipped schema
/// uses: type, enum, minimum, required, properties, additionalProperties,
/// items and local `$ref`s.
pub fn schema_errors(doc: &Value, schema: &Value, root: &Value, at: &str) -> Vec<String> {
    let mut errs = Vec::new();
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let target = r
            .strip_prefix("#/")
            .map(|p| p.split('/').fold(root, |v, k| &v[k]))
            .unwrap_or(&Value::Null);
        return schema_errors(doc, target, root, at);
    }
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => doc.is_object(),
            "array" => doc.is_array(),
            "string" => doc.is_string(),
            "boolean" => doc.is_boolean(),
            "number" => doc.is_number(),
            "integer" => doc.is_i64() || doc.is_u64(),
            _ => false,
        };
        if !ok {
            errs.push(format!("{at}: expected {t}, got {doc}"));
            return errs;
        }
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(doc) {
            errs.push(format!("{at}: {doc} not in {allowed:?}"));
        }
    }
    if let (Some(min), Some(v)) = (schema.get("minimum").and_then(Value::as_f64), doc.as_f64()) {
        if v < min {
            errs.push(format!("{at}: {v} < {min}"));
        }
    }
    if let Some(obj) = doc.as_object() {
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap();
            if !obj.contains_key(key) {
                errs.push(format!("{at}: missing '{key}'"));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, v) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => errs.extend(schema_errors(v, sub, root, &format!("{at}.{k}"))),
                None => {
                    if let Some(extra) = schema.get("additionalProperties").filter(|e| e.is_object()) {
                        errs.extend(schema_errors(v, extra, root, &format!("{at}.{k}")));
                    }
                }
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), doc.as_array()) {
        for (i, v) in arr.iter().enumerate() {
            errs.extend(schema_errors(v, items, root, &format!("{at}[{i}]")));
        }
    }
    errs
}
