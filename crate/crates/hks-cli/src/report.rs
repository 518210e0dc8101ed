//! JSON report assembly. Reports use sorted keys (serde_json's map is
//! BTree-backed) and encode non-finite numbers as the strings "inf",
//! "-inf", "nan" since JSON has no literals for them.

use hks_core::oracles::OracleReport;
use serde_json::{Map, Value};

pub fn num(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    } else if v.is_nan() {
        Value::String("nan".into())
    } else if v > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn oracle_value(rep: &OracleReport) -> Value {
    let mut m = Map::new();
    m.insert("C".into(), num(rep.constant_c));
    m.insert("condition".into(), Value::String(rep.condition.clone()));
    m.insert("lhs".into(), num(rep.lhs));
    m.insert("ratio".into(), num(rep.ratio));
    m.insert("rhs".into(), num(rep.rhs));
    m.insert("satisfied".into(), Value::Bool(rep.satisfied));
    Value::Object(m)
}

pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}
