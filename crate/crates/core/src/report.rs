use serde::Serialize;
use serde_json::{json, Value};

use crate::qha::CaseResult;

pub const SCHEMA: &str = "klr-report/1";

#[derive(Clone, Debug, Serialize)]
pub struct Case {
    pub case: String,
    pub expected: Value,
    pub computed: Value,
    pub pass: bool,
    pub reduction: String,
}

impl Case {
    /// pass iff expected == computed
    pub fn eq(case: impl Into<String>, expected: Value, computed: Value, reduction: &str) -> Case {
        let pass = expected == computed;
        Case { case: case.into(), expected, computed, pass, reduction: reduction.to_string() }
    }

    pub fn with(case: impl Into<String>, expected: Value, computed: Value, pass: bool, reduction: &str) -> Case {
        Case { case: case.into(), expected, computed, pass, reduction: reduction.to_string() }
    }

    pub fn from_result(r: &CaseResult, reduction: &str) -> Case {
        Case {
            case: r.name.clone(),
            expected: json!("0"),
            computed: if r.pass { json!("0") } else { json!(r.detail) },
            pass: r.pass,
            reduction: reduction.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub suite: String,
    pub config: Value,
    pub cases: Vec<Case>,
    pub extra: Option<Value>,
}

impl Report {
    pub fn new(suite: &str, config: Value) -> Report {
        Report { suite: suite.to_string(), config, cases: vec![], extra: None }
    }

    pub fn push(&mut self, c: Case) {
        self.cases.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Case>) {
        self.cases.extend(cs);
    }

    pub fn pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Case> {
        self.cases.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "schema": SCHEMA,
            "suite": self.suite,
            "config": self.config,
            "pass": self.pass(),
            "cases": self.cases,
        });
        if let Some(e) = &self.extra {
            v["data"] = e.clone();
        }
        v
    }
}
