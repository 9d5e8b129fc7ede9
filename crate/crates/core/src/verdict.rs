//! Three-valued checker outcomes.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::rational::{fmt_q, fmt_vec, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn is_decisive(self) -> bool {
        self != Status::Inconclusive
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Data that lets a verdict be re-checked by direct evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Witness {
    pub x: Option<Vec<Q>>,
    pub z: Option<Vec<Q>>,
    pub radius: Option<Q>,
    pub direction: Option<Vec<Q>>,
    pub detail: String,
}

impl Witness {
    pub fn note(detail: impl Into<String>) -> Self {
        Witness { detail: detail.into(), ..Default::default() }
    }

    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        if let Some(x) = &self.x {
            m.insert("x".into(), json!(fmt_vec(x)));
        }
        if let Some(z) = &self.z {
            m.insert("z".into(), json!(fmt_vec(z)));
        }
        if let Some(r) = &self.radius {
            m.insert("radius".into(), json!(fmt_q(r)));
        }
        if let Some(d) = &self.direction {
            m.insert("direction".into(), json!(fmt_vec(d)));
        }
        if !self.detail.is_empty() {
            m.insert("detail".into(), json!(self.detail));
        }
        Value::Object(m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    /// finest neighbourhood level examined
    pub resolution: usize,
}

impl Verdict {
    pub fn holds(resolution: usize, witness: Option<Witness>) -> Self {
        Verdict { status: Status::Holds, witness, resolution }
    }

    pub fn fails(resolution: usize, witness: Witness) -> Self {
        Verdict { status: Status::Fails, witness: Some(witness), resolution }
    }

    pub fn inconclusive(resolution: usize, reason: impl Into<String>) -> Self {
        Verdict { status: Status::Inconclusive, witness: Some(Witness::note(reason)), resolution }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "status": self.status.label(), "resolution": self.resolution });
        if let Some(w) = &self.witness {
            v["witness"] = w.to_json();
        }
        v
    }
}
