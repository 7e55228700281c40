use std::collections::BTreeMap;

use diffinv::algebra::{fmt_q, Q};
use diffinv::eval::{Report, Verdict};
use diffinv::groups::GroupSpec;
use serde::Serialize;

#[derive(Serialize)]
struct WitnessJson {
    trial: usize,
    assignment: BTreeMap<String, String>,
    lhs: String,
    rhs: String,
    labels: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    command: &'static str,
    identity: &'a str,
    n: usize,
    mode: &'static str,
    trials: usize,
    seed: Option<u64>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessJson>,
}

pub fn verify_json(r: &Report, n: usize) -> String {
    let witness = r.witness.as_ref().map(|w| WitnessJson {
        trial: w.trial,
        assignment: w.assignment.iter().map(|(k, v)| (k.to_string(), fmt_q(v))).collect(),
        lhs: fmt_q(&w.lhs),
        rhs: fmt_q(&w.rhs),
        labels: w.labels.iter().cloned().collect(),
    });
    let out = VerifyJson {
        command: "verify",
        identity: &r.identity,
        n,
        mode: r.mode.as_str(),
        trials: r.trials,
        seed: r.seed,
        status: r.status.as_str(),
        witness,
    };
    serde_json::to_string(&out).expect("serializable")
}

#[derive(Serialize)]
struct SignatureJson<'a> {
    command: &'static str,
    group: &'a str,
    n: usize,
    t0: String,
    generators: &'a [String],
    values: Vec<String>,
}

pub fn signature_json(g: &GroupSpec, t0: &Q, names: &[String], values: &[Q]) -> String {
    let out = SignatureJson {
        command: "signature",
        group: g.name(),
        n: g.n(),
        t0: fmt_q(t0),
        generators: names,
        values: values.iter().map(fmt_q).collect(),
    };
    serde_json::to_string(&out).expect("serializable")
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    command: &'static str,
    group: &'a str,
    n: usize,
    status: &'static str,
    first: Vec<String>,
    second: Vec<String>,
    differing: &'a [usize],
}

pub fn verdict_json(g: &GroupSpec, v: &Verdict) -> String {
    let out = VerdictJson {
        command: "equiv",
        group: g.name(),
        n: g.n(),
        status: if v.equal() { "signatures-equal" } else { "signatures-differ" },
        first: v.first.iter().map(fmt_q).collect(),
        second: v.second.iter().map(fmt_q).collect(),
        differing: &v.differing,
    };
    serde_json::to_string(&out).expect("serializable")
}
