//! JSON records for every kind of result the CLI prints.
//!
//! Records are plain `serde_json::Value` objects with a fixed key order so
//! that the same run always prints the same bytes.

use serde_json::{json, Map, Value};

use revshare_core::bargaining::ClosedSplit;
use revshare_core::closed_form::FixedEffortCoop;
use revshare_core::oracle::CooperativeSolution;
use revshare_core::{
    BargainingResult, Branch, ComparisonReport, DisagreementPolicy, EquilibriumOutcome, ShapleyReport,
};

use crate::args::{ScenarioName, Settings};

pub fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Isp1 => "isp1",
        Branch::Isp2 => "isp2",
    }
}

fn disagreement_value(d: DisagreementPolicy) -> Value {
    match d {
        DisagreementPolicy::Zero => json!("zero"),
        DisagreementPolicy::RegulatedCompetitive => json!("competitive"),
        DisagreementPolicy::Custom { d1, d2 } => json!([d1, d2]),
    }
}

/// The inputs that matter for `name`, in a fixed order.
pub fn params_value(name: Option<ScenarioName>, s: &Settings) -> Value {
    use ScenarioName::*;
    let mut m = Map::new();
    m.insert("r".into(), json!(s.r));
    m.insert("c".into(), json!(s.costs));
    let uses_n = matches!(name, Some(SymmetricCompetitive | SymmetricCooperative | NScaling));
    if uses_n {
        if let Some(n) = s.n {
            m.insert("n".into(), json!(n));
        }
    }
    if matches!(name, Some(PublicPrivateRegulated | FixedPublicEffortCoop)) {
        if let Some(a) = s.a1_bar {
            m.insert("a1_bar".into(), json!(a));
        }
    }
    if matches!(name, Some(MultiCpCompetitive | MultiCpCooperative)) {
        if let Some(r2) = s.r2 {
            m.insert("r2".into(), json!(r2));
        }
    }
    if matches!(name, Some(RegulatedCooperative | MultiCpCooperative) | None) {
        if let Some(b) = s.branch {
            m.insert("branch".into(), json!(branch_name(b)));
        }
    }
    if matches!(name, Some(AsymmetricCooperative | CompareCoopComp) | None) {
        m.insert("disagreement".into(), disagreement_value(s.disagreement));
    }
    Value::Object(m)
}

/// `{scenario, params, contract, efforts, demand, utilities, residuals, degenerate}`.
pub fn outcome_record(scenario: &str, params: Value, o: &EquilibriumOutcome) -> Value {
    json!({
        "scenario": scenario,
        "params": params,
        "contract": {
            "shares": o.contract.shares,
            "joint_share": o.contract.joint_share,
            "total_share": o.total_share(),
        },
        "efforts": {
            "per_isp": o.efforts.efforts,
            "total": o.total_effort,
        },
        "demand": o.demand,
        "utilities": {
            "cp": o.cp_utility,
            "isp": o.isp_utilities,
        },
        "residuals": {
            "foc": o.foc_residual,
        },
        "degenerate": o.degenerate,
    })
}

fn insert_after(record: &mut Value, key: &str, value: Value) {
    if let Value::Object(m) = record {
        m.insert(key.into(), value);
    }
}

/// Outcome record for one CP of a multi-CP scenario.
pub fn multi_cp_record(scenario: &str, params: Value, cp: usize, o: &EquilibriumOutcome) -> Value {
    let mut rec = outcome_record(scenario, params, o);
    if let Value::Object(m) = &mut rec {
        // Keep "cp" right after "params".
        let tail: Vec<(String, Value)> = m.iter().skip(2).map(|(k, v)| (k.clone(), v.clone())).collect();
        for (k, _) in &tail {
            m.shift_remove(k);
        }
        m.insert("cp".into(), json!(cp));
        m.extend(tail);
    }
    rec
}

pub fn fixed_effort_record(scenario: &str, params: Value, f: &FixedEffortCoop) -> Value {
    let mut rec = outcome_record(scenario, params, &f.outcome);
    insert_after(
        &mut rec,
        "public_private",
        json!({
            "total_effort": f.public_private_total,
            "same_total": f.same_total,
        }),
    );
    rec
}

fn bargain_value(b: &BargainingResult) -> Value {
    json!({
        "efforts": b.efforts.efforts,
        "split": [b.share_split.beta1, b.share_split.beta2],
        "surpluses": [b.surpluses.0, b.surpluses.1],
        "disagreement": [b.disagreement.0, b.disagreement.1],
        "converged": b.converged,
        "multistart_agreement": b.multistart_agreement,
        "stationarity": b.stationarity,
    })
}

pub fn cooperative_record(scenario: &str, params: Value, sol: &CooperativeSolution) -> Value {
    let mut rec = outcome_record(scenario, params, &sol.outcome);
    insert_after(&mut rec, "bargain", bargain_value(&sol.bargain));
    insert_after(&mut rec, "outer_unimodal", json!(sol.outer_unimodal));
    rec
}

pub fn comparison_record(scenario: &str, params: Value, rep: &ComparisonReport) -> Value {
    let mut metrics = Map::new();
    for m in &rep.metrics {
        metrics.insert(
            m.label.clone(),
            json!({
                "total_effort": m.total_effort,
                "cp_utility": m.cp_utility,
                "isp_utilities": m.isp_utilities,
                "total_share": m.total_share,
                "share_per_isp": m.share_per_isp,
                "effort_per_isp": m.effort_per_isp,
                "degenerate": m.degenerate,
            }),
        );
    }
    let orderings: Vec<Value> = rep
        .orderings
        .iter()
        .map(|o| {
            json!({
                "check": o.describe(&rep.metrics),
                "holds": o.holds,
                "gap": o.gap,
            })
        })
        .collect();
    json!({
        "scenario": scenario,
        "params": params,
        "title": rep.title,
        "metrics": metrics,
        "orderings": orderings,
        "all_hold": rep.all_hold(),
        "degenerate": rep.all_degenerate,
    })
}

/// Comparison at parameters where every scenario is degenerate.
pub fn degenerate_comparison_record(scenario: &str, params: Value, condition: &str) -> Value {
    json!({
        "scenario": scenario,
        "params": params,
        "title": "degenerate",
        "condition": condition,
        "degenerate": true,
    })
}

pub fn shapley_record(params: Value, rep: &ShapleyReport) -> Value {
    let (v1, v2, v12) = rep.coalition_values;
    json!({
        "scenario": "shapley",
        "params": params,
        "coalition_values": {"v1": v1, "v2": v2, "v12": v12},
        "brute": [rep.brute.0, rep.brute.1],
        "closed": [rep.closed.0, rep.closed.1],
        "discrepancy": rep.discrepancy,
        "matches_brute": rep.matches_brute,
    })
}

pub fn nbs_record(
    params: Value,
    branch: Branch,
    coop: &EquilibriumOutcome,
    closed: &ClosedSplit,
    numeric: &BargainingResult,
) -> Value {
    json!({
        "scenario": "nbs",
        "params": params,
        "branch": branch_name(branch),
        "joint_share": coop.contract.joint_share,
        "efforts": coop.efforts.efforts,
        "closed": {
            "split": [closed.split.beta1, closed.split.beta2],
            "surpluses": [closed.surpluses.0, closed.surpluses.1],
            "clamped": closed.clamped,
            "both_bind": closed.both_bind,
        },
        "numeric": bargain_value(numeric),
    })
}

/// Prefixes a record with the sweep coordinate.
pub fn with_sweep(param: &str, value: f64, record: Value) -> Value {
    let mut m = Map::new();
    m.insert("sweep".into(), json!({"param": param, "value": value}));
    if let Value::Object(inner) = record {
        m.extend(inner);
    }
    Value::Object(m)
}
