//! Executes a [`RunSpec`].

use serde_json::{json, Value};

use revshare_core::bargaining::{disagreement_point, nbs_split_closed, shapley_closed};
use revshare_core::closed_form::{
    self, solve_asymmetric_competitive, solve_fixed_public_effort_coop, solve_multi_cp, solve_regulated_cooperative,
    solve_regulated_cooperative_preferred,
};
use revshare_core::compare::{compare_coop_comp, compare_public_private, n_scaling_report};
use revshare_core::oracle::{nash_product_maximize, solve_asymmetric_cooperative};
use revshare_core::{Branch, Error, MarketParams, MultiCpMode, SearchConfig};

use crate::args::{Command, RunSpec, ScenarioName, Settings, SweepParam};
use crate::format::{flatten, render};
use crate::records::*;
use crate::svg::{line_chart, Series};
use crate::{verify, CliError};

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub plot: Option<String>,
    /// Failures that did not stop the run (sweep points, verify checks).
    pub failures: Vec<String>,
}

fn numerical(op: &str, e: Error) -> CliError {
    match e {
        Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } | Error::IndexOutOfRange { .. } => {
            CliError::Usage(format!("{op}: {e}"))
        }
        _ => CliError::Numerical(format!("{op} failed: {e}")),
    }
}

pub fn run(spec: &RunSpec) -> Result<RunOutput, CliError> {
    match spec.command {
        Command::Verify => {
            let report = verify::run_suite(&spec.settings);
            let failures = report.failures();
            Ok(RunOutput {
                text: report.render(),
                plot: None,
                failures,
            })
        }
        Command::Shapley => single(spec, shapley(&spec.settings)?),
        Command::Nbs => single(spec, nbs(&spec.settings)?),
        Command::Solve | Command::Compare => {
            let name = spec.scenario.ok_or_else(|| CliError::Usage("missing --scenario".into()))?;
            let records = scenario_records(name, &spec.settings)?;
            let single = records.len() == 1;
            Ok(RunOutput {
                text: render(&records, spec.output_format, single),
                plot: None,
                failures: Vec::new(),
            })
        }
        Command::Sweep => sweep(spec),
    }
}

fn single(spec: &RunSpec, record: Value) -> Result<RunOutput, CliError> {
    Ok(RunOutput {
        text: render(&[record], spec.output_format, true),
        plot: None,
        failures: Vec::new(),
    })
}

fn market(s: &Settings, name: ScenarioName) -> Result<MarketParams, CliError> {
    match name {
        ScenarioName::SymmetricCompetitive | ScenarioName::SymmetricCooperative => {
            MarketParams::symmetric(s.r, s.c1(), s.n.unwrap_or(1)).map_err(|e| numerical("--c / --n", e))
        }
        _ => s.market_params(),
    }
}

/// Records for one scenario at one parameter point.
pub fn scenario_records(name: ScenarioName, s: &Settings) -> Result<Vec<Value>, CliError> {
    let tag = name.as_str();
    let mut params = params_value(Some(name), s);
    let degenerate_pair = s.costs.len() == 2 && s.r <= s.c1() + s.c2();
    match name {
        ScenarioName::ComparePublicPrivate | ScenarioName::CompareCoopComp if degenerate_pair => {
            let cond = format!("r = {} <= c1 + c2 = {}", s.r, s.c1() + s.c2());
            Ok(vec![degenerate_comparison_record(tag, params, &cond)])
        }
        ScenarioName::ComparePublicPrivate => {
            let rep = compare_public_private(s.r, s.c1(), s.c2()).map_err(|e| numerical(tag, e))?;
            Ok(vec![comparison_record(tag, params, &rep)])
        }
        ScenarioName::CompareCoopComp => {
            let rep = compare_coop_comp(s.r, s.c1(), s.c2(), s.disagreement).map_err(|e| numerical(tag, e))?;
            Ok(vec![comparison_record(tag, params, &rep)])
        }
        ScenarioName::NScaling => {
            let ns: Vec<usize> = (1..=s.n.unwrap_or(10)).collect();
            let rep = n_scaling_report(s.r, s.c1(), &ns).map_err(|e| numerical(tag, e))?;
            Ok(vec![comparison_record(tag, params, &rep)])
        }
        ScenarioName::AsymmetricCooperative => {
            let p = s.market_params()?;
            if degenerate_pair {
                return Ok(vec![outcome_record(
                    tag,
                    params,
                    &revshare_core::EquilibriumOutcome::degenerate(p.n()),
                )]);
            }
            let sol = solve_asymmetric_cooperative(s.r, s.c1(), s.c2(), s.disagreement, &SearchConfig::default())
                .map_err(|e| numerical(tag, e))?;
            Ok(vec![cooperative_record(tag, params, &sol)])
        }
        ScenarioName::AsymmetricCompetitive => {
            s.market_params()?;
            let eq = solve_asymmetric_competitive(s.r, s.c1(), s.c2()).map_err(|e| numerical(tag, e))?;
            let o = eq.outcome().map_err(|e| numerical(tag, e))?;
            let mut rec = outcome_record(tag, params, &o);
            if let Value::Object(m) = &mut rec {
                m.insert(
                    "continuum".into(),
                    json!({"split_parameter": eq.split_parameter, "canonical": eq.canonical}),
                );
            }
            Ok(vec![rec])
        }
        ScenarioName::FixedPublicEffortCoop => {
            s.market_params()?;
            let f = solve_fixed_public_effort_coop(s.r, s.c1(), s.c2(), s.a1_bar.unwrap_or(0.0))
                .map_err(|e| numerical(tag, e))?;
            Ok(vec![fixed_effort_record(tag, params, &f)])
        }
        ScenarioName::RegulatedCooperative if s.branch.is_none() => {
            s.market_params()?;
            let (branch, o) =
                solve_regulated_cooperative_preferred(s.r, s.c1(), s.c2()).map_err(|e| numerical(tag, e))?;
            if let Value::Object(m) = &mut params {
                m.insert("branch".into(), json!(branch_name(branch)));
            }
            Ok(vec![outcome_record(tag, params, &o)])
        }
        ScenarioName::MultiCpCompetitive | ScenarioName::MultiCpCooperative => {
            s.market_params()?;
            let mode = match name {
                ScenarioName::MultiCpCompetitive => MultiCpMode::Competitive,
                _ => MultiCpMode::Cooperative(s.branch.unwrap_or(Branch::Isp1)),
            };
            let outs = solve_multi_cp(s.r, s.r2.unwrap_or(s.r), s.c1(), s.c2(), mode).map_err(|e| numerical(tag, e))?;
            Ok(outs
                .iter()
                .enumerate()
                .map(|(i, o)| multi_cp_record(tag, params.clone(), i + 1, o))
                .collect())
        }
        _ => {
            let p = market(s, name)?;
            let kind = s.scenario_kind(name).expect("closed-form scenario");
            let outs = closed_form::solve(&p, &kind).map_err(|e| numerical(tag, e))?;
            Ok(outs.iter().map(|o| outcome_record(tag, params.clone(), o)).collect())
        }
    }
}

fn shapley(s: &Settings) -> Result<Value, CliError> {
    let params = params_value(None, s);
    let branch = s.branch.unwrap_or(Branch::Isp1);
    match shapley_closed(s.r, s.c1(), s.c2(), branch) {
        Ok(rep) => Ok(shapley_record(params, &rep)),
        Err(Error::Degenerate { condition, .. }) => Ok(degenerate_comparison_record("shapley", params, &condition)),
        Err(e) => Err(numerical("shapley", e)),
    }
}

fn nbs(s: &Settings) -> Result<Value, CliError> {
    let (r, c1, c2) = (s.r, s.c1(), s.c2());
    let (branch, coop) = match s.branch {
        Some(b) => (b, solve_regulated_cooperative(r, c1, c2, b).map_err(|e| numerical("nbs", e))?),
        None => solve_regulated_cooperative_preferred(r, c1, c2).map_err(|e| numerical("nbs", e))?,
    };
    let mut params = params_value(None, s);
    if let Value::Object(m) = &mut params {
        m.insert("branch".into(), json!(branch_name(branch)));
    }
    if coop.degenerate {
        let cond = format!("r = {r} <= c_b = {}", branch.cost(c1, c2));
        return Ok(degenerate_comparison_record("nbs", params, &cond));
    }
    let (d1, d2) = disagreement_point(s.disagreement, r, c1, c2).map_err(|e| numerical("nbs disagreement", e))?;
    let beta = coop.contract.joint_share.unwrap_or_else(|| coop.total_share());
    let a = &coop.efforts.efforts;
    let closed = nbs_split_closed(beta, a[0], a[1], d1, d2, r, c1, c2, branch.cost(c1, c2))
        .map_err(|e| numerical("nbs closed split", e))?;
    let numeric = nash_product_maximize(r, c1, c2, beta, d1, d2, &SearchConfig::default())
        .map_err(|e| numerical("nbs numeric bargain", e))?;
    Ok(nbs_record(params, branch, &coop, &closed, &numeric))
}

fn sweep(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let name = spec.scenario.ok_or_else(|| CliError::Usage("missing --scenario".into()))?;
    let axis = spec.sweep_axis.ok_or_else(|| CliError::Usage("missing --sweep".into()))?;
    let mut points: Vec<(f64, Vec<Value>)> = Vec::new();
    let mut failures = Vec::new();
    for v in axis.values() {
        let v = if axis.param == SweepParam::N { v.round() } else { v };
        let s = spec.settings.with(axis.param, v);
        let recs = match scenario_records(name, &s) {
            Ok(recs) => recs,
            Err(e) => {
                failures.push(format!("{} = {v}: {e}", axis.param.as_str()));
                vec![json!({
                    "scenario": name.as_str(),
                    "params": params_value(Some(name), &s),
                    "error": e.to_string(),
                })]
            }
        };
        let recs = recs
            .into_iter()
            .map(|r| with_sweep(axis.param.as_str(), v, r))
            .collect();
        points.push((v, recs));
    }
    let records: Vec<Value> = points.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    let plot = spec.plot.as_ref().map(|_| {
        let x: Vec<f64> = points.iter().map(|(v, _)| *v).collect();
        let series = plot_series(&points);
        line_chart(&format!("{} sweep", name.as_str()), axis.param.as_str(), &x, &series)
    });
    Ok(RunOutput {
        text: render(&records, spec.output_format, false),
        plot,
        failures,
    })
}

fn plotted(key: &str) -> bool {
    key == "utilities.cp"
        || key == "efforts.total"
        || key == "contract.total_share"
        || key.starts_with("utilities.isp.")
        || (key.starts_with("metrics.") && (key.ends_with(".cp_utility") || key.ends_with(".total_effort")))
}

/// Series for the sweep plot, in first-seen order. Multi-CP records are
/// kept apart by CP index.
fn plot_series(points: &[(f64, Vec<Value>)]) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for (k, (_, recs)) in points.iter().enumerate() {
        for rec in recs {
            let prefix = rec.get("cp").map(|cp| format!("cp{cp} ")).unwrap_or_default();
            for (key, v) in flatten(rec) {
                let Some(y) = v.as_f64().filter(|_| plotted(&key)) else {
                    continue;
                };
                let name = format!("{prefix}{key}");
                let idx = match series.iter().position(|s| s.name == name) {
                    Some(i) => i,
                    None => {
                        series.push(Series {
                            name,
                            values: vec![f64::NAN; points.len()],
                        });
                        series.len() - 1
                    }
                };
                series[idx].values[k] = y;
            }
        }
    }
    series
}
