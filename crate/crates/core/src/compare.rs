//! Side-by-side reports of scenario outcomes. Each ordering in a report is
//! evaluated from the report's own metrics.

use serde::Serialize;

use crate::bargaining::DisagreementPolicy;
use crate::closed_form::{
    solve_asymmetric_competitive, solve_public_private, solve_regulated_competitive,
    solve_regulated_cooperative_preferred, solve_symmetric_competitive, solve_symmetric_cooperative,
    Branch, ScenarioKind,
};
use crate::error::{positive, Error, Result};
use crate::model::{EquilibriumOutcome, MarketParams};
use crate::oracle::{solve_asymmetric_cooperative, SearchConfig};

/// One scenario's row in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub label: String,
    pub scenario: ScenarioKind,
    pub total_effort: f64,
    pub cp_utility: f64,
    pub isp_utilities: Vec<f64>,
    pub total_share: f64,
    /// Share and effort of the first ISP.
    pub share_per_isp: f64,
    pub effort_per_isp: f64,
    pub degenerate: bool,
}

impl Metrics {
    pub fn from_outcome(label: impl Into<String>, scenario: ScenarioKind, o: &EquilibriumOutcome) -> Self {
        Self {
            label: label.into(),
            scenario,
            total_effort: o.total_effort,
            cp_utility: o.cp_utility,
            isp_utilities: o.isp_utilities.clone(),
            total_share: o.total_share(),
            share_per_isp: o.contract.shares.first().copied().unwrap_or(0.0),
            effort_per_isp: o.efforts.efforts.first().copied().unwrap_or(0.0),
            degenerate: o.degenerate,
        }
    }

    pub fn get(&self, key: MetricKey) -> f64 {
        match key {
            MetricKey::TotalEffort => self.total_effort,
            MetricKey::CpUtility => self.cp_utility,
            MetricKey::TotalShare => self.total_share,
            MetricKey::SharePerIsp => self.share_per_isp,
            MetricKey::EffortPerIsp => self.effort_per_isp,
            MetricKey::IspUtility(i) => self.isp_utilities.get(i).copied().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKey {
    TotalEffort,
    CpUtility,
    TotalShare,
    SharePerIsp,
    EffortPerIsp,
    IspUtility(usize),
}

impl MetricKey {
    pub fn name(self) -> String {
        match self {
            MetricKey::TotalEffort => "total_effort".into(),
            MetricKey::CpUtility => "cp_utility".into(),
            MetricKey::TotalShare => "total_share".into(),
            MetricKey::SharePerIsp => "share_per_isp".into(),
            MetricKey::EffortPerIsp => "effort_per_isp".into(),
            MetricKey::IspUtility(i) => format!("isp_utility_{}", i + 1),
        }
    }
}

/// Relation checked over the listed rows, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Greater,
    GreaterOrEqual,
    /// Equal within the check's tolerance (relative to `max(1, |x|)`).
    Equal,
    StrictlyDecreasing,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Greater => ">",
            Relation::GreaterOrEqual => ">=",
            Relation::Equal => "==",
            Relation::StrictlyDecreasing => "decreasing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub metric: MetricKey,
    pub relation: Relation,
    /// Indices into the report's `metrics`.
    pub rows: Vec<usize>,
    pub tolerance: f64,
    pub holds: bool,
    /// Largest violation (or, for `Equal`, largest gap) observed.
    pub gap: f64,
}

impl OrderingCheck {
    fn new(metric: MetricKey, relation: Relation, rows: Vec<usize>, tolerance: f64, metrics: &[Metrics]) -> Self {
        let mut c = Self {
            metric,
            relation,
            rows,
            tolerance,
            holds: false,
            gap: 0.0,
        };
        (c.holds, c.gap) = c.evaluate(metrics);
        c
    }

    /// `(holds, gap)` recomputed from `metrics`.
    pub fn evaluate(&self, metrics: &[Metrics]) -> (bool, f64) {
        let vals: Vec<f64> = self.rows.iter().map(|&i| metrics[i].get(self.metric)).collect();
        let mut holds = vals.iter().all(|v| v.is_finite());
        let mut gap: f64 = 0.0;
        for w in vals.windows(2) {
            let (a, b) = (w[0], w[1]);
            let tol = self.tolerance * a.abs().max(b.abs()).max(1.0);
            match self.relation {
                Relation::Greater => {
                    holds &= a > b + tol;
                    gap = gap.max(b - a);
                }
                Relation::GreaterOrEqual => {
                    holds &= a >= b - tol;
                    gap = gap.max(b - a);
                }
                Relation::Equal => {
                    holds &= (a - b).abs() <= tol;
                    gap = gap.max((a - b).abs());
                }
                Relation::StrictlyDecreasing => {
                    holds &= a > b;
                    gap = gap.max(b - a);
                }
            }
        }
        (holds, gap)
    }

    pub fn describe(&self, metrics: &[Metrics]) -> String {
        let labels: Vec<&str> = self.rows.iter().map(|&i| metrics[i].label.as_str()).collect();
        match self.relation {
            Relation::StrictlyDecreasing => {
                format!("{} decreasing over {}", self.metric.name(), labels.join(", "))
            }
            rel => format!(
                "{}: {}",
                self.metric.name(),
                labels.join(&format!(" {} ", rel.symbol()))
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub title: String,
    pub params: MarketParams,
    pub scenario_a: ScenarioKind,
    pub scenario_b: ScenarioKind,
    pub metrics: Vec<Metrics>,
    pub orderings: Vec<OrderingCheck>,
    /// Every row is a degenerate outcome.
    pub all_degenerate: bool,
}

impl ComparisonReport {
    pub fn all_hold(&self) -> bool {
        self.orderings.iter().all(|o| o.holds)
    }

    /// Whether every stored `holds` flag agrees with a fresh evaluation.
    pub fn is_consistent(&self) -> bool {
        self.orderings
            .iter()
            .all(|o| o.evaluate(&self.metrics) == (o.holds, o.gap))
    }

    fn push(&mut self, metric: MetricKey, relation: Relation, rows: Vec<usize>, tolerance: f64) {
        let check = OrderingCheck::new(metric, relation, rows, tolerance, &self.metrics);
        self.orderings.push(check);
    }
}

fn degenerate_error(scenario: &'static str, r: f64, c1: f64, c2: f64) -> Error {
    Error::Degenerate {
        scenario,
        condition: format!("r = {r} <= c1 + c2 = {}", c1 + c2),
    }
}

/// Both ISPs private (asymmetric competitive, canonical split) against ISP 1
/// public (public/private). Checks that the private-pair share is higher
/// and that total effort and CP utility are higher with a public ISP.
pub fn compare_public_private(r: f64, c1: f64, c2: f64) -> Result<ComparisonReport> {
    let params = MarketParams::new(positive("r", r)?, vec![c1, c2])?;
    if r <= c1 + c2 {
        return Err(degenerate_error("compare-public-private", r, c1, c2));
    }
    let private = solve_asymmetric_competitive(r, c1, c2)?.outcome()?;
    let public = solve_public_private(r, c1, c2)?;
    let mut rep = ComparisonReport {
        title: "both private vs one public".into(),
        params,
        scenario_a: ScenarioKind::AsymmetricCompetitive,
        scenario_b: ScenarioKind::PublicPrivate,
        metrics: vec![
            Metrics::from_outcome("private", ScenarioKind::AsymmetricCompetitive, &private),
            Metrics::from_outcome("public", ScenarioKind::PublicPrivate, &public),
        ],
        orderings: Vec::new(),
        all_degenerate: false,
    };
    rep.push(MetricKey::TotalShare, Relation::Greater, vec![0, 1], 0.0);
    rep.push(MetricKey::TotalEffort, Relation::Greater, vec![1, 0], 0.0);
    rep.push(MetricKey::CpUtility, Relation::Greater, vec![1, 0], 0.0);
    Ok(rep)
}

/// Options for [`compare_coop_comp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoopCompOptions {
    pub disagreement: DisagreementPolicy,
    /// Also solve the bargaining-based cooperative equilibrium numerically.
    pub include_bargaining: bool,
    pub search: SearchConfig,
}

impl Default for CoopCompOptions {
    fn default() -> Self {
        Self {
            disagreement: DisagreementPolicy::default(),
            include_bargaining: true,
            search: SearchConfig::default(),
        }
    }
}

/// Regulated competition against regulated cooperation (CP-preferred
/// branch) and, optionally, the numerically solved bargaining equilibrium.
/// With equal costs the symmetric competitive and cooperative games are
/// added as a pair that must coincide.
pub fn compare_coop_comp(r: f64, c1: f64, c2: f64, disagreement: DisagreementPolicy) -> Result<ComparisonReport> {
    compare_coop_comp_with(
        r,
        c1,
        c2,
        &CoopCompOptions {
            disagreement,
            ..Default::default()
        },
    )
}

pub fn compare_coop_comp_with(r: f64, c1: f64, c2: f64, opts: &CoopCompOptions) -> Result<ComparisonReport> {
    let params = MarketParams::new(positive("r", r)?, vec![c1, c2])?;
    if r <= c1 + c2 {
        return Err(degenerate_error("compare-coop-comp", r, c1, c2));
    }
    let comp = solve_regulated_competitive(r, c1, c2)?;
    let (branch, coop) = solve_regulated_cooperative_preferred(r, c1, c2)?;
    let coop_kind = ScenarioKind::RegulatedCooperative { branch };
    let mut rep = ComparisonReport {
        title: "cooperative vs competitive".into(),
        params,
        scenario_a: coop_kind,
        scenario_b: ScenarioKind::RegulatedCompetitive,
        metrics: vec![
            Metrics::from_outcome("cooperative", coop_kind, &coop),
            Metrics::from_outcome("competitive", ScenarioKind::RegulatedCompetitive, &comp),
        ],
        orderings: Vec::new(),
        all_degenerate: false,
    };
    let strict = c1 != c2;
    let rel = if strict { Relation::Greater } else { Relation::GreaterOrEqual };
    rep.push(MetricKey::TotalEffort, rel, vec![0, 1], 0.0);
    rep.push(MetricKey::CpUtility, rel, vec![0, 1], 0.0);

    if opts.include_bargaining {
        let sol = solve_asymmetric_cooperative(r, c1, c2, opts.disagreement, &opts.search)?;
        let kind = ScenarioKind::RegulatedCooperative { branch: Branch::Isp1 };
        rep.metrics.push(Metrics::from_outcome("bargaining", kind, &sol.outcome));
        let k = rep.metrics.len() - 1;
        rep.push(MetricKey::CpUtility, Relation::GreaterOrEqual, vec![k, 1], 1e-9);
    }

    if !strict {
        let sym_comp = solve_symmetric_competitive(r, c1, 2)?;
        let sym_coop = solve_symmetric_cooperative(r, c1, 2)?;
        rep.metrics.push(Metrics::from_outcome(
            "symmetric-cooperative",
            ScenarioKind::SymmetricCooperative { n: 2 },
            &sym_coop,
        ));
        rep.metrics.push(Metrics::from_outcome(
            "symmetric-competitive",
            ScenarioKind::SymmetricCompetitive { n: 2 },
            &sym_comp,
        ));
        let k = rep.metrics.len() - 2;
        for key in [MetricKey::TotalEffort, MetricKey::CpUtility, MetricKey::TotalShare] {
            rep.push(key, Relation::Equal, vec![k, k + 1], 1e-9);
        }
    }
    Ok(rep)
}

/// Symmetric competitive outcomes across `n_values`: CP utility, total
/// share and total effort stay constant while per-ISP share, effort and
/// utility fall with `n`.
pub fn n_scaling_report(r: f64, c: f64, n_values: &[usize]) -> Result<ComparisonReport> {
    if n_values.is_empty() {
        return Err(Error::DimensionMismatch {
            what: "n_values",
            got: 0,
            expected: 1,
        });
    }
    let params = MarketParams::new(positive("r", r)?, vec![positive("c", c)?])?;
    let mut metrics = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let o = solve_symmetric_competitive(r, c, n)?;
        metrics.push(Metrics::from_outcome(
            format!("n={n}"),
            ScenarioKind::SymmetricCompetitive { n },
            &o,
        ));
    }
    let all_degenerate = metrics.iter().all(|m| m.degenerate);
    let mut rep = ComparisonReport {
        title: "n scaling".into(),
        params,
        scenario_a: ScenarioKind::SymmetricCompetitive { n: n_values[0] },
        scenario_b: ScenarioKind::SymmetricCompetitive {
            n: n_values[n_values.len() - 1],
        },
        metrics,
        orderings: Vec::new(),
        all_degenerate,
    };
    let rows: Vec<usize> = (0..n_values.len()).collect();
    for key in [MetricKey::CpUtility, MetricKey::TotalShare, MetricKey::TotalEffort] {
        rep.push(key, Relation::Equal, rows.clone(), 1e-9);
    }
    for key in [MetricKey::SharePerIsp, MetricKey::EffortPerIsp, MetricKey::IspUtility(0)] {
        rep.push(key, Relation::StrictlyDecreasing, rows.clone(), 0.0);
    }
    Ok(rep)
}
