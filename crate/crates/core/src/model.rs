//! Domain types and the demand / utility functions shared by every scenario.
//!
//! Demand is `D = log(Σ a_i + 1)` (natural log). The CP keeps
//! `(1 - Σβ_i) r D`; ISP `i` earns `β_i r D - c_i a_i`.

use serde::Serialize;

use crate::closed_form::ScenarioKind;
use crate::error::{positive, Error, Result};

/// Slack allowed on `Σβ <= 1` and `β <= 1` for values produced by floating
/// point arithmetic.
const SHARE_SLACK: f64 = 1e-12;

/// Exogenous inputs of the economy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketParams {
    r: f64,
    costs: Vec<f64>,
    second_cp_rate: Option<f64>,
    sorted: bool,
}

impl MarketParams {
    pub fn new(r: f64, costs: Vec<f64>) -> Result<Self> {
        positive("r", r)?;
        if costs.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "costs",
                got: 0,
                expected: 1,
            });
        }
        for &c in &costs {
            positive("c", c)?;
        }
        let sorted = costs.windows(2).all(|w| w[0] <= w[1]);
        Ok(Self {
            r,
            costs,
            second_cp_rate: None,
            sorted,
        })
    }

    /// `n` identical ISPs with cost `c`.
    pub fn symmetric(r: f64, c: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "need at least one ISP",
            });
        }
        Self::new(r, vec![c; n])
    }

    pub fn with_second_cp_rate(mut self, r2: f64) -> Result<Self> {
        self.second_cp_rate = Some(positive("r2", r2)?);
        Ok(self)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, i: usize) -> Result<f64> {
        self.costs.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            count: self.costs.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn second_cp_rate(&self) -> Option<f64> {
        self.second_cp_rate
    }

    /// Whether `c_1 <= c_2 <= ...`, the ordering the asymmetric results assume.
    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    /// Same costs, different revenue rate. Used to split the two-CP market
    /// into two single-CP problems.
    pub fn with_rate(&self, r: f64) -> Result<Self> {
        let mut p = Self::new(r, self.costs.clone())?;
        p.second_cp_rate = self.second_cp_rate;
        Ok(p)
    }
}

/// Revenue-share fractions offered by the CP.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contract {
    pub shares: Vec<f64>,
    /// Total share of a joint contract; the per-ISP `shares` then hold the
    /// split of this total.
    pub joint_share: Option<f64>,
}

impl Contract {
    pub fn new(shares: Vec<f64>) -> Result<Self> {
        for &b in &shares {
            check_share("share", b)?;
        }
        let total: f64 = shares.iter().sum();
        if total > 1.0 + SHARE_SLACK {
            return Err(Error::InvalidParameter {
                name: "sum of shares",
                value: total,
                reason: "must be <= 1",
            });
        }
        Ok(Self {
            shares,
            joint_share: None,
        })
    }

    /// Joint contract `joint` split as `shares` among the ISPs.
    pub fn joint(joint: f64, shares: Vec<f64>) -> Result<Self> {
        check_share("joint share", joint)?;
        let mut c = Self::new(shares)?;
        let split: f64 = c.shares.iter().sum();
        if (split - joint).abs() > 1e-9 * joint.max(1.0) {
            return Err(Error::InvalidParameter {
                name: "sum of shares",
                value: split,
                reason: "split of a joint contract must add up to the joint share",
            });
        }
        c.joint_share = Some(joint);
        Ok(c)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            shares: vec![0.0; n],
            joint_share: None,
        }
    }

    /// Total fraction of revenue given away.
    pub fn total(&self) -> f64 {
        self.joint_share
            .unwrap_or_else(|| self.shares.iter().sum())
    }
}

fn check_share(name: &'static str, b: f64) -> Result<()> {
    if b.is_finite() && (-SHARE_SLACK..=1.0 + SHARE_SLACK).contains(&b) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: b,
            reason: "must lie in [0, 1]",
        })
    }
}

/// Investment efforts of the ISPs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffortProfile {
    pub efforts: Vec<f64>,
}

impl EffortProfile {
    pub fn new(efforts: Vec<f64>) -> Result<Self> {
        for &a in &efforts {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::InfeasibleEffort {
                    what: "effort",
                    value: a,
                });
            }
        }
        Ok(Self { efforts })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            efforts: vec![0.0; n],
        }
    }

    pub fn total(&self) -> f64 {
        self.efforts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.efforts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.efforts.is_empty()
    }
}

/// A solved scenario: contract, efforts, and everything derived from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumOutcome {
    pub contract: Contract,
    pub efforts: EffortProfile,
    pub demand: f64,
    pub cp_utility: f64,
    pub isp_utilities: Vec<f64>,
    pub total_effort: f64,
    /// Largest absolute first-order-condition violation of the solved model.
    pub foc_residual: f64,
    /// The zero-share, zero-effort outcome of a below-threshold regime.
    pub degenerate: bool,
}

impl EquilibriumOutcome {
    /// Builds an outcome, deriving demand and utilities from their
    /// definitions so the stored fields are always mutually consistent.
    pub fn evaluate(
        params: &MarketParams,
        contract: Contract,
        efforts: EffortProfile,
        foc_residual: f64,
    ) -> Result<Self> {
        let cp = cp_utility(params, &contract, &efforts)?;
        let isp = (0..params.n())
            .map(|i| isp_utility(params, i, &contract, &efforts))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            demand: demand(&efforts),
            total_effort: efforts.total(),
            cp_utility: cp,
            isp_utilities: isp,
            contract,
            efforts,
            foc_residual,
            degenerate: false,
        })
    }

    /// Zero shares, zero efforts, zero utilities.
    pub fn degenerate(n: usize) -> Self {
        Self {
            contract: Contract::zeros(n),
            efforts: EffortProfile::zeros(n),
            demand: 0.0,
            cp_utility: 0.0,
            isp_utilities: vec![0.0; n],
            total_effort: 0.0,
            foc_residual: 0.0,
            degenerate: true,
        }
    }

    pub fn total_share(&self) -> f64 {
        self.contract.total()
    }
}

/// `log(Σ a + 1)`.
pub fn demand(efforts: &EffortProfile) -> f64 {
    efforts.total().ln_1p()
}

/// `(1 - Σβ) r D`. A joint contract contributes its joint share.
pub fn cp_utility(params: &MarketParams, contract: &Contract, efforts: &EffortProfile) -> Result<f64> {
    check_efforts(params, efforts)?;
    if contract.joint_share.is_none() {
        check_shares(params, contract)?;
    }
    Ok((1.0 - contract.total()) * params.r() * demand(efforts))
}

/// `β_i r D - c_i a_i`.
pub fn isp_utility(
    params: &MarketParams,
    i: usize,
    contract: &Contract,
    efforts: &EffortProfile,
) -> Result<f64> {
    let c = params.cost(i)?;
    check_efforts(params, efforts)?;
    check_shares(params, contract)?;
    Ok(contract.shares[i] * params.r() * demand(efforts) - c * efforts.efforts[i])
}

fn check_efforts(params: &MarketParams, efforts: &EffortProfile) -> Result<()> {
    if efforts.len() != params.n() {
        return Err(Error::DimensionMismatch {
            what: "efforts",
            got: efforts.len(),
            expected: params.n(),
        });
    }
    Ok(())
}

fn check_shares(params: &MarketParams, contract: &Contract) -> Result<()> {
    if contract.shares.len() != params.n() {
        return Err(Error::DimensionMismatch {
            what: "shares",
            got: contract.shares.len(),
            expected: params.n(),
        });
    }
    Ok(())
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// The non-degeneracy condition holds.
    pub valid: bool,
    /// Human-readable form of the condition that was checked.
    pub condition: String,
    /// When `valid` is false the zero-share, zero-effort outcome applies.
    pub degenerate: bool,
}

/// Checks the scenario's non-degeneracy condition. Never fails: problems are
/// reported in the returned value.
pub fn validate(params: &MarketParams, scenario: &ScenarioKind) -> ValidationReport {
    let r = params.r();
    let costs = params.costs();
    let report = |ok: bool, condition: String| ValidationReport {
        valid: ok,
        degenerate: !ok,
        condition,
    };
    let need = |k: usize| -> Option<f64> { costs.get(k).copied() };

    match scenario {
        ScenarioKind::SymmetricCompetitive { .. } | ScenarioKind::SymmetricCooperative { .. } => {
            let c = costs[0];
            if costs.iter().any(|&ci| ci != c) {
                return report(false, "symmetric scenario needs equal costs".into());
            }
            report(r > c, format!("r > c ({r} > {c})"))
        }
        ScenarioKind::PublicPrivate
        | ScenarioKind::PublicPrivateRegulated { .. }
        | ScenarioKind::FixedPublicEffortCooperative { .. } => match need(1) {
            Some(c2) => report(r > c2, format!("r > c2 ({r} > {c2})")),
            None => report(false, "needs two ISP costs".into()),
        },
        ScenarioKind::AsymmetricCompetitive | ScenarioKind::RegulatedCompetitive => {
            match (need(0), need(1)) {
                (Some(c1), Some(c2)) => {
                    report(r > c1 + c2, format!("r > c1 + c2 ({r} > {})", c1 + c2))
                }
                _ => report(false, "needs two ISP costs".into()),
            }
        }
        ScenarioKind::RegulatedCooperative { branch } => match need(branch.index()) {
            Some(cb) => report(r > cb, format!("r > c{} ({r} > {cb})", branch.index() + 1)),
            None => report(false, "needs two ISP costs".into()),
        },
        ScenarioKind::MultiCpCompetitive | ScenarioKind::MultiCpCooperative { .. } => {
            let (Some(c1), Some(c2)) = (need(0), need(1)) else {
                return report(false, "needs two ISP costs".into());
            };
            let Some(r2) = params.second_cp_rate() else {
                return report(false, "needs the second CP rate r2".into());
            };
            let threshold = match scenario {
                ScenarioKind::MultiCpCooperative { branch } => costs[branch.index()],
                _ => c1 + c2,
            };
            report(
                r > threshold && r2 > threshold,
                format!("r1, r2 > {threshold} ({r}, {r2})"),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::Branch;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn params2(r: f64, c1: f64, c2: f64) -> MarketParams {
        MarketParams::new(r, vec![c1, c2]).unwrap()
    }

    #[test]
    fn demand_examples() {
        assert_eq!(demand(&EffortProfile::zeros(2)), 0.0);
        let d = demand(&EffortProfile::new(vec![E - 1.0, 0.0]).unwrap());
        assert!((d - 1.0).abs() < 1e-15);
        // log(3.421) evaluated directly.
        let d = demand(&EffortProfile::new(vec![1.2105, 1.2105]).unwrap());
        assert!((d - 3.421f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cp_utility_examples() {
        let p = params2(10.0, 0.5, 0.5);
        let e = EffortProfile::new(vec![E - 1.0, 0.0]).unwrap();
        let u = cp_utility(&p, &Contract::zeros(2), &e).unwrap();
        assert!((u - 10.0).abs() < 1e-12);
        let all = Contract::new(vec![0.4, 0.6]).unwrap();
        assert_eq!(cp_utility(&p, &all, &e).unwrap(), 0.0);
    }

    #[test]
    fn isp_utility_examples() {
        let p = params2(10.0, 0.5, 0.5);
        assert_eq!(
            isp_utility(&p, 0, &Contract::zeros(2), &EffortProfile::zeros(2)).unwrap(),
            0.0
        );
        let p = MarketParams::new(10.0, vec![1.0]).unwrap();
        let c = Contract::new(vec![1.0]).unwrap();
        let e = EffortProfile::new(vec![E - 1.0]).unwrap();
        let u = isp_utility(&p, 0, &c, &e).unwrap();
        assert!((u - (10.0 - (E - 1.0))).abs() < 1e-12);
        assert!((u - 8.2817).abs() < 1e-4);
    }

    #[test]
    fn dimension_and_index_errors() {
        let p = params2(10.0, 0.5, 0.5);
        let e3 = EffortProfile::zeros(3);
        assert!(matches!(
            cp_utility(&p, &Contract::zeros(2), &e3),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            isp_utility(&p, 2, &Contract::zeros(2), &EffortProfile::zeros(2)),
            Err(Error::IndexOutOfRange { index: 2, count: 2 })
        ));
        assert!(matches!(
            cp_utility(&p, &Contract::zeros(1), &EffortProfile::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(MarketParams::new(0.0, vec![1.0]).is_err());
        assert!(MarketParams::new(1.0, vec![]).is_err());
        assert!(MarketParams::new(1.0, vec![1.0, -1.0]).is_err());
        assert!(MarketParams::symmetric(1.0, 1.0, 0).is_err());
        assert!(Contract::new(vec![0.7, 0.7]).is_err());
        assert!(Contract::new(vec![1.5]).is_err());
        assert!(Contract::joint(0.5, vec![0.1, 0.1]).is_err());
        assert!(EffortProfile::new(vec![-0.1]).is_err());
        assert!(MarketParams::new(1.0, vec![2.0, 1.0]).is_ok_and(|p| !p.is_sorted()));
    }

    #[test]
    fn validate_examples() {
        let v = validate(
            &params2(10.0, 0.5, 0.5),
            &ScenarioKind::SymmetricCompetitive { n: 2 },
        );
        assert!(v.valid && !v.degenerate);
        let v = validate(
            &MarketParams::new(1.0, vec![2.0]).unwrap(),
            &ScenarioKind::SymmetricCompetitive { n: 1 },
        );
        assert!(!v.valid && v.degenerate);
        let v = validate(&params2(10.0, 6.0, 5.0), &ScenarioKind::AsymmetricCompetitive);
        assert!(v.degenerate);
        let v = validate(&params2(10.0, 6.0, 5.0), &ScenarioKind::PublicPrivate);
        assert!(v.valid);
        let v = validate(
            &params2(10.0, 6.0, 11.0),
            &ScenarioKind::RegulatedCooperative { branch: Branch::Isp1 },
        );
        assert!(v.valid);
        let v = validate(&params2(10.0, 1.0, 2.0), &ScenarioKind::MultiCpCompetitive);
        assert!(!v.valid, "missing r2 must be reported");
        let v = validate(&params2(10.0, 1.0, 2.0), &ScenarioKind::PublicPrivate);
        assert!(v.valid);
        let v = validate(
            &MarketParams::new(10.0, vec![1.0]).unwrap(),
            &ScenarioKind::PublicPrivate,
        );
        assert!(!v.valid);
    }

    proptest! {
        #[test]
        fn demand_is_permutation_invariant_and_increasing(
            a in 0.0f64..50.0, b in 0.0f64..50.0, bump in 1e-6f64..5.0
        ) {
            let d1 = demand(&EffortProfile::new(vec![a, b]).unwrap());
            let d2 = demand(&EffortProfile::new(vec![b, a]).unwrap());
            prop_assert!((d1 - d2).abs() < 1e-15);
            let d3 = demand(&EffortProfile::new(vec![a + bump, b]).unwrap());
            prop_assert!(d3 > d1);
        }

        #[test]
        fn revenue_accounting_identity(
            r in 0.5f64..50.0,
            c1 in 0.01f64..5.0, c2 in 0.01f64..5.0,
            b1 in 0.0f64..0.5, b2 in 0.0f64..0.5,
            a1 in 0.0f64..20.0, a2 in 0.0f64..20.0,
        ) {
            let p = params2(r, c1, c2);
            let k = Contract::new(vec![b1, b2]).unwrap();
            let e = EffortProfile::new(vec![a1, a2]).unwrap();
            let o = EquilibriumOutcome::evaluate(&p, k, e, 0.0).unwrap();
            let lhs = o.cp_utility + o.isp_utilities.iter().sum::<f64>() + c1 * a1 + c2 * a2;
            prop_assert!((lhs - r * o.demand).abs() < 1e-9 * (1.0 + r * o.demand));
            prop_assert!((o.demand - (o.total_effort + 1.0).ln()).abs() < 1e-12);
            prop_assert!((o.cp_utility - (1.0 - b1 - b2) * r * o.demand).abs() < 1e-12 * (1.0 + r * o.demand));
        }
    }
}
