//! Explicit equilibrium formulas.
//!
//! Every non-degenerate contract has the shape `1 / W0(r e / k)` for a
//! scenario-specific cost `k`. Outcomes are built through
//! [`EquilibriumOutcome::evaluate`], so utilities always come from the
//! model definitions; the few closed-form utility expressions that are not
//! used for that are exposed separately so they can be compared.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{non_negative, positive, Error, Result};
use crate::lambertw::lambert_w0;
use crate::model::{Contract, EffortProfile, EquilibriumOutcome, MarketParams};

/// Which ISP's first-order condition fixes the joint contract in the
/// regulated cooperative game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Isp1,
    Isp2,
}

impl Branch {
    /// Zero-based ISP index.
    pub fn index(self) -> usize {
        match self {
            Branch::Isp1 => 0,
            Branch::Isp2 => 1,
        }
    }

    pub fn cost(self, c1: f64, c2: f64) -> f64 {
        match self {
            Branch::Isp1 => c1,
            Branch::Isp2 => c2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Isp1 => "isp1",
            Branch::Isp2 => "isp2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MultiCpMode {
    Competitive,
    Cooperative(Branch),
}

/// The scenarios with a closed-form solution. Market parameters (`r`, the
/// costs, `r2`) live in [`MarketParams`]; variants carry only the extra
/// inputs their scenario needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioKind {
    PublicPrivate,
    PublicPrivateRegulated { a1_bar: f64 },
    SymmetricCompetitive { n: usize },
    SymmetricCooperative { n: usize },
    AsymmetricCompetitive,
    RegulatedCompetitive,
    RegulatedCooperative { branch: Branch },
    FixedPublicEffortCooperative { a1_bar: f64 },
    MultiCpCompetitive,
    MultiCpCooperative { branch: Branch },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::PublicPrivate => "public-private",
            ScenarioKind::PublicPrivateRegulated { .. } => "public-private-regulated",
            ScenarioKind::SymmetricCompetitive { .. } => "symmetric-competitive",
            ScenarioKind::SymmetricCooperative { .. } => "symmetric-cooperative",
            ScenarioKind::AsymmetricCompetitive => "asymmetric-competitive",
            ScenarioKind::RegulatedCompetitive => "regulated-competitive",
            ScenarioKind::RegulatedCooperative { .. } => "regulated-cooperative",
            ScenarioKind::FixedPublicEffortCooperative { .. } => "fixed-public-effort-coop",
            ScenarioKind::MultiCpCompetitive => "multi-cp-competitive",
            ScenarioKind::MultiCpCooperative { .. } => "multi-cp-cooperative",
        }
    }
}

/// Asymmetric competitive equilibrium: the shares and total effort are
/// pinned down, the split of effort between the ISPs is not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumEquilibrium {
    pub params: MarketParams,
    pub total_effort: f64,
    pub shares: Contract,
    /// `t` with `a_1 = t * total_effort`.
    pub split_parameter: f64,
    /// Whether `split_parameter` is the cost-proportional split `c1/(c1+c2)`.
    pub canonical: bool,
    pub foc_residual: f64,
    pub degenerate: bool,
}

impl ContinuumEquilibrium {
    /// Cost-proportional split.
    pub fn canonical_split(c1: f64, c2: f64) -> f64 {
        c1 / (c1 + c2)
    }

    pub fn with_split(&self, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                reason: "split parameter must lie in [0, 1]",
            });
        }
        let costs = self.params.costs();
        let mut out = self.clone();
        out.split_parameter = t;
        out.canonical = t == Self::canonical_split(costs[0], costs[1]);
        Ok(out)
    }

    pub fn efforts(&self) -> EffortProfile {
        let t = self.split_parameter;
        EffortProfile {
            efforts: vec![t * self.total_effort, (1.0 - t) * self.total_effort],
        }
    }

    /// The outcome at the current split.
    pub fn outcome(&self) -> Result<EquilibriumOutcome> {
        if self.degenerate {
            return Ok(EquilibriumOutcome::degenerate(2));
        }
        EquilibriumOutcome::evaluate(
            &self.params,
            self.shares.clone(),
            self.efforts(),
            self.foc_residual,
        )
    }
}

/// Contract, total effort and `W` for a single-cost leader problem:
/// `β = 1/W(r e / k)`, `Σa = βr/k − 1`.
fn single_cost_core(r: f64, k: f64) -> Result<(f64, f64, f64)> {
    let w = lambert_w0(r * E / k)?;
    let beta = 1.0 / w;
    Ok((w, beta, r / (k * w) - 1.0))
}

/// `|log(βr/k) − (1−β)/β|`, the leader's condition when the follower
/// response is `Σa + 1 = βr/k`.
fn leader_residual(beta: f64, r: f64, k: f64) -> f64 {
    ((beta * r / k).ln() - (1.0 - beta) / beta).abs()
}

/// `|β_i r / (Σa + 1) − c_i|` for an ISP with interior effort.
fn follower_residual(beta_i: f64, r: f64, c_i: f64, total: f64) -> f64 {
    (beta_i * r / (total + 1.0) - c_i).abs()
}

fn check_two(r: f64, c1: f64, c2: f64) -> Result<MarketParams> {
    positive("r", r)?;
    positive("c1", c1)?;
    positive("c2", c2)?;
    MarketParams::new(r, vec![c1, c2])
}

/// One public ISP (ISP 1) that breaks even and one private ISP (ISP 2).
/// The CP shares nothing with the public ISP.
pub fn solve_public_private(r: f64, c1: f64, c2: f64) -> Result<EquilibriumOutcome> {
    solve_public_private_regulated(r, c1, c2, 0.0)
}

/// As [`solve_public_private`] but with the public ISP investing `a1_bar`
/// and paid exactly its cost.
pub fn solve_public_private_regulated(
    r: f64,
    c1: f64,
    c2: f64,
    a1_bar: f64,
) -> Result<EquilibriumOutcome> {
    let params = check_two(r, c1, c2)?;
    non_negative("a1_bar", a1_bar)?;
    if r <= c2 {
        return Ok(EquilibriumOutcome::degenerate(2));
    }
    let (_, beta2, total) = single_cost_core(r, c2)?;
    let a2 = total - a1_bar;
    if a2 < 0.0 {
        return Err(Error::InfeasibleEffort {
            what: "a2",
            value: a2,
        });
    }
    let demand = (beta2 * r / c2).ln();
    let beta1 = a1_bar * c1 / (r * demand);
    let contract = Contract::new(vec![beta1, beta2])?;
    let efforts = EffortProfile::new(vec![a1_bar, a2])?;
    let residual = leader_residual(beta2, r, c2)
        .max(follower_residual(beta2, r, c2, a1_bar + a2))
        .max((beta1 * r * demand - c1 * a1_bar).abs());
    EquilibriumOutcome::evaluate(&params, contract, efforts, residual)
}

/// `n` identical competing ISPs: `β_i = 1/(n W(re/c))`, `a_i = (r/(cW) − 1)/n`.
///
/// The ISP efforts follow the symmetric response `n a + 1 = n β r / c`,
/// i.e. the optimum of `max_a β r log(n a + 1) − c a`.
pub fn solve_symmetric_competitive(r: f64, c: f64, n: usize) -> Result<EquilibriumOutcome> {
    let params = symmetric_params(r, c, n)?;
    if r <= c {
        return Ok(EquilibriumOutcome::degenerate(n));
    }
    let nf = n as f64;
    let (_, joint, total) = single_cost_core(r, c)?;
    let beta = joint / nf;
    let a = total / nf;
    let contract = Contract::new(vec![beta; n])?;
    let efforts = EffortProfile::new(vec![a; n])?;
    let leader = ((nf * beta * r / c).ln() - (1.0 - nf * beta) / (nf * beta)).abs();
    let follower = (beta * r * nf / (nf * a + 1.0) - c).abs();
    EquilibriumOutcome::evaluate(&params, contract, efforts, leader.max(follower))
}

/// `n` identical ISPs negotiating a joint contract `β = 1/W(re/c)`,
/// split evenly.
pub fn solve_symmetric_cooperative(r: f64, c: f64, n: usize) -> Result<EquilibriumOutcome> {
    let params = symmetric_params(r, c, n)?;
    if r <= c {
        return Ok(EquilibriumOutcome::degenerate(n));
    }
    let nf = n as f64;
    let (_, beta, total) = single_cost_core(r, c)?;
    let contract = Contract::joint(beta, vec![beta / nf; n])?;
    let efforts = EffortProfile::new(vec![total / nf; n])?;
    let residual = leader_residual(beta, r, c).max(follower_residual(beta, r, c, total));
    EquilibriumOutcome::evaluate(&params, contract, efforts, residual)
}

fn symmetric_params(r: f64, c: f64, n: usize) -> Result<MarketParams> {
    positive("r", r)?;
    positive("c", c)?;
    MarketParams::symmetric(r, c, n)
}

/// Shares `β_i = c_i / (C W(re/C))` and total effort `r/(C W(re/C)) − 1`
/// with `C = Σc_i`, together with the FOC residual. Stated for two ISPs;
/// the same construction applies to any number of ISPs with costs ordered
/// arbitrarily.
pub fn asymmetric_shares(r: f64, costs: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    positive("r", r)?;
    for &c in costs {
        positive("c", c)?;
    }
    let sum: f64 = costs.iter().sum();
    if r <= sum {
        return Ok((vec![0.0; costs.len()], 0.0, 0.0));
    }
    let (_, joint, total) = single_cost_core(r, sum)?;
    let shares: Vec<f64> = costs.iter().map(|c| c / sum * joint).collect();
    let mut residual = leader_residual(joint, r, sum);
    for (b, c) in shares.iter().zip(costs) {
        residual = residual.max(follower_residual(*b, r, *c, total));
    }
    Ok((shares, total, residual))
}

/// Two competing ISPs with different costs. Returns the whole family of
/// equilibria at the canonical split.
pub fn solve_asymmetric_competitive(r: f64, c1: f64, c2: f64) -> Result<ContinuumEquilibrium> {
    let params = check_two(r, c1, c2)?;
    let t = ContinuumEquilibrium::canonical_split(c1, c2);
    if r <= c1 + c2 {
        return Ok(ContinuumEquilibrium {
            params,
            total_effort: 0.0,
            shares: Contract::zeros(2),
            split_parameter: t,
            canonical: true,
            foc_residual: 0.0,
            degenerate: true,
        });
    }
    let (shares, total, residual) = asymmetric_shares(r, &[c1, c2])?;
    Ok(ContinuumEquilibrium {
        params,
        total_effort: total,
        shares: Contract::new(shares)?,
        split_parameter: t,
        canonical: true,
        foc_residual: residual,
        degenerate: false,
    })
}

/// Asymmetric competition with the regulator enforcing `a1/a2 = β1/β2`,
/// i.e. the canonical split of [`solve_asymmetric_competitive`].
pub fn solve_regulated_competitive(r: f64, c1: f64, c2: f64) -> Result<EquilibriumOutcome> {
    solve_asymmetric_competitive(r, c1, c2)?.outcome()
}

/// Per-ISP utility of the regulated competitive equilibrium in its
/// closed form,
/// `c_i/(c1+c2) [r(1 − (2c_i + c_j)/((c1+c2) W)) + c_i]`.
pub fn regulated_competitive_utility_formula(r: f64, c1: f64, c2: f64, i: usize) -> Result<f64> {
    check_two(r, c1, c2)?;
    let (ci, cj) = match i {
        0 => (c1, c2),
        1 => (c2, c1),
        _ => return Err(Error::IndexOutOfRange { index: i, count: 2 }),
    };
    let sum = c1 + c2;
    let w = lambert_w0(r * E / sum)?;
    Ok(ci / sum * (r * (1.0 - (2.0 * ci + cj) / (sum * w)) + ci))
}

/// Regulated cooperation where the joint contract follows branch `branch`:
/// `β = 1/W(re/c_b)`, efforts split in proportion to cost, shares in
/// proportion to effort.
pub fn solve_regulated_cooperative(
    r: f64,
    c1: f64,
    c2: f64,
    branch: Branch,
) -> Result<EquilibriumOutcome> {
    let params = check_two(r, c1, c2)?;
    let cb = branch.cost(c1, c2);
    if r <= cb {
        return Ok(EquilibriumOutcome::degenerate(2));
    }
    let (_, beta, total) = single_cost_core(r, cb)?;
    let sum = c1 + c2;
    let contract = Contract::joint(beta, vec![beta * c1 / sum, beta * c2 / sum])?;
    let efforts = EffortProfile::new(vec![c1 / sum * total, c2 / sum * total])?;
    let residual = leader_residual(beta, r, cb).max(follower_residual(beta, r, cb, total));
    EquilibriumOutcome::evaluate(&params, contract, efforts, residual)
}

/// The branch the CP prefers (higher CP utility; ISP 1 on ties) and its
/// outcome.
pub fn solve_regulated_cooperative_preferred(
    r: f64,
    c1: f64,
    c2: f64,
) -> Result<(Branch, EquilibriumOutcome)> {
    let o1 = solve_regulated_cooperative(r, c1, c2, Branch::Isp1)?;
    let o2 = solve_regulated_cooperative(r, c1, c2, Branch::Isp2)?;
    Ok(if o2.cp_utility > o1.cp_utility {
        (Branch::Isp2, o2)
    } else {
        (Branch::Isp1, o1)
    })
}

/// Outcome of [`solve_fixed_public_effort_coop`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedEffortCoop {
    pub outcome: EquilibriumOutcome,
    /// Total effort of [`solve_public_private`] at the same parameters.
    pub public_private_total: f64,
    /// Both totals agree (to 1e-12 relative).
    pub same_total: bool,
}

/// Cooperation between a public ISP with fixed effort `a1_bar` and a private
/// ISP: `β = 1/W(re/c2)`, `a2 = r/(c2 W) − a1_bar − 1`.
pub fn solve_fixed_public_effort_coop(
    r: f64,
    c1: f64,
    c2: f64,
    a1_bar: f64,
) -> Result<FixedEffortCoop> {
    let params = check_two(r, c1, c2)?;
    non_negative("a1_bar", a1_bar)?;
    let reference = solve_public_private(r, c1, c2)?;
    if r <= c2 {
        return Ok(FixedEffortCoop {
            outcome: EquilibriumOutcome::degenerate(2),
            public_private_total: reference.total_effort,
            same_total: true,
        });
    }
    let (_, beta, total) = single_cost_core(r, c2)?;
    let a2 = total - a1_bar;
    if a2 < 0.0 {
        return Err(Error::InfeasibleEffort {
            what: "a2",
            value: a2,
        });
    }
    let contract = Contract::joint(beta, vec![beta * a1_bar / total, beta * a2 / total])?;
    let efforts = EffortProfile::new(vec![a1_bar, a2])?;
    let residual = leader_residual(beta, r, c2).max(follower_residual(beta, r, c2, total));
    let outcome = EquilibriumOutcome::evaluate(&params, contract, efforts, residual)?;
    let same_total = (outcome.total_effort - reference.total_effort).abs()
        <= 1e-12 * reference.total_effort.max(1.0);
    Ok(FixedEffortCoop {
        outcome,
        public_private_total: reference.total_effort,
        same_total,
    })
}

/// Two CPs with rates `r1`, `r2` sharing two ISPs. The CPs' problems are
/// independent, so each is solved on its own with the regulated split.
pub fn solve_multi_cp(
    r1: f64,
    r2: f64,
    c1: f64,
    c2: f64,
    mode: MultiCpMode,
) -> Result<Vec<EquilibriumOutcome>> {
    positive("r1", r1)?;
    positive("r2", r2)?;
    [r1, r2]
        .into_iter()
        .map(|r| match mode {
            MultiCpMode::Competitive => solve_regulated_competitive(r, c1, c2),
            MultiCpMode::Cooperative(b) => solve_regulated_cooperative(r, c1, c2, b),
        })
        .collect()
}

/// Per-ISP utility of the symmetric competitive game in closed form:
/// `r(1 − (n+1)/(nW)) + c/n`. It does not agree with the model definition
/// at the equilibrium for `n >= 2`; the outcome's `isp_utilities` are the
/// authoritative values.
pub fn symmetric_isp_utility_formula(r: f64, c: f64, n: usize) -> Result<f64> {
    symmetric_params(r, c, n)?;
    let nf = n as f64;
    let w = lambert_w0(r * E / c)?;
    Ok(r * (1.0 - (nf + 1.0) / (nf * w)) + c / nf)
}

/// CP utility `r (W(x) − 1)^2 / W(x)` with `x = re/(c1 + c2 + λ)`, the
/// value the asymmetric KKT case analysis attaches to a case with
/// multiplier `λ` (`λ = 0` is the interior case).
pub fn kkt_case_cp_utility(r: f64, c1: f64, c2: f64, lambda: f64) -> Result<f64> {
    check_two(r, c1, c2)?;
    non_negative("lambda", lambda)?;
    let w = lambert_w0(r * E / (c1 + c2 + lambda))?;
    Ok(r * (w - 1.0).powi(2) / w)
}

/// Dispatch by scenario. Multi-CP scenarios return one outcome per CP; all
/// others return one outcome. The asymmetric competitive scenario is
/// reported at its canonical split.
pub fn solve(params: &MarketParams, scenario: &ScenarioKind) -> Result<Vec<EquilibriumOutcome>> {
    let r = params.r();
    let two = || -> Result<(f64, f64)> {
        if params.n() != 2 {
            return Err(Error::DimensionMismatch {
                what: "costs",
                got: params.n(),
                expected: 2,
            });
        }
        Ok((params.costs()[0], params.costs()[1]))
    };
    let one = |o: EquilibriumOutcome| Ok(vec![o]);
    match *scenario {
        ScenarioKind::PublicPrivate => {
            let (c1, c2) = two()?;
            one(solve_public_private(r, c1, c2)?)
        }
        ScenarioKind::PublicPrivateRegulated { a1_bar } => {
            let (c1, c2) = two()?;
            one(solve_public_private_regulated(r, c1, c2, a1_bar)?)
        }
        ScenarioKind::SymmetricCompetitive { n } => {
            one(solve_symmetric_competitive(r, params.costs()[0], n)?)
        }
        ScenarioKind::SymmetricCooperative { n } => {
            one(solve_symmetric_cooperative(r, params.costs()[0], n)?)
        }
        ScenarioKind::AsymmetricCompetitive | ScenarioKind::RegulatedCompetitive => {
            let (c1, c2) = two()?;
            one(solve_regulated_competitive(r, c1, c2)?)
        }
        ScenarioKind::RegulatedCooperative { branch } => {
            let (c1, c2) = two()?;
            one(solve_regulated_cooperative(r, c1, c2, branch)?)
        }
        ScenarioKind::FixedPublicEffortCooperative { a1_bar } => {
            let (c1, c2) = two()?;
            one(solve_fixed_public_effort_coop(r, c1, c2, a1_bar)?.outcome)
        }
        ScenarioKind::MultiCpCompetitive | ScenarioKind::MultiCpCooperative { .. } => {
            let (c1, c2) = two()?;
            let r2 = params.second_cp_rate().ok_or(Error::InvalidParameter {
                name: "r2",
                value: f64::NAN,
                reason: "multi-CP scenarios need the second CP rate",
            })?;
            let mode = match *scenario {
                ScenarioKind::MultiCpCooperative { branch } => MultiCpMode::Cooperative(branch),
                _ => MultiCpMode::Competitive,
            };
            solve_multi_cp(r, r2, c1, c2, mode)
        }
    }
}
