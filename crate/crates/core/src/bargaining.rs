//! Nash bargaining splits of a joint contract and Shapley values of the
//! two-ISP coalition game.

use std::f64::consts::E;

use serde::Serialize;

use crate::closed_form::{solve_regulated_competitive, Branch};
use crate::error::{non_negative, positive, Error, Result};
use crate::lambertw::lambert_w0;
use crate::model::EffortProfile;
use crate::oracle::shapley_brute;

/// How the two shares of a joint contract are divided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShareSplit {
    pub beta1: f64,
    pub beta2: f64,
}

impl ShareSplit {
    pub fn total(&self) -> f64 {
        self.beta1 + self.beta2
    }
}

/// Outcome of a bargain between the two ISPs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BargainingResult {
    pub efforts: EffortProfile,
    pub share_split: ShareSplit,
    /// `(F1, F2)`: utility above the disagreement point.
    pub surpluses: (f64, f64),
    pub disagreement: (f64, f64),
    pub converged: bool,
    /// Largest distance between the maximizers found from different starts.
    pub multistart_agreement: f64,
    /// Largest finite-difference partial derivative of `log F1 + log F2`.
    pub stationarity: f64,
}

/// Utilities the ISPs fall back to if bargaining fails.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DisagreementPolicy {
    Zero,
    /// The ISP utilities of the regulated competitive equilibrium.
    #[default]
    RegulatedCompetitive,
    Custom { d1: f64, d2: f64 },
}

pub fn disagreement_point(policy: DisagreementPolicy, r: f64, c1: f64, c2: f64) -> Result<(f64, f64)> {
    match policy {
        DisagreementPolicy::Zero => Ok((0.0, 0.0)),
        DisagreementPolicy::Custom { d1, d2 } => {
            if !(d1.is_finite() && d2.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "disagreement",
                    value: if d1.is_finite() { d2 } else { d1 },
                    reason: "must be finite",
                });
            }
            Ok((d1, d2))
        }
        DisagreementPolicy::RegulatedCompetitive => {
            let o = solve_regulated_competitive(r, c1, c2)?;
            if o.degenerate {
                return Err(Error::Degenerate {
                    scenario: "regulated-competitive",
                    condition: format!("r = {r} <= c1 + c2 = {}", c1 + c2),
                });
            }
            Ok((o.isp_utilities[0], o.isp_utilities[1]))
        }
    }
}

/// Result of [`nbs_split_closed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedSplit {
    pub split: ShareSplit,
    pub surpluses: (f64, f64),
    /// The equal-surplus split fell outside `[0, β]` and was clamped.
    pub clamped: bool,
    /// Total surplus is exactly `d1 + d2`: both participation constraints
    /// bind and the split is the reservation split.
    pub both_bind: bool,
}

/// Closed-form Nash bargaining split of a joint share `beta`, with demand
/// `L = log(βr/c_b)`:
/// `β1 = β/2 − (c2 a2 − c1 a1 + d2 − d1) / (2 r L)`.
///
/// When that split leaves `[0, β]` it is clamped to the nearest feasible
/// split, which is where the constrained Nash product peaks.
#[allow(clippy::too_many_arguments)]
pub fn nbs_split_closed(
    beta: f64,
    a1: f64,
    a2: f64,
    d1: f64,
    d2: f64,
    r: f64,
    c1: f64,
    c2: f64,
    branch_cost: f64,
) -> Result<ClosedSplit> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must lie in (0, 1]",
        });
    }
    non_negative("a1", a1)?;
    non_negative("a2", a2)?;
    positive("r", r)?;
    positive("c1", c1)?;
    positive("c2", c2)?;
    positive("branch_cost", branch_cost)?;
    let l = (beta * r / branch_cost).ln();
    if !(l > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "log(beta r / c_b) must be positive",
        });
    }
    let rl = r * l;
    let cost1 = c1 * a1 + d1;
    let cost2 = c2 * a2 + d2;
    let surplus = beta * rl - cost1 - cost2;
    if surplus < 0.0 {
        return Err(Error::InfeasibleBargain {
            reason: format!("total surplus {surplus} is below the disagreement point"),
        });
    }
    // Feasible shares for ISP 1: both surpluses non-negative, both shares
    // within [0, β].
    let lo = (cost1 / rl).max(0.0);
    let hi = (beta - cost2 / rl).min(beta);
    if lo > hi {
        return Err(Error::InfeasibleBargain {
            reason: "no share split in [0, beta] satisfies both participation constraints".into(),
        });
    }
    let interior = beta / 2.0 - (cost2 - cost1) / (2.0 * rl);
    let beta1 = interior.clamp(lo, hi);
    let beta2 = beta - beta1;
    Ok(ClosedSplit {
        split: ShareSplit { beta1, beta2 },
        surpluses: (beta1 * rl - cost1, beta2 * rl - cost2),
        clamped: beta1 != interior,
        both_bind: surplus == 0.0,
    })
}

/// Closed-form and brute-force Shapley values side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapleyReport {
    pub branch: Branch,
    /// Per-branch closed form `(Φ1, Φ2)`.
    pub closed: (f64, f64),
    /// Two-player Shapley formula over the coalition values.
    pub brute: (f64, f64),
    /// `v({1})`, `v({2})`, `v({1,2})`.
    pub coalition_values: (f64, f64, f64),
    pub discrepancy: f64,
    pub matches_brute: bool,
}

/// Tolerance for `matches_brute`.
const SHAPLEY_MATCH_TOL: f64 = 1e-9;

/// Coalition values of the regulated cooperative game.
///
/// A single ISP `i` facing the CP alone earns `r(1 − 2/W(re/c_i)) + c_i`.
/// The grand coalition keeps ISP 1 at its stand-alone effort
/// `a1* = r/(c1 W(re/c1)) − 1` and earns
/// `r(1 − 2/W(re/c2)) + a1*(c2 − c1) + c2`. Returns `(v1, v2, v12)`.
pub fn coalition_values(r: f64, c1: f64, c2: f64) -> Result<(f64, f64, f64)> {
    positive("r", r)?;
    positive("c1", c1)?;
    positive("c2", c2)?;
    let w1 = lambert_w0(r * E / c1)?;
    let w2 = lambert_w0(r * E / c2)?;
    let v1 = r * (1.0 - 2.0 / w1) + c1;
    let v2 = r * (1.0 - 2.0 / w2) + c2;
    let a1_star = r / (c1 * w1) - 1.0;
    let v12 = r * (1.0 - 2.0 / w2) + a1_star * (c2 - c1) + c2;
    Ok((v1, v2, v12))
}

/// Closed-form Shapley values for branch `branch`, compared with the Shapley
/// formula applied to [`coalition_values`]. The brute-force values are the
/// reference.
pub fn shapley_closed(r: f64, c1: f64, c2: f64, branch: Branch) -> Result<ShapleyReport> {
    positive("r", r)?;
    positive("c1", c1)?;
    positive("c2", c2)?;
    if r <= c1.max(c2) {
        return Err(Error::Degenerate {
            scenario: "shapley",
            condition: format!("r = {r} <= max(c1, c2) = {}", c1.max(c2)),
        });
    }
    let w1 = lambert_w0(r * E / c1)?;
    let w2 = lambert_w0(r * E / c2)?;
    let closed = match branch {
        Branch::Isp1 => (
            r / 2.0 * (1.0 - 4.0 / w1 - 2.0 / w2) + c1,
            r / 2.0 * (1.0 - 2.0 / w2) + c2,
        ),
        Branch::Isp2 => (
            r / 2.0 * (1.0 - 2.0 / w1) + c1,
            r / 2.0 * (1.0 - 4.0 / w2 - 2.0 / w1) + c2,
        ),
    };
    let (v1, v2, v12) = coalition_values(r, c1, c2)?;
    let brute = shapley_brute(|s: &[usize]| match s {
        [] => 0.0,
        [0] => v1,
        [1] => v2,
        _ => v12,
    });
    let discrepancy = (closed.0 - brute.0).abs().max((closed.1 - brute.1).abs());
    Ok(ShapleyReport {
        branch,
        closed,
        brute,
        coalition_values: (v1, v2, v12),
        discrepancy,
        matches_brute: discrepancy <= SHAPLEY_MATCH_TOL * v12.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::solve_regulated_cooperative;

    #[test]
    fn disagreement_policies() {
        assert_eq!(disagreement_point(DisagreementPolicy::Zero, 10.0, 0.5, 1.0).unwrap(), (0.0, 0.0));
        let custom = DisagreementPolicy::Custom { d1: 1.5, d2: 2.0 };
        assert_eq!(disagreement_point(custom, 10.0, 0.5, 1.0).unwrap(), (1.5, 2.0));
        let (d1, d2) = disagreement_point(DisagreementPolicy::default(), 10.0, 0.5, 1.0).unwrap();
        let o = solve_regulated_competitive(10.0, 0.5, 1.0).unwrap();
        assert_eq!((d1, d2), (o.isp_utilities[0], o.isp_utilities[1]));
        assert!(matches!(
            disagreement_point(DisagreementPolicy::RegulatedCompetitive, 1.0, 0.5, 1.0),
            Err(Error::Degenerate { .. })
        ));
        let bad = DisagreementPolicy::Custom { d1: f64::NAN, d2: 0.0 };
        assert!(disagreement_point(bad, 10.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn symmetric_split_is_even() {
        let s = nbs_split_closed(0.4, 2.0, 1.0, 0.3, 0.3, 10.0, 0.5, 1.0, 0.5).unwrap();
        assert!((s.split.beta1 - 0.2).abs() < 1e-15 && (s.split.beta2 - 0.2).abs() < 1e-15);
        assert!(!s.clamped);
    }

    #[test]
    fn equal_surplus_and_conservation() {
        let o = solve_regulated_cooperative(10.0, 0.5, 1.0, Branch::Isp1).unwrap();
        let beta = o.contract.joint_share.unwrap();
        let (d1, d2) = disagreement_point(DisagreementPolicy::Zero, 10.0, 0.5, 1.0).unwrap();
        let (a1, a2) = (o.efforts.efforts[0], o.efforts.efforts[1]);
        let s = nbs_split_closed(beta, a1, a2, d1, d2, 10.0, 0.5, 1.0, 0.5).unwrap();
        assert!((s.split.total() - beta).abs() < 1e-15);
        assert!((s.surpluses.0 - s.surpluses.1).abs() < 1e-12);
        assert!(s.surpluses.0 > 0.0);
    }

    #[test]
    fn split_errors_and_clamping() {
        // Disagreement above total surplus.
        assert!(matches!(
            nbs_split_closed(0.4, 1.0, 1.0, 50.0, 50.0, 10.0, 0.5, 1.0, 0.5),
            Err(Error::InfeasibleBargain { .. })
        ));
        assert!(nbs_split_closed(0.0, 1.0, 1.0, 0.0, 0.0, 10.0, 0.5, 1.0, 0.5).is_err());
        assert!(nbs_split_closed(0.04, 1.0, 1.0, 0.0, 0.0, 10.0, 0.5, 1.0, 0.5).is_err());
        // A very negative d2 pushes the equal-surplus split below zero.
        let s = nbs_split_closed(0.4, 1.0, 0.0, 0.0, -100.0, 10.0, 0.5, 1.0, 0.5).unwrap();
        assert!(s.clamped);
        assert!(s.split.beta1 >= 0.0 && s.split.beta2 <= 0.4);
        assert!((s.split.total() - 0.4).abs() < 1e-15);
        // Total surplus exactly at the disagreement point.
        let l = (0.4f64 * 10.0 / 0.5).ln();
        let s = nbs_split_closed(0.4, 0.0, 0.0, 0.4 * 10.0 * l, 0.0, 10.0, 0.5, 1.0, 0.5).unwrap();
        assert!(s.both_bind);
    }

    #[test]
    fn shapley_symmetric_and_efficient() {
        let rep = shapley_closed(10.0, 0.7, 0.7, Branch::Isp1).unwrap();
        assert!((rep.brute.0 - rep.brute.1).abs() < 1e-12);
        let rep = shapley_closed(10.0, 0.5, 1.0, Branch::Isp1).unwrap();
        assert!((rep.brute.0 + rep.brute.1 - rep.coalition_values.2).abs() < 1e-12);
        assert!(rep.discrepancy.is_finite());
        assert!(shapley_closed(1.0, 0.5, 1.0, Branch::Isp2).is_err());
    }
}
