//! `revshare verify`: every closed form against an independent numerical
//! solve, each under the follower model its scenario assumes.

use std::f64::consts::E;

use revshare_core::bargaining::{coalition_values, nbs_split_closed, shapley_closed};
use revshare_core::closed_form::*;
use revshare_core::compare::{compare_coop_comp_with, compare_public_private, n_scaling_report, CoopCompOptions};
use revshare_core::oracle::*;
use revshare_core::{lambert_w0, Branch, DisagreementPolicy, EquilibriumOutcome, Result};

use crate::args::Settings;
use crate::format::fmt_g;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// A documented property of the model rather than a defect.
    Finding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub status: Status,
    pub name: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub lines: Vec<CheckLine>,
}

impl VerifyReport {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            status: if ok { Status::Pass } else { Status::Fail },
            name: name.into(),
            detail: detail.into(),
        });
    }

    fn finding(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            status: Status::Finding,
            name: name.into(),
            detail: detail.into(),
        });
    }

    /// Records a solver error as a failed check.
    fn attempt(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.check(name, false, format!("error: {e}"));
        }
    }

    pub fn failures(&self) -> Vec<String> {
        self.lines
            .iter()
            .filter(|l| l.status == Status::Fail)
            .map(|l| format!("{}: {}", l.name, l.detail))
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let tag = match l.status {
                Status::Pass => "PASS   ",
                Status::Fail => "FAIL   ",
                Status::Finding => "FINDING",
            };
            out.push_str(&format!("{tag} {}: {}\n", l.name, l.detail));
        }
        let passed = self.lines.iter().filter(|l| l.status == Status::Pass).count();
        let failed = self.lines.iter().filter(|l| l.status == Status::Fail).count();
        let findings = self.lines.len() - passed - failed;
        out.push_str(&format!("{passed} passed, {failed} failed, {findings} findings\n"));
        out
    }
}

fn g(x: f64) -> String {
    fmt_g(x, 4)
}

fn single_cost_leader(r: f64, k: f64) -> (f64, f64) {
    leader_optimum(|b| (1.0 - b) * r * best_response_effort(b, r, k, 0.0).ln_1p())
}

/// Runs the suite at `s.r`, `s.c1()`, `s.c2()`, with symmetric games up to
/// `s.n` ISPs (at cost `c1`).
pub fn run_suite(s: &Settings) -> VerifyReport {
    let (r, c1, c2) = (s.r, s.c1(), s.c2());
    let n_max = s.n.unwrap_or(5).max(2);
    let mut rep = VerifyReport::default();
    let mut outcomes: Vec<(String, EquilibriumOutcome)> = Vec::new();

    rep.attempt("lambert-w0", |rep| {
        let mut worst: f64 = 0.0;
        for x in [-1.0 / E + 1e-9, -0.2, 0.0, 0.5, 1.0, E, 10.0, 1e3, 1e8] {
            let w = lambert_w0(x)?;
            worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0));
        }
        rep.check("lambert-w0", worst < 1e-12, format!("max |w e^w - x| / max(|x|,1) = {}", g(worst)));
        Ok(())
    });

    rep.attempt("public-private", |rep| {
        let o = solve_public_private(r, c1, c2)?;
        let (beta, _) = single_cost_leader(r, c2);
        let db = (o.contract.shares[1] - beta).abs();
        let da = (o.efforts.efforts[1] - best_response_effort(o.contract.shares[1], r, c2, 0.0)).abs();
        rep.check(
            "public-private",
            db < 1e-6 && da < 1e-8,
            format!("|beta2 - leader| = {}, |a2 - best response| = {}", g(db), g(da)),
        );
        outcomes.push(("public-private".into(), o));
        Ok(())
    });

    rep.attempt("public-private-regulated", |rep| {
        let a1_bar = 0.5 * solve_public_private(r, c1, c2)?.total_effort;
        let o = solve_public_private_regulated(r, c1, c2, a1_bar)?;
        let da = (o.efforts.efforts[1] - best_response_effort(o.contract.shares[1], r, c2, a1_bar)).abs();
        let du = o.isp_utilities[0].abs();
        rep.check(
            "public-private-regulated",
            da < 1e-8 && du < 1e-9 * r,
            format!("a1_bar = {}, |a2 - best response| = {}, public ISP utility = {}", g(a1_bar), g(da), g(du)),
        );
        outcomes.push(("public-private-regulated".into(), o));
        Ok(())
    });

    for n in 1..=n_max {
        let name = format!("symmetric-competitive n={n}");
        rep.attempt(&name.clone(), |rep| {
            let nf = n as f64;
            let o = solve_symmetric_competitive(r, c1, n)?;
            let (beta, _) = leader_optimum(|b| {
                (1.0 - nf * b) * r * (nf * symmetric_follower_effort(b, r, c1, n)).ln_1p()
            });
            let db = (o.contract.shares[0] - beta).abs();
            let da = (o.efforts.efforts[0] - symmetric_follower_effort(o.contract.shares[0], r, c1, n)).abs();
            rep.check(
                &name,
                db < 1e-6 && da < 1e-8,
                format!("symmetric follower: |beta - leader| = {}, |a - response| = {}", g(db), g(da)),
            );
            if n >= 2 {
                let others = (nf - 1.0) * o.efforts.efforts[0];
                let br = best_response_effort(o.contract.shares[0], r, c1, others);
                rep.finding(
                    format!("symmetric-competitive n={n} unilateral"),
                    format!(
                        "a lone ISP's best response to the others' effort is {} against a = {}; \
                         the closed form assumes ISPs move together",
                        g(br),
                        g(o.efforts.efforts[0])
                    ),
                );
            }
            outcomes.push((name.clone(), o));
            Ok(())
        });
    }

    for n in [1, n_max] {
        let name = format!("symmetric-cooperative n={n}");
        rep.attempt(&name.clone(), |rep| {
            let o = solve_symmetric_cooperative(r, c1, n)?;
            let (beta, _) = single_cost_leader(r, c1);
            let db = (o.contract.joint_share.unwrap_or(f64::NAN) - beta).abs();
            rep.check(&name, db < 1e-6, format!("|beta - leader| = {}", g(db)));
            outcomes.push((name.clone(), o));
            Ok(())
        });
    }

    rep.attempt("asymmetric-competitive", |rep| {
        let eq = solve_asymmetric_competitive(r, c1, c2)?;
        let o = eq.outcome()?;
        let sum = c1 + c2;
        let (b, _) = leader_optimum(|b| (1.0 - b) * r * best_response_effort(b * c1 / sum, r, c1, 0.0).ln_1p());
        let db = (eq.shares.total() - b).abs();
        let mut dbr: f64 = 0.0;
        let mut spread = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..=10 {
            let ok = eq.with_split(k as f64 / 10.0)?.outcome()?;
            let (a, sh) = (&ok.efforts.efforts, &ok.contract.shares);
            dbr = dbr
                .max((best_response_effort(sh[0], r, c1, a[1]) - a[0]).abs())
                .max((best_response_effort(sh[1], r, c2, a[0]) - a[1]).abs());
            spread = (spread.0.min(ok.cp_utility), spread.1.max(ok.cp_utility));
        }
        let flat = spread.1 - spread.0;
        rep.check(
            "asymmetric-competitive",
            db < 1e-6 && dbr < 1e-8 && flat < 1e-12 * r,
            format!(
                "interior ray: |B - leader| = {}; every split: |a - best response| <= {}, CP utility spread {}",
                g(db),
                g(dbr),
                g(flat)
            ),
        );
        let (_, only_cheap) = single_cost_leader(r, c1.min(c2));
        if only_cheap > o.cp_utility {
            rep.finding(
                "asymmetric-competitive off-ray",
                format!(
                    "contracting only the cheaper ISP earns the CP {} against {} on the interior ray",
                    g(only_cheap),
                    g(o.cp_utility)
                ),
            );
        }
        outcomes.push(("asymmetric-competitive".into(), o));
        Ok(())
    });

    rep.attempt("regulated-competitive", |rep| {
        let o = solve_regulated_competitive(r, c1, c2)?;
        let (a, sh) = (&o.efforts.efforts, &o.contract.shares);
        let dbr = (best_response_effort(sh[0], r, c1, a[1]) - a[0])
            .abs()
            .max((best_response_effort(sh[1], r, c2, a[0]) - a[1]).abs());
        rep.check("regulated-competitive", dbr < 1e-8, format!("|a - best response| = {}", g(dbr)));
        outcomes.push(("regulated-competitive".into(), o));
        Ok(())
    });

    for branch in [Branch::Isp1, Branch::Isp2] {
        let name = format!("regulated-cooperative {}", branch.name());
        rep.attempt(&name.clone(), |rep| {
            let o = solve_regulated_cooperative(r, c1, c2, branch)?;
            let cb = branch.cost(c1, c2);
            let (beta, _) = single_cost_leader(r, cb);
            let db = (o.contract.joint_share.unwrap_or(f64::NAN) - beta).abs();
            let dt = (o.total_effort - best_response_effort(beta, r, cb, 0.0)).abs();
            rep.check(&name, db < 1e-6 && dt < 1e-5, format!("|beta - leader| = {}, |total - response| = {}", g(db), g(dt)));
            outcomes.push((name.clone(), o));
            Ok(())
        });
    }

    rep.attempt("fixed-public-effort-coop", |rep| {
        let a1_bar = 0.5 * solve_public_private(r, c1, c2)?.total_effort;
        let f = solve_fixed_public_effort_coop(r, c1, c2, a1_bar)?;
        let d = (f.outcome.total_effort - f.public_private_total).abs();
        rep.check(
            "fixed-public-effort-coop",
            f.same_total,
            format!("total effort matches public-private to {}", g(d)),
        );
        outcomes.push(("fixed-public-effort-coop".into(), f.outcome));
        Ok(())
    });

    rep.attempt("multi-cp", |rep| {
        let r2 = s.r2.unwrap_or(0.5 * r + c1 + c2);
        let mut worst: f64 = 0.0;
        for mode in [MultiCpMode::Competitive, MultiCpMode::Cooperative(Branch::Isp1)] {
            let outs = solve_multi_cp(r, r2, c1, c2, mode)?;
            for (o, rate) in outs.iter().zip([r, r2]) {
                let alone = match mode {
                    MultiCpMode::Competitive => solve_regulated_competitive(rate, c1, c2)?,
                    MultiCpMode::Cooperative(b) => solve_regulated_cooperative(rate, c1, c2, b)?,
                };
                worst = worst.max((o.cp_utility - alone.cp_utility).abs());
            }
        }
        rep.check("multi-cp", worst < 1e-12 * r, format!("per-CP outcome equals the single-CP solve to {}", g(worst)));
        Ok(())
    });

    let worst_foc = outcomes
        .iter()
        .filter(|(_, o)| !o.degenerate)
        .map(|(_, o)| o.foc_residual)
        .fold(0.0, f64::max);
    rep.check(
        "first-order residuals",
        worst_foc < 1e-9,
        format!("max over {} outcomes = {}", outcomes.len(), g(worst_foc)),
    );

    rep.attempt("n-scaling", |rep| {
        let ns: Vec<usize> = (1..=n_max.max(3)).collect();
        let sc = n_scaling_report(r, c1, &ns)?;
        rep.check(
            "n-scaling",
            sc.all_hold() && sc.is_consistent(),
            format!("{} orderings over n = 1..{}", sc.orderings.len(), ns.len()),
        );
        Ok(())
    });

    rep.attempt("compare-public-private", |rep| {
        let cmp = compare_public_private(r, c1, c2)?;
        rep.check(
            "compare-public-private",
            cmp.all_hold() && cmp.is_consistent(),
            format!("{} orderings", cmp.orderings.len()),
        );
        Ok(())
    });

    rep.attempt("compare-coop-comp", |rep| {
        let opts = CoopCompOptions {
            disagreement: DisagreementPolicy::Zero,
            include_bargaining: false,
            ..Default::default()
        };
        let mut count = 0;
        let mut ok = true;
        for (a, b) in [(c1, c2), (c1, c1)] {
            let cmp = compare_coop_comp_with(r.max(2.0 * a * 1.01), a, b, &opts)?;
            ok &= cmp.all_hold() && cmp.is_consistent();
            count += cmp.orderings.len();
        }
        rep.check("compare-coop-comp", ok, format!("{count} orderings, including the equal-cost coincidence"));
        Ok(())
    });

    rep.attempt("nbs symmetric", |rep| {
        let coop = solve_regulated_cooperative(r, c1, c1, Branch::Isp1)?;
        let beta = coop.contract.joint_share.unwrap_or(f64::NAN);
        let b = nash_product_maximize(r, c1, c1, beta, 0.0, 0.0, &SearchConfig::default())?;
        let da = (b.efforts.efforts[0] - coop.efforts.efforts[0])
            .abs()
            .max((b.efforts.efforts[1] - coop.efforts.efforts[1]).abs());
        let ds = (b.share_split.beta1 - b.share_split.beta2).abs();
        rep.check(
            "nbs symmetric",
            b.converged && da < 1e-4 && ds < 1e-6,
            format!("|a - cooperative| = {}, |beta1 - beta2| = {}, multistart spread {}", g(da), g(ds), g(b.multistart_agreement)),
        );
        Ok(())
    });

    rep.attempt("nbs closed split", |rep| {
        let coop = solve_regulated_cooperative(r, c1, c2, Branch::Isp1)?;
        let beta = coop.contract.joint_share.unwrap_or(f64::NAN);
        let a = &coop.efforts.efforts;
        let closed = nbs_split_closed(beta, a[0], a[1], 0.0, 0.0, r, c1, c2, c1)?;
        let rl = r * (beta * r / c1).ln();
        let product = |b1: f64| {
            let (f1, f2) = (b1 * rl - c1 * a[0], (beta - b1) * rl - c2 * a[1]);
            if f1 > 0.0 && f2 > 0.0 {
                f1 * f2
            } else {
                f64::NEG_INFINITY
            }
        };
        let (b1, _) = golden_section_max(product, 0.0, beta, 1e-13);
        let d = (b1 - closed.split.beta1).abs();
        rep.check("nbs closed split", d < 1e-6, format!("|beta1 - numeric argmax| = {}", g(d)));
        Ok(())
    });

    rep.attempt("shapley", |rep| {
        let (v1, v2, v12) = coalition_values(r, c1, c2)?;
        let sh = shapley_closed(r, c1, c2, Branch::Isp1)?;
        let eff = (sh.brute.0 + sh.brute.1 - v12).abs();
        let sym = shapley_brute(|c: &[usize]| match c {
            [] => 0.0,
            [_] => v1.min(v2),
            _ => v12,
        });
        let dsym = (sym.0 - sym.1).abs();
        rep.check(
            "shapley",
            eff < 1e-9 * v12.abs().max(1.0) && dsym < 1e-12 * v12.abs().max(1.0),
            format!("efficiency gap {}, symmetry gap {}", g(eff), g(dsym)),
        );
        for branch in [Branch::Isp1, Branch::Isp2] {
            let sh = shapley_closed(r, c1, c2, branch)?;
            if !sh.matches_brute {
                rep.finding(
                    format!("shapley {} closed form", branch.name()),
                    format!("differs from the coalition Shapley values by {}", g(sh.discrepancy)),
                );
            }
        }
        Ok(())
    });

    rep
}
