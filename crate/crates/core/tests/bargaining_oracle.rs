use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revshare_core::bargaining::*;
use revshare_core::closed_form::*;
use revshare_core::oracle::*;
use revshare_core::{Branch, DisagreementPolicy};

#[test]
fn symmetric_nbs_reproduces_cooperative_split() {
    let coop = solve_symmetric_cooperative(10.0, 0.5, 2).unwrap();
    let beta = coop.contract.joint_share.unwrap();
    let b = nash_product_maximize(10.0, 0.5, 0.5, beta, 0.0, 0.0, &SearchConfig::default()).unwrap();
    assert!(b.converged);
    for i in 0..2 {
        assert!((b.efforts.efforts[i] - coop.efforts.efforts[i]).abs() < 1e-4);
    }
    assert!(b.multistart_agreement < 1e-6);
    assert!(b.stationarity < 1e-4);
}

#[test]
fn asymmetric_nbs_matches_dense_grid() {
    let (r, c1, c2, beta) = (10.0, 0.5, 1.0, 0.4);
    let b = nash_product_maximize(r, c1, c2, beta, 0.0, 0.0, &SearchConfig::default()).unwrap();
    assert!(b.converged && b.surpluses.0 > 0.0 && b.surpluses.1 > 0.0);
    assert!(b.stationarity < 1e-4);
    let hi = beta * r / c1;
    let step = hi / 200.0;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 1..=200 {
        for j in 1..=200 {
            let (a1, a2) = (i as f64 * step, j as f64 * step);
            let t = a1 + a2;
            let g = beta * r * t.ln_1p() / t;
            let (f1, f2) = (a1 * (g - c1), a2 * (g - c2));
            if f1 > 0.0 && f2 > 0.0 && f1 * f2 > best.0 {
                best = (f1 * f2, a1, a2);
            }
        }
    }
    assert!((b.efforts.efforts[0] - best.1).abs() <= step);
    assert!((b.efforts.efforts[1] - best.2).abs() <= step);
}

#[test]
fn nested_cooperative_symmetric_reduction() {
    let cfg = SearchConfig::default();
    let sol = solve_asymmetric_cooperative(10.0, 0.5, 0.5, DisagreementPolicy::Zero, &cfg).unwrap();
    let coop = solve_symmetric_cooperative(10.0, 0.5, 2).unwrap();
    assert!((sol.outcome.contract.total() - coop.contract.total()).abs() < 1e-4);
    for i in 0..2 {
        assert!((sol.outcome.efforts.efforts[i] - coop.efforts.efforts[i]).abs() < 1e-4);
    }
    assert!(sol.outer_unimodal);
}

#[test]
fn nested_cooperative_beats_competition() {
    let cfg = SearchConfig::default();
    let comp = solve_regulated_competitive(10.0, 0.5, 1.0).unwrap();
    let sol = solve_asymmetric_cooperative(10.0, 0.5, 1.0, DisagreementPolicy::Zero, &cfg).unwrap();
    assert!(sol.outcome.cp_utility >= comp.cp_utility);
    let fixed = solve_asymmetric_cooperative_at(10.0, 0.5, 1.0, 0.3, DisagreementPolicy::Zero, &cfg).unwrap();
    assert_eq!(fixed.outcome.contract.joint_share, Some(0.3));
}

/// Maximizer of the Nash product over ISP 1's share by golden section.
fn numeric_split(beta: f64, rl: f64, k1: f64, k2: f64) -> f64 {
    let lo = (k1 / rl).max(0.0);
    let hi = (beta - k2 / rl).min(beta);
    let (x, _) = golden_section_max(|b1| (b1 * rl - k1) * ((beta - b1) * rl - k2), lo, hi, 1e-14);
    x
}

#[test]
fn closed_split_matches_numeric_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let c1 = rng.random_range(0.1..2.0);
        let c2 = rng.random_range(0.1..2.0);
        let r = (c1 + c2) * rng.random_range(1.5..20.0);
        let branch = if rng.random_bool(0.5) { Branch::Isp1 } else { Branch::Isp2 };
        let o = solve_regulated_cooperative(r, c1, c2, branch).unwrap();
        let beta = o.contract.joint_share.unwrap();
        let (a1, a2) = (o.efforts.efforts[0], o.efforts.efforts[1]);
        let d1 = rng.random_range(0.0..1.0);
        let d2 = rng.random_range(0.0..1.0);
        let cb = branch.cost(c1, c2);
        let Ok(s) = nbs_split_closed(beta, a1, a2, d1, d2, r, c1, c2, cb) else {
            continue;
        };
        let rl = r * (beta * r / cb).ln();
        let x = numeric_split(beta, rl, c1 * a1 + d1, c2 * a2 + d2);
        assert!((s.split.beta1 - x).abs() < 1e-8, "{} vs {x}", s.split.beta1);
        assert!((s.split.total() - beta).abs() < 1e-10);
        if !s.clamped {
            assert!((s.surpluses.0 - s.surpluses.1).abs() < 1e-9);
        }
        assert!(s.surpluses.0 >= -1e-10 && s.surpluses.1 >= -1e-10);
        checked += 1;
    }
}

#[test]
fn competitive_disagreement_exceeds_cooperative_surplus() {
    // With efforts split in proportion to cost the cooperative ISPs earn
    // less in total than under regulated competition.
    let (r, c1, c2) = (10.0, 0.5, 1.0);
    let o = solve_regulated_cooperative(r, c1, c2, Branch::Isp1).unwrap();
    let (d1, d2) = disagreement_point(DisagreementPolicy::RegulatedCompetitive, r, c1, c2).unwrap();
    let beta = o.contract.joint_share.unwrap();
    let (a1, a2) = (o.efforts.efforts[0], o.efforts.efforts[1]);
    let surplus = o.isp_utilities[0] + o.isp_utilities[1];
    assert!(surplus < d1 + d2, "{surplus} vs {}", d1 + d2);
    assert!(matches!(
        nbs_split_closed(beta, a1, a2, d1, d2, r, c1, c2, c1),
        Err(revshare_core::Error::InfeasibleBargain { .. })
    ));
}

#[test]
fn shapley_axioms_on_constructed_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let v1 = rng.random_range(-5.0..5.0);
        let v2 = rng.random_range(-5.0..5.0);
        let v12 = rng.random_range(-5.0..10.0);
        let (p1, p2) = shapley_brute(|s| match s {
            [] => 0.0,
            [0] => v1,
            [1] => v2,
            _ => v12,
        });
        assert!((p1 + p2 - v12).abs() < 1e-12);
        // Symmetric relabeling.
        let (q1, q2) = shapley_brute(|s| match s {
            [] => 0.0,
            [0] => v2,
            [1] => v1,
            _ => v12,
        });
        assert_eq!((p1, p2), (q2, q1));
    }
    // Dummy player: contributes nothing to any coalition.
    let (p1, p2) = shapley_brute(|s| match s {
        [] | [0] => 0.0,
        _ => 2.5,
    });
    assert_eq!((p1, p2), (0.0, 2.5));
}

#[test]
fn shapley_report_values() {
    for branch in [Branch::Isp1, Branch::Isp2] {
        let rep = shapley_closed(10.0, 0.5, 1.0, branch).unwrap();
        let (v1, v2, v12) = rep.coalition_values;
        assert!((rep.brute.0 + rep.brute.1 - v12).abs() < 1e-12);
        assert!((rep.brute.0 - 0.5 * (v1 + v12 - v2)).abs() < 1e-12);
        assert!(rep.discrepancy >= 0.0);
    }
    let rep = shapley_closed(10.0, 0.8, 0.8, Branch::Isp2).unwrap();
    assert!((rep.brute.0 - rep.brute.1).abs() < 1e-12);
}
