//! Brute-force solvers that re-derive equilibria by direct search, without
//! Lambert W or any closed form. Used to check `closed_form` and
//! `bargaining`.

use serde::Serialize;

use crate::bargaining::{disagreement_point, BargainingResult, DisagreementPolicy, ShareSplit};
use crate::error::{positive, Error, Result};
use crate::model::{Contract, EffortProfile, EquilibriumOutcome, MarketParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Points of the coarse scan over the leader's share.
    pub grid_points: usize,
    pub refine_tolerance: f64,
    pub multistart_count: usize,
    pub max_simplex_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_points: 2001,
            refine_tolerance: 1e-10,
            multistart_count: 8,
            max_simplex_iters: 5000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, reason| Err(Error::InvalidParameter { name, value, reason });
        if self.grid_points < 3 {
            return bad("grid_points", self.grid_points as f64, "must be >= 3");
        }
        if !(self.refine_tolerance > 0.0 && self.refine_tolerance.is_finite()) {
            return bad("refine_tolerance", self.refine_tolerance, "must be finite and > 0");
        }
        if self.multistart_count == 0 {
            return bad("multistart_count", 0.0, "must be >= 1");
        }
        if self.max_simplex_iters == 0 {
            return bad("max_simplex_iters", 0.0, "must be >= 1");
        }
        Ok(())
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of `f` on `[lo, hi]`, stopping
/// when the bracket is narrower than `tol`. Returns `(x, f(x))`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let f = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        if x1 >= x2 {
            break;
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Maximizer of a concave function on `[0, hi]` given its derivative:
/// golden section locates it, then bisection on the derivative sign
/// pins it to rounding level.
fn concave_argmax(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, hi: f64, tol: f64) -> f64 {
    if !(hi > 0.0) || df(0.0) <= 0.0 {
        return 0.0;
    }
    let (x, _) = golden_section_max(&f, 0.0, hi, tol);
    let step = (1e-6 * x.max(1.0)).max(tol);
    let mut lo = (x - step).max(0.0);
    let mut up = x + step;
    while df(lo) < 0.0 && lo > 0.0 {
        lo = (lo - 2.0 * (x - lo).max(step)).max(0.0);
    }
    while df(up) > 0.0 {
        up += 2.0 * (up - x).max(step);
    }
    if df(lo) <= 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if mid <= lo || mid >= up {
            break;
        }
        if df(mid) > 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    0.5 * (lo + up)
}

/// Effort maximizing `β r log(others + a + 1) − c a` over `a >= 0`.
pub fn best_response_effort(beta_i: f64, r: f64, c_i: f64, others_total: f64) -> f64 {
    let k = beta_i * r;
    concave_argmax(
        |a| k * (others_total + a + 1.0).ln() - c_i * a,
        |a| k / (others_total + a + 1.0) - c_i,
        k / c_i,
        SearchConfig::default().refine_tolerance,
    )
}

/// Common effort maximizing `β r log(n a + 1) − c a`: the response of `n`
/// identical ISPs that move together.
pub fn symmetric_follower_effort(beta: f64, r: f64, c: f64, n: usize) -> f64 {
    let k = beta * r;
    let nf = n as f64;
    concave_argmax(
        |a| k * (nf * a + 1.0).ln() - c * a,
        |a| k * nf / (nf * a + 1.0) - c,
        k * nf / c,
        SearchConfig::default().refine_tolerance,
    )
}

/// Result of a leader search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeaderSearch {
    pub beta: f64,
    pub value: f64,
    /// Strict local maxima seen on the coarse grid; more than one means the
    /// objective is not unimodal.
    pub grid_local_maxima: usize,
}

/// Maximizer of `objective` over `β ∈ [0, 1]` with the default config.
pub fn leader_optimum(objective: impl Fn(f64) -> f64) -> (f64, f64) {
    let s = leader_search(objective, 0.0, 1.0, &SearchConfig::default());
    (s.beta, s.value)
}

/// Grid scan over `[lo, hi]`, then golden-section refinement on the two
/// cells around the best grid point. Non-finite objective values count as
/// `-inf`.
pub fn leader_search(objective: impl Fn(f64) -> f64, lo: f64, hi: f64, cfg: &SearchConfig) -> LeaderSearch {
    let n = cfg.grid_points.max(3);
    let h = (hi - lo) / (n - 1) as f64;
    let eval = |x: f64| {
        let v = objective(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let values: Vec<f64> = (0..n).map(|k| eval(lo + k as f64 * h)).collect();
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    let grid_local_maxima = (0..n)
        .filter(|&k| {
            let v = values[k];
            v.is_finite()
                && (k == 0 || v > values[k - 1])
                && (k == n - 1 || v > values[k + 1])
        })
        .count();
    if !values[best].is_finite() {
        return LeaderSearch {
            beta: lo + best as f64 * h,
            value: values[best],
            grid_local_maxima,
        };
    }
    let a = lo + best.saturating_sub(1) as f64 * h;
    let b = lo + (best + 1).min(n - 1) as f64 * h;
    let (x, v) = golden_section_max(eval, a, b, cfg.refine_tolerance);
    let (beta, value) = if v >= values[best] {
        (x, v)
    } else {
        (lo + best as f64 * h, values[best])
    };
    LeaderSearch {
        beta,
        value,
        grid_local_maxima,
    }
}

/// Which ISPs invest at the Nash equilibrium of the effort game for
/// shares `(β1, β2)`.
///
/// ISP `i` alone would push `Σa + 1` up to `β_i r / c_i`, so only the ISP
/// with the larger `β_i / c_i` invests unless the ratios tie. The
/// multiplier is the increase `λ` of the investing ISP's cost that would
/// restore the interior ratio: `β1/β2 = (c1 + λ)/c2` when `a2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum KktCase {
    Interior,
    /// `a1 > 0`, `a2 = 0`.
    Boundary1 { lambda: f64 },
    /// `a1 = 0`, `a2 > 0`.
    Boundary2 { lambda: f64 },
}

pub fn kkt_classify(beta1: f64, beta2: f64, c1: f64, c2: f64) -> KktCase {
    if beta2 <= 0.0 {
        return KktCase::Boundary1 { lambda: f64::INFINITY };
    }
    if beta1 <= 0.0 {
        return KktCase::Boundary2 { lambda: f64::INFINITY };
    }
    let lhs = beta1 * c2;
    let rhs = beta2 * c1;
    if (lhs - rhs).abs() <= 1e-12 * lhs.max(rhs) {
        KktCase::Interior
    } else if lhs > rhs {
        KktCase::Boundary1 { lambda: beta1 * c2 / beta2 - c1 }
    } else {
        KktCase::Boundary2 { lambda: beta2 * c1 / beta1 - c2 }
    }
}

/// Nelder–Mead minimization in two dimensions.
fn nelder_mead(f: &dyn Fn([f64; 2]) -> f64, start: [f64; 2], scale: f64, max_iters: usize) -> ([f64; 2], f64, bool) {
    let mut simplex = [
        start,
        [start[0] + scale, start[1]],
        [start[0], start[1] + scale],
    ];
    let mut values = simplex.map(f);
    let mut iters = 0;
    let mut converged = false;
    while iters < max_iters {
        iters += 1;
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = idx.map(|i| simplex[i]);
        values = idx.map(|i| values[i]);

        let size = (1..3)
            .map(|k| (simplex[k][0] - simplex[0][0]).abs().max((simplex[k][1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        let spread = values[2] - values[0];
        if size < 1e-12 || (spread.is_finite() && spread <= 1e-16 * (1.0 + values[0].abs()) && size < 1e-9) {
            converged = true;
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                simplex[2] = xe;
                values[2] = fe;
            } else {
                simplex[2] = xr;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = xr;
            values[2] = fr;
        } else {
            let (xc, fc) = if fr < values[2] {
                let x = along(-0.5);
                (x, f(x))
            } else {
                let x = along(0.5);
                (x, f(x))
            };
            if fc < values[2].min(fr) {
                simplex[2] = xc;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
                    ];
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(0);
    (simplex[best], values[best], converged)
}

/// Radical inverse in base `b`, the `k`-th Halton coordinate.
fn halton(mut k: usize, b: usize) -> f64 {
    let mut f = 1.0;
    let mut x = 0.0;
    while k > 0 {
        f /= b as f64;
        x += f * (k % b) as f64;
        k /= b;
    }
    x
}

/// `(F1, F2)` of the bargaining problem at efforts `(a1, a2)`.
fn surpluses(r: f64, c: [f64; 2], beta: f64, d: [f64; 2], a: [f64; 2]) -> (f64, f64) {
    let total = a[0] + a[1];
    let rev = beta * r * total.ln_1p() / total;
    (rev * a[0] - c[0] * a[0] - d[0], rev * a[1] - c[1] * a[1] - d[1])
}

fn log_nash(r: f64, c: [f64; 2], beta: f64, d: [f64; 2], a: [f64; 2]) -> f64 {
    let (f1, f2) = surpluses(r, c, beta, d, a);
    if f1 > 0.0 && f2 > 0.0 && a[0] > 0.0 && a[1] > 0.0 {
        f1.ln() + f2.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Analytic gradient of `log F1 + log F2` with respect to `(a1, a2)`.
fn log_nash_gradient(r: f64, c: [f64; 2], beta: f64, d: [f64; 2], a: [f64; 2]) -> Option<[f64; 2]> {
    let (f1, f2) = surpluses(r, c, beta, d, a);
    if !(f1 > 0.0 && f2 > 0.0) {
        return None;
    }
    let total = a[0] + a[1];
    let g = beta * r * total.ln_1p() / total;
    let dg = beta * r * (total / (1.0 + total) - total.ln_1p()) / (total * total);
    let grad = |j: usize| {
        let df1 = if j == 0 { g + a[0] * dg - c[0] } else { a[0] * dg };
        let df2 = if j == 1 { g + a[1] * dg - c[1] } else { a[1] * dg };
        df1 / f1 + df2 / f2
    };
    Some([grad(0), grad(1)])
}

/// Newton iteration on the gradient of `log F1 + log F2`, with a
/// finite-difference Jacobian, starting from a simplex result. Steps that
/// leave the feasible region or do not shrink the gradient are halved.
fn polish_nash(r: f64, c: [f64; 2], beta: f64, d: [f64; 2], mut a: [f64; 2]) -> [f64; 2] {
    let norm = |g: [f64; 2]| g[0].abs().max(g[1].abs());
    let Some(mut g) = log_nash_gradient(r, c, beta, d, a) else {
        return a;
    };
    for _ in 0..30 {
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = 1e-6 * a[k];
            let (mut p, mut m) = (a, a);
            p[k] += h;
            m[k] -= h;
            let (Some(gp), Some(gm)) = (
                log_nash_gradient(r, c, beta, d, p),
                log_nash_gradient(r, c, beta, d, m),
            ) else {
                return a;
            };
            for i in 0..2 {
                jac[i][k] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return a;
        }
        let step = [
            (jac[1][1] * g[0] - jac[0][1] * g[1]) / det,
            (jac[0][0] * g[1] - jac[1][0] * g[0]) / det,
        ];
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = [a[0] - t * step[0], a[1] - t * step[1]];
            if cand[0] > 0.0 && cand[1] > 0.0 {
                if let Some(gc) = log_nash_gradient(r, c, beta, d, cand) {
                    if norm(gc) < norm(g) {
                        a = cand;
                        g = gc;
                        improved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    a
}

/// Largest central-difference partial derivative of `log F1 + log F2`.
pub fn nash_stationarity(r: f64, c1: f64, c2: f64, beta: f64, d1: f64, d2: f64, a: [f64; 2]) -> f64 {
    let g = |x: [f64; 2]| log_nash(r, [c1, c2], beta, [d1, d2], x);
    (0..2)
        .map(|k| {
            let h = 1e-6 * a[k].max(1e-3);
            let mut p = a;
            let mut m = a;
            p[k] += h;
            m[k] -= h;
            ((g(p) - g(m)) / (2.0 * h)).abs()
        })
        .fold(0.0, f64::max)
}

/// Tolerance for the multistart maximizers to count as one solution.
const MULTISTART_AGREEMENT: f64 = 1e-6;

/// Nash bargaining between the two ISPs over efforts for a fixed joint
/// share `beta`, with each ISP's share proportional to its effort.
///
/// Maximizes `log F1 + log F2` by Nelder–Mead in log-effort coordinates
/// from `cfg.multistart_count` feasible starts taken from a Halton sequence
/// over `[1e-3, βr/min c]^2` (log scale). Each simplex result is then
/// refined by Newton steps on the analytic gradient.
#[allow(clippy::too_many_arguments)]
pub fn nash_product_maximize(
    r: f64,
    c1: f64,
    c2: f64,
    beta: f64,
    d1: f64,
    d2: f64,
    cfg: &SearchConfig,
) -> Result<BargainingResult> {
    cfg.validate()?;
    positive("r", r)?;
    positive("c1", c1)?;
    positive("c2", c2)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must lie in (0, 1)",
        });
    }
    if !(d1.is_finite() && d2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "disagreement",
            value: if d1.is_finite() { d2 } else { d1 },
            reason: "must be finite",
        });
    }
    let c = [c1, c2];
    let d = [d1, d2];
    let objective = |x: [f64; 2]| -log_nash(r, c, beta, d, [x[0].exp(), x[1].exp()]);

    let lo = 1e-3f64.ln();
    let hi = (beta * r / c1.min(c2)).max(2e-3).ln();
    let starts: Vec<[f64; 2]> = (1..)
        .take(256 * cfg.multistart_count)
        .map(|k| [lo + (hi - lo) * halton(k, 2), lo + (hi - lo) * halton(k, 3)])
        .filter(|&x| objective(x).is_finite())
        .take(cfg.multistart_count)
        .collect();
    if starts.is_empty() {
        return Err(Error::InfeasibleBargain {
            reason: format!("no effort pair gives both ISPs a positive surplus at beta = {beta}"),
        });
    }

    let scale = 0.1 * (hi - lo);
    let mut solutions = Vec::with_capacity(starts.len());
    let mut all_converged = true;
    for s in starts {
        let (x, _, ok1) = nelder_mead(&objective, s, scale, cfg.max_simplex_iters);
        // Restart from the end point with a small simplex to undo any
        // premature collapse.
        let (x, fx, ok2) = nelder_mead(&objective, x, 1e-3, cfg.max_simplex_iters);
        all_converged &= ok1 && ok2;
        solutions.push((x, fx));
    }
    let efforts: Vec<[f64; 2]> = solutions
        .iter()
        .map(|(x, _)| polish_nash(r, c, beta, d, [x[0].exp(), x[1].exp()]))
        .collect();
    let solutions: Vec<([f64; 2], f64)> = efforts
        .iter()
        .map(|&a| (a, -log_nash(r, c, beta, d, a)))
        .collect();
    let mut agreement: f64 = 0.0;
    for i in 0..efforts.len() {
        for j in i + 1..efforts.len() {
            let dist = (efforts[i][0] - efforts[j][0])
                .abs()
                .max((efforts[i][1] - efforts[j][1]).abs());
            agreement = agreement.max(dist);
        }
    }
    let best = (0..solutions.len())
        .min_by(|&i, &j| solutions[i].1.total_cmp(&solutions[j].1))
        .unwrap_or(0);
    let a = efforts[best];
    let (f1, f2) = surpluses(r, c, beta, d, a);
    let total = a[0] + a[1];
    Ok(BargainingResult {
        efforts: EffortProfile::new(a.to_vec())?,
        share_split: ShareSplit {
            beta1: beta * a[0] / total,
            beta2: beta * a[1] / total,
        },
        surpluses: (f1, f2),
        disagreement: (d1, d2),
        converged: all_converged && agreement <= MULTISTART_AGREEMENT,
        multistart_agreement: agreement,
        stationarity: nash_stationarity(r, c1, c2, beta, d1, d2, a),
    })
}

/// The nested cooperative equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooperativeSolution {
    pub outcome: EquilibriumOutcome,
    pub bargain: BargainingResult,
    /// The CP objective had a single local maximum on the scan grid.
    pub outer_unimodal: bool,
}

/// Asymmetric cooperative equilibrium: the CP picks the joint share `β`
/// anticipating that the ISPs split effort by Nash bargaining.
pub fn solve_asymmetric_cooperative(
    r: f64,
    c1: f64,
    c2: f64,
    disagreement: DisagreementPolicy,
    cfg: &SearchConfig,
) -> Result<CooperativeSolution> {
    cfg.validate()?;
    let (d1, d2) = disagreement_point(disagreement, r, c1, c2)?;
    let cp_value = |beta: f64| -> f64 {
        if !(beta > 0.0 && beta < 1.0) {
            return f64::NEG_INFINITY;
        }
        match nash_product_maximize(r, c1, c2, beta, d1, d2, cfg) {
            Ok(b) => (1.0 - beta) * r * b.efforts.total().ln_1p(),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let search = leader_search(cp_value, 0.0, 1.0, cfg);
    if !search.value.is_finite() {
        return Err(Error::InfeasibleBargain {
            reason: "no joint share admits a bargain both ISPs accept".into(),
        });
    }
    let mut sol = solve_asymmetric_cooperative_at(r, c1, c2, search.beta, disagreement, cfg)?;
    sol.outer_unimodal = search.grid_local_maxima <= 1;
    Ok(sol)
}

/// [`solve_asymmetric_cooperative`] with the joint share fixed at `beta`.
pub fn solve_asymmetric_cooperative_at(
    r: f64,
    c1: f64,
    c2: f64,
    beta: f64,
    disagreement: DisagreementPolicy,
    cfg: &SearchConfig,
) -> Result<CooperativeSolution> {
    let (d1, d2) = disagreement_point(disagreement, r, c1, c2)?;
    let bargain = nash_product_maximize(r, c1, c2, beta, d1, d2, cfg)?;
    let params = MarketParams::new(r, vec![c1, c2])?;
    let contract = Contract::joint(beta, vec![bargain.share_split.beta1, bargain.share_split.beta2])?;
    let outcome = EquilibriumOutcome::evaluate(&params, contract, bargain.efforts.clone(), bargain.stationarity)?;
    Ok(CooperativeSolution {
        outcome,
        bargain,
        outer_unimodal: true,
    })
}

/// Two-player Shapley values `Φ1 = ½[v({1}) − v(∅) + v({1,2}) − v({2})]`
/// and symmetrically for `Φ2`. Coalitions are slices of zero-based ISP
/// indices in increasing order.
pub fn shapley_brute(coalition_value: impl Fn(&[usize]) -> f64) -> (f64, f64) {
    let v0 = coalition_value(&[]);
    let v1 = coalition_value(&[0]);
    let v2 = coalition_value(&[1]);
    let v12 = coalition_value(&[0, 1]);
    (
        0.5 * ((v1 - v0) + (v12 - v2)),
        0.5 * ((v2 - v0) + (v12 - v1)),
    )
}
