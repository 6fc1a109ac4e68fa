//! Set Cover rounding through a lifted feasibility polytope.
//!
//! The cost bound `Σ c(S) x_S <= q` is added as a row, the polytope is lifted to level `d`
//! (the Sherali-Adams lift, which lies inside the level-`d` Lovász-Schrijver body), the least
//! feasible `q` is found by bisection, and the witness is conditioned `d` times on the support
//! set covering the most uncovered items. Greedy finishes the residual instance.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::convex::{condition, lp_solve, LpProblem, LpStatus, MomentVector, Relation, Sense};
use crate::error::{Error, Result};
use crate::greedy::{greedy_setcover, greedy_setcover_full, GreedyReport};
use crate::instances::SetCoverInstance;
use crate::rational::{self, harmonic, int, lcm_of_denominators, to_f64, Rational};
use crate::sa_certificate::{box_rows, pair_count, sa_lift, BaseRow, LiftedRow};
use crate::subset::{subsets_up_to, Subset};
use crate::tolerance::{DELTA_COND, EPS_FEAS};

/// Cover rows, then the cost row `-Σ c(S) x_S >= -q`. Box rows are added by the lift.
#[derive(Clone, Debug)]
pub struct FeasibilityPolytope {
    pub q: Rational,
    pub rows: Vec<BaseRow>,
    pub m: usize,
    covers: Vec<FixedBitSet>,
}

impl FeasibilityPolytope {
    /// Index of the cost row in `rows`.
    pub fn cost_row(&self) -> usize {
        self.rows.len() - 1
    }

    /// Exact membership of a point, box included.
    pub fn contains(&self, x: &[Rational]) -> bool {
        x.iter().all(|v| !v.is_negative() && *v <= int(1))
            && self.rows.iter().all(|r| row_value(r, x) >= r.rhs)
    }

    /// Largest violation of any row or bound by a float point.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |acc, &v| acc.max(-v).max(v - 1.0));
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|(j, a)| to_f64(a) * x[*j]).sum();
            worst = worst.max(to_f64(&r.rhs) - lhs);
        }
        worst
    }

    /// Largest `Σ |a_i| + |b|` over the rows, the scale of snapping errors.
    pub fn row_weight(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                r.coeffs.iter().map(|(_, a)| to_f64(a).abs()).sum::<f64>() + to_f64(&r.rhs).abs()
            })
            .fold(1.0, f64::max)
    }

    /// Largest coefficient magnitude over the rows.
    pub fn row_scale(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| {
                r.coeffs
                    .iter()
                    .map(|(_, a)| to_f64(a).abs())
                    .chain(std::iter::once(to_f64(&r.rhs).abs()))
            })
            .fold(1.0, f64::max)
    }
}

fn row_value(r: &BaseRow, x: &[Rational]) -> Rational {
    r.coeffs
        .iter()
        .fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j])
}

pub fn build_pq(inst: &SetCoverInstance, q: &Rational) -> Result<FeasibilityPolytope> {
    if q.is_negative() {
        return Err(Error::Invalid(format!(
            "cost bound must be nonnegative, got {q}"
        )));
    }
    let mut rows: Vec<BaseRow> = (0..inst.n())
        .map(|i| BaseRow {
            coeffs: inst
                .sets_containing(i)
                .into_iter()
                .map(|s| (s, int(1)))
                .collect(),
            rhs: int(1),
        })
        .collect();
    rows.push(BaseRow {
        coeffs: (0..inst.m()).map(|s| (s, -inst.cost(s).clone())).collect(),
        rhs: -q.clone(),
    });
    let covers = (0..inst.n())
        .map(|i| {
            let mut b = FixedBitSet::with_capacity(inst.m());
            inst.sets_containing(i)
                .into_iter()
                .for_each(|s| b.insert(s));
            b
        })
        .collect();
    Ok(FeasibilityPolytope {
        q: q.clone(),
        rows,
        m: inst.m(),
        covers,
    })
}

pub const DEFAULT_LP_BUDGET: u64 = 3_000_000;

/// The level-`d` lift of a polytope as a float LP over `y_A`, `1 <= |A| <= d+1`.
#[derive(Clone, Debug)]
pub struct LiftedLp {
    pub level: usize,
    pub m: usize,
    pub problem: LpProblem<f64>,
    /// Subset of each LP column.
    pub columns: Vec<Subset>,
    /// Lifted rows before dropping, and how many were kept.
    pub generated_rows: usize,
}

/// Builds the lifted LP, minimizing cost. `with_cost_row` false drops the cost bound,
/// giving the lifted Set Cover LP itself.
pub fn build_lifted_lp(
    inst: &SetCoverInstance,
    pq: &FeasibilityPolytope,
    d: usize,
    with_cost_row: bool,
) -> Result<LiftedLp> {
    let m = pq.m;
    if d + 1 > m.max(1) + 64 {
        return Err(Error::SizeLimit("level too large".into()));
    }
    let columns: Vec<Subset> = subsets_up_to(m, d + 1).into_iter().skip(1).collect();
    let index: HashMap<Subset, usize> = columns.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let mut base: Vec<BaseRow> = if with_cost_row {
        pq.rows.clone()
    } else {
        pq.rows[..pq.cost_row()].to_vec()
    };
    let covers = pq.covers.len();
    base.extend(box_rows(m));
    let estimate = pair_count(m, d) * base.len() as u64;
    if estimate > DEFAULT_LP_BUDGET {
        return Err(Error::SizeLimit(format!(
            "level-{d} lift over {m} sets has about {estimate} rows"
        )));
    }
    let lifted = sa_lift(m, &base, d, u64::MAX)?;
    let generated_rows = lifted.len();
    let objective = columns
        .iter()
        .map(|s| {
            if s.len() == 1 {
                to_f64(inst.cost(s.iter().next().unwrap()))
            } else {
                0.0
            }
        })
        .collect();
    let mut problem = LpProblem::unit_box(Sense::Minimize, objective);
    let mut seen: HashSet<Vec<(Subset, Rational)>> = HashSet::new();
    for row in lifted {
        if row.base < covers && pq.covers[row.base].ones().any(|s| row.p.contains(s)) {
            // a set of the row lies in P, so the row is a sum of lifted box rows
            continue;
        }
        if let Some(r) = lower_row(&row, &index)? {
            if seen.insert(row.terms.clone()) {
                problem.rows.push(r);
            }
        }
    }
    Ok(LiftedLp {
        level: d,
        m,
        problem,
        columns,
        generated_rows,
    })
}

/// Converts `Σ c y_A >= 0` to an LP row scaled to unit max coefficient, or `None` when it is
/// implied by the unit box.
fn lower_row(
    row: &LiftedRow,
    index: &HashMap<Subset, usize>,
) -> Result<Option<crate::convex::LpRow<f64>>> {
    let mut constant = Rational::zero();
    let mut coeffs = Vec::with_capacity(row.terms.len());
    for (s, c) in &row.terms {
        if s.is_empty() {
            constant += c;
        } else {
            coeffs.push((index[s], to_f64(c)));
        }
    }
    if coeffs.is_empty() {
        return if constant.is_negative() {
            Err(Error::Infeasible(format!(
                "lifted row {} reduces to {} >= 0",
                row.base, constant
            )))
        } else {
            Ok(None)
        };
    }
    let c0 = to_f64(&constant);
    if coeffs.len() == 1 {
        let a = coeffs[0].1;
        // a y >= -c0 with y in [0, 1]
        if (a > 0.0 && c0 >= 0.0) || (a < 0.0 && a + c0 >= 0.0) {
            return Ok(None);
        }
    }
    let scale = coeffs.iter().fold(c0.abs(), |acc, (_, a)| acc.max(a.abs()));
    for c in coeffs.iter_mut() {
        c.1 /= scale;
    }
    Ok(Some(crate::convex::LpRow {
        coeffs,
        relation: Relation::Ge,
        rhs: -c0 / scale,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct Probe {
    #[serde(with = "rational::as_string")]
    pub q: Rational,
    pub feasible: bool,
    pub status: LpStatus,
    pub iterations: usize,
    pub rows: usize,
}

#[derive(Clone, Debug)]
pub struct LevelResult {
    pub feasible: bool,
    pub witness: Option<MomentVector<f64>>,
    pub probe: Probe,
}

fn witness_of(lp: &LiftedLp, x: &[f64]) -> MomentVector<f64> {
    let index: HashMap<Subset, usize> = lp
        .columns
        .iter()
        .enumerate()
        .map(|(k, &s)| (s, k))
        .collect();
    MomentVector::from_fn(lp.m, lp.level + 1, |s| {
        if s.is_empty() {
            1.0
        } else {
            x[index[&s]].clamp(0.0, 1.0)
        }
    })
}

/// Solves the level-`d` lift of `P_q`. Numerical stalls are errors, never "infeasible".
pub fn level_feasible(
    inst: &SetCoverInstance,
    pq: &FeasibilityPolytope,
    d: usize,
) -> Result<LevelResult> {
    if d == 0 {
        return Err(Error::Invalid("level must be at least 1".into()));
    }
    let lp = match build_lifted_lp(inst, pq, d, true) {
        Ok(lp) => lp,
        Err(Error::Infeasible(_)) => {
            let probe = Probe {
                q: pq.q.clone(),
                feasible: false,
                status: LpStatus::Infeasible,
                iterations: 0,
                rows: 0,
            };
            return Ok(LevelResult {
                feasible: false,
                witness: None,
                probe,
            });
        }
        Err(e) => return Err(e),
    };
    let sol = lp_solve(&lp.problem);
    let probe = |feasible| Probe {
        q: pq.q.clone(),
        feasible,
        status: sol.status,
        iterations: sol.iterations,
        rows: lp.problem.rows.len(),
    };
    match sol.status {
        LpStatus::Optimal => Ok(LevelResult {
            feasible: true,
            witness: Some(witness_of(&lp, &sol.x)),
            probe: probe(true),
        }),
        LpStatus::Infeasible => Ok(LevelResult {
            feasible: false,
            witness: None,
            probe: probe(false),
        }),
        s => Err(Error::Numerical(format!(
            "lifted LP at q={} ended {s:?} after {} iterations",
            pq.q, sol.iterations
        ))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    #[serde(with = "rational::as_string")]
    pub q_star: Rational,
    /// Grid step `1/L`, `L` the lcm of the cost denominators.
    #[serde(with = "rational::as_string")]
    pub grid: Rational,
    /// Minimum of the lifted LP without the cost row, a lower bound on `q_star`.
    #[serde(with = "rational::float12")]
    pub lifted_lp_bound: f64,
    #[serde(with = "rational::as_string")]
    pub greedy_bound: Rational,
    pub probes: Vec<Probe>,
    /// The witness is the integral greedy cover rather than an LP solution.
    pub integral_witness: bool,
}

/// Least `q` on the grid `(1/L)Z` whose lift is feasible, with a witness.
///
/// The search interval runs from just below the lifted LP minimum (no point of a
/// lifted `P_q` costs less) to the greedy cost (its integral point lies in every lift).
pub fn binary_search_q(
    inst: &SetCoverInstance,
    d: usize,
) -> Result<(SearchReport, MomentVector<f64>)> {
    if !inst.is_coverable() {
        return Err(Error::Infeasible("the sets do not cover every item".into()));
    }
    let scale = lcm_of_denominators(inst.sets().iter().map(|s| &s.cost));
    let grid = Rational::new(BigInt::from(1), scale.clone());
    let to_q = |k: &BigInt| Rational::new(k.clone(), scale.clone());
    let greedy = greedy_setcover_full(inst)?;
    let hi_cost = greedy.total_cost.clone().min(inst.total_cost());
    let mut hi = (&hi_cost * Rational::from_integer(scale.clone())).to_integer();

    let pq_free = build_pq(inst, &hi_cost)?;
    let free = build_lifted_lp(inst, &pq_free, d, false)?;
    let sol = lp_solve(&free.problem);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!(
            "lifted cover LP ended {:?}",
            sol.status
        )));
    }
    let bound = sol.objective;
    let s = scale.to_f64().unwrap_or(f64::MAX);
    let lo_f = (bound * s - 1e-6 * (1.0 + bound.abs() * s)).ceil() - 1.0;
    let mut lo = BigInt::from(lo_f.max(-1.0) as i64).min(&hi - 1);

    let mut probes = Vec::new();
    let mut witness: Option<(BigInt, MomentVector<f64>)> = None;
    while &hi - &lo > BigInt::from(1) {
        let mid: BigInt = (&lo + &hi) / 2;
        let r = level_feasible(inst, &build_pq(inst, &to_q(&mid))?, d)?;
        probes.push(r.probe);
        if r.feasible {
            hi = mid.clone();
            witness = Some((mid, r.witness.expect("feasible probes carry a witness")));
        } else {
            lo = mid;
        }
    }
    let q_star = to_q(&hi);
    let mut integral_witness = false;
    let witness = match witness {
        Some((k, w)) if k == hi => w,
        _ => {
            let r = level_feasible(inst, &build_pq(inst, &q_star)?, d)?;
            probes.push(r.probe);
            match r.witness {
                Some(w) => w,
                None => {
                    integral_witness = true;
                    MomentVector::integral(
                        inst.m(),
                        d + 1,
                        Subset::from_indices(greedy.chosen.iter().copied()),
                    )
                }
            }
        }
    };
    let report = SearchReport {
        q_star,
        grid,
        lifted_lp_bound: bound,
        greedy_bound: hi_cost,
        probes,
        integral_witness,
    };
    Ok((report, witness))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditioningStep {
    /// Level `i`, counting down from `d`.
    pub level: usize,
    pub set: usize,
    /// `α_i`, items of the chosen set not covered by earlier choices.
    pub alpha: usize,
    /// `x_S` before conditioning.
    #[serde(with = "rational::float12")]
    pub value: f64,
    /// Singleton values after conditioning.
    #[serde(with = "rational::float12::vec")]
    pub x: Vec<f64>,
    #[serde(with = "rational::float12")]
    pub cost: f64,
    /// Largest violation of the rows of `P_q` after conditioning.
    #[serde(with = "rational::float12")]
    pub max_violation: f64,
    /// Violation the tolerance accounting allows at this step.
    #[serde(with = "rational::float12")]
    pub allowed_violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditioningTrace {
    pub d: usize,
    #[serde(with = "rational::float12::vec")]
    pub initial_x: Vec<f64>,
    pub steps: Vec<ConditioningStep>,
    /// Chosen sets `S_d, S_{d-1}, ...`.
    pub chosen: Vec<usize>,
    #[serde(with = "rational::float12::vec")]
    pub final_x: Vec<f64>,
    /// Sets whose value is 1 cover every item; they form the answer.
    pub early_cover: Option<Vec<usize>>,
    /// Support of the final point outside the chosen sets.
    pub residual_sets: Vec<usize>,
    /// Largest `|S \ ∪ chosen|` over `residual_sets`.
    pub max_residual: usize,
    pub alpha_monotone: bool,
    pub alpha_bounded: bool,
    pub residual_bounded: bool,
    pub integral_coordinates: usize,
    pub rows_within_tolerance: bool,
    /// Largest violation of the residual cover rows by the final point.
    #[serde(with = "rational::float12")]
    pub residual_lp_violation: f64,
}

fn integral_cover(x: &MomentVector<f64>, inst: &SetCoverInstance) -> Option<Vec<usize>> {
    let ones: Vec<usize> = (0..inst.m())
        .filter(|&s| x.x(s) >= 1.0 - DELTA_COND)
        .collect();
    inst.is_cover(&ones).then_some(ones)
}

/// Conditions `d` times, each time on the support set with the most uncovered items
/// (lowest index on ties). The support is kept nested: a set that leaves it never returns.
pub fn conditioning_phase(
    inst: &SetCoverInstance,
    pq: &FeasibilityPolytope,
    witness: &MomentVector<f64>,
    d: usize,
) -> Result<ConditioningTrace> {
    if witness.level() < d + 1 || witness.n() != inst.m() {
        return Err(Error::Invalid(format!(
            "witness of level {} over {} sets does not fit level {d}",
            witness.level(),
            witness.n()
        )));
    }
    let n = inst.n();
    let mut x = witness.clone();
    let mut support: Vec<bool> = (0..inst.m()).map(|s| x.x(s) >= DELTA_COND).collect();
    let mut covered = FixedBitSet::with_capacity(n);
    let mut chosen = Vec::new();
    let mut steps = Vec::new();
    let scale = pq.row_scale();
    let weight = pq.row_weight();
    let mut allowed = EPS_FEAS * scale;
    let mut early_cover = integral_cover(&x, inst);
    for level in (1..=d).rev() {
        if early_cover.is_some() {
            break;
        }
        let mut best: Option<(usize, usize)> = None;
        for s in (0..inst.m()).filter(|&s| support[s] && !chosen.contains(&s)) {
            let a = inst.items(s).difference(&covered).count();
            if best.map_or(true, |(_, b)| a > b) {
                best = Some((s, a));
            }
        }
        let Some((set, alpha)) = best else {
            return Err(Error::Numerical(
                "support emptied while items remain uncovered".into(),
            ));
        };
        let value = x.x(set);
        x = condition(&x, set)?;
        allowed = allowed / value.min(1.0) + DELTA_COND * weight;
        for s in 0..inst.m() {
            support[s] &= x.x(s) >= DELTA_COND;
        }
        covered.union_with(inst.items(set));
        chosen.push(set);
        let xs = x.xs();
        steps.push(ConditioningStep {
            level,
            set,
            alpha,
            value,
            cost: (0..inst.m()).map(|s| to_f64(inst.cost(s)) * xs[s]).sum(),
            max_violation: pq.max_violation(&xs),
            allowed_violation: allowed,
            x: xs,
        });
        early_cover = integral_cover(&x, inst);
    }
    let final_x = x.xs();
    let residual_sets: Vec<usize> = (0..inst.m())
        .filter(|&s| support[s] && !chosen.contains(&s))
        .collect();
    let max_residual = residual_sets
        .iter()
        .map(|&s| inst.items(s).difference(&covered).count())
        .max()
        .unwrap_or(0);
    let alphas: Vec<usize> = steps.iter().map(|s| s.alpha).collect();
    let alpha_monotone = alphas.windows(2).all(|w| w[0] >= w[1]);
    let alpha_bounded = steps.iter().all(|s| s.alpha * (d - s.level + 1) <= n);
    let residual_bounded = early_cover.is_some() || max_residual * d <= n;
    let integral_coordinates = final_x
        .iter()
        .filter(|&&v| v <= DELTA_COND || v >= 1.0 - DELTA_COND)
        .count();
    let rows_within_tolerance = steps.iter().all(|s| s.max_violation <= s.allowed_violation);
    let mut residual_lp_violation = 0.0f64;
    for i in (0..n).filter(|&i| !covered.contains(i)) {
        let lhs: f64 = pq.covers[i]
            .ones()
            .filter(|s| !chosen.contains(s))
            .map(|s| final_x[s])
            .sum();
        residual_lp_violation = residual_lp_violation.max(1.0 - lhs);
    }
    Ok(ConditioningTrace {
        d,
        initial_x: witness.xs(),
        steps,
        chosen,
        final_x,
        early_cover,
        residual_sets,
        max_residual,
        alpha_monotone,
        alpha_bounded,
        residual_bounded,
        integral_coordinates,
        rows_within_tolerance,
        residual_lp_violation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LsReport {
    pub d: usize,
    pub search: SearchReport,
    pub trace: ConditioningTrace,
    /// Chosen sets followed by the greedy completion, or the early integral cover.
    pub cover: GreedyReport,
    #[serde(with = "rational::as_string")]
    pub total_cost: Rational,
    #[serde(with = "rational::as_string")]
    pub chosen_cost: Rational,
    #[serde(with = "rational::as_string")]
    pub residual_cost: Rational,
    /// `H_{floor(n/d)}`.
    #[serde(with = "rational::as_string")]
    pub ratio: Rational,
    /// `total_cost <= ratio · q_star`, checked exactly.
    pub certified: bool,
    /// `residual_cost <= ratio · (q_star - chosen_cost)`, checked exactly.
    pub residual_accounting: bool,
}

/// Bisection, conditioning, then greedy on the residual support.
pub fn ls_round(inst: &SetCoverInstance, d: usize) -> Result<LsReport> {
    ls_round_with_witness(inst, d).map(|(r, _)| r)
}

/// [`ls_round`], also returning the lifted solution found at `q_star`.
pub fn ls_round_with_witness(
    inst: &SetCoverInstance,
    d: usize,
) -> Result<(LsReport, MomentVector<f64>)> {
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let (search, witness) = binary_search_q(inst, d)?;
    let pq = build_pq(inst, &search.q_star)?;
    let trace = conditioning_phase(inst, &pq, &witness, d)?;
    let ratio = harmonic(&Rational::new(BigInt::from(inst.n()), BigInt::from(d)));
    let (cover, chosen_cost, residual_cost) = match &trace.early_cover {
        Some(sets) => {
            let cost = inst.cost_of(sets);
            let mut g = greedy_setcover(
                inst,
                &full_items(inst),
                &FixedBitSet::with_capacity(inst.m()),
            )?;
            g.chosen = sets.clone();
            g.total_cost = cost.clone();
            (g, cost, Rational::zero())
        }
        None => {
            let covered = inst.union_of(trace.chosen.iter().copied());
            let mut allowed = FixedBitSet::with_capacity(inst.m());
            trace.residual_sets.iter().for_each(|&s| allowed.insert(s));
            let g = greedy_setcover(inst, &covered, &allowed).map_err(|e| {
                Error::Numerical(format!("residual support cannot finish the cover: {e}"))
            })?;
            let chosen_cost = inst.cost_of(&trace.chosen);
            let residual = g.total_cost.clone();
            let mut all = trace.chosen.clone();
            all.extend(g.chosen.iter().copied());
            let mut g = g;
            g.chosen = all;
            g.total_cost = &chosen_cost + &residual;
            (g, chosen_cost, residual)
        }
    };
    let total_cost = cover.total_cost.clone();
    if !inst.is_cover(&cover.chosen) {
        return Err(Error::Numerical(
            "rounded sets do not cover the universe".into(),
        ));
    }
    let certified = total_cost <= &ratio * &search.q_star;
    let residual_accounting = residual_cost <= &ratio * (&search.q_star - &chosen_cost);
    Ok((
        LsReport {
            d,
            search,
            trace,
            cover,
            total_cost,
            chosen_cost,
            residual_cost,
            ratio,
            certified,
            residual_accounting,
        },
        witness,
    ))
}

fn full_items(inst: &SetCoverInstance) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(inst.n());
    b.insert_range(..);
    b
}
