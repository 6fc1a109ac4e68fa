//! PSD moment lift of the Knapsack LP and the recursive conditioning rounding on top of it.
//!
//! Levels count conditioning depth: the level-`ℓ` lift stores moments `y_A` for
//! `|A| <= ℓ + 1`, so level 0 is the plain LP and a level-`ℓ` solution can be conditioned
//! `ℓ - 1` times while still carrying an order-2 PSD moment matrix.

use fixedbitset::FixedBitSet;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{condition, MomentSdp, MomentVector, SdpStatus};
use crate::error::{Error, Result};
use crate::greedy::{knapsack_modified_greedy, KnapsackGreedyReport};
use crate::instances::KnapsackInstance;
use crate::rational::{self, to_f64, Rational};
use crate::subset::{subsets_up_to, Subset};
use crate::tolerance::{tau_margin, DELTA_COND, DELTA_SLACK, TAU_LIN, TAU_PSD};

pub const MAX_LIFT_ITEMS: usize = 12;
pub const MAX_LIFT_LEVEL: usize = 6;
/// Largest number of free moments the SDP solver is asked to handle.
pub const MAX_LIFT_VARIABLES: usize = 1500;

/// `⌈1/ε³⌉ + ⌈1/ε⌉`, before capping.
pub fn uncapped_level(epsilon: &Rational) -> u64 {
    let inv = epsilon.recip();
    let cube = &inv * &inv * &inv;
    cube.ceil()
        .to_integer()
        .to_u64()
        .unwrap_or(u64::MAX)
        .saturating_add(inv.ceil().to_integer().to_u64().unwrap_or(u64::MAX))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KSRoundConfig {
    #[serde(with = "rational::as_string")]
    pub epsilon: Rational,
    pub level: usize,
    /// True when the requested or default level was lowered to [`MAX_LIFT_LEVEL`].
    pub level_capped: bool,
    #[serde(with = "rational::as_string::opt")]
    pub rho: Option<Rational>,
}

impl KSRoundConfig {
    /// `level = None` picks `min(⌈1/ε³⌉ + ⌈1/ε⌉, MAX_LIFT_LEVEL)`.
    pub fn new(epsilon: Rational, level: Option<usize>) -> Result<Self> {
        if !(epsilon > Rational::zero() && epsilon <= rational::ratio(3, 10)) {
            return Err(Error::Invalid(format!(
                "epsilon must lie in (0, 3/10], got {epsilon}"
            )));
        }
        let want = match level {
            Some(0) => return Err(Error::Invalid("level must be at least 1".into())),
            Some(l) => l as u64,
            None => uncapped_level(&epsilon),
        };
        let level = want.min(MAX_LIFT_LEVEL as u64) as usize;
        Ok(KSRoundConfig {
            epsilon,
            level,
            level_capped: want > level as u64,
            rho: None,
        })
    }

    pub fn with_rho(mut self, rho: Rational) -> Self {
        self.rho = Some(rho);
        self
    }

    fn eps(&self) -> f64 {
        to_f64(&self.epsilon)
    }

    /// `⌈1/ε⌉`.
    pub fn inv_ceil(&self) -> usize {
        self.epsilon
            .recip()
            .ceil()
            .to_integer()
            .to_usize()
            .unwrap_or(usize::MAX)
    }

    /// `⌈1/ε³⌉`.
    pub fn inv_cube_ceil(&self) -> usize {
        let inv = self.epsilon.recip();
        (&inv * &inv * &inv)
            .ceil()
            .to_integer()
            .to_usize()
            .unwrap_or(usize::MAX)
    }
}

/// Builds the level-`ℓ` lift: capacity and box rows multiplied by every `y_I` with `|I| <= ℓ`,
/// and an order-2 PSD block localized at every `I` with `|I| <= ℓ - 1`.
///
/// Moments of over-capacity sets are fixed to zero. Rows are scaled by the capacity and
/// the objective by the largest reward.
pub fn build_knapsack_lift(inst: &KnapsackInstance, level: usize) -> Result<MomentSdp<f64>> {
    let n = inst.n();
    if n > MAX_LIFT_ITEMS || level > MAX_LIFT_LEVEL {
        return Err(Error::SizeLimit(format!(
            "knapsack lift supports n <= {MAX_LIFT_ITEMS} and level <= {MAX_LIFT_LEVEL} (got n = {n}, level = {level})"
        )));
    }
    let cap = inst.capacity().clone();
    let cost_of = |a: Subset| a.iter().fold(Rational::zero(), |s, i| s + inst.cost(i));
    let size = level + 1;
    let sdp = MomentSdp::new(n, size, |a| (cost_of(a) > cap).then_some(0.0));
    let free = subsets_up_to(n, size)
        .into_iter()
        .filter(|&a| sdp.variable(a).is_some())
        .count();
    if free > MAX_LIFT_VARIABLES {
        return Err(Error::SizeLimit(format!(
            "knapsack lift has {free} free moments (limit {MAX_LIFT_VARIABLES})"
        )));
    }
    let mut sdp = sdp;
    let scale = {
        let c = to_f64(&cap);
        if c > 0.0 {
            c
        } else {
            1.0
        }
    };
    let costs: Vec<f64> = (0..n).map(|i| to_f64(inst.cost(i)) / scale).collect();
    let rmax = to_f64(&inst.max_reward());
    let rscale = if rmax > 0.0 { rmax } else { 1.0 };
    sdp.set_objective(
        &(0..n)
            .map(|i| (Subset::singleton(i), to_f64(inst.reward(i)) / rscale))
            .collect::<Vec<_>>(),
    );

    for a in subsets_up_to(n, size).into_iter().skip(1) {
        if sdp.variable(a).is_some() {
            sdp.add_linear(&[(a, 1.0)]);
        }
    }
    for base in subsets_up_to(n, level) {
        if sdp.fixed_value(base) == Some(0.0) {
            continue;
        }
        let room = to_f64(&(&cap - cost_of(base))) / scale;
        let mut row = vec![(base, room)];
        for k in (0..n).filter(|&k| !base.contains(k)) {
            row.push((base.with(k), -costs[k]));
            sdp.add_linear(&[(base, 1.0), (base.with(k), -1.0)]);
        }
        sdp.add_linear(&row);
    }
    if level >= 1 {
        for base in subsets_up_to(n, level - 1) {
            if sdp.fixed_value(base) == Some(0.0) {
                continue;
            }
            let mut labels = vec![Subset::EMPTY];
            labels.extend(
                (0..n)
                    .filter(|&j| !base.contains(j) && sdp.fixed_value(base.with(j)) != Some(0.0))
                    .map(Subset::singleton),
            );
            if labels.len() > 1 {
                sdp.add_moment_block(base, &labels);
            }
        }
    }
    Ok(sdp)
}

#[derive(Clone, Debug, Serialize)]
pub struct KnapsackLiftSolution {
    pub level: usize,
    #[serde(skip)]
    pub y: MomentVector<f64>,
    #[serde(with = "rational::float12")]
    pub objective: f64,
    #[serde(with = "rational::float12::vec")]
    pub x: Vec<f64>,
    #[serde(with = "rational::float12")]
    pub linear_residual: f64,
    #[serde(with = "rational::float12")]
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub free_moments: usize,
}

/// Solves the lift; anything but an optimal solver status is a numerical failure, since
/// the empty knapsack is always feasible.
pub fn solve_knapsack_lift(inst: &KnapsackInstance, level: usize) -> Result<KnapsackLiftSolution> {
    let sdp = build_knapsack_lift(inst, level)?;
    let (y, sol) = sdp.solve()?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Numerical(format!(
            "knapsack lift at level {level} ended with status {:?}",
            sol.status
        )));
    }
    let objective = (0..inst.n()).map(|i| to_f64(inst.reward(i)) * y.x(i)).sum();
    Ok(KnapsackLiftSolution {
        level,
        x: y.xs(),
        y,
        objective,
        linear_residual: sol.linear_residual,
        min_eigenvalue: sol.min_eigenvalue,
        iterations: sol.iterations,
        free_moments: sdp.problem.num_vars,
    })
}

/// Largest violation of the capacity row (in capacity units) and of `0 <= x <= 1`.
pub fn base_row_violation(inst: &KnapsackInstance, x: &[f64]) -> f64 {
    let used: f64 = (0..inst.n()).map(|i| to_f64(inst.cost(i)) * x[i]).sum();
    let cap = to_f64(inst.capacity());
    x.iter()
        .fold(used - cap, |m, &v| m.max(-v).max(v - 1.0))
        .max(0.0)
}

/// Violation allowed after conditioning a solved lift on a variable of value `xi`: the
/// solver residual on the capacity-scaled row, divided by `xi`, plus the snapping band
/// applied to every cost.
pub fn conditioning_budget(inst: &KnapsackInstance, xi: f64) -> f64 {
    let cap = to_f64(inst.capacity()).max(1.0);
    let total: f64 = (0..inst.n()).map(|i| to_f64(inst.cost(i))).sum();
    TAU_LIN * cap / xi + DELTA_COND * total.max(1.0)
}

/// A moment vector together with the index sets the rounding branches on.
#[derive(Clone, Debug)]
pub struct KSMomentState {
    pub y: MomentVector<f64>,
    pub s_rho: Vec<usize>,
    pub s0: Vec<usize>,
    pub s1: Vec<usize>,
    /// Conditioning steps still allowed; never more than the stored level minus 2.
    pub budget: usize,
    /// `Σ r_i x_i`.
    pub objective: f64,
}

impl KSMomentState {
    pub fn new(
        inst: &KnapsackInstance,
        y: MomentVector<f64>,
        rho: &Rational,
        budget: usize,
    ) -> Result<Self> {
        if y.n() != inst.n() {
            return Err(Error::Invalid(format!(
                "moment vector over {} items for {} items",
                y.n(),
                inst.n()
            )));
        }
        if y.level() < 2 && inst.n() > 1 {
            return Err(Error::Invalid(
                "rounding needs pair moments (level >= 2)".into(),
            ));
        }
        let n = inst.n();
        let s_rho = (0..n).filter(|&i| inst.reward(i) > rho).collect();
        let s0 = (0..n).filter(|&i| y.x(i) <= DELTA_COND).collect();
        let s1 = (0..n).filter(|&i| y.x(i) >= 1.0 - DELTA_COND).collect();
        let objective = (0..n).map(|i| to_f64(inst.reward(i)) * y.x(i)).sum();
        let budget = budget.min(y.level().saturating_sub(2));
        Ok(KSMomentState {
            y,
            s_rho,
            s0,
            s1,
            budget,
            objective,
        })
    }

    fn in_s0(&self, i: usize) -> bool {
        self.s0.contains(&i)
    }

    fn in_s1(&self, i: usize) -> bool {
        self.s1.contains(&i)
    }

    /// `Σ_j r_j y_{i,j}`.
    pub fn row_reward(&self, inst: &KnapsackInstance, i: usize) -> f64 {
        (0..inst.n())
            .map(|j| to_f64(inst.reward(j)) * self.y.pair(i, j))
            .sum()
    }

    /// Largest `Σ c_j x_j - C` (in capacity units); nonpositive when the capacity row holds.
    pub fn capacity_excess(&self, inst: &KnapsackInstance) -> f64 {
        let used: f64 = (0..inst.n())
            .map(|i| to_f64(inst.cost(i)) * self.y.x(i))
            .sum();
        used - to_f64(inst.capacity())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Every high-reward item is integral: greedy on all items.
    HighIntegral,
    /// High-reward fractional items carry little objective: greedy without them.
    SmallRewards,
    /// Condition on a high-reward item whose row keeps most of the objective.
    ConditionHigh,
    /// Condition on an item whose row increases the objective.
    ConditionIncrease,
    /// Level budget ran out before a terminal branch: greedy on the current state.
    BudgetFallback,
}

/// Per-state guarantee checks, recorded on every state the rounding visits.
#[derive(Clone, Debug, Serialize)]
pub struct StateChecks {
    /// `Σ_i r_i Σ_j r_j y_{i,j}`.
    #[serde(with = "rational::float12")]
    pub quadratic_form: f64,
    /// `(Σ r_i x_i)² - τ_psd·|r|²`.
    #[serde(with = "rational::float12")]
    pub quadratic_bound: f64,
    pub quadratic_ok: bool,
    /// Largest `x_i` over items outside `S¹` that no longer fit next to `S¹`.
    #[serde(with = "rational::float12")]
    pub max_unfit_x: f64,
    pub unfit_ok: bool,
    /// Largest `|y_{i,j} - x_j|` over `i ∈ S¹`.
    #[serde(with = "rational::float12")]
    pub integral_column_deviation: f64,
    #[serde(with = "rational::float12")]
    pub integral_column_tolerance: f64,
    pub integral_column_ok: bool,
    #[serde(with = "rational::float12")]
    pub capacity_excess: f64,
}

pub fn state_checks(inst: &KnapsackInstance, st: &KSMomentState) -> StateChecks {
    let n = inst.n();
    let r: Vec<f64> = (0..n).map(|i| to_f64(inst.reward(i))).collect();
    let norm_sq: f64 = r.iter().map(|v| v * v).sum();
    let quadratic_form: f64 = (0..n).map(|i| r[i] * st.row_reward(inst, i)).sum();
    let quadratic_bound = st.objective * st.objective - TAU_PSD * norm_sq;
    let s1_cost = st
        .s1
        .iter()
        .fold(Rational::zero(), |s, &i| s + inst.cost(i));
    let room = inst.capacity() - s1_cost;
    let max_unfit_x = (0..n)
        .filter(|&i| !st.in_s1(i) && inst.cost(i) > &room)
        .map(|i| st.y.x(i))
        .fold(0.0, f64::max);
    let mut dev: f64 = 0.0;
    let mut tol: f64 = 0.0;
    for &i in &st.s1 {
        // |y_ij - x_j|² <= (1 - x_i)·x_j for a PSD moment matrix.
        tol = tol.max(((1.0 - st.y.x(i)).max(0.0) + 2.0 * TAU_PSD).sqrt() + TAU_LIN);
        for j in 0..n {
            dev = dev.max((st.y.pair(i, j) - st.y.x(j)).abs());
        }
    }
    StateChecks {
        quadratic_form,
        quadratic_bound,
        quadratic_ok: quadratic_form >= quadratic_bound,
        max_unfit_x,
        unfit_ok: max_unfit_x <= DELTA_SLACK,
        integral_column_deviation: dev,
        integral_column_tolerance: tol,
        integral_column_ok: dev <= tol,
        capacity_excess: st.capacity_excess(inst),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncreaseChoice {
    pub item: Option<usize>,
    /// `Σ_j r_j y_{i,j} - (1+ε³)·x_i·Σ r x` for the chosen item (or the best candidate).
    #[serde(with = "rational::float12")]
    pub margin: f64,
    #[serde(with = "rational::float12")]
    pub tau_margin: f64,
    /// Largest margin among items with `x_i = 1`; these must never qualify.
    #[serde(with = "rational::float12::opt")]
    pub integral_best_margin: Option<f64>,
}

/// Finds the item outside `S_ρ ∪ S⁰ ∪ S¹` whose conditioned objective grows by more than
/// `1 + ε³`, up to `τ_margin`, preferring the largest margin.
pub fn check_increase_exists(
    inst: &KnapsackInstance,
    st: &KSMomentState,
    cfg: &KSRoundConfig,
) -> Result<IncreaseChoice> {
    let n = inst.n();
    let eps3 = cfg.eps().powi(3);
    let norm_sq: f64 = (0..n).map(|i| to_f64(inst.reward(i)).powi(2)).sum();
    let tm = tau_margin(norm_sq);
    let margin = |i: usize| st.row_reward(inst, i) - (1.0 + eps3) * st.y.x(i) * st.objective;
    let integral_best_margin = st.s1.iter().map(|&i| margin(i)).reduce(f64::max);
    if integral_best_margin.is_some_and(|m| m > -tm) {
        return Err(Error::Numerical(format!(
            "an item with x_i = 1 qualifies for the increase step (margin {:e}, τ_margin {tm:e})",
            integral_best_margin.unwrap_or(0.0)
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for i in (0..n).filter(|&i| !st.s_rho.contains(&i) && !st.in_s0(i) && !st.in_s1(i)) {
        let m = margin(i);
        if best.is_none_or(|(_, b)| m > b) {
            best = Some((i, m));
        }
    }
    match best {
        Some((i, m)) if m > -tm => Ok(IncreaseChoice {
            item: Some(i),
            margin: m,
            tau_margin: tm,
            integral_best_margin,
        }),
        _ => {
            let rows: Vec<String> = (0..n)
                .map(|i| {
                    format!(
                        "{i}: x={:.9} row={:.9} margin={:.3e}",
                        st.y.x(i),
                        st.row_reward(inst, i),
                        margin(i)
                    )
                })
                .collect();
            Err(Error::Numerical(format!(
                "no item increases the objective by 1+ε³ within τ_margin {tm:e} (objective {:.9}, S_ρ {:?}, S⁰ {:?}, S¹ {:?}; {})",
                st.objective,
                st.s_rho,
                st.s0,
                st.s1,
                rows.join("; ")
            )))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundStep {
    pub depth: usize,
    pub branch: Branch,
    pub item: Option<usize>,
    /// Slack of the inequality that selected the branch.
    #[serde(with = "rational::float12::opt")]
    pub margin: Option<f64>,
    #[serde(with = "rational::float12")]
    pub objective: f64,
    /// `objective after / objective before` for conditioning branches.
    #[serde(with = "rational::float12::opt")]
    pub factor: Option<f64>,
    /// Lowest factor the branch guarantees, less its tolerance.
    #[serde(with = "rational::float12::opt")]
    pub factor_floor: Option<f64>,
    pub checks: StateChecks,
}

#[derive(Clone, Debug, Serialize)]
pub struct KsRun {
    #[serde(with = "rational::as_string")]
    pub rho: Rational,
    pub s_rho: Vec<usize>,
    pub steps: Vec<RoundStep>,
    pub terminal: Branch,
    pub fallback: bool,
    pub high_count: usize,
    pub increase_count: usize,
    pub high_count_limit: usize,
    pub increase_count_limit: usize,
    #[serde(with = "rational::float12")]
    pub initial_objective: f64,
    #[serde(with = "rational::float12")]
    pub final_objective: f64,
    /// Product of the per-step factors, recomputed from the trace.
    #[serde(with = "rational::float12")]
    pub factor_product: f64,
    /// Every factor meets its floor and the product matches the end-to-end ratio.
    pub ledger_consistent: bool,
    pub checks_ok: bool,
    /// `S_ρ` equals the set of items with reward above `ε·OPT`, when OPT is known.
    pub matches_eps_opt: Option<bool>,
    /// `c` with `reward = (1 - c·ε)·initial_objective`.
    #[serde(with = "rational::float12")]
    pub measured_constant: f64,
    pub result: KnapsackGreedyReport,
}

impl KsRun {
    pub fn increase_count_ok(&self) -> bool {
        self.increase_count < self.increase_count_limit
    }

    pub fn high_count_ok(&self) -> bool {
        self.matches_eps_opt != Some(true) || self.high_count <= self.high_count_limit
    }
}

fn greedy_restricted(
    inst: &KnapsackInstance,
    st: &KSMomentState,
    restrict: impl Fn(usize) -> bool,
) -> Result<KnapsackGreedyReport> {
    let mut bits = FixedBitSet::with_capacity(inst.n());
    (0..inst.n())
        .filter(|&i| restrict(i))
        .for_each(|i| bits.insert(i));
    knapsack_modified_greedy(inst, &st.y.xs(), &bits)
}

/// Runs the rounding from `state` with `cfg.rho`. `opt` (the exact optimum) only labels
/// the run; it never influences a decision.
pub fn ks_round(
    inst: &KnapsackInstance,
    state: KSMomentState,
    cfg: &KSRoundConfig,
    opt: Option<&Rational>,
) -> Result<KsRun> {
    let rho = cfg
        .rho
        .clone()
        .ok_or_else(|| Error::Invalid("ks_round needs a threshold rho".into()))?;
    let n = inst.n();
    let eps = cfg.eps();
    let eps2 = eps * eps;
    let eps3 = eps2 * eps;
    let r: Vec<f64> = (0..n).map(|i| to_f64(inst.reward(i))).collect();
    let norm_sq: f64 = r.iter().map(|v| v * v).sum();
    let r_total: f64 = r.iter().sum();
    let tm = tau_margin(norm_sq);
    let matches_eps_opt = opt.map(|o| {
        let t = &cfg.epsilon * o;
        (0..n).all(|i| (inst.reward(i) > &rho) == (inst.reward(i) > &t))
    });

    let initial_objective = state.objective;
    let s_rho = state.s_rho.clone();
    let mut st = state;
    let mut steps = Vec::new();
    let (mut high_count, mut increase_count) = (0, 0);
    let (terminal, result) = loop {
        let checks = state_checks(inst, &st);
        let depth = steps.len();
        let mut step = RoundStep {
            depth,
            branch: Branch::HighIntegral,
            item: None,
            margin: None,
            objective: st.objective,
            factor: None,
            factor_floor: None,
            checks,
        };
        if st.s_rho.iter().all(|&i| st.in_s0(i) || st.in_s1(i)) {
            steps.push(step);
            break (
                Branch::HighIntegral,
                greedy_restricted(inst, &st, |_| true)?,
            );
        }
        let high_frac: f64 = st
            .s_rho
            .iter()
            .filter(|&&i| !st.in_s1(i))
            .map(|&i| r[i] * st.y.x(i))
            .sum();
        if high_frac < eps * st.objective {
            step.branch = Branch::SmallRewards;
            step.margin = Some(eps * st.objective - high_frac);
            steps.push(step);
            let sr = st.s_rho.clone();
            let s1 = st.s1.clone();
            break (
                Branch::SmallRewards,
                greedy_restricted(inst, &st, |i| !sr.contains(&i) || s1.contains(&i))?,
            );
        }
        let high = st
            .s_rho
            .iter()
            .filter(|&&i| !st.in_s0(i) && !st.in_s1(i))
            .map(|&i| {
                (
                    i,
                    st.row_reward(inst, i) - (1.0 - eps2) * st.y.x(i) * st.objective,
                )
            })
            .filter(|&(_, m)| m >= 0.0)
            .fold(None, |b: Option<(usize, f64)>, c| {
                if b.is_none_or(|b| c.1 > b.1) {
                    Some(c)
                } else {
                    b
                }
            });
        let (branch, item, margin, floor_base) = match high {
            Some((i, m)) => (Branch::ConditionHigh, i, m, 1.0 - eps2),
            None => {
                let c = check_increase_exists(inst, &st, cfg)?;
                (
                    Branch::ConditionIncrease,
                    c.item.unwrap_or(0),
                    c.margin,
                    1.0 + eps3,
                )
            }
        };
        if st.budget == 0 {
            step.branch = Branch::BudgetFallback;
            steps.push(step);
            break (
                Branch::BudgetFallback,
                greedy_restricted(inst, &st, |_| true)?,
            );
        }
        let xi = st.y.x(item);
        let next_y = condition(&st.y, item)?;
        let next = KSMomentState::new(inst, next_y, &rho, st.budget - 1)?;
        let factor = if st.objective > 0.0 {
            next.objective / st.objective
        } else {
            1.0
        };
        let tol = if st.objective > 0.0 {
            (tm / xi + DELTA_COND * r_total) / st.objective
        } else {
            0.0
        };
        step.branch = branch;
        step.item = Some(item);
        step.margin = Some(margin);
        step.factor = Some(factor);
        step.factor_floor = Some(floor_base - tol);
        steps.push(step);
        match branch {
            Branch::ConditionHigh => high_count += 1,
            _ => increase_count += 1,
        }
        st = next;
    };

    let final_objective = st.objective;
    let factor_product: f64 = steps.iter().filter_map(|s| s.factor).product();
    let end_to_end = if initial_objective > 0.0 {
        final_objective / initial_objective
    } else {
        1.0
    };
    let ledger_consistent = steps.iter().all(|s| match (s.factor, s.factor_floor) {
        (Some(f), Some(fl)) => f >= fl,
        _ => true,
    }) && (factor_product - end_to_end).abs()
        <= 1e-9 * end_to_end.abs().max(1.0);
    let checks_ok = steps
        .iter()
        .all(|s| s.checks.quadratic_ok && s.checks.unfit_ok && s.checks.integral_column_ok);
    let measured_constant = if initial_objective > 0.0 {
        (1.0 - to_f64(&result.reward) / initial_objective) / eps
    } else {
        0.0
    };
    Ok(KsRun {
        measured_constant,
        rho,
        s_rho,
        terminal,
        fallback: terminal == Branch::BudgetFallback,
        high_count,
        increase_count,
        high_count_limit: cfg.inv_ceil().saturating_sub(1),
        increase_count_limit: cfg.inv_cube_ceil(),
        initial_objective,
        final_objective,
        factor_product,
        ledger_consistent,
        checks_ok,
        matches_eps_opt,
        result,
        steps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub config: KSRoundConfig,
    pub lift: KnapsackLiftSolution,
    #[serde(with = "rational::as_string::opt")]
    pub opt: Option<Rational>,
    pub runs: Vec<KsRun>,
    pub best: usize,
    #[serde(with = "rational::as_string")]
    pub best_reward: Rational,
    /// Index of the first run whose `S_ρ` matches the items above `ε·OPT`.
    pub matching_run: Option<usize>,
}

impl SweepReport {
    pub fn best_run(&self) -> &KsRun {
        &self.runs[self.best]
    }
}

/// Thresholds tried by the sweep: every reward, then 0.
pub fn rho_candidates(inst: &KnapsackInstance) -> Vec<Rational> {
    let mut v: Vec<Rational> = (0..inst.n()).map(|i| inst.reward(i).clone()).collect();
    v.push(Rational::zero());
    v
}

/// Rounds one solved lift with every threshold in [`rho_candidates`] and keeps the highest
/// reward, ties going to the smaller threshold.
pub fn rho_sweep(
    inst: &KnapsackInstance,
    lift: &KnapsackLiftSolution,
    cfg: &KSRoundConfig,
    opt: Option<&Rational>,
) -> Result<SweepReport> {
    let budget = lift.level.saturating_sub(1);
    let runs = rho_candidates(inst)
        .into_par_iter()
        .map(|rho| {
            let c = cfg.clone().with_rho(rho.clone());
            let st = KSMomentState::new(inst, lift.y.clone(), &rho, budget)?;
            ks_round(inst, st, &c, opt)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        let b = &runs[best];
        if run.result.reward > b.result.reward
            || run.result.reward == b.result.reward && run.rho < b.rho
        {
            best = k;
        }
    }
    let matching_run = runs.iter().position(|r| r.matches_eps_opt == Some(true));
    Ok(SweepReport {
        config: cfg.clone(),
        lift: lift.clone(),
        opt: opt.cloned(),
        best_reward: runs[best].result.reward.clone(),
        best,
        matching_run,
        runs,
    })
}

/// Solves the lift at `cfg.level` and rounds it with `cfg.rho`, or sweeps when unset.
pub fn ks_round_instance(
    inst: &KnapsackInstance,
    cfg: &KSRoundConfig,
    opt: Option<&Rational>,
) -> Result<SweepReport> {
    let lift = solve_knapsack_lift(inst, cfg.level)?;
    match &cfg.rho {
        None => rho_sweep(inst, &lift, cfg, opt),
        Some(rho) => {
            let st = KSMomentState::new(inst, lift.y.clone(), rho, lift.level.saturating_sub(1))?;
            let run = ks_round(inst, st, cfg, opt)?;
            Ok(SweepReport {
                config: cfg.clone(),
                lift,
                opt: opt.cloned(),
                best_reward: run.result.reward.clone(),
                best: 0,
                matching_run: (run.matches_eps_opt == Some(true)).then_some(0),
                runs: vec![run],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::build_moment_matrix;
    use crate::instances::{exact_knapsack_opt, knapsack_lp_opt, parse_knapsack, random_knapsack};
    use crate::rational::{int, ratio};
    use crate::tolerance::delta_obj;

    fn two_items() -> KnapsackInstance {
        parse_knapsack(r#"{"capacity":1,"items":[{"reward":2,"cost":1},{"reward":1,"cost":1}]}"#)
            .unwrap()
    }

    fn cfg() -> KSRoundConfig {
        KSRoundConfig::new(ratio(3, 10), None).unwrap()
    }

    #[test]
    fn default_level_is_capped() {
        assert_eq!(uncapped_level(&ratio(3, 10)), 38 + 4);
        let c = cfg();
        assert_eq!((c.level, c.level_capped), (6, true));
        assert_eq!((c.inv_ceil(), c.inv_cube_ceil()), (4, 38));
        assert!(KSRoundConfig::new(ratio(1, 2), None).is_err());
        assert!(KSRoundConfig::new(ratio(3, 10), Some(0)).is_err());
    }

    #[test]
    fn level_zero_is_the_lp() {
        let inst = random_knapsack(6, 3);
        let s = solve_knapsack_lift(&inst, 0).unwrap();
        let (lp, _) = knapsack_lp_opt(&inst);
        let lp = to_f64(&lp);
        assert!(
            (s.objective - lp).abs() <= delta_obj(lp),
            "{} vs {lp}",
            s.objective
        );
    }

    #[test]
    fn two_item_lift_is_integral() {
        let s = solve_knapsack_lift(&two_items(), 1).unwrap();
        assert!(
            (s.objective - 2.0).abs() <= delta_obj(2.0),
            "{}",
            s.objective
        );
        assert!(s.min_eigenvalue >= -TAU_PSD);
        let m = build_moment_matrix(&s.y).unwrap();
        assert_eq!(m.dim(), 3);
    }

    #[test]
    fn single_item_takes_the_integral_branch() {
        let inst = parse_knapsack(r#"{"capacity":1,"items":[{"reward":5,"cost":1}]}"#).unwrap();
        let c = cfg().with_rho(int(4));
        let lift = solve_knapsack_lift(&inst, 2).unwrap();
        let st = KSMomentState::new(&inst, lift.y.clone(), &int(4), 1).unwrap();
        assert_eq!(st.s1, vec![0]);
        let run = ks_round(&inst, st, &c, None).unwrap();
        assert_eq!(run.terminal, Branch::HighIntegral);
        assert_eq!(run.result.reward, int(5));
    }

    #[test]
    fn integral_moments_round_exactly() {
        let inst = random_knapsack(5, 11);
        let opt = exact_knapsack_opt(&inst).unwrap();
        let point = Subset::from_indices(opt.chosen.ones());
        let y = MomentVector::integral(5, 3, point);
        let st = KSMomentState::new(&inst, y, &Rational::zero(), 2).unwrap();
        let run = ks_round(
            &inst,
            st,
            &cfg().with_rho(Rational::zero()),
            Some(&opt.reward),
        )
        .unwrap();
        assert_eq!(run.terminal, Branch::HighIntegral);
        assert_eq!(run.result.reward, opt.reward);
        assert!(run.checks_ok);
    }

    #[test]
    fn sandwich_and_sweep_on_small_instances() {
        let c = KSRoundConfig::new(ratio(3, 10), Some(3)).unwrap();
        for seed in 0..4 {
            let inst = random_knapsack(5, seed);
            let opt = exact_knapsack_opt(&inst).unwrap().reward;
            let (lp, _) = knapsack_lp_opt(&inst);
            let rep = ks_round_instance(&inst, &c, Some(&opt)).unwrap();
            let sdp = rep.lift.objective;
            assert!(to_f64(&opt) <= sdp + delta_obj(sdp), "seed {seed}");
            assert!(sdp <= to_f64(&lp) + delta_obj(sdp), "seed {seed}");
            assert_eq!(rep.runs.len(), inst.n() + 1);
            let floor = (Rational::from_integer(1.into()) - int(2) * &c.epsilon) * &opt;
            assert!(rep.best_reward >= floor, "seed {seed}");
            for run in &rep.runs {
                assert!(
                    run.checks_ok
                        && run.ledger_consistent
                        && run.increase_count_ok()
                        && run.high_count_ok(),
                    "{run:?}"
                );
            }
            assert!(rep.matching_run.is_some());
        }
    }

    #[test]
    fn conditioned_lift_stays_within_budget() {
        let inst = random_knapsack(6, 21);
        let s = solve_knapsack_lift(&inst, 2).unwrap();
        assert!(base_row_violation(&inst, &s.x) <= TAU_LIN * to_f64(inst.capacity()));
        for i in (0..inst.n()).filter(|&i| s.y.x(i) >= DELTA_COND) {
            let c = condition(&s.y, i).unwrap();
            assert_eq!(c.x(i), 1.0);
            assert!(base_row_violation(&inst, &c.xs()) <= conditioning_budget(&inst, s.y.x(i)));
        }
    }

    #[test]
    fn equal_rewards_give_equal_runs() {
        let inst = parse_knapsack(r#"{"capacity":3,"items":[{"reward":4,"cost":2},{"reward":4,"cost":2},{"reward":4,"cost":2}]}"#).unwrap();
        let rep = ks_round_instance(
            &inst,
            &KSRoundConfig::new(ratio(3, 10), Some(2)).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(rep.runs.len(), 4);
        assert!(rep.runs[..3]
            .iter()
            .all(|r| r.result.reward == rep.runs[0].result.reward));
        assert_eq!(rep.best_reward, int(4));
    }

    fn mixture(n: usize, level: usize, parts: &[(f64, &[usize])]) -> MomentVector<f64> {
        MomentVector::from_fn(n, level, |a| {
            parts
                .iter()
                .filter(|(_, s)| a.is_subset_of(Subset::from_indices(s.iter().copied())))
                .map(|(p, _)| p)
                .sum()
        })
    }

    #[test]
    fn product_moments_take_the_high_branch() {
        let inst = parse_knapsack(
            r#"{"capacity":10,"items":[{"reward":3,"cost":1},{"reward":5,"cost":2},{"reward":2,"cost":3},{"reward":4,"cost":4}]}"#,
        )
        .unwrap();
        let x = [0.3, 0.4, 0.2, 0.5];
        let y = MomentVector::from_fn(4, 3, |a| a.iter().map(|i| x[i]).product());
        let st = KSMomentState::new(&inst, y, &Rational::zero(), 2).unwrap();
        let run = ks_round(&inst, st, &cfg().with_rho(Rational::zero()), None).unwrap();
        assert_eq!(run.steps[0].branch, Branch::ConditionHigh);
        assert!(run.steps[0].margin.unwrap() >= 0.0);
        assert!(run.checks_ok && run.ledger_consistent);
    }

    #[test]
    fn two_scale_mixture_takes_the_increase_branch() {
        // Half {0} (reward 10), half {1, 2} (reward 16): conditioning on item 0 loses too much.
        let inst = parse_knapsack(r#"{"capacity":2,"items":[{"reward":10,"cost":2},{"reward":8,"cost":1},{"reward":8,"cost":1}]}"#).unwrap();
        let y = mixture(3, 3, &[(0.5, &[0]), (0.5, &[1, 2])]);
        let st = KSMomentState::new(&inst, y, &int(8), 2).unwrap();
        assert_eq!(st.s_rho, vec![0]);
        let choice = check_increase_exists(&inst, &st, &cfg()).unwrap();
        assert_eq!(choice.item, Some(1));
        // 8 + 8 per unit of x, against (1 + 0.027)·13.
        assert!((choice.margin - 0.5 * (16.0 - 1.027 * 13.0)).abs() < 1e-12);
        let run = ks_round(&inst, st, &cfg().with_rho(int(8)), None).unwrap();
        let branches: Vec<Branch> = run.steps.iter().map(|s| s.branch).collect();
        assert_eq!(
            branches,
            vec![Branch::ConditionIncrease, Branch::HighIntegral]
        );
        assert_eq!(run.result.reward, int(16));
        assert!((run.factor_product - 16.0 / 13.0).abs() < 1e-12);
        assert!(run.checks_ok && run.ledger_consistent && run.increase_count_ok());
    }

    #[test]
    fn broken_psd_state_has_no_increase_item() {
        // Pair moments zeroed out: rows lose all reward, so nothing can increase it.
        let inst = parse_knapsack(r#"{"capacity":2,"items":[{"reward":3,"cost":1},{"reward":3,"cost":1},{"reward":1,"cost":1}]}"#).unwrap();
        let y = MomentVector::from_fn(3, 2, |a| match a.len() {
            1 => 0.5,
            _ => 0.0,
        });
        let st = KSMomentState::new(&inst, y, &int(2), 1).unwrap();
        assert!(!state_checks(&inst, &st).quadratic_ok);
        let err = check_increase_exists(&inst, &st, &cfg()).unwrap_err();
        assert!(err.is_numerical());
    }
}
