//! Weighted greedy Set Cover, the greedy ordering, and Knapsack greedy variants.

use fixedbitset::FixedBitSet;
use num_traits::Zero;
use serde::Serialize;

use crate::convex::{lp_solve, LpProblem, LpStatus, Relation, Sense};
use crate::error::{Error, Result};
use crate::instances::{KnapsackInstance, SetCoverInstance};
use crate::rational::{self, harmonic_int, to_f64, Rational};
use crate::tolerance::DELTA_COND;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedyStep {
    pub set: usize,
    #[serde(with = "rational::as_string")]
    pub density: Rational,
    pub newly_covered: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedyReport {
    /// Set indices in the order they were added, including any pre-chosen ones.
    pub chosen: Vec<usize>,
    #[serde(with = "rational::as_string")]
    pub total_cost: Rational,
    pub steps: Vec<GreedyStep>,
    /// Largest residual set size at the start.
    pub b: usize,
    /// `H_b`, the factor the run certifies against the restricted LP.
    #[serde(with = "rational::as_string")]
    pub residual_bound: Rational,
}

pub fn all_sets(inst: &SetCoverInstance) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(inst.m());
    b.insert_range(..);
    b
}

pub fn no_items(inst: &SetCoverInstance) -> FixedBitSet {
    FixedBitSet::with_capacity(inst.n())
}

fn uncovered_in(inst: &SetCoverInstance, s: usize, covered: &FixedBitSet) -> usize {
    inst.items(s).difference(covered).count()
}

/// Greedy by minimum density `c(S) / |S \ covered|`, ties to the lowest index.
pub fn greedy_setcover(
    inst: &SetCoverInstance,
    pre_covered: &FixedBitSet,
    restricted_to: &FixedBitSet,
) -> Result<GreedyReport> {
    let mut covered = pre_covered.clone();
    covered.grow(inst.n());
    let mut reach = covered.clone();
    for s in restricted_to.ones() {
        reach.union_with(inst.items(s));
    }
    if reach.count_ones(..) < inst.n() {
        return Err(Error::Infeasible(
            "restricted sets cannot cover the residual universe".into(),
        ));
    }
    let b = restricted_to
        .ones()
        .map(|s| uncovered_in(inst, s, &covered))
        .max()
        .unwrap_or(0);
    let mut report = GreedyReport {
        chosen: Vec::new(),
        total_cost: Rational::zero(),
        steps: Vec::new(),
        b,
        residual_bound: harmonic_int(b as u64),
    };
    while covered.count_ones(..) < inst.n() {
        let mut best: Option<(usize, usize)> = None;
        for s in restricted_to.ones() {
            let k = uncovered_in(inst, s, &covered);
            if k == 0 {
                continue;
            }
            let better = match best {
                None => true,
                // c_s / k < c_t / kt  <=>  c_s * kt < c_t * k
                Some((t, kt)) => {
                    inst.cost(s) * Rational::from_integer(kt.into())
                        < inst.cost(t) * Rational::from_integer(k.into())
                }
            };
            if better {
                best = Some((s, k));
            }
        }
        let (s, k) = best.expect("reachability was checked");
        covered.union_with(inst.items(s));
        report.total_cost += inst.cost(s);
        report.chosen.push(s);
        report.steps.push(GreedyStep {
            set: s,
            density: inst.cost(s) / Rational::from_integer(k.into()),
            newly_covered: k,
        });
    }
    Ok(report)
}

/// Plain greedy over all sets with nothing pre-covered.
pub fn greedy_setcover_full(inst: &SetCoverInstance) -> Result<GreedyReport> {
    greedy_setcover(inst, &no_items(inst), &all_sets(inst))
}

/// Optimum of the standard Set Cover LP: minimize `Σ c(S) x_S` with every item covered once.
pub fn setcover_lp_value(inst: &SetCoverInstance) -> Result<f64> {
    let costs: Vec<f64> = inst.sets().iter().map(|s| to_f64(&s.cost)).collect();
    let mut lp = LpProblem::unit_box(Sense::Minimize, costs);
    for i in 0..inst.n() {
        lp.add_row(
            inst.sets_containing(i)
                .into_iter()
                .map(|s| (s, 1.0))
                .collect(),
            Relation::Ge,
            1.0,
        );
    }
    let sol = lp_solve(&lp);
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        LpStatus::Infeasible => Err(Error::Infeasible("the sets do not cover every item".into())),
        s => Err(Error::Numerical(format!(
            "set cover LP ended with status {s:?}"
        ))),
    }
}

/// Orders a cover so that each set adds as many new items as possible, ties to the lowest index.
pub fn greedy_order(cover: &[usize], inst: &SetCoverInstance) -> Result<Vec<usize>> {
    if cover.iter().any(|&s| s >= inst.m()) || !inst.is_cover(cover) {
        return Err(Error::Invalid("input is not a feasible cover".into()));
    }
    let mut rest: Vec<usize> = cover.to_vec();
    rest.sort_unstable();
    rest.dedup();
    let mut covered = no_items(inst);
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        // rest is sorted, so the first maximum is the lowest index
        let mut pos = 0;
        let mut best = uncovered_in(inst, rest[0], &covered);
        for (p, &s) in rest.iter().enumerate().skip(1) {
            let k = uncovered_in(inst, s, &covered);
            if k > best {
                (pos, best) = (p, k);
            }
        }
        let s = rest.remove(pos);
        covered.union_with(inst.items(s));
        out.push(s);
    }
    Ok(out)
}

/// Independent check of the ordering inequality `|S_i \ (S_1 ∪ .. ∪ S_{i'-1})| <= n / i'` for all `i' <= i`.
pub fn check_greedy_order(
    order: &[usize],
    inst: &SetCoverInstance,
) -> std::result::Result<(), String> {
    let n = inst.n();
    let mut prefix = no_items(inst);
    for ip in 1..=order.len() {
        // prefix = S_1 ∪ .. ∪ S_{ip-1}
        for (i, &s) in order.iter().enumerate().skip(ip - 1) {
            let k = uncovered_in(inst, s, &prefix);
            if k * ip > n {
                return Err(format!(
                    "set at position {} has {k} items outside the first {} sets, above n/{ip}",
                    i + 1,
                    ip - 1
                ));
            }
        }
        prefix.union_with(inst.items(order[ip - 1]));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnapsackGreedyReport {
    /// Chosen item indices, increasing.
    pub chosen: Vec<usize>,
    #[serde(with = "rational::as_string")]
    pub reward: Rational,
    #[serde(with = "rational::as_string")]
    pub cost: Rational,
    pub forced_in: Vec<usize>,
    pub forced_out: Vec<usize>,
}

impl KnapsackGreedyReport {
    pub fn chosen_bits(&self, n: usize) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        for &i in &self.chosen {
            b.insert(i);
        }
        b
    }
}

/// Scans `candidates` by decreasing ratio and stops at the first item that does not fit.
fn fill(
    inst: &KnapsackInstance,
    mut candidates: Vec<usize>,
    room: &mut Rational,
    chosen: &mut Vec<usize>,
) {
    candidates.sort_by(|&a, &b| crate::instances::oracle_ratio_order(inst, a, b));
    for i in candidates {
        if inst.cost(i) <= room {
            *room -= inst.cost(i);
            chosen.push(i);
        } else {
            break;
        }
    }
}

fn finish(
    inst: &KnapsackInstance,
    mut chosen: Vec<usize>,
    forced_in: Vec<usize>,
    forced_out: Vec<usize>,
) -> KnapsackGreedyReport {
    chosen.sort_unstable();
    let bits = {
        let mut b = FixedBitSet::with_capacity(inst.n());
        chosen.iter().for_each(|&i| b.insert(i));
        b
    };
    KnapsackGreedyReport {
        reward: inst.reward_of(&bits),
        cost: inst.cost_of(&bits),
        chosen,
        forced_in,
        forced_out,
    }
}

pub fn knapsack_greedy(inst: &KnapsackInstance) -> KnapsackGreedyReport {
    let mut room = inst.capacity().clone();
    let mut chosen = Vec::new();
    fill(inst, (0..inst.n()).collect(), &mut room, &mut chosen);
    finish(inst, chosen, Vec::new(), Vec::new())
}

/// Adds every restricted item with `x_i = 1`, drops those with `x_i = 0`, then runs the
/// ratio greedy on the remaining restricted items. Integrality is judged within `DELTA_COND`.
pub fn knapsack_modified_greedy(
    inst: &KnapsackInstance,
    x: &[f64],
    restrict: &FixedBitSet,
) -> Result<KnapsackGreedyReport> {
    if x.len() != inst.n() {
        return Err(Error::Invalid(format!(
            "solution has {} entries for {} items",
            x.len(),
            inst.n()
        )));
    }
    let mut forced_in = Vec::new();
    let mut forced_out = Vec::new();
    let mut rest = Vec::new();
    for i in restrict.ones().filter(|&i| i < inst.n()) {
        if x[i] >= 1.0 - DELTA_COND {
            forced_in.push(i);
        } else if x[i] <= DELTA_COND {
            forced_out.push(i);
        } else {
            rest.push(i);
        }
    }
    let mut room = inst.capacity().clone();
    for &i in &forced_in {
        room -= inst.cost(i);
    }
    if room < Rational::zero() {
        return Err(Error::Numerical(
            "items with x_i = 1 exceed the capacity".into(),
        ));
    }
    let mut chosen = forced_in.clone();
    fill(inst, rest, &mut room, &mut chosen);
    Ok(finish(inst, chosen, forced_in, forced_out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{knapsack_lp_opt, parse_knapsack, parse_setcover};
    use crate::rational::{int, ratio, to_f64};

    fn running() -> SetCoverInstance {
        parse_setcover(r#"{"n":4,"sets":[{"cost":1,"items":[0,1,2]},{"cost":1,"items":[2,3]},{"cost":"1/2","items":[3]}]}"#)
            .unwrap()
    }

    fn three_items() -> KnapsackInstance {
        parse_knapsack(r#"{"capacity":2,"items":[{"reward":3,"cost":2},{"reward":2,"cost":1},{"reward":2,"cost":1}]}"#)
            .unwrap()
    }

    #[test]
    fn running_example_picks_a_then_c() {
        let inst = running();
        let r = greedy_setcover_full(&inst).unwrap();
        assert_eq!(r.chosen, vec![0, 2]);
        assert_eq!(r.total_cost, ratio(3, 2));
        assert_eq!(r.steps[0].density, ratio(1, 3));
        assert_eq!(r.steps[1].density, ratio(1, 2));
        assert_eq!(r.b, 3);
        assert_eq!(r.residual_bound, ratio(11, 6));
        assert!((setcover_lp_value(&inst).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn precovered_universe_is_empty_report() {
        let inst = running();
        let mut all = no_items(&inst);
        all.insert_range(..);
        let r = greedy_setcover(&inst, &all, &all_sets(&inst)).unwrap();
        assert!(r.chosen.is_empty());
        assert_eq!(r.total_cost, int(0));
    }

    #[test]
    fn restriction_that_cannot_cover_is_an_error() {
        let inst = running();
        let mut only_b = FixedBitSet::with_capacity(3);
        only_b.insert(1);
        assert!(greedy_setcover(&inst, &no_items(&inst), &only_b).is_err());
    }

    #[test]
    fn ordering_examples() {
        let inst = running();
        assert_eq!(
            greedy_order(
                &[1],
                &parse_setcover(
                    r#"{"n":2,"sets":[{"cost":1,"items":[0]},{"cost":1,"items":[0,1]}]}"#
                )
                .unwrap()
            )
            .unwrap(),
            vec![1]
        );
        let ord = greedy_order(&[2, 1, 0], &inst).unwrap();
        assert_eq!(ord[0], 0);
        assert!(check_greedy_order(&ord, &inst).is_ok());
        assert!(greedy_order(&[1], &inst).is_err());
        // a bad order is caught by the checker: {3} first leaves {0,1,2} with 3 > 4/2 new items
        assert!(check_greedy_order(&[2, 0], &inst).is_err());
    }

    #[test]
    fn knapsack_greedy_examples() {
        let one = parse_knapsack(r#"{"capacity":1,"items":[{"reward":5,"cost":1}]}"#).unwrap();
        assert_eq!(knapsack_greedy(&one).reward, int(5));
        let k = three_items();
        let g = knapsack_greedy(&k);
        assert_eq!(g.chosen, vec![1, 2]);
        assert_eq!(g.reward, int(4));
        let (lp, _) = knapsack_lp_opt(&k);
        assert!(lp <= &g.reward + k.max_reward());
        let zero = parse_knapsack(r#"{"capacity":0,"items":[{"reward":5,"cost":1}]}"#).unwrap();
        assert_eq!(knapsack_greedy(&zero).reward, int(0));
        assert_eq!(knapsack_lp_opt(&zero).0, int(0));
    }

    #[test]
    fn greedy_stops_at_first_misfit() {
        // ratios 3, 2, 1.5: item 1 does not fit after item 0, so item 2 is never tried
        let k = parse_knapsack(r#"{"capacity":4,"items":[{"reward":9,"cost":3},{"reward":4,"cost":2},{"reward":"3/2","cost":1}]}"#).unwrap();
        assert_eq!(knapsack_greedy(&k).chosen, vec![0]);
    }

    #[test]
    fn modified_greedy_examples() {
        let k = three_items();
        let mut all = FixedBitSet::with_capacity(3);
        all.insert_range(..);
        let integral = knapsack_modified_greedy(&k, &[0.0, 1.0, 1.0], &all).unwrap();
        assert_eq!(integral.reward, int(4));
        assert_eq!(integral.forced_in, vec![1, 2]);
        let (lp, x) = knapsack_lp_opt(&k);
        let xf: Vec<f64> = x.iter().map(to_f64).collect();
        let m = knapsack_modified_greedy(&k, &xf, &all).unwrap();
        assert!(m.reward >= lp - k.max_reward());
        let mut only_one = FixedBitSet::with_capacity(3);
        only_one.insert(1);
        let r = knapsack_modified_greedy(&k, &[0.5, 1.0, 0.5], &only_one).unwrap();
        assert_eq!(r.chosen, vec![1]);
        assert!(knapsack_modified_greedy(&k, &[1.0, 1.0, 1.0], &all).is_err());
    }
}
