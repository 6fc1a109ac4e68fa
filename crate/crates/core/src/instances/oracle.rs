//! Exact brute-force optima used as ground truth.

use std::cmp::Ordering;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{KnapsackInstance, SetCoverInstance};
use crate::error::{Error, Result};
use crate::rational::{lcm_of_denominators, Rational};

pub const SETCOVER_ORACLE_MAX_N: usize = 24;
pub const KNAPSACK_ENUM_MAX_N: usize = 24;
pub const KNAPSACK_DP_MAX_CAPACITY: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetCoverOpt {
    pub cost: Rational,
    /// Chosen set indices, increasing.
    pub sets: Vec<usize>,
}

trait Weight: Copy + Ord + std::ops::Add<Output = Self> {
    const INF: Self;
    const ZERO: Self;
    fn from_u64(v: u64) -> Self;
}

impl Weight for u32 {
    const INF: Self = u32::MAX;
    const ZERO: Self = 0;
    fn from_u64(v: u64) -> Self {
        v as u32
    }
}

impl Weight for u64 {
    const INF: Self = u64::MAX;
    const ZERO: Self = 0;
    fn from_u64(v: u64) -> Self {
        v
    }
}

/// Minimum-cost cover by dynamic programming over covered-item masks.
///
/// Each state only branches on sets containing its lowest uncovered item, so the
/// table has `2^n` entries regardless of `m`.
pub fn exact_setcover_opt(inst: &SetCoverInstance) -> Result<SetCoverOpt> {
    let n = inst.n();
    if n > SETCOVER_ORACLE_MAX_N {
        return Err(Error::SizeLimit(format!(
            "set cover oracle handles n <= {SETCOVER_ORACLE_MAX_N}, got {n}"
        )));
    }
    if !inst.is_coverable() {
        return Err(Error::Infeasible("the sets do not cover every item".into()));
    }
    let scale = lcm_of_denominators(inst.sets().iter().map(|s| &s.cost));
    let scaled: Vec<u64> = inst
        .sets()
        .iter()
        .map(|s| {
            (&s.cost * Rational::from_integer(scale.clone()))
                .to_integer()
                .to_u64()
        })
        .collect::<Option<_>>()
        .ok_or_else(|| Error::SizeLimit("scaled costs exceed 64 bits".into()))?;
    let total: u128 = scaled.iter().map(|&c| c as u128).sum();
    let masks: Vec<u32> = inst
        .sets()
        .iter()
        .map(|s| s.items.ones().fold(0u32, |m, i| m | 1 << i))
        .collect();
    let chosen = if total < u32::MAX as u128 {
        cover_dp::<u32>(n, &masks, &scaled)
    } else if total < u64::MAX as u128 {
        cover_dp::<u64>(n, &masks, &scaled)
    } else {
        return Err(Error::SizeLimit("total scaled cost exceeds 64 bits".into()));
    };
    let mut sets = chosen;
    sets.sort_unstable();
    Ok(SetCoverOpt {
        cost: inst.cost_of(&sets),
        sets,
    })
}

fn cover_dp<W: Weight>(n: usize, masks: &[u32], costs: &[u64]) -> Vec<usize> {
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // options[j]: sets containing item j, cheapest first among equal masks
    let mut options: Vec<Vec<(u32, W, usize)>> = vec![Vec::new(); n];
    for j in 0..n {
        for (s, &m) in masks.iter().enumerate() {
            if m >> j & 1 == 1 {
                let c = W::from_u64(costs[s]);
                match options[j].iter_mut().find(|o| o.0 == m) {
                    Some(o) if c < o.1 => *o = (m, c, s),
                    Some(_) => {}
                    None => options[j].push((m, c, s)),
                }
            }
        }
    }
    let size = 1usize << n;
    let mut g = vec![W::INF; size];
    g[full as usize] = W::ZERO;
    for mask in (0..full).rev() {
        let j = (!mask).trailing_zeros() as usize;
        let mut best = W::INF;
        for &(m, c, _) in &options[j] {
            let rest = g[(mask | m) as usize];
            if rest != W::INF && c + rest < best {
                best = c + rest;
            }
        }
        g[mask as usize] = best;
    }
    let mut mask = 0u32;
    let mut out = Vec::new();
    while mask != full {
        let j = (!mask).trailing_zeros() as usize;
        let &(m, _, s) = options[j]
            .iter()
            .filter(|&&(m, c, _)| {
                g[(mask | m) as usize] != W::INF && c + g[(mask | m) as usize] == g[mask as usize]
            })
            .min_by_key(|o| o.2)
            .expect("optimal table has a witness");
        out.push(s);
        mask |= m;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackOpt {
    pub reward: Rational,
    pub chosen: FixedBitSet,
}

fn scaled_ints(values: &[&Rational]) -> Option<(BigInt, Vec<i128>)> {
    let scale = lcm_of_denominators(values.iter().copied());
    let s = Rational::from_integer(scale.clone());
    let v = values
        .iter()
        .map(|r| (*r * &s).to_integer().to_i128())
        .collect::<Option<Vec<_>>>()?;
    Some((scale, v))
}

/// Maximum reward over feasible item sets.
///
/// Integer costs with capacity at most 10^6 use a capacity-indexed DP, otherwise all
/// subsets are enumerated (n <= 24).
pub fn exact_knapsack_opt(inst: &KnapsackInstance) -> Result<KnapsackOpt> {
    let n = inst.n();
    let mut chosen = FixedBitSet::with_capacity(n);
    if n == 0 {
        return Ok(KnapsackOpt {
            reward: Rational::zero(),
            chosen,
        });
    }
    let rewards: Vec<&Rational> = inst.items().iter().map(|it| &it.reward).collect();
    let (_, r) = scaled_ints(&rewards)
        .ok_or_else(|| Error::SizeLimit("scaled rewards exceed 128 bits".into()))?;
    let integral =
        inst.items().iter().all(|it| it.cost.is_integer()) && inst.capacity().is_integer();
    let cap = inst.capacity().to_integer().to_u64();
    if integral && cap.is_some_and(|c| c <= KNAPSACK_DP_MAX_CAPACITY) {
        let cap = cap.unwrap_or(0) as usize;
        let c: Vec<usize> = inst
            .items()
            .iter()
            .map(|it| it.cost.to_integer().to_usize().unwrap_or(usize::MAX))
            .collect();
        let mut best = vec![0i128; cap + 1];
        let mut keep = vec![FixedBitSet::with_capacity(cap + 1); n];
        for i in 0..n {
            for w in (c[i]..=cap).rev() {
                let cand = best[w - c[i]] + r[i];
                if cand > best[w] {
                    best[w] = cand;
                    keep[i].insert(w);
                }
            }
        }
        let mut w = cap;
        for i in (0..n).rev() {
            if keep[i].contains(w) {
                chosen.insert(i);
                w -= c[i];
            }
        }
    } else if n <= KNAPSACK_ENUM_MAX_N {
        let mut costs: Vec<&Rational> = inst.items().iter().map(|it| &it.cost).collect();
        costs.push(inst.capacity());
        let (_, c) = scaled_ints(&costs)
            .ok_or_else(|| Error::SizeLimit("scaled costs exceed 128 bits".into()))?;
        let cap = c[n];
        // Gray-code walk keeps running sums in O(1) per subset.
        let (mut cost, mut reward, mut mask) = (0i128, 0i128, 0u32);
        let (mut best_r, mut best_m) = (0i128, 0u32);
        for k in 1u32..(1u32 << n) {
            let bit = k.trailing_zeros() as usize;
            mask ^= 1 << bit;
            if mask >> bit & 1 == 1 {
                cost += c[bit];
                reward += r[bit];
            } else {
                cost -= c[bit];
                reward -= r[bit];
            }
            if cost <= cap && (reward > best_r || reward == best_r && mask < best_m) {
                best_r = reward;
                best_m = mask;
            }
        }
        for i in 0..n {
            if best_m >> i & 1 == 1 {
                chosen.insert(i);
            }
        }
    } else {
        return Err(Error::SizeLimit(format!(
            "knapsack oracle needs n <= {KNAPSACK_ENUM_MAX_N} or integer costs with capacity <= {KNAPSACK_DP_MAX_CAPACITY}"
        )));
    }
    Ok(KnapsackOpt {
        reward: inst.reward_of(&chosen),
        chosen,
    })
}

/// Exact optimum of the Knapsack LP by the fractional ratio rule.
pub fn knapsack_lp_opt(inst: &KnapsackInstance) -> (Rational, Vec<Rational>) {
    let n = inst.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ratio_order(inst, a, b));
    let mut x = vec![Rational::zero(); n];
    let mut room = inst.capacity().clone();
    let mut value = Rational::zero();
    for i in order {
        let it = &inst.items()[i];
        if it.cost <= room {
            room -= &it.cost;
            x[i] = Rational::from_integer(1.into());
            value += &it.reward;
        } else {
            let frac = &room / &it.cost;
            value += &it.reward * &frac;
            x[i] = frac;
            break;
        }
    }
    (value, x)
}

/// Decreasing reward/cost, zero-cost items first, ties by index.
pub(crate) fn ratio_order(inst: &KnapsackInstance, a: usize, b: usize) -> Ordering {
    let (ia, ib) = (&inst.items()[a], &inst.items()[b]);
    match (ia.cost.is_zero(), ib.cost.is_zero()) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => a.cmp(&b),
        (false, false) => (&ib.reward * &ia.cost)
            .cmp(&(&ia.reward * &ib.cost))
            .then(a.cmp(&b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{parse_knapsack, parse_setcover};
    use crate::rational::{int, ratio};

    #[test]
    fn setcover_examples() {
        let one = parse_setcover(r#"{"n":1,"sets":[{"cost":1,"items":[0]}]}"#).unwrap();
        assert_eq!(exact_setcover_opt(&one).unwrap().cost, int(1));
        let run = parse_setcover(
            r#"{"n":4,"sets":[{"cost":1,"items":[0,1,2]},{"cost":1,"items":[2,3]},{"cost":"1/2","items":[3]}]}"#,
        )
        .unwrap();
        let opt = exact_setcover_opt(&run).unwrap();
        assert_eq!(opt.cost, ratio(3, 2));
        assert_eq!(opt.sets, vec![0, 2]);
        let miss = parse_setcover(r#"{"n":3,"sets":[{"cost":1,"items":[0,1]}]}"#).unwrap();
        assert!(matches!(
            exact_setcover_opt(&miss),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn knapsack_examples() {
        let one = parse_knapsack(r#"{"capacity":1,"items":[{"reward":5,"cost":1}]}"#).unwrap();
        let o = exact_knapsack_opt(&one).unwrap();
        assert_eq!(o.reward, int(5));
        assert!(o.chosen.contains(0));
        let three = parse_knapsack(
            r#"{"capacity":2,"items":[{"reward":3,"cost":2},{"reward":2,"cost":1},{"reward":2,"cost":1}]}"#,
        )
        .unwrap();
        let o = exact_knapsack_opt(&three).unwrap();
        assert_eq!(o.reward, int(4));
        assert_eq!(o.chosen.ones().collect::<Vec<_>>(), vec![1, 2]);
        let pruned = parse_knapsack(r#"{"capacity":1,"items":[{"reward":5,"cost":2}]}"#).unwrap();
        let o = exact_knapsack_opt(&pruned).unwrap();
        assert_eq!(o.reward, int(0));
        assert_eq!(o.chosen.count_ones(..), 0);
    }

    #[test]
    fn knapsack_enumeration_path_matches_dp() {
        // fractional capacity forces enumeration
        let frac = parse_knapsack(
            r#"{"capacity":"5/2","items":[{"reward":3,"cost":2},{"reward":2,"cost":1},{"reward":2,"cost":"3/2"}]}"#,
        )
        .unwrap();
        assert_eq!(exact_knapsack_opt(&frac).unwrap().reward, int(4));
    }

    #[test]
    fn lp_by_ratio_rule() {
        let k = parse_knapsack(
            r#"{"capacity":1,"items":[{"reward":2,"cost":1},{"reward":1,"cost":1}]}"#,
        )
        .unwrap();
        let (v, x) = knapsack_lp_opt(&k);
        assert_eq!(v, int(2));
        assert_eq!(x, vec![int(1), int(0)]);
        let three = parse_knapsack(
            r#"{"capacity":2,"items":[{"reward":3,"cost":2},{"reward":2,"cost":1},{"reward":2,"cost":1}]}"#,
        )
        .unwrap();
        assert_eq!(knapsack_lp_opt(&three).0, int(4));
    }
}
