//! Problem instances, JSON I/O, seeded generators, and exact oracles.

mod oracle;
pub mod random;

use fixedbitset::FixedBitSet;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::rational::{int, rational_from_json, rational_to_json, Rational};

pub(crate) use oracle::ratio_order as oracle_ratio_order;
pub use oracle::{
    exact_knapsack_opt, exact_setcover_opt, knapsack_lp_opt, KnapsackOpt, SetCoverOpt,
};
pub use random::{random_knapsack, random_setcover};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSet {
    pub cost: Rational,
    pub items: FixedBitSet,
}

impl CoverSet {
    pub fn size(&self) -> usize {
        self.items.count_ones(..)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetCoverInstance {
    n: usize,
    sets: Vec<CoverSet>,
}

impl SetCoverInstance {
    /// Items are sorted and deduplicated per set.
    pub fn new(n: usize, sets: Vec<(Rational, Vec<usize>)>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Invalid(
                "a set cover instance needs at least one set".into(),
            ));
        }
        let mut out = Vec::with_capacity(sets.len());
        for (k, (cost, items)) in sets.into_iter().enumerate() {
            if cost.is_negative() {
                return Err(Error::Invalid(format!("set {k} has negative cost {cost}")));
            }
            let mut bits = FixedBitSet::with_capacity(n);
            for i in items {
                if i >= n {
                    return Err(Error::Invalid(format!(
                        "set {k} has item {i} outside [0, {n})"
                    )));
                }
                bits.insert(i);
            }
            out.push(CoverSet { cost, items: bits });
        }
        Ok(SetCoverInstance { n, sets: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[CoverSet] {
        &self.sets
    }

    pub fn cost(&self, s: usize) -> &Rational {
        &self.sets[s].cost
    }

    pub fn items(&self, s: usize) -> &FixedBitSet {
        &self.sets[s].items
    }

    /// Largest set size `b`.
    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(CoverSet::size).max().unwrap_or(0)
    }

    pub fn total_cost(&self) -> Rational {
        self.sets
            .iter()
            .fold(Rational::zero(), |acc, s| acc + &s.cost)
    }

    pub fn union_of(&self, chosen: impl IntoIterator<Item = usize>) -> FixedBitSet {
        let mut u = FixedBitSet::with_capacity(self.n);
        for s in chosen {
            u.union_with(&self.sets[s].items);
        }
        u
    }

    /// True when the union of all sets is the whole universe.
    pub fn is_coverable(&self) -> bool {
        self.union_of(0..self.m()).count_ones(..) == self.n
    }

    pub fn is_cover(&self, chosen: &[usize]) -> bool {
        self.union_of(chosen.iter().copied()).count_ones(..) == self.n
    }

    pub fn cost_of(&self, chosen: &[usize]) -> Rational {
        chosen
            .iter()
            .fold(Rational::zero(), |acc, &s| acc + &self.sets[s].cost)
    }

    /// How many sets contain each item.
    pub fn frequencies(&self) -> Vec<usize> {
        let mut f = vec![0; self.n];
        for s in &self.sets {
            for i in s.items.ones() {
                f[i] += 1;
            }
        }
        f
    }

    /// Sets containing item `i`.
    pub fn sets_containing(&self, i: usize) -> Vec<usize> {
        (0..self.m())
            .filter(|&s| self.sets[s].items.contains(i))
            .collect()
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("instance must be a JSON object".into()))?;
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing nonnegative integer field \"n\"".into()))?
            as usize;
        let sets = obj
            .get("sets")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing array field \"sets\"".into()))?;
        let mut parsed = Vec::with_capacity(sets.len());
        for (k, s) in sets.iter().enumerate() {
            let cost = rational_from_json(
                s.get("cost")
                    .ok_or_else(|| Error::Parse(format!("set {k} has no cost")))?,
            )?;
            let items = s
                .get("items")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("set {k} has no items array")))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|x| x as usize)
                        .ok_or_else(|| Error::Parse(format!("set {k} has a non-integer item {x}")))
                })
                .collect::<Result<Vec<_>>>()?;
            parsed.push((cost, items));
        }
        Self::new(n, parsed)
    }

    pub fn to_json_value(&self) -> Value {
        let sets: Vec<Value> = self
            .sets
            .iter()
            .map(|s| {
                let mut o = Map::new();
                o.insert("cost".into(), rational_to_json(&s.cost));
                o.insert(
                    "items".into(),
                    Value::from(s.items.ones().collect::<Vec<_>>()),
                );
                Value::Object(o)
            })
            .collect();
        json!({ "n": self.n, "sets": sets })
    }

    pub fn to_canonical_string(&self) -> String {
        self.to_json_value().to_string()
    }
}

pub fn parse_setcover(text: &str) -> Result<SetCoverInstance> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    SetCoverInstance::from_json_value(&v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackItem {
    pub reward: Rational,
    pub cost: Rational,
}

/// An item dropped at parse time because it can never fit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrunedItem {
    pub original_index: usize,
    pub item: KnapsackItem,
}

/// Knapsack data with every retained item fitting on its own.
///
/// Item indices in all algorithms refer to retained items; `original_index` maps back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    capacity: Rational,
    items: Vec<KnapsackItem>,
    original: Vec<usize>,
    pruned: Vec<PrunedItem>,
}

impl KnapsackInstance {
    pub fn new(capacity: Rational, items: Vec<(Rational, Rational)>) -> Result<Self> {
        if capacity.is_negative() {
            return Err(Error::Invalid(format!("negative capacity {capacity}")));
        }
        let mut kept = Vec::new();
        let mut original = Vec::new();
        let mut pruned = Vec::new();
        for (k, (reward, cost)) in items.into_iter().enumerate() {
            if reward.is_negative() || cost.is_negative() {
                return Err(Error::Invalid(format!(
                    "item {k} has a negative reward or cost"
                )));
            }
            let item = KnapsackItem { reward, cost };
            if item.cost > capacity {
                pruned.push(PrunedItem {
                    original_index: k,
                    item,
                });
            } else {
                kept.push(item);
                original.push(k);
            }
        }
        Ok(KnapsackInstance {
            capacity,
            items: kept,
            original,
            pruned,
        })
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn capacity(&self) -> &Rational {
        &self.capacity
    }

    pub fn items(&self) -> &[KnapsackItem] {
        &self.items
    }

    pub fn reward(&self, i: usize) -> &Rational {
        &self.items[i].reward
    }

    pub fn cost(&self, i: usize) -> &Rational {
        &self.items[i].cost
    }

    pub fn original_index(&self, i: usize) -> usize {
        self.original[i]
    }

    pub fn prune_log(&self) -> &[PrunedItem] {
        &self.pruned
    }

    pub fn max_reward(&self) -> Rational {
        self.items
            .iter()
            .map(|it| it.reward.clone())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn reward_of(&self, chosen: &FixedBitSet) -> Rational {
        chosen
            .ones()
            .fold(Rational::zero(), |acc, i| acc + &self.items[i].reward)
    }

    pub fn cost_of(&self, chosen: &FixedBitSet) -> Rational {
        chosen
            .ones()
            .fold(Rational::zero(), |acc, i| acc + &self.items[i].cost)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("instance must be a JSON object".into()))?;
        let capacity = rational_from_json(
            obj.get("capacity")
                .ok_or_else(|| Error::Parse("missing field \"capacity\"".into()))?,
        )?;
        let items = obj
            .get("items")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing array field \"items\"".into()))?;
        let mut parsed = Vec::with_capacity(items.len());
        for (k, it) in items.iter().enumerate() {
            let reward = rational_from_json(
                it.get("reward")
                    .ok_or_else(|| Error::Parse(format!("item {k} has no reward")))?,
            )?;
            let cost = rational_from_json(
                it.get("cost")
                    .ok_or_else(|| Error::Parse(format!("item {k} has no cost")))?,
            )?;
            parsed.push((reward, cost));
        }
        Self::new(capacity, parsed)
    }

    /// Canonical form with pruned items restored to their original positions.
    pub fn to_json_value(&self) -> Value {
        let total = self.items.len() + self.pruned.len();
        let mut all: Vec<Option<&KnapsackItem>> = vec![None; total];
        for (i, it) in self.items.iter().enumerate() {
            all[self.original[i]] = Some(it);
        }
        for p in &self.pruned {
            all[p.original_index] = Some(&p.item);
        }
        let items: Vec<Value> = all
            .into_iter()
            .map(|it| {
                let it = it.expect("every original position is filled");
                let mut o = Map::new();
                o.insert("reward".into(), rational_to_json(&it.reward));
                o.insert("cost".into(), rational_to_json(&it.cost));
                Value::Object(o)
            })
            .collect();
        json!({ "capacity": rational_to_json(&self.capacity), "items": items })
    }

    pub fn to_canonical_string(&self) -> String {
        self.to_json_value().to_string()
    }
}

pub fn parse_knapsack(text: &str) -> Result<KnapsackInstance> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    KnapsackInstance::from_json_value(&v)
}

/// Parameters of the uniform-frequency generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationConfig {
    pub n: usize,
    pub epsilon: Rational,
    pub eta: Rational,
    pub gamma: Rational,
    pub seed: u64,
}

pub const GENERATION_RETRIES: usize = 50;

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        let half = crate::rational::ratio(1, 2);
        if !(self.epsilon > Rational::zero() && self.epsilon <= half) {
            return Err(Error::Invalid(format!(
                "epsilon must lie in (0, 1/2], got {}",
                self.epsilon
            )));
        }
        if !(self.eta > Rational::zero() && self.eta < self.epsilon) {
            return Err(Error::Invalid(format!(
                "eta must lie in (0, epsilon), got {}",
                self.eta
            )));
        }
        if !(self.gamma > Rational::zero() && self.gamma <= half) {
            return Err(Error::Invalid(format!(
                "gamma must lie in (0, 1/2], got {}",
                self.gamma
            )));
        }
        if self.frequency() < 1 {
            return Err(Error::Invalid(format!(
                "frequency floor((eps-eta)n) is 0 for n={}",
                self.n
            )));
        }
        Ok(())
    }

    /// `f = floor((eps - eta) n)`, computed exactly.
    pub fn frequency(&self) -> usize {
        let f = ((&self.epsilon - &self.eta) * int(self.n as i64))
            .floor()
            .to_integer();
        num_traits::ToPrimitive::to_usize(&f).unwrap_or(0)
    }

    /// `ln n / ln(1 + eps)`, the optimum lower bound the generator aims for.
    pub fn opt_target(&self) -> f64 {
        (self.n as f64).ln() / (1.0 + crate::rational::to_f64(&self.epsilon)).ln()
    }
}

/// Draws one instance: `n` unit-cost sets over `n` items, each item in a uniform random `f`-subset of the sets.
pub fn sample_uniform_frequency(n: usize, f: usize, rng: &mut ChaCha8Rng) -> SetCoverInstance {
    let mut members = vec![Vec::new(); n];
    for item in 0..n {
        for s in rand::seq::index::sample(rng, n, f).into_vec() {
            members[s].push(item);
        }
    }
    let sets = members.into_iter().map(|items| (int(1), items)).collect();
    SetCoverInstance::new(n, sets).expect("generated data is in range")
}

/// Result of the verified generator.
#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: SetCoverInstance,
    pub attempts: usize,
    pub opt: Rational,
}

/// Samples until the oracle confirms `OPT >= ln n / ln(1+eps)`, at most 50 times.
///
/// On exhaustion the error carries the attempt count; `last_sample` returns the final draw.
pub fn gen_uniform_frequency_instance(cfg: &GenerationConfig) -> Result<Generated> {
    match gen_with_fallback(cfg)? {
        (g, true) => Ok(g),
        (_, false) => Err(Error::RetryExhausted(GENERATION_RETRIES)),
    }
}

/// Like [`gen_uniform_frequency_instance`] but returns the last draw with `false` when every attempt fails.
pub fn gen_with_fallback(cfg: &GenerationConfig) -> Result<(Generated, bool)> {
    cfg.validate()?;
    let f = cfg.frequency();
    let target = cfg.opt_target();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last = None;
    for attempt in 1..=GENERATION_RETRIES {
        let instance = sample_uniform_frequency(cfg.n, f, &mut rng);
        let opt = exact_setcover_opt(&instance)?.cost;
        let ok = crate::rational::to_f64(&opt) >= target - 1e-12;
        let g = Generated {
            instance,
            attempts: attempt,
            opt,
        };
        if ok {
            return Ok((g, true));
        }
        last = Some(g);
    }
    Ok((last.expect("at least one attempt"), false))
}

/// Unverified draw, the first sample of the seeded stream.
pub fn gen_unverified(cfg: &GenerationConfig) -> Result<SetCoverInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(sample_uniform_frequency(cfg.n, cfg.frequency(), &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const RUNNING: &str = r#"{"n":4,"sets":[{"cost":1,"items":[0,1,2]},{"cost":1,"items":[2,3]},{"cost":"1/2","items":[3]}]}"#;

    #[test]
    fn parses_minimal_and_running_example() {
        let a = parse_setcover(r#"{"n":1,"sets":[{"cost":1,"items":[0]}]}"#).unwrap();
        assert_eq!((a.m(), a.max_set_size()), (1, 1));
        let b = parse_setcover(RUNNING).unwrap();
        assert_eq!((b.m(), b.max_set_size()), (3, 3));
        assert_eq!(b.cost(2), &ratio(1, 2));
        assert_eq!(b.to_canonical_string(), RUNNING);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            parse_setcover(r#"{"n":2,"sets":[{"cost":-1,"items":[0]}]}"#),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            parse_setcover(r#"{"n":2,"sets":[{"cost":1,"items":[2]}]}"#),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(parse_setcover("{"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_setcover(r#"{"n":2,"sets":[]}"#),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn knapsack_prunes_and_restores() {
        let k = parse_knapsack(
            r#"{"capacity":2,"items":[{"reward":9,"cost":3},{"reward":1,"cost":"1/2"}]}"#,
        )
        .unwrap();
        assert_eq!(k.n(), 1);
        assert_eq!(k.prune_log().len(), 1);
        assert_eq!(k.prune_log()[0].original_index, 0);
        assert_eq!(k.original_index(0), 1);
        let again = parse_knapsack(&k.to_canonical_string()).unwrap();
        assert_eq!(again, k);
    }

    #[test]
    fn uniform_frequency_columns() {
        let cfg = GenerationConfig {
            n: 6,
            epsilon: ratio(1, 2),
            eta: ratio(1, 6),
            gamma: ratio(1, 2),
            seed: 3,
        };
        assert_eq!(cfg.frequency(), 2);
        let inst = gen_unverified(&cfg).unwrap();
        assert!(inst.frequencies().iter().all(|&f| f == 2));
        assert_eq!(inst, gen_unverified(&cfg).unwrap());
    }

    #[test]
    fn generation_config_validation() {
        let bad = GenerationConfig {
            n: 2,
            epsilon: ratio(1, 2),
            eta: ratio(1, 4),
            gamma: ratio(1, 2),
            seed: 0,
        };
        assert!(bad.validate().is_err());
        let bad_eta = GenerationConfig {
            n: 12,
            epsilon: ratio(1, 4),
            eta: ratio(1, 2),
            gamma: ratio(1, 2),
            seed: 0,
        };
        assert!(bad_eta.validate().is_err());
    }
}
