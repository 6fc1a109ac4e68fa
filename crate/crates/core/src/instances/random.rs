//! Seeded random instances for experiments and test corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{KnapsackInstance, SetCoverInstance};
use crate::rational::{int, ratio};

/// Random coverable instance; each set draws items with probability about `3/n`,
/// and items left uncovered are patched into a random set.
pub fn random_setcover(n: usize, m: usize, integer_costs: bool, seed: u64) -> SetCoverInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = (3.0 / n.max(1) as f64).min(0.6);
    let mut members: Vec<Vec<usize>> = (0..m)
        .map(|_| (0..n).filter(|_| rng.gen_bool(p)).collect())
        .collect();
    for i in 0..n {
        if !members.iter().any(|s| s.contains(&i)) {
            let s = rng.gen_range(0..m);
            members[s].push(i);
        }
    }
    let sets = members
        .into_iter()
        .map(|items| {
            let cost = if integer_costs {
                int(rng.gen_range(1..=5))
            } else {
                ratio(rng.gen_range(1..=12), rng.gen_range(1..=4))
            };
            (cost, items)
        })
        .collect();
    SetCoverInstance::new(n, sets).expect("generated data is in range")
}

/// Random integer Knapsack instance with capacity about half the total cost.
pub fn random_knapsack(n: usize, seed: u64) -> KnapsackInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items: Vec<_> = (0..n)
        .map(|_| (int(rng.gen_range(1..=20)), int(rng.gen_range(1..=10))))
        .collect();
    let total: i64 = items
        .iter()
        .map(|(_, c)| num_traits::ToPrimitive::to_i64(&c.to_integer()).unwrap_or(0))
        .sum();
    let cap = rng.gen_range(total / 4..=total / 2).max(1);
    KnapsackInstance::new(int(cap), items).expect("generated data is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_coverable() {
        for seed in 0..20 {
            let a = random_setcover(10, 6, seed % 2 == 0, seed);
            assert!(a.is_coverable());
            assert_eq!(a, random_setcover(10, 6, seed % 2 == 0, seed));
            let k = random_knapsack(6, seed);
            assert_eq!(k, random_knapsack(6, seed));
        }
    }
}
