//! Guess up to `d` sets of the optimum, then run greedy on the sets that stay small.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greedy::{greedy_setcover, GreedyReport};
use crate::instances::SetCoverInstance;
use crate::rational::{self, binomial_u64, harmonic, Rational};
use crate::subset::combinations;

pub const DEFAULT_CAP: u64 = 2_000_000;

#[derive(Clone, Debug)]
pub struct SubexpConfig {
    pub d: usize,
    /// Maximum number of guessed collections to examine.
    pub cap: u64,
    pub parallel: bool,
}

impl SubexpConfig {
    pub fn new(d: usize) -> Self {
        SubexpConfig {
            d,
            cap: DEFAULT_CAP,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubexpReport {
    pub best: GreedyReport,
    /// The guessed collection that produced `best`.
    pub guessed: Vec<usize>,
    /// `H_{floor(n/d)}`, withdrawn when the enumeration was truncated.
    #[serde(with = "rational::as_string::opt")]
    pub certified_ratio: Option<Rational>,
    pub truncated: bool,
    pub iterations: u64,
    /// Collections whose small sets could not finish the cover.
    pub skipped: u64,
}

/// Number of collections of at most `d` out of `m` sets.
pub fn collection_count(m: usize, d: usize) -> u64 {
    (0..=d.min(m))
        .map(|j| binomial_u64(m, j))
        .fold(0u64, u64::saturating_add)
}

/// Collections of at most `d` sets by size, each size in lexicographic order, up to `cap`.
fn collections(m: usize, d: usize, cap: u64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 0..=d.min(m) {
        if out.len() as u64 >= cap {
            break;
        }
        combinations(m, size, |c| {
            if (out.len() as u64) < cap {
                out.push(c.to_vec());
            }
        });
    }
    out
}

/// Runs the residual greedy for one guess; `None` when the small sets cannot finish the cover.
fn evaluate(inst: &SetCoverInstance, d: usize, guess: &[usize]) -> Option<GreedyReport> {
    let covered = inst.union_of(guess.iter().copied());
    let mut small = FixedBitSet::with_capacity(inst.m());
    for s in 0..inst.m() {
        // |S \ covered| <= n/d, compared exactly
        if inst.items(s).difference(&covered).count() * d <= inst.n() {
            small.insert(s);
        }
    }
    let mut g = greedy_setcover(inst, &covered, &small).ok()?;
    let guess_cost = inst.cost_of(guess);
    g.chosen.splice(0..0, guess.iter().copied());
    g.total_cost += guess_cost;
    Some(g)
}

pub fn guess_and_greedy(inst: &SetCoverInstance, cfg: &SubexpConfig) -> Result<SubexpReport> {
    if cfg.d == 0 || cfg.d > inst.n().max(1) {
        return Err(Error::Invalid(format!(
            "guess budget d must lie in [1, n], got {}",
            cfg.d
        )));
    }
    if !inst.is_coverable() {
        return Err(Error::Infeasible("the sets do not cover every item".into()));
    }
    let total = collection_count(inst.m(), cfg.d);
    let guesses = collections(inst.m(), cfg.d, cfg.cap);
    let truncated = (guesses.len() as u64) < total;
    let score = |(k, g): (usize, &Vec<usize>)| evaluate(inst, cfg.d, g).map(|r| (r.total_cost, k));
    let scored: Vec<Option<(Rational, usize)>> = if cfg.parallel {
        guesses.par_iter().enumerate().map(score).collect()
    } else {
        guesses.iter().enumerate().map(score).collect()
    };
    let skipped = scored.iter().filter(|s| s.is_none()).count() as u64;
    // minimum cost, earliest collection on ties
    let (_, winner) = scored
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or_else(|| Error::Infeasible("no guessed collection leads to a cover".into()))?;
    let best = evaluate(inst, cfg.d, &guesses[winner]).expect("winner was feasible");
    debug_assert!(inst.is_cover(&best.chosen));
    let ratio = harmonic(&Rational::new(inst.n().into(), cfg.d.into()));
    Ok(SubexpReport {
        best,
        guessed: guesses[winner].clone(),
        certified_ratio: if truncated { None } else { Some(ratio) },
        truncated,
        iterations: guesses.len() as u64,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{exact_setcover_opt, parse_setcover, random::random_setcover};
    use crate::rational::{int, ratio};

    fn running() -> SetCoverInstance {
        parse_setcover(r#"{"n":4,"sets":[{"cost":1,"items":[0,1,2]},{"cost":1,"items":[2,3]},{"cost":"1/2","items":[3]}]}"#)
            .unwrap()
    }

    #[test]
    fn single_set_universe() {
        let inst = parse_setcover(r#"{"n":1,"sets":[{"cost":1,"items":[0]}]}"#).unwrap();
        let r = guess_and_greedy(&inst, &SubexpConfig::new(1)).unwrap();
        assert_eq!(r.best.chosen, vec![0]);
        assert_eq!(r.certified_ratio, Some(int(1)));
    }

    #[test]
    fn small_optimum_is_found_exactly() {
        let inst = running();
        let r = guess_and_greedy(&inst, &SubexpConfig::new(2)).unwrap();
        assert_eq!(r.best.total_cost, ratio(3, 2));
        assert_eq!(r.iterations, 1 + 3 + 3);
        assert!(r.best.total_cost <= ratio(3, 2) * r.certified_ratio.unwrap());
    }

    #[test]
    fn cap_withdraws_certificate() {
        let inst = running();
        let cfg = SubexpConfig {
            d: 2,
            cap: 2,
            parallel: false,
        };
        let r = guess_and_greedy(&inst, &cfg).unwrap();
        assert!(r.truncated);
        assert_eq!(r.certified_ratio, None);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        for seed in 0..10 {
            let inst = random_setcover(12, 9, false, seed);
            let a = guess_and_greedy(
                &inst,
                &SubexpConfig {
                    d: 2,
                    cap: DEFAULT_CAP,
                    parallel: true,
                },
            )
            .unwrap();
            let b = guess_and_greedy(
                &inst,
                &SubexpConfig {
                    d: 2,
                    cap: DEFAULT_CAP,
                    parallel: false,
                },
            )
            .unwrap();
            assert_eq!(a.best, b.best);
            let opt = exact_setcover_opt(&inst).unwrap().cost;
            assert!(a.best.total_cost <= opt * a.certified_ratio.unwrap());
        }
    }
}
