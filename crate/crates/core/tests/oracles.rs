//! Cross-checks of the exact oracles and the LP solver against naive enumeration.

use liftlab::convex::{lp_solve, LpProblem, LpStatus, Relation, Sense};
use liftlab::greedy::{greedy_setcover_full, knapsack_greedy, setcover_lp_value};
use liftlab::instances::{
    exact_knapsack_opt, exact_setcover_opt, knapsack_lp_opt, random_knapsack, random_setcover,
};
use liftlab::rational::{harmonic_int, int, to_f64, Rational};
use liftlab::tolerance::EPS_FEAS;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn naive_setcover(inst: &liftlab::instances::SetCoverInstance) -> Option<Rational> {
    let m = inst.m();
    let mut best: Option<Rational> = None;
    for mask in 0u32..(1 << m) {
        let chosen: Vec<usize> = (0..m).filter(|&s| mask >> s & 1 == 1).collect();
        if inst.is_cover(&chosen) {
            let c = inst.cost_of(&chosen);
            if best.as_ref().is_none_or(|b| &c < b) {
                best = Some(c);
            }
        }
    }
    best
}

#[test]
fn setcover_oracle_matches_enumeration() {
    for seed in 0..220u64 {
        let n = 3 + (seed % 10) as usize;
        let m = 2 + (seed % 11) as usize;
        let inst = random_setcover(n, m, seed % 3 != 0, seed);
        let naive = naive_setcover(&inst).expect("generator output is coverable");
        let opt = exact_setcover_opt(&inst).unwrap();
        assert_eq!(opt.cost, naive, "seed {seed}");
        assert!(inst.is_cover(&opt.sets));
        assert_eq!(inst.cost_of(&opt.sets), opt.cost);
    }
}

#[test]
fn knapsack_oracle_matches_enumeration() {
    for seed in 0..200u64 {
        let inst = random_knapsack(1 + (seed % 12) as usize, 500 + seed);
        let n = inst.n();
        let mut best = Rational::zero();
        for mask in 0u32..(1 << n) {
            let bits: fixedbitset::FixedBitSet = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if inst.cost_of(&bits) <= *inst.capacity() {
                best = best.max(inst.reward_of(&bits));
            }
        }
        let opt = exact_knapsack_opt(&inst).unwrap();
        assert_eq!(opt.reward, best, "seed {seed}");
        assert!(inst.cost_of(&opt.chosen) <= *inst.capacity());
    }
}

/// Rows `a x >= b` in exact arithmetic.
struct ExactLp {
    n: usize,
    rows: Vec<(Vec<Rational>, Rational)>,
    objective: Vec<Rational>,
    maximize: bool,
}

fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let v = &f * &a[col][c];
                    a[r][c] -= v;
                }
                let v = &f * &b[col];
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Best vertex by trying every choice of `n` tight rows; `None` when the polytope is empty.
fn vertex_optimum(lp: &ExactLp) -> Option<Rational> {
    let k = lp.rows.len();
    let mut best: Option<Rational> = None;
    liftlab::subset::combinations(k, lp.n, |pick| {
        let a = pick.iter().map(|&r| lp.rows[r].0.clone()).collect();
        let b = pick.iter().map(|&r| lp.rows[r].1.clone()).collect();
        let Some(x) = solve_square(a, b) else { return };
        let feasible = lp
            .rows
            .iter()
            .all(|(a, b)| a.iter().zip(&x).map(|(u, v)| u * v).sum::<Rational>() >= *b);
        if feasible {
            let v: Rational = lp.objective.iter().zip(&x).map(|(u, v)| u * v).sum();
            let better = match &best {
                None => true,
                Some(b) => (lp.maximize && v > *b) || (!lp.maximize && v < *b),
            };
            if better {
                best = Some(v);
            }
        }
    });
    best
}

#[test]
fn lp_solver_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..400 {
        let n = 1 + case % 3;
        let upper: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
        let objective: Vec<i64> = (0..n).map(|_| rng.gen_range(-6..=6)).collect();
        let maximize = rng.gen_bool(0.5);
        let sense = if maximize {
            Sense::Maximize
        } else {
            Sense::Minimize
        };
        let mut lp = LpProblem::new(
            sense,
            objective.iter().map(|&v| v as f64).collect(),
            vec![0.0; n],
            upper.iter().map(|&v| v as f64).collect(),
        );
        let mut exact = ExactLp {
            n,
            rows: Vec::new(),
            objective: objective.iter().map(|&v| int(v)).collect(),
            maximize,
        };
        for j in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[j] = int(1);
            exact.rows.push((e.clone(), Rational::zero()));
            exact
                .rows
                .push((e.iter().map(|v| -v).collect(), int(-upper[j])));
        }
        for _ in 0..rng.gen_range(1..=4) {
            let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
            let b: i64 = rng.gen_range(-8..=8);
            let rel = [Relation::Ge, Relation::Le, Relation::Eq][rng.gen_range(0..3)];
            lp.add_row(
                a.iter().enumerate().map(|(j, &v)| (j, v as f64)).collect(),
                rel,
                b as f64,
            );
            let ar: Vec<Rational> = a.iter().map(|&v| int(v)).collect();
            let neg: Vec<Rational> = ar.iter().map(|v| -v).collect();
            match rel {
                Relation::Ge => exact.rows.push((ar, int(b))),
                Relation::Le => exact.rows.push((neg, int(-b))),
                Relation::Eq => {
                    exact.rows.push((ar, int(b)));
                    exact.rows.push((neg, int(-b)));
                }
            }
        }
        let sol = lp_solve(&lp);
        match vertex_optimum(&exact) {
            Some(v) => {
                optimal += 1;
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                let v = to_f64(&v);
                assert!(
                    (sol.objective - v).abs() <= EPS_FEAS * (1.0 + v.abs()),
                    "case {case}: {} vs {v}",
                    sol.objective
                );
                assert!(sol.max_violation <= EPS_FEAS, "case {case}");
            }
            None => {
                infeasible += 1;
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}");
                let ray = sol.farkas.expect("infeasible LPs carry a certificate");
                assert!(lp.farkas_margin(&ray.multipliers) > 0.0, "case {case}");
            }
        }
    }
    assert!(
        optimal > 100 && infeasible > 20,
        "{optimal} optimal, {infeasible} infeasible"
    );
}

#[test]
fn knapsack_lp_rule_matches_solver() {
    for seed in 0..60u64 {
        let inst = random_knapsack(2 + (seed % 9) as usize, seed);
        let (v, x) = knapsack_lp_opt(&inst);
        let n = inst.n();
        let mut lp = LpProblem::unit_box(
            Sense::Maximize,
            (0..n).map(|i| to_f64(inst.reward(i))).collect(),
        );
        lp.add_row(
            (0..n).map(|i| (i, to_f64(inst.cost(i)))).collect(),
            Relation::Le,
            to_f64(inst.capacity()),
        );
        let sol = lp_solve(&lp);
        let v = to_f64(&v);
        assert!(
            (sol.objective - v).abs() <= EPS_FEAS * (1.0 + v),
            "seed {seed}"
        );
        let used: Rational = (0..n).map(|i| inst.cost(i) * &x[i]).sum();
        assert!(used <= *inst.capacity());
    }
}

#[test]
fn greedy_bounds_against_lp_and_oracles() {
    for seed in 0..80u64 {
        let inst = random_setcover(
            4 + (seed % 12) as usize,
            3 + (seed % 10) as usize,
            seed % 2 == 0,
            7_000 + seed,
        );
        let g = greedy_setcover_full(&inst).unwrap();
        let lp = setcover_lp_value(&inst).unwrap();
        let hb = to_f64(&harmonic_int(inst.max_set_size() as u64));
        assert!(to_f64(&g.total_cost) <= hb * (lp + EPS_FEAS), "seed {seed}");
        let opt = exact_setcover_opt(&inst).unwrap().cost;
        assert!(lp <= to_f64(&opt) + EPS_FEAS);

        let k = random_knapsack(1 + (seed % 10) as usize, seed);
        let (klp, _) = knapsack_lp_opt(&k);
        let kg = knapsack_greedy(&k);
        assert!(
            !(klp - &kg.reward - k.max_reward()).is_positive(),
            "seed {seed}"
        );
    }
}
