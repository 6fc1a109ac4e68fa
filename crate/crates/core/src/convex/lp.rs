//! Box-bounded LP solver.
//!
//! Every constraint, variable bounds included, is kept as a row `a x >= b`. A basis is a
//! set of `n` active rows, so `x = A_B^{-1} b_B` and the multipliers are `A_B^{-T} c`.
//! Because every variable is boxed, choosing the cheaper bound of each variable gives a
//! dual feasible start. A dual simplex then removes primal violations; an exhausted ratio
//! test yields a Farkas ray directly. The cost vector is perturbed against dual
//! degeneracy, and a primal simplex pass with the true cost finishes the solve.

use serde::Serialize;

use super::linalg::{lu_inverse, Dense};
use crate::scalar::Real;
use crate::tolerance::EPS_FEAS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpRow<F> {
    pub coeffs: Vec<(usize, F)>,
    pub relation: Relation,
    pub rhs: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem<F> {
    pub sense: Sense,
    pub objective: Vec<F>,
    pub rows: Vec<LpRow<F>>,
    pub lower: Vec<F>,
    pub upper: Vec<F>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration budget exhausted or accuracy lost; never reported as infeasible.
    Stalled,
}

/// Multipliers proving infeasibility: with `g = sum_k mu_k a_k`, the row combination
/// `g x (>=) sum_k mu_k b_k` cannot be met by any `x` in the box.
#[derive(Clone, Debug, PartialEq)]
pub struct FarkasRay<F> {
    /// One multiplier per row: `>= 0` for `Ge`, `<= 0` for `Le`, free for `Eq`.
    pub multipliers: Vec<F>,
    /// `sum mu_k b_k - max_box g x`, positive for a valid certificate.
    pub margin: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<F> {
    pub status: LpStatus,
    pub x: Vec<F>,
    pub objective: F,
    pub iterations: usize,
    /// Largest row or bound violation of `x`.
    pub max_violation: F,
    pub farkas: Option<FarkasRay<F>>,
}

impl<F: Real> LpProblem<F> {
    pub fn new(sense: Sense, objective: Vec<F>, lower: Vec<F>, upper: Vec<F>) -> Self {
        assert_eq!(objective.len(), lower.len());
        assert_eq!(objective.len(), upper.len());
        LpProblem {
            sense,
            objective,
            rows: Vec::new(),
            lower,
            upper,
        }
    }

    /// Unit box `[0, 1]^n`.
    pub fn unit_box(sense: Sense, objective: Vec<F>) -> Self {
        let n = objective.len();
        Self::new(sense, objective, vec![F::zero(); n], vec![F::one(); n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, F)>, relation: Relation, rhs: F) {
        self.rows.push(LpRow {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn row_value(&self, k: usize, x: &[F]) -> F {
        self.rows[k]
            .coeffs
            .iter()
            .fold(F::zero(), |acc, &(j, a)| acc + a * x[j])
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[F]) -> F {
        let mut worst = F::zero();
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for (k, r) in self.rows.iter().enumerate() {
            let v = self.row_value(k, x);
            let viol = match r.relation {
                Relation::Ge => r.rhs - v,
                Relation::Le => v - r.rhs,
                Relation::Eq => (v - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn objective_value(&self, x: &[F]) -> F {
        self.objective
            .iter()
            .zip(x)
            .fold(F::zero(), |acc, (&c, &v)| acc + c * v)
    }

    /// Recomputes the certificate margin of `mu` from the problem data.
    pub fn farkas_margin(&self, mu: &[F]) -> F {
        let n = self.num_vars();
        let mut g = vec![F::zero(); n];
        let mut rhs = F::zero();
        for (r, &m) in self.rows.iter().zip(mu) {
            let ok = match r.relation {
                Relation::Ge => m >= F::zero(),
                Relation::Le => m <= F::zero(),
                Relation::Eq => true,
            };
            if !ok {
                return F::neg_infinity();
            }
            for &(j, a) in &r.coeffs {
                g[j] = g[j] + m * a;
            }
            rhs = rhs + m * r.rhs;
        }
        let best: F = (0..n).fold(F::zero(), |acc, j| {
            acc + (g[j] * self.lower[j]).max(g[j] * self.upper[j])
        });
        rhs - best
    }
}

/// Solver knobs; defaults suit `f64` problems with entries of order one.
#[derive(Clone, Debug)]
pub struct LpOptions {
    pub max_iterations: usize,
    pub refactor_every: usize,
    /// Relative size of the cost perturbation.
    pub perturbation: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            max_iterations: 0,
            refactor_every: 64,
            perturbation: 1e-7,
        }
    }
}

struct Row<F> {
    a: Vec<(usize, F)>,
    b: F,
    norm: F,
    /// User row index and sign, or `None` for a bound row.
    origin: Option<(usize, F)>,
}

struct Simplex<F> {
    n: usize,
    rows: Vec<Row<F>>,
    basis: Vec<usize>,
    pos: Vec<Option<usize>>,
    binv: Dense<F>,
    x: Vec<F>,
    lambda: Vec<F>,
    feas_tol: F,
    piv_tol: F,
    iterations: usize,
    max_iterations: usize,
    refactor_every: usize,
    since_refactor: usize,
}

enum Phase<F> {
    Done,
    Infeasible(Vec<F>),
    Unbounded,
    Stalled,
}

impl<F: Real> Simplex<F> {
    fn dot(&self, r: usize, v: &[F]) -> F {
        self.rows[r]
            .a
            .iter()
            .fold(F::zero(), |acc, &(j, a)| acc + a * v[j])
    }

    fn slack(&self, r: usize) -> F {
        self.dot(r, &self.x) - self.rows[r].b
    }

    /// `w = A_B^{-T} a_r`, i.e. the row vector `a_r^T A_B^{-1}`.
    fn represent(&self, r: usize) -> Vec<F> {
        let n = self.n;
        let mut w = vec![F::zero(); n];
        for &(j, a) in &self.rows[r].a {
            let row = &self.binv.data[j * n..(j + 1) * n];
            for (wi, &bi) in w.iter_mut().zip(row) {
                *wi = *wi + a * bi;
            }
        }
        w
    }

    fn column(&self, p: usize) -> Vec<F> {
        (0..self.n).map(|k| self.binv.get(k, p)).collect()
    }

    fn compute_lambda(&mut self, c: &[F]) {
        // lambda = A_B^{-T} c, lambda_i = sum_j binv[j][i] c_j
        let n = self.n;
        let mut l = vec![F::zero(); n];
        for j in 0..n {
            if c[j] == F::zero() {
                continue;
            }
            for i in 0..n {
                l[i] = l[i] + self.binv.get(j, i) * c[j];
            }
        }
        self.lambda = l;
    }

    fn compute_x(&mut self) {
        let b: Vec<F> = self.basis.iter().map(|&r| self.rows[r].b).collect();
        self.x = self.binv.mul_vec(&b);
    }

    fn refactor(&mut self, c: &[F]) -> bool {
        let n = self.n;
        let mut ab = Dense::zeros(n);
        for (i, &r) in self.basis.iter().enumerate() {
            for &(j, a) in &self.rows[r].a {
                ab.set(i, j, a);
            }
        }
        match lu_inverse(&ab) {
            Some(inv) => {
                self.binv = inv;
                self.compute_x();
                self.compute_lambda(c);
                self.since_refactor = 0;
                true
            }
            None => false,
        }
    }

    /// Replaces the basis row at position `p` by row `r`, given `w = represent(r)`.
    fn pivot(&mut self, p: usize, r: usize, w: &[F], c: &[F]) -> bool {
        let n = self.n;
        let col = self.column(p);
        let wp = w[p];
        let t = -self.slack(r) / wp;
        for k in 0..n {
            let f = col[k] / wp;
            if f == F::zero() {
                continue;
            }
            let row = &mut self.binv.data[k * n..(k + 1) * n];
            for (i, v) in row.iter_mut().enumerate() {
                let wi = if i == p { w[i] - F::one() } else { w[i] };
                *v = *v - f * wi;
            }
        }
        for k in 0..n {
            self.x[k] = self.x[k] + t * col[k];
        }
        self.pos[self.basis[p]] = None;
        self.basis[p] = r;
        self.pos[r] = Some(p);
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.refactor_every {
            return self.refactor(c);
        }
        true
    }

    /// Dual simplex: keeps `lambda >= 0` and removes violated rows.
    fn dual_phase(&mut self, c: &[F]) -> Phase<F> {
        let mut bland = false;
        let mut stuck = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Phase::Stalled;
            }
            let mut enter: Option<(usize, F)> = None;
            for r in 0..self.rows.len() {
                if self.pos[r].is_some() {
                    continue;
                }
                let s = self.slack(r);
                if s >= -self.feas_tol * (F::one() + self.rows[r].b.abs()) {
                    continue;
                }
                let score = -s / self.rows[r].norm;
                if bland {
                    enter = Some((r, score));
                    break;
                }
                if enter.map_or(true, |(_, best)| score > best) {
                    enter = Some((r, score));
                }
            }
            let Some((r, _)) = enter else {
                return Phase::Done;
            };
            let w = self.represent(r);
            let mut leave: Option<(usize, F)> = None;
            for i in 0..self.n {
                if w[i] <= self.piv_tol {
                    continue;
                }
                let theta = self.lambda[i].max(F::zero()) / w[i];
                leave = match leave {
                    None => Some((i, theta)),
                    Some((j, best)) => {
                        let tie = (theta - best).abs()
                            <= F::machine_eps() * F::cast(16.0) * (F::one() + best);
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[j]
                            } else {
                                w[i] > w[j]
                            }
                        } else {
                            theta < best
                        };
                        if better {
                            Some((i, theta))
                        } else {
                            Some((j, best))
                        }
                    }
                };
            }
            let Some((p, theta)) = leave else {
                let mut u = vec![F::zero(); self.rows.len()];
                u[r] = F::one();
                for i in 0..self.n {
                    if w[i] < F::zero() {
                        u[self.basis[i]] = -w[i];
                    }
                }
                return Phase::Infeasible(u);
            };
            for i in 0..self.n {
                self.lambda[i] = self.lambda[i] - theta * w[i];
            }
            self.lambda[p] = theta;
            if theta <= F::machine_eps() {
                stuck += 1;
                if stuck > 50 + self.n {
                    bland = true;
                }
            } else {
                stuck = 0;
                bland = false;
            }
            if !self.pivot(p, r, &w, c) {
                return Phase::Stalled;
            }
        }
    }

    /// Primal simplex from a feasible basis with the true cost.
    fn primal_phase(&mut self, c: &[F]) -> Phase<F> {
        self.compute_lambda(c);
        let mut bland = false;
        let mut stuck = 0usize;
        let scale = c.iter().fold(F::one(), |acc, &v| acc.max(v.abs()));
        loop {
            if self.iterations >= self.max_iterations {
                return Phase::Stalled;
            }
            let mut drop: Option<usize> = None;
            for i in 0..self.n {
                if self.lambda[i] >= -self.feas_tol * scale {
                    continue;
                }
                drop = match drop {
                    None => Some(i),
                    Some(j) => {
                        let better = if bland {
                            self.basis[i] < self.basis[j]
                        } else {
                            self.lambda[i] < self.lambda[j]
                        };
                        if better {
                            Some(i)
                        } else {
                            Some(j)
                        }
                    }
                };
            }
            let Some(p) = drop else { return Phase::Done };
            let d = self.column(p);
            let mut enter: Option<(usize, F, F)> = None;
            for r in 0..self.rows.len() {
                if self.pos[r].is_some() {
                    continue;
                }
                let ad = self.dot(r, &d);
                if ad >= -self.piv_tol {
                    continue;
                }
                let step = self.slack(r).max(F::zero()) / -ad;
                enter = match enter {
                    None => Some((r, step, ad)),
                    Some((q, best, bad)) => {
                        let tie = (step - best).abs()
                            <= F::machine_eps() * F::cast(16.0) * (F::one() + best);
                        let better = if tie {
                            if bland {
                                r < q
                            } else {
                                ad < bad
                            }
                        } else {
                            step < best
                        };
                        if better {
                            Some((r, step, ad))
                        } else {
                            Some((q, best, bad))
                        }
                    }
                };
            }
            let Some((r, step, _)) = enter else {
                return Phase::Unbounded;
            };
            if step <= F::machine_eps() {
                stuck += 1;
                if stuck > 50 + self.n {
                    bland = true;
                }
            } else {
                stuck = 0;
                bland = false;
            }
            let w = self.represent(r);
            if !self.pivot(p, r, &w, c) {
                return Phase::Stalled;
            }
            self.compute_lambda(c);
        }
    }
}

fn perturbation(j: usize) -> f64 {
    // deterministic spread in [0.5, 1.5)
    let mut h = (j as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 31;
    0.5 + (h >> 11) as f64 / (1u64 << 53) as f64
}

pub fn lp_solve<F: Real>(p: &LpProblem<F>) -> LpSolution<F> {
    lp_solve_with(p, &LpOptions::default())
}

pub fn lp_solve_with<F: Real>(p: &LpProblem<F>, opts: &LpOptions) -> LpSolution<F> {
    let n = p.num_vars();
    let eps_feas = F::cast(EPS_FEAS).max(F::machine_eps() * F::cast(1e3));
    for j in 0..n {
        if !(p.lower[j].is_finite() && p.upper[j].is_finite()) {
            panic!("lp_solve requires finite bounds on every variable");
        }
        if p.lower[j] > p.upper[j] {
            return infeasible_bounds(p, j);
        }
    }
    let mut rows: Vec<Row<F>> = Vec::with_capacity(2 * n + 2 * p.rows.len());
    for j in 0..n {
        rows.push(Row {
            a: vec![(j, F::one())],
            b: p.lower[j],
            norm: F::one(),
            origin: None,
        });
        rows.push(Row {
            a: vec![(j, -F::one())],
            b: -p.upper[j],
            norm: F::one(),
            origin: None,
        });
    }
    for (k, r) in p.rows.iter().enumerate() {
        let mut coeffs: Vec<(usize, F)> = Vec::with_capacity(r.coeffs.len());
        let mut sorted = r.coeffs.clone();
        sorted.sort_by_key(|&(j, _)| j);
        for (j, a) in sorted {
            match coeffs.last_mut() {
                Some(last) if last.0 == j => last.1 = last.1 + a,
                _ => coeffs.push((j, a)),
            }
        }
        coeffs.retain(|&(_, a)| a != F::zero());
        let scale = coeffs
            .iter()
            .fold(F::zero(), |acc, &(_, a)| acc.max(a.abs()));
        if scale == F::zero() {
            let ok = match r.relation {
                Relation::Ge => r.rhs <= eps_feas,
                Relation::Le => r.rhs >= -eps_feas,
                Relation::Eq => r.rhs.abs() <= eps_feas,
            };
            if !ok {
                return infeasible_empty_row(p, k);
            }
            continue;
        }
        let norm = coeffs
            .iter()
            .fold(F::zero(), |acc, &(_, a)| acc + (a / scale) * (a / scale))
            .sqrt();
        let mut push = |sign: F| {
            let a = coeffs.iter().map(|&(j, v)| (j, sign * v / scale)).collect();
            rows.push(Row {
                a,
                b: sign * r.rhs / scale,
                norm,
                origin: Some((k, sign / scale)),
            });
        };
        match r.relation {
            Relation::Ge => push(F::one()),
            Relation::Le => push(-F::one()),
            Relation::Eq => {
                push(F::one());
                push(-F::one());
            }
        }
    }
    let sign = if p.sense == Sense::Maximize {
        -F::one()
    } else {
        F::one()
    };
    let c: Vec<F> = p.objective.iter().map(|&v| sign * v).collect();
    let cmax = c.iter().fold(F::one(), |acc, &v| acc.max(v.abs()));
    let delta = F::cast(opts.perturbation).max(F::machine_eps() * F::cast(64.0)) * cmax;
    let cp: Vec<F> = c
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let xi = delta * F::cast(perturbation(j));
            if v >= F::zero() {
                v + xi
            } else {
                v - xi
            }
        })
        .collect();

    let mut basis = Vec::with_capacity(n);
    let mut binv = Dense::zeros(n);
    for j in 0..n {
        let r = if cp[j] >= F::zero() { 2 * j } else { 2 * j + 1 };
        basis.push(r);
        binv.set(j, j, if r % 2 == 0 { F::one() } else { -F::one() });
    }
    let mut pos = vec![None; rows.len()];
    for (i, &r) in basis.iter().enumerate() {
        pos[r] = Some(i);
    }
    let total_rows = rows.len();
    let mut s = Simplex {
        n,
        rows,
        basis,
        pos,
        binv,
        x: vec![F::zero(); n],
        lambda: vec![F::zero(); n],
        feas_tol: F::cast(1e-10).max(F::machine_eps() * F::cast(100.0)),
        piv_tol: F::cast(1e-9).max(F::machine_eps() * F::cast(1e3)),
        iterations: 0,
        max_iterations: if opts.max_iterations > 0 {
            opts.max_iterations
        } else {
            50 * (n + total_rows) + 1000
        },
        refactor_every: opts.refactor_every.max(1),
        since_refactor: 0,
    };
    s.compute_x();
    s.compute_lambda(&cp);

    let mut status = match s.dual_phase(&cp) {
        Phase::Done => match s.primal_phase(&c) {
            Phase::Done => LpStatus::Optimal,
            Phase::Unbounded => LpStatus::Unbounded,
            _ => LpStatus::Stalled,
        },
        Phase::Infeasible(u) => {
            if let Some(ray) = user_ray(p, &s, &u) {
                return LpSolution {
                    status: LpStatus::Infeasible,
                    x: s.x.clone(),
                    objective: F::nan(),
                    iterations: s.iterations,
                    max_violation: p.max_violation(&s.x),
                    farkas: Some(ray),
                };
            }
            LpStatus::Stalled
        }
        _ => LpStatus::Stalled,
    };
    if status == LpStatus::Optimal {
        s.refactor(&c);
        // clip to the box; active bound rows are exact already
        for j in 0..n {
            s.x[j] = s.x[j].max(p.lower[j]).min(p.upper[j]);
        }
        if p.max_violation(&s.x) > eps_feas {
            status = LpStatus::Stalled;
        }
    }
    let objective = p.objective_value(&s.x);
    LpSolution {
        status,
        objective,
        iterations: s.iterations,
        max_violation: p.max_violation(&s.x),
        x: s.x,
        farkas: None,
    }
}

/// Maps an internal ray to user-row multipliers and verifies it from scratch.
fn user_ray<F: Real>(p: &LpProblem<F>, s: &Simplex<F>, u: &[F]) -> Option<FarkasRay<F>> {
    let mut mu = vec![F::zero(); p.rows.len()];
    for (r, &ur) in u.iter().enumerate() {
        if ur == F::zero() {
            continue;
        }
        if let Some((k, factor)) = s.rows[r].origin {
            mu[k] = mu[k] + ur * factor;
        }
    }
    let top = mu.iter().fold(F::zero(), |acc, &v| acc.max(v.abs()));
    if top == F::zero() {
        return None;
    }
    for v in mu.iter_mut() {
        *v = *v / top;
    }
    let margin = p.farkas_margin(&mu);
    let bscale = p
        .rows
        .iter()
        .zip(&mu)
        .fold(F::one(), |acc, (r, &m)| acc + (m * r.rhs).abs());
    (margin > s.feas_tol * F::cast(10.0) * bscale).then_some(FarkasRay {
        multipliers: mu,
        margin,
    })
}

fn infeasible_bounds<F: Real>(p: &LpProblem<F>, j: usize) -> LpSolution<F> {
    let _ = j;
    LpSolution {
        status: LpStatus::Infeasible,
        x: p.lower.clone(),
        objective: F::nan(),
        iterations: 0,
        max_violation: p.max_violation(&p.lower),
        farkas: Some(FarkasRay {
            multipliers: vec![F::zero(); p.rows.len()],
            margin: F::infinity(),
        }),
    }
}

fn infeasible_empty_row<F: Real>(p: &LpProblem<F>, k: usize) -> LpSolution<F> {
    let mut mu = vec![F::zero(); p.rows.len()];
    mu[k] = match p.rows[k].relation {
        Relation::Ge => F::one(),
        Relation::Le => -F::one(),
        Relation::Eq => p.rows[k].rhs.signum(),
    };
    let margin = p.farkas_margin(&mu);
    LpSolution {
        status: LpStatus::Infeasible,
        x: p.lower.clone(),
        objective: F::nan(),
        iterations: 0,
        max_violation: p.max_violation(&p.lower),
        farkas: Some(FarkasRay {
            multipliers: mu,
            margin,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable() {
        let mut p = LpProblem::new(Sense::Maximize, vec![1.0f64], vec![0.0], vec![5.0]);
        p.add_row(vec![(0, 1.0)], Relation::Le, 1.0);
        p.add_row(vec![(0, 1.0)], Relation::Ge, 0.0);
        let s = lp_solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn knapsack_lp() {
        let mut p = LpProblem::unit_box(Sense::Maximize, vec![2.0f64, 1.0]);
        p.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        let s = lp_solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9 && s.x[1].abs() < 1e-9);
    }

    #[test]
    fn set_cover_lp_of_running_example() {
        let mut p = LpProblem::unit_box(Sense::Minimize, vec![1.0f64, 1.0, 0.5]);
        p.add_row(vec![(0, 1.0)], Relation::Ge, 1.0);
        p.add_row(vec![(0, 1.0)], Relation::Ge, 1.0);
        p.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 1.0);
        p.add_row(vec![(1, 1.0), (2, 1.0)], Relation::Ge, 1.0);
        let s = lp_solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_with_verified_ray() {
        let mut p = LpProblem::unit_box(Sense::Minimize, vec![1.0, 1.0]);
        p.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 1.5);
        p.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        let s = lp_solve(&p);
        assert_eq!(s.status, LpStatus::Infeasible);
        let ray = s.farkas.unwrap();
        assert!(ray.margin > 0.0);
        assert!(p.farkas_margin(&ray.multipliers) > 0.0);
    }

    #[test]
    fn equality_rows_and_f32() {
        let mut p = LpProblem::<f32>::unit_box(Sense::Maximize, vec![1.0, 2.0, 3.0]);
        p.add_row(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 1.5);
        p.add_row(vec![(2, 1.0), (1, -1.0)], Relation::Le, 0.25);
        let s = lp_solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        // x2 - x1 <= 1/4 with x1 + x2 <= 3/2 gives x1 = 5/8, x2 = 7/8
        assert!(
            (s.objective - (1.25 + 2.625)).abs() < 1e-4,
            "{}",
            s.objective
        );
    }

    #[test]
    fn empty_row_contradiction() {
        let mut p = LpProblem::unit_box(Sense::Minimize, vec![0.0]);
        p.add_row(vec![(0, 0.0)], Relation::Ge, 1.0);
        assert_eq!(lp_solve(&p).status, LpStatus::Infeasible);
    }
}
