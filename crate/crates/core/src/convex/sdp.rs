//! Small dense SDP solver and a builder for moment relaxations.
//!
//! Problems are stated as: maximize `b·y` subject to affine matrix blocks
//! `F0 + Σ y_p F_p ⪰ 0` and affine scalars `h + g·y >= 0`. The solver is an
//! infeasible-start primal-dual interior-point method with the HKM search direction
//! and Mehrotra predictor-corrector steps; the returned `y` is the dual iterate.

use std::collections::HashMap;

use serde::Serialize;

use super::linalg::{
    cholesky, cholesky_inverse, cholesky_solve, congruence_by_inverse, symmetric_eigenvalues, Dense,
};
use super::moment::MomentVector;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::subset::{subsets_up_to, Subset};

pub const MAX_MATRIX_ORDER: usize = 400;

/// `F0 + Σ_p y_p F_p`, entries listed once per unordered position `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpBlock<F> {
    pub dim: usize,
    pub constant: Vec<(usize, usize, F)>,
    /// `(variable, i, j, coefficient)`.
    pub terms: Vec<(usize, usize, usize, F)>,
}

/// `constant + Σ coeff_p y_p >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpLinear<F> {
    pub coeffs: Vec<(usize, F)>,
    pub constant: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem<F> {
    pub num_vars: usize,
    pub objective: Vec<F>,
    pub objective_constant: F,
    pub blocks: Vec<SdpBlock<F>>,
    pub linear: Vec<SdpLinear<F>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    NonConvergence,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution<F> {
    pub status: SdpStatus,
    pub y: Vec<F>,
    pub objective: F,
    /// Largest violation of a scalar row at `y`.
    pub linear_residual: F,
    /// Smallest eigenvalue over all blocks at `y`.
    pub min_eigenvalue: F,
    pub iterations: usize,
    pub relative_gap: F,
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iterations: 100,
            tolerance: 1e-9,
        }
    }
}

impl<F: Real> SdpProblem<F> {
    pub fn new(num_vars: usize) -> Self {
        SdpProblem {
            num_vars,
            objective: vec![F::zero(); num_vars],
            objective_constant: F::zero(),
            blocks: Vec::new(),
            linear: Vec::new(),
        }
    }

    pub fn total_order(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    pub fn block_value(&self, k: usize, y: &[F]) -> Dense<F> {
        let b = &self.blocks[k];
        let mut m = Dense::zeros(b.dim);
        for &(i, j, v) in &b.constant {
            m.add_at(i, j, v);
            if i != j {
                m.add_at(j, i, v);
            }
        }
        for &(p, i, j, v) in &b.terms {
            m.add_at(i, j, v * y[p]);
            if i != j {
                m.add_at(j, i, v * y[p]);
            }
        }
        m
    }

    pub fn linear_value(&self, r: usize, y: &[F]) -> F {
        let l = &self.linear[r];
        l.coeffs
            .iter()
            .fold(l.constant, |acc, &(p, v)| acc + v * y[p])
    }

    pub fn objective_value(&self, y: &[F]) -> F {
        self.objective
            .iter()
            .zip(y)
            .fold(self.objective_constant, |acc, (&b, &v)| acc + b * v)
    }

    /// `(max scalar violation, min block eigenvalue)` at `y`.
    pub fn residuals(&self, y: &[F]) -> (F, F) {
        let lin =
            (0..self.linear.len()).fold(F::zero(), |acc, r| acc.max(-self.linear_value(r, y)));
        let eig = (0..self.blocks.len()).fold(F::infinity(), |acc, k| {
            acc.min(
                symmetric_eigenvalues(&self.block_value(k, y))
                    .first()
                    .copied()
                    .unwrap_or(F::infinity()),
            )
        });
        (lin, if eig.is_finite() { eig } else { F::zero() })
    }
}

struct Block<F> {
    c: Dense<F>,
    /// `(p, a, b, v)` over both triangles of `A_p = -F_p`.
    entries: Vec<(usize, usize, usize, F)>,
}

struct Scalar<F> {
    c: F,
    a: Vec<(usize, F)>,
}

struct Ipm<F> {
    m: usize,
    b: Vec<F>,
    blocks: Vec<Block<F>>,
    scalars: Vec<Scalar<F>>,
}

struct Point<F> {
    xs: Vec<Dense<F>>,
    zs: Vec<Dense<F>>,
    xl: Vec<F>,
    zl: Vec<F>,
    y: Vec<F>,
}

struct Direction<F> {
    dx: Vec<Dense<F>>,
    dz: Vec<Dense<F>>,
    dxl: Vec<F>,
    dzl: Vec<F>,
    dy: Vec<F>,
}

fn max_step<F: Real>(x: &Dense<F>, dx: &Dense<F>) -> F {
    match cholesky(x) {
        Some(l) => {
            let t = congruence_by_inverse(&l, dx);
            let lo = symmetric_eigenvalues(&t)
                .first()
                .copied()
                .unwrap_or_else(F::zero);
            if lo >= F::zero() {
                F::infinity()
            } else {
                -F::one() / lo
            }
        }
        None => F::zero(),
    }
}

impl<F: Real> Ipm<F> {
    fn from_problem(p: &SdpProblem<F>) -> Self {
        let blocks = p
            .blocks
            .iter()
            .map(|blk| {
                let mut c = Dense::zeros(blk.dim);
                for &(i, j, v) in &blk.constant {
                    c.add_at(i, j, v);
                    if i != j {
                        c.add_at(j, i, v);
                    }
                }
                let mut entries = Vec::with_capacity(2 * blk.terms.len());
                for &(q, i, j, v) in &blk.terms {
                    entries.push((q, i, j, -v));
                    if i != j {
                        entries.push((q, j, i, -v));
                    }
                }
                Block { c, entries }
            })
            .collect();
        let scalars = p
            .linear
            .iter()
            .map(|l| Scalar {
                c: l.constant,
                a: l.coeffs.iter().map(|&(q, v)| (q, -v)).collect(),
            })
            .collect();
        Ipm {
            m: p.num_vars,
            b: p.objective.clone(),
            blocks,
            scalars,
        }
    }

    /// `𝒜(G)_p = Σ A_p • G`, with scalar-block contributions `g_l`.
    fn apply(&self, gs: &[Dense<F>], gl: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.m];
        for (blk, g) in self.blocks.iter().zip(gs) {
            for &(p, a, b, v) in &blk.entries {
                out[p] = out[p] + v * g.get(a, b);
            }
        }
        for (s, &g) in self.scalars.iter().zip(gl) {
            for &(p, v) in &s.a {
                out[p] = out[p] + v * g;
            }
        }
        out
    }

    /// `Σ_p y_p A_p` per block.
    fn adjoint(&self, y: &[F]) -> (Vec<Dense<F>>, Vec<F>) {
        let mats = self
            .blocks
            .iter()
            .map(|blk| {
                let mut m = Dense::zeros(blk.c.n);
                for &(p, a, b, v) in &blk.entries {
                    m.add_at(a, b, v * y[p]);
                }
                m
            })
            .collect();
        let sc = self
            .scalars
            .iter()
            .map(|s| s.a.iter().fold(F::zero(), |acc, &(p, v)| acc + v * y[p]))
            .collect();
        (mats, sc)
    }

    fn nu(&self) -> F {
        F::cast(
            (self.blocks.iter().map(|b| b.c.n).sum::<usize>() + self.scalars.len()).max(1) as f64,
        )
    }

    fn mu(&self, pt: &Point<F>) -> F {
        let s = pt
            .xs
            .iter()
            .zip(&pt.zs)
            .fold(F::zero(), |acc, (x, z)| acc + x.dot(z));
        let s = pt
            .xl
            .iter()
            .zip(&pt.zl)
            .fold(s, |acc, (&x, &z)| acc + x * z);
        s / self.nu()
    }

    fn solve(&self, opts: &SdpOptions) -> (Vec<F>, SdpStatus, usize, F) {
        let tol = F::cast(opts.tolerance).max(F::machine_eps().sqrt() * F::cast(10.0));
        let bnorm = self.b.iter().fold(F::zero(), |acc, &v| acc + v * v).sqrt();
        let cnorm = self
            .blocks
            .iter()
            .fold(F::zero(), |acc, b| acc + b.c.dot(&b.c))
            .add(
                self.scalars
                    .iter()
                    .fold(F::zero(), |acc, s| acc + s.c * s.c),
            )
            .sqrt();
        let sqrt_nu = self.nu().sqrt();
        let xi = F::cast(10.0).max(sqrt_nu).max(F::one() + bnorm);
        let eta = F::cast(10.0).max(sqrt_nu).max(F::one() + cnorm);
        let mut pt = Point {
            xs: self
                .blocks
                .iter()
                .map(|b| Dense::scaled_identity(b.c.n, xi))
                .collect(),
            zs: self
                .blocks
                .iter()
                .map(|b| Dense::scaled_identity(b.c.n, eta))
                .collect(),
            xl: vec![xi; self.scalars.len()],
            zl: vec![eta; self.scalars.len()],
            y: vec![F::zero(); self.m],
        };
        let mut gap = F::infinity();
        for it in 0..opts.max_iterations {
            // residuals
            let (ay, ayl) = self.adjoint(&pt.y);
            let rd: Vec<Dense<F>> = self
                .blocks
                .iter()
                .zip(ay.iter().zip(&pt.zs))
                .map(|(blk, (a, z))| {
                    let mut r = blk.c.clone();
                    r.axpy(-F::one(), a);
                    r.axpy(-F::one(), z);
                    r
                })
                .collect();
            let rdl: Vec<F> = self
                .scalars
                .iter()
                .zip(ayl.iter().zip(&pt.zl))
                .map(|(s, (&a, &z))| s.c - a - z)
                .collect();
            let ax = self.apply(&pt.xs, &pt.xl);
            let rp: Vec<F> = self.b.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
            let pobj = self
                .blocks
                .iter()
                .zip(&pt.xs)
                .fold(F::zero(), |acc, (b, x)| acc + b.c.dot(x))
                + self
                    .scalars
                    .iter()
                    .zip(&pt.xl)
                    .fold(F::zero(), |acc, (s, &x)| acc + s.c * x);
            let dobj = self
                .b
                .iter()
                .zip(&pt.y)
                .fold(F::zero(), |acc, (&b, &y)| acc + b * y);
            let pinf = rp.iter().fold(F::zero(), |acc, &v| acc + v * v).sqrt() / (F::one() + bnorm);
            let dinf = (rd.iter().fold(F::zero(), |acc, r| acc + r.dot(r))
                + rdl.iter().fold(F::zero(), |acc, &v| acc + v * v))
            .sqrt()
                / (F::one() + cnorm);
            gap = (pobj - dobj).abs() / (F::one() + pobj.abs() + dobj.abs());
            if gap < tol && pinf < tol && dinf < tol {
                return (pt.y, SdpStatus::Optimal, it, gap);
            }
            let ynorm = pt.y.iter().fold(F::zero(), |acc, &v| acc.max(v.abs()));
            let xnorm = pt
                .xs
                .iter()
                .fold(F::zero(), |acc, x| acc.max(x.frobenius()));
            let big = F::cast(1e10);
            if ynorm > big * (F::one() + cnorm) || xnorm > big * (F::one() + bnorm) {
                return (pt.y, SdpStatus::Infeasible, it, gap);
            }
            let mu = self.mu(&pt);

            // Z^{-1} and the Schur complement
            let mut ws = Vec::with_capacity(self.blocks.len());
            for z in &pt.zs {
                match cholesky(z) {
                    Some(l) => ws.push(cholesky_inverse(&l)),
                    None => return (pt.y, SdpStatus::NonConvergence, it, gap),
                }
            }
            let wl: Vec<F> = pt.zl.iter().map(|&z| F::one() / z).collect();
            let mut schur = Dense::zeros(self.m);
            for ((blk, x), w) in self.blocks.iter().zip(&pt.xs).zip(&ws) {
                for &(p, a, b, v) in &blk.entries {
                    for &(q, c, d, u) in &blk.entries {
                        if q < p {
                            continue;
                        }
                        schur.add_at(p, q, v * u * x.get(b, c) * w.get(d, a));
                    }
                }
            }
            for ((s, &x), &w) in self.scalars.iter().zip(&pt.xl).zip(&wl) {
                for &(p, v) in &s.a {
                    for &(q, u) in &s.a {
                        if q >= p {
                            schur.add_at(p, q, v * u * x * w);
                        }
                    }
                }
            }
            for p in 0..self.m {
                for q in 0..p {
                    let v = schur.get(q, p);
                    schur.set(p, q, v);
                }
            }
            let mut chol = cholesky(&schur);
            let mut reg = F::machine_eps() * F::cast(10.0);
            let diag_max = (0..self.m).fold(F::one(), |acc, p| acc.max(schur.get(p, p).abs()));
            while chol.is_none() && reg < F::cast(1e-2) {
                let mut s2 = schur.clone();
                for p in 0..self.m {
                    s2.add_at(p, p, reg * diag_max);
                }
                chol = cholesky(&s2);
                reg = reg * F::cast(100.0);
            }
            let Some(lm) = chol else {
                return (pt.y, SdpStatus::NonConvergence, it, gap);
            };

            // X Rd W per block, reused by both steps
            let xrdw: Vec<Dense<F>> = pt
                .xs
                .iter()
                .zip(&rd)
                .zip(&ws)
                .map(|((x, r), w)| x.mul(r).mul(w))
                .collect();
            let xrdwl: Vec<F> = pt
                .xl
                .iter()
                .zip(&rdl)
                .zip(&wl)
                .map(|((&x, &r), &w)| x * r * w)
                .collect();

            let direction = |sigma_mu: F, k: Option<(&[Dense<F>], &[F])>| -> Direction<F> {
                let mut gs: Vec<Dense<F>> = ws
                    .iter()
                    .map(|w| {
                        let mut g = w.clone();
                        for v in g.data.iter_mut() {
                            *v = *v * -sigma_mu;
                        }
                        g
                    })
                    .collect();
                let mut gl: Vec<F> = wl.iter().map(|&w| -sigma_mu * w).collect();
                for (g, t) in gs.iter_mut().zip(&xrdw) {
                    g.axpy(F::one(), t);
                }
                for (g, &t) in gl.iter_mut().zip(&xrdwl) {
                    *g = *g + t;
                }
                if let Some((km, kl)) = k {
                    for (g, t) in gs.iter_mut().zip(km) {
                        g.axpy(F::one(), t);
                    }
                    for (g, &t) in gl.iter_mut().zip(kl) {
                        *g = *g + t;
                    }
                }
                let ag = self.apply(&gs, &gl);
                let rhs: Vec<F> = self.b.iter().zip(&ag).map(|(&b, &a)| b + a).collect();
                let dy = cholesky_solve(&lm, &rhs);
                let (ady, adyl) = self.adjoint(&dy);
                let dz: Vec<Dense<F>> = rd
                    .iter()
                    .zip(&ady)
                    .map(|(r, a)| {
                        let mut d = r.clone();
                        d.axpy(-F::one(), a);
                        d
                    })
                    .collect();
                let dzl: Vec<F> = rdl.iter().zip(&adyl).map(|(&r, &a)| r - a).collect();
                let dx: Vec<Dense<F>> = (0..self.blocks.len())
                    .map(|kb| {
                        let w = &ws[kb];
                        let x = &pt.xs[kb];
                        let mut d = w.clone();
                        for v in d.data.iter_mut() {
                            *v = *v * sigma_mu;
                        }
                        d.axpy(-F::one(), x);
                        d.axpy(-F::one(), &x.mul(&dz[kb]).mul(w));
                        if let Some((km, _)) = k {
                            d.axpy(-F::one(), &km[kb]);
                        }
                        d.symmetrize();
                        d
                    })
                    .collect();
                let dxl: Vec<F> = (0..self.scalars.len())
                    .map(|r| {
                        let mut d = sigma_mu * wl[r] - pt.xl[r] - pt.xl[r] * dzl[r] * wl[r];
                        if let Some((_, kl)) = k {
                            d = d - kl[r];
                        }
                        d
                    })
                    .collect();
                Direction {
                    dx,
                    dz,
                    dxl,
                    dzl,
                    dy,
                }
            };
            let steps = |d: &Direction<F>| -> (F, F) {
                let mut ap = F::infinity();
                let mut ad = F::infinity();
                for (x, dx) in pt.xs.iter().zip(&d.dx) {
                    ap = ap.min(max_step(x, dx));
                }
                for (z, dz) in pt.zs.iter().zip(&d.dz) {
                    ad = ad.min(max_step(z, dz));
                }
                for (&x, &dx) in pt.xl.iter().zip(&d.dxl) {
                    if dx < F::zero() {
                        ap = ap.min(-x / dx);
                    }
                }
                for (&z, &dz) in pt.zl.iter().zip(&d.dzl) {
                    if dz < F::zero() {
                        ad = ad.min(-z / dz);
                    }
                }
                (ap, ad)
            };

            // predictor
            let pred = direction(F::zero(), None);
            let (ap, ad) = steps(&pred);
            let (ap1, ad1) = (ap.min(F::one()), ad.min(F::one()));
            let mut s = F::zero();
            for kb in 0..self.blocks.len() {
                let mut x = pt.xs[kb].clone();
                x.axpy(ap1, &pred.dx[kb]);
                let mut z = pt.zs[kb].clone();
                z.axpy(ad1, &pred.dz[kb]);
                s = s + x.dot(&z);
            }
            for r in 0..self.scalars.len() {
                s = s + (pt.xl[r] + ap1 * pred.dxl[r]) * (pt.zl[r] + ad1 * pred.dzl[r]);
            }
            let mu_aff = s / self.nu();
            let ratio = (mu_aff / mu).max(F::zero()).min(F::one());
            let sigma = ratio * ratio * ratio;

            // corrector
            let km: Vec<Dense<F>> = (0..self.blocks.len())
                .map(|kb| pred.dx[kb].mul(&pred.dz[kb]).mul(&ws[kb]))
                .collect();
            let kl: Vec<F> = (0..self.scalars.len())
                .map(|r| pred.dxl[r] * pred.dzl[r] * wl[r])
                .collect();
            let dir = direction(sigma * mu, Some((&km, &kl)));
            let (ap, ad) = steps(&dir);
            let damp = F::cast(0.95);
            let ap = (damp * ap).min(F::one());
            let ad = (damp * ad).min(F::one());
            for kb in 0..self.blocks.len() {
                pt.xs[kb].axpy(ap, &dir.dx[kb]);
                pt.zs[kb].axpy(ad, &dir.dz[kb]);
            }
            for r in 0..self.scalars.len() {
                pt.xl[r] = pt.xl[r] + ap * dir.dxl[r];
                pt.zl[r] = pt.zl[r] + ad * dir.dzl[r];
            }
            for p in 0..self.m {
                pt.y[p] = pt.y[p] + ad * dir.dy[p];
            }
        }
        (pt.y, SdpStatus::NonConvergence, opts.max_iterations, gap)
    }
}

pub fn sdp_solve<F: Real>(p: &SdpProblem<F>) -> Result<SdpSolution<F>> {
    sdp_solve_with(p, &SdpOptions::default())
}

pub fn sdp_solve_with<F: Real>(p: &SdpProblem<F>, opts: &SdpOptions) -> Result<SdpSolution<F>> {
    if p.total_order() > MAX_MATRIX_ORDER * 64 || p.blocks.iter().any(|b| b.dim > MAX_MATRIX_ORDER)
    {
        return Err(Error::SizeLimit(format!(
            "SDP blocks exceed order {MAX_MATRIX_ORDER}"
        )));
    }
    if p.num_vars == 0 {
        let (lin, eig) = p.residuals(&[]);
        let ok = lin <= F::zero() && eig >= F::zero();
        return Ok(SdpSolution {
            status: if ok {
                SdpStatus::Optimal
            } else {
                SdpStatus::Infeasible
            },
            y: Vec::new(),
            objective: p.objective_constant,
            linear_residual: lin,
            min_eigenvalue: eig,
            iterations: 0,
            relative_gap: F::zero(),
        });
    }
    let ipm = Ipm::from_problem(p);
    let (y, status, iterations, gap) = ipm.solve(opts);
    let (lin, eig) = p.residuals(&y);
    Ok(SdpSolution {
        status,
        objective: p.objective_value(&y),
        y,
        linear_residual: lin,
        min_eigenvalue: eig,
        iterations,
        relative_gap: gap,
    })
}

/// A moment relaxation: each subset of size `<= level` is either fixed or an SDP variable.
#[derive(Clone, Debug)]
pub struct MomentSdp<F> {
    pub n: usize,
    pub level: usize,
    pub problem: SdpProblem<F>,
    var: HashMap<Subset, usize>,
    fixed: HashMap<Subset, F>,
}

/// `Σ coeff · y_A`.
pub type MomentExpr<F> = Vec<(Subset, F)>;

impl<F: Real> MomentSdp<F> {
    /// `fixed(A)` pins a moment to a constant; `y_∅` is always 1.
    pub fn new(n: usize, level: usize, mut fixed: impl FnMut(Subset) -> Option<F>) -> Self {
        let mut var = HashMap::new();
        let mut fx = HashMap::new();
        fx.insert(Subset::EMPTY, F::one());
        for s in subsets_up_to(n, level).into_iter().skip(1) {
            match fixed(s) {
                Some(v) => {
                    fx.insert(s, v);
                }
                None => {
                    let k = var.len();
                    var.insert(s, k);
                }
            }
        }
        let problem = SdpProblem::new(var.len());
        MomentSdp {
            n,
            level,
            problem,
            var,
            fixed: fx,
        }
    }

    pub fn variable(&self, s: Subset) -> Option<usize> {
        self.var.get(&s).copied()
    }

    pub fn fixed_value(&self, s: Subset) -> Option<F> {
        self.fixed.get(&s).copied()
    }

    /// Splits an expression into variable coefficients and a constant.
    fn lower(&self, e: &[(Subset, F)]) -> (Vec<(usize, F)>, F) {
        let mut coeffs: Vec<(usize, F)> = Vec::new();
        let mut c = F::zero();
        for &(s, v) in e {
            if let Some(&p) = self.var.get(&s) {
                match coeffs.iter_mut().find(|t| t.0 == p) {
                    Some(t) => t.1 = t.1 + v,
                    None => coeffs.push((p, v)),
                }
            } else {
                let f = self
                    .fixed
                    .get(&s)
                    .unwrap_or_else(|| panic!("moment {s:?} is outside the relaxation"));
                c = c + v * *f;
            }
        }
        coeffs.retain(|t| t.1 != F::zero());
        (coeffs, c)
    }

    pub fn set_objective(&mut self, e: &[(Subset, F)]) {
        let (coeffs, c) = self.lower(e);
        self.problem.objective = vec![F::zero(); self.problem.num_vars];
        for (p, v) in coeffs {
            self.problem.objective[p] = v;
        }
        self.problem.objective_constant = c;
    }

    /// Adds `e >= 0`; returns false when the row is constant (and then only checks it).
    pub fn add_linear(&mut self, e: &[(Subset, F)]) -> bool {
        let (coeffs, c) = self.lower(e);
        if coeffs.is_empty() {
            return false;
        }
        self.problem.linear.push(SdpLinear {
            coeffs,
            constant: c,
        });
        true
    }

    /// Requires the matrix with entries `y_{base ∪ A ∪ B}` over `labels` to be PSD.
    pub fn add_moment_block(&mut self, base: Subset, labels: &[Subset]) {
        let d = labels.len();
        let mut blk = SdpBlock {
            dim: d,
            constant: Vec::new(),
            terms: Vec::new(),
        };
        for i in 0..d {
            for j in i..d {
                let s = base.union(labels[i]).union(labels[j]);
                let (coeffs, c) = self.lower(&[(s, F::one())]);
                if c != F::zero() {
                    blk.constant.push((i, j, c));
                }
                for (p, v) in coeffs {
                    blk.terms.push((p, i, j, v));
                }
            }
        }
        self.problem.blocks.push(blk);
    }

    pub fn moments(&self, y: &[F]) -> MomentVector<F> {
        MomentVector::from_fn(self.n, self.level, |s| match self.var.get(&s) {
            Some(&p) => y[p],
            None => self.fixed[&s],
        })
    }

    pub fn solve(&self) -> Result<(MomentVector<F>, SdpSolution<F>)> {
        let sol = sdp_solve(&self.problem)?;
        Ok((self.moments(&sol.y), sol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_determinant() {
        // maximize t s.t. [[1, t], [t, 1]] ⪰ 0
        let mut p = SdpProblem::<f64>::new(1);
        p.objective[0] = 1.0;
        p.blocks.push(SdpBlock {
            dim: 2,
            constant: vec![(0, 0, 1.0), (1, 1, 1.0)],
            terms: vec![(0, 0, 1, 1.0)],
        });
        let s = sdp_solve(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.y[0] - 1.0).abs() < 1e-5, "{:?}", s);
        assert!(s.min_eigenvalue >= -1e-6);
    }

    #[test]
    fn order_two_moment_matrix() {
        let mut m = MomentSdp::<f64>::new(1, 2, |_| None);
        let one = Subset::singleton(0);
        m.add_moment_block(Subset::EMPTY, &subsets_up_to(1, 1));
        m.add_linear(&[(Subset::EMPTY, 1.0), (one, -1.0)]);
        m.set_objective(&[(one, 1.0)]);
        let (y, s) = m.solve().unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((y.x(0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pure_lp_and_infeasible() {
        // maximize y0 + y1 with y0 + 2 y1 <= 2, 0 <= y <= 1: optimum 3/2
        let mut p = SdpProblem::<f64>::new(2);
        p.objective = vec![1.0, 1.0];
        p.linear.push(SdpLinear {
            coeffs: vec![(0, -1.0), (1, -2.0)],
            constant: 2.0,
        });
        for q in 0..2 {
            p.linear.push(SdpLinear {
                coeffs: vec![(q, 1.0)],
                constant: 0.0,
            });
            p.linear.push(SdpLinear {
                coeffs: vec![(q, -1.0)],
                constant: 1.0,
            });
        }
        let s = sdp_solve(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective - 1.5).abs() < 1e-6);

        let mut q = SdpProblem::<f64>::new(1);
        q.objective[0] = 1.0;
        q.linear.push(SdpLinear {
            coeffs: vec![(0, 1.0)],
            constant: -2.0,
        });
        q.linear.push(SdpLinear {
            coeffs: vec![(0, -1.0)],
            constant: 1.0,
        });
        assert_ne!(sdp_solve(&q).unwrap().status, SdpStatus::Optimal);
    }

    #[test]
    fn f32_instance() {
        let mut p = SdpProblem::<f32>::new(1);
        p.objective[0] = 1.0;
        p.blocks.push(SdpBlock {
            dim: 2,
            constant: vec![(0, 0, 1.0), (1, 1, 1.0)],
            terms: vec![(0, 0, 1, 1.0)],
        });
        let s = sdp_solve(&p).unwrap();
        assert!((s.y[0] - 1.0).abs() < 1e-2, "{:?}", s);
    }
}
