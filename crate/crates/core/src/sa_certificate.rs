//! Sherali-Adams lifting, the symmetric factorial-ratio certificate for uniform-frequency
//! Set Cover, its exact verification, and the integrality-gap experiment.
//!
//! Everything here is exact: no floating point enters a verdict.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{exact_setcover_opt, gen_with_fallback, GenerationConfig, SetCoverInstance};
use crate::rational::{self, binomial, int, Rational};
use crate::subset::{disjoint_pairs, Subset};

/// `Σ a_i x_i >= rhs` over 0-1 variables.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// `Σ coeff · y_A >= 0`, the lift of base row `base` by the pair `(P, E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedRow {
    pub base: usize,
    pub p: Subset,
    pub e: Subset,
    /// Sorted by subset, zero coefficients removed.
    pub terms: Vec<(Subset, Rational)>,
}

impl LiftedRow {
    pub fn evaluate(&self, y: impl Fn(Subset) -> Rational) -> Rational {
        self.terms
            .iter()
            .fold(Rational::zero(), |acc, (s, c)| acc + c * y(*s))
    }

    /// True when every `y` satisfies the row, i.e. there are no terms left.
    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `x_i >= 0` and `-x_i >= -1` for every variable, in that order.
pub fn box_rows(n: usize) -> Vec<BaseRow> {
    (0..n)
        .flat_map(|i| {
            [
                BaseRow {
                    coeffs: vec![(i, int(1))],
                    rhs: int(0),
                },
                BaseRow {
                    coeffs: vec![(i, int(-1))],
                    rhs: int(-1),
                },
            ]
        })
        .collect()
}

/// `Σ_{T ⊆ E} (-1)^{|T|} y_{P ∪ T ∪ extra}` added into `acc` with factor `c`.
fn add_atom(
    acc: &mut BTreeMap<Subset, Rational>,
    p: Subset,
    e: Subset,
    extra: Subset,
    c: &Rational,
) {
    for t in e.subsets() {
        let key = p.union(t).union(extra);
        let v = if t.len() % 2 == 0 {
            c.clone()
        } else {
            -c.clone()
        };
        *acc.entry(key).or_insert_with(Rational::zero) += v;
    }
}

/// Number of disjoint pairs `(P, E)` over `n` variables with `|P| + |E| <= level`.
pub fn pair_count(n: usize, level: usize) -> u64 {
    (0..=level.min(n))
        .map(|k| rational::binomial_u64(n, k).saturating_mul(1 << k))
        .sum()
}

pub const DEFAULT_LIFT_BUDGET: u64 = 20_000_000;

/// The level-`level` lift: for every base row and every disjoint `(P, E)` with
/// `|P| + |E| <= level`, the row
/// `Σ_i a_i Σ_{T⊆E} (-1)^{|T|} y_{P∪T∪{i}} - b Σ_{T⊆E} (-1)^{|T|} y_{P∪T} >= 0`.
///
/// Rows are emitted pair-major in [`disjoint_pairs`] order; nothing is deduplicated.
/// `budget` bounds the total number of generated terms.
pub fn sa_lift(n: usize, rows: &[BaseRow], level: usize, budget: u64) -> Result<Vec<LiftedRow>> {
    let pairs = pair_count(n, level);
    let width: u64 = rows.iter().map(|r| r.coeffs.len() as u64 + 1).sum();
    let estimate = pairs
        .saturating_mul(width)
        .saturating_mul(1 << level.min(n).min(40));
    if estimate > budget {
        return Err(Error::SizeLimit(format!(
            "level-{level} lift over {n} variables needs about {estimate} terms"
        )));
    }
    let mut out = Vec::with_capacity((pairs as usize).saturating_mul(rows.len()));
    for (p, e) in disjoint_pairs(n, level) {
        for (k, row) in rows.iter().enumerate() {
            let mut acc = BTreeMap::new();
            for (i, a) in &row.coeffs {
                add_atom(&mut acc, p, e, Subset::singleton(*i), a);
            }
            add_atom(&mut acc, p, e, Subset::EMPTY, &-row.rhs.clone());
            let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            out.push(LiftedRow {
                base: k,
                p,
                e,
                terms,
            });
        }
    }
    Ok(out)
}

/// `f`, `level` and the number of variables `n` of a symmetric certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SaParams {
    pub f: usize,
    pub level: usize,
    pub n: usize,
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        if self.f < 3 * self.level {
            return Err(Error::Invalid(format!(
                "need f >= 3 level, got f={} level={}",
                self.f, self.level
            )));
        }
        if self.f < self.level + 1 {
            return Err(Error::Invalid(format!(
                "need f >= level + 1, got f={} level={}",
                self.f, self.level
            )));
        }
        if self.f > self.n {
            return Err(Error::Invalid(format!(
                "frequency {} exceeds the {} sets",
                self.f, self.n
            )));
        }
        Ok(())
    }

    fn base(&self) -> u64 {
        (self.f - self.level - 1) as u64
    }
}

/// `(f-ℓ-1)! / (f-ℓ-1+a)!` for any `a`, computed as a falling product.
pub fn certificate_value(params: &SaParams, a: usize) -> Result<Rational> {
    params.validate()?;
    if a > params.level + 1 {
        return Err(Error::Invalid(format!(
            "subset size {a} exceeds level + 1 = {}",
            params.level + 1
        )));
    }
    Ok(factorial_ratio(params.base(), a))
}

fn factorial_ratio(base: u64, a: usize) -> Rational {
    let den = (1..=a as u64).fold(num_bigint::BigInt::one(), |acc, k| acc * (base + k));
    Rational::new(num_bigint::BigInt::one(), den)
}

/// The certificate `y_A = table[|A|]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaCertificate {
    pub params: SaParams,
    #[serde(with = "rational::as_string::vec")]
    pub table: Vec<Rational>,
}

impl SaCertificate {
    pub fn new(params: SaParams) -> Result<Self> {
        params.validate()?;
        let table = (0..=params.level + 1)
            .map(|a| factorial_ratio(params.base(), a))
            .collect();
        Ok(SaCertificate { params, table })
    }

    pub fn value(&self, a: Subset) -> Rational {
        self.table[a.len()].clone()
    }

    /// `Σ_{t<=e} (-1)^t C(e,t) table[p+t]`.
    pub fn h(&self, e: usize, p: usize) -> Rational {
        alternating(&self.table, e, p)
    }

    /// A copy with entry `a` multiplied by `factor`.
    pub fn mutated(&self, a: usize, factor: &Rational) -> Self {
        let mut c = self.clone();
        c.table[a] = &c.table[a] * factor;
        c
    }
}

fn alternating(table: &[Rational], e: usize, p: usize) -> Rational {
    (0..=e).fold(Rational::zero(), |acc, t| {
        let term = Rational::from_integer(binomial(e as u64, t as u64)) * &table[p + t];
        if t % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

/// `H_{e,p} = Σ_{t<=e} (-1)^t C(e,t) (f-ℓ-1)!/(f-ℓ-1+p+t)!`, for any `e, p`.
pub fn h_ep(params: &SaParams, e: usize, p: usize) -> Result<Rational> {
    params.validate()?;
    let table: Vec<Rational> = (0..=p + e)
        .map(|a| factorial_ratio(params.base(), a))
        .collect();
    Ok(alternating(&table, e, p))
}

fn inv_factorial(x: u64) -> Rational {
    Rational::new(num_bigint::BigInt::one(), rational::factorial(x))
}

/// `Σ_{t<=e} (-1)^t C(e,t) / (x+t)!`.
pub fn box_sum(x: u64, e: usize) -> Rational {
    (0..=e).fold(Rational::zero(), |acc, t| {
        let term =
            Rational::from_integer(binomial(e as u64, t as u64)) * inv_factorial(x + t as u64);
        if t % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    #[serde(with = "rational::as_string")]
    pub value: Rational,
}

/// `0 <= Σ_t (-1)^t C(e,t)/(x+t)! <= 1/(x-p)!`, requiring `3x >= 5e` and `x >= p`.
pub fn check_box_inequality(x: u64, e: usize, p: usize) -> Result<BoundCheck> {
    if 3 * x < 5 * e as u64 {
        return Err(Error::Invalid(format!(
            "box bound needs 3x >= 5e, got x={x} e={e}"
        )));
    }
    if x < p as u64 {
        return Err(Error::Invalid(format!(
            "box bound needs x >= p, got x={x} p={p}"
        )));
    }
    Ok(box_bounds(x, e, p))
}

fn box_bounds(x: u64, e: usize, p: usize) -> BoundCheck {
    let value = box_sum(x, e);
    let holds = !value.is_negative() && value <= inv_factorial(x - p as u64);
    BoundCheck { holds, value }
}

/// Slack `(f-e) H_{e,p+1} - H_{e,p}`, requiring `e < f - ℓ` and `p + e <= ℓ`.
pub fn check_cover_inequality(params: &SaParams, e: usize, p: usize) -> Result<BoundCheck> {
    params.validate()?;
    if e >= params.f - params.level {
        return Err(Error::Invalid(format!(
            "cover bound needs e < f - level, got e={e}"
        )));
    }
    if p + e > params.level {
        return Err(Error::Invalid(format!(
            "cover bound needs p + e <= level, got p={p} e={e}"
        )));
    }
    let value = int((params.f - e) as i64) * h_ep(params, e, p + 1)? - h_ep(params, e, p)?;
    Ok(BoundCheck {
        holds: !value.is_negative(),
        value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Direct,
    Symmetric,
    Both,
    Auto,
}

impl VerifyMode {
    /// Direct enumeration for at most 12 sets and level at most 2.
    pub fn resolve(self, n: usize, level: usize) -> VerifyMode {
        match self {
            VerifyMode::Auto if n <= 12 && level <= 2 => VerifyMode::Direct,
            VerifyMode::Auto => VerifyMode::Symmetric,
            m => m,
        }
    }
}

impl std::str::FromStr for VerifyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(VerifyMode::Direct),
            "symmetric" => Ok(VerifyMode::Symmetric),
            "both" => Ok(VerifyMode::Both),
            "auto" => Ok(VerifyMode::Auto),
            _ => Err(Error::Parse(format!("unknown verification mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub row: String,
    #[serde(with = "rational::as_string")]
    pub value: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} row {} evaluates to {}",
            self.kind, self.row, self.value
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeVerdict {
    pub feasible: bool,
    pub rows_checked: u64,
    pub violation: Option<Violation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub mode: VerifyMode,
    pub feasible: bool,
    pub direct: Option<ModeVerdict>,
    pub symmetric: Option<ModeVerdict>,
    /// Present when both modes ran.
    pub modes_agree: Option<bool>,
}

impl Verification {
    pub fn violation(&self) -> Option<&Violation> {
        self.direct
            .as_ref()
            .and_then(|d| d.violation.as_ref())
            .or(self.symmetric.as_ref().and_then(|s| s.violation.as_ref()))
    }
}

/// The common frequency of every item, or an error if frequencies differ.
pub fn uniform_frequency(inst: &SetCoverInstance) -> Result<usize> {
    let freq = inst.frequencies();
    match freq.first() {
        Some(&f) if freq.iter().all(|&g| g == f) => Ok(f),
        Some(_) => Err(Error::Invalid(
            "items do not all have the same frequency".into(),
        )),
        None => Err(Error::Invalid("empty universe".into())),
    }
}

fn cover_rows(inst: &SetCoverInstance) -> Vec<BaseRow> {
    (0..inst.n())
        .map(|i| BaseRow {
            coeffs: inst
                .sets_containing(i)
                .into_iter()
                .map(|s| (s, int(1)))
                .collect(),
            rhs: int(1),
        })
        .collect()
}

fn label(p: Subset, e: Subset) -> String {
    format!("P={} E={}", p.label(), e.label())
}

/// Substitutes `y` into every lifted cover and box row, every atom
/// `0 <= Σ_{T⊆E} (-1)^{|T|} y_{P∪T} <= 1` with `|P| + |E| <= level + 1`, and `y_∅ = 1`.
pub fn verify_direct(
    inst: &SetCoverInstance,
    level: usize,
    y: &(dyn Fn(Subset) -> Rational + Sync),
) -> Result<ModeVerdict> {
    let m = inst.m();
    let mut rows_checked = 1;
    let y0 = y(Subset::EMPTY);
    if !y0.is_one() {
        return Ok(ModeVerdict {
            feasible: false,
            rows_checked,
            violation: Some(Violation {
                kind: "normalization".into(),
                row: "y_{}".into(),
                value: y0,
            }),
        });
    }
    let mut base = cover_rows(inst);
    let covers = base.len();
    base.extend(box_rows(m));
    let lifted = sa_lift(m, &base, level, DEFAULT_LIFT_BUDGET)?;
    rows_checked += lifted.len() as u64;
    let bad = lifted
        .par_iter()
        .find_first(|r| r.evaluate(y).is_negative());
    if let Some(r) = bad {
        let kind = if r.base < covers {
            format!("lifted cover (item {})", r.base)
        } else {
            format!("lifted box (var {})", (r.base - covers) / 2)
        };
        return Ok(ModeVerdict {
            feasible: false,
            rows_checked,
            violation: Some(Violation {
                kind,
                row: label(r.p, r.e),
                value: r.evaluate(y),
            }),
        });
    }
    let atoms = disjoint_pairs(m, level + 1);
    rows_checked += 2 * atoms.len() as u64;
    let bad = atoms.par_iter().find_map_first(|&(p, e)| {
        let v = e.subsets().fold(Rational::zero(), |acc, t| {
            if t.len() % 2 == 0 {
                acc + y(p.union(t))
            } else {
                acc - y(p.union(t))
            }
        });
        if v.is_negative() {
            Some(Violation {
                kind: "atom lower bound".into(),
                row: label(p, e),
                value: v,
            })
        } else if v > Rational::one() {
            Some(Violation {
                kind: "atom upper bound".into(),
                row: label(p, e),
                value: v,
            })
        } else {
            None
        }
    });
    Ok(ModeVerdict {
        feasible: bad.is_none(),
        rows_checked,
        violation: bad,
    })
}

/// Checks the reduced forms that depend only on `|P|, |E|, |D∩P|, |D∩E|`.
pub fn verify_symmetric(cert: &SaCertificate, m: usize) -> ModeVerdict {
    let SaParams { f, level, .. } = cert.params;
    let mut rows_checked = 1;
    let fail = |kind: &str, row: String, value: Rational, rows_checked: u64| ModeVerdict {
        feasible: false,
        rows_checked,
        violation: Some(Violation {
            kind: kind.into(),
            row,
            value,
        }),
    };
    if !cert.table[0].is_one() {
        return fail(
            "normalization",
            "y_{}".into(),
            cert.table[0].clone(),
            rows_checked,
        );
    }
    let zero = Rational::zero();
    for size in 0..=level.min(m) {
        for p in 0..=size {
            let e = size - p;
            let hp = cert.h(e, p);
            // cover rows: the item's f sets D meet P in p1 and E in e1 places
            for p1 in 0..=p.min(f) {
                for e1 in 0..=e.min(f - p1) {
                    let (p0, e0) = (p - p1, e - e1);
                    if p0 + e0 > m - f {
                        continue;
                    }
                    rows_checked += 1;
                    let lhs = int((f - p1 - e1) as i64) * cert.h(e, p + 1) + int(p1 as i64) * &hp;
                    let v = lhs - &hp;
                    if v.is_negative() {
                        return fail(
                            "lifted cover",
                            format!("p={p} e={e} p1={p1} e1={e1}"),
                            v,
                            rows_checked,
                        );
                    }
                }
            }
            // box rows x_i >= 0 and 1 - x_i >= 0 with i in P, in E, or outside
            let outside = p + e < m;
            let mut forms: Vec<(&str, Rational)> = Vec::new();
            if p > 0 {
                forms.push(("i in P", hp.clone()));
                forms.push(("i in P", zero.clone()));
            }
            if e > 0 {
                forms.push(("i in E", zero.clone()));
                forms.push(("i in E", hp.clone()));
            }
            if outside {
                forms.push(("i outside", cert.h(e, p + 1)));
                forms.push(("i outside", &hp - cert.h(e, p + 1)));
            }
            for (where_, v) in forms {
                rows_checked += 1;
                if v.is_negative() {
                    return fail(
                        "lifted box",
                        format!("p={p} e={e} {where_}"),
                        v,
                        rows_checked,
                    );
                }
            }
        }
    }
    for size in 0..=(level + 1).min(m) {
        for p in 0..=size {
            let e = size - p;
            let v = cert.h(e, p);
            rows_checked += 2;
            if v.is_negative() {
                return fail("atom lower bound", format!("p={p} e={e}"), v, rows_checked);
            }
            if v > Rational::one() {
                return fail("atom upper bound", format!("p={p} e={e}"), v, rows_checked);
            }
        }
    }
    ModeVerdict {
        feasible: true,
        rows_checked,
        violation: None,
    }
}

/// Verifies the factorial-ratio certificate at `level` on a uniform-frequency instance.
pub fn verify_certificate(
    inst: &SetCoverInstance,
    level: usize,
    mode: VerifyMode,
) -> Result<Verification> {
    let f = uniform_frequency(inst)?;
    let cert = SaCertificate::new(SaParams {
        f,
        level,
        n: inst.m(),
    })?;
    verify_with(inst, &cert, mode)
}

/// Verifies an arbitrary size-indexed table (used for mutation tests).
pub fn verify_with(
    inst: &SetCoverInstance,
    cert: &SaCertificate,
    mode: VerifyMode,
) -> Result<Verification> {
    let f = uniform_frequency(inst)?;
    if f != cert.params.f || inst.m() != cert.params.n {
        return Err(Error::Invalid(
            "certificate parameters do not match the instance".into(),
        ));
    }
    let level = cert.params.level;
    let mode = mode.resolve(inst.m(), level);
    let direct = match mode {
        VerifyMode::Direct | VerifyMode::Both => {
            let table = cert.table.clone();
            Some(verify_direct(inst, level, &move |a: Subset| {
                table[a.len()].clone()
            })?)
        }
        _ => None,
    };
    let symmetric = match mode {
        VerifyMode::Symmetric | VerifyMode::Both => Some(verify_symmetric(cert, inst.m())),
        _ => None,
    };
    let modes_agree = match (&direct, &symmetric) {
        (Some(d), Some(s)) => Some(d.feasible == s.feasible),
        _ => None,
    };
    let feasible = direct.iter().chain(symmetric.iter()).all(|v| v.feasible);
    Ok(Verification {
        mode,
        feasible,
        direct,
        symmetric,
        modes_agree,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridReport {
    pub max_f: usize,
    pub box_cases: u64,
    /// Box cases where `3x >= 5e` fails; there the bound is evaluated without the hypothesis.
    pub box_outside_hypothesis: u64,
    pub box_violations: u64,
    pub cover_cases: u64,
    pub cover_violations: u64,
    /// `(f, level, e, p)` with zero covering slack.
    pub zero_slack: Vec<(usize, usize, usize, usize)>,
    /// True when every zero-slack case has `e = 0` and `p = level` and every such case is zero.
    pub zero_slack_exactly_at_tight_pattern: bool,
}

/// Exhaustive exact sweep of the box and covering bounds over `1 <= f <= max_f`,
/// `level <= f/3` (and `level < f`), `p + e <= level + 1` for box cases and `p + e <= level`
/// for covering cases.
pub fn verify_grid(max_f: usize) -> GridReport {
    let per_f: Vec<GridReport> = (1..=max_f)
        .into_par_iter()
        .map(|f| {
            let mut r = GridReport {
                max_f,
                box_cases: 0,
                box_outside_hypothesis: 0,
                box_violations: 0,
                cover_cases: 0,
                cover_violations: 0,
                zero_slack: Vec::new(),
                zero_slack_exactly_at_tight_pattern: true,
            };
            for level in 0..=f / 3 {
                if level + 1 > f {
                    continue;
                }
                let params = SaParams { f, level, n: f };
                for size in 0..=level + 1 {
                    for p in 0..=size {
                        let e = size - p;
                        let x = (f - level - 1 + p) as u64;
                        r.box_cases += 1;
                        let check = match check_box_inequality(x, e, p) {
                            Ok(c) => c,
                            Err(_) => {
                                r.box_outside_hypothesis += 1;
                                box_bounds(x, e, p)
                            }
                        };
                        if !check.holds {
                            r.box_violations += 1;
                        }
                        if size <= level {
                            r.cover_cases += 1;
                            match check_cover_inequality(&params, e, p) {
                                Ok(c) => {
                                    if !c.holds {
                                        r.cover_violations += 1;
                                    }
                                    let tight = e == 0 && p == level;
                                    if c.value.is_zero() {
                                        r.zero_slack.push((f, level, e, p));
                                    }
                                    if c.value.is_zero() != tight {
                                        r.zero_slack_exactly_at_tight_pattern = false;
                                    }
                                }
                                Err(_) => r.cover_violations += 1,
                            }
                        }
                    }
                }
            }
            r
        })
        .collect();
    per_f.into_iter().fold(
        GridReport {
            max_f,
            box_cases: 0,
            box_outside_hypothesis: 0,
            box_violations: 0,
            cover_cases: 0,
            cover_violations: 0,
            zero_slack: Vec::new(),
            zero_slack_exactly_at_tight_pattern: true,
        },
        |mut acc, r| {
            acc.box_cases += r.box_cases;
            acc.box_outside_hypothesis += r.box_outside_hypothesis;
            acc.box_violations += r.box_violations;
            acc.cover_cases += r.cover_cases;
            acc.cover_violations += r.cover_violations;
            acc.zero_slack.extend(r.zero_slack);
            acc.zero_slack_exactly_at_tight_pattern &= r.zero_slack_exactly_at_tight_pattern;
            acc
        },
    )
}

/// `floor(γ(ε-ε²)n / (1+γ))`.
pub fn gap_level(n: usize, epsilon: &Rational, gamma: &Rational) -> usize {
    let v = gamma * (epsilon - epsilon * epsilon) * int(n as i64) / (Rational::one() + gamma);
    v.floor().to_integer().to_usize().unwrap_or(0)
}

/// `(1-ε)/(1+γ) · ln n`.
pub fn gap_formula_bound(n: usize, epsilon: &Rational, gamma: &Rational) -> f64 {
    let e = rational::to_f64(epsilon);
    let g = rational::to_f64(gamma);
    (1.0 - e) / (1.0 + g) * (n as f64).ln()
}

/// `(ε-ε²)/((1+γ) ln(1+ε)) · ln n`, the bound the argument actually derives before simplifying.
pub fn gap_derived_bound(n: usize, epsilon: &Rational, gamma: &Rational) -> f64 {
    let e = rational::to_f64(epsilon);
    let g = rational::to_f64(gamma);
    (e - e * e) / ((1.0 + g) * (1.0 + e).ln()) * (n as f64).ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub n: usize,
    #[serde(with = "rational::as_string")]
    pub epsilon: Rational,
    #[serde(with = "rational::as_string")]
    pub gamma: Rational,
    #[serde(with = "rational::as_string")]
    pub eta: Rational,
    pub f: usize,
    pub level: usize,
    pub attempts: usize,
    /// Whether the oracle confirmed `OPT >= log_{1+ε} n`; when false the last sample is reported.
    pub property_ii: bool,
    #[serde(with = "rational::float12")]
    pub opt_lower_bound: f64,
    #[serde(with = "rational::as_string")]
    pub opt: Rational,
    #[serde(with = "rational::as_string")]
    pub singleton_value: Rational,
    /// `Σ_i y_{i}` at the certificate, exact.
    #[serde(with = "rational::as_string")]
    pub lp_value: Rational,
    /// `(1+γ)/(ε-ε²)`, what `lp_value` equals without the floors in `f` and `level`.
    #[serde(with = "rational::as_string")]
    pub lp_value_formula: Rational,
    #[serde(with = "rational::as_string")]
    pub ratio: Rational,
    #[serde(with = "rational::float12")]
    pub ratio_float: f64,
    /// `OPT · (ε-ε²)/(1+γ)`, which the ratio should dominate.
    #[serde(with = "rational::float12")]
    pub ratio_lower_bound: f64,
    /// Asymptotic `(1-ε)/(1+γ) ln n`; reported, not asserted.
    #[serde(with = "rational::float12")]
    pub formula_bound: f64,
    #[serde(with = "rational::float12")]
    pub derived_bound: f64,
    pub formula_crossed: bool,
    pub verification: Verification,
}

/// Generates an instance with `η = ε²`, builds the certificate at the formula level,
/// verifies it, and compares the oracle optimum to the certificate's LP value.
pub fn gap_experiment(cfg: &GenerationConfig, mode: VerifyMode) -> Result<GapReport> {
    if cfg.eta != &cfg.epsilon * &cfg.epsilon {
        return Err(Error::Invalid(
            "the gap experiment uses eta = epsilon^2".into(),
        ));
    }
    let (generated, property_ii) = gen_with_fallback(cfg)?;
    let inst = generated.instance;
    let f = cfg.frequency();
    let level = gap_level(cfg.n, &cfg.epsilon, &cfg.gamma);
    let params = SaParams {
        f,
        level,
        n: inst.m(),
    };
    let cert = SaCertificate::new(params)?;
    let verification = verify_with(&inst, &cert, mode)?;
    let opt = exact_setcover_opt(&inst)?.cost;
    let singleton_value = cert.table[1].clone();
    let lp_value = &singleton_value * int(inst.m() as i64);
    let ratio = &opt / &lp_value;
    let ratio_float = rational::to_f64(&ratio);
    let eps2 = &cfg.epsilon - &cfg.epsilon * &cfg.epsilon;
    let formula_bound = gap_formula_bound(cfg.n, &cfg.epsilon, &cfg.gamma);
    Ok(GapReport {
        n: cfg.n,
        epsilon: cfg.epsilon.clone(),
        gamma: cfg.gamma.clone(),
        eta: cfg.eta.clone(),
        f,
        level,
        attempts: generated.attempts,
        property_ii,
        opt_lower_bound: cfg.opt_target(),
        ratio_lower_bound: rational::to_f64(&(&opt * &eps2 / (Rational::one() + &cfg.gamma))),
        lp_value_formula: (Rational::one() + &cfg.gamma) / eps2,
        opt,
        singleton_value,
        lp_value,
        ratio,
        ratio_float,
        formula_bound,
        derived_bound: gap_derived_bound(cfg.n, &cfg.epsilon, &cfg.gamma),
        formula_crossed: ratio_float >= formula_bound,
        verification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_unverified;
    use crate::rational::ratio;

    fn p(f: usize, level: usize) -> SaParams {
        SaParams { f, level, n: 40 }
    }

    #[test]
    fn certificate_values() {
        assert_eq!(certificate_value(&p(9, 2), 0).unwrap(), int(1));
        assert_eq!(certificate_value(&p(9, 2), 1).unwrap(), ratio(1, 7));
        assert_eq!(certificate_value(&p(9, 2), 2).unwrap(), ratio(1, 56));
        assert!(certificate_value(&p(9, 2), 4).is_err());
        assert!(certificate_value(&p(5, 2), 1).is_err());
    }

    #[test]
    fn alternating_sums() {
        assert_eq!(h_ep(&p(9, 2), 0, 2).unwrap(), ratio(1, 56));
        assert_eq!(h_ep(&p(9, 2), 1, 0).unwrap(), ratio(6, 7));
        for f in 3..15 {
            for level in 0..=f / 3 {
                let q = p(f, level);
                assert_eq!(
                    int(f as i64) * h_ep(&q, 0, level + 1).unwrap(),
                    h_ep(&q, 0, level).unwrap()
                );
            }
        }
    }

    #[test]
    fn box_examples() {
        let c = check_box_inequality(4, 0, 0).unwrap();
        assert!(c.holds && c.value == ratio(1, 24));
        let c = check_box_inequality(2, 1, 0).unwrap();
        assert!(c.holds && c.value == ratio(1, 3));
        assert!(check_box_inequality(1, 1, 0).is_err());
    }

    #[test]
    fn cover_examples() {
        let tight = check_cover_inequality(&p(9, 2), 0, 2).unwrap();
        assert!(tight.holds && tight.value.is_zero());
        let loose = check_cover_inequality(&p(9, 2), 1, 0).unwrap();
        assert!(loose.holds && loose.value.is_positive());
        assert!(check_cover_inequality(&p(9, 2), 2, 1).is_err());
    }

    #[test]
    fn level_zero_lift_is_base() {
        let rows = vec![BaseRow {
            coeffs: vec![(0, int(1)), (1, int(1))],
            rhs: int(1),
        }];
        let lifted = sa_lift(2, &rows, 0, DEFAULT_LIFT_BUDGET).unwrap();
        assert_eq!(lifted.len(), 1);
        let s = |i| Subset::singleton(i);
        assert_eq!(
            lifted[0].terms,
            vec![(Subset::EMPTY, int(-1)), (s(0), int(1)), (s(1), int(1))]
        );
    }

    #[test]
    fn level_one_lift_by_hand() {
        let mut rows = vec![BaseRow {
            coeffs: vec![(0, int(1)), (1, int(1))],
            rhs: int(1),
        }];
        rows.extend(box_rows(2));
        let lifted = sa_lift(2, &rows, 1, DEFAULT_LIFT_BUDGET).unwrap();
        assert_eq!(lifted.len() as u64, 5 * pair_count(2, 1));
        assert_eq!(pair_count(2, 1), 5);
        // E = {1}: (y_0 - y_01) + (y_1 - y_1) >= y_∅ - y_1
        let row = lifted
            .iter()
            .find(|r| r.base == 0 && r.p.is_empty() && r.e == Subset::singleton(1))
            .unwrap();
        let want = vec![
            (Subset::EMPTY, int(-1)),
            (Subset::singleton(0), int(1)),
            (Subset::singleton(1), int(1)),
            (Subset::from_indices([0, 1]), int(-1)),
        ];
        assert_eq!(row.terms, want);
    }

    #[test]
    fn telescoping_cancels_indices_in_e() {
        for e in [
            Subset::from_indices([0]),
            Subset::from_indices([0, 2]),
            Subset::from_indices([0, 2, 3]),
        ] {
            for p in [
                Subset::EMPTY,
                Subset::singleton(1),
                Subset::from_indices([1, 4]),
            ] {
                let mut acc = BTreeMap::new();
                add_atom(&mut acc, p, e, Subset::singleton(0), &int(1));
                assert!(acc.values().all(|c| c.is_zero()), "{p:?} {e:?}");
            }
        }
    }

    fn sample(n: usize, eta: Rational, seed: u64) -> SetCoverInstance {
        let cfg = GenerationConfig {
            n,
            epsilon: ratio(1, 2),
            eta,
            gamma: ratio(1, 2),
            seed,
        };
        gen_unverified(&cfg).unwrap()
    }

    #[test]
    fn generated_instance_certifies_in_both_modes() {
        let inst = sample(10, ratio(1, 10), 3);
        assert_eq!(uniform_frequency(&inst).unwrap(), 4);
        let inst12 = sample(12, ratio(1, 12), 5);
        assert_eq!(uniform_frequency(&inst12).unwrap(), 5);
        for (inst, level) in [(&inst, 0), (&inst, 1), (&inst12, 1)] {
            let v = verify_certificate(inst, level, VerifyMode::Both).unwrap();
            assert!(v.feasible, "{v:?}");
            assert_eq!(v.modes_agree, Some(true));
        }
    }

    #[test]
    fn level_zero_cover_rows_are_tight() {
        let inst = sample(10, ratio(1, 10), 3);
        let cert = SaCertificate::new(SaParams {
            f: 4,
            level: 0,
            n: 10,
        })
        .unwrap();
        assert_eq!(cert.table[1], ratio(1, 4));
        for i in 0..inst.n() {
            let sum: Rational = inst
                .sets_containing(i)
                .iter()
                .map(|_| cert.table[1].clone())
                .sum();
            assert_eq!(sum, int(1));
        }
    }

    #[test]
    fn halving_any_table_entry_is_caught() {
        let inst = sample(12, ratio(1, 12), 5);
        let cert = SaCertificate::new(SaParams {
            f: 5,
            level: 1,
            n: 12,
        })
        .unwrap();
        for a in 0..cert.table.len() {
            let bad = cert.mutated(a, &ratio(1, 2));
            let v = verify_with(&inst, &bad, VerifyMode::Both).unwrap();
            assert!(
                !v.feasible && v.modes_agree == Some(true),
                "entry {a}: {v:?}"
            );
            assert!(v.violation().is_some());
        }
    }

    #[test]
    fn non_uniform_input_is_rejected() {
        let inst = SetCoverInstance::new(2, vec![(int(1), vec![0, 1]), (int(1), vec![0])]).unwrap();
        assert!(verify_certificate(&inst, 0, VerifyMode::Direct).is_err());
    }

    #[test]
    fn gap_formulas_at_half() {
        let h = ratio(1, 2);
        for n in [12, 24, 36, 100, 1000] {
            assert_eq!(gap_level(n, &h, &h), n / 12);
            assert!((gap_formula_bound(n, &h, &h) - (n as f64).ln() / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_grid_is_clean() {
        let g = verify_grid(15);
        assert_eq!(g.box_violations, 0);
        assert_eq!(g.cover_violations, 0);
        assert!(g.zero_slack_exactly_at_tight_pattern);
        assert!(g.box_outside_hypothesis > 0);
    }
}
