//! Subset-indexed moment vectors, their moment matrices, and conditioning.

use std::collections::HashMap;
use std::sync::Arc;

use super::linalg::Dense;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::subset::{subsets_up_to, Subset};
use crate::tolerance::{DELTA_COND, EPS_FEAS};

#[derive(Debug, PartialEq, Eq)]
struct Layout {
    n: usize,
    level: usize,
    subsets: Vec<Subset>,
    index: HashMap<Subset, usize>,
}

impl Layout {
    fn new(n: usize, level: usize) -> Arc<Layout> {
        let subsets = subsets_up_to(n, level);
        let index = subsets.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        Arc::new(Layout {
            n,
            level,
            subsets,
            index,
        })
    }
}

/// Values `y_A` for all `A ⊆ [n]` with `|A| <= level`, with `y_∅ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<F> {
    layout: Arc<Layout>,
    values: Vec<F>,
}

impl<F: Real> MomentVector<F> {
    pub fn from_fn(n: usize, level: usize, mut f: impl FnMut(Subset) -> F) -> Self {
        let layout = Layout::new(n, level);
        let mut values: Vec<F> = layout.subsets.iter().map(|&s| f(s)).collect();
        values[0] = F::one();
        MomentVector { layout, values }
    }

    /// Moments of the 0-1 point whose ones are `point`: `y_A = 1` iff `A ⊆ point`.
    pub fn integral(n: usize, level: usize, point: Subset) -> Self {
        Self::from_fn(n, level, |a| {
            if a.is_subset_of(point) {
                F::one()
            } else {
                F::zero()
            }
        })
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }

    pub fn level(&self) -> usize {
        self.layout.level
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.layout.subsets
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn try_get(&self, a: Subset) -> Option<F> {
        self.layout.index.get(&a).map(|&k| self.values[k])
    }

    pub fn get(&self, a: Subset) -> F {
        self.try_get(a)
            .unwrap_or_else(|| panic!("moment {a:?} is not stored at level {}", self.level()))
    }

    pub fn set(&mut self, a: Subset, v: F) {
        let k = self.layout.index[&a];
        self.values[k] = v;
    }

    /// `x_i = y_{i}`.
    pub fn x(&self, i: usize) -> F {
        self.get(Subset::singleton(i))
    }

    pub fn xs(&self) -> Vec<F> {
        (0..self.n()).map(|i| self.x(i)).collect()
    }

    pub fn pair(&self, i: usize, j: usize) -> F {
        self.get(Subset::singleton(i).with(j))
    }

    /// Same moments, truncated to a lower level.
    pub fn truncate(&self, level: usize) -> Self {
        Self::from_fn(self.n(), level.min(self.level()), |a| self.get(a))
    }

    /// Snaps entries within `band` of 0 or 1 onto them.
    pub fn snap(&mut self, band: F) {
        for v in self.values.iter_mut() {
            if v.abs() <= band {
                *v = F::zero();
            } else if (*v - F::one()).abs() <= band {
                *v = F::one();
            }
        }
    }

    /// Checks `y_∅ = 1` and every value in `[-eps_feas, 1 + eps_feas]`.
    pub fn validate(&self) -> Result<()> {
        if self.values[0] != F::one() {
            return Err(Error::Invalid("y_∅ must equal 1".into()));
        }
        let tol = F::cast(EPS_FEAS);
        for (s, &v) in self.subsets().iter().zip(&self.values) {
            if !(v >= -tol && v <= F::one() + tol) {
                return Err(Error::Invalid(format!("moment {s:?} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Rows and columns indexed by subsets of size at most `floor(k/2)`; entry `(A, B) = y_{A∪B}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix<F> {
    pub labels: Vec<Subset>,
    pub matrix: Dense<F>,
}

impl<F: Real> MomentMatrix<F> {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn entry(&self, a: Subset, b: Subset) -> Option<F> {
        let i = self.labels.iter().position(|&s| s == a)?;
        let j = self.labels.iter().position(|&s| s == b)?;
        Some(self.matrix.get(i, j))
    }

    /// `Y e_i`: the column labelled `{i}`.
    pub fn column(&self, i: usize) -> Option<Vec<F>> {
        let c = self
            .labels
            .iter()
            .position(|&s| s == Subset::singleton(i))?;
        Some((0..self.dim()).map(|r| self.matrix.get(r, c)).collect())
    }

    /// `Y e_0`: the column labelled `∅`.
    pub fn column0(&self) -> Vec<F> {
        (0..self.dim()).map(|r| self.matrix.get(r, 0)).collect()
    }

    /// Row-major CSV with a header row and a label column.
    pub fn to_csv(&self) -> String {
        let quote = |s: &Subset| format!("\"{}\"", s.label());
        let mut out = String::from("\"\"");
        for l in &self.labels {
            out.push(',');
            out.push_str(&quote(l));
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&quote(l));
            for j in 0..self.dim() {
                out.push_str(&format!(",{}", self.matrix.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

fn matrix_over<F: Real>(
    y: &MomentVector<F>,
    base: Subset,
    labels: Vec<Subset>,
) -> Result<MomentMatrix<F>> {
    let d = labels.len();
    let mut m = Dense::zeros(d);
    for i in 0..d {
        for j in i..d {
            let s = base.union(labels[i]).union(labels[j]);
            let v = y
                .try_get(s)
                .ok_or_else(|| Error::Invalid(format!("moment {s:?} missing")))?;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(MomentMatrix { labels, matrix: m })
}

pub fn build_moment_matrix<F: Real>(y: &MomentVector<F>) -> Result<MomentMatrix<F>> {
    if y.level() < 2 {
        return Err(Error::Invalid("a moment matrix needs level >= 2".into()));
    }
    matrix_over(y, Subset::EMPTY, subsets_up_to(y.n(), y.level() / 2))
}

/// The order-2 matrix of the moments localized at `base`: rows `∅` and every `{j}`,
/// entry `(A, B) = y_{base ∪ A ∪ B}`.
pub fn localized_matrix<F: Real>(y: &MomentVector<F>, base: Subset) -> Result<MomentMatrix<F>> {
    if base.len() + 2 > y.level() {
        return Err(Error::Invalid(format!(
            "localizing at {base:?} needs level >= {}",
            base.len() + 2
        )));
    }
    matrix_over(y, base, subsets_up_to(y.n(), 1))
}

/// `y'_A = y_{A∪{i}} / y_{i}`, one level lower.
///
/// Refuses `y_{i} < δ_cond`. When `y_{i} > 1 - δ_cond` the column of `∅` is copied instead
/// of dividing. Results within `δ_cond` of 0 or 1 are snapped.
pub fn condition<F: Real>(y: &MomentVector<F>, i: usize) -> Result<MomentVector<F>> {
    if y.level() == 0 {
        return Err(Error::Invalid(
            "cannot condition a level-0 moment vector".into(),
        ));
    }
    if i >= y.n() {
        return Err(Error::Invalid(format!("variable {i} out of range")));
    }
    let delta = F::cast(DELTA_COND);
    let xi = y.x(i);
    if !(xi >= delta) {
        return Err(Error::Invalid(format!(
            "refusing to condition on x_{i} = {xi} below δ_cond"
        )));
    }
    let near_one = xi > F::one() - delta;
    let mut out = MomentVector::from_fn(y.n(), y.level() - 1, |a| {
        if near_one {
            y.get(a.without(i))
        } else {
            y.get(a.with(i)) / xi
        }
    });
    out.snap(delta);
    out.set(Subset::singleton(i), F::one());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_quarter() -> MomentVector<f64> {
        MomentVector::from_fn(2, 2, |a| match a.len() {
            0 => 1.0,
            1 => 0.5,
            _ => 0.25,
        })
    }

    #[test]
    fn matrix_table_fill() {
        let m = build_moment_matrix(&half_quarter()).unwrap();
        let want = Dense::from_rows(&[
            vec![1.0, 0.5, 0.5],
            vec![0.5, 0.5, 0.25],
            vec![0.5, 0.25, 0.5],
        ]);
        assert_eq!(m.matrix, want);
        assert_eq!(m.column(1).unwrap(), vec![0.5, 0.25, 0.5]);
        assert!(m.to_csv().starts_with("\"\",\"{}\",\"{0}\",\"{1}\"\n"));
    }

    #[test]
    fn integral_moments_are_rank_one() {
        let y = MomentVector::<f64>::integral(3, 2, Subset::from_indices([0, 2]));
        let m = build_moment_matrix(&y).unwrap();
        let v = [1.0, 1.0, 0.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.matrix.get(i, j), v[i] * v[j]);
            }
        }
    }

    #[test]
    fn conditioning_examples() {
        let y = MomentVector::from_fn(2, 2, |a| match a.0 {
            0 => 1.0,
            0b01 => 0.5,
            0b10 => 0.5,
            _ => 0.25,
        });
        let c = condition(&y, 0).unwrap();
        assert_eq!(c.level(), 1);
        assert_eq!(c.x(1), 0.5);
        assert_eq!(c.x(0), 1.0);

        let z = MomentVector::<f64>::integral(3, 3, Subset::from_indices([0, 1]));
        let c = condition(&z, 0).unwrap();
        assert_eq!(c, z.truncate(2));

        let tiny = MomentVector::from_fn(1, 1, |_| 1e-9);
        assert!(condition(&tiny, 0).is_err());
    }

    #[test]
    fn localized_needs_level() {
        let y = MomentVector::<f64>::integral(3, 3, Subset::from_indices([1]));
        assert!(localized_matrix(&y, Subset::singleton(0)).is_ok());
        assert!(localized_matrix(&y, Subset::from_indices([0, 1])).is_err());
    }
}
