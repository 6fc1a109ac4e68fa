//! Small dense linear algebra on row-major square matrices.

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<F> {
    pub n: usize,
    pub data: Vec<F>,
}

impl<F: Real> Dense<F> {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            data: vec![F::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = F::one();
        }
        m
    }

    pub fn scaled_identity(n: usize, s: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.n + j] = self.data[i * self.n + j] + v;
    }

    pub fn max_asymmetry(&self) -> F {
        let mut worst = F::zero();
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn symmetrize(&mut self) {
        let half = F::cast(0.5);
        for i in 0..self.n {
            for j in 0..i {
                let v = (self.get(i, j) + self.get(j, i)) * half;
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    pub fn mul(&self, o: &Dense<F>) -> Dense<F> {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == F::zero() {
                    continue;
                }
                let row = &o.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Dense<F> {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn axpy(&mut self, a: F, o: &Dense<F>) {
        for (x, &y) in self.data.iter_mut().zip(&o.data) {
            *x = *x + a * y;
        }
    }

    /// Frobenius inner product.
    pub fn dot(&self, o: &Dense<F>) -> F {
        self.data
            .iter()
            .zip(&o.data)
            .fold(F::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn frobenius(&self) -> F {
        self.dot(self).sqrt()
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .fold(F::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }
}

/// Lower Cholesky factor, or `None` when the matrix is not numerically positive definite.
pub fn cholesky<F: Real>(a: &Dense<F>) -> Option<Dense<F>> {
    let n = a.n;
    let mut l = Dense::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d = d - l.get(j, k) * l.get(j, k);
        }
        if !(d > F::zero()) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s = s - l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Some(l)
}

/// Solves `L L^T x = b`.
pub fn cholesky_solve<F: Real>(l: &Dense<F>, b: &[F]) -> Vec<F> {
    let n = l.n;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l.get(k, i) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    y
}

/// Inverse of `L L^T`.
pub fn cholesky_inverse<F: Real>(l: &Dense<F>) -> Dense<F> {
    let n = l.n;
    // invert L by forward substitution, then form L^{-T} L^{-1}
    let mut li = Dense::zeros(n);
    for c in 0..n {
        for i in c..n {
            let mut s = if i == c { F::one() } else { F::zero() };
            for k in c..i {
                s = s - l.get(i, k) * li.get(k, c);
            }
            li.set(i, c, s / l.get(i, i));
        }
    }
    let mut out = Dense::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = F::zero();
            for k in i..n {
                s = s + li.get(k, i) * li.get(k, j);
            }
            out.set(i, j, s);
            out.set(j, i, s);
        }
    }
    out
}

/// `L^{-1} A L^{-T}` for symmetric `A`.
pub fn congruence_by_inverse<F: Real>(l: &Dense<F>, a: &Dense<F>) -> Dense<F> {
    let n = l.n;
    // B = L^{-1} A, column by column forward substitution on rows
    let mut b = a.clone();
    for c in 0..n {
        for i in 0..n {
            let mut s = b.get(i, c);
            for k in 0..i {
                s = s - l.get(i, k) * b.get(k, c);
            }
            b.set(i, c, s / l.get(i, i));
        }
    }
    // C = B L^{-T} = (L^{-1} B^T)^T
    let bt = b.transpose();
    let mut c = bt;
    for col in 0..n {
        for i in 0..n {
            let mut s = c.get(i, col);
            for k in 0..i {
                s = s - l.get(i, k) * c.get(k, col);
            }
            c.set(i, col, s / l.get(i, i));
        }
    }
    let mut out = c.transpose();
    out.symmetrize();
    out
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<F: Real>(a: &Dense<F>) -> Vec<F> {
    let n = a.n;
    let mut m = a.clone();
    m.symmetrize();
    let scale = m.data.iter().fold(F::zero(), |acc, &x| acc.max(x.abs()));
    let tiny = F::machine_eps() * F::machine_eps() * (scale * scale).max(F::min_positive_value());
    for _sweep in 0..100 {
        let mut off = F::zero();
        for i in 0..n {
            for j in 0..i {
                off = off + m.get(i, j) * m.get(i, j);
            }
        }
        if off <= tiny {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == F::zero() {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (F::cast(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let t = if theta == F::zero() { F::one() } else { t };
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                m.set(p, q, F::zero());
                m.set(q, p, F::zero());
            }
        }
    }
    let mut ev: Vec<F> = (0..n).map(|i| m.get(i, i)).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn lu_inverse<F: Real>(a: &Dense<F>) -> Option<Dense<F>> {
    let n = a.n;
    let mut m = a.clone();
    let mut inv = Dense::identity(n);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m.get(i, col)
                .abs()
                .partial_cmp(&m.get(j, col).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        let pv = m.get(piv, col);
        if pv.abs() <= F::machine_eps() * F::cast(1e3) {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.data.swap(piv * n + k, col * n + k);
                inv.data.swap(piv * n + k, col * n + k);
            }
        }
        let r = F::one() / pv;
        for k in 0..n {
            m.data[col * n + k] = m.data[col * n + k] * r;
            inv.data[col * n + k] = inv.data[col * n + k] * r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m.get(i, col);
            if f == F::zero() {
                continue;
            }
            for k in 0..n {
                m.data[i * n + k] = m.data[i * n + k] - f * m.data[col * n + k];
                inv.data[i * n + k] = inv.data[i * n + k] - f * inv.data[col * n + k];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_small_matrices() {
        let a = Dense::from_rows(&[vec![1.0f64, 2.0], vec![2.0, 1.0]]);
        let ev = symmetric_eigenvalues(&a);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        let b = Dense::from_rows(&[vec![2.0f32, 0.0], vec![0.0, 5.0]]);
        assert_eq!(symmetric_eigenvalues(&b), vec![2.0, 5.0]);
    }

    #[test]
    fn cholesky_round_trip() {
        let a = Dense::from_rows(&[
            vec![4.0f64, 2.0, 0.4],
            vec![2.0, 3.0, 0.5],
            vec![0.4, 0.5, 2.0],
        ]);
        let l = cholesky(&a).unwrap();
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0]);
        let ax = a.mul_vec(&x);
        for (v, w) in ax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - w).abs() < 1e-12);
        }
        let inv = cholesky_inverse(&l);
        let id = a.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                assert!((id.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let lu = lu_inverse(&a).unwrap();
        assert!(lu
            .data
            .iter()
            .zip(&inv.data)
            .all(|(a, b)| (a - b).abs() < 1e-12));
        let c = congruence_by_inverse(&l, &a);
        assert!(c
            .data
            .iter()
            .zip(&Dense::<f64>::identity(3).data)
            .all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(cholesky(&Dense::from_rows(&[vec![1.0f64, 2.0], vec![2.0, 1.0]])).is_none());
    }
}
