use serde::Serialize;

use super::linalg::{symmetric_eigenvalues, Dense};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsdCheck<F> {
    pub is_psd: bool,
    pub min_eig: F,
}

/// Smallest eigenvalue by Jacobi rotations; PSD iff it is at least `-tau`.
pub fn psd_check<F: Real>(m: &Dense<F>, tau: F) -> Result<PsdCheck<F>> {
    let scale = m.data.iter().fold(F::one(), |acc, &v| acc.max(v.abs()));
    let sym_tol = F::cast(1e-12).max(F::machine_eps() * F::cast(8.0)) * scale;
    if m.max_asymmetry() > sym_tol {
        return Err(Error::Invalid("matrix is not symmetric".into()));
    }
    let min_eig = symmetric_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or_else(F::zero);
    Ok(PsdCheck {
        is_psd: min_eig >= -tau,
        min_eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let id = psd_check(&Dense::<f64>::identity(3), 1e-6).unwrap();
        assert!(id.is_psd && (id.min_eig - 1.0).abs() < 1e-12);
        let bad = psd_check(
            &Dense::from_rows(&[vec![1.0f64, 2.0], vec![2.0, 1.0]]),
            1e-6,
        )
        .unwrap();
        assert!(!bad.is_psd && (bad.min_eig + 1.0).abs() < 1e-12);
        let v = [0.3f32, -1.0, 2.0];
        let rows: Vec<Vec<f32>> = v
            .iter()
            .map(|a| v.iter().map(|b| a * b).collect())
            .collect();
        assert!(psd_check(&Dense::from_rows(&rows), 1e-5).unwrap().is_psd);
        assert!(psd_check(&Dense::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]), 1e-6).is_err());
    }
}
