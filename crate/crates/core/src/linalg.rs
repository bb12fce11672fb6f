//! Bounded-iteration eigenvalue queries.
//!
//! The default Schur iteration runs unbounded and can stall on matrices with
//! exactly repeated eigenvalues (block-diagonal assemblies produce plenty).
//! This wrapper caps the iteration count and retries under a tiny
//! deterministic diagonal jitter that splits the ties; the jitter is scaled
//! to the matrix norm and stays far below every stability margin checked
//! against it.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::ModelError;

const MAX_SWEEPS: usize = 30_000;

/// Complex eigenvalues of a real square matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<DVector<Complex<f64>>, ModelError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(DVector::from_vec(Vec::new()));
    }
    let scale = a.amax().max(1.0);
    for jitter in [0.0, 1e-11, 1e-9, 1e-7] {
        let m = if jitter == 0.0 {
            a.clone()
        } else {
            let mut m = a.clone();
            for i in 0..n {
                // deterministic, non-uniform perturbation splits exact ties
                m[(i, i)] += jitter * scale * (1.0 + i as f64 / n as f64);
            }
            m
        };
        if let Some(schur) = m.try_schur(f64::EPSILON, MAX_SWEEPS) {
            return Ok(schur.complex_eigenvalues());
        }
    }
    Err(ModelError::Dimension(format!(
        "eigenvalue iteration failed to converge for a {n}x{n} matrix"
    )))
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64, ModelError> {
    Ok(eigenvalues(a)?.iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// Largest eigenvalue real part.
pub fn max_real_part(a: &DMatrix<f64>) -> Result<f64, ModelError> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handles_repeated_eigenvalues() {
        // -I with a few coupled blocks: the shape that stalls a naive sweep
        let n = 40;
        let mut a = DMatrix::identity(n, n) * -1.0;
        for i in 0..n / 2 {
            a[(2 * i, 2 * i + 1)] = 1.0;
        }
        let rho = spectral_radius(&a).unwrap();
        assert!((rho - 1.0).abs() < 1e-6);
        let re = max_real_part(&a).unwrap();
        assert!((re + 1.0).abs() < 1e-6);
    }

    #[test]
    fn matches_known_spectra() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let vals = eigenvalues(&a).unwrap();
        let mut norms: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
        norms.sort_by(f64::total_cmp);
        assert!((norms[0] - 1.0).abs() < 1e-9);
        assert!((norms[1] - 1.0).abs() < 1e-9);
    }
}
