//! Bilinear (Tustin) discretization.

use nalgebra::DMatrix;

use crate::error::ModelError;
use crate::model::{StateSpaceModel, TimeBasis};

/// Map a continuous model to discrete time with step `dt`:
///
/// ```text
/// A_d = (I - A dt/2)^-1 (I + A dt/2),    B_d = (I - A dt/2)^-1 B dt
/// ```
///
/// The transform maps the open left half-plane into the open unit disk, so
/// stability is preserved. Steps beyond the Nyquist bound of the fastest
/// eigenvalue (|lambda| dt > 2) are rejected as badly warped.
pub fn discretize(model: &StateSpaceModel, dt: f64) -> Result<StateSpaceModel, ModelError> {
    if !matches!(model.time, TimeBasis::Continuous) {
        return Err(ModelError::AlreadyDiscrete);
    }
    if !(dt > 0.0) {
        return Err(ModelError::NonPositiveDt(dt));
    }
    let fastest = crate::linalg::spectral_radius(&model.a)?;
    if fastest * dt > 2.0 + 1e-12 {
        return Err(ModelError::DtTooLarge { dt, bound: 2.0 / fastest });
    }

    let n = model.a.nrows();
    let half = &model.a * (dt / 2.0);
    let left = DMatrix::identity(n, n) - &half;
    let lu = left.lu();
    let right = DMatrix::identity(n, n) + &half;
    let a_d = lu
        .solve(&right)
        .ok_or(ModelError::SingularTustin(dt))?;
    let b_d = lu
        .solve(&(&model.b * dt))
        .ok_or(ModelError::SingularTustin(dt))?;

    Ok(StateSpaceModel {
        a: a_d,
        b: b_d,
        time: TimeBasis::Discrete { dt },
        state_labels: model.state_labels.clone(),
        input_labels: model.input_labels.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{InputLabel, StateLabel};
    use approx::assert_abs_diff_eq;
    use rand::RngExt;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn continuous(a: DMatrix<f64>, b: DMatrix<f64>) -> StateSpaceModel {
        let n = a.nrows();
        let p = b.ncols();
        StateSpaceModel {
            a,
            b,
            time: TimeBasis::Continuous,
            state_labels: (0..n)
                .map(|i| StateLabel::GeneratorSpeed { gen: format!("s{i}") })
                .collect(),
            input_labels: (0..p)
                .map(|i| InputLabel::PowerDemand { gen: format!("u{i}") })
                .collect(),
        }
    }

    #[test]
    fn scalar_pole_at_nyquist_maps_to_zero() {
        let m = continuous(
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            DMatrix::from_row_slice(1, 1, &[1.0]),
        );
        let d = discretize(&m, 2.0).unwrap();
        assert_abs_diff_eq!(d.a[(0, 0)], 0.0);
    }

    #[test]
    fn integrator_maps_to_identity_with_scaled_input() {
        let m = continuous(DMatrix::zeros(3, 3), DMatrix::identity(3, 2) * 2.0);
        let d = discretize(&m, 0.25).unwrap();
        assert_abs_diff_eq!(d.a, DMatrix::identity(3, 3), epsilon = 1e-14);
        assert_abs_diff_eq!(d.b, m.b * 0.25, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_steps() {
        let m = continuous(
            DMatrix::from_row_slice(1, 1, &[-10.0]),
            DMatrix::from_row_slice(1, 1, &[1.0]),
        );
        assert!(matches!(discretize(&m, 0.0), Err(ModelError::NonPositiveDt(_))));
        assert!(matches!(
            discretize(&m, 1.0),
            Err(ModelError::DtTooLarge { .. })
        ));
        let d = discretize(&m, 0.19).unwrap();
        assert!(matches!(d.time, TimeBasis::Discrete { dt } if dt == 0.19));
    }

    #[test]
    fn hurwitz_maps_inside_unit_circle() {
        // random stable matrices: shift random A by its largest real part
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let n = rng.random_range(2..6);
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let max_re = raw
                .complex_eigenvalues()
                .iter()
                .map(|l| l.re)
                .fold(f64::NEG_INFINITY, f64::max);
            let a = raw - DMatrix::identity(n, n) * (max_re + rng.random_range(0.05..1.0));
            let m = continuous(a, DMatrix::zeros(n, 1));
            assert!(m.validate_stability().is_ok());
            let fastest = m
                .a
                .complex_eigenvalues()
                .iter()
                .map(|l| l.norm())
                .fold(0.0, f64::max);
            let d = discretize(&m, 1.0 / fastest).unwrap();
            assert!(d.spectral_radius().unwrap() < 1.0);
            assert!(d.validate_stability().is_ok());
        }
    }
}
