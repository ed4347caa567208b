//! Steady state of the driven amplitude equations.
//!
//! With `dp/dt = -i w + M p` (`w` the drive vector) the fixed point solves
//! `M p = i w`, i.e. `p = i M^{-1} w`.

use crate::error::{Error, Result};
use crate::model::{
    build_coupling_matrix, build_drive_vector, ArrayGeometry, CouplingMatrix, CouplingParams, DriveScheme,
};
use crate::scalar::{Cplx, Real};

/// Total excitation above which the weak-drive flag is cleared.
pub const WEAK_EXCITATION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState<T> {
    pub amplitudes: Vec<Cplx<T>>,
    /// `|p_j|^2 / sum |p_l|^2`; all zero when nothing is excited.
    pub populations: Vec<T>,
    /// `sum |p_j|^2` at the supplied drive strength.
    pub raw_excitation: T,
    pub condition_estimate: T,
    pub weak_excitation_ok: bool,
}

impl<T: Real> SteadyState<T> {
    pub fn n_atoms(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn normalized_populations(&self) -> Result<Vec<T>> {
        normalized_populations(&self.amplitudes)
    }
}

/// `|p_j|^2 / sum_l |p_l|^2`.
pub fn normalized_populations<T: Real>(amplitudes: &[Cplx<T>]) -> Result<Vec<T>> {
    let weights: Vec<T> = amplitudes.iter().map(|p| p.norm_sqr()).collect();
    let total = weights.iter().fold(T::zero(), |s, &w| s + w);
    if !(total > T::zero()) {
        return Err(Error::ZeroExcitation);
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

pub fn solve_steady_state<T: Real>(matrix: &CouplingMatrix<T>, drive: &[Cplx<T>]) -> Result<SteadyState<T>> {
    let n = matrix.dim();
    if drive.len() != n {
        return Err(Error::validation(
            "drive",
            format!("expected length {n}, got {}", drive.len()),
        ));
    }
    let cond = matrix.condition_estimate();
    let factors = match matrix.factors() {
        Some(f) if cond.is_finite() && cond <= T::singular_condition() => f,
        _ => {
            return Err(Error::SingularSystem {
                condition: cond.to_f64().unwrap_or(f64::INFINITY),
            })
        }
    };
    let i = Cplx::new(T::zero(), T::one());
    let amplitudes: Vec<Cplx<T>> = factors.solve(drive).into_iter().map(|x| x * i).collect();
    let raw_excitation = amplitudes.iter().fold(T::zero(), |s, p| s + p.norm_sqr());
    if !raw_excitation.is_finite() {
        return Err(Error::SingularSystem {
            condition: f64::INFINITY,
        });
    }
    let populations = if raw_excitation.is_zero() {
        vec![T::zero(); n]
    } else {
        amplitudes.iter().map(|p| p.norm_sqr() / raw_excitation).collect()
    };
    Ok(SteadyState {
        amplitudes,
        populations,
        raw_excitation,
        condition_estimate: cond,
        weak_excitation_ok: raw_excitation <= T::lit(WEAK_EXCITATION_LIMIT),
    })
}

/// Assemble and solve in one call.
pub fn solve_configuration<T: Real>(
    geom: &ArrayGeometry<T>,
    cpl: &CouplingParams<T>,
    scheme: &DriveScheme<T>,
) -> Result<SteadyState<T>> {
    let matrix = build_coupling_matrix(geom, cpl)?;
    let drive = build_drive_vector(geom, scheme)?;
    solve_steady_state(&matrix, &drive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::model::*;
    use num_traits::Zero;
    use std::f64::consts::PI;

    type C = Cplx<f64>;

    #[test]
    fn single_atom_scalar_inversion() {
        let g = build_geometry(1, 0.5).unwrap();
        let c = CouplingParams::resonant(1, 0.0, 0.0).unwrap();
        let s = make_uniform_scheme(&g, PI / 2.0, 0.01).unwrap();
        let st = solve_configuration(&g, &c, &s).unwrap();
        assert!((st.amplitudes[0] - C::new(0.0, -0.02)).norm() < 1e-15);
        assert_eq!(st.populations, vec![1.0]);
        assert!(st.weak_excitation_ok);
    }

    #[test]
    fn residual_bound() {
        let g = build_geometry(12, 0.83).unwrap();
        let c = CouplingParams::new(1.0, 0.3, 0.1, (0..12).map(|j| 0.05 * j as f64).collect()).unwrap();
        let s = make_asymmetric_scheme(&g, 0.4, 2.1, 0.01).unwrap();
        let m = build_coupling_matrix(&g, &c).unwrap();
        let w = build_drive_vector(&g, &s).unwrap();
        let st = solve_steady_state(&m, &w).unwrap();
        let mp = m.entries().matvec(&st.amplitudes);
        let r: Vec<C> = mp.iter().zip(&w).map(|(a, b)| a - C::new(0.0, 1.0) * b).collect();
        assert!(norm2(&r) <= 1e-10 * norm2(&w));
        let sum: f64 = st.populations.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excluded_point_is_singular() {
        let g = build_geometry(100, PI).unwrap();
        let c = CouplingParams::resonant(100, 0.0, 0.0).unwrap();
        let s = make_uniform_scheme(&g, PI / 2.0, 0.01).unwrap();
        assert!(matches!(
            solve_configuration(&g, &c, &s),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn population_normalization_cases() {
        let one = C::new(1.0, 0.0);
        let z = C::zero();
        assert_eq!(normalized_populations(&[one, z, z]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(normalized_populations(&[one, one]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(normalized_populations::<f64>(&[z, z]), Err(Error::ZeroExcitation));
    }

    #[test]
    fn undriven_array_has_zero_excitation() {
        let g = build_geometry(3, 0.5).unwrap();
        let c = CouplingParams::resonant(3, 0.0, 0.0).unwrap();
        let s = make_defect_scheme(&g, 0.5, 0.5, 0.01, &[1, 2, 3]).unwrap();
        let st = solve_configuration(&g, &c, &s).unwrap();
        assert_eq!(st.raw_excitation, 0.0);
        assert_eq!(st.normalized_populations(), Err(Error::ZeroExcitation));
    }

    #[test]
    fn weak_flag_trips_for_strong_drive() {
        let g = build_geometry(4, 0.5).unwrap();
        let c = CouplingParams::resonant(4, 0.0, 0.0).unwrap();
        let s = make_uniform_scheme(&g, PI / 2.0, 1.0).unwrap();
        let st = solve_configuration(&g, &c, &s).unwrap();
        assert!(!st.weak_excitation_ok);
    }

    #[test]
    fn dimension_mismatch() {
        let g = build_geometry(3, 0.5).unwrap();
        let c = CouplingParams::resonant(3, 0.0, 0.0).unwrap();
        let m = build_coupling_matrix(&g, &c).unwrap();
        assert!(solve_steady_state(&m, &[C::zero(); 2]).is_err());
    }
}
