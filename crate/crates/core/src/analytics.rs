//! Closed forms for the reciprocal (`D = 0`, `gamma_ng = 0`) single central
//! defect at normal incidence, and the empirical RIEL-minima rule for the
//! two-zone scheme.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// `lim_{xi -> 0} P_m`.
pub const SATURATED_DEFECT_POPULATION: f64 = 2.0 / 3.0;
/// `lim_{xi -> 0} P_{m +- 1}`.
pub const SATURATED_NEIGHBOR_POPULATION: f64 = 1.0 / 6.0;

const POLE_EPS: f64 = 1e-9;

fn check_xi<T: Real>(xi: T) -> Result<()> {
    if !xi.is_finite() || xi.sin().abs() <= T::lit(POLE_EPS) {
        return Err(Error::Domain(format!("xi = {xi} is at a pole (sin xi = 0)")));
    }
    Ok(())
}

fn check_n(n_atoms: usize) -> Result<()> {
    if n_atoms < 5 {
        return Err(Error::Domain(format!("closed form needs N >= 5, got {n_atoms}")));
    }
    Ok(())
}

/// Steady-state amplitudes with the defect at `m = ceil(N/2)`:
/// edges `-W (i + tan(xi/2))`, defect `-W 2 csc xi`,
/// neighbors `-W (csc xi - 2 cot xi)`, all others `-W 2 tan(xi/2)`.
pub fn analytic_defect_amplitudes<T: Real>(n_atoms: usize, xi: T, rabi: T) -> Result<Vec<Cplx<T>>> {
    check_n(n_atoms)?;
    check_xi(xi)?;
    let two = T::lit(2.0);
    let t = (xi / two).tan();
    let csc = xi.sin().recip();
    let cot = xi.tan().recip();
    let m = n_atoms.div_ceil(2);
    let scale = -rabi;
    Ok((1..=n_atoms)
        .map(|j| {
            let v = if j == 1 || j == n_atoms {
                Cplx::new(t, T::one())
            } else if j == m {
                Cplx::new(two * csc, T::zero())
            } else if j + 1 == m || j == m + 1 {
                Cplx::new(csc - two * cot, T::zero())
            } else {
                Cplx::new(two * t, T::zero())
            };
            v * scale
        })
        .collect())
}

/// Normalized populations of [`analytic_defect_amplitudes`].
pub fn analytic_defect_populations<T: Real>(n_atoms: usize, xi: T) -> Result<Vec<T>> {
    let amps = analytic_defect_amplitudes(n_atoms, xi, T::one())?;
    let total = amps.iter().fold(T::zero(), |s, a| s + a.norm_sqr());
    Ok(amps.iter().map(|a| a.norm_sqr() / total).collect())
}

/// Population of the undriven atom:
/// `2 csc^2 xi / (1 - 4 cot xi tan(xi/2) + 3 csc^2 xi + (2N - 9) tan^2(xi/2))`.
pub fn analytic_pm<T: Real>(n_atoms: usize, xi: T) -> Result<T> {
    check_n(n_atoms)?;
    check_xi(xi)?;
    let csc2 = xi.sin().powi(-2);
    let cot = xi.tan().recip();
    let t = (T::lit(0.5) * xi).tan();
    let nn = T::from_usize_lossy(2 * n_atoms) - T::lit(9.0);
    let den = T::one() - T::lit(4.0) * cot * t + T::lit(3.0) * csc2 + nn * t * t;
    Ok(T::lit(2.0) * csc2 / den)
}

/// `2 k pi + 2 atan(1 / sqrt(4N - 13))`, the maximizer of [`analytic_pm`].
pub fn analytic_xi_max<T: Real>(n_atoms: usize, branch: i64) -> Result<T> {
    let disc = 4 * n_atoms as i64 - 13;
    if disc <= 0 {
        return Err(Error::Domain(format!("4N - 13 must be positive, got {disc}")));
    }
    let k = T::from_i64(branch).ok_or_else(|| Error::Domain("branch out of range".into()))?;
    let two = T::lit(2.0);
    Ok(two * k * T::PI() + two * (T::one() / T::from_i64(disc).unwrap().sqrt()).atan())
}

/// Predicted RIEL minima as values of `cos theta1 - cos theta2`:
/// `2 n pi / (m xi)` for integers `n` in `[1 - m xi/pi, m xi/pi - 1]`,
/// `m = ceil(N/2)`, keeping values inside `[-2, 2]`. `n = 0` is always
/// included. Sorted ascending.
pub fn predict_riel_minima<T: Real>(n_atoms: usize, xi: T) -> Result<Vec<T>> {
    if n_atoms == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    if !(xi > T::zero() && xi < T::PI()) {
        return Err(Error::Domain(format!("rule holds for 0 < xi < pi, got {xi}")));
    }
    let m = T::from_usize_lossy(n_atoms.div_ceil(2));
    let ratio = m * xi / T::PI();
    // Absorb rounding in m*xi/pi (e.g. 50 * 0.1 pi).
    let slack = T::lit(1e-9);
    let hi = (ratio - T::one() + slack).floor().to_i64().unwrap_or(0).max(0);
    let two = T::lit(2.0);
    let mut out: Vec<T> = (-hi..=hi)
        .map(|n| two * T::from_i64(n).unwrap() * T::PI() / (m * xi))
        .filter(|d| d.abs() <= two)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Angles on the diagonal `cos theta1 = -cos theta2` realizing a predicted
/// difference `cos theta1 - cos theta2 = diff`.
pub fn diagonal_angles<T: Real>(diff: T) -> Option<(T, T)> {
    let c = diff / T::lit(2.0);
    if c.abs() > T::one() {
        return None;
    }
    Some((c.acos(), (-c).acos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn defect_amplitude_at_center() {
        let a = analytic_defect_amplitudes(7, 0.3 * PI, 1.0).unwrap();
        let csc = 1.0 / (0.3 * PI).sin();
        assert!((a[3].re + 2.0 * csc).abs() < 1e-14);
        assert!((a[3].re + 2.472135954999579).abs() < 1e-12);
        assert_eq!(a[0].im, -1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(analytic_defect_amplitudes(4, 0.3, 1.0), Err(Error::Domain(_))));
        assert!(analytic_pm(7, PI).is_err());
        assert!(analytic_pm(7, 0.0).is_err());
        assert!(analytic_xi_max::<f64>(3, 0).is_err());
        assert!(analytic_xi_max::<f64>(4, 0).is_ok());
    }

    #[test]
    fn pm_matches_amplitude_ratio() {
        for n in [5, 6, 7, 30, 101] {
            for xi in [0.07, 0.4, 1.3, 2.2, 2.9, 4.0] {
                let p = analytic_defect_populations(n, xi).unwrap();
                let pm: f64 = analytic_pm(n, xi).unwrap();
                assert!((p[n.div_ceil(2) - 1] - pm).abs() < 1e-12, "n={n} xi={xi}");
            }
        }
    }

    #[test]
    fn small_xi_saturation() {
        let pm: f64 = analytic_pm(100, 1e-4).unwrap();
        assert!((pm - 2.0 / 3.0).abs() < 1e-3);
        for n in [10, 100, 1000] {
            assert!((analytic_pm(n, 1e-5).unwrap() - SATURATED_DEFECT_POPULATION).abs() < 1e-4);
        }
    }

    #[test]
    fn xi_max_values() {
        let x: f64 = analytic_xi_max(5, 0).unwrap();
        assert!((x - 2.0 * (1.0 / 7f64.sqrt()).atan()).abs() < 1e-15);
        assert!((x - 0.7227).abs() < 1e-4);
        let x1: f64 = analytic_xi_max(5, 1).unwrap();
        assert!((x1 - x - 2.0 * PI).abs() < 1e-12);
        let big: f64 = analytic_xi_max(100_000_000, 0).unwrap();
        assert!(big < 1e-3);
    }

    #[test]
    fn xi_max_is_local_max() {
        let x: f64 = analytic_xi_max(100, 0).unwrap();
        let c = analytic_pm(100, x).unwrap();
        assert!(c >= analytic_pm(100, x + 1e-3).unwrap());
        assert!(c >= analytic_pm(100, x - 1e-3).unwrap());
        // Derivative changes sign across the maximizer.
        let h = 1e-6;
        let dl = analytic_pm(100, x - h).unwrap() - analytic_pm(100, x - 2.0 * h).unwrap();
        let dr = analytic_pm(100, x + 2.0 * h).unwrap() - analytic_pm(100, x + h).unwrap();
        assert!(dl > 0.0 && dr < 0.0);
    }

    #[test]
    fn riel_minima_rule() {
        let v: Vec<f64> = predict_riel_minima(100, 0.1 * PI).unwrap();
        assert_eq!(v.len(), 9);
        for (i, d) in v.iter().enumerate() {
            let n = i as f64 - 4.0;
            assert!((d - 2.0 * n / 5.0).abs() < 1e-12);
            let (t1, t2) = diagonal_angles(*d).unwrap();
            assert!((t1.cos() - n / 5.0).abs() < 1e-12);
            assert!((t2.cos() + n / 5.0).abs() < 1e-12);
        }
        // m xi = pi: only the anti-diagonal trench.
        assert_eq!(predict_riel_minima(10, PI / 5.0).unwrap(), vec![0.0]);
        // Window below one still keeps n = 0.
        assert_eq!(predict_riel_minima(4, 0.1).unwrap(), vec![0.0]);
        assert!(predict_riel_minima(10, PI).is_err());
    }

    #[test]
    fn riel_minima_clipped() {
        // m xi / pi = 25 * 0.9 = 22.5: integer window |n| <= 21.
        let v: Vec<f64> = predict_riel_minima(50, 0.9 * PI).unwrap();
        assert!(v.iter().all(|d| d.abs() <= 2.0));
        assert_eq!(v.len(), 43);
        // Small m xi: window [-1, 1] maps to 2/(m xi/pi) = 2/2.5 < 2.
        let v: Vec<f64> = predict_riel_minima(5, 0.8333 * PI).unwrap();
        assert!(v.iter().all(|d| d.abs() <= 2.0));
    }
}
