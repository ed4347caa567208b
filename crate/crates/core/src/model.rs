//! Physical configuration: array geometry, guided/non-guided couplings,
//! drive schemes, and assembly of the coupling matrix and drive vector.
//!
//! Conventions:
//! - Rates are in units of the total guided decay rate `gamma` (default 1).
//! - Positions are dimensionless phases `k x_j = (j - 1) xi`, atom 1 at the
//!   origin. Site indices in public APIs are 1-based.
//! - The drive on atom `j` is `rabi_j * exp(i phi_j) * exp(i k x_j cos theta_j)`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, CMatrix, LuFactors};
use crate::scalar::{cis, Cplx, Real};

/// Text attached to computations below the near-field validity bound.
pub const NEAR_FIELD_WARNING: &str =
    "xi < 0.1*pi: near-field dipole corrections are neglected by this model and may be significant";

/// Default Rabi amplitude in units of gamma.
pub const DEFAULT_RABI: f64 = 0.01;

/// Uniformly spaced 1D array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry<T> {
    n_atoms: usize,
    xi: T,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Interparticle phase `k d` in radians.
    pub fn xi(&self) -> T {
        self.xi
    }

    /// `k x_j` for site `j` (1-based).
    pub fn position(&self, j: usize) -> T {
        T::from_usize_lossy(j - 1) * self.xi
    }

    pub fn positions(&self) -> Vec<T> {
        (1..=self.n_atoms).map(|j| self.position(j)).collect()
    }

    /// Central site `m = ceil(N / 2)`.
    pub fn center(&self) -> usize {
        self.n_atoms.div_ceil(2)
    }

    /// True when `xi` is below the near-field validity bound `0.1 pi`.
    pub fn near_field(&self) -> bool {
        self.xi < T::lit(0.1) * T::PI()
    }
}

pub fn build_geometry<T: Real>(n_atoms: usize, xi: T) -> Result<ArrayGeometry<T>> {
    if n_atoms == 0 {
        return Err(Error::validation("n_atoms", "must be at least 1"));
    }
    if !(xi > T::zero() && xi < T::TAU()) {
        return Err(Error::validation(
            "xi",
            format!("must satisfy 0 < xi < 2*pi, got {xi}"),
        ));
    }
    Ok(ArrayGeometry { n_atoms, xi })
}

/// Guided and non-guided decay rates plus per-site detunings.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingParams<T> {
    gamma: T,
    directionality: T,
    gamma_ng: T,
    detunings: Vec<T>,
}

impl<T: Real> CouplingParams<T> {
    pub fn new(gamma: T, directionality: T, gamma_ng: T, detunings: Vec<T>) -> Result<Self> {
        if !(gamma > T::zero() && gamma.is_finite()) {
            return Err(Error::validation("gamma", "must be positive and finite"));
        }
        if !(directionality >= -T::one() && directionality <= T::one()) {
            return Err(Error::validation(
                "directionality",
                format!("must lie in [-1, 1], got {directionality}"),
            ));
        }
        if !(gamma_ng >= T::zero() && gamma_ng.is_finite()) {
            return Err(Error::validation("gamma_ng", "must be non-negative and finite"));
        }
        if detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::validation("detunings", "must be finite"));
        }
        Ok(Self {
            gamma,
            directionality,
            gamma_ng,
            detunings,
        })
    }

    /// `gamma = 1`, all detunings zero.
    pub fn resonant(n_atoms: usize, directionality: T, gamma_ng: T) -> Result<Self> {
        Self::new(T::one(), directionality, gamma_ng, vec![T::zero(); n_atoms])
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn directionality(&self) -> T {
        self.directionality
    }

    pub fn gamma_ng(&self) -> T {
        self.gamma_ng
    }

    pub fn detunings(&self) -> &[T] {
        &self.detunings
    }

    pub fn gamma_r(&self) -> T {
        self.gamma * (T::one() + self.directionality) / T::lit(2.0)
    }

    pub fn gamma_l(&self) -> T {
        self.gamma * (T::one() - self.directionality) / T::lit(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeTag {
    Uniform,
    Asymmetric,
    Defect,
    Custom,
}

/// Per-atom drive amplitudes, phases and incident angles.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveScheme<T> {
    rabi: Vec<T>,
    phases: Vec<T>,
    angles: Vec<T>,
    tag: SchemeTag,
    defect_sites: Vec<usize>,
}

impl<T: Real> DriveScheme<T> {
    pub fn n_atoms(&self) -> usize {
        self.rabi.len()
    }

    pub fn rabi(&self) -> &[T] {
        &self.rabi
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn tag(&self) -> SchemeTag {
        self.tag
    }

    /// Undriven sites, 1-based and ascending.
    pub fn defect_sites(&self) -> &[usize] {
        &self.defect_sites
    }

    /// Same scheme with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.rabi.iter_mut().for_each(|r| *r = *r * factor);
        out
    }

    /// Same scheme with `offset` added to every phase.
    pub fn phase_shifted(&self, offset: T) -> Self {
        let mut out = self.clone();
        out.phases.iter_mut().for_each(|p| *p = *p + offset);
        out
    }

    /// Explicit per-atom drive. Sites with zero amplitude are recorded as
    /// defects.
    pub fn custom(rabi: Vec<T>, phases: Vec<T>, angles: Vec<T>) -> Result<Self> {
        let n = rabi.len();
        if n == 0 {
            return Err(Error::validation("rabi", "must not be empty"));
        }
        if phases.len() != n {
            return Err(Error::validation("phases", format!("expected length {n}, got {}", phases.len())));
        }
        if angles.len() != n {
            return Err(Error::validation("angles", format!("expected length {n}, got {}", angles.len())));
        }
        if rabi.iter().any(|r| !(*r >= T::zero() && r.is_finite())) {
            return Err(Error::validation("rabi", "amplitudes must be non-negative and finite"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::validation("phases", "must be finite"));
        }
        for &a in &angles {
            check_angle("angles", a)?;
        }
        let defect_sites = rabi
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_zero())
            .map(|(i, _)| i + 1)
            .collect();
        Ok(Self {
            rabi,
            phases,
            angles,
            tag: SchemeTag::Custom,
            defect_sites,
        })
    }
}

fn check_angle<T: Real>(field: &str, theta: T) -> Result<()> {
    if theta >= T::zero() && theta <= T::PI() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must lie in [0, pi], got {theta}")))
    }
}

fn check_rabi<T: Real>(rabi: T) -> Result<()> {
    if rabi >= T::zero() && rabi.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("rabi", "must be non-negative and finite"))
    }
}

/// Every atom driven at the same angle; phase reference at atom 1.
pub fn make_uniform_scheme<T: Real>(geom: &ArrayGeometry<T>, theta: T, rabi: T) -> Result<DriveScheme<T>> {
    check_angle("theta", theta)?;
    check_rabi(rabi)?;
    let n = geom.n_atoms();
    Ok(DriveScheme {
        rabi: vec![rabi; n],
        phases: vec![-geom.position(1) * theta.cos(); n],
        angles: vec![theta; n],
        tag: SchemeTag::Uniform,
        defect_sites: Vec::new(),
    })
}

/// `theta1` on sites `1..=m`, `theta2` on `m+1..=N`, `m = ceil(N/2)`; both
/// segments take atom 1 as phase reference.
pub fn make_asymmetric_scheme<T: Real>(
    geom: &ArrayGeometry<T>,
    theta1: T,
    theta2: T,
    rabi: T,
) -> Result<DriveScheme<T>> {
    check_angle("theta1", theta1)?;
    check_angle("theta2", theta2)?;
    check_rabi(rabi)?;
    let n = geom.n_atoms();
    let m = geom.center();
    let angles: Vec<T> = (1..=n).map(|j| if j <= m { theta1 } else { theta2 }).collect();
    let x1 = geom.position(1);
    let phases = angles.iter().map(|a| -x1 * a.cos()).collect();
    Ok(DriveScheme {
        rabi: vec![rabi; n],
        phases,
        angles,
        tag: SchemeTag::Asymmetric,
        defect_sites: Vec::new(),
    })
}

/// Drive removed from `defect_sites` (1-based).
///
/// The driven atoms split into maximal segments. The segment left of the
/// first defect is driven at `theta1` with its phase anchored at its
/// rightmost atom; every other segment is driven at `pi - theta2` with its
/// phase anchored at its leftmost atom. Anchoring means
/// `phi_j = -k x_anchor cos theta_j`, so the travelling phase vanishes at
/// the atom next to the defect and the profile is mirror symmetric about a
/// single defect when `theta1 == theta2`.
pub fn make_defect_scheme<T: Real>(
    geom: &ArrayGeometry<T>,
    theta1: T,
    theta2: T,
    rabi: T,
    defect_sites: &[usize],
) -> Result<DriveScheme<T>> {
    check_angle("theta1", theta1)?;
    check_angle("theta2", theta2)?;
    check_rabi(rabi)?;
    let n = geom.n_atoms();
    if defect_sites.is_empty() {
        return Err(Error::validation("defect_sites", "must not be empty"));
    }
    let mut defects = defect_sites.to_vec();
    defects.sort_unstable();
    defects.dedup();
    if let Some(&bad) = defects.iter().find(|&&d| d == 0 || d > n) {
        return Err(Error::validation(
            "defect_sites",
            format!("site {bad} outside [1, {n}]"),
        ));
    }
    let right_angle = T::PI() - theta2;
    let mut rabi_v = vec![rabi; n];
    let mut phases = vec![T::zero(); n];
    let mut angles = vec![T::zero(); n];
    let first_defect = defects[0];

    let mut j = 1;
    while j <= n {
        if defects.binary_search(&j).is_ok() {
            rabi_v[j - 1] = T::zero();
            // Undriven: angle only matters for bookkeeping.
            angles[j - 1] = if j < first_defect { theta1 } else { right_angle };
            j += 1;
            continue;
        }
        let start = j;
        while j <= n && defects.binary_search(&j).is_err() {
            j += 1;
        }
        let end = j - 1;
        let (theta, anchor) = if end < first_defect {
            (theta1, end)
        } else {
            (right_angle, start)
        };
        let phi = -geom.position(anchor) * theta.cos();
        for site in start..=end {
            angles[site - 1] = theta;
            phases[site - 1] = phi;
        }
    }
    Ok(DriveScheme {
        rabi: rabi_v,
        phases,
        angles,
        tag: SchemeTag::Defect,
        defect_sites: defects,
    })
}

/// Single undriven atom at the center `m = ceil(N/2)`.
pub fn make_central_defect_scheme<T: Real>(
    geom: &ArrayGeometry<T>,
    theta1: T,
    theta2: T,
    rabi: T,
) -> Result<DriveScheme<T>> {
    make_defect_scheme(geom, theta1, theta2, rabi, &[geom.center()])
}

/// Assembled coupling matrix with its LU factorization and a 1-norm
/// condition estimate.
#[derive(Debug, Clone)]
pub struct CouplingMatrix<T> {
    entries: CMatrix<T>,
    factors: Option<LuFactors<T>>,
    condition_estimate: T,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    /// `||M||_1 * est(||M^-1||_1)`; infinite when a pivot vanished.
    pub fn condition_estimate(&self) -> T {
        self.condition_estimate
    }

    pub fn factors(&self) -> Option<&LuFactors<T>> {
        self.factors.as_ref()
    }

    /// Wraps explicit entries, factorizing them.
    pub fn from_entries(entries: CMatrix<T>) -> Self {
        let factors = lu_factor(&entries);
        let condition_estimate = match &factors {
            Some(lu) => entries.norm1() * lu.inverse_norm1_estimate(),
            None => T::infinity(),
        };
        Self {
            entries,
            factors,
            condition_estimate,
        }
    }
}

/// Entries only:
/// diagonal `i delta_j - (gamma_L + gamma_R + gamma_ng)/2`,
/// above `-gamma_L e^{i|j-l| xi}`, below `-gamma_R e^{i|j-l| xi}`.
pub fn coupling_entries<T: Real>(geom: &ArrayGeometry<T>, cpl: &CouplingParams<T>) -> Result<CMatrix<T>> {
    let n = geom.n_atoms();
    if cpl.detunings().len() != n {
        return Err(Error::validation(
            "detunings",
            format!("expected length {n}, got {}", cpl.detunings().len()),
        ));
    }
    let (gl, gr) = (cpl.gamma_l(), cpl.gamma_r());
    let half_loss = (gl + gr + cpl.gamma_ng()) / T::lit(2.0);
    // Phases depend only on |j - l|.
    let phase: Vec<Cplx<T>> = (0..n)
        .map(|d| cis(T::from_usize_lossy(d) * geom.xi()))
        .collect();
    Ok(CMatrix::from_fn(n, |r, c| {
        if r == c {
            Cplx::new(-half_loss, cpl.detunings()[r])
        } else if r < c {
            phase[c - r] * (-gl)
        } else {
            phase[r - c] * (-gr)
        }
    }))
}

pub fn build_coupling_matrix<T: Real>(
    geom: &ArrayGeometry<T>,
    cpl: &CouplingParams<T>,
) -> Result<CouplingMatrix<T>> {
    Ok(CouplingMatrix::from_entries(coupling_entries(geom, cpl)?))
}

/// `rabi_j * exp(i (phi_j + k x_j cos theta_j))`; exactly zero on defects.
pub fn build_drive_vector<T: Real>(geom: &ArrayGeometry<T>, drive: &DriveScheme<T>) -> Result<Vec<Cplx<T>>> {
    let n = geom.n_atoms();
    if drive.n_atoms() != n {
        return Err(Error::validation(
            "drive",
            format!("scheme has {} atoms, geometry has {n}", drive.n_atoms()),
        ));
    }
    Ok((1..=n)
        .map(|j| {
            let r = drive.rabi[j - 1];
            if r.is_zero() {
                Cplx::zero()
            } else {
                cis(drive.phases[j - 1] + geom.position(j) * drive.angles[j - 1].cos()) * r
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type C = Cplx<f64>;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn geometry_positions() {
        let g = build_geometry(3, PI / 2.0).unwrap();
        assert_eq!(g.positions(), vec![0.0, PI / 2.0, PI]);
        let g = build_geometry(1, 0.1 * PI).unwrap();
        assert_eq!(g.positions(), vec![0.0]);
    }

    #[test]
    fn geometry_rejects_bad_inputs() {
        match build_geometry(4, 0.0) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "xi"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_geometry(4, 2.0 * PI).is_err());
        assert!(build_geometry(4, f64::NAN).is_err());
        match build_geometry(0, 1.0) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "n_atoms"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn near_field_flag() {
        assert!(build_geometry(5, 0.05 * PI).unwrap().near_field());
        assert!(!build_geometry(5, 0.1 * PI).unwrap().near_field());
    }

    #[test]
    fn coupling_params_split() {
        let c = CouplingParams::resonant(2, 0.5, 0.0).unwrap();
        assert_eq!(c.gamma_r(), 0.75);
        assert_eq!(c.gamma_l(), 0.25);
        assert!(CouplingParams::resonant(2, 1.5, 0.0).is_err());
        assert!(CouplingParams::resonant(2, 0.0, -0.1).is_err());
    }

    #[test]
    fn single_atom_matrix() {
        let g = build_geometry(1, 0.3).unwrap();
        let c = CouplingParams::resonant(1, 0.0, 0.0).unwrap();
        let m = build_coupling_matrix(&g, &c).unwrap();
        assert_eq!(m.entries()[(0, 0)], C::new(-0.5, 0.0));
    }

    #[test]
    fn two_atom_reciprocal_matrix() {
        let g = build_geometry(2, PI / 2.0).unwrap();
        let c = CouplingParams::resonant(2, 0.0, 0.0).unwrap();
        let m = build_coupling_matrix(&g, &c).unwrap();
        let e = m.entries();
        assert!(close(e[(0, 0)], C::new(-0.5, 0.0), 1e-15));
        assert!(close(e[(0, 1)], C::new(0.0, -0.5), 1e-15));
        assert!(close(e[(1, 0)], C::new(0.0, -0.5), 1e-15));
        assert!(close(e[(1, 1)], C::new(-0.5, 0.0), 1e-15));
    }

    #[test]
    fn unidirectional_upper_triangle_vanishes() {
        let g = build_geometry(3, 0.7).unwrap();
        let c = CouplingParams::resonant(3, 1.0, 0.0).unwrap();
        let e = build_coupling_matrix(&g, &c).unwrap().entries().clone();
        for r in 0..3 {
            for col in r + 1..3 {
                assert!(e[(r, col)].is_zero());
            }
        }
    }

    #[test]
    fn detuning_and_loss_on_diagonal() {
        let g = build_geometry(2, 0.7).unwrap();
        let c = CouplingParams::new(1.0, 0.3, 0.4, vec![0.2, -0.1]).unwrap();
        let e = build_coupling_matrix(&g, &c).unwrap().entries().clone();
        assert!(close(e[(0, 0)], C::new(-0.7, 0.2), 1e-15));
        assert!(close(e[(1, 1)], C::new(-0.7, -0.1), 1e-15));
        assert!(CouplingParams::resonant(3, 0.0, 0.0)
            .and_then(|c| build_coupling_matrix(&g, &c))
            .is_err());
    }

    #[test]
    fn uniform_normal_incidence_drive() {
        let g = build_geometry(3, 0.4).unwrap();
        let s = make_uniform_scheme(&g, PI / 2.0, 1.0).unwrap();
        assert_eq!(s.phases(), &[0.0; 3]);
        let d = build_drive_vector(&g, &s).unwrap();
        for z in d {
            assert!(close(z, C::new(1.0, 0.0), 1e-15));
        }
    }

    #[test]
    fn asymmetric_two_atom_drive() {
        let g = build_geometry(2, PI).unwrap();
        let s = make_asymmetric_scheme(&g, PI / 2.0, 0.0, 1.0).unwrap();
        let d = build_drive_vector(&g, &s).unwrap();
        assert!(close(d[0], C::new(1.0, 0.0), 1e-15));
        assert!(close(d[1], C::new(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn asymmetric_angles_split_at_center() {
        let g = build_geometry(50, 0.3).unwrap();
        let s = make_asymmetric_scheme(&g, PI / 2.0, PI / 4.0, 1.0).unwrap();
        assert!(s.angles()[..25].iter().all(|&a| a == PI / 2.0));
        assert!(s.angles()[25..].iter().all(|&a| a == PI / 4.0));
        let g = build_geometry(5, 0.3).unwrap();
        let s = make_asymmetric_scheme(&g, 0.1, 0.2, 1.0).unwrap();
        assert_eq!(s.angles(), &[0.1, 0.1, 0.1, 0.2, 0.2]);
    }

    #[test]
    fn defect_drive_zero_and_symmetric() {
        let g = build_geometry(9, 0.37).unwrap();
        let s = make_central_defect_scheme(&g, 0.8, 0.8, 1.0).unwrap();
        assert_eq!(s.defect_sites(), &[5]);
        let d = build_drive_vector(&g, &s).unwrap();
        assert_eq!(d[4], C::zero());
        for j in 0..9 {
            assert!(close(d[j], d[8 - j], 1e-14), "site {j}");
        }
        // Travelling phase vanishes next to the defect.
        assert!(close(d[3], C::new(1.0, 0.0), 1e-15));
        assert!(close(d[5], C::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn two_adjacent_defects() {
        let g = build_geometry(20, 0.1 * PI).unwrap();
        let s = make_defect_scheme(&g, 0.86 * PI, 0.86 * PI, 1.0, &[11, 10]).unwrap();
        assert_eq!(s.defect_sites(), &[10, 11]);
        assert_eq!(s.rabi()[9], 0.0);
        assert_eq!(s.rabi()[10], 0.0);
        assert!(s.rabi().iter().filter(|r| **r == 1.0).count() == 18);
    }

    #[test]
    fn defect_validation() {
        let g = build_geometry(5, 0.3).unwrap();
        assert!(make_defect_scheme(&g, 0.5, 0.5, 1.0, &[6]).is_err());
        assert!(make_defect_scheme(&g, 0.5, 0.5, 1.0, &[0]).is_err());
        assert!(make_defect_scheme(&g, 0.5, 0.5, 1.0, &[]).is_err());
        assert!(make_defect_scheme(&g, 3.5, 0.5, 1.0, &[3]).is_err());
        assert!(make_uniform_scheme(&g, -0.1, 1.0).is_err());
    }

    #[test]
    fn custom_records_zero_amplitude_sites() {
        let s = DriveScheme::custom(vec![1.0, 0.0, 1.0], vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(s.defect_sites(), &[2]);
        assert!(DriveScheme::custom(vec![1.0], vec![0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let g = build_geometry(3, std::f32::consts::FRAC_PI_2).unwrap();
        let c = CouplingParams::<f32>::resonant(3, 0.0, 0.0).unwrap();
        let m = build_coupling_matrix(&g, &c).unwrap();
        assert!((m.entries()[(0, 1)].im + 0.5).abs() < 1e-6);
    }
}
