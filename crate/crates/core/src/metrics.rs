//! Localization diagnostics over normalized populations.
//!
//! With `dP_j = (P_j - 1/N)` for `P_j > 1/N` and zero otherwise:
//! - IPR  = `sum_j dP_j^2 / (sum_j dP_j)^2`
//! - IIPR = `sum_{j in interface} dP_j^2 / (sum_j dP_j)^2`
//! - RIEL = `(P_interface - P_edge) / sum_j P_j`, `P_edge = P_1 + P_N`
//!
//! Index sets are 1-based.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DriveScheme, SchemeTag};
use crate::scalar::Real;

/// Below this `sum dP_j` the distribution counts as exactly uniform.
pub const UNIFORM_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSet<T> {
    pub ipr: T,
    pub iipr: T,
    /// `None` when interface and edge sets overlap (tiny arrays).
    pub riel: Option<T>,
    pub p_interface: T,
    pub p_edge: T,
    /// Total population on undriven sites; zero without defects.
    pub p_defect: T,
    pub interface_indices: Vec<usize>,
}

fn excess<T: Real>(populations: &[T]) -> Vec<T> {
    let inv_n = T::one() / T::from_usize_lossy(populations.len());
    populations
        .iter()
        .map(|&p| if p > inv_n { p - inv_n } else { T::zero() })
        .collect()
}

pub fn compute_ipr<T: Real>(populations: &[T]) -> T {
    let n = populations.len();
    if n == 0 {
        return T::zero();
    }
    let d = excess(populations);
    let sum = d.iter().fold(T::zero(), |s, &x| s + x);
    if sum < T::lit(UNIFORM_EPS) {
        return T::one() / T::from_usize_lossy(n);
    }
    d.iter().fold(T::zero(), |s, &x| s + x * x) / (sum * sum)
}

/// For an exactly uniform input the interface share of the delocalized
/// value `1/N` is returned, `|interface| / N^2`.
pub fn compute_iipr<T: Real>(populations: &[T], interface: &[usize]) -> Result<T> {
    let n = populations.len();
    check_indices(interface, n)?;
    let set = dedup(interface);
    let d = excess(populations);
    let sum = d.iter().fold(T::zero(), |s, &x| s + x);
    if sum < T::lit(UNIFORM_EPS) {
        let nt = T::from_usize_lossy(n);
        return Ok(T::from_usize_lossy(set.len()) / (nt * nt));
    }
    let num = set.iter().fold(T::zero(), |s, &j| s + d[j - 1] * d[j - 1]);
    Ok(num / (sum * sum))
}

fn check_indices(indices: &[usize], n: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::validation("interface_indices", "must not be empty"));
    }
    if let Some(&bad) = indices.iter().find(|&&j| j == 0 || j > n) {
        return Err(Error::validation(
            "interface_indices",
            format!("index {bad} outside [1, {n}]"),
        ));
    }
    Ok(())
}

fn dedup(indices: &[usize]) -> Vec<usize> {
    let mut v = indices.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Interface atoms for a scheme:
/// two-zone schemes `{m, m+1}`; defects the union of each undriven site and
/// its nearest neighbors. Clipped to `[1, N]`.
pub fn interface_indices<T: Real>(scheme: &DriveScheme<T>) -> Vec<usize> {
    let n = scheme.n_atoms();
    let defects = scheme.defect_sites();
    let raw: Vec<usize> = if defects.is_empty() || matches!(scheme.tag(), SchemeTag::Uniform | SchemeTag::Asymmetric) {
        let m = n.div_ceil(2);
        vec![m, m + 1]
    } else {
        defects
            .iter()
            .flat_map(|&d| [d.saturating_sub(1), d, d + 1])
            .collect()
    };
    dedup(&raw.into_iter().filter(|&j| j >= 1 && j <= n).collect::<Vec<_>>())
}

pub fn edge_indices(n: usize) -> Vec<usize> {
    if n <= 1 {
        vec![1]
    } else {
        vec![1, n]
    }
}

/// RIEL against explicit index sets.
pub fn compute_riel_with_sets<T: Real>(populations: &[T], interface: &[usize], edges: &[usize]) -> Result<T> {
    let n = populations.len();
    check_indices(interface, n)?;
    check_indices(edges, n)?;
    let interface = dedup(interface);
    let edges = dedup(edges);
    if interface.iter().any(|j| edges.contains(j)) {
        return Err(Error::OverlappingSets {
            interface,
            edge: edges,
        });
    }
    let total = populations.iter().fold(T::zero(), |s, &p| s + p);
    if !(total > T::zero()) {
        return Err(Error::ZeroExcitation);
    }
    let pick = |set: &[usize]| set.iter().fold(T::zero(), |s, &j| s + populations[j - 1]);
    Ok((pick(&interface) - pick(&edges)) / total)
}

pub fn compute_riel<T: Real>(populations: &[T], scheme: &DriveScheme<T>) -> Result<T> {
    if populations.len() != scheme.n_atoms() {
        return Err(Error::validation("populations", "length differs from scheme"));
    }
    compute_riel_with_sets(populations, &interface_indices(scheme), &edge_indices(populations.len()))
}

/// All diagnostics for normalized `populations` driven by `scheme`.
pub fn compute_metrics<T: Real>(populations: &[T], scheme: &DriveScheme<T>) -> Result<MetricSet<T>> {
    let n = populations.len();
    if n != scheme.n_atoms() {
        return Err(Error::validation("populations", "length differs from scheme"));
    }
    let interface = interface_indices(scheme);
    let edges = edge_indices(n);
    let sum_over = |set: &[usize]| set.iter().fold(T::zero(), |s, &j| s + populations[j - 1]);
    let riel = match compute_riel_with_sets(populations, &interface, &edges) {
        Ok(r) => Some(r),
        Err(Error::OverlappingSets { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(MetricSet {
        ipr: compute_ipr(populations),
        iipr: compute_iipr(populations, &interface)?,
        riel,
        p_interface: sum_over(&interface),
        p_edge: sum_over(&edges),
        p_defect: sum_over(scheme.defect_sites()),
        interface_indices: interface,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use proptest::prelude::*;

    #[test]
    fn ipr_examples() {
        let mut p = vec![0.0; 7];
        p[0] = 1.0;
        assert_eq!(compute_ipr(&p), 1.0);
        assert_eq!(compute_ipr(&[0.25; 4]), 0.25);
        assert!((compute_ipr(&[0.5f64, 0.5, 0.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn iipr_examples() {
        let p = [0.0, 0.5, 0.5, 0.0];
        assert_eq!(compute_iipr(&p, &[2, 3]).unwrap(), compute_ipr(&p));
        let p = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(compute_iipr(&p, &[3, 4]).unwrap(), 0.0);
        assert_eq!(compute_iipr(&[0.5, 0.25, 0.25, 0.0], &[2, 3]).unwrap(), 0.0);
        assert!(compute_iipr(&p, &[]).is_err());
        assert!(compute_iipr(&p, &[7]).is_err());
    }

    #[test]
    fn iipr_uniform_full_set_is_ipr() {
        let p = [0.2; 5];
        assert_eq!(compute_iipr(&p, &[1, 2, 3, 4, 5]).unwrap(), compute_ipr(&p));
        assert!(compute_iipr(&p, &[3]).unwrap() <= compute_ipr(&p));
    }

    #[test]
    fn riel_limits() {
        assert_eq!(compute_riel_with_sets(&[0.0, 0.5, 0.5, 0.0], &[2, 3], &[1, 4]).unwrap(), 1.0);
        assert_eq!(compute_riel_with_sets(&[0.5, 0.0, 0.0, 0.5], &[2, 3], &[1, 4]).unwrap(), -1.0);
        assert!(matches!(
            compute_riel_with_sets(&[0.3, 0.3, 0.4], &[2, 3], &[1, 3]),
            Err(Error::OverlappingSets { .. })
        ));
    }

    #[test]
    fn scheme_interface_sets() {
        let g = build_geometry(10, 0.3).unwrap();
        let a = make_asymmetric_scheme(&g, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(interface_indices(&a), vec![5, 6]);
        let d = make_central_defect_scheme(&g, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(interface_indices(&d), vec![4, 5, 6]);
        let g = build_geometry(20, 0.3).unwrap();
        let d = make_defect_scheme(&g, 0.5, 0.5, 1.0, &[10, 11]).unwrap();
        assert_eq!(interface_indices(&d), vec![9, 10, 11, 12]);
        let d = make_defect_scheme(&g, 0.5, 0.5, 1.0, &[1, 15]).unwrap();
        assert_eq!(interface_indices(&d), vec![1, 2, 14, 15, 16]);
    }

    #[test]
    fn metric_set_for_defect() {
        let g = build_geometry(5, 0.3).unwrap();
        let d = make_central_defect_scheme(&g, 0.5, 0.5, 1.0).unwrap();
        let p = [0.1f64, 0.2, 0.4, 0.2, 0.1];
        let m = compute_metrics(&p, &d).unwrap();
        assert!((m.p_interface - 0.8).abs() < 1e-15);
        assert!((m.p_edge - 0.2).abs() < 1e-15);
        assert_eq!(m.p_defect, 0.4);
        assert!((m.riel.unwrap() - 0.6).abs() < 1e-15);
        assert!(m.iipr <= m.ipr);
    }

    fn normalized(v: Vec<f64>) -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    proptest! {
        #[test]
        fn bounds_and_subset_order(raw in proptest::collection::vec(0.0f64..1.0, 4..40), k in 0usize..1000) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-6);
            let p = normalized(raw);
            let n = p.len();
            let ipr = compute_ipr(&p);
            prop_assert!(ipr > 0.0 && ipr <= 1.0 + 1e-12);
            let m = n.div_ceil(2);
            let iipr = compute_iipr(&p, &[m, m + 1]).unwrap();
            prop_assert!(iipr >= 0.0 && iipr <= ipr + 1e-15);
            let all: Vec<usize> = (1..=n).collect();
            prop_assert_eq!(compute_iipr(&p, &all).unwrap(), ipr);
            let riel = compute_riel_with_sets(&p, &[m, m + 1], &[1, n]).unwrap();
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&riel));
            let j = 1 + k % n;
            let _ = compute_iipr(&p, &[j]).unwrap();
        }

        #[test]
        fn reversal_invariance(raw in proptest::collection::vec(0.0f64..1.0, 4..30)) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-6);
            let p = normalized(raw);
            let n = p.len();
            let rev: Vec<f64> = p.iter().rev().copied().collect();
            let m = n.div_ceil(2);
            let iface = [m, m + 1];
            let iface_rev = [n + 1 - (m + 1), n + 1 - m];
            prop_assert!((compute_ipr(&p) - compute_ipr(&rev)).abs() < 1e-12);
            prop_assert!((compute_iipr(&p, &iface).unwrap() - compute_iipr(&rev, &iface_rev).unwrap()).abs() < 1e-12);
            let a = compute_riel_with_sets(&p, &iface, &[1, n]).unwrap();
            let b = compute_riel_with_sets(&rev, &iface_rev, &[1, n]).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn single_dominant_site_gives_unit_ipr(n in 2usize..50, site in 0usize..50, big in 0.6f64..1.0) {
            let site = site % n;
            let rest = (1.0 - big) / (n as f64 - 1.0);
            let mut p = vec![rest; n];
            p[site] = big;
            // Only one site exceeds 1/N, so IPR is exactly one.
            prop_assert!((compute_ipr(&p) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn two_excess_sites_give_ipr_below_one(n in 3usize..50, a in 0.4f64..0.5) {
            let mut p = vec![0.0; n];
            p[0] = a;
            p[n - 1] = 1.0 - a;
            prop_assert!(compute_ipr(&p) < 1.0);
        }
    }
}
