//! Fixed-step RK4 integration of `dp/dt = -i w + M p` from `p(0) = 0`.
//!
//! Independent of the linear solve; used as an oracle for steady states.

use std::io::Write;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::model::CouplingMatrix;
use crate::scalar::{Cplx, Real};

/// RK4 keeps `|R(z)| <= 1` on the left half-disk of radius ~2.6.
const RK4_STABLE_RADIUS: f64 = 2.5;

/// Relative derivative norm below which a trajectory counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions<T> {
    pub t_end: T,
    pub dt: T,
    /// Snapshot every `stride` steps (the final state is always kept).
    pub stride: usize,
}

impl<T: Real> Default for IntegrationOptions<T> {
    fn default() -> Self {
        Self {
            t_end: T::lit(200.0),
            dt: T::lit(0.01),
            stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub times: Vec<T>,
    pub amplitude_snapshots: Vec<Vec<Cplx<T>>>,
    pub converged: bool,
    pub final_derivative_norm: T,
}

impl<T: Real> TrajectoryRecord<T> {
    pub fn final_amplitudes(&self) -> &[Cplx<T>] {
        self.amplitude_snapshots.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn integrate<T: Real>(
    matrix: &CouplingMatrix<T>,
    drive: &[Cplx<T>],
    opts: &IntegrationOptions<T>,
) -> Result<TrajectoryRecord<T>> {
    let n = matrix.dim();
    if drive.len() != n {
        return Err(Error::validation("drive", format!("expected length {n}, got {}", drive.len())));
    }
    if !(opts.t_end > T::zero() && opts.t_end.is_finite()) {
        return Err(Error::validation("t_end", "must be positive and finite"));
    }
    if !(opts.dt > T::zero() && opts.dt.is_finite()) {
        return Err(Error::validation("dt", "must be positive and finite"));
    }
    if opts.stride == 0 {
        return Err(Error::validation("stride", "must be at least 1"));
    }
    let m = matrix.entries();
    let bound = opts.dt * m.norm_inf();
    if bound > T::lit(RK4_STABLE_RADIUS) {
        return Err(Error::validation(
            "dt",
            format!("dt * ||M||_inf = {bound} exceeds the RK4 stability bound {RK4_STABLE_RADIUS}"),
        ));
    }

    let steps = (opts.t_end / opts.dt).round().to_usize().unwrap_or(0).max(1);
    let h = opts.t_end / T::from_usize_lossy(steps);
    let minus_i = Cplx::new(T::zero(), -T::one());
    let source: Vec<Cplx<T>> = drive.iter().map(|w| w * minus_i).collect();
    let rhs = |p: &[Cplx<T>]| -> Vec<Cplx<T>> {
        m.matvec(p).into_iter().zip(&source).map(|(a, s)| a + s).collect()
    };
    let axpy = |p: &[Cplx<T>], k: &[Cplx<T>], s: T| -> Vec<Cplx<T>> {
        p.iter().zip(k).map(|(a, b)| a + b * s).collect()
    };

    let half = T::lit(0.5);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let mut p = vec![Cplx::zero(); n];
    let mut times = vec![T::zero()];
    let mut snaps = vec![p.clone()];
    for step in 1..=steps {
        let k1 = rhs(&p);
        let k2 = rhs(&axpy(&p, &k1, h * half));
        let k3 = rhs(&axpy(&p, &k2, h * half));
        let k4 = rhs(&axpy(&p, &k3, h));
        for j in 0..n {
            p[j] = p[j] + (k1[j] + k2[j] * two + k3[j] * two + k4[j]) * sixth;
        }
        if step % opts.stride == 0 || step == steps {
            times.push(h * T::from_usize_lossy(step));
            snaps.push(p.clone());
        }
    }
    let final_derivative_norm = norm2(&rhs(&p));
    let drive_norm = norm2(drive);
    let converged = final_derivative_norm <= T::lit(CONVERGENCE_TOL) * drive_norm;
    Ok(TrajectoryRecord {
        times,
        amplitude_snapshots: snaps,
        converged,
        final_derivative_norm,
    })
}

/// CSV with columns `t, re_p1, im_p1, ..., re_pN, im_pN`.
pub fn write_trajectory_csv<T: Real, W: Write>(record: &TrajectoryRecord<T>, out: W) -> Result<()> {
    let n = record.amplitude_snapshots.first().map_or(0, Vec::len);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["t".to_string()];
    for j in 1..=n {
        header.push(format!("re_p{j}"));
        header.push(format!("im_p{j}"));
    }
    w.write_record(&header)?;
    for (t, snap) in record.times.iter().zip(&record.amplitude_snapshots) {
        let mut row = vec![crate::io::fmt_num(*t)];
        for z in snap {
            row.push(crate::io::fmt_num(z.re));
            row.push(crate::io::fmt_num(z.im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
