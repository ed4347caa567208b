//! Dense complex linear algebra: storage, partial-pivot LU and a 1-norm
//! condition estimator.

use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};

use crate::scalar::{Cplx, Real};

/// Dense square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Cplx::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> &[Cplx<T>] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)])
    }

    pub fn matvec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        (0..self.n)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(Cplx::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.n)
            .map(|c| (0..self.n).fold(T::zero(), |s, r| s + self[(r, c)].norm()))
            .fold(T::zero(), T::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|r| self.row(r).iter().fold(T::zero(), |s, a| s + a.norm()))
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Cplx<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Cplx<T> {
        &self.data[r * self.n + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[r * self.n + c]
    }
}

/// `PA = LU` with unit-diagonal `L` and `U` packed into one matrix.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: CMatrix<T>,
    /// Row `i` of `PA` is row `perm[i]` of `A`.
    perm: Vec<usize>,
}

/// Factorizes `a` with partial pivoting. Returns `None` when a pivot is
/// exactly zero.
pub fn lu_factor<T: Real>(a: &CMatrix<T>) -> Option<LuFactors<T>> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|r| (r, lu[(r, k)].norm()))
            .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmax > T::zero()) {
            return None;
        }
        if p != k {
            for c in 0..n {
                lu.data.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for r in k + 1..n {
            let factor = lu[(r, k)] / pivot;
            lu[(r, k)] = factor;
            if factor.is_zero() {
                continue;
            }
            for c in k + 1..n {
                let u = lu[(k, c)];
                lu[(r, c)] = lu[(r, c)] - factor * u;
            }
        }
    }
    Some(LuFactors { lu, perm })
}

impl<T: Real> LuFactors<T> {
    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs dimension mismatch");
        let mut x: Vec<Cplx<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let row = self.lu.row(r);
            let s = (0..r).fold(x[r], |s, c| s - row[c] * x[c]);
            x[r] = s;
        }
        for r in (0..n).rev() {
            let row = self.lu.row(r);
            let s = (r + 1..n).fold(x[r], |s, c| s - row[c] * x[c]);
            x[r] = s / row[r];
        }
        x
    }

    /// Solves `A^H z = b`.
    pub fn solve_adjoint(&self, b: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs dimension mismatch");
        // A^H = U^H L^H P
        let mut w = b.to_vec();
        for r in 0..n {
            let s = (0..r).fold(w[r], |s, c| s - self.lu[(c, r)].conj() * w[c]);
            w[r] = s / self.lu[(r, r)].conj();
        }
        for r in (0..n).rev() {
            let s = (r + 1..n).fold(w[r], |s, c| s - self.lu[(c, r)].conj() * w[c]);
            w[r] = s;
        }
        let mut z = vec![Cplx::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            z[p] = w[i];
        }
        z
    }

    /// Estimate of `||A^{-1}||_1` (Hager's method with Higham's complex
    /// refinements and alternating-sign safeguard).
    pub fn inverse_norm1_estimate(&self) -> T {
        let n = self.dim();
        if n == 0 {
            return T::zero();
        }
        let norm1 = |v: &[Cplx<T>]| v.iter().fold(T::zero(), |s, z| s + z.norm());
        let nt = T::from_usize_lossy(n);
        let mut x = vec![Cplx::new(T::one() / nt, T::zero()); n];
        let mut est = T::zero();
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = norm1(&y);
            if !est.is_finite() {
                return T::infinity();
            }
            let sign: Vec<Cplx<T>> = y
                .iter()
                .map(|v| {
                    let a = v.norm();
                    if a > T::zero() {
                        v / a
                    } else {
                        Cplx::one()
                    }
                })
                .collect();
            let z = self.solve_adjoint(&sign);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b });
            let ztx = z.iter().zip(&x).fold(T::zero(), |s, (a, b)| s + (a.conj() * b).re);
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![Cplx::zero(); n];
            x[j] = Cplx::one();
        }
        if n > 1 {
            let alt: Vec<Cplx<T>> = (0..n)
                .map(|i| {
                    let mag = T::one() + T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
                    let sgn = if i % 2 == 0 { T::one() } else { -T::one() };
                    Cplx::new(sgn * mag, T::zero())
                })
                .collect();
            let alt_est = T::lit(2.0) * norm1(&self.solve(&alt)) / (T::lit(3.0) * nt);
            if alt_est > est {
                est = alt_est;
            }
        }
        est
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2<T: Real>(v: &[Cplx<T>]) -> T {
    v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
}
