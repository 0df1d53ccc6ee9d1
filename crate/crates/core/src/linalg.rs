//! Dense complex matrices and a self-contained Hermitian eigensolver.
//!
//! All operators in this crate live on fixed spaces of dimension 3, 8 or 24,
//! and the Fock-space checks stay below a few hundred basis states, so a
//! dense representation with a cyclic Jacobi eigensolver covers every need
//! without pulling in a LAPACK binding.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{r, Real};

/// Square complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from real entries (imaginary parts zero).
    pub fn from_real(rows: &[&[T]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| Complex::new(rows[i][j], T::zero()))
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = Complex::new(e, T::zero());
        }
        m
    }

    /// Rank-1 projector |v><v| (the vector need not be normalized).
    pub fn projector(v: &[Complex<T>]) -> Self {
        let dim = v.len();
        Self::from_fn(dim, |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conjugate_transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scaled(&self, factor: T) -> Self {
        let f = Complex::new(factor, T::zero());
        Self::from_fn(self.dim, |i, j| self[(i, j)] * f)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        Self::from_fn(self.dim, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        Self::from_fn(self.dim, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    /// Kronecker product, left factor on the coarse index.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (na, nb) = (self.dim, rhs.dim);
        let mut out = Self::zeros(na * nb);
        for ia in 0..na {
            for ja in 0..na {
                let a = self[(ia, ja)];
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for ib in 0..nb {
                    for jb in 0..nb {
                        out[(ia * nb + ib, ja * nb + jb)] = a * rhs[(ib, jb)];
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.matmul(rhs).sub(&rhs.matmul(self))
    }

    pub fn max_abs_entry(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        self.sub(rhs).max_abs_entry()
    }

    /// Largest entry-wise deviation from Hermitian symmetry.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Checks unitarity by the max entry of `U U^dag - I`.
    pub fn unitarity_defect(&self) -> T {
        self.matmul(&self.conjugate_transpose())
            .max_abs_diff(&Self::identity(self.dim))
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi rotations.
///
/// The rotation for the pair `(p, q)` first absorbs the phase of `A[p][q]`
/// and then applies the classical symmetric 2x2 rotation, so the update
/// stays exactly Hermitian. Matrices here are at most a few hundred rows,
/// where Jacobi converges in a handful of sweeps.
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    let defect = m.hermiticity_defect();
    let scale = m.max_abs_entry().max(T::one());
    if defect > r::<T>(1e-9) * scale {
        return Err(Error::NotHermitian {
            deviation: defect.to_f64().unwrap_or(f64::NAN),
        });
    }

    let n = m.dim();
    let mut a = m.clone();
    // Symmetrize exactly so rounding in the input cannot bias the sweep.
    for i in 0..n {
        a[(i, i)] = Complex::new(a[(i, i)].re, T::zero());
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * Complex::new(r(0.5), T::zero());
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }

    let tol = T::epsilon() * scale;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, p, q);
            }
        }
    }

    let mut eigs: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(eigs)
}

fn jacobi_rotate<T: Real>(a: &mut CMatrix<T>, p: usize, q: usize) {
    let beta = a[(p, q)];
    let absb = beta.norm();
    let scale = a[(p, p)].re.abs().max(a[(q, q)].re.abs()).max(T::one());
    if absb <= scale * T::epsilon() * r(0.01) {
        return;
    }
    let u = beta / Complex::new(absb, T::zero());
    let alpha = a[(p, p)].re;
    let gamma = a[(q, q)].re;

    let theta = (gamma - alpha) / (r::<T>(2.0) * absb);
    let t = {
        let abs_t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        if theta < T::zero() {
            -abs_t
        } else {
            abs_t
        }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    let cu = u * Complex::new(c, T::zero());
    let su = u * Complex::new(s, T::zero());
    let cs = Complex::new(c, T::zero());
    let ss = Complex::new(s, T::zero());

    let n = a.dim();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = akp * cu - akq * ss;
        let new_kq = akp * su + akq * cs;
        a[(k, p)] = new_kp;
        a[(k, q)] = new_kq;
        a[(p, k)] = new_kp.conj();
        a[(q, k)] = new_kq.conj();
    }

    let two_cs_b = r::<T>(2.0) * c * s * absb;
    let new_pp = c * c * alpha - two_cs_b + s * s * gamma;
    let new_qq = s * s * alpha + two_cs_b + c * c * gamma;
    a[(p, p)] = Complex::new(new_pp, T::zero());
    a[(q, q)] = Complex::new(new_qq, T::zero());
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(m: &CMatrix<T>) -> Result<T> {
    Ok(hermitian_eigenvalues(m)?[0])
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue<T: Real>(m: &CMatrix<T>) -> Result<T> {
    Ok(*hermitian_eigenvalues(m)?
        .last()
        .expect("matrix has at least one eigenvalue"))
}
