//! Dense linear-algebra helpers: column-stacked superoperators, the real
//! parameterization of Hermitian matrices, kernel checks, least squares and a
//! Schur-based Sylvester solver.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{FanoError, Result};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Column-stacking index of `rho_ij` in an `n x n` density matrix.
#[inline]
pub fn vec_index(i: usize, j: usize, n: usize) -> usize {
    i + n * j
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Column-stacked vector of a square matrix.
pub fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, n: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// `-i (1 (x) H - conj(H) (x) 1)`: the superoperator of `rho -> -i (H rho - rho H^dagger)`.
pub fn hamiltonian_superop(h: &DMatrix<C64>) -> DMatrix<C64> {
    let n = h.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    (kron(&id, h) - kron(&h.map(|z| z.conj()), &id)) * (-I)
}

/// Lindblad dissipator of the jump `|to><from|` with population rate `rate`.
pub fn jump_superop(n: usize, from: usize, to: usize, rate: f64) -> DMatrix<C64> {
    let mut l = DMatrix::<C64>::zeros(n * n, n * n);
    add_jump(&mut l, n, from, to, rate);
    l
}

/// Adds `rate * (A rho A^dagger - {A^dagger A, rho}/2)` for `A = |to><from|`.
pub fn add_jump(l: &mut DMatrix<C64>, n: usize, from: usize, to: usize, rate: f64) {
    let r = C64::from(rate);
    l[(vec_index(to, to, n), vec_index(from, from, n))] += r;
    for k in 0..n {
        // -(1/2)(P_f rho + rho P_f): rho_fk and rho_kf lose rate/2 each.
        l[(vec_index(from, k, n), vec_index(from, k, n))] -= r * 0.5;
        l[(vec_index(k, from, n), vec_index(k, from, n))] -= r * 0.5;
    }
}

/// Adds pure dephasing of the `(i, j)` and `(j, i)` coherences at `rate`.
pub fn add_dephasing(l: &mut DMatrix<C64>, n: usize, i: usize, j: usize, rate: f64) {
    let r = C64::from(rate);
    l[(vec_index(i, j, n), vec_index(i, j, n))] -= r;
    l[(vec_index(j, i, n), vec_index(j, i, n))] -= r;
}

/// Number of real parameters of an `n x n` Hermitian matrix.
pub fn hermitian_dim(n: usize) -> usize {
    n * n
}

/// Real coordinates of a Hermitian matrix: the diagonal, then `(Re, Im)` of
/// each upper-triangle entry `(i < j)` in row order.
pub fn hermitian_to_real(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

pub fn real_to_hermitian(x: &[f64], n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::from(x[i]);
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = C64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Real matrix of a Hermiticity-preserving superoperator acting on the real
/// coordinates of [`hermitian_to_real`].
pub fn real_representation(l: &DMatrix<C64>, n: usize) -> DMatrix<f64> {
    let d = hermitian_dim(n);
    let mut r = DMatrix::<f64>::zeros(d, d);
    let mut e = alloc::vec![0.0; d];
    for k in 0..d {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[k] = 1.0;
        let basis = real_to_hermitian(&e, n);
        let image = l * vectorize(&basis);
        let col = hermitian_to_real(&unvectorize(&image, n));
        r.column_mut(k).copy_from_slice(&col);
    }
    r
}

/// Singular values of `m` in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Checks that the kernel of a square generator is one-dimensional.
///
/// Requires the second-smallest singular value to exceed the smallest by six
/// orders of magnitude and to sit above round-off relative to the largest.
pub fn check_unique_kernel(sv: &[f64]) -> Result<()> {
    let n = sv.len();
    if n < 2 {
        return Ok(());
    }
    let smax = sv[0];
    let s_last = sv[n - 1];
    let s_prev = sv[n - 2];
    if s_prev > 1e6 * s_last && s_prev > 1e-12 * smax {
        return Ok(());
    }
    let floor = (1e-9 * smax).max(f64::MIN_POSITIVE);
    let dimension = sv.iter().filter(|s| **s <= floor).count().max(2);
    Err(FanoError::DegenerateSteadyState { dimension })
}

/// Least-squares solution of a tall, full-column-rank system `a x = b` by
/// Householder QR.
///
/// nalgebra's SVD does not always reproduce tall inputs with one heavily
/// weighted row, so it is not used here.
pub fn least_squares(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() < a.ncols() {
        return Err(FanoError::LinearSolve("underdetermined least-squares"));
    }
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    qr.r()
        .solve_upper_triangular(&qtb)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(FanoError::LinearSolve("rank-deficient least-squares"))
}

/// Solves the complex linear system `a x = b` by LU with partial pivoting.
pub fn lu_solve(a: DMatrix<C64>, b: &DVector<C64>) -> Result<DVector<C64>> {
    a.lu().solve(b).ok_or(FanoError::LinearSolve("singular LU"))
}

/// Solver for `H X - X H^dagger = B` with `H` fixed, via the complex Schur
/// form `H = Q T Q^dagger`.
///
/// Each call costs `O(n^3)`; the Schur form is computed once.
pub struct SylvesterSolver {
    q: DMatrix<C64>,
    t: DMatrix<C64>,
}

impl SylvesterSolver {
    pub fn new(h: DMatrix<C64>) -> Result<Self> {
        let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let schur = Schur::try_new(h, f64::EPSILON, 0).ok_or(FanoError::LinearSolve(
            "complex Schur decomposition did not converge",
        ))?;
        let (q, t) = schur.unpack();
        let n = t.nrows();
        let this = Self { q, t };
        // Eigenvalue pairs with lambda_i = conj(lambda_j) make the map singular.
        let mut min_gap = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                min_gap = min_gap.min((this.t[(i, i)] - this.t[(j, j)].conj()).norm());
            }
        }
        if min_gap < 1e-13 * scale {
            return Err(FanoError::SingularCoherentPart {
                detail: alloc::format!(
                    "eigenvalue gap {min_gap:e}: some state of the non-Hermitian Hamiltonian is undamped"
                ),
            });
        }
        Ok(this)
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Eigenvalues of `H` (diagonal of the Schur form).
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.t[(i, i)]).collect()
    }

    pub fn solve(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.dim();
        let t = &self.t;
        let c = self.q.adjoint() * b * &self.q;
        let mut y = DMatrix::<C64>::zeros(n, n);
        let mut rhs = DVector::<C64>::zeros(n);
        for j in (0..n).rev() {
            // (T - conj(T_jj)) y_j = c_j + sum_{k>j} conj(T_jk) y_k
            rhs.copy_from(&c.column(j));
            for k in (j + 1)..n {
                let f = t[(j, k)].conj();
                if f != C64::new(0.0, 0.0) {
                    rhs.axpy(f, &y.column(k), C64::new(1.0, 0.0));
                }
            }
            let shift = t[(j, j)].conj();
            for i in (0..n).rev() {
                let mut s = rhs[i];
                for k in (i + 1)..n {
                    s -= t[(i, k)] * y[(k, j)];
                }
                y[(i, j)] = s / (t[(i, i)] - shift);
            }
        }
        &self.q * y * self.q.adjoint()
    }
}
