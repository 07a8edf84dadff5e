//! Dense matrices used by the metric routes: hermitian forms, their real
//! realization, symmetric eigenvalues, and a small Gaussian solver that works
//! over any [`Scalar`] (so inverse matrices can be differentiated).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::dual::Scalar;
use crate::error::{Error, Result};

/// Relative tolerance used when validating hermiticity and symmetry.
pub const STRUCTURE_TOL: f64 = 1e-10;

fn max_abs_c(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// A complex square matrix with `H[a][b] = conj(H[b][a])`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Validates hermiticity to [`STRUCTURE_TOL`] (relative) and stores the
    /// hermitian part `(H + H†)/2`.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Consistency(format!(
                "hermitian matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let residual = hermiticity_residual(&entries);
        let scale = max_abs_c(&entries).max(1.0);
        if residual > STRUCTURE_TOL * scale {
            return Err(Error::Consistency(format!("hermiticity violated by {residual:e}")));
        }
        let h = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(HermitianMatrix(h))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// Real eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return vec![];
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Strictly negative definite with margin `1e-10·‖H‖` (an empty matrix qualifies).
    pub fn is_negative_definite(&self) -> bool {
        negative_with_margin(&self.eigenvalues())
    }
}

pub(crate) fn negative_with_margin(eigenvalues: &[f64]) -> bool {
    let norm = eigenvalues.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    eigenvalues.iter().all(|&e| e < -1e-10 * norm)
}

/// Largest `|H_ab − conj(H_ba)|`.
pub fn hermiticity_residual(h: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0_f64;
    for a in 0..h.nrows() {
        for b in 0..h.ncols() {
            worst = worst.max((h[(a, b)] - h[(b, a)].conj()).norm());
        }
    }
    worst
}

/// A real symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSymMatrix(DMatrix<f64>);

impl RealSymMatrix {
    /// Checks `‖M − Mᵀ‖∞ ≤ tol·max(1, ‖M‖∞)` and stores `(M + Mᵀ)/2`.
    pub fn symmetrize(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let asym = asymmetry(&m);
        if asym > tol * max_abs(&m).max(1.0) {
            return Err(Error::Consistency(format!(
                "antisymmetric remainder {asym:e} exceeds {tol:e}"
            )));
        }
        let s = (&m + m.transpose()) * 0.5;
        Ok(RealSymMatrix(s))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return vec![];
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn is_negative_definite(&self) -> bool {
        negative_with_margin(&self.eigenvalues())
    }

    /// Row-major nested vectors, for serialization.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }
}

impl Serialize for RealSymMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

/// Largest `|M_ij − M_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Real symmetric matrix of the line element `2·H_{ab} dz^a dz̄^b` in the
/// coordinates `(Re z¹, Im z¹, Re z², Im z², …)`.
///
/// Writing `H = R + iS` (R symmetric, S antisymmetric), the `(x_a, x_b)` and
/// `(y_a, y_b)` entries are `2R_ab` and the `(x_a, y_b)` entry is `2S_ab`.
pub fn hermitian_to_real(h: &HermitianMatrix) -> RealSymMatrix {
    RealSymMatrix(realify(h.matrix(), 2.0))
}

/// Validating variant for raw complex input.
pub fn hermitian_to_real_checked(h: DMatrix<Complex64>) -> Result<RealSymMatrix> {
    Ok(hermitian_to_real(&HermitianMatrix::new(h)?))
}

pub(crate) fn realify(h: &DMatrix<Complex64>, factor: f64) -> DMatrix<f64> {
    let m = h.nrows();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    for a in 0..m {
        for b in 0..m {
            let z = h[(a, b)] * factor;
            out[(2 * a, 2 * b)] = z.re;
            out[(2 * a + 1, 2 * b + 1)] = z.re;
            out[(2 * a, 2 * b + 1)] = z.im;
            out[(2 * a + 1, 2 * b)] = -z.im;
        }
    }
    out
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting on the
/// magnitude of the innermost values. Works for dual-valued systems.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.value().norm()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].value().norm().total_cmp(&a[j][col].value().norm()))
            .expect("non-empty range");
        if a[pivot][col].value().norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::DegeneratePoint("singular linear system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let t = a[col][k];
                a[row][k] = a[row][k] - factor * t;
            }
            let t = b[col];
            b[row] = b[row] - factor * t;
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// `Σ_ij u_i (A⁻¹)_ij u_j` without forming the inverse.
pub fn inverse_quadratic_form<S: Scalar>(a: &[Vec<S>], u: &[S]) -> Result<S> {
    let x = solve(a.to_vec(), u.to_vec())?;
    Ok(u.iter().zip(&x).fold(S::zero(), |acc, (&ui, &xi)| acc + ui * xi))
}
