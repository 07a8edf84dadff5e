//! Rigid and projective special Kähler data.
//!
//! Rigid data at `X`: `K = i(X̄^I F_I − X^I F̄_I)`, `N_IJ = i(F_IJ − F̄_IJ)` and
//! `𝒩_IJ = −i F̄_IJ − (NX)_I (NX)_J / (XNX)`, where `XNX = X^I N_IJ X^J`
//! carries no conjugation.
//!
//! Projective data lives at `Z = (1, Z^A)`: `𝒦 = ln(Z N Z̄)` and its mixed
//! Hessian `𝒦_{AB̄}`, obtained by differentiating through `N(Z, Z̄)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::negative_with_margin;
use crate::numerics::{mixed_hessian, HermitianMatrix, Hyper, RealSymMatrix, Scalar};
use crate::prepotential::{conjugate_jet_at, jet_at, Prepotential};

/// Rigid special Kähler data at a point `X`.
#[derive(Clone, Debug)]
pub struct SkData {
    pub kahler: f64,
    pub n: RealSymMatrix,
    pub curly_n: DMatrix<Complex64>,
    /// Largest `|Im N_IJ|` before the real part was taken.
    pub n_imaginary: f64,
}

/// `K` and `N` with `X` and `X̃ = X̄` as independent arguments.
pub(crate) struct Rigid<S> {
    pub k: S,
    pub n: Vec<Vec<S>>,
}

pub(crate) fn rigid<P: Prepotential, S: Scalar>(p: &P, x: &[S], xt: &[S]) -> Result<Rigid<S>> {
    let f = jet_at(p, x)?;
    let fb = conjugate_jet_at(p, xt)?;
    let i = Complex64::new(0.0, 1.0);
    let mut k = S::zero();
    for idx in 0..x.len() {
        k = k + xt[idx] * f.gradient[idx] - x[idx] * fb.gradient[idx];
    }
    let n = f
        .hessian
        .iter()
        .zip(&fb.hessian)
        .map(|(row, rowb)| row.iter().zip(rowb).map(|(&a, &b)| (a - b).scale(i)).collect())
        .collect();
    Ok(Rigid { k: k.scale(i), n })
}

pub(crate) fn bilinear<S: Scalar>(m: &[Vec<S>], u: &[S], v: &[S]) -> S {
    let mut acc = S::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, &mij) in row.iter().enumerate() {
            acc = acc + u[i] * mij * v[j];
        }
    }
    acc
}

pub fn sk_data<P: Prepotential>(p: &P, x: &[Complex64]) -> Result<SkData> {
    let xb: Vec<Complex64> = x.iter().map(|z| z.conj()).collect();
    let r = rigid(p, x, &xb)?;
    let m = x.len();
    let n_imaginary = r.n.iter().flatten().fold(0.0_f64, |a, z| a.max(z.im.abs()));
    let n_real = DMatrix::from_fn(m, m, |i, j| r.n[i][j].re);
    let n = RealSymMatrix::symmetrize(n_real, 1e-12)?;
    let f = jet_at(p, x)?;
    let nx: Vec<Complex64> = (0..m).map(|i| (0..m).map(|j| n.get(i, j) * x[j]).sum()).collect();
    let xnx: Complex64 = (0..m).map(|i| x[i] * nx[i]).sum();
    let scale = n.matrix().iter().fold(0.0_f64, |a, v| a.max(v.abs())) * x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if xnx.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegeneratePoint("X N X vanishes".into()));
    }
    let mi = Complex64::new(0.0, -1.0);
    let curly_n = DMatrix::from_fn(m, m, |i, j| mi * f.hessian[i][j].conj() - nx[i] * nx[j] / xnx);
    Ok(SkData {
        kahler: r.k.re,
        n,
        curly_n,
        n_imaginary,
    })
}

/// Inhomogeneous coordinates `Z^I = (1, Z^A)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    free: Vec<Complex64>,
}

impl ProjectivePoint {
    /// `free` holds `Z^A`, `A = 2..n+1`.
    pub fn new(free: Vec<Complex64>) -> Self {
        ProjectivePoint { free }
    }

    pub fn origin(n: usize) -> Self {
        ProjectivePoint {
            free: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn n(&self) -> usize {
        self.free.len()
    }

    pub fn free(&self) -> &[Complex64] {
        &self.free
    }

    /// `(1, Z^2, …, Z^{n+1})`.
    pub fn full(&self) -> Vec<Complex64> {
        let mut z = Vec::with_capacity(self.free.len() + 1);
        z.push(Complex64::new(1.0, 0.0));
        z.extend_from_slice(&self.free);
        z
    }
}

fn with_unit<S: Scalar>(free: &[S]) -> Vec<S> {
    let mut z = Vec::with_capacity(free.len() + 1);
    z.push(S::one());
    z.extend_from_slice(free);
    z
}

/// `Z N(Z, Z̃) Z̃` with `Z¹ = Z̃¹ = 1`.
pub(crate) fn znz<P: Prepotential, S: Scalar>(p: &P, free: &[S], free_t: &[S]) -> Result<S> {
    let z = with_unit(free);
    let zt = with_unit(free_t);
    let r = rigid(p, &z, &zt)?;
    Ok(bilinear(&r.n, &z, &zt))
}

/// `𝒦_{AB̄}` (no positivity requirement; the logarithm's branch does not
/// affect its second derivatives).
pub fn kahler_block<P: Prepotential>(p: &P, z: &ProjectivePoint) -> Result<HermitianMatrix> {
    let (_, h) = mixed_hessian(
        |a: &[Hyper<Complex64>], b: &[Hyper<Complex64>]| Ok(znz(p, a, b)?.ln()),
        z.free(),
    )?;
    HermitianMatrix::new(h)
}

/// `𝒦 = ln(Z N Z̄)` and the block `𝒦_{AB̄}`.
pub fn projective_potential<P: Prepotential>(p: &P, z: &ProjectivePoint) -> Result<(f64, HermitianMatrix)> {
    let zb: Vec<Complex64> = z.free().iter().map(|c| c.conj()).collect();
    let v = znz(p, z.free(), &zb)?.re;
    if !(v > 0.0) {
        return Err(Error::OutsideDomain {
            verdict: "positivity".into(),
        });
    }
    Ok((v.ln(), kahler_block(p, z)?))
}

/// Verdict names used in reports and errors.
pub const POSITIVITY: &str = "positivity";
pub const KAHLER_BLOCK: &str = "kahler_block";
pub const CURLY_N_SUM: &str = "curlyN_sum";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DomainReport {
    pub positivity: bool,
    pub kahler_block_negdef: bool,
    #[serde(rename = "curlyN_sum_negdef")]
    pub curly_n_sum_negdef: bool,
}

impl DomainReport {
    pub fn is_valid(&self) -> bool {
        self.positivity && self.kahler_block_negdef && self.curly_n_sum_negdef
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.positivity {
            Some(POSITIVITY)
        } else if !self.kahler_block_negdef {
            Some(KAHLER_BLOCK)
        } else if !self.curly_n_sum_negdef {
            Some(CURLY_N_SUM)
        } else {
            None
        }
    }

    pub fn require(&self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(v) => Err(Error::OutsideDomain { verdict: v.into() }),
        }
    }
}

/// Three independent verdicts: `Z N Z̄ > 0`, `𝒦_{AB̄} ≺ 0`, `𝒩 + 𝒩̄ ≺ 0`.
/// Evaluation failures count as a failed verdict.
pub fn domain_check<P: Prepotential>(p: &P, z: &ProjectivePoint) -> DomainReport {
    let zb: Vec<Complex64> = z.free().iter().map(|c| c.conj()).collect();
    let positivity = matches!(znz(p, z.free(), &zb), Ok(v) if v.re > 0.0);
    let kahler_block_negdef = kahler_block(p, z).map(|h| h.is_negative_definite()).unwrap_or(false);
    let curly_n_sum_negdef = curly_n_sum(p, z)
        .map(|m| negative_with_margin(&m.eigenvalues()))
        .unwrap_or(false);
    DomainReport {
        positivity,
        kahler_block_negdef,
        curly_n_sum_negdef,
    }
}

/// `𝒩 + 𝒩̄` at `X = Z`.
pub fn curly_n_sum<P: Prepotential>(p: &P, z: &ProjectivePoint) -> Result<RealSymMatrix> {
    let sk = sk_data(p, &z.full())?;
    let m = sk.curly_n.nrows();
    RealSymMatrix::symmetrize(DMatrix::from_fn(m, m, |i, j| 2.0 * sk.curly_n[(i, j)].re), 1e-12)
}

/// Rectangle in which each `Z^A` is drawn uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl SampleBox {
    /// Covers most of the unit ball of the `(+, −, …, −)` quadratic models.
    pub fn quadratic() -> Self {
        SampleBox {
            re: [-0.6, 0.6],
            im: [-0.6, 0.6],
        }
    }

    /// For `F = d_ABC X^A X^B X^C / X^1` with positive `d`, the domain sits at
    /// negative imaginary parts.
    pub fn cubic() -> Self {
        SampleBox {
            re: [-0.5, 0.5],
            im: [-2.0, -0.5],
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        Complex64::new(
            rng.random_range(self.re[0]..self.re[1]),
            rng.random_range(self.im[0]..self.im[1]),
        )
    }
}

/// Rejection-samples a point passing all three domain verdicts.
pub fn sample_domain_point<P: Prepotential, R: Rng + ?Sized>(
    p: &P,
    region: &SampleBox,
    rng: &mut R,
    max_attempts: usize,
) -> Result<ProjectivePoint> {
    for _ in 0..max_attempts {
        let z = ProjectivePoint::new((0..p.n()).map(|_| region.draw(rng)).collect());
        if domain_check(p, &z).is_valid() {
            return Ok(z);
        }
    }
    Err(Error::Configuration(format!(
        "no domain point found in {max_attempts} attempts"
    )))
}

/// Draws a raw candidate from the box without any domain filtering.
pub fn sample_candidate<R: Rng + ?Sized>(n: usize, region: &SampleBox, rng: &mut R) -> ProjectivePoint {
    ProjectivePoint::new((0..n).map(|_| region.draw(rng)).collect())
}
