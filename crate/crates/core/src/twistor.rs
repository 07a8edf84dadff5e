//! Twistor-space description of the c-map metric.
//!
//! Holomorphic coordinates are ordered `z^α = (w_1…w_{n+1}, w₀, Z²…Z^{n+1})`.
//! The Kähler potential on the slice `v¹ = 1`, `v = Z`, is
//!
//! ```text
//! K_T = ½[𝒦 + ln((w+w̄)N⁻¹(w+w̄) − (w+w̄)₀)] + ln √2,
//! ```
//!
//! the holomorphic one-form is `𝒳 = 2Z^I dw_I`, and the metric is
//! `G_{αβ̄} = ∂_α∂_β̄ K_T − e^{−2K_T} 𝒳_α 𝒳̄_β`.
//!
//! FS coordinates map to the twistor coordinates by
//! `w₀ = iA^IA^JF_IJ − i(σ + ½A^IB_I) − e^φ`, `w_I = iF_IJA^J − (i/2)B_I`,
//! with `F_IJ` at `Z`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hkc::legendre_solve;
use crate::numerics::linalg::inverse_quadratic_form;
use crate::numerics::{hermitian_to_real, mixed_hessian, Dual, HermitianMatrix, Hyper, RealSymMatrix, Scalar};
use crate::prepotential::{eval_jet, jet_at, Prepotential};
use crate::qk_metric::{fs_metric, FsPoint};
use crate::special_kahler::{bilinear, rigid, ProjectivePoint};

/// Recovery tolerance for `(A^I, e^φ)` from twistor coordinates.
pub const ROUND_TRIP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistorPoint {
    #[serde(rename = "Z")]
    pub z: ProjectivePoint,
    pub w0: Complex64,
    pub w: Vec<Complex64>,
}

impl TwistorPoint {
    pub fn n(&self) -> usize {
        self.z.n()
    }

    /// Complex dimension `2(n+1)`.
    pub fn dim(&self) -> usize {
        2 * (self.n() + 1)
    }

    /// `z^α` in the frozen order.
    pub fn coords(&self) -> Vec<Complex64> {
        let mut z = self.w.clone();
        z.push(self.w0);
        z.extend_from_slice(self.z.free());
        z
    }

    fn check<P: Prepotential>(&self, p: &P) -> Result<()> {
        if self.z.n() != p.n() || self.w.len() != p.dim() {
            return Err(Error::Configuration(format!(
                "twistor point has n = {} and {} w-components; model has n = {}",
                self.z.n(),
                self.w.len(),
                p.n()
            )));
        }
        Ok(())
    }
}

/// Whether the constant `ln √2` is kept in `K_T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialConstant {
    Included,
    Dropped,
}

impl PotentialConstant {
    fn value(self) -> f64 {
        match self {
            PotentialConstant::Included => 0.5 * 2f64.ln(),
            PotentialConstant::Dropped => 0.0,
        }
    }
}

fn with_unit<S: Scalar>(free: &[S]) -> Vec<S> {
    let mut z = vec![S::one()];
    z.extend_from_slice(free);
    z
}

/// `K_T` with holomorphic coordinates `z` and independent conjugates `zt`,
/// both in the frozen order. Returns the two logarithm arguments alongside.
fn potential_generic<P: Prepotential, S: Scalar>(
    p: &P,
    z: &[S],
    zt: &[S],
    constant: PotentialConstant,
) -> Result<(S, S, S)> {
    let m = p.dim();
    let zf = with_unit(&z[m + 1..]);
    let zft = with_unit(&zt[m + 1..]);
    let r = rigid(p, &zf, &zft)?;
    let znz = bilinear(&r.n, &zf, &zft);
    let wsum: Vec<S> = (0..m).map(|i| z[i] + zt[i]).collect();
    let wsum0 = z[m] + zt[m];
    let cone = inverse_quadratic_form(&r.n, &wsum)? - wsum0;
    let kt = (znz.ln() + cone.ln()).scale(Complex64::new(0.5, 0.0)) + S::real(constant.value());
    Ok((kt, znz, cone))
}

fn conj(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z.conj()).collect()
}

pub fn twistor_potential_with<P: Prepotential>(p: &P, pt: &TwistorPoint, constant: PotentialConstant) -> Result<f64> {
    pt.check(p)?;
    let z = pt.coords();
    let (kt, znz, cone) = potential_generic(p, &z, &conj(&z), constant)?;
    if !(znz.re > 0.0) {
        return Err(Error::OutsideCone(format!("Z N Z̄ = {} is not positive", znz.re)));
    }
    if !(cone.re > 0.0) {
        return Err(Error::OutsideCone(format!(
            "(w+w̄)N⁻¹(w+w̄) − (w+w̄)₀ = {} is not positive",
            cone.re
        )));
    }
    Ok(kt.re)
}

pub fn twistor_potential<P: Prepotential>(p: &P, pt: &TwistorPoint) -> Result<f64> {
    twistor_potential_with(p, pt, PotentialConstant::Included)
}

/// Components of `𝒳 = 2Z^I dw_I` over `z^α`.
pub fn holomorphic_one_form(pt: &TwistorPoint) -> Vec<Complex64> {
    let mut x: Vec<Complex64> = pt.z.full().iter().map(|z| 2.0 * z).collect();
    x.resize(pt.dim(), Complex64::new(0.0, 0.0));
    x
}

pub fn qk_metric_from_twistor_with<P: Prepotential>(
    p: &P,
    pt: &TwistorPoint,
    constant: PotentialConstant,
) -> Result<HermitianMatrix> {
    let kt = twistor_potential_with(p, pt, constant)?;
    let (_, h) = mixed_hessian(
        |a: &[Hyper<Complex64>], b: &[Hyper<Complex64>]| Ok(potential_generic(p, a, b, constant)?.0),
        &pt.coords(),
    )?;
    let x = holomorphic_one_form(pt);
    let e = (-2.0 * kt).exp();
    let g = DMatrix::from_fn(h.nrows(), h.ncols(), |a, b| h[(a, b)] - e * x[a] * x[b].conj());
    HermitianMatrix::new(g)
}

pub fn qk_metric_from_twistor<P: Prepotential>(p: &P, pt: &TwistorPoint) -> Result<HermitianMatrix> {
    qk_metric_from_twistor_with(p, pt, PotentialConstant::Included)
}

fn check_fs<P: Prepotential>(p: &P, pt: &FsPoint) -> Result<()> {
    if pt.n() != p.n() || pt.a.len() != p.dim() || pt.b.len() != p.dim() {
        return Err(Error::Configuration(format!(
            "FS point has n = {}, model has n = {}",
            pt.n(),
            p.n()
        )));
    }
    Ok(())
}

pub fn coords_fs_to_twistor<P: Prepotential>(p: &P, pt: &FsPoint) -> Result<TwistorPoint> {
    check_fs(p, pt)?;
    let m = p.dim();
    let f = eval_jet(p, &pt.z.full())?;
    let i = Complex64::new(0.0, 1.0);
    let fa: Vec<Complex64> = (0..m)
        .map(|r| (0..m).map(|c| f.hessian[r][c] * pt.a[c]).sum())
        .collect();
    let w: Vec<Complex64> = (0..m).map(|r| i * fa[r] - 0.5 * i * pt.b[r]).collect();
    let afa: Complex64 = (0..m).map(|r| pt.a[r] * fa[r]).sum();
    let ab: f64 = pt.a.iter().zip(&pt.b).map(|(a, b)| a * b).sum();
    let w0 = i * afa - i * (pt.sigma + 0.5 * ab) - pt.phi.exp();
    Ok(TwistorPoint { z: pt.z.clone(), w0, w })
}

/// `∂F_IJ/∂Z^C` for each free `Z^C`, as `[c][i][j]`.
fn third_derivatives<P: Prepotential>(p: &P, z: &[Complex64]) -> Result<Vec<DMatrix<Complex64>>> {
    let m = z.len();
    (1..m)
        .map(|c| {
            let x: Vec<Dual<Complex64>> = z
                .iter()
                .enumerate()
                .map(|(k, &zk)| if k == c { Dual::variable(zk) } else { Dual::lift(zk) })
                .collect();
            let jet = jet_at(p, &x)?;
            Ok(DMatrix::from_fn(m, m, |a, b| jet.hessian[a][b].eps))
        })
        .collect()
}

/// Complex Jacobian `∂z^α/∂x^k` of [`coords_fs_to_twistor`], `x` in the FS
/// basis order. Columns of `Re Z^C` hold the holomorphic derivative `∂/∂Z^C`;
/// the `Im Z^C` columns are left zero and filled by [`real_jacobian`].
fn complex_jacobian<P: Prepotential>(p: &P, pt: &FsPoint) -> Result<DMatrix<Complex64>> {
    let m = p.dim();
    let n = p.n();
    let z = pt.z.full();
    let f = eval_jet(p, &z)?;
    let f3 = third_derivatives(p, &z)?;
    let i = Complex64::new(0.0, 1.0);
    let d = 4 * m;
    let mut j = DMatrix::from_element(2 * m, d, Complex64::new(0.0, 0.0));
    let (col_a, col_b, col_z) = (2, 2 + m, 2 + 2 * m);
    for r in 0..m {
        for c in 0..m {
            j[(r, col_a + c)] = i * f.hessian[r][c];
        }
        j[(r, col_b + r)] = -0.5 * i;
        for (c, d3) in f3.iter().enumerate() {
            j[(r, col_z + 2 * c)] = i * (0..m).map(|k| d3[(r, k)] * pt.a[k]).sum::<Complex64>();
        }
    }
    let row = m;
    j[(row, 0)] = Complex64::new(-pt.phi.exp(), 0.0);
    j[(row, 1)] = -i;
    for c in 0..m {
        let fa: Complex64 = (0..m).map(|k| f.hessian[c][k] * pt.a[k]).sum();
        j[(row, col_a + c)] = 2.0 * i * fa - 0.5 * i * pt.b[c];
        j[(row, col_b + c)] = Complex64::new(0.0, -0.5 * pt.a[c]);
    }
    for (c, d3) in f3.iter().enumerate() {
        let afa: Complex64 = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| pt.a[a] * pt.a[b] * d3[(a, b)])
            .sum();
        j[(row, col_z + 2 * c)] = i * afa;
    }
    for c in 0..n {
        j[(m + 1 + c, col_z + 2 * c)] = Complex64::new(1.0, 0.0);
    }
    Ok(j)
}

/// Real Jacobian of `(Re z¹, Im z¹, Re z², …)` with respect to the FS basis.
fn real_jacobian(cj: &DMatrix<Complex64>, m: usize) -> DMatrix<f64> {
    let (rows, cols) = cj.shape();
    let col_z = 2 + 2 * m;
    let mut r = DMatrix::zeros(2 * rows, cols);
    for a in 0..rows {
        for k in 0..col_z {
            r[(2 * a, k)] = cj[(a, k)].re;
            r[(2 * a + 1, k)] = cj[(a, k)].im;
        }
        for k in (col_z..cols).step_by(2) {
            let c = cj[(a, k)];
            r[(2 * a, k)] = c.re;
            r[(2 * a, k + 1)] = -c.im;
            r[(2 * a + 1, k)] = c.im;
            r[(2 * a + 1, k + 1)] = c.re;
        }
    }
    r
}

/// The real Jacobian of the FS-to-twistor map, rows `(Re z^α, Im z^α)`
/// interleaved, columns in the FS basis.
pub fn fs_to_twistor_jacobian<P: Prepotential>(p: &P, pt: &FsPoint) -> Result<DMatrix<f64>> {
    check_fs(p, pt)?;
    Ok(real_jacobian(&complex_jacobian(p, pt)?, p.dim()))
}

/// The twistor metric pulled back to the FS basis.
pub fn pulled_back_twistor_metric<P: Prepotential>(
    p: &P,
    pt: &FsPoint,
    constant: PotentialConstant,
) -> Result<RealSymMatrix> {
    let tp = coords_fs_to_twistor(p, pt)?;
    let g = qk_metric_from_twistor_with(p, &tp, constant)?;
    let j = fs_to_twistor_jacobian(p, pt)?;
    let pulled = j.transpose() * hermitian_to_real(&g).matrix() * &j;
    RealSymMatrix::symmetrize(pulled, 1e-9)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricComparison {
    /// Least-squares `c` in `c·M_twistor ≈ M_FS` (matrices in the common real basis).
    pub constant: f64,
    /// The factor between line elements, `ds²_twistor = ratio · ds²_FS`.
    pub line_element_ratio: f64,
    /// `max |c·M_twistor − M_FS| / max |M_FS|`.
    pub max_rel_dev: f64,
    /// Row and column of the largest deviation.
    pub worst_entry: (usize, usize),
}

pub fn compare_metrics_with<P: Prepotential>(
    p: &P,
    pt: &FsPoint,
    constant: PotentialConstant,
) -> Result<MetricComparison> {
    let fs = fs_metric(p, pt)?;
    let tw = pulled_back_twistor_metric(p, pt, constant)?;
    let (mf, mt) = (fs.matrix(), tw.matrix());
    let denom = mt.iter().map(|x| x * x).sum::<f64>();
    if denom == 0.0 {
        return Err(Error::DegeneratePoint("twistor metric vanishes".into()));
    }
    let c = mt.iter().zip(mf.iter()).map(|(a, b)| a * b).sum::<f64>() / denom;
    let scale = mf.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut worst = (0, 0);
    let mut dev = 0.0_f64;
    for i in 0..mf.nrows() {
        for j in 0..mf.ncols() {
            let d = (c * mt[(i, j)] - mf[(i, j)]).abs();
            if d > dev {
                dev = d;
                worst = (i, j);
            }
        }
    }
    // hermitian_to_real doubles the twistor line element relative to the FS reading dz dz̄ = dx² + dy².
    Ok(MetricComparison {
        constant: c,
        line_element_ratio: 1.0 / (2.0 * c),
        max_rel_dev: dev / scale,
        worst_entry: worst,
    })
}

pub fn compare_metrics<P: Prepotential>(p: &P, pt: &FsPoint) -> Result<MetricComparison> {
    compare_metrics_with(p, pt, PotentialConstant::Included)
}

/// `(A^I, e^φ)` recovered from twistor coordinates through the Legendre
/// solution: `2A^I = G^I/G⁰`, `4e^φ = K/(G⁰)²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DilatonData {
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub exp_phi: f64,
}

pub fn recover_dilaton_data<P: Prepotential>(p: &P, pt: &TwistorPoint) -> Result<DilatonData> {
    pt.check(p)?;
    let wsum: Vec<f64> = pt.w.iter().map(|w| 2.0 * w.re).collect();
    let sol = legendre_solve(p, &pt.z.full(), 2.0 * pt.w0.re, &wsum)?;
    let g0 = sol.g[0];
    Ok(DilatonData {
        a: sol.g[1..].iter().map(|g| g / (2.0 * g0)).collect(),
        exp_phi: sol.kahler / (4.0 * g0 * g0),
    })
}

/// Largest discrepancy between `(A, e^φ)` and their recovery from the image.
pub fn round_trip_residual<P: Prepotential>(p: &P, pt: &FsPoint) -> Result<f64> {
    let rec = recover_dilaton_data(p, &coords_fs_to_twistor(p, pt)?)?;
    let da = rec
        .a
        .iter()
        .zip(&pt.a)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0_f64, f64::max);
    let ephi = pt.phi.exp();
    Ok(da.max((rec.exp_phi - ephi).abs() / ephi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hkc::{hk_potential, HkcPoint};
    use crate::prepotential::{CubicModel, QuadraticModel};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn n0_point(w0: Complex64, w1: Complex64) -> TwistorPoint {
        TwistorPoint {
            z: ProjectivePoint::origin(0),
            w0,
            w: vec![w1],
        }
    }

    #[test]
    fn potential_example() {
        let m = QuadraticModel::standard(0);
        let kt = twistor_potential(&m, &n0_point(c(-1.0, 0.0), c(0.0, 0.0))).unwrap();
        assert!((kt - 4f64.ln()).abs() < 1e-15);
        let shifted = twistor_potential(&m, &n0_point(c(-1.0, 3.7), c(0.0, 0.0))).unwrap();
        assert_eq!(kt, shifted);
    }

    #[test]
    fn potential_matches_chi() {
        let m = QuadraticModel::new(vec![1, -1]).unwrap();
        let tp = TwistorPoint {
            z: ProjectivePoint::new(vec![c(0.2, -0.3)]),
            w0: c(-0.8, 0.4),
            w: vec![c(0.1, 0.2), c(-0.2, 0.5)],
        };
        let chi = hk_potential(
            &m,
            &HkcPoint {
                v: tp.z.full(),
                w0: tp.w0,
                w: tp.w.clone(),
            },
        )
        .unwrap();
        assert!((twistor_potential(&m, &tp).unwrap().exp() - chi).abs() < 1e-12 * chi);
    }

    #[test]
    fn one_form_components() {
        assert_eq!(
            holomorphic_one_form(&n0_point(c(-1.0, 0.0), c(0.0, 0.0))),
            vec![c(2.0, 0.0), c(0.0, 0.0)]
        );
        let z = vec![c(0.1, -0.5), c(-0.2, -0.4), c(0.05, -0.6)];
        let tp = TwistorPoint {
            z: ProjectivePoint::new(z.clone()),
            w0: c(-1.0, 0.0),
            w: vec![c(0.0, 0.0); 4],
        };
        let x = holomorphic_one_form(&tp);
        assert_eq!(x.len(), 8);
        assert_eq!(&x[..4], &[c(2.0, 0.0), 2.0 * z[0], 2.0 * z[1], 2.0 * z[2]]);
        assert!(x[4..].iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn origin_maps_to_minus_one() {
        let m = QuadraticModel::standard(0);
        let tp = coords_fs_to_twistor(&m, &FsPoint::origin(0)).unwrap();
        assert_eq!(tp.w0, c(-1.0, 0.0));
        assert_eq!(tp.w, vec![c(0.0, 0.0)]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = CubicModel::stu();
        let pt = FsPoint {
            phi: 0.3,
            sigma: -0.2,
            a: vec![0.4, -0.1, 0.3, 0.2],
            b: vec![-0.3, 0.5, 0.1, -0.2],
            z: ProjectivePoint::new(vec![c(0.1, -1.0), c(-0.2, -0.8), c(0.3, -1.2)]),
        };
        let j = fs_to_twistor_jacobian(&m, &pt).unwrap();
        let x0 = pt.to_coords();
        let h = 1e-6;
        let flat = |x: &[f64]| -> Vec<f64> {
            let tp = coords_fs_to_twistor(&m, &FsPoint::from_coords(3, x).unwrap()).unwrap();
            tp.coords().iter().flat_map(|z| [z.re, z.im]).collect()
        };
        for k in 0..x0.len() {
            let mut xp = x0.clone();
            let mut xm = x0.clone();
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (flat(&xp), flat(&xm));
            for r in 0..fp.len() {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                assert!((fd - j[(r, k)]).abs() < 1e-7, "entry ({r},{k}): {fd} vs {}", j[(r, k)]);
            }
        }
    }

    #[test]
    fn metrics_agree_at_origin() {
        let m = QuadraticModel::standard(0);
        let cmp = compare_metrics(&m, &FsPoint::origin(0)).unwrap();
        assert!(cmp.max_rel_dev < 1e-6, "{cmp:?}");
        assert!((cmp.line_element_ratio + 0.125).abs() < 1e-10, "{cmp:?}");
    }

    #[test]
    fn dropping_constant_breaks_agreement() {
        let m = QuadraticModel::standard(0);
        let cmp = compare_metrics_with(&m, &FsPoint::origin(0), PotentialConstant::Dropped).unwrap();
        assert!(cmp.max_rel_dev > 1e-3);
    }

    #[test]
    fn round_trip_recovers_dilaton() {
        let m = QuadraticModel::new(vec![1, -1]).unwrap();
        let pt = FsPoint {
            phi: -0.4,
            sigma: 0.7,
            a: vec![0.3, -0.2],
            b: vec![0.1, 0.4],
            z: ProjectivePoint::new(vec![c(0.2, 0.1)]),
        };
        assert!(round_trip_residual(&m, &pt).unwrap() < ROUND_TRIP_TOL);
    }
}
