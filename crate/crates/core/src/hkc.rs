//! Hyperkähler cone over the c-map image, on the gauge slice `v⁰ = 0`.
//!
//! With `H(η) = F(η^I)/η⁰` and `η⁰ = G⁰` on the slice, the contour integral
//! `ℒ = (1/G⁰) Im ∮ dζ/(2πi) F(ζη)/ζ³` picks out the `ζ²` coefficient of
//! `F(v + ζG − ζ²v̄)`, giving
//!
//! ```text
//! ℒ(v, v̄, G) = (2K(v, v̄) − N_IJ(v) G^I G^J) / (4G⁰).
//! ```
//!
//! The Legendre transform used throughout is
//! `χ = ℒ − (w+w̄)₀ G⁰ + (w+w̄)_I G^I`, stationary when
//! `(w+w̄)₀ = ∂ℒ/∂G⁰` and `(w+w̄)_I = −∂ℒ/∂G^I`. Its solution is
//! `G^I/G⁰ = 2N^{IJ}(w+w̄)_J`, `(G⁰)² = K / 2((w+w̄)N⁻¹(w+w̄) − (w+w̄)₀)`, and
//! `χ = K/G⁰ = √2 √K √((w+w̄)N⁻¹(w+w̄) − (w+w̄)₀)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::inverse_quadratic_form;
use crate::numerics::{
    circle_integral, directional_derivative, holomorphic_gradient, holomorphic_jet, ContourConfig, Scalar,
};
use crate::prepotential::Prepotential;
use crate::special_kahler::{bilinear, rigid, sample_domain_point, SampleBox};

/// Relative agreement required between the χ routes and between the closed
/// form and the Newton solution of the Legendre conditions.
pub const ROUTE_TOL: f64 = 1e-10;
/// Newton iterations allowed when verifying the Legendre solution.
pub const MAX_NEWTON_ITERATIONS: usize = 5;

/// O(2) data `η^Î(ζ) = v^Î/ζ + G^Î − v̄^Î ζ` with `v⁰ = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct O2Section {
    /// `v^I`, `I = 1..n+1`.
    pub v: Vec<Complex64>,
    /// `(G⁰, G¹, …, G^{n+1})`.
    pub g: Vec<f64>,
}

impl O2Section {
    /// `(η⁰, η¹, …)` at `ζ`; `η⁰ = G⁰` because `v⁰ = 0`.
    pub fn eta(&self, zeta: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(self.g[0], 0.0)];
        out.extend(
            self.v
                .iter()
                .zip(&self.g[1..])
                .map(|(v, &g)| v / zeta + g - v.conj() * zeta),
        );
        out
    }

    /// `ζη^I = v^I + ζG^I − ζ²v̄^I`, `I ≥ 1`.
    pub fn zeta_eta(&self, zeta: Complex64) -> Vec<Complex64> {
        self.v
            .iter()
            .zip(&self.g[1..])
            .map(|(v, &g)| v + zeta * g - zeta * zeta * v.conj())
            .collect()
    }
}

/// Complex coordinates `(v^I, w₀, w_I)` on the slice `v⁰ = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HkcPoint {
    pub v: Vec<Complex64>,
    pub w0: Complex64,
    pub w: Vec<Complex64>,
}

impl HkcPoint {
    pub fn wsum0(&self) -> f64 {
        2.0 * self.w0.re
    }

    pub fn wsum(&self) -> Vec<f64> {
        self.w.iter().map(|w| 2.0 * w.re).collect()
    }
}

/// Infinitesimal SU(2) parameters. Only the `ε³` rotation preserves the gauge
/// slice; `ε±` are carried for completeness and not acted on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Su2Params {
    pub eps3: f64,
    pub eps_plus: Complex64,
}

impl Su2Params {
    pub fn rotation(eps3: f64) -> Self {
        Su2Params {
            eps3,
            eps_plus: Complex64::new(0.0, 0.0),
        }
    }

    pub fn eps_minus(&self) -> Complex64 {
        self.eps_plus.conj()
    }
}

fn check_dims<P: Prepotential>(p: &P, v: usize, g: usize) -> Result<()> {
    if v != p.dim() || g != p.dim() + 1 {
        return Err(Error::Configuration(format!(
            "expected {} components of v and {} of G, got {v} and {g}",
            p.dim(),
            p.dim() + 1
        )));
    }
    Ok(())
}

/// `H = F(η^I)/η⁰`.
pub fn h_function<P: Prepotential>(p: &P, eta0: Complex64, eta: &[Complex64]) -> Result<Complex64> {
    if eta0 == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole("η⁰ = 0".into()));
    }
    if eta.len() != p.dim() {
        return Err(Error::Configuration(format!(
            "expected {} components of η, got {}",
            p.dim(),
            eta.len()
        )));
    }
    let f: Complex64 = p.eval(eta);
    if !f.is_finite() {
        return Err(Error::SingularEvaluation { index: None });
    }
    Ok(f / eta0)
}

/// `ℒ(v, ṽ, G)` with `ṽ` standing for `v̄`; `g[0] = G⁰`.
pub(crate) fn cal_l_generic<P: Prepotential, S: Scalar>(p: &P, v: &[S], vt: &[S], g: &[S]) -> Result<S> {
    if g[0].value().norm() == 0.0 {
        return Err(Error::Pole("G⁰ = 0".into()));
    }
    let r = rigid(p, v, vt)?;
    let ngg = bilinear(&r.n, &g[1..], &g[1..]);
    Ok((r.k.scale(Complex64::new(2.0, 0.0)) - ngg) / g[0].scale(Complex64::new(4.0, 0.0)))
}

fn conj(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z.conj()).collect()
}

fn real_c(g: &[f64]) -> Vec<Complex64> {
    g.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Closed form of `ℒ`.
pub fn cal_l_closed<P: Prepotential>(p: &P, v: &[Complex64], g: &[f64]) -> Result<f64> {
    check_dims(p, v.len(), g.len())?;
    Ok(cal_l_generic(p, v, &conj(v), &real_c(g))?.re)
}

/// Roots of `ζη(ζ) = v + ζG − ζ²v̄`.
fn quadratic_roots(v: Complex64, g: f64) -> Vec<Complex64> {
    let a = -v.conj();
    let b = Complex64::new(g, 0.0);
    let c = v;
    if a.norm() == 0.0 {
        return if b.norm() == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = (b * b - 4.0 * a * c).sqrt();
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0); 2];
    }
    vec![q / a, c / q]
}

/// Half the smallest nonzero root modulus of the quadratics `ζη^I(ζ)`
/// (0.5 if every root is zero). A vanishing `v^I` on a pole slot of `F` puts
/// the pole at the origin and is rejected.
pub fn contour_radius<P: Prepotential>(p: &P, v: &[Complex64], g: &[f64]) -> Result<f64> {
    check_dims(p, v.len(), g.len())?;
    for slot in p.pole_slots() {
        if v[slot].norm() == 0.0 {
            return Err(Error::ContourPlacement(format!(
                "v^{} = 0 puts a pole of F at ζ = 0",
                slot + 1
            )));
        }
    }
    let smallest = v
        .iter()
        .zip(&g[1..])
        .flat_map(|(&vi, &gi)| quadratic_roots(vi, gi))
        .map(|r| r.norm())
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min);
    Ok(if smallest.is_finite() { 0.5 * smallest } else { 0.5 })
}

/// `ℒ` by trapezoid quadrature of `F(ζη)/ζ³` on a circle around the origin.
pub fn cal_l_contour<P: Prepotential>(p: &P, v: &[Complex64], g: &[f64], config: &ContourConfig) -> Result<f64> {
    check_dims(p, v.len(), g.len())?;
    if g[0] == 0.0 {
        return Err(Error::Pole("G⁰ = 0".into()));
    }
    let radius = match config.radius {
        None => contour_radius(p, v, g)?,
        Some(r) => {
            for slot in p.pole_slots() {
                let enclosed = quadratic_roots(v[slot], g[slot + 1])
                    .into_iter()
                    .find(|z| z.norm() <= r);
                if let Some(z) = enclosed {
                    return Err(Error::ContourPlacement(format!(
                        "radius {r} encloses the root ζ = {z} of ζη^{}",
                        slot + 1
                    )));
                }
            }
            r
        }
    };
    let section = O2Section {
        v: v.to_vec(),
        g: g.to_vec(),
    };
    let integrand = |zeta: Complex64| {
        let f: Complex64 = p.eval(&section.zeta_eta(zeta));
        f / (zeta * zeta * zeta)
    };
    Ok(circle_integral(integrand, radius, config.samples)?.im / g[0])
}

/// Outcome of the Legendre transform.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LegendreSolution {
    /// `(G⁰, G^I)` from the closed form, `G⁰ > 0`.
    pub g: Vec<f64>,
    /// The same point refined by Newton's method on the stationarity conditions.
    pub newton_g: Vec<f64>,
    pub newton_iterations: usize,
    /// Final `‖∂(ℒ − (w+w̄)₀G⁰ + (w+w̄)_I G^I)/∂G‖∞`.
    pub stationarity_residual: f64,
    /// `K(v, v̄)`.
    pub kahler: f64,
    /// `(w+w̄)_I N^{IJ} (w+w̄)_J − (w+w̄)₀`.
    pub cone_radicand: f64,
}

/// Gradient and Hessian of `ℒ` in `G` at fixed `v`.
fn l_jet_in_g<P: Prepotential>(p: &P, v: &[Complex64], g: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let vc = v.to_vec();
    let vb = conj(v);
    let jet = holomorphic_jet(
        |gd| {
            let vd: Vec<_> = vc.iter().map(|&z| Scalar::constant(z)).collect();
            let vbd: Vec<_> = vb.iter().map(|&z| Scalar::constant(z)).collect();
            cal_l_generic(p, &vd, &vbd, gd).unwrap_or_else(|_| Scalar::constant(Complex64::new(f64::NAN, 0.0)))
        },
        &real_c(g),
    )?;
    let k = g.len();
    Ok((
        jet.gradient.iter().map(|z| z.re).collect(),
        DMatrix::from_fn(k, k, |i, j| jet.hessian[i][j].re),
    ))
}

/// `((w+w̄)₀, (w+w̄)_I)` implied by `G` through the stationarity conditions.
pub fn wsum_from_g<P: Prepotential>(p: &P, v: &[Complex64], g: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_dims(p, v.len(), g.len())?;
    let (grad, _) = l_jet_in_g(p, v, g)?;
    Ok((grad[0], grad[1..].iter().map(|x| -x).collect()))
}

fn stationarity(grad: &[f64], wsum0: f64, wsum: &[f64]) -> Vec<f64> {
    let mut r = vec![grad[0] - wsum0];
    r.extend(grad[1..].iter().zip(wsum).map(|(d, w)| d + w));
    r
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Solves the Legendre conditions for `G` in closed form and confirms the
/// result with a damped Newton iteration started from it.
pub fn legendre_solve<P: Prepotential>(p: &P, v: &[Complex64], wsum0: f64, wsum: &[f64]) -> Result<LegendreSolution> {
    check_dims(p, v.len(), wsum.len() + 1)?;
    let r = rigid(p, v, &conj(v))?;
    let kahler = r.k.re;
    if !(kahler > 0.0) {
        return Err(Error::OutsideCone(format!("K(v, v̄) = {kahler} is not positive")));
    }
    let m = v.len();
    let n_real = DMatrix::from_fn(m, m, |i, j| r.n[i][j].re);
    let ninv_w: Vec<f64> = n_real
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(wsum))
        .ok_or_else(|| Error::DegeneratePoint("N_IJ(v) is singular".into()))?
        .iter()
        .copied()
        .collect();
    let s: f64 = wsum.iter().zip(&ninv_w).map(|(a, b)| a * b).sum();
    let cone_radicand = s - wsum0;
    if !(cone_radicand > 0.0) {
        return Err(Error::OutsideCone(format!(
            "(w+w̄)N⁻¹(w+w̄) − (w+w̄)₀ = {cone_radicand} is not positive"
        )));
    }
    let g0 = (kahler / (2.0 * cone_radicand)).sqrt();
    let mut g = vec![g0];
    g.extend(ninv_w.iter().map(|x| 2.0 * g0 * x));

    let scale = 1.0 + wsum0.abs().max(max_abs(wsum));
    let tol = 1e-12 * scale;
    let mut current = g.clone();
    let (grad, mut hess) = l_jet_in_g(p, v, &current)?;
    let mut res = stationarity(&grad, wsum0, wsum);
    let mut iterations = 0;
    while max_abs(&res) > tol {
        if iterations == MAX_NEWTON_ITERATIONS {
            return Err(Error::Numerical {
                message: format!("Newton did not converge in {MAX_NEWTON_ITERATIONS} iterations"),
                residual: max_abs(&res),
            });
        }
        let step = hess
            .clone()
            .lu()
            .solve(&nalgebra::DVector::from_vec(res.iter().map(|x| -x).collect()))
            .ok_or_else(|| Error::Numerical {
                message: "singular Legendre Hessian".into(),
                residual: max_abs(&res),
            })?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = current.iter().zip(step.iter()).map(|(a, b)| a + lambda * b).collect();
            let (tg, th) = l_jet_in_g(p, v, &trial)?;
            let tr = stationarity(&tg, wsum0, wsum);
            if max_abs(&tr) < max_abs(&res) || lambda < 1e-3 {
                current = trial;
                res = tr;
                hess = th;
                break;
            }
            lambda *= 0.5;
        }
        iterations += 1;
    }
    let gap = current
        .iter()
        .zip(&g)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    if gap > ROUTE_TOL * (1.0 + max_abs(&g)) {
        return Err(Error::Consistency(format!(
            "closed-form and Newton Legendre solutions differ by {gap:e}"
        )));
    }
    debug_assert_eq!(current.len(), m + 1);
    Ok(LegendreSolution {
        g,
        newton_g: current,
        newton_iterations: iterations,
        stationarity_residual: max_abs(&res),
        kahler,
        cone_radicand,
    })
}

/// `χ = √2 √K(v, ṽ) √((w+w̄)N⁻¹(w+w̄) − (w+w̄)₀)` with `ṽ` standing for `v̄`.
pub(crate) fn chi_generic<P: Prepotential, S: Scalar>(p: &P, v: &[S], vt: &[S], wsum0: S, wsum: &[S]) -> Result<S> {
    let r = rigid(p, v, vt)?;
    let s = inverse_quadratic_form(&r.n, wsum)?;
    Ok(S::real(2f64.sqrt()) * r.k.sqrt() * (s - wsum0).sqrt())
}

/// The hyperkähler potential by three independent routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiRoutes {
    /// `√2 √K √(…)`.
    pub explicit: f64,
    /// `K(v, v̄)/G⁰` with `G⁰` from [`legendre_solve`].
    pub legendre: f64,
    /// `K(X, X̄)` at `X = v/√G⁰`.
    pub rescaled: f64,
}

impl ChiRoutes {
    pub fn max_relative_spread(&self) -> f64 {
        let vals = [self.explicit, self.legendre, self.rescaled];
        let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
        let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
        (hi - lo) / hi.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn hk_potential_routes<P: Prepotential>(p: &P, pt: &HkcPoint) -> Result<ChiRoutes> {
    let sol = legendre_solve(p, &pt.v, pt.wsum0(), &pt.wsum())?;
    let g0 = sol.g[0];
    let explicit = 2f64.sqrt() * sol.kahler.sqrt() * sol.cone_radicand.sqrt();
    let legendre = sol.kahler / g0;
    let x: Vec<Complex64> = pt.v.iter().map(|v| v / g0.sqrt()).collect();
    let rescaled = rigid(p, &x, &conj(&x))?.k.re;
    Ok(ChiRoutes {
        explicit,
        legendre,
        rescaled,
    })
}

/// `χ`, after cross-checking all three routes to [`ROUTE_TOL`].
pub fn hk_potential<P: Prepotential>(p: &P, pt: &HkcPoint) -> Result<f64> {
    let routes = hk_potential_routes(p, pt)?;
    let spread = routes.max_relative_spread();
    if spread > ROUTE_TOL {
        return Err(Error::Consistency(format!(
            "χ routes disagree by {spread:e} (relative)"
        )));
    }
    Ok(routes.explicit)
}

/// Residuals of `ℒ_{G^I G^J} + ℒ_{v^I v̄^J} = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceResidual {
    /// `I, J ≥ 1`; zero for a valid `ℒ`.
    pub block: DMatrix<f64>,
    /// `ℒ_{G⁰G⁰}`; there is no `v⁰` on the slice, so this is the full residual.
    pub g0g0: f64,
    /// `ℒ_{G⁰G^I}`, `I ≥ 1`.
    pub g0gi: Vec<f64>,
}

impl LaplaceResidual {
    pub fn block_max(&self) -> f64 {
        self.block.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }
}

pub fn laplace_residual<P: Prepotential>(p: &P, v: &[Complex64], g: &[f64]) -> Result<LaplaceResidual> {
    check_dims(p, v.len(), g.len())?;
    let m = v.len();
    let mut x = v.to_vec();
    x.extend(conj(v));
    x.extend(real_c(g));
    let jet = holomorphic_jet(
        |z| {
            cal_l_generic(p, &z[..m], &z[m..2 * m], &z[2 * m..])
                .unwrap_or_else(|_| Scalar::constant(Complex64::new(f64::NAN, 0.0)))
        },
        &x,
    )?;
    let h = |i: usize, j: usize| jet.hessian[i][j].re;
    let gi = |i: usize| 2 * m + 1 + i;
    let block = DMatrix::from_fn(m, m, |i, j| h(gi(i), gi(j)) + h(i, m + j));
    Ok(LaplaceResidual {
        block,
        g0g0: h(2 * m, 2 * m),
        g0gi: (0..m).map(|i| h(2 * m, gi(i))).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct U1Residual {
    /// `|v^I ℒ_{v^I} − v̄^I ℒ_{v̄^I}|` at the Legendre point.
    pub l_invariance: f64,
    /// `|δχ|` under `δv = −iε³v`, `δw = 0`.
    pub flow_derivative: f64,
}

pub fn u1_invariance_residual<P: Prepotential>(p: &P, pt: &HkcPoint, su2: &Su2Params) -> Result<U1Residual> {
    let wsum0 = pt.wsum0();
    let wsum = pt.wsum();
    let sol = legendre_solve(p, &pt.v, wsum0, &wsum)?;
    let m = pt.v.len();
    let gc = real_c(&sol.g);
    let mut x = pt.v.clone();
    x.extend(conj(&pt.v));
    let (_, grad) = holomorphic_gradient(
        |z| {
            let gd: Vec<_> = gc.iter().map(|&c| Scalar::constant(c)).collect();
            cal_l_generic(p, &z[..m], &z[m..], &gd).unwrap_or_else(|_| Scalar::constant(Complex64::new(f64::NAN, 0.0)))
        },
        &x,
    )?;
    let l_inv: Complex64 =
        (0..m).map(|i| x[i] * grad[i]).sum::<Complex64>() - (0..m).map(|i| x[m + i] * grad[m + i]).sum::<Complex64>();

    let i = Complex64::new(0.0, 1.0);
    let direction: Vec<Complex64> = (0..m)
        .map(|k| -i * su2.eps3 * x[k])
        .chain((0..m).map(|k| i * su2.eps3 * x[m + k]))
        .collect();
    let (_, d) = directional_derivative(
        |z| {
            let w0 = Scalar::real(wsum0);
            let ws: Vec<_> = wsum.iter().map(|&w| Scalar::real(w)).collect();
            chi_generic(p, &z[..m], &z[m..], w0, &ws)
                .unwrap_or_else(|_| Scalar::constant(Complex64::new(f64::NAN, 0.0)))
        },
        &x,
        &direction,
    )?;
    Ok(U1Residual {
        l_invariance: l_inv.norm(),
        flow_derivative: d.norm(),
    })
}

/// Draws an O(2) section with `v = λZ` (`Z` from [`sample_domain_point`],
/// `|λ| ∈ [0.5, 1.5]`, arbitrary phase), `G⁰ ∈ [0.5, 2]` and `G^I ∈ [−1, 1]`,
/// together with the HKC point whose `w + w̄` is stationary at that `G` and
/// whose `Im w` is uniform in `[−1, 1]`.
pub fn sample_hkc_point<P: Prepotential, R: Rng + ?Sized>(
    p: &P,
    region: &SampleBox,
    rng: &mut R,
    max_attempts: usize,
) -> Result<(O2Section, HkcPoint)> {
    let z = sample_domain_point(p, region, rng, max_attempts)?;
    let lambda = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
    let v: Vec<Complex64> = z.full().iter().map(|zi| lambda * zi).collect();
    let mut g = vec![rng.random_range(0.5..2.0)];
    g.extend((0..p.dim()).map(|_| rng.random_range(-1.0..1.0)));
    let (wsum0, wsum) = wsum_from_g(p, &v, &g)?;
    let mut im = || rng.random_range(-1.0..1.0);
    let w0 = Complex64::new(0.5 * wsum0, im());
    let w = wsum.iter().map(|x| Complex64::new(0.5 * x, im())).collect();
    Ok((O2Section { v: v.clone(), g }, HkcPoint { v, w0, w }))
}
