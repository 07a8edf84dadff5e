//! Levi-Civita connection and Ricci tensor by finite differences of a metric
//! given pointwise, and the Einstein residual `Ric − λg`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::RealSymMatrix;

/// Default stencil step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// `Γ^a_{bc}`, symmetric in `(b, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let d = self.dim;
        self.data[(a * d + b) * d + c] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Fourth-order central difference of a vector-valued function along `k`.
fn derivative<T, F>(f: &F, x: &[f64], k: usize, h: f64, combine: impl Fn(&[T; 4]) -> T) -> Result<T>
where
    F: Fn(&[f64]) -> Result<T>,
{
    let at = |s: f64| {
        let mut y = x.to_vec();
        y[k] += s * h;
        f(&y)
    };
    Ok(combine(&[at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?]))
}

fn stencil(v: &[DMatrix<f64>; 4], h: f64) -> DMatrix<f64> {
    (-&v[0] + 8.0 * &v[1] - 8.0 * &v[2] + &v[3]) / (12.0 * h)
}

fn check_step(x: &[f64], step: f64) -> Result<()> {
    if x.is_empty() || !(step > 0.0) || !step.is_finite() {
        return Err(Error::Configuration(format!(
            "need a nonempty point and a positive step, got step {step}"
        )));
    }
    Ok(())
}

fn metric_at<F>(metric_fn: &F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let g = metric_fn(x)?;
    if g.nrows() != x.len() || g.ncols() != x.len() {
        return Err(Error::Configuration(format!(
            "metric is {}×{} at a point of dimension {}",
            g.nrows(),
            g.ncols(),
            x.len()
        )));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            message: "non-finite metric entry".into(),
            residual: f64::NAN,
        });
    }
    Ok(g)
}

fn inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = g.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let lu = g.clone().lu();
    let det = lu.determinant();
    if !(det.abs() > 1e-14 * scale.powi(g.nrows() as i32)) {
        return Err(Error::DegeneratePoint(format!("metric is singular (det = {det:e})")));
    }
    lu.try_inverse()
        .ok_or_else(|| Error::DegeneratePoint("metric is singular".into()))
}

pub fn christoffel<F>(metric_fn: &F, x: &[f64], step: f64) -> Result<Christoffel>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    check_step(x, step)?;
    let d = x.len();
    let ginv = inverse(&metric_at(metric_fn, x)?)?;
    let dg: Vec<DMatrix<f64>> = (0..d)
        .map(|k| derivative(&|y: &[f64]| metric_at(metric_fn, y), x, k, step, |v| stencil(v, step)))
        .collect::<Result<_>>()?;
    let mut out = Christoffel {
        dim: d,
        data: vec![0.0; d * d * d],
    };
    for b in 0..d {
        for c in b..d {
            let lower: Vec<f64> = (0..d)
                .map(|e| 0.5 * (dg[b][(e, c)] + dg[c][(e, b)] - dg[e][(b, c)]))
                .collect();
            for a in 0..d {
                let v: f64 = (0..d).map(|e| ginv[(a, e)] * lower[e]).sum();
                out.set(a, b, c, v);
                out.set(a, c, b, v);
            }
        }
    }
    Ok(out)
}

/// `R_{bd} = ∂_aΓ^a_{bd} − ∂_dΓ^a_{ba} + Γ^a_{ae}Γ^e_{bd} − Γ^a_{de}Γ^e_{ba}`.
pub fn ricci<F>(metric_fn: &F, x: &[f64], step: f64) -> Result<RealSymMatrix>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    check_step(x, step)?;
    let d = x.len();
    let gamma = christoffel(metric_fn, x, step)?;
    let dgamma: Vec<Christoffel> = (0..d)
        .map(|k| {
            derivative(&|y: &[f64]| christoffel(metric_fn, y, step), x, k, step, |v| {
                Christoffel {
                    dim: d,
                    data: (0..d * d * d)
                        .map(|i| {
                            (-v[0].data[i] + 8.0 * v[1].data[i] - 8.0 * v[2].data[i] + v[3].data[i]) / (12.0 * step)
                        })
                        .collect(),
                }
            })
        })
        .collect::<Result<_>>()?;
    let mut ric = DMatrix::zeros(d, d);
    for b in 0..d {
        for e in 0..d {
            let mut r = 0.0;
            for a in 0..d {
                r += dgamma[a].get(a, b, e) - dgamma[e].get(a, b, a);
                for f in 0..d {
                    r += gamma.get(a, a, f) * gamma.get(f, b, e) - gamma.get(a, e, f) * gamma.get(f, b, a);
                }
            }
            ric[(b, e)] = r;
        }
    }
    let scale = ric.iter().fold(1.0_f64, |a: f64, v: &f64| a.max(v.abs()));
    RealSymMatrix::symmetrize(ric, 1e-4 * scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EinsteinResidual {
    /// `tr(g⁻¹ Ric)/dim`.
    pub lambda: f64,
    /// `max|Ric − λg| / max|g|`.
    pub residual: f64,
}

pub fn einstein_residual<F>(metric_fn: &F, x: &[f64], step: f64) -> Result<EinsteinResidual>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let g = metric_at(metric_fn, x)?;
    let ric = ricci(metric_fn, x, step)?;
    let ginv = inverse(&g)?;
    let d = x.len() as f64;
    let lambda = (&ginv * ric.matrix()).trace() / d;
    let dev = (ric.matrix() - lambda * &g).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let scale = g.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    Ok(EinsteinResidual {
        lambda,
        residual: dev / scale,
    })
}

/// Einstein residual at `step` and `step/2`.
pub fn einstein_convergence<F>(metric_fn: &F, x: &[f64], step: f64) -> Result<[EinsteinResidual; 2]>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    Ok([
        einstein_residual(metric_fn, x, step)?,
        einstein_residual(metric_fn, x, 0.5 * step)?,
    ])
}
