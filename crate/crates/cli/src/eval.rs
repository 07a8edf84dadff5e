//! The `eval` command: metric matrices at one FS point.

use cmap_core::qk_metric::{fs_metric, FsPoint};
use cmap_core::special_kahler::ProjectivePoint;
use cmap_core::twistor::{
    compare_metrics, coords_fs_to_twistor, pulled_back_twistor_metric, MetricComparison, PotentialConstant,
};
use cmap_core::{Error, Prepotential};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::suite::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Fs,
    Twistor,
    Both,
}

/// Point given on the command line; `Z` lists `[re, im]` of `Z², …, Z^{n+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "Z", default)]
    pub z: Vec<Complex64>,
}

impl PointSpec {
    pub fn to_fs_point(&self) -> FsPoint {
        FsPoint {
            phi: self.phi,
            sigma: self.sigma,
            a: self.a.clone(),
            b: self.b.clone(),
            z: ProjectivePoint::new(self.z.clone()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistorOutput {
    pub w0: Complex64,
    pub w: Vec<Complex64>,
    /// The twistor metric pulled back to the FS basis.
    pub metric: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalOutput {
    pub schema_version: u32,
    pub command: &'static str,
    pub route: Route,
    pub basis: Vec<String>,
    pub point: PointSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fs_metric: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twistor: Option<TwistorOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<MetricComparison>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalFailure {
    pub schema_version: u32,
    pub command: &'static str,
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub message: String,
}

impl EvalFailure {
    fn from_error(e: &Error) -> Self {
        let (kind, verdict) = match e {
            Error::OutsideDomain { verdict } => ("outside_domain", Some(verdict.clone())),
            Error::Configuration(_) => ("configuration", None),
            Error::DegeneratePoint(_) => ("degenerate_point", None),
            Error::OutsideCone(_) => ("outside_cone", None),
            _ => ("numerical", None),
        };
        EvalFailure {
            schema_version: SCHEMA_VERSION,
            command: "eval",
            error: kind.into(),
            verdict,
            message: e.to_string(),
        }
    }
}

/// Basis labels `φ, σ, A^I, B_I, Re Z^A, Im Z^A` in ASCII.
pub fn basis_labels(n: usize) -> Vec<String> {
    let mut out = vec!["phi".to_string(), "sigma".to_string()];
    out.extend((1..=n + 1).map(|i| format!("A{i}")));
    out.extend((1..=n + 1).map(|i| format!("B{i}")));
    for a in 2..=n + 1 {
        out.push(format!("ReZ{a}"));
        out.push(format!("ImZ{a}"));
    }
    out
}

pub fn evaluate(
    cfg: &Config,
    spec: &PointSpec,
    route: Route,
) -> anyhow::Result<std::result::Result<EvalOutput, EvalFailure>> {
    let model = cfg.build_model()?;
    let pt = spec.to_fs_point();
    let n = model.n();
    if pt.n() != n || pt.a.len() != n + 1 || pt.b.len() != n + 1 {
        anyhow::bail!(
            "point needs {} components of A and B and {n} of Z for this model",
            n + 1
        );
    }
    let run = || -> cmap_core::Result<EvalOutput> {
        let fs = match route {
            Route::Fs | Route::Both => Some(fs_metric(&model, &pt)?.rows()),
            Route::Twistor => None,
        };
        let (twistor, comparison) = match route {
            Route::Fs => (None, None),
            Route::Twistor | Route::Both => {
                cmap_core::special_kahler::domain_check(&model, &pt.z).require()?;
                let tp = coords_fs_to_twistor(&model, &pt)?;
                let metric = pulled_back_twistor_metric(&model, &pt, PotentialConstant::Included)?.rows();
                let cmp = if route == Route::Both {
                    Some(compare_metrics(&model, &pt)?)
                } else {
                    None
                };
                (
                    Some(TwistorOutput {
                        w0: tp.w0,
                        w: tp.w,
                        metric,
                    }),
                    cmp,
                )
            }
        };
        Ok(EvalOutput {
            schema_version: SCHEMA_VERSION,
            command: "eval",
            route,
            basis: basis_labels(n),
            point: spec.clone(),
            fs_metric: fs,
            twistor,
            comparison,
        })
    };
    Ok(run().map_err(|e| EvalFailure::from_error(&e)))
}
