//! The JSON run configuration: model, sweep, tolerances and check switches.

use std::path::Path;

use cmap_core::prepotential::{CubicModel, Model, QuadraticModel};
use cmap_core::special_kahler::SampleBox;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub checks: ChecksConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Quadratic,
    Cubic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n: usize,
    /// Quadratic signs `s_1..s_{n+1}`; defaults to `(+1, −1, …, −1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i32>>,
    /// Cubic couplings as `[A, B, C, d_ABC]` with labels in `2..=n+1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<[f64; 4]>>,
    /// Constant `[re, im]` added to `F`; breaks homogeneity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub points: usize,
    pub seed: u64,
    /// Sampling box for `Z^A`; defaults by model kind.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub region: Option<SampleBox>,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

fn default_attempts() -> usize {
    10_000
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            points: 20,
            seed: 0,
            region: None,
            max_attempts: default_attempts(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub homogeneity: f64,
    pub metric_realness: f64,
    pub isometry: f64,
    pub composition: f64,
    pub isometry_control_min: f64,
    pub contour: f64,
    pub contour_plateau: f64,
    pub legendre_involution: f64,
    pub chi_routes: f64,
    pub chi_homogeneity: f64,
    pub laplace: f64,
    pub laplace_index0_min: f64,
    pub u1: f64,
    pub twistor_potential: f64,
    pub metric_comparison: f64,
    pub comparison_constant_spread: f64,
    pub comparison_control_min: f64,
    pub round_trip: f64,
    pub curvature_oracle: f64,
    pub einstein: f64,
    pub einstein_lambda_spread: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            homogeneity: 1e-12,
            metric_realness: 1e-12,
            isometry: 1e-10,
            composition: 1e-12,
            isometry_control_min: 0.1,
            contour: 1e-10,
            contour_plateau: 1e-12,
            legendre_involution: 1e-10,
            chi_routes: 1e-10,
            chi_homogeneity: 1e-11,
            laplace: 1e-8,
            laplace_index0_min: 1e-6,
            u1: 1e-8,
            twistor_potential: 1e-12,
            metric_comparison: 1e-6,
            comparison_constant_spread: 1e-8,
            comparison_control_min: 1e-3,
            round_trip: 1e-10,
            curvature_oracle: 1e-4,
            einstein: 1e-3,
            einstein_lambda_spread: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub domain: bool,
    pub fs_metric: bool,
    pub isometry: bool,
    pub contour: bool,
    pub chi: bool,
    pub laplace: bool,
    pub u1: bool,
    pub twistor: bool,
    /// Runs by default only when the real dimension is at most 8.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub einstein: Option<bool>,
    pub einstein_points: usize,
    pub einstein_step: f64,
    pub contour_samples: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            domain: true,
            fs_metric: true,
            isometry: true,
            contour: true,
            chi: true,
            laplace: true,
            u1: true,
            twistor: true,
            einstein: None,
            einstein_points: 5,
            einstein_step: cmap_core::curvature::DEFAULT_STEP,
            contour_samples: cmap_core::numerics::DEFAULT_SAMPLES,
        }
    }
}

/// Largest real dimension for which the Einstein check runs by default.
pub const EINSTEIN_DEFAULT_MAX_DIM: usize = 8;

impl Config {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.build_model()?;
        if cfg.sweep.points == 0 {
            anyhow::bail!("sweep.points must be positive");
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))
    }

    pub fn build_model(&self) -> anyhow::Result<Model> {
        let m = &self.model;
        let base: Model = match m.kind {
            ModelKind::Quadratic => {
                if m.d.is_some() {
                    anyhow::bail!("quadratic model takes `signs`, not `d`");
                }
                let signs = m.signs.clone().unwrap_or_else(|| {
                    QuadraticModel::standard(m.n)
                        .signs()
                        .iter()
                        .map(|&s| s as i32)
                        .collect()
                });
                if signs.len() != m.n + 1 {
                    anyhow::bail!("expected {} signs, got {}", m.n + 1, signs.len());
                }
                QuadraticModel::new(signs)?.into()
            }
            ModelKind::Cubic => {
                if m.signs.is_some() {
                    anyhow::bail!("cubic model takes `d`, not `signs`");
                }
                let d = m.d.as_ref().ok_or_else(|| anyhow::anyhow!("cubic model needs `d`"))?;
                let mut entries = Vec::with_capacity(d.len());
                for row in d {
                    let mut idx = [0usize; 3];
                    for (k, &label) in row[..3].iter().enumerate() {
                        if label.fract() != 0.0 || label < 0.0 {
                            anyhow::bail!("index label {label} is not a nonnegative integer");
                        }
                        idx[k] = label as usize;
                    }
                    entries.push((idx, row[3]));
                }
                CubicModel::from_entries(m.n, &entries)?.into()
            }
        };
        Ok(match m.shift {
            Some(shift) => Model::Shifted {
                inner: Box::new(base),
                shift,
            },
            None => base,
        })
    }

    pub fn region(&self) -> SampleBox {
        self.sweep.region.unwrap_or(match self.model.kind {
            ModelKind::Quadratic => SampleBox::quadratic(),
            ModelKind::Cubic => SampleBox::cubic(),
        })
    }

    pub fn einstein_enabled(&self) -> bool {
        self.checks
            .einstein
            .unwrap_or(4 * (self.model.n + 1) <= EINSTEIN_DEFAULT_MAX_DIM)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmap_core::Prepotential;

    #[test]
    fn minimal_quadratic_config() {
        let cfg = Config::from_json(r#"{"model": {"kind": "quadratic", "n": 1}}"#).unwrap();
        let m = cfg.build_model().unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert!(cfg.einstein_enabled());
        assert_eq!(cfg.region(), SampleBox::quadratic());
    }

    #[test]
    fn cubic_config_uses_labels() {
        let cfg = Config::from_json(r#"{"model": {"kind": "cubic", "n": 3, "d": [[2, 3, 4, 0.5]]}}"#).unwrap();
        assert!(!cfg.einstein_enabled());
        assert_eq!(cfg.region(), SampleBox::cubic());
        let bad = Config::from_json(r#"{"model": {"kind": "cubic", "n": 3, "d": [[1, 3, 4, 0.5]]}}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn rejects_malformed_configs() {
        assert!(Config::from_json("{").is_err());
        assert!(Config::from_json(r#"{"model": {"kind": "quartic", "n": 0}}"#).is_err());
        assert!(Config::from_json(r#"{"model": {"kind": "quadratic", "n": 0, "signs": [1, -1]}}"#).is_err());
        assert!(Config::from_json(r#"{"model": {"kind": "quadratic", "n": 0}, "extra": 1}"#).is_err());
        assert!(
            Config::from_json(r#"{"model": {"kind": "quadratic", "n": 0}, "sweep": {"points": 0, "seed": 1}}"#)
                .is_err()
        );
    }

    #[test]
    fn shift_wraps_the_model() {
        let cfg = Config::from_json(r#"{"model": {"kind": "quadratic", "n": 0, "shift": [1.0, 0.0]}}"#).unwrap();
        assert!(matches!(cfg.build_model().unwrap(), Model::Shifted { .. }));
    }
}
