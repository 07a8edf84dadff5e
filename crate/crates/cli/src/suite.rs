//! The `check` suite: every invariant of the engine, swept over seeded random
//! points, with a homogeneity gate in front.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use cmap_core::curvature::{einstein_convergence, einstein_residual, ricci, EinsteinResidual};
use cmap_core::hkc::{
    cal_l_closed, cal_l_contour, hk_potential, hk_potential_routes, laplace_residual, legendre_solve, sample_hkc_point,
    u1_invariance_residual, wsum_from_g, HkcPoint, O2Section, Su2Params,
};
use cmap_core::numerics::ContourConfig;
use cmap_core::prepotential::{eval_jet, homogeneity_residual};
use cmap_core::qk_metric::{
    action_jacobian, fs_metric, g_action, isometry_residual, pullback_residual, sample_fs_point, sample_group_element,
    FsPoint, GActionParams,
};
use cmap_core::special_kahler::{domain_check, sample_candidate, sk_data, ProjectivePoint, SampleBox};
use cmap_core::twistor::{
    compare_metrics, compare_metrics_with, coords_fs_to_twistor, round_trip_residual, twistor_potential,
    PotentialConstant,
};
use cmap_core::{Error, Model, Prepotential, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ChecksConfig, Config, ModelConfig, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;
pub const PRNG: &str = "pcg64 (PCG XSL RR 128/64, rand_pcg::Pcg64::seed_from_u64)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// How `value` is compared with `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Passes when `value ≤ tolerance`.
    AtMost,
    /// Passes when `value > tolerance` (negative controls and definiteness).
    Above,
}

impl Criterion {
    fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Criterion::AtMost => value <= tolerance,
            Criterion::Above => value > tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub points: usize,
    pub value: Option<f64>,
    pub tolerance: f64,
    pub criterion: Criterion,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<&'static str, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str, seed: u64, tolerance: f64, criterion: Criterion) -> Self {
        CheckResult {
            name,
            status: Status::Skipped,
            seed: Some(seed),
            points: 0,
            value: None,
            tolerance,
            criterion,
            details: BTreeMap::new(),
            error: None,
        }
    }

    fn skipped(name: &'static str, tolerance: f64, criterion: Criterion, reason: &str) -> Self {
        CheckResult {
            name,
            status: Status::Skipped,
            seed: None,
            points: 0,
            value: None,
            tolerance,
            criterion,
            details: BTreeMap::new(),
            error: Some(reason.to_string()),
        }
    }

    fn detail(mut self, key: &'static str, v: impl Serialize) -> Self {
        self.details.insert(key, serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    /// Settles the status from a list of per-point values; the reduction is
    /// the worst value under the criterion. Any error fails the check.
    fn settle(mut self, values: Vec<Result<f64>>) -> Self {
        self.points = values.len();
        let mut worst: Option<f64> = None;
        for (i, v) in values.into_iter().enumerate() {
            match v {
                Ok(x) => {
                    let better = match (worst, self.criterion) {
                        (None, _) => true,
                        (Some(w), Criterion::AtMost) => x > w || x.is_nan(),
                        (Some(w), Criterion::Above) => x < w || x.is_nan(),
                    };
                    if better {
                        worst = Some(x);
                    }
                }
                Err(e) => {
                    if self.error.is_none() {
                        self.error = Some(format!("point {i}: {e}"));
                    }
                }
            }
        }
        self.value = worst;
        let ok = self.error.is_none() && worst.is_some_and(|w| self.criterion.holds(w, self.tolerance));
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }

    fn failed(mut self, e: &Error) -> Self {
        self.status = Status::Fail;
        self.error = Some(e.to_string());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepEcho {
    pub points: usize,
    pub seed: u64,
    pub prng: &'static str,
    #[serde(rename = "box")]
    pub region: SampleBox,
    pub max_attempts: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub status: Status,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub first_failure: Option<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub model: ModelConfig,
    pub sweep: SweepEcho,
    pub tolerances: Tolerances,
    pub checks_config: ChecksConfig,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.status == Status::Pass
    }
}

struct Ctx<'a> {
    model: &'a Model,
    cfg: &'a Config,
    tol: &'a Tolerances,
    region: SampleBox,
}

impl Ctx<'_> {
    fn seed(&self, group: u64) -> u64 {
        self.cfg.sweep.seed.wrapping_add(group)
    }

    fn points(&self) -> usize {
        self.cfg.sweep.points
    }

    fn attempts(&self) -> usize {
        self.cfg.sweep.max_attempts
    }

    fn fs_points(&self, seed: u64) -> Result<Vec<FsPoint>> {
        let mut rng = Pcg64::seed_from_u64(seed);
        (0..self.points())
            .map(|_| sample_fs_point(self.model, &self.region, &mut rng, self.attempts()))
            .collect()
    }

    fn hkc_points(&self, seed: u64) -> Result<Vec<(O2Section, HkcPoint)>> {
        let mut rng = Pcg64::seed_from_u64(seed);
        (0..self.points())
            .map(|_| sample_hkc_point(self.model, &self.region, &mut rng, self.attempts()))
            .collect()
    }
}

fn par_map<T: Sync, F: Fn(&T) -> Result<f64> + Sync + Send>(items: &[T], f: F) -> Vec<Result<f64>> {
    items.par_iter().map(f).collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MIN, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MAX, f64::min)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn homogeneity(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(0);
    let check = CheckResult::new("homogeneity", seed, ctx.tol.homogeneity, Criterion::AtMost);
    let mut rng = Pcg64::seed_from_u64(seed);
    let xs: Vec<Vec<Complex64>> = (0..ctx.points())
        .map(|_| {
            let z = sample_candidate(ctx.model.n(), &ctx.region, &mut rng);
            let lambda = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..2.0 * PI));
            z.full().iter().map(|c| lambda * c).collect()
        })
        .collect();
    let values = par_map(&xs, |x| {
        let jet = eval_jet(ctx.model, x)?;
        let scale = jet
            .gradient
            .iter()
            .fold(jet.value.norm().max(1.0), |a, g| a.max(g.norm()));
        let (euler, second) = homogeneity_residual(ctx.model, x)?;
        let mut worst = euler.max(second) / scale;
        for lambda in [2.0, 3.0] {
            let xs: Vec<Complex64> = x.iter().map(|c| c * lambda).collect();
            let scaled = eval_jet(ctx.model, &xs)?;
            worst = worst.max((scaled.value - lambda * lambda * jet.value).norm() / (lambda * lambda * scale));
            for (g1, g0) in scaled.gradient.iter().zip(&jet.gradient) {
                worst = worst.max((g1 - lambda * g0).norm() / (lambda * scale));
            }
        }
        Ok(worst)
    });
    vec![check.detail("scaling_factors", [2.0, 3.0]).settle(values)]
}

fn domain(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(1);
    let implication = CheckResult::new("domain_implication", seed, 0.0, Criterion::AtMost);
    let realness = CheckResult::new("n_realness", seed, ctx.tol.metric_realness, Criterion::AtMost);
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut accepted: Vec<ProjectivePoint> = Vec::new();
    let mut qualifying = 0usize;
    let mut violations = 0usize;
    let mut drawn = 0usize;
    while accepted.len() < ctx.points() && drawn < ctx.attempts() * ctx.points() {
        drawn += 1;
        let z = sample_candidate(ctx.model.n(), &ctx.region, &mut rng);
        let r = domain_check(ctx.model, &z);
        if r.positivity && r.kahler_block_negdef {
            qualifying += 1;
            if !r.curly_n_sum_negdef {
                violations += 1;
            }
        }
        if r.is_valid() {
            accepted.push(z);
        }
    }
    let implication = if qualifying < ctx.points() {
        implication.failed(&Error::Configuration(format!(
            "only {qualifying} qualifying points in {drawn} draws"
        )))
    } else {
        implication.settle(vec![Ok(violations as f64)])
    }
    .detail("draws", drawn)
    .detail("qualifying", qualifying)
    .detail("acceptance_rate", accepted.len() as f64 / drawn.max(1) as f64);
    let values = par_map(&accepted, |z| {
        let sk = sk_data(ctx.model, &z.full())?;
        let scale = sk.n.matrix().iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        Ok(sk.n_imaginary / scale)
    });
    vec![implication, realness.settle(values)]
}

fn fs_metric_checks(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(2);
    let posdef = CheckResult::new("fs_metric_positive_definite", seed, 0.0, Criterion::Above);
    let sigma = CheckResult::new("sigma_coefficient", seed, 0.0, Criterion::AtMost);
    let pts = match ctx.fs_points(seed) {
        Ok(p) => p,
        Err(e) => return vec![posdef.failed(&e), sigma.failed(&e)],
    };
    let eig = par_map(&pts, |pt| Ok(fs_metric(ctx.model, pt)?.eigenvalues()[0]));
    let sig = par_map(&pts, |pt| {
        Ok((fs_metric(ctx.model, pt)?.get(1, 1) - (-2.0 * pt.phi).exp()).abs())
    });
    vec![
        posdef
            .detail("realness_tolerance", cmap_core::qk_metric::REALNESS_TOL)
            .settle(eig),
        sigma.settle(sig),
    ]
}

fn isometry(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(3);
    let iso = CheckResult::new("isometry", seed, ctx.tol.isometry, Criterion::AtMost);
    let comp = CheckResult::new("group_composition", seed, ctx.tol.composition, Criterion::AtMost);
    let control = CheckResult::new(
        "isometry_negative_control",
        seed,
        ctx.tol.isometry_control_min,
        Criterion::Above,
    );
    let mut rng = Pcg64::seed_from_u64(seed);
    let n = ctx.model.n();
    let mut items: Vec<(FsPoint, GActionParams, GActionParams)> = Vec::new();
    for _ in 0..ctx.points() {
        match sample_fs_point(ctx.model, &ctx.region, &mut rng, ctx.attempts()) {
            Ok(pt) => items.push((pt, sample_group_element(n, &mut rng), sample_group_element(n, &mut rng))),
            Err(e) => return vec![iso.failed(&e), comp.failed(&e), control.failed(&e)],
        }
    }
    let iso_v = par_map(&items, |(pt, g, _)| isometry_residual(ctx.model, pt, g));
    let comp_v = par_map(&items, |(pt, g1, g2)| {
        let twice = g_action(&g_action(pt, g1), g2).to_coords();
        let once = g_action(pt, &g1.then(g2)).to_coords();
        Ok(twice
            .iter()
            .zip(&once)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max))
    });
    let control_beta = 0.7;
    let ctl_v = par_map(&items, |(pt, g, _)| {
        let g = GActionParams {
            beta: control_beta,
            ..g.clone()
        };
        let mut image = g_action(pt, &g);
        image.phi = pt.phi + g.beta;
        pullback_residual(ctx.model, pt, &image, &action_jacobian(pt, &g))
    });
    vec![
        iso.settle(iso_v),
        comp.settle(comp_v),
        control
            .detail("corruption", "phi -> phi + beta")
            .detail("beta", control_beta)
            .settle(ctl_v),
    ]
}

fn contour(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(4);
    let samples = ctx.cfg.checks.contour_samples;
    let oracle = CheckResult::new("contour_vs_closed", seed, ctx.tol.contour, Criterion::AtMost);
    let plateau = CheckResult::new("contour_plateau", seed, ctx.tol.contour_plateau, Criterion::AtMost);
    let pts = match ctx.hkc_points(seed) {
        Ok(p) => p,
        Err(e) => return vec![oracle.failed(&e), plateau.failed(&e)],
    };
    let base = ContourConfig { radius: None, samples };
    let doubled = ContourConfig {
        radius: None,
        samples: 2 * samples,
    };
    let o = par_map(&pts, |(s, _)| {
        let closed = cal_l_closed(ctx.model, &s.v, &s.g)?;
        Ok((cal_l_contour(ctx.model, &s.v, &s.g, &base)? - closed).abs() / (closed.abs() + 1.0))
    });
    let p = par_map(&pts, |(s, _)| {
        let closed = cal_l_closed(ctx.model, &s.v, &s.g)?;
        let a = cal_l_contour(ctx.model, &s.v, &s.g, &base)?;
        let b = cal_l_contour(ctx.model, &s.v, &s.g, &doubled)?;
        Ok((a - b).abs() / (closed.abs() + 1.0))
    });
    vec![
        oracle.detail("samples", samples).settle(o),
        plateau.detail("samples", [samples, 2 * samples]).settle(p),
    ]
}

fn chi(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(5);
    let inv = CheckResult::new(
        "legendre_involution",
        seed,
        ctx.tol.legendre_involution,
        Criterion::AtMost,
    );
    let three = CheckResult::new("chi_three_way", seed, ctx.tol.chi_routes, Criterion::AtMost);
    let hom = CheckResult::new("chi_homogeneity", seed, ctx.tol.chi_homogeneity, Criterion::AtMost);
    let shift = CheckResult::new("chi_imaginary_shift", seed, 0.0, Criterion::AtMost);
    let pts = match ctx.hkc_points(seed) {
        Ok(p) => p,
        Err(e) => return vec![inv.failed(&e), three.failed(&e), hom.failed(&e), shift.failed(&e)],
    };
    let inv_v = par_map(&pts, |(s, pt)| {
        let sol = legendre_solve(ctx.model, &pt.v, pt.wsum0(), &pt.wsum())?;
        let (w0, w) = wsum_from_g(ctx.model, &pt.v, &sol.g)?;
        let mut worst = (w0 - pt.wsum0()).abs() / (1.0 + pt.wsum0().abs());
        for (a, b) in w.iter().zip(pt.wsum()) {
            worst = worst.max((a - b).abs() / (1.0 + b.abs()));
        }
        for (a, b) in sol.g.iter().zip(&s.g) {
            worst = worst.max((a - b).abs() / (1.0 + b.abs()));
        }
        Ok(worst)
    });
    let three_v = par_map(&pts, |(_, pt)| {
        Ok(hk_potential_routes(ctx.model, pt)?.max_relative_spread())
    });
    let factors = [0.5, 2.0, 7.0];
    let hom_v = par_map(&pts, |(s, pt)| {
        let l = cal_l_closed(ctx.model, &s.v, &s.g)?;
        let chi = hk_potential(ctx.model, pt)?;
        let mut worst = 0.0_f64;
        for lambda in factors {
            let v: Vec<Complex64> = s.v.iter().map(|z| z * lambda).collect();
            let g: Vec<f64> = s.g.iter().map(|x| x * lambda).collect();
            worst = worst.max(rel(cal_l_closed(ctx.model, &v, &g)?, lambda * l));
            worst = worst.max(rel(
                hk_potential(ctx.model, &HkcPoint { v, ..pt.clone() })?,
                lambda * chi,
            ));
        }
        Ok(worst)
    });
    let shift_v = par_map(&pts, |(_, pt)| {
        let chi = hk_potential(ctx.model, pt)?;
        let mut shifted = pt.clone();
        shifted.w0.im += 3.25;
        for w in &mut shifted.w {
            w.im -= 1.5;
        }
        Ok((hk_potential(ctx.model, &shifted)? - chi).abs())
    });
    vec![
        inv.settle(inv_v),
        three.settle(three_v),
        hom.detail("scaling_factors", factors).settle(hom_v),
        shift.settle(shift_v),
    ]
}

fn laplace(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(6);
    let block = CheckResult::new("laplace", seed, ctx.tol.laplace, Criterion::AtMost);
    let index0 = CheckResult::new(
        "laplace_index0_nonzero",
        seed,
        ctx.tol.laplace_index0_min,
        Criterion::Above,
    );
    let pts = match ctx.hkc_points(seed) {
        Ok(p) => p,
        Err(e) => return vec![block.failed(&e), index0.failed(&e)],
    };
    let res: Vec<Result<_>> = pts
        .par_iter()
        .map(|(s, _)| laplace_residual(ctx.model, &s.v, &s.g))
        .collect();
    let first = res
        .first()
        .and_then(|r| r.as_ref().ok())
        .map(|r| json!({ "g0g0": r.g0g0, "g0gi": r.g0gi }));
    let b = res
        .iter()
        .map(|r| r.as_ref().map(|r| r.block_max()).map_err(Clone::clone))
        .collect();
    let z = res
        .iter()
        .map(|r| r.as_ref().map(|r| r.g0g0.abs()).map_err(Clone::clone))
        .collect();
    vec![block.settle(b), index0.detail("first_point", first).settle(z)]
}

fn u1(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(7);
    let check = CheckResult::new("u1_invariance", seed, ctx.tol.u1, Criterion::AtMost);
    let pts = match ctx.hkc_points(seed) {
        Ok(p) => p,
        Err(e) => return vec![check.failed(&e)],
    };
    let eps3 = 0.9;
    let v = par_map(&pts, |(_, pt)| {
        let r = u1_invariance_residual(ctx.model, pt, &Su2Params::rotation(eps3))?;
        Ok(r.l_invariance.max(r.flow_derivative))
    });
    vec![check.detail("eps3", eps3).settle(v)]
}

fn twistor(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(8);
    let tol = ctx.tol;
    let pot = CheckResult::new("twistor_potential", seed, tol.twistor_potential, Criterion::AtMost);
    let cmp = CheckResult::new("metric_comparison", seed, tol.metric_comparison, Criterion::AtMost);
    let spread = CheckResult::new(
        "comparison_constant_spread",
        seed,
        tol.comparison_constant_spread,
        Criterion::AtMost,
    );
    let trip = CheckResult::new("dilaton_round_trip", seed, tol.round_trip, Criterion::AtMost);
    let control = CheckResult::new(
        "twistor_constant_control",
        seed,
        tol.comparison_control_min,
        Criterion::Above,
    );
    let pts = match ctx.fs_points(seed) {
        Ok(p) => p,
        Err(e) => {
            return [pot, cmp, spread, trip, control]
                .into_iter()
                .map(|c| c.failed(&e))
                .collect()
        }
    };
    let pot_v = par_map(&pts, |pt| {
        let tp = coords_fs_to_twistor(ctx.model, pt)?;
        let chi = hk_potential(
            ctx.model,
            &HkcPoint {
                v: tp.z.full(),
                w0: tp.w0,
                w: tp.w.clone(),
            },
        )?;
        Ok(rel(twistor_potential(ctx.model, &tp)?.exp(), chi))
    });
    let comparisons: Vec<Result<_>> = pts.par_iter().map(|pt| compare_metrics(ctx.model, pt)).collect();
    let devs: Vec<Result<f64>> = comparisons
        .iter()
        .map(|r| r.as_ref().map(|c| c.max_rel_dev).map_err(Clone::clone))
        .collect();
    let constants: Vec<f64> = comparisons
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|c| c.constant))
        .collect();
    let worst = comparisons
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().ok().map(|c| (i, c)))
        .max_by(|a, b| a.1.max_rel_dev.total_cmp(&b.1.max_rel_dev))
        .map(|(i, c)| json!({ "point": i, "entry": c.worst_entry, "deviation": c.max_rel_dev }));
    let cmp = if constants.is_empty() {
        cmp.settle(devs)
    } else {
        let c0 = constants[0];
        cmp.detail("constant", c0)
            .detail("line_element_ratio", 1.0 / (2.0 * c0))
            .detail("worst", worst)
            .settle(devs)
    };
    let spread = if constants.len() == pts.len() {
        spread
            .detail("min", min_of(&constants))
            .detail("max", max_of(&constants))
            .settle(vec![Ok(max_of(&constants) - min_of(&constants))])
    } else {
        spread.failed(&Error::Consistency("metric comparison failed at some points".into()))
    };
    let trip_v = par_map(&pts, |pt| round_trip_residual(ctx.model, pt));
    let ctl_v = par_map(&pts, |pt| {
        Ok(compare_metrics_with(ctx.model, pt, PotentialConstant::Dropped)?.max_rel_dev)
    });
    vec![
        pot.settle(pot_v),
        cmp,
        spread,
        trip.settle(trip_v),
        control.detail("corruption", "ln sqrt 2 dropped from K_T").settle(ctl_v),
    ]
}

fn sphere(x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, x[0].sin().powi(2)]))
}

fn hyperbolic(x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(DMatrix::identity(2, 2) / (x[1] * x[1]))
}

fn flat(x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(DMatrix::identity(x.len(), x.len()))
}

/// Worst deviation of the curvature oracles: the unit sphere (`Ric = g`),
/// the hyperbolic plane (`Ric = −g`) and flat space (`Ric = 0`).
pub fn curvature_oracles(step: f64) -> Result<f64> {
    let dev = |ric: &DMatrix<f64>, want: &DMatrix<f64>| (ric - want).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let xs = [PI / 3.0, 0.4];
    let s = dev(ricci(&sphere, &xs, step)?.matrix(), &sphere(&xs)?);
    let xh = [0.2, 0.9];
    let h = dev(ricci(&hyperbolic, &xh, step)?.matrix(), &(-hyperbolic(&xh)?));
    let xf = [0.3, -0.2, 1.1, 0.5];
    let f = dev(ricci(&flat, &xf, step)?.matrix(), &DMatrix::zeros(4, 4));
    Ok(s.max(h).max(f))
}

fn einstein(ctx: &Ctx) -> Vec<CheckResult> {
    let seed = ctx.seed(9);
    let tol = ctx.tol;
    let step = ctx.cfg.checks.einstein_step;
    let oracles = CheckResult::new("curvature_oracles", seed, tol.curvature_oracle, Criterion::AtMost)
        .detail("step", step)
        .settle(vec![curvature_oracles(step)]);
    let res = CheckResult::new("einstein", seed, tol.einstein, Criterion::AtMost).detail("step", step);
    let spread = CheckResult::new(
        "einstein_lambda_spread",
        seed,
        tol.einstein_lambda_spread,
        Criterion::AtMost,
    );
    if oracles.status != Status::Pass {
        let why = Error::Consistency("curvature oracles failed".into());
        return vec![oracles, res.failed(&why), spread.failed(&why)];
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let pts: Result<Vec<FsPoint>> = (0..ctx.cfg.checks.einstein_points)
        .map(|_| sample_fs_point(ctx.model, &ctx.region, &mut rng, ctx.attempts()))
        .collect();
    let pts = match pts {
        Ok(p) => p,
        Err(e) => return vec![oracles, res.failed(&e), spread.failed(&e)],
    };
    let n = ctx.model.n();
    let metric =
        |x: &[f64]| -> Result<DMatrix<f64>> { Ok(fs_metric(ctx.model, &FsPoint::from_coords(n, x)?)?.into_matrix()) };
    let results: Vec<Result<EinsteinResidual>> = pts
        .par_iter()
        .map(|pt| einstein_residual(&metric, &pt.to_coords(), step))
        .collect();
    let lambdas: Vec<f64> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|e| e.lambda))
        .collect();
    let convergence = pts
        .first()
        .map(|pt| einstein_convergence(&metric, &pt.to_coords(), step))
        .and_then(|r| r.ok())
        .map(|[a, b]| json!({ "step": [step, step / 2.0], "residual": [a.residual, b.residual], "lambda": [a.lambda, b.lambda] }));
    let res = res
        .detail("lambda", &lambdas)
        .detail("convergence", convergence)
        .settle(
            results
                .iter()
                .map(|r| r.as_ref().map(|e| e.residual).map_err(Clone::clone))
                .collect(),
        );
    let spread = if lambdas.len() == pts.len() && !lambdas.is_empty() {
        spread.settle(vec![Ok(max_of(&lambdas) - min_of(&lambdas))])
    } else {
        spread.failed(&Error::Consistency("Einstein residual failed at some points".into()))
    };
    vec![oracles, res, spread]
}

type CheckGroup = fn(&Ctx) -> Vec<CheckResult>;

const GROUP_NAMES: [&[(&str, Criterion)]; 9] = [
    &[
        ("domain_implication", Criterion::AtMost),
        ("n_realness", Criterion::AtMost),
    ],
    &[
        ("fs_metric_positive_definite", Criterion::Above),
        ("sigma_coefficient", Criterion::AtMost),
    ],
    &[
        ("isometry", Criterion::AtMost),
        ("group_composition", Criterion::AtMost),
        ("isometry_negative_control", Criterion::Above),
    ],
    &[
        ("contour_vs_closed", Criterion::AtMost),
        ("contour_plateau", Criterion::AtMost),
    ],
    &[
        ("legendre_involution", Criterion::AtMost),
        ("chi_three_way", Criterion::AtMost),
        ("chi_homogeneity", Criterion::AtMost),
        ("chi_imaginary_shift", Criterion::AtMost),
    ],
    &[
        ("laplace", Criterion::AtMost),
        ("laplace_index0_nonzero", Criterion::Above),
    ],
    &[("u1_invariance", Criterion::AtMost)],
    &[
        ("twistor_potential", Criterion::AtMost),
        ("metric_comparison", Criterion::AtMost),
        ("comparison_constant_spread", Criterion::AtMost),
        ("dilaton_round_trip", Criterion::AtMost),
        ("twistor_constant_control", Criterion::Above),
    ],
    &[
        ("curvature_oracles", Criterion::AtMost),
        ("einstein", Criterion::AtMost),
        ("einstein_lambda_spread", Criterion::AtMost),
    ],
];

fn tolerance_of(tol: &Tolerances, name: &str) -> f64 {
    match name {
        "n_realness" => tol.metric_realness,
        "isometry" => tol.isometry,
        "group_composition" => tol.composition,
        "isometry_negative_control" => tol.isometry_control_min,
        "contour_vs_closed" => tol.contour,
        "contour_plateau" => tol.contour_plateau,
        "legendre_involution" => tol.legendre_involution,
        "chi_three_way" => tol.chi_routes,
        "chi_homogeneity" => tol.chi_homogeneity,
        "laplace" => tol.laplace,
        "laplace_index0_nonzero" => tol.laplace_index0_min,
        "u1_invariance" => tol.u1,
        "twistor_potential" => tol.twistor_potential,
        "metric_comparison" => tol.metric_comparison,
        "comparison_constant_spread" => tol.comparison_constant_spread,
        "dilaton_round_trip" => tol.round_trip,
        "twistor_constant_control" => tol.comparison_control_min,
        "curvature_oracles" => tol.curvature_oracle,
        "einstein" => tol.einstein,
        "einstein_lambda_spread" => tol.einstein_lambda_spread,
        _ => 0.0,
    }
}

/// Runs the suite. Checks after a failed homogeneity gate are reported as
/// skipped.
pub fn run(cfg: &Config) -> anyhow::Result<Report> {
    let model = cfg.build_model()?;
    let region = cfg.region();
    let ctx = Ctx {
        model: &model,
        cfg,
        tol: &cfg.tolerances,
        region,
    };
    let c = &cfg.checks;
    let groups: [(bool, CheckGroup); 9] = [
        (c.domain, domain),
        (c.fs_metric, fs_metric_checks),
        (c.isometry, isometry),
        (c.contour, contour),
        (c.chi, chi),
        (c.laplace, laplace),
        (c.u1, u1),
        (c.twistor, twistor),
        (cfg.einstein_enabled(), einstein),
    ];
    let mut checks = homogeneity(&ctx);
    let gate_open = checks[0].status == Status::Pass;
    for ((enabled, f), names) in groups.into_iter().zip(GROUP_NAMES) {
        if gate_open && enabled {
            checks.extend(f(&ctx));
        } else {
            let reason = if gate_open {
                "disabled"
            } else {
                "homogeneity gate failed"
            };
            checks.extend(
                names
                    .iter()
                    .map(|&(name, crit)| CheckResult::skipped(name, tolerance_of(&cfg.tolerances, name), crit, reason)),
            );
        }
    }
    let count = |s: Status| checks.iter().filter(|r| r.status == s).count();
    let failed = count(Status::Fail);
    let summary = Summary {
        status: if failed == 0 { Status::Pass } else { Status::Fail },
        total: checks.len(),
        passed: count(Status::Pass),
        failed,
        skipped: count(Status::Skipped),
        first_failure: checks.iter().find(|r| r.status == Status::Fail).map(|r| r.name),
    };
    let mut checks_config = cfg.checks.clone();
    checks_config.einstein = Some(cfg.einstein_enabled());
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "check",
        model: cfg.model.clone(),
        sweep: SweepEcho {
            points: cfg.sweep.points,
            seed: cfg.sweep.seed,
            prng: PRNG,
            region,
            max_attempts: cfg.sweep.max_attempts,
        },
        tolerances: cfg.tolerances.clone(),
        checks_config,
        checks,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(model: &str) -> Config {
        Config::from_json(&format!(r#"{{"model": {model}, "sweep": {{"points": 3, "seed": 1}}}}"#)).unwrap()
    }

    #[test]
    fn small_quadratic_run_passes() {
        let report = run(&quick(r#"{"kind": "quadratic", "n": 0}"#)).unwrap();
        assert!(report.passed(), "{:?}", report.summary);
        assert!(report.checks.len() >= 10);
        assert_eq!(report.schema_version, SCHEMA_VERSION);
    }

    #[test]
    fn gate_skips_everything_after_homogeneity() {
        let report = run(&quick(r#"{"kind": "quadratic", "n": 0, "shift": [0.0, 2.0]}"#)).unwrap();
        assert_eq!(report.summary.first_failure, Some("homogeneity"));
        assert_eq!(report.summary.failed, 1);
        assert!(report.checks[1..].iter().all(|c| c.status == Status::Skipped));
    }

    #[test]
    fn disabled_groups_are_listed_as_skipped() {
        let mut cfg = quick(r#"{"kind": "quadratic", "n": 0}"#);
        cfg.checks.twistor = false;
        cfg.checks.einstein = Some(false);
        let report = run(&cfg).unwrap();
        let comparison = report.checks.iter().find(|c| c.name == "metric_comparison").unwrap();
        assert_eq!(comparison.status, Status::Skipped);
        assert_eq!(comparison.tolerance, cfg.tolerances.metric_comparison);
        assert!(report.passed());
    }

    #[test]
    fn settle_reduces_to_the_worst_value() {
        let c = CheckResult::new("x", 0, 1.0, Criterion::AtMost).settle(vec![Ok(0.5), Ok(0.9), Ok(0.1)]);
        assert_eq!((c.status, c.value), (Status::Pass, Some(0.9)));
        let c = CheckResult::new("x", 0, 1.0, Criterion::Above).settle(vec![Ok(3.0), Ok(0.9)]);
        assert_eq!((c.status, c.value), (Status::Fail, Some(0.9)));
        let c =
            CheckResult::new("x", 0, 1.0, Criterion::AtMost).settle(vec![Ok(0.1), Err(Error::Pole("G⁰ = 0".into()))]);
        assert_eq!(c.status, Status::Fail);
        assert!(c.error.unwrap().starts_with("point 1"));
    }
}
