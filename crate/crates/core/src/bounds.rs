//! Approximation-ratio lower bounds and their check against the exhaustive optimum.

use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_report, CurvatureConfig, CurvatureReport};
use crate::error::{Error, Result};
use crate::matroid::{MatroidKind, MatroidSpec};
use crate::selectors::{brute_force_optimal, forward_regression, omp, Instance, TIE_TOL};

/// Slack allowed when comparing an empirical ratio to a bound.
pub const SATISFY_TOL: f64 = 1e-9;

/// `K̂ = Σ_{i=1}^{K} min(κ̂, κ̄)^{i−1}`
pub fn k_hat(k: usize, kf: f64, kb: f64) -> f64 {
    let base = kf.min(kb);
    (0..k).map(|i| base.powi(i as i32)).sum()
}

/// `1 − (1 − 1/K̂)^K`
pub fn bound_fr_uniform(k: usize, kf: f64, kb: f64) -> f64 {
    1.0 - (1.0 - 1.0 / k_hat(k, kf, kb)).powi(k as i32)
}

/// `1 − (1 − sin²φ/K̂)^K`
pub fn bound_omp_uniform(k: usize, kf: f64, kb: f64, phi: f64) -> f64 {
    1.0 - (1.0 - phi.sin().powi(2) / k_hat(k, kf, kb)).powi(k as i32)
}

fn a(k: usize, max: f64) -> f64 {
    if max <= 1.0 {
        max
    } else {
        max.powi(k as i32)
    }
}

fn b(k: usize, kf: f64) -> f64 {
    if kf > 1.0 {
        kf.powi(k as i32 - 1)
    } else {
        1.0
    }
}

/// `1 / (1 + a(κ̂, κ̄)·b(κ̂))`
pub fn bound_fr_nonuniform(k: usize, kf: f64, kb: f64) -> f64 {
    1.0 / (1.0 + a(k, kf.max(kb)) * b(k, kf))
}

/// `1 / (1 + a(κ̂, κ̄, κ̃)·b(κ̂)·sin⁻²φ)`, undefined at `φ = 0`.
pub fn bound_omp_nonuniform(k: usize, kf: f64, kb: f64, ko: f64, phi: f64) -> Option<f64> {
    let s2 = phi.sin().powi(2);
    (phi > 0.0 && s2 > 0.0).then(|| 1.0 / (1.0 + a(k, kf.max(kb).max(ko)) * b(k, kf) / s2))
}

/// `1 / (2 + 2(2K − 1)δ)` for a principal-angle gap `δ = π/2 − φ`.
pub fn near_orthogonal_asymptote(k: usize, delta: f64) -> f64 {
    1.0 / (2.0 + 2.0 * (2.0 * k as f64 - 1.0) * delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatroidClass {
    Uniform,
    NonUniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    #[serde(rename = "K")]
    pub k: usize,
    pub kappa_fwd: f64,
    pub kappa_bwd: f64,
    pub kappa_omp: f64,
    pub phi: f64,
}

/// `Some` only for the bounds that apply to the instance's matroid class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Satisfied {
    pub fr_uniform: Option<bool>,
    pub omp_uniform: Option<bool>,
    pub fr_nonuniform: Option<bool>,
    pub omp_nonuniform: Option<bool>,
}

impl Satisfied {
    /// No applicable bound is violated.
    pub fn all(&self) -> bool {
        [
            self.fr_uniform,
            self.omp_uniform,
            self.fr_nonuniform,
            self.omp_nonuniform,
        ]
        .iter()
        .all(|s| s.unwrap_or(true))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k_hat: f64,
    pub bound_fr_uniform: f64,
    pub bound_omp_uniform: f64,
    pub bound_fr_nonuniform: f64,
    pub bound_omp_nonuniform: Option<f64>,
    pub empirical_ratio_fr: f64,
    pub empirical_ratio_omp: f64,
    pub satisfied: Satisfied,
    pub inputs: BoundInputs,
    /// Ground-set size.
    pub n: usize,
    pub matroid_class: MatroidClass,
    /// `None` when the family is too large to check.
    pub is_matroid: Option<bool>,
    /// `f(OPT) = 0`; both ratios are then 1.
    pub degenerate: bool,
    pub f_fr: f64,
    pub f_omp: f64,
    pub f_opt: f64,
    pub fr_chosen: Vec<usize>,
    pub omp_chosen: Vec<usize>,
    pub opt_chosen: Vec<usize>,
    pub curvature: CurvatureReport,
}

/// Runs FR, OMP, and the exhaustive oracle and checks the bounds for the
/// instance's matroid class. `k` defaults to the matroid's rank cap; for a
/// uniform matroid a different `k` replaces it.
pub fn verify_bounds(
    inst: &Instance,
    k: Option<usize>,
    config: &CurvatureConfig,
) -> Result<BoundReport> {
    let k = k.unwrap_or_else(|| inst.matroid().rank_cap());
    if k == 0 {
        return Err(Error::InvalidConfig(
            "cardinality bound K must be at least 1".into(),
        ));
    }
    let resized;
    let inst = if inst.matroid().is_uniform() && inst.matroid().rank_cap() != k {
        resized = inst.with_matroid(MatroidSpec::uniform(k, inst.len())?)?;
        &resized
    } else {
        inst
    };
    let matroid_class = if inst.matroid().is_uniform() {
        MatroidClass::Uniform
    } else {
        MatroidClass::NonUniform
    };
    let is_matroid = match inst.matroid().kind() {
        MatroidKind::Explicit { .. } => inst
            .matroid()
            .validate_axioms()
            .ok()
            .map(|r| r.is_matroid()),
        _ => Some(true),
    };

    let curvature = curvature_report(inst, k, config)?;
    let opt = brute_force_optimal(inst)?;
    let fr = forward_regression(inst);
    let om = omp(inst);

    let degenerate = opt.objective <= TIE_TOL * inst.eta().norm_sq().max(1.0);
    let ratio = |f: f64| if degenerate { 1.0 } else { f / opt.objective };
    let (ratio_fr, ratio_omp) = (ratio(fr.objective), ratio(om.objective));

    let (kf, kb, ko, phi) = (
        curvature.kappa_fwd,
        curvature.kappa_bwd,
        curvature.kappa_omp,
        curvature.phi,
    );
    let fr_u = bound_fr_uniform(k, kf, kb);
    let omp_u = bound_omp_uniform(k, kf, kb, phi);
    let fr_n = bound_fr_nonuniform(k, kf, kb);
    let omp_n = bound_omp_nonuniform(k, kf, kb, ko, phi);

    let holds = |r: f64, bound: f64| r >= bound - SATISFY_TOL;
    let satisfied = match matroid_class {
        MatroidClass::Uniform => Satisfied {
            fr_uniform: Some(holds(ratio_fr, fr_u)),
            omp_uniform: Some(holds(ratio_omp, omp_u)),
            ..Satisfied::default()
        },
        MatroidClass::NonUniform => Satisfied {
            fr_nonuniform: Some(holds(ratio_fr, fr_n)),
            omp_nonuniform: omp_n.map(|bound| holds(ratio_omp, bound)),
            ..Satisfied::default()
        },
    };

    Ok(BoundReport {
        k_hat: k_hat(k, kf, kb),
        bound_fr_uniform: fr_u,
        bound_omp_uniform: omp_u,
        bound_fr_nonuniform: fr_n,
        bound_omp_nonuniform: omp_n,
        empirical_ratio_fr: ratio_fr,
        empirical_ratio_omp: ratio_omp,
        satisfied,
        inputs: BoundInputs {
            k,
            kappa_fwd: kf,
            kappa_bwd: kb,
            kappa_omp: ko,
            phi,
        },
        n: inst.len(),
        matroid_class,
        is_matroid,
        degenerate,
        f_fr: fr.objective,
        f_omp: om.objective,
        f_opt: opt.objective,
        fr_chosen: fr.chosen,
        omp_chosen: om.chosen,
        opt_chosen: opt.chosen,
        curvature,
    })
}
