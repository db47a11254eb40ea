//! Elemental curvatures and the principal angle of a ground set.
//!
//! All quantities range over triples `(E, s, t)` with `|E| ≤ 2K − 2` and
//! `s ≠ t` outside `E`. Writing `g(x) = f(E ∪ {x}) − f(E)` and
//! `n(s, t) = f(E ∪ {s, t}) − f(E ∪ {s})`:
//!
//! | quantity | admissible when | ratio |
//! |----------|-----------------|-------|
//! | forward `κ̂` | `g(s) ≤ g(t)` | `n(s, t) / g(t)` |
//! | backward `κ̄` | `g(s) ≥ g(t)` | `n(s, t) / g(s)` |
//! | OMP `κ̃` | `|⟨η⊥(E), s⟩| ≥ |⟨η⊥(E), t⟩|` | `n(s, t) / g(s)` |
//!
//! and `φ = min arccos ‖𝒫_s(E)‖` over pairs `(E, s)`.
//!
//! Triples whose denominator is at most `denom_tol` are skipped and counted.
//! A maximum over an empty admissible set is reported as 0 and flagged vacuous.
//! Exact mode enumerates every subset `E`; sampled mode draws triples from a
//! seeded stream and therefore under-estimates each `κ` and over-estimates `φ`.

use std::f64::consts::FRAC_PI_2;

use itertools::Itertools;
use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{axpy_neg, dot, gain_of_residual, OrthoBasis, Vector};
use crate::selectors::Instance;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const MAX_EXACT_N: usize = 12;
pub const MAX_EXACT_K: usize = 3;
/// Denominator tolerance relative to `‖η‖²`.
pub const DENOM_TOL_REL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureConfig {
    pub mode: CurvatureMode,
    pub denom_tol_rel: f64,
    pub max_exact_n: usize,
    pub max_exact_k: usize,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self::exact()
    }
}

impl CurvatureConfig {
    pub fn exact() -> Self {
        Self {
            mode: CurvatureMode::Exact,
            denom_tol_rel: DENOM_TOL_REL,
            max_exact_n: MAX_EXACT_N,
            max_exact_k: MAX_EXACT_K,
        }
    }

    pub fn sampled(samples: usize, seed: u64) -> Self {
        Self {
            mode: CurvatureMode::Sampled { samples, seed },
            ..Self::exact()
        }
    }

    fn check(&self, n: usize, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidConfig(
                "cardinality bound K must be at least 1".into(),
            ));
        }
        if self.mode == CurvatureMode::Exact && (n > self.max_exact_n || k > self.max_exact_k) {
            return Err(Error::GuardExceeded(format!(
                "exact curvature needs n <= {} and K <= {} (got n = {n}, K = {k}); use sampled mode",
                self.max_exact_n, self.max_exact_k
            )));
        }
        Ok(())
    }
}

/// The configuration attaining a reported extremum; `t` is absent for the angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub subset: Vec<usize>,
    pub s: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    pub kappa_fwd: Option<Witness>,
    pub kappa_bwd: Option<Witness>,
    pub kappa_omp: Option<Witness>,
    pub phi: Option<Witness>,
}

/// Admissible triples dropped for a near-zero denominator (or, for `κ̃`, for `η ∈ span(E)`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub fwd: u64,
    pub bwd: u64,
    pub omp: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub kappa_fwd: f64,
    pub kappa_bwd: f64,
    pub kappa_omp: f64,
    pub phi: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub mode: CurvatureMode,
    pub skipped_pairs: SkipCounts,
    pub witnesses: Witnesses,
    pub denom_tol: f64,
    /// Triples examined.
    pub triples: u64,
    /// Largest `|⟨s⊥, t⊥⟩|` over examined triples where both components exist.
    pub max_perp_inner: f64,
}

impl CurvatureReport {
    pub fn vacuous_fwd(&self) -> bool {
        self.witnesses.kappa_fwd.is_none()
    }

    pub fn vacuous_bwd(&self) -> bool {
        self.witnesses.kappa_bwd.is_none()
    }

    pub fn vacuous_omp(&self) -> bool {
        self.witnesses.kappa_omp.is_none()
    }

    /// `1 / (1 − 2 cos φ)` when meaningful.
    pub fn angle_curvature_bound(&self) -> Option<f64> {
        angle_curvature_bound(self.phi)
    }

    /// `(cos φ + cos² φ) / sin² φ`, the cap on every `|⟨s⊥, t⊥⟩|`.
    pub fn perp_inner_bound(&self) -> f64 {
        let (s, c) = self.phi.sin_cos();
        (c + c * c) / (s * s)
    }

    /// `(sin⁻² φ + ρ)² / (1 − ρ²)` at `ρ = max |⟨s⊥, t⊥⟩|`, the largest value of the
    /// per-pair cap on `κ̃` over the examined pairs.
    pub fn omp_angle_bound(&self) -> f64 {
        let s2 = self.phi.sin().powi(2);
        let rho = self.max_perp_inner;
        (1.0 / s2 + rho).powi(2) / (1.0 - rho * rho)
    }
}

/// `1 / (1 − 2 cos φ)`, or `None` once `cos φ ≥ 1/2` (to within rounding, so
/// that `φ = π/3` is excluded).
pub fn angle_curvature_bound(phi: f64) -> Option<f64> {
    let d = 1.0 - 2.0 * phi.cos();
    (d > BOUNDARY_TOL).then(|| 1.0 / d)
}

const BOUNDARY_TOL: f64 = 1e-12;

/// Data for one element `x ∉ E` relative to `span(E)`.
struct Candidate {
    residual: Vec<f64>,
    perp: Option<Vec<f64>>,
    gain: f64,
    angle: f64,
    eta_perp_dot: f64,
}

/// `span(E)` together with the normalized residual of `η`.
struct Frame<'a> {
    basis: OrthoBasis,
    eta: &'a [f64],
    eta_perp: Option<Vec<f64>>,
}

impl<'a> Frame<'a> {
    fn new(ground: &[Vector], eta: &'a [f64], subset: &[usize]) -> Self {
        let dim = ground.first().map_or(eta.len(), Vector::dim);
        let mut basis = OrthoBasis::new(dim);
        for &i in subset {
            basis
                .push(&ground[i], i)
                .expect("dimensions checked on construction");
        }
        let eta_res = basis.residual_raw(eta);
        let eta_res_norm = dot(&eta_res, &eta_res).sqrt();
        let eta_norm = dot(eta, eta).sqrt();
        let eta_perp = (eta_res_norm > basis.tol_rank() * eta_norm.max(1.0))
            .then(|| eta_res.iter().map(|c| c / eta_res_norm).collect());
        Self {
            basis,
            eta,
            eta_perp,
        }
    }

    fn candidate(&self, x: &Vector) -> Candidate {
        let residual = self.basis.residual_raw(x.coords());
        let rho = dot(&residual, &residual).sqrt();
        let tol = self.basis.tol_rank();
        let perp = (rho > tol).then(|| residual.iter().map(|c| c / rho).collect::<Vec<_>>());
        let gain = gain_of_residual(&residual, self.eta, tol);
        let angle = if self.basis.is_empty() {
            FRAC_PI_2
        } else {
            let p = self.basis.project_norm_sq_raw(x.coords()).sqrt().min(1.0);
            rho.atan2(p)
        };
        let eta_perp_dot = self.eta_perp.as_ref().map_or(0.0, |e| dot(e, x.coords()));
        Candidate {
            residual,
            perp,
            gain,
            angle,
            eta_perp_dot,
        }
    }

    /// `f(E ∪ {s, t}) − f(E ∪ {s})`
    fn second_gain(&self, s: &Candidate, t: &Candidate) -> f64 {
        match &s.perp {
            Some(sp) => {
                let mut w = t.residual.clone();
                for _ in 0..2 {
                    let c = dot(&w, sp);
                    axpy_neg(&mut w, c, sp);
                }
                gain_of_residual(&w, self.eta, self.basis.tol_rank())
            }
            None => t.gain,
        }
    }
}

#[derive(Default)]
struct Extremum {
    value: f64,
    witness: Option<Witness>,
}

impl Extremum {
    fn offer_max(&mut self, value: f64, subset: &[usize], s: usize, t: Option<usize>) {
        if self.witness.is_none() || value > self.value {
            self.set(value, subset, s, t);
        }
    }

    fn offer_min(&mut self, value: f64, subset: &[usize], s: usize) {
        if self.witness.is_none() || value < self.value {
            self.set(value, subset, s, None);
        }
    }

    fn set(&mut self, value: f64, subset: &[usize], s: usize, t: Option<usize>) {
        self.value = value;
        self.witness = Some(Witness {
            subset: subset.to_vec(),
            s,
            t,
            value,
        });
    }
}

struct Scan {
    fwd: Extremum,
    bwd: Extremum,
    omp: Extremum,
    phi: Extremum,
    skipped: SkipCounts,
    triples: u64,
    max_perp_inner: f64,
    denom_tol: f64,
}

impl Scan {
    fn new(denom_tol: f64) -> Self {
        Self {
            fwd: Extremum::default(),
            bwd: Extremum::default(),
            omp: Extremum::default(),
            phi: Extremum {
                value: FRAC_PI_2,
                witness: None,
            },
            skipped: SkipCounts::default(),
            triples: 0,
            max_perp_inner: 0.0,
            denom_tol,
        }
    }

    fn angle(&mut self, subset: &[usize], x: usize, c: &Candidate) {
        self.phi.offer_min(c.angle, subset, x);
    }

    fn triple(
        &mut self,
        frame: &Frame,
        subset: &[usize],
        (s, cs): (usize, &Candidate),
        (t, ct): (usize, &Candidate),
    ) {
        self.triples += 1;
        let numerator = frame.second_gain(cs, ct);
        let tol = self.denom_tol;

        if cs.gain <= ct.gain {
            if ct.gain > tol {
                self.fwd.offer_max(numerator / ct.gain, subset, s, Some(t));
            } else {
                self.skipped.fwd += 1;
            }
        }
        if cs.gain >= ct.gain {
            if cs.gain > tol {
                self.bwd.offer_max(numerator / cs.gain, subset, s, Some(t));
            } else {
                self.skipped.bwd += 1;
            }
        }
        if frame.eta_perp.is_none() {
            self.skipped.omp += 1;
        } else if cs.eta_perp_dot.abs() >= ct.eta_perp_dot.abs() {
            if cs.gain > tol {
                self.omp.offer_max(numerator / cs.gain, subset, s, Some(t));
            } else {
                self.skipped.omp += 1;
            }
        }
        if let (Some(sp), Some(tp)) = (&cs.perp, &ct.perp) {
            self.max_perp_inner = self.max_perp_inner.max(dot(sp, tp).abs());
        }
    }

    fn finish(self, k: usize, mode: CurvatureMode) -> CurvatureReport {
        CurvatureReport {
            kappa_fwd: self.fwd.value,
            kappa_bwd: self.bwd.value,
            kappa_omp: self.omp.value,
            phi: self.phi.value,
            k,
            mode,
            skipped_pairs: self.skipped,
            witnesses: Witnesses {
                kappa_fwd: self.fwd.witness,
                kappa_bwd: self.bwd.witness,
                kappa_omp: self.omp.witness,
                phi: self.phi.witness,
            },
            denom_tol: self.denom_tol,
            triples: self.triples,
            max_perp_inner: self.max_perp_inner,
        }
    }
}

/// Largest admissible `|E|`.
fn max_subset(k: usize) -> usize {
    2 * k - 2
}

/// Computes `κ̂`, `κ̄`, `κ̃`, and `φ` in one pass over the admissible triples.
pub fn curvature_report(
    inst: &Instance,
    k: usize,
    config: &CurvatureConfig,
) -> Result<CurvatureReport> {
    let n = inst.len();
    config.check(n, k)?;
    let ground = inst.ground();
    let eta = inst.eta().coords();
    let mut scan = Scan::new(config.denom_tol_rel * inst.eta().norm_sq());

    match config.mode {
        CurvatureMode::Exact => {
            let max_e = max_subset(k).min(n.saturating_sub(1));
            for size in 0..=max_e {
                for subset in (0..n).combinations(size) {
                    let frame = Frame::new(ground, eta, &subset);
                    let outside: Vec<(usize, Candidate)> = (0..n)
                        .filter(|i| subset.binary_search(i).is_err())
                        .map(|i| (i, frame.candidate(&ground[i])))
                        .collect();
                    for (x, c) in &outside {
                        scan.angle(&subset, *x, c);
                    }
                    for (s, cs) in &outside {
                        for (t, ct) in &outside {
                            if s != t {
                                scan.triple(&frame, &subset, (*s, cs), (*t, ct));
                            }
                        }
                    }
                }
            }
        }
        CurvatureMode::Sampled { samples, seed } => {
            if n >= 2 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let max_e = max_subset(k).min(n - 2);
                for _ in 0..samples {
                    let size = rng.random_range(0..=max_e);
                    let picked = index::sample(&mut rng, n, size + 2).into_vec();
                    let (s, t) = (picked[size], picked[size + 1]);
                    let mut subset = picked[..size].to_vec();
                    subset.sort_unstable();
                    let frame = Frame::new(ground, eta, &subset);
                    let cs = frame.candidate(&ground[s]);
                    let ct = frame.candidate(&ground[t]);
                    scan.angle(&subset, s, &cs);
                    scan.angle(&subset, t, &ct);
                    scan.triple(&frame, &subset, (s, &cs), (t, &ct));
                }
            } else if n == 1 {
                let frame = Frame::new(ground, eta, &[]);
                scan.angle(&[], 0, &frame.candidate(&ground[0]));
            }
        }
    }
    Ok(scan.finish(k, config.mode))
}

pub fn forward_curvature(inst: &Instance, k: usize, config: &CurvatureConfig) -> Result<f64> {
    Ok(curvature_report(inst, k, config)?.kappa_fwd)
}

pub fn backward_curvature(inst: &Instance, k: usize, config: &CurvatureConfig) -> Result<f64> {
    Ok(curvature_report(inst, k, config)?.kappa_bwd)
}

pub fn omp_curvature(inst: &Instance, k: usize, config: &CurvatureConfig) -> Result<f64> {
    Ok(curvature_report(inst, k, config)?.kappa_omp)
}

pub fn principal_angle(inst: &Instance, k: usize, config: &CurvatureConfig) -> Result<f64> {
    Ok(principal_angle_of(inst.ground(), k, config)?.value)
}

/// Principal angle of a bare ground set, with its witness `(E, s)`.
///
/// Cheaper than [`curvature_report`] since no triples are formed.
pub fn principal_angle_of(
    ground: &[Vector],
    k: usize,
    config: &CurvatureConfig,
) -> Result<Witness> {
    let n = ground.len();
    config.check(n, k)?;
    if n == 0 {
        return Ok(Witness {
            subset: Vec::new(),
            s: 0,
            t: None,
            value: FRAC_PI_2,
        });
    }
    let eta = vec![0.0; ground[0].dim()];
    let mut best = Extremum {
        value: FRAC_PI_2,
        witness: None,
    };
    let mut visit = |subset: &[usize], x: usize| {
        let frame = Frame::new(ground, &eta, subset);
        best.offer_min(frame.candidate(&ground[x]).angle, subset, x);
    };
    match config.mode {
        CurvatureMode::Exact => {
            let max_e = max_subset(k).min(n - 1);
            for size in 0..=max_e {
                for subset in (0..n).combinations(size) {
                    let frame = Frame::new(ground, &eta, &subset);
                    for x in (0..n).filter(|i| subset.binary_search(i).is_err()) {
                        best.offer_min(frame.candidate(&ground[x]).angle, &subset, x);
                    }
                }
            }
        }
        CurvatureMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max_e = max_subset(k).min(n - 1);
            for _ in 0..samples {
                let size = rng.random_range(0..=max_e);
                let picked = index::sample(&mut rng, n, size + 1).into_vec();
                let mut subset = picked[..size].to_vec();
                subset.sort_unstable();
                visit(&subset, picked[size]);
            }
        }
    }
    Ok(best.witness.expect("at least one pair (E, s) is visited"))
}

/// Incoherence-based relaxation of `cos φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceStats {
    /// `max_{i≠j} |⟨x_i, x_j⟩|`
    pub mu: f64,
    /// `2K − 2`
    pub m: usize,
    /// Gershgorin lower bound `1 − (m − 1)μ` on `λ_min(HᵀH)`.
    pub lambda_min_bound: f64,
    /// `√m·μ / √(1 − (m − 1)μ)`; `None` when the eigenvalue bound is not positive.
    pub cos_phi_upper: Option<f64>,
}

pub fn coherence_relaxation(inst: &Instance, k: usize) -> CoherenceStats {
    let ground = inst.ground();
    let mut mu = 0.0f64;
    for (i, a) in ground.iter().enumerate() {
        for b in &ground[i + 1..] {
            mu = mu.max(dot(a.coords(), b.coords()).abs());
        }
    }
    let mu = mu.min(1.0);
    let m = max_subset(k.max(1));
    let lambda_min_bound = 1.0 - (m as f64 - 1.0) * mu;
    let cos_phi_upper =
        (lambda_min_bound > 0.0).then(|| (m as f64).sqrt() * mu / lambda_min_bound.sqrt());
    CoherenceStats {
        mu,
        m,
        lambda_min_bound,
        cos_phi_upper,
    }
}
