//! Forward regression, orthogonal matching pursuit, and the exhaustive oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, dot, gain_against, OrthoBasis, Vector};
use crate::matroid::{MatroidKind, MatroidSpec, MAX_ENUMERATION_N};

/// Relative tolerance under which two candidate scores count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// A complete problem statement: unit ground vectors, target `η`, and the
/// independence structure over ground indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    ground: Vec<Vector>,
    eta: Vector,
    matroid: MatroidSpec,
    labels: Option<Vec<String>>,
}

/// On-disk instance format. Ground vectors are normalized on load; `η` keeps its scale.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dim: usize,
    pub ground: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    pub matroid: MatroidKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn field_err(field: impl Into<String>, reason: impl ToString) -> Error {
    Error::InvalidInstance {
        field: field.into(),
        reason: reason.to_string(),
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.dim == 0 {
            return Err(field_err("dim", "must be at least 1"));
        }
        let mut ground = Vec::with_capacity(file.ground.len());
        for (i, coords) in file.ground.into_iter().enumerate() {
            let field = format!("ground[{i}]");
            if coords.len() != file.dim {
                return Err(field_err(
                    field,
                    format!("has {} coordinates, dim is {}", coords.len(), file.dim),
                ));
            }
            let v = Vector::new(coords).map_err(|e| field_err(&field, e))?;
            let v = if v.is_unit() {
                v
            } else {
                v.normalize().map_err(|e| field_err(&field, e))?
            };
            ground.push(v);
        }
        if file.eta.len() != file.dim {
            return Err(field_err(
                "eta",
                format!("has {} coordinates, dim is {}", file.eta.len(), file.dim),
            ));
        }
        let eta = Vector::new(file.eta).map_err(|e| field_err("eta", e))?;
        let matroid =
            MatroidSpec::new(file.matroid, ground.len()).map_err(|e| field_err("matroid", e))?;
        Instance::new(ground, eta, matroid, file.labels)
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        InstanceFile {
            dim: inst.dim(),
            ground: inst.ground.into_iter().map(Vector::into_coords).collect(),
            eta: inst.eta.into_coords(),
            matroid: inst.matroid.kind().clone(),
            labels: inst.labels,
        }
    }
}

impl Instance {
    pub fn new(
        ground: Vec<Vector>,
        eta: Vector,
        matroid: MatroidSpec,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let dim = eta.dim();
        for (i, g) in ground.iter().enumerate() {
            if g.dim() != dim {
                return Err(field_err(
                    format!("ground[{i}]"),
                    format!("dimension {} but eta has {dim}", g.dim()),
                ));
            }
            if !g.is_unit() {
                return Err(field_err(
                    format!("ground[{i}]"),
                    format!("norm {} is not 1", g.norm()),
                ));
            }
        }
        if matroid.ground_size() != ground.len() {
            return Err(field_err(
                "matroid",
                format!(
                    "built for {} elements, ground has {}",
                    matroid.ground_size(),
                    ground.len()
                ),
            ));
        }
        if let Some(l) = &labels {
            if l.len() != ground.len() {
                return Err(field_err(
                    "labels",
                    format!("{} labels for {} elements", l.len(), ground.len()),
                ));
            }
        }
        Ok(Self {
            ground,
            eta,
            matroid,
            labels,
        })
    }

    /// Parses instance JSON. Errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            field_err(path, e.into_inner())
        })?;
        Instance::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn ground(&self) -> &[Vector] {
        &self.ground
    }

    pub fn eta(&self) -> &Vector {
        &self.eta
    }

    pub fn matroid(&self) -> &MatroidSpec {
        &self.matroid
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.eta.dim()
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    /// Same instance with a different independence structure.
    pub fn with_matroid(&self, matroid: MatroidSpec) -> Result<Self> {
        Self::new(
            self.ground.clone(),
            self.eta.clone(),
            matroid,
            self.labels.clone(),
        )
    }

    /// `f(E)` for a set of ground indices.
    pub fn objective(&self, set: &[usize]) -> f64 {
        hilbert::project_norm_sq(&self.eta, set.iter().map(|&i| &self.ground[i]))
            .expect("instance dimensions are consistent")
    }

    fn tie_tol(&self) -> f64 {
        TIE_TOL * self.eta.norm_sq().max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    RankCapReached,
    NoFeasibleExtension,
    /// Only with [`SelectOptions::stop_on_zero_gain`].
    ZeroGain,
    /// Exhaustive search finished.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen: Vec<usize>,
    pub step_values: Vec<f64>,
    pub step_gains: Vec<f64>,
    pub objective: f64,
    pub steps_taken: usize,
    pub stopped_reason: StopReason,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectOptions {
    /// OMP residual update `r ← r − 𝒫_η(E)` taken literally instead of `r = η − 𝒫_η(E)`.
    pub literal_residual: bool,
    /// Stop as soon as the best feasible gain is within tolerance of zero.
    pub stop_on_zero_gain: bool,
}

/// Smallest index among candidates whose score is within `tol` of the maximum.
fn pick(scores: &[(usize, f64)], tol: f64) -> Option<(usize, f64)> {
    let best = scores
        .iter()
        .map(|&(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    scores.iter().copied().find(|&(_, s)| s >= best - tol)
}

struct Greedy<'a> {
    inst: &'a Instance,
    basis: OrthoBasis,
    chosen: Vec<usize>,
    step_values: Vec<f64>,
    step_gains: Vec<f64>,
}

impl<'a> Greedy<'a> {
    fn new(inst: &'a Instance) -> Self {
        Self {
            inst,
            basis: OrthoBasis::new(inst.dim()),
            chosen: Vec::new(),
            step_values: Vec::new(),
            step_gains: Vec::new(),
        }
    }

    fn feasible(&self) -> Vec<usize> {
        let m = self.inst.matroid();
        (0..self.inst.len())
            .filter(|i| !self.chosen.contains(i))
            .filter(|&i| m.can_extend(&self.chosen, i).expect("indices in range"))
            .collect()
    }

    fn add(&mut self, i: usize) {
        let eta = self.inst.eta().coords();
        let gain = gain_against(&self.basis, eta, self.inst.ground[i].coords());
        self.basis
            .push(&self.inst.ground[i], i)
            .expect("dimensions checked");
        let value = self.basis.project_norm_sq_raw(eta);
        self.chosen.push(i);
        self.step_gains.push(gain);
        self.step_values.push(value);
    }

    fn finish(self, reason: StopReason) -> SelectionResult {
        SelectionResult {
            objective: self.step_values.last().copied().unwrap_or(0.0),
            steps_taken: self.chosen.len(),
            chosen: self.chosen,
            step_values: self.step_values,
            step_gains: self.step_gains,
            stopped_reason: reason,
        }
    }
}

/// Forward regression: at each step add the feasible element maximizing `f(E ∪ {s})`.
pub fn forward_regression(inst: &Instance) -> SelectionResult {
    forward_regression_with(inst, &SelectOptions::default())
}

pub fn forward_regression_with(inst: &Instance, opts: &SelectOptions) -> SelectionResult {
    let cap = inst.matroid().rank_cap();
    let tol = inst.tie_tol();
    let eta = inst.eta().coords();
    let mut g = Greedy::new(inst);
    while g.chosen.len() < cap {
        let scores: Vec<(usize, f64)> = g
            .feasible()
            .into_iter()
            .map(|i| (i, gain_against(&g.basis, eta, inst.ground[i].coords())))
            .collect();
        let Some((best, gain)) = pick(&scores, tol) else {
            return g.finish(StopReason::NoFeasibleExtension);
        };
        if opts.stop_on_zero_gain && gain <= tol {
            return g.finish(StopReason::ZeroGain);
        }
        g.add(best);
    }
    g.finish(StopReason::RankCapReached)
}

/// Orthogonal matching pursuit: add the feasible element maximizing `|⟨r, s⟩|`, then
/// recompute the residual `r`.
pub fn omp(inst: &Instance) -> SelectionResult {
    omp_with(inst, &SelectOptions::default())
}

pub fn omp_with(inst: &Instance, opts: &SelectOptions) -> SelectionResult {
    let cap = inst.matroid().rank_cap();
    let tol = inst.tie_tol().sqrt();
    let eta = inst.eta().coords();
    let mut residual = eta.to_vec();
    let mut g = Greedy::new(inst);
    while g.chosen.len() < cap {
        let scores: Vec<(usize, f64)> = g
            .feasible()
            .into_iter()
            .map(|i| (i, dot(&residual, inst.ground[i].coords()).abs()))
            .collect();
        let Some((best, score)) = pick(&scores, tol) else {
            return g.finish(StopReason::NoFeasibleExtension);
        };
        if opts.stop_on_zero_gain && score <= tol {
            return g.finish(StopReason::ZeroGain);
        }
        g.add(best);
        let projection: Vec<f64> = {
            let perp = g.basis.residual_raw(eta);
            eta.iter().zip(perp).map(|(e, p)| e - p).collect()
        };
        if opts.literal_residual {
            for (r, p) in residual.iter_mut().zip(&projection) {
                *r -= p;
            }
        } else {
            residual = eta.iter().zip(&projection).map(|(e, p)| e - p).collect();
        }
    }
    g.finish(StopReason::RankCapReached)
}

/// Limits for [`brute_force_optimal`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleGuard {
    pub max_n: usize,
    pub max_rank: usize,
}

impl Default for OracleGuard {
    fn default() -> Self {
        Self {
            max_n: MAX_ENUMERATION_N,
            max_rank: 8,
        }
    }
}

/// Exhaustive maximization of `f` over all independent sets. Returns the first
/// maximizer in enumeration order (size, then lexicographic).
pub fn brute_force_optimal(inst: &Instance) -> Result<SelectionResult> {
    brute_force_optimal_with(inst, &OracleGuard::default())
}

pub fn brute_force_optimal_with(inst: &Instance, guard: &OracleGuard) -> Result<SelectionResult> {
    let m = inst.matroid();
    let is_explicit = matches!(m.kind(), MatroidKind::Explicit { .. });
    if !is_explicit && (inst.len() > guard.max_n || m.rank_cap() > guard.max_rank) {
        return Err(Error::GuardExceeded(format!(
            "brute force over n = {} with rank {} exceeds n <= {} and rank <= {}",
            inst.len(),
            m.rank_cap(),
            guard.max_n,
            guard.max_rank
        )));
    }
    let tol = inst.tie_tol();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for set in m.independent_sets(Some(m.rank_cap()))? {
        let value = inst.objective(&set);
        if best.as_ref().is_none_or(|(_, b)| value > b + tol) {
            best = Some((set, value));
        }
    }
    let (set, _) = best.expect("the empty set is always independent");
    let mut g = Greedy::new(inst);
    for &i in &set {
        g.add(i);
    }
    Ok(g.finish(StopReason::Exhaustive))
}
