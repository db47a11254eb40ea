//! Seeded instance generators.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curvature::{principal_angle_of, CurvatureConfig};
use crate::error::{Error, Result};
use crate::hilbert::{axpy_neg, dot, OrthoBasis, Vector};
use crate::matroid::{MatroidKind, MatroidSpec};
use crate::selectors::Instance;

const BISECTION_STEPS: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedExample {
    /// Three unit vectors where greedy forward regression is suboptimal.
    FrCounterexample,
    /// Standard basis under the family `{{0},{1},{2},{3},{0,1},{2,3}}`.
    NonuniformCounterexample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `n` orthonormal vectors drawn uniformly from the Stiefel manifold.
    Orthogonal,
    /// Orthonormal vectors each rotated by at most `delta` radians.
    Perturbed { delta: f64 },
    /// Normalized i.i.d. standard normal columns.
    GaussianDictionary,
    NamedExample {
        name: NamedExample,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::Orthogonal => "orthogonal",
            GeneratorKind::Perturbed { .. } => "perturbed",
            GeneratorKind::GaussianDictionary => "gaussian_dictionary",
            GeneratorKind::NamedExample {
                name: NamedExample::FrCounterexample,
                ..
            } => "fr_counterexample",
            GeneratorKind::NamedExample {
                name: NamedExample::NonuniformCounterexample,
                ..
            } => "nonuniform_counterexample",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMode {
    #[default]
    RandomUnit,
    /// Random unit vector in the span of the ground set.
    InSpan,
    Given(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub dim: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default, rename = "K", alias = "k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub eta_mode: EtaMode,
    /// Defaults to `Uniform(K)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matroid: Option<MatroidKind>,
}

impl GeneratorConfig {
    pub fn new(kind: GeneratorKind, dim: usize, n: usize, k: usize, seed: u64) -> Self {
        Self {
            kind,
            dim,
            n,
            k,
            seed,
            eta_mode: EtaMode::RandomUnit,
            matroid: None,
        }
    }

    pub fn named_example(name: NamedExample, epsilon: Option<f64>) -> Self {
        Self::new(GeneratorKind::NamedExample { name, epsilon }, 0, 0, 0, 0)
    }

    pub fn with_matroid(mut self, matroid: MatroidKind) -> Self {
        self.matroid = Some(matroid);
        self
    }

    pub fn with_eta(mut self, eta_mode: EtaMode) -> Self {
        self.eta_mode = eta_mode;
        self
    }

    /// `K` used for curvature and bounds: the configured value, or the
    /// named example's own.
    pub fn effective_k(&self) -> usize {
        match self.kind {
            GeneratorKind::NamedExample {
                name: NamedExample::FrCounterexample,
                ..
            } => 2,
            GeneratorKind::NamedExample {
                name: NamedExample::NonuniformCounterexample,
                ..
            } => 2,
            _ => self.k,
        }
    }

    fn validate(&self) -> Result<()> {
        if matches!(self.kind, GeneratorKind::NamedExample { .. }) {
            return Ok(());
        }
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.dim == 0 || self.n == 0 {
            return bad(format!(
                "dim and n must be positive (dim = {}, n = {})",
                self.dim, self.n
            ));
        }
        if self.k == 0 {
            return bad("K must be at least 1".into());
        }
        match self.kind {
            GeneratorKind::Orthogonal | GeneratorKind::Perturbed { .. } if self.n > self.dim => {
                return bad(format!(
                    "orthogonal ground needs n <= dim (n = {}, dim = {})",
                    self.n, self.dim
                ));
            }
            GeneratorKind::Perturbed { delta }
                if !(delta.is_finite() && (0.0..FRAC_PI_2).contains(&delta)) =>
            {
                return bad(format!("delta must lie in [0, pi/2), got {delta}"));
            }
            _ => {}
        }
        if let EtaMode::Given(c) = &self.eta_mode {
            if c.len() != self.dim {
                return bad(format!(
                    "given eta has {} coordinates, dim is {}",
                    c.len(),
                    self.dim
                ));
            }
        }
        Ok(())
    }
}

/// Instance for stream 0 of the config's seed.
pub fn generate(config: &GeneratorConfig) -> Result<Instance> {
    generate_indexed(config, 0)
}

/// Instance drawn from stream `index` of the config's seed, so that replicate
/// `index` is reproducible on its own.
pub fn generate_indexed(config: &GeneratorConfig, index: u64) -> Result<Instance> {
    config.validate()?;
    if let GeneratorKind::NamedExample { name, epsilon } = config.kind {
        return Ok(match name {
            NamedExample::FrCounterexample => fr_counterexample(),
            NamedExample::NonuniformCounterexample => {
                nonuniform_counterexample(epsilon.unwrap_or(0.1))?
            }
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let (dim, n) = (config.dim, config.n);

    let ground = match config.kind {
        GeneratorKind::Orthogonal => orthonormal(&mut rng, dim, n),
        GeneratorKind::Perturbed { delta } => perturbed(&mut rng, dim, n, config.k, delta)?,
        GeneratorKind::GaussianDictionary => (0..n).map(|_| gaussian_unit(&mut rng, dim)).collect(),
        GeneratorKind::NamedExample { .. } => unreachable!(),
    };

    let eta = match &config.eta_mode {
        EtaMode::RandomUnit => gaussian_unit(&mut rng, dim),
        EtaMode::InSpan => loop {
            let mut c = vec![0.0; dim];
            for g in &ground {
                let w: f64 = rng.sample(StandardNormal);
                axpy_neg(&mut c, -w, g.coords());
            }
            if let Ok(v) = Vector::new(c).and_then(|v| v.normalize()) {
                break v;
            }
        },
        EtaMode::Given(c) => Vector::new(c.clone())?,
    };

    let kind = config
        .matroid
        .clone()
        .unwrap_or(MatroidKind::Uniform { k: config.k });
    let matroid = MatroidSpec::new(kind, n)?;
    Instance::new(ground, eta, matroid, None)
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        if let Ok(v) = Vector::new(gaussian(rng, dim)).and_then(|v| v.normalize()) {
            return v;
        }
    }
}

/// Haar-random orthonormal `n`-frame via Gram–Schmidt on Gaussian draws.
fn orthonormal(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> Vec<Vector> {
    let mut basis = OrthoBasis::new(dim);
    while basis.rank() < n {
        let g = Vector::new(gaussian(rng, dim)).expect("gaussian draws are finite");
        let _ = basis.push(&g, basis.rank());
    }
    basis.vectors().to_vec()
}

/// Unit vector orthogonal to `q`.
fn orthogonal_direction(rng: &mut ChaCha8Rng, q: &Vector) -> Vector {
    loop {
        let mut u = gaussian(rng, q.dim());
        for _ in 0..2 {
            let c = dot(&u, q.coords());
            axpy_neg(&mut u, c, q.coords());
        }
        if let Ok(v) = Vector::new(u).and_then(|v| v.normalize()) {
            return v;
        }
    }
}

fn rotate(q: &Vector, u: &Vector, angle: f64) -> Vector {
    let (s, c) = angle.sin_cos();
    let coords = q
        .coords()
        .iter()
        .zip(u.coords())
        .map(|(a, b)| c * a + s * b)
        .collect();
    Vector::new(coords)
        .and_then(|v| v.normalize())
        .expect("rotation of a unit vector is unit")
}

/// Rotates each orthonormal vector by `scale·delta·Uᵢ` toward a random
/// orthogonal direction. Within the exact-angle guard the scale is bisected so
/// that the exact gap `π/2 − φ` does not exceed `delta`.
fn perturbed(
    rng: &mut ChaCha8Rng,
    dim: usize,
    n: usize,
    k: usize,
    delta: f64,
) -> Result<Vec<Vector>> {
    let base = orthonormal(rng, dim, n);
    if dim == 1 || delta == 0.0 {
        return Ok(base);
    }
    let dirs: Vec<Vector> = base.iter().map(|q| orthogonal_direction(rng, q)).collect();
    let fracs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let build = |scale: f64| -> Vec<Vector> {
        base.iter()
            .zip(&dirs)
            .zip(&fracs)
            .map(|((q, u), f)| rotate(q, u, scale * delta * f))
            .collect()
    };

    let cfg = CurvatureConfig::exact();
    if n > cfg.max_exact_n || k > cfg.max_exact_k {
        return Ok(build(1.0));
    }
    let gap =
        |g: &[Vector]| -> Result<f64> { Ok(FRAC_PI_2 - principal_angle_of(g, k, &cfg)?.value) };
    let full = build(1.0);
    if gap(&full)? <= delta {
        return Ok(full);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if gap(&build(mid))? <= delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(build(lo))
}

/// `s₁ = (|0⟩+|1⟩)/√2`, `s₂ = (|1⟩+|2⟩)/√2`, `s₃ = (|2⟩+|3⟩)/√2`, `η = (1,2,2,1)`, `Uniform(2)`.
pub fn fr_counterexample() -> Instance {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ground = [[h, h, 0.0, 0.0], [0.0, h, h, 0.0], [0.0, 0.0, h, h]]
        .iter()
        .map(|c| Vector::new(c.to_vec()).expect("finite"))
        .collect();
    let eta = Vector::new(vec![1.0, 2.0, 2.0, 1.0]).expect("finite");
    let labels = ["s1", "s2", "s3"].map(String::from).to_vec();
    Instance::new(
        ground,
        eta,
        MatroidSpec::uniform(2, 3).expect("valid"),
        Some(labels),
    )
    .expect("valid")
}

/// Standard basis of `R⁴`, `η = (√(1+ε), 0, 1, 1)`, family `{{0},{1},{2},{3},{0,1},{2,3}}`.
pub fn nonuniform_counterexample(epsilon: f64) -> Result<Instance> {
    if !(epsilon.is_finite() && epsilon >= -1.0) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be finite and >= -1, got {epsilon}"
        )));
    }
    let ground = (0..4).map(|i| Vector::basis(4, i)).collect();
    let eta = Vector::new(vec![(1.0 + epsilon).sqrt(), 0.0, 1.0, 1.0])?;
    let family = vec![vec![0], vec![1], vec![2], vec![3], vec![0, 1], vec![2, 3]];
    let labels = ["e0", "e1", "e2", "e3"].map(String::from).to_vec();
    Instance::new(ground, eta, MatroidSpec::explicit(family, 4)?, Some(labels))
}
