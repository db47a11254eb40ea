//! Batch verification over generated instances.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate_indexed, GeneratorConfig, GeneratorKind};
use crate::bounds::{near_orthogonal_asymptote, verify_bounds, BoundReport, MatroidClass};
use crate::curvature::CurvatureConfig;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Instances per config.
    pub reps: usize,
    pub curvature: CurvatureConfig,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            reps: 1,
            curvature: CurvatureConfig::exact(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub instance_id: usize,
    pub config_index: usize,
    pub rep: usize,
    pub seed: u64,
    pub kind: String,
    pub delta: Option<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    /// `1 / (2 + 2(2K − 1)δ)` for perturbed configs.
    pub asymptote: Option<f64>,
    pub report: Option<BoundReport>,
    pub error: Option<String>,
    pub wall_ms: f64,
}

impl SweepRow {
    /// True when the row has a report and no applicable bound fails.
    pub fn satisfied(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.satisfied.all())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Flat CSV projection of a row. Column order is fixed.
#[derive(Serialize)]
struct CsvRow<'a> {
    instance_id: usize,
    config_index: usize,
    rep: usize,
    seed: u64,
    kind: &'a str,
    delta: Option<f64>,
    #[serde(rename = "K")]
    k: usize,
    n: Option<usize>,
    kappa_fwd: Option<f64>,
    kappa_bwd: Option<f64>,
    kappa_omp: Option<f64>,
    phi: Option<f64>,
    gap: Option<f64>,
    f_fr: Option<f64>,
    f_omp: Option<f64>,
    f_opt: Option<f64>,
    ratio_fr: Option<f64>,
    ratio_omp: Option<f64>,
    k_hat: Option<f64>,
    bound_fr_uniform: Option<f64>,
    bound_omp_uniform: Option<f64>,
    bound_fr_nonuniform: Option<f64>,
    bound_omp_nonuniform: Option<f64>,
    asymptote: Option<f64>,
    matroid_class: Option<&'static str>,
    degenerate: Option<bool>,
    sat_fr_uniform: Option<bool>,
    sat_omp_uniform: Option<bool>,
    sat_fr_nonuniform: Option<bool>,
    sat_omp_nonuniform: Option<bool>,
    satisfied: bool,
    error: Option<&'a str>,
    wall_ms: Option<f64>,
}

impl SweepResult {
    pub fn satisfied_count(&self) -> usize {
        self.rows.iter().filter(|r| r.satisfied()).count()
    }

    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep rows serialize")
    }

    /// Writes one CSV row per instance. With `timings = false` the `wall_ms`
    /// column is left empty so that output is byte-identical across runs.
    pub fn write_csv<W: Write>(&self, out: W, timings: bool) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            let r = row.report.as_ref();
            let class = r.map(|r| match r.matroid_class {
                MatroidClass::Uniform => "uniform",
                MatroidClass::NonUniform => "non_uniform",
            });
            w.serialize(CsvRow {
                instance_id: row.instance_id,
                config_index: row.config_index,
                rep: row.rep,
                seed: row.seed,
                kind: &row.kind,
                delta: row.delta,
                k: row.k,
                n: r.map(|r| r.n),
                kappa_fwd: r.map(|r| r.inputs.kappa_fwd),
                kappa_bwd: r.map(|r| r.inputs.kappa_bwd),
                kappa_omp: r.map(|r| r.inputs.kappa_omp),
                phi: r.map(|r| r.inputs.phi),
                gap: r.map(|r| FRAC_PI_2 - r.inputs.phi),
                f_fr: r.map(|r| r.f_fr),
                f_omp: r.map(|r| r.f_omp),
                f_opt: r.map(|r| r.f_opt),
                ratio_fr: r.map(|r| r.empirical_ratio_fr),
                ratio_omp: r.map(|r| r.empirical_ratio_omp),
                k_hat: r.map(|r| r.k_hat),
                bound_fr_uniform: r.map(|r| r.bound_fr_uniform),
                bound_omp_uniform: r.map(|r| r.bound_omp_uniform),
                bound_fr_nonuniform: r.map(|r| r.bound_fr_nonuniform),
                bound_omp_nonuniform: r.and_then(|r| r.bound_omp_nonuniform),
                asymptote: row.asymptote,
                matroid_class: class,
                degenerate: r.map(|r| r.degenerate),
                sat_fr_uniform: r.and_then(|r| r.satisfied.fr_uniform),
                sat_omp_uniform: r.and_then(|r| r.satisfied.omp_uniform),
                sat_fr_nonuniform: r.and_then(|r| r.satisfied.fr_nonuniform),
                sat_omp_nonuniform: r.and_then(|r| r.satisfied.omp_nonuniform),
                satisfied: row.satisfied(),
                error: row.error.as_deref(),
                wall_ms: timings.then_some(row.wall_ms),
            })?;
        }
        w.flush()
    }

    pub fn to_csv(&self, timings: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, timings)
            .expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

fn run_one(
    config: &GeneratorConfig,
    config_index: usize,
    rep: usize,
    instance_id: usize,
    opts: &SweepOptions,
) -> SweepRow {
    let start = Instant::now();
    let k = config.effective_k();
    let delta = match config.kind {
        GeneratorKind::Perturbed { delta } => Some(delta),
        _ => None,
    };
    let outcome: Result<BoundReport> = generate_indexed(config, rep as u64)
        .and_then(|inst| verify_bounds(&inst, Some(k), &opts.curvature));
    let (report, error) = match outcome {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepRow {
        instance_id,
        config_index,
        rep,
        seed: config.seed,
        kind: config.kind.name().to_string(),
        delta,
        k,
        asymptote: delta.map(|d| near_orthogonal_asymptote(k, d)),
        report,
        error,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Generates `opts.reps` instances per config and verifies each. Rows are
/// evaluated in parallel and returned in `(config, rep)` order; failures are
/// recorded in the row.
pub fn run_sweep(configs: &[GeneratorConfig], opts: &SweepOptions) -> SweepResult {
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..opts.reps).map(move |r| (c, r)))
        .collect();
    let rows = jobs
        .par_iter()
        .enumerate()
        .map(|(id, &(c, r))| run_one(&configs[c], c, r, id, opts))
        .collect();
    SweepResult { rows }
}
