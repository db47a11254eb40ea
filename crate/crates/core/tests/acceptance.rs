//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any fails.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use projsel::bounds::{
    bound_fr_nonuniform, bound_omp_nonuniform, near_orthogonal_asymptote, verify_bounds,
    BoundReport,
};
use projsel::curvature::{angle_curvature_bound, curvature_report, CurvatureConfig};
use projsel::harness::{
    fr_counterexample, generate_indexed, nonuniform_counterexample, run_sweep, GeneratorConfig,
    GeneratorKind, SweepOptions,
};
use projsel::hilbert::{marginal_gain, OrthoBasis, Vector};
use projsel::matroid::{Axiom, MatroidKind};
use projsel::selectors::{brute_force_optimal, forward_regression, omp, Instance};

const TOL: f64 = 1e-9;
const PROPERTY_CASES: u32 = 500;

type Outcome = Result<String, String>;

struct Gate {
    failed: usize,
}

impl Gate {
    fn run(&mut self, id: u32, name: &str, limit: Duration, body: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = body();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !ok {
            self.failed += 1;
        }
        println!(
            "[{}] {id:>2} {name}: {detail} ({:.2} s, limit {} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn partition(blocks: &[&[usize]]) -> MatroidKind {
    MatroidKind::Partition {
        blocks: blocks.iter().map(|b| b.to_vec()).collect(),
        caps: vec![1; blocks.len()],
    }
}

/// 100 instances on 8 elements in `R⁸`: half perturbed orthonormal frames with
/// gap budgets spread over `[0, 0.4]`, half normalized Gaussian dictionaries.
fn curvature_batch(matroid: MatroidKind, seed: u64) -> Vec<Instance> {
    (0..100u64)
        .map(|i| {
            let kind = if i % 2 == 0 {
                GeneratorKind::Perturbed {
                    delta: 0.4 * (i / 2) as f64 / 49.0,
                }
            } else {
                GeneratorKind::GaussianDictionary
            };
            let cfg = GeneratorConfig::new(kind, 8, 8, 3, seed).with_matroid(matroid.clone());
            generate_indexed(&cfg, i).expect("valid config")
        })
        .collect()
}

fn verify_batch(batch: &[Instance]) -> Result<Vec<BoundReport>, String> {
    batch
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            verify_bounds(inst, Some(3), &CurvatureConfig::exact())
                .map_err(|e| format!("instance {i}: {e}"))
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let inst = fr_counterexample();
    let opt = brute_force_optimal(&inst).map_err(|e| e.to_string())?;
    let fr = forward_regression(&inst);
    ensure((opt.objective - 9.0).abs() <= TOL, || {
        format!("OPT = {}", opt.objective)
    })?;
    ensure((fr.objective - (8.0 + 2.0 / 3.0)).abs() <= TOL, || {
        format!("FR = {}", fr.objective)
    })?;
    Ok(format!(
        "OPT = {:.12}, FR = {:.12}",
        opt.objective, fr.objective
    ))
}

fn criterion_2() -> Outcome {
    let inst = nonuniform_counterexample(0.1).map_err(|e| e.to_string())?;
    let opt = brute_force_optimal(&inst).map_err(|e| e.to_string())?;
    let fr = forward_regression(&inst);
    let ratio = fr.objective / opt.objective;
    ensure((fr.objective - 1.1).abs() <= TOL, || {
        format!("FR = {}", fr.objective)
    })?;
    ensure((opt.objective - 2.0).abs() <= TOL, || {
        format!("OPT = {}", opt.objective)
    })?;
    ensure((ratio - 0.55).abs() <= TOL && ratio >= 0.5, || {
        format!("ratio = {ratio}")
    })?;
    Ok(format!(
        "FR = {:.12}, OPT = {:.12}, ratio = {ratio:.12}",
        fr.objective, opt.objective
    ))
}

fn criterion_3() -> Outcome {
    let cfg = GeneratorConfig::new(GeneratorKind::Orthogonal, 12, 12, 4, 3);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let inst = generate_indexed(&cfg, i).map_err(|e| e.to_string())?;
        let opt = brute_force_optimal(&inst)
            .map_err(|e| e.to_string())?
            .objective;
        let fr = forward_regression(&inst).objective;
        let om = omp(&inst).objective;
        let gap = (fr - opt).abs().max((om - opt).abs());
        ensure(gap <= TOL, || {
            format!("instance {i}: FR {fr}, OMP {om}, OPT {opt}")
        })?;
        worst = worst.max(gap);
    }
    Ok(format!(
        "200/200 with f(FR) = f(OMP) = f(OPT), max deviation {worst:.2e}"
    ))
}

fn criterion_4() -> Outcome {
    let m = partition(&[&[0, 1, 2], &[3, 4, 5], &[6, 7, 8], &[9, 10, 11]]);
    let cfg = GeneratorConfig::new(GeneratorKind::Orthogonal, 12, 12, 4, 4).with_matroid(m);
    let mut min_ratio = f64::INFINITY;
    for i in 0..200 {
        let inst = generate_indexed(&cfg, i).map_err(|e| e.to_string())?;
        let opt = brute_force_optimal(&inst)
            .map_err(|e| e.to_string())?
            .objective;
        let fr = forward_regression(&inst);
        let om = omp(&inst);
        let ratio = fr.objective / opt;
        ensure(ratio >= 0.5 - TOL, || {
            format!("instance {i}: ratio {ratio}")
        })?;
        ensure(fr.chosen == om.chosen, || {
            format!("instance {i}: FR {:?} vs OMP {:?}", fr.chosen, om.chosen)
        })?;
        min_ratio = min_ratio.min(ratio);
    }
    Ok(format!(
        "200/200 with FR = OMP sets, min f(FR)/f(OPT) = {min_ratio:.6}"
    ))
}

fn criterion_5(reports: &[BoundReport]) -> Outcome {
    let mut slack = f64::INFINITY;
    for (i, r) in reports.iter().enumerate() {
        ensure(r.empirical_ratio_fr >= r.bound_fr_uniform - TOL, || {
            format!(
                "instance {i}: FR ratio {} < bound {}",
                r.empirical_ratio_fr, r.bound_fr_uniform
            )
        })?;
        ensure(r.empirical_ratio_omp >= r.bound_omp_uniform - TOL, || {
            format!(
                "instance {i}: OMP ratio {} < bound {}",
                r.empirical_ratio_omp, r.bound_omp_uniform
            )
        })?;
        slack = slack
            .min(r.empirical_ratio_fr - r.bound_fr_uniform)
            .min(r.empirical_ratio_omp - r.bound_omp_uniform);
    }
    Ok(format!(
        "{}/{} instances satisfy both bounds, min slack {slack:.4}",
        reports.len(),
        reports.len()
    ))
}

fn criterion_6(reports: &[BoundReport]) -> Outcome {
    let mut slack = f64::INFINITY;
    for (i, r) in reports.iter().enumerate() {
        let inp = r.inputs;
        let fr_b = bound_fr_nonuniform(inp.k, inp.kappa_fwd, inp.kappa_bwd);
        ensure(r.empirical_ratio_fr >= fr_b - TOL, || {
            format!(
                "instance {i}: FR ratio {} < bound {fr_b}",
                r.empirical_ratio_fr
            )
        })?;
        let omp_b =
            bound_omp_nonuniform(inp.k, inp.kappa_fwd, inp.kappa_bwd, inp.kappa_omp, inp.phi)
                .ok_or_else(|| format!("instance {i}: phi = 0"))?;
        ensure(r.empirical_ratio_omp >= omp_b - TOL, || {
            format!(
                "instance {i}: OMP ratio {} < bound {omp_b}",
                r.empirical_ratio_omp
            )
        })?;
        slack = slack
            .min(r.empirical_ratio_fr - fr_b)
            .min(r.empirical_ratio_omp - omp_b);
    }
    Ok(format!(
        "{}/{} instances satisfy both bounds, min slack {slack:.4}",
        reports.len(),
        reports.len()
    ))
}

fn criterion_7(reports: &[&BoundReport]) -> Outcome {
    let mut applicable = 0;
    for (i, r) in reports.iter().enumerate() {
        let c = &r.curvature;
        if let Some(bound) = angle_curvature_bound(c.phi) {
            applicable += 1;
            let kmax = c.kappa_fwd.max(c.kappa_bwd);
            ensure(kmax <= bound + TOL, || {
                format!("instance {i}: max kappa {kmax} > {bound}")
            })?;
        }
        let pair = c.perp_inner_bound();
        ensure(c.max_perp_inner <= pair + TOL, || {
            format!(
                "instance {i}: |<s_perp, t_perp>| = {} > {pair}",
                c.max_perp_inner
            )
        })?;
    }
    ensure(applicable > 0, || "no instance with cos(phi) < 1/2".into())?;
    Ok(format!(
        "curvature bound checked on {applicable}/{} instances with cos(phi) < 1/2; pairwise inequality on all",
        reports.len()
    ))
}

fn unit_vectors(dim: usize, count: usize) -> impl Strategy<Value = Vec<Vector>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), count).prop_filter_map(
        "near-zero draw",
        |rows| {
            rows.into_iter()
                .map(|r| {
                    Vector::new(r)
                        .ok()
                        .and_then(|v| (v.norm() > 1e-3).then(|| v.normalize().unwrap()))
                })
                .collect()
        },
    )
}

fn runner(seed: u8) -> TestRunner {
    let config = Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(
        config,
        proptest::test_runner::TestRng::from_seed(
            proptest::test_runner::RngAlgorithm::ChaCha,
            &[seed; 32],
        ),
    )
}

fn prop_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `‖A(AᵀA)⁺Aᵀη‖²` by SVD least squares.
fn lstsq_projection(cols: &[&Vector], eta: &Vector) -> f64 {
    if cols.is_empty() {
        return 0.0;
    }
    let dim = eta.dim();
    let a = DMatrix::from_fn(dim, cols.len(), |r, c| cols[c].coords()[r]);
    let b = DVector::from_column_slice(eta.coords());
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-10)
        .expect("svd solve");
    (a * x).norm_squared()
}

fn criterion_8() -> Outcome {
    let mut counts = Vec::new();

    // f(S) ≤ f(T) for S ⊆ T
    let strat = (
        unit_vectors(6, 8),
        prop::collection::vec(-2.0f64..2.0, 6),
        prop::collection::vec(0u8..3, 8),
    );
    runner(1)
        .run(&strat, |(ground, eta, tags)| {
            let eta = Vector::new(eta).unwrap();
            let t: Vec<&Vector> = ground
                .iter()
                .zip(&tags)
                .filter(|(_, &g)| g > 0)
                .map(|(v, _)| v)
                .collect();
            let s: Vec<&Vector> = ground
                .iter()
                .zip(&tags)
                .filter(|(_, &g)| g > 1)
                .map(|(v, _)| v)
                .collect();
            let fs = projsel::hilbert::project_norm_sq(&eta, s.iter().copied()).unwrap();
            let ft = projsel::hilbert::project_norm_sq(&eta, t.iter().copied()).unwrap();
            prop_assert!(fs <= ft + 1e-12, "f(S) = {fs} > f(T) = {ft}");
            prop_assert!(ft <= eta.norm_sq() + 1e-9);
            Ok(())
        })
        .map_err(prop_err)?;
    counts.push("monotonicity");

    // f(E ∪ {s}) − f(E) = ⟨η, s⊥⟩²
    let strat = (unit_vectors(7, 5), prop::collection::vec(-2.0f64..2.0, 7));
    runner(2)
        .run(&strat, |(ground, eta)| {
            let eta = Vector::new(eta).unwrap();
            let (e, s) = ground.split_at(4);
            let s = &s[0];
            let basis = OrthoBasis::from_elements(7, e).unwrap();
            let before = basis.project_norm_sq(&eta).unwrap();
            let after = projsel::hilbert::project_norm_sq(&eta, ground.iter()).unwrap();
            let gain = marginal_gain(&eta, e, s).unwrap();
            let w = basis.residual(s).unwrap();
            let direct = if w.norm() > 1e-9 {
                eta.inner(&w).unwrap().powi(2) / w.norm_sq()
            } else {
                0.0
            };
            prop_assert!(
                (after - before - gain).abs() <= TOL,
                "{after} - {before} != {gain}"
            );
            prop_assert!((gain - direct).abs() <= TOL);
            Ok(())
        })
        .map_err(prop_err)?;
    counts.push("Pythagoras gain identity");

    // orthonormality over 50 extensions
    let strat = unit_vectors(64, 50);
    runner(3)
        .run(&strat, |vs| {
            let mut basis = OrthoBasis::new(64);
            for (i, v) in vs.iter().enumerate() {
                let _ = basis.push(v, i);
            }
            let (off, diag) = basis.orthonormality_error();
            prop_assert!(off <= 1e-10 && diag <= 1e-10, "offdiag {off}, diag {diag}");
            Ok(())
        })
        .map_err(prop_err)?;
    counts.push("orthonormality");

    // least-squares equivalence
    let strat = (unit_vectors(8, 5), prop::collection::vec(-3.0f64..3.0, 8));
    runner(4)
        .run(&strat, |(ground, eta)| {
            let eta = Vector::new(eta).unwrap();
            let ours = projsel::hilbert::project_norm_sq(&eta, ground.iter()).unwrap();
            let cols: Vec<&Vector> = ground.iter().collect();
            let theirs = lstsq_projection(&cols, &eta);
            prop_assert!((ours - theirs).abs() <= TOL, "{ours} vs {theirs}");
            Ok(())
        })
        .map_err(prop_err)?;
    counts.push("least squares");

    // rotated orthonormal ground: κ̂ = 1, φ = π/2; κ̄ = κ̃ = 1 once two gains tie
    let strat = (any::<u64>(), 3usize..6, 1usize..3, any::<bool>());
    runner(5)
        .run(&strat, |(seed, n, k, tie)| {
            let dim = n + 1;
            let cfg = GeneratorConfig::new(GeneratorKind::Orthogonal, dim, n, k, seed);
            let mut inst = generate_indexed(&cfg, 0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
            if tie {
                w[1] = w[0];
            }
            let mut eta = vec![0.0; dim];
            for (g, c) in inst.ground().iter().zip(&w) {
                for (e, x) in eta.iter_mut().zip(g.coords()) {
                    *e += c * x;
                }
            }
            inst = Instance::new(
                inst.ground().to_vec(),
                Vector::new(eta).unwrap(),
                inst.matroid().clone(),
                None,
            )
            .unwrap();
            let r = curvature_report(&inst, k, &CurvatureConfig::exact()).unwrap();
            // gains are w², so κ̄ = κ̃ = max w_t²/w_s² over w_s ≥ w_t, s ≠ t
            let mut sorted = w.iter().map(|c| c * c).collect::<Vec<_>>();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let expect = sorted.windows(2).map(|p| p[1] / p[0]).fold(0.0, f64::max);
            prop_assert!(
                (r.kappa_fwd - 1.0).abs() <= TOL,
                "kappa_fwd {}",
                r.kappa_fwd
            );
            prop_assert!((r.phi - FRAC_PI_2).abs() <= TOL, "phi {}", r.phi);
            prop_assert!(
                (r.kappa_bwd - expect).abs() <= TOL,
                "kappa_bwd {} vs {expect}",
                r.kappa_bwd
            );
            prop_assert!(
                (r.kappa_omp - expect).abs() <= TOL,
                "kappa_omp {} vs {expect}",
                r.kappa_omp
            );
            if tie {
                prop_assert!((r.kappa_bwd - 1.0).abs() <= TOL && (r.kappa_omp - 1.0).abs() <= TOL);
            }
            Ok(())
        })
        .map_err(|e: proptest::test_runner::TestError<_>| e.to_string())?;
    counts.push("orthonormal curvature");

    Ok(format!(
        "{} properties x {PROPERTY_CASES} cases: {}",
        counts.len(),
        counts.join(", ")
    ))
}

fn criterion_9() -> Outcome {
    let inst = nonuniform_counterexample(0.1).map_err(|e| e.to_string())?;
    let report = inst
        .matroid()
        .validate_axioms()
        .map_err(|e| e.to_string())?;
    ensure(report.hereditary_ok, || "hereditary flagged".into())?;
    ensure(!report.augmentation_ok, || {
        "augmentation not flagged".into()
    })?;
    let cx = report.counterexample.clone().ok_or("no witness")?;
    ensure(
        cx.axiom == Axiom::Augmentation && cx.smaller == vec![0] && cx.larger == vec![2, 3],
        || format!("witness {cx:?}"),
    )?;
    Ok(format!(
        "augmentation fails with S = {:?}, T = {:?}: {}",
        cx.smaller,
        cx.larger,
        report.label()
    ))
}

fn criterion_10() -> Outcome {
    let deltas = [0.0, 0.02, 0.04, 0.06, 0.08, 0.10];
    let part = partition(&[&[0, 1, 2], &[3, 4, 5], &[6, 7]]);
    let configs: Vec<GeneratorConfig> = deltas
        .iter()
        .flat_map(|&d| {
            let base = GeneratorConfig::new(GeneratorKind::Perturbed { delta: d }, 8, 8, 3, 10);
            [base.clone(), base.with_matroid(part.clone())]
        })
        .collect();
    let res = run_sweep(
        &configs,
        &SweepOptions {
            reps: 20,
            ..Default::default()
        },
    );
    ensure(res.error_count() == 0, || {
        format!("{} rows errored", res.error_count())
    })?;
    let mut lines = Vec::new();
    for (i, &d) in deltas.iter().enumerate() {
        let rows: Vec<_> = res
            .rows
            .iter()
            .filter(|r| r.config_index / 2 == i)
            .collect();
        for r in &rows {
            ensure(r.satisfied(), || {
                format!("delta {d}, row {}: bound violated", r.instance_id)
            })?;
            ensure(r.asymptote == Some(near_orthogonal_asymptote(3, d)), || {
                "asymptote missing".into()
            })?;
        }
        let min_ratio = rows
            .iter()
            .filter_map(|r| r.report.as_ref())
            .map(|r| r.empirical_ratio_fr.min(r.empirical_ratio_omp))
            .fold(f64::INFINITY, f64::min);
        lines.push(format!(
            "d={d:.2}: min ratio {min_ratio:.4} vs {:.4}",
            near_orthogonal_asymptote(3, d)
        ));
    }
    println!("     {}", lines.join("; "));
    Ok(format!(
        "{}/{} rows satisfy every applicable bound",
        res.satisfied_count(),
        res.rows.len()
    ))
}

fn main() -> ExitCode {
    let mut gate = Gate { failed: 0 };
    let s = Duration::from_secs;
    gate.run(
        1,
        "golden forward-regression counterexample",
        s(1),
        criterion_1,
    );
    gate.run(
        2,
        "golden non-uniform family counterexample",
        s(1),
        criterion_2,
    );
    gate.run(
        3,
        "orthogonal ground, uniform matroid optimality",
        s(30),
        criterion_3,
    );
    gate.run(
        4,
        "orthogonal ground, partition matroid half-approximation",
        s(60),
        criterion_4,
    );

    let mut uniform = Vec::new();
    let mut part = Vec::new();
    gate.run(5, "uniform-matroid curvature bounds", s(600), || {
        uniform = verify_batch(&curvature_batch(MatroidKind::Uniform { k: 3 }, 5))?;
        criterion_5(&uniform)
    });
    gate.run(6, "non-uniform matroid curvature bounds", s(600), || {
        part = verify_batch(&curvature_batch(
            partition(&[&[0, 1, 2], &[3, 4, 5], &[6, 7]]),
            6,
        ))?;
        criterion_6(&part)
    });
    gate.run(
        7,
        "principal-angle curvature bound and pairwise inequality",
        s(600),
        || {
            let all: Vec<&BoundReport> = uniform.iter().chain(&part).collect();
            ensure(all.len() == 200, || {
                format!("only {} instances from criteria 5 and 6", all.len())
            })?;
            criterion_7(&all)
        },
    );
    gate.run(8, "property suite", s(60), criterion_8);
    gate.run(9, "axiom checker on the explicit family", s(1), criterion_9);
    gate.run(10, "principal-angle gap sweep", s(600), criterion_10);

    if gate.failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", gate.failed);
        ExitCode::FAILURE
    }
}
