//! One runner per experiment mode. Every runner re-asserts the library
//! invariants it touches and reports them as checks in the summary.

use anyhow::{bail, Context, Result};
use serde_json::json;

use cauchyborn_core::config::{OutcomeVector, SiteSet};
use cauchyborn_core::detection::{
    chi_square_fit, convergence_experiment, curved_born, parallel_process, sample_sequential,
    sequential_process, DetectionPlan,
};
use cauchyborn_core::geometry::{
    boost_band_report, build_triangulation, is_in_future, uniform_distance, TriangularSurface,
};
use cauchyborn_core::lattice::{check_il, check_pl, LatticeError};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::config::{build_surface, ExperimentConfig};
use crate::output::{Check, RunArtifacts};

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn run_geometry_approx(
    config: &ExperimentConfig,
    seed: u64,
    _tol: f64,
) -> Result<RunArtifacts> {
    let section = config
        .geometry
        .as_ref()
        .context("geometry-approx mode needs a `geometry` section")?;
    let sigma = build_surface(
        &section.surface,
        &section.domain,
        section.resolution,
        seed,
        &config.base_dir,
    )?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut results = Vec::new();
    let mut prev: Option<TriangularSurface> = None;
    for n in section.level_min..=section.level_max {
        let tri = build_triangulation(&sigma, n)?;
        let bound = 3.0 * 3f64.powi(-(n as i32));
        let distance = uniform_distance(&tri, &sigma)?;
        let cauchy = tri.is_cauchy();
        let below = is_in_future(&sigma, &tri)?;
        let rising = match &prev {
            Some(p) => is_in_future(&tri, p)?,
            None => true,
        };
        let pass = cauchy && below && rising && distance < bound;
        rows.push(vec![
            n.to_string(),
            fmt(distance),
            fmt(bound),
            cauchy.to_string(),
            rising.to_string(),
            pass.to_string(),
        ]);
        results.push(json!({
            "n": n,
            "uniform_distance": distance,
            "bound": bound,
            "is_cauchy": cauchy,
            "rising": rising,
            "simplices": tri.simplices().len(),
        }));
        checks.push(Check::new(
            format!("approximation-level-{n}"),
            "triangulation-approximation",
            pass,
            (distance - bound).max(0.0),
        ));
        prev = Some(tri);
    }
    Ok(RunArtifacts {
        header: [
            "n",
            "uniform_distance",
            "bound",
            "is_cauchy",
            "rising",
            "pass",
        ]
        .map(String::from)
        .to_vec(),
        rows,
        results: json!({ "levels": results }),
        checks,
    })
}

pub fn run_boost_band(config: &ExperimentConfig, seed: u64, tol: f64) -> Result<RunArtifacts> {
    let section = config
        .boost
        .as_ref()
        .context("boost-band mode needs a `boost` section")?;
    let sigma = build_surface(
        &section.surface,
        &section.domain,
        section.resolution,
        seed,
        &config.base_dir,
    )?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut results = Vec::new();
    for &beta in &section.betas {
        for &eps in &section.epsilons {
            let report = boost_band_report(&sigma, eps, beta, section.samples, tol)?;
            rows.push(vec![
                fmt(beta),
                fmt(eps),
                fmt(report.epsilon_tilde),
                fmt(report.band_excess),
                report.pass.to_string(),
            ]);
            checks.push(Check::new(
                format!("band-beta-{beta}-eps-{eps}"),
                "boost-band",
                report.pass,
                report.band_excess.max(0.0),
            ));
            results.push(serde_json::to_value(&report)?);
        }
    }
    Ok(RunArtifacts {
        header: ["beta", "epsilon", "epsilon_tilde", "band_excess", "pass"]
            .map(String::from)
            .to_vec(),
        rows,
        results: json!({ "bands": results }),
        checks,
    })
}

pub fn run_axiom_check(config: &ExperimentConfig, seed: u64, tol: f64) -> Result<RunArtifacts> {
    let section = config
        .axioms
        .as_ref()
        .context("axiom-check mode needs an `axioms` section")?;
    let circuit = section.circuit.build(&config.base_dir)?;
    let n = circuit.num_sites();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut results = Vec::new();
    for spec in &section.pl {
        let report = check_pl(
            &circuit,
            SiteSet::from_sites(&spec.region),
            &spec.from.build(n),
            &spec.to.build(n),
            section.trials,
            &mut rng,
            tol,
        )?;
        let expected = report.pass != spec.expect_fail;
        rows.push(vec![
            spec.name.clone(),
            "pl".into(),
            fmt(report.max_leakage),
            report.pass.to_string(),
            expected.to_string(),
        ]);
        checks.push(Check::new(
            &spec.name,
            "propagation-locality",
            expected,
            report.max_leakage,
        ));
        results.push(json!({ "name": spec.name, "kind": "pl", "report": report }));
    }
    for spec in &section.il {
        let outcome = check_il(
            &circuit,
            SiteSet::from_sites(&spec.region),
            &spec.from.build(n),
            &spec.to.build(n),
            section.trials,
            &mut rng,
            tol,
        );
        let (passed, rejected, residual, detail) = match outcome {
            Ok(report) => {
                let worst = report
                    .v_unitarity_residual
                    .max(report.product_residual)
                    .max(report.commutation_residual);
                (report.pass, false, worst, serde_json::to_value(&report)?)
            }
            Err(LatticeError::GateTouchesRegion { layer, bond }) => (
                false,
                true,
                f64::INFINITY,
                json!({ "rejected": { "layer": layer, "bond": bond } }),
            ),
            Err(e) => return Err(e.into()),
        };
        let expected = if spec.expect_reject { rejected } else { passed };
        rows.push(vec![
            spec.name.clone(),
            "il".into(),
            fmt(residual),
            passed.to_string(),
            expected.to_string(),
        ]);
        checks.push(Check::new(
            &spec.name,
            "interaction-locality",
            expected,
            if residual.is_finite() { residual } else { -1.0 },
        ));
        results.push(json!({ "name": spec.name, "kind": "il", "report": detail }));
    }
    Ok(RunArtifacts {
        header: ["name", "kind", "residual", "raw_pass", "as_expected"]
            .map(String::from)
            .to_vec(),
        rows,
        results: json!({ "checks": results }),
        checks,
    })
}

fn build_plan(
    section: &crate::config::DetectSection,
    base_dir: &std::path::Path,
    seed: u64,
) -> Result<DetectionPlan> {
    let circuit = section.circuit.build(base_dir)?;
    let n = circuit.num_sites();
    let plan = DetectionPlan {
        initial_cut: section.initial_cut.build(n),
        initial_state: section.state.build(n, seed)?,
        target_cut: section.target_cut.build(n),
        regions: section
            .regions
            .iter()
            .map(|r| SiteSet::from_sites(r))
            .collect(),
        circuit,
    };
    plan.validate()?;
    Ok(plan)
}

pub fn run_detect(config: &ExperimentConfig, seed: u64, tol: f64) -> Result<RunArtifacts> {
    let section = config
        .detect
        .as_ref()
        .context("detect mode needs a `detect` section")?;
    let plan = build_plan(section, &config.base_dir, seed)?;
    let ctx = plan.validate()?;
    let k = ctx.relevant.len();
    let forward: Vec<usize> = (0..k).collect();
    let reverse: Vec<usize> = (0..k).rev().collect();
    let seq = sequential_process(&plan, Some(&forward))?;
    let seq_rev = sequential_process(&plan, Some(&reverse))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x70b0);
    let par = parallel_process(&plan, &mut rng)?;
    let born = curved_born(&plan)?;

    let r = plan.regions.len();
    let mut rows = Vec::new();
    let mut max_delta = 0.0f64;
    for l in OutcomeVector::all(r) {
        let values = [
            seq.dist_l.prob(l),
            seq_rev.dist_l.prob(l),
            par.dist_l.prob(l),
            born.prob(l),
        ];
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        max_delta = max_delta.max(spread);
        rows.push(vec![
            l.label(),
            fmt(values[0]),
            fmt(values[1]),
            fmt(values[2]),
            fmt(values[3]),
            fmt(spread),
        ]);
    }
    let mut checks = vec![
        Check::new(
            "order-invariance",
            "sequential-process",
            seq.dist_l.max_abs_diff(&seq_rev.dist_l) <= tol,
            seq.dist_l.max_abs_diff(&seq_rev.dist_l),
        ),
        Check::new(
            "sequential-vs-parallel",
            "process-equivalence",
            seq.dist_l.max_abs_diff(&par.dist_l) <= tol,
            seq.dist_l.max_abs_diff(&par.dist_l),
        ),
        Check::new(
            "sequential-vs-born",
            "process-equivalence",
            seq.dist_l.max_abs_diff(&born) <= tol,
            seq.dist_l.max_abs_diff(&born),
        ),
        Check::new(
            "normalization",
            "distribution",
            (seq.dist_l.total() - 1.0).abs() <= 1e-9,
            (seq.dist_l.total() - 1.0).abs(),
        ),
        Check::new(
            "projector-commutation",
            "interaction-locality",
            par.commutation_residual <= tol,
            par.commutation_residual,
        ),
    ];

    let dist_s: serde_json::Map<String, serde_json::Value> = seq
        .dist_s
        .iter()
        .map(|(s, p)| (s.label(), json!(p)))
        .collect();
    let mut results = json!({
        "l_distribution": rows.iter().map(|row| json!({
            "l": row[0],
            "sequential": row[1].parse::<f64>().unwrap(),
            "sequential_reversed": row[2].parse::<f64>().unwrap(),
            "parallel": row[3].parse::<f64>().unwrap(),
            "curved_born": row[4].parse::<f64>().unwrap(),
        })).collect::<Vec<_>>(),
        "s_distribution": dist_s,
        "max_delta": max_delta,
    });

    if let Some(shots) = section.shots {
        let mut sample_rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5a5a);
        let counts = sample_sequential(&plan, shots, &mut sample_rng)?;
        let fit = chi_square_fit(&counts, &seq.dist_s, shots as u64);
        checks.push(Check::new(
            "monte-carlo-chi-square",
            "sampling-cross-check",
            fit.p_value > 0.001,
            fit.statistic,
        ));
        results["monte_carlo"] = json!({
            "shots": shots,
            "statistic": fit.statistic,
            "dof": fit.dof,
            "p_value": fit.p_value,
        });
    }

    Ok(RunArtifacts {
        header: [
            "l",
            "p_sequential",
            "p_sequential_reversed",
            "p_parallel",
            "p_curved_born",
            "spread",
        ]
        .map(String::from)
        .to_vec(),
        rows,
        results,
        checks,
    })
}

pub fn run_converge(config: &ExperimentConfig, seed: u64, tol: f64) -> Result<RunArtifacts> {
    let section = config
        .converge
        .as_ref()
        .context("converge mode needs a `converge` section")?;
    let circuit = section.circuit.build(&config.base_dir)?;
    let n = circuit.num_sites();
    let initial = section.initial_cut.build(n);
    let sigma = section.sigma.build(n);
    let upsilons: Vec<_> = section.upsilons.iter().map(|c| c.build(n)).collect();
    if upsilons.is_empty() {
        bail!("converge mode needs at least one approximating cut");
    }
    let state = section.state.build(n, seed)?;
    let regions: Vec<SiteSet> = section
        .regions
        .iter()
        .map(|r| SiteSet::from_sites(r))
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xc040);
    let report = convergence_experiment(
        &circuit,
        &initial,
        &state,
        &sigma,
        &regions,
        &upsilons,
        section.strong_trials,
        &mut rng,
        tol,
    )?;

    let mut rows = Vec::new();
    for step in &report.steps {
        for row in &step.report.rows {
            rows.push(vec![
                step.n.to_string(),
                row.l.clone(),
                fmt(row.p_hat),
                fmt(row.p_approx),
                fmt(row.p_check),
                fmt(row.gap),
            ]);
        }
    }
    let checks = vec![
        Check::new(
            "gap-monotone",
            "squeeze-convergence",
            report.gap_monotone,
            0.0,
        ),
        Check::new(
            "final-gap",
            "squeeze-convergence",
            report.final_max_gap <= tol,
            report.final_max_gap,
        ),
        Check::new(
            "squeeze-bound",
            "squeeze-convergence",
            report.squeeze_bound_ok,
            0.0,
        ),
        Check::new(
            "strong-convergence",
            "projector-limit",
            report.strong_residual <= 1e-8,
            report.strong_residual,
        ),
    ];
    Ok(RunArtifacts {
        header: ["n", "l", "p_hat", "p_b", "p_check", "gap"]
            .map(String::from)
            .to_vec(),
        rows,
        results: serde_json::to_value(&report)?,
        checks,
    })
}
