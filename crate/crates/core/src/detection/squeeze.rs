//! Squeeze bounds sandwiching both the curved Born probabilities and the
//! approximate detection probabilities between the shrunk- and grown-set
//! distributions, and the convergence experiment driven by them.

use rand::Rng;
use serde::Serialize;

use super::DetectionError;
use crate::config::{make_m_partition, make_squeeze_sets, OutcomeVector, SiteSet};
use crate::lattice::{grow_sites, shrink_sites, GateCircuit, LatticeCut, StateVector};

/// Squeeze data for one outcome vector L.
#[derive(Clone, Debug, Serialize)]
pub struct SqueezeRow {
    pub l: String,
    /// P̂: Born weight of the inner (shrunk) compatibility set on Σ.
    pub p_hat: f64,
    /// Detection probability on the approximating cut Υ.
    pub p_approx: f64,
    /// P̌: Born weight of the outer (grown) compatibility set on Σ.
    pub p_check: f64,
    /// Curved Born probability on Σ.
    pub p_curved: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SqueezeReport {
    pub rows: Vec<SqueezeRow>,
    pub grown: Vec<SiteSet>,
    pub shrunk: Vec<SiteSet>,
    /// Worst violation of the two inequality chains (≤ 0 up to tolerance).
    pub max_violation: f64,
    pub max_gap: f64,
    pub pass: bool,
}

/// Evaluates P̂ ≤ P_B ≤ P̌ and P̂ ≤ P_P ≤ P̌ for every L, where the hatted
/// distributions come from the discrete shrunk/grown sets of the detector
/// regions between the approximating cut and the curved cut.
#[allow(clippy::too_many_arguments)]
pub fn squeeze_bounds(
    circuit: &GateCircuit,
    initial_cut: &LatticeCut,
    initial_state: &StateVector,
    sigma: &LatticeCut,
    upsilon: &LatticeCut,
    regions: &[SiteSet],
    tol: f64,
) -> Result<SqueezeReport, DetectionError> {
    sigma.validate(circuit)?;
    upsilon.validate(circuit)?;
    if !upsilon.is_below(sigma) {
        return Err(DetectionError::InvalidPlan(
            "approximating cut must lie in the past of the curved cut".into(),
        ));
    }
    let r = regions.len();
    let grown: Vec<SiteSet> = regions
        .iter()
        .map(|&b| grow_sites(circuit, upsilon, sigma, b))
        .collect();
    let shrunk: Vec<SiteSet> = regions
        .iter()
        .map(|&b| shrink_sites(circuit, upsilon, sigma, b))
        .collect();
    let psi_sigma = initial_state.evolve(circuit, initial_cut, sigma)?;
    let psi_upsilon = initial_state.evolve(circuit, initial_cut, upsilon)?;

    let mut rows = Vec::new();
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_gap = 0.0f64;
    for l in OutcomeVector::all(r) {
        let (inner, outer) = make_squeeze_sets(regions, &grown, &shrunk, l)?;
        let p_hat = psi_sigma.apply_projector(&inner).1;
        let p_check = psi_sigma.apply_projector(&outer).1;
        let p_curved = psi_sigma.apply_projector(&make_m_partition(regions, l)?).1;
        let p_approx = psi_upsilon
            .apply_projector(&make_m_partition(regions, l)?)
            .1;
        let violation = (p_hat - p_approx)
            .max(p_approx - p_check)
            .max(p_hat - p_curved)
            .max(p_curved - p_check);
        max_violation = max_violation.max(violation);
        let gap = p_check - p_hat;
        max_gap = max_gap.max(gap);
        rows.push(SqueezeRow {
            l: l.label(),
            p_hat,
            p_approx,
            p_check,
            p_curved,
            gap,
        });
        if violation > tol {
            return Err(DetectionError::SqueezeViolation {
                l: l.label(),
                detail: format!(
                    "p_hat={p_hat}, p_approx={p_approx}, p_check={p_check}, p_curved={p_curved}"
                ),
            });
        }
    }
    Ok(SqueezeReport {
        rows,
        grown,
        shrunk,
        max_violation,
        max_gap,
        pass: max_violation <= tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStep {
    pub n: usize,
    pub report: SqueezeReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub steps: Vec<ConvergenceStep>,
    /// Gap per L never increases along the rising cut sequence.
    pub gap_monotone: bool,
    pub final_max_gap: f64,
    /// |P_approx − P_curved| ≤ gap for every step and L.
    pub squeeze_bound_ok: bool,
    /// Worst ‖(U P_Υ(M_B(L)) U† − P_Σ(M_P(L)))Ψ‖ over random probe states
    /// at the final step.
    pub strong_residual: f64,
}

/// Runs the squeeze experiment along a rising sequence of approximating
/// cuts and checks the convergence mechanism: monotone gaps, the squeeze
/// bound on |P_approx − P_curved|, and strong convergence of the conjugated
/// projectors at the final step.
#[allow(clippy::too_many_arguments)]
pub fn convergence_experiment(
    circuit: &GateCircuit,
    initial_cut: &LatticeCut,
    initial_state: &StateVector,
    sigma: &LatticeCut,
    regions: &[SiteSet],
    upsilons: &[LatticeCut],
    strong_trials: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> Result<ConvergenceReport, DetectionError> {
    if upsilons.is_empty() {
        return Err(DetectionError::InvalidPlan("empty cut sequence".into()));
    }
    for w in upsilons.windows(2) {
        if !w[0].is_below(&w[1]) {
            return Err(DetectionError::InvalidPlan(
                "cut sequence must rise towards the curved cut".into(),
            ));
        }
    }
    let mut steps = Vec::new();
    for (n, upsilon) in upsilons.iter().enumerate() {
        let report = squeeze_bounds(
            circuit,
            initial_cut,
            initial_state,
            sigma,
            upsilon,
            regions,
            tol,
        )?;
        steps.push(ConvergenceStep { n: n + 1, report });
    }
    let r = regions.len();
    let mut gap_monotone = true;
    for li in 0..(1usize << r) {
        let mut prev = f64::INFINITY;
        for step in &steps {
            let gap = step.report.rows[li].gap;
            if gap > prev + tol {
                gap_monotone = false;
            }
            prev = gap;
        }
    }
    let squeeze_bound_ok = steps.iter().all(|step| {
        step.report
            .rows
            .iter()
            .all(|row| (row.p_approx - row.p_curved).abs() <= row.gap + tol)
    });
    let final_max_gap = steps.last().unwrap().report.max_gap;

    // Strong-convergence residual at the final step.
    let last = upsilons.last().unwrap();
    let n_sites = circuit.num_sites();
    let mut strong_residual = 0.0f64;
    for _ in 0..strong_trials {
        let psi = StateVector::random(n_sites, rng);
        for l in OutcomeVector::all(r) {
            let m = make_m_partition(regions, l)?;
            let down = psi.evolve(circuit, sigma, last)?;
            let (projected, _) = down.apply_projector(&m);
            let conjugated = projected.evolve(circuit, last, sigma)?;
            let (direct, _) = psi.apply_projector(&m);
            strong_residual = strong_residual.max(conjugated.distance(&direct));
        }
    }
    Ok(ConvergenceReport {
        steps,
        gap_monotone,
        final_max_gap,
        squeeze_bound_ok,
        strong_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn setup() -> (
        GateCircuit,
        LatticeCut,
        StateVector,
        LatticeCut,
        Vec<SiteSet>,
    ) {
        let circuit = GateCircuit::random(10, 6, 61).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let initial = LatticeCut::constant(10, 0);
        let state = StateVector::random_fixed_number(10, 2, &mut rng);
        let sigma = LatticeCut::from_levels(vec![4, 3, 3, 4, 4, 3, 3, 4, 4, 4]);
        let regions = vec![SiteSet::from_sites(&[1, 2]), SiteSet::from_sites(&[5, 6])];
        (circuit, initial, state, sigma, regions)
    }

    #[test]
    fn coincident_cuts_squeeze_exactly() {
        let (circuit, initial, state, sigma, regions) = setup();
        let report =
            squeeze_bounds(&circuit, &initial, &state, &sigma, &sigma, &regions, 1e-10).unwrap();
        assert!(report.pass);
        assert!(report.max_gap < 1e-14);
        for row in &report.rows {
            assert!((row.p_hat - row.p_curved).abs() < 1e-14);
            assert!((row.p_approx - row.p_curved).abs() < 1e-14);
        }
    }

    #[test]
    fn one_layer_gap_keeps_both_chains() {
        let (circuit, initial, state, sigma, regions) = setup();
        let upsilon = sigma.lowered_snapped(&circuit, 1).unwrap();
        let report = squeeze_bounds(
            &circuit, &initial, &state, &sigma, &upsilon, &regions, 1e-10,
        )
        .unwrap();
        assert!(report.pass);
        assert!(report.max_gap >= 0.0);
        let total: f64 = OutcomeVector::all(2)
            .map(|l| {
                report
                    .rows
                    .iter()
                    .find(|row| row.l == l.label())
                    .unwrap()
                    .p_approx
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    // Sigma with a parity-legal valley dug at sites {9, 0}, away from both
    // detector regions; the single crossed gate then touches no detector.
    fn valley_cut(circuit: &GateCircuit, sigma: &LatticeCut) -> LatticeCut {
        let mut levels = sigma.levels().to_vec();
        levels[9] = 3;
        levels[0] = 3;
        let upsilon = LatticeCut::from_levels(levels);
        upsilon.validate(circuit).unwrap();
        assert!(upsilon.is_below(sigma));
        upsilon
    }

    #[test]
    fn gap_vanishes_when_crossed_gates_avoid_detector_cones() {
        let (circuit, initial, state, sigma, regions) = setup();
        let upsilon = valley_cut(&circuit, &sigma);
        let report = squeeze_bounds(
            &circuit, &initial, &state, &sigma, &upsilon, &regions, 1e-10,
        )
        .unwrap();
        assert!(report.max_gap < 1e-14, "gap {}", report.max_gap);
    }

    #[test]
    fn rising_sequence_shrinks_the_gap_monotonically() {
        let (circuit, initial, state, sigma, regions) = setup();
        let upsilons = vec![
            sigma.lowered_snapped(&circuit, 2).unwrap(),
            sigma.lowered_snapped(&circuit, 1).unwrap(),
            valley_cut(&circuit, &sigma),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let report = convergence_experiment(
            &circuit, &initial, &state, &sigma, &regions, &upsilons, 5, &mut rng, 1e-10,
        )
        .unwrap();
        assert!(report.gap_monotone);
        assert!(report.squeeze_bound_ok);
        assert!(
            report.final_max_gap < 1e-12,
            "final gap {}",
            report.final_max_gap
        );
        assert!(
            report.strong_residual < 1e-10,
            "strong residual {}",
            report.strong_residual
        );
    }

    #[test]
    fn single_step_at_sigma_converges_immediately() {
        let (circuit, initial, state, sigma, regions) = setup();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let report = convergence_experiment(
            &circuit,
            &initial,
            &state,
            &sigma,
            &regions,
            &[sigma.clone()],
            3,
            &mut rng,
            1e-10,
        )
        .unwrap();
        assert!(report.final_max_gap < 1e-14);
        assert!(report.strong_residual < 1e-12);
    }
}
