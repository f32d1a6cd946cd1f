//! The flat Born/collapse rules and the three routes to the detection
//! distribution: sequential (measure piece by piece with collapse, evolving
//! between hyperplane-extension cuts), parallel (joint measurement of the
//! commuting pulled-back projectors), and the curved Born distribution
//! evaluated directly on the target cut.

use std::collections::BTreeMap;

use rand::Rng;

use super::plan::{DetectionPlan, PlanContext};
use super::{DetectionError, OutcomeDistribution, DEAD_BRANCH_TOL, OPERATOR_TOL};
use crate::config::{compatible, ConfigSet, Configuration, OutcomeMatrix, OutcomeVector, SiteSet};
use crate::lattice::StateVector;

/// One branch of a binary detection: outcome, its probability, and the
/// collapsed normalized state (absent for dead branches).
#[derive(Clone, Debug)]
pub struct MeasureBranch {
    pub outcome: bool,
    pub prob: f64,
    pub state: Option<StateVector>,
}

/// Flat Born rule plus flat collapse rule for one detector region on a
/// hyperplane cut: outcome 1 with probability ‖P(∃B)ψ‖², collapse to the
/// renormalized projection.
pub fn flat_measure(psi: &StateVector, b: SiteSet) -> [MeasureBranch; 2] {
    let exists = ConfigSet::Exists(b);
    let (hit, w1) = psi.apply_projector(&exists);
    let (miss, w0) = psi.apply_projector(&exists.clone().complement());
    let mk = |outcome: bool, prob: f64, state: StateVector| MeasureBranch {
        outcome,
        prob,
        state: (prob > DEAD_BRANCH_TOL).then(|| state.normalized()),
    };
    [mk(true, w1, hit), mk(false, w0, miss)]
}

/// One completed branch of the sequential process.
#[derive(Clone, Debug)]
pub struct SequentialBranch {
    /// Outcome rows in canonical (ascending piece) order.
    pub s: OutcomeMatrix,
    pub prob: f64,
    /// Post-measurement state evolved to the target cut.
    pub state: StateVector,
}

#[derive(Clone, Debug)]
pub struct SequentialOutcome {
    pub dist_s: BTreeMap<OutcomeMatrix, f64>,
    pub dist_l: OutcomeDistribution,
    pub branches: Vec<SequentialBranch>,
}

impl SequentialOutcome {
    /// Coarse post-measurement ensemble: the branches compatible with the
    /// click vector L, with their conditional weights (summing to 1). The
    /// per-s branches themselves are the fine-grained ensemble.
    pub fn ensemble_for(&self, l: OutcomeVector) -> Vec<(f64, &SequentialBranch)> {
        let total: f64 = self
            .branches
            .iter()
            .filter(|b| compatible(&b.s, l))
            .map(|b| b.prob)
            .sum();
        if total <= DEAD_BRANCH_TOL {
            return Vec::new();
        }
        self.branches
            .iter()
            .filter(|b| compatible(&b.s, l))
            .map(|b| (b.prob / total, b))
            .collect()
    }
}

struct OpenBranch {
    prob: f64,
    state: StateVector,
    outcomes: Vec<OutcomeVector>, // in traversal order
}

/// Runs the sequential detection process in the given piece order (indices
/// into the canonical relevant-piece list; defaults to ascending order).
/// Branch enumeration is exact; zero-probability branches are dead.
pub fn sequential_process(
    plan: &DetectionPlan,
    order: Option<&[usize]>,
) -> Result<SequentialOutcome, DetectionError> {
    let ctx = plan.validate()?;
    let k_count = ctx.relevant.len();
    let default_order: Vec<usize> = (0..k_count).collect();
    let order: Vec<usize> = match order {
        None => default_order,
        Some(o) => {
            let mut sorted = o.to_vec();
            sorted.sort_unstable();
            if sorted != default_order {
                return Err(DetectionError::InvalidPlan(format!(
                    "piece order {o:?} is not a permutation of 0..{k_count}"
                )));
            }
            o.to_vec()
        }
    };

    let mut open = vec![OpenBranch {
        prob: 1.0,
        state: plan.initial_state.clone(),
        outcomes: Vec::new(),
    }];
    let mut current_cut = plan.initial_cut.clone();
    for &i in &order {
        let e_k = &ctx.extensions[i];
        for branch in &mut open {
            branch.state = branch.state.evolve(&plan.circuit, &current_cut, e_k)?;
        }
        current_cut = e_k.clone();
        let mut next = Vec::with_capacity(open.len());
        for branch in open {
            let mut partial: Vec<(f64, StateVector, u32)> = vec![(branch.prob, branch.state, 0u32)];
            for ell in 0..ctx.r {
                let b_kl = ctx.b[i][ell];
                let mut grown = Vec::with_capacity(partial.len() * 2);
                for (prob, state, bits) in partial {
                    if b_kl.is_empty() {
                        // Nothing to detect: outcome 0 with certainty.
                        grown.push((prob, state, bits));
                        continue;
                    }
                    for m in flat_measure(&state, b_kl) {
                        if let Some(collapsed) = m.state {
                            grown.push((
                                prob * m.prob,
                                collapsed,
                                bits | (u32::from(m.outcome) << ell),
                            ));
                        }
                    }
                }
                partial = grown;
            }
            for (prob, state, bits) in partial {
                if prob <= DEAD_BRANCH_TOL {
                    continue;
                }
                let mut outcomes = branch.outcomes.clone();
                outcomes.push(OutcomeVector::new(bits, ctx.r));
                next.push(OpenBranch {
                    prob,
                    state,
                    outcomes,
                });
            }
        }
        open = next;
    }

    let mut dist_s = BTreeMap::new();
    let mut dist_l = OutcomeDistribution::new(ctx.r);
    let mut branches = Vec::with_capacity(open.len());
    for branch in open {
        let state = branch
            .state
            .evolve(&plan.circuit, &current_cut, &plan.target_cut)?;
        // Re-sort outcome rows from traversal order into canonical order.
        let mut rows = vec![OutcomeVector::new(0, ctx.r); k_count];
        for (pos, &i) in order.iter().enumerate() {
            rows[i] = branch.outcomes[pos];
        }
        let s = OutcomeMatrix::new(rows);
        *dist_s.entry(s.clone()).or_insert(0.0) += branch.prob;
        branches.push(SequentialBranch {
            s,
            prob: branch.prob,
            state,
        });
    }
    for (s, &p) in &dist_s {
        for l in OutcomeVector::all(ctx.r) {
            if compatible(s, l) {
                dist_l.add(l, p);
            }
        }
    }
    Ok(SequentialOutcome {
        dist_s,
        dist_l,
        branches,
    })
}

#[derive(Clone, Debug)]
pub struct ParallelOutcome {
    pub dist_s: BTreeMap<OutcomeMatrix, f64>,
    pub dist_l: OutcomeDistribution,
    /// Largest commutator residual observed among sampled pairs of
    /// pulled-back detection projectors.
    pub commutation_residual: f64,
}

/// Applies the pulled-back projector of detector (piece i, region ℓ): evolve
/// to the piece's extension cut, project onto ∃(B_{kℓ}), evolve back.
fn pulled_back(
    plan: &DetectionPlan,
    ctx: &PlanContext,
    i: usize,
    ell: usize,
    psi: &StateVector,
) -> Result<StateVector, DetectionError> {
    let e_k = &ctx.extensions[i];
    let on_e = psi.evolve(&plan.circuit, &plan.target_cut, e_k)?;
    let (projected, _) = on_e.apply_projector(&ConfigSet::Exists(ctx.b[i][ell]));
    Ok(projected.evolve(&plan.circuit, e_k, &plan.target_cut)?)
}

/// Runs the parallel detection process: verifies that the pulled-back
/// detection projectors commute (errors beyond 1e−10), then measures them
/// jointly; the joint eigenspace of outcome matrix s is the diagonal
/// projector onto ⋂ₖ M_{kΥ}(s_k).
pub fn parallel_process(
    plan: &DetectionPlan,
    probe_rng: &mut impl Rng,
) -> Result<ParallelOutcome, DetectionError> {
    let ctx = plan.validate()?;
    let psi_target =
        plan.initial_state
            .evolve(&plan.circuit, &plan.initial_cut, &plan.target_cut)?;

    // Commutation probe over distinct detector pairs on random states.
    let mut detectors = Vec::new();
    for i in 0..ctx.relevant.len() {
        for ell in 0..ctx.r {
            if !ctx.b[i][ell].is_empty() {
                detectors.push((i, ell));
            }
        }
    }
    let mut commutation_residual = 0.0f64;
    let probes = 3usize.min(detectors.len());
    for _ in 0..probes {
        let a = detectors[probe_rng.gen_range(0..detectors.len())];
        let b = detectors[probe_rng.gen_range(0..detectors.len())];
        if a == b {
            continue;
        }
        let psi = StateVector::random(plan.circuit.num_sites(), probe_rng);
        let ab = pulled_back(
            plan,
            &ctx,
            b.0,
            b.1,
            &pulled_back(plan, &ctx, a.0, a.1, &psi)?,
        )?;
        let ba = pulled_back(
            plan,
            &ctx,
            a.0,
            a.1,
            &pulled_back(plan, &ctx, b.0, b.1, &psi)?,
        )?;
        commutation_residual = commutation_residual.max(ab.distance(&ba));
    }
    if commutation_residual > OPERATOR_TOL {
        return Err(DetectionError::Commutation {
            residual: commutation_residual,
        });
    }

    // Joint measurement: classify each configuration by its outcome matrix
    // and accumulate |Ψ_Υ(q)|².
    let mut dist_s: BTreeMap<OutcomeMatrix, f64> = BTreeMap::new();
    let mut dist_l = OutcomeDistribution::new(ctx.r);
    let n = plan.circuit.num_sites();
    for q in 0..(1usize << n) {
        let w = psi_target.amplitude(Configuration(q as u32)).norm_sqr();
        if w == 0.0 {
            continue;
        }
        let rows: Vec<OutcomeVector> = (0..ctx.relevant.len())
            .map(|i| {
                let mut bits = 0u32;
                for ell in 0..ctx.r {
                    if q as u32 & ctx.b[i][ell].0 != 0 {
                        bits |= 1 << ell;
                    }
                }
                OutcomeVector::new(bits, ctx.r)
            })
            .collect();
        *dist_s.entry(OutcomeMatrix::new(rows)).or_insert(0.0) += w;
    }
    for (s, &p) in &dist_s {
        for l in OutcomeVector::all(ctx.r) {
            if compatible(s, l) {
                dist_l.add(l, p);
            }
        }
    }
    Ok(ParallelOutcome {
        dist_s,
        dist_l,
        commutation_residual,
    })
}

/// The curved Born distribution on the target cut: evolve there and read
/// ‖P(M_P(L))Ψ‖² for every L.
pub fn curved_born(plan: &DetectionPlan) -> Result<OutcomeDistribution, DetectionError> {
    plan.validate()?;
    let psi = plan
        .initial_state
        .evolve(&plan.circuit, &plan.initial_cut, &plan.target_cut)?;
    let r = plan.regions.len();
    let mut dist = OutcomeDistribution::new(r);
    for (q, amp) in psi.amplitudes().iter().enumerate() {
        let w = amp.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let mut bits = 0u32;
        for (ell, region) in plan.regions.iter().enumerate() {
            if q as u32 & region.0 != 0 {
                bits |= 1 << ell;
            }
        }
        dist.add(OutcomeVector::new(bits, r), w);
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{GateCircuit, GateKind, LatticeCut};
    use num_complex::Complex64;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn bell_pair() -> StateVector {
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = vec![Complex64::ZERO; 4];
        amps[0b01] = inv;
        amps[0b10] = inv;
        StateVector::from_amplitudes(2, amps).unwrap()
    }

    #[test]
    fn flat_measure_on_vacuum_never_clicks() {
        let psi = StateVector::vacuum(4);
        let [hit, miss] = flat_measure(&psi, SiteSet::from_sites(&[1, 2]));
        assert_eq!(hit.prob, 0.0);
        assert!(hit.state.is_none());
        assert!((miss.prob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_measure_splits_bell_pair_evenly() {
        let [hit, miss] = flat_measure(&bell_pair(), SiteSet::from_sites(&[0]));
        assert!((hit.prob - 0.5).abs() < 1e-14);
        assert!((miss.prob - 0.5).abs() < 1e-14);
        let hit_state = hit.state.unwrap();
        assert!((hit_state.amplitude(Configuration(0b01)).re - 1.0).abs() < 1e-14);
        // Collapse is idempotent.
        let [again, _] = flat_measure(&hit_state, SiteSet::from_sites(&[0]));
        assert!((again.prob - 1.0).abs() < 1e-14);
    }

    fn identity_plan() -> DetectionPlan {
        let circuit = GateCircuit::new(2, 1, vec![vec![GateKind::Identity]]).unwrap();
        DetectionPlan {
            circuit,
            initial_cut: LatticeCut::constant(2, 0),
            initial_state: bell_pair(),
            target_cut: LatticeCut::constant(2, 0),
            regions: vec![SiteSet::from_sites(&[0])],
        }
    }

    #[test]
    fn identity_circuit_sequential_detects_half_the_time() {
        let out = sequential_process(&identity_plan(), None).unwrap();
        let l1 = OutcomeVector::from_bools(&[true]);
        assert!((out.dist_l.prob(l1) - 0.5).abs() < 1e-12);
        out.dist_l.check_normalized().unwrap();
    }

    #[test]
    fn identity_circuit_parallel_matches_sequential() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let seq = sequential_process(&identity_plan(), None).unwrap();
        let par = parallel_process(&identity_plan(), &mut rng).unwrap();
        assert!(seq.dist_l.max_abs_diff(&par.dist_l) < 1e-14);
    }

    fn staircase_plan(seed: u64) -> DetectionPlan {
        let circuit = GateCircuit::random(8, 6, seed).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed + 1);
        DetectionPlan {
            circuit,
            initial_cut: LatticeCut::constant(8, 0),
            initial_state: StateVector::random_fixed_number(8, 2, &mut rng),
            target_cut: LatticeCut::from_levels(vec![2, 1, 1, 2, 2, 1, 1, 2]),
            regions: vec![SiteSet::from_sites(&[1, 2]), SiteSet::from_sites(&[4])],
        }
    }

    #[test]
    fn sequential_total_probability_is_one() {
        let out = sequential_process(&staircase_plan(41), None).unwrap();
        let t: f64 = out.dist_s.values().sum();
        assert!((t - 1.0).abs() < 1e-10, "total {t}");
        out.dist_l.check_normalized().unwrap();
    }

    #[test]
    fn sequential_is_order_invariant() {
        let plan = staircase_plan(43);
        let ctx = plan.validate().unwrap();
        let k = ctx.relevant.len();
        let forward: Vec<usize> = (0..k).collect();
        let reverse: Vec<usize> = (0..k).rev().collect();
        let a = sequential_process(&plan, Some(&forward)).unwrap();
        let b = sequential_process(&plan, Some(&reverse)).unwrap();
        for (s, p) in &a.dist_s {
            assert!((p - b.dist_s.get(s).copied().unwrap_or(0.0)).abs() < 1e-10);
        }
        assert!(a.dist_l.max_abs_diff(&b.dist_l) < 1e-10);
    }

    #[test]
    fn three_routes_agree() {
        let plan = staircase_plan(47);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let seq = sequential_process(&plan, None).unwrap();
        let par = parallel_process(&plan, &mut rng).unwrap();
        let born = curved_born(&plan).unwrap();
        assert!(seq.dist_l.max_abs_diff(&par.dist_l) < 1e-10);
        assert!(seq.dist_l.max_abs_diff(&born) < 1e-10);
        for (s, p) in &seq.dist_s {
            let q = par.dist_s.get(s).copied().unwrap_or(0.0);
            assert!((p - q).abs() < 1e-10, "s={} {p} vs {q}", s.label());
        }
    }

    #[test]
    fn curved_born_on_basis_state_is_deterministic() {
        let mut plan = identity_plan();
        plan.initial_state = StateVector::basis(2, Configuration(0b01));
        let born = curved_born(&plan).unwrap();
        assert!((born.prob(OutcomeVector::from_bools(&[true])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collapse_consistency_with_conditional_remeasurement() {
        // Condition on the first piece's outcome; the surviving branch state
        // must reproduce the conditional distribution when re-measured.
        let plan = staircase_plan(53);
        let ctx = plan.validate().unwrap();
        let out = sequential_process(&plan, None).unwrap();
        for branch in &out.branches {
            // Re-measure the same detectors on the branch state (pulled back
            // onto each extension): every previous outcome must recur with
            // probability 1.
            let mut state = branch.state.clone();
            let mut cut = plan.target_cut.clone();
            for (i, _k) in ctx.relevant.iter().enumerate() {
                let e_k = &ctx.extensions[i];
                state = state.evolve(&plan.circuit, &cut, e_k).unwrap();
                cut = e_k.clone();
                for ell in 0..ctx.r {
                    if ctx.b[i][ell].is_empty() {
                        continue;
                    }
                    let [hit, miss] = flat_measure(&state, ctx.b[i][ell]);
                    let expect_hit = branch.s.get(i, ell);
                    let p = if expect_hit { hit.prob } else { miss.prob };
                    assert!((p - 1.0).abs() < 1e-10, "outcome must be reproducible");
                    state = if expect_hit {
                        hit.state.unwrap()
                    } else {
                        miss.state.unwrap()
                    };
                }
            }
        }
    }

    #[test]
    fn joint_piece_distribution_equals_one_projector() {
        // Measuring the r detectors of one piece sequentially with collapse
        // gives the same joint law as a single projection onto the piece's
        // compatibility set.
        use crate::config::make_m_piece;
        let plan = staircase_plan(61);
        let ctx = plan.validate().unwrap();
        let i = 0usize;
        let e_k = &ctx.extensions[i];
        let psi = plan
            .initial_state
            .evolve(&plan.circuit, &plan.initial_cut, e_k)
            .unwrap();
        let scope = ctx.pieces[ctx.relevant[i]].site_set();
        for s_bits in 0..(1u32 << ctx.r) {
            let s_k = OutcomeVector::new(s_bits, ctx.r);
            // Sequential route.
            let mut prob = 1.0;
            let mut state = psi.clone();
            let mut dead = false;
            for ell in 0..ctx.r {
                if ctx.b[i][ell].is_empty() {
                    if s_k.get(ell) {
                        dead = true;
                    }
                    continue;
                }
                let [hit, miss] = flat_measure(&state, ctx.b[i][ell]);
                let m = if s_k.get(ell) { hit } else { miss };
                prob *= m.prob;
                match m.state {
                    Some(next) => state = next,
                    None => {
                        dead = true;
                        break;
                    }
                }
            }
            let sequential = if dead { 0.0 } else { prob };
            // Joint projector route.
            let m = make_m_piece(s_k, &ctx.b[i], scope).unwrap();
            let joint = psi.apply_projector(&m).1;
            assert!(
                (sequential - joint).abs() < 1e-12,
                "s_k={}: {sequential} vs {joint}",
                s_k.label()
            );
        }
    }

    #[test]
    fn coarse_ensemble_weights_are_conditional_probabilities() {
        let plan = staircase_plan(59);
        let out = sequential_process(&plan, None).unwrap();
        for l in OutcomeVector::all(2) {
            let ensemble = out.ensemble_for(l);
            let p_l = out.dist_l.prob(l);
            if p_l < 1e-12 {
                assert!(ensemble.is_empty());
                continue;
            }
            let total: f64 = ensemble.iter().map(|(w, _)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (w, branch) in &ensemble {
                assert!((w - branch.prob / p_l).abs() < 1e-12);
                assert!(compatible(&branch.s, l));
            }
        }
    }
}
