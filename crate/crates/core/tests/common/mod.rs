//! Shared builders for randomized detection plans used across the
//! integration suites.

use cauchyborn_core::config::SiteSet;
use cauchyborn_core::detection::DetectionPlan;
use cauchyborn_core::lattice::{GateCircuit, LatticeCut, StateVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub struct PlanShape {
    pub num_sites: usize,
    pub depth: usize,
    pub particles: usize,
    pub detectors: usize,
    pub pieces: std::ops::RangeInclusive<usize>,
}

impl Default for PlanShape {
    fn default() -> Self {
        Self {
            num_sites: 10,
            depth: 6,
            particles: 2,
            detectors: 2,
            pieces: 2..=4,
        }
    }
}

/// Deterministically builds a valid randomized plan from a seed: a random
/// brickwork circuit, a random gate-respecting staircase target cut whose
/// piece count lies in the requested range (with every detector-carrying
/// piece extendable), disjoint random detector regions, and a random
/// fixed-particle-number initial state.
pub fn seeded_plan(seed: u64, shape: &PlanShape) -> DetectionPlan {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let circuit = GateCircuit::random(shape.num_sites, shape.depth, seed ^ 0x9e37).unwrap();
    for attempt in 0..20_000u64 {
        let _ = attempt;
        let target = match LatticeCut::random(&circuit, &mut rng, 1, (shape.depth - 1) as u32, 50) {
            Some(cut) => cut,
            None => continue,
        };
        let pieces = target.flat_pieces();
        if !shape.pieces.contains(&pieces.len()) {
            continue;
        }
        let regions = match random_regions(&mut rng, shape.num_sites, shape.detectors) {
            Some(r) => r,
            None => continue,
        };
        let initial_state =
            StateVector::random_fixed_number(shape.num_sites, shape.particles, &mut rng);
        let plan = DetectionPlan {
            circuit: circuit.clone(),
            initial_cut: LatticeCut::constant(shape.num_sites, 0),
            initial_state,
            target_cut: target,
            regions,
        };
        if plan.validate().is_ok() {
            return plan;
        }
    }
    panic!("no valid plan found for seed {seed}");
}

fn random_regions(rng: &mut impl Rng, num_sites: usize, detectors: usize) -> Option<Vec<SiteSet>> {
    let mut free: Vec<usize> = (0..num_sites).collect();
    let mut regions = Vec::with_capacity(detectors);
    for _ in 0..detectors {
        if free.len() < 2 {
            return None;
        }
        let size = rng.gen_range(1..=2.min(free.len()));
        let mut sites = Vec::with_capacity(size);
        for _ in 0..size {
            let i = rng.gen_range(0..free.len());
            sites.push(free.swap_remove(i));
        }
        regions.push(SiteSet::from_sites(&sites));
    }
    Some(regions)
}
