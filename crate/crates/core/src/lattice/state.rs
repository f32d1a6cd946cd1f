//! Dense state vectors over the occupation basis of a cut, unitary
//! evolution between cuts, diagonal projectors and bipartite factorization.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::circuit::GateCircuit;
use super::cut::LatticeCut;
use super::gate::Gate;
use super::{LatticeError, NORM_TOL};
use crate::config::{ConfigSet, Configuration, SiteSet, MAX_SITES};

/// Normalized amplitude vector indexed by occupation bitmask; bit s set
/// means site s is occupied.
#[derive(Clone, Debug)]
pub struct StateVector {
    num_sites: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn vacuum(num_sites: usize) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << num_sites];
        amps[0] = Complex64::ONE;
        Self { num_sites, amps }
    }

    pub fn basis(num_sites: usize, config: Configuration) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << num_sites];
        amps[config.0 as usize] = Complex64::ONE;
        Self { num_sites, amps }
    }

    pub fn from_amplitudes(num_sites: usize, amps: Vec<Complex64>) -> Result<Self, LatticeError> {
        if num_sites > MAX_SITES {
            return Err(LatticeError::BadSiteCount(num_sites));
        }
        if amps.len() != 1 << num_sites {
            return Err(LatticeError::StateMismatch(format!(
                "{} amplitudes for {num_sites} sites",
                amps.len()
            )));
        }
        let mut state = Self { num_sites, amps };
        let n = state.norm();
        if n == 0.0 {
            return Err(LatticeError::StateMismatch("zero state".into()));
        }
        state.scale(1.0 / n);
        Ok(state)
    }

    /// Random normalized state supported on configurations inside `support`
    /// (all particles within the region; the vacuum component included).
    pub fn random_in_region(num_sites: usize, support: SiteSet, rng: &mut impl Rng) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << num_sites];
        for (q, amp) in amps.iter_mut().enumerate() {
            if SiteSet(q as u32).is_subset_of(support) {
                *amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let mut state = Self { num_sites, amps };
        state.scale(1.0 / state.norm());
        state
    }

    pub fn random(num_sites: usize, rng: &mut impl Rng) -> Self {
        Self::random_in_region(num_sites, SiteSet::full(num_sites), rng)
    }

    /// Random normalized state in the m-particle sector.
    pub fn random_fixed_number(num_sites: usize, particles: usize, rng: &mut impl Rng) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << num_sites];
        for (q, amp) in amps.iter_mut().enumerate() {
            if (q as u32).count_ones() as usize == particles {
                *amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let mut state = Self { num_sites, amps };
        state.scale(1.0 / state.norm());
        state
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, q: Configuration) -> Complex64 {
        self.amps[q.0 as usize]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < NORM_TOL
    }

    fn scale(&mut self, f: f64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        self.scale(1.0 / n);
        self
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Weight of configurations outside `allowed` (support leakage).
    pub fn weight_outside(&self, allowed: SiteSet) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(q, _)| !SiteSet(*q as u32).is_subset_of(allowed))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Applies a two-site gate on sites (a, b), basis order |n_a n_b⟩.
    pub fn apply_gate(&mut self, gate: &Gate, a: usize, b: usize) {
        debug_assert!(a != b && a < self.num_sites && b < self.num_sites);
        let bit_a = 1usize << a;
        let bit_b = 1usize << b;
        for base in 0..self.amps.len() {
            if base & bit_a != 0 || base & bit_b != 0 {
                continue;
            }
            let i00 = base;
            let i01 = base | bit_b;
            let i10 = base | bit_a;
            let i11 = base | bit_a | bit_b;
            let v = [
                self.amps[i00],
                self.amps[i01],
                self.amps[i10],
                self.amps[i11],
            ];
            for (row, &idx) in [i00, i01, i10, i11].iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for (col, &vc) in v.iter().enumerate() {
                    acc += gate.m[row][col] * vc;
                }
                self.amps[idx] = acc;
            }
        }
    }

    /// Unitary evolution from cut `from` to cut `to`: un-applies the gates
    /// below `from` but not below the pointwise-minimum cut (adjoint,
    /// descending layers), then applies the gates up to `to` (ascending).
    /// Result is independent of any other causally consistent order.
    pub fn evolve(
        &self,
        circuit: &GateCircuit,
        from: &LatticeCut,
        to: &LatticeCut,
    ) -> Result<StateVector, LatticeError> {
        from.validate(circuit)?;
        to.validate(circuit)?;
        if self.amps.len() != 1 << circuit.num_sites() {
            return Err(LatticeError::StateMismatch(
                "state dimension does not match circuit".into(),
            ));
        }
        let mut out = self.clone();
        for crossed in from.gates_between(circuit, to) {
            let gate = circuit
                .gate_at(crossed.layer, crossed.bond)
                .expect("crossed gate exists");
            let (a, b) = circuit.bond_sites(crossed.bond);
            if crossed.forward {
                out.apply_gate(gate, a, b);
            } else {
                out.apply_gate(&gate.adjoint(), a, b);
            }
        }
        Ok(out)
    }

    /// Projects onto a configuration set, returning the unnormalized state
    /// and the kept weight ‖Pψ‖².
    pub fn apply_projector(&self, set: &ConfigSet) -> (StateVector, f64) {
        let mut out = self.clone();
        let mut weight = 0.0;
        for (q, amp) in out.amps.iter_mut().enumerate() {
            if set.contains(Configuration(q as u32), self.num_sites) {
                weight += amp.norm_sqr();
            } else {
                *amp = Complex64::ZERO;
            }
        }
        (out, weight)
    }

    /// Occupation-number weights per particle count.
    pub fn sector_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.num_sites + 1];
        for (q, a) in self.amps.iter().enumerate() {
            w[(q as u32).count_ones() as usize] += a.norm_sqr();
        }
        w
    }

    /// Bipartite reindexing of the amplitudes into (configuration on A) ×
    /// (configuration on the complement).
    pub fn factorize(&self, a: SiteSet) -> BipartiteView {
        BipartiteView::new(self, a)
    }
}

/// Diagonal projector defined by a configuration set on a cut.
#[derive(Clone, Debug)]
pub struct Projector {
    pub set: ConfigSet,
}

impl Projector {
    pub fn new(set: ConfigSet) -> Self {
        Self { set }
    }

    pub fn apply(&self, psi: &StateVector) -> (StateVector, f64) {
        psi.apply_projector(&self.set)
    }
}

/// Basis reindexing ℋ = ℋ_A ⊗ ℋ_{Aᶜ}: row index runs over configurations
/// of the A sites (in increasing site order), column index over the rest.
#[derive(Clone, Debug)]
pub struct BipartiteView {
    pub a_sites: Vec<usize>,
    pub b_sites: Vec<usize>,
    pub num_sites: usize,
    /// Row-major: amps[row * cols + col].
    pub amps: Vec<Complex64>,
}

impl BipartiteView {
    fn new(psi: &StateVector, a: SiteSet) -> Self {
        let num_sites = psi.num_sites();
        let a_sites: Vec<usize> = (0..num_sites).filter(|&s| a.contains(s)).collect();
        let b_sites: Vec<usize> = (0..num_sites).filter(|&s| !a.contains(s)).collect();
        let rows = 1usize << a_sites.len();
        let cols = 1usize << b_sites.len();
        let mut amps = vec![Complex64::ZERO; rows * cols];
        for (q, &amp) in psi.amplitudes().iter().enumerate() {
            let (row, col) = split_index(q, &a_sites, &b_sites);
            amps[row * cols + col] = amp;
        }
        Self {
            a_sites,
            b_sites,
            num_sites,
            amps,
        }
    }

    pub fn rows(&self) -> usize {
        1 << self.a_sites.len()
    }

    pub fn cols(&self) -> usize {
        1 << self.b_sites.len()
    }

    pub fn amp(&self, row: usize, col: usize) -> Complex64 {
        self.amps[row * self.cols() + col]
    }

    /// The full-cut configuration with A-part `row` and complement `col`.
    pub fn join_index(&self, row: usize, col: usize) -> usize {
        let mut q = 0usize;
        for (i, &s) in self.a_sites.iter().enumerate() {
            if row >> i & 1 == 1 {
                q |= 1 << s;
            }
        }
        for (i, &s) in self.b_sites.iter().enumerate() {
            if col >> i & 1 == 1 {
                q |= 1 << s;
            }
        }
        q
    }

    /// Inverse reindexing back to a state on the full cut.
    pub fn into_state(self) -> StateVector {
        let mut amps = vec![Complex64::ZERO; 1 << self.num_sites];
        let cols = self.cols();
        for row in 0..self.rows() {
            for col in 0..cols {
                amps[self.join_index(row, col)] = self.amps[row * cols + col];
            }
        }
        StateVector {
            num_sites: self.num_sites,
            amps,
        }
    }
}

/// Splits a configuration bitmask into (A-part, complement-part) indices.
pub fn split_index(q: usize, a_sites: &[usize], b_sites: &[usize]) -> (usize, usize) {
    let mut row = 0usize;
    for (i, &s) in a_sites.iter().enumerate() {
        if q >> s & 1 == 1 {
            row |= 1 << i;
        }
    }
    let mut col = 0usize;
    for (i, &s) in b_sites.iter().enumerate() {
        if q >> s & 1 == 1 {
            col |= 1 << i;
        }
    }
    (row, col)
}

/// On-disk state description: list of (configuration bitmask, amplitude).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateSpec {
    pub num_sites: usize,
    pub amplitudes: Vec<StateAmp>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateAmp {
    pub config: u32,
    pub re: f64,
    pub im: f64,
}

impl StateSpec {
    pub fn build(&self) -> Result<StateVector, LatticeError> {
        let mut amps = vec![Complex64::ZERO; 1usize << self.num_sites];
        for entry in &self.amplitudes {
            let idx = entry.config as usize;
            if idx >= amps.len() {
                return Err(LatticeError::StateMismatch(format!(
                    "configuration {:#b} out of range for {} sites",
                    entry.config, self.num_sites
                )));
            }
            amps[idx] = Complex64::new(entry.re, entry.im);
        }
        StateVector::from_amplitudes(self.num_sites, amps)
    }

    pub fn from_state(state: &StateVector, cutoff: f64) -> Self {
        Self {
            num_sites: state.num_sites(),
            amplitudes: state
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > cutoff)
                .map(|(q, a)| StateAmp {
                    config: q as u32,
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn bell_pair() -> StateVector {
        // (|01⟩ + |10⟩)/√2 on two sites: configs {1} and {0}.
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = vec![Complex64::ZERO; 4];
        amps[0b01] = inv; // site 0 occupied
        amps[0b10] = inv; // site 1 occupied
        StateVector::from_amplitudes(2, amps).unwrap()
    }

    #[test]
    fn evolve_to_same_cut_is_identity() {
        let c = GateCircuit::random(8, 6, 11).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let psi = StateVector::random(8, &mut rng);
        let cut = LatticeCut::from_levels(vec![2, 1, 1, 2, 2, 1, 1, 2]);
        let out = psi.evolve(&c, &cut, &cut).unwrap();
        assert!(psi.distance(&out) < 1e-15);
    }

    #[test]
    fn swap_layer_transports_a_particle() {
        // One gate layer, θ = π/2 swap on bond (0,1) of a 4-site chain.
        let kinds = vec![vec![
            super::super::gate::GateKind::NumberConserving {
                theta: std::f64::consts::FRAC_PI_2,
                phi: 0.0,
            },
            super::super::gate::GateKind::Identity,
        ]];
        let c = GateCircuit::new(4, 1, kinds).unwrap();
        let psi = StateVector::basis(4, Configuration(0b0001));
        let out = psi
            .evolve(&c, &LatticeCut::constant(4, 0), &LatticeCut::constant(4, 1))
            .unwrap();
        // |10⟩ → −|01⟩ in bond basis: particle at site 1, amplitude −1.
        assert!((out.amplitude(Configuration(0b0010)) + Complex64::ONE).norm() < 1e-14);
        assert!(out.is_normalized());
    }

    #[test]
    fn round_trip_recovers_the_state() {
        let c = GateCircuit::random(8, 6, 13).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let psi = StateVector::random_fixed_number(8, 2, &mut rng);
        let a = LatticeCut::constant(8, 0);
        let b = LatticeCut::from_levels(vec![4, 3, 3, 4, 4, 3, 3, 4]);
        let there = psi.evolve(&c, &a, &b).unwrap();
        let back = there.evolve(&c, &b, &a).unwrap();
        assert!(psi.distance(&back) < 1e-10);
    }

    #[test]
    fn vacuum_is_fixed_with_unit_phase() {
        let c = GateCircuit::random(10, 8, 17).unwrap();
        let psi = StateVector::vacuum(10);
        let out = psi
            .evolve(
                &c,
                &LatticeCut::constant(10, 0),
                &LatticeCut::constant(10, 8),
            )
            .unwrap();
        assert!((out.amplitude(Configuration(0)) - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn particle_number_is_conserved() {
        let c = GateCircuit::random(8, 6, 19).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let psi = StateVector::random_fixed_number(8, 3, &mut rng);
        let out = psi
            .evolve(&c, &LatticeCut::constant(8, 0), &LatticeCut::constant(8, 6))
            .unwrap();
        let w = out.sector_weights();
        assert!((w[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_keeps_full_weight_on_full_set() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let psi = StateVector::random(6, &mut rng);
        let (out, w) = psi.apply_projector(&ConfigSet::Full);
        assert!((w - 1.0).abs() < 1e-12);
        assert!(psi.distance(&out) < 1e-15);
    }

    #[test]
    fn projector_on_bell_pair_halves_the_weight() {
        let psi = bell_pair();
        let exists0 = ConfigSet::Exists(SiteSet::from_sites(&[0]));
        let (out, w) = psi.apply_projector(&exists0);
        assert!((w - 0.5).abs() < 1e-14);
        assert!(
            (out.amplitude(Configuration(0b01)).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14
        );
        assert_eq!(out.amplitude(Configuration(0b10)), Complex64::ZERO);
        // Idempotence.
        let (out2, w2) = out.apply_projector(&exists0);
        assert!((w2 - 0.5).abs() < 1e-14);
        assert!(out.distance(&out2) < 1e-15);
    }

    #[test]
    fn projector_weights_sum_to_one_over_outcomes() {
        use crate::config::{make_m_partition, OutcomeVector};
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let psi = StateVector::random(7, &mut rng);
        let partition = [SiteSet::from_sites(&[0, 1]), SiteSet::from_sites(&[3, 5])];
        let total: f64 = OutcomeVector::all(2)
            .map(|l| {
                let m = make_m_partition(&partition, l).unwrap();
                psi.apply_projector(&m).1
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factorization_of_basis_state_is_a_product() {
        let q = Configuration(0b01101);
        let psi = StateVector::basis(5, q);
        let view = psi.factorize(SiteSet::from_sites(&[0, 3]));
        let mut nonzero = Vec::new();
        for row in 0..view.rows() {
            for col in 0..view.cols() {
                if view.amp(row, col).norm() > 0.0 {
                    nonzero.push((row, col));
                }
            }
        }
        // Exactly one nonzero entry, at the split of q.
        assert_eq!(nonzero.len(), 1);
        let (row, col) = nonzero[0];
        assert_eq!(view.join_index(row, col), q.0 as usize);
    }

    #[test]
    fn factorization_round_trips() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let psi = StateVector::random(6, &mut rng);
        let back = psi.factorize(SiteSet::from_sites(&[1, 4, 5])).into_state();
        assert!(psi.distance(&back) < 1e-15);
    }
}
