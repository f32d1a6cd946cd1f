//! Lattice Cauchy cuts through a brickwork circuit.
//!
//! A cut assigns each site an integer time τ(x) ∈ [0, depth]; site x is
//! "after" the first τ(x) gate layers. Validity has two parts: the discrete
//! Lipschitz-1 condition |τ(x+1) − τ(x)| ≤ 1 (the lattice Cauchy property),
//! and gate-respecting: no gate may have one leg above and one leg below
//! the cut.

use serde::{Deserialize, Serialize};

use super::circuit::GateCircuit;
use super::LatticeError;
use crate::config::SiteSet;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeCut {
    tau: Vec<u32>,
}

/// Maximal run of sites whose τ values form an arithmetic progression with
/// slope −1, 0 or +1. Slope-0 pieces are the lattice hyperplane segments.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatPiece {
    /// Sites in cyclic chain order.
    pub sites: Vec<usize>,
    pub slope: i8,
}

impl FlatPiece {
    pub fn site_set(&self) -> SiteSet {
        SiteSet::from_sites(&self.sites)
    }
}

/// A gate lying between two cuts, tagged with the direction it must be
/// applied when evolving from the first cut to the second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossedGate {
    pub layer: usize,
    pub bond: usize,
    /// Applied forward when evolving (gate below target but not below
    /// source); otherwise the adjoint is applied.
    pub forward: bool,
}

impl LatticeCut {
    pub fn from_levels(tau: Vec<u32>) -> Self {
        Self { tau }
    }

    pub fn constant(num_sites: usize, level: u32) -> Self {
        Self {
            tau: vec![level; num_sites],
        }
    }

    pub fn levels(&self) -> &[u32] {
        &self.tau
    }

    pub fn level(&self, site: usize) -> u32 {
        self.tau[site]
    }

    pub fn num_sites(&self) -> usize {
        self.tau.len()
    }

    /// True iff the gate in layer `layer` on `bond` lies below this cut
    /// (i.e. has been applied). Both legs agree for gate-respecting cuts.
    pub fn gate_applied(&self, circuit: &GateCircuit, layer: usize, bond: usize) -> bool {
        let (a, _) = circuit.bond_sites(bond);
        self.tau[a] >= (layer + 1) as u32
    }

    pub fn validate(&self, circuit: &GateCircuit) -> Result<(), LatticeError> {
        let n = circuit.num_sites();
        if self.tau.len() != n {
            return Err(LatticeError::CutLengthMismatch {
                got: self.tau.len(),
                expected: n,
            });
        }
        for (x, &t) in self.tau.iter().enumerate() {
            if t > circuit.depth() as u32 {
                return Err(LatticeError::BadCut(format!(
                    "site {x} has level {t} above circuit depth {}",
                    circuit.depth()
                )));
            }
        }
        for x in 0..n {
            let y = (x + 1) % n;
            let d = self.tau[x] as i64 - self.tau[y] as i64;
            if d.abs() > 1 {
                return Err(LatticeError::BadCut(format!(
                    "level jump {d} between sites {x} and {y} exceeds 1"
                )));
            }
        }
        for layer in 0..circuit.depth() {
            for bond in circuit.layer_bonds(layer) {
                let (a, b) = circuit.bond_sites(bond);
                let below_a = self.tau[a] >= (layer + 1) as u32;
                let below_b = self.tau[b] >= (layer + 1) as u32;
                if below_a != below_b {
                    return Err(LatticeError::BadCut(format!(
                        "gate at layer {layer}, bond {bond} straddles the cut"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pointwise minimum of two cuts — valid whenever both inputs are.
    pub fn pointwise_min(&self, other: &LatticeCut) -> LatticeCut {
        LatticeCut {
            tau: self
                .tau
                .iter()
                .zip(&other.tau)
                .map(|(&a, &b)| a.min(b))
                .collect(),
        }
    }

    /// Discrete "lies in the causal past of": τ ≤ τ′ pointwise.
    pub fn is_below(&self, other: &LatticeCut) -> bool {
        self.tau.iter().zip(&other.tau).all(|(&a, &b)| a <= b)
    }

    /// The cut lowered uniformly by `k` layers (saturating at 0; the caller
    /// should keep cuts high enough that no clamping occurs).
    pub fn lowered(&self, k: u32) -> LatticeCut {
        LatticeCut {
            tau: self.tau.iter().map(|&t| t.saturating_sub(k)).collect(),
        }
    }

    /// The highest valid cut lying at or below this cut lowered by `k`.
    /// Lowering by an odd layer count flips step parities against the
    /// brickwork, so the result repairs straddled gates and level jumps by
    /// monotone lowering; valid cuts are closed under pointwise maximum, so
    /// the fixpoint is the unique greatest valid cut below the profile.
    pub fn lowered_snapped(
        &self,
        circuit: &GateCircuit,
        k: u32,
    ) -> Result<LatticeCut, LatticeError> {
        let n = self.tau.len();
        let mut tau: Vec<i64> = self.tau.iter().map(|&t| t as i64 - k as i64).collect();
        loop {
            let mut changed = false;
            for t in tau.iter_mut() {
                if *t < 0 {
                    *t = 0;
                    changed = true;
                }
            }
            for x in 0..n {
                let y = (x + 1) % n;
                if tau[x] > tau[y] + 1 {
                    tau[x] = tau[y] + 1;
                    changed = true;
                }
                if tau[y] > tau[x] + 1 {
                    tau[y] = tau[x] + 1;
                    changed = true;
                }
            }
            for layer in 0..circuit.depth() {
                for bond in circuit.layer_bonds(layer) {
                    let (a, b) = circuit.bond_sites(bond);
                    let t1 = (layer + 1) as i64;
                    let below_a = tau[a] >= t1;
                    let below_b = tau[b] >= t1;
                    if below_a && !below_b {
                        tau[a] = layer as i64;
                        changed = true;
                    } else if below_b && !below_a {
                        tau[b] = layer as i64;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let cut = LatticeCut {
            tau: tau.into_iter().map(|t| t as u32).collect(),
        };
        cut.validate(circuit)?;
        Ok(cut)
    }

    /// Maximal constant-or-uniform-slope runs of τ, segmented greedily from
    /// a canonical anchor. Every site belongs to exactly one piece.
    pub fn flat_pieces(&self) -> Vec<FlatPiece> {
        let n = self.tau.len();
        if n == 0 {
            return vec![];
        }
        let diff = |x: usize| self.tau[(x + 1) % n] as i64 - self.tau[x] as i64;
        // Anchor: a site whose run cannot extend backwards.
        let anchor = (0..n)
            .find(|&x| diff((x + n - 1) % n) != diff(x))
            .map(|x| (x + 1) % n);
        let anchor = match anchor {
            None => {
                // All diffs equal; cyclic closure forces slope 0.
                return vec![FlatPiece {
                    sites: (0..n).collect(),
                    slope: 0,
                }];
            }
            Some(a) => a,
        };
        let mut pieces = Vec::new();
        let mut consumed = 0;
        let mut start = anchor;
        while consumed < n {
            let mut sites = vec![start];
            let mut slope: Option<i64> = None;
            while consumed + sites.len() < n {
                let cur = *sites.last().unwrap();
                let next = (cur + 1) % n;
                let d = diff(cur);
                if d.abs() > 1 {
                    break;
                }
                match slope {
                    None => {
                        slope = Some(d);
                        sites.push(next);
                    }
                    Some(s) if s == d => sites.push(next),
                    Some(_) => break,
                }
            }
            consumed += sites.len();
            pieces.push(FlatPiece {
                sites,
                slope: slope.unwrap_or(0) as i8,
            });
            start = (pieces.last().unwrap().sites.last().unwrap() + 1) % n;
        }
        pieces
    }

    /// Gate-respecting full-chain cut agreeing with this cut on the piece:
    /// the lattice analogue of the hyperplane containing a flat piece. For
    /// slope-0 pieces this is the constant cut at the piece level. A sloped
    /// piece cannot continue around the periodic chain as a line, so its
    /// extension closes the gap with the pointwise-highest gate-respecting
    /// path; if no legal closure exists the piece is not extendable.
    pub fn hyperplane_extension(
        &self,
        circuit: &GateCircuit,
        piece: &FlatPiece,
    ) -> Result<LatticeCut, LatticeError> {
        if piece.slope == 0 {
            let cut = LatticeCut::constant(self.tau.len(), self.tau[piece.sites[0]]);
            cut.validate(circuit)?;
            return Ok(cut);
        }
        let n = self.tau.len();
        let depth = circuit.depth();
        let first = piece.sites[0];
        let last = *piece.sites.last().unwrap();
        let gap: Vec<usize> = (1..=(n - piece.sites.len()))
            .map(|i| (last + i) % n)
            .collect();
        // step_ok(a → b across bond x): |Δ| ≤ 1, in range, and no gate of
        // the brickwork sits at the step's corner.
        let step_ok = |a: u32, b: u32, bond: usize| -> bool {
            if b > depth as u32 {
                return false;
            }
            match b as i64 - a as i64 {
                0 => true,
                1 => !circuit.has_gate(a as usize, bond),
                -1 => !circuit.has_gate(b as usize, bond),
                _ => false,
            }
        };
        // Backward feasibility: feasible[i][v] says level v at gap[i] can
        // still complete the walk back into the piece at its first site.
        // The bond between gap[i] and its successor is gap[i] itself.
        let levels = depth + 1;
        let g = gap.len();
        let mut feasible = vec![vec![false; levels]; g];
        for v in 0..levels {
            feasible[g - 1][v] = step_ok(v as u32, self.tau[first], gap[g - 1]);
        }
        for i in (0..g - 1).rev() {
            for v in 0..levels {
                feasible[i][v] =
                    (0..levels).any(|w| step_ok(v as u32, w as u32, gap[i]) && feasible[i + 1][w]);
            }
        }
        // Forward greedy walk: at each gap site pick the highest feasible
        // level reachable from the previous one.
        let mut tau = self.tau.clone();
        let mut prev = self.tau[last];
        for (i, &x) in gap.iter().enumerate() {
            let bond_in = if i == 0 { last } else { gap[i - 1] };
            let next = (0..levels)
                .rev()
                .map(|v| v as u32)
                .find(|&v| step_ok(prev, v, bond_in) && feasible[i][v as usize]);
            match next {
                Some(v) => {
                    tau[x] = v;
                    prev = v;
                }
                None => return Err(LatticeError::NonExtendablePiece),
            }
        }
        let cut = LatticeCut { tau };
        cut.validate(circuit)?;
        Ok(cut)
    }

    /// Gates lying between `self` and `to`, routed through the pointwise
    /// minimum cut: first the gates to un-apply (descending layers), then
    /// the gates to apply (ascending layers).
    pub fn gates_between(&self, circuit: &GateCircuit, to: &LatticeCut) -> Vec<CrossedGate> {
        let m = self.pointwise_min(to);
        let mut down = Vec::new();
        let mut up = Vec::new();
        for layer in 0..circuit.depth() {
            for bond in circuit.layer_bonds(layer) {
                let under_min = m.gate_applied(circuit, layer, bond);
                if !under_min && self.gate_applied(circuit, layer, bond) {
                    down.push(CrossedGate {
                        layer,
                        bond,
                        forward: false,
                    });
                }
                if !under_min && to.gate_applied(circuit, layer, bond) {
                    up.push(CrossedGate {
                        layer,
                        bond,
                        forward: true,
                    });
                }
            }
        }
        down.sort_by(|a, b| b.layer.cmp(&a.layer));
        up.sort_by(|a, b| a.layer.cmp(&b.layer));
        down.extend(up);
        down
    }

    /// Generates a random valid cut with levels in [lo, hi]. The walk only
    /// proposes parity-legal steps (a step across bond x at level a is legal
    /// iff no gate sits at that corner of the brickwork), so rejection only
    /// happens at the periodic closure.
    pub fn random(
        circuit: &GateCircuit,
        rng: &mut impl rand::Rng,
        lo: u32,
        hi: u32,
        attempts: usize,
    ) -> Option<LatticeCut> {
        let n = circuit.num_sites();
        let step_up_ok = |a: u32, x: usize| !circuit.has_gate(a as usize, x);
        let step_down_ok = |a: u32, x: usize| a == 0 || !circuit.has_gate(a as usize - 1, x);
        for _ in 0..attempts {
            let start = rng.gen_range(lo..=hi);
            let mut tau = vec![start];
            for x in 0..(n - 1) {
                let cur = *tau.last().unwrap();
                let mut moves = vec![cur];
                if cur < hi && step_up_ok(cur, x) {
                    moves.push(cur + 1);
                }
                if cur > lo && step_down_ok(cur, x) {
                    moves.push(cur - 1);
                }
                tau.push(moves[rng.gen_range(0..moves.len())]);
            }
            let cut = LatticeCut { tau };
            if cut.validate(circuit).is_ok() {
                return Some(cut);
            }
        }
        None
    }
}

/// Discrete grown set: causal spread of `seed` (a set of sites on `from`)
/// through every gate crossed on the way to `to` — one site per crossed gate
/// layer, exactly the circuit's light cone.
pub fn grow_sites(
    circuit: &GateCircuit,
    from: &LatticeCut,
    to: &LatticeCut,
    seed: SiteSet,
) -> SiteSet {
    let mut s = seed;
    for g in from.gates_between(circuit, to) {
        let (a, b) = circuit.bond_sites(g.bond);
        if s.contains(a) || s.contains(b) {
            s.insert(a);
            s.insert(b);
        }
    }
    s
}

/// Discrete shrunk set: sites of `to` whose full causal shadow on `from`
/// lies inside `region`.
pub fn shrink_sites(
    circuit: &GateCircuit,
    from: &LatticeCut,
    to: &LatticeCut,
    region: SiteSet,
) -> SiteSet {
    let mut out = SiteSet::EMPTY;
    for y in 0..circuit.num_sites() {
        let shadow = grow_sites(circuit, to, from, SiteSet::from_sites(&[y]));
        if shadow.is_subset_of(region) {
            out.insert(y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn circuit() -> GateCircuit {
        GateCircuit::random(8, 6, 5).unwrap()
    }

    #[test]
    fn constant_cuts_are_valid() {
        let c = circuit();
        for level in 0..=6 {
            LatticeCut::constant(8, level).validate(&c).unwrap();
        }
    }

    #[test]
    fn straddling_gate_is_rejected() {
        let c = circuit();
        // Bond 0 has a gate at layer 0; τ = (1,0,...) splits its legs.
        let cut = LatticeCut::from_levels(vec![1, 0, 0, 0, 0, 0, 0, 0]);
        assert!(matches!(cut.validate(&c), Err(LatticeError::BadCut(_))));
    }

    #[test]
    fn level_jump_is_rejected() {
        let c = circuit();
        let cut = LatticeCut::from_levels(vec![2, 0, 0, 0, 0, 0, 0, 2]);
        assert!(cut.validate(&c).is_err());
    }

    #[test]
    fn parity_legal_staircase_validates() {
        let c = circuit();
        // Steps up at odd τ+x positions: τ = (2,1,1,2,2,1,1,2) style valley.
        let cut = LatticeCut::from_levels(vec![2, 1, 1, 2, 2, 1, 1, 2]);
        cut.validate(&c).unwrap();
    }

    #[test]
    fn flat_pieces_cover_all_sites_once() {
        let cut = LatticeCut::from_levels(vec![2, 1, 1, 2, 2, 1, 1, 2]);
        let pieces = cut.flat_pieces();
        let mut seen = vec![false; 8];
        for p in &pieces {
            for &s in &p.sites {
                assert!(!seen[s], "site {s} assigned twice");
                seen[s] = true;
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn constant_cut_is_a_single_piece() {
        let cut = LatticeCut::constant(8, 3);
        let pieces = cut.flat_pieces();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].slope, 0);
        assert_eq!(pieces[0].sites.len(), 8);
    }

    #[test]
    fn extension_of_constant_piece_is_horizontal() {
        let c = circuit();
        let cut = LatticeCut::from_levels(vec![2, 1, 1, 2, 2, 1, 1, 2]);
        let pieces = cut.flat_pieces();
        let plateau = pieces
            .iter()
            .find(|p| p.slope == 0 && p.sites.contains(&3))
            .unwrap();
        let e = cut.hyperplane_extension(&c, plateau).unwrap();
        assert_eq!(e.levels(), &[2; 8]);
    }

    #[test]
    fn ramp_piece_extends_to_a_clamped_line() {
        // 16 sites, depth 4: an up-ramp over sites 0..3 with a parity-legal
        // descent on the far side.
        let c = GateCircuit::random(16, 4, 77).unwrap();
        let cut = LatticeCut::from_levels(vec![1, 2, 3, 4, 4, 4, 4, 4, 4, 4, 4, 3, 2, 1, 1, 1]);
        cut.validate(&c).unwrap();
        let pieces = cut.flat_pieces();
        let ramp = pieces
            .iter()
            .find(|p| p.slope == 1 && p.sites.contains(&1))
            .expect("up-ramp piece");
        let e = cut.hyperplane_extension(&c, ramp).unwrap();
        e.validate(&c).unwrap();
        for &s in &ramp.sites {
            assert_eq!(e.level(s), cut.level(s));
        }
        // The maximal closure hugs the top of the circuit beyond the ramp.
        assert!(e.levels().iter().any(|&t| t == 4));
    }

    #[test]
    fn every_piece_of_a_valid_cut_extends() {
        // The cut's own gap values always close the walk, so extensions of
        // valid cuts never fail.
        let c = GateCircuit::random(10, 8, 79).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(12);
        for _ in 0..30 {
            let cut = LatticeCut::random(&c, &mut rng, 0, 8, 300).unwrap();
            for piece in cut.flat_pieces() {
                let e = cut.hyperplane_extension(&c, &piece).unwrap();
                e.validate(&c).unwrap();
                for &s in &piece.sites {
                    assert_eq!(e.level(s), cut.level(s));
                }
            }
        }
    }

    #[test]
    fn min_cut_of_valid_cuts_is_valid() {
        let c = circuit();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = LatticeCut::random(&c, &mut rng, 0, 6, 500).unwrap();
            let b = LatticeCut::random(&c, &mut rng, 0, 6, 500).unwrap();
            a.pointwise_min(&b).validate(&c).unwrap();
        }
    }

    #[test]
    fn gates_between_identical_cuts_is_empty() {
        let c = circuit();
        let cut = LatticeCut::from_levels(vec![2, 1, 1, 2, 2, 1, 1, 2]);
        assert!(cut.gates_between(&c, &cut).is_empty());
    }

    #[test]
    fn gates_between_horizontal_cuts_counts_layers() {
        let c = circuit();
        let a = LatticeCut::constant(8, 1);
        let b = LatticeCut::constant(8, 3);
        let crossed = a.gates_between(&c, &b);
        // Layers 1 and 2, four bonds each, all forward.
        assert_eq!(crossed.len(), 8);
        assert!(crossed.iter().all(|g| g.forward));
    }

    #[test]
    fn grow_spreads_one_site_per_crossed_layer() {
        let c = circuit();
        let a = LatticeCut::constant(8, 2);
        let b = LatticeCut::constant(8, 4);
        let grown = grow_sites(&c, &a, &b, SiteSet::from_sites(&[4]));
        // Two crossed layers spread site 4 across its light cone.
        assert!(grown.contains(4));
        assert!(grown.len() >= 2 && grown.len() <= 4);
        let same = grow_sites(&c, &a, &a, SiteSet::from_sites(&[4]));
        assert_eq!(same, SiteSet::from_sites(&[4]));
    }

    #[test]
    fn shrink_is_adjoint_to_grow() {
        let c = circuit();
        let a = LatticeCut::constant(8, 1);
        let b = LatticeCut::constant(8, 4);
        let region = SiteSet::from_sites(&[2, 3, 4, 5, 6]);
        let shrunk = shrink_sites(&c, &a, &b, region);
        for y in shrunk.sites() {
            assert!(grow_sites(&c, &b, &a, SiteSet::from_sites(&[y])).is_subset_of(region));
        }
        // Shrunk ⊆ region ⊆ grown.
        assert!(shrunk.is_subset_of(region));
        assert!(region.is_subset_of(grow_sites(&c, &a, &b, region)));
    }
}
