//! Brickwork circuits: layers of two-site gates on a periodic chain, even
//! bonds at even layers and odd bonds at odd layers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::gate::{Gate, GateKind};
use super::LatticeError;
use crate::config::MAX_SITES;

/// A brickwork circuit over an even number of periodic sites. Every layer
/// carries a gate on each bond of its parity.
#[derive(Clone, Debug)]
pub struct GateCircuit {
    num_sites: usize,
    depth: usize,
    /// kinds[t] holds the per-slot parameters of layer t (slot index
    /// enumerates the bonds of the layer's parity from left to right).
    kinds: Vec<Vec<GateKind>>,
    gates: Vec<Vec<Gate>>,
}

impl GateCircuit {
    pub fn new(
        num_sites: usize,
        depth: usize,
        kinds: Vec<Vec<GateKind>>,
    ) -> Result<Self, LatticeError> {
        if num_sites == 0 || num_sites > MAX_SITES {
            return Err(LatticeError::BadSiteCount(num_sites));
        }
        if num_sites % 2 != 0 {
            return Err(LatticeError::OddSiteCount(num_sites));
        }
        if kinds.len() != depth {
            return Err(LatticeError::BadCircuit(format!(
                "expected {depth} layers, got {}",
                kinds.len()
            )));
        }
        let slots = num_sites / 2;
        for (t, layer) in kinds.iter().enumerate() {
            if layer.len() != slots {
                return Err(LatticeError::BadCircuit(format!(
                    "layer {t} has {} gate slots, expected {slots}",
                    layer.len()
                )));
            }
        }
        let gates = kinds
            .iter()
            .map(|layer| layer.iter().map(|&k| Gate::from_kind(k)).collect())
            .collect();
        let circuit = Self {
            num_sites,
            depth,
            kinds,
            gates,
        };
        for t in 0..depth {
            for slot in 0..slots {
                let g = &circuit.gates[t][slot];
                if !g.is_unitary() {
                    return Err(LatticeError::BadCircuit(format!(
                        "gate at layer {t} slot {slot} is not unitary"
                    )));
                }
            }
        }
        Ok(circuit)
    }

    /// Seeded circuit of random number-conserving gates.
    pub fn random(num_sites: usize, depth: usize, seed: u64) -> Result<Self, LatticeError> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let slots = num_sites / 2;
        let kinds = (0..depth)
            .map(|_| {
                (0..slots)
                    .map(|_| GateKind::NumberConserving {
                        theta: rng.gen_range(0.0..std::f64::consts::TAU),
                        phi: rng.gen_range(0.0..std::f64::consts::TAU),
                    })
                    .collect()
            })
            .collect();
        Self::new(num_sites, depth, kinds)
    }

    /// Same circuit with one gate replaced (negative controls).
    pub fn with_gate_replaced(
        &self,
        layer: usize,
        bond: usize,
        kind: GateKind,
    ) -> Result<Self, LatticeError> {
        let slot = self.slot_of_bond(layer, bond).ok_or_else(|| {
            LatticeError::BadCircuit(format!("no gate slot at layer {layer}, bond {bond}"))
        })?;
        let mut kinds = self.kinds.clone();
        kinds[layer][slot] = kind;
        Self::new(self.num_sites, self.depth, kinds)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The two sites of bond b: (b, b+1 mod n).
    pub fn bond_sites(&self, bond: usize) -> (usize, usize) {
        (bond, (bond + 1) % self.num_sites)
    }

    /// Brickwork parity rule: layer t acts on bonds b with b ≡ t (mod 2).
    pub fn has_gate(&self, layer: usize, bond: usize) -> bool {
        layer < self.depth && bond < self.num_sites && bond % 2 == layer % 2
    }

    fn slot_of_bond(&self, layer: usize, bond: usize) -> Option<usize> {
        if self.has_gate(layer, bond) {
            Some(bond / 2)
        } else {
            None
        }
    }

    pub fn gate_at(&self, layer: usize, bond: usize) -> Option<&Gate> {
        self.slot_of_bond(layer, bond)
            .map(|slot| &self.gates[layer][slot])
    }

    /// Bonds carrying a gate in the given layer, left to right.
    pub fn layer_bonds(&self, layer: usize) -> impl Iterator<Item = usize> + '_ {
        let parity = layer % 2;
        (0..self.num_sites / 2).map(move |slot| 2 * slot + parity)
    }

    pub fn all_number_conserving(&self) -> bool {
        self.gates
            .iter()
            .flatten()
            .all(|g| g.is_number_conserving() && g.fixes_vacuum())
    }

    pub fn to_spec(&self, seed: Option<u64>) -> CircuitSpec {
        let mut gates = Vec::new();
        for t in 0..self.depth {
            for bond in self.layer_bonds(t) {
                gates.push(GateEntry {
                    layer: t,
                    bond,
                    gate: self.kinds[t][bond / 2],
                });
            }
        }
        CircuitSpec {
            schema_version: 1,
            num_sites: self.num_sites,
            depth: self.depth,
            seed,
            gates,
        }
    }
}

/// One row of the gate parameter table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateEntry {
    pub layer: usize,
    pub bond: usize,
    #[serde(flatten)]
    pub gate: GateKind,
}

/// On-disk circuit description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub schema_version: u32,
    pub num_sites: usize,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub gates: Vec<GateEntry>,
}

impl CircuitSpec {
    pub fn build(&self) -> Result<GateCircuit, LatticeError> {
        if self.schema_version != 1 {
            return Err(LatticeError::BadCircuit(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        let slots = self.num_sites / 2;
        let mut kinds = vec![vec![GateKind::Identity; slots.max(1)]; self.depth];
        for entry in &self.gates {
            if entry.layer >= self.depth
                || entry.bond >= self.num_sites
                || entry.bond % 2 != entry.layer % 2
            {
                return Err(LatticeError::BadCircuit(format!(
                    "gate entry at layer {}, bond {} violates the brickwork layout",
                    entry.layer, entry.bond
                )));
            }
            kinds[entry.layer][entry.bond / 2] = entry.gate;
        }
        GateCircuit::new(self.num_sites, self.depth, kinds)
    }
}
