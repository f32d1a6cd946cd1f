//! Locality checkers: propagation locality (support stays inside the
//! crossed-gate light cone) and interaction locality (evolution across a
//! spacelike region factorizes as identity ⊗ local unitary).

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::circuit::GateCircuit;
use super::cut::{grow_sites, LatticeCut};
use super::state::{split_index, StateVector};
use super::LatticeError;
use crate::config::{ConfigSet, Configuration, SiteSet};

/// Outcome of a propagation-locality check.
#[derive(Clone, Debug, Serialize)]
pub struct PlReport {
    pub region: SiteSet,
    pub grown: SiteSet,
    pub trials: usize,
    pub max_leakage: f64,
    pub pass: bool,
}

/// For random states concentrated in `region` on `from`, measures the
/// amplitude weight that escapes the discrete grown set after evolving to
/// `to`. Number-conserving brickwork circuits leak exactly nothing.
pub fn check_pl(
    circuit: &GateCircuit,
    region: SiteSet,
    from: &LatticeCut,
    to: &LatticeCut,
    trials: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> Result<PlReport, LatticeError> {
    from.validate(circuit)?;
    to.validate(circuit)?;
    let grown = grow_sites(circuit, from, to, region);
    let n = circuit.num_sites();
    let mut max_leakage = 0.0f64;
    for _ in 0..trials {
        let psi = StateVector::random_in_region(n, region, rng);
        let evolved = psi.evolve(circuit, from, to)?;
        max_leakage = max_leakage.max(evolved.weight_outside(grown));
    }
    Ok(PlReport {
        region,
        grown,
        trials,
        max_leakage,
        pass: max_leakage <= tol,
    })
}

/// Outcome of an interaction-locality check.
#[derive(Clone, Debug, Serialize)]
pub struct IlReport {
    pub region: SiteSet,
    /// Dimension of the extracted local evolution (2^{#complement sites}).
    pub v_dim: usize,
    /// ‖V†V − I‖ max-entry residual of the extracted local evolution.
    pub v_unitarity_residual: f64,
    /// Residual of U|q_A ⊗ q_B⟩ = |q_A⟩ ⊗ V|q_B⟩ on probe product states.
    pub product_residual: f64,
    /// Residual of commutators [U, P] for projectors supported in A.
    pub commutation_residual: f64,
    pub trials: usize,
    pub pass: bool,
}

/// Extracts the local evolution V on the complement of `region` by evolving
/// basis states with vacuum inside `region`. Returns the column-major
/// matrix and its dimension. Errors if a crossed gate touches `region`.
pub fn extract_local_evolution(
    circuit: &GateCircuit,
    region: SiteSet,
    from: &LatticeCut,
    to: &LatticeCut,
) -> Result<(Vec<Complex64>, usize), LatticeError> {
    from.validate(circuit)?;
    to.validate(circuit)?;
    for g in from.gates_between(circuit, to) {
        let (a, b) = circuit.bond_sites(g.bond);
        if region.contains(a) || region.contains(b) {
            return Err(LatticeError::GateTouchesRegion {
                layer: g.layer,
                bond: g.bond,
            });
        }
    }
    let n = circuit.num_sites();
    let a_sites: Vec<usize> = (0..n).filter(|&s| region.contains(s)).collect();
    let b_sites: Vec<usize> = (0..n).filter(|&s| !region.contains(s)).collect();
    let dim = 1usize << b_sites.len();
    let mut v = vec![Complex64::ZERO; dim * dim];
    for col in 0..dim {
        let mut q = 0usize;
        for (i, &s) in b_sites.iter().enumerate() {
            if col >> i & 1 == 1 {
                q |= 1 << s;
            }
        }
        let psi = StateVector::basis(n, Configuration(q as u32));
        let evolved = psi.evolve(circuit, from, to)?;
        for (full, amp) in evolved.amplitudes().iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let (row_a, row_b) = split_index(full, &a_sites, &b_sites);
            debug_assert_eq!(row_a, 0, "vacuum block must be preserved");
            v[row_b * dim + col] = *amp;
        }
    }
    Ok((v, dim))
}

/// Verifies interaction locality across `region` between two cuts: the
/// evolution acts as identity ⊗ V, with V unitary and independent of the
/// state inside the region, and commutes with every occupation projector
/// supported in the region.
pub fn check_il(
    circuit: &GateCircuit,
    region: SiteSet,
    from: &LatticeCut,
    to: &LatticeCut,
    trials: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> Result<IlReport, LatticeError> {
    let (v, dim) = extract_local_evolution(circuit, region, from, to)?;
    let mut v_unitarity_residual = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::ZERO;
            for k in 0..dim {
                acc += v[k * dim + i].conj() * v[k * dim + j];
            }
            let expect = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            v_unitarity_residual = v_unitarity_residual.max((acc - expect).norm());
        }
    }

    let n = circuit.num_sites();
    let a_sites: Vec<usize> = (0..n).filter(|&s| region.contains(s)).collect();
    let b_sites: Vec<usize> = (0..n).filter(|&s| !region.contains(s)).collect();
    let mut product_residual = 0.0f64;
    for _ in 0..trials.max(1) {
        // Random product basis state |q_A ⊗ q_B⟩.
        let row_a: usize = rng.gen_range(0..(1usize << a_sites.len()));
        let col_b: usize = rng.gen_range(0..dim);
        let mut q = 0usize;
        for (i, &s) in a_sites.iter().enumerate() {
            if row_a >> i & 1 == 1 {
                q |= 1 << s;
            }
        }
        let mut qb = 0usize;
        for (i, &s) in b_sites.iter().enumerate() {
            if col_b >> i & 1 == 1 {
                qb |= 1 << s;
            }
        }
        let psi = StateVector::basis(n, Configuration((q | qb) as u32));
        let evolved = psi.evolve(circuit, from, to)?;
        // Expected: same A-part, V applied to the B-part.
        let mut expected = vec![Complex64::ZERO; 1 << n];
        for row_b in 0..dim {
            let amp = v[row_b * dim + col_b];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let mut full = q;
            for (i, &s) in b_sites.iter().enumerate() {
                if row_b >> i & 1 == 1 {
                    full |= 1 << s;
                }
            }
            expected[full] = amp;
        }
        let diff: f64 = evolved
            .amplitudes()
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        product_residual = product_residual.max(diff);
    }

    let mut commutation_residual = 0.0f64;
    for _ in 0..trials.max(1) {
        let psi = StateVector::random(n, rng);
        let site = a_sites[rng.gen_range(0..a_sites.len().max(1))];
        let proj = ConfigSet::Exists(SiteSet::from_sites(&[site]));
        let (p_psi, _) = psi.apply_projector(&proj);
        let u_p = p_psi.evolve(circuit, from, to)?;
        let (p_u, _) = psi.evolve(circuit, from, to)?.apply_projector(&proj);
        commutation_residual = commutation_residual.max(u_p.distance(&p_u));
    }

    let worst = v_unitarity_residual
        .max(product_residual)
        .max(commutation_residual);
    Ok(IlReport {
        region,
        v_dim: dim,
        v_unitarity_residual,
        product_residual,
        commutation_residual,
        trials,
        pass: worst <= tol,
    })
}
