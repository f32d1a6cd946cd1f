//! Two-site gates on adjacent occupation spaces.
//!
//! The standard gate is block-diagonal in total occupation — it fixes |00⟩
//! with phase exactly 1, mixes the one-particle block {|01⟩, |10⟩} by a
//! rotation with a relative phase, and fixes |11⟩ — so particle number is
//! conserved and the vacuum is preserved exactly. A pair-mixing gate that
//! couples |00⟩ and |11⟩ is available as a deliberate locality violation
//! for negative controls.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const GATE_UNITARITY_TOL: f64 = 1e-12;

/// Basis order |n_a n_b⟩: index 0 = |00⟩, 1 = |01⟩ (right site occupied),
/// 2 = |10⟩ (left site occupied), 3 = |11⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub m: [[Complex64; 4]; 4],
}

/// Serializable gate parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    /// Number-conserving rotation by θ with relative phase φ.
    NumberConserving {
        theta: f64,
        phi: f64,
    },
    /// Rotation by α between |00⟩ and |11⟩; violates number conservation
    /// and vacuum preservation. Negative-control use only.
    PairMixing {
        alpha: f64,
    },
    Identity,
}

impl Gate {
    pub fn from_kind(kind: GateKind) -> Self {
        match kind {
            GateKind::NumberConserving { theta, phi } => Self::number_conserving(theta, phi),
            GateKind::PairMixing { alpha } => Self::pair_mixing(alpha),
            GateKind::Identity => Self::identity(),
        }
    }

    pub fn identity() -> Self {
        let mut m = [[Complex64::ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Complex64::ONE;
        }
        Self { m }
    }

    /// G(θ, φ): |01⟩ → cosθ|01⟩ + e^{−iφ} sinθ|10⟩,
    /// |10⟩ → −e^{iφ} sinθ|01⟩ + cosθ|10⟩; vacuum and |11⟩ fixed.
    pub fn number_conserving(theta: f64, phi: f64) -> Self {
        let c = Complex64::new(theta.cos(), 0.0);
        let s = theta.sin();
        let e_plus = Complex64::from_polar(s, phi);
        let e_minus = Complex64::from_polar(s, -phi);
        let mut m = [[Complex64::ZERO; 4]; 4];
        m[0][0] = Complex64::ONE;
        m[1][1] = c;
        m[1][2] = -e_plus;
        m[2][1] = e_minus;
        m[2][2] = c;
        m[3][3] = Complex64::ONE;
        Self { m }
    }

    pub fn pair_mixing(alpha: f64) -> Self {
        let c = Complex64::new(alpha.cos(), 0.0);
        let s = Complex64::new(alpha.sin(), 0.0);
        let mut m = [[Complex64::ZERO; 4]; 4];
        m[0][0] = c;
        m[0][3] = -s;
        m[3][0] = s;
        m[3][3] = c;
        m[1][1] = Complex64::ONE;
        m[2][2] = Complex64::ONE;
        Self { m }
    }

    pub fn adjoint(&self) -> Self {
        let mut m = [[Complex64::ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.m[j][i].conj();
            }
        }
        Self { m }
    }

    pub fn unitarity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Complex64::ZERO;
                for k in 0..4 {
                    acc += self.m[k][i].conj() * self.m[k][j];
                }
                let expect = if i == j {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() < GATE_UNITARITY_TOL
    }

    /// Block-diagonal in total occupation {0}, {1}, {2}.
    pub fn is_number_conserving(&self) -> bool {
        let occ = [0usize, 1, 1, 2];
        for i in 0..4 {
            for j in 0..4 {
                if occ[i] != occ[j] && self.m[i][j].norm() > GATE_UNITARITY_TOL {
                    return false;
                }
            }
        }
        true
    }

    /// |00⟩ mapped to itself with phase exactly 1.
    pub fn fixes_vacuum(&self) -> bool {
        (self.m[0][0] - Complex64::ONE).norm() < GATE_UNITARITY_TOL
            && (1..4).all(|i| self.m[i][0].norm() < GATE_UNITARITY_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_conserving_gates_are_unitary_blocks() {
        for &(theta, phi) in &[(0.0, 0.0), (0.7, 1.3), (std::f64::consts::FRAC_PI_2, 0.0)] {
            let g = Gate::number_conserving(theta, phi);
            assert!(g.is_unitary());
            assert!(g.is_number_conserving());
            assert!(g.fixes_vacuum());
        }
    }

    #[test]
    fn swap_angle_exchanges_one_particle_states() {
        let g = Gate::number_conserving(std::f64::consts::FRAC_PI_2, 0.0);
        assert!((g.m[2][1] - Complex64::ONE).norm() < 1e-15); // |01⟩ → |10⟩
        assert!((g.m[1][2] + Complex64::ONE).norm() < 1e-15); // |10⟩ → −|01⟩
    }

    #[test]
    fn pair_mixing_breaks_vacuum_but_not_unitarity() {
        let g = Gate::pair_mixing(0.4);
        assert!(g.is_unitary());
        assert!(!g.is_number_conserving());
        assert!(!g.fixes_vacuum());
    }

    #[test]
    fn adjoint_inverts() {
        let g = Gate::number_conserving(0.9, 0.2);
        let a = g.adjoint();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Complex64::ZERO;
                for k in 0..4 {
                    acc += a.m[i][k] * g.m[k][j];
                }
                let expect = if i == j {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                assert!((acc - expect).norm() < 1e-14);
            }
        }
    }
}
