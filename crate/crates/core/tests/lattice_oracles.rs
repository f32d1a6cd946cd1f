//! Independent oracles for the lattice model: a dense kron-product matrix
//! route for the evolution, a space-time reachability BFS for the discrete
//! light cone, and the factorization identities as explicit index maps.

use cauchyborn_core::config::{make_m_piece, Configuration, OutcomeVector, SiteSet};
use cauchyborn_core::lattice::{grow_sites, GateCircuit, LatticeCut, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Dense column-major unitary embedding of a two-site gate at (a, b) into
/// the full 2^n-dimensional space, built directly from matrix elements.
fn embed_gate(n: usize, gate: &[[Complex64; 4]; 4], a: usize, b: usize) -> Vec<Complex64> {
    let dim = 1usize << n;
    let mut m = vec![Complex64::ZERO; dim * dim];
    let sub = |q: usize| ((q >> a & 1) << 1) | (q >> b & 1);
    for col in 0..dim {
        let c_sub = sub(col);
        let base = col & !(1 << a) & !(1 << b);
        for r_sub in 0..4 {
            let amp = gate[r_sub][c_sub];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let mut row = base;
            if r_sub & 0b10 != 0 {
                row |= 1 << a;
            }
            if r_sub & 0b01 != 0 {
                row |= 1 << b;
            }
            m[row * dim + col] = amp;
        }
    }
    m
}

fn mat_mul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let dim = 1usize << n;
    let mut out = vec![Complex64::ZERO; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

fn mat_vec(n: usize, m: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let dim = 1usize << n;
    let mut out = vec![Complex64::ZERO; dim];
    for i in 0..dim {
        let mut acc = Complex64::ZERO;
        for j in 0..dim {
            acc += m[i * dim + j] * v[j];
        }
        out[i] = acc;
    }
    out
}

/// Full unitary between two horizontal cuts as a plain product of embedded
/// layer matrices, bottom layer applied first.
fn dense_unitary(circuit: &GateCircuit, t_from: usize, t_to: usize) -> Vec<Complex64> {
    let n = circuit.num_sites();
    let dim = 1usize << n;
    let mut u = vec![Complex64::ZERO; dim * dim];
    for i in 0..dim {
        u[i * dim + i] = Complex64::ONE;
    }
    for layer in t_from..t_to {
        for bond in circuit.layer_bonds(layer) {
            let (a, b) = circuit.bond_sites(bond);
            let g = embed_gate(n, &circuit.gate_at(layer, bond).unwrap().m, a, b);
            u = mat_mul(n, &g, &u);
        }
    }
    u
}

#[test]
fn evolve_matches_dense_matrix_product() {
    let circuit = GateCircuit::random(6, 4, 101).unwrap();
    let u = dense_unitary(&circuit, 1, 4);
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    for _ in 0..5 {
        let psi = StateVector::random(6, &mut rng);
        let fast = psi
            .evolve(
                &circuit,
                &LatticeCut::constant(6, 1),
                &LatticeCut::constant(6, 4),
            )
            .unwrap();
        let slow = mat_vec(6, &u, psi.amplitudes());
        let diff: f64 = fast
            .amplitudes()
            .iter()
            .zip(&slow)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-12, "dense oracle disagrees: {diff}");
    }
}

#[test]
fn round_trip_matches_dense_adjoint() {
    let circuit = GateCircuit::random(6, 4, 103).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let psi = StateVector::random_fixed_number(6, 2, &mut rng);
    let there = psi
        .evolve(
            &circuit,
            &LatticeCut::constant(6, 0),
            &LatticeCut::constant(6, 4),
        )
        .unwrap();
    let back = there
        .evolve(
            &circuit,
            &LatticeCut::constant(6, 4),
            &LatticeCut::constant(6, 0),
        )
        .unwrap();
    assert!(psi.distance(&back) < 1e-10);
}

/// Space-time reachability oracle for the discrete grown set: monotone
/// future and past BFS over wire and gate edges, independent of the
/// crossed-gate decomposition used by the implementation.
fn bfs_cone(circuit: &GateCircuit, from: &LatticeCut, to: &LatticeCut, seed: SiteSet) -> SiteSet {
    let n = circuit.num_sites();
    let depth = circuit.depth();
    let node = |site: usize, level: usize| level * n + site;
    let mut future = vec![false; n * (depth + 1)];
    let mut past = vec![false; n * (depth + 1)];
    for s in seed.sites() {
        future[node(s, from.level(s) as usize)] = true;
        past[node(s, from.level(s) as usize)] = true;
    }
    // Future: sweep levels upward.
    for level in 0..depth {
        for site in 0..n {
            if !future[node(site, level)] {
                continue;
            }
            future[node(site, level + 1)] = true;
            for bond in [site, (site + n - 1) % n] {
                if circuit.has_gate(level, bond) {
                    let (a, b) = circuit.bond_sites(bond);
                    future[node(a, level + 1)] = true;
                    future[node(b, level + 1)] = true;
                }
            }
        }
    }
    // Past: sweep levels downward.
    for level in (1..=depth).rev() {
        for site in 0..n {
            if !past[node(site, level)] {
                continue;
            }
            past[node(site, level - 1)] = true;
            for bond in [site, (site + n - 1) % n] {
                if circuit.has_gate(level - 1, bond) {
                    let (a, b) = circuit.bond_sites(bond);
                    past[node(a, level - 1)] = true;
                    past[node(b, level - 1)] = true;
                }
            }
        }
    }
    let mut out = SiteSet::EMPTY;
    for site in 0..n {
        let l = to.level(site) as usize;
        if future[node(site, l)] || past[node(site, l)] {
            out.insert(site);
        }
    }
    out
}

#[test]
fn grow_sites_equals_causal_bfs_on_random_cuts() {
    let circuit = GateCircuit::random(10, 8, 107).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    for trial in 0..50 {
        let from = LatticeCut::random(&circuit, &mut rng, 0, 8, 200).unwrap();
        let to = LatticeCut::random(&circuit, &mut rng, 0, 8, 200).unwrap();
        let seed_site = rand::Rng::gen_range(&mut rng, 0..10usize);
        let seed = SiteSet::from_sites(&[seed_site]);
        let fast = grow_sites(&circuit, &from, &to, seed);
        let slow = bfs_cone(&circuit, &from, &to, seed);
        assert_eq!(fast, slow, "trial {trial}: cone mismatch");
    }
}

#[test]
fn pvm_factorizes_over_all_sets() {
    // P(∀B) acts as the tensor of the restricted projectors through the
    // bipartite index maps.
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let psi = StateVector::random(6, &mut rng);
    let a = SiteSet::from_sites(&[1, 3, 4]);
    let b = SiteSet::from_sites(&[0, 1, 4]);
    let view = psi.factorize(a);
    let all_b = cauchyborn_core::config::ConfigSet::All(b);
    let (direct, _) = psi.apply_projector(&all_b);
    // Tensor route: keep (row, col) iff row-config ⊆ A∩B and col-config ⊆ Aᶜ∩B.
    let mut tensor = vec![Complex64::ZERO; 1 << 6];
    for row in 0..view.rows() {
        for col in 0..view.cols() {
            let q = view.join_index(row, col);
            let qa = q as u32 & a.0;
            let qc = q as u32 & !a.0;
            let keep_a = qa & !b.0 == 0;
            let keep_c = qc & !b.0 == 0;
            if keep_a && keep_c {
                tensor[q] = view.amp(row, col);
            }
        }
    }
    for (x, y) in direct.amplitudes().iter().zip(&tensor) {
        assert!((x - y).norm() < 1e-15);
    }
}

#[test]
fn three_way_factorization_is_associative() {
    // Splitting A then B inside the remainder equals splitting A∪B at once,
    // as index maps.
    let a = SiteSet::from_sites(&[0, 2]);
    let b = SiteSet::from_sites(&[3]);
    let n = 5usize;
    let rest: Vec<usize> = (0..n).filter(|&s| !a.contains(s)).collect();
    for q in 0..(1usize << n) {
        // Route 1: split off A, then B inside the complement.
        let (row_a, col_rest) = cauchyborn_core::lattice::split_index(
            q,
            &(0..n).filter(|&s| a.contains(s)).collect::<Vec<_>>(),
            &rest,
        );
        let rest_b: Vec<usize> = (0..rest.len()).filter(|&i| b.contains(rest[i])).collect();
        let rest_c: Vec<usize> = (0..rest.len()).filter(|&i| !b.contains(rest[i])).collect();
        let (row_b, col_c) = cauchyborn_core::lattice::split_index(col_rest, &rest_b, &rest_c);
        // Route 2: split off A∪B directly, ordered (A sites, B sites).
        let ab = a.union(b);
        let ab_sites: Vec<usize> = (0..n).filter(|&s| ab.contains(s)).collect();
        let c_sites: Vec<usize> = (0..n).filter(|&s| !ab.contains(s)).collect();
        let (row_ab, col_c2) = cauchyborn_core::lattice::split_index(q, &ab_sites, &c_sites);
        // Recombine row_ab into its (A, B) parts.
        let a_in_ab: Vec<usize> = (0..ab_sites.len())
            .filter(|&i| a.contains(ab_sites[i]))
            .collect();
        let b_in_ab: Vec<usize> = (0..ab_sites.len())
            .filter(|&i| b.contains(ab_sites[i]))
            .collect();
        let (row_a2, row_b2) = cauchyborn_core::lattice::split_index(row_ab, &a_in_ab, &b_in_ab);
        assert_eq!((row_a, row_b, col_c), (row_a2, row_b2, col_c2), "q={q:#b}");
    }
}

/// The pulled-back piece projector equals the diagonal projector for the
/// same outcome row on the target cut, as operators (checked on the full
/// basis).
#[test]
fn piece_projector_pulls_back_to_the_diagonal() {
    let circuit = GateCircuit::random(8, 6, 109).unwrap();
    let upsilon = LatticeCut::from_levels(vec![2, 1, 1, 2, 2, 1, 1, 2]);
    upsilon.validate(&circuit).unwrap();
    let pieces = upsilon.flat_pieces();
    let regions = [SiteSet::from_sites(&[1, 2]), SiteSet::from_sites(&[4])];
    for piece in pieces.iter().filter(|p| {
        regions
            .iter()
            .any(|r| !r.intersection(p.site_set()).is_empty())
    }) {
        let e_k = upsilon.hyperplane_extension(&circuit, piece).unwrap();
        let scope = piece.site_set();
        let b_k: Vec<SiteSet> = regions.iter().map(|r| r.intersection(scope)).collect();
        for s_bits in 0..(1u32 << regions.len()) {
            let s_k = OutcomeVector::new(s_bits, regions.len());
            let m = make_m_piece(s_k, &b_k, scope).unwrap();
            for q in 0..(1usize << 8) {
                let psi = StateVector::basis(8, Configuration(q as u32));
                // Route 1: evolve to E_k, project, evolve back.
                let up = psi.evolve(&circuit, &upsilon, &e_k).unwrap();
                let (projected, _) = up.apply_projector(&m);
                let back = projected.evolve(&circuit, &e_k, &upsilon).unwrap();
                // Route 2: project diagonally on the target cut.
                let (direct, _) = psi.apply_projector(&m);
                assert!(
                    back.distance(&direct) < 1e-10,
                    "q={q:#b}, s={}",
                    s_k.label()
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn evolution_is_path_independent(seed in 0u64..200, state_seed in 0u64..100) {
        let circuit = GateCircuit::random(8, 6, seed.wrapping_mul(31)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a = LatticeCut::random(&circuit, &mut rng, 0, 6, 200).unwrap();
        let b = LatticeCut::random(&circuit, &mut rng, 0, 6, 200).unwrap();
        let c = LatticeCut::random(&circuit, &mut rng, 0, 6, 200).unwrap();
        let mut srng = ChaCha12Rng::seed_from_u64(state_seed);
        let psi = StateVector::random(8, &mut srng);
        let direct = psi.evolve(&circuit, &a, &b).unwrap();
        let via_c = psi.evolve(&circuit, &a, &c).unwrap().evolve(&circuit, &c, &b).unwrap();
        prop_assert!(direct.distance(&via_c) < 1e-10);
        prop_assert!((direct.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn evolution_conserves_particle_number(seed in 0u64..200, particles in 1usize..4) {
        let circuit = GateCircuit::random(8, 6, seed.wrapping_mul(37)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xfeed);
        let a = LatticeCut::random(&circuit, &mut rng, 0, 6, 200).unwrap();
        let b = LatticeCut::random(&circuit, &mut rng, 0, 6, 200).unwrap();
        let psi = StateVector::random_fixed_number(8, particles, &mut rng);
        let out = psi.evolve(&circuit, &a, &b).unwrap();
        prop_assert!((out.sector_weights()[particles] - 1.0).abs() < 1e-10);
    }
}
