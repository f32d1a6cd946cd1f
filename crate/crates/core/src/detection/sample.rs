//! Monte Carlo sampling of the sequential process and the chi-square
//! goodness-of-fit cross-check against the exact distribution.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::plan::DetectionPlan;
use super::process::flat_measure;
use super::{DetectionError, DEAD_BRANCH_TOL};
use crate::config::{OutcomeMatrix, OutcomeVector};
use crate::lattice::StateVector;

/// Lazily built branch tree: the post-measurement state is a deterministic
/// function of the outcome history, so sampled paths share nodes.
struct TreeNode {
    /// State on the extension cut of piece `depth`, before its measurements.
    state: StateVector,
    children: BTreeMap<u32, (f64, usize)>,
    expanded: bool,
}

/// Samples `shots` runs of the sequential detection process (canonical
/// piece order), returning counts per outcome matrix.
pub fn sample_sequential(
    plan: &DetectionPlan,
    shots: usize,
    rng: &mut impl Rng,
) -> Result<BTreeMap<OutcomeMatrix, u64>, DetectionError> {
    let ctx = plan.validate()?;
    let k_count = ctx.relevant.len();
    let root_state =
        plan.initial_state
            .evolve(&plan.circuit, &plan.initial_cut, &ctx.extensions[0])?;
    let mut nodes = vec![TreeNode {
        state: root_state,
        children: BTreeMap::new(),
        expanded: false,
    }];
    let mut node_depth = vec![0usize];

    let mut counts: BTreeMap<OutcomeMatrix, u64> = BTreeMap::new();
    for _ in 0..shots {
        let mut node = 0usize;
        let mut rows = Vec::with_capacity(k_count);
        for depth in 0..k_count {
            if !nodes[node].expanded {
                // Enumerate this piece's outcomes once; children hold the
                // collapsed states evolved to the next extension cut.
                let state = nodes[node].state.clone();
                let mut partial: Vec<(f64, StateVector, u32)> = vec![(1.0, state, 0u32)];
                for ell in 0..ctx.r {
                    let b_kl = ctx.b[depth][ell];
                    let mut grown = Vec::new();
                    for (p, s, bits) in partial {
                        if b_kl.is_empty() {
                            grown.push((p, s, bits));
                            continue;
                        }
                        for m in flat_measure(&s, b_kl) {
                            if let Some(collapsed) = m.state {
                                grown.push((
                                    p * m.prob,
                                    collapsed,
                                    bits | (u32::from(m.outcome) << ell),
                                ));
                            }
                        }
                    }
                    partial = grown;
                }
                for (p, s, bits) in partial {
                    if p <= DEAD_BRANCH_TOL {
                        continue;
                    }
                    let next_state = if depth + 1 < k_count {
                        s.evolve(
                            &plan.circuit,
                            &ctx.extensions[depth],
                            &ctx.extensions[depth + 1],
                        )?
                    } else {
                        s
                    };
                    let idx = nodes.len();
                    nodes.push(TreeNode {
                        state: next_state,
                        children: BTreeMap::new(),
                        expanded: false,
                    });
                    node_depth.push(depth + 1);
                    nodes[node].children.insert(bits, (p, idx));
                }
                nodes[node].expanded = true;
            }
            // Draw an outcome according to the conditional probabilities.
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = None;
            for (&bits, &(p, idx)) in &nodes[node].children {
                acc += p;
                if u < acc {
                    chosen = Some((bits, idx));
                    break;
                }
            }
            let (bits, idx) = chosen.unwrap_or_else(|| {
                let (&bits, &(_, idx)) = nodes[node].children.iter().next_back().unwrap();
                (bits, idx)
            });
            rows.push(OutcomeVector::new(bits, ctx.r));
            node = idx;
        }
        *counts.entry(OutcomeMatrix::new(rows)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Chi-square goodness-of-fit of sampled counts against exact
/// probabilities. Cells with expected count below 5 are pooled.
#[derive(Clone, Debug, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub pooled_cells: usize,
}

pub fn chi_square_fit(
    counts: &BTreeMap<OutcomeMatrix, u64>,
    exact: &BTreeMap<OutcomeMatrix, f64>,
    shots: u64,
) -> ChiSquare {
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut pooled = (0.0f64, 0.0f64);
    let mut pooled_cells = 0usize;
    for (s, &p) in exact {
        let expected = p * shots as f64;
        let observed = counts.get(s).copied().unwrap_or(0) as f64;
        if expected < 5.0 {
            pooled.0 += observed;
            pooled.1 += expected;
            pooled_cells += 1;
        } else {
            cells.push((observed, expected));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let statistic: f64 = cells
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).unwrap().cdf(statistic)
    };
    ChiSquare {
        statistic,
        dof,
        p_value,
        pooled_cells,
    }
}
