//! Finite configuration space over lattice sites and the exact set algebra
//! performed on it.
//!
//! A configuration is the set of occupied sites of a cut, held as a bitmask;
//! the whole space for S sites has 2^S elements (S ≤ 24), small enough that
//! exhaustive enumeration is a practical oracle. Configuration sets stay
//! symbolic (an expression tree over the atoms ∃(A), ∅(A), ∀(A)) and are
//! evaluated exactly per configuration; a materializer to an explicit bitset
//! is available for hot paths.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on sites so that 2^S enumeration stays desk-scale.
pub const MAX_SITES: usize = 24;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("at most {MAX_SITES} sites are supported, got {0}")]
    TooManySites(usize),
    #[error("regions {0} and {1} overlap")]
    OverlappingRegions(usize, usize),
    #[error("region {0} is not contained in the scope")]
    RegionOutsideScope(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("squeeze precondition violated for region {0}: need shrunk ⊆ region ⊆ grown")]
    SqueezeInclusion(usize),
}

/// A subset of the sites of a lattice cut.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteSet(pub u32);

impl SiteSet {
    pub const EMPTY: SiteSet = SiteSet(0);

    pub fn from_sites(sites: &[usize]) -> Self {
        let mut bits = 0u32;
        for &s in sites {
            assert!(s < MAX_SITES, "site index {s} out of range");
            bits |= 1 << s;
        }
        SiteSet(bits)
    }

    pub fn full(num_sites: usize) -> Self {
        assert!(num_sites <= MAX_SITES);
        if num_sites == 32 {
            SiteSet(u32::MAX)
        } else {
            SiteSet((1u32 << num_sites) - 1)
        }
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    pub fn insert(&mut self, site: usize) {
        self.0 |= 1 << site;
    }

    pub fn union(&self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 | other.0)
    }

    pub fn intersection(&self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 & other.0)
    }

    pub fn difference(&self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 & !other.0)
    }

    pub fn complement_in(&self, universe: SiteSet) -> SiteSet {
        SiteSet(!self.0 & universe.0)
    }

    pub fn is_subset_of(&self, other: SiteSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        (0..MAX_SITES).filter(move |&s| self.contains(s))
    }
}

/// A finite particle configuration: the occupied sites of a cut.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration(pub u32);

impl Configuration {
    pub fn occupied(&self) -> SiteSet {
        SiteSet(self.0)
    }

    pub fn particle_count(&self) -> usize {
        self.0.count_ones() as usize
    }
}

/// Symbolic set of configurations, closed under intersection, union and
/// complement over the atoms ∃(A) (some particle in A), ∅(A) (no particle in
/// A) and ∀(A) (all particles in A). The identity ∃(A)ᶜ = ∅(A) = ∀(Aᶜ)
/// holds by the evaluation semantics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConfigSet {
    /// Every configuration.
    Full,
    /// At least one particle in the region.
    Exists(SiteSet),
    /// No particle in the region.
    Empty(SiteSet),
    /// All particles inside the region.
    All(SiteSet),
    Complement(Box<ConfigSet>),
    Intersection(Vec<ConfigSet>),
    Union(Vec<ConfigSet>),
}

impl ConfigSet {
    /// Exact membership test for one configuration. `num_sites` fixes the
    /// universe for ∀ and complement.
    pub fn contains(&self, q: Configuration, num_sites: usize) -> bool {
        match self {
            ConfigSet::Full => true,
            ConfigSet::Exists(a) => q.0 & a.0 != 0,
            ConfigSet::Empty(a) => q.0 & a.0 == 0,
            ConfigSet::All(a) => q.0 & !a.0 & SiteSet::full(num_sites).0 == 0,
            ConfigSet::Complement(inner) => !inner.contains(q, num_sites),
            ConfigSet::Intersection(parts) => parts.iter().all(|p| p.contains(q, num_sites)),
            ConfigSet::Union(parts) => parts.iter().any(|p| p.contains(q, num_sites)),
        }
    }

    pub fn complement(self) -> ConfigSet {
        ConfigSet::Complement(Box::new(self))
    }

    pub fn intersect(parts: Vec<ConfigSet>) -> ConfigSet {
        ConfigSet::Intersection(parts)
    }

    pub fn union(parts: Vec<ConfigSet>) -> ConfigSet {
        ConfigSet::Union(parts)
    }

    /// Materializes the membership predicate into an explicit bitset over
    /// all 2^S configurations.
    pub fn materialize(&self, num_sites: usize) -> Result<ConfigMask, ConfigError> {
        if num_sites > MAX_SITES {
            return Err(ConfigError::TooManySites(num_sites));
        }
        let total = 1usize << num_sites;
        let mut words = vec![0u64; total.div_ceil(64)];
        for q in 0..total {
            if self.contains(Configuration(q as u32), num_sites) {
                words[q / 64] |= 1 << (q % 64);
            }
        }
        Ok(ConfigMask { num_sites, words })
    }
}

/// Explicit bitset over all configurations of a cut.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigMask {
    pub num_sites: usize,
    words: Vec<u64>,
}

impl ConfigMask {
    pub fn contains(&self, q: Configuration) -> bool {
        let i = q.0 as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Click/no-click outcome vector L over the r detector regions; bit ℓ set
/// means a detection in region ℓ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeVector {
    pub bits: u32,
    pub len: usize,
}

impl OutcomeVector {
    pub fn new(bits: u32, len: usize) -> Self {
        debug_assert!(len <= 32 && bits < (1u64 << len) as u32 || len == 32);
        Self { bits, len }
    }

    pub fn from_bools(flags: &[bool]) -> Self {
        let mut bits = 0u32;
        for (i, &f) in flags.iter().enumerate() {
            if f {
                bits |= 1 << i;
            }
        }
        Self {
            bits,
            len: flags.len(),
        }
    }

    pub fn get(&self, ell: usize) -> bool {
        self.bits >> ell & 1 == 1
    }

    /// All 2^r outcome vectors of length r in increasing bit order.
    pub fn all(len: usize) -> impl Iterator<Item = OutcomeVector> {
        (0..(1u32 << len)).map(move |bits| OutcomeVector { bits, len })
    }

    pub fn label(&self) -> String {
        (0..self.len)
            .map(|ell| if self.get(ell) { '1' } else { '0' })
            .collect()
    }
}

/// Per-piece detection outcomes s_{kℓ}: one row per flat piece k, one column
/// per detector region ℓ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    pub rows: Vec<OutcomeVector>,
}

impl OutcomeMatrix {
    pub fn new(rows: Vec<OutcomeVector>) -> Self {
        Self { rows }
    }

    pub fn r(&self) -> usize {
        self.rows.first().map_or(0, |row| row.len)
    }

    pub fn get(&self, k: usize, ell: usize) -> bool {
        self.rows[k].get(ell)
    }

    pub fn label(&self) -> String {
        self.rows
            .iter()
            .map(|r| r.label())
            .collect::<Vec<_>>()
            .join("|")
    }

    /// All outcome matrices with `k` rows over `r` detectors.
    pub fn all(k: usize, r: usize) -> Vec<OutcomeMatrix> {
        let mut out = vec![OutcomeMatrix::new(vec![])];
        for _ in 0..k {
            let mut next = Vec::with_capacity(out.len() << r);
            for m in &out {
                for row in OutcomeVector::all(r) {
                    let mut rows = m.rows.clone();
                    rows.push(row);
                    next.push(OutcomeMatrix::new(rows));
                }
            }
            out = next;
        }
        out
    }
}

/// The set of configurations compatible with outcome vector L for a
/// partition P_1..P_r: intersection over ℓ of ∃(P_ℓ) when L_ℓ = 1 and
/// ∅(P_ℓ) when L_ℓ = 0.
pub fn make_m_partition(partition: &[SiteSet], l: OutcomeVector) -> Result<ConfigSet, ConfigError> {
    for i in 0..partition.len() {
        for j in (i + 1)..partition.len() {
            if !partition[i].intersection(partition[j]).is_empty() {
                return Err(ConfigError::OverlappingRegions(i, j));
            }
        }
    }
    if l.len != partition.len() {
        return Err(ConfigError::ShapeMismatch(format!(
            "outcome length {} vs {} regions",
            l.len,
            partition.len()
        )));
    }
    Ok(ConfigSet::intersect(
        partition
            .iter()
            .enumerate()
            .map(|(ell, &p)| {
                if l.get(ell) {
                    ConfigSet::Exists(p)
                } else {
                    ConfigSet::Empty(p)
                }
            })
            .collect(),
    ))
}

/// Outcome-matrix compatibility with L: for each ℓ, L_ℓ = 1 requires some
/// row with s_{kℓ} = 1 and L_ℓ = 0 requires all rows zero in column ℓ.
pub fn compatible(s: &OutcomeMatrix, l: OutcomeVector) -> bool {
    debug_assert!(s.rows.iter().all(|row| row.len == l.len));
    for ell in 0..l.len {
        let any = s.rows.iter().any(|row| row.get(ell));
        if l.get(ell) && !any {
            return false;
        }
        if !l.get(ell) && any {
            return false;
        }
    }
    true
}

/// Compatibility set for the outcomes of one flat piece: intersection over ℓ
/// of ∃(B_{kℓ}) or ∅(B_{kℓ}), atoms restricted to the piece's scope.
pub fn make_m_piece(
    s_k: OutcomeVector,
    b_k: &[SiteSet],
    scope: SiteSet,
) -> Result<ConfigSet, ConfigError> {
    if s_k.len != b_k.len() {
        return Err(ConfigError::ShapeMismatch(format!(
            "outcome length {} vs {} regions",
            s_k.len,
            b_k.len()
        )));
    }
    for (ell, b) in b_k.iter().enumerate() {
        if !b.is_subset_of(scope) {
            return Err(ConfigError::RegionOutsideScope(ell));
        }
    }
    Ok(ConfigSet::intersect(
        b_k.iter()
            .enumerate()
            .map(|(ell, &b)| {
                if s_k.get(ell) {
                    ConfigSet::Exists(b)
                } else {
                    ConfigSet::Empty(b)
                }
            })
            .collect(),
    ))
}

/// Squeeze compatibility sets (M̂, M̌) for outcome L, given per-region grown
/// and shrunk site sets. The inner set uses the shrunk region for clicks and
/// the grown region for no-clicks; the outer set swaps the roles. The
/// sandwich M̂ ⊆ M_P(L) ⊆ M̌ then holds atom by atom.
pub fn make_squeeze_sets(
    partition: &[SiteSet],
    grown: &[SiteSet],
    shrunk: &[SiteSet],
    l: OutcomeVector,
) -> Result<(ConfigSet, ConfigSet), ConfigError> {
    if grown.len() != partition.len() || shrunk.len() != partition.len() {
        return Err(ConfigError::ShapeMismatch(
            "grown/shrunk/partition lengths differ".into(),
        ));
    }
    for ell in 0..partition.len() {
        if !shrunk[ell].is_subset_of(partition[ell]) || !partition[ell].is_subset_of(grown[ell]) {
            return Err(ConfigError::SqueezeInclusion(ell));
        }
    }
    let inner = ConfigSet::intersect(
        (0..partition.len())
            .map(|ell| {
                if l.get(ell) {
                    ConfigSet::Exists(shrunk[ell])
                } else {
                    ConfigSet::Empty(grown[ell])
                }
            })
            .collect(),
    );
    let outer = ConfigSet::intersect(
        (0..partition.len())
            .map(|ell| {
                if l.get(ell) {
                    ConfigSet::Exists(grown[ell])
                } else {
                    ConfigSet::Empty(shrunk[ell])
                }
            })
            .collect(),
    );
    Ok((inner, outer))
}
