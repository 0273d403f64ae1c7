//! Sampling and expansion of interconnected directed-cycle chains.
//!
//! Two models produce the same condensed data `(A, L_1..L_k)`:
//! independent-arc sampling with geometric lengths ([`sample_arcmod`]) and
//! uniform edge removal on a fixed `n`-cycle ([`sample_cyclemod`]). Cyclemod
//! sampling works directly in condensed coordinates; [`bijection_t`] is the
//! exact correspondence between `(lengths, rotation)` pairs and labeled
//! edge-removal realizations, so the `n`-vertex graph never has to be built.
//!
//! [`expand`] materializes the sparse `N x N` transition matrix with entry
//! convention `(destination, source)`, under which the eigenvalue equation
//! reads `mu * y[i,l] = y[i,l-1]` along each arc. Arcs are laid out
//! consecutively in flat index order, making the expansion the block-companion
//! linearization of the condensed problem.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
// f64 math resolves through libm on no_std targets; host builds shadow
// this with the inherent std methods
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interconnect::{InterconnectMatrix, STOCHASTIC_TOL};
use crate::linalg::DenseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("k = {k} does not match interconnection dimension {a_k}")]
    DimensionMismatch { k: usize, a_k: usize },
    #[error("cannot remove k = {k} edges from an n = {n} cycle")]
    KExceedsN { k: usize, n: usize },
    #[error("arc lengths sum to {sum}, expected n = {n}")]
    LengthSumMismatch { sum: usize, n: usize },
    #[error("rotation j = {j} outside 1..={n}")]
    RotationOutOfRange { j: usize, n: usize },
    #[error("arc lengths must be positive and nonempty")]
    BadLengths,
    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
}

/// Node counts per arc, all at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcLengths(Vec<usize>);

impl ArcLengths {
    pub fn new(lengths: Vec<usize>) -> Result<Self, ChainError> {
        if lengths.is_empty() || lengths.contains(&0) {
            return Err(ChainError::BadLengths);
        }
        Ok(Self(lengths))
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        *self.0.iter().max().expect("nonempty")
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl core::ops::Index<usize> for ArcLengths {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// How a condensed chain was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Provenance {
    Arcmod {
        #[serde(rename = "L")]
        l: f64,
    },
    Cyclemod {
        n: usize,
        /// Position of the first arc's start vertex, 1-based.
        #[serde(rename = "j")]
        rotation: usize,
    },
}

/// The canonical chain representation: interconnection matrix, arc lengths
/// and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainRepr", into = "ChainRepr")]
pub struct CondensedChain {
    a: InterconnectMatrix,
    lengths: ArcLengths,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct ChainRepr {
    k: usize,
    lengths: Vec<usize>,
    provenance: Provenance,
    #[serde(rename = "A")]
    a: InterconnectMatrix,
}

impl From<CondensedChain> for ChainRepr {
    fn from(c: CondensedChain) -> Self {
        ChainRepr {
            k: c.k(),
            lengths: c.lengths.0.clone(),
            provenance: c.provenance,
            a: c.a,
        }
    }
}

impl TryFrom<ChainRepr> for CondensedChain {
    type Error = ChainError;

    fn try_from(r: ChainRepr) -> Result<Self, ChainError> {
        if r.k != r.a.k() {
            return Err(ChainError::DimensionMismatch { k: r.k, a_k: r.a.k() });
        }
        CondensedChain::new(r.a, ArcLengths::new(r.lengths)?, r.provenance)
    }
}

impl CondensedChain {
    pub fn new(
        a: InterconnectMatrix,
        lengths: ArcLengths,
        provenance: Provenance,
    ) -> Result<Self, ChainError> {
        if lengths.k() != a.k() {
            return Err(ChainError::DimensionMismatch { k: lengths.k(), a_k: a.k() });
        }
        if let Provenance::Cyclemod { n, rotation } = provenance {
            let sum = lengths.total();
            if sum != n {
                return Err(ChainError::LengthSumMismatch { sum, n });
            }
            if rotation == 0 || rotation > n {
                return Err(ChainError::RotationOutOfRange { j: rotation, n });
            }
        }
        Ok(Self { a, lengths, provenance })
    }

    pub fn k(&self) -> usize {
        self.a.k()
    }

    pub fn interconnect(&self) -> &InterconnectMatrix {
        &self.a
    }

    pub fn lengths(&self) -> &ArcLengths {
        &self.lengths
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn total_nodes(&self) -> usize {
        self.lengths.total()
    }
}

/// One draw from `Geo(1/L)` with support `{1, 2, ...}` via the inverse CDF:
/// `1 + floor(ln u / ln(1 - 1/L))`, `u` uniform in `(0, 1]`.
pub fn sample_geometric<R: Rng + ?Sized>(l: f64, rng: &mut R) -> Result<usize, ChainError> {
    if !(l >= 1.0) {
        return Err(ChainError::InvalidParameter(alloc::format!(
            "geometric mean parameter L = {l} must be >= 1"
        )));
    }
    if l == 1.0 {
        return Ok(1);
    }
    let u = 1.0 - rng.random::<f64>(); // (0, 1]
    let v = 1.0 + (u.ln() / (1.0 - 1.0 / l).ln()).floor();
    Ok(v as usize)
}

pub(crate) fn sample_lengths<R: Rng + ?Sized>(
    l: f64,
    k: usize,
    rng: &mut R,
) -> Result<ArcLengths, ChainError> {
    let mut lengths = Vec::with_capacity(k);
    for _ in 0..k {
        lengths.push(sample_geometric(l, rng)?);
    }
    ArcLengths::new(lengths)
}

/// Independent-arc chain: `k` i.i.d. `Geo(1/L)` arc lengths joined through
/// `A`.
pub fn sample_arcmod<R: Rng + ?Sized>(
    l: f64,
    k: usize,
    a: InterconnectMatrix,
    rng: &mut R,
) -> Result<CondensedChain, ChainError> {
    if k != a.k() {
        return Err(ChainError::DimensionMismatch { k, a_k: a.k() });
    }
    let lengths = sample_lengths(l, k, rng)?;
    CondensedChain::new(a, lengths, Provenance::Arcmod { l })
}

/// Fixed-size chain: a uniform `k`-subset of the `n` cycle edges is removed
/// and rewired through `A`.
///
/// Sampling happens in condensed coordinates: a sparse partial Fisher-Yates
/// draws the subset in `O(k log k)`, a uniform label choice picks the first
/// removed edge, and consecutive gaps become the arc lengths. The recorded
/// rotation is the start vertex of arc 1, matching [`bijection_t`].
pub fn sample_cyclemod<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    a: InterconnectMatrix,
    rng: &mut R,
) -> Result<CondensedChain, ChainError> {
    if k != a.k() {
        return Err(ChainError::DimensionMismatch { k, a_k: a.k() });
    }
    if k > n {
        return Err(ChainError::KExceedsN { k, n });
    }

    // uniform k-subset of 0..n, sparse Fisher-Yates
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut picks: Vec<usize> = Vec::with_capacity(k);
    for i in 0..k {
        let r = rng.random_range(i..n);
        let vr = *remap.get(&r).unwrap_or(&r);
        let vi = *remap.get(&i).unwrap_or(&i);
        picks.push(vr);
        remap.insert(r, vi);
    }
    picks.sort_unstable();

    // which selected edge is labeled first
    let t = rng.random_range(0..k);

    // arc lengths are cyclic gaps between consecutive removed edges;
    // edge positions are 1-based sources of the removed cycle edges
    let e = |idx: usize| picks[(t + idx) % k] + 1;
    let mut lengths = Vec::with_capacity(k);
    for i in 0..k {
        let prev = e((i + k - 1) % k);
        let cur = e(i);
        lengths.push((cur + n - prev - 1) % n + 1);
    }
    let rotation = e(k - 1) % n + 1; // b_1 = e_k + 1

    CondensedChain::new(a, ArcLengths::new(lengths)?, Provenance::Cyclemod { n, rotation })
}

/// The mapping `T` from `(lengths, rotation)` to the removed edges
/// `(e_i, b_{i+1})` of the `n`-cycle, all labels 1-based.
///
/// Arc 1 occupies `[j, j + L_1 - 1]`, each further arc starts right after the
/// previous one, indices wrapping to `1..=n`; the removed edges are the cycle
/// edges bridging consecutive arcs. This is a bijection onto labeled
/// edge-subset realizations.
pub fn bijection_t(
    lengths: &ArcLengths,
    j: usize,
    n: usize,
) -> Result<Vec<(usize, usize)>, ChainError> {
    let sum = lengths.total();
    if sum != n {
        return Err(ChainError::LengthSumMismatch { sum, n });
    }
    if j == 0 || j > n {
        return Err(ChainError::RotationOutOfRange { j, n });
    }
    let k = lengths.k();
    let wrap = |v: usize| (v - 1) % n + 1;
    let mut ends = Vec::with_capacity(k);
    let mut b = j;
    for i in 0..k {
        let e = wrap(b + lengths[i] - 1);
        ends.push(e);
        b = wrap(e + 1);
    }
    Ok((0..k).map(|i| (ends[i], wrap(ends[i] + 1))).collect())
}

/// Sparse doubly stochastic matrix over the arc-node index set, entries keyed
/// `(destination, source)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
    lengths: Vec<usize>,
    offsets: Vec<usize>,
}

impl StochasticMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.lengths.len()
    }

    pub fn arc_lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Flat index of arc node `(arc, pos)`, `pos` in `0..L_arc`.
    #[inline]
    pub fn flat_index(&self, arc: usize, pos: usize) -> usize {
        debug_assert!(pos < self.lengths[arc]);
        self.offsets[arc] + pos
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn node_at(&self, flat: usize) -> (usize, usize) {
        debug_assert!(flat < self.n);
        let arc = self.offsets.partition_point(|&o| o <= flat) - 1;
        (arc, flat - self.offsets[arc])
    }

    pub fn get(&self, dest: usize, src: usize) -> f64 {
        *self.entries.get(&(dest, src)).unwrap_or(&0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(d, s), &w)| (d, s, w))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Maximum deviation of any row or column sum from 1.
    pub fn stochasticity_defect(&self) -> f64 {
        let mut row = alloc::vec![0.0f64; self.n];
        let mut col = alloc::vec![0.0f64; self.n];
        for (&(d, s), &w) in &self.entries {
            row[d] += w;
            col[s] += w;
        }
        row.iter()
            .chain(col.iter())
            .map(|&s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        let defect = self.stochasticity_defect();
        if defect > STOCHASTIC_TOL {
            return Err(ChainError::NotDoublyStochastic(alloc::format!(
                "row/column sum defect {defect}"
            )));
        }
        Ok(())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n);
        for (&(d, s), &w) in &self.entries {
            m.set(d, s, w);
        }
        m
    }

    /// `M y` for a complex vector.
    pub fn apply(&self, y: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(y.len(), self.n);
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.n];
        for (&(d, s), &w) in &self.entries {
            out[d] += w * y[s];
        }
        out
    }

    pub fn transposed(&self) -> StochasticMatrix {
        let entries = self.entries.iter().map(|(&(d, s), &w)| ((s, d), w)).collect();
        StochasticMatrix {
            n: self.n,
            entries,
            lengths: self.lengths.clone(),
            offsets: self.offsets.clone(),
        }
    }
}

/// Materializes the full transition matrix of a condensed chain: weight-1
/// edges along each arc, and interconnection edges from each arc end
/// `(j, L_j)` to each arc start `(i+1, 1)` with weight `A[i][j]`.
pub fn expand(chain: &CondensedChain) -> StochasticMatrix {
    let k = chain.k();
    let lengths = chain.lengths().as_slice().to_vec();
    let mut offsets = Vec::with_capacity(k + 1);
    let mut acc = 0usize;
    for &l in &lengths {
        offsets.push(acc);
        acc += l;
    }
    offsets.push(acc);
    let n = acc;

    let mut entries = BTreeMap::new();
    for i in 0..k {
        for p in 1..lengths[i] {
            entries.insert((offsets[i] + p, offsets[i] + p - 1), 1.0);
        }
    }
    let a = chain.interconnect();
    for i in 0..k {
        let dest = offsets[(i + 1) % k];
        for j in 0..k {
            let w = a.get(i, j);
            if w != 0.0 {
                let src = offsets[j] + lengths[j] - 1;
                let prev = entries.insert((dest, src), w);
                debug_assert!(prev.is_none(), "edge collision at ({dest},{src})");
            }
        }
    }

    StochasticMatrix { n, entries, lengths, offsets }
}

/// The reversible comparison chain `(M + M^T) / 2`.
pub fn symmetrize(m: &StochasticMatrix) -> StochasticMatrix {
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(d, s), &w) in &m.entries {
        *entries.entry((d, s)).or_insert(0.0) += w / 2.0;
        *entries.entry((s, d)).or_insert(0.0) += w / 2.0;
    }
    StochasticMatrix {
        n: m.n,
        entries,
        lengths: m.lengths.clone(),
        offsets: m.offsets.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interconnect::InterconnectKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn geometric_l1_always_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            assert_eq!(sample_geometric(1.0, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn geometric_rejects_small_l() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_geometric(0.5, &mut rng).is_err());
    }

    #[test]
    fn geometric_mean_and_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trials = 1_000_000usize;
        let mut sum = 0usize;
        for _ in 0..trials {
            sum += sample_geometric(2.0, &mut rng).unwrap();
        }
        let mean = sum as f64 / trials as f64;
        assert!((mean - 2.0).abs() < 0.01, "mean {mean}");

        let mut ones = 0usize;
        for _ in 0..trials {
            if sample_geometric(5.0, &mut rng).unwrap() == 1 {
                ones += 1;
            }
        }
        let p1 = ones as f64 / trials as f64;
        assert!((p1 - 0.2).abs() < 0.002, "P(1) = {p1}");
    }

    #[test]
    fn arcmod_l1_all_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = InterconnectMatrix::complete(3).unwrap();
        let c = sample_arcmod(1.0, 3, a, &mut rng).unwrap();
        assert_eq!(c.lengths().as_slice(), &[1, 1, 1]);
        assert!(matches!(c.provenance(), Provenance::Arcmod { l } if *l == 1.0));
    }

    #[test]
    fn arcmod_dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = InterconnectMatrix::complete(3).unwrap();
        assert!(matches!(
            sample_arcmod(4.0, 5, a, &mut rng),
            Err(ChainError::DimensionMismatch { k: 5, a_k: 3 })
        ));
    }

    #[test]
    fn arcmod_mean_concentration_over_seeds() {
        // oracle: direct simulation; Chebyshev puts the mean of 1000 arcs
        // within [7, 9] for L = 8 with probability well above 0.99
        let a = InterconnectMatrix::complete(1000).unwrap();
        let mut in_window = 0usize;
        let seeds = 300u64;
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = sample_arcmod(8.0, 1000, a.clone(), &mut rng).unwrap();
            let mean = c.total_nodes() as f64 / 1000.0;
            if (7.0..=9.0).contains(&mean) {
                in_window += 1;
            }
        }
        assert!(
            in_window as f64 / seeds as f64 >= 0.99,
            "window rate {}",
            in_window as f64 / seeds as f64
        );
    }

    #[test]
    fn cyclemod_n_equals_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = InterconnectMatrix::complete(5).unwrap();
        let c = sample_cyclemod(5, 5, a, &mut rng).unwrap();
        assert_eq!(c.lengths().as_slice(), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn cyclemod_single_arc() {
        let a = InterconnectMatrix::complete(1).unwrap();
        let mut counts = [0usize; 5];
        let trials = 50_000;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..trials {
            let c = sample_cyclemod(5, 1, a.clone(), &mut rng).unwrap();
            assert_eq!(c.lengths().as_slice(), &[5]);
            match c.provenance() {
                Provenance::Cyclemod { n: 5, rotation } => counts[rotation - 1] += 1,
                other => panic!("bad provenance {other:?}"),
            }
        }
        for &c in &counts {
            let f = c as f64 / trials as f64;
            assert!((f - 0.2).abs() < 0.01, "rotation frequency {f}");
        }
    }

    #[test]
    fn cyclemod_k_exceeds_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = InterconnectMatrix::complete(7).unwrap();
        assert!(matches!(
            sample_cyclemod(5, 7, a, &mut rng),
            Err(ChainError::KExceedsN { k: 7, n: 5 })
        ));
    }

    // independent oracle: realize the selection on an actual cycle and walk it
    fn lengths_by_walking(n: usize, removed_sorted: &[usize], first: usize) -> Vec<usize> {
        let k = removed_sorted.len();
        let start = removed_sorted.iter().position(|&e| e == first).unwrap();
        let mut lens = Vec::with_capacity(k);
        for i in 0..k {
            let prev = removed_sorted[(start + i + k - 1) % k];
            let cur = removed_sorted[(start + i) % k];
            // walk from prev+1 up to cur, counting nodes
            let mut v = prev % n + 1;
            let mut count = 1usize;
            while v != cur {
                v = v % n + 1;
                count += 1;
            }
            lens.push(count);
        }
        lens
    }

    #[test]
    fn cyclemod_composition_distribution_n6_k2() {
        // the 5 ordered compositions of 6 into 2 parts are equiprobable
        let a = InterconnectMatrix::complete(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 100_000usize;
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for _ in 0..trials {
            let c = sample_cyclemod(6, 2, a.clone(), &mut rng).unwrap();
            let l = c.lengths().as_slice();
            *counts.entry((l[0], l[1])).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 5);
        let mut tv = 0.0f64;
        for (&(l1, l2), &c) in &counts {
            assert_eq!(l1 + l2, 6);
            tv += (c as f64 / trials as f64 - 0.2).abs();
        }
        tv /= 2.0;
        assert!(tv < 0.02, "total variation {tv}");
    }

    #[test]
    fn cyclemod_matches_walking_oracle() {
        // the condensed-coordinate sampler must agree with an explicit cycle
        // walk through bijection_t's removed edges
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for &(n, k) in &[(7usize, 3usize), (12, 4), (9, 2), (30, 5)] {
            let a = InterconnectMatrix::complete(k).unwrap();
            for _ in 0..200 {
                let c = sample_cyclemod(n, k, a.clone(), &mut rng).unwrap();
                let Provenance::Cyclemod { n: pn, rotation } = *c.provenance() else {
                    panic!("wrong provenance")
                };
                assert_eq!(pn, n);
                let edges = bijection_t(c.lengths(), rotation, n).unwrap();
                let first = edges[0].0;
                let mut sources: Vec<usize> = edges.iter().map(|&(e, _)| e).collect();
                sources.sort_unstable();
                sources.dedup();
                assert_eq!(sources.len(), k, "removed edges not distinct");
                // arc i ends at removed edge i, so the walk reproduces the
                // lengths in order
                let walked = lengths_by_walking(n, &sources, first);
                assert_eq!(walked, c.lengths().as_slice());
            }
        }
    }

    #[test]
    fn bijection_examples() {
        let l = ArcLengths::new(alloc::vec![2, 1, 2]).unwrap();
        let edges = bijection_t(&l, 1, 5).unwrap();
        assert_eq!(edges, alloc::vec![(2, 3), (3, 4), (5, 1)]);

        let l = ArcLengths::new(alloc::vec![5]).unwrap();
        let edges = bijection_t(&l, 3, 5).unwrap();
        assert_eq!(edges, alloc::vec![(2, 3)]);

        let l = ArcLengths::new(alloc::vec![2, 2]).unwrap();
        assert!(matches!(
            bijection_t(&l, 1, 5),
            Err(ChainError::LengthSumMismatch { sum: 4, n: 5 })
        ));
    }

    #[test]
    fn bijection_round_trip_exhaustive() {
        // T is injective over all compositions and rotations; its image size
        // is (number of compositions) * n labeled selections
        for n in 2..=8usize {
            for k in 1..=3.min(n) {
                let mut images: BTreeMap<Vec<(usize, usize)>, (Vec<usize>, usize)> =
                    BTreeMap::new();
                let mut count = 0usize;
                for lengths in compositions(n, k) {
                    let al = ArcLengths::new(lengths.clone()).unwrap();
                    for j in 1..=n {
                        let edges = bijection_t(&al, j, n).unwrap();
                        count += 1;
                        if let Some(prev) = images.insert(edges.clone(), (lengths.clone(), j)) {
                            panic!("T not injective: {prev:?} vs ({lengths:?}, {j})");
                        }
                        // inverse: gaps between sources recover lengths, e_k+1 recovers j
                        let srcs: Vec<usize> = edges.iter().map(|&(e, _)| e).collect();
                        for i in 0..k {
                            let prev_e = srcs[(i + k - 1) % k];
                            let len = (srcs[i] + n - prev_e - 1) % n + 1;
                            assert_eq!(len, lengths[i]);
                        }
                        assert_eq!(srcs[k - 1] % n + 1, j);
                    }
                }
                assert_eq!(images.len(), count);
            }
        }
    }

    fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 1 {
            return alloc::vec![alloc::vec![n]];
        }
        let mut out = Vec::new();
        for first in 1..=(n - k + 1) {
            for rest in compositions(n - first, k - 1) {
                let mut v = alloc::vec![first];
                v.extend(rest);
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn expand_single_arc_is_directed_cycle() {
        let a = InterconnectMatrix::complete(1).unwrap();
        let c = CondensedChain::new(
            a,
            ArcLengths::new(alloc::vec![4]).unwrap(),
            Provenance::Arcmod { l: 4.0 },
        )
        .unwrap();
        let m = expand(&c);
        assert_eq!(m.dim(), 4);
        assert_eq!(m.nnz(), 4);
        for p in 1..4 {
            assert_eq!(m.get(p, p - 1), 1.0);
        }
        assert_eq!(m.get(0, 3), 1.0);
        m.validate().unwrap();
    }

    #[test]
    fn expand_worked_example() {
        let a = InterconnectMatrix::complete(2).unwrap();
        let c = CondensedChain::new(
            a,
            ArcLengths::new(alloc::vec![1, 2]).unwrap(),
            Provenance::Arcmod { l: 2.0 },
        )
        .unwrap();
        let m = expand(&c);
        assert_eq!(m.dim(), 3);
        // nodes: 0 = (arc 0, pos 0); 1 = (arc 1, pos 0); 2 = (arc 1, pos 1)
        assert_eq!(m.get(2, 1), 1.0);
        assert_eq!(m.get(1, 0), 0.5);
        assert_eq!(m.get(0, 0), 0.5);
        assert_eq!(m.get(0, 2), 0.5);
        assert_eq!(m.get(1, 2), 0.5);
        assert_eq!(m.nnz(), 5);
        m.validate().unwrap();
        assert_eq!(m.flat_index(1, 1), 2);
        assert_eq!(m.node_at(2), (1, 1));
        assert_eq!(m.node_at(0), (0, 0));
    }

    #[test]
    fn expansion_doubly_stochastic_across_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &k in &[1usize, 2, 4, 8, 16] {
            for &l in &[1.0f64, 2.0, 8.0, 32.0] {
                let a = InterconnectMatrix::complete(k).unwrap();
                let c = sample_arcmod(l, k, a.clone(), &mut rng).unwrap();
                expand(&c).validate().unwrap();
                let n = ((l as usize) * k).max(k);
                let c = sample_cyclemod(n, k, a, &mut rng).unwrap();
                assert_eq!(c.total_nodes(), n);
                expand(&c).validate().unwrap();
            }
        }
    }

    #[test]
    fn symmetrize_directed_cycle() {
        let a = InterconnectMatrix::complete(1).unwrap();
        let c = CondensedChain::new(
            a,
            ArcLengths::new(alloc::vec![6]).unwrap(),
            Provenance::Arcmod { l: 6.0 },
        )
        .unwrap();
        let s = symmetrize(&expand(&c));
        for p in 0..6 {
            assert_eq!(s.get(p, (p + 1) % 6), 0.5);
            assert_eq!(s.get((p + 1) % 6, p), 0.5);
        }
        s.validate().unwrap();

        // idempotent on symmetric input
        assert_eq!(symmetrize(&s), s);
    }

    #[test]
    fn symmetrize_random_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = InterconnectMatrix::bollobas_chung(6, &mut rng).unwrap();
        let c = sample_cyclemod(40, 6, a, &mut rng).unwrap();
        let s = symmetrize(&expand(&c));
        s.validate().unwrap();
        for (d, src, w) in s.entries() {
            assert_eq!(s.get(src, d), w);
        }
    }

    #[test]
    fn chain_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = InterconnectMatrix::complete(3).unwrap();
        let c = sample_cyclemod(17, 3, a, &mut rng).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"type\":\"cyclemod\""));
        assert!(json.contains("\"k\":3"));
        assert!(json.contains("\"A\":"));
        let back: CondensedChain = serde_json::from_str(&json).unwrap();
        assert_eq!(c, back);

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = InterconnectMatrix::complete(2).unwrap();
        let c = sample_arcmod(8.0, 2, a, &mut rng).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"L\":8.0"));
        let back: CondensedChain = serde_json::from_str(&json).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn invalid_chain_json_rejected() {
        // lengths do not sum to n
        let a = InterconnectMatrix::complete(2).unwrap();
        let a_json = serde_json::to_string(&a).unwrap();
        let bad = alloc::format!(
            "{{\"k\":2,\"lengths\":[2,2],\"provenance\":{{\"type\":\"cyclemod\",\"n\":6,\"j\":1}},\"A\":{a_json}}}"
        );
        assert!(serde_json::from_str::<CondensedChain>(&bad).is_err());
    }

    #[test]
    fn long_arc_frequency_matches_tail_bound() {
        // frequency of max L_i exceeding M L ln k stays under 2 k^(1-M)
        // plus three standard errors (k = 64, L = 16, M = 3)
        let k = 64usize;
        let l = 16.0f64;
        let m = 3.0f64;
        let threshold = m * l * (k as f64).ln();
        let trials = 10_000usize;
        let mut exceed = 0usize;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..trials {
            let lens = sample_lengths(l, k, &mut rng).unwrap();
            if (lens.max() as f64) > threshold {
                exceed += 1;
            }
        }
        let bound = 2.0 * (k as f64).powf(1.0 - m);
        let se = (bound * (1.0 - bound) / trials as f64).sqrt();
        let freq = exceed as f64 / trials as f64;
        assert!(freq <= bound + 3.0 * se, "freq {freq} vs bound {bound} + 3se {se}");
    }

    #[test]
    fn lengths_invariants() {
        assert!(ArcLengths::new(alloc::vec![]).is_err());
        assert!(ArcLengths::new(alloc::vec![1, 0, 2]).is_err());
        let l = ArcLengths::new(alloc::vec![3, 1, 4]).unwrap();
        assert_eq!(l.k(), 3);
        assert_eq!(l.total(), 8);
        assert_eq!(l.max(), 4);
    }

    #[test]
    fn custom_kind_survives_chain_json() {
        let entries = alloc::vec![0.5, 0.5, 0.5, 0.5];
        let a = InterconnectMatrix::from_entries(2, InterconnectKind::Custom, entries).unwrap();
        let c = CondensedChain::new(
            a,
            ArcLengths::new(alloc::vec![1, 2]).unwrap(),
            Provenance::Arcmod { l: 2.0 },
        )
        .unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: CondensedChain = serde_json::from_str(&json).unwrap();
        assert_eq!(back.interconnect().kind(), InterconnectKind::Custom);
    }
}
