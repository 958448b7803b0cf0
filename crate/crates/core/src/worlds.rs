//! Finite sample spaces, per-world distributions, and parameter-space grids.
//!
//! A world pairs a parameter value theta with the probability distribution it
//! induces over all data sequences of the prescribed length. Everything is an
//! exact rational; a distribution is valid only when it sums to exactly 1.

use std::collections::BTreeSet;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Default cap on the number of enumerated sequences (`|alphabet|^n`).
pub const DEFAULT_MAX_SEQUENCES: usize = 1 << 20;

/// A finite, nonempty set of distinct outcome labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Domain("alphabet must be nonempty".into()));
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if l.is_empty() {
                return Err(Error::Domain("alphabet labels must be nonempty strings".into()));
            }
            if !seen.insert(l.clone()) {
                return Err(Error::Domain(format!("duplicate alphabet label {l:?}")));
            }
        }
        Ok(Alphabet { labels })
    }

    /// The two-label `R`/`N` alphabet of the urn model.
    pub fn binary() -> Self {
        Alphabet { labels: vec!["R".into(), "N".into()] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// All data sequences of length `n` over an alphabet, addressed by dense ids.
///
/// Sequence id encoding: base-`|alphabet|` digits, first draw most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpace {
    alphabet: Alphabet,
    n: usize,
    seq_count: usize,
}

impl SampleSpace {
    pub fn new(alphabet: Alphabet, n: usize) -> Result<Arc<Self>> {
        Self::with_limit(alphabet, n, DEFAULT_MAX_SEQUENCES)
    }

    pub fn with_limit(alphabet: Alphabet, n: usize, max_sequences: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::Domain("sample size n must be at least 1".into()));
        }
        let mut seq_count: usize = 1;
        for _ in 0..n {
            seq_count = seq_count
                .checked_mul(alphabet.len())
                .filter(|&c| c <= max_sequences)
                .ok_or_else(|| {
                    Error::Domain(format!(
                        "sample space too large: |alphabet|^n = {}^{} exceeds the limit {}",
                        alphabet.len(),
                        n,
                        max_sequences
                    ))
                })?;
        }
        Ok(Arc::new(SampleSpace { alphabet, n, seq_count }))
    }

    pub fn binary(n: usize) -> Result<Arc<Self>> {
        Self::new(Alphabet::binary(), n)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seq_count(&self) -> usize {
        self.seq_count
    }

    /// Outcome indices of a sequence, draw by draw.
    pub fn decode(&self, id: usize) -> Vec<usize> {
        debug_assert!(id < self.seq_count);
        let base = self.alphabet.len();
        let mut digits = vec![0usize; self.n];
        let mut rest = id;
        for t in (0..self.n).rev() {
            digits[t] = rest % base;
            rest /= base;
        }
        digits
    }

    /// Number of draws in sequence `id` equal to outcome `label_idx`.
    pub fn count_label(&self, id: usize, label_idx: usize) -> usize {
        let base = self.alphabet.len();
        let mut rest = id;
        let mut count = 0;
        for _ in 0..self.n {
            if rest % base == label_idx {
                count += 1;
            }
            rest /= base;
        }
        count
    }

    /// Count of the first alphabet label; the success-count statistic `k`.
    pub fn success_count(&self, id: usize) -> usize {
        self.count_label(id, 0)
    }

    /// Sequence rendered by concatenating its outcome labels (e.g. "RRNR").
    pub fn seq_string(&self, id: usize) -> String {
        self.decode(id)
            .into_iter()
            .map(|i| self.alphabet.label(i))
            .collect()
    }

    /// Parses a concatenated-label string back to a sequence id.
    /// Requires all labels to be single characters (the default alphabet is).
    pub fn parse_seq(&self, s: &str) -> Result<usize> {
        if self.alphabet.labels.iter().any(|l| l.chars().count() != 1) {
            return Err(Error::Validation(
                "sequence strings require a single-character alphabet".into(),
            ));
        }
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != self.n {
            return Err(Error::Validation(format!(
                "sequence {s:?} has length {}, expected {}",
                chars.len(),
                self.n
            )));
        }
        let base = self.alphabet.len();
        let mut id = 0usize;
        for c in chars {
            let idx = self
                .alphabet
                .labels
                .iter()
                .position(|l| l.chars().next() == Some(c))
                .ok_or_else(|| Error::Validation(format!("unknown outcome symbol {c:?} in {s:?}")))?;
            id = id * base + idx;
        }
        Ok(id)
    }
}

/// A parameter value together with the distribution it induces over sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    theta: Ratio,
    dist: Vec<Ratio>,
    space: Arc<SampleSpace>,
}

impl World {
    pub fn theta(&self) -> &Ratio {
        &self.theta
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn prob(&self, seq: usize) -> &Ratio {
        &self.dist[seq]
    }

    pub fn dist(&self) -> &[Ratio] {
        &self.dist
    }

    /// Probability mass of `{x : success_count(x) = k}`.
    pub fn count_mass(&self, k: usize) -> Ratio {
        let mut sum = Ratio::zero();
        for id in 0..self.space.seq_count() {
            if self.space.success_count(id) == k {
                sum += &self.dist[id];
            }
        }
        sum
    }

    /// IID world over an arbitrary alphabet: each draw uses `per_draw`
    /// probabilities, and a sequence's probability is the product of its draws.
    pub fn iid(space: Arc<SampleSpace>, theta: Ratio, per_draw: &[Ratio]) -> Result<World> {
        if per_draw.len() != space.alphabet().len() {
            return Err(Error::Shape(format!(
                "per-draw distribution has {} entries, alphabet has {}",
                per_draw.len(),
                space.alphabet().len()
            )));
        }
        for p in per_draw {
            if p.is_negative() || p > &Ratio::one() {
                return Err(Error::Domain(format!(
                    "per-draw probability {} outside [0, 1]",
                    p
                )));
            }
        }
        let total: Ratio = per_draw.iter().sum();
        if !total.is_one() {
            return Err(Error::Domain(format!("per-draw probabilities sum to {}, not 1", total)));
        }
        let mut dist = Vec::with_capacity(space.seq_count());
        for id in 0..space.seq_count() {
            let mut p = Ratio::one();
            for outcome in space.decode(id) {
                p *= &per_draw[outcome];
            }
            dist.push(p);
        }
        Ok(World { theta, dist, space })
    }

    /// Wraps an explicit distribution, validating it sums to exactly 1.
    pub fn explicit(space: Arc<SampleSpace>, theta: Ratio, dist: Vec<Ratio>) -> Result<World> {
        if dist.len() != space.seq_count() {
            return Err(Error::Validation(format!(
                "distribution has {} entries, sample space has {} sequences",
                dist.len(),
                space.seq_count()
            )));
        }
        let mut defects = Vec::new();
        for (id, p) in dist.iter().enumerate() {
            if p.is_negative() {
                defects.push(format!(
                    "negative probability {} at sequence {}",
                    p,
                    space.seq_string(id)
                ));
            }
        }
        let total: Ratio = dist.iter().sum();
        if !total.is_one() {
            defects.push(format!("probabilities sum to {}, not 1", total));
        }
        if !defects.is_empty() {
            return Err(Error::Validation(defects.join("; ")));
        }
        Ok(World { theta, dist, space })
    }
}

/// Bernoulli world: binary alphabet, success probability `theta`, `n` draws.
///
/// A sequence with `k` successes gets probability `theta^k (1-theta)^(n-k)`.
pub fn build_iid_bernoulli(theta: &Ratio, n: usize) -> Result<World> {
    build_iid_bernoulli_in(SampleSpace::binary(n)?, theta)
}

/// Same as [`build_iid_bernoulli`] but sharing an existing binary sample space.
pub fn build_iid_bernoulli_in(space: Arc<SampleSpace>, theta: &Ratio) -> Result<World> {
    if space.alphabet().len() != 2 {
        return Err(Error::Shape("Bernoulli worlds require a binary alphabet".into()));
    }
    if theta.is_negative() || theta > &Ratio::one() {
        return Err(Error::Domain(format!("theta {} outside [0, 1]", theta)));
    }
    let per_draw = vec![theta.clone(), Ratio::one() - theta];
    World::iid(space, theta.clone(), &per_draw)
}

/// A finite ordered set of worlds with pairwise-distinct thetas.
#[derive(Debug, Clone)]
pub struct ParameterSpace {
    space: Arc<SampleSpace>,
    worlds: Vec<World>,
}

impl ParameterSpace {
    pub fn new(worlds: Vec<World>) -> Result<Self> {
        let first = worlds
            .first()
            .ok_or_else(|| Error::Domain("parameter space must be nonempty".into()))?;
        let space = first.space().clone();
        let mut seen = BTreeSet::new();
        for w in &worlds {
            if w.space().as_ref() != space.as_ref() {
                return Err(Error::Shape("all worlds must share one sample space".into()));
            }
            if !seen.insert(w.theta().clone()) {
                return Err(Error::Domain(format!("duplicate theta {} in parameter space", w.theta())));
            }
        }
        Ok(ParameterSpace { space, worlds })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn world(&self, idx: usize) -> &World {
        &self.worlds[idx]
    }

    pub fn index_of_theta(&self, theta: &Ratio) -> Option<usize> {
        self.worlds.iter().position(|w| w.theta() == theta)
    }

    pub fn thetas(&self) -> impl Iterator<Item = &Ratio> {
        self.worlds.iter().map(|w| w.theta())
    }
}

/// Grid of proportions `a / marble_count` for `a = 0..=marble_count`,
/// each paired with its IID Bernoulli world of length `n`.
pub fn make_simple_grid(marble_count: u32, n: usize) -> Result<ParameterSpace> {
    if marble_count == 0 {
        return Err(Error::Domain("marble_count must be at least 1".into()));
    }
    let space = SampleSpace::binary(n)?;
    let mut worlds = Vec::with_capacity(marble_count as usize + 1);
    for a in 0..=marble_count {
        let theta = Ratio::new(a.into(), marble_count.into());
        worlds.push(build_iid_bernoulli_in(space.clone(), &theta)?);
    }
    ParameterSpace::new(worlds)
}

/// Grid of all distinct proportions `a / b` with `b = b_min..=b_max`,
/// `a = 0..=b`. Equal fractions are merged: a world is identified by theta.
pub fn make_compound_grid(b_min: u32, b_max: u32, n: usize) -> Result<ParameterSpace> {
    if b_min == 0 || b_min > b_max {
        return Err(Error::Domain(format!("invalid denominator range {b_min}..={b_max}")));
    }
    let mut thetas = BTreeSet::new();
    for b in b_min..=b_max {
        for a in 0..=b {
            thetas.insert(Ratio::new(a.into(), b.into()));
        }
    }
    let space = SampleSpace::binary(n)?;
    let mut worlds = Vec::with_capacity(thetas.len());
    for theta in thetas {
        worlds.push(build_iid_bernoulli_in(space.clone(), &theta)?);
    }
    ParameterSpace::new(worlds)
}

/// Explicit-distribution constructor mirroring [`World::explicit`].
pub fn make_explicit_world(
    space: Arc<SampleSpace>,
    theta: Ratio,
    dist: Vec<Ratio>,
) -> Result<World> {
    World::explicit(space, theta, dist)
}

/// A partition of a parameter space into null and alternative worlds,
/// stored as index sets into the space's world list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    null: Vec<usize>,
    alt: Vec<usize>,
}

impl Hypothesis {
    /// Builds the partition from the set of null indices; the alternative set
    /// is the exact complement within the space.
    pub fn from_null_indices(space: &ParameterSpace, null: Vec<usize>) -> Result<Self> {
        let mut is_null = vec![false; space.len()];
        for &i in &null {
            if i >= space.len() {
                return Err(Error::Validation(format!("null world index {i} out of range")));
            }
            if is_null[i] {
                return Err(Error::Validation(format!("duplicate null world index {i}")));
            }
            is_null[i] = true;
        }
        if null.is_empty() {
            return Err(Error::Context("null hypothesis set must be nonempty".into()));
        }
        let mut null: Vec<usize> = null;
        null.sort_unstable();
        let alt = (0..space.len()).filter(|i| !is_null[*i]).collect();
        Ok(Hypothesis { null, alt })
    }

    /// Null worlds selected by a predicate over theta.
    pub fn from_predicate<F: Fn(&Ratio) -> bool>(space: &ParameterSpace, null_pred: F) -> Result<Self> {
        let null = (0..space.len())
            .filter(|&i| null_pred(space.world(i).theta()))
            .collect();
        Self::from_null_indices(space, null)
    }

    /// One-sided null: theta >= bound.
    pub fn at_least(space: &ParameterSpace, bound: &Ratio) -> Result<Self> {
        Self::from_predicate(space, |t| t >= bound)
    }

    /// One-sided null: theta <= bound.
    pub fn at_most(space: &ParameterSpace, bound: &Ratio) -> Result<Self> {
        Self::from_predicate(space, |t| t <= bound)
    }

    /// Point null: theta = theta0.
    pub fn point(space: &ParameterSpace, theta0: &Ratio) -> Result<Self> {
        Self::from_predicate(space, |t| t == theta0)
    }

    /// Interval null: lo <= theta <= hi.
    pub fn interval(space: &ParameterSpace, lo: &Ratio, hi: &Ratio) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{}, {}]", lo, hi)));
        }
        Self::from_predicate(space, |t| t >= lo && t <= hi)
    }

    pub fn null_indices(&self) -> &[usize] {
        &self.null
    }

    pub fn alt_indices(&self) -> &[usize] {
        &self.alt
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{int, ratio};
    use num::Zero;

    #[test]
    fn bernoulli_appendix_value() {
        // theta = 7/10, n = 4, sequence (R,R,N,R) -> 1029/10000
        let w = build_iid_bernoulli(&ratio(7, 10), 4).unwrap();
        let id = w.space().parse_seq("RRNR").unwrap();
        assert_eq!(w.prob(id), &ratio(1029, 10000));
    }

    #[test]
    fn bernoulli_degenerate_theta_one() {
        let w = build_iid_bernoulli(&int(1), 3).unwrap();
        let rrr = w.space().parse_seq("RRR").unwrap();
        for id in 0..w.space().seq_count() {
            if id == rrr {
                assert_eq!(w.prob(id), &int(1));
            } else {
                assert_eq!(w.prob(id), &int(0));
            }
        }
    }

    #[test]
    fn bernoulli_uniform_half() {
        let w = build_iid_bernoulli(&ratio(1, 2), 4).unwrap();
        for id in 0..16 {
            assert_eq!(w.prob(id), &ratio(1, 16));
        }
    }

    #[test]
    fn bernoulli_rejects_bad_inputs() {
        assert!(build_iid_bernoulli(&ratio(11, 10), 4).is_err());
        assert!(build_iid_bernoulli(&ratio(-1, 10), 4).is_err());
        assert!(build_iid_bernoulli(&ratio(1, 2), 0).is_err());
    }

    #[test]
    fn binomial_marginal_is_exact() {
        let theta = ratio(3, 10);
        let w = build_iid_bernoulli(&theta, 4).unwrap();
        let one = int(1);
        for k in 0..=4usize {
            let choose = [1i64, 4, 6, 4, 1][k];
            let expected = int(choose)
                * num::pow::pow(theta.clone(), k)
                * num::pow::pow(one.clone() - &theta, 4 - k);
            assert_eq!(w.count_mass(k), expected);
        }
    }

    #[test]
    fn iid_permutation_symmetry() {
        let w = build_iid_bernoulli(&ratio(2, 7), 4).unwrap();
        // RRNR and RNRR have the same success count, hence the same probability.
        let a = w.space().parse_seq("RRNR").unwrap();
        let b = w.space().parse_seq("RNRR").unwrap();
        assert_eq!(w.prob(a), w.prob(b));
    }

    #[test]
    fn simple_grid_sizes() {
        assert_eq!(make_simple_grid(100, 2).unwrap().len(), 101);
        let g1 = make_simple_grid(1, 2).unwrap();
        assert_eq!(g1.thetas().cloned().collect::<Vec<_>>(), vec![int(0), int(1)]);
        let g4 = make_simple_grid(4, 2).unwrap();
        let expect = vec![int(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)];
        assert_eq!(g4.thetas().cloned().collect::<Vec<_>>(), expect);
        assert!(make_simple_grid(0, 2).is_err());
    }

    #[test]
    fn compound_grid_dedup() {
        let g = make_compound_grid(2, 2, 2).unwrap();
        assert_eq!(g.thetas().cloned().collect::<Vec<_>>(), vec![int(0), ratio(1, 2), int(1)]);
        let g = make_compound_grid(2, 3, 2).unwrap();
        let expect = vec![int(0), ratio(1, 3), ratio(1, 2), ratio(2, 3), int(1)];
        assert_eq!(g.thetas().cloned().collect::<Vec<_>>(), expect);
        assert!(make_compound_grid(3, 2, 2).is_err());
        assert!(make_compound_grid(0, 2, 2).is_err());
    }

    #[test]
    fn compound_grid_matches_set_oracle() {
        // Independent oracle: brute-force set of reduced fractions.
        let mut set = std::collections::BTreeSet::new();
        for b in 10u32..=100 {
            for a in 0..=b {
                set.insert(Ratio::new(a.into(), b.into()));
            }
        }
        let g = make_compound_grid(10, 100, 1).unwrap();
        assert_eq!(g.len(), set.len());
        assert!(g.thetas().all(|t| set.contains(t)));
    }

    #[test]
    fn explicit_world_validation() {
        let space = SampleSpace::binary(2).unwrap();
        let u = ratio(1, 4);
        assert!(World::explicit(space.clone(), ratio(1, 2), vec![u.clone(); 4]).is_ok());

        let bad_sum = vec![ratio(1, 4), ratio(1, 4), ratio(1, 4), ratio(3, 20)];
        let err = World::explicit(space.clone(), ratio(1, 2), bad_sum).unwrap_err();
        assert!(err.to_string().contains("sum to"));

        let negative = vec![ratio(1, 2), ratio(3, 4), ratio(-1, 4), Ratio::zero()];
        let err = World::explicit(space, ratio(1, 2), negative).unwrap_err();
        assert!(err.to_string().contains("negative"));
    }

    #[test]
    fn hypothesis_partition() {
        let g = make_simple_grid(4, 2).unwrap();
        let h = Hypothesis::at_least(&g, &ratio(1, 2)).unwrap();
        assert_eq!(h.null_indices(), &[2, 3, 4]);
        assert_eq!(h.alt_indices(), &[0, 1]);
        let h = Hypothesis::point(&g, &ratio(1, 2)).unwrap();
        assert_eq!(h.null_indices(), &[2]);
        let h = Hypothesis::interval(&g, &ratio(2, 5), &ratio(3, 5)).unwrap();
        assert_eq!(h.null_indices(), &[2]);
        assert!(Hypothesis::point(&g, &ratio(1, 3)).is_err());
    }
}
