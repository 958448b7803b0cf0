//! Randomized tests and their evaluation: power, size, level, unbiasedness,
//! uniform maximum power within a class.
//!
//! A test maps each data sequence to a rejection probability in [0, 1];
//! deterministic tests are the {0, 1}-valued special case. All judgments are
//! exact rational comparisons.

use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::construct::PowerEnvelope;
use crate::error::{Error, Result};
use crate::ratio::Ratio;
use crate::worlds::{Hypothesis, ParameterSpace, SampleSpace, World};

/// A randomized test: per-sequence rejection probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Test {
    space: Arc<SampleSpace>,
    phi: Vec<Ratio>,
}

impl Test {
    pub fn new(space: Arc<SampleSpace>, phi: Vec<Ratio>) -> Result<Self> {
        if phi.len() != space.seq_count() {
            return Err(Error::Shape(format!(
                "phi has {} entries, sample space has {} sequences",
                phi.len(),
                space.seq_count()
            )));
        }
        for (id, p) in phi.iter().enumerate() {
            if p.is_negative() || p > &Ratio::one() {
                return Err(Error::Validation(format!(
                    "phi({}) = {} outside [0, 1]",
                    space.seq_string(id),
                    p
                )));
            }
        }
        Ok(Test { space, phi })
    }

    pub fn never_reject(space: Arc<SampleSpace>) -> Self {
        let phi = vec![Ratio::zero(); space.seq_count()];
        Test { space, phi }
    }

    pub fn always_reject(space: Arc<SampleSpace>) -> Self {
        let phi = vec![Ratio::one(); space.seq_count()];
        Test { space, phi }
    }

    /// Deterministic test rejecting exactly where the predicate holds.
    pub fn deterministic<F: Fn(usize) -> bool>(space: Arc<SampleSpace>, reject: F) -> Self {
        let phi = (0..space.seq_count())
            .map(|id| if reject(id) { Ratio::one() } else { Ratio::zero() })
            .collect();
        Test { space, phi }
    }

    /// Deterministic test from a subset mask over sequence ids (bit i set =
    /// reject sequence i). Masks are the oracle module's enumeration order.
    pub fn from_mask(space: Arc<SampleSpace>, mask: u128) -> Result<Self> {
        if space.seq_count() > 128 {
            return Err(Error::Domain("mask form supports at most 128 sequences".into()));
        }
        Ok(Self::deterministic(space, |id| mask >> id & 1 == 1))
    }

    /// Test defined on the success-count statistic: phi(x) = by_count[k(x)].
    /// Missing counts default to 0.
    pub fn from_count_map(space: Arc<SampleSpace>, by_count: &[(usize, Ratio)]) -> Result<Self> {
        let n = space.n();
        let mut per_k = vec![Ratio::zero(); n + 1];
        for (k, p) in by_count {
            if *k > n {
                return Err(Error::Validation(format!("count {k} exceeds sample size {n}")));
            }
            per_k[*k] = p.clone();
        }
        let phi = (0..space.seq_count())
            .map(|id| per_k[space.success_count(id)].clone())
            .collect();
        Test::new(space, phi)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn phi(&self, seq: usize) -> &Ratio {
        &self.phi[seq]
    }

    pub fn phis(&self) -> &[Ratio] {
        &self.phi
    }

    pub fn is_deterministic(&self) -> bool {
        self.phi.iter().all(|p| p.is_zero() || p.is_one())
    }

    /// The complementary test 1 - phi.
    pub fn complement(&self) -> Test {
        let phi = self.phi.iter().map(|p| Ratio::one() - p).collect();
        Test { space: self.space.clone(), phi }
    }

    /// Convex mixture lambda * self + (1 - lambda) * other.
    pub fn mix(&self, other: &Test, lambda: &Ratio) -> Result<Test> {
        if self.space.as_ref() != other.space.as_ref() {
            return Err(Error::Shape("mixing tests over different sample spaces".into()));
        }
        if lambda.is_negative() || lambda > &Ratio::one() {
            return Err(Error::Domain(format!("mixing weight {} outside [0, 1]", lambda)));
        }
        let co = Ratio::one() - lambda;
        let phi = self
            .phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| lambda * a + &co * b)
            .collect();
        Ok(Test { space: self.space.clone(), phi })
    }
}

/// Power as a function of theta over a fixed parameter space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerFunction {
    thetas: Vec<Ratio>,
    values: Vec<Ratio>,
}

impl PowerFunction {
    pub fn thetas(&self) -> &[Ratio] {
        &self.thetas
    }

    pub fn values(&self) -> &[Ratio] {
        &self.values
    }

    pub fn value_at_index(&self, idx: usize) -> &Ratio {
        &self.values[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ratio, &Ratio)> {
        self.thetas.iter().zip(self.values.iter())
    }
}

fn check_same_space(test: &Test, world: &World) -> Result<()> {
    if test.space().as_ref() != world.space().as_ref() {
        return Err(Error::Shape("test and world use different sample spaces".into()));
    }
    Ok(())
}

/// Probability that the test rejects in the given world:
/// the distribution-weighted sum of per-sequence rejection probabilities.
pub fn rejection_probability(test: &Test, world: &World) -> Result<Ratio> {
    check_same_space(test, world)?;
    let mut sum = Ratio::zero();
    for (p, phi) in world.dist().iter().zip(test.phis()) {
        if !p.is_zero() && !phi.is_zero() {
            sum += p * phi;
        }
    }
    Ok(sum)
}

/// Pointwise rejection probability over every world in the space.
pub fn power_function(test: &Test, space: &ParameterSpace) -> Result<PowerFunction> {
    let mut thetas = Vec::with_capacity(space.len());
    let mut values = Vec::with_capacity(space.len());
    for w in space.worlds() {
        thetas.push(w.theta().clone());
        values.push(rejection_probability(test, w)?);
    }
    Ok(PowerFunction { thetas, values })
}

/// Maximum rejection probability over the null worlds (finite space: the
/// maximum is the least upper bound).
pub fn size(test: &Test, hyp: &Hypothesis, space: &ParameterSpace) -> Result<Ratio> {
    let mut best: Option<Ratio> = None;
    for &i in hyp.null_indices() {
        let p = rejection_probability(test, space.world(i))?;
        best = Some(match best {
            None => p,
            Some(b) => b.max(p),
        });
    }
    best.ok_or_else(|| Error::Context("null hypothesis set is empty".into()))
}

/// True iff rejection probability <= alpha at every null world.
pub fn has_level(test: &Test, alpha: &Ratio, hyp: &Hypothesis, space: &ParameterSpace) -> Result<bool> {
    if alpha.is_negative() || alpha > &Ratio::one() {
        return Err(Error::Domain(format!("alpha {} outside [0, 1]", alpha)));
    }
    Ok(&size(test, hyp, space)? <= alpha)
}

/// Outcome of an unbiasedness check; `vacuous` warns when the alternative
/// set is empty and the verdict holds by quantifier vacuity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnbiasedReport {
    pub unbiased: bool,
    pub vacuous: bool,
    /// On failure: (alternative theta, null theta) with power(alt) < power(null).
    pub witness: Option<(Ratio, Ratio)>,
}

/// Unbiasedness: power at every alternative world >= power at every null world.
pub fn is_unbiased(test: &Test, hyp: &Hypothesis, space: &ParameterSpace) -> Result<UnbiasedReport> {
    if hyp.null_indices().is_empty() {
        return Err(Error::Context("null hypothesis set is empty".into()));
    }
    if hyp.alt_indices().is_empty() {
        return Ok(UnbiasedReport { unbiased: true, vacuous: true, witness: None });
    }
    let pf = power_function(test, space)?;
    let max_null = hyp
        .null_indices()
        .iter()
        .max_by(|a, b| pf.value_at_index(**a).cmp(pf.value_at_index(**b)))
        .copied()
        .unwrap();
    for &a in hyp.alt_indices() {
        if pf.value_at_index(a) < pf.value_at_index(max_null) {
            return Ok(UnbiasedReport {
                unbiased: false,
                vacuous: false,
                witness: Some((
                    space.world(a).theta().clone(),
                    space.world(max_null).theta().clone(),
                )),
            });
        }
    }
    Ok(UnbiasedReport { unbiased: true, vacuous: false, witness: None })
}

/// A class of tests: an explicit finite member list, or one of the two
/// intensional descriptors. The intensional forms must carry the power
/// envelope computed by the construct module.
#[derive(Debug, Clone)]
pub enum TestClass {
    Explicit(Vec<Test>),
    /// All level-alpha tests, represented by their power envelope.
    LevelAlpha { alpha: Ratio, envelope: Option<PowerEnvelope> },
    /// All unbiased level-alpha tests, represented by their power envelope.
    UnbiasedLevelAlpha { alpha: Ratio, envelope: Option<PowerEnvelope> },
}

/// UMP within a class: the test belongs to the class and its power at every
/// alternative world weakly exceeds every member's.
pub fn is_ump_in_class(
    test: &Test,
    cls: &TestClass,
    hyp: &Hypothesis,
    space: &ParameterSpace,
) -> Result<bool> {
    match cls {
        TestClass::Explicit(members) => {
            if !members.iter().any(|m| m == test) {
                return Ok(false);
            }
            let pf = power_function(test, space)?;
            for m in members {
                let mf = power_function(m, space)?;
                for &a in hyp.alt_indices() {
                    if pf.value_at_index(a) < mf.value_at_index(a) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        TestClass::LevelAlpha { alpha, envelope } => {
            let env = envelope.as_ref().ok_or_else(|| {
                Error::UnsupportedClass("level-alpha class requires a computed power envelope".into())
            })?;
            if !has_level(test, alpha, hyp, space)? {
                return Ok(false);
            }
            attains_envelope(test, env, hyp, space)
        }
        TestClass::UnbiasedLevelAlpha { alpha, envelope } => {
            let env = envelope.as_ref().ok_or_else(|| {
                Error::UnsupportedClass(
                    "unbiased level-alpha class requires a computed power envelope".into(),
                )
            })?;
            if !has_level(test, alpha, hyp, space)? || !is_unbiased(test, hyp, space)?.unbiased {
                return Ok(false);
            }
            attains_envelope(test, env, hyp, space)
        }
    }
}

/// True iff the test's power equals the envelope value at every alternative.
pub fn attains_envelope(
    test: &Test,
    env: &PowerEnvelope,
    hyp: &Hypothesis,
    space: &ParameterSpace,
) -> Result<bool> {
    for &a in hyp.alt_indices() {
        let theta = space.world(a).theta();
        let bound = env.value_at(theta).ok_or_else(|| {
            Error::Shape(format!("envelope has no value at alternative theta {}", theta))
        })?;
        if &rejection_probability(test, space.world(a))? != bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pointwise power comparison of two tests over a subset of the space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerComparison {
    /// t1's power >= t2's at every queried theta.
    pub ge_everywhere: bool,
    /// t1's power <= t2's at every queried theta.
    pub le_everywhere: bool,
    /// A theta where t1's power is strictly greater, if any.
    pub witness_gt: Option<Ratio>,
    /// A theta where t1's power is strictly smaller, if any.
    pub witness_lt: Option<Ratio>,
}

impl PowerComparison {
    pub fn equal_everywhere(&self) -> bool {
        self.ge_everywhere && self.le_everywhere
    }

    pub fn incomparable(&self) -> bool {
        !self.ge_everywhere && !self.le_everywhere
    }
}

/// Compares two tests' power functions on a subset of world indices.
pub fn compare_power(
    t1: &Test,
    t2: &Test,
    space: &ParameterSpace,
    on: &[usize],
) -> Result<PowerComparison> {
    if on.is_empty() {
        return Err(Error::Domain("comparison subset must be nonempty".into()));
    }
    let mut report = PowerComparison {
        ge_everywhere: true,
        le_everywhere: true,
        witness_gt: None,
        witness_lt: None,
    };
    for &i in on {
        if i >= space.len() {
            return Err(Error::Validation(format!("world index {i} out of range")));
        }
        let w = space.world(i);
        let p1 = rejection_probability(t1, w)?;
        let p2 = rejection_probability(t2, w)?;
        match p1.cmp(&p2) {
            std::cmp::Ordering::Greater => {
                report.le_everywhere = false;
                report.witness_gt.get_or_insert_with(|| w.theta().clone());
            }
            std::cmp::Ordering::Less => {
                report.ge_everywhere = false;
                report.witness_lt.get_or_insert_with(|| w.theta().clone());
            }
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{int, ratio};
    use crate::worlds::{build_iid_bernoulli_in, SampleSpace};

    fn theta3_space() -> ParameterSpace {
        let space = SampleSpace::binary(4).unwrap();
        let worlds = [ratio(3, 10), ratio(1, 2), ratio(7, 10)]
            .into_iter()
            .map(|t| build_iid_bernoulli_in(space.clone(), &t).unwrap())
            .collect();
        ParameterSpace::new(worlds).unwrap()
    }

    fn k0_test(space: &Arc<SampleSpace>) -> Test {
        Test::deterministic(space.clone(), |id| space.success_count(id) == 0)
    }

    #[test]
    fn rejection_probability_examples() {
        let ps = theta3_space();
        let t = k0_test(ps.space());
        // k=0 test at theta=1/2: (1/2)^4.
        assert_eq!(rejection_probability(&t, ps.world(1)).unwrap(), ratio(1, 16));
        // At theta=3/10: (7/10)^4.
        assert_eq!(rejection_probability(&t, ps.world(0)).unwrap(), ratio(2401, 10000));
        let always = Test::always_reject(ps.space().clone());
        for w in ps.worlds() {
            assert_eq!(rejection_probability(&always, w).unwrap(), int(1));
        }
    }

    /// Independent oracle: the four-step marked-sequence sum for deterministic
    /// tests, written directly against the rejection region.
    fn marked_sum_oracle(test: &Test, world: &World) -> Ratio {
        assert!(test.is_deterministic());
        let mut total = Ratio::zero();
        for id in 0..world.space().seq_count() {
            if test.phi(id).is_one() {
                total += world.prob(id);
            }
        }
        total
    }

    #[test]
    fn deterministic_matches_marked_sum_oracle() {
        let ps = theta3_space();
        for mask in [0u128, 1, 0b1010, 0xffff, 0b0110_1001_0000_0001] {
            let t = Test::from_mask(ps.space().clone(), mask).unwrap();
            for w in ps.worlds() {
                assert_eq!(rejection_probability(&t, w).unwrap(), marked_sum_oracle(&t, w));
            }
        }
    }

    #[test]
    fn power_function_examples() {
        let ps = theta3_space();
        let t = k0_test(ps.space());
        let pf = power_function(&t, &ps).unwrap();
        assert_eq!(
            pf.values(),
            &[ratio(2401, 10000), ratio(1, 16), ratio(81, 10000)]
        );
        let never = Test::never_reject(ps.space().clone());
        assert!(power_function(&never, &ps).unwrap().values().iter().all(|v| v.is_zero()));
        let always = Test::always_reject(ps.space().clone());
        assert!(power_function(&always, &ps).unwrap().values().iter().all(|v| v.is_one()));
    }

    #[test]
    fn size_and_level() {
        let ps = theta3_space();
        let t = k0_test(ps.space());
        // Null {1/2, 7/10}: size = max(1/16, 81/10000) = 1/16.
        let hyp = Hypothesis::at_least(&ps, &ratio(1, 2)).unwrap();
        assert_eq!(size(&t, &hyp, &ps).unwrap(), ratio(1, 16));
        assert!(has_level(&t, &ratio(1, 16), &hyp, &ps).unwrap());
        assert!(!has_level(&t, &ratio(1, 20), &hyp, &ps).unwrap());

        let never = Test::never_reject(ps.space().clone());
        assert_eq!(size(&never, &hyp, &ps).unwrap(), int(0));
        assert!(has_level(&never, &int(0), &hyp, &ps).unwrap());
        let always = Test::always_reject(ps.space().clone());
        assert_eq!(size(&always, &hyp, &ps).unwrap(), int(1));
        assert!(has_level(&always, &ratio(3, 2), &hyp, &ps).is_err());
    }

    #[test]
    fn unbiasedness_examples() {
        let ps = theta3_space();
        let t = k0_test(ps.space());
        // Null {1/2, 7/10}, alt {3/10}: 2401/10000 >= 1/16 >= 81/10000.
        let hyp = Hypothesis::at_least(&ps, &ratio(1, 2)).unwrap();
        assert!(is_unbiased(&t, &hyp, &ps).unwrap().unbiased);

        // Null {1/2}, alt {3/10, 7/10}: power(7/10) = 81/10000 < 1/16.
        let hyp = Hypothesis::point(&ps, &ratio(1, 2)).unwrap();
        let rep = is_unbiased(&t, &hyp, &ps).unwrap();
        assert!(!rep.unbiased);
        assert_eq!(rep.witness, Some((ratio(7, 10), ratio(1, 2))));

        let never = Test::never_reject(ps.space().clone());
        assert!(is_unbiased(&never, &hyp, &ps).unwrap().unbiased);
    }

    #[test]
    fn ump_in_explicit_class() {
        let ps = theta3_space();
        let hyp = Hypothesis::at_least(&ps, &ratio(1, 2)).unwrap();
        let t = k0_test(ps.space());
        let never = Test::never_reject(ps.space().clone());
        let cls = TestClass::Explicit(vec![t.clone(), never.clone()]);
        assert!(is_ump_in_class(&t, &cls, &hyp, &ps).unwrap());
        assert!(!is_ump_in_class(&never, &cls, &hyp, &ps).unwrap());
        let singleton = TestClass::Explicit(vec![never.clone()]);
        assert!(is_ump_in_class(&never, &singleton, &hyp, &ps).unwrap());
        // Intensional class without an envelope is unsupported.
        let cls = TestClass::LevelAlpha { alpha: ratio(1, 16), envelope: None };
        assert!(matches!(
            is_ump_in_class(&t, &cls, &hyp, &ps),
            Err(Error::UnsupportedClass(_))
        ));
    }

    #[test]
    fn compare_power_examples() {
        let ps = theta3_space();
        let all: Vec<usize> = (0..ps.len()).collect();
        let always = Test::always_reject(ps.space().clone());
        let never = Test::never_reject(ps.space().clone());
        let rep = compare_power(&always, &never, &ps, &all).unwrap();
        assert!(rep.ge_everywhere && !rep.le_everywhere);
        assert_eq!(rep.witness_gt, Some(ratio(3, 10)));

        let k0 = k0_test(ps.space());
        let k4 = Test::deterministic(ps.space().clone(), |id| ps.space().success_count(id) == 4);
        let rep = compare_power(&k0, &k4, &ps, &[0]).unwrap();
        assert!(rep.ge_everywhere && !rep.le_everywhere);

        let rep = compare_power(&k0, &k0, &ps, &all).unwrap();
        assert!(rep.equal_everywhere());
        assert!(compare_power(&k0, &k4, &ps, &[]).is_err());
    }
}
