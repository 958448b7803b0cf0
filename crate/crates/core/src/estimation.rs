//! Point and interval estimation over a finite parameter space: MSE, bias,
//! domination, within-class admissibility, UMVU, and interval coverage.
//!
//! Admissibility and UMVU are judged relative to an explicitly declared
//! finite candidate class; the absolute notions quantify over an infinite
//! estimator space and are out of reach at desk scale.

use std::sync::Arc;

use num::Zero;

use crate::error::{Error, Result};
use crate::ratio::Ratio;
use crate::worlds::{ParameterSpace, SampleSpace, World};

/// A point estimator: one rational output per data sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimator {
    space: Arc<SampleSpace>,
    values: Vec<Ratio>,
}

impl Estimator {
    pub fn new(space: Arc<SampleSpace>, values: Vec<Ratio>) -> Result<Self> {
        if values.len() != space.seq_count() {
            return Err(Error::Shape(format!(
                "estimator has {} values, sample space has {} sequences",
                values.len(),
                space.seq_count()
            )));
        }
        Ok(Estimator { space, values })
    }

    /// Estimator given as a function of the full sequence.
    pub fn from_fn<F: Fn(usize) -> Ratio>(space: Arc<SampleSpace>, f: F) -> Self {
        let values = (0..space.seq_count()).map(f).collect();
        Estimator { space, values }
    }

    /// Compact form: a function of the success-count statistic, expanded
    /// internally to the full sequence domain.
    pub fn from_count_values(space: Arc<SampleSpace>, per_count: &[Ratio]) -> Result<Self> {
        if per_count.len() != space.n() + 1 {
            return Err(Error::Shape(format!(
                "expected {} count values, got {}",
                space.n() + 1,
                per_count.len()
            )));
        }
        let values = (0..space.seq_count())
            .map(|id| per_count[space.success_count(id)].clone())
            .collect();
        Ok(Estimator { space, values })
    }

    /// The sample proportion k/n.
    pub fn sample_proportion(space: Arc<SampleSpace>) -> Self {
        let n = space.n();
        Estimator::from_fn(space.clone(), |id| {
            Ratio::new(space.success_count(id).into(), n.into())
        })
    }

    pub fn constant(space: Arc<SampleSpace>, value: Ratio) -> Self {
        let values = vec![value; space.seq_count()];
        Estimator { space, values }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn value(&self, seq: usize) -> &Ratio {
        &self.values[seq]
    }

    pub fn values(&self) -> &[Ratio] {
        &self.values
    }
}

/// The quantity being estimated, as a function of theta.
#[derive(Debug, Clone)]
pub enum Estimand {
    /// The parameter itself.
    Identity,
    /// An arbitrary mapping theta -> target value.
    Table(Vec<(Ratio, Ratio)>),
}

impl Estimand {
    pub fn eval(&self, theta: &Ratio) -> Result<Ratio> {
        match self {
            Estimand::Identity => Ok(theta.clone()),
            Estimand::Table(entries) => entries
                .iter()
                .find(|(t, _)| t == theta)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Shape(format!("estimand undefined at theta {}", theta))),
        }
    }
}

fn check_same_space(e: &Estimator, world: &World) -> Result<()> {
    if e.space().as_ref() != world.space().as_ref() {
        return Err(Error::Shape("estimator and world use different sample spaces".into()));
    }
    Ok(())
}

/// Expected value of the estimator in a world.
pub fn expectation(e: &Estimator, world: &World) -> Result<Ratio> {
    check_same_space(e, world)?;
    Ok(world
        .dist()
        .iter()
        .zip(e.values())
        .map(|(p, v)| p * v)
        .sum())
}

/// Probability-weighted average of squared errors against the estimand.
pub fn mse(e: &Estimator, world: &World, g: &Estimand) -> Result<Ratio> {
    check_same_space(e, world)?;
    let target = g.eval(world.theta())?;
    Ok(world
        .dist()
        .iter()
        .zip(e.values())
        .map(|(p, v)| {
            let err = v - &target;
            p * &err * &err
        })
        .sum())
}

/// Expected estimate minus the true target value.
pub fn bias(e: &Estimator, world: &World, g: &Estimand) -> Result<Ratio> {
    Ok(expectation(e, world)? - g.eval(world.theta())?)
}

/// Probability-weighted squared deviation from the world's own expectation.
pub fn variance(e: &Estimator, world: &World) -> Result<Ratio> {
    let mean = expectation(e, world)?;
    Ok(world
        .dist()
        .iter()
        .zip(e.values())
        .map(|(p, v)| {
            let dev = v - &mean;
            p * &dev * &dev
        })
        .sum())
}

/// Unbiased over the whole space: bias exactly zero at every world.
pub fn is_unbiased_estimator(e: &Estimator, space: &ParameterSpace, g: &Estimand) -> Result<bool> {
    for w in space.worlds() {
        if !bias(e, w, g)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Domination verdict with a strict-inequality witness world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominationReport {
    pub dominates: bool,
    /// A theta where e1's MSE is strictly smaller, when dominating.
    pub strict_witness: Option<Ratio>,
}

/// e1 dominates e2: MSE(e1) <= MSE(e2) at every world, strictly at some.
pub fn dominates(
    e1: &Estimator,
    e2: &Estimator,
    space: &ParameterSpace,
    g: &Estimand,
) -> Result<DominationReport> {
    let mut strict_witness = None;
    for w in space.worlds() {
        let m1 = mse(e1, w, g)?;
        let m2 = mse(e2, w, g)?;
        if m1 > m2 {
            return Ok(DominationReport { dominates: false, strict_witness: None });
        }
        if m1 < m2 && strict_witness.is_none() {
            strict_witness = Some(w.theta().clone());
        }
    }
    Ok(DominationReport { dominates: strict_witness.is_some(), strict_witness })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Index into the class of a dominating member, with its strict theta.
    pub dominator: Option<(usize, Ratio)>,
}

/// Admissible within the declared class: no member dominates it.
pub fn is_admissible_in_class(
    e: &Estimator,
    cls: &[Estimator],
    space: &ParameterSpace,
    g: &Estimand,
) -> Result<AdmissibilityReport> {
    if !cls.iter().any(|m| m == e) {
        return Err(Error::Domain("estimator is not a member of the declared class".into()));
    }
    for (i, m) in cls.iter().enumerate() {
        let rep = dominates(m, e, space, g)?;
        if rep.dominates {
            return Ok(AdmissibilityReport {
                admissible: false,
                dominator: Some((i, rep.strict_witness.unwrap())),
            });
        }
    }
    Ok(AdmissibilityReport { admissible: true, dominator: None })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UmvuReport {
    pub umvu: bool,
    /// The queried estimator is biased, so the question does not arise.
    pub biased: bool,
    /// No unbiased member exists in the class at all.
    pub vacuous: bool,
}

/// UMVU within the declared class: unbiased, and of uniformly minimal
/// variance among the class's unbiased members.
pub fn is_umvu_in_class(
    e: &Estimator,
    cls: &[Estimator],
    space: &ParameterSpace,
    g: &Estimand,
) -> Result<UmvuReport> {
    if !cls.iter().any(|m| m == e) {
        return Err(Error::Domain("estimator is not a member of the declared class".into()));
    }
    let mut any_unbiased = false;
    for m in cls {
        if is_unbiased_estimator(m, space, g)? {
            any_unbiased = true;
            break;
        }
    }
    if !is_unbiased_estimator(e, space, g)? {
        return Ok(UmvuReport { umvu: false, biased: true, vacuous: !any_unbiased });
    }
    for m in cls {
        if !is_unbiased_estimator(m, space, g)? {
            continue;
        }
        for w in space.worlds() {
            if variance(e, w)? > variance(m, w)? {
                return Ok(UmvuReport { umvu: false, biased: false, vacuous: false });
            }
        }
    }
    Ok(UmvuReport { umvu: true, biased: false, vacuous: false })
}

/// An interval estimator: a [lo, hi] pair per data sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalEstimator {
    space: Arc<SampleSpace>,
    intervals: Vec<(Ratio, Ratio)>,
}

impl IntervalEstimator {
    pub fn new(space: Arc<SampleSpace>, intervals: Vec<(Ratio, Ratio)>) -> Result<Self> {
        if intervals.len() != space.seq_count() {
            return Err(Error::Shape(format!(
                "interval estimator has {} entries, sample space has {} sequences",
                intervals.len(),
                space.seq_count()
            )));
        }
        for (id, (lo, hi)) in intervals.iter().enumerate() {
            if lo > hi {
                return Err(Error::Validation(format!(
                    "inverted interval [{}, {}] at sequence {}",
                    lo,
                    hi,
                    space.seq_string(id)
                )));
            }
        }
        Ok(IntervalEstimator { space, intervals })
    }

    pub fn from_count_intervals(
        space: Arc<SampleSpace>,
        per_count: &[(Ratio, Ratio)],
    ) -> Result<Self> {
        if per_count.len() != space.n() + 1 {
            return Err(Error::Shape(format!(
                "expected {} count intervals, got {}",
                space.n() + 1,
                per_count.len()
            )));
        }
        let intervals = (0..space.seq_count())
            .map(|id| per_count[space.success_count(id)].clone())
            .collect();
        IntervalEstimator::new(space, intervals)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn interval(&self, seq: usize) -> &(Ratio, Ratio) {
        &self.intervals[seq]
    }

    pub fn intervals(&self) -> &[(Ratio, Ratio)] {
        &self.intervals
    }
}

/// Probability that the produced interval covers the true target value.
pub fn coverage_probability(ie: &IntervalEstimator, world: &World, g: &Estimand) -> Result<Ratio> {
    if ie.space().as_ref() != world.space().as_ref() {
        return Err(Error::Shape("interval estimator and world use different sample spaces".into()));
    }
    let target = g.eval(world.theta())?;
    let mut sum = Ratio::zero();
    for (p, (lo, hi)) in world.dist().iter().zip(ie.intervals()) {
        if lo <= &target && &target <= hi {
            sum += p;
        }
    }
    Ok(sum)
}

/// Probability-weighted interval width; reported, never judged.
pub fn expected_width(ie: &IntervalEstimator, world: &World) -> Result<Ratio> {
    if ie.space().as_ref() != world.space().as_ref() {
        return Err(Error::Shape("interval estimator and world use different sample spaces".into()));
    }
    Ok(world
        .dist()
        .iter()
        .zip(ie.intervals())
        .map(|(p, (lo, hi))| p * (hi - lo))
        .sum())
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

    #[test]
    fn mse_examples() {
        let ps = theta3_space();
        let prop = Estimator::sample_proportion(ps.space().clone());
        let half = Estimator::constant(ps.space().clone(), ratio(1, 2));
        let g = Estimand::Identity;
        // Sample proportion at theta = 1/2: theta(1-theta)/n = 1/16.
        assert_eq!(mse(&prop, ps.world(1), &g).unwrap(), ratio(1, 16));
        assert_eq!(mse(&half, ps.world(1), &g).unwrap(), int(0));
        // Constant 1/2 at theta = 3/10: (1/5)^2.
        assert_eq!(mse(&half, ps.world(0), &g).unwrap(), ratio(1, 25));
        assert_eq!(mse(&prop, ps.world(0), &g).unwrap(), ratio(21, 400));
    }

    #[test]
    fn bias_examples() {
        let ps = theta3_space();
        let g = Estimand::Identity;
        let prop = Estimator::sample_proportion(ps.space().clone());
        for w in ps.worlds() {
            assert_eq!(bias(&prop, w, &g).unwrap(), int(0));
        }
        assert!(is_unbiased_estimator(&prop, &ps, &g).unwrap());

        let half = Estimator::constant(ps.space().clone(), ratio(1, 2));
        assert_eq!(bias(&half, ps.world(1), &g).unwrap(), int(0));
        assert_eq!(bias(&half, ps.world(0), &g).unwrap(), ratio(1, 5));
        assert!(!is_unbiased_estimator(&half, &ps, &g).unwrap());

        let shifted = Estimator::from_fn(ps.space().clone(), |id| {
            Ratio::new(ps.space().success_count(id).into(), 4.into()) + int(1)
        });
        for w in ps.worlds() {
            assert_eq!(bias(&shifted, w, &g).unwrap(), int(1));
        }
    }

    #[test]
    fn domination_examples() {
        let ps = theta3_space();
        let g = Estimand::Identity;
        let prop = Estimator::sample_proportion(ps.space().clone());
        let half = Estimator::constant(ps.space().clone(), ratio(1, 2));
        let rep = dominates(&half, &prop, &ps, &g).unwrap();
        assert!(rep.dominates);
        assert_eq!(rep.strict_witness, Some(ratio(3, 10)));
        assert!(!dominates(&prop, &half, &ps, &g).unwrap().dominates);
        assert!(!dominates(&prop, &prop, &ps, &g).unwrap().dominates);
    }

    #[test]
    fn admissibility_examples() {
        let ps = theta3_space();
        let g = Estimand::Identity;
        let prop = Estimator::sample_proportion(ps.space().clone());
        let half = Estimator::constant(ps.space().clone(), ratio(1, 2));
        let cls = vec![prop.clone(), half.clone()];
        let rep = is_admissible_in_class(&prop, &cls, &ps, &g).unwrap();
        assert!(!rep.admissible);
        assert_eq!(rep.dominator, Some((1, ratio(3, 10))));
        assert!(is_admissible_in_class(&half, &cls, &ps, &g).unwrap().admissible);
        let singleton = vec![prop.clone()];
        assert!(is_admissible_in_class(&prop, &singleton, &ps, &g).unwrap().admissible);
        assert!(is_admissible_in_class(&half, &singleton, &ps, &g).is_err());
    }

    #[test]
    fn umvu_examples() {
        let ps = theta3_space();
        let g = Estimand::Identity;
        let prop = Estimator::sample_proportion(ps.space().clone());
        let half = Estimator::constant(ps.space().clone(), ratio(1, 2));
        let cls = vec![prop.clone(), half.clone()];
        assert!(is_umvu_in_class(&prop, &cls, &ps, &g).unwrap().umvu);
        let rep = is_umvu_in_class(&half, &cls, &ps, &g).unwrap();
        assert!(!rep.umvu && rep.biased);
    }

    #[test]
    fn umvu_with_competing_unbiased_member() {
        // Perturb the proportion on two equal-count sequences in opposite
        // directions: still unbiased (IID symmetry), strictly higher variance.
        let ps = theta3_space();
        let g = Estimand::Identity;
        let prop = Estimator::sample_proportion(ps.space().clone());
        let rrnr = ps.space().parse_seq("RRNR").unwrap();
        let rnrr = ps.space().parse_seq("RNRR").unwrap();
        let perturbed = Estimator::from_fn(ps.space().clone(), |id| {
            let base = Ratio::new(ps.space().success_count(id).into(), 4.into());
            if id == rrnr {
                base + ratio(1, 10)
            } else if id == rnrr {
                base - ratio(1, 10)
            } else {
                base
            }
        });
        assert!(is_unbiased_estimator(&perturbed, &ps, &g).unwrap());
        let cls = vec![prop.clone(), perturbed.clone()];
        assert!(is_umvu_in_class(&prop, &cls, &ps, &g).unwrap().umvu);
        assert!(!is_umvu_in_class(&perturbed, &cls, &ps, &g).unwrap().umvu);
    }

    #[test]
    fn bias_variance_identity() {
        let ps = theta3_space();
        let g = Estimand::Identity;
        let half = Estimator::constant(ps.space().clone(), ratio(1, 2));
        let prop = Estimator::sample_proportion(ps.space().clone());
        for e in [&half, &prop] {
            for w in ps.worlds() {
                let b = bias(e, w, &g).unwrap();
                assert_eq!(mse(e, w, &g).unwrap(), variance(e, w).unwrap() + &b * &b);
            }
        }
    }

    #[test]
    fn coverage_examples() {
        let ps = theta3_space();
        let g = Estimand::Identity;
        let full = IntervalEstimator::new(
            ps.space().clone(),
            vec![(int(0), int(1)); 16],
        )
        .unwrap();
        for w in ps.worlds() {
            assert_eq!(coverage_probability(&full, w, &g).unwrap(), int(1));
        }

        // [k/4 - 1/4, k/4 + 1/4] at theta 1/2: covers iff k in {1,2,3}.
        let quarter: Vec<(Ratio, Ratio)> = (0..=4)
            .map(|k| {
                let mid = ratio(k, 4);
                (&mid - ratio(1, 4), &mid + ratio(1, 4))
            })
            .collect();
        let ie = IntervalEstimator::from_count_intervals(ps.space().clone(), &quarter).unwrap();
        assert_eq!(coverage_probability(&ie, ps.world(1), &g).unwrap(), ratio(7, 8));

        // Degenerate interval at a never-true value.
        let point = IntervalEstimator::new(
            ps.space().clone(),
            vec![(int(2), int(2)); 16],
        )
        .unwrap();
        for w in ps.worlds() {
            assert_eq!(coverage_probability(&point, w, &g).unwrap(), int(0));
        }
        assert_eq!(expected_width(&ie, ps.world(1)).unwrap(), ratio(1, 2));
    }

    #[test]
    fn coverage_monotone_in_width() {
        let ps = theta3_space();
        let g = Estimand::Identity;
        let narrow: Vec<(Ratio, Ratio)> = (0..=4)
            .map(|k| (ratio(k, 4) - ratio(1, 8), ratio(k, 4) + ratio(1, 8)))
            .collect();
        let wide: Vec<(Ratio, Ratio)> = (0..=4)
            .map(|k| (ratio(k, 4) - ratio(1, 4), ratio(k, 4) + ratio(1, 4)))
            .collect();
        let ni = IntervalEstimator::from_count_intervals(ps.space().clone(), &narrow).unwrap();
        let wi = IntervalEstimator::from_count_intervals(ps.space().clone(), &wide).unwrap();
        for w in ps.worlds() {
            assert!(
                coverage_probability(&ni, w, &g).unwrap()
                    <= coverage_probability(&wi, w, &g).unwrap()
            );
        }
    }

    #[test]
    fn inverted_interval_rejected() {
        let ps = theta3_space();
        let mut ivs = vec![(int(0), int(1)); 16];
        ivs[3] = (int(1), int(0));
        assert!(IntervalEstimator::new(ps.space().clone(), ivs).is_err());
    }
}
