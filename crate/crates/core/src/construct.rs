//! Optimal test construction and UMP existence decisions.
//!
//! The likelihood-ratio construction handles the simple-vs-simple case; the
//! Karlin-Rubin threshold test covers one-sided composite nulls under a
//! monotone likelihood ratio; the linear-program route computes power
//! envelopes and decides, by simultaneous-attainment feasibility, whether a
//! uniformly most powerful (or UMP-unbiased) test exists at all.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::ratio::Ratio;
use crate::testkit::{self, Test};
use crate::worlds::{Hypothesis, ParameterSpace, World};

/// Which constraint set defines the candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSet {
    LevelOnly,
    LevelAndUnbiased,
}

/// Pointwise maximum attainable power per alternative theta, subject to a
/// constraint set. A UMP test must attain every value simultaneously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerEnvelope {
    thetas: Vec<Ratio>,
    values: Vec<Ratio>,
}

impl PowerEnvelope {
    /// Envelope from parallel theta/value lists (used by certifiers and tests).
    pub fn from_points(thetas: Vec<Ratio>, values: Vec<Ratio>) -> Result<Self> {
        if thetas.len() != values.len() {
            return Err(Error::Shape(format!(
                "envelope has {} thetas but {} values",
                thetas.len(),
                values.len()
            )));
        }
        Ok(PowerEnvelope { thetas, values })
    }

    pub fn thetas(&self) -> &[Ratio] {
        &self.thetas
    }

    pub fn values(&self) -> &[Ratio] {
        &self.values
    }

    pub fn value_at(&self, theta: &Ratio) -> Option<&Ratio> {
        self.thetas.iter().position(|t| t == theta).map(|i| &self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ratio, &Ratio)> {
        self.thetas.iter().zip(self.values.iter())
    }
}

/// Why no test attains the envelope everywhere: fixing attainment at
/// `attained_theta` caps the power reachable at `shortfall_theta` strictly
/// below the envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonexistenceCertificate {
    pub attained_theta: Ratio,
    pub shortfall_theta: Ratio,
    pub constrained_max: Ratio,
    pub envelope_value: Ratio,
}

#[derive(Debug, Clone)]
pub enum UmpDecision {
    Exists { witness: Test, envelope: PowerEnvelope },
    NotExists { certificate: NonexistenceCertificate, envelope: PowerEnvelope },
}

impl UmpDecision {
    pub fn envelope(&self) -> &PowerEnvelope {
        match self {
            UmpDecision::Exists { envelope, .. } => envelope,
            UmpDecision::NotExists { envelope, .. } => envelope,
        }
    }

    pub fn exists(&self) -> bool {
        matches!(self, UmpDecision::Exists { .. })
    }
}

fn check_alpha(alpha: &Ratio) -> Result<()> {
    if alpha.is_negative() || alpha > &Ratio::one() {
        return Err(Error::Domain(format!("alpha {} outside [0, 1]", alpha)));
    }
    Ok(())
}

/// Most powerful test of a simple null against a simple alternative.
///
/// Sequences are ordered by descending likelihood ratio (alternative over
/// null, with zero null probability ordered first); whole ratio groups are
/// included while the level budget lasts, and the boundary group gets one
/// shared fractional rejection probability that spends the budget exactly.
/// Sequences with zero probability under both worlds are never rejected.
pub fn mp_test_simple(null_world: &World, alt_world: &World, alpha: &Ratio) -> Result<Test> {
    check_alpha(alpha)?;
    if null_world.space().as_ref() != alt_world.space().as_ref() {
        return Err(Error::Shape("null and alternative worlds use different sample spaces".into()));
    }
    if null_world.theta() == alt_world.theta() {
        return Err(Error::Degenerate(format!(
            "null and alternative share theta {}",
            null_world.theta()
        )));
    }
    let space = null_world.space().clone();
    let count = space.seq_count();

    // Partition sequences into likelihood-ratio groups.
    // Key ordering: None = infinite ratio (zero null probability), first.
    let mut infinite_group: Vec<usize> = Vec::new();
    let mut finite_groups: BTreeMap<Ratio, Vec<usize>> = BTreeMap::new();
    for id in 0..count {
        let p0 = null_world.prob(id);
        let p1 = alt_world.prob(id);
        if p0.is_zero() {
            if !p1.is_zero() {
                infinite_group.push(id);
            }
            // Both zero: leave phi at 0.
        } else {
            finite_groups.entry(p1 / p0).or_default().push(id);
        }
    }

    let mut phi = vec![Ratio::zero(); count];
    for &id in &infinite_group {
        phi[id] = Ratio::one(); // costs no level budget
    }
    let mut spent = Ratio::zero();
    for (_, group) in finite_groups.iter().rev() {
        let group_mass: Ratio = group.iter().map(|&id| null_world.prob(id)).sum();
        if &(&spent + &group_mass) <= alpha {
            for &id in group {
                phi[id] = Ratio::one();
            }
            spent += group_mass;
        } else {
            let fraction = (alpha - &spent) / &group_mass;
            if fraction.is_positive() {
                for &id in group {
                    phi[id] = fraction.clone();
                }
            }
            break;
        }
    }
    Test::new(space, phi)
}

/// Checks the monotone likelihood ratio property in the success-count
/// statistic: for every theta1 < theta2 the ratio of count masses is
/// nondecreasing in k, with zero-denominator entries treated as infinite.
pub fn check_mlr(space: &ParameterSpace) -> Result<bool> {
    let n = space.space().n();
    check_mlr_with(space, |id| space.space().success_count(id), n + 1)
}

/// MLR check against an arbitrary integer statistic with values in
/// `0..num_values`.
pub fn check_mlr_with<F: Fn(usize) -> usize>(
    space: &ParameterSpace,
    statistic: F,
    num_values: usize,
) -> Result<bool> {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| space.world(a).theta().cmp(space.world(b).theta()));

    // Per-world mass of each statistic value.
    let masses: Vec<Vec<Ratio>> = space
        .worlds()
        .iter()
        .map(|w| {
            let mut m = vec![Ratio::zero(); num_values];
            for id in 0..space.space().seq_count() {
                let v = statistic(id);
                if v >= num_values {
                    return Err(Error::Domain(format!(
                        "statistic value {v} outside 0..{num_values}"
                    )));
                }
                m[v] += w.prob(id);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;

    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            let lo = &masses[order[i]];
            let hi = &masses[order[j]];
            // Scan k ascending; ratios hi[k]/lo[k] must be nondecreasing,
            // and no finite ratio may follow an infinite one.
            let mut last: Option<(Ratio, Ratio)> = None; // (num, den) of last finite ratio
            let mut seen_infinite = false;
            for k in 0..num_values {
                if lo[k].is_zero() {
                    if !hi[k].is_zero() {
                        seen_infinite = true;
                    }
                    continue;
                }
                if seen_infinite {
                    return Ok(false);
                }
                if let Some((ln, ld)) = &last {
                    // hi[k]/lo[k] >= ln/ld  <=>  hi[k]*ld >= ln*lo[k]
                    if &hi[k] * ld < ln * &lo[k] {
                        return Ok(false);
                    }
                }
                last = Some((hi[k].clone(), lo[k].clone()));
            }
        }
    }
    Ok(true)
}

/// Which side of the boundary the null hypothesis occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullSide {
    /// Null: theta >= boundary; rejects small success counts.
    AtLeast,
    /// Null: theta <= boundary; rejects large success counts.
    AtMost,
}

/// One-sided threshold test in the success-count statistic, randomized at the
/// threshold so the boundary world's rejection probability is exactly alpha.
/// Requires the MLR property; the returned test's size over the whole null
/// side is verified to equal alpha before returning.
pub fn karlin_rubin_test(
    space: &ParameterSpace,
    side: NullSide,
    boundary: &Ratio,
    alpha: &Ratio,
) -> Result<Test> {
    check_alpha(alpha)?;
    if !check_mlr(space)? {
        return Err(Error::Precondition(
            "parameter space lacks the monotone likelihood ratio property".into(),
        ));
    }
    let boundary_idx = space
        .index_of_theta(boundary)
        .ok_or_else(|| Error::Context(format!("boundary theta {} not in the parameter space", boundary)))?;
    let boundary_world = space.world(boundary_idx);
    let n = space.space().n();

    // Count masses at the boundary world, in rejection order.
    let ks: Vec<usize> = match side {
        NullSide::AtLeast => (0..=n).collect(),
        NullSide::AtMost => (0..=n).rev().collect(),
    };
    let mut per_k = vec![Ratio::zero(); n + 1];
    let mut spent = Ratio::zero();
    for &k in &ks {
        let mass = boundary_world.count_mass(k);
        if &(&spent + &mass) <= alpha {
            per_k[k] = Ratio::one();
            spent += mass;
        } else {
            if !mass.is_zero() {
                per_k[k] = (alpha - &spent) / &mass;
            }
            break;
        }
    }
    let pairs: Vec<(usize, Ratio)> = per_k.into_iter().enumerate().collect();
    let test = Test::from_count_map(space.space().clone(), &pairs)?;

    let hyp = match side {
        NullSide::AtLeast => Hypothesis::at_least(space, boundary)?,
        NullSide::AtMost => Hypothesis::at_most(space, boundary)?,
    };
    let observed = testkit::size(&test, &hyp, space)?;
    if &observed != alpha {
        return Err(Error::Internal(format!(
            "threshold test has size {} over the null side, expected {}",
            observed, alpha
        )));
    }
    Ok(test)
}

/// Base constraint rows shared by every envelope and feasibility program:
/// level-alpha at each null world, plus the pairwise unbiasedness rows when
/// requested.
fn base_program(
    space: &ParameterSpace,
    hyp: &Hypothesis,
    alpha: &Ratio,
    constraints: ConstraintSet,
) -> Result<LinearProgram> {
    let count = space.space().seq_count();
    let mut lp = LinearProgram::new(count, vec![Ratio::zero(); count])?;
    for &i in hyp.null_indices() {
        lp.add_constraint(space.world(i).dist().to_vec(), Relation::Le, alpha.clone())?;
    }
    if constraints == ConstraintSet::LevelAndUnbiased {
        for &a in hyp.alt_indices() {
            for &o in hyp.null_indices() {
                // power(theta_a) - power(theta_o) >= 0
                let coeffs: Vec<Ratio> = space
                    .world(a)
                    .dist()
                    .iter()
                    .zip(space.world(o).dist())
                    .map(|(pa, po)| pa - po)
                    .collect();
                lp.add_constraint(coeffs, Relation::Ge, Ratio::zero())?;
            }
        }
    }
    Ok(lp)
}

fn solve_expect_optimal(lp: &LinearProgram) -> Result<crate::lp::LpSolution> {
    match crate::lp::solve_lp(lp)? {
        LpOutcome::Optimal(s) => Ok(s),
        LpOutcome::Infeasible => Err(Error::Internal("unexpectedly infeasible program".into())),
        LpOutcome::Unbounded => Err(Error::Internal("unbounded program despite box bounds".into())),
    }
}

/// Maximum attainable power at each alternative world, one LP per theta.
pub fn power_envelope(
    space: &ParameterSpace,
    hyp: &Hypothesis,
    alpha: &Ratio,
    constraints: ConstraintSet,
) -> Result<PowerEnvelope> {
    check_alpha(alpha)?;
    if hyp.alt_indices().is_empty() {
        return Err(Error::Domain("envelope requires a nonempty alternative set".into()));
    }
    let base = base_program(space, hyp, alpha, constraints)?;
    let mut thetas = Vec::new();
    let mut values = Vec::new();
    for &a in hyp.alt_indices() {
        let mut lp = base.clone();
        lp.objective = space.world(a).dist().to_vec();
        let sol = solve_expect_optimal(&lp)?;
        thetas.push(space.world(a).theta().clone());
        values.push(sol.value);
    }
    Ok(PowerEnvelope { thetas, values })
}

/// Decides whether some test attains the whole envelope simultaneously.
///
/// Feasible: the witness test is returned. Infeasible: a certificate pins a
/// pair of alternatives that cannot both be served, with the exact
/// constrained maximum shown strictly below the envelope.
pub fn decide_ump_with(
    space: &ParameterSpace,
    hyp: &Hypothesis,
    alpha: &Ratio,
    constraints: ConstraintSet,
) -> Result<UmpDecision> {
    let envelope = power_envelope(space, hyp, alpha, constraints)?;
    let base = base_program(space, hyp, alpha, constraints)?;

    let mut feasibility = base.clone();
    for (&a, value) in hyp.alt_indices().iter().zip(envelope.values()) {
        feasibility.add_constraint(space.world(a).dist().to_vec(), Relation::Eq, value.clone())?;
    }
    match crate::lp::solve_lp(&feasibility)? {
        LpOutcome::Optimal(sol) => {
            let witness = Test::new(space.space().clone(), sol.assignment)?;
            Ok(UmpDecision::Exists { witness, envelope })
        }
        LpOutcome::Unbounded => Err(Error::Internal("unbounded feasibility program".into())),
        LpOutcome::Infeasible => {
            // Fix attainment at one alternative and look for a shortfall at
            // another. The first alternative in theta order is tried first.
            for (ai, &a) in hyp.alt_indices().iter().enumerate() {
                let env_a = &envelope.values()[ai];
                let mut pinned = base.clone();
                pinned.add_constraint(
                    space.world(a).dist().to_vec(),
                    Relation::Eq,
                    env_a.clone(),
                )?;
                for (bi, &b) in hyp.alt_indices().iter().enumerate() {
                    if b == a {
                        continue;
                    }
                    let mut lp = pinned.clone();
                    lp.objective = space.world(b).dist().to_vec();
                    let sol = solve_expect_optimal(&lp)?;
                    let env_b = &envelope.values()[bi];
                    if &sol.value < env_b {
                        let certificate = NonexistenceCertificate {
                            attained_theta: space.world(a).theta().clone(),
                            shortfall_theta: space.world(b).theta().clone(),
                            constrained_max: sol.value,
                            envelope_value: env_b.clone(),
                        };
                        return Ok(UmpDecision::NotExists { certificate, envelope });
                    }
                }
            }
            Err(Error::Internal(
                "feasibility program infeasible but no certificate pair found".into(),
            ))
        }
    }
}

/// UMP among level-alpha tests.
pub fn decide_ump(space: &ParameterSpace, hyp: &Hypothesis, alpha: &Ratio) -> Result<UmpDecision> {
    decide_ump_with(space, hyp, alpha, ConstraintSet::LevelOnly)
}

/// UMP among unbiased level-alpha tests.
pub fn decide_umpu(space: &ParameterSpace, hyp: &Hypothesis, alpha: &Ratio) -> Result<UmpDecision> {
    decide_ump_with(space, hyp, alpha, ConstraintSet::LevelAndUnbiased)
}
