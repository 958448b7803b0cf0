//! The achievabilist norm: a ladder of reliability standards, per-context
//! achievability, and justification verdicts.
//!
//! The shipped ladder has three rungs, ordered Level < UmpUnbiased < Ump.
//! Alternative ladders can be supplied as an ordered rung list; the default
//! is what the evaluation functions use.

use num::{One, Signed};

use crate::construct::{self, ConstraintSet, UmpDecision};
use crate::error::{Error, Result};
use crate::ratio::Ratio;
use crate::testkit::{self, Test};
use crate::worlds::{Hypothesis, ParameterSpace};

/// A standard of reliability at the context's level alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StandardRung {
    /// Minimum qualification: significance level alpha.
    Level,
    /// Uniform maximum power among the unbiased level-alpha tests.
    UmpUnbiased,
    /// Uniform maximum power among the level-alpha tests.
    Ump,
}

impl StandardRung {
    pub fn name(&self) -> &'static str {
        match self {
            StandardRung::Level => "level",
            StandardRung::UmpUnbiased => "ump-unbiased",
            StandardRung::Ump => "ump",
        }
    }
}

/// An ordered ladder, highest rung first. The default is the three-rung
/// ladder; custom ladders must still terminate in Level so a highest
/// achievable rung always exists.
#[derive(Debug, Clone)]
pub struct Ladder {
    rungs: Vec<StandardRung>,
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder { rungs: vec![StandardRung::Ump, StandardRung::UmpUnbiased, StandardRung::Level] }
    }
}

impl Ladder {
    pub fn new(rungs: Vec<StandardRung>) -> Result<Self> {
        if rungs.last() != Some(&StandardRung::Level) {
            return Err(Error::Validation("a ladder must end in the Level rung".into()));
        }
        Ok(Ladder { rungs })
    }

    pub fn rungs(&self) -> &[StandardRung] {
        &self.rungs
    }

    /// Rungs strictly above the given one, in ladder order.
    pub fn above(&self, rung: StandardRung) -> &[StandardRung] {
        let pos = self.rungs.iter().position(|r| *r == rung).unwrap_or(self.rungs.len());
        &self.rungs[..pos]
    }
}

/// The problem context of the achievabilist norm: parameter space, hypothesis
/// partition, and level alpha. The sample size is carried by the space.
#[derive(Debug, Clone)]
pub struct ProblemContext {
    space: ParameterSpace,
    hyp: Hypothesis,
    alpha: Ratio,
}

impl ProblemContext {
    pub fn new(space: ParameterSpace, hyp: Hypothesis, alpha: Ratio) -> Result<Self> {
        if alpha.is_negative() || alpha > Ratio::one() {
            return Err(Error::Context(format!("alpha {} outside [0, 1]", alpha)));
        }
        if hyp.null_indices().is_empty() {
            return Err(Error::Context("null hypothesis set must be nonempty".into()));
        }
        if hyp
            .null_indices()
            .iter()
            .chain(hyp.alt_indices())
            .any(|&i| i >= space.len())
        {
            return Err(Error::Context("hypothesis indices outside the parameter space".into()));
        }
        Ok(ProblemContext { space, hyp, alpha })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn hyp(&self) -> &Hypothesis {
        &self.hyp
    }

    pub fn alpha(&self) -> &Ratio {
        &self.alpha
    }

    pub fn n(&self) -> usize {
        self.space.space().n()
    }

    /// True when the alternative set is empty, making UMP-type rungs vacuous.
    pub fn is_degenerate(&self) -> bool {
        self.hyp.alt_indices().is_empty()
    }
}

/// Achievability verdict for one rung in one context.
#[derive(Debug, Clone)]
pub enum RungStatus {
    Achievable(Test),
    NotAchievable(UmpDecision),
    /// Degenerate context: the rung's quantifier over alternatives is empty.
    NotApplicable,
}

impl RungStatus {
    pub fn is_achievable(&self) -> bool {
        matches!(self, RungStatus::Achievable(_))
    }
}

/// Decides whether a rung is achievable in the context, returning a witness
/// when it is. Level is achievable in every valid context (never-reject).
pub fn achievable(rung: StandardRung, ctx: &ProblemContext) -> Result<RungStatus> {
    match rung {
        StandardRung::Level => Ok(RungStatus::Achievable(Test::never_reject(
            ctx.space.space().clone(),
        ))),
        StandardRung::Ump | StandardRung::UmpUnbiased => {
            if ctx.is_degenerate() {
                return Ok(RungStatus::NotApplicable);
            }
            let constraints = match rung {
                StandardRung::Ump => ConstraintSet::LevelOnly,
                _ => ConstraintSet::LevelAndUnbiased,
            };
            let decision =
                construct::decide_ump_with(&ctx.space, &ctx.hyp, &ctx.alpha, constraints)?;
            match decision {
                UmpDecision::Exists { ref witness, .. } => Ok(RungStatus::Achievable(witness.clone())),
                UmpDecision::NotExists { .. } => Ok(RungStatus::NotAchievable(decision)),
            }
        }
    }
}

/// The highest achievable rung with its witness.
#[derive(Debug, Clone)]
pub struct HighestAchievable {
    pub rung: StandardRung,
    pub witness: Test,
    /// Set when the context has no alternatives and rungs above Level were
    /// skipped as not applicable rather than decided.
    pub degenerate: bool,
}

/// Scans the ladder top-down and returns the first achievable rung. The
/// Level rung guarantees termination.
pub fn highest_achievable(ctx: &ProblemContext) -> Result<HighestAchievable> {
    highest_achievable_in(&Ladder::default(), ctx)
}

pub fn highest_achievable_in(ladder: &Ladder, ctx: &ProblemContext) -> Result<HighestAchievable> {
    for &rung in ladder.rungs() {
        if let RungStatus::Achievable(witness) = achievable(rung, ctx)? {
            return Ok(HighestAchievable { rung, witness, degenerate: ctx.is_degenerate() });
        }
    }
    Err(Error::Internal("ladder exhausted without an achievable rung".into()))
}

/// Where and how a queried test misses the operative rung.
#[derive(Debug, Clone)]
pub enum JustificationFailure {
    /// Rejection probability above alpha at this null theta.
    LevelExceeded { theta: Ratio, rejection: Ratio },
    /// Power below some null world's power; (alternative theta, null theta).
    Biased { alt_theta: Ratio, null_theta: Ratio },
    /// Power strictly below the envelope at this alternative theta.
    BelowEnvelope { theta: Ratio, power: Ratio, envelope: Ratio },
}

/// The achievabilist verdict for one test in one context.
#[derive(Debug, Clone)]
pub struct JustificationReport {
    pub highest_rung: StandardRung,
    pub witness: Test,
    pub justified: bool,
    pub degenerate: bool,
    pub failures: Vec<JustificationFailure>,
}

/// A test is justified only if it meets the highest achievable rung. The
/// report carries exact failure witnesses when it does not.
pub fn justify(test: &Test, ctx: &ProblemContext) -> Result<JustificationReport> {
    justify_in(&Ladder::default(), test, ctx)
}

pub fn justify_in(ladder: &Ladder, test: &Test, ctx: &ProblemContext) -> Result<JustificationReport> {
    let highest = highest_achievable_in(ladder, ctx)?;
    let mut failures = Vec::new();

    // Level applies at every rung.
    for &i in ctx.hyp.null_indices() {
        let p = testkit::rejection_probability(test, ctx.space.world(i))?;
        if &p > ctx.alpha() {
            failures.push(JustificationFailure::LevelExceeded {
                theta: ctx.space.world(i).theta().clone(),
                rejection: p,
            });
        }
    }

    match highest.rung {
        StandardRung::Level => {}
        StandardRung::Ump | StandardRung::UmpUnbiased => {
            let constraints = match highest.rung {
                StandardRung::Ump => ConstraintSet::LevelOnly,
                _ => ConstraintSet::LevelAndUnbiased,
            };
            if highest.rung == StandardRung::UmpUnbiased {
                let rep = testkit::is_unbiased(test, &ctx.hyp, &ctx.space)?;
                if let Some((alt_theta, null_theta)) = rep.witness {
                    failures.push(JustificationFailure::Biased { alt_theta, null_theta });
                }
            }
            let env = construct::power_envelope(&ctx.space, &ctx.hyp, &ctx.alpha, constraints)?;
            for &a in ctx.hyp.alt_indices() {
                let w = ctx.space.world(a);
                let power = testkit::rejection_probability(test, w)?;
                let bound = env.value_at(w.theta()).unwrap();
                if &power < bound {
                    failures.push(JustificationFailure::BelowEnvelope {
                        theta: w.theta().clone(),
                        power,
                        envelope: bound.clone(),
                    });
                }
            }
        }
    }

    Ok(JustificationReport {
        justified: failures.is_empty(),
        highest_rung: highest.rung,
        witness: highest.witness,
        degenerate: highest.degenerate,
        failures,
    })
}
