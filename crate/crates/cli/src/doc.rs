//! JSON problem documents and their validation into core contexts.
//!
//! Rationals travel as strings ("a/b" or an integer) so exactness survives
//! serialization. A document validates into a [`LoadedProblem`]; every
//! declared test and estimator is checked against its module's invariants at
//! load time, so commands never see malformed inputs.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use finfreq::estimation::{Estimator, IntervalEstimator};
use finfreq::hierarchy::ProblemContext;
use finfreq::ratio::parse_ratio;
use finfreq::testkit::Test;
use finfreq::worlds::{
    build_iid_bernoulli_in, make_compound_grid, make_simple_grid, Alphabet, Hypothesis,
    ParameterSpace, SampleSpace, World,
};
use finfreq::{Error, Ratio, Result};

/// Top-level problem document. Reports echo this structure back, so a
/// report's `context` field re-parses as a valid document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub model: ModelSection,
    pub hypothesis: HypothesisSection,
    pub alpha: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimators: Vec<EstimatorDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interval_estimators: Vec<IntervalEstimatorDecl>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Outcome labels; defaults to the binary R/N alphabet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    pub n: usize,
    pub grid: GridSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSection {
    /// Explicit theta list; each theta gets its IID Bernoulli world.
    Thetas { thetas: Vec<String> },
    /// All proportions a / marble_count.
    Simple { marble_count: u32 },
    /// All distinct proportions a / b with b in [b_min, b_max].
    Compound { b_min: u32, b_max: u32 },
    /// Fully explicit worlds (arbitrary distributions, any alphabet).
    Explicit { worlds: Vec<WorldDecl> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldDecl {
    pub theta: String,
    /// One probability per sequence, in sequence-id order.
    pub dist: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HypothesisSection {
    /// Null: theta >= bound.
    Ge { bound: String },
    /// Null: theta <= bound.
    Le { bound: String },
    /// Null: theta = theta0.
    Point { theta: String },
    /// Null: lo <= theta <= hi.
    Interval { lo: String, hi: String },
    /// Null: explicit theta list.
    Thetas { thetas: Vec<String> },
}

/// A declared test: exactly one representation must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestDecl {
    pub id: String,
    /// phi by success count, e.g. {"0": "1", "1": "4/5"}; missing counts are 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_count: Option<BTreeMap<String, String>>,
    /// phi by sequence string, e.g. {"RRNR": "1/2"}; missing sequences are 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_sequence: Option<BTreeMap<String, String>>,
    /// Dense phi vector in sequence-id order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<String>>,
}

/// A declared point estimator: exactly one representation must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorDecl {
    pub id: String,
    /// Estimate by success count; must list all n+1 counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_count: Option<Vec<String>>,
    /// Estimate by sequence string; must cover every sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_sequence: Option<BTreeMap<String, String>>,
    /// Dense value vector in sequence-id order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
    /// The constant estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
}

/// A declared interval estimator: intervals as [lo, hi] string pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalEstimatorDecl {
    pub id: String,
    /// Interval by success count; must list all n+1 counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_count: Option<Vec<[String; 2]>>,
    /// Dense interval vector in sequence-id order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<[String; 2]>>,
}

/// A validated document: core context plus named, validated declarations.
pub struct LoadedProblem {
    pub ctx: ProblemContext,
    pub tests: Vec<(String, Test)>,
    pub estimators: Vec<(String, Estimator)>,
    pub interval_estimators: Vec<(String, IntervalEstimator)>,
}

impl LoadedProblem {
    pub fn test(&self, id: &str) -> Result<&Test> {
        self.tests
            .iter()
            .find(|(tid, _)| tid == id)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::Validation(format!("no declared test with id {id:?}")))
    }

    pub fn estimator(&self, id: &str) -> Result<&Estimator> {
        self.estimators
            .iter()
            .find(|(eid, _)| eid == id)
            .map(|(_, e)| e)
            .ok_or_else(|| Error::Validation(format!("no declared estimator with id {id:?}")))
    }

    pub fn interval_estimator(&self, id: &str) -> Result<&IntervalEstimator> {
        self.interval_estimators
            .iter()
            .find(|(eid, _)| eid == id)
            .map(|(_, e)| e)
            .ok_or_else(|| {
                Error::Validation(format!("no declared interval estimator with id {id:?}"))
            })
    }
}

fn field_ratio(context: &str, s: &str) -> Result<Ratio> {
    parse_ratio(s).map_err(|e| Error::Validation(format!("{context}: {e}")))
}

fn build_space(model: &ModelSection) -> Result<ParameterSpace> {
    match (&model.alphabet, &model.grid) {
        (None, GridSection::Simple { marble_count }) => make_simple_grid(*marble_count, model.n),
        (None, GridSection::Compound { b_min, b_max }) => {
            make_compound_grid(*b_min, *b_max, model.n)
        }
        (None, GridSection::Thetas { thetas }) => {
            let space = SampleSpace::binary(model.n)?;
            let worlds = thetas
                .iter()
                .map(|t| build_iid_bernoulli_in(space.clone(), &field_ratio("model.grid.thetas", t)?))
                .collect::<Result<Vec<_>>>()?;
            ParameterSpace::new(worlds)
        }
        (alphabet, GridSection::Explicit { worlds }) => {
            let alpha = match alphabet {
                Some(labels) => Alphabet::new(labels.clone())?,
                None => Alphabet::binary(),
            };
            let space = SampleSpace::new(alpha, model.n)?;
            let built = worlds
                .iter()
                .map(|w| {
                    let theta = field_ratio("model.grid.worlds.theta", &w.theta)?;
                    let dist = w
                        .dist
                        .iter()
                        .map(|p| field_ratio("model.grid.worlds.dist", p))
                        .collect::<Result<Vec<_>>>()?;
                    World::explicit(space.clone(), theta, dist)
                })
                .collect::<Result<Vec<_>>>()?;
            ParameterSpace::new(built)
        }
        (Some(_), _) => Err(Error::Validation(
            "a custom alphabet requires grid kind \"explicit\" (theta grids imply the Bernoulli model)"
                .into(),
        )),
    }
}

fn build_hypothesis(section: &HypothesisSection, space: &ParameterSpace) -> Result<Hypothesis> {
    match section {
        HypothesisSection::Ge { bound } => {
            Hypothesis::at_least(space, &field_ratio("hypothesis.bound", bound)?)
        }
        HypothesisSection::Le { bound } => {
            Hypothesis::at_most(space, &field_ratio("hypothesis.bound", bound)?)
        }
        HypothesisSection::Point { theta } => {
            Hypothesis::point(space, &field_ratio("hypothesis.theta", theta)?)
        }
        HypothesisSection::Interval { lo, hi } => Hypothesis::interval(
            space,
            &field_ratio("hypothesis.lo", lo)?,
            &field_ratio("hypothesis.hi", hi)?,
        ),
        HypothesisSection::Thetas { thetas } => {
            let parsed = thetas
                .iter()
                .map(|t| field_ratio("hypothesis.thetas", t))
                .collect::<Result<Vec<_>>>()?;
            let null = parsed
                .iter()
                .map(|t| {
                    space.index_of_theta(t).ok_or_else(|| {
                        Error::Validation(format!("null theta {} is not in the parameter space", t))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Hypothesis::from_null_indices(space, null)
        }
    }
}

fn exactly_one(id: &str, kind: &str, present: &[bool]) -> Result<()> {
    match present.iter().filter(|p| **p).count() {
        1 => Ok(()),
        0 => Err(Error::Validation(format!("{kind} {id:?} declares no representation"))),
        _ => Err(Error::Validation(format!("{kind} {id:?} declares multiple representations"))),
    }
}

fn build_test(decl: &TestDecl, space: &Arc<SampleSpace>) -> Result<Test> {
    exactly_one(
        &decl.id,
        "test",
        &[decl.by_count.is_some(), decl.by_sequence.is_some(), decl.phi.is_some()],
    )?;
    let ctx = format!("test {:?}", decl.id);
    if let Some(by_count) = &decl.by_count {
        let entries = by_count
            .iter()
            .map(|(k, p)| {
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::Validation(format!("{ctx}: bad count key {k:?}")))?;
                Ok((k, field_ratio(&ctx, p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        return Test::from_count_map(space.clone(), &entries);
    }
    if let Some(by_seq) = &decl.by_sequence {
        let mut phi = vec![Ratio::from_integer(0.into()); space.seq_count()];
        for (s, p) in by_seq {
            phi[space.parse_seq(s)?] = field_ratio(&ctx, p)?;
        }
        return Test::new(space.clone(), phi);
    }
    let phi = decl
        .phi
        .as_ref()
        .unwrap()
        .iter()
        .map(|p| field_ratio(&ctx, p))
        .collect::<Result<Vec<_>>>()?;
    Test::new(space.clone(), phi)
}

fn build_estimator(decl: &EstimatorDecl, space: &Arc<SampleSpace>) -> Result<Estimator> {
    exactly_one(
        &decl.id,
        "estimator",
        &[
            decl.by_count.is_some(),
            decl.by_sequence.is_some(),
            decl.values.is_some(),
            decl.constant.is_some(),
        ],
    )?;
    let ctx = format!("estimator {:?}", decl.id);
    if let Some(by_count) = &decl.by_count {
        let per_count = by_count
            .iter()
            .map(|v| field_ratio(&ctx, v))
            .collect::<Result<Vec<_>>>()?;
        return Estimator::from_count_values(space.clone(), &per_count);
    }
    if let Some(by_seq) = &decl.by_sequence {
        if by_seq.len() != space.seq_count() {
            return Err(Error::Validation(format!(
                "{ctx}: by_sequence covers {} of {} sequences",
                by_seq.len(),
                space.seq_count()
            )));
        }
        let mut values = vec![Ratio::from_integer(0.into()); space.seq_count()];
        for (s, v) in by_seq {
            values[space.parse_seq(s)?] = field_ratio(&ctx, v)?;
        }
        return Estimator::new(space.clone(), values);
    }
    if let Some(c) = &decl.constant {
        return Ok(Estimator::constant(space.clone(), field_ratio(&ctx, c)?));
    }
    let values = decl
        .values
        .as_ref()
        .unwrap()
        .iter()
        .map(|v| field_ratio(&ctx, v))
        .collect::<Result<Vec<_>>>()?;
    Estimator::new(space.clone(), values)
}

fn build_interval_estimator(
    decl: &IntervalEstimatorDecl,
    space: &Arc<SampleSpace>,
) -> Result<IntervalEstimator> {
    exactly_one(
        &decl.id,
        "interval estimator",
        &[decl.by_count.is_some(), decl.intervals.is_some()],
    )?;
    let ctx = format!("interval estimator {:?}", decl.id);
    let parse_pairs = |pairs: &[[String; 2]]| -> Result<Vec<(Ratio, Ratio)>> {
        pairs
            .iter()
            .map(|[lo, hi]| Ok((field_ratio(&ctx, lo)?, field_ratio(&ctx, hi)?)))
            .collect()
    };
    if let Some(by_count) = &decl.by_count {
        return IntervalEstimator::from_count_intervals(space.clone(), &parse_pairs(by_count)?);
    }
    IntervalEstimator::new(space.clone(), parse_pairs(decl.intervals.as_ref().unwrap())?)
}

fn check_distinct_ids<T>(kind: &str, decls: &[(String, T)]) -> Result<()> {
    for (i, (id, _)) in decls.iter().enumerate() {
        if decls[..i].iter().any(|(other, _)| other == id) {
            return Err(Error::Validation(format!("duplicate {kind} id {id:?}")));
        }
    }
    Ok(())
}

impl ProblemDocument {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::Validation(format!("document does not parse: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization cannot fail")
    }

    /// Validates the whole document into core objects, applying an optional
    /// alpha override.
    pub fn load(&self, alpha_override: Option<&Ratio>) -> Result<LoadedProblem> {
        let space = build_space(&self.model)?;
        let hyp = build_hypothesis(&self.hypothesis, &space)?;
        let alpha = match alpha_override {
            Some(a) => a.clone(),
            None => field_ratio("alpha", &self.alpha)?,
        };
        let sample_space = space.space().clone();
        let tests = self
            .tests
            .iter()
            .map(|d| Ok((d.id.clone(), build_test(d, &sample_space)?)))
            .collect::<Result<Vec<_>>>()?;
        check_distinct_ids("test", &tests)?;
        let estimators = self
            .estimators
            .iter()
            .map(|d| Ok((d.id.clone(), build_estimator(d, &sample_space)?)))
            .collect::<Result<Vec<_>>>()?;
        check_distinct_ids("estimator", &estimators)?;
        let interval_estimators = self
            .interval_estimators
            .iter()
            .map(|d| Ok((d.id.clone(), build_interval_estimator(d, &sample_space)?)))
            .collect::<Result<Vec<_>>>()?;
        check_distinct_ids("interval estimator", &interval_estimators)?;
        let ctx = ProblemContext::new(space, hyp, alpha)?;
        Ok(LoadedProblem { ctx, tests, estimators, interval_estimators })
    }

    /// The document with the effective alpha written back in, for echoing.
    pub fn with_alpha(&self, alpha: &Ratio) -> ProblemDocument {
        let mut doc = self.clone();
        doc.alpha = finfreq::ratio::ratio_string(alpha);
        doc
    }
}
