//! Command implementations: each takes a parsed document plus options and
//! returns the rendered output (JSON report or CSV table) as a string.

use std::time::Instant;

use serde::Serialize;

use finfreq::construct::{power_envelope, ConstraintSet, UmpDecision};
use finfreq::estimation::{
    bias, coverage_probability, dominates, expected_width, is_admissible_in_class,
    is_umvu_in_class, mse, variance, Estimand,
};
use finfreq::hierarchy::{
    achievable, highest_achievable, justify, JustificationFailure, RungStatus, StandardRung,
};
use finfreq::oracle::{certify_envelope, EnumerationBudget};
use finfreq::ratio::{decimal_string, ratio_string};
use finfreq::testkit::{has_level, is_unbiased, power_function, size};
use finfreq::{Error, Ratio, Result};

use crate::doc::{LoadedProblem, ProblemDocument, TestDecl};
use crate::report::{
    envelope_points, test_as_decl, CertificateReport, CertificationMargin, CertificationReport,
    EnvelopePoint, Exact, PowerRow, Report, DECIMAL_SIG_DIGITS,
};

fn load(doc: &ProblemDocument, alpha_override: Option<&Ratio>) -> Result<(LoadedProblem, ProblemDocument)> {
    let loaded = doc.load(alpha_override)?;
    let echo = doc.with_alpha(loaded.ctx.alpha());
    Ok((loaded, echo))
}

fn power_rows(loaded: &LoadedProblem, test: &finfreq::testkit::Test) -> Result<Vec<PowerRow>> {
    let ctx = &loaded.ctx;
    let pf = power_function(test, ctx.space())?;
    let rows = pf
        .thetas()
        .iter()
        .zip(pf.values())
        .enumerate()
        .map(|(i, (t, v))| PowerRow {
            theta: Exact::of(t),
            value: Exact::of(v),
            role: if ctx.hyp().null_indices().contains(&i) { "null" } else { "alternative" },
        })
        .collect();
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct EvaluateResult {
    pub test_id: String,
    pub alpha: Exact,
    pub power_function: Vec<PowerRow>,
    pub size: Exact,
    pub has_level: bool,
    pub unbiased: bool,
    /// The alternative set is empty, so unbiasedness holds vacuously.
    pub unbiased_vacuous: bool,
    /// On bias: (alternative theta, null theta) with power(alt) < power(null).
    pub bias_witness: Option<(Exact, Exact)>,
}

pub fn cmd_evaluate(
    doc: &ProblemDocument,
    test_id: &str,
    alpha_override: Option<&Ratio>,
) -> Result<String> {
    let start = Instant::now();
    let (loaded, echo) = load(doc, alpha_override)?;
    let test = loaded.test(test_id)?;
    let ctx = &loaded.ctx;
    let sz = size(test, ctx.hyp(), ctx.space())?;
    let level_ok = has_level(test, ctx.alpha(), ctx.hyp(), ctx.space())?;
    let unb = is_unbiased(test, ctx.hyp(), ctx.space())?;
    let result = EvaluateResult {
        test_id: test_id.to_string(),
        alpha: Exact::of(ctx.alpha()),
        power_function: power_rows(&loaded, test)?,
        size: Exact::of(&sz),
        has_level: level_ok,
        unbiased: unb.unbiased,
        unbiased_vacuous: unb.vacuous,
        bias_witness: unb.witness.map(|(a, n)| (Exact::of(&a), Exact::of(&n))),
    };
    let report = Report {
        command: "evaluate".to_string(),
        context: echo,
        result,
        elapsed_ms: start.elapsed().as_millis(),
    };
    Ok(report.to_json())
}

/// Which decision the `decide` command runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecideMode {
    Ump,
    Umpu,
    Hierarchy,
}

#[derive(Debug, Serialize)]
pub struct DecideResult {
    pub mode: &'static str,
    pub alpha: Exact,
    /// "exists", "not_exists", "not_applicable" (degenerate context), or a
    /// rung name in hierarchy mode.
    pub verdict: String,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TestDecl>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_power: Option<Vec<PowerRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Vec<EnvelopePoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certification: Option<CertificationReport>,
}

fn decision_fields(
    loaded: &LoadedProblem,
    decision: &UmpDecision,
    result: &mut DecideResult,
) -> Result<()> {
    result.envelope = Some(envelope_points(decision.envelope()));
    match decision {
        UmpDecision::Exists { witness, .. } => {
            result.verdict = "exists".to_string();
            result.witness = Some(test_as_decl("witness", witness));
            result.witness_power = Some(power_rows(loaded, witness)?);
        }
        UmpDecision::NotExists { certificate, .. } => {
            result.verdict = "not_exists".to_string();
            result.certificate = Some(CertificateReport::of(certificate));
        }
    }
    Ok(())
}

fn run_certification(
    loaded: &LoadedProblem,
    budget: &EnumerationBudget,
) -> Result<CertificationReport> {
    let ctx = &loaded.ctx;
    let env = power_envelope(ctx.space(), ctx.hyp(), ctx.alpha(), ConstraintSet::LevelOnly)?;
    let cert = certify_envelope(&env, ctx.space(), ctx.hyp(), ctx.alpha(), budget)?;
    Ok(CertificationReport {
        certified: true,
        vacuous: cert.vacuous,
        margins: cert
            .margins
            .iter()
            .map(|m| CertificationMargin {
                theta: Exact::of(&m.theta),
                envelope_value: Exact::of(&m.envelope_value),
                deterministic_best: Exact::of(&m.deterministic_best),
                margin: Exact::of(&m.margin),
            })
            .collect(),
    })
}

pub fn cmd_decide(
    doc: &ProblemDocument,
    mode: DecideMode,
    alpha_override: Option<&Ratio>,
    certify: Option<&EnumerationBudget>,
) -> Result<String> {
    let start = Instant::now();
    let (loaded, echo) = load(doc, alpha_override)?;
    let ctx = &loaded.ctx;
    let mut result = DecideResult {
        mode: match mode {
            DecideMode::Ump => "ump",
            DecideMode::Umpu => "umpu",
            DecideMode::Hierarchy => "hierarchy",
        },
        alpha: Exact::of(ctx.alpha()),
        verdict: String::new(),
        degenerate: ctx.is_degenerate(),
        witness: None,
        witness_power: None,
        certificate: None,
        envelope: None,
        certification: None,
    };
    match mode {
        DecideMode::Ump | DecideMode::Umpu => {
            let rung = if mode == DecideMode::Ump {
                StandardRung::Ump
            } else {
                StandardRung::UmpUnbiased
            };
            match achievable(rung, ctx)? {
                RungStatus::Achievable(witness) => {
                    let constraints = if mode == DecideMode::Ump {
                        ConstraintSet::LevelOnly
                    } else {
                        ConstraintSet::LevelAndUnbiased
                    };
                    let env = power_envelope(ctx.space(), ctx.hyp(), ctx.alpha(), constraints)?;
                    result.verdict = "exists".to_string();
                    result.witness = Some(test_as_decl("witness", &witness));
                    result.witness_power = Some(power_rows(&loaded, &witness)?);
                    result.envelope = Some(envelope_points(&env));
                }
                RungStatus::NotAchievable(decision) => {
                    decision_fields(&loaded, &decision, &mut result)?;
                }
                RungStatus::NotApplicable => {
                    result.verdict = "not_applicable".to_string();
                }
            }
        }
        DecideMode::Hierarchy => {
            let highest = highest_achievable(ctx)?;
            result.verdict = highest.rung.name().to_string();
            result.witness = Some(test_as_decl("witness", &highest.witness));
            result.witness_power = Some(power_rows(&loaded, &highest.witness)?);
        }
    }
    if let Some(budget) = certify {
        result.certification = Some(run_certification(&loaded, budget)?);
    }
    let report = Report {
        command: "decide".to_string(),
        context: echo,
        result,
        elapsed_ms: start.elapsed().as_millis(),
    };
    Ok(report.to_json())
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureReport {
    LevelExceeded { theta: Exact, rejection: Exact },
    Biased { alt_theta: Exact, null_theta: Exact },
    BelowEnvelope { theta: Exact, power: Exact, envelope: Exact },
}

impl FailureReport {
    fn of(f: &JustificationFailure) -> Self {
        match f {
            JustificationFailure::LevelExceeded { theta, rejection } => {
                FailureReport::LevelExceeded {
                    theta: Exact::of(theta),
                    rejection: Exact::of(rejection),
                }
            }
            JustificationFailure::Biased { alt_theta, null_theta } => FailureReport::Biased {
                alt_theta: Exact::of(alt_theta),
                null_theta: Exact::of(null_theta),
            },
            JustificationFailure::BelowEnvelope { theta, power, envelope } => {
                FailureReport::BelowEnvelope {
                    theta: Exact::of(theta),
                    power: Exact::of(power),
                    envelope: Exact::of(envelope),
                }
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct JustifyResult {
    pub test_id: String,
    pub alpha: Exact,
    pub highest_rung: String,
    pub justified: bool,
    pub degenerate: bool,
    pub witness: TestDecl,
    pub failures: Vec<FailureReport>,
}

pub fn cmd_justify(
    doc: &ProblemDocument,
    test_id: &str,
    alpha_override: Option<&Ratio>,
) -> Result<String> {
    let start = Instant::now();
    let (loaded, echo) = load(doc, alpha_override)?;
    let test = loaded.test(test_id)?;
    let rep = justify(test, &loaded.ctx)?;
    let result = JustifyResult {
        test_id: test_id.to_string(),
        alpha: Exact::of(loaded.ctx.alpha()),
        highest_rung: rep.highest_rung.name().to_string(),
        justified: rep.justified,
        degenerate: rep.degenerate,
        witness: test_as_decl("witness", &rep.witness),
        failures: rep.failures.iter().map(FailureReport::of).collect(),
    };
    let report = Report {
        command: "justify".to_string(),
        context: echo,
        result,
        elapsed_ms: start.elapsed().as_millis(),
    };
    Ok(report.to_json())
}

/// CSV power table: one row per theta, exact and decimal columns per test.
pub fn cmd_power_table(
    doc: &ProblemDocument,
    test_ids: &[String],
    alpha_override: Option<&Ratio>,
) -> Result<String> {
    let (loaded, _) = load(doc, alpha_override)?;
    let ids: Vec<String> = if test_ids.is_empty() {
        loaded.tests.iter().map(|(id, _)| id.clone()).collect()
    } else {
        test_ids.to_vec()
    };
    if ids.is_empty() {
        return Err(Error::Validation("no tests declared and none requested".into()));
    }
    let mut functions = Vec::new();
    for id in &ids {
        let test = loaded.test(id)?;
        functions.push(power_function(test, loaded.ctx.space())?);
    }
    let mut out = String::from("theta,theta_decimal");
    for id in &ids {
        if id.contains(',') || id.contains('"') || id.contains('\n') {
            return Err(Error::Validation(format!("test id {id:?} is not CSV-safe")));
        }
        out.push_str(&format!(",{id},{id}_decimal"));
    }
    out.push('\n');
    for (i, w) in loaded.ctx.space().worlds().iter().enumerate() {
        let t = w.theta();
        out.push_str(&format!("{},{}", ratio_string(t), decimal_string(t, DECIMAL_SIG_DIGITS)));
        for pf in &functions {
            let v = &pf.values()[i];
            out.push_str(&format!(",{},{}", ratio_string(v), decimal_string(v, DECIMAL_SIG_DIGITS)));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct EstimatorRow {
    pub theta: Exact,
    pub mse: Exact,
    pub bias: Exact,
    pub variance: Exact,
}

#[derive(Debug, Serialize)]
pub struct EstimatorReport {
    pub id: String,
    pub per_world: Vec<EstimatorRow>,
    pub unbiased: bool,
    pub admissible_in_class: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominated_by: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domination_witness_theta: Option<Exact>,
    pub umvu_in_class: bool,
    /// No unbiased member exists in the class, so UMVU is vacant.
    pub umvu_vacuous: bool,
}

#[derive(Debug, Serialize)]
pub struct DominationEntry {
    pub dominator: String,
    pub dominated: String,
    pub witness_theta: Exact,
}

#[derive(Debug, Serialize)]
pub struct IntervalRow {
    pub theta: Exact,
    pub coverage: Exact,
    pub expected_width: Exact,
}

#[derive(Debug, Serialize)]
pub struct IntervalReport {
    pub id: String,
    pub per_world: Vec<IntervalRow>,
}

#[derive(Debug, Serialize)]
pub struct EstimateResult {
    pub estimators: Vec<EstimatorReport>,
    /// All strict dominations among the queried estimators.
    pub dominations: Vec<DominationEntry>,
    pub interval_estimators: Vec<IntervalReport>,
}

pub fn cmd_estimate(
    doc: &ProblemDocument,
    estimator_ids: &[String],
    alpha_override: Option<&Ratio>,
) -> Result<String> {
    let start = Instant::now();
    let (loaded, echo) = load(doc, alpha_override)?;
    let ids: Vec<String> = if estimator_ids.is_empty() {
        loaded.estimators.iter().map(|(id, _)| id.clone()).collect()
    } else {
        estimator_ids.to_vec()
    };
    if ids.is_empty() && loaded.interval_estimators.is_empty() {
        return Err(Error::Validation("no estimators declared and none requested".into()));
    }
    let g = Estimand::Identity;
    let space = loaded.ctx.space();
    let class: Vec<finfreq::estimation::Estimator> = ids
        .iter()
        .map(|id| loaded.estimator(id).cloned())
        .collect::<Result<Vec<_>>>()?;

    let mut estimators = Vec::new();
    let mut dominations = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let e = &class[i];
        let mut per_world = Vec::new();
        for w in space.worlds() {
            per_world.push(EstimatorRow {
                theta: Exact::of(w.theta()),
                mse: Exact::of(&mse(e, w, &g)?),
                bias: Exact::of(&bias(e, w, &g)?),
                variance: Exact::of(&variance(e, w)?),
            });
        }
        let adm = is_admissible_in_class(e, &class, space, &g)?;
        let umvu = is_umvu_in_class(e, &class, space, &g)?;
        estimators.push(EstimatorReport {
            id: id.clone(),
            per_world,
            unbiased: finfreq::estimation::is_unbiased_estimator(e, space, &g)?,
            admissible_in_class: adm.admissible,
            dominated_by: adm.dominator.as_ref().map(|(j, _)| ids[*j].clone()),
            domination_witness_theta: adm.dominator.as_ref().map(|(_, t)| Exact::of(t)),
            umvu_in_class: umvu.umvu,
            umvu_vacuous: umvu.vacuous,
        });
        for (j, other_id) in ids.iter().enumerate() {
            if i == j {
                continue;
            }
            let rep = dominates(e, &class[j], space, &g)?;
            if rep.dominates {
                dominations.push(DominationEntry {
                    dominator: id.clone(),
                    dominated: other_id.clone(),
                    witness_theta: Exact::of(&rep.strict_witness.unwrap()),
                });
            }
        }
    }

    let mut interval_estimators = Vec::new();
    for (id, ie) in &loaded.interval_estimators {
        let mut per_world = Vec::new();
        for w in space.worlds() {
            per_world.push(IntervalRow {
                theta: Exact::of(w.theta()),
                coverage: Exact::of(&coverage_probability(ie, w, &g)?),
                expected_width: Exact::of(&expected_width(ie, w)?),
            });
        }
        interval_estimators.push(IntervalReport { id: id.clone(), per_world });
    }

    let result = EstimateResult { estimators, dominations, interval_estimators };
    let report = Report {
        command: "estimate".to_string(),
        context: echo,
        result,
        elapsed_ms: start.elapsed().as_millis(),
    };
    Ok(report.to_json())
}
