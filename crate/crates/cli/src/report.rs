//! Structured report documents.
//!
//! Every rational carries two renderings: the authoritative exact form and a
//! 15-significant-digit decimal convenience form. Reports echo the effective
//! problem document so any result is reproducible from the report alone.

use std::collections::BTreeMap;

use serde::Serialize;

use finfreq::construct::{NonexistenceCertificate, PowerEnvelope};
use finfreq::ratio::{decimal_string, ratio_string};
use finfreq::testkit::Test;
use finfreq::Ratio;

use crate::doc::{ProblemDocument, TestDecl};

/// Significant digits in decimal convenience renderings.
pub const DECIMAL_SIG_DIGITS: usize = 15;

/// An exact rational with its decimal rendering alongside.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Exact {
    pub exact: String,
    pub decimal: String,
}

impl Exact {
    pub fn of(r: &Ratio) -> Self {
        Exact { exact: ratio_string(r), decimal: decimal_string(r, DECIMAL_SIG_DIGITS) }
    }
}

/// One point of a power function or envelope.
#[derive(Debug, Clone, Serialize)]
pub struct PowerRow {
    pub theta: Exact,
    pub value: Exact,
    /// "null" or "alternative".
    pub role: &'static str,
}

/// A witness test serialized as a declaration, ready to paste back into a
/// problem document.
pub fn test_as_decl(id: &str, test: &Test) -> TestDecl {
    let space = test.space();
    let mut by_sequence = BTreeMap::new();
    for seq in 0..space.seq_count() {
        let phi = test.phi(seq);
        if !num::Zero::is_zero(phi) {
            by_sequence.insert(space.seq_string(seq), ratio_string(phi));
        }
    }
    TestDecl { id: id.to_string(), by_count: None, by_sequence: Some(by_sequence), phi: None }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopePoint {
    pub theta: Exact,
    pub value: Exact,
}

pub fn envelope_points(env: &PowerEnvelope) -> Vec<EnvelopePoint> {
    env.iter()
        .map(|(t, v)| EnvelopePoint { theta: Exact::of(t), value: Exact::of(v) })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub attained_theta: Exact,
    pub shortfall_theta: Exact,
    pub constrained_max: Exact,
    pub envelope_value: Exact,
}

impl CertificateReport {
    pub fn of(c: &NonexistenceCertificate) -> Self {
        CertificateReport {
            attained_theta: Exact::of(&c.attained_theta),
            shortfall_theta: Exact::of(&c.shortfall_theta),
            constrained_max: Exact::of(&c.constrained_max),
            envelope_value: Exact::of(&c.envelope_value),
        }
    }
}

/// The envelope certification block emitted under `--certify`.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub certified: bool,
    pub vacuous: bool,
    pub margins: Vec<CertificationMargin>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationMargin {
    pub theta: Exact,
    pub envelope_value: Exact,
    pub deterministic_best: Exact,
    pub margin: Exact,
}

/// Report wrapper shared by all commands.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub command: String,
    /// Echo of the effective problem document (alpha override applied);
    /// re-running the command on this echo reproduces the result.
    pub context: ProblemDocument,
    pub result: T,
    /// Wall-clock time; informational only.
    pub elapsed_ms: u128,
}

impl<T: Serialize> Report<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
