//! Machine-readable reports ("report v1").
//!
//! Every CLI command that produces structured output wraps it in a
//! [`Report`] envelope: a schema tag, the command name, a digest of the
//! input set file body, the seed (when one was used), and a
//! command-specific payload.  Exact rationals travel as decimal
//! numerator/denominator strings alongside an advisory float rendering,
//! so downstream verifiers lose nothing.  [`RunPayload`] mirrors
//! [`RemovalReport`] losslessly in both directions: a parsed report can
//! be rebuilt and re-verified against the input set alone.

use std::str::FromStr as _;

use num_bigint::BigInt;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::driver::{
    CertSummary, Outcome, RefineRecord, RefinementTrace, RemovalReport, TowerBound,
};
use crate::shattering::{rat_f64, TriangleCert};
use crate::triangles::FarnessBounds;
use crate::{Error, Rat, Result};

pub const SCHEMA: &str = "report v1";

/// Exact rational as strings plus a float rendering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatJson {
    pub num: String,
    pub den: String,
    pub float: f64,
}

impl RatJson {
    pub fn from_rat(r: &Rat) -> RatJson {
        RatJson {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            float: rat_f64(r),
        }
    }

    pub fn to_rat(&self) -> Result<Rat> {
        let num = BigInt::from_str(&self.num)
            .map_err(|e| Error::Parse(format!("bad numerator {:?}: {e}", self.num)))?;
        let den = BigInt::from_str(&self.den)
            .map_err(|e| Error::Parse(format!("bad denominator {:?}: {e}", self.den)))?;
        if den == BigInt::from(0) {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rat::new(num, den))
    }
}

fn hex(x: u32) -> String {
    format!("{x:x}")
}

fn unhex(s: &str) -> Result<u32> {
    u32::from_str_radix(s, 16).map_err(|e| Error::Parse(format!("bad hex element {s:?}: {e}")))
}

/// The envelope around every command payload.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub input_digest: Option<String>,
    pub seed: Option<u64>,
    pub payload: serde_json::Value,
}

impl Report {
    pub fn new(
        command: &str,
        input_digest: Option<String>,
        seed: Option<u64>,
        payload: &impl Serialize,
    ) -> Result<Report> {
        let payload = serde_json::to_value(payload)
            .map_err(|e| Error::Internal(format!("payload serialization failed: {e}")))?;
        Ok(Report {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            input_digest,
            seed,
            payload,
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn parse(text: &str) -> Result<Report> {
        let report: Report = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("bad report JSON: {e}")))?;
        if report.schema != SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                report.schema
            )));
        }
        Ok(report)
    }

    pub fn payload_as<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.payload.clone())
            .map_err(|e| Error::Parse(format!("payload does not match command shape: {e}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountPayload {
    pub n: usize,
    pub set_size: u64,
    pub method: String,
    /// Ordered triples summing to zero, degenerate ones included.
    pub ordered: u64,
    /// Distinct-element triangles after the degeneracy ledger.
    pub distinct: u64,
    /// Present (and true) only for method "both".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods_agree: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackPayload {
    pub n: usize,
    pub set_size: u64,
    pub packing_size: u64,
    /// Triangles as hex element triples.
    pub triangles: Vec<[String; 3]>,
    pub support_size: u64,
    pub farness_lower: RatJson,
    pub farness_upper: RatJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartJson {
    pub size: u64,
    pub subgroup_dim: usize,
    pub subgroup_basis: Vec<String>,
    /// Canonical coset shift of the part inside the ambient coset.
    pub shift: String,
    pub density: RatJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckJson {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecomposePayload {
    pub n: usize,
    pub rho: RatJson,
    pub d: RatJson,
    /// RREF echo of the ambient subgroup passed on the command line.
    pub subgroup_basis: Vec<String>,
    pub shift: String,
    pub parts: Vec<PartJson>,
    pub leftover_size: u64,
    pub checks: Vec<CheckJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertJson {
    pub target_rep: String,
    pub refining_basis: Vec<String>,
    pub alpha: RatJson,
    pub beta: RatJson,
    pub k: f64,
    pub measured_low_fraction: RatJson,
    pub base_density: RatJson,
}

impl CertJson {
    pub fn from_summary(c: &CertSummary) -> CertJson {
        CertJson {
            target_rep: hex(c.target_rep),
            refining_basis: c.refining_basis.iter().map(|&b| hex(b)).collect(),
            alpha: RatJson::from_rat(&c.alpha),
            beta: RatJson::from_rat(&c.beta),
            k: c.k,
            measured_low_fraction: RatJson::from_rat(&c.measured_low_fraction),
            base_density: RatJson::from_rat(&c.base_density),
        }
    }

    pub fn to_summary(&self) -> Result<CertSummary> {
        Ok(CertSummary {
            target_rep: unhex(&self.target_rep)?,
            refining_basis: self
                .refining_basis
                .iter()
                .map(|s| unhex(s))
                .collect::<Result<_>>()?,
            alpha: self.alpha.to_rat()?,
            beta: self.beta.to_rat()?,
            k: self.k,
            measured_low_fraction: self.measured_low_fraction.to_rat()?,
            base_density: self.base_density.to_rat()?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShatterPayload {
    pub n: usize,
    pub subgroup_basis: Vec<String>,
    pub g1: String,
    pub g2: String,
    pub g3: String,
    /// "shatter" or "count".
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<RatJson>,
    /// The certificate (or count floor) was re-checked before reporting.
    pub reverified: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepJson {
    pub dim: usize,
    pub t_parts: u64,
    pub mean_entropy: f64,
    pub gain: f64,
    pub subgroup_basis: Vec<String>,
    pub certificates: Vec<CertJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutcomeJson {
    /// "terminated", "entropy_ceiling" or "subgroup_exhausted".
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<RatJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunPayload {
    pub n: usize,
    pub epsilon0: RatJson,
    pub packing_size: u64,
    pub triangle_count: u64,
    pub delta_witness: RatJson,
    pub farness_lower: RatJson,
    pub farness_upper: RatJson,
    pub initial_mean_entropy: f64,
    pub steps: Vec<StepJson>,
    pub outcome: OutcomeJson,
}

impl RunPayload {
    pub fn from_report(n: usize, r: &RemovalReport) -> RunPayload {
        let steps = r
            .trace
            .steps
            .iter()
            .map(|s| StepJson {
                dim: s.dim,
                t_parts: s.t_parts,
                mean_entropy: s.mean_entropy,
                gain: s.gain,
                subgroup_basis: s.subgroup_basis.iter().map(|&b| hex(b)).collect(),
                certificates: s.certificates.iter().map(CertJson::from_summary).collect(),
            })
            .collect();
        let outcome = match &r.trace.outcome {
            Outcome::Terminated(cert) => OutcomeJson {
                kind: "terminated".into(),
                count: Some(cert.count),
                threshold: Some(RatJson::from_rat(&cert.threshold)),
            },
            Outcome::EntropyCeiling => {
                OutcomeJson { kind: "entropy_ceiling".into(), count: None, threshold: None }
            }
            Outcome::SubgroupExhausted => {
                OutcomeJson { kind: "subgroup_exhausted".into(), count: None, threshold: None }
            }
        };
        RunPayload {
            n,
            epsilon0: RatJson::from_rat(&r.epsilon0),
            packing_size: r.packing_size,
            triangle_count: r.triangle_count,
            delta_witness: RatJson::from_rat(&r.delta_witness),
            farness_lower: RatJson::from_rat(&r.farness.lower),
            farness_upper: RatJson::from_rat(&r.farness.upper),
            initial_mean_entropy: r.trace.initial_mean_entropy,
            steps,
            outcome,
        }
    }

    /// Rebuild the exact in-memory report; feed it to
    /// [`crate::driver::verify_report`] together with the input set.
    pub fn to_report(&self) -> Result<RemovalReport> {
        let steps = self
            .steps
            .iter()
            .map(|s| {
                Ok(RefineRecord {
                    dim: s.dim,
                    t_parts: s.t_parts,
                    mean_entropy: s.mean_entropy,
                    gain: s.gain,
                    subgroup_basis: s
                        .subgroup_basis
                        .iter()
                        .map(|b| unhex(b))
                        .collect::<Result<_>>()?,
                    certificates: s
                        .certificates
                        .iter()
                        .map(|c| c.to_summary())
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let outcome = match self.outcome.kind.as_str() {
            "terminated" => {
                let count = self
                    .outcome
                    .count
                    .ok_or_else(|| Error::Parse("terminated outcome missing count".into()))?;
                let threshold = self
                    .outcome
                    .threshold
                    .as_ref()
                    .ok_or_else(|| Error::Parse("terminated outcome missing threshold".into()))?
                    .to_rat()?;
                Outcome::Terminated(TriangleCert { count, threshold })
            }
            "entropy_ceiling" => Outcome::EntropyCeiling,
            "subgroup_exhausted" => Outcome::SubgroupExhausted,
            other => return Err(Error::Parse(format!("unknown outcome kind {other:?}"))),
        };
        Ok(RemovalReport {
            epsilon0: self.epsilon0.to_rat()?,
            packing_size: self.packing_size,
            triangle_count: self.triangle_count,
            delta_witness: self.delta_witness.to_rat()?,
            trace: RefinementTrace {
                initial_mean_entropy: self.initial_mean_entropy,
                steps,
                outcome,
            },
            farness: FarnessBounds {
                lower: self.farness_lower.to_rat()?,
                upper: self.farness_upper.to_rat()?,
                packing_size: self.packing_size,
            },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundPayload {
    pub epsilon: RatJson,
    pub tower_height: u32,
    pub tower_top: f64,
}

impl BoundPayload {
    pub fn new(epsilon: &Rat, tb: &TowerBound) -> BoundPayload {
        BoundPayload {
            epsilon: RatJson::from_rat(epsilon),
            tower_height: tb.height,
            tower_top: tb.top,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{run_removal, verify_report};
    use crate::instances::{gen_random_density, gen_triangle_free_halfspace};
    use crate::rat;

    #[test]
    fn rational_rendering_round_trips() {
        let cases = [rat(1, 3), rat(-7, 12), rat(0, 1), rat(1, 1)];
        for r in &cases {
            let j = RatJson::from_rat(r);
            assert_eq!(&j.to_rat().unwrap(), r);
        }
        let third = RatJson::from_rat(&rat(1, 3));
        assert_eq!(third.num, "1");
        assert_eq!(third.den, "3");
        assert!((third.float - 1.0 / 3.0).abs() < 1e-15);

        // giant values keep exactness in the strings
        let big = Rat::new(num_bigint::BigInt::from(1u8) << 80, num_bigint::BigInt::from(3));
        let j = RatJson::from_rat(&big);
        assert_eq!(j.to_rat().unwrap(), big);
        assert!((j.float - (2f64.powi(80) / 3.0)).abs() / j.float < 1e-12);

        assert!(RatJson { num: "x".into(), den: "1".into(), float: 0.0 }.to_rat().is_err());
        assert!(RatJson { num: "1".into(), den: "0".into(), float: 0.0 }.to_rat().is_err());
    }

    #[test]
    fn envelope_enforces_the_schema() {
        let payload = CountPayload {
            n: 4,
            set_size: 3,
            method: "both".into(),
            ordered: 6,
            distinct: 1,
            methods_agree: Some(true),
        };
        let report = Report::new("count", Some("ab".repeat(32)), None, &payload).unwrap();
        let text = report.to_json();
        let back = Report::parse(&text).unwrap();
        assert_eq!(back.command, "count");
        assert_eq!(back.seed, None);
        let p: CountPayload = back.payload_as().unwrap();
        assert_eq!(p.ordered, 6);
        assert_eq!(p.methods_agree, Some(true));

        let wrong = text.replace("report v1", "report v0");
        assert!(Report::parse(&wrong).is_err());
        assert!(Report::parse("not json").is_err());
    }

    #[test]
    fn run_payload_rebuilds_a_verifiable_report() {
        // one structured zero-triangle input, a few noisy ones
        let mut cases = vec![(gen_triangle_free_halfspace(8, 2).unwrap(), 5u64)];
        for seed in 0..3 {
            cases.push((gen_random_density(8, &rat(2, 5), seed).unwrap(), seed));
        }
        for (a, seed) in cases {
            let original = run_removal(&a, seed).unwrap();
            let payload = RunPayload::from_report(a.n(), &original);
            let report = Report::new("run", Some("00".repeat(32)), Some(seed), &payload).unwrap();
            let parsed = Report::parse(&report.to_json()).unwrap();
            assert_eq!(parsed.seed, Some(seed));
            let back: RunPayload = parsed.payload_as().unwrap();
            let rebuilt = back.to_report().unwrap();
            // floats survive JSON exactly; the whole structure matches
            assert_eq!(format!("{rebuilt:?}"), format!("{original:?}"));
            verify_report(&a, seed, &rebuilt).unwrap();
        }
    }

    #[test]
    fn outcome_kinds_round_trip() {
        for (kind, count, threshold) in [
            ("terminated", Some(7u64), Some(RatJson::from_rat(&rat(1, 8)))),
            ("entropy_ceiling", None, None),
            ("subgroup_exhausted", None, None),
        ] {
            let payload = RunPayload {
                n: 4,
                epsilon0: RatJson::from_rat(&rat(1, 4)),
                packing_size: 0,
                triangle_count: count.unwrap_or(0),
                delta_witness: RatJson::from_rat(&rat(0, 1)),
                farness_lower: RatJson::from_rat(&rat(0, 1)),
                farness_upper: RatJson::from_rat(&rat(0, 1)),
                initial_mean_entropy: 0.0,
                steps: vec![],
                outcome: OutcomeJson { kind: kind.into(), count, threshold },
            };
            let r = payload.to_report().unwrap();
            let again = RunPayload::from_report(4, &r);
            assert_eq!(again.outcome.kind, kind);
        }
        let bad = OutcomeJson { kind: "mystery".into(), count: None, threshold: None };
        let payload = RunPayload {
            n: 4,
            epsilon0: RatJson::from_rat(&rat(1, 4)),
            packing_size: 0,
            triangle_count: 0,
            delta_witness: RatJson::from_rat(&rat(0, 1)),
            farness_lower: RatJson::from_rat(&rat(0, 1)),
            farness_upper: RatJson::from_rat(&rat(0, 1)),
            initial_mean_entropy: 0.0,
            steps: vec![],
            outcome: bad,
        };
        assert!(payload.to_report().is_err());
    }
}
