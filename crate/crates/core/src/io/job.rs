//! Job specifications, dispatch, and report envelopes.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::codec::JInt;
use crate::constructions::{
    disjoint_hyperplane_orbits, non_expansivity_certificate, verify_family,
    verify_non_expansivity, Budget, DisjointFamilyCertificate, FamilyEvidence,
    NonExpansivityCertificate, VerificationFailure,
};
use crate::dynamics::{
    acts_distally_on_subp, converges_to_full, group_is_finite, invariant_rational_subspaces,
    is_distal_linear, is_ergodic, orbit, GroupFiniteness, InvariantSubspaces, NonDistalWitness,
    OrbitReport,
};
use crate::error::{Error, Result};
use crate::linalg::{
    char_poly, is_unipotent, norm_sq, IntMatrix, IntPolynomial, Lattice, MatrixOrder,
    UnimodularMatrix,
};
use crate::torus::{
    covector_to_hyperplane, hausdorff_distance, isolation_radius_lower_bound, IsolationReport,
    MetricEstimate, PrimitiveCovector, Subtorus,
};

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolution for `distance` and `isolation` jobs when none is given.
pub const DEFAULT_RESOLUTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Orbit,
    DisjointFamily,
    CertifyNonexpansive,
    Distance,
    Isolation,
    GroupFinite,
    Verify,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Classify,
        Command::Orbit,
        Command::DisjointFamily,
        Command::CertifyNonexpansive,
        Command::Distance,
        Command::Isolation,
        Command::GroupFinite,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Orbit => "orbit",
            Command::DisjointFamily => "disjoint-family",
            Command::CertifyNonexpansive => "certify-nonexpansive",
            Command::Distance => "distance",
            Command::Isolation => "isolation",
            Command::GroupFinite => "group-finite",
            Command::Verify => "verify",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown command {s:?}")))
    }
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// One job. Matrices are row-major integer arrays; subtori are
/// `{"ambient_dim": n, "basis": [...]}` in canonical form, or a covector
/// array standing for its kernel hyperplane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtorus: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_norm: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_window: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_candidates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isolation_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Accept non-canonical subtorus bases by re-canonicalizing them.
    #[serde(default, skip_serializing_if = "is_false")]
    pub canonicalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl JobSpec {
    pub fn new(command: Command) -> Self {
        JobSpec {
            format_version: FORMAT_VERSION,
            command,
            matrix: None,
            matrices: None,
            subtorus: None,
            other: None,
            certificate: None,
            count: None,
            window_radius: None,
            budget_norm: None,
            budget_window: None,
            max_candidates: None,
            isolation_cap: None,
            norm_cap: None,
            resolution: None,
            cap: None,
            seed: None,
            canonicalize: false,
            output: None,
        }
    }

    pub fn with_matrix(mut self, rows: &[Vec<i64>]) -> Self {
        self.matrix = Some(serde_json::json!(rows));
        self
    }

    fn budget(&self) -> Result<Budget> {
        let d = Budget::default();
        let b = Budget {
            max_norm: self.budget_norm.unwrap_or(d.max_norm),
            max_window: self.budget_window.unwrap_or(d.max_window),
            max_candidates: self.max_candidates.unwrap_or(d.max_candidates),
            isolation_cap: self.isolation_cap.unwrap_or(d.isolation_cap),
            resolution: self.resolution.unwrap_or(d.resolution),
        };
        if b.max_norm == 0 || b.max_window == 0 || b.max_candidates == 0 {
            return Err(Error::InvalidParameter("budget limits must be positive".into()));
        }
        check_resolution(b.resolution)?;
        Ok(b)
    }
}

fn check_resolution(r: f64) -> Result<f64> {
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(Error::InvalidResolution)
    }
}

/// Parse a job, rejecting unknown format versions.
pub fn parse_job(text: &str) -> Result<JobSpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::MalformedJson(e.to_string()))?;
    job_from_value(v)
}

/// Interpret a JSON value as a job. A missing version means the current
/// one; any other version is rejected.
pub fn job_from_value(v: Value) -> Result<JobSpec> {
    if let Some(ver) = v.get("format_version") {
        if ver.as_u64() != Some(FORMAT_VERSION as u64) {
            return Err(Error::UnsupportedVersion(ver.to_string()));
        }
    }
    serde_json::from_value(v).map_err(|e| Error::MalformedJson(e.to_string()))
}

fn required<'a>(v: &'a Option<Value>, name: &str) -> Result<&'a Value> {
    v.as_ref()
        .ok_or_else(|| Error::InvalidParameter(format!("missing field `{name}`")))
}

fn int_rows(v: &Value, what: &str) -> Result<Vec<Vec<BigInt>>> {
    let rows: Vec<Vec<JInt>> = serde_json::from_value(v.clone())
        .map_err(|_| Error::InvalidParameter(format!("{what} must be an array of integer rows")))?;
    Ok(rows
        .into_iter()
        .map(|r| r.into_iter().map(|j| j.0).collect())
        .collect())
}

fn int_vec(v: &Value, what: &str) -> Result<Vec<BigInt>> {
    let row: Vec<JInt> = serde_json::from_value(v.clone())
        .map_err(|_| Error::InvalidParameter(format!("{what} must be an array of integers")))?;
    Ok(row.into_iter().map(|j| j.0).collect())
}

/// Exact parse with the determinant checked before anything else runs.
pub fn parse_matrix(v: &Value) -> Result<UnimodularMatrix> {
    UnimodularMatrix::new(IntMatrix::from_rows(&int_rows(v, "matrix")?)?)
}

/// A subtorus from its canonical encoding or a hyperplane from a covector.
/// Non-canonical bases are rejected unless `canonicalize` is set, in which
/// case the basis is treated as generators and a warning is recorded.
pub fn parse_subtorus(
    v: &Value,
    n: Option<usize>,
    canonicalize: bool,
    warnings: &mut Vec<String>,
) -> Result<Subtorus> {
    let h = if v.is_array() {
        let g = int_vec(v, "covector")?;
        let c = if canonicalize {
            PrimitiveCovector::canonical(g)?
        } else {
            PrimitiveCovector::new(g)?
        };
        covector_to_hyperplane(&c)
    } else {
        let dim = v
            .get("ambient_dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidParameter("subtorus needs `ambient_dim`".into()))?
            as usize;
        let basis = int_rows(
            v.get("basis")
                .ok_or_else(|| Error::InvalidParameter("subtorus needs `basis`".into()))?,
            "basis",
        )?;
        if let Some(r) = basis.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
        match Lattice::from_canonical_basis(dim, basis.clone()).and_then(Subtorus::from_lattice) {
            Ok(h) => h,
            Err(e) if canonicalize => {
                let h = Subtorus::from_generators(dim, &basis)?;
                warnings.push(format!("subtorus basis re-canonicalized ({e})"));
                h
            }
            Err(e) => return Err(e),
        }
    };
    if let Some(n) = n {
        if h.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: h.ambient_dim(),
            });
        }
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub dimension: usize,
    pub char_poly: IntPolynomial,
    pub order: MatrixOrder,
    pub distal_on_subp: bool,
    pub distal_linear: bool,
    pub ergodic: bool,
    pub unipotent: bool,
    pub invariant_subspaces: InvariantSubspaces,
    pub witness: Option<NonDistalWitness>,
}

pub fn classify(t: &UnimodularMatrix) -> Classification {
    let verdict = acts_distally_on_subp(t);
    Classification {
        dimension: t.n(),
        char_poly: char_poly(t.matrix()),
        order: verdict.order,
        distal_on_subp: verdict.distal,
        distal_linear: is_distal_linear(t),
        ergodic: is_ergodic(t),
        unipotent: is_unipotent(t.matrix()),
        invariant_subspaces: invariant_rational_subspaces(t),
        witness: verdict.witness,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub report: OrbitReport,
    /// Only decided for hyperplanes.
    pub converges_to_full: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    DisjointFamily,
    NonExpansivity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub certificate: CertificateKind,
    pub verified: bool,
    pub failure: Option<VerificationFailure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Classification(Classification),
    Orbit(OrbitResult),
    DisjointFamily(DisjointFamilyCertificate),
    NonExpansivity(NonExpansivityCertificate),
    Distance(MetricEstimate),
    Isolation(IsolationReport),
    GroupFiniteness(GroupFiniteness),
    Verification(VerificationReport),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Inconclusive,
    VerificationFailed,
}

/// Exit status for invalid input.
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_VERIFICATION_FAILED: i32 = 4;

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => EXIT_INCONCLUSIVE,
            Status::VerificationFailed => EXIT_VERIFICATION_FAILED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetUsage {
    pub limits: Budget,
    pub requested: usize,
    pub certified: usize,
    pub max_window_used: u64,
    #[serde(with = "crate::io::codec::big")]
    pub max_member_norm_sq: BigInt,
}

fn usage(limits: Budget, fam: &DisjointFamilyCertificate) -> BudgetUsage {
    let max_window_used = match &fam.evidence {
        FamilyEvidence::Growth { windows, .. } => {
            windows.iter().map(|w| w.window_radius).max().unwrap_or(0)
        }
        _ => 0,
    };
    let max_member_norm_sq = fam
        .members
        .iter()
        .map(|m| norm_sq(m.covector.coords()))
        .max()
        .unwrap_or_default();
    BudgetUsage {
        limits,
        requested: fam.requested,
        certified: fam.members.len(),
        max_window_used,
        max_member_norm_sq,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub format_version: u32,
    pub tool_version: String,
    pub command: Command,
    pub status: Status,
    pub input: Value,
    pub payload: Payload,
    pub warnings: Vec<String>,
    pub budget: Option<BudgetUsage>,
    /// Wall-clock time; the only nondeterministic field.
    pub timing_ms: f64,
}

impl ReportEnvelope {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// Pretty JSON with fields in declaration order and a trailing newline.
pub fn to_canonical_json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("report types always serialize");
    s.push('\n');
    s
}

/// Parse a report envelope, rejecting unknown versions.
pub fn parse_envelope(text: &str) -> Result<ReportEnvelope> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::MalformedJson(e.to_string()))?;
    check_version(&v)?;
    serde_json::from_value(v).map_err(|e| Error::MalformedJson(e.to_string()))
}

fn check_version(v: &Value) -> Result<()> {
    match v.get("format_version") {
        Some(Value::Number(n)) if n.as_u64() == Some(FORMAT_VERSION as u64) => Ok(()),
        Some(other) => Err(Error::UnsupportedVersion(other.to_string())),
        None => Err(Error::MalformedJson("missing `format_version`".into())),
    }
}

enum AnyCertificate {
    Family(DisjointFamilyCertificate),
    NonExpansivity(NonExpansivityCertificate),
}

/// Accepts a whole envelope, a payload, or a bare certificate.
fn parse_certificate(v: &Value) -> Result<AnyCertificate> {
    let bad = |e: serde_json::Error| Error::MalformedJson(e.to_string());
    if let Some(p) = v.get("payload") {
        check_version(v)?;
        return parse_certificate(p);
    }
    if let (Some(kind), Some(data)) = (v.get("kind").and_then(Value::as_str), v.get("data")) {
        return match kind {
            "disjoint_family" => Ok(AnyCertificate::Family(
                serde_json::from_value(data.clone()).map_err(bad)?,
            )),
            "non_expansivity" => Ok(AnyCertificate::NonExpansivity(
                serde_json::from_value(data.clone()).map_err(bad)?,
            )),
            other => Err(Error::InvalidParameter(format!(
                "payload of kind {other:?} is not a certificate"
            ))),
        };
    }
    if v.get("members").is_some() {
        Ok(AnyCertificate::Family(serde_json::from_value(v.clone()).map_err(bad)?))
    } else {
        Ok(AnyCertificate::NonExpansivity(
            serde_json::from_value(v.clone()).map_err(bad)?,
        ))
    }
}

fn positive(v: Option<u64>, default: u64, name: &str) -> Result<u64> {
    match v.unwrap_or(default) {
        0 => Err(Error::InvalidParameter(format!("{name} must be at least 1"))),
        x => Ok(x),
    }
}

/// Validate and execute a job.
pub fn run(job: &JobSpec) -> Result<ReportEnvelope> {
    if job.format_version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(job.format_version.to_string()));
    }
    let start = Instant::now();
    let mut warnings = Vec::new();
    let mut budget_usage = None;
    let mut status = Status::Ok;
    let payload = match job.command {
        Command::Classify => Payload::Classification(classify(&parse_matrix(required(&job.matrix, "matrix")?)?)),
        Command::Orbit => {
            let t = parse_matrix(required(&job.matrix, "matrix")?)?;
            let h = parse_subtorus(required(&job.subtorus, "subtorus")?, Some(t.n()), job.canonicalize, &mut warnings)?;
            let w = positive(job.window_radius, 8, "window_radius")?;
            let report = orbit(&t, &h, w)?;
            let conv = if h.is_hyperplane() {
                Some(converges_to_full(&t, &h)?)
            } else {
                warnings.push("convergence to the full torus is only decided for hyperplanes".into());
                None
            };
            Payload::Orbit(OrbitResult {
                report,
                converges_to_full: conv,
            })
        }
        Command::DisjointFamily => {
            let t = parse_matrix(required(&job.matrix, "matrix")?)?;
            let budget = job.budget()?;
            let count = positive(job.count.map(|c| c as u64), 10, "count")? as usize;
            let fam = disjoint_hyperplane_orbits(&t, count, &budget)?;
            if !fam.complete {
                status = Status::Inconclusive;
            }
            if !fam.rigorous {
                warnings.push("some pairs are only window-verified".into());
            }
            budget_usage = Some(usage(budget, &fam));
            Payload::DisjointFamily(fam)
        }
        Command::CertifyNonexpansive => {
            let t = parse_matrix(required(&job.matrix, "matrix")?)?;
            let budget = job.budget()?;
            let count = positive(job.count.map(|c| c as u64), 10, "count")? as usize;
            let cert = non_expansivity_certificate(&t, count, &budget)?;
            match &cert {
                NonExpansivityCertificate::InfinitelyManyOrbits { family, .. } => {
                    budget_usage = Some(usage(budget, family));
                    if !family.rigorous {
                        warnings.push("some pairs are only window-verified".into());
                    }
                }
                NonExpansivityCertificate::Inconclusive { partial, .. } => {
                    status = Status::Inconclusive;
                    budget_usage = partial.as_ref().map(|f| usage(budget, f));
                }
                NonExpansivityCertificate::FiniteOrder { .. } => {}
            }
            Payload::NonExpansivity(cert)
        }
        Command::Distance => {
            let a = parse_subtorus(required(&job.subtorus, "subtorus")?, None, job.canonicalize, &mut warnings)?;
            let b = parse_subtorus(required(&job.other, "other")?, Some(a.ambient_dim()), job.canonicalize, &mut warnings)?;
            let r = check_resolution(job.resolution.unwrap_or(DEFAULT_RESOLUTION))?;
            Payload::Distance(hausdorff_distance(&a, &b, r)?)
        }
        Command::Isolation => {
            let h = parse_subtorus(required(&job.subtorus, "subtorus")?, None, job.canonicalize, &mut warnings)?;
            let r = check_resolution(job.resolution.unwrap_or(DEFAULT_RESOLUTION))?;
            let cap = positive(job.norm_cap, 5, "norm_cap")?;
            Payload::Isolation(isolation_radius_lower_bound(&h, cap, r)?)
        }
        Command::GroupFinite => {
            let list = required(&job.matrices, "matrices")?
                .as_array()
                .ok_or_else(|| Error::InvalidParameter("`matrices` must be an array".into()))?;
            let gens = list.iter().map(parse_matrix).collect::<Result<Vec<_>>>()?;
            let cap = positive(job.cap.map(|c| c as u64), 1000, "cap")? as usize;
            let g = group_is_finite(&gens, cap)?;
            if matches!(g, GroupFiniteness::Inconclusive { .. }) {
                status = Status::Inconclusive;
            }
            Payload::GroupFiniteness(g)
        }
        Command::Verify => {
            let (kind, outcome) = match parse_certificate(required(&job.certificate, "certificate")?)? {
                AnyCertificate::Family(c) => (CertificateKind::DisjointFamily, verify_family(&c)),
                AnyCertificate::NonExpansivity(c) => {
                    (CertificateKind::NonExpansivity, verify_non_expansivity(&c))
                }
            };
            if outcome.is_err() {
                status = Status::VerificationFailed;
            }
            Payload::Verification(VerificationReport {
                certificate: kind,
                verified: outcome.is_ok(),
                failure: outcome.err(),
            })
        }
    };
    let input = serde_json::to_value(job).expect("jobs always serialize");
    Ok(ReportEnvelope {
        format_version: FORMAT_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        command: job.command,
        status,
        input,
        payload,
        warnings,
        budget: budget_usage,
        timing_ms: start.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Diagnostic written for invalid input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub error: String,
    pub message: String,
}

impl From<&Error> for Diagnostic {
    fn from(e: &Error) -> Self {
        Diagnostic {
            error: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// Parse, run and render a job: the rendered JSON (envelope or
/// diagnostic) and the process exit status.
pub fn run_text(text: &str) -> (String, i32) {
    match parse_job(text).and_then(|j| run(&j)) {
        Ok(env) => (to_canonical_json(&env), env.exit_code()),
        Err(e) => (to_canonical_json(&Diagnostic::from(&e)), EXIT_INVALID),
    }
}
