//! JSON formats and the job runner behind the command-line front end.

pub mod codec;
mod job;

pub use job::{
    classify, job_from_value, parse_envelope, parse_job, parse_matrix, parse_subtorus, run, run_text,
    to_canonical_json, BudgetUsage, CertificateKind, Classification, Command, Diagnostic,
    JobSpec, OrbitResult, Payload, ReportEnvelope, Status, VerificationReport,
    DEFAULT_RESOLUTION, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_VERIFICATION_FAILED,
    FORMAT_VERSION, TOOL_VERSION,
};
