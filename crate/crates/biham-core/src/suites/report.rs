use serde::Serialize;

use super::SuiteParams;

/// One checked identity: the tag names the structural statement being
/// verified, and the report carries the worst observed residual against the
/// pinned tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub tag: String,
    pub description: String,
    pub residual: f64,
    pub tolerance: f64,
    pub trials: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub identities: Vec<IdentityReport>,
    pub passed: bool,
}

/// Accumulates identity entries and finalizes a deterministic report
/// (entries sorted by tag).
pub(crate) struct SuiteBuilder {
    suite: String,
    n: usize,
    seed: u64,
    trials: usize,
    tol_override: Option<f64>,
    entries: Vec<IdentityReport>,
}

impl SuiteBuilder {
    pub(crate) fn new(suite: &str, params: &SuiteParams) -> Self {
        SuiteBuilder {
            suite: suite.to_string(),
            n: params.n,
            seed: params.seed,
            trials: params.trials,
            tol_override: params.tol_override,
            entries: Vec::new(),
        }
    }

    pub(crate) fn push(
        &mut self,
        tag: &str,
        description: &str,
        residual: f64,
        pinned_tol: f64,
        trials: usize,
    ) {
        let tolerance = self.tol_override.unwrap_or(pinned_tol);
        self.entries.push(IdentityReport {
            tag: tag.to_string(),
            description: description.to_string(),
            residual,
            tolerance,
            trials,
            passed: residual <= tolerance,
        });
    }

    pub(crate) fn finish(mut self) -> SuiteReport {
        self.entries.sort_by(|a, b| a.tag.cmp(&b.tag));
        let passed = self.entries.iter().all(|e| e.passed);
        SuiteReport {
            suite: self.suite,
            n: self.n,
            seed: self.seed,
            trials: self.trials,
            identities: self.entries,
            passed,
        }
    }
}
