//! Scripted verification suites. Each suite sweeps one family of structural
//! identities at a given size and seed and reports one residual per identity
//! tag; the runner is deterministic, so identical parameters produce
//! byte-identical reports.

mod brackets_suite;
mod heisenberg_suite;
mod hierarchy_suite;
mod jacobi_suite;
mod realforms_suite;
mod reduction_suite;
mod report;

pub use report::{IdentityReport, SuiteReport};

use crate::error::{Error, Result};

/// Parameters shared by every suite.
#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub tol_reg: f64,
    pub fd_step: f64,
    /// sampling radius around the identity for the double-transfer checks
    pub radius: f64,
    /// when set, overrides every identity's pinned tolerance
    pub tol_override: Option<f64>,
    /// restrict the real-forms suite to one slice
    pub slice: Option<SliceFilter>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceFilter {
    Hyperbolic,
    Trigonometric,
}

impl SuiteParams {
    pub fn new(n: usize, seed: u64) -> Self {
        SuiteParams {
            n,
            seed,
            trials: 100,
            tol_reg: crate::linalg::DEFAULT_TOL_REG,
            fd_step: 1e-5,
            radius: 0.2,
            tol_override: None,
            slice: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("n must be at least 2"));
        }
        if self.trials < 1 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if !(self.tol_reg > 0.0 && self.tol_reg < 1.0) {
            return Err(Error::invalid("tol-reg must lie in (0, 1)"));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 1e-2) {
            return Err(Error::invalid("fd-step must lie in (0, 1e-2]"));
        }
        if let Some(t) = self.tol_override {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::invalid("tol must lie in (0, 1)"));
            }
        }
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(Error::invalid("radius must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// The suites a verify run can select.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteId {
    Jacobi,
    Brackets,
    Reduction,
    Hierarchy,
    Realforms,
    Heisenberg,
    All,
}

impl std::str::FromStr for SuiteId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "jacobi" => SuiteId::Jacobi,
            "brackets" => SuiteId::Brackets,
            "reduction" => SuiteId::Reduction,
            "hierarchy" => SuiteId::Hierarchy,
            "realforms" => SuiteId::Realforms,
            "heisenberg" => SuiteId::Heisenberg,
            "all" => SuiteId::All,
            other => return Err(Error::invalid(format!("unknown suite {other:?}"))),
        })
    }
}

/// A finished suite run; only the jacobi suite attaches a certificate file.
pub struct SuiteOutput {
    pub report: SuiteReport,
    pub certificate: Option<String>,
}

/// Run one suite (or all of them, in a fixed order).
pub fn run(id: SuiteId, params: &SuiteParams) -> Result<Vec<SuiteOutput>> {
    params.validate()?;
    let single = |report: SuiteReport| -> Vec<SuiteOutput> {
        vec![SuiteOutput { report, certificate: None }]
    };
    Ok(match id {
        SuiteId::Jacobi => vec![jacobi_suite::run(params)?],
        SuiteId::Brackets => single(brackets_suite::run(params)?),
        SuiteId::Reduction => single(reduction_suite::run(params)?),
        SuiteId::Hierarchy => single(hierarchy_suite::run(params)?),
        SuiteId::Realforms => single(realforms_suite::run(params)?),
        SuiteId::Heisenberg => single(heisenberg_suite::run(params)?),
        SuiteId::All => {
            let mut out = vec![jacobi_suite::run(params)?];
            out.push(SuiteOutput { report: brackets_suite::run(params)?, certificate: None });
            out.push(SuiteOutput { report: reduction_suite::run(params)?, certificate: None });
            out.push(SuiteOutput { report: hierarchy_suite::run(params)?, certificate: None });
            out.push(SuiteOutput { report: realforms_suite::run(params)?, certificate: None });
            out.push(SuiteOutput { report: heisenberg_suite::run(params)?, certificate: None });
            out
        }
    })
}
