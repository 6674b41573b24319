//! JSON encodings for matrices, phase-space points, trajectories and run
//! configuration. Matrices are row-major with complex entries as [re, im]
//! pairs; serialization round-trips bit-exactly through serde_json's
//! shortest-representation floats.
//!
//! Every parser here is total on arbitrary input: malformed bytes produce an
//! error, never a panic. These functions are the fuzzing surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix};
use crate::observables::PhasePoint;
use crate::reduction::ReducedPoint;

/// Hard cap on the accepted matrix size; the library targets small n and a
/// decoder should not allocate unboundedly on hostile input.
pub const MAX_N: usize = 64;

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

fn matrix_from_json(m: MatrixJson) -> Result<ComplexMatrix> {
    if m.n < 2 {
        return Err(Error::invalid("matrix size must be at least 2"));
    }
    if m.n > MAX_N {
        return Err(Error::invalid(format!("matrix size {} exceeds the cap {}", m.n, MAX_N)));
    }
    if m.entries.len() != m.n {
        return Err(Error::invalid(format!(
            "expected {} rows, found {}",
            m.n,
            m.entries.len()
        )));
    }
    for (i, row) in m.entries.iter().enumerate() {
        if row.len() != m.n {
            return Err(Error::invalid(format!(
                "row {} has {} entries, expected {}",
                i,
                row.len(),
                m.n
            )));
        }
        for z in row {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::NonFinite);
            }
        }
    }
    Ok(ComplexMatrix::from_fn(m.n, |i, j| C64::new(m.entries[i][j][0], m.entries[i][j][1])))
}

fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    let n = m.size();
    MatrixJson {
        n,
        entries: (0..n)
            .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect(),
    }
}

/// Parse the matrix encoding {"n": ..., "entries": [[[re,im],...],...]}.
pub fn parse_matrix(input: &str) -> Result<ComplexMatrix> {
    let m: MatrixJson = serde_json::from_str(input)?;
    matrix_from_json(m)
}

pub fn matrix_to_string(m: &ComplexMatrix) -> String {
    serde_json::to_string(&matrix_to_json(m)).expect("matrix serializes")
}

/// Row-major entries as nested [re, im] pairs, the matrix body used inside
/// trajectory records.
pub fn matrix_entries(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    matrix_to_json(m).entries
}

#[derive(Serialize, Deserialize)]
struct PhasePointJson {
    g: MatrixJson,
    #[serde(rename = "L")]
    l: MatrixJson,
}

/// Parse a phase point file {"g": matrix, "L": matrix}.
pub fn parse_phase_point(input: &str) -> Result<PhasePoint> {
    let p: PhasePointJson = serde_json::from_str(input)?;
    let g = matrix_from_json(p.g)?;
    let l = matrix_from_json(p.l)?;
    PhasePoint::new(g, l)
}

pub fn phase_point_to_string(p: &PhasePoint) -> String {
    serde_json::to_string(&PhasePointJson { g: matrix_to_json(&p.g), l: matrix_to_json(&p.l) })
        .expect("phase point serializes")
}

#[derive(Serialize, Deserialize)]
struct ReducedPointJson {
    #[serde(rename = "Q")]
    q: MatrixJson,
    #[serde(rename = "L")]
    l: MatrixJson,
}

/// Parse a reduced point file {"Q": matrix, "L": matrix}; Q must be exactly
/// diagonal, regular and invertible.
pub fn parse_reduced_point(input: &str, tol_reg: f64) -> Result<ReducedPoint> {
    let p: ReducedPointJson = serde_json::from_str(input)?;
    let q = matrix_from_json(p.q)?;
    let l = matrix_from_json(p.l)?;
    ReducedPoint::from_matrices(&q, &l, tol_reg)
}

pub fn reduced_point_to_string(rp: &ReducedPoint) -> String {
    serde_json::to_string(&ReducedPointJson {
        q: matrix_to_json(&rp.q_matrix()),
        l: matrix_to_json(&rp.l),
    })
    .expect("reduced point serializes")
}

/// The projection output of the reduce command.
#[derive(Serialize)]
pub struct ProjectionJson {
    #[serde(rename = "Q")]
    q: MatrixJson,
    #[serde(rename = "L")]
    l: MatrixJson,
    eta: MatrixJson,
}

pub fn projection_to_string(rp: &ReducedPoint, eta: &ComplexMatrix) -> String {
    serde_json::to_string(&ProjectionJson {
        q: matrix_to_json(&rp.q_matrix()),
        l: matrix_to_json(&rp.l),
        eta: matrix_to_json(eta),
    })
    .expect("projection serializes")
}

/// One line of a trajectory file.
#[derive(Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub z: [f64; 2],
    #[serde(rename = "Q")]
    pub q: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<[f64; 2]>>,
    pub invariants: Vec<[f64; 2]>,
}

pub fn trajectory_record(sample: &crate::hierarchy::TrajectorySample) -> TrajectoryRecord {
    TrajectoryRecord {
        z: [sample.z.re, sample.z.im],
        q: matrix_entries(&sample.point.q_matrix()),
        l: matrix_entries(&sample.point.l),
        invariants: sample.invariants.iter().map(|z| [z.re, z.im]).collect(),
    }
}

/// Closing line of a trajectory file.
#[derive(Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub summary: TrajectorySummaryBody,
}

#[derive(Serialize, Deserialize)]
pub struct TrajectorySummaryBody {
    pub samples: usize,
    pub max_invariant_drift: f64,
    pub hermiticity_drift: f64,
}

/// Parse "re,im" into a complex number.
pub fn parse_complex_pair(input: &str) -> Result<C64> {
    let mut parts = input.splitn(2, ',');
    let re = parts
        .next()
        .ok_or_else(|| Error::invalid("expected re,im"))?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::invalid(format!("bad real part: {e}")))?;
    let im = parts
        .next()
        .ok_or_else(|| Error::invalid("expected re,im"))?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::invalid(format!("bad imaginary part: {e}")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(C64::new(re, im))
}

/// Config file schema: the same keys as the command-line flags, all optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    #[serde(rename = "tol-reg", alias = "tol_reg")]
    pub tol_reg: Option<f64>,
    #[serde(rename = "fd-step", alias = "fd_step")]
    pub fd_step: Option<f64>,
    pub suite: Option<String>,
    pub m: Option<usize>,
    #[serde(rename = "z-end", alias = "z_end")]
    pub z_end: Option<String>,
    pub steps: Option<usize>,
    pub initial: Option<String>,
    pub out: Option<String>,
    pub format: Option<String>,
}

pub fn parse_config(input: &str) -> Result<RunConfigFile> {
    Ok(serde_json::from_str(input)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_matrix, rng_for};
    use proptest::prelude::*;

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let mut rng = rng_for(1, 0);
        for n in 2..=5 {
            let m = random_matrix(&mut rng, n, 3.0);
            let s = matrix_to_string(&m);
            let back = parse_matrix(&s).unwrap();
            assert_eq!(m.entries(), back.entries());
        }
    }

    #[test]
    fn matrix_rejects_malformed() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("{}").is_err());
        assert!(parse_matrix(r#"{"n":1,"entries":[[[0,0]]]}"#).is_err());
        assert!(parse_matrix(r#"{"n":2,"entries":[[[0,0],[0,0]]]}"#).is_err());
        assert!(parse_matrix(r#"{"n":2,"entries":[[[0,0],[0,0]],[[0,0]]]}"#).is_err());
        assert!(parse_matrix(r#"{"n":2,"entries":[[[1e999,0],[0,0]],[[0,0],[0,0]]]}"#).is_err());
        assert!(parse_matrix(r#"{"n":1000,"entries":[]}"#).is_err());
    }

    #[test]
    fn phase_point_round_trip() {
        let mut rng = rng_for(2, 0);
        let g = crate::rng::random_regular_group_element(&mut rng, 3);
        let l = random_matrix(&mut rng, 3, 1.0);
        let p = PhasePoint::new(g, l).unwrap();
        let s = phase_point_to_string(&p);
        let back = parse_phase_point(&s).unwrap();
        assert_eq!(p.g.entries(), back.g.entries());
        assert_eq!(p.l.entries(), back.l.entries());
        // singular g rejected
        let bad = r#"{"g":{"n":2,"entries":[[[0,0],[0,0]],[[0,0],[0,0]]]},"L":{"n":2,"entries":[[[0,0],[0,0]],[[0,0],[0,0]]]}}"#;
        assert!(parse_phase_point(bad).is_err());
    }

    #[test]
    fn reduced_point_requires_diagonal_regular_q() {
        let ok = r#"{"Q":{"n":2,"entries":[[[1,0],[0,0]],[[0,0],[2,0]]]},"L":{"n":2,"entries":[[[0,0],[1,0]],[[1,0],[0,0]]]}}"#;
        let rp = parse_reduced_point(ok, 1e-8).unwrap();
        assert_eq!(rp.q_entries().len(), 2);
        let s = reduced_point_to_string(&rp);
        let back = parse_reduced_point(&s, 1e-8).unwrap();
        assert_eq!(back.l.entries(), rp.l.entries());
        // off-diagonal Q rejected
        let bad = r#"{"Q":{"n":2,"entries":[[[1,0],[1,0]],[[0,0],[2,0]]]},"L":{"n":2,"entries":[[[0,0],[0,0]],[[0,0],[0,0]]]}}"#;
        assert!(parse_reduced_point(bad, 1e-8).is_err());
        // repeated eigenvalues rejected
        let bad = r#"{"Q":{"n":2,"entries":[[[1,0],[0,0]],[[0,0],[1,0]]]},"L":{"n":2,"entries":[[[0,0],[0,0]],[[0,0],[0,0]]]}}"#;
        assert!(parse_reduced_point(bad, 1e-8).is_err());
    }

    #[test]
    fn complex_pair_parsing() {
        assert_eq!(parse_complex_pair("0.5,-1.25").unwrap(), C64::new(0.5, -1.25));
        assert_eq!(parse_complex_pair(" 1 , 2 ").unwrap(), C64::new(1.0, 2.0));
        assert!(parse_complex_pair("1").is_err());
        assert!(parse_complex_pair("a,b").is_err());
        assert!(parse_complex_pair("inf,0").is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg = parse_config(r#"{"n": 3, "seed": 7, "tol-reg": 1e-9}"#).unwrap();
        assert_eq!(cfg.n, Some(3));
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.tol_reg, Some(1e-9));
        let cfg = parse_config(r#"{"tol_reg": 1e-9, "z_end": "0.1,0.2"}"#).unwrap();
        assert_eq!(cfg.tol_reg, Some(1e-9));
        assert_eq!(cfg.z_end.as_deref(), Some("0.1,0.2"));
        assert!(parse_config(r#"{"bogus": 1}"#).is_err());
        assert!(parse_config("[1,2]").is_err());
    }

    proptest! {
        #[test]
        fn matrix_parse_never_panics(input in ".{0,256}") {
            let _ = parse_matrix(&input);
        }

        #[test]
        fn entries_round_trip(re in proptest::num::f64::NORMAL, im in proptest::num::f64::NORMAL) {
            let m = ComplexMatrix::from_fn(2, |i, j| {
                if i == 0 && j == 0 { C64::new(re, im) } else { C64::default() }
            });
            let back = parse_matrix(&matrix_to_string(&m)).unwrap();
            prop_assert_eq!(m.entries(), back.entries());
        }
    }
}
