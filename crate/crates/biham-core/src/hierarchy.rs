//! The commuting hierarchy: free Hamiltonians tr(L^m)/m, the exact unreduced
//! flow (g, L) -> (exp(z L^m) g, L), a fixed-step RK4 integrator for the
//! reduced equations Qdot = (L^m)_0 Q, Ldot = [R(Q) L^m, L], and the canonical
//! spin Sutherland parametrization of the reduced phase space.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{commutator, mat_exp, C64, ComplexMatrix};
use crate::observables::PhasePoint;
use crate::reduction::ReducedPoint;
use crate::rmatrix::DynamicalR;

/// Sign of the inverse-sinh^2 potential term in the canonical Hamiltonian,
/// fixed once by direct numeric comparison of the closed form against
/// tr(L^2)/2 over random canonical points.
pub const SUTHERLAND_POTENTIAL_SIGN: f64 = -1.0;

/// H_m = tr(L^m)/m.
pub fn free_hamiltonian(m: usize, l: &ComplexMatrix) -> Result<C64> {
    if m < 1 {
        return Err(Error::invalid("hamiltonian index m must be >= 1"));
    }
    Ok(l.pow(m).trace() / m as f64)
}

/// The exact flow of the m-th Hamiltonian pair through (g0, L0):
/// (g(z), L(z)) = (exp(z L0^m) g0, L0). L is returned by clone, bitwise equal.
pub fn exact_flow(p: &PhasePoint, m: usize, z: C64) -> Result<PhasePoint> {
    if m < 1 {
        return Err(Error::invalid("flow index m must be >= 1"));
    }
    let gen = p.l.pow(m).scale(z);
    let g = mat_exp(&gen)?.matmul(&p.g);
    PhasePoint::new(g, p.l.clone())
}

/// One sample along a reduced trajectory.
#[derive(Clone, Debug)]
pub struct TrajectorySample {
    pub z: C64,
    pub point: ReducedPoint,
    /// tr(L^k) for k = 1..n
    pub invariants: Vec<C64>,
}

/// A reduced trajectory with per-sample spectral invariants.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    /// Max drift of any tr(L^k) relative to the initial sample.
    pub fn max_invariant_drift(&self) -> f64 {
        let first = &self.samples[0].invariants;
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            for (a, b) in s.invariants.iter().zip(first.iter()) {
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    /// Max Hermiticity defect of L along the trajectory.
    pub fn max_hermiticity_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.point.l.hermitian_defect()).fold(0.0, f64::max)
    }

    pub fn end_point(&self) -> &ReducedPoint {
        &self.samples.last().expect("trajectory has samples").point
    }
}

fn spectral_invariants(l: &ComplexMatrix) -> Vec<C64> {
    (1..=l.size()).map(|k| l.pow(k).trace()).collect()
}

struct ReducedState {
    q: Vec<C64>,
    l: ComplexMatrix,
}

/// Right-hand side of the reduced equations at (q, L) for flow index m.
fn reduced_rhs(state: &ReducedState, m: usize, tol_reg: f64) -> Result<(Vec<C64>, ComplexMatrix)> {
    let r = DynamicalR::with_tolerance(&state.q, tol_reg)?;
    let lm = state.l.pow(m);
    let qdot: Vec<C64> = (0..state.q.len()).map(|i| lm[(i, i)] * state.q[i]).collect();
    let ldot = commutator(&r.apply(&lm), &state.l)?;
    Ok((qdot, ldot))
}

/// Classical fixed-step RK4 along the straight ray from 0 to z_end. Aborts
/// with NotRegular as soon as a step leaves the regular set; nothing is
/// regularized across eigenvalue collisions.
pub fn integrate_reduced(
    rp0: &ReducedPoint,
    m: usize,
    z_end: C64,
    steps: usize,
    tol_reg: f64,
) -> Result<Trajectory> {
    if m < 1 {
        return Err(Error::invalid("flow index m must be >= 1"));
    }
    if steps < 1 {
        return Err(Error::invalid("steps must be >= 1"));
    }
    let n = rp0.size();
    let h = z_end / steps as f64;
    let mut state = ReducedState { q: rp0.q_entries().to_vec(), l: rp0.l.clone() };
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TrajectorySample {
        z: C64::default(),
        point: rp0.clone(),
        invariants: spectral_invariants(&rp0.l),
    });
    for step in 0..steps {
        let take = |s: &ReducedState, k: &(Vec<C64>, ComplexMatrix), w: C64| ReducedState {
            q: s.q.iter().zip(k.0.iter()).map(|(qi, ki)| qi + w * ki).collect(),
            l: &s.l + &k.1.scale(w),
        };
        let k1 = reduced_rhs(&state, m, tol_reg)?;
        let k2 = reduced_rhs(&take(&state, &k1, h * 0.5), m, tol_reg)?;
        let k3 = reduced_rhs(&take(&state, &k2, h * 0.5), m, tol_reg)?;
        let k4 = reduced_rhs(&take(&state, &k3, h), m, tol_reg)?;
        let sixth = h / 6.0;
        for i in 0..n {
            state.q[i] += sixth * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
        }
        let incr = &(&k1.1 + &k4.1) + &(&k2.1 + &k3.1).scale(Complex64::new(2.0, 0.0));
        state.l = &state.l + &incr.scale(sixth);
        let z = h * (step + 1) as f64;
        // regularity gate doubles as the per-sample validity check
        let point = ReducedPoint::new(state.q.clone(), state.l.clone(), tol_reg)?;
        samples.push(TrajectorySample {
            z,
            invariants: spectral_invariants(&point.l),
            point,
        });
    }
    Ok(Trajectory { samples })
}

/// Canonical spin Sutherland data: diagonal q and p, off-diagonal phi.
#[derive(Clone, Debug)]
pub struct CanonicalSutherlandPoint {
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    pub phi: ComplexMatrix,
}

impl CanonicalSutherlandPoint {
    pub fn new(q: Vec<C64>, p: Vec<C64>, phi: ComplexMatrix) -> Result<Self> {
        let n = q.len();
        if p.len() != n || phi.size() != n {
            return Err(Error::SizeMismatch(n, phi.size()));
        }
        for i in 0..n {
            if phi[(i, i)] != C64::default() {
                return Err(Error::invalid("phi must have exactly zero diagonal"));
            }
        }
        Ok(CanonicalSutherlandPoint { q, p, phi })
    }

    pub fn size(&self) -> usize {
        self.q.len()
    }
}

/// Q = exp(q), L = p + (R(Q) + id/2)(phi). Fails NotRegular when the e^{q_j}
/// collide within tolerance.
pub fn sutherland_embed(c: &CanonicalSutherlandPoint, tol_reg: f64) -> Result<ReducedPoint> {
    let q_exp: Vec<C64> = c.q.iter().map(|z| z.exp()).collect();
    let r = DynamicalR::with_tolerance(&q_exp, tol_reg)?;
    let spin = r.apply_plus_half(&c.phi);
    let l = &ComplexMatrix::diagonal(&c.p) + &spin;
    ReducedPoint::new(q_exp, l, tol_reg)
}

/// The canonical Hamiltonian tr(L(q,p,phi)^2)/2 through the embedding.
pub fn sutherland_hamiltonian(c: &CanonicalSutherlandPoint, tol_reg: f64) -> Result<C64> {
    let rp = sutherland_embed(c, tol_reg)?;
    Ok(rp.l.pow(2).trace() * 0.5)
}

/// Closed form: sum p_j^2 / 2 + (s/8) sum_{k != l} phi_kl phi_lk / sinh^2((q_k - q_l)/2)
/// with the frozen sign s = SUTHERLAND_POTENTIAL_SIGN.
pub fn sutherland_closed_form(c: &CanonicalSutherlandPoint) -> C64 {
    let n = c.size();
    let kinetic: C64 = c.p.iter().map(|p| p * p).sum::<C64>() * 0.5;
    let mut potential = C64::default();
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let s = ((c.q[k] - c.q[l]) / 2.0).sinh();
            potential += c.phi[(k, l)] * c.phi[(l, k)] / (s * s);
        }
    }
    kinetic + potential * (SUTHERLAND_POTENTIAL_SIGN / 8.0)
}

/// Max disagreement of the listed invariant observables after running the two
/// flows in either order from rp0.
pub fn flow_commutation(
    rp0: &ReducedPoint,
    m1: usize,
    m2: usize,
    z: C64,
    steps: usize,
    obs: &[crate::reduction::ReducedObservable],
    tol_reg: f64,
) -> Result<f64> {
    let a1 = integrate_reduced(rp0, m1, z, steps, tol_reg)?;
    let a12 = integrate_reduced(a1.end_point(), m2, z, steps, tol_reg)?;
    let b2 = integrate_reduced(rp0, m2, z, steps, tol_reg)?;
    let b21 = integrate_reduced(b2.end_point(), m1, z, steps, tol_reg)?;
    let mut worst: f64 = 0.0;
    for f in obs {
        let va = f.evaluate(a12.end_point())?;
        let vb = f.evaluate(b21.end_point())?;
        worst = worst.max((va - vb).norm());
    }
    Ok(worst)
}
