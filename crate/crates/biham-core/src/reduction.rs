//! Poisson reduction to the regular diagonal slice.
//!
//! A regular point (g, L) projects to (Q, L') = (eta g eta^-1, eta L eta^-1)
//! with Q diagonal in the fixed eigenvalue order. Invariant observables restrict
//! to reduced observables whose first derivative is diagonal-valued; the two
//! reduced brackets use the dynamical r-matrix at Q.

use crate::error::{Error, Result};
use crate::linalg::{
    commutator, diagonalize_regular, trace_pairing, C64, ComplexMatrix, DET_TOL,
};
use crate::observables::{DerivativeBundle, Observable, PhasePoint};
use crate::rmatrix::DynamicalR;

/// A point (Q, L) with Q regular diagonal (distinct, nonzero entries).
#[derive(Clone, Debug)]
pub struct ReducedPoint {
    q: Vec<C64>,
    pub l: ComplexMatrix,
}

impl ReducedPoint {
    pub fn new(q: Vec<C64>, l: ComplexMatrix, tol_reg: f64) -> Result<Self> {
        if q.len() != l.size() {
            return Err(Error::SizeMismatch(q.len(), l.size()));
        }
        if !l.is_finite() || q.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        for (i, qi) in q.iter().enumerate() {
            if qi.norm() <= DET_TOL {
                return Err(Error::NotInvertible);
            }
            for qj in q.iter().skip(i + 1) {
                let gap = (qi - qj).norm();
                if gap < tol_reg {
                    return Err(Error::NotRegular { gap, tol: tol_reg });
                }
            }
        }
        Ok(ReducedPoint { q, l })
    }

    pub fn from_matrices(q: &ComplexMatrix, l: &ComplexMatrix, tol_reg: f64) -> Result<Self> {
        if !q.is_diagonal(0.0) {
            return Err(Error::invalid("Q must be exactly diagonal"));
        }
        Self::new(q.diag_entries(), l.clone(), tol_reg)
    }

    pub fn size(&self) -> usize {
        self.q.len()
    }

    pub fn q_entries(&self) -> &[C64] {
        &self.q
    }

    pub fn q_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::diagonal(&self.q)
    }

    pub fn dynamical_r(&self, tol_reg: f64) -> Result<DynamicalR> {
        DynamicalR::with_tolerance(&self.q, tol_reg)
    }

    /// View as an unreduced phase point for evaluating observables.
    pub fn as_phase_point(&self) -> Result<PhasePoint> {
        PhasePoint::new(self.q_matrix(), self.l.clone())
    }
}

/// Project a regular phase point onto the diagonal slice. Returns the reduced
/// point and the conjugator eta with (eta g eta^-1, eta L eta^-1) = (Q, L').
pub fn project(p: &PhasePoint, tol_reg: f64) -> Result<(ReducedPoint, ComplexMatrix)> {
    let (eta, q) = diagonalize_regular(&p.g, tol_reg)?;
    let l = p.l.conjugate_by(&eta)?;
    Ok((ReducedPoint::new(q.diag_entries(), l, tol_reg)?, eta))
}

/// Derivatives of a reduced observable at (Q, L): the diagonal-valued first
/// gradient and the full d2, with nabla2 = L d2, nabla2' = d2 L.
#[derive(Clone, Debug)]
pub struct ReducedDerivatives {
    pub nabla1: ComplexMatrix,
    pub d2: ComplexMatrix,
    pub nabla2: ComplexMatrix,
    pub nabla2p: ComplexMatrix,
}

/// The restriction of an invariant observable to the diagonal slice.
#[derive(Clone, Debug)]
pub struct ReducedObservable {
    inner: Observable,
}

impl ReducedObservable {
    /// Restrict an invariant observable; rejects the non-invariant families.
    pub fn restrict(obs: Observable) -> Result<Self> {
        if !obs.is_invariant() {
            return Err(Error::invalid(format!(
                "observable {} is not conjugation-invariant",
                obs.label()
            )));
        }
        Ok(ReducedObservable { inner: obs })
    }

    pub fn inner(&self) -> &Observable {
        &self.inner
    }

    pub fn label(&self) -> String {
        self.inner.label()
    }

    pub fn evaluate(&self, rp: &ReducedPoint) -> Result<C64> {
        self.inner.evaluate(&rp.as_phase_point()?)
    }

    /// Analytic reduced derivatives: nabla1 is the diagonal part of the
    /// unreduced gradient at (Q, L); d2 carries over unchanged.
    pub fn derivatives(&self, rp: &ReducedPoint) -> Result<ReducedDerivatives> {
        let bundle = self.inner.analytic_derivatives(&rp.as_phase_point()?)?;
        Ok(reduce_bundle(&bundle))
    }
}

fn reduce_bundle(b: &DerivativeBundle) -> ReducedDerivatives {
    ReducedDerivatives {
        nabla1: b.nabla1.diagonal_part(),
        d2: b.d2.clone(),
        nabla2: b.nabla2.clone(),
        nabla2p: b.nabla2p.clone(),
    }
}

/// First reduced bracket:
/// {f,h}_1 = <nabla1 f, d2 h> - <nabla1 h, d2 f> + <L, [d2 f, d2 h]_{R(Q)}>.
pub fn reduced_pb1(
    f: &ReducedObservable,
    h: &ReducedObservable,
    rp: &ReducedPoint,
    tol_reg: f64,
) -> Result<C64> {
    let bf = f.derivatives(rp)?;
    let bh = h.derivatives(rp)?;
    let r = rp.dynamical_r(tol_reg)?;
    reduced_pb1_from_derivatives(&bf, &bh, &rp.l, &r)
}

pub fn reduced_pb1_from_derivatives(
    bf: &ReducedDerivatives,
    bh: &ReducedDerivatives,
    l: &ComplexMatrix,
    r: &DynamicalR,
) -> Result<C64> {
    Ok(trace_pairing(&bf.nabla1, &bh.d2)? - trace_pairing(&bh.nabla1, &bf.d2)?
        + trace_pairing(l, &r.deformed_bracket(&bf.d2, &bh.d2)?)?)
}

/// Second reduced bracket:
/// {f,h}_2 = <nabla1 f, nabla2 h + nabla2' h>/2 - <nabla1 h, nabla2 f + nabla2' f>/2
///         + <nabla2 f, R(Q) nabla2 h> - <nabla2' f, R(Q) nabla2' h>.
pub fn reduced_pb2(
    f: &ReducedObservable,
    h: &ReducedObservable,
    rp: &ReducedPoint,
    tol_reg: f64,
) -> Result<C64> {
    let bf = f.derivatives(rp)?;
    let bh = h.derivatives(rp)?;
    let r = rp.dynamical_r(tol_reg)?;
    reduced_pb2_from_derivatives(&bf, &bh, &r)
}

pub fn reduced_pb2_from_derivatives(
    bf: &ReducedDerivatives,
    bh: &ReducedDerivatives,
    r: &DynamicalR,
) -> Result<C64> {
    let first = trace_pairing(&bf.nabla1, &(&bh.nabla2 + &bh.nabla2p))?
        - trace_pairing(&bh.nabla1, &(&bf.nabla2 + &bf.nabla2p))?;
    let second = trace_pairing(&bf.nabla2, &r.apply(&bh.nabla2))?
        - trace_pairing(&bf.nabla2p, &r.apply(&bh.nabla2p))?;
    Ok(first * 0.5 + second)
}

/// Residuals of the two derivative relations tying the unreduced gradient to
/// the reduced one at a slice point:
///   (a) the diagonal part of [L, d2 f] vanishes;
///   (b) nabla1 F = nabla1 f - (R(Q) + id/2)[L, d2 f].
pub fn lemma_residuals(
    obs: &Observable,
    rp: &ReducedPoint,
    tol_reg: f64,
) -> Result<(f64, f64)> {
    if !obs.is_invariant() {
        return Err(Error::invalid("derivative relations hold for invariant observables"));
    }
    let bundle = obs.analytic_derivatives(&rp.as_phase_point()?)?;
    let reduced = reduce_bundle(&bundle);
    let com = commutator(&rp.l, &reduced.d2)?;
    let res_constraint = com.diagonal_part().norm();
    let r = rp.dynamical_r(tol_reg)?;
    let corrected = &reduced.nabla1 - &r.apply_plus_half(&com);
    let res_gradient = (&bundle.nabla1 - &corrected).norm();
    Ok((res_constraint, res_gradient))
}

/// Reduced Hamiltonian vector field of tr(L^m)/m in the second bracket
/// (equivalently of tr(L^{m+1})/(m+1) in the first):
///   Qdot = (L^m)_0 Q,   Ldot = [R(Q) L^m, L].
pub fn reduced_vf(
    m: usize,
    rp: &ReducedPoint,
    tol_reg: f64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if m < 1 {
        return Err(Error::invalid("flow index m must be >= 1"));
    }
    let lm = rp.l.pow(m);
    let r = rp.dynamical_r(tol_reg)?;
    let qdot = lm.diagonal_part().matmul(&rp.q_matrix());
    let ldot = commutator(&r.apply(&lm), &rp.l)?;
    Ok((qdot, ldot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{pb1, pb2};
    use crate::observables::invariant_words;
    use crate::rng::{random_matrix, random_regular_diagonal, rng_for};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_reduced(seed: u64, n: usize) -> ReducedPoint {
        let mut rng = rng_for(seed, 0);
        let q = random_regular_diagonal(&mut rng, n, 0.25);
        let l = random_matrix(&mut rng, n, 1.0);
        ReducedPoint::new(q, l, 1e-8).unwrap()
    }

    #[test]
    fn project_examples() {
        // already diagonal and sorted: fixed point with eta = I
        let g = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let l = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[2.0, 0.0]]);
        let p = PhasePoint::new(g, l.clone()).unwrap();
        let (rp, eta) = project(&p, 1e-8).unwrap();
        assert!((&eta - &ComplexMatrix::identity(2)).norm() < 1e-12);
        assert!((&rp.l - &l).norm() < 1e-12);

        // swapped diagonal: Q sorted, L conjugated by the transposition
        let g = ComplexMatrix::diagonal(&[c(2.0, 0.0), c(1.0, 0.0)]);
        let p = PhasePoint::new(g, l.clone()).unwrap();
        let (rp, eta) = project(&p, 1e-8).unwrap();
        assert_eq!(rp.q_entries(), &[c(1.0, 0.0), c(2.0, 0.0)]);
        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((&eta - &swap).norm() < 1e-12);
        assert!((&rp.l - &l.conjugate_by(&swap).unwrap()).norm() < 1e-12);

        // identity is not regular
        let p = PhasePoint::new(ComplexMatrix::identity(2), l).unwrap();
        assert!(matches!(project(&p, 1e-8), Err(Error::NotRegular { .. })));
    }

    #[test]
    fn projection_preserves_invariants() {
        for trial in 0..10 {
            let mut rng = rng_for(500 + trial, 0);
            let n = 2 + (trial % 3) as usize;
            let g = crate::rng::random_regular_group_element(&mut rng, n);
            let l = random_matrix(&mut rng, n, 1.0);
            let p = PhasePoint::new(g, l).unwrap();
            let (rp, _) = project(&p, 1e-8).unwrap();
            let proj = rp.as_phase_point().unwrap();
            for obs in invariant_words() {
                let a = obs.evaluate(&p).unwrap();
                let b = obs.evaluate(&proj).unwrap();
                assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()), "{}", obs.label());
            }
        }
    }

    #[test]
    fn restrict_rejects_coordinates() {
        assert!(ReducedObservable::restrict(Observable::GEntry(0, 0)).is_err());
        assert!(ReducedObservable::restrict(Observable::word("glGl").unwrap()).is_ok());
    }

    #[test]
    fn restriction_examples() {
        let rp = sample_reduced(3, 3);
        // tr(L^k): nabla1 = 0, d2 = k L^{k-1} / k for the normalized Hamiltonian
        let f = ReducedObservable::restrict(Observable::free_hamiltonian(3)).unwrap();
        let d = f.derivatives(&rp).unwrap();
        assert!(d.nabla1.norm() < 1e-15);
        assert!((&d.d2 - &rp.l.pow(2)).norm() < 1e-13);

        // tr(g): nabla1 = Q (already diagonal at the slice)
        let f = ReducedObservable::restrict(Observable::word("g").unwrap()).unwrap();
        let d = f.derivatives(&rp).unwrap();
        assert!((&d.nabla1 - &rp.q_matrix()).norm() < 1e-13);

        // tr(gLg^-1L) restricts to tr(QLQ^-1L) by substitution
        let f = ReducedObservable::restrict(Observable::word("glGl").unwrap()).unwrap();
        let v = f.evaluate(&rp).unwrap();
        let q = rp.q_matrix();
        let direct = q
            .matmul(&rp.l)
            .matmul(&q.inverse().unwrap())
            .matmul(&rp.l)
            .trace();
        assert!((v - direct).norm() < 1e-13);
    }

    #[test]
    fn reduced_pb1_examples() {
        let rp = sample_reduced(5, 2);
        let f = ReducedObservable::restrict(Observable::word("l").unwrap()).unwrap();
        let h = ReducedObservable::restrict(
            Observable::scaled_word(c(0.5, 0.0), "ll").unwrap(),
        )
        .unwrap();
        assert!(reduced_pb1(&f, &h, &rp, 1e-8).unwrap().norm() < 1e-14);
        assert!(reduced_pb1(&f, &f, &rp, 1e-8).unwrap().norm() < 1e-15);
    }

    #[test]
    fn reduced_pb2_free_hamiltonian_example() {
        let rp = sample_reduced(6, 2);
        let f = ReducedObservable::restrict(Observable::word("g").unwrap()).unwrap();
        let h = ReducedObservable::restrict(Observable::word("l").unwrap()).unwrap();
        let v = reduced_pb2(&f, &h, &rp, 1e-8).unwrap();
        let expected = trace_pairing(&rp.q_matrix(), &rp.l).unwrap();
        assert!((v - expected).norm() < 1e-12, "{v} vs {expected}");
        // spectral pair commutes
        let f = ReducedObservable::restrict(Observable::word("l").unwrap()).unwrap();
        let h = ReducedObservable::restrict(Observable::word("ll").unwrap()).unwrap();
        assert!(reduced_pb2(&f, &h, &rp, 1e-8).unwrap().norm() < 1e-13);
    }

    #[test]
    fn definition_equality_with_unreduced_brackets() {
        // at slice points the reduced brackets agree with the unreduced ones
        for trial in 0..15 {
            let n = 2 + (trial % 3) as usize;
            let rp = sample_reduced(700 + trial, n);
            let p = rp.as_phase_point().unwrap();
            for f in invariant_words() {
                for h in invariant_words() {
                    let rf = ReducedObservable::restrict(f.clone()).unwrap();
                    let rh = ReducedObservable::restrict(h.clone()).unwrap();
                    let u1 = pb1(&f, &h, &p).unwrap();
                    let r1 = reduced_pb1(&rf, &rh, &rp, 1e-8).unwrap();
                    assert!(
                        (u1 - r1).norm() / (1.0 + u1.norm()) < 1e-10,
                        "pb1 {} {} trial {trial}: {u1} vs {r1}",
                        f.label(),
                        h.label()
                    );
                    let u2 = pb2(&f, &h, &p).unwrap();
                    let r2 = reduced_pb2(&rf, &rh, &rp, 1e-8).unwrap();
                    assert!(
                        (u2 - r2).norm() / (1.0 + u2.norm()) < 1e-10,
                        "pb2 {} {} trial {trial}: {u2} vs {r2}",
                        f.label(),
                        h.label()
                    );
                }
            }
        }
    }

    #[test]
    fn gauge_independence_under_diagonal_conjugation() {
        for trial in 0..10 {
            let n = 2 + (trial % 3) as usize;
            let rp = sample_reduced(900 + trial, n);
            let mut rng = rng_for(901, trial);
            let d = random_regular_diagonal(&mut rng, n, 0.2);
            let dm = ComplexMatrix::diagonal(&d);
            let l2 = rp.l.conjugate_by(&dm).unwrap();
            let rp2 = ReducedPoint::new(rp.q_entries().to_vec(), l2, 1e-8).unwrap();
            for f in invariant_words() {
                for h in invariant_words() {
                    let rf = ReducedObservable::restrict(f.clone()).unwrap();
                    let rh = ReducedObservable::restrict(h.clone()).unwrap();
                    for (a, b) in [
                        (
                            reduced_pb1(&rf, &rh, &rp, 1e-8).unwrap(),
                            reduced_pb1(&rf, &rh, &rp2, 1e-8).unwrap(),
                        ),
                        (
                            reduced_pb2(&rf, &rh, &rp, 1e-8).unwrap(),
                            reduced_pb2(&rf, &rh, &rp2, 1e-8).unwrap(),
                        ),
                    ] {
                        assert!(
                            (a - b).norm() / (1.0 + a.norm()) < 1e-10,
                            "{} {} trial {trial}",
                            f.label(),
                            h.label()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn derivative_relation_residuals() {
        let rp = sample_reduced(8, 3);
        // L-only words satisfy both exactly
        let (a, b) = lemma_residuals(&Observable::free_hamiltonian(3), &rp, 1e-8).unwrap();
        assert!(a < 1e-14 && b < 1e-13, "{a} {b}");
        for w in ["gl", "glGl", "gll"] {
            let (a, b) = lemma_residuals(&Observable::word(w).unwrap(), &rp, 1e-8).unwrap();
            assert!(a < 1e-12, "constraint residual for {w}: {a}");
            assert!(b < 1e-10, "gradient residual for {w}: {b}");
        }
    }

    #[test]
    fn recursion_on_reduced_brackets() {
        // {f, h_{m+1}}_1 = {f, h_m}_2 = <nabla1 f, (L^m)_0> + <d2 f, [R(Q)L^m, L]>
        for trial in 0..8 {
            let n = 2 + (trial % 3) as usize;
            let rp = sample_reduced(1100 + trial, n);
            let r = rp.dynamical_r(1e-8).unwrap();
            for m in 1..=3usize {
                let lm = rp.l.pow(m);
                let hm = ReducedObservable::restrict(Observable::free_hamiltonian(m)).unwrap();
                let hm1 =
                    ReducedObservable::restrict(Observable::free_hamiltonian(m + 1)).unwrap();
                for f in invariant_words() {
                    let rf = ReducedObservable::restrict(f.clone()).unwrap();
                    let df = rf.derivatives(&rp).unwrap();
                    let rhs = trace_pairing(&df.nabla1, &lm.diagonal_part()).unwrap()
                        + trace_pairing(
                            &df.d2,
                            &commutator(&r.apply(&lm), &rp.l).unwrap(),
                        )
                        .unwrap();
                    let v1 = reduced_pb1(&rf, &hm1, &rp, 1e-8).unwrap();
                    let v2 = reduced_pb2(&rf, &hm, &rp, 1e-8).unwrap();
                    assert!((v1 - rhs).norm() / (1.0 + rhs.norm()) < 1e-10);
                    assert!((v2 - rhs).norm() / (1.0 + rhs.norm()) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn reduced_vf_examples() {
        let q = vec![c(2.0, 0.0), c(1.0, 0.0)];
        let l = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let rp = ReducedPoint::new(q, l, 1e-8).unwrap();
        let (qdot, ldot) = reduced_vf(1, &rp, 1e-8).unwrap();
        assert!(qdot.norm() < 1e-15, "zero-diagonal L freezes Q at first order");
        let expected = ComplexMatrix::diagonal(&[c(3.0, 0.0), c(-3.0, 0.0)]);
        assert!((&ldot - &expected).norm() < 1e-13);

        // diagonal L: Ldot vanishes, Qdot = L^m Q
        let rp = ReducedPoint::new(
            vec![c(2.0, 0.0), c(1.0, 0.0)],
            ComplexMatrix::diagonal(&[c(0.5, 0.0), c(-0.3, 0.0)]),
            1e-8,
        )
        .unwrap();
        let (qdot, ldot) = reduced_vf(2, &rp, 1e-8).unwrap();
        assert!(ldot.norm() < 1e-15);
        let expected = rp.l.pow(2).matmul(&rp.q_matrix());
        assert!((&qdot - &expected).norm() < 1e-14);

        assert!(reduced_vf(0, &rp, 1e-8).is_err());
    }

    #[test]
    fn reduced_point_validation() {
        let l = ComplexMatrix::zeros(2);
        assert!(matches!(
            ReducedPoint::new(vec![c(1.0, 0.0), c(1.0, 0.0)], l.clone(), 1e-8),
            Err(Error::NotRegular { .. })
        ));
        assert!(matches!(
            ReducedPoint::new(vec![c(0.0, 0.0), c(1.0, 0.0)], l, 1e-8),
            Err(Error::NotInvertible)
        ));
    }
}
