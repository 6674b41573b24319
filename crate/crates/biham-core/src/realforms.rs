//! Hyperbolic and trigonometric real slices of the reduced phase space.
//!
//! Hyperbolic slice: Q = e^q with real diagonal q, L Hermitian; the reduced
//! brackets restrict to real values there. Trigonometric slice: Q = e^{iq}
//! with real q, L Hermitian; the brackets come out purely imaginary. Both are
//! thin wrappers over the holomorphic reduced brackets plus symmetry-class
//! assertions, with the slice-adapted bracket formulas kept alongside as
//! cross-checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{trace_pairing, C64, ComplexMatrix};
use crate::reduction::{
    reduced_pb1, reduced_pb2, ReducedObservable, ReducedPoint,
};
use crate::rmatrix::DynamicalR;

/// Hermiticity tolerance for slice membership.
pub const HERMITIAN_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slice {
    Hyperbolic,
    Trigonometric,
}

fn check_hermitian(l: &ComplexMatrix) -> Result<()> {
    let defect = l.hermitian_defect();
    if defect > HERMITIAN_TOL * (1.0 + l.norm()) {
        return Err(Error::invalid(format!("L is not Hermitian: defect {defect:.3e}")));
    }
    Ok(())
}

/// A point of the hyperbolic slice: real diagonal q (so Q = e^q > 0), L = L^dagger.
#[derive(Clone, Debug)]
pub struct HyperbolicPoint {
    pub q: Vec<f64>,
    pub l: ComplexMatrix,
}

impl HyperbolicPoint {
    pub fn new(q: Vec<f64>, l: ComplexMatrix) -> Result<Self> {
        if q.len() != l.size() {
            return Err(Error::SizeMismatch(q.len(), l.size()));
        }
        check_hermitian(&l)?;
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                if (q[i] - q[j]).abs() < 1e-12 {
                    return Err(Error::NotRegular { gap: (q[i] - q[j]).abs(), tol: 1e-12 });
                }
            }
        }
        Ok(HyperbolicPoint { q, l })
    }

    pub fn q_exp(&self) -> Vec<C64> {
        self.q.iter().map(|&x| Complex64::new(x.exp(), 0.0)).collect()
    }

    pub fn to_reduced(&self, tol_reg: f64) -> Result<ReducedPoint> {
        ReducedPoint::new(self.q_exp(), self.l.clone(), tol_reg)
    }
}

/// A point of the trigonometric slice: Q = e^{iq} on the unit circle, L Hermitian.
#[derive(Clone, Debug)]
pub struct TrigPoint {
    pub q: Vec<f64>,
    pub l: ComplexMatrix,
}

impl TrigPoint {
    pub fn new(q: Vec<f64>, l: ComplexMatrix) -> Result<Self> {
        if q.len() != l.size() {
            return Err(Error::SizeMismatch(q.len(), l.size()));
        }
        check_hermitian(&l)?;
        let qe: Vec<C64> = q.iter().map(|&x| Complex64::new(0.0, x).exp()).collect();
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                let gap = (qe[i] - qe[j]).norm();
                if gap < 1e-12 {
                    return Err(Error::NotRegular { gap, tol: 1e-12 });
                }
            }
        }
        Ok(TrigPoint { q, l })
    }

    pub fn q_exp(&self) -> Vec<C64> {
        self.q.iter().map(|&x| Complex64::new(0.0, x).exp()).collect()
    }

    pub fn to_reduced(&self, tol_reg: f64) -> Result<ReducedPoint> {
        ReducedPoint::new(self.q_exp(), self.l.clone(), tol_reg)
    }
}

/// Slice-adapted derivatives with their symmetry classes asserted:
/// hyperbolic nabla1 is real diagonal and d2 Hermitian; trigonometric D1 is
/// real diagonal and D2 anti-Hermitian, bridged by nabla1 = -i D1, d2 = -i D2.
#[derive(Clone, Debug)]
pub enum RealDerivatives {
    Hyperbolic { nabla1: ComplexMatrix, d2: ComplexMatrix },
    Trigonometric { d1: ComplexMatrix, d2: ComplexMatrix },
}

const SYMMETRY_TOL: f64 = 1e-12;

/// Compute the slice derivatives of a real invariant observable and check the
/// stated symmetry classes.
pub fn real_derivatives(
    slice: Slice,
    f: &ReducedObservable,
    rp: &ReducedPoint,
) -> Result<RealDerivatives> {
    let d = f.derivatives(rp)?;
    let scale = 1.0 + d.nabla1.norm() + d.d2.norm();
    match slice {
        Slice::Hyperbolic => {
            let imag_defect: f64 =
                d.nabla1.diag_entries().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if imag_defect > SYMMETRY_TOL * scale {
                return Err(Error::invalid(format!(
                    "nabla1 not real diagonal: defect {imag_defect:.3e}"
                )));
            }
            let herm = d.d2.hermitian_defect();
            if herm > SYMMETRY_TOL * scale {
                return Err(Error::invalid(format!("d2 not Hermitian: defect {herm:.3e}")));
            }
            Ok(RealDerivatives::Hyperbolic { nabla1: d.nabla1, d2: d.d2 })
        }
        Slice::Trigonometric => {
            // D1 = i nabla1, D2 = i d2
            let i = Complex64::new(0.0, 1.0);
            let d1 = d.nabla1.scale(i);
            let d2 = d.d2.scale(i);
            let imag_defect: f64 =
                d1.diag_entries().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if imag_defect > SYMMETRY_TOL * scale {
                return Err(Error::invalid(format!(
                    "D1 not real diagonal: defect {imag_defect:.3e}"
                )));
            }
            let anti = (&d2 + &d2.adjoint()).norm();
            if anti > SYMMETRY_TOL * scale {
                return Err(Error::invalid(format!("D2 not anti-Hermitian: defect {anti:.3e}")));
            }
            Ok(RealDerivatives::Trigonometric { d1, d2 })
        }
    }
}

/// Hyperbolic bracket i = 1, 2: the holomorphic reduced bracket restricted to
/// the slice; the value is real and is returned as such.
pub fn hyp_pb(
    which: u8,
    f: &ReducedObservable,
    h: &ReducedObservable,
    hp: &HyperbolicPoint,
    tol_reg: f64,
) -> Result<f64> {
    let rp = hp.to_reduced(tol_reg)?;
    let v = match which {
        1 => reduced_pb1(f, h, &rp, tol_reg)?,
        2 => reduced_pb2(f, h, &rp, tol_reg)?,
        _ => return Err(Error::invalid("bracket selector must be 1 or 2")),
    };
    Ok(v.re)
}

/// Imaginary part left over by a hyperbolic bracket; a reality residual.
pub fn hyp_pb_imag_defect(
    which: u8,
    f: &ReducedObservable,
    h: &ReducedObservable,
    hp: &HyperbolicPoint,
    tol_reg: f64,
) -> Result<f64> {
    let rp = hp.to_reduced(tol_reg)?;
    let v = match which {
        1 => reduced_pb1(f, h, &rp, tol_reg)?,
        2 => reduced_pb2(f, h, &rp, tol_reg)?,
        _ => return Err(Error::invalid("bracket selector must be 1 or 2")),
    };
    Ok(v.im.abs())
}

/// Trigonometric bracket i = 1, 2: purely imaginary on the slice; returned as
/// the full complex value so callers can inspect the real-part residual.
pub fn trig_pb(
    which: u8,
    f: &ReducedObservable,
    h: &ReducedObservable,
    tp: &TrigPoint,
    tol_reg: f64,
) -> Result<C64> {
    let rp = tp.to_reduced(tol_reg)?;
    match which {
        1 => reduced_pb1(f, h, &rp, tol_reg),
        2 => reduced_pb2(f, h, &rp, tol_reg),
        _ => Err(Error::invalid("bracket selector must be 1 or 2")),
    }
}

/// Real-pairing form of the first hyperbolic bracket:
/// Re<nabla1 f, d2 h> - Re<nabla1 h, d2 f> + Re<L, [d2 f, d2 h]_{R(Q)}>.
pub fn hyp_pb1_real_form(
    f: &ReducedObservable,
    h: &ReducedObservable,
    hp: &HyperbolicPoint,
    tol_reg: f64,
) -> Result<f64> {
    let rp = hp.to_reduced(tol_reg)?;
    let df = f.derivatives(&rp)?;
    let dh = h.derivatives(&rp)?;
    let r = rp.dynamical_r(tol_reg)?;
    let rbr = r.deformed_bracket(&df.d2, &dh.d2)?;
    Ok(trace_pairing(&df.nabla1, &dh.d2)?.re - trace_pairing(&dh.nabla1, &df.d2)?.re
        + trace_pairing(&rp.l, &rbr)?.re)
}

/// Real-pairing form of the second hyperbolic bracket:
/// Re<nabla1 f, nabla2 h> - Re<nabla1 h, nabla2 f> + 2 Re<nabla2 f, R(Q) nabla2 h>.
pub fn hyp_pb2_real_form(
    f: &ReducedObservable,
    h: &ReducedObservable,
    hp: &HyperbolicPoint,
    tol_reg: f64,
) -> Result<f64> {
    let rp = hp.to_reduced(tol_reg)?;
    let df = f.derivatives(&rp)?;
    let dh = h.derivatives(&rp)?;
    let r = rp.dynamical_r(tol_reg)?;
    Ok(trace_pairing(&df.nabla1, &dh.nabla2)?.re - trace_pairing(&dh.nabla1, &df.nabla2)?.re
        + 2.0 * trace_pairing(&df.nabla2, &r.apply(&dh.nabla2))?.re)
}

/// Imaginary-pairing form of the first trigonometric bracket:
/// -i ( Im<D1 f, D2 h> - Im<D1 h, D2 f> + Im<L, [D2 f, D2 h]_{R(Q)}> ).
pub fn trig_pb1_imag_form(
    f: &ReducedObservable,
    h: &ReducedObservable,
    tp: &TrigPoint,
    tol_reg: f64,
) -> Result<C64> {
    let rp = tp.to_reduced(tol_reg)?;
    let (d1f, d2f) = match real_derivatives(Slice::Trigonometric, f, &rp)? {
        RealDerivatives::Trigonometric { d1, d2 } => (d1, d2),
        _ => unreachable!(),
    };
    let (d1h, d2h) = match real_derivatives(Slice::Trigonometric, h, &rp)? {
        RealDerivatives::Trigonometric { d1, d2 } => (d1, d2),
        _ => unreachable!(),
    };
    let r = rp.dynamical_r(tol_reg)?;
    let rbr = r.deformed_bracket(&d2f, &d2h)?;
    let s = trace_pairing(&d1f, &d2h)?.im - trace_pairing(&d1h, &d2f)?.im
        + trace_pairing(&rp.l, &rbr)?.im;
    Ok(Complex64::new(0.0, -s))
}

/// Imaginary-pairing form of the second trigonometric bracket:
/// -i ( Im<D1 f, L D2 h> - Im<D1 h, L D2 f> + 2 Im<L D2 f, R(Q)(L D2 h)> ).
pub fn trig_pb2_imag_form(
    f: &ReducedObservable,
    h: &ReducedObservable,
    tp: &TrigPoint,
    tol_reg: f64,
) -> Result<C64> {
    let rp = tp.to_reduced(tol_reg)?;
    let (d1f, d2f) = match real_derivatives(Slice::Trigonometric, f, &rp)? {
        RealDerivatives::Trigonometric { d1, d2 } => (d1, d2),
        _ => unreachable!(),
    };
    let (d1h, d2h) = match real_derivatives(Slice::Trigonometric, h, &rp)? {
        RealDerivatives::Trigonometric { d1, d2 } => (d1, d2),
        _ => unreachable!(),
    };
    let r = rp.dynamical_r(tol_reg)?;
    let ld2f = rp.l.matmul(&d2f);
    let ld2h = rp.l.matmul(&d2h);
    let s = trace_pairing(&d1f, &ld2h)?.im - trace_pairing(&d1h, &ld2f)?.im
        + 2.0 * trace_pairing(&ld2f, &r.apply(&ld2h))?.im;
    Ok(Complex64::new(0.0, -s))
}

/// Invariant observables that are real-valued on the hyperbolic slice: every
/// short trace word qualifies there (Q is real diagonal, L Hermitian, and the
/// words are cyclic palindromes).
pub fn hyperbolic_real_observables() -> Result<Vec<ReducedObservable>> {
    ["l", "ll", "lll", "g", "gg", "gl", "gll", "ggl", "Gl", "glGl"]
        .iter()
        .map(|w| ReducedObservable::restrict(crate::observables::Observable::word(w)?))
        .collect()
}

/// Invariant observables that are real-valued on the trigonometric slice.
/// With Q on the unit circle a single word like tr(QL) is complex; reality
/// needs the conjugation-symmetric combinations tr(Q^k ...) + tr(Q^-k ...)
/// or i times their differences.
pub fn trigonometric_real_observables() -> Result<Vec<ReducedObservable>> {
    use crate::observables::Observable;
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let mut out = vec![
        Observable::word("l")?,
        Observable::word("ll")?,
        Observable::word("lll")?,
        Observable::word("glGl")?,
        Observable::Sum(vec![Observable::word("g")?, Observable::word("G")?]),
        Observable::Sum(vec![Observable::word("gl")?, Observable::word("Gl")?]),
        Observable::Sum(vec![Observable::word("gll")?, Observable::word("Gll")?]),
        Observable::Sum(vec![
            Observable::scaled_word(i, "gl")?,
            Observable::scaled_word(-i, "Gl")?,
        ]),
        Observable::Sum(vec![
            Observable::scaled_word(i, "g")?,
            Observable::scaled_word(-i, "G")?,
        ]),
    ];
    let _ = one;
    out.drain(..).map(ReducedObservable::restrict).collect()
}

/// Residual of the conjugation identity of R(Q) on each slice:
/// hyperbolic: R(Q) X^dagger = -(R(Q) X)^dagger; trigonometric: equal signs.
pub fn conjugation_identity_check(slice: Slice, q: &[C64], x: &ComplexMatrix) -> Result<f64> {
    let r = DynamicalR::new(q)?;
    let lhs = r.apply(&x.adjoint());
    let rhs = r.apply(x).adjoint();
    Ok(match slice {
        Slice::Hyperbolic => (&lhs + &rhs).norm(),
        Slice::Trigonometric => (&lhs - &rhs).norm(),
    })
}
