//! The two Poisson brackets on G x gl(n,C), their pencil, the invariant-pair
//! simplification of the second bracket, and the Lie-derivative bracket along
//! the shift field W: (g, L) -> (g, L + z).
//!
//! pb1 is the canonical cotangent bracket
//!     {F,H}_1 = <nabla1 F, d2 H> - <nabla1 H, d2 F> + <L, [d2 F, d2 H]>,
//! pb2 the multiplicative/Semenov-Tian-Shansky hybrid
//!     {F,H}_2 = <r nabla1 F, nabla1 H> - <r nabla1' F, nabla1' H>
//!             + <nabla2 F - nabla2' F, r_+ nabla2' H - r_- nabla2 H>
//!             + <nabla1 F, r_+ nabla2' H - r_- nabla2 H>
//!             - <nabla1 H, r_+ nabla2' F - r_- nabla2 F>.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{commutator, trace_pairing, C64, ComplexMatrix};
use crate::observables::{check_invariance, DerivativeBundle, Observable, PhasePoint};
use crate::rmatrix::{r_const, r_minus, r_plus};

/// Which bracket a caller wants evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BracketKind {
    Pb1,
    Pb2,
    Pb2Invariant,
    Pencil(C64, C64),
    LieDerivativeW,
}

pub fn bracket(kind: BracketKind, f: &Observable, h: &Observable, p: &PhasePoint) -> Result<C64> {
    match kind {
        BracketKind::Pb1 => pb1(f, h, p),
        BracketKind::Pb2 => pb2(f, h, p),
        BracketKind::Pb2Invariant => pb2_invariant(f, h, p),
        BracketKind::Pencil(x, y) => pencil(x, y, f, h, p),
        BracketKind::LieDerivativeW => lie_derivative_bracket(f, h, p),
    }
}

pub fn pb1(f: &Observable, h: &Observable, p: &PhasePoint) -> Result<C64> {
    let bf = f.analytic_derivatives(p)?;
    let bh = h.analytic_derivatives(p)?;
    pb1_from_bundles(&bf, &bh, &p.l)
}

pub fn pb1_from_bundles(
    bf: &DerivativeBundle,
    bh: &DerivativeBundle,
    l: &ComplexMatrix,
) -> Result<C64> {
    Ok(trace_pairing(&bf.nabla1, &bh.d2)? - trace_pairing(&bh.nabla1, &bf.d2)?
        + trace_pairing(l, &commutator(&bf.d2, &bh.d2)?)?)
}

/// r_+ nabla2' X - r_- nabla2 X, the combination both brackets keep reusing.
fn twisted_momentum(b: &DerivativeBundle) -> ComplexMatrix {
    &r_plus(&b.nabla2p) - &r_minus(&b.nabla2)
}

pub fn pb2(f: &Observable, h: &Observable, p: &PhasePoint) -> Result<C64> {
    let bf = f.analytic_derivatives(p)?;
    let bh = h.analytic_derivatives(p)?;
    pb2_from_bundles(&bf, &bh)
}

pub fn pb2_from_bundles(bf: &DerivativeBundle, bh: &DerivativeBundle) -> Result<C64> {
    let mf = twisted_momentum(bf);
    let mh = twisted_momentum(bh);
    let line1 = trace_pairing(&r_const(&bf.nabla1), &bh.nabla1)?
        - trace_pairing(&r_const(&bf.nabla1p), &bh.nabla1p)?;
    let line2 = trace_pairing(&(&bf.nabla2 - &bf.nabla2p), &mh)?;
    let line3 = trace_pairing(&bf.nabla1, &mh)? - trace_pairing(&bh.nabla1, &mf)?;
    Ok(line1 + line2 + line3)
}

/// The second bracket for invariant F, H: all r terms cancel and
/// 2{F,H}_2 = <nabla1 F, nabla2 H + nabla2' H> - <nabla1 H, nabla2 F + nabla2' F>
///          + <nabla2 F, nabla2' H> - <nabla2 H, nabla2' F>.
/// Precondition (not checked here): F and H invariant under conjugation.
pub fn pb2_invariant(f: &Observable, h: &Observable, p: &PhasePoint) -> Result<C64> {
    let bf = f.analytic_derivatives(p)?;
    let bh = h.analytic_derivatives(p)?;
    pb2_invariant_from_bundles(&bf, &bh)
}

pub fn pb2_invariant_from_bundles(bf: &DerivativeBundle, bh: &DerivativeBundle) -> Result<C64> {
    let s = trace_pairing(&bf.nabla1, &(&bh.nabla2 + &bh.nabla2p))?
        - trace_pairing(&bh.nabla1, &(&bf.nabla2 + &bf.nabla2p))?
        + trace_pairing(&bf.nabla2, &bh.nabla2p)?
        - trace_pairing(&bh.nabla2, &bf.nabla2p)?;
    Ok(s * 0.5)
}

/// Like `pb2_invariant` but verifies the invariance precondition first with a
/// randomized sweep; a violation is a caller bug.
pub fn pb2_invariant_checked(
    f: &Observable,
    h: &Observable,
    p: &PhasePoint,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<C64> {
    for (idx, obs) in [f, h].into_iter().enumerate() {
        let dev = check_invariance(obs, p, trials, seed.wrapping_add(idx as u64))?;
        if dev > tol {
            return Err(crate::error::Error::InvarianceViolated(dev));
        }
    }
    pb2_invariant(f, h, p)
}

pub fn pencil(x: C64, y: C64, f: &Observable, h: &Observable, p: &PhasePoint) -> Result<C64> {
    Ok(x * pb1(f, h, p)? + y * pb2(f, h, p)?)
}

/// W[{F,H}_2] - {W[F],H}_2 - {F,W[H]}_2 with every piece analytic.
///
/// The directional derivative of the pb2 terms along W is assembled with the
/// product rule; gradients of F differentiate into gradients of W[F] (mixed
/// partials commute since W is a constant coordinate field), while the explicit
/// L factors in nabla2 / nabla2' contribute d2 shifts:
///     W[nabla2 F] = d2 F + L d2(W[F]),   W[nabla2' F] = d2 F + d2(W[F]) L.
pub fn lie_derivative_bracket(f: &Observable, h: &Observable, p: &PhasePoint) -> Result<C64> {
    let wf = f.w_derivative();
    let wh = h.w_derivative();
    let bf = f.analytic_derivatives(p)?;
    let bh = h.analytic_derivatives(p)?;
    let bwf = wf.analytic_derivatives(p)?;
    let bwh = wh.analytic_derivatives(p)?;
    let l = &p.l;

    let mf = twisted_momentum(&bf);
    let mh = twisted_momentum(&bh);
    // W[r_+ nabla2' X - r_- nabla2 X] = d2 X + r_+(d2 WX . L) - r_-(L . d2 WX)
    let w_mf = &bf.d2 + &(&r_plus(&bwf.d2.matmul(l)) - &r_minus(&l.matmul(&bwf.d2)));
    let w_mh = &bh.d2 + &(&r_plus(&bwh.d2.matmul(l)) - &r_minus(&l.matmul(&bwh.d2)));

    let w_line1 = trace_pairing(&r_const(&bwf.nabla1), &bh.nabla1)?
        + trace_pairing(&r_const(&bf.nabla1), &bwh.nabla1)?
        - trace_pairing(&r_const(&bwf.nabla1p), &bh.nabla1p)?
        - trace_pairing(&r_const(&bf.nabla1p), &bwh.nabla1p)?;

    // W[nabla2 F - nabla2' F] = [L, d2 WF]
    let w_line2 = trace_pairing(&commutator(l, &bwf.d2)?, &mh)?
        + trace_pairing(&(&bf.nabla2 - &bf.nabla2p), &w_mh)?;

    let w_line3 = trace_pairing(&bwf.nabla1, &mh)? + trace_pairing(&bf.nabla1, &w_mh)?
        - trace_pairing(&bwh.nabla1, &mf)?
        - trace_pairing(&bh.nabla1, &w_mf)?;

    let w_of_pb2 = w_line1 + w_line2 + w_line3;
    Ok(w_of_pb2 - pb2(&wf, h, p)? - pb2(f, &wh, p)?)
}

/// Numeric W-derivative of the pb2 value, used only as an oracle in tests.
pub fn lie_derivative_bracket_fd(
    f: &Observable,
    h: &Observable,
    p: &PhasePoint,
    step: f64,
) -> Result<C64> {
    let shift = ComplexMatrix::identity(p.size()).scale(Complex64::new(step, 0.0));
    let plus = PhasePoint { g: p.g.clone(), l: &p.l + &shift };
    let minus = PhasePoint { g: p.g.clone(), l: &p.l - &shift };
    let w_of_pb2 = (pb2(f, h, &plus)? - pb2(f, h, &minus)?) / Complex64::new(2.0 * step, 0.0);
    Ok(w_of_pb2 - pb2(&f.w_derivative(), h, p)? - pb2(f, &h.w_derivative(), p)?)
}
