//! The double G x G behind the second bracket: the split-signature pairing,
//! the isotropic diagonal/dual subalgebras and their projections, the plus and
//! minus brackets, the local factorization into diagonal and dual factors, and
//! the transfer down to (g, L) that reproduces the second Poisson bracket.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{gauss_decompose, C64, ComplexMatrix, GaussOrder, DET_TOL};
use crate::observables::{exp_elementary, DerivativeBundle, Observable, PhasePoint};
use crate::rmatrix::{r_minus, r_plus};

/// An element (X1, X2) of gl + gl.
#[derive(Clone, Debug)]
pub struct DoubleVector {
    pub first: ComplexMatrix,
    pub second: ComplexMatrix,
}

impl DoubleVector {
    pub fn new(first: ComplexMatrix, second: ComplexMatrix) -> Result<Self> {
        if first.size() != second.size() {
            return Err(Error::SizeMismatch(first.size(), second.size()));
        }
        Ok(DoubleVector { first, second })
    }

    pub fn add(&self, other: &DoubleVector) -> DoubleVector {
        DoubleVector { first: &self.first + &other.first, second: &self.second + &other.second }
    }

    pub fn sub(&self, other: &DoubleVector) -> DoubleVector {
        DoubleVector { first: &self.first - &other.first, second: &self.second - &other.second }
    }

    pub fn scale(&self, z: C64) -> DoubleVector {
        DoubleVector { first: self.first.scale(z), second: self.second.scale(z) }
    }

    pub fn norm(&self) -> f64 {
        (self.first.norm().powi(2) + self.second.norm().powi(2)).sqrt()
    }
}

/// An element (g1, g2) of G x G.
#[derive(Clone, Debug)]
pub struct DoubleElement {
    pub g1: ComplexMatrix,
    pub g2: ComplexMatrix,
}

impl DoubleElement {
    pub fn new(g1: ComplexMatrix, g2: ComplexMatrix) -> Result<Self> {
        if g1.size() != g2.size() {
            return Err(Error::SizeMismatch(g1.size(), g2.size()));
        }
        if g1.det().norm() <= DET_TOL || g2.det().norm() <= DET_TOL {
            return Err(Error::NotInvertible);
        }
        Ok(DoubleElement { g1, g2 })
    }

    pub fn size(&self) -> usize {
        self.g1.size()
    }
}

/// The split-signature pairing tr(X1 Y1) - tr(X2 Y2).
pub fn pairing2(v: &DoubleVector, w: &DoubleVector) -> Result<C64> {
    Ok(crate::linalg::trace_pairing(&v.first, &w.first)?
        - crate::linalg::trace_pairing(&v.second, &w.second)?)
}

/// Projection onto the diagonal subalgebra {(Y, Y)} along the dual one:
/// with Z = X1 - X2 and Y = X2 - r_-(Z), the parts are (Y, Y) and (r_+Z, r_-Z).
pub fn project_delta(v: &DoubleVector) -> DoubleVector {
    let z = &v.first - &v.second;
    let y = &v.second - &r_minus(&z);
    DoubleVector { first: y.clone(), second: y }
}

/// Projection onto the dual subalgebra {(r_+X, r_-X)}.
pub fn project_star(v: &DoubleVector) -> DoubleVector {
    let z = &v.first - &v.second;
    DoubleVector { first: r_plus(&z), second: r_minus(&z) }
}

/// The operator R = (P_delta - P_star) / 2 entering both double brackets.
pub fn r_double(v: &DoubleVector) -> DoubleVector {
    let d = project_delta(v);
    let s = project_star(v);
    d.sub(&s).scale(C64::new(0.5, 0.0))
}

/// Left and right derivatives of a function on the double, via central
/// differences in every elementary direction of each slot. The pairing
/// convention puts a minus sign on the second slot.
fn fd_double_derivative(
    f: &dyn Fn(&DoubleElement) -> Result<C64>,
    d: &DoubleElement,
    right: bool,
    h: f64,
) -> Result<DoubleVector> {
    let n = d.size();
    let mut a = ComplexMatrix::zeros(n);
    let mut b = ComplexMatrix::zeros(n);
    let two_h = C64::new(2.0 * h, 0.0);
    for i in 0..n {
        for j in 0..n {
            let ep = exp_elementary(n, i, j, h);
            let em = exp_elementary(n, i, j, -h);
            let (p1, m1, p2, m2) = if right {
                (
                    DoubleElement { g1: d.g1.matmul(&ep), g2: d.g2.clone() },
                    DoubleElement { g1: d.g1.matmul(&em), g2: d.g2.clone() },
                    DoubleElement { g1: d.g1.clone(), g2: d.g2.matmul(&ep) },
                    DoubleElement { g1: d.g1.clone(), g2: d.g2.matmul(&em) },
                )
            } else {
                (
                    DoubleElement { g1: ep.matmul(&d.g1), g2: d.g2.clone() },
                    DoubleElement { g1: em.matmul(&d.g1), g2: d.g2.clone() },
                    DoubleElement { g1: d.g1.clone(), g2: ep.matmul(&d.g2) },
                    DoubleElement { g1: d.g1.clone(), g2: em.matmul(&d.g2) },
                )
            };
            a[(j, i)] = (f(&p1)? - f(&m1)?) / two_h;
            b[(j, i)] = (f(&p2)? - f(&m2)?) / two_h;
        }
    }
    Ok(DoubleVector { first: a, second: -(&b) })
}

/// The two natural brackets on the double, evaluated through finite
/// differences of arbitrary functions:
///   {F,H}_pm = <DF, R DH>_2 +- <D'F, R D'H>_2.
pub fn pb_double(
    plus: bool,
    f: &dyn Fn(&DoubleElement) -> Result<C64>,
    h: &dyn Fn(&DoubleElement) -> Result<C64>,
    d: &DoubleElement,
    fd_step: f64,
) -> Result<C64> {
    let df = fd_double_derivative(f, d, false, fd_step)?;
    let dh = fd_double_derivative(h, d, false, fd_step)?;
    let dpf = fd_double_derivative(f, d, true, fd_step)?;
    let dph = fd_double_derivative(h, d, true, fd_step)?;
    let left = pairing2(&df, &r_double(&dh))?;
    let right = pairing2(&dpf, &r_double(&dph))?;
    Ok(if plus { left + right } else { left - right })
}

/// The diagonal factor g (as (g, g)) and the dual factor (gplus, gminus^-1
/// ... stored as gminus) of the factorization (g1, g2) = (g, g) (gplus, gminus)^-1.
#[derive(Clone, Debug)]
pub struct DeltaStarFactors {
    /// the diagonal-subgroup part: the element is (g, g)
    pub g: ComplexMatrix,
    /// upper-triangular dual component g_> g_0
    pub gplus: ComplexMatrix,
    /// lower-triangular dual component (g_0 g_<)^-1
    pub gminus: ComplexMatrix,
}

impl DeltaStarFactors {
    /// Build from triangular data: g_> unit upper, g0 invertible diagonal,
    /// g_< unit lower.
    pub fn from_triangular(
        g: ComplexMatrix,
        g_upper: &ComplexMatrix,
        g0: &ComplexMatrix,
        g_lower: &ComplexMatrix,
    ) -> Result<Self> {
        let gplus = g_upper.matmul(g0);
        let gminus = g0.matmul(g_lower).inverse()?;
        Ok(DeltaStarFactors { g, gplus, gminus })
    }

    /// (g gplus^-1, g gminus^-1), the double element these factors multiply to.
    pub fn recompose(&self) -> Result<DoubleElement> {
        DoubleElement::new(
            self.g.matmul(&self.gplus.inverse()?),
            self.g.matmul(&self.gminus.inverse()?),
        )
    }
}

fn principal_sqrt_diag(d: &ComplexMatrix) -> Result<ComplexMatrix> {
    let entries = d.diag_entries();
    let mut out = Vec::with_capacity(entries.len());
    for (index, z) in entries.iter().enumerate() {
        if z.re < 0.0 && z.im.abs() <= 1e-12 * z.norm() {
            return Err(Error::BranchCut { index });
        }
        out.push(z.sqrt());
    }
    Ok(ComplexMatrix::diagonal(&out))
}

/// Solve (g1, g2) = (g, g) (gplus, gminus)^-1 near the identity: Gauss-factor
/// g1^-1 g2 = h_> h_0^2 h_<, take the principal square root of the diagonal,
/// and set gplus = h_> h_0, gminus = (h_0 h_<)^-1, g = g1 h_> h_0.
pub fn factorize(d: &DoubleElement) -> Result<DeltaStarFactors> {
    let a = d.g1.inverse()?.matmul(&d.g2);
    let f = gauss_decompose(&a, GaussOrder::UpperDiagLower)?;
    let h0 = principal_sqrt_diag(&f.diagonal)?;
    let gplus = f.upper_unipotent.matmul(&h0);
    let gminus = h0.matmul(&f.lower_unipotent).inverse()?;
    let g = d.g1.matmul(&gplus);
    Ok(DeltaStarFactors { g, gplus, gminus })
}

/// The cotangent-bundle point carried by the factors: (g, L) with
/// L = g_> g_0^2 g_< = gplus gminus^-1.
pub fn to_cotangent(f: &DeltaStarFactors) -> Result<PhasePoint> {
    let l = f.gplus.matmul(&f.gminus.inverse()?);
    PhasePoint::new(f.g.clone(), l)
}

/// The composite local diffeomorphism from the double to G x gl under which
/// the plus bracket becomes the second Poisson bracket: the diagonal factor
/// comes from the opposite-order factorization (g1, g2) = (v_+, v_-) (b, b)^-1,
/// giving b = g1^-1 v_> v_0, while L = g1^-1 g2.
pub fn transfer_map(d: &DoubleElement) -> Result<PhasePoint> {
    let a_delta = d.g1.matmul(&d.g2.inverse()?);
    let f = gauss_decompose(&a_delta, GaussOrder::UpperDiagLower)?;
    let v0 = principal_sqrt_diag(&f.diagonal)?;
    let g = d.g1.inverse()?.matmul(&f.upper_unipotent).matmul(&v0);
    let l = d.g1.inverse()?.matmul(&d.g2);
    PhasePoint::new(g, l)
}

/// r_+ nabla2' F - r_- nabla2 F, the diagonal-pair component of the second-slot
/// derivative on the double.
fn twisted_momentum(b: &DerivativeBundle) -> ComplexMatrix {
    &r_plus(&b.nabla2p) - &r_minus(&b.nabla2)
}

/// The transferred plus bracket, evaluated through the derivative identities
/// that relate double-side derivatives to the (g, L) gradients:
///   D1 F = (r_+ nabla1 F, r_- nabla1 F)  (same with primes),
///   D2 F = (M_F, M_F) with M_F = r_+ nabla2' F - r_- nabla2 F,
///   P_star(g_* D2' F g_*^-1) = P_star((nabla2 F, nabla2' F)),
/// plugged into
///   {F,H}'_+ = <g_* (D2'F) g_*^-1, D2 H>_2 - <g_delta (D1'F) g_delta^-1, D1 H>_2
///            + <D1 F, D2 H>_2 - <D1 H, D2 F>_2.
pub fn transferred_pb_plus(
    f: &Observable,
    h: &Observable,
    factors: &DeltaStarFactors,
) -> Result<C64> {
    let point = to_cotangent(factors)?;
    let bf = f.analytic_derivatives(&point)?;
    let bh = h.analytic_derivatives(&point)?;
    let mf = twisted_momentum(&bf);
    let mh = twisted_momentum(&bh);
    let d2h = DoubleVector::new(mh.clone(), mh)?;
    let d2f_pair = DoubleVector::new(mf.clone(), mf)?;

    // term 1: the primed second-slot derivative enters only through its
    // dual-part projection
    let star_part = project_star(&DoubleVector::new(bf.nabla2.clone(), bf.nabla2p.clone())?);
    let term1 = pairing2(&star_part, &d2h)?;

    // term 2: conjugate the primed first-slot derivative by the diagonal factor
    let g = &point.g;
    let gi = g.inverse()?;
    let d1pf_conj = DoubleVector::new(
        g.matmul(&r_plus(&bf.nabla1p)).matmul(&gi),
        g.matmul(&r_minus(&bf.nabla1p)).matmul(&gi),
    )?;
    let d1h = DoubleVector::new(r_plus(&bh.nabla1), r_minus(&bh.nabla1))?;
    let term2 = -pairing2(&d1pf_conj, &d1h)?;

    let d1f = DoubleVector::new(r_plus(&bf.nabla1), r_minus(&bf.nabla1))?;
    let term3 = pairing2(&d1f, &d2h)? - pairing2(&d1h, &d2f_pair)?;
    Ok(term1 + term2 + term3)
}

/// Residuals of the four derivative identities: each left side is measured by
/// finite differences on the (g_delta, g_star) manifold, each right side by
/// the analytic (g, L) gradients. Order: D1, D1', D2, and the projected D2'.
pub fn lemma_a1_residuals(
    f: &Observable,
    factors: &DeltaStarFactors,
    fd_step: f64,
) -> Result<[f64; 4]> {
    let point = to_cotangent(factors)?;
    let n = point.size();
    let b = f.analytic_derivatives(&point)?;
    let two_h = C64::new(2.0 * fd_step, 0.0);

    // D1: left-translate the diagonal slot, L fixed
    let mut y = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let ep = exp_elementary(n, i, j, fd_step);
            let em = exp_elementary(n, i, j, -fd_step);
            let plus = PhasePoint { g: ep.matmul(&point.g), l: point.l.clone() };
            let minus = PhasePoint { g: em.matmul(&point.g), l: point.l.clone() };
            y[(j, i)] = (f.evaluate(&plus)? - f.evaluate(&minus)?) / two_h;
        }
    }
    let res_d1 = (&y - &b.nabla1).norm();

    // D1': right-translate the diagonal slot
    let mut y = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let ep = exp_elementary(n, i, j, fd_step);
            let em = exp_elementary(n, i, j, -fd_step);
            let plus = PhasePoint { g: point.g.matmul(&ep), l: point.l.clone() };
            let minus = PhasePoint { g: point.g.matmul(&em), l: point.l.clone() };
            y[(j, i)] = (f.evaluate(&plus)? - f.evaluate(&minus)?) / two_h;
        }
    }
    let res_d1p = (&y - &b.nabla1p).norm();

    // D2: left-translate the dual slot; L moves by exp(h r_+X) L exp(-h r_-X)
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let x = ComplexMatrix::elementary(n, i, j);
            let push = |s: f64| -> Result<C64> {
                let lp = crate::linalg::mat_exp(&r_plus(&x).scale(C64::new(s, 0.0)))?
                    .matmul(&point.l)
                    .matmul(&crate::linalg::mat_exp(&r_minus(&x).scale(C64::new(-s, 0.0)))?);
                f.evaluate(&PhasePoint { g: point.g.clone(), l: lp })
            };
            m[(j, i)] = (push(fd_step)? - push(-fd_step)?) / two_h;
        }
    }
    let res_d2 = (&m - &twisted_momentum(&b)).norm();

    // D2': right-translate the dual slot; L moves by
    // gplus exp(h r_+X) exp(-h r_-X) gminus^-1, reconstruct the diagonal pair,
    // conjugate by g_star and compare dual-part projections
    let mut mp = ComplexMatrix::zeros(n);
    let gminus_inv = factors.gminus.inverse()?;
    for i in 0..n {
        for j in 0..n {
            let x = ComplexMatrix::elementary(n, i, j);
            let push = |s: f64| -> Result<C64> {
                let lp = factors
                    .gplus
                    .matmul(&crate::linalg::mat_exp(&r_plus(&x).scale(C64::new(s, 0.0)))?)
                    .matmul(&crate::linalg::mat_exp(&r_minus(&x).scale(C64::new(-s, 0.0)))?)
                    .matmul(&gminus_inv);
                f.evaluate(&PhasePoint { g: point.g.clone(), l: lp })
            };
            mp[(j, i)] = (push(fd_step)? - push(-fd_step)?) / two_h;
        }
    }
    let conj = DoubleVector::new(
        factors.gplus.matmul(&mp).matmul(&factors.gplus.inverse()?),
        factors.gminus.matmul(&mp).matmul(&gminus_inv),
    )?;
    let lhs = project_star(&conj);
    let rhs = project_star(&DoubleVector::new(b.nabla2.clone(), b.nabla2p.clone())?);
    let res_d2p = lhs.sub(&rhs).norm();

    Ok([res_d1, res_d1p, res_d2, res_d2p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::pb2;
    use crate::rng::{random_matrix, rng_for};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_vector(seed: u64, n: usize) -> DoubleVector {
        let mut rng = rng_for(seed, 0);
        DoubleVector::new(random_matrix(&mut rng, n, 1.0), random_matrix(&mut rng, n, 1.0))
            .unwrap()
    }

    fn random_double_near_identity(seed: u64, n: usize, radius: f64) -> DoubleElement {
        let mut rng = rng_for(seed, 0);
        let g1 = crate::rng::random_invertible_near_identity(&mut rng, n, radius);
        let g2 = crate::rng::random_invertible_near_identity(&mut rng, n, radius);
        DoubleElement::new(g1, g2).unwrap()
    }

    fn random_factors_near_identity(seed: u64, n: usize, radius: f64) -> DeltaStarFactors {
        let mut rng = rng_for(seed, 0);
        let g = crate::rng::random_invertible_near_identity(&mut rng, n, radius);
        let upper = &ComplexMatrix::identity(n)
            + &random_matrix(&mut rng, n, radius).strict_upper();
        let lower = &ComplexMatrix::identity(n)
            + &random_matrix(&mut rng, n, radius).strict_lower();
        let d: Vec<C64> = (0..n)
            .map(|_| c(1.0, 0.0) + crate::rng::random_complex(&mut rng, radius))
            .collect();
        DeltaStarFactors::from_triangular(g, &upper, &ComplexMatrix::diagonal(&d), &lower)
            .unwrap()
    }

    #[test]
    fn pairing_examples() {
        let mut rng = rng_for(1, 0);
        let x = random_matrix(&mut rng, 2, 1.0);
        let y = random_matrix(&mut rng, 2, 1.0);
        let z = ComplexMatrix::zeros(2);
        // second slot empty: plain trace form
        let v = DoubleVector::new(x.clone(), z.clone()).unwrap();
        let w = DoubleVector::new(y.clone(), z.clone()).unwrap();
        let expected = crate::linalg::trace_pairing(&x, &y).unwrap();
        assert_eq!(pairing2(&v, &w).unwrap(), expected);
        // diagonal pairs are isotropic
        let v = DoubleVector::new(x.clone(), x.clone()).unwrap();
        let w = DoubleVector::new(y.clone(), y.clone()).unwrap();
        assert!(pairing2(&v, &w).unwrap().norm() < 1e-14);
        // dual pairs are isotropic
        let v = DoubleVector::new(r_plus(&x), r_minus(&x)).unwrap();
        let w = DoubleVector::new(r_plus(&y), r_minus(&y)).unwrap();
        assert!(pairing2(&v, &w).unwrap().norm() < 1e-13);
    }

    #[test]
    fn projection_examples() {
        let mut rng = rng_for(2, 0);
        let x = random_matrix(&mut rng, 3, 1.0);
        // already diagonal-type
        let v = DoubleVector::new(x.clone(), x.clone()).unwrap();
        assert!(project_star(&v).norm() < 1e-15);
        assert!(project_delta(&v).sub(&v).norm() < 1e-15);
        // (e12, 0) is pure dual type
        let e12 = ComplexMatrix::elementary(2, 0, 1);
        let v = DoubleVector::new(e12.clone(), ComplexMatrix::zeros(2)).unwrap();
        assert!(project_delta(&v).norm() < 1e-15);
        assert!(project_star(&v).sub(&v).norm() < 1e-15);
        // zero maps to zero
        let v = DoubleVector::new(ComplexMatrix::zeros(2), ComplexMatrix::zeros(2)).unwrap();
        assert!(project_delta(&v).norm() + project_star(&v).norm() < 1e-15);
    }

    #[test]
    fn projections_sum_to_identity() {
        for trial in 0..30u64 {
            let n = 2 + (trial % 3) as usize;
            let v = random_vector(trial, n);
            let sum = project_delta(&v).add(&project_star(&v));
            assert!(sum.sub(&v).norm() < 1e-14, "trial {trial}");
            // idempotence
            let pd = project_delta(&v);
            assert!(project_delta(&pd).sub(&pd).norm() < 1e-14);
            let ps = project_star(&v);
            assert!(project_star(&ps).sub(&ps).norm() < 1e-14);
            // isotropy of the images
            assert!(pairing2(&pd, &project_delta(&random_vector(trial + 100, n)))
                .unwrap()
                .norm()
                < 1e-12);
            assert!(pairing2(&ps, &project_star(&random_vector(trial + 200, n)))
                .unwrap()
                .norm()
                < 1e-12);
        }
    }

    #[test]
    fn factorize_examples() {
        // identity factorizes trivially
        let d = DoubleElement::new(ComplexMatrix::identity(2), ComplexMatrix::identity(2))
            .unwrap();
        let f = factorize(&d).unwrap();
        assert!((&f.g - &ComplexMatrix::identity(2)).norm() < 1e-14);
        assert!((&f.gplus - &ComplexMatrix::identity(2)).norm() < 1e-14);
        assert!((&f.gminus - &ComplexMatrix::identity(2)).norm() < 1e-14);

        // (I, A): the Gauss data of A shows up directly
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 2.0], &[1.0, 2.0]]);
        let d = DoubleElement::new(ComplexMatrix::identity(2), a.clone()).unwrap();
        let f = factorize(&d).unwrap();
        let l = to_cotangent(&f).unwrap().l;
        assert!((&l - &a).norm() < 1e-13, "L recovers g1^-1 g2");
        // h0^2 = diag(1, 2)
        let h0_sq = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let sq = f
            .gplus
            .matmul(&f.gminus.inverse().unwrap());
        let udl = gauss_decompose(&sq, GaussOrder::UpperDiagLower).unwrap();
        assert!((&udl.diagonal - &h0_sq).norm() < 1e-13);

        // pure diagonal-type element
        let mut rng = rng_for(3, 0);
        let g = crate::rng::random_invertible_near_identity(&mut rng, 2, 0.3);
        let d = DoubleElement::new(g.clone(), g.clone()).unwrap();
        let f = factorize(&d).unwrap();
        assert!((&f.g - &g).norm() < 1e-12);
        assert!((&f.gplus - &ComplexMatrix::identity(2)).norm() < 1e-12);
    }

    #[test]
    fn to_cotangent_examples() {
        let id = ComplexMatrix::identity(2);
        let f = DeltaStarFactors { g: id.clone(), gplus: id.clone(), gminus: id.clone() };
        assert!((&to_cotangent(&f).unwrap().l - &id).norm() < 1e-15);

        let d0 = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let f = DeltaStarFactors {
            g: id.clone(),
            gplus: d0.clone(),
            gminus: d0.inverse().unwrap(),
        };
        let expected = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(4.0, 0.0)]);
        assert!((&to_cotangent(&f).unwrap().l - &expected).norm() < 1e-14);
    }

    #[test]
    fn factorization_round_trip() {
        for trial in 0..40u64 {
            let n = 2 + (trial % 2) as usize;
            let f = random_factors_near_identity(trial, n, 0.15);
            let d = f.recompose().unwrap();
            let f2 = factorize(&d).unwrap();
            assert!((&f.g - &f2.g).norm() < 1e-10, "trial {trial}");
            assert!((&f.gplus - &f2.gplus).norm() < 1e-10, "trial {trial}");
            assert!((&f.gminus - &f2.gminus).norm() < 1e-10, "trial {trial}");
            let d2 = f2.recompose().unwrap();
            assert!((&d.g1 - &d2.g1).norm() + (&d.g2 - &d2.g2).norm() < 1e-10);
        }
    }

    #[test]
    fn branch_cut_detection() {
        let g1 = ComplexMatrix::identity(2);
        let g2 = ComplexMatrix::diagonal(&[c(-1.0, 0.0), c(1.0, 0.0)]);
        let d = DoubleElement::new(g1, g2).unwrap();
        assert!(matches!(factorize(&d), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn transferred_bracket_equals_pb2() {
        let words: Vec<Observable> = ["l", "g", "gl", "ll"]
            .iter()
            .map(|w| Observable::word(w).unwrap())
            .collect();
        for trial in 0..25u64 {
            let n = 2 + (trial % 2) as usize;
            let factors = random_factors_near_identity(5000 + trial, n, 0.15);
            let point = to_cotangent(&factors).unwrap();
            let mut obs = words.clone();
            obs.push(Observable::GEntry(0, n - 1));
            obs.push(Observable::LEntry(n - 1, 0));
            for f in &obs {
                for h in &obs {
                    let transferred = transferred_pb_plus(f, h, &factors).unwrap();
                    let direct = pb2(f, h, &point).unwrap();
                    assert!(
                        (transferred - direct).norm() < 1e-10 * (1.0 + direct.norm()),
                        "trial {trial} {} {}: {transferred} vs {direct}",
                        f.label(),
                        h.label()
                    );
                }
            }
        }
    }

    #[test]
    fn transferred_bracket_on_free_hamiltonians_vanishes() {
        let factors = random_factors_near_identity(77, 3, 0.15);
        for m1 in 1..=3usize {
            for m2 in 1..=3usize {
                let v = transferred_pb_plus(
                    &Observable::free_hamiltonian(m1),
                    &Observable::free_hamiltonian(m2),
                    &factors,
                )
                .unwrap();
                assert!(v.norm() < 1e-12, "H_{m1}, H_{m2}: {v}");
            }
        }
        // antisymmetry: equal arguments vanish
        let f = Observable::word("gl").unwrap();
        assert!(transferred_pb_plus(&f, &f, &factors).unwrap().norm() < 1e-13);
    }

    #[test]
    fn double_bracket_fd_transfer_equivalence() {
        // pullbacks along the transfer map: the plus bracket of the double
        // reproduces the second bracket at the mapped point
        for trial in 0..6u64 {
            let n = 2 + (trial % 2) as usize;
            let d = random_double_near_identity(6000 + trial, n, 0.1);
            let point = transfer_map(&d).unwrap();
            let pairs = [
                (Observable::GEntry(0, 0), Observable::GEntry(n - 1, n - 1)),
                (Observable::GEntry(0, n - 1), Observable::LEntry(n - 1, 0)),
                (Observable::LEntry(0, 0), Observable::LEntry(0, n - 1)),
                (Observable::word("gl").unwrap(), Observable::word("l").unwrap()),
            ];
            for (f, h) in &pairs {
                let ftil = |dd: &DoubleElement| f.evaluate(&transfer_map(dd)?);
                let htil = |dd: &DoubleElement| h.evaluate(&transfer_map(dd)?);
                let via_double = pb_double(true, &ftil, &htil, &d, 1e-5).unwrap();
                let direct = pb2(f, h, &point).unwrap();
                assert!(
                    (via_double - direct).norm() < 1e-5 * (1.0 + direct.norm()),
                    "trial {trial} {} {}: {via_double} vs {direct}",
                    f.label(),
                    h.label()
                );
            }
        }
    }

    #[test]
    fn double_bracket_degenerate_cases() {
        let d = random_double_near_identity(8, 2, 0.1);
        let f = |dd: &DoubleElement| Ok(dd.g1[(0, 1)] + dd.g2[(1, 0)]);
        for plus in [true, false] {
            let v = pb_double(plus, &f, &f, &d, 1e-5).unwrap();
            assert!(v.norm() < 1e-9, "antisymmetry survives FD noise: {v}");
            let konst = |_: &DoubleElement| Ok(c(3.0, -1.0));
            let v = pb_double(plus, &konst, &f, &d, 1e-5).unwrap();
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn lemma_residuals_small() {
        let factors = random_factors_near_identity(9001, 2, 0.15);
        for obs in [
            Observable::word("l").unwrap(),
            Observable::word("g").unwrap(),
            Observable::GEntry(0, 1),
            Observable::word("gl").unwrap(),
            Observable::LEntry(1, 0),
        ] {
            let res = lemma_a1_residuals(&obs, &factors, 1e-6).unwrap();
            for (k, r) in res.iter().enumerate() {
                assert!(*r < 1e-6, "{} identity {k}: residual {r}", obs.label());
            }
        }
    }
}
