//! Functions on the phase space G x gl(n,C) with analytic derivative bundles.
//!
//! The built-in family is closed under everything the brackets need: matrix
//! entries of g and L, trace words over {g, g^-1, L}, complex-linear
//! combinations and products. Words carry their own slot-rule differentiation;
//! a central-difference oracle cross-checks every analytic gradient.
//!
//! Conventions fixed here and used everywhere else:
//!   - the L coordinate L_kl is the pairing of e_lk with L, i.e. the (k,l) entry;
//!   - left gradient: <nabla1 F, X> = d/dz F(e^{zX} g, L) at z = 0;
//!   - right gradient: <nabla1' F, X> = d/dz F(g e^{zX}, L);
//!   - d2 pairs the same way against the L slot, and
//!     nabla2 = L d2, nabla2' = d2 L.

use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix, DET_TOL};
use crate::rng::{random_invertible_near_identity, rng_for};

/// A point (g, L) with g invertible.
#[derive(Clone, Debug)]
pub struct PhasePoint {
    pub g: ComplexMatrix,
    pub l: ComplexMatrix,
}

impl PhasePoint {
    pub fn new(g: ComplexMatrix, l: ComplexMatrix) -> Result<Self> {
        if g.size() != l.size() {
            return Err(Error::SizeMismatch(g.size(), l.size()));
        }
        if !g.is_finite() || !l.is_finite() {
            return Err(Error::NonFinite);
        }
        if g.det().norm() <= DET_TOL {
            return Err(Error::NotInvertible);
        }
        Ok(PhasePoint { g, l })
    }

    pub fn size(&self) -> usize {
        self.g.size()
    }

    pub fn norm(&self) -> f64 {
        (self.g.norm().powi(2) + self.l.norm().powi(2)).sqrt()
    }

    /// (eta g eta^-1, eta L eta^-1).
    pub fn conjugate_by(&self, eta: &ComplexMatrix) -> Result<PhasePoint> {
        PhasePoint::new(self.g.conjugate_by(eta)?, self.l.conjugate_by(eta)?)
    }
}

/// One letter of a trace word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    /// the group element g
    G,
    /// g^{-1}
    GInv,
    /// the Lie-algebra element L
    L,
}

impl Letter {
    fn to_char(self) -> char {
        match self {
            Letter::G => 'g',
            Letter::GInv => 'G',
            Letter::L => 'l',
        }
    }
}

/// coeff * tr(product of letters). Conjugation-invariant by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceWord {
    pub coeff: C64,
    pub letters: Vec<Letter>,
}

impl TraceWord {
    pub fn new(coeff: C64, letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::invalid("trace word must be nonempty"));
        }
        Ok(TraceWord { coeff, letters })
    }

    /// Parse a word over {g, G, l}; e.g. "glGl" is tr(g L g^-1 L).
    pub fn parse(s: &str) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for ch in s.chars() {
            letters.push(match ch {
                'g' => Letter::G,
                'G' => Letter::GInv,
                'l' => Letter::L,
                other => return Err(Error::invalid(format!("invalid word letter {other:?}"))),
            });
        }
        TraceWord::new(C64::new(1.0, 0.0), letters)
    }

    pub fn word_string(&self) -> String {
        self.letters.iter().map(|l| l.to_char()).collect()
    }

    fn needs_inverse(&self) -> bool {
        self.letters.contains(&Letter::GInv)
    }
}

/// The closed observable family.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Const(C64),
    /// matrix entry g_ij (0-based indices)
    GEntry(usize, usize),
    /// matrix entry L_kl = <e_lk, L>
    LEntry(usize, usize),
    Word(TraceWord),
    Sum(Vec<Observable>),
    Product(Box<Observable>, Box<Observable>),
}

/// Values of the analytic gradients at one point.
#[derive(Clone, Debug)]
pub struct DerivativeBundle {
    pub nabla1: ComplexMatrix,
    pub nabla1p: ComplexMatrix,
    pub d2: ComplexMatrix,
    pub nabla2: ComplexMatrix,
    pub nabla2p: ComplexMatrix,
}

impl DerivativeBundle {
    pub fn zero(n: usize) -> Self {
        let z = ComplexMatrix::zeros(n);
        DerivativeBundle {
            nabla1: z.clone(),
            nabla1p: z.clone(),
            d2: z.clone(),
            nabla2: z.clone(),
            nabla2p: z,
        }
    }

    /// Assemble from the raw gradients; nabla2 = L d2 and nabla2' = d2 L.
    pub fn from_parts(
        nabla1: ComplexMatrix,
        nabla1p: ComplexMatrix,
        d2: ComplexMatrix,
        l: &ComplexMatrix,
    ) -> Self {
        let nabla2 = l.matmul(&d2);
        let nabla2p = d2.matmul(l);
        DerivativeBundle { nabla1, nabla1p, d2, nabla2, nabla2p }
    }

    fn axpy(&mut self, c: C64, other: &DerivativeBundle) {
        self.nabla1 = &self.nabla1 + &other.nabla1.scale(c);
        self.nabla1p = &self.nabla1p + &other.nabla1p.scale(c);
        self.d2 = &self.d2 + &other.d2.scale(c);
        self.nabla2 = &self.nabla2 + &other.nabla2.scale(c);
        self.nabla2p = &self.nabla2p + &other.nabla2p.scale(c);
    }
}

impl Observable {
    pub fn constant(z: C64) -> Self {
        Observable::Const(z)
    }

    pub fn word(s: &str) -> Result<Self> {
        Ok(Observable::Word(TraceWord::parse(s)?))
    }

    pub fn scaled_word(coeff: C64, s: &str) -> Result<Self> {
        let mut w = TraceWord::parse(s)?;
        w.coeff = coeff;
        Ok(Observable::Word(w))
    }

    /// tr(L^m)/m, the m-th free Hamiltonian.
    pub fn free_hamiltonian(m: usize) -> Self {
        assert!(m >= 1);
        Observable::Word(TraceWord {
            coeff: C64::new(1.0 / m as f64, 0.0),
            letters: vec![Letter::L; m],
        })
    }

    pub fn product(a: Observable, b: Observable) -> Self {
        Observable::Product(Box::new(a), Box::new(b))
    }

    /// Invariant under simultaneous conjugation, by construction.
    pub fn is_invariant(&self) -> bool {
        match self {
            Observable::Const(_) => true,
            Observable::GEntry(..) | Observable::LEntry(..) => false,
            Observable::Word(_) => true,
            Observable::Sum(items) => items.iter().all(|o| o.is_invariant()),
            Observable::Product(a, b) => a.is_invariant() && b.is_invariant(),
        }
    }

    /// Human-readable label used in reports (1-based indices).
    pub fn label(&self) -> String {
        match self {
            Observable::Const(z) => format!("const({:.3},{:.3})", z.re, z.im),
            Observable::GEntry(i, j) => format!("g[{},{}]", i + 1, j + 1),
            Observable::LEntry(k, l) => format!("L[{},{}]", k + 1, l + 1),
            Observable::Word(w) => {
                if (w.coeff - C64::new(1.0, 0.0)).norm() < 1e-15 {
                    w.word_string()
                } else {
                    format!("({:.3})*{}", w.coeff.re, w.word_string())
                }
            }
            Observable::Sum(items) => {
                let parts: Vec<String> = items.iter().map(|o| o.label()).collect();
                parts.join("+")
            }
            Observable::Product(a, b) => format!("({})*({})", a.label(), b.label()),
        }
    }

    pub fn evaluate(&self, p: &PhasePoint) -> Result<C64> {
        match self {
            Observable::Const(z) => Ok(*z),
            Observable::GEntry(i, j) => self.check_index(p, *i, *j).map(|_| p.g[(*i, *j)]),
            Observable::LEntry(k, l) => self.check_index(p, *k, *l).map(|_| p.l[(*k, *l)]),
            Observable::Word(w) => {
                let g_inv = if w.needs_inverse() { Some(p.g.inverse()?) } else { None };
                let n = p.size();
                let mut prod = ComplexMatrix::identity(n);
                for letter in &w.letters {
                    prod = prod.matmul(match letter {
                        Letter::G => &p.g,
                        Letter::GInv => g_inv.as_ref().unwrap(),
                        Letter::L => &p.l,
                    });
                }
                Ok(w.coeff * prod.trace())
            }
            Observable::Sum(items) => {
                let mut s = C64::default();
                for o in items {
                    s += o.evaluate(p)?;
                }
                Ok(s)
            }
            Observable::Product(a, b) => Ok(a.evaluate(p)? * b.evaluate(p)?),
        }
    }

    fn check_index(&self, p: &PhasePoint, i: usize, j: usize) -> Result<()> {
        if i >= p.size() || j >= p.size() {
            return Err(Error::invalid(format!(
                "entry index ({},{}) out of range for n={}",
                i + 1,
                j + 1,
                p.size()
            )));
        }
        Ok(())
    }

    /// Exact analytic gradients at p.
    pub fn analytic_derivatives(&self, p: &PhasePoint) -> Result<DerivativeBundle> {
        let n = p.size();
        match self {
            Observable::Const(_) => Ok(DerivativeBundle::zero(n)),
            Observable::GEntry(i, j) => {
                self.check_index(p, *i, *j)?;
                let e_ji = ComplexMatrix::elementary(n, *j, *i);
                Ok(DerivativeBundle::from_parts(
                    p.g.matmul(&e_ji),
                    e_ji.matmul(&p.g),
                    ComplexMatrix::zeros(n),
                    &p.l,
                ))
            }
            Observable::LEntry(k, l) => {
                self.check_index(p, *k, *l)?;
                let e_lk = ComplexMatrix::elementary(n, *l, *k);
                Ok(DerivativeBundle::from_parts(
                    ComplexMatrix::zeros(n),
                    ComplexMatrix::zeros(n),
                    e_lk,
                    &p.l,
                ))
            }
            Observable::Word(w) => word_derivatives(w, p),
            Observable::Sum(items) => {
                let mut acc = DerivativeBundle::zero(n);
                for o in items {
                    acc.axpy(C64::new(1.0, 0.0), &o.analytic_derivatives(p)?);
                }
                Ok(acc)
            }
            Observable::Product(a, b) => {
                let va = a.evaluate(p)?;
                let vb = b.evaluate(p)?;
                let ba = a.analytic_derivatives(p)?;
                let bb = b.analytic_derivatives(p)?;
                let mut acc = DerivativeBundle::zero(n);
                acc.axpy(vb, &ba);
                acc.axpy(va, &bb);
                Ok(acc)
            }
        }
    }

    /// Derivative along the vector field whose flow is (g, L) -> (g, L + z).
    /// Closed within the family: g-entries die, L_kl becomes delta_kl, a word
    /// loses one L slot at a time (an emptied word is tr(identity) = n).
    pub fn w_derivative(&self) -> Observable {
        match self {
            Observable::Const(_) => Observable::Const(C64::default()),
            Observable::GEntry(..) => Observable::Const(C64::default()),
            Observable::LEntry(k, l) => {
                Observable::Const(if k == l { C64::new(1.0, 0.0) } else { C64::default() })
            }
            Observable::Word(w) => {
                let mut parts = Vec::new();
                for (s, letter) in w.letters.iter().enumerate() {
                    if *letter == Letter::L {
                        let mut reduced = w.letters.clone();
                        reduced.remove(s);
                        parts.push(Observable::Word(TraceWord { coeff: w.coeff, letters: reduced }));
                    }
                }
                if parts.is_empty() {
                    Observable::Const(C64::default())
                } else {
                    Observable::Sum(parts)
                }
            }
            Observable::Sum(items) => {
                Observable::Sum(items.iter().map(|o| o.w_derivative()).collect())
            }
            Observable::Product(a, b) => Observable::Sum(vec![
                Observable::product(a.w_derivative(), (**b).clone()),
                Observable::product((**a).clone(), b.w_derivative()),
            ]),
        }
    }
}

/// Slot-rule differentiation of coeff * tr(M_1 ... M_m).
fn word_derivatives(w: &TraceWord, p: &PhasePoint) -> Result<DerivativeBundle> {
    let n = p.size();
    // an internally emptied word denotes tr(identity); it has zero gradients
    if w.letters.is_empty() {
        return Ok(DerivativeBundle::zero(n));
    }
    let g_inv = if w.needs_inverse() { Some(p.g.inverse()?) } else { None };
    let mats: Vec<&ComplexMatrix> = w
        .letters
        .iter()
        .map(|letter| match letter {
            Letter::G => &p.g,
            Letter::GInv => g_inv.as_ref().unwrap(),
            Letter::L => &p.l,
        })
        .collect();
    let m = mats.len();
    // prefix[s] = M_1 ... M_s, suffix[s] = M_{s+1} ... M_m (identity at the ends)
    let mut prefix = vec![ComplexMatrix::identity(n)];
    for mat in &mats {
        let last = prefix.last().unwrap().matmul(mat);
        prefix.push(last);
    }
    let mut suffix = vec![ComplexMatrix::identity(n); m + 1];
    for s in (0..m).rev() {
        suffix[s] = mats[s].matmul(&suffix[s + 1]);
    }

    let mut nabla1 = ComplexMatrix::zeros(n);
    let mut nabla1p = ComplexMatrix::zeros(n);
    let mut d2 = ComplexMatrix::zeros(n);
    for s in 0..m {
        // rotation = B_s A_s where A_s precedes and B_s follows slot s
        let rotation = suffix[s + 1].matmul(&prefix[s]);
        match w.letters[s] {
            Letter::L => d2 = &d2 + &rotation,
            Letter::G => {
                nabla1 = &nabla1 + &p.g.matmul(&rotation);
                nabla1p = &nabla1p + &rotation.matmul(&p.g);
            }
            Letter::GInv => {
                let gi = g_inv.as_ref().unwrap();
                nabla1 = &nabla1 - &rotation.matmul(gi);
                nabla1p = &nabla1p - &gi.matmul(&rotation);
            }
        }
    }
    let c = w.coeff;
    Ok(DerivativeBundle::from_parts(nabla1.scale(c), nabla1p.scale(c), d2.scale(c), &p.l))
}

/// exp(h e_ij) in closed form: elementary directions are nilpotent or diagonal.
pub(crate) fn exp_elementary(n: usize, i: usize, j: usize, h: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(n);
    if i == j {
        m[(i, i)] = C64::new(h.exp(), 0.0);
    } else {
        m[(i, j)] = C64::new(h, 0.0);
    }
    m
}

/// Central differences along all n^2 elementary directions. O(h^2) accurate for
/// the holomorphic family; the base step is scaled by (1 + ||p||).
pub fn fd_derivatives_fn(
    f: &dyn Fn(&PhasePoint) -> Result<C64>,
    p: &PhasePoint,
    h: f64,
) -> Result<DerivativeBundle> {
    if !(h > 0.0 && h <= 1e-2) {
        return Err(Error::invalid("fd step must lie in (0, 1e-2]"));
    }
    let n = p.size();
    let h = h * (1.0 + p.norm());
    let mut nabla1 = ComplexMatrix::zeros(n);
    let mut nabla1p = ComplexMatrix::zeros(n);
    let mut d2 = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let eplus = exp_elementary(n, i, j, h);
            let eminus = exp_elementary(n, i, j, -h);
            let two_h = C64::new(2.0 * h, 0.0);
            // <nabla1, e_ij> sits at entry (j, i)
            let left_p = PhasePoint { g: eplus.matmul(&p.g), l: p.l.clone() };
            let left_m = PhasePoint { g: eminus.matmul(&p.g), l: p.l.clone() };
            nabla1[(j, i)] = (f(&left_p)? - f(&left_m)?) / two_h;
            let right_p = PhasePoint { g: p.g.matmul(&eplus), l: p.l.clone() };
            let right_m = PhasePoint { g: p.g.matmul(&eminus), l: p.l.clone() };
            nabla1p[(j, i)] = (f(&right_p)? - f(&right_m)?) / two_h;
            let e_dir = ComplexMatrix::elementary(n, i, j).scale(C64::new(h, 0.0));
            let l_p = PhasePoint { g: p.g.clone(), l: &p.l + &e_dir };
            let l_m = PhasePoint { g: p.g.clone(), l: &p.l - &e_dir };
            d2[(j, i)] = (f(&l_p)? - f(&l_m)?) / two_h;
        }
    }
    Ok(DerivativeBundle::from_parts(nabla1, nabla1p, d2, &p.l))
}

pub fn fd_derivatives(obs: &Observable, p: &PhasePoint, h: f64) -> Result<DerivativeBundle> {
    fd_derivatives_fn(&|q| obs.evaluate(q), p, h)
}

/// Max |F(eta g eta^-1, eta L eta^-1) - F(g, L)| over random eta near identity.
pub fn check_invariance(obs: &Observable, p: &PhasePoint, trials: usize, seed: u64) -> Result<f64> {
    let base = obs.evaluate(p)?;
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut rng = rng_for(seed, t as u64);
        let eta = random_invertible_near_identity(&mut rng, p.size(), 0.3);
        let conj = p.conjugate_by(&eta)?;
        worst = worst.max((obs.evaluate(&conj)? - base).norm());
    }
    Ok(worst)
}

/// Residual of nabla1' = nabla1 + nabla2 - nabla2', which holds for invariant
/// functions; uses analytic gradients.
pub fn invariant_identity_check(obs: &Observable, p: &PhasePoint) -> Result<f64> {
    let b = obs.analytic_derivatives(p)?;
    let rhs = &(&b.nabla1 + &b.nabla2) - &b.nabla2p;
    Ok((&b.nabla1p - &rhs).norm())
}

/// The built-in family swept by the identity suites: all coordinates plus a
/// fixed set of invariant trace words.
pub fn builtin_family(n: usize) -> Vec<Observable> {
    let mut fam = Vec::new();
    for i in 0..n {
        for j in 0..n {
            fam.push(Observable::GEntry(i, j));
            fam.push(Observable::LEntry(i, j));
        }
    }
    for w in invariant_words() {
        fam.push(w);
    }
    fam
}

/// Invariant trace words of modest length, used wherever invariance is a
/// precondition.
pub fn invariant_words() -> Vec<Observable> {
    ["l", "ll", "lll", "g", "gg", "gl", "gll", "ggl", "Gl", "glGl"]
        .iter()
        .map(|s| Observable::word(s).unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_matrix, random_regular_group_element, rng_for};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_point(seed: u64, n: usize) -> PhasePoint {
        let mut rng = rng_for(seed, 0);
        let g = random_regular_group_element(&mut rng, n);
        let l = random_matrix(&mut rng, n, 1.0);
        PhasePoint::new(g, l).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let l = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let p = PhasePoint::new(ComplexMatrix::identity(2), l).unwrap();
        assert_eq!(Observable::word("l").unwrap().evaluate(&p).unwrap(), c(3.0, 0.0));
        assert_eq!(Observable::word("gl").unwrap().evaluate(&p).unwrap(), c(3.0, 0.0));

        let g = ComplexMatrix::from_real_rows(&[&[1.0, 5.0], &[0.0, 1.0]]);
        let p = PhasePoint::new(g, ComplexMatrix::zeros(2)).unwrap();
        assert_eq!(Observable::GEntry(0, 1).evaluate(&p).unwrap(), c(5.0, 0.0));
    }

    #[test]
    fn word_parse_roundtrip_and_errors() {
        let w = TraceWord::parse("glGl").unwrap();
        assert_eq!(w.word_string(), "glGl");
        assert_eq!(w.letters.len(), 4);
        assert!(TraceWord::parse("").is_err());
        assert!(TraceWord::parse("gxl").is_err());
    }

    #[test]
    fn analytic_derivative_examples() {
        let p = sample_point(21, 3);
        // tr(L^2)/2 has d2 = L
        let f = Observable::scaled_word(c(0.5, 0.0), "ll").unwrap();
        let b = f.analytic_derivatives(&p).unwrap();
        assert!((&b.d2 - &p.l).norm() < 1e-13);
        assert!(b.nabla1.norm() < 1e-15);

        // g_12 has nabla1 = g e_21
        let f = Observable::GEntry(0, 1);
        let b = f.analytic_derivatives(&p).unwrap();
        let expected = p.g.matmul(&ComplexMatrix::elementary(3, 1, 0));
        assert!((&b.nabla1 - &expected).norm() < 1e-15);

        // tr(g): nabla1 = g, d2 = 0
        let f = Observable::word("g").unwrap();
        let b = f.analytic_derivatives(&p).unwrap();
        assert!((&b.nabla1 - &p.g).norm() < 1e-14);
        assert!(b.d2.norm() < 1e-15);
    }

    #[test]
    fn fd_matches_analytic() {
        let p = sample_point(5, 3);
        for obs in builtin_family(3) {
            let analytic = obs.analytic_derivatives(&p).unwrap();
            let fd = fd_derivatives(&obs, &p, 1e-5).unwrap();
            let scale = 1.0 + analytic.nabla1.norm() + analytic.d2.norm();
            assert!(
                (&analytic.nabla1 - &fd.nabla1).norm() / scale < 1e-8,
                "nabla1 mismatch for {}",
                obs.label()
            );
            assert!((&analytic.nabla1p - &fd.nabla1p).norm() / scale < 1e-8, "{}", obs.label());
            assert!((&analytic.d2 - &fd.d2).norm() / scale < 1e-8, "{}", obs.label());
        }
    }

    #[test]
    fn fd_examples() {
        let p = sample_point(6, 2);
        // tr(L) has d2 = identity, exactly linear
        let b = fd_derivatives(&Observable::word("l").unwrap(), &p, 1e-5).unwrap();
        assert!((&b.d2 - &ComplexMatrix::identity(2)).norm() < 1e-9);
        // constants have zero bundles
        let b = fd_derivatives(&Observable::constant(c(2.5, -1.0)), &p, 1e-5).unwrap();
        assert!(b.nabla1.norm() + b.nabla1p.norm() + b.d2.norm() < 1e-12);
        // step validation
        assert!(fd_derivatives(&Observable::word("l").unwrap(), &p, 0.5).is_err());
    }

    #[test]
    fn nabla1p_relation() {
        // nabla1' = g^-1 nabla1 g for analytic bundles
        let p = sample_point(8, 3);
        for obs in builtin_family(3) {
            let b = obs.analytic_derivatives(&p).unwrap();
            let gi = p.g.inverse().unwrap();
            let rhs = gi.matmul(&b.nabla1).matmul(&p.g);
            assert!(
                (&b.nabla1p - &rhs).norm() < 1e-12 * (1.0 + b.nabla1.norm()),
                "{}",
                obs.label()
            );
        }
    }

    #[test]
    fn invariance_examples() {
        let p = sample_point(3, 2);
        let dev = check_invariance(&Observable::word("gll").unwrap(), &p, 20, 7).unwrap();
        assert!(dev < 1e-10, "dev={dev}");
        let dev = check_invariance(&Observable::word("l").unwrap(), &p, 20, 7).unwrap();
        assert!(dev < 1e-12);
        let dev = check_invariance(&Observable::GEntry(0, 1), &p, 20, 7).unwrap();
        assert!(dev > 1e-6, "coordinates are not invariant");
    }

    #[test]
    fn invariant_identity_examples() {
        let p = sample_point(4, 3);
        for w in ["lll", "gl", "glGl"] {
            let res = invariant_identity_check(&Observable::word(w).unwrap(), &p).unwrap();
            assert!(res < 1e-10, "word {w}: residual {res}");
        }
        // L-only words satisfy it exactly
        let res = invariant_identity_check(&Observable::word("ll").unwrap(), &p).unwrap();
        assert!(res < 1e-15);
    }

    #[test]
    fn equivariance_of_gradients() {
        let p = sample_point(14, 3);
        let mut rng = rng_for(15, 0);
        let eta = random_invertible_near_identity(&mut rng, 3, 0.3);
        let pc = p.conjugate_by(&eta).unwrap();
        for obs in invariant_words() {
            let b = obs.analytic_derivatives(&p).unwrap();
            let bc = obs.analytic_derivatives(&pc).unwrap();
            for (at_conj, at_base) in [
                (&bc.nabla1, &b.nabla1),
                (&bc.nabla1p, &b.nabla1p),
                (&bc.d2, &b.d2),
                (&bc.nabla2, &b.nabla2),
                (&bc.nabla2p, &b.nabla2p),
            ] {
                let expected = at_base.conjugate_by(&eta).unwrap();
                assert!(
                    (at_conj - &expected).norm() < 1e-9 * (1.0 + expected.norm()),
                    "{}",
                    obs.label()
                );
            }
        }
    }

    #[test]
    fn w_derivative_closure() {
        let p = sample_point(31, 2);
        let h = 1e-6;
        for obs in builtin_family(2) {
            let w = obs.w_derivative();
            // FD along L -> L + z
            let shift = ComplexMatrix::identity(2).scale(c(h, 0.0));
            let plus = PhasePoint { g: p.g.clone(), l: &p.l + &shift };
            let minus = PhasePoint { g: p.g.clone(), l: &p.l - &shift };
            let fd =
                (obs.evaluate(&plus).unwrap() - obs.evaluate(&minus).unwrap()) / c(2.0 * h, 0.0);
            let analytic = w.evaluate(&p).unwrap();
            assert!((fd - analytic).norm() < 1e-8, "{}", obs.label());
        }
    }

    #[test]
    fn product_rule() {
        let p = sample_point(41, 2);
        let f = Observable::word("gl").unwrap();
        let h = Observable::word("ll").unwrap();
        let fh = Observable::product(f.clone(), h.clone());
        let b = fh.analytic_derivatives(&p).unwrap();
        let fd = fd_derivatives(&fh, &p, 1e-5).unwrap();
        assert!((&b.nabla1 - &fd.nabla1).norm() < 1e-7 * (1.0 + b.nabla1.norm()));
        assert!((&b.d2 - &fd.d2).norm() < 1e-7 * (1.0 + b.d2.norm()));
    }

    #[test]
    fn phase_point_validation() {
        let singular = ComplexMatrix::zeros(2);
        assert!(matches!(
            PhasePoint::new(singular, ComplexMatrix::zeros(2)),
            Err(Error::NotInvertible)
        ));
    }
}
