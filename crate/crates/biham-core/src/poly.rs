//! Exact polynomial Poisson algebra over the 2n^2 coordinates g_ij, L_ij.
//!
//! Coefficients are Gaussian rationals (complex numbers with BigRational parts),
//! so a Jacobi or compatibility check that expands to the zero polynomial is a
//! certificate, not a small residual. The pencil x*pb1 + y*pb2 carries x and y
//! as two extra central variables; one zero polynomial then covers every linear
//! combination at once.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::linalg::C64;

/// Exact Gaussian rational.
pub type CRat = Complex<BigRational>;

pub fn crat_from_i64(re: i64, im: i64) -> CRat {
    Complex::new(
        BigRational::from_integer(BigInt::from(re)),
        BigRational::from_integer(BigInt::from(im)),
    )
}

pub fn crat_ratio(num: i64, den: i64) -> CRat {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

/// One generator of the coordinate ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gen {
    G(usize, usize),
    L(usize, usize),
}

impl Gen {
    pub fn index(self, n: usize) -> usize {
        match self {
            Gen::G(i, j) => i * n + j,
            Gen::L(i, j) => n * n + i * n + j,
        }
    }

    pub fn from_index(idx: usize, n: usize) -> Gen {
        if idx < n * n {
            Gen::G(idx / n, idx % n)
        } else {
            let r = idx - n * n;
            Gen::L(r / n, r % n)
        }
    }

    pub fn all(n: usize) -> Vec<Gen> {
        let mut v = Vec::with_capacity(2 * n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(Gen::G(i, j));
            }
        }
        for i in 0..n {
            for j in 0..n {
                v.push(Gen::L(i, j));
            }
        }
        v
    }

    pub fn name(self) -> String {
        match self {
            Gen::G(i, j) => format!("g[{},{}]", i + 1, j + 1),
            Gen::L(i, j) => format!("L[{},{}]", i + 1, j + 1),
        }
    }
}

fn var_name(idx: usize, n: usize) -> String {
    if idx < 2 * n * n {
        Gen::from_index(idx, n).name()
    } else if idx == 2 * n * n {
        "x".to_string()
    } else {
        "y".to_string()
    }
}

/// Sparse multivariate polynomial; monomials are exponent vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, CRat>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: CRat) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, crat_from_i64(1, 0))
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        assert!(idx < nvars);
        let mut mono = vec![0u16; nvars];
        mono[idx] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(mono, crat_from_i64(1, 0));
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert(&mut self, mono: Vec<u16>, c: CRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &CRat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k.clone() * c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mono: Vec<u16> = ma.iter().zip(mb.iter()).map(|(a, b)| a + b).collect();
                out.insert(mono, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to generator `idx`.
    pub fn partial(&self, idx: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m[idx];
            if e == 0 {
                continue;
            }
            let mut mono = m.clone();
            mono[idx] = e - 1;
            out.insert(mono, c.clone() * crat_from_i64(e as i64, 0));
        }
        out
    }

    /// Exact evaluation.
    pub fn eval(&self, point: &[CRat]) -> CRat {
        assert_eq!(point.len(), self.nvars);
        let mut acc = CRat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (idx, e) in m.iter().enumerate() {
                for _ in 0..*e {
                    term = term * point[idx].clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Double-precision evaluation.
    pub fn eval_f64(&self, point: &[C64]) -> C64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc = C64::default();
        for (m, c) in &self.terms {
            let mut term = C64::new(
                c.re.to_f64().expect("coefficient fits in f64"),
                c.im.to_f64().expect("coefficient fits in f64"),
            );
            for (idx, e) in m.iter().enumerate() {
                for _ in 0..*e {
                    term *= point[idx];
                }
            }
            acc += term;
        }
        acc
    }

    /// Deterministic textual form for certificates; "0" for the zero polynomial.
    pub fn render(&self, n: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mut factors = Vec::new();
            let coeff = format_crat(c);
            if !coeff.is_empty() {
                factors.push(coeff);
            }
            for (idx, e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(var_name(idx, n)),
                    _ => factors.push(format!("{}^{}", var_name(idx, n), e)),
                }
            }
            if factors.is_empty() {
                factors.push("1".to_string());
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

fn format_crat(c: &CRat) -> String {
    let one = BigRational::one();
    if c.im.is_zero() {
        if c.re == one {
            String::new()
        } else {
            format!("{}", c.re)
        }
    } else if c.re.is_zero() {
        format!("{}*i", c.im)
    } else {
        format!("({}+{}*i)", c.re, c.im)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // variable count alone does not recover n; render with a plausible n
        let n = ((self.nvars / 2) as f64).sqrt().round() as usize;
        write!(f, "{}", self.render(n.max(1)))
    }
}

/// Which structure table to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Pb1,
    Pb2,
}

/// Bracket selector for sweeps: the two tables plus the symbolic pencil.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepBracket {
    Pb1,
    Pb2,
    Pencil,
}

fn sgn(a: i64) -> i64 {
    a.signum()
}

fn delta(a: usize, b: usize) -> i64 {
    (a == b) as i64
}

/// Closed-form generator bracket as a polynomial in `nvars` variables
/// (nvars >= 2n^2; extra trailing variables are the pencil parameters).
fn gen_bracket_nvars(kind: TableKind, a: Gen, b: Gen, n: usize, nvars: usize) -> Poly {
    let g = |i: usize, j: usize| Poly::var(nvars, Gen::G(i, j).index(n));
    let l = |i: usize, j: usize| Poly::var(nvars, Gen::L(i, j).index(n));
    let half = crat_ratio(1, 2);
    match (kind, a, b) {
        (TableKind::Pb1, Gen::G(..), Gen::G(..)) => Poly::zero(nvars),
        (TableKind::Pb1, Gen::G(i, j), Gen::L(k, lq)) => {
            if i == lq {
                g(k, j)
            } else {
                Poly::zero(nvars)
            }
        }
        (TableKind::Pb1, Gen::L(..), Gen::G(..)) => {
            gen_bracket_nvars(kind, b, a, n, nvars).neg()
        }
        (TableKind::Pb1, Gen::L(i, j), Gen::L(k, lq)) => {
            let mut out = Poly::zero(nvars);
            if i == lq {
                out = out.add(&l(k, j));
            }
            if j == k {
                out = out.sub(&l(i, lq));
            }
            out
        }
        (TableKind::Pb2, Gen::G(i, j), Gen::G(k, lq)) => {
            let s = sgn(i as i64 - k as i64) - sgn(lq as i64 - j as i64);
            g(k, j).mul(&g(i, lq)).scale(&(half * crat_from_i64(s, 0)))
        }
        (TableKind::Pb2, Gen::G(i, j), Gen::L(k, lq)) => {
            let mut out = g(i, j)
                .mul(&l(k, lq))
                .scale(&(half.clone() * crat_from_i64(delta(i, k) + delta(i, lq), 0)));
            if i > k {
                out = out.add(&g(k, j).mul(&l(i, lq)));
            }
            if i == lq {
                for r in i + 1..n {
                    out = out.add(&l(k, r).mul(&g(r, j)));
                }
            }
            out
        }
        (TableKind::Pb2, Gen::L(..), Gen::G(..)) => {
            gen_bracket_nvars(kind, b, a, n, nvars).neg()
        }
        (TableKind::Pb2, Gen::L(i, j), Gen::L(k, lq)) => {
            let s1 = sgn(i as i64 - k as i64) + sgn(lq as i64 - j as i64);
            let mut out = l(i, lq).mul(&l(k, j)).scale(&(half.clone() * crat_from_i64(s1, 0)));
            let s2 = delta(i, lq) - delta(j, k);
            if s2 != 0 {
                out = out.add(&l(i, j).mul(&l(k, lq)).scale(&(half * crat_from_i64(s2, 0))));
            }
            if i == lq {
                for r in i + 1..n {
                    out = out.add(&l(k, r).mul(&l(r, j)));
                }
            }
            if j == k {
                for r in k + 1..n {
                    out = out.sub(&l(i, r).mul(&l(r, lq)));
                }
            }
            out
        }
    }
}

/// Structure bracket of two generators, in the plain 2n^2-variable ring.
pub fn gen_bracket(kind: TableKind, a: Gen, b: Gen, n: usize) -> Poly {
    gen_bracket_nvars(kind, a, b, n, 2 * n * n)
}

/// Number of ring variables for a sweep bracket.
fn ring_size(bracket: SweepBracket, n: usize) -> usize {
    match bracket {
        SweepBracket::Pencil => 2 * n * n + 2,
        _ => 2 * n * n,
    }
}

/// The full table of generator brackets for one bracket kind, cached for the
/// certificate sweeps. Antisymmetric as polynomials by construction of the
/// closed forms; the tests assert it.
pub struct StructureTable {
    bracket: SweepBracket,
    n: usize,
    nvars: usize,
    entries: Vec<Poly>,
}

impl StructureTable {
    pub fn new(bracket: SweepBracket, n: usize) -> Self {
        let nvars = ring_size(bracket, n);
        let gens = Gen::all(n);
        let m = gens.len();
        let mut entries = Vec::with_capacity(m * m);
        for a in &gens {
            for b in &gens {
                entries.push(match bracket {
                    SweepBracket::Pb1 => gen_bracket_nvars(TableKind::Pb1, *a, *b, n, nvars),
                    SweepBracket::Pb2 => gen_bracket_nvars(TableKind::Pb2, *a, *b, n, nvars),
                    SweepBracket::Pencil => {
                        let x = Poly::var(nvars, 2 * n * n);
                        let y = Poly::var(nvars, 2 * n * n + 1);
                        x.mul(&gen_bracket_nvars(TableKind::Pb1, *a, *b, n, nvars))
                            .add(&y.mul(&gen_bracket_nvars(TableKind::Pb2, *a, *b, n, nvars)))
                    }
                });
            }
        }
        StructureTable { bracket, n, nvars, entries }
    }

    pub fn bracket_kind(&self) -> SweepBracket {
        self.bracket
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, a: Gen, b: Gen) -> &Poly {
        let m = 2 * self.n * self.n;
        &self.entries[a.index(self.n) * m + b.index(self.n)]
    }

    /// Bilinear Leibniz extension to whole polynomials:
    /// {P, Q} = sum_{a,b} dP/da dQ/db {a, b}. The pencil variables are
    /// central, so only the coordinate generators enter the double sum.
    pub fn poly_bracket(&self, p: &Poly, q: &Poly) -> Poly {
        assert_eq!(p.nvars(), self.nvars);
        assert_eq!(q.nvars(), self.nvars);
        let gens = Gen::all(self.n);
        let mut out = Poly::zero(self.nvars);
        let dp: Vec<Poly> = gens.iter().map(|a| p.partial(a.index(self.n))).collect();
        let dq: Vec<Poly> = gens.iter().map(|b| q.partial(b.index(self.n))).collect();
        for (ia, a) in gens.iter().enumerate() {
            if dp[ia].is_zero() {
                continue;
            }
            for (ib, b) in gens.iter().enumerate() {
                if dq[ib].is_zero() {
                    continue;
                }
                let t = self.entry(*a, *b);
                if t.is_zero() {
                    continue;
                }
                out = out.add(&dp[ia].mul(&dq[ib]).mul(t));
            }
        }
        out
    }

    /// {a,{b,c}} + {b,{c,a}} + {c,{a,b}} as an exact polynomial; zero
    /// certifies the Jacobi identity on the triple.
    pub fn jacobi_residual(&self, a: Gen, b: Gen, c: Gen) -> Poly {
        let pa = Poly::var(self.nvars, a.index(self.n));
        let pb = Poly::var(self.nvars, b.index(self.n));
        let pc = Poly::var(self.nvars, c.index(self.n));
        let mut acc = self.poly_bracket(&pa, &self.poly_bracket(&pb, &pc));
        acc = acc.add(&self.poly_bracket(&pb, &self.poly_bracket(&pc, &pa)));
        acc.add(&self.poly_bracket(&pc, &self.poly_bracket(&pa, &pb)))
    }
}

/// Bilinear Leibniz extension with a freshly built table; sweeps should build
/// one `StructureTable` and reuse it.
pub fn poly_bracket(bracket: SweepBracket, p: &Poly, q: &Poly, n: usize) -> Poly {
    StructureTable::new(bracket, n).poly_bracket(p, q)
}

/// Single-triple Jacobi residual with a freshly built table.
pub fn jacobi_residual(bracket: SweepBracket, a: Gen, b: Gen, c: Gen, n: usize) -> Poly {
    StructureTable::new(bracket, n).jacobi_residual(a, b, c)
}

/// The derivation with W[g_ij] = 0 and W[L_kl] = delta_kl, i.e. sum_k d/dL_kk.
pub fn w_derivation(p: &Poly, n: usize) -> Poly {
    let mut out = Poly::zero(p.nvars());
    for k in 0..n {
        out = out.add(&p.partial(Gen::L(k, k).index(n)));
    }
    out
}

/// W[{a,b}_2] - {W[a],b}_2 - {a,W[b]}_2 - {a,b}_1; zero on all generator pairs
/// certifies that the first bracket is the W-Lie-derivative of the second.
pub fn w_identity_residual(a: Gen, b: Gen, n: usize) -> Poly {
    w_identity_residual_with(&StructureTable::new(SweepBracket::Pb2, n), a, b)
}

fn w_identity_residual_with(table2: &StructureTable, a: Gen, b: Gen) -> Poly {
    let n = table2.size();
    let nvars = 2 * n * n;
    let pa = Poly::var(nvars, a.index(n));
    let pb = Poly::var(nvars, b.index(n));
    let wa = w_derivation(&pa, n);
    let wb = w_derivation(&pb, n);
    w_derivation(table2.entry(a, b), n)
        .sub(&table2.poly_bracket(&wa, &pb))
        .sub(&table2.poly_bracket(&pa, &wb))
        .sub(&gen_bracket(TableKind::Pb1, a, b, n))
}

/// All unordered generator triples (with repetition) at size n.
pub fn all_triples(n: usize) -> Vec<(Gen, Gen, Gen)> {
    let gens = Gen::all(n);
    let mut out = Vec::new();
    for i in 0..gens.len() {
        for j in i..gens.len() {
            for k in j..gens.len() {
                out.push((gens[i], gens[j], gens[k]));
            }
        }
    }
    out
}

/// Outcome of a certificate sweep: every triple and its residual.
pub struct SweepOutcome {
    pub triples: usize,
    /// (triple label, rendered residual) for nonzero residuals only
    pub violations: Vec<(String, String)>,
}

pub fn jacobi_sweep(bracket: SweepBracket, n: usize) -> SweepOutcome {
    let table = StructureTable::new(bracket, n);
    let triples = all_triples(n);
    let mut violations = Vec::new();
    for (a, b, c) in &triples {
        let r = table.jacobi_residual(*a, *b, *c);
        if !r.is_zero() {
            violations.push((
                format!("({}, {}, {})", a.name(), b.name(), c.name()),
                r.render(n),
            ));
        }
    }
    SweepOutcome { triples: triples.len(), violations }
}

pub fn w_identity_sweep(n: usize) -> SweepOutcome {
    let table2 = StructureTable::new(SweepBracket::Pb2, n);
    let gens = Gen::all(n);
    let mut count = 0;
    let mut violations = Vec::new();
    for a in &gens {
        for b in &gens {
            count += 1;
            let r = w_identity_residual_with(&table2, *a, *b);
            if !r.is_zero() {
                violations.push((format!("({}, {})", a.name(), b.name()), r.render(n)));
            }
        }
    }
    SweepOutcome { triples: count, violations }
}
