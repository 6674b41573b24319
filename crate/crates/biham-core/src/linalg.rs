//! Dense complex matrix arithmetic for small n: triangular splitting, the trace
//! form, matrix exponential, Gauss (triangular) factorization and regular-element
//! diagonalization. Everything is row-major `Vec<Complex64>` storage; nothing here
//! is tuned beyond n <= 12.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative pivot tolerance for the Gauss factorization.
pub const PIVOT_TOL: f64 = 1e-12;
/// Determinant threshold below which a group element counts as singular.
pub const DET_TOL: f64 = 1e-12;
/// Default absolute eigenvalue-gap tolerance for regularity.
pub const DEFAULT_TOL_REG: f64 = 1e-8;

/// Dense n x n complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  [")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "matrices are at least 2x2");
        ComplexMatrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Elementary matrix e_ij (1 at row i, column j).
    pub fn elementary(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Rows given as `[[re, im], ...]` literals; handy in tests.
    pub fn from_rows(rows: &[&[(f64, f64)]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| C64::new(rows[i][j].0, rows[i][j].1))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, z: C64) -> Self {
        ComplexMatrix { n: self.n, data: self.data.iter().map(|w| w * z).collect() }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance to the adjoint; zero for Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).norm()
    }

    pub fn diag_entries(&self) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    pub fn strict_upper(&self) -> Self {
        Self::from_fn(self.n, |i, j| if j > i { self[(i, j)] } else { C64::default() })
    }

    pub fn strict_lower(&self) -> Self {
        Self::from_fn(self.n, |i, j| if j < i { self[(i, j)] } else { C64::default() })
    }

    pub fn diagonal_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| if i == j { self[(i, j)] } else { C64::default() })
    }

    /// Off-diagonal part X_perp = X_< + X_>.
    pub fn offdiagonal_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| if i != j { self[(i, j)] } else { C64::default() })
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::default() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.n);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        Ok(())
    }

    /// LU with partial pivoting; returns (lu, perm, sign swaps) or NotInvertible.
    fn lu(&self) -> Result<(Vec<C64>, Vec<usize>, usize)> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0usize;
        for k in 0..n {
            let mut pivot = k;
            let mut best = a[k * n + k].norm();
            for r in k + 1..n {
                let v = a[r * n + k].norm();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return Err(Error::NotInvertible);
            }
            if pivot != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot * n + c);
                }
                perm.swap(k, pivot);
                swaps += 1;
            }
            let pk = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / pk;
                a[r * n + k] = f;
                for c in k + 1..n {
                    let t = f * a[k * n + c];
                    a[r * n + c] -= t;
                }
            }
        }
        Ok((a, perm, swaps))
    }

    pub fn det(&self) -> C64 {
        match self.lu() {
            Ok((lu, _, swaps)) => {
                let mut d = if swaps % 2 == 0 { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) };
                for i in 0..self.n {
                    d *= lu[i * self.n + i];
                }
                d
            }
            Err(_) => C64::default(),
        }
    }

    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        self.check_same_size(rhs)?;
        let n = self.n;
        let (lu, perm, _) = self.lu()?;
        let mut x = Self::zeros(n);
        for col in 0..n {
            // forward substitution on permuted rhs
            let mut y = vec![C64::default(); n];
            for i in 0..n {
                let mut s = rhs[(perm[i], col)];
                for j in 0..i {
                    s -= lu[i * n + j] * y[j];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for j in i + 1..n {
                    s -= lu[i * n + j] * x[(j, col)];
                }
                x[(i, col)] = s / lu[i * n + i];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.n))
    }

    /// eta X eta^{-1}.
    pub fn conjugate_by(&self, eta: &Self) -> Result<Self> {
        let inv = eta.inverse()?;
        Ok(eta.matmul(self).matmul(&inv))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(self.n, rhs.n);
                ComplexMatrix {
                    n: self.n,
                    data: self
                        .data
                        .iter()
                        .zip(rhs.data.iter())
                        .map(|(a, b)| a $op b)
                        .collect(),
                }
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// The unique splitting X = X_> + X_0 + X_< into strictly upper, diagonal and
/// strictly lower triangular parts.
#[derive(Clone, Debug)]
pub struct TriangularSplit {
    pub strict_upper: ComplexMatrix,
    pub diagonal: ComplexMatrix,
    pub strict_lower: ComplexMatrix,
}

impl TriangularSplit {
    /// X_perp = X_< + X_>.
    pub fn perp(&self) -> ComplexMatrix {
        &self.strict_upper + &self.strict_lower
    }

    pub fn recompose(&self) -> ComplexMatrix {
        &(&self.strict_upper + &self.diagonal) + &self.strict_lower
    }
}

pub fn split(x: &ComplexMatrix) -> TriangularSplit {
    TriangularSplit {
        strict_upper: x.strict_upper(),
        diagonal: x.diagonal_part(),
        strict_lower: x.strict_lower(),
    }
}

/// The trace form tr(XY); symmetric and Ad-invariant.
pub fn trace_pairing(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<C64> {
    x.check_same_size(y)?;
    let n = x.size();
    let mut s = C64::default();
    for i in 0..n {
        for k in 0..n {
            s += x[(i, k)] * y[(k, i)];
        }
    }
    Ok(s)
}

pub fn commutator(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    x.check_same_size(y)?;
    Ok(&x.matmul(y) - &y.matmul(x))
}

/// exp(X) by scaling-and-squaring on the truncated Taylor series.
pub fn mat_exp(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = x.size();
    let norm = x.norm();
    if !norm.is_finite() || norm > 500.0 {
        return Err(Error::Overflow);
    }
    // scale so the series argument has norm <= 1/2
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let y = x.scale(C64::new(1.0 / 2f64.powi(s as i32), 0.0));
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=24 {
        term = term.matmul(&y).scale(C64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..s {
        out = out.matmul(&out);
    }
    if !out.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(out)
}

/// Which way round the triangular factors multiply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaussOrder {
    /// A = U * D * Lo (unit upper, diagonal, unit lower); needs nonzero trailing minors.
    UpperDiagLower,
    /// A = Lo * D * U; needs nonzero leading minors.
    LowerDiagUpper,
}

#[derive(Clone, Debug)]
pub struct GaussFactors {
    pub upper_unipotent: ComplexMatrix,
    pub diagonal: ComplexMatrix,
    pub lower_unipotent: ComplexMatrix,
    pub order: GaussOrder,
}

impl GaussFactors {
    /// Product in the stated order.
    pub fn recompose(&self) -> ComplexMatrix {
        match self.order {
            GaussOrder::UpperDiagLower => self
                .upper_unipotent
                .matmul(&self.diagonal)
                .matmul(&self.lower_unipotent),
            GaussOrder::LowerDiagUpper => self
                .lower_unipotent
                .matmul(&self.diagonal)
                .matmul(&self.upper_unipotent),
        }
    }
}

/// Doolittle factorization without pivoting: A = L * U with L unit lower.
/// Pivots below PIVOT_TOL * ||A|| are domain errors, not a fallback.
fn doolittle(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a.size();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let mut u = a.clone();
    let mut l = ComplexMatrix::identity(n);
    for k in 0..n {
        let pivot = u[(k, k)];
        if pivot.norm() < PIVOT_TOL * scale {
            return Err(Error::SingularMinor { index: k, magnitude: pivot.norm() });
        }
        for i in k + 1..n {
            let f = u[(i, k)] / pivot;
            l[(i, k)] = f;
            for j in k..n {
                let t = f * u[(k, j)];
                u[(i, j)] -= t;
            }
        }
    }
    Ok((l, u))
}

fn reversal(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| {
        if i + j == n - 1 { C64::new(1.0, 0.0) } else { C64::default() }
    })
}

pub fn gauss_decompose(a: &ComplexMatrix, order: GaussOrder) -> Result<GaussFactors> {
    let n = a.size();
    match order {
        GaussOrder::LowerDiagUpper => {
            let (l, u_full) = doolittle(a)?;
            let d = u_full.diagonal_part();
            let dinv = ComplexMatrix::diagonal(
                &d.diag_entries().iter().map(|z| 1.0 / z).collect::<Vec<_>>(),
            );
            let u = dinv.matmul(&u_full);
            Ok(GaussFactors { upper_unipotent: u, diagonal: d, lower_unipotent: l, order })
        }
        GaussOrder::UpperDiagLower => {
            // J A J flips a UDL problem into an LDU one
            let j = reversal(n);
            let b = j.matmul(a).matmul(&j);
            let f = gauss_decompose(&b, GaussOrder::LowerDiagUpper)?;
            Ok(GaussFactors {
                upper_unipotent: j.matmul(&f.lower_unipotent).matmul(&j),
                diagonal: j.matmul(&f.diagonal).matmul(&j),
                lower_unipotent: j.matmul(&f.upper_unipotent).matmul(&j),
                order,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Regular-element diagonalization via complex Schur form.
// ---------------------------------------------------------------------------

/// Householder reduction to upper Hessenberg: A = U H U^dagger.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.size();
    let mut h = a.clone();
    let mut u = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        // eliminate column k below the subdiagonal
        let mut x = vec![C64::default(); n - k - 1];
        for (idx, i) in (k + 1..n).enumerate() {
            x[idx] = h[(i, k)];
        }
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let alpha = if x[0].norm() > 0.0 { -(x[0] / x[0].norm()) * xnorm } else { C64::new(-xnorm, 0.0) };
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm_sq = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        // P = I - beta v v^dagger acting on rows/cols k+1..n
        // left: H <- P H
        for col in 0..n {
            let mut s = C64::default();
            for (idx, i) in (k + 1..n).enumerate() {
                s += v[idx].conj() * h[(i, col)];
            }
            s *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                let t = s * v[idx];
                h[(i, col)] -= t;
            }
        }
        // right: H <- H P
        for row in 0..n {
            let mut s = C64::default();
            for (idx, i) in (k + 1..n).enumerate() {
                s += h[(row, i)] * v[idx];
            }
            s *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                let t = s * v[idx].conj();
                h[(row, i)] -= t;
            }
        }
        // accumulate: U <- U P
        for row in 0..n {
            let mut s = C64::default();
            for (idx, i) in (k + 1..n).enumerate() {
                s += u[(row, i)] * v[idx];
            }
            s *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                let t = s * v[idx].conj();
                u[(row, i)] -= t;
            }
        }
    }
    (h, u)
}

/// One explicit shifted QR sweep on the active block [lo, hi] of H (inclusive),
/// accumulating the unitary into U.
fn qr_sweep(h: &mut ComplexMatrix, u: &mut ComplexMatrix, lo: usize, hi: usize, shift: C64) {
    let n = h.size();
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    // Givens rotations eliminating the subdiagonal of the block
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let (c, s) = if b.norm() == 0.0 {
            (1.0, C64::default())
        } else if a.norm() == 0.0 {
            (0.0, C64::new(1.0, 0.0))
        } else {
            let nrm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let alpha = a / a.norm();
            (a.norm() / nrm, alpha * b.conj() / nrm)
        };
        // G = [[c, s], [-conj(s), c]] acts on rows k, k+1
        for col in k..n {
            let x = h[(k, col)];
            let y = h[(k + 1, col)];
            h[(k, col)] = c * x + s * y;
            h[(k + 1, col)] = -s.conj() * x + c * y;
        }
        rots.push((c, s));
    }
    // multiply the adjoint rotations back on the right: H <- R G0^dag G1^dag ...
    for (k, (c, s)) in rots.iter().enumerate() {
        let k = k + lo;
        let top = (k + 2).min(hi + 1);
        for row in 0..top.max(k + 2).min(n) {
            let x = h[(row, k)];
            let y = h[(row, k + 1)];
            h[(row, k)] = *c * x + s.conj() * y;
            h[(row, k + 1)] = -*s * x + *c * y;
        }
        for row in 0..n {
            let x = u[(row, k)];
            let y = u[(row, k + 1)];
            u[(row, k)] = *c * x + s.conj() * y;
            u[(row, k + 1)] = -*s * x + *c * y;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Complex Schur decomposition A = U T U^dagger with T upper triangular.
/// Deterministic: fixed shift strategy, no randomness.
fn schur(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a.size();
    let (mut t, mut u) = hessenberg(a);
    let mut hi = n - 1;
    let mut iters_at_block = 0usize;
    let max_total = 60 * n;
    let mut total = 0usize;
    while hi > 0 {
        // deflate converged subdiagonals
        let mut deflated = false;
        for m in (1..=hi).rev() {
            let small = f64::EPSILON * (t[(m - 1, m - 1)].norm() + t[(m, m)].norm() + 1e-300);
            if t[(m, m - 1)].norm() <= small {
                t[(m, m - 1)] = C64::default();
                if m == hi {
                    hi -= 1;
                    iters_at_block = 0;
                    deflated = true;
                    break;
                }
            }
        }
        if deflated {
            continue;
        }
        if hi == 0 {
            break;
        }
        // active block [lo, hi]
        let mut lo = hi;
        while lo > 0 && t[(lo, lo - 1)].norm() != 0.0 {
            lo -= 1;
        }
        // Wilkinson shift from the trailing 2x2
        let a11 = t[(hi - 1, hi - 1)];
        let a12 = t[(hi - 1, hi)];
        let a21 = t[(hi, hi - 1)];
        let a22 = t[(hi, hi)];
        let tr_half = (a11 + a22) * 0.5;
        let disc = ((a11 - a22) * 0.5).powu(2) + a12 * a21;
        let sq = disc.sqrt();
        let mu1 = tr_half + sq;
        let mu2 = tr_half - sq;
        let mut shift = if (mu1 - a22).norm() <= (mu2 - a22).norm() { mu1 } else { mu2 };
        if iters_at_block > 0 && iters_at_block % 12 == 0 {
            // deterministic exceptional shift to break rare symmetry stalls
            shift = a22 + C64::new(1.5 * a21.norm(), 0.0);
        }
        qr_sweep(&mut t, &mut u, lo, hi, shift);
        iters_at_block += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NotRegular { gap: 0.0, tol: f64::EPSILON });
        }
    }
    // clean the strictly lower part
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = C64::default();
        }
    }
    Ok((t, u))
}

fn eig_sort_key(z: &C64) -> (f64, f64) {
    (z.re, z.im)
}

/// Deterministic diagonalization of a regular (distinct-eigenvalue) matrix.
///
/// Returns (eta, Q) with eta g eta^{-1} = Q and the eigenvalues of Q sorted
/// ascending lexicographically by (re, im); this fixes the permutation gauge.
pub fn diagonalize_regular(g: &ComplexMatrix, tol_reg: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !g.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = g.size();
    let (t, u) = schur(g)?;
    let mut eigs: Vec<(C64, usize)> = (0..n).map(|i| (t[(i, i)], i)).collect();
    // regularity and invertibility gates
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_gap = min_gap.min((eigs[i].0 - eigs[j].0).norm());
        }
    }
    if min_gap < tol_reg {
        return Err(Error::NotRegular { gap: min_gap, tol: tol_reg });
    }
    let det: C64 = eigs.iter().map(|(z, _)| *z).product();
    if det.norm() < DET_TOL {
        return Err(Error::NotInvertible);
    }
    eigs.sort_by(|a, b| eig_sort_key(&a.0).partial_cmp(&eig_sort_key(&b.0)).unwrap());

    // eigenvectors of T by back substitution, then transform by U
    let mut v = ComplexMatrix::zeros(n);
    for (col, (lambda, k)) in eigs.iter().enumerate() {
        let k = *k;
        let mut y = vec![C64::default(); n];
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::default();
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            y[i] = -s / (t[(i, i)] - lambda);
        }
        // w = U y
        let mut w = vec![C64::default(); n];
        for r in 0..n {
            let mut s = C64::default();
            for j in 0..=k {
                s += u[(r, j)] * y[j];
            }
            w[r] = s;
        }
        // deterministic normalization: first entry of maximal modulus becomes 1
        let mut imax = 0;
        let mut best = w[0].norm();
        for (i, z) in w.iter().enumerate().skip(1) {
            if z.norm() > best {
                best = z.norm();
                imax = i;
            }
        }
        let piv = w[imax];
        for (r, z) in w.iter().enumerate() {
            v[(r, col)] = z / piv;
        }
    }
    let eta = v.inverse()?;
    let q = ComplexMatrix::diagonal(&eigs.iter().map(|(z, _)| *z).collect::<Vec<_>>());
    Ok((eta, q))
}
