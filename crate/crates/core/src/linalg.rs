//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] stores entries row-major. Factorizations (SVD, Hermitian
//! eigendecomposition, LU, the exponential) are delegated to `nalgebra`; the
//! results are re-sorted descending and eigen/singular vectors are put in a
//! fixed phase convention so repeated runs agree bit for bit.
//!
//! Vectorization is column-stacking: entry `(r, c)` of a `d x d` matrix lands
//! at index `c * d + r`. Under this convention `vec(A X B) = (B^T ⊗ A) vec(X)`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::input(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input("matrix has non-finite entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::input("ragged matrix rows"));
        }
        Self::new(n, m, rows.iter().flatten().copied().collect())
    }

    /// Real row-major convenience constructor, mostly for tests.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let d = entries.len();
        Self::from_fn(d, d, |r, c| if r == c { entries[r] } else { ZERO })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let d = entries.len();
        Self::from_fn(d, d, |r, c| if r == c { C64::new(entries[r], 0.0) } else { ZERO })
    }

    /// Outer product `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    /// Matrix unit `|r><c|` in dimension `d`.
    pub fn unit(d: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zeros(d, d);
        m[(r, c)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::input(format!(
                "{what}: expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (self - &self.adjoint()).max_abs() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&self.adjoint() * self - Self::identity(self.rows)).max_abs() <= tol
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| {
            self[(r / r2, c / c2)] * other[(r % r2, c % c2)]
        })
    }

    /// Column-stacked vectorization.
    pub fn vec_col(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                v.push(self[(r, c)]);
            }
        }
        v
    }

    /// Inverse of [`vec_col`](Self::vec_col) for a `d x d` matrix.
    pub fn from_vec_col(d: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), d * d);
        Self::from_fn(d, d, |r, c| v[c * d + r])
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Serialized form: rows of `[re, im]` pairs.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| [self[(r, c)].re, self[(r, c)].im]).collect())
            .collect()
    }

    pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|p| C64::new(p[0], p[1])).collect())
            .collect();
        Self::from_rows(&rows)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        ComplexMatrix::from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; n * m];
        for r in 0..n {
            let orow = &mut out[r * m..(r + 1) * m];
            for t in 0..k {
                let a = self.data[r * k + t];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[t * m..(t + 1) * m];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix {
            rows: n,
            cols: m,
            data: out,
        }
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

macro_rules! elementwise {
    ($tr:ident, $f:ident, $op:tt, $tra:ident, $fa:ident) => {
        impl $tr for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $tr for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                &self $op &rhs
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                &self $op rhs
            }
        }
        impl $tra<&ComplexMatrix> for ComplexMatrix {
            fn $fa(&mut self, rhs: &ComplexMatrix) {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                for (a, b) in self.data.iter_mut().zip(&rhs.data) {
                    *a = *a $op b;
                }
            }
        }
    };
}

elementwise!(Add, add, +, AddAssign, add_assign);
elementwise!(Sub, sub, -, SubAssign, sub_assign);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) - &(b * a)
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum()
}

pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotates `v` so its first significant entry is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(p) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let rot = p.conj() / p.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// Singular value decomposition with values sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Left singular vectors as columns (`rows x k`).
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    /// Right singular vectors as columns (`cols x k`).
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let k = m.rows.min(m.cols);
    if k == 0 {
        return Svd {
            u: ComplexMatrix::zeros(m.rows, 0),
            s: vec![],
            v: ComplexMatrix::zeros(m.cols, 0),
        };
    }
    let dec = m.to_nalgebra().svd(true, true);
    let u = dec.u.expect("u requested");
    let vt = dec.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let mut uo = ComplexMatrix::zeros(m.rows, k);
    let mut vo = ComplexMatrix::zeros(m.cols, k);
    let mut s = Vec::with_capacity(k);
    for (j, &i) in order.iter().enumerate() {
        s.push(dec.singular_values[i]);
        // Fix the phase on v and carry the same rotation to u.
        let mut vcol: Vec<C64> = (0..m.cols).map(|r| vt[(i, r)].conj()).collect();
        let before = vcol.clone();
        fix_phase(&mut vcol);
        let rot = match before.iter().zip(&vcol).find(|(b, _)| b.norm() > 0.0) {
            Some((b, a)) => a / b,
            None => ONE,
        };
        for r in 0..m.cols {
            vo[(r, j)] = vcol[r];
        }
        for r in 0..m.rows {
            uo[(r, j)] = u[(r, i)] * rot;
        }
    }
    Svd { u: uo, s, v: vo }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows.min(m.cols) == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.all_finite() {
        return Err(Error::input("operator_norm: non-finite entries"));
    }
    Ok(spectral_norm(m))
}

/// Infallible [`operator_norm`] for internally produced (finite) matrices.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Top singular triple `(sigma, u, v)` with `m v = sigma u`.
pub fn top_singular_pair(m: &ComplexMatrix) -> (f64, Vec<C64>, Vec<C64>) {
    let dec = svd(m);
    (dec.s[0], dec.u.column(0), dec.v.column(0))
}

/// Hermitian eigendecomposition: eigenvalues descending, eigenvectors as
/// phase-fixed columns.
pub fn eigh(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let d = m.dim();
    let h = m.hermitian_part().to_nalgebra();
    let dec = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[b].total_cmp(&dec.eigenvalues[a]));
    let mut vecs = ComplexMatrix::zeros(d, d);
    let mut vals = Vec::with_capacity(d);
    for (j, &i) in order.iter().enumerate() {
        vals.push(dec.eigenvalues[i]);
        let mut col: Vec<C64> = (0..d).map(|r| dec.eigenvectors[(r, i)]).collect();
        fix_phase(&mut col);
        for r in 0..d {
            vecs[(r, j)] = col[r];
        }
    }
    (vals, vecs)
}

pub fn eigvalsh(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m
        .hermitian_part()
        .to_nalgebra()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (vals, vecs) = eigh(m);
    let fd: Vec<C64> = vals.iter().map(|&x| C64::new(f(x), 0.0)).collect();
    &(&vecs * &ComplexMatrix::diag(&fd)) * &vecs.adjoint()
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<C64> {
    // The complex Schur form is upper triangular.
    let (_, t) = m.to_nalgebra().schur().unpack();
    t.diagonal().iter().copied().collect()
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.require_square("inverse")?;
    m.to_nalgebra()
        .try_inverse()
        .map(|x| ComplexMatrix::from_nalgebra(&x))
        .ok_or_else(|| Error::input("inverse: singular matrix"))
}

/// Matrix exponential by scaling and squaring with a Padé approximant.
pub fn matrix_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.require_square("matrix_exp")?;
    if !m.all_finite() {
        return Err(Error::input("matrix_exp: non-finite entries"));
    }
    if m.rows == 0 {
        return Ok(m.clone());
    }
    Ok(ComplexMatrix::from_nalgebra(&m.to_nalgebra().exp()))
}

/// Tensor factor dimensions of a composite Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemShape {
    factor_dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::input("subsystem dimensions must be positive"));
        }
        Ok(Self { factor_dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self {
            factor_dims: vec![2; n],
        }
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    fn digits(&self, mut idx: usize, out: &mut [usize]) {
        for (k, &d) in self.factor_dims.iter().enumerate().rev() {
            out[k] = idx % d;
            idx /= d;
        }
    }
}

/// Traces out every factor not listed in `keep`, which must be sorted and
/// in range. The kept factors appear in their original order.
pub fn partial_trace(
    m: &ComplexMatrix,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let d = m.require_square("partial_trace")?;
    if shape.total_dim() != d {
        return Err(Error::input(format!(
            "partial_trace: shape {:?} does not match dimension {d}",
            shape.factor_dims
        )));
    }
    let n = shape.factor_dims.len();
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= n) {
        return Err(Error::input("partial_trace: keep must be sorted, distinct, in range"));
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| shape.factor_dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let compose = |digits: &[usize]| {
        keep.iter()
            .zip(&kept_dims)
            .fold(0usize, |acc, (&k, &dk)| acc * dk + digits[k])
    };
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let mut rd = vec![0; n];
    let mut cd = vec![0; n];
    for r in 0..d {
        shape.digits(r, &mut rd);
        let ro = compose(&rd);
        for c in 0..d {
            shape.digits(c, &mut cd);
            if traced.iter().all(|&k| rd[k] == cd[k]) {
                out[(ro, compose(&cd))] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Default relative rank tolerance: `1e-9 * dim`.
pub fn default_rank_tol(dim: usize) -> f64 {
    1e-9 * dim.max(1) as f64
}

/// Orthonormal basis of `{v : ||A v|| <= tol * ||A||}`, ordered by ascending
/// singular value with each vector phase-fixed.
pub fn nullspace_basis(a: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<C64>>> {
    if !(tol > 0.0) {
        return Err(Error::input("nullspace_basis: tol must be positive"));
    }
    if !a.all_finite() {
        return Err(Error::input("nullspace_basis: non-finite entries"));
    }
    Ok(nullspace_with_values(a, tol).0)
}

/// Nullspace basis plus the full ascending list of singular values of `a`
/// (padded with zeros up to the column count).
pub(crate) fn nullspace_with_values(a: &ComplexMatrix, tol: f64) -> (Vec<Vec<C64>>, Vec<f64>) {
    let k = a.cols;
    if k == 0 {
        return (vec![], vec![]);
    }
    // Pad to at least k rows so the SVD returns a complete right basis.
    let padded = if a.rows < k {
        ComplexMatrix::from_fn(k, k, |r, c| if r < a.rows { a[(r, c)] } else { ZERO })
    } else {
        a.clone()
    };
    let dec = svd(&padded);
    let smax = dec.s[0];
    let mut vals: Vec<f64> = dec.s.clone();
    vals.reverse();
    if smax == 0.0 {
        let basis = (0..k)
            .map(|i| (0..k).map(|j| if i == j { ONE } else { ZERO }).collect())
            .collect();
        return (basis, vals);
    }
    let mut basis = Vec::new();
    for j in (0..k).rev() {
        if dec.s[j] <= tol * smax {
            let mut v = dec.v.column(j);
            fix_phase(&mut v);
            basis.push(v);
        }
    }
    (basis, vals)
}

/// Gram–Schmidt on a list of vectors, dropping ones that become negligible.
pub fn orthonormalize(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let p = vdot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= p * qi;
                }
            }
        }
        let n = vnorm(&w);
        if n > tol {
            out.push(w.iter().map(|z| z / n).collect());
        }
    }
    out
}

/// Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [ComplexMatrix; 4] {
    let i2 = ComplexMatrix::identity(2);
    let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let y = ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).expect("finite");
    let z = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    [i2, x, y, z]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn operator_norm_examples() {
        let [_, x, _, _] = paulis();
        assert!((operator_norm(&x).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        let d = ComplexMatrix::diag_real(&[1.0, 3.0, -2.0]);
        assert!((operator_norm(&d).unwrap() - 3.0).abs() < 1e-12);
        let rect = ComplexMatrix::from_real(1, 2, &[3.0, 4.0]);
        assert!((operator_norm(&rect).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_rejects_nan() {
        assert!(ComplexMatrix::new(1, 1, vec![C64::new(f64::NAN, 0.0)]).is_err());
        let mut m = ComplexMatrix::zeros(1, 1);
        m[(0, 0)] = C64::new(f64::INFINITY, 0.0);
        assert!(operator_norm(&m).is_err());
    }

    #[test]
    fn exp_examples() {
        let z = ComplexMatrix::zeros(3, 3);
        assert!(close(&matrix_exp(&z).unwrap(), &ComplexMatrix::identity(3), 1e-14));

        // exp(i pi X): X has eigenvalues ±1 so both phases are e^{±i pi} = -1.
        let [_, x, _, _] = paulis();
        let e = matrix_exp(&x.scale(I * std::f64::consts::PI)).unwrap();
        assert!(close(&e, &ComplexMatrix::identity(2).scale_re(-1.0), 1e-12));

        let dm = ComplexMatrix::diag_real(&[0.3, -1.7]);
        let want = ComplexMatrix::diag_real(&[0.3f64.exp(), (-1.7f64).exp()]);
        assert!(close(&matrix_exp(&dm).unwrap(), &want, 1e-13));

        assert!(matrix_exp(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let rho = ComplexMatrix::from_real(2, 2, &[0.7, 0.1, 0.1, 0.3]);
        let sigma = ComplexMatrix::from_real(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let shape = SubsystemShape::qubits(2);
        let pt = partial_trace(&rho.kron(&sigma), &shape, &[0]).unwrap();
        assert!(close(&pt, &rho.scale_re(3.0), 1e-14));
        let pt = partial_trace(&rho.kron(&sigma), &shape, &[1]).unwrap();
        assert!(close(&pt, &sigma, 1e-14));

        let pt = partial_trace(&ComplexMatrix::identity(4), &shape, &[0]).unwrap();
        assert!(close(&pt, &ComplexMatrix::identity(2).scale_re(2.0), 1e-14));

        let [_, _, _, z] = paulis();
        let pt = partial_trace(&z.kron(&z), &shape, &[0]).unwrap();
        assert!(pt.max_abs() < 1e-15);

        assert!(partial_trace(&ComplexMatrix::identity(3), &shape, &[0]).is_err());
        assert!(partial_trace(&ComplexMatrix::identity(4), &shape, &[1, 0]).is_err());
    }

    #[test]
    fn nullspace_examples() {
        assert!(nullspace_basis(&ComplexMatrix::identity(4), 1e-9).unwrap().is_empty());
        assert_eq!(nullspace_basis(&ComplexMatrix::zeros(3, 3), 1e-9).unwrap().len(), 3);
        assert!(nullspace_basis(&ComplexMatrix::identity(2), 0.0).is_err());

        // ad_Z on vec(M_2): Z ⊗ I - I ⊗ Z^T in the column-stacked convention
        // kills exactly the diagonal matrices.
        let [id, _, _, z] = paulis();
        let ad = &id.kron(&z) - &z.transpose().kron(&id);
        let basis = nullspace_basis(&ad, 1e-9).unwrap();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            let m = ComplexMatrix::from_vec_col(2, v);
            assert!(m[(0, 1)].norm() < 1e-12 && m[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn eigh_sorted_and_phase_fixed() {
        let [_, x, _, _] = paulis();
        let (vals, vecs) = eigh(&x);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] + 1.0).abs() < 1e-14);
        for j in 0..2 {
            let first = vecs[(0, j)];
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn kron_vec_identity() {
        // vec(A X B) = (B^T ⊗ A) vec(X)
        let a = ComplexMatrix::from_fn(2, 2, |r, c| C64::new(r as f64 + 1.0, c as f64));
        let b = ComplexMatrix::from_fn(2, 2, |r, c| C64::new(c as f64 - r as f64, 0.5));
        let x = ComplexMatrix::from_fn(2, 2, |r, c| C64::new(0.3 * r as f64, 1.0 + c as f64));
        let lhs = (&(&a * &x) * &b).vec_col();
        let rhs = b.transpose().kron(&a).mul_vec(&x.vec_col());
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-13);
        }
    }
}
