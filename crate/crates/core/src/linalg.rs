//! Dense complex linear-algebra helpers on top of `faer`.
//!
//! Everything in the crate stores operators as `Mat<c64>` and kets as
//! `Col<c64>`. The helpers here cover what the physics modules need:
//! Kronecker embedding, Hermitian eigendecomposition, norms and the
//! matrix exponential.

use faer::linalg::solvers::Solve;
use faer::{Col, Mat, Side};

pub use faer::c64;

pub type CMat = Mat<c64>;
pub type CCol = Col<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

#[inline]
pub fn cr(re: f64) -> c64 {
    c64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    Mat::zeros(r, c)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

pub fn scale(m: &CMat, s: c64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kron(b)
}

pub fn kron_col(a: &CCol, b: &CCol) -> CCol {
    let nb = b.nrows();
    Col::from_fn(a.nrows() * nb, |i| a[i / nb] * b[i % nb])
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn trace(m: &CMat) -> c64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `|u><v|`
pub fn outer(u: &CCol, v: &CCol) -> CMat {
    Mat::from_fn(u.nrows(), v.nrows(), |i, j| u[i] * v[j].conj())
}

/// `<u|v>`
pub fn inner(u: &CCol, v: &CCol) -> c64 {
    (0..u.nrows()).map(|i| u[i].conj() * v[i]).sum()
}

pub fn col_norm(u: &CCol) -> f64 {
    inner(u, u).re.max(0.0).sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

pub fn col_max_abs_diff(a: &CCol, b: &CCol) -> f64 {
    (0..a.nrows())
        .map(|i| (a[i] - b[i]).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.norm_l2()
}

/// Largest entry of `|m - m^dagger|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut best = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            best = best.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    best
}

pub fn hermitize(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Eigendecomposition of a Hermitian matrix (lower triangle is read).
/// Eigenvalues come back in nondecreasing order.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .expect("self-adjoint eigendecomposition failed to converge");
    let s = evd.S().column_vector();
    let vals = (0..s.nrows()).map(|i| s[i].re).collect();
    (vals, evd.U().to_owned())
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .expect("self-adjoint eigenvalues failed to converge")
}

/// Spectral norm of a Hermitian matrix.
pub fn op_norm_hermitian(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let vals = eigvalsh(&hermitize(m));
    vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Spectral norm of a general matrix, via the largest eigenvalue of `m^dagger m`.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let g = m.adjoint() * m;
    op_norm_hermitian(&g).sqrt()
}

/// `V f(diag) V^dagger` for a Hermitian matrix.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> c64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let scaled = Mat::from_fn(n, n, |i, j| vecs[(i, j)] * f(vals[j]));
    &scaled * vecs.adjoint()
}

/// `exp(scale * h)` for Hermitian `h` through its eigendecomposition.
pub fn expm_hermitian(h: &CMat, s: c64) -> CMat {
    hermitian_function(h, |lam| (s * lam).exp())
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm_1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// General matrix exponential by scaling and squaring with the degree-13
/// Pade approximant.
pub fn expm_pade(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return zeros(0, 0);
    }
    let nrm = norm_1(a);
    let squarings = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = scale(a, cr(0.5f64.powi(squarings as i32)));
    let b = &PADE13;
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let comb = |c6: f64, c4: f64, c2: f64| -> CMat {
        scale(&a6, cr(c6)) + scale(&a4, cr(c4)) + scale(&a2, cr(c2))
    };
    let u_inner = &a6 * comb(b[13], b[11], b[9]) + comb(b[7], b[5], b[3]) + scale(&id, cr(b[1]));
    let u = &a * u_inner;
    let v = &a6 * comb(b[12], b[10], b[8]) + comb(b[6], b[4], b[2]) + scale(&id, cr(b[0]));
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Embed a single-mode operator on `mode` of a `modes`-mode register with
/// per-mode dimension `cutoff` (mode 0 is the slowest index).
pub fn embed(op: &CMat, mode: usize, modes: usize, cutoff: usize) -> CMat {
    let left = cutoff.pow(mode as u32);
    let right = cutoff.pow((modes - mode - 1) as u32);
    let mut out = op.clone();
    if left > 1 {
        out = identity(left).kron(&out);
    }
    if right > 1 {
        out = out.kron(identity(right));
    }
    out
}

/// `u^dagger m u`
pub fn conjugate_by(m: &CMat, u: &CMat) -> CMat {
    u.adjoint() * (m * u)
}

/// `u m u^dagger`
pub fn transform_by(m: &CMat, u: &CMat) -> CMat {
    u * (m * u.adjoint())
}

/// `u^dagger u - 1` in spectral norm.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let g = u.adjoint() * u;
    op_norm_hermitian(&(g - identity(u.nrows())))
}

/// Restrict `m` to the span of the orthonormal columns of `basis`.
pub fn compress(m: &CMat, basis: &CMat) -> CMat {
    basis.adjoint() * (m * basis)
}
