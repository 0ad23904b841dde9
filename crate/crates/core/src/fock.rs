//! Truncated multimode Fock space: states, density matrices, operators and
//! the standard mode operators.
//!
//! Flat indices are row-major over modes with mode 0 the slowest index, so
//! `|n_0, n_1, ..., n_{M-1}>` sits at `sum_k n_k D^(M-1-k)`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CCol, CMat, ONE, ZERO};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_FLOOR: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    modes: usize,
    cutoff: usize,
}

impl FockSpace {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        if modes == 0 || cutoff == 0 {
            return Err(Error::InvalidSpace(format!(
                "modes ({modes}) and cutoff ({cutoff}) must be positive"
            )));
        }
        if cutoff.checked_pow(modes as u32).is_none() {
            return Err(Error::InvalidSpace("dimension overflows usize".into()));
        }
        Ok(Self { modes, cutoff })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.modes as u32)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                modes: self.modes,
            })
        }
    }

    /// Flat index of an occupation tuple.
    pub fn index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: occupations.len(),
            });
        }
        let mut idx = 0;
        for &n in occupations {
            if n >= self.cutoff {
                return Err(Error::InsufficientCutoff {
                    cutoff: self.cutoff,
                    required: n + 1,
                });
            }
            idx = idx * self.cutoff + n;
        }
        Ok(idx)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes];
        for slot in occ.iter_mut().rev() {
            *slot = index % self.cutoff;
            index /= self.cutoff;
        }
        occ
    }

    /// Occupation of `mode` in the basis state at flat `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        let stride = self.cutoff.pow((self.modes - mode - 1) as u32);
        (index / stride) % self.cutoff
    }

    pub fn total_photons(&self, index: usize) -> usize {
        self.occupations(index).iter().sum()
    }

    /// Flat indices grouped by total photon number, ascending.
    pub fn photon_number_sectors(&self) -> Vec<Vec<usize>> {
        let max_total = self.modes * (self.cutoff - 1);
        let mut sectors = vec![Vec::new(); max_total + 1];
        for idx in 0..self.dim() {
            sectors[self.total_photons(idx)].push(idx);
        }
        sectors
    }
}

#[derive(Clone, Debug)]
pub struct StateVector {
    space: FockSpace,
    amplitudes: CCol,
}

impl StateVector {
    pub fn new(space: FockSpace, amplitudes: CCol) -> Result<Self> {
        if amplitudes.nrows() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: amplitudes.nrows(),
            });
        }
        if (0..amplitudes.nrows()).any(|i| !amplitudes[i].re.is_finite() || !amplitudes[i].im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { space, amplitudes })
    }

    pub fn zero(space: FockSpace) -> Self {
        Self {
            space,
            amplitudes: CCol::zeros(space.dim()),
        }
    }

    pub fn basis(space: FockSpace, occupations: &[usize]) -> Result<Self> {
        let idx = space.index(occupations)?;
        let mut v = Self::zero(space);
        v.amplitudes[idx] = ONE;
        Ok(v)
    }

    /// Normalized superposition `sum_i c_i |occ_i>`.
    pub fn superposition(space: FockSpace, terms: &[(c64, &[usize])]) -> Result<Self> {
        let mut v = Self::zero(space);
        for (c, occ) in terms {
            let idx = space.index(occ)?;
            v.amplitudes[idx] += *c;
        }
        v.normalized()
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &CCol {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CCol {
        self.amplitudes
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<c64> {
        Ok(self.amplitudes[self.space.index(occupations)?])
    }

    pub fn norm(&self) -> f64 {
        linalg::col_norm(&self.amplitudes)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(linalg::cr(1.0 / n)))
    }

    pub fn scaled(&self, s: c64) -> Self {
        Self {
            space: self.space,
            amplitudes: CCol::from_fn(self.amplitudes.nrows(), |i| self.amplitudes[i] * s),
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> c64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            space: self.space,
            amplitudes: &self.amplitudes + &other.amplitudes,
        }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space,
            matrix: linalg::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    /// `<self| op |self>`
    pub fn expectation(&self, op: &Operator) -> c64 {
        linalg::inner(&self.amplitudes, &(&op.matrix * &self.amplitudes))
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: CMat,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, unit trace, positive semidefinite.
    pub fn new(space: FockSpace, matrix: CMat) -> Result<Self> {
        let rho = Self::from_matrix(space, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape-checked but otherwise unvalidated; for intermediate results
    /// such as unnormalized branch outputs.
    pub fn from_matrix(space: FockSpace, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: matrix.nrows(),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermitian_defect(&self.matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {herm:.3e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = linalg::eigvalsh(&self.matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < PSD_FLOOR {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// `<psi| rho |psi>`
    pub fn overlap(&self, psi: &StateVector) -> f64 {
        let v = &self.matrix * psi.amplitudes();
        linalg::inner(psi.amplitudes(), &v).re
    }

    pub fn transformed(&self, u: &Operator) -> Self {
        Self {
            space: self.space,
            matrix: linalg::transform_by(&self.matrix, &u.matrix),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Operator {
    space: FockSpace,
    matrix: CMat,
}

impl Operator {
    pub fn new(space: FockSpace, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: matrix.nrows(),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            matrix: linalg::identity(space.dim()),
        }
    }

    pub fn zero(space: FockSpace) -> Self {
        Self {
            space,
            matrix: linalg::zeros(space.dim(), space.dim()),
        }
    }

    pub fn diagonal(space: FockSpace, f: impl Fn(usize) -> c64) -> Self {
        let n = space.dim();
        let mut m = linalg::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = f(i);
        }
        Self { space, matrix: m }
    }

    /// `|u><v|`
    pub fn outer(u: &StateVector, v: &StateVector) -> Self {
        Self {
            space: u.space,
            matrix: linalg::outer(u.amplitudes(), v.amplitudes()),
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space,
            matrix: linalg::dagger(&self.matrix),
        }
    }

    pub fn scaled(&self, s: c64) -> Self {
        Self {
            space: self.space,
            matrix: linalg::scale(&self.matrix, s),
        }
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector {
            space: self.space,
            amplitudes: &self.matrix * v.amplitudes(),
        }
    }

    /// `u^dagger self u`
    pub fn conjugated_by(&self, u: &Operator) -> Self {
        Self {
            space: self.space,
            matrix: linalg::conjugate_by(&self.matrix, &u.matrix),
        }
    }

    /// `u self u^dagger`
    pub fn transformed_by(&self, u: &Operator) -> Self {
        Self {
            space: self.space,
            matrix: linalg::transform_by(&self.matrix, &u.matrix),
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.matrix)
    }

    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.matrix)
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self {
            space: self.space,
            matrix: linalg::commutator(&self.matrix, &other.matrix),
        }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    /// Spectral norm.
    pub fn op_norm(&self) -> f64 {
        linalg::op_norm(&self.matrix)
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// Kronecker composition. Both factors must share the cutoff.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

fn joined_space(a: FockSpace, b: FockSpace) -> Result<FockSpace> {
    if a.cutoff != b.cutoff {
        return Err(Error::IncompatibleSpaces(format!(
            "cutoffs differ ({} vs {})",
            a.cutoff, b.cutoff
        )));
    }
    FockSpace::new(a.modes + b.modes, a.cutoff)
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            space: joined_space(self.space, other.space)?,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            space: joined_space(self.space, other.space)?,
            amplitudes: linalg::kron_col(&self.amplitudes, &other.amplitudes),
        })
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            space: joined_space(self.space, other.space)?,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

fn single_mode_annihilation(cutoff: usize) -> CMat {
    let mut a = linalg::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = linalg::cr((n as f64).sqrt());
    }
    a
}

pub fn annihilation(space: FockSpace, mode: usize) -> Result<Operator> {
    space.check_mode(mode)?;
    let a = single_mode_annihilation(space.cutoff);
    Ok(Operator {
        space,
        matrix: linalg::embed(&a, mode, space.modes, space.cutoff),
    })
}

pub fn creation(space: FockSpace, mode: usize) -> Result<Operator> {
    Ok(annihilation(space, mode)?.dagger())
}

pub fn number_operator(space: FockSpace, mode: usize) -> Result<Operator> {
    space.check_mode(mode)?;
    Ok(Operator::diagonal(space, |i| {
        linalg::cr(space.occupation(i, mode) as f64)
    }))
}

pub fn total_number_operator(space: FockSpace) -> Operator {
    Operator::diagonal(space, |i| linalg::cr(space.total_photons(i) as f64))
}

/// `(G+, G-)` with `G+ = a_j^dag a_k + a_k^dag a_j` and
/// `G- = i (a_j^dag a_k - a_k^dag a_j)`.
pub fn bs_generators(space: FockSpace, j: usize, k: usize) -> Result<(Operator, Operator)> {
    space.check_mode(j)?;
    space.check_mode(k)?;
    if j == k {
        return Err(Error::EqualModes(j));
    }
    // hop = a_j^dag a_k, filled entrywise on the truncated space
    let n = space.dim();
    let d = space.cutoff;
    let stride_j = d.pow((space.modes - j - 1) as u32);
    let stride_k = d.pow((space.modes - k - 1) as u32);
    let mut plus = linalg::zeros(n, n);
    let mut minus = linalg::zeros(n, n);
    for col in 0..n {
        let nj = space.occupation(col, j);
        let nk = space.occupation(col, k);
        if nk == 0 || nj + 1 >= d {
            continue;
        }
        let row = col + stride_j - stride_k;
        let amp = ((nj + 1) as f64 * nk as f64).sqrt();
        plus[(row, col)] += linalg::cr(amp);
        plus[(col, row)] += linalg::cr(amp);
        minus[(row, col)] += c64::new(0.0, amp);
        minus[(col, row)] += c64::new(0.0, -amp);
    }
    Ok((Operator { space, matrix: plus }, Operator { space, matrix: minus }))
}

fn check_finite(m: &CMat) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite);
            }
        }
    }
    Ok(())
}

/// `exp(scale * h)`.
///
/// Hermitian and anti-Hermitian generators go through an eigendecomposition;
/// anything else falls back to scaling and squaring with a Pade approximant.
pub fn matrix_exponential(h: &Operator, scale: c64) -> Result<Operator> {
    check_finite(&h.matrix)?;
    if !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(Error::NonFinite);
    }
    let size = linalg::max_abs(&h.matrix).max(1.0);
    let matrix = if linalg::hermitian_defect(&h.matrix) <= 1e-14 * size {
        linalg::expm_hermitian(&linalg::hermitize(&h.matrix), scale)
    } else {
        let ih = linalg::scale(&h.matrix, -linalg::I);
        if linalg::hermitian_defect(&ih) <= 1e-14 * size {
            // h = i (-i h), with -i h Hermitian
            linalg::expm_hermitian(&linalg::hermitize(&ih), scale * linalg::I)
        } else {
            linalg::expm_pade(&linalg::scale(&h.matrix, scale))
        }
    };
    Ok(Operator {
        space: h.space,
        matrix,
    })
}

/// Accelerated `exp(scale * h)` for a Hermitian `h` that conserves total
/// photon number: each photon-number sector is exponentiated separately.
/// Falls back to [`matrix_exponential`] when `h` couples sectors.
pub fn matrix_exponential_blocked(h: &Operator, scale: c64) -> Result<Operator> {
    check_finite(&h.matrix)?;
    let space = h.space;
    let size = linalg::max_abs(&h.matrix).max(1.0);
    if linalg::hermitian_defect(&h.matrix) > 1e-14 * size {
        return matrix_exponential(h, scale);
    }
    let n = space.dim();
    let sector_of: Vec<usize> = (0..n).map(|i| space.total_photons(i)).collect();
    for j in 0..n {
        for i in 0..n {
            if sector_of[i] != sector_of[j] && h.matrix[(i, j)].norm() > 1e-14 * size {
                return matrix_exponential(h, scale);
            }
        }
    }
    let mut out = linalg::zeros(n, n);
    for sector in space.photon_number_sectors() {
        let m = sector.len();
        if m == 0 {
            continue;
        }
        let block = CMat::from_fn(m, m, |a, b| h.matrix[(sector[a], sector[b])]);
        let e = linalg::expm_hermitian(&linalg::hermitize(&block), scale);
        for a in 0..m {
            for b in 0..m {
                out[(sector[a], sector[b])] = e[(a, b)];
            }
        }
    }
    Ok(Operator { space, matrix: out })
}

/// Two-mode beam splitter
/// `U = exp[delta (a_k^dag a_j e^{i phi} - a_j^dag a_k e^{-i phi})]`,
/// equivalently `exp[i delta (G+ sin phi + G- cos phi)]`.
pub fn beam_splitter(space: FockSpace, j: usize, k: usize, delta: f64, phi: f64) -> Result<Operator> {
    let (gp, gm) = bs_generators(space, j, k)?;
    let h = &gp.scaled(linalg::cr(delta * phi.sin())) + &gm.scaled(linalg::cr(delta * phi.cos()));
    matrix_exponential_blocked(&h, linalg::I)
}

/// Angles of one pairwise term `theta_plus G+_jk + theta_minus G-_jk` of a
/// multimode passive unitary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAngles {
    pub j: usize,
    pub k: usize,
    pub theta_plus: f64,
    pub theta_minus: f64,
}

impl PairAngles {
    /// The `(delta, phi)` two-mode parameterization.
    pub fn from_delta_phi(j: usize, k: usize, delta: f64, phi: f64) -> Self {
        Self {
            j,
            k,
            theta_plus: delta * phi.sin(),
            theta_minus: delta * phi.cos(),
        }
    }
}

/// `exp(i sum_jk (theta+_jk G+_jk + theta-_jk G-_jk))`.
pub fn passive_unitary(space: FockSpace, angles: &[PairAngles]) -> Result<Operator> {
    let mut h = Operator::zero(space);
    for p in angles {
        let (gp, gm) = bs_generators(space, p.j, p.k)?;
        h = &h + &gp.scaled(linalg::cr(p.theta_plus));
        h = &h + &gm.scaled(linalg::cr(p.theta_minus));
    }
    matrix_exponential_blocked(&h, linalg::I)
}

/// `exp(i angle n_mode)`.
pub fn rotation(space: FockSpace, mode: usize, angle: f64) -> Result<Operator> {
    space.check_mode(mode)?;
    Ok(Operator::diagonal(space, |i| {
        c64::cis(angle * space.occupation(i, mode) as f64)
    }))
}

fn validated_keep(space: FockSpace, keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidModeSet("keep set is empty".into()));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::InvalidModeSet("duplicate mode indices".into()));
    }
    for &m in &sorted {
        space.check_mode(m)?;
    }
    Ok(sorted)
}

/// Maps (kept flat index, traced flat index) to the full flat index.
fn split_indices(space: FockSpace, keep: &[usize]) -> (FockSpace, usize, Vec<Vec<usize>>) {
    let traced: Vec<usize> = (0..space.modes).filter(|m| !keep.contains(m)).collect();
    let d = space.cutoff;
    let kept_dim = d.pow(keep.len() as u32);
    let traced_dim = d.pow(traced.len() as u32);
    let mut full = vec![vec![0usize; traced_dim]; kept_dim];
    let mut occ = vec![0usize; space.modes];
    for (ki, row) in full.iter_mut().enumerate() {
        let mut rem = ki;
        for &m in keep.iter().rev() {
            occ[m] = rem % d;
            rem /= d;
        }
        for (ti, slot) in row.iter_mut().enumerate() {
            let mut rem = ti;
            for &m in traced.iter().rev() {
                occ[m] = rem % d;
                rem /= d;
            }
            *slot = occ.iter().fold(0, |acc, &n| acc * d + n);
        }
    }
    let kept_space = FockSpace {
        modes: keep.len(),
        cutoff: d,
    };
    (kept_space, traced_dim, full)
}

/// Reduced state on the modes in `keep` (returned in ascending mode order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = validated_keep(rho.space, keep)?;
    let (kept_space, traced_dim, full) = split_indices(rho.space, &keep);
    let n = kept_space.dim();
    let mut out = linalg::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for t in 0..traced_dim {
                acc += rho.matrix[(full[i][t], full[j][t])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix {
        space: kept_space,
        matrix: linalg::hermitize(&out),
    })
}

/// Reduced state of the ensemble `sum_k w_k |v_k><v_k|` on the modes in
/// `keep`, without forming the full density matrix.
pub fn partial_trace_ensemble(
    branches: &[(f64, StateVector)],
    keep: &[usize],
) -> Result<DensityMatrix> {
    let space = branches
        .first()
        .map(|(_, v)| v.space)
        .ok_or_else(|| Error::InvalidState("empty ensemble".into()))?;
    let keep = validated_keep(space, keep)?;
    let (kept_space, traced_dim, full) = split_indices(space, &keep);
    let n = kept_space.dim();
    let mut out = linalg::zeros(n, n);
    for (w, v) in branches {
        let amps = v.amplitudes();
        let block = CMat::from_fn(n, traced_dim, |i, t| amps[full[i][t]]);
        let contrib = &block * block.adjoint();
        out += linalg::scale(&contrib, linalg::cr(*w));
    }
    Ok(DensityMatrix {
        space: kept_space,
        matrix: linalg::hermitize(&out),
    })
}
