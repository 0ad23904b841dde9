//! Rotation-symmetric code families, their projectors, dual words and
//! native logical operators.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    self, bs_generators, matrix_exponential_blocked, FockSpace, Operator, PairAngles, StateVector,
};
use crate::linalg::{self, c64, CMat, ONE};

const ORTHO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TwoModeBinomial,
    TwoModeGeneral,
    MultimodeQudit,
    SingleModeBinomial,
    Trivial,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::TwoModeBinomial => "two_mode_binomial",
            Family::TwoModeGeneral => "two_mode_general",
            Family::MultimodeQudit => "multimode_qudit",
            Family::SingleModeBinomial => "single_mode_binomial",
            Family::Trivial => "trivial",
        }
    }

    pub fn is_rotation_symmetric(&self) -> bool {
        !matches!(self, Family::Trivial)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Family::TwoModeBinomial,
            Family::TwoModeGeneral,
            Family::MultimodeQudit,
            Family::SingleModeBinomial,
            Family::Trivial,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| Error::Serialization(format!("unknown code family {s:?}")))
    }
}

/// Coefficients `f_{n_0 ... n_{d-1}}`, normalized on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    entries: BTreeMap<Vec<usize>, c64>,
}

impl CoefficientTable {
    pub fn new(entries: impl IntoIterator<Item = (Vec<usize>, c64)>) -> Result<Self> {
        let mut map: BTreeMap<Vec<usize>, c64> = BTreeMap::new();
        let mut arity = None;
        for (idx, f) in entries {
            if !f.re.is_finite() || !f.im.is_finite() {
                return Err(Error::NonFinite);
            }
            match arity {
                None => arity = Some(idx.len()),
                Some(a) if a != idx.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: a,
                        got: idx.len(),
                    })
                }
                _ => {}
            }
            *map.entry(idx).or_insert(linalg::ZERO) += f;
        }
        let norm2: f64 = map.values().map(|f| f.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(Error::InvalidState("coefficient table has zero norm".into()));
        }
        if (norm2 - 1.0).abs() > 1e-12 {
            log::warn!("coefficient table renormalized (squared norm was {norm2})");
            let s = 1.0 / norm2.sqrt();
            for f in map.values_mut() {
                *f *= s;
            }
        }
        Ok(Self { entries: map })
    }

    /// The two-mode binomial choice `{(0,0): 1/sqrt2, (1,0): 1/sqrt2}`.
    pub fn binomial() -> Self {
        let h = linalg::cr(std::f64::consts::FRAC_1_SQRT_2);
        Self::new([(vec![0, 0], h), (vec![1, 0], h)]).expect("valid table")
    }

    pub fn arity(&self) -> usize {
        self.entries.keys().next().map_or(0, Vec::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &c64)> {
        self.entries.iter()
    }

    pub fn get(&self, idx: &[usize]) -> Option<c64> {
        self.entries.get(idx).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Encoding angles of the passive frame unitary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Angles {
    None,
    DeltaPhi { delta: f64, phi: f64 },
    Pairwise { pairs: Vec<PairAngles> },
}

#[derive(Clone, Debug)]
pub struct Code {
    space: FockSpace,
    words: Vec<StateVector>,
    n: usize,
    k: Option<usize>,
    d: usize,
    angles: Angles,
    family: Family,
    table: Option<CoefficientTable>,
    frame: Operator,
}

pub fn default_cutoff(n: usize) -> usize {
    3 * n + 1
}

/// The "optimal" encoding preset `(pi/4, pi/(2N))`.
pub fn default_angles(n: usize) -> (f64, f64) {
    (PI / 4.0, PI / (2.0 * n as f64))
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        Err(Error::OddOrder(n))
    } else {
        Ok(())
    }
}

fn mixes_modes(delta: f64) -> bool {
    (2.0 * delta).sin().abs() > 1e-15
}

fn frame_for(space: FockSpace, angles: &Angles) -> Result<Operator> {
    match angles {
        Angles::None => Ok(Operator::identity(space)),
        Angles::DeltaPhi { delta, phi } => fock::beam_splitter(space, 0, 1, *delta, *phi),
        Angles::Pairwise { pairs } => fock::passive_unitary(space, pairs),
    }
}

impl Code {
    /// Build a code from explicit physical codewords and metadata. Words must
    /// be orthonormal.
    pub fn from_parts(
        words: Vec<StateVector>,
        n: usize,
        k: Option<usize>,
        angles: Angles,
        family: Family,
        table: Option<CoefficientTable>,
    ) -> Result<Self> {
        let space = words
            .first()
            .map(|w| w.space())
            .ok_or_else(|| Error::InvalidState("code needs at least one word".into()))?;
        let frame = frame_for(space, &angles)?;
        Self::with_frame(words, n, k, angles, family, table, frame)
    }

    fn with_frame(
        words: Vec<StateVector>,
        n: usize,
        k: Option<usize>,
        angles: Angles,
        family: Family,
        table: Option<CoefficientTable>,
        frame: Operator,
    ) -> Result<Self> {
        let space = words
            .first()
            .map(|w| w.space())
            .ok_or_else(|| Error::InvalidState("code needs at least one word".into()))?;
        for (i, wi) in words.iter().enumerate() {
            if wi.space() != space {
                return Err(Error::IncompatibleSpaces("codewords live in different spaces".into()));
            }
            let nd = (wi.norm() - 1.0).abs();
            if nd > 1e-12 {
                return Err(Error::NotOrthonormal(nd));
            }
            for wj in &words[..i] {
                let ov = wi.inner(wj).norm();
                if ov > ORTHO_TOL {
                    return Err(Error::NotOrthonormal(ov));
                }
            }
        }
        Ok(Self {
            space,
            d: words.len(),
            words,
            n,
            k,
            angles,
            family,
            table,
            frame,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn words(&self) -> &[StateVector] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &StateVector {
        &self.words[i]
    }

    /// Rotation order N.
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> Option<usize> {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn angles(&self) -> &Angles {
        &self.angles
    }

    /// `(delta, phi)` for two-mode codes, `(0, 0)` otherwise.
    pub fn delta_phi(&self) -> (f64, f64) {
        match self.angles {
            Angles::DeltaPhi { delta, phi } => (delta, phi),
            _ => (0.0, 0.0),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn table(&self) -> Option<&CoefficientTable> {
        self.table.as_ref()
    }

    /// The passive unitary `U_BS` that rotates the Fock-basis words.
    pub fn frame(&self) -> &Operator {
        &self.frame
    }

    /// Codewords as the columns of a `dim x d` isometry.
    pub fn isometry(&self) -> CMat {
        CMat::from_fn(self.space.dim(), self.d, |i, j| self.words[j].amplitudes()[i])
    }

    /// `U_BS^dag |k_N>`, the word before the frame rotation.
    pub fn unrotated_word(&self, k: usize) -> StateVector {
        let amps = self.frame.matrix().adjoint() * self.words[k].amplitudes();
        StateVector::new(self.space, amps).expect("shape preserved")
    }

    /// `U_BS exp(i 2 pi n_mode / N) U_BS^dag`.
    pub fn rotation_operator(&self, mode: usize) -> Result<Operator> {
        let r = fock::rotation(self.space, mode, 2.0 * PI / self.n as f64)?;
        Ok(r.transformed_by(&self.frame))
    }

    /// `U_BS exp(i angle n_mode) U_BS^dag`.
    pub fn framed_rotation(&self, mode: usize, angle: f64) -> Result<Operator> {
        Ok(fock::rotation(self.space, mode, angle)?.transformed_by(&self.frame))
    }

    /// `U_BS n_mode U_BS^dag`.
    pub fn framed_number(&self, mode: usize) -> Result<Operator> {
        Ok(fock::number_operator(self.space, mode)?.transformed_by(&self.frame))
    }

    /// `U_BS op U_BS^dag |v>` for an operator given in the Fock frame.
    pub fn apply_framed(&self, op: &Operator, v: &StateVector) -> StateVector {
        let u = self.frame.matrix();
        let inner = u.adjoint() * v.amplitudes();
        let amps = u * (op.matrix() * &inner);
        StateVector::new(self.space, amps).expect("shape preserved")
    }

    /// `<i_N| f(|j_N>)` for a linear map given by its action on kets.
    pub fn logical_action(&self, f: impl Fn(&StateVector) -> StateVector) -> CMat {
        let images: Vec<StateVector> = self.words.iter().map(&f).collect();
        CMat::from_fn(self.d, self.d, |i, j| self.words[i].inner(&images[j]))
    }

    /// Largest deviation from `R^(k)_N |i_N> = |i_N>` over modes and words.
    pub fn rotation_symmetry_defect(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for mode in 0..self.space.modes() {
            let r = fock::rotation(self.space, mode, 2.0 * PI / self.n as f64)?;
            for w in &self.words {
                let moved = self.apply_framed(&r, w);
                worst = worst.max(linalg::col_max_abs_diff(moved.amplitudes(), w.amplitudes()));
            }
        }
        Ok(worst)
    }
}

fn require_cutoff(cutoff: usize, required: usize) -> Result<()> {
    if cutoff < required {
        Err(Error::InsufficientCutoff { cutoff, required })
    } else {
        Ok(())
    }
}

/// `|0_N> = U (|0> + |2N>)/sqrt2 (x) |N>`, `|1_N> = U |N> (x) (|0> + |2N>)/sqrt2`.
pub fn two_mode_binomial(n: usize, delta: f64, phi: f64, cutoff: usize) -> Result<Code> {
    check_even(n)?;
    let mut code = two_mode_general(n, &CoefficientTable::binomial(), delta, phi, cutoff)?;
    code.family = Family::TwoModeBinomial;
    code.k = Some(2);
    Ok(code)
}

/// `|0_N> = U sum f_mn |2mN, (2n+1)N>` and `|1_N>` with the mode contents swapped.
pub fn two_mode_general(
    n: usize,
    table: &CoefficientTable,
    delta: f64,
    phi: f64,
    cutoff: usize,
) -> Result<Code> {
    check_even(n)?;
    if table.arity() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: table.arity(),
        });
    }
    let mut max_fock = 0;
    let mut max_total = 0;
    for (idx, _) in table.iter() {
        let a = 2 * idx[0] * n;
        let b = (2 * idx[1] + 1) * n;
        max_fock = max_fock.max(a.max(b));
        max_total = max_total.max(a + b);
    }
    require_cutoff(cutoff, max_fock + 1)?;
    if mixes_modes(delta) {
        require_cutoff(cutoff, max_total + 1)?;
    }
    let space = FockSpace::new(2, cutoff)?;
    let mut w0 = StateVector::zero(space);
    let mut w1 = StateVector::zero(space);
    for (idx, &f) in table.iter() {
        let a = 2 * idx[0] * n;
        let b = (2 * idx[1] + 1) * n;
        w0 = w0.add(&StateVector::basis(space, &[a, b])?.scaled(f));
        w1 = w1.add(&StateVector::basis(space, &[b, a])?.scaled(f));
    }
    let frame = fock::beam_splitter(space, 0, 1, delta, phi)?;
    let words = vec![frame.apply(&w0), frame.apply(&w1)];
    Code::with_frame(
        words,
        n,
        None,
        Angles::DeltaPhi { delta, phi },
        Family::TwoModeGeneral,
        Some(table.clone()),
        frame,
    )
}

/// Qudit code on `d` modes. Word `k` places `(d n_r + r) N` photons on mode
/// `p`, where `r = (k + p) mod d` and `n_r` is the table index for residue
/// `r`; the result is rotated by the passive unitary built from `pairs`.
pub fn multimode_qudit(
    d: usize,
    n: usize,
    table: &CoefficientTable,
    pairs: &[PairAngles],
    cutoff: usize,
) -> Result<Code> {
    check_even(n)?;
    if d < 2 {
        return Err(Error::Unsupported(format!("qudit dimension {d}")));
    }
    if table.arity() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: table.arity(),
        });
    }
    let mut max_fock = 0;
    let mut max_total = 0;
    for (idx, _) in table.iter() {
        let photons: Vec<usize> = (0..d).map(|r| (d * idx[r] + r) * n).collect();
        max_fock = max_fock.max(*photons.iter().max().unwrap());
        max_total = max_total.max(photons.iter().sum::<usize>());
    }
    require_cutoff(cutoff, max_fock + 1)?;
    if !pairs.is_empty() {
        require_cutoff(cutoff, max_total + 1)?;
    }
    let space = FockSpace::new(d, cutoff)?;
    let frame = fock::passive_unitary(space, pairs)?;
    let mut words = Vec::with_capacity(d);
    for k in 0..d {
        let mut w = StateVector::zero(space);
        for (idx, &f) in table.iter() {
            let occ: Vec<usize> = (0..d)
                .map(|p| {
                    let r = (k + p) % d;
                    (d * idx[r] + r) * n
                })
                .collect();
            w = w.add(&StateVector::basis(space, &occ)?.scaled(f));
        }
        words.push(frame.apply(&w));
    }
    let angles = if pairs.is_empty() {
        Angles::None
    } else {
        Angles::Pairwise {
            pairs: pairs.to_vec(),
        }
    };
    Code::with_frame(words, n, None, angles, Family::MultimodeQudit, Some(table.clone()), frame)
}

fn binomial_coefficient(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Single-mode binomial code: `|0/1> = sum_{p even/odd} sqrt(C(K,p)/2^(K-1)) |pN>`.
/// For `K = 2` this is `(|0> + |2N>)/sqrt2` and `|N>`.
pub fn single_mode_binomial(n: usize, k: usize, cutoff: usize) -> Result<Code> {
    check_even(n)?;
    if k == 0 {
        return Err(Error::Unsupported("K must be positive".into()));
    }
    require_cutoff(cutoff, k * n + 1)?;
    let space = FockSpace::new(1, cutoff)?;
    let norm = 2f64.powi(k as i32 - 1);
    let mut words = vec![StateVector::zero(space), StateVector::zero(space)];
    for p in 0..=k {
        let amp = linalg::cr((binomial_coefficient(k, p) / norm).sqrt());
        words[p % 2] = words[p % 2].add(&StateVector::basis(space, &[p * n])?.scaled(amp));
    }
    Code::from_parts(words, n, Some(k), Angles::None, Family::SingleModeBinomial, None)
}

/// Fock `|0>`, `|1>` of one mode.
pub fn trivial_code(cutoff: usize) -> Result<Code> {
    require_cutoff(cutoff, 2)?;
    let space = FockSpace::new(1, cutoff)?;
    let words = vec![
        StateVector::basis(space, &[0])?,
        StateVector::basis(space, &[1])?,
    ];
    Code::from_parts(words, 1, None, Angles::None, Family::Trivial, None)
}

/// `|+-_N> = (|0_N> +- |1_N>)/sqrt2`.
pub fn dual_words(code: &Code) -> Result<(StateVector, StateVector)> {
    if code.d != 2 {
        return Err(Error::NotQubit(code.d));
    }
    let h = linalg::cr(std::f64::consts::FRAC_1_SQRT_2);
    let plus = code.words[0].add(&code.words[1]).scaled(h);
    let minus = code.words[0].add(&code.words[1].scaled(-ONE)).scaled(h);
    Ok((plus, minus))
}

/// `P_C = sum_k |k_N><k_N|`.
pub fn projector(code: &Code) -> Operator {
    let v = code.isometry();
    Operator::new(code.space, &v * v.adjoint()).expect("isometry matches space")
}

/// `exp(-i pi/2 G-_{i,i+1})`: swaps the contents of modes `i` and `i+1`
/// (with sign `(-1)^{n_i}`).
pub fn half_swap(space: FockSpace, i: usize) -> Result<Operator> {
    let (_, gm) = bs_generators(space, i, i + 1)?;
    matrix_exponential_blocked(&gm, c64::new(0.0, -PI / 2.0))
}

/// Unframed cyclic left shift of mode contents, `mode p <- mode p+1`, equal
/// to `exp(-i pi/2 G-_{M-2,M-1}) ... exp(-i pi/2 G-_{0,1})`.
///
/// Each factor sends `|.., n_i, n_{i+1}, ..>` to `(-1)^{n_i} |.., n_{i+1}, n_i, ..>`,
/// so the product is a signed permutation and is filled in directly.
pub fn cyclic_shift(space: FockSpace) -> Result<Operator> {
    let modes = space.modes();
    let n = space.dim();
    let mut m = linalg::zeros(n, n);
    for col in 0..n {
        let mut occ = space.occupations(col);
        let mut sign = 1.0;
        for i in 0..modes - 1 {
            if occ[i] % 2 == 1 {
                sign = -sign;
            }
            occ.swap(i, i + 1);
        }
        m[(space.index(&occ)?, col)] = linalg::cr(sign);
    }
    Operator::new(space, m)
}

/// Native logical `X` and `Z`: `X = U S U^dag` with `S` the product of
/// adjacent half swaps, and `Z = U exp(i 2 pi n_0 / (N d)) U^dag`. Single-mode
/// codes get `Z` only in this form; their `X` is the codespace Pauli padded
/// with the identity on the complement.
pub fn logical_operators(code: &Code) -> Result<(Operator, Operator)> {
    let space = code.space;
    let d = code.d as f64;
    let z_angle = 2.0 * PI / (code.n as f64 * d);
    if space.modes() >= 2 && matches!(
        code.family,
        Family::TwoModeBinomial | Family::TwoModeGeneral | Family::MultimodeQudit
    ) {
        let x = cyclic_shift(space)?.transformed_by(&code.frame);
        let z = code.framed_rotation(0, z_angle)?;
        return Ok((x, z));
    }
    // Codespace Paulis padded by the identity on the complement.
    let v = code.isometry();
    let p = &v * v.adjoint();
    let comp = linalg::identity(space.dim()) - &p;
    let dd = code.d;
    let xl = CMat::from_fn(dd, dd, |i, j| if i == (j + 1) % dd { ONE } else { linalg::ZERO });
    let zl = CMat::from_fn(dd, dd, |i, j| {
        if i == j {
            c64::cis(2.0 * PI * i as f64 / d)
        } else {
            linalg::ZERO
        }
    });
    let x = &(&v * &xl) * v.adjoint() + &comp;
    let z = &(&v * &zl) * v.adjoint() + &comp;
    Ok((Operator::new(space, x)?, Operator::new(space, z)?))
}

/// Matrix of `op` restricted to the codespace, `<i_N| op |j_N>`.
pub fn logical_matrix(code: &Code, op: &Operator) -> CMat {
    linalg::compress(op.matrix(), &code.isometry())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CoefficientEntry {
    index: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Amplitude {
    index: usize,
    re: f64,
    im: f64,
}

/// JSON form of a [`Code`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeDocument {
    family: Family,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: Option<usize>,
    d: usize,
    angles: Angles,
    modes: usize,
    cutoff: usize,
    coefficients: Option<Vec<CoefficientEntry>>,
    words: Vec<Vec<Amplitude>>,
}

impl Code {
    pub fn to_document(&self) -> CodeDocument {
        CodeDocument {
            family: self.family,
            n: self.n,
            k: self.k,
            d: self.d,
            angles: self.angles.clone(),
            modes: self.space.modes(),
            cutoff: self.space.cutoff(),
            coefficients: self.table.as_ref().map(|t| {
                t.iter()
                    .map(|(idx, f)| CoefficientEntry {
                        index: idx.clone(),
                        re: f.re,
                        im: f.im,
                    })
                    .collect()
            }),
            words: self
                .words
                .iter()
                .map(|w| {
                    let a = w.amplitudes();
                    (0..a.nrows())
                        .filter(|&i| a[i] != linalg::ZERO)
                        .map(|i| Amplitude {
                            index: i,
                            re: a[i].re,
                            im: a[i].im,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &CodeDocument) -> Result<Self> {
        let space = FockSpace::new(doc.modes, doc.cutoff)?;
        let mut words = Vec::with_capacity(doc.words.len());
        for amps in &doc.words {
            let mut col = linalg::CCol::zeros(space.dim());
            for a in amps {
                if a.index >= space.dim() {
                    return Err(Error::Serialization(format!("amplitude index {} out of range", a.index)));
                }
                col[a.index] = c64::new(a.re, a.im);
            }
            words.push(StateVector::new(space, col)?);
        }
        if words.len() != doc.d {
            return Err(Error::Serialization("word count differs from d".into()));
        }
        let table = match &doc.coefficients {
            Some(entries) => Some(CoefficientTable::new(
                entries
                    .iter()
                    .map(|e| (e.index.clone(), c64::new(e.re, e.im))),
            )?),
            None => None,
        };
        Code::from_parts(words, doc.n, doc.k, doc.angles.clone(), doc.family, table)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_document()).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CodeDocument =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        Self::from_document(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cr;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn binomial_words_in_fock_basis() {
        let c = two_mode_binomial(2, 0.0, 0.0, 7).unwrap();
        let w0 = c.word(0);
        assert!((w0.amplitude(&[0, 2]).unwrap() - cr(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((w0.amplitude(&[4, 2]).unwrap() - cr(FRAC_1_SQRT_2)).norm() < 1e-15);
        let c4 = two_mode_binomial(4, 0.0, 0.0, 13).unwrap();
        let w1 = c4.word(1);
        assert!((w1.amplitude(&[4, 0]).unwrap() - cr(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((w1.amplitude(&[4, 8]).unwrap() - cr(FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(two_mode_binomial(3, 0.0, 0.0, 10), Err(Error::OddOrder(3))));
        assert!(matches!(
            two_mode_binomial(2, 0.0, 0.0, 4),
            Err(Error::InsufficientCutoff { .. })
        ));
        // a mixing frame needs room for all 3N photons in one mode
        assert!(two_mode_binomial(2, 0.3, 0.0, 5).is_err());
        assert!(two_mode_binomial(2, 0.0, 0.0, 5).is_ok());
    }

    #[test]
    fn single_mode_and_trivial() {
        let c = single_mode_binomial(2, 2, 5).unwrap();
        let n = fock::number_operator(c.space(), 0).unwrap();
        for w in c.words() {
            assert!((w.expectation(&n).re - 2.0).abs() < 1e-14);
        }
        assert!((c.word(1).amplitude(&[2]).unwrap() - ONE).norm() < 1e-15);
        let t = trivial_code(3).unwrap();
        assert!(!t.family().is_rotation_symmetric());
        let r2 = t.framed_rotation(0, PI).unwrap();
        assert!((r2.apply(t.word(1)).inner(t.word(1)) + ONE).norm() < 1e-15);
    }

    #[test]
    fn table_renormalizes() {
        let t = CoefficientTable::new([(vec![0, 0], cr(3.0)), (vec![1, 0], cr(4.0))]).unwrap();
        assert!((t.get(&[0, 0]).unwrap() - cr(0.6)).norm() < 1e-15);
        assert!(CoefficientTable::new([(vec![0], cr(1.0)), (vec![0, 1], cr(1.0))]).is_err());
    }

    #[test]
    fn cyclic_shift_equals_half_swap_product() {
        for (modes, cutoff) in [(2, 5), (3, 4)] {
            let space = FockSpace::new(modes, cutoff).unwrap();
            let mut prod = Operator::identity(space);
            for i in 0..modes - 1 {
                prod = &half_swap(space, i).unwrap() * &prod;
            }
            let shift = cyclic_shift(space).unwrap();
            // exact away from the truncation boundary
            for col in 0..space.dim() {
                if space.total_photons(col) < cutoff {
                    for row in 0..space.dim() {
                        let diff = (prod.matrix()[(row, col)] - shift.matrix()[(row, col)]).norm();
                        assert!(diff < 1e-12, "modes={modes} col={col}");
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let c = two_mode_binomial(2, 0.4, 0.3, 7).unwrap();
        let back = Code::from_json(&c.to_json().unwrap()).unwrap();
        for k in 0..2 {
            let diff = linalg::col_max_abs_diff(c.word(k).amplitudes(), back.word(k).amplitudes());
            assert!(diff <= 1e-15);
        }
        assert_eq!(back.family(), Family::TwoModeBinomial);
        assert!(back.frame().max_abs_diff(c.frame()) < 1e-15);
    }
}
