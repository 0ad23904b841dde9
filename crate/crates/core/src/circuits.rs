//! Logical gates on two-mode codes: the Kerr-type `S` and `CZ`, the
//! beam-splitter-controlled `CX`, teleported `H`/`T`, and the exact
//! error-correction circuit for correlated dephasing.
//!
//! Two-register states are kept as `dim_a x dim_b` amplitude matrices, so a
//! four-mode operator is never formed densely. Every gate is defined in the
//! Fock frame and conjugated by the codes' beam-splitter frames.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channels::PhaseMixture;
use crate::codes::{self, Code, Family};
use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockSpace, Operator, StateVector};
use crate::linalg::{self, c64, cr, CCol, CMat};

/// Amplitudes `psi[i, j]` of a state on two encoded registers.
#[derive(Clone, Debug)]
pub struct PairState {
    space_a: FockSpace,
    space_b: FockSpace,
    amps: CMat,
}

impl PairState {
    pub fn product(a: &StateVector, b: &StateVector) -> Self {
        Self {
            space_a: a.space(),
            space_b: b.space(),
            amps: linalg::outer(a.amplitudes(), &conj_col(b.amplitudes())),
        }
    }

    pub fn amplitudes(&self) -> &CMat {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        linalg::frobenius(&self.amps)
    }

    /// Reduced state of register `a`.
    pub fn reduced_a(&self) -> CMat {
        &self.amps * self.amps.adjoint()
    }

    /// Reduced state of register `b`.
    pub fn reduced_b(&self) -> CMat {
        let t = self.amps.transpose().to_owned();
        &t * t.adjoint()
    }

    /// `Tr_a[(E (x) I) |psi><psi|]` for an effect `E` on register `a`.
    pub fn conditional_b(&self, effect: &CMat) -> CMat {
        let t = self.amps.transpose().to_owned();
        &t * effect.transpose() * t.adjoint()
    }

    pub fn inner(&self, other: &PairState) -> c64 {
        let mut s = c64::new(0.0, 0.0);
        for j in 0..self.amps.ncols() {
            for i in 0..self.amps.nrows() {
                s += self.amps[(i, j)].conj() * other.amps[(i, j)];
            }
        }
        s
    }
}

fn conj_col(v: &CCol) -> CCol {
    CCol::from_fn(v.nrows(), |i| v[i].conj())
}

fn conj_mat(m: &CMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Register {
    A,
    B,
}

/// `(F_a (x) F_b) sum_n |n><n|_c (x) exp(i theta n H) (F_a (x) F_b)^dag`, where
/// `n` is the occupation of the first mode of the control register and `H`
/// acts on the other register.
#[derive(Clone, Debug)]
pub struct ControlledGate {
    label: String,
    space_a: FockSpace,
    space_b: FockSpace,
    frame_a: CMat,
    frame_b: CMat,
    control: Register,
    /// `exp(i theta n H)` for each control occupation `n`.
    blocks: Vec<CMat>,
}

impl ControlledGate {
    fn new(label: &str, a: &Code, b: &Code, control: Register, generator: &Operator, theta: f64) -> Result<Self> {
        let (control_space, target_space) = match control {
            Register::A => (a.space(), b.space()),
            Register::B => (b.space(), a.space()),
        };
        if generator.space() != target_space {
            return Err(Error::IncompatibleSpaces("generator must act on the target register".into()));
        }
        let (vals, vecs) = linalg::eigh(&linalg::hermitize(generator.matrix()));
        let blocks = (0..control_space.cutoff())
            .map(|n| {
                let scaled = CMat::from_fn(vecs.nrows(), vecs.ncols(), |r, c| {
                    vecs[(r, c)] * c64::cis(theta * n as f64 * vals[c])
                });
                &scaled * vecs.adjoint()
            })
            .collect();
        Ok(Self {
            label: label.to_string(),
            space_a: a.space(),
            space_b: b.space(),
            frame_a: a.frame().matrix().clone(),
            frame_b: b.frame().matrix().clone(),
            control,
            blocks,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, psi: &PairState) -> PairState {
        self.apply_inner(psi, false)
    }

    pub fn apply_inverse(&self, psi: &PairState) -> PairState {
        self.apply_inner(psi, true)
    }

    fn apply_inner(&self, psi: &PairState, inverse: bool) -> PairState {
        assert!(psi.space_a == self.space_a && psi.space_b == self.space_b);
        // (A (x) B) psi  <->  A M B^T
        let mut m = self.frame_a.adjoint() * &psi.amps * conj_mat(&self.frame_b);
        let ca = self.space_a.cutoff();
        let cb = self.space_b.cutoff();
        let pick = |n: usize| {
            if inverse {
                self.blocks[n].adjoint().to_owned()
            } else {
                self.blocks[n].clone()
            }
        };
        match self.control {
            Register::A => {
                let rows = m.nrows() / ca;
                for n in 0..ca {
                    let v = pick(n);
                    let block = m.as_ref().subrows(n * rows, rows) * v.transpose();
                    m.as_mut().subrows_mut(n * rows, rows).copy_from(&block);
                }
            }
            Register::B => {
                let cols = m.ncols() / cb;
                for n in 0..cb {
                    let v = pick(n);
                    let block = &v * m.as_ref().subcols(n * cols, cols);
                    m.as_mut().subcols_mut(n * cols, cols).copy_from(&block);
                }
            }
        }
        let amps = &self.frame_a * m * self.frame_b.transpose();
        PairState {
            space_a: self.space_a,
            space_b: self.space_b,
            amps,
        }
    }

    /// `<i j| G |k l>` on the product codespace, row index `2 i + j`.
    pub fn logical_matrix(&self, a: &Code, b: &Code) -> CMat {
        let (da, db) = (a.dim(), b.dim());
        let images: Vec<PairState> = (0..da * db)
            .map(|c| self.apply(&PairState::product(a.word(c / db), b.word(c % db))))
            .collect();
        CMat::from_fn(da * db, da * db, |r, c| {
            PairState::product(a.word(r / db), b.word(r % db)).inner(&images[c])
        })
    }

    /// `||(I - P) G P||` on the product codespace.
    pub fn leakage(&self, a: &Code, b: &Code) -> f64 {
        let (da, db) = (a.dim(), b.dim());
        let va = a.isometry();
        let vb = b.isometry();
        let pa = &va * va.adjoint();
        let pb = &vb * vb.adjoint();
        let outs: Vec<CMat> = (0..da * db)
            .map(|c| {
                let g = self.apply(&PairState::product(a.word(c / db), b.word(c % db))).amps;
                // P psi <-> Pa M Pb^T
                &g - &pa * &g * pb.transpose()
            })
            .collect();
        let gram = CMat::from_fn(da * db, da * db, |r, c| {
            let mut s = c64::new(0.0, 0.0);
            for j in 0..outs[r].ncols() {
                for i in 0..outs[r].nrows() {
                    s += outs[r][(i, j)].conj() * outs[c][(i, j)];
                }
            }
            s
        });
        linalg::op_norm_hermitian(&gram).sqrt()
    }
}

fn require_two_mode(code: &Code) -> Result<()> {
    if code.space().modes() != 2 || !matches!(code.family(), Family::TwoModeBinomial | Family::TwoModeGeneral) {
        return Err(Error::Unsupported(format!(
            "gate needs a two-mode rotation-symmetric code, got {}",
            code.family().as_str()
        )));
    }
    if code.dim() != 2 {
        return Err(Error::NotQubit(code.dim()));
    }
    if code.order() == 0 || code.order() % 2 == 1 {
        return Err(Error::OddOrder(code.order()));
    }
    Ok(())
}

/// `U_BS exp(i pi n_1^2 / (2 N^2)) U_BS^dag`.
pub fn s_gate(code: &Code) -> Result<Operator> {
    require_two_mode(code)?;
    let space = code.space();
    let n = code.order() as f64;
    let d = Operator::diagonal(space, |i| {
        let k = space.occupation(i, 0) as f64;
        c64::cis(PI * k * k / (2.0 * n * n))
    });
    Ok(d.transformed_by(code.frame()))
}

/// `exp(i pi n_1 n_3 / (N M))` between the first modes of the two codes.
pub fn cz_gate(a: &Code, b: &Code) -> Result<ControlledGate> {
    require_two_mode(a)?;
    require_two_mode(b)?;
    let theta = PI / (a.order() * b.order()) as f64;
    let n3 = fock::number_operator(b.space(), 0)?;
    ControlledGate::new("CZ", a, b, Register::A, &n3, theta)
}

/// `CX_NL = exp(i pi/(2N) n_1 G-_34)` with register `a` as control, or
/// `CX_LN = exp(i pi/(2L) n_3 G-_12)` with register `b` as control.
pub fn cx_gate(a: &Code, b: &Code, control: Register) -> Result<ControlledGate> {
    require_two_mode(a)?;
    require_two_mode(b)?;
    match control {
        Register::A => {
            let (_, gm) = fock::bs_generators(b.space(), 0, 1)?;
            ControlledGate::new("CX_NL", a, b, control, &gm, PI / (2 * a.order()) as f64)
        }
        Register::B => {
            let (_, gm) = fock::bs_generators(a.space(), 0, 1)?;
            ControlledGate::new("CX_LN", a, b, control, &gm, PI / (2 * b.order()) as f64)
        }
    }
}

/// Logical action of a gate, compared with its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub label: String,
    /// Row-major `[re, im]` entries.
    pub logical: Vec<Vec<[f64; 2]>>,
    pub target: Vec<Vec<[f64; 2]>>,
    /// Operator-norm distance to the target (after the best global phase
    /// when `up_to_phase`).
    pub deviation: f64,
    pub up_to_phase: bool,
    /// `||(I - P) G P||`.
    pub leakage: f64,
}

fn to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// `||a - e^{i t} b||` with `t` the phase of `tr(b^dag a)` when
/// `up_to_phase`.
pub fn gate_distance(a: &CMat, b: &CMat, up_to_phase: bool) -> f64 {
    let phase = if up_to_phase {
        let ov = linalg::trace(&(b.adjoint() * a));
        if ov.norm() > 0.0 {
            ov / ov.norm()
        } else {
            cr(1.0)
        }
    } else {
        cr(1.0)
    };
    linalg::op_norm(&(a - linalg::scale(b, phase)))
}

impl GateReport {
    pub fn new(label: &str, logical: &CMat, target: &CMat, leakage: f64, up_to_phase: bool) -> Self {
        Self {
            label: label.to_string(),
            logical: to_rows(logical),
            target: to_rows(target),
            deviation: gate_distance(logical, target, up_to_phase),
            up_to_phase,
            leakage,
        }
    }

    /// Report for a single-register operator.
    pub fn single(label: &str, code: &Code, op: &Operator, target: &CMat, up_to_phase: bool) -> Self {
        let logical = codes::logical_matrix(code, op);
        let v = code.isometry();
        let image = op.matrix() * &v;
        let leak = &image - &v * (v.adjoint() * &image);
        Self::new(label, &logical, target, linalg::op_norm(&leak), up_to_phase)
    }

    pub fn two(gate: &ControlledGate, a: &Code, b: &Code, target: &CMat) -> Self {
        Self::new(gate.label(), &gate.logical_matrix(a, b), target, gate.leakage(a, b), false)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Logical target matrices.
pub mod targets {
    use super::*;

    pub fn s() -> CMat {
        diag(&[cr(1.0), c64::new(0.0, 1.0)])
    }

    pub fn t() -> CMat {
        diag(&[cr(1.0), c64::cis(PI / 4.0)])
    }

    pub fn z() -> CMat {
        diag(&[cr(1.0), cr(-1.0)])
    }

    pub fn x() -> CMat {
        CMat::from_fn(2, 2, |i, j| cr(if i != j { 1.0 } else { 0.0 }))
    }

    pub fn h() -> CMat {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMat::from_fn(2, 2, |i, j| cr(if i == 1 && j == 1 { -h } else { h }))
    }

    pub fn cz() -> CMat {
        diag(&[cr(1.0), cr(1.0), cr(1.0), cr(-1.0)])
    }

    /// Control on the first qubit.
    pub fn cnot() -> CMat {
        let mut m = linalg::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[(r, c)] = cr(1.0);
        }
        m
    }

    /// Control on the second qubit.
    pub fn cnot_reversed() -> CMat {
        let mut m = linalg::zeros(4, 4);
        for (r, c) in [(0, 0), (2, 2), (1, 3), (3, 1)] {
            m[(r, c)] = cr(1.0);
        }
        m
    }

    fn diag(v: &[c64]) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { cr(0.0) })
    }
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
///
/// Eigenvalues below `1e-12` of the largest are treated as zero in both
/// square roots; otherwise rounding noise of order `1e-16` would enter as
/// `1e-8`.
pub fn state_fidelity(rho: &CMat, sigma: &CMat) -> f64 {
    const FLOOR: f64 = 1e-12;
    let rho = linalg::hermitize(rho);
    let top = linalg::eigvalsh(&rho).last().copied().unwrap_or(0.0).max(0.0);
    let s = linalg::hermitian_function(&rho, |l| cr(if l > FLOOR * top { l.sqrt() } else { 0.0 }));
    let vals = linalg::eigvalsh(&linalg::hermitize(&(&s * sigma * &s)));
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let t: f64 = vals.iter().filter(|&&l| l > FLOOR * top).map(|l| l.sqrt()).sum();
    t * t
}

/// `V rho V^dag` for a logical density matrix.
pub fn encode_density(code: &Code, rho: &CMat) -> CMat {
    let v = code.isometry();
    &v * rho * v.adjoint()
}

/// Codespace block `<i_N| rho |j_N>` of a physical density matrix.
pub fn decode_density(code: &Code, rho: &CMat) -> CMat {
    linalg::compress(rho, &code.isometry())
}

/// `{(p_k, |psi_k>)}` with `rho = sum p_k |psi_k><psi_k|`, dropping weights
/// at or below `1e-14`.
fn ensemble(rho: &CMat) -> Vec<(f64, CCol)> {
    let (vals, vecs) = linalg::eigh(&linalg::hermitize(rho));
    vals.iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-14)
        .map(|(k, &l)| (l, CCol::from_fn(vecs.nrows(), |r| vecs[(r, k)])))
        .collect()
}

fn check_logical_state(rho: &CMat) -> Result<()> {
    if rho.nrows() != 2 || rho.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.nrows(),
        });
    }
    let tr = linalg::trace(rho);
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 || linalg::hermitian_defect(rho) > 1e-10 {
        return Err(Error::InvalidState("logical state must be a unit-trace Hermitian 2x2 matrix".into()));
    }
    if linalg::eigvalsh(&linalg::hermitize(rho))[0] < -1e-10 {
        return Err(Error::InvalidState("logical state is not positive".into()));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CorrelatedEcOutput {
    /// Auxiliary register after tracing out the data modes.
    pub aux: DensityMatrix,
    /// Data register after tracing out the auxiliary modes.
    pub data: DensityMatrix,
    /// Codespace block of `aux`.
    pub aux_logical: CMat,
    /// Fidelity of `aux_logical` with the input logical state.
    pub fidelity: f64,
}

/// `CX_LN CX_NL (N(rho_N) (x) |0_L><0_L|) CX_NL^dag CX_LN^dag` for the
/// correlated phase mixture `N`, reduced to each register.
pub fn correlated_ec_circuit(
    code_n: &Code,
    code_l: &Code,
    mixture: &PhaseMixture,
    rho_logical: &CMat,
) -> Result<CorrelatedEcOutput> {
    require_two_mode(code_n)?;
    require_two_mode(code_l)?;
    check_logical_state(rho_logical)?;
    let cx_nl = cx_gate(code_n, code_l, Register::A)?;
    let cx_ln = cx_gate(code_n, code_l, Register::B)?;
    let space_n = code_n.space();
    let dn = space_n.dim();
    let dl = code_l.space().dim();
    let v = code_n.isometry();
    let mut aux = linalg::zeros(dl, dl);
    let mut data = linalg::zeros(dn, dn);
    for (w, psi) in ensemble(rho_logical) {
        let encoded = &v * &psi;
        for &(phi, p) in mixture.points() {
            let kicked = CCol::from_fn(dn, |i| encoded[i] * c64::cis(phi * space_n.total_photons(i) as f64));
            let state = PairState::product(&StateVector::new(space_n, kicked)?, code_l.word(0));
            let out = cx_ln.apply(&cx_nl.apply(&state));
            aux += linalg::scale(&out.reduced_b(), cr(w * p));
            data += linalg::scale(&out.reduced_a(), cr(w * p));
        }
    }
    let aux_logical = decode_density(code_l, &aux);
    let fidelity = state_fidelity(rho_logical, &aux_logical);
    Ok(CorrelatedEcOutput {
        aux: DensityMatrix::from_matrix(code_l.space(), linalg::hermitize(&aux))?,
        data: DensityMatrix::from_matrix(space_n, linalg::hermitize(&data))?,
        aux_logical,
        fidelity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    H,
    T,
}

/// How the data register is read out in a teleportation gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementModel {
    /// Projective measurement onto `|+_N>` (outcome 0) and its complement.
    DualBasis,
    /// Canonical phase measurement of both (frame) modes, outcome 0 when
    /// `cos(N theta_1) cos(N theta_2) >= 0`.
    PhaseBinned,
}

/// Effects `(E_0, E_1)` on one register for a measurement model.
pub fn measurement_effects(code: &Code, model: MeasurementModel) -> Result<(CMat, CMat)> {
    let n = code.space().dim();
    let e0 = match model {
        MeasurementModel::DualBasis => {
            let (plus, _) = codes::dual_words(code)?;
            linalg::outer(plus.amplitudes(), plus.amplitudes())
        }
        MeasurementModel::PhaseBinned => {
            let c = code.space().cutoff();
            let b = phase_bin(c, code.order());
            let comp = linalg::identity(c) - &b;
            let e = linalg::kron(&b, &b) + linalg::kron(&comp, &comp);
            linalg::transform_by(&e, code.frame().matrix())
        }
    };
    let e1 = linalg::identity(n) - &e0;
    Ok((e0, e1))
}

/// Single-mode effect of the phase window `cos(N theta) >= 0`:
/// `B[n, m] = 1/2` on the diagonal, `N sin(pi k / (2N)) / (pi k)` when
/// `k = n - m` is a nonzero multiple of `N`, zero otherwise.
pub fn phase_bin(cutoff: usize, n: usize) -> CMat {
    CMat::from_fn(cutoff, cutoff, |r, c| {
        let k = r as i64 - c as i64;
        if k == 0 {
            cr(0.5)
        } else if k % n as i64 == 0 {
            let kf = k as f64;
            let nf = n as f64;
            cr(nf * (PI * kf / (2.0 * nf)).sin() / (PI * kf))
        } else {
            cr(0.0)
        }
    })
}

/// One measurement record of a teleportation gadget.
#[derive(Clone, Debug)]
pub struct TeleportBranch {
    /// Outcome per stage; the last entry is the bit `b` of `X^b G`.
    pub outcomes: Vec<u8>,
    pub probability: f64,
    /// Output register, normalized.
    pub state: DensityMatrix,
    /// `X^b G rho G^dag X^b`, encoded.
    pub target: DensityMatrix,
    /// `tr(state target)`; the fidelity when the input is pure.
    pub fidelity: f64,
    /// Largest entry of `state - target`.
    pub deviation: f64,
}

struct Stage {
    outcome: u8,
    probability: f64,
    members: Vec<(f64, CCol)>,
}

/// `CZ` from the data members onto `aux`, then the data readout.
fn gadget(code: &Code, members: &[(f64, CCol)], aux: &StateVector, effects: &(CMat, CMat)) -> Result<Vec<Stage>> {
    let cz = cz_gate(code, code)?;
    let n = code.space().dim();
    let mut conditional = [linalg::zeros(n, n), linalg::zeros(n, n)];
    for (w, psi) in members {
        let data = StateVector::new(code.space(), psi.clone())?;
        let out = cz.apply(&PairState::product(&data, aux));
        conditional[0] += linalg::scale(&out.conditional_b(&effects.0), cr(*w));
        conditional[1] += linalg::scale(&out.conditional_b(&effects.1), cr(*w));
    }
    Ok(conditional
        .iter()
        .enumerate()
        .filter_map(|(b, rho)| {
            let p = linalg::trace(rho).re;
            (p > 1e-14).then(|| Stage {
                outcome: b as u8,
                probability: p,
                members: ensemble(&linalg::scale(rho, cr(1.0 / p))),
            })
        })
        .collect())
}

fn apply_to_members(op: &CMat, members: Vec<(f64, CCol)>) -> Vec<(f64, CCol)> {
    members.into_iter().map(|(w, v)| (w, op * &v)).collect()
}

fn members_density(members: &[(f64, CCol)], n: usize) -> CMat {
    let mut rho = linalg::zeros(n, n);
    for (w, v) in members {
        rho += linalg::scale(&linalg::outer(v, v), cr(*w));
    }
    rho
}

/// Teleported `H` or `T` on `code`, every outcome branch enumerated.
///
/// `H`: data `CZ` auxiliary `|+_N>`, readout of the data; the auxiliary holds
/// `X^b H rho`. `T`: the `H` gadget followed by a second gadget with
/// auxiliary `|T_N>`, which leaves `T X^b2 Z^b1 rho`; the native `Z^b1` and
/// `S^dag^b2` corrections turn this into `X^b2 T rho` up to a global phase.
/// The branch with all outcomes 0 needs no correction.
pub fn teleported_gate(
    kind: GateKind,
    code: &Code,
    rho_logical: &CMat,
    model: MeasurementModel,
) -> Result<Vec<TeleportBranch>> {
    require_two_mode(code)?;
    check_logical_state(rho_logical)?;
    let n = code.space().dim();
    let effects = measurement_effects(code, model)?;
    let (plus, _) = codes::dual_words(code)?;
    let v = code.isometry();
    let input: Vec<(f64, CCol)> = ensemble(rho_logical).into_iter().map(|(w, psi)| (w, &v * &psi)).collect();

    let mut records: Vec<(Vec<u8>, f64, Vec<(f64, CCol)>)> = gadget(code, &input, &plus, &effects)?
        .into_iter()
        .map(|s| (vec![s.outcome], s.probability, s.members))
        .collect();

    if kind == GateKind::T {
        let t_state = code.word(0).add(&code.word(1).scaled(c64::cis(PI / 4.0))).scaled(cr(std::f64::consts::FRAC_1_SQRT_2));
        let (_, z) = codes::logical_operators(code)?;
        let s_dag = s_gate(code)?.dagger();
        let mut next = Vec::new();
        for (outs, p, members) in records {
            for s in gadget(code, &members, &t_state, &effects)? {
                let mut m = s.members;
                if outs[0] == 1 {
                    m = apply_to_members(z.matrix(), m);
                }
                if s.outcome == 1 {
                    m = apply_to_members(s_dag.matrix(), m);
                }
                let mut o = outs.clone();
                o.push(s.outcome);
                next.push((o, p * s.probability, m));
            }
        }
        records = next;
    }

    let gate = match kind {
        GateKind::H => targets::h(),
        GateKind::T => targets::t(),
    };
    records
        .into_iter()
        .map(|(outcomes, probability, members)| {
            let b = *outcomes.last().expect("at least one stage");
            let g = if b == 1 { targets::x() * &gate } else { gate.clone() };
            let target = encode_density(code, &(&g * rho_logical * g.adjoint()));
            let state = linalg::hermitize(&members_density(&members, n));
            let fidelity = linalg::trace(&(&state * &target)).re;
            let deviation = linalg::max_abs_diff(&state, &target);
            Ok(TeleportBranch {
                outcomes,
                probability,
                state: DensityMatrix::from_matrix(code.space(), state)?,
                target: DensityMatrix::from_matrix(code.space(), target)?,
                fidelity,
                deviation,
            })
        })
        .collect()
}
