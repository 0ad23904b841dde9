//! Knill-Laflamme analysis, first-order error operators and the analytic
//! modular-measurement recovery maps for the smallest two-mode binomial codes.
//!
//! Everything here lives in the unrotated frame: the codewords are the plain
//! Fock-basis words and the beam splitter is absorbed into the channel,
//! `N~(rho) = U^dag N(U rho U^dag) U`. [`RecoveryMap::in_frame`] moves a map
//! to the rotated (physical) frame when needed.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::codes::{self, Code};
use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, Operator, StateVector, Tensor};
use crate::linalg::{self, c64, cr, CCol, CMat, ONE};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Anything with a Kraus representation on a single Fock space.
pub trait KrausMap {
    fn space(&self) -> FockSpace;
    fn kraus_ops(&self) -> Vec<Operator>;
    fn apply_matrix(&self, x: &CMat) -> CMat;
}

impl KrausMap for Channel {
    fn space(&self) -> FockSpace {
        Channel::space(self)
    }

    fn kraus_ops(&self) -> Vec<Operator> {
        self.kraus()
    }

    fn apply_matrix(&self, x: &CMat) -> CMat {
        Channel::apply_matrix(self, x)
    }
}

/// `P_l = sum_n |Nn + l><Nn + l|` on one mode, embedded in the full space.
pub fn modular_povm(space: FockSpace, mode: usize, n: usize) -> Result<Vec<Operator>> {
    space.check_mode(mode)?;
    if n == 0 || n > space.cutoff() {
        return Err(Error::Unsupported(format!(
            "modular measurement of order {n} with cutoff {}",
            space.cutoff()
        )));
    }
    Ok((0..n)
        .map(|l| {
            Operator::diagonal(space, |i| {
                if space.occupation(i, mode) % n == l {
                    ONE
                } else {
                    linalg::ZERO
                }
            })
        })
        .collect())
}

/// `P_l (x) P_m` on a two-mode space.
pub fn syndrome_projector(space: FockSpace, n: usize, l: usize, m: usize) -> Operator {
    Operator::diagonal(space, |i| {
        if space.occupation(i, 0) % n == l && space.occupation(i, 1) % n == m {
            ONE
        } else {
            linalg::ZERO
        }
    })
}

/// `sum_{l,m} (P_l (x) P_m) X (P_l (x) P_m)`: the state after an unread
/// modular number measurement on both modes.
pub fn modular_pinching(space: FockSpace, n: usize, x: &CMat) -> CMat {
    let syn = |i: usize| (space.occupation(i, 0) % n, space.occupation(i, 1) % n);
    CMat::from_fn(x.nrows(), x.ncols(), |i, j| {
        if syn(i) == syn(j) {
            x[(i, j)]
        } else {
            linalg::ZERO
        }
    })
}

#[derive(Clone, Debug)]
pub struct Jump {
    pub op: Operator,
    /// Photon-number change `(dn_1, dn_2)` caused by the jump.
    pub shift: (i64, i64),
    pub label: String,
}

impl Jump {
    /// Modular measurement outcome `(l, m)` flagged by this jump on words of order `n`.
    pub fn syndrome(&self, n: usize) -> (usize, usize) {
        let n = n as i64;
        (self.shift.0.rem_euclid(n) as usize, self.shift.1.rem_euclid(n) as usize)
    }
}

/// First-order expansion `N~(rho) ~ rho - {M0, rho} + sum_k M_k rho M_k^dag`
/// restricted to the terms that survive modular number measurement.
#[derive(Clone, Debug)]
pub struct FirstOrderOps {
    pub m0: Operator,
    pub jumps: Vec<Jump>,
}

impl FirstOrderOps {
    pub fn space(&self) -> FockSpace {
        self.m0.space()
    }

    /// `rho - {M0, rho} + sum_k M_k rho M_k^dag`.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let m0 = self.m0.matrix();
        let mut out = rho - linalg::anticommutator(m0, rho);
        for j in &self.jumps {
            let k = j.op.matrix();
            out += k * rho * k.adjoint();
        }
        out
    }

    /// The same operators expressed in another frame, `U X U^dag`.
    pub fn in_frame(&self, u: &Operator) -> Self {
        Self {
            m0: self.m0.transformed_by(u),
            jumps: self
                .jumps
                .iter()
                .map(|j| Jump {
                    op: j.op.transformed_by(u),
                    shift: j.shift,
                    label: j.label.clone(),
                })
                .collect(),
        }
    }

    /// Error list `[I, M0, M_1, ...]` with perturbative orders `0, 1, 1/2, ...`.
    pub fn errors(&self) -> (Vec<String>, Vec<Operator>, Vec<f64>) {
        let space = self.space();
        let mut labels = vec!["I".to_string(), "M0".to_string()];
        let mut ops = vec![Operator::identity(space), self.m0.clone()];
        let mut orders = vec![0.0, 1.0];
        for j in &self.jumps {
            labels.push(j.label.clone());
            ops.push(j.op.clone());
            orders.push(0.5);
        }
        (labels, ops, orders)
    }
}

fn two_mode_ops(space: FockSpace) -> Result<[Operator; 4]> {
    if space.modes() != 2 {
        return Err(Error::InvalidModeSet(format!(
            "two-mode operation on a {}-mode space",
            space.modes()
        )));
    }
    Ok([
        fock::number_operator(space, 0)?,
        fock::number_operator(space, 1)?,
        fock::annihilation(space, 0)?,
        fock::annihilation(space, 1)?,
    ])
}

pub fn first_order_loss(space: FockSpace, delta: f64, kappa1_t: f64, kappa2_t: f64) -> Result<FirstOrderOps> {
    for k in [kappa1_t, kappa2_t] {
        if k < 0.0 || !k.is_finite() {
            return Err(Error::NegativeStrength(k));
        }
    }
    let [n1, n2, a1, a2] = two_mode_ops(space)?;
    let (c2, s2) = (delta.cos().powi(2), delta.sin().powi(2));
    let ap = kappa1_t * c2 + kappa2_t * s2;
    let bp = kappa2_t * c2 + kappa1_t * s2;
    let m0 = &n1.scaled(cr(0.5 * ap)) + &n2.scaled(cr(0.5 * bp));
    Ok(FirstOrderOps {
        m0,
        jumps: vec![
            Jump {
                op: a1.scaled(cr(ap.sqrt())),
                shift: (-1, 0),
                label: "M1".into(),
            },
            Jump {
                op: a2.scaled(cr(bp.sqrt())),
                shift: (0, -1),
                label: "M2".into(),
            },
        ],
    })
}

pub fn first_order_dephasing(
    space: FockSpace,
    delta: f64,
    phi: f64,
    gamma1_t: f64,
    gamma2_t: f64,
    n: usize,
) -> Result<FirstOrderOps> {
    for g in [gamma1_t, gamma2_t] {
        if g < 0.0 || !g.is_finite() {
            return Err(Error::NegativeStrength(g));
        }
    }
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddOrder(n));
    }
    let [n1, n2, a1, a2] = two_mode_ops(space)?;
    let (c, s) = (delta.cos(), delta.sin());
    let (c2, s2) = (c * c, s * s);
    let gsum = gamma1_t + gamma2_t;
    let e12 = &a1.dagger() * &a2;
    let e21 = &a2.dagger() * &a1;
    let q1 = &n1.scaled(cr(c2)) + &n2.scaled(cr(s2));
    let q2 = &n2.scaled(cr(c2)) + &n1.scaled(cr(s2));

    let mut m0 = &(&q1 * &q1).scaled(cr(0.5 * gamma1_t)) + &(&q2 * &q2).scaled(cr(0.5 * gamma2_t));
    let hop = &(&e12 * &e21) + &(&e21 * &e12);
    m0 = &m0 + &hop.scaled(cr(0.5 * gsum * s2 * c2));
    if n == 2 {
        let sq = &(&e12 * &e12).scaled(c64::cis(-2.0 * phi)) + &(&e21 * &e21).scaled(c64::cis(2.0 * phi));
        m0 = &m0 + &sq.scaled(cr(0.5 * gsum * s2 * c2));
    }
    let ex = gsum.sqrt() * s * c;
    Ok(FirstOrderOps {
        m0,
        jumps: vec![
            Jump {
                op: q1.scaled(cr(gamma1_t.sqrt())),
                shift: (0, 0),
                label: "M0(1)".into(),
            },
            Jump {
                op: q2.scaled(cr(gamma2_t.sqrt())),
                shift: (0, 0),
                label: "M0(2)".into(),
            },
            Jump {
                op: e12.scaled(cr(ex)),
                shift: (1, -1),
                label: "M1".into(),
            },
            Jump {
                op: e21.scaled(cr(ex)),
                shift: (-1, 1),
                label: "M2".into(),
            },
        ],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KLEntry {
    pub i: usize,
    pub j: usize,
    /// `lambda_ij = tr(P_C E_i^dag E_j P_C) / d` as `[re, im]`.
    pub lambda: [f64; 2],
    /// `|| P_C E_i^dag E_j P_C - lambda_ij P_C ||`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KLReport {
    pub labels: Vec<String>,
    pub entries: Vec<KLEntry>,
    pub deviation: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

impl KLReport {
    pub fn lambda(&self, i: usize, j: usize) -> Option<c64> {
        self.entries
            .iter()
            .find(|e| e.i == i && e.j == j)
            .map(|e| c64::new(e.lambda[0], e.lambda[1]))
    }

    /// The full lambda matrix; pairs that were not checked are zero.
    pub fn lambda_matrix(&self) -> CMat {
        let n = self.labels.len();
        let mut m = linalg::zeros(n, n);
        for e in &self.entries {
            m[(e.i, e.j)] = c64::new(e.lambda[0], e.lambda[1]);
        }
        m
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn kl_entries(
    code: &Code,
    errors: &[Operator],
    keep: impl Fn(usize, usize) -> bool,
) -> Result<Vec<KLEntry>> {
    let space = code.space();
    for e in errors {
        if e.space() != space {
            return Err(Error::IncompatibleSpaces("error operator space".into()));
        }
    }
    let v = code.isometry();
    let d = code.dim() as f64;
    // E_j V for every error, then the d x d blocks V^dag E_i^dag E_j V
    let images: Vec<CMat> = errors.iter().map(|e| e.matrix() * &v).collect();
    let mut out = Vec::new();
    for i in 0..errors.len() {
        for j in 0..errors.len() {
            if !keep(i, j) {
                continue;
            }
            let block = images[i].adjoint() * &images[j];
            let lambda = linalg::trace(&block) / cr(d);
            let dev = block - linalg::scale(&linalg::identity(code.dim()), lambda);
            out.push(KLEntry {
                i,
                j,
                lambda: [lambda.re, lambda.im],
                deviation: linalg::op_norm(&dev),
            });
        }
    }
    Ok(out)
}

fn report(labels: Vec<String>, entries: Vec<KLEntry>, tol: f64) -> KLReport {
    let deviation = entries.iter().map(|e| e.deviation).fold(0.0, f64::max);
    KLReport {
        labels,
        entries,
        deviation,
        tolerance: tol,
        satisfied: deviation <= tol,
    }
}

/// Checks `P_C E_i^dag E_j P_C = lambda_ij P_C` for every ordered pair.
pub fn kl_check(code: &Code, errors: &[Operator], tol: f64) -> Result<KLReport> {
    let entries = kl_entries(code, errors, |_, _| true)?;
    let labels = (0..errors.len()).map(|i| format!("E{i}")).collect();
    Ok(report(labels, entries, tol))
}

/// Like [`kl_check`] but keeps only pairs whose combined perturbative order
/// is at most `max_order`.
pub fn kl_check_truncated(
    code: &Code,
    labels: Vec<String>,
    errors: &[Operator],
    orders: &[f64],
    max_order: f64,
    tol: f64,
) -> Result<KLReport> {
    if orders.len() != errors.len() || labels.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            expected: errors.len(),
            got: orders.len().min(labels.len()),
        });
    }
    let entries = kl_entries(code, errors, |i, j| orders[i] + orders[j] <= max_order + 1e-12)?;
    Ok(report(labels, entries, tol))
}

/// First-order KL check: `{I, M0, M_k}` with every pair up to first order in
/// the noise strength. The operators are moved into the code's frame.
pub fn kl_check_first_order(code: &Code, ops: &FirstOrderOps, tol: f64) -> Result<KLReport> {
    let framed = ops.in_frame(code.frame());
    let (labels, errors, orders) = framed.errors();
    kl_check_truncated(code, labels, &errors, &orders, 1.0, tol)
}

/// Unitary mapping each source to its target, completed by Gram-Schmidt over
/// the remaining basis vectors in ascending index order.
pub fn complete_to_unitary(pairs: &[(StateVector, StateVector)], space: FockSpace) -> Result<Operator> {
    let n = space.dim();
    for (t, s) in pairs {
        if t.space() != space || s.space() != space {
            return Err(Error::IncompatibleSpaces("completion pair space".into()));
        }
    }
    let targets: Vec<CCol> = pairs.iter().map(|(t, _)| t.amplitudes().clone()).collect();
    let sources: Vec<CCol> = pairs.iter().map(|(_, s)| s.amplitudes().clone()).collect();
    check_orthonormal(&targets)?;
    check_orthonormal(&sources)?;
    let t_full = extend_basis(targets, n);
    let s_full = extend_basis(sources, n);
    let mut u = linalg::zeros(n, n);
    for (t, s) in t_full.iter().zip(&s_full) {
        u += linalg::outer(t, s);
    }
    Operator::new(space, u)
}

fn check_orthonormal(vs: &[CCol]) -> Result<()> {
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate().take(i + 1) {
            let want = if i == j { 1.0 } else { 0.0 };
            let dev = (linalg::inner(a, b) - cr(want)).norm();
            if dev > ORTHONORMAL_TOL {
                return Err(Error::NotOrthonormal(dev));
            }
        }
    }
    Ok(())
}

fn extend_basis(mut basis: Vec<CCol>, n: usize) -> Vec<CCol> {
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = CCol::from_fn(n, |i| if i == e { ONE } else { linalg::ZERO });
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let c = linalg::inner(b, &v);
                v = CCol::from_fn(n, |i| v[i] - b[i] * c);
            }
        }
        let norm = linalg::col_norm(&v);
        if norm > 1e-8 {
            basis.push(CCol::from_fn(n, |i| v[i] / norm));
        }
    }
    basis
}

/// One Kraus operator `unitary * projectors[0] * projectors[1] * ...`.
#[derive(Clone, Debug)]
pub struct RecoveryBranch {
    pub syndrome: (usize, usize),
    pub label: String,
    pub unitary: Operator,
    pub projectors: Vec<Operator>,
}

impl RecoveryBranch {
    pub fn kraus(&self) -> Operator {
        let mut k = self.unitary.clone();
        for p in &self.projectors {
            k = &k * p;
        }
        k
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryMap {
    space: FockSpace,
    branches: Vec<RecoveryBranch>,
    kraus: Vec<Operator>,
    label: String,
}

impl RecoveryMap {
    pub fn new(space: FockSpace, branches: Vec<RecoveryBranch>, label: impl Into<String>) -> Result<Self> {
        for b in &branches {
            if b.unitary.space() != space || b.projectors.iter().any(|p| p.space() != space) {
                return Err(Error::IncompatibleSpaces("recovery branch space".into()));
            }
        }
        let kraus = branches.iter().map(RecoveryBranch::kraus).collect();
        Ok(Self {
            space,
            branches,
            kraus,
            label: label.into(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn branches(&self) -> &[RecoveryBranch] {
        &self.branches
    }

    /// Applies only the branches whose label is listed.
    pub fn apply_branches(&self, labels: &[&str], x: &CMat) -> CMat {
        let mut out = linalg::zeros(x.nrows(), x.ncols());
        for (b, k) in self.branches.iter().zip(&self.kraus) {
            if labels.contains(&b.label.as_str()) {
                out += k.matrix() * x * k.matrix().adjoint();
            }
        }
        out
    }

    /// The map conjugated into another frame: `K -> U K U^dag`.
    pub fn in_frame(&self, u: &Operator) -> Result<Self> {
        let branches = self
            .branches
            .iter()
            .map(|b| RecoveryBranch {
                syndrome: b.syndrome,
                label: b.label.clone(),
                unitary: b.unitary.transformed_by(u),
                projectors: b.projectors.iter().map(|p| p.transformed_by(u)).collect(),
            })
            .collect();
        Self::new(self.space, branches, self.label.clone())
    }

    /// Removes a branch (used to exhibit an incomplete map).
    pub fn without_branch(&self, label: &str) -> Result<Self> {
        let branches = self.branches.iter().filter(|b| b.label != label).cloned().collect();
        Self::new(self.space, branches, self.label.clone())
    }
}

impl KrausMap for RecoveryMap {
    fn space(&self) -> FockSpace {
        self.space
    }

    fn kraus_ops(&self) -> Vec<Operator> {
        self.kraus.clone()
    }

    fn apply_matrix(&self, x: &CMat) -> CMat {
        let mut out = linalg::zeros(x.nrows(), x.ncols());
        for k in &self.kraus {
            out += k.matrix() * x * k.matrix().adjoint();
        }
        out
    }
}

/// `|| I - sum_k K_k^dag K_k ||`.
pub fn verify_cptp(map: &dyn KrausMap) -> f64 {
    let n = map.space().dim();
    let mut s = linalg::identity(n);
    for k in map.kraus_ops() {
        s -= k.matrix().adjoint() * k.matrix();
    }
    linalg::op_norm_hermitian(&linalg::hermitize(&s))
}

/// Entanglement and average fidelity of `map` compressed onto `words`:
/// `F_e = (1/d^2) sum_ij <w_i| map(|w_i><w_j|) |w_j>`.
pub fn logical_fidelity_words(words: &[StateVector], map: &dyn Fn(&CMat) -> CMat) -> (f64, f64) {
    let d = words.len();
    let mut fe = 0.0;
    for i in 0..d {
        for j in 0..d {
            let x = linalg::outer(words[i].amplitudes(), words[j].amplitudes());
            let y = map(&x);
            let wi = words[i].amplitudes();
            let wj = words[j].amplitudes();
            fe += linalg::inner(wi, &(&y * wj)).re;
        }
    }
    let fe = fe / (d * d) as f64;
    let df = d as f64;
    (fe, (df * fe + 1.0) / (df + 1.0))
}

pub fn logical_fidelity(code: &Code, map: &dyn Fn(&CMat) -> CMat) -> (f64, f64) {
    logical_fidelity_words(code.words(), map)
}

/// The words of a two-mode K=2 binomial code before the frame rotation.
pub fn unrotated_binomial_words(space: FockSpace, n: usize) -> Result<[StateVector; 2]> {
    let h = cr(FRAC_1_SQRT_2);
    let w0 = StateVector::superposition(space, &[(h, &[0, n][..]), (h, &[2 * n, n][..])])?;
    let w1 = StateVector::superposition(space, &[(h, &[n, 0][..]), (h, &[n, 2 * n][..])])?;
    Ok([w0, w1])
}

fn projector_onto(words: &[StateVector]) -> Operator {
    let space = words[0].space();
    let mut p = linalg::zeros(space.dim(), space.dim());
    for w in words {
        p += linalg::outer(w.amplitudes(), w.amplitudes());
    }
    Operator::new(space, p).expect("shape preserved")
}

/// `exp([M0, P_C])`, unitary because the commutator is anti-Hermitian.
fn no_jump_unitary(m0: &Operator, pc: &Operator) -> Result<Operator> {
    fock::matrix_exponential(&m0.commutator(pc), ONE)
}

fn require_binomial_space(space: FockSpace, n: usize) -> Result<()> {
    if space.modes() != 2 {
        return Err(Error::InvalidModeSet("recovery maps act on two modes".into()));
    }
    let required = codes::default_cutoff(n);
    if space.cutoff() < required {
        return Err(Error::InsufficientCutoff {
            cutoff: space.cutoff(),
            required,
        });
    }
    Ok(())
}

/// Single-mode unitary sending `|2N-1> -> (|0>+|2N>)/sqrt2` and `|N-1> -> |N>`.
fn loss_fix(space1: FockSpace, n: usize) -> Result<Operator> {
    let h = cr(FRAC_1_SQRT_2);
    let w = StateVector::superposition(space1, &[(h, &[0][..]), (h, &[2 * n][..])])?;
    complete_to_unitary(
        &[
            (w, StateVector::basis(space1, &[2 * n - 1])?),
            (StateVector::basis(space1, &[n])?, StateVector::basis(space1, &[n - 1])?),
        ],
        space1,
    )
}

fn recovery_loss(space: FockSpace, n: usize, delta: f64, kappa1_t: f64, kappa2_t: f64) -> Result<RecoveryMap> {
    require_binomial_space(space, n)?;
    let words = unrotated_binomial_words(space, n)?;
    let pc = projector_onto(&words);
    let ops = first_order_loss(space, delta, kappa1_t, kappa2_t)?;
    let u00 = no_jump_unitary(&ops.m0, &pc)?;
    let single = FockSpace::new(1, space.cutoff())?;
    let fix = loss_fix(single, n)?;
    let id1 = Operator::identity(single);
    let u10 = fix.tensor(&id1)?;
    let u01 = id1.tensor(&fix)?;
    let mut branches = Vec::with_capacity(n * n);
    for l in 0..n {
        for m in 0..n {
            // a single loss leaves n = -1 mod N in that mode
            let unitary = match (l, m) {
                (0, 0) => u00.clone(),
                (l, 0) if l == n - 1 => u10.clone(),
                (0, m) if m == n - 1 => u01.clone(),
                _ => Operator::identity(space),
            };
            branches.push(RecoveryBranch {
                syndrome: (l, m),
                label: format!("{l}{m}"),
                unitary,
                projectors: vec![syndrome_projector(space, n, l, m)],
            });
        }
    }
    RecoveryMap::new(space, branches, format!("loss_n{n}"))
}

/// Modular-parity recovery for the K=2, N=2 code under loss.
pub fn recovery_loss_n2(space: FockSpace, delta: f64, kappa1_t: f64, kappa2_t: f64) -> Result<RecoveryMap> {
    recovery_loss(space, 2, delta, kappa1_t, kappa2_t)
}

/// Mod-4 recovery for the K=2, N=4 code under loss.
pub fn recovery_loss_n4(space: FockSpace, delta: f64, kappa1_t: f64, kappa2_t: f64) -> Result<RecoveryMap> {
    recovery_loss(space, 4, delta, kappa1_t, kappa2_t)
}

/// The error state `(|0> - |8>)/sqrt2` paired with the N=4 binomial word.
pub fn dephasing_error_state(space1: FockSpace) -> Result<StateVector> {
    let h = cr(FRAC_1_SQRT_2);
    StateVector::superposition(space1, &[(h, &[0][..]), (-h, &[8][..])])
}

/// The two-outcome measurement `{P_L, P_E}` used after `U00` in the N=4
/// dephasing recovery. `P_E` covers `|4,E>` and `|E,4>`; `P_L` is the rest.
pub fn dephasing_l_e_projectors(space: FockSpace) -> Result<(Operator, Operator)> {
    let single = FockSpace::new(1, space.cutoff())?;
    let e = dephasing_error_state(single)?;
    let four = StateVector::basis(single, &[4])?;
    let pe = projector_onto(&[four.tensor(&e)?, e.tensor(&four)?]);
    let pl = &Operator::identity(space) - &pe;
    Ok((pl, pe))
}

fn is_optimal_delta(delta: f64) -> bool {
    let r = delta.rem_euclid(PI);
    (r - PI / 4.0).abs() < 1e-12 || (r - 3.0 * PI / 4.0).abs() < 1e-12
}

/// Mod-4 recovery for the K=2, N=4 code under dephasing at `delta` in
/// `{pi/4, 3pi/4}`.
pub fn recovery_dephasing_n4(
    space: FockSpace,
    delta: f64,
    phi: f64,
    gamma1_t: f64,
    gamma2_t: f64,
) -> Result<RecoveryMap> {
    const N: usize = 4;
    if !is_optimal_delta(delta) {
        return Err(Error::Unsupported(format!(
            "dephasing recovery needs delta = pi/4 or 3pi/4, got {delta}"
        )));
    }
    require_binomial_space(space, N)?;
    let words = unrotated_binomial_words(space, N)?;
    let pc = projector_onto(&words);
    let ops = first_order_dephasing(space, delta, phi, gamma1_t, gamma2_t, N)?;
    let u00 = no_jump_unitary(&ops.m0, &pc)?;
    let (pl, pe) = dephasing_l_e_projectors(space)?;

    let single = FockSpace::new(1, space.cutoff())?;
    let e = dephasing_error_state(single)?;
    let b = |k: usize| StateVector::basis(single, &[k]);
    let ue = complete_to_unitary(
        &[
            (words[1].clone(), b(4)?.tensor(&e)?),
            (words[0].clone(), e.tensor(&b(4)?)?),
        ],
        space,
    )?;
    let r = cr(1.0 / 10f64.sqrt());
    let odd = StateVector::superposition(single, &[(r, &[1][..]), (r * 3.0, &[9][..])])?;
    let u13 = complete_to_unitary(
        &[
            (words[1].clone(), b(5)?.tensor(&b(7)?)?),
            (words[0].clone(), odd.tensor(&b(3)?)?),
        ],
        space,
    )?;
    let u31 = complete_to_unitary(
        &[
            (words[1].clone(), b(3)?.tensor(&odd)?),
            (words[0].clone(), b(7)?.tensor(&b(5)?)?),
        ],
        space,
    )?;

    let p00 = syndrome_projector(space, N, 0, 0);
    let mut branches = vec![
        RecoveryBranch {
            syndrome: (0, 0),
            label: "00L".into(),
            unitary: u00.clone(),
            projectors: vec![pl.conjugated_by(&u00), p00.clone()],
        },
        RecoveryBranch {
            syndrome: (0, 0),
            label: "00E".into(),
            unitary: &ue * &u00,
            projectors: vec![pe.conjugated_by(&u00), p00],
        },
    ];
    for l in 0..N {
        for m in 0..N {
            let unitary = match (l, m) {
                (0, 0) => continue,
                (1, 3) => u13.clone(),
                (3, 1) => u31.clone(),
                _ => Operator::identity(space),
            };
            branches.push(RecoveryBranch {
                syndrome: (l, m),
                label: format!("{l}{m}"),
                unitary,
                projectors: vec![syndrome_projector(space, N, l, m)],
            });
        }
    }
    RecoveryMap::new(space, branches, "dephasing_n4")
}
