//! Channel-adapted optimal recovery.
//!
//! The recovery `R` maps the physical space onto the `d`-dimensional logical
//! space. Its Choi matrix `C = sum_ab |a><b| (x) R(|a><b|)` (row index
//! `a * d_out + i`) enters the entanglement fidelity linearly,
//! `F_e = Tr(W C) / d^2`, so the best recovery is the solution of
//!
//! ```text
//! maximize Tr(W C)  subject to  C >= 0,  Tr_out C = I
//! ```
//!
//! solved here by Douglas-Rachford splitting between the PSD cone and the
//! affine trace-preserving set. Every answer carries a dual certificate: the
//! optimality residual is the gap to a feasible dual point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{self, Channel, KrausMaxima, NoiseParams};
use crate::codes::{self, Code, Family};
use crate::error::{Error, Result};
use crate::fock::{FockSpace, Operator, StateVector};
use crate::klrecovery;
use crate::linalg::{self, c64, cr, CMat};

pub const DEFAULT_DIM_CAP: usize = 400;
const PRECOND_FLOOR: f64 = 1e-14;

/// Choi matrix of a map from `d_in` to `d_out` dimensions.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    matrix: CMat,
}

impl ChoiMatrix {
    pub fn new(d_in: usize, d_out: usize, matrix: CMat) -> Result<Self> {
        let n = d_in * d_out;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        Ok(Self { d_in, d_out, matrix })
    }

    /// Choi of `X -> sum_k K X K^dag` for `d_out x d_in` Kraus matrices.
    pub fn from_kraus(d_in: usize, d_out: usize, kraus: &[CMat]) -> Result<Self> {
        let n = d_in * d_out;
        let mut m = linalg::zeros(n, n);
        for k in kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::DimensionMismatch {
                    expected: d_out,
                    got: k.nrows(),
                });
            }
            let v = faer::Col::<c64>::from_fn(n, |r| k[(r % d_out, r / d_out)]);
            m += linalg::outer(&v, &v);
        }
        Self::new(d_in, d_out, m)
    }

    /// Choi of an arbitrary linear map given by its action on matrices.
    pub fn from_map(d_in: usize, d_out: usize, map: &dyn Fn(&CMat) -> CMat) -> Result<Self> {
        let n = d_in * d_out;
        let mut m = linalg::zeros(n, n);
        for a in 0..d_in {
            for b in 0..d_in {
                let mut e = linalg::zeros(d_in, d_in);
                e[(a, b)] = cr(1.0);
                let y = map(&e);
                if y.nrows() != d_out || y.ncols() != d_out {
                    return Err(Error::DimensionMismatch {
                        expected: d_out,
                        got: y.nrows(),
                    });
                }
                for i in 0..d_out {
                    for j in 0..d_out {
                        m[(a * d_out + i, b * d_out + j)] = y[(i, j)];
                    }
                }
            }
        }
        Self::new(d_in, d_out, m)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn trace(&self) -> c64 {
        linalg::trace(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::eigvalsh(&linalg::hermitize(&self.matrix))
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn rank(&self, tol: f64) -> usize {
        linalg::eigvalsh(&linalg::hermitize(&self.matrix))
            .iter()
            .filter(|&&l| l > tol)
            .count()
    }

    /// `Tr_out C`, a `d_in x d_in` matrix.
    pub fn partial_trace_out(&self) -> CMat {
        partial_trace_out(&self.matrix, self.d_in, self.d_out)
    }

    /// Operator norm of `Tr_out C - I`.
    pub fn tp_defect(&self) -> f64 {
        let t = self.partial_trace_out() - linalg::identity(self.d_in);
        linalg::op_norm_hermitian(&linalg::hermitize(&t))
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let (di, d) = (self.d_in, self.d_out);
        let mut y = linalg::zeros(d, d);
        for a in 0..di {
            for b in 0..di {
                let xab = x[(a, b)];
                if xab == c64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..d {
                    for j in 0..d {
                        y[(i, j)] += xab * self.matrix[(a * d + i, b * d + j)];
                    }
                }
            }
        }
        y
    }

    /// Kraus matrices from the eigendecomposition; eigenvalues at or below
    /// `tol` are dropped.
    pub fn kraus(&self, tol: f64) -> Vec<CMat> {
        let (vals, vecs) = linalg::eigh(&linalg::hermitize(&self.matrix));
        let d = self.d_out;
        vals.iter()
            .enumerate()
            .filter(|(_, &l)| l > tol)
            .map(|(k, &l)| {
                let s = l.sqrt();
                CMat::from_fn(d, self.d_in, |i, a| vecs[(a * d + i, k)] * s)
            })
            .collect()
    }
}

fn partial_trace_out(m: &CMat, d_in: usize, d_out: usize) -> CMat {
    CMat::from_fn(d_in, d_in, |a, b| {
        (0..d_out).map(|i| m[(a * d_out + i, b * d_out + i)]).sum()
    })
}

/// Choi of `encode` followed by `channel`: input is the logical space.
pub fn channel_choi(channel: &Channel, code: &Code) -> Result<ChoiMatrix> {
    if channel.space() != code.space() {
        return Err(Error::IncompatibleSpaces("channel and code spaces differ".into()));
    }
    let words = code.words();
    let d = words.len();
    let n = code.space().dim();
    ChoiMatrix::from_map(d, n, &|x: &CMat| {
        let mut rho = linalg::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                if x[(i, j)] != c64::new(0.0, 0.0) {
                    rho += linalg::scale(&linalg::outer(words[i].amplitudes(), words[j].amplitudes()), x[(i, j)]);
                }
            }
        }
        channel.apply_matrix(&rho)
    })
}

/// Input subspace the SDP is restricted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// The whole physical space.
    Full,
    /// Total-photon-number sectors reached by the noisy code.
    PhotonSectors,
    /// Range of the averaged noisy code state.
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    pub feasibility_tol: f64,
    /// Stop once the dual gap (in fidelity units) is below this.
    pub target_gap: f64,
    /// Largest dual gap still reported as converged.
    pub accept_gap: f64,
    pub max_iterations: usize,
    pub check_every: usize,
    pub dim_cap: usize,
    pub support: Support,
    /// Relative eigenvalue floor for [`Support::Spectral`].
    pub support_threshold: f64,
    pub step: f64,
    pub relaxation: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            target_gap: 1e-8,
            accept_gap: 1e-6,
            max_iterations: 50_000,
            check_every: 10,
            dim_cap: DEFAULT_DIM_CAP,
            support: Support::Spectral,
            support_threshold: 1e-13,
            step: 1.0,
            relaxation: 1.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpResult {
    /// Recovery Choi from the physical space onto the logical space.
    pub recovery: ChoiMatrix,
    pub fidelity: f64,
    pub average_fidelity: f64,
    pub feasibility_defect: f64,
    pub optimality_residual: f64,
    pub iterations: usize,
    pub support_dim: usize,
}

impl SdpResult {
    pub fn kraus(&self) -> Vec<CMat> {
        self.recovery.kraus(1e-14)
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        self.recovery.apply(x)
    }
}

/// Optimal recovery for `code` under `channel`.
pub fn optimal_recovery(code: &Code, channel: &Channel, opts: &SdpOptions) -> Result<SdpResult> {
    if channel.space() != code.space() {
        return Err(Error::IncompatibleSpaces("channel and code spaces differ".into()));
    }
    optimal_recovery_words(code.words(), &|x: &CMat| channel.apply_matrix(x), opts)
}

/// Optimal recovery for the words `w_i` under an arbitrary map.
pub fn optimal_recovery_words(
    words: &[StateVector],
    map: &dyn Fn(&CMat) -> CMat,
    opts: &SdpOptions,
) -> Result<SdpResult> {
    let d = words.len();
    if d == 0 {
        return Err(Error::InvalidState("no codewords".into()));
    }
    let space = words[0].space();
    let n = space.dim();
    if n > opts.dim_cap {
        return Err(Error::DimensionCap {
            dim: n,
            cap: opts.dim_cap,
        });
    }

    // Y_ij = N(|w_i><w_j|)
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect();
    let ys: Vec<CMat> = pairs
        .iter()
        .map(|&(i, j)| map(&linalg::outer(words[i].amplitudes(), words[j].amplitudes())))
        .collect();
    let y = |i: usize, j: usize| &ys[i * d + j];

    let basis = support_basis(space, &ys, d, opts)?;
    let m = basis.ncols();
    // eigenbasis of the averaged noisy state inside the support, so the
    // preconditioner below is diagonal in the right basis
    let avg_full = (0..d).fold(linalg::zeros(n, n), |acc, i| acc + &ys[i * d + i]);
    let (_, rot) = linalg::eigh(&linalg::hermitize(&linalg::compress(&avg_full, &basis)));
    let rot = CMat::from_fn(m, m, |r, c| rot[(r, m - 1 - c)]);
    let basis = &basis * &rot;
    let md = m * d;

    let reduced: Vec<CMat> = ys.iter().map(|yij| linalg::compress(yij, &basis)).collect();
    let w = CMat::from_fn(md, md, |r, c| {
        let (a, i) = (r / d, r % d);
        let (b, j) = (c / d, c % d);
        reduced[i * d + j][(a, b)].conj()
    });
    let avg = (0..d).fold(linalg::zeros(m, m), |acc, i| acc + &reduced[i * d + i]);
    let weights: Vec<f64> = (0..m).map(|a| avg[(a, a)].re).collect();
    let top = weights.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let precond: Vec<f64> = weights
        .iter()
        .map(|&x| (x / top).max(PRECOND_FLOOR).powf(-0.25))
        .collect();

    let scale = 1.0 / (d * d) as f64;
    let solution = douglas_rachford(&w, &precond, m, d, scale, opts);

    let full = expand_choi(&solution.choi, &basis, n, d);
    let fe = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| full.apply(y(i, j))[(i, j)])
        .sum::<c64>()
        .re
        * scale;
    let feasibility = full.tp_defect().max((-full.min_eigenvalue()).max(0.0));

    if !(solution.gap <= opts.accept_gap) || feasibility > opts.feasibility_tol {
        return Err(Error::NonConvergence {
            iterations: solution.iterations,
            feasibility,
            gap: solution.gap,
        });
    }
    log::debug!(
        "sdp: support {m}, iterations {}, F_e {fe:.12}, gap {:.2e}",
        solution.iterations,
        solution.gap
    );
    Ok(SdpResult {
        recovery: full,
        fidelity: fe,
        average_fidelity: (d as f64 * fe + 1.0) / (d as f64 + 1.0),
        feasibility_defect: feasibility,
        optimality_residual: solution.gap.max(0.0),
        iterations: solution.iterations,
        support_dim: m,
    })
}

fn support_basis(space: FockSpace, ys: &[CMat], d: usize, opts: &SdpOptions) -> Result<CMat> {
    let n = space.dim();
    let mut avg = linalg::zeros(n, n);
    for i in 0..d {
        avg += &ys[i * d + i];
    }
    let avg = linalg::hermitize(&avg);
    let cols: Vec<Vec<c64>> = match opts.support {
        Support::Full => return Ok(linalg::identity(n)),
        Support::PhotonSectors => {
            let mut keep = Vec::new();
            for sector in space.photon_number_sectors() {
                let weight: f64 = sector.iter().map(|&k| avg[(k, k)].re).sum();
                if weight > opts.support_threshold {
                    keep.extend(sector);
                }
            }
            keep.sort_unstable();
            keep.iter()
                .map(|&k| (0..n).map(|r| cr(if r == k { 1.0 } else { 0.0 })).collect())
                .collect()
        }
        Support::Spectral => {
            let (vals, vecs) = linalg::eigh(&avg);
            let top = vals.last().copied().unwrap_or(0.0);
            vals.iter()
                .enumerate()
                .rev()
                .filter(|(_, &l)| l > opts.support_threshold * top)
                .map(|(k, _)| (0..n).map(|r| vecs[(r, k)]).collect())
                .collect()
        }
    };
    if cols.is_empty() {
        return Err(Error::InvalidState("noisy code has empty support".into()));
    }
    Ok(CMat::from_fn(n, cols.len(), |r, c| cols[c][r]))
}

struct Solution {
    choi: CMat,
    gap: f64,
    iterations: usize,
}

/// Projection onto `{C : Tr_out C = target}`.
fn project_affine(z: &CMat, target: &[f64], d: usize) -> CMat {
    let m = target.len();
    let mut t = partial_trace_out(z, m, d);
    for a in 0..m {
        t[(a, a)] -= cr(target[a]);
    }
    let inv = 1.0 / d as f64;
    let mut out = z.clone();
    for a in 0..m {
        for b in 0..m {
            let v = t[(a, b)] * inv;
            for i in 0..d {
                out[(a * d + i, b * d + i)] -= v;
            }
        }
    }
    out
}

/// `(D (x) I) X (D (x) I)` for diagonal `D`.
fn scale_sides(x: &CMat, dg: &[f64], d: usize) -> CMat {
    CMat::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)] * (dg[r / d] * dg[c / d]))
}

fn project_psd(z: &CMat) -> CMat {
    let (vals, vecs) = linalg::eigh(&linalg::hermitize(z));
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.0).collect();
    let n = z.nrows();
    let scaled = CMat::from_fn(n, keep.len(), |r, c| vecs[(r, keep[c])] * vals[keep[c]]);
    let plain = CMat::from_fn(n, keep.len(), |r, c| vecs[(r, keep[c])]);
    &scaled * plain.adjoint()
}

/// `(T^{-1/2} (x) I) X (T^{-1/2} (x) I)` with `T = Tr_out X`; exactly
/// trace preserving whenever `T` is invertible.
fn normalize_tp(x: &CMat, m: usize, d: usize) -> Option<CMat> {
    let t = linalg::hermitize(&partial_trace_out(x, m, d));
    let (vals, _) = linalg::eigh(&t);
    if vals.first().copied().unwrap_or(0.0) <= 1e-12 {
        return None;
    }
    let s = linalg::hermitian_function(&t, |l| cr(1.0 / l.sqrt()));
    let big = linalg::kron(&s, &linalg::identity(d));
    Some(linalg::hermitize(&(&big * x * &big)))
}

/// Primal value and dual gap of a feasible point, both scaled to fidelity.
fn certificate(w: &CMat, c: &CMat, m: usize, d: usize, scale: f64) -> (f64, f64) {
    let wc = w * c;
    let primal = linalg::trace(&wc).re;
    let y0 = linalg::hermitize(&partial_trace_out(&wc, m, d));
    let slack = w - linalg::kron(&y0, &linalg::identity(d));
    let shift = linalg::eigvalsh(&linalg::hermitize(&slack))
        .last()
        .copied()
        .unwrap_or(0.0);
    let dual = linalg::trace(&y0).re + shift * m as f64;
    (primal * scale, (dual - primal) * scale)
}

fn dual_gap(w: &CMat, y0: &CMat, primal: f64, m: usize, d: usize, scale: f64) -> f64 {
    let slack = w - linalg::kron(y0, &linalg::identity(d));
    let shift = linalg::eigvalsh(&linalg::hermitize(&slack))
        .last()
        .copied()
        .unwrap_or(0.0);
    (linalg::trace(y0).re + shift * m as f64) * scale - primal
}

/// Douglas-Rachford on the rescaled variable `C' = (D^-1 (x) I) C (D^-1 (x) I)`;
/// `precond` holds the diagonal of `D`. The rescaling balances support
/// directions whose noisy weights differ by many orders of magnitude.
fn douglas_rachford(w: &CMat, precond: &[f64], m: usize, d: usize, scale: f64, opts: &SdpOptions) -> Solution {
    let md = m * d;
    let inv: Vec<f64> = precond.iter().map(|x| 1.0 / x).collect();
    let target: Vec<f64> = inv.iter().map(|x| x * x).collect();
    let ws = scale_sides(w, precond, d);
    let t = opts.step / linalg::op_norm_hermitian(&ws).max(1e-300);
    let tw = linalg::scale(&ws, cr(t));
    let mut z = CMat::from_fn(md, md, |r, c| {
        if r == c {
            cr(target[r / d] / d as f64)
        } else {
            cr(0.0)
        }
    });
    let mut best: Option<(CMat, f64)> = None;
    let mut iterations = 0;
    let check = opts.check_every.max(1);
    while iterations < opts.max_iterations {
        iterations += 1;
        let x = project_psd(&z);
        let reflected = linalg::scale(&x, cr(2.0)) - &z + &tw;
        let y = project_affine(&reflected, &target, d);
        if iterations % check == 0 || iterations == opts.max_iterations {
            if let Some(c) = normalize_tp(&scale_sides(&x, precond, d), m, d) {
                let (primal, mut gap) = certificate(w, &c, m, d, scale);
                // dual slack carried by the splitting variable
                let slack = scale_sides(&linalg::scale(&(&x - &z), cr(1.0 / t)), &inv, d);
                let y_est = linalg::scale(
                    &linalg::hermitize(&partial_trace_out(&(w + &slack), m, d)),
                    cr(1.0 / d as f64),
                );
                gap = gap.min(dual_gap(w, &y_est, primal, m, d, scale));
                if best.as_ref().is_none_or(|(_, g)| gap < *g) {
                    best = Some((c, gap));
                }
                if gap <= opts.target_gap {
                    break;
                }
            }
        }
        z += linalg::scale(&(&y - &x), cr(opts.relaxation));
    }
    match best {
        Some((choi, gap)) => Solution {
            choi,
            gap,
            iterations,
        },
        None => {
            let choi = linalg::scale(&linalg::identity(md), cr(1.0 / d as f64));
            let (_, gap) = certificate(w, &choi, m, d, scale);
            Solution {
                choi,
                gap,
                iterations,
            }
        }
    }
}

/// Lift a recovery on the support `S` to the full input space; the
/// complement is sent to the maximally mixed logical state.
fn expand_choi(reduced: &CMat, basis: &CMat, n: usize, d: usize) -> ChoiMatrix {
    let m = basis.ncols();
    let sconj = CMat::from_fn(n, m, |r, c| basis[(r, c)].conj());
    let lift = linalg::kron(&sconj, &linalg::identity(d));
    let mut full = &lift * reduced * lift.adjoint();
    if m < n {
        let q = linalg::identity(n) - basis * basis.adjoint();
        let qc = CMat::from_fn(n, n, |r, c| q[(r, c)].conj() * (1.0 / d as f64));
        full += linalg::kron(&qc, &linalg::identity(d));
    }
    ChoiMatrix {
        d_in: n,
        d_out: d,
        matrix: linalg::hermitize(&full),
    }
}

/// Which noise a sweep or break-even point applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Loss,
    Dephasing,
    Combined,
}

impl ChannelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelKind::Loss => "loss",
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::Combined => "combined",
        }
    }

    /// Symmetric rates of strength `s` on both modes.
    pub fn params(&self, s: f64) -> Result<NoiseParams> {
        match self {
            ChannelKind::Loss => NoiseParams::loss(s),
            ChannelKind::Dephasing => NoiseParams::dephasing(s),
            ChannelKind::Combined => NoiseParams::new(s, s, s, s),
        }
    }

    pub fn all() -> [ChannelKind; 3] {
        [ChannelKind::Loss, ChannelKind::Dephasing, ChannelKind::Combined]
    }

    /// Keep only the rates this kind refers to.
    pub fn restrict(&self, p: NoiseParams) -> NoiseParams {
        match self {
            ChannelKind::Loss => NoiseParams {
                gamma1_t: 0.0,
                gamma2_t: 0.0,
                ..p
            },
            ChannelKind::Dephasing => NoiseParams {
                kappa1_t: 0.0,
                kappa2_t: 0.0,
                ..p
            },
            ChannelKind::Combined => p,
        }
    }
}

/// The channel a code of one or two modes sees; single-mode codes take the
/// mode-1 rates.
pub fn noise_channel(space: FockSpace, params: NoiseParams) -> Result<Channel> {
    match space.modes() {
        1 => channels::single_mode_channel(space, params.kappa1_t, params.gamma1_t),
        2 => channels::combined_channel(space, params, KrausMaxima::default()),
        k => Err(Error::Unsupported(format!("noise sweep on {k} modes"))),
    }
}

/// Average fidelity of `|0>`, `|1>` of one mode with no recovery.
pub fn breakeven(params: NoiseParams, kind: ChannelKind) -> Result<f64> {
    params.validate()?;
    let p = kind.restrict(params);
    let code = codes::trivial_code(2)?;
    let ch = channels::single_mode_channel(code.space(), p.kappa1_t, p.gamma1_t)?;
    Ok(klrecovery::logical_fidelity(&code, &|x| ch.apply_matrix(x)).1)
}

/// A named code for [`fidelity_sweep`].
#[derive(Clone, Debug)]
pub struct SweepCode {
    pub name: String,
    pub code: Code,
}

impl SweepCode {
    pub fn new(name: impl Into<String>, code: Code) -> Self {
        Self {
            name: name.into(),
            code,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub code: String,
    pub family: Family,
    pub n: usize,
    pub k: Option<usize>,
    pub delta: f64,
    pub phi: f64,
    pub channel: ChannelKind,
    pub strength: f64,
    pub f_e: f64,
    pub f_avg: f64,
    pub feasibility: f64,
    pub residual: f64,
    pub iters: usize,
}

pub const SWEEP_HEADER: &str = "code,family,N,K,delta,phi,channel,strength,F_e,F_avg,feasibility,residual,iters";

/// `x` with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.11e}")
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelKind::all()
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Serialization(format!("unknown channel kind {s:?}")))
    }
}

impl SweepRecord {
    /// Inverse of [`SweepRecord::csv_row`].
    pub fn from_csv_row(row: &str) -> Result<Self> {
        let f: Vec<&str> = row.trim_end().split(',').collect();
        if f.len() != 13 {
            return Err(Error::Serialization(format!("sweep row has {} fields, expected 13", f.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Serialization(format!("{s:?}: {e}")))
        };
        let int = |s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|e| Error::Serialization(format!("{s:?}: {e}")))
        };
        Ok(Self {
            code: f[0].to_string(),
            family: f[1].parse()?,
            n: int(f[2])?,
            k: if f[3].is_empty() { None } else { Some(int(f[3])?) },
            delta: num(f[4])?,
            phi: num(f[5])?,
            channel: f[6].parse()?,
            strength: num(f[7])?,
            f_e: num(f[8])?,
            f_avg: num(f[9])?,
            feasibility: num(f[10])?,
            residual: num(f[11])?,
            iters: int(f[12])?,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.code,
            self.family.as_str(),
            self.n,
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            fmt_sig(self.delta),
            fmt_sig(self.phi),
            self.channel.as_str(),
            fmt_sig(self.strength),
            fmt_sig(self.f_e),
            fmt_sig(self.f_avg),
            fmt_sig(self.feasibility),
            fmt_sig(self.residual),
            self.iters
        )
    }
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// One record per `(code, strength)`, codes outermost. Trivial-family codes
/// are evaluated without recovery (the break-even line); every other code
/// gets its optimal recovery. Grid points run in parallel.
pub fn fidelity_sweep(
    codes: &[SweepCode],
    kind: ChannelKind,
    strengths: &[f64],
    opts: &SdpOptions,
) -> Result<Vec<SweepRecord>> {
    let jobs: Vec<(usize, f64)> = (0..codes.len())
        .flat_map(|c| strengths.iter().map(move |&s| (c, s)))
        .collect();
    jobs.par_iter()
        .map(|&(c, s)| sweep_point(&codes[c], kind, s, opts))
        .collect()
}

fn sweep_point(entry: &SweepCode, kind: ChannelKind, s: f64, opts: &SdpOptions) -> Result<SweepRecord> {
    let code = &entry.code;
    let params = kind.params(s)?;
    let (delta, phi) = code.delta_phi();
    let mut record = SweepRecord {
        code: entry.name.clone(),
        family: code.family(),
        n: code.order(),
        k: code.truncation(),
        delta,
        phi,
        channel: kind,
        strength: s,
        f_e: 0.0,
        f_avg: 0.0,
        feasibility: 0.0,
        residual: 0.0,
        iters: 0,
    };
    let ch = noise_channel(code.space(), params)?;
    if code.family() == Family::Trivial {
        let (fe, fa) = klrecovery::logical_fidelity(code, &|x| ch.apply_matrix(x));
        record.f_e = fe;
        record.f_avg = fa;
        return Ok(record);
    }
    let res = optimal_recovery(code, &ch, opts)?;
    record.f_e = res.fidelity;
    record.f_avg = res.average_fidelity;
    record.feasibility = res.feasibility_defect;
    record.residual = res.optimality_residual;
    record.iters = res.iterations;
    Ok(record)
}

/// Entanglement fidelity of `recovery` applied after `channel`, both given
/// as Kraus operators on the same physical space (the recovery maps onto
/// the logical space).
pub fn recovery_fidelity(code: &Code, channel: &Channel, recovery: &ChoiMatrix) -> (f64, f64) {
    klrecovery::logical_fidelity_words(
        &logical_basis(code.dim()),
        &|x: &CMat| {
            let rho = encode(code, x);
            recovery.apply(&channel.apply_matrix(&rho))
        },
    )
}

fn logical_basis(d: usize) -> Vec<StateVector> {
    let space = FockSpace::new(1, d).expect("logical space");
    (0..d)
        .map(|k| StateVector::basis(space, &[k]).expect("basis"))
        .collect()
}

fn encode(code: &Code, x: &CMat) -> CMat {
    let v = code.isometry();
    &v * x * v.adjoint()
}

/// Encoded operator `V x V^dag` on the physical space.
pub fn encode_operator(code: &Code, x: &CMat) -> Result<Operator> {
    Operator::new(code.space(), encode(code, x))
}
