//! Kraus channels: loss, dephasing, their products, rotated frames and
//! correlated dephasing.
//!
//! A [`Channel`] is stored as an ordered list of Kraus stages (applied first
//! to last) plus an optional frame unitary `U`, representing
//! `rho -> U^dag S_n(...S_1(U rho U^dag)...) U`. The flat Kraus list is the
//! product over stages and can be expanded on demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockSpace, Operator};
use crate::linalg::{self, c64, CMat};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
const DEPHASING_TAIL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub kappa1_t: f64,
    pub kappa2_t: f64,
    pub gamma1_t: f64,
    pub gamma2_t: f64,
}

impl NoiseParams {
    pub fn new(kappa1_t: f64, kappa2_t: f64, gamma1_t: f64, gamma2_t: f64) -> Result<Self> {
        let p = Self {
            kappa1_t,
            kappa2_t,
            gamma1_t,
            gamma2_t,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn loss(kappa_t: f64) -> Result<Self> {
        Self::new(kappa_t, kappa_t, 0.0, 0.0)
    }

    pub fn dephasing(gamma_t: f64) -> Result<Self> {
        Self::new(0.0, 0.0, gamma_t, gamma_t)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.kappa1_t, self.kappa2_t, self.gamma1_t, self.gamma2_t] {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            if v < 0.0 {
                return Err(Error::NegativeStrength(v));
            }
        }
        Ok(())
    }
}

/// Discrete approximation `{(phi_k, p_k)}` of a phase distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseMixture {
    points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    GaussHermite,
    Uniform,
}

/// Half-width of the uniform grid, in standard deviations.
const UNIFORM_HALF_WIDTH: f64 = 12.0;

impl PhaseMixture {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMixture("no points".into()));
        }
        let mut total = 0.0;
        for &(phi, p) in &points {
            if !phi.is_finite() || !p.is_finite() {
                return Err(Error::NonFinite);
            }
            if p < 0.0 {
                return Err(Error::InvalidMixture(format!("negative weight {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(format!("weights sum to {total}")));
        }
        Ok(Self { points })
    }

    pub fn point_mass(phi: f64) -> Self {
        Self {
            points: vec![(phi, 1.0)],
        }
    }

    /// Zero-mean Gaussian of standard deviation `sigma`.
    pub fn gaussian(sigma: f64, nodes: usize, scheme: Discretization) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidMixture(format!("sigma {sigma}")));
        }
        if nodes == 0 {
            return Err(Error::InvalidMixture("zero nodes".into()));
        }
        if sigma == 0.0 {
            return Ok(Self::point_mass(0.0));
        }
        let raw: Vec<(f64, f64)> = match scheme {
            Discretization::GaussHermite => gauss_hermite(nodes)
                .into_iter()
                .map(|(x, w)| (std::f64::consts::SQRT_2 * sigma * x, w))
                .collect(),
            Discretization::Uniform => {
                let half = UNIFORM_HALF_WIDTH * sigma;
                (0..nodes)
                    .map(|k| {
                        let phi = if nodes == 1 {
                            0.0
                        } else {
                            -half + 2.0 * half * k as f64 / (nodes - 1) as f64
                        };
                        (phi, (-phi * phi / (2.0 * sigma * sigma)).exp())
                    })
                    .collect()
            }
        };
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        Self::new(raw.into_iter().map(|(phi, w)| (phi, w / total)).collect())
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// `sum_k p_k e^{i m phi_k}`.
    pub fn characteristic(&self, m: f64) -> c64 {
        self.points
            .iter()
            .map(|&(phi, p)| c64::cis(m * phi) * p)
            .sum()
    }
}

/// Nodes and weights (normalized to sum 1) of the physicists' Gauss-Hermite
/// rule, via the Golub-Welsch eigenproblem.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let jacobi = CMat::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            linalg::cr((i.max(j) as f64 / 2.0).sqrt())
        } else {
            linalg::ZERO
        }
    });
    let (vals, vecs) = linalg::eigh(&jacobi);
    let mut out: Vec<(f64, f64)> = vals
        .iter()
        .enumerate()
        .map(|(k, &x)| (x, vecs[(0, k)].norm_sqr()))
        .collect();
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    for p in &mut out {
        p.1 /= total;
    }
    out
}

#[derive(Clone, Debug)]
enum Stage {
    Dense(Vec<Operator>),
    /// Diagonal Kraus operators, applied as the Schur multiplier
    /// `M_ij = sum_K K_ii conj(K_jj)`.
    Diagonal {
        kraus: Vec<Operator>,
        multiplier: CMat,
    },
}

impl Stage {
    fn new(kraus: Vec<Operator>) -> Self {
        let diagonal = kraus.iter().all(|k| {
            let m = k.matrix();
            (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| i == j || m[(i, j)] == linalg::ZERO))
        });
        if !diagonal {
            return Stage::Dense(kraus);
        }
        let n = kraus[0].space().dim();
        let mut multiplier = linalg::zeros(n, n);
        for k in &kraus {
            let m = k.matrix();
            for j in 0..n {
                let cj = m[(j, j)].conj();
                for i in 0..n {
                    multiplier[(i, j)] += m[(i, i)] * cj;
                }
            }
        }
        Stage::Diagonal { kraus, multiplier }
    }

    fn kraus(&self) -> &[Operator] {
        match self {
            Stage::Dense(k) => k,
            Stage::Diagonal { kraus, .. } => kraus,
        }
    }

    fn apply(&self, rho: &CMat) -> CMat {
        match self {
            Stage::Dense(kraus) => {
                let mut out = linalg::zeros(rho.nrows(), rho.ncols());
                for k in kraus {
                    let km = k.matrix();
                    out += km * rho * km.adjoint();
                }
                out
            }
            Stage::Diagonal { multiplier, .. } => {
                CMat::from_fn(rho.nrows(), rho.ncols(), |i, j| rho[(i, j)] * multiplier[(i, j)])
            }
        }
    }

    /// Heisenberg-picture action `sum_K K^dag X K`.
    fn adjoint_apply(&self, x: &CMat) -> CMat {
        match self {
            Stage::Dense(kraus) => {
                let mut out = linalg::zeros(x.nrows(), x.ncols());
                for k in kraus {
                    let km = k.matrix();
                    out += km.adjoint() * x * km;
                }
                out
            }
            Stage::Diagonal { multiplier, .. } => {
                CMat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * multiplier[(i, j)].conj())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Channel {
    space: FockSpace,
    stages: Vec<Stage>,
    frame: Option<Operator>,
    completeness_defect: f64,
    tolerance: f64,
}

impl Channel {
    pub fn identity(space: FockSpace) -> Self {
        Self::from_kraus(space, vec![Operator::identity(space)]).expect("identity is valid")
    }

    pub fn from_kraus(space: FockSpace, kraus: Vec<Operator>) -> Result<Self> {
        Self::from_stages(space, vec![kraus], None)
    }

    /// Stages listed in application order (first applied first).
    pub fn from_stages(
        space: FockSpace,
        stages: Vec<Vec<Operator>>,
        frame: Option<Operator>,
    ) -> Result<Self> {
        for stage in &stages {
            if stage.is_empty() {
                return Err(Error::InvalidState("empty Kraus stage".into()));
            }
            for k in stage {
                if k.space() != space {
                    return Err(Error::IncompatibleSpaces("Kraus operator space".into()));
                }
            }
        }
        let stages: Vec<Stage> = stages.into_iter().map(Stage::new).collect();
        let mut ch = Self {
            space,
            stages,
            frame,
            completeness_defect: 0.0,
            tolerance: DEFAULT_TOLERANCE,
        };
        ch.completeness_defect = ch.compute_defect();
        Ok(ch)
    }

    fn compute_defect(&self) -> f64 {
        let n = self.space.dim();
        let id = linalg::identity(n);
        let mut s = id.clone();
        for stage in self.stages.iter().rev() {
            s = stage.adjoint_apply(&s);
        }
        // unitary frames leave the spectral norm unchanged
        linalg::op_norm_hermitian(&(id - s))
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn within_tolerance(&self) -> bool {
        self.completeness_defect <= self.tolerance
    }

    pub fn frame(&self) -> Option<&Operator> {
        self.frame.as_ref()
    }

    /// Number of operators in the flat Kraus list.
    pub fn kraus_count(&self) -> usize {
        self.stages.iter().map(|s| s.kraus().len()).product()
    }

    /// Kraus operators of each stage, in application order (without frame).
    pub fn stage_kraus(&self) -> Vec<&[Operator]> {
        self.stages.iter().map(Stage::kraus).collect()
    }

    /// The flat Kraus list `U^dag K_n ... K_1 U`.
    pub fn kraus(&self) -> Vec<Operator> {
        let mut list = vec![Operator::identity(self.space)];
        for stage in &self.stages {
            let mut next = Vec::with_capacity(list.len() * stage.kraus().len());
            for k in stage.kraus() {
                for acc in &list {
                    next.push(k * acc);
                }
            }
            list = next;
        }
        match &self.frame {
            Some(u) => list.iter().map(|k| k.conjugated_by(u)).collect(),
            None => list,
        }
    }

    /// Applies the channel to any operator (not necessarily a state).
    pub fn apply_matrix(&self, x: &CMat) -> CMat {
        let mut m = match &self.frame {
            Some(u) => linalg::transform_by(x, u.matrix()),
            None => x.clone(),
        };
        for stage in &self.stages {
            m = stage.apply(&m);
        }
        match &self.frame {
            Some(u) => linalg::conjugate_by(&m, u.matrix()),
            None => m,
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let out = linalg::hermitize(&self.apply_matrix(rho.matrix()));
        DensityMatrix::from_matrix(self.space, out).expect("shape preserved")
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.space != next.space {
            return Err(Error::IncompatibleSpaces("channel spaces differ".into()));
        }
        let mut stages = self.stages_in_plain_frame();
        stages.extend(next.stages_in_plain_frame());
        Channel::from_stages(self.space, stages, None)
    }

    fn stages_in_plain_frame(&self) -> Vec<Vec<Operator>> {
        match &self.frame {
            None => self.stages.iter().map(|s| s.kraus().to_vec()).collect(),
            Some(u) => {
                // U^dag S(U . U^dag) U as a list of stages: fold the frame into
                // the first and last stage
                let mut out: Vec<Vec<Operator>> =
                    self.stages.iter().map(|s| s.kraus().to_vec()).collect();
                let last = out.len() - 1;
                let ud = u.dagger();
                for k in out[0].iter_mut() {
                    *k = &*k * u;
                }
                for k in out[last].iter_mut() {
                    *k = &ud * &*k;
                }
                out
            }
        }
    }
}

fn check_strength(v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite);
    }
    if v < 0.0 {
        return Err(Error::NegativeStrength(v));
    }
    Ok(())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Single-mode loss Kraus operators `L_p`, `p = 0..=max_jumps`.
fn loss_kraus_single(cutoff: usize, kappa_t: f64, max_jumps: usize) -> Vec<CMat> {
    let eta = (-kappa_t).exp();
    let ln_eta = -kappa_t;
    let ln_loss = (-(-kappa_t).exp_m1()).ln();
    (0..=max_jumps)
        .map(|p| {
            let mut m = linalg::zeros(cutoff, cutoff);
            for n in p..cutoff {
                // <n-p| L_p |n> = sqrt(C(n,p)) (1-eta)^{p/2} eta^{(n-p)/2}
                let ln_c = ln_factorial(n) - ln_factorial(p) - ln_factorial(n - p);
                let amp = if p == 0 {
                    eta.powf((n as f64) / 2.0)
                } else {
                    (0.5 * (ln_c + p as f64 * ln_loss + (n - p) as f64 * ln_eta)).exp()
                };
                m[(n - p, n)] = linalg::cr(amp);
            }
            m
        })
        .collect()
}

pub fn loss_channel(space: FockSpace, mode: usize, kappa_t: f64, max_jumps: usize) -> Result<Channel> {
    space.check_mode(mode)?;
    check_strength(kappa_t)?;
    Channel::from_kraus(space, loss_kraus(space, mode, kappa_t, max_jumps)?)
}

fn loss_kraus(space: FockSpace, mode: usize, kappa_t: f64, max_jumps: usize) -> Result<Vec<Operator>> {
    if kappa_t == 0.0 {
        return Ok(vec![Operator::identity(space)]);
    }
    let max_jumps = max_jumps.min(space.cutoff() - 1);
    loss_kraus_single(space.cutoff(), kappa_t, max_jumps)
        .iter()
        .map(|m| Operator::new(space, linalg::embed(m, mode, space.modes(), space.cutoff())))
        .collect()
}

/// Smallest `r >= lambda` with `lambda^{r+1}/(r+1)! e^{-lambda} <= 1e-12`,
/// where `lambda = gamma_t n_max^2`. Past the Poisson mode the omitted tail is
/// dominated by this first omitted term.
pub fn default_max_r(cutoff: usize, gamma_t: f64) -> usize {
    let n_max = (cutoff - 1) as f64;
    let lambda = gamma_t * n_max * n_max;
    if lambda == 0.0 {
        return 0;
    }
    let ln_term = |k: usize| k as f64 * lambda.ln() - ln_factorial(k) - lambda;
    let mut r = lambda.ceil() as usize;
    while ln_term(r + 1) > DEPHASING_TAIL.ln() {
        r += 1;
    }
    r
}

fn dephasing_kraus(space: FockSpace, mode: usize, gamma_t: f64, max_r: usize) -> Result<Vec<Operator>> {
    if gamma_t == 0.0 {
        return Ok(vec![Operator::identity(space)]);
    }
    let ln_g = gamma_t.ln();
    (0..=max_r)
        .map(|r| {
            // D_r = sqrt(g^r / r!) e^{-g n^2 / 2} n^r, evaluated in log space
            let diag = |i: usize| {
                let n = space.occupation(i, mode);
                if n == 0 {
                    return if r == 0 { linalg::ONE } else { linalg::ZERO };
                }
                let nf = n as f64;
                let ln = 0.5 * (r as f64 * ln_g - ln_factorial(r) - gamma_t * nf * nf) + r as f64 * nf.ln();
                linalg::cr(ln.exp())
            };
            Ok(Operator::diagonal(space, diag))
        })
        .collect()
}

pub fn dephasing_channel(space: FockSpace, mode: usize, gamma_t: f64, max_r: usize) -> Result<Channel> {
    space.check_mode(mode)?;
    check_strength(gamma_t)?;
    Channel::from_kraus(space, dephasing_kraus(space, mode, gamma_t, max_r)?)
}

/// Dephasing channel with the default Kraus truncation.
pub fn dephasing_channel_default(space: FockSpace, mode: usize, gamma_t: f64) -> Result<Channel> {
    dephasing_channel(space, mode, gamma_t, default_max_r(space.cutoff(), gamma_t))
}

/// Kraus-index maxima for [`combined_channel`]; `None` selects the default
/// rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KrausMaxima {
    pub max_jumps: Option<usize>,
    pub max_r: Option<usize>,
}

/// `{L^(1)_p L^(2)_q D^(1)_r D^(2)_s}` on a two-mode space: dephasing acts
/// first, then loss.
pub fn combined_channel(space: FockSpace, params: NoiseParams, maxima: KrausMaxima) -> Result<Channel> {
    params.validate()?;
    if space.modes() != 2 {
        return Err(Error::Unsupported("combined channel needs two modes".into()));
    }
    let jumps = maxima.max_jumps.unwrap_or(space.cutoff() - 1);
    let r_for = |g: f64| maxima.max_r.unwrap_or_else(|| default_max_r(space.cutoff(), g));
    let d1 = dephasing_kraus(space, 0, params.gamma1_t, r_for(params.gamma1_t))?;
    let d2 = dephasing_kraus(space, 1, params.gamma2_t, r_for(params.gamma2_t))?;
    let l1 = loss_kraus(space, 0, params.kappa1_t, jumps)?;
    let l2 = loss_kraus(space, 1, params.kappa2_t, jumps)?;
    let stages: Vec<Vec<Operator>> = [d2, d1, l2, l1]
        .into_iter()
        .filter(|s| !(s.len() == 1 && s[0].max_abs_diff(&Operator::identity(space)) == 0.0))
        .collect();
    if stages.is_empty() {
        return Ok(Channel::identity(space));
    }
    Channel::from_stages(space, stages, None)
}

/// Single-mode version of [`combined_channel`] for one-mode codes.
pub fn single_mode_channel(space: FockSpace, kappa_t: f64, gamma_t: f64) -> Result<Channel> {
    if space.modes() != 1 {
        return Err(Error::Unsupported("single-mode channel needs one mode".into()));
    }
    check_strength(kappa_t)?;
    check_strength(gamma_t)?;
    let d = dephasing_kraus(space, 0, gamma_t, default_max_r(space.cutoff(), gamma_t))?;
    let l = loss_kraus(space, 0, kappa_t, space.cutoff() - 1)?;
    Channel::from_stages(space, vec![d, l], None)
}

/// `rho -> U^dag N(U rho U^dag) U`; each Kraus operator becomes `U^dag K U`.
pub fn rotated_channel(channel: &Channel, u: &Operator) -> Result<Channel> {
    if u.space() != channel.space {
        return Err(Error::IncompatibleSpaces("frame unitary space".into()));
    }
    let frame = match &channel.frame {
        Some(inner) => inner * u,
        None => u.clone(),
    };
    let mut out = channel.clone();
    out.frame = Some(frame);
    Ok(out)
}

/// `exp(i A(theta1, theta2))` with `A = U^dag (theta1 n_1 + theta2 n_2) U`
/// and `U = U_BS(delta, phi)`.
pub fn continuous_dephasing_kraus(
    space: FockSpace,
    theta1: f64,
    theta2: f64,
    delta: f64,
    phi: f64,
) -> Result<Operator> {
    let u = fock::beam_splitter(space, 0, 1, delta, phi)?;
    let diag = Operator::diagonal(space, |i| {
        c64::cis(theta1 * space.occupation(i, 0) as f64 + theta2 * space.occupation(i, 1) as f64)
    });
    Ok(diag.conjugated_by(&u))
}

/// `{sqrt(p_k) exp(i phi_k n_tot)}`.
pub fn correlated_dephasing(space: FockSpace, mixture: &PhaseMixture) -> Result<Channel> {
    let kraus = mixture
        .points()
        .iter()
        .map(|&(phi, p)| {
            Operator::diagonal(space, |i| c64::cis(phi * space.total_photons(i) as f64) * p.sqrt())
        })
        .collect();
    Channel::from_kraus(space, kraus)
}

pub fn apply(channel: &Channel, rho: &DensityMatrix) -> DensityMatrix {
    channel.apply(rho)
}
