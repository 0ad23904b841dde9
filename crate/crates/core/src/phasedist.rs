//! Canonical phase measurements on one and two modes, joint outcome
//! distributions on the torus, and the dual-word entries of the dephasing
//! KL matrix.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::NoiseParams;
use crate::codes::{self, Code};
use crate::error::{Error, Result};
use crate::fock::{FockSpace, Operator, StateVector};
use crate::linalg::{c64, CMat};
use crate::optrec::{self, fmt_sig, SdpOptions};

/// `G` equally spaced angles `2 pi g / G` on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseGrid {
    points: usize,
}

impl PhaseGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Unsupported(format!("phase grid needs at least 2 points, got {points}")));
        }
        Ok(Self { points })
    }

    /// Smallest grid with `G >= 8N` that also resolves every Fock level.
    pub fn for_order(n: usize, cutoff: usize) -> Self {
        Self { points: (8 * n).max(cutoff).max(2) }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn angle(&self, g: usize) -> f64 {
        2.0 * PI * g as f64 / self.points as f64
    }

    pub fn measure(&self) -> f64 {
        2.0 * PI / self.points as f64
    }
}

/// `(1/2pi) |phi><phi|` with `|phi> = sum_{n<D} e^{i n phi} |n>`.
pub fn phase_povm_element(space: FockSpace, phi: f64) -> Result<Operator> {
    if space.modes() != 1 {
        return Err(Error::Unsupported(format!(
            "single-mode phase POVM on a {}-mode space",
            space.modes()
        )));
    }
    let d = space.cutoff();
    let m = CMat::from_fn(d, d, |r, c| c64::cis(phi * (r as f64 - c as f64)) / (2.0 * PI));
    Operator::new(space, m)
}

/// Single-mode outcome density on the grid, normalized so that
/// `sum p * measure = 1`.
pub fn phase_distribution(state: &StateVector, grid: PhaseGrid) -> Result<Vec<f64>> {
    let space = state.space();
    if space.modes() != 1 {
        return Err(Error::Unsupported("phase_distribution expects one mode".into()));
    }
    let amps = state.amplitudes();
    let mut p: Vec<f64> = (0..grid.points())
        .map(|g| {
            let th = grid.angle(g);
            let a: c64 = (0..space.cutoff()).map(|n| c64::cis(-th * n as f64) * amps[n]).sum();
            a.norm_sqr() / (2.0 * PI)
        })
        .collect();
    normalize(&mut p, grid.measure())?;
    Ok(p)
}

fn normalize(p: &mut [f64], measure: f64) -> Result<()> {
    let total: f64 = p.iter().sum::<f64>() * measure;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Unsupported("phase distribution has zero mass on the grid".into()));
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(())
}

/// Joint outcome density of `Pi(phi1) (x) Pi(phi2)` on a `G x G` grid,
/// stored row-major with `phi1` slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusDistribution {
    grid: PhaseGrid,
    p: Vec<f64>,
}

impl TorusDistribution {
    pub fn new(grid: PhaseGrid, p: Vec<f64>) -> Result<Self> {
        let g = grid.points();
        if p.len() != g * g {
            return Err(Error::DimensionMismatch { expected: g * g, got: p.len() });
        }
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Unsupported("torus density must be finite and nonnegative".into()));
        }
        let mut p = p;
        normalize(&mut p, grid.measure() * grid.measure())?;
        Ok(Self { grid, p })
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, g1: usize, g2: usize) -> f64 {
        self.p[g1 * self.grid.points() + g2]
    }

    pub fn cell_measure(&self) -> f64 {
        self.grid.measure() * self.grid.measure()
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().sum::<f64>() * self.cell_measure()
    }

    /// Probability mass in the cells where `keep(phi1, phi2)` holds.
    pub fn mass_where(&self, keep: impl Fn(f64, f64) -> bool) -> f64 {
        let g = self.grid.points();
        let mut acc = 0.0;
        for a in 0..g {
            for b in 0..g {
                if keep(self.grid.angle(a), self.grid.angle(b)) {
                    acc += self.get(a, b);
                }
            }
        }
        acc * self.cell_measure()
    }

    /// Largest change under the grid shift `(g1, g2) -> (g1 + s, g2 + s)`.
    pub fn shift_defect(&self, s: usize) -> f64 {
        let g = self.grid.points();
        let mut worst: f64 = 0.0;
        for a in 0..g {
            for b in 0..g {
                worst = worst.max((self.get(a, b) - self.get((a + s) % g, (b + s) % g)).abs());
            }
        }
        worst
    }

    /// `phi1,phi2,p` rows in grid order.
    pub fn to_csv(&self) -> String {
        let g = self.grid.points();
        let mut out = String::from("phi1,phi2,p\n");
        for a in 0..g {
            for b in 0..g {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_sig(self.grid.angle(a)),
                    fmt_sig(self.grid.angle(b)),
                    fmt_sig(self.get(a, b))
                ));
            }
        }
        out
    }
}

/// `p(phi1, phi2) = <psi| Pi(phi1) (x) Pi(phi2) |psi>` on the grid.
pub fn joint_phase_distribution(state: &StateVector, grid: PhaseGrid) -> Result<TorusDistribution> {
    let space = state.space();
    if space.modes() != 2 {
        return Err(Error::Unsupported(format!(
            "joint phase distribution on a {}-mode space",
            space.modes()
        )));
    }
    let d = space.cutoff();
    let g = grid.points();
    let amps = state.amplitudes();
    let psi = CMat::from_fn(d, d, |a, b| amps[a * d + b]);
    let f = CMat::from_fn(g, d, |k, n| c64::cis(-grid.angle(k) * n as f64));
    let a = &(&f * &psi) * f.transpose();
    let norm = 4.0 * PI * PI;
    let p = (0..g * g).map(|i| a[(i / g, i % g)].norm_sqr() / norm).collect();
    TorusDistribution::new(grid, p)
}

/// Total-variation distance and Bhattacharyya overlap of two densities on
/// the same grid.
pub fn distinguishability(p: &TorusDistribution, q: &TorusDistribution) -> Result<(f64, f64)> {
    if p.grid != q.grid {
        return Err(Error::DimensionMismatch { expected: p.grid.points(), got: q.grid.points() });
    }
    let m = p.cell_measure();
    let tv = 0.5 * p.p.iter().zip(&q.p).map(|(a, b)| (a - b).abs()).sum::<f64>() * m;
    let bc = p.p.iter().zip(&q.p).map(|(a, b)| (a * b).sqrt()).sum::<f64>() * m;
    Ok((tv.clamp(0.0, 1.0), bc.clamp(0.0, 1.0)))
}

fn require_two_mode(code: &Code) -> Result<()> {
    if code.space().modes() != 2 || code.dim() != 2 {
        return Err(Error::Unsupported("dual-word entries need a two-mode qubit code".into()));
    }
    Ok(())
}

/// `exp(i theta1 n_1 + i theta2 n_2)` applied to a physical state.
fn dephase(v: &StateVector, theta1: f64, theta2: f64) -> StateVector {
    let space = v.space();
    let op = Operator::diagonal(space, |i| {
        c64::cis(theta1 * space.occupation(i, 0) as f64 + theta2 * space.occupation(i, 1) as f64)
    });
    op.apply(v)
}

/// `<-_N| exp(i A(theta1, theta2)) |+_N>` for the code's physical words.
pub fn dual_offdiagonal(code: &Code, theta1: f64, theta2: f64) -> Result<c64> {
    require_two_mode(code)?;
    let (plus, minus) = codes::dual_words(code)?;
    Ok(minus.inner(&dephase(&plus, theta1, theta2)))
}

/// `|<+|E|+> - <-|E|->|` for `E = exp(i A(theta1, theta2))`.
pub fn dual_diagonal_gap(code: &Code, theta1: f64, theta2: f64) -> Result<f64> {
    require_two_mode(code)?;
    let (plus, minus) = codes::dual_words(code)?;
    let pp = plus.inner(&dephase(&plus, theta1, theta2));
    let mm = minus.inner(&dephase(&minus, theta1, theta2));
    Ok((pp - mm).norm())
}

/// One `(delta, phi)` cell of an infidelity landscape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub delta: f64,
    pub phi: f64,
    pub infidelity: f64,
    pub feasibility: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Optimal-recovery entanglement infidelity over a `delta x phi` grid,
/// row-major with `delta` slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub n: usize,
    pub k: usize,
    pub gamma_t: f64,
    pub deltas: Vec<f64>,
    pub phis: Vec<f64>,
    pub points: Vec<LandscapePoint>,
}

impl Landscape {
    pub fn at(&self, i: usize, j: usize) -> &LandscapePoint {
        &self.points[i * self.phis.len() + j]
    }

    /// Grid indices of the smallest infidelity.
    pub fn argmin(&self) -> (usize, usize) {
        let best = self
            .points
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.infidelity.total_cmp(&b.1.infidelity))
            .map(|(i, _)| i)
            .unwrap_or(0);
        (best / self.phis.len(), best % self.phis.len())
    }

    /// Index of the smallest infidelity along the `phi` row at `delta_index`.
    pub fn argmin_phi(&self, delta_index: usize) -> usize {
        (0..self.phis.len())
            .min_by(|&a, &b| self.at(delta_index, a).infidelity.total_cmp(&self.at(delta_index, b).infidelity))
            .unwrap_or(0)
    }

    /// `max - min` of the infidelity along the `phi` row at `delta_index`.
    pub fn phi_range(&self, delta_index: usize) -> f64 {
        let row: Vec<f64> = (0..self.phis.len()).map(|j| self.at(delta_index, j).infidelity).collect();
        let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }

    /// `delta,phi,infidelity` rows in grid order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,phi,infidelity\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", fmt_sig(p.delta), fmt_sig(p.phi), fmt_sig(p.infidelity)));
        }
        out
    }
}

/// `count` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Entanglement infidelity of the optimal recovery of the two-mode binomial
/// code at every `(delta, phi)` under symmetric dephasing `gamma_t`.
pub fn infidelity_landscape(
    n: usize,
    k: usize,
    gamma_t: f64,
    deltas: &[f64],
    phis: &[f64],
    opts: &SdpOptions,
) -> Result<Landscape> {
    if k != 2 {
        return Err(Error::Unsupported(format!("landscape for K={k}; only K=2 two-mode codes are built")));
    }
    let params = NoiseParams::dephasing(gamma_t)?;
    let cells: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| phis.iter().map(move |&p| (d, p))).collect();
    let points = cells
        .par_iter()
        .map(|&(delta, phi)| {
            let code = codes::two_mode_binomial(n, delta, phi, codes::default_cutoff(n))?;
            let channel = optrec::noise_channel(code.space(), params)?;
            let res = optrec::optimal_recovery(&code, &channel, opts)?;
            Ok(LandscapePoint {
                delta,
                phi,
                infidelity: 1.0 - res.fidelity,
                feasibility: res.feasibility_defect,
                residual: res.optimality_residual,
                iterations: res.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Landscape { n, k, gamma_t, deltas: deltas.to_vec(), phis: phis.to_vec(), points })
}
