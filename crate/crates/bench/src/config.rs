//! Experiment configuration: one JSON document per run.

use std::path::PathBuf;

use rsbq_core::channels::{Discretization, PhaseMixture};
use rsbq_core::codes::{self, Code};
use rsbq_core::optrec::{ChannelKind, SdpOptions};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KlCheck,
    Sweep,
    Sdp,
    Landscape,
    PhaseDist,
    CorrDemo,
    Gates,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::KlCheck => "kl-check",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Sdp => "sdp",
            ExperimentKind::Landscape => "landscape",
            ExperimentKind::PhaseDist => "phase-dist",
            ExperimentKind::CorrDemo => "corr-demo",
            ExperimentKind::Gates => "gates",
        }
    }

    /// Stem used for output file names.
    pub fn stem(&self) -> &'static str {
        match self {
            ExperimentKind::KlCheck => "kl_check",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Sdp => "sdp",
            ExperimentKind::Landscape => "landscape",
            ExperimentKind::PhaseDist => "phase_dist",
            ExperimentKind::CorrDemo => "corr_demo",
            ExperimentKind::Gates => "gates",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeFamily {
    TwoModeBinomial,
    SingleModeBinomial,
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub family: CodeFamily,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub cutoff: Option<usize>,
}

fn default_n() -> usize {
    2
}

fn default_d() -> usize {
    2
}

impl CodeSpec {
    pub fn two_mode(n: usize) -> Self {
        Self { family: CodeFamily::TwoModeBinomial, name: None, n, k: None, d: 2, delta: None, phi: None, cutoff: None }
    }

    pub fn single_mode(n: usize, k: usize) -> Self {
        Self { family: CodeFamily::SingleModeBinomial, k: Some(k), ..Self::two_mode(n) }
    }

    pub fn trivial() -> Self {
        Self { family: CodeFamily::Trivial, n: 1, ..Self::two_mode(1) }
    }

    pub fn with_angles(mut self, delta: f64, phi: f64) -> Self {
        self.delta = Some(delta);
        self.phi = Some(phi);
        self
    }

    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match self.family {
            CodeFamily::TwoModeBinomial => format!("two_mode_n{}", self.n),
            CodeFamily::SingleModeBinomial => format!("single_mode_n{}_k{}", self.n, self.k.unwrap_or(2)),
            CodeFamily::Trivial => "trivial".into(),
        }
    }

    pub fn angles(&self) -> (f64, f64) {
        let (d, p) = codes::default_angles(self.n.max(1));
        (self.delta.unwrap_or(d), self.phi.unwrap_or(p))
    }

    pub fn build(&self) -> rsbq_core::Result<Code> {
        match self.family {
            CodeFamily::TwoModeBinomial => {
                let (d, p) = self.angles();
                codes::two_mode_binomial(self.n, d, p, self.cutoff.unwrap_or(codes::default_cutoff(self.n)))
            }
            CodeFamily::SingleModeBinomial => {
                let k = self.k.unwrap_or(2);
                codes::single_mode_binomial(self.n, k, self.cutoff.unwrap_or(self.n * k + 1))
            }
            CodeFamily::Trivial => codes::trivial_code(self.cutoff.unwrap_or(2)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    /// Standard deviation of the common phase; 0 gives a point mass.
    pub sigma: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_nodes() -> usize {
    41
}

impl MixtureSpec {
    pub fn build(&self) -> rsbq_core::Result<PhaseMixture> {
        if self.sigma == 0.0 {
            Ok(PhaseMixture::point_mass(0.0))
        } else {
            PhaseMixture::gaussian(self.sigma, self.nodes, Discretization::GaussHermite)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default = "default_kind")]
    pub kind: ChannelKind,
    #[serde(default)]
    pub strengths: Vec<f64>,
    #[serde(default)]
    pub mixture: Option<MixtureSpec>,
}

fn default_kind() -> ChannelKind {
    ChannelKind::Dephasing
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self { kind: default_kind(), strengths: vec![], mixture: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub feasibility_tol: f64,
    pub target_gap: f64,
    pub accept_gap: f64,
    pub max_iterations: usize,
    pub dim_cap: usize,
    /// Tolerance of the Knill-Laflamme verdict.
    pub kl_tol: f64,
    pub seed: u64,
    /// Random logical states drawn by `corr-demo` and `gates`.
    pub samples: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = SdpOptions::default();
        Self {
            feasibility_tol: o.feasibility_tol,
            target_gap: o.target_gap,
            accept_gap: o.accept_gap,
            max_iterations: o.max_iterations,
            dim_cap: o.dim_cap,
            kl_tol: 1e-10,
            seed: 0,
            samples: 10,
        }
    }
}

impl SolverSpec {
    pub fn sdp_options(&self) -> SdpOptions {
        SdpOptions {
            feasibility_tol: self.feasibility_tol,
            target_gap: self.target_gap,
            accept_gap: self.accept_gap,
            max_iterations: self.max_iterations,
            dim_cap: self.dim_cap,
            ..SdpOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Landscape points along `delta` in `[0, pi]`.
    pub deltas: usize,
    /// Landscape points along `phi` in `[0, pi/N]`.
    pub phis: usize,
    /// Phase-grid points per circle.
    pub phase_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { deltas: 17, phis: 17, phase_points: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub codes: Vec<CodeSpec>,
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// One problem found while validating a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl ExperimentConfig {
    /// The configuration a subcommand runs when no file is given.
    pub fn preset(kind: ExperimentKind) -> Self {
        let codes = match kind {
            ExperimentKind::Sweep => {
                vec![CodeSpec::two_mode(2), CodeSpec::two_mode(4), CodeSpec::single_mode(2, 2), CodeSpec::trivial()]
            }
            ExperimentKind::KlCheck => vec![CodeSpec::two_mode(4)],
            ExperimentKind::CorrDemo => vec![CodeSpec::two_mode(2), CodeSpec::two_mode(2)],
            _ => vec![CodeSpec::two_mode(2)],
        };
        let strengths = match kind {
            ExperimentKind::Sweep => vec![1e-3, 3e-3, 1e-2, 3e-2, 5e-2],
            _ => vec![1e-3],
        };
        let mixture = (kind == ExperimentKind::CorrDemo).then_some(MixtureSpec { sigma: 0.5, nodes: 41 });
        Self {
            experiment: kind,
            codes,
            channel: ChannelSpec { kind: ChannelKind::Dephasing, strengths, mixture },
            solver: SolverSpec::default(),
            grid: GridSpec::default(),
            output: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, Vec<ConfigIssue>> {
        serde_json::from_str(s).map_err(|e| vec![ConfigIssue::new("<document>", e.to_string())])
    }

    /// Fill empty code and strength lists from the preset of the same kind.
    pub fn resolved(mut self) -> Self {
        let preset = Self::preset(self.experiment);
        if self.codes.is_empty() {
            self.codes = preset.codes;
        }
        if self.channel.strengths.is_empty() {
            self.channel.strengths = preset.channel.strengths;
        }
        if self.channel.mixture.is_none() {
            self.channel.mixture = preset.channel.mixture;
        }
        self
    }

    /// Every problem with the configuration, in field order.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let kind = self.experiment;

        for (i, c) in self.codes.iter().enumerate() {
            let f = |name: &str| format!("codes[{i}].{name}");
            if c.d != 2 {
                out.push(ConfigIssue::new(f("d"), "only qubit codes (d = 2) are driven from the command line"));
            }
            if c.family == CodeFamily::TwoModeBinomial && c.k.is_some_and(|k| k != 2) {
                out.push(ConfigIssue::new(f("k"), "two-mode binomial codes are built with K = 2"));
            }
            for (name, v) in [("delta", c.delta), ("phi", c.phi)] {
                if v.is_some_and(|x| !x.is_finite()) {
                    out.push(ConfigIssue::new(f(name), "must be finite"));
                }
            }
            if let Some(name) = &c.name {
                if name.is_empty() || name.contains([',', ' ', '\t', '\n', '"']) {
                    out.push(ConfigIssue::new(f("name"), "must be non-empty without commas, quotes or whitespace"));
                }
            }
            if out.is_empty() {
                if let Err(e) = c.build() {
                    out.push(ConfigIssue::new(format!("codes[{i}]"), e.to_string()));
                }
            }
        }

        let s = &self.channel.strengths;
        if s.iter().any(|x| !x.is_finite() || *x < 0.0) {
            out.push(ConfigIssue::new("channel.strengths", "strengths must be finite and nonnegative"));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            out.push(ConfigIssue::new("channel.strengths", "strengths must be strictly increasing"));
        }
        if let Some(m) = &self.channel.mixture {
            if !m.sigma.is_finite() || m.sigma < 0.0 {
                out.push(ConfigIssue::new("channel.mixture.sigma", "must be finite and nonnegative"));
            }
            if m.nodes == 0 {
                out.push(ConfigIssue::new("channel.mixture.nodes", "must be positive"));
            }
        }

        let sv = &self.solver;
        for (name, v) in [
            ("feasibility_tol", sv.feasibility_tol),
            ("target_gap", sv.target_gap),
            ("accept_gap", sv.accept_gap),
            ("kl_tol", sv.kl_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                out.push(ConfigIssue::new(format!("solver.{name}"), "tolerances must be positive and finite"));
            }
        }
        if sv.accept_gap < sv.target_gap {
            out.push(ConfigIssue::new("solver.accept_gap", "must not be smaller than target_gap"));
        }
        if sv.max_iterations == 0 {
            out.push(ConfigIssue::new("solver.max_iterations", "must be positive"));
        }
        if sv.dim_cap == 0 {
            out.push(ConfigIssue::new("solver.dim_cap", "must be positive"));
        }

        let two_mode_only = |out: &mut Vec<ConfigIssue>, what: &str| {
            for (i, c) in self.codes.iter().enumerate() {
                if c.family != CodeFamily::TwoModeBinomial {
                    out.push(ConfigIssue::new(format!("codes[{i}].family"), format!("{what} needs two_mode_binomial codes")));
                }
            }
        };
        if self.codes.is_empty() {
            out.push(ConfigIssue::new("codes", "at least one code is required"));
        }
        match kind {
            ExperimentKind::KlCheck => {
                two_mode_only(&mut out, "kl-check");
                if self.channel.kind == ChannelKind::Combined {
                    out.push(ConfigIssue::new("channel.kind", "kl-check takes loss or dephasing"));
                }
                if s.is_empty() {
                    out.push(ConfigIssue::new("channel.strengths", "at least one strength is required"));
                }
            }
            ExperimentKind::Sweep | ExperimentKind::Sdp => {
                if s.is_empty() {
                    out.push(ConfigIssue::new("channel.strengths", "at least one strength is required"));
                }
            }
            ExperimentKind::Landscape => {
                two_mode_only(&mut out, "landscape");
                if s.len() != 1 {
                    out.push(ConfigIssue::new("channel.strengths", "landscape takes exactly one strength"));
                }
                if self.channel.kind != ChannelKind::Dephasing {
                    out.push(ConfigIssue::new("channel.kind", "landscape is defined for dephasing"));
                }
                if self.grid.deltas == 0 || self.grid.phis == 0 {
                    out.push(ConfigIssue::new("grid", "landscape grids need at least one point per axis"));
                }
            }
            ExperimentKind::PhaseDist => {
                two_mode_only(&mut out, "phase-dist");
                if self.grid.phase_points < 2 {
                    out.push(ConfigIssue::new("grid.phase_points", "must be at least 2"));
                }
            }
            ExperimentKind::CorrDemo => {
                two_mode_only(&mut out, "corr-demo");
                if self.codes.len() > 2 {
                    out.push(ConfigIssue::new("codes", "corr-demo takes the data code and optionally the auxiliary code"));
                }
                if self.channel.mixture.is_none() {
                    out.push(ConfigIssue::new("channel.mixture", "corr-demo needs a phase mixture"));
                }
                if sv.samples == 0 {
                    out.push(ConfigIssue::new("solver.samples", "must be positive"));
                }
            }
            ExperimentKind::Gates => {
                two_mode_only(&mut out, "gates");
                if self.codes.len() > 2 {
                    out.push(ConfigIssue::new("codes", "gates takes one or two codes"));
                }
                if sv.samples == 0 {
                    out.push(ConfigIssue::new("solver.samples", "must be positive"));
                }
            }
        }
        out
    }
}
