//! Experiment orchestration.

use std::f64::consts::PI;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsbq_core::circuits::{self, targets, GateKind, GateReport, MeasurementModel, Register};
use rsbq_core::codes::{self, Code};
use rsbq_core::klrecovery as kl;
use rsbq_core::linalg::{self, c64, CCol, CMat};
use rsbq_core::optrec::{self, ChannelKind, SweepCode, SweepRecord, SWEEP_HEADER};
use rsbq_core::phasedist::{self, PhaseGrid};
use rsbq_core::Error as CoreError;
use serde_json::{json, Value};

use crate::config::{ConfigIssue, ExperimentConfig, ExperimentKind};
use crate::plotdata::{emit_plotdata, num, Table};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration ({} issue(s))", .0.len())]
    Config(Vec<ConfigIssue>),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Core(CoreError),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Solver(_) => 3,
            _ => 1,
        }
    }
}

impl From<CoreError> for BenchError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonConvergence { .. } => BenchError::Solver(e.to_string()),
            CoreError::DimensionCap { .. } => BenchError::Config(vec![ConfigIssue::new("solver.dim_cap", e.to_string())]),
            other => BenchError::Core(other),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Output directory; falls back to the config's `output`, then `.`.
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

struct Product {
    tables: Vec<(String, Table)>,
    summary: Value,
    log: Vec<String>,
}

/// Validate, run and write every output of one experiment.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, BenchError> {
    let mut cfg = config.clone().resolved();
    if let Some(seed) = opts.seed {
        cfg.solver.seed = seed;
    }
    let issues = cfg.validate();
    if !issues.is_empty() {
        return Err(BenchError::Config(issues));
    }
    let dir = opts.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    let stem = cfg.experiment.stem();

    let product = match cfg.experiment {
        ExperimentKind::KlCheck => kl_check(&cfg)?,
        ExperimentKind::Sweep => sweep(&cfg)?,
        ExperimentKind::Sdp => sdp(&cfg)?,
        ExperimentKind::Landscape => landscape(&cfg)?,
        ExperimentKind::PhaseDist => phase_dist(&cfg)?,
        ExperimentKind::CorrDemo => corr_demo(&cfg)?,
        ExperimentKind::Gates => gates(&cfg)?,
    };

    let mut files = Vec::new();
    for (suffix, table) in &product.tables {
        let name = if suffix.is_empty() { stem.to_string() } else { format!("{stem}_{suffix}") };
        files.extend(emit_plotdata(table, &dir, &name)?);
    }
    let summary = json!({
        "experiment": cfg.experiment.as_str(),
        "config": cfg,
        "result": product.summary,
    });
    files.push(write(&dir, &format!("{stem}.json"), &(serde_json::to_string_pretty(&summary).unwrap() + "\n"))?);
    let mut log = format!("# rsbq {}\n", cfg.experiment.as_str());
    for line in &product.log {
        log.push_str(line);
        log.push('\n');
    }
    files.push(write(&dir, &format!("{stem}.log"), &log)?);
    Ok(RunOutcome { files, summary })
}

fn write(dir: &Path, name: &str, text: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

fn built(cfg: &ExperimentConfig) -> Result<Vec<Code>, BenchError> {
    Ok(cfg.codes.iter().map(|c| c.build()).collect::<Result<Vec<_>, _>>()?)
}

fn kl_check(cfg: &ExperimentConfig) -> Result<Product, BenchError> {
    let mut table =
        Table::new(&["code", "N", "delta", "phi", "channel", "strength", "deviation", "tolerance", "verdict"]);
    let mut reports = Vec::new();
    let mut log = Vec::new();
    for (spec, code) in cfg.codes.iter().zip(built(cfg)?) {
        let (delta, phi) = code.delta_phi();
        for &s in &cfg.channel.strengths {
            let ops = match cfg.channel.kind {
                ChannelKind::Loss => kl::first_order_loss(code.space(), delta, s, s)?,
                _ => kl::first_order_dephasing(code.space(), delta, phi, s, s, code.order())?,
            };
            let rep = kl::kl_check_first_order(&code, &ops, cfg.solver.kl_tol)?;
            let verdict = if rep.satisfied { "satisfied" } else { "violated" };
            log.push(format!("kl code={} strength={} deviation={} verdict={verdict}", spec.label(), num(s), num(rep.deviation)));
            table.push(vec![
                spec.label(),
                code.order().to_string(),
                num(delta),
                num(phi),
                cfg.channel.kind.as_str().into(),
                num(s),
                num(rep.deviation),
                num(rep.tolerance),
                verdict.into(),
            ]);
            reports.push(json!({ "code": spec.label(), "strength": s, "verdict": verdict, "report": rep }));
        }
    }
    Ok(Product { tables: vec![(String::new(), table)], summary: json!({ "checks": reports }), log })
}

fn record_log(r: &SweepRecord) -> String {
    format!(
        "sdp code={} channel={} strength={} iters={} feasibility={} residual={} F_e={}",
        r.code,
        r.channel.as_str(),
        num(r.strength),
        r.iters,
        num(r.feasibility),
        num(r.residual),
        num(r.f_e)
    )
}

fn sweep_table(records: &[SweepRecord]) -> Table {
    Table::parse_csv(&optrec::sweep_csv(records)).unwrap_or_else(|| Table::new(&SWEEP_HEADER.split(',').collect::<Vec<_>>()))
}

/// Codes ranked by `F_e` at each strength, best first.
fn ranking(records: &[SweepRecord], strengths: &[f64]) -> Value {
    let per: Vec<Value> = strengths
        .iter()
        .map(|&s| {
            let mut at: Vec<&SweepRecord> = records.iter().filter(|r| r.strength == s).collect();
            at.sort_by(|a, b| b.f_e.total_cmp(&a.f_e));
            json!({ "strength": s, "order": at.iter().map(|r| r.code.clone()).collect::<Vec<_>>() })
        })
        .collect();
    Value::Array(per)
}

fn sweep(cfg: &ExperimentConfig) -> Result<Product, BenchError> {
    let codes: Vec<SweepCode> =
        cfg.codes.iter().zip(built(cfg)?).map(|(s, c)| SweepCode::new(s.label(), c)).collect();
    let records = optrec::fidelity_sweep(&codes, cfg.channel.kind, &cfg.channel.strengths, &cfg.solver.sdp_options())?;
    let log = records.iter().map(record_log).collect();
    Ok(Product {
        tables: vec![(String::new(), sweep_table(&records))],
        summary: json!({ "ranking": ranking(&records, &cfg.channel.strengths) }),
        log,
    })
}

fn sdp(cfg: &ExperimentConfig) -> Result<Product, BenchError> {
    let opts = cfg.solver.sdp_options();
    let mut records = Vec::new();
    let mut recoveries = Vec::new();
    for (spec, code) in cfg.codes.iter().zip(built(cfg)?) {
        let (delta, phi) = code.delta_phi();
        for &s in &cfg.channel.strengths {
            let ch = optrec::noise_channel(code.space(), cfg.channel.kind.params(s)?)?;
            let res = optrec::optimal_recovery(&code, &ch, &opts)?;
            records.push(SweepRecord {
                code: spec.label(),
                family: code.family(),
                n: code.order(),
                k: code.truncation(),
                delta,
                phi,
                channel: cfg.channel.kind,
                strength: s,
                f_e: res.fidelity,
                f_avg: res.average_fidelity,
                feasibility: res.feasibility_defect,
                residual: res.optimality_residual,
                iters: res.iterations,
            });
            recoveries.push(json!({
                "code": spec.label(),
                "strength": s,
                "support_dim": res.support_dim,
                "kraus_rank": res.kraus().len(),
                "choi_min_eigenvalue": res.recovery.min_eigenvalue(),
                "tp_defect": res.recovery.tp_defect(),
            }));
        }
    }
    let log = records.iter().map(record_log).collect();
    Ok(Product { tables: vec![(String::new(), sweep_table(&records))], summary: json!({ "recoveries": recoveries }), log })
}

fn landscape(cfg: &ExperimentConfig) -> Result<Product, BenchError> {
    let n = cfg.codes[0].n;
    let deltas = phasedist::linspace(0.0, PI, cfg.grid.deltas);
    let phis = phasedist::linspace(0.0, PI / n as f64, cfg.grid.phis);
    let gamma_t = cfg.channel.strengths[0];
    let l = phasedist::infidelity_landscape(n, 2, gamma_t, &deltas, &phis, &cfg.solver.sdp_options())?;
    let mut table = Table::new(&["delta", "phi", "infidelity"]);
    let mut log = Vec::new();
    for p in &l.points {
        table.push(vec![num(p.delta), num(p.phi), num(p.infidelity)]);
        log.push(format!(
            "sdp delta={} phi={} iters={} feasibility={} residual={}",
            num(p.delta),
            num(p.phi),
            p.iterations,
            num(p.feasibility),
            num(p.residual)
        ));
    }
    let (i, j) = l.argmin();
    let best = l.at(i, j);
    let summary = json!({
        "n": n,
        "gamma_t": gamma_t,
        "argmin": { "delta": best.delta, "phi": best.phi, "infidelity": best.infidelity },
        "phi_range_at_argmin_delta": l.phi_range(i),
    });
    Ok(Product { tables: vec![(String::new(), table)], summary, log })
}

fn phase_dist(cfg: &ExperimentConfig) -> Result<Product, BenchError> {
    let grid = PhaseGrid::new(cfg.grid.phase_points)?;
    let mut tables = Vec::new();
    let mut pairs = Vec::new();
    for (spec, code) in cfg.codes.iter().zip(built(cfg)?) {
        let (plus, minus) = codes::dual_words(&code)?;
        let dp = phasedist::joint_phase_distribution(&plus, grid)?;
        let dm = phasedist::joint_phase_distribution(&minus, grid)?;
        let (tv, bc) = phasedist::distinguishability(&dp, &dm)?;
        let prefix = if cfg.codes.len() > 1 { format!("{}_", spec.label()) } else { String::new() };
        for (tag, d) in [("plus", &dp), ("minus", &dm)] {
            let t = Table::parse_csv(&d.to_csv()).expect("torus csv is well formed");
            tables.push((format!("{prefix}{tag}"), t));
        }
        pairs.push(json!({ "code": spec.label(), "total_variation": tv, "bhattacharyya": bc }));
    }
    Ok(Product { tables, summary: json!({ "grid": grid.points(), "pairs": pairs }), log: vec![] })
}

/// Haar-random pure qubit state.
fn random_ket(rng: &mut ChaCha8Rng) -> CCol {
    let theta = (1.0 - 2.0 * rng.gen::<f64>()).acos();
    let phi = 2.0 * PI * rng.gen::<f64>();
    CCol::from_fn(2, |i| if i == 0 { c64::new((theta / 2.0).cos(), 0.0) } else { c64::cis(phi) * (theta / 2.0).sin() })
}

fn corr_demo(cfg: &ExperimentConfig) -> Result<Product, BenchError> {
    let codes = built(cfg)?;
    let (code_n, code_l) = (&codes[0], codes.get(1).unwrap_or(&codes[0]));
    let mixture = cfg.channel.mixture.as_ref().expect("validated").build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    let mut table = Table::new(&["sample", "fidelity"]);
    let mut worst: f64 = 1.0;
    for i in 0..cfg.solver.samples {
        let psi = random_ket(&mut rng);
        let out = circuits::correlated_ec_circuit(code_n, code_l, &mixture, &linalg::outer(&psi, &psi))?;
        worst = worst.min(out.fidelity);
        table.push(vec![i.to_string(), num(out.fidelity)]);
    }
    Ok(Product {
        tables: vec![(String::new(), table)],
        summary: json!({ "min_fidelity": worst, "samples": cfg.solver.samples }),
        log: vec![],
    })
}

fn gates(cfg: &ExperimentConfig) -> Result<Product, BenchError> {
    let codes = built(cfg)?;
    let (a, b) = (&codes[0], codes.get(1).unwrap_or(&codes[0]));
    let mut reports = vec![GateReport::single("S", a, &circuits::s_gate(a)?, &targets::s(), false)];
    reports.push(GateReport::two(&circuits::cz_gate(a, b)?, a, b, &targets::cz()));
    reports.push(GateReport::two(&circuits::cx_gate(a, b, Register::A)?, a, b, &targets::cnot()));
    reports.push(GateReport::two(&circuits::cx_gate(a, b, Register::B)?, a, b, &targets::cnot_reversed()));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    let mut teleport = Vec::new();
    for (kind, label) in [(GateKind::H, "teleported_H"), (GateKind::T, "teleported_T")] {
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.solver.samples {
            let psi = random_ket(&mut rng);
            let rho: CMat = linalg::outer(&psi, &psi);
            for br in circuits::teleported_gate(kind, a, &rho, MeasurementModel::DualBasis)? {
                worst = worst.max(br.deviation);
            }
        }
        teleport.push((label, worst));
    }

    let mut table = Table::new(&["gate", "deviation", "leakage"]);
    for r in &reports {
        table.push(vec![r.label.clone(), num(r.deviation), num(r.leakage)]);
    }
    for (label, dev) in &teleport {
        table.push(vec![label.to_string(), num(*dev), String::new()]);
    }
    let summary = json!({
        "gates": reports,
        "teleported": teleport.iter().map(|(l, d)| json!({ "label": l, "max_deviation": d })).collect::<Vec<_>>(),
    });
    Ok(Product { tables: vec![(String::new(), table)], summary, log: vec![] })
}
