//! End-to-end acceptance checks. One line per criterion is printed; the test
//! fails if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsbq_core::channels::{self, Channel, Discretization, KrausMaxima, NoiseParams, PhaseMixture};
use rsbq_core::circuits::{self, targets, GateKind, GateReport, MeasurementModel, Register};
use rsbq_core::codes::{self, Code, CoefficientTable};
use rsbq_core::fock::{self, FockSpace, Operator, PairAngles, StateVector};
use rsbq_core::klrecovery::{self as kl, KrausMap, RecoveryMap};
use rsbq_core::linalg::{self, c64, cr, CCol, CMat, ONE, ZERO};
use rsbq_core::optrec::{self, ChannelKind, SdpOptions, SweepCode, SweepRecord};
use rsbq_core::phasedist;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// `(label, feasibility, residual)` of every accepted SDP solve.
type Certificates = Vec<(String, f64, f64)>;

fn run(id: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> (bool, Duration) {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let in_time = budget.is_none_or(|b| took <= b);
    let pass = o.pass && in_time;
    let limit = budget.map(|b| format!(" (limit {:.0} s)", b.as_secs_f64())).unwrap_or_default();
    println!(
        "criterion {id:>2} [{}] {name}: {}; {:.1} s{limit}",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64()
    );
    (pass, took)
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn two_mode(n: usize, delta: f64, phi: f64) -> Code {
    codes::two_mode_binomial(n, delta, phi, codes::default_cutoff(n)).unwrap()
}

fn preset(n: usize) -> Code {
    let (d, p) = codes::default_angles(n);
    two_mode(n, d, p)
}

fn pauli_x(d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| if i == (j + 1) % d { ONE } else { ZERO })
}

fn pauli_z(d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| if i == j { c64::cis(2.0 * PI * i as f64 / d as f64) } else { ZERO })
}

fn leakage(code: &Code, op: &Operator) -> f64 {
    let p = codes::projector(code);
    code.words()
        .iter()
        .map(|w| {
            let moved = op.apply(w);
            linalg::col_max_abs_diff(moved.amplitudes(), p.apply(&moved).amplitudes())
        })
        .fold(0.0, f64::max)
}

fn random_ket(rng: &mut ChaCha8Rng) -> CCol {
    let theta = (1.0 - 2.0 * rng.gen::<f64>()).acos();
    let phi = 2.0 * PI * rng.gen::<f64>();
    CCol::from_fn(2, |i| if i == 0 { cr((theta / 2.0).cos()) } else { c64::cis(phi) * (theta / 2.0).sin() })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// `U^dag N(U . U^dag) U` for the two-mode channel at the code's angles.
fn rotated(space: FockSpace, p: NoiseParams, delta: f64, phi: f64) -> Channel {
    let ch = channels::combined_channel(space, p, KrausMaxima::default()).unwrap();
    let u = fock::beam_splitter(space, 0, 1, delta, phi).unwrap();
    channels::rotated_channel(&ch, &u).unwrap()
}

const ANALYTIC: [&str; 3] = ["recovery_loss_n2", "recovery_loss_n4", "recovery_dephasing_n4"];

/// `(N, noise, recovery)` for one analytic recovery at strength `s` and the
/// code's default angles.
fn analytic_case(idx: usize, s: f64) -> (usize, NoiseParams, RecoveryMap) {
    let d = PI / 4.0;
    let sp = |n: usize| FockSpace::new(2, codes::default_cutoff(n)).unwrap();
    match idx {
        0 => (2, NoiseParams::loss(s).unwrap(), kl::recovery_loss_n2(sp(2), d, s, s).unwrap()),
        1 => (4, NoiseParams::loss(s).unwrap(), kl::recovery_loss_n4(sp(4), d, s, s).unwrap()),
        _ => (4, NoiseParams::dephasing(s).unwrap(), kl::recovery_dephasing_n4(sp(4), d, PI / 8.0, s, s).unwrap()),
    }
}

fn analytic_fidelity(idx: usize, s: f64) -> f64 {
    let (n, p, r) = analytic_case(idx, s);
    let (d, phi) = codes::default_angles(n);
    let space = FockSpace::new(2, codes::default_cutoff(n)).unwrap();
    let ch = rotated(space, p, d, phi);
    let words = kl::unrotated_binomial_words(space, n).unwrap();
    kl::logical_fidelity_words(&words, &|x| r.apply_matrix(&ch.apply_matrix(x))).0
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [2usize, 4] {
        for delta in phasedist::linspace(0.0, PI, 5) {
            for phi in phasedist::linspace(0.0, 2.0 * PI, 5) {
                let code = two_mode(n, delta, phi);
                for i in 0..2 {
                    for j in 0..2 {
                        let want = if i == j { ONE } else { ZERO };
                        worst = worst.max((code.word(i).inner(code.word(j)) - want).norm());
                    }
                }
                worst = worst.max(code.rotation_symmetry_defect().unwrap());
                let (x, z) = codes::logical_operators(&code).unwrap();
                worst = worst.max(linalg::max_abs_diff(&codes::logical_matrix(&code, &x), &pauli_x(2)));
                worst = worst.max(linalg::max_abs_diff(&codes::logical_matrix(&code, &z), &pauli_z(2)));
                worst = worst.max(leakage(&code, &x)).max(leakage(&code, &z));
            }
        }
    }
    outcome(worst <= 1e-10, format!("max defect {worst:.2e} over 50 codes (tol 1e-10)"))
}

fn random_table(rng: &mut ChaCha8Rng, d: usize, varied: usize) -> CoefficientTable {
    let entries = (0..1usize << varied).map(|flat| {
        let idx: Vec<usize> = (0..d).map(|r| if r < varied { (flat >> r) & 1 } else { 0 }).collect();
        (idx, c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    });
    CoefficientTable::new(entries.collect::<Vec<_>>()).unwrap()
}

fn criterion_2() -> Outcome {
    let mut support: f64 = 0.0;
    let mut action: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (d, n, varied, cutoff) in [(2usize, 2usize, 2usize, 11usize), (3, 2, 1, 13), (2, 4, 2, 21)] {
        for _ in 0..4 {
            let table = random_table(&mut rng, d, varied);
            let pairs: Vec<PairAngles> = (0..d - 1)
                .map(|j| PairAngles {
                    j,
                    k: j + 1,
                    theta_plus: rng.gen_range(-1.0..1.0),
                    theta_minus: rng.gen_range(-1.0..1.0),
                })
                .collect();
            let code = codes::multimode_qudit(d, n, &table, &pairs, cutoff).unwrap();
            for k in 0..d {
                let w = code.unrotated_word(k);
                for (i, a) in w.amplitudes().iter().enumerate() {
                    let occ = code.space().occupations(i);
                    if !occ.iter().enumerate().all(|(p, &m)| m % (d * n) == ((k + p) % d) * n) {
                        support = support.max(a.norm());
                    }
                }
            }
            let space = code.space();
            let shift = codes::cyclic_shift(space).unwrap();
            let clock = fock::rotation(space, 0, 2.0 * PI / (d * n) as f64).unwrap();
            let xl = code.logical_action(|v| code.apply_framed(&shift, v));
            let zl = code.logical_action(|v| code.apply_framed(&clock, v));
            action = action.max(linalg::max_abs_diff(&xl, &pauli_x(d))).max(linalg::max_abs_diff(&zl, &pauli_z(d)));
        }
    }
    outcome(
        support <= 1e-14 && action <= 1e-10,
        format!("support violation {support:.2e} (tol 1e-14), qudit X/Z defect {action:.2e} (tol 1e-10)"),
    )
}

fn criterion_3() -> Outcome {
    let mut loss_dev: f64 = 0.0;
    for n in [2usize, 4] {
        for code in [preset(n), two_mode(n, 0.0, 0.0), two_mode(n, 1.1, 0.4)] {
            let (d, _) = code.delta_phi();
            let ops = kl::first_order_loss(code.space(), d, 1e-3, 1e-3).unwrap();
            let rep = kl::kl_check_first_order(&code, &ops, 1e-10).unwrap();
            loss_dev = loss_dev.max(rep.deviation);
        }
    }
    let c4 = two_mode(4, PI / 4.0, PI / 8.0);
    let ops4 = kl::first_order_dephasing(c4.space(), PI / 4.0, PI / 8.0, 1e-3, 1e-3, 4).unwrap();
    let rep4 = kl::kl_check_first_order(&c4, &ops4, 1e-10).unwrap();
    let c2 = two_mode(2, PI / 4.0, PI / 4.0);
    let ops2 = kl::first_order_dephasing(c2.space(), PI / 4.0, PI / 4.0, 1e-3, 1e-3, 2).unwrap();
    let rep2 = kl::kl_check_first_order(&c2, &ops2, 1e-10).unwrap();
    let f2 = ops2.in_frame(c2.frame());
    let m21 = (&f2.jumps[3].op.dagger() * &f2.jumps[2].op).op_norm();
    let pass = loss_dev <= 1e-10 && rep4.satisfied && !rep2.satisfied && rep2.deviation >= 0.1 * m21;
    outcome(
        pass,
        format!(
            "loss max deviation {loss_dev:.2e}; dephasing N=4 {:.2e}; N=2 {:.3e} vs 0.1*|M2^dag M1| = {:.3e}",
            rep4.deviation,
            rep2.deviation,
            0.1 * m21
        ),
    )
}

fn criterion_4() -> Outcome {
    let strengths = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
    let mut pass = true;
    let mut parts = Vec::new();
    for (idx, label) in ANALYTIC.iter().enumerate() {
        let inf: Vec<f64> = strengths.iter().map(|&s| 1.0 - analytic_fidelity(idx, s)).collect();
        let k = slope(&strengths, &inf);
        let ok = (k - 2.0).abs() <= 0.15 && inf[0] <= 1e-6;
        pass &= ok;
        parts.push(format!("{label} slope {k:.3} infidelity@1e-4 {:.2e}{}", inf[0], if ok { "" } else { " (out of bounds)" }));
    }
    outcome(pass, format!("{} (slope 2 +/- 0.15, infidelity <= 1e-6)", parts.join("; ")))
}

fn random_logical(rng: &mut ChaCha8Rng, words: &[StateVector]) -> CMat {
    let a = c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let b = c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let psi = words[0].scaled(a).add(&words[1].scaled(b)).normalized().unwrap();
    psi.density().into_matrix()
}

fn criterion_5() -> Outcome {
    let s = 1e-4;
    let sum = 2.0 * s;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // (label, measured, expected)
    let mut coeffs: Vec<(String, f64, f64)> = Vec::new();
    for (idx, n, want) in [(0usize, 2usize, 2.0), (1, 4, 4.0)] {
        let (_, p, r) = analytic_case(idx, s);
        let (d, phi) = codes::default_angles(n);
        let space = FockSpace::new(2, codes::default_cutoff(n)).unwrap();
        let ch = rotated(space, p, d, phi);
        let words = kl::unrotated_binomial_words(space, n).unwrap();
        let rho = random_logical(&mut rng, &words);
        let noisy = ch.apply_matrix(&rho);
        let nojump = r.apply_branches(&["00"], &noisy);
        let l = format!("{}0", n - 1);
        let m = format!("0{}", n - 1);
        let jumps = r.apply_branches(&[l.as_str(), m.as_str()], &noisy);
        coeffs.push((format!("loss N={n} no-jump"), (1.0 - linalg::trace(&nojump).re) / sum, want));
        coeffs.push((format!("loss N={n} jump"), linalg::trace(&jumps).re / sum, want));
    }

    let (_, p, r) = analytic_case(2, s);
    let space = FockSpace::new(2, codes::default_cutoff(4)).unwrap();
    let ch = rotated(space, p, PI / 4.0, PI / 8.0);
    let words = kl::unrotated_binomial_words(space, 4).unwrap();
    let rho = random_logical(&mut rng, &words);
    let noisy = ch.apply_matrix(&rho);
    let nojump = r.apply_branches(&["00L", "00E"], &noisy);
    let exch = r.apply_branches(&["13", "31"], &noisy);
    coeffs.push(("dephasing no-jump".into(), (1.0 - linalg::trace(&nojump).re) / sum, 10.0));
    coeffs.push(("dephasing exchange".into(), linalg::trace(&exch).re / sum, 10.0));
    let ops = kl::first_order_dephasing(space, PI / 4.0, PI / 8.0, s, s, 4).unwrap();
    let v = CMat::from_fn(space.dim(), 2, |i, j| words[j].amplitudes()[i]);
    let pc = Operator::new(space, &v * v.adjoint()).unwrap();
    let u00 = fock::matrix_exponential(&ops.m0.commutator(&pc), ONE).unwrap();
    let k = &u00 * &kl::syndrome_projector(space, 4, 0, 0);
    let post = k.matrix() * &noisy * k.matrix().adjoint();
    let ntot = fock::total_number_operator(space);
    let sandwich = linalg::scale(&(ntot.matrix() * &rho * ntot.matrix()), cr(sum / 4.0));
    coeffs.push(("dephasing intermediate".into(), (1.0 - linalg::trace(&(&post - &sandwich)).re) / sum, 30.0));

    let pass = coeffs.iter().all(|(_, got, want)| (got - want).abs() <= 0.01 * want);
    let parts: Vec<String> = coeffs.iter().map(|(l, got, want)| format!("{l} {got:.4} (want {want})")).collect();
    outcome(pass, format!("{} (tol 1%)", parts.join(", ")))
}

fn criterion_6(certs: &mut Certificates) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut worst_sdp: f64 = 0.0;
    let pairs = [(two_mode(2, 0.3, 0.9), "N=L=2 (0.3, 0.9)"), (preset(4), "N=L=4 preset")];
    for (code, label) in &pairs {
        for sigma in [0.2, 0.5, 1.0] {
            let mix = PhaseMixture::gaussian(sigma, 41, Discretization::GaussHermite).unwrap();
            for _ in 0..10 {
                let psi = random_ket(&mut rng);
                let out = circuits::correlated_ec_circuit(code, code, &mix, &linalg::outer(&psi, &psi)).unwrap();
                worst = worst.max((out.fidelity - 1.0).abs());
            }
            let ch = channels::correlated_dephasing(code.space(), &mix).unwrap();
            match optrec::optimal_recovery(code, &ch, &SdpOptions::default()) {
                Ok(r) => {
                    worst_sdp = worst_sdp.max((1.0 - r.fidelity).abs());
                    certs.push((format!("correlated {label} sigma={sigma}"), r.feasibility_defect, r.optimality_residual));
                }
                Err(e) => return outcome(false, format!("SDP failed on {label} sigma={sigma}: {e}")),
            }
        }
    }
    outcome(
        worst <= 1e-10 && worst_sdp <= 1e-6,
        format!("circuit |1-F| max {worst:.2e} (tol 1e-10), SDP |1-F_e| max {worst_sdp:.2e} (tol 1e-6)"),
    )
}

fn criterion_7() -> Outcome {
    let mut off: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for n in [2usize, 4] {
        let code = two_mode(n, PI / 4.0, 0.0);
        for a in 0..8 {
            let t1 = 2.0 * PI * a as f64 / 8.0;
            for b in 0..8 {
                let t2 = 2.0 * PI * b as f64 / 8.0;
                off = off.max(phasedist::dual_offdiagonal(&code, t1, t2).unwrap().norm());
            }
            gap = gap.max(phasedist::dual_diagonal_gap(&code, t1, t1).unwrap());
        }
    }
    outcome(off <= 1e-11 && gap <= 1e-11, format!("off-diagonal max {off:.2e}, ray gap max {gap:.2e} (tol 1e-11)"))
}

fn criterion_8(certs: &mut Certificates) -> Outcome {
    let opts = SdpOptions::default();
    let deltas = phasedist::linspace(0.0, PI, 17);
    let step = deltas[1] - deltas[0];
    let l2 = match phasedist::infidelity_landscape(2, 2, 1e-3, &deltas, &phasedist::linspace(0.0, PI / 2.0, 17), &opts) {
        Ok(l) => l,
        Err(e) => return outcome(false, format!("N=2 landscape failed: {e}")),
    };
    let (i, _) = l2.argmin();
    let best = l2.deltas[i];
    let near = [PI / 4.0, 3.0 * PI / 4.0].iter().any(|t| (best - t).abs() <= step + 1e-12);
    let quarter = deltas.iter().position(|d| (d - PI / 4.0).abs() < 1e-12).unwrap();
    let range = l2.phi_range(quarter);

    let phis4 = phasedist::linspace(0.0, PI / 4.0, 17);
    let l4 = match phasedist::infidelity_landscape(4, 2, 1e-3, &deltas, &phis4, &opts) {
        Ok(l) => l,
        Err(e) => return outcome(false, format!("N=4 landscape failed: {e}")),
    };
    let (_, j4) = l4.argmin();
    let phi4 = l4.phis[j4];
    let phi_ok = (phi4 - PI / 8.0).abs() <= (phis4[1] - phis4[0]) + 1e-12;
    for l in [&l2, &l4] {
        for p in &l.points {
            certs.push((format!("landscape N={} ({:.3}, {:.3})", l.n, p.delta, p.phi), p.feasibility, p.residual));
        }
    }
    outcome(
        near && range <= 5e-3 && phi_ok,
        format!(
            "N=2 argmin delta {best:.4} (grid step {step:.4}), phi-range at pi/4 {range:.2e} (<= 5e-3); N=4 argmin phi {phi4:.4} vs pi/8 = {:.4}",
            PI / 8.0
        ),
    )
}

fn criterion_9(certs: &mut Certificates, records: &mut Vec<SweepRecord>) -> Outcome {
    let strengths = [1e-3, 3e-3, 1e-2, 3e-2];
    let opts = SdpOptions::default();
    let mut codes = vec![SweepCode::new("N4", preset(4)), SweepCode::new("N2", preset(2))];
    let mut failures = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for kind in ChannelKind::all() {
        if kind == ChannelKind::Dephasing {
            codes.push(SweepCode::new("single", codes::single_mode_binomial(2, 2, 5).unwrap()));
        } else {
            codes.retain(|c| c.name != "single");
        }
        let recs = match optrec::fidelity_sweep(&codes, kind, &strengths, &opts) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("{} sweep failed: {e}", kind.as_str())),
        };
        for r in &recs {
            certs.push((format!("sweep {} {} {:e}", kind.as_str(), r.code, r.strength), r.feasibility, r.residual));
        }
        for &s in &strengths {
            let f = |name: &str| recs.iter().find(|r| r.code == name && r.strength == s).map(|r| (r.f_e, r.f_avg)).unwrap();
            let (be_avg, be_e) = {
                let p = kind.params(s).unwrap();
                let avg = optrec::breakeven(p, kind).unwrap();
                (avg, (3.0 * avg - 1.0) / 2.0)
            };
            let mut chain: Vec<(&str, (f64, f64))> = vec![("N4", f("N4")), ("N2", f("N2"))];
            if kind == ChannelKind::Dephasing {
                chain.push(("single", f("single")));
            }
            chain.push(("break-even", (be_e, be_avg)));
            for w in chain.windows(2) {
                let margin = (w[0].1 .0 - w[1].1 .0).min(w[0].1 .1 - w[1].1 .1);
                worst_margin = worst_margin.min(margin);
                if margin < -1e-6 {
                    failures.push(format!("{} {:e}: {} {:.6} < {} {:.6}", kind.as_str(), s, w[0].0, w[0].1 .0, w[1].0, w[1].1 .0));
                }
            }
        }
        records.extend(recs);
    }
    let detail = if failures.is_empty() {
        format!("all orderings hold, worst margin {worst_margin:.2e}")
    } else {
        format!("{} ordering(s) violated (F_e shown): {}", failures.len(), failures.join("; "))
    };
    outcome(failures.is_empty(), detail)
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [2usize, 4] {
        for code in [preset(n), two_mode(n, 0.45, 1.3)] {
            worst = worst.max(GateReport::single("S", &code, &circuits::s_gate(&code).unwrap(), &targets::s(), false).deviation);
        }
    }
    for (a, b) in [(preset(2), preset(2)), (preset(2), preset(4)), (two_mode(4, 0.2, 0.7), two_mode(2, 1.0, 0.1))] {
        worst = worst.max(GateReport::two(&circuits::cz_gate(&a, &b).unwrap(), &a, &b, &targets::cz()).deviation);
        worst = worst.max(GateReport::two(&circuits::cx_gate(&a, &b, Register::A).unwrap(), &a, &b, &targets::cnot()).deviation);
    }
    let mut tele: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for code in [preset(2), preset(4)] {
        for kind in [GateKind::H, GateKind::T] {
            for _ in 0..10 {
                let psi = random_ket(&mut rng);
                for br in circuits::teleported_gate(kind, &code, &linalg::outer(&psi, &psi), MeasurementModel::DualBasis).unwrap() {
                    tele = tele.max(br.deviation);
                }
            }
        }
    }
    outcome(worst <= 1e-10 && tele <= 1e-10, format!("gate deviation max {worst:.2e}, teleported max {tele:.2e} (tol 1e-10)"))
}

fn criterion_11(certs: &Certificates, records: &[SweepRecord]) -> Outcome {
    let bad: Vec<&(String, f64, f64)> = certs.iter().filter(|(_, f, r)| *f > 1e-8 || *r > 1e-6).collect();
    let max_f = certs.iter().map(|c| c.1).fold(0.0, f64::max);
    let max_r = certs.iter().map(|c| c.2).fold(0.0, f64::max);
    let mut worst_dom = f64::INFINITY;
    let mut shared = 0;
    for (idx, (code, kind)) in [("N2", ChannelKind::Loss), ("N4", ChannelKind::Loss), ("N4", ChannelKind::Dephasing)].iter().enumerate() {
        for r in records.iter().filter(|r| r.code == *code && r.channel == *kind) {
            worst_dom = worst_dom.min(r.f_e - analytic_fidelity(idx, r.strength));
            shared += 1;
        }
    }
    outcome(
        bad.is_empty() && shared > 0 && worst_dom >= -1e-6,
        format!(
            "{} solves: max feasibility {max_f:.2e} (<= 1e-8), max residual {max_r:.2e} (<= 1e-6), {} uncertified; \
             dominance over {shared} analytic instances, worst margin {worst_dom:.2e} (>= -1e-6)",
            certs.len(),
            bad.len()
        ),
    )
}

#[test]
fn acceptance() {
    let mut certs = Certificates::new();
    let mut records = Vec::new();
    let mut results = Vec::new();
    results.push(run(1, "codeword algebra", secs(5), criterion_1));
    results.push(run(2, "multimode support law", secs(10), criterion_2));
    results.push(run(3, "KL suite", secs(10), criterion_3));
    results.push(run(4, "analytic recovery scaling", secs(60), criterion_4));
    results.push(run(5, "first-order coefficients", secs(30), criterion_5));
    results.push(run(6, "correlated dephasing exactness", secs(120), || criterion_6(&mut certs)));
    results.push(run(7, "zero-overlap identity", secs(10), criterion_7));
    results.push(run(8, "landscape minima", secs(1800), || criterion_8(&mut certs)));
    results.push(run(9, "code ranking", secs(1800), || criterion_9(&mut certs, &mut records)));
    results.push(run(10, "gate suite", secs(60), criterion_10));
    results.push(run(11, "SDP self-certification", None, || criterion_11(&certs, &records)));

    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, r)| !r.0).map(|(i, _)| i + 1).collect();
    println!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
