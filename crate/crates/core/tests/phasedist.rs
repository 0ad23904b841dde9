use std::f64::consts::PI;

use proptest::prelude::*;
use rsbq_core::codes::{self, Code};
use rsbq_core::fock::{FockSpace, StateVector};
use rsbq_core::linalg::{self, c64, cr};
use rsbq_core::optrec::SdpOptions;
use rsbq_core::phasedist::{self, PhaseGrid, TorusDistribution};

fn code(n: usize, delta: f64, phi: f64) -> Code {
    codes::two_mode_binomial(n, delta, phi, codes::default_cutoff(n)).unwrap()
}

#[test]
fn povm_is_complete_on_the_grid() {
    let space = FockSpace::new(1, 13).unwrap();
    let grid = PhaseGrid::new(256).unwrap();
    let mut acc = linalg::zeros(13, 13);
    for g in 0..grid.points() {
        let e = phasedist::phase_povm_element(space, grid.angle(g)).unwrap();
        acc += linalg::scale(e.matrix(), cr(grid.measure()));
        assert!(linalg::eigvalsh(e.matrix())[0] > -1e-12);
    }
    assert!(linalg::max_abs_diff(&acc, &linalg::identity(13)) < 1e-10);
    assert!(phasedist::phase_povm_element(FockSpace::new(2, 3).unwrap(), 0.0).is_err());
}

#[test]
fn single_mode_distributions() {
    let space = FockSpace::new(1, 5).unwrap();
    let grid = PhaseGrid::new(64).unwrap();
    let vac = phasedist::phase_distribution(&StateVector::basis(space, &[0]).unwrap(), grid).unwrap();
    for p in &vac {
        assert!((p - 1.0 / (2.0 * PI)).abs() < 1e-12);
    }
    let h = cr(std::f64::consts::FRAC_1_SQRT_2);
    let cat = StateVector::superposition(space, &[(h, &[0]), (h, &[1])]).unwrap();
    let p = phasedist::phase_distribution(&cat, grid).unwrap();
    for (g, v) in p.iter().enumerate() {
        let want = (1.0 + grid.angle(g).cos()) / (2.0 * PI);
        assert!((v - want).abs() < 1e-12);
    }
    let peak = p.iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert_eq!(peak, 0);
}

#[test]
fn product_fock_state_is_uniform_on_the_torus() {
    let space = FockSpace::new(2, 7).unwrap();
    let grid = PhaseGrid::new(32).unwrap();
    let d = phasedist::joint_phase_distribution(&StateVector::basis(space, &[2, 5]).unwrap(), grid).unwrap();
    let u = 1.0 / (4.0 * PI * PI);
    assert!(d.values().iter().all(|p| (p - u).abs() < 1e-12));
    assert!((d.total_mass() - 1.0).abs() < 1e-12);
}

#[test]
fn dual_words_at_zero_angles_sit_in_their_cells() {
    let grid = PhaseGrid::new(64).unwrap();
    for n in [2usize, 4] {
        let c = code(n, 0.0, 0.0);
        let (plus, minus) = codes::dual_words(&c).unwrap();
        let dp = phasedist::joint_phase_distribution(&plus, grid).unwrap();
        let dm = phasedist::joint_phase_distribution(&minus, grid).unwrap();
        // p_(+/-) = (cos N phi1 +/- cos N phi2)^2 / (4 pi^2) on the grid
        let nf = n as f64;
        for a in 0..64 {
            for b in 0..64 {
                let (c1, c2) = ((nf * grid.angle(a)).cos(), (nf * grid.angle(b)).cos());
                assert!((dp.get(a, b) - (c1 + c2).powi(2) / (4.0 * PI * PI)).abs() < 1e-12);
                assert!((dm.get(a, b) - (c1 - c2).powi(2) / (4.0 * PI * PI)).abs() < 1e-12);
            }
        }
        let same = |x: f64, y: f64| (nf * x).cos() * (nf * y).cos() > 0.0;
        let (mut inside, mut total) = (0.0, 0.0);
        for a in 0..64 {
            for b in 0..64 {
                let (x, y) = (grid.angle(a), grid.angle(b));
                let w = ((nf * x).cos() + (nf * y).cos()).powi(2);
                total += w;
                if same(x, y) {
                    inside += w;
                }
            }
        }
        let expect = inside / total;
        assert!((dp.mass_where(same) - expect).abs() < 1e-12);
        assert!((dm.mass_where(same) - (1.0 - expect)).abs() < 1e-12);
        // peaks: (0,0) and (pi/N, pi/N) for |+>, (0, pi/N) for |->
        let cell = 64 / (2 * n);
        assert!(dp.get(0, 0) > 0.99 * dp.values().iter().cloned().fold(0.0, f64::max));
        assert!(dp.get(cell, cell) > 0.99 * dp.get(0, 0));
        assert!(dm.get(0, cell) > 0.99 * dm.values().iter().cloned().fold(0.0, f64::max));
        assert!(dp.get(0, cell) < 1e-12 && dm.get(0, 0) < 1e-12);

        // the pair separates with TV = 8/pi^2 in the continuum; the grid sum
        // of |cos N x||cos N y| is the exact discrete value
        let mut s = 0.0;
        for a in 0..64 {
            for b in 0..64 {
                s += ((nf * grid.angle(a)).cos() * (nf * grid.angle(b)).cos()).abs();
            }
        }
        let tv_grid = 2.0 * s / (64.0 * 64.0);
        let (tv, bc) = phasedist::distinguishability(&dp, &dm).unwrap();
        assert!((tv - tv_grid).abs() < 1e-12, "{tv} {tv_grid}");
        let fine = PhaseGrid::new(256).unwrap();
        let (tv_fine, _) = phasedist::distinguishability(
            &phasedist::joint_phase_distribution(&plus, fine).unwrap(),
            &phasedist::joint_phase_distribution(&minus, fine).unwrap(),
        )
        .unwrap();
        assert!((tv_fine - 8.0 / (PI * PI)).abs() < 2e-3, "{tv_fine}");
        assert!(bc > 0.0 && bc < 1.0);
    }
}

#[test]
fn distinguishability_limits() {
    let grid = PhaseGrid::new(4).unwrap();
    let mut a = vec![0.0; 16];
    let mut b = vec![0.0; 16];
    a[0] = 1.0;
    b[5] = 1.0;
    let (da, db) = (TorusDistribution::new(grid, a.clone()).unwrap(), TorusDistribution::new(grid, b).unwrap());
    let (tv, bc) = phasedist::distinguishability(&da, &db).unwrap();
    assert!((tv - 1.0).abs() < 1e-12 && bc.abs() < 1e-12);
    let (tv, bc) = phasedist::distinguishability(&da, &da).unwrap();
    assert!(tv.abs() < 1e-12 && (bc - 1.0).abs() < 1e-12);
    assert!(TorusDistribution::new(grid, vec![0.0; 15]).is_err());
    a[1] = -0.1;
    assert!(TorusDistribution::new(grid, a).is_err());
    let other = TorusDistribution::new(PhaseGrid::new(2).unwrap(), vec![1.0; 4]).unwrap();
    assert!(phasedist::distinguishability(&da, &other).is_err());
}

#[test]
fn torus_csv_layout() {
    let grid = PhaseGrid::new(2).unwrap();
    let d = TorusDistribution::new(grid, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let csv = d.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "phi1,phi2,p");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,0,"));
    let v: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((v - 1.0 / (2.0 * PI * PI)).abs() < 1e-12 * v);
    assert!(lines[2].starts_with("0,3.14159265359e0,"));
}

#[test]
fn zero_overlap_identity() {
    for n in [2usize, 4] {
        let c = code(n, PI / 4.0, 0.0);
        for a in 0..8 {
            for b in 0..8 {
                let (t1, t2) = (2.0 * PI * a as f64 / 8.0, 2.0 * PI * b as f64 / 8.0);
                assert!(phasedist::dual_offdiagonal(&c, t1, t2).unwrap().norm() < 1e-11);
            }
        }
        let generic = code(n, 0.4, 0.9);
        assert!(phasedist::dual_offdiagonal(&generic, 0.0, 0.0).unwrap().norm() < 1e-12);
        assert!(phasedist::dual_offdiagonal(&generic, 0.3, 0.1).unwrap().norm() > 1e-4);
        let flat = code(n, 0.0, 0.0);
        let z = phasedist::dual_offdiagonal(&flat, PI / n as f64, 0.0).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn diagonal_gap_examples() {
    for n in [2usize, 4] {
        for c in [code(n, 0.0, 0.0), code(n, PI / 4.0, 0.0), code(n, 0.7, 1.9)] {
            assert!(phasedist::dual_diagonal_gap(&c, 0.0, 0.0).unwrap() < 1e-12);
            for t in [0.1, 0.9, 2.5, 4.0] {
                assert!(phasedist::dual_diagonal_gap(&c, t, t).unwrap() < 1e-11);
            }
        }
    }
    // at phi = pi/(2N) the two diagonal entries coincide for every N; the
    // off-diagonal entry carries the residual and shrinks with N
    let mut prev_off = f64::INFINITY;
    let mut prev_gap = f64::INFINITY;
    for n in [2usize, 4, 6] {
        let c = code(n, PI / 4.0, PI / (2.0 * n as f64));
        let gap = phasedist::dual_diagonal_gap(&c, 0.3, 0.1).unwrap();
        assert!(gap < 1e-12, "N={n}: {gap}");
        assert!(gap <= prev_gap + 1e-12);
        prev_gap = gap;
        let off = phasedist::dual_offdiagonal(&c, 0.3, 0.1).unwrap().norm();
        assert!(off < prev_off, "N={n}: {off}");
        prev_off = off;
    }
    // at phi = 0 the diagonal gap itself shrinks with N
    let gaps: Vec<f64> = [2usize, 4, 6]
        .iter()
        .map(|&n| phasedist::dual_diagonal_gap(&code(n, PI / 4.0, 0.0), 0.3, 0.1).unwrap())
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] > 0.0, "{gaps:?}");
}

#[test]
fn dual_entries_match_a_direct_matrix_element() {
    let c = code(2, 0.5, 1.2);
    let (plus, minus) = codes::dual_words(&c).unwrap();
    let space = c.space();
    let k = rsbq_core::channels::continuous_dephasing_kraus(space, 0.7, -0.4, 0.0, 0.0).unwrap();
    let want = minus.inner(&k.apply(&plus));
    let got = phasedist::dual_offdiagonal(&c, 0.7, -0.4).unwrap();
    assert!((want - got).norm() < 1e-13);
    let pp = plus.inner(&k.apply(&plus));
    let mm = minus.inner(&k.apply(&minus));
    assert!(((pp - mm).norm() - phasedist::dual_diagonal_gap(&c, 0.7, -0.4).unwrap()).abs() < 1e-13);
    assert!(phasedist::dual_offdiagonal(&codes::single_mode_binomial(2, 2, 7).unwrap(), 0.1, 0.0).is_err());
}

#[test]
fn landscape_layout_and_symmetry() {
    let deltas = phasedist::linspace(0.0, PI, 5);
    let phis = phasedist::linspace(0.0, PI / 2.0, 3);
    let l = phasedist::infidelity_landscape(2, 2, 1e-3, &deltas, &phis, &SdpOptions::default()).unwrap();
    assert_eq!(l.points.len(), 15);
    assert_eq!(l.at(1, 2).delta, deltas[1]);
    assert_eq!(l.at(1, 2).phi, phis[2]);
    for p in &l.points {
        assert!(p.infidelity > 0.0 && p.infidelity < 1e-2);
        assert!(p.feasibility <= 1e-8 && p.residual <= 1e-6);
    }
    // delta and pi - delta give the same code up to a frame change
    for j in 0..3 {
        assert!((l.at(1, j).infidelity - l.at(3, j).infidelity).abs() < 1e-7);
    }
    let (i, _) = l.argmin();
    assert!(i == 1 || i == 3);
    assert!(l.phi_range(1) >= 0.0);
    let csv = l.to_csv();
    assert!(csv.starts_with("delta,phi,infidelity\n"));
    assert_eq!(csv.lines().count(), 16);
    assert!(phasedist::infidelity_landscape(2, 3, 1e-3, &deltas, &phis, &SdpOptions::default()).is_err());
    assert_eq!(phasedist::linspace(0.0, 1.0, 1), vec![0.0]);
}

fn random_code(n: usize, delta: f64, phi: f64) -> Code {
    code(n, delta, phi)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn codeword_distributions_are_rotation_symmetric(
        n in prop::sample::select(vec![2usize, 4]),
        delta in 0.0..PI,
        phi in 0.0..(2.0 * PI),
        k in 0usize..2,
        re in -1.0..1.0f64,
        im in -1.0..1.0f64,
    ) {
        let c = random_code(n, delta, phi);
        let grid = PhaseGrid::new(8 * n).unwrap();
        let d = phasedist::joint_phase_distribution(c.word(k), grid).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-8);
        prop_assert!(d.values().iter().all(|&p| p >= 0.0));
        prop_assert!(d.shift_defect(grid.points() / n) < 1e-9);
        // superpositions need not be symmetric, but stay normalized
        let v = c.word(0).add(&c.word(1).scaled(c64::new(re, im)));
        let d = phasedist::joint_phase_distribution(&v, grid).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-8);
    }
}
