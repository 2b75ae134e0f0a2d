use majorana_bus::nanowire::*;
use majorana_bus::qcore::{self, C64};
use proptest::prelude::*;

fn insb_3um() -> NanowireParams {
    NanowireParams::insb(300)
}

#[test]
fn hopping_from_independent_constants() {
    // ħc = 197.3269804 MeV·fm, mₑc² = 0.51099895 MeV  ⇒  ħ²/(2mₑ) in meV·nm²
    let hbar_c_mev_nm: f64 = 197_326.980_4; // 197.3269804 MeV·fm
    let me_c2_mev: f64 = 0.510_998_95e9;
    let hbar2_2me = hbar_c_mev_nm * hbar_c_mev_nm / (2.0 * me_c2_mev);
    assert!((hbar2_2me - 38.0998).abs() < 1e-3);
    let p = insb_3um();
    let t_oracle = hbar2_2me / (0.015 * 100.0);
    assert!((p.hopping() - t_oracle).abs() < 1e-4);
    assert!((p.hopping() - 25.4).abs() < 0.01);
    assert!((p.soc() - 1.0).abs() < 1e-15);
}

#[test]
fn four_site_chain_dimension() {
    let h = build_bdg(&NanowireParams::insb(4), None).unwrap();
    assert_eq!(h.dim(), 16);
    assert!(h.hermiticity_defect() < 1e-14);
    assert!(build_bdg(&NanowireParams::insb(3), None).is_err());
}

#[test]
fn critical_field_examples() {
    let mut p = NanowireParams::insb(10);
    assert!((critical_field(&p) - 1.25f64.sqrt()).abs() < 1e-15);
    p.mu_eff = 0.0;
    assert!((critical_field(&p) - 0.5).abs() < 1e-15);
    p.delta = 0.0;
    assert_eq!(critical_field(&p), 0.0);
}

fn draws(n_sites: usize) -> Vec<DisorderDraw> {
    [
        (DisorderKind::ChemicalPotential, 0.5),
        (DisorderKind::PairingPhase, 1.2),
        (DisorderKind::NuclearZeeman, 0.1),
    ]
    .iter()
    .map(|&(k, w)| DisorderSpec::new(k, w, 1, 11).unwrap().draw(0, n_sites))
    .collect()
}

#[test]
fn particle_hole_anticommutes_clean_and_disordered() {
    let p = NanowireParams::insb(40);
    let sigma = ParticleHole::new(40);
    let clean = build_bdg(&p, None).unwrap();
    assert!(sigma.anticommutation_defect(clean.matrix()) < 1e-10);
    for d in draws(40) {
        let h = build_bdg(&p, Some(&d)).unwrap();
        assert!(sigma.anticommutation_defect(h.matrix()) < 1e-10, "{d:?}");
        let blocks = build_blocks(&p, Some(&d)).unwrap();
        assert!(blocks.particle_hole_defect() < 1e-10);
    }
}

#[test]
fn particle_hole_squares_to_identity() {
    let sigma = ParticleHole::new(5);
    let v: Vec<C64> = (0..20).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos())).collect();
    let back = sigma.apply(&sigma.apply(&v));
    for (a, b) in v.iter().zip(&back) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn eigenvectors_pair_under_particle_hole() {
    let p = NanowireParams::insb(60);
    let h = build_bdg(&p, None).unwrap();
    let spec = diagonalize(&h).unwrap();
    let sigma = ParticleHole::new(60);
    for n in [2isize, 3, 7, 20] {
        let partner = sigma.apply(&spec.psi(n));
        let ov = qcore::inner(&spec.psi(-n), &partner).norm();
        assert!((ov - 1.0).abs() < 1e-9, "n = {n}: {ov}");
    }
    let neg = spec.eigenvalues.iter().filter(|&&e| e < 0.0).count();
    let pos = spec.eigenvalues.iter().filter(|&&e| e > 0.0).count();
    assert_eq!(neg, pos);
    assert!(spec.antisymmetry_defect() < ANTISYMMETRY_TOL);
}

#[test]
fn dense_spectrum_phases() {
    let p = insb_3um();
    // topological: ε1 ≪ ε2, and ε2 of order 0.1 meV
    let s = diagonalize(&build_bdg(&p, None).unwrap()).unwrap();
    assert!(s.epsilon(1) < 0.1 * s.epsilon(2));
    assert!(s.epsilon(2) > 0.05 && s.epsilon(2) < 0.3, "ε2 = {}", s.epsilon(2));
    // h = 0: trivial, ε1 is a bulk level
    let s0 = diagonalize(&build_bdg(&p.with_zeeman(0.0), None).unwrap()).unwrap();
    assert!(s0.epsilon(1) > 0.1);
    // h = h_c/2: ε1 comparable to ε2
    let half = diagonalize(&build_bdg(&p.with_zeeman(0.5 * critical_field(&p)), None).unwrap()).unwrap();
    assert!(half.epsilon(1) > 0.5 * half.epsilon(2));
}

#[test]
fn banded_solver_matches_dense() {
    let p = insb_3um();
    let blocks = build_blocks(&p, None).unwrap();
    let low = low_spectrum(&blocks, true);
    let s = diagonalize(&build_bdg(&p, None).unwrap()).unwrap();
    assert!((low.epsilon_1 - s.epsilon(1)).abs() < 1e-11);
    assert!((low.epsilon_2 - s.epsilon(2)).abs() < 1e-11);
    assert!(low.antisymmetry_defect() < ANTISYMMETRY_TOL);
    assert!(low.residual < 1e-9);
    let fast = low.edge_states().unwrap();
    let dense = extract_edge_states(&s).unwrap();
    assert!(wavefunction_overlap(&fast.psi_l, &dense.psi_l) > 1.0 - 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn banded_counts_agree_with_dense(n_sites in 12usize..70, kind in 0usize..3, w in 0.0f64..1.0, seed in any::<u64>(), h in 0.0f64..2.5) {
        let kind = [DisorderKind::ChemicalPotential, DisorderKind::PairingPhase, DisorderKind::NuclearZeeman][kind];
        let p = NanowireParams::insb(n_sites).with_zeeman(h);
        let d = DisorderSpec::new(kind, w, 1, seed).unwrap().draw(0, n_sites);
        let blocks = build_blocks(&p, Some(&d)).unwrap();
        let dense = diagonalize(&build_bdg(&p, Some(&d)).unwrap()).unwrap();
        let low = low_spectrum(&blocks, false);
        prop_assert!((low.epsilon_1 - dense.epsilon(1)).abs() < 1e-10);
        prop_assert!((low.epsilon_2 - dense.epsilon(2)).abs() < 1e-10);
        prop_assert!((low.epsilon_minus_1 - dense.epsilon(-1)).abs() < 1e-10);
        let solver = BandSolver::new(&blocks);
        for x in [-3.0f64, -0.2, 0.0, 0.1, 1.0, 30.0] {
            let below = dense.eigenvalues.iter().filter(|&&e| e < x).count();
            prop_assert_eq!(solver.count_below(x), below);
        }
    }

    #[test]
    fn draws_are_bounded_and_reproducible(w in 0.0f64..2.0, seed in any::<u64>(), index in 0usize..1000) {
        for kind in [DisorderKind::ChemicalPotential, DisorderKind::PairingPhase, DisorderKind::NuclearZeeman] {
            let spec = DisorderSpec::new(kind, w, 1, seed).unwrap();
            let d = spec.draw(index, 50);
            prop_assert_eq!(&d, &spec.draw(index, 50));
            match d {
                DisorderDraw::ChemicalPotential(v) | DisorderDraw::PairingPhase(v) => {
                    prop_assert!(v.iter().all(|x| x.abs() <= w));
                }
                DisorderDraw::NuclearZeeman(v) => {
                    prop_assert!(v.iter().all(|b| (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt() <= w * (1.0 + 1e-15)));
                }
            }
        }
    }
}

#[test]
fn edge_states_structure_at_3um() {
    let blocks = build_blocks(&insb_3um(), None).unwrap();
    let edge = low_spectrum(&blocks, true).edge_states().unwrap();
    let (dl, dr) = edge.chirality_defects();
    assert!(dl < 1e-8 && dr < 1e-8);
    assert!(edge.overlap().norm() < 1e-3);
    assert!(edge.left_weight(0.25) >= 0.85, "left quarter weight {}", edge.left_weight(0.25));
    assert!(edge.right_weight(0.25) >= 0.85);
    // ψ_{+1} = (ψ_L + ψ_R)/√2
    let s = 0.5f64.sqrt();
    for ((p, l), r) in edge.psi_plus.iter().zip(&edge.psi_l).zip(&edge.psi_r) {
        assert!((p - (l + r) * s).norm() < 1e-12);
    }
}

#[test]
fn edge_state_stable_across_one_period() {
    let p = insb_3um();
    let period = 100.0; // oscillation period of ε1(L), see the length scan test
    let a = low_spectrum(&build_blocks(&p, None).unwrap(), true).edge_states().unwrap();
    let b = low_spectrum(&build_blocks(&p.with_length_nm(3000.0 + period), None).unwrap(), true)
        .edge_states()
        .unwrap();
    assert!(wavefunction_overlap(&a.psi_l, &b.psi_l) > 0.99);
}

#[test]
fn ill_separated_edge_sector_is_reported() {
    let psi = vec![C64::new(0.5, 0.0); 16];
    assert!(matches!(
        EdgeStatePair::from_plus_state(&psi, 0.1, 0.1 + 1e-8),
        Err(NanowireError::IllSeparated { .. })
    ));
}

#[test]
fn zeeman_scan_shape() {
    let p = insb_3um();
    let hc = critical_field(&p);
    let grid = [0.5 * hc, hc - 0.05, hc + 0.05, 1.5];
    let rows = zeeman_scan(&p, &grid).unwrap();
    assert_eq!(rows.len(), grid.len());
    assert!(rows[0].eps1_mev > 0.5 * rows[0].eps2_mev);
    assert!(rows[3].eps1_mev < 0.1 * rows[3].eps2_mev);
    assert!(zeeman_scan(&p, &[1.0, 0.5]).is_err());
}

#[test]
fn length_scan_envelope_and_magic_points() {
    let p = insb_3um();
    let grid: Vec<f64> = (0..=200).map(|k| 1000.0 + 10.0 * k as f64).collect();
    let scan = length_scan(&p, &grid).unwrap();
    assert_eq!(scan.rows.len(), grid.len());
    assert!(scan.fit.correlation.abs() >= 0.95);
    assert!(scan.fit.slope < 0.0);
    let period = scan.fit.mean_period().unwrap();
    assert!((90.0..110.0).contains(&period), "period {period}");
    // near-zero points between maxima
    let min_between = scan.rows.iter().map(|r| r.eps1_mev).fold(f64::INFINITY, f64::min);
    let max_env = scan.fit.maxima.iter().map(|m| m.1).fold(0.0f64, f64::max);
    assert!(min_between < 0.05 * max_env);
}

#[test]
fn envelope_fit_needs_three_maxima() {
    let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, (-(k as f64)).exp())).collect();
    assert!(matches!(fit_envelope(&pts), Err(NanowireError::FitRefused(_))));
    let osc: Vec<(f64, f64)> = (0..200)
        .map(|k| {
            let l = k as f64;
            (l, (-l / 100.0).exp() * (l / 3.0).sin().abs() + 1e-12)
        })
        .collect();
    let fit = fit_envelope(&osc).unwrap();
    assert!((fit.xi_nm - 50.0).abs() < 5.0, "ξ = {}", fit.xi_nm);
}

#[test]
fn zero_amplitude_ensemble_is_clean() {
    let p = NanowireParams::insb(120);
    let spec = DisorderSpec::new(DisorderKind::ChemicalPotential, 0.0, 4, 3).unwrap();
    let stats = disorder_ensemble(&p, &spec).unwrap();
    assert_eq!(stats.sigma, 0.0);
    for r in &stats.rows {
        assert!((r.overlap_l - 1.0).abs() < 1e-12 && (r.overlap_r - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ensemble_is_deterministic_and_ordered() {
    let p = NanowireParams::insb(120);
    let spec = DisorderSpec::new(DisorderKind::PairingPhase, 0.8, 12, 99).unwrap();
    let a = disorder_ensemble(&p, &spec).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(|| disorder_ensemble(&p, &spec).unwrap());
    assert_eq!(a.rows, b.rows);
    assert!(a.rows.iter().enumerate().all(|(i, r)| r.index == i && r.seed == spec.seed(i)));
    assert_eq!(a.n_flagged, 0);
}

#[test]
fn nuclear_zeeman_below_default_bound() {
    let spec = DisorderSpec::new(DisorderKind::NuclearZeeman, 0.1, 1, 5).unwrap();
    if let DisorderDraw::NuclearZeeman(v) = spec.draw(0, 300) {
        assert!(v.iter().all(|b| (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt() <= 0.1));
    } else {
        panic!("wrong draw kind");
    }
}
