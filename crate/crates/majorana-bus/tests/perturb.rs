use majorana_bus::nanowire::{
    extract_edge_states, DisorderKind, DisorderSpec, NanowireParams, ParticleHole,
};
use majorana_bus::perturb::*;
use majorana_bus::qcore::C64;
use proptest::prelude::*;
use std::sync::OnceLock;

const KINDS: [DisorderKind; 3] = [
    DisorderKind::ChemicalPotential,
    DisorderKind::PairingPhase,
    DisorderKind::NuclearZeeman,
];

fn wire_3um() -> &'static (NanowireParams, CleanReference) {
    static CELL: OnceLock<(NanowireParams, CleanReference)> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = NanowireParams::insb(300);
        let c = CleanReference::new(&p).unwrap();
        (p, c)
    })
}

fn short_wire() -> &'static (NanowireParams, CleanReference) {
    static CELL: OnceLock<(NanowireParams, CleanReference)> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = NanowireParams::insb(80);
        let c = CleanReference::new(&p).unwrap();
        (p, c)
    })
}

#[test]
fn zero_amplitude_gives_zero_operator() {
    let p = NanowireParams::insb(50);
    for kind in KINDS {
        let spec = DisorderSpec::new(kind, 0.0, 1, 1).unwrap();
        let v = perturbation_operator(&p, &spec, 0).unwrap();
        assert_eq!(v.norm_max(), 0.0);
    }
}

#[test]
fn perturbation_is_hermitian_and_particle_hole_odd() {
    let p = NanowireParams::insb(40);
    let sigma = ParticleHole::new(40);
    for kind in KINDS {
        let spec = DisorderSpec::new(kind, 0.1, 3, 9).unwrap();
        for i in 0..3 {
            let v = perturbation_operator(&p, &spec, i).unwrap();
            let op = v.to_operator();
            assert!(op.norm_max() > 1e-3);
            assert!(op.hermiticity_defect() < 1e-14);
            assert!(sigma.anticommutation_defect(op.matrix()) < 1e-14, "{kind:?}");
        }
    }
}

#[test]
fn diagonal_edge_elements_vanish() {
    let (p, clean) = wire_3um();
    for kind in KINDS {
        let spec = DisorderSpec::new(kind, 0.1, 20, 77).unwrap();
        for i in 0..20 {
            let v = perturbation_operator(p, &spec, i).unwrap();
            let f = first_order(&clean.edge, &v);
            let bound = 1e-10 * v.norm_max();
            assert!(f.v_ll.norm() < bound && f.v_rr.norm() < bound, "{kind:?} {i}");
        }
    }
}

#[test]
fn first_order_matches_plus_state_expectation() {
    let (p, clean) = wire_3um();
    let psi = clean.spectrum.psi(1);
    let spec = DisorderSpec::new(DisorderKind::PairingPhase, 0.1, 5, 3).unwrap();
    for i in 0..5 {
        let v = perturbation_operator(p, &spec, i).unwrap();
        let f = first_order(&clean.edge, &v);
        let direct = v.element(&psi, &psi);
        assert!((f.delta - direct.re).abs() < 1e-13, "{} vs {}", f.delta, direct.re);
        assert!((f.delta - f.v_lr.re).abs() < 1e-13);
    }
}

#[test]
fn first_order_small_against_splitting() {
    let (p, clean) = wire_3um();
    let e1 = clean.spectrum.epsilon(1);
    let spec = DisorderSpec::new(DisorderKind::ChemicalPotential, 0.1, 20, 11).unwrap();
    let mut ratios: Vec<f64> = (0..20)
        .map(|i| {
            let v = perturbation_operator(p, &spec, i).unwrap();
            first_order(&clean.edge, &v).delta.abs() / e1
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    assert!(ratios[10] < 0.1, "median |δ1|/ε1 = {}", ratios[10]);
}

#[test]
fn second_order_decomposition_and_partner() {
    let (p, clean) = wire_3um();
    for kind in KINDS {
        let spec = DisorderSpec::new(kind, 0.05, 8, 5).unwrap();
        for i in 0..8 {
            let v = perturbation_operator(p, &spec, i).unwrap();
            let r = second_order(&clean.spectrum, &clean.edge, &v).unwrap();
            assert!((r.delta_eps1_second - r.term_bulk - r.term_edge).abs() < 1e-12);
            assert!(r.antisymmetry_defect() < 1e-10, "{kind:?} {i}: {}", r.antisymmetry_defect());
            assert_eq!(r.labels.len(), r.l_n.len());
            assert_eq!(r.labels.len(), 4 * p.n_sites - 2);
        }
    }
}

#[test]
fn edge_term_vanishes_for_particle_hole_odd_potentials() {
    // Chirality makes ⟨ψ_L|V|ψ_R⟩ real, so the ±1 coupling is zero.
    let (p, clean) = wire_3um();
    for kind in KINDS {
        let spec = DisorderSpec::new(kind, 0.1, 6, 21).unwrap();
        for i in 0..6 {
            let v = perturbation_operator(p, &spec, i).unwrap();
            let r = second_order(&clean.spectrum, &clean.edge, &v).unwrap();
            let f = first_order(&clean.edge, &v);
            assert!(f.v_lr.im.abs() < 1e-12 * v.norm_max(), "{kind:?}: {}", f.v_lr);
            assert!(r.term_edge < 1e-12 * r.second_order_scale, "{kind:?}: {}", r.term_edge);
        }
    }
}

#[test]
fn well_separated_edges_suppress_second_order() {
    let p = NanowireParams::insb(600);
    let clean = CleanReference::new(&p).unwrap();
    let spec = DisorderSpec::new(DisorderKind::ChemicalPotential, 0.01, 9, 4).unwrap();
    let mut bulk: Vec<f64> = (0..9)
        .map(|i| {
            let v = perturbation_operator(&p, &spec, i).unwrap();
            let r = second_order(&clean.spectrum, &clean.edge, &v).unwrap();
            assert!(r.term_edge.abs() < 1e-8);
            r.term_bulk.abs()
        })
        .collect();
    bulk.sort_by(f64::total_cmp);
    assert!(bulk[4] < 1e-8, "median |term_bulk| = {:.3e}", bulk[4]);
}

#[test]
fn degenerate_splitting_is_refused() {
    let (p, clean) = short_wire();
    let mut spec = clean.spectrum.clone();
    let i1 = spec.index_of(1);
    let im = spec.index_of(-1);
    spec.eigenvalues[i1] = 0.0;
    spec.eigenvalues[im] = 0.0;
    let ds = DisorderSpec::new(DisorderKind::ChemicalPotential, 0.01, 1, 0).unwrap();
    let v = perturbation_operator(p, &ds, 0).unwrap();
    assert!(matches!(
        second_order(&spec, &clean.edge, &v),
        Err(PerturbError::Degenerate(_))
    ));
}

#[test]
fn dimension_mismatch_is_an_error() {
    let (_, clean) = short_wire();
    let ds = DisorderSpec::new(DisorderKind::ChemicalPotential, 0.01, 1, 0).unwrap();
    let v = perturbation_operator(&NanowireParams::insb(30), &ds, 0).unwrap();
    assert!(matches!(
        second_order(&clean.spectrum, &clean.edge, &v),
        Err(PerturbError::Dimension(_))
    ));
}

#[test]
fn residual_scales_as_cube() {
    let (p, clean) = wire_3um();
    let pts: Vec<(f64, f64)> = [0.01, 0.02, 0.04, 0.08]
        .iter()
        .map(|&w| {
            let spec = DisorderSpec::new(DisorderKind::ChemicalPotential, w, 12, 2024).unwrap();
            let rows = compare_exact_with(p, &spec, clean).unwrap();
            assert!(rows.iter().all(|r| r.eps1_pert_mev > 0.0));
            (w, median_abs_residual(&rows))
        })
        .collect();
    let slope = log_log_slope(&pts);
    assert!((slope - 3.0).abs() < 0.5, "slope {slope}");
    for w in pts.windows(2) {
        let ratio = w[1].1 / w[0].1;
        assert!((4.0..=16.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn log_log_slope_recovers_power() {
    let pts: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 2.5 * (k as f64).powi(3))).collect();
    assert!((log_log_slope(&pts) - 3.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn identities_hold_on_random_draws(seed in any::<u64>(), w in 0.001f64..0.2, k in 0usize..3) {
        let (p, clean) = short_wire();
        let spec = DisorderSpec::new(KINDS[k], w, 1, seed).unwrap();
        let v = perturbation_operator(p, &spec, 0).unwrap();
        let r = second_order(&clean.spectrum, &clean.edge, &v).unwrap();
        prop_assert!((r.delta_eps1_second - r.term_bulk - r.term_edge).abs() < 1e-12);
        prop_assert!(r.antisymmetry_defect() < 1e-10);
        let f = first_order(&clean.edge, &v);
        prop_assert!(f.v_ll.norm() < 1e-10 * v.norm_max());
        // l_n and r_n are linear in V.
        let i = r.labels.iter().position(|&n| n == 2).unwrap();
        let psi2 = clean.spectrum.psi(2);
        let direct: C64 = v.element(&clean.edge.psi_l, &psi2);
        prop_assert!((direct - r.l_n[i]).norm() < 1e-13);
    }
}

#[test]
fn edge_pair_from_short_wire_is_consistent() {
    let (_, clean) = short_wire();
    let again = extract_edge_states(&clean.spectrum).unwrap();
    assert!((again.epsilon_1 - clean.edge.epsilon_1).abs() < 1e-15);
}
