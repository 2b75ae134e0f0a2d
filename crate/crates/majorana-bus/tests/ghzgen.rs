use majorana_bus::ghzgen::*;
use majorana_bus::openqs::Rates;
use majorana_bus::qcore::{
    eig_hermitian, expm, ops, propagate_state, state_fidelity, tensor, HilbertSpace, Operator, StepPolicy, C64,
};
use faer::Mat;
use proptest::prelude::*;
use std::f64::consts::PI;

const G: f64 = 0.04;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn unitarity_defect(u: &Operator) -> f64 {
    let d = u.dim();
    let prod = u.matrix().adjoint() * u.matrix();
    (&prod - Mat::<C64>::identity(d, d)).norm_max()
}

fn jx_full(n: usize, nf: usize) -> Operator {
    tensor(&[&j_x(n).unwrap(), &ops::identity(nf)]).unwrap()
}

/// `Σ_c |⟨t ⊗ c|ψ⟩|²`.
fn reduced_fidelity(psi: &[C64], target: &[C64], nf: usize) -> f64 {
    (0..nf)
        .map(|k| (0..target.len()).map(|q| target[q].conj() * psi[q * nf + k]).sum::<C64>().norm_sqr())
        .sum()
}

#[test]
fn hamiltonian_structure() {
    for n in [1usize, 2, 3] {
        let p = GhzParams::new(n, G, 1).with_n_fock(6);
        let jx = jx_full(n, 6);
        for t in [0.0, 3.7, 41.0] {
            let h = collective_hamiltonian(t, &p).unwrap();
            assert_eq!(h.dim(), (1 << n) * 6);
            assert!(h.hermiticity_defect() < 1e-15);
            assert!(h.commutator(&jx).norm_max() < 1e-14);
        }
    }
    let p = GhzParams::new(1, G, 1).with_n_fock(5);
    let t = 2.3;
    let a = ops::destroy(5);
    let x = &a.scale(C64::from_polar(1.0, -p.nu * t)) + &a.adjoint().scale(C64::from_polar(1.0, p.nu * t));
    let want = tensor(&[&ops::sigma_x(), &x]).unwrap().scale(c(G / 2.0));
    let h = collective_hamiltonian(t, &p).unwrap();
    assert!((h.matrix() - want.matrix()).norm_max() < 1e-16);
}

#[test]
fn dimension_cap_points_to_symmetric_mode() {
    let p = GhzParams::new(8, G, 1);
    let err = collective_hamiltonian(0.0, &p).unwrap_err();
    assert!(matches!(err, GhzError::DimensionCap { .. }));
    assert!(err.to_string().contains("symmetric"));
    assert_eq!(p.resolved_mode(), GhzMode::Symmetric);
    assert_eq!(GhzParams::new(2, G, 1).resolved_mode(), GhzMode::Full);
}

#[test]
fn coefficients_at_special_times() {
    for k in 1..=3u32 {
        let p = GhzParams::new(2, G, k);
        for kk in 1..=3 {
            let t = 2.0 * kk as f64 * PI / p.nu;
            assert!(b_coeff(t, p.g, p.nu).norm() < 1e-14);
        }
        assert!((p.a_at_tk() - PI / 2.0).abs() < 1e-14);
        assert!((a_coeff(p.t_k(), p.g, p.nu) - c(p.a_at_tk())).norm() < 1e-12);
    }
    let p = GhzParams::new(2, G, 1);
    assert!((p.nu - 2.0 * G).abs() < 1e-16);
    assert!((p.t_k() - PI / G).abs() < 1e-12);
}

#[test]
fn analytic_evolution_is_unitary_and_reduces_at_tk() {
    for n in [2usize, 3] {
        let p = GhzParams::new(n, G, 1).with_n_fock(10);
        for t in [0.3, 17.0, 55.5, p.t_k()] {
            assert!(unitarity_defect(&analytic_evolution(t, &p).unwrap()) < 1e-8);
        }
        let u = analytic_evolution(p.t_k(), &p).unwrap();
        let jx2 = &j_x(n).unwrap() * &j_x(n).unwrap();
        let gate = majorana_bus::qcore::exp_hermitian(&jx2, -PI / 2.0).unwrap();
        let want = tensor(&[&gate, &ops::identity(10)]).unwrap();
        assert!((u.matrix() - want.matrix()).norm_max() < 1e-12);
        // U(T_k) commutes with the spectral projectors of J_x².
        let jx2f = jx_full(n, 10);
        let jx2f = &jx2f * &jx2f;
        let eig = eig_hermitian(&jx2f).unwrap();
        let mut seen: Vec<f64> = Vec::new();
        for &l in &eig.values {
            if seen.iter().any(|&s| (s - l).abs() < 1e-9) {
                continue;
            }
            seen.push(l);
            let proj = eig.map(|x| if (x - l).abs() < 1e-9 { c(1.0) } else { c(0.0) });
            let comm = u.matrix() * &proj - &proj * u.matrix();
            assert!(comm.norm_max() < 1e-8);
        }
    }
}

#[test]
fn analytic_matches_direct_integration() {
    for (n, nf) in [(2usize, 16usize), (3, 18)] {
        let p = GhzParams::new(n, G, 1).with_n_fock(nf);
        let psi0 = initial_state(n, nf);
        let times: Vec<f64> = (1..=20).map(|i| p.t_k() * i as f64 / 20.0).collect();
        let policy = StepPolicy::default().with_frequency_bound(p.nu);
        let states = propagate_state(|t| collective_hamiltonian(t, &p).unwrap(), &psi0, 0.0, &times, &policy).unwrap();
        for (t, psi) in times.iter().zip(&states) {
            let phi = analytic_evolution(*t, &p).unwrap().apply(&psi0);
            let f = state_fidelity(&phi, psi);
            assert!(f > 1.0 - 1e-6, "N={n} t={t}: {f}");
        }
    }
}

#[test]
fn literal_factor_product_agrees_near_vacuum() {
    // exp(iAm²)exp(iBma)exp(iB*ma†)|0⟩ in a large truncation versus the unitary form.
    let p = GhzParams::new(2, G, 1).with_n_fock(40);
    let nf = 40;
    let a = ops::destroy(nf);
    for t in [11.0, 33.0, 60.0] {
        let u = analytic_evolution(t, &p).unwrap();
        let big_a = a_coeff(t, p.g, p.nu);
        let b = b_coeff(t, p.g, p.nu);
        for m in [-1.0, 0.0, 1.0] {
            let f1 = expm(&Mat::from_fn(nf, nf, |i, j| C64::new(0.0, m) * b * a.get(i, j)));
            let f2 = expm(&Mat::from_fn(nf, nf, |i, j| C64::new(0.0, m) * b.conj() * a.get(j, i).conj()));
            let ph = (C64::new(0.0, 1.0) * big_a * m * m).exp();
            let prod = &f1 * &f2;
            let lit = Mat::from_fn(nf, nf, |i, j| prod[(i, j)] * ph);
            // J_x eigenvector with eigenvalue m on two qubits
            let v: Vec<C64> = match m as i32 {
                -1 => vec![c(0.5), c(-0.5), c(-0.5), c(0.5)],
                0 => vec![c(0.0), c(0.5_f64.sqrt()), c(-(0.5_f64.sqrt())), c(0.0)],
                _ => vec![c(0.5); 4],
            };
            let psi: Vec<C64> = v.iter().flat_map(|&x| (0..nf).map(move |k| if k == 0 { x } else { c(0.0) })).collect();
            let out = u.apply(&psi);
            for q in 0..4 {
                for k in 0..20 {
                    let want = v[q] * lit[(k, 0)];
                    assert!((out[q * nf + k] - want).norm() < 1e-10, "t={t} m={m} k={k}");
                }
            }
        }
    }
}

#[test]
fn cavity_returns_to_vacuum_at_tk() {
    for n in [2usize, 3, 4] {
        let p = GhzParams::new(n, G, 1).with_n_fock(12);
        let psi = analytic_evolution(p.t_k(), &p).unwrap().apply(&initial_state(n, 12));
        let rho = majorana_bus::qcore::DensityMatrix::pure(HilbertSpace::qubits_and_mode(n, 12), &psi).unwrap();
        let cav = majorana_bus::qcore::partial_trace(&rho, &[n]).unwrap();
        assert!((cav.purity() - 1.0).abs() < 1e-6);
        let mid = analytic_evolution(0.5 * p.t_k(), &p).unwrap().apply(&initial_state(n, 12));
        let rho = majorana_bus::qcore::DensityMatrix::pure(HilbertSpace::qubits_and_mode(n, 12), &mid).unwrap();
        assert!(majorana_bus::qcore::partial_trace(&rho, &[n]).unwrap().purity() < 0.99);
    }
}

#[test]
fn ghz_targets() {
    let s = 0.5_f64.sqrt();
    let t2 = ghz_target(2).unwrap();
    assert!((t2[0] - c(s)).norm() < 1e-15 && (t2[3] - C64::new(0.0, s)).norm() < 1e-15);
    let t4 = ghz_target(4).unwrap();
    assert!((t4[0] - c(s)).norm() < 1e-15 && (t4[15] - C64::new(0.0, -s)).norm() < 1e-15);
    assert!(ghz_target(1).is_err());
    for n in 2..=6usize {
        let p = GhzParams::new(n, G, 1).with_n_fock(4);
        let u = analytic_evolution(p.t_k(), &p).unwrap();
        let mut psi = u.apply(&initial_state(n, 4));
        if n % 2 == 1 {
            let ud = tensor(&[&u_d(n).unwrap(), &ops::identity(4)]).unwrap();
            psi = ud.apply(&psi);
        }
        let f = reduced_fidelity(&psi, &ghz_target(n).unwrap(), 4);
        assert!((f - 1.0).abs() < 1e-12, "N={n}: {f}");
        let norm: f64 = ghz_target(n).unwrap().iter().map(|x| x.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }
}

#[test]
fn spin_sectors_decompose_the_register() {
    for n in 1..=6usize {
        let sectors = spin_sectors(n).unwrap();
        let total: usize = sectors.iter().map(|s| s.multiplicity * s.dim()).sum();
        assert_eq!(total, 1 << n);
        let all: Vec<&Mat<C64>> = sectors.iter().flat_map(|s| s.copies.iter()).collect();
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let g = a.adjoint() * *b;
                let want = if i == j { Mat::<C64>::identity(a.ncols(), b.ncols()) } else { Mat::zeros(a.ncols(), b.ncols()) };
                assert!((&g - &want).norm_max() < 1e-12);
            }
        }
    }
    let mults: Vec<(usize, usize)> = spin_sectors(4).unwrap().iter().map(|s| (s.two_j, s.multiplicity)).collect();
    assert_eq!(mults, vec![(4, 1), (2, 3), (0, 2)]);
}

#[test]
fn unitary_generation_reaches_ghz() {
    for n in [2usize, 3, 4] {
        let mut p = GhzParams::new(n, G, 1).unitary();
        p.check_convergence = false;
        let r = generate(&p).unwrap();
        assert!((r.f2_at_tk - 1.0).abs() < 1e-6, "N={n}: {}", r.f2_at_tk);
    }
}

#[test]
fn symmetric_mode_matches_full_space() {
    for (n, nf) in [(3usize, 8usize), (4, 10)] {
        let mut p = GhzParams::new(n, G, 1).with_n_fock(nf);
        p.rates = Rates { kappa: 3e-4, gamma1: 5e-4, gamma2: 2e-4 };
        p.samples = 60;
        let full = generate_once(&p.clone().with_mode(GhzMode::Full)).unwrap();
        let sym = generate_once(&p.clone().with_mode(GhzMode::Symmetric)).unwrap();
        for (a, b) in full.trace.fidelities.iter().zip(&sym.trace.fidelities) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn dissipative_two_qubit_run() {
    let r = generate(&GhzParams::new(2, G, 1)).unwrap();
    assert!(r.converged);
    assert_eq!(r.n_fock_check, Some(32));
    assert!(r.fock_delta.unwrap() < FOCK_TOL);
    assert!((0.988..0.999).contains(&r.max_f2), "{}", r.max_f2);
    assert!((r.t_at_max - r.t_k).abs() < 0.02 * r.t_k);
    assert!(r.stats.max_trace_drift < 1e-6);
    assert!(r.min_eigenvalue >= -1e-6);
    for f in &r.trace.fidelities {
        assert!((-1e-9..=1.0 + 1e-9).contains(f));
    }
}

#[test]
fn sweep_is_monotone_and_dephasing_dominated() {
    let mut base = GhzParams::new(2, G, 1);
    base.samples = 80;
    let grid = [1.0, 5.5, 10.0];
    let rows = rate_sweep(&base, &grid, &grid).unwrap();
    let at = |a: f64, b: f64| {
        rows.iter().find(|r| r.gamma1_over_kappa == a && r.gamma2_over_kappa == b).unwrap().max_f2
    };
    for &x in &grid {
        for w in grid.windows(2) {
            assert!(at(w[1], x) <= at(w[0], x));
            assert!(at(x, w[1]) <= at(x, w[0]));
        }
    }
    for w in grid.windows(2) {
        let d1 = at(w[0], 1.0) - at(w[1], 1.0);
        let d2 = at(1.0, w[0]) - at(1.0, w[1]);
        assert!(d2 > d1);
    }
    let mut p = base.clone();
    p.check_convergence = false;
    assert_eq!(at(1.0, 1.0), generate_once(&p).unwrap().max_f2);
}

#[test]
fn parameter_validation() {
    let ok = GhzParams::new(2, G, 1);
    assert!(ok.validate().is_ok());
    let mut p = ok.clone();
    p.omega_rabi = 19.0 * p.nu;
    assert!(p.validate().is_err());
    let mut p = ok.clone();
    p.k = 0;
    assert!(p.validate().is_err());
    let mut p = ok.clone();
    p.rates.gamma2 = -1.0;
    assert!(p.validate().is_err());
    let mut p = ok.clone();
    p.n_qubits = MAX_QUBITS + 1;
    assert!(p.validate().is_err());
    assert_eq!(default_cutoff(2, 1), 16);
    assert_eq!(default_cutoff(8, 1), 49);
    assert!((ok.epsilon() - ok.omega_rabi * ok.nu / (2.0 * G)).abs() < 1e-12);
}

#[test]
fn fast_drive_terms_are_negligible() {
    let p = GhzParams::new(2, G, 1).with_n_fock(12);
    let d = drive_term_check(&p).unwrap();
    assert!(d.omega_over_nu >= MIN_DRIVE_RATIO);
    assert!(d.state_fidelity > 0.99, "{}", d.state_fidelity);
    assert!(d.f2_with_drive_terms > 0.99);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_conserves_jx(t in 0.0..500.0f64, g in 0.01..0.1f64, k in 1u32..4) {
        let p = GhzParams::new(2, g, k).with_n_fock(5);
        let h = collective_hamiltonian(t, &p).unwrap();
        prop_assert!(h.commutator(&jx_full(2, 5)).norm_max() < 1e-14);
    }

    #[test]
    fn b_is_periodic_and_bounded(t in 0.0..500.0f64, g in 0.01..0.1f64, k in 1u32..5) {
        let p = GhzParams::new(2, g, k);
        let b = b_coeff(t, p.g, p.nu);
        prop_assert!((b - b_coeff(t + p.t_k() / k as f64, p.g, p.nu)).norm() < 1e-10);
        prop_assert!(b.norm() <= 2.0 * g / p.nu + 1e-12);
    }
}
