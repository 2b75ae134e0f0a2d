use majorana_bus::openqs::*;
use majorana_bus::qcore::{
    basis_ket, ops, propagate_state, tensor, DensityMatrix, HilbertSpace, Operator, StepPolicy, C64,
};
use majorana_bus::units::{bose_occupation, ghz_to_rad_per_ns};
use faer::Mat;
use std::f64::consts::PI;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn jc(g: f64, nf: usize) -> Operator {
    let x = tensor(&[&ops::sigma_plus(), &ops::destroy(nf)]).unwrap().scale(c(g));
    let h = &x + &x.adjoint();
    h.with_space(HilbertSpace::qubits_and_mode(1, nf)).unwrap()
}

fn random_state(space: HilbertSpace, seed: u64) -> DensityMatrix {
    let d = space.total_dim();
    let mut s = seed;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let a = Mat::<C64>::from_fn(d, d, |_, _| C64::new(next(), next()));
    let mut rho = &a * a.adjoint();
    let tr: C64 = (0..d).map(|i| rho[(i, i)]).sum();
    rho = Mat::from_fn(d, d, |i, j| rho[(i, j)] / tr);
    DensityMatrix::new(space, rho).unwrap()
}

#[test]
fn rhs_is_traceless_and_hermitian() {
    let nf = 4;
    let spec = LindbladSpec::new(
        Hamiltonian::from_operator(&jc(0.3, nf)),
        Rates { kappa: 0.1, gamma1: 0.05, gamma2: 0.02 },
        0.3,
        vec![0.3],
    )
    .unwrap();
    let rho = random_state(spec.space.clone(), 7);
    let d = lindblad_rhs(&rho, &spec, 0.0).unwrap();
    let tr: C64 = (0..d.nrows()).map(|i| d[(i, i)]).sum();
    assert!(tr.norm() < 1e-12);
    let herm = (0..d.nrows())
        .flat_map(|i| (0..d.nrows()).map(move |j| (i, j)))
        .map(|(i, j)| (d[(i, j)] - d[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    assert!(herm < 1e-14);
}

#[test]
fn zero_rates_give_commutator() {
    let h = jc(0.7, 3);
    let spec = LindbladSpec::new(Hamiltonian::from_operator(&h), Rates::default(), 0.0, vec![0.7]).unwrap();
    let rho = random_state(spec.space.clone(), 3);
    let d = lindblad_rhs(&rho, &spec, 0.0).unwrap();
    let comm = h.matrix() * rho.matrix() - rho.matrix() * h.matrix();
    for i in 0..6 {
        for j in 0..6 {
            assert!((d[(i, j)] - C64::new(0.0, -1.0) * comm[(i, j)]).norm() < 1e-14);
        }
    }
}

#[test]
fn relaxation_rate_of_sigma_z() {
    let space = HilbertSpace::qubits_and_mode(1, 2);
    let gamma1 = 0.37;
    let spec = LindbladSpec::new(
        Hamiltonian::zero(space.clone()),
        Rates { kappa: 0.0, gamma1, gamma2: 0.0 },
        0.0,
        vec![1.0],
    )
    .unwrap();
    let psi = basis_ket(&space, &[1, 0]);
    let rho = DensityMatrix::pure(space, &psi).unwrap();
    let d = lindblad_rhs(&rho, &spec, 0.0).unwrap();
    let sz = tensor(&[&ops::sigma_z(), &ops::identity(2)]).unwrap();
    let rate: C64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| sz.get(i, j) * d[(j, i)]).sum();
    assert!((rate.re + 2.0 * gamma1).abs() < 1e-14, "{rate}");
}

#[test]
fn thermal_state_is_cavity_fixed_point() {
    let nf = 12;
    let n_c = 0.4;
    let space = HilbertSpace::qubits_and_mode(1, nf);
    let spec = LindbladSpec::new(
        Hamiltonian::zero(space.clone()),
        Rates { kappa: 0.2, gamma1: 0.0, gamma2: 0.0 },
        n_c,
        vec![1.0],
    )
    .unwrap();
    let q = n_c / (n_c + 1.0);
    let z: f64 = (0..nf).map(|n| q.powi(n as i32)).sum();
    let cav = Mat::<C64>::from_fn(nf, nf, |i, j| if i == j { c(q.powi(i as i32) / z) } else { C64::new(0.0, 0.0) });
    let qubit = DensityMatrix::pure(HilbertSpace::flat(2), &basis_ket(&HilbertSpace::flat(2), &[0])).unwrap();
    let rho = DensityMatrix::product(&qubit, &DensityMatrix::new(HilbertSpace::flat(nf), cav).unwrap());
    let d = lindblad_rhs(&rho, &spec, 0.0).unwrap();
    let worst = (0..2 * nf).flat_map(|i| (0..2 * nf).map(move |j| (i, j))).map(|(i, j)| d[(i, j)].norm()).fold(0.0, f64::max);
    assert!(worst < 1e-15);
    let mean: f64 = (0..nf).map(|n| n as f64 * q.powi(n as i32) / z).sum();
    assert!((mean - n_c).abs() < 1e-3);
}

#[test]
fn trivial_evolution_is_constant() {
    let space = HilbertSpace::qubits_and_mode(2, 3);
    let spec = LindbladSpec::new(Hamiltonian::zero(space.clone()), Rates::default(), 0.0, vec![1.0]).unwrap();
    let rho = random_state(space, 11);
    let tr = evolve(&rho, &spec, &[0.5, 1.0, 3.0]).unwrap();
    for s in &tr.states {
        assert!((s.matrix() - rho.matrix()).norm_max() < 1e-15);
    }
}

#[test]
fn unitary_limit_matches_state_propagation() {
    let g = 0.5;
    let nf = 5;
    let h = jc(g, nf);
    // Fastest Rabi frequency in the truncated space.
    let w_max = 2.0 * g * ((nf - 1) as f64).sqrt();
    let spec = LindbladSpec::new(Hamiltonian::from_operator(&h), Rates::default(), 0.0, vec![w_max]).unwrap();
    let mut psi = vec![C64::new(0.0, 0.0); 2 * nf];
    psi[nf] = c(0.6);
    psi[nf + 2] = C64::new(0.0, 0.8);
    let rho0 = DensityMatrix::pure(spec.space.clone(), &psi).unwrap();
    let times = [0.7, 2.0, 5.0];
    let tr = evolve(&rho0, &spec, &times).unwrap();
    let states = propagate_state(|_| h.clone(), &psi, 0.0, &times, &StepPolicy::default().with_dt(1e-3)).unwrap();
    for (rho, phi) in tr.states.iter().zip(&states) {
        let pure = DensityMatrix::pure(spec.space.clone(), phi).unwrap();
        let err = (rho.matrix() - pure.matrix()).norm_max();
        assert!(err < 1e-8, "{err}");
    }
}

#[test]
fn cavity_relaxation_law() {
    let nf = 30;
    let (kappa, n_c) = (0.3, 0.2);
    let space = HilbertSpace::qubits_and_mode(1, nf);
    let spec = LindbladSpec::new(
        Hamiltonian::zero(space.clone()),
        Rates { kappa, gamma1: 0.0, gamma2: 0.0 },
        n_c,
        vec![kappa],
    )
    .unwrap();
    let psi = basis_ket(&space, &[0, 3]);
    let rho0 = DensityMatrix::pure(space.clone(), &psi).unwrap();
    let times: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let tr = evolve(&rho0, &spec, &times).unwrap();
    let num = tensor(&[&ops::identity(2), &ops::number(nf)]).unwrap();
    for (t, rho) in times.iter().zip(&tr.states) {
        let n = rho.expectation(&num).re;
        let want = 3.0 * (-kappa * t).exp() + n_c * (1.0 - (-kappa * t).exp());
        assert!((n - want).abs() < 1e-6, "t={t}: {n} vs {want}");
    }
}

#[test]
fn pure_damping_is_monotone() {
    let nf = 6;
    let space = HilbertSpace::qubits_and_mode(1, nf);
    let spec = LindbladSpec::new(
        Hamiltonian::zero(space.clone()),
        Rates { kappa: 0.5, gamma1: 0.0, gamma2: 0.0 },
        0.0,
        vec![0.5],
    )
    .unwrap();
    let rho0 = random_state(space, 5);
    let times: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
    let tr = evolve(&rho0, &spec, &times).unwrap();
    let num = tensor(&[&ops::identity(2), &ops::number(nf)]).unwrap();
    let ns: Vec<f64> = tr.states.iter().map(|r| r.expectation(&num).re).collect();
    for w in ns.windows(2) {
        assert!(w[1] <= w[0] + 1e-14);
    }
}

#[test]
fn invalid_specs_rejected() {
    let h = Hamiltonian::from_operator(&jc(1.0, 3));
    assert!(LindbladSpec::new(h.clone(), Rates { kappa: -1.0, gamma1: 0.0, gamma2: 0.0 }, 0.0, vec![]).is_err());
    assert!(LindbladSpec::new(h.clone(), Rates::default(), f64::NAN, vec![]).is_err());
    let spec = LindbladSpec::new(h, Rates::default(), 0.0, vec![1.0]).unwrap();
    let wrong = DensityMatrix::pure(HilbertSpace::flat(4), &basis_ket(&HilbertSpace::flat(4), &[0])).unwrap();
    assert!(matches!(evolve(&wrong, &spec, &[1.0]), Err(OpenQsError::Dimension { .. })));
    let flat = Hamiltonian::zero(HilbertSpace::new(vec![3, 3]).unwrap());
    assert!(LindbladSpec::new(flat, Rates::default(), 0.0, vec![]).is_err());
}

#[test]
fn runaway_step_aborts_with_diagnostic() {
    let h = jc(50.0, 4);
    let spec = LindbladSpec::new(Hamiltonian::from_operator(&h), Rates::uniform(1.0), 0.0, vec![1e-4]).unwrap();
    let rho = random_state(spec.space.clone(), 1);
    let err = evolve(&rho, &spec, &[5000.0]).unwrap_err();
    assert!(matches!(err, OpenQsError::Invariant { .. }), "{err}");
}

#[test]
fn sparse_products_match_dense() {
    let a = jc(0.3, 4);
    let b = tensor(&[&ops::sigma_z(), &ops::destroy(4)]).unwrap();
    let sa = SparseOp::from_operator(&a);
    let sb = SparseOp::from_operator(&b);
    let prod = sa.matmul(&sb).to_dense();
    let dense = a.matrix() * b.matrix();
    assert!((&prod - &dense).norm_max() < 1e-15);
    assert!((sb.adjoint().to_dense() - b.adjoint().matrix()).norm_max() == 0.0);
}

#[test]
fn transfer_unitary_limit() {
    let mut cfg = TransferConfig::operating_point(0.04);
    cfg.rates = Rates::default();
    let r = transfer_experiment(&cfg).unwrap();
    assert!((r.f1_joint_at_transfer - 1.0).abs() < 1e-6);
    assert!((r.f1_reduced_at_transfer - 1.0).abs() < 1e-6);
}

#[test]
fn transfer_with_default_rates() {
    let g = ghz_to_rad_per_ns(6.489e-3);
    let r = transfer_experiment(&TransferConfig::operating_point(g)).unwrap();
    assert!(r.f1_joint_at_transfer >= 0.998, "{}", r.f1_joint_at_transfer);
    assert!(r.f1_reduced_at_transfer >= r.f1_joint_at_transfer);
    assert!(r.fock_delta.unwrap() < 1e-6);
    assert!(r.stats.max_trace_drift < 1e-7);
    assert!(r.min_eigenvalue >= -1e-7);
    for f in r.joint.fidelities.iter().chain(&r.reduced.fidelities) {
        assert!((-1e-9..=1.0 + 1e-9).contains(f));
    }
}

#[test]
fn dephasing_and_relaxation_signatures() {
    // Pinned from this integrator: equal total rate, Γ1-only versus Γ2-only.
    let g = 0.04;
    let run = |g1: f64, g2: f64| {
        let mut c = TransferConfig::operating_point(g);
        c.rates = Rates { kappa: 0.0, gamma1: g1, gamma2: g2 };
        transfer_once(&c).unwrap()
    };
    let relax = run(2e-4, 0.0);
    let deph = run(0.0, 2e-4);
    assert!((relax.joint.max - 0.999019217021).abs() < 1e-9);
    assert!((relax.reduced.max - 0.999999223336).abs() < 1e-9);
    assert!((deph.joint.max - 0.995116685758).abs() < 1e-9);
    assert!((deph.reduced.max - 0.998044188972).abs() < 1e-9);
    assert!(deph.joint.max < relax.joint.max);
}

#[test]
fn max_fidelity_monotone_in_rates() {
    let g = 0.04;
    let grid = [0.0, 1e-4, 4e-4];
    let mut table = [[[0.0; 3]; 3]; 3];
    for (i, &k) in grid.iter().enumerate() {
        for (j, &g1) in grid.iter().enumerate() {
            for (l, &g2) in grid.iter().enumerate() {
                let mut c = TransferConfig::operating_point(g);
                c.rates = Rates { kappa: k, gamma1: g1, gamma2: g2 };
                c.samples = 80;
                table[i][j][l] = transfer_once(&c).unwrap().joint.max;
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                let f = table[i][j][l];
                if i < 2 {
                    assert!(table[i + 1][j][l] <= f + 1e-12);
                }
                if j < 2 {
                    assert!(table[i][j + 1][l] <= f + 1e-12);
                }
                if l < 2 {
                    assert!(table[i][j][l + 1] <= f + 1e-12);
                }
            }
        }
    }
}

#[test]
fn thermal_occupation_and_scan() {
    let wc = ghz_to_rad_per_ns(5.2);
    let n20 = bose_occupation(wc, 0.020);
    assert!((2e-6..=6e-6).contains(&n20), "{n20}");
    assert!((n20 - 3.8e-6).abs() < 0.1e-6);
    let g = 0.04;
    let rates = Rates::uniform(g / 1000.0);
    let rows = thermal_scan(g, rates, &[0.001, 0.020, 0.050], wc, 5).unwrap();
    let mut cfg = TransferConfig::operating_point(g);
    cfg.rates = rates;
    let vac = transfer_once(&cfg).unwrap();
    assert!((rows[0].max_f1 - vac.joint.max).abs() < 1e-12);
    assert!(rows[1].max_f1 >= rows[2].max_f1);
    assert!((rows[1].t_mk - 20.0).abs() < 1e-12);
    assert!(thermal_scan(g, rates, &[0.0], wc, 5).is_err());
}

#[test]
fn fidelity_trace_bookkeeping() {
    let t = FidelityTrace::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.9, 0.5]);
    assert_eq!(t.max, 0.9);
    assert_eq!(t.argmax, 1.0);
    assert_eq!(t.at(2.0), Some(0.5));
    assert_eq!(t.at(0.5), None);
    let _ = PI;
}
