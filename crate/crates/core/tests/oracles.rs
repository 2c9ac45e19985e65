use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use tavis_core::basis::ModelParams;
use tavis_core::observables::{cavity_moments, CavityIndex};
use tavis_core::reference::{annihilation, expm_apply, DenseHamiltonian};
use tavis_core::{cayley_apply, enumerate_basis, thomas_solve, OrderedBasis, PropagatorPlan, StateVector};

fn params(n_cavity: usize, two_j: u32) -> ModelParams {
    ModelParams::from_ghz(2.4, 3.6, 0.05, 1.0, 6.0, n_cavity, two_j)
}

fn pseudo_random(d: usize, seed: f64) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d)
        .map(|i| {
            let x = i as f64 + seed;
            Complex64::new((1.3 * x + 0.2).sin(), (0.71 * x * x + seed).cos())
        })
        .collect();
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= n);
    v
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn dense_from_rowmajor(d: usize, m: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, m)
}

#[test]
fn tridiagonal_parts_reassemble_dense_hamiltonian() {
    for (nc, tj) in [(2, 1), (5, 3), (8, 7), (20, 19)] {
        let p = params(nc, tj);
        let plan = PropagatorPlan::new(&p, 1e-3, tavis_core::Method::Linear).unwrap();
        let dense = DenseHamiltonian::build(&p).unwrap();
        let d = plan.dim();
        assert!(d <= 400);
        let h0 = dense_from_rowmajor(d, &plan.h0().to_dense_canonical(plan.h0_basis()).unwrap());
        let v = dense_from_rowmajor(d, &plan.v().to_dense_canonical(plan.v_basis()).unwrap());
        assert!((&h0 - &dense.h0).amax() <= 1e-13, "H0 mismatch at D={d}");
        assert!((&v - &dense.v).amax() <= 1e-13, "V mismatch at D={d}");

        let t = 0.37;
        let delta = plan.drive().delta_at(t);
        let mut full = &h0 + &v;
        for (s, m) in plan.h0_basis().states().iter().zip(plan.jz().m_values()) {
            let c = s.canonical_index(tj);
            full[(c, c)] += delta * m;
        }
        assert!((&full - dense.at(t)).amax() <= 1e-12);
    }
}

#[test]
fn exp_kernel_matches_dense_exponential_small() {
    let p = params(2, 1);
    let plan = PropagatorPlan::new(&p, 0.02, tavis_core::Method::Exp).unwrap();
    let d = plan.dim();
    assert_eq!(d, 4);
    let h0 = dense_from_rowmajor(d, &plan.h0().to_dense_canonical(plan.h0_basis()).unwrap());
    let theta = 0.35;
    let blocks = tavis_core::precompute_block_exponentials(plan.h0(), theta).unwrap();
    let init = pseudo_random(d, 0.5);
    let mut state = StateVector::from_canonical(plan.h0_basis(), &init).unwrap();
    tavis_core::apply_block_exponentials(&blocks, &mut state).unwrap();
    let mut expected = init.clone();
    expm_apply(&h0, theta, &mut expected);
    assert!(dist(&state.to_canonical(plan.h0_basis()).unwrap(), &expected) <= 1e-12);
}

#[test]
fn cayley_local_error_is_third_order() {
    let p = params(8, 7);
    let plan = PropagatorPlan::new(&p, 1e-3, tavis_core::Method::Linear).unwrap();
    let d = plan.dim();
    assert!(d <= 64);
    let h0 = dense_from_rowmajor(d, &plan.h0().to_dense_canonical(plan.h0_basis()).unwrap());
    let init = pseudo_random(d, 1.7);
    let err = |beta: f64| {
        let mut state = StateVector::from_canonical(plan.h0_basis(), &init).unwrap();
        cayley_apply(plan.h0(), beta, &mut state).unwrap();
        let mut exact = init.clone();
        expm_apply(&h0, 2.0 * beta, &mut exact);
        dist(&state.to_canonical(plan.h0_basis()).unwrap(), &exact)
    };
    let errors: Vec<f64> = [4e-3, 2e-3, 1e-3].iter().map(|&b| err(b)).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((7.0..=9.0).contains(&ratio), "ratio {ratio}, errors {errors:?}");
    }
}

#[test]
fn thomas_matches_dense_lu() {
    for d in [1usize, 2, 7, 33, 64] {
        let f = |i: usize, s: f64| Complex64::new((i as f64 * 0.9 + s).sin(), (i as f64 * 0.4 - s).cos());
        let lower: Vec<Complex64> = (0..d.saturating_sub(1)).map(|i| f(i, 0.1) * 0.5).collect();
        let upper: Vec<Complex64> = (0..d.saturating_sub(1)).map(|i| f(i, 2.3) * 0.5).collect();
        let diag: Vec<Complex64> = (0..d).map(|i| f(i, 1.1) + Complex64::new(3.0, 0.0)).collect();
        let rhs: Vec<Complex64> = (0..d).map(|i| f(i, 4.2)).collect();
        let x = thomas_solve(&lower, &diag, &upper, &rhs).unwrap();

        let mut a = DMatrix::<Complex64>::zeros(d, d);
        for i in 0..d {
            a[(i, i)] = diag[i];
            if i + 1 < d {
                a[(i + 1, i)] = lower[i];
                a[(i, i + 1)] = upper[i];
            }
        }
        let lu = a.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
        assert!(dist(&x, lu.as_slice()) <= 1e-10, "D={d}");
    }
}

#[test]
fn moments_match_dense_operators() {
    let p = params(6, 3);
    let states = enumerate_basis(&p).unwrap();
    let basis = OrderedBasis::for_h0(&p, &states).unwrap();
    let d = basis.len();
    let spin_dim = p.spin_multiplicity();
    let a = annihilation(p.n_cavity).kronecker(&DMatrix::<f64>::identity(spin_dim, spin_dim));
    let a = a.map(|x| Complex64::new(x, 0.0));
    let psi = pseudo_random(d, 3.3);
    let v = DVector::from_vec(psi.clone());
    let expect = |op: &DMatrix<Complex64>| v.dotc(&(op * &v));

    let state = StateVector::from_canonical(&basis, &psi).unwrap();
    let m = cavity_moments(&state, &CavityIndex::new(&basis)).unwrap();
    assert!((m.mean_a - expect(&a)).norm() <= 1e-12);
    assert!((m.mean_a2 - expect(&(&a * &a))).norm() <= 1e-12);
    assert!((m.mean_n - expect(&(a.adjoint() * &a)).re).abs() <= 1e-12);
}
