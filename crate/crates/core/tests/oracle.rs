//! Cross-checks of the Ermakov pipeline against the truncated Fock-space
//! propagator and the closed-form DPA solution.

use ndarray::{s, Array1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squeezevo::amplitudes::state_amplitudes;
use squeezevo::ermakov::{integrate, standard_initial, uniform_grid, ErmakovState, Method, Trajectory};
use squeezevo::fock_oracle::{build_hamiltonian, build_u_of_t, heisenberg_picture, propagate, propagate_columns, TruncatedBasis};
use squeezevo::hamiltonian::HamiltonianSpec;
use squeezevo::heisenberg::{
    dpa_closed_form, heisenberg_a, heisenberg_qp, invariant_b, number_state_moments, two_time_commutators,
};
use squeezevo::linalg::{adjoint, commutator, max_abs_diff_block, CMatrix};
use squeezevo::squeeze_params::to_squeeze_parameters;
use squeezevo::Complex64;

const TIGHT: Method<f64> = Method::Adaptive { tol: 1e-13 };

fn random_state(rng: &mut ChaCha8Rng) -> ErmakovState<f64> {
    ErmakovState::new(
        rng.gen_range(-0.5..0.5),
        rng.gen_range(0.6..1.6),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-0.8..0.8),
        rng.gen_range(-0.8..0.8),
        0.0,
    )
    .unwrap()
}

fn dpa_trajectory(lambda: f64, init: &ErmakovState<f64>, grid: &[f64]) -> Trajectory<f64> {
    integrate(&HamiltonianSpec::dpa(1.0, lambda).unwrap(), init, grid, TIGHT).unwrap()
}

/// Largest `|x_m − e^{iχ} y_m|` after aligning on the largest entry of `y`.
fn phase_aligned_diff(x: &[Complex64], y: &[Complex64]) -> f64 {
    let k = (0..y.len()).max_by(|&i, &j| y[i].norm().total_cmp(&y[j].norm())).unwrap();
    let ph = x[k] / y[k];
    let ph = ph / ph.norm();
    x.iter().zip(y).map(|(a, b)| (a - ph * b).norm()).fold(0.0, f64::max)
}

#[test]
fn ermakov_matches_dpa_closed_form_from_random_initial_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = uniform_grid(0.0, 5.0, 51);
    for lambda in [0.05, 0.1, 0.3] {
        let inits = [standard_initial(1.0).unwrap(), random_state(&mut rng), random_state(&mut rng)];
        for init in inits {
            let traj = dpa_trajectory(lambda, &init, &grid);
            for (t, st) in traj.iter() {
                let num = heisenberg_a(st, 1.0).unwrap();
                let exact = dpa_closed_form(1.0, lambda, &init, t).unwrap();
                assert!(num.max_diff(&exact) < 1e-8, "λ = {lambda}, t = {t}: {}", num.max_diff(&exact));
            }
        }
    }
}

#[test]
fn two_time_commutators_match_closed_forms() {
    let init = random_state(&mut ChaCha8Rng::seed_from_u64(3));
    let grid = uniform_grid(0.0, 3.0, 7);
    let traj = dpa_trajectory(0.2, &init, &grid);
    let st = traj.states();
    for (i, j) in [(1, 4), (2, 6), (5, 5)] {
        let num = two_time_commutators(&st[i], &st[j], 1.0).unwrap();
        let c1 = dpa_closed_form(1.0, 0.2, &init, grid[i]).unwrap();
        let c2 = dpa_closed_form(1.0, 0.2, &init, grid[j]).unwrap();
        let exact = squeezevo::heisenberg::commutators_from(&c1, &c2);
        for k in 0..3 {
            assert!((num[k] - exact[k]).norm() < 1e-8);
        }
    }
}

#[test]
fn propagator_heisenberg_operator_matches_closed_form() {
    let spec = HamiltonianSpec::dpa(1.0, 0.1).unwrap();
    let u = propagate(&spec, &[0.0, 1.0], 64, 1e-12).unwrap();
    let basis = TruncatedBasis::new(1.0, 64).unwrap();
    let a_t = heisenberg_picture(u.at(1), basis.a());
    let c = dpa_closed_form(1.0, 0.1, &standard_initial(1.0).unwrap(), 1.0).unwrap();
    assert!(max_abs_diff_block(&a_t, &basis.operator(&c), 17) < 1e-6);
}

#[test]
fn amplitudes_match_propagator_columns_up_to_phase() {
    let spec = HamiltonianSpec::dpa(1.0, 0.1).unwrap();
    let times = [0.0, 0.5, 1.0, 2.0];
    let traj = integrate(&spec, &standard_initial(1.0).unwrap(), &times, TIGHT).unwrap();
    let prop = propagate_columns(&spec, &times, 96, &[0, 1, 2, 3], 1e-12).unwrap();
    for (i, (_, st)) in traj.iter().enumerate() {
        let p = to_squeeze_parameters(st, 1.0).unwrap();
        for n in 0..4 {
            let v = state_amplitudes(&p, st.gamma, n, 48).unwrap();
            assert!(v.deficit <= 1e-6);
            let col = prop.column(i, n).unwrap();
            let col = col.slice(s![..49]).to_vec();
            for (a, b) in v.entries.iter().zip(&col) {
                assert!((a.norm() - b.norm()).abs() < 1e-6);
            }
            assert!(phase_aligned_diff(&v.entries, &col) < 1e-6);
        }
    }
}

#[test]
fn u_of_t_columns_match_amplitudes() {
    let init = random_state(&mut ChaCha8Rng::seed_from_u64(11));
    let st = *dpa_trajectory(0.3, &init, &[0.0, 1.5]).states().last().unwrap();
    let p = to_squeeze_parameters(&st, 1.0).unwrap();
    let u = build_u_of_t(&p, st.gamma, 96).unwrap();
    for n in 0..4 {
        let v = state_amplitudes(&p, st.gamma, n, 40).unwrap();
        let col = u.slice(s![..41, n]).to_vec();
        assert!(phase_aligned_diff(&v.entries, &col) < 1e-6);
    }
}

/// Schrödinger-picture matrix of `b̂(t)` from the trajectory state.
fn invariant_matrix(basis: &TruncatedBasis<f64>, st: &ErmakovState<f64>) -> CMatrix<f64> {
    basis.operator(&invariant_b(st, basis.omega()).unwrap())
}

#[test]
fn number_of_invariant_quanta_is_conserved() {
    let spec = HamiltonianSpec::dpa(1.0, 0.1).unwrap();
    let grid = uniform_grid(0.0, 3.0, 7);
    let traj = integrate(&spec, &standard_initial(1.0).unwrap(), &grid, TIGHT).unwrap();
    let prop = propagate_columns(&spec, &grid, 64, &[0, 1, 2], 1e-12).unwrap();
    let basis = TruncatedBasis::new(1.0, 64).unwrap();
    for (i, (_, st)) in traj.iter().enumerate() {
        let b = invariant_matrix(&basis, st);
        let bdb = adjoint(&b).dot(&b);
        for n in 0..3 {
            let psi = prop.column(i, n).unwrap();
            let e = psi.mapv(|z| z.conj()).dot(&bdb.dot(&psi));
            assert!((e.re - n as f64).abs() < 1e-6 && e.im.abs() < 1e-6, "t = {}, n = {n}: {e}", grid[i]);
            // vacuum annihilation
            if n == 0 {
                let r: Array1<Complex64> = b.dot(&psi);
                let norm = r.slice(s![..32]).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!(norm <= 1e-5);
            }
        }
    }
}

#[test]
fn heisenberg_equations_hold_on_the_low_block() {
    let spec = HamiltonianSpec::dpa(1.0, 0.2).unwrap();
    let init = standard_initial(1.0).unwrap();
    let (t, h) = (1.0, 1e-3);
    let traj = integrate(&spec, &init, &[0.0, t - h, t, t + h], TIGHT).unwrap();
    let st = traj.states();
    let dim = 64;
    let basis = TruncatedBasis::new(1.0, dim).unwrap();
    let u = propagate(&spec, &[0.0, t], dim, 1e-12).unwrap();
    let ht = heisenberg_picture(u.at(1), &build_hamiltonian(&spec.coeffs_at(t).unwrap(), &basis).unwrap());
    let minus_i = Complex64::new(0.0, -1.0);
    for pick in [0usize, 1] {
        let x = |s: &ErmakovState<f64>| {
            let (q, p) = heisenberg_qp(s).unwrap();
            basis.quadrature(if pick == 0 { &q } else { &p })
        };
        let dx = (x(&st[3]) - x(&st[1])).mapv(|z| z / (2.0 * h));
        let rhs = commutator(&x(&st[2]), &ht).mapv(|z| z * minus_i);
        let d = max_abs_diff_block(&dx, &rhs, 16);
        assert!(d < 1e-4, "{d}");
    }
}

#[test]
fn invariant_equation_holds_for_random_initial_data() {
    // i ḃ + [b̂, Ĥ] = 0 in the Schrödinger picture
    let spec = HamiltonianSpec::dpa(1.0, 0.2).unwrap();
    let dim = 48;
    let basis = TruncatedBasis::new(1.0, dim).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-3;
    for t in [0.7, 2.5] {
        let init = random_state(&mut rng);
        let traj = integrate(&spec, &init, &[0.0, t - h, t, t + h], TIGHT).unwrap();
        let st = traj.states();
        let hs = build_hamiltonian(&spec.coeffs_at(t).unwrap(), &basis).unwrap();
        let db = (invariant_matrix(&basis, &st[3]) - invariant_matrix(&basis, &st[1])).mapv(|z| z / (2.0 * h));
        let lhs = db.mapv(|z| z * Complex64::new(0.0, 1.0)) + commutator(&invariant_matrix(&basis, &st[2]), &hs);
        assert!(max_abs_diff_block(&lhs, &CMatrix::zeros((dim, dim)), 16) < 1e-4);
    }
}

#[test]
fn moments_match_dense_quadratures() {
    let basis = TruncatedBasis::new(1.3, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..5 {
        let st = random_state(&mut rng);
        let (q, p) = heisenberg_qp(&st).unwrap();
        let (qm, pm) = (basis.quadrature(&q), basis.quadrature(&p));
        for n in [0, 1, 4, 10] {
            let mom = number_state_moments(&st, 1.3, n).unwrap();
            let col = |m: &CMatrix<f64>| m.column(n).to_owned();
            let (qn, pn) = (col(&qm), col(&pm));
            let q_mean = qn[n].re;
            let p_mean = pn[n].re;
            let q2: f64 = qn.iter().map(|z| z.norm_sqr()).sum();
            let p2: f64 = pn.iter().map(|z| z.norm_sqr()).sum();
            assert!((mom.q_mean - q_mean).abs() < 1e-12);
            assert!((mom.p_mean - p_mean).abs() < 1e-12);
            assert!((mom.q_var - (q2 - q_mean * q_mean)).abs() < 1e-10);
            assert!((mom.p_var - (p2 - p_mean * p_mean)).abs() < 1e-10);
        }
    }
}
