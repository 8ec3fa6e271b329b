use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{round_product_potential, LogSumExp, PotentialField};

fn fact(n: i64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn random_diagonal(rng: &mut ChaCha8Rng, b: &crate::geometry::LatticeSectionBasis) -> HermitianForm {
    let d: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0f64).exp()).collect();
    HermitianForm::from_diagonal(b, &d).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, b: &crate::geometry::LatticeSectionBasis) -> HermitianForm {
    let n = b.len();
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
    HermitianForm::new(b, &a * a.adjoint() + DMatrix::identity(n, n)).unwrap()
}

fn trace_error(pr: &Problem, b: &crate::geometry::LatticeSectionBasis, h: &HermitianForm) -> f64 {
    let g = t_map(pr, b, h).unwrap();
    (h.trace_against(g.matrix()).unwrap() / b.len() as f64 - 1.0).abs()
}

#[test]
fn fs_potential_is_scale_invariant_up_to_a_constant() {
    let pr = Problem::preset("P2-O1-O1", 16).unwrap();
    let b = pr.basis(3).unwrap();
    let h = random_diagonal(&mut ChaCha8Rng::seed_from_u64(1), &b);
    let u = fs_map(&pr, &b, &h).unwrap();
    let v = fs_map(&pr, &b, &h.scaled(5.0).unwrap()).unwrap();
    for x in [[0.3, -1.2], [4.0, 2.0], [-7.0, 0.5]] {
        let (su, sv) = (u.eval(x), v.eval(x));
        assert!((su.value - sv.value - 5f64.ln() / 3.0).abs() < 1e-12);
        assert!((su.hess.a - sv.hess.a).abs() < 1e-12);
        assert!((su.hess.b - sv.hess.b).abs() < 1e-12);
        assert!((su.hess.cr - sv.hess.cr).abs() < 1e-12);
    }
}

#[test]
fn bergman_potential_complex_hessian_matches_finite_differences() {
    let pr = Problem::preset("P2-O1-O1", 8).unwrap();
    let b = pr.basis(2).unwrap();
    let h = random_hermitian(&mut ChaCha8Rng::seed_from_u64(2), &b);
    let u = fs_map(&pr, &b, &h).unwrap();
    assert!(!u.is_invariant());
    let (x, th) = ([0.4, -0.3], [0.7, 1.9]);
    let f = |dx: [f64; 2], dt: [f64; 2]| u.eval_at([x[0] + dx[0], x[1] + dx[1]], [th[0] + dt[0], th[1] + dt[1]]).value;
    let e = 1e-4;
    let unit = |i: usize, s: f64| if i == 0 { [s, 0.0] } else { [0.0, s] };
    let z = [0.0; 2];
    // mixed second derivative in the (x or θ, x or θ) directions
    let d2 = |pi: [f64; 2], pj: [f64; 2], ti: [f64; 2], tj: [f64; 2]| {
        let add = |a: [f64; 2], b: [f64; 2]| [a[0] + b[0], a[1] + b[1]];
        let neg = |a: [f64; 2]| [-a[0], -a[1]];
        (f(add(pi, pj), add(ti, tj)) - f(add(pi, neg(pj)), add(ti, neg(tj))) - f(add(neg(pi), pj), add(neg(ti), tj))
            + f(add(neg(pi), neg(pj)), add(neg(ti), neg(tj))))
            / (4.0 * e * e)
    };
    let xx = |i: usize, j: usize| d2(unit(i, e), unit(j, e), z, z);
    let tt = |i: usize, j: usize| d2(z, z, unit(i, e), unit(j, e));
    let xt = |i: usize, j: usize| d2(unit(i, e), z, z, unit(j, e));
    let s = u.eval_at(x, th);
    assert!((s.hess.a - (xx(0, 0) + tt(0, 0) / 4.0)).abs() < 1e-6, "{:?}", s.hess);
    assert!((s.hess.b - (xx(1, 1) + tt(1, 1) / 4.0)).abs() < 1e-6);
    assert!((s.hess.cr - (xx(0, 1) + tt(0, 1) / 4.0)).abs() < 1e-6);
    // ∂_{w₁}∂_{w̄₂} with w = x/2 + iθ
    assert!((s.hess.ci - 0.5 * (xt(0, 1) - xt(1, 0))).abs() < 1e-6, "{} vs {}", s.hess.ci, 0.5 * (xt(0, 1) - xt(1, 0)));
}

#[test]
fn trace_identity_for_invariant_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["P1-O1-O2", "P2-O1-O2", "P1xP1-O11-O21", "F1-AC-AC"] {
        let pr = Problem::preset_default(name).unwrap();
        for k in [1, 3, 6] {
            let b = pr.basis(k).unwrap();
            let h = random_diagonal(&mut rng, &b);
            assert!(trace_error(&pr, &b, &h) < 1e-12, "{name} k={k}");
        }
    }
}

#[test]
fn trace_identity_for_general_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (name, k) in [("P1-O1-O1", 3), ("P2-O1-O1", 1), ("P2-O1-O2", 2), ("P1xP1-O11-O11", 1)] {
        let pr = Problem::preset(name, 16).unwrap();
        let b = pr.basis(k).unwrap();
        let h = random_hermitian(&mut rng, &b);
        let err = trace_error(&pr, &b, &h);
        assert!(err < 1e-7, "{name} k={k}: {err}");
    }
}

#[test]
fn coarse_quadrature_breaks_the_trace_identity() {
    let pr = Problem::preset("P1xP1-O11-O11", crate::geometry::MIN_ACCURATE_RESOLUTION / 2).unwrap();
    let b = pr.basis(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let worst = (0..20).map(|_| trace_error(&pr, &b, &random_diagonal(&mut rng, &b))).fold(0.0, f64::max);
    assert!(worst > 1e-6, "{worst}");
}

#[test]
fn invariant_inputs_give_diagonal_outputs() {
    let pr = Problem::preset_default("F1-AC-AC").unwrap();
    let b = pr.basis(3).unwrap();
    let g = t_map(&pr, &b, &random_diagonal(&mut ChaCha8Rng::seed_from_u64(6), &b)).unwrap();
    assert!(g.is_diagonal());
    let u = round_product_potential(&[1, 1]);
    let pr = Problem::preset_default("P1xP1-O11-O11").unwrap();
    assert!(hilb_map(&pr, &pr.basis(2).unwrap(), &u).unwrap().is_diagonal());
}

#[test]
fn mu0_is_traceless() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pr = Problem::preset("P2-O1-O1", 16).unwrap();
    let b = pr.basis(1).unwrap();
    for h in [random_diagonal(&mut rng, &b), random_hermitian(&mut rng, &b)] {
        let m = moment_map_mu0(&pr, &b, &h).unwrap();
        assert!(m.mu0.trace().norm() < 1e-14 * m.frobenius().max(1.0));
        assert!(m.frobenius() > 1e-3);
    }
}

#[test]
fn mu0_is_equivariant_under_the_torus() {
    let pr = Problem::preset("P2-O1-O1", 16).unwrap();
    let b = pr.basis(2).unwrap();
    let h = random_hermitian(&mut ChaCha8Rng::seed_from_u64(8), &b);
    let th = [0.9, -2.1];
    let u = DMatrix::from_fn(b.len(), b.len(), |i, j| {
        if i == j {
            let p = b.points[i];
            Complex64::from_polar(1.0, p[0] as f64 * th[0] + p[1] as f64 * th[1])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let h2 = HermitianForm::new(&b, &u * h.matrix() * u.adjoint()).unwrap();
    let m1 = moment_map_mu0(&pr, &b, &h).unwrap().mu0;
    let m2 = moment_map_mu0(&pr, &b, &h2).unwrap().mu0;
    let diff = (&u * &m1 * u.adjoint() - &m2).norm();
    // rotations off the angular grid are equivariant only to quadrature accuracy
    assert!(diff < 1e-6 * m1.norm(), "{diff}");
}

#[test]
fn t_map_commutes_with_lattice_symmetry() {
    // the coordinate swap is a symmetry of (P1xP1, O(1,1), O(1,1))
    let pr = Problem::preset_default("P1xP1-O11-O11").unwrap();
    let b = pr.basis(3).unwrap();
    let h = random_diagonal(&mut ChaCha8Rng::seed_from_u64(9), &b);
    let d = h.diagonal_entries();
    let swap = |i: usize| b.index_of([b.points[i][1], b.points[i][0]]).unwrap();
    let hs = HermitianForm::from_diagonal(&b, &(0..b.len()).map(|i| d[swap(i)]).collect::<Vec<_>>()).unwrap();
    let (g, gs) = (t_map(&pr, &b, &h).unwrap().diagonal_entries(), t_map(&pr, &b, &hs).unwrap().diagonal_entries());
    for i in 0..b.len() {
        assert!((gs[i] / g[swap(i)] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn projective_plane_balances_to_the_multinomial_form() {
    for k in [3u32, 4] {
        let pr = Problem::preset_default("P2-O1-O1").unwrap();
        let b = pr.basis(k).unwrap();
        let out = iterate_to_balance(&pr, &b, &HermitianForm::identity(&b), 1e-10, 500).unwrap();
        assert!(out.converged);
        assert!(out.max_increase() <= 1e-12);
        let d: Vec<f64> =
            b.points.iter().map(|a| fact(a[0]) * fact(a[1]) * fact(k as i64 - a[0] - a[1])).collect();
        let oracle = HermitianForm::from_diagonal(&b, &d).unwrap().det_normalised().unwrap();
        assert!(metric_distance(&out.h, &oracle, k).unwrap() < 1e-8);
        assert!(out.h.log_det().unwrap().abs() < 1e-10);
    }
}

#[test]
fn balanced_form_has_the_simplex_symmetry() {
    let pr = Problem::preset_default("P2-O1-O2").unwrap();
    let k = 4;
    let b = pr.basis(k).unwrap();
    let out = iterate_to_balance(&pr, &b, &HermitianForm::identity(&b), 1e-10, 500).unwrap();
    let d = out.h.diagonal_entries();
    let ki = k as i64;
    let maps: [fn([i64; 3]) -> [i64; 3]; 2] = [|a| [a[1], a[0], a[2]], |a| [a[1], a[2], a[0]]];
    for m in maps {
        for (i, p) in b.points.iter().enumerate() {
            let q = m([p[0], p[1], ki - p[0] - p[1]]);
            let j = b.index_of([q[0], q[1]]).unwrap();
            assert!((d[i] / d[j] - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn symmetric_problem_is_balanced_at_identity_for_k1() {
    let pr = Problem::preset_default("P1xP1-O11-O11").unwrap();
    let b = pr.basis(1).unwrap();
    let out = iterate_to_balance(&pr, &b, &HermitianForm::identity(&b), 1e-10, 10).unwrap();
    assert!(out.converged);
    assert_eq!(out.log.len(), 1);
}

#[test]
fn distinct_starts_reach_the_same_balanced_form() {
    let pr = Problem::preset_default("P1xP1-O11-O21").unwrap();
    let b = pr.basis(3).unwrap();
    let a = iterate_to_balance(&pr, &b, &HermitianForm::identity(&b), 1e-10, 500).unwrap();
    let h0 = random_diagonal(&mut ChaCha8Rng::seed_from_u64(10), &b);
    let c = iterate_to_balance(&pr, &b, &h0, 1e-10, 500).unwrap();
    assert!(a.converged && c.converged);
    let d = (a.h.matrix() - c.h.matrix()).norm();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn iteration_reports_non_convergence() {
    let pr = Problem::preset("P2-O1-O1", 16).unwrap();
    let b = pr.basis(3).unwrap();
    let out = iterate_to_balance(&pr, &b, &HermitianForm::identity(&b), 1e-12, 2).unwrap();
    assert!(!out.converged);
    // initial form plus one record per step
    assert_eq!(out.log.len(), 3);
    assert!(!divergence_diagnosis(&out).is_empty());
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("step,mu0_frob,mu0_op,i_mu0,det_h\n"), "{text}");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn metric_distance_properties() {
    let pr = Problem::preset("P2-O1-O1", 8).unwrap();
    let b = pr.basis(3).unwrap();
    let id = HermitianForm::identity(&b);
    let two = id.scaled(2.0).unwrap();
    assert!((metric_distance(&id, &two, 3).unwrap() - (b.len() as f64).sqrt() / 3.0).abs() < 1e-14);
    assert_eq!(metric_distance(&id, &id, 3).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let (x, y, z) = (random_hermitian(&mut rng, &b), random_hermitian(&mut rng, &b), random_hermitian(&mut rng, &b));
        let d = |p: &HermitianForm, q: &HermitianForm| metric_distance(p, q, 3).unwrap();
        assert_eq!(d(&x, &y), d(&y, &x));
        assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-14);
    }
}

#[test]
fn hermitian_json_round_trip_checks_basis() {
    let pr = Problem::preset("P2-O1-O1", 8).unwrap();
    let b = pr.basis(2).unwrap();
    let h = random_hermitian(&mut ChaCha8Rng::seed_from_u64(12), &b);
    let text = serde_json::to_string(&h.to_record()).unwrap();
    let back = HermitianForm::from_record(&serde_json::from_str(&text).unwrap()).unwrap();
    assert!((back.matrix() - h.matrix()).norm() < 1e-15);
    assert!(back.check_basis(&b).is_ok());
    assert!(back.check_basis(&pr.basis(3).unwrap()).is_err());
}

#[test]
fn non_positive_forms_are_rejected() {
    let pr = Problem::preset("P2-O1-O1", 8).unwrap();
    let b = pr.basis(1).unwrap();
    assert!(HermitianForm::from_diagonal(&b, &[1.0, -1.0, 1.0]).is_err());
    let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, if i < j { 1.0 } else { 0.0 }));
    assert!(HermitianForm::new(&b, m).is_err());
}

#[test]
fn density_of_states_approaches_the_critical_ratio() {
    let pr = Problem::preset_default("P1xP1-O11-O11").unwrap();
    // the round metric has constant density at every level, so use a non-round one
    let exps = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let u = PotentialField::LogSumExp(LogSumExp::new(2, exps, vec![0.0, 0.0, 0.0, 5f64.ln()], 1.0, 0.0).unwrap());
    let rows = bergman_check(&pr, &u, &[2, 4, 8]).unwrap();
    assert!(rows[0].deviation > rows[1].deviation && rows[1].deviation > rows[2].deviation, "{rows:?}");
}

#[test]
fn density_of_states_integrates_to_the_volume() {
    let pr = Problem::preset_default("P2-O1-O2").unwrap();
    let u = crate::geometry::reference_potential(&pr.polytope);
    let k = 3;
    let b = pr.basis(k).unwrap();
    let dens = BergmanDensity::new(hilb_map(&pr, &b, &u).unwrap(), b.clone()).unwrap();
    let total: f64 = pr
        .rule
        .nodes
        .iter()
        .zip(&pr.rule.weights)
        .enumerate()
        .map(|(i, (x, w))| w * dens.weighted(*x, &u) * pr.mixed_density(i, &u.eval(*x).hess) / pr.gamma)
        .sum();
    assert!((total - b.len() as f64).abs() < 1e-10 * b.len() as f64);
}

#[test]
fn quantised_laplacian_is_linear_and_reproduces_the_density() {
    let pr = Problem::preset_default("P1xP1-O11-O11").unwrap();
    let u = round_product_potential(&[1, 1]);
    let omega = |x: [f64; 2]| u.eval(x).hess.det(2) * pr.rule.c_vol;
    let f = |x: [f64; 2]| (-(x[0] * x[0] + x[1] * x[1]) / 8.0).exp();
    let g = |x: [f64; 2]| x[0].tanh();
    let qf = qk_operator(&pr, &u, &omega, 3, &f).unwrap();
    let qg = qk_operator(&pr, &u, &omega, 3, &g).unwrap();
    let qs = qk_operator(&pr, &u, &omega, 3, &|x| 2.0 * f(x) - 3.0 * g(x)).unwrap();
    for i in 0..qf.values.len() {
        assert!((qs.values[i] - 2.0 * qf.values[i] + 3.0 * qg.values[i]).abs() < 1e-12);
    }
    let one = qk_operator(&pr, &u, &omega, 3, &|_| 1.0).unwrap();
    let b = pr.basis(3).unwrap();
    // χ is the round form here and γ = 1, so Hilb_χ(u) is the Gram for Ω = ωⁿ
    let dens = BergmanDensity::new(hilb_map(&pr, &b, &u).unwrap(), b.clone()).unwrap();
    for (i, x) in pr.rule.nodes.iter().enumerate().step_by(37) {
        let expect = pr.volume / b.len() as f64 * dens.weighted(*x, &u);
        assert!((one.values[i] / expect - 1.0).abs() < 1e-10);
    }
}

#[test]
fn quantised_laplacian_deviation_shrinks_with_k() {
    let pr = Problem::preset_default("P1xP1-O11-O11").unwrap();
    let u = round_product_potential(&[1, 1]);
    let omega = |x: [f64; 2]| u.eval(x).hess.det(2) * pr.rule.c_vol;
    let bump = |x: [f64; 2]| (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp();
    let d3 = qk_operator(&pr, &u, &omega, 3, &bump).unwrap().deviation;
    let d6 = qk_operator(&pr, &u, &omega, 6, &bump).unwrap().deviation;
    assert!(d3 > d6, "{d3} vs {d6}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn t_map_preserves_positivity_and_the_trace(seed in any::<u64>(), k in 1u32..5) {
        let pr = Problem::preset("F1-AC-AC", 24).unwrap();
        let b = pr.basis(k).unwrap();
        let h = random_diagonal(&mut ChaCha8Rng::seed_from_u64(seed), &b);
        let g = t_map(&pr, &b, &h).unwrap();
        prop_assert!(g.cholesky().is_ok());
        prop_assert!(g.is_diagonal());
        prop_assert!((h.trace_against(g.matrix()).unwrap() / b.len() as f64 - 1.0).abs() < 1e-10);
    }
}
