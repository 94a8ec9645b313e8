use chaoslab::chaos::ChaosVar;
use chaoslab::distances::{kolmogorov, kolmogorov_two_sample, EmpiricalSample};
use chaoslab::free::{catalan, free_fourth, free_moment, FreeChaosVar};
use chaoslab::gaussproc::fbm_rho;
use chaoslab::hermite::{hermite_eval, GaussHermite, HermiteSeries};
use chaoslab::kernels::Kernel;
use chaoslab::numeric::{binom, factorial, normal_cdf};
use chaoslab::stats::{cumulants_from_moments, moments_from_cumulants};
use proptest::prelude::*;

fn kernel_strategy(order: usize, dim: usize) -> impl Strategy<Value = Kernel> {
    prop::collection::vec(-1.0f64..1.0, dim.pow(order as u32))
        .prop_map(move |c| Kernel::from_coeffs(order, dim, c).unwrap())
}

fn symmetric_kernel(order: usize, dim: usize) -> impl Strategy<Value = Kernel> {
    kernel_strategy(order, dim).prop_map(|k| k.symmetrize().unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_orthogonality(p in 0usize..12, q in 0usize..12) {
        let gh = GaussHermite::new(40);
        let e = gh.expect(|x| hermite_eval(p, x).unwrap() * hermite_eval(q, x).unwrap());
        let want = if p == q { factorial(q) } else { 0.0 };
        prop_assert!(close(e, want, 1e-9), "p={p} q={q}: {e} vs {want}");
    }

    #[test]
    fn hermite_derivative_matches_difference(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..8),
        x in -3.0f64..3.0,
    ) {
        let s = HermiteSeries::new(coeffs);
        let h = 1e-5;
        let fd = (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
        prop_assert!(close(s.derivative().eval(x), fd, 1e-6));
    }

    #[test]
    fn ou_semigroup_composes(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..8),
        s in 0.0f64..2.0,
        t in 0.0f64..2.0,
    ) {
        let f = HermiteSeries::new(coeffs);
        let a = f.ou_apply(s).unwrap().ou_apply(t).unwrap();
        let b = f.ou_apply(s + t).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!(close(*x, *y, 1e-13));
        }
    }

    #[test]
    fn symmetrize_is_idempotent_projection(k in kernel_strategy(3, 3)) {
        let s = k.symmetrize().unwrap();
        prop_assert!(s.is_symmetric());
        let ss = s.symmetrize().unwrap();
        for (a, b) in s.coeffs().iter().zip(ss.coeffs()) {
            prop_assert!(close(*a, *b, 1e-13));
        }
        prop_assert!(s.norm_sq() <= k.norm_sq() * (1.0 + 1e-12));
        // orthogonal projection: ⟨k, s⟩ = ‖s‖²
        prop_assert!(close(k.inner(&s).unwrap(), s.norm_sq(), 1e-12));
    }

    #[test]
    fn full_contraction_is_inner_product(f in kernel_strategy(2, 4), g in kernel_strategy(2, 4)) {
        let c = f.contract(&g, 2).unwrap();
        prop_assert!(close(c.as_scalar().unwrap(), f.inner(&g).unwrap(), 1e-12));
        let t = f.contract(&g, 0).unwrap();
        let u = f.tensor(&g).unwrap();
        prop_assert_eq!(t.coeffs(), u.coeffs());
    }

    #[test]
    fn mirror_adjoint_is_involution(k in kernel_strategy(3, 3)) {
        let back = k.mirror_adjoint().mirror_adjoint();
        prop_assert_eq!(back.coeffs(), k.coeffs());
    }

    /// `I_p(f)·I_q(g) = Σ_r r!·C(p,r)·C(q,r)·I_{p+q−2r}(f ⊗̃_r g)`, pointwise.
    #[test]
    fn product_formula(
        f in symmetric_kernel(2, 3),
        g in symmetric_kernel(2, 3),
        h in symmetric_kernel(1, 3),
        row in prop::collection::vec(-2.5f64..2.5, 3),
    ) {
        for (a, b) in [(&f, &g), (&f, &h), (&h, &h)] {
            let (p, q) = (a.order(), b.order());
            let lhs = ChaosVar::new(a.clone()).unwrap().sample(&row).unwrap()
                * ChaosVar::new(b.clone()).unwrap().sample(&row).unwrap();
            let mut rhs = 0.0;
            for r in 0..=p.min(q) {
                let c = a.contract(b, r).unwrap().symmetrize().unwrap();
                let term = match c.as_scalar() {
                    Some(v) => v,
                    None => ChaosVar::new(c).unwrap().sample(&row).unwrap(),
                };
                rhs += factorial(r) * binom(p, r) * binom(q, r) * term;
            }
            prop_assert!(close(lhs, rhs, 1e-10), "p={p} q={q}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn second_cumulant_is_q_factorial_norm(f in symmetric_kernel(3, 3)) {
        let v = ChaosVar::new(f.clone()).unwrap();
        prop_assert!(close(v.cumulant_exact(2).unwrap(), 6.0 * f.norm_sq(), 1e-12));
        prop_assert!(close(v.second_moment_exact(), 6.0 * f.norm_sq(), 1e-12));
        prop_assert!(v.cumulant_exact(1).unwrap() == 0.0);
    }

    #[test]
    fn spectral_and_diagram_cumulants_agree(f in symmetric_kernel(2, 4), s in 2usize..7) {
        let v = ChaosVar::new(f).unwrap();
        prop_assert!(close(v.cumulant_exact(s).unwrap(), v.spectral_cumulant_q2(s).unwrap(), 1e-9));
    }

    #[test]
    fn kappa4_is_non_negative(f in symmetric_kernel(3, 3)) {
        let v = ChaosVar::new(f).unwrap();
        prop_assert!(v.kappa4_exact().unwrap() >= -1e-12);
    }

    #[test]
    fn moments_cumulants_round_trip(kappa in prop::collection::vec(-2.0f64..2.0, 1..8)) {
        let mut k = vec![0.0];
        k.extend(kappa);
        let back = cumulants_from_moments(&moments_from_cumulants(&k));
        for (a, b) in k.iter().zip(&back).skip(1) {
            prop_assert!(close(*a, *b, 1e-10));
        }
    }

    #[test]
    fn free_fourth_matches_moment(k in kernel_strategy(2, 3)) {
        let m = k.add(&k.mirror_adjoint()).unwrap().scaled(0.5);
        let f = FreeChaosVar::new(m).unwrap();
        prop_assert!(close(free_moment(&f, 4).unwrap(), free_fourth(&f).unwrap(), 1e-10));
        prop_assert!(close(free_moment(&f, 2).unwrap(), f.second_moment(), 1e-12));
    }

    #[test]
    fn fbm_covariance_shape(h in 0.05f64..0.95, r in 1i64..500) {
        prop_assert_eq!(fbm_rho(h, 0).unwrap(), 1.0);
        prop_assert_eq!(fbm_rho(h, r).unwrap(), fbm_rho(h, -r).unwrap());
        let rho = fbm_rho(h, r).unwrap();
        prop_assert!(rho.abs() <= 1.0);
        // sign of the increment correlation follows 2H − 1
        prop_assert!(rho * (2.0 * h - 1.0) >= 0.0);
    }

    #[test]
    fn kolmogorov_distances_are_bounded_and_symmetric(
        a in prop::collection::vec(-3.0f64..3.0, 1..60),
        b in prop::collection::vec(-3.0f64..3.0, 1..60),
    ) {
        let sa = EmpiricalSample::new(a).unwrap();
        let sb = EmpiricalSample::new(b).unwrap();
        let d = kolmogorov(&sa, normal_cdf);
        prop_assert!((0.0..=1.0).contains(&d));
        let ab = kolmogorov_two_sample(&sa, &sb);
        prop_assert_eq!(ab, kolmogorov_two_sample(&sb, &sa));
        prop_assert_eq!(kolmogorov_two_sample(&sa, &sa), 0.0);
    }
}

#[test]
fn unit_free_kernel_gives_catalan_numbers() {
    let f = FreeChaosVar::new(Kernel::vector(vec![1.0]).unwrap()).unwrap();
    for k in 1..=10 {
        let want = if k % 2 == 0 {
            catalan(k / 2).unwrap() as f64
        } else {
            0.0
        };
        assert_eq!(free_moment(&f, k).unwrap(), want, "k={k}");
    }
}
