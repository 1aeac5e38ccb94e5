use hartree_core::corpus::SampleFunction;
use hartree_core::grid::riesz_convolve;
use hartree_core::norms::{sobolev_hs, weighted_lr, WeightedNormSpec};
use hartree_core::propagator::evolve_free;
use hartree_core::rational::{ExtRational, Rational};
use hartree_core::{Field, Grid};
use num_complex::Complex64;
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = SampleFunction> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.7..1.2f64, -1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(
        |(cx, cy, w, k, phase)| SampleFunction {
            momentum: vec![k, -k / 2.0],
            phase,
            ..SampleFunction::gaussian(vec![cx, cy], w)
        },
    )
}

fn grid() -> Grid {
    Grid::new(2, 128, 12.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn free_flow_is_linear_and_unitary(f in sample(), g in sample(), t in -1.0..1.0f64, a in -2.0..2.0f64) {
        let (u, v) = (f.sample(grid()).unwrap(), g.sample(grid()).unwrap());
        let c = Complex64::new(a, 0.5);
        let lhs = evolve_free(&u.combine(c, &v, Complex64::new(1.0, 0.0)).unwrap(), t).unwrap();
        let rhs = evolve_free(&u, t).unwrap().combine(c, &evolve_free(&v, t).unwrap(), Complex64::new(1.0, 0.0)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().l2_norm() <= 1e-12 * rhs.l2_norm().max(1.0));
        let eu = evolve_free(&u, t).unwrap();
        prop_assert!((eu.l2_norm() / u.l2_norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn riesz_is_linear(f in sample(), g in sample(), alpha in 0.2..1.8f64) {
        let (u, v) = (f.sample(grid()).unwrap(), g.sample(grid()).unwrap());
        let sum = riesz_convolve(&u.add(&v).unwrap(), alpha).unwrap();
        let parts = riesz_convolve(&u, alpha).unwrap().add(&riesz_convolve(&v, alpha).unwrap()).unwrap();
        prop_assert!(sum.sub(&parts).unwrap().sup_norm() <= 1e-12 * parts.sup_norm());
    }

    /// `‖f(δ·)‖_{L^r(|x|^{−rγ})} = δ^{γ − n/r} ‖f‖_{L^r(|x|^{−rγ})}`.
    #[test]
    fn weighted_norm_dilation_covariance(f in sample(), delta in 0.6..1.6f64, r in 1..4i64, g in 0.0..0.5f64) {
        let grid = Grid::new(2, 256, 16.0).unwrap();
        let spec = WeightedNormSpec::new(ExtRational::Finite(Rational::integer(r)), g);
        let base = weighted_lr(&f.sample(grid).unwrap(), &spec).unwrap().expect_finite("base").unwrap();
        let dilated = weighted_lr(&f.dilate(delta).sample(grid).unwrap(), &spec).unwrap().expect_finite("dilated").unwrap();
        let expected = base * delta.powf(g - 2.0 / r as f64);
        prop_assert!((dilated / expected - 1.0).abs() <= 1e-3, "{} vs {}", dilated, expected);
    }

    #[test]
    fn norms_are_homogeneous(f in sample(), c in 0.1..10.0f64, s in -0.4..1.5f64) {
        let u = f.sample(grid()).unwrap();
        let cu = u.scale(Complex64::new(0.0, c));
        prop_assert!((sobolev_hs(&cu, s).unwrap() / sobolev_hs(&u, s).unwrap() / c - 1.0).abs() <= 1e-12);
        let spec = WeightedNormSpec::new(ExtRational::Finite(Rational::frac(5, 2)), 0.3);
        let a = weighted_lr(&cu, &spec).unwrap().expect_finite("a").unwrap();
        let b = weighted_lr(&u, &spec).unwrap().expect_finite("b").unwrap();
        prop_assert!((a / b / c - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sobolev_of_a_plane_wave(k1 in -20i64..20, k2 in -20i64..20, s in -1.0..2.0f64) {
        prop_assume!(k1 != 0 || k2 != 0);
        let g = grid();
        let dk = g.frequency_step();
        let xi = [k1 as f64 * dk, k2 as f64 * dk];
        let u = Field::from_fn(g, |x| Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1]));
        let ratio = sobolev_hs(&u, s).unwrap() / sobolev_hs(&u, 0.0).unwrap();
        let expected = (xi[0].hypot(xi[1])).powf(s);
        prop_assert!((ratio / expected - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn unweighted_l2_matches_plancherel() {
    let f = SampleFunction::gaussian(vec![0.2, 0.1], 1.0).sample(grid()).unwrap();
    let spec = WeightedNormSpec::lebesgue(ExtRational::Finite(Rational::integer(2)));
    let physical = weighted_lr(&f, &spec).unwrap().expect_finite("l2").unwrap();
    let spectral = sobolev_hs(&f, 0.0).unwrap();
    assert!((physical / spectral - 1.0).abs() <= 1e-12);
}
