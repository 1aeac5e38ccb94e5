use hartree_core::admissibility::{sharpness_region_classify, SharpnessRegion};
use hartree_core::norms::TimeSlab;
use hartree_core::sharpness::*;
use hartree_core::{ExtRational, Grid, Rational};

fn q(a: i64, b: i64) -> Rational {
    Rational::frac(a, b)
}

#[test]
fn critical_weight_diverges() {
    let packet = build_annulus_packet(&Grid::new(2, 256, 16.0).unwrap()).unwrap();
    let scan = weight_divergence_scan(&packet, 2.0, 1.0, &[256, 512, 1024, 2048], 0.0, 0.0).unwrap();
    assert_eq!(scan.verdict, DivergenceVerdict::Diverging);
    assert!(scan.growth.iter().all(|&g| g >= 1.2), "{:?}", scan.growth);
    assert!(scan.rows.windows(2).all(|w| w[1].norm > w[0].norm));
    assert_eq!(expected_divergence_verdict(2, &q(1, 2), &q(1, 1)), scan.verdict);
}

/// `∫_{|x|<1/8} |x|^{-2} |u|²` grows by `2π log 2 · |u(0)|²` per halving of `h`.
#[test]
fn logarithmic_growth_rate() {
    let packet = build_annulus_packet(&Grid::new(2, 256, 16.0).unwrap()).unwrap();
    let scan = weight_divergence_scan(&packet, 2.0, 1.0, &[2048, 4096, 8192, 16384], 0.0, 0.0).unwrap();
    let u0 = packet.spectrum.eval(&[0.0, 0.0], 0.0).norm();
    let step = 2.0 * std::f64::consts::PI * 2f64.ln() * u0 * u0;
    for w in scan.rows.windows(2) {
        let inc = w[1].integral - w[0].integral;
        assert!((inc / step - 1.0).abs() < 0.03, "{inc} vs {step}");
    }
}

#[test]
fn integrable_weight_converges() {
    let packet = build_annulus_packet(&Grid::new(2, 256, 16.0).unwrap()).unwrap();
    let scan = weight_divergence_scan(&packet, 2.0, 0.25, &[4096, 8192, 16384, 32768], 0.0, 0.0).unwrap();
    assert_eq!(scan.verdict, DivergenceVerdict::Converging);
    assert!(*scan.cauchy.last().unwrap() <= 0.01);
    assert_eq!(expected_divergence_verdict(2, &q(1, 2), &q(1, 4)), DivergenceVerdict::Converging);
    assert_eq!(sharpness_region_classify(2, &Rational::zero(), &q(1, 2), &q(1, 1)), SharpnessRegion::ViolatesWeight);
}

#[test]
fn scan_preconditions() {
    let packet = build_annulus_packet(&Grid::new(2, 256, 16.0).unwrap()).unwrap();
    assert!(weight_divergence_scan(&packet, 2.0, 1.0, &[256, 512], 0.0, 0.0).is_err());
    assert!(weight_divergence_scan(&packet, 2.0, 1.0, &[512, 256, 1024], 0.0, 0.0).is_err());
    assert!(weight_divergence_scan(&packet, 0.5, 1.0, &[256, 512, 1024], 0.0, 0.0).is_err());
}

fn carrier_setup() -> (Grid, TimeSlab) {
    let grid = Grid::new(2, 4096, 40.0).unwrap();
    let slab = TimeSlab::uniform(-0.125, 0.125, 513, ExtRational::Finite(q(2, 1))).unwrap();
    (grid, slab)
}

#[test]
fn carrier_growth_matches_exponent() {
    let (grid, slab) = carrier_setup();
    let ks = [8.0, 16.0, 32.0, 64.0];
    let r = ExtRational::Finite(q(16, 3));
    let scan = carrier_growth_scan(&grid, &ks, -0.25, 0.125, &r, &slab, 8).unwrap();
    assert!((scan.slope - scan.target).abs() <= 0.1, "{} vs {}", scan.slope, scan.target);
    for row in &scan.rows {
        assert!((row.mass - 1.0).abs() < 1e-6);
    }
    let c: Vec<f64> = scan.rows.iter().map(|r| r.lower_bound).collect();
    let spread = c.iter().cloned().fold(f64::MIN, f64::max) / c.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1.5, "{c:?}");

    // More negative s + γ gives a steeper slope.
    let steeper = carrier_growth_scan(&grid, &ks, -0.25, 0.0625, &ExtRational::Finite(q(32, 5)), &slab, 8).unwrap();
    assert!(steeper.slope > scan.slope);
}

#[test]
fn carrier_preconditions() {
    let (grid, slab) = carrier_setup();
    let r = ExtRational::Finite(q(2, 1));
    assert!(carrier_growth_scan(&grid, &[8.0, 16.0], 0.25, -0.5, &r, &slab, 8).is_err());
    assert!(carrier_growth_scan(&grid, &[8.0, 16.0], -0.25, 0.5, &r, &slab, 8).is_err());
    let tight = Grid::new(2, 256, 40.0).unwrap();
    assert!(carrier_growth_scan(&tight, &[8.0, 64.0], -0.25, 0.125, &r, &slab, 8).is_err());
    let small = Grid::new(2, 4096, 20.0).unwrap();
    assert!(carrier_growth_scan(&small, &[8.0, 64.0], -0.25, 0.125, &r, &slab, 8).is_err());
}
