use hdlss_core::bayes::estimate_bayes_risk;
use hdlss_core::separability::estimate_separability;
use hdlss_core::{BlockPartition, DissimilaritySpec, ExampleId, ExampleSpec, GammaKind, PhiKind};

const G1: DissimilaritySpec = DissimilaritySpec::new(GammaKind::OneMinusExpNeg, PhiKind::Identity);

/// Exact `h̃` for the compound-symmetry blocks: for `W = U − V ~ N(0, S)` on a
/// block of ten, `E exp(−‖W‖²/10) = det(I + S/5)^{−1/2}`, and `S` has one
/// eigenvalue `2 + 9c` and nine equal to `2 − c` with `c = ρ + ρ′`.
fn block_h(rho_a: f64, rho_b: f64) -> f64 {
    let c = rho_a + rho_b;
    1.0 - ((1.0 + 0.2 * (2.0 + 9.0 * c)) * (1.0 + 0.2 * (2.0 - c)).powi(9)).powf(-0.5)
}

fn constants(h11: f64, h22: f64, h12: f64, n1: f64, n2: f64) -> [f64; 3] {
    let n = n1 + n2;
    let (g1, g2) = ((h12 - h11).abs(), (h12 - h22).abs());
    [
        h12 - (h11 + h22) / 2.0,
        n1 / (n - 1.0) * g1 + (n2 - 1.0) / (n - 1.0) * g2,
        (n1 - 1.0) / (n - 1.0) * g1 + n2 / (n - 1.0) * g2,
    ]
}

#[test]
fn block_gaussian_constants_match_closed_form() {
    let exact = constants(block_h(0.3, 0.3), block_h(0.7, 0.7), block_h(0.3, 0.7), 50.0, 50.0);
    let ex = ExampleSpec::new(ExampleId::Ex2, 200).unwrap();
    let part = ex.true_blocks().unwrap();
    let e = estimate_separability(&ex, G1, &part, 50, 50, 40_000, 11).unwrap();
    let got = [e.xi_12, e.tau_12, e.tau_21];
    let se = [e.std_errors.xi_12, e.std_errors.tau_12, e.std_errors.tau_21];
    for i in 0..3 {
        assert!((got[i] - exact[i]).abs() <= 4.0 * se[i], "{i}: {} vs {}", got[i], exact[i]);
    }
}

#[test]
fn cauchy_constants_match_quadrature() {
    // h̃ values from adaptive quadrature of E[1 − exp(−W²)] for the Cauchy differences
    let exact = constants(0.7446043236894943, 0.6784145835456825, 0.7439101641139189, 50.0, 25.0);
    let ex = ExampleSpec::new(ExampleId::Ex4, 100).unwrap();
    let part = BlockPartition::singletons(100);
    let e = estimate_separability(&ex, G1, &part, 50, 25, 40_000, 12).unwrap();
    let got = [e.xi_12, e.tau_12, e.tau_21];
    let se = [e.std_errors.xi_12, e.std_errors.tau_12, e.std_errors.tau_21];
    for i in 0..3 {
        assert!((got[i] - exact[i]).abs() <= 4.0 * se[i], "{i}: {} vs {}", got[i], exact[i]);
    }
}

#[test]
fn energy_sign_and_positive_tau() {
    for id in [ExampleId::Ex1, ExampleId::Ex2, ExampleId::Ex3, ExampleId::Ex4, ExampleId::Ex5] {
        let ex = ExampleSpec::new(id, 20).unwrap();
        let part = ex.true_blocks().unwrap_or_else(|| BlockPartition::contiguous(20, 5).unwrap());
        for gamma in GammaKind::GENERALIZED {
            for phi in PhiKind::ALL {
                let [n1, n2] = ex.default_train_sizes();
                let e = estimate_separability(&ex, DissimilaritySpec::new(gamma, phi), &part, n1, n2, 4_000, 3).unwrap();
                assert!(e.xi_12 >= -3.0 * e.std_errors.xi_12, "{id} {gamma} {phi}: {e:?}");
                if e.xi_12 > 5.0 * e.std_errors.xi_12 {
                    assert!(e.tau_12 > 0.0 && e.tau_21 > 0.0);
                }
            }
        }
    }
}

#[test]
fn one_dimensional_bayes_risk_matches_quadrature() {
    // 0.5·∫min(f₁, f₂), integrated between the density crossings
    for (id, exact) in [(ExampleId::Ex1, 0.4563798817913946), (ExampleId::Ex4, 0.3637020127059886)] {
        let ex = ExampleSpec::new(id, 1).unwrap();
        let b = estimate_bayes_risk(&ex, 200_000, 21).unwrap();
        assert!((b.risk - exact).abs() <= 4.0 * b.std_error, "{id}: {b:?}");
    }
}

#[test]
fn cauchy_bayes_risk_regression() {
    let ex = ExampleSpec::new(ExampleId::Ex4, 100).unwrap();
    let b = estimate_bayes_risk(&ex, 1_000_000, 0).unwrap();
    assert_eq!(b.risk, 0.000981);
    assert!((b.std_error - 3.1305564586455684e-5).abs() < 1e-15);
}

#[test]
fn bayes_risk_shrinks_with_dimension() {
    for id in [ExampleId::Ex1, ExampleId::Ex2, ExampleId::Ex3, ExampleId::Ex5] {
        let small = estimate_bayes_risk(&ExampleSpec::new(id, 10).unwrap(), 20_000, 4).unwrap();
        let large = estimate_bayes_risk(&ExampleSpec::new(id, 100).unwrap(), 20_000, 4).unwrap();
        assert!(large.risk < small.risk, "{id}: {small:?} {large:?}");
    }
}

#[test]
fn equal_average_variances() {
    for id in [ExampleId::Ex1, ExampleId::Ex2, ExampleId::Ex3, ExampleId::Ex5] {
        let ex = ExampleSpec::new(id, 40).unwrap();
        let a: f64 = ex.covariance_diagonal(0).unwrap().iter().sum();
        let b: f64 = ex.covariance_diagonal(1).unwrap().iter().sum();
        assert!((a - b).abs() < 1e-9, "{id}");
    }
}

#[test]
fn generation_is_seed_determined() {
    for id in ExampleId::ALL {
        let ex = ExampleSpec::new(id, 30).unwrap();
        for class in 0..2 {
            let a = ex.generate(class, 6, 99).unwrap();
            assert_eq!(a, ex.generate(class, 6, 99).unwrap());
            assert_ne!(a, ex.generate(class, 6, 98).unwrap());
        }
    }
}
