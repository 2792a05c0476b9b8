use maxcomm::verification::{
    build_corpus, estimate_operator_norm, fit_slope, verify_a1_consistency, verify_mean_split,
    verify_pointwise_domination, verify_restriction_identities, weighted_lp_norm, CorpusSizes, Member, OperatorTag,
};
use maxcomm::weights::power_weight;
use maxcomm::{CubeFamily, Error, Exponents, Grid, GridFunction, Weight};

#[test]
fn weighted_lp_norm_examples() {
    let g = Grid::unit(1, 4).unwrap();
    let one = GridFunction::constant(g, 1.0);
    let mu = Weight::unit(g);
    assert!((weighted_lp_norm(&one, 2.0, &mu).unwrap() - 1.0).abs() < 1e-15);
    let f = GridFunction::new(g, vec![2.0, 0.0, 0.0, 0.0]).unwrap();
    // (2^3 / 4)^(1/3)
    assert!((weighted_lp_norm(&f, 3.0, &mu).unwrap() - 2f64.cbrt()).abs() < 1e-15);
    let w = Weight::new(GridFunction::new(g, vec![4.0, 1.0, 1.0, 1.0]).unwrap()).unwrap();
    // (4 * 4 / 4)^(1/2)
    assert!((weighted_lp_norm(&f, 2.0, &w).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn constant_symbol_gives_zero_commutator_norms() {
    let g = Grid::unit(1, 16).unwrap();
    let fam = CubeFamily::all(g);
    let corpus = build_corpus(11, g, CorpusSizes::default()).unwrap();
    let b = GridFunction::constant(g, 2.5);
    let exps = Exponents::new(2.0, 0.25, 1).unwrap();
    let mu = Weight::unit(g);
    let est = estimate_operator_norm(OperatorTag::MaximalCommutator, &b, &corpus.functions, &exps, &mu, &fam).unwrap();
    assert_eq!(est.sup_ratio, 0.0);
    assert_eq!(est.n_samples, corpus.functions.len());
    // b M#f and M#(bf) are computed separately, so only rounding noise is left.
    let est = estimate_operator_norm(OperatorTag::CommutatorSharp, &b, &corpus.functions, &exps, &mu, &fam).unwrap();
    assert!(est.sup_ratio < 1e-12, "{}", est.sup_ratio);
}

#[test]
fn operator_norm_rejects_empty_input() {
    let g = Grid::unit(1, 8).unwrap();
    let fam = CubeFamily::all(g);
    let b = GridFunction::from_profile(g, |u| u[0]).unwrap();
    let exps = Exponents::new(2.0, 0.25, 1).unwrap();
    let mu = Weight::unit(g);
    let err = estimate_operator_norm(OperatorTag::MaximalCommutator, &b, &[], &exps, &mu, &fam).unwrap_err();
    assert!(matches!(err, Error::EmptyCorpus));
    let zero = [Member { name: "zero".into(), function: GridFunction::zeros(g) }];
    let err = estimate_operator_norm(OperatorTag::MaximalCommutator, &b, &zero, &exps, &mu, &fam).unwrap_err();
    assert!(matches!(err, Error::EmptyCorpus));
    let err = estimate_operator_norm(OperatorTag::FractionalMaximal, &b, &zero, &exps, &mu, &fam).unwrap_err();
    assert!(matches!(err, Error::InvalidExponents(_)));
}

#[test]
fn small_suites_pass_in_both_dimensions() {
    for g in [Grid::unit(1, 16).unwrap(), Grid::unit(2, 6).unwrap()] {
        let corpus = build_corpus(7, g, CorpusSizes { functions: 4, symbols: 3, weights: 3 }).unwrap();
        for fam in [CubeFamily::all(g), CubeFamily::dyadic(g)] {
            for report in [
                verify_restriction_identities(&corpus, &fam).unwrap(),
                verify_pointwise_domination(&corpus, &fam).unwrap(),
                verify_mean_split(&corpus, &fam).unwrap(),
                verify_a1_consistency(&corpus, &fam).unwrap(),
            ] {
                assert!(report.passed(), "{} on {:?}: {:?}", report.suite, g.shape(), report.worst);
                assert!(report.cases > 0);
            }
        }
    }
}

#[test]
fn power_weight_a1_constant_grows_with_exponent() {
    let g = Grid::unit(1, 64).unwrap();
    let fam = CubeFamily::all(g);
    let a1 = |a: f64| maxcomm::weights::a1_constant(&power_weight(g, &[0.5], a, 1.0 / 128.0).unwrap(), &fam).unwrap();
    let (lo, hi) = (a1(0.2), a1(0.6));
    assert!(lo >= 1.0 && hi > lo, "{lo} {hi}");
}

#[test]
fn slope_of_exact_power_law() {
    let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|&x| (x.ln(), (3.0 * x.powf(0.75)).ln())).collect();
    assert!((fit_slope(&pts) - 0.75).abs() < 1e-12);
}
