//! Places where a typeset formula and the measured behaviour disagree. Each
//! test pins the measured side so a regression in either direction shows up.

use smj::analysis::{powers_of_two, second_order_limit, voronovskaya, weighted_ratio};
use smj::expansions::{a4_validate, a5_validate, pn_report, Verdict};
use smj::moments::{
    central4_as_typeset, central_moment, central_moment_binomial, weighted_central_moment,
};
use smj::{apply, FunctionSpec, OperatorParams, TruncationPolicy};

fn p(n: u64, beta: f64, lambda: f64) -> OperatorParams {
    OperatorParams::new(n, beta, lambda).unwrap()
}

#[test]
fn fourth_central_moment_needs_factor_x_in_last_term() {
    let pol = TruncationPolicy::default();
    for &(n, beta, lambda, x) in &[
        (10u64, 0.3, 1.0, 2.0),
        (50, 0.5, 0.5, 0.1),
        (5, 0.0, 2.0, 5.0),
    ] {
        let params = p(n, beta, lambda);
        let series = apply(
            &params,
            x,
            &FunctionSpec::ShiftedPower { center: x, m: 4 },
            &pol,
        )
        .unwrap();
        let direct = central_moment(&params, x, 4).unwrap();
        let (binomial, _) = central_moment_binomial(&params, x, 4).unwrap();
        let typeset = central4_as_typeset(&params, x).unwrap();
        assert!((direct - series).abs() <= 1e-9 * direct);
        assert!((binomial - series).abs() <= 1e-9 * direct);
        assert!((typeset - series).abs() > 1e-3 * direct);
    }
}

#[test]
fn weighted_fourth_moment_follows_tilted_substitution() {
    // the tilted law has parameter beta z, so the last polynomial is 1 + 8 beta z + 6 beta^2 z^2
    let pol = TruncationPolicy::default();
    let (params, x, mu) = (p(8, 0.6, 1.0), 1.5, 2.0);
    let r = weighted_central_moment(&params, x, mu, 4).unwrap();
    let series = apply(
        &params,
        x,
        &FunctionSpec::ExpShiftedPower {
            a: mu,
            center: x,
            m: 4,
        },
        &pol,
    )
    .unwrap();
    assert!((r.closed_form - series).abs() <= 1e-9 * r.closed_form.abs());
}

#[test]
fn stirling_index_as_typeset_disagrees_with_direct_derivative() {
    let r = pn_report(1, &FunctionSpec::Monomial { m: 1 }, 2.0).unwrap();
    assert_eq!(r.as_printed, 0.0);
    assert!(r.standard_matches && !r.printed_matches);
    let r = pn_report(3, &FunctionSpec::ExpDecay { a: 1.0 }, 0.5).unwrap();
    assert!(r.standard_matches && !r.printed_matches, "{r:?}");
}

#[test]
fn appendix_higher_order_coefficients_all_match() {
    for i in 0..10 {
        let beta = 0.1 * i as f64;
        for r in a4_validate(beta, 5).unwrap() {
            assert_eq!(r.verdict, Verdict::Match, "{r:?}");
        }
    }
    for &(x, t, beta) in &[(0.02, 0.01, 0.25), (0.005, 0.02, 0.6), (0.03, 0.001, 0.0)] {
        for r in a5_validate(x, t, beta).unwrap() {
            assert_eq!(r.verdict, Verdict::Match, "{r:?}");
        }
    }
}

#[test]
fn displayed_second_derivative_coefficient_breaks_the_estimate_at_large_n() {
    let pol = TruncationPolicy::default();
    let v = voronovskaya(
        &FunctionSpec::ExpDecay { a: 1.0 },
        &p(200, 0.0, 1.0),
        0.1,
        &pol,
    )
    .unwrap();
    assert!(v.holds());
    assert!(v.lhs_displayed > v.rhs, "{v:?}");
}

#[test]
fn second_order_limit_carries_half_the_printed_second_derivative_term() {
    let pol = TruncationPolicy::default();
    let r = second_order_limit(
        &FunctionSpec::RationalBounded,
        0.25,
        1.0,
        2.0,
        &powers_of_two(6, 14),
        &pol,
    )
    .unwrap();
    assert!(r.gap_half <= 1e-6 * r.candidate_half.abs(), "{r:?}");
    assert!(r.gap_printed > 0.1 * r.candidate_half.abs());
    // pinned measured limit: lambda x f'/(2 s^2) + x f''/(2 s^2) with f = 1/(1+t), x = 2, s = 3/4
    let expected = (-1.0 / 9.0 + 2.0 / 27.0) * 2.0 / (2.0 * 0.5625);
    assert!((r.measured - expected).abs() < 1e-6);
}

#[test]
fn weighted_ratio_decays_like_one_over_n() {
    let ns = powers_of_two(6, 14);
    for &beta in &[0.0, 0.5] {
        let r = weighted_ratio(&p(64, beta, 1.0), 1.0, 1.0, &ns).unwrap();
        assert!((r.slope + 1.0).abs() < 0.05, "{r:?}");
        let s2 = (1.0 - beta) * (1.0 - beta);
        assert!((r.first_order_constant - 3.0 / s2).abs() < 1e-4 * 3.0 / s2);
    }
}
