use std::f64::consts::E;

use kef_core::constitutive::*;
use kef_core::fields::*;
use proptest::prelude::*;

fn power(alpha: f64, r: f64, big_r: f64) -> ViscosityLaw {
    ViscosityLaw::power(alpha, r, big_r).unwrap()
}

fn log_pair(r: f64, big_r: f64) -> GeneralLawPair {
    GeneralLawPair {
        mu: power(1.0, r, big_r),
        mu_tilde: ViscosityLaw::unchecked(LawKind::Log { coefficient: 1.0 }, 0.0, r, big_r),
    }
}

#[test]
fn potential_of_built_in_laws() {
    let cases: [(f64, fn(f64) -> f64); 3] = [
        (1.0, |s: f64| s.ln()),
        (2.0, |s: f64| 2.0 * (s - 1.0)),
        (1.5, |s: f64| 3.0 * (s.sqrt() - 1.0)),
    ];
    for (alpha, exact) in cases {
        let p = phi_from_mu(&power(alpha, 0.5, 2.0)).unwrap();
        for i in 0..=200 {
            let s = 0.5 + 1.5 * i as f64 / 200.0;
            assert!((p.phi(s) - exact(s)).abs() <= 1e-12, "alpha {alpha} s {s}");
        }
        // evaluation outside the tabulated range falls back to quadrature
        assert!((p.phi(20.0) - exact(20.0)).abs() <= 1e-10);
    }
}

#[test]
fn potential_matches_chain_rule_on_a_field() {
    let g = Grid::periodic(2, 64).unwrap();
    let law = power(1.5, 0.5, 2.0);
    let p = PotentialLaw::new(&law).unwrap();
    let rho = ScalarField::from_fn(&g, |x| 1.2 + 0.3 * x[0].sin() * x[1].cos());
    let gphi = grad(&rho.map_full(|s| p.phi(s)));
    let gmu = grad(&rho.map_full(|s| law.mu(s)));
    let rv = rho.values();
    for a in 0..2 {
        let lhs: Vec<f64> = gphi.comp(a).values().iter().zip(&rv).map(|(x, r)| x * r).collect();
        let rhs = gmu.comp(a).values();
        let err = lhs.iter().zip(&rhs).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(err < 1e-11, "{err}");
    }
}

#[test]
fn important_condition_examples() {
    let r = check_important(&power(1.0, 0.5, 2.0), 3).unwrap();
    assert!(r.satisfied);
    assert!((r.infimum - 0.5 / 3.0).abs() < 1e-12);
    let r = check_important(&power(0.5, 0.5, 2.0), 2).unwrap();
    assert!(!r.satisfied);
    assert!(r.witness.is_some());
    let r = check_important(&power(0.5, 0.5, 2.0), 3).unwrap();
    assert!(!r.satisfied);
    assert!(r.infimum < 0.0);
}

#[test]
fn important_condition_transition_matches_threshold() {
    for d in [2usize, 3] {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if check_important(&power(mid, 0.5, 2.0), d).unwrap().satisfied {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let expect = 1.0 - 1.0 / d as f64;
        assert!((hi - expect).abs() <= 1e-6, "d={d}: {hi} vs {expect}");
    }
}

#[test]
fn xi_interval_at_e() {
    let pair = log_pair(2.0, 3.0);
    let xi = xi_interval(E, 1.0, &pair).unwrap().unwrap();
    let s3 = 3f64.sqrt();
    assert!((xi.lower - (E - 1.0) * (2.0 - s3)).abs() <= 1e-12);
    assert!((xi.upper - (E - 1.0) * (2.0 + s3)).abs() <= 1e-12);
    assert!((xi.xi0 - 2.0 * (E - 1.0)).abs() <= 1e-12);
    assert!(xi.xi0_inside);
    // the defining inequality is an equality at both endpoints
    let j2 = E - 1.0;
    for x in [xi.lower, xi.upper] {
        let res = (j2 - x).powi(2) / (2.0 * j2) - x;
        assert!(res.abs() <= 1e-9);
    }
}

#[test]
fn xi_interval_agrees_with_brute_force_scan() {
    let pair = log_pair(2.0, 3.0);
    for (s, c1) in [(E, 1.0), (2.3, 0.5), (2.9, 0.8)] {
        let xi = xi_interval(s, c1, &pair).unwrap().unwrap();
        let j2 = pair.j2(s);
        let mt = pair.mu_tilde.mu(s);
        let n = 200_000;
        let top = 2.0 * xi.upper;
        let ok: Vec<f64> = (1..=n)
            .map(|i| top * i as f64 / n as f64)
            .filter(|&x| (j2 - x * mt).powi(2) / (2.0 * j2) <= x * c1)
            .collect();
        assert!((ok[0] - xi.lower).abs() <= 1e-3);
        assert!((ok[ok.len() - 1] - xi.upper).abs() <= 1e-3);
    }
}

#[test]
fn xi_interval_degenerate_and_empty() {
    let pair = log_pair(0.2, 3.0);
    assert!(matches!(xi_interval(1.0, 1.0, &pair), Err(ConstitutiveError::Degenerate(_))));
    assert!(xi_interval(1.0 / E, 1.0, &pair).unwrap().is_none());
}

#[test]
fn general_condition_examples() {
    // μ̃ = κμ with μ = ρ
    let mu = power(1.0, 0.9, 1.1);
    let pair = GeneralLawPair {
        mu: mu.clone(),
        mu_tilde: ViscosityLaw::unchecked(LawKind::Power { coefficient: 0.5, alpha: 1.0 }, 0.0, 0.9, 1.1),
    };
    let rep = check_cgen(&pair, 3).unwrap();
    assert!(rep.satisfied);
    let (a, b) = rep.xi_range.unwrap();
    assert!(a <= 1.0 && 1.0 <= b);
    // constant μ̃ violates J_1 > 0 in d = 3
    let pair = GeneralLawPair {
        mu,
        mu_tilde: ViscosityLaw::unchecked(LawKind::Power { coefficient: 0.5, alpha: 0.0 }, 0.0, 0.9, 1.1),
    };
    let rep = check_cgen(&pair, 3).unwrap();
    assert!(!rep.satisfied && rep.witness.is_some());
}

#[test]
fn closed_form_range_witnesses_small_neighbourhoods() {
    let d = 3;
    let pair = log_pair(E - 1e-3, E + 1e-3);
    let rep = check_cgen(&pair, d).unwrap();
    assert!(rep.satisfied);
    let c1 = pair.j1(E, d);
    let xi = xi_interval(E, c1, &pair).unwrap().unwrap();
    let (a, b) = rep.xi_range.unwrap();
    assert!((a - xi.lower).abs() < 1e-2 * xi.lower && (b - xi.upper).abs() < 1e-2 * xi.upper);
    let eta = xi_neighbourhood(&log_pair(2.0, 3.0), E, d, 1.5).unwrap();
    assert!(eta > 1e-3);
    assert!(check_cgen(&log_pair(E - 0.9 * eta, E + 0.9 * eta), d).unwrap().satisfied);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn important_condition_sign(alpha in 0.0f64..3.0, d in 2usize..4, r in 0.2f64..1.0, w in 0.1f64..3.0) {
        let thr = 1.0 - 1.0 / d as f64;
        prop_assume!((alpha - thr).abs() > 1e-3);
        let rep = check_important(&power(alpha, r, r + w), d).unwrap();
        prop_assert_eq!(rep.satisfied, alpha > thr);
    }

    #[test]
    fn potential_is_monotone(alpha in 0.2f64..3.0, a in 0.3f64..1.5, b in 0.3f64..1.5) {
        let p = PotentialLaw::new(&power(alpha, 0.3, 1.5)).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(p.phi(lo) <= p.phi(hi) + 1e-15);
    }
}
