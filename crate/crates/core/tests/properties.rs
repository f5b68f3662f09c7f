use proptest::prelude::*;
use tfcop::dependence::{concordance_balance, concordance_balance_naive};
use tfcop::generators::{check_condition_d1, check_ratio_increasing};
use tfcop::sampling::sample;
use tfcop::transform::{build, Branch, BuildOptions, Gate, TransformedCopula};
use tfcop::{CopulaSpec, GeneratorPair, MonotoneMap, UnitValue};

fn base_strategy() -> impl Strategy<Value = CopulaSpec> {
    prop_oneof![
        Just(CopulaSpec::independence()),
        (0.0..=1.0f64).prop_map(|t| CopulaSpec::fgm(t).unwrap()),
        (0.2..6.0f64).prop_map(|a| CopulaSpec::clayton(a).unwrap()),
        (1.0..6.0f64).prop_map(|b| CopulaSpec::gumbel(b).unwrap()),
        (0.5..8.0f64).prop_map(|g| CopulaSpec::frank(g).unwrap()),
        (0.0..=1.0f64).prop_map(|a| CopulaSpec::cuadras_auge(a).unwrap()),
    ]
}

/// Power pairs `(t^p, t^q)` with `q <= p <= 1`, which are certified for
/// every supermigrative base through the ratio route.
fn certified() -> impl Strategy<Value = TransformedCopula> {
    (base_strategy(), 0.1..=1.0f64, 0.0..=1.0f64).prop_filter_map("uncertified", |(base, p, frac)| {
        let q = (p * frac).max(0.05);
        let pair = GeneratorPair::powers(p, q).ok()?;
        build(base, pair, Gate::Theorem, &BuildOptions { grid: 60, map_samples: 400, supermigrative_grid: 20 }).ok()
    })
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unit_values_accept_exactly_the_interval(x in -2.0..3.0f64) {
        prop_assert_eq!(UnitValue::new(x).is_ok(), (0.0..=1.0).contains(&x));
    }

    #[test]
    fn pseudo_inverse_is_a_right_inverse(beta in 0.05..3.0f64, alpha in 0.0..0.9f64, t in unit()) {
        for m in [MonotoneMap::power(beta), MonotoneMap::affine(alpha).unwrap()] {
            let y = m.value(t);
            prop_assert!((m.value(m.pseudo_inverse(y)) - y).abs() <= 1e-10);
            prop_assert!(m.pseudo_inverse(t) >= 0.0 && m.pseudo_inverse(t) <= 1.0);
            if t <= m.at_zero() {
                prop_assert_eq!(m.pseudo_inverse(t), 0.0);
            }
        }
    }

    #[test]
    fn transforms_are_symmetric_with_uniform_margins(c in certified(), u in unit(), v in unit()) {
        prop_assert_eq!(c.eval(u, v), c.eval(v, u));
        prop_assert!((c.eval(u, 1.0) - u).abs() <= 1e-10);
        prop_assert!(c.eval(u, 0.0).abs() <= 1e-10);
        let w = (u + v - 1.0).max(0.0);
        prop_assert!(c.eval(u, v) >= w - 1e-12 && c.eval(u, v) <= u.min(v) + 1e-12);
    }

    #[test]
    fn rectangles_have_nonnegative_volume(c in certified(), a in unit(), b in unit(), x in unit(), y in unit()) {
        let (u1, u2) = (a.min(b), a.max(b));
        let (v1, v2) = (x.min(y), x.max(y));
        let vol = c.eval(u2, v2) - c.eval(u1, v2) - c.eval(u2, v1) + c.eval(u1, v1);
        prop_assert!(vol >= -1e-10, "volume {vol}");
    }

    #[test]
    fn conditional_cdf_is_monotone_with_nonnegative_atom(c in certified(), u in 0.01..0.99f64) {
        let mut prev = 0.0;
        for i in 0..=50 {
            let v = i as f64 / 50.0;
            let f = c.conditional_cdf(u, v).unwrap();
            prop_assert!(f >= prev - 1e-9, "F({v}|{u}) = {f} < {prev}");
            prev = f;
        }
        prop_assert!((c.conditional_cdf(u, 1.0).unwrap() - 1.0).abs() <= 1e-8);
        prop_assert!(c.diagonal_jump(u).unwrap() >= -1e-10);
        let lo = c.conditional_cdf_branch(u, u, Branch::Lower).unwrap();
        let hi = c.conditional_cdf_branch(u, u, Branch::Upper).unwrap();
        prop_assert!(lo <= hi + 1e-10);
    }

    #[test]
    fn d1_forces_phi_below_psi(base in base_strategy(), p in 0.1..2.0f64, q in 0.1..2.0f64) {
        let pair = GeneratorPair::powers(p, q).unwrap();
        if check_condition_d1(&pair, &base, 60).passed {
            for i in 0..=200 {
                let t = i as f64 / 200.0;
                prop_assert!(pair.phi.value(t) <= pair.psi.value(t) + 1e-10);
            }
        }
    }

    #[test]
    fn power_ratio_is_increasing_iff_q_below_p(p in 0.1..2.0f64, q in 0.1..2.0f64) {
        prop_assume!((p - q).abs() > 1e-3);
        let pair = GeneratorPair::powers(p, q).unwrap();
        prop_assert_eq!(check_ratio_increasing(&pair, 500).passed, q < p);
    }

    #[test]
    fn tau_balance_matches_pairwise_count(xs in prop::collection::vec((0u8..12, 0u8..12), 2..300)) {
        let pairs: Vec<(f64, f64)> = xs.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
        prop_assert_eq!(concordance_balance(&pairs), concordance_balance_naive(&pairs));
    }

    #[test]
    fn diagonal_flags_mean_exact_ties(seed in any::<u64>()) {
        let c = build(CopulaSpec::independence(), GeneratorPair::powers(1.0, 0.5).unwrap(), Gate::Theorem, &BuildOptions::default()).unwrap();
        let b = sample(&c, 300, seed).unwrap();
        for (&(u, v), &d) in b.pairs.iter().zip(&b.on_diagonal) {
            prop_assert!(!d || u.to_bits() == v.to_bits());
        }
        prop_assert_eq!(b, sample(&c, 300, seed).unwrap());
    }
}
