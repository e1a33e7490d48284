use hermite_core::market::{
    deflate, riskless_price, solve_market_price_of_risk, Asset, AssetPath, BasicRate, MarketSpec, Volatility,
};
use hermite_core::HermiteSpec;
use proptest::prelude::*;

fn positive_rate() -> impl Strategy<Value = BasicRate> {
    prop_oneof![
        (0.001f64..0.2).prop_map(BasicRate::constant),
        (0.001f64..0.1, 0.0f64..0.05, 0.0f64..0.01).prop_map(|(a, b, c)| BasicRate::polynomial(vec![a, b, c]).unwrap()),
    ]
}

fn market(h: f64, k: u32, r: BasicRate) -> MarketSpec {
    MarketSpec::new(
        HermiteSpec::new(h, k).unwrap(),
        r,
        vec![Asset {
            drift: BasicRate::constant(0.08),
            dividend: BasicRate::zero(),
            initial_price: 1.0,
        }],
        Volatility::Constant {
            matrix: vec![vec![0.25]],
        },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riskless_starts_at_one_and_grows(h in 0.55f64..0.95, k in 1u32..=2, r in positive_rate(),
                                        mut ts in prop::collection::vec(0.0f64..10.0, 2..40)) {
        let m = market(h, k, r);
        prop_assert_eq!(riskless_price(&m, 0.0), 1.0);
        ts.sort_by(f64::total_cmp);
        let cum: Vec<f64> = ts.iter().map(|&t| m.riskless_cumulative(t)).collect();
        prop_assert!(cum.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn deflation_round_trips(h in 0.55f64..0.95, r in positive_rate(),
                             vals in prop::collection::vec(0.01f64..100.0, 2..50)) {
        let m = market(h, 1, r);
        let times: Vec<f64> = (0..vals.len()).map(|i| i as f64 * 0.1).collect();
        let path = AssetPath { times: times.clone(), values: vals.clone() };
        let back = &deflate(&[path], &m)[0];
        for ((&t, &d), &v) in times.iter().zip(&back.values).zip(&vals) {
            let restored = d * riskless_price(&m, t);
            prop_assert!((restored / v - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn risk_price_solves_its_system(h in 0.55f64..0.95, k in 1u32..=3, t in 0.1f64..3.0,
                                    a in 0.05f64..0.5, b in -0.2f64..0.2, c in 0.05f64..0.5,
                                    v in prop::collection::vec(-2.0f64..0.09, 3)) {
        let spec = HermiteSpec::new(h, k).unwrap();
        let assets = (0..2).map(|j| Asset {
            drift: BasicRate::constant(0.05 + 0.03 * j as f64),
            dividend: BasicRate::zero(),
            initial_price: 1.0,
        }).collect();
        let vol = Volatility::Constant { matrix: vec![vec![a, b], vec![-b, c]] };
        let m = MarketSpec::new(spec, BasicRate::constant(0.02), assets, vol).unwrap();
        let z = solve_market_price_of_risk(&m, t, &v[..k as usize]).unwrap();
        prop_assert!(z.relative_residual <= 1e-10);
    }
}

#[test]
fn singular_volatility_is_reported() {
    let spec = HermiteSpec::new(0.7, 1).unwrap();
    let assets = (0..2)
        .map(|_| Asset {
            drift: BasicRate::constant(0.05),
            dividend: BasicRate::zero(),
            initial_price: 1.0,
        })
        .collect();
    let vol = Volatility::Constant {
        matrix: vec![vec![0.2, 0.4], vec![0.1, 0.2]],
    };
    let m = MarketSpec::new(spec, BasicRate::constant(0.02), assets, vol);
    // Either construction or the solve rejects the singular matrix.
    if let Ok(m) = m {
        assert!(solve_market_price_of_risk(&m, 0.5, &[0.1]).is_err());
    }
}
