use h1flow::estimator::fit;
use h1flow::io::{long_csv, read_long, read_wide, wide_csv};
use h1flow::{CurveParams, FireflyConfig, H1Params, InitialLaw, PathPanel, SamplePath, SufficientStats};
use proptest::prelude::*;

fn panel_strategy() -> impl Strategy<Value = PathPanel> {
    (1usize..5, 2usize..12).prop_flat_map(|(d, n)| {
        (
            proptest::collection::vec(1e-6f64..10.0, n - 1),
            proptest::collection::vec(proptest::collection::vec(1e-12f64..1e6, n), d),
            -5.0f64..5.0,
        )
            .prop_map(move |(steps, values, t1)| {
                let mut times = vec![t1];
                for s in steps {
                    let next = times.last().unwrap() + s;
                    times.push(next);
                }
                let paths = values.into_iter().map(|v| SamplePath { times: times.clone(), values: v }).collect();
                PathPanel::new(paths).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn wide_and_long_csv_round_trip(panel in panel_strategy()) {
        let wide = wide_csv(&panel).unwrap();
        let back = read_wide(wide.as_slice()).unwrap();
        prop_assert_eq!(&back, &panel);
        prop_assert_eq!(wide_csv(&back).unwrap(), wide);
        prop_assert_eq!(read_long(long_csv(&panel).unwrap().as_slice()).unwrap(), panel);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fits_stay_inside_their_boxes(
        eta in 0.2f64..1.0,
        lambda in 0.6f64..0.9,
        frac in 0.3f64..0.9,
        sigma in 0.005f64..0.05,
        seed in 0u64..1000,
    ) {
        let mu = frac / lambda;
        let p = H1Params::new(CurveParams::new(eta, lambda, mu, 0.0, 0.1).unwrap(), sigma).unwrap();
        let ts: Vec<f64> = (0..40).map(|j| j as f64 * 0.5).collect();
        let panel = p.simulate(&InitialLaw::Degenerate { x0: 0.1 }, &ts, 4, seed).unwrap();
        let cfg = FireflyConfig { n: 10, generations: 8, seed, ..FireflyConfig::default() };
        let f = fit(&panel, &cfg).unwrap();
        prop_assert!(f.param_box.contains(f.lambda, f.mu, f.eta, f.sigma));
        prop_assert_eq!(SufficientStats::new(&panel).objective_fo(&f.theta()).unwrap(), f.fo_value);
        let last = f.trace.last().unwrap();
        prop_assert_eq!(last.best_so_far, f.fo_value);
        prop_assert!(f.trace.windows(2).all(|w| w[1].best_so_far >= w[0].best_so_far));
    }

    #[test]
    fn fits_on_a_shifted_origin_stay_inside_their_boxes(t0 in 0.5f64..3.0, seed in 0u64..1000) {
        let p = H1Params::new(CurveParams::new(0.4, 0.8, 0.9, t0, 0.1).unwrap(), 0.02).unwrap();
        let ts: Vec<f64> = (0..30).map(|j| t0 + j as f64 * 0.5).collect();
        let panel = p.simulate(&InitialLaw::Degenerate { x0: 0.1 }, &ts, 3, seed).unwrap();
        let cfg = FireflyConfig { n: 10, generations: 6, seed, ..FireflyConfig::default() };
        let f = fit(&panel, &cfg).unwrap();
        prop_assert!(f.param_box.eta_depends_on_sample);
        prop_assert!(f.param_box.contains(f.lambda, f.mu, f.eta, f.sigma));
        for rec in &f.trace {
            for q in &rec.positions {
                prop_assert!(f.param_box.contains(q[0], q[1], q[2], q[3]));
            }
        }
    }
}
