mod common;

use common::*;
use node_opener::differential::LambdaTable;
use node_opener::graph::{check_period_compatibility, cycle_periods, CycleSpec, PeriodVector, Sign};
use node_opener::norms::WeightSpec;
use node_opener::quadrature::contour_integral;
use node_opener::solver::{solve, SolveConfig};
use node_opener::surface::Chart;
use node_opener::Complex64;
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), 1.0..6.0f64, Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cycle_combinations_are_compatible(steps in proptest::collection::vec((0usize..4, -2i32..3), 1..6)) {
        // Closed walks on the strip: each step goes around one unit square.
        let g = strip_graph(5);
        let mut total = vec![Complex64::new(0.0, 0.0); g.edge_count()];
        for (i, k) in steps {
            let cycle = vec![
                (format!("ta{i:02}"), 1),
                (format!("r{:02}", i + 1), 1),
                (format!("tb{i:02}"), -1),
                (format!("r{i:02}"), -1),
            ];
            let p = cycle_periods(&g, &CycleSpec(cycle)).unwrap().to_dense(&g).unwrap();
            for (t, x) in total.iter_mut().zip(p) {
                *t += x * f64::from(k);
            }
        }
        let residuals = check_period_compatibility(&g, &PeriodVector::from_dense(&g, &total)).unwrap();
        prop_assert!(residuals.values().all(|r| r.norm() == 0.0));
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive(
        p in exponent(),
        a in proptest::collection::vec(-5.0..5.0f64, 12),
        b in proptest::collection::vec(-5.0..5.0f64, 12),
        scale in -4.0..4.0f64,
        ratio in 0.5..3.0f64,
    ) {
        let g = strip_graph(6);
        let w = WeightSpec::geometric(&g, p, 0, ratio).unwrap();
        let na = w.norm_vertex(&a.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let nb = w.norm_vertex(&b.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y).abs()).collect();
        prop_assert!(w.norm_vertex(&sum) <= (na + nb) * (1.0 + 1e-12));
        let scaled: Vec<f64> = a.iter().map(|x| (x * scale).abs()).collect();
        prop_assert!((w.norm_vertex(&scaled) - scale.abs() * na).abs() <= 1e-10 * (1.0 + na * scale.abs()));
    }

    #[test]
    fn edge_norm_is_monotone(
        p in exponent(),
        a in proptest::collection::vec(0.0..5.0f64, 16),
        bump in proptest::collection::vec(0.0..1.0f64, 16),
    ) {
        let g = strip_graph(6);
        let w = WeightSpec::geometric(&g, p, 0, 2.0).unwrap();
        let bigger: Vec<f64> = a.iter().zip(&bump).map(|(x, d)| x + d).collect();
        prop_assert!(w.norm_edge(&a) <= w.norm_edge(&bigger));
    }

    #[test]
    fn lambda_norm_is_monotone(values in proptest::collection::vec(0.0..3.0f64, 2 * 2 * 5), k in 0usize..20) {
        let g = theta_graph();
        let w = WeightSpec::uniform(&g, 2.0).unwrap();
        let flat: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, -x)).collect();
        let small = LambdaTable::from_flat(2, 6, &flat);
        let mut large = small.clone();
        let (e, sign, n) = (k % 2, if k % 3 == 0 { Sign::Minus } else { Sign::Plus }, 2 + k % 5);
        large.set(e, sign, n, small.get(e, sign, n) * 2.0 + 1.0);
        prop_assert!(w.norm_lambda(&small) <= w.norm_lambda(&large));
    }

    #[test]
    fn moebius_chart_round_trips(angle in 0.0..std::f64::consts::TAU, r in 0.0..0.45f64, theta in 0.0..std::f64::consts::TAU) {
        let chart = Chart::Moebius { p: Complex64::from_polar(1.0, angle) };
        let w = Complex64::from_polar(r, theta);
        let z = chart.inverse(w).unwrap();
        prop_assert!((chart.forward(z).unwrap() - w).norm() < 1e-13);
        // Finite-difference check of the derivative.
        let h = 1e-6;
        let fd = (chart.forward(z + h).unwrap() - chart.forward(z - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - chart.derivative(z).unwrap()).norm() < 1e-7 * (1.0 + fd.norm()));
    }

    #[test]
    fn polynomials_integrate_to_zero(coeffs in proptest::collection::vec(-3.0..3.0f64, 1..8), cx in -1.0..1.0f64, r in 0.1..2.0f64) {
        let f = |z: Complex64| -> node_opener::Result<Complex64> {
            Ok(coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c))
        };
        let value = contour_integral(f, Complex64::new(cx, 0.5), r, 64).unwrap();
        let scale: f64 = coeffs.iter().map(|c| c.abs()).sum::<f64>() * (1.0 + r + cx.abs()).powi(coeffs.len() as i32);
        prop_assert!(value.norm() < 1e-13 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solve_is_linear_in_periods(re in -3.0..3.0f64, im in -3.0..3.0f64, seed in 0u64..1000) {
        let inst = random_instance(seed, 4, 2, 0.5);
        let g = inst.surface.graph();
        let cfg = SolveConfig::default();
        let (d1, _) = solve(&inst.surface, &inst.alpha, &inst.parts, &cfg).unwrap();
        let factor = Complex64::new(re, im);
        let dense: Vec<Complex64> = inst.alpha.to_dense(g).unwrap().iter().map(|a| a * factor).collect();
        let (d2, _) = solve(&inst.surface, &PeriodVector::from_dense(g, &dense), &inst.parts, &cfg).unwrap();
        let expected = d1.lambda().scale(factor);
        let scale = 1.0 + expected.edge_sups().iter().copied().fold(0.0, f64::max);
        prop_assert!(d2.lambda().max_abs_diff(&expected) < 1e-12 * scale);
    }
}
