#![allow(clippy::excessive_precision)]

use approx::assert_relative_eq;
use heatdgg::oracles::{
    bessel_i, bessel_i_scaled, decay_slope, envelope_ratio_scan, pang_kernel, window_kernel,
    ScanGrid,
};
use proptest::prelude::*;

// Reference values computed with 30-digit arithmetic.
#[test]
fn frozen_bessel_values() {
    let cases: [(usize, f64, f64); 7] = [
        (0, 1.0, 1.2660658777520083356),
        (1, 1.0, 0.5651591039924850272),
        (5, 0.5, 8.223171313109264e-6),
        (3, 2.0, 0.21273995923985265527),
        (10, 10.0, 21.891706163723370526),
        (1, 0.001, 5.000000625000026146e-4),
        (20, 3.0, 1.5209660019426695221e-15),
    ];
    for (n, t, want) in cases {
        assert_relative_eq!(bessel_i(n, t).unwrap(), want, max_relative = 1e-13);
    }
    assert_relative_eq!(
        bessel_i(0, 100.0).unwrap(),
        1.0737517071310738235e42,
        max_relative = 1e-13
    );
}

#[test]
fn frozen_scaled_bessel_values() {
    let cases: [(usize, f64, f64); 5] = [
        (0, 100.0, 0.039944379299096682648),
        (50, 30.0, 1.3652871959938370888e-17),
        (200, 500.0, 1.2157543623341461653e-19),
        (0, 500.0, 0.017845706500153167237),
        (60, 256.0, 2.2453978361651221084e-5),
    ];
    for (n, t, want) in cases {
        assert_relative_eq!(bessel_i_scaled(n, t).unwrap(), want, max_relative = 1e-12);
    }
}

#[test]
fn lattice_kernel_value() {
    assert_relative_eq!(
        pang_kernel(3, 2.0).unwrap(),
        0.014395611319735449204,
        max_relative = 1e-13
    );
}

#[test]
fn out_of_range_arguments_are_rejected() {
    assert!(bessel_i_scaled(0, -1.0).is_err());
    assert!(bessel_i_scaled(0, f64::NAN).is_err());
    assert!(bessel_i_scaled(5000, 1.0).is_err());
}

#[test]
fn scan_is_finite_and_stable() {
    let grid = ScanGrid {
        d_min: 1,
        d_max: 20,
        t_min: 0.25,
        t_max: 64.0,
        t_points: 15,
    };
    let (cells, summary) = envelope_ratio_scan(&grid).unwrap();
    assert_eq!(cells.len(), 20 * 15);
    assert!(summary.measured_c.is_finite() && summary.min_envelope > 0.0);
    assert!(summary.max_window_deviation <= 1e-8);
    let (_, fine) = envelope_ratio_scan(&grid.refined()).unwrap();
    assert!((fine.measured_c / summary.measured_c - 1.0).abs() < 0.05);
}

#[test]
fn decay_slope_of_pure_exponential() {
    let times: Vec<f64> = (1..=50).map(|i| i as f64).collect();
    let values: Vec<f64> = times.iter().map(|t| 3.0 * (-0.25 * t).exp()).collect();
    assert_relative_eq!(
        decay_slope(&times, &values).unwrap(),
        -0.25,
        max_relative = 1e-12
    );
    assert!(decay_slope(&times, &vec![0.0; 50]).is_err());
}

proptest! {
    #[test]
    fn three_term_recurrence(n in 1usize..150, t in 0.01f64..400.0) {
        // I_{n−1} − I_{n+1} = (2n/t) I_n, scaled by e^{−t}
        let lhs = bessel_i_scaled(n - 1, t).unwrap() - bessel_i_scaled(n + 1, t).unwrap();
        let rhs = 2.0 * n as f64 / t * bessel_i_scaled(n, t).unwrap();
        prop_assume!(rhs > 1e-290);
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn window_matches_closed_form(d in 0usize..60, t in 0.05f64..256.0) {
        let a = window_kernel(d, t).unwrap();
        let b = pang_kernel(d, t).unwrap();
        prop_assume!(b > 1e-290);
        prop_assert!((a / b - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn lattice_kernel_is_a_probability(t in 0.01f64..300.0) {
        // Σ_d m p_t(0, d) = 1 with m ≡ 2
        let mut total = 2.0 * pang_kernel(0, t).unwrap();
        for d in 1..(t as usize + 200) {
            total += 4.0 * pang_kernel(d, t).unwrap();
        }
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }
}
