use std::sync::OnceLock;

use buchstab::numeric::Real;
use buchstab::omega::QuadratureConfig;
use buchstab::omega_k::oracle::oracle_quadrature;
use buchstab::omega_k::OmegaKLedger;
use proptest::prelude::*;
use rug::Float;

fn abs_diff(a: &Real, b: &Real) -> f64 {
    Float::with_val(a.prec(), a - b).abs().to_f64()
}

fn ledger(k: &str) -> &'static OmegaKLedger {
    static UNIT: OnceLock<OmegaKLedger> = OnceLock::new();
    static HALF: OnceLock<OmegaKLedger> = OnceLock::new();
    let cell = match k {
        "1" => &UNIT,
        "1/2" => &HALF,
        _ => unreachable!(),
    };
    cell.get_or_init(|| OmegaKLedger::build(k, &QuadratureConfig::default()).unwrap())
}

#[test]
fn agrees_with_direct_quadrature() {
    for (k, kf) in [("1", 1.0), ("1/2", 0.5)] {
        let ledger = ledger(k);
        let p = ledger.precision();
        for x in [2.5, 3.0, 3.5, 4.0, 4.5, 7.0, 10.0, 20.0] {
            let reference = oracle_quadrature(kf, x, 1e-10).unwrap();
            let value = ledger.eval(&p.real(x)).unwrap().to_f64();
            assert!(
                (value - reference).abs() < 1e-8,
                "K={k} x={x}: {value} vs {reference}"
            );
        }
    }
}

#[test]
fn oracle_examples() {
    assert!((oracle_quadrature(1.0, 3.0, 1e-10).unwrap() - 1.693_147_180_6).abs() < 1e-10);
    assert_eq!(oracle_quadrature(0.5, 2.0, 1e-10).unwrap(), 1.0);
}

#[test]
fn knots_join_continuously() {
    let config = QuadratureConfig {
        taylor_degree: 64,
        ..Default::default()
    };
    for k in ["1", "1/2"] {
        let ledger = OmegaKLedger::build(k, &config).unwrap();
        let bound = 10f64.powi(5 - ledger.precision().digits() as i32);
        for n in 2..=200 {
            let left = ledger.block(n).unwrap().left_value();
            let right = ledger.block(n - 1).unwrap().right_limit();
            // relative, since Ω_K grows with x
            let gap = abs_diff(&left, &right) / right.to_f64();
            assert!(gap < bound, "K={k} knot {n}: {gap:e}");
        }
    }
}

#[test]
fn derivative_law() {
    for (k, kf) in [("1", 1.0), ("1/2", 0.5)] {
        let ledger = ledger(k);
        let p = ledger.precision();
        let h = p.parse("1e-6").unwrap();
        for x in ["3.5", "5.25", "9.1"] {
            let x = p.parse(x).unwrap();
            let up = ledger.eval(&Float::with_val(p.bits(), &x + &h)).unwrap();
            let down = ledger.eval(&Float::with_val(p.bits(), &x - &h)).unwrap();
            let slope = Float::with_val(p.bits(), up - down) / Float::with_val(p.bits(), &h * 2u32);
            let lag = Float::with_val(p.bits(), &x - 1u32);
            let rhs = ledger.eval(&lag).unwrap() * kf / lag;
            assert!(abs_diff(&slope, &rhs) < 1e-6);
        }
    }
}

#[test]
fn linear_in_k_on_log_block() {
    let config = QuadratureConfig {
        max_interval: 3,
        ..Default::default()
    };
    let single = OmegaKLedger::build("0.3", &config).unwrap();
    let double = OmegaKLedger::build("0.6", &config).unwrap();
    let p = single.precision();
    let bound = 10f64.powi(8 - p.digits() as i32);
    for i in 0..50 {
        let x = p.real(2.0 + (i as f64 + 0.5) / 50.0);
        let a = Float::with_val(p.bits(), single.eval(&x).unwrap() - 1u32) * 2u32;
        let b = Float::with_val(p.bits(), double.eval(&x).unwrap() - 1u32);
        assert!(abs_diff(&a, &b) < bound);
    }
}

#[test]
fn doubles_with_argument() {
    let mut ledger = ledger("1").clone();
    let p = ledger.precision();
    ledger.ensure_covers(&p.real(8192)).unwrap();
    for x in [2048, 4096] {
        let ratio = ledger.eval(&p.real(2 * x)).unwrap() / ledger.eval(&p.real(x)).unwrap();
        let ratio = ratio.to_f64();
        assert!((1.99..=2.01).contains(&ratio), "x={x}: {ratio}");
    }
}

#[test]
fn no_truncation_warnings_at_defaults() {
    assert!(ledger("1").truncation_warnings().is_empty());
    assert!(ledger("1/2").truncation_warnings().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn nondecreasing(a in 1.0f64..200.0, b in 1.0f64..200.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for k in ["1", "1/2"] {
            let ledger = ledger(k);
            let p = ledger.precision();
            let vlo = ledger.eval(&p.real(lo)).unwrap();
            let vhi = ledger.eval(&p.real(hi)).unwrap();
            prop_assert!(vhi >= vlo);
        }
    }
}

#[test]
fn oracle_matches_ode_reference_values() {
    // from a separate fixed-step integration of the delay equation
    let cases = [
        (1.0, 4.0, 2.245833),
        (1.0, 5.0, 2.807272),
        (1.0, 10.0, 5.614595),
        (1.0, 16.0, 8.983352),
        (0.5, 4.0, 1.586111),
        (0.5, 10.0, 2.606943),
        (0.5, 16.0, 3.329184),
    ];
    for (k, x, expect) in cases {
        let v = oracle_quadrature(k, x, 1e-10).unwrap();
        assert!((v - expect).abs() < 2e-6, "K={k} x={x}: {v}");
    }
}

#[test]
fn oracle_reaches_its_range_limit() {
    let v = oracle_quadrature(1.0, 30.0, 1e-12).unwrap();
    let ledger = ledger("1");
    let w = ledger.eval(&ledger.precision().real(30)).unwrap().to_f64();
    assert!((v - w).abs() < 1e-9);
}
