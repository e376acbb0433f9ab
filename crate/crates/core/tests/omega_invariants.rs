use buchstab::numeric::{exp_neg_gamma, ln_real, PrecisionConfig, Real};
use buchstab::omega::{moment_constant, OmegaLedger, QuadratureConfig};
use proptest::prelude::*;
use rug::Float;

fn abs_diff(a: &Real, b: &Real) -> f64 {
    Float::with_val(a.prec(), a - b).abs().to_f64()
}

fn closed_form(x: &Real, prec: PrecisionConfig) -> Real {
    if *x < 2 {
        Float::with_val(prec.bits(), 1u32 / x)
    } else {
        let shifted = Float::with_val(prec.bits(), x - 1u32);
        let mut v = ln_real(&shifted, prec).unwrap();
        v += 1u32;
        v / x
    }
}

fn wide_ledger() -> OmegaLedger {
    OmegaLedger::build(QuadratureConfig {
        taylor_degree: 64,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn knots_join_continuously() {
    let ledger = wide_ledger();
    let p = ledger.config().precision;
    let bound = 10f64.powi(5 - p.digits() as i32);
    for n in 2..=100 {
        let left = ledger.block(n).unwrap().left_value();
        let right = ledger.block(n - 1).unwrap().right_limit();
        let gap = abs_diff(&left, &right);
        assert!(gap < bound, "knot {n}: {gap:e}");
    }
}

#[test]
fn knots_at_default_degree_are_close() {
    // 40 terms leave a residue of roughly 3^-40 at the block ends.
    let ledger = OmegaLedger::build(QuadratureConfig::default()).unwrap();
    for n in 2..=100 {
        let left = ledger.block(n).unwrap().left_value();
        let right = ledger.block(n - 1).unwrap().right_limit();
        assert!(abs_diff(&left, &right) < 1e-17);
    }
}

#[test]
fn delay_equation_residual() {
    let ledger = OmegaLedger::build(QuadratureConfig::default()).unwrap();
    let p = ledger.config().precision;
    let h = p.parse("1e-6").unwrap();
    let g = |x: &Real| Float::with_val(p.bits(), ledger.eval(x).unwrap() * x);
    for x in ["2.25", "3.5", "5.1", "10.7"] {
        let x = p.parse(x).unwrap();
        let up = Float::with_val(p.bits(), &x + &h);
        let down = Float::with_val(p.bits(), &x - &h);
        let slope =
            Float::with_val(p.bits(), g(&up) - g(&down)) / Float::with_val(p.bits(), &h * 2u32);
        let lagged = ledger.eval(&Float::with_val(p.bits(), &x - 1u32)).unwrap();
        assert!(abs_diff(&slope, &lagged) < 1e-6, "x = {}", x.to_f64());
    }
}

#[test]
fn matches_closed_forms_tightly_with_more_terms() {
    let ledger = wide_ledger();
    let p = ledger.config().precision;
    let bound = 10f64.powi(8 - p.digits() as i32);
    for i in 0..100 {
        let x = p.real(1.0 + 2.0 * (i as f64 + 0.37) / 100.0);
        assert!(abs_diff(&ledger.eval(&x).unwrap(), &closed_form(&x, p)) < bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn matches_closed_forms_at_defaults(x in 1.0f64..3.0) {
        let ledger = default_ledger();
        let p = ledger.config().precision;
        let x = p.real(x);
        prop_assert!(abs_diff(&ledger.eval(&x).unwrap(), &closed_form(&x, p)) < 1e-12);
    }

    #[test]
    fn evaluation_stays_positive(x in 1.0f64..200.99) {
        let ledger = default_ledger();
        let v = ledger.eval(&ledger.config().precision.real(x)).unwrap();
        prop_assert!(v > 0.5 && v <= 1);
    }
}

fn default_ledger() -> &'static OmegaLedger {
    use std::sync::OnceLock;
    static LEDGER: OnceLock<OmegaLedger> = OnceLock::new();
    LEDGER.get_or_init(|| OmegaLedger::build(QuadratureConfig::default()).unwrap())
}

#[test]
fn stays_in_selberg_band() {
    let ledger = default_ledger();
    let p = ledger.config().precision;
    let limit = exp_neg_gamma(30).unwrap().to_f64();
    let mut x = 4.01;
    while x <= 200.0 {
        let v = ledger.eval(&p.real(x)).unwrap().to_f64();
        assert!((v - limit).abs() < 1e-4, "x = {x}");
        x += 0.73;
    }
}

#[test]
fn coefficients_decay() {
    let ledger = default_ledger();
    let threshold = 10f64.powi(-(ledger.config().target_digits as i32 + 2));
    for block in ledger.blocks() {
        let mags: Vec<f64> = block.coeffs().iter().map(|c| c.to_f64().abs()).collect();
        // far blocks are flat to ~1e-24 and wobble below the truncation
        // threshold; monotone decay is only checked above it
        let settled = |w: &[f64]| w[1] <= w[0] || w[1] < threshold;
        let start = (1..=10)
            .find(|&i0| mags[i0..].windows(2).all(settled))
            .unwrap_or_else(|| panic!("block {} never settles", block.n()));
        assert!(start <= 10);
        assert!(mags[mags.len() - 1] < threshold);
    }
    assert!(ledger.truncation_warnings().is_empty());
}

#[test]
fn trapezoid_converges_at_second_order() {
    let value = |grid_log2: u32| {
        let config = QuadratureConfig {
            grid_log2,
            max_interval: 30,
            ..Default::default()
        };
        let ledger = OmegaLedger::build(config).unwrap();
        moment_constant(&ledger, 2).unwrap().value.to_f64()
    };
    let (coarse, mid, fine) = (value(6), value(8), value(10));
    let near = (mid - fine).abs();
    let far = (coarse - mid).abs();
    assert!(near <= far / 3.0, "{far:e} then {near:e}");
    // halving the step twice cuts the error by about 16
    assert!(
        far / near > 12.0 && far / near < 20.0,
        "ratio {}",
        far / near
    );
}

#[test]
fn constant_is_stable_under_truncation_point() {
    let short = OmegaLedger::build(QuadratureConfig {
        max_interval: 50,
        ..Default::default()
    })
    .unwrap();
    let c = moment_constant(&short, 2).unwrap();
    assert!((c.value.to_f64() - 1.3070).abs() < 2e-3);
    let full = moment_constant(default_ledger(), 2).unwrap();
    assert!((c.value.to_f64() - full.value.to_f64()).abs() < 1e-5);
}
