//! Truncated Taylor expansions on unit intervals.
//!
//! Block `n` represents a function on `[n, n+1)` as `Σ_{i<=J} c_i z^i` in the
//! centred variable `z = 2(x - n) - 1 ∈ [-1, 1)`.

use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{PrecisionConfig, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorBlock {
    n: u32,
    coeffs: Vec<Real>,
}

impl TaylorBlock {
    pub fn new(n: u32, coeffs: Vec<Real>) -> Self {
        assert!(n >= 1, "blocks start at x = 1");
        assert!(!coeffs.is_empty(), "a block needs at least one coefficient");
        TaylorBlock { n, coeffs }
    }

    /// Left end of the interval covered by this block.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.coeffs[0].prec()
    }

    /// Horner evaluation at `z`.
    pub fn eval(&self, z: &Real) -> Real {
        let mut acc = Float::with_val(self.prec(), &self.coeffs[self.degree()]);
        for c in self.coeffs[..self.degree()].iter().rev() {
            acc.mul_add_mut(z, c);
        }
        acc
    }

    /// Value at the left end, `z = -1`.
    pub fn left_value(&self) -> Real {
        let mut acc = Float::new(self.prec());
        for (i, c) in self.coeffs.iter().enumerate() {
            if i % 2 == 0 {
                acc += c;
            } else {
                acc -= c;
            }
        }
        acc
    }

    /// Limit at the right end, `z -> 1`: the plain coefficient sum.
    pub fn right_limit(&self) -> Real {
        let mut acc = Float::new(self.prec());
        for c in &self.coeffs {
            acc += c;
        }
        acc
    }

    pub fn last_coeff_abs(&self) -> Real {
        Float::with_val(self.prec(), self.coeffs[self.degree()].abs_ref())
    }
}

/// Splits `x` into its block index `⌊x⌋` and centred offset `z`.
/// Integers map to the left end (`z = -1`) of their own block.
pub fn locate(x: &Real, max_interval: u32, prec: PrecisionConfig) -> Result<(u32, Real)> {
    let upper = f64::from(max_interval) + 1.0;
    if x.is_nan() || *x < 1 || *x >= upper {
        return Err(Error::out_of_range(
            "x",
            x.to_f64(),
            format!("[1, {max_interval}+1)"),
        ));
    }
    let n = Float::with_val(prec.bits(), x.floor_ref())
        .to_u32_saturating()
        .expect("finite floor");
    let mut z = Float::with_val(prec.bits(), x - n);
    z <<= 1;
    z -= 1;
    Ok((n, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    #[test]
    fn horner_and_end_values() {
        let p = prec();
        // 1 + 2z + 3z^2
        let block = TaylorBlock::new(4, vec![p.real(1), p.real(2), p.real(3)]);
        assert_eq!(block.eval(&p.real(0.5)), 2.75);
        assert_eq!(block.left_value(), 2);
        assert_eq!(block.right_limit(), 6);
        assert_eq!(block.eval(&p.real(-1)), block.left_value());
        assert_eq!(block.last_coeff_abs(), 3);
        assert_eq!(block.degree(), 2);
    }

    #[test]
    fn locate_maps_into_centred_variable() {
        let p = prec();
        let (n, z) = locate(&p.real(2.5), 10, p).unwrap();
        assert_eq!((n, z.to_f64()), (2, 0.0));
        let (n, z) = locate(&p.real(3), 10, p).unwrap();
        assert_eq!((n, z.to_f64()), (3, -1.0));
        let (n, z) = locate(&p.real(10.75), 10, p).unwrap();
        assert_eq!((n, z.to_f64()), (10, 0.5));
        assert!(locate(&p.real(11), 10, p).is_err());
        assert!(locate(&p.real(0.99), 10, p).is_err());
    }
}
