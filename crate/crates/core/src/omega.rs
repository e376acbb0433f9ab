//! The Buchstab function ω and the constants `ℓ ∫_1^∞ ω(t)/t^ℓ dt`.
//!
//! ω equals `1/x` on `[1, 2]` and satisfies `(x ω(x))' = ω(x - 1)` beyond.
//! Integrating the delay equation over one unit interval turns the Taylor
//! coefficients of block `n` into those of block `n + 1`:
//!
//! ```text
//! c[n+1][0] = Σ_i c[n][i] (2(n+1) + (-1)^i/(i+1)) / (2n+3)
//! c[n+1][i] = (c[n][i-1]/i − c[n+1][i-1]) / (2n+3)          (i >= 1)
//! ```
//!
//! The moment constants are then assembled block by block with the
//! trapezoidal rule on a dyadic grid, plus the exact first block and an
//! analytic tail `e^{-γ} ∫_{n*}^∞ t^{-ℓ} dt`.

use rug::ops::PowAssign;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    exp_neg_gamma, rational_to_real, PrecisionConfig, Rational, Real, EULER_GAMMA_DIGITS,
};
use crate::taylor::{locate, TaylorBlock};

pub type OmegaBlock = TaylorBlock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Trapezoid step is `2^-grid_log2`.
    pub grid_log2: u32,
    /// Last block `n*`; the ledger covers `[1, n*+1)`.
    pub max_interval: u32,
    /// Highest Taylor index `J`.
    pub taylor_degree: u32,
    pub precision: PrecisionConfig,
    /// Decimal digits the caller wants from evaluations; the last
    /// coefficient of every block should stay below `10^-(target_digits+2)`.
    pub target_digits: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            grid_log2: 12,
            max_interval: 200,
            taylor_degree: 40,
            precision: PrecisionConfig::default(),
            target_digits: 12,
        }
    }
}

impl QuadratureConfig {
    pub const MAX_GRID_LOG2: u32 = 24;

    pub fn validate(&self) -> Result<()> {
        if self.grid_log2 < 1 || self.grid_log2 > Self::MAX_GRID_LOG2 {
            return Err(Error::out_of_range(
                "grid exponent",
                self.grid_log2,
                format!("1..={}", Self::MAX_GRID_LOG2),
            ));
        }
        if self.max_interval < 5 {
            return Err(Error::out_of_range(
                "max interval",
                self.max_interval,
                ">= 5",
            ));
        }
        if self.taylor_degree < 8 {
            return Err(Error::out_of_range(
                "Taylor degree",
                self.taylor_degree,
                ">= 8",
            ));
        }
        Ok(())
    }

    pub(crate) fn truncation_threshold(&self) -> Real {
        let mut t = self.precision.real(10);
        t.pow_assign(-i64::from(self.target_digits + 2) as i32);
        t
    }
}

/// Block 1: `1/x` about `x = 3/2`, i.e. `c_i = (2/3)(-1/3)^i`.
pub fn seed_omega(degree: u32, prec: PrecisionConfig) -> OmegaBlock {
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    let mut c = rational_to_real(&Rational::from((2, 3)), prec);
    for _ in 0..=degree {
        coeffs.push(c.clone());
        c /= -3;
    }
    TaylorBlock::new(1, coeffs)
}

/// Block `n + 1` from block `n`.
pub fn advance_omega(block: &OmegaBlock) -> OmegaBlock {
    let n = block.n();
    let bits = block.prec();
    let prev = block.coeffs();
    let width = 2 * n + 3;

    let mut c0 = Float::new(bits);
    let two_n_plus_two = Float::with_val(bits, 2 * (n + 1));
    for (i, c) in prev.iter().enumerate() {
        // 2(n+1) + (-1)^i/(i+1)
        let mut factor = Float::with_val(bits, 1) / (i as u32 + 1);
        if i % 2 == 1 {
            factor = -factor;
        }
        factor += &two_n_plus_two;
        c0 += factor * c;
    }
    c0 /= width;

    let mut coeffs = Vec::with_capacity(prev.len());
    coeffs.push(c0);
    for i in 1..prev.len() {
        let mut next = Float::with_val(bits, &prev[i - 1] / i as u32);
        next -= &coeffs[i - 1];
        next /= width;
        coeffs.push(next);
    }
    TaylorBlock::new(n + 1, coeffs)
}

/// Taylor blocks of ω for `n = 1 ..= n*`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaLedger {
    config: QuadratureConfig,
    blocks: Vec<OmegaBlock>,
    truncated: Vec<u32>,
}

impl OmegaLedger {
    pub fn build(config: QuadratureConfig) -> Result<Self> {
        config.validate()?;
        let mut blocks = Vec::with_capacity(config.max_interval as usize);
        blocks.push(seed_omega(config.taylor_degree, config.precision));
        while blocks.len() < config.max_interval as usize {
            let next = advance_omega(blocks.last().expect("seeded"));
            blocks.push(next);
        }
        Ok(Self::assemble(config, blocks))
    }

    /// Reassembles a ledger from stored blocks, checking the chain shape.
    pub fn from_blocks(config: QuadratureConfig, blocks: Vec<OmegaBlock>) -> Result<Self> {
        config.validate()?;
        check_chain(&blocks, config.max_interval, config.taylor_degree)?;
        Ok(Self::assemble(config, blocks))
    }

    fn assemble(config: QuadratureConfig, blocks: Vec<OmegaBlock>) -> Self {
        let threshold = config.truncation_threshold();
        let truncated = blocks
            .iter()
            .filter(|b| b.last_coeff_abs() >= threshold)
            .map(TaylorBlock::n)
            .collect();
        OmegaLedger {
            config,
            blocks,
            truncated,
        }
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    pub fn blocks(&self) -> &[OmegaBlock] {
        &self.blocks
    }

    pub fn block(&self, n: u32) -> Result<&OmegaBlock> {
        if n == 0 || n > self.config.max_interval {
            return Err(Error::out_of_range(
                "block",
                n,
                format!("1..={}", self.config.max_interval),
            ));
        }
        Ok(&self.blocks[(n - 1) as usize])
    }

    /// Blocks whose last coefficient is above the truncation threshold.
    pub fn truncation_warnings(&self) -> &[u32] {
        &self.truncated
    }

    pub fn eval(&self, x: &Real) -> Result<Real> {
        let (n, z) = locate(x, self.config.max_interval, self.config.precision)?;
        Ok(self.block(n)?.eval(&z))
    }
}

pub(crate) fn check_chain(blocks: &[TaylorBlock], max_interval: u32, degree: u32) -> Result<()> {
    if blocks.len() != max_interval as usize {
        return Err(Error::CorruptPayload(format!(
            "expected {max_interval} blocks, found {}",
            blocks.len()
        )));
    }
    for (i, b) in blocks.iter().enumerate() {
        if b.n() as usize != i + 1 || b.degree() != degree as usize {
            return Err(Error::CorruptPayload(format!(
                "block {} is malformed",
                i + 1
            )));
        }
    }
    Ok(())
}

pub fn eval_omega(ledger: &OmegaLedger, x: &Real) -> Result<Real> {
    ledger.eval(x)
}

/// Trapezoid sums of `ω(t)/t^moment` over `[n, n+1]` at steps `δ` and `2δ`.
struct BlockTrapezoid {
    fine: Real,
    coarse: Real,
}

fn trapezoid(block: &OmegaBlock, grid_log2: u32, moment: u32) -> BlockTrapezoid {
    let bits = block.prec();
    let n = block.n();
    let points = 1u64 << grid_log2;
    let mut fine = Float::new(bits);
    let mut coarse = Float::new(bits);
    let mut previous = Float::new(bits);
    let mut previous_even = Float::new(bits);
    for i in 0..=points {
        // t = iδ, z = 2t - 1, x = n + t
        let mut t = Float::with_val(bits, i);
        t >>= grid_log2;
        let mut z = Float::with_val(bits, &t << 1u32);
        z -= 1;
        let y = block.eval(&z);
        let mut x = t;
        x += n;
        let mut denom = x;
        denom.pow_assign(moment);
        let f = y / denom;
        if i > 0 {
            fine += &previous;
            fine += &f;
        }
        if i % 2 == 0 {
            if i > 0 {
                coarse += &previous_even;
                coarse += &f;
            }
            previous_even.clone_from(&f);
        }
        previous = f;
    }
    // fine: Σ (f_i + f_{i+1}) · δ/2; coarse uses step 2δ.
    fine >>= grid_log2 + 1;
    coarse >>= grid_log2;
    BlockTrapezoid { fine, coarse }
}

/// Trapezoidal approximation of `∫_n^{n+1} ω(t)/t^moment dt` with step `2^-grid_log2`.
pub fn integrate_block(ledger: &OmegaLedger, n: u32, grid_log2: u32, moment: u32) -> Result<Real> {
    if !(1..=QuadratureConfig::MAX_GRID_LOG2).contains(&grid_log2) {
        return Err(Error::out_of_range("grid exponent", grid_log2, "1..=24"));
    }
    Ok(trapezoid(ledger.block(n)?, grid_log2, moment).fine)
}

/// `moment · ∫_1^∞ ω(t)/t^moment dt` with an error budget.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentConstant {
    pub moment: u32,
    pub value: Real,
    pub error_budget: Real,
    /// Exact contribution of `[1, 2]`, `1 - 2^-moment`.
    pub first_block: Rational,
    /// `moment · e^{-γ} n*^{1-moment} / (moment - 1)`.
    pub tail: Real,
}

pub fn moment_constant(ledger: &OmegaLedger, moment: u32) -> Result<MomentConstant> {
    if moment < 2 {
        return Err(Error::out_of_range("moment", moment, ">= 2"));
    }
    let config = ledger.config();
    let prec = config.precision;
    let bits = prec.bits();
    let n_star = config.max_interval;

    // ∫_1^2 t^{-moment-1} dt = (1 - 2^-moment)/moment, times `moment`.
    let first_block = Rational::from(1) - Rational::from((1, rug::Integer::from(1) << moment));

    let mut body = Float::new(bits);
    let mut quadrature_error = Float::new(bits);
    let mut truncation_error = Float::new(bits);
    for n in 2..n_star {
        let block = ledger.block(n)?;
        let sums = trapezoid(block, config.grid_log2, moment);
        quadrature_error += Float::with_val(bits, &sums.coarse - &sums.fine).abs() / 3u32;
        truncation_error += block.last_coeff_abs() * 2u32;
        body += sums.fine;
    }
    body *= moment;

    let gamma_digits = prec.digits().min(EULER_GAMMA_DIGITS);
    let e_neg_gamma = Float::with_val(bits, exp_neg_gamma(gamma_digits)?);
    let mut n_pow = prec.real(n_star);
    n_pow.pow_assign(moment - 1);
    let tail = e_neg_gamma * moment / (moment - 1) / &n_pow;

    let mut value = rational_to_real(&first_block, prec);
    value += &body;
    value += &tail;

    // |ω - e^{-γ}| < 1e-4 beyond 4 bounds the tail error.
    let tail_bound = prec.real(1e-4) * moment / (moment - 1) / &n_pow;
    let evaluations = u64::from(n_star) << config.grid_log2;
    let mut rounding = prec.real(10);
    rounding.pow_assign(1 - prec.digits() as i32);
    rounding *= evaluations;
    let mut error_budget = quadrature_error;
    error_budget += truncation_error;
    error_budget *= moment;
    error_budget += tail_bound;
    error_budget += rounding;

    Ok(MomentConstant {
        moment,
        value,
        error_budget,
        first_block,
        tail,
    })
}
