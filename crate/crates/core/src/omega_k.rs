//! The generalized Buchstab function Ω_K.
//!
//! `Ω_K = 1` on `[1, 2)` and `Ω_K(x) = 1 + K ∫_2^x Ω_K(u-1)/(u-1) du` beyond.
//! On `[2, 3)` this is `1 + K ln(x - 1)`. Later blocks follow from the
//! previous one through the convolution
//!
//! ```text
//! α_i      = Σ_{j<=i} (-1)^{i-j} (2n-1)^{-(i-j)} c[n-1][j]
//! c[n][i]  = K α_{i-1} / ((2n-1) i)                                   (i >= 1)
//! c[n][0]  = Σ_i c[n-1][i] − K/(2n-1) Σ_i (-1)^{i+1} α_i/(i+1)
//! ```
//!
//! `1/Ω_K(x)` is the limiting proportion of objects whose smallest component
//! is large (at least a `1/x` fraction of the size).

pub mod oracle;

use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{ln_real, rational_to_real, PrecisionConfig, Rational, Real};
use crate::omega::{check_chain, QuadratureConfig};
use crate::taylor::{locate, TaylorBlock};

pub type OmegaKBlock = TaylorBlock;

/// `α_0 ..= α_J` feeding block `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaVector(Vec<Real>);

impl AlphaVector {
    pub fn as_slice(&self) -> &[Real] {
        &self.0
    }
}

/// Parses the class parameter: a decimal (`0.5`) or a fraction (`1/2`).
pub fn parse_k(text: &str, prec: PrecisionConfig) -> Result<Real> {
    let text = text.trim();
    let value = if text.contains('/') {
        let q: Rational = text
            .parse()
            .map_err(|e| Error::InvalidArgument(format!("cannot parse K = {text:?}: {e}")))?;
        rational_to_real(&q, prec)
    } else {
        prec.parse(text)?
    };
    if value <= 0 {
        return Err(Error::out_of_range("K", text, "(0, ∞)"));
    }
    Ok(value)
}

pub fn seed_block1(degree: u32, prec: PrecisionConfig) -> OmegaKBlock {
    let mut coeffs = vec![prec.zero(); degree as usize + 1];
    coeffs[0] = prec.real(1);
    TaylorBlock::new(1, coeffs)
}

/// Block 2 from the closed form `1 + K ln(x - 1)`: with `x = 5/2 + z/2`,
/// `Ω_K = 1 + K ln(3/2) + K ln(1 + z/3)`.
pub fn seed_block2(k: &Real, degree: u32, prec: PrecisionConfig) -> Result<OmegaKBlock> {
    if *k <= 0 {
        return Err(Error::out_of_range("K", k.to_f64(), "(0, ∞)"));
    }
    let bits = prec.bits();
    let three_halves = rational_to_real(&Rational::from((3, 2)), prec);
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    let mut c0 = ln_real(&three_halves, prec)?;
    c0 *= k;
    c0 += 1;
    coeffs.push(c0);
    // K (-1)^{i-1} / (i 3^i)
    let mut power = Float::with_val(bits, k);
    for i in 1..=degree {
        power /= 3;
        let mut c = Float::with_val(bits, &power / i);
        if i % 2 == 0 {
            c = -c;
        }
        coeffs.push(c);
    }
    Ok(TaylorBlock::new(2, coeffs))
}

pub fn alpha(prev: &OmegaKBlock, n: u32) -> Result<AlphaVector> {
    if n < 3 {
        return Err(Error::out_of_range("block", n, ">= 3"));
    }
    check_successor(prev, n)?;
    Ok(alpha_unchecked(prev, n))
}

fn check_successor(prev: &OmegaKBlock, n: u32) -> Result<()> {
    if prev.n() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "block {} does not precede block {n}",
            prev.n()
        )));
    }
    Ok(())
}

fn alpha_unchecked(prev: &OmegaKBlock, n: u32) -> AlphaVector {
    let bits = prev.prec();
    let ratio = Float::with_val(bits, -1) / (2 * n - 1);
    // α_i = c_i + ratio · α_{i-1}
    let mut out: Vec<Real> = Vec::with_capacity(prev.coeffs().len());
    for (i, c) in prev.coeffs().iter().enumerate() {
        let mut a = Float::with_val(bits, c);
        if i > 0 {
            a += Float::with_val(bits, &out[i - 1] * &ratio);
        }
        out.push(a);
    }
    AlphaVector(out)
}

/// Block `n` from block `n - 1`, for `n >= 3`.
pub fn advance(prev: &OmegaKBlock, k: &Real) -> Result<OmegaKBlock> {
    if prev.n() < 2 {
        return Err(Error::out_of_range("block", prev.n() + 1, ">= 3"));
    }
    Ok(advance_unchecked(prev, k))
}

fn advance_unchecked(prev: &OmegaKBlock, k: &Real) -> OmegaKBlock {
    let n = prev.n() + 1;
    let bits = prev.prec();
    let alphas = alpha_unchecked(prev, n);
    let alphas = alphas.as_slice();
    let scale = Float::with_val(bits, k / (2 * n - 1));

    let mut correction = Float::new(bits);
    for (i, a) in alphas.iter().enumerate() {
        // (-1)^{i+1} α_i / (i+1)
        let term = Float::with_val(bits, a / (i as u32 + 1));
        if i % 2 == 0 {
            correction -= term;
        } else {
            correction += term;
        }
    }
    let mut c0 = prev.right_limit();
    c0 -= correction * &scale;

    let mut coeffs = Vec::with_capacity(alphas.len());
    coeffs.push(c0);
    for i in 1..alphas.len() {
        let c = Float::with_val(bits, &alphas[i - 1] * &scale) / i as u32;
        coeffs.push(c);
    }
    TaylorBlock::new(n, coeffs)
}

/// Taylor blocks of Ω_K, grown on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaKLedger {
    k_text: String,
    k: Real,
    degree: u32,
    precision: PrecisionConfig,
    target_digits: u32,
    blocks: Vec<OmegaKBlock>,
}

impl OmegaKLedger {
    /// Builds blocks `1 ..= config.max_interval`. Only the Taylor degree,
    /// precision, target digits and interval count of `config` are used.
    pub fn build(k_text: &str, config: &QuadratureConfig) -> Result<Self> {
        if config.taylor_degree < 8 {
            return Err(Error::out_of_range(
                "Taylor degree",
                config.taylor_degree,
                ">= 8",
            ));
        }
        if config.max_interval < 2 {
            return Err(Error::out_of_range(
                "max interval",
                config.max_interval,
                ">= 2",
            ));
        }
        let prec = config.precision;
        let k = parse_k(k_text, prec)?;
        let blocks = vec![
            seed_block1(config.taylor_degree, prec),
            seed_block2(&k, config.taylor_degree, prec)?,
        ];
        let mut ledger = OmegaKLedger {
            k_text: k_text.trim().to_string(),
            k,
            degree: config.taylor_degree,
            precision: prec,
            target_digits: config.target_digits,
            blocks,
        };
        ledger.extend_to(config.max_interval);
        Ok(ledger)
    }

    pub fn from_blocks(
        k_text: &str,
        config: &QuadratureConfig,
        blocks: Vec<OmegaKBlock>,
    ) -> Result<Self> {
        check_chain(&blocks, config.max_interval, config.taylor_degree)?;
        Ok(OmegaKLedger {
            k_text: k_text.trim().to_string(),
            k: parse_k(k_text, config.precision)?,
            degree: config.taylor_degree,
            precision: config.precision,
            target_digits: config.target_digits,
            blocks,
        })
    }

    /// Grows the ledger so that it covers `[1, n+1)`.
    pub fn extend_to(&mut self, n: u32) {
        while (self.blocks.len() as u32) < n {
            let next = advance_unchecked(self.blocks.last().expect("seeded"), &self.k);
            self.blocks.push(next);
        }
    }

    /// Grows the ledger so that `x` is in range.
    pub fn ensure_covers(&mut self, x: &Real) -> Result<()> {
        if x.is_nan() || *x < 1 {
            return Err(Error::out_of_range("x", x.to_f64(), ">= 1"));
        }
        let floor = Float::with_val(self.precision.bits(), x.floor_ref());
        let needed = floor
            .to_u32_saturating()
            .filter(|&n| n < u32::MAX / 2)
            .ok_or_else(|| Error::out_of_range("x", x.to_f64(), "< 2^31"))?;
        self.extend_to(needed);
        Ok(())
    }

    pub fn k(&self) -> &Real {
        &self.k
    }

    pub fn k_text(&self) -> &str {
        &self.k_text
    }

    pub fn max_interval(&self) -> u32 {
        self.blocks.len() as u32
    }

    pub fn precision(&self) -> PrecisionConfig {
        self.precision
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn target_digits(&self) -> u32 {
        self.target_digits
    }

    pub fn blocks(&self) -> &[OmegaKBlock] {
        &self.blocks
    }

    pub fn block(&self, n: u32) -> Result<&OmegaKBlock> {
        if n == 0 || n > self.max_interval() {
            return Err(Error::out_of_range(
                "block",
                n,
                format!("1..={}", self.max_interval()),
            ));
        }
        Ok(&self.blocks[(n - 1) as usize])
    }

    pub fn truncation_warnings(&self) -> Vec<u32> {
        let config = QuadratureConfig {
            target_digits: self.target_digits,
            precision: self.precision,
            ..QuadratureConfig::default()
        };
        let threshold = config.truncation_threshold();
        self.blocks
            .iter()
            .filter(|b| b.last_coeff_abs() >= threshold)
            .map(TaylorBlock::n)
            .collect()
    }

    pub fn eval(&self, x: &Real) -> Result<Real> {
        let (n, z) = locate(x, self.max_interval(), self.precision)?;
        Ok(self.block(n)?.eval(&z))
    }

    /// `1/Ω_K(x)` for `x > 1`.
    pub fn proportion_large_smallest(&self, x: &Real) -> Result<Real> {
        if x.is_nan() || *x <= 1 {
            return Err(Error::out_of_range("x", x.to_f64(), "(1, ∞)"));
        }
        let value = self.eval(x)?;
        Ok(Float::with_val(self.precision.bits(), 1) / value)
    }
}

pub fn eval_omega_k(ledger: &OmegaKLedger, x: &Real) -> Result<Real> {
    ledger.eval(x)
}

pub fn proportion_large_smallest(ledger: &OmegaKLedger, x: &Real) -> Result<Real> {
    ledger.proportion_large_smallest(x)
}

/// `{1, …, 10} ∪ {16, 32, …, 8192}`.
pub fn standard_grid() -> Vec<u32> {
    (1..=10).chain((4..=13).map(|e| 1u32 << e)).collect()
}

/// `(x, Ω_K(x))` rows; the ledger is grown to the largest `x`.
pub fn table(k_text: &str, xs: &[Real], config: &QuadratureConfig) -> Result<Vec<(Real, Real)>> {
    let mut ledger = OmegaKLedger::build(k_text, config)?;
    for x in xs {
        ledger.ensure_covers(x)?;
    }
    xs.iter()
        .map(|x| Ok((x.clone(), ledger.eval(x)?)))
        .collect()
}
