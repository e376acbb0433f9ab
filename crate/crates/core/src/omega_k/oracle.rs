//! Independent `f64` reference for Ω_K, built by direct quadrature of the
//! integral equation rather than from Taylor blocks.
//!
//! Each unit interval `[m, m+1]` is tabulated on a grid of step `1/512`.
//! Consecutive grid values differ by an adaptive Simpson integral of
//! `K Ω_K(u-1)/(u-1)`, where `Ω_K(u-1)` is read off the previous interval's
//! table by degree-9 Lagrange interpolation. The interpolation error is
//! checked against a degree-7 interpolant at every call.

use crate::error::{Error, Result};

const STEPS: usize = 512;
const STENCIL: usize = 10;
const LOW_STENCIL: usize = 8;
const MAX_DEPTH: u32 = 40;
const MAX_EVALS: u64 = 50_000_000;
pub const MAX_X: f64 = 30.0;
pub const MIN_TOL: f64 = 1e-12;

struct Tabulation {
    k: f64,
    // tables[m - 1][j] = Ω_K(m + j/STEPS)
    tables: Vec<Vec<f64>>,
    segment_tol: f64,
    interp_tol: f64,
    evals: u64,
}

impl Tabulation {
    /// Ω_K on `[m, m+1]` from the finished table of interval `m`.
    fn interpolate(&mut self, m: usize, y: f64) -> Result<f64> {
        let table = &self.tables[m - 1];
        let t = (y - m as f64) * STEPS as f64;
        let high = lagrange(table, t, STENCIL);
        let low = lagrange(table, t, LOW_STENCIL);
        // below a few ulps the two interpolants differ by rounding alone
        let allowed = self.interp_tol.max(32.0 * f64::EPSILON * high.abs());
        if (high - low).abs() > allowed {
            return Err(Error::BudgetExceeded(format!(
                "interpolation error {:.3e} above {:.3e} at {y}",
                (high - low).abs(),
                allowed
            )));
        }
        Ok(high)
    }

    /// `K Ω_K(u-1)/(u-1)` for `u` in `[m+1, m+2]`.
    fn integrand(&mut self, m: usize, u: f64) -> Result<f64> {
        self.evals += 1;
        if self.evals > MAX_EVALS {
            return Err(Error::BudgetExceeded(format!(
                "more than {MAX_EVALS} integrand evaluations"
            )));
        }
        let y = u - 1.0;
        Ok(self.k * self.interpolate(m, y)? / y)
    }

    fn simpson(&mut self, m: usize, a: f64, b: f64, tol: f64) -> Result<f64> {
        let fa = self.integrand(m, a)?;
        let fb = self.integrand(m, b)?;
        let mid = 0.5 * (a + b);
        let fm = self.integrand(m, mid)?;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        self.refine(m, a, b, fa, fm, fb, whole, tol, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        m: usize,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let left_mid = 0.5 * (a + mid);
        let right_mid = 0.5 * (mid + b);
        let flm = self.integrand(m, left_mid)?;
        let frm = self.integrand(m, right_mid)?;
        let left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::BudgetExceeded(format!(
                "adaptive Simpson did not converge on [{a}, {b}]"
            )));
        }
        let half = 0.5 * tol;
        Ok(self.refine(m, a, mid, fa, flm, fm, left, half, depth + 1)?
            + self.refine(m, mid, b, fm, frm, fb, right, half, depth + 1)?)
    }

    fn extend(&mut self) -> Result<()> {
        let m = self.tables.len() + 1;
        if m == 1 {
            self.tables.push(vec![1.0; STEPS + 1]);
            return Ok(());
        }
        let mut values = Vec::with_capacity(STEPS + 1);
        let mut current = *self.tables[m - 2].last().expect("non-empty table");
        let mut carry = 0.0;
        values.push(current);
        for j in 0..STEPS {
            let a = m as f64 + j as f64 / STEPS as f64;
            let b = m as f64 + (j + 1) as f64 / STEPS as f64;
            // compensated running sum
            let step = self.simpson(m - 1, a, b, self.segment_tol)? - carry;
            let next = current + step;
            carry = (next - current) - step;
            current = next;
            values.push(current);
        }
        self.tables.push(values);
        Ok(())
    }

    fn value(&mut self, x: f64) -> Result<f64> {
        let m = x.floor() as usize;
        while self.tables.len() < m {
            self.extend()?;
        }
        let offset = (x - m as f64) * STEPS as f64;
        let j = (offset.floor() as usize).min(STEPS);
        let start = self.tables[m - 1][j];
        let a = m as f64 + j as f64 / STEPS as f64;
        if m == 1 || x <= a {
            return Ok(start);
        }
        Ok(start + self.simpson(m - 1, a, x, self.segment_tol)?)
    }
}

/// Lagrange interpolation of equally spaced samples at fractional index `t`,
/// using `width` consecutive nodes centred on `t` where possible.
fn lagrange(samples: &[f64], t: f64, width: usize) -> f64 {
    let last = samples.len() - 1;
    let centre = t.floor() as isize - (width as isize / 2 - 1);
    let first = centre.clamp(0, (last + 1 - width) as isize) as usize;
    let mut total = 0.0;
    for (i, sample) in samples.iter().enumerate().skip(first).take(width) {
        let mut weight = 1.0;
        for j in first..first + width {
            if j != i {
                weight *= (t - j as f64) / (i as f64 - j as f64);
            }
        }
        total += weight * sample;
    }
    total
}

/// Ω_K(x) to within `tol` (absolute) for `1 <= x <= 30`.
pub fn oracle_quadrature(k: f64, x: f64, tol: f64) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::out_of_range("K", k, "(0, ∞)"));
    }
    if !(1.0..=MAX_X).contains(&x) {
        return Err(Error::out_of_range("x", x, format!("[1, {MAX_X}]")));
    }
    if tol.is_nan() || tol < MIN_TOL {
        return Err(Error::out_of_range(
            "tolerance",
            tol,
            format!(">= {MIN_TOL:e}"),
        ));
    }
    // An error made on interval m is carried into later ones through the
    // integral with weight K/(u-1), so it grows by at most Π (1 + K/m) <= x^K.
    // Every interval contributes, hence the extra factor of x.
    let intervals = x.ceil();
    let growth = intervals.powf(1.0 + k);
    let mut tab = Tabulation {
        k,
        tables: Vec::new(),
        segment_tol: tol / (4.0 * growth * STEPS as f64),
        interp_tol: tol / (4.0 * growth),
        evals: 0,
    };
    tab.value(x)
}
