//! Exact enumeration of objects by smallest component size.
//!
//! `s(k, n)` counts objects of size `n` whose smallest component has size
//! exactly `k`. Rows are built in increasing `n`; every cell of row `n` is a
//! short sum over `i` (the number of components of size `k`) of a counting
//! coefficient times a suffix sum of an earlier row:
//!
//! ```text
//! s(k, n) = Σ_{i=1}^{⌊n/k⌋} A(n, k, i) · Σ_{j=k+1}^{n-ki} s(j, n-ki)  +  [k | n] · A(n, k, n/k)
//! A(n, k, i) = n! c_k^i / (i! (k!)^i (n-ki)!)
//! ```
//!
//! For permutations `c_k = (k-1)!`, which reduces the coefficient to
//! `n! / (i! k^i (n-ki)!)`. Suffix sums are cached per row, so each cell
//! costs `O(n/k)` big-integer products.

use rug::{Complete, Integer};

use crate::error::{Error, Result};
use crate::numeric::{factorial, rational_to_real, Natural, PrecisionConfig, Rational, Real};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Weights {
    Permutations,
    Derangements,
    /// `c_1, c_2, …` in order.
    Explicit(Vec<Natural>),
}

/// A labelled class described by its component counts `c_k`: the number of
/// distinct components that can be built on `k` labelled atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentClass {
    name: String,
    weights: Weights,
}

impl ComponentClass {
    pub const PERMUTATIONS: &'static str = "permutations";
    pub const DERANGEMENTS: &'static str = "derangements";

    /// Cycles: `c_k = (k-1)!`.
    pub fn permutations() -> Self {
        ComponentClass {
            name: Self::PERMUTATIONS.to_string(),
            weights: Weights::Permutations,
        }
    }

    /// Permutations without fixed points: `c_1 = 0`, `c_k = (k-1)!` otherwise.
    pub fn derangements() -> Self {
        ComponentClass {
            name: Self::DERANGEMENTS.to_string(),
            weights: Weights::Derangements,
        }
    }

    /// A class given by its first `weights.len()` component counts.
    pub fn with_weights(name: impl Into<String>, weights: Vec<Natural>) -> Result<Self> {
        let name = name.into();
        if Self::from_name(&name).is_some() {
            return Err(Error::InvalidArgument(format!(
                "class name {name:?} is reserved for a built-in class"
            )));
        }
        if name.is_empty() {
            return Err(Error::InvalidArgument(
                "class name must not be empty".into(),
            ));
        }
        if weights.iter().any(|w| *w < 0) {
            return Err(Error::InvalidArgument(
                "component counts must be non-negative".into(),
            ));
        }
        Ok(ComponentClass {
            name,
            weights: Weights::Explicit(weights),
        })
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            Self::PERMUTATIONS => Some(Self::permutations()),
            Self::DERANGEMENTS => Some(Self::derangements()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_permutations(&self) -> bool {
        self.weights == Weights::Permutations
    }

    pub fn explicit_weights(&self) -> Option<&[Natural]> {
        match &self.weights {
            Weights::Explicit(w) => Some(w),
            _ => None,
        }
    }

    /// Largest size for which `c_k` is known.
    fn max_size(&self) -> Option<u32> {
        match &self.weights {
            Weights::Explicit(w) => Some(w.len() as u32),
            _ => None,
        }
    }

    /// `c_k` for `k >= 1`.
    pub fn weight(&self, k: u32) -> Natural {
        assert!(k >= 1, "component sizes start at 1");
        match &self.weights {
            Weights::Permutations => factorial(k - 1),
            Weights::Derangements if k == 1 => Natural::new(),
            Weights::Derangements => factorial(k - 1),
            Weights::Explicit(w) => w[(k - 1) as usize].clone(),
        }
    }
}

/// Which form of the row recurrence to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recurrence {
    /// Generic coefficient `n! c_k^i / (i! (k!)^i (n-ki)!)`.
    Weighted,
    /// Permutation coefficient `n! / (i! k^i (n-ki)!)`; only valid for cycles.
    Permutation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableLimits {
    pub max_bytes: u64,
}

impl Default for TableLimits {
    fn default() -> Self {
        TableLimits { max_bytes: 4 << 30 }
    }
}

/// Rough resident size of a table with rows `1..=max_n`, cells plus suffix sums.
pub fn estimate_table_bytes(max_n: u32) -> u64 {
    const SLOT: f64 = 16.0; // size of an `Integer` header
    let mut log2_fact = 0.0f64;
    let mut total = 0.0f64;
    for n in 1..=max_n {
        log2_fact += f64::from(n).log2();
        let limb_bytes = (log2_fact / 64.0).ceil() * 8.0;
        let nonzero_cells = f64::from(n / 2 + 1);
        let slots = 2.0 * f64::from(n);
        total += slots * SLOT + (nonzero_cells + f64::from(n)) * limb_bytes;
        if total > u64::MAX as f64 / 2.0 {
            break;
        }
    }
    total.min(u64::MAX as f64 / 2.0) as u64
}

/// The triangular array `s(k, n)` for `1 <= k <= n <= max_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    class: ComponentClass,
    max_n: u32,
    /// `cells[n-1][k-1] = s(k, n)`
    cells: Vec<Vec<Natural>>,
    /// `suffix[n-1][k-1] = Σ_{j>=k} s(j, n)`
    suffix: Vec<Vec<Natural>>,
}

pub fn build_table(class: &ComponentClass, max_n: u32) -> Result<CountTable> {
    build_table_with(class, max_n, TableLimits::default())
}

pub fn build_table_with(
    class: &ComponentClass,
    max_n: u32,
    limits: TableLimits,
) -> Result<CountTable> {
    let recurrence = if class.is_permutations() {
        Recurrence::Permutation
    } else {
        Recurrence::Weighted
    };
    build_table_using(class, max_n, limits, recurrence)
}

pub fn build_table_using(
    class: &ComponentClass,
    max_n: u32,
    limits: TableLimits,
    recurrence: Recurrence,
) -> Result<CountTable> {
    if max_n == 0 {
        return Err(Error::out_of_range("N", 0, ">= 1"));
    }
    if recurrence == Recurrence::Permutation && !class.is_permutations() {
        return Err(Error::InvalidArgument(format!(
            "the permutation recurrence does not apply to class {:?}",
            class.name()
        )));
    }
    if let Some(known) = class.max_size() {
        if known < max_n {
            return Err(Error::InvalidArgument(format!(
                "class {:?} defines component counts only up to size {known}",
                class.name()
            )));
        }
    }
    let estimated = estimate_table_bytes(max_n);
    if estimated > limits.max_bytes {
        return Err(Error::ResourceCap {
            estimated,
            cap: limits.max_bytes,
        });
    }

    let mut table = CountTable {
        class: class.clone(),
        max_n,
        cells: Vec::with_capacity(max_n as usize),
        suffix: Vec::with_capacity(max_n as usize),
    };
    let mut weights = Vec::with_capacity(max_n as usize);
    let mut weight_factorials = Vec::with_capacity(max_n as usize);
    for k in 1..=max_n {
        weights.push(class.weight(k));
        if recurrence == Recurrence::Weighted {
            weight_factorials.push(factorial(k));
        }
    }
    for n in 1..=max_n {
        let row = compute_row(n, &table.suffix, recurrence, &weights, &weight_factorials);
        table.push_row(row);
    }
    Ok(table)
}

fn compute_row(
    n: u32,
    suffix: &[Vec<Natural>],
    recurrence: Recurrence,
    weights: &[Natural],
    factorials: &[Natural],
) -> Vec<Natural> {
    let mut row = vec![Natural::new(); n as usize];
    for k in 1..=n / 2 {
        let k_idx = (k - 1) as usize;
        let coeff_step = match recurrence {
            Recurrence::Permutation => CoeffStep::Cycles,
            Recurrence::Weighted => CoeffStep::Weighted {
                weight: &weights[k_idx],
                k_factorial: &factorials[k_idx],
            },
        };
        row[k_idx] = cell(n, k, suffix, coeff_step);
    }
    row[(n - 1) as usize] = weights[(n - 1) as usize].clone();
    row
}

#[derive(Clone, Copy)]
enum CoeffStep<'a> {
    Cycles,
    Weighted {
        weight: &'a Natural,
        k_factorial: &'a Natural,
    },
}

fn cell(n: u32, k: u32, suffix: &[Vec<Natural>], step: CoeffStep<'_>) -> Natural {
    let mut total = Natural::new();
    let mut coeff = Natural::from(1u32);
    let mut rest = n;
    for i in 1..=n / k {
        // A(n,k,i) = A(n,k,i-1) · (rest)_k · c_k / (k! · i) with rest = n - k(i-1)
        mul_falling(&mut coeff, rest, k);
        rest -= k;
        match step {
            CoeffStep::Cycles => coeff.div_exact_u_mut(k * i),
            CoeffStep::Weighted {
                weight,
                k_factorial,
            } => {
                coeff *= weight;
                coeff.div_exact_mut(k_factorial);
                coeff.div_exact_u_mut(i);
            }
        }
        if rest == 0 {
            total += &coeff;
        } else if rest > k {
            // rows of size `rest` with every component larger than k
            let tail = &suffix[(rest - 1) as usize][k as usize];
            total += (&coeff * tail).complete();
        } else if rest < k {
            break;
        }
    }
    total
}

/// Multiplies `acc` by `top · (top-1) ⋯ (top-count+1)`, batching the small
/// factors into machine words.
fn mul_falling(acc: &mut Natural, top: u32, count: u32) {
    let mut word: u64 = 1;
    for v in (top - count + 1)..=top {
        match word.checked_mul(u64::from(v)) {
            Some(w) => word = w,
            None => {
                *acc *= word;
                word = u64::from(v);
            }
        }
    }
    *acc *= word;
}

impl CountTable {
    fn push_row(&mut self, row: Vec<Natural>) {
        let mut sums = vec![Natural::new(); row.len()];
        let mut running = Natural::new();
        for (k, value) in row.iter().enumerate().rev() {
            running += value;
            sums[k] = running.clone();
        }
        self.cells.push(row);
        self.suffix.push(sums);
    }

    /// Rebuilds a table from stored rows, recomputing the suffix sums.
    pub fn from_rows(class: ComponentClass, rows: Vec<Vec<Natural>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::CorruptPayload("count table has no rows".into()));
        }
        let max_n = rows.len() as u32;
        let mut table = CountTable {
            class,
            max_n,
            cells: Vec::with_capacity(rows.len()),
            suffix: Vec::with_capacity(rows.len()),
        };
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::CorruptPayload(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    i + 1
                )));
            }
            table.push_row(row);
        }
        Ok(table)
    }

    pub fn class(&self) -> &ComponentClass {
        &self.class
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    pub fn row(&self, n: u32) -> Result<&[Natural]> {
        self.check_n(n)?;
        Ok(&self.cells[(n - 1) as usize])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Natural]> {
        self.cells.iter().map(Vec::as_slice)
    }

    pub fn cell(&self, k: u32, n: u32) -> Result<&Natural> {
        self.check_n(n)?;
        check_k(k, n)?;
        Ok(&self.cells[(n - 1) as usize][(k - 1) as usize])
    }

    /// `Σ_{j>=k} s(j, n)`: objects of size `n` whose components all have size `>= k`.
    pub fn suffix_sum(&self, n: u32, k: u32) -> Result<&Natural> {
        self.check_n(n)?;
        check_k(k, n)?;
        Ok(&self.suffix[(n - 1) as usize][(k - 1) as usize])
    }

    /// Total number of objects of size `n`.
    pub fn row_total(&self, n: u32) -> Result<&Natural> {
        self.suffix_sum(n, 1)
    }

    fn check_n(&self, n: u32) -> Result<()> {
        if n == 0 || n > self.max_n {
            return Err(Error::out_of_range("n", n, format!("1..={}", self.max_n)));
        }
        Ok(())
    }

    fn require_permutations(&self) -> Result<()> {
        if !self.class.is_permutations() {
            return Err(Error::InvalidArgument(format!(
                "probabilities are only defined here for permutations, not {:?}",
                self.class.name()
            )));
        }
        Ok(())
    }

    pub fn distribution(&self, n: u32) -> Result<SmallestDistribution> {
        self.require_permutations()?;
        let row = self.row(n)?;
        let total = factorial(n);
        let probs = row
            .iter()
            .map(|count| Rational::from((count.clone(), total.clone())))
            .collect();
        Ok(SmallestDistribution { n, probs })
    }

    /// `P{X_n >= k}`.
    pub fn tail_probability(&self, n: u32, k: u32) -> Result<Rational> {
        self.require_permutations()?;
        let count = self.suffix_sum(n, k)?;
        Ok(Rational::from((count.clone(), factorial(n))))
    }

    /// `E(X_n^power)`.
    pub fn moment(&self, n: u32, power: u32) -> Result<Rational> {
        self.require_permutations()?;
        if power == 0 {
            return Err(Error::out_of_range("moment order", 0, ">= 1"));
        }
        let sum = self.weighted_sum(n, power)?;
        Ok(Rational::from((sum, factorial(n))))
    }

    /// `Σ_k k^power s(k, n)`.
    fn weighted_sum(&self, n: u32, power: u32) -> Result<Natural> {
        let row = self.row(n)?;
        let mut sum = Natural::new();
        for (k, count) in (1u32..).zip(row) {
            if *count == 0 {
                continue;
            }
            let kp = Integer::u_pow_u(k, power).complete();
            sum += kp * count;
        }
        Ok(sum)
    }

    pub fn variance(&self, n: u32) -> Result<MomentReport> {
        self.variance_at(n, PrecisionConfig::default())
    }

    pub fn variance_at(&self, n: u32, prec: PrecisionConfig) -> Result<MomentReport> {
        self.require_permutations()?;
        let total = factorial(n);
        let first = self.weighted_sum(n, 1)?;
        let second = self.weighted_sum(n, 2)?;
        // (n! Σ k² s − (Σ k s)²) / (n!)²
        let numerator = (&total * &second).complete() - first.clone().square();
        let variance = Rational::from((numerator, total.clone().square()));
        let mean = Rational::from((first, total.clone()));
        let second_moment = Rational::from((second, total));
        let variance_over_n = rational_to_real(&(variance.clone() / n), prec);
        Ok(MomentReport {
            n,
            mean,
            second_moment,
            variance,
            variance_over_n,
        })
    }

    /// `(n, Var(X_n)/n)` for every row of the table.
    pub fn variance_series(&self, prec: PrecisionConfig) -> Result<Vec<(u32, Real)>> {
        (1..=self.max_n)
            .map(|n| Ok((n, self.variance_at(n, prec)?.variance_over_n)))
            .collect()
    }
}

fn check_k(k: u32, n: u32) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::out_of_range("k", k, format!("1..={n}")));
    }
    Ok(())
}

/// Exact law of the smallest component size; `probs[k-1] = P{X_n = k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallestDistribution {
    pub n: u32,
    pub probs: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub n: u32,
    pub mean: Rational,
    pub second_moment: Rational,
    pub variance: Rational,
    pub variance_over_n: Real,
}

pub const BRUTE_FORCE_MAX_N: u32 = 8;

/// Tallies the shortest cycle of every permutation of `n` points directly.
pub fn brute_force_counts(n: u32) -> Result<Vec<Natural>> {
    if n == 0 || n > BRUTE_FORCE_MAX_N {
        return Err(Error::out_of_range(
            "n",
            n,
            format!("1..={BRUTE_FORCE_MAX_N}"),
        ));
    }
    let n = n as usize;
    let mut tally = vec![0u64; n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut stack = vec![0usize; n];
    tally[shortest_cycle(&perm) - 1] += 1;
    // Heap's algorithm
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            tally[shortest_cycle(&perm) - 1] += 1;
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    Ok(tally.into_iter().map(Natural::from).collect())
}

fn shortest_cycle(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut best = perm.len();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            len += 1;
        }
        best = best.min(len);
    }
    best
}
