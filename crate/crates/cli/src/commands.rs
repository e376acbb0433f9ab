use std::fs;

use buchstab::enumeration::{build_table, ComponentClass, CountTable};
use buchstab::numeric::{format_significant, rational_to_real, PrecisionConfig, Rational, Real};
use buchstab::omega::{moment_constant, OmegaLedger, QuadratureConfig};
use buchstab::omega_k::{standard_grid, OmegaKLedger};
use buchstab::output::OutputTable;
use buchstab::store::{ArtifactKind, ArtifactParams, Cache, StoredArtifact};
use buchstab::{Error, Result};
use rug::Float;

use crate::GlobalArgs;

/// Largest argument accepted by the Ω_K commands; each unit of x costs one
/// Taylor block.
const MAX_OMEGA_K_X: u32 = 1 << 20;

pub fn emit(g: &GlobalArgs, table: &OutputTable) -> Result<()> {
    let text = table.render(g.format);
    match &g.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn open_cache(g: &GlobalArgs) -> Result<Option<Cache>> {
    g.cache_dir.as_ref().map(Cache::open).transpose()
}

fn require_cache(g: &GlobalArgs) -> Result<Cache> {
    open_cache(g)?.ok_or_else(|| Error::InvalidArgument("--cache-dir is required".into()))
}

fn precision(g: &GlobalArgs) -> Result<PrecisionConfig> {
    PrecisionConfig::new(g.precision)
}

fn fmt(g: &GlobalArgs, x: &Real) -> String {
    format_significant(x, g.digits as usize)
}

/// Loads an artifact from the cache or computes and stores it.
fn cached<T>(
    g: &GlobalArgs,
    kind: ArtifactKind,
    params: &ArtifactParams,
    decode: impl Fn(&StoredArtifact) -> Result<T>,
    compute: impl FnOnce() -> Result<T>,
    encode: impl Fn(&T) -> StoredArtifact,
) -> Result<T> {
    let cache = open_cache(g)?;
    if let Some(cache) = &cache {
        if let Some(artifact) = cache.load(kind, params)? {
            return decode(&artifact);
        }
    }
    let value = compute()?;
    if let Some(cache) = &cache {
        cache.store(&encode(&value))?;
    }
    Ok(value)
}

fn count_table(g: &GlobalArgs, class: &ComponentClass, n: u32) -> Result<CountTable> {
    cached(
        g,
        ArtifactKind::CountTable,
        &ArtifactParams::for_count_table(class, n),
        StoredArtifact::to_count_table,
        || build_table(class, n),
        StoredArtifact::from_count_table,
    )
}

fn omega_ledger(g: &GlobalArgs) -> Result<OmegaLedger> {
    let config = g.quadrature()?;
    config.validate()?;
    cached(
        g,
        ArtifactKind::OmegaLedger,
        &ArtifactParams::for_omega(&config),
        StoredArtifact::to_omega_ledger,
        || OmegaLedger::build(config),
        StoredArtifact::from_omega_ledger,
    )
}

fn omega_k_ledger(g: &GlobalArgs, k: &str, max_interval: u32) -> Result<OmegaKLedger> {
    let config = QuadratureConfig {
        max_interval,
        ..g.quadrature()?
    };
    cached(
        g,
        ArtifactKind::OmegaKLedger,
        &ArtifactParams::for_omega_k(k, &config),
        StoredArtifact::to_omega_k_ledger,
        || OmegaKLedger::build(k, &config),
        StoredArtifact::from_omega_k_ledger,
    )
}

fn parse_points(prec: PrecisionConfig, xs: &[String]) -> Result<Vec<(String, Real)>> {
    xs.iter()
        .map(|x| Ok((x.trim().to_string(), prec.parse(x)?)))
        .collect()
}

/// Blocks needed so that every point is in range.
fn blocks_for(g: &GlobalArgs, points: &[(String, Real)]) -> Result<u32> {
    let mut needed = g.max_interval.max(2);
    for (text, x) in points {
        if x.is_nan() || *x < 1 {
            return Err(Error::OutOfRange {
                what: "x",
                value: text.clone(),
                range: "[1, ∞)".into(),
            });
        }
        if *x >= MAX_OMEGA_K_X {
            return Err(Error::OutOfRange {
                what: "x",
                value: text.clone(),
                range: format!("[1, {MAX_OMEGA_K_X})"),
            });
        }
        let floor = Float::with_val(x.prec(), x.floor_ref());
        needed = needed.max(floor.to_u32_saturating().unwrap_or(MAX_OMEGA_K_X));
    }
    Ok(needed)
}

fn k_values(g: &GlobalArgs, default: &[&str]) -> Vec<String> {
    if g.k.is_empty() {
        default.iter().map(|k| k.to_string()).collect()
    } else {
        g.k.iter().map(|k| k.trim().to_string()).collect()
    }
}

pub fn counts(g: &GlobalArgs, n: u32, class: &str) -> Result<OutputTable> {
    let class = ComponentClass::from_name(class)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown class {class:?}")))?;
    let table = count_table(g, &class, n)?;
    let mut out =
        OutputTable::new(std::iter::once("n".to_string()).chain((1..=n).map(|k| k.to_string())));
    for (m, row) in (1u32..).zip(table.rows()) {
        let cells = row
            .iter()
            .map(|c| c.to_string())
            .chain(std::iter::repeat_n(String::new(), (n - m) as usize));
        out.push_row(std::iter::once(m.to_string()).chain(cells));
    }
    Ok(out)
}

pub fn dist(g: &GlobalArgs, n: u32) -> Result<OutputTable> {
    let prec = precision(g)?;
    let table = count_table(g, &ComponentClass::permutations(), n)?;
    let law = table.distribution(n)?;
    let mut out = OutputTable::new(["k", "count", "probability", "probability_decimal"]);
    for ((k, count), p) in (1u32..).zip(table.row(n)?).zip(&law.probs) {
        out.push_row([
            k.to_string(),
            count.to_string(),
            p.to_string(),
            fmt(g, &rational_to_real(p, prec)),
        ]);
    }
    Ok(out)
}

pub fn tail(g: &GlobalArgs, n: u32, sizes: &[u32]) -> Result<OutputTable> {
    let prec = precision(g)?;
    let table = count_table(g, &ComponentClass::permutations(), n)?;
    let ledger = omega_ledger(g)?;
    let mut out = OutputTable::new(["n", "k", "tail", "tail_decimal", "omega_estimate"]);
    for &k in sizes {
        let p = table.tail_probability(n, k)?;
        let ratio = rational_to_real(&Rational::from((n, k)), prec);
        // beyond the ledger the estimate is left blank
        let estimate = match ledger.eval(&ratio) {
            Ok(w) => fmt(g, &(w / k)),
            Err(Error::OutOfRange { .. }) => String::new(),
            Err(e) => return Err(e),
        };
        out.push_row([
            n.to_string(),
            k.to_string(),
            p.to_string(),
            fmt(g, &rational_to_real(&p, prec)),
            estimate,
        ]);
    }
    Ok(out)
}

pub fn variance_series(g: &GlobalArgs, n: u32) -> Result<OutputTable> {
    let prec = precision(g)?;
    let table = count_table(g, &ComponentClass::permutations(), n)?;
    let mut out = OutputTable::new(["n", "variance", "variance_over_n"]);
    for m in 1..=n {
        let report = table.variance_at(m, prec)?;
        out.push_row([
            m.to_string(),
            report.variance.to_string(),
            fmt(g, &report.variance_over_n),
        ]);
    }
    Ok(out)
}

pub fn omega(g: &GlobalArgs, xs: &[String]) -> Result<OutputTable> {
    let points = parse_points(precision(g)?, xs)?;
    let ledger = omega_ledger(g)?;
    let mut out = OutputTable::new(["x", "omega"]);
    for (text, x) in &points {
        out.push_row([text.clone(), fmt(g, &ledger.eval(x)?)]);
    }
    Ok(out)
}

pub fn constant(g: &GlobalArgs, moment: u32) -> Result<OutputTable> {
    let ledger = omega_ledger(g)?;
    let c = moment_constant(&ledger, moment)?;
    let mut out = OutputTable::new(["moment", "value", "error_budget", "first_block", "tail"]);
    out.push_row([
        moment.to_string(),
        fmt(g, &c.value),
        format_significant(&c.error_budget, 3),
        c.first_block.to_string(),
        fmt(g, &c.tail),
    ]);
    Ok(out)
}

pub fn omega_k(g: &GlobalArgs, xs: &[String]) -> Result<OutputTable> {
    let points = parse_points(precision(g)?, xs)?;
    let blocks = blocks_for(g, &points)?;
    let mut out = OutputTable::new(["k", "x", "omega_k", "proportion"]);
    for k in k_values(g, &["1"]) {
        let ledger = omega_k_ledger(g, &k, blocks)?;
        for (text, x) in &points {
            let value = ledger.eval(x)?;
            let proportion = if *x > 1 {
                fmt(g, &ledger.proportion_large_smallest(x)?)
            } else {
                String::new()
            };
            out.push_row([k.clone(), text.clone(), fmt(g, &value), proportion]);
        }
    }
    Ok(out)
}

pub fn omega_k_table(g: &GlobalArgs, xs: &[String]) -> Result<OutputTable> {
    let prec = precision(g)?;
    let xs: Vec<String> = if xs.is_empty() {
        standard_grid().iter().map(u32::to_string).collect()
    } else {
        xs.to_vec()
    };
    let points = parse_points(prec, &xs)?;
    let blocks = blocks_for(g, &points)?;
    let ks = k_values(g, &["1", "1/2"]);
    let mut columns = vec!["x".to_string()];
    columns.extend(ks.iter().map(|k| format!("K={k}")));
    let ledgers = ks
        .iter()
        .map(|k| omega_k_ledger(g, k, blocks))
        .collect::<Result<Vec<_>>>()?;
    let mut out = OutputTable::new(columns);
    for (text, x) in &points {
        let mut row = vec![text.clone()];
        for ledger in &ledgers {
            row.push(fmt(g, &ledger.eval(x)?));
        }
        out.push_row(row);
    }
    Ok(out)
}

pub fn cache_list(g: &GlobalArgs) -> Result<OutputTable> {
    let cache = require_cache(g)?;
    let mut out = OutputTable::new(["file", "kind", "params", "bytes"]);
    for entry in cache.list()? {
        let name = entry
            .path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push_row([
            name,
            entry.kind.as_str().to_string(),
            serde_json::to_string(&entry.params)?,
            entry.bytes.to_string(),
        ]);
    }
    Ok(out)
}

pub fn cache_clear(g: &GlobalArgs) -> Result<OutputTable> {
    let cache = require_cache(g)?;
    let removed = cache.clear()?;
    let mut out = OutputTable::new(["removed"]);
    out.push_row([removed.to_string()]);
    Ok(out)
}
