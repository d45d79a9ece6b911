//! Report TSV rows, figure-data tables and per-n aggregates.

use std::fmt::Write as _;

use anyhow::{bail, Context};
use mms_core::model::{ratio, Value};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::io::parse_rational;

pub const COLUMNS: [&str; 10] =
    ["id", "seed", "n", "m", "l", "mode", "achieved_alpha", "exact_ratio", "oracle_status", "wall_ms"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FixedHalf,
    Bisect,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FixedHalf => "fixed-half",
            Mode::Bisect => "bisect",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Off,
    Ok(Ratio),
    BudgetExceeded,
}

/// An exact `min_i v_i(A_i)/mu_i`; infinite when every share is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ratio {
    Finite(Value),
    Infinite,
}

impl Ratio {
    pub fn is_full(&self) -> bool {
        match self {
            Ratio::Finite(r) => *r >= Value::one(),
            Ratio::Infinite => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub id: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub mode: Mode,
    /// `None` when the solver failed.
    pub achieved_alpha: Option<Value>,
    pub oracle: Oracle,
    pub wall_ms: f64,
}

/// Renders a positive rational with 6 significant digits, truncating so a
/// value below a bin edge never prints at or above it.
pub fn sig6(x: &Value) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if x.is_negative() {
        return format!("-{}", sig6(&-x));
    }
    let ten = BigInt::from(10);
    let mut e = x.numer().to_string().len() as i32 - x.denom().to_string().len() as i32;
    let pow = |e: i32| -> Value {
        let p = Value::from_integer(ten.pow(e.unsigned_abs()));
        if e >= 0 {
            p
        } else {
            p.recip()
        }
    };
    while pow(e) > *x {
        e -= 1;
    }
    while pow(e + 1) <= *x {
        e += 1;
    }
    let digits = (x * pow(5 - e)).floor().to_integer().to_string();
    let out = if (-5..6).contains(&e) {
        let s = if e >= 0 {
            let (a, b) = digits.split_at(e as usize + 1);
            format!("{a}.{b}")
        } else {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
        };
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let sep = if frac.is_empty() { "" } else { "." };
        format!("{}{sep}{frac}e{e}", &digits[..1])
    };
    out
}

/// Renders a float rounded to 6 significant digits.
pub fn sig6_f64(x: f64) -> String {
    if x.is_nan() {
        return "NA".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded = parse_rational(&format!("{x:.5e}")).expect("float formats as a decimal");
    sig6(&rounded)
}

pub fn format_row(row: &ReportRow) -> String {
    let alpha = row.achieved_alpha.as_ref().map_or("NA".into(), sig6);
    let (ratio, status) = match &row.oracle {
        Oracle::Off => ("NA".to_string(), "off"),
        Oracle::Ok(Ratio::Finite(r)) => (sig6(r), "ok"),
        Oracle::Ok(Ratio::Infinite) => ("inf".to_string(), "ok"),
        Oracle::BudgetExceeded => ("NA".to_string(), "budget_exceeded"),
    };
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        row.id,
        row.seed,
        row.n,
        row.m,
        row.l,
        row.mode.as_str(),
        alpha,
        ratio,
        status,
        sig6_f64(row.wall_ms)
    )
}

pub fn to_tsv(rows: &[ReportRow]) -> String {
    let mut out = COLUMNS.join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&format_row(row));
        out.push('\n');
    }
    out
}

fn parse_value(s: &str) -> anyhow::Result<Option<Value>> {
    match s {
        "NA" => Ok(None),
        _ => Ok(Some(parse_rational(s)?)),
    }
}

pub fn parse_tsv(text: &str) -> anyhow::Result<Vec<ReportRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let Some(header) = lines.next() else { return Ok(Vec::new()) };
    let cols: Vec<&str> = header.split('\t').collect();
    if !cols.contains(&"exact_ratio") || !cols.contains(&"oracle_status") {
        bail!("report lacks oracle columns");
    }
    if cols != COLUMNS {
        bail!("unexpected report header: {header}");
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != COLUMNS.len() {
                bail!("line {}: expected {} fields, found {}", k + 2, COLUMNS.len(), f.len());
            }
            let mode = match f[5] {
                "fixed-half" => Mode::FixedHalf,
                "bisect" => Mode::Bisect,
                other => bail!("line {}: unknown mode {other:?}", k + 2),
            };
            let oracle = match (f[8], f[7]) {
                ("off", _) => Oracle::Off,
                ("budget_exceeded", _) => Oracle::BudgetExceeded,
                ("ok", "inf") => Oracle::Ok(Ratio::Infinite),
                ("ok", r) => Oracle::Ok(Ratio::Finite(parse_rational(r).with_context(|| format!("line {}", k + 2))?)),
                (other, _) => bail!("line {}: unknown oracle status {other:?}", k + 2),
            };
            Ok(ReportRow {
                id: f[0].parse()?,
                seed: f[1].parse()?,
                n: f[2].parse()?,
                m: f[3].parse()?,
                l: f[4].parse()?,
                mode,
                achieved_alpha: parse_value(f[6])?,
                oracle,
                wall_ms: f[9].parse()?,
            })
        })
        .collect()
}

fn oracle_ratios(rows: &[ReportRow]) -> anyhow::Result<Vec<(usize, Ratio)>> {
    if !rows.is_empty() && rows.iter().all(|r| r.oracle == Oracle::Off) {
        bail!("report has no oracle results (rerun bench with --oracle)");
    }
    Ok(rows
        .iter()
        .filter_map(|r| match &r.oracle {
            Oracle::Ok(ratio) => Some((r.n, ratio.clone())),
            _ => None,
        })
        .collect())
}

/// Counts per ratio bin `[0.5,0.6)`, ..., `[0.9,1)`, `[1,inf)`. A `[0,0.5)`
/// row appears only if some ratio fell below the guarantee.
pub fn histogram(rows: &[ReportRow]) -> anyhow::Result<String> {
    let ratios = oracle_ratios(rows)?;
    if ratios.is_empty() {
        return Ok(String::new());
    }
    let edges = ["0", "0.5", "0.6", "0.7", "0.8", "0.9", "1", "inf"];
    let mut counts = [0usize; 7];
    let tenths: Vec<Value> = (5..=10).map(|t| ratio(t, 10)).collect();
    for (_, r) in &ratios {
        let bin = match r {
            Ratio::Infinite => 6,
            Ratio::Finite(x) => tenths.iter().filter(|edge| *x >= **edge).count(),
        };
        counts[bin] += 1;
    }
    let total = ratios.len() as f64;
    let mut out = String::from("bin_lo\tbin_hi\tcount\tfraction\n");
    for (b, &c) in counts.iter().enumerate() {
        if b == 0 && c == 0 {
            continue;
        }
        writeln!(out, "{}\t{}\t{}\t{}", edges[b], edges[b + 1], c, sig6_f64(c as f64 / total)).unwrap();
    }
    Ok(out)
}

/// Mean ratio and full-MMS fraction per agent count.
pub fn trend(rows: &[ReportRow]) -> anyhow::Result<String> {
    let ratios = oracle_ratios(rows)?;
    if ratios.is_empty() {
        return Ok(String::new());
    }
    let mut out = String::from("n\tcount\tmean_ratio\tfull_fraction\n");
    for n in ns(ratios.iter().map(|(n, _)| *n)) {
        let these: Vec<Ratio> = ratios.iter().filter(|(k, _)| *k == n).map(|(_, r)| r.clone()).collect();
        let stats = RatioStats::of(&these);
        writeln!(out, "{n}\t{}\t{}\t{}", these.len(), sig6_f64(stats.mean), sig6_f64(stats.full)).unwrap();
    }
    Ok(out)
}

fn ns(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

/// Mean and median over finite ratios; `full` is the fraction at or above 1
/// over all of them.
pub struct RatioStats {
    pub mean: f64,
    pub median: f64,
    pub full: f64,
}

impl RatioStats {
    pub fn of(ratios: &[Ratio]) -> Self {
        let mut finite: Vec<f64> = ratios
            .iter()
            .filter_map(|r| match r {
                Ratio::Finite(x) => x.to_f64(),
                Ratio::Infinite => None,
            })
            .collect();
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        let full = ratios.iter().filter(|r| r.is_full()).count() as f64 / ratios.len() as f64;
        RatioStats { mean, median: median(&mut finite), full }
    }
}

/// One summary line per agent count, for stderr.
pub fn aggregates(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    for n in ns(rows.iter().map(|r| r.n)) {
        let these: Vec<&ReportRow> = rows.iter().filter(|r| r.n == n).collect();
        let mut alphas: Vec<f64> =
            these.iter().filter_map(|r| r.achieved_alpha.as_ref().and_then(ToPrimitive::to_f64)).collect();
        let failed = these.len() - alphas.len();
        let mean_alpha = alphas.iter().sum::<f64>() / alphas.len() as f64;
        write!(
            out,
            "n={n} rows={} failed={failed} mean_alpha={} median_alpha={}",
            these.len(),
            sig6_f64(mean_alpha),
            sig6_f64(median(&mut alphas))
        )
        .unwrap();
        let ratios: Vec<Ratio> = these
            .iter()
            .filter_map(|r| match &r.oracle {
                Oracle::Ok(x) => Some(x.clone()),
                _ => None,
            })
            .collect();
        let exceeded = these.iter().filter(|r| r.oracle == Oracle::BudgetExceeded).count();
        if !ratios.is_empty() || exceeded > 0 {
            let s = RatioStats::of(&ratios);
            write!(
                out,
                " oracle={} mean_ratio={} median_ratio={} full_mms={} budget_exceeded={exceeded}",
                ratios.len(),
                sig6_f64(s.mean),
                sig6_f64(s.median),
                sig6_f64(s.full)
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use mms_core::model::int;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(&ratio(6, 7)), "0.857142");
        assert_eq!(sig6(&ratio(1, 2)), "0.5");
        assert_eq!(sig6(&int(2)), "2");
        assert_eq!(sig6(&ratio(9_999_999, 10_000_000)), "0.999999");
        assert_eq!(sig6(&int(1234567)), "1.23456e6");
        assert_eq!(sig6(&ratio(1, 1_000_000)), "1e-6");
        assert_eq!(sig6(&ratio(123, 100_000)), "0.00123");
        assert_eq!(sig6_f64(0.25), "0.25");
        assert_eq!(sig6_f64(0.6), "0.6");
        assert_eq!(sig6_f64(2.0 / 3.0), "0.666667");
    }

    fn row(n: usize, r: Option<(i64, i64)>) -> ReportRow {
        ReportRow {
            id: 0,
            seed: 1,
            n,
            m: 4,
            l: 2,
            mode: Mode::FixedHalf,
            achieved_alpha: Some(ratio(1, 2)),
            oracle: r.map_or(Oracle::BudgetExceeded, |(p, q)| Oracle::Ok(Ratio::Finite(ratio(p, q)))),
            wall_ms: 0.125,
        }
    }

    #[test]
    fn tsv_round_trip() {
        let rows = vec![row(2, Some((3, 4))), row(3, None)];
        assert_eq!(parse_tsv(&to_tsv(&rows)).unwrap(), rows);
    }

    #[test]
    fn histogram_bins() {
        let rows: Vec<ReportRow> =
            [(1, 2), (13, 20), (99, 100), (1, 1), (7, 5)].iter().map(|&r| row(2, Some(r))).collect();
        let h = histogram(&rows).unwrap();
        let lines: Vec<&str> = h.lines().collect();
        assert_eq!(lines[1], "0.5\t0.6\t1\t0.2");
        assert_eq!(lines[2], "0.6\t0.7\t1\t0.2");
        assert_eq!(lines[5], "0.9\t1\t1\t0.2");
        assert_eq!(lines[6], "1\tinf\t2\t0.4");
    }

    #[test]
    fn trend_per_n() {
        let rows = vec![row(2, Some((1, 1))), row(2, Some((1, 2))), row(3, Some((3, 5)))];
        assert_eq!(trend(&rows).unwrap(), "n\tcount\tmean_ratio\tfull_fraction\n2\t2\t0.75\t0.5\n3\t1\t0.6\t0\n");
    }

    #[test]
    fn report_needs_oracle() {
        assert!(parse_tsv("id\tseed\n").is_err());
        let mut r = row(2, Some((1, 1)));
        r.oracle = Oracle::Off;
        assert!(histogram(&[r]).is_err());
        assert_eq!(histogram(&[]).unwrap(), "");
    }
}
