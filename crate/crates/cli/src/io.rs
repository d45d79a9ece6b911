//! JSON file formats for instances and allocations.
//!
//! Values are JSON integers or strings holding an exact rational (`"3/7"`,
//! `"-2"`, `"0.45"`). Item ids are 0-based.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use mms_core::model::{Category, Instance, Value, Violation};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryFile {
    pub items: Vec<usize>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub values: Vec<Vec<Number>>,
    pub categories: Vec<CategoryFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationFile {
    pub bundles: Vec<Vec<usize>>,
    pub achieved_alpha: String,
}

/// Why an instance file could not be turned into a valid instance.
#[derive(Debug)]
pub enum LoadError {
    Parse(anyhow::Error),
    Invalid(Vec<String>),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Parse(e) => write!(f, "{e:#}"),
            LoadError::Invalid(v) => write!(f, "invalid instance: {}", v.join("; ")),
        }
    }
}

impl std::error::Error for LoadError {}

/// Parses `p/q`, an integer, or a finite decimal such as `0.45` or
/// `1.5e-3` exactly.
pub fn parse_rational(s: &str) -> anyhow::Result<Value> {
    let s = s.trim();
    if let Some((mantissa, exp)) = s.split_once(['e', 'E']) {
        let exp: i32 = exp.parse().map_err(|_| anyhow!("not a number: {s:?}"))?;
        let scale = Value::from_integer(BigInt::from(10u32).pow(exp.unsigned_abs()));
        let m = parse_rational(mantissa)?;
        return Ok(if exp >= 0 { m * scale } else { m / scale });
    }
    if let Some((int_part, frac)) = s.split_once('.') {
        let neg = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            bail!("not a number: {s:?}");
        }
        let num = BigInt::from_str(&digits)?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let v = Value::new(num, den);
        return Ok(if neg { -v } else { v });
    }
    let v = Value::from_str(s).map_err(|_| anyhow!("not a number: {s:?}"))?;
    Ok(v)
}

pub fn format_rational(v: &Value) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn number_of(v: &Value) -> Number {
    match v.to_integer().to_i64() {
        Some(i) if v.is_integer() => Number::Int(i),
        _ => Number::Text(format_rational(v)),
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            n: inst.n(),
            values: inst.values().iter().map(|row| row.iter().map(number_of).collect()).collect(),
            categories: inst.categories().iter().map(|c| CategoryFile { items: c.items.clone(), k: c.k }).collect(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance, LoadError> {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, row) in self.values.iter().enumerate() {
            let mut parsed = Vec::with_capacity(row.len());
            for (j, v) in row.iter().enumerate() {
                let v = match v {
                    Number::Int(x) => Value::from_integer(BigInt::from(*x)),
                    Number::Text(s) => {
                        parse_rational(s).with_context(|| format!("agent {i}, item {j}")).map_err(LoadError::Parse)?
                    }
                };
                parsed.push(v);
            }
            values.push(parsed);
        }
        let mut problems = Vec::new();
        if self.n != values.len() {
            problems.push(format!("n={} but {} value rows", self.n, values.len()));
        }
        let empty = self.categories.iter().enumerate().filter(|(_, c)| c.items.is_empty());
        problems.extend(empty.map(|(h, _)| format!("category {h} is empty")));
        let cats = self.categories.iter().map(|c| Category::new(c.items.clone(), c.k)).collect();
        let inst = Instance::new(values, cats);
        problems.extend(inst.validate().iter().map(Violation::to_string));
        if problems.is_empty() {
            Ok(inst)
        } else {
            Err(LoadError::Invalid(problems))
        }
    }
}

pub fn read_instance(path: &Path) -> Result<Instance, LoadError> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(LoadError::Parse)?;
    let file: InstanceFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(LoadError::Parse)?;
    file.to_instance()
}

/// JSON with one valuation row or category per line.
pub fn instance_json(inst: &Instance) -> String {
    let file = InstanceFile::from_instance(inst);
    let rows: Vec<String> = file.values.iter().map(|r| serde_json::to_string(r).expect("plain data")).collect();
    let cats: Vec<String> = file.categories.iter().map(|c| serde_json::to_string(c).expect("plain data")).collect();
    format!(
        "{{\n  \"n\": {},\n  \"values\": [\n    {}\n  ],\n  \"categories\": [\n    {}\n  ]\n}}\n",
        file.n,
        rows.join(",\n    "),
        cats.join(",\n    ")
    )
}

pub fn write_instance(path: &Path, inst: &Instance) -> anyhow::Result<()> {
    fs::write(path, instance_json(inst)).with_context(|| format!("writing {}", path.display()))
}

impl AllocationFile {
    pub fn new(bundles: Vec<Vec<usize>>, alpha: &Value) -> Self {
        AllocationFile { bundles, achieved_alpha: format_rational(alpha) }
    }

    pub fn alpha(&self) -> anyhow::Result<Value> {
        let v = parse_rational(&self.achieved_alpha)?;
        if v <= Value::zero() {
            bail!("achieved_alpha must be positive");
        }
        Ok(v)
    }
}

pub fn read_allocation(path: &Path) -> anyhow::Result<AllocationFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_allocation(path: &Path, alloc: &AllocationFile) -> anyhow::Result<()> {
    let text = format!(
        "{{\n  \"bundles\": {},\n  \"achieved_alpha\": {}\n}}\n",
        serde_json::to_string(&alloc.bundles)?,
        serde_json::to_string(&alloc.achieved_alpha)?
    );
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
