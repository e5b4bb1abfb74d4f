//! p-mean welfare under the positive-subset convention.
//!
//! When no allocation can give every agent positive value, welfare is
//! measured over the agents with positive value, and allocations are
//! compared first by how many agents they make positive. That count is
//! capped by [`max_positive_count`], the size of a maximum agent–good
//! matching on singleton values.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::flow::max_bipartite_matching;
use crate::model::{Allocation, Instance};

/// Relative tolerance for comparing floating point welfare values.
pub const FLOAT_REL_TOL: f64 = 1e-9;

/// Exponent of the p-mean, `p ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PParam {
    /// A rational exponent `p ≤ 1`, `p ≠ 0`. `Real(1)` is utilitarian welfare.
    Real(BigRational),
    /// Nash welfare (geometric mean).
    Nash,
    /// Egalitarian welfare (minimum).
    MinusInfinity,
}

impl PParam {
    pub fn utilitarian() -> Self {
        PParam::Real(BigRational::one())
    }

    /// `p` from a rational; zero becomes [`PParam::Nash`].
    pub fn real(p: BigRational) -> Result<Self> {
        if p > BigRational::one() {
            return Err(Error::InvalidParameter(format!("p = {p} exceeds 1")));
        }
        if p.is_zero() {
            return Ok(PParam::Nash);
        }
        Ok(PParam::Real(p))
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Self::real(BigRational::new(num.into(), den.into()))
    }

    pub fn is_utilitarian(&self) -> bool {
        matches!(self, PParam::Real(p) if p.is_one())
    }

    /// Floating exponent; `0` for Nash and `-inf` for egalitarian.
    pub fn exponent(&self) -> f64 {
        match self {
            PParam::Real(p) => p.to_f64().expect("rational exponent fits in f64"),
            PParam::Nash => 0.0,
            PParam::MinusInfinity => f64::NEG_INFINITY,
        }
    }

    /// The grid used throughout the property and acceptance suites.
    pub fn standard_grid() -> Vec<PParam> {
        vec![
            PParam::utilitarian(),
            PParam::from_ratio(1, 2).unwrap(),
            PParam::Nash,
            PParam::from_ratio(-1, 1).unwrap(),
            PParam::MinusInfinity,
        ]
    }
}

impl fmt::Display for PParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PParam::Real(p) => write!(f, "{p}"),
            PParam::Nash => write!(f, "nash"),
            PParam::MinusInfinity => write!(f, "-inf"),
        }
    }
}

impl FromStr for PParam {
    type Err = Error;

    /// Accepts `nash`, `-inf`, integers, `a/b` and plain decimals.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "nash" => return Ok(PParam::Nash),
            "-inf" | "-infinity" | "egalitarian" => return Ok(PParam::MinusInfinity),
            _ => {}
        }
        PParam::real(parse_rational(s)?)
    }
}

impl Serialize for PParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parse `a/b`, an integer, or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: num_bigint::BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: num_bigint::BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_bigint::BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = BigRational::new(num, den);
    Ok(if negative { -r } else { r })
}

/// Largest number of agents that can simultaneously receive positive value.
pub fn max_positive_count(inst: &Instance) -> usize {
    let adj: Vec<Vec<usize>> = inst
        .valuations()
        .iter()
        .map(|v| (0..inst.m()).filter(|&g| v.singleton(g)).collect())
        .collect();
    max_bipartite_matching(inst.m(), &adj)
        .iter()
        .flatten()
        .count()
}

/// A p-mean welfare value, exact where the comparison allows it.
#[derive(Debug, Clone, PartialEq)]
pub enum WelfareValue {
    /// Utilitarian mean or egalitarian minimum.
    Exact(BigRational),
    /// Geometric mean `product^(1/count)`.
    Geometric { product: BigUint, count: usize },
    Approx(f64),
}

impl WelfareValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            WelfareValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            WelfareValue::Geometric { count: 0, .. } => 0.0,
            WelfareValue::Geometric { product, count } => {
                (big_ln(product) / *count as f64).exp()
            }
            WelfareValue::Approx(x) => *x,
        }
    }

    /// Exact rendering: `a/b` for rationals, `P^(1/k)` for geometric means.
    pub fn exact_string(&self) -> Option<String> {
        match self {
            WelfareValue::Exact(r) => Some(r.to_string()),
            WelfareValue::Geometric { product, count } => Some(format!("{product}^(1/{count})")),
            WelfareValue::Approx(_) => None,
        }
    }

    fn compare(&self, other: &WelfareValue) -> Option<Ordering> {
        match (self, other) {
            (WelfareValue::Exact(a), WelfareValue::Exact(b)) => Some(a.cmp(b)),
            (
                WelfareValue::Geometric { product: a, count: ca },
                WelfareValue::Geometric { product: b, count: cb },
            ) if ca == cb => Some(a.cmp(b)),
            (WelfareValue::Approx(a), WelfareValue::Approx(b)) => Some(a.total_cmp(b)),
            _ => None,
        }
    }
}

pub(crate) fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Comparison key of an allocation under a fixed `p`: positive count first,
/// then welfare over the positive agents.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareKey {
    pub positive: usize,
    pub value: WelfareValue,
}

impl WelfareKey {
    /// Key for a utility vector. The mean is taken over its positive entries.
    pub fn of(values: &[u32], p: &PParam) -> Self {
        let positive = values.iter().filter(|&&v| v > 0).count();
        let value = p_mean_over_positive(values, p, positive);
        WelfareKey { positive, value }
    }

    /// Total order except that mixing exact and float representations
    /// (different `p`) is meaningless and yields `None`.
    pub fn compare(&self, other: &WelfareKey) -> Option<Ordering> {
        match self.positive.cmp(&other.positive) {
            Ordering::Equal => self.value.compare(&other.value),
            o => Some(o),
        }
    }

    /// Equality with relative slack for float values; exact otherwise.
    pub fn matches(&self, other: &WelfareKey, rel_tol: f64) -> bool {
        if self.positive != other.positive {
            return false;
        }
        match (&self.value, &other.value) {
            (WelfareValue::Approx(a), WelfareValue::Approx(b)) => {
                (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1.0)
            }
            (a, b) => a.compare(b) == Some(Ordering::Equal),
        }
    }
}

fn p_mean_over_positive(values: &[u32], p: &PParam, divisor: usize) -> WelfareValue {
    let positive = values.iter().copied().filter(|&v| v > 0);
    match p {
        PParam::Nash => WelfareValue::Geometric {
            product: positive.fold(BigUint::one(), |acc, v| acc * v),
            count: divisor,
        },
        PParam::MinusInfinity => {
            WelfareValue::Exact(BigRational::from_integer(positive.min().unwrap_or(0).into()))
        }
        PParam::Real(r) if r.is_one() => {
            if divisor == 0 {
                return WelfareValue::Exact(BigRational::zero());
            }
            let sum: u64 = positive.map(u64::from).sum();
            WelfareValue::Exact(BigRational::new(sum.into(), (divisor as u64).into()))
        }
        PParam::Real(_) => {
            if divisor == 0 {
                return WelfareValue::Approx(0.0);
            }
            let e = p.exponent();
            let mean = positive.map(|v| (v as f64).powf(e)).sum::<f64>() / divisor as f64;
            WelfareValue::Approx(mean.powf(1.0 / e))
        }
    }
}

/// p-mean of `values` over the `restrict` agents that must be positive.
///
/// Fails with [`Error::Domain`] when fewer than `restrict` entries are
/// positive: such an allocation is dominated under the convention.
pub fn p_mean(values: &[u32], p: &PParam, restrict: usize) -> Result<WelfareValue> {
    let positive = values.iter().filter(|&&v| v > 0).count();
    if positive < restrict {
        return Err(Error::Domain(format!(
            "dominated: {positive} positive entries, {restrict} required"
        )));
    }
    if positive > restrict {
        return Err(Error::InvalidParameter(format!(
            "{positive} positive entries exceed the restriction {restrict}"
        )));
    }
    Ok(p_mean_over_positive(values, p, restrict))
}

/// Plain generalised mean of positive reals, no convention applied.
pub fn power_mean(xs: &[f64], p: &PParam) -> f64 {
    let n = xs.len() as f64;
    match p {
        PParam::Nash => (xs.iter().map(|x| x.ln()).sum::<f64>() / n).exp(),
        PParam::MinusInfinity => xs.iter().copied().fold(f64::INFINITY, f64::min),
        PParam::Real(r) if r.is_one() => xs.iter().sum::<f64>() / n,
        PParam::Real(_) => {
            let e = p.exponent();
            (xs.iter().map(|x| x.powf(e)).sum::<f64>() / n).powf(1.0 / e)
        }
    }
}

/// One `p` entry of a [`WelfareReport`]. `value` is `None` for dominated
/// allocations.
#[derive(Debug, Clone, PartialEq)]
pub struct PMeanEntry {
    pub p: PParam,
    pub value: Option<WelfareValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelfareReport {
    pub values: Vec<u32>,
    pub positive_count: usize,
    /// Maximum positive count of the instance.
    pub restrict: usize,
    pub pmean: Vec<PMeanEntry>,
}

pub fn welfare_report(inst: &Instance, alloc: &Allocation, p_list: &[PParam]) -> Result<WelfareReport> {
    inst.check_allocation(alloc)?;
    alloc.require_complete()?;
    let values = inst.values(alloc);
    let restrict = max_positive_count(inst);
    Ok(report_from_values(values, restrict, p_list))
}

pub(crate) fn report_from_values(values: Vec<u32>, restrict: usize, p_list: &[PParam]) -> WelfareReport {
    let positive_count = values.iter().filter(|&&v| v > 0).count();
    let pmean = p_list
        .iter()
        .map(|p| PMeanEntry {
            p: p.clone(),
            value: p_mean(&values, p, restrict).ok(),
        })
        .collect();
    WelfareReport {
        values,
        positive_count,
        restrict,
        pmean,
    }
}

/// Shorthand used by tests: exact rational `a/b`.
pub fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}
