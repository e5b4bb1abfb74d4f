//! Closed-form PoE bounds for binary additive valuations and the exact PoE
//! of the two worst-case families.

use std::f64::consts::E;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poe::PoeValue;
use crate::welfare::PParam;

fn check_r(r: usize) -> Result<f64> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!("need at least two types, got r = {r}")));
    }
    Ok((r - 1) as f64)
}

/// Whether `p` lies strictly between 0 and 1.
fn in_open_unit(p: &PParam) -> bool {
    matches!(p, PParam::Real(_)) && p.exponent() > 0.0 && !p.is_utilitarian()
}

/// Worst-case lower bound over instances with `r` types.
pub fn poe_lower_bound(p: &PParam, r: usize) -> Result<f64> {
    let s = check_r(r)?;
    Ok(match p {
        PParam::MinusInfinity => 1.0,
        PParam::Nash => {
            if s < 2.0 {
                return Err(Error::Domain(format!("s = {s}: ln s must be positive")));
            }
            s / (E * s.ln())
        }
        _ if p.is_utilitarian() => s,
        _ if in_open_unit(p) => p.exponent() / E * s,
        _ => {
            let e = p.exponent();
            2f64.powf(1.0 / e) * s.powf(1.0 / (1.0 - e))
        }
    })
}

/// Worst-case upper bound over instances with `r` types.
pub fn poe_upper_bound(p: &PParam, r: usize) -> Result<f64> {
    let s = check_r(r)?;
    Ok(match p {
        PParam::MinusInfinity => 1.0,
        PParam::Nash => {
            if s >= 8.0 {
                s / (s / E).ln()
            } else {
                lambert_w(s / E).exp()
            }
        }
        _ if p.is_utilitarian() => 1.0 + s,
        _ if in_open_unit(p) => 1.0 + 2.0 * s,
        _ => {
            let e = p.exponent();
            if e > -1.0 {
                s.powf(1.0 / (1.0 - e)) * 2f64.powf(-1.0 / e) * (-1.0 / e).powf(1.0 / (e * (e - 1.0)))
            } else {
                2.0 * s.powf(1.0 / (1.0 - e))
            }
        }
    })
}

/// Upper bound sharpened by the instance rank, which caps utilitarian PoE.
pub fn poe_upper_bound_with_rank(p: &PParam, r: usize, rank: usize) -> Result<f64> {
    let ub = poe_upper_bound(p, r)?;
    Ok(if p.is_utilitarian() { ub.min(rank as f64) } else { ub })
}

/// Principal branch of Lambert W for `x ≥ 0`, by Newton's method.
pub fn lambert_w(x: f64) -> f64 {
    assert!(x >= 0.0, "lambert_w defined here for x >= 0");
    let mut w = (1.0 + x).ln();
    for _ in 0..100 {
        let ew = w.exp();
        let step = (w * ew - x) / (ew * (w + 1.0));
        w -= step;
        if step.abs() < 1e-12 {
            break;
        }
    }
    w
}

/// Exact PoE of the lower-bound family with `r` type groups of `w` goods.
pub fn lambda_family_poe(p: &PParam, w: u32, r: usize) -> Result<PoeValue> {
    let s = check_r(r)?;
    if w == 0 {
        return Err(Error::InvalidParameter("W must be at least 1".into()));
    }
    let wf = f64::from(w);
    Ok(match p {
        PParam::MinusInfinity => PoeValue::Rational(BigRational::one()),
        PParam::Nash => PoeValue::NashRatio {
            num: Pow::pow(BigUint::from(w), r - 1),
            den: BigUint::one(),
            root: w as usize + r - 1,
        },
        _ if p.is_utilitarian() => {
            let (w, s) = (u64::from(w), (r - 1) as u64);
            PoeValue::Rational(BigRational::new((w + s * w).into(), (w + s).into()))
        }
        _ => {
            let e = p.exponent();
            PoeValue::Float(((wf + s * wf.powf(e)) / (wf + s)).powf(1.0 / e))
        }
    })
}

/// PoE of the matroid family with parameter `k`.
pub fn poe_formula_submodular(p: &PParam, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let kf = k as f64;
    let cap = kf.min(2.0);
    Ok(match p {
        PParam::MinusInfinity => 1.0,
        PParam::Nash => (kf / cap).sqrt(),
        _ => {
            let e = p.exponent();
            ((1.0 + kf.powf(e)) / (1.0 + cap.powf(e))).powf(1.0 / e)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub p: PParam,
    pub r: usize,
    pub s: usize,
    /// `None` where the formula is undefined.
    pub lower: Option<f64>,
    pub upper: f64,
}

impl BoundRow {
    pub fn lower_clamped(&self) -> f64 {
        self.lower.unwrap_or(1.0).max(1.0)
    }

    pub fn upper_clamped(&self) -> f64 {
        self.upper.max(1.0)
    }
}

pub fn bound_table(p_list: &[PParam], r_range: std::ops::RangeInclusive<usize>) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for p in p_list {
        for r in r_range.clone() {
            let lower = match poe_lower_bound(p, r) {
                Ok(x) => Some(x),
                Err(Error::Domain(_)) => None,
                Err(e) => return Err(e),
            };
            rows.push(BoundRow {
                p: p.clone(),
                r,
                s: r - 1,
                lower,
                upper: poe_upper_bound(p, r)?,
            });
        }
    }
    Ok(rows)
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').unwrap();
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        return format!("{mant}e{e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub const CSV_FORMAT_VERSION: u32 = 1;

pub fn bound_table_csv(rows: &[BoundRow]) -> String {
    let mut out = format!("# format_version={CSV_FORMAT_VERSION}\np,r,s,lower,upper\n");
    for row in rows {
        let lower = row.lower.map(format_sig).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", row.p, row.r, row.s, lower, format_sig(row.upper)));
    }
    out
}
