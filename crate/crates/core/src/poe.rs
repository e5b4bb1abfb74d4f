//! Price of equity as a ratio of welfare keys.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::welfare::{big_ln, WelfareKey, WelfareValue};

#[derive(Debug, Clone, PartialEq)]
pub enum PoeValue {
    /// Exact ratio, for utilitarian and egalitarian welfare.
    Rational(BigRational),
    /// `(num / den)^(1/root)`, in lowest terms.
    NashRatio { num: BigUint, den: BigUint, root: usize },
    Float(f64),
    /// The fair optimum makes fewer agents positive than the unconstrained one.
    Infinite,
}

impl PoeValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            PoeValue::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            PoeValue::NashRatio { root: 0, .. } => 1.0,
            PoeValue::NashRatio { num, den, root } => ((big_ln(num) - big_ln(den)) / *root as f64).exp(),
            PoeValue::Float(x) => *x,
            PoeValue::Infinite => f64::INFINITY,
        }
    }

    /// Exactly one; floats never qualify.
    pub fn is_exactly_one(&self) -> bool {
        match self {
            PoeValue::Rational(r) => r.is_one(),
            PoeValue::NashRatio { num, den, root } => *root == 0 || num == den,
            _ => false,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            PoeValue::Rational(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for PoeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoeValue::Rational(r) => write!(f, "{r}"),
            PoeValue::NashRatio { num, den, .. } if num == den => write!(f, "1"),
            PoeValue::NashRatio { num, den, root } => write!(f, "({num}/{den})^(1/{root})"),
            PoeValue::Float(x) => write!(f, "{x}"),
            PoeValue::Infinite => write!(f, "inf"),
        }
    }
}

/// Ratio of the optimal key to the best fair key.
pub fn poe(opt: &WelfareKey, fair: &WelfareKey) -> Result<PoeValue> {
    if fair.positive > opt.positive {
        return Err(Error::Internal(format!(
            "fair allocation makes {} agents positive, optimum only {}",
            fair.positive, opt.positive
        )));
    }
    if fair.positive < opt.positive {
        return Ok(PoeValue::Infinite);
    }
    if opt.positive == 0 {
        return Ok(PoeValue::Rational(BigRational::one()));
    }
    match (&opt.value, &fair.value) {
        (WelfareValue::Exact(a), WelfareValue::Exact(b)) => {
            if b.is_zero() {
                return Err(Error::Internal("zero fair welfare with positive agents".into()));
            }
            Ok(PoeValue::Rational(a / b))
        }
        (
            WelfareValue::Geometric { product: a, count: ca },
            WelfareValue::Geometric { product: b, count: cb },
        ) if ca == cb => {
            let g = a.gcd(b);
            Ok(PoeValue::NashRatio {
                num: a / &g,
                den: b / &g,
                root: *ca,
            })
        }
        (WelfareValue::Approx(a), WelfareValue::Approx(b)) => Ok(PoeValue::Float(a / b)),
        _ => Err(Error::InvalidParameter("welfare keys computed for different p".into())),
    }
}
