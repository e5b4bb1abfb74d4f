//! Exhaustive search over all `n^m` complete assignments.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{is_eq1, Allocation, Instance};
use crate::poe::{poe, PoeValue};
use crate::welfare::{max_positive_count, PParam, WelfareKey, FLOAT_REL_TOL};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Goods above this are evaluated without value tables.
const TABLE_MAX_GOODS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub p: PParam,
    pub best: Allocation,
    pub best_key: WelfareKey,
    pub best_eq1: Allocation,
    pub best_eq1_key: WelfareKey,
    pub exact_poe: PoeValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub entries: Vec<OracleEntry>,
    /// Lexicographically largest ascending value vector.
    pub leximin_vector: Vec<u32>,
    pub max_utilitarian: u64,
    pub max_positive_count: usize,
    pub enumeration_count: u64,
}

impl OracleResult {
    pub fn entry(&self, p: &PParam) -> Option<&OracleEntry> {
        self.entries.iter().find(|e| &e.p == p)
    }
}

/// Cheap comparable stand-in for [`WelfareKey`] used inside the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
enum FastKey {
    Int(usize, u128),
    Float(usize, f64),
}

impl FastKey {
    fn beats(&self, other: &FastKey) -> bool {
        match (self, other) {
            (FastKey::Int(c, v), FastKey::Int(d, w)) => (c, v) > (d, w),
            (FastKey::Float(c, v), FastKey::Float(d, w)) => match c.cmp(d) {
                Ordering::Equal => *v > *w * (1.0 + FLOAT_REL_TOL) + 1e-300,
                o => o == Ordering::Greater,
            },
            _ => unreachable!("keys of one p share a variant"),
        }
    }
}

fn fast_key(values: &[u32], p: &PParam, divisor: usize) -> FastKey {
    let positive = values.iter().copied().filter(|&v| v > 0);
    let count = values.iter().filter(|&&v| v > 0).count();
    match p {
        PParam::Nash => FastKey::Int(count, positive.fold(1u128, |a, v| a * u128::from(v))),
        PParam::MinusInfinity => FastKey::Int(count, positive.min().map_or(0, u128::from)),
        PParam::Real(_) if p.is_utilitarian() => FastKey::Int(count, positive.map(u128::from).sum()),
        PParam::Real(_) => {
            if count == 0 || divisor == 0 {
                return FastKey::Float(count, 0.0);
            }
            let e = p.exponent();
            let mean = positive.map(|v| f64::from(v).powf(e)).sum::<f64>() / divisor as f64;
            FastKey::Float(count, mean.powf(1.0 / e))
        }
    }
}

fn check_budget(inst: &Instance, budget: u64) -> Result<u64> {
    let total = (inst.n() as u128).checked_pow(inst.m() as u32);
    match total {
        Some(t) if t <= u128::from(budget) => Ok(t as u64),
        _ => Err(Error::BudgetExceeded {
            needed: format!("{}^{}", inst.n(), inst.m()),
            budget,
        }),
    }
}

/// Walks assignments in lexicographic order of owner arrays, keeping
/// per-agent bundle masks (or bundles) current.
struct Walker<'a> {
    inst: &'a Instance,
    digits: Vec<usize>,
    masks: Vec<u32>,
    tables: Option<Vec<Vec<u32>>>,
    /// `reduced[i][mask]`: least value of `mask` minus one good.
    reduced: Option<Vec<Vec<u32>>>,
    started: bool,
}

impl<'a> Walker<'a> {
    fn new(inst: &'a Instance) -> Self {
        let (n, m) = (inst.n(), inst.m());
        let (tables, reduced) = if m <= TABLE_MAX_GOODS {
            let tables: Vec<Vec<u32>> = inst.valuations().iter().map(|v| v.value_table()).collect();
            let reduced = tables
                .iter()
                .map(|t| {
                    (0..t.len())
                        .map(|mask| {
                            (0..m)
                                .filter(|g| mask >> g & 1 == 1)
                                .map(|g| t[mask ^ (1 << g)])
                                .min()
                                .unwrap_or(0)
                        })
                        .collect()
                })
                .collect();
            (Some(tables), Some(reduced))
        } else {
            (None, None)
        };
        let mut masks = vec![0u32; n];
        if m <= TABLE_MAX_GOODS {
            masks[0] = ((1u64 << m) - 1) as u32;
        }
        Walker { inst, digits: vec![0; m], masks, tables, reduced, started: false }
    }

    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            return true;
        }
        let n = self.inst.n();
        for g in (0..self.digits.len()).rev() {
            let d = self.digits[g];
            let next = if d + 1 < n { d + 1 } else { 0 };
            self.digits[g] = next;
            if self.tables.is_some() {
                self.masks[d] &= !(1 << g);
                self.masks[next] |= 1 << g;
            }
            if next != 0 {
                return true;
            }
        }
        false
    }

    fn allocation(&self) -> Allocation {
        Allocation::from_owner(self.inst.n(), self.digits.iter().map(|&d| Some(d)).collect()).unwrap()
    }

    fn values(&self) -> Vec<u32> {
        match &self.tables {
            Some(t) => self.masks.iter().zip(t).map(|(&mask, t)| t[mask as usize]).collect(),
            None => self.inst.values(&self.allocation()),
        }
    }

    fn is_eq1(&self, values: &[u32]) -> bool {
        match &self.reduced {
            Some(red) => {
                let floor = values.iter().copied().min().unwrap_or(0);
                self.masks
                    .iter()
                    .zip(red)
                    .all(|(&mask, r)| mask == 0 || r[mask as usize] <= floor)
            }
            None => is_eq1(self.inst, &self.allocation()).expect("complete allocation"),
        }
    }
}

/// Optimal and optimal-EQ1 allocations for each `p`, with exact PoE.
/// Ties keep the first assignment found. Refuses when `n^m > budget`.
pub fn enumerate(inst: &Instance, p_list: &[PParam], budget: u64) -> Result<OracleResult> {
    check_budget(inst, budget)?;
    let restrict = max_positive_count(inst);
    let k = p_list.len();
    let mut best: Vec<Option<(FastKey, Vec<usize>)>> = vec![None; k];
    let mut best_eq1: Vec<Option<(FastKey, Vec<usize>)>> = vec![None; k];
    let mut leximin: Option<Vec<u32>> = None;
    let mut max_util = 0u64;
    let mut count = 0u64;
    let mut walker = Walker::new(inst);
    while walker.advance() {
        count += 1;
        let values = walker.values();
        let eq1 = walker.is_eq1(&values);
        max_util = max_util.max(values.iter().map(|&v| u64::from(v)).sum());
        let mut sorted = values.clone();
        sorted.sort_unstable();
        if leximin.as_ref().is_none_or(|l| sorted > *l) {
            leximin = Some(sorted);
        }
        for (j, p) in p_list.iter().enumerate() {
            let key = fast_key(&values, p, restrict);
            if best[j].as_ref().is_none_or(|(b, _)| key.beats(b)) {
                best[j] = Some((key, walker.digits.clone()));
            }
            if eq1 && best_eq1[j].as_ref().is_none_or(|(b, _)| key.beats(b)) {
                best_eq1[j] = Some((key, walker.digits.clone()));
            }
        }
    }
    let to_alloc = |digits: &[usize]| Allocation::from_owner(inst.n(), digits.iter().map(|&d| Some(d)).collect());
    let mut entries = Vec::with_capacity(k);
    for (j, p) in p_list.iter().enumerate() {
        let (_, bd) = best[j].clone().expect("at least one assignment");
        let (_, ed) = best_eq1[j]
            .clone()
            .ok_or_else(|| Error::Internal("no EQ1 allocation found".into()))?;
        let (best, best_eq1) = (to_alloc(&bd)?, to_alloc(&ed)?);
        let best_key = WelfareKey::of(&inst.values(&best), p);
        let best_eq1_key = WelfareKey::of(&inst.values(&best_eq1), p);
        let exact_poe = poe(&best_key, &best_eq1_key)?;
        entries.push(OracleEntry { p: p.clone(), best, best_key, best_eq1, best_eq1_key, exact_poe });
    }
    Ok(OracleResult {
        entries,
        leximin_vector: leximin.unwrap_or_default(),
        max_utilitarian: max_util,
        max_positive_count: restrict,
        enumeration_count: count,
    })
}

/// No complete assignment weakly improves every agent and strictly one.
pub fn is_pareto_optimal(inst: &Instance, alloc: &Allocation, budget: u64) -> Result<bool> {
    check_budget(inst, budget)?;
    inst.check_allocation(alloc)?;
    let base = inst.values(alloc);
    let mut walker = Walker::new(inst);
    while walker.advance() {
        let v = walker.values();
        if v.iter().zip(&base).all(|(a, b)| a >= b) && v != base {
            return Ok(false);
        }
    }
    Ok(true)
}
