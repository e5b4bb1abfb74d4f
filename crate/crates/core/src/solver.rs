//! Nash-optimal allocation `A*`, its truncation `B`, and the type
//! diagnostics used by the upper-bound argument.
//!
//! Everything runs on the exchange graph of a clean allocation: nodes are
//! goods, and `g → g'` is an arc when the owner of `g` can hand `g` on and
//! take `g'` in its place without losing value.

use std::collections::VecDeque;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{is_eq1, Allocation, Instance};
use crate::poe::{poe, PoeValue};
use crate::welfare::{max_positive_count, report_from_values, PParam, WelfareKey, WelfareReport};

struct State<'a> {
    inst: &'a Instance,
    owner: Vec<Option<usize>>,
    bundles: Vec<Vec<usize>>,
    values: Vec<u32>,
}

impl<'a> State<'a> {
    fn empty(inst: &'a Instance) -> Self {
        State {
            inst,
            owner: vec![None; inst.m()],
            bundles: vec![Vec::new(); inst.n()],
            values: vec![0; inst.n()],
        }
    }

    fn can_take(&self, agent: usize, g: usize) -> bool {
        self.owner[g] != Some(agent)
            && self
                .inst
                .valuation(agent)
                .marginal_of(self.bundles[agent].iter().copied(), g)
                == 1
    }

    /// Owner of `g` swaps `g` for `h` keeping its value.
    fn can_swap(&self, g: usize, h: usize) -> bool {
        let Some(a) = self.owner[g] else { return false };
        if self.owner[h] == Some(a) {
            return false;
        }
        let v = self.inst.valuation(a);
        let swapped = self.bundles[a].iter().copied().filter(|&x| x != g).chain([h]);
        v.value_of(swapped) == self.values[a]
    }

    /// Shortest path of goods `g1 … gt` with `g1` takeable by `agent` and
    /// `gt` the first target reached. Sources and arcs are scanned in
    /// ascending good order.
    fn find_path(&self, agent: usize, is_target: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        let m = self.inst.m();
        let mut parent: Vec<Option<usize>> = vec![None; m];
        let mut seen = vec![false; m];
        let mut queue = VecDeque::new();
        let trace = |parent: &[Option<usize>], mut g: usize| {
            let mut path = vec![g];
            while let Some(p) = parent[g] {
                path.push(p);
                g = p;
            }
            path.reverse();
            path
        };
        for g in 0..m {
            if self.can_take(agent, g) {
                seen[g] = true;
                if is_target(g) {
                    return Some(vec![g]);
                }
                queue.push_back(g);
            }
        }
        while let Some(g) = queue.pop_front() {
            if self.owner[g].is_none() {
                continue;
            }
            for h in 0..m {
                if seen[h] || !self.can_swap(g, h) {
                    continue;
                }
                seen[h] = true;
                parent[h] = Some(g);
                if is_target(h) {
                    return Some(trace(&parent, h));
                }
                queue.push_back(h);
            }
        }
        None
    }

    /// `g1` goes to `agent`, each later good to the previous good's owner.
    fn apply(&mut self, agent: usize, path: &[usize]) -> Result<()> {
        let old: Vec<Option<usize>> = path.iter().map(|&g| self.owner[g]).collect();
        let loser = *old.last().expect("nonempty path");
        self.owner[path[0]] = Some(agent);
        for k in 1..path.len() {
            self.owner[path[k]] = old[k - 1];
        }
        let mut touched: Vec<usize> = old.iter().flatten().copied().chain([agent]).collect();
        touched.sort_unstable();
        touched.dedup();
        let before = self.values.clone();
        for &a in &touched {
            self.bundles[a] = (0..self.inst.m()).filter(|&g| self.owner[g] == Some(a)).collect();
            self.values[a] = self.inst.valuation(a).value_of(self.bundles[a].iter().copied());
            if self.values[a] as usize != self.bundles[a].len() {
                return Err(Error::Internal(format!("path {path:?} left agent {a} with a wasted good")));
            }
        }
        for &a in &touched {
            let expect = before[a] as i64 + i64::from(a == agent) - i64::from(Some(a) == loser);
            if self.values[a] as i64 != expect {
                return Err(Error::Internal(format!(
                    "path {path:?} changed agent {a} from {} to {}",
                    before[a], self.values[a]
                )));
            }
        }
        Ok(())
    }

    fn augment_all(&mut self) -> Result<()> {
        loop {
            let mut gained = false;
            for i in 0..self.inst.n() {
                while let Some(path) = self.find_path(i, |g| self.owner[g].is_none()) {
                    self.apply(i, &path)?;
                    gained = true;
                }
            }
            if !gained {
                return Ok(());
            }
        }
    }

    fn rebalance(&mut self) -> Result<()> {
        'outer: loop {
            let mut order: Vec<usize> = (0..self.inst.n()).collect();
            order.sort_by_key(|&i| (self.values[i], i));
            for i in order {
                let floor = self.values[i] + 2;
                let path = self.find_path(i, |g| self.owner[g].is_some_and(|j| self.values[j] >= floor));
                if let Some(path) = path {
                    self.apply(i, &path)?;
                    continue 'outer;
                }
            }
            return Ok(());
        }
    }

    fn into_allocation(self) -> Allocation {
        Allocation::from_owner(self.inst.n(), self.owner).expect("owners in range")
    }
}

/// Clean partial allocation of maximum utilitarian welfare, built by
/// augmenting from the unassigned pool.
pub fn max_utilitarian_clean(inst: &Instance) -> Result<Allocation> {
    let mut state = State::empty(inst);
    state.augment_all()?;
    Ok(state.into_allocation())
}

/// Lowest-index agent of minimum value, with that value.
fn min_agent(values: &[u32]) -> (usize, u32) {
    values
        .iter()
        .copied()
        .enumerate()
        .min_by_key(|&(i, v)| (v, i))
        .expect("at least one agent")
}

/// A complete Nash-optimal (equivalently leximin) allocation. Leftover pool
/// goods go to the lowest-index minimum-value agent.
pub fn nash_optimal(inst: &Instance) -> Result<Allocation> {
    let mut state = State::empty(inst);
    state.augment_all()?;
    state.rebalance()?;
    let (il, _) = min_agent(&state.values);
    let v = inst.valuation(il);
    let pool: Vec<usize> = (0..inst.m()).filter(|&g| state.owner[g].is_none()).collect();
    for &g in &pool {
        if v.marginal_of(state.bundles[il].iter().copied(), g) != 0 {
            return Err(Error::Internal(format!("pool good {g} still has value for agent {il}")));
        }
    }
    let mut alloc = state.into_allocation();
    for g in pool {
        alloc.assign(g, Some(il));
    }
    Ok(alloc)
}

/// Reduce every agent above `l + 1` to exactly `l + 1`, where `l` is the
/// minimum value in `a_star`. Goods are dropped in ascending index, only
/// those of marginal 1, and handed to the lowest-index agent of value `l`.
pub fn truncate(inst: &Instance, a_star: &Allocation) -> Result<Allocation> {
    inst.check_allocation(a_star)?;
    a_star.require_complete()?;
    let values = inst.values(a_star);
    let (il, l) = min_agent(&values);
    let mut b = a_star.clone();
    let mut removed = Vec::new();
    for (i, &vi) in values.iter().enumerate() {
        if vi <= l + 1 {
            continue;
        }
        let v = inst.valuation(i);
        let mut bundle = a_star.bundle(i);
        let mut current = vi;
        let mut idx = 0;
        while current > l + 1 && idx < bundle.len() {
            let g = bundle[idx];
            let without = v.value_of(bundle.iter().copied().filter(|&h| h != g));
            if without + 1 == current {
                bundle.remove(idx);
                current = without;
                removed.push(g);
            } else {
                idx += 1;
            }
        }
        if current != l + 1 {
            return Err(Error::Internal(format!("could not truncate agent {i} to {}", l + 1)));
        }
    }
    let vl = inst.valuation(il);
    let mut target: Vec<usize> = a_star.bundle(il);
    for g in removed {
        if vl.marginal_of(target.iter().copied(), g) != 0 {
            return Err(Error::Internal(format!(
                "truncated good {g} has value for agent {il}; input was not Nash-optimal"
            )));
        }
        target.push(g);
        b.assign(g, Some(il));
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeStat {
    pub type_id: usize,
    /// Positive-value agents of this type in `A*`.
    pub n_k: usize,
    /// Their total value.
    pub m_k: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationDiagnostics {
    /// Sorted by `m_k / n_k`, ties by type id.
    pub types: Vec<TypeStat>,
    pub lambda: u64,
    pub rho: usize,
    #[serde(with = "crate::io::rational_str")]
    pub alpha: BigRational,
    /// Agents left at zero and not counted.
    pub excluded_zero_agents: usize,
    /// `Σ_{k ≤ ρ} m_k ≥ W`.
    pub low_types_cover_w: bool,
    pub warnings: Vec<String>,
}

/// Type statistics of `A*` over its positive-value agents.
pub fn diagnostics(inst: &Instance, a_star: &Allocation) -> Result<TruncationDiagnostics> {
    if !inst.is_additive() {
        return Err(Error::NotAdditive);
    }
    let w = inst.normalisation().ok_or(Error::NotNormalised)?;
    inst.check_allocation(a_star)?;
    let values = inst.values(a_star);
    let mut stats: Vec<TypeStat> = (0..inst.num_types())
        .map(|t| TypeStat { type_id: t, n_k: 0, m_k: 0 })
        .collect();
    let mut zeros = 0;
    for (i, &v) in values.iter().enumerate() {
        if v == 0 {
            zeros += 1;
            continue;
        }
        let s = &mut stats[inst.type_of(i)];
        s.n_k += 1;
        s.m_k += u64::from(v);
    }
    stats.retain(|s| s.n_k > 0);
    if stats.is_empty() {
        return Err(Error::Domain("no agent has positive value".into()));
    }
    stats.sort_by(|a, b| {
        (u128::from(a.m_k) * b.n_k as u128)
            .cmp(&(u128::from(b.m_k) * a.n_k as u128))
            .then(a.type_id.cmp(&b.type_id))
    });
    let first = &stats[0];
    let n1 = first.n_k as u64;
    let lambda = if first.m_k.is_multiple_of(n1) {
        1 + first.m_k / n1
    } else {
        first.m_k.div_ceil(n1)
    };
    let rho = stats.iter().filter(|s| s.m_k <= lambda * s.n_k as u64).count();
    let positive: usize = stats.iter().map(|s| s.n_k).sum();
    let low_n: usize = stats[..rho].iter().map(|s| s.n_k).sum();
    let low_m: u64 = stats[..rho].iter().map(|s| s.m_k).sum();
    let mut warnings = Vec::new();
    if zeros > 0 {
        warnings.push(format!("{zeros} zero-value agents excluded"));
    }
    if lambda < 2 {
        warnings.push(format!("lambda = {lambda} is below 2"));
    }
    Ok(TruncationDiagnostics {
        types: stats,
        lambda,
        rho,
        alpha: BigRational::new(low_n.into(), positive.into()),
        excluded_zero_agents: zeros,
        low_types_cover_w: low_m >= u64::from(w),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub a_star: Allocation,
    pub b: Allocation,
    /// Minimum value in `A*`.
    pub l: u32,
    /// Agent receiving truncated and leftover goods.
    pub i_l: usize,
    pub opt: WelfareReport,
    pub fair: WelfareReport,
    pub poe: Vec<(PParam, PoeValue)>,
    pub diagnostics: Option<TruncationDiagnostics>,
    pub warnings: Vec<String>,
}

impl SolveResult {
    pub fn poe_for(&self, p: &PParam) -> Option<&PoeValue> {
        self.poe.iter().find(|(q, _)| q == p).map(|(_, v)| v)
    }
}

/// `A*`, `B`, both welfare reports and the PoE for every requested `p`.
pub fn solve(inst: &Instance, p_list: &[PParam]) -> Result<SolveResult> {
    let a_star = nash_optimal(inst)?;
    let b = truncate(inst, &a_star)?;
    let opt_values = inst.values(&a_star);
    let fair_values = inst.values(&b);
    let (i_l, l) = min_agent(&opt_values);
    let mut warnings = Vec::new();
    if inst.normalisation().is_none() {
        warnings.push("instance is not normalised".to_string());
    }
    if !is_eq1(inst, &b)? {
        return Err(Error::Internal("truncated allocation is not EQ1".into()));
    }
    let restrict = max_positive_count(inst);
    let positive = opt_values.iter().filter(|&&v| v > 0).count();
    if positive != restrict {
        return Err(Error::Internal(format!(
            "A* makes {positive} agents positive, {restrict} possible"
        )));
    }
    let mut poes = Vec::with_capacity(p_list.len());
    for p in p_list {
        let value = poe(&WelfareKey::of(&opt_values, p), &WelfareKey::of(&fair_values, p))?;
        poes.push((p.clone(), value));
    }
    let diagnostics = if inst.is_additive() && inst.normalisation().is_some() {
        Some(diagnostics(inst, &a_star)?)
    } else {
        None
    };
    Ok(SolveResult {
        opt: report_from_values(opt_values, restrict, p_list),
        fair: report_from_values(fair_values, restrict, p_list),
        a_star,
        b,
        l,
        i_l,
        poe: poes,
        diagnostics,
        warnings,
    })
}
