//! Doubly normalised additive instances: an integral flow allocation and a
//! lottery over EQ1 allocations from the eating matrix.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{max_bipartite_matching, FlowNetwork};
use crate::model::{Allocation, Instance};

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// Common row sum `W` and column sum `W_c`, if both exist.
pub fn is_doubly_normalised(inst: &Instance) -> Option<(u32, u32)> {
    let rows = inst.additive_matrix()?;
    let w = inst.normalisation()?;
    let col = |g: usize| rows.iter().filter(|r| r[g]).count() as u32;
    let wc = col(0);
    if w == 0 || wc == 0 || (1..inst.m()).any(|g| col(g) != wc) {
        return None;
    }
    Some((w, wc))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expansion {
    /// `(agent, good)` pairs, `q` per agent, goods distinct.
    Edges(Vec<(usize, usize)>),
    /// Agents `X` whose liked goods number fewer than `q |X|`.
    Violating { agents: Vec<usize>, neighbourhood: Vec<usize> },
}

/// Find a `q`-expansion from agents to liked goods, or a Hall violator.
pub fn q_expansion(inst: &Instance, q: usize) -> Result<Expansion> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be at least 1".into()));
    }
    let rows = inst.additive_matrix().ok_or(Error::NotAdditive)?;
    let (n, m) = (inst.n(), inst.m());
    let (s, t) = (n + m, n + m + 1);
    let mut net = FlowNetwork::new(n + m + 2);
    let big = (q * n + 1) as i64;
    let mut arcs = Vec::new();
    for i in 0..n {
        net.add_edge(s, i, q as i64);
        for g in (0..m).filter(|&g| rows[i][g]) {
            arcs.push((i, g, net.add_edge(i, n + g, big)));
        }
    }
    for g in 0..m {
        net.add_edge(n + g, t, 1);
    }
    if net.max_flow(s, t) == (q * n) as i64 {
        let edges = arcs.into_iter().filter(|&(_, _, e)| net.flow(e) > 0).map(|(i, g, _)| (i, g)).collect();
        return Ok(Expansion::Edges(edges));
    }
    let side = net.residual_reachable(s);
    let agents: Vec<usize> = (0..n).filter(|&i| side[i]).collect();
    let neighbourhood: Vec<usize> = (0..m).filter(|&g| agents.iter().any(|&i| rows[i][g])).collect();
    debug_assert!(neighbourhood.len() < q * agents.len());
    Ok(Expansion::Violating { agents, neighbourhood })
}

/// Every good to an agent who likes it, every agent `⌊W/W_c⌋` or
/// `⌈W/W_c⌉` goods: a feasible circulation with lower bounds.
pub fn solve_flow(inst: &Instance) -> Result<Allocation> {
    let (w, wc) = is_doubly_normalised(inst).ok_or(Error::NotDoublyNormalised)?;
    let rows = inst.additive_matrix().expect("additive");
    let (n, m) = (inst.n(), inst.m());
    let lo = (w / wc) as i64;
    let hi = w.div_ceil(wc) as i64;
    // s, t, then super source and sink
    let (s, t, ss, tt) = (n + m, n + m + 1, n + m + 2, n + m + 3);
    let mut net = FlowNetwork::new(n + m + 4);
    let mut excess = vec![0i64; n + m + 4];
    let mut bounded = |net: &mut FlowNetwork, u: usize, v: usize, lower: i64, upper: i64| {
        excess[u] -= lower;
        excess[v] += lower;
        net.add_edge(u, v, upper - lower)
    };
    for i in 0..n {
        bounded(&mut net, s, i, lo, hi);
    }
    let mut arcs = Vec::new();
    for i in 0..n {
        for g in (0..m).filter(|&g| rows[i][g]) {
            arcs.push((i, g, bounded(&mut net, i, n + g, 0, 1)));
        }
    }
    for g in 0..m {
        bounded(&mut net, n + g, t, 1, 1);
    }
    bounded(&mut net, t, s, 0, (n * m) as i64 + 1);
    let mut demand = 0;
    for (v, &e) in excess.iter().enumerate() {
        if e > 0 {
            net.add_edge(ss, v, e);
            demand += e;
        } else if e < 0 {
            net.add_edge(v, tt, -e);
        }
    }
    if net.max_flow(ss, tt) != demand {
        return Err(Error::Internal("no feasible circulation on a doubly normalised instance".into()));
    }
    let mut owner = vec![None; m];
    for (i, g, e) in arcs {
        if net.flow(e) > 0 {
            owner[g] = Some(i);
        }
    }
    Allocation::from_owner(n, owner)
}

/// Square matrix of nonnegative rationals with unit row and column sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoublyStochasticMatrix {
    entries: Vec<Vec<BigRational>>,
}

impl DoublyStochasticMatrix {
    pub fn new(entries: Vec<Vec<BigRational>>) -> Result<Self> {
        let dim = entries.len();
        if entries.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("matrix is not square".into()));
        }
        if entries.iter().flatten().any(|x| x.is_negative()) {
            return Err(Error::InvalidParameter("negative entry".into()));
        }
        for k in 0..dim {
            let row: BigRational = entries[k].iter().sum();
            let col: BigRational = entries.iter().map(|r| &r[k]).sum();
            if !row.is_one() || !col.is_one() {
                return Err(Error::InvalidParameter(format!("line {k} sums to {row} / {col}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> &BigRational {
        &self.entries[row][col]
    }

    pub fn entries(&self) -> &[Vec<BigRational>] {
        &self.entries
    }

}

/// Eating matrix with its row and column meaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EatingMatrix {
    pub matrix: DoublyStochasticMatrix,
    /// `W = p W_c + q`.
    pub p: u32,
    pub q: u32,
    /// Number of dummy columns.
    pub t: usize,
    /// Row `k` is copy `row_copy[k]` of agent `row_agent[k]`.
    pub row_agent: Vec<usize>,
    pub row_copy: Vec<usize>,
    /// Column `k` is good `col_good[k]`; dummies are `None` and come last.
    pub col_good: Vec<Option<usize>>,
}

impl EatingMatrix {
    /// One line per row, labelled by agent and copy; columns are goods then dummies.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# format_version={}\nagent,copy", crate::bounds::CSV_FORMAT_VERSION);
        let mut dummies = 0;
        for c in &self.col_good {
            match c {
                Some(g) => out.push_str(&format!(",g{g}")),
                None => {
                    out.push_str(&format!(",d{dummies}"));
                    dummies += 1;
                }
            }
        }
        out.push('\n');
        for (k, row) in self.matrix.entries().iter().enumerate() {
            out.push_str(&format!("{},{}", self.row_agent[k], self.row_copy[k]));
            for x in row {
                out.push(',');
                out.push_str(&crate::bounds::format_sig(x.to_f64().unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }
}

/// Closed form of the eating procedure with `p + 1` copies per agent.
pub fn eating_matrix(inst: &Instance) -> Result<EatingMatrix> {
    let (w, wc) = is_doubly_normalised(inst).ok_or(Error::NotDoublyNormalised)?;
    let (p, rem) = (w / wc, w % wc);
    if rem == 0 {
        return Err(Error::InvalidParameter("W is a multiple of W_c; use the flow allocation".into()));
    }
    let rows = inst.additive_matrix().expect("additive");
    let (n, m) = (inst.n(), inst.m());
    let copies = p as usize + 1;
    let dim = copies * n;
    let t = dim - m;
    let (w, wc, remi) = (i64::from(w), i64::from(wc), i64::from(rem));
    let early = q(1, w);
    let late = q(remi, w * wc);
    let dummy = (BigRational::one() - q(remi, wc)) / BigRational::from_integer((t as i64).into());
    let mut entries = vec![vec![BigRational::zero(); dim]; dim];
    let mut row_agent = Vec::with_capacity(dim);
    let mut row_copy = Vec::with_capacity(dim);
    for i in 0..n {
        for j in 0..copies {
            let row = &mut entries[i * copies + j];
            for g in (0..m).filter(|&g| rows[i][g]) {
                row[g] = if j + 1 < copies { early.clone() } else { late.clone() };
            }
            if j + 1 == copies {
                for x in row.iter_mut().skip(m) {
                    *x = dummy.clone();
                }
            }
            row_agent.push(i);
            row_copy.push(j);
        }
    }
    let matrix = DoublyStochasticMatrix::new(entries)
        .map_err(|e| Error::Internal(format!("eating matrix not doubly stochastic: {e}")))?;
    Ok(EatingMatrix {
        matrix,
        p,
        q: rem,
        t,
        row_agent,
        row_copy,
        col_good: (0..dim).map(|k| (k < m).then_some(k)).collect(),
    })
}

/// Convex combination of permutation matrices; `perm[row] = col`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BvnDecomposition {
    pub terms: Vec<(BigRational, Vec<usize>)>,
}

impl BvnDecomposition {
    pub fn total_weight(&self) -> BigRational {
        self.terms.iter().map(|(w, _)| w).sum()
    }

    pub fn reconstruct(&self, dim: usize) -> Vec<Vec<BigRational>> {
        let mut out = vec![vec![BigRational::zero(); dim]; dim];
        for (w, perm) in &self.terms {
            for (r, &c) in perm.iter().enumerate() {
                out[r][c] += w;
            }
        }
        out
    }
}

/// Peel off the lowest-index perfect matching on the positive support,
/// weighted by its smallest entry, until nothing is left.
pub fn bvn_decompose(y: &DoublyStochasticMatrix) -> Result<BvnDecomposition> {
    let dim = y.dim();
    let mut rest: Vec<Vec<BigRational>> = y.entries().to_vec();
    let mut terms = Vec::new();
    while rest.iter().flatten().any(|x| x.is_positive()) {
        let adj: Vec<Vec<usize>> = rest
            .iter()
            .map(|row| (0..dim).filter(|&c| row[c].is_positive()).collect())
            .collect();
        let matching = max_bipartite_matching(dim, &adj);
        let perm: Vec<usize> = matching
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Internal("support has no perfect matching".into()))?;
        let weight = perm
            .iter()
            .enumerate()
            .map(|(r, &c)| rest[r][c].clone())
            .min()
            .expect("dim > 0");
        for (r, &c) in perm.iter().enumerate() {
            rest[r][c] -= &weight;
        }
        terms.push((weight, perm));
    }
    Ok(BvnDecomposition { terms })
}

/// Goods matched to any copy of an agent go to that agent; dummies vanish.
pub fn decode_allocation(inst: &Instance, perm: &[usize], em: &EatingMatrix) -> Result<Allocation> {
    if perm.len() != em.matrix.dim() {
        return Err(Error::InvalidParameter("permutation length differs from matrix".into()));
    }
    let mut owner = vec![None; inst.m()];
    for (row, &col) in perm.iter().enumerate() {
        if let Some(g) = em.col_good.get(col).copied().flatten() {
            owner[g] = Some(em.row_agent[row]);
        }
    }
    Allocation::from_owner(inst.n(), owner)
}

pub type Lottery = Vec<(BigRational, Allocation)>;

/// Expected value of each agent.
pub fn ex_ante_values(inst: &Instance, lottery: &Lottery) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); inst.n()];
    for (w, a) in lottery {
        for (i, v) in inst.values(a).into_iter().enumerate() {
            out[i] += w * BigRational::from_integer(v.into());
        }
    }
    out
}

/// A lottery over EQ1 allocations giving every agent `W / W_c` in
/// expectation.
pub fn randomized_allocation(inst: &Instance) -> Result<Lottery> {
    let (w, wc) = is_doubly_normalised(inst).ok_or(Error::NotDoublyNormalised)?;
    let lottery = if w % wc == 0 {
        vec![(BigRational::one(), solve_flow(inst)?)]
    } else {
        let em = eating_matrix(inst)?;
        let bvn = bvn_decompose(&em.matrix)?;
        bvn.terms
            .iter()
            .map(|(weight, perm)| Ok((weight.clone(), decode_allocation(inst, perm, &em)?)))
            .collect::<Result<_>>()?
    };
    let target = q(i64::from(w), i64::from(wc));
    if ex_ante_values(inst, &lottery).iter().any(|v| *v != target) {
        return Err(Error::Internal("ex-ante values differ from W / W_c".into()));
    }
    Ok(lottery)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{example1, gen_doubly_normalised, gen_lower_bound_instance};
    use crate::model::{is_eq, is_eq1, wasted_goods};

    #[test]
    fn detects_constants() {
        assert_eq!(is_doubly_normalised(&example1()), Some((3, 2)));
        assert_eq!(is_doubly_normalised(&gen_lower_bound_instance(2, 2).unwrap()), None);
        let solo = Instance::from_additive_rows(&[vec![1; 5]]).unwrap();
        assert_eq!(is_doubly_normalised(&solo), Some((5, 1)));
    }

    #[test]
    fn expansion_and_violator() {
        match q_expansion(&example1(), 1).unwrap() {
            Expansion::Edges(e) => assert_eq!(e.len(), 4),
            other => panic!("{other:?}"),
        }
        let tight = Instance::from_additive_rows(&[vec![1, 0], vec![1, 0]]).unwrap();
        assert_eq!(
            q_expansion(&tight, 1).unwrap(),
            Expansion::Violating { agents: vec![0, 1], neighbourhood: vec![0] }
        );
    }

    #[test]
    fn flow_allocation_on_example() {
        let inst = example1();
        let a = solve_flow(&inst).unwrap();
        assert!(a.is_complete());
        assert!(a.bundles().iter().all(|b| (1..=2).contains(&b.len())));
        assert_eq!(inst.values(&a).iter().sum::<u32>(), 6);
        assert!(is_eq1(&inst, &a).unwrap());
        let integral = gen_doubly_normalised(4, 8, 4, 2, 1).unwrap();
        let b = solve_flow(&integral).unwrap();
        assert!(is_eq(&integral, &b).unwrap());
        assert_eq!(inst.values(&a).iter().sum::<u32>(), 6);
    }

    #[test]
    fn eating_matrix_of_example() {
        let em = eating_matrix(&example1()).unwrap();
        assert_eq!((em.p, em.q, em.t, em.matrix.dim()), (1, 1, 2, 8));
        assert_eq!(*em.matrix.get(0, 0), q(1, 3));
        assert_eq!(*em.matrix.get(1, 0), q(1, 6));
        assert_eq!(*em.matrix.get(1, 6), q(1, 4));
        assert_eq!(*em.matrix.get(0, 6), BigRational::zero());
        let late: BigRational = em.matrix.entries()[1][..6].iter().sum();
        assert_eq!(late, q(1, 2));
    }

    #[test]
    fn small_bvn_cases() {
        let id = DoublyStochasticMatrix::new(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]).unwrap();
        let d = bvn_decompose(&id).unwrap();
        assert_eq!(d.terms, vec![(q(1, 1), vec![0, 1])]);
        let half = DoublyStochasticMatrix::new(vec![vec![q(1, 2); 2]; 2]).unwrap();
        let d = bvn_decompose(&half).unwrap();
        assert_eq!(d.terms.len(), 2);
        assert!(d.terms.iter().all(|(w, _)| *w == q(1, 2)));
        assert!(DoublyStochasticMatrix::new(vec![vec![q(1, 2); 2], vec![q(1, 1), q(0, 1)]]).is_err());
    }

    #[test]
    fn example_lottery() {
        let inst = example1();
        let em = eating_matrix(&inst).unwrap();
        let d = bvn_decompose(&em.matrix).unwrap();
        assert!(d.total_weight().is_one());
        assert_eq!(d.reconstruct(8), em.matrix.entries());
        assert!(d.terms.len() <= 64 - 16 + 2);
        for (_, perm) in &d.terms {
            let a = decode_allocation(&inst, perm, &em).unwrap();
            assert!(is_eq1(&inst, &a).unwrap());
            assert_eq!(inst.values(&a).iter().sum::<u32>(), 6);
            assert!(wasted_goods(&inst, &a).unwrap().is_empty());
        }
        let lottery = randomized_allocation(&inst).unwrap();
        assert!(ex_ante_values(&inst, &lottery).iter().all(|v| *v == q(3, 2)));
    }

    /// Event-driven run of the eating procedure: copy `j` eats during unit
    /// interval `j`, spreading its unit rate over liked goods that remain,
    /// then over dummies once those run out.
    fn simulate_eating(inst: &Instance) -> Vec<Vec<BigRational>> {
        let (w, wc) = is_doubly_normalised(inst).unwrap();
        let copies = (w / wc) as usize + 1;
        let rows = inst.additive_matrix().unwrap();
        let (n, m) = (inst.n(), inst.m());
        let dim = copies * n;
        let mut left = vec![BigRational::one(); dim];
        let mut y = vec![vec![BigRational::zero(); dim]; dim];
        for j in 0..copies {
            let mut clock = BigRational::zero();
            while clock < BigRational::one() {
                let menus: Vec<Vec<usize>> = (0..n)
                    .map(|i| {
                        let real: Vec<usize> = (0..m).filter(|&g| rows[i][g] && left[g].is_positive()).collect();
                        if real.is_empty() {
                            (m..dim).filter(|&d| left[d].is_positive()).collect()
                        } else {
                            real
                        }
                    })
                    .collect();
                let mut rate = vec![BigRational::zero(); dim];
                for menu in &menus {
                    for &g in menu {
                        rate[g] += q(1, menu.len() as i64);
                    }
                }
                let mut step = BigRational::one() - &clock;
                for g in 0..dim {
                    if rate[g].is_positive() {
                        step = step.min(&left[g] / &rate[g]);
                    }
                }
                for (i, menu) in menus.iter().enumerate() {
                    for &g in menu {
                        let eaten = &step / BigRational::from_integer((menu.len() as i64).into());
                        y[i * copies + j][g] += &eaten;
                        left[g] -= eaten;
                    }
                }
                clock += step;
            }
        }
        y
    }

    #[test]
    fn simulation_agrees_with_closed_form() {
        for inst in [example1(), gen_doubly_normalised(6, 9, 3, 2, 5).unwrap(), gen_doubly_normalised(6, 4, 2, 3, 2).unwrap()] {
            let em = eating_matrix(&inst).unwrap();
            assert_eq!(simulate_eating(&inst), em.matrix.entries());
        }
    }
}
