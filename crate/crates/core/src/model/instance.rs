use super::{Allocation, Valuation};
use crate::error::{Error, Result};

/// Ground sets this small decide type identity by comparing value tables.
const EXACT_TYPE_TEST_MAX_GOODS: usize = 12;

/// A fair division instance: `n` agents, `m` goods, one valuation per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    m: usize,
    valuations: Vec<Valuation>,
    type_of: Vec<usize>,
    num_types: usize,
}

impl Instance {
    pub fn new(m: usize, valuations: Vec<Valuation>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::NoAgents);
        }
        for (agent, v) in valuations.iter().enumerate() {
            if v.num_goods() != m {
                return Err(Error::ShapeMismatch {
                    agent,
                    got: v.num_goods(),
                    expected: m,
                });
            }
        }
        let (type_of, num_types) = assign_types(m, &valuations);
        Ok(Self {
            m,
            valuations,
            type_of,
            num_types,
        })
    }

    /// Binary additive instance from a 0/1 matrix (one row per agent).
    pub fn from_additive_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.first().map_or(0, |r| r.len());
        let vals = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let ints: Vec<i64> = r.iter().map(|&b| b as i64).collect();
                Valuation::additive_from_ints(i, &ints)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, vals)
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    /// Type id of an agent. Ids are assigned in order of first appearance.
    pub fn type_of(&self, agent: usize) -> usize {
        self.type_of[agent]
    }

    pub fn type_index(&self) -> &[usize] {
        &self.type_of
    }

    /// Number of distinct valuation functions, `r`.
    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn is_additive(&self) -> bool {
        self.valuations.iter().all(Valuation::is_additive)
    }

    /// The common value of the grand bundle, if every agent agrees on it.
    pub fn normalisation(&self) -> Option<u32> {
        let all: Vec<usize> = (0..self.m).collect();
        let w = self.valuations[0].value_of(all.iter().copied());
        self.valuations[1..]
            .iter()
            .all(|v| v.value_of(all.iter().copied()) == w)
            .then_some(w)
    }

    /// 0/1 valuation matrix for additive instances.
    pub fn additive_matrix(&self) -> Option<Vec<Vec<bool>>> {
        self.valuations
            .iter()
            .map(|v| match v {
                Valuation::BinaryAdditive { row } => Some(row.clone()),
                _ => None,
            })
            .collect()
    }

    /// Value of agent `i` for its bundle in `alloc`.
    pub fn bundle_value(&self, agent: usize, alloc: &Allocation) -> u32 {
        self.valuations[agent].value_of(alloc.goods_of(agent))
    }

    /// Per-agent values under `alloc`; unassigned goods are ignored.
    pub fn values(&self, alloc: &Allocation) -> Vec<u32> {
        let bundles = alloc.bundles();
        self.valuations
            .iter()
            .zip(&bundles)
            .map(|(v, b)| v.value_of(b.iter().copied()))
            .collect()
    }

    pub(crate) fn check_allocation(&self, alloc: &Allocation) -> Result<()> {
        if alloc.n() != self.n() {
            return Err(Error::InvalidParameter(format!(
                "allocation has {} agents, instance has {}",
                alloc.n(),
                self.n()
            )));
        }
        if alloc.m() != self.m {
            return Err(Error::InvalidParameter(format!(
                "allocation has {} goods, instance has {}",
                alloc.m(),
                self.m
            )));
        }
        Ok(())
    }
}

fn same_function(m: usize, a: &Valuation, b: &Valuation) -> bool {
    match (a, b) {
        (Valuation::BinaryAdditive { row: x }, Valuation::BinaryAdditive { row: y }) => x == y,
        _ if a == b => true,
        _ if m <= EXACT_TYPE_TEST_MAX_GOODS => a.value_table() == b.value_table(),
        _ => a.row_space() == b.row_space(),
    }
}

fn assign_types(m: usize, valuations: &[Valuation]) -> (Vec<usize>, usize) {
    let mut representatives: Vec<usize> = Vec::new();
    let mut type_of = Vec::with_capacity(valuations.len());
    for (i, v) in valuations.iter().enumerate() {
        match representatives
            .iter()
            .position(|&rep| same_function(m, &valuations[rep], v))
        {
            Some(t) => type_of.push(t),
            None => {
                type_of.push(representatives.len());
                representatives.push(i);
            }
        }
    }
    (type_of, representatives.len())
}
