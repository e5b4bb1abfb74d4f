use crate::error::{Error, Result};

/// Assignment of goods to agents; `None` marks a good left in the pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    n: usize,
    owner: Vec<Option<usize>>,
}

impl Allocation {
    /// All goods unassigned.
    pub fn empty(n: usize, m: usize) -> Self {
        Self {
            n,
            owner: vec![None; m],
        }
    }

    pub fn from_owner(n: usize, owner: Vec<Option<usize>>) -> Result<Self> {
        if let Some(&Some(agent)) = owner.iter().find(|o| matches!(o, Some(a) if *a >= n)) {
            return Err(Error::AgentOutOfRange { agent, n });
        }
        Ok(Self { n, owner })
    }

    /// Build from explicit bundles; goods not listed stay unassigned.
    pub fn from_bundles(m: usize, bundles: &[Vec<usize>]) -> Result<Self> {
        let mut owner = vec![None; m];
        for (agent, bundle) in bundles.iter().enumerate() {
            for &g in bundle {
                if g >= m {
                    return Err(Error::GoodOutOfRange { good: g, m });
                }
                if owner[g].replace(agent).is_some() {
                    return Err(Error::DuplicateGood(g));
                }
            }
        }
        Ok(Self {
            n: bundles.len(),
            owner,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self, g: usize) -> Option<usize> {
        self.owner[g]
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owner
    }

    pub(crate) fn assign(&mut self, g: usize, agent: Option<usize>) {
        self.owner[g] = agent;
    }

    /// Goods held by `agent`, ascending.
    pub fn goods_of(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.owner
            .iter()
            .enumerate()
            .filter(move |(_, o)| **o == Some(agent))
            .map(|(g, _)| g)
    }

    pub fn bundle(&self, agent: usize) -> Vec<usize> {
        self.goods_of(agent).collect()
    }

    pub fn bundles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (g, o) in self.owner.iter().enumerate() {
            if let Some(a) = o {
                out[*a].push(g);
            }
        }
        out
    }

    pub fn unassigned(&self) -> Vec<usize> {
        self.owner
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_none())
            .map(|(g, _)| g)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.owner.iter().all(Option::is_some)
    }

    pub(crate) fn require_complete(&self) -> Result<()> {
        match self.owner.iter().filter(|o| o.is_none()).count() {
            0 => Ok(()),
            k => Err(Error::PartialAllocation(k)),
        }
    }

    /// Owner array with `-1` for unassigned goods.
    pub fn to_owner_array(&self) -> Vec<i64> {
        self.owner
            .iter()
            .map(|o| o.map_or(-1, |a| a as i64))
            .collect()
    }

    pub fn from_owner_array(n: usize, owner: &[i64]) -> Result<Self> {
        let owner = owner
            .iter()
            .map(|&a| match a {
                -1 => Ok(None),
                a if a >= 0 => Ok(Some(a as usize)),
                a => Err(Error::Parse(format!("owner entry {a} must be an agent index or -1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_owner(n, owner)
    }
}
