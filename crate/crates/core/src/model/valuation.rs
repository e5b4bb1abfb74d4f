use crate::error::{Error, Result};
use crate::gf2::{Gf2Basis, Gf2Vec};

/// A binary submodular valuation over `m` goods.
///
/// Both representations are matroid rank functions by construction: the
/// additive one is the free matroid on the valued goods, the linear one is
/// the column matroid of a 0/1 matrix over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    /// `row[g]` is the value of good `g`.
    BinaryAdditive { row: Vec<bool> },
    /// Good `g` is the column `cols[g]` of a `rows`-row matrix; the value of
    /// a bundle is the rank of its columns.
    LinearMatroidGf2 { rows: usize, cols: Vec<Gf2Vec> },
}

impl Valuation {
    pub fn additive(row: Vec<bool>) -> Self {
        Valuation::BinaryAdditive { row }
    }

    /// Additive valuation from 0/1 integers; anything else is rejected.
    pub fn additive_from_ints(agent: usize, row: &[i64]) -> Result<Self> {
        let mut bits = Vec::with_capacity(row.len());
        for (good, &value) in row.iter().enumerate() {
            match value {
                0 => bits.push(false),
                1 => bits.push(true),
                _ => return Err(Error::NonBinaryEntry { agent, good, value }),
            }
        }
        Ok(Self::additive(bits))
    }

    pub fn matroid(rows: usize, cols: Vec<Gf2Vec>) -> Result<Self> {
        if let Some(bad) = cols.iter().position(|c| c.len() != rows) {
            return Err(Error::InvalidParameter(format!(
                "column {bad} has length {} but the matrix has {rows} rows",
                cols[bad].len()
            )));
        }
        Ok(Valuation::LinearMatroidGf2 { rows, cols })
    }

    pub fn num_goods(&self) -> usize {
        match self {
            Valuation::BinaryAdditive { row } => row.len(),
            Valuation::LinearMatroidGf2 { cols, .. } => cols.len(),
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, Valuation::BinaryAdditive { .. })
    }

    /// Value of a single good, `v({g})`.
    pub fn singleton(&self, g: usize) -> bool {
        match self {
            Valuation::BinaryAdditive { row } => row[g],
            Valuation::LinearMatroidGf2 { cols, .. } => !cols[g].is_zero(),
        }
    }

    fn check_bundle(&self, bundle: &[usize]) -> Result<()> {
        let m = self.num_goods();
        let mut seen = vec![false; m];
        for &g in bundle {
            if g >= m {
                return Err(Error::GoodOutOfRange { good: g, m });
            }
            if std::mem::replace(&mut seen[g], true) {
                return Err(Error::DuplicateGood(g));
            }
        }
        Ok(())
    }

    /// `v(bundle)`.
    pub fn value(&self, bundle: &[usize]) -> Result<u32> {
        self.check_bundle(bundle)?;
        Ok(self.value_of(bundle.iter().copied()))
    }

    /// `v(bundle ∪ {g}) − v(bundle)`.
    pub fn marginal(&self, bundle: &[usize], g: usize) -> Result<u32> {
        self.check_bundle(bundle)?;
        let m = self.num_goods();
        if g >= m {
            return Err(Error::GoodOutOfRange { good: g, m });
        }
        if bundle.contains(&g) {
            return Err(Error::GoodInBundle(g));
        }
        Ok(self.marginal_of(bundle.iter().copied(), g))
    }

    /// Unchecked value of a set of distinct, in-range goods.
    pub(crate) fn value_of(&self, bundle: impl IntoIterator<Item = usize>) -> u32 {
        match self {
            Valuation::BinaryAdditive { row } => bundle.into_iter().filter(|&g| row[g]).count() as u32,
            Valuation::LinearMatroidGf2 { rows, cols } => {
                let mut basis = Gf2Basis::new(*rows);
                let mut rank = 0;
                for g in bundle {
                    if basis.insert(&cols[g]) {
                        rank += 1;
                    }
                }
                rank
            }
        }
    }

    pub(crate) fn marginal_of(&self, bundle: impl IntoIterator<Item = usize>, g: usize) -> u32 {
        match self {
            Valuation::BinaryAdditive { row } => row[g] as u32,
            Valuation::LinearMatroidGf2 { rows, cols } => {
                let mut basis = Gf2Basis::new(*rows);
                for h in bundle {
                    basis.insert(&cols[h]);
                }
                (!basis.contains(&cols[g])) as u32
            }
        }
    }

    /// Value of every subset of goods, indexed by bitmask. Only for small `m`.
    pub fn value_table(&self) -> Vec<u32> {
        let m = self.num_goods();
        assert!(m <= 24, "value table requested for {m} goods");
        let mut table = vec![0u32; 1 << m];
        match self {
            Valuation::BinaryAdditive { row } => {
                let mask: u32 = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(g, _)| 1u32 << g)
                    .sum();
                for (s, v) in table.iter_mut().enumerate() {
                    *v = (s as u32 & mask).count_ones();
                }
            }
            Valuation::LinearMatroidGf2 { .. } => {
                for (s, v) in table.iter_mut().enumerate() {
                    *v = self.value_of((0..m).filter(|g| s >> g & 1 == 1));
                }
            }
        }
        table
    }

    /// Row-space representation of a linear matroid valuation, used to
    /// decide type identity on large ground sets. Additive valuations are
    /// mapped to the identity columns on their support.
    pub(crate) fn row_space(&self) -> Vec<Gf2Vec> {
        let m = self.num_goods();
        match self {
            Valuation::BinaryAdditive { row } => {
                let mut basis = Gf2Basis::new(m);
                for (g, &b) in row.iter().enumerate() {
                    if b {
                        basis.insert(&Gf2Vec::unit(m, g));
                    }
                }
                basis.reduced_form()
            }
            Valuation::LinearMatroidGf2 { rows, cols } => {
                let mut basis = Gf2Basis::new(m);
                for r in 0..*rows {
                    let bits: Vec<bool> = cols.iter().map(|c| c.get(r)).collect();
                    basis.insert(&Gf2Vec::from_bits(&bits));
                }
                basis.reduced_form()
            }
        }
    }
}
