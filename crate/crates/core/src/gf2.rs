//! Dense bit vectors over GF(2) and an incremental xor basis.

use serde::{Deserialize, Serialize};

/// Bit vector over GF(2), packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gf2Vec {
    len: usize,
    words: Vec<u64>,
}

impl Gf2Vec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i);
            }
        }
        v
    }

    /// Standard basis vector `e_index` of length `len`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &Gf2Vec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    /// Index of the highest set bit.
    pub fn leading_bit(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// Xor basis keyed by leading bit. Inserting a vector reports whether it was
/// independent of everything inserted so far.
#[derive(Debug, Clone)]
pub struct Gf2Basis {
    slots: Vec<Option<Gf2Vec>>,
    rank: usize,
}

impl Gf2Basis {
    pub fn new(dim: usize) -> Self {
        Self {
            slots: vec![None; dim],
            rank: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Reduce `v` against the basis; returns the residue.
    pub fn reduce(&self, v: &Gf2Vec) -> Gf2Vec {
        let mut v = v.clone();
        while let Some(bit) = v.leading_bit() {
            match &self.slots[bit] {
                Some(b) => v.xor_assign(b),
                None => break,
            }
        }
        v
    }

    pub fn contains(&self, v: &Gf2Vec) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn insert(&mut self, v: &Gf2Vec) -> bool {
        let v = self.reduce(v);
        match v.leading_bit() {
            Some(bit) => {
                self.slots[bit] = Some(v);
                self.rank += 1;
                true
            }
            None => false,
        }
    }

    /// Fully reduced echelon form: sorted by leading bit, each leading bit
    /// cleared from every other basis vector. Two bases span the same space
    /// iff their reduced forms are equal.
    pub fn reduced_form(&self) -> Vec<Gf2Vec> {
        let mut rows: Vec<Gf2Vec> = self.slots.iter().flatten().cloned().collect();
        rows.sort_by_key(|r| r.leading_bit());
        for i in 0..rows.len() {
            let lead = rows[i].leading_bit().expect("basis vectors are nonzero");
            for j in 0..rows.len() {
                if j != i && rows[j].get(lead) {
                    let pivot = rows[i].clone();
                    rows[j].xor_assign(&pivot);
                }
            }
        }
        rows
    }
}

/// Rank over GF(2) of a collection of vectors of common length `dim`.
pub fn rank<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a Gf2Vec>) -> usize {
    let mut basis = Gf2Basis::new(dim);
    for v in vectors {
        basis.insert(v);
    }
    basis.rank()
}
