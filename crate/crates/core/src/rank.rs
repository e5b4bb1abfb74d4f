//! Rank of a 0/1 matrix over the rationals.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::Instance;

/// Exact Gaussian elimination.
pub fn rational_rank(rows: &[Vec<bool>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&b| if b { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let head = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &head[c];
            for (x, h) in row.iter_mut().zip(&head).skip(c) {
                *x -= &f * h;
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the valuation matrix of an additive instance.
pub fn rank_of_instance(inst: &Instance) -> Result<usize> {
    let rows = inst.additive_matrix().ok_or(Error::NotAdditive)?;
    Ok(rational_rank(&rows))
}
