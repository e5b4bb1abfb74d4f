//! Fairness predicates and waste handling on allocations.

use super::{Allocation, Instance};
use crate::error::Result;

fn bundles_and_values(inst: &Instance, alloc: &Allocation) -> Result<(Vec<Vec<usize>>, Vec<u32>)> {
    inst.check_allocation(alloc)?;
    alloc.require_complete()?;
    let bundles = alloc.bundles();
    let values = inst
        .valuations()
        .iter()
        .zip(&bundles)
        .map(|(v, b)| v.value_of(b.iter().copied()))
        .collect();
    Ok((bundles, values))
}

/// Smallest value `agent` can have for `bundle` minus one good.
fn min_after_removal(inst: &Instance, agent: usize, bundle: &[usize]) -> u32 {
    let v = inst.valuation(agent);
    (0..bundle.len())
        .map(|skip| {
            v.value_of(
                bundle
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, &g)| g),
            )
        })
        .min()
        .expect("bundle is nonempty")
}

/// Equitable up to one good.
pub fn is_eq1(inst: &Instance, alloc: &Allocation) -> Result<bool> {
    let (bundles, values) = bundles_and_values(inst, alloc)?;
    for (k, bundle) in bundles.iter().enumerate() {
        if bundle.is_empty() {
            continue;
        }
        let reduced = min_after_removal(inst, k, bundle);
        if values
            .iter()
            .enumerate()
            .any(|(i, &vi)| i != k && vi < reduced)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Envy-free up to one good.
pub fn is_ef1(inst: &Instance, alloc: &Allocation) -> Result<bool> {
    let (bundles, values) = bundles_and_values(inst, alloc)?;
    for (k, bundle) in bundles.iter().enumerate() {
        if bundle.is_empty() {
            continue;
        }
        for (i, &vi) in values.iter().enumerate() {
            if i != k && vi < min_after_removal(inst, i, bundle) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Envy-free.
pub fn is_ef(inst: &Instance, alloc: &Allocation) -> Result<bool> {
    let (bundles, values) = bundles_and_values(inst, alloc)?;
    for (i, &vi) in values.iter().enumerate() {
        let v = inst.valuation(i);
        if bundles
            .iter()
            .enumerate()
            .any(|(k, b)| k != i && vi < v.value_of(b.iter().copied()))
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Equitable.
pub fn is_eq(inst: &Instance, alloc: &Allocation) -> Result<bool> {
    let (_, values) = bundles_and_values(inst, alloc)?;
    Ok(values.windows(2).all(|w| w[0] == w[1]))
}

/// Assigned goods whose removal leaves the owner's value unchanged. Each good
/// is tested against its owner's full bundle.
pub fn wasted_goods(inst: &Instance, alloc: &Allocation) -> Result<Vec<usize>> {
    inst.check_allocation(alloc)?;
    let bundles = alloc.bundles();
    let full: Vec<u32> = inst
        .valuations()
        .iter()
        .zip(&bundles)
        .map(|(v, b)| v.value_of(b.iter().copied()))
        .collect();
    let mut wasted = Vec::new();
    for g in 0..alloc.m() {
        if let Some(i) = alloc.owner(g) {
            let without = inst
                .valuation(i)
                .value_of(bundles[i].iter().copied().filter(|&h| h != g));
            if without == full[i] {
                wasted.push(g);
            }
        }
    }
    Ok(wasted)
}

pub fn is_clean(inst: &Instance, alloc: &Allocation) -> Result<bool> {
    Ok(wasted_goods(inst, alloc)?.is_empty())
}

/// Drop wasted goods into the pool, ascending by index, re-testing against
/// the shrinking bundle. Values are preserved.
pub fn make_clean(inst: &Instance, alloc: &Allocation) -> Result<Allocation> {
    inst.check_allocation(alloc)?;
    let mut out = alloc.clone();
    for (i, bundle) in alloc.bundles().into_iter().enumerate() {
        let v = inst.valuation(i);
        let mut current = bundle;
        let mut idx = 0;
        while idx < current.len() {
            let g = current[idx];
            let before = v.value_of(current.iter().copied());
            let after = v.value_of(current.iter().copied().filter(|&h| h != g));
            if after == before {
                current.remove(idx);
                out.assign(g, None);
            } else {
                idx += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Gf2Vec;
    use crate::model::Valuation;

    fn additive(rows: &[Vec<u8>]) -> Instance {
        Instance::from_additive_rows(rows).unwrap()
    }

    #[test]
    fn equal_values_are_eq1() {
        let inst = additive(&[vec![1, 0, 1, 0], vec![0, 1, 0, 1]]);
        let a = Allocation::from_bundles(4, &[vec![0, 2], vec![1, 3]]).unwrap();
        assert!(is_eq(&inst, &a).unwrap());
        assert!(is_eq1(&inst, &a).unwrap());
    }

    #[test]
    fn zero_against_two_fails_eq1() {
        let inst = additive(&[vec![0, 0], vec![1, 1]]);
        let a = Allocation::from_bundles(2, &[vec![], vec![0, 1]]).unwrap();
        assert!(!is_eq1(&inst, &a).unwrap());
    }

    #[test]
    fn single_agent_satisfies_everything() {
        let inst = additive(&[vec![1, 0, 1]]);
        let a = Allocation::from_bundles(3, &[vec![0, 1, 2]]).unwrap();
        assert!(is_eq1(&inst, &a).unwrap());
        assert!(is_ef1(&inst, &a).unwrap());
        assert!(is_eq(&inst, &a).unwrap());
        assert!(is_ef(&inst, &a).unwrap());
    }

    #[test]
    fn partial_allocation_rejected() {
        let inst = additive(&[vec![1, 1]]);
        let a = Allocation::from_bundles(2, &[vec![0]]).unwrap();
        assert!(is_eq1(&inst, &a).is_err());
        assert!(is_ef(&inst, &a).is_err());
        // waste handling accepts partial allocations
        assert_eq!(wasted_goods(&inst, &a).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn zero_valued_good_is_wasted_and_cleaned() {
        let inst = additive(&[vec![1, 0, 1], vec![0, 1, 0]]);
        let a = Allocation::from_bundles(3, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(wasted_goods(&inst, &a).unwrap(), vec![1, 2]);
        let clean = make_clean(&inst, &a).unwrap();
        assert_eq!(clean.unassigned(), vec![1, 2]);
        assert_eq!(inst.values(&clean), inst.values(&a));
        assert_eq!(make_clean(&inst, &clean).unwrap(), clean);
    }

    #[test]
    fn parallel_columns_both_reported_but_one_removed() {
        let e1 = Gf2Vec::unit(2, 0);
        let v = Valuation::matroid(2, vec![e1.clone(), e1]).unwrap();
        let inst = Instance::new(2, vec![v]).unwrap();
        let a = Allocation::from_bundles(2, &[vec![0, 1]]).unwrap();
        // each is wasted against the full bundle
        assert_eq!(wasted_goods(&inst, &a).unwrap(), vec![0, 1]);
        let clean = make_clean(&inst, &a).unwrap();
        assert_eq!(clean.bundle(0), vec![1]);
        assert_eq!(inst.values(&clean), vec![1]);
    }
}
