//! Instance families, named fixtures and seeded random instances.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Vec};
use crate::model::{Instance, Valuation};

fn rows_from_supports(m: usize, supports: &[Vec<usize>]) -> Result<Instance> {
    let vals = supports
        .iter()
        .map(|s| {
            let mut row = vec![false; m];
            for &g in s {
                row[g] = true;
            }
            Valuation::additive(row)
        })
        .collect();
    Instance::new(m, vals)
}

/// `r` groups of `w` goods; `w + 1` agents value group 0 and one agent
/// values each remaining group.
pub fn gen_lower_bound_instance(r: usize, w: usize) -> Result<Instance> {
    if r < 2 || w < 1 {
        return Err(Error::InvalidParameter(format!("need r >= 2 and W >= 1, got r = {r}, W = {w}")));
    }
    let group = |k: usize| (k * w..(k + 1) * w).collect::<Vec<_>>();
    let mut supports = vec![group(0); w + 1];
    supports.extend((1..r).map(group));
    rows_from_supports(r * w, &supports)
}

/// `k` agents seeing only the first group as a basis, and `k` agents
/// seeing every one of the `k + 1` groups as a basis of GF(2)^k.
pub fn gen_submodular_lb_instance(k: usize) -> Result<Instance> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let m = k * (k + 1);
    let first: Vec<Gf2Vec> = (0..m)
        .map(|g| if g < k { Gf2Vec::unit(k, g) } else { Gf2Vec::zeros(k) })
        .collect();
    let every: Vec<Gf2Vec> = (0..m).map(|g| Gf2Vec::unit(k, g % k)).collect();
    let mut vals = Vec::with_capacity(2 * k);
    for _ in 0..k {
        vals.push(Valuation::matroid(k, first.clone())?);
    }
    for _ in 0..k {
        vals.push(Valuation::matroid(k, every.clone())?);
    }
    Instance::new(m, vals)
}

/// Random additive instance where every agent values `w` goods and every
/// good is valued by `wc` agents. Starts from a circulant pattern and mixes
/// it with seeded edge swaps.
pub fn gen_doubly_normalised(n: usize, m: usize, w: usize, wc: usize, seed: u64) -> Result<Instance> {
    if n == 0 || m == 0 || w == 0 || wc == 0 {
        return Err(Error::InvalidParameter("n, m, W and W_c must be positive".into()));
    }
    if n * w != m * wc {
        return Err(Error::InvalidParameter(format!(
            "edge counts differ: n*W = {} but m*W_c = {}",
            n * w,
            m * wc
        )));
    }
    if w > m || wc > n {
        return Err(Error::InvalidParameter(format!("W = {w} > m or W_c = {wc} > n")));
    }
    let mut liked = vec![vec![false; m]; n];
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * w);
    for i in 0..n {
        for t in 0..w {
            let g = (i * w + t) % m;
            liked[i][g] = true;
            edges.push((i, g));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 * edges.len() {
        let x = rng.random_range(0..edges.len());
        let y = rng.random_range(0..edges.len());
        let ((a, g), (b, h)) = (edges[x], edges[y]);
        if a == b || g == h || liked[a][h] || liked[b][g] {
            continue;
        }
        liked[a][g] = false;
        liked[b][h] = false;
        liked[a][h] = true;
        liked[b][g] = true;
        edges[x] = (a, h);
        edges[y] = (b, g);
    }
    Instance::new(m, liked.into_iter().map(Valuation::additive).collect())
}

/// Four agents, six goods, `W = 3`, `W_c = 2`.
pub fn example1() -> Instance {
    rows_from_supports(6, &[vec![0, 1, 2], vec![3, 4, 5], vec![1, 2, 3], vec![0, 4, 5]]).expect("fixture")
}

/// Three agents and four goods: column sums differ but PoE is 1.
pub fn remark_3x4() -> Instance {
    rows_from_supports(4, &[vec![0, 1], vec![2, 3], vec![2, 3]]).expect("fixture")
}

/// Two agents and `k` goods: one agent values only the first good, the
/// other values every good. Utilitarian PoE is `k / 3`.
pub fn unnormalised_pair(k: usize) -> Result<Instance> {
    if k < 2 {
        return Err(Error::InvalidParameter("need at least two goods".into()));
    }
    rows_from_supports(k, &[vec![0], (0..k).collect()])
}

/// All named fixtures with their names.
pub fn named_fixtures() -> Vec<(String, Instance)> {
    let mut out = vec![
        ("example1".to_string(), example1()),
        ("remark_3x4".to_string(), remark_3x4()),
        ("unnormalised_6".to_string(), unnormalised_pair(6).unwrap()),
    ];
    for (r, w) in [(2, 1), (2, 2), (3, 1), (3, 2), (4, 1)] {
        out.push((format!("lb_r{r}_w{w}"), gen_lower_bound_instance(r, w).unwrap()));
    }
    out.push(("submodular_lb_2".to_string(), gen_submodular_lb_instance(2).unwrap()));
    out
}

/// Seeded random instances for tests and verification sweeps.
pub mod random {
    use super::*;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Each agent values a uniform `w`-subset of the goods.
    pub fn normalised_additive(rng: &mut impl Rng, n: usize, m: usize, w: usize) -> Instance {
        assert!(w <= m);
        let goods: Vec<usize> = (0..m).collect();
        let supports: Vec<Vec<usize>> = (0..n)
            .map(|_| goods.choose_multiple(rng, w).copied().collect())
            .collect();
        rows_from_supports(m, &supports).unwrap()
    }

    /// As [`normalised_additive`], redrawn until every good is valued.
    pub fn normalised_additive_covering(rng: &mut impl Rng, n: usize, m: usize, w: usize) -> Instance {
        assert!(n * w >= m, "cannot cover {m} goods with {n} agents of weight {w}");
        loop {
            let inst = normalised_additive(rng, n, m, w);
            if (0..m).all(|g| inst.valuations().iter().any(|v| v.singleton(g))) {
                return inst;
            }
        }
    }

    /// Independent 0/1 rows; agents with all-zero rows are allowed.
    pub fn additive(rng: &mut impl Rng, n: usize, m: usize, density: f64) -> Instance {
        let vals = (0..n)
            .map(|_| Valuation::additive((0..m).map(|_| rng.random_bool(density)).collect()))
            .collect();
        Instance::new(m, vals).unwrap()
    }

    /// Random GF(2) representation of rank exactly `w` on `m` columns, with
    /// occasional zero and repeated columns.
    pub fn matroid_valuation(rng: &mut impl Rng, m: usize, w: usize) -> Valuation {
        assert!(w <= m);
        loop {
            let mut cols: Vec<Gf2Vec> = Vec::with_capacity(m);
            for g in 0..m {
                let col = match rng.random_range(0..6) {
                    0 => Gf2Vec::zeros(w),
                    1 if g > 0 => cols[rng.random_range(0..g)].clone(),
                    _ => Gf2Vec::from_bits(&(0..w).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>()),
                };
                cols.push(col);
            }
            if gf2::rank(w, &cols) == w {
                return Valuation::matroid(w, cols).unwrap();
            }
        }
    }

    /// Normalised matroid instance with common rank `w`.
    pub fn normalised_matroid(rng: &mut impl Rng, n: usize, m: usize, w: usize) -> Instance {
        let vals = (0..n).map(|_| matroid_valuation(rng, m, w)).collect();
        Instance::new(m, vals).unwrap()
    }

    /// Every agent shares one matroid valuation.
    pub fn identical_matroid(rng: &mut impl Rng, n: usize, m: usize, w: usize) -> Instance {
        let v = matroid_valuation(rng, m, w);
        Instance::new(m, vec![v; n]).unwrap()
    }

    /// Normalised instance mixing additive and matroid agents with few types.
    pub fn mixed_normalised(rng: &mut impl Rng, n: usize, m: usize, w: usize) -> Instance {
        let pool_size = rng.random_range(1..=n);
        let pool: Vec<Valuation> = (0..pool_size)
            .map(|_| {
                if rng.random_bool(0.5) {
                    let goods: Vec<usize> = (0..m).collect();
                    let mut row = vec![false; m];
                    for &g in goods.choose_multiple(rng, w) {
                        row[g] = true;
                    }
                    Valuation::additive(row)
                } else {
                    matroid_valuation(rng, m, w)
                }
            })
            .collect();
        let vals = (0..n).map(|_| pool[rng.random_range(0..pool_size)].clone()).collect();
        Instance::new(m, vals).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;
    use crate::welfare::max_positive_count;

    #[test]
    fn lower_bound_family_shape() {
        let inst = gen_lower_bound_instance(2, 2).unwrap();
        assert_eq!((inst.n(), inst.m()), (4, 4));
        let rows = inst.additive_matrix().unwrap();
        let a = vec![true, true, false, false];
        let b = vec![false, false, true, true];
        assert_eq!(rows, vec![a.clone(), a.clone(), a, b]);
        let report = validate(&inst).unwrap();
        assert_eq!((report.normalisation, report.num_types), (Some(2), 2));
        for (r, w) in [(3, 4), (4, 2), (5, 1)] {
            let inst = gen_lower_bound_instance(r, w).unwrap();
            assert_eq!(max_positive_count(&inst), w + r - 1);
            assert_eq!(inst.num_types(), r);
        }
    }

    #[test]
    fn submodular_family_shape() {
        let inst = gen_submodular_lb_instance(2).unwrap();
        assert_eq!((inst.n(), inst.m()), (4, 6));
        assert_eq!(inst.normalisation(), Some(2));
        assert_eq!(inst.num_types(), 2);
        let k = 3;
        let inst = gen_submodular_lb_instance(k).unwrap();
        for j in 0..=k {
            let group: Vec<usize> = (j * k..(j + 1) * k).collect();
            assert_eq!(inst.valuation(k).value(&group).unwrap(), k as u32);
        }
        validate(&inst).unwrap();
    }

    #[test]
    fn doubly_normalised_sums() {
        let inst = gen_doubly_normalised(6, 9, 3, 2, 7).unwrap();
        let rows = inst.additive_matrix().unwrap();
        assert!(rows.iter().all(|r| r.iter().filter(|&&b| b).count() == 3));
        assert!((0..9).all(|g| rows.iter().filter(|r| r[g]).count() == 2));
        assert_eq!(inst, gen_doubly_normalised(6, 9, 3, 2, 7).unwrap());
        assert!(gen_doubly_normalised(4, 6, 3, 3, 0).is_err());
    }

    #[test]
    fn fixtures_are_valid() {
        for (name, inst) in named_fixtures() {
            validate(&inst).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert_eq!(example1().normalisation(), Some(3));
        assert_eq!(unnormalised_pair(6).unwrap().normalisation(), None);
    }

    #[test]
    fn random_matroids_are_normalised() {
        let mut rng = random::rng(3);
        for _ in 0..20 {
            let inst = random::normalised_matroid(&mut rng, 3, 6, 3);
            assert_eq!(inst.normalisation(), Some(3));
            validate(&inst).unwrap();
            let same = random::identical_matroid(&mut rng, 3, 6, 2);
            assert_eq!(same.num_types(), 1);
        }
    }
}
