use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Instance, Valuation};
use crate::error::{Error, Result};

const EXHAUSTIVE_MAX_GOODS: usize = 12;
const SAMPLED_TRIPLES: usize = 10_000;
const SAMPLE_SEED: u64 = 0x5eed;

/// Summary of an instance's structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub m: usize,
    /// Common `v_i(M)`, if normalised.
    pub normalisation: Option<u32>,
    pub num_types: usize,
    pub unvalued_goods: Vec<usize>,
    /// `true` when the binary-submodularity check was exhaustive.
    pub exhaustive_check: bool,
    pub warnings: Vec<String>,
}

/// Check the instance and report `W`, `r` and any goods nobody values.
pub fn validate(inst: &Instance) -> Result<ValidationReport> {
    let exhaustive = inst.m() <= EXHAUSTIVE_MAX_GOODS;
    for (agent, v) in inst.valuations().iter().enumerate() {
        if exhaustive {
            check_exhaustive(v).map_err(|detail| Error::NotBinarySubmodular { agent, detail })?;
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ agent as u64);
            check_sampled(v, &mut rng).map_err(|detail| Error::NotBinarySubmodular { agent, detail })?;
        }
    }
    let unvalued_goods: Vec<usize> = (0..inst.m())
        .filter(|&g| inst.valuations().iter().all(|v| !v.singleton(g)))
        .collect();
    let mut warnings: Vec<String> = unvalued_goods
        .iter()
        .map(|g| format!("good {g} valued by no agent"))
        .collect();
    let normalisation = inst.normalisation();
    if normalisation.is_none() {
        warnings.push("instance is not normalised".to_string());
    }
    Ok(ValidationReport {
        n: inst.n(),
        m: inst.m(),
        normalisation,
        num_types: inst.num_types(),
        unvalued_goods,
        exhaustive_check: exhaustive,
        warnings,
    })
}

/// Local conditions over the full value table: `v(∅) = 0`, unit increments,
/// and `v(S+g) + v(S+h) ≥ v(S+g+h) + v(S)`. Together these are equivalent to
/// being a matroid rank function.
fn check_exhaustive(v: &Valuation) -> std::result::Result<(), String> {
    let m = v.num_goods();
    let table = v.value_table();
    if table[0] != 0 {
        return Err("value of the empty bundle is nonzero".into());
    }
    for s in 0..(1usize << m) {
        for g in (0..m).filter(|g| s >> g & 1 == 0) {
            let sg = s | 1 << g;
            let inc = table[sg] as i64 - table[s] as i64;
            if !(0..=1).contains(&inc) {
                return Err(format!("marginal {inc} of good {g} on bundle mask {s:#x}"));
            }
            for h in (g + 1..m).filter(|h| s >> h & 1 == 0) {
                let sh = s | 1 << h;
                if table[sg] + table[sh] < table[sg | 1 << h] + table[s] {
                    return Err(format!("goods {g}, {h} violate submodularity on mask {s:#x}"));
                }
            }
        }
    }
    Ok(())
}

fn check_sampled(v: &Valuation, rng: &mut impl Rng) -> std::result::Result<(), String> {
    let m = v.num_goods();
    if m == 0 {
        return Ok(());
    }
    for _ in 0..SAMPLED_TRIPLES {
        let g = rng.random_range(0..m);
        let mut small = Vec::new();
        let mut large = Vec::new();
        for h in (0..m).filter(|&h| h != g) {
            match rng.random_range(0..3) {
                0 => {
                    small.push(h);
                    large.push(h);
                }
                1 => large.push(h),
                _ => {}
            }
        }
        let ms = v.marginal_of(small.iter().copied(), g) as i64;
        let ml = v.marginal_of(large.iter().copied(), g) as i64;
        let vs = v.value_of(small.iter().copied());
        let vl = v.value_of(large.iter().copied());
        if !(0..=1).contains(&ms) || !(0..=1).contains(&ml) || ms < ml || vs > vl {
            return Err(format!("sampled triple on good {g} violates binary submodularity"));
        }
    }
    Ok(())
}
