//! Cross-checks of the solver against the exhaustive oracle and the
//! structural bounds, over a seeded corpus.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::doubly::{is_doubly_normalised, solve_flow};
use crate::error::Result;
use crate::generators::{gen_doubly_normalised, named_fixtures, random};
use crate::model::{is_eq1, wasted_goods, Allocation, Instance};
use crate::oracle::{enumerate, OracleResult};
use crate::rank::rank_of_instance;
use crate::solver::{solve, SolveResult};
use crate::welfare::{PParam, WelfareKey, FLOAT_REL_TOL};

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub budget: u64,
    pub random_cases: usize,
    pub doubly_cases: usize,
    pub seed: u64,
    /// Corrupt `B` on the first case to prove the gates can fail.
    pub self_test: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            budget: crate::oracle::DEFAULT_BUDGET,
            random_cases: 200,
            doubly_cases: 200,
            seed: 2024,
            self_test: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GateOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl GateOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random small instances: additive and matroid, all normalised.
pub fn oracle_corpus(seed: u64, count: usize) -> Vec<(String, Instance)> {
    let mut rng = random::rng(seed);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=8);
        let w = rng.random_range(1..=m);
        let (kind, inst) = match k % 3 {
            0 => ("additive", random::normalised_additive(&mut rng, n, m, w)),
            1 => ("matroid", random::normalised_matroid(&mut rng, n, m, w.min(4))),
            _ => ("mixed", random::mixed_normalised(&mut rng, n, m, w.min(4))),
        };
        out.push((format!("random_{kind}_{k}"), inst));
    }
    out
}

/// Random biregular instances with `n, m ≤ 12`.
pub fn doubly_corpus(seed: u64, count: usize) -> Vec<(String, Instance)> {
    let mut rng = random::rng(seed ^ 0xd0b1);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n: usize = rng.random_range(1..=12);
        let m: usize = rng.random_range(1..=12);
        let wc = rng.random_range(1..=n);
        if !(m * wc).is_multiple_of(n) {
            continue;
        }
        let w = m * wc / n;
        if w > m {
            continue;
        }
        let seed = rng.random();
        let inst = gen_doubly_normalised(n, m, w, wc, seed).expect("feasible parameters");
        out.push((format!("doubly_{n}x{m}_w{w}_c{wc}_{}", out.len()), inst));
    }
    out
}

fn keys_match(a: &WelfareKey, b: &WelfareKey) -> bool {
    a.matches(b, FLOAT_REL_TOL)
}

/// A swap of two goods between agents that breaks EQ1, if one exists.
pub fn corrupt(inst: &Instance, b: &Allocation) -> Option<Allocation> {
    let m = inst.m();
    for g in 0..m {
        for h in g + 1..m {
            let (Some(i), Some(j)) = (b.owner(g), b.owner(h)) else { continue };
            if i == j {
                continue;
            }
            let mut owner: Vec<Option<usize>> = b.owners().to_vec();
            owner.swap(g, h);
            let c = Allocation::from_owner(inst.n(), owner).ok()?;
            if !is_eq1(inst, &c).unwrap_or(true) {
                return Some(c);
            }
        }
    }
    (0..m).find_map(|g| {
        let mut owner: Vec<Option<usize>> = b.owners().to_vec();
        owner[g] = Some((b.owner(g)? + 1) % inst.n());
        let c = Allocation::from_owner(inst.n(), owner).ok()?;
        (!is_eq1(inst, &c).unwrap_or(true)).then_some(c)
    })
}

struct Case {
    name: String,
    inst: Instance,
    solved: SolveResult,
    oracle: OracleResult,
}

fn timed(name: &'static str, cases: usize, f: impl FnOnce(&mut Vec<String>)) -> GateOutcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    f(&mut failures);
    GateOutcome { name, cases, failures, elapsed: start.elapsed() }
}

/// Run every gate; a budget refusal on any configured case propagates.
pub fn run_verification(cfg: &VerifyConfig) -> Result<Vec<GateOutcome>> {
    let grid = PParam::standard_grid();
    let mut gates = Vec::new();

    let start = Instant::now();
    let mut corpus = named_fixtures();
    corpus.extend(oracle_corpus(cfg.seed, cfg.random_cases));
    let mut cases = Vec::with_capacity(corpus.len());
    let mut setup_failures = Vec::new();
    for (name, inst) in corpus {
        let solved = match solve(&inst, &grid) {
            Ok(s) => s,
            Err(e) => {
                setup_failures.push(format!("{name}: solver error: {e}"));
                continue;
            }
        };
        let oracle = enumerate(&inst, &grid, cfg.budget).map_err(|e| crate::error::Error::BudgetExceeded {
            needed: format!("{name}: {e}"),
            budget: cfg.budget,
        })?;
        cases.push(Case { name, inst, solved, oracle });
    }
    gates.push(GateOutcome {
        name: "solve and enumerate corpus",
        cases: cases.len(),
        failures: setup_failures,
        elapsed: start.elapsed(),
    });

    if cfg.self_test {
        if let Some(case) = cases.iter_mut().find(|c| corrupt(&c.inst, &c.solved.b).is_some()) {
            case.solved.b = corrupt(&case.inst, &case.solved.b).expect("found above");
        }
    }

    gates.push(timed("best EQ1 allocation", cases.len(), |fails| {
        for c in &cases {
            if !is_eq1(&c.inst, &c.solved.b).unwrap_or(false) {
                fails.push(format!("{}: B is not EQ1", c.name));
                continue;
            }
            let vb = c.inst.values(&c.solved.b);
            for e in &c.oracle.entries {
                let key = WelfareKey::of(&vb, &e.p);
                if !keys_match(&key, &e.best_eq1_key) {
                    fails.push(format!("{}: p = {}: B {:?} vs oracle {:?}", c.name, e.p, key, e.best_eq1_key));
                }
            }
        }
    }));

    gates.push(timed("simultaneous p-mean optimum", cases.len(), |fails| {
        for c in &cases {
            let va = c.inst.values(&c.solved.a_star);
            for e in &c.oracle.entries {
                let key = WelfareKey::of(&va, &e.p);
                if !keys_match(&key, &e.best_key) {
                    fails.push(format!("{}: p = {}: A* {:?} vs oracle {:?}", c.name, e.p, key, e.best_key));
                }
            }
        }
    }));

    gates.push(timed("leximin when balanced", cases.len(), |fails| {
        for c in &cases {
            let va = c.inst.values(&c.solved.a_star);
            let positive: Vec<u32> = va.iter().copied().filter(|&v| v > 0).collect();
            let (lo, hi) = (positive.iter().min(), positive.iter().max());
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if hi - lo <= 1 {
                    let mut sorted = va.clone();
                    sorted.sort_unstable();
                    if sorted != c.oracle.leximin_vector {
                        fails.push(format!("{}: {:?} vs leximin {:?}", c.name, sorted, c.oracle.leximin_vector));
                    }
                }
            }
        }
    }));

    gates.push(timed("waste bound by rank", cases.len(), |fails| {
        for c in &cases {
            if !c.inst.is_additive() || c.inst.normalisation().is_none() {
                continue;
            }
            if (0..c.inst.m()).any(|g| c.inst.valuations().iter().all(|v| !v.singleton(g))) {
                continue;
            }
            let rank = rank_of_instance(&c.inst).expect("additive");
            let wasted = wasted_goods(&c.inst, &c.solved.b).expect("valid").len();
            if wasted * rank > c.inst.m() * (rank - 1) {
                fails.push(format!("{}: {wasted} wasted, m = {}, rank {rank}", c.name, c.inst.m()));
            }
            let poe1 = c.solved.poe_for(&PParam::utilitarian()).expect("grid has p = 1").to_f64();
            if poe1 > rank as f64 + 1e-12 {
                fails.push(format!("{}: utilitarian PoE {poe1} above rank {rank}", c.name));
            }
        }
    }));

    gates.push(timed("matroid floor W/(2n)", cases.len(), |fails| {
        for c in &cases {
            let Some(w) = c.inst.normalisation() else { continue };
            if c.inst.is_additive() {
                continue;
            }
            let n = c.inst.n() as u64;
            for (i, v) in c.inst.values(&c.solved.b).into_iter().enumerate() {
                if v > 0 && 2 * n * u64::from(v) < u64::from(w) {
                    fails.push(format!("{}: agent {i} has {v} < W/(2n) = {w}/{}", c.name, 2 * n));
                }
            }
        }
    }));

    let doubly = doubly_corpus(cfg.seed, cfg.doubly_cases);
    gates.push(timed("doubly normalised PoE 1", doubly.len(), |fails| {
        for (name, inst) in &doubly {
            if is_doubly_normalised(inst).is_none() {
                fails.push(format!("{name}: generator output not doubly normalised"));
                continue;
            }
            let res = match solve(inst, &grid) {
                Ok(r) => r,
                Err(e) => {
                    fails.push(format!("{name}: {e}"));
                    continue;
                }
            };
            for (p, v) in &res.poe {
                let ok = match p {
                    PParam::Nash => v.is_exactly_one(),
                    _ if p.is_utilitarian() => v.is_exactly_one(),
                    _ => v.to_f64() <= 1.0 + FLOAT_REL_TOL,
                };
                if !ok {
                    fails.push(format!("{name}: PoE at p = {p} is {v}"));
                }
            }
            match solve_flow(inst) {
                Ok(flow) => {
                    let vf = inst.values(&flow);
                    let va = inst.values(&res.a_star);
                    for p in &grid {
                        if !keys_match(&WelfareKey::of(&vf, p), &WelfareKey::of(&va, p)) {
                            fails.push(format!("{name}: flow allocation below A* at p = {p}"));
                        }
                    }
                }
                Err(e) => fails.push(format!("{name}: {e}")),
            }
        }
    }));

    Ok(gates)
}
