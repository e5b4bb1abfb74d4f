//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::One;
use poe_core::bounds::{lambda_family_poe, poe_lower_bound, poe_upper_bound};
use poe_core::doubly::{bvn_decompose, decode_allocation, eating_matrix, ex_ante_values, is_doubly_normalised, randomized_allocation};
use poe_core::generators::{
    example1, gen_lower_bound_instance, gen_submodular_lb_instance, named_fixtures, random, unnormalised_pair,
};
use poe_core::model::{is_eq1, wasted_goods};
use poe_core::oracle::{enumerate, DEFAULT_BUDGET};
use poe_core::rank::rank_of_instance;
use poe_core::solver::{max_utilitarian_clean, solve};
use poe_core::verify::{doubly_corpus, oracle_corpus};
use poe_core::welfare::{power_mean, PParam, WelfareKey, FLOAT_REL_TOL};
use poe_core::{Instance, PoeValue};
use rand::Rng;

type Outcome = Result<String, String>;

fn p(num: i64, den: i64) -> PParam {
    PParam::from_ratio(num, den).unwrap()
}

fn rat(a: u64, b: u64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let util = PParam::utilitarian();
    for r in 2..=5 {
        for w in 1..=4u32 {
            let inst = gen_lower_bound_instance(r, w as usize).map_err(|e| e.to_string())?;
            let res = solve(&inst, std::slice::from_ref(&util)).map_err(|e| e.to_string())?;
            let expect = lambda_family_poe(&util, w, r).unwrap();
            ensure(res.poe[0].1 == expect, || format!("r={r} W={w}: {} vs {expect}", res.poe[0].1))?;
        }
    }
    let inst = gen_lower_bound_instance(2, 2).unwrap();
    let res = solve(&inst, std::slice::from_ref(&util)).unwrap();
    let oracle = enumerate(&inst, std::slice::from_ref(&util), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let e = &oracle.entries[0];
    ensure(oracle.enumeration_count == 256, || format!("{} assignments", oracle.enumeration_count))?;
    ensure(e.best_key == WelfareKey::of(&res.opt.values, &util), || "numerator optimum differs".into())?;
    ensure(e.best_eq1_key == WelfareKey::of(&res.fair.values, &util), || "denominator optimum differs".into())?;
    ensure(e.exact_poe == PoeValue::Rational(rat(4, 3)), || format!("oracle PoE {}", e.exact_poe))?;
    Ok("16 family cells exact; 256-assignment enumeration gives 4/3".into())
}

fn criterion_2() -> Outcome {
    let mut notes = Vec::new();
    for s in 2..=4usize {
        let inst = gen_lower_bound_instance(s + 1, s * s).unwrap();
        let res = solve(&inst, &[PParam::utilitarian()]).map_err(|e| e.to_string())?;
        ensure(res.poe[0].1 == PoeValue::Rational(rat(s as u64, 1)), || format!("p=1 s={s}: {}", res.poe[0].1))?;
    }
    for s in [4usize, 8, 16] {
        let sf = s as f64;
        let w = (sf / sf.ln()).ceil() as usize;
        let inst = gen_lower_bound_instance(s + 1, w).unwrap();
        let res = solve(&inst, &[PParam::Nash]).map_err(|e| e.to_string())?;
        let got = res.poe[0].1.to_f64();
        let lb = poe_lower_bound(&PParam::Nash, s + 1).unwrap();
        ensure(got >= lb, || format!("p=0 s={s} W={w}: {got} < {lb}"))?;
        notes.push(format!("s={s}:{got:.3}"));
    }
    for s in [4usize, 9, 16] {
        let sf = s as f64;
        let w = sf.sqrt().ceil() as usize;
        let inst = gen_lower_bound_instance(s + 1, w).unwrap();
        let res = solve(&inst, &[p(-1, 1)]).map_err(|e| e.to_string())?;
        let got = res.poe[0].1.to_f64();
        let lb = 0.5 * sf.sqrt() - 0.05;
        ensure(got >= lb, || format!("p=-1 s={s} W={w}: {got} < {lb}"))?;
    }
    Ok(format!("p=1 exact s; Nash PoE {}", notes.join(" ")))
}

fn criterion_3() -> Outcome {
    let grid = PParam::standard_grid();
    let mut corpus = named_fixtures();
    corpus.extend(oracle_corpus(7, 240));
    let mut checked = 0;
    for (name, inst) in &corpus {
        let res = solve(inst, &grid).map_err(|e| format!("{name}: {e}"))?;
        let oracle = enumerate(inst, &grid, DEFAULT_BUDGET).map_err(|e| format!("{name}: {e}"))?;
        for e in &oracle.entries {
            let a = WelfareKey::of(&res.opt.values, &e.p);
            let b = WelfareKey::of(&res.fair.values, &e.p);
            ensure(a.matches(&e.best_key, FLOAT_REL_TOL), || format!("{name} p={}: A* {a:?} vs {:?}", e.p, e.best_key))?;
            ensure(b.matches(&e.best_eq1_key, FLOAT_REL_TOL), || {
                format!("{name} p={}: B {b:?} vs {:?}", e.p, e.best_eq1_key)
            })?;
        }
        checked += 1;
    }
    Ok(format!("{checked} instances, 5 exponents each"))
}

/// Random normalised additive instances with every good valued.
fn additive_corpus(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = random::rng(seed);
    (0..count)
        .map(|_| {
            let n: usize = rng.random_range(2..=7);
            let m: usize = rng.random_range(2..=12);
            let w = rng.random_range(m.div_ceil(n)..=m);
            random::normalised_additive_covering(&mut rng, n, m, w)
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let util = PParam::utilitarian();
    let corpus = additive_corpus(41, 250);
    for (k, inst) in corpus.iter().enumerate() {
        let rank = rank_of_instance(inst).unwrap();
        let res = solve(inst, std::slice::from_ref(&util)).map_err(|e| e.to_string())?;
        let poe = res.poe[0].1.as_rational().ok_or("utilitarian PoE not rational")?;
        ensure(*poe <= rat(rank as u64, 1), || format!("case {k}: PoE {poe} > rank {rank}"))?;
        let wasted = wasted_goods(inst, &res.b).unwrap().len();
        ensure(wasted * rank <= inst.m() * (rank - 1), || {
            format!("case {k}: {wasted} wasted goods, m={}, rank={rank}", inst.m())
        })?;
    }
    Ok(format!("{} instances", corpus.len()))
}

fn criterion_5() -> Outcome {
    let grid = [p(1, 1), p(9, 10), p(1, 2), p(1, 10), PParam::Nash, p(-1, 2), p(-1, 1), p(-2, 1), p(-10, 1)];
    for q in &grid {
        for r in 2..=64 {
            let up = poe_upper_bound(q, r).unwrap();
            if let Ok(lo) = poe_lower_bound(q, r) {
                ensure(lo <= up, || format!("p={q} r={r}: lower {lo} > upper {up}"))?;
            }
        }
    }
    let mut corpus = additive_corpus(43, 150);
    for (r, w) in [(2, 1), (2, 2), (2, 3), (3, 2), (3, 4), (4, 3), (5, 4), (6, 2)] {
        corpus.push(gen_lower_bound_instance(r, w).unwrap());
    }
    corpus.extend(oracle_corpus(7, 240).into_iter().map(|(_, i)| i).filter(|i| i.is_additive()));
    let mut worst = (0.0f64, String::new());
    for inst in &corpus {
        let res = solve(inst, &grid).map_err(|e| e.to_string())?;
        let r = inst.num_types();
        for (q, v) in &res.poe {
            let got = v.to_f64();
            let up = if r >= 2 { poe_upper_bound(q, r).unwrap() } else { 1.0 };
            ensure(got <= up + 1e-9, || format!("p={q} r={r} n={} m={}: PoE {got} > upper {up}", inst.n(), inst.m()))?;
            if r >= 2 && got / up > worst.0 {
                worst = (got / up, format!("p={q} r={r}"));
            }
        }
    }
    Ok(format!("{} instances; tightest PoE/upper {:.3} at {}", corpus.len(), worst.0, worst.1))
}

fn criterion_6() -> Outcome {
    let inst = example1();
    let em = eating_matrix(&inst).map_err(|e| e.to_string())?;
    let mut entries: Vec<BigRational> = em.matrix.entries().iter().flatten().filter(|x| **x > BigRational::from_integer(0.into())).cloned().collect();
    entries.sort();
    entries.dedup();
    ensure(entries == vec![rat(1, 6), rat(1, 4), rat(1, 3)], || format!("entries {entries:?}"))?;
    let bvn = bvn_decompose(&em.matrix).map_err(|e| e.to_string())?;
    ensure(bvn.total_weight().is_one(), || "weights do not sum to 1".into())?;
    ensure(bvn.reconstruct(em.matrix.dim()) == em.matrix.entries(), || "reconstruction differs".into())?;
    for (_, perm) in &bvn.terms {
        let a = decode_allocation(&inst, perm, &em).unwrap();
        ensure(is_eq1(&inst, &a).unwrap(), || format!("decoded {:?} not EQ1", a.to_owner_array()))?;
        ensure(inst.values(&a).iter().sum::<u32>() == 6, || "decoded welfare not 6".into())?;
    }
    let corpus = doubly_corpus(5, 200);
    for (name, inst) in &corpus {
        let (w, wc) = is_doubly_normalised(inst).ok_or(format!("{name} not doubly normalised"))?;
        let res = solve(inst, &[PParam::utilitarian(), PParam::Nash]).map_err(|e| format!("{name}: {e}"))?;
        for (q, v) in &res.poe {
            ensure(v.is_exactly_one(), || format!("{name}: PoE at {q} is {v}"))?;
        }
        let lottery = randomized_allocation(inst).map_err(|e| format!("{name}: {e}"))?;
        let target = BigRational::new(w.into(), wc.into());
        ensure(ex_ante_values(inst, &lottery).iter().all(|v| *v == target), || format!("{name}: ex-ante values"))?;
    }
    Ok(format!("Example 1 {} BvN terms; {} biregular instances", bvn.terms.len(), corpus.len()))
}

fn criterion_7() -> Outcome {
    let util = PParam::utilitarian();
    for k in 2..=4u32 {
        let inst = gen_submodular_lb_instance(k as usize).unwrap();
        let u = max_utilitarian_clean(&inst).map_err(|e| e.to_string())?;
        ensure(inst.values(&u).iter().sum::<u32>() == k + k * k, || format!("k={k}: optimum welfare"))?;
        let res = solve(&inst, std::slice::from_ref(&util)).map_err(|e| e.to_string())?;
        let bw: u32 = res.fair.values.iter().sum();
        ensure(bw <= 3 * k, || format!("k={k}: B welfare {bw} > {}", 3 * k))?;
    }
    let small = gen_submodular_lb_instance(2).unwrap();
    let oracle = enumerate(&small, std::slice::from_ref(&util), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(oracle.max_utilitarian == 6, || format!("oracle optimum {}", oracle.max_utilitarian))?;

    let mut rng = random::rng(77);
    let mut corpus: Vec<Instance> = (2..=4).map(|k| gen_submodular_lb_instance(k).unwrap()).collect();
    for _ in 0..150 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=10);
        let w = rng.random_range(1..=m.min(5));
        corpus.push(random::normalised_matroid(&mut rng, n, m, w));
    }
    corpus.extend(oracle_corpus(7, 240).into_iter().map(|(_, i)| i).filter(|i| !i.is_additive()));
    let grid = [util, PParam::Nash, p(-1, 1)];
    for inst in &corpus {
        let w = u64::from(inst.normalisation().unwrap());
        let n = inst.n() as u64;
        let res = solve(inst, &grid).map_err(|e| e.to_string())?;
        for (i, &v) in res.fair.values.iter().enumerate() {
            ensure(v == 0 || 2 * n * u64::from(v) >= w, || format!("agent {i}: {v} < W/(2n) with W={w} n={n}"))?;
        }
        for (q, v) in &res.poe {
            ensure(v.to_f64() <= 2.0 * n as f64 + 1e-9, || format!("p={q}: PoE {v} > 2n = {}", 2 * n))?;
        }
    }
    Ok(format!("families k=2..4; {} matroid instances", corpus.len()))
}

fn criterion_8() -> Outcome {
    let grid = [PParam::utilitarian(), PParam::Nash, p(-1, 1), PParam::MinusInfinity];
    let mut rng = random::rng(88);
    for k in 0..100 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=12);
        let w = rng.random_range(1..=m.min(6));
        let inst = random::identical_matroid(&mut rng, n, m, w);
        let res = solve(&inst, &grid).map_err(|e| e.to_string())?;
        for (q, v) in &res.poe {
            let exact = v.is_exactly_one() || matches!(v, PoeValue::Float(x) if *x == 1.0);
            ensure(exact, || format!("case {k} p={q}: PoE {v}"))?;
        }
    }
    Ok("100 identical-valuation instances".into())
}

fn criterion_9() -> Outcome {
    let mut rng = random::rng(99);
    let tol = 1e-9;
    let concave_grid = [p(9, 10), p(1, 2), p(1, 10), PParam::Nash, p(-1, 2), p(-1, 1), p(-2, 1), p(-10, 1)];
    let average_grid = [PParam::utilitarian(), p(1, 2), PParam::Nash, p(-1, 1), p(-10, 1), PParam::MinusInfinity];
    let vector = |rng: &mut rand_chacha::ChaCha8Rng, len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.random_range(0.05..20.0)).collect()
    };
    for trial in 0..1000 {
        let len = rng.random_range(1..=8);
        let (x, y) = (vector(&mut rng, len), vector(&mut rng, len));
        let t: f64 = rng.random();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        for q in &concave_grid {
            let lhs = power_mean(&mix, q);
            let rhs = t * power_mean(&x, q) + (1.0 - t) * power_mean(&y, q);
            ensure(lhs >= rhs - tol * rhs.max(1.0), || format!("concavity trial {trial} p={q}: {lhs} < {rhs}"))?;
        }
    }
    for trial in 0..1000 {
        let len = rng.random_range(1..=8);
        let x = vector(&mut rng, len);
        let subset: Vec<usize> = (0..len).filter(|_| rng.random_bool(0.5)).collect();
        let mut avg = x.clone();
        if !subset.is_empty() {
            let mean = subset.iter().map(|&i| x[i]).sum::<f64>() / subset.len() as f64;
            for &i in &subset {
                avg[i] = mean;
            }
        }
        for q in &average_grid {
            let (before, after) = (power_mean(&x, q), power_mean(&avg, q));
            ensure(after >= before - tol * before.max(1.0), || format!("averaging trial {trial} p={q}: {after} < {before}"))?;
        }
    }
    for trial in 0..1000 {
        let len = rng.random_range(1..=8);
        let x = vector(&mut rng, len);
        let l = len as f64;
        for pe in [1.0, 0.9, 0.5, 0.1, 0.0, -0.5, -1.0, -2.0, -10.0] {
            let lhs = x.iter().map(|v| v.powf(1.0 - pe)).sum::<f64>() / l;
            let rhs = (x.iter().sum::<f64>() / l).powf(1.0 - pe);
            let slack = tol * lhs.abs().max(rhs.abs()).max(1.0);
            let ok = if pe >= 0.0 { lhs <= rhs + slack } else { lhs >= rhs - slack };
            ensure(ok, || format!("Jensen trial {trial} p={pe}: {lhs} vs {rhs}"))?;
        }
    }
    Ok("concavity, averaging and Jensen on 1000 vectors each".into())
}

fn criterion_10() -> Outcome {
    for k in [6u64, 9] {
        let inst = unnormalised_pair(k as usize).unwrap();
        let oracle = enumerate(&inst, &[PParam::utilitarian()], DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let got = &oracle.entries[0].exact_poe;
        ensure(*got == PoeValue::Rational(rat(k, 3)), || format!("k={k}: PoE {got}"))?;
    }
    Ok("k = 6, 9 give k/3".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("lower-bound family exactness", criterion_1),
        ("W-rule lower bounds", criterion_2),
        ("oracle gates for A* and B", criterion_3),
        ("rank bound and waste bound", criterion_4),
        ("upper-bound envelope", criterion_5),
        ("doubly normalised PoE 1 and Example 1", criterion_6),
        ("matroid family and floor", criterion_7),
        ("identical valuations", criterion_8),
        ("p-mean properties", criterion_9),
        ("unnormalised pair", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({detail}) [{secs:.2}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
