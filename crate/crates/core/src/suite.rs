//! Independent oracles and the acceptance battery.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::bmo::seminorm_dyadic;
use crate::calculus::{cz_decompose, maximal_function, melnikov_select, packing_integral_check, weak_type_check, CubeAverages, CubeFamily};
use crate::choquet::choquet_integral;
use crate::content::{capacity_axiom_report, dyadic_content, ContentParams, DyadicContent};
use crate::corpus::{function_corpus, random_ifs, random_step};
use crate::error::{CapError, Result};
use crate::grid::{DyadicCube, DyadicSet, GridFunction, RootCube};
use crate::jn::{compose_lipschitz, exp_integrability, jn_constants, jn_verify, p_seminorm_report, restrict_hyperplane, PiecewiseLinear};
use crate::potential::{adams_embedding_check, density_range, divergence_example, hutchinson_measure, IFSSpec};

fn all_cubes(root: &RootCube) -> Vec<DyadicCube> {
    let d = root.d();
    (0..=root.n())
        .flat_map(|m| (0..1usize << (d as u32 * m)).map(move |k| DyadicCube::from_morton(d, m, k)))
        .collect()
}

fn cube_cost(root: &RootCube, c: &DyadicCube, beta: f64) -> f64 {
    (root.side() / (1u64 << c.level) as f64).powf(beta)
}

/// Minimum of `Σ l(Q_i)^β` over every family of dyadic cubes covering `E`, by power-set
/// enumeration of the whole tree. Only for trees with at most 20 cubes.
pub fn power_set_content(e: &DyadicSet, beta: f64) -> f64 {
    let root = e.root();
    let cubes = all_cubes(root);
    assert!(cubes.len() <= 20, "power-set oracle limited to 20 cubes");
    let leaf_bits = |c: &DyadicCube| {
        (0..root.leaf_count()).filter(|&r| root.leaf_cube(r).is_within(c)).fold(0u64, |m, r| m | 1 << r)
    };
    let masks: Vec<u64> = cubes.iter().map(leaf_bits).collect();
    let costs: Vec<f64> = cubes.iter().map(|c| cube_cost(root, c, beta)).collect();
    let target = (0..root.leaf_count()).filter(|&r| e.contains_leaf(r)).fold(0u64, |m, r| m | 1 << r);
    // each subset extends the one without its lowest cube
    let total = 1usize << cubes.len();
    let mut cover = vec![0u64; total];
    let mut cost = vec![0.0f64; total];
    let mut best = f64::INFINITY;
    for s in 0..total {
        if s > 0 {
            let low = s.trailing_zeros() as usize;
            cover[s] = cover[s & (s - 1)] | masks[low];
            cost[s] = cost[s & (s - 1)] + costs[low];
        }
        if cover[s] & target == target {
            best = best.min(cost[s]);
        }
    }
    best
}

/// Every antichain cover of `E ∩ c` as its list of cube costs.
fn antichain_covers(root: &RootCube, e: &DyadicSet, c: &DyadicCube, beta: f64) -> Vec<f64> {
    let hit = (0..root.leaf_count()).any(|r| e.contains_leaf(r) && root.leaf_cube(r).is_within(c));
    if !hit {
        return vec![0.0];
    }
    let mut out = vec![cube_cost(root, c, beta)];
    if c.level < root.n() {
        let mut partial = vec![0.0];
        for child in c.children() {
            let sub = antichain_covers(root, e, &child, beta);
            partial = partial.iter().flat_map(|a| sub.iter().map(move |b| a + b)).collect();
        }
        out.extend(partial);
    }
    out
}

/// Minimum over an explicit enumeration of all antichain covers of `E`.
pub fn antichain_content(e: &DyadicSet, beta: f64) -> f64 {
    let root = e.root();
    antichain_covers(root, e, &root.root_cube(), beta).into_iter().fold(f64::INFINITY, f64::min)
}

/// Brute-force content: power set when the tree is tiny, antichain enumeration otherwise.
pub fn brute_force_content(e: &DyadicSet, beta: f64) -> f64 {
    if all_cubes(e.root()).len() <= 15 {
        power_set_content(e, beta)
    } else {
        antichain_content(e, beta)
    }
}

// ---------------------------------------------------------------------------
// random inputs

/// Random set: independent leaves of random density, or a union of random dyadic cubes.
pub fn random_set(rng: &mut impl Rng, root: &RootCube) -> DyadicSet {
    let n = root.n();
    if rng.random::<f64>() < 0.5 {
        let p: f64 = rng.random_range(0.02..0.98);
        let mask = (0..root.leaf_count()).map(|_| rng.random::<f64>() < p).collect();
        DyadicSet::new(root.clone(), mask).expect("mask length matches root")
    } else {
        let mut e = DyadicSet::empty(root.clone());
        for _ in 0..rng.random_range(1..=6) {
            let level = rng.random_range(0..=n);
            let k = rng.random_range(0..1usize << (root.d() as u32 * level));
            let c = DyadicSet::from_cube(root.clone(), &DyadicCube::from_morton(root.d(), level, k)).expect("cube in root");
            e = e.union(&c).expect("same root");
        }
        e
    }
}

/// Random pairwise disjoint dyadic cubes, found by a random descent of the tree.
pub fn random_family(rng: &mut impl Rng, root: &RootCube) -> Vec<DyadicCube> {
    let n = root.n();
    let pick: f64 = rng.random_range(0.05..0.4);
    let drop: f64 = rng.random_range(0.0..0.3);
    let mut out = Vec::new();
    let mut stack = vec![root.root_cube()];
    while let Some(c) = stack.pop() {
        let r: f64 = rng.random();
        if c.level > 0 && r < pick {
            out.push(c);
        } else if c.level > 0 && r < pick + drop {
            continue;
        } else if c.level < n {
            stack.extend(c.children());
        } else if rng.random::<f64>() < 0.5 {
            out.push(c);
        }
    }
    out
}

/// Random nonnegative function: a random step function, optionally sparsified.
pub fn random_nonneg(rng: &mut impl Rng, root: &RootCube) -> GridFunction {
    let f = random_step(rng.random(), root).expect("valid root").abs();
    if rng.random::<f64>() < 0.5 {
        return f;
    }
    let keep: f64 = rng.random_range(0.05..0.5);
    let vals = f.values().iter().map(|&v| if rng.random::<f64>() < keep { v * 4.0 } else { 0.0 }).collect();
    GridFunction::new(root.clone(), vals).expect("finite values")
}

// ---------------------------------------------------------------------------
// packing constant

fn ckey(c: &DyadicCube) -> (u32, usize) {
    (c.level, c.morton_key())
}

/// `max_Q Σ_{Q_k ⊆ Q} l(Q_k)^β / l(Q)^β` over dyadic `Q`.
pub fn packing_constant(family: &[DyadicCube], beta: f64) -> f64 {
    let mut sums: HashMap<(u32, usize), f64> = HashMap::new();
    for c in family {
        let w = 0.5f64.powf(beta * c.level as f64);
        for m in 0..=c.level {
            *sums.entry(ckey(&c.ancestor(m))).or_insert(0.0) += w;
        }
    }
    sums.into_iter().map(|((m, _), s)| s / 0.5f64.powf(beta * m as f64)).fold(0.0, f64::max)
}

/// Maximal dyadic cubes on which the average of `|f|` exceeds `t`, i.e. the components of
/// `{Mf > t}`.
pub fn maximal_cubes(avgs: &CubeAverages, d: usize, t: f64) -> Vec<DyadicCube> {
    let n = avgs.levels() - 1;
    let mut out = Vec::new();
    let mut stack = vec![DyadicCube::root(d)];
    while let Some(c) = stack.pop() {
        if avgs.get(&c) > t {
            out.push(c);
        } else if c.level < n {
            stack.extend(c.children());
        }
    }
    out
}

/// Distinct values of `Mf`, thinned to at most `k`, each nudged down so `{Mf > t}` includes it.
fn thresholds(mf: &GridFunction, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = mf.values().iter().copied().filter(|&x| x > 0.0).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.is_empty() {
        return v;
    }
    let step = v.len().div_ceil(k).max(1);
    let mut out: Vec<f64> = v.iter().step_by(step).copied().collect();
    if out.last() != v.last() {
        out.push(*v.last().unwrap());
    }
    out.into_iter().map(|x| x * (1.0 - 1e-12)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CPrimeMeasurement {
    pub d: usize,
    pub beta: f64,
    pub n: u32,
    /// Largest ratio `Σ_k ∫_{Q_k} f dC / ∫_{∪Q_k} f dC` seen over packing families.
    pub value: f64,
    pub structured: f64,
    pub random: f64,
    pub corpus: f64,
    pub families: usize,
}

/// Empirical quasi-additivity constant over families with packing constant at most 2.
///
/// Sources: full dyadic levels that pack, random packing families with random `f`, and the
/// covering subfamilies of `{Mf > t}` for the corpus functions.
pub fn measure_cprime(d: usize, beta: f64, n: u32, seed: u64) -> Result<CPrimeMeasurement> {
    let root = RootCube::unit(d, n)?;
    let p = ContentParams::new(beta, d)?;
    let mut rng = crate::corpus::rng(seed);
    let fs: Vec<GridFunction> = std::iter::once(GridFunction::constant(root.clone(), 1.0)?)
        .chain(function_corpus(seed, &root)?.into_iter().map(|(_, f)| f.abs()))
        .collect();
    let mut m = CPrimeMeasurement { d, beta, n, value: 0.0, structured: 0.0, random: 0.0, corpus: 0.0, families: 0 };
    let packs = |fam: &[DyadicCube]| packing_constant(fam, beta) <= 2.0 * (1.0 + 1e-12);

    for k in 1..=n.min(4) {
        let fam: Vec<DyadicCube> = (0..1usize << (d as u32 * k)).map(|i| DyadicCube::from_morton(d, k, i)).collect();
        if !packs(&fam) {
            continue;
        }
        let fam = CubeFamily::new(root.clone(), fam)?;
        for f in &fs {
            m.structured = m.structured.max(packing_integral_check(&fam, f, p)?.ratio);
            m.families += 1;
        }
    }
    for _ in 0..60 {
        let fam = random_family(&mut rng, &root);
        let fam = if packs(&fam) { CubeFamily::new(root.clone(), fam)? } else { melnikov_select(&CubeFamily::new(root.clone(), fam)?, p)?.subfamily };
        let f = if rng.random::<f64>() < 0.3 { fs[0].clone() } else { random_nonneg(&mut rng, &root) };
        m.random = m.random.max(packing_integral_check(&fam, &f, p)?.ratio);
        m.families += 1;
    }
    for f in &fs[1..] {
        let avgs = CubeAverages::new(f, p)?;
        let mf = maximal_function(f, p)?;
        for t in thresholds(&mf, 12) {
            let fam = CubeFamily::new(root.clone(), maximal_cubes(&avgs, d, t))?;
            let sub = melnikov_select(&fam, p)?.subfamily;
            for g in [&fam, &sub] {
                if packs(g.cubes()) {
                    m.corpus = m.corpus.max(packing_integral_check(g, f, p)?.ratio);
                    m.families += 1;
                }
            }
        }
    }
    m.value = m.structured.max(m.random).max(m.corpus);
    Ok(m)
}

/// `C'` as an input to the decay constants, which require `C' > 1`.
pub fn cprime_for_constants(measured: f64) -> f64 {
    measured.max(1.0 + 1e-12)
}

// ---------------------------------------------------------------------------
// battery

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(u8, &str); 14] = [
    (1, "content oracle equivalence"),
    (2, "capacity axioms"),
    (3, "power inequality"),
    (4, "covering selection"),
    (5, "weak-type bound"),
    (6, "stopping-time decomposition"),
    (7, "exponential decay"),
    (8, "exponential integrability"),
    (9, "p-seminorm equivalence"),
    (10, "Lipschitz composition"),
    (11, "restriction k = d"),
    (12, "potential embedding"),
    (13, "endpoint divergence"),
    (14, "self-similar regularity"),
];

type Outcome = Result<(bool, String)>;

fn criterion_1(seed: u64) -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for n in 0..=3u32 {
        let root = RootCube::unit(1, n)?;
        let leaves = root.leaf_count();
        for bits in 0u32..(1 << leaves) {
            let e = DyadicSet::new(root.clone(), (0..leaves).map(|i| bits >> i & 1 == 1).collect())?;
            for beta in [0.3, 0.5, 1.0] {
                let dp = dyadic_content(&e, ContentParams::new(beta, 1)?, &root.root_cube())?;
                worst = worst.max((dp - brute_force_content(&e, beta)).abs());
                checked += 1;
            }
        }
    }
    let root = RootCube::unit(2, 3)?;
    let mut rng = crate::corpus::rng(seed);
    for i in 0..500 {
        let e = random_set(&mut rng, &root);
        let beta = [0.5, 1.0, 1.3, 2.0][i % 4];
        let dp = dyadic_content(&e, ContentParams::new(beta, 2)?, &root.root_cube())?;
        worst = worst.max((dp - antichain_content(&e, beta)).abs());
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst <= 1e-12 && secs < 10.0, format!("{checked} sets, max |dp - oracle| = {worst:.3e}, {secs:.2} s")))
}

fn criterion_2(seed: u64) -> Outcome {
    let mut rng = crate::corpus::rng(seed);
    let mut lines = Vec::new();
    let mut ok = true;
    for (d, n) in [(1usize, 8u32), (2, 4)] {
        let root = RootCube::unit(d, n)?;
        for beta in [0.5, 1.0, 1.3] {
            if beta > d as f64 {
                lines.push(format!("d={d} beta={beta} skipped (beta > d)"));
                continue;
            }
            let samples: Vec<(DyadicSet, DyadicSet)> = (0..500)
                .map(|i| {
                    let e = random_set(&mut rng, &root);
                    let f = if i % 3 == 0 { e.union(&random_set(&mut rng, &root)).expect("same root") } else { random_set(&mut rng, &root) };
                    (e, f)
                })
                .collect();
            let rep = capacity_axiom_report(&samples, ContentParams::new(beta, d)?)?;
            ok &= rep.passed();
            lines.push(format!("d={d} beta={beta}: {} violations", rep.violations.len()));
        }
    }
    Ok((ok, lines.join("; ")))
}

fn criterion_3(seed: u64) -> Outcome {
    let mut rng = crate::corpus::rng(seed);
    let mut ok = true;
    let mut lines = Vec::new();
    for (d, n, alpha, beta) in [(1usize, 8u32, 0.3, 0.7), (1, 8, 0.5, 1.0), (2, 4, 0.5, 1.0), (2, 4, 1.0, 1.5), (2, 4, 1.0, 2.0), (2, 4, 1.5, 2.0)] {
        let root = RootCube::unit(d, n)?;
        let ca = DyadicContent::new(&root, ContentParams::new(alpha, d)?)?;
        let cb = DyadicContent::new(&root, ContentParams::new(beta, d)?)?;
        let mut violations = 0;
        for _ in 0..500 {
            let e = random_set(&mut rng, &root);
            if cb.content(&e)? > ca.content(&e)?.powf(beta / alpha) * (1.0 + 1e-12) {
                violations += 1;
            }
        }
        ok &= violations == 0;
        lines.push(format!("d={d} ({alpha},{beta}): {violations}"));
    }
    Ok((ok, format!("violations {}", lines.join(", "))))
}

fn criterion_4(seed: u64) -> Outcome {
    let mut rng = crate::corpus::rng(seed);
    let mut fired = 0;
    let mut worst = 0.0f64;
    let mut runs = 0;
    for (d, n) in [(1usize, 6u32), (2, 4)] {
        let root = RootCube::unit(d, n)?;
        for beta in [0.5, 1.0, 1.3, 2.0] {
            if beta > d as f64 {
                continue;
            }
            let p = ContentParams::new(beta, d)?;
            for _ in 0..1000 {
                let fam = CubeFamily::new(root.clone(), random_family(&mut rng, &root))?;
                runs += 1;
                match melnikov_select(&fam, p) {
                    Ok(sel) => worst = worst.max(packing_constant(sel.subfamily.cubes(), beta)),
                    Err(_) => fired += 1,
                }
            }
        }
    }
    Ok((fired == 0 && worst <= 2.0 * (1.0 + 1e-12), format!("{runs} families, checker fired {fired} times, max packing {worst:.6}")))
}

fn criterion_5(seed: u64) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (d, beta) in [(1usize, 0.5), (1, 1.0), (2, 1.0), (2, 1.5)] {
        let p = ContentParams::new(beta, d)?;
        let mut cps = Vec::new();
        let mut worst_ratio = 0.0f64;
        let mut fails = 0;
        for n in [4u32, 6, 8] {
            let cp = measure_cprime(d, beta, n, seed)?.value;
            cps.push(cp);
            let root = RootCube::unit(d, n)?;
            for (_, f) in function_corpus(seed, &root)? {
                let f = f.abs();
                let mf = maximal_function(&f, p)?;
                for t in thresholds(&mf, 24) {
                    let r = weak_type_check(&f, p, t)?.ratio;
                    worst_ratio = worst_ratio.max(r);
                    if r > cp * (1.0 + 1e-12) {
                        fails += 1;
                    }
                }
            }
        }
        let mid = {
            let mut s = cps.clone();
            s.sort_by(f64::total_cmp);
            s[1]
        };
        let stable = cps.iter().all(|c| (c / mid - 1.0).abs() <= 0.1);
        ok &= fails == 0 && stable;
        let cps: Vec<String> = cps.iter().map(|c| format!("{c:.4}")).collect();
        lines.push(format!("d={d} beta={beta}: C'=[{}] max ratio {worst_ratio:.4} exceed {fails}", cps.join(",")));
    }
    Ok((ok, lines.join("; ")))
}

fn criterion_6(seed: u64) -> Outcome {
    let mut rng = crate::corpus::rng(seed);
    let mut bad = 0;
    let mut runs = 0;
    let mut selected = 0;
    for (d, n) in [(1usize, 8u32), (2, 4)] {
        let root = RootCube::unit(d, n)?;
        for beta in [0.5, 1.0, 1.3, 2.0] {
            if beta > d as f64 {
                continue;
            }
            let p = ContentParams::new(beta, d)?;
            let q = root.root_cube();
            for _ in 0..200 {
                let f = random_nonneg(&mut rng, &root);
                let top = choquet_integral(&f, p, &q)?;
                let lambda = top * rng.random_range(1.0..4.0) + 1e-9;
                runs += 1;
                let Ok(cz) = cz_decompose(&f, &q, p, lambda) else {
                    bad += 1;
                    continue;
                };
                let hi = 2f64.powf(beta) * lambda * (1.0 + 1e-12);
                bad += cz.averages.iter().filter(|&&a| !(a > lambda && a <= hi)).count();
                let covered = cz.cubes.union();
                bad += (0..root.leaf_count()).filter(|&r| !covered.contains_leaf(r) && f.values()[r] > lambda).count();
                selected += cz.cubes.len();
            }
        }
    }
    Ok((bad == 0, format!("{runs} decompositions, {selected} cubes, {bad} failures")))
}

fn jn_configs() -> [(usize, u32, f64); 4] {
    [(1, 10, 0.5), (1, 10, 1.0), (2, 6, 1.0), (2, 6, 1.5)]
}

fn criterion_7(seed: u64) -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for (d, n, beta) in jn_configs() {
        let root = RootCube::unit(d, n)?;
        let p = ContentParams::new(beta, d)?;
        let cp = measure_cprime(d, beta, n, seed)?.value;
        let k = jn_constants(beta, cprime_for_constants(cp), 1.0)?;
        let mut worst = 0.0f64;
        let mut pairs = 0;
        let mut violations = 0;
        for (_, u) in function_corpus(seed, &root)? {
            let rep = jn_verify(&u, p, &k)?;
            worst = worst.max(rep.max_ratio);
            pairs += rep.pairs;
            violations += rep.violations;
        }
        ok &= violations == 0;
        lines.push(format!("d={d} n={n} beta={beta} C'={cp:.4}: {pairs} pairs, max content/bound {worst:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((ok && secs < 120.0, format!("{}; {secs:.1} s", lines.join("; "))))
}

fn criterion_8(seed: u64) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (d, n, beta) in [(1usize, 8u32, 0.5), (1, 8, 1.0), (2, 5, 1.0), (2, 5, 1.5)] {
        let root = RootCube::unit(d, n)?;
        let p = ContentParams::new(beta, d)?;
        let cp = measure_cprime(d, beta, n, seed)?.value;
        let k = jn_constants(beta, cprime_for_constants(cp), 1.0)?;
        let mut worst = 0.0f64;
        for (_, u) in function_corpus(seed, &root)? {
            for level in 0..=2u32 {
                for key in 0..1usize << (d as u32 * level) {
                    let q = DyadicCube::from_morton(d, level, key);
                    let r = exp_integrability(&u, &q, p, k.c / 2.0, &k)?;
                    worst = worst.max(r.ratio);
                }
            }
        }
        ok &= worst <= 1.0;
        lines.push(format!("d={d} beta={beta}: max value/bound {worst:.4}"));
    }
    Ok((ok, lines.join("; ")))
}

fn criterion_9(seed: u64) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (d, n, beta) in [(1usize, 12u32, 0.5), (1, 12, 1.0), (2, 6, 1.0), (2, 6, 2.0)] {
        let root = RootCube::unit(d, n)?;
        let p = ContentParams::new(beta, d)?;
        let corpus = function_corpus(seed, &root)?;
        let mut sups = Vec::new();
        let mut holder = 0.0f64;
        for pexp in [1.0, 2.0, 3.0, 4.0] {
            let mut sup = 0.0f64;
            for (_, u) in &corpus {
                let r = p_seminorm_report(u, p, pexp)?;
                sup = sup.max(r.upper_ratio);
                holder = holder.max(r.holder_ratio);
            }
            sups.push(sup);
        }
        let (lo, hi) = sups.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
        let pass = hi.is_finite() && lo > 0.0 && hi / lo < 2.0 && holder <= 1.0 + 1e-9;
        ok &= pass;
        let s: Vec<String> = sups.iter().map(|x| format!("{x:.4}")).collect();
        lines.push(format!("d={d} beta={beta}: sup ratio by p [{}], Holder A=1 max {holder:.6}", s.join(",")));
    }
    Ok((ok, lines.join("; ")))
}

fn random_phi(rng: &mut impl Rng, lo: f64, hi: f64) -> PiecewiseLinear {
    let k = rng.random_range(1..=5);
    let mut bps: Vec<f64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let slopes = (0..=bps.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
    PiecewiseLinear::new(bps, slopes, 0.0).expect("valid piecewise-linear data")
}

fn criterion_10(seed: u64) -> Outcome {
    let mut rng = crate::corpus::rng(seed);
    let mut fails = 0;
    let mut runs = 0;
    let mut linear_err = 0.0f64;
    for (d, n, beta) in [(1usize, 7u32, 0.5), (2, 4, 1.3)] {
        let root = RootCube::unit(d, n)?;
        let p = ContentParams::new(beta, d)?;
        let q0 = root.root_cube();
        for (_, u) in function_corpus(seed, &root)? {
            let (lo, hi) = (u.min_value(), u.max_value());
            for _ in 0..100 {
                runs += 1;
                if !compose_lipschitz(&u, &random_phi(&mut rng, lo, hi), p)?.passed {
                    fails += 1;
                }
            }
            let su = seminorm_dyadic(&u, &q0, p)?;
            for a in [-3.0, 0.5, 2.0] {
                let r = compose_lipschitz(&u, &PiecewiseLinear::linear(a), p)?;
                let err = (r.seminorm_composed - a.abs() * su).abs() / (a.abs() * su).max(1.0);
                linear_err = linear_err.max(err);
            }
        }
    }
    Ok((fails == 0 && linear_err <= 1e-12, format!("{runs} compositions, {fails} failures, linear relative error {linear_err:.2e}")))
}

fn criterion_11(seed: u64) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (d, n) in [(1usize, 10u32), (2, 5)] {
        let root = RootCube::unit(d, n)?;
        for (_, u) in function_corpus(seed, &root)? {
            let (_, rep) = restrict_hyperplane(&u, d, &[])?;
            if rep.full_seminorm == 0.0 && rep.slice_classical == 0.0 {
                continue;
            }
            worst = worst.max((rep.ratio - 1.0).abs());
            count += 1;
        }
    }
    Ok((worst <= 1e-9, format!("{count} functions, max |ratio - 1| = {worst:.2e}")))
}

fn criterion_12(seed: u64) -> Outcome {
    let mut specs = vec![("uniform".to_string(), IFSSpec::uniform(1)?), ("quarter-cantor".to_string(), IFSSpec::quarter_cantor(1)?)];
    for s in 0..3 {
        specs.push((format!("random-ifs/{}", seed + s), random_ifs(seed + s)?));
    }
    let mut ok = true;
    let mut worst_spread = 1.0f64;
    let mut max_ratio = 0.0f64;
    for (_, spec) in &specs {
        for eps in [0.125, 0.25] {
            let mut rs = Vec::new();
            for n in [6u32, 8, 10] {
                let mu = hutchinson_measure(spec, &RootCube::unit(1, n)?, n)?;
                rs.push(adams_embedding_check(&mu, 0.5, eps)?.ratio);
            }
            let (lo, hi) = rs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
            ok &= hi.is_finite() && lo > 0.0 && hi / lo < 2.0;
            worst_spread = worst_spread.max(hi / lo);
            max_ratio = max_ratio.max(hi);
        }
    }
    Ok((ok, format!("{} measures, max ratio {max_ratio:.4}, max spread over n {worst_spread:.4}", specs.len())))
}

fn criterion_13(_seed: u64) -> Outcome {
    let root = RootCube::unit(1, 6)?;
    let r = divergence_example(&IFSSpec::quarter_cantor(1)?, &root, 0.5, 0.25, &[6, 8, 10, 12])?;
    let e: Vec<String> = r.rows.iter().map(|x| format!("{:.4}", x.energy)).collect();
    let c: Vec<String> = r.rows.iter().map(|x| format!("{:.4}", x.critical_norm)).collect();
    let ok = r.diverges() && r.subcritical_last_change < 0.05;
    Ok((ok, format!("energy [{}], critical norm [{}], eps=1/4 last change {:.2}%", e.join(","), c.join(","), 100.0 * r.subcritical_last_change)))
}

fn criterion_14(_seed: u64) -> Outcome {
    let spec = IFSSpec::quarter_cantor(1)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in 1..=12u32 {
        let mu = hutchinson_measure(&spec, &RootCube::unit(1, n)?, n)?;
        let (a, b) = density_range(&mu, 0.5)?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo >= 0.5 && hi <= 2.0, format!("density ratios in [{lo:.6}, {hi:.6}] for n = 1..12")))
}

pub fn run_criterion(id: u8, seed: u64) -> CriterionResult {
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
    let start = Instant::now();
    let out = match id {
        1 => criterion_1(seed),
        2 => criterion_2(seed),
        3 => criterion_3(seed),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(seed),
        8 => criterion_8(seed),
        9 => criterion_9(seed),
        10 => criterion_10(seed),
        11 => criterion_11(seed),
        12 => criterion_12(seed),
        13 => criterion_13(seed),
        14 => criterion_14(seed),
        _ => Err(CapError::Param(format!("no criterion {id}"))),
    };
    let (passed, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_battery(seed: u64) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, seed)).collect()
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "criterion {:>2} {:<28} {} ({:.2} s) {}", self.id, self.name, if self.passed { "PASS" } else { "FAIL" }, self.seconds, self.detail)
    }
}
