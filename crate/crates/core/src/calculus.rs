//! Covering selection, the dyadic capacitary maximal function and the Calderón–Zygmund
//! decomposition.
//!
//! Averages are normalized Choquet integrals `(1/l(Q)^β) ∫_Q |f| dC`. Because the content is
//! local, the integral over `Q` only needs the leaves of `Q`, which are one contiguous Morton
//! slice. On a single leaf the average is `|f(x)|` by definition and is returned as such.

use std::collections::HashMap;

use serde::Serialize;

use crate::choquet::ChoquetIntegrator;
use crate::content::{ContentParams, DyadicContent};
use crate::error::{CapError, Result};
use crate::grid::{DyadicCube, DyadicSet, GridFunction, RootCube};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubeFamily {
    #[serde(skip)]
    root: RootCube,
    cubes: Vec<DyadicCube>,
}

impl CubeFamily {
    /// Rejects cubes outside the root and pairs where one cube contains another.
    pub fn new(root: RootCube, cubes: Vec<DyadicCube>) -> Result<Self> {
        for c in &cubes {
            root.check(c)?;
        }
        let mut sorted: Vec<&DyadicCube> = cubes.iter().collect();
        sorted.sort_by_key(|c| (c.leaf_range(root.n()).start, c.level));
        for w in sorted.windows(2) {
            if w[0].leaf_range(root.n()).end > w[1].leaf_range(root.n()).start {
                return Err(CapError::Precondition(format!("cubes {} and {} overlap", w[0], w[1])));
            }
        }
        Ok(Self { root, cubes })
    }

    pub fn empty(root: RootCube) -> Self {
        Self { root, cubes: Vec::new() }
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn union(&self) -> DyadicSet {
        let mut mask = vec![false; self.root.leaf_count()];
        for row in 0..mask.len() {
            let leaf = self.root.leaf_cube(row);
            mask[row] = self.cubes.iter().any(|c| leaf.is_within(c));
        }
        DyadicSet::new(self.root.clone(), mask).expect("mask length matches root")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OVSelection {
    pub subfamily: CubeFamily,
    pub ancestors: CubeFamily,
    /// `max_Q Σ_{Q_{j_k} ⊆ Q} l(Q_{j_k})^β / l(Q)^β` over dyadic `Q`.
    pub packing_constant_observed: f64,
}

fn key(c: &DyadicCube) -> (u32, usize) {
    (c.level, c.morton_key())
}

/// Sums of `l(Q_j)^β` over family cubes strictly inside each dyadic cube (only nonzero entries).
fn strict_weights(family: &[DyadicCube], dc: &DyadicContent) -> HashMap<(u32, usize), f64> {
    let mut w: HashMap<(u32, usize), f64> = HashMap::new();
    for c in family {
        let cost = dc.cost(c.level);
        for m in 0..c.level {
            *w.entry(key(&c.ancestor(m))).or_insert(0.0) += cost;
        }
    }
    w
}

/// Stopping-time selection of maximal heavy ancestors.
///
/// A cube `Q̃` is heavy when the family cubes strictly inside it have `Σ l(Q_j)^β ≥ l(Q̃)^β`.
/// Scanning from the root, the first heavy cube on each branch becomes an ancestor and its
/// subtree is dropped; family cubes reached before any heavy cube form the subfamily.
pub fn melnikov_select(family: &CubeFamily, p: ContentParams) -> Result<OVSelection> {
    let root = family.root();
    let dc = DyadicContent::new(root, p)?;
    let weights = strict_weights(family.cubes(), &dc);
    let members: HashMap<(u32, usize), usize> = family.cubes().iter().enumerate().map(|(i, c)| (key(c), i)).collect();

    let mut ancestors = Vec::new();
    let mut sub = Vec::new();
    let mut stack = vec![root.root_cube()];
    while let Some(q) = stack.pop() {
        if members.contains_key(&key(&q)) {
            sub.push(q);
            continue;
        }
        let Some(&w) = weights.get(&key(&q)) else { continue };
        if w >= dc.cost(q.level) {
            ancestors.push(q);
            continue;
        }
        stack.extend(q.children().into_iter().rev());
    }
    sub.sort_by_key(|c| members[&key(c)]);

    let subfamily = CubeFamily::new(root.clone(), sub)?;
    let ancestors = CubeFamily::new(root.clone(), ancestors)?;
    let packing = verify_ov(family, &subfamily, &ancestors, &dc)?;
    Ok(OVSelection { subfamily, ancestors, packing_constant_observed: packing })
}

/// Checks the three selection properties and returns the observed packing constant.
fn verify_ov(family: &CubeFamily, sub: &CubeFamily, anc: &CubeFamily, dc: &DyadicContent) -> Result<f64> {
    for c in family.cubes() {
        if !sub.cubes().iter().chain(anc.cubes()).any(|s| c.is_within(s)) {
            return Err(CapError::Postcondition(format!("cube {c} is not covered by the selection")));
        }
    }
    for a in anc.cubes() {
        if sub.cubes().iter().any(|s| s.overlaps(a)) {
            return Err(CapError::Postcondition(format!("ancestor {a} overlaps the subfamily")));
        }
        let inside: f64 = family.cubes().iter().filter(|c| c.is_within(a) && *c != a).map(|c| dc.cost(c.level)).sum();
        if dc.cost(a.level) > inside {
            return Err(CapError::Postcondition(format!("ancestor {a} is light: {} > {inside}", dc.cost(a.level))));
        }
    }
    // packing only needs checking on cubes containing a subfamily cube
    let mut sums: HashMap<(u32, usize), f64> = HashMap::new();
    for c in sub.cubes() {
        let cost = dc.cost(c.level);
        for m in 0..=c.level {
            *sums.entry(key(&c.ancestor(m))).or_insert(0.0) += cost;
        }
    }
    let mut worst = 0.0f64;
    let mut entries: Vec<_> = sums.into_iter().collect();
    entries.sort_by_key(|e| e.0);
    for ((level, k), s) in entries {
        let ratio = s / dc.cost(level);
        if ratio > 2.0 * (1.0 + 1e-12) {
            let q = DyadicCube::from_morton(dc.root().d(), level, k);
            return Err(CapError::Postcondition(format!("packing fails on {q}: ratio {ratio}")));
        }
        worst = worst.max(ratio);
    }
    Ok(worst)
}

/// `Σ_k ∫_{Q_k} f dC` over `∫_{∪Q_k} f dC`.
#[derive(Clone, Debug, Serialize)]
pub struct PackingRatio {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

pub fn packing_integral_check(family: &CubeFamily, f: &GridFunction, p: ContentParams) -> Result<PackingRatio> {
    if !family.root().same_grid(f.root()) {
        return Err(CapError::RootMismatch);
    }
    let mut ci = ChoquetIntegrator::new(f.root(), p)?;
    let n = f.root().n();
    let vals = f.abs().morton_values();
    let mut numerator = 0.0;
    for c in family.cubes() {
        numerator += ci.integrate_level(c.level, &vals[c.leaf_range(n)]);
    }
    let mut restricted = vec![0.0; vals.len()];
    for c in family.cubes() {
        let r = c.leaf_range(n);
        restricted[r.clone()].copy_from_slice(&vals[r]);
    }
    let denominator = ci.integrate_level(0, &restricted);
    if denominator == 0.0 {
        if numerator > 0.0 {
            return Err(CapError::Postcondition(format!("integral over the union vanishes but the sum is {numerator}")));
        }
        return Ok(PackingRatio { numerator, denominator, ratio: 0.0 });
    }
    Ok(PackingRatio { numerator, denominator, ratio: numerator / denominator })
}

/// Normalized averages of `|f|` over every dyadic cube, `avg[m][k]` by level and Morton key.
pub struct CubeAverages {
    pub(crate) avg: Vec<Vec<f64>>,
}

impl CubeAverages {
    pub fn new(f: &GridFunction, p: ContentParams) -> Result<Self> {
        let mut ci = ChoquetIntegrator::new(f.root(), p)?;
        let d = f.root().d();
        let n = f.root().n();
        let vals = f.abs().morton_values();
        let mut avg = Vec::with_capacity(n as usize + 1);
        for m in 0..n {
            let span = 1usize << (d as u32 * (n - m));
            avg.push(vals.chunks(span).map(|c| ci.average_level(m, c)).collect());
        }
        avg.push(vals);
        Ok(Self { avg })
    }

    pub fn get(&self, c: &DyadicCube) -> f64 {
        self.avg[c.level as usize][c.morton_key()]
    }

    /// Number of levels, `n + 1`.
    pub fn levels(&self) -> u32 {
        self.avg.len() as u32
    }

    pub fn level(&self, m: u32) -> &[f64] {
        &self.avg[m as usize]
    }
}

fn from_morton(root: &RootCube, vals: &[f64]) -> Result<GridFunction> {
    GridFunction::new(root.clone(), root.layout().to_row_major(vals))
}

/// `Mf(x) = max` of the normalized average of `|f|` over the dyadic cubes containing `x`.
pub fn maximal_function(f: &GridFunction, p: ContentParams) -> Result<GridFunction> {
    let avgs = CubeAverages::new(f, p)?;
    let d = f.root().d();
    let mut running = avgs.avg[0].clone();
    for m in 1..avgs.avg.len() {
        running = avgs.avg[m].iter().enumerate().map(|(k, &a)| a.max(running[k >> d])).collect();
    }
    from_morton(f.root(), &running)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakTypeReport {
    pub t: f64,
    /// `C({Mf > t})`.
    pub lhs: f64,
    pub integral: f64,
    /// `(1/t) ∫ f dC`.
    pub rhs_over_cprime: f64,
    /// `t·C({Mf > t}) / ∫ f dC`.
    pub ratio: f64,
}

pub fn weak_type_check(f: &GridFunction, p: ContentParams, t: f64) -> Result<WeakTypeReport> {
    if !(t > 0.0) {
        return Err(CapError::Param(format!("t must be positive, got {t}")));
    }
    let q = f.root().root_cube();
    let integral = crate::choquet::choquet_integral(f, p, &q)?;
    let mf = maximal_function(f, p)?;
    let lhs = DyadicContent::new(f.root(), p)?.content(&DyadicSet::superlevel(&mf, t))?;
    let ratio = if integral > 0.0 { t * lhs / integral } else { 0.0 };
    Ok(WeakTypeReport { t, lhs, integral, rhs_over_cprime: integral / t, ratio })
}

/// `C(E ∩ Q'_m)/l(Q'_m)^β` along the ancestors of leaf `x`, from the root (`m = 0`) to the leaf.
pub fn density_curve(e: &DyadicSet, x: usize, p: ContentParams) -> Result<Vec<(u32, f64)>> {
    if x >= e.root().leaf_count() || !e.contains_leaf(x) {
        return Err(CapError::Precondition(format!("leaf {x} is not in E")));
    }
    let dc = DyadicContent::new(e.root(), p)?;
    let leaf = e.root().leaf_cube(x);
    (0..=e.root().n())
        .map(|m| {
            let q = leaf.ancestor(m);
            Ok((m, dc.content_in(e, &q)? / dc.cost(m)))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DifferentiationReport {
    /// `max_x |avg over leaf(x) − |f(x)||`; zero by construction.
    pub leaf_error: f64,
    /// For each `m`, `max_x |avg_m(x) − |f(x)||` over the level-`m` ancestor of `x`.
    pub level_deviation: Vec<f64>,
    /// For each `m₀`, `max_x |max_{m ≥ m₀} avg_m(x) − |f(x)||`.
    pub limsup_deviation: Vec<f64>,
}

pub fn differentiation_check(f: &GridFunction, p: ContentParams) -> Result<DifferentiationReport> {
    let avgs = CubeAverages::new(f, p)?;
    let d = f.root().d();
    let n = f.root().n() as usize;
    let leaf_vals = &avgs.avg[n];
    let target: Vec<f64> = f.abs().morton_values();
    let leaf_error = leaf_vals.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut level_deviation = vec![0.0f64; n + 1];
    let mut limsup_deviation = vec![0.0f64; n + 1];
    for (x, &fx) in target.iter().enumerate() {
        let mut tail = f64::NEG_INFINITY;
        for m in (0..=n).rev() {
            let a = avgs.avg[m][x >> (d * (n - m))];
            tail = tail.max(a);
            level_deviation[m] = level_deviation[m].max((a - fx).abs());
            limsup_deviation[m] = limsup_deviation[m].max((tail - fx).abs());
        }
    }
    Ok(DifferentiationReport { leaf_error, level_deviation, limsup_deviation })
}

#[derive(Clone, Debug, Serialize)]
pub struct CZDecomposition {
    pub lambda: f64,
    pub cubes: CubeFamily,
    pub averages: Vec<f64>,
}

/// Maximal dyadic subcubes of `q` whose average of `|f|` exceeds `λ`.
pub fn cz_decompose(f: &GridFunction, q: &DyadicCube, p: ContentParams, lambda: f64) -> Result<CZDecomposition> {
    let root = f.root();
    root.check(q)?;
    let n = root.n();
    let mut ci = ChoquetIntegrator::new(root, p)?;
    let vals = f.abs().morton_values();
    let avg_of = |ci: &mut ChoquetIntegrator, c: &DyadicCube| {
        let slice = &vals[c.leaf_range(n)];
        if c.level == n {
            slice[0]
        } else {
            ci.average_level(c.level, slice)
        }
    };
    let top = avg_of(&mut ci, q);
    if !(lambda >= top) {
        return Err(CapError::Precondition(format!("lambda = {lambda} is below the average {top} over {q}")));
    }
    let mut cubes = Vec::new();
    let mut averages = Vec::new();
    let mut stack = if q.level < n { q.children().into_iter().rev().collect() } else { Vec::new() };
    while let Some(c) = stack.pop() {
        let a = avg_of(&mut ci, &c);
        if a > lambda {
            cubes.push(c);
            averages.push(a);
        } else if c.level < n {
            stack.extend(c.children().into_iter().rev());
        }
    }

    let bound = 2f64.powf(p.beta()) * lambda;
    for (c, &a) in cubes.iter().zip(&averages) {
        if !(a > lambda) || a > bound * (1.0 + 1e-12) {
            return Err(CapError::Postcondition(format!("cube {c} has average {a} outside ({lambda}, {bound}]")));
        }
    }
    let covered = CubeFamily::new(root.clone(), cubes.clone())?.union();
    for k in q.leaf_range(n) {
        let row = root.leaf_row(&DyadicCube::from_morton(root.d(), n, k).index);
        if !covered.contains_leaf(row) && vals[k] > lambda {
            return Err(CapError::Postcondition(format!("leaf {row} is unselected with |f| = {} > {lambda}", vals[k])));
        }
    }
    Ok(CZDecomposition { lambda, cubes: CubeFamily::new(root.clone(), cubes)?, averages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(beta: f64, d: usize) -> ContentParams {
        ContentParams::new(beta, d).unwrap()
    }

    fn leaves(root: &RootCube, ks: &[u32]) -> CubeFamily {
        CubeFamily::new(root.clone(), ks.iter().map(|&k| DyadicCube::new(root.n(), vec![k])).collect()).unwrap()
    }

    #[test]
    fn single_cube_family() {
        let root = RootCube::unit(2, 3).unwrap();
        let fam = CubeFamily::new(root, vec![DyadicCube::new(1, vec![1, 0])]).unwrap();
        let sel = melnikov_select(&fam, p(1.0, 2)).unwrap();
        assert_eq!(sel.subfamily, fam);
        assert!(sel.ancestors.is_empty());
    }

    #[test]
    fn all_leaves_collapse_to_root() {
        let root = RootCube::unit(1, 2).unwrap();
        let sel = melnikov_select(&leaves(&root, &[0, 1, 2, 3]), p(0.5, 1)).unwrap();
        assert!(sel.subfamily.is_empty());
        assert_eq!(sel.ancestors.cubes(), &[DyadicCube::root(1)]);
    }

    #[test]
    fn sparse_leaves_stay() {
        let root = RootCube::unit(1, 2).unwrap();
        let fam = leaves(&root, &[0, 3]);
        let sel = melnikov_select(&fam, p(1.0, 1)).unwrap();
        assert_eq!(sel.subfamily, fam);
        assert!(sel.ancestors.is_empty());
    }

    #[test]
    fn overlapping_family_is_rejected() {
        let root = RootCube::unit(1, 2).unwrap();
        assert!(CubeFamily::new(root, vec![DyadicCube::new(1, vec![0]), DyadicCube::new(2, vec![1])]).is_err());
    }

    #[test]
    fn packing_ratio_examples() {
        let root = RootCube::unit(1, 1).unwrap();
        let f = GridFunction::constant(root.clone(), 1.0).unwrap();
        let two = leaves(&root, &[0, 1]);
        let r = packing_integral_check(&two, &f, p(0.5, 1)).unwrap();
        assert!((r.ratio - 2f64.sqrt()).abs() < 1e-14);
        let one = leaves(&root, &[1]);
        assert!((packing_integral_check(&one, &f, p(0.5, 1)).unwrap().ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn maximal_function_example() {
        let root = RootCube::unit(1, 2).unwrap();
        let f = GridFunction::new(root.clone(), vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(maximal_function(&f, p(1.0, 1)).unwrap().values(), &[4.0, 2.0, 1.0, 1.0]);
        let c = GridFunction::constant(root, 0.3).unwrap();
        for v in maximal_function(&c, p(0.5, 1)).unwrap().values() {
            assert!((v - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn weak_type_examples() {
        let root = RootCube::unit(1, 2).unwrap();
        let f = GridFunction::new(root.clone(), vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let r = weak_type_check(&f, p(1.0, 1), 1.5).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15);
        assert!((r.rhs_over_cprime - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.ratio - 0.75).abs() < 1e-15);
        assert_eq!(weak_type_check(&f, p(1.0, 1), 5.0).unwrap().lhs, 0.0);
        let one = GridFunction::constant(root, 1.0).unwrap();
        let r = weak_type_check(&one, p(1.0, 1), 0.5).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!(r.ratio <= 2.0);
    }

    #[test]
    fn density_examples() {
        let root = RootCube::unit(1, 3).unwrap();
        let full = DyadicSet::full(root.clone());
        assert!(density_curve(&full, 5, p(0.5, 1)).unwrap().iter().all(|&(_, r)| r == 1.0));
        let half = DyadicSet::from_leaves(root.clone(), &[0, 1, 2, 3]).unwrap();
        let c = density_curve(&half, 2, p(0.5, 1)).unwrap();
        assert!((c[0].1 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(c[1..].iter().all(|&(_, r)| r == 1.0));
        let leaf = DyadicSet::from_leaves(root.clone(), &[6]).unwrap();
        let c = density_curve(&leaf, 6, p(1.0, 1)).unwrap();
        assert_eq!(c.last().unwrap().1, 1.0);
        assert!(c.windows(2).all(|w| w[0].1 < w[1].1));
        assert!(density_curve(&leaf, 5, p(1.0, 1)).is_err());
    }

    #[test]
    fn differentiation_of_ramp() {
        let root = RootCube::unit(1, 6).unwrap();
        let f = GridFunction::from_fn(root, |i| (i as f64 + 0.5) / 64.0).unwrap();
        let r = differentiation_check(&f, p(1.0, 1)).unwrap();
        assert_eq!(r.leaf_error, 0.0);
        assert!(r.level_deviation.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*r.limsup_deviation.last().unwrap(), 0.0);
    }

    #[test]
    fn differentiation_off_support() {
        let root = RootCube::unit(1, 8).unwrap();
        let e = DyadicSet::from_leaves(root.clone(), &[0]).unwrap();
        let avgs = CubeAverages::new(&e.indicator(), p(0.5, 1)).unwrap();
        // averages over the ancestors of the last leaf shrink once they no longer contain E
        let x = DyadicCube::new(8, vec![255]);
        assert!(avgs.get(&x.ancestor(1)) == 0.0 && avgs.get(&x.ancestor(0)) > 0.0);
    }

    #[test]
    fn cz_examples() {
        let root = RootCube::unit(1, 2).unwrap();
        let f = GridFunction::new(root.clone(), vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let cz = cz_decompose(&f, &root.root_cube(), p(1.0, 1), 1.0).unwrap();
        assert_eq!(cz.cubes.cubes(), &[DyadicCube::new(1, vec![0])]);
        assert_eq!(cz.averages, vec![2.0]);
        let g = GridFunction::constant(root.clone(), 0.5).unwrap();
        assert!(cz_decompose(&g, &root.root_cube(), p(1.0, 1), 0.7).unwrap().cubes.is_empty());
        assert!(cz_decompose(&g, &root.root_cube(), p(1.0, 1), 0.5).unwrap().cubes.is_empty());
        assert!(cz_decompose(&g, &root.root_cube(), p(1.0, 1), 0.4).is_err());
    }

    /// Bottom-up: a cube is maximal when its average exceeds λ and no strict ancestor's does.
    fn maximal_cubes_bottom_up(avgs: &CubeAverages, d: usize, n: u32, lambda: f64) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        for m in 1..=n {
            for (k, &a) in avgs.level(m).iter().enumerate() {
                let c = DyadicCube::from_morton(d, m, k);
                if a > lambda && (1..m).all(|j| avgs.get(&c.ancestor(j)) <= lambda) {
                    out.push(c);
                }
            }
        }
        out.sort();
        out
    }

    fn arb_family(d: usize, n: u32) -> impl Strategy<Value = Vec<DyadicCube>> {
        proptest::collection::vec((0..=n, any::<u64>()), 1..12).prop_map(move |raw| {
            let mut fam: Vec<DyadicCube> = Vec::new();
            for (level, bits) in raw {
                let k = (bits as usize) & ((1usize << (d as u32 * level)) - 1);
                let c = DyadicCube::from_morton(d, level, k);
                if !fam.iter().any(|f| f.overlaps(&c)) {
                    fam.push(c);
                }
            }
            fam
        })
    }

    proptest! {
        #[test]
        fn ov_properties(fam in arb_family(2, 4), beta in prop::sample::select(vec![0.5, 1.0, 1.3])) {
            let root = RootCube::unit(2, 4).unwrap();
            let sel = melnikov_select(&CubeFamily::new(root, fam).unwrap(), p(beta, 2)).unwrap();
            prop_assert!(sel.packing_constant_observed <= 2.0);
        }

        #[test]
        fn cz_matches_bottom_up(vals in proptest::collection::vec(0.0f64..4.0, 64), beta in 0.3f64..=2.0, extra in 0.0f64..2.0) {
            let root = RootCube::unit(2, 3).unwrap();
            let f = GridFunction::new(root.clone(), vals).unwrap();
            let avgs = CubeAverages::new(&f, p(beta, 2)).unwrap();
            let lambda = avgs.level(0)[0] + extra;
            let cz = cz_decompose(&f, &root.root_cube(), p(beta, 2), lambda).unwrap();
            let mut got = cz.cubes.cubes().to_vec();
            got.sort();
            prop_assert_eq!(got, maximal_cubes_bottom_up(&avgs, 2, 3, lambda));
        }

        #[test]
        fn maximal_dominates(vals in proptest::collection::vec(0.0f64..4.0, 64), beta in 0.3f64..=1.0) {
            let root = RootCube::unit(1, 6).unwrap();
            let f = GridFunction::new(root, vals).unwrap();
            let mf = maximal_function(&f, p(beta, 1)).unwrap();
            for (a, b) in mf.values().iter().zip(f.values()) {
                prop_assert!(a >= b);
            }
        }
    }
}
