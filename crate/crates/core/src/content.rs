//! Dyadic Hausdorff content of leaf unions.
//!
//! For a root cube `Q` and `0 < β ≤ d` the content of `E` is the cheapest cover of `E` by
//! dyadic subcubes, each cube costing `l(Q_i)^β`. On leaf unions the minimum is reached by an
//! antichain of the tree, so it satisfies
//!
//! ```text
//! C(Q) = 0                              if Q ∩ E = ∅
//! C(Q) = min(l(Q)^β, Σ_children C(Q'))  otherwise (a leaf in E costs l^β)
//! ```
//!
//! Level costs come from one table indexed by absolute level, and children are always summed in
//! the same order, so the value for a subcube `Q'` does not depend on which ancestor was used as
//! the root: the results agree bit for bit.

use serde::Serialize;

use crate::error::{CapError, Result};
use crate::grid::{DyadicCube, DyadicSet, MortonLayout, RootCube};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContentParams {
    beta: f64,
    d: usize,
}

impl ContentParams {
    pub fn new(beta: f64, d: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= d as f64) || !(1..=3).contains(&d) {
            return Err(CapError::Beta { beta, d });
        }
        Ok(Self { beta, d })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub(crate) fn check_root(&self, root: &RootCube) -> Result<()> {
        if root.d() != self.d {
            return Err(CapError::Beta { beta: self.beta, d: root.d() });
        }
        Ok(())
    }
}

/// `π^{β/2} / Γ(β/2 + 1)`, the volume of the unit ball in dimension `β`.
pub fn omega(beta: f64) -> f64 {
    std::f64::consts::PI.powf(beta / 2.0) / libm::tgamma(beta / 2.0 + 1.0)
}

/// Per-level cube costs `(side·2^{-m})^β`, `m = 0..=n`.
pub(crate) fn level_costs(root: &RootCube, beta: f64) -> Vec<f64> {
    (0..=root.n()).map(|m| root.side_at(m).powf(beta)).collect()
}

/// Incrementally maintained content tree over a subtree of height `h`.
///
/// Leaves are in Morton order. `insert` marks one leaf as part of the set and repairs the
/// ancestor chain; the root value is always the content of the inserted leaves.
#[derive(Clone, Debug)]
pub(crate) struct ContentTree {
    d: usize,
    h: usize,
    costs: Vec<f64>,
    offs: Vec<usize>,
    nodes: Vec<f64>,
}

impl ContentTree {
    /// `costs[j]` is the cost of a cube `j` levels below the subtree root.
    pub fn new(d: usize, costs: &[f64]) -> Self {
        let h = costs.len() - 1;
        let mut offs = Vec::with_capacity(h + 2);
        let mut acc = 0;
        for j in 0..=h {
            offs.push(acc);
            acc += 1usize << (d * j);
        }
        offs.push(acc);
        Self { d, h, costs: costs.to_vec(), offs, nodes: vec![0.0; acc] }
    }

    pub fn clear(&mut self) {
        self.nodes.fill(0.0);
    }

    #[inline]
    fn children_sum(&self, j: usize, k: usize) -> f64 {
        let start = self.offs[j + 1] + (k << self.d);
        let mut s = 0.0;
        for v in &self.nodes[start..start + (1 << self.d)] {
            s += *v;
        }
        s
    }

    pub fn insert(&mut self, leaf: usize) {
        let h = self.h;
        let slot = self.offs[h] + leaf;
        if self.nodes[slot] == self.costs[h] {
            return;
        }
        self.nodes[slot] = self.costs[h];
        let mut k = leaf;
        for j in (0..h).rev() {
            k >>= self.d;
            let v = self.costs[j].min(self.children_sum(j, k));
            let slot = self.offs[j] + k;
            if self.nodes[slot] == v {
                break;
            }
            self.nodes[slot] = v;
        }
    }

    /// Batch evaluation from a leaf membership mask.
    pub fn fill(&mut self, mask: &[bool]) {
        let h = self.h;
        debug_assert_eq!(mask.len(), 1 << (self.d * h));
        let leaf_cost = self.costs[h];
        let base = self.offs[h];
        for (i, &b) in mask.iter().enumerate() {
            self.nodes[base + i] = if b { leaf_cost } else { 0.0 };
        }
        for j in (0..h).rev() {
            for k in 0..(1usize << (self.d * j)) {
                let v = self.costs[j].min(self.children_sum(j, k));
                self.nodes[self.offs[j] + k] = v;
            }
        }
    }

    pub fn root_value(&self) -> f64 {
        self.nodes[0]
    }

    pub fn node(&self, j: usize, k: usize) -> f64 {
        self.nodes[self.offs[j] + k]
    }

    /// Cheapest cover as `(relative level, morton key)` pairs; ties go to the coarser cube.
    pub fn cover(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((j, k)) = stack.pop() {
            let v = self.node(j, k);
            if v == 0.0 {
                continue;
            }
            if j == self.h || self.costs[j] <= self.children_sum(j, k) {
                out.push((j, k));
            } else {
                for o in (0..1usize << self.d).rev() {
                    stack.push((j + 1, (k << self.d) + o));
                }
            }
        }
        out
    }
}

/// Content evaluator bound to one root cube and one exponent.
#[derive(Clone, Debug)]
pub struct DyadicContent {
    root: RootCube,
    params: ContentParams,
    costs: Vec<f64>,
    layout: MortonLayout,
}

impl DyadicContent {
    pub fn new(root: &RootCube, params: ContentParams) -> Result<Self> {
        params.check_root(root)?;
        Ok(Self { root: root.clone(), params, costs: level_costs(root, params.beta), layout: root.layout() })
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn params(&self) -> ContentParams {
        self.params
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    /// `l(Q)^β` for a cube at absolute `level`.
    pub fn cost(&self, level: u32) -> f64 {
        self.costs[level as usize]
    }

    pub(crate) fn costs_below(&self, level: u32) -> &[f64] {
        &self.costs[level as usize..]
    }

    pub(crate) fn tree_for(&self, cube: &DyadicCube) -> ContentTree {
        ContentTree::new(self.root.d(), self.costs_below(cube.level))
    }

    fn morton_mask(&self, e: &DyadicSet) -> Result<Vec<bool>> {
        if !self.root.same_grid(e.root()) {
            return Err(CapError::RootMismatch);
        }
        Ok(self.layout.to_morton(e.mask()))
    }

    fn filled_tree(&self, e: &DyadicSet, cube: &DyadicCube) -> Result<ContentTree> {
        self.root.check(cube)?;
        let mask = self.morton_mask(e)?;
        let mut tree = self.tree_for(cube);
        tree.fill(&mask[cube.leaf_range(self.root.n())]);
        Ok(tree)
    }

    /// Content of `E ∩ cube` with covers drawn from the dyadic subcubes of `cube`.
    pub fn content_in(&self, e: &DyadicSet, cube: &DyadicCube) -> Result<f64> {
        Ok(self.filled_tree(e, cube)?.root_value())
    }

    pub fn content(&self, e: &DyadicSet) -> Result<f64> {
        self.content_in(e, &self.root.root_cube())
    }

    /// An optimal cover of `E ∩ cube` as an antichain of dyadic cubes, in Morton order.
    pub fn optimal_cover(&self, e: &DyadicSet, cube: &DyadicCube) -> Result<Vec<DyadicCube>> {
        let tree = self.filled_tree(e, cube)?;
        let d = self.root.d();
        let mut cover: Vec<DyadicCube> = tree
            .cover()
            .into_iter()
            .map(|(j, k)| cube.compose(&DyadicCube::from_morton(d, j as u32, k)))
            .collect();
        cover.sort_by_key(|c| c.leaf_range(self.root.n()).start);
        Ok(cover)
    }
}

/// Content of `E ∩ root` where `root` is any dyadic cube of `E`'s grid.
pub fn dyadic_content(e: &DyadicSet, p: ContentParams, root: &DyadicCube) -> Result<f64> {
    DyadicContent::new(e.root(), p)?.content_in(e, root)
}

/// At finite resolution the only content-null set is the empty set.
pub fn dyadic_content_measure_zero_check(e: &DyadicSet) -> bool {
    e.is_empty()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContentBracket {
    pub lower: f64,
    pub upper: f64,
    pub dyadic_value: f64,
    /// `max(ω_β(√d/2)^β, 2^d·4^β/ω_β)`; see [`spherical_bracket`].
    pub c_beta_equiv: f64,
    pub omega_beta: f64,
}

/// Two-sided bracket for the ball-cover content `inf Σ ω_β r_i^β`.
///
/// Upper: circumscribe a ball about every cube of an optimal dyadic cover, radius `√d·l/2`.
/// Lower: a ball of radius `r` sits inside at most `2^d` dyadic cubes of the smallest side
/// `l ≥ 2r`, and `l < 4r`, so `dyadic ≤ (2^d·4^β/ω_β)·spherical`.
pub fn spherical_bracket(e: &DyadicSet, p: ContentParams) -> Result<ContentBracket> {
    p.check_root(e.root())?;
    let b = p.beta;
    let d = p.d as f64;
    let w = omega(b);
    let dyadic = dyadic_content(e, p, &e.root().root_cube())?;
    let up = w * (d.sqrt() / 2.0).powf(b);
    let down = 2f64.powf(d) * 4f64.powf(b) / w;
    Ok(ContentBracket { lower: dyadic / down, upper: up * dyadic, dyadic_value: dyadic, c_beta_equiv: up.max(down), omega_beta: w })
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomViolation {
    pub pair: usize,
    pub axiom: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub pairs: usize,
    pub monotone_checked: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const AXIOM_RTOL: f64 = 1e-9;

fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + AXIOM_RTOL * rhs.abs().max(lhs.abs()).max(1e-300)
}

/// Monotonicity, subadditivity and strong subadditivity on each pair.
pub fn capacity_axiom_report(samples: &[(DyadicSet, DyadicSet)], p: ContentParams) -> Result<AxiomReport> {
    let mut rep = AxiomReport { pairs: samples.len(), ..Default::default() };
    let Some((first, _)) = samples.first() else { return Ok(rep) };
    let dc = DyadicContent::new(first.root(), p)?;
    for (i, (e, f)) in samples.iter().enumerate() {
        let ce = dc.content(e)?;
        let cf = dc.content(f)?;
        let cu = dc.content(&e.union(f)?)?;
        let ci = dc.content(&e.intersection(f)?)?;
        let mut check = |axiom, lhs: f64, rhs: f64| {
            if exceeds(lhs, rhs) {
                rep.violations.push(AxiomViolation { pair: i, axiom, lhs, rhs });
            }
        };
        if e.is_subset(f) {
            check("monotonicity", ce, cf);
        }
        if f.is_subset(e) {
            check("monotonicity", cf, ce);
        }
        check("monotonicity", ci, ce.min(cf));
        check("monotonicity", ce.max(cf), cu);
        check("subadditivity", cu, ce + cf);
        check("strong subadditivity", cu + ci, ce + cf);
        rep.monotone_checked += 2 + usize::from(e.is_subset(f) || f.is_subset(e));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::brute_force_content;
    use proptest::prelude::*;

    fn p(beta: f64, d: usize) -> ContentParams {
        ContentParams::new(beta, d).unwrap()
    }

    #[test]
    fn full_cube_costs_one() {
        let root = RootCube::unit(1, 4).unwrap();
        let v = dyadic_content(&DyadicSet::full(root.clone()), p(0.5, 1), &root.root_cube()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn single_leaf() {
        let root = RootCube::unit(1, 3).unwrap();
        let e = DyadicSet::from_leaves(root.clone(), &[5]).unwrap();
        let v = dyadic_content(&e, p(0.5, 1), &root.root_cube()).unwrap();
        assert!((v - 0.3535533905932738).abs() < 1e-15);
    }

    #[test]
    fn two_separated_leaves() {
        let root = RootCube::unit(1, 2).unwrap();
        let e = DyadicSet::from_leaves(root.clone(), &[0, 3]).unwrap();
        let v = dyadic_content(&e, p(0.6, 1), &root.root_cube()).unwrap();
        assert!((v - 0.8705505632961241).abs() < 1e-15);
        assert!((v - brute_force_content(&e, 0.6)).abs() < 1e-12);
    }

    #[test]
    fn beta_range_is_enforced() {
        let err = ContentParams::new(0.0, 1).unwrap_err();
        assert!(err.to_string().contains("beta must lie in (0, d]"));
        assert!(ContentParams::new(2.5, 2).is_err());
        assert!(ContentParams::new(2.0, 2).is_ok());
    }

    #[test]
    fn null_sets() {
        let root = RootCube::unit(2, 2).unwrap();
        assert!(dyadic_content_measure_zero_check(&DyadicSet::empty(root.clone())));
        assert!(!dyadic_content_measure_zero_check(&DyadicSet::from_leaves(root.clone(), &[3]).unwrap()));
        assert!(!dyadic_content_measure_zero_check(&DyadicSet::full(root)));
    }

    #[test]
    fn bracket_examples() {
        let root = RootCube::unit(1, 2).unwrap();
        let leaf = DyadicSet::from_leaves(root.clone(), &[1]).unwrap();
        let b = spherical_bracket(&leaf, p(1.0, 1)).unwrap();
        assert!((b.upper - 0.25).abs() < 1e-15);
        assert!(b.lower <= b.upper);
        let full = spherical_bracket(&DyadicSet::full(root.clone()), p(1.0, 1)).unwrap();
        assert!((full.upper - 1.0).abs() < 1e-15);
        let empty = spherical_bracket(&DyadicSet::empty(root), p(1.0, 1)).unwrap();
        assert_eq!((empty.lower, empty.upper), (0.0, 0.0));
    }

    #[test]
    fn bracket_lower_holds_for_straddling_ball() {
        // two leaves around the midpoint: one ball of radius 1/4 covers them
        let root = RootCube::unit(1, 2).unwrap();
        let e = DyadicSet::from_leaves(root, &[1, 2]).unwrap();
        let b = spherical_bracket(&e, p(0.3, 1)).unwrap();
        let one_ball = omega(0.3) * 0.25f64.powf(0.3);
        assert!(b.lower <= one_ball);
        assert!(b.upper >= one_ball);
    }

    #[test]
    fn lebesgue_case_is_additive() {
        let root = RootCube::unit(2, 3).unwrap();
        let dc = DyadicContent::new(&root, p(2.0, 2)).unwrap();
        let a = DyadicSet::from_leaves(root.clone(), &[0]).unwrap();
        let b = DyadicSet::from_leaves(root.clone(), &[63]).unwrap();
        let sum = dc.content(&a).unwrap() + dc.content(&b).unwrap();
        assert_eq!(dc.content(&a.union(&b).unwrap()).unwrap(), sum);
    }

    #[test]
    fn incremental_tree_matches_batch() {
        let root = RootCube::unit(2, 3).unwrap();
        let dc = DyadicContent::new(&root, p(1.3, 2)).unwrap();
        let mut tree = dc.tree_for(&root.root_cube());
        let mut mask = vec![false; 64];
        for (step, leaf) in [5usize, 17, 4, 6, 7, 40, 41, 42, 43, 0].into_iter().enumerate() {
            tree.insert(leaf);
            mask[leaf] = true;
            let mut batch = dc.tree_for(&root.root_cube());
            batch.fill(&mask);
            assert_eq!(tree.root_value().to_bits(), batch.root_value().to_bits(), "step {step}");
        }
    }

    #[test]
    fn cover_attains_value() {
        let root = RootCube::unit(2, 3).unwrap();
        let dc = DyadicContent::new(&root, p(1.0, 2)).unwrap();
        let e = DyadicSet::from_leaves(root.clone(), &[0, 1, 8, 9, 63, 20]).unwrap();
        let cover = dc.optimal_cover(&e, &root.root_cube()).unwrap();
        let cost: f64 = cover.iter().map(|c| dc.cost(c.level)).sum();
        assert!((cost - dc.content(&e).unwrap()).abs() < 1e-15);
        for row in 0..64 {
            if e.contains_leaf(row) {
                assert!(cover.iter().any(|c| root.leaf_cube(row).is_within(c)));
            }
        }
    }

    fn arb_mask(len: usize) -> impl Strategy<Value = Vec<bool>> {
        proptest::collection::vec(proptest::bool::weighted(0.3), len)
    }

    proptest! {
        #[test]
        fn matches_brute_force_d1(mask in arb_mask(8), beta in 0.05f64..=1.0) {
            let root = RootCube::unit(1, 3).unwrap();
            let e = DyadicSet::new(root.clone(), mask).unwrap();
            let v = dyadic_content(&e, p(beta, 1), &root.root_cube()).unwrap();
            prop_assert!((v - brute_force_content(&e, beta)).abs() <= 1e-12);
        }

        #[test]
        fn locality(mask in arb_mask(64), beta in 0.1f64..=2.0, level in 0u32..=3, k in 0usize..64) {
            let root = RootCube::unit(2, 3).unwrap();
            let sub = DyadicCube::from_morton(2, level, k % (1 << (2 * level)));
            let e = DyadicSet::new(root.clone(), mask).unwrap()
                .intersection(&DyadicSet::from_cube(root.clone(), &sub).unwrap()).unwrap();
            let dc = DyadicContent::new(&root, p(beta, 2)).unwrap();
            prop_assert_eq!(dc.content(&e).unwrap().to_bits(), dc.content_in(&e, &sub).unwrap().to_bits());
        }

        #[test]
        fn power_inequality(mask in arb_mask(64), a in 0.1f64..=2.0, b in 0.1f64..=2.0) {
            let (alpha, beta) = if a <= b { (a, b) } else { (b, a) };
            let root = RootCube::unit(2, 3).unwrap();
            let e = DyadicSet::new(root.clone(), mask).unwrap();
            let ca = dyadic_content(&e, p(alpha, 2), &root.root_cube()).unwrap();
            let cb = dyadic_content(&e, p(beta, 2), &root.root_cube()).unwrap();
            prop_assert!(cb <= ca.powf(beta / alpha) * (1.0 + 1e-12));
            // contents on the unit cube never exceed 1, so they decrease in the exponent
            prop_assert!(cb <= ca * (1.0 + 1e-12));
        }

        #[test]
        fn lebesgue_reduction(mask in arb_mask(64)) {
            let root = RootCube::unit(3, 2).unwrap();
            let e = DyadicSet::new(root.clone(), mask).unwrap();
            let v = dyadic_content(&e, p(3.0, 3), &root.root_cube()).unwrap();
            prop_assert!((v - e.count() as f64 / 64.0).abs() < 1e-15);
        }

        #[test]
        fn axioms_hold(m1 in arb_mask(64), m2 in arb_mask(64), beta in 0.1f64..=2.0) {
            let root = RootCube::unit(2, 3).unwrap();
            let e = DyadicSet::new(root.clone(), m1).unwrap();
            let f = DyadicSet::new(root.clone(), m2).unwrap();
            let nested = e.intersection(&f).unwrap();
            let rep = capacity_axiom_report(&[(e, f.clone()), (nested, f)], p(beta, 2)).unwrap();
            prop_assert!(rep.passed(), "{:?}", rep.violations);
            prop_assert!(rep.monotone_checked >= 1);
        }
    }
}
