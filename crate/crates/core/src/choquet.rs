//! Choquet integrals against the dyadic content.
//!
//! For a nonnegative step function with distinct values `t_1 < … < t_k`,
//! `∫ f dC = Σ (t_i − t_{i−1})·C({f ≥ t_i})` with `t_0 = 0`. The superlevel sets are nested, so
//! they are built by inserting leaves in decreasing value order into one [`ContentTree`].

use serde::Serialize;

use crate::content::{ContentParams, ContentTree, DyadicContent};
use crate::error::{CapError, Result};
use crate::grid::{DiscreteMeasure, DyadicCube, GridFunction, RootCube};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerCake {
    pub thresholds: Vec<f64>,
    pub contents: Vec<f64>,
}

impl LayerCake {
    pub fn integral(&self) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (&t, &c) in self.thresholds.iter().zip(&self.contents) {
            acc += (t - prev) * c;
            prev = t;
        }
        acc
    }
}

/// Fills `out` with `(t, C({v ≥ t}))` for every distinct positive value, descending in `t`.
pub(crate) fn layers_desc(tree: &mut ContentTree, vals: &[f64], order: &mut Vec<usize>, out: &mut Vec<(f64, f64)>) {
    tree.clear();
    out.clear();
    order.clear();
    order.extend(0..vals.len());
    order.sort_unstable_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let mut i = 0;
    while i < order.len() {
        let t = vals[order[i]];
        if t <= 0.0 {
            break;
        }
        while i < order.len() && vals[order[i]] == t {
            tree.insert(order[i]);
            i += 1;
        }
        out.push((t, tree.root_value()));
    }
}

pub(crate) fn integral_from_desc(layers: &[(f64, f64)]) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &(t, c) in layers.iter().rev() {
        acc += (t - prev) * c;
        prev = t;
    }
    acc
}

/// Reusable evaluator for many integrals over subcubes of one root.
///
/// Values are passed in Morton order restricted to the cube, so the leaves of any dyadic cube
/// are one contiguous slice of the Morton-ordered grid.
#[derive(Clone, Debug)]
pub struct ChoquetIntegrator {
    content: DyadicContent,
    trees: Vec<Option<ContentTree>>,
    order: Vec<usize>,
    layers: Vec<(f64, f64)>,
}

impl ChoquetIntegrator {
    pub fn new(root: &RootCube, p: ContentParams) -> Result<Self> {
        let content = DyadicContent::new(root, p)?;
        Ok(Self { trees: vec![None; root.n() as usize + 1], content, order: Vec::new(), layers: Vec::new() })
    }

    pub fn content(&self) -> &DyadicContent {
        &self.content
    }

    fn tree(&mut self, level: u32) -> ContentTree {
        let slot = &mut self.trees[level as usize];
        match slot.take() {
            Some(t) => t,
            None => ContentTree::new(self.content.root().d(), self.content.costs_below(level)),
        }
    }

    /// `∫ v dC` over a cube at `level`, `v ≥ 0` given on the cube's leaves in Morton order.
    pub fn integrate_level(&mut self, level: u32, vals: &[f64]) -> f64 {
        let mut tree = self.tree(level);
        let mut order = std::mem::take(&mut self.order);
        let mut layers = std::mem::take(&mut self.layers);
        layers_desc(&mut tree, vals, &mut order, &mut layers);
        let v = integral_from_desc(&layers);
        self.trees[level as usize] = Some(tree);
        self.order = order;
        self.layers = layers;
        v
    }

    /// Like [`Self::integrate_level`] but keeps the layer data, descending in threshold.
    pub fn layers_level(&mut self, level: u32, vals: &[f64]) -> Vec<(f64, f64)> {
        let mut tree = self.tree(level);
        let mut order = std::mem::take(&mut self.order);
        let mut layers = Vec::new();
        layers_desc(&mut tree, vals, &mut order, &mut layers);
        self.trees[level as usize] = Some(tree);
        self.order = order;
        layers
    }

    /// `(1/l(Q)^β) ∫_Q v dC`.
    pub fn average_level(&mut self, level: u32, vals: &[f64]) -> f64 {
        self.integrate_level(level, vals) / self.content.cost(level)
    }
}

fn check_nonnegative(f: &GridFunction, over: &DyadicCube) -> Result<Vec<f64>> {
    f.root().check(over)?;
    let m = f.morton_values();
    let vals = m[over.leaf_range(f.root().n())].to_vec();
    if let Some((i, &v)) = vals.iter().enumerate().find(|(_, v)| **v < 0.0) {
        let row = f.root().leaf_row(&DyadicCube::from_morton(f.root().d(), f.root().n(), over.leaf_range(f.root().n()).start + i).index);
        return Err(CapError::Negative { index: row, value: v });
    }
    Ok(vals)
}

pub fn layer_cake(f: &GridFunction, p: ContentParams, over: &DyadicCube) -> Result<LayerCake> {
    let vals = check_nonnegative(f, over)?;
    let mut ci = ChoquetIntegrator::new(f.root(), p)?;
    let layers = ci.layers_level(over.level, &vals);
    let (thresholds, contents) = layers.into_iter().rev().unzip();
    Ok(LayerCake { thresholds, contents })
}

/// `∫_over f dC` for `f ≥ 0`; negative values are rejected.
pub fn choquet_integral(f: &GridFunction, p: ContentParams, over: &DyadicCube) -> Result<f64> {
    let vals = check_nonnegative(f, over)?;
    let mut ci = ChoquetIntegrator::new(f.root(), p)?;
    Ok(ci.integrate_level(over.level, &vals))
}

/// `∫_over |f| dC`.
pub fn l1_norm(f: &GridFunction, p: ContentParams, over: &DyadicCube) -> Result<f64> {
    choquet_integral(&f.abs(), p, over)
}

const HOMOGENEITY_FACTORS: [f64; 3] = [2.0, 0.5, 3.0];

#[derive(Clone, Debug, Default, Serialize)]
pub struct SublinearityReport {
    pub pairs: usize,
    pub max_homogeneity_error: f64,
    pub max_subadditivity_excess: f64,
    pub chain_failures: usize,
    pub failures: Vec<String>,
}

impl SublinearityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Homogeneity, subadditivity and monotone truncation chains on each `(f, g)`.
pub fn sublinearity_report(samples: &[(GridFunction, GridFunction)], p: ContentParams) -> Result<SublinearityReport> {
    let mut rep = SublinearityReport { pairs: samples.len(), ..Default::default() };
    for (i, (f, g)) in samples.iter().enumerate() {
        let q = f.root().root_cube();
        let jf = choquet_integral(f, p, &q)?;
        let jg = choquet_integral(g, p, &q)?;
        for c in HOMOGENEITY_FACTORS {
            let jc = choquet_integral(&f.map(|v| c * v)?, p, &q)?;
            let err = (jc - c * jf).abs() / (c * jf).abs().max(1e-300);
            rep.max_homogeneity_error = rep.max_homogeneity_error.max(err);
            if err > 1e-12 {
                rep.failures.push(format!("pair {i}: homogeneity c={c} relative error {err:e}"));
            }
        }
        let sum = GridFunction::new(f.root().clone(), f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect())?;
        let js = choquet_integral(&sum, p, &q)?;
        let excess = (js - (jf + jg)) / (jf + jg).max(1e-300);
        rep.max_subadditivity_excess = rep.max_subadditivity_excess.max(excess);
        if excess > 1e-9 {
            rep.failures.push(format!("pair {i}: subadditivity {js} > {}", jf + jg));
        }
        let mut levels: Vec<f64> = f.values().to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut prev = 0.0;
        for &m in &levels {
            let jm = choquet_integral(&f.map(|v| v.min(m))?, p, &q)?;
            if jm < prev * (1.0 - 1e-12) {
                rep.chain_failures += 1;
                rep.failures.push(format!("pair {i}: truncation at {m} decreased the integral"));
            }
            prev = jm;
        }
        if (prev - jf).abs() > 1e-12 * jf.max(1.0) {
            rep.chain_failures += 1;
            rep.failures.push(format!("pair {i}: truncation chain ends at {prev}, expected {jf}"));
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub pairing: f64,
    pub l1: f64,
    pub ratio: f64,
    pub morrey_norm: f64,
}

/// `∫|f| dν / ∫|f| dC` for a measure with Morrey norm at most one.
pub fn dual_pairing_check(f: &GridFunction, nu: &DiscreteMeasure, p: ContentParams) -> Result<PairingReport> {
    if !f.root().same_grid(nu.root()) {
        return Err(CapError::RootMismatch);
    }
    let morrey = crate::potential::morrey_norm(nu, p.beta())?.value;
    if morrey > 1.0 + 1e-12 {
        return Err(CapError::Precondition(format!("measure has Morrey norm {morrey} > 1")));
    }
    let pairing: f64 = f.values().iter().zip(nu.masses()).map(|(v, m)| v.abs() * m).sum();
    let l1 = l1_norm(f, p, &f.root().root_cube())?;
    if l1 == 0.0 {
        if pairing > 0.0 {
            return Err(CapError::Postcondition(format!("pairing {pairing} > 0 against a zero integral")));
        }
        return Ok(PairingReport { pairing, l1, ratio: 0.0, morrey_norm: morrey });
    }
    Ok(PairingReport { pairing, l1, ratio: pairing / l1, morrey_norm: morrey })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::dyadic_content;
    use crate::grid::DyadicSet;
    use proptest::prelude::*;

    fn p(beta: f64, d: usize) -> ContentParams {
        ContentParams::new(beta, d).unwrap()
    }

    #[test]
    fn constant_function() {
        let root = RootCube::new(1, vec![0.0], 2.0, 3).unwrap();
        let f = GridFunction::constant(root.clone(), 1.5).unwrap();
        let v = choquet_integral(&f, p(0.5, 1), &root.root_cube()).unwrap();
        assert!((v - 1.5 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_layers() {
        let root = RootCube::unit(1, 1).unwrap();
        let f = GridFunction::new(root.clone(), vec![2.0, 1.0]).unwrap();
        let v = choquet_integral(&f, p(0.5, 1), &root.root_cube()).unwrap();
        assert!((v - 1.7071067811865475).abs() < 1e-15);
        let lc = layer_cake(&f, p(0.5, 1), &root.root_cube()).unwrap();
        assert_eq!(lc.thresholds, vec![1.0, 2.0]);
        assert_eq!(lc.integral(), v);
    }

    #[test]
    fn negative_values_point_to_l1() {
        let root = RootCube::unit(1, 1).unwrap();
        let f = GridFunction::new(root.clone(), vec![-1.0, 1.0]).unwrap();
        let err = choquet_integral(&f, p(1.0, 1), &root.root_cube()).unwrap_err();
        assert!(err.to_string().contains("l1_norm"));
        assert_eq!(l1_norm(&f, p(1.0, 1), &root.root_cube()).unwrap(), 1.0);
    }

    #[test]
    fn signed_indicator_difference() {
        let root = RootCube::unit(2, 2).unwrap();
        let e = DyadicSet::from_leaves(root.clone(), &[0, 1, 2]).unwrap();
        let f = DyadicSet::from_leaves(root.clone(), &[15]).unwrap();
        let u = GridFunction::new(root.clone(), e.indicator().values().iter().zip(f.indicator().values()).map(|(a, b)| a - b).collect()).unwrap();
        let q = root.root_cube();
        assert_eq!(l1_norm(&u, p(1.2, 2), &q).unwrap(), dyadic_content(&e.union(&f).unwrap(), p(1.2, 2), &q).unwrap());
        assert_eq!(l1_norm(&GridFunction::constant(root, 0.0).unwrap(), p(1.2, 2), &q).unwrap(), 0.0);
    }

    #[test]
    fn subadditivity_example() {
        let root = RootCube::unit(1, 1).unwrap();
        let f = GridFunction::new(root.clone(), vec![2.0, 0.0]).unwrap();
        let g = GridFunction::new(root.clone(), vec![0.0, 2.0]).unwrap();
        let q = root.root_cube();
        let jf = choquet_integral(&f, p(0.5, 1), &q).unwrap();
        let jg = choquet_integral(&g, p(0.5, 1), &q).unwrap();
        let js = choquet_integral(&GridFunction::constant(root.clone(), 2.0).unwrap(), p(0.5, 1), &q).unwrap();
        assert_eq!(js, 2.0);
        assert!((jf + jg - 2.0 * 2.0 * 0.5f64.sqrt()).abs() < 1e-14);
        let rep = sublinearity_report(&[(f, g)], p(0.5, 1)).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn point_mass_pairing() {
        let root = RootCube::unit(1, 4).unwrap();
        let side = root.leaf_side();
        let mut masses = vec![0.0; 16];
        masses[6] = side.powf(0.5);
        let nu = DiscreteMeasure::new(root.clone(), masses).unwrap();
        let f = DyadicSet::from_leaves(root.clone(), &[6]).unwrap().indicator();
        let r = dual_pairing_check(&f, &nu, p(0.5, 1)).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-14);

        let uni = DiscreteMeasure::uniform(root.clone(), 1.0).unwrap();
        let r = dual_pairing_check(&GridFunction::constant(root, 1.0).unwrap(), &uni, p(0.5, 1)).unwrap();
        assert!(r.ratio <= 1.0 + 1e-15);
    }

    fn riemann_oracle(f: &GridFunction, beta: f64) -> f64 {
        // midpoint rule on 10 sub-intervals of every constant piece of t ↦ C({f > t})
        let mut ts: Vec<f64> = f.values().to_vec();
        ts.push(0.0);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let q = f.root().root_cube();
        let pp = p(beta, f.root().d());
        let mut acc = 0.0;
        for w in ts.windows(2) {
            let h = (w[1] - w[0]) / 10.0;
            for k in 0..10 {
                let t = w[0] + (k as f64 + 0.5) * h;
                acc += h * dyadic_content(&DyadicSet::superlevel(f, t), pp, &q).unwrap();
            }
        }
        acc
    }

    proptest! {
        #[test]
        fn layer_cake_matches_riemann(vals in proptest::collection::vec(0u8..6, 16), beta in 0.2f64..=2.0) {
            let root = RootCube::unit(2, 2).unwrap();
            let f = GridFunction::new(root.clone(), vals.into_iter().map(|v| v as f64 * 0.7).collect()).unwrap();
            let v = choquet_integral(&f, p(beta, 2), &root.root_cube()).unwrap();
            prop_assert!((v - riemann_oracle(&f, beta)).abs() <= 1e-9 * v.max(1.0));
        }

        #[test]
        fn monotone_in_integrand(a in proptest::collection::vec(0.0f64..3.0, 32), b in proptest::collection::vec(0.0f64..1.0, 32), beta in 0.2f64..=1.0) {
            let root = RootCube::unit(1, 5).unwrap();
            let f = GridFunction::new(root.clone(), a.clone()).unwrap();
            let g = GridFunction::new(root.clone(), a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
            let q = root.root_cube();
            prop_assert!(choquet_integral(&f, p(beta, 1), &q).unwrap() <= choquet_integral(&g, p(beta, 1), &q).unwrap() * (1.0 + 1e-12));
        }

        #[test]
        fn chebyshev(a in proptest::collection::vec(0.0f64..3.0, 64), t in 0.01f64..3.0, beta in 0.2f64..=2.0) {
            let root = RootCube::unit(2, 3).unwrap();
            let f = GridFunction::new(root.clone(), a).unwrap();
            let q = root.root_cube();
            let lhs = dyadic_content(&DyadicSet::superlevel(&f, t), p(beta, 2), &q).unwrap();
            prop_assert!(lhs <= choquet_integral(&f, p(beta, 2), &q).unwrap() / t * (1.0 + 1e-12));
        }

        #[test]
        fn sublinear(a in proptest::collection::vec(0.0f64..3.0, 64), b in proptest::collection::vec(0.0f64..3.0, 64), beta in 0.2f64..=2.0) {
            let root = RootCube::unit(2, 3).unwrap();
            let f = GridFunction::new(root.clone(), a).unwrap();
            let g = GridFunction::new(root, b).unwrap();
            let rep = sublinearity_report(&[(f, g)], p(beta, 2)).unwrap();
            prop_assert!(rep.passed(), "{:?}", rep.failures);
        }
    }
}
