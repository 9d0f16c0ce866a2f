//! Exponential decay of oscillation level sets and its consequences.

use serde::Serialize;

use crate::bmo::{all_oscillations, best_constant, deviation_layers, seminorm_dyadic, Oscillator};
use crate::choquet::ChoquetIntegrator;
use crate::content::{ContentParams, ContentTree, DyadicContent};
use crate::error::{CapError, Result};
use crate::grid::{DyadicCube, GridFunction, RootCube};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JNConstants {
    pub beta: f64,
    /// `1 + 2^β`.
    pub c_beta: f64,
    /// Packing constant of the covering selection.
    pub cprime: f64,
    /// Dyadic to ball-content equivalence constant; 1 when everything stays dyadic.
    pub c_equiv: f64,
    /// `C_equiv · exp(1/(C'e) + 1)`.
    pub big_c: f64,
    /// `1 / (C_equiv · C' · c_β · e)`.
    pub c: f64,
}

pub fn jn_constants(beta: f64, cprime: f64, c_equiv: f64) -> Result<JNConstants> {
    if !(cprime > 1.0) || !cprime.is_finite() {
        return Err(CapError::Param(format!("the packing constant must exceed 1, got {cprime}")));
    }
    if !(c_equiv > 0.0) || !c_equiv.is_finite() {
        return Err(CapError::Param(format!("the equivalence constant must be positive, got {c_equiv}")));
    }
    if !(beta > 0.0) {
        return Err(CapError::Beta { beta, d: 0 });
    }
    let e = std::f64::consts::E;
    let c_beta = 1.0 + 2f64.powf(beta);
    Ok(JNConstants {
        beta,
        c_beta,
        cprime,
        c_equiv,
        big_c: c_equiv * (1.0 / (cprime * e) + 1.0).exp(),
        c: 1.0 / (c_equiv * cprime * c_beta * e),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct JNWorst {
    pub cube: DyadicCube,
    pub t: f64,
    pub content: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JNReport {
    pub constants: JNConstants,
    pub norm: f64,
    pub cubes: usize,
    pub pairs: usize,
    /// `max content/bound`; at most one when the inequality holds.
    pub max_ratio: f64,
    /// `min (bound − content)`.
    pub min_slack: f64,
    pub worst: Option<JNWorst>,
    pub violations: usize,
}

impl JNReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `C({x ∈ Q : |u − c_Q| > t}) ≤ C·l(Q)^β·exp(−c·t/‖u‖)` on every dyadic cube.
///
/// On `[b_{i−1}, b_i)` between consecutive distinct deviations the level set is constant and
/// the bound decreases in `t`, so testing the left limit at `b_i` covers every `t` there.
pub fn jn_verify(u: &GridFunction, p: ContentParams, consts: &JNConstants) -> Result<JNReport> {
    let root = u.root();
    let q0 = root.root_cube();
    let oscs = all_oscillations(u, &q0, p)?;
    let norm = oscs.iter().map(|r| r.oscillation).fold(0.0, f64::max);
    if norm == 0.0 {
        return Err(CapError::ZeroSeminorm);
    }
    let dc = DyadicContent::new(root, p)?;
    let vals = u.morton_values();
    let mut trees: Vec<Option<ContentTree>> = vec![None; root.n() as usize + 1];
    let mut order = Vec::new();
    let mut rep = JNReport {
        constants: *consts,
        norm,
        cubes: oscs.len(),
        pairs: 0,
        max_ratio: 0.0,
        min_slack: f64::INFINITY,
        worst: None,
        violations: 0,
    };
    for r in &oscs {
        let level = r.cube.level;
        let tree = trees[level as usize].get_or_insert_with(|| dc.tree_for(&r.cube));
        let layers = deviation_layers(tree, &vals[r.cube.leaf_range(root.n())], r.c_q, &mut order);
        let lq = dc.cost(level);
        for &(b, content) in &layers {
            let bound = consts.big_c * lq * (-consts.c * b / norm).exp();
            rep.pairs += 1;
            let ratio = content / bound;
            if content > bound {
                rep.violations += 1;
            }
            rep.min_slack = rep.min_slack.min(bound - content);
            if ratio > rep.max_ratio {
                rep.max_ratio = ratio;
                rep.worst = Some(JNWorst { cube: r.cube.clone(), t: b, content, bound });
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpIntegrability {
    pub cube: DyadicCube,
    pub cprime: f64,
    pub value: f64,
    /// `(1 + C/(c/c' − 1))·l(Q)^β`.
    pub bound: f64,
    pub ratio: f64,
}

/// `∫_Q exp(c'|v − c_Q|) dC` for `v = u/‖u‖`.
pub fn exp_integrability(u: &GridFunction, q: &DyadicCube, p: ContentParams, cprime: f64, consts: &JNConstants) -> Result<ExpIntegrability> {
    if !(cprime > 0.0 && cprime < consts.c) {
        return Err(CapError::Param(format!("c' must lie in (0, c) = (0, {}), got {cprime}", consts.c)));
    }
    let norm = seminorm_dyadic(u, &u.root().root_cube(), p)?;
    let v = if norm > 0.0 { u.map(|x| x / norm)? } else { u.clone() };
    let best = best_constant(&v, q, p)?;
    let vals = v.morton_values();
    let integrand: Vec<f64> = vals[q.leaf_range(u.root().n())].iter().map(|x| (cprime * (x - best.c_q).abs()).exp()).collect();
    let mut ci = ChoquetIntegrator::new(u.root(), p)?;
    let value = ci.integrate_level(q.level, &integrand);
    let bound = (1.0 + consts.big_c / (consts.c / cprime - 1.0)) * ci.content().cost(q.level);
    Ok(ExpIntegrability { cube: q.clone(), cprime, value, bound, ratio: value / bound })
}

/// A continuous piecewise-linear map of the line.
///
/// `slopes[0]` applies left of the first breakpoint, `slopes[i]` between breakpoints `i−1` and
/// `i`, and the last slope right of the last breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseLinear {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    value_at_zero: f64,
    prim: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>, value_at_zero: f64) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(CapError::Param(format!("{} breakpoints need {} slopes, got {}", breakpoints.len(), breakpoints.len() + 1, slopes.len())));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CapError::Param("breakpoints must be strictly increasing".into()));
        }
        if breakpoints.iter().chain(&slopes).chain([&value_at_zero]).any(|x| !x.is_finite()) {
            return Err(CapError::Param("piecewise-linear data must be finite".into()));
        }
        let mut prim = vec![0.0; breakpoints.len()];
        for i in 1..breakpoints.len() {
            prim[i] = prim[i - 1] + slopes[i] * (breakpoints[i] - breakpoints[i - 1]);
        }
        Ok(Self { breakpoints, slopes, value_at_zero, prim })
    }

    pub fn linear(slope: f64) -> Self {
        Self { breakpoints: Vec::new(), slopes: vec![slope], value_at_zero: 0.0, prim: Vec::new() }
    }

    /// Primitive of the slope function, anchored at the first breakpoint.
    fn primitive(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        if b.is_empty() {
            return self.slopes[0] * x;
        }
        let i = b.partition_point(|&bp| bp <= x);
        if i == 0 {
            self.slopes[0] * (x - b[0])
        } else {
            self.prim[i - 1] + self.slopes[i] * (x - b[i - 1])
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.value_at_zero + (self.primitive(x) - self.primitive(0.0))
    }

    pub fn lipschitz(&self) -> f64 {
        self.slopes.iter().map(|s| s.abs()).fold(0.0, f64::max)
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositionReport {
    pub seminorm_u: f64,
    pub seminorm_composed: f64,
    pub lipschitz: f64,
    pub passed: bool,
}

/// `‖φ∘u‖ ≤ Lip(φ)·‖u‖ + 1e-9`.
pub fn compose_lipschitz(u: &GridFunction, phi: &PiecewiseLinear, p: ContentParams) -> Result<CompositionReport> {
    if phi.value_at_zero() != 0.0 {
        return Err(CapError::Param(format!("phi(0) must be 0, got {}", phi.value_at_zero())));
    }
    let q0 = u.root().root_cube();
    let su = seminorm_dyadic(u, &q0, p)?;
    let sc = seminorm_dyadic(&u.map(|x| phi.eval(x))?, &q0, p)?;
    let lip = phi.lipschitz();
    Ok(CompositionReport { seminorm_u: su, seminorm_composed: sc, lipschitz: lip, passed: sc <= lip * su + 1e-9 })
}

/// Classical dyadic BMO: `sup_Q (1/|Q|) Σ_{x ∈ Q} |u(x) − median_Q| · |leaf|`.
pub fn classical_bmo(u: &GridFunction) -> f64 {
    let root = u.root();
    let n = root.n();
    let vals = u.morton_values();
    let mut best = 0.0f64;
    for m in 0..n {
        let span = 1usize << (root.d() as u32 * (n - m));
        for chunk in vals.chunks(span) {
            let mut s = chunk.to_vec();
            s.sort_by(f64::total_cmp);
            let med = s[(s.len() - 1) / 2];
            let mean = chunk.iter().map(|v| (v - med).abs()).sum::<f64>() / span as f64;
            best = best.max(mean);
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionReport {
    pub k: usize,
    pub offset: Vec<u32>,
    /// Classical BMO of the slice.
    pub slice_classical: f64,
    /// `BMO^k` seminorm of `u` on the full cube.
    pub full_seminorm: f64,
    /// `slice_classical / full_seminorm` (0 when both vanish).
    pub ratio: f64,
}

/// The `k`-dimensional slice through the leaves `offset` of the trailing `d − k` axes.
pub fn restrict_hyperplane(u: &GridFunction, k: usize, offset: &[u32]) -> Result<(GridFunction, RestrictionReport)> {
    let root = u.root();
    let d = root.d();
    if !(1..=d).contains(&k) {
        return Err(CapError::Param(format!("k must lie in 1..={d}, got {k}")));
    }
    if offset.len() != d - k || offset.iter().any(|&o| o as usize >= root.per_axis()) {
        return Err(CapError::Param(format!("offset needs {} leaf indices below {}", d - k, root.per_axis())));
    }
    let sroot = RootCube::new(k, root.origin()[..k].to_vec(), root.side(), root.n())?;
    let slice = GridFunction::from_fn(sroot.clone(), |row| {
        let mut idx = sroot.leaf_multi_index(row);
        idx.extend_from_slice(offset);
        u.values()[root.leaf_row(&idx)]
    })?;
    let slice_classical = classical_bmo(&slice);
    let full_seminorm = seminorm_dyadic(u, &root.root_cube(), ContentParams::new(k as f64, d)?)?;
    let ratio = if full_seminorm > 0.0 { slice_classical / full_seminorm } else if slice_classical == 0.0 { 0.0 } else { f64::INFINITY };
    Ok((slice, RestrictionReport { k, offset: offset.to_vec(), slice_classical, full_seminorm, ratio }))
}

#[derive(Clone, Debug, Serialize)]
pub struct NestingReport {
    pub alpha: f64,
    pub beta: f64,
    pub seminorm_alpha: f64,
    pub seminorm_beta: f64,
    /// `‖u‖_β / ‖u‖_α`.
    pub ratio: f64,
    /// `C^{β/α}·α/(c·β)` with the decay constants for `α`.
    pub bound: f64,
    pub sets_checked: usize,
    pub power_violations: usize,
    pub passed: bool,
}

/// Compares `BMO^β` with `BMO^α`, `α ≤ β`, and checks `C_β(E) ≤ C_α(E)^{β/α}` on the level sets
/// of `|u − c_Q|` for every dyadic cube.
pub fn nesting_check(u: &GridFunction, alpha: f64, beta: f64, cprime: f64) -> Result<NestingReport> {
    if alpha > beta {
        return Err(CapError::Param(format!("alpha = {alpha} exceeds beta = {beta}")));
    }
    let d = u.root().d();
    let pa = ContentParams::new(alpha, d)?;
    let pb = ContentParams::new(beta, d)?;
    let q0 = u.root().root_cube();
    let oscs = all_oscillations(u, &q0, pa)?;
    let sa = oscs.iter().map(|r| r.oscillation).fold(0.0, f64::max);
    let sb = seminorm_dyadic(u, &q0, pb)?;
    let consts = jn_constants(alpha, cprime, 1.0)?;
    let bound = consts.big_c.powf(beta / alpha) * alpha / (consts.c * beta);

    let ca = DyadicContent::new(u.root(), pa)?;
    let cb = DyadicContent::new(u.root(), pb)?;
    let vals = u.morton_values();
    let n = u.root().n();
    let mut order = Vec::new();
    let mut sets = 0;
    let mut violations = 0;
    for r in &oscs {
        let slice = &vals[r.cube.leaf_range(n)];
        let la = deviation_layers(&mut ca.tree_for(&r.cube), slice, r.c_q, &mut order);
        let lb = deviation_layers(&mut cb.tree_for(&r.cube), slice, r.c_q, &mut order);
        for ((_, a), (_, b)) in la.iter().zip(&lb) {
            sets += 1;
            if *b > a.powf(beta / alpha) * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    let ratio = if sa > 0.0 { sb / sa } else { 0.0 };
    let passed = violations == 0 && ratio <= bound;
    Ok(NestingReport { alpha, beta, seminorm_alpha: sa, seminorm_beta: sb, ratio, bound, sets_checked: sets, power_violations: violations, passed })
}

/// Hölder direction `‖u‖ ≤ ‖u‖_p` and the ratio `‖u‖_p/(p·‖u‖)`.
#[derive(Clone, Debug, Serialize)]
pub struct PSeminormReport {
    pub p: f64,
    pub seminorm: f64,
    pub p_seminorm: f64,
    pub holder_ratio: f64,
    pub upper_ratio: f64,
}

pub fn p_seminorm_report(u: &GridFunction, p: ContentParams, pexp: f64) -> Result<PSeminormReport> {
    let q0 = u.root().root_cube();
    let s = seminorm_dyadic(u, &q0, p)?;
    let sp = crate::bmo::p_seminorm(u, &q0, p, pexp)?;
    let (h, up) = if s > 0.0 { (s / sp, sp / (pexp * s)) } else { (0.0, 0.0) };
    Ok(PSeminormReport { p: pexp, seminorm: s, p_seminorm: sp, holder_ratio: h, upper_ratio: up })
}

/// Oscillation of one cube under a fixed centering, for comparing centerings.
pub fn oscillation_at(u: &GridFunction, q: &DyadicCube, p: ContentParams, c: f64) -> Result<f64> {
    u.root().check(q)?;
    let mut osc = Oscillator::new(u.root(), p)?;
    let vals = u.morton_values();
    Ok(osc.g(q.level, &vals[q.leaf_range(u.root().n())], c) / osc.cost(q.level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DyadicSet;
    use proptest::prelude::*;

    fn p(beta: f64, d: usize) -> ContentParams {
        ContentParams::new(beta, d).unwrap()
    }

    #[test]
    fn constants_example() {
        let k = jn_constants(1.0, 2.0, 1.0).unwrap();
        assert_eq!(k.c_beta, 3.0);
        assert!((k.big_c - 3.26722081734971).abs() < 1e-13);
        assert!((k.c - 0.061313240195240384).abs() < 1e-16);
        let lim = jn_constants(1.0, 1.0 + 1e-12, 1.0).unwrap();
        assert!((lim.c - 1.0 / (3.0 * std::f64::consts::E)).abs() < 1e-12);
        assert_eq!(jn_constants(2.0, 2.0, 1.0).unwrap().c_beta, 5.0);
        assert!(jn_constants(1.0, 1.0, 1.0).is_err());
        assert!(k.big_c > std::f64::consts::E);
    }

    #[test]
    fn indicator_passes() {
        let root = RootCube::unit(2, 3).unwrap();
        let e = DyadicSet::from_leaves(root, &[0, 1, 2, 9, 33, 60]).unwrap();
        let k = jn_constants(1.2, 2.0, 1.0).unwrap();
        let rep = jn_verify(&e.indicator(), p(1.2, 2), &k).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.pairs > 0);
    }

    #[test]
    fn exp_integrability_examples() {
        let root = RootCube::unit(1, 4).unwrap();
        let k = jn_constants(0.5, 2.0, 1.0).unwrap();
        let c = GridFunction::constant(root.clone(), 2.0).unwrap();
        let r = exp_integrability(&c, &root.root_cube(), p(0.5, 1), k.c / 2.0, &k).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert!((r.bound - (1.0 + k.big_c)).abs() < 1e-12);
        assert!(exp_integrability(&c, &root.root_cube(), p(0.5, 1), k.c, &k).is_err());
    }

    #[test]
    fn piecewise_linear() {
        let phi = PiecewiseLinear::new(vec![-1.0, 2.0], vec![0.5, -2.0, 1.0], 0.0).unwrap();
        assert_eq!(phi.eval(0.0), 0.0);
        assert!((phi.eval(1.0) + 2.0).abs() < 1e-15);
        assert!((phi.eval(3.0) - (-4.0 + 1.0)).abs() < 1e-15);
        assert!((phi.eval(-2.0) - (2.0 - 0.5)).abs() < 1e-15);
        assert_eq!(phi.lipschitz(), 2.0);
        let root = RootCube::unit(1, 2).unwrap();
        let u = GridFunction::new(root, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let shifted = PiecewiseLinear::new(vec![], vec![1.0], 1.0).unwrap();
        assert!(compose_lipschitz(&u, &shifted, p(1.0, 1)).is_err());
    }

    #[test]
    fn composition_examples() {
        let root = RootCube::unit(1, 5).unwrap();
        let u = GridFunction::from_fn(root, |i| ((i * 13) % 7) as f64 - 3.0).unwrap();
        let id = compose_lipschitz(&u, &PiecewiseLinear::linear(1.0), p(0.5, 1)).unwrap();
        assert_eq!(id.seminorm_composed, id.seminorm_u);
        let abs = PiecewiseLinear::new(vec![0.0], vec![-1.0, 1.0], 0.0).unwrap();
        assert!(compose_lipschitz(&u, &abs, p(0.5, 1)).unwrap().passed);
        let three = compose_lipschitz(&u, &PiecewiseLinear::linear(3.0), p(0.5, 1)).unwrap();
        assert!((three.seminorm_composed - 3.0 * three.seminorm_u).abs() < 1e-12);
    }

    #[test]
    fn restriction_of_full_dimension() {
        let root = RootCube::unit(2, 3).unwrap();
        let u = GridFunction::from_fn(root, |i| ((i * 29) % 11) as f64).unwrap();
        let (slice, rep) = restrict_hyperplane(&u, 2, &[]).unwrap();
        assert_eq!(slice.values(), u.values());
        assert!((rep.ratio - 1.0).abs() < 1e-9, "{rep:?}");
        assert!(restrict_hyperplane(&u, 3, &[]).is_err());
    }

    #[test]
    fn restriction_of_extruded_indicator() {
        // E × [0,1): the slice is χ_E, and the 2-D BMO^1 matches the 1-D classical value
        let root = RootCube::unit(2, 3).unwrap();
        let u = GridFunction::from_fn(root.clone(), |row| if root.leaf_multi_index(row)[0] < 2 { 1.0 } else { 0.0 }).unwrap();
        let (_, rep) = restrict_hyperplane(&u, 1, &[5]).unwrap();
        assert!((rep.slice_classical - rep.full_seminorm).abs() < 1e-12, "{rep:?}");
        let c = GridFunction::constant(root, 1.0).unwrap();
        assert_eq!(restrict_hyperplane(&c, 1, &[0]).unwrap().1.slice_classical, 0.0);
    }

    #[test]
    fn nesting_examples() {
        let root = RootCube::unit(1, 3).unwrap();
        let u = GridFunction::from_fn(root, |i| if i < 4 { 1.0 } else { 0.0 }).unwrap();
        let same = nesting_check(&u, 0.7, 0.7, 2.0).unwrap();
        assert_eq!(same.ratio, 1.0);
        let r = nesting_check(&u, 0.5, 1.0, 2.0).unwrap();
        assert_eq!((r.seminorm_alpha, r.seminorm_beta), (0.5, 0.5));
        assert!(r.passed);
        assert!(nesting_check(&u, 1.0, 0.5, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn jn_holds_on_random_steps(vals in proptest::collection::vec(-3.0f64..3.0, 64), beta in 0.2f64..=2.0) {
            let root = RootCube::unit(2, 3).unwrap();
            let u = GridFunction::new(root, vals).unwrap();
            let k = jn_constants(beta, 2.0, 1.0).unwrap();
            let rep = jn_verify(&u, p(beta, 2), &k).unwrap();
            prop_assert!(rep.passed(), "{:?}", rep.worst);
        }

        #[test]
        fn holder_direction(vals in proptest::collection::vec(-3.0f64..3.0, 32), beta in 0.2f64..=1.0, pe in 1.5f64..4.0) {
            let root = RootCube::unit(1, 5).unwrap();
            let u = GridFunction::new(root, vals).unwrap();
            let r = p_seminorm_report(&u, p(beta, 1), pe).unwrap();
            prop_assert!(r.seminorm <= r.p_seminorm * (1.0 + 1e-9));
        }

        #[test]
        fn lipschitz_compositions(vals in proptest::collection::vec(-3.0f64..3.0, 16), bps in proptest::collection::vec(-3.0f64..3.0, 0..4), slopes in proptest::collection::vec(-2.0f64..2.0, 5)) {
            let mut bps = bps;
            bps.sort_by(f64::total_cmp);
            bps.dedup();
            let phi = PiecewiseLinear::new(bps.clone(), slopes[..bps.len() + 1].to_vec(), 0.0).unwrap();
            let root = RootCube::unit(2, 2).unwrap();
            let u = GridFunction::new(root, vals).unwrap();
            prop_assert!(compose_lipschitz(&u, &phi, p(1.3, 2)).unwrap().passed);
        }
    }
}
