//! Self-similar measures, Morrey norms and Riesz potentials.
//!
//! `I_α μ(x) = (1/γ(α)) ∫ |x − y|^{α−d} dμ(y)` with `γ(α) = π^{d/2} 2^α Γ(α/2) / Γ((d−α)/2)`.
//! Potentials are evaluated at leaf centers with the mass of each cell spread uniformly over the
//! cell: the own cell is integrated in closed form, the adjacent cells by 4-point Gauss
//! quadrature per axis, and farther cells by the center distance.

use serde::Serialize;

use crate::bmo::seminorm_dyadic;
use crate::choquet::choquet_integral;
use crate::content::{level_costs, ContentParams};
use crate::error::{CapError, Result};
use crate::grid::{DiscreteMeasure, DyadicCube, GridFunction, RootCube};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorreyNorm {
    pub value: f64,
    pub cube: DyadicCube,
}

/// Masses of all dyadic cubes, `sums[m][k]` for the cube at level `m` with Morton key `k`.
pub(crate) fn cube_masses(mu: &DiscreteMeasure) -> Vec<Vec<f64>> {
    let d = mu.root().d();
    let n = mu.root().n() as usize;
    let mut sums = vec![Vec::new(); n + 1];
    sums[n] = mu.morton_masses();
    for m in (0..n).rev() {
        sums[m] = sums[m + 1].chunks(1 << d).map(|c| c.iter().sum()).collect();
    }
    sums
}

/// `max_Q μ(Q)/l(Q)^β` over all dyadic cubes; ties go to the coarser cube.
pub fn morrey_norm(mu: &DiscreteMeasure, beta: f64) -> Result<MorreyNorm> {
    ContentParams::new(beta, mu.root().d())?;
    let d = mu.root().d();
    let costs = level_costs(mu.root(), beta);
    let mut best = MorreyNorm { value: f64::NEG_INFINITY, cube: mu.root().root_cube() };
    for (m, level) in cube_masses(mu).iter().enumerate() {
        for (k, &mass) in level.iter().enumerate() {
            let r = mass / costs[m];
            if r > best.value {
                best = MorreyNorm { value: r, cube: DyadicCube::from_morton(d, m as u32, k) };
            }
        }
    }
    Ok(best)
}

/// `(min, max)` of `μ(Q)/l(Q)^β` over the dyadic cubes of positive mass.
pub fn density_range(mu: &DiscreteMeasure, beta: f64) -> Result<(f64, f64)> {
    ContentParams::new(beta, mu.root().d())?;
    let costs = level_costs(mu.root(), beta);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (m, level) in cube_masses(mu).iter().enumerate() {
        for &mass in level.iter().filter(|&&x| x > 0.0) {
            lo = lo.min(mass / costs[m]);
            hi = hi.max(mass / costs[m]);
        }
    }
    Ok((lo, hi))
}

/// One similarity `x ↦ r·x + t` of the unit cube, with `r = 2^{-level}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IFSMap {
    pub level: u32,
    /// Translation in units of `r`, per axis; the image is the dyadic cube `(level, offset)`.
    pub offset: Vec<u32>,
    pub weight: f64,
}

impl IFSMap {
    pub fn ratio(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    pub fn image(&self) -> DyadicCube {
        DyadicCube::new(self.level, self.offset.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IFSSpec {
    pub d: usize,
    pub maps: Vec<IFSMap>,
}

fn nearest_dyadic(r: f64) -> String {
    let j = (-r.log2()).round().max(1.0) as i32;
    format!("1/{}", 1u64 << j)
}

impl IFSSpec {
    /// Validates weights, dyadic ratios, aligned translations and disjoint images.
    pub fn new(d: usize, maps: Vec<IFSMap>) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(CapError::Dimension(d));
        }
        if maps.is_empty() {
            return Err(CapError::Param("an IFS needs at least one map".into()));
        }
        for m in &maps {
            if m.level == 0 {
                return Err(CapError::Param("map ratios must lie in (0, 1)".into()));
            }
            if m.offset.len() != d || m.offset.iter().any(|&o| (o as u64) >= (1u64 << m.level)) {
                return Err(CapError::Param(format!("map image {} does not lie in the unit cube", m.image())));
            }
            if !(m.weight >= 0.0) {
                return Err(CapError::Param(format!("negative weight {}", m.weight)));
            }
        }
        let total: f64 = maps.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(CapError::Param(format!("weights sum to {total}, expected 1")));
        }
        for (i, a) in maps.iter().enumerate() {
            for b in &maps[i + 1..] {
                if a.image().overlaps(&b.image()) {
                    return Err(CapError::Param(format!("map images {} and {} overlap", a.image(), b.image())));
                }
            }
        }
        Ok(Self { d, maps })
    }

    /// Builds a map from a real ratio and a translation in unit coordinates.
    pub fn map_from_real(d: usize, ratio: f64, translation: &[f64], weight: f64) -> Result<IFSMap> {
        let j = -ratio.log2();
        if !(ratio > 0.0 && ratio < 1.0) || (j - j.round()).abs() > 1e-12 {
            return Err(CapError::Param(format!("ratio {ratio} is not of the form 2^-j; nearest dyadic ratio is {}", nearest_dyadic(ratio))));
        }
        let level = j.round() as u32;
        if translation.len() != d {
            return Err(CapError::Param(format!("translation needs {d} coordinates")));
        }
        let mut offset = Vec::with_capacity(d);
        for &t in translation {
            let k = t / ratio;
            if (k - k.round()).abs() > 1e-9 || k.round() < 0.0 {
                return Err(CapError::Param(format!("translation {t} is not a multiple of the ratio {ratio}")));
            }
            offset.push(k.round() as u32);
        }
        Ok(IFSMap { level, offset, weight })
    }

    /// Parses lines `map r=<ratio> t=<d decimals> w=<weight>`; ratios may be written `1/4`.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let perr = |line: usize, token: usize, msg: String| CapError::Parse { line, token, msg };
        let mut maps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks[0] != "map" {
                return Err(perr(ln, 1, format!("expected `map`, found `{}`", toks[0])));
            }
            let mut ratio = None;
            let mut trans = Vec::new();
            let mut weight = None;
            let mut in_t = false;
            for (j, tok) in toks.iter().enumerate().skip(1) {
                let pos = j + 1;
                let num = |s: &str| -> Result<f64> {
                    if let Some((a, b)) = s.split_once('/') {
                        let a: f64 = a.parse().map_err(|_| perr(ln, pos, format!("invalid number `{s}`")))?;
                        let b: f64 = b.parse().map_err(|_| perr(ln, pos, format!("invalid number `{s}`")))?;
                        Ok(a / b)
                    } else {
                        s.parse().map_err(|_| perr(ln, pos, format!("invalid number `{s}`")))
                    }
                };
                if let Some(v) = tok.strip_prefix("r=") {
                    ratio = Some(num(v)?);
                    in_t = false;
                } else if let Some(v) = tok.strip_prefix("t=") {
                    trans.push(num(v)?);
                    in_t = true;
                } else if let Some(v) = tok.strip_prefix("w=") {
                    weight = Some(num(v)?);
                    in_t = false;
                } else if in_t {
                    trans.push(num(tok)?);
                } else {
                    return Err(perr(ln, pos, format!("unexpected token `{tok}`")));
                }
            }
            let ratio = ratio.ok_or_else(|| perr(ln, 1, "missing r=".into()))?;
            let weight = weight.ok_or_else(|| perr(ln, 1, "missing w=".into()))?;
            maps.push(Self::map_from_real(d, ratio, &trans, weight).map_err(|e| perr(ln, 1, e.to_string()))?);
        }
        Self::new(d, maps)
    }

    pub fn format(&self) -> String {
        let mut s = String::new();
        for m in &self.maps {
            let r = m.ratio();
            let t: Vec<String> = m.offset.iter().map(|&o| format!("{:?}", o as f64 * r)).collect();
            s.push_str(&format!("map r=1/{} t={} w={:?}\n", 1u64 << m.level, t.join(" "), m.weight));
        }
        s
    }

    /// Quarter-Cantor set: corners of ratio 1/4 in every axis, equal weights. Dimension `d/2`.
    pub fn quarter_cantor(d: usize) -> Result<Self> {
        let k = 1usize << d;
        let maps = (0..k)
            .map(|o| IFSMap { level: 2, offset: (0..d).map(|a| if (o >> (d - 1 - a)) & 1 == 1 { 3 } else { 0 }).collect(), weight: 1.0 / k as f64 })
            .collect();
        Self::new(d, maps)
    }

    /// The `2^d` halves of the cube with equal weights; the limit is the uniform measure.
    pub fn uniform(d: usize) -> Result<Self> {
        let k = 1usize << d;
        let maps = (0..k).map(|o| IFSMap { level: 1, offset: (0..d).map(|a| ((o >> (d - 1 - a)) & 1) as u32).collect(), weight: 1.0 / k as f64 }).collect();
        Self::new(d, maps)
    }

    /// Dimension `s` of the measure: the root of `Σ w_i log w_i = s Σ w_i log r_i`.
    pub fn dimension(&self) -> f64 {
        let num: f64 = self.maps.iter().filter(|m| m.weight > 0.0).map(|m| m.weight * m.weight.ln()).sum();
        let den: f64 = self.maps.iter().filter(|m| m.weight > 0.0).map(|m| m.weight * m.ratio().ln()).sum();
        num / den
    }
}

/// Pushes unit mass down the tree through the maps until level `n`.
///
/// A branch whose next image would be finer than the leaves deposits its mass in the leaf that
/// contains that image.
pub fn hutchinson_measure(spec: &IFSSpec, root: &RootCube, n: u32) -> Result<DiscreteMeasure> {
    if spec.d != root.d() {
        return Err(CapError::Param(format!("IFS dimension {} does not match root dimension {}", spec.d, root.d())));
    }
    let root = root.with_resolution(n)?;
    let mut masses = vec![0.0; root.leaf_count()];
    let mut stack = vec![(DyadicCube::root(spec.d), 1.0f64)];
    while let Some((cube, mass)) = stack.pop() {
        if cube.level == n {
            masses[root.leaf_row(&cube.index)] += mass;
            continue;
        }
        for m in &spec.maps {
            let child = cube.compose(&m.image());
            let w = mass * m.weight;
            if w == 0.0 {
                continue;
            }
            if child.level > n {
                masses[root.leaf_row(&child.ancestor(n).index)] += w;
            } else {
                stack.push((child, w));
            }
        }
    }
    DiscreteMeasure::new(root, masses)
}

/// Stein normalization of the Riesz kernel.
pub fn gamma_alpha(alpha: f64, d: usize) -> f64 {
    let d = d as f64;
    std::f64::consts::PI.powf(d / 2.0) * 2f64.powf(alpha) * libm::tgamma(alpha / 2.0) / libm::tgamma((d - alpha) / 2.0)
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

/// Gauss–Legendre nodes and weights on `[-1/2, 1/2]`.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x / 2.0, w / 2.0));
    }
    out
}

/// `∫_{[-1/2,1/2]^d} |y|^{α−d} dy`.
///
/// `div(y|y|^{α−d}) = α|y|^{α−d}`, so the integral equals `(d/α) ∫_{[-1/2,1/2]^{d−1}}
/// (1/4 + |z|²)^{(α−d)/2} dz`, a smooth face integral.
pub fn self_cell_integral(alpha: f64, d: usize) -> f64 {
    let s = (alpha - d as f64) / 2.0;
    if d == 1 {
        return 0.25f64.powf(s) / alpha;
    }
    let gl = gauss_legendre(24);
    let mut face = 0.0;
    if d == 2 {
        for &(z, w) in &gl {
            face += w * (0.25 + z * z).powf(s);
        }
    } else {
        for &(z1, w1) in &gl {
            for &(z2, w2) in &gl {
                face += w1 * w2 * (0.25 + z1 * z1 + z2 * z2).powf(s);
            }
        }
    }
    d as f64 / alpha * face
}

/// Riesz potential of `μ` at the leaf centers.
pub fn riesz_potential(mu: &DiscreteMeasure, alpha: f64) -> Result<GridFunction> {
    let root = mu.root();
    let d = root.d();
    if !(alpha > 0.0 && alpha < d as f64) {
        return Err(CapError::Param(format!("alpha must lie in (0, {d}), got {alpha}")));
    }
    let s = root.leaf_side();
    let per = root.per_axis() as i64;
    let expo = alpha - d as f64;
    let gamma = gamma_alpha(alpha, d);
    let self_term = s.powf(expo) * self_cell_integral(alpha, d);

    // kernel table by index difference; neighbours averaged over the source cell
    let span = (2 * per - 1) as usize;
    let mut kernel = vec![0.0; span.pow(d as u32)];
    let gauss: Vec<(Vec<f64>, f64)> = (0..4usize.pow(d as u32))
        .map(|q| {
            let mut pt = Vec::with_capacity(d);
            let mut w = 1.0;
            for a in 0..d {
                let (x, wx) = GAUSS4[(q >> (2 * (d - 1 - a))) & 3];
                pt.push(x / 2.0);
                w *= wx / 2.0;
            }
            (pt, w)
        })
        .collect();
    for (slot, kv) in kernel.iter_mut().enumerate() {
        let mut rem = slot;
        let mut delta = vec![0i64; d];
        for a in (0..d).rev() {
            delta[a] = (rem % span) as i64 - (per - 1);
            rem /= span;
        }
        let cheb = delta.iter().map(|x| x.abs()).max().unwrap();
        *kv = if cheb == 0 {
            self_term
        } else if cheb == 1 {
            gauss
                .iter()
                .map(|(pt, w)| {
                    let r2: f64 = delta.iter().zip(pt).map(|(&dl, &y)| ((dl as f64 + y) * s).powi(2)).sum();
                    w * r2.powf(expo / 2.0)
                })
                .sum()
        } else {
            let r2: f64 = delta.iter().map(|&dl| (dl as f64 * s).powi(2)).sum();
            r2.powf(expo / 2.0)
        };
    }

    let sources: Vec<(Vec<i64>, f64)> = mu
        .masses()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(r, &m)| (root.leaf_multi_index(r).iter().map(|&i| i as i64).collect(), m))
        .collect();
    GridFunction::from_fn(root.clone(), |row| {
        let x: Vec<i64> = root.leaf_multi_index(row).iter().map(|&i| i as i64).collect();
        let mut acc = 0.0;
        for (y, m) in &sources {
            let mut slot = 0usize;
            for a in 0..d {
                slot = slot * span + (x[a] - y[a] + per - 1) as usize;
            }
            acc += m * kernel[slot];
        }
        acc / gamma
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AdamsReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub n: u32,
    pub gamma: f64,
    pub seminorm: f64,
    pub morrey: f64,
    pub ratio: f64,
    /// `Σ_{k≥1} 2^{k(d−α)} 2^{(1−k)(d−α+ε)} = 2^{d−α+ε}/(2^ε − 1)`.
    pub series_near: f64,
    /// `Σ_{k≥1} 2^{−k(d−α+1)} 2^{(k+1)(d−α)} = 2^{d−α}`.
    pub series_far: f64,
}

fn partial_series(terms: impl Fn(i32) -> f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..=2000 {
        let t = terms(k);
        acc += t;
        if t < 1e-17 * acc {
            break;
        }
    }
    acc
}

/// `‖I_α μ‖_{BMO^{d−α+ε}} / ‖μ‖_{M^{d−α}}` together with the two splitting series.
pub fn adams_embedding_check(mu: &DiscreteMeasure, alpha: f64, epsilon: f64) -> Result<AdamsReport> {
    if !(epsilon > 0.0 && epsilon <= alpha) {
        return Err(CapError::Param(format!("epsilon must lie in (0, alpha] = (0, {alpha}], got {epsilon}")));
    }
    let d = mu.root().d() as f64;
    let pot = riesz_potential(mu, alpha)?;
    let beta = d - alpha + epsilon;
    let seminorm = seminorm_dyadic(&pot, &mu.root().root_cube(), ContentParams::new(beta, mu.root().d())?)?;
    let morrey = morrey_norm(mu, d - alpha)?.value;
    let a = d - alpha;
    Ok(AdamsReport {
        alpha,
        epsilon,
        n: mu.root().n(),
        gamma: gamma_alpha(alpha, mu.root().d()),
        seminorm,
        morrey,
        ratio: if morrey > 0.0 { seminorm / morrey } else { 0.0 },
        series_near: partial_series(|k| 2f64.powf(k as f64 * a) * 2f64.powf((1 - k) as f64 * (a + epsilon))),
        series_far: partial_series(|k| 2f64.powf(-(k as f64) * (a + 1.0)) * 2f64.powf((k + 1) as f64 * a)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceRow {
    pub n: u32,
    /// `∫ I_α μ dμ`.
    pub energy: f64,
    /// `∫ I_α μ dC` at `β = d − α`.
    pub critical_norm: f64,
    /// `∫ I_α μ dC` at `β = d − α + ε`.
    pub subcritical_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub dimension: f64,
    pub rows: Vec<DivergenceRow>,
    pub energy_increasing: bool,
    pub critical_increasing: bool,
    /// Last increment at least half of the previous one, for both growing quantities.
    pub non_collapsing: bool,
    /// Relative change of the subcritical norm over the last step.
    pub subcritical_last_change: f64,
}

impl DivergenceReport {
    pub fn diverges(&self) -> bool {
        self.energy_increasing && self.critical_increasing && self.non_collapsing
    }
}

fn increments(xs: &[f64]) -> Vec<f64> {
    xs.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Energy and Choquet norms of `I_α μ` along a resolution sweep, without a dimension check.
pub fn divergence_sweep(spec: &IFSSpec, root: &RootCube, alpha: f64, epsilon: f64, n_sweep: &[u32]) -> Result<DivergenceReport> {
    let d = root.d();
    let crit = ContentParams::new(d as f64 - alpha, d)?;
    let sub = ContentParams::new(d as f64 - alpha + epsilon, d)?;
    let mut rows = Vec::new();
    for &n in n_sweep {
        let mu = hutchinson_measure(spec, root, n)?;
        let pot = riesz_potential(&mu, alpha)?;
        let q = mu.root().root_cube();
        let energy = pot.values().iter().zip(mu.masses()).map(|(v, m)| v * m).sum();
        rows.push(DivergenceRow { n, energy, critical_norm: choquet_integral(&pot, crit, &q)?, subcritical_norm: choquet_integral(&pot, sub, &q)? });
    }
    let e: Vec<f64> = rows.iter().map(|r| r.energy).collect();
    let c: Vec<f64> = rows.iter().map(|r| r.critical_norm).collect();
    let s: Vec<f64> = rows.iter().map(|r| r.subcritical_norm).collect();
    let (de, dc) = (increments(&e), increments(&c));
    let grows = |inc: &[f64]| inc.iter().all(|&x| x > 0.0);
    let holds_up = |inc: &[f64]| inc.len() < 2 || inc[inc.len() - 1] >= 0.5 * inc[inc.len() - 2];
    let last_change = if s.len() >= 2 { (s[s.len() - 1] - s[s.len() - 2]).abs() / s[s.len() - 2].abs() } else { 0.0 };
    Ok(DivergenceReport {
        alpha,
        epsilon,
        dimension: spec.dimension(),
        energy_increasing: grows(&de),
        critical_increasing: grows(&dc),
        non_collapsing: holds_up(&de) && holds_up(&dc),
        subcritical_last_change: last_change,
        rows,
    })
}

/// [`divergence_sweep`] for a measure whose dimension must equal `d − α`.
pub fn divergence_example(spec: &IFSSpec, root: &RootCube, alpha: f64, epsilon: f64, n_sweep: &[u32]) -> Result<DivergenceReport> {
    let want = root.d() as f64 - alpha;
    let dim = spec.dimension();
    if (dim - want).abs() > 1e-9 {
        return Err(CapError::Param(format!("measure dimension {dim} does not match d - alpha = {want}")));
    }
    divergence_sweep(spec, root, alpha, epsilon, n_sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_measure() {
        let root = RootCube::unit(1, 8).unwrap();
        let mu = hutchinson_measure(&IFSSpec::uniform(1).unwrap(), &root, 8).unwrap();
        assert!(mu.masses().iter().all(|&m| (m - 1.0 / 256.0).abs() < 1e-18));
        let (lo, hi) = density_range(&mu, 1.0).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let m = morrey_norm(&mu, 1.0).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quarter_cantor() {
        let root = RootCube::unit(1, 12).unwrap();
        let spec = IFSSpec::quarter_cantor(1).unwrap();
        assert!((spec.dimension() - 0.5).abs() < 1e-15);
        let mu = hutchinson_measure(&spec, &root, 12).unwrap();
        assert_eq!(mu.masses().iter().filter(|&&m| m > 0.0).count(), 64);
        let m = morrey_norm(&mu, 0.5).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
        let (lo, hi) = density_range(&mu, 0.5).unwrap();
        assert!((lo - 0.5f64.sqrt()).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_map_concentrates() {
        let spec = IFSSpec::new(1, vec![IFSMap { level: 1, offset: vec![0], weight: 1.0 }]).unwrap();
        let mut prev = 0.0;
        for n in [4u32, 6, 8] {
            let mu = hutchinson_measure(&spec, &RootCube::unit(1, n).unwrap(), n).unwrap();
            assert_eq!(mu.masses()[0], 1.0);
            let m = morrey_norm(&mu, 0.05).unwrap().value;
            assert!(m > prev);
            prev = m;
        }
    }

    #[test]
    fn spec_validation_and_parsing() {
        let spec = IFSSpec::parse("map r=1/4 t=0 w=0.5\nmap r=0.25 t=0.75 w=0.5\n", 1).unwrap();
        assert_eq!(spec, IFSSpec::quarter_cantor(1).unwrap());
        assert_eq!(IFSSpec::parse(&spec.format(), 1).unwrap(), spec);
        let err = IFSSpec::parse("map r=0.3 t=0 w=1\n", 1).unwrap_err();
        assert!(err.to_string().contains("1/4"), "{err}");
        assert!(IFSSpec::parse("map r=1/2 t=0 w=0.5\nmap r=1/4 t=0.25 w=0.5\n", 1).is_err());
        assert!(IFSSpec::parse("map r=1/2 t=0 w=0.4\nmap r=1/2 t=0.5 w=0.5\n", 1).is_err());
        let two = IFSSpec::parse("map r=1/4 t=0 0.75 w=1\n", 2).unwrap();
        assert_eq!(two.maps[0].offset, vec![0, 3]);
    }

    #[test]
    fn self_cell_closed_forms() {
        // d = 1: 2·∫_0^{1/2} y^{α−1} dy
        assert!((self_cell_integral(0.5, 1) - 2.0 * 0.5f64.powf(0.5) / 0.5).abs() < 1e-15);
        // α = d gives the volume of the cell
        assert!((self_cell_integral(2.0, 2) - 1.0).abs() < 1e-12);
        assert!((self_cell_integral(3.0, 3) - 1.0).abs() < 1e-12);
        // d = 2, α = 1: ∫ 1/|y| over the unit square is 4 ln(1 + √2)
        assert!((self_cell_integral(1.0, 2) - 4.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-10);
    }

    #[test]
    fn gamma_values() {
        // d = 1, α = 1/2: π^{1/2}·2^{1/2}·Γ(1/4)/Γ(1/4)
        assert!((gamma_alpha(0.5, 1) - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        // d = 3, α = 2: 4π
        assert!((gamma_alpha(2.0, 3) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn point_mass_potential() {
        let root = RootCube::unit(1, 6).unwrap();
        let mut masses = vec![0.0; 64];
        masses[10] = 1.0;
        let mu = DiscreteMeasure::new(root.clone(), masses).unwrap();
        let pot = riesz_potential(&mu, 0.5).unwrap();
        let g = gamma_alpha(0.5, 1);
        let dist: f64 = (40.0 - 10.0) / 64.0;
        assert!((pot.values()[40] - dist.powf(-0.5) / g).abs() < 1e-12);
        // shifting the source shifts the potential
        let mut m2 = vec![0.0; 64];
        m2[11] = 1.0;
        let pot2 = riesz_potential(&DiscreteMeasure::new(root, m2).unwrap(), 0.5).unwrap();
        for i in 0..63 {
            assert!((pot2.values()[i + 1] - pot.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_potential_matches_quadrature() {
        let n = 8;
        let root = RootCube::unit(1, n).unwrap();
        let mu = DiscreteMeasure::uniform(root.clone(), 1.0).unwrap();
        let pot = riesz_potential(&mu, 0.5).unwrap();
        let g = gamma_alpha(0.5, 1);
        // oracle: midpoint rule on 10× finer cells with the two cells next to x integrated exactly
        let fine = 10 * (1usize << n);
        let h = 1.0 / fine as f64;
        let mut worst = 0.0f64;
        for (i, &v) in pot.values().iter().enumerate() {
            let x = (i as f64 + 0.5) / (1usize << n) as f64;
            let mut acc = 0.0;
            for k in 0..fine {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                acc += if x > a - h && x < b + h {
                    // ∫_a^b |x−y|^{-1/2} dy exactly
                    let f = |y: f64| if y >= x { 2.0 * (y - x).sqrt() } else { -2.0 * (x - y).sqrt() };
                    f(b) - f(a)
                } else {
                    h / ((x - (a + b) / 2.0).abs()).sqrt()
                };
            }
            let exact = 2.0 * (x.sqrt() + (1.0 - x).sqrt()) / g;
            assert!((acc / g - exact).abs() / exact < 1e-3);
            worst = worst.max((v - acc / g).abs() / (acc / g));
        }
        assert!(worst < 1e-3, "relative error {worst}");
        let vals = pot.values();
        let argmax = (0..vals.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        assert!(argmax == 127 || argmax == 128);
        for i in 0..128 {
            assert!((vals[i] - vals[255 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn adams_series() {
        let root = RootCube::unit(1, 6).unwrap();
        let mu = DiscreteMeasure::uniform(root, 1.0).unwrap();
        let r = adams_embedding_check(&mu, 0.5, 0.25).unwrap();
        assert!((r.series_near - 2f64.powf(0.75) / (2f64.powf(0.25) - 1.0)).abs() < 1e-9);
        assert!((r.series_far - 2f64.powf(0.5)).abs() < 1e-12);
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        let r2 = adams_embedding_check(&mu.scaled(2.0).unwrap(), 0.5, 0.25).unwrap();
        assert!((r2.ratio - r.ratio).abs() < 1e-12 * r.ratio);
        assert!(adams_embedding_check(&mu, 0.5, 0.75).is_err());
    }

    #[test]
    fn divergence_needs_matching_dimension() {
        let root = RootCube::unit(1, 4).unwrap();
        assert!(divergence_example(&IFSSpec::uniform(1).unwrap(), &root, 0.5, 0.25, &[4, 6]).is_err());
        let r = divergence_example(&IFSSpec::quarter_cantor(1).unwrap(), &root, 0.5, 0.25, &[4, 6, 8]).unwrap();
        assert!(r.energy_increasing, "{r:?}");
    }

    proptest! {
        #[test]
        fn potential_is_linear(a in proptest::collection::vec(0.0f64..1.0, 16), b in proptest::collection::vec(0.0f64..1.0, 16)) {
            let root = RootCube::unit(2, 2).unwrap();
            let m1 = DiscreteMeasure::new(root.clone(), a).unwrap();
            let m2 = DiscreteMeasure::new(root, b).unwrap();
            let lhs = riesz_potential(&m1.add(&m2).unwrap(), 1.2).unwrap();
            let p1 = riesz_potential(&m1, 1.2).unwrap();
            let p2 = riesz_potential(&m2, 1.2).unwrap();
            for i in 0..16 {
                let s = p1.values()[i] + p2.values()[i];
                prop_assert!((lhs.values()[i] - s).abs() <= 1e-12 * s.max(1.0));
            }
        }

        #[test]
        fn morrey_homogeneous_and_monotone(a in proptest::collection::vec(0.0f64..1.0, 64), b in proptest::collection::vec(0.0f64..1.0, 64), c in 0.1f64..10.0, beta in 0.1f64..=2.0) {
            let root = RootCube::unit(2, 3).unwrap();
            let m1 = DiscreteMeasure::new(root.clone(), a).unwrap();
            let m2 = DiscreteMeasure::new(root, b).unwrap();
            let base = morrey_norm(&m1, beta).unwrap().value;
            prop_assert!((morrey_norm(&m1.scaled(c).unwrap(), beta).unwrap().value - c * base).abs() <= 1e-12 * c * base.max(1e-300));
            prop_assert!(morrey_norm(&m1.add(&m2).unwrap(), beta).unwrap().value >= base);
        }
    }
}
