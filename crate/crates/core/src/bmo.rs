//! Dimensional BMO seminorms built from Choquet oscillations.
//!
//! For a cube `Q`, `g(c) = ∫_Q |u − c| dC` is convex and piecewise linear in `c`. Between two
//! consecutive points of `{u values} ∪ {midpoints of pairs of values}` the ordering of the
//! numbers `|u(x) − c|` is fixed and each of them is affine in `c`, so `g` is affine there too.
//! The smallest minimizer is therefore one of those points and is found exactly by two binary
//! searches, the second one over the midpoints near the best data value.

use std::collections::HashMap;

use serde::Serialize;

use crate::choquet::{layers_desc, ChoquetIntegrator};
use crate::content::{ContentParams, ContentTree};
use crate::error::{CapError, Result};
use crate::grid::{morton_decode, DyadicCube, GridFunction, RootCube};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationResult {
    pub cube: DyadicCube,
    pub c_q: f64,
    /// `(1/l(Q)^β) ∫_Q |u − c_Q| dC`.
    pub oscillation: f64,
}

/// Smallest `k` in `0..len` with `pred(k)`, assuming `pred` is monotone and `pred(len - 1)`.
fn first_true(len: usize, mut pred: impl FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Oscillation evaluator sharing scratch space across cubes of one root.
pub struct Oscillator {
    ci: ChoquetIntegrator,
    buf: Vec<f64>,
}

impl Oscillator {
    pub fn new(root: &RootCube, p: ContentParams) -> Result<Self> {
        Ok(Self { ci: ChoquetIntegrator::new(root, p)?, buf: Vec::new() })
    }

    pub fn integrator(&mut self) -> &mut ChoquetIntegrator {
        &mut self.ci
    }

    pub fn cost(&self, level: u32) -> f64 {
        self.ci.content().cost(level)
    }

    /// `∫ |v − c|^p dC` over a cube at `level`, `vals` in Morton order.
    pub fn g_pow(&mut self, level: u32, vals: &[f64], c: f64, p: f64) -> f64 {
        let mut buf = std::mem::take(&mut self.buf);
        buf.clear();
        if p == 1.0 {
            buf.extend(vals.iter().map(|v| (v - c).abs()));
        } else {
            buf.extend(vals.iter().map(|v| (v - c).abs().powf(p)));
        }
        let r = self.ci.integrate_level(level, &buf);
        self.buf = buf;
        r
    }

    pub fn g(&mut self, level: u32, vals: &[f64], c: f64) -> f64 {
        self.g_pow(level, vals, c, 1.0)
    }

    /// Smallest minimizer of `g` and the minimum value.
    pub fn best(&mut self, level: u32, vals: &[f64]) -> (f64, f64) {
        let mut v = vals.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        if v.len() == 1 {
            return (v[0], 0.0);
        }
        let mut memo: HashMap<u64, f64> = HashMap::new();
        let mut g = |c: f64, me: &mut Self| *memo.entry(c.to_bits()).or_insert_with(|| me.g(level, vals, c));

        let len = v.len();
        let k = first_true(len, |k| k == len - 1 || g(v[k + 1], self) >= g(v[k], self));
        let a = v[k.saturating_sub(1)];
        let b = v[(k + 1).min(len - 1)];

        let lo = v.partition_point(|&x| x < a);
        let hi = v.partition_point(|&x| x <= b);
        let mut cands: Vec<f64> = v[lo..hi].to_vec();
        for i in 0..len {
            let j0 = v.partition_point(|&x| x < 2.0 * a - v[i]).max(i + 1);
            let j1 = v.partition_point(|&x| x <= 2.0 * b - v[i]);
            for &vj in v.get(j0..j1).unwrap_or(&[]) {
                let m = 0.5 * (v[i] + vj);
                if a <= m && m <= b {
                    cands.push(m);
                }
            }
        }
        cands.sort_by(f64::total_cmp);
        // one midpoint can arise from several pairs with different rounding; near-equal
        // candidates would stop the search on the descending side
        let tol = 1e-12 * (v[len - 1] - v[0]).max(a.abs()).max(b.abs());
        cands.dedup_by(|x, y| *x - *y <= tol);
        let n = cands.len();
        let j = first_true(n, |j| j == n - 1 || g(cands[j + 1], self) >= g(cands[j], self));
        (cands[j], g(cands[j], self))
    }

    /// `inf_c ((1/l^β) ∫ |v − c|^p dC)^{1/p}` by golden-section search on `[min v, max v]`.
    pub fn best_pow(&mut self, level: u32, vals: &[f64], p: f64) -> (f64, f64) {
        if p == 1.0 {
            let (c, g) = self.best(level, vals);
            return (c, g / self.cost(level));
        }
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let c = if lo == hi {
            lo
        } else {
            let r = (5f64.sqrt() - 1.0) / 2.0;
            let (mut a, mut b) = (lo, hi);
            let mut x1 = b - r * (b - a);
            let mut x2 = a + r * (b - a);
            let mut f1 = self.g_pow(level, vals, x1, p);
            let mut f2 = self.g_pow(level, vals, x2, p);
            // 0.618^80 < 1e-16, so the cap only bites once the bracket is down to rounding
            let mut iters = 0;
            while b - a > 1e-12 * (hi - lo) && iters < 80 {
                iters += 1;
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - r * (b - a);
                    f1 = self.g_pow(level, vals, x1, p);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + r * (b - a);
                    f2 = self.g_pow(level, vals, x2, p);
                }
            }
            if f1 <= f2 {
                x1
            } else {
                x2
            }
        };
        let val = (self.g_pow(level, vals, c, p) / self.cost(level)).powf(1.0 / p);
        (c, val)
    }
}

fn cube_values(u: &GridFunction, q: &DyadicCube) -> Result<Vec<f64>> {
    u.root().check(q)?;
    Ok(u.morton_values()[q.leaf_range(u.root().n())].to_vec())
}

/// The smallest `c` minimizing `∫_Q |u − c| dC`, and the normalized oscillation there.
pub fn best_constant(u: &GridFunction, q: &DyadicCube, p: ContentParams) -> Result<OscillationResult> {
    let vals = cube_values(u, q)?;
    let mut osc = Oscillator::new(u.root(), p)?;
    let (c, g) = osc.best(q.level, &vals);
    Ok(OscillationResult { cube: q.clone(), c_q: c, oscillation: g / osc.cost(q.level) })
}

/// Oscillations of `u` over every non-leaf dyadic subcube of `q0`, coarsest first.
pub fn all_oscillations(u: &GridFunction, q0: &DyadicCube, p: ContentParams) -> Result<Vec<OscillationResult>> {
    p_oscillations(u, q0, p, 1.0)
}

fn p_oscillations(u: &GridFunction, q0: &DyadicCube, p: ContentParams, pexp: f64) -> Result<Vec<OscillationResult>> {
    let root = u.root();
    root.check(q0)?;
    let n = root.n();
    let d = root.d();
    let vals = u.morton_values();
    let mut osc = Oscillator::new(root, p)?;
    let mut out = Vec::new();
    for m in q0.level..n {
        let depth = m - q0.level;
        for local in 0..1usize << (d as u32 * depth) {
            let cube = q0.compose(&DyadicCube::from_morton(d, depth, local));
            let (c, o) = osc.best_pow(m, &vals[cube.leaf_range(n)], pexp);
            out.push(OscillationResult { cube, c_q: c, oscillation: o });
        }
    }
    Ok(out)
}

fn sup(results: &[OscillationResult]) -> f64 {
    results.iter().map(|r| r.oscillation).fold(0.0, f64::max)
}

/// `sup_{Q ⊆ q0} inf_c (1/l(Q)^β) ∫_Q |u − c| dC` over dyadic `Q`.
pub fn seminorm_dyadic(u: &GridFunction, q0: &DyadicCube, p: ContentParams) -> Result<f64> {
    Ok(sup(&all_oscillations(u, q0, p)?))
}

/// The `L^p`-type seminorm `sup_Q inf_c ((1/l(Q)^β) ∫_Q |u − c|^p dC)^{1/p}`.
pub fn p_seminorm(u: &GridFunction, q0: &DyadicCube, p: ContentParams, pexp: f64) -> Result<f64> {
    if !(pexp >= 1.0) || !pexp.is_finite() {
        return Err(CapError::Param(format!("p must be at least 1, got {pexp}")));
    }
    Ok(sup(&p_oscillations(u, q0, p, pexp)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledSeminorm {
    pub dyadic: f64,
    pub sampled: f64,
    /// Lattice offsets in leaves, applied along every axis.
    pub offsets: Vec<usize>,
}

/// Leaf-aligned lattice offsets `k·2^{n−1}/shifts`, `k = 0..shifts`, without repeats.
pub fn lattice_offsets(n: u32, shifts: usize) -> Vec<usize> {
    let half = if n == 0 { 0 } else { 1usize << (n - 1) };
    let mut out: Vec<usize> = (0..shifts).map(|k| k * half / shifts).collect();
    out.dedup();
    out
}

/// Values of the box of `2^s` leaves per axis starting at leaf `start`, in the box's own
/// Morton order.
fn box_values(u: &GridFunction, start: &[usize], s: u32) -> Vec<f64> {
    let root = u.root();
    let d = root.d();
    (0..1usize << (d as u32 * s))
        .map(|k| {
            let local = morton_decode(d, s, k);
            let global: Vec<u32> = local.iter().zip(start).map(|(&l, &o)| l + o as u32).collect();
            u.values()[root.leaf_row(&global)]
        })
        .collect()
}

/// Lower bound for the seminorm over all parallel subcubes: the sup over translated dyadic
/// lattices, counting only lattice cubes that fit inside the root.
pub fn seminorm_sampled(u: &GridFunction, p: ContentParams, shifts: usize) -> Result<SampledSeminorm> {
    if shifts == 0 {
        return Err(CapError::Param("shifts must be at least 1".into()));
    }
    let root = u.root();
    let d = root.d();
    let n = root.n();
    let dyadic = seminorm_dyadic(u, &root.root_cube(), p)?;
    let offsets = lattice_offsets(n, shifts);
    let mut osc = Oscillator::new(root, p)?;
    let total = 1usize << n;
    let mut sampled = dyadic;
    for &sigma in offsets.iter().filter(|&&s| s > 0) {
        for m in 1..n {
            let width = 1usize << (n - m);
            let starts: Vec<usize> = (0..).map(|j| sigma + j * width).take_while(|&s| s + width <= total).collect();
            let mut idx = vec![0usize; d];
            'cubes: loop {
                let corner: Vec<usize> = idx.iter().map(|&i| starts[i]).collect();
                let vals = box_values(u, &corner, n - m);
                let (_, g) = osc.best(m, &vals);
                sampled = sampled.max(g / osc.cost(m));
                for a in (0..d).rev() {
                    idx[a] += 1;
                    if idx[a] < starts.len() {
                        continue 'cubes;
                    }
                    idx[a] = 0;
                }
                break;
            }
        }
    }
    Ok(SampledSeminorm { dyadic, sampled, offsets })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub cube: DyadicCube,
    pub c_q: f64,
    /// `‖u‖` over the whole root, the unit for `t`.
    pub norm: f64,
    pub thresholds: Vec<f64>,
    /// `C({x ∈ Q : |u(x) − c_Q| > t})` for each threshold.
    pub contents: Vec<f64>,
    /// Fit of `ln(content/l(Q)^β) ≈ ln C_fit − c_fit·t/‖u‖` on the tail `t ≥ c_β‖u‖`.
    pub c_fit: Option<f64>,
    pub big_c_fit: Option<f64>,
    pub r_squared: Option<f64>,
    pub tail_points: usize,
}

/// Least-squares line through `(x, y)`: returns `(slope, intercept, r²)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, my - slope * mx, r2))
}

/// Superlevel contents of `|v − c|` in ascending threshold order: entry `i` is
/// `(b_i, C({|v − c| ≥ b_i}))` for the distinct positive values `b_1 < b_2 < …`.
pub(crate) fn deviation_layers(tree: &mut ContentTree, vals: &[f64], c: f64, order: &mut Vec<usize>) -> Vec<(f64, f64)> {
    let dev: Vec<f64> = vals.iter().map(|v| (v - c).abs()).collect();
    let mut layers = Vec::new();
    layers_desc(tree, &dev, order, &mut layers);
    layers.reverse();
    layers
}

pub fn decay_curve(u: &GridFunction, q: &DyadicCube, p: ContentParams) -> Result<DecayFit> {
    let norm = seminorm_dyadic(u, &u.root().root_cube(), p)?;
    if norm == 0.0 {
        return Err(CapError::ZeroSeminorm);
    }
    let best = best_constant(u, q, p)?;
    let vals = cube_values(u, q)?;
    let ci = ChoquetIntegrator::new(u.root(), p)?;
    let mut tree = ci.content().tree_for(q);
    let layers = deviation_layers(&mut tree, &vals, best.c_q, &mut Vec::new());
    // {|u − c| > t} at t = b_{i−1} is {|u − c| ≥ b_i}
    let mut thresholds = vec![0.0];
    let mut contents = Vec::new();
    for &(b, c) in &layers {
        contents.push(c);
        thresholds.push(b);
    }
    contents.push(0.0);

    let lq = ci.content().cost(q.level);
    let c_beta = 1.0 + 2f64.powf(p.beta());
    let (xs, ys): (Vec<f64>, Vec<f64>) = thresholds
        .iter()
        .zip(&contents)
        .filter(|(&t, &c)| c > 0.0 && t >= c_beta * norm)
        .map(|(&t, &c)| (t / norm, (c / lq).ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys);
    Ok(DecayFit {
        cube: q.clone(),
        c_q: best.c_q,
        norm,
        thresholds,
        contents,
        c_fit: fit.map(|f| -f.0),
        big_c_fit: fit.map(|f| f.1.exp()),
        r_squared: fit.map(|f| f.2),
        tail_points: xs.len(),
    })
}
