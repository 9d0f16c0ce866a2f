//! Deterministic test functions, sets and measures.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CapError, Result};
use crate::grid::{DyadicCube, DyadicSet, GridFunction, RootCube};
use crate::potential::{hutchinson_measure, IFSMap, IFSSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusKind {
    LogSingularity,
    CantorIndicator,
    RandomStep,
    Ramp,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 4] = [CorpusKind::LogSingularity, CorpusKind::CantorIndicator, CorpusKind::RandomStep, CorpusKind::Ramp];

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::LogSingularity => "log-singularity",
            CorpusKind::CantorIndicator => "cantor-indicator",
            CorpusKind::RandomStep => "random-step",
            CorpusKind::Ramp => "ramp",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = CapError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CapError::Param(format!("unknown corpus kind `{s}`; expected one of log-singularity, cantor-indicator, random-step, ramp")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CorpusItem {
    Grid(GridFunction),
    Set(DyadicSet),
}

impl CorpusItem {
    pub fn to_function(&self) -> GridFunction {
        match self {
            CorpusItem::Grid(f) => f.clone(),
            CorpusItem::Set(e) => e.indicator(),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `log|x − x₀|` with `x₀` a random interior grid vertex.
pub fn log_singularity(seed: u64, root: &RootCube) -> Result<GridFunction> {
    let mut r = rng(seed);
    let per = root.per_axis() as u64;
    let h = root.leaf_side();
    let x0: Vec<f64> = (0..root.d())
        .map(|a| {
            let k = if per > 1 { r.random_range(1..per) } else { 0 };
            root.origin()[a] + k as f64 * h
        })
        .collect();
    log_at(root, &x0)
}

/// `log|x − x₀|` with `x₀` the origin corner of the root; every dyadic cube at the corner sees
/// the full tail down to the leaves.
pub fn log_corner(root: &RootCube) -> Result<GridFunction> {
    log_at(root, root.origin())
}

fn log_at(root: &RootCube, x0: &[f64]) -> Result<GridFunction> {
    GridFunction::from_fn(root.clone(), |row| {
        let c = root.leaf_center(row);
        c.iter().zip(x0).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt().ln()
    })
}

/// Support of the quarter-Cantor measure at the resolution of `root`.
pub fn cantor_set(root: &RootCube) -> Result<DyadicSet> {
    let mu = hutchinson_measure(&IFSSpec::quarter_cantor(root.d())?, root, root.n())?;
    DyadicSet::new(root.clone(), mu.masses().iter().map(|&m| m > 0.0).collect())
}

/// Piecewise constant on a random dyadic partition with values in `[-1, 1]`.
pub fn random_step(seed: u64, root: &RootCube) -> Result<GridFunction> {
    let mut r = rng(seed);
    let n = root.n();
    let mut vals = vec![0.0; root.leaf_count()];
    let mut stack = vec![DyadicCube::root(root.d())];
    while let Some(c) = stack.pop() {
        let split = c.level < n && (c.level == 0 || r.random::<f64>() < 0.65);
        if split {
            stack.extend(c.children());
        } else {
            let v = r.random_range(-1.0..1.0);
            let shift = n - c.level;
            let mut idx = vec![0u32; root.d()];
            for off in 0..1usize << (shift as usize * root.d()) {
                let mut o = off;
                for a in (0..root.d()).rev() {
                    idx[a] = (c.index[a] << shift) + (o & ((1 << shift) - 1)) as u32;
                    o >>= shift;
                }
                vals[root.leaf_row(&idx)] = v;
            }
        }
    }
    GridFunction::new(root.clone(), vals)
}

/// `(row + 1/2)/N` in row-major order.
pub fn ramp(root: &RootCube) -> Result<GridFunction> {
    let total = root.leaf_count() as f64;
    GridFunction::from_fn(root.clone(), |row| (row as f64 + 0.5) / total)
}

pub fn corpus_generate(seed: u64, kind: CorpusKind, root: &RootCube) -> Result<CorpusItem> {
    Ok(match kind {
        CorpusKind::LogSingularity => CorpusItem::Grid(log_singularity(seed, root)?),
        CorpusKind::CantorIndicator => CorpusItem::Set(cantor_set(root)?),
        CorpusKind::RandomStep => CorpusItem::Grid(random_step(seed, root)?),
        CorpusKind::Ramp => CorpusItem::Grid(ramp(root)?),
    })
}

/// Named functions: three log singularities, the Cantor indicator, two random steps and the ramp.
pub fn function_corpus(seed: u64, root: &RootCube) -> Result<Vec<(String, GridFunction)>> {
    let mut out = Vec::new();
    for s in [seed, seed.wrapping_add(1)] {
        out.push((format!("log-singularity/{s}"), log_singularity(s, root)?));
    }
    out.push(("log-singularity/corner".to_string(), log_corner(root)?));
    out.push(("cantor-indicator".to_string(), cantor_set(root)?.indicator()));
    for s in [seed, seed.wrapping_add(1)] {
        out.push((format!("random-step/{s}"), random_step(s, root)?));
    }
    out.push(("ramp".to_string(), ramp(root)?));
    Ok(out)
}

/// A random one-dimensional aligned IFS with `w_i ≤ r_i^{1/2}`, so the measure lies in `M^{1/2}`.
pub fn random_ifs(seed: u64) -> Result<IFSSpec> {
    let mut r = rng(seed);
    loop {
        let k = r.random_range(2..=3usize);
        let mut maps: Vec<IFSMap> = Vec::new();
        let mut tries = 0;
        while maps.len() < k && tries < 100 {
            tries += 1;
            let level = r.random_range(1..=3u32);
            let offset = vec![r.random_range(0..1u32 << level)];
            let cand = IFSMap { level, offset, weight: 0.0 };
            if maps.iter().all(|m| !m.image().overlaps(&cand.image())) {
                maps.push(cand);
            }
        }
        if maps.len() < 2 {
            continue;
        }
        let raw: Vec<f64> = maps.iter().map(|m| m.ratio().sqrt() * r.random_range(0.5..1.0)).collect();
        let total: f64 = raw.iter().sum();
        if total < 1.0 {
            continue;
        }
        for (m, w) in maps.iter_mut().zip(&raw) {
            m.weight = w / total;
        }
        let last = maps.len() - 1;
        maps[last].weight = 1.0 - maps[..last].iter().map(|m| m.weight).sum::<f64>();
        if maps.iter().all(|m| m.weight <= m.ratio().sqrt()) {
            return IFSSpec::new(1, maps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::format_grid;

    #[test]
    fn deterministic() {
        let root = RootCube::unit(1, 10).unwrap();
        let a = format_grid(&log_singularity(7, &root).unwrap());
        assert_eq!(a, format_grid(&log_singularity(7, &root).unwrap()));
        assert_ne!(a, format_grid(&log_singularity(8, &root).unwrap()));
        assert_eq!(random_step(3, &root).unwrap(), random_step(3, &root).unwrap());
        assert_eq!(random_ifs(5).unwrap(), random_ifs(5).unwrap());
    }

    #[test]
    fn cantor_counts() {
        assert_eq!(cantor_set(&RootCube::unit(1, 8).unwrap()).unwrap().count(), 16);
        assert_eq!(cantor_set(&RootCube::unit(2, 6).unwrap()).unwrap().count(), 64);
    }

    #[test]
    fn ramp_increases() {
        let f = ramp(&RootCube::unit(2, 3).unwrap()).unwrap();
        assert!(f.values().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn log_singularity_is_finite() {
        let f = log_singularity(1, &RootCube::unit(2, 5).unwrap()).unwrap();
        assert!(f.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn random_ifs_weights() {
        for s in 0..50 {
            let spec = random_ifs(s).unwrap();
            assert!(spec.maps.iter().all(|m| m.weight > 0.0 && m.weight <= m.ratio().sqrt() + 1e-15));
        }
    }

    #[test]
    fn unknown_kind() {
        assert!("fractal".parse::<CorpusKind>().is_err());
        assert_eq!("ramp".parse::<CorpusKind>().unwrap(), CorpusKind::Ramp);
    }
}
