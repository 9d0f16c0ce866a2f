//! Dyadic cube addressing and the grid-backed data types.
//!
//! A [`RootCube`] fixes the half-open cube `Q0 = origin + [0, side)^d` together with a
//! maximal resolution `n`. Leaves are the `2^{dn}` cubes of side `side * 2^{-n}`. Grid payloads
//! ([`GridFunction`], [`DyadicSet`], [`DiscreteMeasure`]) are stored row-major with the last
//! axis fastest, which is also the on-disk order.
//!
//! Internally the numerical kernels work in Morton (Z-) order: there the leaves of any dyadic
//! subcube form one contiguous run, and the children of node `k` are `k * 2^d + o`.

use serde::Serialize;

use crate::error::{CapError, Result};

/// Default bound on `n * d`, keeping every grid comfortably in memory.
pub const DEFAULT_MAX_BITS: u32 = 30;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootCube {
    d: usize,
    origin: Vec<f64>,
    side: f64,
    n: u32,
}

impl RootCube {
    pub fn new(d: usize, origin: Vec<f64>, side: f64, n: u32) -> Result<Self> {
        Self::with_limit(d, origin, side, n, DEFAULT_MAX_BITS)
    }

    pub fn with_limit(d: usize, origin: Vec<f64>, side: f64, n: u32, max_bits: u32) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(CapError::Dimension(d));
        }
        if origin.len() != d {
            return Err(CapError::Root(format!("origin has {} coordinates, expected {d}", origin.len())));
        }
        if origin.iter().any(|x| !x.is_finite()) {
            return Err(CapError::Root("origin must be finite".into()));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(CapError::Root(format!("side must be positive and finite, got {side}")));
        }
        let bits = n.saturating_mul(d as u32);
        if bits > max_bits {
            return Err(CapError::Resolution { bits, limit: max_bits });
        }
        Ok(Self { d, origin, side, n })
    }

    /// The unit cube `[0,1)^d` at resolution `n`.
    pub fn unit(d: usize, n: u32) -> Result<Self> {
        Self::new(d, vec![0.0; d], 1.0, n)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Same cube, different resolution.
    pub fn with_resolution(&self, n: u32) -> Result<Self> {
        Self::new(self.d, self.origin.clone(), self.side, n)
    }

    pub fn per_axis(&self) -> usize {
        1usize << self.n
    }

    pub fn leaf_count(&self) -> usize {
        1usize << (self.d as u32 * self.n)
    }

    /// Side length of the cubes at `level`; exact power-of-two scaling of `side`.
    pub fn side_at(&self, level: u32) -> f64 {
        self.side * 0.5f64.powi(level as i32)
    }

    pub fn leaf_side(&self) -> f64 {
        self.side_at(self.n)
    }

    pub fn root_cube(&self) -> DyadicCube {
        DyadicCube::root(self.d)
    }

    pub fn contains(&self, c: &DyadicCube) -> bool {
        c.d() == self.d && c.level <= self.n && c.index.iter().all(|&i| (i as u64) < (1u64 << c.level))
    }

    pub(crate) fn check(&self, c: &DyadicCube) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(CapError::CubeOutOfRange(c.to_string()))
        }
    }

    /// The `2^d` children of `c` in lexicographic order of their offsets.
    pub fn children(&self, c: &DyadicCube) -> Result<Vec<DyadicCube>> {
        self.check(c)?;
        if c.level == self.n {
            return Err(CapError::LeafHasNoChildren);
        }
        Ok(c.children())
    }

    /// Multi-index of the leaf at row-major position `row`.
    pub fn leaf_multi_index(&self, row: usize) -> Vec<u32> {
        let mask = self.per_axis() - 1;
        (0..self.d)
            .map(|a| ((row >> (self.n as usize * (self.d - 1 - a))) & mask) as u32)
            .collect()
    }

    pub fn leaf_row(&self, index: &[u32]) -> usize {
        index
            .iter()
            .enumerate()
            .map(|(a, &i)| (i as usize) << (self.n as usize * (self.d - 1 - a)))
            .sum()
    }

    pub fn leaf_cube(&self, row: usize) -> DyadicCube {
        DyadicCube { level: self.n, index: self.leaf_multi_index(row) }
    }

    pub fn leaf_center(&self, row: usize) -> Vec<f64> {
        let s = self.leaf_side();
        self.leaf_multi_index(row)
            .iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + (i as f64 + 0.5) * s)
            .collect()
    }

    /// Geometry of `c` viewed as a root cube of its own, at the resolution left below it.
    pub fn subroot(&self, c: &DyadicCube) -> Result<RootCube> {
        self.check(c)?;
        let s = self.side_at(c.level);
        let origin = self.origin.iter().zip(&c.index).map(|(&o, &i)| o + i as f64 * s).collect();
        Ok(RootCube { d: self.d, origin, side: s, n: self.n - c.level })
    }

    pub(crate) fn same_grid(&self, other: &RootCube) -> bool {
        self.d == other.d && self.n == other.n && self.side == other.side && self.origin == other.origin
    }

    pub(crate) fn layout(&self) -> MortonLayout {
        MortonLayout::new(self.d, self.n)
    }
}

/// Address of a dyadic cube: its level and one index per axis in `[0, 2^level)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: Vec<u32>,
}

impl DyadicCube {
    pub fn new(level: u32, index: Vec<u32>) -> Self {
        Self { level, index }
    }

    pub fn root(d: usize) -> Self {
        Self { level: 0, index: vec![0; d] }
    }

    pub fn d(&self) -> usize {
        self.index.len()
    }

    /// Children in lexicographic offset order; no resolution check.
    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.d();
        (0..1usize << d)
            .map(|o| DyadicCube {
                level: self.level + 1,
                index: (0..d).map(|a| 2 * self.index[a] + ((o >> (d - 1 - a)) & 1) as u32).collect(),
            })
            .collect()
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube { level: self.level - 1, index: self.index.iter().map(|i| i >> 1).collect() })
    }

    /// Ancestor at `level` (itself when `level == self.level`).
    pub fn ancestor(&self, level: u32) -> DyadicCube {
        assert!(level <= self.level);
        let shift = self.level - level;
        DyadicCube { level, index: self.index.iter().map(|i| i >> shift).collect() }
    }

    /// `self ⊆ other` as half-open cubes.
    pub fn is_within(&self, other: &DyadicCube) -> bool {
        other.level <= self.level && self.ancestor(other.level) == *other
    }

    pub fn overlaps(&self, other: &DyadicCube) -> bool {
        self.is_within(other) || other.is_within(self)
    }

    /// The cube addressed by `inner` inside the subtree rooted at `self`.
    pub fn compose(&self, inner: &DyadicCube) -> DyadicCube {
        DyadicCube {
            level: self.level + inner.level,
            index: self.index.iter().zip(&inner.index).map(|(&o, &i)| (o << inner.level) + i).collect(),
        }
    }

    pub fn morton_key(&self) -> usize {
        morton_encode(&self.index, self.level)
    }

    pub fn from_morton(d: usize, level: u32, key: usize) -> Self {
        Self { level, index: morton_decode(d, level, key) }
    }

    /// Contiguous Morton range of the leaves of this cube at resolution `n`.
    pub fn leaf_range(&self, n: u32) -> std::ops::Range<usize> {
        let shift = self.d() * (n - self.level) as usize;
        let k = self.morton_key();
        (k << shift)..((k + 1) << shift)
    }
}

impl std::fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:", self.level)?;
        for (a, i) in self.index.iter().enumerate() {
            if a > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for DyadicCube {
    type Err = CapError;

    /// Parses `level:i0,i1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CapError::Param(format!("cube must look like `level:i0,i1,...`, got `{s}`"));
        let (level, idx) = s.split_once(':').ok_or_else(bad)?;
        let level = level.trim().parse().map_err(|_| bad())?;
        let index = idx.split(',').map(|t| t.trim().parse::<u32>()).collect::<std::result::Result<Vec<_>, _>>().map_err(|_| bad())?;
        Ok(DyadicCube { level, index })
    }
}

pub(crate) fn morton_encode(index: &[u32], level: u32) -> usize {
    let mut key = 0usize;
    for b in (0..level).rev() {
        for &i in index {
            key = (key << 1) | ((i >> b) & 1) as usize;
        }
    }
    key
}

pub(crate) fn morton_decode(d: usize, level: u32, key: usize) -> Vec<u32> {
    let mut index = vec![0u32; d];
    for b in 0..level as usize {
        for (a, slot) in index.iter_mut().enumerate() {
            let bit = (key >> (b * d + (d - 1 - a))) & 1;
            *slot |= (bit as u32) << b;
        }
    }
    index
}

/// Row-major ↔ Morton permutation for one `(d, n)`.
#[derive(Clone, Debug)]
pub(crate) struct MortonLayout {
    row_to_morton: Vec<usize>,
}

impl MortonLayout {
    pub fn new(d: usize, n: u32) -> Self {
        let count = 1usize << (d as u32 * n);
        let mask = (1usize << n) - 1;
        let row_to_morton = (0..count)
            .map(|row| {
                let idx: Vec<u32> = (0..d).map(|a| ((row >> (n as usize * (d - 1 - a))) & mask) as u32).collect();
                morton_encode(&idx, n)
            })
            .collect();
        Self { row_to_morton }
    }

    pub fn to_morton<T: Copy + Default>(&self, row_major: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); row_major.len()];
        for (row, &m) in self.row_to_morton.iter().enumerate() {
            out[m] = row_major[row];
        }
        out
    }

    pub fn to_row_major<T: Copy + Default>(&self, morton: &[T]) -> Vec<T> {
        self.row_to_morton.iter().map(|&m| morton[m]).collect()
    }

    pub fn morton_of_row(&self, row: usize) -> usize {
        self.row_to_morton[row]
    }
}

fn check_payload_len(root: &RootCube, len: usize) -> Result<()> {
    let expected = root.leaf_count();
    if len != expected {
        return Err(CapError::Length { expected, found: len });
    }
    Ok(())
}

/// Real values, one per leaf, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    root: RootCube,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(root: RootCube, values: Vec<f64>) -> Result<Self> {
        check_payload_len(&root, values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CapError::NonFinite(i));
        }
        Ok(Self { root, values })
    }

    pub fn constant(root: RootCube, c: f64) -> Result<Self> {
        let v = vec![c; root.leaf_count()];
        Self::new(root, v)
    }

    /// Builds a grid by evaluating `f` at every leaf (given its row index).
    pub fn from_fn(root: RootCube, f: impl FnMut(usize) -> f64) -> Result<Self> {
        let v = (0..root.leaf_count()).map(f).collect();
        Self::new(root, v)
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.root.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self { root: self.root.clone(), values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Values in Morton order.
    pub(crate) fn morton_values(&self) -> Vec<f64> {
        self.root.layout().to_morton(&self.values)
    }

    /// The sub-grid on `c`, at resolution `n - c.level`.
    pub fn restrict(&self, c: &DyadicCube) -> Result<GridFunction> {
        let sub = self.root.subroot(c)?;
        let s = sub.per_axis() as u32;
        let values = (0..sub.leaf_count())
            .map(|row| {
                let local = sub.leaf_multi_index(row);
                let global: Vec<u32> = local.iter().zip(&c.index).map(|(&l, &o)| o * s + l).collect();
                self.values[self.root.leaf_row(&global)]
            })
            .collect();
        Ok(GridFunction { root: sub, values })
    }
}

/// A union of leaf cells.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSet {
    root: RootCube,
    mask: Vec<bool>,
}

impl DyadicSet {
    pub fn new(root: RootCube, mask: Vec<bool>) -> Result<Self> {
        check_payload_len(&root, mask.len())?;
        Ok(Self { root, mask })
    }

    pub fn empty(root: RootCube) -> Self {
        let mask = vec![false; root.leaf_count()];
        Self { root, mask }
    }

    pub fn full(root: RootCube) -> Self {
        let mask = vec![true; root.leaf_count()];
        Self { root, mask }
    }

    /// The leaves with the given row-major indices.
    pub fn from_leaves(root: RootCube, leaves: &[usize]) -> Result<Self> {
        let mut mask = vec![false; root.leaf_count()];
        for &l in leaves {
            if l >= mask.len() {
                return Err(CapError::Param(format!("leaf {l} out of range")));
            }
            mask[l] = true;
        }
        Ok(Self { root, mask })
    }

    /// All leaves inside the dyadic cube `c`.
    pub fn from_cube(root: RootCube, c: &DyadicCube) -> Result<Self> {
        root.check(c)?;
        let layout = root.layout();
        let range = c.leaf_range(root.n);
        let mask = (0..root.leaf_count()).map(|row| range.contains(&layout.morton_of_row(row))).collect();
        Ok(Self { root, mask })
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains_leaf(&self, row: usize) -> bool {
        self.mask[row]
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    fn zip_with(&self, other: &DyadicSet, op: impl Fn(bool, bool) -> bool) -> Result<DyadicSet> {
        if !self.root.same_grid(&other.root) {
            return Err(CapError::RootMismatch);
        }
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| op(a, b)).collect();
        Ok(DyadicSet { root: self.root.clone(), mask })
    }

    pub fn union(&self, other: &DyadicSet) -> Result<DyadicSet> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &DyadicSet) -> Result<DyadicSet> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &DyadicSet) -> Result<DyadicSet> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> DyadicSet {
        DyadicSet { root: self.root.clone(), mask: self.mask.iter().map(|b| !b).collect() }
    }

    pub fn is_subset(&self, other: &DyadicSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn indicator(&self) -> GridFunction {
        let values = self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        GridFunction { root: self.root.clone(), values }
    }

    /// `{x : f(x) > t}`.
    pub fn superlevel(f: &GridFunction, t: f64) -> DyadicSet {
        DyadicSet { root: f.root.clone(), mask: f.values.iter().map(|&v| v > t).collect() }
    }
}

/// Nonnegative mass per leaf cell.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    root: RootCube,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(root: RootCube, masses: Vec<f64>) -> Result<Self> {
        check_payload_len(&root, masses.len())?;
        for (i, &m) in masses.iter().enumerate() {
            if !m.is_finite() {
                return Err(CapError::NonFinite(i));
            }
            if m < 0.0 {
                return Err(CapError::Negative { index: i, value: m });
            }
        }
        Ok(Self { root, masses })
    }

    /// Uniform measure of the given total mass.
    pub fn uniform(root: RootCube, total: f64) -> Result<Self> {
        let k = root.leaf_count();
        Self::new(root, vec![total / k as f64; k])
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::new(self.root.clone(), self.masses.iter().map(|m| a * m).collect())
    }

    pub fn add(&self, other: &DiscreteMeasure) -> Result<Self> {
        if !self.root.same_grid(&other.root) {
            return Err(CapError::RootMismatch);
        }
        Self::new(self.root.clone(), self.masses.iter().zip(&other.masses).map(|(a, b)| a + b).collect())
    }

    /// Mass of a dyadic cube.
    pub fn mass_of(&self, c: &DyadicCube) -> Result<f64> {
        self.root.check(c)?;
        let layout = self.root.layout();
        let range = c.leaf_range(self.root.n);
        Ok((0..self.masses.len()).filter(|&r| range.contains(&layout.morton_of_row(r))).map(|r| self.masses[r]).sum())
    }

    pub(crate) fn morton_masses(&self) -> Vec<f64> {
        self.root.layout().to_morton(&self.masses)
    }
}
