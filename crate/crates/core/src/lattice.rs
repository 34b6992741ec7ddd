//! Lee-metric geometry on `Z^n` and on products of cycles.
//!
//! Every set-valued result is a [`Shape`], whose vertices are kept sorted
//! lexicographically so that output is reproducible byte for byte.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Deref;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{PddsError, Result};

/// A lattice point. Up to eight coordinates are stored inline.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(SmallVec<[i64; 8]>);

impl Point {
    pub fn new(coords: &[i64]) -> Self {
        Point(SmallVec::from_slice(coords))
    }

    /// The origin `O` of `Z^n`.
    pub fn origin(n: usize) -> Self {
        Point(SmallVec::from_elem(0, n))
    }

    /// Unit vector `e_axis` (axes are zero based).
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut p = Self::origin(n);
        p.0[axis] = 1;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn add(&self, other: &Point) -> Result<Point> {
        same_dim(self, other)?;
        Ok(self
            .0
            .iter()
            .zip(other.iter())
            .map(|(a, b)| a + b)
            .collect())
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        same_dim(self, other)?;
        Ok(self
            .0
            .iter()
            .zip(other.iter())
            .map(|(a, b)| a - b)
            .collect())
    }

    pub fn scale(&self, k: i64) -> Point {
        self.0.iter().map(|a| a * k).collect()
    }
}

impl Deref for Point {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl FromIterator<i64> for Point {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        Point(iter.into_iter().collect())
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point(SmallVec::from_vec(v))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Point::from(Vec::<i64>::deserialize(d)?))
    }
}

fn same_dim(a: &[i64], b: &[i64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(PddsError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Per-axis cycle lengths of a torus. Absence (an `Option::None` wherever a
/// torus is accepted) means the infinite grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusDims {
    dims: Vec<i64>,
}

impl TorusDims {
    pub fn new(dims: Vec<i64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(PddsError::ZeroDimension);
        }
        if let Some(&bad) = dims.iter().find(|&&d| d < 1) {
            return Err(PddsError::InvalidTorusDim(bad));
        }
        Ok(TorusDims { dims })
    }

    pub fn dims(&self) -> &[i64] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Number of vertices, exact even when it does not fit a machine word.
    pub fn volume(&self) -> u128 {
        self.dims
            .iter()
            .fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }

    pub fn reduce(&self, p: &Point) -> Result<Point> {
        same_dim(&self.dims, p)?;
        Ok(p.iter()
            .zip(&self.dims)
            .map(|(c, d)| c.rem_euclid(*d))
            .collect())
    }
}

impl Serialize for TorusDims {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.dims.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusDims {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        TorusDims::new(Vec::<i64>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Mixed-radix numbering of torus vertices. The last axis varies fastest, so
/// index order coincides with lexicographic order of reduced coordinates.
#[derive(Clone, Debug)]
pub struct TorusIndex {
    dims: Vec<i64>,
    strides: Vec<u64>,
    volume: u64,
}

impl TorusIndex {
    /// Fails when the volume does not fit in `limit`.
    pub fn new(torus: &TorusDims, limit: u64) -> Result<Self> {
        let volume = torus.volume();
        if volume > limit as u128 {
            return Err(PddsError::TorusTooLarge { volume, limit });
        }
        let n = torus.dim();
        let mut strides = vec![1u64; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * torus.dims[i + 1] as u64;
        }
        Ok(TorusIndex {
            dims: torus.dims.clone(),
            strides,
            volume: volume as u64,
        })
    }

    pub fn volume(&self) -> u64 {
        self.volume
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[i64] {
        &self.dims
    }

    pub fn strides(&self) -> &[u64] {
        &self.strides
    }

    /// Index of `p` after reduction modulo the torus.
    pub fn index(&self, p: &[i64]) -> u64 {
        debug_assert_eq!(p.len(), self.dims.len());
        p.iter()
            .zip(&self.dims)
            .zip(&self.strides)
            .map(|((c, d), s)| c.rem_euclid(*d) as u64 * s)
            .sum()
    }

    pub fn coord(&self, idx: u64, axis: usize) -> i64 {
        ((idx / self.strides[axis]) % self.dims[axis] as u64) as i64
    }

    pub fn point(&self, idx: u64) -> Point {
        (0..self.dims.len()).map(|a| self.coord(idx, a)).collect()
    }

    /// Index of the vertex one step along `axis`, forwards or backwards.
    pub fn step(&self, idx: u64, axis: usize, forward: bool) -> u64 {
        let d = self.dims[axis] as u64;
        let s = self.strides[axis];
        let c = (idx / s) % d;
        if forward {
            if c + 1 == d {
                idx - c * s
            } else {
                idx + s
            }
        } else if c == 0 {
            idx + (d - 1) * s
        } else {
            idx - s
        }
    }

    /// Distinct neighbours of `idx` (axes of length 1 contribute nothing,
    /// axes of length 2 contribute one vertex).
    pub fn neighbors(&self, idx: u64, out: &mut Vec<u64>) {
        out.clear();
        for axis in 0..self.dims.len() {
            match self.dims[axis] {
                1 => {}
                2 => out.push(self.step(idx, axis, true)),
                _ => {
                    out.push(self.step(idx, axis, true));
                    out.push(self.step(idx, axis, false));
                }
            }
        }
    }

    /// Lee distance between two vertex indices.
    pub fn distance(&self, a: u64, b: u64) -> u64 {
        (0..self.dims.len())
            .map(|axis| {
                let d = self.dims[axis] as u64;
                let x = self.coord(a, axis) as u64;
                let y = self.coord(b, axis) as u64;
                let r = x.abs_diff(y);
                r.min(d - r)
            })
            .sum()
    }
}

/// Extents of an axis-aligned box `P_{k1} x ... x P_{kn}` anchored at `O`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxSpec {
    pub extents: Vec<i64>,
}

impl BoxSpec {
    pub fn new(extents: Vec<i64>) -> Result<Self> {
        if extents.is_empty() {
            return Err(PddsError::ZeroDimension);
        }
        if let Some(&bad) = extents.iter().find(|&&e| e < 1) {
            return Err(PddsError::InvalidExtent(bad));
        }
        Ok(BoxSpec { extents })
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn volume(&self) -> u64 {
        self.extents.iter().map(|&e| e as u64).product()
    }

    /// Extent vectors reachable by permuting axes, deduplicated and sorted.
    pub fn axis_permutations(&self) -> Vec<BoxSpec> {
        let mut perm = self.extents.clone();
        perm.sort_unstable();
        let mut out = vec![BoxSpec {
            extents: perm.clone(),
        }];
        while next_permutation(&mut perm) {
            out.push(BoxSpec {
                extents: perm.clone(),
            });
        }
        out
    }

    /// True when `other` is this box with its axes permuted.
    pub fn same_up_to_permutation(&self, other: &BoxSpec) -> bool {
        let mut a = self.extents.clone();
        let mut b = other.extents.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

fn next_permutation(v: &mut [i64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A finite vertex set of the grid (or of a torus), sorted and deduplicated.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    dim: usize,
    vertices: Vec<Point>,
}

impl Shape {
    pub fn new<I: IntoIterator<Item = Point>>(dim: usize, vertices: I) -> Result<Self> {
        if dim == 0 {
            return Err(PddsError::ZeroDimension);
        }
        let mut vertices: Vec<Point> = vertices.into_iter().collect();
        if let Some(p) = vertices.iter().find(|p| p.dim() != dim) {
            return Err(PddsError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        vertices.sort_unstable();
        vertices.dedup();
        Ok(Shape { dim, vertices })
    }

    pub fn empty(dim: usize) -> Self {
        Shape {
            dim,
            vertices: Vec::new(),
        }
    }

    pub(crate) fn from_sorted_unchecked(dim: usize, vertices: Vec<Point>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Shape { dim, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.vertices.iter()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.position(p).is_some()
    }

    /// Position of `p` in canonical order.
    pub fn position(&self, p: &Point) -> Option<usize> {
        self.vertices.binary_search(p).ok()
    }

    pub fn min(&self) -> Option<&Point> {
        self.vertices.first()
    }

    pub fn is_subset(&self, other: &Shape) -> bool {
        self.vertices.iter().all(|v| other.contains(v))
    }

    pub fn union(&self, other: &Shape) -> Result<Shape> {
        if self.dim != other.dim {
            return Err(PddsError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Shape::new(
            self.dim,
            self.vertices.iter().chain(&other.vertices).cloned(),
        )
    }

    /// Distance from `p` to the nearest vertex of the shape (`None` if empty).
    pub fn distance_to(&self, p: &Point, torus: Option<&TorusDims>) -> Result<Option<u64>> {
        let mut best = None;
        for v in &self.vertices {
            let d = lee_distance(p, v, torus)?;
            best = Some(best.map_or(d, |b: u64| b.min(d)));
        }
        Ok(best)
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.vertices.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a Shape {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.vertices.iter()
    }
}

#[derive(Serialize, Deserialize)]
struct ShapeJson {
    dim: usize,
    vertices: Vec<Point>,
}

impl Serialize for Shape {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ShapeJson {
            dim: self.dim,
            vertices: self.vertices.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Shape {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ShapeJson::deserialize(d)?;
        Shape::new(raw.dim, raw.vertices).map_err(serde::de::Error::custom)
    }
}

fn check_torus(torus: Option<&TorusDims>, n: usize) -> Result<()> {
    match torus {
        Some(t) if t.dim() != n => Err(PddsError::DimensionMismatch {
            expected: n,
            found: t.dim(),
        }),
        _ => Ok(()),
    }
}

/// Lee (l1) distance; on a torus each axis contributes its circular distance.
pub fn lee_distance(u: &Point, v: &Point, torus: Option<&TorusDims>) -> Result<u64> {
    same_dim(u, v)?;
    check_torus(torus, u.dim())?;
    let mut total = 0u64;
    for axis in 0..u.dim() {
        let diff = u[axis] - v[axis];
        let delta = match torus {
            None => diff.unsigned_abs(),
            Some(t) => {
                let m = t.dims()[axis];
                let r = diff.rem_euclid(m);
                r.min(m - r) as u64
            }
        };
        total += delta;
    }
    Ok(total)
}

/// The box `{0..e1-1} x ... x {0..en-1}`.
pub fn box_shape(spec: &BoxSpec) -> Result<Shape> {
    let spec = BoxSpec::new(spec.extents.clone())?;
    let n = spec.dim();
    let mut out = Vec::with_capacity(spec.volume() as usize);
    let mut cur = vec![0i64; n];
    loop {
        out.push(Point::new(&cur));
        let mut axis = n;
        loop {
            if axis == 0 {
                return Ok(Shape::from_sorted_unchecked(n, out));
            }
            axis -= 1;
            cur[axis] += 1;
            if cur[axis] < spec.extents[axis] {
                break;
            }
            cur[axis] = 0;
        }
    }
}

/// Grid neighbours of `p`, reduced and deduplicated on a torus.
fn grid_neighbors(p: &Point, torus: Option<&TorusDims>) -> SmallVec<[Point; 16]> {
    let mut out: SmallVec<[Point; 16]> = SmallVec::new();
    for axis in 0..p.dim() {
        for step in [1i64, -1] {
            let mut q = p.clone();
            q.coords_mut()[axis] += step;
            if let Some(t) = torus {
                let m = t.dims()[axis];
                q.coords_mut()[axis] = q[axis].rem_euclid(m);
            }
            if &q != p && !out.contains(&q) {
                out.push(q);
            }
        }
    }
    out
}

/// `H* = {v : d(v, H) <= t}`, grown from `H` by multi-source breadth-first search.
pub fn t_neighborhood(h: &Shape, t: u32, torus: Option<&TorusDims>) -> Result<Shape> {
    check_torus(torus, h.dim())?;
    let mut dist: FxHashMap<Point, u32> = FxHashMap::default();
    let mut queue = VecDeque::new();
    for v in h {
        let v = match torus {
            Some(tt) => tt.reduce(v)?,
            None => v.clone(),
        };
        if dist.insert(v.clone(), 0).is_none() {
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du == t {
            continue;
        }
        for w in grid_neighbors(&u, torus) {
            if !dist.contains_key(&w) {
                dist.insert(w.clone(), du + 1);
                queue.push_back(w);
            }
        }
    }
    Shape::new(h.dim(), dist.into_keys())
}

/// Connected components of the subgraph induced by `s`, ordered by their
/// least vertex.
pub fn components_of(s: &Shape, torus: Option<&TorusDims>) -> Result<Vec<Shape>> {
    check_torus(torus, s.dim())?;
    let members: Vec<Point> = match torus {
        Some(t) => s.iter().map(|v| t.reduce(v)).collect::<Result<_>>()?,
        None => s.vertices().to_vec(),
    };
    let member_set: FxHashSet<Point> = members.iter().cloned().collect();
    let mut sorted: Vec<Point> = member_set.iter().cloned().collect();
    sorted.sort_unstable();
    let mut seen: FxHashSet<Point> = FxHashSet::default();
    let mut out = Vec::new();
    for start in &sorted {
        if seen.contains(start) {
            continue;
        }
        seen.insert(start.clone());
        let mut comp = vec![start.clone()];
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(u) = queue.pop_front() {
            for w in grid_neighbors(&u, torus) {
                if member_set.contains(&w) && seen.insert(w.clone()) {
                    comp.push(w.clone());
                    queue.push_back(w);
                }
            }
        }
        out.push(Shape::new(s.dim(), comp)?);
    }
    Ok(out)
}

/// Extents of `s` when it is a translate of an axis-aligned box.
pub fn is_box(s: &Shape) -> Option<BoxSpec> {
    let first = s.min()?;
    let n = s.dim();
    let mut lo: Vec<i64> = first.to_vec();
    let mut hi: Vec<i64> = first.to_vec();
    for v in s {
        for axis in 0..n {
            lo[axis] = lo[axis].min(v[axis]);
            hi[axis] = hi[axis].max(v[axis]);
        }
    }
    let extents: Vec<i64> = lo.iter().zip(&hi).map(|(l, h)| h - l + 1).collect();
    let volume = extents
        .iter()
        .try_fold(1u64, |acc, &e| acc.checked_mul(e as u64))?;
    (volume == s.len() as u64).then_some(BoxSpec { extents })
}

/// `S + z`, reduced onto the torus when one is given.
pub fn translate(s: &Shape, z: &Point, torus: Option<&TorusDims>) -> Result<Shape> {
    if z.dim() != s.dim() {
        return Err(PddsError::DimensionMismatch {
            expected: s.dim(),
            found: z.dim(),
        });
    }
    check_torus(torus, s.dim())?;
    let moved = s.iter().map(|v| {
        let p = v.add(z)?;
        match torus {
            Some(t) => t.reduce(&p),
            None => Ok(p),
        }
    });
    Shape::new(s.dim(), moved.collect::<Result<Vec<_>>>()?)
}

/// Offsets of the Lee ball of radius `t` in `Z^n`, in lexicographic order.
pub fn lee_ball_offsets(n: usize, t: u32) -> Vec<Point> {
    fn rec(n: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Point>) {
        if cur.len() == n {
            out.push(Point::new(cur));
            return;
        }
        for c in -budget..=budget {
            cur.push(c);
            rec(n, budget - c.abs(), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, t as i64, &mut Vec::with_capacity(n), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Point {
        Point::new(c)
    }

    fn shape(pts: &[&[i64]]) -> Shape {
        Shape::new(pts[0].len(), pts.iter().map(|c| p(c))).unwrap()
    }

    #[test]
    fn lee_distance_examples() {
        assert_eq!(lee_distance(&p(&[0, 0]), &p(&[0, 0]), None).unwrap(), 0);
        assert_eq!(lee_distance(&p(&[0, 0]), &p(&[1, 2]), None).unwrap(), 3);
        let t = TorusDims::new(vec![5, 5]).unwrap();
        assert_eq!(lee_distance(&p(&[0, 0]), &p(&[4, 0]), Some(&t)).unwrap(), 1);
    }

    #[test]
    fn lee_distance_rejects_mixed_dimensions() {
        let err = lee_distance(&p(&[0, 0]), &p(&[0, 0, 0]), None).unwrap_err();
        assert!(matches!(err, PddsError::DimensionMismatch { .. }));
    }

    #[test]
    fn degenerate_torus_axes() {
        let t = TorusDims::new(vec![1, 2]).unwrap();
        assert_eq!(lee_distance(&p(&[0, 0]), &p(&[3, 1]), Some(&t)).unwrap(), 1);
        assert_eq!(lee_distance(&p(&[0, 0]), &p(&[3, 2]), Some(&t)).unwrap(), 0);
    }

    #[test]
    fn box_shape_examples() {
        let path = box_shape(&BoxSpec::new(vec![3, 1]).unwrap()).unwrap();
        assert_eq!(path, shape(&[&[0, 0], &[1, 0], &[2, 0]]));
        let q3 = box_shape(&BoxSpec::new(vec![2, 2, 2]).unwrap()).unwrap();
        assert_eq!(q3.len(), 8);
        let dot = box_shape(&BoxSpec::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(dot, shape(&[&[0, 0]]));
        assert!(BoxSpec::new(vec![2, 0]).is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let dot = shape(&[&[0, 0]]);
        assert_eq!(t_neighborhood(&dot, 1, None).unwrap().len(), 5);
        let p3 = shape(&[&[0, 0], &[1, 0], &[2, 0]]);
        assert_eq!(t_neighborhood(&p3, 2, None).unwrap().len(), 23);
        let q3 = box_shape(&BoxSpec::new(vec![2, 2, 2]).unwrap()).unwrap();
        assert_eq!(t_neighborhood(&q3, 1, None).unwrap().len(), 32);
        assert_eq!(t_neighborhood(&q3, 0, None).unwrap(), q3);
    }

    #[test]
    fn neighborhood_on_small_torus_is_a_set_union() {
        let t = TorusDims::new(vec![3, 3]).unwrap();
        let dot = shape(&[&[0, 0]]);
        // radius 2 covers everything reachable, no multiplicity
        assert_eq!(t_neighborhood(&dot, 2, Some(&t)).unwrap().len(), 9);
    }

    #[test]
    fn components_examples() {
        let s = shape(&[&[0, 0], &[1, 0], &[5, 5]]);
        let comps = components_of(&s, None).unwrap();
        assert_eq!(comps, vec![shape(&[&[0, 0], &[1, 0]]), shape(&[&[5, 5]])]);
        let sq = box_shape(&BoxSpec::new(vec![2, 2]).unwrap()).unwrap();
        assert_eq!(components_of(&sq, None).unwrap().len(), 1);
        assert!(components_of(&Shape::empty(2), None).unwrap().is_empty());
    }

    #[test]
    fn components_wrap_on_torus() {
        let t = TorusDims::new(vec![5, 5]).unwrap();
        let s = shape(&[&[0, 0], &[4, 0], &[2, 2]]);
        let comps = components_of(&s, Some(&t)).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], shape(&[&[0, 0], &[4, 0]]));
    }

    #[test]
    fn is_box_examples() {
        assert_eq!(
            is_box(&shape(&[&[3, 3], &[4, 3], &[3, 4], &[4, 4]])),
            Some(BoxSpec {
                extents: vec![2, 2]
            })
        );
        assert_eq!(is_box(&shape(&[&[0, 0], &[1, 0], &[0, 1]])), None);
        assert_eq!(
            is_box(&shape(&[&[7, 0], &[8, 0], &[9, 0]])),
            Some(BoxSpec {
                extents: vec![3, 1]
            })
        );
        assert_eq!(is_box(&Shape::empty(2)), None);
    }

    #[test]
    fn translate_examples() {
        let dot = shape(&[&[0, 0]]);
        assert_eq!(
            translate(&dot, &p(&[2, 3]), None).unwrap(),
            shape(&[&[2, 3]])
        );
        let t = TorusDims::new(vec![5, 5]).unwrap();
        let b = box_shape(&BoxSpec::new(vec![2, 1]).unwrap()).unwrap();
        assert_eq!(
            translate(&b, &p(&[4, 0]), Some(&t)).unwrap(),
            shape(&[&[4, 0], &[0, 0]])
        );
        let s = shape(&[&[1, 2], &[-3, 0]]);
        assert_eq!(translate(&s, &Point::origin(2), None).unwrap(), s);
    }

    #[test]
    fn lee_ball_sizes() {
        // |ball| = sum_k 2^k C(n,k) C(t,k)
        assert_eq!(lee_ball_offsets(2, 1).len(), 5);
        assert_eq!(lee_ball_offsets(2, 2).len(), 13);
        assert_eq!(lee_ball_offsets(3, 2).len(), 25);
    }

    #[test]
    fn torus_index_round_trip_and_steps() {
        let t = TorusDims::new(vec![3, 4, 2]).unwrap();
        let ix = TorusIndex::new(&t, u64::MAX).unwrap();
        assert_eq!(ix.volume(), 24);
        for i in 0..24 {
            let pt = ix.point(i);
            assert_eq!(ix.index(&pt), i);
            for axis in 0..3 {
                let mut q = pt.clone();
                q.coords_mut()[axis] += 1;
                assert_eq!(ix.step(i, axis, true), ix.index(&q));
                q.coords_mut()[axis] -= 2;
                assert_eq!(ix.step(i, axis, false), ix.index(&q));
            }
        }
        // index order is lexicographic order
        let pts: Vec<Point> = (0..24).map(|i| ix.point(i)).collect();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn torus_index_respects_limit() {
        let t = TorusDims::new(vec![100, 100]).unwrap();
        assert!(matches!(
            TorusIndex::new(&t, 9_999),
            Err(PddsError::TorusTooLarge { .. })
        ));
    }

    #[test]
    fn axis_permutations_dedupe() {
        let b = BoxSpec::new(vec![2, 3]).unwrap();
        assert_eq!(b.axis_permutations().len(), 2);
        let sq = BoxSpec::new(vec![3, 3]).unwrap();
        assert_eq!(sq.axis_permutations().len(), 1);
        let c = BoxSpec::new(vec![2, 1, 1]).unwrap();
        assert_eq!(c.axis_permutations().len(), 3);
    }

    #[test]
    fn shape_json_shape() {
        let s = shape(&[&[1, 0], &[0, 0]]);
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"dim":2,"vertices":[[0,0],[1,0]]}"#);
        let back: Shape = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        let b = BoxSpec::new(vec![2, 3]).unwrap();
        assert_eq!(serde_json::to_string(&b).unwrap(), r#"{"extents":[2,3]}"#);
    }
}
