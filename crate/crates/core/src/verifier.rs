//! Restriction of a construction to a finite torus and an audit of the
//! result against the definition of a t-PDDS.
//!
//! Instances are stored compactly: every component is an anchor vertex plus
//! the id of a template (the component's vertices relative to the anchor),
//! which keeps tori with billions of vertices within reach.

use std::collections::VecDeque;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::abelian::{torus_periods, Homomorphism};
use crate::constructions::{Construction, Tile};
use crate::error::{PddsError, Result};
use crate::lattice::{is_box, t_neighborhood, BoxSpec, Point, Shape, TorusDims, TorusIndex};

/// Largest torus that instantiation and verification will allocate for.
pub const DEFAULT_VERTEX_LIMIT: u64 = 1 << 31;

/// A set of components on a torus, each a translate of a stored template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PddsInstance {
    torus: TorusDims,
    t: u32,
    h_spec: BoxSpec,
    /// Offsets relative to the anchor; the least offset is the origin.
    templates: Vec<Vec<Point>>,
    anchors: Vec<u64>,
    template_of: Vec<u32>,
}

impl PddsInstance {
    /// Builds an instance from explicit vertex sets (reduced onto the torus).
    pub fn from_components(
        torus: TorusDims,
        t: u32,
        h_spec: BoxSpec,
        components: Vec<Shape>,
    ) -> Result<Self> {
        if h_spec.dim() != torus.dim() {
            return Err(PddsError::DimensionMismatch {
                expected: torus.dim(),
                found: h_spec.dim(),
            });
        }
        let ix = TorusIndex::new(&torus, u64::MAX)?;
        let mut templates: Vec<Vec<Point>> = Vec::new();
        let mut known: FxHashMap<Vec<Point>, u32> = FxHashMap::default();
        let mut rows: Vec<(u64, u64, u32)> = Vec::with_capacity(components.len());
        for comp in components {
            if comp.is_empty() {
                return Err(PddsError::InvalidInput("empty component".into()));
            }
            if comp.dim() != torus.dim() {
                return Err(PddsError::DimensionMismatch {
                    expected: torus.dim(),
                    found: comp.dim(),
                });
            }
            let mut idx: Vec<u64> = comp.iter().map(|p| ix.index(p)).collect();
            idx.sort_unstable();
            idx.dedup();
            let (anchor, offsets) = unwrap_component(&ix, &idx);
            let next = templates.len() as u32;
            let id = *known.entry(offsets.clone()).or_insert_with(|| {
                templates.push(offsets);
                next
            });
            rows.push((idx[0], anchor, id));
        }
        rows.sort_unstable();
        Ok(PddsInstance {
            torus,
            t,
            h_spec,
            templates,
            anchors: rows.iter().map(|r| r.1).collect(),
            template_of: rows.iter().map(|r| r.2).collect(),
        })
    }

    pub fn torus(&self) -> &TorusDims {
        &self.torus
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn h_spec(&self) -> &BoxSpec {
        &self.h_spec
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn templates(&self) -> &[Vec<Point>] {
        &self.templates
    }

    pub fn template_id(&self, i: usize) -> usize {
        self.template_of[i] as usize
    }

    /// Vertex index of the anchor of component `i`.
    pub fn anchor_index(&self, i: usize) -> u64 {
        self.anchors[i]
    }

    fn index(&self) -> Result<TorusIndex> {
        TorusIndex::new(&self.torus, u64::MAX)
    }

    /// The anchor as reduced coordinates: the image of the template origin.
    pub fn anchor(&self, i: usize) -> Point {
        self.index()
            .expect("validated at construction")
            .point(self.anchors[i])
    }

    fn push_indices(&self, ix: &TorusIndex, i: usize, out: &mut Vec<u64>) {
        let base = ix.point(self.anchors[i]);
        let mut buf = base.clone();
        for off in &self.templates[self.template_of[i] as usize] {
            for (a, slot) in buf.coords_mut().iter_mut().enumerate() {
                *slot = base[a] + off[a];
            }
            out.push(ix.index(&buf));
        }
    }

    /// Vertex indices of component `i`, in template order.
    pub fn component_indices(&self, i: usize) -> Vec<u64> {
        let ix = self.index().expect("validated at construction");
        let mut out = Vec::new();
        self.push_indices(&ix, i, &mut out);
        out
    }

    /// Component `i` as reduced torus points, canonically ordered.
    pub fn component(&self, i: usize) -> Shape {
        let ix = self.index().expect("validated at construction");
        let pts = self.component_indices(i).into_iter().map(|v| ix.point(v));
        Shape::new(self.torus.dim(), pts).expect("dimensions agree")
    }

    pub fn components(&self) -> Vec<Shape> {
        (0..self.len()).map(|i| self.component(i)).collect()
    }

    /// Drops component `i`; used to build deliberately broken instances.
    pub fn without_component(&self, i: usize) -> PddsInstance {
        let mut out = self.clone();
        out.anchors.remove(i);
        out.template_of.remove(i);
        out
    }

    /// Moves every component by `z` (on the torus).
    pub fn translated(&self, z: &Point) -> Result<PddsInstance> {
        let ix = self.index()?;
        let mut rows: Vec<(u64, u64, u32)> = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let a = ix.point(self.anchors[i]).add(z)?;
            let id = self.template_of[i];
            let least = least_index(&ix, &a, &self.templates[id as usize]);
            rows.push((least, ix.index(&a), id));
        }
        rows.sort_unstable();
        Ok(PddsInstance {
            anchors: rows.iter().map(|r| r.1).collect(),
            template_of: rows.iter().map(|r| r.2).collect(),
            ..self.clone()
        })
    }

    /// Applies the axis permutation `perm` (new axis `a` is old axis `perm[a]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<PddsInstance> {
        let n = self.torus.dim();
        let mut seen = perm.to_vec();
        seen.sort_unstable();
        if seen != (0..n).collect::<Vec<_>>() {
            return Err(PddsError::InvalidInput(format!(
                "{perm:?} is not a permutation"
            )));
        }
        let apply = |p: &Point| -> Point { perm.iter().map(|&a| p[a]).collect() };
        let torus = TorusDims::new(perm.iter().map(|&a| self.torus.dims()[a]).collect())?;
        let h = BoxSpec::new(perm.iter().map(|&a| self.h_spec.extents[a]).collect())?;
        let comps = self
            .components()
            .iter()
            .map(|c| Shape::new(n, c.iter().map(apply)))
            .collect::<Result<Vec<_>>>()?;
        PddsInstance::from_components(torus, self.t, h, comps)
    }
}

/// Least vertex index of the template placed at `anchor`.
fn least_index(ix: &TorusIndex, anchor: &Point, template: &[Point]) -> u64 {
    let mut buf = anchor.clone();
    let mut least = u64::MAX;
    for off in template {
        for (a, slot) in buf.coords_mut().iter_mut().enumerate() {
            *slot = anchor[a] + off[a];
        }
        least = least.min(ix.index(&buf));
    }
    least
}

/// Lifts a component to `Z^n` by walking it from its least vertex, returning
/// the anchor index and the offsets relative to the least lifted vertex.
fn unwrap_component(ix: &TorusIndex, idx: &[u64]) -> (u64, Vec<Point>) {
    let n = ix.dim();
    let members: FxHashSet<u64> = idx.iter().copied().collect();
    let mut lifted: FxHashMap<u64, Point> = FxHashMap::default();
    let start = ix.point(idx[0]);
    for &s in idx {
        if lifted.contains_key(&s) {
            continue;
        }
        // a new piece: place it by its reduced coordinates
        let p = ix.point(s);
        lifted.insert(s, p.sub(&start).expect("same dimension"));
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let pu = lifted[&u].clone();
            for axis in 0..n {
                for forward in [true, false] {
                    let w = ix.step(u, axis, forward);
                    if w == u || !members.contains(&w) || lifted.contains_key(&w) {
                        continue;
                    }
                    let mut pw = pu.clone();
                    pw.coords_mut()[axis] += if forward { 1 } else { -1 };
                    lifted.insert(w, pw);
                    queue.push_back(w);
                }
            }
        }
    }
    let mut offsets: Vec<Point> = lifted.into_values().collect();
    offsets.sort_unstable();
    let least = offsets[0].clone();
    for o in &mut offsets {
        *o = o.sub(&least).expect("same dimension");
    }
    let anchor = ix.index(&start.add(&least).expect("same dimension"));
    (anchor, offsets)
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    torus: TorusDims,
    t: u32,
    h: BoxSpec,
    components: Vec<Vec<Point>>,
}

impl Serialize for PddsInstance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceJson {
            torus: self.torus.clone(),
            t: self.t,
            h: self.h_spec.clone(),
            components: self
                .components()
                .into_iter()
                .map(|c| c.vertices().to_vec())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PddsInstance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = InstanceJson::deserialize(d)?;
        let n = raw.torus.dim();
        let h = BoxSpec::new(raw.h.extents).map_err(D::Error::custom)?;
        let comps = raw
            .components
            .into_iter()
            .map(|c| Shape::new(n, c))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        PddsInstance::from_components(raw.torus, raw.t, h, comps).map_err(D::Error::custom)
    }
}

/// Rejects tori on which `Phi` is not well defined.
pub fn check_kernel(hom: &Homomorphism, torus: &TorusDims) -> Result<()> {
    if torus.dim() != hom.dim() {
        return Err(PddsError::DimensionMismatch {
            expected: hom.dim(),
            found: torus.dim(),
        });
    }
    for (axis, &d) in torus.dims().iter().enumerate() {
        let g = hom.group().scale(&hom.generators()[axis], d);
        if g != hom.group().identity() {
            return Err(PddsError::KernelViolation { axis, dim: d });
        }
    }
    Ok(())
}

/// Walks every torus vertex in index order together with `Phi` of it.
///
/// Moving one step along an axis adds that axis' generator, and so does a
/// wrap from `d-1` back to `0`, because `d` times the generator vanishes.
pub(crate) fn for_each_syndrome(ix: &TorusIndex, hom: &Homomorphism, mut f: impl FnMut(u64, u64)) {
    let n = ix.dim();
    let moduli = hom.group().moduli();
    let gens: Vec<&[u64]> = hom.generators().iter().map(|g| g.residues()).collect();
    let mut coords = vec![0i64; n];
    let mut phi = vec![0u64; moduli.len()];
    let rank = |phi: &[u64]| phi.iter().zip(moduli).fold(0u64, |acc, (r, m)| acc * m + r);
    for idx in 0..ix.volume() {
        f(idx, rank(&phi));
        let mut axis = n;
        while axis > 0 {
            axis -= 1;
            for (j, r) in phi.iter_mut().enumerate() {
                let (m, g) = (moduli[j], gens[axis][j]);
                *r = if *r >= m - g { *r - (m - g) } else { *r + g };
            }
            coords[axis] += 1;
            if coords[axis] < ix.dims()[axis] {
                break;
            }
            coords[axis] = 0;
        }
    }
}

/// The PDDS obtained from `c` on `torus` (the generator orders by default).
pub fn instantiate_on_torus(c: &Construction, torus: Option<&TorusDims>) -> Result<PddsInstance> {
    instantiate_with_limit(c, torus, DEFAULT_VERTEX_LIMIT)
}

pub fn instantiate_with_limit(
    c: &Construction,
    torus: Option<&TorusDims>,
    vertex_limit: u64,
) -> Result<PddsInstance> {
    let torus = match torus {
        Some(t) => t.clone(),
        None => torus_periods(&c.hom),
    };
    check_kernel(&c.hom, &torus)?;
    let ix = TorusIndex::new(&torus, vertex_limit)?;
    let tile = &c.tile;
    let order = c.hom.group().order();
    const NONE: u32 = u32::MAX;
    let mut inverse = vec![NONE; order as usize];
    for (i, v) in tile.shape().iter().enumerate() {
        inverse[c.hom.rank_of(v)? as usize] = i as u32;
    }
    if let Some(r) = inverse.iter().position(|&x| x == NONE) {
        return Err(PddsError::MissingPreimage(
            c.hom.group().unrank(r as u64).residues().to_vec(),
        ));
    }
    // the least vertex of each copy marks where a component is emitted
    let mut templates: Vec<Vec<Point>> = Vec::new();
    let mut emit = vec![NONE; tile.shape().len()];
    for copy in tile.copies() {
        let least = copy.min().expect("copies are nonempty");
        let offsets: Vec<Point> = copy.iter().map(|v| v.sub(least)).collect::<Result<_>>()?;
        let id = match templates.iter().position(|t| *t == offsets) {
            Some(id) => id,
            None => {
                templates.push(offsets);
                templates.len() - 1
            }
        };
        emit[tile.shape().position(least).expect("copy inside tile")] = id as u32;
    }
    let mut rows: Vec<(u64, u64, u32)> = Vec::new();
    for_each_syndrome(&ix, &c.hom, |x, s| {
        let id = emit[inverse[s as usize] as usize];
        if id == NONE {
            return;
        }
        let least = least_index(&ix, &ix.point(x), &templates[id as usize]);
        rows.push((least, x, id));
    });
    rows.sort_unstable();
    Ok(PddsInstance {
        torus,
        t: c.t,
        h_spec: c.h_spec.clone(),
        templates,
        anchors: rows.iter().map(|r| r.1).collect(),
        template_of: rows.iter().map(|r| r.2).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Uncovered,
    MultiComponent,
    AmbiguousNearest,
    ComponentNotBox,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub vertex: Point,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
    /// Non-box components when box checking is not strict.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMethod {
    /// Breadth-first search unless the neighbourhoods are large relative to
    /// the torus.
    Auto,
    /// One breadth-first search of radius `t` per component.
    Bfs,
    /// Every vertex against every component.
    Scan,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub strict_box: bool,
    pub method: VerifyMethod,
    pub vertex_limit: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            strict_box: true,
            method: VerifyMethod::Auto,
            vertex_limit: DEFAULT_VERTEX_LIMIT,
        }
    }
}

const DETAIL_UNCOVERED: &str = "no component within distance t";
const DETAIL_MULTI: &str = "more than one component within distance t";
const DETAIL_AMBIGUOUS: &str = "nearest vertex of its component is not unique";

/// Two bits per vertex: 0 uncovered, 1 covered once, 2 covered once but
/// with a tied nearest vertex, 3 covered more than once.
struct Coverage {
    words: Vec<u64>,
}

impl Coverage {
    fn new(len: u64) -> Self {
        Coverage {
            words: vec![0; len.div_ceil(32) as usize],
        }
    }

    fn get(&self, i: u64) -> u8 {
        ((self.words[(i / 32) as usize] >> ((i % 32) * 2)) & 3) as u8
    }

    fn set(&mut self, i: u64, v: u8) {
        let w = &mut self.words[(i / 32) as usize];
        let sh = (i % 32) * 2;
        *w = (*w & !(3 << sh)) | ((v as u64) << sh);
    }

    fn record(&mut self, i: u64, ambiguous: bool) {
        let next = match self.get(i) {
            0 if ambiguous => 2,
            0 => 1,
            _ => 3,
        };
        self.set(i, next);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tag {
    Source(u64),
    Ambiguous,
}

/// Vertex within distance `t` of a template, relative to the template origin.
struct StarCell {
    offset: Point,
    dist: u32,
    /// Position of the nearest template vertex, `None` when tied.
    source: Option<u32>,
}

/// Reusable buffers for per-component searches.
struct Bfs {
    seen: FxHashMap<u64, (u32, Tag)>,
    order: Vec<u64>,
    /// Distance and nearest-vertex tag of each entry of `order`.
    info: Vec<(u32, Tag)>,
    nbrs: Vec<u64>,
    members: Vec<u64>,
    /// Per template: its neighbourhood in `Z^n`, when that cannot wrap on the
    /// torus and so coincides with the torus search.
    stars: Vec<Option<Option<Vec<StarCell>>>>,
}

impl Bfs {
    fn new(inst: &PddsInstance) -> Self {
        Bfs {
            seen: FxHashMap::default(),
            order: Vec::new(),
            info: Vec::new(),
            nbrs: Vec::new(),
            members: Vec::new(),
            stars: (0..inst.templates.len()).map(|_| None).collect(),
        }
    }

    /// A vertex of the torus then has exactly one preimage among the
    /// offsets, and copies of the template shifted by a period are more
    /// than `t` away from every offset.
    fn star(inst: &PddsInstance, id: usize) -> Option<Vec<StarCell>> {
        let tpl = &inst.templates[id];
        let t = inst.t as i64;
        for (a, &d) in inst.torus.dims().iter().enumerate() {
            let lo = tpl.iter().map(|p| p[a]).min()?;
            let hi = tpl.iter().map(|p| p[a]).max()?;
            if hi - lo + 2 * t >= d {
                return None;
            }
        }
        let mut seen: FxHashMap<Point, usize> = FxHashMap::default();
        let mut cells: Vec<StarCell> = Vec::new();
        for (k, p) in tpl.iter().enumerate() {
            seen.insert(p.clone(), cells.len());
            cells.push(StarCell {
                offset: p.clone(),
                dist: 0,
                source: Some(k as u32),
            });
        }
        let mut head = 0;
        while head < cells.len() {
            let (du, su) = (cells[head].dist, cells[head].source);
            if du == inst.t {
                head += 1;
                continue;
            }
            let base = cells[head].offset.clone();
            head += 1;
            for a in 0..base.len() {
                for step in [-1, 1] {
                    let mut q = base.clone();
                    q.coords_mut()[a] += step;
                    match seen.get(&q) {
                        None => {
                            seen.insert(q.clone(), cells.len());
                            cells.push(StarCell {
                                offset: q,
                                dist: du + 1,
                                source: su,
                            });
                        }
                        Some(&j) => {
                            if cells[j].dist == du + 1 && cells[j].source != su {
                                cells[j].source = None;
                            }
                        }
                    }
                }
            }
        }
        Some(cells)
    }

    /// Fills `order` and `info` with every vertex within `t` of component `i`.
    fn run(&mut self, inst: &PddsInstance, ix: &TorusIndex, i: usize) {
        self.order.clear();
        self.info.clear();
        self.members.clear();
        inst.push_indices(ix, i, &mut self.members);
        let id = inst.template_of[i] as usize;
        if self.stars[id].is_none() {
            self.stars[id] = Some(Self::star(inst, id));
        }
        if let Some(Some(cells)) = &self.stars[id] {
            let base = ix.point(inst.anchors[i]);
            let dims = ix.dims();
            let strides = ix.strides();
            for c in cells {
                let mut v = 0;
                for a in 0..dims.len() {
                    let mut x = base[a] + c.offset[a];
                    if x < 0 {
                        x += dims[a];
                    } else if x >= dims[a] {
                        x -= dims[a];
                    }
                    v += x as u64 * strides[a];
                }
                self.order.push(v);
                let tag = match c.source {
                    Some(k) => Tag::Source(self.members[k as usize]),
                    None => Tag::Ambiguous,
                };
                self.info.push((c.dist, tag));
            }
            return;
        }
        self.seen.clear();
        for &v in &self.members {
            if self.seen.insert(v, (0, Tag::Source(v))).is_none() {
                self.order.push(v);
            }
        }
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            let (du, tu) = self.seen[&u];
            if du == inst.t {
                continue;
            }
            ix.neighbors(u, &mut self.nbrs);
            for &w in &self.nbrs {
                match self.seen.get_mut(&w) {
                    None => {
                        self.seen.insert(w, (du + 1, tu));
                        self.order.push(w);
                    }
                    Some((dw, tw)) => {
                        if *dw == du + 1 && *tw != tu {
                            *tw = Tag::Ambiguous;
                        }
                    }
                }
            }
        }
        let seen = &self.seen;
        self.info.extend(self.order.iter().map(|v| seen[v]));
    }
}

fn box_findings(inst: &PddsInstance, ix: &TorusIndex) -> Vec<Violation> {
    let mut bad: Vec<Option<String>> = Vec::with_capacity(inst.templates.len());
    for tpl in &inst.templates {
        let shape = Shape::new(inst.torus.dim(), tpl.iter().cloned()).expect("dimensions agree");
        bad.push(match is_box(&shape) {
            None => Some("component is not a box".to_string()),
            Some(b) if !b.same_up_to_permutation(&inst.h_spec) => Some(format!(
                "component is a box with extents {:?}, expected {:?} up to axis order",
                b.extents, inst.h_spec.extents
            )),
            Some(_) => None,
        });
    }
    let mut out = Vec::new();
    let mut buf = Vec::new();
    for i in 0..inst.len() {
        if let Some(detail) = &bad[inst.template_of[i] as usize] {
            buf.clear();
            inst.push_indices(ix, i, &mut buf);
            let least = *buf.iter().min().expect("nonempty");
            out.push(Violation {
                vertex: ix.point(least),
                kind: ViolationKind::ComponentNotBox,
                detail: detail.clone(),
            });
        }
    }
    if inst.t == 0 {
        out.extend(touching_components(inst, ix));
    }
    out
}

/// With `t = 0` touching components merge into one larger component, which
/// the coverage counts cannot see.
fn touching_components(inst: &PddsInstance, ix: &TorusIndex) -> Vec<Violation> {
    let mut owner: FxHashMap<u64, usize> = FxHashMap::default();
    let mut buf = Vec::new();
    for i in 0..inst.len() {
        buf.clear();
        inst.push_indices(ix, i, &mut buf);
        for &v in &buf {
            owner.entry(v).or_insert(i);
        }
    }
    let mut hits: Vec<u64> = Vec::new();
    let mut nbrs = Vec::new();
    for (&v, &i) in &owner {
        ix.neighbors(v, &mut nbrs);
        if nbrs.iter().any(|w| owner.get(w).is_some_and(|&j| j != i)) {
            hits.push(v);
        }
    }
    hits.sort_unstable();
    hits.into_iter()
        .map(|v| Violation {
            vertex: ix.point(v),
            kind: ViolationKind::ComponentNotBox,
            detail: "component touches another component".into(),
        })
        .collect()
}

fn coverage_bfs(inst: &PddsInstance, ix: &TorusIndex) -> Coverage {
    let mut cov = Coverage::new(ix.volume());
    let mut bfs = Bfs::new(inst);
    for i in 0..inst.len() {
        bfs.run(inst, ix, i);
        for (&v, &(_, tag)) in bfs.order.iter().zip(&bfs.info) {
            cov.record(v, tag == Tag::Ambiguous);
        }
    }
    cov
}

/// The direct reading of the definition: for every vertex, the distance to
/// every component and the number of vertices realising it.
fn coverage_scan(inst: &PddsInstance, ix: &TorusIndex) -> Coverage {
    let comps: Vec<Vec<u64>> = (0..inst.len()).map(|i| inst.component_indices(i)).collect();
    let t = inst.t as u64;
    let mut cov = Coverage::new(ix.volume());
    for v in 0..ix.volume() {
        let mut within = 0;
        let mut ties = 0;
        for c in &comps {
            let mut best = u64::MAX;
            let mut count = 0;
            for &w in c {
                let d = ix.distance(v, w);
                if d < best {
                    best = d;
                    count = 1;
                } else if d == best {
                    count += 1;
                }
            }
            if best <= t {
                within += 1;
                ties = count;
            }
        }
        let state = match within {
            0 => 0,
            1 if ties == 1 => 1,
            1 => 2,
            _ => 3,
        };
        cov.set(v, state);
    }
    cov
}

fn neighbourhood_work(inst: &PddsInstance) -> u128 {
    let sizes: Vec<u128> = inst
        .templates
        .iter()
        .map(|tpl| {
            let s = Shape::new(inst.torus.dim(), tpl.iter().cloned()).expect("dimensions agree");
            t_neighborhood(&s, inst.t, None)
                .map(|h| h.len() as u128)
                .unwrap_or(u128::MAX)
        })
        .collect();
    inst.template_of.iter().map(|&id| sizes[id as usize]).sum()
}

/// Audits `inst` with default options (strict box check).
pub fn verify_pdds(inst: &PddsInstance) -> Result<VerificationReport> {
    verify_pdds_with(inst, &VerifyOptions::default())
}

pub fn verify_pdds_with(inst: &PddsInstance, opts: &VerifyOptions) -> Result<VerificationReport> {
    let ix = TorusIndex::new(&inst.torus, opts.vertex_limit)?;
    let volume = ix.volume();
    let use_bfs = match opts.method {
        VerifyMethod::Bfs => true,
        VerifyMethod::Scan => false,
        VerifyMethod::Auto => {
            let log = 64 - volume.leading_zeros() as u128;
            neighbourhood_work(inst) < volume as u128 * log.max(1)
        }
    };
    let cov = if use_bfs {
        coverage_bfs(inst, &ix)
    } else {
        coverage_scan(inst, &ix)
    };
    let mut violations = Vec::new();
    for v in 0..volume {
        let (kind, detail) = match cov.get(v) {
            1 => continue,
            0 => (ViolationKind::Uncovered, DETAIL_UNCOVERED),
            2 => (ViolationKind::AmbiguousNearest, DETAIL_AMBIGUOUS),
            _ => (ViolationKind::MultiComponent, DETAIL_MULTI),
        };
        violations.push(Violation {
            vertex: ix.point(v),
            kind,
            detail: detail.to_string(),
        });
    }
    let mut warnings = Vec::new();
    let boxes = box_findings(inst, &ix);
    if opts.strict_box {
        violations.extend(boxes);
    } else {
        warnings = boxes;
    }
    violations.sort_by(|a, b| (&a.vertex, a.kind).cmp(&(&b.vertex, b.kind)));
    warnings.sort_by(|a, b| (&a.vertex, a.kind).cmp(&(&b.vertex, b.kind)));
    Ok(VerificationReport {
        pass: violations.is_empty(),
        violations,
        warnings,
    })
}

/// Nearest component data for one vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub vertex: u64,
    pub component: usize,
    /// `None` when two vertices of the component are equally near.
    pub device: Option<u64>,
    pub distance: u32,
}

/// Reports, for every component, each vertex within distance `t` of it.
/// On a verified instance every vertex is reported exactly once.
pub fn nearest_assignment(
    inst: &PddsInstance,
    vertex_limit: u64,
    mut f: impl FnMut(Assignment),
) -> Result<()> {
    let ix = TorusIndex::new(&inst.torus, vertex_limit)?;
    let mut bfs = Bfs::new(inst);
    for i in 0..inst.len() {
        bfs.run(inst, &ix, i);
        for (&v, &(d, tag)) in bfs.order.iter().zip(&bfs.info) {
            f(Assignment {
                vertex: v,
                component: i,
                device: match tag {
                    Tag::Source(w) => Some(w),
                    Tag::Ambiguous => None,
                },
                distance: d,
            });
        }
    }
    Ok(())
}

/// Do the translates of `tile` by kernel elements cover every vertex of the
/// instance torus exactly once?
pub fn verify_partition(inst: &PddsInstance, tile: &Tile, hom: &Homomorphism) -> Result<bool> {
    verify_partition_points(
        inst.torus(),
        tile.shape().vertices(),
        hom,
        DEFAULT_VERTEX_LIMIT,
    )
}

/// [`verify_partition`] for a raw vertex list, where repeats are allowed.
pub fn verify_partition_points(
    torus: &TorusDims,
    tile: &[Point],
    hom: &Homomorphism,
    vertex_limit: u64,
) -> Result<bool> {
    let ix = TorusIndex::new(torus, vertex_limit)?;
    if tile.is_empty() || ix.volume() % tile.len() as u64 != 0 {
        return Ok(false);
    }
    if tile.iter().any(|p| p.dim() != torus.dim()) || check_kernel(hom, torus).is_err() {
        return Ok(false);
    }
    let mut cov = Coverage::new(ix.volume());
    let (dims, strides) = (ix.dims(), ix.strides());
    for_each_syndrome(&ix, hom, |x, s| {
        if s != 0 {
            return;
        }
        let base = ix.point(x);
        for p in tile {
            let mut v = 0;
            for a in 0..dims.len() {
                let mut c = base[a] + p[a];
                if c < 0 || c >= dims[a] {
                    c = c.rem_euclid(dims[a]);
                }
                v += c as u64 * strides[a];
            }
            cov.record(v, false);
        }
    });
    Ok((0..ix.volume()).all(|v| cov.get(v) == 1))
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// `(v - c * b) mod d`, in `i128` only when `i64` would overflow.
fn mulsub_mod(v: i64, c: i64, b: i64, d: i64) -> i64 {
    match c.checked_mul(b).and_then(|p| v.checked_sub(p)) {
        Some(x) => x.rem_euclid(d),
        None => (v as i128 - c as i128 * b as i128).rem_euclid(d as i128) as i64,
    }
}

/// Order of the subgroup of the torus group generated by `vectors`, via an
/// upper triangular basis of the lattice they span together with the torus
/// periods.
pub fn subgroup_order(torus: &TorusDims, vectors: impl IntoIterator<Item = Point>) -> u128 {
    let dims = torus.dims();
    let n = dims.len();
    let mut basis: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut row = vec![0; n];
            row[i] = dims[i];
            row
        })
        .collect();
    let mut v = vec![0i64; n];
    for z in vectors {
        for j in 0..n {
            v[j] = z[j].rem_euclid(dims[j]);
        }
        for i in 0..n {
            if v[i] == 0 {
                continue;
            }
            let p = basis[i][i];
            if v[i] % p == 0 {
                let c = v[i] / p;
                for j in i..n {
                    v[j] = mulsub_mod(v[j], c, basis[i][j], dims[j]);
                }
                continue;
            }
            let (p, q) = (p as i128, v[i] as i128);
            let (g, x, y) = ext_gcd(p, q);
            for j in i..n {
                let (b, w) = (basis[i][j] as i128, v[j] as i128);
                let d = dims[j] as i128;
                let mut nb = (x * b + y * w).rem_euclid(d);
                let nw = ((p / g) * w - (q / g) * b).rem_euclid(d);
                if j == i {
                    nb = g;
                }
                basis[i][j] = nb as i64;
                v[j] = nw as i64;
            }
            debug_assert_eq!(v[i], 0);
        }
    }
    let det: u128 = basis
        .iter()
        .enumerate()
        .map(|(i, r)| r[i] as u128)
        .product();
    let vol: u128 = dims.iter().map(|&d| d as u128).product();
    vol / det
}

/// Lattice-likeness without re-verifying: one template for all components,
/// and the anchor differences form a subgroup of the torus group.
pub fn is_lattice_like_unchecked(inst: &PddsInstance) -> bool {
    if inst.is_empty() {
        return true;
    }
    let first = inst.template_of[0];
    if inst.template_of.iter().any(|&id| id != first) {
        return false;
    }
    let ix = TorusIndex::new(&inst.torus, u64::MAX).expect("validated at construction");
    let a0 = ix.point(inst.anchors[0]);
    let diffs = inst
        .anchors
        .iter()
        .map(|&a| ix.point(a).sub(&a0).expect("same dimension"));
    subgroup_order(&inst.torus, diffs) == inst.len() as u128
}

/// Errors with [`PddsError::NotVerified`] on an instance that fails the audit.
pub fn is_lattice_like(inst: &PddsInstance) -> Result<bool> {
    if !verify_pdds(inst)?.pass {
        return Err(PddsError::NotVerified);
    }
    Ok(is_lattice_like_unchecked(inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        nonlattice_p2_example, pdds1_q3, pdds1_square, pdds_t_path_2d, Variant,
    };
    use crate::lattice::box_shape;

    fn pt(c: &[i64]) -> Point {
        Point::new(c)
    }

    fn scan(inst: &PddsInstance) -> VerificationReport {
        let opts = VerifyOptions {
            method: VerifyMethod::Scan,
            ..Default::default()
        };
        verify_pdds_with(inst, &opts).unwrap()
    }

    fn bfs(inst: &PddsInstance) -> VerificationReport {
        let opts = VerifyOptions {
            method: VerifyMethod::Bfs,
            ..Default::default()
        };
        verify_pdds_with(inst, &opts).unwrap()
    }

    #[test]
    fn q3_instantiates_and_verifies() {
        let c = pdds1_q3().unwrap();
        let inst = instantiate_on_torus(&c, None).unwrap();
        assert_eq!(inst.torus().dims(), &[4, 4, 4]);
        assert_eq!(inst.len(), 2);
        assert!(inst.components().iter().all(|s| s.len() == 8));
        assert!(verify_pdds(&inst).unwrap().pass);
        assert_eq!(scan(&inst), bfs(&inst));
        assert!(is_lattice_like(&inst).unwrap());
    }

    /// Every (vertex, component) pair within distance t, by direct scan.
    fn brute_assignments(inst: &PddsInstance) -> Vec<(u64, usize, Option<u64>, u32)> {
        let ix = TorusIndex::new(inst.torus(), u64::MAX).unwrap();
        let mut out = Vec::new();
        for v in 0..ix.volume() {
            for i in 0..inst.len() {
                let mut comp = inst.component_indices(i);
                comp.sort_unstable();
                comp.dedup();
                let best = comp.iter().map(|&w| ix.distance(v, w)).min().unwrap();
                if best <= inst.t() as u64 {
                    let near: Vec<u64> = comp
                        .iter()
                        .copied()
                        .filter(|&w| ix.distance(v, w) == best)
                        .collect();
                    let device = (near.len() == 1).then(|| near[0]);
                    out.push((v, i, device, best as u32));
                }
            }
        }
        out
    }

    #[test]
    fn nearest_assignment_matches_direct_scan() {
        let mut cases = Vec::new();
        let q3 = pdds1_q3().unwrap();
        for dims in [[4, 4, 4], [8, 4, 4], [8, 8, 8]] {
            cases.push(
                instantiate_on_torus(&q3, Some(&TorusDims::new(dims.to_vec()).unwrap())).unwrap(),
            );
        }
        let p = pdds_t_path_2d(2, 1, Variant::TwoCopy).unwrap();
        let inst = instantiate_on_torus(&p, None).unwrap();
        cases.push(inst.without_component(0));
        cases.push(inst);
        let ball = |dims: Vec<i64>, t: u32| {
            let torus = TorusDims::new(dims).unwrap();
            let h = BoxSpec::new(vec![1, 1]).unwrap();
            PddsInstance::from_components(torus, t, h, vec![Shape::new(2, [pt(&[0, 0])]).unwrap()])
                .unwrap()
        };
        cases.push(ball(vec![3, 3], 1));
        cases.push(ball(vec![4, 5], 2));
        cases.push(ball(vec![5, 9], 2));
        for inst in &cases {
            let mut got = Vec::new();
            nearest_assignment(inst, u64::MAX, |a| {
                got.push((a.vertex, a.component, a.device, a.distance))
            })
            .unwrap();
            got.sort_unstable();
            assert_eq!(got, brute_assignments(inst), "{:?}", inst.torus());
            assert_eq!(scan(inst), bfs(inst));
        }
    }

    #[test]
    fn square_zero_torus() {
        let inst = instantiate_on_torus(&pdds1_square(0).unwrap(), None).unwrap();
        assert_eq!(inst.torus().dims(), &[6, 4]);
        assert_eq!(inst.len(), 2);
    }

    #[test]
    fn kernel_violation_is_rejected() {
        let c = pdds_t_path_2d(2, 3, Variant::SingleCopy).unwrap();
        let bad = TorusDims::new(vec![1000, 1000]).unwrap();
        assert!(matches!(
            instantiate_on_torus(&c, Some(&bad)),
            Err(PddsError::KernelViolation { .. })
        ));
    }

    #[test]
    fn multiples_of_the_period_also_work() {
        let c = pdds1_square(0).unwrap();
        let torus = TorusDims::new(vec![12, 8]).unwrap();
        let inst = instantiate_on_torus(&c, Some(&torus)).unwrap();
        assert_eq!(inst.len(), 8);
        assert!(verify_pdds(&inst).unwrap().pass);
    }

    #[test]
    fn deleting_a_component_uncovers_vertices() {
        let inst = instantiate_on_torus(&pdds1_q3().unwrap(), None).unwrap();
        let broken = inst.without_component(1);
        let rep = verify_pdds(&broken).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.violations.len(), 32);
        assert!(rep
            .violations
            .iter()
            .all(|v| v.kind == ViolationKind::Uncovered));
        assert_eq!(scan(&broken), rep);
        assert_eq!(is_lattice_like(&broken), Err(PddsError::NotVerified));
    }

    #[test]
    fn overlapping_balls_report_multi_component() {
        let torus = TorusDims::new(vec![9, 9]).unwrap();
        let comps = vec![
            Shape::new(2, [pt(&[4, 4])]).unwrap(),
            Shape::new(2, [pt(&[5, 4])]).unwrap(),
        ];
        let h = BoxSpec::new(vec![1, 1]).unwrap();
        let inst = PddsInstance::from_components(torus, 1, h, comps).unwrap();
        let rep = bfs(&inst);
        let multi: Vec<Point> = rep
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::MultiComponent)
            .map(|v| v.vertex.clone())
            .collect();
        assert_eq!(multi, vec![pt(&[4, 4]), pt(&[5, 4])]);
        assert_eq!(scan(&inst), rep);
    }

    #[test]
    fn wrapped_ball_is_ambiguous() {
        // on a 4-cycle the antipode of a vertex is reached both ways round
        let torus = TorusDims::new(vec![4, 1]).unwrap();
        let h = BoxSpec::new(vec![1, 1]).unwrap();
        let inst =
            PddsInstance::from_components(torus, 2, h, vec![Shape::new(2, [pt(&[0, 0])]).unwrap()])
                .unwrap();
        let rep = bfs(&inst);
        assert_eq!(rep, scan(&inst));
        assert_eq!(rep.violations.len(), 0);
        let torus = TorusDims::new(vec![4, 4]).unwrap();
        let inst = PddsInstance::from_components(
            torus,
            1,
            BoxSpec::new(vec![2, 1]).unwrap(),
            vec![Shape::new(2, [pt(&[0, 0]), pt(&[2, 0])]).unwrap()],
        )
        .unwrap();
        let rep = bfs(&inst);
        assert_eq!(rep, scan(&inst));
        assert!(rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::AmbiguousNearest && v.vertex == pt(&[1, 0])));
        assert!(rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::ComponentNotBox));
    }

    #[test]
    fn strictness_flag_moves_box_findings_to_warnings() {
        let torus = TorusDims::new(vec![5, 5]).unwrap();
        let l = Shape::new(2, [pt(&[0, 0]), pt(&[1, 0]), pt(&[0, 1])]).unwrap();
        let inst =
            PddsInstance::from_components(torus, 0, BoxSpec::new(vec![1, 1]).unwrap(), vec![l])
                .unwrap();
        let lax = VerifyOptions {
            strict_box: false,
            ..Default::default()
        };
        let rep = verify_pdds_with(&inst, &lax).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        assert!(rep
            .violations
            .iter()
            .all(|v| v.kind == ViolationKind::Uncovered));
    }

    #[test]
    fn touching_components_fail_at_radius_zero() {
        let torus = TorusDims::new(vec![2, 1]).unwrap();
        let comps = vec![
            Shape::new(2, [pt(&[0, 0])]).unwrap(),
            Shape::new(2, [pt(&[1, 0])]).unwrap(),
        ];
        let inst =
            PddsInstance::from_components(torus, 0, BoxSpec::new(vec![1, 1]).unwrap(), comps)
                .unwrap();
        let rep = verify_pdds(&inst).unwrap();
        assert!(!rep.pass);
        assert!(rep
            .violations
            .iter()
            .all(|v| v.kind == ViolationKind::ComponentNotBox));
    }

    #[test]
    fn components_wrapping_the_seam_are_unwrapped() {
        let torus = TorusDims::new(vec![5, 5]).unwrap();
        let comp = Shape::new(2, [pt(&[4, 2]), pt(&[0, 2])]).unwrap();
        let inst = PddsInstance::from_components(
            torus,
            1,
            BoxSpec::new(vec![2, 1]).unwrap(),
            vec![comp.clone()],
        )
        .unwrap();
        assert_eq!(inst.anchor(0), pt(&[4, 2]));
        assert_eq!(inst.templates()[0], vec![pt(&[0, 0]), pt(&[1, 0])]);
        assert_eq!(inst.component(0), comp);
    }

    #[test]
    fn partition_examples() {
        let c = pdds1_q3().unwrap();
        let inst = instantiate_on_torus(&c, None).unwrap();
        assert!(verify_partition(&inst, &c.tile, &c.hom).unwrap());
        let mut dup = c.tile.shape().vertices().to_vec();
        dup[3] = dup[2].clone();
        assert!(!verify_partition_points(inst.torus(), &dup, &c.hom, u64::MAX).unwrap());
        let short = &c.tile.shape().vertices()[..31];
        assert!(!verify_partition_points(inst.torus(), short, &c.hom, u64::MAX).unwrap());
    }

    #[test]
    fn lattice_likeness() {
        let c = nonlattice_p2_example().unwrap();
        let inst = instantiate_on_torus(&c, None).unwrap();
        assert_eq!(inst.torus().dims(), &[8, 8]);
        assert!(verify_pdds(&inst).unwrap().pass);
        assert!(!is_lattice_like(&inst).unwrap());
        let parallel: FxHashSet<Vec<i64>> = (0..inst.len())
            .map(|i| {
                let tpl = &inst.templates()[inst.template_id(i)];
                is_box(&Shape::new(2, tpl.iter().cloned()).unwrap())
                    .unwrap()
                    .extents
            })
            .collect();
        assert!(parallel.contains(&vec![2, 1]) && parallel.contains(&vec![1, 2]));

        let torus = TorusDims::new(vec![6, 6]).unwrap();
        let one = vec![box_shape(&BoxSpec::new(vec![1, 1]).unwrap()).unwrap()];
        let single =
            PddsInstance::from_components(torus, 0, BoxSpec::new(vec![1, 1]).unwrap(), one)
                .unwrap();
        assert!(is_lattice_like_unchecked(&single));
    }

    #[test]
    fn subgroup_orders() {
        let torus = TorusDims::new(vec![6, 4]).unwrap();
        assert_eq!(subgroup_order(&torus, []), 1);
        assert_eq!(subgroup_order(&torus, [pt(&[1, 0])]), 6);
        assert_eq!(subgroup_order(&torus, [pt(&[2, 2])]), 6);
        assert_eq!(subgroup_order(&torus, [pt(&[3, 0]), pt(&[0, 2])]), 4);
        assert_eq!(subgroup_order(&torus, [pt(&[1, 0]), pt(&[0, 1])]), 24);
    }

    #[test]
    fn json_round_trip() {
        let inst = instantiate_on_torus(&pdds1_q3().unwrap(), None).unwrap();
        let js = serde_json::to_string(&inst).unwrap();
        let back: PddsInstance = serde_json::from_str(&js).unwrap();
        assert_eq!(back.components(), inst.components());
        let rep = verify_pdds(&back).unwrap();
        assert_eq!(
            serde_json::to_string(&rep).unwrap(),
            r#"{"pass":true,"violations":[]}"#
        );
    }
}
