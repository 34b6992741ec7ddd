//! Explicit tiles `D` with homomorphisms `Phi` such that `Phi` restricted to
//! `D` is a bijection. Each one yields a t-PDDS whose components are the
//! translates of the H copies in `D` by kernel elements.
//!
//! Where the source formulas are ambiguous, a family lists candidate
//! generator assignments and keeps the first that passes the bijection check.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::abelian::{
    check_bijection, gcd, molnar_k_set, AbelianGroup, BijectionCheck, Homomorphism,
};
use crate::error::{PddsError, Result};
use crate::lattice::{
    box_shape, is_box, lee_distance, t_neighborhood, translate, BoxSpec, Point, Shape,
};

/// Owning component and nearest device of one tile vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileLabel {
    pub v: Point,
    pub component: usize,
    pub device: Point,
}

/// A union of pairwise disjoint `H*` copies, labelled vertex by vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    shape: Shape,
    labels: Vec<TileLabel>,
    copies: Vec<Shape>,
}

impl Tile {
    /// Labels the union of the radius-`t` neighbourhoods of `copies`.
    ///
    /// Copies are renumbered: the one containing the origin (if any) first,
    /// the rest by least vertex.
    pub fn from_copies(mut copies: Vec<Shape>, t: u32) -> Result<Tile> {
        let dim = copies
            .first()
            .ok_or_else(|| PddsError::InvalidConstruction("tile has no components".into()))?
            .dim();
        let origin = Point::origin(dim);
        copies
            .sort_by(|a, b| (!a.contains(&origin), a.min()).cmp(&(!b.contains(&origin), b.min())));
        let mut boxes = Vec::with_capacity(copies.len());
        for c in &copies {
            if c.dim() != dim {
                return Err(PddsError::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
            let spec = is_box(c).ok_or_else(|| {
                PddsError::InvalidConstruction(format!("component {c:?} is not a box"))
            })?;
            boxes.push(spec);
        }
        if boxes.iter().any(|b| !b.same_up_to_permutation(&boxes[0])) {
            return Err(PddsError::InvalidConstruction(
                "components are not copies of one box".into(),
            ));
        }
        let mut all = Vec::new();
        for c in &copies {
            all.extend(t_neighborhood(c, t, None)?.vertices().iter().cloned());
        }
        let shape = Shape::new(dim, all)?;
        let mut labels = Vec::with_capacity(shape.len());
        for v in &shape {
            let mut owner = None;
            for (ci, c) in copies.iter().enumerate() {
                let d = c.distance_to(v, None)?.unwrap_or(u64::MAX);
                if d <= t as u64 {
                    if owner.is_some() {
                        return Err(PddsError::InvalidConstruction(format!(
                            "vertex {v:?} lies within distance {t} of two components"
                        )));
                    }
                    owner = Some((ci, d));
                }
            }
            let (ci, d) = owner.expect("vertex came from some neighbourhood");
            let mut nearest = copies[ci]
                .iter()
                .filter(|w| lee_distance(v, w, None).map(|x| x == d).unwrap_or(false));
            let device = nearest.next().expect("distance is realised").clone();
            if nearest.next().is_some() {
                return Err(PddsError::InvalidConstruction(format!(
                    "vertex {v:?} has two nearest vertices in its component"
                )));
            }
            labels.push(TileLabel {
                v: v.clone(),
                component: ci,
                device,
            });
        }
        Ok(Tile {
            shape,
            labels,
            copies,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// One label per vertex, in the canonical vertex order of `shape`.
    pub fn labels(&self) -> &[TileLabel] {
        &self.labels
    }

    /// The H copies, indexed by component id.
    pub fn copies(&self) -> &[Shape] {
        &self.copies
    }

    pub fn label_of(&self, v: &Point) -> Option<&TileLabel> {
        self.shape.position(v).map(|i| &self.labels[i])
    }
}

#[derive(Serialize, Deserialize)]
struct TileJson {
    dim: usize,
    vertices: Vec<Point>,
    labels: Vec<TileLabel>,
}

impl Serialize for Tile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TileJson {
            dim: self.shape.dim(),
            vertices: self.shape.vertices().to_vec(),
            labels: self.labels.clone(),
        }
        .serialize(s)
    }
}

/// Rebuilds the tile from the devices (every H vertex is its own device)
/// and insists that the stored labels agree with the recomputed ones.
fn tile_from_json(raw: TileJson, t: u32) -> Result<Tile> {
    let ncomp = raw
        .labels
        .iter()
        .map(|l| l.component + 1)
        .max()
        .unwrap_or(0);
    let mut devices: Vec<Vec<Point>> = vec![Vec::new(); ncomp];
    for l in &raw.labels {
        devices[l.component].push(l.device.clone());
    }
    let copies = devices
        .into_iter()
        .map(|d| Shape::new(raw.dim, d))
        .collect::<Result<Vec<_>>>()?;
    let tile = Tile::from_copies(copies, t)?;
    let given = Shape::new(raw.dim, raw.vertices)?;
    if given != tile.shape {
        return Err(PddsError::InvalidConstruction(
            "tile vertices differ from the neighbourhood of its components".into(),
        ));
    }
    let mut stored = raw.labels;
    stored.sort_by(|a, b| a.v.cmp(&b.v));
    let relabel: Vec<usize> = {
        // component ids in the file may be numbered differently
        let mut map = vec![usize::MAX; ncomp];
        for (a, b) in stored.iter().zip(&tile.labels) {
            map[a.component] = b.component;
        }
        map
    };
    let consistent = stored.len() == tile.labels.len()
        && stored.iter().zip(&tile.labels).all(|(a, b)| {
            a.v == b.v && a.device == b.device && relabel[a.component] == b.component
        });
    if !consistent {
        return Err(PddsError::InvalidConstruction(
            "tile labels are inconsistent".into(),
        ));
    }
    Ok(tile)
}

/// A tile, its homomorphism and the parameters it realises.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    pub t: u32,
    pub h_spec: BoxSpec,
    pub tile: Tile,
    pub hom: Homomorphism,
    pub lattice_like: bool,
}

impl Construction {
    /// Checks `|D| = |G|` and that `Phi` is a bijection on `D`.
    pub fn new(t: u32, h_spec: BoxSpec, tile: Tile, hom: Homomorphism) -> Result<Self> {
        if hom.dim() != tile.dim() {
            return Err(PddsError::DimensionMismatch {
                expected: tile.dim(),
                found: hom.dim(),
            });
        }
        if tile.shape.len() as u64 != hom.group().order() {
            return Err(PddsError::GroupOrderMismatch {
                expected: tile.shape.len() as u64,
                actual: hom.group().order(),
            });
        }
        match check_bijection(&hom, &tile.shape)? {
            BijectionCheck::Ok => {}
            other => return Err(PddsError::NotBijective(format!("{other:?}"))),
        }
        let lattice_like = tile.copies.len() == 1;
        Ok(Construction {
            t,
            h_spec,
            tile,
            hom,
            lattice_like,
        })
    }

    pub fn dim(&self) -> usize {
        self.tile.dim()
    }
}

#[derive(Serialize, Deserialize)]
struct ConstructionJson {
    t: u32,
    h: BoxSpec,
    hom: Homomorphism,
    tile: TileJson,
    lattice_like: bool,
}

impl Serialize for Construction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConstructionJson {
            t: self.t,
            h: self.h_spec.clone(),
            hom: self.hom.clone(),
            tile: TileJson {
                dim: self.tile.dim(),
                vertices: self.tile.shape.vertices().to_vec(),
                labels: self.tile.labels.clone(),
            },
            lattice_like: self.lattice_like,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Construction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = ConstructionJson::deserialize(d)?;
        let h = BoxSpec::new(raw.h.extents).map_err(D::Error::custom)?;
        let tile = tile_from_json(raw.tile, raw.t).map_err(D::Error::custom)?;
        let c = Construction::new(raw.t, h, tile, raw.hom).map_err(D::Error::custom)?;
        if c.lattice_like != raw.lattice_like {
            return Err(D::Error::custom("lattice_like flag contradicts the tile"));
        }
        Ok(c)
    }
}

/// Two-copy or single-copy tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    TwoCopy,
    SingleCopy,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(PddsError::InvalidInput(msg()))
    }
}

fn extents(n: usize, leading: &[i64]) -> BoxSpec {
    let mut e = vec![1i64; n];
    e[..leading.len()].copy_from_slice(leading);
    BoxSpec { extents: e }
}

fn shifted(h: &Shape, offset: &[i64]) -> Result<Shape> {
    translate(h, &Point::new(offset), None)
}

/// Keeps the first candidate on which `Phi` is a bijection.
fn resolve(
    family: &'static str,
    params: String,
    t: u32,
    h_spec: &BoxSpec,
    tile: &Tile,
    candidates: Vec<Homomorphism>,
) -> Result<Construction> {
    for hom in candidates {
        if check_bijection(&hom, tile.shape())?.is_ok() {
            return Construction::new(t, h_spec.clone(), tile.clone(), hom);
        }
    }
    Err(PddsError::Unsupported { family, params })
}

/// Perfect Lee code of radius 1 in `Z^n` from any group of order `2n+1`:
/// the generators are a set holding one of each pair `g, -g`.
pub fn plc_n1(n: usize, group: &AbelianGroup) -> Result<Construction> {
    ensure(n >= 2, || format!("plc1 needs n >= 2, got {n}"))?;
    let expected = 2 * n as u64 + 1;
    if group.order() != expected {
        return Err(PddsError::GroupOrderMismatch {
            expected,
            actual: group.order(),
        });
    }
    let h_spec = extents(n, &[]);
    let tile = Tile::from_copies(vec![box_shape(&h_spec)?], 1)?;
    let k = molnar_k_set(group);
    let hom = Homomorphism::new(group.clone(), k)?;
    Construction::new(1, h_spec, tile, hom)
}

/// `1-PDDS[P_k]` in `Z^n`, with `P_k` along the first axis, `G = Z_{2nk-k+2}`
/// and `g_i = (i-1)k + 1`.
pub fn pdds1_path(n: usize, k: i64) -> Result<Construction> {
    ensure(n >= 2 && k >= 1, || {
        format!("path needs n >= 2, k >= 1, got n={n}, k={k}")
    })?;
    let h_spec = extents(n, &[k]);
    let tile = Tile::from_copies(vec![box_shape(&h_spec)?], 1)?;
    let order = 2 * n as i64 * k - k + 2;
    let gens: Vec<i64> = (1..=n as i64).map(|i| (i - 1) * k + 1).collect();
    let hom = Homomorphism::cyclic(order as u64, &gens)?;
    Construction::new(1, h_spec, tile, hom)
}

/// `t-PDDS[P_k]` in `Z^2` with `P_k` along the second axis.
///
/// The two-copy tile adds a second `H*` at `(t, t+k)` and uses
/// `Z_{4t^2+4tk+2k}` with `g = (2t+2k-1, 1)`. The single-copy tile uses
/// `Z_{2t^2+2tk+k}` with `g = (1, 2t+1)`, falling back to `(1, t+1)`.
pub fn pdds_t_path_2d(t: u32, k: i64, variant: Variant) -> Result<Construction> {
    ensure(t >= 1 && k >= 1, || {
        format!("path2d needs t, k >= 1, got t={t}, k={k}")
    })?;
    let ti = t as i64;
    let h_spec = BoxSpec {
        extents: vec![1, k],
    };
    let h = box_shape(&h_spec)?;
    let params = format!("t={t}, k={k}, {variant:?}");
    match variant {
        Variant::TwoCopy => {
            let tile = Tile::from_copies(vec![h.clone(), shifted(&h, &[ti, ti + k])?], t)?;
            let order = (4 * ti * ti + 4 * ti * k + 2 * k) as u64;
            let cands = vec![Homomorphism::cyclic(order, &[2 * ti + 2 * k - 1, 1])?];
            resolve("path2d", params, t, &h_spec, &tile, cands)
        }
        Variant::SingleCopy => {
            let tile = Tile::from_copies(vec![h], t)?;
            let order = (2 * ti * ti + 2 * ti * k + k) as u64;
            let cands = vec![
                Homomorphism::cyclic(order, &[1, 2 * ti + 1])?,
                Homomorphism::cyclic(order, &[1, ti + 1])?,
            ];
            resolve("path2d", params, t, &h_spec, &tile, cands)
        }
    }
}

/// Candidate generator pairs for the single-copy `P_2 x P_k` tile, in the
/// order they are tried.
pub fn box2xk_single_candidates(t: u32, k: i64) -> Result<Vec<Homomorphism>> {
    let (ti, tk1, tk) = (t as i64, t as i64 + 1, t as i64 + k);
    let order = 2 * tk1 * tk;
    let m = gcd(tk1 as u64, tk as u64) as i64;
    if m == 1 {
        return Ok(vec![
            Homomorphism::cyclic(order as u64, &[tk1, tk])?,
            Homomorphism::cyclic(order as u64, &[tk, tk1])?,
        ]);
    }
    let n = order / m;
    let moduli = [m, n];
    let mut raw: Vec<[[i64; 2]; 2]> = vec![
        // (1, n) is (1, 0) in Z_m x Z_n
        [[1, 0], [0, 1]],
    ];
    let q = 2 * (2 * ti + 1);
    if n % q == 0 && (2 * ti + 1) % m == 0 {
        raw.push([[1, n / q], [1, (2 * ti + 1) / m]]);
    }
    raw.extend([
        [[1, tk / m], [0, 1]],
        [[1, tk / m], [1, tk1 / m]],
        [[0, tk / m], [1, tk1 / m]],
    ]);
    raw.into_iter()
        .map(|[a, b]| Homomorphism::from_raw(&moduli, &[a.to_vec(), b.to_vec()]))
        .collect()
}

/// `t-PDDS[P_2 x P_k]` in `Z^2`, `H = {0,1} x {0..k-1}`.
///
/// Two copies: second `H*` at `(t+1, t+k)`, `G = Z_{2t+2k} x Z_{2t+2}`,
/// `g = ((0,1), (1,0))`. One copy: `|G| = 2(t+1)(t+k)`, cyclic when
/// `gcd(t+1, t+k) = 1` and `Z_m x Z_{|G|/m}` otherwise.
pub fn pdds_t_box2xk_2d(t: u32, k: i64, variant: Variant) -> Result<Construction> {
    ensure(t >= 1 && k >= 1, || {
        format!("box2xk needs t, k >= 1, got t={t}, k={k}")
    })?;
    let ti = t as i64;
    let h_spec = BoxSpec {
        extents: vec![2, k],
    };
    let h = box_shape(&h_spec)?;
    let params = format!("t={t}, k={k}, {variant:?}");
    match variant {
        Variant::TwoCopy => {
            let tile = Tile::from_copies(vec![h.clone(), shifted(&h, &[ti + 1, ti + k])?], t)?;
            let cands = vec![Homomorphism::from_raw(
                &[2 * ti + 2 * k, 2 * ti + 2],
                &[vec![0, 1], vec![1, 0]],
            )?];
            resolve("box2xk", params, t, &h_spec, &tile, cands)
        }
        Variant::SingleCopy => {
            let tile = Tile::from_copies(vec![h], t)?;
            let cands = box2xk_single_candidates(t, k)?;
            resolve("box2xk", params, t, &h_spec, &tile, cands)
        }
    }
}

/// `1-PDDS[P_2 x P_2]` in `Z^{3k+2}` over `Z_{24k+12}`.
///
/// `g_1 = 2+4k`, `g_2 = 3+6k`, `g_{2+i} = 2+4k+i`, `g_{2+k+i} = 2+4k-i`;
/// the last block is `6+11k+i` as written, else `5+11k+i`, which is what
/// the interval table of the proof requires.
pub fn pdds1_square(k: usize) -> Result<Construction> {
    let n = 3 * k + 2;
    let ki = k as i64;
    let h_spec = extents(n, &[2, 2]);
    let tile = Tile::from_copies(vec![box_shape(&h_spec)?], 1)?;
    let order = (24 * ki + 12) as u64;
    let mut base = vec![2 + 4 * ki, 3 + 6 * ki];
    base.extend((1..=ki).map(|i| 2 + 4 * ki + i));
    base.extend((1..=ki).map(|i| 2 + 4 * ki - i));
    let cands = [6, 5]
        .iter()
        .map(|c| {
            let mut g = base.clone();
            g.extend((1..=ki).map(|i| c + 11 * ki + i));
            Homomorphism::cyclic(order, &g)
        })
        .collect::<Result<Vec<_>>>()?;
    resolve("square", format!("k={k}"), 1, &h_spec, &tile, cands)
}

/// `1-PDDS[Q_3]` over `Z_2 + Z_4 + Z_4`.
pub fn pdds1_q3() -> Result<Construction> {
    let h_spec = BoxSpec {
        extents: vec![2, 2, 2],
    };
    let tile = Tile::from_copies(vec![box_shape(&h_spec)?], 1)?;
    let hom = Homomorphism::from_raw(&[2, 4, 4], &[vec![1, 3, 3], vec![0, 1, 0], vec![0, 0, 1]])?;
    Construction::new(1, h_spec, tile, hom)
}

/// `2-PDDS[P_2]` in `Z^3` over `Z_38` with `g = (1, 11, 7)`.
pub fn minkowski_p2() -> Result<Construction> {
    let h_spec = BoxSpec {
        extents: vec![2, 1, 1],
    };
    let tile = Tile::from_copies(vec![box_shape(&h_spec)?], 2)?;
    let hom = Homomorphism::cyclic(38, &[1, 11, 7])?;
    Construction::new(2, h_spec, tile, hom)
}

/// Four `P_2` stars over `Z_4 + Z_8`, two horizontal and two vertical, so the
/// resulting code is periodic but not lattice-like.
pub fn nonlattice_p2_example() -> Result<Construction> {
    let pair = |a: [i64; 2], b: [i64; 2]| Shape::new(2, [Point::new(&a), Point::new(&b)]);
    let copies = vec![
        pair([0, 1], [1, 1])?,
        pair([0, -2], [1, -2])?,
        pair([-2, -1], [-2, 0])?,
        pair([3, -1], [3, 0])?,
    ];
    let tile = Tile::from_copies(copies, 1)?;
    let hom = Homomorphism::from_raw(&[4, 8], &[vec![0, 1], vec![1, 1]])?;
    let h_spec = BoxSpec {
        extents: vec![2, 1],
    };
    Construction::new(1, h_spec, tile, hom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{enumerate_abelian_groups, phi_eval, torus_periods};

    fn gens_cyclic(c: &Construction) -> Vec<u64> {
        c.hom.generators().iter().map(|g| g.residues()[0]).collect()
    }

    fn gens(c: &Construction) -> Vec<Vec<u64>> {
        c.hom
            .generators()
            .iter()
            .map(|g| g.residues().to_vec())
            .collect()
    }

    #[test]
    fn plc_examples() {
        let c = plc_n1(2, &AbelianGroup::cyclic(5).unwrap()).unwrap();
        assert_eq!(gens_cyclic(&c), vec![1, 2]);
        assert_eq!(c.tile.shape().len(), 5);
        for g in enumerate_abelian_groups(9).unwrap() {
            assert!(plc_n1(4, &g).is_ok());
        }
        assert!(matches!(
            plc_n1(2, &AbelianGroup::cyclic(4).unwrap()),
            Err(PddsError::GroupOrderMismatch { .. })
        ));
    }

    #[test]
    fn path_examples() {
        let c = pdds1_path(2, 3).unwrap();
        assert_eq!((c.hom.group().order(), gens_cyclic(&c)), (11, vec![1, 4]));
        let c = pdds1_path(3, 3).unwrap();
        assert_eq!(
            (c.hom.group().order(), gens_cyclic(&c)),
            (17, vec![1, 4, 7])
        );
        let c = pdds1_path(2, 1).unwrap();
        assert_eq!((c.hom.group().order(), gens_cyclic(&c)), (5, vec![1, 2]));
        assert!(c.lattice_like);
    }

    #[test]
    fn path2d_examples() {
        let c = pdds_t_path_2d(2, 3, Variant::TwoCopy).unwrap();
        assert_eq!((c.hom.group().order(), gens_cyclic(&c)), (46, vec![9, 1]));
        assert!(!c.lattice_like);
        assert_eq!(c.tile.copies().len(), 2);
        let c = pdds_t_path_2d(2, 3, Variant::SingleCopy).unwrap();
        assert_eq!((c.hom.group().order(), gens_cyclic(&c)), (23, vec![1, 5]));
        let c = pdds_t_path_2d(1, 2, Variant::TwoCopy).unwrap();
        assert_eq!((c.hom.group().order(), gens_cyclic(&c)), (16, vec![5, 1]));
    }

    #[test]
    fn box2xk_examples() {
        let c = pdds_t_box2xk_2d(2, 1, Variant::TwoCopy).unwrap();
        assert_eq!(c.hom.group().moduli(), &[6, 6]);
        assert_eq!(gens(&c), vec![vec![0, 1], vec![1, 0]]);
        let c = pdds_t_box2xk_2d(2, 2, Variant::SingleCopy).unwrap();
        assert_eq!(
            (c.hom.group().moduli(), gens_cyclic(&c)),
            (&[24u64][..], vec![3, 4])
        );
        let c = pdds_t_box2xk_2d(2, 4, Variant::SingleCopy).unwrap();
        assert_eq!(c.hom.group().moduli(), &[3, 12]);
        assert_eq!(gens(&c), vec![vec![1, 2], vec![0, 1]]);
        let c = pdds_t_box2xk_2d(3, 3, Variant::SingleCopy).unwrap();
        assert_eq!(c.hom.group().moduli(), &[2, 24]);
        assert_eq!(gens(&c), vec![vec![1, 3], vec![1, 2]]);
    }

    #[test]
    fn box2xk_five_five_needs_the_swapped_candidate() {
        let c = pdds_t_box2xk_2d(5, 5, Variant::SingleCopy).unwrap();
        assert_eq!(c.hom.group().moduli(), &[2, 60]);
        assert_eq!(gens(&c), vec![vec![0, 5], vec![1, 3]]);
    }

    #[test]
    fn square_examples() {
        let c = pdds1_square(0).unwrap();
        assert_eq!((c.hom.group().order(), gens_cyclic(&c)), (12, vec![2, 3]));
        let c = pdds1_square(1).unwrap();
        assert_eq!(gens_cyclic(&c), vec![6, 9, 7, 5, 17]);
        let c = pdds1_square(2).unwrap();
        assert_eq!(gens_cyclic(&c), vec![10, 15, 11, 12, 9, 8, 28, 29]);
        assert_eq!(c.tile.shape().len(), 60);
    }

    #[test]
    fn q3_table_entries() {
        let c = pdds1_q3().unwrap();
        let phi = |p: &[i64]| {
            phi_eval(&c.hom, &Point::new(p))
                .unwrap()
                .residues()
                .to_vec()
        };
        assert_eq!(phi(&[1, 1, 1]), vec![1, 0, 0]);
        assert_eq!(phi(&[-1, 0, 0]), vec![1, 1, 1]);
        assert_eq!(phi(&[1, 1, 2]), vec![1, 0, 1]);
        assert_eq!(c.tile.shape().len(), 32);
    }

    #[test]
    fn minkowski_and_nonlattice() {
        let c = minkowski_p2().unwrap();
        assert_eq!(c.tile.shape().len(), 38);
        assert_eq!(gens_cyclic(&c)[1], 11);
        let c = nonlattice_p2_example().unwrap();
        assert_eq!(c.tile.shape().len(), 32);
        assert!(!c.lattice_like);
        assert_eq!(torus_periods(&c.hom).dims(), &[8, 8]);
        for p in [[0, 0], [1, 0], [0, 1]] {
            assert!(c.tile.shape().contains(&Point::new(&p)));
        }
    }

    #[test]
    fn labels_are_unique_nearest_vertices() {
        let all = [
            pdds1_q3().unwrap(),
            minkowski_p2().unwrap(),
            nonlattice_p2_example().unwrap(),
            pdds_t_path_2d(3, 2, Variant::TwoCopy).unwrap(),
            pdds_t_box2xk_2d(2, 3, Variant::TwoCopy).unwrap(),
        ];
        for c in &all {
            for l in c.tile.labels() {
                let copy = &c.tile.copies()[l.component];
                let d = lee_distance(&l.v, &l.device, None).unwrap();
                assert!(d <= c.t as u64);
                let ties = copy
                    .iter()
                    .filter(|w| lee_distance(&l.v, w, None).unwrap() <= d)
                    .count();
                assert_eq!(ties, 1);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        for c in [pdds1_q3().unwrap(), nonlattice_p2_example().unwrap()] {
            let js = serde_json::to_string(&c).unwrap();
            let back: Construction = serde_json::from_str(&js).unwrap();
            assert_eq!(back, c);
        }
        let js = serde_json::to_string(&pdds1_square(0).unwrap()).unwrap();
        let broken = js.replace(r#""generators":[[2],[3]]"#, r#""generators":[[2],[2]]"#);
        assert!(serde_json::from_str::<Construction>(&broken).is_err());
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(pdds1_path(1, 3).is_err());
        assert!(pdds_t_path_2d(0, 3, Variant::SingleCopy).is_err());
        assert!(pdds_t_box2xk_2d(1, 0, Variant::TwoCopy).is_err());
    }
}
