//! Nearest-device lookup through the syndrome `Phi(x)`.
//!
//! Every vertex `x` differs from exactly one tile vertex `v` by a kernel
//! element `z`, found from `Phi(x) = Phi(v)`; the device serving `x` is the
//! device of `v` moved by `z`.

use serde::Serialize;

use crate::abelian::{check_bijection, BijectionCheck, Homomorphism};
use crate::constructions::Tile;
use crate::error::{PddsError, Result};
use crate::lattice::{lee_distance, Point, TorusDims, TorusIndex};
use crate::verifier::check_kernel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeEntry {
    pub tile_vertex: Point,
    pub component: usize,
    pub device: Point,
}

/// Tile labels keyed by the rank of `Phi(v)`.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    hom: Homomorphism,
    entries: Vec<SyndromeEntry>,
    /// Least vertex of each H copy of the tile.
    copy_least: Vec<Point>,
}

impl SyndromeTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hom(&self) -> &Homomorphism {
        &self.hom
    }

    pub fn entry(&self, rank: u64) -> &SyndromeEntry {
        &self.entries[rank as usize]
    }
}

pub fn build_syndrome_table(tile: &Tile, hom: &Homomorphism) -> Result<SyndromeTable> {
    match check_bijection(hom, tile.shape())? {
        BijectionCheck::Ok => {}
        other => return Err(PddsError::NotBijective(format!("{other:?}"))),
    }
    let mut slots: Vec<Option<SyndromeEntry>> = vec![None; hom.group().order() as usize];
    for l in tile.labels() {
        slots[hom.rank_of(&l.v)? as usize] = Some(SyndromeEntry {
            tile_vertex: l.v.clone(),
            component: l.component,
            device: l.device.clone(),
        });
    }
    Ok(SyndromeTable {
        hom: hom.clone(),
        entries: slots
            .into_iter()
            .map(|e| e.expect("bijection fills every slot"))
            .collect(),
        copy_least: tile
            .copies()
            .iter()
            .map(|c| c.min().expect("copies are nonempty").clone())
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decoded {
    pub device: Point,
    /// Image of the least vertex of the serving H copy.
    pub component_anchor: Point,
    pub distance: u64,
}

/// Device, component and distance for vertex `x` of `torus`.
pub fn decode(table: &SyndromeTable, x: &Point, torus: &TorusDims) -> Result<Decoded> {
    check_kernel(&table.hom, torus)?;
    let x = torus.reduce(x)?;
    let e = &table.entries[table.hom.rank_of(&x)? as usize];
    let z = x.sub(&e.tile_vertex)?;
    let device = torus.reduce(&e.device.add(&z)?)?;
    let component_anchor = torus.reduce(&table.copy_least[e.component].add(&z)?)?;
    let distance = lee_distance(&x, &device, Some(torus))?;
    Ok(Decoded {
        device,
        component_anchor,
        distance,
    })
}

/// A table bound to one torus, working on vertex indices.
#[derive(Clone, Debug)]
pub struct Decoder {
    table: SyndromeTable,
    ix: TorusIndex,
    /// `phi[j][a][c]`: residue `j` of `Phi(c e_a)`, for `0 <= c < dims[a]`.
    phi: Option<Vec<Vec<Vec<u64>>>>,
    /// Per syndrome rank: device minus tile vertex, then the copy's least
    /// vertex minus tile vertex.
    shifts: Vec<(Vec<i64>, Vec<i64>)>,
    distances: Vec<u64>,
}

/// [`Decoded`] in vertex indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodedIndex {
    pub device: u64,
    pub component_anchor: u64,
    pub distance: u64,
}

/// Largest per-axis lookup table the decoder builds.
const PHI_TABLE_LIMIT: u64 = 1 << 22;

impl Decoder {
    pub fn new(table: SyndromeTable, torus: &TorusDims, vertex_limit: u64) -> Result<Self> {
        check_kernel(&table.hom, torus)?;
        let ix = TorusIndex::new(torus, vertex_limit)?;
        let group = table.hom.group();
        let table_size: u64 =
            torus.dims().iter().map(|&d| d as u64).sum::<u64>() * group.moduli().len() as u64;
        let small_moduli = group.moduli().iter().all(|&m| m <= u32::MAX as u64);
        let phi = (small_moduli && table_size <= PHI_TABLE_LIMIT).then(|| {
            group
                .moduli()
                .iter()
                .enumerate()
                .map(|(j, &m)| {
                    torus
                        .dims()
                        .iter()
                        .zip(table.hom.generators())
                        .map(|(&d, g)| (0..d as u64).map(|c| c * g.residues()[j] % m).collect())
                        .collect()
                })
                .collect()
        });
        let mut shifts = Vec::with_capacity(table.len());
        let mut distances = Vec::with_capacity(table.len());
        for e in &table.entries {
            let least = &table.copy_least[e.component];
            let dev: Vec<i64> = e
                .device
                .iter()
                .zip(e.tile_vertex.iter())
                .map(|(a, b)| a - b)
                .collect();
            let anc: Vec<i64> = least
                .iter()
                .zip(e.tile_vertex.iter())
                .map(|(a, b)| a - b)
                .collect();
            distances.push(lee_distance(
                &Point::new(&dev),
                &Point::origin(dev.len()),
                Some(torus),
            )?);
            shifts.push((dev, anc));
        }
        Ok(Decoder {
            table,
            ix,
            phi,
            shifts,
            distances,
        })
    }

    pub fn index(&self) -> &TorusIndex {
        &self.ix
    }

    fn rank(&self, xp: &Point) -> u64 {
        let Some(phi) = &self.phi else {
            return self.table.hom.rank_of(xp).expect("dimension checked");
        };
        let moduli = self.table.hom.group().moduli();
        let mut rank = 0;
        for (j, axes) in phi.iter().enumerate() {
            let m = moduli[j];
            let mut acc = 0;
            for (a, row) in axes.iter().enumerate() {
                acc += row[xp[a] as usize];
                if acc >= m {
                    acc -= m;
                }
            }
            rank = rank * m + acc;
        }
        rank
    }

    /// Index of `xp + shift`, for reduced `xp`.
    fn shifted(&self, xp: &Point, shift: &[i64]) -> u64 {
        let dims = self.ix.dims();
        let strides = self.ix.strides();
        let mut v = 0;
        for a in 0..dims.len() {
            let mut c = xp[a] + shift[a];
            if c < 0 || c >= dims[a] {
                c = c.rem_euclid(dims[a]);
            }
            v += c as u64 * strides[a];
        }
        v
    }

    pub fn decode_index(&self, x: u64) -> DecodedIndex {
        let xp = self.ix.point(x);
        let r = self.rank(&xp) as usize;
        let (dev, anc) = &self.shifts[r];
        DecodedIndex {
            device: self.shifted(&xp, dev),
            component_anchor: self.shifted(&xp, anc),
            distance: self.distances[r],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::torus_periods;
    use crate::constructions::{minkowski_p2, pdds1_q3, pdds1_square, Tile};
    use crate::lattice::{box_shape, BoxSpec};
    use crate::verifier::{instantiate_on_torus, nearest_assignment};

    #[test]
    fn table_sizes() {
        let c = pdds1_q3().unwrap();
        assert_eq!(build_syndrome_table(&c.tile, &c.hom).unwrap().len(), 32);
        let c = minkowski_p2().unwrap();
        assert_eq!(build_syndrome_table(&c.tile, &c.hom).unwrap().len(), 38);
        let dot = Tile::from_copies(vec![box_shape(&BoxSpec::new(vec![1]).unwrap()).unwrap()], 0)
            .unwrap();
        let trivial = Homomorphism::from_raw(&[1], &[vec![0]]).unwrap();
        assert_eq!(build_syndrome_table(&dot, &trivial).unwrap().len(), 1);
    }

    #[test]
    fn q3_examples() {
        let c = pdds1_q3().unwrap();
        let table = build_syndrome_table(&c.tile, &c.hom).unwrap();
        let torus = TorusDims::new(vec![4, 4, 4]).unwrap();
        let d = decode(&table, &Point::new(&[2, 0, 0]), &torus).unwrap();
        assert_eq!(d.device, Point::new(&[1, 0, 0]));
        assert_eq!(d.distance, 1);
        for dev in c.tile.copies()[0].iter() {
            let d = decode(&table, dev, &torus).unwrap();
            assert_eq!((d.device.clone(), d.distance), (dev.clone(), 0));
        }
        let bad = TorusDims::new(vec![3, 4, 4]).unwrap();
        assert!(matches!(
            decode(&table, &Point::origin(3), &bad),
            Err(PddsError::KernelViolation { .. })
        ));
    }

    #[test]
    fn square_zero_matches_the_search_oracle() {
        let c = pdds1_square(0).unwrap();
        let torus = torus_periods(&c.hom);
        let inst = instantiate_on_torus(&c, Some(&torus)).unwrap();
        let table = build_syndrome_table(&c.tile, &c.hom).unwrap();
        let dec = Decoder::new(table.clone(), &torus, u64::MAX).unwrap();
        let mut hits = 0;
        nearest_assignment(&inst, u64::MAX, |a| {
            let got = dec.decode_index(a.vertex);
            assert_eq!(Some(got.device), a.device);
            assert_eq!(got.distance, a.distance as u64);
            assert_eq!(got.component_anchor, inst.anchor_index(a.component));
            hits += 1;
        })
        .unwrap();
        assert_eq!(hits, 24);
        let d = decode(&table, &Point::new(&[4, 2]), &torus).unwrap();
        let idx = dec.index().index(&Point::new(&[4, 2]));
        assert_eq!(dec.index().point(dec.decode_index(idx).device), d.device);
    }

    #[test]
    fn decoding_commutes_with_kernel_translation() {
        let c = pdds1_q3().unwrap();
        let table = build_syndrome_table(&c.tile, &c.hom).unwrap();
        let torus = TorusDims::new(vec![8, 8, 8]).unwrap();
        let kappa = Point::new(&[4, 0, 0]);
        assert!(crate::abelian::kernel_member(&c.hom, &kappa).unwrap());
        for x in [[0, 0, 0], [3, 5, 1], [7, 7, 7]] {
            let x = Point::new(&x);
            let a = decode(&table, &x, &torus).unwrap();
            let b = decode(&table, &x.add(&kappa).unwrap(), &torus).unwrap();
            assert_eq!(
                torus.reduce(&a.device.add(&kappa).unwrap()).unwrap(),
                b.device
            );
            assert_eq!(a.distance, b.distance);
        }
    }
}
