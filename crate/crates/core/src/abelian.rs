//! Finite Abelian groups written as products of cyclic groups, the map
//! `Phi(a) = sum a_i g_i` from `Z^n`, and lattice quotients.

use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PddsError, Result};
use crate::lattice::{Point, Shape, TorusDims};

/// `Z_{m1} + ... + Z_{mk}`, kept in the presentation it was given in.
/// [`AbelianGroup::canonical`] yields the invariant-factor form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AbelianGroup {
    moduli: Vec<u64>,
}

/// Residues of an element, each reduced below its modulus.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    residues: Vec<u64>,
}

impl GroupElement {
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.residues)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.residues.serialize(s)
    }
}

impl AbelianGroup {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.contains(&0) {
            return Err(PddsError::InvalidModulus(0));
        }
        let g = AbelianGroup { moduli };
        g.checked_order()?;
        Ok(g)
    }

    /// Accepts signed input, as read from JSON or the command line.
    pub fn from_signed(moduli: &[i64]) -> Result<Self> {
        if let Some(&bad) = moduli.iter().find(|&&m| m < 1) {
            return Err(PddsError::InvalidModulus(bad));
        }
        Self::new(moduli.iter().map(|&m| m as u64).collect())
    }

    pub fn cyclic(m: u64) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    fn checked_order(&self) -> Result<u64> {
        self.moduli
            .iter()
            .try_fold(1u64, |acc, &m| acc.checked_mul(m))
            .ok_or(PddsError::Overflow("group order"))
    }

    pub fn order(&self) -> u64 {
        self.moduli.iter().product()
    }

    /// `d1 | d2 | ... | dk` with every `di > 1`; empty for the trivial group.
    pub fn invariant_factors(&self) -> Vec<u64> {
        // exponents of each prime, one entry per cyclic factor
        let mut by_prime: Vec<(u64, Vec<u32>)> = Vec::new();
        for &m in &self.moduli {
            for (p, e) in factorize(m) {
                match by_prime.iter_mut().find(|(q, _)| *q == p) {
                    Some((_, v)) => v.push(e),
                    None => by_prime.push((p, vec![e])),
                }
            }
        }
        let width = by_prime.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut factors = vec![1u64; width];
        for (p, mut exps) in by_prime {
            exps.sort_unstable_by(|a, b| b.cmp(a));
            // largest exponent goes to the largest factor
            for (j, e) in exps.into_iter().enumerate() {
                factors[width - 1 - j] *= p.pow(e);
            }
        }
        factors
    }

    pub fn canonical(&self) -> AbelianGroup {
        AbelianGroup {
            moduli: self.invariant_factors(),
        }
    }

    pub fn is_isomorphic(&self, other: &AbelianGroup) -> bool {
        self.invariant_factors() == other.invariant_factors()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            residues: vec![0; self.moduli.len()],
        }
    }

    /// Validates an element that is expected to be reduced already.
    pub fn element(&self, residues: Vec<u64>) -> Result<GroupElement> {
        if residues.len() != self.moduli.len()
            || residues.iter().zip(&self.moduli).any(|(r, m)| r >= m)
        {
            return Err(PddsError::ElementMismatch {
                residues,
                moduli: self.moduli.clone(),
            });
        }
        Ok(GroupElement { residues })
    }

    /// Reduces arbitrary integers into an element.
    pub fn reduce(&self, values: &[i64]) -> Result<GroupElement> {
        if values.len() != self.moduli.len() {
            return Err(PddsError::DimensionMismatch {
                expected: self.moduli.len(),
                found: values.len(),
            });
        }
        Ok(GroupElement {
            residues: values
                .iter()
                .zip(&self.moduli)
                .map(|(&v, &m)| (v as i128).rem_euclid(m as i128) as u64)
                .collect(),
        })
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            residues: a
                .residues
                .iter()
                .zip(&b.residues)
                .zip(&self.moduli)
                .map(|((x, y), m)| ((*x as u128 + *y as u128) % *m as u128) as u64)
                .collect(),
        }
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement {
            residues: a
                .residues
                .iter()
                .zip(&self.moduli)
                .map(|(x, m)| (m - x) % m)
                .collect(),
        }
    }

    pub fn scale(&self, a: &GroupElement, k: i64) -> GroupElement {
        GroupElement {
            residues: a
                .residues
                .iter()
                .zip(&self.moduli)
                .map(|(x, m)| {
                    let m = *m as i128;
                    ((*x as i128 * (k as i128).rem_euclid(m)) % m) as u64
                })
                .collect(),
        }
    }

    /// Smallest `p >= 1` with `p * a = 0`.
    pub fn element_order(&self, a: &GroupElement) -> u64 {
        a.residues
            .iter()
            .zip(&self.moduli)
            .map(|(r, m)| m / gcd(*r, *m))
            .fold(1, lcm)
    }

    /// Mixed-radix rank; the last factor varies fastest, so ranks follow
    /// lexicographic order of residues.
    pub fn rank(&self, a: &GroupElement) -> u64 {
        a.residues
            .iter()
            .zip(&self.moduli)
            .fold(0, |acc, (r, m)| acc * m + r)
    }

    pub fn unrank(&self, mut rank: u64) -> GroupElement {
        let mut residues = vec![0; self.moduli.len()];
        for (slot, m) in residues.iter_mut().zip(&self.moduli).rev() {
            *slot = rank % m;
            rank /= m;
        }
        GroupElement { residues }
    }

    /// All elements in lexicographic residue order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order()).map(move |r| self.unrank(r))
    }
}

impl fmt::Debug for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.moduli.is_empty() {
            return write!(f, "Z_1");
        }
        for (i, m) in self.moduli.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "Z_{m}")?;
        }
        Ok(())
    }
}

impl Serialize for AbelianGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.moduli.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AbelianGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<i64>::deserialize(d)?;
        AbelianGroup::from_signed(&raw).map_err(serde::de::Error::custom)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// The map `Z^n -> G` sending `e_i` to `generators[i]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Homomorphism {
    group: AbelianGroup,
    generators: Vec<GroupElement>,
}

impl Homomorphism {
    pub fn new(group: AbelianGroup, generators: Vec<GroupElement>) -> Result<Self> {
        if generators.is_empty() {
            return Err(PddsError::ZeroDimension);
        }
        for g in &generators {
            group.element(g.residues.clone())?;
        }
        Ok(Homomorphism { group, generators })
    }

    /// Builds from raw moduli and unreduced generator coordinates.
    pub fn from_raw(moduli: &[i64], generators: &[Vec<i64>]) -> Result<Self> {
        let group = AbelianGroup::from_signed(moduli)?;
        let gens = generators
            .iter()
            .map(|g| group.reduce(g))
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, gens)
    }

    /// Convenience for cyclic targets: `Z_m` with `e_i -> g_i`.
    pub fn cyclic(m: u64, gens: &[i64]) -> Result<Self> {
        Self::from_raw(
            &[m as i64],
            &gens.iter().map(|&g| vec![g]).collect::<Vec<_>>(),
        )
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Number of coordinates of the source lattice.
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// `Phi(p)` as a mixed-radix rank, without allocating an element.
    pub fn rank_of(&self, p: &[i64]) -> Result<u64> {
        if p.len() != self.dim() {
            return Err(PddsError::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        let mut rank = 0u64;
        for (j, &m) in self.group.moduli.iter().enumerate() {
            if m <= u32::MAX as u64 {
                let mut acc = 0u64;
                for (a, g) in p.iter().zip(&self.generators) {
                    acc = (acc + a.rem_euclid(m as i64) as u64 * g.residues[j]) % m;
                }
                rank = rank * m + acc;
                continue;
            }
            let m = m as i128;
            let mut acc = 0i128;
            for (a, g) in p.iter().zip(&self.generators) {
                acc = (acc + (*a as i128).rem_euclid(m) * g.residues[j] as i128) % m;
            }
            rank = rank * m as u64 + acc as u64;
        }
        Ok(rank)
    }
}

#[derive(Serialize, Deserialize)]
struct HomJson {
    moduli: Vec<i64>,
    generators: Vec<Vec<i64>>,
}

impl Serialize for Homomorphism {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HomJson {
            moduli: self.group.moduli.iter().map(|&m| m as i64).collect(),
            generators: self
                .generators
                .iter()
                .map(|g| g.residues.iter().map(|&r| r as i64).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Homomorphism {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = HomJson::deserialize(d)?;
        Homomorphism::from_raw(&raw.moduli, &raw.generators).map_err(serde::de::Error::custom)
    }
}

/// `Phi(p) = sum p_i g_i`.
pub fn phi_eval(hom: &Homomorphism, p: &Point) -> Result<GroupElement> {
    let rank = hom.rank_of(p)?;
    Ok(hom.group.unrank(rank))
}

pub fn kernel_member(hom: &Homomorphism, p: &Point) -> Result<bool> {
    Ok(hom.rank_of(p)? == 0)
}

/// Outcome of [`check_bijection`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BijectionCheck {
    Ok,
    /// First pair in canonical scan order with `Phi(u) = Phi(v)`.
    Collision {
        u: Point,
        v: Point,
    },
    /// Least element (in residue order) missed by `Phi` on `V`.
    NotSurjective {
        missing: GroupElement,
    },
}

impl BijectionCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, BijectionCheck::Ok)
    }
}

/// Is `Phi` restricted to `V` a bijection onto the group?
pub fn check_bijection(hom: &Homomorphism, v: &Shape) -> Result<BijectionCheck> {
    check_bijection_points(hom, v.vertices())
}

/// Same as [`check_bijection`] on an arbitrary list, where repeated points
/// count as collisions.
pub fn check_bijection_points(hom: &Homomorphism, pts: &[Point]) -> Result<BijectionCheck> {
    let order = hom.group.order();
    let mut seen: FxHashMap<u64, usize> = FxHashMap::default();
    for (i, p) in pts.iter().enumerate() {
        let r = hom.rank_of(p)?;
        if let Some(&j) = seen.get(&r) {
            return Ok(BijectionCheck::Collision {
                u: pts[j].clone(),
                v: p.clone(),
            });
        }
        seen.insert(r, i);
    }
    if (seen.len() as u64) < order {
        let missing = (0..order).find(|r| !seen.contains_key(r)).unwrap_or(0);
        return Ok(BijectionCheck::NotSurjective {
            missing: hom.group.unrank(missing),
        });
    }
    Ok(BijectionCheck::Ok)
}

/// Order of each generator; `p_i e_i` then lies in the kernel.
pub fn torus_periods(hom: &Homomorphism) -> TorusDims {
    let dims = hom
        .generators
        .iter()
        .map(|g| hom.group.element_order(g) as i64)
        .collect();
    TorusDims::new(dims).expect("element orders are positive")
}

/// Integer partitions of `n`, parts descending, largest first part first.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            cur.push(part);
            rec(n - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// One group per isomorphism class of order `m`, in invariant-factor form.
pub fn enumerate_abelian_groups(m: u64) -> Result<Vec<AbelianGroup>> {
    if m == 0 {
        return Err(PddsError::InvalidModulus(0));
    }
    let mut acc: Vec<Vec<u64>> = vec![Vec::new()];
    for (p, a) in factorize(m) {
        let mut next = Vec::new();
        for factors in &acc {
            for part in partitions(a) {
                // part[j] is the exponent of p in the j-th largest factor
                let width = factors.len().max(part.len());
                let mut merged = vec![1u64; width];
                for (j, f) in factors.iter().rev().enumerate() {
                    merged[width - 1 - j] *= f;
                }
                for (j, e) in part.iter().enumerate() {
                    merged[width - 1 - j] *= p.pow(*e);
                }
                next.push(merged);
            }
        }
        acc = next;
    }
    Ok(acc
        .into_iter()
        .map(|moduli| AbelianGroup { moduli })
        .collect())
}

/// Deterministic set `K` holding exactly one of `g, -g` for every element of
/// order greater than 2, scanned in lexicographic residue order.
pub fn molnar_k_set(group: &AbelianGroup) -> Vec<GroupElement> {
    let mut taken: rustc_hash::FxHashSet<u64> = Default::default();
    let mut out = Vec::new();
    for g in group.elements() {
        let neg = group.neg(&g);
        if neg == g || taken.contains(&group.rank(&neg)) {
            continue;
        }
        taken.insert(group.rank(&g));
        out.push(g);
    }
    out
}

/// An integer matrix whose rows generate a lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerMatrix {
    pub rows: Vec<Vec<i64>>,
}

impl IntegerMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        if let Some(first) = rows.first() {
            if let Some(r) = rows.iter().find(|r| r.len() != first.len()) {
                return Err(PddsError::DimensionMismatch {
                    expected: first.len(),
                    found: r.len(),
                });
            }
        }
        Ok(IntegerMatrix { rows })
    }

    fn square_size(&self) -> Result<usize> {
        let n = self.rows.len();
        let cols = self.rows.first().map_or(0, Vec::len);
        if cols != n || self.rows.iter().any(|r| r.len() != n) {
            return Err(PddsError::NotSquare { rows: n, cols });
        }
        Ok(n)
    }

    /// Fraction-free Gaussian elimination (Bareiss).
    pub fn determinant(&self) -> Result<i128> {
        let n = self.square_size()?;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<Vec<i128>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&i| a[i][k] != 0) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j]
                        .checked_mul(a[k][k])
                        .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                        .ok_or(PddsError::Overflow("determinant"))?;
                    a[i][j] = num / prev;
                }
            }
            prev = a[k][k];
        }
        Ok(sign * a[n - 1][n - 1])
    }
}

/// Diagonal of the Smith normal form, each entry nonnegative and dividing
/// the next.
pub fn smith_diagonal(m: &IntegerMatrix) -> Result<Vec<i128>> {
    let n = m.square_size()?;
    let mut a: Vec<Vec<i128>> = m
        .rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let ovf = || PddsError::Overflow("Smith normal form");
    for k in 0..n {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(k) {
                for (j, &x) in row.iter().enumerate().skip(k) {
                    if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return Err(PddsError::SingularMatrix);
            };
            a.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            let p = a[k][k];
            let mut clean = true;
            for i in k + 1..n {
                let q = a[i][k] / p;
                if q != 0 {
                    for j in k..n {
                        let v = q.checked_mul(a[k][j]).ok_or_else(ovf)?;
                        a[i][j] = a[i][j].checked_sub(v).ok_or_else(ovf)?;
                    }
                }
                clean &= a[i][k] == 0;
            }
            for j in k + 1..n {
                let q = a[k][j] / p;
                if q != 0 {
                    for row in a.iter_mut().skip(k) {
                        let v = q.checked_mul(row[k]).ok_or_else(ovf)?;
                        row[j] = row[j].checked_sub(v).ok_or_else(ovf)?;
                    }
                }
                clean &= a[k][j] == 0;
            }
            if !clean {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (k + 1..n).find(|&i| (k + 1..n).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in k..n {
                        a[k][j] = a[k][j].checked_add(a[i][j]).ok_or_else(ovf)?;
                    }
                }
                None => break,
            }
        }
    }
    Ok((0..n).map(|i| a[i][i].abs()).collect())
}

/// `Z^n / L` where `L` is spanned by the rows of `basis`.
pub fn smith_quotient(basis: &IntegerMatrix) -> Result<AbelianGroup> {
    if basis.determinant()? == 0 {
        return Err(PddsError::SingularMatrix);
    }
    let diag = smith_diagonal(basis)?;
    let moduli = diag
        .into_iter()
        .filter(|&d| d != 1)
        .map(|d| u64::try_from(d).map_err(|_| PddsError::Overflow("quotient order")))
        .collect::<Result<Vec<_>>>()?;
    Ok(AbelianGroup::new(moduli)?.canonical())
}
