//! Finite groups of order at most 48 as verified multiplication tables.
//!
//! Tables come from generators (elements labelled in shortlex order of their
//! least generator word) or from explicit closed element lists. Isomorphisms
//! are found by backtracking on generator images and certified as label
//! bijections.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::weierstrass::WIso;

/// Largest group order handled by the structure catalog.
pub const MAX_ORDER: usize = 48;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupTable {
    pub elements: Vec<String>,
    pub mul: Vec<Vec<usize>>,
    pub id: usize,
}

impl GroupTable {
    /// Builds a table, checking closure, identity, inverses and
    /// associativity exhaustively.
    pub fn new(elements: Vec<String>, mul: Vec<Vec<usize>>) -> Result<GroupTable> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::Precondition("empty group".into()));
        }
        if mul.len() != n
            || mul
                .iter()
                .any(|row| row.len() != n || row.iter().any(|&x| x >= n))
        {
            return Err(Error::NotClosed(
                "table is not an n x n table on the elements".into(),
            ));
        }
        let id = (0..n)
            .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or_else(|| Error::Precondition("no identity element".into()))?;
        for a in 0..n {
            if !(0..n).any(|b| mul[a][b] == id && mul[b][a] == id) {
                return Err(Error::Precondition(format!(
                    "{} has no inverse",
                    elements[a]
                )));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a][b];
                for c in 0..n {
                    if mul[ab][c] != mul[a][mul[b][c]] {
                        return Err(Error::Precondition(format!(
                            "not associative at ({}, {}, {})",
                            elements[a], elements[b], elements[c]
                        )));
                    }
                }
            }
        }
        Ok(GroupTable { elements, mul, id })
    }

    /// Closure of `generators` under `op`, starting from `identity`.
    /// Elements are numbered breadth-first, multiplying by generators on the
    /// right in the given order, so labels follow shortlex generator words.
    pub fn from_generators<T: Clone + Eq + Hash>(
        identity: T,
        generators: &[T],
        op: impl Fn(&T, &T) -> T,
        label: impl Fn(&T) -> String,
    ) -> Result<(GroupTable, Vec<T>)> {
        let mut elems = vec![identity.clone()];
        let mut index: HashMap<T, usize> = HashMap::from([(identity, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in generators {
                let x = op(&elems[i], g);
                if !index.contains_key(&x) {
                    if elems.len() >= MAX_ORDER * 8 {
                        return Err(Error::Unsupported("generated group is too large".into()));
                    }
                    index.insert(x.clone(), elems.len());
                    queue.push_back(elems.len());
                    elems.push(x);
                }
            }
        }
        let table = Self::from_elements(&elems, op, label)?;
        Ok((table, elems))
    }

    /// Table of an explicit element list; errors if the list is not closed.
    pub fn from_elements<T: Clone + Eq + Hash>(
        elems: &[T],
        op: impl Fn(&T, &T) -> T,
        label: impl Fn(&T) -> String,
    ) -> Result<GroupTable> {
        let index: HashMap<&T, usize> = elems.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut mul = vec![vec![0; elems.len()]; elems.len()];
        for (i, a) in elems.iter().enumerate() {
            for (j, b) in elems.iter().enumerate() {
                let c = op(a, b);
                mul[i][j] = *index.get(&c).ok_or_else(|| {
                    Error::NotClosed(format!("{} * {} = {}", label(a), label(b), label(&c)))
                })?;
            }
        }
        GroupTable::new(elems.iter().map(label).collect(), mul)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order())
            .find(|&b| self.mul[a][b] == self.id)
            .expect("verified inverse")
    }

    pub fn pow(&self, a: usize, e: usize) -> usize {
        (0..e).fold(self.id, |acc, _| self.mul[acc][a])
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.id {
            x = self.mul[x][a];
            k += 1;
        }
        k
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == label)
    }

    /// Element order to number of elements of that order.
    pub fn order_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for a in 0..self.order() {
            *h.entry(self.element_order(a)).or_insert(0) += 1;
        }
        h
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..a).all(|b| self.mul[a][b] == self.mul[b][a]))
    }

    pub fn center(&self) -> Vec<usize> {
        (0..self.order())
            .filter(|&a| (0..self.order()).all(|b| self.mul[a][b] == self.mul[b][a]))
            .collect()
    }

    /// Sorted subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[self.id] = true;
        let mut queue = VecDeque::from([self.id]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul[x][g];
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }

    pub fn is_subgroup(&self, h: &[usize]) -> bool {
        let mut member = vec![false; self.order()];
        for &x in h {
            member[x] = true;
        }
        member[self.id]
            && h.iter()
                .all(|&a| h.iter().all(|&b| member[self.mul[a][self.inverse(b)]]))
    }

    pub fn is_normal(&self, h: &[usize]) -> bool {
        if !self.is_subgroup(h) {
            return false;
        }
        let mut member = vec![false; self.order()];
        for &x in h {
            member[x] = true;
        }
        (0..self.order()).all(|g| {
            let gi = self.inverse(g);
            h.iter().all(|&x| member[self.mul[self.mul[g][x]][gi]])
        })
    }

    /// Restriction of the table to a subgroup, keeping labels and order.
    pub fn subgroup(&self, h: &[usize]) -> Result<GroupTable> {
        let mut h = h.to_vec();
        h.sort_unstable();
        h.dedup();
        if !self.is_subgroup(&h) {
            return Err(Error::NotClosed("subset is not a subgroup".into()));
        }
        let pos: HashMap<usize, usize> = h.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mul = h
            .iter()
            .map(|&a| h.iter().map(|&b| pos[&self.mul[a][b]]).collect())
            .collect();
        GroupTable::new(h.iter().map(|&a| self.elements[a].clone()).collect(), mul)
    }

    /// Left cosets `gH`, each sorted, ordered by least element.
    pub fn cosets(&self, h: &[usize]) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; self.order()];
        let mut out = Vec::new();
        for g in 0..self.order() {
            if assigned[g] {
                continue;
            }
            let mut c: Vec<usize> = h.iter().map(|&x| self.mul[g][x]).collect();
            c.sort_unstable();
            for &x in &c {
                assigned[x] = true;
            }
            out.push(c);
        }
        out
    }

    pub fn index(&self, h: &[usize]) -> Result<usize> {
        if !self.is_subgroup(h) {
            return Err(Error::NotClosed("subset is not a subgroup".into()));
        }
        Ok(self.order() / h.len())
    }

    /// `G/N` on cosets labelled by their least element.
    pub fn quotient(&self, n: &[usize]) -> Result<GroupTable> {
        if !self.is_normal(n) {
            return Err(Error::Precondition(
                "quotient by a non-normal subset".into(),
            ));
        }
        let cosets = self.cosets(n);
        let mut which = vec![0; self.order()];
        for (i, c) in cosets.iter().enumerate() {
            for &x in c {
                which[x] = i;
            }
        }
        let mul = cosets
            .iter()
            .map(|a| cosets.iter().map(|b| which[self.mul[a[0]][b[0]]]).collect())
            .collect();
        let labels = cosets
            .iter()
            .map(|c| format!("[{}]", self.elements[c[0]]))
            .collect();
        GroupTable::new(labels, mul)
    }

    pub fn commutator_subgroup(&self) -> Vec<usize> {
        let mut comms = Vec::new();
        for a in 0..self.order() {
            for b in 0..self.order() {
                let c = self.mul[self.mul[a][b]][self.mul[self.inverse(a)][self.inverse(b)]];
                comms.push(c);
            }
        }
        comms.sort_unstable();
        comms.dedup();
        self.generated(&comms)
    }

    /// All subgroups generated by at most two elements, sorted.
    pub fn small_subgroups(&self) -> Vec<Vec<usize>> {
        let mut subs = std::collections::BTreeSet::new();
        for a in 0..self.order() {
            for b in a..self.order() {
                subs.insert(self.generated(&[a, b]));
            }
        }
        subs.into_iter().collect()
    }

    /// A short generating set, greedily adding elements of largest order.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut by_order: Vec<usize> = (0..self.order()).collect();
        by_order.sort_by_key(|&a| (std::cmp::Reverse(self.element_order(a)), a));
        let mut gens = Vec::new();
        let mut span = vec![self.id];
        for a in by_order {
            if span.len() == self.order() {
                break;
            }
            if span.binary_search(&a).is_err() {
                gens.push(a);
                span = self.generated(&gens);
            }
        }
        gens
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint {
            order: self.order(),
            order_histogram: self.order_histogram(),
            center_order: self.center().len(),
            abelianization_order: self.order() / self.commutator_subgroup().len(),
        }
    }

    pub fn direct_product(&self, other: &GroupTable) -> GroupTable {
        let (n, m) = (self.order(), other.order());
        let elements = (0..n * m)
            .map(|i| format!("({},{})", self.elements[i / m], other.elements[i % m]))
            .collect();
        let mul = (0..n * m)
            .map(|i| {
                (0..n * m)
                    .map(|j| self.mul[i / m][j / m] * m + other.mul[i % m][j % m])
                    .collect()
            })
            .collect();
        GroupTable::new(elements, mul).expect("product of groups")
    }
}

impl fmt::Display for GroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "group of order {}", self.order())
    }
}

/// Isomorphism invariants reported for groups outside the catalog.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub order: usize,
    pub order_histogram: BTreeMap<usize, usize>,
    pub center_order: usize,
    pub abelianization_order: usize,
}

pub fn cyclic(n: usize) -> GroupTable {
    let mul = (0..n)
        .map(|a| (0..n).map(|b| (a + b) % n).collect())
        .collect();
    let labels = (0..n).map(|a| format!("g^{a}")).collect();
    GroupTable::new(labels, mul).expect("cyclic group")
}

/// Dihedral group of order `2n`, elements `r^a s^b`.
pub fn dihedral(n: usize) -> GroupTable {
    let code = |a: usize, b: usize| 2 * a + b;
    let mut mul = vec![vec![0; 2 * n]; 2 * n];
    for a1 in 0..n {
        for b1 in 0..2 {
            for a2 in 0..n {
                for b2 in 0..2 {
                    // r^a1 s^b1 r^a2 s^b2 = r^(a1 +- a2) s^(b1+b2)
                    let a = if b1 == 0 { a1 + a2 } else { a1 + n - a2 } % n;
                    mul[code(a1, b1)][code(a2, b2)] = code(a, (b1 + b2) % 2);
                }
            }
        }
    }
    let labels = (0..2 * n)
        .map(|i| format!("r^{}s^{}", i / 2, i % 2))
        .collect();
    GroupTable::new(labels, mul).expect("dihedral group")
}

pub fn quaternion8() -> GroupTable {
    let h = hurwitz_units();
    let q8 = h.q8();
    h.table.subgroup(&q8).expect("Q8 subgroup")
}

/// A label-bijection isomorphism `source[i] -> target[map[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoCertificate {
    pub map: Vec<usize>,
}

impl IsoCertificate {
    pub fn verify(&self, a: &GroupTable, b: &GroupTable) -> bool {
        let n = a.order();
        if b.order() != n || self.map.len() != n {
            return false;
        }
        let mut hit = vec![false; n];
        for &x in &self.map {
            if x >= n || hit[x] {
                return false;
            }
            hit[x] = true;
        }
        (0..n).all(|i| (0..n).all(|j| self.map[a.mul[i][j]] == b.mul[self.map[i]][self.map[j]]))
    }

    /// Pairs of labels, for serialization.
    pub fn labels(&self, a: &GroupTable, b: &GroupTable) -> Vec<(String, String)> {
        self.map
            .iter()
            .enumerate()
            .map(|(i, &j)| (a.elements[i].clone(), b.elements[j].clone()))
            .collect()
    }
}

/// Searches for an isomorphism `a -> b`. `None` means every candidate
/// assignment of generator images was exhausted or the invariants differ.
pub fn iso_search(a: &GroupTable, b: &GroupTable) -> Option<IsoCertificate> {
    if a.order() != b.order() || a.order_histogram() != b.order_histogram() {
        return None;
    }
    let gens = a.generating_set();
    // words: each element of a as (parent, generator index) in BFS order
    let n = a.order();
    let mut parent = vec![None; n];
    let mut order = vec![a.id];
    let mut seen = vec![false; n];
    seen[a.id] = true;
    let mut k = 0;
    while k < order.len() {
        let x = order[k];
        for (gi, &g) in gens.iter().enumerate() {
            let y = a.mul[x][g];
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, gi));
                order.push(y);
            }
        }
        k += 1;
    }
    let b_orders: Vec<usize> = (0..n).map(|x| b.element_order(x)).collect();
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| {
            let o = a.element_order(g);
            (0..n).filter(|&x| b_orders[x] == o).collect()
        })
        .collect();
    let mut images = vec![0; gens.len()];
    search(a, b, &gens, &candidates, &parent, &order, &mut images, 0)
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &GroupTable,
    b: &GroupTable,
    gens: &[usize],
    candidates: &[Vec<usize>],
    parent: &[Option<(usize, usize)>],
    order: &[usize],
    images: &mut Vec<usize>,
    depth: usize,
) -> Option<IsoCertificate> {
    if depth == gens.len() {
        let n = a.order();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        map[a.id] = b.id;
        used[b.id] = true;
        for &x in &order[1..] {
            let (p, gi) = parent[x].expect("non-identity has a parent");
            let y = b.mul[map[p]][images[gi]];
            if used[y] {
                return None;
            }
            used[y] = true;
            map[x] = y;
        }
        let cert = IsoCertificate { map };
        return cert.verify(a, b).then_some(cert);
    }
    for &c in &candidates[depth] {
        if images[..depth].contains(&c) {
            continue;
        }
        images[depth] = c;
        if let Some(cert) = search(a, b, gens, candidates, parent, order, images, depth + 1) {
            return Some(cert);
        }
    }
    None
}

/// A catalog entry: display name plus alternative descriptions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Structure {
    pub name: String,
    pub aliases: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StructureId {
    Identified {
        structure: Structure,
        certificate: IsoCertificate,
    },
    Unidentified {
        fingerprint: Fingerprint,
    },
}

impl StructureId {
    pub fn name(&self) -> Option<&str> {
        match self {
            StructureId::Identified { structure, .. } => Some(&structure.name),
            StructureId::Unidentified { .. } => None,
        }
    }

    /// Whether `name` is the identified name or one of its aliases.
    pub fn is(&self, name: &str) -> bool {
        match self {
            StructureId::Identified { structure, .. } => {
                structure.name == name || structure.aliases.iter().any(|a| a == name)
            }
            StructureId::Unidentified { .. } => false,
        }
    }
}

impl fmt::Display for StructureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureId::Identified { structure, .. } => {
                write!(f, "{}", structure.name)?;
                for a in &structure.aliases {
                    write!(f, " = {a}")?;
                }
                Ok(())
            }
            StructureId::Unidentified { fingerprint } => {
                write!(f, "unidentified (order {})", fingerprint.order)
            }
        }
    }
}

fn entry(name: &str, aliases: &[&str], g: GroupTable) -> (Structure, GroupTable) {
    (
        Structure {
            name: name.into(),
            aliases: aliases.iter().map(|s| s.to_string()).collect(),
        },
        g,
    )
}

/// The fixed catalog, cheapest candidates first.
fn catalog(order: usize) -> Vec<(Structure, GroupTable)> {
    let mut out = vec![entry(&format!("C{order}"), &[], cyclic(order))];
    let c = cyclic;
    match order {
        1 => out[0].0.aliases.push("trivial".into()),
        4 => out.push(entry("C2xC2", &["V4"], c(2).direct_product(&c(2)))),
        6 => {
            out[0].0.aliases.push("C2xC3".into());
            out.push(entry("S3", &["C3:C2", "D3"], dihedral(3)));
        }
        8 => {
            out.push(entry("C4xC2", &[], c(4).direct_product(&c(2))));
            out.push(entry(
                "C2xC2xC2",
                &[],
                c(2).direct_product(&c(2)).direct_product(&c(2)),
            ));
            out.push(entry("D4", &[], dihedral(4)));
            out.push(entry("Q8", &[], quaternion8()));
        }
        9 => out.push(entry("C3xC3", &[], c(3).direct_product(&c(3)))),
        10 => out.push(entry("D5", &[], dihedral(5))),
        12 => {
            out[0].0.aliases.push("C4xC3".into());
            out.push(entry("C2xC6", &[], c(2).direct_product(&c(6))));
            out.push(entry("D6", &["C6:C2", "C2xS3"], dihedral(6)));
            out.push(entry("A4", &[], alternating4()));
            out.push(entry("Dic3", &["C3:C4"], dicyclic3()));
        }
        16 => out.push(entry("C2xQ8", &[], c(2).direct_product(&quaternion8()))),
        18 => out.push(entry("C3xS3", &[], c(3).direct_product(&dihedral(3)))),
        24 => {
            out.push(entry("SL(2,3)", &["Q8:C3", "binary tetrahedral"], sl23()));
            out.push(entry("C2xA4", &[], c(2).direct_product(&alternating4())));
            out.push(entry("S4", &[], symmetric4()));
            out.push(entry("C3xQ8", &[], c(3).direct_product(&quaternion8())));
            out.push(entry("C2xC12", &[], c(2).direct_product(&c(12))));
        }
        48 => out.push(entry("GL(2,3)", &[], gl23().table)),
        _ => {}
    }
    out
}

/// Identifies `g` against the catalog by isomorphism search.
pub fn structure_id(g: &GroupTable) -> Result<StructureId> {
    if g.order() > MAX_ORDER {
        return Err(Error::Unsupported(format!(
            "order {} exceeds {MAX_ORDER}",
            g.order()
        )));
    }
    for (structure, model) in catalog(g.order()) {
        if let Some(certificate) = iso_search(g, &model) {
            return Ok(StructureId::Identified {
                structure,
                certificate,
            });
        }
    }
    Ok(StructureId::Unidentified {
        fingerprint: g.fingerprint(),
    })
}

fn perm_compose(p: &[u8; 4], q: &[u8; 4]) -> [u8; 4] {
    // apply q first, then p
    [
        p[q[0] as usize],
        p[q[1] as usize],
        p[q[2] as usize],
        p[q[3] as usize],
    ]
}

fn symmetric4() -> GroupTable {
    let (t, _) = GroupTable::from_generators(
        [0, 1, 2, 3],
        &[[1, 0, 2, 3], [1, 2, 3, 0]],
        perm_compose,
        |p| format!("{p:?}"),
    )
    .expect("S4");
    t
}

fn alternating4() -> GroupTable {
    let (t, _) = GroupTable::from_generators(
        [0, 1, 2, 3],
        &[[1, 2, 0, 3], [1, 0, 3, 2]],
        perm_compose,
        |p| format!("{p:?}"),
    )
    .expect("A4");
    t
}

/// `C3 : C4` with the generator of `C4` inverting `C3`.
fn dicyclic3() -> GroupTable {
    let code = |a: usize, b: usize| 4 * a + b;
    let mut mul = vec![vec![0; 12]; 12];
    for a1 in 0..3 {
        for b1 in 0..4 {
            for a2 in 0..3 {
                for b2 in 0..4 {
                    let a = if b1 % 2 == 0 { a1 + a2 } else { a1 + 3 - a2 } % 3;
                    mul[code(a1, b1)][code(a2, b2)] = code(a, (b1 + b2) % 4);
                }
            }
        }
    }
    let labels = (0..12).map(|i| format!("x^{}y^{}", i / 4, i % 4)).collect();
    GroupTable::new(labels, mul).expect("Dic3")
}

/// A 2x2 matrix over `Z/3`, entries `[a, b, c, d]` for `[[a, b], [c, d]]`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Mat2Z3(pub [u8; 4]);

impl Mat2Z3 {
    pub const IDENTITY: Mat2Z3 = Mat2Z3([1, 0, 0, 1]);

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Mat2Z3 {
        Mat2Z3([a, b, c, d].map(|x| x.rem_euclid(3) as u8))
    }

    pub fn det(&self) -> u8 {
        let [a, b, c, d] = self.0.map(u32::from);
        ((a * d + 3 - b * c % 3) % 3) as u8
    }

    pub fn is_invertible(&self) -> bool {
        self.det() != 0
    }

    pub fn mul(&self, o: &Mat2Z3) -> Mat2Z3 {
        let [a, b, c, d] = self.0.map(u32::from);
        let [e, f, g, h] = o.0.map(u32::from);
        Mat2Z3(
            [
                (a * e + b * g) % 3,
                (a * f + b * h) % 3,
                (c * e + d * g) % 3,
                (c * f + d * h) % 3,
            ]
            .map(|x| x as u8),
        )
    }
}

impl fmt::Display for Mat2Z3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[{a} {b}; {c} {d}]")
    }
}

/// `GL(2,3)` with its upper-triangular and `(1 *; 0 *)` subgroups marked.
#[derive(Clone, Debug, Serialize)]
pub struct Gl23 {
    pub table: GroupTable,
    pub matrices: Vec<Mat2Z3>,
    pub gamma0: Vec<usize>,
    pub gamma1: Vec<usize>,
}

pub fn gl23() -> Gl23 {
    let gens = [
        Mat2Z3::new(1, 1, 0, 1),
        Mat2Z3::new(1, 0, 1, 1),
        Mat2Z3::new(2, 0, 0, 1),
    ];
    let (table, matrices) =
        GroupTable::from_generators(Mat2Z3::IDENTITY, &gens, |a, b| a.mul(b), |m| m.to_string())
            .expect("GL(2,3)");
    let gamma0 = (0..matrices.len())
        .filter(|&i| matrices[i].0[2] == 0)
        .collect();
    let gamma1 = (0..matrices.len())
        .filter(|&i| matrices[i].0[2] == 0 && matrices[i].0[0] == 1)
        .collect();
    Gl23 {
        table,
        matrices,
        gamma0,
        gamma1,
    }
}

fn sl23() -> GroupTable {
    let (t, _) = GroupTable::from_generators(
        Mat2Z3::IDENTITY,
        &[Mat2Z3::new(1, 1, 0, 1), Mat2Z3::new(1, 0, 1, 1)],
        |a, b| a.mul(b),
        |m| m.to_string(),
    )
    .expect("SL(2,3)");
    t
}

/// A Hurwitz quaternion `(a + b i + c j + d k) / 2` stored as `[a, b, c, d]`,
/// all of one parity.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HurwitzQuat(pub [i32; 4]);

impl HurwitzQuat {
    pub const ONE: HurwitzQuat = HurwitzQuat([2, 0, 0, 0]);

    pub fn new(doubled: [i32; 4]) -> Result<HurwitzQuat> {
        let p = doubled[0].rem_euclid(2);
        if doubled.iter().any(|x| x.rem_euclid(2) != p) {
            return Err(Error::Precondition(format!("{doubled:?} mixes parities")));
        }
        Ok(HurwitzQuat(doubled))
    }

    /// Four times the norm.
    pub fn norm4(&self) -> i32 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn mul(&self, o: &HurwitzQuat) -> HurwitzQuat {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        let p = [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ];
        HurwitzQuat(p.map(|x| x / 2))
    }

    pub fn neg(&self) -> HurwitzQuat {
        HurwitzQuat(self.0.map(|x| -x))
    }

    /// Whether all coordinates are integers.
    pub fn is_lipschitz(&self) -> bool {
        self.0[0] % 2 == 0
    }
}

impl fmt::Display for HurwitzQuat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "i", "j", "k"];
        if self.is_lipschitz() {
            let i = self.0.iter().position(|&x| x != 0).unwrap_or(0);
            let sign = if self.0[i] < 0 { "-" } else { "" };
            let n = if i == 0 { "1" } else { names[i] };
            write!(f, "{sign}{n}")
        } else {
            write!(f, "(")?;
            for (i, &x) in self.0.iter().enumerate() {
                let sign = if x < 0 {
                    "-"
                } else if i > 0 {
                    "+"
                } else {
                    ""
                };
                write!(f, "{sign}{}", if i == 0 { "1" } else { names[i] })?;
            }
            write!(f, ")/2")
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Hurwitz {
    pub table: GroupTable,
    pub units: Vec<HurwitzQuat>,
}

impl Hurwitz {
    /// Indices of `{+-1, +-i, +-j, +-k}`.
    pub fn q8(&self) -> Vec<usize> {
        (0..self.units.len())
            .filter(|&i| self.units[i].is_lipschitz())
            .collect()
    }
}

/// The 24 units of the Hurwitz order.
pub fn hurwitz_units() -> Hurwitz {
    let mut units = Vec::new();
    for a in -2..=2 {
        for b in -2..=2 {
            for c in -2..=2 {
                for d in -2..=2 {
                    if let Ok(q) = HurwitzQuat::new([a, b, c, d]) {
                        if q.norm4() == 4 {
                            units.push(q);
                        }
                    }
                }
            }
        }
    }
    // shortlex from generators i and (1+i+j+k)/2
    let gens = [HurwitzQuat([0, 2, 0, 0]), HurwitzQuat([1, 1, 1, 1])];
    let (table, ordered) =
        GroupTable::from_generators(HurwitzQuat::ONE, &gens, |a, b| a.mul(b), |q| q.to_string())
            .expect("Hurwitz units");
    debug_assert_eq!(ordered.len(), units.len());
    Hurwitz {
        table,
        units: ordered,
    }
}

/// Group of curve automorphisms under composition, in the given order.
pub fn group_from_automorphisms(autos: &[WIso]) -> Result<GroupTable> {
    let mut mul = vec![vec![0; autos.len()]; autos.len()];
    for (i, a) in autos.iter().enumerate() {
        for (j, b) in autos.iter().enumerate() {
            let c = a.compose(b);
            mul[i][j] = autos
                .iter()
                .position(|x| *x == c)
                .ok_or_else(|| Error::NotClosed(format!("{a} o {b} = {c}")))?;
        }
    }
    GroupTable::new(autos.iter().map(|g| g.to_string()).collect(), mul)
}

/// Certificate that `G = N : H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemidirectCertificate {
    pub normal: Vec<usize>,
    pub complement: Vec<usize>,
    pub action_nontrivial: bool,
}

impl SemidirectCertificate {
    pub fn verify(&self, g: &GroupTable) -> bool {
        let (n, h) = (&self.normal, &self.complement);
        if !g.is_normal(n) || !g.is_subgroup(h) || n.len() * h.len() != g.order() {
            return false;
        }
        if n.iter().filter(|x| h.contains(x)).count() != 1 {
            return false;
        }
        let nontrivial = h.iter().any(|&y| {
            let yi = g.inverse(y);
            n.iter().any(|&x| g.mul[g.mul[y][x]][yi] != x)
        });
        nontrivial == self.action_nontrivial
    }
}

/// Finds a normal subgroup of order `n` with a complement of order `h`
/// (among two-generated subgroups), preferring a nontrivial action.
pub fn semidirect_decomposition(
    g: &GroupTable,
    n: usize,
    h: usize,
) -> Option<SemidirectCertificate> {
    let subs = g.small_subgroups();
    let mut found = None;
    for normal in subs.iter().filter(|s| s.len() == n && g.is_normal(s)) {
        for complement in subs.iter().filter(|s| s.len() == h) {
            let mut cert = SemidirectCertificate {
                normal: normal.clone(),
                complement: complement.clone(),
                action_nontrivial: true,
            };
            if cert.verify(g) {
                return Some(cert);
            }
            cert.action_nontrivial = false;
            if found.is_none() && cert.verify(g) {
                found = Some(cert);
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl23_and_level_subgroups() {
        let g = gl23();
        assert_eq!(g.table.order(), 48);
        assert_eq!(g.matrices.iter().filter(|m| m.is_invertible()).count(), 48);
        assert_eq!(g.gamma0.len(), 12);
        assert_eq!(g.gamma1.len(), 6);
        assert_eq!(g.table.index(&g.gamma0).unwrap(), 4);
        let g0 = g.table.subgroup(&g.gamma0).unwrap();
        let pos: Vec<usize> = g
            .gamma1
            .iter()
            .map(|x| g.gamma0.iter().position(|y| y == x).unwrap())
            .collect();
        assert_eq!(g0.index(&pos).unwrap(), 2);
        let q = g0.quotient(&pos).unwrap();
        assert!(structure_id(&q).unwrap().is("C2"));
        assert!(structure_id(&g0).unwrap().is("C6:C2"));
        let g1 = g.table.subgroup(&g.gamma1).unwrap();
        assert!(structure_id(&g1).unwrap().is("C3:C2"));
    }

    #[test]
    fn hurwitz() {
        let h = hurwitz_units();
        assert_eq!(h.units.len(), 24);
        assert!(h.units.iter().all(|u| u.norm4() == 4));
        assert_eq!(h.units.iter().filter(|u| !u.is_lipschitz()).count(), 16);
        let w = HurwitzQuat([1, 1, 1, 1]);
        assert_eq!(w.mul(&w).mul(&w), HurwitzQuat::ONE.neg());
        let q8 = h.q8();
        assert!(h.table.is_normal(&q8));
        assert!(structure_id(&h.table.quotient(&q8).unwrap())
            .unwrap()
            .is("C3"));
        assert!(structure_id(&h.table).unwrap().is("Q8:C3"));
        let cert = semidirect_decomposition(&h.table, 8, 3).unwrap();
        assert!(cert.action_nontrivial && cert.verify(&h.table));
    }

    #[test]
    fn iso_search_basics() {
        let g = sl23();
        let cert = iso_search(&g, &g).unwrap();
        assert!(cert.verify(&g, &g));
        assert!(iso_search(&cyclic(4), &cyclic(2).direct_product(&cyclic(2))).is_none());
        assert!(iso_search(&dihedral(4), &quaternion8()).is_none());
        assert!(structure_id(&cyclic(1)).unwrap().is("C1"));
        assert!(structure_id(&symmetric4()).unwrap().is("S4"));
        let odd = cyclic(5).direct_product(&cyclic(5));
        assert!(matches!(
            structure_id(&odd).unwrap(),
            StructureId::Unidentified { .. }
        ));
    }

    #[test]
    fn rejects_non_groups() {
        let bad = GroupTable::new(vec!["a".into(), "b".into()], vec![vec![0, 1], vec![1, 1]]);
        assert!(bad.is_err());
        let json = serde_json::to_string(&cyclic(2)).unwrap();
        assert!(json.contains("\"elements\"") && json.contains("\"mul\""));
    }
}
