//! Finite bounded lattices with an optional orthocomplement.
//!
//! A [`Lattice`] is built from an order relation only; meets and joins are
//! derived, checked for existence, and cached as tables. Elements are plain
//! indices `0..n` and subsets of elements are `u64` bitmasks ([`ElemSet`]),
//! which caps lattices at 64 elements.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Check;

/// Hard ceiling imposed by the bitmask representation.
pub const MAX_ELEMENTS: usize = 64;

/// Index of a lattice element.
pub type Elem = usize;

/// A set of lattice elements stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ElemSet(u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ElemSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(e: Elem) -> Self {
        ElemSet(1u64 << e)
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, e: Elem) -> bool {
        e < 64 && self.0 & (1u64 << e) != 0
    }

    pub fn insert(&mut self, e: Elem) {
        self.0 |= 1u64 << e;
    }

    pub fn remove(&mut self, e: Elem) {
        self.0 &= !(1u64 << e);
    }

    pub fn union(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ElemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Elements in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = Elem> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as Elem;
                bits &= bits - 1;
                Some(e)
            }
        })
    }

    /// Canonical order: by size, then lexicographically on the sorted element lists.
    pub fn canonical_cmp(&self, other: &ElemSet) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.iter().cmp(other.iter()))
    }
}

impl FromIterator<Elem> for ElemSet {
    fn from_iter<I: IntoIterator<Item = Elem>>(iter: I) -> Self {
        let mut s = ElemSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A finite bounded lattice, optionally orthocomplemented.
#[derive(Clone, PartialEq)]
pub struct Lattice {
    names: Vec<String>,
    up: Vec<ElemSet>,
    down: Vec<ElemSet>,
    meet: Vec<Elem>,
    join: Vec<Elem>,
    zero: Elem,
    one: Elem,
    ortho: Option<Vec<Elem>>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("elements", &self.names)
            .field("orthocomplemented", &self.ortho.is_some())
            .finish()
    }
}

impl Lattice {
    /// Builds a lattice from element names and an order predicate.
    ///
    /// The reflexive-transitive closure of `leq` is taken first. Fails with a
    /// named witness pair if the closure is not antisymmetric or some pair
    /// lacks a meet or join.
    pub fn from_relation<F>(names: Vec<String>, leq: F, ortho: Option<Vec<Elem>>) -> Result<Self>
    where
        F: Fn(Elem, Elem) -> bool,
    {
        let n = names.len();
        if n == 0 {
            return Err(Error::Input("lattice has no elements".into()));
        }
        if n > MAX_ELEMENTS {
            return Err(Error::CapExceeded {
                what: "lattice",
                size: n,
                cap: MAX_ELEMENTS,
            });
        }

        // up[a] = { b | a <= b }, closed reflexively and transitively.
        let mut up: Vec<ElemSet> = (0..n)
            .map(|a| {
                let mut s = ElemSet::singleton(a);
                for b in 0..n {
                    if leq(a, b) {
                        s.insert(b);
                    }
                }
                s
            })
            .collect();
        for k in 0..n {
            for a in 0..n {
                if up[a].contains(k) {
                    up[a] = up[a].union(up[k]);
                }
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if up[a].contains(b) && up[b].contains(a) {
                    return Err(Error::NotAntisymmetric {
                        a: names[a].clone(),
                        b: names[b].clone(),
                    });
                }
            }
        }
        let mut down = vec![ElemSet::EMPTY; n];
        for (a, above) in up.iter().enumerate() {
            for b in above.iter() {
                down[b].insert(a);
            }
        }

        let mut meet = vec![0; n * n];
        let mut join = vec![0; n * n];
        for a in 0..n {
            for b in a..n {
                let lower = down[a].intersection(down[b]);
                let glb = lower.iter().find(|&g| lower.is_subset(down[g]));
                let upper = up[a].intersection(up[b]);
                let lub = upper.iter().find(|&g| upper.is_subset(up[g]));
                let glb = glb.ok_or_else(|| Error::NotALattice {
                    a: names[a].clone(),
                    b: names[b].clone(),
                    missing: "greatest lower bound",
                })?;
                let lub = lub.ok_or_else(|| Error::NotALattice {
                    a: names[a].clone(),
                    b: names[b].clone(),
                    missing: "least upper bound",
                })?;
                meet[a * n + b] = glb;
                meet[b * n + a] = glb;
                join[a * n + b] = lub;
                join[b * n + a] = lub;
            }
        }
        let full = ElemSet::full(n);
        let zero = (0..n).find(|&a| up[a] == full).expect("pairwise meets imply a bottom");
        let one = (0..n).find(|&a| down[a] == full).expect("pairwise joins imply a top");

        let lattice = Lattice {
            names,
            up,
            down,
            meet,
            join,
            zero,
            one,
            ortho: None,
        };
        match ortho {
            Some(map) => lattice.with_ortho(map),
            None => Ok(lattice),
        }
    }

    /// Attaches an orthocomplement after validating all four ortholattice laws.
    pub fn with_ortho(mut self, map: Vec<Elem>) -> Result<Self> {
        let n = self.len();
        if map.len() != n {
            return Err(Error::InvalidOrtho(format!(
                "map has {} entries, lattice has {n}",
                map.len()
            )));
        }
        for a in 0..n {
            let c = map[a];
            if c >= n {
                return Err(Error::IndexOutOfRange(c));
            }
            if map[c] != a {
                return Err(Error::InvalidOrtho(format!(
                    "`{}`'' != `{}`",
                    self.names[a], self.names[a]
                )));
            }
            if self.join2(a, c) != self.one || self.meet2(a, c) != self.zero {
                return Err(Error::InvalidOrtho(format!(
                    "`{}` and `{}` are not complements",
                    self.names[a], self.names[c]
                )));
            }
        }
        for a in 0..n {
            for b in self.up[a].iter() {
                if !self.leq(map[b], map[a]) {
                    return Err(Error::InvalidOrtho(format!(
                        "not order-reversing on `{}` <= `{}`",
                        self.names[a], self.names[b]
                    )));
                }
            }
        }
        self.ortho = Some(map);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.len()
    }

    pub fn all(&self) -> ElemSet {
        ElemSet::full(self.len())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e]
    }

    pub fn index_of(&self, name: &str) -> Result<Elem> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn check_index(&self, e: Elem) -> Result<Elem> {
        if e < self.len() {
            Ok(e)
        } else {
            Err(Error::IndexOutOfRange(e))
        }
    }

    pub fn zero(&self) -> Elem {
        self.zero
    }

    pub fn one(&self) -> Elem {
        self.one
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.up[a].contains(b)
    }

    pub fn lt(&self, a: Elem, b: Elem) -> bool {
        a != b && self.leq(a, b)
    }

    /// `{ b | a <= b }`
    pub fn up_set(&self, a: Elem) -> ElemSet {
        self.up[a]
    }

    /// `{ b | b <= a }`
    pub fn down_set(&self, a: Elem) -> ElemSet {
        self.down[a]
    }

    pub fn meet2(&self, a: Elem, b: Elem) -> Elem {
        self.meet[a * self.len() + b]
    }

    pub fn join2(&self, a: Elem, b: Elem) -> Elem {
        self.join[a * self.len() + b]
    }

    /// Greatest lower bound of a family; the empty meet is the top.
    pub fn meet<I: IntoIterator<Item = Elem>>(&self, family: I) -> Elem {
        family.into_iter().fold(self.one, |acc, e| self.meet2(acc, e))
    }

    /// Least upper bound of a family; the empty join is the bottom.
    pub fn join<I: IntoIterator<Item = Elem>>(&self, family: I) -> Elem {
        family.into_iter().fold(self.zero, |acc, e| self.join2(acc, e))
    }

    /// Checked variants of [`Lattice::meet`] / [`Lattice::join`] that reject unknown indices.
    pub fn try_meet(&self, family: &[Elem]) -> Result<Elem> {
        for &e in family {
            self.check_index(e)?;
        }
        Ok(self.meet(family.iter().copied()))
    }

    pub fn try_join(&self, family: &[Elem]) -> Result<Elem> {
        for &e in family {
            self.check_index(e)?;
        }
        Ok(self.join(family.iter().copied()))
    }

    pub fn has_ortho(&self) -> bool {
        self.ortho.is_some()
    }

    pub fn ortho(&self, a: Elem) -> Option<Elem> {
        self.ortho.as_ref().map(|m| m[a])
    }

    fn ortho_map(&self) -> Result<&[Elem]> {
        self.ortho.as_deref().ok_or(Error::MissingOrtho)
    }

    /// Minimal nonzero elements.
    pub fn atoms(&self) -> Vec<Elem> {
        self.elements()
            .filter(|&a| a != self.zero && self.down[a].len() == 2)
            .collect()
    }

    /// Pairs `(a, b)` where `b` covers `a`.
    pub fn covers(&self) -> Vec<(Elem, Elem)> {
        let mut out = Vec::new();
        for a in self.elements() {
            for b in self.up[a].iter() {
                if a != b && self.up[a].intersection(self.down[b]).len() == 2 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// First triple in lexicographic order violating `a ^ (b v c) = (a ^ b) v (a ^ c)`.
    pub fn is_distributive(&self) -> Check<[Elem; 3]> {
        for a in self.elements() {
            for b in self.elements() {
                for c in self.elements() {
                    let lhs = self.meet2(a, self.join2(b, c));
                    let rhs = self.join2(self.meet2(a, b), self.meet2(a, c));
                    if lhs != rhs {
                        return Check::Fails([a, b, c]);
                    }
                }
            }
        }
        Check::Holds
    }

    /// First pair `a <= b` with `b != a v (b ^ a')`.
    pub fn is_orthomodular(&self) -> Result<Check<(Elem, Elem)>> {
        let ortho = self.ortho_map()?;
        for a in self.elements() {
            for b in self.up[a].iter() {
                if self.join2(a, self.meet2(b, ortho[a])) != b {
                    return Ok(Check::Fails((a, b)));
                }
            }
        }
        Ok(Check::Holds)
    }

    /// `z` and `a` are compatible when `z = (z ^ a) v (z ^ a')`.
    pub fn compatible(&self, z: Elem, a: Elem) -> Result<bool> {
        let ortho = self.ortho_map()?;
        Ok(self.join2(self.meet2(z, a), self.meet2(z, ortho[a])) == z)
    }

    /// Elements compatible with every element. Requires orthomodularity.
    pub fn center(&self) -> Result<Vec<Elem>> {
        if let Check::Fails((a, b)) = self.is_orthomodular()? {
            return Err(Error::NotOrthomodular {
                a: self.names[a].clone(),
                b: self.names[b].clone(),
            });
        }
        let ortho = self.ortho_map()?;
        Ok(self
            .elements()
            .filter(|&z| {
                self.elements()
                    .all(|a| self.join2(self.meet2(z, a), self.meet2(z, ortho[a])) == z)
            })
            .collect())
    }

    /// The sublattice on `members` with the induced order.
    ///
    /// `members` must contain the bottom and top and be closed under binary
    /// meet and join (and the orthocomplement, when present). Returns the
    /// new lattice and the embedding of its elements into `self`.
    pub fn sublattice(&self, members: ElemSet) -> Result<(Lattice, Vec<Elem>)> {
        if !members.contains(self.zero) || !members.contains(self.one) {
            return Err(Error::Precondition("sublattice must contain 0 and 1".into()));
        }
        for a in members.iter() {
            if let Some(c) = self.ortho(a) {
                if !members.contains(c) {
                    return Err(Error::Precondition(format!(
                        "not closed under orthocomplement at `{}`",
                        self.names[a]
                    )));
                }
            }
            for b in members.iter() {
                if !members.contains(self.meet2(a, b)) || !members.contains(self.join2(a, b)) {
                    return Err(Error::Precondition(format!(
                        "not closed under meet/join at (`{}`, `{}`)",
                        self.names[a], self.names[b]
                    )));
                }
            }
        }
        let embed: Vec<Elem> = members.iter().collect();
        let names = embed.iter().map(|&e| self.names[e].clone()).collect();
        let ortho = self.ortho.as_ref().map(|m| {
            embed
                .iter()
                .map(|&e| embed.iter().position(|&x| x == m[e]).expect("closed under ortho"))
                .collect()
        });
        let sub = Lattice::from_relation(names, |i, j| self.leq(embed[i], embed[j]), ortho)?;
        Ok((sub, embed))
    }

    /// Graphviz rendering of the Hasse diagram (cover relation only).
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph hasse {\n  rankdir=BT;\n");
        for (i, n) in self.names.iter().enumerate() {
            s.push_str(&format!("  n{i} [label={:?}];\n", n));
        }
        for (a, b) in self.covers() {
            s.push_str(&format!("  n{a} -> n{b};\n"));
        }
        s.push_str("}\n");
        s
    }

    pub fn format_set(&self, set: ElemSet) -> String {
        let parts: Vec<&str> = set.iter().map(|e| self.name(e)).collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Parses a comma-separated list of element names. Commas nested inside
    /// braces or parentheses belong to the name.
    pub fn parse_set(&self, text: &str) -> Result<ElemSet> {
        let mut set = ElemSet::EMPTY;
        let mut depth = 0i32;
        let mut start = 0;
        let mut parts = Vec::new();
        for (i, c) in text.char_indices() {
            match c {
                '{' | '(' => depth += 1,
                '}' | ')' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(&text[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&text[start..]);
        for part in parts.into_iter().map(str::trim).filter(|p| !p.is_empty()) {
            set.insert(self.index_of(part)?);
        }
        Ok(set)
    }

    pub fn to_file(&self) -> LatticeFile {
        let leq = self
            .covers()
            .into_iter()
            .map(|(a, b)| (self.names[a].clone(), self.names[b].clone()))
            .collect();
        let ortho = self.ortho.as_ref().map(|m| {
            self.elements()
                .filter(|&a| a < m[a])
                .map(|a| (self.names[a].clone(), self.names[m[a]].clone()))
                .collect()
        });
        LatticeFile {
            elements: self.names.clone(),
            leq,
            ortho,
        }
    }
}

/// On-disk lattice description.
///
/// `leq` may list any generating set of order pairs; the closure is taken on
/// load. `ortho` may list each complementary pair in one direction only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeFile {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ortho: Option<BTreeMap<String, String>>,
}

impl LatticeFile {
    pub fn build(&self) -> Result<Lattice> {
        let names = self.elements.clone();
        let index = |s: &str| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::UnknownElement(s.to_string()))
        };
        let n = names.len();
        let mut rel = vec![false; n * n];
        for (a, b) in &self.leq {
            rel[index(a)? * n + index(b)?] = true;
        }
        let order = Lattice::from_relation(names.clone(), |a, b| rel[a * n + b], None)?;
        let Some(pairs) = &self.ortho else {
            return Ok(order);
        };
        let mut map: Vec<Option<Elem>> = vec![None; n];
        for (a, b) in pairs {
            let (ia, ib) = (index(a)?, index(b)?);
            for (x, y) in [(ia, ib), (ib, ia)] {
                match map[x] {
                    Some(prev) if prev != y => {
                        return Err(Error::InvalidOrtho(format!("`{}` has two complements", names[x])))
                    }
                    _ => map[x] = Some(y),
                }
            }
        }
        // the bounds complement each other unless stated otherwise
        let (zero, one) = (order.zero(), order.one());
        if map[zero].is_none() && map[one].is_none() {
            map[zero] = Some(one);
            map[one] = Some(zero);
        }
        let map = map
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| Error::InvalidOrtho(format!("`{}` has no complement", names[i]))))
            .collect::<Result<Vec<_>>>()?;
        order.with_ortho(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn mo2_join_of_distinct_atoms_is_top() {
        let l = corpus::mo(2);
        let a = l.index_of("a").unwrap();
        let b = l.index_of("b").unwrap();
        // brute force: the least of all common upper bounds
        let uppers: Vec<Elem> = l.elements().filter(|&u| l.leq(a, u) && l.leq(b, u)).collect();
        assert_eq!(uppers, vec![l.one()]);
        assert_eq!(l.join([a, b]), l.one());
    }

    #[test]
    fn empty_families() {
        let l = corpus::mo(2);
        assert_eq!(l.meet([]), l.one());
        assert_eq!(l.join([]), l.zero());
        assert!(matches!(l.try_meet(&[99]), Err(Error::IndexOutOfRange(99))));
    }

    #[test]
    fn complement_and_idempotence() {
        let l = corpus::mo(3);
        for a in l.elements() {
            assert_eq!(l.meet([a, l.ortho(a).unwrap()]), l.zero());
            assert_eq!(l.join([a, a]), a);
        }
    }

    #[test]
    fn distributivity() {
        assert!(corpus::boolean(3).is_distributive().holds());
        assert!(corpus::chain(3).is_distributive().holds());
        let l = corpus::mo(2);
        let w = l.is_distributive().witness().copied().unwrap();
        let [a, b, c] = w;
        assert_ne!(l.meet2(a, l.join2(b, c)), l.join2(l.meet2(a, b), l.meet2(a, c)));
        // the documented witness (a, b, b') also fails
        let (a, b, bp) = (
            l.index_of("a").unwrap(),
            l.index_of("b").unwrap(),
            l.index_of("b'").unwrap(),
        );
        assert_eq!(l.meet2(a, l.join2(b, bp)), a);
        assert_eq!(l.join2(l.meet2(a, b), l.meet2(a, bp)), l.zero());
    }

    #[test]
    fn orthomodularity() {
        assert!(corpus::mo(2).is_orthomodular().unwrap().holds());
        assert!(corpus::boolean(3).is_orthomodular().unwrap().holds());
        let hex = corpus::o6();
        assert!(!hex.is_orthomodular().unwrap().holds());
        assert!(matches!(corpus::chain(3).is_orthomodular(), Err(Error::MissingOrtho)));
    }

    #[test]
    fn atoms_of_corpus() {
        assert_eq!(corpus::boolean(3).atoms().len(), 3);
        let mo2 = corpus::mo(2);
        let names: Vec<&str> = mo2.atoms().into_iter().map(|a| mo2.name(a)).collect();
        assert_eq!(names, vec!["a", "a'", "b", "b'"]);
        let c = corpus::chain(3);
        assert_eq!(c.atoms(), vec![c.index_of("m").unwrap()]);
    }

    #[test]
    fn centers() {
        let b = corpus::boolean(3);
        assert_eq!(b.center().unwrap().len(), 8);
        let mo2 = corpus::mo(2);
        assert_eq!(mo2.center().unwrap(), vec![mo2.zero(), mo2.one()]);
        let prod = corpus::product(&corpus::mo(2), &corpus::boolean(1));
        assert_eq!(prod.center().unwrap().len(), 4);
        assert!(matches!(corpus::o6().center(), Err(Error::NotOrthomodular { .. })));
    }

    #[test]
    fn rejects_non_lattice_poset() {
        // two incomparable maximal elements
        let names = vec!["0".to_string(), "x".to_string(), "y".to_string()];
        let err = Lattice::from_relation(names, |a, _| a == 0, None).unwrap_err();
        match err {
            Error::NotALattice { a, b, .. } => assert_eq!((a.as_str(), b.as_str()), ("x", "y")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_cycle() {
        let names = vec!["p".to_string(), "q".to_string()];
        assert!(matches!(
            Lattice::from_relation(names, |_, _| true, None),
            Err(Error::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn rejects_bad_ortho() {
        let c = corpus::chain(3);
        let err = c.clone().with_ortho(vec![2, 1, 0]).unwrap_err();
        assert!(matches!(err, Error::InvalidOrtho(_)));
    }

    #[test]
    fn file_round_trip() {
        let json = r#"{"elements":["0","a","a'","b","b'","1"],
            "leq":[["0","a"],["0","a'"],["0","b"],["0","b'"],["a","1"],["a'","1"],["b","1"],["b'","1"]],
            "ortho":{"a":"a'","b":"b'"}}"#;
        let file: LatticeFile = serde_json::from_str(json).unwrap();
        let l = file.build().unwrap();
        assert_eq!(l, corpus::mo(2));
        let again = l.to_file().build().unwrap();
        assert_eq!(again, l);
    }

    #[test]
    fn sublattice_of_block() {
        let l = corpus::mo(2);
        let block = l.parse_set("0,a,a',1").unwrap();
        let (sub, embed) = l.sublattice(block).unwrap();
        assert_eq!(sub.len(), 4);
        assert!(sub.is_distributive().holds());
        assert_eq!(embed.len(), 4);
        let bad = l.parse_set("0,a,b,1").unwrap();
        assert!(l.sublattice(bad).is_err());
    }

    #[test]
    fn dot_lists_covers_only() {
        let l = corpus::chain(3);
        let dot = l.to_dot();
        assert_eq!(dot.matches("->").count(), 2);
    }
}
