//! Filter bases, dual ideals, quasipoints and the basis of the Stone spectrum.
//!
//! The Stone topology is carried only through its basis sets
//! `Q_a = { B quasipoint | a in B }` and `D_a = { J dual ideal | a in J }`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{Elem, ElemSet, Lattice, MAX_ELEMENTS};

/// Upward-closed, meet-closed, zero-free set of lattice elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DualIdeal {
    members: ElemSet,
    least: Elem,
}

impl DualIdeal {
    pub fn members(&self) -> ElemSet {
        self.members
    }

    /// The meet of all members; it is itself a member in a finite lattice.
    pub fn least(&self) -> Elem {
        self.least
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.members.contains(e)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn up_closure(l: &Lattice, set: ElemSet) -> ElemSet {
    set.iter().fold(ElemSet::EMPTY, |acc, e| acc.union(l.up_set(e)))
}

fn meet_closed(l: &Lattice, set: ElemSet) -> bool {
    set.iter()
        .all(|a| set.iter().filter(|&b| b > a).all(|b| set.contains(l.meet2(a, b))))
}

pub fn is_dual_ideal(l: &Lattice, set: ElemSet) -> bool {
    !set.is_empty() && !set.contains(l.zero()) && up_closure(l, set) == set && meet_closed(l, set)
}

/// Wraps `set` as a dual ideal after checking the three defining properties.
pub fn dual_ideal(l: &Lattice, set: ElemSet) -> Result<DualIdeal> {
    if !is_dual_ideal(l, set) {
        return Err(Error::Precondition(format!(
            "{} is not a dual ideal",
            l.format_set(set)
        )));
    }
    let least = l.meet(set.iter());
    if !set.contains(least) {
        return Err(Error::Inconsistent(format!(
            "dual ideal {} does not contain its meet",
            l.format_set(set)
        )));
    }
    Ok(DualIdeal { members: set, least })
}

/// Principal dual ideal `H_a = { b | b >= a }`, for `a != 0`.
pub fn principal(l: &Lattice, a: Elem) -> Result<DualIdeal> {
    l.check_index(a)?;
    if a == l.zero() {
        return Err(Error::Precondition("H_0 contains 0".into()));
    }
    Ok(DualIdeal {
        members: l.up_set(a),
        least: a,
    })
}

/// Nonempty, zero-free, and every pair has a lower bound inside the set.
pub fn is_filter_base(l: &Lattice, set: ElemSet) -> bool {
    if set.is_empty() || set.contains(l.zero()) {
        return false;
    }
    set.iter().all(|a| {
        set.iter().all(|b| {
            let m = l.meet2(a, b);
            set.iter().any(|c| l.leq(c, m))
        })
    })
}

/// Smallest dual ideal containing the filter base `base`.
pub fn cone(l: &Lattice, base: ElemSet) -> Result<DualIdeal> {
    if !is_filter_base(l, base) {
        return Err(Error::Precondition(format!(
            "{} is not a filter base",
            l.format_set(base)
        )));
    }
    dual_ideal(l, up_closure(l, base))
}

/// All dual ideals, in canonical order (size, then lexicographic).
///
/// Generated as up-closures of antichains. An antichain with two distinct
/// members `a, b` never generates a meet-closed set (the meet `a ^ b` would
/// need a generator below both), so such branches are cut immediately.
pub fn enumerate_dual_ideals(l: &Lattice, cap: usize) -> Result<Vec<DualIdeal>> {
    let cap = cap.min(MAX_ELEMENTS);
    if l.len() > cap {
        return Err(Error::CapExceeded {
            what: "lattice",
            size: l.len(),
            cap,
        });
    }
    let mut out = Vec::new();
    let mut stack: Vec<(ElemSet, Elem)> = l
        .elements()
        .filter(|&e| e != l.zero())
        .map(|e| (ElemSet::singleton(e), e))
        .collect();
    while let Some((antichain, last)) = stack.pop() {
        let closure = up_closure(l, antichain);
        if !meet_closed(l, closure) {
            continue;
        }
        out.push(dual_ideal(l, closure)?);
        for e in (last + 1)..l.len() {
            if e != l.zero() && antichain.iter().all(|a| !l.leq(a, e) && !l.leq(e, a)) {
                let mut next = antichain;
                next.insert(e);
                stack.push((next, e));
            }
        }
    }
    sort_canonical(&mut out);
    out.dedup();
    Ok(out)
}

/// Raw scan over all `2^n` subsets. Only for small lattices.
pub fn enumerate_dual_ideals_exhaustive(l: &Lattice) -> Result<Vec<DualIdeal>> {
    if l.len() > 20 {
        return Err(Error::CapExceeded {
            what: "subset scan",
            size: l.len(),
            cap: 20,
        });
    }
    let mut out = Vec::new();
    for bits in 1u64..(1u64 << l.len()) {
        let set = ElemSet::from_bits(bits);
        if is_dual_ideal(l, set) {
            out.push(dual_ideal(l, set)?);
        }
    }
    sort_canonical(&mut out);
    Ok(out)
}

fn sort_canonical(ideals: &mut [DualIdeal]) {
    ideals.sort_by(|a, b| a.members.canonical_cmp(&b.members));
}

/// Basis sets of the Stone topology for one element, as indices into
/// [`StoneSpectrum::dual_ideals`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSet {
    pub quasipoints: Vec<usize>,
    pub ideals: Vec<usize>,
}

/// The dual ideals and quasipoints of a finite lattice, enumerated once.
#[derive(Debug, Clone)]
pub struct StoneSpectrum {
    lattice: Arc<Lattice>,
    ideals: Vec<DualIdeal>,
    quasipoints: Vec<usize>,
    principal: Vec<Option<usize>>,
}

impl StoneSpectrum {
    pub fn new(lattice: Arc<Lattice>) -> Result<Self> {
        Self::with_cap(lattice, MAX_ELEMENTS)
    }

    pub fn with_cap(lattice: Arc<Lattice>, cap: usize) -> Result<Self> {
        let ideals = enumerate_dual_ideals(&lattice, cap)?;
        let quasipoints: Vec<usize> = (0..ideals.len())
            .filter(|&i| {
                !ideals
                    .iter()
                    .any(|j| j.members != ideals[i].members && ideals[i].members.is_subset(j.members))
            })
            .collect();

        // in a finite lattice the quasipoints are exactly the H_atom
        let mut from_atoms: Vec<ElemSet> = lattice.atoms().into_iter().map(|a| lattice.up_set(a)).collect();
        let mut found: Vec<ElemSet> = quasipoints.iter().map(|&i| ideals[i].members).collect();
        from_atoms.sort_by(|a, b| a.canonical_cmp(b));
        found.sort_by(|a, b| a.canonical_cmp(b));
        if from_atoms != found {
            return Err(Error::Inconsistent(
                "maximal dual ideals differ from the principal ideals of atoms".into(),
            ));
        }

        let mut principal = vec![None; lattice.len()];
        for (i, j) in ideals.iter().enumerate() {
            if j.members == lattice.up_set(j.least) {
                principal[j.least] = Some(i);
            }
        }
        Ok(StoneSpectrum {
            lattice,
            ideals,
            quasipoints,
            principal,
        })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn dual_ideals(&self) -> &[DualIdeal] {
        &self.ideals
    }

    pub fn ideal(&self, index: usize) -> &DualIdeal {
        &self.ideals[index]
    }

    /// Indices of the quasipoints (maximal dual ideals) in canonical order.
    pub fn quasipoints(&self) -> &[usize] {
        &self.quasipoints
    }

    pub fn is_quasipoint(&self, index: usize) -> bool {
        self.quasipoints.contains(&index)
    }

    /// Index of `H_a`, or `None` for `a = 0`.
    pub fn principal(&self, a: Elem) -> Option<usize> {
        self.principal.get(a).copied().flatten()
    }

    pub fn index_of(&self, members: ElemSet) -> Option<usize> {
        self.ideals.iter().position(|j| j.members == members)
    }

    /// `(Q_a, D_a)`.
    pub fn basis_set(&self, a: Elem) -> BasisSet {
        let ideals: Vec<usize> = (0..self.ideals.len()).filter(|&i| self.ideals[i].contains(a)).collect();
        let quasipoints = self
            .quasipoints
            .iter()
            .copied()
            .filter(|i| ideals.contains(i))
            .collect();
        BasisSet { quasipoints, ideals }
    }

    /// The quasipoint `H_atom` as an index, for each atom in index order.
    pub fn atomic_quasipoints(&self) -> Vec<(Elem, usize)> {
        self.lattice
            .atoms()
            .into_iter()
            .map(|a| (a, self.principal(a).expect("atoms are nonzero")))
            .collect()
    }

    pub fn format_ideal(&self, index: usize) -> String {
        self.lattice.format_set(self.ideals[index].members)
    }

    /// Inclusion diagram of the dual ideals (covers only) in Graphviz form.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph dual_ideals {\n  rankdir=BT;\n");
        for i in 0..self.ideals.len() {
            let shape = if self.is_quasipoint(i) { "box" } else { "ellipse" };
            s.push_str(&format!("  d{i} [label={:?}, shape={shape}];\n", self.format_ideal(i)));
        }
        for (i, a) in self.ideals.iter().enumerate() {
            for (j, b) in self.ideals.iter().enumerate() {
                if i == j || !a.members.is_subset(b.members) {
                    continue;
                }
                let between = self.ideals.iter().any(|c| {
                    c.members != a.members
                        && c.members != b.members
                        && a.members.is_subset(c.members)
                        && c.members.is_subset(b.members)
                });
                if !between {
                    s.push_str(&format!("  d{i} -> d{j};\n"));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn spectrum(l: Lattice) -> StoneSpectrum {
        StoneSpectrum::new(Arc::new(l)).unwrap()
    }

    #[test]
    fn filter_bases() {
        let l = corpus::mo(2);
        assert!(is_filter_base(&l, ElemSet::singleton(l.one())));
        assert!(!is_filter_base(&l, l.parse_set("a,a'").unwrap()));
        let c = corpus::chain(5);
        assert!(is_filter_base(&c, c.parse_set("c2,c3,1").unwrap()));
        assert!(!is_filter_base(&c, ElemSet::EMPTY));
    }

    #[test]
    fn cones() {
        let l = corpus::mo(2);
        let top = ElemSet::singleton(l.one());
        assert_eq!(cone(&l, top).unwrap().members(), top);
        let a = l.index_of("a").unwrap();
        assert_eq!(cone(&l, ElemSet::singleton(a)).unwrap().members(), l.up_set(a));
        assert!(cone(&l, l.parse_set("a,a'").unwrap()).is_err());
    }

    #[test]
    fn cone_in_boolean_cube_matches_brute_force() {
        let l = corpus::boolean(3);
        let base = l.parse_set("{1,2},{2,3},{2}").unwrap();
        // brute force: smallest dual ideal containing the base
        let all = enumerate_dual_ideals_exhaustive(&l).unwrap();
        let smallest = all
            .iter()
            .filter(|j| base.is_subset(j.members()))
            .min_by_key(|j| j.len())
            .unwrap();
        assert_eq!(cone(&l, base).unwrap().members(), smallest.members());
        // {1,2} and {2,3} alone are not a filter base: their meet {2} is missing
        assert!(!is_filter_base(&l, l.parse_set("{1,2},{2,3}").unwrap()));
    }

    #[test]
    fn dual_ideal_counts() {
        let c = corpus::chain(3);
        let d = enumerate_dual_ideals(&c, 64).unwrap();
        let sets: Vec<String> = d.iter().map(|j| c.format_set(j.members())).collect();
        assert_eq!(sets, vec!["{1}", "{m,1}"]);
        let b2 = corpus::boolean(2);
        let d = enumerate_dual_ideals(&b2, 64).unwrap();
        let sets: Vec<String> = d.iter().map(|j| b2.format_set(j.members())).collect();
        assert_eq!(sets, vec!["{1}", "{p,1}", "{p',1}"]);
        assert_eq!(enumerate_dual_ideals(&corpus::mo(2), 64).unwrap().len(), 5);
    }

    #[test]
    fn cap_is_enforced() {
        let l = corpus::boolean(4);
        assert!(matches!(enumerate_dual_ideals(&l, 8), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn antichain_generation_matches_subset_scan() {
        for (name, l) in corpus::lattices() {
            if l.len() > 16 {
                continue;
            }
            let fast = enumerate_dual_ideals(&l, 64).unwrap();
            let slow = enumerate_dual_ideals_exhaustive(&l).unwrap();
            assert_eq!(fast, slow, "{name}");
        }
    }

    #[test]
    fn quasipoint_counts() {
        assert_eq!(spectrum(corpus::boolean(3)).quasipoints().len(), 3);
        assert_eq!(spectrum(corpus::mo(2)).quasipoints().len(), 4);
        let s = spectrum(corpus::chain(3));
        assert_eq!(s.quasipoints().len(), 1);
        assert_eq!(s.format_ideal(s.quasipoints()[0]), "{m,1}");
    }

    #[test]
    fn basis_sets() {
        let s = spectrum(corpus::mo(2));
        let l = s.lattice().clone();
        assert_eq!(s.basis_set(l.one()).quasipoints, s.quasipoints().to_vec());
        assert!(s.basis_set(l.zero()).quasipoints.is_empty());
        assert!(s.basis_set(l.zero()).ideals.is_empty());
        let a = l.index_of("a").unwrap();
        assert_eq!(s.basis_set(a).quasipoints, vec![s.principal(a).unwrap()]);
    }
}
