//! The standard corpus of small lattices and topologies used by tests and the CLI.

use crate::classical::FiniteTopSpace;
use crate::lattice::{Elem, Lattice};

fn names_of<I: IntoIterator<Item = String>>(it: I) -> Vec<String> {
    it.into_iter().collect()
}

/// The Boolean algebra of subsets of `{1..n}`.
///
/// Element `i` is the subset with bitmask `i`; the empty set is named `0`
/// and the full set `1`. For `n = 2` the atoms are named `p` and `p'`.
pub fn boolean(n: usize) -> Lattice {
    assert!(n <= 6, "2^{n} exceeds the element cap");
    let size = 1usize << n;
    let full = size - 1;
    let names = names_of((0..size).map(|m| {
        if m == 0 {
            "0".to_string()
        } else if m == full {
            "1".to_string()
        } else if n == 2 {
            if m == 1 {
                "p".to_string()
            } else {
                "p'".to_string()
            }
        } else {
            let parts: Vec<String> = (0..n)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| (i + 1).to_string())
                .collect();
            format!("{{{}}}", parts.join(","))
        }
    }));
    let ortho = (0..size).map(|m| full ^ m).collect();
    Lattice::from_relation(names, |a, b| a & b == a, Some(ortho)).expect("powerset lattice")
}

/// The chain `0 < c1 < .. < 1` with `k` elements. With `k = 3` the middle element is `m`.
pub fn chain(k: usize) -> Lattice {
    assert!((1..=64).contains(&k));
    let names = names_of((0..k).map(|i| {
        if i == 0 {
            "0".to_string()
        } else if i == k - 1 {
            "1".to_string()
        } else if k == 3 {
            "m".to_string()
        } else {
            format!("c{i}")
        }
    }));
    Lattice::from_relation(names, |a, b| a <= b, None).expect("chain")
}

/// `MO(n)`: `n` complementary pairs of atoms between `0` and `1`.
///
/// Pair names run `a, a', b, b', ..`.
pub fn mo(n: usize) -> Lattice {
    assert!((1..=26).contains(&n));
    let mut names = vec!["0".to_string()];
    for i in 0..n {
        let base = (b'a' + i as u8) as char;
        names.push(base.to_string());
        names.push(format!("{base}'"));
    }
    names.push("1".to_string());
    let top = names.len() - 1;
    let ortho: Vec<Elem> = (0..names.len())
        .map(|e| {
            if e == 0 {
                top
            } else if e == top {
                0
            } else if e % 2 == 1 {
                e + 1
            } else {
                e - 1
            }
        })
        .collect();
    Lattice::from_relation(names, |a, b| a == 0 || b == top || a == b, Some(ortho)).expect("MO(n)")
}

/// The benzene ring: `0 < a < b < 1`, `0 < b' < a' < 1`, an ortholattice
/// that is not orthomodular.
pub fn o6() -> Lattice {
    let names = names_of(["0", "a", "b", "b'", "a'", "1"].map(String::from));
    let rel = |x: Elem, y: Elem| x == 0 || y == 5 || x == y || (x == 1 && y == 2) || (x == 3 && y == 4);
    Lattice::from_relation(names, rel, Some(vec![5, 4, 3, 2, 1, 0])).expect("hexagon")
}

/// Direct product with the componentwise order (and orthocomplement when both have one).
pub fn product(left: &Lattice, right: &Lattice) -> Lattice {
    let (n, m) = (left.len(), right.len());
    let names = names_of((0..n * m).map(|i| format!("({},{})", left.name(i / m), right.name(i % m))));
    let ortho = match (left.has_ortho(), right.has_ortho()) {
        (true, true) => Some(
            (0..n * m)
                .map(|i| left.ortho(i / m).unwrap() * m + right.ortho(i % m).unwrap())
                .collect(),
        ),
        _ => None,
    };
    Lattice::from_relation(names, |a, b| left.leq(a / m, b / m) && right.leq(a % m, b % m), ortho)
        .expect("product of lattices")
}

/// Every lattice in the standard corpus with a short label.
pub fn lattices() -> Vec<(String, Lattice)> {
    let mut out = Vec::new();
    for n in 1..=4 {
        out.push((format!("bool{n}"), boolean(n)));
    }
    for k in 2..=6 {
        out.push((format!("chain{k}"), chain(k)));
    }
    for n in 1..=3 {
        out.push((format!("mo{n}"), mo(n)));
    }
    out.push(("o6".into(), o6()));
    out.push(("mo2xbool1".into(), product(&mo(2), &boolean(1))));
    out.push(("chain3xchain3".into(), product(&chain(3), &chain(3))));
    out
}

/// Looks up a corpus lattice by label (`bool3`, `chain4`, `mo2`, `o6`, ..).
pub fn lattice_by_name(name: &str) -> Option<Lattice> {
    lattices().into_iter().find(|(n, _)| n == name).map(|(_, l)| l)
}

/// Sierpinski-like chain topology on `{1,2,3}`: opens `{}, {1}, {1,2}, {1,2,3}`.
pub fn sierpinski3() -> FiniteTopSpace {
    FiniteTopSpace::from_masks(
        vec!["1".into(), "2".into(), "3".into()],
        vec![0b000, 0b001, 0b011, 0b111],
    )
    .expect("chain topology")
}

/// Every topology on `n` labelled points, `n <= 4`.
pub fn all_topologies(n: usize) -> Vec<FiniteTopSpace> {
    assert!(n <= 4, "topology enumeration is exhaustive over subset families");
    let full: u64 = (1 << n) - 1;
    let subsets: Vec<u64> = (1..full).collect();
    let points: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut out = Vec::new();
    // a topology is determined by its proper nonempty opens
    let k = subsets.len();
    for choice in 0u64..(1u64 << k) {
        let mut opens = vec![0, full];
        for (i, &s) in subsets.iter().enumerate() {
            if choice & (1 << i) != 0 {
                opens.push(s);
            }
        }
        let closed = opens.iter().all(|&u| {
            opens
                .iter()
                .all(|&v| opens.contains(&(u | v)) && opens.contains(&(u & v)))
        });
        if closed {
            out.push(FiniteTopSpace::from_masks(points.clone(), opens).expect("closed family"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(boolean(3).len(), 8);
        assert_eq!(mo(2).len(), 6);
        assert_eq!(mo(3).len(), 8);
        assert_eq!(o6().len(), 6);
        assert_eq!(product(&mo(2), &boolean(1)).len(), 12);
    }

    #[test]
    fn topology_counts_match_known_sequence() {
        // number of topologies on n labelled points: 1, 4, 29, 355
        let counts: Vec<usize> = (1..=4).map(|n| all_topologies(n).len()).collect();
        assert_eq!(counts, vec![1, 4, 29, 355]);
    }
}
