//! Presheaves of finite sets on finite lattices, the sheaf condition, stalks
//! at quasipoints and sheafification over the Stone spectrum.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classical::{FiniteTopSpace, PointSet};
use crate::error::{Error, Result};
use crate::lattice::{Elem, ElemSet, Lattice};
use crate::stone::StoneSpectrum;
use crate::Check;

/// Default bound on the number of partial families visited by the sheaf check.
pub const DEFAULT_SEARCH_CAP: usize = 2_000_000;

/// `S(a)` for every element and `ρ_a^b : S(b) → S(a)` for every `a ≤ b`.
#[derive(Debug, Clone)]
pub struct LatticePresheaf {
    lattice: Arc<Lattice>,
    values: Vec<Vec<String>>,
    restrictions: HashMap<(Elem, Elem), Vec<usize>>,
}

/// A chain `a ≤ b ≤ c` along which restrictions fail to compose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainWitness {
    pub a: Elem,
    pub b: Elem,
    pub c: Elem,
    /// Index of the section of `S(c)` on which the two routes differ.
    pub section: usize,
}

/// A cover `target = ⋁ cover` with a compatible family and its gluings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverWitness {
    pub target: Elem,
    pub cover: Vec<Elem>,
    pub family: Vec<usize>,
    pub gluings: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SheafReport {
    pub existence: Check<CoverWitness>,
    pub uniqueness: Check<CoverWitness>,
    pub covers_checked: usize,
    pub families_checked: usize,
}

impl SheafReport {
    pub fn holds(&self) -> bool {
        self.existence.holds() && self.uniqueness.holds()
    }
}

impl LatticePresheaf {
    /// `restrictions` must give a total map for every `a < b`; missing
    /// identities `ρ_a^a` are filled in.
    pub fn new(
        lattice: Arc<Lattice>,
        values: Vec<Vec<String>>,
        mut restrictions: HashMap<(Elem, Elem), Vec<usize>>,
    ) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::DimensionMismatch(values.len(), lattice.len()));
        }
        for b in lattice.elements() {
            for a in lattice.elements().filter(|&a| lattice.leq(a, b)) {
                let len_b = values[b].len();
                let len_a = values[a].len();
                if a == b {
                    restrictions.entry((b, a)).or_insert_with(|| (0..len_b).collect());
                }
                let map = restrictions.get(&(b, a)).ok_or_else(|| {
                    Error::Input(format!(
                        "no restriction from `{}` to `{}`",
                        lattice.name(b),
                        lattice.name(a)
                    ))
                })?;
                if map.len() != len_b || map.iter().any(|&i| i >= len_a) {
                    return Err(Error::Input(format!(
                        "restriction from `{}` to `{}` is not a total map",
                        lattice.name(b),
                        lattice.name(a)
                    )));
                }
            }
        }
        if let Some(&(b, a)) = restrictions.keys().find(|&&(b, a)| !lattice.leq(a, b)) {
            return Err(Error::Input(format!(
                "restriction from `{}` to `{}` but `{}` is not below `{}`",
                lattice.name(b),
                lattice.name(a),
                lattice.name(a),
                lattice.name(b)
            )));
        }
        Ok(LatticePresheaf {
            lattice,
            values,
            restrictions,
        })
    }

    /// The presheaf sending `a` to one point.
    pub fn constant(lattice: Arc<Lattice>, values: &[&str]) -> Result<Self> {
        let sets = lattice
            .elements()
            .map(|_| values.iter().map(|s| s.to_string()).collect())
            .collect();
        let maps = pairs(&lattice)
            .map(|(b, a)| ((b, a), (0..values.len()).collect()))
            .collect();
        LatticePresheaf::new(lattice, sets, maps)
    }

    /// Spectral families on `[0, a]` with breakpoints in `lambdas`:
    /// chains `E_1 ≤ .. ≤ E_{k-1} ≤ a` with `E_k = a`, restricted by `E ↦ E ∧ b`.
    pub fn spectral(lattice: Arc<Lattice>, lambdas: &[f64]) -> Result<Self> {
        if lambdas.is_empty() || lambdas.iter().any(|l| l.is_nan()) || lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input(
                "breakpoints must be strictly increasing and nonempty".into(),
            ));
        }
        let k = lambdas.len();
        let chains: Vec<Vec<Vec<Elem>>> = lattice.elements().map(|a| chains_below(&lattice, a, k - 1)).collect();
        let format = |a: Elem, chain: &[Elem]| {
            let parts: Vec<String> = chain
                .iter()
                .chain(std::iter::once(&a))
                .zip(lambdas)
                .map(|(&e, l)| format!("({l},{})", lattice.name(e)))
                .collect();
            format!("[{}]", parts.join(","))
        };
        let values = lattice
            .elements()
            .map(|a| chains[a].iter().map(|c| format(a, c)).collect())
            .collect();
        let mut maps = HashMap::new();
        for (b, a) in pairs(&lattice) {
            let index: HashMap<&Vec<Elem>, usize> = chains[a].iter().enumerate().map(|(i, c)| (c, i)).collect();
            let map = chains[b]
                .iter()
                .map(|c| {
                    let restricted: Vec<Elem> = c.iter().map(|&e| lattice.meet2(e, a)).collect();
                    index[&restricted]
                })
                .collect();
            maps.insert((b, a), map);
        }
        LatticePresheaf::new(lattice, values, maps)
    }

    /// Locally constant functions into `{0, .., levels-1}` on the open sets
    /// of a finite space, restricted by restriction of functions.
    pub fn functions_on(space: &FiniteTopSpace, levels: usize) -> Result<(Self, Vec<PointSet>)> {
        let (lattice, opens) = space.open_lattice()?;
        let lattice = Arc::new(lattice);
        let sections: Vec<Vec<BTreeMap<usize, usize>>> =
            opens.iter().map(|&u| locally_constant(space, u, levels)).collect();
        let values = sections
            .iter()
            .map(|fs| {
                fs.iter()
                    .map(|f| {
                        let parts: Vec<String> =
                            f.iter().map(|(&x, &v)| format!("{}:{v}", space.points()[x])).collect();
                        format!("{{{}}}", parts.join(","))
                    })
                    .collect()
            })
            .collect();
        let mut maps = HashMap::new();
        for (b, a) in pairs(&lattice) {
            let index: HashMap<&BTreeMap<usize, usize>, usize> =
                sections[a].iter().enumerate().map(|(i, f)| (f, i)).collect();
            let map = sections[b]
                .iter()
                .map(|f| {
                    let restricted: BTreeMap<usize, usize> = f
                        .iter()
                        .filter(|(&x, _)| opens[a] & (1 << x) != 0)
                        .map(|(&x, &v)| (x, v))
                        .collect();
                    index[&restricted]
                })
                .collect();
            maps.insert((b, a), map);
        }
        Ok((LatticePresheaf::new(lattice, values, maps)?, opens))
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn sections(&self, a: Elem) -> &[String] {
        &self.values[a]
    }

    /// `ρ_a^b(s)` for `s ∈ S(b)`.
    pub fn restrict(&self, b: Elem, a: Elem, s: usize) -> usize {
        self.restrictions[&(b, a)][s]
    }

    /// Replaces one restriction map.
    pub fn set_restriction(&mut self, b: Elem, a: Elem, map: Vec<usize>) -> Result<()> {
        if !self.lattice.leq(a, b) {
            return Err(Error::Precondition("restriction must go downwards".into()));
        }
        if map.len() != self.values[b].len() || map.iter().any(|&i| i >= self.values[a].len()) {
            return Err(Error::Input("restriction is not a total map".into()));
        }
        self.restrictions.insert((b, a), map);
        Ok(())
    }

    /// `ρ_a^a = id` and `ρ_a^b ∘ ρ_b^c = ρ_a^c` over every chain.
    pub fn check_presheaf(&self) -> Check<ChainWitness> {
        let l = &self.lattice;
        for a in l.elements() {
            if let Some(s) = (0..self.values[a].len()).find(|&s| self.restrict(a, a, s) != s) {
                return Check::Fails(ChainWitness {
                    a,
                    b: a,
                    c: a,
                    section: s,
                });
            }
        }
        for c in l.elements() {
            for b in l.elements().filter(|&b| l.leq(b, c)) {
                for a in l.elements().filter(|&a| l.leq(a, b)) {
                    let bad = (0..self.values[c].len())
                        .find(|&s| self.restrict(b, a, self.restrict(c, b, s)) != self.restrict(c, a, s));
                    if let Some(section) = bad {
                        return Check::Fails(ChainWitness { a, b, c, section });
                    }
                }
            }
        }
        Check::Holds
    }

    /// Existence and uniqueness of gluings for every cover and every
    /// compatible family.
    ///
    /// Covers are antichains of nonzero elements strictly below the target:
    /// a member below another member is determined by compatibility, and a
    /// cover containing the target glues trivially. Compatibility is asked on
    /// nonzero pairwise meets.
    pub fn check_sheaf_condition(&self, cap: usize) -> Result<SheafReport> {
        let l = &self.lattice;
        let mut report = SheafReport {
            existence: Check::Holds,
            uniqueness: Check::Holds,
            covers_checked: 0,
            families_checked: 0,
        };
        let mut budget = cap;
        for target in l.elements() {
            let below: Vec<Elem> = l
                .elements()
                .filter(|&e| e != l.zero() && e != target && l.leq(e, target))
                .collect();
            let mut covers = Vec::new();
            antichains(l, &below, 0, &mut Vec::new(), &mut covers);
            for cover in covers
                .into_iter()
                .filter(|c| c.len() >= 2 && l.join(c.iter().copied()) == target)
            {
                report.covers_checked += 1;
                let mut family = Vec::new();
                self.scan_families(target, &cover, &mut family, &mut report, &mut budget, cap)?;
                if !report.existence.holds() && !report.uniqueness.holds() {
                    return Ok(report);
                }
            }
        }
        Ok(report)
    }

    fn scan_families(
        &self,
        target: Elem,
        cover: &[Elem],
        family: &mut Vec<usize>,
        report: &mut SheafReport,
        budget: &mut usize,
        cap: usize,
    ) -> Result<()> {
        if *budget == 0 {
            return Err(Error::CapExceeded {
                what: "sheaf-condition search",
                size: cap + 1,
                cap,
            });
        }
        *budget -= 1;
        let l = &self.lattice;
        let i = family.len();
        if i == cover.len() {
            report.families_checked += 1;
            let gluings: Vec<usize> = (0..self.values[target].len())
                .filter(|&s| {
                    cover
                        .iter()
                        .zip(family.iter())
                        .all(|(&c, &f)| self.restrict(target, c, s) == f)
                })
                .collect();
            let witness = || CoverWitness {
                target,
                cover: cover.to_vec(),
                family: family.clone(),
                gluings: gluings.clone(),
            };
            if gluings.is_empty() && report.existence.holds() {
                report.existence = Check::Fails(witness());
            }
            if gluings.len() > 1 && report.uniqueness.holds() {
                report.uniqueness = Check::Fails(witness());
            }
            return Ok(());
        }
        for s in 0..self.values[cover[i]].len() {
            let compatible = (0..i).all(|j| {
                let m = l.meet2(cover[i], cover[j]);
                m == l.zero() || self.restrict(cover[i], m, s) == self.restrict(cover[j], m, family[j])
            });
            if compatible {
                family.push(s);
                self.scan_families(target, cover, family, report, budget, cap)?;
                family.pop();
                if !report.existence.holds() && !report.uniqueness.holds() {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// The colimit of `S(b)` over the members `b` of a quasipoint.
    pub fn stalk(&self, spectrum: &StoneSpectrum, quasipoint: usize) -> Result<Stalk> {
        if !Arc::ptr_eq(spectrum.lattice(), &self.lattice) && **spectrum.lattice() != *self.lattice {
            return Err(Error::Precondition("spectrum of a different lattice".into()));
        }
        if !spectrum.is_quasipoint(quasipoint) {
            return Err(Error::Precondition(format!("ideal {quasipoint} is not a quasipoint")));
        }
        let ideal = spectrum.ideal(quasipoint);
        let members: Vec<Elem> = ideal.members().iter().collect();
        // germs are classes of pairs (b, s); (b, s) ~ (c, t) iff they restrict
        // to the same section at some common lower member
        let mut parent: Vec<usize> = Vec::new();
        let mut offsets = HashMap::new();
        for &b in &members {
            offsets.insert(b, parent.len());
            parent.extend(parent.len()..parent.len() + self.values[b].len());
        }
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        for &b in &members {
            for &c in members.iter().filter(|&&c| self.lattice.leq(c, b)) {
                for s in 0..self.values[b].len() {
                    let x = find(&mut parent, offsets[&b] + s);
                    let y = find(&mut parent, offsets[&c] + self.restrict(b, c, s));
                    parent[x] = y;
                }
            }
        }
        let least = ideal.least();
        let classes: Vec<usize> = (0..self.values[least].len())
            .map(|s| find(&mut parent, offsets[&least] + s))
            .collect();
        let mut germs: Vec<usize> = Vec::new();
        for (s, &class) in classes.iter().enumerate() {
            if !germs.iter().any(|&g| classes[g] == class) {
                germs.push(s);
            }
        }
        Ok(Stalk {
            quasipoint,
            least,
            germs: germs.iter().map(|&s| self.values[least][s].clone()).collect(),
            germ_index: germs,
        })
    }

    /// Germ at the quasipoint of a section `s ∈ S(b)`, as an index into the stalk.
    pub fn germ(&self, stalk: &Stalk, b: Elem, s: usize) -> Result<usize> {
        if !self.lattice.leq(stalk.least, b) {
            return Err(Error::Precondition(format!(
                "`{}` does not belong to the quasipoint",
                self.lattice.name(b)
            )));
        }
        let at_least = self.restrict(b, stalk.least, s);
        stalk
            .germ_index
            .iter()
            .position(|&g| g == at_least)
            .ok_or_else(|| Error::Inconsistent("germ outside the stalk".into()))
    }

    /// Sections of the étale space over the discrete Stone spectrum: the
    /// presheaf `U ↦ ∏_{𝔅 ∈ U} stalk(𝔅)` on the Boolean lattice of sets of
    /// quasipoints, with the induced map from the original presheaf.
    pub fn sheafify(&self, spectrum: &StoneSpectrum, cap: usize) -> Result<Sheafification> {
        let quasipoints = spectrum.quasipoints().to_vec();
        let q = quasipoints.len();
        if q > 6 {
            return Err(Error::CapExceeded {
                what: "quasipoints for sheafification",
                size: q,
                cap: 6,
            });
        }
        let stalks = quasipoints
            .iter()
            .map(|&p| self.stalk(spectrum, p))
            .collect::<Result<Vec<_>>>()?;
        let n = 1usize << q;
        let names: Vec<String> = (0..n)
            .map(|m| {
                let parts: Vec<String> = (0..q)
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| spectrum.format_ideal(quasipoints[i]))
                    .collect();
                format!("{{{}}}", parts.join(";"))
            })
            .collect();
        let lattice = Arc::new(Lattice::from_relation(names, |a, b| a & !b == 0, None)?);
        let products: Vec<Vec<Vec<usize>>> = (0..n).map(|m| product(&stalks, m)).collect();
        let total: usize = products.iter().map(Vec::len).sum();
        if total > cap {
            return Err(Error::CapExceeded {
                what: "sheafified sections",
                size: total,
                cap,
            });
        }
        let values = products
            .iter()
            .enumerate()
            .map(|(m, secs)| {
                secs.iter()
                    .map(|sec| {
                        let members = (0..q).filter(|i| m & (1 << i) != 0);
                        let parts: Vec<String> = members.zip(sec).map(|(i, &g)| stalks[i].germs[g].clone()).collect();
                        format!("<{}>", parts.join(";"))
                    })
                    .collect()
            })
            .collect();
        let mut maps = HashMap::new();
        for (b, a) in pairs(&lattice) {
            let (mb, ma) = (lattice_mask(&lattice, b), lattice_mask(&lattice, a));
            let index: HashMap<&Vec<usize>, usize> = products[ma].iter().enumerate().map(|(i, s)| (s, i)).collect();
            let map = products[mb]
                .iter()
                .map(|sec| {
                    let kept: Vec<usize> = (0..q)
                        .filter(|i| mb & (1 << i) != 0)
                        .zip(sec)
                        .filter(|(i, _)| ma & (1 << i) != 0)
                        .map(|(_, &g)| g)
                        .collect();
                    index[&kept]
                })
                .collect();
            maps.insert((b, a), map);
        }
        let sheaf = LatticePresheaf::new(lattice, values, maps)?;
        // the unit sends s ∈ S(a) to its germs at the quasipoints containing a
        let unit = self
            .lattice
            .elements()
            .map(|a| {
                let over: Vec<usize> = (0..q).filter(|&i| spectrum.ideal(quasipoints[i]).contains(a)).collect();
                (0..self.values[a].len())
                    .map(|s| {
                        over.iter()
                            .map(|&i| self.germ(&stalks[i], a, s))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(|germs| (over.iter().fold(0usize, |m, &i| m | (1 << i)), germs))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sheafification { sheaf, stalks, unit })
    }

    pub fn to_file(&self, lattice_ref: &str) -> PresheafFile {
        let l = &self.lattice;
        let sections = l
            .elements()
            .map(|a| (l.name(a).to_string(), self.values[a].clone()))
            .collect();
        let restrictions = pairs(l)
            .filter(|(b, a)| a != b)
            .map(|(b, a)| RestrictionFile {
                from: l.name(b).to_string(),
                to: l.name(a).to_string(),
                map: self.restrictions[&(b, a)]
                    .iter()
                    .enumerate()
                    .map(|(s, &t)| (self.values[b][s].clone(), self.values[a][t].clone()))
                    .collect(),
            })
            .collect();
        PresheafFile {
            lattice: lattice_ref.to_string(),
            spectral: None,
            sections: Some(sections),
            restrictions: Some(restrictions),
        }
    }
}

/// Germs at one quasipoint, represented by sections over its least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stalk {
    pub quasipoint: usize,
    pub least: Elem,
    pub germs: Vec<String>,
    germ_index: Vec<usize>,
}

impl Stalk {
    pub fn len(&self) -> usize {
        self.germs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.germs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Sheafification {
    pub sheaf: LatticePresheaf,
    pub stalks: Vec<Stalk>,
    /// For each element `a`, the set of quasipoints containing it and the
    /// germs of each section of `S(a)` there.
    pub unit: Vec<(usize, Vec<Vec<usize>>)>,
}

fn lattice_mask(lattice: &Lattice, e: Elem) -> usize {
    // elements of the subset lattice are created in mask order
    debug_assert!(e < lattice.len());
    e
}

fn product(stalks: &[Stalk], mask: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for (i, stalk) in stalks.iter().enumerate() {
        if mask & (1 << i) == 0 {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..stalk.len()).map(move |g| {
                    let mut next = prefix.clone();
                    next.push(g);
                    next
                })
            })
            .collect();
    }
    out
}

fn pairs(lattice: &Lattice) -> impl Iterator<Item = (Elem, Elem)> + '_ {
    lattice.elements().flat_map(move |b| {
        lattice
            .elements()
            .filter(move |&a| lattice.leq(a, b))
            .map(move |a| (b, a))
    })
}

fn chains_below(lattice: &Lattice, top: Elem, len: usize) -> Vec<Vec<Elem>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for e in lattice.elements().filter(|&e| lattice.leq(e, top)) {
        for mut chain in chains_below(lattice, e, len - 1) {
            chain.push(e);
            out.push(chain);
        }
    }
    out
}

fn antichains(lattice: &Lattice, pool: &[Elem], start: usize, current: &mut Vec<Elem>, out: &mut Vec<Vec<Elem>>) {
    out.push(current.clone());
    for i in start..pool.len() {
        let e = pool[i];
        if current.iter().all(|&c| !lattice.leq(c, e) && !lattice.leq(e, c)) {
            current.push(e);
            antichains(lattice, pool, i + 1, current, out);
            current.pop();
        }
    }
}

fn locally_constant(space: &FiniteTopSpace, u: PointSet, levels: usize) -> Vec<BTreeMap<usize, usize>> {
    let points: Vec<usize> = ElemSet::from_bits(u).iter().collect();
    let mut out = vec![BTreeMap::new()];
    for &x in &points {
        out = out
            .into_iter()
            .flat_map(|f| {
                (0..levels).map(move |v| {
                    let mut g = f.clone();
                    g.insert(x, v);
                    g
                })
            })
            .collect();
    }
    out.retain(|f| {
        points.iter().all(|&x| {
            ElemSet::from_bits(space.neighbourhood(x))
                .iter()
                .all(|y| f[&{ y }] == f[&x])
        })
    });
    out
}

/// On-disk presheaf, either explicit or the spectral presheaf for given breakpoints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresheafFile {
    pub lattice: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrictions: Option<Vec<RestrictionFile>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestrictionFile {
    pub from: String,
    pub to: String,
    pub map: BTreeMap<String, String>,
}

impl PresheafFile {
    pub fn build(&self, lattice: Arc<Lattice>) -> Result<LatticePresheaf> {
        if let Some(lambdas) = &self.spectral {
            return LatticePresheaf::spectral(lattice, lambdas);
        }
        let sections = self
            .sections
            .as_ref()
            .ok_or_else(|| Error::Input("presheaf needs `spectral` or `sections`".into()))?;
        let mut values = vec![None; lattice.len()];
        for (name, set) in sections {
            values[lattice.index_of(name)?] = Some(set.clone());
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Input(format!("no sections for `{}`", lattice.name(i as Elem)))))
            .collect::<Result<Vec<_>>>()?;
        let mut maps = HashMap::new();
        for r in self.restrictions.iter().flatten() {
            let (b, a) = (lattice.index_of(&r.from)?, lattice.index_of(&r.to)?);
            let lookup = |set: &[String], name: &str| {
                set.iter()
                    .position(|s| s == name)
                    .ok_or_else(|| Error::Input(format!("unknown section `{name}`")))
            };
            let map = values[b]
                .iter()
                .map(|s| {
                    let t = r
                        .map
                        .get(s)
                        .ok_or_else(|| Error::Input(format!("restriction {}→{} misses `{s}`", r.from, r.to)))?;
                    lookup(&values[a], t)
                })
                .collect::<Result<Vec<_>>>()?;
            maps.insert((b, a), map);
        }
        LatticePresheaf::new(lattice, values, maps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn lat(name: &str) -> Arc<Lattice> {
        Arc::new(corpus::lattice_by_name(name).unwrap())
    }

    #[test]
    fn spectral_presheaf_is_a_presheaf() {
        for name in ["bool2", "mo2", "chain3", "o6"] {
            let p = LatticePresheaf::spectral(lat(name), &[1.0, 2.0]).unwrap();
            assert!(p.check_presheaf().holds(), "{name}");
        }
    }

    #[test]
    fn spectral_sections_count() {
        // with two breakpoints, S(a) ≅ [0, a]
        let l = lat("mo2");
        let p = LatticePresheaf::spectral(l.clone(), &[1.0, 2.0]).unwrap();
        assert_eq!(p.sections(l.one()).len(), 6);
        assert_eq!(p.sections(l.index_of("a").unwrap()).len(), 2);
        assert_eq!(p.sections(l.zero()).len(), 1);
        assert_eq!(p.sections(l.index_of("a").unwrap())[1], "[(1,a),(2,a)]");
    }

    #[test]
    fn corrupted_restriction_breaks_composition() {
        let l = lat("chain4");
        let mut p = LatticePresheaf::spectral(l.clone(), &[1.0, 2.0]).unwrap();
        let (c1, c2, one) = (l.index_of("c1").unwrap(), l.index_of("c2").unwrap(), l.one());
        let bad = vec![0; p.sections(one).len()];
        p.set_restriction(one, c2, bad).unwrap();
        match p.check_presheaf() {
            Check::Fails(w) => assert_eq!((w.a, w.b, w.c), (c1, c2, one)),
            Check::Holds => panic!("corruption not detected"),
        }
    }

    #[test]
    fn one_element_lattice() {
        let l = Arc::new(Lattice::from_relation(vec!["0".into()], |_, _| true, None).unwrap());
        let p = LatticePresheaf::constant(l, &["*"]).unwrap();
        assert!(p.check_presheaf().holds());
        assert!(p.check_sheaf_condition(DEFAULT_SEARCH_CAP).unwrap().holds());
    }

    #[test]
    fn constant_one_point_presheaf_is_a_sheaf() {
        let p = LatticePresheaf::constant(lat("mo2"), &["*"]).unwrap();
        assert!(p.check_sheaf_condition(DEFAULT_SEARCH_CAP).unwrap().holds());
    }

    #[test]
    fn mo2_spectral_presheaf_is_not_a_sheaf() {
        let l = lat("mo2");
        let p = LatticePresheaf::spectral(l.clone(), &[1.0, 2.0]).unwrap();
        let report = p.check_sheaf_condition(DEFAULT_SEARCH_CAP).unwrap();
        let Check::Fails(w) = &report.existence else {
            panic!("existence holds")
        };
        assert_eq!(w.target, l.one());
        assert!(w.gluings.is_empty());
        // the family really is compatible and really has no gluing
        for s in 0..p.sections(l.one()).len() {
            assert!(w
                .cover
                .iter()
                .zip(&w.family)
                .any(|(&c, &f)| p.restrict(l.one(), c, s) != f));
        }
        let Check::Fails(u) = &report.uniqueness else {
            panic!("uniqueness holds")
        };
        assert!(u.gluings.len() >= 2);
    }

    #[test]
    fn mo2_ungluable_family_by_hand() {
        let l = lat("mo2");
        let p = LatticePresheaf::spectral(l.clone(), &[1.0, 2.0]).unwrap();
        let idx = |n: &str| l.index_of(n).unwrap();
        let sec = |e: Elem, v: &str| p.sections(e).iter().position(|s| s == v).unwrap();
        let family = [
            (idx("a"), sec(idx("a"), "[(1,a),(2,a)]")),
            (idx("b"), sec(idx("b"), "[(1,b),(2,b)]")),
            (idx("a'"), sec(idx("a'"), "[(1,0),(2,a')]")),
        ];
        let gluings = (0..p.sections(l.one()).len())
            .filter(|&s| family.iter().all(|&(c, f)| p.restrict(l.one(), c, s) == f))
            .count();
        assert_eq!(gluings, 0);
    }

    #[test]
    fn boolean_spectral_presheaf_is_a_sheaf() {
        for name in ["bool2", "bool3"] {
            let p = LatticePresheaf::spectral(lat(name), &[1.0, 2.0]).unwrap();
            assert!(p.check_sheaf_condition(DEFAULT_SEARCH_CAP).unwrap().holds(), "{name}");
        }
    }

    #[test]
    fn function_presheaf_is_a_sheaf() {
        for space in corpus::all_topologies(3) {
            let (p, _) = LatticePresheaf::functions_on(&space, 2).unwrap();
            assert!(p.check_presheaf().holds());
            assert!(p.check_sheaf_condition(DEFAULT_SEARCH_CAP).unwrap().holds());
        }
    }

    #[test]
    fn stalk_of_boolean_spectral_presheaf() {
        let l = lat("bool2");
        let spectrum = StoneSpectrum::new(l.clone()).unwrap();
        let p = LatticePresheaf::spectral(l.clone(), &[1.0, 2.0]).unwrap();
        for &q in spectrum.quasipoints() {
            let stalk = p.stalk(&spectrum, q).unwrap();
            let atom = spectrum.ideal(q).least();
            assert_eq!(stalk.least, atom);
            // spectral families on {0, atom}
            assert_eq!(stalk.len(), 2);
            let germ = p.germ(&stalk, l.one(), p.sections(l.one()).len() - 1).unwrap();
            assert!(germ < 2);
        }
    }

    #[test]
    fn constant_stalk() {
        let l = lat("mo3");
        let spectrum = StoneSpectrum::new(l.clone()).unwrap();
        let p = LatticePresheaf::constant(l, &["x", "y"]).unwrap();
        for &q in spectrum.quasipoints() {
            assert_eq!(p.stalk(&spectrum, q).unwrap().germs, vec!["x", "y"]);
        }
    }

    #[test]
    fn sheafification_is_a_sheaf() {
        for name in ["bool2", "mo2", "chain3"] {
            let l = lat(name);
            let spectrum = StoneSpectrum::new(l.clone()).unwrap();
            let p = LatticePresheaf::spectral(l, &[1.0, 2.0]).unwrap();
            let s = p.sheafify(&spectrum, 100_000).unwrap();
            assert!(s.sheaf.check_presheaf().holds());
            assert!(
                s.sheaf.check_sheaf_condition(DEFAULT_SEARCH_CAP).unwrap().holds(),
                "{name}"
            );
            let top = s.sheaf.lattice().one();
            let expected: usize = s.stalks.iter().map(Stalk::len).product();
            assert_eq!(s.sheaf.sections(top).len(), expected);
        }
    }

    #[test]
    fn sheafification_unit_commutes_with_restriction() {
        let l = lat("mo2");
        let spectrum = StoneSpectrum::new(l.clone()).unwrap();
        let p = LatticePresheaf::spectral(l.clone(), &[1.0, 2.0]).unwrap();
        let s = p.sheafify(&spectrum, 100_000).unwrap();
        for (b, a) in pairs(&l) {
            let (mb, gb) = &s.unit[b];
            let (ma, ga) = &s.unit[a];
            assert_eq!(mb & ma, *ma, "quasipoints over a lie over b");
            for sec in 0..p.sections(b).len() {
                let restricted = &ga[p.restrict(b, a, sec)];
                let positions: Vec<usize> = (0..8).filter(|i| ma & (1 << i) != 0).collect();
                for (k, i) in positions.iter().enumerate() {
                    let kb = (0..*i).filter(|j| mb & (1 << j) != 0).count();
                    assert_eq!(gb[sec][kb], restricted[k]);
                }
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let l = lat("chain3");
        let p = LatticePresheaf::spectral(l.clone(), &[1.0, 2.0]).unwrap();
        let json = serde_json::to_string(&p.to_file("chain3")).unwrap();
        let back: PresheafFile = serde_json::from_str(&json).unwrap();
        let q = back.build(l.clone()).unwrap();
        for (b, a) in pairs(&l) {
            for s in 0..p.sections(b).len() {
                assert_eq!(p.restrict(b, a, s), q.restrict(b, a, s));
            }
        }
        let spectral: PresheafFile = serde_json::from_str(r#"{"lattice":"mo2","spectral":[1,2]}"#).unwrap();
        assert!(spectral.build(lat("mo2")).unwrap().check_presheaf().holds());
    }
}
