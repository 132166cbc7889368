//! Observable functions on dual ideals, completely increasing functions and
//! the reconstruction of a spectral family from its observable function.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Elem, ElemSet, Lattice};
use crate::spectral::SpectralFamily;
use crate::stone::{up_closure, DualIdeal, StoneSpectrum};
use crate::Check;

/// `f_E(J) = min { λ_i | E_i ∈ J }`.
///
/// The family must reach the top of the lattice, so the minimum is taken
/// over a nonempty set.
pub fn observable_value(family: &SpectralFamily, ideal: &DualIdeal) -> Result<f64> {
    family
        .steps()
        .iter()
        .find(|&&(_, e)| ideal.contains(e))
        .map(|&(l, _)| l)
        .ok_or_else(|| Error::Precondition("no breakpoint element lies in the dual ideal".into()))
}

/// A real-valued table over all dual ideals of a finite lattice.
#[derive(Debug, Clone)]
pub struct ObservableFunction {
    spectrum: Arc<StoneSpectrum>,
    values: Vec<f64>,
}

impl PartialEq for ObservableFunction {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.spectrum.dual_ideals() == other.spectrum.dual_ideals()
    }
}

impl ObservableFunction {
    /// Wraps a table indexed like [`StoneSpectrum::dual_ideals`] and checks
    /// the intersection condition and upper semicontinuity.
    pub fn new(spectrum: Arc<StoneSpectrum>, values: Vec<f64>) -> Result<Self> {
        let f = Self::new_unchecked(spectrum, values)?;
        f.verify()?;
        Ok(f)
    }

    pub fn new_unchecked(spectrum: Arc<StoneSpectrum>, values: Vec<f64>) -> Result<Self> {
        if values.len() != spectrum.dual_ideals().len() {
            return Err(Error::DimensionMismatch(values.len(), spectrum.dual_ideals().len()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Input(format!("table value {v} is not finite")));
        }
        Ok(ObservableFunction { spectrum, values })
    }

    /// Builds `f_E`. The family must be a family into the whole lattice.
    pub fn from_spectral(spectrum: Arc<StoneSpectrum>, family: &SpectralFamily) -> Result<Self> {
        if family.top() != spectrum.lattice().one() || **family.lattice() != **spectrum.lattice() {
            return Err(Error::Precondition(
                "family must take values in the whole lattice of the spectrum".into(),
            ));
        }
        let values = spectrum
            .dual_ideals()
            .iter()
            .map(|j| observable_value(family, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(ObservableFunction { spectrum, values })
    }

    pub fn spectrum(&self) -> &Arc<StoneSpectrum> {
        &self.spectrum
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        self.spectrum.lattice()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn value_of(&self, members: ElemSet) -> Option<f64> {
        self.spectrum.index_of(members).map(|i| self.values[i])
    }

    /// `f(H_a)` for `a != 0`.
    pub fn principal_value(&self, a: Elem) -> Option<f64> {
        self.spectrum.principal(a).map(|i| self.values[i])
    }

    /// Values on the quasipoints, in the spectrum's quasipoint order.
    pub fn on_quasipoints(&self) -> Vec<f64> {
        self.spectrum.quasipoints().iter().map(|&i| self.values[i]).collect()
    }

    /// Sorted distinct values.
    pub fn image(&self) -> Vec<f64> {
        let mut out = self.values.clone();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Runs both axiom checks, reporting the first failure as an error.
    pub fn verify(&self) -> Result<()> {
        if let Check::Fails((i, j)) = self.check_intersection_condition() {
            return Err(Error::Axiom {
                axiom: "intersection condition",
                witness: format!(
                    "f({} ∩ {}) != max(f({}), f({}))",
                    self.spectrum.format_ideal(i),
                    self.spectrum.format_ideal(j),
                    self.spectrum.format_ideal(i),
                    self.spectrum.format_ideal(j)
                ),
            });
        }
        if let Check::Fails(i) = self.check_upper_semicontinuous() {
            return Err(Error::Axiom {
                axiom: "upper semicontinuity",
                witness: format!("no basis neighbourhood of {} bounds f", self.spectrum.format_ideal(i)),
            });
        }
        Ok(())
    }

    /// `f(J ∩ K) = max(f(J), f(K))` for every pair of dual ideals.
    ///
    /// The intersection of two dual ideals is again one, and any finite family
    /// reduces to repeated pairwise intersections, so pairs are enough.
    pub fn check_intersection_condition(&self) -> Check<(usize, usize)> {
        let ideals = self.spectrum.dual_ideals();
        for i in 0..ideals.len() {
            for j in (i + 1)..ideals.len() {
                let meet = ideals[i].members().intersection(ideals[j].members());
                let k = self.spectrum.index_of(meet).expect("intersection of dual ideals");
                if self.values[k] != self.values[i].max(self.values[j]) {
                    return Check::Fails((i, j));
                }
            }
        }
        Check::Holds
    }

    /// Every `J0` has a basis neighbourhood `D_P`, `P ∈ J0`, on which
    /// `f <= f(J0)`. Fails with the index of the first `J0` without one.
    pub fn check_upper_semicontinuous(&self) -> Check<usize> {
        let ideals = self.spectrum.dual_ideals();
        for (i0, j0) in ideals.iter().enumerate() {
            let bounded = j0.members().iter().any(|p| {
                ideals
                    .iter()
                    .zip(&self.values)
                    .filter(|(j, _)| j.contains(p))
                    .all(|(_, &v)| v <= self.values[i0])
            });
            if !bounded {
                return Check::Fails(i0);
            }
        }
        Check::Holds
    }

    /// `f(J) = min { f(H_P) | P ∈ J }` for every `J`.
    pub fn check_principal_infimum(&self) -> Check<usize> {
        for (i, j) in self.spectrum.dual_ideals().iter().enumerate() {
            let inf = j
                .members()
                .iter()
                .map(|p| self.principal_value(p).expect("members are nonzero"))
                .fold(f64::INFINITY, f64::min);
            if inf != self.values[i] {
                return Check::Fails(i);
            }
        }
        Check::Holds
    }

    /// `J ⊆ K` implies `f(J) >= f(K)`.
    pub fn check_decreasing(&self) -> Check<(usize, usize)> {
        let ideals = self.spectrum.dual_ideals();
        for (i, a) in ideals.iter().enumerate() {
            for (k, b) in ideals.iter().enumerate() {
                if a.members().is_subset(b.members()) && self.values[i] < self.values[k] {
                    return Check::Fails((i, k));
                }
            }
        }
        Check::Holds
    }

    /// The unique spectral family whose observable function is `self`.
    ///
    /// For every value `λ` the preimage `f⁻¹(λ)` has a least member `J_λ`
    /// (the intersection of the preimage), and `E_λ` is the meet of `J_λ`.
    pub fn reconstruct(&self) -> Result<SpectralFamily> {
        self.verify()?;
        let lattice = self.lattice().clone();
        let ideals = self.spectrum.dual_ideals();
        let mut steps = Vec::new();
        for lambda in self.image() {
            let preimage = ideals
                .iter()
                .zip(&self.values)
                .filter(|(_, &v)| v == lambda)
                .fold(lattice.all(), |acc, (j, _)| acc.intersection(j.members()));
            let least = self
                .spectrum
                .index_of(preimage)
                .filter(|&k| self.values[k] == lambda)
                .ok_or_else(|| Error::Axiom {
                    axiom: "intersection condition",
                    witness: format!("preimage of {lambda} has no least member"),
                })?;
            steps.push((lambda, ideals[least].least()));
        }
        let family = SpectralFamily::new(lattice, steps).map_err(|e| Error::Axiom {
            axiom: "intersection condition",
            witness: format!("minimal preimages do not form a spectral family: {e}"),
        })?;
        if family.spectrum() != self.image() {
            return Err(Error::Inconsistent("reconstructed family repeats an element".into()));
        }
        let back = ObservableFunction::from_spectral(self.spectrum.clone(), &family)?;
        if back.values != self.values {
            return Err(Error::Inconsistent("reconstructed family does not reproduce f".into()));
        }
        Ok(family)
    }

    /// `r_f(P) = f(H_P)`.
    pub fn to_completely_increasing(&self) -> CompletelyIncreasingFunction {
        let l = self.lattice();
        let values = l.elements().map(|p| self.principal_value(p)).collect();
        CompletelyIncreasingFunction {
            lattice: l.clone(),
            values,
        }
    }

    /// `(ρ f)(I) = f(C(I))` on a sub-ortholattice, where `C(I)` is the cone
    /// of `I` in the parent lattice.
    pub fn restrict(&self, members: ElemSet) -> Result<(ObservableFunction, Vec<Elem>)> {
        let parent = self.lattice();
        let (sub, embed) = parent.sublattice(members)?;
        let sub_spectrum = Arc::new(StoneSpectrum::new(Arc::new(sub))?);
        let values = sub_spectrum
            .dual_ideals()
            .iter()
            .map(|i| {
                let image: ElemSet = i.members().iter().map(|e| embed[e]).collect();
                let cone = up_closure(parent, image);
                self.value_of(cone)
                    .ok_or_else(|| Error::Inconsistent(format!("cone {} is not a dual ideal", parent.format_set(cone))))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((ObservableFunction::new_unchecked(sub_spectrum, values)?, embed))
    }

    pub fn to_file(&self, lattice_ref: &str) -> ObservableTableFile {
        let values = self
            .spectrum
            .dual_ideals()
            .iter()
            .zip(&self.values)
            .map(|(j, &v)| (ideal_key(self.lattice(), j.members()), v))
            .collect();
        ObservableTableFile {
            lattice: lattice_ref.to_string(),
            values,
        }
    }
}

/// Table key of a dual ideal: member names in element order, comma separated.
pub fn ideal_key(lattice: &Lattice, members: ElemSet) -> String {
    members.iter().map(|e| lattice.name(e)).collect::<Vec<_>>().join(",")
}

/// Parses `a,1` or `{a,1}`.
pub fn parse_ideal(lattice: &Lattice, text: &str) -> Result<ElemSet> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    lattice.parse_set(inner)
}

/// On-disk observable table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableTableFile {
    pub lattice: String,
    pub values: BTreeMap<String, f64>,
}

impl ObservableTableFile {
    /// Builds the table without checking the axioms.
    pub fn build(&self, spectrum: Arc<StoneSpectrum>) -> Result<ObservableFunction> {
        let lattice = spectrum.lattice().clone();
        let mut values = vec![None; spectrum.dual_ideals().len()];
        for (key, &v) in &self.values {
            let set = parse_ideal(&lattice, key)?;
            let idx = spectrum
                .index_of(set)
                .ok_or_else(|| Error::Input(format!("{} is not a dual ideal", lattice.format_set(set))))?;
            values[idx] = Some(v);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Input(format!("table has no value for {}", spectrum.format_ideal(i)))))
            .collect::<Result<Vec<_>>>()?;
        ObservableFunction::new_unchecked(spectrum, values)
    }
}

/// A bounded real function on the nonzero elements of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletelyIncreasingFunction {
    lattice: Arc<Lattice>,
    values: Vec<Option<f64>>,
}

impl CompletelyIncreasingFunction {
    /// `values[0]` (the bottom) is ignored; all others must be finite.
    pub fn new(lattice: Arc<Lattice>, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::DimensionMismatch(values.len(), lattice.len()));
        }
        let zero = lattice.zero();
        let values = values
            .into_iter()
            .enumerate()
            .map(|(p, v)| {
                if p == zero {
                    Ok(None)
                } else if v.is_finite() {
                    Ok(Some(v))
                } else {
                    Err(Error::Input(format!("r({}) = {v} is not finite", lattice.name(p))))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompletelyIncreasingFunction { lattice, values })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// `r(P)`, or `None` for `P = 0`.
    pub fn value(&self, p: Elem) -> Option<f64> {
        self.values.get(p).copied().flatten()
    }

    /// `r(P ∨ Q) = max(r(P), r(Q))` for all nonzero `P, Q`.
    ///
    /// Joins of larger finite families reduce to pairs.
    pub fn check(&self) -> Check<(Elem, Elem)> {
        let l = &self.lattice;
        let nonzero: Vec<Elem> = l.elements().filter(|&p| p != l.zero()).collect();
        for (i, &p) in nonzero.iter().enumerate() {
            for &q in &nonzero[i + 1..] {
                let (rp, rq) = (self.values[p].unwrap(), self.values[q].unwrap());
                if self.values[l.join2(p, q)].unwrap() != rp.max(rq) {
                    return Check::Fails((p, q));
                }
            }
        }
        Check::Holds
    }

    /// `f_r(J) = min { r(P) | P ∈ J }`, a table over the dual ideals. The
    /// result is an observable function exactly when `r` passes [`Self::check`].
    pub fn to_observable(&self, spectrum: Arc<StoneSpectrum>) -> Result<ObservableFunction> {
        if **spectrum.lattice() != *self.lattice {
            return Err(Error::Precondition("spectrum belongs to another lattice".into()));
        }
        let values = spectrum.dual_ideals().iter().map(|j| self.infimum_over(j)).collect();
        ObservableFunction::new_unchecked(spectrum, values)
    }

    pub fn infimum_over(&self, ideal: &DualIdeal) -> f64 {
        ideal
            .members()
            .iter()
            .map(|p| self.values[p].expect("dual ideals avoid 0"))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of the observability test for a function on quasipoints.
#[derive(Debug, Clone)]
pub struct Observability {
    /// `r(P) = max { g(B) | B ∈ Q_P }`.
    pub induced: CompletelyIncreasingFunction,
    pub verdict: Check<(Elem, Elem)>,
    /// The spectral family of the extension, when `g` is observable.
    pub family: Option<SpectralFamily>,
}

/// Decides whether a function `g` on the quasipoints (indexed as
/// [`StoneSpectrum::quasipoints`]) is the restriction of an observable function.
pub fn observability_criterion(spectrum: Arc<StoneSpectrum>, g: &[f64]) -> Result<Observability> {
    let qp = spectrum.quasipoints();
    if g.len() != qp.len() {
        return Err(Error::DimensionMismatch(g.len(), qp.len()));
    }
    let lattice = spectrum.lattice().clone();
    let values = lattice
        .elements()
        .map(|p| {
            if p == lattice.zero() {
                return Ok(0.0);
            }
            spectrum
                .basis_set(p)
                .quasipoints
                .iter()
                .map(|b| g[qp.iter().position(|q| q == b).expect("quasipoint index")])
                .reduce(f64::max)
                .ok_or_else(|| Error::Inconsistent(format!("Q_{} is empty", lattice.name(p))))
        })
        .collect::<Result<Vec<_>>>()?;
    let induced = CompletelyIncreasingFunction::new(lattice, values)?;
    let verdict = induced.check();
    let family = if verdict.holds() {
        let f = induced.to_observable(spectrum)?;
        if f.on_quasipoints() != g {
            return Err(Error::Inconsistent("extension does not restrict to g".into()));
        }
        Some(f.reconstruct()?)
    } else {
        None
    };
    Ok(Observability {
        induced,
        verdict,
        family,
    })
}
