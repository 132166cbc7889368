//! Bounded spectral families with values in a finite lattice.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Elem, Lattice};

/// A right-continuous step function `λ ↦ E_λ` into a lattice.
///
/// Stored as strictly increasing breakpoints `(λ_i, E_i)`. Below `λ_1` the
/// value is `0`; from `λ_k` on it is `top`, the unit of the interval
/// `[0, top]` the family lives in (the whole lattice unless restricted).
#[derive(Debug, Clone)]
pub struct SpectralFamily {
    lattice: Arc<Lattice>,
    steps: Vec<(f64, Elem)>,
    top: Elem,
}

impl PartialEq for SpectralFamily {
    fn eq(&self, other: &Self) -> bool {
        self.steps == other.steps && self.top == other.top && *self.lattice == *other.lattice
    }
}

impl SpectralFamily {
    /// Builds a family into the whole lattice.
    pub fn new(lattice: Arc<Lattice>, steps: Vec<(f64, Elem)>) -> Result<Self> {
        let top = lattice.one();
        Self::with_top(lattice, steps, top)
    }

    /// Builds a family into the interval `[0, top]`.
    ///
    /// Breakpoints must be finite and strictly increasing, the elements
    /// increasing (repeats allowed) and the last one equal to `top`.
    pub fn with_top(lattice: Arc<Lattice>, steps: Vec<(f64, Elem)>, top: Elem) -> Result<Self> {
        lattice.check_index(top)?;
        if top == lattice.zero() {
            return Err(Error::InvalidFamily("top of the target interval is 0".into()));
        }
        let Some(&(_, last)) = steps.last() else {
            return Err(Error::InvalidFamily("no breakpoints".into()));
        };
        for &(lambda, e) in &steps {
            lattice.check_index(e)?;
            if !lambda.is_finite() {
                return Err(Error::InvalidFamily(format!("breakpoint {lambda} is not finite")));
            }
            if !lattice.leq(e, top) {
                return Err(Error::InvalidFamily(format!(
                    "`{}` is not below `{}`",
                    lattice.name(e),
                    lattice.name(top)
                )));
            }
        }
        for w in steps.windows(2) {
            let ((l0, e0), (l1, e1)) = (w[0], w[1]);
            if l0 >= l1 {
                return Err(Error::InvalidFamily(format!(
                    "breakpoints not strictly increasing: {l0} then {l1}"
                )));
            }
            if !lattice.leq(e0, e1) {
                return Err(Error::InvalidFamily(format!(
                    "not monotone: `{}` at {l0} is not below `{}` at {l1}",
                    lattice.name(e0),
                    lattice.name(e1)
                )));
            }
        }
        if last != top {
            return Err(Error::InvalidFamily(format!(
                "unbounded: last value `{}` is not `{}`",
                lattice.name(last),
                lattice.name(top)
            )));
        }
        let mut family = SpectralFamily { lattice, steps, top };
        family.canonicalize();
        Ok(family)
    }

    /// Drops breakpoints that do not change the value.
    fn canonicalize(&mut self) {
        let zero = self.lattice.zero();
        let mut previous = zero;
        self.steps.retain(|&(_, e)| {
            let keep = e != previous;
            previous = e;
            keep
        });
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn steps(&self) -> &[(f64, Elem)] {
        &self.steps
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    /// `E_λ`: the element of the last breakpoint at or below `λ`.
    pub fn eval(&self, lambda: f64) -> Elem {
        let idx = self.steps.partition_point(|&(l, _)| l <= lambda);
        if idx == 0 {
            self.lattice.zero()
        } else {
            self.steps[idx - 1].1
        }
    }

    /// `λ ↦ E_λ ∧ a`, a family into `[0, a]`.
    pub fn restrict(&self, a: Elem) -> Result<SpectralFamily> {
        self.lattice.check_index(a)?;
        if a == self.lattice.zero() {
            return Err(Error::Precondition("cannot restrict to 0".into()));
        }
        if !self.lattice.leq(a, self.top) {
            return Err(Error::Precondition(format!(
                "`{}` is not below the top `{}`",
                self.lattice.name(a),
                self.lattice.name(self.top)
            )));
        }
        let steps = self.steps.iter().map(|&(l, e)| (l, self.lattice.meet2(e, a))).collect();
        SpectralFamily::with_top(self.lattice.clone(), steps, a)
    }

    /// The points where the family is not locally constant.
    pub fn spectrum(&self) -> Vec<f64> {
        self.steps.iter().map(|&(l, _)| l).collect()
    }

    pub fn min(&self) -> f64 {
        self.steps[0].0
    }

    pub fn max(&self) -> f64 {
        self.steps[self.steps.len() - 1].0
    }

    pub fn to_file(&self, lattice_ref: &str) -> SpectralFamilyFile {
        SpectralFamilyFile {
            lattice: lattice_ref.to_string(),
            breakpoints: self
                .steps
                .iter()
                .map(|&(l, e)| (l, self.lattice.name(e).to_string()))
                .collect(),
            top: (self.top != self.lattice.one()).then(|| self.lattice.name(self.top).to_string()),
        }
    }
}

impl std::fmt::Display for SpectralFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|&(l, e)| format!("({l}, {})", self.lattice.name(e)))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// On-disk spectral family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralFamilyFile {
    pub lattice: String,
    pub breakpoints: Vec<(f64, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<String>,
}

impl SpectralFamilyFile {
    pub fn build(&self, lattice: Arc<Lattice>) -> Result<SpectralFamily> {
        let steps = self
            .breakpoints
            .iter()
            .map(|(l, name)| Ok((*l, lattice.index_of(name)?)))
            .collect::<Result<Vec<_>>>()?;
        let top = match &self.top {
            Some(name) => lattice.index_of(name)?,
            None => lattice.one(),
        };
        SpectralFamily::with_top(lattice, steps, top)
    }
}

/// A random family into `[0, top]`: a random strictly increasing chain
/// ending at `top`, with breakpoints drawn from small half-integers.
pub fn random_family<R: Rng + ?Sized>(lattice: &Arc<Lattice>, top: Elem, rng: &mut R) -> SpectralFamily {
    let l = lattice.as_ref();
    let below: Vec<Elem> = l.elements().filter(|&e| e != l.zero() && l.leq(e, top)).collect();
    let mut chain = vec![below[rng.gen_range(0..below.len())]];
    while *chain.last().unwrap() != top {
        let cur = *chain.last().unwrap();
        let up: Vec<Elem> = below.iter().copied().filter(|&e| l.lt(cur, e)).collect();
        chain.push(up[rng.gen_range(0..up.len())]);
    }
    let mut lambda = rng.gen_range(-4i32..4) as f64 / 2.0;
    let steps = chain
        .into_iter()
        .map(|e| {
            let step = (lambda, e);
            lambda += rng.gen_range(1i32..4) as f64 / 2.0;
            step
        })
        .collect();
    SpectralFamily::with_top(lattice.clone(), steps, top).expect("random chain is a valid family")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mo2() -> Arc<Lattice> {
        Arc::new(corpus::mo(2))
    }

    fn fam(l: &Arc<Lattice>, steps: &[(f64, &str)]) -> Result<SpectralFamily> {
        let steps = steps.iter().map(|&(x, n)| (x, l.index_of(n).unwrap())).collect();
        SpectralFamily::new(l.clone(), steps)
    }

    #[test]
    fn eval_steps() {
        let l = mo2();
        let e = fam(&l, &[(1.0, "a"), (2.0, "1")]).unwrap();
        assert_eq!(e.eval(0.5), l.zero());
        assert_eq!(e.eval(1.0), l.index_of("a").unwrap());
        assert_eq!(e.eval(1.5), l.index_of("a").unwrap());
        assert_eq!(e.eval(2.0), l.one());
        assert_eq!(e.eval(100.0), l.one());
    }

    #[test]
    fn rejects_bad_families() {
        let l = mo2();
        assert!(fam(&l, &[]).is_err());
        assert!(fam(&l, &[(1.0, "a")]).is_err());
        assert!(fam(&l, &[(1.0, "a"), (2.0, "b"), (3.0, "1")]).is_err());
        assert!(fam(&l, &[(2.0, "a"), (1.0, "1")]).is_err());
        assert!(fam(&l, &[(1.0, "a"), (1.0, "1")]).is_err());
        assert!(fam(&l, &[(f64::NAN, "1")]).is_err());
    }

    #[test]
    fn canonical_form_drops_repeats_and_leading_zero() {
        let l = mo2();
        let e = fam(&l, &[(1.0, "a"), (1.5, "a"), (2.0, "1")]).unwrap();
        assert_eq!(e.spectrum(), vec![1.0, 2.0]);
        let e = fam(&l, &[(0.0, "0"), (3.0, "1")]).unwrap();
        assert_eq!(e.spectrum(), vec![3.0]);
    }

    #[test]
    fn restriction_in_four_element_boolean_algebra() {
        let l = Arc::new(corpus::boolean(2));
        let e = fam(&l, &[(1.0, "p"), (2.0, "1")]).unwrap();
        let p2 = l.index_of("p'").unwrap();
        let r = e.restrict(p2).unwrap();
        assert_eq!(r.steps(), &[(2.0, p2)]);
        assert_eq!(r.top(), p2);
        assert_eq!(e.restrict(l.one()).unwrap(), e);
        assert!(e.restrict(l.zero()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let l = mo2();
        let e = fam(&l, &[(1.0, "a"), (2.0, "1")]).unwrap();
        let text = serde_json::to_string(&e.to_file("mo2")).unwrap();
        assert_eq!(text, r#"{"lattice":"mo2","breakpoints":[[1.0,"a"],[2.0,"1"]]}"#);
        let back: SpectralFamilyFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build(l).unwrap(), e);
    }

    fn probes(e: &SpectralFamily) -> Vec<f64> {
        let mut out = vec![e.min() - 1.0, e.max() + 1.0];
        for w in e.spectrum().windows(2) {
            out.push((w[0] + w[1]) / 2.0);
        }
        out.extend(e.spectrum());
        out
    }

    proptest! {
        #[test]
        fn restriction_commutes_with_eval(seed in any::<u64>(), which in 0usize..16) {
            let lattices = corpus::lattices();
            let (_, l) = &lattices[which % lattices.len()];
            let l = Arc::new(l.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = random_family(&l, l.one(), &mut rng);
            for a in l.elements().filter(|&a| a != l.zero()) {
                let r = e.restrict(a).unwrap();
                for x in probes(&e) {
                    prop_assert_eq!(r.eval(x), l.meet2(e.eval(x), a));
                }
            }
        }

        #[test]
        fn restriction_is_functorial(seed in any::<u64>(), which in 0usize..16) {
            let lattices = corpus::lattices();
            let (_, l) = &lattices[which % lattices.len()];
            let l = Arc::new(l.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = random_family(&l, l.one(), &mut rng);
            let nonzero: Vec<Elem> = l.elements().filter(|&a| a != l.zero()).collect();
            for &c in &nonzero {
                let ec = e.restrict(c).unwrap();
                prop_assert_eq!(&ec.restrict(c).unwrap(), &ec);
                for &b in nonzero.iter().filter(|&&b| l.leq(b, c)) {
                    let ecb = ec.restrict(b).unwrap();
                    for &a in nonzero.iter().filter(|&&a| l.leq(a, b)) {
                        prop_assert_eq!(ecb.restrict(a).unwrap(), ec.restrict(a).unwrap());
                    }
                }
            }
        }

        #[test]
        fn canonical_form_is_idempotent_and_preserves_values(seed in any::<u64>()) {
            let l = Arc::new(corpus::boolean(3));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = random_family(&l, l.one(), &mut rng);
            // pad with repeated values, then rebuild
            let mut padded = Vec::new();
            for &(x, a) in e.steps() {
                padded.push((x, a));
                padded.push((x + 0.25, a));
            }
            let again = SpectralFamily::new(l.clone(), padded).unwrap();
            prop_assert_eq!(&again, &e);
            let twice = SpectralFamily::new(l.clone(), again.steps().to_vec()).unwrap();
            prop_assert_eq!(&twice, &again);
            for x in probes(&e) {
                prop_assert_eq!(again.eval(x), e.eval(x));
            }
        }
    }
}
