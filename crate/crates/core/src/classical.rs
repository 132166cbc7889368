//! Spectral families in the lattice of open sets of a finite space, the
//! functions they induce, and grid versions of four families on the real line.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Elem, ElemSet, Lattice, MAX_ELEMENTS};
use crate::spectral::SpectralFamily;
use crate::Check;

/// A set of points as a bitmask.
pub type PointSet = u64;

fn full_mask(n: usize) -> PointSet {
    ElemSet::full(n).bits()
}

fn points_of(mask: PointSet) -> impl Iterator<Item = usize> {
    ElemSet::from_bits(mask).iter()
}

/// A topology on at most 64 points, stored through the smallest open
/// neighbourhood of every point.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTopSpace {
    points: Vec<String>,
    neighbourhoods: Vec<PointSet>,
}

impl FiniteTopSpace {
    /// Validates that `opens` contains `∅` and the whole space and is closed
    /// under binary unions and intersections.
    pub fn from_masks(points: Vec<String>, opens: Vec<PointSet>) -> Result<Self> {
        let n = points.len();
        if n == 0 || n > MAX_ELEMENTS {
            return Err(Error::CapExceeded {
                what: "space",
                size: n,
                cap: MAX_ELEMENTS,
            });
        }
        let full = full_mask(n);
        if let Some(u) = opens.iter().find(|&&u| u & !full != 0) {
            return Err(Error::Input(format!("open set {u:#b} names unknown points")));
        }
        if !opens.contains(&0) || !opens.contains(&full) {
            return Err(Error::Input(
                "opens must contain the empty set and the whole space".into(),
            ));
        }
        for &u in &opens {
            for &v in &opens {
                if !opens.contains(&(u | v)) || !opens.contains(&(u & v)) {
                    return Err(Error::Input(format!(
                        "opens not closed under union and intersection at {} and {}",
                        format_points(&points, u),
                        format_points(&points, v)
                    )));
                }
            }
        }
        let neighbourhoods = (0..n)
            .map(|x| {
                opens
                    .iter()
                    .filter(|&&u| u & (1 << x) != 0)
                    .fold(full, |acc, &u| acc & u)
            })
            .collect();
        Ok(FiniteTopSpace { points, neighbourhoods })
    }

    pub fn discrete(points: Vec<String>) -> Result<Self> {
        let n = points.len();
        if n == 0 || n > MAX_ELEMENTS {
            return Err(Error::CapExceeded {
                what: "space",
                size: n,
                cap: MAX_ELEMENTS,
            });
        }
        Ok(FiniteTopSpace {
            points,
            neighbourhoods: (0..n).map(|x| 1 << x).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn full(&self) -> PointSet {
        full_mask(self.len())
    }

    pub fn point_index(&self, name: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    /// Smallest open set containing `x`.
    pub fn neighbourhood(&self, x: usize) -> PointSet {
        self.neighbourhoods[x]
    }

    pub fn interior(&self, s: PointSet) -> PointSet {
        (0..self.len())
            .filter(|&x| self.neighbourhoods[x] & !s == 0)
            .fold(0, |acc, x| acc | (1 << x))
    }

    pub fn closure(&self, s: PointSet) -> PointSet {
        self.full() & !self.interior(self.full() & !s)
    }

    pub fn is_open(&self, s: PointSet) -> bool {
        self.interior(s) == s
    }

    pub fn is_regular_open(&self, s: PointSet) -> bool {
        self.interior(self.closure(s)) == s
    }

    /// Every open set, smallest first. Fails above `cap` open sets.
    pub fn opens(&self, cap: usize) -> Result<Vec<PointSet>> {
        let mut found = vec![0];
        let mut frontier = vec![0];
        while let Some(u) = frontier.pop() {
            for &nb in &self.neighbourhoods {
                let v = u | nb;
                if !found.contains(&v) {
                    if found.len() == cap {
                        return Err(Error::CapExceeded {
                            what: "open-set lattice",
                            size: cap + 1,
                            cap,
                        });
                    }
                    found.push(v);
                    frontier.push(v);
                }
            }
        }
        found.sort_by_key(|&u| (u.count_ones(), u));
        Ok(found)
    }

    /// The lattice of open sets ordered by inclusion, with the open set of
    /// each lattice element.
    pub fn open_lattice(&self) -> Result<(Lattice, Vec<PointSet>)> {
        let opens = self.opens(MAX_ELEMENTS)?;
        let names = opens.iter().map(|&u| self.format(u)).collect();
        let lattice = Lattice::from_relation(names, |a, b| opens[a] & !opens[b] == 0, None)?;
        Ok((lattice, opens))
    }

    /// `f` is continuous iff it is constant on every minimal neighbourhood.
    pub fn is_continuous(&self, f: &[f64]) -> Check<(usize, usize)> {
        for x in 0..self.len() {
            if let Some(y) = points_of(self.neighbourhoods[x]).find(|&y| f[y] != f[x]) {
                return Check::Fails((x, y));
            }
        }
        Check::Holds
    }

    /// Specialization preorder as a Graphviz digraph (`x -> y` when `x ∈ cl{y}`).
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph specialization {\n");
        for (i, p) in self.points.iter().enumerate() {
            s.push_str(&format!("  p{i} [label={p:?}];\n"));
        }
        for y in 0..self.len() {
            for x in points_of(self.closure(1 << y)).filter(|&x| x != y) {
                s.push_str(&format!("  p{x} -> p{y};\n"));
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn format(&self, s: PointSet) -> String {
        format_points(&self.points, s)
    }

    pub fn parse(&self, names: &[String]) -> Result<PointSet> {
        names.iter().try_fold(0, |acc, n| Ok(acc | (1 << self.point_index(n)?)))
    }

    pub fn to_file(&self) -> TopologyFile {
        let opens = self
            .opens(1 << 12)
            .unwrap_or_default()
            .into_iter()
            .map(|u| points_of(u).map(|x| self.points[x].clone()).collect())
            .collect();
        TopologyFile {
            points: self.points.clone(),
            opens,
        }
    }
}

fn format_points(points: &[String], s: PointSet) -> String {
    let names: Vec<&str> = points_of(s).map(|x| points[x].as_str()).collect();
    format!("{{{}}}", names.join(","))
}

/// On-disk topology.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyFile {
    pub points: Vec<String>,
    pub opens: Vec<Vec<String>>,
}

impl TopologyFile {
    pub fn build(&self) -> Result<FiniteTopSpace> {
        let index = |name: &String| {
            self.points
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| Error::UnknownElement(name.clone()))
        };
        let opens = self
            .opens
            .iter()
            .map(|u| u.iter().try_fold(0u64, |acc, p| Ok(acc | (1 << index(p)?))))
            .collect::<Result<Vec<_>>>()?;
        FiniteTopSpace::from_masks(self.points.clone(), opens)
    }
}

/// On-disk real function on the points of a space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointFunctionFile {
    pub values: BTreeMap<String, f64>,
}

impl PointFunctionFile {
    pub fn build(&self, space: &FiniteTopSpace) -> Result<Vec<f64>> {
        let mut out = vec![None; space.len()];
        for (name, &v) in &self.values {
            out[space.point_index(name)?] = Some(v);
        }
        out.into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Input(format!("no value for point `{}`", space.points()[i]))))
            .collect()
    }
}

/// A step family `λ ↦ σ(λ)` of open sets.
///
/// Below the first breakpoint the value is `base`, which need not be empty;
/// its complement is the admissible domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TopSpectralFamily {
    space: Arc<FiniteTopSpace>,
    base: PointSet,
    steps: Vec<(f64, PointSet)>,
}

impl TopSpectralFamily {
    pub fn new(space: Arc<FiniteTopSpace>, base: PointSet, steps: Vec<(f64, PointSet)>) -> Result<Self> {
        if !space.is_open(base) {
            return Err(Error::InvalidFamily(format!("{} is not open", space.format(base))));
        }
        let mut previous = base;
        let mut last_lambda = f64::NEG_INFINITY;
        let mut canonical = Vec::new();
        for (lambda, u) in steps {
            if !lambda.is_finite() || lambda <= last_lambda {
                return Err(Error::InvalidFamily("breakpoints must be finite and increasing".into()));
            }
            if !space.is_open(u) {
                return Err(Error::InvalidFamily(format!("{} is not open", space.format(u))));
            }
            if previous & !u != 0 {
                return Err(Error::InvalidFamily(format!("not monotone at {lambda}")));
            }
            if u != previous {
                canonical.push((lambda, u));
            }
            previous = u;
            last_lambda = lambda;
        }
        Ok(TopSpectralFamily {
            space,
            base,
            steps: canonical,
        })
    }

    pub fn space(&self) -> &Arc<FiniteTopSpace> {
        &self.space
    }

    pub fn base(&self) -> PointSet {
        self.base
    }

    pub fn steps(&self) -> &[(f64, PointSet)] {
        &self.steps
    }

    pub fn is_bounded_above(&self) -> bool {
        self.steps.last().map_or(self.base, |s| s.1) == self.space.full()
    }

    pub fn eval(&self, lambda: f64) -> PointSet {
        let idx = self.steps.partition_point(|&(l, _)| l <= lambda);
        if idx == 0 {
            self.base
        } else {
            self.steps[idx - 1].1
        }
    }

    /// `M ∖ ⋂_λ σ(λ)`.
    pub fn admissible_domain(&self) -> PointSet {
        self.space.full() & !self.base
    }

    /// `inf { λ | x ∈ σ(λ) }` for `x` in the admissible domain.
    pub fn induced(&self, x: usize) -> Result<f64> {
        if x >= self.space.len() {
            return Err(Error::IndexOutOfRange(x));
        }
        if self.base & (1 << x) != 0 {
            return Err(Error::Domain(format!(
                "`{}` lies in every σ(λ)",
                self.space.points()[x]
            )));
        }
        self.steps
            .iter()
            .find(|&&(_, u)| u & (1 << x) != 0)
            .map(|&(l, _)| l)
            .ok_or_else(|| Error::Domain(format!("`{}` lies in no σ(λ)", self.space.points()[x])))
    }

    /// The induced function, `None` outside the admissible domain.
    pub fn induced_function(&self) -> Vec<Option<f64>> {
        (0..self.space.len()).map(|x| self.induced(x).ok()).collect()
    }

    /// Points where the family is not locally constant.
    pub fn spectrum(&self) -> Vec<f64> {
        self.steps.iter().map(|&(l, _)| l).collect()
    }

    /// `cl σ(λ) ⊆ σ(μ)` for all `λ < μ`.
    ///
    /// Each step value must be clopen, since `μ` may lie in the same step as
    /// `λ`. The witness is a pair `(λ, μ)` inside the first offending step.
    pub fn is_continuous(&self) -> Check<(f64, f64)> {
        let mut values = vec![(self.steps.first().map_or(0.0, |s| s.0) - 2.0, self.base)];
        values.extend(self.steps.iter().copied());
        for (i, &(lambda, u)) in values.iter().enumerate() {
            let closure = self.space.closure(u);
            if closure != u {
                let mu = match values.get(i + 1) {
                    Some(&(next, _)) => (lambda + next) / 2.0,
                    None => lambda + 1.0,
                };
                return Check::Fails((lambda, mu));
            }
        }
        Check::Holds
    }

    /// The family in the open-set lattice, when its base is empty.
    pub fn to_lattice_family(&self) -> Result<(Arc<Lattice>, SpectralFamily, Vec<PointSet>)> {
        if self.base != 0 {
            return Err(Error::Precondition("family does not start at the empty set".into()));
        }
        if !self.is_bounded_above() {
            return Err(Error::Precondition("family does not reach the whole space".into()));
        }
        let (lattice, opens) = self.space.open_lattice()?;
        let lattice = Arc::new(lattice);
        let steps = self
            .steps
            .iter()
            .map(|&(l, u)| (l, opens.iter().position(|&v| v == u).expect("values are open") as Elem))
            .collect();
        let family = SpectralFamily::new(lattice.clone(), steps)?;
        Ok((lattice, family, opens))
    }
}

/// `σ_f(λ) = int f⁻¹(]−∞, λ])`, with steps at the values of `f`.
pub fn sigma_from_function(space: &Arc<FiniteTopSpace>, f: &[f64]) -> Result<TopSpectralFamily> {
    if f.len() != space.len() {
        return Err(Error::DimensionMismatch(f.len(), space.len()));
    }
    if let Some(v) = f.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("function value {v} is not finite")));
    }
    let mut values = f.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let steps = values
        .into_iter()
        .map(|lambda| {
            let below = (0..f.len())
                .filter(|&x| f[x] <= lambda)
                .fold(0, |acc, x| acc | (1 << x));
            (lambda, space.interior(below))
        })
        .collect();
    TopSpectralFamily::new(space.clone(), 0, steps)
}

/// `σ_{f_σ}(λ) = σ(λ) ∩ 𝒟(σ)` at every breakpoint and below the first.
pub fn check_restriction_identity(sigma: &TopSpectralFamily) -> Result<Check<f64>> {
    let domain = sigma.admissible_domain();
    let space = sigma.space();
    let f = sigma.induced_function();
    let mut probes: Vec<f64> = sigma.spectrum();
    if let Some(&first) = probes.first() {
        probes.push(first - 1.0);
    }
    for lambda in probes {
        let below = points_of(domain)
            .filter(|&x| f[x].is_some_and(|v| v <= lambda))
            .fold(0, |acc, x| acc | (1 << x));
        // the domain is open here, so interiors in the subspace agree with interiors in M
        if space.interior(below) != sigma.eval(lambda) & domain {
            return Ok(Check::Fails(lambda));
        }
    }
    Ok(Check::Holds)
}

/// The four families on the real line realized on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealFamily {
    /// `λ ↦ ]−∞, λ[`
    Id,
    /// `λ ↦ ]−λ, λ[`
    Abs,
    /// `λ ↦ ]−e^λ, e^λ[`
    Ln,
    /// `λ ↦ ]−∞, ⌊λ⌋ + 1[`
    Step,
}

impl std::str::FromStr for RealFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" => Ok(RealFamily::Id),
            "abs" => Ok(RealFamily::Abs),
            "ln" => Ok(RealFamily::Ln),
            "step" => Ok(RealFamily::Step),
            _ => Err(Error::Input(format!("unknown family `{s}` (id, abs, ln, step)"))),
        }
    }
}

/// An open interval `]lo, hi[` of the real line, `None` for an infinite end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenInterval {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl OpenInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo.is_none_or(|lo| lo < x) && self.hi.is_none_or(|hi| x < hi)
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(lo), Some(hi)) if lo >= hi)
    }

    /// `cl self ⊆ other`.
    pub fn closure_within(&self, other: &OpenInterval) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = match (self.lo, other.lo) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(c)) => c < a,
        };
        let hi_ok = match (self.hi, other.hi) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(b), Some(d)) => b < d,
        };
        lo_ok && hi_ok
    }
}

/// Lowest `λ` used when deciding whether a point ever leaves the family.
pub const SEARCH_FLOOR: f64 = -700.0;
/// Grid points must lie in `[-GRID_LIMIT, GRID_LIMIT]`.
pub const GRID_LIMIT: f64 = 100.0;

impl RealFamily {
    pub const ALL: [RealFamily; 4] = [RealFamily::Id, RealFamily::Abs, RealFamily::Ln, RealFamily::Step];

    pub fn name(self) -> &'static str {
        match self {
            RealFamily::Id => "id",
            RealFamily::Abs => "abs",
            RealFamily::Ln => "ln",
            RealFamily::Step => "step",
        }
    }

    pub fn value(self, lambda: f64) -> OpenInterval {
        match self {
            RealFamily::Id => OpenInterval {
                lo: None,
                hi: Some(lambda),
            },
            RealFamily::Abs => OpenInterval {
                lo: Some(-lambda),
                hi: Some(lambda),
            },
            RealFamily::Ln => {
                let r = lambda.exp();
                OpenInterval {
                    lo: Some(-r),
                    hi: Some(r),
                }
            }
            RealFamily::Step => OpenInterval {
                lo: None,
                hi: Some(lambda.floor() + 1.0),
            },
        }
    }

    /// The function the family should induce, `None` where it is undefined.
    pub fn target(self, x: f64) -> Option<f64> {
        match self {
            RealFamily::Id => Some(x),
            RealFamily::Abs => Some(x.abs()),
            RealFamily::Ln => (x != 0.0).then(|| x.abs().ln()),
            RealFamily::Step => Some(x.floor()),
        }
    }

    /// Smallest double `λ >= SEARCH_FLOOR` with `x ∈ σ(λ)`, or `None` when `x`
    /// already lies in `σ(SEARCH_FLOOR)`.
    pub fn threshold(self, x: f64) -> Option<f64> {
        let member = |l: f64| self.value(l).contains(x);
        if member(SEARCH_FLOOR) {
            return None;
        }
        let mut hi = 1.0f64;
        while !member(hi) {
            hi *= 2.0;
        }
        // bisection over the ordered bit patterns of doubles
        let (mut lo_key, mut hi_key) = (order_key(SEARCH_FLOOR), order_key(hi));
        while (hi_key as i128) - (lo_key as i128) > 1 {
            let mid = ((lo_key as i128 + hi_key as i128) / 2) as i64;
            if member(from_order_key(mid)) {
                hi_key = mid;
            } else {
                lo_key = mid;
            }
        }
        Some(from_order_key(hi_key))
    }
}

fn order_key(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits < 0 {
        i64::MIN - bits
    } else {
        bits
    }
}

fn from_order_key(k: i64) -> f64 {
    let bits = if k < 0 { i64::MIN - k } else { k };
    f64::from_bits(bits as u64)
}

/// Distance between two doubles in units in the last place.
pub fn ulps_between(a: f64, b: f64) -> u64 {
    order_key(a).abs_diff(order_key(b))
}

/// A uniform grid `lo, lo + step, .., hi`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(Error::Input(format!("grid `{spec}` is not lo:hi:step")));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Input(format!("`{s}` is not a number")))
    };
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || lo > hi {
        return Err(Error::Input(format!("grid `{spec}` needs lo <= hi and step > 0")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > MAX_ELEMENTS {
        return Err(Error::CapExceeded {
            what: "grid",
            size: count,
            cap: MAX_ELEMENTS,
        });
    }
    let grid: Vec<f64> = (0..count).map(|i| lo + i as f64 * step).collect();
    if grid.iter().any(|x| x.abs() > GRID_LIMIT) {
        return Err(Error::Input(format!("grid points must lie within ±{GRID_LIMIT}")));
    }
    Ok(grid)
}

/// One of the real-line families sampled on a grid.
#[derive(Debug, Clone)]
pub struct GridDemo {
    pub family_kind: RealFamily,
    pub grid: Vec<f64>,
    /// The family traced on the grid (a discrete space).
    pub family: TopSpectralFamily,
    /// `f_σ` at each grid point, `None` outside the admissible domain.
    pub induced: Vec<Option<f64>>,
    /// Largest `|f_σ(x) − f(x)| / max(1, |f(x)|)` in units of machine epsilon,
    /// infinite when the domains differ.
    pub max_error_eps: f64,
    /// Continuity decided on the interval values at the grid points and midpoints.
    pub continuity: Check<(f64, f64)>,
}

impl GridDemo {
    pub fn new(kind: RealFamily, grid: Vec<f64>) -> Result<Self> {
        let points: Vec<String> = grid.iter().map(|x| format!("{x}")).collect();
        let space = Arc::new(FiniteTopSpace::discrete(points)?);
        let thresholds: Vec<Option<f64>> = grid.iter().map(|&x| kind.threshold(x)).collect();

        let base = (0..grid.len())
            .filter(|&i| thresholds[i].is_none())
            .fold(0, |acc, i| acc | (1 << i));
        let mut lambdas: Vec<f64> = thresholds.iter().flatten().copied().collect();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup();
        let steps = lambdas
            .iter()
            .map(|&l| {
                let members = (0..grid.len())
                    .filter(|&i| thresholds[i].is_none_or(|t| t <= l))
                    .fold(0, |acc, i| acc | (1 << i));
                (l, members)
            })
            .collect();
        let family = TopSpectralFamily::new(space, base, steps)?;
        let induced = family.induced_function();

        let mut max_error_eps = 0.0f64;
        for (i, &x) in grid.iter().enumerate() {
            match (induced[i], kind.target(x)) {
                (Some(v), Some(t)) => {
                    let err = (v - t).abs() / (f64::EPSILON * t.abs().max(1.0));
                    max_error_eps = max_error_eps.max(err);
                }
                (None, None) => {}
                _ => max_error_eps = f64::INFINITY,
            }
        }

        let mut samples = grid.clone();
        samples.extend(grid.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        samples.sort_by(f64::total_cmp);
        let continuity = continuity_on_samples(kind, &samples);
        Ok(GridDemo {
            family_kind: kind,
            grid,
            family,
            induced,
            max_error_eps,
            continuity,
        })
    }
}

/// `cl σ(λ) ⊆ σ(μ)` for all sampled `λ < μ`.
pub fn continuity_on_samples(kind: RealFamily, samples: &[f64]) -> Check<(f64, f64)> {
    for (i, &lambda) in samples.iter().enumerate() {
        for &mu in &samples[i + 1..] {
            if lambda < mu && !kind.value(lambda).closure_within(&kind.value(mu)) {
                return Check::Fails((lambda, mu));
            }
        }
    }
    Check::Holds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn sierpinski() -> Arc<FiniteTopSpace> {
        Arc::new(corpus::sierpinski3())
    }

    #[test]
    fn rejects_non_topologies() {
        let pts = vec!["1".to_string(), "2".to_string()];
        assert!(FiniteTopSpace::from_masks(pts.clone(), vec![0, 1, 2]).is_err());
        assert!(FiniteTopSpace::from_masks(pts.clone(), vec![1, 3]).is_err());
        assert!(FiniteTopSpace::from_masks(pts, vec![0, 1, 3]).is_ok());
    }

    #[test]
    fn interior_and_closure() {
        let s = sierpinski();
        assert_eq!(s.closure(0b001), 0b111);
        assert_eq!(s.closure(0), 0);
        assert_eq!(s.interior(0b011), 0b011);
        assert_eq!(s.interior(0b110), 0);
        assert_eq!(s.closure(0b100), 0b100);
        for u in s.opens(64).unwrap() {
            assert_eq!(s.interior(u), u);
        }
    }

    #[test]
    fn closure_matches_complement_of_open_union() {
        // brute force over all subsets of all 3-point topologies
        for space in corpus::all_topologies(3) {
            let opens = space.opens(64).unwrap();
            for s in 0..8u64 {
                let outside = opens.iter().filter(|&&u| u & s == 0).fold(0, |acc, &u| acc | u);
                assert_eq!(space.closure(s), 7 & !outside);
            }
        }
    }

    #[test]
    fn sigma_of_identity_on_chain_topology() {
        let s = sierpinski();
        let sigma = sigma_from_function(&s, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sigma.steps(), &[(1.0, 0b001), (2.0, 0b011), (3.0, 0b111)]);
        assert_eq!(sigma.admissible_domain(), 0b111);
        assert_eq!(sigma.induced_function(), vec![Some(1.0), Some(2.0), Some(3.0)]);
        // cl{1} is the whole space, so the family is not continuous
        assert_eq!(sigma.is_continuous(), Check::Fails((1.0, 1.5)));
        assert!(!s.is_continuous(&[1.0, 2.0, 3.0]).holds());
    }

    #[test]
    fn discontinuous_function_loses_information() {
        let s = sierpinski();
        let f = [1.0, 0.0, 1.0];
        let sigma = sigma_from_function(&s, &f).unwrap();
        assert_eq!(sigma.steps(), &[(1.0, 0b111)]);
        assert_ne!(sigma.induced_function(), f.iter().map(|&v| Some(v)).collect::<Vec<_>>());
    }

    #[test]
    fn constant_function() {
        let s = sierpinski();
        let sigma = sigma_from_function(&s, &[4.0; 3]).unwrap();
        assert_eq!(sigma.steps(), &[(4.0, 0b111)]);
        assert_eq!(sigma.spectrum(), vec![4.0]);
        assert!(sigma.is_continuous().holds());
    }

    #[test]
    fn round_trip_on_all_small_topologies() {
        for n in 1..=3 {
            for space in corpus::all_topologies(n) {
                let space = Arc::new(space);
                for code in 0..3usize.pow(n as u32) {
                    let f: Vec<f64> = (0..n).map(|i| ((code / 3usize.pow(i as u32)) % 3) as f64).collect();
                    if !space.is_continuous(&f).holds() {
                        continue;
                    }
                    let sigma = sigma_from_function(&space, &f).unwrap();
                    assert_eq!(sigma.admissible_domain(), space.full());
                    assert!(sigma.is_continuous().holds());
                    let back: Vec<f64> = sigma.induced_function().into_iter().map(Option::unwrap).collect();
                    assert_eq!(back, f);
                }
            }
        }
    }

    #[test]
    fn spectralization_identity() {
        // int ⋂_{μ>λ} f⁻¹(]−∞, μ[) = int f⁻¹(]−∞, λ]) at every value of f
        for space in corpus::all_topologies(3) {
            let f = [0.0, 1.0, 1.0];
            let mut values = f.to_vec();
            values.dedup();
            for (i, &lambda) in values.iter().enumerate() {
                let next = values.get(i + 1).copied().unwrap_or(lambda + 1.0);
                let strict = (0..3).filter(|&x| f[x] < next).fold(0, |acc, x| acc | (1 << x));
                let weak = (0..3).filter(|&x| f[x] <= lambda).fold(0, |acc, x| acc | (1 << x));
                assert_eq!(space.interior(strict), space.interior(weak));
            }
        }
    }

    fn families_on(space: &Arc<FiniteTopSpace>) -> Vec<TopSpectralFamily> {
        let opens = space.opens(64).unwrap();
        let mut out = Vec::new();
        for &base in &opens {
            for &u in opens.iter().filter(|&&u| base & !u == 0) {
                for &v in opens.iter().filter(|&&v| u & !v == 0) {
                    out.push(TopSpectralFamily::new(space.clone(), base, vec![(0.0, u), (1.0, v)]).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn continuous_families_induce_continuous_functions() {
        use crate::observable::ObservableFunction;
        use crate::stone::StoneSpectrum;
        for n in 1..=3 {
            for space in corpus::all_topologies(n) {
                let space = Arc::new(space);
                for sigma in families_on(&space) {
                    if !sigma.is_continuous().holds() {
                        continue;
                    }
                    let domain = sigma.admissible_domain();
                    assert!(space.is_open(domain));
                    let f = sigma.induced_function();
                    for x in points_of(domain) {
                        if let Some(fx) = f[x] {
                            assert!(points_of(space.neighbourhood(x)).all(|y| f[y] == Some(fx)));
                        }
                    }
                    assert!(check_restriction_identity(&sigma).unwrap().holds());
                    if let Ok((lattice, family, opens)) = sigma.to_lattice_family() {
                        let spectrum = Arc::new(StoneSpectrum::new(lattice.clone()).unwrap());
                        let obs = ObservableFunction::from_spectral(spectrum.clone(), &family).unwrap();
                        for &q in spectrum.quasipoints() {
                            let atom = spectrum.ideal(q).least();
                            for x in points_of(space.closure(opens[atom])) {
                                assert_eq!(Some(obs.value(q)), f[x]);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(parse_grid("1:0:0.5").is_err());
        assert!(parse_grid("0:100:0.1").is_err());
        assert!(parse_grid("a:b").is_err());
    }

    #[test]
    fn grid_demos_reproduce_targets() {
        let grid = parse_grid("-2:2:0.25").unwrap();
        for kind in RealFamily::ALL {
            let demo = GridDemo::new(kind, grid.clone()).unwrap();
            assert!(demo.max_error_eps <= 4.0, "{kind:?}: {}", demo.max_error_eps);
        }
        let abs = GridDemo::new(RealFamily::Abs, grid.clone()).unwrap();
        let half = grid.iter().position(|&x| x == 0.5).unwrap();
        assert!((abs.induced[half].unwrap() - 0.5).abs() < 1e-15);
        let step = GridDemo::new(RealFamily::Step, grid.clone()).unwrap();
        let x = grid.iter().position(|&x| x == 1.5).unwrap();
        assert_eq!(step.induced[x], Some(1.0));
    }

    #[test]
    fn ln_excludes_the_origin() {
        let grid = parse_grid("-1:1:0.5").unwrap();
        let demo = GridDemo::new(RealFamily::Ln, grid).unwrap();
        assert_eq!(demo.family.admissible_domain(), 0b11011);
        assert_eq!(demo.induced[2], None);
        assert!(demo.family.induced(2).is_err());
        let space = demo.family.space();
        assert_eq!(space.closure(demo.family.admissible_domain()), 0b11011);
    }

    #[test]
    fn continuity_of_grid_demos() {
        let grid = parse_grid("-2:2:0.25").unwrap();
        for kind in [RealFamily::Id, RealFamily::Abs, RealFamily::Ln] {
            assert!(
                GridDemo::new(kind, grid.clone()).unwrap().continuity.holds(),
                "{kind:?}"
            );
        }
        let step = GridDemo::new(RealFamily::Step, grid).unwrap();
        assert_eq!(step.continuity, Check::Fails((-2.0, -1.875)));
    }

    #[test]
    fn spectrum_of_identity_grid() {
        let demo = GridDemo::new(RealFamily::Id, vec![-1.0, 0.0, 1.0]).unwrap();
        let sp = demo.family.spectrum();
        assert_eq!(sp.len(), 3);
        for (s, t) in sp.iter().zip([-1.0, 0.0, 1.0]) {
            assert!(ulps_between(*s, t) <= 1);
        }
    }

    #[test]
    fn topology_file_round_trip() {
        let json = r#"{"points":["1","2","3"],"opens":[[],["1"],["1","2"],["1","2","3"]]}"#;
        let file: TopologyFile = serde_json::from_str(json).unwrap();
        let s = file.build().unwrap();
        assert_eq!(s, corpus::sierpinski3());
        assert_eq!(s.to_file().build().unwrap(), s);
    }
}
