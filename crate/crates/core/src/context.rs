//! Finite diagrams of abelian subalgebras of a matrix algebra, the observable
//! data they carry, and global sections (contextual observables).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matrix_from_pairs, matrix_to_pairs, null_space, CMatrix, CVector, C64};
use crate::vn::{HermitianOperator, OperatorSpectralFamily, Projection, Tolerances, VNSubalgebra};
use crate::Check;

/// Contexts may have at most this many minimal projections.
pub const MAX_ATOMS: usize = 10;

/// An abelian subalgebra with its minimal projections; every projection of
/// the context is the sum of a set of atoms, indexed by a bitmask.
#[derive(Debug, Clone)]
pub struct Context {
    name: String,
    algebra: VNSubalgebra,
    atoms: Vec<Projection>,
    projections: Vec<Projection>,
}

impl Context {
    pub fn new(name: impl Into<String>, algebra: VNSubalgebra) -> Result<Self> {
        let name = name.into();
        if !algebra.is_abelian() {
            return Err(Error::Precondition(format!("context `{name}` is not abelian")));
        }
        let atoms = minimal_projections(&algebra)?;
        if atoms.len() > MAX_ATOMS {
            return Err(Error::CapExceeded {
                what: "context atoms",
                size: atoms.len(),
                cap: MAX_ATOMS,
            });
        }
        let n = algebra.dim();
        let tol = *algebra.tolerances();
        let projections = (0..1u64 << atoms.len())
            .map(|mask| {
                let m = (0..atoms.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .fold(CMatrix::zeros(n), |acc, i| &acc + atoms[i].matrix());
                Projection::new(m, &tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Context {
            name,
            algebra,
            atoms,
            projections,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &VNSubalgebra {
        &self.algebra
    }

    pub fn atoms(&self) -> &[Projection] {
        &self.atoms
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.atoms.len()) - 1
    }

    /// The projection `Σ_{i ∈ mask} atom_i`.
    pub fn projection(&self, mask: u64) -> &Projection {
        &self.projections[mask as usize]
    }

    /// Nonzero masks, in increasing order.
    pub fn masks(&self) -> impl Iterator<Item = u64> {
        1..=self.full_mask()
    }

    /// The mask of `p` when `p` is a projection of this context.
    pub fn mask_of(&self, p: &Projection) -> Option<u64> {
        let tol = self.algebra.tolerances();
        let mask = (0..self.atoms.len())
            .filter(|&i| self.atoms[i].leq(p, tol))
            .fold(0u64, |m, i| m | (1 << i));
        self.projection(mask).approx_eq(p, tol).then_some(mask)
    }

    pub fn label(&self, mask: u64) -> String {
        if mask == self.full_mask() {
            return "I".to_string();
        }
        let parts: Vec<String> = (0..self.atoms.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| format!("{}.p{}", self.name, i + 1))
            .collect();
        parts.join("+")
    }
}

/// Atoms of the projection lattice of an abelian algebra, by joint spectral
/// refinement of the Hermitian parts of a basis.
pub fn minimal_projections(algebra: &VNSubalgebra) -> Result<Vec<Projection>> {
    let n = algebra.dim();
    let tol = *algebra.tolerances();
    let half = C64::new(0.5, 0.0);
    let half_i = C64::new(0.0, -0.5);
    let mut hermitians = Vec::new();
    for b in algebra.basis() {
        let adj = b.adjoint();
        hermitians.push((b + &adj).scale(half));
        hermitians.push((b - &adj).scale(half_i));
    }
    let mut blocks = vec![Projection::identity(n)];
    for h in hermitians {
        let mut next = Vec::new();
        for p in &blocks {
            let php = &(p.matrix() * &h) * p.matrix();
            let family = HermitianOperator::new(php.hermitian_part(), &tol)?.spectral_family(&tol)?;
            let mut previous = CMatrix::zeros(n);
            for (_, e) in family.steps() {
                let eigen = e.matrix() - &previous;
                previous = e.matrix().clone();
                let piece = p.matrix() * &eigen;
                if piece.trace().re > 0.5 {
                    next.push(Projection::new(piece.hermitian_part(), &tol)?);
                }
            }
        }
        blocks = next;
    }
    blocks.sort_by(|a, b| {
        canonical_key(a)
            .partial_cmp(&canonical_key(b))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(blocks)
}

fn canonical_key(p: &Projection) -> Vec<f64> {
    let m = p.matrix();
    let n = m.dim();
    let mut key: Vec<f64> = (0..n).map(|i| -round(m[(i, i)].re)).collect();
    key.extend(
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| -round(m[(i, j)].re)),
    );
    key.extend(
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| -round(m[(i, j)].im)),
    );
    key
}

fn round(x: f64) -> f64 {
    (x * 1e8).round() / 1e8
}

/// `𝒜 ∩ ℬ` as the intersection of linear spans.
pub fn intersect(a: &VNSubalgebra, b: &VNSubalgebra) -> Result<VNSubalgebra> {
    let n = a.dim();
    let tol = a.tolerances();
    let residuals: Vec<CVector> = a
        .basis()
        .iter()
        .map(|x| {
            let mut r: CVector = x.as_slice().to_vec();
            for y in b.basis() {
                let c = y.inner(x);
                r.iter_mut().zip(y.as_slice()).for_each(|(u, v)| *u -= c * v);
            }
            r
        })
        .collect();
    let k = residuals.len();
    let rows: Vec<CVector> = (0..n * n).map(|p| (0..k).map(|i| residuals[i][p]).collect()).collect();
    let generators = null_space(&rows, k, tol.pivot)
        .iter()
        .map(|c| {
            c.iter()
                .zip(a.basis())
                .fold(CMatrix::zeros(n), |acc, (ci, x)| &acc + &x.scale(*ci))
        })
        .collect();
    VNSubalgebra::generated_by(n, generators, tol)
}

fn same_algebra(a: &VNSubalgebra, b: &VNSubalgebra) -> bool {
    a.basis().len() == b.basis().len() && contained(a, b)
}

fn contained(a: &VNSubalgebra, b: &VNSubalgebra) -> bool {
    a.basis().iter().all(|x| b.contains(x))
}

/// A finite set of contexts closed under pairwise intersection and
/// containing `ℂI`.
#[derive(Debug, Clone)]
pub struct ContextDiagram {
    dim: usize,
    tol: Tolerances,
    contexts: Vec<Context>,
    user_contexts: usize,
    /// `inclusions[i]` lists the contexts containing context `i` (excluding `i`).
    inclusions: Vec<Vec<usize>>,
    meets: BTreeMap<(usize, usize), usize>,
    domain: Domain,
}

/// The distinct nonzero projections of a diagram and where they occur.
#[derive(Debug, Clone)]
pub struct Domain {
    pub projections: Vec<Projection>,
    pub labels: Vec<String>,
    /// `(context, mask)` for each occurrence.
    pub occurrences: Vec<Vec<(usize, u64)>>,
}

impl Domain {
    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }
}

impl ContextDiagram {
    pub fn new(dim: usize, contexts: Vec<(String, Vec<CMatrix>)>, tol: &Tolerances) -> Result<Self> {
        let mut built = contexts
            .into_iter()
            .map(|(name, gens)| Context::new(name, VNSubalgebra::generated_by(dim, gens, tol)?))
            .collect::<Result<Vec<_>>>()?;
        let user_contexts = built.len();
        let trivial = VNSubalgebra::trivial(dim, tol)?;
        if !built.iter().any(|c| same_algebra(c.algebra(), &trivial)) {
            built.push(Context::new("CI", trivial)?);
        }
        let mut meets = BTreeMap::new();
        let mut i = 0;
        while i < built.len() {
            for j in 0..i {
                let meet = intersect(built[i].algebra(), built[j].algebra())?;
                let k = match built.iter().position(|c| same_algebra(c.algebra(), &meet)) {
                    Some(k) => k,
                    None => {
                        let name = format!("{}∩{}", built[j].name(), built[i].name());
                        built.push(Context::new(name, meet)?);
                        built.len() - 1
                    }
                };
                meets.insert((j, i), k);
                meets.insert((i, j), k);
            }
            i += 1;
        }
        let inclusions = (0..built.len())
            .map(|i| {
                (0..built.len())
                    .filter(|&j| j != i && contained(built[i].algebra(), built[j].algebra()))
                    .collect()
            })
            .collect();
        let domain = build_domain(&built, tol);
        Ok(ContextDiagram {
            dim,
            tol: *tol,
            contexts: built,
            user_contexts,
            inclusions,
            meets,
            domain,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    /// Contexts given by the user, before inserted intersections and `ℂI`.
    pub fn user_contexts(&self) -> usize {
        self.user_contexts
    }

    pub fn context_index(&self, name: &str) -> Result<usize> {
        self.contexts
            .iter()
            .position(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn supersets(&self, i: usize) -> &[usize] {
        &self.inclusions[i]
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        if i == j {
            i
        } else {
            self.meets[&(i, j)]
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Index in the domain of the projection `mask` of context `c`.
    pub fn domain_index(&self, c: usize, mask: u64) -> usize {
        self.domain
            .occurrences
            .iter()
            .position(|occ| occ.contains(&(c, mask)))
            .expect("every context projection is in the domain")
    }
}

fn build_domain(contexts: &[Context], tol: &Tolerances) -> Domain {
    let mut domain = Domain {
        projections: Vec::new(),
        labels: Vec::new(),
        occurrences: Vec::new(),
    };
    for (c, ctx) in contexts.iter().enumerate() {
        for mask in ctx.masks() {
            let p = ctx.projection(mask);
            match domain.projections.iter().position(|q| q.approx_eq(p, tol)) {
                Some(k) => domain.occurrences[k].push((c, mask)),
                None => {
                    domain.projections.push(p.clone());
                    domain.labels.push(ctx.label(mask));
                    domain.occurrences.push(vec![(c, mask)]);
                }
            }
        }
    }
    domain
}

fn unset_table(atoms: usize) -> Vec<f64> {
    let mut t = vec![f64::NAN; 1 << atoms];
    t[0] = f64::NEG_INFINITY;
    t
}

/// One table per context, indexed by mask (entry 0 holds `−∞`).
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSection {
    pub tables: Vec<Vec<f64>>,
}

/// Two contexts whose tables disagree on a common projection.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionMismatch {
    pub first: usize,
    pub second: usize,
    pub projection: usize,
    pub values: (f64, f64),
}

fn close(a: f64, b: f64, tol: &Tolerances) -> bool {
    (a - b).abs() <= tol.rec * a.abs().max(b.abs()).max(1.0)
}

/// `r(P ∨ Q) = max(r(P), r(Q))` inside one context.
pub fn check_table(ctx: &Context, table: &[f64], tol: &Tolerances) -> Check<(u64, u64)> {
    for p in ctx.masks() {
        for q in ctx.masks().filter(|&q| q > p) {
            if !close(table[(p | q) as usize], table[p as usize].max(table[q as usize]), tol) {
                return Check::Fails((p, q));
            }
        }
    }
    Check::Holds
}

/// `r(P) = min { μ_i | P ≤ E_{μ_i} }` in every context, checked for
/// compatibility before returning.
pub fn section_from_operator(a: &HermitianOperator, diagram: &ContextDiagram) -> Result<GlobalSection> {
    if a.dim() != diagram.dim() {
        return Err(Error::DimensionMismatch(a.dim(), diagram.dim()));
    }
    let tol = diagram.tolerances();
    let family = a.spectral_family(tol)?;
    let tables = diagram
        .contexts()
        .iter()
        .map(|ctx| {
            let mut table = unset_table(ctx.atoms().len());
            for mask in ctx.masks() {
                table[mask as usize] = operator_value(&family, ctx.projection(mask), tol)?;
            }
            Ok(table)
        })
        .collect::<Result<Vec<_>>>()?;
    let section = GlobalSection { tables };
    match is_global_section(&section, diagram)? {
        Check::Holds => Ok(section),
        Check::Fails(m) => Err(Error::Inconsistent(format!(
            "operator section disagrees between contexts {} and {} ({} vs {})",
            diagram.contexts()[m.first].name(),
            diagram.contexts()[m.second].name(),
            m.values.0,
            m.values.1
        ))),
    }
}

fn operator_value(family: &OperatorSpectralFamily, p: &Projection, tol: &Tolerances) -> Result<f64> {
    family
        .steps()
        .iter()
        .find(|(_, e)| p.leq(e, tol))
        .map(|(mu, _)| *mu)
        .ok_or_else(|| Error::Inconsistent("projection not below the identity".into()))
}

/// Compatibility on every pairwise intersection.
///
/// Each table must be completely increasing within its context.
pub fn is_global_section(section: &GlobalSection, diagram: &ContextDiagram) -> Result<Check<SectionMismatch>> {
    let contexts = diagram.contexts();
    if section.tables.len() != contexts.len() {
        return Err(Error::DimensionMismatch(section.tables.len(), contexts.len()));
    }
    let tol = diagram.tolerances();
    for (ctx, table) in contexts.iter().zip(&section.tables) {
        if table.len() != 1 << ctx.atoms().len() {
            return Err(Error::Input(format!("table for `{}` has the wrong size", ctx.name())));
        }
        if let Check::Fails((p, q)) = check_table(ctx, table, tol) {
            return Err(Error::Precondition(format!(
                "table of context `{}` is not completely increasing at {} and {}",
                ctx.name(),
                ctx.label(p),
                ctx.label(q)
            )));
        }
    }
    let domain = diagram.domain();
    for (k, occurrences) in domain.occurrences.iter().enumerate() {
        let &(c0, m0) = &occurrences[0];
        for &(c, m) in &occurrences[1..] {
            let (v0, v) = (section.tables[c0][m0 as usize], section.tables[c][m as usize]);
            if !close(v0, v, tol) {
                return Ok(Check::Fails(SectionMismatch {
                    first: c0,
                    second: c,
                    projection: k,
                    values: (v0, v),
                }));
            }
        }
    }
    Ok(Check::Holds)
}

/// A value for every projection in the domain of a diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedFunction {
    pub values: Vec<f64>,
}

/// Whether a glued function comes from a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Extendability {
    /// The operator of the family `λ ↦ ⋁ { P | f(P) ≤ λ }`.
    pub candidate: HermitianOperator,
    /// First projection where the candidate's value differs: (index, f, candidate).
    pub verdict: Check<(usize, f64, f64)>,
    /// Rank-one projections in the domain valued strictly below `max f`.
    pub rank_one_below_max: usize,
}

#[derive(Debug, Clone)]
pub struct GlueReport {
    pub glued: GluedFunction,
    /// `f(P ∨ Q) = max(f(P), f(Q))` for commuting `P, Q` with `P ∨ Q` in the domain.
    pub commuting_joins: Check<(usize, usize)>,
    /// The same for all pairs.
    pub complete_increasing: Check<(usize, usize)>,
    pub extendability: Extendability,
}

/// Glues a global section into one function on the diagram's projections.
pub fn glue_section(section: &GlobalSection, diagram: &ContextDiagram) -> Result<GlueReport> {
    if let Check::Fails(m) = is_global_section(section, diagram)? {
        return Err(Error::Axiom {
            axiom: "compatibility",
            witness: format!(
                "contexts {} and {} give {} and {} on {}",
                diagram.contexts()[m.first].name(),
                diagram.contexts()[m.second].name(),
                m.values.0,
                m.values.1,
                diagram.domain().labels[m.projection]
            ),
        });
    }
    let values = diagram
        .domain()
        .occurrences
        .iter()
        .map(|occ| section.tables[occ[0].0][occ[0].1 as usize])
        .collect();
    let glued = GluedFunction { values };
    let commuting_joins = join_scan(diagram, &glued, true);
    let complete_increasing = join_scan(diagram, &glued, false);
    let extendability = extendability(diagram, &glued)?;
    Ok(GlueReport {
        glued,
        commuting_joins,
        complete_increasing,
        extendability,
    })
}

fn join_scan(diagram: &ContextDiagram, f: &GluedFunction, commuting_only: bool) -> Check<(usize, usize)> {
    let domain = diagram.domain();
    let tol = diagram.tolerances();
    let scale = 1.0 + tol.proj * diagram.dim() as f64;
    for i in 0..domain.len() {
        for j in i + 1..domain.len() {
            let (p, q) = (&domain.projections[i], &domain.projections[j]);
            if commuting_only && p.matrix().commutator(q.matrix()).max_abs() > tol.proj * scale {
                continue;
            }
            let join = p.join(q, tol);
            let Some(k) = domain.projections.iter().position(|r| r.approx_eq(&join, tol)) else {
                continue;
            };
            if !close(f.values[k], f.values[i].max(f.values[j]), tol) {
                return Check::Fails((i, j));
            }
        }
    }
    Check::Holds
}

fn extendability(diagram: &ContextDiagram, f: &GluedFunction) -> Result<Extendability> {
    let domain = diagram.domain();
    let tol = diagram.tolerances();
    let n = diagram.dim();
    let mut levels = f.values.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| close(*a, *b, tol));
    let steps = levels
        .iter()
        .map(|&lambda| {
            let below: Vec<CVector> = domain
                .projections
                .iter()
                .zip(&f.values)
                .filter(|(_, &v)| v <= lambda || close(v, lambda, tol))
                .flat_map(|(p, _)| p.range().to_vec())
                .collect();
            (lambda, Projection::span(n, &below, tol))
        })
        .collect();
    let candidate = OperatorSpectralFamily::from_steps(n, steps, tol)?.synthesize();
    let family = candidate.spectral_family(tol)?;
    let mut verdict = Check::Holds;
    for (k, p) in domain.projections.iter().enumerate() {
        let v = operator_value(&family, p, tol)?;
        if !close(v, f.values[k], tol) {
            verdict = Check::Fails((k, f.values[k], v));
            break;
        }
    }
    let max = f.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rank_one_below_max = domain
        .projections
        .iter()
        .zip(&f.values)
        .filter(|(p, &v)| p.rank() == 1 && !close(v, max, tol))
        .count();
    Ok(Extendability {
        candidate,
        verdict,
        rank_one_below_max,
    })
}

/// Restricts a function on the domain to every context.
pub fn split_function(f: &GluedFunction, diagram: &ContextDiagram) -> Result<GlobalSection> {
    if f.values.len() != diagram.domain().len() {
        return Err(Error::DimensionMismatch(f.values.len(), diagram.domain().len()));
    }
    let mut tables: Vec<Vec<f64>> = diagram
        .contexts()
        .iter()
        .map(|c| unset_table(c.atoms().len()))
        .collect();
    for (k, occ) in diagram.domain().occurrences.iter().enumerate() {
        for &(c, mask) in occ {
            tables[c][mask as usize] = f.values[k];
        }
    }
    Ok(GlobalSection { tables })
}

/// A matrix given inline (complex pairs or real entries) or by file path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Complex(Vec<Vec<[f64; 2]>>),
    Real(Vec<Vec<f64>>),
    Path(String),
}

impl MatrixSpec {
    /// Inline matrices only; paths are resolved by the caller.
    pub fn inline(&self) -> Option<Result<CMatrix>> {
        match self {
            MatrixSpec::Complex(rows) => Some(matrix_from_pairs(rows)),
            MatrixSpec::Real(rows) => {
                let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
                Some(CMatrix::from_real_rows(&rows))
            }
            MatrixSpec::Path(_) => None,
        }
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixSpec::Complex(matrix_to_pairs(m))
    }
}

/// On-disk diagram: named contexts by their generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagramFile {
    pub ambient_dim: usize,
    pub contexts: BTreeMap<String, Vec<MatrixSpec>>,
}

impl DiagramFile {
    pub fn build(&self, tol: &Tolerances, resolve: impl Fn(&MatrixSpec) -> Result<CMatrix>) -> Result<ContextDiagram> {
        let contexts = self
            .contexts
            .iter()
            .map(|(name, gens)| Ok((name.clone(), gens.iter().map(&resolve).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<Vec<_>>>()?;
        ContextDiagram::new(self.ambient_dim, contexts, tol)
    }
}

/// On-disk section: for each user context, values on its nonzero projections.
/// Tables for inserted contexts are taken from a containing context.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionFile {
    pub sections: BTreeMap<String, Vec<ProjectionValue>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionValue {
    pub projection: MatrixSpec,
    pub value: f64,
}

impl SectionFile {
    pub fn build(
        &self,
        diagram: &ContextDiagram,
        resolve: impl Fn(&MatrixSpec) -> Result<CMatrix>,
    ) -> Result<GlobalSection> {
        let tol = diagram.tolerances();
        let contexts = diagram.contexts();
        let mut tables: Vec<Option<Vec<f64>>> = vec![None; contexts.len()];
        for (name, entries) in &self.sections {
            let c = diagram.context_index(name)?;
            let ctx = &contexts[c];
            let mut table = unset_table(ctx.atoms().len());
            for entry in entries {
                let p = Projection::new(resolve(&entry.projection)?, tol)?;
                let mask = ctx.mask_of(&p).filter(|&m| m != 0).ok_or_else(|| {
                    Error::Input(format!(
                        "a projection listed for `{name}` is not a nonzero projection of it"
                    ))
                })?;
                table[mask as usize] = entry.value;
            }
            if let Some(mask) = ctx.masks().find(|&m| table[m as usize].is_nan()) {
                return Err(Error::Input(format!("no value for {} in `{name}`", ctx.label(mask))));
            }
            tables[c] = Some(table);
        }
        for c in 0..contexts.len() {
            if tables[c].is_some() {
                continue;
            }
            let parent = diagram
                .supersets(c)
                .iter()
                .copied()
                .find(|&s| tables[s].is_some())
                .ok_or_else(|| Error::Input(format!("no section for context `{}`", contexts[c].name())))?;
            let parent_table = tables[parent].clone().expect("checked");
            let mut table = unset_table(contexts[c].atoms().len());
            for mask in contexts[c].masks() {
                let pm = contexts[parent]
                    .mask_of(contexts[c].projection(mask))
                    .ok_or_else(|| Error::Inconsistent("projection of a subcontext missing from its parent".into()))?;
                table[mask as usize] = parent_table[pm as usize];
            }
            tables[c] = Some(table);
        }
        Ok(GlobalSection {
            tables: tables.into_iter().map(|t| t.expect("filled")).collect(),
        })
    }
}

impl GlobalSection {
    pub fn to_file(&self, diagram: &ContextDiagram) -> SectionFile {
        let sections = diagram
            .contexts()
            .iter()
            .zip(&self.tables)
            .take(diagram.user_contexts())
            .map(|(ctx, table)| {
                let entries = ctx
                    .masks()
                    .map(|m| ProjectionValue {
                        projection: MatrixSpec::from_matrix(ctx.projection(m).matrix()),
                        value: table[m as usize],
                    })
                    .collect();
                (ctx.name().to_string(), entries)
            })
            .collect();
        SectionFile { sections }
    }
}

/// Projections onto the `z`, `x` and `y` eigenvectors of the Pauli matrices.
pub mod qubit {
    use crate::linalg::{CMatrix, C64};

    pub fn pz() -> CMatrix {
        CMatrix::from_real_diagonal(&[1.0, 0.0])
    }

    pub fn px() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).expect("2x2")
    }

    pub fn py() -> CMatrix {
        CMatrix::from_rows(vec![
            vec![C64::new(0.5, 0.0), C64::new(0.0, -0.5)],
            vec![C64::new(0.0, 0.5), C64::new(0.5, 0.0)],
        ])
        .expect("2x2")
    }
}

/// The qubit diagram `{A_z, A_x, ℂI}`.
pub fn qubit_diagram(tol: &Tolerances) -> Result<ContextDiagram> {
    ContextDiagram::new(
        2,
        vec![
            ("Az".to_string(), vec![qubit::pz()]),
            ("Ax".to_string(), vec![qubit::px()]),
        ],
        tol,
    )
}

/// `f(P_z) = 1`, `f(P_x) = 1.5` and `2` on `P_z^⊥`, `P_x^⊥` and `I`.
pub fn non_operator_section(diagram: &ContextDiagram) -> Result<GlobalSection> {
    let tol = diagram.tolerances();
    let pz = Projection::new(qubit::pz(), tol)?;
    let px = Projection::new(qubit::px(), tol)?;
    let values = diagram
        .domain()
        .projections
        .iter()
        .map(|p| {
            if p.approx_eq(&pz, tol) {
                1.0
            } else if p.approx_eq(&px, tol) {
                1.5
            } else {
                2.0
            }
        })
        .collect();
    split_function(&GluedFunction { values }, diagram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn value_of(diagram: &ContextDiagram, section: &GlobalSection, ctx: &str, p: &CMatrix) -> f64 {
        let c = diagram.context_index(ctx).unwrap();
        let mask = diagram.contexts()[c]
            .mask_of(&Projection::new(p.clone(), &tol()).unwrap())
            .unwrap();
        section.tables[c][mask as usize]
    }

    #[test]
    fn minimal_projections_of_diagonals() {
        let d = VNSubalgebra::diagonal(3, &tol()).unwrap();
        let atoms = minimal_projections(&d).unwrap();
        assert_eq!(atoms.len(), 3);
        for (i, a) in atoms.iter().enumerate() {
            assert!((a.matrix()[(i, i)].re - 1.0).abs() < 1e-10);
        }
        let blocks = VNSubalgebra::block_scalars(&[1, 2], &tol()).unwrap();
        let ranks: Vec<usize> = minimal_projections(&blocks)
            .unwrap()
            .iter()
            .map(Projection::rank)
            .collect();
        assert_eq!(ranks, vec![1, 2]);
    }

    #[test]
    fn non_abelian_context_rejected() {
        let err = ContextDiagram::new(2, vec![("Z".into(), vec![qubit::pz(), qubit::px()])], &tol());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn qubit_diagram_structure() {
        let d = qubit_diagram(&tol()).unwrap();
        assert_eq!(d.contexts().len(), 3);
        let ci = d.context_index("CI").unwrap();
        assert_eq!(d.meet(0, 1), ci);
        assert_eq!(d.supersets(ci).len(), 2);
        // Pz, Pz⊥, Px, Px⊥ and I
        assert_eq!(d.domain().len(), 5);
    }

    #[test]
    fn intersections_are_inserted() {
        let blocks12 = vec![CMatrix::from_real_diagonal(&[1.0, 0.0, 0.0])];
        let blocks21 = vec![CMatrix::from_real_diagonal(&[0.0, 0.0, 1.0])];
        let diag = vec![CMatrix::from_real_diagonal(&[1.0, 2.0, 3.0])];
        let d = ContextDiagram::new(
            3,
            vec![("A".into(), blocks12), ("B".into(), blocks21), ("D".into(), diag)],
            &tol(),
        )
        .unwrap();
        let names: Vec<&str> = d.contexts().iter().map(Context::name).collect();
        assert_eq!(names, vec!["A", "B", "D", "CI"]);
        assert_eq!(d.meet(0, 1), 3);
        assert_eq!(d.meet(0, 2), 0);
        let e = ContextDiagram::new(
            3,
            vec![
                ("A".into(), vec![CMatrix::from_real_diagonal(&[1.0, 0.0, 0.0])]),
                (
                    "R".into(),
                    vec![
                        CMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]),
                        CMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.5, 0.5], &[0.0, 0.5, 0.5]]).unwrap(),
                    ],
                ),
            ],
            &tol(),
        )
        .unwrap();
        // both contain diag(1,0,0)
        assert_eq!(e.contexts()[e.meet(0, 1)].atoms().len(), 2);
    }

    #[test]
    fn constant_operator_gives_constant_section() {
        let d = qubit_diagram(&tol()).unwrap();
        let a = HermitianOperator::diagonal(&[3.0, 3.0]).unwrap();
        let s = section_from_operator(&a, &d).unwrap();
        for (ctx, table) in d.contexts().iter().zip(&s.tables) {
            for m in ctx.masks() {
                assert_eq!(table[m as usize], 3.0);
            }
        }
    }

    #[test]
    fn diagonal_operator_on_qubit_diagram() {
        let d = qubit_diagram(&tol()).unwrap();
        let a = HermitianOperator::diagonal(&[1.0, 2.0]).unwrap();
        let s = section_from_operator(&a, &d).unwrap();
        let pz_perp = CMatrix::from_real_diagonal(&[0.0, 1.0]);
        let px_perp = CMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        assert_eq!(value_of(&d, &s, "Az", &qubit::pz()), 1.0);
        assert_eq!(value_of(&d, &s, "Az", &pz_perp), 2.0);
        assert_eq!(value_of(&d, &s, "Az", &CMatrix::identity(2)), 2.0);
        assert_eq!(value_of(&d, &s, "Ax", &qubit::px()), 2.0);
        assert_eq!(value_of(&d, &s, "Ax", &px_perp), 2.0);
        assert!(is_global_section(&s, &d).unwrap().holds());
    }

    #[test]
    fn projection_operator_gives_indicator_table() {
        let d = qubit_diagram(&tol()).unwrap();
        let a = HermitianOperator::new(qubit::px(), &tol()).unwrap();
        let s = section_from_operator(&a, &d).unwrap();
        let px_perp = CMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        assert!((value_of(&d, &s, "Ax", &qubit::px()) - 1.0).abs() < 1e-12);
        assert!(value_of(&d, &s, "Ax", &px_perp).abs() < 1e-12);
        assert!((value_of(&d, &s, "Ax", &CMatrix::identity(2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_maxima_are_not_a_section() {
        let d = qubit_diagram(&tol()).unwrap();
        let mut s = section_from_operator(&HermitianOperator::diagonal(&[1.0, 2.0]).unwrap(), &d).unwrap();
        let ax = d.context_index("Ax").unwrap();
        s.tables[ax] = vec![f64::NEG_INFINITY, 3.0, 3.0, 3.0];
        let Check::Fails(m) = is_global_section(&s, &d).unwrap() else {
            panic!("accepted")
        };
        assert_eq!(d.domain().labels[m.projection], "I");
    }

    #[test]
    fn non_completely_increasing_table_is_a_precondition_error() {
        let d = qubit_diagram(&tol()).unwrap();
        let mut s = section_from_operator(&HermitianOperator::diagonal(&[1.0, 2.0]).unwrap(), &d).unwrap();
        s.tables[0][3] = 5.0;
        assert!(matches!(is_global_section(&s, &d), Err(Error::Precondition(msg)) if msg.contains("Az")));
    }

    #[test]
    fn single_context_diagram() {
        let d = ContextDiagram::new(2, vec![("Az".into(), vec![qubit::pz()])], &tol()).unwrap();
        let s = split_function(
            &GluedFunction {
                values: vec![1.0, 2.0, 2.0],
            },
            &d,
        )
        .unwrap();
        assert!(is_global_section(&s, &d).unwrap().holds());
    }

    #[test]
    fn non_operator_section_fixture() {
        let d = qubit_diagram(&tol()).unwrap();
        let s = non_operator_section(&d).unwrap();
        assert!(is_global_section(&s, &d).unwrap().holds());
        let report = glue_section(&s, &d).unwrap();
        assert!(report.commuting_joins.holds());
        let Check::Fails((i, j)) = report.complete_increasing else {
            panic!("completely increasing")
        };
        let pair = [report.glued.values[i], report.glued.values[j]];
        assert!(pair.contains(&1.0) && pair.contains(&1.5));
        let Check::Fails((_, given, candidate)) = report.extendability.verdict else {
            panic!("extendable")
        };
        assert_eq!((given, candidate), (2.0, 1.5));
        assert_eq!(report.extendability.rank_one_below_max, 2);
    }

    #[test]
    fn operator_sections_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = qubit_diagram(&tol()).unwrap();
        for _ in 0..20 {
            let a = HermitianOperator::random(2, &mut rng);
            let s = section_from_operator(&a, &d).unwrap();
            let report = glue_section(&s, &d).unwrap();
            assert!(report.commuting_joins.holds());
            assert!(report.complete_increasing.holds());
            assert!(report.extendability.verdict.holds());
            let again = section_from_operator(&report.extendability.candidate, &d).unwrap();
            for (t, u) in s.tables.iter().zip(&again.tables) {
                for (x, y) in t.iter().zip(u).skip(1) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn gluing_and_splitting_are_inverse() {
        // every {0,1,2}-valued function on the three-context qubit diagram
        let d = ContextDiagram::new(
            2,
            vec![
                ("Az".into(), vec![qubit::pz()]),
                ("Ax".into(), vec![qubit::px()]),
                ("Ay".into(), vec![qubit::py()]),
            ],
            &tol(),
        )
        .unwrap();
        let n = d.domain().len();
        assert_eq!(n, 7);
        let mut sections = 0;
        for code in 0..3usize.pow(n as u32) {
            let values: Vec<f64> = (0..n).map(|i| ((code / 3usize.pow(i as u32)) % 3) as f64).collect();
            let f = GluedFunction { values };
            let s = split_function(&f, &d).unwrap();
            let commuting = join_scan(&d, &f, true).holds();
            match is_global_section(&s, &d) {
                Ok(Check::Holds) => {
                    assert!(commuting);
                    sections += 1;
                    assert_eq!(glue_section(&s, &d).unwrap().glued, f);
                }
                Ok(Check::Fails(_)) => panic!("split tables always agree"),
                Err(Error::Precondition(_)) => assert!(!commuting),
                Err(e) => panic!("{e}"),
            }
        }
        // each context: r(I) = max of two atom values, so 3 * 3 per context sharing r(I)
        assert!(sections > 0);
    }

    #[test]
    fn section_file_round_trip() {
        let d = qubit_diagram(&tol()).unwrap();
        let s = non_operator_section(&d).unwrap();
        let json = serde_json::to_string(&s.to_file(&d)).unwrap();
        let file: SectionFile = serde_json::from_str(&json).unwrap();
        let back = file.build(&d, |m| m.inline().unwrap()).unwrap();
        assert_eq!(back, s);
        let diagram: DiagramFile =
            serde_json::from_str(r#"{"ambient_dim":2,"contexts":{"Az":[[[1,0],[0,0]]],"Ax":[[[0.5,0.5],[0.5,0.5]]]}}"#)
                .unwrap();
        let built = diagram.build(&tol(), |m| m.inline().unwrap()).unwrap();
        assert_eq!(built.domain().len(), 5);
    }
}
