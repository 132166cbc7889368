//! Finite-dimensional von Neumann algebras: Hermitian operators, their
//! spectral families, the spectral order, commutants, cores and supports,
//! and the two restriction maps onto a subalgebra.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, eigen_hermitian, norm, null_space, orthonormalize, CMatrix, CVector, C64, ONE, ZERO};
use crate::Check;

pub const MAX_DIM: usize = 16;

/// Every numerical tolerance in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Hermiticity of inputs.
    pub sym: f64,
    /// Idempotence and Hermiticity of projections.
    pub proj: f64,
    /// Reconstruction and membership residuals (Frobenius).
    pub rec: f64,
    /// Sine of the largest principal angle in subspace containment.
    pub sub: f64,
    /// Eigenvalues closer than this are merged.
    pub cluster: f64,
    /// Pivot threshold for orthonormalization and row reduction.
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sym: 1e-12,
            proj: 1e-10,
            rec: 1e-9,
            sub: 1e-9,
            cluster: 1e-8,
            pivot: 1e-10,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 6] = ["sym", "proj", "rec", "sub", "cluster", "pivot"];

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Input(format!("tolerance {key}={value} must be positive")));
        }
        let slot = match key {
            "sym" => &mut self.sym,
            "proj" => &mut self.proj,
            "rec" => &mut self.rec,
            "sub" => &mut self.sub,
            "cluster" => &mut self.cluster,
            "pivot" => &mut self.pivot,
            _ => {
                return Err(Error::Input(format!(
                    "unknown tolerance `{key}` (expected one of {})",
                    Self::KEYS.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::CapExceeded {
            what: "matrix",
            size: n,
            cap: MAX_DIM,
        });
    }
    Ok(())
}

/// A self-adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_dim(m.dim())?;
        let deviation = m.hermitian_deviation();
        if deviation > tol.sym {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianOperator { m: m.hermitian_part() })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(CMatrix::from_real_diagonal(diag), &Tolerances::default())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        HermitianOperator {
            m: CMatrix::random_hermitian(n, rng),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn shift(&self, c: f64) -> Self {
        HermitianOperator {
            m: &self.m + &CMatrix::identity(self.dim()).scale_real(c),
        }
    }

    pub fn spectral_family(&self, tol: &Tolerances) -> Result<OperatorSpectralFamily> {
        OperatorSpectralFamily::of(self, tol)
    }

    pub fn distance(&self, other: &HermitianOperator) -> f64 {
        self.m.distance(&other.m)
    }
}

/// An orthogonal projection, stored with an orthonormal basis of its range.
#[derive(Debug, Clone)]
pub struct Projection {
    m: CMatrix,
    range: Vec<CVector>,
}

impl Projection {
    /// Checks `P = P*` and `P² = P` within `tol.proj`.
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_dim(m.dim())?;
        let herm = m.hermitian_deviation();
        let idem = (&(&m * &m) - &m).max_abs();
        let deviation = herm.max(idem);
        if deviation > tol.proj {
            return Err(Error::NotProjection { deviation });
        }
        let eig = eigen_hermitian(&m.hermitian_part(), f64::INFINITY)?;
        let range: Vec<CVector> = eig
            .values
            .iter()
            .zip(eig.vectors)
            .filter(|(v, _)| **v > 0.5)
            .map(|(_, x)| x)
            .collect();
        let rank = m.trace().re.round() as usize;
        if rank != range.len() {
            return Err(Error::Numeric(format!(
                "trace suggests rank {rank}, spectrum gives {}",
                range.len()
            )));
        }
        Ok(Self::from_orthonormal(m.dim(), range))
    }

    /// Projection onto the span of `vectors`.
    pub fn span(n: usize, vectors: &[CVector], tol: &Tolerances) -> Self {
        Self::from_orthonormal(n, orthonormalize(vectors, tol.pivot))
    }

    fn from_orthonormal(n: usize, range: Vec<CVector>) -> Self {
        Projection {
            m: CMatrix::outer_sum(n, &range),
            range,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_orthonormal(n, Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_orthonormal(n, (0..n).map(|i| crate::linalg::basis_vector(n, i)).collect())
    }

    /// Projection onto a random `k`-dimensional subspace.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        let u = CMatrix::random_unitary(n, rng);
        Self::from_orthonormal(n, (0..k).map(|j| u.column(j)).collect())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn rank(&self) -> usize {
        self.range.len()
    }

    pub fn range(&self) -> &[CVector] {
        &self.range
    }

    pub fn is_zero(&self) -> bool {
        self.range.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.range.len() == self.dim()
    }

    pub fn complement(&self, tol: &Tolerances) -> Projection {
        let n = self.dim();
        let rest = &CMatrix::identity(n) - &self.m;
        let cols: Vec<CVector> = (0..n).map(|j| rest.column(j)).collect();
        Self::span(n, &cols, tol)
    }

    /// `‖(I − Q) x‖`.
    pub fn residual(&self, x: &[C64]) -> f64 {
        let mut r = x.to_vec();
        for b in &self.range {
            let c = dot(b, x);
            r.iter_mut().zip(b).for_each(|(y, e)| *y -= c * e);
        }
        norm(&r)
    }

    /// Sine of the largest principal angle between `ran self` and `ran other`,
    /// measured from `self` (zero when `ran self ⊆ ran other`).
    pub fn containment_gap(&self, other: &Projection) -> f64 {
        if self.range.is_empty() {
            return 0.0;
        }
        let k = self.range.len();
        let residuals: Vec<CVector> = self
            .range
            .iter()
            .map(|u| {
                let mut r = u.clone();
                for b in &other.range {
                    let c = dot(b, u);
                    r.iter_mut().zip(b).for_each(|(y, e)| *y -= c * e);
                }
                r
            })
            .collect();
        let mut gram = CMatrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = dot(&residuals[i], &residuals[j]);
            }
        }
        let eig = eigen_hermitian(&gram.hermitian_part(), f64::INFINITY).expect("Gram matrices are Hermitian");
        eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    /// `ran self ⊆ ran other` within `tol.sub`.
    pub fn leq(&self, other: &Projection, tol: &Tolerances) -> bool {
        self.rank() <= other.rank() && self.containment_gap(other) <= tol.sub
    }

    pub fn approx_eq(&self, other: &Projection, tol: &Tolerances) -> bool {
        self.rank() == other.rank() && self.leq(other, tol) && other.leq(self, tol)
    }

    /// Projection onto `ran self + ran other`.
    pub fn join(&self, other: &Projection, tol: &Tolerances) -> Projection {
        let vs: Vec<CVector> = self.range.iter().chain(&other.range).cloned().collect();
        Self::span(self.dim(), &vs, tol)
    }

    /// Projection onto `ran self ∩ ran other`.
    pub fn meet(&self, other: &Projection, tol: &Tolerances) -> Projection {
        self.complement(tol).join(&other.complement(tol), tol).complement(tol)
    }
}

/// Finitely many eigenvalues `μ_1 < .. < μ_k` with cumulative spectral
/// projections `E_1 < .. < E_k = I`.
#[derive(Debug, Clone)]
pub struct OperatorSpectralFamily {
    dim: usize,
    steps: Vec<(f64, Projection)>,
}

impl OperatorSpectralFamily {
    /// Eigenvalues within `tol.cluster` of their neighbour share a breakpoint
    /// (the cluster mean).
    pub fn of(a: &HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let n = a.dim();
        let eig = eigen_hermitian(a.matrix(), tol.sym)?;
        let mut clusters: Vec<(Vec<f64>, Vec<CVector>)> = Vec::new();
        for (value, vector) in eig.values.into_iter().zip(eig.vectors) {
            match clusters.last_mut() {
                Some((vals, vecs)) if value - vals.last().unwrap() <= tol.cluster => {
                    vals.push(value);
                    vecs.push(vector);
                }
                _ => clusters.push((vec![value], vec![vector])),
            }
        }
        let mut cumulative: Vec<CVector> = Vec::new();
        let steps = clusters
            .into_iter()
            .map(|(vals, vecs)| {
                cumulative.extend(vecs);
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                (mean, Projection::from_orthonormal(n, cumulative.clone()))
            })
            .collect();
        let family = OperatorSpectralFamily { dim: n, steps };
        let residual = family.synthesize().distance(a);
        if residual > tol.rec * a.matrix().frobenius().max(1.0) {
            return Err(Error::Numeric(format!("spectral resolution residual {residual:e}")));
        }
        Ok(family)
    }

    /// Builds a family from increasing breakpoints and increasing projections
    /// ending at `I`; steps that repeat the previous projection are dropped.
    pub fn from_steps(dim: usize, steps: Vec<(f64, Projection)>, tol: &Tolerances) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidFamily("no breakpoints".into()));
        }
        let mut out: Vec<(f64, Projection)> = Vec::new();
        let mut previous = Projection::zero(dim);
        for (lambda, p) in steps {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(p.dim(), dim));
            }
            if let Some((last, _)) = out.last() {
                if lambda <= *last {
                    return Err(Error::InvalidFamily("breakpoints not increasing".into()));
                }
            }
            if !previous.leq(&p, tol) {
                return Err(Error::InvalidFamily(format!("projections decrease at {lambda}")));
            }
            if p.rank() > previous.rank() {
                previous = p.clone();
                out.push((lambda, p));
            }
        }
        if !previous.is_identity() {
            return Err(Error::InvalidFamily("last projection is not I".into()));
        }
        Ok(OperatorSpectralFamily { dim, steps: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[(f64, Projection)] {
        &self.steps
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.steps.iter().map(|(l, _)| *l).collect()
    }

    /// `E_λ`.
    pub fn eval(&self, lambda: f64) -> Projection {
        let idx = self.steps.partition_point(|(l, _)| *l <= lambda);
        if idx == 0 {
            Projection::zero(self.dim)
        } else {
            self.steps[idx - 1].1.clone()
        }
    }

    /// `Σ μ_i (E_i − E_{i−1})`.
    pub fn synthesize(&self) -> HermitianOperator {
        let mut m = CMatrix::zeros(self.dim);
        let mut prev = CMatrix::zeros(self.dim);
        for (mu, p) in &self.steps {
            m = &m + &(p.matrix() - &prev).scale_real(*mu);
            prev = p.matrix().clone();
        }
        HermitianOperator { m: m.hermitian_part() }
    }
}

fn merged_breakpoints(families: &[&OperatorSpectralFamily], tol: &Tolerances) -> Vec<f64> {
    let mut all: Vec<f64> = families.iter().flat_map(|f| f.breakpoints()).collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in all {
        if out.last().is_none_or(|&l| x - l > tol.cluster) {
            out.push(x);
        }
    }
    out
}

/// `A ≤_s B`, that is `E^B_λ ≤ E^A_λ` for every `λ`. Fails with the first
/// breakpoint where containment breaks.
pub fn spectral_leq(a: &HermitianOperator, b: &HermitianOperator, tol: &Tolerances) -> Result<Check<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let (fa, fb) = (a.spectral_family(tol)?, b.spectral_family(tol)?);
    for lambda in merged_breakpoints(&[&fa, &fb], tol) {
        let probe = lambda + tol.cluster;
        if !fb.eval(probe).leq(&fa.eval(probe), tol) {
            return Ok(Check::Fails(lambda));
        }
    }
    Ok(Check::Holds)
}

fn combine(
    ops: &[HermitianOperator],
    tol: &Tolerances,
    pointwise: impl Fn(&Projection, &Projection) -> Projection,
) -> Result<HermitianOperator> {
    let first = ops
        .first()
        .ok_or_else(|| Error::Precondition("empty operator list".into()))?;
    let n = first.dim();
    if let Some(bad) = ops.iter().find(|a| a.dim() != n) {
        return Err(Error::DimensionMismatch(bad.dim(), n));
    }
    let families = ops.iter().map(|a| a.spectral_family(tol)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&OperatorSpectralFamily> = families.iter().collect();
    let steps = merged_breakpoints(&refs, tol)
        .into_iter()
        .map(|lambda| {
            let probe = lambda + tol.cluster;
            let p = families[1..]
                .iter()
                .fold(families[0].eval(probe), |acc, f| pointwise(&acc, &f.eval(probe)));
            (lambda, p)
        })
        .collect();
    Ok(OperatorSpectralFamily::from_steps(n, steps, tol)?.synthesize())
}

/// Greatest lower bound in the spectral order: `λ ↦ ⋁_i E^{A_i}_λ`.
pub fn spectral_meet(ops: &[HermitianOperator], tol: &Tolerances) -> Result<HermitianOperator> {
    combine(ops, tol, |p, q| p.join(q, tol))
}

/// Least upper bound in the spectral order: `λ ↦ ⋀_i E^{A_i}_λ`.
pub fn spectral_join(ops: &[HermitianOperator], tol: &Tolerances) -> Result<HermitianOperator> {
    combine(ops, tol, |p, q| p.meet(q, tol))
}

/// `inf { λ | x ∈ ran E^A_λ }` for a nonzero vector `x` (normalized first).
pub fn atomic_value(a: &HermitianOperator, x: &[C64], tol: &Tolerances) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch(x.len(), a.dim()));
    }
    let nx = norm(x);
    if nx == 0.0 {
        return Err(Error::Precondition("zero vector".into()));
    }
    let unit: CVector = x.iter().map(|z| z / nx).collect();
    let family = a.spectral_family(tol)?;
    family
        .steps()
        .iter()
        .find(|(_, p)| p.residual(&unit) <= tol.sub)
        .map(|(mu, _)| *mu)
        .ok_or_else(|| Error::Inconsistent("vector outside the range of I".into()))
}

/// The unital *-algebra generated by finitely many matrices, with its commutant.
#[derive(Debug, Clone)]
pub struct VNSubalgebra {
    dim: usize,
    generators: Vec<CMatrix>,
    basis: Vec<CMatrix>,
    commutant: Vec<CMatrix>,
    tol: Tolerances,
}

fn flatten(m: &CMatrix) -> CVector {
    m.as_slice().to_vec()
}

fn unflatten(n: usize, v: &[C64]) -> CMatrix {
    CMatrix::from_rows(v.chunks(n).map(|r| r.to_vec()).collect()).expect("square")
}

/// Adds `v` to an orthonormal list when it is independent of it.
fn extend_basis(basis: &mut Vec<CVector>, v: CVector, pivot: f64) -> bool {
    let scale = norm(&v).max(1.0);
    let mut r = v;
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(b, &r);
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let nr = norm(&r);
    if nr <= pivot * scale {
        return false;
    }
    r.iter_mut().for_each(|x| *x /= nr);
    basis.push(r);
    true
}

/// Linear basis of `{ X | [X, G] = 0 for all G in gens }`.
fn commutant_of(n: usize, gens: &[CMatrix], pivot: f64) -> Vec<CMatrix> {
    let mut rows: Vec<CVector> = Vec::new();
    for g in gens {
        for i in 0..n {
            for j in 0..n {
                // ([X, G])_ij = Σ_k X_ik G_kj − G_ik X_kj
                let mut row = vec![ZERO; n * n];
                for k in 0..n {
                    row[i * n + k] += g[(k, j)];
                    row[k * n + j] -= g[(i, k)];
                }
                rows.push(row);
            }
        }
    }
    null_space(&rows, n * n, pivot)
        .iter()
        .map(|v| unflatten(n, v))
        .collect()
}

impl VNSubalgebra {
    pub fn generated_by(dim: usize, generators: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        check_dim(dim)?;
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch(g.dim(), dim));
        }
        let mut gens = generators.clone();
        gens.extend(generators.iter().map(CMatrix::adjoint));

        let mut basis: Vec<CVector> = Vec::new();
        extend_basis(&mut basis, flatten(&CMatrix::identity(dim)), tol.pivot);
        let mut queue: Vec<CMatrix> = vec![CMatrix::identity(dim)];
        for g in &gens {
            if extend_basis(&mut basis, flatten(g), tol.pivot) {
                queue.push(g.clone());
            }
        }
        // words in the generators span the algebra
        while let Some(w) = queue.pop() {
            for g in &gens {
                let gw = g * &w;
                if extend_basis(&mut basis, flatten(&gw), tol.pivot) {
                    queue.push(gw);
                }
            }
        }
        let basis: Vec<CMatrix> = basis.iter().map(|v| unflatten(dim, v)).collect();
        let commutant = commutant_of(dim, &gens, tol.pivot);
        Ok(VNSubalgebra {
            dim,
            generators,
            basis,
            commutant,
            tol: *tol,
        })
    }

    /// `ℂI`.
    pub fn trivial(dim: usize, tol: &Tolerances) -> Result<Self> {
        Self::generated_by(dim, vec![CMatrix::identity(dim)], tol)
    }

    /// All `n × n` matrices.
    pub fn full(dim: usize, tol: &Tolerances) -> Result<Self> {
        Self::generated_by(dim, matrix_units(dim), tol)
    }

    /// Diagonal matrices.
    pub fn diagonal(dim: usize, tol: &Tolerances) -> Result<Self> {
        let gens = (0..dim).map(|i| matrix_unit(dim, i, i)).collect();
        Self::generated_by(dim, gens, tol)
    }

    /// Block-diagonal scalars: matrices constant on each block of consecutive
    /// basis vectors with the given sizes.
    pub fn block_scalars(sizes: &[usize], tol: &Tolerances) -> Result<Self> {
        let dim = sizes.iter().sum();
        let mut start = 0;
        let gens = sizes
            .iter()
            .map(|&s| {
                let diag: Vec<f64> = (0..dim)
                    .map(|i| if (start..start + s).contains(&i) { 1.0 } else { 0.0 })
                    .collect();
                start += s;
                CMatrix::from_real_diagonal(&diag)
            })
            .collect();
        Self::generated_by(dim, gens, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    /// Frobenius-orthonormal linear basis of the algebra.
    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Frobenius-orthonormal linear basis of the commutant.
    pub fn commutant(&self) -> &[CMatrix] {
        &self.commutant
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn is_abelian(&self) -> bool {
        self.basis
            .iter()
            .all(|a| self.basis.iter().all(|b| a.commutator(b).frobenius() <= self.tol.rec))
    }

    /// Distance from `x` to the span of the algebra.
    pub fn membership_residual(&self, x: &CMatrix) -> f64 {
        let mut r = x.clone();
        for b in &self.basis {
            r = &r - &b.scale(b.inner(x));
        }
        r.frobenius()
    }

    pub fn contains(&self, x: &CMatrix) -> bool {
        self.membership_residual(x) <= self.tol.rec * x.frobenius().max(1.0)
    }

    /// Largest `‖[X, G']‖_F` over the commutant basis.
    pub fn commutant_defect(&self, x: &CMatrix) -> f64 {
        self.commutant
            .iter()
            .map(|g| x.commutator(g).frobenius())
            .fold(0.0, f64::max)
    }

    /// Closed under products and adjoints, checked on the basis.
    pub fn check_closed(&self) -> bool {
        self.basis
            .iter()
            .all(|a| self.contains(&a.adjoint()) && self.basis.iter().all(|b| self.contains(&(a * b))))
    }

    /// `M'' = M`: same dimension and `M ⊆ M''`.
    pub fn check_bicommutant(&self) -> bool {
        let double = commutant_of(self.dim, &self.commutant, self.tol.pivot);
        if double.len() != self.basis.len() {
            return false;
        }
        let bicommutant = VNSubalgebra {
            dim: self.dim,
            generators: Vec::new(),
            basis: double,
            commutant: Vec::new(),
            tol: self.tol,
        };
        self.basis.iter().all(|b| bicommutant.contains(b))
    }

    fn check_projection(&self, q: &Projection) -> Result<()> {
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch(q.dim(), self.dim));
        }
        Ok(())
    }

    /// `c_M(Q)`: projection onto the largest `M'`-invariant subspace of `ran Q`,
    /// the largest projection of `M` below `Q`.
    pub fn core(&self, q: &Projection) -> Result<Projection> {
        self.check_projection(q)?;
        let n = self.dim;
        let mut t: Vec<CVector> = q.range().to_vec();
        loop {
            if t.is_empty() {
                break;
            }
            let k = t.len();
            let pt = Projection::from_orthonormal(n, t.clone());
            let mut rows: Vec<CVector> = Vec::new();
            for g in &self.commutant {
                // rows of (I − P_T) G' U, with U the columns of t
                let images: Vec<CVector> = t.iter().map(|u| g.apply(u)).collect();
                let outside: Vec<CVector> = images
                    .iter()
                    .map(|w| {
                        let mut r = w.clone();
                        for b in pt.range() {
                            let c = dot(b, w);
                            r.iter_mut().zip(b).for_each(|(y, e)| *y -= c * e);
                        }
                        r
                    })
                    .collect();
                rows.extend((0..n).map(|i| (0..k).map(|j| outside[j][i]).collect::<CVector>()));
            }
            let coeffs = null_space(&rows, k, self.tol.pivot);
            if coeffs.len() == k {
                break;
            }
            let next: Vec<CVector> = coeffs
                .iter()
                .map(|c| {
                    let mut v = vec![ZERO; n];
                    for (cj, u) in c.iter().zip(&t) {
                        v.iter_mut().zip(u).for_each(|(x, y)| *x += cj * y);
                    }
                    v
                })
                .collect();
            t = orthonormalize(&next, self.tol.pivot);
        }
        let core = Projection::from_orthonormal(n, t);
        let defect = self.commutant_defect(core.matrix());
        if defect > self.tol.proj * (n as f64) {
            return Err(Error::Inconsistent(format!(
                "core does not commute with M' ({defect:e})"
            )));
        }
        Ok(core)
    }

    /// `s_M(Q) = I − c_M(I − Q)`, the smallest projection of `M` above `Q`.
    pub fn support(&self, q: &Projection) -> Result<Projection> {
        Ok(self.core(&q.complement(&self.tol))?.complement(&self.tol))
    }

    fn restrict_with(
        &self,
        a: &HermitianOperator,
        map: impl Fn(&Projection) -> Result<Projection>,
    ) -> Result<HermitianOperator> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch(a.dim(), self.dim));
        }
        let family = a.spectral_family(&self.tol)?;
        let steps = family
            .steps()
            .iter()
            .map(|(mu, p)| Ok((*mu, map(p)?)))
            .collect::<Result<Vec<_>>>()?;
        let out = OperatorSpectralFamily::from_steps(self.dim, steps, &self.tol)?.synthesize();
        let defect = self.commutant_defect(out.matrix());
        if defect > self.tol.rec * a.matrix().frobenius().max(1.0) {
            return Err(Error::Inconsistent(format!(
                "restricted operator does not commute with M' ({defect:e})"
            )));
        }
        Ok(out)
    }

    /// `ρ_M A`: the operator of the family `λ ↦ c_M(E^A_λ)`.
    pub fn rho_restrict(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        self.restrict_with(a, |p| self.core(p))
    }

    /// `σ_M A`: the operator of the family `λ ↦ ⋀_{μ>λ} s_M(E^A_μ)`.
    ///
    /// On `[μ_i, μ_{i+1})` every `E^A_μ` with `μ` just above `λ` equals `E_i`,
    /// so the infimum is `s_M(E_i)`.
    pub fn sigma_restrict(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        self.restrict_with(a, |p| self.support(p))
    }

    /// A random self-adjoint element of the algebra.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> HermitianOperator {
        let mut m = CMatrix::zeros(self.dim);
        for b in &self.basis {
            m = &m + &b.scale(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        HermitianOperator { m: m.hermitian_part() }
    }
}

pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    m[(i, j)] = ONE;
    m
}

pub fn matrix_units(n: usize) -> Vec<CMatrix> {
    (0..n).flat_map(|i| (0..n).map(move |j| matrix_unit(n, i, j))).collect()
}
