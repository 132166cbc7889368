//! Small dense complex matrices: Hermitian eigensolver, orthonormalization
//! and null spaces.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = Vec<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(r.len(), n));
        }
        Ok(CMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors (padded to square with zeros).
    pub fn from_columns(n: usize, columns: &[CVector]) -> Self {
        let mut m = Self::zeros(n);
        for (j, c) in columns.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    /// `Σ v v*` over the given vectors.
    pub fn outer_sum(n: usize, vectors: &[CVector]) -> Self {
        let mut m = Self::zeros(n);
        for v in vectors {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> CVector {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from `self*`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> CVector {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    /// Frobenius inner product `tr(self* other)`.
    pub fn inner(&self, other: &CMatrix) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &CMatrix) -> f64 {
        (self - other).frobenius()
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> CMatrix {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Random Hermitian matrix with entries uniform in `[-1, 1]`.
    pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in (i + 1)..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    /// Random unitary from Gram-Schmidt on a random complex matrix.
    pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        loop {
            let cols: Vec<CVector> = (0..n).map(|_| random_vector(n, rng)).collect();
            let basis = orthonormalize(&cols, 1e-6);
            if basis.len() == n {
                return Self::from_columns(n, &basis);
            }
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        let n = self.n;
        assert_eq!(n, rhs.n, "dimension mismatch");
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({})", self.n)?;
        for row in self.data.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|z| format!("{:.4}{:+.4}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn basis_vector(n: usize, i: usize) -> CVector {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
}

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations for a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies
/// the real symmetric rotation that annihilates it. Iterates until the
/// off-diagonal Frobenius norm drops below `1e-11 · max(1, ‖A‖_F)`.
pub fn eigen_hermitian(a: &CMatrix, sym_tol: f64) -> Result<Eigen> {
    let dev = a.hermitian_deviation();
    if dev > sym_tol {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = 1e-11 * m.frobenius().max(1.0);
    let off = |m: &CMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&m) >= threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[(p, q)];
                let r = b.norm();
                if r == 0.0 {
                    continue;
                }
                let dq = (b / r).conj();
                let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u = [[C64::new(c, 0.0), C64::new(s, 0.0)], [-dq * s, dq * c]];
                rotate(&mut m, &mut v, p, q, u);
            }
        }
    }
    let mut pairs: Vec<(f64, CVector)> = (0..n).map(|i| (m[(i, i)].re, v.column(i))).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(Eigen { values, vectors })
}

/// `m ← U* m U`, `v ← v U` for the 2×2 block `u` acting on indices `p, q`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, u: [[C64; 2]; 2]) {
    let n = m.dim();
    for k in 0..n {
        let (mp, mq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = mp * u[0][0] + mq * u[1][0];
        m[(k, q)] = mp * u[0][1] + mq * u[1][1];
        let (vp, vq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vp * u[0][0] + vq * u[1][0];
        v[(k, q)] = vp * u[0][1] + vq * u[1][1];
    }
    for k in 0..n {
        let (mp, mq) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = u[0][0].conj() * mp + u[1][0].conj() * mq;
        m[(q, k)] = u[0][1].conj() * mp + u[1][1].conj() * mq;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
}

/// Orthonormal basis of the span of `vectors`.
///
/// Pivoted Gram-Schmidt with re-orthogonalization: at each step the
/// remaining vector with the largest residual is taken, and the process
/// stops once every residual is at most `pivot`.
pub fn orthonormalize(vectors: &[CVector], pivot: f64) -> Vec<CVector> {
    let mut rest: Vec<CVector> = vectors.to_vec();
    let mut basis: Vec<CVector> = Vec::new();
    while !rest.is_empty() {
        let (best, best_norm) = rest
            .iter()
            .enumerate()
            .map(|(i, r)| (i, norm(r)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if best_norm <= pivot {
            break;
        }
        let mut q = rest.swap_remove(best);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &q);
                q.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nq = norm(&q);
        if nq <= pivot {
            continue;
        }
        q.iter_mut().for_each(|x| *x /= nq);
        for r in rest.iter_mut() {
            let c = dot(&q, r);
            r.iter_mut().zip(&q).for_each(|(x, y)| *x -= c * y);
        }
        basis.push(q);
    }
    basis
}

/// Orthonormal basis of the null space of a `rows.len() × cols` matrix.
///
/// Row reduction with partial pivoting; a column whose best pivot is at most
/// `pivot · max(1, max |entry|)` is treated as free.
pub fn null_space(rows: &[CVector], cols: usize, pivot: f64) -> Vec<CVector> {
    let mut a: Vec<CVector> = rows.to_vec();
    let scale = a.iter().flatten().map(|x| x.norm()).fold(1.0, f64::max);
    let tol = pivot * scale;
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let (best, mag) = (r..a.len())
            .map(|i| (i, a[i][c].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("rows remain");
        if mag <= tol {
            for row in a.iter_mut().skip(r) {
                row[c] = ZERO;
            }
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        a[r].iter_mut().for_each(|x| *x /= p);
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != ZERO {
                    row.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let raw: Vec<CVector> = free
        .iter()
        .map(|&f| {
            let mut v = vec![ZERO; cols];
            v[f] = ONE;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f];
            }
            v
        })
        .collect();
    orthonormalize(&raw, 1e-12)
}

/// Parses the `[[[re, im], ..], ..]` matrix format.
pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    CMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect(),
    )
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.rows()
        .into_iter()
        .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(e: &Eigen) -> CMatrix {
        let n = e.values.len();
        let mut m = CMatrix::zeros(n);
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            m = &m + &CMatrix::outer_sum(n, std::slice::from_ref(v)).scale_real(*lambda);
        }
        m
    }

    fn orthonormality_error(vs: &[CVector]) -> f64 {
        let mut err = 0.0f64;
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                let target = if i == j { ONE } else { ZERO };
                err = err.max((dot(a, b) - target).norm());
            }
        }
        err
    }

    #[test]
    fn diagonal_input() {
        let e = eigen_hermitian(&CMatrix::from_real_diagonal(&[2.0, 1.0]), 1e-12).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0]);
        assert_eq!(e.vectors[0], basis_vector(2, 1));
    }

    #[test]
    fn pauli_x() {
        let x = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = eigen_hermitian(&x, 1e-12).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_y_has_complex_eigenvectors() {
        let i = C64::new(0.0, 1.0);
        let y = CMatrix::from_rows(vec![vec![ZERO, -i], vec![i, ZERO]]).unwrap();
        let e = eigen_hermitian(&y, 1e-12).unwrap();
        assert!(reconstruct(&e).distance(&y) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eigen_hermitian(&m, 1e-12), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn null_space_of_rank_one_rows() {
        let rows = vec![vec![ONE, ONE, ZERO], vec![ONE.scale(2.0), ONE.scale(2.0), ZERO]];
        let ns = null_space(&rows, 3, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((v[0] + v[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn orthonormalize_drops_dependent_vectors() {
        let a = vec![ONE, ZERO, ONE];
        let b = vec![ONE.scale(3.0), ZERO, ONE.scale(3.0)];
        let c = vec![ZERO, ONE, ZERO];
        let basis = orthonormalize(&[a, b, c], 1e-10);
        assert_eq!(basis.len(), 2);
        assert!(orthonormality_error(&basis) < 1e-12);
    }

    proptest! {
        #[test]
        fn random_hermitian_reconstructs(seed in any::<u64>(), n in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = CMatrix::random_hermitian(n, &mut rng);
            let e = eigen_hermitian(&a, 1e-12).unwrap();
            prop_assert!(reconstruct(&e).distance(&a) < 1e-9);
            prop_assert!(orthonormality_error(&e.vectors) < 1e-10);
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn degenerate_spectra_reconstruct(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = CMatrix::random_unitary(n, &mut rng);
            let diag: Vec<f64> = (0..n).map(|i| (i / 2) as f64).collect();
            let a = (&(&u * &CMatrix::from_real_diagonal(&diag)) * &u.adjoint()).hermitian_part();
            let e = eigen_hermitian(&a, 1e-12).unwrap();
            prop_assert!(reconstruct(&e).distance(&a) < 1e-9);
            for (x, y) in e.values.iter().zip(&diag) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn null_space_vectors_are_annihilated(seed in any::<u64>(), m in 1usize..6, k in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<CVector> = (0..m).map(|_| random_vector(k, &mut rng)).collect();
            let ns = null_space(&rows, k, 1e-10);
            prop_assert_eq!(ns.len(), k.saturating_sub(m));
            for v in &ns {
                for r in &rows {
                    prop_assert!(r.iter().zip(v).map(|(a, b)| a * b).sum::<C64>().norm() < 1e-9);
                }
            }
        }
    }
}
