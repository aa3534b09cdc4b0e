//! Dense real matrix kernels: QR with orthonormal completion, matrix
//! exponential, principal logarithm of special-orthogonal matrices, the
//! directional derivative of the matrix exponential, and singular values.
//!
//! Everything here is plain `f64` row-major storage with O(n^3) algorithms,
//! sized for matrices up to a few hundred rows.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

/// Rectangular real matrix, row-major. Zero-sized dimensions are allowed so
/// that e.g. the orthonormal complement of a square Stiefel point is an
/// `n x 0` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from a row-major slice, rejecting NaN/Inf entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::DimensionMismatch(
                "matrix entries must be finite".to_string(),
            ));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius inner product sum_ij a_ij b_ij.
    pub fn frob_inner(&self, other: &DenseMatrix) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.cols {
            let mut s = 0.0;
            for i in 0..self.rows {
                s += self[(i, j)].abs();
            }
            best = best.max(s);
        }
        best
    }

    pub fn block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> DenseMatrix {
        assert!(r0 + nrows <= self.rows && c0 + ncols <= self.cols);
        Self::from_fn(nrows, ncols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, m: &DenseMatrix) {
        assert!(r0 + m.rows <= self.rows && c0 + m.cols <= self.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    /// Horizontal concatenation [self | other].
    pub fn hcat(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows);
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        m.set_block(0, 0, self);
        m.set_block(0, self.cols, other);
        m
    }

    /// Vertical concatenation [self; other].
    pub fn vcat(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.cols);
        let mut m = Self::zeros(self.rows + other.rows, self.cols);
        m.set_block(0, 0, self);
        m.set_block(self.rows, 0, other);
        m
    }

    /// Entries flattened row-major.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs)
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Square skew-symmetric matrix. Construction enforces
/// ||S + S^T||_F <= 1e-12 * max(1, ||S||_F).
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    data: DenseMatrix,
}

impl SkewMatrix {
    pub fn new(data: DenseMatrix) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "skew matrix must be square, got {}x{}",
                data.rows(),
                data.cols()
            )));
        }
        let sym = &data + &data.transpose();
        if sym.frob_norm() > 1e-12 * data.frob_norm().max(1.0) {
            return Err(Error::DimensionMismatch(
                "matrix is not skew-symmetric".to_string(),
            ));
        }
        Ok(SkewMatrix { data })
    }

    /// Skew projection (M - M^T)/2; always well defined for square input.
    pub fn from_skew_part(m: &DenseMatrix) -> Self {
        assert!(m.is_square());
        let s = (m - &m.transpose()).scale(0.5);
        SkewMatrix { data: s }
    }

    pub fn zero(dim: usize) -> Self {
        SkewMatrix {
            data: DenseMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.data
    }
}

// ---------------------------------------------------------------------------
// LU-based helpers
// ---------------------------------------------------------------------------

struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
    sign: f64,
}

fn lu_factor(a: &DenseMatrix) -> Option<Lu> {
    assert!(a.is_square());
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            for j in k + 1..n {
                lu[(i, j)] -= f * lu[(k, j)];
            }
        }
    }
    Some(Lu { lu, perm, sign })
}

impl Lu {
    fn solve(&self, b: &DenseMatrix) -> DenseMatrix {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n);
        let m = b.cols();
        let mut x = DenseMatrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                x[(i, j)] = b[(self.perm[i], j)];
            }
        }
        for k in 0..n {
            for i in k + 1..n {
                let f = self.lu[(i, k)];
                for j in 0..m {
                    x[(i, j)] -= f * x[(k, j)];
                }
            }
        }
        for k in (0..n).rev() {
            let d = self.lu[(k, k)];
            for j in 0..m {
                x[(k, j)] /= d;
            }
            for i in 0..k {
                let f = self.lu[(i, k)];
                for j in 0..m {
                    x[(i, j)] -= f * x[(k, j)];
                }
            }
        }
        x
    }
}

/// Solve A X = B for square A. Panics if A is numerically singular; callers
/// only reach this with well-conditioned matrices.
pub(crate) fn solve(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    lu_factor(a).expect("singular matrix in linear solve").solve(b)
}

pub(crate) fn inverse(a: &DenseMatrix) -> DenseMatrix {
    solve(a, &DenseMatrix::identity(a.rows()))
}

/// Determinant via LU with partial pivoting.
pub fn det(a: &DenseMatrix) -> f64 {
    assert!(a.is_square());
    if a.rows() == 0 {
        return 1.0;
    }
    match lu_factor(a) {
        None => 0.0,
        Some(lu) => {
            let mut d = lu.sign;
            for i in 0..a.rows() {
                d *= lu.lu[(i, i)];
            }
            d
        }
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential: scaling and squaring with a degree-13 Pade approximant
// ---------------------------------------------------------------------------

const PADE13_THETA: f64 = 5.371920351148152;
const PADE13_B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential of a square matrix.
pub fn expm(x: &DenseMatrix) -> DenseMatrix {
    assert!(x.is_square(), "expm requires a square matrix");
    let n = x.rows();
    if n == 0 {
        return DenseMatrix::zeros(0, 0);
    }

    let norm = x.norm_one();
    let s = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as i32
    } else {
        0
    };
    let a = x.scale(0.5f64.powi(s));

    let b = &PADE13_B;
    let ident = DenseMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    // u = a * (a6*(b13 a6 + b11 a4 + b9 a2) + b7 a6 + b5 a4 + b3 a2 + b1 I)
    let w1 = &(&a6.scale(b[13]) + &a4.scale(b[11])) + &a2.scale(b[9]);
    let w2 = &(&(&a6.scale(b[7]) + &a4.scale(b[5])) + &a2.scale(b[3])) + &ident.scale(b[1]);
    let u = &a * &(&(&a6 * &w1) + &w2);
    // v = a6*(b12 a6 + b10 a4 + b8 a2) + b6 a6 + b4 a4 + b2 a2 + b0 I
    let z1 = &(&a6.scale(b[12]) + &a4.scale(b[10])) + &a2.scale(b[8]);
    let z2 = &(&(&a6.scale(b[6]) + &a4.scale(b[4])) + &a2.scale(b[2])) + &ident.scale(b[0]);
    let v = &(&a6 * &z1) + &z2;

    let mut r = solve(&(&v - &u), &(&v + &u));
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Directional derivative of the matrix exponential,
/// D = d/ds expm(X + sY) at s = 0, computed as the top-right block of
/// expm([[X, Y], [0, X]]).
pub fn dexpm(x: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
    if !x.is_square() || !y.is_square() || x.rows() != y.rows() {
        return Err(Error::DimensionMismatch(format!(
            "dexpm requires equal square matrices, got {}x{} and {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let n = x.rows();
    let mut blk = DenseMatrix::zeros(2 * n, 2 * n);
    blk.set_block(0, 0, x);
    blk.set_block(0, n, y);
    blk.set_block(n, n, x);
    Ok(expm(&blk).block(0, n, n, n))
}

// ---------------------------------------------------------------------------
// Principal logarithm of a special-orthogonal matrix: inverse scaling and
// squaring with Denman-Beavers square roots (product form), atanh series.
// ---------------------------------------------------------------------------

/// Angular tolerance around -1 below which the principal log is rejected.
pub const LOG_BRANCH_TOL: f64 = 1e-6;

/// Principal matrix logarithm of V in SO(n); the result is skew-symmetric
/// with all eigenvalue angles in (-pi, pi).
pub fn logm_so(v: &DenseMatrix) -> Result<SkewMatrix> {
    if !v.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "logm_so requires a square matrix, got {}x{}",
            v.rows(),
            v.cols()
        )));
    }
    let n = v.rows();
    if n == 0 {
        return Ok(SkewMatrix::zero(0));
    }
    let ident = DenseMatrix::identity(n);
    let ortho_resid = (&v.transpose().matmul(v) - &ident).frob_norm();
    if ortho_resid > 1e-10 * v.frob_norm().max(1.0) {
        return Err(Error::NotSpecialOrthogonal(format!(
            "||V^T V - I||_F = {ortho_resid:.3e}"
        )));
    }
    let d = det(v);
    if (d - 1.0).abs() > 1e-8 {
        return Err(Error::NotSpecialOrthogonal(format!("det(V) = {d}")));
    }
    // For orthogonal V the singular values of V + I are |1 + e^{i theta}|,
    // so sigma_min ~ angular distance of the closest eigenvalue to -1.
    let gap = singular_values(&(v + &ident))
        .last()
        .copied()
        .unwrap_or(2.0);
    if gap < LOG_BRANCH_TOL {
        return Err(Error::LogBranchBoundary(LOG_BRANCH_TOL));
    }

    // Inverse scaling: take square roots until close to I.
    let mut a = v.clone();
    let mut k = 0u32;
    while (&a - &ident).frob_norm() > 0.25 {
        a = sqrtm_db(&a);
        k += 1;
        assert!(k <= 60, "square-root scaling failed to contract");
    }

    // log(A) = 2 atanh(Y) with Y = (A - I)(A + I)^{-1}, odd power series.
    let y = solve(&(&a + &ident).transpose(), &(&a - &ident).transpose()).transpose();
    let y2 = &y * &y;
    let mut term = y.clone();
    let mut log_a = y.clone();
    for m in 1..40 {
        term = &term * &y2;
        let contrib = term.scale(1.0 / (2 * m + 1) as f64);
        log_a = &log_a + &contrib;
        if contrib.frob_norm() < 1e-18 {
            break;
        }
    }
    let l = log_a.scale(2f64.powi(k as i32 + 1));
    Ok(SkewMatrix::from_skew_part(&l))
}

/// Principal square root by the Denman-Beavers iteration in product form.
fn sqrtm_db(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let ident = DenseMatrix::identity(n);
    let mut m = a.clone();
    let mut y = a.clone();
    for _ in 0..60 {
        let m_inv = inverse(&m);
        y = y.matmul(&(&ident + &m_inv)).scale(0.5);
        m = (&ident + &(&m + &m_inv).scale(0.5)).scale(0.5);
        if (&m - &ident).frob_norm() < 1e-14 {
            break;
        }
    }
    y
}

// ---------------------------------------------------------------------------
// Singular values: one-sided Jacobi
// ---------------------------------------------------------------------------

/// Singular values of M in nonincreasing order, length min(rows, cols).
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let a = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.transpose()
    };
    let rows = a.rows();
    let cols = a.cols();
    if cols == 0 {
        return Vec::new();
    }
    let mut a = a;
    // Orthogonalize column pairs until all are numerically orthogonal.
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for r in 0..rows {
                    let ai = a[(r, i)];
                    let aj = a[(r, j)];
                    alpha += ai * ai;
                    beta += aj * aj;
                    gamma += ai * aj;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let ai = a[(r, i)];
                    let aj = a[(r, j)];
                    a[(r, i)] = c * ai - s * aj;
                    a[(r, j)] = s * ai + c * aj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|r| a[(r, j)] * a[(r, j)]).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

// ---------------------------------------------------------------------------
// QR with orthonormal completion
// ---------------------------------------------------------------------------

/// Householder QR of an n x k matrix accumulating the full n x n Q.
/// Returns (Q, R k x k, parity of det(Q)). Rank-deficient columns are kept
/// as zero rows of R; Q is orthonormal regardless.
fn householder_qr(v: &DenseMatrix) -> (DenseMatrix, DenseMatrix, f64) {
    let n = v.rows();
    let k = v.cols();
    let mut r = v.clone();
    let mut q = DenseMatrix::identity(n);
    let mut parity = 1.0;
    for j in 0..k.min(n) {
        let norm_x: f64 = (j..n).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>().sqrt();
        if norm_x < 1e-300 {
            continue;
        }
        let alpha = if r[(j, j)] >= 0.0 { -norm_x } else { norm_x };
        let mut vref = vec![0.0; n - j];
        vref[0] = r[(j, j)] - alpha;
        for i in j + 1..n {
            vref[i - j] = r[(i, j)];
        }
        let vnorm2: f64 = vref.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // R <- H R on rows j..n
        for col in j..k {
            let dot: f64 = (j..n).map(|i| vref[i - j] * r[(i, col)]).sum();
            let f = beta * dot;
            for i in j..n {
                r[(i, col)] -= f * vref[i - j];
            }
        }
        // Q <- Q H on columns j..n
        for row in 0..n {
            let dot: f64 = (j..n).map(|c| q[(row, c)] * vref[c - j]).sum();
            let f = beta * dot;
            for c in j..n {
                q[(row, c)] -= f * vref[c - j];
            }
        }
        parity = -parity;
    }
    // Positive diagonal where possible (ties toward +).
    for i in 0..k.min(n) {
        if r[(i, i)] < 0.0 {
            for col in 0..k {
                r[(i, col)] = -r[(i, col)];
            }
            for row in 0..n {
                q[(row, i)] = -q[(row, i)];
            }
            parity = -parity;
        }
    }
    (q, r.block(0, 0, k.min(n), k), parity)
}

/// Thin QR with nonnegative diagonal: T = Q R with Q rows x min(rows,cols)
/// orthonormal. Handles rank-deficient input (zero rows in R).
pub(crate) fn qr_thin_pos(t: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let k = t.cols().min(t.rows());
    let (q, r, _) = householder_qr(t);
    (q.block(0, 0, t.rows(), k), r)
}

/// Full QR of a full-column-rank n x k matrix with special-orthogonal Q:
/// the first k columns of Q span col(V), Q [R; 0] = V, det(Q) = +1.
pub fn qr_complete(v: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = v.rows();
    let k = v.cols();
    if k > n {
        return Err(Error::DimensionMismatch(format!(
            "qr_complete requires k <= n, got {n}x{k}"
        )));
    }
    if k > 0 {
        let sv = singular_values(v);
        let smax = sv[0];
        let smin = *sv.last().unwrap();
        if smax == 0.0 || smin <= 1e-12 * smax {
            return Err(Error::RankDeficient);
        }
    }
    let (mut q, mut r, parity) = householder_qr(v);
    if parity < 0.0 {
        if k < n {
            // Flip a completion column; R is untouched.
            for row in 0..n {
                q[(row, n - 1)] = -q[(row, n - 1)];
            }
        } else {
            // k == n: flip last column of Q and last row of R together.
            for row in 0..n {
                q[(row, n - 1)] = -q[(row, n - 1)];
            }
            for col in 0..k {
                r[(n - 1, col)] = -r[(n - 1, col)];
            }
        }
    }
    Ok((q, r))
}

/// Hybrid absolute-relative tolerance: tol * max(1, scale).
pub(crate) fn tol_for(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}
