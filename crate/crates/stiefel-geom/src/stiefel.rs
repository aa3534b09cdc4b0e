//! Stiefel manifold primitives: points with cached orthonormal complement,
//! tangent vectors in (A, B) form, the canonical metric, the closed-form
//! exponential map, samplers, and the maximal-curvature tangent plane.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matops::{self, DenseMatrix, SkewMatrix};

/// Dimension of St(n,p) as a manifold: p(p-1)/2 + (n-p)p.
pub fn manifold_dim(n: usize, p: usize) -> usize {
    p * (p - 1) / 2 + (n - p) * p
}

/// A point U on St(n,p) together with an orthonormal complement U_perp such
/// that [U | U_perp] is special orthogonal.
#[derive(Debug, Clone)]
pub struct StiefelPoint {
    u: DenseMatrix,
    u_perp: DenseMatrix,
}

impl StiefelPoint {
    pub fn new(u: DenseMatrix, u_perp: DenseMatrix) -> Result<Self> {
        let n = u.rows();
        let p = u.cols();
        if p > n || u_perp.rows() != n || u_perp.cols() != n - p {
            return Err(Error::DimensionMismatch(format!(
                "point {}x{} with complement {}x{}",
                n,
                p,
                u_perp.rows(),
                u_perp.cols()
            )));
        }
        let point = StiefelPoint { u, u_perp };
        let gram = (&point.u.transpose().matmul(&point.u) - &DenseMatrix::identity(p)).frob_norm();
        if gram > 1e-10 {
            return Err(Error::NotSpecialOrthogonal(format!(
                "||U^T U - I||_F = {gram:.3e}"
            )));
        }
        let frame = point.frame();
        let fg = (&frame.transpose().matmul(&frame) - &DenseMatrix::identity(n)).frob_norm();
        if fg > 1e-10 || matops::det(&frame) < 0.0 {
            return Err(Error::NotSpecialOrthogonal(format!(
                "[U | U_perp] residual {fg:.3e}, det {}",
                matops::det(&frame)
            )));
        }
        Ok(point)
    }

    fn from_parts_unchecked(u: DenseMatrix, u_perp: DenseMatrix) -> Self {
        StiefelPoint { u, u_perp }
    }

    /// The canonical base point [I_p; 0] with complement [0; I_{n-p}].
    pub fn canonical(n: usize, p: usize) -> Self {
        assert!(p <= n);
        let mut u = DenseMatrix::zeros(n, p);
        for i in 0..p {
            u[(i, i)] = 1.0;
        }
        let mut u_perp = DenseMatrix::zeros(n, n - p);
        for i in 0..n - p {
            u_perp[(p + i, i)] = 1.0;
        }
        StiefelPoint { u, u_perp }
    }

    /// Build a point from U alone, computing a complement by QR completion.
    pub fn from_matrix(u: DenseMatrix) -> Result<Self> {
        let n = u.rows();
        let p = u.cols();
        let (q, _) = matops::qr_complete(&u)?;
        let point = StiefelPoint {
            u,
            u_perp: q.block(0, p, n, n - p),
        };
        // Re-validate: the input U itself must be orthonormal.
        StiefelPoint::new(point.u.clone(), point.u_perp.clone())
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn p(&self) -> usize {
        self.u.cols()
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn u_perp(&self) -> &DenseMatrix {
        &self.u_perp
    }

    /// The full frame [U | U_perp] in SO(n).
    pub fn frame(&self) -> DenseMatrix {
        self.u.hcat(&self.u_perp)
    }
}

/// Tangent vector at a base point in horizontal (A, B) parameterization:
/// Delta = U A + U_perp B with A skew p x p and B (n-p) x p.
#[derive(Debug, Clone)]
pub struct TangentParam {
    base: StiefelPoint,
    a: SkewMatrix,
    b: DenseMatrix,
}

impl TangentParam {
    pub fn new(base: StiefelPoint, a: SkewMatrix, b: DenseMatrix) -> Result<Self> {
        let (n, p) = (base.n(), base.p());
        if a.dim() != p || b.rows() != n - p || b.cols() != p {
            return Err(Error::DimensionMismatch(format!(
                "tangent blocks A {}x{}, B {}x{} at a point of St({},{})",
                a.dim(),
                a.dim(),
                b.rows(),
                b.cols(),
                n,
                p
            )));
        }
        Ok(TangentParam { base, a, b })
    }

    pub fn zero(base: StiefelPoint) -> Self {
        let p = base.p();
        let nm = base.n() - p;
        TangentParam {
            a: SkewMatrix::zero(p),
            b: DenseMatrix::zeros(nm, p),
            base,
        }
    }

    pub fn base(&self) -> &StiefelPoint {
        &self.base
    }

    pub fn a(&self) -> &DenseMatrix {
        self.a.as_matrix()
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    /// The ambient n x p realization U A + U_perp B.
    pub fn realization(&self) -> DenseMatrix {
        &self.base.u.matmul(self.a.as_matrix()) + &self.base.u_perp.matmul(&self.b)
    }

    /// Horizontal lift Omega = [[A, -B^T], [B, 0]] in skew(n).
    pub fn lift(&self) -> DenseMatrix {
        let n = self.base.n();
        let p = self.base.p();
        let mut omega = DenseMatrix::zeros(n, n);
        omega.set_block(0, 0, self.a.as_matrix());
        omega.set_block(0, p, &self.b.transpose().scale(-1.0));
        omega.set_block(p, 0, &self.b);
        omega
    }

    pub fn canonical_norm(&self) -> f64 {
        canonical_inner(self, self)
            .expect("tangent is self-compatible")
            .sqrt()
    }

    pub fn scaled(&self, c: f64) -> TangentParam {
        TangentParam {
            base: self.base.clone(),
            a: SkewMatrix::from_skew_part(&self.a.as_matrix().scale(c)),
            b: self.b.scale(c),
        }
    }

    /// Linear combination with another tangent at the same base dimensions.
    pub fn try_add(&self, other: &TangentParam) -> Result<TangentParam> {
        check_same_space(self, other)?;
        Ok(TangentParam {
            base: self.base.clone(),
            a: SkewMatrix::from_skew_part(&(self.a.as_matrix() + other.a.as_matrix())),
            b: &self.b + &other.b,
        })
    }

    pub fn normalized(&self) -> Result<TangentParam> {
        let nrm = self.canonical_norm();
        if nrm < 1e-300 {
            return Err(Error::DegeneratePlane(nrm));
        }
        Ok(self.scaled(1.0 / nrm))
    }
}

fn check_same_space(d1: &TangentParam, d2: &TangentParam) -> Result<()> {
    if d1.base.n() != d2.base.n() || d1.base.p() != d2.base.p() {
        return Err(Error::DimensionMismatch(format!(
            "tangents live on St({},{}) and St({},{})",
            d1.base.n(),
            d1.base.p(),
            d2.base.n(),
            d2.base.p()
        )));
    }
    Ok(())
}

/// Canonical metric: <D1, D2> = 1/2 tr(A1^T A2) + tr(B1^T B2).
pub fn canonical_inner(d1: &TangentParam, d2: &TangentParam) -> Result<f64> {
    check_same_space(d1, d2)?;
    Ok(0.5 * d1.a.as_matrix().frob_inner(d2.a.as_matrix()) + d1.b.frob_inner(&d2.b))
}

/// One geodesic segment: a start point, a unit-speed direction, and a length.
#[derive(Debug, Clone)]
pub struct GeodesicSpec {
    direction: TangentParam,
    length: f64,
}

impl GeodesicSpec {
    /// Wrap an already unit-norm direction; rejects non-unit input.
    pub fn unit(direction: TangentParam, length: f64) -> Result<Self> {
        let nrm = direction.canonical_norm();
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::DimensionMismatch(format!(
                "geodesic direction must have canonical norm 1, got {nrm}"
            )));
        }
        if !(length >= 0.0) {
            return Err(Error::DimensionMismatch(format!(
                "geodesic length must be nonnegative, got {length}"
            )));
        }
        Ok(GeodesicSpec { direction, length })
    }

    /// Normalize a nonzero tangent; the segment length is its canonical norm,
    /// so `stiefel_exp(spec, spec.length())` equals Exp(tangent).
    pub fn from_tangent(tangent: &TangentParam) -> Result<Self> {
        let nrm = tangent.canonical_norm();
        if nrm < 1e-300 {
            return Err(Error::DegeneratePlane(nrm));
        }
        Ok(GeodesicSpec {
            direction: tangent.scaled(1.0 / nrm),
            length: nrm,
        })
    }

    pub fn start(&self) -> &StiefelPoint {
        self.direction.base()
    }

    pub fn direction(&self) -> &TangentParam {
        &self.direction
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// Length of the geodesic segment; the direction is unit speed by invariant.
pub fn geodesic_length(spec: &GeodesicSpec) -> f64 {
    spec.length
}

/// Evaluate the geodesic gamma(t) = [U U_perp] expm(t Omega) [I_p; 0].
/// The complement of the returned point is transported by the same factor.
pub fn stiefel_exp(spec: &GeodesicSpec, t: f64) -> StiefelPoint {
    exp_tangent(&spec.direction.scaled(t))
}

/// Exponential of an arbitrary tangent vector (not necessarily unit).
pub fn exp_tangent(tangent: &TangentParam) -> StiefelPoint {
    let base = tangent.base();
    let n = base.n();
    let p = base.p();
    let factor = matops::expm(&tangent.lift());
    let frame = base.frame().matmul(&factor);
    StiefelPoint::from_parts_unchecked(frame.block(0, 0, n, p), frame.block(0, p, n, n - p))
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Gaussian skew matrix whose canonical coordinates are standard normal.
fn gaussian_skew(dim: usize, rng: &mut impl Rng) -> DenseMatrix {
    let g = gaussian(dim, dim, rng);
    (&g - &g.transpose()).scale(1.0 / std::f64::consts::SQRT_2)
}

/// Draw a point by QR of a Gaussian matrix, sign-fixed so R has a positive
/// diagonal; the complement comes from the same QR completion.
pub fn random_point(n: usize, p: usize, rng: &mut impl Rng) -> StiefelPoint {
    assert!(p <= n);
    for _ in 0..16 {
        let g = gaussian(n, p, rng);
        if let Ok((q, _)) = matops::qr_complete(&g) {
            return StiefelPoint::from_parts_unchecked(q.block(0, 0, n, p), q.block(0, p, n, n - p));
        }
    }
    unreachable!("Gaussian matrices are full rank almost surely")
}

/// Generic unit tangent: Gaussian A and B in canonical coordinates.
pub fn random_tangent(base: &StiefelPoint, rng: &mut impl Rng) -> TangentParam {
    let p = base.p();
    let nm = base.n() - p;
    loop {
        let a = SkewMatrix::from_skew_part(&gaussian_skew(p, rng));
        let b = gaussian(nm, p, rng);
        let t = TangentParam {
            base: base.clone(),
            a,
            b,
        };
        if let Ok(u) = t.normalized() {
            return u;
        }
    }
}

/// Unit tangent of numerical rank exactly `rank`: a generic tangent restricted
/// to a random rank-dimensional right subspace. With Q_j the first j columns
/// of a Haar rotation, A = Q_j A~ Q_j^T and B = B~ Q_j^T, so the stacked
/// parameter block [A; B] = [Q_j A~; B~] Q_j^T has rank exactly j almost
/// surely (for j = 1 the skew block A~ is forced to zero).
pub fn random_tangent_rank(
    base: &StiefelPoint,
    rank: usize,
    rng: &mut impl Rng,
) -> Result<TangentParam> {
    let n = base.n();
    let p = base.p();
    if rank == 0 || rank > p {
        return Err(Error::UnreachableRank { n, p, rank });
    }
    // With no B block, a skew matrix of odd rank does not exist.
    if n == p && rank % 2 == 1 {
        return Err(Error::UnreachableRank { n, p, rank });
    }
    for _ in 0..32 {
        let q = random_point(p, p, rng);
        let qj = q.u().block(0, 0, p, rank);
        let a_small = gaussian_skew(rank, rng);
        let b_small = gaussian(n - p, rank, rng);
        let a = qj.matmul(&a_small).matmul(&qj.transpose());
        let b = b_small.matmul(&qj.transpose());
        let t = TangentParam {
            base: base.clone(),
            a: SkewMatrix::from_skew_part(&a),
            b,
        };
        let t = match t.normalized() {
            Ok(t) => t,
            Err(_) => continue,
        };
        let sv = matops::singular_values(&t.realization());
        let smax = sv[0];
        let ok_rank = sv[rank - 1] > 1e-8 * smax
            && (rank == p.min(n) || sv[rank] < 1e-10 * smax);
        if ok_rank {
            return Ok(t);
        }
    }
    Err(Error::UnreachableRank { n, p, rank })
}

fn embedded_b_block(base: &StiefelPoint, block: [[f64; 2]; 2]) -> DenseMatrix {
    let p = base.p();
    let nm = base.n() - p;
    let mut b = DenseMatrix::zeros(nm, p);
    b[(0, 0)] = block[0][0];
    b[(0, 1)] = block[0][1];
    b[(1, 0)] = block[1][0];
    b[(1, 1)] = block[1][1];
    b
}

fn require_max_curvature_dims(base: &StiefelPoint) -> Result<()> {
    if base.p() < 2 || base.n() < base.p() + 2 {
        return Err(Error::DimensionTooSmall {
            n: base.n(),
            p: base.p(),
        });
    }
    Ok(())
}

/// The two unit, mutually orthogonal tangents spanning the tangent plane of
/// maximal sectional curvature 5/4, embedded top-left and zero-padded:
/// A1 = A2 = 0, B1 = (1/sqrt2) [[0,1],[1,0]], B2 = (1/sqrt2) [[1,0],[0,-1]].
pub fn max_curvature_pair(base: &StiefelPoint) -> Result<(TangentParam, TangentParam)> {
    require_max_curvature_dims(base)?;
    let p = base.p();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let b1 = embedded_b_block(base, [[0.0, s], [s, 0.0]]);
    let b2 = embedded_b_block(base, [[s, 0.0], [0.0, -s]]);
    Ok((
        TangentParam {
            base: base.clone(),
            a: SkewMatrix::zero(p),
            b: b1,
        },
        TangentParam {
            base: base.clone(),
            a: SkewMatrix::zero(p),
            b: b2,
        },
    ))
}

/// The unit tangent with A = 0 and B = [[1/2, 1/2], [-1/2, 1/2]] zero-padded.
/// Together with `max_curvature_companion` it spans a plane of sectional
/// curvature exactly 5/4.
pub fn max_curvature_direction(base: &StiefelPoint) -> Result<TangentParam> {
    require_max_curvature_dims(base)?;
    Ok(TangentParam {
        base: base.clone(),
        a: SkewMatrix::zero(base.p()),
        b: embedded_b_block(base, [[0.5, 0.5], [-0.5, 0.5]]),
    })
}

/// Unit tangent orthogonal to `max_curvature_direction` that completes its
/// maximal-curvature plane: B = [[1/2, -1/2], [1/2, 1/2]] zero-padded.
pub fn max_curvature_companion(base: &StiefelPoint) -> Result<TangentParam> {
    require_max_curvature_dims(base)?;
    Ok(TangentParam {
        base: base.clone(),
        a: SkewMatrix::zero(base.p()),
        b: embedded_b_block(base, [[0.5, -0.5], [0.5, 0.5]]),
    })
}

/// Canonical-orthonormal tangent basis of size dim St(n,p):
/// skew generators (e_i e_j^T - e_j e_i^T) for i < j (unit canonical norm
/// as they stand) and the B-side generators e_k e_l^T.
pub fn tangent_basis(base: &StiefelPoint) -> Vec<TangentParam> {
    let p = base.p();
    let nm = base.n() - p;
    let mut basis = Vec::with_capacity(manifold_dim(base.n(), p));
    for i in 0..p {
        for j in i + 1..p {
            let mut a = DenseMatrix::zeros(p, p);
            a[(i, j)] = 1.0;
            a[(j, i)] = -1.0;
            basis.push(TangentParam {
                base: base.clone(),
                a: SkewMatrix::from_skew_part(&a),
                b: DenseMatrix::zeros(nm, p),
            });
        }
    }
    for k in 0..nm {
        for l in 0..p {
            let mut b = DenseMatrix::zeros(nm, p);
            b[(k, l)] = 1.0;
            basis.push(TangentParam {
                base: base.clone(),
                a: SkewMatrix::zero(p),
                b,
            });
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn manifold_dim_formula() {
        assert_eq!(manifold_dim(4, 2), 5);
        assert_eq!(manifold_dim(4, 1), 3);
        assert_eq!(manifold_dim(10, 4), 30);
    }

    #[test]
    fn canonical_inner_examples() {
        let base = StiefelPoint::canonical(4, 2);
        // B with B^T B = I/2 has unit canonical norm.
        let d = max_curvature_direction(&base).unwrap();
        assert!((canonical_inner(&d, &d).unwrap() - 1.0).abs() < 1e-15);
        // Zero second argument.
        let z = TangentParam::zero(base.clone());
        assert_eq!(canonical_inner(&d, &z).unwrap(), 0.0);
        // A-only tangent with tr(A^T A) = 2.
        let a = DenseMatrix::from_row_major(2, 2, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        let t = TangentParam::new(
            base.clone(),
            SkewMatrix::new(a).unwrap(),
            DenseMatrix::zeros(2, 2),
        )
        .unwrap();
        assert!((canonical_inner(&t, &t).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_at_zero_returns_start() {
        let base = StiefelPoint::canonical(5, 2);
        let mut r = rng(10);
        let dir = random_tangent(&base, &mut r);
        let spec = GeodesicSpec::unit(dir, 1.0).unwrap();
        let gamma0 = stiefel_exp(&spec, 0.0);
        assert!((gamma0.u() - base.u()).frob_norm() < 1e-14);
        assert!((gamma0.u_perp() - base.u_perp()).frob_norm() < 1e-14);
    }

    #[test]
    fn exp_on_circle_quarter_turn() {
        // St(2,1) is the circle: from [1;0] with B = [1], a quarter turn
        // lands on [0;1].
        let base = StiefelPoint::canonical(2, 1);
        let t = TangentParam::new(
            base,
            SkewMatrix::zero(1),
            DenseMatrix::from_row_major(1, 1, vec![1.0]).unwrap(),
        )
        .unwrap();
        let spec = GeodesicSpec::unit(t, 2.0).unwrap();
        let gamma = stiefel_exp(&spec, std::f64::consts::FRAC_PI_2);
        assert!(gamma.u()[(0, 0)].abs() < 1e-12);
        assert!((gamma.u()[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_output_is_orthonormal() {
        let mut r = rng(11);
        for trial in 0..30 {
            let n = 3 + trial % 8;
            let p = 1 + trial % n.min(4);
            let base = random_point(n, p, &mut r);
            let dir = random_tangent(&base, &mut r);
            let spec = GeodesicSpec::unit(dir, 4.0).unwrap();
            let t = 0.1 + 3.0 * (trial as f64) / 30.0;
            let g = stiefel_exp(&spec, t);
            let resid =
                (&g.u().transpose().matmul(g.u()) - &DenseMatrix::identity(p)).frob_norm();
            assert!(resid < 1e-10, "residual {resid:e} at n={n} p={p}");
            // Complement stays consistent.
            StiefelPoint::new(g.u().clone(), g.u_perp().clone()).unwrap();
        }
    }

    #[test]
    fn geodesic_length_is_mu() {
        let base = StiefelPoint::canonical(4, 2);
        let d = max_curvature_direction(&base).unwrap();
        let spec = GeodesicSpec::unit(d.clone(), 0.0).unwrap();
        assert_eq!(geodesic_length(&spec), 0.0);
        // The boundary length observed in the cut experiments.
        let spec = GeodesicSpec::unit(d.clone(), 2.87).unwrap();
        assert_eq!(geodesic_length(&spec), 2.87);
        // Scaling a tangent then renormalizing leaves the length unchanged.
        let spec2 = GeodesicSpec::unit(d.scaled(7.0).normalized().unwrap(), 2.87).unwrap();
        assert_eq!(geodesic_length(&spec2), 2.87);
    }

    #[test]
    fn random_point_square_case_and_determinism() {
        let mut r1 = rng(42);
        let q = random_point(3, 3, &mut r1);
        let resid = (&q.u().transpose().matmul(q.u()) - &DenseMatrix::identity(3)).frob_norm();
        assert!(resid < 1e-10);
        assert_eq!(q.u_perp().cols(), 0);

        let mut r2 = rng(42);
        let mut r3 = rng(42);
        let a = random_point(4, 2, &mut r2);
        let b = random_point(4, 2, &mut r3);
        assert_eq!(a.u().as_slice(), b.u().as_slice());
        assert_eq!(a.u_perp().as_slice(), b.u_perp().as_slice());
    }

    #[test]
    fn random_point_invariants() {
        let mut r = rng(12);
        for _ in 0..20 {
            let pt = random_point(7, 3, &mut r);
            StiefelPoint::new(pt.u().clone(), pt.u_perp().clone()).unwrap();
        }
    }

    #[test]
    fn rank_one_tangent() {
        let mut r = rng(13);
        let base = StiefelPoint::canonical(6, 3);
        let t = random_tangent_rank(&base, 1, &mut r).unwrap();
        assert!(t.a().frob_norm() < 1e-15, "rank-1 tangents have A = 0");
        let sv = matops::singular_values(&t.realization());
        assert!(sv[0] > 1e-8 && sv[1] < 1e-10 * sv[0]);
        assert!((t.canonical_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_three_tangent_seeded() {
        let mut r = rng(14);
        let base = StiefelPoint::canonical(10, 4);
        let t = random_tangent_rank(&base, 3, &mut r).unwrap();
        let sv = matops::singular_values(&t.realization());
        assert!(sv[2] > 1e-8 * sv[0], "third singular value too small");
        assert!(sv[3] < 1e-10 * sv[0], "fourth singular value too large");
    }

    #[test]
    fn full_rank_tangent() {
        let mut r = rng(15);
        let base = StiefelPoint::canonical(9, 4);
        let t = random_tangent_rank(&base, 4, &mut r).unwrap();
        let sv = matops::singular_values(&t.realization());
        assert!(sv[3] > 1e-8 * sv[0]);
    }

    #[test]
    fn unreachable_ranks() {
        let mut r = rng(16);
        let base = StiefelPoint::canonical(5, 3);
        assert!(matches!(
            random_tangent_rank(&base, 4, &mut r),
            Err(Error::UnreachableRank { .. })
        ));
        let square = StiefelPoint::canonical(3, 3);
        assert!(matches!(
            random_tangent_rank(&square, 3, &mut r),
            Err(Error::UnreachableRank { .. })
        ));
    }

    #[test]
    fn max_curvature_pair_entries() {
        let base = StiefelPoint::canonical(4, 2);
        let (d1, d2) = max_curvature_pair(&base).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b1 = DenseMatrix::from_row_major(2, 2, vec![0.0, s, s, 0.0]).unwrap();
        let b2 = DenseMatrix::from_row_major(2, 2, vec![s, 0.0, 0.0, -s]).unwrap();
        assert!((d1.b() - &b1).frob_norm() < 1e-15);
        assert!((d2.b() - &b2).frob_norm() < 1e-15);
        assert!(canonical_inner(&d1, &d2).unwrap().abs() < 1e-15);
        assert!((d1.canonical_norm() - 1.0).abs() < 1e-15);
        assert!((d2.canonical_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_curvature_pair_dimension_guard() {
        let base = StiefelPoint::canonical(3, 2);
        assert!(matches!(
            max_curvature_pair(&base),
            Err(Error::DimensionTooSmall { .. })
        ));
        let base = StiefelPoint::canonical(4, 1);
        assert!(matches!(
            max_curvature_direction(&base),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn max_curvature_direction_properties() {
        let base = StiefelPoint::canonical(4, 2);
        let d = max_curvature_direction(&base).unwrap();
        assert!((d.canonical_norm() - 1.0).abs() < 1e-15);
        let spec = GeodesicSpec::unit(d.clone(), 1.0).unwrap();
        let g0 = stiefel_exp(&spec, 0.0);
        assert!((g0.u() - base.u()).frob_norm() < 1e-14);
        // The direction is canonically orthogonal to both members of the
        // printed maximal pair; its own 5/4 plane is spanned with the
        // companion tangent instead.
        let (d1, d2) = max_curvature_pair(&base).unwrap();
        assert!(canonical_inner(&d, &d1).unwrap().abs() < 1e-15);
        assert!(canonical_inner(&d, &d2).unwrap().abs() < 1e-15);
        let c = max_curvature_companion(&base).unwrap();
        assert!(canonical_inner(&d, &c).unwrap().abs() < 1e-15);
        assert!((c.canonical_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tangent_basis_counts_and_orthonormality() {
        let base = StiefelPoint::canonical(4, 2);
        let basis = tangent_basis(&base);
        assert_eq!(basis.len(), 5);
        let base1 = StiefelPoint::canonical(4, 1);
        assert_eq!(tangent_basis(&base1).len(), 3);
        for (i, bi) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                let ip = canonical_inner(bi, bj).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "<b{i}, b{j}> = {ip}");
            }
        }
    }

    #[test]
    fn tangent_basis_realizations_independent() {
        let mut r = rng(17);
        let base = random_point(6, 3, &mut r);
        let basis = tangent_basis(&base);
        let d = basis.len();
        let n = base.n();
        let p = base.p();
        let mut stacked = DenseMatrix::zeros(n * p, d);
        for (k, t) in basis.iter().enumerate() {
            let real = t.realization();
            for i in 0..n {
                for j in 0..p {
                    stacked[(i * p + j, k)] = real[(i, j)];
                }
            }
        }
        let sv = matops::singular_values(&stacked);
        assert!(sv[d - 1] > 0.5, "sigma_min = {}", sv[d - 1]);
    }

    #[test]
    fn exp_equivariance_under_rotation() {
        let mut r = rng(18);
        for _ in 0..5 {
            let base = random_point(6, 2, &mut r);
            let dir = random_tangent(&base, &mut r);
            let q = random_point(6, 6, &mut r);
            let qm = q.u();
            let rotated = StiefelPoint::new(
                qm.matmul(base.u()),
                qm.matmul(base.u_perp()),
            )
            .unwrap();
            let dir_rot = TangentParam::new(
                rotated.clone(),
                SkewMatrix::new(dir.a().clone()).unwrap(),
                dir.b().clone(),
            )
            .unwrap();
            let t = 1.7;
            let spec = GeodesicSpec::unit(dir.clone(), 2.0).unwrap();
            let spec_rot = GeodesicSpec::unit(dir_rot, 2.0).unwrap();
            let lhs = stiefel_exp(&spec_rot, t);
            let rhs = qm.matmul(stiefel_exp(&spec, t).u());
            assert!((lhs.u() - &rhs).frob_norm() < 1e-10);
        }
    }

    #[test]
    fn unit_speed_by_finite_differences() {
        let mut r = rng(19);
        let base = random_point(7, 3, &mut r);
        let dir = random_tangent(&base, &mut r);
        let spec = GeodesicSpec::unit(dir, 3.0).unwrap();
        let h = 1e-4;
        for &t in &[0.3, 1.1, 2.4] {
            let plus = stiefel_exp(&spec, t + h);
            let minus = stiefel_exp(&spec, t - h);
            let vel = (plus.u() - minus.u()).scale(1.0 / (2.0 * h));
            let here = stiefel_exp(&spec, t);
            // Project to (A, B) coordinates at gamma(t).
            let a = SkewMatrix::from_skew_part(&here.u().transpose().matmul(&vel));
            let b = here.u_perp().transpose().matmul(&vel);
            let speed = (0.5 * a.as_matrix().frob_inner(a.as_matrix()) + b.frob_inner(&b)).sqrt();
            assert!((speed - 1.0).abs() < 1e-5, "speed {speed} at t={t}");
        }
    }
}
