//! SVD-based recovery of the weight span and of the span of the weight outer
//! products, plus the diagnostics used around it: ratio-gap rank detection,
//! projector distances, the singular-subspace perturbation bound, and
//! Monte-Carlo conditioning estimates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{frob_inner, sign_fix, symmetrize};
use crate::model::RidgeNetwork;
use crate::oracle::{gradient_fd, hessian_fd, QueryOracle};
use crate::rng::derive_rng;
use crate::sampling::uniform_sphere;

/// Orthonormal basis of a k-dimensional subspace of R^d. Serializes to the
/// report schema as a column-major array.
#[derive(Debug, Clone)]
pub struct VectorSubspace {
    basis: DMatrix<f64>,
}

impl serde::Serialize for VectorSubspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("VectorSubspace", 3)?;
        s.serialize_field("ambient_dim", &self.ambient_dim())?;
        s.serialize_field("rank", &self.rank())?;
        s.serialize_field("basis", &self.basis.as_slice())?;
        s.end()
    }
}

impl VectorSubspace {
    pub fn from_basis(basis: DMatrix<f64>) -> Result<Self> {
        let gram = basis.transpose() * &basis;
        let k = basis.ncols();
        if (gram - DMatrix::identity(k, k)).norm() > 1e-10 {
            return Err(Error::InvalidArgument("basis is not orthonormal".into()));
        }
        Ok(Self { basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * x)
    }

    /// ||P1 - P2||_F without forming the projectors:
    /// sqrt(k1 + k2 - 2 ||B1ᵀ B2||_F²).
    pub fn projection_distance(&self, other: &VectorSubspace) -> f64 {
        let cross = self.basis.transpose() * &other.basis;
        let val = self.rank() as f64 + other.rank() as f64 - 2.0 * cross.norm_squared();
        val.max(0.0).sqrt()
    }
}

/// Subspace of symmetric m x m matrices with a Frobenius-orthonormal basis.
/// Serializes each basis element as a column-major array.
#[derive(Debug, Clone)]
pub struct MatrixSubspace {
    side: usize,
    basis: Vec<DMatrix<f64>>,
}

impl serde::Serialize for MatrixSubspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let columns: Vec<&[f64]> = self.basis.iter().map(|b| b.as_slice()).collect();
        let mut s = serializer.serialize_struct("MatrixSubspace", 3)?;
        s.serialize_field("side", &self.side)?;
        s.serialize_field("rank", &self.rank())?;
        s.serialize_field("basis", &columns)?;
        s.end()
    }
}

impl MatrixSubspace {
    pub fn from_basis(side: usize, basis: Vec<DMatrix<f64>>) -> Result<Self> {
        for (i, b) in basis.iter().enumerate() {
            if b.nrows() != side || b.ncols() != side {
                return Err(Error::InvalidArgument("basis element has wrong shape".into()));
            }
            if (b - b.transpose()).norm() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "basis element {i} is not symmetric"
                )));
            }
            for (j, c) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (frob_inner(b, c) - expected).abs() > 1e-10 {
                    return Err(Error::InvalidArgument(format!(
                        "basis elements {i},{j} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self { side, basis })
    }

    /// Gram-Schmidt in the Frobenius inner product; drops near-dependent
    /// members.
    pub fn orthonormalize(side: usize, members: &[DMatrix<f64>]) -> Result<Self> {
        let mut basis: Vec<DMatrix<f64>> = Vec::new();
        for m in members {
            let mut b = symmetrize(m);
            for prev in &basis {
                let c = frob_inner(&b, prev);
                b -= prev * c;
            }
            // Second pass for numerical orthogonality.
            for prev in &basis {
                let c = frob_inner(&b, prev);
                b -= prev * c;
            }
            let n = b.norm();
            if n > 1e-10 {
                basis.push(b / n);
            }
        }
        if basis.is_empty() {
            return Err(Error::InvalidArgument("no independent members".into()));
        }
        Self::from_basis(side, basis)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn coefficients(&self, m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_fn(self.basis.len(), |i, _| frob_inner(m, &self.basis[i]))
    }

    pub fn member(&self, coeffs: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.side, self.side);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out += b * *c;
        }
        out
    }

    pub fn project(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.member(&self.coefficients(m))
    }

    pub fn projection_residual(&self, m: &DMatrix<f64>) -> f64 {
        (m - self.project(m)).norm()
    }

    fn cross_gram(&self, other: &MatrixSubspace) -> DMatrix<f64> {
        DMatrix::from_fn(self.rank(), other.rank(), |i, j| {
            frob_inner(&self.basis[i], &other.basis[j])
        })
    }

    /// Frobenius distance of the projectors acting on vectorized matrices.
    pub fn projection_distance(&self, other: &MatrixSubspace) -> f64 {
        let cross = self.cross_gram(other);
        let val = self.rank() as f64 + other.rank() as f64 - 2.0 * cross.norm_squared();
        val.max(0.0).sqrt()
    }

    /// Operator-norm distance ||P1 - P2||, via the principal angles: for
    /// equal-rank subspaces this is sqrt(1 - σ_min(B1ᵀB2)²).
    pub fn operator_distance(&self, other: &MatrixSubspace) -> f64 {
        let cross = self.cross_gram(other);
        let svd = cross.svd(false, false);
        let sigma_min = svd.singular_values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        (1.0 - (sigma_min * sigma_min).min(1.0)).max(0.0).sqrt()
    }
}

/// Span of gradient estimates: the top-`target_rank` left singular vectors of
/// the d x N sample matrix, sign-fixed so runs are reproducible.
pub fn recover_vector_space(samples: &[DVector<f64>], target_rank: usize) -> Result<VectorSubspace> {
    if samples.len() < target_rank {
        return Err(Error::InsufficientSamples {
            needed: target_rank,
            got: samples.len(),
        });
    }
    let d = samples[0].len();
    let y = DMatrix::from_fn(d, samples.len(), |i, j| samples[j][i]);
    let svd = y.svd(true, false);
    let sigma = &svd.singular_values;
    if sigma.len() < target_rank || sigma[target_rank - 1] < 1e-12 * sigma[0] {
        return Err(Error::RankDeficient {
            rank: target_rank,
            sigma_k: if sigma.len() < target_rank { 0.0 } else { sigma[target_rank - 1] },
            sigma_1: sigma[0],
        });
    }
    let u = svd.u.as_ref().expect("svd with u");
    let mut basis = DMatrix::zeros(d, target_rank);
    for j in 0..target_rank {
        let mut col = u.column(j).clone_owned();
        sign_fix(&mut col);
        basis.set_column(j, &col);
    }
    VectorSubspace::from_basis(basis)
}

/// Span of Hessian estimates, recovered over vectorized symmetric matrices
/// and re-symmetrized.
pub fn recover_matrix_space(samples: &[DMatrix<f64>], target_rank: usize) -> Result<MatrixSubspace> {
    if samples.len() < target_rank {
        return Err(Error::InsufficientSamples {
            needed: target_rank,
            got: samples.len(),
        });
    }
    let m = samples[0].nrows();
    let y = DMatrix::from_fn(m * m, samples.len(), |i, j| samples[j][(i % m, i / m)]);
    let svd = y.svd(true, false);
    let sigma = &svd.singular_values;
    if sigma.len() < target_rank || sigma[target_rank - 1] < 1e-12 * sigma[0] {
        return Err(Error::RankDeficient {
            rank: target_rank,
            sigma_k: if sigma.len() < target_rank { 0.0 } else { sigma[target_rank - 1] },
            sigma_1: sigma[0],
        });
    }
    let u = svd.u.as_ref().expect("svd with u");
    let mut members = Vec::with_capacity(target_rank);
    for j in 0..target_rank {
        let mut col = u.column(j).clone_owned();
        sign_fix(&mut col);
        let mat = DMatrix::from_fn(m, m, |r, c| col[c * m + r]);
        members.push(symmetrize(&mat));
    }
    MatrixSubspace::orthonormalize(m, &members)
}

/// Rank detection by the dominant ratio gap σ_k/σ_{k+1} (scale free).
pub fn detect_rank(singular_values: &[f64]) -> usize {
    assert!(singular_values.len() >= 2, "need at least two singular values");
    let mut best_k = 1;
    let mut best_ratio = f64::NEG_INFINITY;
    for k in 1..singular_values.len() {
        let denom = singular_values[k].max(1e-15);
        let ratio = singular_values[k - 1] / denom;
        if ratio > best_ratio {
            best_ratio = ratio;
            best_k = k;
        }
    }
    best_k
}

/// Restriction of the oracle to a recovered subspace: evaluates y -> f(B y),
/// with queries counted on the same counter. Recovered reduced directions
/// lift back through B.
pub fn reduce_dimension(oracle: QueryOracle, space: &VectorSubspace) -> QueryOracle {
    oracle.compose_linear(space.basis().clone())
}

/// Singular-subspace perturbation bound: (sqrt(2)/alpha) ||B - B~||_F, an
/// upper bound on the Frobenius distance of the rank-`split_rank` singular
/// projectors whenever the separation alpha is positive.
pub fn wedin_bound(b: &DMatrix<f64>, b_tilde: &DMatrix<f64>, split_rank: usize) -> Result<f64> {
    if b.shape() != b_tilde.shape() {
        return Err(Error::InvalidArgument("matrices must share a shape".into()));
    }
    let s = b.clone().svd(false, false).singular_values;
    let s_tilde = b_tilde.clone().svd(false, false).singular_values;
    if split_rank == 0 || split_rank > s.len() {
        return Err(Error::InvalidArgument(format!(
            "split_rank {split_rank} out of range"
        )));
    }
    // Separation between the kept singular values of the perturbed matrix and
    // the discarded ones of the reference, and their distance from zero.
    let mut alpha = f64::INFINITY;
    for i in 0..split_rank {
        alpha = alpha.min(s_tilde[i]);
        for j in split_rank..s.len() {
            alpha = alpha.min((s_tilde[i] - s[j]).abs());
        }
    }
    if alpha <= 0.0 {
        return Err(Error::InvalidArgument(
            "singular value separation is not positive; bound inapplicable".into(),
        ));
    }
    Ok(2.0f64.sqrt() / alpha * (b - b_tilde).norm())
}

/// Analytic or finite-difference derivative access for the conditioning
/// estimates.
pub trait DerivativeSource {
    fn dim(&self) -> usize;
    fn gradient_at(&mut self, x: &DVector<f64>) -> Result<DVector<f64>>;
    fn hessian_at(&mut self, x: &DVector<f64>) -> Result<DMatrix<f64>>;
}

impl DerivativeSource for &RidgeNetwork {
    fn dim(&self) -> usize {
        RidgeNetwork::dim(self)
    }
    fn gradient_at(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.grad(x))
    }
    fn hessian_at(&mut self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.hess(x))
    }
}

/// Finite-difference adapter so a black-box oracle can feed the estimates.
pub struct FdDerivatives<'a> {
    pub oracle: &'a mut QueryOracle,
    pub h: f64,
}

impl DerivativeSource for FdDerivatives<'_> {
    fn dim(&self) -> usize {
        self.oracle.dim()
    }
    fn gradient_at(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        gradient_fd(self.oracle, x, self.h)
    }
    fn hessian_at(&mut self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        hessian_fd(self.oracle, x, self.h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditioningOrder {
    /// σ_m of the second moment of gradients over the sphere.
    First,
    /// σ_m of the second moment of vectorized Hessians over the sphere.
    Second,
}

/// Monte-Carlo estimate of the conditioning constant: the m-th singular value
/// of (1/n) Σ v(xᵢ) v(xᵢ)ᵀ for v = ∇f (order 1) or v = vec(∇²f) (order 2),
/// with xᵢ uniform on the sphere.
pub fn estimate_conditioning(
    source: &mut dyn DerivativeSource,
    order: ConditioningOrder,
    target_rank: usize,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    if n_mc < 100 {
        return Err(Error::InsufficientSamples { needed: 100, got: n_mc });
    }
    let d = source.dim();
    let rows = match order {
        ConditioningOrder::First => d,
        ConditioningOrder::Second => d * d,
    };
    let mut rng = derive_rng(seed, &[0x636f_6e64]);
    let mut v = DMatrix::zeros(rows, n_mc);
    for j in 0..n_mc {
        let x = uniform_sphere(d, &mut rng);
        match order {
            ConditioningOrder::First => {
                let g = source.gradient_at(&x)?;
                v.set_column(j, &g);
            }
            ConditioningOrder::Second => {
                let h = source.hessian_at(&x)?;
                for c in 0..d {
                    for r in 0..d {
                        v[(c * d + r, j)] = h[(r, c)];
                    }
                }
            }
        }
    }
    let sigma = v.svd(false, false).singular_values;
    if target_rank == 0 || target_rank > sigma.len() {
        return Err(Error::InvalidArgument(format!(
            "target_rank {target_rank} out of range"
        )));
    }
    // Singular values of the second-moment matrix are σ(V)²/n.
    Ok(sigma[target_rank - 1].powi(2) / n_mc as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_network;
    use crate::rng::derive_rng;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn exact_gradient_samples(net: &RidgeNetwork, n: usize, seed: u64) -> Vec<DVector<f64>> {
        let mut rng = derive_rng(seed, &[81]);
        (0..n)
            .map(|_| net.grad(&uniform_sphere(net.dim(), &mut rng)))
            .collect()
    }

    fn exact_hessian_samples(net: &RidgeNetwork, n: usize, seed: u64) -> Vec<DMatrix<f64>> {
        let mut rng = derive_rng(seed, &[82]);
        (0..n)
            .map(|_| net.hess(&uniform_sphere(net.dim(), &mut rng)))
            .collect()
    }

    fn truth_vector_space(net: &RidgeNetwork) -> VectorSubspace {
        let qr = net.weights().clone().qr();
        VectorSubspace::from_basis(qr.q()).unwrap()
    }

    fn truth_matrix_space(net: &RidgeNetwork) -> MatrixSubspace {
        let members: Vec<DMatrix<f64>> = (0..net.num_units())
            .map(|i| {
                let a = net.weights().column(i).clone_owned();
                &a * a.transpose()
            })
            .collect();
        MatrixSubspace::orthonormalize(net.dim(), &members).unwrap()
    }

    #[test]
    fn vector_space_recovery_from_exact_gradients() {
        let net = generate_network(4, 6, 0.6, 3).unwrap();
        let samples = exact_gradient_samples(&net, 4, 3);
        let rec = recover_vector_space(&samples, 4).unwrap();
        let truth = truth_vector_space(&net);
        assert!(rec.projection_distance(&truth) < 1e-8);
        // Projector invariants: P² = P and Pᵀ = P.
        let p = rec.projector();
        assert!((&p * &p - &p).norm() < 1e-10);
        assert!((&p - p.transpose()).norm() < 1e-10);
    }

    #[test]
    fn identical_samples_are_rank_deficient() {
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let samples = vec![v.clone(), v.clone(), v];
        assert!(matches!(
            recover_vector_space(&samples, 2),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn fd_gradient_subspace_obeys_perturbation_bound() {
        // m = d = 10, 30 finite-difference gradients at h = 1e-3: the distance
        // to the exact-gradient subspace stays within the Wedin chain
        // 2 ||X - Y||_F / (σ_m(X) - ||X - Y||_F) with ||X - Y||_F <= C2 h m sqrt(N).
        let (m, n) = (10, 30);
        let net = generate_network(m, m, 0.8, 5).unwrap();
        let c2 = net.derivative_bounds()[2];
        let h = 1e-3;
        let mut rng = derive_rng(5, &[83]);
        let points: Vec<DVector<f64>> = (0..n).map(|_| uniform_sphere(m, &mut rng)).collect();
        let exact: Vec<DVector<f64>> = points.iter().map(|x| net.grad(x)).collect();
        let mut oracle = QueryOracle::from_network(net, 0.0, 5);
        let fd: Vec<DVector<f64>> = points
            .iter()
            .map(|x| gradient_fd(&mut oracle, x, h).unwrap())
            .collect();
        let space_exact = recover_vector_space(&exact, m).unwrap();
        let space_fd = recover_vector_space(&fd, m).unwrap();

        let x_mat = DMatrix::from_fn(m, n, |i, j| exact[j][i]);
        let sigma_m = x_mat.svd(false, false).singular_values[m - 1];
        let residual = c2 * h * (n as f64).sqrt() * m as f64;
        assert!(sigma_m > residual);
        let bound = 2.0 * residual / (sigma_m - residual);
        let dist = space_exact.projection_distance(&space_fd);
        assert!(dist <= bound, "distance {dist} vs bound {bound}");
    }

    #[test]
    fn matrix_space_recovery_from_exact_hessians() {
        let net = generate_network(4, 4, 0.5, 11).unwrap();
        let samples = exact_hessian_samples(&net, 4, 11);
        let rec = recover_matrix_space(&samples, 4).unwrap();
        let truth = truth_matrix_space(&net);
        assert!(rec.projection_distance(&truth) < 1e-8);
    }

    #[test]
    fn single_unit_matrix_space_is_the_outer_product() {
        let net = generate_network(1, 3, 0.0, 2).unwrap();
        let samples = exact_hessian_samples(&net, 3, 2);
        let rec = recover_matrix_space(&samples, 1).unwrap();
        let a = net.weights().column(0).clone_owned();
        let target = &a * a.transpose();
        assert!(rec.projection_residual(&target) < 1e-10);
    }

    #[test]
    fn subspace_recovery_invariant_under_sample_permutation() {
        let net = generate_network(3, 5, 0.4, 7).unwrap();
        let samples = exact_gradient_samples(&net, 8, 7);
        let mut reversed = samples.clone();
        reversed.reverse();
        let a = recover_vector_space(&samples, 3).unwrap();
        let b = recover_vector_space(&reversed, 3).unwrap();
        assert!(a.projection_distance(&b) < 1e-8);
    }

    #[test]
    fn weyl_consistency_between_exact_and_fd_sample_matrices() {
        let m = 6;
        let net = generate_network(m, m, 0.5, 19).unwrap();
        let mut rng = derive_rng(19, &[84]);
        let points: Vec<DVector<f64>> = (0..10).map(|_| uniform_sphere(m, &mut rng)).collect();
        let exact = DMatrix::from_fn(m, 10, |i, j| net.grad(&points[j])[i]);
        let mut oracle = QueryOracle::from_network(net, 0.0, 19);
        let mut fd = DMatrix::zeros(m, 10);
        for (j, x) in points.iter().enumerate() {
            let g = gradient_fd(&mut oracle, x, 1e-3).unwrap();
            fd.set_column(j, &g);
        }
        let s_exact = exact.clone().svd(false, false).singular_values;
        let s_fd = fd.clone().svd(false, false).singular_values;
        let diff = (&exact - &fd).norm();
        for k in 0..s_exact.len() {
            assert!((s_exact[k] - s_fd[k]).abs() <= diff + 1e-12);
        }
    }

    #[test]
    fn detect_rank_examples() {
        assert_eq!(detect_rank(&[10.0, 9.0, 8.0, 1e-6, 1e-7]), 3);
        assert_eq!(detect_rank(&[1.0, 1e-12]), 1);
        // Exact-Hessian spectrum of a random m = 5 network with 20 samples.
        let net = generate_network(5, 5, 0.7, 23).unwrap();
        let samples = exact_hessian_samples(&net, 20, 23);
        let y = DMatrix::from_fn(25, 20, |i, j| samples[j][(i % 5, i / 5)]);
        let sigma: Vec<f64> = y.svd(false, false).singular_values.iter().copied().collect();
        assert_eq!(detect_rank(&sigma), 5);
    }

    #[test]
    fn reduce_dimension_identity_passthrough() {
        let net = generate_network(3, 3, 0.2, 4).unwrap();
        let net2 = net.clone();
        let oracle = QueryOracle::from_network(net, 0.0, 4);
        let space = VectorSubspace::from_basis(DMatrix::identity(3, 3)).unwrap();
        let mut reduced = reduce_dimension(oracle, &space);
        let mut rng = derive_rng(4, &[85]);
        for _ in 0..10 {
            let x = crate::sampling::uniform_ball(3, &mut rng);
            assert_relative_eq!(reduced.query(&x), net2.eval(&x), epsilon = 1e-14);
        }
    }

    #[test]
    fn reduced_directions_keep_unit_norm_when_space_is_exact() {
        let net = generate_network(3, 6, 0.4, 8).unwrap();
        let truth = truth_vector_space(&net);
        // alpha_i = B^T a_i has unit norm because P_A a_i = a_i.
        for i in 0..3 {
            let alpha = truth.basis().transpose() * net.weights().column(i);
            assert_relative_eq!(alpha.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn reduction_controls_near_orthonormality_drift() {
        // S(alpha) <= S(a) + ||P_A - P_A~||_F for any approximating subspace.
        let net = generate_network(4, 8, 0.6, 31).unwrap();
        let s_original = net.near_orthonormality().s_value;
        let samples = exact_gradient_samples(&net, 6, 31);
        let mut noisy = samples.clone();
        for (k, g) in noisy.iter_mut().enumerate() {
            let mut rng = derive_rng(31, &[86, k as u64]);
            *g += uniform_sphere(8, &mut rng) * 0.02;
        }
        let tilde = recover_vector_space(&noisy, 4).unwrap();
        let truth = truth_vector_space(&net);
        let drift = truth.projection_distance(&tilde);
        let alphas = tilde.basis().transpose() * net.weights();
        let s_reduced = crate::model::near_orthonormality(&alphas).s_value;
        assert!(s_reduced <= s_original + drift + 1e-9);
    }

    #[test]
    fn projection_distance_examples() {
        let e1 = VectorSubspace::from_basis(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let e2 = VectorSubspace::from_basis(DMatrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        assert_relative_eq!(e1.projection_distance(&e1), 0.0, epsilon = 1e-14);
        assert_relative_eq!(e1.projection_distance(&e2), 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn wedin_bound_dominates_measured_projector_distance() {
        let mut rng = derive_rng(3, &[87]);
        let b = DMatrix::from_fn(5, 5, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let pert = DMatrix::from_fn(5, 5, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let b_tilde = &b + pert * 1e-3;
        let k = 2;
        let bound = wedin_bound(&b, &b_tilde, k).unwrap();

        let svd_a = b.clone().svd(true, true);
        let svd_b = b_tilde.clone().svd(true, true);
        let va = svd_a.v_t.unwrap().transpose();
        let vb = svd_b.v_t.unwrap().transpose();
        let proj = |m: &DMatrix<f64>| {
            let sub = m.columns(0, k).clone_owned();
            &sub * sub.transpose()
        };
        let dist_v = (proj(&va) - proj(&vb)).norm();
        let ua = svd_a.u.unwrap();
        let ub = svd_b.u.unwrap();
        let dist_u = (proj(&ua) - proj(&ub)).norm();
        assert!(dist_v <= bound, "{dist_v} vs {bound}");
        assert!(dist_u <= bound, "{dist_u} vs {bound}");
    }

    #[test]
    fn wedin_bound_rejects_zero_separation() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert!(wedin_bound(&z, &z, 1).is_err());
    }

    #[test]
    fn conditioning_single_ridge_matches_quadrature() {
        // J[f] for f(x) = tanh(a·x) has rank one with
        // σ_1 = ∫ g'(a·x)² dμ over the sphere; the marginal of t = a·x has
        // density c (1-t²)^{(d-3)/2} on [-1, 1].
        let d = 5;
        let mut rng = derive_rng(41, &[88]);
        let a = uniform_sphere(d, &mut rng);
        let weights = {
            // Build an orthonormal completion so RidgeNetwork accepts m = 1.
            DMatrix::from_column_slice(d, 1, a.as_slice())
        };
        let net = RidgeNetwork::new(
            weights,
            DVector::from_element(1, 1.0),
            DVector::zeros(1),
            crate::model::Activation::tanh(),
            0,
        )
        .unwrap();

        // Simpson quadrature of g'(t)² against the sphere marginal.
        let n = 20_001;
        let pow = (d as f64 - 3.0) / 2.0;
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..n {
            let t = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
            let w = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let density = (1.0 - t * t).max(0.0).powf(pow);
            let gp = 1.0 - t.tanh().powi(2);
            num += w * gp * gp * density;
            den += w * density;
        }
        let truth = num / den;

        let mut source: &RidgeNetwork = &net;
        let est = estimate_conditioning(&mut source, ConditioningOrder::First, 1, 100_000, 41).unwrap();
        assert!(
            (est - truth).abs() <= 0.1 * truth,
            "estimate {est} vs quadrature {truth}"
        );
    }

    #[test]
    fn conditioning_of_constant_function_is_zero() {
        struct Constant;
        impl DerivativeSource for Constant {
            fn dim(&self) -> usize {
                3
            }
            fn gradient_at(&mut self, _: &DVector<f64>) -> Result<DVector<f64>> {
                Ok(DVector::zeros(3))
            }
            fn hessian_at(&mut self, _: &DVector<f64>) -> Result<DMatrix<f64>> {
                Ok(DMatrix::zeros(3, 3))
            }
        }
        let est = estimate_conditioning(&mut Constant, ConditioningOrder::First, 1, 200, 1).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn subspaces_serialize_column_major() {
        let net = generate_network(2, 3, 0.2, 6).unwrap();
        let vs = truth_vector_space(&net);
        let json: serde_json::Value = serde_json::to_value(&vs).unwrap();
        assert_eq!(json["ambient_dim"], 3);
        assert_eq!(json["rank"], 2);
        let flat = json["basis"].as_array().unwrap();
        assert_eq!(flat.len(), 6);
        // Column-major: the first three entries are the first basis column.
        assert_eq!(flat[0].as_f64().unwrap(), vs.basis()[(0, 0)]);
        assert_eq!(flat[1].as_f64().unwrap(), vs.basis()[(1, 0)]);

        let ms = truth_matrix_space(&net);
        let json: serde_json::Value = serde_json::to_value(&ms).unwrap();
        assert_eq!(json["side"], 3);
        assert_eq!(json["basis"].as_array().unwrap().len(), ms.rank());
        assert_eq!(json["basis"][0].as_array().unwrap().len(), 9);
    }

    #[test]
    fn conditioning_estimate_stabilizes_when_doubling_samples() {
        let net = generate_network(3, 3, 0.4, 51).unwrap();
        let mut s1: &RidgeNetwork = &net;
        let a = estimate_conditioning(&mut s1, ConditioningOrder::First, 3, 50_000, 51).unwrap();
        let mut s2: &RidgeNetwork = &net;
        let b = estimate_conditioning(&mut s2, ConditioningOrder::First, 3, 100_000, 52).unwrap();
        assert!((a - b).abs() / b.abs() <= 0.05, "{a} vs {b}");
    }
}
