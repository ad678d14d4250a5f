//! Dense complex linear algebra on one-, two- and three-qubit spaces.
//!
//! Everything is built on `nalgebra::DMatrix<Complex64>` with the dimension
//! pinned to 2, 4 or 8. Tensor factors are ordered left to right, factor 0
//! being the most significant index bit, so `tensor_product(a, b)` puts `a`
//! on the leading factor.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix4, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity tolerance applied when operators are constructed from raw data.
pub const HERM_TOL_CONSTRUCTION: f64 = 1e-12;
/// Hermiticity tolerance applied to numerically computed operators.
pub const HERM_TOL_NUMERICAL: f64 = 1e-10;
/// Eigenvalue tolerance below which a state is rejected as non-positive.
pub const PSD_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense complex square operator on a 1-, 2- or 3-qubit space.
#[derive(Debug, Clone, PartialEq)]
pub struct QOperator {
    dim: usize,
    data: DMatrix<Complex64>,
}

impl QOperator {
    /// Wraps a square matrix, accepting only the dimensions 2, 4 and 8.
    pub fn from_matrix(data: DMatrix<Complex64>) -> Result<Self> {
        let dim = data.nrows();
        if data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.ncols(),
            });
        }
        if !matches!(dim, 2 | 4 | 8) {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self { dim, data })
    }

    /// Row-major construction from `(re, im)` pairs.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    /// Outer product |v⟩⟨v| of an unnormalized ket.
    pub fn outer(ket: &DVector<Complex64>) -> Result<Self> {
        let m = ket * ket.adjoint();
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.data.diagonal().sum()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: &self.data * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: &self.data - &other.data,
        })
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: &self.data * &other.data,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.data - &other.data)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from Hermiticity, max |A[i][j] − conj(A[j][i])|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() < tol
    }

    /// Hermitian part (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self {
            dim: self.dim,
            data: (&self.data + self.data.adjoint()) * cr(0.5),
        }
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    pub(crate) fn as_matrix2(&self) -> Matrix2<Complex64> {
        debug_assert_eq!(self.dim, 2);
        Matrix2::new(
            self.data[(0, 0)],
            self.data[(0, 1)],
            self.data[(1, 0)],
            self.data[(1, 1)],
        )
    }

    pub(crate) fn from_matrix2(m: &Matrix2<Complex64>) -> Self {
        Self {
            dim: 2,
            data: DMatrix::from_fn(2, 2, |i, j| m[(i, j)]),
        }
    }

    pub(crate) fn as_matrix4(&self) -> Matrix4<Complex64> {
        debug_assert_eq!(self.dim, 4);
        Matrix4::from_fn(|i, j| self.data[(i, j)])
    }
}

/// The Pauli triple (σx, σy, σz).
pub fn pauli_basis() -> [QOperator; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

pub fn sigma_x() -> QOperator {
    QOperator::from_row_slice(2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]).unwrap()
}

pub fn sigma_y() -> QOperator {
    QOperator::from_row_slice(2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]).unwrap()
}

pub fn sigma_z() -> QOperator {
    QOperator::from_row_slice(2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]).unwrap()
}

/// Kronecker product with `a` acting on the leading tensor factor.
pub fn tensor_product(a: &QOperator, b: &QOperator) -> Result<QOperator> {
    let dim = a.dim() * b.dim();
    if dim > 8 {
        return Err(Error::DimensionOverflow(dim));
    }
    QOperator::from_matrix(a.matrix().kronecker(b.matrix()))
}

fn check_layout(op: &QOperator, subsystem_index: usize, factors: usize) -> Result<()> {
    if 1usize << factors != op.dim() {
        return Err(Error::LayoutMismatch {
            factors,
            dim: op.dim(),
        });
    }
    if subsystem_index >= factors {
        return Err(Error::InvalidSubsystem {
            index: subsystem_index,
            factors,
        });
    }
    Ok(())
}

// Re-inserts the bit `m` of the traced factor into a reduced index. Factor 0
// is the most significant bit of the composite index.
fn insert_bit(rest: usize, position_from_left: usize, factors: usize, m: usize) -> usize {
    let shift = factors - 1 - position_from_left;
    let high = rest >> shift;
    let low = rest & ((1 << shift) - 1);
    (high << (shift + 1)) | (m << shift) | low
}

/// Trace over one qubit factor of a 2- or 3-qubit operator.
///
/// `factors` states the tensor layout explicitly (2 or 3 qubit factors) and
/// must match the operator dimension; `subsystem_index` counts factors from
/// the left starting at 0.
pub fn partial_trace(op: &QOperator, subsystem_index: usize, factors: usize) -> Result<QOperator> {
    check_layout(op, subsystem_index, factors)?;
    if factors < 2 {
        return Err(Error::InvalidSubsystem {
            index: subsystem_index,
            factors,
        });
    }
    let out_dim = op.dim() / 2;
    let mut out = DMatrix::<Complex64>::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut acc = Complex64::default();
            for m in 0..2 {
                let fi = insert_bit(i, subsystem_index, factors, m);
                let fj = insert_bit(j, subsystem_index, factors, m);
                acc += op.entry(fi, fj);
            }
            out[(i, j)] = acc;
        }
    }
    QOperator::from_matrix(out)
}

/// Transpose with respect to one qubit factor, leaving the others untouched.
pub fn partial_transpose(
    op: &QOperator,
    subsystem_index: usize,
    factors: usize,
) -> Result<QOperator> {
    check_layout(op, subsystem_index, factors)?;
    let dim = op.dim();
    let shift = factors - 1 - subsystem_index;
    let mask = 1usize << shift;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            // swap the subsystem bit between row and column index
            let ti = (i & !mask) | (j & mask);
            let tj = (j & !mask) | (i & mask);
            out[(i, j)] = op.entry(ti, tj);
        }
    }
    QOperator::from_matrix(out)
}

/// Eigendecomposition of a Hermitian operator.
///
/// Returns eigenvalues in ascending order with the matching orthonormal
/// eigenvectors as columns. Rejects inputs whose Hermiticity deviation
/// exceeds `HERM_TOL_NUMERICAL`.
pub fn eig_hermitian(op: &QOperator) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let dev = op.hermiticity_deviation();
    if dev >= HERM_TOL_NUMERICAL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    // symmetrize away rounding dust so the solver sees an exactly Hermitian input
    let h = op.hermitian_part();
    let se = nalgebra::linalg::SymmetricEigen::new(h.data);
    let n = op.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = se.eigenvectors.column(k).clone_owned();
        // fix the global phase: largest-magnitude component real and positive
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let z = v[lead];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            v *= phase;
        }
        vectors.set_column(col, &v);
    }
    Ok((values, vectors))
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(op: &QOperator) -> Result<f64> {
    Ok(eig_hermitian(op)?.0[0])
}

/// Real 3-vector in the Bloch ball; ρ = (1 + w·σ)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    components: Vector3<f64>,
}

impl BlochVector {
    /// Plain constructor; channel images of non-physical maps may leave the
    /// unit ball, so no norm check is applied here.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            components: Vector3::new(x, y, z),
        }
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        Self { components: v }
    }

    /// Constructor for state-carrying vectors; rejects |w| > 1 beyond tolerance.
    pub fn validated(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self::new(x, y, z);
        if v.norm() > 1.0 + 1e-12 {
            return Err(Error::BlochNormExceeded { norm: v.norm() });
        }
        Ok(v)
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn components(&self) -> Vector3<f64> {
        self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.norm()
    }

    /// Uniform sample from the surface of the Bloch sphere: z uniform in
    /// [−1, 1], azimuth uniform in [0, 2π).
    pub fn random_pure<R: rand::Rng>(rng: &mut R) -> Self {
        let z: f64 = rng.gen_range(-1.0..=1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - z * z).max(0.0).sqrt();
        Self::new(s * phi.cos(), s * phi.sin(), z)
    }
}

/// ρ = (1 + w·σ)/2 for |w| ≤ 1.
pub fn density_from_bloch(w: &BlochVector) -> Result<QOperator> {
    if w.norm() > 1.0 + 1e-12 {
        return Err(Error::BlochNormExceeded { norm: w.norm() });
    }
    let v = w.components();
    QOperator::from_row_slice(
        2,
        &[
            cr(0.5 * (1.0 + v[2])),
            c(0.5 * v[0], -0.5 * v[1]),
            c(0.5 * v[0], 0.5 * v[1]),
            cr(0.5 * (1.0 - v[2])),
        ],
    )
}

/// Inverse of `density_from_bloch`; validates Hermiticity, unit trace and
/// positivity of the input within 1e−10.
pub fn bloch_from_density(rho: &QOperator) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let dev = rho.hermiticity_deviation();
    if dev >= HERM_TOL_NUMERICAL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::NotUnitTrace { trace: tr.re });
    }
    let min = min_eigenvalue(rho)?;
    if min < -PSD_TOL {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    let (coeffs, _) = pauli_coefficients(rho)?;
    Ok(BlochVector::from_vector(coeffs * 2.0))
}

/// Pauli decomposition H = Σᵢ cᵢ σᵢ + c₀·1 of a Hermitian 2×2 operator,
/// returned as (c⃗, c₀) with cᵢ = Tr{Hσᵢ}/2 and c₀ = Tr{H}/2.
pub fn pauli_coefficients(op: &QOperator) -> Result<(Vector3<f64>, f64)> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: op.dim(),
        });
    }
    let dev = op.hermiticity_deviation();
    if dev >= HERM_TOL_NUMERICAL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let m = op.matrix();
    let c0 = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let cx = m[(0, 1)].re; // (m01 + m10)/2 with m10 = conj(m01)
    let cy = -m[(0, 1)].im;
    let cz = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    Ok((Vector3::new(cx, cy, cz), c0))
}

/// Rebuilds Σᵢ cᵢσᵢ + c₀·1 from Pauli coefficients.
pub fn operator_from_pauli(coeffs: &Vector3<f64>, trace_part: f64) -> QOperator {
    QOperator::from_row_slice(
        2,
        &[
            cr(trace_part + coeffs[2]),
            c(coeffs[0], -coeffs[1]),
            c(coeffs[0], coeffs[1]),
            cr(trace_part - coeffs[2]),
        ],
    )
    .unwrap()
}

/// Decomposes a Hermitian triple into (T, t) with ops[i] = Σⱼ Tᵢⱼσⱼ + tᵢ·1.
pub fn triple_to_affine_parts(ops: &[QOperator; 3]) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    let mut t_matrix = Matrix3::zeros();
    let mut t_vector = Vector3::zeros();
    for (i, op) in ops.iter().enumerate() {
        let (row, tr) = pauli_coefficients(op)?;
        t_matrix.set_row(i, &row.transpose());
        t_vector[i] = tr;
    }
    Ok((t_matrix, t_vector))
}

/// Rebuilds the Hermitian triple from (T, t).
pub fn triple_from_affine_parts(
    t_matrix: &Matrix3<f64>,
    t_vector: &Vector3<f64>,
) -> [QOperator; 3] {
    [0, 1, 2].map(|i| operator_from_pauli(&t_matrix.row(i).transpose(), t_vector[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> QOperator {
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        QOperator::from_matrix((&g + g.adjoint()) * cr(0.5)).unwrap()
    }

    #[test]
    fn pauli_matrices_have_standard_entries() {
        let [sx, sy, sz] = pauli_basis();
        assert_eq!(sx.entry(0, 1), cr(1.0));
        assert_eq!(sx.entry(1, 0), cr(1.0));
        assert_eq!(sx.entry(0, 0), cr(0.0));
        assert_eq!(sy.entry(0, 1), c(0.0, -1.0));
        assert_eq!(sz.entry(0, 0), cr(1.0));
        assert_eq!(sz.entry(1, 1), cr(-1.0));
    }

    #[test]
    fn pauli_matrices_square_to_identity() {
        let id = QOperator::identity(2).unwrap();
        for s in pauli_basis() {
            assert!(s.mul(&s).unwrap().max_abs_diff(&id) < 1e-15);
            assert!(s.trace().norm() < 1e-15);
            assert!(s.is_hermitian(1e-15));
        }
    }

    #[test]
    fn pauli_orthogonality() {
        let basis = pauli_basis();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let tr = a.mul(b).unwrap().trace();
                let expected = if i == j { 2.0 } else { 0.0 };
                assert!((tr.re - expected).abs() < 1e-15 && tr.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tensor_product_basics() {
        let id2 = QOperator::identity(2).unwrap();
        let t = tensor_product(&sigma_z(), &id2).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![
            cr(1.0),
            cr(1.0),
            cr(-1.0),
            cr(-1.0),
        ]));
        assert!((t.matrix() - expected).norm() < 1e-15);

        let id4 = tensor_product(&id2, &id2).unwrap();
        assert!(id4.max_abs_diff(&QOperator::identity(4).unwrap()) < 1e-15);
    }

    #[test]
    fn tensor_product_eigenvector_check() {
        // (|0⟩+|1⟩)⊗(|0⟩+|1⟩)/2 is a +1 eigenvector of σx⊗σx
        let xx = tensor_product(&sigma_x(), &sigma_x()).unwrap();
        let v = DVector::from_vec(vec![cr(0.5), cr(0.5), cr(0.5), cr(0.5)]);
        let w = xx.matrix() * &v;
        assert!((w - v).norm() < 1e-15);
    }

    #[test]
    fn tensor_product_overflow() {
        let id4 = QOperator::identity(4).unwrap();
        assert!(tensor_product(&id4, &id4).is_err());
    }

    #[test]
    fn trace_of_tensor_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_hermitian(&mut rng, 2);
            let b = random_hermitian(&mut rng, 4);
            let t = tensor_product(&a, &b).unwrap();
            let lhs = t.trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let rho = random_hermitian(&mut rng, 2);
            let omega = random_hermitian(&mut rng, 2);
            let joint = tensor_product(&rho, &omega).unwrap();
            let reduced = partial_trace(&joint, 1, 2).unwrap();
            let expected = rho.scale(omega.trace());
            assert!(reduced.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_composition_equals_full_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let op = random_hermitian(&mut rng, 4);
            let first = partial_trace(&op, 0, 2).unwrap();
            let full = first.trace();
            assert!((full - op.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_invalid_index() {
        let op = QOperator::identity(4).unwrap();
        assert!(partial_trace(&op, 2, 2).is_err());
        assert!(partial_trace(&op, 0, 3).is_err());
    }

    #[test]
    fn partial_transpose_swaps_one_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 2);
        let joint = tensor_product(&a, &b).unwrap();
        let pt = partial_transpose(&joint, 0, 2).unwrap();
        let at = QOperator::from_matrix(a.matrix().transpose()).unwrap();
        let expected = tensor_product(&at, &b).unwrap();
        assert!(pt.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn bloch_round_trip_poles() {
        let north = BlochVector::new(0.0, 0.0, 1.0);
        let rho = density_from_bloch(&north).unwrap();
        assert!((rho.entry(0, 0) - cr(1.0)).norm() < 1e-15);
        assert!(rho.entry(1, 1).norm() < 1e-15);

        let mixed = density_from_bloch(&BlochVector::zero()).unwrap();
        assert!(mixed.max_abs_diff(&QOperator::identity(2).unwrap().scale(cr(0.5))) < 1e-15);
    }

    #[test]
    fn bloch_round_trip_random_unit_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let w = BlochVector::random_pure(&mut rng);
            let back = bloch_from_density(&density_from_bloch(&w).unwrap()).unwrap();
            worst = worst.max((back.components() - w.components()).norm());
        }
        assert!(worst < 1e-12, "round-trip error {worst:e}");
    }

    #[test]
    fn bloch_rejects_nonphysical_input() {
        assert!(density_from_bloch(&BlochVector::new(0.0, 0.0, 1.5)).is_err());
        // trace-1 Hermitian matrix with a negative eigenvalue
        let bad = QOperator::from_row_slice(2, &[cr(1.2), cr(0.0), cr(0.0), cr(-0.2)]).unwrap();
        assert!(matches!(
            bloch_from_density(&bad),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn eig_of_sigma_z() {
        let (vals, _) = eig_hermitian(&sigma_z()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_of_identity4() {
        let (vals, _) = eig_hermitian(&QOperator::identity(4).unwrap()).unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for dim in [2usize, 4, 8] {
            for _ in 0..20 {
                let h = random_hermitian(&mut rng, dim);
                let (vals, vecs) = eig_hermitian(&h).unwrap();
                let lam = DMatrix::from_diagonal(&DVector::from_vec(
                    vals.iter().map(|&x| cr(x)).collect(),
                ));
                let rec = &vecs * lam * vecs.adjoint();
                assert!((rec - h.matrix()).norm() < 1e-10);
                for w in vals.windows(2) {
                    assert!(w[0] <= w[1]);
                }
            }
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let bad = QOperator::from_row_slice(2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]).unwrap();
        assert!(matches!(
            eig_hermitian(&bad),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn pauli_decomposition_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let h = random_hermitian(&mut rng, 2);
            let (coeffs, c0) = pauli_coefficients(&h).unwrap();
            let rebuilt = operator_from_pauli(&coeffs, c0);
            assert!(rebuilt.max_abs_diff(&h) < 1e-12);
        }
    }
}
