//! Qubit channel representations and conversions.
//!
//! A channel shows up here in four equivalent guises: a Kraus set {Aₖ},
//! the Heisenberg-picture triple X⃗ with Xᵢ = Σₖ Aₖ†σᵢAₖ, the Bloch-affine
//! pair (T, t) acting as w ↦ Tw + t, and the normalized Choi matrix used to
//! decide complete positivity. The extremal maps bounding the convex set of
//! CPTP qubit channels carry the diagonal trigonometric form
//! T = diag(cos u, cos v, cos u·cos v), t = (0, 0, sin u·sin v).

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, eig_hermitian, pauli_basis, tensor_product, triple_from_affine_parts,
    triple_to_affine_parts, BlochVector, QOperator,
};

/// Choi eigenvalues below this magnitude are dropped when extracting Kraus
/// operators.
pub const KRAUS_TRUNCATION_TOL: f64 = 1e-10;
/// A map counts as completely positive when its Choi matrix has no
/// eigenvalue below −CP_TOL.
pub const CP_TOL: f64 = 1e-9;
/// Tolerance on the trace-preservation marginal of a Choi matrix.
pub const TP_TOL: f64 = 1e-8;

/// Trace-preserving Kraus decomposition, Φ(ρ) = Σₖ AₖρAₖ†.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<QOperator>,
}

impl KrausChannel {
    pub fn new(operators: Vec<QOperator>) -> Result<Self> {
        if operators.is_empty() || operators.len() > 4 {
            return Err(Error::KrausCount(operators.len()));
        }
        let mut sum = QOperator::zeros(2)?;
        for a in &operators {
            if a.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: a.dim(),
                });
            }
            sum = sum.add(&a.adjoint().mul(a)?)?;
        }
        let residual = sum.max_abs_diff(&QOperator::identity(2)?);
        if residual > 1e-10 {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { operators })
    }

    pub fn identity() -> Self {
        Self::new(vec![QOperator::identity(2).unwrap()]).unwrap()
    }

    pub fn from_unitary(u: QOperator) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn operators(&self) -> &[QOperator] {
        &self.operators
    }

    /// Σₖ AₖρAₖ†.
    pub fn apply(&self, rho: &QOperator) -> Result<QOperator> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: rho.dim(),
            });
        }
        let mut out = QOperator::zeros(2)?;
        for a in &self.operators {
            out = out.add(&a.mul(rho)?.mul(&a.adjoint())?)?;
        }
        Ok(out)
    }

    /// ‖Σₖ Aₖ†Aₖ − 1‖ as a max-entry deviation.
    pub fn tp_residual(&self) -> f64 {
        let mut sum = QOperator::zeros(2).unwrap();
        for a in &self.operators {
            sum = sum.add(&a.adjoint().mul(a).unwrap()).unwrap();
        }
        sum.max_abs_diff(&QOperator::identity(2).unwrap())
    }
}

/// Σₖ AₖρAₖ† as a free function mirroring the Kraus action.
pub fn apply_kraus(ch: &KrausChannel, rho: &QOperator) -> Result<QOperator> {
    ch.apply(rho)
}

/// Heisenberg-picture triple Xᵢ = Φ†(σᵢ) with its (T, t) decomposition
/// Xᵢ = Σⱼ Tᵢⱼσⱼ + tᵢ·1. The same (T, t) acts on Bloch vectors in the
/// Schrödinger picture.
#[derive(Debug, Clone)]
pub struct XRep {
    ops: [QOperator; 3],
    t_matrix: Matrix3<f64>,
    t_vector: Vector3<f64>,
}

impl XRep {
    pub fn from_ops(ops: [QOperator; 3]) -> Result<Self> {
        for op in &ops {
            let dev = op.hermiticity_deviation();
            if dev >= 1e-12 {
                return Err(Error::NotHermitian { deviation: dev });
            }
        }
        let (t_matrix, t_vector) = triple_to_affine_parts(&ops)?;
        Ok(Self {
            ops,
            t_matrix,
            t_vector,
        })
    }

    pub fn from_affine(ch: &AffineChannel) -> Self {
        Self {
            ops: triple_from_affine_parts(&ch.t_matrix, &ch.t_vector),
            t_matrix: ch.t_matrix,
            t_vector: ch.t_vector,
        }
    }

    /// X⃗ = σ⃗: the identity channel.
    pub fn identity() -> Self {
        let [sx, sy, sz] = pauli_basis();
        Self::from_ops([sx, sy, sz]).unwrap()
    }

    /// X⃗ = 0: every input is discarded into the maximally mixed state.
    pub fn zero() -> Self {
        Self {
            ops: [
                QOperator::zeros(2).unwrap(),
                QOperator::zeros(2).unwrap(),
                QOperator::zeros(2).unwrap(),
            ],
            t_matrix: Matrix3::zeros(),
            t_vector: Vector3::zeros(),
        }
    }

    pub fn ops(&self) -> &[QOperator; 3] {
        &self.ops
    }

    pub fn t_matrix(&self) -> &Matrix3<f64> {
        &self.t_matrix
    }

    pub fn t_vector(&self) -> &Vector3<f64> {
        &self.t_vector
    }

    pub fn to_affine(&self) -> AffineChannel {
        AffineChannel::new(self.t_matrix, self.t_vector)
    }
}

/// Xᵢ = Σₖ Aₖ†σᵢAₖ.
pub fn x_from_kraus(ch: &KrausChannel) -> XRep {
    let ops = pauli_basis().map(|sigma| {
        let mut acc = QOperator::zeros(2).unwrap();
        for a in ch.operators() {
            acc = acc
                .add(&a.adjoint().mul(&sigma).unwrap().mul(a).unwrap())
                .unwrap();
        }
        acc.hermitian_part()
    });
    XRep::from_ops(ops).expect("dual triple of a Kraus channel is Hermitian")
}

/// Bloch-sphere action of a qubit map: w ↦ Tw + t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineChannel {
    pub t_matrix: Matrix3<f64>,
    pub t_vector: Vector3<f64>,
}

impl AffineChannel {
    pub fn new(t_matrix: Matrix3<f64>, t_vector: Vector3<f64>) -> Self {
        Self { t_matrix, t_vector }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    /// T = 0, t = 0: total depolarization.
    pub fn depolarizing() -> Self {
        Self::new(Matrix3::zeros(), Vector3::zeros())
    }

    pub fn apply(&self, w: &BlochVector) -> BlochVector {
        BlochVector::from_vector(self.t_matrix * w.components() + self.t_vector)
    }
}

/// w ↦ Tw + t as a free function.
pub fn affine_apply(ch: &AffineChannel, w: &BlochVector) -> BlochVector {
    ch.apply(w)
}

/// Angles of the diagonal-frame extremal CPTP maps, u ∈ [0, 2π), v ∈ [0, π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalParams {
    pub u: f64,
    pub v: f64,
}

impl ExtremalParams {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::TAU).contains(&u) {
            return Err(Error::AngleOutOfRange {
                name: "u",
                value: u,
            });
        }
        if !(0.0..std::f64::consts::PI).contains(&v) {
            return Err(Error::AngleOutOfRange {
                name: "v",
                value: v,
            });
        }
        Ok(Self { u, v })
    }
}

/// T = diag(cos u, cos v, cos u·cos v), t = (0, 0, sin u·sin v).
pub fn extremal_affine(p: &ExtremalParams) -> AffineChannel {
    let (cu, cv) = (p.u.cos(), p.v.cos());
    AffineChannel::new(
        Matrix3::from_diagonal(&Vector3::new(cu, cv, cu * cv)),
        Vector3::new(0.0, 0.0, p.u.sin() * p.v.sin()),
    )
}

/// Normalized Choi matrix of the map, (1/4)[1⊗1 + t·σ⊗1 + Σᵢⱼ Tᵢⱼ σᵢ⊗σⱼᵀ].
///
/// The first tensor factor is the channel output, the second the reference;
/// the map is CP iff this matrix is positive semidefinite, and trace
/// preserving iff the output marginal equals 1/2.
pub fn choi_from_affine(ch: &AffineChannel) -> QOperator {
    let id2 = QOperator::identity(2).unwrap();
    let sigmas = pauli_basis();
    let mut choi = QOperator::identity(4).unwrap();
    for i in 0..3 {
        let left = tensor_product(&sigmas[i], &id2).unwrap();
        choi = choi.add(&left.scale(cr(ch.t_vector[i]))).unwrap();
        for j in 0..3 {
            let sig_t = QOperator::from_matrix(sigmas[j].matrix().transpose()).unwrap();
            let term = tensor_product(&sigmas[i], &sig_t).unwrap();
            choi = choi.add(&term.scale(cr(ch.t_matrix[(i, j)]))).unwrap();
        }
    }
    choi.scale(cr(0.25))
}

/// Completeness/positivity diagnostic attached to every optimized channel.
#[derive(Debug, Clone, Copy)]
pub struct CpDiagnostic {
    pub min_choi_eigenvalue: f64,
    pub tp_residual: f64,
}

/// CP check with its diagnostic: true iff the Choi spectrum stays above
/// −1e−9. The TP residual reported alongside is the deviation of the Choi
/// output marginal from 1/2.
pub fn is_cptp(ch: &AffineChannel) -> (bool, CpDiagnostic) {
    let choi = choi_from_affine(ch);
    let (vals, _) = eig_hermitian(&choi).expect("Choi matrix is Hermitian by construction");
    let marginal = linalg::partial_trace(&choi, 0, 2).unwrap();
    let half = QOperator::identity(2).unwrap().scale(cr(0.5));
    let diag = CpDiagnostic {
        min_choi_eigenvalue: vals[0],
        tp_residual: marginal.max_abs_diff(&half),
    };
    (diag.min_choi_eigenvalue >= -CP_TOL, diag)
}

/// Kraus operators from the scaled eigenvectors of a Choi matrix.
///
/// Eigenvalues below `KRAUS_TRUNCATION_TOL` are dropped; eigenvalues below
/// −CP_TOL or a trace-preservation marginal off by more than `TP_TOL`
/// reject the input.
pub fn kraus_from_choi(choi: &QOperator) -> Result<KrausChannel> {
    kraus_from_choi_with_tol(choi, KRAUS_TRUNCATION_TOL)
}

pub fn kraus_from_choi_with_tol(choi: &QOperator, truncation: f64) -> Result<KrausChannel> {
    if choi.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: choi.dim(),
        });
    }
    let (vals, vecs) = eig_hermitian(choi)?;
    if vals[0] < -CP_TOL {
        return Err(Error::NotCompletelyPositive {
            min_choi_eigenvalue: vals[0],
        });
    }
    let marginal = linalg::partial_trace(choi, 0, 2)?;
    let half = QOperator::identity(2)?.scale(cr(0.5));
    let tp = marginal.max_abs_diff(&half);
    if tp > TP_TOL {
        return Err(Error::NotTracePreserving { residual: tp });
    }
    let mut operators = Vec::new();
    // descending eigenvalue order: dominant Kraus operator first
    for k in (0..4).rev() {
        if vals[k] < truncation {
            continue;
        }
        let scale = (2.0 * vals[k]).sqrt();
        let col = vecs.column(k);
        // composite index 2·j + i holds A[j, i]
        let a = QOperator::from_row_slice(
            2,
            &[
                col[0] * cr(scale),
                col[1] * cr(scale),
                col[2] * cr(scale),
                col[3] * cr(scale),
            ],
        )?;
        operators.push(a);
    }
    if operators.is_empty() {
        return Err(Error::NotCompletelyPositive {
            min_choi_eigenvalue: vals[0],
        });
    }
    // bypass the strict TP check in KrausChannel::new: truncation may leave
    // a residual up to ~4·truncation which is still acceptable here
    Ok(KrausChannel { operators })
}

/// Plain-text record of (T, t), row-major, 17 significant digits.
pub fn export_affine(ch: &AffineChannel) -> String {
    let mut fields = Vec::with_capacity(12);
    for i in 0..3 {
        for j in 0..3 {
            fields.push(format!("{:.16e}", ch.t_matrix[(i, j)]));
        }
    }
    for i in 0..3 {
        fields.push(format!("{:.16e}", ch.t_vector[i]));
    }
    fields.join(" ")
}
