//! Physical inputs of a teleportation run: the shared two-qubit state, the
//! sender's POVM, and the per-outcome operators derived from them.
//!
//! Particle 1 carries the unknown input, particles 2 and 3 form the shared
//! pair. Tracing particle 2 out of the product of the shared state and a
//! POVM element leaves the outcome operator `O` on particles 1 and 3, from
//! which everything else (outcome probabilities, conditional states, the
//! Pauli-resolved triple O⃗) follows.

use nalgebra::{DVector, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, density_from_bloch, eig_hermitian, partial_trace, pauli_basis, tensor_product,
    triple_from_affine_parts, triple_to_affine_parts, BlochVector, QOperator,
};

/// Validation tolerance for user-supplied states and POVMs.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Positive operator-valued measure on the two sender-side qubits.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<QOperator>,
    labels: Vec<String>,
}

impl Povm {
    /// Validates Hermiticity, positivity and completeness of the elements.
    pub fn new(elements: Vec<QOperator>, labels: Vec<String>) -> Result<Self> {
        if elements.len() != labels.len() {
            return Err(Error::InvalidConfig(format!(
                "{} POVM elements but {} labels",
                elements.len(),
                labels.len()
            )));
        }
        if elements.is_empty() || elements.len() > 16 {
            return Err(Error::InvalidConfig(format!(
                "POVM must hold between 1 and 16 elements, got {}",
                elements.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate outcome label `{l}`"
                )));
            }
        }
        let mut sum = QOperator::zeros(4)?;
        for e in &elements {
            if e.dim() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    got: e.dim(),
                });
            }
            let dev = e.hermiticity_deviation();
            if dev >= VALIDATION_TOL {
                return Err(Error::NotHermitian { deviation: dev });
            }
            let min = linalg::min_eigenvalue(e)?;
            if min < -VALIDATION_TOL {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: min,
                });
            }
            sum = sum.add(e)?;
        }
        let deviation = sum.max_abs_diff(&QOperator::identity(4)?);
        if deviation > VALIDATION_TOL {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Self { elements, labels })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> &[QOperator] {
        &self.elements
    }

    pub fn element(&self, label: &str) -> Result<&QOperator> {
        let idx = self
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))?;
        Ok(&self.elements[idx])
    }
}

/// Shared state plus sender POVM; the full description of the resources.
#[derive(Debug, Clone)]
pub struct Scenario {
    shared_state: QOperator,
    povm: Povm,
}

impl Scenario {
    /// Validates the shared state (Hermitian, unit trace, spectrum in [0, 1]).
    pub fn new(shared_state: QOperator, povm: Povm) -> Result<Self> {
        if shared_state.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: shared_state.dim(),
            });
        }
        let dev = shared_state.hermiticity_deviation();
        if dev >= VALIDATION_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = shared_state.trace();
        if (tr.re - 1.0).abs() > VALIDATION_TOL || tr.im.abs() > VALIDATION_TOL {
            return Err(Error::NotUnitTrace { trace: tr.re });
        }
        let (vals, _) = eig_hermitian(&shared_state)?;
        if vals[0] < -VALIDATION_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: vals[0],
            });
        }
        if vals[vals.len() - 1] > 1.0 + VALIDATION_TOL {
            return Err(Error::InvalidConfig(format!(
                "state eigenvalue {} exceeds 1",
                vals[vals.len() - 1]
            )));
        }
        Ok(Self { shared_state, povm })
    }

    /// Singlet resource combined with the one-parameter measurement family.
    pub fn family(theta: f64) -> Result<Self> {
        Self::new(singlet_state(), povm_family(theta)?)
    }

    pub fn shared_state(&self) -> &QOperator {
        &self.shared_state
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn labels(&self) -> &[String] {
        self.povm.labels()
    }

    /// O = Tr₂{τ₂₃ Π₁₂} on particles 1 and 3, computed by embedding both
    /// factors on the three-qubit space. Hermitian and positive by
    /// construction (the embedded factors overlap only on the traced qubit).
    pub fn o_operator(&self, outcome: &str) -> Result<QOperator> {
        let element = self.povm.element(outcome)?;
        let id2 = QOperator::identity(2)?;
        let tau_23 = tensor_product(&id2, &self.shared_state)?;
        let pi_12 = tensor_product(element, &id2)?;
        let product = tau_23.mul(&pi_12)?;
        let reduced = partial_trace(&product, 1, 3)?;
        // remove rounding dust; hermiticity is exact in principle
        Ok(reduced.hermitian_part())
    }

    /// Pauli-resolved outcome data O⃗ᵢ = Tr₁{σᵢ O₁₃} plus its (M, r)
    /// decomposition and the input-averaged outcome weight.
    pub fn o_vector(&self, outcome: &str) -> Result<OVector> {
        let o13 = self.o_operator(outcome)?;
        let id2 = QOperator::identity(2)?;
        let mut ops: Vec<QOperator> = Vec::with_capacity(3);
        for sigma in pauli_basis() {
            let embedded = tensor_product(&sigma, &id2)?;
            let traced = partial_trace(&embedded.mul(&o13)?, 0, 2)?;
            ops.push(traced.hermitian_part());
        }
        let ops: [QOperator; 3] = [ops[0].clone(), ops[1].clone(), ops[2].clone()];
        let weight = 0.5 * o13.trace().re;
        OVector::from_ops(ops, weight)
    }

    /// All four (or N) outcome triples in label order.
    pub fn o_vectors(&self) -> Result<Vec<OVector>> {
        self.labels().iter().map(|l| self.o_vector(l)).collect()
    }

    /// p = Tr₁₃{ρ̄₁ O₁₃} for a pure input with Bloch vector `input`.
    pub fn outcome_probability(&self, outcome: &str, input: &BlochVector) -> Result<f64> {
        let o13 = self.o_operator(outcome)?;
        let rho = density_from_bloch(input)?;
        let embedded = tensor_product(&rho, &QOperator::identity(2)?)?;
        Ok(embedded.mul(&o13)?.trace().re)
    }

    /// Conditional state of particle 3, Tr₁{ρ̄₁ O₁₃}/p.
    pub fn conditional_state(&self, outcome: &str, input: &BlochVector) -> Result<QOperator> {
        let o13 = self.o_operator(outcome)?;
        let rho = density_from_bloch(input)?;
        let embedded = tensor_product(&rho, &QOperator::identity(2)?)?;
        let unnormalized = partial_trace(&embedded.mul(&o13)?, 0, 2)?;
        let p = unnormalized.trace().re;
        if p <= 1e-14 {
            return Err(Error::ZeroProbabilityOutcome(outcome.to_string()));
        }
        Ok(unnormalized.scale(cr(1.0 / p)).hermitian_part())
    }

    /// Serializes to the plain-text import format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push_op = |op: &QOperator, out: &mut String| {
            for i in 0..4 {
                for j in 0..4 {
                    let z = op.entry(i, j);
                    if !(i == 0 && j == 0) || !out.is_empty() {
                        out.push(' ');
                    }
                    out.push_str(&format!("{:.16e},{:.16e}", z.re, z.im));
                }
            }
            out.push('\n');
        };
        push_op(&self.shared_state, &mut out);
        for e in self.povm.elements() {
            push_op(e, &mut out);
        }
        out
    }

    /// Parses the plain-text format: whitespace-separated `re,im` tokens,
    /// row-major, the 4×4 shared state first, then one or more 4×4 POVM
    /// elements. The token count must be an exact multiple of 16.
    pub fn from_text(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() < 32 || !tokens.len().is_multiple_of(16) {
            return Err(Error::ScenarioParse(format!(
                "expected 16·(1 + N) tokens with N ≥ 1, got {}",
                tokens.len()
            )));
        }
        let mut entries = Vec::with_capacity(tokens.len());
        for (k, tok) in tokens.iter().enumerate() {
            let (re, im) = tok.split_once(',').ok_or_else(|| {
                Error::ScenarioParse(format!("token {k} `{tok}` is not of the form re,im"))
            })?;
            let re: f64 = re
                .parse()
                .map_err(|_| Error::ScenarioParse(format!("token {k}: bad real part `{re}`")))?;
            let im: f64 = im.parse().map_err(|_| {
                Error::ScenarioParse(format!("token {k}: bad imaginary part `{im}`"))
            })?;
            entries.push(Complex64::new(re, im));
        }
        let n_elements = entries.len() / 16 - 1;
        let state = QOperator::from_row_slice(4, &entries[..16])?;
        let mut elements = Vec::with_capacity(n_elements);
        let mut labels = Vec::with_capacity(n_elements);
        for k in 0..n_elements {
            let start = 16 * (k + 1);
            elements.push(QOperator::from_row_slice(4, &entries[start..start + 16])?);
            labels.push(k.to_string());
        }
        Self::new(state, Povm::new(elements, labels)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Per-outcome Hermitian triple O⃗ with its Pauli decomposition
/// O⃗ᵢ = Σⱼ Mᵢⱼσⱼ + rᵢ·1 and the outcome weight Tr{O}/2.
#[derive(Debug, Clone)]
pub struct OVector {
    ops: [QOperator; 3],
    m_matrix: Matrix3<f64>,
    r_vector: Vector3<f64>,
    probability_weight: f64,
}

impl OVector {
    pub fn from_ops(ops: [QOperator; 3], probability_weight: f64) -> Result<Self> {
        let (m_matrix, r_vector) = triple_to_affine_parts(&ops)?;
        Ok(Self {
            ops,
            m_matrix,
            r_vector,
            probability_weight,
        })
    }

    /// Builds the triple from its (M, r) decomposition; handy for synthetic
    /// objectives in tests and studies.
    pub fn from_parts(
        m_matrix: Matrix3<f64>,
        r_vector: Vector3<f64>,
        probability_weight: f64,
    ) -> Self {
        Self {
            ops: triple_from_affine_parts(&m_matrix, &r_vector),
            m_matrix,
            r_vector,
            probability_weight,
        }
    }

    pub fn ops(&self) -> &[QOperator; 3] {
        &self.ops
    }

    pub fn m_matrix(&self) -> &Matrix3<f64> {
        &self.m_matrix
    }

    pub fn r_vector(&self) -> &Vector3<f64> {
        &self.r_vector
    }

    pub fn probability_weight(&self) -> f64 {
        self.probability_weight
    }

    /// Frobenius norm of the whole triple.
    pub fn norm(&self) -> f64 {
        self.ops
            .iter()
            .map(|o| o.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Two-qubit singlet, (1/4)(1 − σx⊗σx − σy⊗σy − σz⊗σz).
pub fn singlet_state() -> QOperator {
    let mut m = QOperator::identity(4).unwrap();
    for sigma in pauli_basis() {
        let ss = tensor_product(&sigma, &sigma).unwrap();
        m = m.sub(&ss).unwrap();
    }
    m.scale(cr(0.25))
}

// Computational basis kets on two qubits with |+⟩ = e₀ and |−⟩ = e₁.
fn ket2(a: usize, b: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(4);
    v[2 * a + b] = cr(1.0);
    v
}

/// One-parameter measurement family interpolating between a perfect Bell
/// measurement (θ = 0) and a projective measurement on the first qubit alone
/// (θ = π/2). The |φ| kets are intentionally unnormalized; their norms are
/// what makes the four elements sum to the identity.
pub fn povm_family(theta: f64) -> Result<Povm> {
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-15).contains(&theta) {
        return Err(Error::AngleOutOfRange {
            name: "theta",
            value: theta,
        });
    }
    let ct = cr(theta.cos());
    let s2 = theta.sin().powi(2);

    let (pp, pm, mp, mm) = (ket2(0, 0), ket2(0, 1), ket2(1, 0), ket2(1, 1));

    let phi_a = &pm * ct - &mp;
    let phi_b = &mp * ct + &pm;
    let phi_c = &mm * ct + &pp;
    let phi_d = &pp * ct - &mm;

    let element = |corner: &DVector<Complex64>, phi: &DVector<Complex64>| -> Result<QOperator> {
        let p = QOperator::outer(corner)?.scale(cr(0.5 * s2));
        let q = QOperator::outer(phi)?.scale(cr(0.5));
        p.add(&q)
    };

    let elements = vec![
        element(&mm, &phi_a)?,
        element(&pp, &phi_b)?,
        element(&pm, &phi_c)?,
        element(&mp, &phi_d)?,
    ];
    let labels = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    Povm::new(elements, labels)
}
