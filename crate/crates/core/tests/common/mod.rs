//! Randomized scenario generators shared by the integration tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use telecp::linalg::eig_hermitian;
use telecp::scenario::{Povm, Scenario};
use telecp::QOperator;

fn random_psd(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    &g * g.adjoint()
}

// inverse square root of a positive definite matrix via its spectrum
fn inv_sqrt(m: &QOperator) -> QOperator {
    let (vals, vecs) = eig_hermitian(m).unwrap();
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
        vals.iter()
            .map(|&x| Complex64::new(1.0 / x.sqrt(), 0.0))
            .collect(),
    ));
    QOperator::from_matrix(&vecs * lam * vecs.adjoint()).unwrap()
}

/// Random POVM with `outcomes` elements: normalized random positive
/// operators, complete by construction.
pub fn random_povm(rng: &mut ChaCha8Rng, outcomes: usize) -> Povm {
    let parts: Vec<DMatrix<Complex64>> = (0..outcomes).map(|_| random_psd(rng, 4)).collect();
    let mut total = DMatrix::<Complex64>::zeros(4, 4);
    for p in &parts {
        total += p;
    }
    let total = QOperator::from_matrix(total).unwrap().hermitian_part();
    let w = inv_sqrt(&total);
    let elements: Vec<QOperator> = parts
        .iter()
        .map(|p| {
            let p = QOperator::from_matrix(p.clone()).unwrap();
            w.mul(&p).unwrap().mul(&w).unwrap().hermitian_part()
        })
        .collect();
    let labels = (0..outcomes).map(|k| k.to_string()).collect();
    Povm::new(elements, labels).unwrap()
}

/// Random full-rank shared state.
pub fn random_shared_state(rng: &mut ChaCha8Rng) -> QOperator {
    let p = random_psd(rng, 4);
    let tr = p.diagonal().sum().re;
    QOperator::from_matrix(p / Complex64::new(tr, 0.0))
        .unwrap()
        .hermitian_part()
}

pub fn random_scenario(rng: &mut ChaCha8Rng, outcomes: usize) -> Scenario {
    Scenario::new(random_shared_state(rng), random_povm(rng, outcomes)).unwrap()
}
