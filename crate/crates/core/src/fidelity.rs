//! Average teleportation fidelity over uniformly distributed pure inputs.
//!
//! Three independent evaluation routes are provided. The closed form
//!
//! ⟨F⟩ = 1/2 + (1/12)·Σₐ Σᵢ Tr{Xᵢᵃ Oᵢᵃ}
//!
//! follows from averaging Tr{(1 + n⃗·X⃗)(O⁰ + n⃗·O⃗)}/4 over the sphere with
//! ⟨nᵢ⟩ = 0 and ⟨nᵢnⱼ⟩ = δᵢⱼ/3, together with Σₐ Tr{Oᵃ} = 2 which fixes the
//! affine part to 1/2. The same number can be computed from the (T, t) and
//! (M, r) decompositions via Tr{X⃗·O⃗} = 2(Tr{T·Mᵀ} + t⃗·r⃗), and estimated by
//! sampling the protocol state by state; the Monte-Carlo route never touches
//! the trace formula and serves as its end-to-end oracle.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{AffineChannel, KrausChannel, XRep};
use crate::error::{Error, Result};
use crate::scenario::{OVector, Scenario};

/// Weight of one per-outcome trace term in the average fidelity.
const PREFACTOR: f64 = 1.0 / 12.0;

/// Samples per deterministic Monte-Carlo shard; parallel and serial
/// execution accumulate identical shard sums.
const SHARD_SIZE: usize = 8192;

/// Evaluation route recorded in a [`FidelityReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    XRep,
    AffineTrace,
    MonteCarlo,
}

/// Average fidelity with its per-outcome decomposition.
///
/// For the deterministic methods, `value = 1/2 + Σ per_outcome`; for the
/// Monte-Carlo method `per_outcome` holds the per-outcome sample means
/// (summing to `value`) and `mc_std_error` the standard error of the total.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub value: f64,
    pub method: Method,
    pub per_outcome: Vec<f64>,
    pub mc_std_error: Option<f64>,
}

/// Per-outcome trace term Σᵢ Tr{Xᵢ Oᵢ}.
pub fn fidelity_contribution(o: &OVector, x: &XRep) -> f64 {
    o.ops()
        .iter()
        .zip(x.ops())
        .map(|(oi, xi)| xi.mul(oi).unwrap().trace().re)
        .sum()
}

/// The same trace term evaluated from the decompositions,
/// 2(Tr{T·Mᵀ} + t⃗·r⃗).
pub fn fidelity_contribution_affine(o: &OVector, ch: &AffineChannel) -> f64 {
    2.0 * ((ch.t_matrix * o.m_matrix().transpose()).trace() + ch.t_vector.dot(o.r_vector()))
}

fn check_outcome_count(scenario: &Scenario, maps: usize) -> Result<()> {
    let expected = scenario.povm().len();
    if maps != expected {
        return Err(Error::OutcomeCountMismatch {
            expected,
            got: maps,
        });
    }
    Ok(())
}

/// ⟨F⟩ = 1/2 + (1/12)·Σₐ Tr{X⃗ᵃ·O⃗ᵃ} with one X⃗ per outcome.
pub fn average_fidelity_x(scenario: &Scenario, maps: &[XRep]) -> Result<FidelityReport> {
    check_outcome_count(scenario, maps.len())?;
    let mut per_outcome = Vec::with_capacity(maps.len());
    for (label, x) in scenario.labels().iter().zip(maps) {
        let o = scenario.o_vector(label)?;
        per_outcome.push(PREFACTOR * fidelity_contribution(&o, x));
    }
    Ok(FidelityReport {
        value: 0.5 + per_outcome.iter().sum::<f64>(),
        method: Method::XRep,
        per_outcome,
        mc_std_error: None,
    })
}

/// Same functional evaluated on precomputed outcome triples.
pub fn average_fidelity_from_ovectors(
    ovectors: &[OVector],
    maps: &[XRep],
) -> Result<FidelityReport> {
    if ovectors.len() != maps.len() {
        return Err(Error::OutcomeCountMismatch {
            expected: ovectors.len(),
            got: maps.len(),
        });
    }
    let per_outcome: Vec<f64> = ovectors
        .iter()
        .zip(maps)
        .map(|(o, x)| PREFACTOR * fidelity_contribution(o, x))
        .collect();
    Ok(FidelityReport {
        value: 0.5 + per_outcome.iter().sum::<f64>(),
        method: Method::XRep,
        per_outcome,
        mc_std_error: None,
    })
}

/// Same functional evaluated through the (T, t)/(M, r) trace identity.
pub fn average_fidelity_affine(
    scenario: &Scenario,
    maps: &[AffineChannel],
) -> Result<FidelityReport> {
    check_outcome_count(scenario, maps.len())?;
    let mut per_outcome = Vec::with_capacity(maps.len());
    for (label, ch) in scenario.labels().iter().zip(maps) {
        let o = scenario.o_vector(label)?;
        per_outcome.push(PREFACTOR * fidelity_contribution_affine(&o, ch));
    }
    Ok(FidelityReport {
        value: 0.5 + per_outcome.iter().sum::<f64>(),
        method: Method::AffineTrace,
        per_outcome,
        mc_std_error: None,
    })
}

// fixed-size working set for the sampling loop; everything lives on the stack
struct McContext {
    o_ops: Vec<Matrix4<Complex64>>,
    kraus: Vec<Vec<Matrix2<Complex64>>>,
}

impl McContext {
    fn new(scenario: &Scenario, maps: &[KrausChannel]) -> Result<Self> {
        let mut o_ops = Vec::with_capacity(maps.len());
        for label in scenario.labels() {
            o_ops.push(scenario.o_operator(label)?.as_matrix4());
        }
        let kraus = maps
            .iter()
            .map(|ch| ch.operators().iter().map(|a| a.as_matrix2()).collect())
            .collect();
        Ok(Self { o_ops, kraus })
    }

    // Σₐ Tr{ρ̄ Φᵃ(Tr₁{ρ̄₁ Oᵃ₁₃})}; the outcome probability cancels against
    // the conditional-state normalization, so zero-probability outcomes
    // contribute zero instead of dividing by zero.
    fn sample_fidelity(&self, rho: &Matrix2<Complex64>, per_outcome: &mut [f64]) -> f64 {
        let mut rho_emb = Matrix4::<Complex64>::zeros();
        for i1 in 0..2 {
            for j1 in 0..2 {
                for k in 0..2 {
                    rho_emb[(2 * i1 + k, 2 * j1 + k)] = rho[(i1, j1)];
                }
            }
        }
        let mut total = 0.0;
        for (a, o) in self.o_ops.iter().enumerate() {
            let prod = rho_emb * o;
            let mut cond = Matrix2::<Complex64>::zeros();
            for i3 in 0..2 {
                for j3 in 0..2 {
                    cond[(i3, j3)] = prod[(i3, j3)] + prod[(2 + i3, 2 + j3)];
                }
            }
            let mut out = Matrix2::<Complex64>::zeros();
            for k in &self.kraus[a] {
                out += k * cond * k.adjoint();
            }
            let f = (rho * out).trace().re;
            per_outcome[a] += f;
            total += f;
        }
        total
    }
}

/// Monte-Carlo estimate of the average fidelity.
///
/// Inputs are sampled uniformly from the pure-state sphere (z uniform in
/// [−1, 1], azimuth uniform in [0, 2π)); each sample evaluates the full
/// protocol Σₐ pₐ·Tr{ρ̄·Φᵃ(ρᵃ)}. Samples are drawn in fixed-size shards,
/// shard s seeded by (seed, stream s), so the result is a pure function of
/// (samples, seed) regardless of how shards are scheduled.
pub fn mc_average_fidelity(
    scenario: &Scenario,
    maps: &[KrausChannel],
    samples: usize,
    seed: u64,
) -> Result<FidelityReport> {
    check_outcome_count(scenario, maps.len())?;
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let ctx = McContext::new(scenario, maps)?;
    let n_outcomes = maps.len();

    let shards = samples.div_ceil(SHARD_SIZE);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut per_outcome = vec![0.0; n_outcomes];
    let mut scratch = vec![0.0; n_outcomes];

    for shard in 0..shards {
        let count = SHARD_SIZE.min(samples - shard * SHARD_SIZE);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard as u64);
        let mut shard_sum = 0.0;
        let mut shard_sum_sq = 0.0;
        scratch.iter_mut().for_each(|x| *x = 0.0);
        for _ in 0..count {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).max(0.0).sqrt();
            let (nx, ny, nz) = (s * phi.cos(), s * phi.sin(), z);
            let rho = Matrix2::new(
                Complex64::new(0.5 * (1.0 + nz), 0.0),
                Complex64::new(0.5 * nx, -0.5 * ny),
                Complex64::new(0.5 * nx, 0.5 * ny),
                Complex64::new(0.5 * (1.0 - nz), 0.0),
            );
            let f = ctx.sample_fidelity(&rho, &mut scratch);
            shard_sum += f;
            shard_sum_sq += f * f;
        }
        sum += shard_sum;
        sum_sq += shard_sum_sq;
        for (acc, s) in per_outcome.iter_mut().zip(&scratch) {
            *acc += s;
        }
    }

    let n = samples as f64;
    let mean = sum / n;
    let std_error = if samples > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        Some((var / n).sqrt())
    } else {
        None
    };
    Ok(FidelityReport {
        value: mean,
        method: Method::MonteCarlo,
        per_outcome: per_outcome.iter().map(|s| s / n).collect(),
        mc_std_error: std_error,
    })
}
