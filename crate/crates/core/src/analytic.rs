//! Closed-form reference values and structural checks for the built-in
//! measurement family, plus protocol-level identities that hold for any
//! scenario.

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{choi_from_affine, AffineChannel, KrausChannel, XRep};
use crate::error::{Error, Result};
use crate::fidelity::average_fidelity_from_ovectors;
use crate::linalg::{
    density_from_bloch, eig_hermitian, min_eigenvalue, partial_trace, partial_transpose,
    tensor_product, BlochVector, QOperator,
};
use crate::scenario::{OVector, Scenario};

fn check_theta(theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-15).contains(&theta) {
        return Err(Error::AngleOutOfRange {
            name: "theta",
            value: theta,
        });
    }
    Ok(theta.cos())
}

/// Optimal average fidelity of the family as a function of θ:
/// (cos⁴θ − 4cos²θ + 2)/(3 − 6cos²θ) below cosθ = 1/2 and
/// (cos²θ + 2cosθ + 3)/6 above. Both branches meet at 17/24.
pub fn closed_form_optimum(theta: f64) -> Result<f64> {
    let c = check_theta(theta)?;
    let c2 = c * c;
    Ok(if c < 0.5 {
        (c2 * c2 - 4.0 * c2 + 2.0) / (3.0 - 6.0 * c2)
    } else {
        (c2 + 2.0 * c + 3.0) / 6.0
    })
}

/// Best fidelity achievable with unitary corrections only,
/// (cos²θ + 2cosθ + 3)/6 for every θ.
pub fn unitary_optimum(theta: f64) -> Result<f64> {
    let c = check_theta(theta)?;
    Ok((c * c + 2.0 * c + 3.0) / 6.0)
}

/// Fidelity of the repeat protocol in the printed convention,
/// (cos²u·sin²v + 2)/3, for extremal angles (u, v).
pub fn repeat_fidelity(u: f64, v: f64) -> Result<f64> {
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
    Ok((u.cos().powi(2) * v.sin().powi(2) + 2.0) / 3.0)
}

/// Repeat protocol from first principles: each outcome reuses its own O⃗,
/// rescaled along its ray to the boundary of the CP set, as the correction
/// map. The boundary scale is found by bisecting the minimal Choi eigenvalue.
pub fn repeat_first_principles(scenario: &Scenario) -> Result<f64> {
    let ovectors = scenario.o_vectors()?;
    let maps: Vec<XRep> = ovectors
        .iter()
        .map(|o| {
            if o.norm() < 1e-14 {
                return XRep::zero();
            }
            let alpha = cp_boundary_scale(o.m_matrix(), o.r_vector());
            XRep::from_affine(&AffineChannel::new(
                o.m_matrix() * alpha,
                o.r_vector() * alpha,
            ))
        })
        .collect();
    Ok(average_fidelity_from_ovectors(&ovectors, &maps)?.value)
}

// largest α such that (αM, αr) is completely positive; the minimal Choi
// eigenvalue is concave along the ray, so it crosses zero exactly once
fn cp_boundary_scale(m: &Matrix3<f64>, r: &Vector3<f64>) -> f64 {
    let min_eig = |alpha: f64| -> f64 {
        let choi = choi_from_affine(&AffineChannel::new(m * alpha, r * alpha));
        min_eigenvalue(&choi).expect("Choi matrix is Hermitian")
    };
    let mut hi = 1.0;
    while min_eig(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e9 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if min_eig(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Point of the appendix fidelity chain, all angles restricted to [0, π/2].
#[derive(Debug, Clone, Copy)]
pub struct AppendixPoint {
    pub u_prime: f64,
    pub v: f64,
    pub theta: f64,
}

impl AppendixPoint {
    pub fn new(u_prime: f64, v: f64, theta: f64) -> Result<Self> {
        for (name, value) in [("u_prime", u_prime), ("v", v), ("theta", theta)] {
            if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-15).contains(&value) {
                return Err(Error::AngleOutOfRange {
                    name: match name {
                        "u_prime" => "u_prime",
                        "v" => "v",
                        _ => "theta",
                    },
                    value,
                });
            }
        }
        Ok(Self { u_prime, v, theta })
    }
}

/// Per-outcome trace term of the extremal map (u = 2π − u′, v) against the
/// family objective at angle θ, with every term made positive:
/// F′ = cos u′cosθ + cos v cosθ + cos u′cos v cos²θ + sin u′sin v sin²θ.
pub fn appendix_f_prime(p: &AppendixPoint) -> f64 {
    let (cu, su) = (p.u_prime.cos(), p.u_prime.sin());
    let (cv, sv) = (p.v.cos(), p.v.sin());
    let (c2, s2) = (p.theta.cos().powi(2), p.theta.sin().powi(2));
    let c = p.theta.cos();
    cu * c + cv * c + cu * cv * c2 + su * sv * s2
}

/// Arithmetic-mean upper bound on F′.
pub fn appendix_f_double(p: &AppendixPoint) -> f64 {
    let mc = 0.5 * (p.u_prime.cos() + p.v.cos());
    let ms = 0.5 * (p.u_prime.sin() + p.v.sin());
    let (c2, s2) = (p.theta.cos().powi(2), p.theta.sin().powi(2));
    2.0 * mc * p.theta.cos() + mc * mc * c2 + ms * ms * s2
}

/// Midpoint-angle upper bound on F″; attained by the degenerate map with
/// ū = 2π − v̄ = (u′ + v)/2.
pub fn appendix_f_triple(p: &AppendixPoint) -> f64 {
    let mid = 0.5 * (p.u_prime + p.v);
    let (cm, sm) = (mid.cos(), mid.sin());
    let (c2, s2) = (p.theta.cos().powi(2), p.theta.sin().powi(2));
    2.0 * cm * p.theta.cos() + cm * cm * c2 + sm * sm * s2
}

// per-outcome degenerate-family map at parameter v: the diagonal extremal
// map conjugated into the outcome's sign frame, with the shift aligned to r
fn degenerate_map_for_outcome(o: &OVector, v: f64) -> XRep {
    let m = o.m_matrix();
    let signs = if m.norm() < 1e-12 {
        Matrix3::identity()
    } else {
        Matrix3::from_diagonal(&Vector3::new(
            m[(0, 0)].signum(),
            m[(1, 1)].signum(),
            m[(2, 2)].signum(),
        ))
    };
    let r3 = o.r_vector()[2];
    let t_sign = if r3.abs() < 1e-15 { -1.0 } else { r3.signum() };
    let (cv, sv) = (v.cos(), v.sin());
    let t_matrix = signs * Matrix3::from_diagonal(&Vector3::new(cv, cv, cv * cv));
    let t_vector = Vector3::new(0.0, 0.0, t_sign * sv * sv);
    XRep::from_affine(&AffineChannel::new(t_matrix, t_vector))
}

fn degenerate_family_fidelity(ovectors: &[OVector], v: f64) -> f64 {
    let maps: Vec<XRep> = ovectors
        .iter()
        .map(|o| degenerate_map_for_outcome(o, v))
        .collect();
    average_fidelity_from_ovectors(ovectors, &maps)
        .expect("matching outcome counts")
        .value
}

/// Maximizes the four-outcome fidelity over the one-parameter family of
/// degenerate extremal maps (u = 2π − v), returning the best angle and the
/// fidelity it achieves.
///
/// A coarse scan brackets the maximum and checks unimodality; golden-section
/// search refines the bracket. If the scan sees more than one local maximum
/// the whole range is swept at 1e−4 resolution before refining.
pub fn degenerate_family_optimum(theta: f64) -> Result<(f64, f64)> {
    check_theta(theta)?;
    let scenario = Scenario::family(theta)?;
    let ovectors = scenario.o_vectors()?;
    let f = |v: f64| degenerate_family_fidelity(&ovectors, v);

    let hi = std::f64::consts::FRAC_PI_2;
    let coarse: Vec<f64> = (0..=200).map(|k| f(hi * k as f64 / 200.0)).collect();
    let mut best_k = 0;
    for (k, val) in coarse.iter().enumerate() {
        if *val > coarse[best_k] {
            best_k = k;
        }
    }
    let local_maxima = (0..=200)
        .filter(|&k| {
            let left = if k == 0 {
                f64::NEG_INFINITY
            } else {
                coarse[k - 1]
            };
            let right = if k == 200 {
                f64::NEG_INFINITY
            } else {
                coarse[k + 1]
            };
            coarse[k] > left + 1e-13 && coarse[k] > right + 1e-13
        })
        .count();

    let (mut lo_v, mut hi_v);
    if local_maxima <= 1 {
        lo_v = hi * best_k.saturating_sub(1) as f64 / 200.0;
        hi_v = hi * (best_k + 1).min(200) as f64 / 200.0;
    } else {
        // non-unimodal scan result: fall back to a fine sweep
        let steps = (hi / 1e-4) as usize;
        let mut best_fine = 0;
        let mut best_val = f64::NEG_INFINITY;
        for k in 0..=steps {
            let val = f(hi * k as f64 / steps as f64);
            if val > best_val {
                best_val = val;
                best_fine = k;
            }
        }
        lo_v = hi * best_fine.saturating_sub(1) as f64 / steps as f64;
        hi_v = hi * (best_fine + 1).min(steps) as f64 / steps as f64;
    }

    // golden-section refinement
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi_v - phi * (hi_v - lo_v);
    let mut x2 = lo_v + phi * (hi_v - lo_v);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi_v - lo_v > 1e-12 {
        if f1 < f2 {
            lo_v = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo_v + phi * (hi_v - lo_v);
            f2 = f(x2);
        } else {
            hi_v = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi_v - phi * (hi_v - lo_v);
            f1 = f(x1);
        }
    }
    let v_star = 0.5 * (lo_v + hi_v);
    Ok((v_star, f(v_star)))
}

/// Largest trace distance between Ω(ρ̄) = Σₐ pₐΦᵃ(Ψᵃ(ρ̄)) and ρ̄ over random
/// pure probes; a protocol is perfect when this vanishes.
pub fn composition_check(
    scenario: &Scenario,
    maps: &[KrausChannel],
    probe_count: usize,
    seed: u64,
) -> Result<f64> {
    if maps.len() != scenario.povm().len() {
        return Err(Error::OutcomeCountMismatch {
            expected: scenario.povm().len(),
            got: maps.len(),
        });
    }
    if probe_count == 0 {
        return Err(Error::InvalidConfig(
            "probe_count must be at least 1".into(),
        ));
    }
    let id2 = QOperator::identity(2)?;
    let o_ops: Vec<QOperator> = scenario
        .labels()
        .iter()
        .map(|l| scenario.o_operator(l))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probe_count {
        let w = BlochVector::random_pure(&mut rng);
        let rho = density_from_bloch(&w)?;
        let embedded = tensor_product(&rho, &id2)?;
        let mut omega = QOperator::zeros(2)?;
        for (o, ch) in o_ops.iter().zip(maps) {
            // pₐ·Ψᵃ(ρ̄) is the unnormalized conditional state
            let cond = partial_trace(&embedded.mul(o)?, 0, 2)?;
            omega = omega.add(&ch.apply(&cond)?)?;
        }
        let delta = omega.sub(&rho)?.hermitian_part();
        let (vals, _) = eig_hermitian(&delta)?;
        let distance = 0.5 * vals.iter().map(|x| x.abs()).sum::<f64>();
        worst = worst.max(distance);
    }
    Ok(worst)
}

/// χ = O^T̃ (partial transpose on particle 1) together with its rank at
/// eigenvalue threshold 1e−10. Rank ≤ 2 certifies that the sender-side map
/// generated by this outcome is extremal.
pub fn chi_operator(scenario: &Scenario, outcome: &str) -> Result<(QOperator, usize)> {
    let o = scenario.o_operator(outcome)?;
    let chi = partial_transpose(&o, 0, 2)?;
    let (vals, _) = eig_hermitian(&chi)?;
    let rank = vals.iter().filter(|x| x.abs() > 1e-10).count();
    Ok((chi, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{is_cptp, kraus_from_choi};
    use crate::fidelity::average_fidelity_x;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    const SQRT2M1: f64 = std::f64::consts::SQRT_2 - 1.0;

    #[test]
    fn closed_form_anchor_values() {
        assert!((closed_form_optimum(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((closed_form_optimum(FRAC_PI_2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let expected = (3.0 + 8.0 * std::f64::consts::SQRT_2) / 21.0;
        assert!((closed_form_optimum(SQRT2M1.acos()).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn closed_form_branches_meet_at_half() {
        let theta = 0.5f64.acos();
        let c2 = 0.25f64;
        let lower = (c2 * c2 - 4.0 * c2 + 2.0) / (3.0 - 6.0 * c2);
        let upper = (c2 + 2.0 * 0.5 + 3.0) / 6.0;
        assert!((lower - 17.0 / 24.0).abs() < 1e-15);
        assert!((upper - 17.0 / 24.0).abs() < 1e-15);
        assert!((closed_form_optimum(theta).unwrap() - 17.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_is_monotone_in_cos_theta() {
        let mut previous = f64::NEG_INFINITY;
        for k in 0..=200 {
            let c = k as f64 / 200.0;
            let value = closed_form_optimum(c.acos()).unwrap();
            assert!(value >= previous - 1e-12, "c = {c}");
            previous = value;
        }
    }

    #[test]
    fn unitary_optimum_anchor_values() {
        assert!((unitary_optimum(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((unitary_optimum(FRAC_PI_2).unwrap() - 0.5).abs() < 1e-15);
        assert!((unitary_optimum(SQRT2M1.acos()).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_never_beats_the_optimum() {
        for k in 0..=100 {
            let theta = FRAC_PI_2 * k as f64 / 100.0;
            let full = closed_form_optimum(theta).unwrap();
            let unitary = unitary_optimum(theta).unwrap();
            assert!(unitary <= full + 1e-12);
            if theta.cos() >= 0.5 {
                assert!((unitary - full).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nonclassical_window_of_nonunitary_maps() {
        // below cosθ = √2 − 1 unitary corrections stay classical while the
        // optimum is strictly quantum
        for k in 1..=50 {
            let c = 0.01 + (SQRT2M1 - 0.011) * k as f64 / 50.0;
            let theta = c.acos();
            assert!(unitary_optimum(theta).unwrap() < 2.0 / 3.0 + 1e-12);
            assert!(closed_form_optimum(theta).unwrap() > 2.0 / 3.0);
        }
    }

    #[test]
    fn repeat_fidelity_anchor_values() {
        assert!((repeat_fidelity(0.0, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
        assert!((repeat_fidelity(0.0, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(repeat_fidelity(7.0, 0.5).is_err());
        assert!(repeat_fidelity(0.5, 3.2).is_err());
    }

    #[test]
    fn first_principles_repeat_protocol() {
        // closed form of the rescaled-O protocol on the family:
        // 1/2 + (2cos²θ + cos⁴θ + sin⁴θ)/6
        for k in 0..=50 {
            let theta = FRAC_PI_2 * k as f64 / 50.0;
            let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
            let expected = 0.5 + (2.0 * c2 + c2 * c2 + s2 * s2) / 6.0;
            let scenario = Scenario::family(theta).unwrap();
            let value = repeat_first_principles(&scenario).unwrap();
            assert!(
                (value - expected).abs() < 1e-9,
                "theta {theta}: {value} vs {expected}"
            );
            // never exceeds the optimum
            assert!(value <= closed_form_optimum(theta).unwrap() + 1e-12);
        }
    }

    #[test]
    fn repeat_protocol_is_perfect_at_the_bell_point() {
        let scenario = Scenario::family(0.0).unwrap();
        assert!((repeat_first_principles(&scenario).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn appendix_chain_collapses_on_the_diagonal() {
        for angle in [0.0, 0.4, 1.1, FRAC_PI_2] {
            let p = AppendixPoint::new(angle, angle, 0.8).unwrap();
            let f1 = appendix_f_prime(&p);
            let f2 = appendix_f_double(&p);
            let f3 = appendix_f_triple(&p);
            assert!((f1 - f2).abs() < 1e-14);
            assert!((f2 - f3).abs() < 1e-14);
        }
    }

    #[test]
    fn appendix_chain_at_theta_zero() {
        // F′ = cos u′ + cos v + cos u′cos v, maximal value 3 at the origin
        let mut best = f64::NEG_INFINITY;
        for k in 0..=100 {
            for l in 0..=100 {
                let p = AppendixPoint::new(
                    FRAC_PI_2 * k as f64 / 100.0,
                    FRAC_PI_2 * l as f64 / 100.0,
                    0.0,
                )
                .unwrap();
                best = best.max(appendix_f_prime(&p));
            }
        }
        assert!((best - 3.0).abs() < 1e-12);
        let origin = AppendixPoint::new(0.0, 0.0, 0.0).unwrap();
        assert!((appendix_f_prime(&origin) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn appendix_chain_inequalities_on_grid() {
        for a in 0..20 {
            for b in 0..20 {
                for c in 0..20 {
                    let p = AppendixPoint::new(
                        FRAC_PI_2 * a as f64 / 19.0,
                        FRAC_PI_2 * b as f64 / 19.0,
                        FRAC_PI_2 * c as f64 / 19.0,
                    )
                    .unwrap();
                    let f1 = appendix_f_prime(&p);
                    let f2 = appendix_f_double(&p);
                    let f3 = appendix_f_triple(&p);
                    assert!(f1 <= f2 + 1e-12, "{p:?}");
                    assert!(f2 <= f3 + 1e-12, "{p:?}");
                }
            }
        }
    }

    #[test]
    fn appendix_midpoint_attainment() {
        for (u_prime, v) in [(0.3, 1.1), (0.0, FRAC_PI_2), (0.7, 0.7), (1.4, 0.2)] {
            let p = AppendixPoint::new(u_prime, v, 0.9).unwrap();
            let mid = 0.5 * (u_prime + v);
            let diag = AppendixPoint::new(mid, mid, 0.9).unwrap();
            assert!((appendix_f_triple(&p) - appendix_f_prime(&diag)).abs() < 1e-12);
        }
    }

    #[test]
    fn appendix_form_matches_family_fidelity() {
        // 1/2 + F′(v, v, θ)/6 is exactly the four-outcome fidelity of the
        // degenerate map at angle v
        let theta = 1.05;
        let scenario = Scenario::family(theta).unwrap();
        let ovectors = scenario.o_vectors().unwrap();
        for v in [0.0, 0.3, 0.9, 1.5] {
            let direct = degenerate_family_fidelity(&ovectors, v);
            let p = AppendixPoint::new(v, v, theta).unwrap();
            let via_appendix = 0.5 + appendix_f_prime(&p) / 6.0;
            assert!((direct - via_appendix).abs() < 1e-12, "v = {v}");
        }
    }

    #[test]
    fn degenerate_maps_are_cptp() {
        let scenario = Scenario::family(1.2).unwrap();
        for label in scenario.labels() {
            let o = scenario.o_vector(label).unwrap();
            for v in [0.0, 0.4, 1.0, FRAC_PI_2] {
                let x = degenerate_map_for_outcome(&o, v);
                let (ok, diag) = is_cptp(&x.to_affine());
                assert!(ok, "v = {v}: {}", diag.min_choi_eigenvalue);
            }
        }
    }

    #[test]
    fn degenerate_optimum_at_the_bell_point() {
        let (v_star, fidelity) = degenerate_family_optimum(0.0).unwrap();
        assert!(v_star.abs() < 1e-6);
        assert!((fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_optimum_at_the_key_angle() {
        let theta = SQRT2M1.acos();
        let (_, fidelity) = degenerate_family_optimum(theta).unwrap();
        let expected = (3.0 + 8.0 * std::f64::consts::SQRT_2) / 21.0;
        assert!((fidelity - expected).abs() < 1e-8);
    }

    #[test]
    fn degenerate_optimum_is_unitary_in_the_upper_branch() {
        for c in [0.55f64, 0.7, 0.85, 1.0] {
            let theta: f64 = c.acos();
            let (v_star, fidelity) = degenerate_family_optimum(theta).unwrap();
            assert!(v_star.abs() < 1e-5, "c = {c}: v* = {v_star}");
            assert!((fidelity - unitary_optimum(theta).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn degenerate_optimum_matches_closed_form_on_grid() {
        for k in 0..=50 {
            let theta = FRAC_PI_2 * k as f64 / 50.0;
            let (_, fidelity) = degenerate_family_optimum(theta).unwrap();
            let expected = closed_form_optimum(theta).unwrap();
            assert!(
                (fidelity - expected).abs() < 1e-8,
                "theta {theta}: {fidelity} vs {expected}"
            );
        }
    }

    #[test]
    fn composition_is_the_identity_at_the_bell_point() {
        let scenario = Scenario::family(0.0).unwrap();
        let maps: Vec<KrausChannel> = scenario
            .labels()
            .iter()
            .map(|l| {
                let o = scenario.o_vector(l).unwrap();
                let x = degenerate_map_for_outcome(&o, 0.0);
                kraus_from_choi(&choi_from_affine(&x.to_affine())).unwrap()
            })
            .collect();
        let deviation = composition_check(&scenario, &maps, 100, 9).unwrap();
        assert!(deviation < 1e-9, "deviation {deviation}");
        // consistency: the same maps reach fidelity 1
        let xs: Vec<XRep> = maps.iter().map(crate::channels::x_from_kraus).collect();
        let f = average_fidelity_x(&scenario, &xs).unwrap().value;
        assert!((f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn composition_cannot_be_fixed_at_the_projective_limit() {
        let scenario = Scenario::family(FRAC_PI_2).unwrap();
        // uncorrected protocol: output is always maximally mixed, distance 1/2
        let identity_maps = vec![KrausChannel::identity(); 4];
        let deviation = composition_check(&scenario, &identity_maps, 50, 10).unwrap();
        assert!((deviation - 0.5).abs() < 1e-12);

        // even the optimal preparation stays far from the identity map
        let pole_maps: Vec<KrausChannel> = scenario
            .labels()
            .iter()
            .map(|l| {
                let r = *scenario.o_vector(l).unwrap().r_vector();
                let ch = AffineChannel::new(Matrix3::zeros(), r / r.norm());
                kraus_from_choi(&choi_from_affine(&ch)).unwrap()
            })
            .collect();
        let deviation = composition_check(&scenario, &pole_maps, 100, 11).unwrap();
        assert!(deviation > 0.1);
    }

    #[test]
    fn chi_of_the_bell_point_has_rank_one() {
        let scenario = Scenario::family(0.0).unwrap();
        let (chi, rank) = chi_operator(&scenario, "a").unwrap();
        assert_eq!(rank, 1);
        // swap partially transposed is twice the maximally entangled projector
        let (vals, _) = eig_hermitian(&chi).unwrap();
        assert!((vals[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chi_rank_stays_at_most_two_across_the_family() {
        for k in 0..20 {
            let theta = FRAC_PI_2 * k as f64 / 19.0;
            let scenario = Scenario::family(theta).unwrap();
            for label in scenario.labels() {
                let (_, rank) = chi_operator(&scenario, label).unwrap();
                assert!(rank <= 2, "theta {theta} outcome {label}: rank {rank}");
            }
        }
    }

    #[test]
    fn chi_pairing_identity() {
        use rand::SeedableRng;
        let scenario = Scenario::family(FRAC_PI_4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let id2 = QOperator::identity(2).unwrap();
        for _ in 0..20 {
            let w = BlochVector::random_pure(&mut rng);
            let rho = density_from_bloch(&w).unwrap();
            let rho_t = QOperator::from_matrix(rho.matrix().transpose()).unwrap();
            for label in scenario.labels() {
                let o = scenario.o_operator(label).unwrap();
                let (chi, _) = chi_operator(&scenario, label).unwrap();
                let lhs = partial_trace(
                    &tensor_product(&rho_t, &id2).unwrap().mul(&chi).unwrap(),
                    0,
                    2,
                )
                .unwrap();
                let rhs =
                    partial_trace(&tensor_product(&rho, &id2).unwrap().mul(&o).unwrap(), 0, 2)
                        .unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }
}
