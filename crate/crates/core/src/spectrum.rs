//! The quantization condition
//!
//! ```text
//! ∫_{q₋}^{q₊} ε·Im Y(q; +i) dq = π(n + 1/3) + φ,   ε = sign dQ/dq
//! ```
//!
//! and the eigenvalue search built on it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::logderiv::{branch_switch_points, eval_y};
use crate::numerics::{find_root, integrate_graded, Bracket};
use crate::problem::{OriginData, PowerLawProblem};
use crate::{Error, Result};

/// Relative tolerance of the phase quadrature.
pub const PHASE_TOL: f64 = 1e-12;
/// Relative tolerance of the energy root.
pub const ENERGY_TOL: f64 = 1e-14;

const SCAN_FACTOR: f64 = 1.6;
const MAX_SCAN: usize = 200;

/// One solved level: the energy and the geometry the wave function needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenstate {
    pub problem: PowerLawProblem,
    pub n: u32,
    pub e: f64,
    pub q_minus: f64,
    pub q_plus: f64,
    /// Interior point where `dQ/dq = 0`, if the well has one.
    pub q_star: Option<f64>,
    pub origin: OriginData,
}

/// `ε·Im Y(q; +i)`, the local wavenumber of the oscillatory region.
pub fn phase_density(p: &PowerLawProblem, e: f64, q: f64) -> Result<f64> {
    let d = p.q_function(e, q)?;
    let eps = if d.q1 < 0.0 { -1.0 } else { 1.0 };
    Ok(eps * eval_y(p, e, q, Complex64::i())?.y.im)
}

/// Panel boundaries of the classical region: the turning points and the
/// stationary point of `Q` between them.
pub(crate) fn classical_panels(p: &PowerLawProblem, e: f64) -> Result<(f64, f64, Option<f64>)> {
    let (qm, qp) = p.turning_points(e)?;
    let qs = p.stationary_point(e, qm, qp)?;
    Ok((qm, qp, qs))
}

/// Panel edges of `[q₋, q₊]`: the ends, `q*`, and the branch switches.
pub(crate) fn phase_edges(p: &PowerLawProblem, e: f64, qm: f64, qp: f64, qs: Option<f64>) -> Vec<f64> {
    let mut edges = vec![qm, qp];
    edges.extend(qs);
    edges.extend(branch_switch_points(p, e, qm, qp));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
}

pub fn phase_integral(p: &PowerLawProblem, e: f64) -> Result<f64> {
    let (qm, qp, qs) = classical_panels(p, e)?;
    let mut total = 0.0;
    for w in phase_edges(p, e, qm, qp, qs).windows(2) {
        let m = if w[0] == 0.0 { p.origin_grading() } else { 1 };
        total += integrate_graded(|q| phase_density(p, e, q), w[0], w[1], m, PHASE_TOL)?.value;
    }
    Ok(total)
}

pub fn quantization_rhs(n: u32, origin: &OriginData) -> f64 {
    PI * (n as f64 + 1.0 / 3.0) + origin.phi
}

/// Solves the quantization condition for radial quantum number `n`.
///
/// The energy is scanned upward from just above the minimum of the
/// effective potential in geometric steps until the phase overshoots the
/// target, then refined by Brent's method.
pub fn solve_level(p: &PowerLawProblem, n: u32) -> Result<Eigenstate> {
    let origin = p.origin_mixture()?;
    let target = quantization_rhs(n, &origin);
    let vmin = p.q_potential_minimum();
    let mismatch = |e: f64| phase_integral(p, e).map(|v| v - target);

    let mut gap = if vmin > 0.0 { 1e-4 * vmin } else { 1e-3 };
    let mut lo = vmin + gap;
    let mut f_lo = mismatch(lo)?;
    if f_lo > 0.0 {
        return Err(Error::BracketScan(format!("phase already exceeds the target at e = {lo}")));
    }
    let mut bracket = None;
    for _ in 0..MAX_SCAN {
        gap *= SCAN_FACTOR;
        let hi = vmin + gap;
        let f_hi = mismatch(hi)?;
        if f_hi >= 0.0 {
            bracket = Some(Bracket::from_values(lo, hi, f_lo, f_hi)?);
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    let bracket = bracket.ok_or_else(|| Error::BracketScan(format!("no sign change below e = {}", vmin + gap)))?;

    // Quadrature errors inside the root search are surfaced afterwards.
    let mut failure = None;
    let e = find_root(
        |e| match mismatch(e) {
            Ok(v) => v,
            Err(err) => {
                failure.get_or_insert(err);
                f64::NAN
            }
        },
        bracket,
        ENERGY_TOL,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let e = e?;
    let (q_minus, q_plus, q_star) = classical_panels(p, e)?;
    Ok(Eigenstate { problem: *p, n, e, q_minus, q_plus, q_star, origin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn p(k: f64, l: u32) -> PowerLawProblem {
        PowerLawProblem::new(k, l).unwrap()
    }

    #[test]
    fn rhs_values() {
        let o = |phi| OriginData { a0: 0.0, c: 0.0, t0: 0.0, phi };
        assert!((quantization_rhs(0, &o(FRAC_PI_2)) - 5.0 * PI / 6.0).abs() < 1e-15);
        assert!((quantization_rhs(2, &o(0.0)) - 7.0 * PI / 3.0).abs() < 1e-14);
        let o1 = p(2.0, 1).origin_mixture().unwrap();
        assert!((quantization_rhs(1, &o1) - (4.0 * PI / 3.0 + o1.phi)).abs() < 1e-14);
    }

    #[test]
    fn linear_phase_is_exact() {
        let ph = phase_integral(&p(1.0, 0), 2.338_107_410_459_767).unwrap();
        assert!((ph - 5.0 * PI / 6.0).abs() < 1e-10, "{ph}");
    }

    #[test]
    fn linear_levels_are_airy_zeros() {
        let zeros = [2.338_107_410_459_767, 4.087_949_444_130_971, 5.520_559_828_095_551];
        for (n, z) in zeros.iter().enumerate() {
            let s = solve_level(&p(1.0, 0), n as u32).unwrap();
            assert!((s.e - z).abs() < 1e-9, "n={n}: {} vs {z}", s.e);
            assert_eq!(s.q_minus, 0.0);
            assert_eq!(s.q_star, None);
        }
    }

    #[test]
    fn quantization_energies() {
        // Roots of the quantization condition (not ⟨H⟩, which sits closer
        // to the exact level), from an independent double-precision solve.
        let cases = [
            (2.0, 0, 0, 3.008_252_169_173_4),
            (2.0, 1, 0, 5.003_700_774_721_0),
            (4.0, 0, 0, 3.787_455_191_426_0),
            (2.0, 2, 2, 14.987_022_218_573),
        ];
        for (k, l, n, want) in cases {
            let s = solve_level(&p(k, l), n).unwrap();
            assert!((s.e - want).abs() < 1e-8 * want, "k={k} l={l} n={n}: {} vs {want}", s.e);
            let ph = phase_integral(&p(k, l), s.e).unwrap();
            assert!((ph - quantization_rhs(n, &s.origin)).abs() < 1e-10);
        }
    }

    #[test]
    fn phase_is_increasing() {
        for (k, l) in [(2.0, 0), (2.0, 1), (4.0, 2), (1.5, 1)] {
            let pr = p(k, l);
            let v = pr.q_potential_minimum();
            let mut last = 0.0;
            for i in 1..30 {
                let e = v * 1.001 + 0.5 * i as f64;
                let ph = phase_integral(&pr, e).unwrap();
                assert!(ph > last, "k={k} l={l} e={e}");
                last = ph;
            }
        }
    }

    #[test]
    fn levels_interlace() {
        for (k, l) in [(2.0, 1), (4.0, 0), (2.5, 2)] {
            let e: Vec<f64> = (0..4).map(|n| solve_level(&p(k, l), n).unwrap().e).collect();
            assert!(e.windows(2).all(|w| w[0] < w[1]), "{e:?}");
        }
    }

    #[test]
    fn stationary_point_lies_inside() {
        let s = solve_level(&p(2.0, 1), 1).unwrap();
        let qs = s.q_star.unwrap();
        assert!(s.q_minus < qs && qs < s.q_plus);
        let s = solve_level(&p(2.0, 0), 1).unwrap();
        assert_eq!(s.q_star, None);
    }
}
