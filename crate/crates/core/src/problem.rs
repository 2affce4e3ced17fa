//! The dimensionless power-law problem, the substitution `r = q^s` and the
//! effective function `Q(q)` of the transformed equation `Ψ'' = Q·Ψ`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::airy::airy_eval;
use crate::numerics::{find_root, Bracket};
use crate::{Error, Result};

/// A physical specification `-ħ²/2m ψ'' + (α r^k + ħ² l(l+1)/(2m r²)) ψ = E ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSpec {
    pub alpha: f64,
    pub k: f64,
    pub mass: f64,
    pub hbar: f64,
    pub l: u32,
}

/// Scale factors mapping dimensionless `(x, e)` back to `(r, E)`:
/// `r = length·x`, `E = energy·e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub length: f64,
    pub energy: f64,
}

impl Scales {
    pub fn to_dimensionless(&self, r: f64, energy: f64) -> (f64, f64) {
        (r / self.length, energy / self.energy)
    }

    pub fn to_physical(&self, x: f64, e: f64) -> (f64, f64) {
        (x * self.length, e * self.energy)
    }
}

/// Radial problem in units `ħ = 1, 2m = 1, α = 1` with substitution power `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawProblem {
    pub k: f64,
    pub l: u32,
    pub s: f64,
}

/// `Q` and its first three `q`-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDerivatives {
    pub q: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// Origin-matching data: the Airy argument at the origin, the auxiliary
/// constant `c(l,s)`, the mixture parameter `t0` and the phase `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OriginData {
    pub a0: f64,
    pub c: f64,
    pub t0: f64,
    pub phi: f64,
}

/// Substitution power: 1 for s-waves, 2 otherwise.
pub fn choose_s(l: u32) -> f64 {
    if l == 0 {
        1.0
    } else {
        2.0
    }
}

pub fn nondimensionalize(spec: &PhysicalSpec) -> Result<(PowerLawProblem, Scales)> {
    let PhysicalSpec { alpha, k, mass, hbar, l } = *spec;
    for (name, v) in [("alpha", alpha), ("mass", mass), ("hbar", hbar)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidProblem(format!("{name} must be positive, got {v}")));
        }
    }
    let problem = PowerLawProblem::new(k, l)?;
    let h2m = hbar * hbar / (2.0 * mass);
    let scales = Scales {
        length: (h2m / alpha).powf(1.0 / (k + 2.0)),
        energy: (h2m * alpha.powf(2.0 / k)).powf(k / (k + 2.0)),
    };
    Ok((problem, scales))
}

impl PowerLawProblem {
    /// Problem with the default substitution power from [`choose_s`].
    pub fn new(k: f64, l: u32) -> Result<Self> {
        Self::with_s(k, l, choose_s(l))
    }

    pub fn with_s(k: f64, l: u32, s: f64) -> Result<Self> {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidProblem(format!("k must be ≥ 1, got {k}")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidProblem(format!("s must be positive, got {s}")));
        }
        let p = PowerLawProblem { k, l, s };
        if p.centrifugal() < 0.0 {
            return Err(Error::InvalidProblem(format!(
                "s(l + 1/2) must be at least 1/2, got s = {s}, l = {l}"
            )));
        }
        Ok(p)
    }

    /// Coefficient `s²(l+½)² − ¼` of the `q^{-2}` term.
    pub fn centrifugal(&self) -> f64 {
        let lh = self.l as f64 + 0.5;
        self.s * self.s * lh * lh - 0.25
    }

    /// True when the `q^{-2}` term vanishes (`l = 0, s = 1`); the inner
    /// turning point then sits at the origin.
    pub fn origin_is_turning_point(&self) -> bool {
        self.centrifugal() == 0.0
    }

    /// Exponent of `q` in the leading small-`q` law `Ψ ∝ q^p`.
    pub fn origin_exponent(&self) -> f64 {
        self.s * self.l as f64 + 0.5 * (self.s + 1.0)
    }

    /// Prefactor exponent `(s−1)/(2s)` of `ψ = x^β Ψ(q)`.
    pub fn prefactor_exponent(&self) -> f64 {
        (self.s - 1.0) / (2.0 * self.s)
    }

    /// The zeros of `Q` are the roots of `x^k + L/x² = e` with `x = q^s`
    /// and `L = (l+½)² − 1/(4s²)`.
    fn shifted_centrifugal(&self) -> f64 {
        self.centrifugal() / (self.s * self.s)
    }

    /// Grading exponent for quadrature panels that start at `q = 0`: the
    /// curvature terms of `Y` behave like `q^{(k−2)}` there when `s = 1`.
    pub fn origin_grading(&self) -> u32 {
        if self.s != 1.0 || self.k.fract() == 0.0 {
            1
        } else {
            (2.0 / (self.k - 1.0)).ceil().clamp(2.0, 16.0) as u32
        }
    }

    /// Minimum over `x` of `x^k + L/x²`; `Q` has two zeros only above it.
    pub fn q_potential_minimum(&self) -> f64 {
        let lc = self.shifted_centrifugal();
        if lc <= 0.0 {
            return 0.0;
        }
        let xm = (2.0 * lc / self.k).powf(1.0 / (self.k + 2.0));
        xm.powf(self.k) + lc / (xm * xm)
    }

    pub fn q_function(&self, e: f64, q: f64) -> Result<QDerivatives> {
        if !(q > 0.0) {
            return Err(Error::NonPositiveQ { q });
        }
        let s2 = self.s * self.s;
        let mut out = [0.0; 4];
        for (coef, pw) in [
            (s2, (2.0 + self.k) * self.s - 2.0),
            (-e * s2, 2.0 * self.s - 2.0),
            (self.centrifugal(), -2.0),
        ] {
            if coef == 0.0 {
                continue;
            }
            let base = coef * q.powf(pw);
            out[0] += base;
            out[1] += base * pw / q;
            out[2] += base * pw * (pw - 1.0) / (q * q);
            out[3] += base * pw * (pw - 1.0) * (pw - 2.0) / (q * q * q);
        }
        Ok(QDerivatives { q, q0: out[0], q1: out[1], q2: out[2], q3: out[3] })
    }

    /// Turning points `q₋ < q₊` with `Q(q±) = 0`; `q₋ = 0` exactly when
    /// the origin is itself the inner turning point.
    pub fn turning_points(&self, e: f64) -> Result<(f64, f64)> {
        let lc = self.shifted_centrifugal();
        let k = self.k;
        let f = |x: f64| x.powf(k) + lc / (x * x) - e;
        let to_q = |x: f64| x.powf(1.0 / self.s);
        if lc <= 0.0 {
            if !(e > 0.0) {
                return Err(Error::NoBoundRegion { e });
            }
            return Ok((0.0, to_q(e.powf(1.0 / k))));
        }
        let xm = (2.0 * lc / k).powf(1.0 / (k + 2.0));
        if !(f(xm) < 0.0) {
            return Err(Error::NoBoundRegion { e });
        }
        // f decreases on (0, xm) and increases on (xm, ∞).
        let mut lo = xm;
        while f(lo) <= 0.0 {
            lo *= 0.5;
        }
        let mut hi = xm;
        while f(hi) <= 0.0 {
            hi *= 2.0;
        }
        let x_minus = find_root(f, Bracket::new(f, lo, xm)?, 1e-15)?;
        let x_plus = find_root(f, Bracket::new(f, xm, hi)?, 1e-15)?;
        Ok((to_q(x_minus), to_q(x_plus)))
    }

    /// Where `dQ/dq = 0` inside the well, if anywhere.
    pub fn stationary_point(&self, e: f64, q_minus: f64, q_plus: f64) -> Result<Option<f64>> {
        if self.origin_is_turning_point() {
            return Ok(None);
        }
        let f = |q: f64| self.q_function(e, q).map(|d| d.q1).unwrap_or(f64::NAN);
        let b = Bracket::new(f, q_minus, q_plus)?;
        Ok(Some(find_root(f, b, 1e-15)?))
    }

    /// `(a, b1, b2)` with `a = Q/|Q'|^{2/3}`, `b1 = Q'/|Q'|^{2/3}`,
    /// `b2 = Q''/Q'`.
    pub fn airy_arguments(&self, e: f64, q: f64) -> Result<(f64, f64, f64)> {
        let d = self.q_function(e, q)?;
        airy_arguments_of(&d)
    }

    pub fn origin_mixture(&self) -> Result<OriginData> {
        let a0 = (self.centrifugal() / 4.0).cbrt();
        let lh = self.l as f64 + 0.5;
        let c = 1.0 - (1.0 + 1.25 * ((8.0 * a0 * a0 * a0 - 3.0) / 10.0 + self.s * lh + 0.5)).sqrt();
        let p = airy_eval(a0)?;
        let t0 = (-c * p.ai + a0 * p.dai) / (c * p.bi - a0 * p.dbi);
        Ok(OriginData { a0, c, t0, phi: PI / 3.0 - t0.atan() })
    }
}

pub(crate) fn airy_arguments_of(d: &QDerivatives) -> Result<(f64, f64, f64)> {
    if d.q1 == 0.0 {
        return Err(Error::StationaryQ { q: d.q });
    }
    let m = d.q1.abs().powf(2.0 / 3.0);
    Ok((d.q0 / m, d.q1 / m, d.q2 / d.q1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::{AI0, BI0};

    fn p(k: f64, l: u32) -> PowerLawProblem {
        PowerLawProblem::new(k, l).unwrap()
    }

    #[test]
    fn s_rule() {
        assert_eq!(choose_s(0), 1.0);
        assert_eq!(choose_s(1), 2.0);
        assert_eq!(choose_s(5), 2.0);
        assert_eq!(p(2.0, 3).s, 2.0);
    }

    #[test]
    fn validation() {
        assert!(matches!(PowerLawProblem::new(0.5, 0), Err(Error::InvalidProblem(m)) if m.contains("k must be ≥ 1")));
        assert!(PowerLawProblem::with_s(2.0, 0, 0.5).is_err());
        assert!(PowerLawProblem::with_s(2.0, 1, -1.0).is_err());
        assert!(PowerLawProblem::with_s(1.5, 0, 2.0).is_ok());
    }

    #[test]
    fn q_values() {
        let d = p(2.0, 0).q_function(3.0, 1.0).unwrap();
        assert_eq!(d.q0, -2.0);
        let d = p(1.0, 0).q_function(1.7, 0.4).unwrap();
        assert!((d.q0 - (0.4 - 1.7)).abs() < 1e-15);
        assert_eq!((d.q1, d.q2, d.q3), (1.0, 0.0, 0.0));
        let d = p(2.0, 1).q_function(5.0, 1.0).unwrap();
        assert!((d.q0 + 7.25).abs() < 1e-14);
        assert!(matches!(p(2.0, 1).q_function(5.0, 0.0), Err(Error::NonPositiveQ { .. })));
    }

    #[test]
    fn q_derivatives_match_finite_differences() {
        let cases = [(1.0, 0, 2.3), (2.0, 1, 5.0), (4.0, 2, 10.8), (2.7, 1, 6.0), (1.0, 2, 4.2)];
        for &(k, l, e) in &cases {
            let pr = p(k, l);
            for i in 0..20 {
                let q = 0.3 + 0.1 * i as f64;
                let h = 1e-5 * q;
                let d = pr.q_function(e, q).unwrap();
                let at = |x| pr.q_function(e, x).unwrap();
                let fd1 = (at(q + h).q0 - at(q - h).q0) / (2.0 * h);
                let fd2 = (at(q + h).q1 - at(q - h).q1) / (2.0 * h);
                let fd3 = (at(q + h).q2 - at(q - h).q2) / (2.0 * h);
                for (an, fd, sc) in [(d.q1, fd1, d.q1), (d.q2, fd2, d.q2), (d.q3, fd3, d.q3)] {
                    assert!((an - fd).abs() <= 1e-6 * sc.abs().max(1.0), "k={k} l={l} q={q}: {an} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn turning_point_values() {
        let (qm, qp) = p(2.0, 0).turning_points(3.0).unwrap();
        assert_eq!(qm, 0.0);
        assert!((qp - 3f64.sqrt()).abs() < 1e-14);

        let (qm, qp) = p(1.0, 0).turning_points(2.33811).unwrap();
        assert_eq!(qm, 0.0);
        assert!((qp - 2.33811).abs() < 1e-14);

        // Q = 4q⁶ − 20q² + 8.75/q² vanishes where q⁴ = (5 ∓ √16.25)/2.
        let (qm, qp) = p(2.0, 1).turning_points(5.0).unwrap();
        let disc = 16.25f64.sqrt();
        assert!((qm - ((5.0 - disc) / 2.0).powf(0.25)).abs() < 1e-13);
        assert!((qp - ((5.0 + disc) / 2.0).powf(0.25)).abs() < 1e-13);
        assert!((qm - 0.834275).abs() < 1e-6 && (qp - 1.457733).abs() < 1e-6);

        for (k, l, e) in [(2.0, 1, 5.0), (4.0, 2, 10.8424), (1.0, 1, 3.4)] {
            let pr = p(k, l);
            let (qm, qp) = pr.turning_points(e).unwrap();
            for q in [qm, qp] {
                let d = pr.q_function(e, q).unwrap();
                assert!(d.q0.abs() <= 1e-12 * d.q1.abs() * q, "Q({q}) = {}", d.q0);
            }
            let mid = 0.5 * (qm + qp);
            assert!(pr.q_function(e, mid).unwrap().q0 < 0.0);
            assert!(pr.q_function(e, 0.5 * qm).unwrap().q0 > 0.0);
            assert!(pr.q_function(e, 1.5 * qp).unwrap().q0 > 0.0);
        }
    }

    #[test]
    fn no_bound_region() {
        let pr = p(2.0, 1);
        let below = pr.q_potential_minimum() * 0.99;
        assert!(matches!(pr.turning_points(below), Err(Error::NoBoundRegion { .. })));
        assert!(matches!(p(2.0, 0).turning_points(-1.0), Err(Error::NoBoundRegion { .. })));
    }

    #[test]
    fn airy_argument_values() {
        let pr = p(1.0, 0);
        for q in [0.1, 1.0, 3.0] {
            let (a, b1, b2) = pr.airy_arguments(2.0, q).unwrap();
            assert!((a - (q - 2.0)).abs() < 1e-15);
            assert_eq!((b1, b2), (1.0, 0.0));
        }
        let (a, b1, b2) = p(2.0, 0).airy_arguments(3.0, 2.0).unwrap();
        assert!((a - 0.39685).abs() < 1e-5);
        assert!((b1 - 1.58740).abs() < 1e-5);
        assert!((b2 - 0.5).abs() < 1e-15);
        let pr = p(2.0, 1);
        let (_, qp) = pr.turning_points(5.0).unwrap();
        assert!(pr.airy_arguments(5.0, qp).unwrap().0.abs() < 1e-12);
    }

    #[test]
    fn origin_data() {
        let o = p(2.0, 0).origin_mixture().unwrap();
        assert_eq!(o.a0, 0.0);
        assert!((o.c - (1.0 - 1.875f64.sqrt())).abs() < 1e-15);
        assert!((o.t0 + AI0 / BI0).abs() < 1e-15);
        assert!((o.t0 + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((o.phi - std::f64::consts::FRAC_PI_2).abs() < 1e-15);

        let o = PowerLawProblem::with_s(2.0, 0, 2.0).unwrap().origin_mixture().unwrap();
        assert!((o.a0 - 0.572357).abs() < 1e-6);

        let o = p(2.0, 1).origin_mixture().unwrap();
        assert!((o.a0 - 1.298124).abs() < 1e-6);
        assert!((o.c + 1.680951).abs() < 1e-6);
    }

    #[test]
    fn scales_round_trip() {
        let spec = PhysicalSpec { alpha: 1.0, k: 2.0, mass: 0.5, hbar: 1.0, l: 0 };
        let (_, sc) = nondimensionalize(&spec).unwrap();
        assert_eq!((sc.length, sc.energy), (1.0, 1.0));

        // ½ r² with ħ = m = 1: e = 2E, so the ground state E = 3/2.
        let spec = PhysicalSpec { alpha: 0.5, k: 2.0, mass: 1.0, hbar: 1.0, l: 0 };
        let (_, sc) = nondimensionalize(&spec).unwrap();
        assert!((sc.to_physical(1.0, 3.0).1 - 1.5).abs() < 1e-15);

        let spec = PhysicalSpec { alpha: 3.7, k: 1.3, mass: 0.2, hbar: 2.1, l: 1 };
        let (_, sc) = nondimensionalize(&spec).unwrap();
        let (x, e) = sc.to_dimensionless(0.77, 4.4);
        let (r, en) = sc.to_physical(x, e);
        assert!((r / 0.77 - 1.0).abs() < 1e-14 && (en / 4.4 - 1.0).abs() < 1e-14);

        assert!(nondimensionalize(&PhysicalSpec { k: 0.5, ..spec }).is_err());
        assert!(nondimensionalize(&PhysicalSpec { alpha: -1.0, ..spec }).is_err());
    }

    #[test]
    fn dimensionless_energy_is_invariant_under_alpha() {
        // E_n ∝ α^{2/(k+2)}: the dimensionless level must not depend on α.
        for alpha in [0.25, 1.0, 4.0] {
            let spec = PhysicalSpec { alpha, k: 2.0, mass: 1.0, hbar: 1.0, l: 0 };
            let (_, sc) = nondimensionalize(&spec).unwrap();
            let omega = (2.0 * alpha).sqrt();
            let e = sc.to_dimensionless(1.0, 1.5 * omega).1;
            assert!((e - 3.0).abs() < 1e-14, "alpha = {alpha}: e = {e}");
        }
    }
}
