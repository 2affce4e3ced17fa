//! The summed constituent log-derivative
//!
//! ```text
//! Y(q; t) = b1(q)·y1(a(q); t) + b2(q)·y2(a(q); t)
//! ```
//!
//! of the transformed equation, its exact `q`-derivative and the residual
//! identity it satisfies.
//!
//! For `|a| > A_CUT` the kernels are replaced by the formal large-`|a|`
//! solution of `y1' = a − y1²`. Written in terms of `S = √Q` and
//! `w = λ·σ·Q1/S³` (σ = sign Q1, λ = ±1 picks the branch) it reads
//!
//! ```text
//! Y = λσ·[S·F(w) + Q2/S³·H(w)]
//! F(w) = Σ f_n wⁿ,   f_0 = 1,  f_1 = −1/4,
//!   f_{n+1} = −[f_n(1 − 3n)/2 + Σ_{i=1..n} f_i f_{n+1−i}] / 2
//! H(w) = Σ_{n≥1} h_n w^{n−1},   h_n = −(2/5)(n+1) f_{n+1}
//! ```
//!
//! which has no `1/Q1` left in it and so stays finite where `Q1 = 0`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::airy::mixture_kernels;
use crate::numerics::{find_root, Bracket};
use crate::problem::{airy_arguments_of, PowerLawProblem, QDerivatives};
use crate::{Error, Result};

/// Beyond this `|a|` the asymptotic branch is used when it applies.
pub const A_CUT: f64 = 7.0;

const N_SERIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Airy,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivSample {
    pub q: f64,
    pub t: Complex64,
    pub y: Complex64,
    pub dy: Complex64,
    pub branch: Branch,
}

fn series_coeffs() -> &'static ([f64; N_SERIES], [f64; N_SERIES]) {
    static C: OnceLock<([f64; N_SERIES], [f64; N_SERIES])> = OnceLock::new();
    C.get_or_init(|| {
        let mut f = [0.0; N_SERIES + 1];
        f[0] = 1.0;
        for n in 0..N_SERIES {
            let conv: f64 = (1..=n).map(|i| f[i] * f[n + 1 - i]).sum();
            f[n + 1] = -(f[n] * (1.0 - 3.0 * n as f64) / 2.0 + conv) / 2.0;
        }
        let mut h = [0.0; N_SERIES];
        for n in 1..N_SERIES {
            h[n] = -0.4 * (n + 1) as f64 * f[n + 1];
        }
        let mut fs = [0.0; N_SERIES];
        fs.copy_from_slice(&f[..N_SERIES]);
        (fs, h)
    })
}

/// `(F, F', H, H')` at `w`, truncated where the `F` terms stop shrinking.
fn asymptotic_series(w: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let (f, h) = series_coeffs();
    let zero = Complex64::new(0.0, 0.0);
    let (mut sf, mut sdf, mut sh, mut sdh) = (zero, zero, zero, zero);
    let mut wn = Complex64::new(1.0, 0.0); // wⁿ
    let mut wn1 = zero; // wⁿ⁻¹
    let mut wn2 = zero; // wⁿ⁻²
    let mut last = f64::INFINITY;
    for n in 0..N_SERIES - 1 {
        let term = f[n] * wn;
        if n > 1 && term.norm() > last {
            break;
        }
        last = term.norm();
        sf += term;
        let nf = n as f64;
        sdf += nf * f[n] * wn1;
        if n >= 1 {
            sh += h[n] * wn1;
            sdh += (nf - 1.0) * h[n] * wn2;
        }
        if last < 1e-18 * sf.norm() {
            break;
        }
        wn2 = wn1;
        wn1 = wn;
        wn *= w;
    }
    (sf, sdf, sh, sdh)
}

/// Branch index λ of the formal solution for this mixture, or `None` when
/// the mixture is not (numerically) a single exponential branch.
fn asymptotic_lambda(a: f64, t: Complex64) -> Option<(f64, bool)> {
    let i = Complex64::i();
    if a > 0.0 {
        if t == Complex64::new(0.0, 0.0) {
            return Some((-1.0, false));
        }
        // Ai/(t·Bi) ≈ e^{−2ζ}/(2|t|): negligible → dominant branch.
        let zeta = 2.0 / 3.0 * a.powf(1.5);
        if (-2.0 * zeta).exp() < 1e-14 * t.norm() {
            return Some((1.0, false));
        }
        None
    } else if t == i {
        Some((1.0, false))
    } else if t == -i {
        Some((1.0, true))
    } else {
        None
    }
}

fn asymptotic_y(d: &QDerivatives, lambda: f64, conj: bool) -> (Complex64, Complex64) {
    let sigma = if d.q1 < 0.0 { -1.0 } else { 1.0 };
    let ls = lambda * sigma;
    let s = Complex64::from(d.q0).sqrt();
    let s3 = s * s * s;
    let s5 = s3 * s * s;
    let w = ls * d.q1 / s3;
    let (f, df, h, dh) = asymptotic_series(w);
    let ds = d.q1 / (2.0 * s);
    let dw = ls * (d.q2 / s3 - 1.5 * d.q1 * d.q1 / s5);
    let y = ls * (s * f + d.q2 / s3 * h);
    let dy = ls * (ds * f + s * df * dw + d.q3 / s3 * h - 1.5 * d.q2 * d.q1 / s5 * h + d.q2 / s3 * dh * dw);
    if conj {
        (y.conj(), dy.conj())
    } else {
        (y, dy)
    }
}

fn airy_y(d: &QDerivatives, t: Complex64) -> Result<(Complex64, Complex64)> {
    let (a, b1, b2) = airy_arguments_of(d)?;
    let m = mixture_kernels(a, t)?;
    let da = b1 - 2.0 / 3.0 * a * b2;
    let db1 = b1 * b2 / 3.0;
    let db2 = d.q3 / d.q1 - b2 * b2;
    let y = b1 * m.y1 + b2 * m.y2;
    let dy = db1 * m.y1 + b1 * da * m.dy1 + db2 * m.y2 + b2 * da * m.dy2;
    Ok((y, dy))
}

fn check(s: LogDerivSample) -> Result<LogDerivSample> {
    if s.y.is_finite() && s.dy.is_finite() {
        Ok(s)
    } else {
        Err(Error::NonFinite { what: "log-derivative", at: s.q })
    }
}

/// `Y(q; t)` and `dY/dq`, choosing the branch from `|a(q)|`.
pub fn eval_y(p: &PowerLawProblem, e: f64, q: f64, t: Complex64) -> Result<LogDerivSample> {
    let d = p.q_function(e, q)?;
    let large = d.q1 == 0.0 || d.q0.abs() > A_CUT * d.q1.abs().powf(2.0 / 3.0);
    if large {
        let a = if d.q0 > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        let a = if d.q1 == 0.0 { a } else { d.q0 / d.q1.abs().powf(2.0 / 3.0) };
        if let Some((lambda, conj)) = asymptotic_lambda(a, t) {
            let (y, dy) = asymptotic_y(&d, lambda, conj);
            return check(LogDerivSample { q, t, y, dy, branch: Branch::Asymptotic });
        }
    }
    let (y, dy) = airy_y(&d, t)?;
    check(LogDerivSample { q, t, y, dy, branch: Branch::Airy })
}

/// Forces one branch; used to test that the two agree at the switch.
pub fn eval_y_branch(p: &PowerLawProblem, e: f64, q: f64, t: Complex64, branch: Branch) -> Result<LogDerivSample> {
    let d = p.q_function(e, q)?;
    let (y, dy) = match branch {
        Branch::Airy => airy_y(&d, t)?,
        Branch::Asymptotic => {
            let (a, _, _) = airy_arguments_of(&d)?;
            let (lambda, conj) = asymptotic_lambda(a, t).ok_or_else(|| {
                Error::InvalidProblem(format!("no asymptotic branch for t = {t} at a = {a}"))
            })?;
            asymptotic_y(&d, lambda, conj)
        }
    };
    check(LogDerivSample { q, t, y, dy, branch })
}

/// Both sides of `−(Y' + Y²) + Q = −[(Q3/Q1)·y2 + (Q2/Q1)²·(y2² − 8y2/3 + 4a·y1·y2/3 − 1/6)]`
/// on the Airy branch.
pub fn riccati_residual(p: &PowerLawProblem, e: f64, q: f64, t: Complex64) -> Result<(Complex64, Complex64)> {
    let d = p.q_function(e, q)?;
    let (a, _, b2) = airy_arguments_of(&d)?;
    let m = mixture_kernels(a, t)?;
    let (y, dy) = airy_y(&d, t)?;
    let lhs = -(dy + y * y) + d.q0;
    let y2 = m.y2;
    let rhs = -(d.q3 / d.q1 * y2 + b2 * b2 * (y2 * y2 - 8.0 / 3.0 * y2 + 4.0 / 3.0 * a * m.y1 * y2 - 1.0 / 6.0));
    Ok((lhs, rhs))
}

/// Points in `(lo, hi)` where `|a(q)| = A_CUT`, i.e. where [`eval_y`] may
/// switch branch. Quadratures use them as panel boundaries.
pub fn branch_switch_points(p: &PowerLawProblem, e: f64, lo: f64, hi: f64) -> Vec<f64> {
    let g = |q: f64| match p.q_function(e, q) {
        Ok(d) => d.q0.abs() - A_CUT * d.q1.abs().powf(2.0 / 3.0),
        Err(_) => f64::NAN,
    };
    let count = 256;
    let lo_eff = if lo > 0.0 { lo } else { hi * 1e-9 };
    let nodes: Vec<f64> = (0..=count).map(|i| lo_eff + (hi - lo_eff) * i as f64 / count as f64).collect();
    let mut out = Vec::new();
    for w in nodes.windows(2) {
        let (ga, gb) = (g(w[0]), g(w[1]));
        if ga * gb < 0.0 {
            if let Ok(b) = Bracket::from_values(w[0], w[1], ga, gb) {
                if let Ok(r) = find_root(g, b, 1e-15) {
                    out.push(r);
                }
            }
        }
    }
    out
}

/// Sign of `dQ/dq`.
pub fn epsilon_sign(p: &PowerLawProblem, e: f64, q: f64) -> Result<i32> {
    let d = p.q_function(e, q)?;
    if d.q1 == 0.0 {
        return Err(Error::StationaryQ { q });
    }
    Ok(if d.q1 > 0.0 { 1 } else { -1 })
}
