//! Adaptive Gauss–Kronrod quadrature, cumulative integration and Brent
//! root finding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Absolute error floor used by [`integrate_adaptive`].
pub const TOL_ABS: f64 = 1e-13;

/// Maximum bisection depth of a single panel.
pub const MAX_DEPTH: u32 = 60;

const MAX_PANELS: usize = 4000;

// A split whose children do not improve on the parent's error by 1% counts
// as roundoff-limited; after this many such splits the integral is accepted
// if its error is within `ROUNDOFF_SLACK` of the target.
const ROUNDOFF_SPLITS: usize = 10;
const ROUNDOFF_SLACK: f64 = 100.0;

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights for the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: real or complex scalars.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult<T> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

struct Panel<T> {
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
    depth: u32,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<T, F>(f: &mut F, lo: f64, hi: f64) -> Result<(T, f64)>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.magnitude() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        if !f1.is_finite_value() || !f2.is_finite_value() {
            let at = if f1.is_finite_value() { center + dx } else { center - dx };
            return Err(Error::NonFinite { what: "integrand", at });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    if !fc.is_finite_value() {
        return Err(Error::NonFinite { what: "integrand", at: center });
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((res_k * half, err))
}

/// Globally adaptive 15-point Gauss–Kronrod integration of `f` over
/// `[lo, hi]`.
///
/// Converges when the summed error estimate drops below
/// `max(tol·|value|, TOL_ABS)`. An integrand whose noise keeps the
/// estimate above that target is accepted once repeated bisection stops
/// helping and the estimate is within a factor 100 of it. The rule never samples the endpoints, so
/// integrable endpoint singularities are tolerated.
pub fn integrate_adaptive<T, F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<IntegralResult<T>>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    if lo == hi {
        return Ok(IntegralResult { value: T::zero(), abs_error_estimate: 0.0, evaluations: 0 });
    }
    if hi < lo {
        let r = integrate_adaptive(f, hi, lo, tol)?;
        return Ok(IntegralResult { value: r.value * -1.0, ..r });
    }
    let (v, e) = kronrod(&mut f, lo, hi)?;
    let mut evaluations = 15;
    let mut total = v;
    let mut total_err = e;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { lo, hi, value: v, error: e, depth: 0 });
    let mut stalled = 0;
    loop {
        let target = (tol * total.magnitude()).max(TOL_ABS);
        if total_err <= target || (stalled >= ROUNDOFF_SPLITS && total_err <= ROUNDOFF_SLACK * target) {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.depth >= MAX_DEPTH || heap.len() + 2 > MAX_PANELS {
            if total_err <= ROUNDOFF_SLACK * target {
                heap.push(worst);
                break;
            }
            return Err(Error::NoConvergence {
                lo,
                hi,
                estimate: total.magnitude(),
                error: total_err,
            });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let (v1, e1) = kronrod(&mut f, worst.lo, mid)?;
        let (v2, e2) = kronrod(&mut f, mid, worst.hi)?;
        evaluations += 30;
        if e1 + e2 >= 0.99 * worst.error {
            stalled += 1;
        }
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Panel { lo: worst.lo, hi: mid, value: v1, error: e1, depth: worst.depth + 1 });
        heap.push(Panel { lo: mid, hi: worst.hi, value: v2, error: e2, depth: worst.depth + 1 });
    }
    // Re-sum to shed the drift of the running total.
    let mut value = T::zero();
    let mut err = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        err += p.error;
    }
    Ok(IntegralResult { value, abs_error_estimate: err, evaluations })
}

/// [`integrate_adaptive`] after the substitution `x = lo + (hi − lo)·u^m`,
/// which clusters nodes at `lo` and smooths a power-law singularity there.
pub fn integrate_graded<T, F>(mut f: F, lo: f64, hi: f64, m: u32, tol: f64) -> Result<IntegralResult<T>>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    if m <= 1 {
        return integrate_adaptive(f, lo, hi, tol);
    }
    let width = hi - lo;
    let mf = m as f64;
    let g = |u: f64| {
        let um1 = u.powi(m as i32 - 1);
        f(lo + width * um1 * u).map(|v| v * (width * mf * um1))
    };
    integrate_adaptive(g, 0.0, 1.0, tol)
}

/// Integrates over consecutive pieces of an ordered node list, returning the
/// running integral `∫_{nodes[0]}^{nodes[i]} f` at every node.
pub fn cumulative<T, F>(mut f: F, nodes: &[f64], tol: f64) -> Result<Vec<T>>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = T::zero();
    if nodes.is_empty() {
        return Ok(out);
    }
    out.push(acc);
    for w in nodes.windows(2) {
        let piece = integrate_adaptive(&mut f, w[0], w[1], tol)?;
        acc = acc + piece.value;
        out.push(acc);
    }
    Ok(out)
}

/// A sign-changing interval of a real function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn new<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<Self> {
        let f_lo = f(lo);
        let f_hi = f(hi);
        Self::from_values(lo, hi, f_lo, f_hi)
    }

    pub fn from_values(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !f_lo.is_finite() {
            return Err(Error::NonFinite { what: "root function", at: lo });
        }
        if !f_hi.is_finite() {
            return Err(Error::NonFinite { what: "root function", at: hi });
        }
        if f_lo * f_hi > 0.0 {
            return Err(Error::NotBracketed { lo, hi, f_lo, f_hi });
        }
        Ok(Bracket { lo, hi, f_lo, f_hi })
    }
}

/// Brent's method: inverse quadratic / secant steps safeguarded by
/// bisection. Terminates when the bracket is narrower than
/// `tol·(1 + |root|)`; never evaluates `f` outside the bracket.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 0.5 * tol * (1.0 + b.abs()) + 2.0 * f64::EPSILON * b.abs();
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite { what: "root function", at: b });
        }
    }
    Ok(b)
}
