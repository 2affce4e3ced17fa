//! Real-argument Airy functions and the mixture kernels
//! `y1(a;t) = d/da ln(Ai(a) + t·Bi(a))` and `y2(a;t)`.
//!
//! On `|a| ≤ 8` values come from a node table (spacing 1/4) followed by one
//! Taylor step of the Airy equation `y'' = a·y`. The table is built once:
//! `Bi` forward from the origin, `Ai` on the negative axis forward from the
//! origin, and `Ai` on the positive axis backward from `a = 12`, so that
//! every sweep runs in the direction in which its solution dominates. Beyond
//! `|a| = 8` the standard asymptotic expansions are used with optimal
//! truncation; there `ζ = (2/3)|a|^{3/2} ≥ 15` and the truncation error is
//! of order `e^{-2ζ}`.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::{Error, Result};

pub const AI0: f64 = 0.355_028_053_887_817_24;
pub const DAI0: f64 = -0.258_819_403_792_806_8;
pub const BI0: f64 = 0.614_926_627_446_000_7;
pub const DBI0: f64 = 0.448_288_357_353_826_36;

const TABLE_HALF_WIDTH: f64 = 8.0;
const TABLE_STEP: f64 = 0.25;
const TABLE_LEN: usize = 65;
const AI_BACKWARD_START: f64 = 12.0;

/// Largest argument for which the unscaled `Bi` and `Bi'` are finite.
pub const A_OVERFLOW: f64 = 103.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub a: f64,
    pub ai: f64,
    pub bi: f64,
    pub dai: f64,
    pub dbi: f64,
}

/// Airy values with the dominant exponential removed: for `a ≥ 0`,
/// `Ai = ai_s·e^{-log_scale}` and `Bi = bi_s·e^{+log_scale}` with
/// `log_scale = (2/3)a^{3/2}`. For `a < 0` nothing is removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledAiryPair {
    pub a: f64,
    pub ai_s: f64,
    pub bi_s: f64,
    pub dai_s: f64,
    pub dbi_s: f64,
    pub log_scale: f64,
}

impl ScaledAiryPair {
    /// `ai·dbi − dai·bi`, in which the scale factors cancel.
    pub fn wronskian(&self) -> f64 {
        self.ai_s * self.dbi_s - self.dai_s * self.bi_s
    }
}

impl AiryPair {
    pub fn wronskian(&self) -> f64 {
        self.ai * self.dbi - self.dai * self.bi
    }
}

/// `y1`, `y2` and their `a`-derivatives for one mixture parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureLogDeriv {
    pub t: Complex64,
    pub a: f64,
    pub y1: Complex64,
    pub y2: Complex64,
    pub dy1: Complex64,
    pub dy2: Complex64,
}

struct AiryTable {
    ai: [f64; TABLE_LEN],
    dai: [f64; TABLE_LEN],
    bi: [f64; TABLE_LEN],
    dbi: [f64; TABLE_LEN],
}

fn node(j: usize) -> f64 {
    -TABLE_HALF_WIDTH + TABLE_STEP * j as f64
}

/// One Taylor step of `y'' = a·y` from `a0` to `a0 + h`.
fn taylor_step(a0: f64, y: f64, dy: f64, h: f64) -> (f64, f64) {
    // c[n+2] = (a0·c[n] + c[n-1]) / ((n+2)(n+1))
    let (mut cm1, mut c0, mut c1) = (0.0, y, dy);
    let mut val = y + dy * h;
    let mut der = dy;
    let mut hp = h; // h^(n+1)
    let mut quiet = 0;
    for n in 0..80 {
        let c2 = (a0 * c0 + cm1) / (((n + 2) * (n + 1)) as f64);
        let term = c2 * hp * h;
        let dterm = (n + 2) as f64 * c2 * hp;
        val += term;
        der += dterm;
        if term.abs() <= 1e-18 * val.abs() && dterm.abs() <= 1e-18 * der.abs() {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        cm1 = c0;
        c0 = c1;
        c1 = c2;
        hp *= h;
    }
    (val, der)
}

fn table() -> &'static AiryTable {
    static TABLE: OnceLock<AiryTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = AiryTable {
            ai: [0.0; TABLE_LEN],
            dai: [0.0; TABLE_LEN],
            bi: [0.0; TABLE_LEN],
            dbi: [0.0; TABLE_LEN],
        };
        let zero = TABLE_LEN / 2;
        t.ai[zero] = AI0;
        t.dai[zero] = DAI0;
        t.bi[zero] = BI0;
        t.dbi[zero] = DBI0;
        for j in (1..=zero).rev() {
            let a = node(j);
            (t.ai[j - 1], t.dai[j - 1]) = taylor_step(a, t.ai[j], t.dai[j], -TABLE_STEP);
            (t.bi[j - 1], t.dbi[j - 1]) = taylor_step(a, t.bi[j], t.dbi[j], -TABLE_STEP);
        }
        for j in zero..TABLE_LEN - 1 {
            (t.bi[j + 1], t.dbi[j + 1]) = taylor_step(node(j), t.bi[j], t.dbi[j], TABLE_STEP);
        }
        let s = asymptotic_positive(AI_BACKWARD_START);
        let z = zeta(AI_BACKWARD_START);
        let (mut a, mut y, mut dy) = (AI_BACKWARD_START, s.ai_s * (-z).exp(), s.dai_s * (-z).exp());
        while a > TABLE_HALF_WIDTH + 0.5 * TABLE_STEP {
            (y, dy) = taylor_step(a, y, dy, -TABLE_STEP);
            a -= TABLE_STEP;
        }
        t.ai[TABLE_LEN - 1] = y;
        t.dai[TABLE_LEN - 1] = dy;
        for j in (zero + 2..TABLE_LEN).rev() {
            (t.ai[j - 1], t.dai[j - 1]) = taylor_step(node(j), t.ai[j], t.dai[j], -TABLE_STEP);
        }
        t
    })
}

fn zeta(a: f64) -> f64 {
    2.0 / 3.0 * a.abs().powf(1.5)
}

/// Coefficients `u_k` of the Airy asymptotic expansions.
fn u_coeffs() -> &'static [f64] {
    static U: OnceLock<Vec<f64>> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = vec![1.0];
        for k in 1..90 {
            let kf = k as f64;
            let prev = u[k - 1];
            u.push(prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf));
        }
        u
    })
}

fn v_coeff(k: usize) -> f64 {
    let kf = k as f64;
    -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u_coeffs()[k]
}

/// Sums `Σ sign^k c_k / ζ^k` for `k ≡ parity (mod 2)` (or all k when
/// `step == 1`) with optimal truncation.
fn series(coef: impl Fn(usize) -> f64, z: f64, sign: f64, start: usize, step: usize) -> f64 {
    let n_max = u_coeffs().len();
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut k = start;
    let mut alt = 1.0;
    while k < n_max {
        let term = alt * coef(k) / z.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        k += step;
        alt *= sign;
    }
    sum
}

fn asymptotic_positive(a: f64) -> ScaledAiryPair {
    let z = zeta(a);
    let q = a.powf(0.25);
    let sp = PI.sqrt();
    let u = |k: usize| u_coeffs()[k];
    ScaledAiryPair {
        a,
        ai_s: series(u, z, -1.0, 0, 1) / (2.0 * sp * q),
        dai_s: -q * series(v_coeff, z, -1.0, 0, 1) / (2.0 * sp),
        bi_s: series(u, z, 1.0, 0, 1) / (sp * q),
        dbi_s: q * series(v_coeff, z, 1.0, 0, 1) / sp,
        log_scale: z,
    }
}

fn asymptotic_negative(a: f64) -> AiryPair {
    let x = -a;
    let z = zeta(x);
    let q = x.powf(0.25);
    let sp = PI.sqrt();
    let u = |k: usize| u_coeffs()[k];
    let pu = series(u, z, -1.0, 0, 2);
    let qu = series(u, z, -1.0, 1, 2);
    let pv = series(v_coeff, z, -1.0, 0, 2);
    let qv = series(v_coeff, z, -1.0, 1, 2);
    let (s, c) = (z - FRAC_PI_4).sin_cos();
    AiryPair {
        a,
        ai: (c * pu + s * qu) / (sp * q),
        bi: (-s * pu + c * qu) / (sp * q),
        dai: q * (s * pv - c * qv) / sp,
        dbi: q * (c * pv + s * qv) / sp,
    }
}

fn tabulated(a: f64) -> AiryPair {
    let t = table();
    let j = (((a + TABLE_HALF_WIDTH) / TABLE_STEP).round() as usize).min(TABLE_LEN - 1);
    let a0 = node(j);
    let h = a - a0;
    let (ai, dai) = taylor_step(a0, t.ai[j], t.dai[j], h);
    let (bi, dbi) = taylor_step(a0, t.bi[j], t.dbi[j], h);
    AiryPair { a, ai, bi, dai, dbi }
}

/// `Ai(a), Bi(a), Ai'(a), Bi'(a)`.
///
/// Fails with [`Error::AiryRange`] above [`A_OVERFLOW`], where `Bi`
/// overflows; use [`airy_scaled`] there.
pub fn airy_eval(a: f64) -> Result<AiryPair> {
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "Airy argument", at: a });
    }
    if a.abs() <= TABLE_HALF_WIDTH {
        return Ok(tabulated(a));
    }
    if a < 0.0 {
        return Ok(asymptotic_negative(a));
    }
    if a > A_OVERFLOW {
        return Err(Error::AiryRange { a });
    }
    let s = asymptotic_positive(a);
    let (down, up) = ((-s.log_scale).exp(), s.log_scale.exp());
    Ok(AiryPair {
        a,
        ai: s.ai_s * down,
        dai: s.dai_s * down,
        bi: s.bi_s * up,
        dbi: s.dbi_s * up,
    })
}

/// Overflow-safe Airy values; see [`ScaledAiryPair`].
pub fn airy_scaled(a: f64) -> Result<ScaledAiryPair> {
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "Airy argument", at: a });
    }
    if a > TABLE_HALF_WIDTH {
        return Ok(asymptotic_positive(a));
    }
    let p = if a < -TABLE_HALF_WIDTH { asymptotic_negative(a) } else { tabulated(a) };
    if a <= 0.0 {
        return Ok(ScaledAiryPair { a, ai_s: p.ai, bi_s: p.bi, dai_s: p.dai, dbi_s: p.dbi, log_scale: 0.0 });
    }
    let z = zeta(a);
    let (up, down) = (z.exp(), (-z).exp());
    Ok(ScaledAiryPair {
        a,
        ai_s: p.ai * up,
        dai_s: p.dai * up,
        bi_s: p.bi * down,
        dbi_s: p.dbi * down,
        log_scale: z,
    })
}

/// Kernels of the mixture `Ai(a) + t·Bi(a)`:
///
/// ```text
/// y1 = (Ai' + t·Bi') / (Ai + t·Bi)
/// y2 = (−8a²y1² − 3 − 4a·y1 + 8a³) / 30
/// y1' = a − y1²
/// y2' = −2·y1·y2 + (2a·y1' − y1) / 3
/// ```
///
/// Fails with [`Error::Pole`] where the mixture vanishes.
pub fn mixture_kernels(a: f64, t: Complex64) -> Result<MixtureLogDeriv> {
    let s = airy_scaled(a)?;
    let (num, den, scale) = if t == Complex64::new(0.0, 0.0) {
        (Complex64::from(s.dai_s), Complex64::from(s.ai_s), s.ai_s.abs())
    } else {
        // Ai carries e^{-ζ}, Bi carries e^{+ζ}: rescale both by e^{-ζ}.
        let r = (-2.0 * s.log_scale).exp();
        (
            s.dai_s * r + t * s.dbi_s,
            s.ai_s * r + t * s.bi_s,
            (s.ai_s * r).abs() + t.norm() * s.bi_s.abs(),
        )
    };
    if den.norm() <= 32.0 * f64::EPSILON * scale {
        return Err(Error::Pole { a, t });
    }
    let y1 = num / den;
    Ok(kernels_from_y1(a, t, y1))
}

pub(crate) fn kernels_from_y1(a: f64, t: Complex64, y1: Complex64) -> MixtureLogDeriv {
    let y2 = (-8.0 * a * a * y1 * y1 - 3.0 - 4.0 * a * y1 + 8.0 * a * a * a) / 30.0;
    let dy1 = a - y1 * y1;
    let dy2 = -2.0 * y1 * y2 + (2.0 * a * dy1 - y1) / 3.0;
    MixtureLogDeriv { t, a, y1, y2, dy1, dy2 }
}

/// Exact Wronskian `Ai·Bi' − Ai'·Bi`.
pub const WRONSKIAN: f64 = FRAC_1_PI;
