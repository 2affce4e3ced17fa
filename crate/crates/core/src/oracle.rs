//! Reference solutions: closed forms where they exist and a Numerov
//! shooting solver otherwise.

use std::f64::consts::PI;

use serde::Serialize;

use crate::airy::airy_eval;
use crate::numerics::{find_root, Bracket};
use crate::{Error, Result};

/// Default number of Numerov steps.
pub const NUMEROV_STEPS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Numerov,
    OscillatorClosedForm,
    AiryClosedForm,
}

/// An "exact" level with its unit-normalized wave function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub k: f64,
    pub l: u32,
    pub n: u32,
    pub e_ex: f64,
    pub grid: Vec<f64>,
    pub psi_ex: Vec<f64>,
    pub method: Method,
    /// Numerov only: the energy from the half-resolution grid.
    pub e_half_resolution: Option<f64>,
}

impl ReferenceSolution {
    /// `ψ_ex(x)`: closed form where available, otherwise cubic
    /// interpolation of the grid (zero beyond it).
    pub fn psi_at(&self, x: f64) -> f64 {
        match self.method {
            Method::OscillatorClosedForm => oscillator_psi(self.l, self.n, x),
            Method::AiryClosedForm => airy_psi(self.e_ex, x),
            Method::Numerov => interpolate(&self.grid, &self.psi_ex, x),
        }
    }
}

fn interpolate(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    if x <= grid[0] || x >= grid[n - 1] || n < 4 {
        return 0.0;
    }
    let h = grid[1] - grid[0];
    let i = (((x - grid[0]) / h).floor() as usize).clamp(1, n - 3);
    let mut sum = 0.0;
    for j in i - 1..=i + 2 {
        let mut w = 1.0;
        for m in i - 1..=i + 2 {
            if m != j {
                w *= (x - grid[m]) / (grid[j] - grid[m]);
            }
        }
        sum += w * values[j];
    }
    sum
}

/// Generalized Laguerre polynomial `L_n^{(α)}(z)` by recurrence.
fn laguerre(n: u32, alpha: f64, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + alpha - z);
    if n == 0 {
        return prev;
    }
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + alpha - z) * cur - (mf + alpha) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `Γ(m + ½) = √π·∏_{j=1..m}(j − ½)`.
fn gamma_half(m: u32) -> f64 {
    (1..=m).fold(PI.sqrt(), |acc, j| acc * (j as f64 - 0.5))
}

fn oscillator_psi(l: u32, n: u32, x: f64) -> f64 {
    let fact: f64 = (1..=n).map(|j| j as f64).product();
    let norm = (2.0 * fact / gamma_half(n + l + 1)).sqrt();
    norm * x.powi(l as i32 + 1) * (-0.5 * x * x).exp() * laguerre(n, l as f64 + 0.5, x * x)
}

/// `Ai(x − e)/Ai'(−e)`: unit norm since `∫₀^∞ Ai(x + a)² dx = Ai'(a)²` at a zero `a`.
fn airy_psi(e: f64, x: f64) -> f64 {
    let d = airy_eval(-e).map(|p| p.dai).unwrap_or(f64::NAN);
    if x - e > 100.0 {
        return 0.0;
    }
    airy_eval(x - e).map(|p| p.ai / d).unwrap_or(0.0)
}

/// `n`-th zero (from 0) of `Ai`, negative.
pub fn airy_zero(n: u32) -> Result<f64> {
    let t = 3.0 * PI * (4.0 * n as f64 + 3.0) / 8.0;
    let guess = -t.powf(2.0 / 3.0) * (1.0 + 5.0 / (48.0 * t * t));
    let ai = |a: f64| airy_eval(a).map(|p| p.ai).unwrap_or(f64::NAN);
    let mut w = 0.05;
    loop {
        if let Ok(b) = Bracket::new(ai, guess - w, guess + w) {
            return find_root(ai, b, 1e-15);
        }
        w *= 2.0;
        if w > 1.0 {
            return Err(Error::Oracle(format!("could not bracket Airy zero {n}")));
        }
    }
}

fn uniform_grid(x_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| x_max * i as f64 / steps as f64).collect()
}

fn sampled(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
    let psi = grid.iter().map(|&x| f(x)).collect();
    (grid, psi)
}

pub fn oscillator_exact(l: u32, n: u32) -> ReferenceSolution {
    let e_ex = (4 * n + 2 * l + 3) as f64;
    let (grid, psi_ex) = sampled(uniform_grid(3.0 * e_ex.sqrt(), 4000), |x| oscillator_psi(l, n, x));
    ReferenceSolution { k: 2.0, l, n, e_ex, grid, psi_ex, method: Method::OscillatorClosedForm, e_half_resolution: None }
}

pub fn linear_l0_exact(n: u32) -> Result<ReferenceSolution> {
    let e_ex = -airy_zero(n)?;
    let (grid, psi_ex) = sampled(uniform_grid(e_ex + 14.0, 4000), |x| airy_psi(e_ex, x));
    Ok(ReferenceSolution { k: 1.0, l: 0, n, e_ex, grid, psi_ex, method: Method::AiryClosedForm, e_half_resolution: None })
}

/// Closed form when one exists for `(k, l)`, Numerov otherwise.
pub fn reference(k: f64, l: u32, n: u32) -> Result<ReferenceSolution> {
    if k == 2.0 {
        Ok(oscillator_exact(l, n))
    } else if k == 1.0 && l == 0 {
        linear_l0_exact(n)
    } else {
        numerov_solve(k, l, n, 1e-12)
    }
}

struct Shooter {
    k: f64,
    l: f64,
    x_max: f64,
    steps: usize,
}

struct Shot {
    psi: Vec<f64>,
    mismatch: f64,
    nodes: usize,
}

impl Shooter {
    fn potential(&self, x: f64) -> f64 {
        x.powf(self.k) + self.l * (self.l + 1.0) / (x * x)
    }

    fn h(&self) -> f64 {
        self.x_max / self.steps as f64
    }

    /// Outer classical turning point of `V − e`.
    fn turning_point(&self, e: f64) -> f64 {
        let f = |x: f64| self.potential(x) - e;
        let xm = if self.l > 0.0 {
            (2.0 * self.l * (self.l + 1.0) / self.k).powf(1.0 / (self.k + 2.0))
        } else {
            0.0
        };
        let mut hi = xm.max(1.0);
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        let lo = if xm > 0.0 { xm } else { 1e-12 };
        match Bracket::new(f, lo, hi) {
            Ok(b) => find_root(f, b, 1e-14).unwrap_or(hi),
            Err(_) => hi,
        }
    }

    fn outward(&self, e: f64) -> Vec<f64> {
        let n = self.steps;
        let h = self.h();
        let h12 = h * h / 12.0;
        let (k, l) = (self.k, self.l);
        // ψ ≈ x^{l+1}[1 − e x²/(2(2l+3)) + x^{k+2}/((k+2)(k+2l+3))]
        let series = |x: f64| {
            x.powf(l + 1.0) * (1.0 - e * x * x / (2.0 * (2.0 * l + 3.0)) + x.powf(k + 2.0) / ((k + 2.0) * (k + 2.0 * l + 3.0)))
        };
        let mut psi = vec![0.0; n + 1];
        psi[1] = series(h);
        psi[2] = series(2.0 * h);
        let w = |x: f64| 1.0 - h12 * (self.potential(x) - e);
        let mut w_prev = w(h);
        let mut w_cur = w(2.0 * h);
        for i in 2..n {
            let x_next = (i + 1) as f64 * h;
            let w_next = w(x_next);
            psi[i + 1] = ((12.0 - 10.0 * w_cur) * psi[i] - w_prev * psi[i - 1]) / w_next;
            if psi[i + 1].abs() > 1e200 {
                for v in psi[..=i + 1].iter_mut() {
                    *v *= 1e-200;
                }
            }
            w_prev = w_cur;
            w_cur = w_next;
        }
        psi
    }

    fn inward(&self, e: f64, stop: usize) -> Vec<f64> {
        let n = self.steps;
        let h = self.h();
        let h12 = h * h / 12.0;
        let mut psi = vec![0.0; n + 1];
        let kappa = |x: f64| (self.potential(x) - e).max(0.0).sqrt();
        let xn = n as f64 * h;
        psi[n] = 1e-250;
        psi[n - 1] = psi[n] * (0.5 * h * (kappa(xn) + kappa(xn - h))).exp();
        let w = |x: f64| 1.0 - h12 * (self.potential(x) - e);
        let mut w_next = w(xn);
        let mut w_cur = w(xn - h);
        for i in (stop..n - 1).rev() {
            let w_prev = w(i as f64 * h);
            psi[i] = ((12.0 - 10.0 * w_cur) * psi[i + 1] - w_next * psi[i + 2]) / w_prev;
            if psi[i].abs() > 1e200 {
                for v in psi[i..].iter_mut() {
                    *v *= 1e-200;
                }
            }
            w_next = w_cur;
            w_cur = w_prev;
        }
        psi
    }

    fn shoot(&self, e: f64) -> Shot {
        let out = self.outward(e);
        let nodes = out.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        let m = ((self.turning_point(e) / self.h()).round() as usize).clamp(8, self.steps - 8);
        let inn = self.inward(e, m - 1);
        let scale = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let so = scale(&out[..=m + 1]);
        let si = scale(&inn[m - 1..]);
        let (o0, o1, o2) = (out[m - 1] / so, out[m] / so, out[m + 1] / so);
        let (i0, i1, i2) = (inn[m - 1] / si, inn[m] / si, inn[m + 1] / si);
        // Discrete Wronskian of the two solutions across m.
        let mismatch = (o2 - o0) * i1 - o1 * (i2 - i0);
        let mut psi = out;
        let ratio = o1 / i1 * so / si;
        for j in m + 1..=self.steps {
            psi[j] = inn[j] * ratio;
        }
        Shot { psi, mismatch, nodes }
    }
}

fn solve_on(k: f64, l: u32, n: u32, steps: usize, tol: f64) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let lf = l as f64;
    let vmin = if l == 0 {
        0.0
    } else {
        let xm = (2.0 * lf * (lf + 1.0) / k).powf(1.0 / (k + 2.0));
        xm.powf(k) + lf * (lf + 1.0) / (xm * xm)
    };
    let mut shooter = Shooter { k, l: lf, x_max: 1.0, steps };
    let count = |sh: &mut Shooter, e: f64| {
        sh.x_max = 3.0 * e.max(1.0).powf(1.0 / k);
        sh.shoot(e).nodes
    };
    // Node-count bracketing: count(e) = number of levels below e.
    let mut hi = vmin + 1.0;
    while count(&mut shooter, hi) <= n as usize {
        hi = vmin + 2.0 * (hi - vmin);
        if hi > 1e8 {
            return Err(Error::Oracle("node-count bracket not found".into()));
        }
    }
    let mut lo = vmin;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(&mut shooter, mid) <= n as usize {
            lo = mid;
        } else {
            hi = mid;
        }
        let (cl, ch) = (count(&mut shooter, lo), count(&mut shooter, hi));
        if cl == n as usize && ch == n as usize + 1 {
            break;
        }
    }
    // Fix the grid for the root search at the bracket's upper end.
    shooter.x_max = 3.0 * hi.max(1.0).powf(1.0 / k);
    let f = |e: f64| shooter.shoot(e).mismatch;
    let bracket = Bracket::new(f, lo, hi).map_err(|_| Error::Oracle(format!("matching mismatch does not change sign on [{lo}, {hi}]")))?;
    let e = find_root(f, bracket, tol)?;
    let shot = shooter.shoot(e);
    let peak = shot.psi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let nodes = shot
        .psi
        .iter()
        .filter(|v| v.abs() > 1e-12 * peak)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[0] * w[1] < 0.0)
        .count();
    if nodes != n as usize {
        return Err(Error::Oracle(format!("node count {nodes} ≠ {n} at e = {e}")));
    }
    let grid = uniform_grid(shooter.x_max, steps);
    let mut psi = shot.psi;
    // Composite Simpson normalization.
    let h = shooter.h();
    let mut s = psi[0] * psi[0] + psi[steps] * psi[steps];
    for (i, v) in psi.iter().enumerate().take(steps).skip(1) {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * v * v;
    }
    let norm = (s * h / 3.0).sqrt();
    let sign = if psi[1] < 0.0 { -1.0 } else { 1.0 };
    for v in psi.iter_mut() {
        *v *= sign / norm;
    }
    Ok((e, grid, psi))
}

/// Numerov shooting for `−ψ'' + (x^k + l(l+1)/x²)ψ = eψ`.
///
/// Outward from the origin series, inward from `x_max = 3·e^{1/k}`, matched
/// at the outer turning point; the level is bracketed by node counting.
/// The result carries the energy from a half-resolution run as evidence of
/// convergence.
pub fn numerov_solve(k: f64, l: u32, n: u32, tol: f64) -> Result<ReferenceSolution> {
    numerov_solve_with(k, l, n, tol, NUMEROV_STEPS)
}

pub fn numerov_solve_with(k: f64, l: u32, n: u32, tol: f64, steps: usize) -> Result<ReferenceSolution> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidProblem(format!("k must be ≥ 1, got {k}")));
    }
    let steps = steps + steps % 2;
    let (e, grid, psi_ex) = solve_on(k, l, n, steps, tol)?;
    let (e_half, _, _) = solve_on(k, l, n, steps / 2, tol)?;
    Ok(ReferenceSolution { k, l, n, e_ex: e, grid, psi_ex, method: Method::Numerov, e_half_resolution: Some(e_half) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson_norm(r: &ReferenceSolution) -> f64 {
        let h = r.grid[1] - r.grid[0];
        let n = r.grid.len() - 1;
        let mut s = r.psi_ex[0].powi(2) + r.psi_ex[n].powi(2);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * r.psi_ex[i].powi(2);
        }
        s * h / 3.0
    }

    #[test]
    fn airy_zeros() {
        let want = [-2.338_107_410_459_767, -4.087_949_444_130_971, -5.520_559_828_095_551];
        for (n, z) in want.iter().enumerate() {
            assert!((airy_zero(n as u32).unwrap() - z).abs() < 1e-13);
        }
        assert!((airy_zero(9).unwrap() + 12.828_776_752_865_757).abs() < 1e-11);
    }

    #[test]
    fn closed_forms_are_normalized() {
        for (l, n) in [(0, 0), (1, 1), (2, 2)] {
            let r = oscillator_exact(l, n);
            assert_eq!(r.e_ex, (4 * n + 2 * l + 3) as f64);
            assert!((simpson_norm(&r) - 1.0).abs() < 1e-8);
            assert!(r.psi_at(1e-3) > 0.0);
        }
        let r = oscillator_exact(0, 0);
        let x: f64 = 0.7;
        let want = (4.0 / PI.sqrt()).sqrt() * x * (-x * x / 2.0).exp();
        assert!((r.psi_at(x) - want).abs() < 1e-14);
        for n in 0..3 {
            let r = linear_l0_exact(n).unwrap();
            assert!((simpson_norm(&r) - 1.0).abs() < 1e-8, "n={n}");
            assert!(r.psi_at(1e-3) > 0.0);
        }
    }

    #[test]
    fn numerov_matches_closed_forms() {
        for (l, n) in [(0, 0), (1, 1), (2, 2), (0, 2)] {
            let r = numerov_solve(2.0, l, n, 1e-13).unwrap();
            let want = (4 * n + 2 * l + 3) as f64;
            assert!((r.e_ex - want).abs() < 1e-8 * want, "l={l} n={n}: {}", r.e_ex);
            let ex = oscillator_exact(l, n);
            let sup = r.grid.iter().zip(&r.psi_ex).map(|(&x, &p)| (p - ex.psi_at(x)).abs()).fold(0.0, f64::max);
            assert!(sup < 1e-6, "l={l} n={n}: sup {sup}");
        }
        let r = numerov_solve(1.0, 0, 0, 1e-13).unwrap();
        assert!((r.e_ex - 2.338_107_410_459_767).abs() < 1e-8);
    }

    #[test]
    fn numerov_quartic_levels() {
        // Odd levels of the one-dimensional quartic oscillator.
        let r = numerov_solve(4.0, 0, 0, 1e-13).unwrap();
        assert!((r.e_ex - 3.799_673_029_8).abs() < 1e-8, "{}", r.e_ex);
        let half = r.e_half_resolution.unwrap();
        assert!((half / r.e_ex - 1.0).abs() < 1e-8);
        let r = numerov_solve(4.0, 0, 1, 1e-13).unwrap();
        assert!((r.e_ex - 11.644_745_511_4).abs() < 1e-7, "{}", r.e_ex);
    }
}
