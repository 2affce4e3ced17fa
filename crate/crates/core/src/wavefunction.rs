//! The piecewise approximate wave function of a solved level.
//!
//! With `G = ∫ Y` along each region,
//!
//! ```text
//! Ψ(q) = cos φ · exp ∫_{q₋}^{q} Y(t0)                  0 < q < q₋
//!      = e^{A(q)} cos(Θ(q) − φ)                         q₋ ≤ q ≤ q₊
//!      = ½(−1)ⁿ e^{A(q₊)} exp ∫_{q₊}^{q} Y(0)           q > q₊
//! A(q) = ∫_{q₋}^{q} Re Y(+i),   Θ(q) = ∫_{q₋}^{q} ε·Im Y(+i)
//! ```
//!
//! and `ψ(x) = N·x^β·Ψ(x^{1/s})`, `β = (s−1)/(2s)`. Running integrals are
//! cached on node grids; a value between nodes is obtained by integrating
//! from the nearest node.

use num_complex::Complex64;
use serde::Serialize;

use crate::logderiv::eval_y;
use crate::numerics::{integrate_adaptive, integrate_graded};
use crate::spectrum::Eigenstate;
use crate::{Error, Result};

/// Relative tolerance of the cached and local running integrals.
const RUN_TOL: f64 = 1e-13;
/// `ln` of the envelope ratio at which the tail is cut (≈ 1e-16 with margin).
const LOG_CUT: f64 = -40.0;
/// Region-1 nodes stop at this fraction of `q₋`; below it integrals are
/// taken directly in `ln q`.
const INNER_FRACTION: f64 = 1e-8;

/// One sample of the normalized approximate state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveSample {
    pub x: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub h_psi: f64,
}

/// `Ψ`, `dΨ/dq`, `d²Ψ/dq²` and `Q·Ψ` at one `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalPsi {
    pub q: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub d2psi: f64,
    pub q_psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Inner,
    Classical,
    Tail,
}

/// Normalized approximate eigenfunction with cached running integrals.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    state: Eigenstate,
    t0: Complex64,
    norm: f64,
    /// `A(q₊)`.
    log_amplitude: f64,
    q_cut: f64,
    /// `(q, ∫_{q₋}^{q} Y(t0))`, descending in `q`.
    inner: Vec<(f64, f64)>,
    /// `(q, A(q) + i·Θ(q))`, ascending.
    classical: Vec<(f64, Complex64)>,
    /// `(q, ∫_{q₊}^{q} Y(0))`, ascending.
    tail: Vec<(f64, f64)>,
}

fn nearest<T: Copy>(nodes: &[(f64, T)], q: f64, log_scale: bool) -> (f64, T) {
    let dist = |a: f64| if log_scale { (a.ln() - q.ln()).abs() } else { (a - q).abs() };
    *nodes
        .iter()
        .min_by(|a, b| dist(a.0).total_cmp(&dist(b.0)))
        .expect("node lists are never empty")
}

/// `∫_a^b f(q) dq`, optionally through `q = e^u`.
fn run_integral<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, log_scale: bool) -> Result<f64> {
    if log_scale {
        let g = |u: f64| {
            let q = u.exp();
            f(q).map(|v| v * q)
        };
        Ok(integrate_adaptive(g, a.ln(), b.ln(), RUN_TOL)?.value)
    } else {
        Ok(integrate_adaptive(f, a, b, RUN_TOL)?.value)
    }
}

impl WaveFunction {
    /// Builds the caches and normalizes to unit norm on `(0, x_cut)`.
    pub fn new(state: &Eigenstate) -> Result<Self> {
        let p = state.problem;
        let e = state.e;
        let (qm, qp) = (state.q_minus, state.q_plus);
        let t0 = Complex64::from(state.origin.t0);

        let inner = if qm > 0.0 {
            let count = 48;
            let nodes: Vec<f64> = (0..=count)
                .map(|j| qm * INNER_FRACTION.powf(j as f64 / count as f64))
                .collect();
            let mut acc = 0.0;
            let mut out = vec![(qm, 0.0)];
            for w in nodes.windows(2) {
                acc += run_integral(|q| Ok(eval_y(&p, e, q, t0)?.y.re), w[0], w[1], true)?;
                out.push((w[1], acc));
            }
            out
        } else {
            Vec::new()
        };

        let per_piece = 24 * (state.n as usize + 2);
        let mut nodes = Vec::new();
        let mut breaks = vec![qm];
        breaks.extend(state.q_star);
        breaks.push(qp);
        for w in breaks.windows(2) {
            for j in 0..per_piece {
                nodes.push(w[0] + (w[1] - w[0]) * j as f64 / per_piece as f64);
            }
        }
        nodes.push(qp);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut classical = vec![(nodes[0], acc)];
        for w in nodes.windows(2) {
            acc += classical_run(state, w[0], w[1])?;
            classical.push((w[1], acc));
        }
        let log_amplitude = classical.last().expect("non-empty").1.re;
        let a_max = classical.iter().map(|c| c.1.re).fold(f64::NEG_INFINITY, f64::max);

        let step = (qp - qm).max(0.05 * qp) / 16.0;
        let mut tail = vec![(qp, 0.0)];
        let mut acc = 0.0;
        let mut q = qp;
        while acc + log_amplitude - a_max > LOG_CUT {
            if tail.len() > 100_000 {
                return Err(Error::NonFinite { what: "tail cut-off", at: q });
            }
            let next = q + step;
            acc += run_integral(|t| Ok(eval_y(&p, e, t, Complex64::new(0.0, 0.0))?.y.re), q, next, false)?;
            tail.push((next, acc));
            q = next;
        }

        let mut wf = WaveFunction {
            state: *state,
            t0,
            norm: 1.0,
            log_amplitude,
            q_cut: q,
            inner,
            classical,
            tail,
        };
        let norm2 = wf.integrate_x(|s| Ok(s.sample.psi * s.sample.psi))?;
        wf.norm = 1.0 / norm2.sqrt();
        Ok(wf)
    }

    pub fn state(&self) -> &Eigenstate {
        &self.state
    }

    /// Normalization constant `N`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `e^{A(q₊)}`, the interior amplitude carried into the tail.
    pub fn interior_amplitude(&self) -> f64 {
        self.log_amplitude.exp()
    }

    pub fn x_cut(&self) -> f64 {
        self.q_cut.powf(self.state.problem.s)
    }

    /// Images in `x` of `q₋`, `q*`, `q₊` (those that are interior points).
    pub fn matching_points(&self) -> Vec<f64> {
        let s = self.state.problem.s;
        let mut v = Vec::new();
        if self.state.q_minus > 0.0 {
            v.push(self.state.q_minus.powf(s));
        }
        v.extend(self.state.q_star.map(|q| q.powf(s)));
        v.push(self.state.q_plus.powf(s));
        v
    }

    fn region(&self, q: f64) -> Region {
        if q < self.state.q_minus {
            Region::Inner
        } else if q <= self.state.q_plus {
            Region::Classical
        } else {
            Region::Tail
        }
    }

    /// Unnormalized `Ψ` and its `q`-derivatives, evaluated in a given region
    /// (so that one-sided limits at the matching points can be taken).
    fn local_in(&self, q: f64, region: Region) -> Result<LocalPsi> {
        let p = &self.state.problem;
        let e = self.state.e;
        let d = p.q_function(e, q)?;
        let out = match region {
            Region::Inner => {
                let (qn, gn) = nearest(&self.inner, q.max(self.inner.last().unwrap().0), true);
                let g = gn + run_integral(|t| Ok(eval_y(p, e, t, self.t0)?.y.re), qn, q, true)?;
                let y = eval_y(p, e, q, self.t0)?;
                let psi = self.state.origin.phi.cos() * g.exp();
                LocalPsi { q, psi, dpsi: y.y.re * psi, d2psi: (y.dy.re + y.y.re * y.y.re) * psi, q_psi: d.q0 * psi }
            }
            Region::Classical => {
                let (qn, gn) = nearest(&self.classical, q, false);
                let dg = classical_run(&self.state, qn, q)?;
                let g = gn + dg;
                let y = eval_y(p, e, q, Complex64::i())?;
                let (yv, dy) = if d.q1 < 0.0 { (y.y.conj(), y.dy.conj()) } else { (y.y, y.dy) };
                let f = Complex64::new(g.re, g.im - self.state.origin.phi).exp();
                LocalPsi { q, psi: f.re, dpsi: (yv * f).re, d2psi: ((dy + yv * yv) * f).re, q_psi: d.q0 * f.re }
            }
            Region::Tail => {
                let zero = Complex64::new(0.0, 0.0);
                let (qn, gn) = nearest(&self.tail, q, false);
                let g = gn + run_integral(|t| Ok(eval_y(p, e, t, zero)?.y.re), qn, q, false)?;
                let y = eval_y(p, e, q, zero)?;
                let sign = if self.state.n % 2 == 0 { 0.5 } else { -0.5 };
                let psi = sign * (self.log_amplitude + g).exp();
                LocalPsi { q, psi, dpsi: y.y.re * psi, d2psi: (y.dy.re + y.y.re * y.y.re) * psi, q_psi: d.q0 * psi }
            }
        };
        if [out.psi, out.dpsi, out.d2psi].iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::NonFinite { what: "wave function", at: q })
        }
    }

    /// Unnormalized `Ψ(q)` with its derivatives.
    pub fn eval_big_psi(&self, q: f64) -> Result<LocalPsi> {
        if !(q > 0.0) {
            return Err(Error::NonPositiveQ { q });
        }
        self.local_in(q, self.region(q))
    }

    /// Normalized sample together with the residual `Hψ − eψ`.
    pub(crate) fn sample_with_residual(&self, x: f64) -> Result<(WaveSample, f64)> {
        if !(x > 0.0) {
            return Err(Error::NonPositiveQ { q: x });
        }
        let p = &self.state.problem;
        let s = p.s;
        let beta = p.prefactor_exponent();
        let q = x.powf(1.0 / s);
        let l = self.local_in(q, self.region(q))?;
        let xb = x.powf(beta);
        let psi = self.norm * xb * l.psi;
        let dqdx = q / (s * x);
        let dpsi = self.norm * (beta * xb / x * l.psi + xb * l.dpsi * dqdx);
        let residual = self.norm * xb * (l.q_psi - l.d2psi) / (s * s * q.powf(2.0 * s - 2.0));
        let h_psi = self.state.e * psi + residual;
        Ok((WaveSample { x, psi, dpsi, h_psi }, residual))
    }

    pub fn eval_psi(&self, x: f64) -> Result<WaveSample> {
        Ok(self.sample_with_residual(x)?.0)
    }

    /// `(Hψ)(x)` with `ψ''` taken analytically.
    pub fn apply_h(&self, x: f64) -> Result<f64> {
        Ok(self.eval_psi(x)?.h_psi)
    }

    pub fn sample_grid(&self, grid: &[f64]) -> Result<Vec<WaveSample>> {
        for (i, w) in grid.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::UnorderedGrid { index: i + 1 });
            }
        }
        grid.iter().map(|&x| self.eval_psi(x)).collect()
    }

    /// Relative jumps of `Ψ` and `dΨ/dq` across `q₋` (if interior) and `q₊`:
    /// `[(value jump, slope jump)]`.
    pub fn matching_jumps(&self) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        let mut pairs = Vec::new();
        if self.state.q_minus > 0.0 {
            pairs.push((self.state.q_minus, Region::Inner, Region::Classical));
        }
        pairs.push((self.state.q_plus, Region::Classical, Region::Tail));
        for (q, left, right) in pairs {
            let a = self.local_in(q, left)?;
            let b = self.local_in(q, right)?;
            let rel = |u: f64, v: f64| (u - v).abs() / u.abs().max(v.abs()).max(f64::MIN_POSITIVE);
            out.push((rel(a.psi, b.psi), rel(a.dpsi, b.dpsi)));
        }
        Ok(out)
    }

    /// Integrates `f(sample)` over `(0, x_cut)` with panels split at the
    /// matching points.
    pub fn integrate_x<T, F>(&self, mut f: F) -> Result<T>
    where
        T: crate::numerics::Integrand,
        F: FnMut(&WaveSampleFull) -> Result<T>,
    {
        let mut edges = vec![0.0];
        edges.extend(self.matching_points());
        edges.push(self.x_cut());
        let mut total = T::zero();
        for w in edges.windows(2) {
            let g = |x: f64| {
                let (s, r) = self.sample_with_residual(x)?;
                f(&WaveSampleFull { sample: s, residual: r })
            };
            let m = if w[0] == 0.0 { self.state.problem.origin_grading() } else { 1 };
            total = total + integrate_graded(g, w[0], w[1], m, 1e-12)?.value;
        }
        Ok(total)
    }
}

/// A sample plus the residual `Hψ − eψ`, handed to [`WaveFunction::integrate_x`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSampleFull {
    pub sample: WaveSample,
    pub residual: f64,
}

/// `∫_a^b` of the classical integrand, graded toward an endpoint at `q = 0`.
fn classical_run(state: &Eigenstate, a: f64, b: f64) -> Result<Complex64> {
    let m = state.problem.origin_grading();
    let f = |q: f64| classical_integrand(state, q);
    Ok(if a == 0.0 {
        integrate_graded(f, a, b, m, RUN_TOL)?.value
    } else if b == 0.0 {
        -integrate_graded(f, b, a, m, RUN_TOL)?.value
    } else {
        integrate_adaptive(f, a, b, RUN_TOL)?.value
    })
}

fn classical_integrand(state: &Eigenstate, q: f64) -> Result<Complex64> {
    let p = &state.problem;
    let d = p.q_function(state.e, q)?;
    let y = eval_y(p, state.e, q, Complex64::i())?.y;
    let eps = if d.q1 < 0.0 { -1.0 } else { 1.0 };
    Ok(Complex64::new(y.re, eps * y.im))
}
