//! The prediction side: the averaged Lang-Trotter constant C_r as a
//! truncated Euler product with a rigorous tail bound, pi_{1/2}(x) by
//! adaptive quadrature, the semicircle measure F(alpha, beta) in closed
//! form, and the hypothesis verdicts carried on reports.

use std::f64::consts::PI;

use serde::Serialize;

use crate::curvecount::SatoTateWindow;
use crate::error::{Error, Result};
use crate::ffield::sieve_primes;

/// Truncated Euler product for C_r with a rigorous truncation bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LangTrotterConstant {
    pub r: i64,
    pub cutoff: u64,
    /// 2/pi times the product over primes <= cutoff.
    pub value: f64,
    /// Bound on |true - value| from |log tail| <= 2/(cutoff - 1).
    pub tail_bound: f64,
    /// pi/3, available exactly when r = 0.
    pub closed_form: Option<f64>,
}

impl LangTrotterConstant {
    /// Closed form when available, else the truncated product.
    pub fn best_value(&self) -> f64 {
        self.closed_form.unwrap_or(self.value)
    }
}

/// One local factor of the C_r Euler product.
pub(crate) fn euler_factor(r: i64, p: u64) -> f64 {
    let pf = p as f64;
    if r % p as i64 == 0 {
        1.0 / (1.0 - 1.0 / (pf * pf))
    } else {
        pf * (pf * pf - pf - 1.0) / ((pf - 1.0) * (pf * pf - 1.0))
    }
}

pub fn lang_trotter_constant(r: i64, cutoff: u64) -> Result<LangTrotterConstant> {
    if cutoff < 100 {
        return Err(Error::domain(format!(
            "lang_trotter_constant: cutoff {cutoff} < 100"
        )));
    }
    let mut product = 1.0f64;
    for p in sieve_primes(cutoff)?.iter() {
        product *= euler_factor(r, p);
    }
    let value = 2.0 / PI * product;
    let log_tail = 2.0 / (cutoff as f64 - 1.0);
    let tail_bound = value * (log_tail.exp() - 1.0);
    Ok(LangTrotterConstant {
        r,
        cutoff,
        value,
        tail_bound,
        closed_form: (r == 0).then_some(PI / 3.0),
    })
}

/// Adaptive Simpson quadrature to an absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, frm, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, fm, tol, 48)
}

/// pi_{1/2}(x) = int_2^x dt / (2 sqrt(t) log t), to about 1e-10 absolute.
pub fn pi_half(x: f64) -> Result<f64> {
    if x < 2.0 {
        return Err(Error::domain(format!("pi_half: x = {x} < 2")));
    }
    Ok(adaptive_simpson(
        &|t: f64| 1.0 / (2.0 * t.sqrt() * t.ln()),
        2.0,
        x,
        1e-12,
    ))
}

/// Semicircle mass F(alpha, beta) = (2/pi) int sqrt(1 - t^2) dt, closed form.
pub fn sato_tate_measure(alpha: f64, beta: f64) -> Result<f64> {
    let window = SatoTateWindow::new(alpha, beta)?;
    Ok(sato_tate_measure_window(&window))
}

pub fn sato_tate_measure_window(window: &SatoTateWindow) -> f64 {
    let antideriv = |t: f64| t * (1.0 - t * t).sqrt() + t.asin();
    (antideriv(window.beta()) - antideriv(window.alpha())) / PI
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LtPrediction {
    pub value: f64,
    pub constant: LangTrotterConstant,
    pub pi_half: f64,
}

/// C_r * pi_{1/2}(x).
pub fn lt_prediction(r: i64, x: f64, cutoff: u64) -> Result<LtPrediction> {
    let constant = lang_trotter_constant(r, cutoff)?;
    let ph = pi_half(x.max(2.0))?;
    Ok(LtPrediction {
        value: constant.best_value() * ph,
        constant,
        pi_half: ph,
    })
}

/// x * F(alpha, beta).
pub fn st_prediction(window: &SatoTateWindow, x: f64) -> f64 {
    x * sato_tate_measure_window(window)
}

/// Experiment parameters carried on reports; evaluated, never enforced.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExperimentConfig {
    pub epsilon: f64,
    pub big_c: f64,
    pub c: f64,
    /// Euler product truncation for predictions.
    pub cutoff: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            epsilon: 0.05,
            big_c: 4.0,
            c: 1.0,
            cutoff: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
}

impl Verdict {
    pub fn new(name: &str, pass: bool) -> Self {
        Verdict {
            name: name.to_string(),
            pass,
        }
    }
}

/// Fixed-trace average hypotheses: A, B > x^eps and x^(3/2+eps) < AB < x^C.
pub fn lt_conditions(a: u64, b: u64, x: f64, cfg: &ExperimentConfig) -> Vec<Verdict> {
    let ab = a as f64 * b as f64;
    vec![
        Verdict::new(
            "A,B>x^eps",
            a as f64 > x.powf(cfg.epsilon) && b as f64 > x.powf(cfg.epsilon),
        ),
        Verdict::new(
            "x^(3/2+eps)<AB<x^C",
            x.powf(1.5 + cfg.epsilon) < ab && ab < x.powf(cfg.big_c),
        ),
    ]
}

/// Windowed-average hypotheses: the size conditions plus window constraints.
pub fn st_conditions(
    a: u64,
    b: u64,
    x: f64,
    window: &SatoTateWindow,
    cfg: &ExperimentConfig,
) -> Vec<Verdict> {
    let ab = a as f64 * b as f64;
    let f = sato_tate_measure_window(window);
    let gamma_over_beta = window.gamma() / window.beta();
    vec![
        Verdict::new(
            "A,B>x^eps",
            a as f64 > x.powf(cfg.epsilon) && b as f64 > x.powf(cfg.epsilon),
        ),
        Verdict::new(
            "x^(1+eps)/F<AB<x^C",
            x.powf(1.0 + cfg.epsilon) / f < ab && ab < x.powf(cfg.big_c),
        ),
        Verdict::new(
            "x^(eps-5/12)<=gamma/beta<=x^-eps",
            x.powf(cfg.epsilon - 5.0 / 12.0) <= gamma_over_beta
                && gamma_over_beta <= x.powf(-cfg.epsilon),
        ),
        Verdict::new("F>=x^(-1/2+eps)", f >= x.powf(-0.5 + cfg.epsilon)),
        Verdict::new(
            "window avoids -1,0,1",
            window.alpha() > -1.0
                && window.beta() < 1.0
                && (window.alpha() > 0.0 || window.beta() < 0.0),
        ),
    ]
}
