//! Family averages over |a| <= A, |b| <= B: the Lang-Trotter and
//! Sato-Tate left-hand sides, CM detection, the CM-family contribution,
//! and the exact character-sum decomposition M(p) + E1(p) + E2(p).
//!
//! Sweeps run prime-major in parallel: each prime owns its residue table
//! and an a_p memo keyed by (a mod p, b mod p), so no shared mutable state
//! exists and results are independent of the worker count. A serial
//! curve-major path with a whole-prime LRU cache is kept and tested for
//! identical output.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{
    lt_prediction, st_prediction, lt_conditions, st_conditions, ExperimentConfig,
};
use crate::curvecount::{iso_classes, CurveModel, SatoTateWindow, TraceContext};
use crate::error::{Error, Result};
use crate::ffield::{sieve_primes, CharacterTable};
use crate::report::ExperimentReport;

/// The thirteen rational CM j-invariants; membership is the CM test for
/// curves off the a = 0 and b = 0 axes.
pub const CM_J_INVARIANTS: [i64; 13] = [
    0,
    1728,
    -3375,
    8000,
    54000,
    287496,
    -32768,
    16581375,
    -884736,
    -12288000,
    -884736000,
    -147197952000,
    -262537412640768000,
];

/// A rectangular curve family |a| <= A, |b| <= B with exclusion flags.
#[derive(Debug, Clone, Copy)]
pub struct FamilyWindow {
    pub a_bound: u64,
    pub b_bound: u64,
    pub exclude_zero_ab: bool,
    pub exclude_all_cm: bool,
}

impl FamilyWindow {
    pub fn new(a_bound: u64, b_bound: u64) -> Result<Self> {
        if a_bound == 0 || b_bound == 0 {
            return Err(Error::domain("family window: A, B must be >= 1"));
        }
        Ok(FamilyWindow {
            a_bound,
            b_bound,
            exclude_zero_ab: false,
            exclude_all_cm: false,
        })
    }

    /// The averages' normalization constant is 4AB regardless of exclusions.
    pub fn normalization(&self) -> f64 {
        4.0 * self.a_bound as f64 * self.b_bound as f64
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct SweepMeta {
    singular_skipped: u64,
    zero_ab_skipped: u64,
    cm_skipped: u64,
}

/// Curve with CM inside a window, with its j-invariant when integral.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CmCurve {
    pub a: i64,
    pub b: i64,
    pub j: Option<i64>,
}

pub fn is_cm(curve: &CurveModel) -> bool {
    if curve.is_singular() {
        return false;
    }
    if curve.a == 0 || curve.b == 0 {
        return true;
    }
    match curve.j_invariant() {
        Some((num, 1)) => i64::try_from(num)
            .map(|j| CM_J_INVARIANTS.contains(&j))
            .unwrap_or(false),
        _ => false,
    }
}

/// Every CM curve in the window (axis families plus the thirteen-j list).
pub fn cm_scan(window: &FamilyWindow) -> Vec<CmCurve> {
    let mut out = Vec::new();
    for a in -(window.a_bound as i64)..=window.a_bound as i64 {
        for b in -(window.b_bound as i64)..=window.b_bound as i64 {
            let curve = CurveModel::new(a, b);
            if is_cm(&curve) {
                let j = curve.j_invariant().and_then(|(num, den)| {
                    (den == 1).then(|| i64::try_from(num).ok()).flatten()
                });
                out.push(CmCurve { a, b, j });
            }
        }
    }
    out
}

fn family_members(window: &FamilyWindow) -> (Vec<CurveModel>, SweepMeta) {
    let mut curves = Vec::new();
    let mut meta = SweepMeta::default();
    for a in -(window.a_bound as i64)..=window.a_bound as i64 {
        for b in -(window.b_bound as i64)..=window.b_bound as i64 {
            let curve = CurveModel::new(a, b);
            if window.exclude_zero_ab && (a == 0 || b == 0) {
                meta.zero_ab_skipped += 1;
                continue;
            }
            if curve.is_singular() {
                meta.singular_skipped += 1;
                continue;
            }
            if window.exclude_all_cm && is_cm(&curve) {
                meta.cm_skipped += 1;
                continue;
            }
            curves.push(curve);
        }
    }
    (curves, meta)
}

/// Per-prime pass shared by both sweeps: calls `visit(curve_index, a_p)`
/// for every good-reduction member, memoizing a_p on residue pairs.
fn prime_pass<F: FnMut(usize, i64)>(p: u64, curves: &[CurveModel], mut visit: F) -> Result<()> {
    let ctx = TraceContext::new(p)?;
    let mut memo: HashMap<(u64, u64), i64> = HashMap::new();
    for (i, curve) in curves.iter().enumerate() {
        if !curve.good_reduction(p) {
            continue;
        }
        let key = (
            curve.a.rem_euclid(p as i64) as u64,
            curve.b.rem_euclid(p as i64) as u64,
        );
        let a_p = match memo.get(&key) {
            Some(&v) => v,
            None => {
                let v = ctx.ap_residues(key.0, key.1);
                memo.insert(key, v);
                v
            }
        };
        visit(i, a_p);
    }
    Ok(())
}

fn sweep_primes(x: f64) -> Result<Vec<u64>> {
    if x < 5.0 {
        return Ok(Vec::new());
    }
    Ok(sieve_primes(x.floor() as u64)?
        .iter()
        .filter(|&p| p > 3)
        .collect())
}

/// (1/4AB) sum over the family of pi^r(x), with the hypothesis verdicts.
pub fn lt_average(
    window: &FamilyWindow,
    r: i64,
    x: f64,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let (curves, meta) = family_members(window);
    let primes = sweep_primes(x)?;
    let total: u64 = primes
        .par_iter()
        .map(|&p| {
            let mut count = 0u64;
            prime_pass(p, &curves, |_, a_p| {
                if a_p == r {
                    count += 1;
                }
            })?;
            Ok(count)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    let empirical = total as f64 / window.normalization();
    let prediction = lt_prediction(r, x, cfg.cutoff)?;
    let warning = curves.is_empty().then(|| "empty family window".to_string());
    Ok(ExperimentReport {
        kind: "lt-average".into(),
        a_bound: window.a_bound,
        b_bound: window.b_bound,
        r: Some(r),
        alpha: None,
        beta: None,
        x,
        family_size: curves.len() as u64,
        singular_skipped: meta.singular_skipped,
        zero_ab_skipped: meta.zero_ab_skipped,
        cm_skipped: meta.cm_skipped,
        empirical,
        predicted: prediction.value,
        ratio: empirical / prediction.value,
        verdicts: lt_conditions(window.a_bound, window.b_bound, x, cfg),
        warning,
    })
}

/// (1/4AB) sum over the family of Theta(alpha, beta; x), with the hypothesis
/// verdicts. The averaged sums start at |a|, |b| >= 1, so the zero-axis
/// exclusion is forced on.
pub fn st_average(
    window: &FamilyWindow,
    st: &SatoTateWindow,
    x: f64,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let mut window = *window;
    window.exclude_zero_ab = true;
    let (curves, meta) = family_members(&window);
    let primes = sweep_primes(x)?;
    // per-prime partials collected in increasing-p order, then reduced
    let partials: Vec<f64> = primes
        .par_iter()
        .map(|&p| {
            let log_p = (p as f64).ln();
            let inv_2sqrt = 1.0 / (2.0 * (p as f64).sqrt());
            let mut sum = 0.0f64;
            prime_pass(p, &curves, |_, a_p| {
                if st.contains(a_p as f64 * inv_2sqrt) {
                    sum += log_p;
                }
            })?;
            Ok(sum)
        })
        .collect::<Result<Vec<f64>>>()?;
    let empirical: f64 = partials.iter().sum::<f64>() / window.normalization();
    let predicted = st_prediction(st, x);
    let warning = curves.is_empty().then(|| "empty family window".to_string());
    Ok(ExperimentReport {
        kind: "st-average".into(),
        a_bound: window.a_bound,
        b_bound: window.b_bound,
        r: None,
        alpha: Some(st.alpha()),
        beta: Some(st.beta()),
        x,
        family_size: curves.len() as u64,
        singular_skipped: meta.singular_skipped,
        zero_ab_skipped: meta.zero_ab_skipped,
        cm_skipped: meta.cm_skipped,
        empirical,
        predicted,
        ratio: empirical / predicted,
        verdicts: st_conditions(window.a_bound, window.b_bound, x, st, cfg),
        warning,
    })
}

/// Serial curve-major route with per-prime context reuse; must produce the
/// same totals as the parallel prime-major sweeps.
pub fn lt_average_curve_major(window: &FamilyWindow, r: i64, x: f64) -> Result<f64> {
    let (curves, _) = family_members(window);
    let primes = sweep_primes(x)?;
    let mut contexts: HashMap<u64, TraceContext> = HashMap::new();
    let mut total = 0u64;
    for curve in &curves {
        for &p in &primes {
            if !curve.good_reduction(p) {
                continue;
            }
            let ctx = match contexts.entry(p) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => e.insert(TraceContext::new(p)?),
            };
            if ctx.ap(curve.a, curve.b)? == r {
                total += 1;
            }
        }
    }
    Ok(total as f64 / window.normalization())
}

/// Result of the CM-family average of pi^0 compared with its two scales.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CmContribution {
    pub a_bound: u64,
    pub b_bound: u64,
    pub x: f64,
    /// (1/4AB) (sum over 1<=|a|<=A of pi^0_{E(a,0)} + sum over 1<=|b|<=B of pi^0_{E(0,b)}).
    pub value: f64,
    /// (1/A + 1/B) pi(x).
    pub pi_scale: f64,
    /// (pi/3) pi_{1/2}(x).
    pub lt_scale: f64,
}

/// Trace-zero count summed over the axis CM sub-family, with comparison scales.
pub fn cm_family_contribution(a_bound: u64, b_bound: u64, x: f64) -> Result<CmContribution> {
    if a_bound == 0 || b_bound == 0 {
        return Err(Error::domain("cm_family_contribution: A, B >= 1"));
    }
    let primes = sweep_primes(x)?;
    let mut curves: Vec<CurveModel> = Vec::new();
    for a in 1..=a_bound as i64 {
        curves.push(CurveModel::new(a, 0));
        curves.push(CurveModel::new(-a, 0));
    }
    for b in 1..=b_bound as i64 {
        curves.push(CurveModel::new(0, b));
        curves.push(CurveModel::new(0, -b));
    }
    let total: u64 = primes
        .par_iter()
        .map(|&p| {
            let mut count = 0u64;
            prime_pass(p, &curves, |_, a_p| {
                if a_p == 0 {
                    count += 1;
                }
            })?;
            Ok(count)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    let value = total as f64 / (4.0 * a_bound as f64 * b_bound as f64);
    let pi_x = if x >= 2.0 {
        sieve_primes(x.floor() as u64)?.count_upto(x) as f64
    } else {
        0.0
    };
    Ok(CmContribution {
        a_bound,
        b_bound,
        x,
        value,
        pi_scale: (1.0 / a_bound as f64 + 1.0 / b_bound as f64) * pi_x,
        lt_scale: std::f64::consts::PI / 3.0 * crate::analytic::pi_half(x.max(2.0))?,
    })
}

/// The three pieces of the character decomposition at one prime, with the
/// brute-force count they must reproduce.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecompositionResult {
    pub p: u64,
    pub r: i64,
    pub a_bound: u64,
    pub b_bound: u64,
    pub m_term: (f64, f64),
    pub e1_term: (f64, f64),
    pub e2_term: (f64, f64),
    pub brute_count: u64,
}

impl DecompositionResult {
    pub fn total(&self) -> Complex64 {
        Complex64::new(
            self.m_term.0 + self.e1_term.0 + self.e2_term.0,
            self.m_term.1 + self.e1_term.1 + self.e2_term.1,
        )
    }

    pub fn mismatch(&self) -> f64 {
        (self.total() - Complex64::new(self.brute_count as f64, 0.0)).norm()
    }
}

fn two_sided_char_sums(table: &CharacterTable, bound: u64) -> Vec<Complex64> {
    let p = table.p();
    let ord = p - 1;
    let mut hist = vec![0u32; ord as usize];
    for n in 1..=bound {
        if n % p != 0 {
            hist[table.dlog(n % p) as usize] += 1;
        }
    }
    let half = table.dlog(p - 1); // dlog(-1) = (p-1)/2
    (0..ord)
        .map(|t| {
            let mut s = Complex64::new(0.0, 0.0);
            for (e, &c) in hist.iter().enumerate() {
                if c > 0 {
                    s += c as f64 * crate::ffield::root_of_unity(ord, t * e as u64 % ord);
                }
            }
            s * (Complex64::new(1.0, 0.0) + crate::ffield::root_of_unity(ord, t * half % ord))
        })
        .collect()
}

/// The quadruple-sum pieces (M, E1, E2) for a given representative system.
pub(crate) fn decompose_with_reps(
    p: u64,
    a_bound: u64,
    b_bound: u64,
    reps: &[(u64, u64)],
) -> Result<(Complex64, Complex64, Complex64)> {
    let table = CharacterTable::build(p)?;
    let ord = p - 1;
    let quartic = ord / 4; // the biquadratic symbol is chi_{(p-1)/4}
    let s_a = two_sided_char_sums(&table, a_bound);
    let s_b = two_sided_char_sums(&table, b_bound);

    let mut m_term = Complex64::new(0.0, 0.0);
    let mut e1_term = Complex64::new(0.0, 0.0);
    let mut e2_term = Complex64::new(0.0, 0.0);
    for k in 1..=4u64 {
        for j in 0..ord {
            let t_a = (k * quartic + 3 * j) % ord;
            let t_b = (ord - 2 * j % ord) % ord;
            let mut coeff = Complex64::new(0.0, 0.0);
            for &(u, v) in reps {
                // (u/p)_4^{-k} conj(chi)^3(u) chi^2(v) = chi_{-t_a}(u) chi_{-t_b}(v)
                let e = ((ord - t_a) * table.dlog(u) + (ord - t_b) * table.dlog(v)) % ord;
                coeff += crate::ffield::root_of_unity(ord, e);
            }
            let term = coeff * s_a[t_a as usize] * s_b[t_b as usize];
            match (t_a == 0, t_b == 0) {
                (true, true) => m_term += term,
                (false, false) => e2_term += term,
                _ => e1_term += term,
            }
        }
    }
    let scale = 1.0 / (4.0 * ord as f64);
    Ok((m_term * scale, e1_term * scale, e2_term * scale))
}

/// Evaluate the decomposition at p = 1 mod 4: the quadruple character sum
/// split into M(p), E1(p), E2(p), against the brute-force family count
/// #{|a| <= A, |b| <= B : p does not divide ab, a_p(E(a,b)) = r}.
pub fn decompose_count(
    p: u64,
    r: i64,
    a_bound: u64,
    b_bound: u64,
    cap: u64,
) -> Result<DecompositionResult> {
    if p % 4 != 1 || p <= 3 {
        return Err(Error::domain(format!(
            "decompose_count: p = {p} is not a prime = 1 mod 4 (the p = 3 mod 4 analogue is undisplayed)"
        )));
    }
    if a_bound == 0 || b_bound == 0 {
        return Err(Error::domain("decompose_count: A, B >= 1"));
    }
    let classes = iso_classes(p, r, cap)?;
    let reps: Vec<(u64, u64)> = classes
        .representatives
        .iter()
        .copied()
        .filter(|&(u, v)| u != 0 && v != 0)
        .collect();
    let (m_term, e1_term, e2_term) = decompose_with_reps(p, a_bound, b_bound, &reps)?;

    let ctx = TraceContext::new(p)?;
    let mut brute_count = 0u64;
    for a in -(a_bound as i64)..=a_bound as i64 {
        if a.rem_euclid(p as i64) == 0 {
            continue;
        }
        for b in -(b_bound as i64)..=b_bound as i64 {
            if b.rem_euclid(p as i64) == 0 {
                continue;
            }
            match ctx.ap(a, b) {
                Ok(a_p) if a_p == r => brute_count += 1,
                _ => {}
            }
        }
    }
    Ok(DecompositionResult {
        p,
        r,
        a_bound,
        b_bound,
        m_term: (m_term.re, m_term.im),
        e1_term: (e1_term.re, e1_term.im),
        e2_term: (e2_term.re, e2_term.im),
        brute_count,
    })
}
