//! Traces of Frobenius for y^2 = x^3 + ax + b over F_p, the counting
//! functions pi_E^r(x) and Theta_E(alpha, beta; x), full (a, b) trace
//! enumeration, and F_p-isomorphism class representatives.
//!
//! Traces come from the Legendre-sum formula a_p = -sum_x (x^3+ax+b | p)
//! with a per-prime quadratic-residue table: O(p) per table, O(1) per
//! lookup. Primes 2 and 3 are excluded everywhere.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::ffield::{is_prime, sieve_primes};

/// Default cap for full (a, b) grid enumeration at one prime.
pub const DEFAULT_ENUM_CAP: u64 = 300;

/// An integral short Weierstrass curve y^2 = x^3 + ax + b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveModel {
    pub a: i64,
    pub b: i64,
}

impl CurveModel {
    pub fn new(a: i64, b: i64) -> Self {
        CurveModel { a, b }
    }

    /// 4a^3 + 27b^2, exactly.
    pub fn discriminant_factor(&self) -> i128 {
        let a = self.a as i128;
        let b = self.b as i128;
        4 * a * a * a + 27 * b * b
    }

    pub fn is_singular(&self) -> bool {
        self.discriminant_factor() == 0
    }

    pub fn good_reduction(&self, p: u64) -> bool {
        self.discriminant_factor().rem_euclid(p as i128) != 0
    }

    /// j-invariant 1728 * 4a^3 / (4a^3 + 27b^2) as a reduced fraction
    /// (numerator, positive denominator); None for singular curves.
    pub fn j_invariant(&self) -> Option<(i128, i128)> {
        let den = self.discriminant_factor();
        if den == 0 {
            return None;
        }
        let a = self.a as i128;
        let num = 6912 * a * a * a;
        let g = num.gcd(&den);
        let (mut num, mut den) = if g != 0 { (num / g, den / g) } else { (0, 1) };
        if den < 0 {
            num = -num;
            den = -den;
        }
        if num == 0 {
            den = 1;
        }
        Some((num, den))
    }
}

/// Per-prime quadratic residue table, the workhorse behind every trace.
pub struct TraceContext {
    p: u64,
    chi: Vec<i8>,
}

impl TraceContext {
    pub fn new(p: u64) -> Result<Self> {
        if p <= 3 || !is_prime(p) {
            return Err(Error::domain(format!(
                "trace context: {p} is not a prime > 3"
            )));
        }
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        let mut x = 1u64;
        while x <= p / 2 {
            chi[(x * x % p) as usize] = 1;
            x += 1;
        }
        Ok(TraceContext { p, chi })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// a_p for residues a, b in [0, p); the caller guarantees nonsingularity.
    pub fn ap_residues(&self, a: u64, b: u64) -> i64 {
        let p = self.p;
        let mut sum = 0i64;
        for x in 0..p {
            let fx = ((x * x % p) * x + a * x + b) % p;
            sum += self.chi[fx as usize] as i64;
        }
        -sum
    }

    /// a_p for an integral curve, with the good-reduction check.
    pub fn ap(&self, a: i64, b: i64) -> Result<i64> {
        let curve = CurveModel::new(a, b);
        if !curve.good_reduction(self.p) {
            return Err(Error::domain(format!(
                "bad reduction: p = {} divides 4a^3 + 27b^2 for (a, b) = ({a}, {b})",
                self.p
            )));
        }
        let ar = a.rem_euclid(self.p as i64) as u64;
        let br = b.rem_euclid(self.p as i64) as u64;
        Ok(self.ap_residues(ar, br))
    }
}

/// Trace of Frobenius of E(a, b) at a good prime p > 3.
pub fn ap(p: u64, a: i64, b: i64) -> Result<i64> {
    TraceContext::new(p)?.ap(a, b)
}

/// Which primes pi_E^r counts: all good p > 3, or only p > B(r).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffMode {
    AllGood,
    BrOnly,
}

/// B(r) = max{3, r, r^2/4}.
pub fn br_cutoff(r: i64) -> f64 {
    (3.0f64).max(r as f64).max(r as f64 * r as f64 / 4.0)
}

/// pi_E^r(x): primes p <= x (above the mode's cutoff) with a_p = r.
pub fn pi_r(curve: &CurveModel, r: i64, x: f64, mode: CutoffMode) -> Result<u64> {
    if curve.is_singular() {
        return Err(Error::domain(format!(
            "pi_r: curve ({}, {}) is singular over Q",
            curve.a, curve.b
        )));
    }
    let cutoff = match mode {
        CutoffMode::AllGood => 3.0,
        CutoffMode::BrOnly => br_cutoff(r),
    };
    if x <= cutoff {
        return Ok(0);
    }
    let primes = sieve_primes(x.floor() as u64)?;
    let mut count = 0u64;
    for p in primes.iter() {
        if (p as f64) <= cutoff || !curve.good_reduction(p) {
            continue;
        }
        if TraceContext::new(p)?.ap(curve.a, curve.b)? == r {
            count += 1;
        }
    }
    Ok(count)
}

/// A normalized-trace window [alpha, beta] within [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatoTateWindow {
    alpha: f64,
    beta: f64,
}

impl SatoTateWindow {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(-1.0..1.0).contains(&alpha) || !(alpha < beta && beta <= 1.0) {
            return Err(Error::domain(format!(
                "window [{alpha}, {beta}] violates -1 <= alpha < beta <= 1"
            )));
        }
        Ok(SatoTateWindow { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.beta - self.alpha
    }

    /// Boundary-inclusive membership: both endpoints belong to the window.
    pub fn contains(&self, t: f64) -> bool {
        self.alpha <= t && t <= self.beta
    }
}

/// Theta_E(alpha, beta; x): sum of log p over good primes 3 < p <= x whose
/// normalized trace lies in the window. Summed in increasing-p order.
pub fn theta(curve: &CurveModel, window: &SatoTateWindow, x: f64) -> Result<f64> {
    if curve.is_singular() {
        return Err(Error::domain(format!(
            "theta: curve ({}, {}) is singular over Q",
            curve.a, curve.b
        )));
    }
    if x <= 3.0 {
        return Ok(0.0);
    }
    let primes = sieve_primes(x.floor() as u64)?;
    let mut sum = 0.0f64;
    for p in primes.iter() {
        if p <= 3 || !curve.good_reduction(p) {
            continue;
        }
        let a_p = TraceContext::new(p)?.ap(curve.a, curve.b)?;
        let t = a_p as f64 / (2.0 * (p as f64).sqrt());
        if window.contains(t) {
            sum += (p as f64).ln();
        }
    }
    Ok(sum)
}

/// Full trace table over all good residue pairs (a, b) mod p.
#[derive(Debug, Clone)]
pub struct TraceEnumeration {
    p: u64,
    traces: Vec<Option<i64>>,
    pub histogram: BTreeMap<i64, u64>,
    pub good_pairs: u64,
}

impl TraceEnumeration {
    pub fn p(&self) -> u64 {
        self.p
    }

    /// a_p for the residue pair, or None if the pair is singular mod p.
    pub fn trace(&self, a: u64, b: u64) -> Option<i64> {
        self.traces[(a * self.p + b) as usize]
    }

    pub fn is_singular_pair(&self, a: u64, b: u64) -> bool {
        self.traces[(a * self.p + b) as usize].is_none()
    }

    pub fn count(&self, r: i64) -> u64 {
        self.histogram.get(&r).copied().unwrap_or(0)
    }
}

/// Enumerate a_p over every good pair (a, b) in F_p^2.
///
/// a_p is constant on orbits of (a, b) -> (t^4 a, t^6 b), so one point count
/// per orbit suffices; the orbit is then filled in O(p).
pub fn enumerate_traces(p: u64, cap: u64) -> Result<TraceEnumeration> {
    if p <= 3 || !is_prime(p) {
        return Err(Error::domain(format!(
            "enumerate_traces: {p} is not a prime > 3"
        )));
    }
    if p > cap {
        return Err(Error::resource(format!(
            "enumerate_traces: p = {p} exceeds enumeration cap {cap}"
        )));
    }
    let ctx = TraceContext::new(p)?;
    let pu = p as usize;
    let mut singular = vec![false; pu * pu];
    for a in 0..p {
        let a3 = (a * a % p) * a % p * 4 % p;
        for b in 0..p {
            let d = (a3 + 27 * (b * b % p)) % p;
            if d == 0 {
                singular[(a * p + b) as usize] = true;
            }
        }
    }
    let t4: Vec<u64> = (0..p).map(|t| t * t % p * t % p * t % p).collect();
    let t6: Vec<u64> = (0..p).map(|t| t4[t as usize] * t % p * t % p).collect();

    let mut traces: Vec<Option<i64>> = vec![None; pu * pu];
    for a in 0..p {
        for b in 0..p {
            let idx = (a * p + b) as usize;
            if singular[idx] || traces[idx].is_some() {
                continue;
            }
            let tr = ctx.ap_residues(a, b);
            for t in 1..p {
                let ia = t4[t as usize] * a % p;
                let ib = t6[t as usize] * b % p;
                traces[(ia * p + ib) as usize] = Some(tr);
            }
        }
    }

    let mut histogram = BTreeMap::new();
    let mut good_pairs = 0u64;
    for tr in traces.iter().flatten() {
        *histogram.entry(*tr).or_insert(0u64) += 1;
        good_pairs += 1;
    }
    Ok(TraceEnumeration {
        p,
        traces,
        histogram,
        good_pairs,
    })
}

/// Representatives of the F_p-isomorphism classes with trace r.
#[derive(Debug, Clone)]
pub struct IsoClassSet {
    pub p: u64,
    pub r: i64,
    /// Lexicographically least pair of each orbit of (u, v) -> (t^4 u, t^6 v).
    pub representatives: Vec<(u64, u64)>,
    /// I_{r,p}: classes whose representatives have both coordinates nonzero.
    pub restricted_count: u64,
}

/// Orbit representatives of good pairs with trace r under the isomorphism
/// action; checks I_{r,p} <= H(r^2 - 4p) on the way out.
pub fn iso_classes(p: u64, r: i64, cap: u64) -> Result<IsoClassSet> {
    if p <= 3 || !is_prime(p) {
        return Err(Error::domain(format!(
            "iso_classes: {p} is not a prime > 3"
        )));
    }
    if (r * r) as i128 >= 4 * p as i128 {
        // Hasse-violating trace: the empty class set is valid, not an error
        return Ok(IsoClassSet {
            p,
            r,
            representatives: Vec::new(),
            restricted_count: 0,
        });
    }
    let en = enumerate_traces(p, cap)?;
    let t4: Vec<u64> = (0..p).map(|t| t * t % p * t % p * t % p).collect();
    let t6: Vec<u64> = (0..p).map(|t| t4[t as usize] * t % p * t % p).collect();
    let mut visited = vec![false; (p * p) as usize];
    let mut representatives = Vec::new();
    let mut restricted_count = 0u64;
    for a in 0..p {
        for b in 0..p {
            let idx = (a * p + b) as usize;
            if visited[idx] || en.trace(a, b) != Some(r) {
                continue;
            }
            representatives.push((a, b));
            if a != 0 && b != 0 {
                restricted_count += 1;
            }
            for t in 1..p {
                let ia = t4[t as usize] * a % p;
                let ib = t6[t as usize] * b % p;
                visited[(ia * p + ib) as usize] = true;
            }
        }
    }
    let h = crate::classnum::kronecker_h(r, p)?;
    if num_rational::Rational64::new(restricted_count as i64, 1) > h {
        return Err(Error::identity(format!(
            "I_{{{r},{p}}} = {restricted_count} exceeds H({}) = {h}",
            r * r - 4 * p as i64
        )));
    }
    Ok(IsoClassSet {
        p,
        r,
        representatives,
        restricted_count,
    })
}
