//! Arithmetic over prime fields: prime sieving, residue symbols, discrete
//! logarithm tables and multiplicative characters.
//!
//! Characters modulo p are indexed by an exponent `j` in `[0, p-2]` against
//! the least primitive root `g`, so `chi_j(n) = e(j * dlog(n) / (p-1))`.
//! Everything here is a pure function of its inputs; tables are immutable
//! after construction.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the modulus of an explicit discrete-log table.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 20;

const SEGMENT_SIZE: u64 = 1 << 16;

/// All primes up to a fixed limit, in increasing order.
#[derive(Debug, Clone)]
pub struct PrimeSet {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeSet {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    /// pi(x): the number of primes <= x, for x <= limit.
    pub fn count_upto(&self, x: f64) -> usize {
        self.primes.partition_point(|&p| p as f64 <= x)
    }
}

/// Segmented sieve of Eratosthenes for all primes <= limit.
pub fn sieve_primes(limit: u64) -> Result<PrimeSet> {
    if limit < 2 {
        return Err(Error::domain(format!(
            "sieve_primes: empty range, limit {limit} < 2"
        )));
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    // Base sieve up to sqrt(limit).
    let mut base = vec![true; (root + 1) as usize];
    base[0] = false;
    if root >= 1 {
        base[1] = false;
    }
    let mut i = 2;
    while i * i <= root {
        if base[i as usize] {
            let mut m = i * i;
            while m <= root {
                base[m as usize] = false;
                m += i;
            }
        }
        i += 1;
    }
    let base_primes: Vec<u64> = (2..=root).filter(|&n| base[n as usize]).collect();

    let mut primes = Vec::with_capacity(estimate_pi(limit));
    let mut low = 2u64;
    let mut mask = vec![true; SEGMENT_SIZE as usize];
    while low <= limit {
        let high = (low + SEGMENT_SIZE - 1).min(limit);
        let len = (high - low + 1) as usize;
        mask[..len].fill(true);
        for &p in &base_primes {
            if p * p > high {
                break;
            }
            let mut m = (low.div_ceil(p)).max(p) * p;
            while m <= high {
                mask[(m - low) as usize] = false;
                m += p;
            }
        }
        for (off, &alive) in mask[..len].iter().enumerate() {
            let n = low + off as u64;
            if alive && n >= 2 {
                primes.push(n);
            }
        }
        low = high + 1;
        if low == 0 {
            break;
        }
    }
    Ok(PrimeSet { limit, primes })
}

fn estimate_pi(limit: u64) -> usize {
    let x = limit as f64;
    if x < 10.0 {
        8
    } else {
        (x / x.ln() * 1.2) as usize
    }
}

/// Deterministic primality by trial division. Fine at desk scale.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let mut d = 7u64;
    // wheel over 6k +- 1
    let mut step = 4u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += step;
        step = 6 - step;
    }
    true
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut acc = 1u128;
    let mut b = (base % modulus) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Legendre symbol (a|p) via Euler's criterion.
pub fn legendre(a: i64, p: u64) -> Result<i32> {
    if p < 3 || !is_prime(p) {
        return Err(Error::domain(format!("legendre: {p} is not an odd prime")));
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Ok(0);
    }
    let e = mod_pow(r, (p - 1) / 2, p);
    Ok(if e == 1 { 1 } else { -1 })
}

/// Discrete-log table modulo p against the least primitive root.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    p: u64,
    g: u64,
    dlog: Vec<u32>,
}

/// A character index `j` in `[0, p-2]`; `j = 0` is the principal character.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharacterIndex {
    pub p: u64,
    pub j: u64,
}

impl CharacterTable {
    pub fn build(p: u64) -> Result<Self> {
        Self::build_capped(p, DEFAULT_TABLE_CAP)
    }

    pub fn build_capped(p: u64, cap: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::domain(format!(
                "character table: {p} is not a prime >= 3"
            )));
        }
        if p > cap {
            return Err(Error::resource(format!(
                "character table: p = {p} exceeds cap {cap}"
            )));
        }
        let g = least_primitive_root(p);
        let mut dlog = vec![u32::MAX; p as usize];
        let mut acc = 1u64;
        for e in 0..p - 1 {
            dlog[acc as usize] = e as u32;
            acc = acc * g % p;
        }
        Ok(CharacterTable { p, g, dlog })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    pub fn order(&self) -> u64 {
        self.p - 1
    }

    /// dlog(n) for n in [1, p-1].
    pub fn dlog(&self, n: u64) -> u64 {
        debug_assert!(n >= 1 && n < self.p);
        self.dlog[n as usize] as u64
    }

    /// Exponent of chi_j(n) as a (p-1)-th root of unity, or None when p | n.
    pub fn char_exponent(&self, j: u64, n: i64) -> Option<u64> {
        let r = n.rem_euclid(self.p as i64) as u64;
        if r == 0 {
            return None;
        }
        Some(j * self.dlog(r) % (self.p - 1))
    }

    /// chi_j(n) as a complex number (0 when p | n).
    pub fn char_value(&self, j: u64, n: i64) -> Complex64 {
        match self.char_exponent(j, n) {
            None => Complex64::new(0.0, 0.0),
            Some(e) => root_of_unity(self.p - 1, e),
        }
    }

    /// Biquadratic residue symbol exponent: the k in {0,1,2,3} with
    /// a^((p-1)/4) = iota^k mod p, iota = g^((p-1)/4). The complex value
    /// of the symbol is i^k.
    pub fn quartic_exponent(&self, a: i64) -> Result<u8> {
        if self.p % 4 != 1 {
            return Err(Error::domain(format!(
                "quartic symbol: p = {} is not = 1 mod 4",
                self.p
            )));
        }
        let r = a.rem_euclid(self.p as i64) as u64;
        if r == 0 {
            return Err(Error::domain("quartic symbol: p divides a".to_string()));
        }
        Ok((self.dlog(r) % 4) as u8)
    }
}

/// e(2 pi i * exponent / order).
pub fn root_of_unity(order: u64, exponent: u64) -> Complex64 {
    let theta = 2.0 * std::f64::consts::PI * (exponent % order) as f64 / order as f64;
    Complex64::new(theta.cos(), theta.sin())
}

fn least_primitive_root(p: u64) -> u64 {
    let phi = p - 1;
    let factors = prime_factors(phi);
    'outer: for g in 2..p {
        for &q in &factors {
            if mod_pow(g, phi / q, p) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root")
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Convenience wrapper building a throwaway table.
pub fn build_character_table(p: u64) -> Result<CharacterTable> {
    CharacterTable::build(p)
}

/// Standalone biquadratic residue symbol for p = 1 mod 4.
pub fn quartic_symbol(a: i64, p: u64) -> Result<u8> {
    CharacterTable::build(p)?.quartic_exponent(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sieve_small() {
        assert_eq!(sieve_primes(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap().primes(), &[2]);
        assert!(sieve_primes(1).is_err());
    }

    #[test]
    fn sieve_matches_trial_division() {
        let oracle: Vec<u64> = (2..=1000).filter(|&n| is_prime(n)).collect();
        let set = sieve_primes(1000).unwrap();
        assert_eq!(set.primes(), oracle.as_slice());
        assert_eq!(sieve_primes(100).unwrap().len(), 25);
    }

    #[test]
    fn pi_counts() {
        let set = sieve_primes(100).unwrap();
        assert_eq!(set.count_upto(10.0), 4);
        assert_eq!(set.count_upto(2.0), 1);
        assert_eq!(set.count_upto(1.9), 0);
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(1, 5).unwrap(), 1);
        assert_eq!(legendre(0, 7).unwrap(), 0);
        assert_eq!(legendre(2, 7).unwrap(), 1);
        assert!(legendre(1, 9).is_err());
        assert!(legendre(1, 2).is_err());
    }

    #[test]
    fn legendre_matches_square_table() {
        // exhaustive against explicit squares for all odd primes <= 1000
        for p in sieve_primes(1000).unwrap().iter().skip(1) {
            let mut squares = vec![false; p as usize];
            for x in 1..p {
                squares[(x * x % p) as usize] = true;
            }
            for a in 0..p {
                let want = if a == 0 {
                    0
                } else if squares[a as usize] {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre(a as i64, p).unwrap(), want, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn table_p5() {
        let t = CharacterTable::build(5).unwrap();
        assert_eq!(t.generator(), 2);
        assert_eq!(t.dlog(1), 0);
        assert_eq!(t.dlog(4), 2);
        assert_eq!(t.dlog(3), 3);
    }

    #[test]
    fn table_rejects_cap() {
        assert!(matches!(
            CharacterTable::build_capped(1009, 1000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn primitive_root_is_least() {
        for p in sieve_primes(500).unwrap().iter().skip(1) {
            let t = CharacterTable::build(p).unwrap();
            let g = t.generator();
            // g is primitive: dlog is a bijection, so check smaller candidates fail
            for h in 2..g {
                let mut seen = vec![false; p as usize];
                let mut acc = 1u64;
                let mut order = 0;
                loop {
                    if seen[acc as usize] {
                        break;
                    }
                    seen[acc as usize] = true;
                    acc = acc * h % p;
                    order += 1;
                }
                assert!(order < p - 1, "h={h} is a smaller primitive root of {p}");
            }
        }
    }

    #[test]
    fn character_values() {
        let t = CharacterTable::build(5).unwrap();
        assert_eq!(t.char_value(0, 3), Complex64::new(1.0, 0.0));
        assert_eq!(t.char_value(2, 1), Complex64::new(1.0, 0.0));
        // j = (p-1)/2 is the quadratic character
        let v = t.char_value(2, 2);
        assert!((v.re + 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        assert_eq!(legendre(2, 5).unwrap(), -1);
        assert_eq!(t.char_value(2, 5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn quartic_examples() {
        assert_eq!(quartic_symbol(1, 13).unwrap(), 0);
        assert_eq!(quartic_symbol(3, 13).unwrap(), 0);
        assert_eq!(quartic_symbol(2, 13).unwrap(), 1);
        assert!(quartic_symbol(1, 7).is_err());
        assert!(quartic_symbol(13, 13).is_err());
    }

    #[test]
    fn quartic_squares_to_legendre() {
        for p in sieve_primes(200).unwrap().iter().filter(|&p| p % 4 == 1) {
            let t = CharacterTable::build(p).unwrap();
            for a in 1..p {
                let k = t.quartic_exponent(a as i64).unwrap();
                // (i^k)^2 = (-1)^k as +-1
                let sq = if k % 2 == 0 { 1 } else { -1 };
                assert_eq!(sq, legendre(a as i64, p).unwrap(), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn orthogonality_exact() {
        // accumulate exponent counts; a non-principal character sums to zero
        // over a full period iff the exponent histogram is flat
        for p in sieve_primes(61).unwrap().iter().skip(1) {
            let t = CharacterTable::build(p).unwrap();
            for j in 1..p - 1 {
                let mut sum = Complex64::new(0.0, 0.0);
                for n in 1..p {
                    sum += t.char_value(j, n as i64);
                }
                assert!(sum.norm() < 1e-9, "p={p} j={j} sum={sum}");
            }
        }
    }

    proptest! {
        #[test]
        fn multiplicativity(pidx in 0usize..10, j in 0u64..100, m in 1i64..1000, n in 1i64..1000) {
            let primes = [5u64, 7, 11, 13, 17, 19, 23, 29, 31, 37];
            let p = primes[pidx];
            let j = j % (p - 1);
            prop_assume!(m % p as i64 != 0 && n % p as i64 != 0);
            let t = CharacterTable::build(p).unwrap();
            let lhs = t.char_value(j, m * n);
            let rhs = t.char_value(j, m) * t.char_value(j, n);
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }
    }
}
