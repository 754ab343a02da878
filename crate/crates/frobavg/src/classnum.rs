//! Class numbers of imaginary quadratic discriminants: reduced-form
//! enumeration for h(d), the Hurwitz-weighted Kronecker class number
//! H(r^2 - 4p), the Dirichlet L(1, chi_d) cross-check, and the windowed
//! sum H_p.
//!
//! All class numbers come from exhaustive reduced-form enumeration; the
//! L-series exists only as an independent oracle. H is carried as an exact
//! rational with denominator dividing 6.

use num_integer::Integer;
use num_rational::Rational64;

use crate::curvecount::SatoTateWindow;
use crate::error::{Error, Result};
use crate::ffield::is_prime;

/// A reduced positive-definite binary quadratic form Ax^2 + Bxy + Cy^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FormClass {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl FormClass {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }
}

fn validate_discriminant(d: i64) -> Result<()> {
    if d >= 0 {
        return Err(Error::domain(format!("discriminant {d} is not negative")));
    }
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::domain(format!("discriminant {d} is not 0,1 mod 4")));
    }
    Ok(())
}

/// All primitive reduced forms of discriminant d < 0, in lexicographic order.
pub fn reduced_forms(d: i64) -> Result<Vec<FormClass>> {
    validate_discriminant(d)?;
    let abs_d = -d;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= abs_d {
        for b in -a..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            // reduced: B >= 0 whenever |B| = A or A = C
            if b < 0 && (-b == a || a == c) {
                continue;
            }
            if a.gcd(&b.abs()).gcd(&c) != 1 {
                continue;
            }
            out.push(FormClass { a, b, c });
        }
        a += 1;
    }
    out.sort();
    Ok(out)
}

/// Primitive class number h(d).
pub fn class_number(d: i64) -> Result<u64> {
    Ok(reduced_forms(d)?.len() as u64)
}

/// Unit count w(d): 6 at d = -3, 4 at d = -4, else 2.
pub fn unit_count(d: i64) -> u64 {
    match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

/// Hurwitz-weighted Kronecker class number of a discriminant D < 0:
/// sum over D = d f^2 with d = 0,1 mod 4 of (2 / w(d)) h(d).
pub fn kronecker_h_disc(dd: i64) -> Result<Rational64> {
    validate_discriminant(dd)?;
    let mut total = Rational64::new(0, 1);
    let mut f = 1i64;
    while f * f <= -dd {
        if dd % (f * f) == 0 {
            let d = dd / (f * f);
            if matches!(d.rem_euclid(4), 0 | 1) {
                let h = class_number(d)? as i64;
                total += Rational64::new(2 * h, unit_count(d) as i64);
            }
        }
        f += 1;
    }
    Ok(total)
}

/// H(r^2 - 4p): Kronecker class number of the trace discriminant.
pub fn kronecker_h(r: i64, p: u64) -> Result<Rational64> {
    if !is_prime(p) {
        return Err(Error::domain(format!("kronecker_h: {p} is not prime")));
    }
    let four_p = 4 * p as i64;
    if r * r >= four_p {
        return Err(Error::domain(format!(
            "kronecker_h: r^2 = {} >= 4p = {four_p}",
            r * r
        )));
    }
    kronecker_h_disc(r * r - four_p)
}

/// Kronecker symbol (a|n) for arbitrary integers.
pub fn kronecker_symbol(mut a: i64, mut n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut result = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    while n % 2 == 0 {
        n /= 2;
        match a.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => result = -result,
            _ => return 0,
        }
    }
    // n odd and positive: Jacobi symbol with quadratic reciprocity
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Partial sum of L(1, chi_d) = sum (d|n)/n up to `terms`.
///
/// For a discriminant d the symbol (d|.) is periodic mod |d|, so the
/// character values are precomputed once per period.
pub fn l_one_chi(d: i64, terms: u64) -> Result<f64> {
    validate_discriminant(d)?;
    if terms < 1000 {
        return Err(Error::domain(format!(
            "l_one_chi: terms = {terms} < 1000 gives a useless truncation"
        )));
    }
    let period = (-d) as usize;
    let chi: Vec<i32> = (0..period)
        .map(|r| kronecker_symbol(d, r as i64))
        .collect();
    let mut sum = 0.0f64;
    for n in 1..=terms {
        let v = chi[(n as usize) % period];
        if v != 0 {
            sum += v as f64 / n as f64;
        }
    }
    Ok(sum)
}

/// Dirichlet-formula route to H: (1/pi) sum over D = d f^2 of sqrt|d| L(1, chi_d).
/// Independent cross-check of `kronecker_h_disc`.
pub fn kronecker_h_via_l(dd: i64, terms: u64) -> Result<f64> {
    validate_discriminant(dd)?;
    let mut total = 0.0f64;
    let mut f = 1i64;
    while f * f <= -dd {
        if dd % (f * f) == 0 {
            let d = dd / (f * f);
            if matches!(d.rem_euclid(4), 0 | 1) {
                total += ((-d) as f64).sqrt() * l_one_chi(d, terms)?;
            }
        }
        f += 1;
    }
    Ok(total / std::f64::consts::PI)
}

/// H_p of the Theta-window bound: sum of H(r^2 - 4p) over integers r with
/// 2 sqrt(p) alpha <= r <= 2 sqrt(p) beta.
pub fn hp_sum(p: u64, window: &SatoTateWindow) -> Result<Rational64> {
    if p <= 3 || !is_prime(p) {
        return Err(Error::domain(format!("hp_sum: {p} is not a prime > 3")));
    }
    let two_sqrt_p = 2.0 * (p as f64).sqrt();
    let lo = (two_sqrt_p * window.alpha()).ceil() as i64;
    let hi = (two_sqrt_p * window.beta()).floor() as i64;
    let mut total = Rational64::new(0, 1);
    for r in lo..=hi {
        if r * r < 4 * p as i64 {
            total += kronecker_h(r, p)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{legendre, sieve_primes};

    #[test]
    fn forms_small_discriminants() {
        assert_eq!(
            reduced_forms(-3).unwrap(),
            vec![FormClass { a: 1, b: 1, c: 1 }]
        );
        assert_eq!(
            reduced_forms(-4).unwrap(),
            vec![FormClass { a: 1, b: 0, c: 1 }]
        );
        let h23 = reduced_forms(-23).unwrap();
        assert_eq!(
            h23,
            vec![
                FormClass { a: 1, b: 1, c: 6 },
                FormClass { a: 2, b: -1, c: 3 },
                FormClass { a: 2, b: 1, c: 3 },
            ]
        );
        for form in &h23 {
            assert_eq!(form.discriminant(), -23);
        }
    }

    #[test]
    fn forms_domain_errors() {
        assert!(reduced_forms(5).is_err());
        assert!(reduced_forms(-6).is_err());
        assert!(reduced_forms(-5).is_err());
    }

    #[test]
    fn kronecker_h_examples() {
        assert_eq!(kronecker_h(1, 5).unwrap(), Rational64::new(1, 1));
        assert_eq!(kronecker_h(2, 5).unwrap(), Rational64::new(3, 2));
        assert_eq!(kronecker_h(4, 5).unwrap(), Rational64::new(1, 2));
        assert!(kronecker_h(5, 5).is_err());
    }

    #[test]
    fn kronecker_h_symmetry_and_exactness() {
        for p in sieve_primes(200).unwrap().iter().skip(2) {
            let max_r = (2.0 * (p as f64).sqrt()).floor() as i64;
            for r in 0..=max_r {
                if r * r >= 4 * p as i64 {
                    continue;
                }
                let h = kronecker_h(r, p).unwrap();
                assert_eq!(h, kronecker_h(-r, p).unwrap());
                assert!(h > Rational64::new(0, 1));
                // 6H is an integer
                assert_eq!((h * Rational64::new(6, 1)).denom(), &1);
            }
        }
    }

    #[test]
    fn kronecker_symbol_matches_legendre() {
        for p in sieve_primes(500).unwrap().iter().skip(1) {
            for a in -30i64..30 {
                assert_eq!(
                    kronecker_symbol(a, p as i64),
                    legendre(a, p).unwrap(),
                    "a={a} p={p}"
                );
            }
        }
    }

    #[test]
    fn kronecker_symbol_multiplicative_in_n() {
        for a in [-19i64, -11, -4, -3, 5, 12] {
            for m in 1i64..40 {
                for n in 1i64..40 {
                    assert_eq!(
                        kronecker_symbol(a, m * n),
                        kronecker_symbol(a, m) * kronecker_symbol(a, n)
                    );
                }
            }
        }
    }

    #[test]
    fn chi_d_is_periodic_mod_d() {
        for d in [-3i64, -4, -8, -11, -12, -16, -19, -20] {
            let period = -d;
            for n in 1..1000 {
                assert_eq!(
                    kronecker_symbol(d, n),
                    kronecker_symbol(d, n % period),
                    "d={d} n={n}"
                );
            }
        }
    }

    #[test]
    fn l_series_closed_forms() {
        // d = -4: Leibniz series for pi/4
        let l = l_one_chi(-4, 1_000_000).unwrap();
        assert!((l - std::f64::consts::PI / 4.0).abs() < 1e-4);
        // d = -3: h = 1, w = 6 gives L = pi / (3 sqrt 3)
        let l = l_one_chi(-3, 1_000_000).unwrap();
        assert!((l - std::f64::consts::PI / (3.0 * 3.0f64.sqrt())).abs() < 1e-4);
        // d = -19: h = 1, w = 2 gives L = pi / sqrt 19
        let l = l_one_chi(-19, 1_000_000).unwrap();
        assert!((l - std::f64::consts::PI / 19.0f64.sqrt()).abs() < 1e-4);
        assert!(l_one_chi(-4, 10).is_err());
    }

    #[test]
    fn hp_sum_examples() {
        let w = SatoTateWindow::new(0.0, 1.0).unwrap();
        assert_eq!(hp_sum(5, &w).unwrap(), Rational64::new(6, 1));
        let w = SatoTateWindow::new(0.99, 1.0).unwrap();
        assert_eq!(hp_sum(5, &w).unwrap(), Rational64::new(0, 1));
        // Direct summation over r = -4..4 gives 10 (the two-sided sum double
        // counts everything except r = 0, i.e. 2*6 - H(-20) = 10).
        let w = SatoTateWindow::new(-1.0, 1.0).unwrap();
        assert_eq!(hp_sum(5, &w).unwrap(), Rational64::new(10, 1));
    }
}
