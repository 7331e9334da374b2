//! Integer substrate: sieving, the Möbius function, principal characters,
//! non-divisor enumeration and exact positive rationals.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear sieve output: primes, Möbius values and least prime factors up to `limit`.
#[derive(Debug, Clone)]
pub struct Sieve {
    limit: usize,
    primes: Vec<u64>,
    mu: Vec<i8>,
    lpf: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: usize) -> Self {
        let mut mu = vec![0i8; limit + 1];
        let mut lpf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        if limit >= 1 {
            mu[1] = 1;
        }
        for i in 2..=limit {
            if lpf[i] == 0 {
                lpf[i] = i as u32;
                mu[i] = -1;
                primes.push(i as u64);
            }
            for &p in &primes {
                let p = p as usize;
                let ip = i * p;
                if p > lpf[i] as usize || ip > limit {
                    break;
                }
                lpf[ip] = p as u32;
                mu[ip] = if i % p == 0 { 0 } else { -mu[i] };
            }
        }
        Sieve {
            limit,
            primes,
            mu,
            lpf,
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn mu(&self, n: usize) -> i8 {
        self.mu[n]
    }

    pub fn least_prime_factor(&self, n: usize) -> u32 {
        self.lpf[n]
    }
}

/// Primes in `[2, limit]`, ascending.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::EmptyDomain(format!(
            "no primes below {limit}; limit must be at least 2"
        )));
    }
    check_width(limit)?;
    Ok(Sieve::new(limit as usize).primes)
}

fn check_width(n: u64) -> Result<()> {
    if n > i64::MAX as u64 {
        return Err(Error::Domain(format!("{n} exceeds the 64-bit signed range")));
    }
    Ok(())
}

/// Shared, immutable prime lists keyed by limit.
pub fn primes_up_to(limit: u64) -> Arc<Vec<u64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<u64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&limit) {
        return p.clone();
    }
    let primes = Arc::new(if limit < 2 {
        Vec::new()
    } else {
        Sieve::new(limit as usize).primes
    });
    cache
        .lock()
        .unwrap()
        .entry(limit)
        .or_insert_with(|| primes.clone())
        .clone()
}

/// μ(n) for `1 ≤ n ≤ limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobiusTable {
    limit: usize,
    // index 0 is unused
    values: Vec<i8>,
}

impl MobiusTable {
    pub fn limit(&self) -> usize {
        self.limit
    }

    /// μ(n); panics when `n` is 0 or above the limit.
    pub fn get(&self, n: usize) -> i8 {
        assert!(n >= 1 && n <= self.limit, "n={n} outside 1..={}", self.limit);
        self.values[n]
    }

    /// Values for n = 1..=limit.
    pub fn values(&self) -> &[i8] {
        &self.values[1..]
    }
}

pub fn mobius_table(limit: u64) -> Result<MobiusTable> {
    if limit < 1 {
        return Err(Error::EmptyDomain("Möbius table needs limit >= 1".into()));
    }
    check_width(limit)?;
    let sieve = Sieve::new(limit as usize);
    Ok(MobiusTable {
        limit: limit as usize,
        values: sieve.mu,
    })
}

/// μ(n) by trial division; meant for isolated values.
pub fn mobius(n: u64) -> i8 {
    assert!(n >= 1);
    let mut n = n;
    let mut sign = 1i8;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Distinct prime factors of `n`, ascending.
pub fn distinct_prime_factors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = n;
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

/// All `m` with `1 ≤ m < n` and `m ∤ n`.
pub fn non_divisors_below(n: u64) -> Vec<u64> {
    (1..n).filter(|m| n % m != 0).collect()
}

/// The principal Dirichlet character χ₀ modulo `M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrincipalCharacter {
    modulus: u64,
    prime_factors: Vec<u64>,
}

impl PrincipalCharacter {
    pub fn new(modulus: i64) -> Result<Self> {
        if modulus <= 0 {
            return Err(Error::InvalidModulus(modulus));
        }
        let modulus = modulus as u64;
        Ok(PrincipalCharacter {
            modulus,
            prime_factors: distinct_prime_factors(modulus),
        })
    }

    /// The ζ case, M = 1.
    pub fn trivial() -> Self {
        PrincipalCharacter {
            modulus: 1,
            prime_factors: Vec::new(),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn prime_factors(&self) -> &[u64] {
        &self.prime_factors
    }

    /// χ₀(n): 1 when gcd(n, M) = 1, else 0.
    pub fn eval(&self, n: u64) -> u8 {
        u8::from(n.gcd(&self.modulus) == 1)
    }

    /// True when the prime `p` divides M (so χ₀(p) = 0).
    pub fn divides_modulus(&self, p: u64) -> bool {
        self.prime_factors.binary_search(&p).is_ok()
    }

    /// Least prime that does not divide M.
    pub fn smallest_excluded_prime(&self) -> u64 {
        let mut p = 2u64;
        loop {
            if !self.divides_modulus(p) {
                return p;
            }
            p = next_prime(p);
        }
    }

    /// Character of modulus `p·M`.
    pub fn extended_by(&self, p: u64) -> Result<Self> {
        let m = self
            .modulus
            .checked_mul(p)
            .filter(|m| *m <= i64::MAX as u64)
            .ok_or_else(|| Error::Domain("extended modulus overflows".into()))?;
        PrincipalCharacter::new(m as i64)
    }
}

pub fn smallest_excluded_prime(chi: &PrincipalCharacter) -> u64 {
    chi.smallest_excluded_prime()
}

pub fn principal_character(modulus: i64) -> Result<PrincipalCharacter> {
    PrincipalCharacter::new(modulus)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn next_prime(p: u64) -> u64 {
    let mut q = p + 1;
    while !is_prime(q) {
        q += 1;
    }
    q
}

/// Exact positive-or-zero rational used for the scale factors α, β and
/// for CLI inputs that must not pass through floating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational(Ratio::new(num, den)))
    }

    pub fn integer(n: i64) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn is_positive(&self) -> bool {
        self.numer() > 0
    }

    pub fn is_integer(&self) -> bool {
        self.denom() == 1
    }

    /// `self | other`, i.e. `other / self` is a positive integer.
    pub fn divides(&self, other: &Rational) -> bool {
        if self.numer() == 0 {
            return false;
        }
        let q = other.0 / self.0;
        q.is_integer() && *q.numer() > 0
    }

    pub fn mul(self, other: Rational) -> Rational {
        Rational(self.0 * other.0)
    }

    pub fn div(self, other: Rational) -> Rational {
        Rational(self.0 / other.0)
    }

    pub fn add(self, other: Rational) -> Rational {
        Rational(self.0 + other.0)
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p/q`, an integer, or an exact decimal literal such as `0.75`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("'{s}' is not an exact rational (use p/q, an integer, or a decimal)"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            return Rational::new(p, q).map_err(|_| bad());
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let int_part: i64 = if int.is_empty() || int == "-" {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let den = 10i64.pow(frac.len() as u32);
            let frac_part: i64 = frac.parse().map_err(|_| bad())?;
            let num = int_part
                .checked_mul(den)
                .and_then(|v| {
                    if negative {
                        v.checked_sub(frac_part)
                    } else {
                        v.checked_add(frac_part)
                    }
                })
                .ok_or_else(bad)?;
            return Rational::new(num, den);
        }
        let n: i64 = s.parse().map_err(|_| bad())?;
        Ok(Rational::integer(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division_is_prime(n: u64) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn sieve_small_limits() {
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap(), vec![2]);
        assert!(matches!(sieve_primes(1), Err(Error::EmptyDomain(_))));
    }

    #[test]
    fn sieve_matches_trial_division() {
        let oracle: Vec<u64> = (2..=100).filter(|&n| trial_division_is_prime(n)).collect();
        assert_eq!(oracle.len(), 25);
        assert_eq!(sieve_primes(100).unwrap(), oracle);
        let big: Vec<u64> = (2..=5000).filter(|&n| trial_division_is_prime(n)).collect();
        assert_eq!(sieve_primes(5000).unwrap(), big);
    }

    #[test]
    fn mobius_small_values() {
        let t = mobius_table(12).unwrap();
        assert_eq!(&t.values()[..6], &[1, -1, -1, 0, -1, 1]);
        assert_eq!(t.get(12), 0);
        for n in 1..=12u64 {
            assert_eq!(t.get(n as usize), mobius(n));
        }
    }

    #[test]
    fn mobius_divisor_sum_vanishes() {
        let t = mobius_table(10_000).unwrap();
        for n in 2..=10_000usize {
            let s: i64 = (1..=n).filter(|m| n % m == 0).map(|m| t.get(m) as i64).sum();
            assert_eq!(s, 0, "n = {n}");
        }
    }

    #[test]
    fn mobius_multiplicative_on_coprime_pairs() {
        let t = mobius_table(1_000_000).unwrap();
        for n in (1..=1000usize).step_by(7) {
            for m in (1..=1000usize).step_by(11) {
                if n.gcd(&m) == 1 {
                    assert_eq!(t.get(n * m), t.get(n) * t.get(m));
                }
            }
        }
    }

    #[test]
    fn principal_characters() {
        assert!(PrincipalCharacter::new(1).unwrap().prime_factors().is_empty());
        assert_eq!(PrincipalCharacter::new(6).unwrap().prime_factors(), &[2, 3]);
        assert_eq!(PrincipalCharacter::new(12).unwrap().prime_factors(), &[2, 3]);
        assert_eq!(PrincipalCharacter::new(0), Err(Error::InvalidModulus(0)));
        let chi = PrincipalCharacter::new(6).unwrap();
        assert_eq!(chi.eval(5), 1);
        assert_eq!(chi.eval(4), 0);
        assert_eq!(chi.eval(9), 0);
    }

    #[test]
    fn smallest_excluded() {
        for (m, p) in [(1, 2), (6, 5), (30, 7), (2, 3), (15, 2)] {
            assert_eq!(PrincipalCharacter::new(m).unwrap().smallest_excluded_prime(), p);
        }
        for m in 1..500i64 {
            let chi = PrincipalCharacter::new(m).unwrap();
            let p = chi.smallest_excluded_prime();
            assert!(m as u64 % p != 0);
            for q in (2..p).filter(|&q| is_prime(q)) {
                assert_eq!(m as u64 % q, 0);
            }
        }
    }

    #[test]
    fn non_divisors() {
        assert!(non_divisors_below(2).is_empty());
        assert!(non_divisors_below(1).is_empty());
        assert_eq!(non_divisors_below(6), vec![4, 5]);
        let brute: Vec<u64> = (1..12).filter(|m| 12 % m != 0).collect();
        assert_eq!(brute, vec![5, 7, 8, 9, 10, 11]);
        assert_eq!(non_divisors_below(12), brute);
    }

    #[test]
    fn non_divisor_count_matches_divisor_count() {
        for n in 1..=10_000u64 {
            let d = (1..=n).filter(|m| n % m == 0).count() as u64;
            assert_eq!(non_divisors_below(n).len() as u64, (n - 1) - (d - 1));
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!("3/4".parse::<Rational>().unwrap(), Rational::new(3, 4).unwrap());
        assert_eq!("0.75".parse::<Rational>().unwrap(), Rational::new(3, 4).unwrap());
        assert_eq!("6/4".parse::<Rational>().unwrap().to_string(), "3/2");
        assert_eq!("12".parse::<Rational>().unwrap().to_string(), "12");
        assert!("abc".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1e5".parse::<Rational>().is_err());
    }

    #[test]
    fn rational_divisibility() {
        let r = |s: &str| s.parse::<Rational>().unwrap();
        assert!(r("2").divides(&r("4")));
        assert!(!r("2").divides(&r("3")));
        assert!(r("1/2").divides(&r("3/2")));
        assert!(!r("3/2").divides(&r("2")));
        assert!(r("3").divides(&r("3")));
    }

    proptest! {
        #[test]
        fn rational_display_round_trip(p in 1i64..10_000, q in 1i64..10_000) {
            let a = Rational::new(p, q).unwrap();
            let s = a.to_string();
            let b: Rational = s.parse().unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(b.to_string(), s);
        }
    }
}
