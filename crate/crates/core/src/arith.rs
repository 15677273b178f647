//! Factorizations and the multiplicative functions built on them.

use std::fmt;

use crate::error::{Error, Result};

/// Stand-in for `P⁻(1) = +∞`. Any comparison `P⁺(d) < P⁻(1)` succeeds.
pub const SMALLEST_PRIME_OF_ONE: u64 = u64::MAX;

/// Largest value accepted by [`factorize`].
pub const MAX_VALUE: u64 = i64::MAX as u64;

/// Upper bound on the entries of an [`SpfSieve`].
pub const MAX_SIEVE_LIMIT: u64 = 1 << 31;

/// Upper bound on the number of divisors materialized by [`FactoredInteger::divisors`].
pub const MAX_DIVISOR_COUNT: u64 = 1 << 20;

/// A positive integer together with its canonical factorization.
///
/// Primes are strictly increasing and every exponent is at least one, so the
/// empty factor list represents 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredInteger {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn one() -> Self {
        FactoredInteger {
            value: 1,
            factors: Vec::new(),
        }
    }

    /// Builds a factored integer from `(prime, exponent)` pairs.
    ///
    /// The ordering, exponents and product are validated; primality of the
    /// bases is taken on trust.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut value: u64 = 1;
        let mut last = 1u64;
        for &(p, e) in &factors {
            if p <= last || p < 2 {
                return Err(Error::Domain(format!(
                    "factor list must have strictly increasing primes, got {p} after {last}"
                )));
            }
            if e == 0 {
                return Err(Error::Domain(format!("zero exponent for prime {p}")));
            }
            let pe = p
                .checked_pow(e)
                .ok_or_else(|| Error::Capacity(format!("{p}^{e} overflows")))?;
            value = value
                .checked_mul(pe)
                .filter(|v| *v <= MAX_VALUE)
                .ok_or_else(|| Error::Capacity("product exceeds 2^63-1".into()))?;
            last = p;
        }
        Ok(FactoredInteger { value, factors })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// `P⁺(n)`, with `P⁺(1) = 1`.
    pub fn largest_prime(&self) -> u64 {
        self.factors.last().map_or(1, |&(p, _)| p)
    }

    /// `P⁻(n)`, with `P⁻(1)` = [`SMALLEST_PRIME_OF_ONE`].
    pub fn smallest_prime(&self) -> u64 {
        self.factors
            .first()
            .map_or(SMALLEST_PRIME_OF_ONE, |&(p, _)| p)
    }

    /// Exponent of the largest prime, 0 for n = 1.
    pub fn top_exponent(&self) -> u32 {
        self.factors.last().map_or(0, |&(_, e)| e)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Appends `p^e` with `p > P⁺(self)`.
    pub(crate) fn push(&mut self, p: u64, e: u32) {
        debug_assert!(p > self.largest_prime() && e > 0);
        self.value *= p.pow(e);
        self.factors.push((p, e));
    }

    pub(crate) fn pop(&mut self) {
        if let Some((p, e)) = self.factors.pop() {
            self.value /= p.pow(e);
        }
    }

    /// Product of the first `k` prime powers.
    pub fn prefix(&self, k: usize) -> FactoredInteger {
        let factors = self.factors[..k].to_vec();
        let value = factors.iter().map(|&(p, e)| p.pow(e)).product();
        FactoredInteger { value, factors }
    }

    /// Product of the prime powers from index `k` on.
    pub fn suffix(&self, k: usize) -> FactoredInteger {
        let factors = self.factors[k..].to_vec();
        let value = factors.iter().map(|&(p, e)| p.pow(e)).product();
        FactoredInteger { value, factors }
    }

    /// `n / P⁺(n)`; 1 stays 1.
    pub fn without_largest_prime(&self) -> FactoredInteger {
        let mut out = self.clone();
        if let Some(last) = out.factors.last_mut() {
            out.value /= last.0;
            last.1 -= 1;
            if last.1 == 0 {
                out.factors.pop();
            }
        }
        out
    }

    /// Euler's totient.
    pub fn totient(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e - 1) * (p - 1))
            .product()
    }

    /// Sum of divisors, saturating at `u64::MAX`.
    pub fn sigma(&self) -> u64 {
        let mut acc: u128 = 1;
        for &(p, e) in &self.factors {
            let p = p as u128;
            let mut term: u128 = 1;
            let mut pk: u128 = 1;
            for _ in 0..e {
                pk *= p;
                term += pk;
            }
            acc = acc.saturating_mul(term);
        }
        acc.min(u64::MAX as u128) as u64
    }

    /// Largest squarefull divisor: the product of `p^e` over exponents `e ≥ 2`.
    pub fn squarefull_part(&self) -> u64 {
        self.factors
            .iter()
            .filter(|&&(_, e)| e >= 2)
            .map(|&(p, e)| p.pow(e))
            .product()
    }

    pub fn radical(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    /// All divisors in ascending order.
    pub fn divisors(&self) -> Result<Vec<u64>> {
        self.guard_divisor_count()?;
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        Ok(divs)
    }

    /// `φ(d)` for every divisor `d`, sorted ascending. The multiset sums to `n`.
    pub fn divisor_totients(&self) -> Result<Vec<u64>> {
        self.guard_divisor_count()?;
        let mut tots = vec![1u64];
        for &(p, e) in &self.factors {
            let len = tots.len();
            let mut phi_pk = p - 1;
            for _ in 0..e {
                for i in 0..len {
                    tots.push(tots[i] * phi_pk);
                }
                phi_pk *= p;
            }
        }
        tots.sort_unstable();
        Ok(tots)
    }

    /// Divisors `d` with `P⁺(d) < P⁻(n/d)`, ascending. These are exactly the
    /// prefix products of the factor list taken at full exponent.
    pub fn initial_divisors(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.factors.len() + 1);
        let mut acc = 1u64;
        out.push(acc);
        for &(p, e) in &self.factors {
            acc *= p.pow(e);
            out.push(acc);
        }
        out
    }

    fn guard_divisor_count(&self) -> Result<()> {
        let count = self.divisor_count();
        if count > MAX_DIVISOR_COUNT {
            return Err(Error::Capacity(format!(
                "{} has {count} divisors, above the guard of {MAX_DIVISOR_COUNT}",
                self.value
            )));
        }
        Ok(())
    }
}

/// Serialized as the plain integer value.
impl serde::Serialize for FactoredInteger {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.value)
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Smallest-prime-factor table for `2 ≤ n ≤ limit`.
#[derive(Clone, Debug)]
pub struct SpfSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, for `2 ≤ n ≤ limit`.
    pub fn spf(&self, n: u64) -> u64 {
        assert!(n >= 2 && n <= self.limit, "{n} outside sieve range");
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf(n) == n
    }
}

pub fn build_spf_sieve(limit: u64) -> Result<SpfSieve> {
    if !(2..=MAX_SIEVE_LIMIT).contains(&limit) {
        return Err(Error::Capacity(format!(
            "sieve limit {limit} outside [2, 2^31]"
        )));
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] != 0 {
            continue;
        }
        spf[i] = i as u32;
        if let Some(sq) = i.checked_mul(i) {
            let mut j = sq;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    Ok(SpfSieve { limit, spf })
}

/// Factors `n`, using the sieve when it covers `n` and trial division otherwise.
pub fn factorize(n: u64, sieve: Option<&SpfSieve>) -> Result<FactoredInteger> {
    if n == 0 {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    if n > MAX_VALUE {
        return Err(Error::Capacity(format!("{n} exceeds 2^63-1")));
    }
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut rest = n;
    match sieve {
        Some(s) if n <= s.limit => {
            while rest > 1 {
                let p = s.spf(rest);
                let mut e = 0;
                while rest.is_multiple_of(p) {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
        _ => {
            let mut divide_out = |p: u64, rest: &mut u64| {
                if (*rest).is_multiple_of(p) {
                    let mut e = 0;
                    while (*rest).is_multiple_of(p) {
                        *rest /= p;
                        e += 1;
                    }
                    factors.push((p, e));
                }
            };
            divide_out(2, &mut rest);
            divide_out(3, &mut rest);
            let mut p = 5u64;
            while p.saturating_mul(p) <= rest {
                divide_out(p, &mut rest);
                divide_out(p + 2, &mut rest);
                p += 6;
            }
            if rest > 1 {
                factors.push((rest, 1));
            }
        }
    }
    Ok(FactoredInteger { value: n, factors })
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = ((n as f64).sqrt() as u64).min(u32::MAX as u64);
    while r * r > n {
        r -= 1;
    }
    while r < u32::MAX as u64 && (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// All primes `≤ n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Calls `f` on every prime `≤ limit` in increasing order, sieving in blocks.
pub fn for_each_prime(limit: u64, mut f: impl FnMut(u64)) {
    const BLOCK: u64 = 1 << 20;
    if limit < 2 {
        return;
    }
    let base = primes_up_to(isqrt(limit));
    let mut mark = vec![false; BLOCK as usize];
    let mut lo = 2u64;
    while lo <= limit {
        let hi = (lo + BLOCK - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        mark[..len].iter_mut().for_each(|m| *m = false);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut j = start;
            while j <= hi {
                mark[(j - lo) as usize] = true;
                j += p;
            }
        }
        for (i, &m) in mark[..len].iter().enumerate() {
            if !m {
                f(lo + i as u64);
            }
        }
        lo = hi + 1;
    }
}

/// A sorted table of all primes up to a bound, with range queries.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(bound: u64) -> Self {
        PrimeTable {
            bound,
            primes: primes_up_to(bound),
        }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Index of the first prime `> x`.
    pub fn index_after(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    /// Primes in the half-open range `(lo, hi]`.
    pub fn range(&self, lo: u64, hi: u64) -> &[u64] {
        assert!(
            hi <= self.bound || hi <= lo,
            "prime table bound {} too small for {hi}",
            self.bound
        );
        if hi <= lo {
            return &[];
        }
        let a = self.index_after(lo);
        let b = self.index_after(hi);
        &self.primes[a..b.max(a)]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.bound);
        self.primes.binary_search(&n).is_ok()
    }
}
