//! Membership tests for φ-practical, weakly φ-practical, practical and 2-dense
//! numbers, together with the exact subset-sum set `S(n)` used to check them.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::arith::FactoredInteger;
use crate::error::{Error, Result};

/// Largest `n` for which [`subset_sums`] will allocate its bitmask.
pub const MAX_SUMSET_N: u64 = 1_000_000;

/// All five class flags for one integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub n: u64,
    pub phi_practical: bool,
    pub weakly_phi_practical: bool,
    pub practical: bool,
    pub two_dense: bool,
    pub squarefree: bool,
}

impl Classification {
    pub fn of(f: &FactoredInteger) -> Self {
        Classification {
            n: f.value(),
            phi_practical: is_phi_practical(f),
            weakly_phi_practical: is_weakly_phi_practical(f),
            practical: is_practical(f),
            two_dense: is_2dense(f),
            squarefree: f.is_squarefree(),
        }
    }
}

/// True when every integer in `[0, Σe]` is a sub-sum of the ascending sequence
/// `e`: each term is at most one more than the sum of all terms before it.
pub fn is_complete_sequence(sorted: &[u64]) -> bool {
    let mut reach: u64 = 0;
    for &e in sorted {
        if e > reach + 1 {
            return false;
        }
        reach += e;
    }
    true
}

/// Whether every `0 ≤ t ≤ n` is a sum of totients of distinct divisors of `n`.
pub fn is_phi_practical(f: &FactoredInteger) -> bool {
    // Beyond the divisor guard no valid input exists (d(n) < 2^20 for n < 2^63).
    let tots = f
        .divisor_totients()
        .expect("divisor count of a 63-bit integer is below the guard");
    is_complete_sequence(&tots)
}

/// Whether `n` lies in the closure of `{1}` under `n ↦ pn` for primes `p ≤ n + 2`.
///
/// Checked on the increasing factorization: each new prime is at most two
/// more than the product of the full prime powers preceding it.
pub fn is_weakly_phi_practical(f: &FactoredInteger) -> bool {
    prefix_condition(f, |prefix, _| prefix.value().saturating_add(2))
}

pub fn is_practical(f: &FactoredInteger) -> bool {
    prefix_condition(f, |prefix, _| prefix.sigma().saturating_add(1))
}

pub fn is_2dense(f: &FactoredInteger) -> bool {
    prefix_condition(f, |prefix, _| prefix.value().saturating_mul(2))
}

fn prefix_condition(f: &FactoredInteger, bound: impl Fn(&FactoredInteger, u64) -> u64) -> bool {
    let mut prefix = FactoredInteger::one();
    for &(p, e) in f.factors() {
        if p > bound(&prefix, p) {
            return false;
        }
        prefix.push(p, e);
    }
    true
}

/// The set `S(n)` of sums of totients of distinct divisors of `n`, as a bitmask.
#[derive(Clone, PartialEq, Eq)]
pub struct SumSet {
    n: u64,
    words: Vec<u64>,
}

impl SumSet {
    fn empty(n: u64) -> Self {
        SumSet {
            n,
            words: vec![0; (n as usize + 1).div_ceil(64)],
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn contains(&self, t: u64) -> bool {
        t <= self.n && self.words[(t / 64) as usize] >> (t % 64) & 1 == 1
    }

    fn insert(&mut self, t: u64) {
        self.words[(t / 64) as usize] |= 1 << (t % 64);
    }

    /// `self |= self << shift`, truncated to `[0, n]`.
    fn or_shifted(&mut self, shift: u64) {
        let word_shift = (shift / 64) as usize;
        let bit_shift = (shift % 64) as u32;
        let len = self.words.len();
        for i in (word_shift..len).rev() {
            let src = i - word_shift;
            let mut w = self.words[src] << bit_shift;
            if bit_shift > 0 && src > 0 {
                w |= self.words[src - 1] >> (64 - bit_shift);
            }
            self.words[i] |= w;
        }
        let tail = (self.n + 1) % 64;
        if tail != 0 {
            self.words[len - 1] &= (1u64 << tail) - 1;
        }
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True iff the set is all of `[0, n]`.
    pub fn is_full(&self) -> bool {
        self.len() == self.n + 1
    }

    /// Maximal runs of consecutive members as inclusive `(start, end)` pairs.
    pub fn intervals(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut start: Option<u64> = None;
        for t in 0..=self.n {
            match (self.contains(t), start) {
                (true, None) => start = Some(t),
                (false, Some(s)) => {
                    out.push((s, t - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, self.n));
        }
        out
    }

    pub fn from_members(n: u64, members: impl IntoIterator<Item = u64>) -> Self {
        let mut s = SumSet::empty(n);
        for t in members {
            if t <= n {
                s.insert(t);
            }
        }
        s
    }
}

impl fmt::Debug for SumSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S({}) = {:?}", self.n, self.intervals())
    }
}

/// Computes `S(n)` exactly by dynamic programming over the divisor totients.
pub fn subset_sums(f: &FactoredInteger) -> Result<SumSet> {
    let n = f.value();
    if n > MAX_SUMSET_N {
        return Err(Error::Capacity(format!(
            "subset-sum bitmask for n = {n} exceeds the guard of {MAX_SUMSET_N}"
        )));
    }
    let mut set = SumSet::empty(n);
    set.insert(0);
    for t in f.divisor_totients()? {
        set.or_shifted(t);
    }
    Ok(set)
}

/// A nonnegative rational in lowest terms with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = num.gcd(&den);
        Rational {
            num: num / g,
            den: den / g,
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// `H(n) = (n + 1) / φ(n)`.
pub fn h_value(f: &FactoredInteger) -> Rational {
    Rational::new(f.value() + 1, f.totient())
}
