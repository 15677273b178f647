//! Starters: the φ-practical numbers from which every φ-practical number is
//! reached by appending a squarefree tail of larger primes.
//!
//! This module also machine-checks the structural facts about starters and
//! the interval shape of `S(n)` on enumerated instances.

use std::cmp::Ordering;

use serde::Serialize;

use crate::arith::{factorize, FactoredInteger, PrimeTable};
use crate::classify::{h_value, is_phi_practical, subset_sums, Rational, SumSet};
use crate::enumerate::{count_phi_tree, run_phi_tree, PhiSink};
use crate::error::{Error, Result};

/// Largest limit accepted by [`enumerate_starters`].
pub const MAX_STARTER_LIMIT: u64 = 100_000_000;

/// Largest `n` for the subset-sum based lemma checks.
pub const MAX_LEMMA_N: u64 = crate::classify::MAX_SUMSET_N;

/// A φ-practical `m` with `P⁺(m)² | m` or `m/P⁺(m)` not φ-practical.
pub fn is_starter(f: &FactoredInteger) -> bool {
    if !is_phi_practical(f) {
        return false;
    }
    f.value() == 1 || f.top_exponent() >= 2 || !is_phi_practical(&f.without_largest_prime())
}

/// The largest proper initial divisor of `m` that is φ-practical, as the
/// number of leading prime powers it keeps.
fn alpha_prefix_len(m: &FactoredInteger) -> usize {
    (0..m.factors().len())
        .rev()
        .find(|&k| is_phi_practical(&m.prefix(k)))
        .expect("1 is a φ-practical proper initial divisor")
}

/// `α(m)`: the largest proper initial divisor of `m` that is φ-practical.
pub fn alpha(m: &FactoredInteger) -> Result<u64> {
    if m.value() == 1 {
        return Err(Error::Domain("α is defined for m > 1".into()));
    }
    Ok(m.prefix(alpha_prefix_len(m)).value())
}

/// The unique starter of a φ-practical `n`: an initial divisor `m` that is a
/// starter with `n/m` squarefree.
pub fn starter_of(n: &FactoredInteger) -> Result<u64> {
    if !is_phi_practical(n) {
        return Err(Error::Domain(format!("{} is not φ-practical", n.value())));
    }
    let k = n.factors().len();
    let candidates: Vec<u64> = (0..=k)
        .filter(|&i| n.suffix(i).is_squarefree())
        .map(|i| n.prefix(i))
        .filter(is_starter)
        .map(|m| m.value())
        .collect();
    match candidates.as_slice() {
        [m] => Ok(*m),
        _ => Err(Error::Invariant(format!(
            "{} has starter candidates {candidates:?}",
            n.value()
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarterRecord {
    pub m: FactoredInteger,
    pub squarefull_part: u64,
    /// `α(m)`; absent for `m = 1`.
    pub alpha: Option<u64>,
    pub h_m: Rational,
    pub h_alpha: Option<Rational>,
}

impl StarterRecord {
    pub fn new(m: FactoredInteger) -> Result<Self> {
        if !is_starter(&m) {
            return Err(Error::Domain(format!("{} is not a starter", m.value())));
        }
        let (alpha, h_alpha) = if m.value() == 1 {
            (None, None)
        } else {
            let a = m.prefix(alpha_prefix_len(&m));
            (Some(a.value()), Some(h_value(&a)))
        };
        Ok(StarterRecord {
            squarefull_part: m.squarefull_part(),
            h_m: h_value(&m),
            alpha,
            h_alpha,
            m,
        })
    }

    pub const CSV_HEADER: &'static str = "m,squarefull_part,alpha,H_num,H_den";

    /// `m,squarefull_part,alpha,H_num,H_den`, with alpha 0 for `m = 1`.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.m.value(),
            self.squarefull_part,
            self.alpha.unwrap_or(0),
            self.h_m.num,
            self.h_m.den
        )
    }
}

struct StarterSink(Vec<FactoredInteger>);

impl PhiSink for StarterSink {
    fn node(&mut self, n: &FactoredInteger, _phi: bool, starter: bool) {
        if starter {
            self.0.push(n.clone());
        }
    }

    fn phi_leaf_run(&mut self, _m: &FactoredInteger, _primes: &[u64]) {}

    fn merge(&mut self, other: Self) {
        self.0.extend(other.0);
    }
}

/// All starters up to `limit`, ascending.
pub fn enumerate_starters(limit: u64) -> Result<Vec<StarterRecord>> {
    if limit > MAX_STARTER_LIMIT {
        return Err(Error::Capacity(format!(
            "starter limit {limit} exceeds {MAX_STARTER_LIMIT}"
        )));
    }
    let mut found = run_phi_tree(limit, || StarterSink(Vec::new()))?.0;
    found.sort_unstable_by_key(|f| f.value());
    found.into_iter().map(StarterRecord::new).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarterDensityRow {
    pub x: u64,
    pub starters: u64,
    pub density: f64,
}

/// Number and density of starters up to each bucket threshold.
pub fn starter_count_profile(buckets: &[u64]) -> Result<Vec<StarterDensityRow>> {
    if let Some(&last) = buckets.last() {
        if last > MAX_STARTER_LIMIT {
            return Err(Error::Capacity(format!(
                "starter limit {last} exceeds {MAX_STARTER_LIMIT}"
            )));
        }
    }
    let counts = count_phi_tree(buckets)?;
    Ok(buckets
        .iter()
        .zip(counts.starters)
        .map(|(&x, s)| StarterDensityRow {
            x,
            starters: s,
            density: s as f64 / x as f64,
        })
        .collect())
}

/// Whether the density column strictly decreases.
pub fn density_decays(rows: &[StarterDensityRow]) -> bool {
    rows.windows(2).all(|w| w[1].density < w[0].density)
}

// ---------------------------------------------------------------------------
// Interval sumsets
// ---------------------------------------------------------------------------

/// The set `[g] + h·[a] = {i + h·j : 0 ≤ i ≤ g, 0 ≤ j ≤ a}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalSumset {
    pub g: u64,
    pub h: u64,
    pub a: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SumsetShape {
    /// The full interval `[0, max]`.
    Interval(u64),
    /// Disjoint inclusive intervals.
    Union(Vec<(u64, u64)>),
}

impl IntervalSumset {
    pub fn max(&self) -> u64 {
        self.g + self.h * self.a
    }

    /// The members as a bitmask over `[0, max]`.
    pub fn to_sumset(&self) -> SumSet {
        let members = (0..=self.a).flat_map(|i| i * self.h..=self.g + i * self.h);
        SumSet::from_members(self.max(), members)
    }
}

/// `[g] + h[a]`, collapsed to `[g + ha]` exactly when `h ≤ g + 1`.
pub fn interval_sumset_add(g: u64, h: u64, a: u64) -> Result<SumsetShape> {
    if a == 0 {
        return Err(Error::Domain("a must be positive".into()));
    }
    if h <= g + 1 {
        return Ok(SumsetShape::Interval(g + h * a));
    }
    Ok(SumsetShape::Union(
        (0..=a).map(|i| (i * h, g + i * h)).collect(),
    ))
}

// ---------------------------------------------------------------------------
// Starter structure checks
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarterCondReport {
    pub m: u64,
    pub a: u64,
    pub k: u64,
    pub h_m: Rational,
    pub h_a: Rational,
    /// `H(ak) ≥ H(a)`.
    pub head_holds: bool,
    /// Products `a·d` (`d` an initial divisor of `k`, `1 < d < k`) with `H(ad) ≥ H(a)`.
    pub violations: Vec<u64>,
    pub checked_divisors: usize,
    pub pass: bool,
}

/// Checks `H(ak) ≥ H(a)` and `H(ad) < H(a)` for initial divisors `1 < d < k`
/// of `k`, where `a = α(m)` and `m = ak`. Exact rational comparisons.
pub fn verify_startercond(rec: &StarterRecord) -> Result<StarterCondReport> {
    let m = &rec.m;
    if m.value() == 1 {
        return Err(Error::Domain("the starter condition needs m > 1".into()));
    }
    let i = alpha_prefix_len(m);
    let a = m.prefix(i);
    let h_a = h_value(&a);
    let h_m = h_value(m);
    let top = m.factors().len();
    // a·d for the initial divisors 1 < d < k of k are the prefixes i+1 .. top-1.
    let mut violations = Vec::new();
    for j in i + 1..top {
        let ad = m.prefix(j);
        if h_value(&ad) >= h_a {
            violations.push(ad.value());
        }
    }
    let head_holds = h_m >= h_a;
    Ok(StarterCondReport {
        m: m.value(),
        a: a.value(),
        k: m.value() / a.value(),
        h_m,
        h_a,
        head_holds,
        checked_divisors: top.saturating_sub(i + 1),
        pass: head_holds && violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorollaryReport {
    pub m: u64,
    pub skipped: bool,
    /// `H(ak) > H(a)`.
    pub strict_head: bool,
    /// `k/φ(k) ≥ 1 + 1/a`.
    pub ratio_head: bool,
    /// Initial divisors `d < k` of `k` with `d/φ(d) ≥ 1 + 1/a`.
    pub violations: Vec<u64>,
    pub pass: bool,
}

/// `x/φ(x)` compared with `1 + 1/a` by cross-multiplication.
fn ratio_vs(x: &FactoredInteger, a: u64) -> Ordering {
    (a as u128 * x.value() as u128).cmp(&((a as u128 + 1) * x.totient() as u128))
}

/// For starters with squarefull part `s > 1`: `H(ak) > H(a)`,
/// `k/φ(k) ≥ 1 + 1/a`, and `d/φ(d) < 1 + 1/a` for initial divisors `d < k`.
pub fn verify_corollary_45(rec: &StarterRecord) -> Result<CorollaryReport> {
    let m = &rec.m;
    if rec.squarefull_part == 1 {
        return Ok(CorollaryReport {
            m: m.value(),
            skipped: true,
            strict_head: false,
            ratio_head: false,
            violations: Vec::new(),
            pass: true,
        });
    }
    let i = alpha_prefix_len(m);
    let a = m.prefix(i);
    let k = m.suffix(i);
    let av = a.value();
    let strict_head = h_value(m) > h_value(&a);
    let ratio_head = ratio_vs(&k, av) != Ordering::Less;
    let violations: Vec<u64> = (0..k.factors().len())
        .map(|j| k.prefix(j))
        .filter(|d| ratio_vs(d, av) != Ordering::Less)
        .map(|d| d.value())
        .collect();
    Ok(CorollaryReport {
        m: m.value(),
        skipped: false,
        strict_head,
        ratio_head,
        pass: strict_head && ratio_head && violations.is_empty(),
        violations,
    })
}

/// For starters with squarefull part `s > 1`, whether `P⁺(α(m)) < P⁺(s)`.
pub fn alpha_below_squarefull(rec: &StarterRecord) -> Option<bool> {
    if rec.squarefull_part == 1 {
        return None;
    }
    let alpha = factorize(rec.alpha?, None).ok()?;
    let s = factorize(rec.squarefull_part, None).ok()?;
    Some(alpha.largest_prime() < s.largest_prime())
}

/// Aggregate over many checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checked: u64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{} {}: {} checks, {} failures",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.checked,
            self.failures.len()
        )
    }
}

/// Starter condition, its corollary, and the `α` bound for every starter
/// `1 < m ≤ limit`.
pub fn verify_starters_up_to(limit: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("startercond");
    for rec in enumerate_starters(limit)? {
        if rec.m.value() == 1 {
            continue;
        }
        let sc = verify_startercond(&rec)?;
        report.record(sc.pass, || format!("starter condition fails: {sc:?}"));
        let co = verify_corollary_45(&rec)?;
        if !co.skipped {
            report.record(co.pass, || format!("corollary fails: {co:?}"));
        }
        if let Some(ok) = alpha_below_squarefull(&rec) {
            report.record(ok, || format!("P+(alpha) >= P+(s) for {}", rec.m.value()));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Interval shape of S(n)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub n: u64,
    pub expected: IntervalSumset,
    pub pass: bool,
}

fn checked_n(factors: Vec<(u64, u32)>) -> Result<FactoredInteger> {
    let f = FactoredInteger::from_factors(factors)?;
    if f.value() > MAX_LEMMA_N {
        return Err(Error::Capacity(format!(
            "n = {} exceeds {MAX_LEMMA_N}",
            f.value()
        )));
    }
    Ok(f)
}

fn is_prime_small(p: u64) -> bool {
    p >= 2
        && factorize(p, None)
            .map(|f| f.factors() == [(p, 1)])
            .unwrap_or(false)
}

/// Multiplies two coprime factorizations.
fn coprime_product(x: &FactoredInteger, y: &FactoredInteger) -> Result<FactoredInteger> {
    let mut factors: Vec<(u64, u32)> = x.factors().iter().chain(y.factors()).copied().collect();
    factors.sort_unstable();
    checked_n(factors)
}

/// The shape `[n − aφ(n/a)] + φ(n/a)[a]` for `a | n`.
fn apq_shape(n: &FactoredInteger, a: u64) -> Result<IntervalSumset> {
    let cofactor = factorize(n.value() / a, None)?;
    let h = cofactor.totient();
    Ok(IntervalSumset {
        g: n.value() - a * h,
        h,
        a,
    })
}

fn sumset_matches(n: &FactoredInteger, shape: &IntervalSumset) -> Result<bool> {
    if shape.max() != n.value() {
        return Ok(false);
    }
    Ok(subset_sums(n)? == shape.to_sumset())
}

/// Checks `S(n) = [n − aφ(n/a)] + φ(n/a)[a]` for `n = a·p^ν·q^μ` with
/// `a` φ-practical, `p = a + 2` prime, `p < q ≤ ap + 2` prime, `ν ≥ 2`, `μ ≥ 1`.
pub fn verify_lemma_apq(a: u64, p: u64, nu: u32, mu: u32, q: u64) -> Result<LemmaReport> {
    let fa = factorize(a, None)?;
    if !is_phi_practical(&fa) {
        return Err(Error::Domain(format!("a = {a} is not φ-practical")));
    }
    if p != a + 2 || !is_prime_small(p) {
        return Err(Error::Domain(format!("p = {p} must be the prime a + 2")));
    }
    if !(q > p && q <= a * p + 2 && is_prime_small(q)) {
        return Err(Error::Domain(format!(
            "q = {q} must be a prime in (p, ap + 2]"
        )));
    }
    if nu < 2 || mu < 1 {
        return Err(Error::Domain("need ν ≥ 2 and μ ≥ 1".into()));
    }
    let tail = FactoredInteger::from_factors(vec![(p, nu), (q, mu)])?;
    let n = coprime_product(&fa, &tail)?;
    let expected = apq_shape(&n, a)?;
    Ok(LemmaReport {
        n: n.value(),
        pass: sumset_matches(&n, &expected)?,
        expected,
    })
}

/// Checks `S(np^ν) = [g̃] + h̃[a]` given `a | n`, `a < n`,
/// `S(n) = [g] + h[a]` with `g = n − aφ(n/a)`, `h = φ(n/a)`, and
/// `P⁺(n) < p ≤ g + 2 ≤ h`.
pub fn verify_lemma_npnu(n: u64, a: u64, p: u64, nu: u32) -> Result<LemmaReport> {
    if a == 0 || !n.is_multiple_of(a) || a >= n {
        return Err(Error::Domain(format!(
            "need a | n and a < n, got a = {a}, n = {n}"
        )));
    }
    if nu < 1 {
        return Err(Error::Domain("need ν ≥ 1".into()));
    }
    let fnn = checked_n(factorize(n, None)?.factors().to_vec())?;
    let base = apq_shape(&fnn, a)?;
    if !sumset_matches(&fnn, &base)? {
        return Err(Error::Domain(format!("S({n}) is not [g] + h[{a}]")));
    }
    if !(p > fnn.largest_prime() && p <= base.g + 2 && base.g + 2 <= base.h && is_prime_small(p)) {
        return Err(Error::Domain(format!(
            "need prime p with P+(n) < p ≤ g + 2 ≤ h; p = {p}, g = {}, h = {}",
            base.g, base.h
        )));
    }
    let pv = FactoredInteger::from_factors(vec![(p, nu)])?;
    let extended = coprime_product(&fnn, &pv)?;
    let expected = apq_shape(&extended, a)?;
    Ok(LemmaReport {
        n: extended.value(),
        pass: sumset_matches(&extended, &expected)?,
        expected,
    })
}

/// Every admissible `(a, p, ν, μ, q)` with `n = a·p^ν·q^μ ≤ nmax`.
pub fn lemma_apq_tuples(nmax: u64) -> Vec<(u64, u64, u32, u32, u64)> {
    let mut out = Vec::new();
    let mut a = 1u64;
    // The smallest admissible n for a given a is a·p²·q ≥ a·(a+2)²·(a+3).
    while a.saturating_mul((a + 2).pow(2)).saturating_mul(a + 3) <= nmax {
        let p = a + 2;
        if is_phi_practical(&factorize(a, None).expect("a ≥ 1")) && is_prime_small(p) {
            let table = PrimeTable::new(a * p + 2);
            for &q in table.range(p, a * p + 2) {
                let mut nu = 2;
                while a * p.pow(nu) * q <= nmax {
                    let mut mu = 1;
                    while a * p.pow(nu) * q.pow(mu) <= nmax {
                        out.push((a, p, nu, mu, q));
                        mu += 1;
                    }
                    nu += 1;
                }
            }
        }
        a += 1;
    }
    out
}

pub fn verify_lemma_apq_all(nmax: u64) -> Result<SuiteReport> {
    let nmax = nmax.min(MAX_LEMMA_N);
    let mut report = SuiteReport::new("lemma52");
    for (a, p, nu, mu, q) in lemma_apq_tuples(nmax) {
        let r = verify_lemma_apq(a, p, nu, mu, q)?;
        report.record(r.pass, || {
            format!("a={a} p={p} nu={nu} mu={mu} q={q}: {r:?}")
        });
    }
    Ok(report)
}

/// Instances `(n, a, p, ν)` meeting the extension preconditions: bases `n`
/// from the `a·p^ν·q^μ` family and from a scan of `n ≤ scan_max` over all
/// divisors `a`, extended by every admissible prime power up to `nmax`.
pub fn lemma_npnu_instances(nmax: u64, scan_max: u64) -> Result<Vec<(u64, u64, u64, u32)>> {
    let nmax = nmax.min(MAX_LEMMA_N);
    let mut bases: Vec<(FactoredInteger, u64)> = Vec::new();
    for (a, p, nu, mu, q) in lemma_apq_tuples(nmax) {
        let n = a * p.pow(nu) * q.pow(mu);
        bases.push((factorize(n, None)?, a));
    }
    for n in 2..=scan_max.min(nmax) {
        let f = factorize(n, None)?;
        let sums = subset_sums(&f)?;
        for a in f.divisors()? {
            if a == n {
                continue;
            }
            let shape = apq_shape(&f, a)?;
            if shape.g + 2 <= shape.h
                && shape.max() == n
                && sums == shape.to_sumset()
                && !bases.iter().any(|(b, ba)| b.value() == n && *ba == a)
            {
                bases.push((f.clone(), a));
            }
        }
    }
    let mut out = Vec::new();
    for (f, a) in bases {
        let shape = apq_shape(&f, a)?;
        if shape.g + 2 > shape.h {
            continue;
        }
        let n = f.value();
        let top = (shape.g + 2).min(nmax / n);
        if top <= f.largest_prime() {
            continue;
        }
        let table = PrimeTable::new(top);
        for &p in table.range(f.largest_prime(), top) {
            let mut nu = 1u32;
            while n.checked_mul(p.pow(nu)).is_some_and(|v| v <= nmax) {
                out.push((n, a, p, nu));
                nu += 1;
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub fn verify_lemma_npnu_all(nmax: u64, scan_max: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("lemma53");
    for (n, a, p, nu) in lemma_npnu_instances(nmax, scan_max)? {
        let r = verify_lemma_npnu(n, a, p, nu)?;
        report.record(r.pass, || format!("n={n} a={a} p={p} nu={nu}: {r:?}"));
    }
    Ok(report)
}

/// Brute-force check that `[g] + h[a] = [g + ha]` iff `h ≤ g + 1` on a grid.
pub fn verify_sumset_grid(g_max: u64, h_max: u64, a_max: u64) -> SuiteReport {
    let mut report = SuiteReport::new("lemma51");
    for g in 0..=g_max {
        for h in 0..=h_max {
            for a in 1..=a_max {
                let set = IntervalSumset { g, h, a }.to_sumset();
                let full = set.is_full();
                let shape = interval_sumset_add(g, h, a).expect("a > 0");
                let collapsed = matches!(shape, SumsetShape::Interval(_));
                let shape_ok = match &shape {
                    SumsetShape::Interval(mx) => *mx == g + h * a,
                    SumsetShape::Union(parts) => {
                        SumSet::from_members(g + h * a, parts.iter().flat_map(|&(l, r)| l..=r))
                            == set
                    }
                };
                report.record(
                    full == (h <= g + 1) && collapsed == full && shape_ok,
                    || format!("g={g} h={h} a={a}"),
                );
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_spf_sieve;
    use crate::enumerate::{b_m, count_phi_practical, GrowthFunction};

    fn f(n: u64) -> FactoredInteger {
        factorize(n, None).unwrap()
    }

    fn rec(n: u64) -> StarterRecord {
        StarterRecord::new(f(n)).unwrap()
    }

    #[test]
    fn starter_examples() {
        assert!(is_starter(&f(1)));
        assert!(is_starter(&f(4)));
        assert!(is_starter(&f(294)));
        assert!(!is_starter(&f(6)));
        assert!(is_starter(&f(315)));
        assert!(!is_starter(&f(9)));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&f(315)).unwrap(), 1);
        assert_eq!(alpha(&f(525)).unwrap(), 3);
        // 2 is not an initial divisor of 4.
        assert_eq!(alpha(&f(4)).unwrap(), 1);
        assert_eq!(alpha(&f(294)).unwrap(), 6);
        assert!(matches!(alpha(&f(1)), Err(Error::Domain(_))));
    }

    #[test]
    fn starter_of_examples() {
        assert_eq!(starter_of(&f(6)).unwrap(), 1);
        assert_eq!(starter_of(&f(12)).unwrap(), 4);
        assert_eq!(starter_of(&f(315)).unwrap(), 315);
        assert!(matches!(starter_of(&f(7)), Err(Error::Domain(_))));
    }

    #[test]
    fn small_starter_lists() {
        let ten: Vec<u64> = enumerate_starters(10)
            .unwrap()
            .iter()
            .map(|r| r.m.value())
            .collect();
        let scan: Vec<u64> = (1..=10).filter(|&n| is_starter(&f(n))).collect();
        assert_eq!(ten, scan);
        assert_eq!(ten, vec![1, 4, 8]);
        let one: Vec<u64> = enumerate_starters(1)
            .unwrap()
            .iter()
            .map(|r| r.m.value())
            .collect();
        assert_eq!(one, vec![1]);
        let s49: Vec<u64> = enumerate_starters(10_000)
            .unwrap()
            .iter()
            .filter(|r| r.squarefull_part == 49)
            .map(|r| r.m.value())
            .collect();
        assert_eq!(s49, vec![294, 735, 1470]);
    }

    #[test]
    fn starter_list_matches_scan() {
        let sieve = build_spf_sieve(200_000).unwrap();
        let scan: Vec<u64> = (1..=200_000)
            .filter(|&n| is_starter(&factorize(n, Some(&sieve)).unwrap()))
            .collect();
        let listed: Vec<u64> = enumerate_starters(200_000)
            .unwrap()
            .iter()
            .map(|r| r.m.value())
            .collect();
        assert_eq!(listed, scan);
    }

    #[test]
    fn unique_starters_and_partition() {
        let sieve = build_spf_sieve(1_000_000).unwrap();
        let mut per_starter = std::collections::BTreeMap::<u64, u64>::new();
        for n in 1..=1_000_000u64 {
            let fi = factorize(n, Some(&sieve)).unwrap();
            if is_phi_practical(&fi) {
                *per_starter.entry(starter_of(&fi).unwrap()).or_default() += 1;
            }
        }
        let total: u64 = per_starter.values().sum();
        assert_eq!(total, count_phi_practical(1_000_000).unwrap());
        let th = GrowthFunction::PhiPractical;
        for (&m, &count) in per_starter.iter().take(300) {
            assert_eq!(b_m(&f(m), 1_000_000, th).unwrap(), count, "m = {m}");
        }
    }

    #[test]
    fn record_fields() {
        let r = rec(294);
        assert_eq!(r.squarefull_part, 49);
        assert_eq!(r.alpha, Some(6));
        assert_eq!(r.h_m, Rational::new(295, 84));
        assert_eq!(r.csv_row(), "294,49,6,295,84");
        assert_eq!(rec(1).csv_row(), "1,1,0,2,1");
        assert!(StarterRecord::new(f(6)).is_err());
    }

    #[test]
    fn sumset_examples() {
        assert_eq!(
            interval_sumset_add(2, 3, 2).unwrap(),
            SumsetShape::Interval(8)
        );
        assert_eq!(
            interval_sumset_add(1, 3, 1).unwrap(),
            SumsetShape::Union(vec![(0, 1), (3, 4)])
        );
        assert_eq!(
            interval_sumset_add(5, 0, 3).unwrap(),
            SumsetShape::Interval(5)
        );
        assert!(interval_sumset_add(1, 1, 0).is_err());
        assert!(verify_sumset_grid(40, 40, 8).pass());
    }

    #[test]
    fn startercond_examples() {
        let r = verify_startercond(&rec(315)).unwrap();
        assert_eq!((r.a, r.k), (1, 315));
        assert!(r.pass);
        assert_eq!(r.checked_divisors, 2);
        let r4 = verify_startercond(&rec(4)).unwrap();
        assert_eq!((r4.a, r4.k), (1, 4));
        assert_eq!(r4.h_m, Rational::new(5, 2));
        assert!(r4.pass);
        let r294 = verify_startercond(&rec(294)).unwrap();
        assert_eq!((r294.a, r294.k), (6, 49));
        assert!(r294.pass);
        assert!(verify_startercond(&rec(1)).is_err());
    }

    #[test]
    fn corollary_examples() {
        assert!(verify_corollary_45(&rec(294)).unwrap().pass);
        let c4 = verify_corollary_45(&rec(4)).unwrap();
        assert!(!c4.skipped && c4.pass);
        assert!(verify_corollary_45(&rec(1)).unwrap().skipped);
    }

    #[test]
    fn starters_to_a_million() {
        let report = verify_starters_up_to(1_000_000).unwrap();
        assert!(
            report.pass(),
            "{:?}",
            &report.failures[..report.failures.len().min(5)]
        );
        assert!(report.checked > 0);
    }

    #[test]
    fn lemma_apq_examples() {
        let r = verify_lemma_apq(1, 3, 2, 1, 5).unwrap();
        assert_eq!(r.n, 45);
        assert_eq!(r.expected, IntervalSumset { g: 21, h: 24, a: 1 });
        assert!(r.pass);
        assert!(verify_lemma_apq(1, 3, 3, 1, 5).unwrap().pass);
        let r525 = verify_lemma_apq(3, 5, 2, 1, 7).unwrap();
        assert_eq!(r525.n, 525);
        assert!(r525.pass);
        assert!(verify_lemma_apq(2, 4, 2, 1, 5).is_err());
        assert!(verify_lemma_apq(1, 3, 1, 1, 5).is_err());
        assert!(verify_lemma_apq(1, 3, 2, 1, 7).is_err());
    }

    #[test]
    fn lemma_npnu_examples() {
        let r = verify_lemma_npnu(45, 1, 23, 1).unwrap();
        assert_eq!(r.n, 45 * 23);
        assert!(r.pass);
        assert!(verify_lemma_npnu(45, 1, 23, 2).unwrap().pass);
        assert!(matches!(
            verify_lemma_npnu(45, 1, 29, 1),
            Err(Error::Domain(_))
        ));
        assert!(verify_lemma_npnu(45, 2, 23, 1).is_err());
    }

    #[test]
    fn lemma_suites() {
        let r52 = verify_lemma_apq_all(1_000_000).unwrap();
        assert!(r52.pass() && r52.checked > 10, "{r52:?}");
        let r53 = verify_lemma_npnu_all(200_000, 500).unwrap();
        assert!(r53.pass() && r53.checked > 10, "{r53:?}");
    }

    #[test]
    fn profile_decays() {
        let rows = starter_count_profile(&[10_000, 100_000, 1_000_000]).unwrap();
        assert!(density_decays(&rows));
        assert_eq!(starter_count_profile(&[1000]).unwrap().len(), 1);
    }
}
