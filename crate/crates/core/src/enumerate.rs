//! Depth-first enumeration of the multiplicative construction trees.
//!
//! Every weakly φ-practical number `n > 1` has a unique parent obtained by
//! removing the full power of its largest prime, so the weakly φ-practical
//! numbers below a limit form a tree rooted at 1. The same shape, with a
//! different growth bound, covers practical and 2-dense numbers; restricting
//! to exponent 1 and rooting at `m` gives the sets `B_m`.
//!
//! Subtrees are independent, so counts are computed by splitting the tree
//! near the root and summing per-subtree counters. Leaves that hang off a
//! φ-practical parent with a single new prime are counted in bulk by prime
//! table lookups rather than visited one at a time.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::phi0_exact;
use crate::arith::{factorize, isqrt, FactoredInteger, PrimeTable};
use crate::classify::is_complete_sequence;
use crate::error::{Error, Result};

/// Largest limit accepted by the enumerators.
pub const MAX_LIMIT: u64 = 1 << 35;

/// Largest `x` accepted by [`b_m`].
pub const MAX_BM_LIMIT: u64 = 1_000_000_000;

/// Largest `x` accepted by [`verify_bm_identity`].
pub const MAX_IDENTITY_LIMIT: u64 = 100_000_000;

/// The growth bound `θ` that decides which primes may extend a number.
#[derive(Clone, Copy, Debug)]
pub enum GrowthFunction {
    /// `θ(n) = n + 2`.
    PhiPractical,
    /// `θ(n) = 1 + σ(n)`.
    Practical,
    /// `θ(n) = 2n`.
    Dense,
    /// User-supplied bound; `ratio_bound` must satisfy `θ(n) ≤ ratio_bound · n`
    /// and sizes the prime tables.
    Custom {
        name: &'static str,
        theta: fn(&FactoredInteger) -> u64,
        ratio_bound: u64,
    },
}

/// Linear growth constant accepted by [`GrowthFunction::validate`].
pub const GROWTH_RATIO_LIMIT: u64 = 4;

impl GrowthFunction {
    pub fn theta(&self, n: &FactoredInteger) -> u64 {
        match self {
            GrowthFunction::PhiPractical => n.value().saturating_add(2),
            GrowthFunction::Practical => n.sigma().saturating_add(1),
            GrowthFunction::Dense => n.value().saturating_mul(2),
            GrowthFunction::Custom { theta, .. } => theta(n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GrowthFunction::PhiPractical => "phi_practical_theta",
            GrowthFunction::Practical => "practical_theta",
            GrowthFunction::Dense => "dense_theta",
            GrowthFunction::Custom { name, .. } => name,
        }
    }

    /// Checks `θ(1) ≥ 2` and `n ≤ θ(n) ≤ 4n` on the given sample.
    pub fn validate<'a>(
        &self,
        samples: impl IntoIterator<Item = &'a FactoredInteger>,
    ) -> Result<()> {
        let at_one = self.theta(&FactoredInteger::one());
        if at_one < 2 {
            return Err(Error::Domain(format!(
                "{}: θ(1) = {at_one} < 2",
                self.name()
            )));
        }
        for n in samples {
            let t = self.theta(n);
            let v = n.value();
            if t < v || t > GROWTH_RATIO_LIMIT.saturating_mul(v).max(at_one) {
                return Err(Error::Domain(format!(
                    "{}: θ({v}) = {t} outside [{v}, {GROWTH_RATIO_LIMIT}·{v}]",
                    self.name()
                )));
            }
        }
        Ok(())
    }

    /// A bound on every prime that can extend a node below `limit`.
    fn prime_bound(&self, limit: u64) -> u64 {
        match self {
            GrowthFunction::PhiPractical => isqrt(limit) + 3,
            GrowthFunction::Dense => isqrt(limit.saturating_mul(2)) + 3,
            GrowthFunction::Practical => {
                // σ(n)/n is at most the harmonic number H_n < 2 + ln n.
                let k = 2 + (limit.max(2) as f64).ln().ceil() as u64;
                isqrt(limit.saturating_mul(k)) + 3
            }
            GrowthFunction::Custom { ratio_bound, .. } => {
                isqrt(limit.saturating_mul(*ratio_bound)) + ratio_bound + 3
            }
        }
        .min(limit.max(2))
    }
}

/// The integer classes that can be counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NumberClass {
    PhiPractical,
    WeaklyPhiPractical,
    Practical,
    TwoDense,
}

impl NumberClass {
    pub fn name(&self) -> &'static str {
        match self {
            NumberClass::PhiPractical => "phi",
            NumberClass::WeaklyPhiPractical => "weakly",
            NumberClass::Practical => "practical",
            NumberClass::TwoDense => "two_dense",
        }
    }
}

impl fmt::Display for NumberClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NumberClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi" | "phi_practical" | "phi-practical" => Ok(NumberClass::PhiPractical),
            "weakly" | "weak" => Ok(NumberClass::WeaklyPhiPractical),
            "practical" => Ok(NumberClass::Practical),
            "two_dense" | "2dense" | "two-dense" | "dense" => Ok(NumberClass::TwoDense),
            _ => Err(Error::Parse(format!("unknown class '{s}'"))),
        }
    }
}

fn check_limit(limit: u64, max: u64) -> Result<()> {
    if limit == 0 {
        return Err(Error::Domain("limit must be positive".into()));
    }
    if limit > max {
        return Err(Error::Capacity(format!("limit {limit} exceeds {max}")));
    }
    Ok(())
}

/// Exact counts at a list of ascending thresholds, accumulated per bucket.
#[derive(Clone, Debug)]
struct ThresholdCounter {
    thresholds: Vec<u64>,
    buckets: Vec<u64>,
}

impl ThresholdCounter {
    fn new(thresholds: &[u64]) -> Self {
        ThresholdCounter {
            thresholds: thresholds.to_vec(),
            buckets: vec![0; thresholds.len() + 1],
        }
    }

    #[inline]
    fn add(&mut self, n: u64) {
        let i = self.thresholds.partition_point(|&t| t < n);
        self.buckets[i] += 1;
    }

    /// Adds `m·p` for every `p` in the ascending slice.
    fn add_run(&mut self, m: u64, primes: &[u64]) {
        let mut prev = 0usize;
        for (i, &t) in self.thresholds.iter().enumerate() {
            let upto = primes.partition_point(|&p| p <= t / m);
            self.buckets[i] += (upto - prev) as u64;
            prev = upto;
        }
        self.buckets[self.thresholds.len()] += (primes.len() - prev) as u64;
    }

    fn merge(&mut self, other: &ThresholdCounter) {
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            *a += b;
        }
    }

    fn cumulative(&self) -> Vec<u64> {
        let mut acc = 0;
        self.buckets[..self.thresholds.len()]
            .iter()
            .map(|b| {
                acc += b;
                acc
            })
            .collect()
    }
}

fn sort_thresholds(thresholds: &[u64]) -> Result<()> {
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "thresholds must be strictly ascending".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Weakly φ-practical tree with φ-practical flags
// ---------------------------------------------------------------------------

/// Receives the nodes of the weakly φ-practical tree.
pub(crate) trait PhiSink {
    fn node(&mut self, n: &FactoredInteger, phi_practical: bool, starter: bool);

    /// `m·p` for each `p` in `primes`; all are φ-practical leaves and none is a starter.
    fn phi_leaf_run(&mut self, m: &FactoredInteger, primes: &[u64]) {
        let mut c = m.clone();
        for &p in primes {
            c.push(p, 1);
            self.node(&c, true, false);
            c.pop();
        }
    }

    fn merge(&mut self, other: Self)
    where
        Self: Sized;
}

struct PhiTask {
    node: FactoredInteger,
    phi: bool,
    tots: Option<Vec<u64>>,
}

struct PhiWalker<'a> {
    limit: u64,
    table: &'a PrimeTable,
    split_at: u64,
}

/// Merge of two ascending sequences into `out`.
fn merge_into(out: &mut Vec<u64>, a: &[u64], b: impl Iterator<Item = u64>) {
    out.clear();
    let mut i = 0;
    for y in b {
        while i < a.len() && a[i] <= y {
            out.push(a[i]);
            i += 1;
        }
        out.push(y);
    }
    out.extend_from_slice(&a[i..]);
}

/// Whether `tots ∪ k·tots` (as a multiset) is a complete sequence, without
/// materializing it.
fn complete_after_scaling(tots: &[u64], k: u64) -> bool {
    let mut reach: u64 = 0;
    let mut i = 0;
    for &t in tots {
        let y = t * k;
        while i < tots.len() && tots[i] <= y {
            if tots[i] > reach + 1 {
                return false;
            }
            reach += tots[i];
            i += 1;
        }
        if y > reach + 1 {
            return false;
        }
        reach += y;
    }
    for &t in &tots[i..] {
        if t > reach + 1 {
            return false;
        }
        reach += t;
    }
    true
}

impl PhiWalker<'_> {
    /// Visits every descendant of `node` (not `node` itself).
    fn walk<S: PhiSink>(
        &self,
        node: &mut FactoredInteger,
        phi: bool,
        tots: Option<&[u64]>,
        sink: &mut S,
        mut spawn: Option<&mut Vec<PhiTask>>,
    ) {
        let m = node.value();
        let lo = node.largest_prime();
        let hi = (m + 2).min(self.limit / m);
        if hi <= lo {
            return;
        }
        let leaf_from = isqrt(self.limit / m);
        let mut own: Option<Vec<u64>> = None;
        let mut cur: Vec<u64> = Vec::new();
        let mut next: Vec<u64> = Vec::new();

        for &p in self.table.range(lo, hi.min(leaf_from)) {
            // Only the non-φ-practical branches need divisor totients.
            let need_tots = !phi || p == m + 2;
            let base: &[u64] = if need_tots {
                match tots {
                    Some(t) => t,
                    None => {
                        own.get_or_insert_with(|| node.divisor_totients().expect("divisor guard"))
                    }
                }
            } else {
                &[]
            };
            if need_tots {
                cur.clear();
                cur.extend_from_slice(base);
            }
            let mut pk = 1u64;
            let mut phi_pk = p - 1;
            let mut a = 0u32;
            while let Some(c) = pk.checked_mul(p).and_then(|v| v.checked_mul(m)) {
                if c > self.limit {
                    break;
                }
                pk *= p;
                a += 1;
                if need_tots {
                    merge_into(&mut next, &cur, base.iter().map(|&t| t * phi_pk));
                    std::mem::swap(&mut cur, &mut next);
                }
                let phi_c = if phi {
                    a == 1 || p <= m + 1
                } else {
                    is_complete_sequence(&cur)
                };
                let starter = phi_c && (a >= 2 || !phi);
                node.push(p, a);
                sink.node(node, phi_c, starter);
                if c.saturating_mul(p + 1) <= self.limit {
                    let child_tots = if phi_c { None } else { Some(cur.as_slice()) };
                    match spawn.as_deref_mut() {
                        Some(tasks) if c >= self.split_at => tasks.push(PhiTask {
                            node: node.clone(),
                            phi: phi_c,
                            tots: child_tots.map(|t| t.to_vec()),
                        }),
                        _ => self.walk(node, phi_c, child_tots, sink, spawn.as_deref_mut()),
                    }
                }
                node.pop();
                phi_pk *= p;
            }
        }

        let leaves = self.table.range(lo.max(leaf_from), hi);
        if leaves.is_empty() {
            return;
        }
        if phi {
            sink.phi_leaf_run(node, leaves);
        } else {
            let base = tots.expect("non-φ-practical nodes carry their totients");
            for &p in leaves {
                let phi_c = complete_after_scaling(base, p - 1);
                node.push(p, 1);
                sink.node(node, phi_c, phi_c);
                node.pop();
            }
        }
    }
}

/// Runs the weakly φ-practical tree up to `limit`, splitting subtrees across
/// the current rayon pool.
pub(crate) fn run_phi_tree<S, F>(limit: u64, make: F) -> Result<S>
where
    S: PhiSink + Send,
    F: Fn() -> S + Sync,
{
    check_limit(limit, MAX_LIMIT)?;
    let table = PrimeTable::new(isqrt(limit) + 3);
    let threads = rayon::current_num_threads();
    let walker = PhiWalker {
        limit,
        table: &table,
        split_at: if threads > 1 {
            (isqrt(limit) / 8).max(2)
        } else {
            u64::MAX
        },
    };
    let mut root = FactoredInteger::one();
    let mut sink = make();
    sink.node(&root, true, true);
    if threads == 1 {
        walker.walk(&mut root, true, None, &mut sink, None);
        return Ok(sink);
    }
    let mut tasks = Vec::new();
    walker.walk(&mut root, true, None, &mut sink, Some(&mut tasks));
    let merged = tasks
        .into_par_iter()
        .map(|mut t| {
            let mut s = make();
            walker.walk(&mut t.node, t.phi, t.tots.as_deref(), &mut s, None);
            s
        })
        .reduce_with(|mut a, b| {
            a.merge(b);
            a
        });
    if let Some(m) = merged {
        sink.merge(m);
    }
    Ok(sink)
}

struct VisitorSink<F>(F);

impl<F: FnMut(&FactoredInteger, bool, bool)> PhiSink for VisitorSink<F> {
    fn node(&mut self, n: &FactoredInteger, phi: bool, starter: bool) {
        (self.0)(n, phi, starter)
    }

    fn merge(&mut self, _other: Self) {
        unreachable!("visitor sinks run on a single thread")
    }
}

fn visit_phi_tree_serial(
    limit: u64,
    visitor: impl FnMut(&FactoredInteger, bool, bool),
) -> Result<()> {
    check_limit(limit, MAX_LIMIT)?;
    let table = PrimeTable::new(isqrt(limit) + 3);
    let walker = PhiWalker {
        limit,
        table: &table,
        split_at: u64::MAX,
    };
    let mut sink = VisitorSink(visitor);
    let mut root = FactoredInteger::one();
    sink.node(&root, true, true);
    walker.walk(&mut root, true, None, &mut sink, None);
    Ok(())
}

/// Visits every weakly φ-practical `n ≤ limit` exactly once with its
/// factorization and returns how many were visited. Visiting order is
/// depth-first, not ascending.
pub fn enumerate_weakly(limit: u64, mut visitor: impl FnMut(&FactoredInteger)) -> Result<u64> {
    let mut count = 0u64;
    visit_phi_tree_serial(limit, |n, _, _| {
        count += 1;
        visitor(n);
    })?;
    Ok(count)
}

/// As [`enumerate_weakly`], also passing the φ-practical and starter flags.
pub fn enumerate_weakly_flagged(
    limit: u64,
    mut visitor: impl FnMut(&FactoredInteger, bool, bool),
) -> Result<u64> {
    let mut count = 0u64;
    visit_phi_tree_serial(limit, |n, phi, starter| {
        count += 1;
        visitor(n, phi, starter);
    })?;
    Ok(count)
}

/// Per-threshold counts of weakly φ-practical numbers, φ-practical numbers
/// and starters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiCounts {
    pub thresholds: Vec<u64>,
    pub weakly: Vec<u64>,
    pub phi_practical: Vec<u64>,
    pub starters: Vec<u64>,
}

struct CountSink {
    weakly: ThresholdCounter,
    phi: ThresholdCounter,
    starters: ThresholdCounter,
}

impl PhiSink for CountSink {
    #[inline]
    fn node(&mut self, n: &FactoredInteger, phi: bool, starter: bool) {
        let v = n.value();
        self.weakly.add(v);
        if phi {
            self.phi.add(v);
        }
        if starter {
            self.starters.add(v);
        }
    }

    fn phi_leaf_run(&mut self, m: &FactoredInteger, primes: &[u64]) {
        self.weakly.add_run(m.value(), primes);
        self.phi.add_run(m.value(), primes);
    }

    fn merge(&mut self, other: Self) {
        self.weakly.merge(&other.weakly);
        self.phi.merge(&other.phi);
        self.starters.merge(&other.starters);
    }
}

/// Counts the weakly φ-practical numbers, φ-practical numbers and starters
/// up to each threshold in a single traversal.
pub fn count_phi_tree(thresholds: &[u64]) -> Result<PhiCounts> {
    sort_thresholds(thresholds)?;
    let Some(&limit) = thresholds.last() else {
        return Ok(PhiCounts {
            thresholds: Vec::new(),
            weakly: Vec::new(),
            phi_practical: Vec::new(),
            starters: Vec::new(),
        });
    };
    let sink = run_phi_tree(limit, || CountSink {
        weakly: ThresholdCounter::new(thresholds),
        phi: ThresholdCounter::new(thresholds),
        starters: ThresholdCounter::new(thresholds),
    })?;
    Ok(PhiCounts {
        thresholds: thresholds.to_vec(),
        weakly: sink.weakly.cumulative(),
        phi_practical: sink.phi.cumulative(),
        starters: sink.starters.cumulative(),
    })
}

/// `P_φ(limit)`, the number of φ-practical numbers in `[1, limit]`.
pub fn count_phi_practical(limit: u64) -> Result<u64> {
    check_limit(limit, MAX_LIMIT)?;
    Ok(count_phi_tree(&[limit])?.phi_practical[0])
}

// ---------------------------------------------------------------------------
// Generic growth trees
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exponents {
    All,
    SquarefreeOnly,
}

trait TreeSink {
    fn node(&mut self, n: &FactoredInteger);

    fn leaf_run(&mut self, m: &FactoredInteger, primes: &[u64]) {
        let mut c = m.clone();
        for &p in primes {
            c.push(p, 1);
            self.node(&c);
            c.pop();
        }
    }

    fn merge(&mut self, other: Self)
    where
        Self: Sized;
}

struct GrowthWalker<'a> {
    limit: u64,
    theta: GrowthFunction,
    exponents: Exponents,
    table: &'a PrimeTable,
    split_at: u64,
}

impl GrowthWalker<'_> {
    fn walk<S: TreeSink>(
        &self,
        node: &mut FactoredInteger,
        sink: &mut S,
        mut spawn: Option<&mut Vec<FactoredInteger>>,
    ) {
        let m = node.value();
        let lo = node.largest_prime();
        let hi = self.theta.theta(node).min(self.limit / m);
        if hi <= lo {
            return;
        }
        // p > leaf_from gives m·p² > limit, so m·p has no children.
        let leaf_from = isqrt(self.limit / m);
        for &p in self.table.range(lo, hi.min(leaf_from)) {
            let mut pk = 1u64;
            let mut a = 0u32;
            while let Some(c) = pk.checked_mul(p).and_then(|v| v.checked_mul(m)) {
                if c > self.limit {
                    break;
                }
                pk *= p;
                a += 1;
                node.push(p, a);
                sink.node(node);
                if c.saturating_mul(p + 1) <= self.limit {
                    match spawn.as_deref_mut() {
                        Some(tasks) if c >= self.split_at => tasks.push(node.clone()),
                        _ => self.walk(node, sink, spawn.as_deref_mut()),
                    }
                }
                node.pop();
                if self.exponents == Exponents::SquarefreeOnly {
                    break;
                }
            }
        }
        let leaves = self.table.range(lo.max(leaf_from), hi);
        if !leaves.is_empty() {
            sink.leaf_run(node, leaves);
        }
    }
}

fn run_growth_tree<S, F>(
    root: &FactoredInteger,
    limit: u64,
    theta: GrowthFunction,
    exponents: Exponents,
    make: F,
) -> S
where
    S: TreeSink + Send,
    F: Fn() -> S + Sync,
{
    let table = PrimeTable::new(theta.prime_bound(limit));
    let threads = rayon::current_num_threads();
    let walker = GrowthWalker {
        limit,
        theta,
        exponents,
        table: &table,
        split_at: if threads > 1 {
            (isqrt(limit) / 8).max(2)
        } else {
            u64::MAX
        },
    };
    let mut node = root.clone();
    let mut sink = make();
    if root.value() > limit {
        return sink;
    }
    sink.node(&node);
    if threads == 1 {
        walker.walk(&mut node, &mut sink, None);
        return sink;
    }
    let mut tasks = Vec::new();
    walker.walk(&mut node, &mut sink, Some(&mut tasks));
    let merged = tasks
        .into_par_iter()
        .map(|mut t| {
            let mut s = make();
            walker.walk(&mut t, &mut s, None);
            s
        })
        .reduce_with(|mut a, b| {
            a.merge(b);
            a
        });
    if let Some(m) = merged {
        sink.merge(m);
    }
    sink
}

struct TreeCounter(ThresholdCounter);

impl TreeSink for TreeCounter {
    #[inline]
    fn node(&mut self, n: &FactoredInteger) {
        self.0.add(n.value());
    }

    fn leaf_run(&mut self, m: &FactoredInteger, primes: &[u64]) {
        self.0.add_run(m.value(), primes);
    }

    fn merge(&mut self, other: Self) {
        self.0.merge(&other.0);
    }
}

struct TreeCollector(Vec<FactoredInteger>);

impl TreeSink for TreeCollector {
    fn node(&mut self, n: &FactoredInteger) {
        self.0.push(n.clone());
    }

    fn merge(&mut self, other: Self) {
        self.0.extend(other.0);
    }
}

fn class_theta(class: NumberClass) -> GrowthFunction {
    match class {
        NumberClass::PhiPractical | NumberClass::WeaklyPhiPractical => GrowthFunction::PhiPractical,
        NumberClass::Practical => GrowthFunction::Practical,
        NumberClass::TwoDense => GrowthFunction::Dense,
    }
}

/// Exact counts of `class` up to each of the ascending `thresholds`.
pub fn count_class_at(class: NumberClass, thresholds: &[u64]) -> Result<Vec<u64>> {
    sort_thresholds(thresholds)?;
    let Some(&limit) = thresholds.last() else {
        return Ok(Vec::new());
    };
    check_limit(limit, MAX_LIMIT)?;
    if class == NumberClass::PhiPractical {
        return Ok(count_phi_tree(thresholds)?.phi_practical);
    }
    let sink = run_growth_tree(
        &FactoredInteger::one(),
        limit,
        class_theta(class),
        Exponents::All,
        || TreeCounter(ThresholdCounter::new(thresholds)),
    );
    Ok(sink.0.cumulative())
}

pub fn count_class(limit: u64, class: NumberClass) -> Result<u64> {
    check_limit(limit, MAX_LIMIT)?;
    Ok(count_class_at(class, &[limit])?[0])
}

/// All members of `class` up to `limit`, ascending.
pub fn list_class(limit: u64, class: NumberClass) -> Result<Vec<FactoredInteger>> {
    check_limit(limit, MAX_LIMIT)?;
    let mut out = match class {
        NumberClass::PhiPractical | NumberClass::WeaklyPhiPractical => {
            let want_phi = class == NumberClass::PhiPractical;
            let mut v = Vec::new();
            visit_phi_tree_serial(limit, |n, phi, _| {
                if phi || !want_phi {
                    v.push(n.clone());
                }
            })?;
            v
        }
        _ => {
            run_growth_tree(
                &FactoredInteger::one(),
                limit,
                class_theta(class),
                Exponents::All,
                || TreeCollector(Vec::new()),
            )
            .0
        }
    };
    out.sort_unstable_by_key(|f| f.value());
    Ok(out)
}

// ---------------------------------------------------------------------------
// The sets B_m
// ---------------------------------------------------------------------------

/// Membership of `n` in `B_m`: `n = m·b` with `b` squarefree, `P⁺(m) < P⁻(b)`
/// and every prime of `b`, in increasing order, at most `θ` of the product
/// of `m` and the primes of `b` before it.
pub fn chi_m(m: &FactoredInteger, n: u64, theta: GrowthFunction) -> bool {
    let mv = m.value();
    if n == 0 || !n.is_multiple_of(mv) {
        return false;
    }
    let Ok(b) = factorize(n / mv, None) else {
        return false;
    };
    if !b.is_squarefree() || m.largest_prime() >= b.smallest_prime() {
        return false;
    }
    let mut prefix = m.clone();
    for &(p, _) in b.factors() {
        if p > theta.theta(&prefix) {
            return false;
        }
        prefix.push(p, 1);
    }
    true
}

/// `B_m(x) = #{n ≤ x : n ∈ B_m}`.
pub fn b_m(m: &FactoredInteger, x: u64, theta: GrowthFunction) -> Result<u64> {
    Ok(b_m_at(m, &[x], theta)?[0])
}

/// `B_m` at several ascending thresholds.
pub fn b_m_at(m: &FactoredInteger, thresholds: &[u64], theta: GrowthFunction) -> Result<Vec<u64>> {
    sort_thresholds(thresholds)?;
    let Some(&limit) = thresholds.last() else {
        return Ok(Vec::new());
    };
    check_limit(limit, MAX_BM_LIMIT)?;
    let sink = run_growth_tree(m, limit, theta, Exponents::SquarefreeOnly, || {
        TreeCounter(ThresholdCounter::new(thresholds))
    });
    Ok(sink.0.cumulative())
}

/// Members of `B_m` up to `x`, ascending.
pub fn list_b_m(
    m: &FactoredInteger,
    x: u64,
    theta: GrowthFunction,
) -> Result<Vec<FactoredInteger>> {
    check_limit(x, MAX_BM_LIMIT)?;
    let mut v = run_growth_tree(m, x, theta, Exponents::SquarefreeOnly, || {
        TreeCollector(Vec::new())
    })
    .0;
    v.sort_unstable_by_key(|f| f.value());
    Ok(v)
}

/// Both sides of the decomposition
/// `B_m(x) = Φ₀(x/m, P⁺(m)) − Σ_{mb ≤ √x} χ_m(mb)·Φ₀(x/mb, θ(mb)) + B_m(√x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BmIdentityReport {
    pub m: u64,
    pub x: u64,
    pub sqrt_x: u64,
    pub lhs: u64,
    pub head: u64,
    pub subtracted: u64,
    pub tail: u64,
    pub rhs: i128,
    pub terms: usize,
    pub pass: bool,
}

/// Evaluates both sides of the `B_m` decomposition exactly, with `√x`
/// taken as the integer floor.
pub fn verify_bm_identity(
    m: &FactoredInteger,
    x: u64,
    theta: GrowthFunction,
) -> Result<BmIdentityReport> {
    check_limit(x, MAX_IDENTITY_LIMIT)?;
    let mv = m.value();
    let r = isqrt(x);
    let lhs = b_m(m, x, theta)?;
    let head = phi0_exact(x / mv, m.largest_prime())?;
    let members = list_b_m(m, r, theta)?;
    let mut subtracted = 0u64;
    for mb in &members {
        subtracted += phi0_exact(x / mb.value(), theta.theta(mb))?;
    }
    let tail = b_m(m, r, theta)?;
    let rhs = head as i128 - subtracted as i128 + tail as i128;
    Ok(BmIdentityReport {
        m: mv,
        x,
        sqrt_x: r,
        lhs,
        head,
        subtracted,
        tail,
        rhs,
        terms: members.len(),
        pass: rhs == lhs as i128,
    })
}

// ---------------------------------------------------------------------------
// Count tables
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRow {
    pub x: u64,
    pub count: u64,
    /// `count / (x / log x)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountTable {
    pub class_name: String,
    pub rows: Vec<CountRow>,
}

/// `count / (x / log x)`, written as `count·log x / x` so that `x = 1` gives 0.
pub fn log_ratio(count: u64, x: u64) -> f64 {
    count as f64 * (x as f64).ln() / x as f64
}

impl CountTable {
    /// CSV with header `x,count,ratio` and the ratio to six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,count,ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:.6}\n", r.x, r.count, r.ratio));
        }
        out
    }
}

pub fn build_count_table(class: NumberClass, thresholds: &[u64]) -> Result<CountTable> {
    let counts = count_class_at(class, thresholds)?;
    Ok(CountTable {
        class_name: class.name().to_string(),
        rows: thresholds
            .iter()
            .zip(counts)
            .map(|(&x, count)| CountRow {
                x,
                count,
                ratio: log_ratio(count, x),
            })
            .collect(),
    })
}

/// Empirical `c_m` approximations `B_m(x)·log x / x` at each threshold.
pub fn estimate_cm(
    m: &FactoredInteger,
    theta: GrowthFunction,
    xs: &[u64],
) -> Result<Vec<(u64, f64)>> {
    let counts = b_m_at(m, xs, theta)?;
    Ok(xs
        .iter()
        .zip(counts)
        .map(|(&x, c)| (x, log_ratio(c, x)))
        .collect())
}
