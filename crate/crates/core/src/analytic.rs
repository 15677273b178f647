//! Buchstab's function, Mertens-type products, and exact and asymptotic
//! counts of rough numbers.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::arith::{for_each_prime, isqrt, primes_up_to};
use crate::error::{Error, Result};

/// `e^γ`.
pub const EXP_GAMMA: f64 = 1.781_072_417_990_198;
/// `e^{-γ}`, the limit of `ω(u)`.
pub const EXP_NEG_GAMMA: f64 = 0.561_459_483_566_885_1;
/// `6/π²`.
pub const SIX_OVER_PI_SQUARED: f64 = 0.607_927_101_854_026_7;

/// Largest argument for which `ω` is tabulated.
pub const OMEGA_U_MAX: f64 = 64.0;
/// Default grid step `2^-10`.
pub const OMEGA_STEPS_PER_UNIT: usize = 1 << 10;

/// Rounding allowance for comparisons of `ω(u) − e^{−γ}` against bounds
/// smaller than the double-precision resolution of the marched grid.
pub const OMEGA_ROUNDING_SLACK: f64 = 1e-13;

/// Largest `x` accepted by the exact rough-number counters.
pub const MAX_SIEVE_X: u64 = 1_000_000_000;
/// Largest `y` accepted by the prime products.
pub const MAX_PRODUCT_Y: u64 = 1_000_000_000;

const SIEVE_BLOCK: u64 = 1 << 20;

/// Samples of `ω` on `[1, u_max]` at spacing `1/steps_per_unit`.
///
/// On `[1, 2]`, `ω(u) = 1/u`. On `[k, k+1]` for `k ≥ 2` the values come from
/// `u·ω(u) = k·ω(k) + ∫_{k-1}^{u-1} ω(s) ds`, where the integral runs over the
/// samples of the previous unit interval (composite Simpson, with a cubic
/// one-step rule for odd sample counts).
#[derive(Clone, Debug)]
pub struct OmegaGrid {
    u_max: usize,
    steps_per_unit: usize,
    samples: Vec<f64>,
    unit_integrals: Vec<f64>,
}

impl OmegaGrid {
    pub fn new(u_max: usize, steps_per_unit: usize) -> Result<Self> {
        if u_max < 2 || u_max as f64 > OMEGA_U_MAX {
            return Err(Error::Capacity(format!(
                "ω grid u_max {u_max} outside [2, {OMEGA_U_MAX}]"
            )));
        }
        if steps_per_unit < 4 || !steps_per_unit.is_multiple_of(2) {
            return Err(Error::Domain(
                "steps per unit must be even and at least 4".into(),
            ));
        }
        let n = steps_per_unit;
        let h = 1.0 / n as f64;
        let mut samples = vec![0.0; (u_max - 1) * n + 1];
        for (j, s) in samples.iter_mut().enumerate().take(n + 1) {
            *s = 1.0 / (1.0 + j as f64 * h);
        }
        let mut unit_integrals = Vec::with_capacity(u_max - 1);
        let mut cumulative = vec![0.0; n + 1];
        for k in 2..u_max {
            let prev = (k - 2) * n;
            let f = &samples[prev..=prev + n];
            cumulative_integral(f, h, &mut cumulative);
            unit_integrals.push(cumulative[n]);
            let start = (k - 1) * n;
            let k_omega_k = k as f64 * samples[start];
            for j in 1..=n {
                let u = k as f64 + j as f64 * h;
                samples[start + j] = (k_omega_k + cumulative[j]) / u;
            }
        }
        let last = (u_max - 2) * n;
        cumulative_integral(&samples[last..=last + n], h, &mut cumulative);
        unit_integrals.push(cumulative[n]);
        Ok(OmegaGrid {
            u_max,
            steps_per_unit,
            samples,
            unit_integrals,
        })
    }

    pub fn u_max(&self) -> f64 {
        self.u_max as f64
    }

    pub fn step(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }

    /// `(u, ω(u))` at every grid point.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = self.step();
        self.samples
            .iter()
            .enumerate()
            .map(move |(j, &w)| (1.0 + j as f64 * h, w))
    }

    /// `∫_k^{k+1} ω(u) du` for `k = 1, …, u_max − 1`.
    pub fn unit_integrals(&self) -> &[f64] {
        &self.unit_integrals
    }

    pub fn omega(&self, u: f64) -> Result<f64> {
        if u.is_nan() {
            return Err(Error::Domain("ω(NaN)".into()));
        }
        if u < 1.0 {
            return Ok(0.0);
        }
        if u > self.u_max as f64 {
            return Err(Error::Capacity(format!(
                "ω({u}) beyond the tabulated range [1, {}]",
                self.u_max
            )));
        }
        if u <= 2.0 {
            return Ok(1.0 / u);
        }
        let n = self.steps_per_unit;
        let h = self.step();
        let k = (u.floor() as usize).min(self.u_max - 1);
        let start = (k - 1) * n;
        let offset = (u - k as f64) / h;
        let j0 = (offset.floor() as usize).min(n - 1);
        let tau = offset - j0 as f64;
        if tau == 0.0 {
            return Ok(self.samples[start + j0]);
        }
        // ∫_{k}^{u} ω(t−1) dt over the previous unit interval.
        let prev = &self.samples[start - n..=start];
        let mut cumulative = vec![0.0; n + 1];
        cumulative_integral(prev, h, &mut cumulative);
        let partial = cubic_partial_integral(prev, j0, tau, h);
        let k_omega_k = k as f64 * self.samples[start];
        Ok((k_omega_k + cumulative[j0] + partial) / u)
    }

    /// Largest value of the left/right linear-extrapolation mismatch at the
    /// integer joints `2, …, u_max − 1`.
    pub fn max_joint_jump(&self) -> f64 {
        let n = self.steps_per_unit;
        (2..self.u_max)
            .map(|k| {
                let i = (k - 1) * n;
                let s = &self.samples;
                let left = 2.0 * s[i - 1] - s[i - 2];
                let right = 2.0 * s[i + 1] - s[i + 2];
                (left - right).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|u·ω(u) − 1|` over the samples on `[1, 2]`.
    pub fn max_initial_defect(&self) -> f64 {
        self.samples()
            .take_while(|&(u, _)| u <= 2.0)
            .map(|(u, w)| (u * w - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|ω(u) − e^{−γ}| − 1/Γ(u+1)` over samples with `u ≤ u_limit`;
    /// negative when the bound holds everywhere.
    pub fn max_bound_excess(&self, u_limit: f64) -> f64 {
        self.samples()
            .take_while(|&(u, _)| u <= u_limit)
            .map(|(u, w)| (w - EXP_NEG_GAMMA).abs() - 1.0 / gamma(u + 1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Running integral of the samples `f` (spacing `h`) from the first point.
fn cumulative_integral(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len() - 1;
    out[0] = 0.0;
    for j in 1..=n {
        out[j] = if j % 2 == 0 {
            out[j - 2] + h / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j])
        } else if j == 1 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else {
            out[j - 1] + h / 24.0 * (-f[j - 2] + 13.0 * f[j - 1] + 13.0 * f[j] - f[j + 1])
        };
    }
}

/// `∫` of the cubic interpolant of `f` from sample `j0` to `j0 + tau`.
fn cubic_partial_integral(f: &[f64], j0: usize, tau: f64, h: f64) -> f64 {
    let n = f.len() - 1;
    let i0 = j0.saturating_sub(1).min(n - 3);
    let xs = [i0 as f64, (i0 + 1) as f64, (i0 + 2) as f64, (i0 + 3) as f64];
    let ys = [f[i0], f[i0 + 1], f[i0 + 2], f[i0 + 3]];
    let interp = |x: f64| -> f64 {
        (0..4)
            .map(|i| {
                let mut l = ys[i];
                for m in 0..4 {
                    if m != i {
                        l *= (x - xs[m]) / (xs[i] - xs[m]);
                    }
                }
                l
            })
            .sum()
    };
    // Three-point Gauss–Legendre is exact for the cubic.
    let a = j0 as f64;
    let b = a + tau;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let r = (0.6f64).sqrt();
    let s = 5.0 / 9.0 * interp(mid - half * r)
        + 8.0 / 9.0 * interp(mid)
        + 5.0 / 9.0 * interp(mid + half * r);
    s * half * h
}

fn default_grid() -> &'static OmegaGrid {
    static GRID: OnceLock<OmegaGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        OmegaGrid::new(OMEGA_U_MAX as usize, OMEGA_STEPS_PER_UNIT).expect("default grid")
    })
}

/// The shared grid on `[1, 64]` with step `2^-10`.
pub fn omega_grid() -> &'static OmegaGrid {
    default_grid()
}

/// Buchstab's `ω(u)`, zero for `u < 1`.
pub fn buchstab_omega(u: f64) -> Result<f64> {
    default_grid().omega(u)
}

fn check_product_y(y: u64) -> Result<()> {
    if y > MAX_PRODUCT_Y {
        return Err(Error::Capacity(format!("y = {y} exceeds {MAX_PRODUCT_Y}")));
    }
    Ok(())
}

fn log_space_product(y: u64, log_factor: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for_each_prime(y, |p| acc += log_factor(p as f64));
    acc.exp()
}

/// `∏_{p ≤ y} (1 − 1/p)`.
pub fn mertens_product(y: u64) -> Result<f64> {
    check_product_y(y)?;
    if y <= 1_000_000 {
        return Ok(primes_up_to(y)
            .iter()
            .map(|&p| 1.0 - 1.0 / p as f64)
            .product());
    }
    Ok(log_space_product(y, |p| (-1.0 / p).ln_1p()))
}

/// `∏_{p ≤ y} (1 + 1/p)^{-1}`.
pub fn one_plus_inv_product(y: u64) -> Result<f64> {
    check_product_y(y)?;
    if y <= 1_000_000 {
        return Ok(primes_up_to(y)
            .iter()
            .map(|&p| 1.0 / (1.0 + 1.0 / p as f64))
            .product());
    }
    Ok(log_space_product(y, |p| -(1.0 / p).ln_1p()))
}

fn rough_count(x: u64, y: u64, squarefree: bool) -> Result<u64> {
    if x > MAX_SIEVE_X {
        return Err(Error::Capacity(format!("x = {x} exceeds {MAX_SIEVE_X}")));
    }
    if x == 0 {
        return Ok(0);
    }
    if y >= x {
        return Ok(1);
    }
    let root = isqrt(x);
    let base = primes_up_to(root);
    // Sieving by primes up to min(y, √x) leaves 1 and the integers whose least
    // prime factor exceeds that bound; when y > √x those are primes.
    let z = y.min(root);
    let blocks = x.div_ceil(SIEVE_BLOCK);
    let survivors: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = (b * SIEVE_BLOCK + 1).max(2);
            let hi = ((b + 1) * SIEVE_BLOCK).min(x);
            if lo > hi {
                return 0;
            }
            let len = (hi - lo + 1) as usize;
            let mut struck = vec![false; len];
            for &p in &base {
                if p <= z {
                    let mut j = lo.div_ceil(p) * p;
                    while j <= hi {
                        struck[(j - lo) as usize] = true;
                        j += p;
                    }
                } else if squarefree {
                    let q = p * p;
                    let mut j = lo.div_ceil(q) * q;
                    while j <= hi {
                        struck[(j - lo) as usize] = true;
                        j += q;
                    }
                } else {
                    break;
                }
            }
            let first = if y >= lo { (y + 1 - lo) as usize } else { 0 };
            struck.iter().skip(first).filter(|&&s| !s).count() as u64
        })
        .sum();
    Ok(1 + survivors)
}

/// `Φ(x, y)`: the number of `n ≤ x` with no prime factor `≤ y`, counting `n = 1`.
pub fn phi_exact(x: u64, y: u64) -> Result<u64> {
    rough_count(x, y, false)
}

/// `Φ₀(x, y)`: as [`phi_exact`] restricted to squarefree `n`.
pub fn phi0_exact(x: u64, y: u64) -> Result<u64> {
    rough_count(x, y, true)
}

/// An exact rough-number count next to its asymptotic main term.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiResult {
    pub x: u64,
    pub y: u64,
    pub u: f64,
    pub exact: Option<u64>,
    pub estimate: f64,
    pub residual: Option<f64>,
    /// Whether the inputs lie in the range where the main term is asserted.
    pub in_range: bool,
}

impl PhiResult {
    pub const CSV_HEADER: &'static str = "x,y,exact,estimate,residual,u";

    pub fn csv_row(&self) -> String {
        let exact = self.exact.map(|e| e.to_string()).unwrap_or_default();
        let residual = self.residual.map(|r| format!("{r:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{:.6},{},{:.6}",
            self.x, self.y, exact, self.estimate, residual, self.u
        )
    }
}

fn u_of(x: u64, y: u64) -> f64 {
    (x as f64).ln() / (y as f64).ln()
}

fn with_exact(
    x: u64,
    y: u64,
    estimate: f64,
    in_range: bool,
    exact: impl Fn(u64, u64) -> Result<u64>,
) -> Result<PhiResult> {
    let exact = if x <= MAX_SIEVE_X {
        Some(exact(x, y)?)
    } else {
        None
    };
    Ok(PhiResult {
        x,
        y,
        u: u_of(x, y),
        exact,
        estimate,
        residual: exact.map(|e| e as f64 - estimate),
        in_range,
    })
}

/// `e^γ·x·ω(log x / log y)·∏_{p ≤ y}(1 − 1/p)` against `Φ(x, y)`.
pub fn phi_estimate(x: u64, y: u64) -> Result<PhiResult> {
    if y < 2 {
        return Err(Error::Domain("phi_estimate needs y ≥ 2".into()));
    }
    let u = u_of(x, y);
    let estimate = EXP_GAMMA * x as f64 * buchstab_omega(u)? * mertens_product(y)?;
    with_exact(x, y, estimate, x >= 1, phi_exact)
}

/// `(6/π²)·x·∏_{p ≤ y}(1 + 1/p)^{-1}` against `Φ₀(x, y)`. Inputs outside
/// `2 ≤ y ≤ e^{2√(log x)}` are evaluated and flagged.
pub fn phi0_estimate(x: u64, y: u64) -> Result<PhiResult> {
    if y < 2 {
        return Err(Error::Domain("phi0_estimate needs y ≥ 2".into()));
    }
    let estimate = SIX_OVER_PI_SQUARED * x as f64 * one_plus_inv_product(y)?;
    let upper = (2.0 * (x.max(1) as f64).ln().sqrt()).exp();
    with_exact(x, y, estimate, (y as f64) <= upper, phi0_exact)
}
