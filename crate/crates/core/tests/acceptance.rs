//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1–11 run once per thread count in `THREAD_COUNTS`; criterion 12
//! compares their outputs byte for byte. The rows 10^8..10^10 of Table 1 are
//! reported alongside criteria 1 and 2 but do not gate them.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use phipractical::analytic::{
    buchstab_omega, omega_grid, phi0_exact, phi_exact, EXP_NEG_GAMMA, OMEGA_ROUNDING_SLACK,
};
use phipractical::arith::{build_spf_sieve, factorize};
use phipractical::classify::{
    is_complete_sequence, is_phi_practical, is_weakly_phi_practical, subset_sums,
};
use phipractical::enumerate::{
    b_m_at, build_count_table, count_phi_tree, verify_bm_identity, GrowthFunction, NumberClass,
};
use phipractical::fit::{
    build_ratio_series, estimate_c, model_eval, FitParams, RatioRow, RatioSeries,
};
use phipractical::starters::{
    enumerate_starters, verify_lemma_apq_all, verify_starters_up_to, verify_sumset_grid,
};

const THREAD_COUNTS: [usize; 3] = [1, 4, 8];

/// Table 1 as printed.
const TABLE_COUNTS: [u64; 10] = [
    6, 28, 174, 1198, 9301, 74461, 635528, 5525973, 48386047, 431320394,
];
const TABLE_RATIOS: [&str; 10] = [
    "1.381551", "1.289448", "1.201949", "1.103399", "1.070817", "1.028717", "1.024350", "1.017922",
    "1.002717", "0.993152",
];
/// Rows 1..=GATING_ROWS decide the verdict.
const GATING_ROWS: usize = 7;

const TABLE_TIME_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_LIMIT: u64 = 20_000;
const CHAIN_LIMIT: u64 = 1_000_000;
const CATALOG_LIMIT: u64 = 10_000_000;
const OMEGA_CLOSED_FORM_TOL: f64 = 1e-9;
const OMEGA_TEN_TOL: f64 = 2.8e-7;
const FIT_REL_TOL: f64 = 1e-6;
const FIT_C_BAND: (f64, f64) = (0.9, 1.05);

struct Outcome {
    pass: bool,
    /// Deterministic record of what was computed.
    output: String,
    /// Timing and other run-dependent notes.
    note: String,
}

fn outcome(pass: bool, output: String) -> Outcome {
    Outcome {
        pass,
        output,
        note: String::new(),
    }
}

fn pow10(k: u32) -> u64 {
    10u64.pow(k)
}

fn extended_note(ok: bool) -> String {
    format!("10^8..10^10 {}", if ok { "match" } else { "MISMATCH" })
}

fn table1() -> Outcome {
    let xs: Vec<u64> = (1..=7).map(pow10).collect();
    let start = Instant::now();
    let counts = count_phi_tree(&xs).expect("count").phi_practical;
    let elapsed = start.elapsed();
    let pass = counts == TABLE_COUNTS[..GATING_ROWS] && elapsed <= TABLE_TIME_LIMIT;
    let extended = count_phi_tree(&[pow10(8), pow10(9), pow10(10)])
        .expect("count")
        .phi_practical;
    let note = format!(
        "{:.2}s; {}",
        elapsed.as_secs_f64(),
        extended_note(extended == TABLE_COUNTS[GATING_ROWS..])
    );
    Outcome {
        pass,
        output: format!("{counts:?} {extended:?}"),
        note,
    }
}

fn table1_ratios() -> Outcome {
    let xs: Vec<u64> = (1..=10).map(pow10).collect();
    let table = build_count_table(NumberClass::PhiPractical, &xs).expect("table");
    let printed: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("{:.6}", r.ratio))
        .collect();
    Outcome {
        pass: printed[..GATING_ROWS] == TABLE_RATIOS[..GATING_ROWS],
        note: extended_note(printed[GATING_ROWS..] == TABLE_RATIOS[GATING_ROWS..]),
        output: printed.join(","),
    }
}

fn oracle_equivalence() -> Outcome {
    let sieve = build_spf_sieve(ORACLE_LIMIT).unwrap();
    let mut mismatches = Vec::new();
    for n in 1..=ORACLE_LIMIT {
        let f = factorize(n, Some(&sieve)).unwrap();
        let greedy = is_complete_sequence(&f.divisor_totients().unwrap());
        let oracle = subset_sums(&f).unwrap().is_full();
        if greedy != oracle || greedy != is_phi_practical(&f) {
            mismatches.push(n);
        }
    }
    outcome(mismatches.is_empty(), format!("mismatches={mismatches:?}"))
}

fn inclusion_chain() -> Outcome {
    let sieve = build_spf_sieve(CHAIN_LIMIT).unwrap();
    let mut phi_not_weak = 0u64;
    let mut even_weak_not_phi = 0u64;
    for n in 1..=CHAIN_LIMIT {
        let f = factorize(n, Some(&sieve)).unwrap();
        let phi = is_phi_practical(&f);
        let weak = is_weakly_phi_practical(&f);
        phi_not_weak += (phi && !weak) as u64;
        even_weak_not_phi += (n % 2 == 0 && weak && !phi) as u64;
    }
    outcome(
        phi_not_weak == 0 && even_weak_not_phi == 0,
        format!("phi_not_weak={phi_not_weak} even_weak_not_phi={even_weak_not_phi}"),
    )
}

fn bm_identity() -> Outcome {
    let mut pass = true;
    let mut output = String::new();
    for m in [1u64, 4, 294] {
        let mf = factorize(m, None).unwrap();
        for k in 3..=6 {
            let r = verify_bm_identity(&mf, pow10(k), GrowthFunction::PhiPractical).unwrap();
            pass &= r.pass;
            write!(output, "({m},{}:{}={}) ", r.x, r.lhs, r.rhs).unwrap();
        }
    }
    outcome(pass, output)
}

fn starter_partition() -> Outcome {
    let xs: Vec<u64> = (3..=6).map(pow10).collect();
    let mut sums = vec![0u64; xs.len()];
    for rec in enumerate_starters(*xs.last().unwrap()).unwrap() {
        let counts = b_m_at(&rec.m, &xs, GrowthFunction::PhiPractical).unwrap();
        for (s, c) in sums.iter_mut().zip(counts) {
            *s += c;
        }
    }
    let expect = count_phi_tree(&xs).unwrap().phi_practical;
    outcome(sums == expect, format!("sums={sums:?} counts={expect:?}"))
}

fn starter_catalogs() -> Outcome {
    let starters = enumerate_starters(CATALOG_LIMIT).unwrap();
    let with = |s: u64| -> Vec<u64> {
        starters
            .iter()
            .filter(|r| r.squarefull_part == s)
            .map(|r| r.m.value())
            .collect()
    };
    let four = with(4);
    let fortynine = with(49);
    outcome(
        four == [4] && fortynine == [294, 735, 1470],
        format!("s=4: {four:?} s=49: {fortynine:?} total={}", starters.len()),
    )
}

fn starter_structure() -> Outcome {
    let sc = verify_starters_up_to(1_000_000).unwrap();
    let l52 = verify_lemma_apq_all(1_000_000).unwrap();
    let l51 = verify_sumset_grid(40, 40, 8);
    outcome(
        sc.pass() && l52.pass() && l51.pass() && sc.checked > 0 && l52.checked > 0,
        format!("{} | {} | {}", sc.summary(), l52.summary(), l51.summary()),
    )
}

fn buchstab() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..=200_000 {
        let u = 1.0 + 2.0 * i as f64 / 200_000.0;
        let closed = if u <= 2.0 {
            1.0 / u
        } else {
            (1.0 + (u - 1.0).ln()) / u
        };
        worst = worst.max((buchstab_omega(u).unwrap() - closed).abs());
    }
    let excess = omega_grid().max_bound_excess(20.0);
    let ten = (buchstab_omega(10.0).unwrap() - EXP_NEG_GAMMA).abs();
    outcome(
        worst <= OMEGA_CLOSED_FORM_TOL && excess <= OMEGA_ROUNDING_SLACK && ten <= OMEGA_TEN_TOL,
        format!("closed_form_err={worst:.3e} bound_excess={excess:.3e} omega10_err={ten:.3e}"),
    )
}

fn rough_counts() -> Outcome {
    let fixtures = (
        phi_exact(10, 2).unwrap(),
        phi_exact(100, 3).unwrap(),
        phi0_exact(10, 2).unwrap(),
    );
    let mut nested = true;
    for k in 1..=7 {
        for y in [2u64, 3, 5, 7, 10, 30, 100, 1000, 3162] {
            let x = pow10(k);
            nested &= phi0_exact(x, y).unwrap() <= phi_exact(x, y).unwrap();
        }
    }
    outcome(
        fixtures == (5, 33, 4) && nested,
        format!("fixtures={fixtures:?} nested={nested}"),
    )
}

/// The seven parameters as printed for the fit on 10 ≤ v ≤ 34.
const PRINTED_FIT: [f64; 7] = [
    0.979154, 17.3307, 1.66071, -2.94536, -4.82409, 2.30768, 12.7422,
];
/// Relative agreement expected with the printed (rounded) parameters.
const PRINTED_FIT_TOL: f64 = 1e-5;

fn fit() -> Outcome {
    let [c, a, b, d, e, f, g] = PRINTED_FIT;
    let truth = FitParams::new(c, a, b, d, e, f, g);
    let synthetic = RatioSeries {
        rows: (10..=34)
            .map(|v| RatioRow {
                v,
                count: 0,
                ratio: model_eval(&truth, v as f64),
            })
            .collect(),
    };
    let s = estimate_c(&synthetic).unwrap().params;
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let round_trip = s.converged
        && rel(s.c, truth.c) < FIT_REL_TOL
        && rel(s.a, truth.a) < FIT_REL_TOL
        && rel(s.b, truth.b) < FIT_REL_TOL;
    let full = build_ratio_series(10, 34).unwrap();
    let desk = RatioSeries {
        rows: full.rows[..18].to_vec(),
    };
    let real = estimate_c(&desk).unwrap().params;
    let in_band = real.converged && real.c >= FIT_C_BAND.0 && real.c <= FIT_C_BAND.1;
    let wide = estimate_c(&full).unwrap().params;
    let fitted = [wide.c, wide.a, wide.b, wide.d, wide.e, wide.f, wide.g];
    let worst = fitted
        .iter()
        .zip(PRINTED_FIT)
        .map(|(&x, y)| rel(x, y))
        .fold(0.0, f64::max);
    Outcome {
        pass: round_trip && in_band,
        output: format!(
            "synthetic C={:.9} a={:.9} b={:.9} | v<=27 C={:.6} rms={:.3e} converged={} \
             | v<=34 C={:.6} a={:.4} b={:.5} d={:.5} e={:.5} f={:.5} g={:.4}",
            s.c,
            s.a,
            s.b,
            real.c,
            real.rms,
            real.converged,
            wide.c,
            wide.a,
            wide.b,
            wide.d,
            wide.e,
            wide.f,
            wide.g
        ),
        note: format!(
            "v<=34 fit vs printed parameters: max rel dev {worst:.1e} ({})",
            if wide.converged && worst < PRINTED_FIT_TOL {
                "match"
            } else {
                "MISMATCH"
            }
        ),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    ("Table 1 counts", table1),
    ("Table 1 ratios", table1_ratios),
    ("greedy test equals subset-sum oracle", oracle_equivalence),
    ("inclusion chain", inclusion_chain),
    ("B_m decomposition identity", bm_identity),
    ("starter partition", starter_partition),
    ("starter catalogs", starter_catalogs),
    ("starter condition and interval lemmas", starter_structure),
    ("Buchstab omega", buchstab),
    ("rough-number fixtures", rough_counts),
    ("ratio model fit", fit),
];

fn run_all(threads: usize) -> Vec<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(|| {
        CRITERIA
            .iter()
            .map(|(name, f)| {
                let start = Instant::now();
                let o = f();
                eprintln!(
                    "  [{threads} threads] {name}: {:.1}s",
                    start.elapsed().as_secs_f64()
                );
                o
            })
            .collect()
    })
}

fn main() {
    // Ignore libtest flags such as `--nocapture` or a name filter.
    let runs: Vec<Vec<Outcome>> = THREAD_COUNTS.iter().map(|&t| run_all(t)).collect();
    let first = &runs[0];
    let mut failed = 0;
    for (i, ((name, _), o)) in CRITERIA.iter().zip(first).enumerate() {
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        let note = if o.note.is_empty() {
            String::new()
        } else {
            format!(" [{}]", o.note)
        };
        println!("{status} {:>2}. {name}: {}{note}", i + 1, o.output);
    }
    let identical = runs[1..].iter().all(|run| {
        run.iter()
            .zip(first)
            .all(|(a, b)| a.output == b.output && a.pass == b.pass)
    });
    failed += !identical as usize;
    println!(
        "{} 12. determinism across {THREAD_COUNTS:?} threads: {}",
        if identical { "PASS" } else { "FAIL" },
        if identical {
            "identical outputs"
        } else {
            "outputs differ"
        }
    );
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
