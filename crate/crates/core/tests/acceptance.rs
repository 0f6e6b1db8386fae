//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line under `cargo test`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cardguess::asym::{
    central_binomial_series, central_moment_series, moment_series, series_from_two_term_recurrence,
    skewness_limit, AsymSeries, Evaluator, Leading, Parity, SymCoeff,
};
use cardguess::exactnum::{pow2, rational_to_f64, QPoly, Rational};
use cardguess::genfun::{d_deriv_at1, d_poly, exact_moments, exact_skewness};
use cardguess::mc::{chi_square, one_shuffle_distribution, run_simulation, summarize};
use cardguess::shuffle::{enumerate_k_shuffles, enumerate_one_shuffle, multiplicity, worpitzky_total, Permutation};
use cardguess::strategy::{
    bayes_next_pmf, correct_guesses_one_shuffle, expected_correct, find_min_counterexample, parse_threshold,
    shuffles_needed,
};
use cardguess::Limits;
use num_bigint::BigInt;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn c1_generating_function() -> Check {
    let d4 = d_poly(4);
    let want = QPoly::from_coeffs([0, 0, 5, 6, 5].map(BigInt::from).to_vec());
    ensure(d4 == want, || format!("D_4 = {:?}", d4.coeffs()))?;
    for n in 1..=20 {
        let total = d_poly(n).eval_at_one();
        ensure(total == pow2(n as u64), || format!("D_{n}(1) = {total}"))?;
    }
    Ok("D_4 = 5q^2 + 6q^3 + 5q^4, D_n(1) = 2^n for n <= 20".into())
}

fn c2_oracle_equivalence() -> Check {
    let limits = Limits::default();
    for n in 1..=10 {
        let dist = enumerate_one_shuffle(n, &limits).map_err(fail)?;
        let mut tally = vec![BigInt::from(0); n + 1];
        for (deck, w) in dist.entries() {
            let c = correct_guesses_one_shuffle(deck).map_err(fail)?;
            tally[c] += BigInt::from(w.clone());
        }
        let d = d_poly(n);
        for (i, t) in tally.iter().enumerate() {
            ensure(*t == d.coeff(i), || format!("n = {n}, {i} correct: brute force {t}, D_n {}", d.coeff(i)))?;
        }
    }
    Ok("brute-force play matches D_n for n <= 10".into())
}

fn c3_counterexample() -> Check {
    let limits = Limits::default();
    let pmf = bayes_next_pmf(10, 2, &[5], &limits).map_err(fail)?;
    let entry = |c: u16| pmf.entries.iter().find(|e| e.card == c).map(|e| (e.fraction.clone(), e.prob.clone()));
    let (f1, p1) = entry(1).ok_or("card 1 missing")?;
    let (f6, p6) = entry(6).ok_or("card 6 missing")?;
    ensure(f1 == "31752/105336" && f6 == "31570/105336", || format!("P(1) = {f1}, P(6) = {f6}"))?;
    ensure(p1 == r(31752, 105336) && p1 > p6, || "P(1) > P(6) fails".into())?;
    let found = find_min_counterexample(2, 10, &limits).map_err(fail)?;
    ensure(found.as_ref().map(|c| c.n) == Some(10), || format!("n_max = 10 gave {found:?}"))?;
    let none = find_min_counterexample(2, 9, &limits).map_err(fail)?;
    ensure(none.is_none(), || format!("n_max = 9 gave {none:?}"))?;
    Ok("P(1) = 31752/105336 > P(6) = 31570/105336; minimal n = 10".into())
}

fn c4_randomness_indicator() -> Check {
    let limits = Limits::default();
    let rows: [(usize, [Rational; 6]); 2] = [
        (2, [r(2, 1), r(7, 4), r(13, 8), r(25, 16), r(49, 32), r(97, 64)]),
        (3, [r(3, 1), r(19, 8), r(67, 32), r(251, 128), r(971, 512), r(3819, 2048)]),
    ];
    for (n, want) in rows {
        for (k, w) in want.iter().enumerate() {
            let got = expected_correct(n, k as u32, &limits).map_err(fail)?;
            ensure(&got == w, || format!("n = {n}, k = {k}: {got} != {w}"))?;
        }
    }
    let five = parse_threshold("5%").map_err(fail)?;
    let s2 = shuffles_needed(2, &five, &limits).map_err(fail)?;
    let s3 = shuffles_needed(3, &five, &limits).map_err(fail)?;
    ensure(s2 == 3 && s3 == 4, || format!("shuffles needed: n = 2 -> {s2}, n = 3 -> {s3}"))?;
    Ok("e_k sequences exact; 3 shuffles for n = 2, 4 for n = 3".into())
}

fn c5_central_binomial() -> Check {
    let want = [r(1, 1), r(-1, 8), r(1, 128), r(5, 1024), r(-21, 32768)];
    let coeffs = |s: &AsymSeries| (0..5).map(|i| s.coeff(-2 * i).as_rational()).collect::<Vec<_>>();
    let direct = central_binomial_series(4).map_err(fail)?;
    let from_rec = series_from_two_term_recurrence(
        &[2, 4],
        &[-1, -1],
        &Leading { ratio: r(4, 1), exponent: r(-1, 2) },
        4,
    )
    .map_err(fail)?;
    for (name, s) in [("closed form", &direct), ("recurrence", &from_rec)] {
        let got = coeffs(s);
        ensure(got.iter().zip(&want).all(|(g, w)| g.as_ref() == Some(w)), || format!("{name}: {got:?}"))?;
    }
    Ok("1, -1/8, 1/128, 5/1024, -21/32768 from both routes".into())
}

fn tail(s: &AsymSeries, from: i32, count: i32) -> Vec<Rational> {
    (0..count).map(|i| s.coeff(from - 2 * i).coeff(1, 1)).collect()
}

fn c6_first_moment() -> Check {
    let cases = [
        (Parity::Odd, [r(3, 4), r(53, 96), r(443, 384), r(75949, 18432), r(4621519, 221184)]),
        (Parity::Even, [r(3, 4), r(49, 96), r(439, 384), r(76709, 18432), r(4628519, 221184)]),
    ];
    for (parity, want) in cases {
        let s = moment_series(1, parity, 5).map_err(fail)?;
        let head = [(2, SymCoeff::frac(1, 2)), (1, SymCoeff::sqrt_2_over_pi()), (0, SymCoeff::frac(-1, 2))];
        for (p, c) in head {
            ensure(s.coeff(p) == c, || format!("{parity:?} n^({p}/2): {}", s.coeff(p)))?;
        }
        let got: Vec<Rational> = tail(&s, -1, 5).into_iter().map(|x| -x).collect();
        ensure(got == want, || format!("{parity:?} tail {got:?}"))?;
    }
    Ok("odd and even tails match term for term".into())
}

fn c7_higher_moments() -> Check {
    let s2p = SymCoeff::sqrt_2_over_pi;
    let inv_pi = SymCoeff::inv_pi;
    for (parity, t) in [
        (Parity::Odd, [r(-11, 4), r(-5, 96), r(-1753, 1152), r(-13733, 2048)]),
        (Parity::Even, [r(-11, 4), r(-1, 96), r(-1901, 1152), r(-13917, 2048)]),
    ] {
        let s = moment_series(2, parity, 5).map_err(fail)?;
        ensure(
            s.coeff(4) == SymCoeff::frac(1, 4) && s.coeff(3) == s2p() && s.coeff(2) == SymCoeff::frac(-1, 4),
            || format!("E[(X)_2] {parity:?} head: {s}"),
        )?;
        ensure(tail(&s, 1, 4) == t, || format!("E[(X)_2] {parity:?} tail: {s}"))?;
    }
    for (parity, t) in [
        (Parity::Odd, [r(763, 128), r(-2681, 1536), r(-443239, 73728)]),
        (Parity::Even, [r(767, 128), r(-3085, 1536), r(-413903, 73728)]),
    ] {
        let s = moment_series(3, parity, 4).map_err(fail)?;
        ensure(
            s.coeff(6) == SymCoeff::frac(1, 8)
                && s.coeff(5) == s2p().scale(&r(3, 4))
                && s.coeff(4).is_zero()
                && s.coeff(3) == s2p().scale(&r(-65, 16))
                && s.coeff(2) == SymCoeff::frac(-13, 8),
            || format!("E[(X)_3] {parity:?} head: {s}"),
        )?;
        ensure(tail(&s, 1, 3) == t, || format!("E[(X)_3] {parity:?} tail: {s}"))?;
    }

    let m2 = central_moment_series(2, Parity::Even, 2).map_err(fail)?;
    let m2_want = [
        (2, &SymCoeff::frac(3, 4) + &inv_pi().scale(&r(-2, 1))),
        (1, SymCoeff::zero()),
        (0, &SymCoeff::frac(-3, 4) + &inv_pi().scale(&r(3, 1))),
        (-1, s2p().scale(&r(-1, 1))),
        (-2, inv_pi().scale(&r(11, 12))),
    ];
    for (p, c) in m2_want {
        ensure(m2.coeff(p) == c, || format!("m2 n^({p}/2): {} != {c}", m2.coeff(p)))?;
    }

    let m3 = central_moment_series(3, Parity::Even, 1).map_err(fail)?;
    let bracket = |rat: Rational, pi_part: Rational| &s2p() * &(&SymCoeff::rational(rat) + &inv_pi().scale(&pi_part));
    let constant = &s2p() * &(&SymCoeff::sqrt_2pi().scale(&r(-3, 4)) + &s2p().scale(&r(3, 1)));
    let m3_want = [
        (3, bracket(r(-5, 4), r(4, 1))),
        (2, SymCoeff::zero()),
        (1, bracket(r(43, 16), r(-9, 1))),
        (0, constant),
        (-1, bracket(r(-241, 128), r(5, 8))),
    ];
    for (p, c) in m3_want {
        ensure(m3.coeff(p) == c, || format!("m3 n^({p}/2): {} != {c}", m3.coeff(p)))?;
    }
    Ok("E[(X)_2], E[(X)_3] both parities; m2, m3 even".into())
}

/// Relative error of the first-moment series at a concrete `n`, scaled to
/// `D'_n(1) = 2^n E[X]`.
fn first_moment_error(n: u64, parity: Parity, k: u32) -> std::result::Result<f64, String> {
    let s = moment_series(1, parity, k).map_err(fail)?;
    let exact = Rational::new(d_deriv_at1(1, n as usize), pow2(n));
    let mut ev = Evaluator::new(256);
    let v = ev.series_at(&s, n);
    Ok(ev.relative_error(&v, &exact))
}

fn c8_convergence() -> Check {
    // Observed about 3e-17 at K = 9 for both decks; 1e-6 is the required bound.
    const TOL: f64 = 1e-15;
    let mut notes = Vec::new();
    for (n, parity) in [(151u64, Parity::Odd), (150, Parity::Even)] {
        let errs = [3u32, 6, 9]
            .iter()
            .map(|&k| first_moment_error(n, parity, k))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        ensure(errs[0] > errs[1] && errs[1] > errs[2], || format!("n = {n}: not decreasing {errs:?}"))?;
        ensure(errs[2] < TOL, || format!("n = {n}: K = 9 error {:.3e}", errs[2]))?;
        notes.push(format!("n={n}: {:.2e} > {:.2e} > {:.2e}", errs[0], errs[1], errs[2]));
    }
    Ok(notes.join("; "))
}

fn c9_skewness() -> Check {
    let limit = skewness_limit().map_err(fail)?.value;
    ensure(limit.abs() > 0.1, || format!("limit {limit}"))?;
    let mut vals = Vec::new();
    for n in [100, 200, 400] {
        vals.push(exact_skewness(n).map_err(fail)?.value);
    }
    let gaps: Vec<f64> = vals.iter().map(|v| (v - limit).abs()).collect();
    ensure(gaps[0] > gaps[1] && gaps[1] > gaps[2], || format!("not approaching: {vals:?} vs {limit}"))?;
    ensure(gaps[2] < 0.25 * limit.abs(), || format!("n = 400: {} vs {limit}", vals[2]))?;
    Ok(format!("limit {limit:.4}; n=100,200,400: {:.4}, {:.4}, {:.4}", vals[0], vals[1], vals[2]))
}

fn c10_multiplicity() -> Check {
    let limits = Limits::default();
    for n in 1..=6 {
        for k in 1..=4 {
            let dist = enumerate_k_shuffles(n, k, &limits).map_err(fail)?;
            let (lhs, rhs) = worpitzky_total(n, k);
            ensure(*dist.total() == lhs && lhs == rhs, || format!("n = {n}, k = {k}: {} vs {lhs}", dist.total()))?;
        }
    }
    let perm = |v: [u16; 3]| Permutation::new(v.to_vec()).expect("valid permutation");
    let cases = [
        ([1, 2, 3], 20u32),
        ([1, 3, 2], 10),
        ([2, 1, 3], 10),
        ([2, 3, 1], 10),
        ([3, 1, 2], 10),
        ([3, 2, 1], 4),
    ];
    for (p, want) in cases {
        let m = multiplicity(&perm(p), 2);
        ensure(m == want.into(), || format!("{p:?}: {m}"))?;
    }
    Ok("totals 2^(kn) for n <= 6, k <= 4; multiplicities 20, 10, 4".into())
}

fn c11_monte_carlo() -> Check {
    let limits = Limits::default();
    let h = run_simulation(4, 1, 1_000_000, 2024, &limits).map_err(fail)?;
    let exact = one_shuffle_distribution(4);
    ensure(exact[2..] == [r(5, 16), r(6, 16), r(5, 16)], || format!("exact pmf {exact:?}"))?;
    let test = chi_square(&h, &exact).map_err(fail)?;
    ensure(test.p_value > 0.001, || format!("n = 4 chi-square {test:?}"))?;

    let h = run_simulation(16, 1, 1_000_000, 2025, &limits).map_err(fail)?;
    let s = summarize(&h).map_err(fail)?;
    let mean = rational_to_f64(&exact_moments(16, 1).map_err(fail)?.factorial[1]);
    let se = (s.variance / h.trials as f64).sqrt();
    let z = (s.mean - mean) / se;
    ensure(z.abs() < 3.0, || format!("n = 16: mean {} vs {mean}, z = {z:.2}", s.mean))?;
    Ok(format!("n=4 p = {:.3}; n=16 mean z = {z:.2}", test.p_value))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("generating function", c1_generating_function, Duration::from_secs(1)),
        ("oracle equivalence", c2_oracle_equivalence, Duration::from_secs(60)),
        ("counterexample", c3_counterexample, Duration::from_secs(600)),
        ("randomness indicator", c4_randomness_indicator, Duration::from_secs(60)),
        ("central binomial series", c5_central_binomial, Duration::from_secs(1)),
        ("first-moment series", c6_first_moment, Duration::from_secs(10)),
        ("higher moments", c7_higher_moments, Duration::from_secs(30)),
        ("series convergence", c8_convergence, Duration::from_secs(60)),
        ("non-normality", c9_skewness, Duration::from_secs(60)),
        ("multiplicity totals", c10_multiplicity, Duration::from_secs(10)),
        ("Monte Carlo consistency", c11_monte_carlo, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(note) if took <= *budget => Ok(note),
            Ok(_) => Err(format!("took {took:.2?}, budget {budget:?}")),
            Err(e) => Err(e),
        };
        match outcome {
            Ok(note) => println!("criterion {:>2} {name}: PASS ({took:.2?}) {note}", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({took:.2?}) {e}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
