//! The `cardguess` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 budget exceeded, 3 infeasible
//! input. Diagnostics go to the error stream; results are written to the
//! output stream in one piece.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Number, Value};

use crate::asym::{self, AsymSeries, Parity};
use crate::error::Error;
use crate::exactnum::{fraction_string, rational_to_f64, Rational};
use crate::limits::Limits;
use crate::{genfun, mc, shuffle, strategy};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Parser)]
#[command(name = "cardguess", version, about = "Exact analysis of card guessing after riffle shuffles")]
pub struct Cli {
    /// Output format; defaults to json (csv for simulate).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Largest deck for permutation-walking computations (overrides CARDGUESS_MAX_N).
    #[arg(long, global = true)]
    pub max_n: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact deck distribution after k shuffles.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
    },
    /// Coefficients of D_n(q).
    Genfun {
        #[arg(long)]
        n: usize,
    },
    /// Exact factorial, raw and central moments.
    Moments {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        rmax: usize,
    },
    /// Asymptotic series of a moment.
    Series(SeriesArgs),
    /// Conditional distribution of the next card.
    Guess {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        /// Revealed cards, top first, e.g. 5,2.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        revealed: Vec<u16>,
    },
    /// Smallest state where the one-shuffle rule is not the Bayes guess.
    Counterexample {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        nmax: usize,
    },
    /// Expected correct guesses per shuffle count against the uniform deck.
    Randomness {
        #[arg(long)]
        n: usize,
        /// Relative tolerance such as 5% or 1/20.
        #[arg(long)]
        threshold: String,
    },
    /// Monte Carlo histogram of correct guesses.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    pub moment: u32,
    #[arg(long)]
    pub parity: String,
    #[arg(long, default_value_t = asym::DEFAULT_ORDER)]
    pub order: u32,
    /// Moment about the mean instead of the factorial moment.
    #[arg(long)]
    pub central: bool,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let info = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if info {
                let _ = out.write_all(text.as_bytes());
                return 0;
            }
            let _ = err.write_all(text.as_bytes());
            return EXIT_USAGE;
        }
    };
    let mut limits = Limits::from_env();
    if let Some(n) = cli.max_n {
        limits.k_shuffle_max_n = n;
    }
    match run(&cli, &limits) {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::LimitExceeded { .. } | Error::NoConvergence { .. } => EXIT_BUDGET,
        Error::InvalidArgument(_) | Error::InvalidPermutation(_) => EXIT_USAGE,
        _ => EXIT_INFEASIBLE,
    }
}

fn to_json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string(x).expect("serialisable output");
    s.push('\n');
    s
}

fn approx(x: &Rational) -> String {
    format!("{} ({:.6})", fraction_string(x), rational_to_f64(x))
}

fn run(cli: &Cli, limits: &Limits) -> crate::Result<String> {
    let format = cli.format;
    match &cli.command {
        Command::Enumerate { n, k } => enumerate(*n, *k, limits, format.unwrap_or(Format::Json)),
        Command::Genfun { n } => Ok(genfun_out(*n, format.unwrap_or(Format::Json))),
        Command::Moments { n, rmax } => moments(*n, *rmax, format.unwrap_or(Format::Json)),
        Command::Series(a) => series(a, format.unwrap_or(Format::Json)),
        Command::Guess { n, k, revealed } => guess(*n, *k, revealed, limits, format.unwrap_or(Format::Json)),
        Command::Counterexample { k, nmax } => counterexample(*k, *nmax, limits, format.unwrap_or(Format::Json)),
        Command::Randomness { n, threshold } => randomness(*n, threshold, limits, format.unwrap_or(Format::Json)),
        Command::Simulate { n, k, trials, seed } => {
            simulate(*n, *k, *trials, *seed, limits, format.unwrap_or(Format::Csv))
        }
    }
}

fn enumerate(n: usize, k: u32, limits: &Limits, format: Format) -> crate::Result<String> {
    if n == 0 {
        return Err(Error::InvalidArgument("deck size must be at least 1".into()));
    }
    let dist = if k == 1 {
        shuffle::enumerate_one_shuffle(n, limits)?
    } else {
        shuffle::enumerate_k_shuffles(n, k, limits)?
    };
    Ok(match format {
        Format::Json => to_json(&dist),
        Format::Csv => {
            let mut s = String::from("permutation,multiplicity,probability\n");
            for (p, m) in dist.entries() {
                let prob = Rational::new(m.clone().into(), dist.total().clone().into());
                let cards: Vec<String> = p.cards().iter().map(u16::to_string).collect();
                writeln!(s, "{},{m},{}", cards.join(" "), fraction_string(&prob)).expect("String write");
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("n = {n}, k = {k}, total = {}\n", dist.total());
            for (p, m) in dist.entries() {
                let prob = Rational::new(m.clone().into(), dist.total().clone().into());
                writeln!(s, "{p}  {m}  {}", approx(&prob)).expect("String write");
            }
            s
        }
    })
}

fn genfun_out(n: usize, format: Format) -> String {
    let d = genfun::d_poly(n);
    match format {
        Format::Json => {
            let coeffs: Vec<Value> = (0..=n)
                .map(|i| Value::Number(Number::from_str(&d.coeff(i).to_string()).expect("integer literal")))
                .collect();
            let total = Number::from_str(&d.eval_at_one().to_string()).expect("integer literal");
            to_json(&json!({ "n": n, "coefficients": coeffs, "total": total }))
        }
        Format::Csv => genfun::d_poly_csv(n),
        Format::Pretty => format!("D_{n}(q) = {d}\n"),
    }
}

fn moments(n: usize, rmax: usize, format: Format) -> crate::Result<String> {
    let t = genfun::exact_moments(n, rmax)?;
    Ok(match format {
        Format::Json => to_json(&t),
        Format::Csv => {
            let mut s = String::from("r,factorial,raw,central\n");
            for r in 0..=rmax {
                writeln!(
                    s,
                    "{r},{},{},{}",
                    fraction_string(&t.factorial[r]),
                    fraction_string(&t.raw[r]),
                    fraction_string(&t.central[r])
                )
                .expect("String write");
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("n = {n}\n");
            for r in 0..=rmax {
                writeln!(s, "E[(X)_{r}] = {}", approx(&t.factorial[r])).expect("String write");
            }
            for r in 0..=rmax {
                writeln!(s, "E[X^{r}] = {}", approx(&t.raw[r])).expect("String write");
            }
            for r in 0..=rmax {
                writeln!(s, "E[(X-mu)^{r}] = {}", approx(&t.central[r])).expect("String write");
            }
            s
        }
    })
}

#[derive(Serialize)]
struct SeriesOut<'a> {
    moment: u32,
    parity: Parity,
    central: bool,
    order: u32,
    display: String,
    series: &'a AsymSeries,
}

fn series(a: &SeriesArgs, format: Format) -> crate::Result<String> {
    let parity = Parity::from_str(&a.parity)?;
    let s = if a.central {
        asym::central_moment_series(a.moment, parity, a.order)?
    } else {
        asym::moment_series(a.moment, parity, a.order)?
    };
    let display = s.to_string();
    Ok(match format {
        Format::Json => to_json(&SeriesOut {
            moment: a.moment,
            parity,
            central: a.central,
            order: a.order,
            display,
            series: &s,
        }),
        Format::Csv => {
            let mut out = String::from("pow2,powInvPi,nHalfPow,coef\n");
            for t in s.json_terms() {
                writeln!(out, "{},{},{},{}", t.pow2, t.pow_inv_pi, t.n_half_pow, t.coef).expect("String write");
            }
            out
        }
        Format::Pretty => format!("{display}\n"),
    })
}

fn guess(n: usize, k: u32, revealed: &[u16], limits: &Limits, format: Format) -> crate::Result<String> {
    let pmf = strategy::bayes_next_pmf(n, k, revealed, limits)?;
    Ok(match format {
        Format::Json => to_json(&pmf),
        Format::Csv => {
            let mut s = String::from("card,weight,probability\n");
            for e in &pmf.entries {
                writeln!(s, "{},{},{}", e.card, e.weight, e.fraction).expect("String write");
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("revealed {:?}, best guess {}\n", pmf.revealed, pmf.argmax());
            for e in &pmf.entries {
                writeln!(s, "{:>3}  {}  {}", e.card, e.fraction, approx(&e.prob)).expect("String write");
            }
            s
        }
    })
}

fn counterexample(k: u32, nmax: usize, limits: &Limits, format: Format) -> crate::Result<String> {
    let found = strategy::find_min_counterexample(k, nmax, limits)?;
    Ok(match (format, found) {
        (Format::Json, Some(c)) => to_json(&c),
        (Format::Json, None) => to_json(&"none"),
        (Format::Csv, Some(c)) => format!(
            "n,revealed,greedy_card,bayes_card\n{},{},{},{}\n",
            c.n,
            c.revealed.iter().map(u16::to_string).collect::<Vec<_>>().join(" "),
            c.greedy_card,
            c.bayes_card
        ),
        (Format::Csv, None) => "n,revealed,greedy_card,bayes_card\n".to_string(),
        (Format::Pretty, Some(c)) => format!(
            "n = {}, revealed {:?}: longer pile says {} (p = {}), Bayes says {} (p = {})\n",
            c.n,
            c.revealed,
            c.greedy_card,
            approx(&c.pmf.prob(c.greedy_card)),
            c.bayes_card,
            approx(&c.pmf.prob(c.bayes_card)),
        ),
        (Format::Pretty, None) => "none\n".to_string(),
    })
}

fn randomness(n: usize, threshold: &str, limits: &Limits, format: Format) -> crate::Result<String> {
    let threshold = strategy::parse_threshold(threshold)?;
    let report = strategy::randomness_report(n, &threshold, limits)?;
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("k,expected,relative_residual\n");
            for r in &report.rows {
                writeln!(s, "{},{},{}", r.k, fraction_string(&r.expected), fraction_string(&r.relative_residual))
                    .expect("String write");
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("H_{n} = {}\n", approx(&report.harmonic));
            for r in &report.rows {
                writeln!(s, "k = {:>2}: e_k = {}, residual = {}", r.k, approx(&r.expected), approx(&r.relative_residual))
                    .expect("String write");
            }
            writeln!(s, "shuffles needed: {}", report.shuffles_needed).expect("String write");
            s
        }
    })
}

fn simulate(n: usize, k: u32, trials: u64, seed: u64, limits: &Limits, format: Format) -> crate::Result<String> {
    let h = mc::run_simulation(n, k, trials, seed, limits)?;
    let summary = (trials >= 2).then(|| mc::summarize(&h)).transpose()?;
    Ok(match format {
        Format::Json => to_json(&json!({ "histogram": h, "summary": summary })),
        Format::Csv | Format::Pretty => {
            let mut s = h.to_csv();
            writeln!(s, "# n={n}, k={k}, trials={trials}, seed={seed}").expect("String write");
            if let Some(m) = summary {
                writeln!(s, "# mean={}, variance={}, skewness={}", m.mean, m.variance, m.skewness)
                    .expect("String write");
            }
            s
        }
    })
}
