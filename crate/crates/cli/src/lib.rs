//! Command implementations behind the `escortropy` binary.
//!
//! Every command writes to a caller-supplied writer so the binary and the
//! integration tests share one code path.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use escortropy::axioms::{self, AxiomVerdict, DEFAULT_RESTARTS, MAX_OUTCOMES};
use escortropy::chain::{chain_rule_report, ChainRuleReport};
use escortropy::entropy::{aczel_daroczy, hybrid, renyi, shannon, tsallis};
use escortropy::escort::{
    escort, escort_inverse, escort_ratio, is_escort_consistent, joint_escort_correct,
    JointEscortPair, CONSISTENCY_TOL,
};
use escortropy::io::{parse_distribution, parse_joint};
use escortropy::prob::{mutual_information, random_distribution, random_joint};
use escortropy::qcalc::{f_q, f_q_inv, q_add, q_exp, q_log};
use escortropy::{Distribution, QOrder};

pub mod format;

use format::num;

pub const SEED_ENV: &str = "ESCORTROPY_SEED";

#[derive(Debug, Parser)]
#[command(name = "escortropy", version, about = "Hybrid entropy and q-additive chain-rule analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy table for a distribution file {"p": [..]}.
    Entropy(EntropyArgs),
    /// Chain-rule report for a joint file {"r": [[..], ..]} (rows are B outcomes).
    Chain(ChainArgs),
    /// Run a verification suite; exits 0 iff every check passes.
    Verify(VerifyArgs),
    /// Seeded ensemble sweep written as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated orders.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub q: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub q: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    /// Drop A outcomes of probability zero instead of failing.
    #[arg(long)]
    pub lenient_zero_columns: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Axioms,
    Escort,
    Qcalc,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Trials per additivity ensemble.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.05)]
    pub mi_floor: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 3)]
    pub n_b: usize,
    #[arg(long, default_value_t = 3)]
    pub n_a: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.5,2")]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Entropy(args) => {
            let text = read_input(&args.input)?;
            let report = cmd_entropy(&text, &parse_orders(&args.q)?)?;
            with_output(args.out.as_deref(), stdout, |w| {
                if args.json {
                    writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
                } else {
                    report.write_table(w)?;
                }
                Ok(())
            })?;
            Ok(0)
        }
        Command::Chain(args) => {
            let text = read_input(&args.input)?;
            let report = cmd_chain(&text, &parse_orders(&args.q)?, args.lenient_zero_columns)?;
            with_output(args.out.as_deref(), stdout, |w| {
                if args.json {
                    writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
                } else {
                    report.write_table(w)?;
                }
                Ok(())
            })?;
            Ok(0)
        }
        Command::Verify(args) => {
            let checks = cmd_verify(args.suite, args.seed, args.trials, args.mi_floor)?;
            if args.json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&checks)?)?;
            } else {
                for check in &checks {
                    check.write_line(stdout)?;
                }
                let failed = checks.iter().filter(|c| !c.passed).count();
                writeln!(stdout, "{} checks, {} failed", checks.len(), failed)?;
            }
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 1 })
        }
        Command::Sweep(args) => {
            let rows = cmd_sweep(args.n_b, args.n_a, &parse_orders(&args.q)?, args.trials, args.seed)?;
            with_output(args.out.as_deref(), stdout, |w| write_sweep_csv(&rows, w))?;
            Ok(0)
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn with_output(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            let mut writer = std::io::BufWriter::new(file);
            body(&mut writer)?;
            writer.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

pub fn parse_orders(values: &[f64]) -> Result<Vec<QOrder>> {
    if values.is_empty() {
        bail!("at least one q is required");
    }
    values
        .iter()
        .map(|&q| QOrder::new(q).map_err(Into::into))
        .collect()
}

// ---------------------------------------------------------------------------
// entropy

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub q: f64,
    pub shannon: f64,
    pub renyi_inv_q: f64,
    pub tsallis: f64,
    pub hybrid: f64,
    pub aczel_daroczy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    /// Parsed input values, unnormalized.
    pub input: Vec<f64>,
    pub rows: Vec<EntropyRow>,
}

impl EntropyReport {
    pub fn write_table(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "p = {:?}", self.input)?;
        writeln!(w, "q,shannon,renyi_1/q,tsallis,hybrid,aczel_daroczy")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                num(r.q),
                num(r.shannon),
                num(r.renyi_inv_q),
                num(r.tsallis),
                num(r.hybrid),
                num(r.aczel_daroczy)
            )?;
        }
        Ok(())
    }
}

pub fn cmd_entropy(text: &str, orders: &[QOrder]) -> Result<EntropyReport> {
    let parsed = parse_distribution(text)?;
    let p = &parsed.distribution;
    let rows = orders
        .iter()
        .map(|&q| EntropyRow {
            q: q.value(),
            shannon: shannon(p).value,
            renyi_inv_q: renyi(p, q.reciprocal()).value,
            tsallis: tsallis(p, q).value,
            hybrid: hybrid(p, q).value,
            aczel_daroczy: aczel_daroczy(p, q).value,
        })
        .collect();
    Ok(EntropyReport {
        input: parsed.raw,
        rows,
    })
}

// ---------------------------------------------------------------------------
// chain

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub input: Vec<Vec<f64>>,
    /// A columns removed under `--lenient-zero-columns`.
    pub dropped_columns: Vec<usize>,
    pub mutual_information: f64,
    pub rows: Vec<ChainRuleReport>,
}

impl ChainReport {
    pub fn write_table(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "r = {:?}", self.input)?;
        if !self.dropped_columns.is_empty() {
            writeln!(w, "dropped zero A columns: {:?}", self.dropped_columns)?;
        }
        writeln!(w, "mutual_information = {}", num(self.mutual_information))?;
        writeln!(
            w,
            "q,joint_entropy,marginal_entropy,conditional_chain,conditional_axiomatic,gap,\
             s_tilde_minus_s,lower_bound,upper_bound,residual,corrected_residual"
        )?;
        for r in &self.rows {
            let fields = [
                r.q.value(),
                r.joint_entropy,
                r.marginal_entropy,
                r.conditional_chain,
                r.conditional_axiomatic,
                r.gap,
                r.s_tilde_minus_s,
                r.lower_bound,
                r.upper_bound,
                r.residual,
                r.corrected_residual,
            ];
            let line: Vec<String> = fields.iter().map(|&v| num(v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn cmd_chain(text: &str, orders: &[QOrder], lenient: bool) -> Result<ChainReport> {
    let parsed = parse_joint(text)?;
    let (joint, dropped_columns) = if lenient {
        parsed.joint.without_zero_columns()
    } else {
        (parsed.joint.clone(), Vec::new())
    };
    let rows = orders
        .iter()
        .map(|&q| chain_rule_report(&joint, q))
        .collect::<escortropy::Result<Vec<_>>>()?;
    Ok(ChainReport {
        input: parsed.raw,
        dropped_columns,
        mutual_information: mutual_information(&joint),
        rows,
    })
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<AxiomVerdict>,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, passed: bool, margin: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            passed,
            margin,
            verdict: None,
        }
    }

    fn from_verdict(name: impl Into<String>, verdict: AxiomVerdict) -> Self {
        Self {
            suite: "axioms",
            name: name.into(),
            passed: verdict.passed,
            margin: verdict.margin,
            verdict: Some(verdict),
        }
    }

    /// Passes when `error < tol`; margin is `tol - error`.
    fn bound(suite: &'static str, name: impl Into<String>, error: f64, tol: f64) -> Self {
        Self::new(suite, name, error < tol, tol - error)
    }

    pub fn write_line(&self, w: &mut dyn Write) -> Result<()> {
        let status = if self.passed { "PASS" } else { "FAIL" };
        writeln!(w, "{status} {} {} margin={}", self.suite, self.name, num(self.margin))?;
        if let Some(v) = &self.verdict {
            if let Some(m) = v.modulus {
                writeln!(w, "     modulus={}", num(m))?;
            }
            if !v.exceptions.is_empty() {
                writeln!(w, "     {} exception(s); first: {:?}", v.exceptions.len(), v.exceptions[0].to_rows())?;
            }
        }
        Ok(())
    }
}

const SUITE_ORDERS: [f64; 5] = [0.5, 0.7, 1.5, 2.0, 3.0];

fn q(v: f64) -> QOrder {
    QOrder::new(v).expect("suite orders are positive")
}

pub fn cmd_verify(suite: Suite, seed: u64, trials: usize, mi_floor: f64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Qcalc | Suite::All) {
        checks.extend(verify_qcalc());
    }
    if matches!(suite, Suite::Escort | Suite::All) {
        checks.extend(verify_escort(seed, trials, mi_floor)?);
    }
    if matches!(suite, Suite::Axioms | Suite::All) {
        checks.extend(verify_axioms(seed, trials, mi_floor)?);
    }
    Ok(checks)
}

fn verify_qcalc() -> Vec<Check> {
    let grid: Vec<f64> = (-4..=40).map(|i| i as f64 * 0.1).collect();
    let mut checks = Vec::new();
    for qv in [0.3, 0.5, 1.0, 1.5, 2.0] {
        let qq = q(qv);
        let d = qq.deformation();
        let in_domain = |x: f64| 1.0 + d * x > 1e-3;
        let mut hom: f64 = 0.0;
        let mut inverse: f64 = 0.0;
        for &a in grid.iter().filter(|&&a| in_domain(a)) {
            for &b in grid.iter().filter(|&&b| in_domain(b)) {
                let lhs = f_q(q_add(a, b, qq), qq).unwrap_or(f64::NAN);
                let rhs = f_q(a, qq).unwrap_or(f64::NAN) + f_q(b, qq).unwrap_or(f64::NAN);
                hom = hom.max((lhs - rhs).abs());
            }
            if let Ok(y) = q_exp(a, qq) {
                inverse = inverse.max((q_log(y, qq).unwrap_or(f64::NAN) - a).abs());
            }
            inverse = inverse.max((f_q(f_q_inv(a, qq), qq).unwrap_or(f64::NAN) - a).abs());
        }
        checks.push(Check::bound("qcalc", format!("homomorphism q={qv}"), nan_max(hom), 1e-10));
        checks.push(Check::bound("qcalc", format!("inverse_pairs q={qv}"), nan_max(inverse), 1e-10));
    }
    checks
}

/// NaN signals an out-of-domain evaluation; treat it as an infinite error.
fn nan_max(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn verify_escort(seed: u64, trials: usize, mi_floor: f64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for qv in [0.3, 0.5, 2.0, 5.0] {
        let qq = q(qv);
        let worst = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let p = random_distribution(2 + (t as usize % 15), seed.wrapping_add(t), 1.0)?;
                let back = escort_inverse(&escort(&p, qq));
                Ok(max_diff(back.weights(), p.weights()))
            })
            .collect::<escortropy::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::bound("escort", format!("round_trip q={qv}"), worst, 1e-10));
    }

    let products = axioms::product_ensemble(seed, trials, MAX_OUTCOMES)?;
    let dependent = axioms::dependent_ensemble(seed, trials, MAX_OUTCOMES, mi_floor)?;
    let q2 = q(2.0);
    let consistent = products
        .par_iter()
        .filter(|r| is_escort_consistent(r, q2, CONSISTENCY_TOL))
        .count();
    checks.push(Check::new(
        "escort",
        "products_consistent q=2",
        consistent == products.len(),
        consistent as f64 - products.len() as f64,
    ));
    let inconsistent = dependent
        .par_iter()
        .filter(|r| !is_escort_consistent(r, q2, CONSISTENCY_TOL))
        .count();
    checks.push(Check::new(
        "escort",
        "dependent_inconsistent q=2",
        inconsistent == dependent.len(),
        inconsistent as f64 - dependent.len() as f64,
    ));

    let mut construction: f64 = 0.0;
    let mut ratio_error: f64 = 0.0;
    for r in &dependent {
        let correct = joint_escort_correct(r, q2)?;
        let direct = escort(&r.marginal_a(), q2);
        construction = construction.max(max_diff(&correct.column_sums(), direct.weights().weights()));
        let pair = JointEscortPair::new(r, q2)?;
        let ratio = escort_ratio(r, q2)?;
        for (i, (&n, &c)) in pair.naive.as_slice().iter().zip(pair.correct.as_slice()).enumerate() {
            ratio_error = ratio_error.max((ratio.as_slice()[i] * n - c).abs());
        }
    }
    checks.push(Check::bound("escort", "correct_marginal_identity q=2", construction, 1e-12));
    checks.push(Check::bound("escort", "ratio_closed_form q=2", ratio_error, 1e-10));
    Ok(checks)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn verify_axioms(seed: u64, trials: usize, mi_floor: f64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for qv in [0.5, 1.0, 2.0] {
        let verdict = axioms::check_continuity(q(qv), 8, seed, 1e-3)?;
        checks.push(Check::from_verdict(format!("continuity q={qv} n=8"), verdict));
    }
    for qv in [0.5, 1.0, 2.0] {
        for n in 2..=MAX_OUTCOMES {
            let verdict = axioms::check_maximality(q(qv), n, seed, DEFAULT_RESTARTS)?;
            checks.push(Check::from_verdict(format!("maximality q={qv} n={n}"), verdict));
        }
    }
    let samples = [
        Distribution::uniform(2)?,
        Distribution::new(vec![0.1, 0.6, 0.3])?,
        Distribution::new(vec![1.0])?,
        random_distribution(7, seed, 0.5)?,
    ];
    for qv in [0.5, 2.0] {
        for (i, p) in samples.iter().enumerate() {
            let verdict = axioms::check_expansibility(q(qv), p);
            checks.push(Check::from_verdict(format!("expansibility q={qv} sample={i}"), verdict));
        }
    }
    let products = axioms::product_ensemble(seed, trials, MAX_OUTCOMES)?;
    for qv in SUITE_ORDERS {
        let verdict = axioms::check_additivity_independent_on(q(qv), &products)?;
        checks.push(Check::from_verdict(format!("additivity_independent q={qv}"), verdict));
    }
    let dependent = axioms::dependent_ensemble(seed, trials, MAX_OUTCOMES, mi_floor)?;
    let verdict = axioms::check_additivity_dependent_on(q(2.0), &dependent)?;
    checks.push(Check::from_verdict("additivity_dependent q=2", verdict));
    Ok(checks)
}

// ---------------------------------------------------------------------------
// sweep

pub const SWEEP_HEADER: [&str; 10] = [
    "seed",
    "q",
    "n_a",
    "n_b",
    "mutual_information",
    "residual",
    "s_gap",
    "lower_bound",
    "upper_bound",
    "corrected_residual",
];

/// One evaluation of the chain-rule analysis; `seed` regenerates the joint
/// through `random_joint(n_b, n_a, seed, 1.0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub q: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub mutual_information: f64,
    pub residual: f64,
    pub s_gap: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub corrected_residual: f64,
}

impl SweepRow {
    fn record(&self) -> [String; 10] {
        [
            self.seed.to_string(),
            num(self.q),
            self.n_a.to_string(),
            self.n_b.to_string(),
            num(self.mutual_information),
            num(self.residual),
            num(self.s_gap),
            num(self.lower_bound),
            num(self.upper_bound),
            num(self.corrected_residual),
        ]
    }
}

/// Rows ordered by (trial, q); trials run in parallel.
pub fn cmd_sweep(n_b: usize, n_a: usize, orders: &[QOrder], trials: usize, seed: u64) -> Result<Vec<SweepRow>> {
    if n_a == 0 || n_b == 0 {
        bail!("sweep needs at least one outcome per variable");
    }
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial_seed = seed.wrapping_add(t);
            let r = random_joint(n_b, n_a, trial_seed, 1.0)?;
            let mi = mutual_information(&r);
            orders
                .iter()
                .map(|&qq| {
                    let rep = chain_rule_report(&r, qq)?;
                    Ok(SweepRow {
                        seed: trial_seed,
                        q: qq.value(),
                        n_a,
                        n_b,
                        mutual_information: mi,
                        residual: rep.residual,
                        s_gap: rep.s_tilde_minus_s,
                        lower_bound: rep.lower_bound,
                        upper_bound: rep.upper_bound,
                        corrected_residual: rep.corrected_residual,
                    })
                })
                .collect::<escortropy::Result<Vec<_>>>()
        })
        .collect::<escortropy::Result<Vec<_>>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

pub fn write_sweep_csv(rows: &[SweepRow], w: &mut dyn Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(SWEEP_HEADER)?;
    for row in rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    Ok(())
}
