//! The `rnd` command line.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::density::DensityKind;
use crate::error::{Error, Result};
use crate::generate::{self, rng_for};
use crate::info::{identity_rhs, lautum_information, mutual_information};
use crate::io::{
    read_json, to_json_pretty, ChainFile, ChainTag, DensityFile, Fixture, KernelFile, MeasureFile,
};
use crate::kernel::ConditionalKernel;
use crate::measure::{ProbabilityMeasure, SignedMeasure};
use crate::report::TheoremId;
use crate::rnd::rnd;
use crate::tolerance;
use crate::verify::{run_verify, Inputs, VerifyOptions};

/// Marker used in reports for quantities whose absolute-continuity
/// hypotheses fail.
pub const UNDEFINED: &str = "undefined (absolute continuity)";

#[derive(Debug, Parser)]
#[command(
    name = "rnd",
    version,
    about = "Radon-Nikodym derivatives and the identities they satisfy"
)]
pub struct Cli {
    /// Seed for generated instances and fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Generated instances per theorem.
    #[arg(long, global = true, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Tolerance override, e.g. `--tol chain_rule=1e-10`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "THEOREM=VALUE", value_parser = parse_tolerance)]
    pub tolerances: Vec<(TheoremId, f64)>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check theorems on generated or supplied instances.
    Verify {
        /// Run every theorem (the default when no --theorem is given).
        #[arg(long, conflicts_with = "theorem")]
        all: bool,
        #[arg(long, value_parser = parse_theorem)]
        theorem: Vec<TheoremId>,
        /// Measure or measure-chain file. Repeatable; order matters.
        #[arg(long)]
        measure: Vec<PathBuf>,
        #[arg(long, requires = "px")]
        kernel: Option<PathBuf>,
        #[arg(long, requires = "kernel")]
        px: Option<PathBuf>,
        /// Extra reference measure for il_identity. Repeatable.
        #[arg(long = "q")]
        q: Vec<PathBuf>,
        /// Density file for chain_rule_density. Repeatable.
        #[arg(long)]
        density: Vec<PathBuf>,
    },
    /// Derivative dP/dQ of two measure files.
    Rnd { p: PathBuf, q: PathBuf },
    /// Mutual and lautum information of a kernel and input law.
    Info {
        kernel: PathBuf,
        px: PathBuf,
        /// Reference measure for the identity right-hand side. Repeatable.
        #[arg(long = "q")]
        q: Vec<PathBuf>,
        /// Also report values in bits.
        #[arg(long)]
        bits: bool,
    },
    /// Write a seeded random fixture.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GenerateArgs {
    pub kind: FixtureKind,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub nx: usize,
    #[arg(long, default_value_t = 3)]
    pub ny: usize,
    /// Number of measures in a chain.
    #[arg(long, default_value_t = 3)]
    pub len: usize,
    /// Every weight at least 0.01.
    #[arg(long)]
    pub strict: bool,
    /// Grid size of a density fixture.
    #[arg(long, default_value_t = 201)]
    pub grid_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    Measure,
    MeasureChain,
    Kernel,
    Density,
}

fn parse_theorem(s: &str) -> std::result::Result<TheoremId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_tolerance(s: &str) -> std::result::Result<(TheoremId, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected THEOREM=VALUE, got {s:?}"))?;
    let theorem = parse_theorem(name.trim())?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|e| format!("bad tolerance {value:?}: {e}"))?;
    if !(value >= 0.0 && value.is_finite()) {
        return Err(format!(
            "tolerance must be finite and nonnegative, got {value}"
        ));
    }
    Ok((theorem, value))
}

/// A finished command: the JSON report and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub exit_code: i32,
}

fn load_measures(path: &Path) -> Result<Vec<SignedMeasure>> {
    match read_json::<Fixture>(path)? {
        Fixture::Measure(m) => Ok(vec![m.to_measure()?]),
        Fixture::Chain(c) => c.measures.iter().map(MeasureFile::to_measure).collect(),
        _ => Err(Error::Parse(format!(
            "{}: expected a measure or measure-chain file",
            path.display()
        ))),
    }
}

fn load_measure(path: &Path) -> Result<SignedMeasure> {
    read_json::<MeasureFile>(path)?.to_measure()
}

fn load_kernel(kernel: &Path, px: &Path) -> Result<(ConditionalKernel, ProbabilityMeasure)> {
    let k = read_json::<KernelFile>(kernel)?.to_kernel()?;
    let px = read_json::<MeasureFile>(px)?.to_probability()?;
    Ok((k, px))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn verify(cli: &Cli, theorems: &[TheoremId], inputs: Inputs) -> Result<Outcome> {
    let theorems = if theorems.is_empty() {
        TheoremId::ALL.to_vec()
    } else {
        theorems.to_vec()
    };
    let options = VerifyOptions {
        theorems,
        seed: cli.seed,
        trials: cli.trials as usize,
        tolerances: cli.tolerances.iter().copied().collect::<BTreeMap<_, _>>(),
        inputs,
    };
    let report = run_verify(&options)?;
    Ok(Outcome {
        report: to_json_pretty(&report),
        exit_code: report.exit_code(),
    })
}

fn rnd_report(p: &SignedMeasure, q: &SignedMeasure) -> Result<Value> {
    let labels = p.space().labels();
    let null_points: Vec<&str> = (0..q.len())
        .filter(|&i| q.weight(i) == 0.0)
        .map(|i| q.space().label(i))
        .collect();
    Ok(match rnd(p, q) {
        Ok(g) => json!({
            "space": labels,
            "P": p.weights(),
            "Q": q.weights(),
            "defined": true,
            "rnd": g.values(),
            "Q_null_points": null_points,
        }),
        Err(e) if e.is_precondition() => json!({
            "space": labels,
            "P": p.weights(),
            "Q": q.weights(),
            "defined": false,
            "rnd": UNDEFINED,
            "reason": e.to_string(),
        }),
        Err(e) => return Err(e),
    })
}

fn or_undefined(value: &Result<f64>) -> Value {
    match value {
        Ok(v) => json!(v),
        Err(_) => json!(UNDEFINED),
    }
}

fn in_bits(value: &Result<f64>) -> Value {
    match value {
        Ok(v) => json!(v / std::f64::consts::LN_2),
        Err(_) => json!(UNDEFINED),
    }
}

/// Keeps precondition failures as values and propagates anything else.
fn defined(r: Result<f64>) -> Result<Result<f64>> {
    match r {
        Err(e) if !e.is_precondition() => Err(e),
        other => Ok(other),
    }
}

fn info_report(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
    references: &[(String, SignedMeasure)],
    bits: bool,
    tol: f64,
) -> Result<Value> {
    let mutual = defined(mutual_information(kernel, px).map(|r| r.value))?;
    let lautum = defined(lautum_information(kernel, px).map(|r| r.value))?;
    let sum = match (&mutual, &lautum) {
        (Ok(i), Ok(l)) => Ok(i + l),
        (Err(e), _) | (_, Err(e)) => Err(Error::Domain(e.to_string())),
    };
    let mut entries = Vec::with_capacity(references.len());
    let mut values = Vec::with_capacity(references.len());
    for (name, q) in references {
        let value = defined(identity_rhs(kernel, px, q))?;
        let mut entry = json!({ "Q": name, "value": or_undefined(&value) });
        if bits {
            entry["value_bits"] = in_bits(&value);
        }
        if let Err(e) = &value {
            entry["reason"] = json!(e.to_string());
        }
        entries.push(entry);
        values.push(value);
    }
    let deviations: Vec<f64> = match &sum {
        Ok(s) => values.iter().flatten().map(|v| (v - s).abs()).collect(),
        Err(_) => Vec::new(),
    };
    let max_deviation =
        deviations.iter().fold(
            0.0_f64,
            |m, &d| if d.is_nan() { f64::INFINITY } else { m.max(d) },
        );
    let comparable = sum.is_ok() && !deviations.is_empty();
    let mut report = json!({
        "I_nats": or_undefined(&mutual),
        "L_nats": or_undefined(&lautum),
        "I_plus_L_nats": or_undefined(&sum),
        "identity_rhs": entries,
        "max_deviation": if comparable { json!(max_deviation) } else { Value::Null },
        "tolerance": tol,
        "pass": comparable && max_deviation <= tol,
    });
    if bits {
        report["I_bits"] = in_bits(&mutual);
        report["L_bits"] = in_bits(&lautum);
        report["I_plus_L_bits"] = in_bits(&sum);
    }
    Ok(report)
}

fn generate_fixture(seed: u64, args: &GenerateArgs) -> Result<String> {
    let GenerateArgs {
        kind,
        n,
        nx,
        ny,
        len,
        strict,
        grid_n,
    } = *args;
    let mut rng = rng_for(seed, 0);
    Ok(match kind {
        FixtureKind::Measure => to_json_pretty(&MeasureFile::probability(&generate::probability(
            &mut rng, n, strict,
        )?)),
        FixtureKind::MeasureChain => {
            if strict {
                return Err(Error::Domain(
                    "a strictly positive chain has no null points to nest; drop --strict".into(),
                ));
            }
            let chain = generate::probability_chain(&mut rng, n, len)?;
            to_json_pretty(&ChainFile {
                kind: ChainTag::MeasureChain,
                measures: chain.iter().map(MeasureFile::probability).collect(),
            })
        }
        FixtureKind::Kernel => {
            if nx == 0 || ny == 0 {
                return Err(Error::InvalidSpace("kernel spaces must be nonempty".into()));
            }
            to_json_pretty(&KernelFile::from_kernel(&generate::kernel(
                &mut rng, nx, ny, strict,
            )?))
        }
        FixtureKind::Density => to_json_pretty(&DensityFile::from_density(
            &generate::polynomial_density(&mut rng, grid_n, DensityKind::Probability)?,
        )),
    })
}

/// Runs a parsed command line. Errors mean unusable input (exit code 2).
pub fn run(cli: &Cli) -> Result<Outcome> {
    let tol_for = |t: TheoremId, default: f64| {
        cli.tolerances
            .iter()
            .rev()
            .find(|(id, _)| *id == t)
            .map_or(default, |&(_, v)| v)
    };
    match &cli.command {
        Command::Verify {
            all: _,
            theorem,
            measure,
            kernel,
            px,
            q,
            density,
        } => {
            let mut inputs = Inputs::default();
            for path in measure {
                inputs.measures.extend(load_measures(path)?);
            }
            if let (Some(k), Some(p)) = (kernel, px) {
                inputs.kernel = Some(load_kernel(k, p)?);
            }
            for path in q {
                inputs.references.push((display(path), load_measure(path)?));
            }
            for path in density {
                inputs
                    .densities
                    .push(read_json::<DensityFile>(path)?.to_density()?);
            }
            verify(cli, theorem, inputs)
        }
        Command::Rnd { p, q } => {
            let report = rnd_report(&load_measure(p)?, &load_measure(q)?)?;
            Ok(Outcome {
                report: to_json_pretty(&report),
                exit_code: 0,
            })
        }
        Command::Info {
            kernel,
            px,
            q,
            bits,
        } => {
            let (k, px) = load_kernel(kernel, px)?;
            let mut references = vec![
                ("P_Y".to_string(), k.output_marginal(&px)?.into_signed()),
                (
                    "counting".to_string(),
                    SignedMeasure::counting(Arc::clone(k.output_space())),
                ),
            ];
            for path in q {
                references.push((display(path), load_measure(path)?));
            }
            let tol = tol_for(TheoremId::IlIdentity, tolerance::INFO_IDENTITY);
            let report = info_report(&k, &px, &references, *bits, tol)?;
            Ok(Outcome {
                report: to_json_pretty(&report),
                exit_code: 0,
            })
        }
        Command::Generate(args) => Ok(Outcome {
            report: generate_fixture(cli.seed, args)?,
            exit_code: 0,
        }),
    }
}

/// Entry point for the binary: parses `args`, runs, writes the report and
/// returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match run(&cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = format!("{}\n", outcome.report);
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    outcome.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_json;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("rnd").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn tolerance_flag_parses() {
        let c = cli(&["--tol", "chain_rule=1e-10", "verify"]);
        assert_eq!(c.tolerances, vec![(TheoremId::ChainRule, 1e-10)]);
        assert!(Cli::try_parse_from(["rnd", "--tol", "nope=1", "verify"]).is_err());
        assert!(Cli::try_parse_from(["rnd", "--tol", "chain_rule=-1", "verify"]).is_err());
        assert!(Cli::try_parse_from(["rnd", "--trials", "0", "verify"]).is_err());
    }

    #[test]
    fn generate_measure_with_one_point() {
        let out = run(&cli(&["generate", "measure", "--n", "1"])).unwrap();
        let m: MeasureFile = parse_json(&out.report).unwrap();
        assert_eq!(m.weights, vec![1.0]);
    }

    #[test]
    fn unsatisfiable_generation_is_an_error() {
        assert!(run(&cli(&["generate", "measure", "--n", "0"])).is_err());
        assert!(run(&cli(&["generate", "measure", "--n", "101", "--strict"])).is_err());
        assert!(run(&cli(&["generate", "measure-chain", "--len", "0"])).is_err());
        assert!(run(&cli(&["generate", "density", "--grid-n", "100"])).is_err());
    }

    #[test]
    fn info_report_for_bsc() {
        let k = ConditionalKernel::binary_symmetric(0.25).unwrap();
        let px = ProbabilityMeasure::from_weights(vec![0.5, 0.5]).unwrap();
        let refs = vec![(
            "counting".to_string(),
            SignedMeasure::counting(Arc::clone(k.output_space())),
        )];
        let r = info_report(&k, &px, &refs, true, 1e-9).unwrap();
        assert!((r["I_nats"].as_f64().unwrap() - 0.130812).abs() < 1e-6);
        assert!((r["L_nats"].as_f64().unwrap() - 0.143841).abs() < 1e-6);
        let bits = r["I_bits"].as_f64().unwrap();
        assert_eq!(bits, r["I_nats"].as_f64().unwrap() / std::f64::consts::LN_2);
        assert_eq!(r["pass"], true);
    }

    #[test]
    fn info_report_marks_undefined_lautum() {
        let k = ConditionalKernel::identity(2).unwrap();
        let px = ProbabilityMeasure::from_weights(vec![0.5, 0.5]).unwrap();
        let refs = vec![(
            "counting".to_string(),
            SignedMeasure::counting(Arc::clone(k.output_space())),
        )];
        let r = info_report(&k, &px, &refs, false, 1e-9).unwrap();
        assert_eq!(r["L_nats"], UNDEFINED);
        assert_eq!(r["identity_rhs"][0]["value"], UNDEFINED);
        assert!((r["I_nats"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rnd_report_marks_violation() {
        let p = SignedMeasure::from_weights(vec![0.5, 0.5]).unwrap();
        let q = SignedMeasure::from_weights(vec![1.0, 0.0]).unwrap();
        let r = rnd_report(&p, &q).unwrap();
        assert_eq!(r["defined"], false);
        let r = rnd_report(&q, &p).unwrap();
        assert_eq!(r["rnd"], json!([2.0, 0.0]));
    }
}
