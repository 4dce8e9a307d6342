//! Command-line front end: build codes from descriptor files, dump encoded
//! states, run recovery demos and fidelity campaigns, enumerate weakly
//! self-dual codes, and tabulate rate bounds. Every randomized command takes
//! a --seed (default 0) and stamps it into its output files, so reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qecc::channels::{
    binomial_fidelity_bound, default_inputs, logical_fidelity_exhaustive, logical_fidelity_mc,
    pattern_string, sample_depolarize, trial_log_csv, FidelityReport, PauliChannelSpec,
};
use qecc::codes::{
    enumerate_weakly_self_dual, generator_stanzas, greedy_existence_check, gv_quantum_rate,
    sigma_count,
};
use qecc::css::{parse_descriptor, steane, write_descriptor, CssCode};
use qecc::gf2::BitWord;
use qecc::{BoundCurvePoint, LinearCode, StateVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Wrong invocation rather than a failed computation; exits 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(
    name = "qecc",
    about = "CSS code construction, recovery simulation, and rate bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpMode {
    /// Sign-superposition codeword over the outer code
    C,
    /// Uniform superposition over the shifted dual code
    S,
    /// Uniform superposition over the inner code shifted by a word
    Steane,
}

#[derive(Subcommand)]
enum Command {
    /// Report parameters of a classical code given its generator matrix
    CodeInfo {
        /// Generator matrix text file
        #[arg(long)]
        code: PathBuf,
    },
    /// Build a CSS code from a two-block descriptor and report n, k, d, t
    CssBuild {
        /// Descriptor file; built-in [[7,1,3]] code when omitted
        #[arg(long)]
        code: Option<PathBuf>,
        /// Write the normalized descriptor here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one codeword's amplitudes as CSV
    EncodeDump {
        /// Descriptor file; built-in [[7,1,3]] code when omitted
        #[arg(long)]
        code: Option<PathBuf>,
        /// Codeword family
        #[arg(long, value_enum)]
        mode: DumpMode,
        /// Coset index selecting the codeword
        #[arg(long, default_value_t = 0)]
        inputs: usize,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode, sample one depolarizing error, recover, and report the record
    RecoverDemo {
        /// Descriptor file; built-in [[7,1,3]] code when omitted
        #[arg(long)]
        code: Option<PathBuf>,
        /// Per-qubit error probability
        #[arg(long)]
        p: f64,
        /// Random seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the run as a one-row trial log CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo logical fidelity over the standard input set
    McFidelity {
        /// Descriptor file; built-in [[7,1,3]] code when omitted
        #[arg(long)]
        code: Option<PathBuf>,
        /// Per-qubit error probability
        #[arg(long)]
        p: f64,
        /// Trials per input state
        #[arg(long)]
        trials: usize,
        /// Random seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random input states beside the axis states
        #[arg(long, default_value_t = 20)]
        inputs: usize,
        /// Write per-input means and standard errors as CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write every trial as a CSV row
        #[arg(long)]
        trial_log: Option<PathBuf>,
    },
    /// Exact logical fidelity by enumerating all error patterns
    ExhaustiveFidelity {
        /// Descriptor file; built-in [[7,1,3]] code when omitted
        #[arg(long)]
        code: Option<PathBuf>,
        /// Per-qubit error probability
        #[arg(long)]
        p: f64,
        /// Seed for the random input states
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random input states beside the axis states
        #[arg(long, default_value_t = 20)]
        inputs: usize,
        /// Write per-input fidelities as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate weakly self-dual codes of a given length and dimension
    SelfdualEnum {
        /// Code length (even)
        #[arg(long)]
        n: usize,
        /// Code dimension
        #[arg(long)]
        k: usize,
        /// Write canonical generators as text stanzas
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the subspace count is independent of the seed subspace
    SigmaCheck {
        /// Code length (even)
        #[arg(long)]
        n: usize,
        /// Code dimension
        #[arg(long)]
        k: usize,
    },
    /// Greedy counting argument for a code of dual distance at least d
    GvSearch {
        /// Code length (even)
        #[arg(long)]
        n: usize,
        /// Code dimension
        #[arg(long)]
        k: usize,
        /// Target dual distance
        #[arg(long)]
        d: usize,
        /// Write the witness generator when one exists
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the achievable-rate curve against its two upper bounds
    BoundsTable {
        /// Grid step in x, at most 0.01
        #[arg(long)]
        step: f64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::CodeInfo { code } => code_info(&code),
        Command::CssBuild { code, out } => css_build(code.as_deref(), out.as_deref()),
        Command::EncodeDump {
            code,
            mode,
            inputs,
            out,
        } => encode_dump(code.as_deref(), mode, inputs, &out),
        Command::RecoverDemo { code, p, seed, out } => {
            recover_demo(code.as_deref(), p, seed, out.as_deref())
        }
        Command::McFidelity {
            code,
            p,
            trials,
            seed,
            inputs,
            out,
            trial_log,
        } => mc_fidelity(
            code.as_deref(),
            p,
            trials,
            seed,
            inputs,
            out.as_deref(),
            trial_log.as_deref(),
        ),
        Command::ExhaustiveFidelity {
            code,
            p,
            seed,
            inputs,
            out,
        } => exhaustive_fidelity(code.as_deref(), p, seed, inputs, out.as_deref()),
        Command::SelfdualEnum { n, k, out } => selfdual_enum(n, k, out.as_deref()),
        Command::SigmaCheck { n, k } => sigma_check(n, k),
        Command::GvSearch { n, k, d, out } => gv_search(n, k, d, out.as_deref()),
        Command::BoundsTable { step, out } => bounds_table(step, &out),
    }
}

/// Temp file in the destination directory, then rename; readers never see a
/// half-written file.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    std::fs::write(tmp.path(), contents)
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn load_css(path: Option<&Path>) -> Result<CssCode> {
    match path {
        None => Ok(steane()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading descriptor {}", p.display()))?;
            let tower = parse_descriptor(&text)?;
            Ok(CssCode::new(tower)?)
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(usage(format!("--p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn fmt16(x: f64) -> String {
    format!("{x:.16e}")
}

fn code_info(path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading generator {}", path.display()))?;
    let code = LinearCode::from_text(&text)?;
    let dual = code.dual_code();
    let d = code
        .min_distance()
        .map_or_else(|| "unknown".into(), |v| v.to_string());
    let dd = dual
        .min_distance()
        .map_or_else(|| "unknown".into(), |v| v.to_string());
    println!(
        "n={} k={} d={} dual_k={} dual_d={} weakly_self_dual={}",
        code.n(),
        code.k(),
        d,
        dual.k(),
        dd,
        qecc::codes::is_weakly_self_dual(&code)
    );
    Ok(())
}

fn css_build(path: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let code = load_css(path)?;
    let mut line = format!(
        "n={} k={} d={} t={} rate={}/{} tables={}",
        code.n(),
        code.k_logical(),
        code.distance(),
        code.t(),
        code.k_logical(),
        code.n(),
        if code.tables_complete() {
            "complete"
        } else {
            "partial"
        }
    );
    if let Some(out) = out {
        write_atomic(out, &write_descriptor(code.tower()))?;
        write!(line, " out={}", out.display())?;
    }
    println!("{line}");
    Ok(())
}

fn encode_dump(path: Option<&Path>, mode: DumpMode, coset: usize, out: &Path) -> Result<()> {
    let code = load_css(path)?;
    let reps = code.tower().coset_reps();
    let w: BitWord = *reps
        .get(coset)
        .ok_or_else(|| anyhow!("coset index {coset} out of range, code has {}", reps.len()))?;
    let (state, label) = match mode {
        DumpMode::C => (code.codeword_c(&w)?, "c"),
        DumpMode::S => (code.codeword_s(&w)?, "s"),
        DumpMode::Steane => (code.codeword_steane(&w)?, "steane"),
    };
    let csv = state.dump_csv();
    write_atomic(out, &csv)?;
    let nonzero = csv.lines().count().saturating_sub(1);
    println!(
        "mode={label} coset={coset} word={w} nonzero={nonzero} out={}",
        out.display()
    );
    Ok(())
}

fn recover_demo(path: Option<&Path>, p: f64, seed: u64, out: Option<&Path>) -> Result<()> {
    check_probability(p)?;
    let code = load_css(path)?;
    let spec = PauliChannelSpec::new(p)?;
    let zeros = StateVector::basis_state(
        qecc::RegisterLayout::data_only(code.k_logical())?,
        &BitWord::zeros(code.k_logical()),
    )?;
    let enc = code.encode(&zeros)?;
    let mut state = enc.embed(code.recovery_layout(0)?)?;
    let qubits: Vec<usize> = (0..code.n()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = sample_depolarize(&mut state, &spec, &qubits, &mut rng)?;
    let record = code.recover(&mut state)?;
    let fidelity = state.data_overlap(&enc)?;
    let pattern = pattern_string(&labels);
    let mut line = format!(
        "pattern={pattern} bitflip={} phase={} fidelity={}",
        record.bitflip_error,
        record.phase_error,
        fmt16(fidelity)
    );
    if let Some(out) = out {
        let log = vec![qecc::TrialRecord {
            trial: 0,
            pattern: pattern.clone(),
            corrected: true,
            fidelity,
        }];
        let body = format!("# seed={seed}\n{}", trial_log_csv(&log));
        write_atomic(out, &body)?;
        write!(line, " out={}", out.display())?;
    }
    println!("{line}");
    Ok(())
}

fn report_csv(seed: u64, report: &FidelityReport) -> String {
    let mut s = format!("# seed={seed}\ninput,mean,std_err\n");
    for (i, f) in report.per_input.iter().enumerate() {
        s.push_str(&format!("{i},{},{}\n", fmt16(f.mean), fmt16(f.std_err)));
    }
    s
}

fn mc_fidelity(
    path: Option<&Path>,
    p: f64,
    trials: usize,
    seed: u64,
    random_inputs: usize,
    out: Option<&Path>,
    trial_log: Option<&Path>,
) -> Result<()> {
    check_probability(p)?;
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let code = load_css(path)?;
    let spec = PauliChannelSpec::new(p)?;
    let inputs = default_inputs(&code, random_inputs, seed)?;
    let mut log = trial_log.map(|_| Vec::new());
    let report = logical_fidelity_mc(&code, &spec, &inputs, trials, seed, log.as_mut())?;
    let mut line = format!(
        "min_fidelity={} average={} trials={} inputs={}",
        fmt16(report.min_mean),
        fmt16(report.average),
        report.trials,
        report.per_input.len()
    );
    if let Some(out) = out {
        write_atomic(out, &report_csv(seed, &report))?;
        write!(line, " out={}", out.display())?;
    }
    if let (Some(path), Some(records)) = (trial_log, log) {
        let body = format!("# seed={seed}\n{}", trial_log_csv(&records));
        write_atomic(path, &body)?;
        write!(line, " trial_log={}", path.display())?;
    }
    println!("{line}");
    Ok(())
}

fn exhaustive_fidelity(
    path: Option<&Path>,
    p: f64,
    seed: u64,
    random_inputs: usize,
    out: Option<&Path>,
) -> Result<()> {
    check_probability(p)?;
    let code = load_css(path)?;
    let spec = PauliChannelSpec::new(p)?;
    let inputs = default_inputs(&code, random_inputs, seed)?;
    let report = logical_fidelity_exhaustive(&code, &spec, &inputs)?;
    let bound = binomial_fidelity_bound(code.n(), code.t(), 1.0 - p)?;
    let mut line = format!(
        "min_fidelity={} average={} patterns={} inputs={} floor={}",
        fmt16(report.min_mean),
        fmt16(report.average),
        report.trials,
        report.per_input.len(),
        fmt16(bound)
    );
    if let Some(out) = out {
        write_atomic(out, &report_csv(seed, &report))?;
        write!(line, " out={}", out.display())?;
    }
    println!("{line}");
    Ok(())
}

fn selfdual_enum(n: usize, k: usize, out: Option<&Path>) -> Result<()> {
    let family = enumerate_weakly_self_dual(n, k)?;
    let mut line = format!("n={n} k={k} count={}", family.len());
    if let Some(out) = out {
        write_atomic(out, &generator_stanzas(&family))?;
        write!(line, " out={}", out.display())?;
    }
    println!("{line}");
    Ok(())
}

fn sigma_check(n: usize, k: usize) -> Result<()> {
    let mut all_independent = true;
    for s in 1..=k {
        let seeds = enumerate_weakly_self_dual(n, s)?;
        let counts: Vec<u64> = seeds
            .iter()
            .map(|seed| sigma_count(n, k, seed))
            .collect::<Result<_, _>>()?;
        let first = counts[0];
        let independent = counts.iter().all(|&c| c == first);
        all_independent &= independent;
        println!(
            "s={s} seeds={} sigma={first} independent={independent}",
            seeds.len()
        );
    }
    if !all_independent {
        return Err(anyhow!("sigma depends on the seed subspace"));
    }
    Ok(())
}

fn gv_search(n: usize, k: usize, d: usize, out: Option<&Path>) -> Result<()> {
    let check = greedy_existence_check(n, k, d)?;
    let delta = d as f64 / n as f64;
    let rate = if delta <= 0.5 {
        format!("{:.8e}", gv_quantum_rate(delta))
    } else {
        "-".into()
    };
    let mut line = format!(
        "n={n} k={k} d={d} obstructions={} family={} holds={} witness={} gv_rate={rate}",
        check.lhs,
        check.rhs,
        check.holds,
        check.witness.is_some()
    );
    if let (Some(out), Some(code)) = (out, &check.witness) {
        write_atomic(out, &code.generator().to_text())?;
        write!(line, " out={}", out.display())?;
    }
    println!("{line}");
    Ok(())
}

fn bounds_table(step: f64, out: &Path) -> Result<()> {
    if !(step > 0.0 && step <= 0.01) {
        return Err(usage(format!("--step must lie in (0, 0.01], got {step}")));
    }
    let rows: Vec<BoundCurvePoint> = qecc::bounds::figure1_table(step)?;
    write_atomic(out, &qecc::bounds::curve_csv(&rows))?;
    println!("rows={} out={}", rows.len(), out.display());
    Ok(())
}
