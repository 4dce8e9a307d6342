//! Noise channels and logical fidelity estimation: general decoherence as a
//! joint unitary with an environment register, the per-qubit depolarizing
//! channel in both its Pauli-mixture and random-state forms, and the
//! encode/decohere/recover pipeline that measures how well a code protects
//! its logical content, Monte Carlo or exhaustively.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::css::{CssCode, CssError};
use crate::gf2::BitWord;
use crate::qsim::{DensityMatrix, QsimError, Register, RegisterLayout, StateVector};

/// Exhaustive pattern enumeration cap: 4^n must stay within 2^20.
pub const MAX_EXHAUSTIVE_QUBITS: usize = 10;

#[derive(Debug, Error)]
pub enum ChannelsError {
    #[error(transparent)]
    Css(#[from] CssError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityRange(f64),
    #[error("fidelity {0} outside [0, 1]")]
    FidelityRange(f64),
    #[error("radius {t} outside [0, {n}]")]
    RadiusRange { t: usize, n: usize },
    #[error("density matrix is {0}x{0}, channel needs 2x2")]
    NotSingleQubit(usize),
    #[error("operator is not unitary within 1e-10")]
    NotUnitary,
    #[error("unitary is {got}x{got}, support plus environment needs {want}x{want}")]
    UnitaryDim { got: usize, want: usize },
    #[error("environment register holds {got} qubits, channel needs {want}")]
    EnvWidth { got: usize, want: usize },
    #[error("support length {got} does not match the data register {want}")]
    SupportLength { got: usize, want: usize },
    #[error("exhaustive enumeration of 4^{0} patterns is above the cap")]
    ExhaustiveTooLarge(usize),
    #[error("need at least one input state")]
    NoInputs,
    #[error("need at least one trial")]
    NoTrials,
}

/// Single-qubit error operators. The Y slot is the combined flip, applied as
/// the literal real matrix [[0,1],[-1,0]]; it differs from the textbook Y by
/// a global phase, which no fidelity can see, and keeps every codeword
/// amplitude real.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Z,
    Y,
}

impl Pauli {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::ONE;
        let z = Complex64::ZERO;
        match self {
            Pauli::I => [[o, z], [z, o]],
            Pauli::X => [[z, o], [o, z]],
            Pauli::Z => [[o, z], [z, -o]],
            Pauli::Y => [[z, o], [-o, z]],
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Z => 'Z',
            Pauli::Y => 'Y',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Z' => Some(Pauli::Z),
            'Y' => Some(Pauli::Y),
            _ => None,
        }
    }
}

impl std::fmt::Display for Pauli {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The per-qubit Pauli string, e.g. `IXZIIYI`.
pub fn pattern_string(labels: &[Pauli]) -> String {
    labels.iter().map(|l| l.letter()).collect()
}

/// Memoryless depolarizing channel: each qubit is left alone with
/// probability 1-p and hit by X, Z, or Y with probability p/3 each.
#[derive(Debug, Clone, Copy)]
pub struct PauliChannelSpec {
    p: f64,
}

impl PauliChannelSpec {
    pub fn new(p: f64) -> Result<Self, ChannelsError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelsError::ProbabilityRange(p));
        }
        Ok(PauliChannelSpec { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// The most general decoherence on a chosen set of data qubits: one joint
/// unitary acting on those qubits and an environment register that starts in
/// the basis state `env_init`.
#[derive(Debug, Clone)]
pub struct GeneralDecoherence {
    support: BitWord,
    unitary: DMatrix<Complex64>,
    env_init: BitWord,
}

impl GeneralDecoherence {
    pub fn new(
        support: BitWord,
        unitary: DMatrix<Complex64>,
        env_init: BitWord,
    ) -> Result<Self, ChannelsError> {
        let want = 1usize << (support.weight() + env_init.len());
        if unitary.nrows() != want || unitary.ncols() != want {
            return Err(ChannelsError::UnitaryDim {
                got: unitary.nrows(),
                want,
            });
        }
        let gram = unitary.adjoint() * &unitary;
        let eye = DMatrix::<Complex64>::identity(want, want);
        if max_abs(&(gram - eye)) > 1e-10 {
            return Err(ChannelsError::NotUnitary);
        }
        Ok(GeneralDecoherence {
            support,
            unitary,
            env_init,
        })
    }

    pub fn support(&self) -> &BitWord {
        &self.support
    }

    pub fn env_init(&self) -> &BitWord {
        &self.env_init
    }
}

/// Applies the joint unitary on the supported data qubits and the whole
/// environment register. Data qubits outside the support are untouched.
/// Callers prepare the environment in `env_init`; embedding into a wider
/// layout produces the all-zero case.
pub fn apply_general(
    state: &mut StateVector,
    dec: &GeneralDecoherence,
) -> Result<(), ChannelsError> {
    let layout = state.layout();
    if dec.support.len() != layout.data() {
        return Err(ChannelsError::SupportLength {
            got: dec.support.len(),
            want: layout.data(),
        });
    }
    let envw = dec.env_init.len();
    if layout.env() != envw {
        return Err(ChannelsError::EnvWidth {
            got: layout.env(),
            want: envw,
        });
    }
    let mut qubits = dec.support.support();
    let env_offset = layout.offset(Register::Env);
    qubits.extend((0..envw).map(|i| env_offset + i));
    state.apply_multi(&qubits, &dec.unitary)?;
    Ok(())
}

/// Draws one Pauli per listed qubit from the depolarizing distribution and
/// applies it; the realized labels come back for diagnostics. Bit-for-bit
/// reproducible for a fixed rng state.
pub fn sample_depolarize<R: Rng>(
    state: &mut StateVector,
    spec: &PauliChannelSpec,
    qubits: &[usize],
    rng: &mut R,
) -> Result<Vec<Pauli>, ChannelsError> {
    let labels: Vec<Pauli> = (0..qubits.len()).map(|_| sample_label(spec.p, rng)).collect();
    for (&q, &l) in qubits.iter().zip(&labels) {
        if l != Pauli::I {
            state.apply_1q(q, &l.matrix())?;
        }
    }
    Ok(labels)
}

fn sample_label<R: Rng>(p: f64, rng: &mut R) -> Pauli {
    let r: f64 = rng.gen();
    if r < p {
        match ((r / (p / 3.0)) as usize).min(2) {
            0 => Pauli::X,
            1 => Pauli::Z,
            _ => Pauli::Y,
        }
    } else {
        Pauli::I
    }
}

/// The depolarizing channel as a density map:
/// `(1-p) rho + (p/3)(X rho X + Z rho Z + Y rho Y')`.
pub fn depolarize_density(
    rho: &DensityMatrix,
    p: f64,
) -> Result<DensityMatrix, ChannelsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ChannelsError::ProbabilityRange(p));
    }
    if rho.dim() != 2 {
        return Err(ChannelsError::NotSingleQubit(rho.dim()));
    }
    let m = rho.matrix();
    let mut out = m * Complex64::new(1.0 - p, 0.0);
    for pauli in [Pauli::X, Pauli::Z, Pauli::Y] {
        let g = pauli.matrix();
        let op = DMatrix::from_fn(2, 2, |i, j| g[i][j]);
        out += (&op * m * op.adjoint()) * Complex64::new(p / 3.0, 0.0);
    }
    Ok(DensityMatrix::new(out)?)
}

/// The same channel written as "keep the state or replace it with a random
/// one": `(1 - 4p/3) rho + (4p/3)(I/2)`. Equal to [`depolarize_density`]
/// within 1e-12 for every valid input.
pub fn depolarize_random_state_form(
    rho: &DensityMatrix,
    p: f64,
) -> Result<DensityMatrix, ChannelsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ChannelsError::ProbabilityRange(p));
    }
    if rho.dim() != 2 {
        return Err(ChannelsError::NotSingleQubit(rho.dim()));
    }
    let keep = Complex64::new(1.0 - 4.0 * p / 3.0, 0.0);
    let mix = Complex64::new(4.0 * p / 3.0 * 0.5, 0.0);
    let out = rho.matrix() * keep + DMatrix::<Complex64>::identity(2, 2) * mix;
    Ok(DensityMatrix::new(out)?)
}

/// Probability that at most `t` of `n` independent qubits fail when each
/// succeeds with probability `f`: the fidelity floor of a radius-t code over
/// a product channel.
pub fn binomial_fidelity_bound(n: usize, t: usize, f: f64) -> Result<f64, ChannelsError> {
    if !(0.0..=1.0).contains(&f) {
        return Err(ChannelsError::FidelityRange(f));
    }
    if t > n {
        return Err(ChannelsError::RadiusRange { t, n });
    }
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for j in 0..=t {
        if j > 0 {
            binom = binom * (n - j + 1) as f64 / j as f64;
        }
        total += binom * f.powi((n - j) as i32) * (1.0 - f).powi(j as i32);
    }
    Ok(total)
}

/// One input's estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputFidelity {
    pub mean: f64,
    pub std_err: f64,
}

/// Channel fidelity over a set of logical inputs; the minimum over the set
/// is the reported channel figure, the average an extra statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub per_input: Vec<InputFidelity>,
    pub min_mean: f64,
    pub average: f64,
    /// Samples per input: trial count, or pattern count in exhaustive mode.
    pub trials: usize,
}

impl FidelityReport {
    fn from_per_input(per_input: Vec<InputFidelity>, trials: usize) -> Self {
        let min_mean = per_input
            .iter()
            .map(|s| s.mean)
            .fold(f64::INFINITY, f64::min);
        let average = pairwise_sum(&per_input.iter().map(|s| s.mean).collect::<Vec<_>>())
            / per_input.len() as f64;
        FidelityReport {
            per_input,
            min_mean,
            average,
            trials,
        }
    }
}

/// One logged pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub pattern: String,
    pub corrected: bool,
    pub fidelity: f64,
}

pub fn trial_log_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from("trial,pattern,corrected,fidelity\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{:.16e}\n",
            r.trial, r.pattern, r.corrected, r.fidelity
        ));
    }
    s
}

/// Monte Carlo logical fidelity: for each input, `trials` independent runs
/// of encode, depolarize every data qubit, recover, and score the data
/// register against the clean encoding (equal to sending the decoded state
/// through `<x| rho |x>`, since decoding is an isometry off the data block).
///
/// Trial `i` draws from substream `i` of the seed, so results do not depend
/// on evaluation order; every input sees the same error sequence. An
/// uncorrectable syndrome leaves the state unchanged and still scores, so
/// detection-only codes report honest numbers. Aggregation uses pairwise
/// summation, deterministic within 1e-13 of any other order.
pub fn logical_fidelity_mc(
    code: &CssCode,
    spec: &PauliChannelSpec,
    inputs: &[StateVector],
    trials: usize,
    seed: u64,
    mut trial_log: Option<&mut Vec<TrialRecord>>,
) -> Result<FidelityReport, ChannelsError> {
    if inputs.is_empty() {
        return Err(ChannelsError::NoInputs);
    }
    if trials == 0 {
        return Err(ChannelsError::NoTrials);
    }
    let n = code.n();
    let layout = code.recovery_layout(0)?;
    let mut per_input = Vec::with_capacity(inputs.len());
    for input in inputs {
        let enc = code.encode(input)?;
        let mut fids = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let labels: Vec<Pauli> = (0..n).map(|_| sample_label(spec.p, &mut rng)).collect();
            let (corrected, fid) = pattern_fidelity(code, &enc, layout, &labels)?;
            if let Some(log) = trial_log.as_mut() {
                log.push(TrialRecord {
                    trial,
                    pattern: pattern_string(&labels),
                    corrected,
                    fidelity: fid,
                });
            }
            fids.push(fid);
        }
        per_input.push(input_stats(&fids));
    }
    Ok(FidelityReport::from_per_input(per_input, trials))
}

/// Exact logical fidelity: enumerates every n-qubit Pauli pattern with its
/// probability instead of sampling. Available when 4^n fits the cap; zero
/// statistical error, so `std_err` is 0.
pub fn logical_fidelity_exhaustive(
    code: &CssCode,
    spec: &PauliChannelSpec,
    inputs: &[StateVector],
) -> Result<FidelityReport, ChannelsError> {
    if inputs.is_empty() {
        return Err(ChannelsError::NoInputs);
    }
    let n = code.n();
    if n > MAX_EXHAUSTIVE_QUBITS {
        return Err(ChannelsError::ExhaustiveTooLarge(n));
    }
    let patterns = 1u64 << (2 * n);
    let keep = 1.0 - spec.p;
    let third = spec.p / 3.0;
    const LABELS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::Y];
    let layout = code.recovery_layout(0)?;
    let mut labels = vec![Pauli::I; n];
    let mut per_input = Vec::with_capacity(inputs.len());
    for input in inputs {
        let enc = code.encode(input)?;
        let mut contribs = Vec::new();
        for idx in 0..patterns {
            let mut prob = 1.0;
            let mut digits = idx;
            for slot in labels.iter_mut() {
                let d = (digits & 3) as usize;
                digits >>= 2;
                *slot = LABELS[d];
                prob *= if d == 0 { keep } else { third };
                if prob == 0.0 {
                    break;
                }
            }
            if prob == 0.0 {
                continue;
            }
            let (_, fid) = pattern_fidelity(code, &enc, layout, &labels)?;
            contribs.push(prob * fid);
        }
        per_input.push(InputFidelity {
            mean: pairwise_sum(&contribs),
            std_err: 0.0,
        });
    }
    let count = per_input.len();
    let mut report = FidelityReport::from_per_input(per_input, patterns as usize);
    // the average over inputs is already a plain mean; keep it
    debug_assert_eq!(report.per_input.len(), count);
    report.trials = patterns as usize;
    Ok(report)
}

/// Applies one Pauli pattern to the clean encoding, runs recovery, and
/// scores the data register. An uncorrectable syndrome counts as an
/// uncorrected pass-through, not an error.
fn pattern_fidelity(
    code: &CssCode,
    enc: &StateVector,
    layout: RegisterLayout,
    labels: &[Pauli],
) -> Result<(bool, f64), ChannelsError> {
    let n = code.n();
    let (xmask, zmask) = pauli_masks(labels);
    let damaged = StateVector::from_amps(
        enc.layout(),
        apply_pauli_word(enc.amps(), xmask, zmask),
    )?;
    let mut state = damaged.embed(layout)?;
    let corrected = match code.recover(&mut state) {
        Ok(_) => true,
        Err(CssError::Uncorrectable { .. }) => false,
        Err(e) => return Err(e.into()),
    };
    debug_assert_eq!(labels.len(), n);
    let fid = state.data_overlap(enc)?;
    Ok((corrected, fid))
}

fn pauli_masks(labels: &[Pauli]) -> (u64, u64) {
    let mut x = 0u64;
    let mut z = 0u64;
    for (j, l) in labels.iter().enumerate() {
        match l {
            Pauli::I => {}
            Pauli::X => x |= 1 << j,
            Pauli::Z => z |= 1 << j,
            Pauli::Y => {
                x |= 1 << j;
                z |= 1 << j;
            }
        }
    }
    (x, z)
}

/// Tensor product of per-qubit flips in one pass: X parts permute basis
/// states, Z parts flip signs after the permutation, matching the literal
/// per-qubit matrices exactly.
fn apply_pauli_word(amps: &[Complex64], xmask: u64, zmask: u64) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; amps.len()];
    for (v, &a) in amps.iter().enumerate() {
        let target = v as u64 ^ xmask;
        let sign = if (target & zmask).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        out[target as usize] = a * sign;
    }
    out
}

fn input_stats(fids: &[f64]) -> InputFidelity {
    let n = fids.len();
    let mean = pairwise_sum(fids) / n as f64;
    let std_err = if n < 2 {
        0.0
    } else {
        let devs: Vec<f64> = fids.iter().map(|f| (f - mean) * (f - mean)).collect();
        (pairwise_sum(&devs) / (n - 1) as f64 / n as f64).sqrt()
    };
    InputFidelity { mean, std_err }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n <= 8 {
        return xs.iter().sum();
    }
    pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..])
}

/// The six single-qubit axis states for one logical qubit; for wider logical
/// registers, the computational basis.
pub fn axis_states(k: usize) -> Result<Vec<StateVector>, ChannelsError> {
    let layout = RegisterLayout::data_only(k)?;
    if k == 1 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = Complex64::new(s, 0.0);
        let im = Complex64::new(0.0, s);
        let table: [[Complex64; 2]; 6] = [
            [Complex64::ONE, Complex64::ZERO],
            [Complex64::ZERO, Complex64::ONE],
            [r, r],
            [r, -r],
            [r, im],
            [r, -im],
        ];
        return Ok(table
            .iter()
            .map(|amps| StateVector::from_amps(layout, amps.to_vec()))
            .collect::<Result<_, _>>()?);
    }
    let mut out = Vec::with_capacity(1usize << k);
    for x in 0..(1u64 << k) {
        let word = BitWord::from_bits(k, x);
        out.push(StateVector::basis_state(layout, &word)?);
    }
    Ok(out)
}

/// The default fidelity input set: the axis states plus `random_count`
/// seeded random logical states.
pub fn default_inputs(
    code: &CssCode,
    random_count: usize,
    seed: u64,
) -> Result<Vec<StateVector>, ChannelsError> {
    let k = code.k_logical();
    let layout = RegisterLayout::data_only(k)?;
    let mut states = axis_states(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_count {
        let mut amps: Vec<Complex64> = (0..1usize << k)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        states.push(StateVector::from_amps(layout, amps)?);
    }
    Ok(states)
}

/// A Haar-distributed random unitary: QR of a complex Gaussian matrix with
/// the R-diagonal phases absorbed into Q.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let (mut q, r) = g.qr().unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            Complex64::ONE
        } else {
            d / d.norm()
        };
        for i in 0..dim {
            q[(i, j)] *= phase.conj();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::css::steane;
    use approx::assert_abs_diff_eq;

    fn logical_basis(k: usize, bits: u64) -> StateVector {
        let layout = RegisterLayout::data_only(k).unwrap();
        StateVector::basis_state(layout, &BitWord::from_bits(k, bits)).unwrap()
    }

    fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
        let g = DMatrix::<Complex64>::from_fn(2, 2, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = &g * g.adjoint();
        let trace = m[(0, 0)].re + m[(1, 1)].re;
        DensityMatrix::new(m / Complex64::new(trace, 0.0)).unwrap()
    }

    #[test]
    fn pauli_word_transform_matches_the_literal_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let layout = RegisterLayout::data_only(3).unwrap();
        let mut amps: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        for labels in [
            [Pauli::X, Pauli::I, Pauli::Z],
            [Pauli::Y, Pauli::Y, Pauli::I],
            [Pauli::Z, Pauli::X, Pauli::Y],
        ] {
            let mut via_gates = StateVector::from_amps(layout, amps.clone()).unwrap();
            for (q, l) in labels.iter().enumerate() {
                via_gates.apply_1q(q, &l.matrix()).unwrap();
            }
            let (xm, zm) = pauli_masks(&labels);
            let via_masks = apply_pauli_word(&amps, xm, zm);
            for (a, b) in via_gates.amps().iter().zip(&via_masks) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pauli_letters_roundtrip() {
        for p in [Pauli::I, Pauli::X, Pauli::Z, Pauli::Y] {
            assert_eq!(Pauli::from_letter(p.letter()), Some(p));
        }
        assert_eq!(Pauli::from_letter('Q'), None);
        assert_eq!(
            pattern_string(&[Pauli::I, Pauli::X, Pauli::Z, Pauli::Y]),
            "IXZY"
        );
    }

    #[test]
    fn sample_depolarize_extremes() {
        let spec0 = PauliChannelSpec::new(0.0).unwrap();
        let spec1 = PauliChannelSpec::new(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layout = RegisterLayout::data_only(1).unwrap();
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            let mut s = StateVector::zero_state(layout).unwrap();
            let l0 = sample_depolarize(&mut s, &spec0, &[0], &mut rng).unwrap();
            assert_eq!(l0, vec![Pauli::I]);
            let l1 = sample_depolarize(&mut s, &spec1, &[0], &mut rng).unwrap();
            match l1[0] {
                Pauli::I => panic!("p = 1 must never draw identity"),
                Pauli::X => counts[0] += 1,
                Pauli::Z => counts[1] += 1,
                Pauli::Y => counts[2] += 1,
            }
        }
        // all three flips near 3333 of 10000; 3 sigma of the multinomial is
        // about 141
        for c in counts {
            assert!((c as i64 - 3333).abs() < 200, "counts {counts:?}");
        }
    }

    #[test]
    fn sample_depolarize_identity_fraction_tracks_p() {
        let spec = PauliChannelSpec::new(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let layout = RegisterLayout::data_only(1).unwrap();
        let mut s = StateVector::zero_state(layout).unwrap();
        let trials = 100_000;
        let mut identity = 0usize;
        for _ in 0..trials {
            if sample_depolarize(&mut s, &spec, &[0], &mut rng).unwrap()[0] == Pauli::I {
                identity += 1;
            }
        }
        let frac = identity as f64 / trials as f64;
        let sigma = (0.9 * 0.1 / trials as f64).sqrt();
        assert!((frac - 0.9).abs() < 3.0 * sigma, "fraction {frac}");
    }

    #[test]
    fn sample_depolarize_is_seed_reproducible() {
        let spec = PauliChannelSpec::new(0.4).unwrap();
        let layout = RegisterLayout::data_only(5).unwrap();
        let draw = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = StateVector::zero_state(layout).unwrap();
            let labels = sample_depolarize(&mut s, &spec, &[0, 1, 2, 3, 4], &mut rng).unwrap();
            (labels, s.amps().to_vec())
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn channel_spec_rejects_bad_probabilities() {
        assert!(matches!(
            PauliChannelSpec::new(-0.1),
            Err(ChannelsError::ProbabilityRange(_))
        ));
        assert!(matches!(
            PauliChannelSpec::new(1.5),
            Err(ChannelsError::ProbabilityRange(_))
        ));
    }

    #[test]
    fn depolarize_density_examples() {
        let zero = logical_basis(1, 0);
        let rho = DensityMatrix::from_pure(&zero);
        let same = depolarize_density(&rho, 0.0).unwrap();
        assert!(same.entry(0, 0).re - 1.0 < 1e-15);
        let mixed = depolarize_density(&rho, 0.3).unwrap();
        assert_abs_diff_eq!(mixed.entry(0, 0).re, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(mixed.entry(1, 1).re, 0.2, epsilon = 1e-12);
        assert!(mixed.entry(0, 1).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let arbitrary = random_density(&mut rng);
        let flat = depolarize_density(&arbitrary, 0.75).unwrap();
        assert_abs_diff_eq!(flat.entry(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(flat.entry(1, 1).re, 0.5, epsilon = 1e-12);
        assert!(flat.entry(0, 1).norm() < 1e-12);
    }

    #[test]
    fn depolarize_forms_agree_on_random_densities() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..100 {
            let rho = random_density(&mut rng);
            for p in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7] {
                let a = depolarize_density(&rho, p).unwrap();
                let b = depolarize_random_state_form(&rho, p).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((a.entry(i, j) - b.entry(i, j)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn binomial_bound_values() {
        assert_abs_diff_eq!(
            binomial_fidelity_bound(7, 7, 0.3).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            binomial_fidelity_bound(5, 2, 1.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            binomial_fidelity_bound(7, 1, 0.99).unwrap(),
            0.9979689583650599,
            epsilon = 1e-12
        );
        assert!(matches!(
            binomial_fidelity_bound(7, 8, 0.9),
            Err(ChannelsError::RadiusRange { .. })
        ));
        assert!(matches!(
            binomial_fidelity_bound(7, 1, 1.2),
            Err(ChannelsError::FidelityRange(_))
        ));
    }

    #[test]
    fn apply_general_identity_and_single_x() {
        let code = steane();
        let enc = code
            .encode(&logical_basis(1, 0))
            .unwrap();
        let layout = RegisterLayout::new(7, 0, 0, 1).unwrap();
        let mut state = enc.embed(layout).unwrap();
        let eye = DMatrix::<Complex64>::identity(4, 4);
        let dec = GeneralDecoherence::new(
            BitWord::from_support(7, &[3]),
            eye,
            BitWord::zeros(1),
        )
        .unwrap();
        let before = state.amps().to_vec();
        apply_general(&mut state, &dec).unwrap();
        assert_eq!(state.amps(), before.as_slice());

        // X on the supported qubit, identity on the environment
        let x = Pauli::X.matrix();
        let xi = DMatrix::from_fn(4, 4, |r, c| {
            if r >> 1 == c >> 1 {
                x[r & 1][c & 1]
            } else {
                Complex64::ZERO
            }
        });
        let dec = GeneralDecoherence::new(
            BitWord::from_support(7, &[3]),
            xi,
            BitWord::zeros(1),
        )
        .unwrap();
        apply_general(&mut state, &dec).unwrap();
        let mut direct = enc.embed(layout).unwrap();
        direct.apply_1q(3, &x).unwrap();
        for (a, b) in state.amps().iter().zip(direct.amps()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn apply_general_random_unitary_mixes_the_data_register() {
        let code = steane();
        let enc = code.encode(&logical_basis(1, 0)).unwrap();
        let layout = RegisterLayout::new(7, 0, 0, 2).unwrap();
        let mut state = enc.embed(layout).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let u = random_unitary(8, &mut rng);
        let dec =
            GeneralDecoherence::new(BitWord::from_support(7, &[5]), u, BitWord::zeros(2))
                .unwrap();
        apply_general(&mut state, &dec).unwrap();
        assert_abs_diff_eq!(state.norm_sqr(), 1.0, epsilon = 1e-12);
        let rho = state.partial_trace(&[Register::Data]).unwrap();
        assert!(rho.purity() < 1.0 - 1e-3, "purity {}", rho.purity());
    }

    #[test]
    fn general_decoherence_validates_its_operator() {
        let eye3 = DMatrix::<Complex64>::identity(3, 3);
        assert!(matches!(
            GeneralDecoherence::new(BitWord::from_support(7, &[0]), eye3, BitWord::zeros(1)),
            Err(ChannelsError::UnitaryDim { got: 3, want: 4 })
        ));
        let shrink = DMatrix::<Complex64>::identity(4, 4) * Complex64::new(0.5, 0.0);
        assert!(matches!(
            GeneralDecoherence::new(BitWord::from_support(7, &[0]), shrink, BitWord::zeros(1)),
            Err(ChannelsError::NotUnitary)
        ));
    }

    #[test]
    fn mc_fidelity_is_exactly_one_without_noise() {
        let code = steane();
        let spec = PauliChannelSpec::new(0.0).unwrap();
        let inputs = default_inputs(&code, 3, 0).unwrap();
        let report = logical_fidelity_mc(&code, &spec, &inputs, 50, 0, None).unwrap();
        assert_eq!(report.trials, 50);
        for s in &report.per_input {
            assert!(s.mean > 1.0 - 1e-12);
            assert!(s.std_err < 1e-12);
        }
        assert!(report.min_mean > 1.0 - 1e-12);
    }

    #[test]
    fn mc_fidelity_is_seed_reproducible() {
        let code = steane();
        let spec = PauliChannelSpec::new(0.05).unwrap();
        let inputs = default_inputs(&code, 2, 1).unwrap();
        let mut log_a = Vec::new();
        let a = logical_fidelity_mc(&code, &spec, &inputs, 200, 42, Some(&mut log_a)).unwrap();
        let mut log_b = Vec::new();
        let b = logical_fidelity_mc(&code, &spec, &inputs, 200, 42, Some(&mut log_b)).unwrap();
        assert_eq!(a, b);
        assert_eq!(log_a, log_b);
        let csv = trial_log_csv(&log_a);
        assert!(csv.starts_with("trial,pattern,corrected,fidelity\n"));
        assert!(log_a.iter().all(|r| r.pattern.len() == 7));
    }

    #[test]
    fn exhaustive_fidelity_honors_the_binomial_bound() {
        let code = steane();
        let spec = PauliChannelSpec::new(0.01).unwrap();
        let inputs = vec![
            logical_basis(1, 0),
            logical_basis(1, 1),
            axis_states(1).unwrap().remove(2),
        ];
        let report = logical_fidelity_exhaustive(&code, &spec, &inputs).unwrap();
        let bound = binomial_fidelity_bound(7, 1, 0.99).unwrap();
        assert!(
            report.min_mean >= bound - 1e-9,
            "min {} vs bound {bound}",
            report.min_mean
        );
        assert!(report.min_mean <= 1.0 + 1e-12);
        assert_eq!(report.trials, 1 << 14);
        for s in &report.per_input {
            assert_eq!(s.std_err, 0.0);
        }
    }

    #[test]
    fn exhaustive_and_mc_agree_within_sampling_error() {
        let code = steane();
        let spec = PauliChannelSpec::new(0.05).unwrap();
        let inputs = vec![logical_basis(1, 0)];
        let exact = logical_fidelity_exhaustive(&code, &spec, &inputs).unwrap();
        let mc = logical_fidelity_mc(&code, &spec, &inputs, 2000, 7, None).unwrap();
        let gap = (mc.per_input[0].mean - exact.per_input[0].mean).abs();
        assert!(
            gap < 4.0 * mc.per_input[0].std_err,
            "gap {gap} vs se {}",
            mc.per_input[0].std_err
        );
    }

    #[test]
    fn detection_code_scores_without_correcting() {
        use crate::codes::make_tower;
        use crate::css::CssCode;
        use crate::LinearCode;
        let c1 = LinearCode::from_text("1100\n0110\n0011").unwrap();
        let c2 = LinearCode::from_text("1111").unwrap();
        let code = CssCode::new(make_tower(c2, c1).unwrap()).unwrap();
        let spec = PauliChannelSpec::new(0.1).unwrap();
        let inputs = vec![logical_basis(2, 0)];
        let report = logical_fidelity_exhaustive(&code, &spec, &inputs).unwrap();
        // no correction radius: only the identity pattern is sure to score,
        // so the fidelity sits between (1-p)^4 and 1
        assert!(report.min_mean < 1.0);
        assert!(report.min_mean > 0.9f64.powi(4) - 1e-12);
    }

    #[test]
    fn default_inputs_cover_axes_and_random_states() {
        let code = steane();
        let inputs = default_inputs(&code, 20, 0).unwrap();
        assert_eq!(inputs.len(), 26);
        for s in &inputs {
            assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        }
        let again = default_inputs(&code, 20, 0).unwrap();
        for (a, b) in inputs.iter().zip(&again) {
            assert_eq!(a.amps(), b.amps());
        }
        assert_eq!(axis_states(2).unwrap().len(), 4);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for dim in [2, 4, 8] {
            let u = random_unitary(dim, &mut rng);
            let gram = u.adjoint() * &u;
            let eye = DMatrix::<Complex64>::identity(dim, dim);
            assert!(max_abs(&(gram - eye)) < 1e-10);
        }
    }
}
