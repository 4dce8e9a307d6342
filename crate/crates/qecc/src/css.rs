//! CSS codes built from a nested pair of classical codes, together with the
//! state-level operations on them: codeword construction in the bit and sign
//! bases, logical encode/decode, overlap projections, and a two-stage
//! coherent recovery that writes the error syndromes into ancilla registers.
//!
//! Recovery works block-wise: amplitudes are stored densely, but every
//! operation walks only the blocks (fixed ancilla/environment content) that
//! actually carry amplitude, so a recovery on a lightly-errored state costs a
//! few blocks of work instead of a pass over the whole register file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::codes::{hamming_7_4, make_tower, CodeTower, CodesError, LinearCode};
use crate::gf2::{solve_on_support, BinMatrix, BitWord, Gf2Error};
use crate::qsim::{QsimError, Register, RegisterLayout, StateVector};

/// Residual weight outside the code space tolerated by [`CssCode::decode`].
pub const DECODE_LEAKAGE_TOL: f64 = 1e-8;

/// Recovery stage that detected a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryStage {
    BitFlip,
    Phase,
}

impl fmt::Display for RecoveryStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecoveryStage::BitFlip => write!(f, "bit-flip"),
            RecoveryStage::Phase => write!(f, "phase"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CssError {
    #[error(transparent)]
    Codes(#[from] CodesError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("code tower encodes no logical qubits")]
    NoLogicalQubits,
    #[error("minimum distance unknown above the enumeration cap")]
    DistanceUnknown,
    #[error("two errors of weight <= {t} share the syndrome {syndrome}")]
    AmbiguousSyndrome { syndrome: BitWord, t: usize },
    #[error("word has length {0}, code expects {1}")]
    WordLength(usize, usize),
    #[error("word lies outside the outer code")]
    WordOutsideCode,
    #[error("state norm is {0}, want 1")]
    NotNormalized(f64),
    #[error("data register holds {got} qubits, code needs {want}")]
    DataWidth { got: usize, want: usize },
    #[error("{register} register holds {got} qubits, recovery needs {want}")]
    AncillaWidth {
        register: &'static str,
        got: usize,
        want: usize,
    },
    #[error("ancilla registers must start in the all-zero state")]
    AncillaNotZero,
    #[error("UNCORRECTABLE: {stage} syndrome {syndrome} has no correction of weight <= {t}")]
    Uncorrectable {
        stage: RecoveryStage,
        syndrome: BitWord,
        t: usize,
    },
    #[error("weight {0:.3e} of the state lies outside the code space")]
    Leakage(f64),
    #[error("data register is entangled with the other registers (residual {0:.3e})")]
    NotFactorized(f64),
    #[error("projection support has weight {weight}, needs < {limit}")]
    SupportTooWide { weight: usize, limit: usize },
    #[error("descriptor must hold exactly two generator blocks split by ---, found {0}")]
    DescriptorBlocks(usize),
}

/// Corrections applied by the two recovery stages.
///
/// For a deterministic error these are the literal flips that were undone.
/// When the state carries a superposition of syndromes, each field reports
/// the correction attached to the most probable one (ties break toward the
/// smaller syndrome value).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryRecord {
    pub bitflip_error: BitWord,
    pub phase_error: BitWord,
}

/// A CSS quantum code over a validated code tower.
///
/// Construction derives the correction radius `t` from the exact minimum
/// distances and precomputes, for both stages, the syndrome-to-error table
/// over all errors of weight at most `t`.
#[derive(Debug, Clone)]
pub struct CssCode {
    tower: CodeTower,
    distance: usize,
    t: usize,
    dual_c1_distance: Option<usize>,
    bitflip_table: BTreeMap<u64, BitWord>,
    bitflip_complete: bool,
    phase_table: BTreeMap<u64, BitWord>,
    phase_complete: bool,
}

impl CssCode {
    pub fn new(tower: CodeTower) -> Result<Self, CssError> {
        if tower.k_logical() == 0 {
            return Err(CssError::NoLogicalQubits);
        }
        let d1 = tower.c1().min_distance().ok_or(CssError::DistanceUnknown)?;
        let d2 = tower
            .c2()
            .dual_code()
            .min_distance()
            .ok_or(CssError::DistanceUnknown)?;
        let distance = d1.min(d2);
        let t = (distance - 1) / 2;
        // bit flips are diagnosed by the parity check of C1; phase flips
        // become bit flips in the rotated basis, where the states live on
        // dual(C2), so its parity check is the generator of C2
        let (bitflip_table, bitflip_complete) = build_table(tower.c1().parity_check(), t)?;
        let (phase_table, phase_complete) = build_table(tower.c2().generator(), t)?;
        let dual_c1_distance = tower.c1().dual_code().min_distance();
        Ok(CssCode {
            tower,
            distance,
            t,
            dual_c1_distance,
            bitflip_table,
            bitflip_complete,
            phase_table,
            phase_complete,
        })
    }

    pub fn tower(&self) -> &CodeTower {
        &self.tower
    }

    pub fn n(&self) -> usize {
        self.tower.n()
    }

    pub fn k_logical(&self) -> usize {
        self.tower.k_logical()
    }

    /// Minimum of the two classical distances; the code corrects any
    /// combination of at most `t` bit flips and `t` phase flips.
    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn rate(&self) -> f64 {
        self.k_logical() as f64 / self.n() as f64
    }

    /// True when every syndrome value of both stages has a tabled correction.
    pub fn tables_complete(&self) -> bool {
        self.bitflip_complete && self.phase_complete
    }

    /// Layout recovery expects: data block, one ancilla per bit-flip
    /// syndrome bit, one per phase syndrome bit, plus `env` extra qubits.
    pub fn recovery_layout(&self, env: usize) -> Result<RegisterLayout, CssError> {
        Ok(RegisterLayout::new(
            self.n(),
            self.tower.c1().parity_check().nrows(),
            self.tower.c2().generator().nrows(),
            env,
        )?)
    }

    /// The bit-basis codeword for coset word `w`: amplitude
    /// `2^(-k1/2) * (-1)^(c.w)` on every outer codeword `c`, zero elsewhere.
    ///
    /// The all-zero component is always positive, which fixes the global
    /// phase convention (lowest-index nonzero component real positive).
    /// Shifting `w` by a dual codeword leaves the state unchanged.
    pub fn codeword_c(&self, w: &BitWord) -> Result<StateVector, CssError> {
        let n = self.n();
        if w.len() != n {
            return Err(CssError::WordLength(w.len(), n));
        }
        let layout = RegisterLayout::data_only(n)?;
        let amp = 0.5f64.powi(self.tower.c1().k() as i32).sqrt();
        let mut amps = vec![Complex64::ZERO; 1usize << n];
        for c in self.tower.c1().codewords()? {
            let value = if c.dot(w) { -amp } else { amp };
            amps[c.bits() as usize] = Complex64::new(value, 0.0);
        }
        Ok(StateVector::from_amps(layout, amps)?)
    }

    /// The sign-basis codeword for `w`: uniform positive amplitude
    /// `2^((k1-n)/2)` on the coset `dual(C1) + w`.
    pub fn codeword_s(&self, w: &BitWord) -> Result<StateVector, CssError> {
        let n = self.n();
        if w.len() != n {
            return Err(CssError::WordLength(w.len(), n));
        }
        let layout = RegisterLayout::data_only(n)?;
        let amp = 0.5f64.powi((n - self.tower.c1().k()) as i32).sqrt();
        let mut amps = vec![Complex64::ZERO; 1usize << n];
        for u in self.tower.c1().dual_code().codewords()? {
            amps[(u ^ *w).bits() as usize] = Complex64::new(amp, 0.0);
        }
        Ok(StateVector::from_amps(layout, amps)?)
    }

    /// The inner-coset codeword for `w`, which must lie in the outer code:
    /// uniform positive amplitude `2^(-k2/2)` on `C2 + w`.
    ///
    /// These span the same space as the [`CssCode::codeword_c`] states; the
    /// two bases differ only in how the cosets are sliced.
    pub fn codeword_steane(&self, w: &BitWord) -> Result<StateVector, CssError> {
        let n = self.n();
        if w.len() != n {
            return Err(CssError::WordLength(w.len(), n));
        }
        if !self.tower.c1().contains(w) {
            return Err(CssError::WordOutsideCode);
        }
        let layout = RegisterLayout::data_only(n)?;
        let amp = 0.5f64.powi(self.tower.c2().k() as i32).sqrt();
        let mut amps = vec![Complex64::ZERO; 1usize << n];
        for v in self.tower.c2().codewords()? {
            amps[(v ^ *w).bits() as usize] = Complex64::new(amp, 0.0);
        }
        Ok(StateVector::from_amps(layout, amps)?)
    }

    /// Isometry from `k_logical` qubits onto the code space: basis state
    /// `|x>` maps to the codeword of the x-th canonical coset representative.
    pub fn encode(&self, logical: &StateVector) -> Result<StateVector, CssError> {
        let k = self.k_logical();
        let lay = logical.layout();
        if lay.total() != k || lay.data() != k {
            return Err(CssError::DataWidth {
                got: lay.total(),
                want: k,
            });
        }
        let norm = logical.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(CssError::NotNormalized(norm));
        }
        let n = self.n();
        let layout = RegisterLayout::data_only(n)?;
        let mut amps = vec![Complex64::ZERO; 1usize << n];
        for (x, rep) in self.tower.coset_reps().iter().enumerate() {
            let a = logical.amps()[x];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let cw = self.codeword_c(rep)?;
            for (i, v) in cw.amps().iter().enumerate() {
                if v.re != 0.0 {
                    amps[i] += a * v;
                }
            }
        }
        Ok(StateVector::from_amps(layout, amps)?)
    }

    /// Inverse of [`CssCode::encode`] on the data register.
    ///
    /// Extra registers are allowed but the data register must factor from
    /// them; the decoded state's global phase is then canonicalized (largest
    /// amplitude real positive). Weight outside the code space above
    /// [`DECODE_LEAKAGE_TOL`] is reported as leakage.
    pub fn decode(&self, state: &StateVector) -> Result<StateVector, CssError> {
        let n = self.n();
        let lay = state.layout();
        if lay.data() != n {
            return Err(CssError::DataWidth {
                got: lay.data(),
                want: n,
            });
        }
        let k = self.k_logical();
        let dim = 1usize << k;
        let rest = 1usize << (lay.total() - n);
        let mut coeffs = DMatrix::<Complex64>::zeros(dim, rest);
        for (x, rep) in self.tower.coset_reps().iter().enumerate() {
            let cw = self.codeword_c(rep)?;
            for r in 0..rest {
                let base = r << n;
                let mut acc = Complex64::ZERO;
                // codeword amplitudes are real, so the conjugate is free
                for (v, a) in cw.amps().iter().enumerate() {
                    if a.re != 0.0 {
                        acc += state.amps()[base | v] * a.re;
                    }
                }
                coeffs[(x, r)] = acc;
            }
        }
        let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let leakage = state.norm_sqr() - captured;
        if leakage > DECODE_LEAKAGE_TOL {
            return Err(CssError::Leakage(leakage));
        }
        let out_layout = RegisterLayout::data_only(k)?;
        if rest == 1 {
            let col: Vec<Complex64> = coeffs.column(0).iter().copied().collect();
            return Ok(StateVector::from_amps(out_layout, col)?);
        }
        // the logical factor is the dominant eigenvector of the Gram matrix;
        // anything beyond its top eigenvalue is data-rest entanglement
        let gram = &coeffs * coeffs.adjoint();
        let eig = gram.symmetric_eigen();
        let (top, lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("eigenvalues are finite"))
            .map(|(i, &l)| (i, l))
            .expect("gram matrix is nonempty");
        let residual = captured - lambda;
        if residual > DECODE_LEAKAGE_TOL {
            return Err(CssError::NotFactorized(residual));
        }
        let scale = lambda.max(0.0).sqrt();
        let mut logical: Vec<Complex64> =
            eig.eigenvectors.column(top).iter().map(|a| a * scale).collect();
        let pivot = logical
            .iter()
            .enumerate()
            .max_by(|a, b| {
                a.1.norm_sqr()
                    .partial_cmp(&b.1.norm_sqr())
                    .expect("amplitudes are finite")
            })
            .map(|(i, _)| i)
            .expect("logical register is nonempty");
        let phase = logical[pivot] / logical[pivot].norm();
        for a in logical.iter_mut() {
            *a /= phase;
        }
        Ok(StateVector::from_amps(out_layout, logical)?)
    }

    /// `<c_w1| P |c_w2>` where `P` projects onto the basis states whose
    /// restriction to `support` equals `pattern`.
    ///
    /// Computed by direct projection of the two state vectors. The value has
    /// a closed form ([`overlap_closed_form`]): it is `±2^-wt(support)` when
    /// some dual codeword `c` has `c + w1 + w2` inside the support, and zero
    /// otherwise. The precondition `wt(support) < d(dual(C1))` keeps such a
    /// `c` unique.
    pub fn projected_overlap(
        &self,
        w1: &BitWord,
        support: &BitWord,
        pattern: &BitWord,
        w2: &BitWord,
    ) -> Result<Complex64, CssError> {
        self.overlap_preconditions(w1, support, pattern, w2)?;
        let a = self.codeword_c(w1)?;
        let b = self.codeword_c(w2)?;
        let sup = support.bits();
        let pat = pattern.bits();
        let mut acc = Complex64::ZERO;
        for (v, (x, y)) in a.amps().iter().zip(b.amps()).enumerate() {
            if v as u64 & sup == pat {
                acc += x.conj() * y;
            }
        }
        Ok(acc)
    }

    fn overlap_preconditions(
        &self,
        w1: &BitWord,
        support: &BitWord,
        pattern: &BitWord,
        w2: &BitWord,
    ) -> Result<(), CssError> {
        let n = self.n();
        for w in [w1, support, pattern, w2] {
            if w.len() != n {
                return Err(CssError::WordLength(w.len(), n));
            }
        }
        if !pattern.is_within(support) {
            return Err(CssError::Gf2(Gf2Error::OutsideSupport));
        }
        let limit = self.dual_c1_distance.ok_or(CssError::DistanceUnknown)?;
        if support.weight() >= limit {
            return Err(CssError::SupportTooWide {
                weight: support.weight(),
                limit,
            });
        }
        Ok(())
    }

    /// Two-stage coherent recovery in place.
    ///
    /// Stage one extracts the bit-flip syndrome into ancilla A and applies
    /// the tabled correction conditioned on A. A transversal Hadamard then
    /// rotates phase flips into bit flips, stage two repeats the procedure
    /// against the inner code's check into ancilla A2, and a final Hadamard
    /// rotates back. The data register ends disentangled from the ancillas
    /// and any environment, which keep the full error history.
    ///
    /// Preconditions: the layout must match [`CssCode::recovery_layout`] and
    /// both ancillas must be zero. A syndrome with no tabled correction
    /// aborts with `Uncorrectable` and hands the state back unchanged.
    pub fn recover(&self, state: &mut StateVector) -> Result<RecoveryRecord, CssError> {
        let (wa, wa2) = self.recovery_widths(state)?;
        let n = self.n();
        let amps = state.amps_mut();
        let mut occ = occupied_rests(amps, n);
        let ancilla_mask = ((1u64 << wa) - 1) | (((1u64 << wa2) - 1) << wa);
        if occ.iter().any(|&r| r & ancilla_mask != 0) {
            return Err(CssError::AncillaNotZero);
        }
        // an uncorrectable syndrome can only surface when a table has holes;
        // only then is a copy needed to hand the state back unchanged
        let snapshot = if self.tables_complete() {
            None
        } else {
            Some(amps.to_vec())
        };
        let result = (|| -> Result<RecoveryRecord, CssError> {
            extract_stage(amps, n, &mut occ, 0, self.tower.c1().parity_check());
            let e1 = self.correct_stage(
                amps,
                n,
                &occ,
                0,
                wa,
                &self.bitflip_table,
                RecoveryStage::BitFlip,
            )?;
            hadamard_blocks(amps, n, &occ);
            extract_stage(amps, n, &mut occ, wa, self.tower.c2().generator());
            let e2 = self.correct_stage(
                amps,
                n,
                &occ,
                wa,
                wa2,
                &self.phase_table,
                RecoveryStage::Phase,
            )?;
            hadamard_blocks(amps, n, &occ);
            Ok(RecoveryRecord {
                bitflip_error: e1,
                phase_error: e2,
            })
        })();
        if result.is_err() {
            let snap = snapshot.expect("complete tables cannot miss a syndrome");
            amps.copy_from_slice(&snap);
        }
        result
    }

    /// Measurement-based variant of [`CssCode::recover`]: each syndrome is
    /// measured out of its ancilla and the tabled correction applied as a
    /// classical conditional. Gives the same data-register fidelity as the
    /// coherent form on correctable errors; the outcomes drawn from `rng`
    /// pick a branch when the error is in superposition.
    pub fn recover_measured<R: Rng>(
        &self,
        state: &mut StateVector,
        rng: &mut R,
    ) -> Result<RecoveryRecord, CssError> {
        let (wa, wa2) = self.recovery_widths(state)?;
        let n = self.n();
        {
            let amps = state.amps_mut();
            let occ = occupied_rests(amps, n);
            let ancilla_mask = ((1u64 << wa) - 1) | (((1u64 << wa2) - 1) << wa);
            if occ.iter().any(|&r| r & ancilla_mask != 0) {
                return Err(CssError::AncillaNotZero);
            }
        }
        let snapshot = if self.tables_complete() {
            None
        } else {
            Some(state.amps().to_vec())
        };
        let result = self.recover_measured_inner(state, rng, wa, n);
        if result.is_err() {
            let snap = snapshot.expect("complete tables cannot miss a syndrome");
            state.amps_mut().copy_from_slice(&snap);
        }
        result
    }

    fn recover_measured_inner<R: Rng>(
        &self,
        state: &mut StateVector,
        rng: &mut R,
        wa: usize,
        n: usize,
    ) -> Result<RecoveryRecord, CssError> {
        {
            let amps = state.amps_mut();
            let mut occ = occupied_rests(amps, n);
            extract_stage(amps, n, &mut occ, 0, self.tower.c1().parity_check());
        }
        let s1 = state.measure_register(Register::AncillaA, rng)?;
        let e1 = *self
            .bitflip_table
            .get(&s1.bits())
            .ok_or(CssError::Uncorrectable {
                stage: RecoveryStage::BitFlip,
                syndrome: s1,
                t: self.t,
            })?;
        apply_flip_all(state.amps_mut(), n, e1);
        hadamard_occupied(state.amps_mut(), n);
        {
            let amps = state.amps_mut();
            let mut occ = occupied_rests(amps, n);
            extract_stage(amps, n, &mut occ, wa, self.tower.c2().generator());
        }
        let s2 = state.measure_register(Register::AncillaA2, rng)?;
        let e2 = *self
            .phase_table
            .get(&s2.bits())
            .ok_or(CssError::Uncorrectable {
                stage: RecoveryStage::Phase,
                syndrome: s2,
                t: self.t,
            })?;
        apply_flip_all(state.amps_mut(), n, e2);
        hadamard_occupied(state.amps_mut(), n);
        Ok(RecoveryRecord {
            bitflip_error: e1,
            phase_error: e2,
        })
    }

    fn recovery_widths(&self, state: &StateVector) -> Result<(usize, usize), CssError> {
        let lay = state.layout();
        let n = self.n();
        if lay.data() != n {
            return Err(CssError::DataWidth {
                got: lay.data(),
                want: n,
            });
        }
        let wa = self.tower.c1().parity_check().nrows();
        let wa2 = self.tower.c2().generator().nrows();
        if lay.ancilla_a() != wa {
            return Err(CssError::AncillaWidth {
                register: "bit-flip syndrome",
                got: lay.ancilla_a(),
                want: wa,
            });
        }
        if lay.ancilla_a2() != wa2 {
            return Err(CssError::AncillaWidth {
                register: "phase syndrome",
                got: lay.ancilla_a2(),
                want: wa2,
            });
        }
        Ok((wa, wa2))
    }

    /// Applies the tabled correction inside each occupied block and returns
    /// the correction of the most probable syndrome.
    #[allow(clippy::too_many_arguments)]
    fn correct_stage(
        &self,
        amps: &mut [Complex64],
        n: usize,
        occ: &[u64],
        offset: usize,
        width: usize,
        table: &BTreeMap<u64, BitWord>,
        stage: RecoveryStage,
    ) -> Result<BitWord, CssError> {
        let block = 1usize << n;
        let mask = (1u64 << width) - 1;
        let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
        for &r in occ {
            let base = (r as usize) << n;
            let weight: f64 = amps[base..base + block].iter().map(|a| a.norm_sqr()).sum();
            if weight == 0.0 {
                continue;
            }
            let s = (r >> offset) & mask;
            *weights.entry(s).or_insert(0.0) += weight;
            let e = table.get(&s).ok_or(CssError::Uncorrectable {
                stage,
                syndrome: BitWord::from_bits(width, s),
                t: self.t,
            })?;
            let flip = e.bits();
            if flip != 0 {
                for v in 0..block as u64 {
                    let v2 = v ^ flip;
                    if v < v2 {
                        amps.swap(base | v as usize, base | v2 as usize);
                    }
                }
            }
        }
        let mut best: Option<(u64, f64)> = None;
        for (&s, &w) in &weights {
            // strict improvement keeps the smallest syndrome on ties
            if best.map_or(true, |(_, bw)| w > bw) {
                best = Some((s, w));
            }
        }
        let (dominant, _) = best.expect("a normalized state has occupied blocks");
        Ok(table[&dominant])
    }
}

/// The [[7,1,3]] code: outer code Hamming [7,4,3], inner code its dual.
pub fn steane() -> CssCode {
    let c1 = hamming_7_4();
    let c2 = c1.dual_code();
    let tower = make_tower(c2, c1).expect("the Hamming code contains its dual");
    CssCode::new(tower).expect("both Hamming distances are known")
}

/// Closed-form value of [`CssCode::projected_overlap`], computed from the
/// code structure instead of the state vectors: the overlap is
/// `±2^-wt(support)` exactly when some dual codeword `c` has `c + w1 + w2`
/// supported inside `support`, with the sign `(-1)^(pattern . (c+w1+w2))`,
/// and zero when no such `c` exists.
pub fn overlap_closed_form(
    code: &CssCode,
    w1: &BitWord,
    support: &BitWord,
    pattern: &BitWord,
    w2: &BitWord,
) -> Result<Complex64, CssError> {
    code.overlap_preconditions(w1, support, pattern, w2)?;
    let n = code.n();
    let diff = *w1 ^ *w2;
    let complement = BitWord::ones(n) ^ *support;
    let target = diff.restrict(&complement);
    // c + diff inside the support means c agrees with diff off the support
    match solve_on_support(code.tower().c1().parity_check(), &complement, &target)? {
        None => Ok(Complex64::ZERO),
        Some(c) => {
            let shift = c ^ diff;
            let sign = if pattern.dot(&shift) { -1.0 } else { 1.0 };
            let magnitude = 0.5f64.powi(support.weight() as i32);
            Ok(Complex64::new(sign * magnitude, 0.0))
        }
    }
}

/// Parses a two-block descriptor: the outer generator, a line `---`, the
/// inner generator, each block in the 0/1 text format of [`BinMatrix`].
pub fn parse_descriptor(text: &str) -> Result<CodeTower, CssError> {
    let mut blocks: Vec<String> = vec![String::new()];
    for line in text.lines() {
        if line.trim() == "---" {
            blocks.push(String::new());
        } else {
            let cur = blocks.last_mut().expect("blocks is never empty");
            cur.push_str(line);
            cur.push('\n');
        }
    }
    if blocks.len() != 2 {
        return Err(CssError::DescriptorBlocks(blocks.len()));
    }
    let outer = LinearCode::from_text(&blocks[0])?;
    let inner = LinearCode::from_text(&blocks[1])?;
    Ok(make_tower(inner, outer)?)
}

/// Renders a tower back into the two-block descriptor format.
pub fn write_descriptor(tower: &CodeTower) -> String {
    format!(
        "{}---\n{}",
        tower.c1().generator().to_text(),
        tower.c2().generator().to_text()
    )
}

/// Maps every syndrome of a weight-at-most-t error to that error. The flag
/// reports whether the whole syndrome space was covered. Distinct errors
/// sharing a syndrome cannot happen at radius t, so any collision signals an
/// invalid tower and aborts.
fn build_table(
    check: &BinMatrix,
    t: usize,
) -> Result<(BTreeMap<u64, BitWord>, bool), CssError> {
    let n = check.ncols();
    let mut table = BTreeMap::new();
    for weight in 0..=t.min(n) {
        for bits in words_of_weight(n, weight) {
            let word = BitWord::from_bits(n, bits);
            let s = check.syndrome(&word).bits();
            if let Some(prev) = table.get(&s) {
                if *prev != word {
                    return Err(CssError::AmbiguousSyndrome {
                        syndrome: BitWord::from_bits(check.nrows(), s),
                        t,
                    });
                }
            }
            table.insert(s, word);
        }
    }
    let complete = (table.len() as u128) == 1u128 << check.nrows();
    Ok((table, complete))
}

/// All n-bit values of the given popcount, ascending.
fn words_of_weight(n: usize, weight: usize) -> Vec<u64> {
    assert!(n < 64, "weight enumeration needs n < 64");
    let mut out = Vec::new();
    if weight > n {
        return out;
    }
    if weight == 0 {
        out.push(0);
        return out;
    }
    let end = 1u64 << n;
    let mut c = (1u64 << weight) - 1;
    while c < end {
        out.push(c);
        let low = c & c.wrapping_neg();
        let carry = c + low;
        if carry >= end {
            break;
        }
        c = carry | (((carry ^ c) / low) >> 2);
    }
    out
}

/// Rest indices (everything above the data bits) whose block holds any
/// amplitude.
fn occupied_rests(amps: &[Complex64], n: usize) -> Vec<u64> {
    let block = 1usize << n;
    amps.chunks_exact(block)
        .enumerate()
        .filter(|(_, chunk)| chunk.iter().any(|a| a.norm_sqr() > 0.0))
        .map(|(r, _)| r as u64)
        .collect()
}

fn syndrome_bits(check: &BinMatrix, v: u64) -> u64 {
    let mut s = 0u64;
    for (i, row) in check.rows().enumerate() {
        s |= ((row.bits() & v).count_ones() as u64 & 1) << i;
    }
    s
}

/// XORs each data word's syndrome into the rest register at `offset`.
///
/// The map (r, v) -> (r ^ synd(v) << offset, v) is an involution, so every
/// orbit is a swap; each unordered pair is processed at a single canonical
/// owner so it is applied exactly once. `occ` is updated to the exact
/// occupancy afterwards.
fn extract_stage(
    amps: &mut [Complex64],
    n: usize,
    occ: &mut Vec<u64>,
    offset: usize,
    check: &BinMatrix,
) {
    let block = 1usize << n;
    let occ_set: BTreeSet<u64> = occ.iter().copied().collect();
    let mut candidates = occ_set.clone();
    for &r in occ.iter() {
        let base = (r as usize) << n;
        for v in 0..block as u64 {
            let s = syndrome_bits(check, v);
            if s == 0 {
                continue;
            }
            let partner = r ^ (s << offset);
            let low = r.min(partner);
            let owner = if occ_set.contains(&low) { low } else { r };
            if r != owner {
                continue;
            }
            let i = base | v as usize;
            let j = ((partner as usize) << n) | v as usize;
            if amps[i].norm_sqr() == 0.0 && amps[j].norm_sqr() == 0.0 {
                continue;
            }
            amps.swap(i, j);
            candidates.insert(partner);
        }
    }
    *occ = candidates
        .into_iter()
        .filter(|&r| {
            let base = (r as usize) << n;
            amps[base..base + block].iter().any(|a| a.norm_sqr() > 0.0)
        })
        .collect();
}

/// Transversal Hadamard on the data register of each listed block, done as
/// an in-block butterfly pass.
fn hadamard_blocks(amps: &mut [Complex64], n: usize, occ: &[u64]) {
    let block = 1usize << n;
    let scale = (block as f64).sqrt().recip();
    for &r in occ {
        let base = (r as usize) << n;
        let seg = &mut amps[base..base + block];
        for q in 0..n {
            let step = 1usize << q;
            let mut i = 0;
            while i < block {
                for j in i..i + step {
                    let x = seg[j];
                    let y = seg[j + step];
                    seg[j] = x + y;
                    seg[j + step] = x - y;
                }
                i += 2 * step;
            }
        }
        for a in seg.iter_mut() {
            *a *= scale;
        }
    }
}

fn hadamard_occupied(amps: &mut [Complex64], n: usize) {
    let occ = occupied_rests(amps, n);
    hadamard_blocks(amps, n, &occ);
}

/// Unconditional X^e on the data register of every block.
fn apply_flip_all(amps: &mut [Complex64], n: usize, e: BitWord) {
    let flip = e.bits();
    if flip == 0 {
        return;
    }
    let block = 1usize << n;
    for base in (0..amps.len()).step_by(block) {
        for v in 0..block as u64 {
            let v2 = v ^ flip;
            if v < v2 {
                amps.swap(base | v as usize, base | v2 as usize);
            }
        }
    }
}
