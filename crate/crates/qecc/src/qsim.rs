//! Dense statevector simulation over named qubit registers.
//!
//! A state lives on four contiguous registers in fixed order: data qubits in
//! the least-significant bits, then two ancilla registers, then environment
//! qubits. Bit `i` of an amplitude index is qubit `i`, matching the
//! coordinate convention of [`crate::gf2::BitWord`], so basis labels, code
//! words and dump files all agree bit for bit.
//!
//! Everything here stores amplitudes explicitly; nothing exploits stabilizer
//! structure. That caps practical sizes near two dozen qubits, which is the
//! point: downstream checks compare raw amplitudes against closed forms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::gf2::BitWord;

/// Total qubits a state may hold. A seven-qubit block code with two
/// syndrome ancilla registers and a small environment fits with room left.
pub const MAX_QUBITS: usize = 26;

/// Widest joint unitary `apply_multi` accepts.
pub const MAX_MULTI: usize = 12;

/// Most qubits `partial_trace` will keep.
pub const MAX_KEEP: usize = 12;

/// Entrywise tolerance for unitarity and hermiticity checks.
pub const OP_TOL: f64 = 1e-10;

/// Amplitudes at or below this magnitude are omitted from dumps.
pub const DUMP_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum QsimError {
    #[error("layout holds {0} qubits, ceiling is {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("basis word length {0} does not match layout total {1}")]
    WordLength(usize, usize),
    #[error("qubit index {0} out of range for {1} qubits")]
    BadQubit(usize, usize),
    #[error("qubit list contains a duplicate index")]
    DuplicateQubit,
    #[error("operator is not unitary within {OP_TOL}")]
    NotUnitary,
    #[error("operator dimension {got} does not match {want} target qubits")]
    OperatorDim { got: usize, want: usize },
    #[error("joint operator spans {0} qubits, ceiling is {MAX_MULTI}")]
    TooManyTargets(usize),
    #[error("partial trace keeps {0} qubits, ceiling is {MAX_KEEP}")]
    KeepTooLarge(usize),
    #[error("register set contains a duplicate")]
    DuplicateRegister,
    #[error("collapse branch has zero norm")]
    ZeroNormCollapse,
    #[error("matrix is not Hermitian within {OP_TOL}")]
    NotHermitian,
    #[error("matrix trace {0} is not 1 within {OP_TOL}")]
    BadTrace(f64),
    #[error("eigenvalue {0} is negative beyond tolerance")]
    NegativeEigenvalue(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("embedding target register is narrower than the source")]
    EmbedShrinks,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Register {
    Data,
    AncillaA,
    AncillaA2,
    Env,
}

impl Register {
    pub const ORDER: [Register; 4] = [
        Register::Data,
        Register::AncillaA,
        Register::AncillaA2,
        Register::Env,
    ];
}

/// Qubit counts for the four registers, in layout order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RegisterLayout {
    data: usize,
    ancilla_a: usize,
    ancilla_a2: usize,
    env: usize,
}

impl RegisterLayout {
    pub fn new(
        data: usize,
        ancilla_a: usize,
        ancilla_a2: usize,
        env: usize,
    ) -> Result<Self, QsimError> {
        let total = data + ancilla_a + ancilla_a2 + env;
        if total > MAX_QUBITS {
            return Err(QsimError::TooManyQubits(total));
        }
        Ok(RegisterLayout { data, ancilla_a, ancilla_a2, env })
    }

    pub fn data_only(n: usize) -> Result<Self, QsimError> {
        RegisterLayout::new(n, 0, 0, 0)
    }

    pub fn total(&self) -> usize {
        self.data + self.ancilla_a + self.ancilla_a2 + self.env
    }

    pub fn width(&self, r: Register) -> usize {
        match r {
            Register::Data => self.data,
            Register::AncillaA => self.ancilla_a,
            Register::AncillaA2 => self.ancilla_a2,
            Register::Env => self.env,
        }
    }

    /// Index of the register's first qubit.
    pub fn offset(&self, r: Register) -> usize {
        match r {
            Register::Data => 0,
            Register::AncillaA => self.data,
            Register::AncillaA2 => self.data + self.ancilla_a,
            Register::Env => self.data + self.ancilla_a + self.ancilla_a2,
        }
    }

    pub fn data(&self) -> usize {
        self.data
    }

    pub fn ancilla_a(&self) -> usize {
        self.ancilla_a
    }

    pub fn ancilla_a2(&self) -> usize {
        self.ancilla_a2
    }

    pub fn env(&self) -> usize {
        self.env
    }
}

/// A pure state: `2^total` complex amplitudes, unit norm.
#[derive(Clone, Debug)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state labelled by `word` (bit `i` of the word
    /// is qubit `i`).
    pub fn basis_state(layout: RegisterLayout, word: &BitWord) -> Result<Self, QsimError> {
        if word.len() != layout.total() {
            return Err(QsimError::WordLength(word.len(), layout.total()));
        }
        let mut amps = vec![Complex64::ZERO; 1usize << layout.total()];
        amps[word.bits() as usize] = Complex64::ONE;
        Ok(StateVector { layout, amps })
    }

    pub fn zero_state(layout: RegisterLayout) -> Result<Self, QsimError> {
        StateVector::basis_state(layout, &BitWord::zeros(layout.total()))
    }

    /// Builds a state from raw amplitudes, normalizing is the caller's job.
    pub fn from_amps(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self, QsimError> {
        if amps.len() != 1usize << layout.total() {
            return Err(QsimError::DimMismatch(amps.len(), 1usize << layout.total()));
        }
        Ok(StateVector { layout, amps })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.total()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `sum_r |<reference|psi(., r)>|^2` where `r` runs over the non-data
    /// registers and `reference` is a state on the data register alone.
    ///
    /// Equals `<reference| rho_data |reference>` with `rho_data` the reduced
    /// state of the data register, without building the density matrix.
    pub fn data_overlap(&self, reference: &StateVector) -> Result<f64, QsimError> {
        let n = self.layout.data();
        if reference.layout.total() != n {
            return Err(QsimError::DimMismatch(
                1usize << reference.layout.total(),
                1usize << n,
            ));
        }
        let block = 1usize << n;
        let mut total = 0.0;
        for chunk in self.amps.chunks_exact(block) {
            let ip: Complex64 = reference
                .amps
                .iter()
                .zip(chunk)
                .map(|(a, b)| a.conj() * b)
                .sum();
            total += ip.norm_sqr();
        }
        Ok(total)
    }

    /// `<self|other>`; layouts must hold the same number of qubits.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, QsimError> {
        if self.amps.len() != other.amps.len() {
            return Err(QsimError::DimMismatch(self.amps.len(), other.amps.len()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a single-qubit unitary.
    pub fn apply_1q(&mut self, qubit: usize, u: &[[Complex64; 2]; 2]) -> Result<(), QsimError> {
        let n = self.num_qubits();
        if qubit >= n {
            return Err(QsimError::BadQubit(qubit, n));
        }
        check_unitary_2x2(u)?;
        let step = 1usize << qubit;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + step {
                let a = self.amps[i];
                let b = self.amps[i + step];
                self.amps[i] = u[0][0] * a + u[0][1] * b;
                self.amps[i + step] = u[1][0] * a + u[1][1] * b;
            }
            base += 2 * step;
        }
        Ok(())
    }

    /// Hadamard on every listed qubit.
    pub fn transversal_hadamard(&mut self, qubits: &[usize]) -> Result<(), QsimError> {
        for &q in qubits {
            self.apply_1q(q, &hadamard())?;
        }
        Ok(())
    }

    /// Applies a joint unitary to an ordered qubit list: bit `j` of the
    /// operator's index is `qubits[j]`. Targets may span any registers.
    pub fn apply_multi(
        &mut self,
        qubits: &[usize],
        u: &DMatrix<Complex64>,
    ) -> Result<(), QsimError> {
        let m = qubits.len();
        let n = self.num_qubits();
        if m > MAX_MULTI {
            return Err(QsimError::TooManyTargets(m));
        }
        for &q in qubits {
            if q >= n {
                return Err(QsimError::BadQubit(q, n));
            }
        }
        let mut seen = 0u64;
        for &q in qubits {
            if seen >> q & 1 == 1 {
                return Err(QsimError::DuplicateQubit);
            }
            seen |= 1 << q;
        }
        let dim = 1usize << m;
        if u.nrows() != dim || u.ncols() != dim {
            return Err(QsimError::OperatorDim { got: u.nrows(), want: m });
        }
        check_unitary(u)?;

        let offsets: Vec<usize> = (0..dim)
            .map(|l| {
                (0..m)
                    .filter(|&j| (l >> j) & 1 == 1)
                    .map(|j| 1usize << qubits[j])
                    .sum()
            })
            .collect();
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        let mut old = vec![Complex64::ZERO; dim];
        for raw in 0..(self.amps.len() >> m) {
            // spread `raw` over the non-target bit positions
            let mut base = raw;
            for &q in &sorted {
                let low = base & ((1 << q) - 1);
                base = ((base >> q) << (q + 1)) | low;
            }
            for (l, &off) in offsets.iter().enumerate() {
                old[l] = self.amps[base + off];
            }
            for (lp, &off) in offsets.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for (l, &o) in old.iter().enumerate() {
                    acc += u[(lp, l)] * o;
                }
                self.amps[base + off] = acc;
            }
        }
        Ok(())
    }

    /// Born-rule measurement of a whole register in the computational basis.
    /// Collapses the state and returns the observed bits (bit `j` of the
    /// outcome is qubit `j` of the register).
    pub fn measure_register(
        &mut self,
        reg: Register,
        rng: &mut impl Rng,
    ) -> Result<BitWord, QsimError> {
        let w = self.layout.width(reg);
        if w == 0 {
            return Ok(BitWord::zeros(0));
        }
        let off = self.layout.offset(reg);
        let m = (1usize << w) - 1;
        let mut probs = vec![0f64; 1usize << w];
        for (idx, a) in self.amps.iter().enumerate() {
            probs[(idx >> off) & m] += a.norm_sqr();
        }
        let total: f64 = probs.iter().sum();
        let draw = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = probs.len() - 1;
        for (o, &p) in probs.iter().enumerate() {
            acc += p;
            if draw < acc {
                outcome = o;
                break;
            }
        }
        let p = probs[outcome];
        if p <= 0.0 {
            return Err(QsimError::ZeroNormCollapse);
        }
        let scale = 1.0 / p.sqrt();
        for (idx, a) in self.amps.iter_mut().enumerate() {
            if (idx >> off) & m == outcome {
                *a *= scale;
            } else {
                *a = Complex64::ZERO;
            }
        }
        Ok(BitWord::from_bits(w, outcome as u64))
    }

    /// Reduced density matrix of the kept registers (given in any order;
    /// qubit order in the result follows the layout).
    pub fn partial_trace(&self, keep: &[Register]) -> Result<DensityMatrix, QsimError> {
        let mut chosen = [false; 4];
        for &r in keep {
            let slot = Register::ORDER.iter().position(|&x| x == r).unwrap();
            if chosen[slot] {
                return Err(QsimError::DuplicateRegister);
            }
            chosen[slot] = true;
        }
        let mut kept_bits: Vec<usize> = Vec::new();
        for (slot, &r) in Register::ORDER.iter().enumerate() {
            if chosen[slot] {
                let off = self.layout.offset(r);
                kept_bits.extend(off..off + self.layout.width(r));
            }
        }
        let kw = kept_bits.len();
        if kw > MAX_KEEP {
            return Err(QsimError::KeepTooLarge(kw));
        }
        let total = self.num_qubits();
        let traced_bits: Vec<usize> =
            (0..total).filter(|b| !kept_bits.contains(b)).collect();
        let kdim = 1usize << kw;
        let tdim = 1usize << traced_bits.len();
        // Reshape into a (traced x kept) matrix; the reduced state is
        // M^T conj(M), summing kept-index outer products over traced rows.
        let mut m = DMatrix::<Complex64>::zeros(tdim, kdim);
        for (idx, &a) in self.amps.iter().enumerate() {
            let mut k = 0usize;
            for (j, &b) in kept_bits.iter().enumerate() {
                k |= ((idx >> b) & 1) << j;
            }
            let mut t = 0usize;
            for (j, &b) in traced_bits.iter().enumerate() {
                t |= ((idx >> b) & 1) << j;
            }
            m[(t, k)] = a;
        }
        let rho = m.transpose() * m.conjugate();
        DensityMatrix::new(rho)
    }

    /// Re-homes the state in a wider layout; each register keeps its
    /// contents in its new position and added qubits start in |0>.
    pub fn embed(&self, target: RegisterLayout) -> Result<StateVector, QsimError> {
        for r in Register::ORDER {
            if target.width(r) < self.layout.width(r) {
                return Err(QsimError::EmbedShrinks);
            }
        }
        let mut amps = vec![Complex64::ZERO; 1usize << target.total()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if a == Complex64::ZERO {
                continue;
            }
            let mut nidx = 0usize;
            for r in Register::ORDER {
                let w = self.layout.width(r);
                let field = (idx >> self.layout.offset(r)) & ((1usize << w) - 1);
                nidx |= field << target.offset(r);
            }
            amps[nidx] = a;
        }
        Ok(StateVector { layout: target, amps })
    }

    /// CSV dump of the nonzero amplitudes: header `index,re,im`, one row per
    /// amplitude with magnitude above `DUMP_EPS`, 17 significant digits.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (idx, a) in self.amps.iter().enumerate() {
            if a.norm() > DUMP_EPS {
                out.push_str(&format!("{},{:.16e},{:.16e}\n", idx, a.re, a.im));
            }
        }
        out
    }
}

pub fn hadamard() -> [[Complex64; 2]; 2] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn check_unitary_2x2(u: &[[Complex64; 2]; 2]) -> Result<(), QsimError> {
    let c0 = u[0][0].norm_sqr() + u[1][0].norm_sqr();
    let c1 = u[0][1].norm_sqr() + u[1][1].norm_sqr();
    let cross = u[0][0].conj() * u[0][1] + u[1][0].conj() * u[1][1];
    if (c0 - 1.0).abs() > OP_TOL || (c1 - 1.0).abs() > OP_TOL || cross.norm() > OP_TOL {
        return Err(QsimError::NotUnitary);
    }
    Ok(())
}

fn check_unitary(u: &DMatrix<Complex64>) -> Result<(), QsimError> {
    let prod = u.adjoint() * u;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let want = if i == j { Complex64::ONE } else { Complex64::ZERO };
            if (prod[(i, j)] - want).norm() > OP_TOL {
                return Err(QsimError::NotUnitary);
            }
        }
    }
    Ok(())
}

/// A density matrix: Hermitian, unit trace, nonnegative spectrum.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace. The spectrum is checked where
    /// it is actually computed (entropy), since eigensolves dominate cost.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self, QsimError> {
        if m.nrows() != m.ncols() {
            return Err(QsimError::DimMismatch(m.nrows(), m.ncols()));
        }
        for i in 0..m.nrows() {
            for j in 0..=i {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > OP_TOL {
                    return Err(QsimError::NotHermitian);
                }
            }
        }
        let tr: Complex64 = m.diagonal().iter().sum();
        if (tr.re - 1.0).abs() > OP_TOL || tr.im.abs() > OP_TOL {
            return Err(QsimError::BadTrace(tr.re));
        }
        Ok(DensityMatrix { m })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let dim = state.amps().len();
        let a = state.amps();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = a[i] * a[j].conj();
            }
        }
        DensityMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    /// `Tr(rho^2)`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.m.nrows() {
            for j in 0..self.m.ncols() {
                acc += (self.m[(i, j)] * self.m[(j, i)]).re;
            }
        }
        acc
    }

    /// `<x|rho|x>` for a pure state of matching dimension.
    pub fn fidelity(&self, x: &StateVector) -> Result<f64, QsimError> {
        if x.amps().len() != self.dim() {
            return Err(QsimError::DimMismatch(x.amps().len(), self.dim()));
        }
        let mut acc = Complex64::ZERO;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += x.amps()[i].conj() * self.m[(i, j)] * x.amps()[j];
            }
        }
        Ok(acc.re)
    }

    /// Shannon entropy of the spectrum, in bits. `0 log 0 = 0`; eigenvalues
    /// below `-1e-8` are rejected, smaller negatives are rounding noise and
    /// clamp to zero.
    pub fn von_neumann_entropy(&self) -> Result<f64, QsimError> {
        let eig = self.m.clone().symmetric_eigen();
        let mut h = 0.0;
        for &lam in eig.eigenvalues.iter() {
            if lam < -1e-8 {
                return Err(QsimError::NegativeEigenvalue(lam));
            }
            if lam > 0.0 {
                h -= lam * lam.log2();
            }
        }
        Ok(h)
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64, QsimError> {
        if self.dim() != other.dim() {
            return Err(QsimError::DimMismatch(self.dim(), other.dim()));
        }
        let diff = &self.m - &other.m;
        let eig = diff.symmetric_eigen();
        Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
    }
}
