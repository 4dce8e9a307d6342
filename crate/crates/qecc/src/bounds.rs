//! Closed-form rate and capacity curves for the depolarizing channel, plus
//! the Holevo chi quantity for finite ensembles.
//!
//! The scalar curves are pure functions of one real argument and panic on
//! domain violations; the table and ensemble operations return errors for
//! conditions a caller can plausibly feed in from the outside.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::qsim::{DensityMatrix, QsimError};

/// Largest grid step accepted by [`figure1_table`].
pub const MAX_CURVE_STEP: f64 = 0.01;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("grid step {0} outside (0, {MAX_CURVE_STEP}]")]
    StepOutOfRange(f64),
    #[error("ensemble probabilities sum to {0}, want 1")]
    ProbabilitySum(f64),
    #[error("ensemble probability {0} is negative")]
    NegativeProbability(f64),
    #[error("ensemble member has dimension {got}, want {want}")]
    MemberDim { got: usize, want: usize },
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// Binary entropy in bits, with the continuous extension h2(0) = h2(1) = 0.
///
/// Panics outside [0, 1].
pub fn h2(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "h2 argument {p} outside [0, 1]");
    let term = |x: f64| if x == 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Upper bound on the classical capacity of the depolarizing channel with
/// per-qubit error probability `p`: 1 - h2(2p/3).
///
/// Panics outside [0, 1].
pub fn holevo_capacity_bound(p: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&p),
        "channel probability {p} outside [0, 1]"
    );
    1.0 - h2(2.0 * p / 3.0)
}

/// Upper bound on distillable entanglement through the same channel:
/// h2(1/2 + sqrt(p(1-p))) for p < 1/2, and 0 for p >= 1/2.
///
/// Panics outside [0, 1].
pub fn entanglement_bound(p: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&p),
        "channel probability {p} outside [0, 1]"
    );
    if p >= 0.5 {
        return 0.0;
    }
    // roundoff in p(1-p) near the boundary must not push the argument past 1
    let arg = (0.5 + (p * (1.0 - p)).sqrt()).min(1.0);
    h2(arg)
}

/// Composite upper bound min[1 - h2(2x/3), h2(1/2 + sqrt(x(1-x)))] on the
/// achievable rate at relative error weight x = t/n, kept as a literal
/// transcription so it can be checked against the two channel bounds.
///
/// Panics outside [0, 1/2].
pub fn composite_rate_bound(x: f64) -> f64 {
    assert!(
        (0.0..=0.5).contains(&x),
        "relative error weight {x} outside [0, 1/2]"
    );
    let classical = 1.0 - h2(2.0 * x / 3.0);
    let entangle = h2((0.5 + (x * (1.0 - x)).sqrt()).min(1.0));
    classical.min(entangle)
}

/// Holevo chi of a finite ensemble: S(sum p_a rho_a) - sum p_a S(rho_a).
pub fn holevo_chi(ensemble: &[(f64, DensityMatrix)]) -> Result<f64, BoundsError> {
    let Some((_, first)) = ensemble.first() else {
        return Err(BoundsError::EmptyEnsemble);
    };
    let dim = first.dim();
    let mut total = 0.0;
    for &(p, ref rho) in ensemble {
        if p < -1e-12 {
            return Err(BoundsError::NegativeProbability(p));
        }
        if rho.dim() != dim {
            return Err(BoundsError::MemberDim {
                got: rho.dim(),
                want: dim,
            });
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-10 {
        return Err(BoundsError::ProbabilitySum(total));
    }
    let mut avg = DMatrix::<Complex64>::zeros(dim, dim);
    for &(p, ref rho) in ensemble {
        avg += rho.matrix() * Complex64::new(p, 0.0);
    }
    let mixture_entropy = DensityMatrix::new(avg)?.von_neumann_entropy()?;
    let mut member_entropy = 0.0;
    for &(p, ref rho) in ensemble {
        member_entropy += p * rho.von_neumann_entropy()?;
    }
    // concavity makes chi nonnegative; eigenvalue roundoff can leave a dust-
    // sized negative residue
    Ok((mixture_entropy - member_entropy).max(0.0))
}

/// One grid row of the rate/capacity comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCurvePoint {
    /// Error rate: relative error weight t/n for the rate column, channel
    /// probability p for the capacity columns.
    pub x: f64,
    /// Achievable quantum rate max(0, 1 - 2 h2(2x)), zero past x = 1/4 where
    /// the relative distance 2x leaves the meaningful range [0, 1/2].
    pub gv: f64,
    /// Classical capacity upper bound at p = x.
    pub holevo: f64,
    /// Entanglement upper bound at p = x.
    pub entangle: f64,
}

/// Tabulates the three curves on the grid {0, step, 2 step, ...} up to 1/2
/// inclusive.
pub fn figure1_table(step: f64) -> Result<Vec<BoundCurvePoint>, BoundsError> {
    if !(step > 0.0 && step <= MAX_CURVE_STEP) {
        return Err(BoundsError::StepOutOfRange(step));
    }
    let mut rows = Vec::new();
    let mut i = 0u64;
    loop {
        let x = (i as f64 * step).min(0.5);
        let gv = if 2.0 * x <= 0.5 {
            (1.0 - 2.0 * h2(2.0 * x)).max(0.0)
        } else {
            0.0
        };
        let row = BoundCurvePoint {
            x,
            gv,
            holevo: holevo_capacity_bound(x),
            entangle: entanglement_bound(x),
        };
        debug_assert!(
            row.gv >= 0.0 && row.holevo <= 1.0 && row.entangle <= 1.0,
            "curve value escaped [0, 1] at x = {x}"
        );
        rows.push(row);
        if x >= 0.5 {
            return Ok(rows);
        }
        i += 1;
        // a step that overshoots 1/2 still gets the endpoint row via min()
        if i as f64 * step > 0.5 + step * 1e-9 {
            rows.push(BoundCurvePoint {
                x: 0.5,
                gv: 0.0,
                holevo: holevo_capacity_bound(0.5),
                entangle: 0.0,
            });
            return Ok(rows);
        }
    }
}

/// Renders curve rows as CSV with nine significant digits per value.
pub fn curve_csv(rows: &[BoundCurvePoint]) -> String {
    let mut out = String::from("x,gv_rate,holevo_bound,entanglement_bound\n");
    for row in rows {
        out.push_str(&format!(
            "{:.8e},{:.8e},{:.8e},{:.8e}\n",
            row.x, row.gv, row.holevo, row.entangle
        ));
    }
    out
}
