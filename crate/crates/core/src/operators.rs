//! Fixed-dimension operators of the security analysis.
//!
//! Builds the detection POVMs of the Mach-Zehnder measurement, the bit- and
//! phase-error POVMs, weight projectors on the sender's three virtual qubits,
//! the dephasing unitary, and the auxiliary matrices used to certify the
//! operator inequalities behind the key-rate bound.
//!
//! # Basis convention
//!
//! Every builder in this module uses one fixed ordering:
//!
//! * Qubit space `A = A1 A2 A3`: Z-basis states ordered lexicographically by
//!   the bit string `a1 a2 a3`, so index `4*a1 + 2*a2 + a3` (8 states).
//! * Photon space `B`: the single-photon basis `|1>_B, |2>_B, |3>_B` at
//!   indices 0, 1, 2, where `|1>` and `|3>` are a photon in the first
//!   upper-arm pulse and third lower-arm pulse, and `|2>` is a photon in the
//!   second pulse entering the interferometer.
//! * Joint space: index `a * 3 + b` (24 states).
//!
//! Rank-1 projector vectors keep the signs of the interferometer equations
//! so intermediate vectors are reproducible, even though projectors are
//! sign-invariant.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::scalar::{r, Real};

pub const QUBIT_DIM: usize = 8;
pub const PHOTON_DIM: usize = 3;
pub const JOINT_DIM: usize = QUBIT_DIM * PHOTON_DIM;

/// Index of the Z-basis state `|a1 a2 a3>` in the qubit space.
#[inline]
pub fn qubit_index(bits: [u8; 3]) -> usize {
    (bits[0] as usize) * 4 + (bits[1] as usize) * 2 + bits[2] as usize
}

/// Index of `|a1 a2 a3> x |b>_B` in the joint space (`b` in `0..3`).
#[inline]
pub fn joint_index(bits: [u8; 3], b: usize) -> usize {
    qubit_index(bits) * PHOTON_DIM + b
}

/// Time slot of a detection inside one three-pulse block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSlot {
    Ts1,
    Ts2,
}

/// Which detector clicked; `D0` reports bit 0 and `D1` reports bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    D0,
    D1,
}

/// Weight-2 bit strings on the three qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightTwo {
    B110,
    B101,
    B011,
}

impl WeightTwo {
    pub fn bits(self) -> [u8; 3] {
        match self {
            WeightTwo::B110 => [1, 1, 0],
            WeightTwo::B101 => [1, 0, 1],
            WeightTwo::B011 => [0, 1, 1],
        }
    }
}

/// Dense Hermitian matrix with the Hermiticity certified at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T> {
    mat: CMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Wraps a matrix after certifying `M = M^dag` entry-wise.
    ///
    /// The tolerance is `1e-12` (or a few ulps where the scalar is coarser).
    pub fn try_new(mat: CMatrix<T>) -> Result<Self> {
        let tol = r::<T>(1e-12).max(T::epsilon() * r(16.0));
        let defect = mat.hermiticity_defect();
        if defect > tol * mat.max_abs_entry().max(T::one()) {
            return Err(Error::NotHermitian {
                deviation: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(HermitianOperator { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> T {
        self.mat.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        hermitian_eigenvalues(&self.mat).expect("certified Hermitian")
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        *self.eigenvalues().last().expect("non-empty spectrum")
    }

    /// Lifts an operator on the qubit space to the joint space (`op x I_B`).
    pub fn lift_to_joint(&self) -> HermitianOperator<T> {
        let lifted = self.mat.kron(&CMatrix::identity(PHOTON_DIM));
        HermitianOperator { mat: lifted }
    }
}

/// Interferometer description: transmittances and their assumed half-widths.
///
/// `eta1`/`eta2` are the values the simulated hardware actually has, while
/// `delta1`/`delta2` define the ranges `[1/2 - delta, 1/2 + delta]` the
/// security analysis assumes. The threshold-detector variant adds the
/// splitters `eta3`/`eta4` in front of the detector pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsConfig<T> {
    pub eta1: T,
    pub eta2: T,
    pub delta1: T,
    pub delta2: T,
    pub eta3: Option<T>,
    pub eta4: Option<T>,
    pub delta3: Option<T>,
    pub delta4: Option<T>,
}

impl<T: Real> BsConfig<T> {
    pub fn new(eta1: T, eta2: T, delta1: T, delta2: T) -> Result<Self> {
        check_transmittance("eta1", eta1)?;
        check_transmittance("eta2", eta2)?;
        check_half_width("delta1", delta1)?;
        check_half_width("delta2", delta2)?;
        Ok(BsConfig {
            eta1,
            eta2,
            delta1,
            delta2,
            eta3: None,
            eta4: None,
            delta3: None,
            delta4: None,
        })
    }

    /// Ideal interferometer: both transmittances exactly 1/2, zero widths.
    pub fn balanced() -> Self {
        BsConfig::new(r(0.5), r(0.5), T::zero(), T::zero()).expect("balanced is valid")
    }

    pub fn with_threshold(mut self, eta3: T, eta4: T, delta3: T, delta4: T) -> Result<Self> {
        check_transmittance("eta3", eta3)?;
        check_transmittance("eta4", eta4)?;
        check_half_width("delta3", delta3)?;
        check_half_width("delta4", delta4)?;
        self.eta3 = Some(eta3);
        self.eta4 = Some(eta4);
        self.delta3 = Some(delta3);
        self.delta4 = Some(delta4);
        Ok(self)
    }

    pub fn eta1_upper(&self) -> T {
        r::<T>(0.5) + self.delta1
    }

    pub fn eta2_upper(&self) -> T {
        r::<T>(0.5) + self.delta2
    }

    pub fn eta1_lower(&self) -> T {
        r::<T>(0.5) - self.delta1
    }

    pub fn eta2_lower(&self) -> T {
        r::<T>(0.5) - self.delta2
    }

    /// Half-width used in the multi-click tag bound: `max(delta3, delta4)`.
    pub fn threshold_half_width(&self) -> Result<T> {
        match (self.delta3, self.delta4) {
            (Some(d3), Some(d4)) => Ok(d3.max(d4)),
            _ => Err(Error::InvalidParam(
                "threshold splitters eta3/eta4 are not configured".into(),
            )),
        }
    }

    /// Whether the actual transmittances lie inside the assumed ranges.
    pub fn in_assumed_range(&self) -> bool {
        let ok12 = self.eta1 >= self.eta1_lower()
            && self.eta1 <= self.eta1_upper()
            && self.eta2 >= self.eta2_lower()
            && self.eta2 <= self.eta2_upper();
        let ok34 = match (self.eta3, self.delta3, self.eta4, self.delta4) {
            (Some(e3), Some(d3), Some(e4), Some(d4)) => {
                (e3 - r(0.5)).abs() <= d3 && (e4 - r(0.5)).abs() <= d4
            }
            _ => true,
        };
        ok12 && ok34
    }
}

fn check_transmittance<T: Real>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must lie in the open interval (0, 1), got {x}"
        )))
    }
}

fn check_half_width<T: Real>(name: &str, d: T) -> Result<()> {
    if d >= T::zero() && d < r(0.5) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must lie in [0, 0.5), got {d}"
        )))
    }
}

fn cre<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Vector (in basis B) whose projector is the detection POVM element.
fn detection_vector<T: Real>(slot: TimeSlot, detector: Detector, eta1: T, eta2: T) -> [Complex<T>; 3] {
    let z = Complex::zero();
    match (slot, detector) {
        (TimeSlot::Ts1, Detector::D0) => [
            cre((T::one() - eta2).sqrt()),
            cre((eta1 * eta2).sqrt()),
            z,
        ],
        (TimeSlot::Ts1, Detector::D1) => [
            cre(eta2.sqrt()),
            -cre((eta1 * (T::one() - eta2)).sqrt()),
            z,
        ],
        (TimeSlot::Ts2, Detector::D0) => [
            z,
            cre(((T::one() - eta2) * (T::one() - eta1)).sqrt()),
            cre(eta2.sqrt()),
        ],
        (TimeSlot::Ts2, Detector::D1) => [
            z,
            cre((eta2 * (T::one() - eta1)).sqrt()),
            -cre((T::one() - eta2).sqrt()),
        ],
    }
}

/// Detection POVM element for one photon in `detector` at `slot`, on basis B.
pub fn povm_detection<T: Real>(
    slot: TimeSlot,
    detector: Detector,
    eta1: T,
    eta2: T,
) -> Result<HermitianOperator<T>> {
    check_transmittance("eta1", eta1)?;
    check_transmittance("eta2", eta2)?;
    let v = detection_vector(slot, detector, eta1, eta2);
    HermitianOperator::try_new(CMatrix::projector(&v))
}

/// Sign-flipped companion projector of the `D0` detection vectors.
///
/// These appear when the bit-error POVM is conjugated by the dephasing
/// unitary; they coincide with the `D1` elements only at 50% transmittance.
pub fn pi_minus_detection<T: Real>(slot: TimeSlot, eta1: T, eta2: T) -> Result<HermitianOperator<T>> {
    check_transmittance("eta1", eta1)?;
    check_transmittance("eta2", eta2)?;
    let z = Complex::zero();
    let v = match slot {
        TimeSlot::Ts1 => [
            cre((T::one() - eta2).sqrt()),
            -cre((eta1 * eta2).sqrt()),
            z,
        ],
        TimeSlot::Ts2 => [
            z,
            cre(((T::one() - eta2) * (T::one() - eta1)).sqrt()),
            -cre(eta2.sqrt()),
        ],
    };
    HermitianOperator::try_new(CMatrix::projector(&v))
}

/// Sum of the two sign-flipped projectors; positive semidefinite.
pub fn pi_minus<T: Real>(eta1: T, eta2: T) -> Result<HermitianOperator<T>> {
    let a = pi_minus_detection(TimeSlot::Ts1, eta1, eta2)?;
    let b = pi_minus_detection(TimeSlot::Ts2, eta1, eta2)?;
    HermitianOperator::try_new(a.matrix().add(b.matrix()))
}

/// Diagonal remainder `Pi_{1,D1} - Pi_minus_{1,D0}` on basis B.
pub fn m_12<T: Real>(eta1: T, eta2: T) -> Result<HermitianOperator<T>> {
    check_transmittance("eta1", eta1)?;
    check_transmittance("eta2", eta2)?;
    let two = r::<T>(2.0);
    HermitianOperator::try_new(CMatrix::diagonal(&[
        two * eta2 - T::one(),
        eta1 * (T::one() - two * eta2),
        T::zero(),
    ]))
}

/// Diagonal remainder `Pi_{2,D1} - Pi_minus_{2,D0}` on basis B.
pub fn m_23<T: Real>(eta1: T, eta2: T) -> Result<HermitianOperator<T>> {
    check_transmittance("eta1", eta1)?;
    check_transmittance("eta2", eta2)?;
    let two = r::<T>(2.0);
    HermitianOperator::try_new(CMatrix::diagonal(&[
        T::zero(),
        (T::one() - eta1) * (two * eta2 - T::one()),
        T::one() - two * eta2,
    ]))
}

/// `H|s>` as a 2-vector.
fn hadamard_ket<T: Real>(s: u8) -> [Complex<T>; 2] {
    let h = cre(r::<T>(0.5).sqrt());
    if s == 0 {
        [h, h]
    } else {
        [h, -h]
    }
}

/// 2x2 projector onto `H|s>`.
fn hadamard_proj<T: Real>(s: u8) -> CMatrix<T> {
    CMatrix::projector(&hadamard_ket(s))
}

/// 8x8 operator with `P(H|sa>)` and `P(H|sb>)` on the slot's qubit pair and
/// identity on the remaining qubit.
fn pair_projector<T: Real>(slot: TimeSlot, sa: u8, sb: u8) -> CMatrix<T> {
    let id = CMatrix::identity(2);
    let pa = hadamard_proj(sa);
    let pb = hadamard_proj(sb);
    match slot {
        TimeSlot::Ts1 => pa.kron(&pb).kron(&id),
        TimeSlot::Ts2 => id.kron(&pa).kron(&pb),
    }
}

/// Bit-error POVM element restricted to one time slot (dim 24).
pub fn e_bit_slot_operator<T: Real>(slot: TimeSlot, eta1: T, eta2: T) -> Result<HermitianOperator<T>> {
    let pi_d0 = povm_detection(slot, Detector::D0, eta1, eta2)?;
    let pi_d1 = povm_detection(slot, Detector::D1, eta1, eta2)?;
    let same = pair_projector(slot, 0, 0).add(&pair_projector(slot, 1, 1));
    let diff = pair_projector(slot, 0, 1).add(&pair_projector(slot, 1, 0));
    let mat = same.kron(pi_d1.matrix()).add(&diff.kron(pi_d0.matrix()));
    HermitianOperator::try_new(mat)
}

/// Bit-error POVM element `e_bit(eta1, eta2)`, dim 24.
pub fn e_bit_operator<T: Real>(eta1: T, eta2: T) -> Result<HermitianOperator<T>> {
    let ts1 = e_bit_slot_operator(TimeSlot::Ts1, eta1, eta2)?;
    let ts2 = e_bit_slot_operator(TimeSlot::Ts2, eta1, eta2)?;
    HermitianOperator::try_new(ts1.matrix().add(ts2.matrix()))
}

/// Diagonal photon-space block of the phase-error POVM for qubit string `a`.
fn phase_error_block<T: Real>(bits: [u8; 3], eta1: T) -> [T; 3] {
    let a2 = if bits[1] == 1 { T::one() } else { T::zero() };
    let mid = if bits[0] == 1 { eta1 } else { T::zero() }
        + if bits[2] == 1 { T::one() - eta1 } else { T::zero() };
    [a2, mid, a2]
}

/// Phase-error POVM element restricted to one time slot (dim 24).
pub fn e_ph_slot_operator<T: Real>(slot: TimeSlot, eta1: T) -> Result<HermitianOperator<T>> {
    check_transmittance("eta1", eta1)?;
    let mut mat = CMatrix::zeros(JOINT_DIM);
    for a in 0..QUBIT_DIM as u32 {
        let bits = [(a >> 2 & 1) as u8, (a >> 1 & 1) as u8, (a & 1) as u8];
        let (one_weight, two_weight) = match slot {
            // P(|1>_{A2} |1>_B) + eta1 P(|1>_{A1} |2>_B)
            TimeSlot::Ts1 => (
                if bits[1] == 1 { T::one() } else { T::zero() },
                if bits[0] == 1 { eta1 } else { T::zero() },
            ),
            // (1 - eta1) P(|1>_{A3} |2>_B) + P(|1>_{A2} |3>_B)
            TimeSlot::Ts2 => (
                if bits[1] == 1 { T::one() } else { T::zero() },
                if bits[2] == 1 { T::one() - eta1 } else { T::zero() },
            ),
        };
        let b_index = match slot {
            TimeSlot::Ts1 => 0,
            TimeSlot::Ts2 => 2,
        };
        let idx = qubit_index(bits);
        mat[(idx * 3 + b_index, idx * 3 + b_index)] = cre(one_weight);
        mat[(idx * 3 + 1, idx * 3 + 1)] = cre(two_weight);
    }
    HermitianOperator::try_new(mat)
}

/// Phase-error POVM element `e_ph(eta1)`, dim 24, diagonal in the fixed basis.
pub fn e_ph_operator<T: Real>(eta1: T) -> Result<HermitianOperator<T>> {
    check_transmittance("eta1", eta1)?;
    let mut mat = CMatrix::zeros(JOINT_DIM);
    for a in 0..QUBIT_DIM as u32 {
        let bits = [(a >> 2 & 1) as u8, (a >> 1 & 1) as u8, (a & 1) as u8];
        let block = phase_error_block(bits, eta1);
        let idx = qubit_index(bits);
        for (b, &w) in block.iter().enumerate() {
            mat[(idx * 3 + b, idx * 3 + b)] = cre(w);
        }
    }
    HermitianOperator::try_new(mat)
}

/// Projector onto the qubit subspace of Z-weight `a` (dim 8).
pub fn weight_projector<T: Real>(a: u8) -> Result<HermitianOperator<T>> {
    if a > 3 {
        return Err(Error::domain(format!("weight must be 0..=3, got {a}")));
    }
    let mut mat = CMatrix::zeros(QUBIT_DIM);
    for idx in 0..QUBIT_DIM {
        if (idx as u32).count_ones() == a as u32 {
            mat[(idx, idx)] = Complex::one();
        }
    }
    HermitianOperator::try_new(mat)
}

/// Dephasing unitary `U_AB = sum_i X_{A_i} (x) |i><i|_B` (dim 24).
///
/// Flips qubit `A_i` in the Z-basis when the photon occupies `|i>_B`; on
/// Hadamard product states it multiplies by `(-1)^{s_i}`.
pub fn u_ab<T: Real>() -> CMatrix<T> {
    let x = CMatrix::from_real(&[&[T::zero(), T::one()], &[T::one(), T::zero()]]);
    let id = CMatrix::identity(2);
    let mut out = CMatrix::zeros(JOINT_DIM);
    for i in 0..3 {
        let qubit_part = match i {
            0 => x.kron(&id).kron(&id),
            1 => id.kron(&x).kron(&id),
            _ => id.kron(&id).kron(&x),
        };
        let mut sel = CMatrix::zeros(PHOTON_DIM);
        sel[(i, i)] = Complex::one();
        out = out.add(&qubit_part.kron(&sel));
    }
    out
}

/// Photon-space support projector `P_a = sum_i delta_{a_i,1} |i><i|_B`.
fn weight_support<T: Real>(bits: [u8; 3]) -> CMatrix<T> {
    CMatrix::diagonal(&[
        if bits[0] == 1 { T::one() } else { T::zero() },
        if bits[1] == 1 { T::one() } else { T::zero() },
        if bits[2] == 1 { T::one() } else { T::zero() },
    ])
}

/// `T_a = P_a [Pi_ph_a - lambda Pi_minus] P_a` for a weight-2 string (dim 3).
pub fn t_a_matrix<T: Real>(
    pattern: WeightTwo,
    eta1: T,
    eta2: T,
    lambda: T,
) -> Result<HermitianOperator<T>> {
    if lambda <= T::zero() {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    let bits = pattern.bits();
    let support = weight_support(bits);
    let pi_ph = CMatrix::diagonal(&phase_error_block(bits, eta1));
    let minus = pi_minus(eta1, eta2)?;
    let inner = pi_ph.sub(&minus.matrix().scaled(lambda));
    HermitianOperator::try_new(support.matmul(&inner).matmul(&support))
}

/// Gram-matrix block `M_B` of the cross term `2 P_1 e_bit P_3` (dim 3).
///
/// Its spectrum is `{1, gamma_plus, gamma_minus}`; `gamma_plus <= 1` is what
/// bounds the operator norm of the cross term by one.
pub fn m_b_matrix<T: Real>(eta1: T, eta2: T) -> Result<HermitianOperator<T>> {
    check_transmittance("eta1", eta1)?;
    check_transmittance("eta2", eta2)?;
    let one = T::one();
    let two = r::<T>(2.0);
    let four = r::<T>(4.0);
    let off1 = -two * (one - eta1) * (two * eta2 - one) * (eta1 * eta2 * (one - eta2)).sqrt();
    let off2 = -two * eta1 * (one - two * eta2) * ((one - eta1) * (one - eta2) * eta2).sqrt();
    let d1 = one - four * eta2 * (one - eta1) * (one - eta2);
    let d2 = one - two * (one - eta1) * eta1 * (one - two * eta2) * (one - two * eta2);
    let d3 = one - four * (one - eta2) * eta1 * eta2;
    let z = T::zero();
    HermitianOperator::try_new(CMatrix::from_real(&[
        &[d1, off1, z],
        &[off1, d2, off2],
        &[z, off2, d3],
    ]))
}

/// The scalars `(a, b)` whose combination `1 - a +/- sqrt(b)` gives the
/// nontrivial eigenvalues of `M_B`.
pub fn m_b_scalars<T: Real>(eta1: T, eta2: T) -> Result<(T, T)> {
    check_transmittance("eta1", eta1)?;
    check_transmittance("eta2", eta2)?;
    let one = T::one();
    let two = r::<T>(2.0);
    let four = r::<T>(4.0);
    let sixteen = r::<T>(16.0);
    let eight = r::<T>(8.0);
    let k = one - two * eta2; // (1 - 2 eta2)
    let a = k * k * eta1 * (one - eta1) + two * eta2 * (one - eta2);
    let b = -two * eta1.powi(3) * k.powi(4)
        + eta1.powi(4) * k.powi(4)
        + four * (one - eta2).powi(2) * eta2 * eta2
        - sixteen * eta1 * (one - eta2).powi(2) * eta2 * eta2
        + eta1 * eta1 * (one - eight * k * k * (one - eta2) * eta2);
    Ok((a, b))
}

/// Certificate returned by [`operator_leq`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeqCertificate<T> {
    pub holds: bool,
    /// Smallest eigenvalue of `rhs - lhs`; nonnegative when `lhs <= rhs`.
    pub witness: T,
}

/// Numerically certifies the operator inequality `lhs <= rhs`.
pub fn operator_leq<T: Real>(
    lhs: &HermitianOperator<T>,
    rhs: &HermitianOperator<T>,
    tol: T,
) -> Result<LeqCertificate<T>> {
    if lhs.dim() != rhs.dim() {
        return Err(Error::DimensionMismatch {
            expected: lhs.dim(),
            got: rhs.dim(),
        });
    }
    let gap = rhs.matrix().sub(lhs.matrix());
    let witness = hermitian_eigenvalues(&gap)?[0];
    Ok(LeqCertificate {
        holds: witness >= -tol,
        witness,
    })
}
