//! Truncated multimode Fock-space simulator of passive linear optics.
//!
//! Supplies the two first-principles oracles of the toolkit: the
//! detector-efficiency commutation check (loss beam splitters can be pulled
//! in front of the interferometer) and the forward-propagation derivation of
//! the detection POVMs, which must agree with the closed-form builders in
//! [`crate::operators`].
//!
//! States are dense vectors over occupation tuples with total photon number
//! at most `n_max`, ordered by total photon number first and then
//! lexicographically. Beam splitters conserve total photon number, so no
//! truncation loss occurs.

use std::collections::HashMap;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::operators::{Detector, HermitianOperator, TimeSlot};
use crate::scalar::{r, Real};

/// Occupation-tuple basis shared by states and density operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_modes: usize,
    n_max: u32,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockBasis {
    pub fn new(n_modes: usize, n_max: u32) -> Self {
        assert!(n_modes > 0, "need at least one mode");
        let mut states = Vec::new();
        for total in 0..=n_max {
            let mut current = vec![0u8; n_modes];
            enumerate_with_total(&mut current, 0, total as u8, &mut states);
        }
        let index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        FockBasis {
            n_modes,
            n_max,
            states,
            index,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn occupation(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }
}

/// Fills `states` with all tuples of the given total, lexicographically.
fn enumerate_with_total(current: &mut Vec<u8>, mode: usize, remaining: u8, states: &mut Vec<Vec<u8>>) {
    if mode == current.len() - 1 {
        current[mode] = remaining;
        states.push(current.clone());
        return;
    }
    for n in 0..=remaining {
        current[mode] = n;
        enumerate_with_total(current, mode + 1, remaining - n, states);
    }
    current[mode] = 0;
}

/// Beam splitter on a pair of modes.
///
/// Convention: the `mode_a` creation operator maps to
/// `sqrt(eta) a'_a - sqrt(1 - eta) a'_b`, and `mode_b` to
/// `sqrt(1 - eta) a'_a + sqrt(eta) a'_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsSpec<T> {
    pub mode_a: usize,
    pub mode_b: usize,
    pub transmittance: T,
}

impl<T: Real> BsSpec<T> {
    pub fn new(mode_a: usize, mode_b: usize, transmittance: T) -> Result<Self> {
        if mode_a == mode_b {
            return Err(Error::InvalidMode("beam splitter needs two distinct modes".into()));
        }
        if transmittance <= T::zero() || transmittance >= T::one() {
            return Err(Error::domain(format!(
                "transmittance must lie in (0, 1), got {transmittance}"
            )));
        }
        Ok(BsSpec {
            mode_a,
            mode_b,
            transmittance,
        })
    }
}

/// Pure state on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState<T> {
    basis: FockBasis,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> FockState<T> {
    pub fn vacuum(n_modes: usize, n_max: u32) -> Self {
        let basis = FockBasis::new(n_modes, n_max);
        let mut amplitudes = vec![Complex::zero(); basis.len()];
        amplitudes[0] = Complex::one();
        FockState { basis, amplitudes }
    }

    /// Single photon in `mode`, vacuum elsewhere.
    pub fn single_photon(n_modes: usize, n_max: u32, mode: usize) -> Result<Self> {
        if mode >= n_modes {
            return Err(Error::InvalidMode(format!(
                "mode {mode} out of range for {n_modes} modes"
            )));
        }
        if n_max < 1 {
            return Err(Error::CutoffTooSmall {
                needed: 1,
                allowed: n_max,
            });
        }
        let mut occ = vec![0u8; n_modes];
        occ[mode] = 1;
        let basis = FockBasis::new(n_modes, n_max);
        let idx = basis.index_of(&occ).expect("occupation within cutoff");
        let mut amplitudes = vec![Complex::zero(); basis.len()];
        amplitudes[idx] = Complex::one();
        Ok(FockState { basis, amplitudes })
    }

    pub fn from_amplitudes(basis: FockBasis, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: amplitudes.len(),
            });
        }
        Ok(FockState { basis, amplitudes })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn amplitude(&self, occ: &[u8]) -> Complex<T> {
        self.basis
            .index_of(occ)
            .map(|i| self.amplitudes[i])
            .unwrap_or_else(Complex::zero)
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n <= T::zero() {
            return Err(Error::domain("cannot normalize the zero vector"));
        }
        let inv = Complex::new(T::one() / n, T::zero());
        for a in &mut self.amplitudes {
            *a = *a * inv;
        }
        Ok(self)
    }

    /// Largest total photon number with nonzero amplitude.
    pub fn max_total_photons(&self) -> u32 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > T::zero())
            .map(|(i, _)| self.basis.occupation(i).iter().map(|&n| n as u32).sum())
            .max()
            .unwrap_or(0)
    }

    /// Re-embeds the state into a wider mode register; `mode_map[i]` is the
    /// destination of the current mode `i`, all other modes start in vacuum.
    pub fn embed(&self, n_modes: usize, n_max: u32, mode_map: &[usize]) -> Result<FockState<T>> {
        if mode_map.len() != self.basis.n_modes() {
            return Err(Error::InvalidMode("mode map must cover every source mode".into()));
        }
        if self.max_total_photons() > n_max {
            return Err(Error::CutoffTooSmall {
                needed: self.max_total_photons(),
                allowed: n_max,
            });
        }
        let basis = FockBasis::new(n_modes, n_max);
        let mut amplitudes = vec![Complex::zero(); basis.len()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            if amp.norm_sqr() == T::zero() {
                continue;
            }
            let mut occ = vec![0u8; n_modes];
            for (src_mode, &dst_mode) in mode_map.iter().enumerate() {
                if dst_mode >= n_modes {
                    return Err(Error::InvalidMode(format!(
                        "destination mode {dst_mode} out of range"
                    )));
                }
                occ[dst_mode] = self.basis.occupation(i)[src_mode];
            }
            let idx = basis.index_of(&occ).expect("within cutoff after embed");
            amplitudes[idx] = *amp;
        }
        Ok(FockState { basis, amplitudes })
    }

    /// Applies a beam splitter; exact on the truncated space since the total
    /// photon number in the mode pair is conserved.
    pub fn apply_beam_splitter(&self, spec: &BsSpec<T>) -> Result<FockState<T>> {
        let nm = self.basis.n_modes();
        if spec.mode_a >= nm || spec.mode_b >= nm {
            return Err(Error::InvalidMode(format!(
                "beam splitter modes ({}, {}) out of range for {nm} modes",
                spec.mode_a, spec.mode_b
            )));
        }
        let eta = spec.transmittance;
        let u = eta.sqrt();
        let v = -(T::one() - eta).sqrt();
        let w = (T::one() - eta).sqrt();
        let x = eta.sqrt();

        let max_n = self.basis.n_max() as usize;
        let fact = factorials::<T>(max_n);
        let binom = binomials::<T>(max_n);

        let mut out = vec![Complex::zero(); self.basis.len()];
        let mut occ = vec![0u8; nm];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            if amp.norm_sqr() == T::zero() {
                continue;
            }
            occ.copy_from_slice(self.basis.occupation(i));
            let n = occ[spec.mode_a] as usize;
            let m = occ[spec.mode_b] as usize;
            if n + m == 0 {
                out[i] = out[i] + *amp;
                continue;
            }
            let norm_in = (fact[n] * fact[m]).sqrt();
            for k in 0..=n {
                for l in 0..=m {
                    let p = k + l;
                    let q = n + m - p;
                    let coeff = binom[n][k]
                        * binom[m][l]
                        * u.powi(k as i32)
                        * v.powi((n - k) as i32)
                        * w.powi(l as i32)
                        * x.powi((m - l) as i32)
                        * (fact[p] * fact[q]).sqrt()
                        / norm_in;
                    occ[spec.mode_a] = p as u8;
                    occ[spec.mode_b] = q as u8;
                    let idx = self
                        .basis
                        .index_of(&occ)
                        .expect("photon number conserved within cutoff");
                    out[idx] = out[idx] + *amp * Complex::new(coeff, T::zero());
                }
            }
            occ[spec.mode_a] = n as u8;
            occ[spec.mode_b] = m as u8;
        }
        Ok(FockState {
            basis: self.basis.clone(),
            amplitudes: out,
        })
    }
}

fn factorials<T: Real>(n_max: usize) -> Vec<T> {
    let mut fact = vec![T::one(); n_max + 1];
    for n in 1..=n_max {
        fact[n] = fact[n - 1] * T::from_usize(n).expect("small factorial");
    }
    fact
}

fn binomials<T: Real>(n_max: usize) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut row = vec![T::one(); n + 1];
        for k in 1..n {
            row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
        }
        rows.push(row);
    }
    rows
}

/// Density operator over the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T> {
    basis: FockBasis,
    mat: CMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    pub fn from_pure(state: &FockState<T>) -> Self {
        DensityOperator {
            basis: state.basis.clone(),
            mat: CMatrix::projector(&state.amplitudes),
        }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn trace(&self) -> T {
        self.mat.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(hermitian_eigenvalues(&self.mat)?[0])
    }

    /// Traces out every mode not listed in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator<T>> {
        let nm = self.basis.n_modes();
        if keep.is_empty() {
            return Err(Error::InvalidMode("must keep at least one mode".into()));
        }
        let mut seen = vec![false; nm];
        for &m in keep {
            if m >= nm {
                return Err(Error::InvalidMode(format!("mode {m} out of range")));
            }
            if seen[m] {
                return Err(Error::InvalidMode(format!("mode {m} listed twice")));
            }
            seen[m] = true;
        }
        let traced: Vec<usize> = (0..nm).filter(|m| !seen[*m]).collect();

        let out_basis = FockBasis::new(keep.len(), self.basis.n_max());
        let mut out = CMatrix::zeros(out_basis.len());
        let mut kept_i = vec![0u8; keep.len()];
        let mut kept_j = vec![0u8; keep.len()];
        for i in 0..self.basis.len() {
            let occ_i = self.basis.occupation(i);
            for j in 0..self.basis.len() {
                let z = self.mat[(i, j)];
                if z.norm_sqr() == T::zero() {
                    continue;
                }
                let occ_j = self.basis.occupation(j);
                if traced.iter().any(|&m| occ_i[m] != occ_j[m]) {
                    continue;
                }
                for (slot, &m) in keep.iter().enumerate() {
                    kept_i[slot] = occ_i[m];
                    kept_j[slot] = occ_j[m];
                }
                let oi = out_basis.index_of(&kept_i).expect("within cutoff");
                let oj = out_basis.index_of(&kept_j).expect("within cutoff");
                out[(oi, oj)] = out[(oi, oj)] + z;
            }
        }
        Ok(DensityOperator {
            basis: out_basis,
            mat: out,
        })
    }

    /// Trace distance, half the sum of absolute eigenvalues of the
    /// difference.
    pub fn trace_distance(&self, other: &DensityOperator<T>) -> Result<T> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                got: other.basis.len(),
            });
        }
        let diff = self.mat.sub(&other.mat);
        let eigs = hermitian_eigenvalues(&diff)?;
        Ok(eigs.iter().fold(T::zero(), |acc, &e| acc + e.abs()) * r(0.5))
    }
}

/// Checks that detector-loss beam splitters commute with the interferometer
/// splitter up to the traced-out loss modes.
///
/// Builds both four-mode circuits (loss splitters against vacuum ancillas
/// before or after the `eta` splitter), reduces each to the signal pair and
/// returns their trace distance, which the security argument predicts to be
/// zero.
pub fn verify_commutation<T: Real>(
    input: &FockState<T>,
    eta: T,
    eta_det: T,
    n_max: u32,
) -> Result<T> {
    if input.basis().n_modes() != 2 {
        return Err(Error::InvalidMode(
            "commutation check expects a two-mode input state".into(),
        ));
    }
    let needed = input.max_total_photons();
    if needed > n_max {
        return Err(Error::CutoffTooSmall {
            needed,
            allowed: n_max,
        });
    }
    let full = input.embed(4, n_max, &[0, 1])?;
    let det_l = BsSpec::new(0, 2, eta_det)?;
    let det_r = BsSpec::new(1, 3, eta_det)?;
    let mix = BsSpec::new(0, 1, eta)?;

    let loss_first = full
        .apply_beam_splitter(&det_l)?
        .apply_beam_splitter(&det_r)?
        .apply_beam_splitter(&mix)?;
    let loss_last = full
        .apply_beam_splitter(&mix)?
        .apply_beam_splitter(&det_l)?
        .apply_beam_splitter(&det_r)?;

    let rho_a = DensityOperator::from_pure(&loss_first).partial_trace(&[0, 1])?;
    let rho_b = DensityOperator::from_pure(&loss_last).partial_trace(&[0, 1])?;
    rho_a.trace_distance(&rho_b)
}

/// Forward single-photon interferometer modes: `(u,1)`, `(l,2)`, `(u,2)`,
/// `(l,3)` in that order.
const MODE_U1: usize = 0;
const MODE_L2: usize = 1;
const MODE_U2: usize = 2;
const MODE_L3: usize = 3;

/// Derives a detection POVM element by propagating each single-photon basis
/// state through the interferometer and reading the detector amplitude.
///
/// The second-pulse basis state enters before the first splitter; routing it
/// through the reflected port with complementary transmittance reproduces
/// the all-positive split of the forward derivation. The first and third
/// basis states start directly in the arm pulses `(u,1)` and `(l,3)`.
pub fn derive_povm_via_fock<T: Real>(
    slot: TimeSlot,
    detector: Detector,
    eta1: T,
    eta2: T,
) -> Result<HermitianOperator<T>> {
    if eta1 <= T::zero() || eta1 >= T::one() || eta2 <= T::zero() || eta2 >= T::one() {
        return Err(Error::domain("transmittances must lie in (0, 1)"));
    }
    let detector_mode = match (slot, detector) {
        (TimeSlot::Ts1, Detector::D0) => MODE_L2,
        (TimeSlot::Ts1, Detector::D1) => MODE_U1,
        (TimeSlot::Ts2, Detector::D0) => MODE_L3,
        (TimeSlot::Ts2, Detector::D1) => MODE_U2,
    };

    let bs1 = BsSpec::new(MODE_L2, MODE_U2, T::one() - eta1)?;
    let bs2_ts1 = BsSpec::new(MODE_L2, MODE_U1, eta2)?;
    let bs2_ts2 = BsSpec::new(MODE_L3, MODE_U2, eta2)?;

    let mut amps = [Complex::<T>::zero(); 3];
    for (k, injection_mode) in [MODE_U1, MODE_U2, MODE_L3].into_iter().enumerate() {
        // Basis state 2 is a photon in the second *input* pulse; it reaches
        // the arms through the first splitter. States 1 and 3 are already
        // arm pulses.
        let state = FockState::single_photon(4, 1, injection_mode)?
            .apply_beam_splitter(&bs1)?
            .apply_beam_splitter(&bs2_ts1)?
            .apply_beam_splitter(&bs2_ts2)?;
        let mut occ = [0u8; 4];
        occ[detector_mode] = 1;
        amps[k] = state.amplitude(&occ);
    }

    let mat = CMatrix::from_fn(3, |i, j| amps[i].conj() * amps[j]);
    HermitianOperator::try_new(mat)
}
