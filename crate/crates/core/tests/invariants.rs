//! Cross-module identities behind the security argument, checked
//! numerically: conjugation by the dephasing unitary, commutation of the
//! POVMs with the weight projectors, the decomposition of the conjugated
//! bit-error operator, and positivity of every builder over random
//! transmittances.

use dpskit::linalg::CMatrix;
use dpskit::operators::{
    e_bit_operator, e_bit_slot_operator, e_ph_operator, m_12, m_23, operator_leq, pi_minus,
    pi_minus_detection, povm_detection, t_a_matrix, u_ab, weight_projector, Detector,
    HermitianOperator, TimeSlot, WeightTwo, JOINT_DIM,
};
use dpskit::bounds::{big_lambda_110, lambda_fn};
use dpskit::C64;
use proptest::prelude::*;

fn conjugate(u: &CMatrix<f64>, m: &CMatrix<f64>) -> CMatrix<f64> {
    u.matmul(m).matmul(&u.conjugate_transpose())
}

/// `P(H|s> H|s'>)` on the slot's qubit pair, identity elsewhere (dim 8).
fn hadamard_pair(slot: TimeSlot, sa: u8, sb: u8) -> CMatrix<f64> {
    let h = 0.5f64.sqrt();
    let ket = |s: u8| -> Vec<C64> {
        vec![
            C64::new(h, 0.0),
            C64::new(if s == 0 { h } else { -h }, 0.0),
        ]
    };
    let pa = CMatrix::projector(&ket(sa));
    let pb = CMatrix::projector(&ket(sb));
    let id = CMatrix::identity(2);
    match slot {
        TimeSlot::Ts1 => pa.kron(&pb).kron(&id),
        TimeSlot::Ts2 => id.kron(&pa).kron(&pb),
    }
}

#[test]
fn dephasing_unitary_leaves_phase_error_povm_invariant() {
    let u = u_ab::<f64>();
    for &eta1 in &[0.37f64, 0.5, 0.81] {
        let e_ph = e_ph_operator(eta1).unwrap();
        let conj = conjugate(&u, e_ph.matrix());
        assert!(conj.max_abs_diff(e_ph.matrix()) <= 1e-14);
    }
}

#[test]
fn phase_error_povm_commutes_with_weight_projectors() {
    let e_ph = e_ph_operator(0.41).unwrap();
    for a in 0..=3u8 {
        let p = weight_projector::<f64>(a).unwrap().lift_to_joint();
        let comm = e_ph.matrix().commutator(p.matrix());
        assert!(comm.max_abs_entry() <= 1e-14);
    }
}

#[test]
fn bit_error_povm_commutes_with_even_weight_projector() {
    let e_bit = e_bit_operator(0.41, 0.67).unwrap();
    let p02 = weight_projector::<f64>(0)
        .unwrap()
        .matrix()
        .add(weight_projector::<f64>(2).unwrap().matrix())
        .kron(&CMatrix::identity(3));
    let comm = e_bit.matrix().commutator(&p02);
    assert!(comm.max_abs_entry() <= 1e-14);
}

#[test]
fn conjugated_bit_error_decomposes_into_minus_projector_and_remainder() {
    let (e1, e2) = (0.43, 0.58);
    let u = u_ab::<f64>();
    let id8 = CMatrix::identity(8);

    let lhs = conjugate(&u, e_bit_slot_operator(TimeSlot::Ts1, e1, e2).unwrap().matrix());
    let brackets = hadamard_pair(TimeSlot::Ts1, 0, 0).add(&hadamard_pair(TimeSlot::Ts1, 1, 1));
    let rhs = id8
        .kron(pi_minus_detection(TimeSlot::Ts1, e1, e2).unwrap().matrix())
        .add(&brackets.kron(m_12(e1, e2).unwrap().matrix()));
    assert!(lhs.max_abs_diff(&rhs) <= 1e-13);

    let lhs = conjugate(&u, e_bit_slot_operator(TimeSlot::Ts2, e1, e2).unwrap().matrix());
    let brackets = hadamard_pair(TimeSlot::Ts2, 0, 0).add(&hadamard_pair(TimeSlot::Ts2, 1, 1));
    let rhs = id8
        .kron(pi_minus_detection(TimeSlot::Ts2, e1, e2).unwrap().matrix())
        .add(&brackets.kron(m_23(e1, e2).unwrap().matrix()));
    assert!(lhs.max_abs_diff(&rhs) <= 1e-13);
}

#[test]
fn weight_one_inequality_holds_at_an_interior_point() {
    // Sandwiched phase-error block against the amplified bit-error block
    // plus the width penalty, at the nominal point with half-width 0.01.
    let delta2 = 0.01;
    let lam = lambda_fn(0.51f64, 0.51).unwrap();
    let p1 = weight_projector::<f64>(1).unwrap().lift_to_joint();
    let e_ph = e_ph_operator(0.5).unwrap();
    let e_bit = e_bit_operator(0.5, 0.5).unwrap();

    let lhs = p1.matrix().matmul(e_ph.matrix()).matmul(p1.matrix());
    let sandwiched = p1.matrix().matmul(e_bit.matrix()).matmul(p1.matrix());
    let rhs = sandwiched
        .add(&CMatrix::identity(JOINT_DIM).scaled(2.0 * delta2))
        .scaled(lam);
    let cert = operator_leq(
        &HermitianOperator::try_new(lhs).unwrap(),
        &HermitianOperator::try_new(rhs).unwrap(),
        1e-10,
    )
    .unwrap();
    assert!(cert.holds, "witness {}", cert.witness);
}

#[test]
fn ambient_t_matrix_spectrum_adds_structural_zero() {
    // The 3x3 weight-2 comparison matrix carries one structural zero
    // eigenvalue outside its support, so its top eigenvalue is
    // max(Lambda_110, 0).
    for &(e1, e2, lam) in &[(0.6f64, 0.7, 2.0), (0.3, 0.4, 5.0), (0.505, 0.505, 5.41)] {
        let t = t_a_matrix(WeightTwo::B110, e1, e2, lam).unwrap();
        let lambda_110 = big_lambda_110(e1, e2, lam).unwrap();
        let expected = lambda_110.max(0.0);
        assert!((t.max_eigenvalue() - expected).abs() <= 1e-12);
    }
}

#[test]
fn monte_carlo_error_oracle_agrees_with_povm_route() {
    // The closed-form bit-error rate used as the Monte-Carlo oracle is a
    // port-amplitude computation; re-deriving it through the detection POVMs
    // on the conditional single-photon state must give the same number.
    use dpskit::protocol_sim::{analytic_e_bit, slot_amplitudes};

    let (mu, ce, ed): (f64, f64, f64) = (0.1, 0.9, 0.8);
    for &(e1, e2) in &[(0.5f64, 0.52), (0.47, 0.55), (0.61, 0.44)] {
        let bs = dpskit::operators::BsConfig::new(e1, e2, 0.0, 0.0).unwrap();
        let mut wrong = 0.0;
        let mut total = 0.0;
        for pattern in 0..8u8 {
            let bits = [pattern & 4 != 0, pattern & 2 != 0, pattern & 1 != 0];
            let sc = (mu * ce * ed).sqrt();
            let alpha: Vec<f64> = bits.iter().map(|&b| if b { -sc } else { sc }).collect();
            let phi = [
                C64::new((1.0 - e1).sqrt() * alpha[0], 0.0),
                C64::new(alpha[1], 0.0),
                C64::new(e1.sqrt() * alpha[2], 0.0),
            ];
            for slot in [TimeSlot::Ts1, TimeSlot::Ts2] {
                for det in [Detector::D0, Detector::D1] {
                    let pi = povm_detection(slot, det, e1, e2).unwrap();
                    let mut expect = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            expect += (phi[i].conj() * pi.entry(i, j) * phi[j]).re;
                        }
                    }
                    let bob = det == Detector::D1;
                    let alice = match slot {
                        TimeSlot::Ts1 => bits[0] != bits[1],
                        TimeSlot::Ts2 => bits[1] != bits[2],
                    };
                    total += expect;
                    if bob != alice {
                        wrong += expect;
                    }
                }
            }
            // The conditional state must carry the full monitored energy.
            let amps = slot_amplitudes(bits, mu, ce, ed, &bs);
            let monitored = amps.ts1[0].powi(2)
                + amps.ts1[1].powi(2)
                + amps.ts2[0].powi(2)
                + amps.ts2[1].powi(2);
            let phi_norm: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
            assert!((monitored - phi_norm).abs() <= 1e-14);
        }
        let povm_rate = wrong / total;
        let port_rate = analytic_e_bit(mu, ce, ed, &bs);
        assert!(
            (povm_rate - port_rate).abs() <= 1e-14,
            "povm {povm_rate} vs ports {port_rate} at ({e1},{e2})"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_povms_are_psd_projectors(
        e1 in 0.02f64..0.98,
        e2 in 0.02f64..0.98,
    ) {
        for slot in [TimeSlot::Ts1, TimeSlot::Ts2] {
            for det in [Detector::D0, Detector::D1] {
                let op = povm_detection(slot, det, e1, e2).unwrap();
                let eigs = op.eigenvalues();
                prop_assert!(eigs[0] >= -1e-12);
                prop_assert!(op.trace() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn error_povms_are_psd(
        e1 in 0.02f64..0.98,
        e2 in 0.02f64..0.98,
    ) {
        prop_assert!(e_bit_operator(e1, e2).unwrap().min_eigenvalue() >= -1e-12);
        prop_assert!(e_ph_operator(e1).unwrap().min_eigenvalue() >= -1e-12);
        prop_assert!(pi_minus(e1, e2).unwrap().min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn detector_sums_reduce_to_virtual_measurement(
        e1 in 0.02f64..0.98,
        e2 in 0.02f64..0.98,
    ) {
        let sum1 = povm_detection(TimeSlot::Ts1, Detector::D0, e1, e2).unwrap()
            .matrix()
            .add(povm_detection(TimeSlot::Ts1, Detector::D1, e1, e2).unwrap().matrix());
        prop_assert!(sum1.max_abs_diff(&CMatrix::diagonal(&[1.0, e1, 0.0])) <= 1e-13);
        let sum2 = povm_detection(TimeSlot::Ts2, Detector::D0, e1, e2).unwrap()
            .matrix()
            .add(povm_detection(TimeSlot::Ts2, Detector::D1, e1, e2).unwrap().matrix());
        prop_assert!(sum2.max_abs_diff(&CMatrix::diagonal(&[0.0, 1.0 - e1, 1.0])) <= 1e-13);
    }
}
