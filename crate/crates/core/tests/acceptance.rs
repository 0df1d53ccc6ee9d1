//! Acceptance gate: numbered end-to-end criteria with their tolerances.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see one
//! PASS/FAIL line per criterion.

use dpskit::bounds::{
    big_lambda_110, lambda_fn, lambda_lower_bound, monotone_witnesses, optimize_mu, pnr_pa,
    tag_bound, verify_lambda_monotone, MonotoneGrid, MuSearch, SourceModel,
};
use dpskit::fock_sim::{derive_povm_via_fock, verify_commutation, FockBasis, FockState};
use dpskit::linalg::CMatrix;
use dpskit::operators::{
    e_bit_operator, e_ph_operator, m_b_matrix, m_b_scalars, operator_leq, povm_detection,
    weight_projector, BsConfig, Detector, HermitianOperator, TimeSlot, JOINT_DIM,
};
use dpskit::protocol_sim::{
    analytic_e_bit, run_protocol, run_threshold_protocol, Backend, ProtocolParams,
};
use dpskit::C64;
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:2}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_lambda_reproduction() {
    let cases: [(f64, f64); 3] = [(0.5, 5.236), (0.505, 5.415), (0.51, 5.602)];
    let mut worst = 0.0f64;
    for &(eta, expected) in &cases {
        let lam = lambda_fn(eta, eta).unwrap();
        worst = worst.max((lam - expected).abs());
    }
    report(
        1,
        worst <= 0.005,
        &format!("lambda at 0.5/0.505/0.51 within 0.005 (worst dev {worst:.2e})"),
    );
}

fn curve(deltas: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let mut rows = Vec::new();
    let n = 16;
    for i in 0..n {
        let eta = 10f64.powf(-2.0 + 2.0 * i as f64 / (n - 1) as f64);
        let rates: Vec<f64> = deltas
            .iter()
            .map(|&d| optimize_mu(eta, 0.01, d, &MuSearch::default()).unwrap().rate)
            .collect();
        rows.push((eta, rates));
    }
    rows
}

#[test]
fn criterion_02_degradation_factors() {
    let rows = curve(&[0.0, 0.005, 0.01]);
    println!("      eta      R(0)         R(0.005)     R(0.01)      ratio1  ratio2");
    let mut ok = true;
    let mut flat_rows = 0;
    for (eta, r) in &rows {
        let (r0, r1, r2) = (r[0], r[1], r[2]);
        let (ratio1, ratio2) = if r0 > 0.0 { (r1 / r0, r2 / r0) } else { (0.0, 0.0) };
        println!("  {eta:9.5} {r0:.6e} {r1:.6e} {r2:.6e}  {ratio1:.4}  {ratio2:.4}");
        if *eta >= 0.05 && r0 > 0.0 {
            flat_rows += 1;
            ok &= (ratio1 - 0.57).abs() <= 0.05;
            ok &= (ratio2 - 0.27).abs() <= 0.05;
        }
    }
    report(
        2,
        ok && flat_rows >= 5,
        &format!("ratios within 0.57+-0.05 / 0.27+-0.05 over {flat_rows} flat-regime rows"),
    );
}

#[test]
fn criterion_03_curve_ordering() {
    let rows = curve(&[0.0, 0.005, 0.01]);
    let mut ok = true;
    for (_, r) in &rows {
        if r[1] > 0.0 {
            ok &= r[0] > r[1];
        }
        if r[2] > 0.0 {
            ok &= r[1] > r[2];
        }
    }
    report(3, ok, "R(0) > R(0.005) > R(0.01) wherever positive");
}

#[test]
fn criterion_04_lemma1_certification() {
    let mut worst = f64::INFINITY;
    for &delta in &[0.0f64, 0.005, 0.01] {
        let lam = lambda_fn(0.5 + delta, 0.5 + delta).unwrap();
        let p1 = weight_projector::<f64>(1).unwrap().lift_to_joint();
        let grid = |i: usize| 0.5 - delta + 2.0 * delta * (i as f64) / 10.0;
        for i in 0..11 {
            for j in 0..11 {
                let (e1, e2) = (grid(i), grid(j));
                let e_ph = e_ph_operator(e1).unwrap();
                let e_bit = e_bit_operator(e1, e2).unwrap();
                let lhs = p1.matrix().matmul(e_ph.matrix()).matmul(p1.matrix());
                let rhs = p1
                    .matrix()
                    .matmul(e_bit.matrix())
                    .matmul(p1.matrix())
                    .add(&CMatrix::identity(JOINT_DIM).scaled(2.0 * delta))
                    .scaled(lam);
                let cert = operator_leq(
                    &HermitianOperator::try_new(lhs).unwrap(),
                    &HermitianOperator::try_new(rhs).unwrap(),
                    1e-10,
                )
                .unwrap();
                worst = worst.min(cert.witness);
            }
        }
    }
    report(
        4,
        worst >= -1e-10,
        &format!("11x11 grids for widths 0/0.005/0.01, worst witness {worst:.3e}"),
    );
}

#[test]
fn criterion_05_lemma2_certification() {
    let mut worst_eig = f64::NEG_INFINITY;
    let mut worst_identity = 0.0f64;
    for i in 0..50 {
        for j in 0..50 {
            let e1 = 0.01 + 0.98 * (i as f64) / 49.0;
            let e2 = 0.01 + 0.98 * (j as f64) / 49.0;
            worst_eig = worst_eig.max(m_b_matrix(e1, e2).unwrap().max_eigenvalue());
            let (a, b) = m_b_scalars(e1, e2).unwrap();
            let residual = (a * a - b - 4.0 * e1 * e2 * (1.0 - e1) * (1.0 - e2)).abs();
            worst_identity = worst_identity.max(residual);
        }
    }
    report(
        5,
        worst_eig <= 1.0 + 1e-12 && worst_identity <= 1e-12,
        &format!("max eig {worst_eig:.15} <= 1+1e-12, identity residual {worst_identity:.2e}"),
    );
}

#[test]
fn criterion_06_root_property() {
    let mut ok = true;
    let mut worst = 0.0f64;
    for &eta in &[0.5f64, 0.505, 0.51, 0.6] {
        let lam = lambda_fn(eta, eta).unwrap();
        let root = big_lambda_110(eta, eta, lam).unwrap().abs();
        worst = worst.max(root);
        ok &= root <= 1e-10;
        ok &= lam > lambda_lower_bound(eta, eta).unwrap();
    }
    report(
        6,
        ok,
        &format!("Lambda_110(etaU, etaU, lambda+) = 0 within 1e-10 (worst {worst:.2e}), lambda+ > lambda^L"),
    );
}

#[test]
fn criterion_07_monotonicity() {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for &lam in &[1.0f64, 5.24, 10.0] {
        let grid = MonotoneGrid {
            eta_lo: 0.01,
            eta_hi: 0.99,
            points: 101,
            lambda: lam,
        };
        let rep = verify_lambda_monotone(&grid).unwrap();
        ok &= rep.pass;
        worst = worst.min(rep.min_diff_eta1.min(rep.min_diff_eta2));
    }
    let mut exclusion = true;
    for i in 0..50 {
        for j in 0..50 {
            for k in 1..=20 {
                let e1 = 0.02 + 0.96 * (i as f64) / 49.0;
                let e2 = 0.02 + 0.96 * (j as f64) / 49.0;
                let lam = 1.0 + 9.0 * (k as f64) / 20.0;
                let w = monotone_witnesses(e1, e2, lam).unwrap();
                exclusion &= !(w.a <= 0.0 && w.b <= 0.0);
            }
        }
    }
    report(
        7,
        ok && exclusion,
        &format!("101x101 finite differences >= -1e-8 (worst {worst:.3e}); A<=0 and B<=0 never coincide"),
    );
}

#[test]
fn criterion_08_commutation_oracle() {
    let mut rng = SmallRng::seed_from_u64(0x5eed);
    let basis = FockBasis::new(2, 4);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let amps: Vec<C64> = (0..basis.len())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let state = FockState::from_amplitudes(basis.clone(), amps)
            .unwrap()
            .normalized()
            .unwrap();
        let eta = rng.random_range(0.05..0.95);
        let eta_det = rng.random_range(0.05..0.95);
        worst = worst.max(verify_commutation(&state, eta, eta_det, 4).unwrap());
    }
    report(
        8,
        worst <= 1e-10,
        &format!("20 random states at cutoff 4, worst trace distance {worst:.2e}"),
    );
}

#[test]
fn criterion_09_povm_oracle_equivalence() {
    let mut worst = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            let e1 = 0.1 + 0.8 * (i as f64) / 4.0;
            let e2 = 0.1 + 0.8 * (j as f64) / 4.0;
            for slot in [TimeSlot::Ts1, TimeSlot::Ts2] {
                for det in [Detector::D0, Detector::D1] {
                    let via_fock = derive_povm_via_fock(slot, det, e1, e2).unwrap();
                    let closed = povm_detection(slot, det, e1, e2).unwrap();
                    worst = worst.max(via_fock.matrix().max_abs_diff(closed.matrix()));
                }
            }
        }
    }
    report(
        9,
        worst <= 1e-12,
        &format!("5x5 transmittance grid, worst entry deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_10_monte_carlo_consistency() {
    let n_em = 1_000_000u64;
    let mu = 0.1;
    let ideal = ProtocolParams {
        n_em,
        mu,
        channel_eta: 1.0,
        eta_det: 1.0,
        dark_prob: 0.0,
        bs: BsConfig::balanced(),
        t_prob: 0.5,
        backend: Backend::Pnr,
        seed: 20_260_809,
    };
    let run = run_protocol(&ideal).unwrap();
    let zero_errors = run.tallies.n_bit == 0;
    let q_model = 2.0 * mu * (-2.0f64 * mu).exp();
    let q_hat = run.tallies.n_det as f64 / n_em as f64;
    let sigma_q = (q_model * (1.0 - q_model) / n_em as f64).sqrt();
    let q_ok = (q_hat - q_model).abs() <= 4.0 * sigma_q;

    let mut skewed = ideal;
    skewed.bs = BsConfig::new(0.5, 0.52, 0.0, 0.02).unwrap();
    skewed.seed = 20_260_810;
    let run2 = run_protocol(&skewed).unwrap();
    let oracle = analytic_e_bit(mu, 1.0, 1.0, &skewed.bs);
    let e_hat: f64 = run2.tallies.e_bit().unwrap();
    let sigma_e = (oracle * (1.0 - oracle) / run2.tallies.n_sample as f64).sqrt();
    let e_ok = (e_hat - oracle).abs() <= 4.0 * sigma_e;

    report(
        10,
        zero_errors && q_ok && e_ok,
        &format!(
            "ideal: e_bit=0 ({zero_errors}), |Q-model|={:.2e} <= 4sigma={:.2e}; skewed: |e-oracle|={:.2e} <= 4sigma={:.2e}",
            (q_hat - q_model).abs(),
            4.0 * sigma_q,
            (e_hat - oracle).abs(),
            4.0 * sigma_e
        ),
    );
}

#[test]
fn criterion_11_threshold_tag_bound() {
    let n_em = 50_000u64;
    let bs = BsConfig::new(0.5, 0.5, 0.005, 0.005)
        .unwrap()
        .with_threshold(0.51, 0.51, 0.01, 0.01)
        .unwrap();
    let mut violations = 0u32;
    let slack = 4.0 * (n_em as f64).sqrt();
    for seed in 0..50u64 {
        let params = ProtocolParams {
            n_em,
            mu: 0.3,
            channel_eta: 1.0,
            eta_det: 1.0,
            dark_prob: 0.0,
            bs,
            t_prob: 0.5,
            backend: Backend::Threshold,
            seed,
        };
        let thr = run_threshold_protocol(&params).unwrap();
        let bound = tag_bound(thr.run.tallies.n_multi, 0.01, 0.01).unwrap();
        if thr.run.hidden.n_tag as f64 > bound + slack {
            violations += 1;
        }
    }

    // Key-length comparison at identical parameters, in both the
    // multiphoton-saturated and the positive-key regime.
    let mut le_ok = true;
    for &(mu, n_em) in &[(0.3f64, 50_000u64), (0.01, 300_000)] {
        let thr_params = ProtocolParams {
            n_em,
            mu,
            channel_eta: 1.0,
            eta_det: 1.0,
            dark_prob: 0.0,
            bs,
            t_prob: 0.5,
            backend: Backend::Threshold,
            seed: 7,
        };
        let thr = run_threshold_protocol(&thr_params).unwrap();
        let mut pnr_params = thr_params;
        pnr_params.backend = Backend::Pnr;
        let pnr_run = run_protocol(&pnr_params).unwrap();
        let source = SourceModel::coherent(mu).unwrap();
        let pnr = pnr_pa(&pnr_run.tallies, &source, &bs).unwrap();
        le_ok &= thr.pa.key_length <= pnr.key_length + 1e-9;
    }

    report(
        11,
        violations == 0 && le_ok,
        &format!("50 seeded runs at mu=0.3: {violations} tag-bound violations; threshold key <= PNR key"),
    );
}
