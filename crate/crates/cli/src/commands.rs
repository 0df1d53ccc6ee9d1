//! Implementations of the four subcommands. Every command renders to CSV or
//! JSON and returns its process exit code: 0 for success, 1 when a
//! verification suite fails its threshold.

use anyhow::{bail, Result};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Map, Value};

use dpskit::bounds::{
    big_lambda_110, lambda_fn, lambda_lower_bound, monotone_witnesses, optimize_mu, pnr_pa,
    tag_bound, threshold_pa, verify_lambda_monotone, MonotoneGrid, MuSearch, SourceModel,
};
use dpskit::fock_sim::{derive_povm_via_fock, verify_commutation, FockBasis, FockState};
use dpskit::linalg::CMatrix;
use dpskit::operators::{
    e_bit_operator, e_bit_slot_operator, e_ph_operator, m_12, m_23, operator_leq,
    pi_minus_detection, povm_detection, u_ab, weight_projector, Detector, HermitianOperator,
    TimeSlot, JOINT_DIM,
};
use dpskit::protocol_sim::{run_protocol, Backend};
use dpskit::C64;

use crate::config::{FockCheckConfig, KeyrateCurveConfig, SimulateConfig, VerifyConfig};
use crate::output::{fmt_float, json_number, OutFormat};

pub struct CommandOutput {
    pub exit_code: i32,
    pub text: String,
}

fn wrap_json(params: Value, results: Value) -> String {
    let doc = json!({
        "params": params,
        "results": results,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
    text.push('\n');
    text
}

// ---------------------------------------------------------------- keyrate

pub fn cmd_keyrate_curve(cfg: &KeyrateCurveConfig, format: OutFormat) -> Result<CommandOutput> {
    if cfg.eta_points < 2 {
        bail!("eta_points must be at least 2");
    }
    if !(cfg.eta_min > 0.0 && cfg.eta_min < cfg.eta_max && cfg.eta_max <= 1.0) {
        bail!("eta grid must satisfy 0 < eta_min < eta_max <= 1");
    }
    if cfg.deltas.is_empty() {
        bail!("need at least one half-width");
    }
    for &d in &cfg.deltas {
        if !(0.0..0.5).contains(&d) {
            bail!("half-widths must lie in [0, 0.5), got {d}");
        }
    }
    if !(0.0..=1.0).contains(&cfg.e_bit) {
        bail!("e_bit must lie in [0, 1]");
    }

    let search = MuSearch::default();
    let log_lo = cfg.eta_min.ln();
    let log_hi = cfg.eta_max.ln();
    let mut rows = Vec::with_capacity(cfg.eta_points);
    for i in 0..cfg.eta_points {
        let eta = (log_lo + (log_hi - log_lo) * i as f64 / (cfg.eta_points - 1) as f64).exp();
        let points: Vec<_> = cfg
            .deltas
            .iter()
            .map(|&d| optimize_mu(eta, cfg.e_bit, d, &search))
            .collect::<dpskit::Result<_>>()?;
        rows.push((eta, points));
    }

    let text = match format {
        OutFormat::Csv => {
            let mut header = vec!["eta".to_string()];
            for &d in &cfg.deltas {
                header.push(format!("mu_star[{d}]"));
                header.push(format!("e_ph_u[{d}]"));
                header.push(format!("rate[{d}]"));
            }
            for &d in &cfg.deltas[1..] {
                header.push(format!("ratio[{d}]"));
            }
            let mut out = header.join(",");
            out.push('\n');
            for (eta, points) in &rows {
                let mut fields = vec![fmt_float(*eta)];
                for p in points {
                    fields.push(fmt_float(p.mu_star));
                    fields.push(fmt_float(p.e_ph_u));
                    fields.push(fmt_float(p.rate));
                }
                let base = points[0].rate;
                for p in &points[1..] {
                    fields.push(fmt_float(if base > 0.0 { p.rate / base } else { 0.0 }));
                }
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out
        }
        OutFormat::Json => {
            let rows_json: Vec<Value> = rows
                .iter()
                .map(|(eta, points)| {
                    let base = points[0].rate;
                    json!({
                        "eta": eta,
                        "points": cfg.deltas.iter().zip(points).map(|(&d, p)| json!({
                            "delta": d,
                            "mu_star": json_number(p.mu_star),
                            "e_ph_u": json_number(p.e_ph_u),
                            "rate": json_number(p.rate),
                        })).collect::<Vec<_>>(),
                        "ratios": points[1..].iter().map(|p| {
                            json_number(if base > 0.0 { p.rate / base } else { 0.0 })
                        }).collect::<Vec<_>>(),
                    })
                })
                .collect();
            wrap_json(
                serde_json::to_value(cfg)?,
                json!({ "rows": rows_json }),
            )
        }
    };
    Ok(CommandOutput { exit_code: 0, text })
}

// ----------------------------------------------------------------- verify

struct Suite {
    name: &'static str,
    pass: bool,
    /// Worst measured witness for the suite (sign convention per suite).
    witness: f64,
    threshold: f64,
    detail: String,
}

pub fn cmd_verify(cfg: &VerifyConfig, format: OutFormat) -> Result<CommandOutput> {
    let suites = vec![
        suite_lemma1(cfg)?,
        suite_lemma2(cfg)?,
        suite_lambda_root()?,
        suite_monotonicity(cfg)?,
        suite_uab_identities()?,
    ];

    let all_pass = suites.iter().all(|s| s.pass);
    let text = match format {
        OutFormat::Csv => {
            let mut out = String::from("suite,pass,witness,threshold,detail\n");
            for s in &suites {
                out.push_str(&format!(
                    "{},{},{},{},\"{}\"\n",
                    s.name,
                    s.pass,
                    fmt_float(s.witness),
                    fmt_float(s.threshold),
                    s.detail
                ));
            }
            out
        }
        OutFormat::Json => wrap_json(
            serde_json::to_value(cfg)?,
            json!({
                "pass": all_pass,
                "suites": suites.iter().map(|s| json!({
                    "name": s.name,
                    "pass": s.pass,
                    "witness": json_number(s.witness),
                    "threshold": s.threshold,
                    "detail": s.detail,
                })).collect::<Vec<_>>(),
            }),
        ),
    };
    Ok(CommandOutput {
        exit_code: if all_pass { 0 } else { 1 },
        text,
    })
}

/// Weight-1 operator inequality on a transmittance grid per half-width.
fn suite_lemma1(cfg: &VerifyConfig) -> Result<Suite> {
    if cfg.lemma1_grid < 1 {
        bail!("lemma1_grid must be positive");
    }
    let p1 = weight_projector::<f64>(1)?.lift_to_joint();
    let mut worst = f64::INFINITY;
    for &delta in &cfg.deltas {
        let lam = lambda_fn(0.5 + delta, 0.5 + delta)? * cfg.lemma1_lambda_scale;
        let n = cfg.lemma1_grid;
        for i in 0..n {
            for j in 0..n {
                let frac = |k: usize| {
                    if n == 1 {
                        0.5
                    } else {
                        k as f64 / (n - 1) as f64
                    }
                };
                let e1 = 0.5 - delta + 2.0 * delta * frac(i);
                let e2 = 0.5 - delta + 2.0 * delta * frac(j);
                let e_ph = e_ph_operator(e1)?;
                let e_bit = e_bit_operator(e1, e2)?;
                let lhs = p1.matrix().matmul(e_ph.matrix()).matmul(p1.matrix());
                let rhs = p1
                    .matrix()
                    .matmul(e_bit.matrix())
                    .matmul(p1.matrix())
                    .add(&CMatrix::identity(JOINT_DIM).scaled(2.0 * delta))
                    .scaled(lam);
                let cert = operator_leq(
                    &HermitianOperator::try_new(lhs)?,
                    &HermitianOperator::try_new(rhs)?,
                    1e-10,
                )?;
                worst = worst.min(cert.witness);
            }
        }
    }
    Ok(Suite {
        name: "lemma1-psd",
        pass: worst >= -1e-10,
        witness: worst,
        threshold: -1e-10,
        detail: format!(
            "min eigenvalue of the comparison gap over {0}x{0} grids at widths {1:?}",
            cfg.lemma1_grid, cfg.deltas
        ),
    })
}

/// Norm bound on the cross-term Gram block plus its closed-form identity.
fn suite_lemma2(cfg: &VerifyConfig) -> Result<Suite> {
    if cfg.mb_grid < 2 {
        bail!("mb_grid must be at least 2");
    }
    let mut worst_eig = f64::NEG_INFINITY;
    let mut worst_identity = 0.0f64;
    let n = cfg.mb_grid;
    for i in 0..n {
        for j in 0..n {
            let e1 = 0.01 + 0.98 * i as f64 / (n - 1) as f64;
            let e2 = 0.01 + 0.98 * j as f64 / (n - 1) as f64;
            worst_eig = worst_eig.max(dpskit::operators::m_b_matrix(e1, e2)?.max_eigenvalue());
            let (a, b) = dpskit::operators::m_b_scalars(e1, e2)?;
            let residual = (a * a - b - 4.0 * e1 * e2 * (1.0 - e1) * (1.0 - e2)).abs();
            worst_identity = worst_identity.max(residual);
        }
    }
    Ok(Suite {
        name: "lemma2-norm",
        pass: worst_eig <= 1.0 + 1e-12 && worst_identity <= 1e-12,
        witness: worst_eig,
        threshold: 1.0 + 1e-12,
        detail: format!(
            "max eigenvalue over {n}x{n} grid; scalar identity residual {worst_identity:.2e} <= 1e-12"
        ),
    })
}

/// The amplification coefficient is the zero of the weight-110 eigenvalue.
fn suite_lambda_root() -> Result<Suite> {
    let mut worst = 0.0f64;
    let mut ordering = true;
    for &eta in &[0.5f64, 0.505, 0.51, 0.6] {
        let lam = lambda_fn(eta, eta)?;
        worst = worst.max(big_lambda_110(eta, eta, lam)?.abs());
        ordering &= lam > lambda_lower_bound(eta, eta)?;
    }
    Ok(Suite {
        name: "lambda-root",
        pass: worst <= 1e-10 && ordering,
        witness: worst,
        threshold: 1e-10,
        detail: "Lambda_110(etaU, etaU, lambda) = 0 and lambda above its lower bound".into(),
    })
}

/// Finite-difference monotonicity of the weight-110 eigenvalue plus the
/// sign-exclusion of its derivative case analysis.
fn suite_monotonicity(cfg: &VerifyConfig) -> Result<Suite> {
    let mut worst = f64::INFINITY;
    let mut pass = true;
    for &lam in &cfg.mono_lambdas {
        let grid = MonotoneGrid {
            eta_lo: cfg.mono_eta_lo,
            eta_hi: cfg.mono_eta_hi,
            points: cfg.mono_points,
            lambda: lam,
        };
        let rep = verify_lambda_monotone(&grid)?;
        pass &= rep.pass;
        worst = worst.min(rep.min_diff_eta1.min(rep.min_diff_eta2));
    }
    let mut exclusion = true;
    for i in 0..50 {
        for j in 0..50 {
            for k in 1..=20 {
                let e1 = 0.02 + 0.96 * i as f64 / 49.0;
                let e2 = 0.02 + 0.96 * j as f64 / 49.0;
                let lam = 1.0 + 9.0 * k as f64 / 20.0;
                let w = monotone_witnesses(e1, e2, lam)?;
                exclusion &= !(w.a <= 0.0 && w.b <= 0.0);
            }
        }
    }
    Ok(Suite {
        name: "monotonicity",
        pass: pass && exclusion,
        witness: worst,
        threshold: -1e-8,
        detail: format!(
            "{0}x{0} central differences at lambdas {1:?}; sign exclusion {2}",
            cfg.mono_points, cfg.mono_lambdas, exclusion
        ),
    })
}

/// Conjugation identities of the dephasing unitary and the POVM commutators.
fn suite_uab_identities() -> Result<Suite> {
    let u = u_ab::<f64>();
    let conj = |m: &CMatrix<f64>| u.matmul(m).matmul(&u.conjugate_transpose());
    let mut worst = u.unitarity_defect();
    let mut pass = worst <= 1e-14;

    for &(e1, e2) in &[(0.43f64, 0.58), (0.5, 0.5), (0.495, 0.505)] {
        let e_ph = e_ph_operator(e1)?;
        let dev = conj(e_ph.matrix()).max_abs_diff(e_ph.matrix());
        pass &= dev <= 1e-14;
        worst = worst.max(dev);

        for a in 0..=3u8 {
            let p = weight_projector::<f64>(a)?.lift_to_joint();
            let dev = e_ph.matrix().commutator(p.matrix()).max_abs_entry();
            pass &= dev <= 1e-14;
            worst = worst.max(dev);
        }

        let e_bit = e_bit_operator(e1, e2)?;
        let p02 = weight_projector::<f64>(0)?
            .matrix()
            .add(weight_projector::<f64>(2)?.matrix())
            .kron(&CMatrix::identity(3));
        let dev = e_bit.matrix().commutator(&p02).max_abs_entry();
        pass &= dev <= 1e-14;
        worst = worst.max(dev);

        // Conjugated slot operators against their minus-projector form.
        let h = 0.5f64.sqrt();
        let ket = |s: u8| vec![C64::new(h, 0.0), C64::new(if s == 0 { h } else { -h }, 0.0)];
        let id2 = CMatrix::identity(2);
        let id8 = CMatrix::identity(8);
        for slot in [TimeSlot::Ts1, TimeSlot::Ts2] {
            let pair = |sa: u8, sb: u8| {
                let pa = CMatrix::projector(&ket(sa));
                let pb = CMatrix::projector(&ket(sb));
                match slot {
                    TimeSlot::Ts1 => pa.kron(&pb).kron(&id2),
                    TimeSlot::Ts2 => id2.kron(&pa).kron(&pb),
                }
            };
            let brackets = pair(0, 0).add(&pair(1, 1));
            let remainder = match slot {
                TimeSlot::Ts1 => m_12(e1, e2)?,
                TimeSlot::Ts2 => m_23(e1, e2)?,
            };
            let lhs = conj(e_bit_slot_operator(slot, e1, e2)?.matrix());
            let rhs = id8
                .kron(pi_minus_detection(slot, e1, e2)?.matrix())
                .add(&brackets.kron(remainder.matrix()));
            let dev = lhs.max_abs_diff(&rhs);
            pass &= dev <= 1e-13;
            worst = worst.max(dev);
        }
    }
    Ok(Suite {
        name: "uab-identities",
        pass,
        witness: worst,
        threshold: 1e-13,
        detail: "unitarity, phase-POVM invariance, weight commutators, conjugated slot decomposition"
            .into(),
    })
}

// -------------------------------------------------------------- fock-check

pub fn cmd_fock_check(cfg: &FockCheckConfig, format: OutFormat) -> Result<CommandOutput> {
    if cfg.n_max > 6 {
        bail!("n_max must be at most 6");
    }
    if cfg.n_max == 0 {
        bail!("n_max must be positive");
    }

    // Unit-efficiency fast path: the circuits coincide architecturally.
    let probe = FockState::<f64>::single_photon(2, cfg.n_max.max(1), 0)?;
    let unit_eff = verify_commutation(&probe, 0.71, 1.0 - 1e-15, cfg.n_max)?;

    let mut rng = SmallRng::seed_from_u64(cfg.seed);
    let basis = FockBasis::new(2, cfg.n_max);
    let mut commutation_max = 0.0f64;
    for _ in 0..cfg.random_states {
        let amps: Vec<C64> = (0..basis.len())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let state = FockState::from_amplitudes(basis.clone(), amps)?.normalized()?;
        let eta = rng.random_range(0.05..0.95);
        let eta_det = rng.random_range(0.05..0.95);
        commutation_max = commutation_max.max(verify_commutation(&state, eta, eta_det, cfg.n_max)?);
    }

    let mut povm_errors = Map::new();
    let mut povm_max = 0.0f64;
    for (slot, slot_name) in [(TimeSlot::Ts1, "ts1"), (TimeSlot::Ts2, "ts2")] {
        for (det, det_name) in [(Detector::D0, "d0"), (Detector::D1, "d1")] {
            let mut worst = 0.0f64;
            let n = cfg.povm_grid.max(2);
            for i in 0..n {
                for j in 0..n {
                    let e1 = 0.1 + 0.8 * i as f64 / (n - 1) as f64;
                    let e2 = 0.1 + 0.8 * j as f64 / (n - 1) as f64;
                    let via_fock = derive_povm_via_fock(slot, det, e1, e2)?;
                    let closed = povm_detection(slot, det, e1, e2)?;
                    worst = worst.max(via_fock.matrix().max_abs_diff(closed.matrix()));
                }
            }
            povm_errors.insert(format!("{slot_name}_{det_name}"), json_number(worst));
            povm_max = povm_max.max(worst);
        }
    }

    let pass = commutation_max <= 1e-10 && povm_max <= 1e-12 && unit_eff <= 1e-14;
    let text = match format {
        OutFormat::Csv => {
            let mut out = String::from("metric,value,threshold,pass\n");
            out.push_str(&format!(
                "commutation_unit_efficiency,{},{},{}\n",
                fmt_float(unit_eff),
                fmt_float(1e-14),
                unit_eff <= 1e-14
            ));
            out.push_str(&format!(
                "commutation_max_trace_distance,{},{},{}\n",
                fmt_float(commutation_max),
                fmt_float(1e-10),
                commutation_max <= 1e-10
            ));
            out.push_str(&format!(
                "povm_max_entry_error,{},{},{}\n",
                fmt_float(povm_max),
                fmt_float(1e-12),
                povm_max <= 1e-12
            ));
            out
        }
        OutFormat::Json => wrap_json(
            serde_json::to_value(cfg)?,
            json!({
                "pass": pass,
                "commutation_unit_efficiency": json_number(unit_eff),
                "commutation_max_trace_distance": json_number(commutation_max),
                "commutation_threshold": 1e-10,
                "povm_max_entry_error": json_number(povm_max),
                "povm_errors": Value::Object(povm_errors),
                "povm_threshold": 1e-12,
            }),
        ),
    };
    Ok(CommandOutput {
        exit_code: if pass { 0 } else { 1 },
        text,
    })
}

// ---------------------------------------------------------------- simulate

pub fn cmd_simulate(cfg: &SimulateConfig, format: OutFormat) -> Result<CommandOutput> {
    let params = cfg.to_params()?;
    let run = run_protocol(&params)?;
    let tallies = run.tallies;
    let source = SourceModel::coherent(cfg.mu)?;

    let q_hat = tallies.n_det as f64 / tallies.n_em as f64;
    let e_bit = if tallies.n_sample > 0 {
        Some(tallies.n_bit as f64 / tallies.n_sample as f64)
    } else {
        None
    };
    let eta_overall = cfg.channel_eta * cfg.eta_det;
    let q_model = 2.0 * eta_overall * cfg.mu * (-2.0 * eta_overall * cfg.mu).exp();

    let bs = params.bs;
    let (e_ph_u, n_pa, key_length, tag_bound_value) = match params.backend {
        Backend::Pnr => {
            if tallies.n_det == 0 || tallies.n_sample == 0 {
                (None, 0.0, 0.0, None)
            } else {
                let pa = pnr_pa(&tallies, &source, &bs)?;
                (Some(pa.e_ph_u), pa.n_pa, pa.key_length, None)
            }
        }
        Backend::Threshold => {
            let d = bs.threshold_half_width()?;
            let bound = tag_bound(tallies.n_multi, d, d)?;
            if tallies.n_sample == 0 {
                (None, 0.0, 0.0, Some(bound))
            } else {
                let pa = threshold_pa(&tallies, &source, &bs, cfg.t_prob)?;
                (Some(pa.entropy_arg), pa.n_pa, pa.key_length, Some(bound))
            }
        }
    };

    let results = json!({
        "tallies": {
            "n_em": tallies.n_em,
            "n_det": tallies.n_det,
            "n_code": tallies.n_code,
            "n_sample": tallies.n_sample,
            "n_bit": tallies.n_bit,
            "n_multi": tallies.n_multi,
        },
        "q": json_number(q_hat),
        "q_model": json_number(q_model),
        "q_model_residual": json_number(q_hat - q_model),
        "e_bit": e_bit.map(json_number).unwrap_or(Value::Null),
        "e_ph_u": e_ph_u.map(json_number).unwrap_or(Value::Null),
        "n_pa": json_number(n_pa),
        "key_length": json_number(key_length),
        "hidden": {
            "n_tag": run.hidden.n_tag,
            "tag_bound": tag_bound_value.map(json_number).unwrap_or(Value::Null),
            "signal_photons": run.hidden.signal_photons,
            "dark_blocks": run.hidden.dark_blocks,
            "unexplained_multi": run.hidden.unexplained_multi,
        },
    });

    let text = match format {
        OutFormat::Json => wrap_json(serde_json::to_value(cfg)?, results),
        OutFormat::Csv => {
            let mut out = String::from("key,value\n");
            let flat = [
                ("n_em", tallies.n_em as f64),
                ("n_det", tallies.n_det as f64),
                ("n_code", tallies.n_code as f64),
                ("n_sample", tallies.n_sample as f64),
                ("n_bit", tallies.n_bit as f64),
                ("n_multi", tallies.n_multi as f64),
                ("q", q_hat),
                ("q_model", q_model),
                ("q_model_residual", q_hat - q_model),
                ("e_bit", e_bit.unwrap_or(f64::NAN)),
                ("e_ph_u", e_ph_u.unwrap_or(f64::NAN)),
                ("n_pa", n_pa),
                ("key_length", key_length),
                ("hidden_n_tag", run.hidden.n_tag as f64),
                ("hidden_tag_bound", tag_bound_value.unwrap_or(f64::NAN)),
            ];
            for (k, v) in flat {
                out.push_str(&format!("{k},{}\n", fmt_float(v)));
            }
            out.push_str(&format!("seed,{}\n", cfg.seed));
            out
        }
    };
    Ok(CommandOutput { exit_code: 0, text })
}
