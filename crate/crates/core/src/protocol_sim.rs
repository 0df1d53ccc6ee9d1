//! Monte-Carlo simulator of the full protocol.
//!
//! Coherent three-pulse blocks propagate in closed form through the lossy
//! channel and the interferometer: passive linear optics maps coherent
//! inputs to product coherent outputs, so every slot-port receives an
//! independent Poisson photon count with mean given by its squared
//! amplitude. Detector loss rides on the channel transmission (the loss
//! splitters commute with the interferometer), and dark counts enter as
//! Bernoulli stray photons on the monitored slot-ports.
//!
//! Blocks draw from per-block ChaCha streams derived from `(seed, index)`,
//! so runs are reproducible bit-for-bit and parallel execution matches the
//! serial order exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::bounds::{threshold_pa, PaResult, SourceModel, Tallies};
use crate::error::{Error, Result};
use crate::operators::{BsConfig, TimeSlot};

/// Detector backend: photon-number-resolving pair, or four threshold
/// detectors behind extra splitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Pnr,
    Threshold,
}

/// Full parameter set for one protocol run.
///
/// `bs` holds the transmittances the simulated hardware actually has; they
/// may sit outside the assumed ranges for miscalibration experiments.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolParams {
    pub n_em: u64,
    pub mu: f64,
    pub channel_eta: f64,
    pub eta_det: f64,
    pub dark_prob: f64,
    pub bs: BsConfig<f64>,
    pub t_prob: f64,
    pub backend: Backend,
    pub seed: u64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_em == 0 {
            return Err(Error::InvalidParam("n_em must be at least 1".into()));
        }
        if self.mu < 0.0 {
            return Err(Error::InvalidParam("mu must be nonnegative".into()));
        }
        if !(self.channel_eta > 0.0 && self.channel_eta <= 1.0) {
            return Err(Error::InvalidParam("channel_eta must lie in (0, 1]".into()));
        }
        if !(self.eta_det > 0.0 && self.eta_det <= 1.0) {
            return Err(Error::InvalidParam("eta_det must lie in (0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.dark_prob) {
            return Err(Error::InvalidParam("dark_prob must lie in [0, 1)".into()));
        }
        if !(self.t_prob > 0.0 && self.t_prob < 1.0) {
            return Err(Error::InvalidParam("t_prob must lie in (0, 1)".into()));
        }
        if self.backend == Backend::Threshold
            && (self.bs.eta3.is_none() || self.bs.eta4.is_none())
        {
            return Err(Error::InvalidParam(
                "threshold backend needs eta3/eta4 splitters".into(),
            ));
        }
        Ok(())
    }
}

/// Coherent amplitudes leaving the interferometer for one encoded block.
///
/// `ts1`/`ts2` are the two monitored time slots, index 0 for the bit-0 port
/// and 1 for the bit-1 port. The two side slots (first lower-arm pulse,
/// third upper-arm pulse) never interfere and are ignored by the detection
/// rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotAmplitudes {
    pub ts1: [f64; 2],
    pub ts2: [f64; 2],
    pub side_early: f64,
    pub side_late: f64,
}

impl SlotAmplitudes {
    /// Mean photon number summed over all six slot-ports.
    pub fn total_mean_photons(&self) -> f64 {
        self.ts1[0] * self.ts1[0]
            + self.ts1[1] * self.ts1[1]
            + self.ts2[0] * self.ts2[0]
            + self.ts2[1] * self.ts2[1]
            + self.side_early * self.side_early
            + self.side_late * self.side_late
    }

    fn monitored_means(&self) -> [f64; 4] {
        [
            self.ts1[0] * self.ts1[0],
            self.ts1[1] * self.ts1[1],
            self.ts2[0] * self.ts2[0],
            self.ts2[1] * self.ts2[1],
        ]
    }
}

/// Propagates one phase-encoded block through the interferometer.
///
/// Bit `b` encodes the pulse amplitude `(-1)^b sqrt(mu)`; the overall
/// transmission `channel_eta * eta_det` scales every amplitude. The first
/// splitter sends the fraction `eta1` into the lower arm; at the second
/// splitter the lower-arm pulse interferes with the delayed upper-arm
/// predecessor.
pub fn slot_amplitudes(
    bits: [bool; 3],
    mu: f64,
    channel_eta: f64,
    eta_det: f64,
    bs: &BsConfig<f64>,
) -> SlotAmplitudes {
    let scale = (mu * channel_eta * eta_det).sqrt();
    let alpha: Vec<f64> = bits
        .iter()
        .map(|&b| if b { -scale } else { scale })
        .collect();
    let lower: Vec<f64> = alpha.iter().map(|a| bs.eta1.sqrt() * a).collect();
    let upper: Vec<f64> = alpha.iter().map(|a| (1.0 - bs.eta1).sqrt() * a).collect();
    let (t2, r2) = (bs.eta2.sqrt(), (1.0 - bs.eta2).sqrt());
    SlotAmplitudes {
        ts1: [
            t2 * lower[1] + r2 * upper[0],
            -r2 * lower[1] + t2 * upper[0],
        ],
        ts2: [
            t2 * lower[2] + r2 * upper[1],
            -r2 * lower[2] + t2 * upper[1],
        ],
        side_early: lower[0],
        side_late: upper[2],
    }
}

/// Classification of one received block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialKind {
    NoClick,
    Detection,
    MultiClick,
}

/// Outcome of a single block on Bob's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub kind: TrialKind,
    /// Slot of the detection; present iff `kind == Detection`.
    pub slot: Option<TimeSlot>,
    /// Raw key bit of the detection; present iff `kind == Detection`.
    pub bit: Option<bool>,
    /// True photon count across the monitored slots, dark counts excluded.
    pub hidden_n_ts12: u32,
}

/// Ground-truth counters that the real protocol cannot observe.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HiddenStats {
    /// Blocks whose monitored slots carried two or more photons.
    pub n_tag: u64,
    /// Signal photons over all six slot-ports, summed over blocks.
    pub signal_photons: u64,
    /// Blocks in which at least one dark count fired.
    pub dark_blocks: u64,
    /// Multi-click blocks with fewer than two signal photons and no dark
    /// count; always zero, kept as an explicit soundness counter.
    pub unexplained_multi: u64,
}

/// Aggregated result of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub tallies: Tallies,
    pub kappa_a: Vec<bool>,
    pub kappa_b: Vec<bool>,
    pub sample_a: Vec<bool>,
    pub sample_b: Vec<bool>,
    pub hidden: HiddenStats,
}

/// Threshold-backend run with the privacy-amplification result attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRun {
    pub run: ProtocolRun,
    pub pa: PaResult<f64>,
}

struct BlockTables {
    /// Poisson samplers per bit pattern and slot-port (four monitored ports
    /// then the two side slots); `None` marks an exactly dark port.
    poisson: [[Option<Poisson<f64>>; 6]; 8],
}

impl BlockTables {
    fn new(params: &ProtocolParams) -> Self {
        let mut poisson: [[Option<Poisson<f64>>; 6]; 8] = Default::default();
        for pattern in 0..8u8 {
            let bits = [
                pattern & 4 != 0,
                pattern & 2 != 0,
                pattern & 1 != 0,
            ];
            let a = slot_amplitudes(bits, params.mu, params.channel_eta, params.eta_det, &params.bs);
            let means = [
                a.ts1[0] * a.ts1[0],
                a.ts1[1] * a.ts1[1],
                a.ts2[0] * a.ts2[0],
                a.ts2[1] * a.ts2[1],
                a.side_early * a.side_early,
                a.side_late * a.side_late,
            ];
            for (slot, &mean) in means.iter().enumerate() {
                if mean > 1e-300 {
                    poisson[pattern as usize][slot] =
                        Some(Poisson::new(mean).expect("positive mean"));
                }
            }
        }
        BlockTables { poisson }
    }
}

struct BlockRecord {
    outcome: TrialOutcome,
    alice_bit: bool,
    is_code: bool,
    signal_photons: u32,
    dark_present: bool,
}

fn simulate_block(params: &ProtocolParams, tables: &BlockTables, index: u64) -> BlockRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index);

    let b1 = rng.random_bool(0.5);
    let b2 = rng.random_bool(0.5);
    let b3 = rng.random_bool(0.5);
    let pattern = ((b1 as usize) << 2) | ((b2 as usize) << 1) | b3 as usize;

    // Signal photons per slot-port: [TS1 D0, TS1 D1, TS2 D0, TS2 D1, sides].
    let mut counts = [0u32; 6];
    for (slot, dist) in tables.poisson[pattern].iter().enumerate() {
        if let Some(p) = dist {
            counts[slot] = p.sample(&mut rng) as u32;
        }
    }
    let signal_photons: u32 = counts.iter().sum();
    let hidden_n_ts12: u32 = counts[..4].iter().sum();

    let mut dark_present = false;
    let mut monitored = [counts[0], counts[1], counts[2], counts[3]];
    if params.dark_prob > 0.0 {
        for port in &mut monitored {
            if rng.random_bool(params.dark_prob) {
                *port += 1;
                dark_present = true;
            }
        }
    }

    let classified = match params.backend {
        Backend::Pnr => classify_pnr(&monitored),
        Backend::Threshold => classify_threshold(
            &mut rng,
            &monitored,
            params.bs.eta3.expect("validated"),
            params.bs.eta4.expect("validated"),
        ),
    };

    let (kind, slot, bit) = classified;
    let mut alice_bit = false;
    let mut is_code = false;
    if kind == TrialKind::Detection {
        alice_bit = match slot.expect("detection has a slot") {
            TimeSlot::Ts1 => b1 != b2,
            TimeSlot::Ts2 => b2 != b3,
        };
        is_code = rng.random_bool(params.t_prob);
    }

    BlockRecord {
        outcome: TrialOutcome {
            kind,
            slot,
            bit,
            hidden_n_ts12,
        },
        alice_bit,
        is_code,
        signal_photons,
        dark_present,
    }
}

/// PNR rule: exactly one photon over the monitored slot-ports.
fn classify_pnr(monitored: &[u32; 4]) -> (TrialKind, Option<TimeSlot>, Option<bool>) {
    let total: u32 = monitored.iter().sum();
    match total {
        0 => (TrialKind::NoClick, None, None),
        1 => {
            let port = monitored.iter().position(|&n| n == 1).expect("one photon");
            let slot = if port < 2 { TimeSlot::Ts1 } else { TimeSlot::Ts2 };
            (TrialKind::Detection, Some(slot), Some(port % 2 == 1))
        }
        _ => (TrialKind::MultiClick, None, None),
    }
}

/// Threshold rule: the photons of each output port split over a detector
/// pair; a detection is exactly one clicking detector across both slots.
fn classify_threshold(
    rng: &mut ChaCha8Rng,
    monitored: &[u32; 4],
    eta3: f64,
    eta4: f64,
) -> (TrialKind, Option<TimeSlot>, Option<bool>) {
    let mut clicks = 0u32;
    let mut last: Option<(TimeSlot, bool)> = None;
    for (port, &n) in monitored.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let bit = port % 2 == 1;
        let slot = if port < 2 { TimeSlot::Ts1 } else { TimeSlot::Ts2 };
        let eta = if bit { eta4 } else { eta3 };
        let first = Binomial::new(n as u64, eta)
            .expect("valid splitter probability")
            .sample(rng);
        let second = n as u64 - first;
        for clicked in [first > 0, second > 0] {
            if clicked {
                clicks += 1;
                last = Some((slot, bit));
            }
        }
    }
    match clicks {
        0 => (TrialKind::NoClick, None, None),
        1 => {
            let (slot, bit) = last.expect("one click recorded");
            (TrialKind::Detection, Some(slot), Some(bit))
        }
        _ => (TrialKind::MultiClick, None, None),
    }
}

#[derive(Default)]
struct ChunkAcc {
    n_det: u64,
    n_code: u64,
    n_sample: u64,
    n_bit: u64,
    n_multi: u64,
    kappa_a: Vec<bool>,
    kappa_b: Vec<bool>,
    sample_a: Vec<bool>,
    sample_b: Vec<bool>,
    hidden: HiddenStats,
}

impl ChunkAcc {
    fn push(&mut self, rec: BlockRecord) {
        self.hidden.signal_photons += rec.signal_photons as u64;
        if rec.outcome.hidden_n_ts12 >= 2 {
            self.hidden.n_tag += 1;
        }
        if rec.dark_present {
            self.hidden.dark_blocks += 1;
        }
        match rec.outcome.kind {
            TrialKind::NoClick => {}
            TrialKind::MultiClick => {
                self.n_multi += 1;
                if rec.outcome.hidden_n_ts12 < 2 && !rec.dark_present {
                    self.hidden.unexplained_multi += 1;
                }
            }
            TrialKind::Detection => {
                self.n_det += 1;
                let bob_bit = rec.outcome.bit.expect("detection has a bit");
                if rec.is_code {
                    self.n_code += 1;
                    self.kappa_a.push(rec.alice_bit);
                    self.kappa_b.push(bob_bit);
                } else {
                    self.n_sample += 1;
                    self.sample_a.push(rec.alice_bit);
                    self.sample_b.push(bob_bit);
                    if rec.alice_bit != bob_bit {
                        self.n_bit += 1;
                    }
                }
            }
        }
    }

    fn merge(mut self, other: ChunkAcc) -> ChunkAcc {
        self.n_det += other.n_det;
        self.n_code += other.n_code;
        self.n_sample += other.n_sample;
        self.n_bit += other.n_bit;
        self.n_multi += other.n_multi;
        self.kappa_a.extend(other.kappa_a);
        self.kappa_b.extend(other.kappa_b);
        self.sample_a.extend(other.sample_a);
        self.sample_b.extend(other.sample_b);
        self.hidden.n_tag += other.hidden.n_tag;
        self.hidden.signal_photons += other.hidden.signal_photons;
        self.hidden.dark_blocks += other.hidden.dark_blocks;
        self.hidden.unexplained_multi += other.hidden.unexplained_multi;
        self
    }
}

const CHUNK: u64 = 1 << 15;

/// Runs the protocol and aggregates tallies, sifted keys and sample bits.
pub fn run_protocol(params: &ProtocolParams) -> Result<ProtocolRun> {
    params.validate()?;
    let tables = BlockTables::new(params);

    let starts: Vec<u64> = (0..params.n_em).step_by(CHUNK as usize).collect();
    let acc = starts
        .into_par_iter()
        .map(|start| {
            let end = (start + CHUNK).min(params.n_em);
            let mut acc = ChunkAcc::default();
            for index in start..end {
                acc.push(simulate_block(params, &tables, index));
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(ChunkAcc::default(), ChunkAcc::merge);

    Ok(ProtocolRun {
        tallies: Tallies {
            n_em: params.n_em,
            n_det: acc.n_det,
            n_code: acc.n_code,
            n_sample: acc.n_sample,
            n_bit: acc.n_bit,
            n_multi: acc.n_multi,
        },
        kappa_a: acc.kappa_a,
        kappa_b: acc.kappa_b,
        sample_a: acc.sample_a,
        sample_b: acc.sample_b,
        hidden: acc.hidden,
    })
}

/// Runs the threshold-detector protocol and evaluates its key length.
pub fn run_threshold_protocol(params: &ProtocolParams) -> Result<ThresholdRun> {
    if params.backend != Backend::Threshold {
        return Err(Error::InvalidParam(
            "run_threshold_protocol requires the threshold backend".into(),
        ));
    }
    let run = run_protocol(params)?;
    let source = SourceModel::coherent(params.mu)?;
    let pa = threshold_pa(&run.tallies, &source, &params.bs, params.t_prob)?;
    Ok(ThresholdRun { run, pa })
}

/// Analytic bit-error rate of the single-photon detection model, used as a
/// Monte-Carlo oracle: average over the eight bit patterns of the
/// probability that the one detected photon exits through the wrong port.
pub fn analytic_e_bit(mu: f64, channel_eta: f64, eta_det: f64, bs: &BsConfig<f64>) -> f64 {
    let mut wrong = 0.0;
    let mut detect = 0.0;
    for pattern in 0..8u8 {
        let bits = [pattern & 4 != 0, pattern & 2 != 0, pattern & 1 != 0];
        let a = slot_amplitudes(bits, mu, channel_eta, eta_det, bs);
        let means = a.monitored_means();
        let total: f64 = means.iter().sum();
        let p_vac_rest = (-total).exp();
        for (port, &mean) in means.iter().enumerate() {
            // Exactly one photon across the monitored ports, sitting here.
            let p = mean * p_vac_rest;
            let bob_bit = port % 2 == 1;
            let alice_bit = if port < 2 { bits[0] != bits[1] } else { bits[1] != bits[2] };
            detect += p;
            if bob_bit != alice_bit {
                wrong += p;
            }
        }
    }
    if detect > 0.0 {
        wrong / detect
    } else {
        0.0
    }
}
