//! Scalar security-bound engine.
//!
//! Implements the amplification coefficient `lambda`, the largest eigenvalue
//! `Lambda_110` of the weight-2 comparison matrix, the phase-error upper
//! bound and key-rate formula, Poisson source tails, the Azuma deviation
//! term, the mean-photon-number optimizer for the key-rate curve, and the
//! threshold-detector privacy-amplification bounds.

use crate::error::{Error, Result};
use crate::operators::BsConfig;
use crate::scalar::{from_count, r, Real};

/// Per-pulse source description with multiphoton tail bounds.
///
/// `q_n` upper-bounds the probability that one three-pulse block carries
/// `n` or more photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel<T> {
    pub mu: T,
    pub q1: T,
    pub q2: T,
    pub q3: T,
}

impl<T: Real> SourceModel<T> {
    /// Coherent-source model: `q_n` is the Poisson(3 mu) tail at `n`.
    pub fn coherent(mu: T) -> Result<Self> {
        Ok(SourceModel {
            mu,
            q1: poisson_tail(mu, 1)?,
            q2: poisson_tail(mu, 2)?,
            q3: poisson_tail(mu, 3)?,
        })
    }

    /// User-supplied tail bounds; must satisfy `q1 >= q2 >= q3 >= 0`.
    pub fn custom(mu: T, q1: T, q2: T, q3: T) -> Result<Self> {
        if mu < T::zero() {
            return Err(Error::domain("mean photon number must be nonnegative"));
        }
        let in_range = |q: T| q >= T::zero() && q <= T::one();
        if !(in_range(q1) && in_range(q2) && in_range(q3)) {
            return Err(Error::domain("tail bounds must lie in [0, 1]"));
        }
        if q1 < q2 || q2 < q3 {
            return Err(Error::domain("tail bounds must be non-increasing in n"));
        }
        Ok(SourceModel { mu, q1, q2, q3 })
    }
}

/// Observed protocol counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tallies {
    pub n_em: u64,
    pub n_det: u64,
    pub n_code: u64,
    pub n_sample: u64,
    pub n_bit: u64,
    pub n_multi: u64,
}

impl Tallies {
    pub fn validate(&self) -> Result<()> {
        if self.n_code + self.n_sample != self.n_det {
            return Err(Error::InvalidParam(format!(
                "n_code + n_sample = {} must equal n_det = {}",
                self.n_code + self.n_sample,
                self.n_det
            )));
        }
        if self.n_bit > self.n_sample {
            return Err(Error::InvalidParam(
                "n_bit cannot exceed n_sample".into(),
            ));
        }
        Ok(())
    }

    /// Detection rate `Q = n_det / n_em`.
    pub fn q_rate<T: Real>(&self) -> Result<T> {
        if self.n_em == 0 {
            return Err(Error::domain("n_em must be positive"));
        }
        Ok(from_count::<T>(self.n_det) / from_count(self.n_em))
    }

    /// Sample bit-error rate `n_bit / n_sample`.
    pub fn e_bit<T: Real>(&self) -> Result<T> {
        if self.n_sample == 0 {
            return Err(Error::domain("no sample events: e_bit undefined"));
        }
        Ok(from_count::<T>(self.n_bit) / from_count(self.n_sample))
    }
}

/// Result of a key-rate evaluation at the optimal mean photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateResult<T> {
    /// Phase-error upper bound at the optimum, clamped to `[0, 1]`.
    pub e_ph_u: T,
    /// Privacy-amplification fraction per emitted block, `Q h(e_ph_u)`.
    pub n_pa: T,
    /// Secret-key rate per emitted pulse.
    pub rate: T,
    /// Optimizing mean photon number; NaN when no positive rate exists.
    pub mu_star: T,
}

/// Binary entropy `h(x) = -x log2 x - (1-x) log2 (1-x)` with `h(0)=h(1)=0`.
pub fn binary_entropy<T: Real>(x: T) -> Result<T> {
    if x < T::zero() || x > T::one() {
        return Err(Error::domain(format!("entropy argument {x} outside [0, 1]")));
    }
    if x == T::zero() || x == T::one() {
        return Ok(T::zero());
    }
    Ok(-x * x.log2() - (T::one() - x) * (T::one() - x).log2())
}

/// Amplification coefficient `lambda(eta1, eta2)`, the larger root of the
/// comparison quadratic; multiplies the bit-error terms in the phase-error
/// bound.
pub fn lambda_fn<T: Real>(eta1: T, eta2: T) -> Result<T> {
    check_open_unit("eta1", eta1)?;
    check_open_unit("eta2", eta2)?;
    let one = T::one();
    let num = one - (one - eta1) * eta2;
    let disc = num * num - r::<T>(4.0) * eta1 * (one - eta1) * (one - eta2) * (one - eta2);
    if disc < T::zero() {
        return Err(Error::domain(format!(
            "negative discriminant at eta1={eta1}, eta2={eta2}: outside the proof regime"
        )));
    }
    Ok((num + disc.sqrt()) / (r::<T>(2.0) * (one - eta1) * (one - eta2) * (one - eta2)))
}

/// Strict lower bound `lambda^L` that the larger root always exceeds.
pub fn lambda_lower_bound<T: Real>(eta1_u: T, eta2_u: T) -> Result<T> {
    check_open_unit("eta1_u", eta1_u)?;
    check_open_unit("eta2_u", eta2_u)?;
    let one = T::one();
    let den = (one - eta1_u) * (one - r::<T>(2.0) * eta2_u) + one;
    if den <= T::zero() {
        return Err(Error::domain("lambda lower bound undefined: denominator <= 0"));
    }
    Ok((one + eta1_u) / den)
}

/// Residual of the quadratic whose larger root is [`lambda_fn`].
pub fn lambda_quadratic<T: Real>(eta1_u: T, eta2_u: T, lambda: T) -> T {
    let one = T::one();
    (one - eta1_u) * (one - eta2_u) * (one - eta2_u) * lambda * lambda
        - (one - (one - eta1_u) * eta2_u) * lambda
        + eta1_u
}

/// Largest eigenvalue of the weight-110 comparison block,
/// `Lambda_110 = (s + sqrt(t)) / 2`.
///
/// This is the top of the spectrum of `t_a_matrix(110, ..)` restricted to
/// its two-dimensional support; the ambient 3x3 matrix adds a structural
/// zero eigenvalue.
pub fn big_lambda_110<T: Real>(eta1: T, eta2: T, lambda: T) -> Result<T> {
    check_open_unit("eta1", eta1)?;
    check_open_unit("eta2", eta2)?;
    check_positive("lambda", lambda)?;
    let w = monotone_witnesses(eta1, eta2, lambda)?;
    Ok((w.s + w.discriminant_t.sqrt()) / r(2.0))
}

/// Scalars from the case analysis that proves `Lambda_110` non-decreasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneWitnesses<T> {
    /// `A = 1 + lambda - 2 lambda eta2` (eta1-derivative numerator factor).
    pub a: T,
    /// Companion term `B` of the eta1-derivative numerator.
    pub b: T,
    /// `C = lambda (1 - eta1) > 0` (eta2-derivative factor).
    pub c: T,
    /// Companion term `D` of the eta2-derivative numerator.
    pub d: T,
    /// Quadratic `f(eta2)` controlling the mixed-sign cases.
    pub f: T,
    /// Quadratic `g(eta2)` controlling the sign-exclusion case.
    pub g: T,
    /// Trace term `s` of the weight-110 block.
    pub s: T,
    /// Discriminant of the weight-110 block; named in full so it cannot be
    /// confused with the protocol's sampling probability `t`.
    pub discriminant_t: T,
}

/// Evaluates the case-analysis scalars at one parameter point.
pub fn monotone_witnesses<T: Real>(eta1: T, eta2: T, lambda: T) -> Result<MonotoneWitnesses<T>> {
    check_open_unit("eta1", eta1)?;
    check_open_unit("eta2", eta2)?;
    check_positive("lambda", lambda)?;
    let one = T::one();
    let two = r::<T>(2.0);
    let four = r::<T>(4.0);

    let k = one + lambda - two * eta2 * lambda; // 1 + lambda - 2 lambda eta2
    let s = one - two * (one - eta2) * lambda + eta1 * k;
    let discriminant_t = one
        + eta1 * (eta1 * k * k - two * (k - two * (one - eta2) * eta2 * lambda * lambda));

    let a = k;
    let b = eta1 * k * k + lambda * (two * eta2 * (one + lambda - lambda * eta2) - one) - one;
    let c = lambda * (one - eta1);
    let d = (one - eta1) * eta1 * lambda * (one + (one - two * eta2) * lambda);

    let lam2 = lambda * lambda;
    let f_axis = (lambda + two) / (two * lambda);
    let f = (eta2 - f_axis) * (eta2 - f_axis) + (lambda + one) / lam2
        - (lambda + two) * (lambda + two) / (four * lam2);
    let g_axis = (lambda + one) / (two * lambda);
    let g = (eta2 - g_axis) * (eta2 - g_axis) + (lambda + one) / (two * lam2)
        - (lambda + one) * (lambda + one) / (four * lam2);

    Ok(MonotoneWitnesses {
        a,
        b,
        c,
        d,
        f,
        g,
        s,
        discriminant_t,
    })
}

/// Grid specification for [`verify_lambda_monotone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneGrid<T> {
    pub eta_lo: T,
    pub eta_hi: T,
    pub points: usize,
    pub lambda: T,
}

impl<T: Real> MonotoneGrid<T> {
    /// 101x101 grid on `[0.3, 0.7]^2` at a fixed lambda.
    pub fn default_at(lambda: T) -> Self {
        MonotoneGrid {
            eta_lo: r(0.3),
            eta_hi: r(0.7),
            points: 101,
            lambda,
        }
    }
}

/// Report of the finite-difference monotonicity certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneReport<T> {
    /// Smallest central divided difference in eta1 over interior points.
    pub min_diff_eta1: T,
    /// Smallest central divided difference in eta2 over interior points.
    pub min_diff_eta2: T,
    pub pass: bool,
    pub threshold: T,
}

/// Certifies that `Lambda_110` is non-decreasing in both transmittances by
/// central finite differences over the grid. Degenerate grids pass
/// vacuously.
pub fn verify_lambda_monotone<T: Real>(grid: &MonotoneGrid<T>) -> Result<MonotoneReport<T>> {
    check_positive("lambda", grid.lambda)?;
    if grid.points == 0 {
        return Err(Error::InvalidParam("grid needs at least one point".into()));
    }
    let threshold = r::<T>(-1e-8);
    let mut min1 = T::infinity();
    let mut min2 = T::infinity();
    let n = grid.points;
    if n >= 3 {
        let step = (grid.eta_hi - grid.eta_lo) / from_count::<T>((n - 1) as u64);
        let at = |i: usize| grid.eta_lo + from_count::<T>(i as u64) * step;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (at(i), at(j));
                if i >= 1 && i + 1 < n {
                    let hi = big_lambda_110(at(i + 1), y, grid.lambda)?;
                    let lo = big_lambda_110(at(i - 1), y, grid.lambda)?;
                    min1 = min1.min((hi - lo) / (r::<T>(2.0) * step));
                }
                if j >= 1 && j + 1 < n {
                    let hi = big_lambda_110(x, at(j + 1), grid.lambda)?;
                    let lo = big_lambda_110(x, at(j - 1), grid.lambda)?;
                    min2 = min2.min((hi - lo) / (r::<T>(2.0) * step));
                }
            }
        }
    }
    let pass = (min1.is_infinite() || min1 >= threshold)
        && (min2.is_infinite() || min2 >= threshold);
    Ok(MonotoneReport {
        min_diff_eta1: min1,
        min_diff_eta2: min2,
        pass,
        threshold,
    })
}

/// Tail probability of `Poisson(3 mu)` at `n`, for `n` in 1..=3.
///
/// Summed from the tail side so small intensities do not lose precision to
/// cancellation; for large intensities the (tiny) head is subtracted
/// instead.
pub fn poisson_tail<T: Real>(mu: T, n: u32) -> Result<T> {
    if !(1..=3).contains(&n) {
        return Err(Error::domain(format!("tail order must be 1, 2 or 3, got {n}")));
    }
    if mu < T::zero() {
        return Err(Error::domain("mean photon number must be nonnegative"));
    }
    let lam = r::<T>(3.0) * mu;
    if lam == T::zero() {
        return Ok(T::zero());
    }
    if lam > r(30.0) {
        // Head is below ~1e-9 here; 1 - head is safe.
        let mut head = T::zero();
        let mut term = (-lam).exp();
        for m in 0..n {
            head = head + term;
            term = term * lam / from_count::<T>(m as u64 + 1);
        }
        return Ok(T::one() - head);
    }
    let mut term = (-lam).exp();
    for m in 0..n {
        term = term * lam / from_count::<T>(m as u64 + 1);
    }
    // term = pmf(n); accumulate the tail.
    let mut sum = T::zero();
    let mut m = n as u64;
    loop {
        sum = sum + term;
        m += 1;
        term = term * lam / from_count::<T>(m);
        if term < sum * T::epsilon() || m > 10_000 {
            break;
        }
    }
    Ok(sum.min(T::one()))
}

/// Model detection rate `Q = 2 eta mu e^(-2 eta mu)`: the probability of
/// exactly one photon in a Poisson count of mean `2 eta mu`.
pub fn detection_rate_model<T: Real>(eta: T, mu: T) -> Result<T> {
    if eta < T::zero() || eta > T::one() {
        return Err(Error::domain("overall transmission must lie in [0, 1]"));
    }
    if mu < T::zero() {
        return Err(Error::domain("mean photon number must be nonnegative"));
    }
    let x = r::<T>(2.0) * eta * mu;
    Ok(x * (-x).exp())
}

/// Phase-error upper bound
/// `e_ph^U = lambda(eta1^U, eta2^U) (e_bit + sqrt(q1 q3)/Q + 2 delta2) + q2/Q`,
/// clamped to `[0, 1]`.
pub fn e_ph_upper<T: Real>(
    e_bit: T,
    q_rate: T,
    source: &SourceModel<T>,
    delta2: T,
    eta1_u: T,
    eta2_u: T,
) -> Result<T> {
    if q_rate <= T::zero() {
        return Err(Error::domain("detection rate must be positive"));
    }
    if e_bit < T::zero() || e_bit > T::one() {
        return Err(Error::domain("bit-error rate must lie in [0, 1]"));
    }
    let lam = lambda_fn(eta1_u, eta2_u)?;
    let val = lam * (e_bit + (source.q1 * source.q3).sqrt() / q_rate + r::<T>(2.0) * delta2)
        + source.q2 / q_rate;
    Ok(val.max(T::zero()).min(T::one()))
}

/// Secret-key rate per emitted pulse,
/// `R = (n_code (1 - h(e_ph^U)) - n_ec) / (3 n_em)`, clamped at zero.
///
/// A bound at or above 1/2 yields no key.
pub fn key_rate<T: Real>(n_code: T, e_ph_u: T, n_ec: T, n_em: T) -> Result<T> {
    if n_em <= T::zero() {
        return Err(Error::domain("n_em must be positive"));
    }
    if n_code < T::zero() || n_ec < T::zero() {
        return Err(Error::domain("counts must be nonnegative"));
    }
    if e_ph_u < T::zero() || e_ph_u > T::one() {
        return Err(Error::domain("phase-error bound must lie in [0, 1]"));
    }
    if e_ph_u >= r(0.5) {
        return Ok(T::zero());
    }
    let h = binary_entropy(e_ph_u)?;
    let rate = (n_code * (T::one() - h) - n_ec) / (r::<T>(3.0) * n_em);
    Ok(rate.max(T::zero()))
}

/// One point of the coherent-source rate model at fixed `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint<T> {
    pub q: T,
    pub e_ph_u: T,
    pub rate: T,
}

/// Coherent-source key-rate model at one `(eta, mu)` point:
/// `Q = 2 eta mu e^(-2 eta mu)`, Poisson tails for `q_n`, error-correction
/// cost `Q h(e_bit)`, and both interferometer ranges `[1/2 +- delta]`.
pub fn model_key_rate<T: Real>(eta: T, mu: T, e_bit: T, delta: T) -> Result<ModelPoint<T>> {
    let q = detection_rate_model(eta, mu)?;
    if q <= T::zero() {
        return Ok(ModelPoint {
            q,
            e_ph_u: T::one(),
            rate: T::zero(),
        });
    }
    let source = SourceModel::coherent(mu)?;
    let eta_u = r::<T>(0.5) + delta;
    let e_ph = e_ph_upper(e_bit, q, &source, delta, eta_u, eta_u)?;
    let n_ec = q * binary_entropy(e_bit)?;
    let rate = key_rate(q, e_ph, n_ec, T::one())?;
    Ok(ModelPoint {
        q,
        e_ph_u: e_ph,
        rate,
    })
}

/// Search window for [`optimize_mu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSearch<T> {
    pub mu_lo: T,
    pub mu_hi: T,
    pub coarse_points: usize,
    pub rel_tol: T,
}

impl<T: Real> Default for MuSearch<T> {
    fn default() -> Self {
        MuSearch {
            mu_lo: r(1e-4),
            mu_hi: T::one(),
            coarse_points: 64,
            rel_tol: r(1e-6),
        }
    }
}

/// Maximizes the model key rate over the mean photon number.
///
/// A coarse logarithmic scan brackets the optimum, then golden-section
/// refinement narrows it; the rate is smooth and unimodal in this regime.
/// Deterministic for fixed inputs.
pub fn optimize_mu<T: Real>(
    eta: T,
    e_bit: T,
    delta_bs: T,
    search: &MuSearch<T>,
) -> Result<KeyRateResult<T>> {
    if search.mu_lo <= T::zero() || search.mu_hi <= search.mu_lo {
        return Err(Error::InvalidParam("mu range must satisfy 0 < lo < hi".into()));
    }
    if search.coarse_points < 3 {
        return Err(Error::InvalidParam("coarse scan needs at least 3 points".into()));
    }
    let rate_at = |mu: T| -> Result<T> { Ok(model_key_rate(eta, mu, e_bit, delta_bs)?.rate) };

    let n = search.coarse_points;
    let log_lo = search.mu_lo.ln();
    let log_hi = search.mu_hi.ln();
    let step = (log_hi - log_lo) / from_count::<T>((n - 1) as u64);
    let mut best_idx = 0usize;
    let mut best_rate = T::neg_infinity();
    let mut grid = Vec::with_capacity(n);
    for i in 0..n {
        let mu = (log_lo + from_count::<T>(i as u64) * step).exp();
        let rate = rate_at(mu)?;
        if rate > best_rate {
            best_rate = rate;
            best_idx = i;
        }
        grid.push(mu);
    }

    if best_rate <= T::zero() {
        return Ok(KeyRateResult {
            e_ph_u: T::one(),
            n_pa: T::zero(),
            rate: T::zero(),
            mu_star: T::nan(),
        });
    }

    let mut lo = grid[best_idx.saturating_sub(1)];
    let mut hi = grid[(best_idx + 1).min(n - 1)];
    let golden = r::<T>(0.618_033_988_749_894_9);
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let mut f1 = rate_at(x1)?;
    let mut f2 = rate_at(x2)?;
    for _ in 0..200 {
        if (hi - lo) <= search.rel_tol * hi {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = rate_at(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = rate_at(x1)?;
        }
    }
    let mu_star = if f1 > f2 { x1 } else { x2 };
    let point = model_key_rate(eta, mu_star, e_bit, delta_bs)?;
    Ok(KeyRateResult {
        e_ph_u: point.e_ph_u,
        n_pa: point.q * binary_entropy(point.e_ph_u.min(r(0.5)))?,
        rate: point.rate,
        mu_star,
    })
}

/// Azuma deviation bound `2 e^(-n zeta^2 / 2)` for `n` martingale steps.
pub fn azuma_deviation<T: Real>(n: u64, zeta: T) -> Result<T> {
    if n == 0 {
        return Err(Error::domain("trial count must be positive"));
    }
    if zeta <= T::zero() {
        return Err(Error::domain("deviation must be positive"));
    }
    Ok(r::<T>(2.0) * (-from_count::<T>(n) * zeta * zeta / r(2.0)).exp())
}

/// Upper bound on the tagged-event count from the multi-click count,
/// `n_multi / ((1 + 2 delta)(1/2 - delta))` with `delta = max(delta3, delta4)`.
pub fn tag_bound<T: Real>(n_multi: u64, delta3: T, delta4: T) -> Result<T> {
    let d = delta3.max(delta4);
    if d < T::zero() || d >= r(0.5) {
        return Err(Error::domain("half-width must lie in [0, 0.5)"));
    }
    let den = (T::one() + r::<T>(2.0) * d) * (r::<T>(0.5) - d);
    Ok(from_count::<T>(n_multi) / den)
}

/// Privacy-amplification output for a finite tally set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaResult<T> {
    /// Bits removed in privacy amplification.
    pub n_pa: T,
    /// Net key length `n_code - n_pa - n_ec`, clamped at zero.
    pub key_length: T,
    /// Entropy argument actually used (clamped to `[0, 1/2]`).
    pub entropy_arg: T,
}

/// Privacy amplification for the threshold-detector protocol.
///
/// Tagged events (bounded through the multi-click count) are written off
/// entirely; the untagged remainder pays the phase-error entropy, with the
/// error-correction cost `n_code h(e_bit)`.
pub fn threshold_pa<T: Real>(
    tallies: &Tallies,
    source: &SourceModel<T>,
    bs: &BsConfig<T>,
    t_prob: T,
) -> Result<PaResult<T>> {
    if tallies.n_sample == 0 {
        return Err(Error::domain("no sample events: bit-error rate undefined"));
    }
    if t_prob <= T::zero() || t_prob >= T::one() {
        return Err(Error::domain("code probability must lie in (0, 1)"));
    }
    let d = bs.threshold_half_width()?;
    let tag = tag_bound(tallies.n_multi, d, d)?;
    let n_code = from_count::<T>(tallies.n_code);
    let n_det = from_count::<T>(tallies.n_det);
    let n_em = from_count::<T>(tallies.n_em);
    let n_bit = from_count::<T>(tallies.n_bit);
    let e_bit: T = tallies.e_bit()?;
    let n_ec = n_code * binary_entropy(e_bit)?;

    let untag = n_code - tag;
    if untag <= T::zero() {
        return Ok(PaResult {
            n_pa: n_code,
            key_length: T::zero(),
            entropy_arg: r(0.5),
        });
    }

    let lam = lambda_fn(bs.eta1_upper(), bs.eta2_upper())?;
    let ph_untag = t_prob
        * lam
        * (n_bit / (T::one() - t_prob)
            + n_em * (source.q1 * source.q3).sqrt()
            + r::<T>(2.0) * bs.delta2 * n_det)
        + t_prob * n_em * source.q2;
    let arg = (ph_untag / untag).max(T::zero()).min(r(0.5));
    let n_pa = tag + untag * binary_entropy(arg)?;
    let key_length = (n_code - n_pa - n_ec).max(T::zero());
    Ok(PaResult {
        n_pa,
        key_length,
        entropy_arg: arg,
    })
}

/// Privacy-amplification output for the photon-number-resolving protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnrPaResult<T> {
    pub e_ph_u: T,
    pub n_pa: T,
    pub key_length: T,
}

/// Privacy amplification for the PNR protocol: `n_pa = n_code h(e_ph^U)`
/// with the phase-error bound from the observed rates.
pub fn pnr_pa<T: Real>(
    tallies: &Tallies,
    source: &SourceModel<T>,
    bs: &BsConfig<T>,
) -> Result<PnrPaResult<T>> {
    let q: T = tallies.q_rate()?;
    let e_bit: T = tallies.e_bit()?;
    let e_ph = e_ph_upper(e_bit, q, source, bs.delta2, bs.eta1_upper(), bs.eta2_upper())?;
    let n_code = from_count::<T>(tallies.n_code);
    let n_pa = n_code * binary_entropy(e_ph.min(r(0.5)))?;
    let n_ec = n_code * binary_entropy(e_bit)?;
    Ok(PnrPaResult {
        e_ph_u: e_ph,
        n_pa,
        key_length: (n_code - n_pa - n_ec).max(T::zero()),
    })
}

fn check_open_unit<T: Real>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must lie in the open interval (0, 1), got {x}"
        )))
    }
}

fn check_positive<T: Real>(name: &str, x: T) -> Result<()> {
    if x > T::zero() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {x}")))
    }
}
