//! Exact sampling of the Gaussian increments `X_k`, the recursion for the
//! resolved stochastic convolution `Z_k`, the Ornstein-Uhlenbeck bridge law
//! between grid times, and the certified tail sums over unresolved modes.
//!
//! # Random streams
//!
//! Every trajectory draws from a ChaCha20 generator (`rand_chacha`) keyed by
//! `ChaCha20Rng::seed_from_u64(seed)` and positioned on the 64-bit stream
//! `stream` via `set_stream`. Streams with different indices under one key
//! are disjoint by construction of the cipher. Each `u64` output `b` becomes
//! the uniform `((b >> 11) + 0.5) · 2⁻⁵³ ∈ (0, 1)`, which is mapped to a
//! standard normal by [`crate::normal::inverse_cdf`]. Step `n` consumes
//! exactly `N` outputs, for modes `1..=N` in order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::normal;
use crate::spectral::SpectralField;

/// Reproducible Gaussian source for one trajectory.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha20Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform draw in the open interval `(0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    pub fn next_gaussian(&mut self) -> f64 {
        normal::inverse_cdf(self.next_uniform())
    }
}

/// `(1 - e^{-x})`, accurate for small `x`.
#[inline]
pub(crate) fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Standard deviation of mode `k` of `X_n`:
/// `α_k √((1 - e^{-2k²h}) / (2k²))`.
pub fn increment_std_dev(k: usize, cfg: &SimConfig) -> f64 {
    let k2 = (k * k) as f64;
    let alpha = cfg.alpha().alpha(k);
    alpha * (one_minus_exp_neg(2.0 * k2 * cfg.dt()) / (2.0 * k2)).sqrt()
}

/// Precomputed per-mode standard deviations for the hot loop.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    std_devs: Vec<f64>,
}

impl IncrementSampler {
    pub fn new(cfg: &SimConfig) -> Self {
        Self {
            std_devs: (1..=cfg.modes()).map(|k| increment_std_dev(k, cfg)).collect(),
        }
    }

    pub fn std_devs(&self) -> &[f64] {
        &self.std_devs
    }

    /// Draws `X` into `out`, consuming one variate per mode.
    pub fn sample_into(&self, stream: &mut NoiseStream, out: &mut [f64]) {
        assert_eq!(out.len(), self.std_devs.len());
        for (x, s) in out.iter_mut().zip(&self.std_devs) {
            *x = s * stream.next_gaussian();
        }
    }
}

/// Draws `X_{n+1} ~ N(0, P_N Q ∫₀^h e^{2sA} ds)` as an `N`-mode field.
pub fn sample_increment(stream: &mut NoiseStream, cfg: &SimConfig) -> SpectralField {
    let sampler = IncrementSampler::new(cfg);
    let mut out = SpectralField::zeros(cfg.modes());
    sampler.sample_into(stream, out.coeffs_mut());
    out
}

/// `Z_{n+1} = e^{hA} Z_n + X_{n+1}`.
pub fn advance_z(z: &SpectralField, x_next: &SpectralField, cfg: &SimConfig) -> Result<SpectralField> {
    for f in [z, x_next] {
        if f.modes() != cfg.modes() {
            return Err(Error::ModeMismatch {
                expected: cfg.modes(),
                found: f.modes(),
            });
        }
    }
    let h = cfg.dt();
    let mut out = z.map_modes(|k| (-((k * k) as f64) * h).exp());
    for (o, x) in out.coeffs_mut().iter_mut().zip(x_next.coeffs()) {
        *o += x;
    }
    Ok(out)
}

/// Weight applied to the tail bound `sup_{k>N} α_k² / N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailWeight {
    /// Bounds `Σ_{k>N} α_k²/k²`.
    Full,
    /// Bounds `Σ_{k>N} α_k²/(2k²)`.
    Half,
}

/// Certified upper bound for the unresolved-mode sums, via
/// `Σ_{k>N} α_k²/k² ≤ sup_{k>N} α_k² ∫_N^∞ k⁻² dk`.
pub fn tail_sum_weighted(cfg: &SimConfig, weight: TailWeight) -> f64 {
    let w = match weight {
        TailWeight::Full => 1.0,
        TailWeight::Half => 0.5,
    };
    w * cfg.alpha().tail_sup_sq() / cfg.modes() as f64
}

/// Conditional law of the resolved modes of `𝒵₀(t)` given `𝒵₀(h) = z`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeLaw {
    pub t: f64,
    pub mean: SpectralField,
    pub cov_diag: Vec<f64>,
}

/// Mean `(1 - e^{-2k²t}) e^{-k²(h-t)} / (1 - e^{-2k²h}) · z_k` and variance
/// `α_k²/(2k²) · (1 - e^{-2k²t})(1 - e^{-2k²(h-t)}) / (1 - e^{-2k²h})` per
/// mode. The mean carries the sign that pins the bridge to `z` at `t = h`.
pub fn bridge_law(t: f64, z: &SpectralField, cfg: &SimConfig) -> Result<BridgeLaw> {
    let h = cfg.dt();
    if !(0.0..=h).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "bridge time {t} outside [0, {h}]"
        )));
    }
    if z.modes() != cfg.modes() {
        return Err(Error::ModeMismatch {
            expected: cfg.modes(),
            found: z.modes(),
        });
    }
    let mut cov_diag = Vec::with_capacity(cfg.modes());
    let mean = z.map_modes(|k| {
        let k2 = (k * k) as f64;
        let rise = one_minus_exp_neg(2.0 * k2 * t);
        let fall = one_minus_exp_neg(2.0 * k2 * (h - t));
        let full = one_minus_exp_neg(2.0 * k2 * h);
        let alpha = cfg.alpha().alpha(k);
        cov_diag.push(alpha * alpha / (2.0 * k2) * (rise * fall) / full);
        rise * (-k2 * (h - t)).exp() / full
    });
    Ok(BridgeLaw { t, mean, cov_diag })
}
