//! Data residual at grid times, the bridge bound `S_h`, and the five
//! addends of the residual bound `K_m`.
//!
//! The residual at `t = nh` splits into `Res^dat_n = I2(n) + I3(n)`, which
//! depends only on the numerical data, and a high-mode stochastic part. Both
//! recursions start from `I2(0) = I3(0) = 0`:
//!
//! ```text
//! I2(n) = e^{hA} I2(n-1) + h Q_N ∫₀¹ e^{sAh} (u_n - s d_n)³ ds
//! I3(n) = e^{hA} I3(n-1) + h P_N ∫₀¹ e^{sAh} [(u_n - s d_n)³ - u_{n-1}³] ds
//! ```
//!
//! Expanding the cube gives four `3N`-mode fields weighted per mode by the
//! moments [`phi_int`]`(k²h, j)`.
//!
//! `K_m` is assembled from running sums:
//!
//! | term | quantity                                    |
//! |------|---------------------------------------------|
//! | E1   | `(h Σ_{n=1}^m ‖Res^dat_n‖⁴_{L⁴})^{1/4}`         |
//! | E2   | `(C mh)^{1/4} (Σ_{k>N} α_k²/k²)^{1/2}`        |
//! | E3   | `(h⁵/5 Σ_{n=0}^m ‖Au_n‖⁴_{L⁴})^{1/4}`          |
//! | E4   | `(h² Σ_{n=0}^m P(‖u_n‖_{L¹²}, ‖d_{n+1}‖_{L¹²}))^{1/4}` |
//! | E5   | `(h Σ_{n=0}^m S_h(X_{n+1}))^{1/4}`             |
//!
//! with `P(a, b) = a³/2 + a²b/2 + ab²/4 + b³/20`.

// Per-mode loops index several parallel arrays at once.
#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::noise::{one_minus_exp_neg, tail_sum_weighted, TailWeight};
use crate::scheme::TrajectoryState;
use crate::spectral::{
    lp_norm_with, phi_int, quadrature_power_sum, triple_product, LpExponent, QuadratureGrid,
    SineTransform, SpectralField,
};

/// Constant in the fourth-moment estimate for Gaussian fields,
/// `E‖Z‖⁴_{L⁴} ≤ C (E‖Z‖²_{L²})²`.
///
/// The exact fourth moment of a diagonal Gaussian field is
/// `(3/π)(Σa²)² + (3/2π)Σa⁴`, so `3/(2π)` can be exceeded and
/// `9/(2π)` is the smallest constant valid for every spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentConstant {
    /// `3/(2π)`, the constant the reference values were computed with.
    #[default]
    Reference,
    /// `9/(2π)`, a valid upper bound.
    Corrected,
}

impl MomentConstant {
    /// `C` in `E‖Z‖⁴_{L⁴} ≤ C (E‖Z‖²)²`.
    pub fn l4_factor(self) -> f64 {
        match self {
            MomentConstant::Reference => 3.0 / (2.0 * PI),
            MomentConstant::Corrected => 9.0 / (2.0 * PI),
        }
    }

    /// Prefactor of `mh` in E2: `l4_factor / 4`.
    pub fn high_mode_factor(self) -> f64 {
        self.l4_factor() / 4.0
    }
}

/// Below this `λ = hk²` the radicand of `Σ_N` uses its Taylor series.
pub const RADICAND_SERIES_THRESHOLD: f64 = 0.5;

/// Taylor coefficients `c_5..c_40` of
/// `f(λ) = 8λe^{-2λ} + (2λ+3)e^{-4λ} + 2λ - 3`, computed in exact rational
/// arithmetic and rounded once.
const RADICAND_SERIES: [f64; 36] = [
    1.0666666666666667,
    -2.1333333333333333,
    2.3365079365079366,
    -1.8285714285714285,
    1.1343915343915343,
    -0.5892063492063492,
    0.2649478916145583,
    -0.10548661215327881,
    0.037788055565833346,
    -0.012327143755715184,
    0.0036964892837908713,
    -0.0010265854075377885,
    0.00026567763137946767,
    -6.440357182135375e-05,
    1.4688189125735425e-05,
    -3.163573894322334e-06,
    6.456237366535209e-07,
    -1.2521153587893946e-07,
    2.3136883412364606e-08,
    -4.082976753476782e-09,
    6.89569185161468e-10,
    -1.1167110537678511e-10,
    1.737105947558295e-11,
    -2.5997502970847424e-12,
    3.7488561560112185e-13,
    -5.2157998198122804e-14,
    7.010483595873678e-15,
    -9.11362865342952e-16,
    1.1471700389677604e-16,
    -1.3995974323615388e-17,
    1.656666348038349e-18,
    -1.9042141928784542e-19,
    2.1272302693724927e-20,
    -2.311421684806221e-21,
    2.4447729358102846e-22,
    -2.5188569641464146e-23,
];

/// Direct evaluation of the radicand; loses all digits for small `λ`.
pub fn radicand_direct(lambda: f64) -> f64 {
    8.0 * lambda * (-2.0 * lambda).exp() + (2.0 * lambda + 3.0) * (-4.0 * lambda).exp() + 2.0 * lambda
        - 3.0
}

/// Taylor series of the radicand, `(16/15)λ⁵ + O(λ⁶)`.
pub fn radicand_series(lambda: f64) -> f64 {
    let mut acc = 0.0;
    for c in RADICAND_SERIES.iter().rev() {
        acc = acc * lambda + c;
    }
    acc * lambda.powi(5)
}

/// `8λe^{-2λ} + (2λ+3)e^{-4λ} + 2λ - 3` for `λ ≥ 0`.
pub fn radicand(lambda: f64) -> Result<f64> {
    let value = if lambda < RADICAND_SERIES_THRESHOLD {
        radicand_series(lambda)
    } else {
        radicand_direct(lambda)
    };
    if value < 0.0 {
        if value < -1e-14 * (2.0 * lambda + 3.0) {
            return Err(Error::NegativeRadicand { lambda, value });
        }
        return Ok(0.0);
    }
    Ok(value)
}

/// One term of `Σ_N(h)` with `α = 1`, using the given radicand.
fn sigma_term(k: usize, h: f64, radicand: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let k = k as f64;
    let lambda = h * k * k;
    let r = radicand(lambda)?;
    Ok(r.sqrt() / (8f64.sqrt() * k * k * k * one_minus_exp_neg(2.0 * lambda)))
}

/// `Σ_N(h) = Σ_{k≤N} α_k²/(√8 k³) · √f(hk²) / (1 - e^{-2hk²})`.
pub fn sigma_n(cfg: &SimConfig) -> Result<f64> {
    sigma_n_with(cfg, radicand)
}

/// `Σ_N(h)` with a caller-supplied radicand evaluation.
pub fn sigma_n_with(cfg: &SimConfig, radicand: impl Fn(f64) -> Result<f64> + Copy) -> Result<f64> {
    let mut sum = 0.0;
    for k in 1..=cfg.modes() {
        let a = cfg.alpha().alpha(k);
        if a != 0.0 {
            sum += a * a * sigma_term(k, cfg.dt(), radicand)?;
        }
    }
    Ok(sum)
}

/// The `z`-independent part of `S_h^{1/4}`:
/// `C^{1/4} (h^{-1/2} Σ_N(h) + Σ_{k>N} α_k²/(2k²))^{1/2}`.
pub fn s_h_floor_root(cfg: &SimConfig, constant: MomentConstant) -> Result<f64> {
    let inner = sigma_n(cfg)? / cfg.dt().sqrt() + tail_sum_weighted(cfg, TailWeight::Half);
    Ok(constant.l4_factor().powf(0.25) * inner.sqrt())
}

/// `k² z_k / (1 - e^{-2k²h})`, the magnitude of `(I - e^{2hA})^{-1} A z`.
pub fn bridge_weight(k: usize, h: f64) -> f64 {
    let k2 = (k * k) as f64;
    k2 / one_minus_exp_neg(2.0 * k2 * h)
}

/// `S_h(z) = [2h/5^{1/4} ‖(I - e^{2hA})^{-1} A z‖_{L⁴} + floor]⁴`.
pub fn s_h(z: &SpectralField, cfg: &SimConfig, constant: MomentConstant) -> Result<f64> {
    if z.modes() != cfg.modes() {
        return Err(Error::ModeMismatch {
            expected: cfg.modes(),
            found: z.modes(),
        });
    }
    let h = cfg.dt();
    let w = z.map_modes(|k| bridge_weight(k, h));
    let norm = lp_norm_with(&w, LpExponent::L4);
    Ok((2.0 * h / 5f64.powf(0.25) * norm + s_h_floor_root(cfg, constant)?).powi(4))
}

/// E2 at index `m`: `(C mh)^{1/4} (Σ_{k>N} α_k²/k²)^{1/2}`.
pub fn e2(m: usize, cfg: &SimConfig, constant: MomentConstant) -> f64 {
    let tail = tail_sum_weighted(cfg, TailWeight::Full);
    (constant.high_mode_factor() * m as f64 * cfg.dt()).powf(0.25) * tail.sqrt()
}

/// `½a³ + ½a²b + ¼ab² + b³/20`.
pub fn between_points_poly(a: f64, b: f64) -> f64 {
    0.5 * a * a * a + 0.5 * a * a * b + 0.25 * a * b * b + 0.05 * b * b * b
}

/// Per-mode weights `h·φ_j(k²h)` and `e^{-k²h}` for modes `1..=3N`.
#[derive(Debug, Clone)]
struct ModeFactors {
    decay: Vec<f64>,
    moments: [Vec<f64>; 4],
}

impl ModeFactors {
    fn new(modes: usize, h: f64) -> Self {
        let lambdas: Vec<f64> = (1..=modes).map(|k| ((k * k) as f64) * h).collect();
        let moment = |j| lambdas.iter().map(|&l| h * phi_int(l, j)).collect();
        Self {
            decay: lambdas.iter().map(|&l| (-l).exp()).collect(),
            moments: [moment(0), moment(1), moment(2), moment(3)],
        }
    }
}

/// `h ∫₀¹ e^{-k²hs}(B0 - 3sB1 + 3s²B2 - s³B3) ds` for mode index `i`.
#[inline]
fn bracket(f: &ModeFactors, i: usize, b: [f64; 4]) -> f64 {
    let m = &f.moments;
    m[0][i] * b[0] - 3.0 * m[1][i] * b[1] + 3.0 * m[2][i] * b[2] - m[3][i] * b[3]
}

/// Coefficients of `u³, u²d, ud², d³` on `3N` modes.
fn cubic_terms(u: &SpectralField, d: &SpectralField) -> [SpectralField; 4] {
    [
        triple_product(u, u, u),
        triple_product(u, u, d),
        triple_product(u, d, d),
        triple_product(d, d, d),
    ]
}

fn check_modes(field: &SpectralField, expected: usize) -> Result<()> {
    if field.modes() != expected {
        return Err(Error::ModeMismatch {
            expected,
            found: field.modes(),
        });
    }
    Ok(())
}

/// One step of the high-mode recursion. `i2_prev` has `3N` modes with the
/// first `N` zero; so does the result.
pub fn step_i2(
    i2_prev: &SpectralField,
    u_n: &SpectralField,
    d_n: &SpectralField,
    cfg: &SimConfig,
) -> Result<SpectralField> {
    let n = cfg.modes();
    check_modes(i2_prev, 3 * n)?;
    check_modes(u_n, n)?;
    check_modes(d_n, n)?;
    if let Some(k) = i2_prev.coeffs()[..n].iter().position(|&c| c != 0.0) {
        return Err(Error::SupportViolation { mode: k + 1 });
    }
    let f = ModeFactors::new(3 * n, cfg.dt());
    let terms = cubic_terms(u_n, d_n);
    let mut out = vec![0.0; 3 * n];
    for i in n..3 * n {
        let b = [0, 1, 2, 3].map(|j| terms[j].coeffs()[i]);
        out[i] = f.decay[i] * i2_prev.coeffs()[i] + bracket(&f, i, b);
    }
    SpectralField::new(out)
}

/// One step of the low-mode recursion; all fields have `N` modes.
pub fn step_i3(
    i3_prev: &SpectralField,
    u_n: &SpectralField,
    u_prev: &SpectralField,
    d_n: &SpectralField,
    cfg: &SimConfig,
) -> Result<SpectralField> {
    let n = cfg.modes();
    for field in [i3_prev, u_n, u_prev, d_n] {
        check_modes(field, n)?;
    }
    let f = ModeFactors::new(n, cfg.dt());
    let terms = cubic_terms(u_n, d_n);
    let prev_cube = triple_product(u_prev, u_prev, u_prev);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut b = [0, 1, 2, 3].map(|j| terms[j].coeffs()[i]);
        b[0] -= prev_cube.coeffs()[i];
        out[i] = f.decay[i] * i3_prev.coeffs()[i] + bracket(&f, i, b);
    }
    SpectralField::new(out)
}

/// `Res^dat = I2 + I3` on `3N` modes together with its `L⁴` norm.
pub fn res_dat(i2: &SpectralField, i3: &SpectralField) -> Result<(SpectralField, f64)> {
    let n = i3.modes();
    check_modes(i2, 3 * n)?;
    let mut sum = i2.clone();
    for (s, c) in sum.coeffs_mut().iter_mut().zip(i3.coeffs()) {
        if *s != 0.0 {
            return Err(Error::SupportViolation { mode: 1 });
        }
        *s = *c;
    }
    let norm = lp_norm_with(&sum, LpExponent::L4);
    Ok((sum, norm))
}

/// The five addends of `K_m` at one index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    pub m: usize,
    pub t: f64,
    /// Data residual.
    pub e1: f64,
    /// Unresolved stochastic modes.
    pub e2: f64,
    /// `‖Au_n‖` term.
    pub e3: f64,
    /// Cubic term between grid points.
    pub e4: f64,
    /// Bridge term.
    pub e5: f64,
    pub km: f64,
}

impl BoundBreakdown {
    /// `[E1, E2, E3, E4, E5]` in table naming.
    pub fn table_order(&self) -> [f64; 5] {
        [self.e1, self.e2, self.e3, self.e4, self.e5]
    }

    /// Addends in the order the bound is stated: data residual, high modes,
    /// `Au` term, bridge term, between-points term.
    pub fn theorem_order(&self) -> [f64; 5] {
        [self.e1, self.e2, self.e3, self.e5, self.e4]
    }
}

/// Norms of the data at a finalized index `m`, shared with the certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexNorms {
    pub m: usize,
    pub u_l2: f64,
    pub u_l4: f64,
    pub d_next_l4: f64,
}

/// Running state of the residual bound.
///
/// Fed with the trajectory states `0, 1, 2, …` in order. After state `n`
/// arrives, index `m = n - 1` is complete: `S1` covers `Res^dat_1..m`
/// and `S3, S4, S5` cover `0..=m`, the latter two using `d_{m+1}` and
/// `X_{m+1}`.
#[derive(Debug)]
pub struct ResidualState {
    modes: usize,
    h: f64,
    constant: MomentConstant,
    floor_root: f64,
    e2_factor: f64,
    factors: ModeFactors,
    bridge_weights: Vec<f64>,
    i2: Vec<f64>,
    i3: Vec<f64>,
    /// Sum of `‖Res^dat_n‖⁴` for `n = 1..=m`.
    s1: f64,
    s3: f64,
    s4: f64,
    s5: f64,
    /// Contributions of the most recent state, added when it is finalized.
    pending_res4: f64,
    pending_au4: f64,
    prev: Option<PrevData>,
    next_n: usize,
    buffers: Buffers,
}

#[derive(Debug)]
struct PrevData {
    u_l2: f64,
    u_l4: f64,
    u_l12: f64,
    cube: Vec<f64>,
}

#[derive(Debug)]
struct Buffers {
    /// Grid for L¹² norms of `N` modes and L⁴ norms of `3N` modes.
    fine: SineTransform,
    /// Grid resolving products of degree `3N`, a divisor of the fine grid.
    product: SineTransform,
    /// Grid for L⁴ norms of `N` modes.
    coarse: SineTransform,
    u_fine: Vec<f64>,
    d_fine: Vec<f64>,
    res_fine: Vec<f64>,
    prod: Vec<f64>,
    coarse_vals: Vec<f64>,
    terms: [Vec<f64>; 3],
    scratch: Vec<f64>,
}

impl Buffers {
    fn new(modes: usize) -> Self {
        let fine = QuadratureGrid::for_norm(LpExponent::L12, modes)
            .points()
            .max(QuadratureGrid::for_norm(LpExponent::L4, 3 * modes).points());
        let product = QuadratureGrid::for_degree(3 * modes).points();
        let coarse = QuadratureGrid::for_norm(LpExponent::L4, modes).points();
        debug_assert!(fine.is_multiple_of(product));
        Self {
            fine: SineTransform::new(fine),
            product: SineTransform::new(product),
            coarse: SineTransform::new(coarse),
            u_fine: vec![0.0; fine + 1],
            d_fine: vec![0.0; fine + 1],
            res_fine: vec![0.0; fine + 1],
            prod: vec![0.0; product + 1],
            coarse_vals: vec![0.0; coarse + 1],
            terms: [vec![0.0; 3 * modes], vec![0.0; 3 * modes], vec![0.0; 3 * modes]],
            scratch: vec![0.0; modes],
        }
    }

    /// `L^p` norm of values on the grid held in `values`.
    fn norm(values: &[f64], p: LpExponent) -> f64 {
        quadrature_power_sum(values, p).powf(1.0 / p.value() as f64)
    }

    /// `‖A u‖⁴_{L⁴}`.
    fn au4(&mut self, u: &[f64]) -> f64 {
        for (k, (s, c)) in self.scratch.iter_mut().zip(u).enumerate() {
            *s = ((k + 1) * (k + 1)) as f64 * c;
        }
        self.coarse.synthesize(&self.scratch, &mut self.coarse_vals);
        quadrature_power_sum(&self.coarse_vals, LpExponent::L4)
    }

    /// `‖w‖_{L⁴}` where `w_k = weights_k · x_k`.
    fn weighted_l4(&mut self, x: &[f64], weights: &[f64]) -> f64 {
        for ((s, c), w) in self.scratch.iter_mut().zip(x).zip(weights) {
            *s = c * w;
        }
        self.coarse.synthesize(&self.scratch, &mut self.coarse_vals);
        Self::norm(&self.coarse_vals, LpExponent::L4)
    }

    /// Coefficients of `u²d`, `ud²`, `d³` from the fine-grid values.
    fn products(&mut self) {
        let stride = self.fine.points() / self.product.points();
        for j in 0..3 {
            for (i, v) in self.prod.iter_mut().enumerate() {
                let u = self.u_fine[i * stride];
                let d = self.d_fine[i * stride];
                *v = match j {
                    0 => u * u * d,
                    1 => u * d * d,
                    _ => d * d * d,
                };
            }
            self.product.analyze(&self.prod, &mut self.terms[j]);
        }
    }
}

impl ResidualState {
    /// Starts the accumulation at the initial state `u_0`.
    pub fn new(cfg: &SimConfig, constant: MomentConstant, initial: &TrajectoryState) -> Result<Self> {
        let modes = cfg.modes();
        let h = cfg.dt();
        check_modes(initial.u(), modes)?;
        if initial.n() != 0 {
            return Err(Error::OutOfOrder {
                expected: 0,
                got: initial.n(),
            });
        }
        let mut state = Self {
            modes,
            h,
            constant,
            floor_root: s_h_floor_root(cfg, constant)?,
            e2_factor: e2(1, cfg, constant),
            factors: ModeFactors::new(3 * modes, h),
            bridge_weights: (1..=modes).map(|k| bridge_weight(k, h)).collect(),
            i2: vec![0.0; 3 * modes],
            i3: vec![0.0; modes],
            s1: 0.0,
            s3: 0.0,
            s4: 0.0,
            s5: 0.0,
            pending_res4: 0.0,
            pending_au4: 0.0,
            prev: None,
            next_n: 0,
            buffers: Buffers::new(modes),
        };
        state.accumulate(initial)?;
        Ok(state)
    }

    pub fn constant(&self) -> MomentConstant {
        self.constant
    }

    /// Last complete index, if any.
    pub fn m(&self) -> Option<usize> {
        self.next_n.checked_sub(2)
    }

    pub fn i2(&self) -> SpectralField {
        SpectralField::new(self.i2.clone()).expect("3N modes")
    }

    pub fn i3(&self) -> SpectralField {
        SpectralField::new(self.i3.clone()).expect("N modes")
    }

    /// `(S1, S3, S4, S5)` at the last complete index.
    pub fn sums(&self) -> [f64; 4] {
        [self.s1, self.s3, self.s4, self.s5]
    }

    /// Consumes state `n`; returns the norms of the index `n - 1` it
    /// completes.
    pub fn accumulate(&mut self, state: &TrajectoryState) -> Result<Option<IndexNorms>> {
        if state.n() != self.next_n {
            return Err(Error::OutOfOrder {
                expected: self.next_n,
                got: state.n(),
            });
        }
        check_modes(state.u(), self.modes)?;
        let n = self.modes;
        let b = &mut self.buffers;
        b.fine.synthesize(state.u().coeffs(), &mut b.u_fine);
        let u_l2 = Buffers::norm(&b.u_fine, LpExponent::L2);
        let u_l4 = Buffers::norm(&b.u_fine, LpExponent::L4);
        let u_l12 = Buffers::norm(&b.u_fine, LpExponent::L12);
        let au4 = b.au4(state.u().coeffs());
        let cube: Vec<f64> = state.nonlinearity().coeffs().iter().map(|c| -c).collect();

        let mut completed = None;
        if let Some(prev) = self.prev.take() {
            b.fine.synthesize(state.d().coeffs(), &mut b.d_fine);
            let d_l4 = Buffers::norm(&b.d_fine, LpExponent::L4);
            let d_l12 = Buffers::norm(&b.d_fine, LpExponent::L12);
            let xw = b.weighted_l4(state.x_last().coeffs(), &self.bridge_weights);
            let s_h = (2.0 * self.h / 5f64.powf(0.25) * xw + self.floor_root).powi(4);

            // Finalize index n - 1.
            self.s1 += self.pending_res4;
            self.s3 += self.pending_au4;
            self.s4 += between_points_poly(prev.u_l12, d_l12);
            self.s5 += s_h;
            completed = Some(IndexNorms {
                m: state.n() - 1,
                u_l2: prev.u_l2,
                u_l4: prev.u_l4,
                d_next_l4: d_l4,
            });

            // Advance the recursions to index n.
            b.products();
            let f = &self.factors;
            for i in 0..3 * n {
                let terms = [cube[i], b.terms[0][i], b.terms[1][i], b.terms[2][i]];
                if i < n {
                    let mut t = terms;
                    t[0] -= prev.cube[i];
                    self.i3[i] = f.decay[i] * self.i3[i] + bracket(f, i, t);
                } else {
                    self.i2[i] = f.decay[i] * self.i2[i] + bracket(f, i, terms);
                }
            }
            let mut res = self.i2.clone();
            res[..n].copy_from_slice(&self.i3);
            b.fine.synthesize(&res, &mut b.res_fine);
            self.pending_res4 = quadrature_power_sum(&b.res_fine, LpExponent::L4);
        }
        self.pending_au4 = au4;
        self.prev = Some(PrevData {
            u_l2,
            u_l4,
            u_l12,
            cube,
        });
        self.next_n += 1;
        Ok(completed)
    }

    /// `K_m` and its addends at the last complete index.
    pub fn breakdown(&self) -> Option<BoundBreakdown> {
        self.m().map(|m| self.km(m))
    }

    fn km(&self, m: usize) -> BoundBreakdown {
        let h = self.h;
        let e1 = (h * self.s1).powf(0.25);
        let e2 = self.e2_factor * (m as f64).powf(0.25);
        let e3 = (h.powi(5) / 5.0 * self.s3).powf(0.25);
        let e4 = (h * h * self.s4).powf(0.25);
        let e5 = (h * self.s5).powf(0.25);
        BoundBreakdown {
            m,
            t: m as f64 * h,
            e1,
            e2,
            e3,
            e4,
            e5,
            km: e1 + e2 + e3 + e4 + e5,
        }
    }
}

/// `K_m` for a state whose last complete index is `m`.
pub fn km(state: &ResidualState, m: usize) -> Result<BoundBreakdown> {
    match state.m() {
        Some(done) if done == m => Ok(state.km(m)),
        _ => Err(Error::OutOfOrder {
            expected: state.m().map_or(0, |d| d),
            got: m,
        }),
    }
}
