//! Built-in numerical checks against independent oracles.
//!
//! Each oracle avoids the code path it checks: projections of cubes use
//! explicit sine sums instead of the FFT, time integrals use Gauss-Legendre
//! quadrature instead of the closed-form moments, and Monte Carlo checks
//! build conditioned paths from exact OU transitions. Checks that accept an
//! implementation as a parameter are also run on a deliberately broken
//! variant to make sure they can fail.

use std::f64::consts::PI;
use std::fmt;

use crate::certify::cubic_inequality;
use crate::config::{AlphaSpec, SimConfig};
use crate::error::Result;
use crate::noise::{bridge_law, IncrementSampler, NoiseStream};
use crate::residual::{
    radicand, radicand_direct, radicand_series, s_h, step_i2, step_i3, MomentConstant,
    ResidualState, RADICAND_SERIES_THRESHOLD,
};
use crate::scheme::Scheme;
use crate::spectral::{
    cubic, lp_norm_on_grid, lp_norm_with, phi_int_closed, phi_int_series, LpExponent, QuadratureGrid,
    SpectralField, BASIS_NORM, PHI_SERIES_THRESHOLD,
};

/// `8λe^{-2λ} + (2λ+3)e^{-4λ} + 2λ - 3` at 20 log-spaced `λ`, evaluated
/// with 200 significant digits and rounded once.
#[allow(clippy::excessive_precision)]
pub const RADICAND_REFERENCE: [(f64, f64); 20] = [
    (1e-12, 1.0666666666645332e-60),
    (3.792690190732254e-12, 8.3707730170188066e-58),
    (1.4384498882876659e-11, 6.5690475845153667e-55),
    (5.4555947811685145e-11, 5.1551255872473624e-52),
    (2.0691380811147902e-10, 4.0455362017735831e-49),
    (7.847599703514623e-10, 3.174774866090554e-46),
    (2.9763514416313133e-09, 2.49143621886533e-43),
    (1.1288378916846883e-08, 1.9551793807463133e-40),
    (4.281332398719396e-08, 1.5343464161258983e-37),
    (1.6237767391887244e-07, 1.2040933600945291e-34),
    (6.158482110660267e-07, 9.4492341257798916e-32),
    (2.335721469090121e-06, 7.4153551854121413e-29),
    (8.858667904100832e-06, 5.8191979984016783e-26),
    (3.359818286283788e-05, 4.5664477006164424e-23),
    (0.0001274274985703132, 3.5828929485819773e-20),
    (0.0004832930238571752, 2.809710610399695e-17),
    (0.0018329807108324375, 2.1990057674091891e-14),
    (0.006951927961775619, 1.7081290132610454e-11),
    (0.026366508987303663, 1.2895783415848767e-8),
    (0.1, 8.7497764312493205e-6),
];

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Fails for a documented reason that the default configuration keeps
    /// on purpose.
    KnownFail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: &'static str,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
    /// Why a failure is expected, when it is.
    pub known_deviation: Option<&'static str>,
}

impl CheckResult {
    fn new(id: &'static str, title: &'static str, ok: bool, detail: String) -> Self {
        Self {
            id,
            title,
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
            known_deviation: None,
        }
    }

    fn expecting_failure(mut self, reason: &'static str) -> Self {
        self.known_deviation = Some(reason);
        if self.status == Status::Fail {
            self.status = Status::KnownFail;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// True for failures without a documented reason.
    pub fn is_unexpected_failure(&self) -> bool {
        self.status == Status::Fail
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {}: {}", self.id, self.title, self.detail)?;
        if self.status == Status::KnownFail {
            if let Some(reason) = self.known_deviation {
                write!(f, " (known deviation: {reason})")?;
            }
        }
        Ok(())
    }
}

/// Monte Carlo sample sizes; the defaults are what `selftest` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSizes {
    pub inequality_triples: usize,
    pub bridge_paths: usize,
    pub fourth_moment_paths: usize,
    pub fourth_moment_modes: usize,
}

impl Default for SampleSizes {
    fn default() -> Self {
        Self {
            inequality_triples: 1_000_000,
            bridge_paths: 100_000,
            fourth_moment_paths: 20_000,
            fourth_moment_modes: 512,
        }
    }
}

/// Tolerance of the exact-arithmetic oracles.
pub const ORACLE_TOL: f64 = 1e-12;

/// Tolerance of the series/closed-form crossover checks.
pub const CROSSOVER_TOL: f64 = 1e-10;

const SEED: u64 = 20_240_601;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn sine_sum(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * ((i + 1) as f64 * x).sin())
        .sum::<f64>()
        * BASIS_NORM
}

/// First `out_modes` sine coefficients of `u³` by explicit sums on a grid
/// fine enough for exactness; no FFT involved.
pub fn naive_cube(coeffs: &[f64], out_modes: usize) -> Vec<f64> {
    let g = 3 * coeffs.len() + out_modes + 1;
    let values: Vec<f64> = (1..g)
        .map(|j| sine_sum(coeffs, j as f64 * PI / g as f64).powi(3))
        .collect();
    (1..=out_modes)
        .map(|m| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * (m as f64 * (j + 1) as f64 * PI / g as f64).sin())
                .sum();
            s * BASIS_NORM * PI / g as f64
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Small trajectory used by the direct-sum oracles: `N = 4`, `h = 0.01`,
/// `M = 10`, space-time white noise, nontrivial initial data.
pub fn oracle_trajectory() -> Result<(SimConfig, Vec<SpectralField>, Vec<SpectralField>)> {
    let u_star = SpectralField::new(vec![1.0, -0.5, 0.3, 0.2, 0.1])?;
    let cfg = SimConfig::new(4, 0.01, 0.1, AlphaSpec::White, u_star, SEED)?;
    let mut scheme = Scheme::new(&cfg);
    let mut state = scheme.init(&cfg);
    let sampler = IncrementSampler::new(&cfg);
    let mut noise = NoiseStream::new(cfg.seed(), 0);
    let mut x = vec![0.0; cfg.modes()];
    let mut us = vec![state.u().clone()];
    let mut xs = vec![SpectralField::zeros(cfg.modes())];
    for _ in 0..cfg.steps() {
        sampler.sample_into(&mut noise, &mut x);
        scheme.step_in_place(&mut state, &x)?;
        us.push(state.u().clone());
        xs.push(SpectralField::new(x.clone())?);
    }
    Ok((cfg, us, xs))
}

/// `I2(n)` and `I3(n)` for every `n` by Gauss-Legendre quadrature of the
/// defining time integrals, with the interpolant
/// `φ(σ) = u_{k-1} + (σ - (k-1)h)/h · d_k` on each step.
pub fn residual_direct_sums(cfg: &SimConfig, us: &[SpectralField]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n_modes = cfg.modes();
    let h = cfg.dt();
    let (nodes, weights) = gauss_legendre(24);
    // cubes[k][q]: projection of φ³ at node q of step k (k = 1..=M).
    let mut cubes = vec![Vec::new()];
    let mut prev_cubes = vec![Vec::new()];
    for k in 1..us.len() {
        let (a, b) = (us[k - 1].coeffs(), us[k].coeffs());
        cubes.push(
            nodes
                .iter()
                .map(|&s| {
                    let phi: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect();
                    naive_cube(&phi, 3 * n_modes)
                })
                .collect::<Vec<_>>(),
        );
        prev_cubes.push(naive_cube(a, n_modes));
    }
    let mut out = vec![(vec![0.0; 3 * n_modes], vec![0.0; n_modes])];
    for n in 1..us.len() {
        let mut i2 = vec![0.0; 3 * n_modes];
        let mut i3 = vec![0.0; n_modes];
        for m in 1..=3 * n_modes {
            let m2 = (m * m) as f64;
            let mut acc = 0.0;
            for k in 1..=n {
                for (q, (&s, &w)) in nodes.iter().zip(&weights).enumerate() {
                    let sigma = (k - 1) as f64 * h + s * h;
                    let mut v = cubes[k][q][m - 1];
                    if m <= n_modes {
                        v -= prev_cubes[k][m - 1];
                    }
                    acc += w * h * (-m2 * (n as f64 * h - sigma)).exp() * v;
                }
            }
            if m <= n_modes {
                i3[m - 1] = acc;
            } else {
                i2[m - 1] = acc;
            }
        }
        out.push((i2, i3));
    }
    out
}

/// Signature of the low-mode recursion step, for mutation checks.
pub type StepI3 =
    dyn Fn(&SpectralField, &SpectralField, &SpectralField, &SpectralField, &SimConfig) -> Result<SpectralField>;

/// Largest relative deviation of the `I2`/`I3` recursions (the pure steps
/// with the given `I3` step, and the streaming accumulator) from the
/// direct double sums.
pub fn residual_recursion_error(step3: &StepI3) -> Result<f64> {
    let (cfg, us, _) = oracle_trajectory()?;
    let n = cfg.modes();
    let direct = residual_direct_sums(&cfg, &us);
    let scale = direct
        .iter()
        .map(|(a, b)| max_abs(a).max(max_abs(b)))
        .fold(0.0, f64::max);
    let mut i2 = SpectralField::zeros(3 * n);
    let mut i3 = SpectralField::zeros(n);
    let mut err: f64 = 0.0;
    for k in 1..us.len() {
        let d = &us[k] - &us[k - 1];
        i2 = step_i2(&i2, &us[k], &d, &cfg)?;
        i3 = step3(&i3, &us[k], &us[k - 1], &d, &cfg)?;
        err = err
            .max(max_abs_diff(i2.coeffs(), &direct[k].0))
            .max(max_abs_diff(i3.coeffs(), &direct[k].1));
    }

    let mut scheme = Scheme::new(&cfg);
    let mut state = scheme.init(&cfg);
    let mut acc = ResidualState::new(&cfg, MomentConstant::Reference, &state)?;
    let sampler = IncrementSampler::new(&cfg);
    let mut noise = NoiseStream::new(cfg.seed(), 0);
    let mut x = vec![0.0; n];
    for step in direct.iter().skip(1) {
        sampler.sample_into(&mut noise, &mut x);
        scheme.step_in_place(&mut state, &x)?;
        acc.accumulate(&state)?;
        err = err
            .max(max_abs_diff(acc.i2().coeffs(), &step.0))
            .max(max_abs_diff(acc.i3().coeffs(), &step.1));
    }
    Ok(err / scale)
}

/// Relative deviation of the scheme from its unrolled form
/// `e^{nhA}u₀ + Σ_k ∫ e^{(nh-s)A} ds F_N(u_{k-1}) + Σ_j e^{(n-j)hA} X_j`.
pub fn scheme_direct_sum_error() -> Result<f64> {
    let (cfg, us, xs) = oracle_trajectory()?;
    let n_modes = cfg.modes();
    let h = cfg.dt();
    let (nodes, weights) = gauss_legendre(24);
    let forces: Vec<Vec<f64>> = us
        .iter()
        .map(|u| naive_cube(u.coeffs(), n_modes).iter().map(|c| -c).collect())
        .collect();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for n in 1..us.len() {
        for m in 1..=n_modes {
            let m2 = (m * m) as f64;
            let t = n as f64 * h;
            let mut v = (-m2 * t).exp() * us[0].coeff(m);
            for k in 1..=n {
                let integral: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&s, &w)| w * h * (-m2 * (t - (k - 1) as f64 * h - s * h)).exp())
                    .sum();
                v += integral * forces[k - 1][m - 1];
                v += (-m2 * (n - k) as f64 * h).exp() * xs[k].coeff(m);
            }
            err = err.max((v - us[n].coeff(m)).abs());
            scale = scale.max(v.abs());
        }
    }
    Ok(err / scale)
}

/// Relative deviation of the FFT cube from explicit sine sums on a random
/// six-mode field.
pub fn cubic_oracle_error() -> Result<f64> {
    let mut noise = NoiseStream::new(SEED, 1);
    let c: Vec<f64> = (0..6).map(|_| 2.0 * noise.next_uniform() - 1.0).collect();
    let field = SpectralField::new(c.clone())?;
    let got = cubic(&field);
    let want: Vec<f64> = naive_cube(&c, 18).iter().map(|v| -v).collect();
    Ok(max_abs_diff(got.coeffs(), &want) / max_abs(&want))
}

/// Largest relative change of `‖u‖_{L⁴}` and `‖u‖_{L¹²}` when the default
/// grid is refined to `2G` and `4G`, over random fields of several sizes.
pub fn norm_refinement_error() -> Result<f64> {
    let mut noise = NoiseStream::new(SEED, 2);
    let mut err: f64 = 0.0;
    for modes in [1, 7, 64, 256] {
        let field = SpectralField::new(
            (1..=modes)
                .map(|k| (2.0 * noise.next_uniform() - 1.0) / k as f64)
                .collect(),
        )?;
        for exponent in [LpExponent::L4, LpExponent::L12] {
            let grid = QuadratureGrid::for_norm(exponent, modes);
            let base = lp_norm_on_grid(&field, exponent, grid)?;
            for factor in [2, 4] {
                let fine = QuadratureGrid::new(grid.points() * factor)?;
                let refined = lp_norm_on_grid(&field, exponent, fine)?;
                err = err.max((refined - base).abs() / refined);
            }
        }
    }
    Ok(err)
}

/// Largest relative error over the crossover and reference checks of the
/// `φ_j` moments and of the given radicand evaluation.
pub fn crossover_error(rad: &dyn Fn(f64) -> Result<f64>) -> f64 {
    let mut err: f64 = 0.0;
    for j in 0..=3 {
        for eps in [-1e-9, 0.0, 1e-9] {
            let l = PHI_SERIES_THRESHOLD + eps;
            let (s, c) = (phi_int_series(l, j), phi_int_closed(l, j));
            err = err.max((s - c).abs() / c);
        }
    }
    for eps in [-1e-9, 0.0, 1e-9] {
        let l = RADICAND_SERIES_THRESHOLD * (1.0 + eps);
        let direct = radicand_direct(l);
        err = err.max((radicand_series(l) - direct).abs() / direct);
        match rad(l) {
            Ok(v) => err = err.max((v - direct).abs() / direct),
            Err(_) => return f64::INFINITY,
        }
    }
    for (l, want) in RADICAND_REFERENCE {
        match rad(l) {
            Ok(v) => err = err.max((v - want).abs() / want),
            Err(_) => return f64::INFINITY,
        }
    }
    err
}

/// Number of uniform triples in `[-10, 10]³` violating the cubic inequality.
pub fn cubic_inequality_violations(samples: usize) -> usize {
    let mut noise = NoiseStream::new(SEED, 3);
    let mut draw = || 20.0 * noise.next_uniform() - 10.0;
    (0..samples)
        .filter(|_| {
            let (r, big_r, phi) = (draw(), draw(), draw());
            !cubic_inequality(r, big_r, phi)
        })
        .count()
}

/// `(1 - e^{-2k²t}) / (2k²)`, the variance of an OU mode started at zero.
fn ou_var(k2: f64, t: f64) -> f64 {
    -(-2.0 * k2 * t).exp_m1() / (2.0 * k2)
}

/// Largest deviation, in standard errors, of the bridge law at `t = h/2`
/// from a regression of `Z(h/2)` on `Z(h)` over simulated OU paths
/// (`N = 2`, `h = 0.5`, 16 exact sub-steps per path).
pub fn bridge_deviation(paths: usize) -> Result<f64> {
    let h = 0.5;
    let cfg = SimConfig::new(2, h, h, AlphaSpec::White, SpectralField::zeros(1), SEED)?;
    let law = bridge_law(h / 2.0, &SpectralField::new(vec![1.0; 2])?, &cfg)?;
    let mut noise = NoiseStream::new(SEED, 4);
    let sub = 16;
    let dt = h / sub as f64;
    let mut worst: f64 = 0.0;
    for k in 1..=2 {
        let k2 = (k * k) as f64;
        let (decay, sd) = ((-k2 * dt).exp(), ou_var(k2, dt).sqrt());
        let mut pairs = Vec::with_capacity(paths);
        for _ in 0..paths {
            let mut y = 0.0;
            let mut mid = 0.0;
            for s in 1..=sub {
                y = decay * y + sd * noise.next_gaussian();
                if s == sub / 2 {
                    mid = y;
                }
            }
            pairs.push((mid, y));
        }
        let sxx: f64 = pairs.iter().map(|(_, y)| y * y).sum();
        let sxy: f64 = pairs.iter().map(|(m, y)| m * y).sum();
        let slope = sxy / sxx;
        let n = paths as f64;
        let resid = pairs.iter().map(|(m, y)| (m - slope * y).powi(2)).sum::<f64>() / (n - 1.0);
        let slope_se = (resid / sxx).sqrt();
        let var_se = resid * (2.0 / (n - 1.0)).sqrt();
        worst = worst
            .max((slope - law.mean.coeff(k)).abs() / slope_se)
            .max((resid - law.cov_diag[k - 1]).abs() / var_se);
    }
    Ok(worst)
}

/// Monte Carlo estimate of `E[∫₀^h ‖Z(τ)‖⁴_{L⁴} dτ | Z_N(h) = z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourthMomentEstimate {
    pub z: SpectralField,
    pub mean: f64,
    pub std_err: f64,
}

/// Conditional fourth-moment estimates at `N = 2`, `h = 0.5` for `z = 0`
/// and two draws of `Z(h)`. Resolved modes are conditioned pathwise
/// (`Y(τ) + c(τ)(z - Y(h))`), modes above `N` up to `high_modes` are free,
/// and `τ` is sampled by stratification so the time integral carries no
/// discretization error. Truncating the modes biases the estimate low.
pub fn fourth_moment_estimates(paths: usize, high_modes: usize) -> Result<(SimConfig, Vec<FourthMomentEstimate>)> {
    let h = 0.5;
    let cfg = SimConfig::new(2, h, h, AlphaSpec::White, SpectralField::zeros(1), SEED)?;
    let mut noise = NoiseStream::new(SEED, 5);
    let sampler = IncrementSampler::new(&cfg);
    let mut zs = vec![SpectralField::zeros(2)];
    for _ in 0..2 {
        let mut z = SpectralField::zeros(2);
        sampler.sample_into(&mut noise, z.coeffs_mut());
        zs.push(z);
    }
    let mut out = Vec::new();
    let mut field = SpectralField::zeros(high_modes);
    for z in zs {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..paths {
            let tau = h * (i as f64 + noise.next_uniform()) / paths as f64;
            let c = field.coeffs_mut();
            for k in 1..=high_modes {
                let k2 = (k * k) as f64;
                let v = ou_var(k2, tau);
                let y = v.sqrt() * noise.next_gaussian();
                c[k - 1] = if k <= cfg.modes() {
                    let decay = (-k2 * (h - tau)).exp();
                    let y_h = decay * y + ou_var(k2, h - tau).sqrt() * noise.next_gaussian();
                    y + decay * v / ou_var(k2, h) * (z.coeff(k) - y_h)
                } else {
                    y
                };
            }
            let value = h * lp_norm_with(&field, LpExponent::L4).powi(4);
            sum += value;
            sum_sq += value * value;
        }
        let n = paths as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean) * n / (n - 1.0);
        // Stratification only lowers the variance; this error is conservative.
        out.push(FourthMomentEstimate {
            z,
            mean,
            std_err: (var / n).sqrt(),
        });
    }
    Ok((cfg, out))
}

fn fourth_moment_check(
    cfg: &SimConfig,
    estimates: &[FourthMomentEstimate],
    constant: MomentConstant,
) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for e in estimates {
        let bound = cfg.dt() * s_h(&e.z, cfg, constant)?;
        ok &= e.mean - 3.0 * e.std_err <= bound;
        parts.push(format!("{:.4}±{:.4} vs {:.4}", e.mean, e.std_err, bound));
    }
    Ok((ok, parts.join(", ")))
}

const FOURTH_MOMENT_REASON: &str = "the default moment constant 3/(2π) drops the Gaussian fourth-moment \
factor 3, so h·S_h underestimates the conditional moment; the corrected constant is a valid bound";

/// Runs every check with the default sample sizes.
pub fn run_all() -> Vec<CheckResult> {
    run_with(SampleSizes::default())
}

pub fn run_with(sizes: SampleSizes) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let oracle = |id, title, value: Result<f64>, tol: f64| match value {
        Ok(e) => CheckResult::new(id, title, e <= tol, format!("relative error {e:.2e} (tol {tol:.0e})")),
        Err(err) => CheckResult::new(id, title, false, format!("error: {err}")),
    };
    let detects = |id, title, value: Result<f64>, tol: f64| match value {
        Ok(e) => CheckResult::new(id, title, e > tol, format!("relative error {e:.2e} must exceed {tol:.0e}")),
        Err(err) => CheckResult::new(id, title, true, format!("rejected with error: {err}")),
    };

    out.push(oracle(
        "a",
        "I2/I3 recursions vs direct double sums",
        residual_recursion_error(&step_i3),
        ORACLE_TOL,
    ));
    let flipped = |a: &SpectralField, b: &SpectralField, c: &SpectralField, d: &SpectralField, cfg: &SimConfig| {
        step_i3(a, b, c, d, cfg).map(|f| -&f)
    };
    out.push(detects(
        "a-mutant",
        "sign-flipped I3 step is detected",
        residual_recursion_error(&flipped),
        ORACLE_TOL,
    ));
    out.push(oracle("b", "scheme vs unrolled direct sum", scheme_direct_sum_error(), ORACLE_TOL));
    out.push(oracle("c", "FFT cube vs explicit sine sums", cubic_oracle_error(), ORACLE_TOL));
    out.push(oracle("d", "L4/L12 norms stable under grid refinement", norm_refinement_error(), ORACLE_TOL));
    out.push(oracle(
        "e",
        "series/closed-form crossovers and radicand references",
        Ok(crossover_error(&radicand)),
        CROSSOVER_TOL,
    ));
    let direct = |l: f64| Ok(radicand_direct(l));
    out.push(detects(
        "e-mutant",
        "direct radicand evaluation is detected",
        Ok(crossover_error(&direct)),
        CROSSOVER_TOL,
    ));

    let bad = cubic_inequality_violations(sizes.inequality_triples);
    out.push(CheckResult::new(
        "f",
        "cubic inequality on random triples",
        bad == 0,
        format!("{bad} violations in {} triples", sizes.inequality_triples),
    ));

    out.push(match bridge_deviation(sizes.bridge_paths) {
        Ok(z) => CheckResult::new(
            "g",
            "bridge law vs simulated OU paths",
            z <= 3.0,
            format!("worst deviation {z:.2} standard errors over {} paths", sizes.bridge_paths),
        ),
        Err(err) => CheckResult::new("g", "bridge law vs simulated OU paths", false, format!("error: {err}")),
    });

    match fourth_moment_estimates(sizes.fourth_moment_paths, sizes.fourth_moment_modes) {
        Ok((cfg, est)) => {
            for (id, title, constant) in [
                ("h", "conditional fourth moment within h·S_h (default constant)", MomentConstant::Reference),
                ("h-corrected", "conditional fourth moment within h·S_h (corrected constant)", MomentConstant::Corrected),
            ] {
                let result = match fourth_moment_check(&cfg, &est, constant) {
                    Ok((ok, detail)) => CheckResult::new(id, title, ok, format!("estimate vs bound: {detail}")),
                    Err(err) => CheckResult::new(id, title, false, format!("error: {err}")),
                };
                out.push(if constant == MomentConstant::Reference {
                    result.expecting_failure(FOURTH_MOMENT_REASON)
                } else {
                    result
                });
            }
        }
        Err(err) => out.push(CheckResult::new("h", "conditional fourth moment", false, format!("error: {err}"))),
    }
    out
}
