//! Sine-basis fields on `[0, π]` with homogeneous Dirichlet boundary values.
//!
//! A field is stored through its coefficients `c_k`, `k = 1..=K`, with respect
//! to the orthonormal eigenbasis `e_k(x) = √(2/π) sin(kx)` of the Dirichlet
//! Laplacian. The Laplacian and its semigroup act diagonally; products are
//! formed on a uniform grid that is fine enough to make every projection and
//! every `L^p` quadrature exact for the trigonometric polynomials involved.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};

/// `√(2/π)`, the normalisation of `e_k`.
pub const BASIS_NORM: f64 = 0.797_884_560_802_865_4;

/// Coefficients of `u(x) = Σ_k c_k e_k(x)`; index 0 holds mode 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a field needs at least one mode".into()));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coefficient of mode {} is not finite",
                k + 1
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(modes: usize) -> Self {
        Self {
            coeffs: vec![0.0; modes],
        }
    }

    /// The basis function `e_k` represented with `modes` coefficients.
    pub fn basis(k: usize, modes: usize) -> Self {
        assert!(k >= 1 && k <= modes, "mode {k} outside 1..={modes}");
        let mut f = Self::zeros(modes);
        f.coeffs[k - 1] = 1.0;
        f
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of mode `k` (1-based); zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Copy with exactly `modes` coefficients: truncated or zero-padded.
    pub fn resized(&self, modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes, 0.0);
        Self { coeffs }
    }

    /// `‖u‖²_{L²}` by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Applies a per-mode multiplier `k -> factor(k)`.
    pub fn map_modes(&self, mut factor: impl FnMut(usize) -> f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * factor(i + 1))
                .collect(),
        }
    }

    /// Highest mode carrying a nonzero coefficient.
    pub fn highest_active_mode(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0).map(|i| i + 1)
    }
}

fn binary_op(a: &SpectralField, b: &SpectralField, op: impl Fn(f64, f64) -> f64) -> SpectralField {
    let modes = a.modes().max(b.modes());
    SpectralField {
        coeffs: (1..=modes).map(|k| op(a.coeff(k), b.coeff(k))).collect(),
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        binary_op(self, rhs, |x, y| x + y)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        binary_op(self, rhs, |x, y| x - y)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        SpectralField {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// Uniform grid `x_j = jπ/G`, `j = 0..=G`, with the composite trapezoid rule.
///
/// Both endpoint values of a sine field vanish, so the rule reduces to
/// `(π/G) Σ_{j=1}^{G-1} f(x_j)`. Through the odd extension to `[0, 2π]` it is
/// exact for even trigonometric polynomials of degree below `2G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureGrid {
    points: usize,
}

impl QuadratureGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument(format!(
                "quadrature grid needs at least 2 intervals, got {points}"
            )));
        }
        Ok(Self { points })
    }

    /// Smallest power-of-two grid on which `|u|^p` of a `modes`-mode field is
    /// integrated exactly (`2G > p·modes`).
    pub fn for_norm(exponent: LpExponent, modes: usize) -> Self {
        let p = exponent.value() as usize;
        Self {
            points: (p * modes / 2 + 1).next_power_of_two().max(2),
        }
    }

    /// Smallest power-of-two grid that resolves sine modes up to `degree`
    /// without aliasing (`G > degree`).
    pub fn for_degree(degree: usize) -> Self {
        Self {
            points: (degree + 1).next_power_of_two().max(2),
        }
    }

    /// Number of intervals `G`.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let step = PI / self.points as f64;
        (0..=self.points).map(move |j| j as f64 * step)
    }

    pub fn weight(&self) -> f64 {
        PI / self.points as f64
    }
}

/// Exponents for which `L^p` norms are provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpExponent {
    L2,
    L4,
    L12,
}

impl LpExponent {
    pub fn value(self) -> u32 {
        match self {
            LpExponent::L2 => 2,
            LpExponent::L4 => 4,
            LpExponent::L12 => 12,
        }
    }

    #[inline]
    pub fn power(self, x: f64) -> f64 {
        let x2 = x * x;
        match self {
            LpExponent::L2 => x2,
            LpExponent::L4 => x2 * x2,
            LpExponent::L12 => {
                let x4 = x2 * x2;
                x4 * x4 * x4
            }
        }
    }
}

impl TryFrom<u32> for LpExponent {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        match p {
            2 => Ok(LpExponent::L2),
            4 => Ok(LpExponent::L4),
            12 => Ok(LpExponent::L12),
            other => Err(Error::UnsupportedExponent(other)),
        }
    }
}

/// Type-I discrete sine transform between sine coefficients and grid values
/// on `x_j = jπ/G`, computed with a real FFT of length `2G` on the odd
/// extension.
pub struct SineTransform {
    points: usize,
    fft: Arc<dyn RealToComplex<f64>>,
    input: Vec<f64>,
    spectrum: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform")
            .field("points", &self.points)
            .finish()
    }
}

impl SineTransform {
    pub fn new(points: usize) -> Self {
        assert!(points >= 2, "sine transform needs at least 2 intervals");
        let fft = RealFftPlanner::<f64>::new().plan_fft_forward(2 * points);
        let input = fft.make_input_vec();
        let spectrum = fft.make_output_vec();
        let scratch = fft.make_scratch_vec();
        Self {
            points,
            fft,
            input,
            spectrum,
            scratch,
        }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Highest mode the grid resolves.
    pub fn max_modes(&self) -> usize {
        self.points - 1
    }

    /// `S_k = Σ_{j=1}^{G-1} a_j sin(πjk/G)` for `k = 0..=G`, where `a` fills
    /// `input[1..len]`. Results land in the imaginary parts of `spectrum`
    /// as `-2 S_k`.
    fn run(&mut self, a: &[f64]) {
        let g = self.points;
        debug_assert!(a.len() < g);
        self.input.fill(0.0);
        for (j, &v) in a.iter().enumerate() {
            self.input[j + 1] = v;
            self.input[2 * g - j - 1] = -v;
        }
        self.fft
            .process_with_scratch(&mut self.input, &mut self.spectrum, &mut self.scratch)
            .expect("buffer sizes are fixed at construction");
    }

    /// Grid values `u(x_j)`, `j = 0..=G`, of the field with the given
    /// coefficients. `values.len()` must be `G + 1`.
    pub fn synthesize(&mut self, coeffs: &[f64], values: &mut [f64]) {
        let g = self.points;
        assert!(coeffs.len() < g, "{} modes do not fit a {g}-point grid", coeffs.len());
        assert_eq!(values.len(), g + 1);
        self.run(coeffs);
        let scale = -0.5 * BASIS_NORM;
        values[0] = 0.0;
        values[g] = 0.0;
        for (v, c) in values[1..g].iter_mut().zip(&self.spectrum[1..g]) {
            *v = scale * c.im;
        }
    }

    /// Exact sine coefficients of the grid function `values` (`G + 1`
    /// entries, endpoints ignored) for modes `1..=coeffs.len()`.
    pub fn analyze(&mut self, values: &[f64], coeffs: &mut [f64]) {
        let g = self.points;
        assert!(coeffs.len() < g, "{} modes do not fit a {g}-point grid", coeffs.len());
        assert_eq!(values.len(), g + 1);
        self.run(&values[1..g]);
        let scale = -0.5 * BASIS_NORM * PI / g as f64;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = scale * self.spectrum[k + 1].im;
        }
    }
}

/// Per-thread cache of transforms, keyed by grid size.
#[derive(Debug, Default)]
pub struct TransformCache {
    transforms: HashMap<usize, SineTransform>,
}

impl TransformCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, points: usize) -> &mut SineTransform {
        self.transforms
            .entry(points)
            .or_insert_with(|| SineTransform::new(points))
    }
}

thread_local! {
    static CACHE: RefCell<TransformCache> = RefCell::new(TransformCache::new());
}

fn with_transform<R>(points: usize, f: impl FnOnce(&mut SineTransform) -> R) -> R {
    CACHE.with(|cache| f(cache.borrow_mut().get(points)))
}

/// `(π/G) Σ_j |v_j|^p` over interior nodes.
pub fn quadrature_power_sum(values: &[f64], exponent: LpExponent) -> f64 {
    let g = values.len() - 1;
    let sum: f64 = values[1..g].iter().map(|&v| exponent.power(v)).sum();
    sum * PI / g as f64
}

/// Values of `field` at every node of `grid`, endpoints included.
pub fn eval_grid(field: &SpectralField, grid: QuadratureGrid) -> Result<Vec<f64>> {
    if field.modes() >= grid.points() {
        return Err(Error::GridTooCoarse {
            modes: field.modes(),
            points: grid.points(),
        });
    }
    let mut values = vec![0.0; grid.points() + 1];
    with_transform(grid.points(), |t| t.synthesize(field.coeffs(), &mut values));
    Ok(values)
}

/// `(∫₀^π |u|^p dx)^{1/p}` for `p ∈ {2, 4, 12}`, exact up to round-off.
pub fn lp_norm(field: &SpectralField, p: u32) -> Result<f64> {
    let exponent = LpExponent::try_from(p)?;
    Ok(lp_norm_with(field, exponent))
}

pub fn lp_norm_with(field: &SpectralField, exponent: LpExponent) -> f64 {
    let grid = QuadratureGrid::for_norm(exponent, field.modes());
    lp_norm_on_grid(field, exponent, grid).expect("grid chosen to resolve the field")
}

/// `L^p` norm evaluated on a caller-chosen grid; exact once `2G > p·K`.
pub fn lp_norm_on_grid(
    field: &SpectralField,
    exponent: LpExponent,
    grid: QuadratureGrid,
) -> Result<f64> {
    let values = eval_grid(field, grid)?;
    let integral = quadrature_power_sum(&values, exponent);
    Ok(integral.powf(1.0 / exponent.value() as f64))
}

/// `e^{tA}`: `c_k -> e^{-k² t} c_k`.
pub fn apply_semigroup(field: &SpectralField, t: f64) -> Result<SpectralField> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "semigroup time must be nonnegative, got {t}"
        )));
    }
    Ok(field.map_modes(|k| (-((k * k) as f64) * t).exp()))
}

/// `A`: `c_k -> -k² c_k`.
pub fn apply_laplacian(field: &SpectralField) -> SpectralField {
    field.map_modes(|k| -((k * k) as f64))
}

/// Exact sine coefficients of the pointwise product `a·b·c`, returned with
/// `a.modes() + b.modes() + c.modes()` modes.
pub fn triple_product(a: &SpectralField, b: &SpectralField, c: &SpectralField) -> SpectralField {
    let degree = a.modes() + b.modes() + c.modes();
    let grid = QuadratureGrid::for_degree(degree);
    let g = grid.points();
    let mut out = vec![0.0; degree];
    with_transform(g, |t| {
        let mut va = vec![0.0; g + 1];
        let mut vb = vec![0.0; g + 1];
        let mut vc = vec![0.0; g + 1];
        t.synthesize(a.coeffs(), &mut va);
        t.synthesize(b.coeffs(), &mut vb);
        t.synthesize(c.coeffs(), &mut vc);
        for ((x, y), z) in va.iter_mut().zip(&vb).zip(&vc) {
            *x *= y * z;
        }
        t.analyze(&va, &mut out);
    });
    SpectralField { coeffs: out }
}

/// The nonlinearity `F(u) = -u³` with its full `3N`-mode support.
pub fn cubic(field: &SpectralField) -> SpectralField {
    let n = field.modes();
    let grid = QuadratureGrid::for_degree(3 * n);
    let g = grid.points();
    let mut out = vec![0.0; 3 * n];
    with_transform(g, |t| {
        let mut v = vec![0.0; g + 1];
        t.synthesize(field.coeffs(), &mut v);
        for x in v.iter_mut() {
            *x = -(*x * *x * *x);
        }
        t.analyze(&v, &mut out);
    });
    SpectralField { coeffs: out }
}

/// Below this `λ` the moments `∫₀¹ e^{-λs} s^j ds` use their power series.
pub const PHI_SERIES_THRESHOLD: f64 = 1.0;

/// `∫₀¹ e^{-λs} s^j ds` for `λ ≥ 0`, `j ∈ 0..=3`.
pub fn phi_int(lambda: f64, j: u32) -> f64 {
    assert!(j <= 3, "moment order {j} not supported");
    assert!(lambda >= 0.0, "phi_int needs lambda >= 0, got {lambda}");
    if lambda < PHI_SERIES_THRESHOLD {
        phi_int_series(lambda, j)
    } else {
        phi_int_closed(lambda, j)
    }
}

/// `Σ_n (-λ)^n / (n! (n + j + 1))`.
pub fn phi_int_series(lambda: f64, j: u32) -> f64 {
    let j = j as f64;
    let mut term = 1.0;
    let mut sum = 1.0 / (j + 1.0);
    for n in 1..200 {
        term *= -lambda / n as f64;
        let contribution = term / (n as f64 + j + 1.0);
        sum += contribution;
        if contribution.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `j!/λ^{j+1} (1 - e^{-λ} Σ_{i≤j} λ^i/i!)`.
pub fn phi_int_closed(lambda: f64, j: u32) -> f64 {
    let mut partial = 0.0;
    let mut term = 1.0;
    let mut factorial = 1.0;
    for i in 0..=j {
        if i > 0 {
            term *= lambda / i as f64;
            factorial *= i as f64;
        }
        partial += term;
    }
    let bracket = 1.0 - (-lambda).exp() * partial;
    factorial * bracket / lambda.powi(j as i32 + 1)
}
