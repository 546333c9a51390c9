//! Exponential Euler scheme with spectral Galerkin truncation:
//!
//! ```text
//! u_0 = P_N u⋆
//! u_n = e^{hA} u_{n-1} + ∫₀^h e^{A(h-s)} ds · F_N(u_{n-1}) + X_n
//! ```
//!
//! with `F_N = P_N F` evaluated exactly (no aliasing).

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::noise::{one_minus_exp_neg, IncrementSampler, NoiseStream};
use crate::spectral::{QuadratureGrid, SineTransform, SpectralField};

/// Markov state of one trajectory after step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    n: usize,
    horizon: usize,
    u: SpectralField,
    d: SpectralField,
    z: SpectralField,
    x_last: SpectralField,
    nonlinearity: SpectralField,
}

impl TrajectoryState {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Last step this state may advance to.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `u_n`.
    pub fn u(&self) -> &SpectralField {
        &self.u
    }

    /// `d_n = u_n - u_{n-1}`; zero at `n = 0`.
    pub fn d(&self) -> &SpectralField {
        &self.d
    }

    /// `Z_n`.
    pub fn z(&self) -> &SpectralField {
        &self.z
    }

    /// `X_n`, the increment consumed by the last step; zero at `n = 0`.
    pub fn x_last(&self) -> &SpectralField {
        &self.x_last
    }

    /// `F(u_n) = -u_n³` with all `3N` modes.
    pub fn nonlinearity(&self) -> &SpectralField {
        &self.nonlinearity
    }
}

/// Receives every state after a step, in order.
pub trait Observer {
    fn observe(&mut self, state: &TrajectoryState) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&TrajectoryState) -> Result<()>,
{
    fn observe(&mut self, state: &TrajectoryState) -> Result<()> {
        self(state)
    }
}

/// Precomputed per-mode factors and transform buffers for stepping.
#[derive(Debug)]
pub struct Scheme {
    modes: usize,
    steps: usize,
    decay: Vec<f64>,
    forcing: Vec<f64>,
    transform: SineTransform,
    grid: Vec<f64>,
    u_prev: Vec<f64>,
}

impl Scheme {
    pub fn new(cfg: &SimConfig) -> Self {
        let modes = cfg.modes();
        let h = cfg.dt();
        let k2 = |k: usize| (k * k) as f64;
        let g = QuadratureGrid::for_degree(3 * modes).points();
        Self {
            modes,
            steps: cfg.steps(),
            decay: (1..=modes).map(|k| (-k2(k) * h).exp()).collect(),
            // (1 - e^{-k²h}) / k²
            forcing: (1..=modes)
                .map(|k| one_minus_exp_neg(k2(k) * h) / k2(k))
                .collect(),
            transform: SineTransform::new(g),
            grid: vec![0.0; g + 1],
            u_prev: vec![0.0; modes],
        }
    }

    fn nonlinearity(&mut self, u: &[f64], out: &mut [f64]) {
        self.transform.synthesize(u, &mut self.grid);
        for v in self.grid.iter_mut() {
            *v = -(*v * *v * *v);
        }
        self.transform.analyze(&self.grid, out);
    }

    /// `u_0 = P_N u⋆`, `Z_0 = 0`.
    pub fn init(&mut self, cfg: &SimConfig) -> TrajectoryState {
        self.init_with_horizon(cfg, cfg.steps())
    }

    /// Initial state allowed to advance `horizon` steps.
    pub fn init_with_horizon(&mut self, cfg: &SimConfig, horizon: usize) -> TrajectoryState {
        let n = self.modes;
        let u = cfg.u_star().resized(n);
        let mut nonlinearity = SpectralField::zeros(3 * n);
        self.nonlinearity(u.coeffs(), nonlinearity.coeffs_mut());
        TrajectoryState {
            n: 0,
            horizon,
            u,
            d: SpectralField::zeros(n),
            z: SpectralField::zeros(n),
            x_last: SpectralField::zeros(n),
            nonlinearity,
        }
    }

    /// Advances `state` by one step with increment `x_next`.
    pub fn step_in_place(&mut self, state: &mut TrajectoryState, x_next: &[f64]) -> Result<()> {
        if x_next.len() != self.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                found: x_next.len(),
            });
        }
        if state.u.modes() != self.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                found: state.u.modes(),
            });
        }
        if state.n >= state.horizon {
            return Err(Error::PastHorizon(state.horizon));
        }
        self.u_prev.copy_from_slice(state.u.coeffs());
        let f = state.nonlinearity.coeffs();
        let u = state.u.coeffs_mut();
        let d = state.d.coeffs_mut();
        let z = state.z.coeffs_mut();
        for i in 0..self.modes {
            u[i] = self.decay[i] * self.u_prev[i] + self.forcing[i] * f[i] + x_next[i];
            d[i] = u[i] - self.u_prev[i];
            z[i] = self.decay[i] * z[i] + x_next[i];
        }
        state.x_last.coeffs_mut().copy_from_slice(x_next);
        self.nonlinearity(state.u.coeffs(), state.nonlinearity.coeffs_mut());
        state.n += 1;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Initial state for `cfg`.
pub fn init(cfg: &SimConfig) -> TrajectoryState {
    Scheme::new(cfg).init(cfg)
}

/// One scheme step from `state` with increment `x_next`.
pub fn step(state: &TrajectoryState, x_next: &SpectralField, cfg: &SimConfig) -> Result<TrajectoryState> {
    let mut next = state.clone();
    Scheme::new(cfg).step_in_place(&mut next, x_next.coeffs())?;
    Ok(next)
}

/// Performs exactly `M` steps, drawing increments from `noise` and handing
/// every new state to each observer in order.
pub fn run(
    cfg: &SimConfig,
    noise: &mut NoiseStream,
    observers: &mut [&mut dyn Observer],
) -> Result<TrajectoryState> {
    let mut scheme = Scheme::new(cfg);
    let sampler = IncrementSampler::new(cfg);
    let mut state = scheme.init(cfg);
    let mut x = vec![0.0; cfg.modes()];
    for _ in 0..cfg.steps() {
        sampler.sample_into(noise, &mut x);
        scheme.step_in_place(&mut state, &x)?;
        for obs in observers.iter_mut() {
            obs.observe(&state)?;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AlphaSpec;
    use crate::spectral::cubic;
    use std::f64::consts::PI;

    fn cfg(modes: usize, dt: f64, t_final: f64, alpha: AlphaSpec, u_star: SpectralField) -> SimConfig {
        SimConfig::new(modes, dt, t_final, alpha, u_star, 9).unwrap()
    }

    #[test]
    fn init_projects_initial_condition() {
        let sin = SpectralField::new(vec![(PI / 2.0).sqrt()]).unwrap();
        let c = cfg(4, 0.1, 1.0, AlphaSpec::White, sin);
        let s = init(&c);
        assert_eq!(s.u().coeffs(), &[(PI / 2.0).sqrt(), 0.0, 0.0, 0.0]);
        assert_eq!(s.n(), 0);
        assert!(s.z().coeffs().iter().all(|&v| v == 0.0));

        let wide = SpectralField::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let c = cfg(2, 0.1, 1.0, AlphaSpec::White, wide);
        assert_eq!(init(&c).u().coeffs(), &[1.0, 2.0]);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let c = cfg(4, 0.1, 1.0, AlphaSpec::White, SpectralField::zeros(4));
        let s = step(&init(&c), &SpectralField::zeros(4), &c).unwrap();
        assert!(s.u().coeffs().iter().all(|&v| v == 0.0));
        assert_eq!(s.n(), 1);
    }

    #[test]
    fn single_mode_matches_scalar_arithmetic() {
        let h = 0.01;
        let amp = 1e-3;
        let c = cfg(1, h, 1.0, AlphaSpec::White, SpectralField::new(vec![amp]).unwrap());
        let s = step(&init(&c), &SpectralField::zeros(1), &c).unwrap();
        // Cubic of c·e_1 keeps only -(3/(2π))c³ in mode 1 after projection.
        let expected = (-h).exp() * amp - (1.0 - (-h).exp()) * 3.0 / (2.0 * PI) * amp.powi(3);
        assert!((s.u().coeff(1) - expected).abs() <= 1e-15 * expected.abs());
    }

    #[test]
    fn sign_equivariance() {
        let u0 = SpectralField::new(vec![0.4, -0.2, 0.9]).unwrap();
        let x = SpectralField::new(vec![0.01, 0.02, -0.03]).unwrap();
        let c = cfg(3, 0.05, 1.0, AlphaSpec::White, u0.clone());
        let plus = step(&init(&c), &x, &c).unwrap();
        let cm = cfg(3, 0.05, 1.0, AlphaSpec::White, -&u0);
        let minus = step(&init(&cm), &-&x, &cm).unwrap();
        assert_eq!(plus.u(), &-minus.u());
    }

    #[test]
    fn difference_and_nonlinearity_are_consistent() {
        let u0 = SpectralField::new(vec![0.4, -0.2, 0.9]).unwrap();
        let c = cfg(3, 0.05, 1.0, AlphaSpec::White, u0);
        let s0 = init(&c);
        let s1 = step(&s0, &SpectralField::new(vec![0.1, 0.0, -0.1]).unwrap(), &c).unwrap();
        assert_eq!(s1.d(), &(s1.u() - s0.u()));
        let f = cubic(s1.u());
        for (a, b) in f.coeffs().iter().zip(s1.nonlinearity().coeffs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn refuses_to_step_past_horizon() {
        let c = cfg(2, 0.5, 1.0, AlphaSpec::White, SpectralField::zeros(1));
        let x = SpectralField::zeros(2);
        let s = step(&step(&init(&c), &x, &c).unwrap(), &x, &c).unwrap();
        assert!(matches!(step(&s, &x, &c), Err(Error::PastHorizon(2))));
        assert!(matches!(
            step(&init(&c), &SpectralField::zeros(3), &c),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn run_calls_observers_in_order() {
        let c = cfg(4, 0.1, 1.0, AlphaSpec::White, SpectralField::zeros(1));
        let mut seen = Vec::new();
        let mut obs = |s: &TrajectoryState| {
            seen.push(s.n());
            Ok(())
        };
        let last = run(&c, &mut NoiseStream::new(1, 0), &mut [&mut obs]).unwrap();
        assert_eq!(seen, (1..=10).collect::<Vec<_>>());
        assert_eq!(last.n(), 10);

        let quiet = cfg(4, 0.1, 1.0, AlphaSpec::Constant(0.0), SpectralField::zeros(1));
        let last = run(&quiet, &mut NoiseStream::new(1, 0), &mut []).unwrap();
        assert!(last.u().coeffs().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn runs_are_deterministic() {
        let c = cfg(8, 0.01, 0.2, AlphaSpec::White, SpectralField::new(vec![1.0]).unwrap());
        let a = run(&c, &mut NoiseStream::new(4, 2), &mut []).unwrap();
        let b = run(&c, &mut NoiseStream::new(4, 2), &mut []).unwrap();
        assert_eq!(a, b);
    }
}
