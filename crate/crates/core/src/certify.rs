//! Final error certificate
//! `E[‖r(t)‖² | data] ≤ ‖Q_N u⋆‖² + 2K_m⁴ + 6K_m² I_m^{1/2}`.

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::spectral::{lp_norm_with, LpExponent, SpectralField};

/// Which bracket is summed into `I_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImVariant {
    /// `a⁴ + 2a³b + 2a²b² + ab³ + b⁴/5`, the expansion of `∫₀¹ (a + sb)⁴ ds`
    /// with `a = ‖u_n‖_{L⁴}`, `b = ‖d_{n+1}‖_{L⁴}`.
    #[default]
    Corrected,
    /// `a⁴ + 2a³b + 2a²b + a³b³ + b⁴/5`, as originally printed.
    PaperVerbatim,
}

impl ImVariant {
    pub fn bracket(self, a: f64, b: f64) -> f64 {
        let (a2, b2) = (a * a, b * b);
        match self {
            ImVariant::Corrected => a2 * a2 + 2.0 * a2 * a * b + 2.0 * a2 * b2 + a * b2 * b + 0.2 * b2 * b2,
            ImVariant::PaperVerbatim => {
                a2 * a2 + 2.0 * a2 * a * b + 2.0 * a2 * b + a2 * a * b2 * b + 0.2 * b2 * b2
            }
        }
    }
}

/// Running `I_m` for both bracket variants, plus `‖Q_N u⋆‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateState {
    h: f64,
    q0: f64,
    im: f64,
    im_verbatim: f64,
    next_m: usize,
}

impl CertificateState {
    pub fn new(cfg: &SimConfig) -> Self {
        Self {
            h: cfg.dt(),
            q0: q0(cfg.u_star(), cfg.modes()),
            im: 0.0,
            im_verbatim: 0.0,
            next_m: 0,
        }
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// Last accumulated index.
    pub fn m(&self) -> Option<usize> {
        self.next_m.checked_sub(1)
    }

    pub fn im(&self, variant: ImVariant) -> f64 {
        match variant {
            ImVariant::Corrected => self.im,
            ImVariant::PaperVerbatim => self.im_verbatim,
        }
    }

    /// Adds the term for index `m` from `a = ‖u_m‖_{L⁴}`, `b = ‖d_{m+1}‖_{L⁴}`.
    pub fn accumulate_norms(&mut self, m: usize, a: f64, b: f64) -> Result<()> {
        if m != self.next_m {
            return Err(Error::OutOfOrder {
                expected: self.next_m,
                got: m,
            });
        }
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::InvalidArgument(format!("norms must be nonnegative, got {a}, {b}")));
        }
        self.im += self.h * ImVariant::Corrected.bracket(a, b);
        self.im_verbatim += self.h * ImVariant::PaperVerbatim.bracket(a, b);
        self.next_m += 1;
        Ok(())
    }

    /// Adds the term for index `m` from the fields `u_m` and `d_{m+1}`.
    pub fn accumulate_im(&mut self, m: usize, u_n: &SpectralField, d_next: &SpectralField) -> Result<()> {
        let a = lp_norm_with(u_n, LpExponent::L4);
        let b = lp_norm_with(d_next, LpExponent::L4);
        self.accumulate_norms(m, a, b)
    }

    /// The certificate for a given `K_m` at the last accumulated index.
    pub fn bound(&self, km: f64, variant: ImVariant) -> Result<f64> {
        error_bound(self.q0, km, self.im(variant))
    }
}

/// `‖Q_N u⋆‖²_{L²}`: energy of the initial condition above mode `N`.
pub fn q0(u_star: &SpectralField, modes: usize) -> f64 {
    u_star.coeffs().iter().skip(modes).map(|c| c * c).sum()
}

/// `q0 + 2K⁴ + 6K²√I`.
pub fn error_bound(q0: f64, km: f64, im: f64) -> Result<f64> {
    if !(q0 >= 0.0 && km >= 0.0 && im >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "error bound needs nonnegative inputs, got q0={q0}, Km={km}, Im={im}"
        )));
    }
    let k2 = km * km;
    Ok(q0 + 2.0 * k2 * k2 + 6.0 * k2 * im.sqrt())
}

/// Checks `[-(r+R+φ)³ + φ³]·r ≤ R⁴ + 3R²φ²` up to `1e-9·max(1, |rhs|)`.
pub fn cubic_inequality(r: f64, big_r: f64, phi: f64) -> bool {
    let s = r + big_r + phi;
    let lhs = (-s * s * s + phi * phi * phi) * r;
    let rhs = big_r.powi(4) + 3.0 * big_r * big_r * phi * phi;
    lhs <= rhs + 1e-9 * rhs.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AlphaSpec;
    use proptest::prelude::*;

    fn cfg(u_star: SpectralField, modes: usize) -> SimConfig {
        SimConfig::new(modes, 0.1, 1.0, AlphaSpec::White, u_star, 0).unwrap()
    }

    #[test]
    fn bracket_increments() {
        let mut c = CertificateState::new(&cfg(SpectralField::zeros(1), 2));
        c.accumulate_norms(0, 1.0, 0.0).unwrap();
        assert!((c.im(ImVariant::Corrected) - 0.1).abs() < 1e-16);
        c.accumulate_norms(1, 1.0, 1.0).unwrap();
        assert!((c.im(ImVariant::Corrected) - 0.1 - 0.62).abs() < 1e-15);
        assert!((ImVariant::PaperVerbatim.bracket(2.0, 0.5) - (16.0 + 8.0 + 4.0 + 1.0 + 0.0125)).abs() < 1e-14);
        assert!(matches!(c.accumulate_norms(5, 1.0, 1.0), Err(Error::OutOfOrder { expected: 2, got: 5 })));
    }

    #[test]
    fn corrected_bracket_is_the_exact_integral() {
        for (a, b) in [(1.0f64, 1.0f64), (0.7, 2.3), (3.0, 0.01)] {
            // ∫₀¹ (a + sb)⁴ ds = ((a+b)⁵ - a⁵) / (5b)
            let exact: f64 = ((a + b).powi(5) - a.powi(5)) / (5.0 * b);
            let got = ImVariant::Corrected.bracket(a, b);
            assert!(got >= exact * (1.0 - 1e-14), "{got} < {exact}");
        }
    }

    #[test]
    fn zero_trajectory_has_zero_im() {
        let mut c = CertificateState::new(&cfg(SpectralField::zeros(1), 3));
        for m in 0..4 {
            c.accumulate_im(m, &SpectralField::zeros(3), &SpectralField::zeros(3)).unwrap();
        }
        assert_eq!(c.im(ImVariant::Corrected), 0.0);
    }

    #[test]
    fn error_bound_examples() {
        assert_eq!(error_bound(0.0, 0.0, 7.0).unwrap(), 0.0);
        assert!((error_bound(0.01, 0.1, 4.0).unwrap() - 0.1302).abs() < 1e-15);
        assert!((2.0 * 0.1027f64.powi(4) - 2.225e-4).abs() < 1e-7);
        assert!(error_bound(-1.0, 0.0, 0.0).is_err());
        assert!(error_bound(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn q0_of_projected_sine_vanishes() {
        let sin = SpectralField::new(vec![(std::f64::consts::PI / 2.0).sqrt()]).unwrap();
        assert_eq!(q0(&sin, 1), 0.0);
        assert_eq!(CertificateState::new(&cfg(sin, 4)).q0(), 0.0);
        let wide = SpectralField::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(q0(&wide, 1), 13.0);
    }

    #[test]
    fn cubic_inequality_examples() {
        assert!(cubic_inequality(0.0, 3.0, -2.0));
        assert!(cubic_inequality(1.0, 0.0, 0.0));
    }

    proptest! {
        #[test]
        fn error_bound_is_monotone(q in 0.0..1.0f64, k in 0.0..1.0f64, i in 0.0..10.0f64, dq in 0.0..1.0f64) {
            let base = error_bound(q, k, i).unwrap();
            prop_assert!(error_bound(q + dq, k, i).unwrap() >= base);
            prop_assert!(error_bound(q, k + dq, i).unwrap() >= base);
            prop_assert!(error_bound(q, k, i + dq).unwrap() >= base);
        }

        #[test]
        fn cubic_inequality_holds(r in -10.0..10.0f64, big_r in -10.0..10.0f64, phi in -10.0..10.0f64) {
            prop_assert!(cubic_inequality(r, big_r, phi));
        }
    }
}
