//! One trajectory with its bound accumulators, advanced step by step.

use serde::Serialize;

use crate::certify::{CertificateState, ImVariant};
use crate::config::{BoundOptions, RunConfig, SimConfig};
use crate::error::{Error, Result};
use crate::noise::{IncrementSampler, NoiseStream};
use crate::residual::{BoundBreakdown, ResidualState};
use crate::scheme::{Scheme, TrajectoryState};

/// Bound quantities at one index `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub m: usize,
    pub t: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "E3")]
    pub e3: f64,
    #[serde(rename = "E4")]
    pub e4: f64,
    #[serde(rename = "E5")]
    pub e5: f64,
    #[serde(rename = "Km")]
    pub km: f64,
    #[serde(rename = "Im")]
    pub im: f64,
    pub bound: f64,
    pub u_l2: f64,
}

impl Row {
    pub const CSV_HEADER: &'static str = "m,t,E1,E2,E3,E4,E5,Km,Im,bound,u_l2";

    /// One CSV line with 17 significant digits per float.
    pub fn csv_line(&self) -> String {
        let f = [
            self.t, self.e1, self.e2, self.e3, self.e4, self.e5, self.km, self.im, self.bound, self.u_l2,
        ];
        let mut line = self.m.to_string();
        for v in f {
            line.push_str(&format!(",{v:.16e}"));
        }
        line
    }
}

/// A trajectory together with its residual and certificate accumulators.
///
/// The scheme runs one step past `M` because the terms of index `m` need
/// `d_{m+1}` and `X_{m+1}`; index `M` is complete after `M + 1` steps.
#[derive(Debug)]
pub struct Simulation {
    sim: SimConfig,
    options: BoundOptions,
    scheme: Scheme,
    sampler: IncrementSampler,
    noise: NoiseStream,
    state: TrajectoryState,
    residual: ResidualState,
    certificate: CertificateState,
    increment: Vec<f64>,
    last: Option<(Row, BoundBreakdown)>,
    max_u_l2: f64,
}

impl Simulation {
    pub fn new(run: &RunConfig) -> Result<Self> {
        Self::with_parts(&run.sim, run.options, run.stream)
    }

    pub fn with_parts(sim: &SimConfig, options: BoundOptions, stream: u64) -> Result<Self> {
        let mut scheme = Scheme::new(sim);
        let state = scheme.init_with_horizon(sim, sim.steps() + 1);
        let residual = ResidualState::new(sim, options.moment_constant, &state)?;
        Ok(Self {
            sim: sim.clone(),
            options,
            sampler: IncrementSampler::new(sim),
            noise: NoiseStream::new(sim.seed(), stream),
            certificate: CertificateState::new(sim),
            increment: vec![0.0; sim.modes()],
            scheme,
            state,
            residual,
            last: None,
            max_u_l2: 0.0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.sim
    }

    pub fn options(&self) -> BoundOptions {
        self.options
    }

    /// Index `M` of the final time.
    pub fn final_index(&self) -> usize {
        self.sim.steps()
    }

    /// Last complete index.
    pub fn completed(&self) -> Option<usize> {
        self.last.map(|(r, _)| r.m)
    }

    pub fn is_finished(&self) -> bool {
        self.completed() == Some(self.final_index())
    }

    pub fn state(&self) -> &TrajectoryState {
        &self.state
    }

    pub fn residual(&self) -> &ResidualState {
        &self.residual
    }

    pub fn certificate(&self) -> &CertificateState {
        &self.certificate
    }

    /// Largest `‖u_n‖_{L²}` over the completed indices.
    pub fn max_u_l2(&self) -> f64 {
        self.max_u_l2
    }

    /// Takes one scheme step; returns the row of the index it completes.
    /// Index 0 completes with the first step; no row is produced for it.
    pub fn advance(&mut self) -> Result<Option<Row>> {
        if self.is_finished() {
            return Err(Error::PastHorizon(self.final_index()));
        }
        self.sampler.sample_into(&mut self.noise, &mut self.increment);
        self.scheme.step_in_place(&mut self.state, &self.increment)?;
        let norms = self
            .residual
            .accumulate(&self.state)?
            .expect("every step after the first completes an index");
        self.certificate
            .accumulate_norms(norms.m, norms.u_l4, norms.d_next_l4)?;
        self.max_u_l2 = self.max_u_l2.max(norms.u_l2);
        if norms.m == 0 {
            return Ok(None);
        }
        let b = self.residual.breakdown().expect("index completed above");
        let im = self.certificate.im(self.options.im_variant);
        let row = Row {
            m: b.m,
            t: b.t,
            e1: b.e1,
            e2: b.e2,
            e3: b.e3,
            e4: b.e4,
            e5: b.e5,
            km: b.km,
            im,
            bound: self.certificate.bound(b.km, self.options.im_variant)?,
            u_l2: norms.u_l2,
        };
        self.last = Some((row, b));
        Ok(Some(row))
    }

    /// Advances to the final index, calling `on_row` for every row.
    pub fn run_to_end(&mut self, mut on_row: impl FnMut(&Row) -> Result<()>) -> Result<()> {
        while !self.is_finished() {
            if let Some(row) = self.advance()? {
                on_row(&row)?;
            }
        }
        Ok(())
    }

    pub fn last_row(&self) -> Option<&Row> {
        self.last.as_ref().map(|(r, _)| r)
    }

    pub fn last_breakdown(&self) -> Option<&BoundBreakdown> {
        self.last.as_ref().map(|(_, b)| b)
    }

    /// Bound at the last complete index with the other `I_m` bracket.
    pub fn bound_with(&self, variant: ImVariant) -> Result<Option<f64>> {
        self.last
            .as_ref()
            .map(|(_, b)| self.certificate.bound(b.km, variant))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AlphaSpec;
    use crate::residual::{e2, s_h, MomentConstant};
    use crate::spectral::SpectralField;

    fn sim(alpha: AlphaSpec, u_star: SpectralField) -> SimConfig {
        SimConfig::new(4, 0.01, 0.1, alpha, u_star, 11).unwrap()
    }

    #[test]
    fn produces_rows_one_to_m() {
        let mut s = Simulation::with_parts(
            &sim(AlphaSpec::White, SpectralField::new(vec![1.0]).unwrap()),
            BoundOptions::default(),
            0,
        )
        .unwrap();
        let mut ms = Vec::new();
        s.run_to_end(|r| {
            ms.push(r.m);
            Ok(())
        })
        .unwrap();
        assert_eq!(ms, (1..=10).collect::<Vec<_>>());
        assert_eq!(s.state().n(), 11);
        assert!(matches!(s.advance(), Err(Error::PastHorizon(10))));
    }

    #[test]
    fn zero_data_rows_are_deterministic() {
        let c = sim(AlphaSpec::Constant(0.0), SpectralField::zeros(1));
        let mut s = Simulation::with_parts(&c, BoundOptions::default(), 0).unwrap();
        s.run_to_end(|r| {
            assert_eq!((r.e1, r.e3, r.e4, r.im, r.bound), (0.0, 0.0, 0.0, 0.0, 0.0));
            assert_eq!(r.e2, 0.0);
            let floor = s_h(&SpectralField::zeros(4), &c, MomentConstant::Reference).unwrap();
            let e5 = ((r.m + 1) as f64 * c.dt() * floor).powf(0.25);
            assert!((r.e5 - e5).abs() < 1e-15);
            Ok(())
        })
        .unwrap();
        let white = SimConfig::new(4, 0.01, 0.1, AlphaSpec::White, SpectralField::zeros(1), 1).unwrap();
        let mut s = Simulation::with_parts(&white, BoundOptions::default(), 0).unwrap();
        s.run_to_end(|r| {
            assert!((r.e2 - e2(r.m, &white, MomentConstant::Reference)).abs() < 1e-16);
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn csv_line_has_full_precision() {
        let row = Row {
            m: 3,
            t: 0.1,
            e1: 1.0 / 3.0,
            e2: 0.0,
            e3: 0.0,
            e4: 0.0,
            e5: 0.0,
            km: 0.0,
            im: 0.0,
            bound: 0.0,
            u_l2: 2.0,
        };
        let line = row.csv_line();
        assert!(line.starts_with("3,1.0000000000000001e-1,3.3333333333333331e-1,"));
        let parsed: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
        assert_eq!(line.split(',').count(), Row::CSV_HEADER.split(',').count());
    }
}
