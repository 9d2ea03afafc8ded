//! Problem instances built from a [`ProblemSpec`].

use oscifour_core::problems::kepler::{
    cartesian_state, energy, ks_init, KeplerConstants, KeplerState, Orbit,
};
use oscifour_core::problems::nls::NlsProblem;
use oscifour_core::problems::LinearTestField;
use oscifour_core::{OscillatoryField, C64};

use crate::config::{OrbitChoice, ProblemSpec};
use crate::error::{CliError, CliResult};

pub enum Problem {
    Linear {
        field: LinearTestField,
        y0: f64,
    },
    Nls(NlsProblem),
    Kepler {
        state: KeplerState,
        constants: KeplerConstants,
    },
}

impl Problem {
    pub fn build(spec: &ProblemSpec) -> CliResult<Self> {
        Ok(match spec {
            ProblemSpec::LinearTest {
                amplitude,
                mode,
                y0,
            } => Problem::Linear {
                field: LinearTestField::new(C64::new(*amplitude, 0.0), *mode),
                y0: *y0,
            },
            ProblemSpec::Nls {
                j,
                epsilon,
                rescaled,
            } => {
                let p = if *rescaled {
                    NlsProblem::rescaled(*j, *epsilon)
                } else {
                    NlsProblem::new(*j, *epsilon)
                };
                Problem::Nls(p.map_err(CliError::from_solver)?)
            }
            ProblemSpec::KeplerJ2 { orbit, j2, t0 } => {
                let (q0, qdot0) = match orbit {
                    OrbitChoice::Geostationary => Orbit::Geostationary.state(),
                    OrbitChoice::Eccentric => Orbit::Eccentric.state(),
                    OrbitChoice::Custom { q0, qdot0 } => (*q0, *qdot0),
                };
                let constants = KeplerConstants::with_j2(*j2);
                let state = ks_init(q0, qdot0, *t0, &constants).map_err(CliError::from_solver)?;
                Problem::Kepler { state, constants }
            }
        })
    }

    pub fn field(&self) -> Box<dyn OscillatoryField + '_> {
        match self {
            Problem::Linear { field, .. } => Box::new(*field),
            Problem::Nls(p) => Box::new(p),
            Problem::Kepler { state, .. } => Box::new(state.field()),
        }
    }

    pub fn initial(&self) -> Vec<C64> {
        match self {
            Problem::Linear { y0, .. } => vec![C64::new(*y0, 0.0)],
            Problem::Nls(p) => p.initial(),
            Problem::Kepler { state, .. } => state.initial(),
        }
    }

    /// Natural fast frequency of the problem.
    pub fn omega(&self) -> f64 {
        match self {
            Problem::Linear { .. } => 1.0,
            Problem::Nls(p) => p.omega(),
            Problem::Kepler { state, .. } => state.omega,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Linear { .. } => 1,
            Problem::Nls(p) => p.dim(),
            Problem::Kepler { .. } => 8,
        }
    }

    /// Total energy of a Kepler state `(α, β)` at fictitious time `τ`.
    pub fn kepler_energy(&self, y: &[C64], omega: f64, tau: f64) -> CliResult<f64> {
        let Problem::Kepler { constants, .. } = self else {
            return Err(CliError::config("energy is defined only for kepler-j2"));
        };
        let (q, qdot) = cartesian_state(y, omega, tau).map_err(CliError::Solver)?;
        energy(&q, &qdot, constants).map_err(CliError::Solver)
    }
}
