use super::{
    make_harmonic_oscillator, make_kepler, make_pendulum, make_position_dependent_mass,
    MechanicalSystem, PhaseState,
};
use crate::error::{Error, Result};

/// Names accepted by [`problem`].
pub const PROBLEM_NAMES: [&str; 4] = ["harmonic", "pendulum", "kepler", "pdm"];

/// Parameters of the named benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Frequency of `harmonic`.
    pub omega: f64,
    /// Mass modulation of `pdm`.
    pub epsilon: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self { omega: 1.0, epsilon: 0.5 }
    }
}

/// Looks up a benchmark problem by name.
pub fn problem(name: &str, params: &ProblemParams) -> Result<Box<dyn MechanicalSystem>> {
    Ok(match name {
        "harmonic" => Box::new(make_harmonic_oscillator(params.omega)?),
        "pendulum" => Box::new(make_pendulum()),
        "kepler" => Box::new(make_kepler()),
        "pdm" => Box::new(make_position_dependent_mass(params.epsilon)?),
        other => {
            return Err(Error::Config(format!(
                "unknown problem '{other}'; valid problems: {}",
                PROBLEM_NAMES.join(", ")
            )))
        }
    })
}

/// Initial state used by the benchmarks when none is given: `(1, 0)` for the
/// oscillator, `(1, 0.5)` for the pendulum, the unit circular orbit `q = (1, 0)`,
/// `p = (0, 1)` for Kepler, and `(2, 0)` for the pdm system, a swing wide enough for the
/// mass modulation to matter.
pub fn default_initial_state(name: &str) -> Result<PhaseState> {
    match name {
        "harmonic" => PhaseState::new(vec![1.0], vec![0.0]),
        "pendulum" => PhaseState::new(vec![1.0], vec![0.5]),
        "pdm" => PhaseState::new(vec![2.0], vec![0.0]),
        "kepler" => PhaseState::new(vec![1.0, 0.0], vec![0.0, 1.0]),
        other => Err(Error::Config(format!(
            "unknown problem '{other}'; valid problems: {}",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in PROBLEM_NAMES {
            let sys = problem(name, &ProblemParams::default()).unwrap();
            assert_eq!(sys.name(), name);
            assert_eq!(default_initial_state(name).unwrap().dim(), sys.dim());
        }
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = problem("foo", &ProblemParams::default()).err().unwrap().to_string();
        for name in PROBLEM_NAMES {
            assert!(err.contains(name), "{err}");
        }
    }
}
