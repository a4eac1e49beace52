//! Sweep files for the `bounds` subcommand.

use mqlab::greens::{EnergySpec, MinorSweep};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(rename = "N")]
    pub ns: Vec<usize>,
    pub lambda: Vec<f64>,
    /// Absolute energies.
    #[serde(default, rename = "E")]
    pub energies: Option<Vec<f64>>,
    /// Exponents `t` with `E = λ^t`.
    #[serde(default, rename = "E_powers")]
    pub energy_powers: Option<Vec<f64>>,
    /// Explicit phases for the minor check.
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    /// Number of seeded uniform phases, used when `x` is absent.
    #[serde(default)]
    pub phase_samples: Option<usize>,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    4096
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sweep: Self = serde_path_to_error::deserialize(de).map_err(|e| format!("{}: {}", e.path(), e.inner()))?;
        if sweep.ns.is_empty() || sweep.ns.contains(&0) {
            return Err("N: list must be nonempty and positive".into());
        }
        if sweep.lambda.is_empty() {
            return Err("lambda: list must be nonempty".into());
        }
        match (&sweep.energies, &sweep.energy_powers) {
            (Some(e), None) | (None, Some(e)) if !e.is_empty() => {}
            _ => return Err("E: give exactly one nonempty list of E or E_powers".into()),
        }
        if matches!(&sweep.x, Some(x) if x.is_empty()) || sweep.phase_samples == Some(0) {
            return Err("x: phase list must be nonempty".into());
        }
        Ok(sweep)
    }

    pub fn energy_spec(&self) -> EnergySpec {
        match (&self.energies, &self.energy_powers) {
            (Some(e), _) => EnergySpec::Absolute(e.clone()),
            (None, Some(t)) => EnergySpec::LambdaPowers(t.clone()),
            (None, None) => unreachable!("checked in parse"),
        }
    }

    pub fn phases(&self, seed: u64) -> Vec<f64> {
        match &self.x {
            Some(x) => x.clone(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..self.phase_samples.unwrap_or(16)).map(|_| rng.random::<f64>()).collect()
            }
        }
    }

    pub fn minor_sweep(&self, seed: u64) -> MinorSweep {
        MinorSweep { ns: self.ns.clone(), lambdas: self.lambda.clone(), energies: self.energy_spec(), phases: self.phases(seed) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_phases_repeat() {
        let s = SweepFile::parse(r#"{"N":[4],"lambda":[10],"E":[1],"phase_samples":5}"#).unwrap();
        assert_eq!(s.phases(3), s.phases(3));
        assert_ne!(s.phases(3), s.phases(4));
    }

    #[test]
    fn errors_name_the_field() {
        let e = SweepFile::parse(r#"{"N":[4],"lambda":["a"],"E":[1]}"#).unwrap_err();
        assert!(e.starts_with("lambda[0]"), "{e}");
        assert!(SweepFile::parse(r#"{"N":[4],"lambda":[1],"E":[1],"E_powers":[1]}"#).is_err());
    }
}
