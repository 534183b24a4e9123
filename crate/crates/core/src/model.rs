//! JSON model files.
//!
//! ```json
//! {
//!   "name": "birth_death",
//!   "species": ["X"],
//!   "channels": [
//!     { "name": "birth", "stoich": [-1],
//!       "propensity": { "mass_action": { "rate": 5.0, "reactants": [0] } } },
//!     { "name": "death", "stoich": [1],
//!       "propensity": { "mass_action": { "rate": 0.05, "reactants": [1] } } }
//!   ],
//!   "initial_state": [50],
//!   "split": { "first": [0], "second": [1] }
//! }
//! ```
//!
//! Stoichiometric columns follow the library convention: firing channel
//! `r` maps `x` to `x - stoich`, so births carry negative entries.
//! `reactants` are the mass-action multiplicities; the propensity is
//! `rate · Π x_i(x_i - 1)…(x_i - m_i + 1)`.
//!
//! Optional sections: `description`, `weights` (the vector `l`),
//! `stop_threshold` (freeze once `lᵀx` exceeds it), `mesh` and a free-form
//! `parameters` map. Custom propensities use a named form:
//!
//! ```json
//! { "custom": { "form": "michaelis_menten", "vmax": 2.0, "km": 10.0, "species": 0 } }
//! { "custom": { "form": "hill", "vmax": 2.0, "k": 10.0, "n": 2.0, "species": 0 } }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{SimOptions, StopRule};
use crate::network::{Channel, Propensity, ReactionNetwork, SplitPartition, State, WeightVector};
use crate::spatial::Mesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub species: Vec<String>,
    pub channels: Vec<ChannelSpec>,
    pub initial_state: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub stoich: Vec<i64>,
    pub propensity: PropensitySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PropensitySpec {
    MassAction { rate: f64, reactants: Vec<u32> },
    Custom(CustomForm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum CustomForm {
    /// `vmax · x / (km + x)`.
    MichaelisMenten { vmax: f64, km: f64, species: usize },
    /// `vmax · xⁿ / (kⁿ + xⁿ)`.
    Hill {
        vmax: f64,
        k: f64,
        n: f64,
        species: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

/// `edges` are undirected; each becomes two directed diffusion links with
/// rate `diffusion[i] / spacing²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub cells: usize,
    pub edges: Vec<(usize, usize)>,
    pub diffusion: Vec<f64>,
    #[serde(default = "unit_spacing")]
    pub spacing: f64,
}

fn unit_spacing() -> f64 {
    1.0
}

/// A validated model ready for simulation.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub network: ReactionNetwork,
    pub initial_state: State,
    pub weights: WeightVector,
    pub partition: Option<SplitPartition>,
    pub stop_threshold: Option<f64>,
    pub mesh: Option<Mesh>,
    pub parameters: BTreeMap<String, f64>,
}

impl Model {
    /// Simulation options carrying the model's stop rule, if any.
    pub fn sim_options(&self) -> SimOptions {
        let options = SimOptions::default();
        match self.stop_threshold {
            Some(threshold) => options.with_stop(StopRule {
                weights: self.weights.clone(),
                threshold,
            }),
            None => options,
        }
    }

    pub fn parameter(&self, key: &str) -> Result<f64> {
        self.parameters
            .get(key)
            .copied()
            .ok_or_else(|| Error::Model(format!("model {} has no parameter {key:?}", self.name)))
    }

    /// The model's partition, or an error naming the model.
    pub fn require_partition(&self) -> Result<&SplitPartition> {
        self.partition
            .as_ref()
            .ok_or_else(|| Error::Model(format!("model {} defines no split", self.name)))
    }
}

fn custom_propensity(form: &CustomForm, species: usize) -> Result<Propensity> {
    let check = |s: usize| {
        if s < species {
            Ok(())
        } else {
            Err(Error::Model(format!(
                "custom propensity refers to species {s}, model has {species}"
            )))
        }
    };
    Ok(match *form {
        CustomForm::MichaelisMenten {
            vmax,
            km,
            species: s,
        } => {
            check(s)?;
            if !(vmax >= 0.0 && km > 0.0) {
                return Err(Error::Model(
                    "michaelis_menten needs vmax >= 0 and km > 0".into(),
                ));
            }
            Propensity::custom(
                format!("michaelis_menten(vmax={vmax}, km={km}, x{s})"),
                move |x| {
                    let v = x[s] as f64;
                    vmax * v / (km + v)
                },
            )
        }
        CustomForm::Hill {
            vmax,
            k,
            n,
            species: s,
        } => {
            check(s)?;
            if !(vmax >= 0.0 && k > 0.0 && n > 0.0) {
                return Err(Error::Model("hill needs vmax >= 0, k > 0 and n > 0".into()));
            }
            Propensity::custom(format!("hill(vmax={vmax}, k={k}, n={n}, x{s})"), move |x| {
                let v = (x[s] as f64).powf(n);
                vmax * v / (k.powf(n) + v)
            })
        }
    })
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        ModelFile::from_json(&text).map_err(|e| match e {
            Error::Model(m) => Error::Model(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }

    pub fn build(&self) -> Result<Model> {
        let d = self.species.len();
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let propensity = match &c.propensity {
                    PropensitySpec::MassAction { rate, reactants } => {
                        Propensity::mass_action(*rate, reactants.clone())
                    }
                    PropensitySpec::Custom(form) => custom_propensity(form, d)?,
                };
                let ch = Channel::new(c.stoich.clone(), propensity);
                Ok(match &c.name {
                    Some(n) => ch.named(n.clone()),
                    None => ch,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let network =
            ReactionNetwork::new(d, channels)?.with_species_names(self.species.clone())?;
        if self.initial_state.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.initial_state.len(),
            });
        }
        let weights = match &self.weights {
            Some(w) => {
                if w.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: w.len(),
                    });
                }
                WeightVector::new(w.clone())?
            }
            None => WeightVector::ones(d),
        };
        let partition = self
            .split
            .as_ref()
            .map(|s| {
                SplitPartition::new(network.channel_count(), s.first.clone(), s.second.clone())
            })
            .transpose()?;
        if let Some(p) = self.stop_threshold {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Model(format!(
                    "stop_threshold must be positive, got {p}"
                )));
            }
        }
        let mesh = self
            .mesh
            .as_ref()
            .map(|m| {
                if m.diffusion.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: m.diffusion.len(),
                    });
                }
                if !(m.spacing.is_finite() && m.spacing > 0.0) {
                    return Err(Error::Model(format!(
                        "mesh spacing must be positive, got {}",
                        m.spacing
                    )));
                }
                let rates: Vec<f64> = m
                    .diffusion
                    .iter()
                    .map(|q| q / (m.spacing * m.spacing))
                    .collect();
                Mesh::from_edges(m.cells, &m.edges, &rates)
            })
            .transpose()?;
        Ok(Model {
            name: self.name.clone(),
            network,
            initial_state: State::new(self.initial_state.clone()),
            weights,
            partition,
            stop_threshold: self.stop_threshold,
            mesh,
            parameters: self.parameters.clone(),
        })
    }
}

/// Names of the bundled models.
pub const BUILTIN_MODELS: [&str; 4] = ["birth_death", "dimerization", "bimolecular", "illposed"];

/// Source text of a bundled model file.
pub fn builtin_source(name: &str) -> Result<&'static str> {
    Ok(match name {
        "birth_death" => include_str!("../models/birth_death.json"),
        "dimerization" => include_str!("../models/dimerization.json"),
        "bimolecular" => include_str!("../models/bimolecular.json"),
        "illposed" => include_str!("../models/illposed.json"),
        other => {
            return Err(Error::Model(format!(
                "unknown builtin model {other:?}; expected one of {BUILTIN_MODELS:?}"
            )))
        }
    })
}

/// A bundled model, parsed and built.
pub fn builtin(name: &str) -> Result<Model> {
    ModelFile::from_json(builtin_source(name)?)?.build()
}

/// Loads a bundled model by name or a model file by path.
pub fn load_model(name_or_path: &str) -> Result<Model> {
    if BUILTIN_MODELS.contains(&name_or_path) {
        builtin(name_or_path)
    } else {
        ModelFile::load(name_or_path)?.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn birth_death_golden() {
        let m = builtin("birth_death").unwrap();
        let net = &m.network;
        assert_eq!(net.species_count(), 1);
        assert_eq!(net.stoich_column(0), &[-1]);
        assert_eq!(net.stoich_column(1), &[1]);
        assert_eq!(net.propensities(&[50]), vec![5.0, 2.5]);
        assert_eq!(net.propensities(&[0]), vec![5.0, 0.0]);
        assert_eq!(m.initial_state.counts(), &[50]);
        let p = m.partition.as_ref().unwrap();
        assert_eq!((p.first(), p.second()), (&[0usize][..], &[1usize][..]));
        assert_eq!(m.parameter("k").unwrap(), 5.0);
        assert_eq!(m.parameter("mu").unwrap(), 0.05);
    }

    #[test]
    fn dimerization_golden() {
        let m = builtin("dimerization").unwrap();
        let nu = m.parameter("nu").unwrap();
        assert_eq!(nu, 2.5e-4);
        // Equilibrium mean sqrt(k / (2 nu)) matches birth-death's k / mu.
        assert!(((5.0 / (2.0 * nu)).sqrt() - 100.0).abs() < 1e-9);
        assert_eq!(m.network.stoich_column(1), &[2]);
        assert!((m.network.propensity(1, &[2]) - 5e-4).abs() < 1e-18);
        assert!((m.network.propensity(1, &[100]) - nu * 100.0 * 99.0).abs() < 1e-12);
        assert_eq!(m.network.propensity(1, &[1]), 0.0);
    }

    #[test]
    fn bimolecular_golden() {
        let m = builtin("bimolecular").unwrap();
        let net = &m.network;
        assert_eq!(net.species_count(), 2);
        let cols: Vec<&[i64]> = (0..3).map(|r| net.stoich_column(r)).collect();
        assert_eq!(cols, vec![&[-1, 0][..], &[0, -1][..], &[1, 1][..]]);
        assert_eq!(net.propensities(&[3, 4]), vec![5.0, 5.0, 0.005 * 12.0]);
        let p = m.partition.as_ref().unwrap();
        assert_eq!((p.first(), p.second()), (&[0usize, 1][..], &[2usize][..]));
    }

    #[test]
    fn illposed_golden() {
        let m = builtin("illposed").unwrap();
        let net = &m.network;
        assert_eq!(net.propensities(&[3]), vec![10.0, 3.0, 3.0, 6.0]);
        let cols: Vec<i64> = (0..4).map(|r| net.stoich_column(r)[0]).collect();
        assert_eq!(cols, vec![-1, 2, 2, -1]);
        // Net drift 10 - x(x-1)(x-2); the second group alone has none.
        let drift = |x: u64, group: &[usize]| -> f64 {
            group
                .iter()
                .map(|&r| -(net.stoich_column(r)[0] as f64) * net.propensity(r, &[x]))
                .sum()
        };
        for x in 3..50u64 {
            let cubic = (x * (x - 1) * (x - 2)) as f64;
            assert!((drift(x, &[0, 1, 2, 3]) - (10.0 - cubic)).abs() < 1e-9);
            assert_eq!(drift(x, &[2, 3]), 0.0);
        }
        assert_eq!(m.stop_threshold, Some(1000.0));
        assert_eq!(m.initial_state.counts(), &[10]);
        assert!(m.sim_options().stop.is_some());
    }

    #[test]
    fn bundled_files_round_trip() {
        for name in BUILTIN_MODELS {
            let file = ModelFile::from_json(builtin_source(name).unwrap()).unwrap();
            let again = ModelFile::from_json(&file.to_json()).unwrap();
            assert_eq!(file, again, "{name}");
            again.build().unwrap();
        }
    }

    #[test]
    fn custom_forms() {
        let text = r#"{
            "name": "enzymes",
            "species": ["S", "P"],
            "channels": [
                { "stoich": [1, -1], "propensity": { "custom": { "form": "michaelis_menten", "vmax": 2.0, "km": 10.0, "species": 0 } } },
                { "stoich": [0, 1], "propensity": { "custom": { "form": "hill", "vmax": 3.0, "k": 2.0, "n": 2.0, "species": 1 } } }
            ],
            "initial_state": [10, 2]
        }"#;
        let m = ModelFile::from_json(text).unwrap().build().unwrap();
        assert_eq!(m.network.propensities(&[10, 2]), vec![1.0, 1.5]);
        assert_eq!(m.network.propensity(0, &[0, 5]), 0.0);
        assert!(m.partition.is_none());
        assert!(m.sim_options().stop.is_none());
    }

    #[test]
    fn mesh_section() {
        let text = r#"{
            "name": "line",
            "species": ["A"],
            "channels": [ { "stoich": [-1], "propensity": { "mass_action": { "rate": 1.0, "reactants": [0] } } } ],
            "initial_state": [0],
            "mesh": { "cells": 3, "edges": [[0, 1], [1, 2]], "diffusion": [0.5], "spacing": 0.5 }
        }"#;
        let m = ModelFile::from_json(text).unwrap().build().unwrap();
        let mesh = m.mesh.unwrap();
        assert_eq!(mesh.cells(), 3);
        assert_eq!(mesh.links().len(), 4);
        assert_eq!(mesh.rate(0, 1, 0), 2.0);
        assert_eq!(mesh.rate(0, 2, 0), 0.0);
    }

    #[test]
    fn rejects_bad_files() {
        let base = r#"{"name":"x","species":["A"],"channels":[{"stoich":[-1],"propensity":{"mass_action":{"rate":1.0,"reactants":[0]}}}],"initial_state":[0]"#;
        assert!(ModelFile::from_json(&format!("{base}}}"))
            .unwrap()
            .build()
            .is_ok());
        for extra in [
            r#","bogus":1"#,
            r#","weights":[0.5]"#,
            r#","split":{"first":[0],"second":[0]}"#,
            r#","stop_threshold":-1"#,
            r#","mesh":{"cells":2,"edges":[[0,5]],"diffusion":[1.0]}"#,
        ] {
            let parsed = ModelFile::from_json(&format!("{base}{extra}}}"));
            assert!(parsed.and_then(|f| f.build()).is_err(), "{extra}");
        }
        let wrong_dim = base.replace(r#""initial_state":[0]"#, r#""initial_state":[0,1]"#);
        assert!(ModelFile::from_json(&format!("{wrong_dim}}}"))
            .unwrap()
            .build()
            .is_err());
        assert!(builtin("nope").is_err());
    }
}
