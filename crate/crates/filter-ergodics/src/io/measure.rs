//! JSON form of empirical lift measures:
//! `{"lift": "pair"|"triple", "atoms": [{"nu": [...], "x": opt, "y": label,
//! "w": weight}], "meta": {"seed", "burn_in", "samples"}}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FilterState;
use crate::lift::{EmpiricalLiftMeasure, LiftAtomPair, LiftAtomTriple, LiftAtoms};
use crate::model::StateSpace;

#[derive(Debug, Serialize, Deserialize)]
struct MeasureFile {
    lift: String,
    atoms: Vec<AtomFile>,
    meta: MetaFile,
}

#[derive(Debug, Serialize, Deserialize)]
struct AtomFile {
    nu: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<String>,
    y: String,
    w: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaFile {
    seed: u64,
    burn_in: usize,
    samples: usize,
}

pub fn measure_to_json(space: &StateSpace, measure: &EmpiricalLiftMeasure) -> String {
    let (lift, atoms) = match &measure.atoms {
        LiftAtoms::Pair(atoms) => (
            "pair",
            atoms
                .iter()
                .map(|a| AtomFile {
                    nu: a.nu.probs().to_vec(),
                    x: None,
                    y: space.observed_labels()[a.y].clone(),
                    w: a.weight,
                })
                .collect::<Vec<_>>(),
        ),
        LiftAtoms::Triple(atoms) => (
            "triple",
            atoms
                .iter()
                .map(|a| AtomFile {
                    nu: a.nu.probs().to_vec(),
                    x: Some(space.hidden_labels()[a.x].clone()),
                    y: space.observed_labels()[a.y].clone(),
                    w: a.weight,
                })
                .collect::<Vec<_>>(),
        ),
    };
    let file = MeasureFile {
        lift: lift.into(),
        atoms,
        meta: MetaFile {
            seed: measure.seed,
            burn_in: measure.burn_in,
            samples: measure.sample_count,
        },
    };
    serde_json::to_string(&file).expect("measure serializes")
}

pub fn measure_from_json(space: &StateSpace, text: &str) -> Result<EmpiricalLiftMeasure> {
    let file: MeasureFile = serde_json::from_str(text)?;
    let atoms = match file.lift.as_str() {
        "pair" => LiftAtoms::Pair(
            file.atoms
                .iter()
                .map(|a| {
                    Ok(LiftAtomPair {
                        nu: FilterState::new(a.nu.clone())?,
                        y: space.observed_index(&a.y)?,
                        weight: a.w,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        "triple" => LiftAtoms::Triple(
            file.atoms
                .iter()
                .map(|a| {
                    let x = a
                        .x
                        .as_ref()
                        .ok_or_else(|| Error::ModelFile("triple atom missing x".into()))?;
                    Ok(LiftAtomTriple {
                        nu: FilterState::new(a.nu.clone())?,
                        x: space.hidden_index(x)?,
                        y: space.observed_index(&a.y)?,
                        weight: a.w,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        other => {
            return Err(Error::ModelFile(format!(
                "unknown lift kind {other:?} (expected \"pair\" or \"triple\")"
            )))
        }
    };
    Ok(EmpiricalLiftMeasure {
        atoms,
        sample_count: file.meta.samples,
        burn_in: file.meta.burn_in,
        seed: file.meta.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_measure_round_trips() {
        let space = StateSpace::new(vec!["a", "b"], vec!["0", "1"]).unwrap();
        let measure = EmpiricalLiftMeasure {
            atoms: LiftAtoms::Pair(vec![
                LiftAtomPair {
                    nu: FilterState::new(vec![0.25, 0.75]).unwrap(),
                    y: 1,
                    weight: 0.5,
                },
                LiftAtomPair {
                    nu: FilterState::uniform(2),
                    y: 0,
                    weight: 0.5,
                },
            ]),
            sample_count: 2,
            burn_in: 0,
            seed: 9,
        };
        let text = measure_to_json(&space, &measure);
        let back = measure_from_json(&space, &text).unwrap();
        let atoms = back.pair_atoms().unwrap();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[0].y, 1);
        assert_eq!(atoms[0].nu.probs(), &[0.25, 0.75]);
        assert_eq!(back.seed, 9);
    }

    #[test]
    fn triple_measure_round_trips() {
        let space = StateSpace::new(vec!["a", "b"], vec!["0", "1"]).unwrap();
        let measure = EmpiricalLiftMeasure {
            atoms: LiftAtoms::Triple(vec![LiftAtomTriple {
                nu: FilterState::point_mass(2, 1),
                x: 1,
                y: 0,
                weight: 1.0,
            }]),
            sample_count: 1,
            burn_in: 3,
            seed: 4,
        };
        let text = measure_to_json(&space, &measure);
        let back = measure_from_json(&space, &text).unwrap();
        let atoms = back.triple_atoms().unwrap();
        assert_eq!(atoms[0].x, 1);
        assert_eq!(back.burn_in, 3);
    }
}
