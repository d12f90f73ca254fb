use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StructureConstants;
use crate::error::{Error, Result};
use crate::scalar::{fmt_rational, parse_rational, Rational};

/// On-disk algebra description; indices are 1-based, rationals are strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub dim: usize,
    pub weights: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<TermEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub k: usize,
    pub c: String,
}

pub fn algebra_from_json(text: &str) -> Result<StructureConstants> {
    let file: AlgebraFile = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    file.to_constants()
}

pub fn algebra_to_json(alg: &StructureConstants) -> String {
    serde_json::to_string_pretty(&AlgebraFile::from_constants(alg)).expect("serializable")
}

impl AlgebraFile {
    pub fn to_constants(&self) -> Result<StructureConstants> {
        if self.weights.len() != self.dim {
            return Err(Error::Input(format!("dim is {} but {} weights were given", self.dim, self.weights.len())));
        }
        let weights = self.weights.iter().map(|w| parse_rational(w)).collect::<Result<Vec<_>>>()?;
        let one_based = |x: usize, what: &str| {
            if x == 0 || x > self.dim {
                Err(Error::Input(format!("{what} index {x} out of range 1..={}", self.dim)))
            } else {
                Ok(x - 1)
            }
        };
        let mut map: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
        for b in &self.brackets {
            let key = (one_based(b.i, "bracket")?, one_based(b.j, "bracket")?);
            let entry = map.entry(key).or_default();
            for t in &b.terms {
                entry.push((one_based(t.k, "term")?, parse_rational(&t.c)?));
            }
        }
        StructureConstants::new(weights, map)
    }

    pub fn from_constants(alg: &StructureConstants) -> Self {
        AlgebraFile {
            dim: alg.dim(),
            weights: alg.weights().iter().map(fmt_rational).collect(),
            brackets: alg
                .terms_map()
                .into_iter()
                .map(|((i, j), terms)| BracketEntry {
                    i: i + 1,
                    j: j + 1,
                    terms: terms.into_iter().map(|(k, c)| TermEntry { k: k + 1, c: fmt_rational(&c) }).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{builtin_group, GroupSpec};

    #[test]
    fn heisenberg_file() {
        let text = r#"{"dim": 3, "weights": ["1","1","2"], "brackets": [{"i":1,"j":2,"terms":[{"k":3,"c":"1"}]}]}"#;
        let alg = algebra_from_json(text).unwrap();
        assert!(alg.validate().is_valid());
        assert_eq!(&alg, builtin_group(&GroupSpec::Heisenberg(1)).unwrap().algebra());
    }

    #[test]
    fn round_trip() {
        let g = builtin_group(&GroupSpec::GradedVsStratified).unwrap();
        let back = algebra_from_json(&algebra_to_json(g.algebra())).unwrap();
        assert_eq!(&back, g.algebra());
    }

    #[test]
    fn bad_index() {
        let text = r#"{"dim": 2, "weights": ["1","1"], "brackets": [{"i":1,"j":3,"terms":[]}]}"#;
        assert!(matches!(algebra_from_json(text), Err(Error::Input(_))));
    }
}
