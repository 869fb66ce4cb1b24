use std::collections::BTreeMap;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{self, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        RelationSymbol {
            name: name.into(),
            arity,
        }
    }
}

/// A relation together with its symmetric weight pair: `w` for every true
/// ground tuple, `wbar` for every false one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedRelation {
    pub symbol: RelationSymbol,
    pub w: Rational,
    pub wbar: Rational,
}

/// Relational vocabulary with exact weights. Declaration order is kept and
/// is the order used when enumerating ground tuples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightedVocabulary {
    relations: Vec<WeightedRelation>,
    index: BTreeMap<String, usize>,
}

impl WeightedVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// All relations weighted `(1, 1)`, i.e. plain model counting.
    pub fn unit(symbols: impl IntoIterator<Item = RelationSymbol>) -> Result<Self> {
        let mut v = Self::new();
        for s in symbols {
            v.add(s.name, s.arity, Rational::one(), Rational::one())?;
        }
        Ok(v)
    }

    pub fn add(
        &mut self,
        name: impl Into<String>,
        arity: usize,
        w: Rational,
        wbar: Rational,
    ) -> Result<()> {
        let name = name.into();
        if !is_relation_name(&name) {
            return Err(Error::Invalid(format!(
                "`{name}` is not a valid relation name (must start with an uppercase letter)"
            )));
        }
        if self.index.contains_key(&name) {
            return Err(Error::Invalid(format!("relation `{name}` declared twice")));
        }
        self.index.insert(name.clone(), self.relations.len());
        self.relations.push(WeightedRelation {
            symbol: RelationSymbol { name, arity },
            w,
            wbar,
        });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&WeightedRelation> {
        self.index.get(name).map(|&i| &self.relations[i])
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.get(name).map(|r| r.symbol.arity)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn relations(&self) -> &[WeightedRelation] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn set_weights(&mut self, name: &str, w: Rational, wbar: Rational) -> Result<()> {
        let i = self
            .position(name)
            .ok_or_else(|| Error::UndeclaredSymbol(name.to_string()))?;
        self.relations[i].w = w;
        self.relations[i].wbar = wbar;
        Ok(())
    }

    /// Declares every relation of `used` that is missing, with unit weights,
    /// and checks arities of the ones already present.
    pub fn extend_unit(&mut self, used: &BTreeMap<String, usize>) -> Result<()> {
        for (name, &arity) in used {
            match self.arity(name) {
                Some(a) if a != arity => {
                    return Err(Error::ArityMismatch {
                        name: name.clone(),
                        expected: a,
                        found: arity,
                    })
                }
                Some(_) => {}
                None => self.add(name.clone(), arity, Rational::one(), Rational::one())?,
            }
        }
        Ok(())
    }

    /// `|Tup(n)|`, the number of ground tuples over a domain of size `n`.
    pub fn tuple_count(&self, n: u64) -> Option<u64> {
        self.relations.iter().try_fold(0u64, |acc, r| {
            n.checked_pow(r.symbol.arity as u32)
                .and_then(|c| acc.checked_add(c))
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightsFile = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("weights file: {e}")))?;
        let mut v = Self::new();
        for r in file.relations {
            v.add(
                r.name,
                r.arity,
                arith::parse_rational(&r.w)?,
                arith::parse_rational(&r.wbar)?,
            )?;
        }
        Ok(v)
    }

    pub fn to_json(&self) -> String {
        let file = WeightsFile {
            relations: self
                .relations
                .iter()
                .map(|r| RelationEntry {
                    name: r.symbol.name.clone(),
                    arity: r.symbol.arity,
                    w: arith::render(&r.w),
                    wbar: arith::render(&r.wbar),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("weights serialize")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    relations: Vec<RelationEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationEntry {
    name: String,
    arity: usize,
    w: String,
    wbar: String,
}

pub fn is_relation_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
