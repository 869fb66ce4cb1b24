use std::collections::BTreeSet;

use crate::arith::Rational;
use crate::error::Result;
use crate::logic::{Formula, RelationSymbol, WeightedVocabulary};

use super::{Introduced, Role};

/// Hands out relation names `<prefix>1, <prefix>2, ...` that clash neither
/// with the vocabulary nor with any relation of the given formulas.
#[derive(Debug)]
pub struct FreshNames {
    taken: BTreeSet<String>,
}

impl FreshNames {
    pub fn new<'a>(vocab: &WeightedVocabulary, formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut taken: BTreeSet<String> =
            vocab.relations().iter().map(|r| r.symbol.name.clone()).collect();
        for f in formulas {
            taken.extend(f.relations().into_keys());
        }
        FreshNames { taken }
    }

    pub fn name(&mut self, prefix: &str) -> String {
        let name = (1..)
            .map(|i| format!("{prefix}{i}"))
            .find(|c| !self.taken.contains(c))
            .unwrap();
        self.taken.insert(name.clone());
        name
    }

    /// `preferred` if free, else a numbered variant of it.
    pub fn name_like(&mut self, preferred: &str) -> String {
        if self.taken.insert(preferred.to_string()) {
            return preferred.to_string();
        }
        self.name(&format!("{preferred}_"))
    }

    /// Declares a fresh relation in `vocab` and records it.
    #[allow(clippy::too_many_arguments)]
    pub fn declare(
        &mut self,
        prefix: &str,
        arity: usize,
        w: Rational,
        wbar: Rational,
        role: Role,
        vocab: &mut WeightedVocabulary,
        introduced: &mut Vec<Introduced>,
    ) -> Result<String> {
        let name = self.name(prefix);
        vocab.add(name.clone(), arity, w, wbar)?;
        introduced.push(Introduced {
            symbol: RelationSymbol::new(name.clone(), arity),
            role,
        });
        Ok(name)
    }
}
