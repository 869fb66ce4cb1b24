use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::circuit::lineage_in;
use super::wmc::{wmc, OracleConfig, TupleWeighting};
use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::logic::{CompiledSentence, Formula, TupleIndex, WeightedVocabulary};

/// Declares the sentence's relations that `vocab` lacks, with unit weights.
pub fn covering_vocab(sentence: &Formula, vocab: &WeightedVocabulary) -> Result<WeightedVocabulary> {
    let mut v = vocab.clone();
    v.extend_unit(&sentence.relations())?;
    Ok(v)
}

/// `WFOMC(sentence, n, w, wbar)` as the WMC of the lineage. Every relation of
/// the sentence must be declared; undeclared-but-unused vocabulary relations
/// still contribute `(w + wbar)^(n^arity)`.
pub fn brute_wfomc(
    sentence: &Formula,
    n: usize,
    vocab: &WeightedVocabulary,
    config: &OracleConfig,
) -> Result<Rational> {
    let g = lineage_in(sentence, n, vocab)?;
    let weights = TupleWeighting::symmetric(vocab, &g.universe)?;
    wmc(&g, &weights, config)
}

/// FOMC over the vocabulary's relations, ignoring its weights.
pub fn count_models(
    sentence: &Formula,
    n: usize,
    vocab: &WeightedVocabulary,
    config: &OracleConfig,
) -> Result<BigInt> {
    let g = lineage_in(sentence, n, vocab)?;
    let weights = TupleWeighting::unit(&g.universe);
    let q = wmc(&g, &weights, config)?;
    Ok(q.to_integer())
}

/// FOMC by evaluating the sentence on every structure over `Tup(n)`.
pub fn count_models_direct(
    sentence: &Formula,
    n: usize,
    vocab: &WeightedVocabulary,
    config: &OracleConfig,
) -> Result<BigInt> {
    let index = TupleIndex::new(vocab.relations().iter().map(|r| r.symbol.clone()), n)?;
    check_structure_cap(&index, config)?;
    let compiled = CompiledSentence::new(sentence, &index)?;
    let mut count = 0u64;
    for_each_structure(&index, |bits| {
        if compiled.eval(bits) {
            count += 1;
        }
    });
    Ok(BigInt::from(count))
}

/// WFOMC by evaluating the sentence on every structure, summing
/// `W(D) = prod_true w * prod_false wbar`.
pub fn wfomc_direct(
    sentence: &Formula,
    n: usize,
    vocab: &WeightedVocabulary,
    config: &OracleConfig,
) -> Result<Rational> {
    let index = TupleIndex::new(vocab.relations().iter().map(|r| r.symbol.clone()), n)?;
    check_structure_cap(&index, config)?;
    let compiled = CompiledSentence::new(sentence, &index)?;
    let weights = TupleWeighting::symmetric(vocab, &index)?;
    let mut acc = Rational::zero();
    for_each_structure(&index, |bits| {
        if compiled.eval(bits) {
            let mut w = Rational::one();
            for t in 0..index.len() {
                let (wt, wf) = weights.weight(&index, t);
                w *= if crate::logic::structure::bit(bits, t) { wt } else { wf };
            }
            acc += w;
        }
    });
    Ok(acc)
}

pub(crate) fn check_structure_cap(index: &TupleIndex, config: &OracleConfig) -> Result<()> {
    if index.len() > config.cap {
        return Err(Error::ResourceCap {
            what: "ground tuples to enumerate",
            limit: config.cap,
            actual: index.len(),
        });
    }
    Ok(())
}

/// Calls `visit` on the bitset of every structure over `index`.
pub(crate) fn for_each_structure(index: &TupleIndex, mut visit: impl FnMut(&[u64])) {
    let k = index.len();
    assert!(k < 64, "structure enumeration beyond 63 tuples");
    let mut bits = [0u64];
    for mask in 0..(1u64 << k) {
        bits[0] = mask;
        visit(&bits);
    }
}
