//! Closed forms, the `Q_S4` recurrence and the hard-instance corpus.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{self, Rational};
use crate::error::{Error, Result};
use crate::logic::{parse_inferring, Formula, WeightedVocabulary};

pub const QS4: &str = "forall x1,x2,y1,y2. S(x1,y1) | !S(x2,y1) | S(x2,y2) | !S(x1,y2)";
/// Some row of `S` is all true.
pub const QS4_PA: &str = "exists x. forall y. S(x,y)";
/// Some column of `S` is all false.
pub const QS4_PB: &str = "exists y. forall x. !S(x,y)";

fn binom(n: u64, k: u64) -> Rational {
    Rational::from_integer(BigInt::from(arith::binomial(n, k)))
}

/// `f(n1, n2)` and `g(n1, n2)` for all `n1, n2 <= n`: the weighted counts
/// of `n1 x n2` matrices satisfying `Q_S4` together with `P_a`, resp. `P_b`.
#[derive(Clone, Debug)]
pub struct Qs4Table {
    pub w: Rational,
    pub wbar: Rational,
    f: Vec<Vec<Rational>>,
    g: Vec<Vec<Rational>>,
}

impl Qs4Table {
    pub fn new(n: usize, w: Rational, wbar: Rational) -> Self {
        let mut f = vec![vec![Rational::zero(); n + 1]; n + 1];
        let mut g = vec![vec![Rational::zero(); n + 1]; n + 1];
        for row in f.iter_mut() {
            row[0] = Rational::one();
        }
        g[0].iter_mut().for_each(|x| *x = Rational::one());
        for total in 1..=2 * n {
            for n1 in total.saturating_sub(n)..=total.min(n) {
                let n2 = total - n1;
                if n1 >= 1 && n2 >= 1 {
                    let mut s = Rational::zero();
                    for k in 1..=n1 {
                        s += binom(n1 as u64, k as u64)
                            * arith::pow(&w, (k * n2) as u64)
                            * &g[n1 - k][n2];
                    }
                    f[n1][n2] = s;
                    let mut s = Rational::zero();
                    for l in 1..=n2 {
                        s += binom(n2 as u64, l as u64)
                            * arith::pow(&wbar, (n1 * l) as u64)
                            * &f[n1][n2 - l];
                    }
                    g[n1][n2] = s;
                }
            }
        }
        Qs4Table { w, wbar, f, g }
    }

    pub fn f(&self, n1: usize, n2: usize) -> &Rational {
        &self.f[n1][n2]
    }

    pub fn g(&self, n1: usize, n2: usize) -> &Rational {
        &self.g[n1][n2]
    }
}

/// Weighted count of `Q_S4` over a domain of size `n`, with `S` weighted
/// `(w, wbar)`.
pub fn wfomc_qs4(n: usize, w: &Rational, wbar: &Rational) -> Rational {
    if n == 0 {
        // f(0,0) and g(0,0) both count the single empty world
        return Rational::one();
    }
    let t = Qs4Table::new(n, w.clone(), wbar.clone());
    t.f(n, n) + t.g(n, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    ExistsS,
    ForallExistsR,
    Table1Fomc,
    Table1Wfomc,
}

impl ClosedForm {
    pub const ALL: [ClosedForm; 4] = [
        ClosedForm::ExistsS,
        ClosedForm::ForallExistsR,
        ClosedForm::Table1Fomc,
        ClosedForm::Table1Wfomc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosedForm::ExistsS => "exists_S",
            ClosedForm::ForallExistsR => "forall_exists_R",
            ClosedForm::Table1Fomc => "table1_fomc",
            ClosedForm::Table1Wfomc => "table1_wfomc",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::Invalid(format!("unknown closed form `{name}`")))
    }

    /// The sentence this closed form counts.
    pub fn sentence(self) -> &'static str {
        match self {
            ClosedForm::ExistsS => "exists y. S(y)",
            ClosedForm::ForallExistsR => "forall x. exists y. R(x,y)",
            ClosedForm::Table1Fomc | ClosedForm::Table1Wfomc => "forall x,y. R(x) | S(x,y) | T(y)",
        }
    }

    /// Weights are read from `vocab`; missing symbols weigh `(1, 1)`.
    /// `Table1Fomc` ignores weights.
    pub fn evaluate(self, n: u64, vocab: &WeightedVocabulary) -> Rational {
        let weight = |name: &str| match vocab.get(name) {
            Some(r) => (r.w.clone(), r.wbar.clone()),
            None => (Rational::one(), Rational::one()),
        };
        match self {
            ClosedForm::ExistsS => {
                let (w, wb) = weight("S");
                arith::pow(&(&w + &wb), n) - arith::pow(&wb, n)
            }
            ClosedForm::ForallExistsR => {
                let (w, wb) = weight("R");
                arith::pow(&(arith::pow(&(&w + &wb), n) - arith::pow(&wb, n)), n)
            }
            ClosedForm::Table1Fomc => {
                let mut s = Rational::zero();
                for k in 0..=n {
                    for m in 0..=n {
                        s += binom(n, k) * binom(n, m) * arith::pow(&arith::int(2), n * n - k * m);
                    }
                }
                s
            }
            ClosedForm::Table1Wfomc => {
                let (wr, wbr) = weight("R");
                let (ws, wbs) = weight("S");
                let (wt, wbt) = weight("T");
                let cs = &ws + &wbs;
                let mut s = Rational::zero();
                for k in 0..=n {
                    for m in 0..=n {
                        let w_km = arith::pow(&wr, n - k)
                            * arith::pow(&wbr, k)
                            * arith::pow(&ws, k * m)
                            * arith::pow(&cs, n * n - k * m)
                            * arith::pow(&wt, n - m)
                            * arith::pow(&wbt, m);
                        s += binom(n, k) * binom(n, m) * w_km;
                    }
                }
                s
            }
        }
    }
}

pub fn closed_form(name: &str, n: u64, vocab: &WeightedVocabulary) -> Result<Rational> {
    Ok(ClosedForm::from_name(name)?.evaluate(n, vocab))
}

/// `(name, source)` of the corpus sentences for which no lifted algorithm
/// is known.
pub const CORPUS: [(&str, &str); 8] = [
    ("untyped_triangles", include_str!("../data/corpus/untyped_triangles.fol")),
    ("typed_triangles", include_str!("../data/corpus/typed_triangles.fol")),
    ("k_cycle_3", include_str!("../data/corpus/k_cycle_3.fol")),
    ("k_cycle_4", include_str!("../data/corpus/k_cycle_4.fol")),
    ("k_cycle_5", include_str!("../data/corpus/k_cycle_5.fol")),
    ("transitivity", include_str!("../data/corpus/transitivity.fol")),
    ("homophily", include_str!("../data/corpus/homophily.fol")),
    ("extension_axiom", include_str!("../data/corpus/extension_axiom.fol")),
];

pub fn benchmark_corpus() -> Vec<(&'static str, Formula)> {
    CORPUS
        .iter()
        .map(|(name, text)| {
            let (phi, _) = parse_inferring(text).expect("bundled corpus parses");
            (*name, phi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};
    use crate::ground::{brute_wfomc, count_models, OracleConfig};

    #[test]
    fn small_values() {
        assert_eq!(wfomc_qs4(0, &int(1), &int(1)), int(1));
        assert_eq!(wfomc_qs4(1, &int(3), &ratio(-1, 2)), ratio(5, 2));
        assert_eq!(wfomc_qs4(2, &int(1), &int(1)), int(14));
        let t = Qs4Table::new(1, int(3), int(5));
        assert_eq!((t.f(1, 1), t.g(1, 1)), (&int(3), &int(5)));
    }

    #[test]
    fn matches_oracle() {
        let (phi, syms) = parse_inferring(QS4).unwrap();
        let cfg = OracleConfig::default();
        for n in 0..=3 {
            assert_eq!(
                Rational::from_integer(count_models(&phi, n, &WeightedVocabulary::unit(syms.clone()).unwrap(), &cfg).unwrap()),
                wfomc_qs4(n, &int(1), &int(1))
            );
        }
        let mut v = WeightedVocabulary::unit(syms).unwrap();
        v.set_weights("S", int(2), int(-3)).unwrap();
        for n in 1..=2 {
            assert_eq!(brute_wfomc(&phi, n, &v, &cfg).unwrap(), wfomc_qs4(n, &int(2), &int(-3)));
        }
    }

    #[test]
    fn closed_forms() {
        let mut v = WeightedVocabulary::new();
        v.add("S", 1, int(2), int(1)).unwrap();
        assert_eq!(closed_form("exists_S", 3, &v).unwrap(), int(26));
        assert_eq!(closed_form("forall_exists_R", 2, &v).unwrap(), int(9));
        assert_eq!(closed_form("table1_fomc", 2, &v).unwrap(), int(161));
        assert_eq!(closed_form("table1_wfomc", 2, &WeightedVocabulary::new()).unwrap(), int(161));
        assert!(closed_form("nope", 2, &v).is_err());
    }

    #[test]
    fn corpus_parses() {
        let c = benchmark_corpus();
        assert_eq!(c.len(), 8);
        assert_eq!(
            c.iter().find(|(n, _)| *n == "transitivity").unwrap().1.to_string(),
            "forall x. forall y. forall z. E(x,y) & E(y,z) -> E(x,z)"
        );
    }
}
