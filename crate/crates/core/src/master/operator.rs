//! Closed flavor as differential operators on `S(V)[ħ]`: a key with words
//! `J`, `I` acts as `ħ^χ a_J ∂_{i_n} ⋯ ∂_{i_1}` with left derivatives.

use std::collections::BTreeMap;

use crate::frobenius::{ClosedFrobenius, ClosedGenerator};
use crate::linear::{add_term, int, is_odd, LinComb, Rational};
use crate::properad::sort_sign;

use super::{assemble, CoinvKey, Coinv, MasterReport, ResidualTerm, Spaces, Truncation};

/// A monomial `ħ^χ a_K` with `K` sorted.
type Mono = (i64, Vec<usize>);

/// Normal-ordered terms `(χ, J, I) ↦ c`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffOperator {
    pub terms: BTreeMap<(i64, Vec<usize>, Vec<usize>), Rational>,
}

struct Algebra<'a> {
    degs: &'a [i64],
}

impl Algebra<'_> {
    /// `a_J · a_K`, sorted, or `None` when an odd variable repeats.
    fn mul(&self, j: &[usize], k: &[usize]) -> Option<(Vec<usize>, i32)> {
        let word: Vec<usize> = j.iter().chain(k).copied().collect();
        let degs: Vec<i64> = word.iter().map(|&i| self.degs[i]).collect();
        let s = sort_sign(&word, &degs);
        let mut sorted = word;
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1] && is_odd(self.degs[w[0]])) {
            return None;
        }
        Some((sorted, s))
    }

    /// Left derivative `∂_i a_K`.
    fn deriv(&self, i: usize, k: &[usize]) -> Vec<(Vec<usize>, i32)> {
        let mut prefix = 0;
        let mut out = Vec::new();
        for (p, &x) in k.iter().enumerate() {
            if x == i {
                let mut rest = k.to_vec();
                rest.remove(p);
                out.push((rest, if is_odd(self.degs[i] * prefix) { -1 } else { 1 }));
            }
            prefix += self.degs[x];
        }
        out
    }

    fn apply_term(&self, (chi, j, i): &(i64, Vec<usize>, Vec<usize>), c: &Rational, x: &LinComb<Mono>, out: &mut LinComb<Mono>) {
        for ((chi0, k), v) in x {
            let mut cur: LinComb<Vec<usize>> = [(k.clone(), int(1))].into_iter().collect();
            for &idx in i {
                let mut next = LinComb::new();
                for (w, a) in &cur {
                    for (r, s) in self.deriv(idx, w) {
                        add_term(&mut next, r, a * int(s as i64));
                    }
                }
                cur = next;
            }
            for (w, a) in cur {
                if let Some((r, s)) = self.mul(j, &w) {
                    add_term(out, (chi0 + chi, r), a * v * c * int(s as i64));
                }
            }
        }
    }

    fn apply(&self, op: &DiffOperator, x: &LinComb<Mono>) -> LinComb<Mono> {
        let mut out = LinComb::new();
        for (t, c) in &op.terms {
            self.apply_term(t, c, x, &mut out);
        }
        out
    }
}

impl DiffOperator {
    /// `O_L − D` for a closed operator on one color.
    pub fn from_closed(spaces: &Spaces, l: &Coinv<ClosedGenerator>) -> Self {
        let mut terms = BTreeMap::new();
        for (k, c) in l {
            let j = k.gen.outputs.iter().map(|x| k.deco[x]).collect();
            let i = k.gen.inputs.iter().map(|x| k.deco[x]).collect();
            add_term(&mut terms, (k.gen.chi, j, i), c.clone());
        }
        for (&(t, s), c) in spaces.colors[0].matrix() {
            add_term(&mut terms, (0, vec![t], vec![s]), -c.clone());
        }
        Self { terms }
    }
}

fn monomials(degs: &[i64], max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            let start = w.last().copied().unwrap_or(0);
            for i in start..degs.len() {
                if w.last() == Some(&i) && is_odd(degs[i]) {
                    continue;
                }
                let mut v: Vec<usize> = w.clone();
                v.push(i);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn factorial_weight(k: &[usize]) -> Rational {
    let mut w = int(1);
    let mut run = 0i64;
    for (p, &x) in k.iter().enumerate() {
        run = if p > 0 && k[p - 1] == x { run + 1 } else { 1 };
        w *= int(run);
    }
    w
}

/// Normal-ordered symbol of `Q²` for `Q = O_L − D`, read off from its
/// action on every monomial with at most `n_max` factors.
pub fn operator_symbol(spaces: &Spaces, l: &Coinv<ClosedGenerator>, n_max: usize) -> DiffOperator {
    let degs = spaces.colors[0].basis().degrees();
    let alg = Algebra { degs };
    let q = DiffOperator::from_closed(spaces, l);
    let mut symbol = DiffOperator::default();
    // Monomials come in increasing length, so lower-order parts of the
    // symbol are known before they are subtracted.
    for k in monomials(degs, n_max) {
        let x: LinComb<Mono> = [((0, k.clone()), int(1))].into_iter().collect();
        let mut r = alg.apply(&q, &alg.apply(&q, &x));
        let known = alg.apply(&symbol, &x);
        for (m, c) in known {
            add_term(&mut r, m, -c);
        }
        let w = factorial_weight(&k);
        for ((chi, j), c) in r {
            add_term(&mut symbol.terms, (chi, j, k.clone()), c / &w);
        }
    }
    symbol
}

/// The closed master equation as `(O_L − D)² = 0`.
pub fn operator_square_check(spaces: &Spaces, l: &Coinv<ClosedGenerator>, t: &Truncation) -> MasterReport {
    let symbol = operator_symbol(spaces, l, t.n_max);
    let mut residual = LinComb::new();
    let mut d_squared = Vec::new();
    for ((chi, j, i), c) in symbol.terms {
        if chi == 0 {
            d_squared.push(ResidualTerm { generator: "d²[color 0]".into(), outputs: j, inputs: i, coeff: c });
            continue;
        }
        add_term(&mut residual, CoinvKey::closed(&j, &i, chi), c);
    }
    assemble(&ClosedFrobenius::default(), &residual, d_squared, t)
}
