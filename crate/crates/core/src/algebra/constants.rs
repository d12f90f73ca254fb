use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{fmt_rational, lcm_of_denominators, rational_to_f64, Rational, Scalar};

use super::AlgebraVector;

/// 0-based basis indices (i, j) of a bracket [X_i, X_j].
pub type BasisPair = (usize, usize);

/// One compiled bracket term `c · (a_i b_j − a_j b_i) → e_k` with `i < j`.
#[derive(Clone, Debug)]
pub struct Term {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: Rational,
    pub cf: f64,
}

/// A graded Lie algebra given by structure constants in an adapted basis (0-based indices).
#[derive(Clone, Debug)]
pub struct StructureConstants {
    dim: usize,
    weights: Vec<Rational>,
    raw: BTreeMap<(usize, usize), Vec<(usize, Rational)>>,
    terms: Vec<Term>,
    weight_den: u64,
    scaled_weights: Vec<u64>,
    weights_f: Vec<f64>,
}

impl PartialEq for StructureConstants {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.weights == other.weights && self.terms_map() == other.terms_map()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Indices are 1-based in reports.
    Antisymmetry {
        i: usize,
        j: usize,
        k: usize,
    },
    Jacobi {
        i: usize,
        j: usize,
        l: usize,
        k: usize,
    },
    Grading {
        i: usize,
        j: usize,
        k: usize,
    },
    Nilpotency,
    BasisOrder {
        index: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl StructureConstants {
    /// Brackets are keyed by 0-based `(i, j)`; missing antisymmetric partners are implied.
    pub fn new(weights: Vec<Rational>, brackets: BTreeMap<(usize, usize), Vec<(usize, Rational)>>) -> Result<Self> {
        let dim = weights.len();
        if dim == 0 {
            return Err(Error::Input("dimension must be at least 1".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::Input(format!("weights must be positive, got {}", fmt_rational(w))));
        }
        for (&(i, j), terms) in &brackets {
            if i >= dim || j >= dim {
                return Err(Error::Input(format!("bracket index ({}, {}) out of range", i + 1, j + 1)));
            }
            if let Some((k, _)) = terms.iter().find(|(k, _)| *k >= dim) {
                return Err(Error::Input(format!("bracket term index {} out of range", k + 1)));
            }
        }
        let raw: BTreeMap<_, Vec<(usize, Rational)>> =
            brackets.into_iter().map(|(key, terms)| (key, merge_terms(terms))).filter(|(_, t)| !t.is_empty()).collect();
        let den = lcm_of_denominators(weights.iter());
        let weight_den = den.to_u64().ok_or_else(|| Error::Input("weight denominators too large".into()))?;
        let scaled_weights = weights
            .iter()
            .map(|w| {
                (w * Rational::from_integer(den.clone()))
                    .to_integer()
                    .to_u64()
                    .ok_or_else(|| Error::Input("weights too large".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let weights_f = weights.iter().map(rational_to_f64).collect();
        let mut sc = StructureConstants { dim, weights, raw, terms: Vec::new(), weight_den, scaled_weights, weights_f };
        sc.terms = sc.compile();
        Ok(sc)
    }

    /// Build from a map that already lists each unordered pair once.
    pub fn from_pairs(weights: Vec<Rational>, pairs: Vec<(BasisPair, Vec<(usize, Rational)>)>) -> Result<Self> {
        Self::new(weights, pairs.into_iter().collect())
    }

    fn compile(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for (k, c) in self.constant_pair(i, j) {
                    out.push(Term { i, j, k, cf: rational_to_f64(&c), c });
                }
            }
        }
        out
    }

    /// Effective `[e_i, e_j]` as (k, c) pairs, preferring the `(i, j)` entry.
    fn constant_pair(&self, i: usize, j: usize) -> Vec<(usize, Rational)> {
        if let Some(t) = self.raw.get(&(i, j)) {
            t.clone()
        } else if let Some(t) = self.raw.get(&(j, i)) {
            t.iter().map(|(k, c)| (*k, -c.clone())).collect()
        } else {
            Vec::new()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Common denominator `q` of the weights.
    pub fn weight_denominator(&self) -> u64 {
        self.weight_den
    }

    /// Weights multiplied by the common denominator.
    pub fn scaled_weights(&self) -> &[u64] {
        &self.scaled_weights
    }

    pub fn weights_f64(&self) -> &[f64] {
        &self.weights_f
    }

    pub fn has_integer_weights(&self) -> bool {
        self.weight_den == 1
    }

    /// Sparse map of the compiled constants, `(i, j) -> [(k, c)]` with `i < j`.
    pub fn terms_map(&self) -> BTreeMap<(usize, usize), Vec<(usize, Rational)>> {
        let mut m: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
        for t in &self.terms {
            m.entry((t.i, t.j)).or_default().push((t.k, t.c.clone()));
        }
        m
    }

    /// `[e_i, e_j]` as a dense rational vector.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim];
        if i == j {
            return v;
        }
        let (a, b, s) = if i < j { (i, j, Rational::one()) } else { (j, i, -Rational::one()) };
        for t in self.terms.iter().filter(|t| t.i == a && t.j == b) {
            v[t.k] += &s * &t.c;
        }
        v
    }

    pub fn bracket<S: Scalar>(&self, a: &AlgebraVector<S>, b: &AlgebraVector<S>) -> Result<AlgebraVector<S>> {
        check_len(self.dim, a.len())?;
        check_len(self.dim, b.len())?;
        Ok(AlgebraVector::new(self.bracket_slices(a.as_slice(), b.as_slice())))
    }

    pub(crate) fn bracket_slices<S: Scalar>(&self, a: &[S], b: &[S]) -> Vec<S> {
        let mut out = vec![S::additive_zero(); self.dim];
        for t in &self.terms {
            let x = a[t.i].clone() * b[t.j].clone() - a[t.j].clone() * b[t.i].clone();
            if !x.is_exact_zero() {
                let v = out[t.k].clone() + x.scale(&t.c, t.cf);
                out[t.k] = v;
            }
        }
        out
    }

    /// Bracket of dense rational vectors.
    pub fn bracket_q(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        self.bracket_slices(a, b)
    }

    /// Layers as `(weight, index range)` in increasing weight order (adapted basis assumed).
    pub fn layers(&self) -> Vec<(Rational, std::ops::Range<usize>)> {
        let mut out: Vec<(Rational, std::ops::Range<usize>)> = Vec::new();
        for (i, w) in self.weights.iter().enumerate() {
            match out.last_mut() {
                Some((lw, r)) if lw == w => r.end = i + 1,
                _ => out.push((w.clone(), i..i + 1)),
            }
        }
        out
    }

    /// Indices of the basis vectors of weight `w`.
    pub fn layer_indices(&self, w: &Rational) -> Vec<usize> {
        (0..self.dim).filter(|&i| &self.weights[i] == w).collect()
    }

    pub fn distinct_weights(&self) -> Vec<Rational> {
        let mut ws = self.weights.clone();
        ws.sort();
        ws.dedup();
        ws
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        for i in 1..self.dim {
            if self.weights[i] < self.weights[i - 1] {
                v.push(Violation::BasisOrder { index: i + 1 });
            }
        }
        for i in 0..self.dim {
            if let Some(t) = self.raw.get(&(i, i)) {
                if let Some((k, _)) = t.first() {
                    v.push(Violation::Antisymmetry { i: i + 1, j: i + 1, k: k + 1 });
                }
            }
            for j in i + 1..self.dim {
                if let (Some(a), Some(b)) = (self.raw.get(&(i, j)), self.raw.get(&(j, i))) {
                    let mut dense = vec![Rational::zero(); self.dim];
                    for (k, c) in a.iter().chain(b.iter()) {
                        dense[*k] += c;
                    }
                    if let Some(k) = dense.iter().position(|c| !c.is_zero()) {
                        v.push(Violation::Antisymmetry { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        for t in &self.terms {
            if self.weights[t.k] != &self.weights[t.i] + &self.weights[t.j] {
                v.push(Violation::Grading { i: t.i + 1, j: t.j + 1, k: t.k + 1 });
            }
        }
        v.extend(self.jacobi_violations());
        if self.lower_central_step().is_none() {
            v.push(Violation::Nilpotency);
        }
        ValidationReport { violations: v }
    }

    fn jacobi_violations(&self) -> Vec<Violation> {
        let n = self.dim;
        let br: Vec<Vec<Vec<Rational>>> = (0..n).map(|i| (0..n).map(|j| self.basis_bracket(i, j)).collect()).collect();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    let ei = linalg::unit(n, i);
                    let ej = linalg::unit(n, j);
                    let el = linalg::unit(n, l);
                    let a = self.bracket_q(&ei, &br[j][l]);
                    let b = self.bracket_q(&ej, &br[l][i]);
                    let c = self.bracket_q(&el, &br[i][j]);
                    if let Some(k) = (0..n).find(|&k| !(&a[k] + &b[k] + &c[k]).is_zero()) {
                        out.push(Violation::Jacobi { i: i + 1, j: j + 1, l: l + 1, k: k + 1 });
                    }
                }
            }
        }
        out
    }

    /// Nilpotency step from the lower central series; `None` if it does not terminate.
    pub fn lower_central_step(&self) -> Option<usize> {
        let n = self.dim;
        let gens: Vec<Vec<Rational>> = (0..n).map(|i| linalg::unit(n, i)).collect();
        let mut current = gens.clone();
        for step in 1..=n + 1 {
            let mut next = Vec::new();
            for g in &gens {
                for c in &current {
                    let b = self.bracket_q(g, c);
                    if !linalg::is_zero_vec(&b) {
                        next.push(b);
                    }
                }
            }
            let (basis, _) = linalg::rref(&next);
            if basis.is_empty() {
                return Some(step);
            }
            current = basis;
        }
        None
    }

    /// Whether `[V_t, V_s] = 0` for the listed weights (used by several checks).
    pub fn layers_commute(&self, t: &Rational, s: &Rational) -> bool {
        self.terms.iter().all(|term| {
            let (wi, wj) = (&self.weights[term.i], &self.weights[term.j]);
            !((wi == t && wj == s) || (wi == s && wj == t))
        })
    }

    /// Same algebra with weights multiplied by `t`.
    pub fn scaled(&self, t: &Rational) -> Result<Self> {
        Self::new(self.weights.iter().map(|w| w * t).collect(), self.terms_map())
    }
}

fn merge_terms(terms: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    let mut m: BTreeMap<usize, Rational> = BTreeMap::new();
    for (k, c) in terms {
        *m.entry(k).or_insert_with(Rational::zero) += c;
    }
    m.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
