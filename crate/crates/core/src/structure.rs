//! Layer-level structure: commuting different layers, stratifications, the commuting-layer
//! decomposition into powers of step ≤ 2 stratified algebras, and non-standard Heisenberg quotients.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{direct_sum_many, GroupSpec, StructureConstants};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{fmt_rational, int, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerDecomposition {
    /// Weight (as "p/q") → 1-based basis indices.
    pub layers: BTreeMap<String, Vec<usize>>,
}

pub fn layer_decomposition(alg: &StructureConstants) -> LayerDecomposition {
    let mut layers: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (w, r) in alg.layers() {
        layers.entry(fmt_rational(&w)).or_default().extend(r.map(|i| i + 1));
    }
    LayerDecomposition { layers }
}

/// Nonzero bracket `[X_i, X_j]` between layers `t ≠ s` (indices 1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerWitness {
    pub t: String,
    pub s: String,
    pub x_index: usize,
    pub y_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationVerdict {
    pub commuting_different_layers: bool,
    pub witness: Option<LayerWitness>,
    pub verdict: String,
}

fn ensure_valid(alg: &StructureConstants) -> Result<()> {
    let r = alg.validate();
    if r.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidAlgebra(format!("{:?}", r.violations)))
    }
}

/// Lexicographically first basis pair with distinct weights and a nonzero bracket.
fn first_cross_layer_pair(alg: &StructureConstants) -> Option<(usize, usize)> {
    let w = alg.weights();
    alg.terms().iter().filter(|t| w[t.i] != w[t.j] && !t.c.is_zero()).map(|t| (t.i, t.j)).min()
}

pub fn has_commuting_different_layers(alg: &StructureConstants) -> Result<ClassificationVerdict> {
    ensure_valid(alg)?;
    Ok(match first_cross_layer_pair(alg) {
        None => ClassificationVerdict {
            commuting_different_layers: true,
            witness: None,
            verdict: "layers of different degrees commute: the group carries continuous homogeneous \
                      quasi-distances with the Besicovitch covering property"
                .into(),
        },
        Some((i, j)) => {
            let w = alg.weights();
            ClassificationVerdict {
                commuting_different_layers: false,
                witness: Some(LayerWitness {
                    t: fmt_rational(&w[i]),
                    s: fmt_rational(&w[j]),
                    x_index: i + 1,
                    y_index: j + 1,
                }),
                verdict: format!(
                    "[V_{}, V_{}] is nonzero: no continuous homogeneous quasi-distance on the group \
                     has the Besicovitch covering property",
                    fmt_rational(&w[i]),
                    fmt_rational(&w[j])
                ),
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratificationReport {
    pub is_stratification: bool,
    /// Dimensions of V₁, [V₁,V₁], [V₁,V₂], … as generated.
    pub layer_dims: Vec<usize>,
    pub reason: Option<String>,
}

impl StratificationReport {
    fn fail(layer_dims: Vec<usize>, reason: String) -> Self {
        Self { is_stratification: false, layer_dims, reason: Some(reason) }
    }
}

/// Whether the given grading is a stratification: weights are exactly 1..s and `[V₁,V_j] = V_{j+1}`.
pub fn is_stratification(alg: &StructureConstants) -> StratificationReport {
    let ws = alg.distinct_weights();
    let dims: Vec<usize> = ws.iter().map(|w| alg.layer_indices(w).len()).collect();
    for (k, w) in ws.iter().enumerate() {
        if *w != int(k as i64 + 1) {
            return StratificationReport::fail(dims, format!("layer weights are not 1..s (found {})", fmt_rational(w)));
        }
    }
    let v1 = alg.layer_indices(&int(1));
    for j in 1..ws.len() {
        let vj = alg.layer_indices(&int(j as i64));
        let brackets: Matrix =
            v1.iter().flat_map(|&a| vj.iter().map(move |&b| (a, b))).map(|(a, b)| alg.basis_bracket(a, b)).collect();
        let r = linalg::rank(&brackets);
        if r != dims[j] {
            return StratificationReport::fail(
                dims.clone(),
                format!("[V_1, V_{j}] has dimension {r} but V_{} has dimension {}", j + 1, dims[j]),
            );
        }
    }
    StratificationReport { is_stratification: true, layer_dims: dims, reason: None }
}

/// Whether `span(candidate)` generates a stratification: V_{k+1} = [V₁, V_k] must give a direct sum equal to the algebra.
pub fn generates_stratification(alg: &StructureConstants, candidate: &[Vec<Rational>]) -> StratificationReport {
    let n = alg.dim();
    let (v1, _) = linalg::rref(candidate);
    let mut layers: Vec<Matrix> = vec![v1.clone()];
    while layers.len() <= n {
        let last = layers.last().expect("nonempty");
        let next: Matrix =
            v1.iter().flat_map(|a| last.iter().map(move |b| (a, b))).map(|(a, b)| alg.bracket_q(a, b)).collect();
        let (basis, _) = linalg::rref(&next);
        if basis.is_empty() {
            break;
        }
        layers.push(basis);
    }
    let dims: Vec<usize> = layers.iter().map(Vec::len).collect();
    let total: usize = dims.iter().sum();
    let all: Matrix = layers.concat();
    let r = linalg::rank(&all);
    if r != total {
        return StratificationReport::fail(dims, format!("generated layers overlap (sum of dims {total}, span {r})"));
    }
    if r != n {
        return StratificationReport::fail(dims, format!("generated layers span {r} of {n} dimensions"));
    }
    StratificationReport { is_stratification: true, layer_dims: dims, reason: None }
}

/// A linear map between graded algebras, `target_dim × source_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct MorphismMatrix {
    pub source: StructureConstants,
    pub target: StructureConstants,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorphismViolation {
    Shape {
        rows: usize,
        cols: usize,
    },
    /// Source basis index (1-based) mapped outside its layer.
    Layer {
        index: usize,
    },
    /// φ[e_i, e_j] ≠ [φ e_i, φ e_j] (1-based).
    Bracket {
        i: usize,
        j: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismReport {
    pub violations: Vec<MorphismViolation>,
    pub rank: usize,
    pub surjective: bool,
    pub injective: bool,
}

impl MorphismReport {
    pub fn is_morphism(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_morphism() && self.surjective && self.injective
    }
}

pub fn validate_morphism(m: &MorphismMatrix) -> MorphismReport {
    let (tn, sn) = (m.target.dim(), m.source.dim());
    if m.matrix.len() != tn || m.matrix.iter().any(|r| r.len() != sn) {
        return MorphismReport {
            violations: vec![MorphismViolation::Shape {
                rows: m.matrix.len(),
                cols: m.matrix.first().map_or(0, Vec::len),
            }],
            rank: 0,
            surjective: false,
            injective: false,
        };
    }
    let mut violations = Vec::new();
    let cols = linalg::transpose(&m.matrix);
    for (i, col) in cols.iter().enumerate() {
        let w = &m.source.weights()[i];
        if col.iter().enumerate().any(|(r, c)| !c.is_zero() && &m.target.weights()[r] != w) {
            violations.push(MorphismViolation::Layer { index: i + 1 });
        }
    }
    for i in 0..sn {
        for j in i + 1..sn {
            let lhs = linalg::mat_vec(&m.matrix, &m.source.basis_bracket(i, j));
            let rhs = m.target.bracket_q(&cols[i], &cols[j]);
            if lhs != rhs {
                violations.push(MorphismViolation::Bracket { i: i + 1, j: j + 1 });
            }
        }
    }
    let rank = linalg::rank(&m.matrix);
    MorphismReport { violations, rank, surjective: rank == tn, injective: rank == sn }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    /// Power t: the factor's weights (1 and possibly 2) are multiplied by t inside the input.
    pub power: Rational,
    pub algebra: StructureConstants,
    /// Images of the factor's basis vectors in the input's coordinates.
    pub embedding: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutingDecomposition {
    pub factors: Vec<Factor>,
    /// Graded direct sum of the t-powers of the factors.
    pub assembled: StructureConstants,
    /// Isomorphism from `assembled` onto the input.
    pub isomorphism: MorphismMatrix,
}

pub fn decompose_commuting(alg: &StructureConstants) -> Result<CommutingDecomposition> {
    let verdict = has_commuting_different_layers(alg)?;
    if !verdict.commuting_different_layers {
        return Err(Error::Classification(format!("layers do not commute: {}", verdict.verdict)));
    }
    let n = alg.dim();
    // Remaining homogeneous vectors (weight, coordinates).
    let mut rest: Vec<(Rational, Vec<Rational>)> =
        (0..n).map(|i| (alg.weights()[i].clone(), linalg::unit(n, i))).collect();
    let mut factors = Vec::new();
    while !rest.is_empty() {
        let t1 = rest.iter().map(|(w, _)| w.clone()).min().expect("nonempty");
        let v: Matrix = rest.iter().filter(|(w, _)| *w == t1).map(|(_, x)| x.clone()).collect();
        rest.retain(|(w, _)| *w != t1);
        let brackets: Matrix = (0..v.len())
            .flat_map(|a| (a + 1..v.len()).map(move |b| (a, b)))
            .map(|(a, b)| alg.bracket_q(&v[a], &v[b]))
            .collect();
        let (d, _) = linalg::rref(&brackets);
        let (k, m) = (v.len(), d.len());
        let mut weights = vec![int(1); k];
        weights.extend(std::iter::repeat_n(int(2), m));
        let mut map: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
        for a in 0..k {
            for b in a + 1..k {
                let br = alg.bracket_q(&v[a], &v[b]);
                let coords = linalg::coordinates_in(&d, &br).expect("bracket lies in its own span");
                let terms: Vec<(usize, Rational)> =
                    coords.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(l, c)| (k + l, c)).collect();
                if !terms.is_empty() {
                    map.insert((a, b), terms);
                }
            }
        }
        let factor_alg = StructureConstants::new(weights, map)?;
        let mut embedding = v.clone();
        embedding.extend(d.iter().cloned());
        factors.push(Factor { power: t1.clone(), algebra: factor_alg, embedding });
        if !d.is_empty() {
            let w2 = &t1 * int(2);
            let ambient: Matrix = rest.iter().filter(|(w, _)| *w == w2).map(|(_, x)| x.clone()).collect();
            let complement = linalg::orthogonal_complement_in(&d, &ambient);
            rest.retain(|(w, _)| *w != w2);
            rest.extend(complement.into_iter().map(|x| (w2.clone(), x)));
        }
    }
    let powered: Vec<StructureConstants> = factors.iter().map(|f| f.algebra.scaled(&f.power)).collect::<Result<_>>()?;
    let refs: Vec<&StructureConstants> = powered.iter().collect();
    let (assembled, origin) = direct_sum_many(&refs);
    let columns: Matrix = origin.iter().map(|&(f, i)| factors[f].embedding[i].clone()).collect();
    let isomorphism =
        MorphismMatrix { source: assembled.clone(), target: alg.clone(), matrix: linalg::transpose(&columns) };
    Ok(CommutingDecomposition { factors, assembled, isomorphism })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergWitness {
    /// Basis of the generated subalgebra ĝ in the input's coordinates; the first three are X₁, X₂, [X₁, X₂].
    pub subalgebra_basis: Matrix,
    pub subalgebra: StructureConstants,
    /// Surjection ĝ → t-power of the non-standard Heisenberg algebra of exponent s/t.
    pub morphism: MorphismMatrix,
    pub t: Rational,
    pub s: Rational,
}

pub fn heisenberg_quotient_witness(alg: &StructureConstants) -> Result<HeisenbergWitness> {
    ensure_valid(alg)?;
    let (i, j) = first_cross_layer_pair(alg)
        .ok_or_else(|| Error::Classification("layers of different degrees commute: no witness".into()))?;
    let n = alg.dim();
    let (t, s) = (alg.weights()[i].clone(), alg.weights()[j].clone());
    let x1 = linalg::unit(n, i);
    let x2 = linalg::unit(n, j);
    let x3 = alg.bracket_q(&x1, &x2);
    let mut basis: Vec<(Rational, Vec<Rational>)> = vec![(t.clone(), x1), (s.clone(), x2), (&t + &s, x3)];
    // Close under brackets; every generated vector is homogeneous.
    loop {
        let mut added = false;
        let current = basis.len();
        for a in 0..current {
            for b in a + 1..current {
                let br = alg.bracket_q(&basis[a].1, &basis[b].1);
                if linalg::is_zero_vec(&br) {
                    continue;
                }
                let mut rows: Matrix = basis.iter().map(|(_, v)| v.clone()).collect();
                rows.push(br.clone());
                if linalg::rank(&rows) == basis.len() + 1 {
                    basis.push((&basis[a].0 + &basis[b].0, br));
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    basis[3..].sort_by(|x, y| x.0.cmp(&y.0));
    let vecs: Matrix = basis.iter().map(|(_, v)| v.clone()).collect();
    let m = vecs.len();
    let mut map: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
    for a in 0..m {
        for b in a + 1..m {
            let br = alg.bracket_q(&vecs[a], &vecs[b]);
            if linalg::is_zero_vec(&br) {
                continue;
            }
            let coords = linalg::coordinates_in(&vecs, &br).expect("subalgebra is closed");
            map.insert((a, b), coords.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect());
        }
    }
    let sub = StructureConstants::new(basis.iter().map(|(w, _)| w.clone()).collect(), map)?;
    let target = GroupSpec::Power(Box::new(GroupSpec::HeisenbergNonstandard(&s / &t)), t.clone()).algebra()?;
    let mut matrix = vec![vec![Rational::zero(); m]; 3];
    for (r, row) in matrix.iter_mut().enumerate() {
        row[r] = Rational::one();
    }
    let morphism = MorphismMatrix { source: sub.clone(), target, matrix };
    let report = validate_morphism(&morphism);
    if !report.is_morphism() || !report.surjective {
        return Err(Error::Classification(format!("witness morphism failed validation: {report:?}")));
    }
    Ok(HeisenbergWitness { subalgebra_basis: vecs, subalgebra: sub, morphism, t, s })
}
