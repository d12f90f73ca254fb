//! Graded nilpotent Lie algebras and their groups in exponential coordinates of the first kind.

mod builtin;
mod constants;
mod json;

pub use builtin::{builtin_group, direct_sum, direct_sum_many, GroupSpec};
pub use constants::{StructureConstants, Term, ValidationReport, Violation};
pub use json::{algebra_from_json, algebra_to_json, AlgebraFile};

use crate::error::{Error, Result};
use crate::scalar::{rat, Backend, Rational, Scalar};
use constants::check_len;

pub fn validate_algebra(alg: &StructureConstants) -> ValidationReport {
    alg.validate()
}

pub fn bracket<S: Scalar>(
    a: &AlgebraVector<S>,
    b: &AlgebraVector<S>,
    alg: &StructureConstants,
) -> Result<AlgebraVector<S>> {
    alg.bracket(a, b)
}

macro_rules! coord_vector {
    ($name:ident, $field:ident) => {
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name<S> {
            pub $field: Vec<S>,
        }

        impl<S: Scalar> $name<S> {
            pub fn new($field: Vec<S>) -> Self {
                Self { $field }
            }
            pub fn zero(n: usize) -> Self {
                Self { $field: vec![S::additive_zero(); n] }
            }
            pub fn len(&self) -> usize {
                self.$field.len()
            }
            pub fn is_empty(&self) -> bool {
                self.$field.is_empty()
            }
            pub fn as_slice(&self) -> &[S] {
                &self.$field
            }
            pub fn backend(&self) -> Backend {
                S::BACKEND
            }
        }

        impl $name<Rational> {
            pub fn from_ints(v: &[i64]) -> Self {
                Self::new(v.iter().map(|&x| rat(x, 1)).collect())
            }
            pub fn to_f64(&self) -> $name<f64> {
                $name::new(self.$field.iter().map(Scalar::as_f64).collect())
            }
        }
    };
}

coord_vector!(AlgebraVector, coeffs);
coord_vector!(GroupPoint, coords);

/// A graded group: validated structure constants plus the nilpotency step.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedGroup {
    algebra: StructureConstants,
    step: usize,
    name: String,
}

impl GradedGroup {
    pub fn new(algebra: StructureConstants, name: impl Into<String>) -> Result<Self> {
        let report = algebra.validate();
        if !report.is_valid() {
            return Err(Error::InvalidAlgebra(format!("{:?}", report.violations)));
        }
        let step = algebra.lower_central_step().expect("validated algebras are nilpotent");
        Ok(Self { algebra, step, name: name.into() })
    }

    pub fn algebra(&self) -> &StructureConstants {
        &self.algebra
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn identity<S: Scalar>(&self) -> GroupPoint<S> {
        GroupPoint::zero(self.dim())
    }

    fn check_step(&self) -> Result<()> {
        if self.step > 3 {
            Err(Error::UnsupportedStep(self.step))
        } else {
            Ok(())
        }
    }

    /// BCH product truncated after the degree-3 terms (exact for step ≤ 3).
    pub fn multiply<S: Scalar>(&self, p: &GroupPoint<S>, q: &GroupPoint<S>) -> Result<GroupPoint<S>> {
        self.check_step()?;
        check_len(self.dim(), p.len())?;
        check_len(self.dim(), q.len())?;
        Ok(GroupPoint::new(self.mul_slices(&p.coords, &q.coords)))
    }

    pub(crate) fn mul_slices<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let half = rat(1, 2);
        let twelfth = rat(1, 12);
        let xy = self.algebra.bracket_slices(x, y);
        let mut z: Vec<S> =
            x.iter().zip(y).zip(&xy).map(|((a, b), c)| a.clone() + b.clone() + c.scale(&half, 0.5)).collect();
        if self.step >= 3 {
            let yx: Vec<S> = xy.iter().map(|v| -v.clone()).collect();
            let x_xy = self.algebra.bracket_slices(x, &xy);
            let y_yx = self.algebra.bracket_slices(y, &yx);
            for ((zi, a), b) in z.iter_mut().zip(x_xy).zip(y_yx) {
                *zi = zi.clone() + (a + b).scale(&twelfth, 1.0 / 12.0);
            }
        }
        z
    }

    /// Inverse in exponential coordinates is negation at every step.
    pub fn inverse<S: Scalar>(&self, p: &GroupPoint<S>) -> Result<GroupPoint<S>> {
        self.check_step()?;
        check_len(self.dim(), p.len())?;
        Ok(GroupPoint::new(p.coords.iter().map(|c| -c.clone()).collect()))
    }

    /// `p⁻¹ · q`.
    pub fn difference<S: Scalar>(&self, p: &GroupPoint<S>, q: &GroupPoint<S>) -> Result<GroupPoint<S>> {
        self.check_step()?;
        check_len(self.dim(), p.len())?;
        check_len(self.dim(), q.len())?;
        let neg: Vec<S> = p.coords.iter().map(|c| -c.clone()).collect();
        Ok(GroupPoint::new(self.mul_slices(&neg, &q.coords)))
    }

    /// Coordinate `i` scaled by `λ^{w_i}`. Exact only when every `λ^{w_i}` is rational.
    pub fn dilate<S: Scalar>(&self, p: &GroupPoint<S>, lambda: &S) -> Result<GroupPoint<S>> {
        check_len(self.dim(), p.len())?;
        if lambda.as_f64().is_nan() || lambda.as_f64() <= 0.0 {
            return Err(Error::Input("dilation factor must be positive".into()));
        }
        let factors = self.dilation_factors(lambda)?;
        Ok(GroupPoint::new(p.coords.iter().zip(&factors).map(|(c, f)| c.clone() * f.clone()).collect()))
    }

    pub(crate) fn dilation_factors<S: Scalar>(&self, lambda: &S) -> Result<Vec<S>> {
        let den = self.algebra.weight_denominator();
        let mut cache: Vec<(u64, S)> = Vec::new();
        self.algebra
            .scaled_weights()
            .iter()
            .map(|&w| {
                if let Some((_, f)) = cache.iter().find(|(cw, _)| *cw == w) {
                    return Ok(f.clone());
                }
                let f = S::weight_power(lambda, w, den)?;
                cache.push((w, f.clone()));
                Ok(f)
            })
            .collect()
    }

    /// Layer projection of a point onto the basis vectors of weight `w`.
    pub fn project<S: Scalar>(&self, p: &GroupPoint<S>, w: &Rational) -> Vec<S> {
        self.algebra.layer_indices(w).into_iter().map(|i| p.coords[i].clone()).collect()
    }

    pub fn is_identity<S: Scalar>(p: &GroupPoint<S>) -> bool {
        p.coords.iter().all(Scalar::is_exact_zero)
    }
}
