//! Quotient quasi-distances induced by a surjective graded morphism Ĝ → G.
//!
//! In exponential coordinates the fiber over g is ŷ + ker φ. For a Euclidean-ball unit ball the
//! minimum over the fiber is attained at the minimum-norm lift, because the kernel is graded and the
//! lift is orthogonal to it layer by layer; other inner distances are minimized numerically.

use std::sync::Arc;

use crate::algebra::GradedGroup;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{rational_to_f64, Rational};
use crate::structure::{validate_morphism, MorphismMatrix};

use super::QuasiDistance;

#[derive(Clone, Debug)]
pub struct QuotientDistance {
    pub source: Arc<GradedGroup>,
    pub target: Arc<GradedGroup>,
    pub inner: Box<QuasiDistance>,
    pub morphism: MorphismMatrix,
    /// Exact min-norm lift matrix (source_dim × target_dim).
    lift: Matrix,
    lift_f: Vec<Vec<f64>>,
    /// Orthonormal kernel basis, each vector homogeneous of the given weight.
    kernel: Vec<(f64, Vec<f64>)>,
    /// Half-width factor of the search box: the box is `box_scale · D^w` per kernel direction.
    box_scale: f64,
}

impl QuotientDistance {
    pub fn new(inner: QuasiDistance, target: Arc<GradedGroup>, matrix: Matrix) -> Result<Self> {
        let source = inner.group().ok_or_else(|| Error::Input("quotient needs a group-based inner distance".into()))?;
        let morphism = MorphismMatrix { source: source.algebra().clone(), target: target.algebra().clone(), matrix };
        let report = validate_morphism(&morphism);
        if !report.is_morphism() {
            return Err(Error::Input(format!("not a graded morphism: {:?}", report.violations)));
        }
        if !report.surjective {
            return Err(Error::Input("quotient morphism is not surjective".into()));
        }
        let (sn, tn) = (source.dim(), target.dim());
        let mut lift = vec![vec![Rational::from_integer(0.into()); tn]; sn];
        let mut kernel = Vec::new();
        for w in source.algebra().distinct_weights() {
            let si = source.algebra().layer_indices(&w);
            let ti = target.algebra().layer_indices(&w);
            let block: Matrix =
                ti.iter().map(|&r| si.iter().map(|&c| morphism.matrix[r][c].clone()).collect()).collect();
            // Min-norm right inverse of the block: Aᵀ (A Aᵀ)⁻¹, column by column.
            for (col, &t) in ti.iter().enumerate() {
                let e = linalg::unit(ti.len(), col);
                let x = linalg::min_norm_solution(&block, &e, si.len())
                    .ok_or_else(|| Error::Input("layer block is not onto".into()))?;
                for (k, &s) in si.iter().enumerate() {
                    lift[s][t] = x[k].clone();
                }
            }
            let null = if block.is_empty() { linalg::identity(si.len()) } else { linalg::nullspace(&block, si.len()) };
            let wf = rational_to_f64(&w);
            let mut ortho: Vec<Vec<f64>> = Vec::new();
            for v in null {
                let mut full = vec![0.0; sn];
                for (k, &s) in si.iter().enumerate() {
                    full[s] = rational_to_f64(&v[k]);
                }
                for u in &ortho {
                    let d: f64 = full.iter().zip(u).map(|(a, b)| a * b).sum();
                    for (a, b) in full.iter_mut().zip(u) {
                        *a -= d * b;
                    }
                }
                let n = full.iter().map(|a| a * a).sum::<f64>().sqrt();
                full.iter_mut().for_each(|a| *a /= n);
                ortho.push(full);
            }
            kernel.extend(ortho.into_iter().map(|v| (wf, v)));
        }
        let lift_f = lift.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect();
        let box_scale = match &inner {
            QuasiDistance::Hs { r, .. } => rational_to_f64(r),
            _ => 4.0,
        };
        Ok(Self { source, target, inner: Box::new(inner), morphism, lift, lift_f, kernel, box_scale })
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    pub fn lift_f64(&self, y: &[f64]) -> Vec<f64> {
        self.lift_f.iter().map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn lift_exact(&self, y: &[Rational]) -> Vec<Rational> {
        linalg::mat_vec(&self.lift, y)
    }

    fn point_at(&self, lift: &[f64], c: &[f64]) -> Vec<f64> {
        let mut x = lift.to_vec();
        for (ci, (_, k)) in c.iter().zip(&self.kernel) {
            for (xi, ki) in x.iter_mut().zip(k) {
                *xi += ci * ki;
            }
        }
        x
    }

    /// d̂(ê, lift + Σ c_i k_i).
    pub fn fiber_objective(&self, lift: &[f64], c: &[f64]) -> Result<f64> {
        self.inner.norm(&self.point_at(lift, c))
    }

    /// Half-widths of the kernel box that contains every fiber point at least as close as the lift.
    pub fn box_half_widths(&self, lift: &[f64]) -> Result<Vec<f64>> {
        let d0 = self.inner.norm(lift)?;
        Ok(self.kernel.iter().map(|(w, _)| self.box_scale * d0.powf(*w)).collect())
    }

    /// Norm of g ∈ G: minimum over the fiber.
    pub fn norm(&self, y: &[f64]) -> Result<f64> {
        let lift = self.lift_f64(y);
        if self.kernel.is_empty() || matches!(*self.inner, QuasiDistance::Hs { .. }) {
            return self.inner.norm(&lift);
        }
        Ok(self.minimize(&lift)?.0)
    }

    /// Multistart Nelder–Mead over kernel coordinates (8 starts, first at the min-norm lift).
    pub fn minimize(&self, lift: &[f64]) -> Result<(f64, Vec<f64>)> {
        let m = self.kernel.len();
        let f0 = self.inner.norm(lift)?;
        if m == 0 || f0 == 0.0 {
            return Ok((f0, vec![0.0; m]));
        }
        let h = self.box_half_widths(lift)?;
        let mut best = (f0, vec![0.0; m]);
        for s in 0..8 {
            let start: Vec<f64> = if s == 0 {
                vec![0.0; m]
            } else {
                (0..m).map(|i| h[i] * (2.0 * halton(s, PRIMES[i % PRIMES.len()]) - 1.0)).collect()
            };
            let f = |c: &[f64]| -> f64 {
                if c.iter().zip(&h).any(|(ci, hi)| ci.abs() > *hi) {
                    return f64::INFINITY;
                }
                self.fiber_objective(lift, c).unwrap_or(f64::INFINITY)
            };
            let (v, c) = nelder_mead(&f, &start, &h.iter().map(|x| 0.25 * x).collect::<Vec<_>>(), 1e-12 * f0, 2000);
            if v < best.0 {
                best = (v, c);
            }
        }
        Ok(best)
    }

    /// Brute-force minimum over a `res`-point-per-axis grid on the kernel box (test oracle).
    pub fn grid_minimum(&self, y: &[f64], res: usize) -> Result<f64> {
        let lift = self.lift_f64(y);
        let m = self.kernel.len();
        if m == 0 {
            return self.inner.norm(&lift);
        }
        let h = self.box_half_widths(&lift)?;
        let total = res.pow(m as u32);
        let mut best = f64::INFINITY;
        let mut c = vec![0.0; m];
        for idx in 0..total {
            let mut rem = idx;
            for (i, ci) in c.iter_mut().enumerate() {
                let k = rem % res;
                rem /= res;
                *ci = -h[i] + 2.0 * h[i] * k as f64 / (res - 1) as f64;
            }
            best = best.min(self.fiber_objective(&lift, &c)?);
        }
        Ok(best)
    }
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn halton(mut i: u64, base: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Derivative-free simplex minimization.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: &[f64], ftol: f64, max_iter: usize) -> (f64, Vec<f64>) {
    let n = x0.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((f(x0), x0.to_vec()));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += if step[i] != 0.0 { step[i] } else { 1e-3 };
        simplex.push((f(&x), x));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        if (simplex[n].0 - simplex[0].0).abs() <= ftol {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(_, x)| x[j]).sum::<f64>() / n as f64).collect();
        let along =
            |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n].1[j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].0 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
        } else {
            let xc = if fr < simplex[n].0 { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < simplex[n].0.min(fr) {
                simplex[n] = (fc, xc);
            } else {
                let best = simplex[0].1.clone();
                for (fv, x) in simplex.iter_mut().skip(1) {
                    for j in 0..n {
                        x[j] = best[j] + 0.5 * (x[j] - best[j]);
                    }
                    *fv = f(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (v, x) = simplex.swap_remove(0);
    (v, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let (v, x) = nelder_mead(&f, &[0.0, 0.0], &[0.5, 0.5], 1e-14, 5000);
        assert!(v < 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 2.0).abs() < 1e-4);
    }

    #[test]
    fn halton_in_unit_interval() {
        for i in 1..50 {
            let h = halton(i, 3);
            assert!((0.0..1.0).contains(&h));
        }
    }
}
