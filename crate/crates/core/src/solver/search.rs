//! Maximize the worst constraint eigenvalue over the equality-solution
//! space.
//!
//! The objective `h(z) = min_c lambda_min(M_c(f0 + Z z))` is concave in `z`
//! (each `M_c` is affine in `f`), so a smoothed ascent converges to the
//! global optimum. We anneal a soft-min over all constraint eigenvalues,
//! follow its gradient with backtracking line search, and finish with a
//! gradient-free compass polish on the exact objective. Multiple starts
//! with deterministic seeds guard against line-search stalls on the
//! nonsmooth ridge.

use super::constraints::ConstraintSet;
use crate::linalg::{c, CMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Multi-start budget (first start is the warm/zero point).
    pub starts: usize,
    /// Stop early once the exact objective reaches this value.
    pub early_exit_at: f64,
    /// Stop after this many consecutive starts without improvement.
    pub agreement_stop: usize,
    pub max_rounds: usize,
    pub iters_per_round: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            early_exit_at: 0.0,
            agreement_stop: 6,
            max_rounds: 6,
            iters_per_round: 80,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Best parameter vector found (full `f`, not the free coordinates).
    pub f: DVector<f64>,
    /// Exact worst eigenvalue at `f`.
    pub worst_eigenvalue: f64,
    /// Free coordinates achieving it (warm-start for neighbouring problems).
    pub z: DVector<f64>,
    pub starts_used: usize,
}

struct Objective<'a> {
    set: &'a ConstraintSet,
    f0: &'a DVector<f64>,
    basis: &'a DMatrix<f64>,
}

impl Objective<'_> {
    fn params(&self, z: &DVector<f64>) -> DVector<f64> {
        if self.basis.ncols() == 0 {
            self.f0.clone()
        } else {
            self.f0 + self.basis * z
        }
    }

    fn exact(&self, z: &DVector<f64>) -> f64 {
        let f = self.params(z);
        self.set.worst_eigenvalue(f.as_slice())
    }

    /// Soft-min value and gradient in the free coordinates.
    fn smoothed(&self, z: &DVector<f64>, beta: f64) -> (f64, DVector<f64>) {
        let f = self.params(z);
        let n_unknowns = f.len();
        let mut spectra = Vec::with_capacity(self.set.items.len());
        let mut global_min = f64::INFINITY;
        for item in &self.set.items {
            let dim = item.components[0].nrows();
            let mut m = CMatrix::zeros(dim, dim);
            for (u, comp) in item.components.iter().enumerate() {
                if f[u] != 0.0 {
                    m += comp * c(f[u], 0.0);
                }
            }
            let eig = m.symmetric_eigen();
            for j in 0..dim {
                global_min = global_min.min(eig.eigenvalues[j]);
            }
            spectra.push(eig);
        }
        let mut total = 0.0;
        let mut grad_f = DVector::zeros(n_unknowns);
        for (item, eig) in self.set.items.iter().zip(spectra.iter()) {
            for j in 0..eig.eigenvalues.len() {
                let w = (-beta * (eig.eigenvalues[j] - global_min)).exp();
                if w < 1e-14 {
                    continue;
                }
                total += w;
                let v = eig.eigenvectors.column(j);
                for u in 0..n_unknowns {
                    let mv = &item.components[u] * v;
                    grad_f[u] += w * v.dotc(&mv).re;
                }
            }
        }
        let value = global_min - total.ln() / beta;
        let grad_f = grad_f / total;
        let grad_z = if self.basis.ncols() == 0 {
            DVector::zeros(0)
        } else {
            self.basis.transpose() * grad_f
        };
        (value, grad_z)
    }
}

/// Run the multi-start ascent. `warm` seeds the first start.
pub fn maximize_worst_eigenvalue(
    set: &ConstraintSet,
    f_particular: &DVector<f64>,
    null_basis: &DMatrix<f64>,
    warm: Option<&DVector<f64>>,
    seed: u64,
    opts: &SearchOptions,
) -> SearchOutcome {
    let obj = Objective { set, f0: f_particular, basis: null_basis };
    let free = null_basis.ncols();
    if free == 0 {
        let z = DVector::zeros(0);
        return SearchOutcome {
            worst_eigenvalue: obj.exact(&z),
            f: f_particular.clone(),
            z,
            starts_used: 1,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 1.0 + f_particular.norm();
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut stale = 0usize;
    let mut used = 0usize;
    for start in 0..opts.starts.max(1) {
        let z0 = match (start, warm) {
            (0, Some(w)) if w.len() == free => w.clone(),
            (0, _) => DVector::zeros(free),
            _ => DVector::from_fn(free, |_, _| rng.gen_range(-radius..radius)),
        };
        used += 1;
        let z = ascend(&obj, z0, opts);
        let h = obj.exact(&z);
        let improved = best.as_ref().map_or(true, |(bh, _)| h > bh + 1e-12);
        if improved {
            best = Some((h, z));
            stale = 0;
        } else {
            stale += 1;
        }
        let current = best.as_ref().unwrap().0;
        if current >= opts.early_exit_at {
            break;
        }
        if start >= 7 && stale >= opts.agreement_stop {
            break;
        }
    }
    let (h, z) = best.unwrap();
    SearchOutcome { f: obj.params(&z), worst_eigenvalue: h, z, starts_used: used }
}

fn ascend(obj: &Objective<'_>, mut z: DVector<f64>, opts: &SearchOptions) -> DVector<f64> {
    // initial smoothing scale from the spread at the starting point
    let (v0, g0) = obj.smoothed(&z, 1.0);
    let scale = (v0.abs() + g0.norm()).max(1e-6);
    let mut beta = 8.0 / scale;
    for _round in 0..opts.max_rounds {
        let mut step = 0.5 * scale.min(1.0);
        for _it in 0..opts.iters_per_round {
            let (value, grad) = obj.smoothed(&z, beta);
            let gnorm = grad.norm();
            if gnorm < 1e-13 {
                break;
            }
            let dir = &grad / gnorm;
            // backtracking line search on the smoothed objective
            let mut accepted = false;
            let mut local = step;
            for _bt in 0..24 {
                let cand = &z + &dir * local;
                let (cv, _) = obj.smoothed(&cand, beta);
                if cv > value + 0.3 * local * gnorm {
                    z = cand;
                    step = (local * 1.8).min(1e3);
                    accepted = true;
                    break;
                }
                local *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        beta *= 6.0;
    }
    compass_polish(obj, z)
}

/// Gradient-free polish on the exact min-eigenvalue objective.
fn compass_polish(obj: &Objective<'_>, mut z: DVector<f64>) -> DVector<f64> {
    let free = z.len();
    let mut best = obj.exact(&z);
    let mut step = 1e-2 * (1.0 + z.norm());
    while step > 1e-12 {
        let mut moved = false;
        for i in 0..free {
            for sgn in [1.0f64, -1.0] {
                let mut cand = z.clone();
                cand[i] += sgn * step;
                let h = obj.exact(&cand);
                if h > best + 1e-15 {
                    best = h;
                    z = cand;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.35;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::solver::constraints::ProjectionConstraint;
    use crate::solver::DissociationClass;

    fn herm2(a: f64, b: f64, d: f64) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(b, 0.0), c(d, 0.0)])
    }

    /// Hand-checkable problem: f = (x, y) with x + y = 1 fixed by f0 + Z z,
    /// constraints diag(x, y) and diag(y, x); optimum at x = y = 1/2.
    #[test]
    fn finds_known_optimum() {
        let items = vec![
            ProjectionConstraint {
                block_id: 0,
                choice: vec![0],
                components: vec![herm2(1.0, 0.0, 0.0), herm2(0.0, 0.0, 1.0)],
                multiplicity: 1,
            },
            ProjectionConstraint {
                block_id: 1,
                choice: vec![0],
                components: vec![herm2(0.0, 0.0, 1.0), herm2(1.0, 0.0, 0.0)],
                multiplicity: 1,
            },
        ];
        let set = ConstraintSet {
            class: DissociationClass::Ea,
            n: 2,
            unknowns: vec![(0, 0), (0, 1)],
            items,
            total_enumerated: 2,
        };
        let f0 = DVector::from_column_slice(&[1.0, 0.0]);
        let basis = DMatrix::from_column_slice(2, 1, &[std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2]);
        let opts = SearchOptions { starts: 4, early_exit_at: 10.0, ..Default::default() };
        let out = maximize_worst_eigenvalue(&set, &f0, &basis, None, 3, &opts);
        assert!((out.worst_eigenvalue - 0.5).abs() < 1e-9, "got {}", out.worst_eigenvalue);
        assert!((out.f[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_free_dims_evaluates_directly() {
        let items = vec![ProjectionConstraint {
            block_id: 0,
            choice: vec![0],
            components: vec![herm2(1.0, 0.0, -1.0)],
            multiplicity: 1,
        }];
        let set = ConstraintSet {
            class: DissociationClass::Ea,
            n: 2,
            unknowns: vec![(0, 0)],
            items,
            total_enumerated: 1,
        };
        let f0 = DVector::from_column_slice(&[2.0]);
        let basis = DMatrix::zeros(1, 0);
        let out = maximize_worst_eigenvalue(&set, &f0, &basis, None, 0, &SearchOptions::default());
        assert!((out.worst_eigenvalue + 2.0).abs() < 1e-12);
    }
}
