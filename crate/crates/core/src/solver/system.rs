//! Pauli-transfer matching equations per class.
//!
//! One equation per Pauli weight `n' = 0..=N`: the decomposition's combined
//! multiplier on weight-`n'` strings must equal the channel's transfer
//! (`q^{n'}` for local noise, `q^{1-delta_{n',0}}` for global). Terms whose
//! combinatorial coefficient vanishes are dropped, which also removes
//! out-of-range profile arguments at the ends.

use super::{DissociationClass, FTable, SolverError};
use crate::channels::NoiseKind;
use crate::partitions::binomial;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub class: DissociationClass,
    pub n: usize,
    pub noise: NoiseKind,
    /// Profile `(s, t)` per unknown column.
    pub unknowns: Vec<(usize, usize)>,
    /// Sparse rows: row `n'` holds `(column, coefficient)` pairs.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl LinearSystem {
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.rows.len(), self.unknowns.len());
        for (r, row) in self.rows.iter().enumerate() {
            for &(col, coef) in row {
                a[(r, col)] += coef;
            }
        }
        a
    }

    pub fn rhs(&self, q: f64) -> DVector<f64> {
        DVector::from_fn(self.rows.len(), |r, _| match self.noise {
            NoiseKind::Local => q.powi(r as i32),
            NoiseKind::Global => {
                if r == 0 {
                    1.0
                } else {
                    q
                }
            }
        })
    }

    /// `|| A f - b(q) ||_inf` for a candidate parameter table.
    pub fn residual(&self, f: &FTable, q: f64) -> f64 {
        assert_eq!(f.domain(), self.unknowns.as_slice());
        let fv = DVector::from_column_slice(f.values());
        let r = self.matrix() * fv - self.rhs(q);
        r.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// Build the weight-matching system for a class.
pub fn build_system(
    class: DissociationClass,
    n: usize,
    noise: NoiseKind,
) -> Result<LinearSystem, SolverError> {
    class.validate(n)?;
    let unknowns = class.profile_domain(n);
    let col = |profile: (usize, usize)| -> usize {
        unknowns.iter().position(|&p| p == profile).expect("profile in domain")
    };
    let mut rows = Vec::with_capacity(n + 1);
    for w in 0..=n {
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut add = |profile: (usize, usize), coef: f64| {
            if coef != 0.0 {
                row.push((col(profile), coef));
            }
        };
        match class {
            DissociationClass::Ea => {
                if w >= 1 {
                    add((0, n - w), w as f64 / (3f64.powi(w as i32 - 1) * n as f64));
                }
                if w <= n - 1 {
                    add((1, n - w - 1), (n - w) as f64 / (3f64.powi(w as i32) * n as f64));
                }
            }
            DissociationClass::OneDetached => {
                if w >= 1 {
                    add((0, n - w), w as f64 / (3.0 * n as f64));
                }
                if w <= n - 1 {
                    add((1, n - w - 1), (n - w) as f64 / n as f64);
                }
            }
            DissociationClass::PairClusters => {
                let norm = binomial(n, 2) as f64;
                if w >= 2 {
                    add((0, n - w), binomial(w, 2) as f64 / (5f64.powi((w as i32 + 1) / 2 - 1) * norm));
                }
                if (1..n).contains(&w) {
                    add((1, n - w - 1), (w * (n - w)) as f64 / (5f64.powi(w as i32 / 2) * norm));
                }
                if w <= n - 2 {
                    add((2, n - w - 2), binomial(n - w, 2) as f64 / (5f64.powi((w as i32 + 1) / 2) * norm));
                }
            }
            DissociationClass::HalfPlusSingles | DissociationClass::HalfClusters => {
                let h = n / 2;
                let norm = binomial(n, h) as f64;
                for l in 0..=h {
                    let count = binomial(w, h - l) * binomial(n - w, l);
                    if count == 0 {
                        continue;
                    }
                    let den = match class {
                        DissociationClass::HalfPlusSingles => 3f64.powi((h - l) as i32),
                        DissociationClass::HalfClusters => {
                            if l == h {
                                1.0
                            } else {
                                (1usize << h) as f64 + 1.0
                            }
                        }
                        _ => unreachable!(),
                    };
                    add((l, n - w - l), count as f64 / (den * norm));
                }
            }
        }
        rows.push(row);
    }
    Ok(LinearSystem { class, n, noise, unknowns, rows })
}

/// Affine parametrization of the equality solutions: `f = particular + Z z`.
#[derive(Debug, Clone)]
pub struct EqualitySolution {
    /// SVD factors of the row-equilibrated system matrix, reusable across `q`.
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
    singular: DVector<f64>,
    /// Per-row scale applied before factoring (rows shrink geometrically
    /// with the weight, which would otherwise wreck the conditioning).
    row_scale: DVector<f64>,
    /// Null-space basis, one column per free direction.
    pub null_basis: DMatrix<f64>,
    pub rank: usize,
}

const RANK_TOL: f64 = 1e-10;

pub fn solve_equalities(system: &LinearSystem) -> EqualitySolution {
    let mut a = system.matrix();
    let row_scale = DVector::from_fn(a.nrows(), |r, _| {
        let max = a.row(r).iter().map(|x| x.abs()).fold(0.0, f64::max);
        if max > 0.0 {
            1.0 / max
        } else {
            1.0
        }
    });
    for r in 0..a.nrows() {
        let s = row_scale[r];
        for cc in 0..a.ncols() {
            a[(r, cc)] *= s;
        }
    }
    let cols = a.ncols();
    let svd = a.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let singular = svd.singular_values;
    // singular values are not guaranteed sorted: test per index
    let rank = singular.iter().filter(|&&s| s > RANK_TOL).count();
    let free = cols - rank;
    let mut null_basis = DMatrix::zeros(cols, free);
    let mut idx = 0;
    for i in 0..v_t.nrows() {
        if singular.get(i).copied().unwrap_or(0.0) <= RANK_TOL {
            null_basis.set_column(idx, &v_t.row(i).transpose());
            idx += 1;
        }
    }
    // a thin SVD of a wide matrix returns only nrows right-singular vectors;
    // complete the kernel basis by orthogonalizing coordinate directions
    if idx < free {
        let mut basis: Vec<DVector<f64>> = (0..v_t.nrows()).map(|i| v_t.row(i).transpose()).collect();
        for k in 0..cols {
            let mut cand = DVector::zeros(cols);
            cand[k] = 1.0;
            for _pass in 0..2 {
                for b in &basis {
                    let proj = b.dot(&cand);
                    cand -= b * proj;
                }
            }
            let norm = cand.norm();
            if norm > 1e-8 {
                let unit = cand / norm;
                null_basis.set_column(idx, &unit);
                basis.push(unit);
                idx += 1;
                if idx == free {
                    break;
                }
            }
        }
        assert_eq!(idx, free, "null-space completion failed");
    }
    EqualitySolution { u, v_t, singular, row_scale, null_basis, rank }
}

impl EqualitySolution {
    /// Minimum-norm particular solution for the right-hand side at `q`.
    pub fn particular(&self, system: &LinearSystem, q: f64) -> Result<DVector<f64>, SolverError> {
        let b = system.rhs(q);
        let scaled = b.component_mul(&self.row_scale);
        let ub = self.u.transpose() * &scaled;
        let mut y = DVector::zeros(self.v_t.nrows());
        for i in 0..y.len().min(ub.len()) {
            if self.singular[i] > RANK_TOL {
                y[i] = ub[i] / self.singular[i];
            }
        }
        let f = self.v_t.transpose() * y;
        let residual = (system.matrix() * &f - &b).norm();
        if residual > 1e-9 {
            return Err(SolverError::EqualitySystem { q, residual });
        }
        Ok(f)
    }

    pub fn free_dims(&self) -> usize {
        self.null_basis.ncols()
    }
}
