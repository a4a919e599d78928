//! Shared test oracles, implemented independently of the library's solver
//! path so they can certify it.

use nalgebra::{DMatrix, DVector};

/// Objective of the template-reconstruction program with the eigenvalue
/// variable eliminated, computed straight from the definition.
pub fn reference_objective(a: &DMatrix<f64>, v: &DMatrix<f64>, rho: f64) -> f64 {
    let d = a.nrows();
    let l1: f64 = a.iter().map(|x| x.abs()).sum();
    // best-fit expansion coefficients lambda_i = v_i^T A v_i
    let mut fit = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let vi = v.column(i);
        let li = (vi.transpose() * a * vi)[(0, 0)];
        fit += vi * vi.transpose() * li;
    }
    l1 + 0.5 * rho * (a - fit).norm_squared()
}

/// Euclidean projection onto `{ |diag(A)| <= eps, A 1 >= 1 }` in symmetric
/// matrix space, by cyclic projections with Dykstra corrections. Written
/// from scratch for the oracle.
pub fn reference_project(w: &DMatrix<f64>, eps: f64, sweeps: usize) -> DMatrix<f64> {
    let d = w.nrows();
    let grad_norm_sq = 1.0 + (d as f64 - 1.0) / 2.0;
    let mut z = w.clone();
    let mut corr: Vec<DMatrix<f64>> = vec![DMatrix::zeros(d, d); d + 1];
    for _ in 0..sweeps {
        let mut moved: f64 = 0.0;
        for (set, correction) in corr.iter_mut().enumerate() {
            let y = &z + &*correction;
            let mut next = y.clone();
            if set == 0 {
                for i in 0..d {
                    next[(i, i)] = next[(i, i)].clamp(-eps, eps);
                }
            } else {
                let i = set - 1;
                let rowsum: f64 = (0..d).map(|j| next[(i, j)]).sum();
                if rowsum < 1.0 {
                    let step = (1.0 - rowsum) / grad_norm_sq;
                    for j in 0..d {
                        if j == i {
                            next[(i, i)] += step;
                        } else {
                            next[(i, j)] += 0.5 * step;
                            next[(j, i)] += 0.5 * step;
                        }
                    }
                }
            }
            *correction = y - &next;
            moved = moved.max((&next - &z).amax());
            z = next;
        }
        if moved < 1e-11 {
            break;
        }
    }
    z
}

/// Long-run projected subgradient with an adaptive Polyak level; returns the
/// best feasible objective value found. Independent reference for the
/// library solver. Iterates until the level gap shrinks below round-off
/// scale or the iteration cap is hit.
pub fn subgradient_reference(v: &DMatrix<f64>, rho: f64, eps: f64, max_iter: usize) -> f64 {
    let d = v.nrows();
    let mut a = reference_project(&DMatrix::<f64>::zeros(d, d), eps, 2000);
    let mut f_rec = reference_objective(&a, v, rho);
    let mut delta = 0.5 * f_rec.max(1.0);
    let mut path = 0.0;
    for _ in 0..max_iter {
        // subgradient: sign(A) + rho * (A - best-fit expansion)
        let mut fit = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            let vi = v.column(i);
            let li = (vi.transpose() * &a * vi)[(0, 0)];
            fit += vi * vi.transpose() * li;
        }
        let g = a.map(|x| {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        }) + (&a - &fit) * rho;
        let f = reference_objective(&a, v, rho);
        if f < f_rec {
            f_rec = f;
        }
        let level = f_rec - delta;
        let gn2 = g.norm_squared();
        if gn2 < 1e-300 {
            break;
        }
        let t = (f - level) / gn2;
        a = reference_project(&(&a - g * t), eps, 60);
        path += t * gn2.sqrt();
        // near the optimum the iterate is close to the solution set, so the
        // wander budget shrinks with the level gap; this keeps the number of
        // iterations per level halving bounded
        let budget = (3.0 * d as f64) * (30.0 * delta / f_rec.max(1.0)).min(1.0);
        if path > budget.max(1e-7) {
            delta *= 0.5;
            path = 0.0;
        }
        if delta < 1e-9 * f_rec.max(1.0) {
            break;
        }
    }
    // one tight final projection before the last evaluation
    let a = reference_project(&a, eps, 2000);
    reference_objective(&a, v, rho).min(f_rec)
}

/// Max constraint violation of a candidate solution.
pub fn constraint_violation(a: &DMatrix<f64>, eps: f64) -> f64 {
    let d = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        worst = worst.max(a[(i, i)].abs() - eps);
        let rowsum: f64 = (0..d).map(|j| a[(i, j)]).sum();
        worst = worst.max(1.0 - rowsum);
    }
    worst.max(0.0)
}

/// Smallest pairwise gap between sorted values.
pub fn min_pairwise_gap(values: &DVector<f64>) -> f64 {
    let mut v: Vec<f64> = values.iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}
