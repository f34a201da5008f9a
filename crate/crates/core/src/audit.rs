//! Independent reference computations used by tests and the acceptance suite.
//! Nothing here shares code with the algorithms it checks.

/// Singular values of a row-major matrix by one-sided Jacobi rotations,
/// sorted in decreasing order.
pub fn jacobi_singular_values(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    assert_eq!(data.len(), rows * cols);
    // Work on columns of A (rows x cols); rotate column pairs until orthogonal.
    let mut a: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| data[i * cols + j]).collect())
        .collect();
    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = a[p].iter().map(|v| v * v).sum();
                let beta: f64 = a[q].iter().map(|v| v * v).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = a.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xv, yv) = (*x, *y);
                    *x = c * xv - s * yv;
                    *y = s * xv + c * yv;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = a.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// `∏_{k=ℓ}^{K} (1 − 2/(k+1))`, the empty product being 1.
pub fn step_product(l: usize, k_max: usize) -> f64 {
    (l..=k_max).map(|k| 1.0 - 2.0 / (k as f64 + 1.0)).product()
}

/// Best fixed vertex of `[0,1]^d` for `Σ_t ⟨w_t, x⟩` by enumerating all `2^d` vertices.
pub fn best_box_vertex(coef_sum: &[f64]) -> (Vec<f64>, f64) {
    let d = coef_sum.len();
    assert!(d <= 20, "vertex enumeration is exponential");
    let mut best = (vec![0.0; d], f64::INFINITY);
    for mask in 0u32..(1 << d) {
        let v: Vec<f64> = (0..d).map(|i| f64::from((mask >> i) & 1)).collect();
        let value: f64 = v.iter().zip(coef_sum).map(|(a, b)| a * b).sum();
        if value < best.1 {
            best = (v, value);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_known_matrices() {
        let sv = jacobi_singular_values(&[3.0, 0.0, 0.0, -4.0], 2, 2);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
        // rank one a bᵀ, a = (1, 2), b = (2, 0)
        let sv = jacobi_singular_values(&[2.0, 0.0, 4.0, 0.0], 2, 2);
        assert!((sv[0] - 2.0 * 5f64.sqrt()).abs() < 1e-14);
        assert!(sv[1].abs() < 1e-14);
        // 2x3: singular values of [[1,0,0],[0,0,2]] are 2, 1
        let sv = jacobi_singular_values(&[1.0, 0.0, 0.0, 0.0, 0.0, 2.0], 2, 3);
        assert!((sv[0] - 2.0).abs() < 1e-14 && (sv[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn step_product_spot_value() {
        // K = 3, ℓ = 2: (1 − 2/3)(1 − 2/4) = 1/6
        assert!((step_product(2, 3) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(step_product(4, 3), 1.0);
        assert_eq!(step_product(1, 5), 0.0);
    }

    #[test]
    fn vertex_enumeration() {
        let (v, val) = best_box_vertex(&[1.0, -2.0, 0.5, -0.1]);
        assert_eq!(v, vec![0.0, 1.0, 0.0, 1.0]);
        assert!((val + 2.1).abs() < 1e-15);
    }
}
