//! Dense Gaussian elimination for the handful of small systems in this crate.

use num_complex::Complex64;

/// Solves `a · x = b` in place with partial pivoting. Returns `None` when a
/// pivot falls below `tol` times the largest entry of `a`.
pub(crate) fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>, tol: f64) -> Option<Vec<Complex64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[pivot][col].norm() <= tol * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let delta = factor * a[col][k];
                a[row][k] -= delta;
            }
            let delta = factor * b[col];
            b[row] -= delta;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Real 3×3 solve with partial pivoting.
pub(crate) fn solve3(a: [[f64; 3]; 3], b: [f64; 3], tol: f64) -> Option<[f64; 3]> {
    let a = a
        .iter()
        .map(|row| row.iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .collect();
    let b = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let x = solve_complex(a, b, tol)?;
    Some([x[0].re, x[1].re, x[2].re])
}

#[cfg(test)]
pub(crate) fn matmul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_solve_matches_hand_result() {
        let j = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        // [[1, j], [j, 2]] x = [1, 0] -> det = 2 - j² = 3
        let a = vec![vec![one, j], vec![j, 2.0 * one]];
        let x = solve_complex(a, vec![one, 0.0 * one], 1e-14).unwrap();
        assert!((x[0] - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - Complex64::new(0.0, -1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_returns_none() {
        assert!(solve3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]], [1.0; 3], 1e-14).is_none());
    }
}
