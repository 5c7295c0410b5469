/// Solves a tridiagonal system in place with the Thomas algorithm.
///
/// `lower[0]` and `upper[n - 1]` are ignored. On return `rhs` holds the
/// solution. The caller guarantees the pivots do not vanish, which holds for
/// the diagonally dominant systems the engine assembles.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n);
    if n == 0 {
        return;
    }
    scratch.clear();
    scratch.resize(n, 0.0);

    let mut pivot = diag[0];
    rhs[0] /= pivot;
    for i in 1..n {
        scratch[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_product() {
        let lower = [0.0, -1.0, 0.5, -0.25, 1.0];
        let diag = [4.0, 5.0, 6.0, 4.5, 3.0];
        let upper = [1.0, -2.0, 0.75, 1.0, 0.0];
        let x = [1.0, -2.0, 3.0, 0.5, -1.5];
        let mut rhs: Vec<f64> = (0..5)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i < 4 {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect();
        let mut scratch = Vec::new();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch);
        for (a, b) in rhs.iter().zip(x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn solves_diagonally_dominant_systems(
            rows in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -3.0..3.0f64), 1..60)
        ) {
            let n = rows.len();
            let lower: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let upper: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + lower[i].abs() + upper[i].abs()).collect();
            let x: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let mut rhs: Vec<f64> = (0..n)
                .map(|i| {
                    let mut s = diag[i] * x[i];
                    if i > 0 {
                        s += lower[i] * x[i - 1];
                    }
                    if i + 1 < n {
                        s += upper[i] * x[i + 1];
                    }
                    s
                })
                .collect();
            let mut scratch = Vec::new();
            solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch);
            for (a, b) in rhs.iter().zip(&x) {
                proptest::prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
