//! Small dense and tridiagonal complex linear algebra used by the solvers.

use num_complex::Complex64 as C64;

/// Thomas algorithm for a complex tridiagonal system. `lower[i]` multiplies
/// x[i-1] in row i (lower[0] unused), `upper[i]` multiplies x[i+1] in row i
/// (upper[n-1] unused). No pivoting; intended for the diagonally dominant
/// Crank-Nicolson and shifted-Hamiltonian matrices built here.
pub fn tridiag_solve(lower: &[C64], diag: &[C64], upper: &[C64], rhs: &[C64]) -> Vec<C64> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let xi = x[i] - c[i] * x[i + 1];
        x[i] = xi;
    }
    x
}

/// Tridiagonal matrix-vector product with the same layout as `tridiag_solve`.
pub fn tridiag_matvec(lower: &[C64], diag: &[C64], upper: &[C64], x: &[C64]) -> Vec<C64> {
    let n = diag.len();
    let mut y = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut v = diag[i] * x[i];
        if i > 0 {
            v += lower[i] * x[i - 1];
        }
        if i + 1 < n {
            v += upper[i] * x[i + 1];
        }
        y[i] = v;
    }
    y
}

pub type Mat<const N: usize> = [[C64; N]; N];

pub fn mat_zero<const N: usize>() -> Mat<N> {
    [[C64::new(0.0, 0.0); N]; N]
}

pub fn mat_identity<const N: usize>() -> Mat<N> {
    let mut m = mat_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn mat_mul<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> Mat<N> {
    let mut out = mat_zero();
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn mat_vec<const N: usize>(a: &Mat<N>, x: &[C64; N]) -> [C64; N] {
    let mut out = [C64::new(0.0, 0.0); N];
    for i in 0..N {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..N {
            acc += a[i][j] * x[j];
        }
        out[i] = acc;
    }
    out
}

/// Matrix exponential by scaling-and-squaring with a Taylor series. The
/// matrices here are tiny (N ≤ 6) with moderate norms, so this converges to
/// machine precision.
pub fn mat_exp<const N: usize>(a: &Mat<N>) -> Mat<N> {
    // infinity norm
    let norm = a
        .iter()
        .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 1.0 / (2.0f64).powi(squarings as i32);
    let mut scaled = *a;
    for row in scaled.iter_mut() {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    // Taylor: sum_{k=0..K} scaled^k / k!
    let mut result = mat_identity::<N>();
    let mut term = mat_identity::<N>();
    for k in 1..=20 {
        term = mat_mul(&term, &scaled);
        let inv_k = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv_k;
            }
        }
        for i in 0..N {
            for j in 0..N {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tridiag_solves_random_system() {
        let n = 64;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let lower: Vec<C64> = (0..n).map(|_| C64::new(next(), next())).collect();
        let upper: Vec<C64> = (0..n).map(|_| C64::new(next(), next())).collect();
        let diag: Vec<C64> = (0..n).map(|_| C64::new(4.0 + next(), next())).collect();
        let x_true: Vec<C64> = (0..n).map(|_| C64::new(next(), next())).collect();
        let rhs = tridiag_matvec(&lower, &diag, &upper, &x_true);
        let x = tridiag_solve(&lower, &diag, &upper, &rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn exp_of_diagonal_matrix() {
        let mut a = mat_zero::<3>();
        a[0][0] = C64::new(-1.0, 2.0);
        a[1][1] = C64::new(0.5, -0.3);
        a[2][2] = C64::new(0.0, 0.0);
        let e = mat_exp(&a);
        for i in 0..3 {
            let expected = a[i][i].exp();
            assert!((e[i][i] - expected).norm() < 1e-14);
        }
        assert!(e[0][1].norm() < 1e-15);
    }

    #[test]
    fn exp_of_rotation_generator() {
        // exp([[0, -t], [t, 0]]) is a rotation by t
        let t = 1.3;
        let mut a = mat_zero::<2>();
        a[0][1] = C64::new(-t, 0.0);
        a[1][0] = C64::new(t, 0.0);
        let e = mat_exp(&a);
        assert_relative_eq!(e[0][0].re, t.cos(), max_relative = 1e-13);
        assert_relative_eq!(e[1][0].re, t.sin(), max_relative = 1e-13);
    }

    #[test]
    fn augmented_exp_gives_integral_block() {
        // exp([[A, I], [0, 0]] t) = [[e^{At}, ∫₀ᵗ e^{As} ds], [0, I]]
        // for diagonal A the integral is (e^{at} - 1)/a
        let a00 = C64::new(-0.7, 0.4);
        let t = 0.9;
        let mut m = mat_zero::<2>();
        m[0][0] = a00 * t;
        m[0][1] = C64::new(t, 0.0);
        let e = mat_exp(&m);
        let expected = ((a00 * t).exp() - 1.0) / a00;
        assert!((e[0][1] - expected).norm() < 1e-13);
    }
}
