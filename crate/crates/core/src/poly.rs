//! Small real-polynomial helpers shared by weights, bases and the tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Evaluates `c[0] + c[1] x + c[2] x^2 + ...` by Horner's rule.
pub fn eval_ascending(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Roots of `c[0] x^n + c[1] x^(n-1) + ... + c[n]` (descending powers).
///
/// Leading zeros are stripped. A constant polynomial has no roots.
pub fn roots_descending(coeffs: &[f64]) -> Vec<Complex64> {
    let first = match coeffs.iter().position(|c| *c != 0.0) {
        Some(i) => i,
        None => return Vec::new(),
    };
    let c = &coeffs[first..];
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        companion[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Roots in `z` of a polynomial given in ascending powers of `z^-1`.
///
/// `a0 + a1 z^-1 + ... + an z^-n = z^-n (a0 z^n + ... + an)`, so the
/// coefficient order is already descending in `z`. Trailing zeros only add
/// roots at the origin and are dropped.
pub fn roots_in_z_of_inverse_poly(coeffs: &[f64]) -> Vec<Complex64> {
    let last = coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
    roots_descending(&coeffs[..last])
}

/// Product of two polynomials (any consistent ordering).
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots() {
        let mut r = roots_descending(&[1.0, -0.75, 0.125]);
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - Complex64::new(0.25, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_poly_roots_ignore_origin_padding() {
        // 1 - 0.5 z^-1 + 0 z^-2  ->  single root at 0.5
        let r = roots_in_z_of_inverse_poly(&[1.0, -0.5, 0.0]);
        assert_eq!(r.len(), 1);
        assert!((r[0].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn horner() {
        let v = eval_ascending(&[1.0, 2.0, 3.0], Complex64::new(0.0, 1.0));
        assert!((v - Complex64::new(-2.0, 2.0)).norm() < 1e-15);
    }
}
