use nalgebra::{DMatrix, DVector};

use crate::model::Polynomial;

/// Exponent vectors of all monomials of total degree at most `degree`, in
/// lexicographic order.
pub fn monomials(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Least-squares polynomial of total degree at most `degree` through
/// `(point, value)` samples.
///
/// Each coordinate is mapped affinely onto [-1, 1] over the sampled range
/// before the monomial matrix is built, and the system is solved through a
/// singular value decomposition. Directions with negligible singular values
/// are dropped, which yields the minimum-norm solution when the samples do
/// not determine every coefficient. The result is expanded back into the
/// raw coordinates.
pub fn fit_polynomial(samples: &[(Vec<usize>, f64)], degree: u32, dim: usize) -> Polynomial {
    if samples.is_empty() {
        return Polynomial::zero(dim, degree);
    }
    let (center, half): (Vec<f64>, Vec<f64>) = (0..dim)
        .map(|d| {
            let lo = samples.iter().map(|s| s.0[d]).min().unwrap() as f64;
            let hi = samples.iter().map(|s| s.0[d]).max().unwrap() as f64;
            let h = (hi - lo) / 2.0;
            (lo + h, if h > 0.0 { h } else { 1.0 })
        })
        .unzip();
    let basis = monomials(dim, degree);
    let scaled = |p: &[usize], d: usize| (p[d] as f64 - center[d]) / half[d];
    let a = DMatrix::from_fn(samples.len(), basis.len(), |i, j| {
        basis[j]
            .iter()
            .enumerate()
            .map(|(d, &e)| scaled(&samples[i].0, d).powi(e as i32))
            .product()
    });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-12 * samples.len().max(basis.len()) as f64;
    let coef = svd.solve(&b, eps).expect("U and V were computed");

    // Expand prod_d ((x_d - c_d) / h_d)^e_d into raw monomials.
    let mut poly = Polynomial::zero(dim, degree);
    for (e, &c) in basis.iter().zip(coef.iter()) {
        if c == 0.0 {
            continue;
        }
        let mut terms: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), c)];
        for (d, &k) in e.iter().enumerate() {
            let mut next = Vec::new();
            for (prefix, coeff) in &terms {
                for j in 0..=k {
                    let factor = binomial(k, j) * (-center[d]).powi((k - j) as i32)
                        / half[d].powi(k as i32);
                    let mut ex = prefix.clone();
                    ex.push(j);
                    next.push((ex, coeff * factor));
                }
            }
            terms = next;
        }
        for (ex, v) in terms {
            poly.add_term(ex, v).expect("degree and dimension match");
        }
    }
    poly
}

/// Largest relative deviation `|p(x) - v| / max(|v|, floor)`.
pub fn fit_error(poly: &Polynomial, checkpoints: &[(Vec<usize>, f64)], floor: f64) -> f64 {
    checkpoints
        .iter()
        .map(|(x, v)| (poly.eval_at(x) - v).abs() / v.abs().max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_gemm_flops() {
        let mut samples = Vec::new();
        for m in [1, 5, 17, 40, 63] {
            for n in [2, 9, 33, 60] {
                for k in [1, 8, 30, 63] {
                    samples.push((vec![m, n, k], 2.0 * (m * n * k) as f64));
                }
            }
        }
        let p = fit_polynomial(&samples, 3, 3);
        let lead = p.terms().find(|(e, _)| *e == [1, 1, 1]).unwrap().1;
        assert!((lead - 2.0).abs() <= 2e-9);
        for (e, c) in p.terms() {
            if e != [1, 1, 1] {
                assert!(c.abs() < 1e-6, "{e:?} {c}");
            }
        }
        assert!(fit_error(&p, &samples, 1e-9) < 1e-9);
    }

    #[test]
    fn constant_data() {
        let samples: Vec<_> = (1..20).map(|x| (vec![x, 2 * x], 7.0)).collect();
        let p = fit_polynomial(&samples, 2, 2);
        for x in [1usize, 10, 100] {
            assert!((p.eval_at(&[x, x]) - 7.0).abs() < 1e-9);
        }
    }

    #[test]
    fn underdetermined_interpolates() {
        let samples = vec![(vec![3], 5.0), (vec![10], -2.0)];
        let p = fit_polynomial(&samples, 3, 1);
        assert!((p.eval_at(&[3]) - 5.0).abs() < 1e-9);
        assert!((p.eval_at(&[10]) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn error_formula() {
        let zero = Polynomial::zero(1, 1);
        assert_eq!(fit_error(&zero, &[(vec![1], 10.0)], 1.0), 1.0);
        let tiny = Polynomial::constant(1, 1e-12);
        let e = fit_error(&tiny, &[(vec![1], 0.0)], 1e-9);
        assert!((e - 1e-3).abs() < 1e-15);
        let exact = Polynomial::constant(1, 4.0);
        assert_eq!(fit_error(&exact, &[(vec![2], 4.0)], 1e-9), 0.0);
    }

    #[test]
    fn monomial_order() {
        assert_eq!(
            monomials(2, 1),
            [vec![0, 0], vec![0, 1], vec![1, 0]]
        );
        assert_eq!(monomials(3, 3).len(), 20);
    }
}
