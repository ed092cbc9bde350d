use std::collections::BTreeSet;

use crate::model::volume;

/// Points at which a region is sampled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePlan {
    pub fit: Vec<Vec<usize>>,
    pub check: Vec<Vec<usize>>,
}

/// Number of monomials of total degree at most `degree` in `dim` variables.
pub fn monomial_count(dim: usize, degree: u32) -> usize {
    // C(dim + degree, degree)
    let (n, k) = (dim + degree as usize, degree as usize);
    (1..=k).fold(1usize, |acc, i| acc * (n + 1 - i) / i)
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

fn halton(i: u64, bounds: &[(usize, usize)]) -> Vec<usize> {
    bounds
        .iter()
        .enumerate()
        .map(|(d, &(lo, hi))| {
            let w = hi - lo;
            let h = radical_inverse(i, PRIMES[d % PRIMES.len()]);
            lo + ((h * w as f64) as usize).min(w - 1)
        })
        .collect()
}

const HALTON_LIMIT: u64 = 100_000;

/// Visits lattice points of a box in order until `f` returns false.
fn for_each_point(bounds: &[(usize, usize)], mut f: impl FnMut(&[usize]) -> bool) {
    let mut p: Vec<usize> = bounds.iter().map(|b| b.0).collect();
    loop {
        if !f(&p) {
            return;
        }
        let mut d = 0;
        while d < bounds.len() {
            p[d] += 1;
            if p[d] < bounds[d].1 {
                break;
            }
            p[d] = bounds[d].0;
            d += 1;
        }
        if d == bounds.len() {
            return;
        }
    }
}

/// Corners, center and edge midpoints of a box, without duplicates.
fn structured(bounds: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let dim = bounds.len();
    let center: Vec<usize> = bounds.iter().map(|&(lo, hi)| (lo + hi - 1) / 2).collect();
    let corner = |mask: usize| -> Vec<usize> {
        (0..dim)
            .map(|d| if mask >> d & 1 == 1 { bounds[d].1 - 1 } else { bounds[d].0 })
            .collect()
    };
    let mut pts = Vec::new();
    for mask in 0..1usize << dim {
        pts.push(corner(mask));
    }
    pts.push(center.clone());
    for d in 0..dim {
        for mask in 0..1usize << dim {
            if mask >> d & 1 == 0 {
                let mut p = corner(mask);
                p[d] = center[d];
                pts.push(p);
            }
        }
    }
    let mut seen = BTreeSet::new();
    pts.retain(|p| seen.insert(p.clone()));
    pts
}

/// Fit and check points for a region.
///
/// The fit set holds the corners, the center and the midpoints of all
/// edges, filled up with Halton points to at least twice the number of
/// monomials. The check set holds `dim + 2` further points; when the
/// region has too few lattice points, fit points are reused.
pub fn plan_samples(bounds: &[(usize, usize)], degree: u32) -> SamplePlan {
    let dim = bounds.len();
    let want_fit = 2 * monomial_count(dim, degree);
    let want_check = dim + 2;
    let total = volume(bounds);

    let mut fit = structured(bounds);
    let mut taken: BTreeSet<Vec<usize>> = fit.iter().cloned().collect();
    let mut extra = Vec::new();
    let want = (want_fit.max(fit.len()) + want_check) as u128;

    if total <= want {
        // Few lattice points: take them all in order.
        for_each_point(bounds, |p| {
            if !taken.contains(p) {
                extra.push(p.to_vec());
            }
            true
        });
    } else {
        let need = want as usize - fit.len();
        let mut i = 1u64;
        while extra.len() < need && i <= HALTON_LIMIT {
            let p = halton(i, bounds);
            if taken.insert(p.clone()) {
                extra.push(p);
            }
            i += 1;
        }
        // Very thin boxes can starve the sequence; fall back to a sweep.
        for_each_point(bounds, |p| {
            if extra.len() >= need {
                return false;
            }
            if taken.insert(p.to_vec()) {
                extra.push(p.to_vec());
            }
            true
        });
    }

    let mut rest = extra.into_iter();
    while fit.len() < want_fit {
        match rest.next() {
            Some(p) => fit.push(p),
            None => break,
        }
    }
    let mut check: Vec<Vec<usize>> = rest.take(want_check).collect();
    for p in &fit {
        if check.len() >= want_check {
            break;
        }
        if !check.contains(p) {
            check.push(p.clone());
        }
    }
    SamplePlan { fit, check }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials() {
        assert_eq!(monomial_count(3, 3), 20);
        assert_eq!(monomial_count(1, 1), 2);
        assert_eq!(monomial_count(2, 0), 1);
    }

    #[test]
    fn one_dimensional_linear() {
        let p = plan_samples(&[(1, 9)], 1);
        for x in [1, 8, 4] {
            assert!(p.fit.contains(&vec![x]));
        }
        assert!(p.fit.len() >= 4);
        assert_eq!(p.check.len(), 3);
        assert!(p.check.iter().all(|c| !p.fit.contains(c)));
    }

    #[test]
    fn single_point_region() {
        let p = plan_samples(&[(5, 6), (7, 8)], 3);
        assert_eq!(p.fit, [vec![5, 7]]);
        assert_eq!(p.check, [vec![5, 7]]);
    }

    #[test]
    fn three_dimensional_cubic() {
        let b = [(1, 64), (1, 64), (1, 64)];
        let p = plan_samples(&b, 3);
        assert!(p.fit.len() >= 40);
        assert_eq!(p.check.len(), 5);
        let fit: BTreeSet<_> = p.fit.iter().collect();
        assert_eq!(fit.len(), p.fit.len());
        assert!(p.check.iter().all(|c| !fit.contains(c)));
        for q in p.fit.iter().chain(&p.check) {
            assert!(q.iter().zip(&b).all(|(&x, &(lo, hi))| lo <= x && x < hi));
        }
    }

    #[test]
    fn small_region_reuses_fit_points_for_checks() {
        let p = plan_samples(&[(1, 4)], 3);
        assert_eq!(p.fit, [vec![1], vec![3], vec![2]]);
        assert_eq!(p.check.len(), 3);
    }
}
