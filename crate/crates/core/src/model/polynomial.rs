use std::collections::BTreeMap;

/// A sparse multivariate polynomial in the size arguments.
///
/// Terms are keyed by exponent vector and kept in lexicographic order.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolynomialError {
    #[error("exponent vector {exps:?} has length {}, expected {dim}", exps.len())]
    Dimension { exps: Vec<u32>, dim: usize },
    #[error("term {exps:?} exceeds degree bound {degree}")]
    Degree { exps: Vec<u32>, degree: u32 },
}

impl Polynomial {
    pub fn zero(dim: usize, degree: u32) -> Self {
        Polynomial {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        let mut p = Self::zero(dim, 0);
        p.terms.insert(vec![0; dim], value);
        p.terms.retain(|_, c| *c != 0.0);
        p
    }

    pub fn from_terms(
        dim: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self, PolynomialError> {
        let mut p = Self::zero(dim, degree);
        for (e, c) in terms {
            p.add_term(e, c)?;
        }
        Ok(p)
    }

    /// Adds `coef` to the coefficient of `exps`, dropping the term if the
    /// sum is zero.
    pub fn add_term(&mut self, exps: Vec<u32>, coef: f64) -> Result<(), PolynomialError> {
        if exps.len() != self.dim {
            return Err(PolynomialError::Dimension {
                exps,
                dim: self.dim,
            });
        }
        if exps.iter().sum::<u32>() > self.degree {
            return Err(PolynomialError::Degree {
                exps,
                degree: self.degree,
            });
        }
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at a real point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&k, &xi)| xi.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Value at an integer point. When every coefficient is an integer the
    /// sum is formed in 128-bit integer arithmetic, so the result is exact
    /// whenever it is representable.
    pub fn eval_at(&self, x: &[usize]) -> f64 {
        if let Some(v) = self.eval_integer(x) {
            return v as f64;
        }
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        self.eval(&xf)
    }

    fn eval_integer(&self, x: &[usize]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (e, &c) in &self.terms {
            if c.fract() != 0.0 || c.abs() >= 2f64.powi(100) {
                return None;
            }
            let mut m = c as i128;
            for (&k, &xi) in e.iter().zip(x) {
                m = m.checked_mul((xi as i128).checked_pow(k)?)?;
            }
            acc = acc.checked_add(m)?;
        }
        Some(acc)
    }
}
