#![allow(dead_code)]

use dlaperf::kernel::{lookup_signature, SamplingRequest};
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

/// Dense column-major matrix used by the naive oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn random(rows: usize, cols: usize, rng: &mut StdRng) -> Self {
        Mat { rows, cols, data: (0..rows * cols).map(|_| rng.gen::<f64>()).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.rows] = v;
    }

    pub fn t(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for i in 0..self.rows {
                let mut s = 0.0;
                for l in 0..self.cols {
                    s += self.get(i, l) * other.get(l, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn max_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Keeps the lower (or upper) triangle, optionally forcing a unit diagonal.
    pub fn triangle(&self, lower: bool, unit: bool) -> Mat {
        let mut out = Mat::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                let keep = if lower { i >= j } else { i <= j };
                if i == j && unit {
                    out.set(i, j, 1.0);
                } else if keep {
                    out.set(i, j, self.get(i, j));
                }
            }
        }
        out
    }

    /// Well-conditioned lower triangular matrix.
    pub fn lower_well_conditioned(n: usize, rng: &mut StdRng) -> Mat {
        let mut m = Mat::random(n, n, rng).triangle(true, false);
        for i in 0..n {
            m.set(i, i, 1.0 + n as f64 + rng.gen::<f64>());
        }
        m
    }

    pub fn diagonally_dominant(n: usize, rng: &mut StdRng) -> Mat {
        let mut m = Mat::random(n, n, rng);
        for i in 0..n {
            m.set(i, i, m.get(i, i) + 2.0 * n as f64);
        }
        m
    }

    /// Copies the matrix into `arena` at `off` with leading dimension `ld`.
    pub fn store(&self, arena: &mut [f64], off: usize, ld: usize) {
        for j in 0..self.cols {
            for i in 0..self.rows {
                arena[off + i + j * ld] = self.get(i, j);
            }
        }
    }

    pub fn load(arena: &[f64], off: usize, ld: usize, rows: usize, cols: usize) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, arena[off + i + j * ld]);
            }
        }
        m
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Lays out the matrix operands of `req` back to back and fills the
/// arena with random values. Returns the arena and the element offsets.
pub fn arena_for(req: &SamplingRequest, rng: &mut StdRng) -> (Vec<f64>, Vec<usize>) {
    let sig = lookup_signature(&req.routine).unwrap();
    let mut offsets = Vec::new();
    let mut total = 0;
    for (_, cols, ld) in req.matrix_extents(sig) {
        offsets.push(total);
        total += ld * cols;
    }
    let arena = (0..total.max(1)).map(|_| rng.gen::<f64>()).collect();
    (arena, offsets)
}

/// Routines the built-in algorithms call.
pub const SUBROUTINES: [&str; 6] = ["dgemm", "dtrsm", "dtrmm", "dtrinv_unb", "dgetrf_unb", "dsylv_unb"];

pub fn flops_of(req: &SamplingRequest) -> u64 {
    dlaperf::kernel::flop_count(req).unwrap()
}

/// Models of every subroutine over `[1, hi)` per size argument, built by
/// the modeler from counters computed by `f`.
pub fn synthetic_models(
    hi: usize,
    counters: &[&str],
    epsilon: f64,
    f: impl Fn(&SamplingRequest) -> dlaperf::sampler::CounterSet,
) -> dlaperf::predict::ModelSet {
    use dlaperf::modeler::{build_routine_model, ModelerConfig, SyntheticSource};
    SUBROUTINES
        .iter()
        .map(|r| {
            let dims = lookup_signature(r).unwrap().size_args().len();
            let mut cfg = ModelerConfig::new(r, vec![(1, hi); dims]).unwrap();
            cfg.counters = counters.iter().map(|c| c.to_string()).collect();
            cfg.target = counters[0].to_string();
            cfg.epsilon = epsilon;
            cfg.repetitions = 1;
            let (model, _) = build_routine_model(&cfg, &mut SyntheticSource(&f)).unwrap();
            (r.to_string(), model)
        })
        .collect()
}

/// Exact flops models of every subroutine over `[1, hi)`.
pub fn flops_models(hi: usize) -> dlaperf::predict::ModelSet {
    synthetic_models(hi, &["flops"], 1e-6, |r| [("flops", flops_of(r))].into_iter().collect())
}
