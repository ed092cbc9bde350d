use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::sampler::XorShift64Star;

use super::{ModelError, Polynomial};

/// A summary statistic over repeated measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    Min,
    Median,
    Avg,
    Max,
    Stddev,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::Min,
        Statistic::Median,
        Statistic::Avg,
        Statistic::Max,
        Statistic::Stddev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Min => "min",
            Statistic::Median => "median",
            Statistic::Avg => "avg",
            Statistic::Max => "max",
            Statistic::Stddev => "stddev",
        }
    }
}

impl FromStr for Statistic {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Statistic::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown statistic {s:?}"))
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A half-open box `[lo, hi)` per dimension.
pub type Bounds = Vec<(usize, usize)>;

pub fn contains(bounds: &[(usize, usize)], point: &[usize]) -> bool {
    bounds
        .iter()
        .zip(point)
        .all(|(&(lo, hi), &x)| lo <= x && x < hi)
}

pub fn volume(bounds: &[(usize, usize)]) -> u128 {
    bounds
        .iter()
        .map(|&(lo, hi)| hi.saturating_sub(lo) as u128)
        .product()
}

fn intersects(a: &[(usize, usize)], b: &[(usize, usize)]) -> bool {
    a.iter()
        .zip(b)
        .all(|(&(alo, ahi), &(blo, bhi))| alo.max(blo) < ahi.min(bhi))
}

fn inside(inner: &[(usize, usize)], outer: &[(usize, usize)]) -> bool {
    inner
        .iter()
        .zip(outer)
        .all(|(&(ilo, ihi), &(olo, ohi))| olo <= ilo && ihi <= ohi)
}

/// Chebyshev distance from `point` to the lattice points of a box.
fn box_distance(bounds: &[(usize, usize)], point: &[usize]) -> usize {
    bounds
        .iter()
        .zip(point)
        .map(|(&(lo, hi), &x)| {
            let c = x.clamp(lo, hi.max(lo + 1) - 1);
            x.abs_diff(c)
        })
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub bounds: Bounds,
    pub polys: BTreeMap<(String, Statistic), Polynomial>,
}

impl Region {
    pub fn new(bounds: Bounds) -> Self {
        Region {
            bounds,
            polys: BTreeMap::new(),
        }
    }

    pub fn poly(&self, counter: &str, stat: Statistic) -> Option<&Polynomial> {
        self.polys.get(&(counter.to_string(), stat))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverViolation {
    EmptyRegion(usize),
    OutsideDomain(usize),
    Overlap(usize, usize),
    Uncovered(Vec<usize>),
}

impl fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverViolation::EmptyRegion(i) => write!(f, "region {i} is empty"),
            CoverViolation::OutsideDomain(i) => write!(f, "region {i} leaves the domain"),
            CoverViolation::Overlap(i, j) => write!(f, "regions {i} and {j} overlap"),
            CoverViolation::Uncovered(p) => write!(f, "point {p:?} is not covered"),
        }
    }
}

/// Lattice volumes up to this size are checked point by point.
const EXHAUSTIVE_LIMIT: u128 = 1_000_000;
const RANDOM_POINTS: usize = 10_000;
/// At most this many uncovered witnesses are reported.
const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseModel {
    pub domain: Bounds,
    pub regions: Vec<Region>,
    pub statistics: Vec<Statistic>,
    pub counters: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub in_domain: bool,
}

impl PiecewiseModel {
    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    /// Index of the region used for `point` and whether the point lies in
    /// the domain. Outside the domain the nearest region in Chebyshev
    /// distance is used, ties going to the lower index.
    pub fn locate(&self, point: &[usize]) -> Option<(usize, bool)> {
        if contains(&self.domain, point) {
            if let Some(i) = self.regions.iter().position(|r| contains(&r.bounds, point)) {
                return Some((i, true));
            }
        }
        let in_domain = contains(&self.domain, point);
        self.regions
            .iter()
            .enumerate()
            .min_by_key(|(i, r)| (box_distance(&r.bounds, point), *i))
            .map(|(i, _)| (i, in_domain))
    }

    pub fn evaluate(
        &self,
        point: &[usize],
        counter: &str,
        stat: Statistic,
    ) -> Result<Evaluation, ModelError> {
        if point.len() != self.dim() {
            return Err(ModelError::Dimension {
                expected: self.dim(),
                found: point.len(),
            });
        }
        let (i, in_domain) = self.locate(point).ok_or(ModelError::NoRegions)?;
        let poly = self.regions[i]
            .poly(counter, stat)
            .ok_or_else(|| ModelError::MissingPolynomial {
                counter: counter.to_string(),
                statistic: stat,
            })?;
        Ok(Evaluation {
            value: poly.eval_at(point),
            in_domain,
        })
    }

    /// Checks that the regions partition the domain exactly.
    pub fn validate_cover(&self) -> Result<(), Vec<CoverViolation>> {
        let mut v = Vec::new();
        for (i, r) in self.regions.iter().enumerate() {
            if r.bounds.len() != self.dim() || volume(&r.bounds) == 0 {
                v.push(CoverViolation::EmptyRegion(i));
            } else if !inside(&r.bounds, &self.domain) {
                v.push(CoverViolation::OutsideDomain(i));
            }
        }
        for i in 0..self.regions.len() {
            for j in i + 1..self.regions.len() {
                if intersects(&self.regions[i].bounds, &self.regions[j].bounds) {
                    v.push(CoverViolation::Overlap(i, j));
                }
            }
        }
        let domain_volume = volume(&self.domain);
        let mut uncovered = BTreeSet::new();
        if domain_volume <= EXHAUSTIVE_LIMIT {
            let mut p: Vec<usize> = self.domain.iter().map(|d| d.0).collect();
            if domain_volume > 0 {
                loop {
                    if !self.regions.iter().any(|r| contains(&r.bounds, &p)) {
                        uncovered.insert(p.clone());
                        if uncovered.len() >= MAX_WITNESSES {
                            break;
                        }
                    }
                    if !step(&mut p, &self.domain) {
                        break;
                    }
                }
            }
        } else {
            let mut rng = XorShift64Star::new(0);
            for _ in 0..RANDOM_POINTS {
                let p: Vec<usize> = self
                    .domain
                    .iter()
                    .map(|&(lo, hi)| lo + (rng.next_u64() % (hi - lo) as u64) as usize)
                    .collect();
                if !self.regions.iter().any(|r| contains(&r.bounds, &p)) {
                    uncovered.insert(p);
                    if uncovered.len() >= MAX_WITNESSES {
                        break;
                    }
                }
            }
            // Disjoint boxes inside the domain cover it iff their volumes
            // add up; this catches gaps random points miss.
            if uncovered.is_empty() && v.is_empty() {
                let total: u128 = self.regions.iter().map(|r| volume(&r.bounds)).sum();
                if total < domain_volume {
                    if let Some(p) = self.find_gap() {
                        uncovered.insert(p);
                    }
                }
            }
        }
        v.extend(uncovered.into_iter().map(CoverViolation::Uncovered));
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    /// Some uncovered point, found by subtracting every region from the
    /// domain box.
    fn find_gap(&self) -> Option<Vec<usize>> {
        let mut free = vec![self.domain.clone()];
        for r in &self.regions {
            free = free
                .into_iter()
                .flat_map(|b| subtract(&b, &r.bounds))
                .collect();
        }
        free.first().map(|b| b.iter().map(|d| d.0).collect())
    }
}

/// Advances `p` to the next lattice point of `bounds`, odometer style.
fn step(p: &mut [usize], bounds: &[(usize, usize)]) -> bool {
    for (x, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *x += 1;
        if *x < hi {
            return true;
        }
        *x = lo;
    }
    false
}

/// `a` minus `b` as disjoint boxes, splitting along dimensions in order.
pub fn subtract(a: &[(usize, usize)], b: &[(usize, usize)]) -> Vec<Bounds> {
    if !intersects(a, b) {
        return vec![a.to_vec()];
    }
    let mut out = Vec::new();
    let mut rest = a.to_vec();
    for d in 0..a.len() {
        let (lo, hi) = rest[d];
        let (blo, bhi) = b[d];
        if lo < blo {
            let mut piece = rest.clone();
            piece[d] = (lo, blo);
            out.push(piece);
        }
        if bhi < hi {
            let mut piece = rest.clone();
            piece[d] = (bhi, hi);
            out.push(piece);
        }
        rest[d] = (lo.max(blo), hi.min(bhi));
    }
    out
}

/// Performance models of one routine, one piecewise model per discrete
/// argument combination.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutineModel {
    pub routine: String,
    /// Names of the size arguments, in signature order.
    pub dims: Vec<String>,
    pub combos: BTreeMap<Vec<char>, PiecewiseModel>,
    /// Arguments held fixed while sampling, such as scalar values and the
    /// leading-dimension policy.
    pub fixed: BTreeMap<String, String>,
    /// Build information such as sample counts and accuracy warnings.
    pub meta: BTreeMap<String, String>,
}

impl RoutineModel {
    pub fn evaluate(
        &self,
        combo: &[char],
        point: &[usize],
        counter: &str,
        stat: Statistic,
    ) -> Result<Evaluation, ModelError> {
        self.combos
            .get(combo)
            .ok_or_else(|| ModelError::UnknownCombo(combo.iter().collect()))?
            .evaluate(point, counter, stat)
    }
}

/// Free-function form of [`RoutineModel::evaluate`].
pub fn evaluate(
    model: &RoutineModel,
    combo: &[char],
    point: &[usize],
    counter: &str,
    stat: Statistic,
) -> Result<Evaluation, ModelError> {
    model.evaluate(combo, point, counter, stat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(domain: Bounds, boxes: Vec<Bounds>) -> PiecewiseModel {
        PiecewiseModel {
            domain,
            regions: boxes.into_iter().map(Region::new).collect(),
            statistics: vec![Statistic::Median],
            counters: vec!["ticks".into()],
        }
    }

    #[test]
    fn cover_examples() {
        assert!(pw(
            vec![(1, 100), (1, 100)],
            vec![vec![(1, 50), (1, 100)], vec![(50, 100), (1, 100)]]
        )
        .validate_cover()
        .is_ok());
        let err = pw(vec![(1, 100)], vec![vec![(1, 60)], vec![(50, 100)]])
            .validate_cover()
            .unwrap_err();
        assert_eq!(err, [CoverViolation::Overlap(0, 1)]);
        let err = pw(vec![(1, 100)], vec![vec![(1, 90)]]).validate_cover().unwrap_err();
        assert!(matches!(err[0], CoverViolation::Uncovered(ref p) if p == &[90]));
    }

    #[test]
    fn large_domain_gap_found_by_volume() {
        let d = vec![(1, 2001), (1, 2001)];
        let left = vec![(1, 1000), (1, 2001)];
        let right = vec![(1001, 2001), (1, 2001)];
        let err = pw(d.clone(), vec![left.clone(), right.clone()])
            .validate_cover()
            .unwrap_err();
        assert!(err.iter().all(|v| matches!(v, CoverViolation::Uncovered(p) if p[0] == 1000)));
        let mid = vec![(1000, 1001), (1, 2001)];
        assert!(pw(d, vec![left, mid, right]).validate_cover().is_ok());
    }

    #[test]
    fn subtraction_is_exact() {
        let a = vec![(0, 10), (0, 10)];
        let b = vec![(3, 5), (2, 20)];
        let parts = subtract(&a, &b);
        assert_eq!(parts.iter().map(|p| volume(p)).sum::<u128>(), 100 - 16);
        for i in 0..parts.len() {
            assert!(!intersects(&parts[i], &b));
            for j in i + 1..parts.len() {
                assert!(!intersects(&parts[i], &parts[j]));
            }
        }
    }

    #[test]
    fn nearest_region_tie_goes_to_lower_index() {
        let m = pw(vec![(0, 10)], vec![vec![(5, 10)], vec![(0, 5)]]);
        assert_eq!(m.locate(&[12]), Some((0, false)));
        assert_eq!(m.locate(&[3]), Some((1, true)));
        let m = pw(
            vec![(0, 10), (0, 10)],
            vec![vec![(0, 5), (0, 10)], vec![(5, 10), (0, 10)]],
        );
        assert_eq!(m.locate(&[7, 20]), Some((0, false)));
        assert_eq!(m.locate(&[9, 10]), Some((1, false)));
    }
}
