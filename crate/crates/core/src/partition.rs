//! Weighted finite partitions of the input space.
//!
//! A partition is a list of box-shaped cells covering a domain box,
//! each carrying an exact probability weight; the weights sum to 1
//! with zero tolerance. Int-mode cells are literally disjoint;
//! real-mode cells may share boundary faces, which carry measure zero
//! under the piecewise-constant densities in scope.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::domain::Interval;
use crate::lang::NumKind;
use crate::num::{format_rational, ExtRational, Finite, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMode {
    DiscreteInt,
    ContinuousReal,
}

impl PartitionMode {
    pub fn kind(self) -> NumKind {
        match self {
            PartitionMode::DiscreteInt => NumKind::Int,
            PartitionMode::ContinuousReal => NumKind::Real,
        }
    }
}

impl fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionMode::DiscreteInt => write!(f, "discrete-int"),
            PartitionMode::ContinuousReal => write!(f, "continuous-real"),
        }
    }
}

/// One partition element: a box over the input variables and its
/// probability mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub region: BTreeMap<String, Interval>,
    pub weight: Rational,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PartitionError {
    #[error("weights sum to {0}, expected 1")]
    WeightSum(String),
    #[error("cell weight {0} is outside [0, 1]")]
    WeightRange(String),
    #[error("cells {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("coverage gap: sub-box {0} of the domain is covered by no cell")]
    CoverageGap(String),
    #[error("cell {cell} does not bind variable `{var}`")]
    MissingVariable { cell: usize, var: String },
    #[error("cell {cell} leaves the domain in dimension `{var}`")]
    OutsideDomain { cell: usize, var: String },
    #[error("dimension `{0}` is unbounded; a uniform grid needs a finite domain")]
    InfiniteDomain(String),
    #[error("subdivision count for `{0}` must be at least 1")]
    ZeroSubdivision(String),
    #[error("refine requires a grid partition")]
    NotAGrid,
    #[error("partition has no cells")]
    EmptyPartition,
    #[error("interval endpoints do not fit mode {0}: {1}")]
    BadInterval(String, String),
}

/// A validated weighted partition. `dims` fixes the variable order used
/// for cell indexing (last dimension varies fastest in grids).
#[derive(Debug, Clone, PartialEq)]
pub struct InputPartition {
    mode: PartitionMode,
    dims: Vec<String>,
    domain: BTreeMap<String, Interval>,
    cells: Vec<Cell>,
    grid: Option<BTreeMap<String, u32>>,
}

impl InputPartition {
    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    pub fn dims(&self) -> &[String] {
        &self.dims
    }

    pub fn domain(&self) -> &BTreeMap<String, Interval> {
        &self.domain
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_grid(&self) -> bool {
        self.grid.is_some()
    }

    /// Product grid of equal-width sub-boxes with the uniform measure:
    /// every cell gets weight `1 / (product of subdivision counts)`.
    pub fn grid(
        dims: Vec<(String, Interval)>,
        subdivisions: &BTreeMap<String, u32>,
    ) -> Result<InputPartition, PartitionError> {
        if dims.is_empty() {
            return Err(PartitionError::EmptyPartition);
        }
        let mode = match dims[0].1.kind() {
            NumKind::Int => PartitionMode::DiscreteInt,
            NumKind::Real => PartitionMode::ContinuousReal,
        };
        let mut per_dim: Vec<(String, Vec<Interval>)> = Vec::new();
        let mut total = 1u64;
        for (name, domain_itv) in &dims {
            if !domain_itv.is_finite() {
                return Err(PartitionError::InfiniteDomain(name.clone()));
            }
            let n = *subdivisions
                .get(name)
                .ok_or_else(|| PartitionError::ZeroSubdivision(name.clone()))?;
            if n == 0 {
                return Err(PartitionError::ZeroSubdivision(name.clone()));
            }
            total = total
                .checked_mul(n as u64)
                .expect("grid size overflows u64");
            per_dim.push((name.clone(), domain_itv.split_even(n)));
        }
        let weight = Rational::one() / Rational::from_integer(total.into());
        let mut cells = Vec::with_capacity(total as usize);
        let mut index = vec![0usize; per_dim.len()];
        loop {
            let region: BTreeMap<String, Interval> = per_dim
                .iter()
                .zip(&index)
                .map(|((name, pieces), &i)| (name.clone(), pieces[i].clone()))
                .collect();
            cells.push(Cell { region, weight: weight.clone() });
            // odometer increment, last dimension fastest
            let mut d = per_dim.len();
            loop {
                if d == 0 {
                    let domain = dims.iter().cloned().collect();
                    return Ok(InputPartition {
                        mode,
                        dims: dims.iter().map(|(n, _)| n.clone()).collect(),
                        domain,
                        cells,
                        grid: Some(
                            dims.iter().map(|(n, _)| (n.clone(), subdivisions[n])).collect(),
                        ),
                    });
                }
                d -= 1;
                index[d] += 1;
                if index[d] < per_dim[d].1.len() {
                    break;
                }
                index[d] = 0;
            }
        }
    }

    /// Validate an explicitly listed partition: weights sum to 1, cells
    /// are pairwise disjoint (int) or interior-disjoint (real), and the
    /// cells tile the domain box exactly.
    pub fn explicit(
        dims: Vec<(String, Interval)>,
        cells: Vec<Cell>,
        mode: PartitionMode,
    ) -> Result<InputPartition, PartitionError> {
        if cells.is_empty() {
            return Err(PartitionError::EmptyPartition);
        }
        let kind = mode.kind();
        for (name, itv) in &dims {
            if itv.kind() != kind {
                return Err(PartitionError::BadInterval(mode.to_string(), name.clone()));
            }
        }
        let mut sum = Rational::zero();
        for (ci, cell) in cells.iter().enumerate() {
            if cell.weight < Rational::zero() || cell.weight > Rational::one() {
                return Err(PartitionError::WeightRange(format_rational(&cell.weight)));
            }
            sum += &cell.weight;
            for (name, domain_itv) in &dims {
                let itv = cell
                    .region
                    .get(name)
                    .ok_or_else(|| PartitionError::MissingVariable { cell: ci, var: name.clone() })?;
                if itv.kind() != kind {
                    return Err(PartitionError::BadInterval(mode.to_string(), itv.to_string()));
                }
                if !domain_itv.contains_interval(itv) {
                    return Err(PartitionError::OutsideDomain { cell: ci, var: name.clone() });
                }
            }
        }
        if !sum.is_one() {
            return Err(PartitionError::WeightSum(format_rational(&sum)));
        }

        // Pairwise disjointness: some dimension must separate each pair.
        for i in 0..cells.len() {
            for j in (i + 1)..cells.len() {
                let separated = dims.iter().any(|(name, _)| {
                    let a = &cells[i].region[name];
                    let b = &cells[j].region[name];
                    match mode {
                        PartitionMode::DiscreteInt => a.meet(b).is_none(),
                        // interiors disjoint: shared faces are fine
                        PartitionMode::ContinuousReal => !a.overlaps(b),
                    }
                });
                if !separated {
                    return Err(PartitionError::Overlap(i, j));
                }
            }
        }

        check_coverage(&dims, &cells, mode)?;

        let domain = dims.iter().cloned().collect();
        Ok(InputPartition {
            mode,
            dims: dims.into_iter().map(|(n, _)| n).collect(),
            domain,
            cells,
            grid: None,
        })
    }

    /// Split every grid cell into `factor^dims` sub-cells, dividing its
    /// weight evenly (valid for the uniform in-cell densities in scope).
    pub fn refine(&self, factor: u32) -> Result<InputPartition, PartitionError> {
        let grid = self.grid.as_ref().ok_or(PartitionError::NotAGrid)?;
        assert!(factor >= 1, "refinement factor must be at least 1");
        let subdivisions: BTreeMap<String, u32> =
            grid.iter().map(|(name, n)| (name.clone(), n * factor)).collect();
        let dims: Vec<(String, Interval)> = self
            .dims
            .iter()
            .map(|name| (name.clone(), self.domain[name].clone()))
            .collect();
        InputPartition::grid(dims, &subdivisions)
    }

    /// Indices of the cells of `finer` contained in cell `i` of `self`.
    /// Both must be grids over the same domain.
    pub fn children_in(&self, finer: &InputPartition, coarse_index: usize) -> Vec<usize> {
        let coarse = &self.cells[coarse_index];
        finer
            .cells
            .iter()
            .enumerate()
            .filter(|(_, fine)| {
                self.dims
                    .iter()
                    .all(|d| coarse.region[d].contains_interval(&fine.region[d]))
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn total_weight(&self) -> Rational {
        self.cells.iter().map(|c| c.weight.clone()).sum()
    }
}

/// Exact coverage check by breakpoint refinement: cut every dimension at
/// every cell bound, then require each induced sub-box to lie inside at
/// least one cell (exactly one would also hold, given disjointness).
fn check_coverage(
    dims: &[(String, Interval)],
    cells: &[Cell],
    mode: PartitionMode,
) -> Result<(), PartitionError> {
    let kind = mode.kind();
    let one = Rational::one();
    let mut per_dim_pieces: Vec<Vec<Interval>> = Vec::new();
    for (name, domain_itv) in dims {
        let mut cuts: Vec<ExtRational> = vec![domain_itv.lo().clone(), domain_itv.hi().clone()];
        for cell in cells {
            let itv = &cell.region[name];
            cuts.push(itv.lo().clone());
            cuts.push(itv.hi().clone());
            if mode == PartitionMode::DiscreteInt {
                // an int cell boundary also cuts at the next integer
                if let Finite(r) = itv.hi() {
                    cuts.push(Finite(r + &one));
                }
                if let Finite(r) = itv.lo() {
                    cuts.push(Finite(r - &one));
                }
            }
        }
        cuts.sort();
        cuts.dedup();
        cuts.retain(|c| c >= domain_itv.lo() && c <= domain_itv.hi());
        let mut pieces = Vec::new();
        match mode {
            PartitionMode::ContinuousReal => {
                for w in cuts.windows(2) {
                    if let Ok(itv) = Interval::new(w[0].clone(), w[1].clone(), kind) {
                        if !itv.is_point() {
                            pieces.push(itv);
                        }
                    }
                }
            }
            PartitionMode::DiscreteInt => {
                // maximal integer runs between consecutive cuts
                for (i, c) in cuts.iter().enumerate() {
                    let next = cuts.get(i + 1);
                    if let Ok(point) = Interval::new(c.clone(), c.clone(), kind) {
                        pieces.push(point);
                    }
                    if let Some(next) = next {
                        let lo = match c {
                            Finite(r) => Finite(r + &one),
                            e => e.clone(),
                        };
                        let hi = match next {
                            Finite(r) => Finite(r - &one),
                            e => e.clone(),
                        };
                        if let Ok(run) = Interval::new(lo, hi, kind) {
                            pieces.push(run);
                        }
                    }
                }
            }
        }
        if pieces.is_empty() {
            pieces.push(domain_itv.clone());
        }
        per_dim_pieces.push(pieces);
    }

    // Walk the induced sub-grid; its size is bounded by the product of
    // cut counts, small for the hand-written partitions this validates.
    let mut index = vec![0usize; dims.len()];
    loop {
        let sub: Vec<&Interval> = per_dim_pieces
            .iter()
            .zip(&index)
            .map(|(pieces, &i)| &pieces[i])
            .collect();
        let covered = cells.iter().any(|cell| {
            dims.iter()
                .zip(&sub)
                .all(|((name, _), piece)| cell.region[name].contains_interval(piece))
        });
        if !covered {
            let desc = dims
                .iter()
                .zip(&sub)
                .map(|((name, _), piece)| format!("{name} in {piece}"))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(PartitionError::CoverageGap(desc));
        }
        let mut d = dims.len();
        loop {
            if d == 0 {
                return Ok(());
            }
            d -= 1;
            index[d] += 1;
            if index[d] < per_dim_pieces[d].len() {
                break;
            }
            index[d] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::signs;
    use crate::num::rat;

    fn unit(kind: NumKind) -> Interval {
        Interval::of(0, 1, kind)
    }

    fn real_grid(names: &[&str], counts: &[u32]) -> InputPartition {
        let dims: Vec<(String, Interval)> =
            names.iter().map(|n| (n.to_string(), unit(NumKind::Real))).collect();
        let subdivisions: BTreeMap<String, u32> = names
            .iter()
            .zip(counts)
            .map(|(n, c)| (n.to_string(), *c))
            .collect();
        InputPartition::grid(dims, &subdivisions).unwrap()
    }

    #[test]
    fn unit_cube_grid_has_ten_thousand_cells() {
        let p = real_grid(&["x1", "x2", "x3", "x4"], &[10, 10, 10, 10]);
        assert_eq!(p.len(), 10_000);
        assert_eq!(p.cells()[0].weight, rat(1, 10_000));
        assert!(p.total_weight().is_one());
    }

    #[test]
    fn six_cell_grid_weights() {
        let p = real_grid(&["x1", "x2", "x3", "x4", "x5"], &[1, 1, 1, 2, 3]);
        assert_eq!(p.len(), 6);
        assert!(p.cells().iter().all(|c| c.weight == rat(1, 6)));
        // last dimension varies fastest
        assert_eq!(
            p.cells()[0].region["x5"],
            Interval::new(rat(0, 1), rat(1, 3), NumKind::Real).unwrap()
        );
        assert_eq!(
            p.cells()[1].region["x5"],
            Interval::new(rat(1, 3), rat(2, 3), NumKind::Real).unwrap()
        );
        assert_eq!(
            p.cells()[3].region["x4"],
            Interval::new(rat(1, 2), rat(1, 1), NumKind::Real).unwrap()
        );
    }

    #[test]
    fn trivial_grid_is_one_cell() {
        let p = real_grid(&["a", "b"], &[1, 1]);
        assert_eq!(p.len(), 1);
        assert!(p.cells()[0].weight.is_one());
    }

    #[test]
    fn grid_tiles_domain() {
        let p = real_grid(&["x", "y"], &[3, 2]);
        // union of boxes equals the domain: check via coverage machinery
        let dims: Vec<(String, Interval)> = p
            .dims()
            .iter()
            .map(|d| (d.clone(), p.domain()[d].clone()))
            .collect();
        check_coverage(&dims, p.cells(), PartitionMode::ContinuousReal).unwrap();
    }

    fn sign_partition() -> InputPartition {
        let dims = vec![("x".to_string(), Interval::unbounded(NumKind::Int))];
        let cells = vec![
            Cell {
                region: [("x".to_string(), signs::negatives())].into(),
                weight: rat(1, 3),
            },
            Cell { region: [("x".to_string(), signs::zero())].into(), weight: rat(1, 4) },
            Cell {
                region: [("x".to_string(), signs::positives())].into(),
                weight: rat(5, 12),
            },
        ];
        InputPartition::explicit(dims, cells, PartitionMode::DiscreteInt).unwrap()
    }

    #[test]
    fn sign_partition_is_valid() {
        let p = sign_partition();
        assert_eq!(p.len(), 3);
        assert!(p.total_weight().is_one());
    }

    #[test]
    fn bad_weight_sum_is_reported() {
        let dims = vec![("x".to_string(), unit(NumKind::Real))];
        let cells = vec![
            Cell {
                region: [("x".to_string(), Interval::new(rat(0, 1), rat(1, 2), NumKind::Real).unwrap())]
                    .into(),
                weight: rat(1, 2),
            },
            Cell {
                region: [("x".to_string(), Interval::new(rat(1, 2), rat(1, 1), NumKind::Real).unwrap())]
                    .into(),
                weight: rat(1, 3),
            },
        ];
        let err = InputPartition::explicit(dims, cells, PartitionMode::ContinuousReal).unwrap_err();
        assert_eq!(err, PartitionError::WeightSum("5/6".into()));
    }

    #[test]
    fn shared_endpoint_is_allowed_in_real_mode() {
        let dims = vec![("x".to_string(), unit(NumKind::Real))];
        let cells = vec![
            Cell {
                region: [("x".to_string(), Interval::new(rat(0, 1), rat(1, 2), NumKind::Real).unwrap())]
                    .into(),
                weight: rat(1, 2),
            },
            Cell {
                region: [("x".to_string(), Interval::new(rat(1, 2), rat(1, 1), NumKind::Real).unwrap())]
                    .into(),
                weight: rat(1, 2),
            },
        ];
        InputPartition::explicit(dims, cells, PartitionMode::ContinuousReal).unwrap();
    }

    #[test]
    fn overlap_and_gap_are_rejected() {
        let dims = vec![("x".to_string(), unit(NumKind::Real))];
        let overlapping = vec![
            Cell {
                region: [("x".to_string(), Interval::new(rat(0, 1), rat(3, 5), NumKind::Real).unwrap())]
                    .into(),
                weight: rat(1, 2),
            },
            Cell {
                region: [("x".to_string(), Interval::new(rat(1, 2), rat(1, 1), NumKind::Real).unwrap())]
                    .into(),
                weight: rat(1, 2),
            },
        ];
        assert!(matches!(
            InputPartition::explicit(dims.clone(), overlapping, PartitionMode::ContinuousReal),
            Err(PartitionError::Overlap(0, 1))
        ));
        let gappy = vec![
            Cell {
                region: [("x".to_string(), Interval::new(rat(0, 1), rat(2, 5), NumKind::Real).unwrap())]
                    .into(),
                weight: rat(1, 2),
            },
            Cell {
                region: [("x".to_string(), Interval::new(rat(3, 5), rat(1, 1), NumKind::Real).unwrap())]
                    .into(),
                weight: rat(1, 2),
            },
        ];
        assert!(matches!(
            InputPartition::explicit(dims, gappy, PartitionMode::ContinuousReal),
            Err(PartitionError::CoverageGap(_))
        ));
    }

    #[test]
    fn int_gap_is_rejected() {
        let dims = vec![("x".to_string(), Interval::unbounded(NumKind::Int))];
        let cells = vec![
            Cell { region: [("x".to_string(), signs::negatives())].into(), weight: rat(1, 2) },
            Cell { region: [("x".to_string(), signs::positives())].into(), weight: rat(1, 2) },
        ];
        // zero is uncovered
        assert!(matches!(
            InputPartition::explicit(dims, cells, PartitionMode::DiscreteInt),
            Err(PartitionError::CoverageGap(_))
        ));
    }

    #[test]
    fn refinement_multiplies_cells() {
        let p = real_grid(&["x1", "x2", "x3", "x4", "x5"], &[1, 1, 1, 2, 3]);
        let r = p.refine(2).unwrap();
        assert_eq!(r.len(), 192); // 6 * 2^5
        assert!(r.total_weight().is_one());
        let identical = p.refine(1).unwrap();
        assert_eq!(identical, p);
        let q = real_grid(&["x", "y"], &[1, 1]).refine(3).unwrap();
        assert_eq!(q.len(), 9);
        assert!(q.cells().iter().all(|c| c.weight == rat(1, 9)));
    }

    #[test]
    fn refine_preserves_parent_mass() {
        let p = real_grid(&["x", "y"], &[2, 2]);
        let r = p.refine(3).unwrap();
        for i in 0..p.len() {
            let children = p.children_in(&r, i);
            assert_eq!(children.len(), 9);
            let mass: Rational = children.iter().map(|&j| r.cells()[j].weight.clone()).sum();
            assert_eq!(mass, p.cells()[i].weight);
        }
    }

    #[test]
    fn explicit_partition_refuses_refine() {
        let p = sign_partition();
        assert!(matches!(p.refine(2), Err(PartitionError::NotAGrid)));
    }

    #[test]
    fn grid_needs_finite_domain() {
        let dims = vec![("x".to_string(), Interval::unbounded(NumKind::Int))];
        let mut subs = BTreeMap::new();
        subs.insert("x".to_string(), 3u32);
        assert!(matches!(
            InputPartition::grid(dims, &subs),
            Err(PartitionError::InfiniteDomain(_))
        ));
    }
}
