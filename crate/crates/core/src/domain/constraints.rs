//! Fixed-value constraints and point snapping.

use thiserror::Error;

use crate::domain::grid::GridDomain;
use crate::domain::mesh::TriMesh;
use crate::scalar::{real, to_f64, Real};

#[derive(Debug, Error)]
pub enum ConstraintError {
    #[error("duplicate constraint index {0}")]
    DuplicateIndex(usize),
    #[error("points {a} and {b} snap to the same node {index}")]
    DuplicateSnap { a: usize, b: usize, index: usize },
    #[error(
        "point {point} at distance {distance:e} from the nearest node exceeds \
         the snap radius {radius:e}"
    )]
    TooFar { point: usize, distance: f64, radius: f64 },
    #[error("points and values have different lengths ({points} vs {values})")]
    LengthMismatch { points: usize, values: usize },
}

/// An ordered set of `(index, value)` pins with unique indices.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSet<T> {
    entries: Vec<(usize, T)>,
}

impl<T: Real> ConstraintSet<T> {
    pub fn new(entries: Vec<(usize, T)>) -> Result<Self, ConstraintError> {
        let mut seen: Vec<usize> = entries.iter().map(|&(i, _)| i).collect();
        seen.sort_unstable();
        for pair in seen.windows(2) {
            if pair[0] == pair[1] {
                return Err(ConstraintError::DuplicateIndex(pair[0]));
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.entries.iter().copied()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|&(i, _)| i).collect()
    }

    pub fn max_abs_value(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, &(_, v)| acc.max(v.abs()))
    }
}

/// Anything points can be snapped onto: an indexed set of sites plus the
/// rejection radius for far-away points.
pub trait SnapSites<T: Real> {
    fn site_count(&self) -> usize;
    fn site_position(&self, index: usize) -> [T; 3];
    fn snap_radius(&self) -> T;
}

impl<T: Real> SnapSites<T> for GridDomain<T> {
    fn site_count(&self) -> usize {
        self.num_dofs()
    }

    fn site_position(&self, index: usize) -> [T; 3] {
        let [x, y] = self.position(index);
        [x, y, T::zero()]
    }

    fn snap_radius(&self) -> T {
        real::<T>(2.0) * self.spacing()
    }
}

impl<T: Real> SnapSites<T> for TriMesh<T> {
    fn site_count(&self) -> usize {
        self.num_vertices()
    }

    fn site_position(&self, index: usize) -> [T; 3] {
        self.position(index)
    }

    fn snap_radius(&self) -> T {
        real::<T>(2.0) * self.mean_edge_length()
    }
}

/// Maps each point to the nearest node/vertex (ties to the lower index) and
/// pairs it with its value. Rejects points beyond the snap radius and pairs
/// of points landing on the same node.
pub fn snap_points<T: Real, D: SnapSites<T>>(
    domain: &D,
    points: &[[T; 3]],
    values: &[T],
) -> Result<ConstraintSet<T>, ConstraintError> {
    if points.len() != values.len() {
        return Err(ConstraintError::LengthMismatch { points: points.len(), values: values.len() });
    }
    let radius = domain.snap_radius();
    let mut entries = Vec::with_capacity(points.len());
    let mut snapped: Vec<(usize, usize)> = Vec::new(); // (site, point)
    for (pidx, point) in points.iter().enumerate() {
        let mut best = 0usize;
        let mut best_d2 = T::infinity();
        for s in 0..domain.site_count() {
            let pos = domain.site_position(s);
            let mut d2 = T::zero();
            for c in 0..3 {
                let d = pos[c] - point[c];
                d2 += d * d;
            }
            if d2 < best_d2 {
                best_d2 = d2;
                best = s;
            }
        }
        let dist = best_d2.sqrt();
        if dist > radius {
            return Err(ConstraintError::TooFar {
                point: pidx,
                distance: to_f64(dist),
                radius: to_f64(radius),
            });
        }
        if let Some(&(_, other)) = snapped.iter().find(|&&(s, _)| s == best) {
            return Err(ConstraintError::DuplicateSnap { a: other, b: pidx, index: best });
        }
        snapped.push((best, pidx));
        entries.push((best, values[pidx]));
    }
    ConstraintSet::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_indices_rejected() {
        assert!(matches!(
            ConstraintSet::new(vec![(3, 1.0), (3, 2.0)]),
            Err(ConstraintError::DuplicateIndex(3))
        ));
    }

    struct Line;

    impl SnapSites<f64> for Line {
        fn site_count(&self) -> usize {
            5
        }
        fn site_position(&self, index: usize) -> [f64; 3] {
            [index as f64, 0.0, 0.0]
        }
        fn snap_radius(&self) -> f64 {
            2.0
        }
    }

    #[test]
    fn exact_hit_snaps_to_that_site() {
        let cs = snap_points(&Line, &[[3.0, 0.0, 0.0]], &[7.0]).unwrap();
        assert_eq!(cs.iter().next(), Some((3, 7.0)));
    }

    #[test]
    fn midpoint_tie_breaks_to_lower_index() {
        let cs = snap_points(&Line, &[[2.5, 0.0, 0.0]], &[1.0]).unwrap();
        assert_eq!(cs.iter().next(), Some((2, 1.0)));
    }

    #[test]
    fn far_point_is_rejected() {
        assert!(matches!(
            snap_points(&Line, &[[10.0, 0.0, 0.0]], &[0.0]),
            Err(ConstraintError::TooFar { .. })
        ));
    }

    #[test]
    fn same_site_collision_is_rejected() {
        assert!(matches!(
            snap_points(&Line, &[[1.0, 0.0, 0.0], [1.2, 0.0, 0.0]], &[0.0, 1.0]),
            Err(ConstraintError::DuplicateSnap { index: 1, .. })
        ));
    }
}
