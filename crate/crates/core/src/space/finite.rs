use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A finite metric space with a positive measure on its points.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: DMatrix<f64>,
    measure: Vec<f64>,
}

/// One defect found by [`FiniteMetricSpace::validate_metric`]. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricDefect {
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    NonZeroDiagonal { i: usize, value: f64 },
    NonPositive { i: usize, j: usize, value: f64 },
    /// `d(x, z) > d(x, via) + d(via, z)`.
    Triangle { x: usize, via: usize, z: usize, excess: f64 },
}

impl fmt::Display for MetricDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricDefect::Asymmetric { i, j, dij, dji } => {
                write!(f, "asymmetric: d({i},{j}) = {dij} but d({j},{i}) = {dji}")
            }
            MetricDefect::NonZeroDiagonal { i, value } => write!(f, "d({i},{i}) = {value} is not zero"),
            MetricDefect::NonPositive { i, j, value } => {
                write!(f, "d({i},{j}) = {value} is not positive for distinct points")
            }
            MetricDefect::Triangle { x, via, z, excess } => {
                write!(f, "triangle ({x},{via},{z}): d({x},{z}) exceeds the path through {via} by {excess}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub defects: Vec<MetricDefect>,
}

impl MetricReport {
    pub fn is_valid(&self) -> bool {
        self.defects.is_empty()
    }
}

impl FiniteMetricSpace {
    /// Builds a space from a square distance matrix. The measure defaults to
    /// counting measure. Metric axioms are not enforced here; see
    /// [`FiniteMetricSpace::validate_metric`].
    pub fn new(labels: Vec<String>, dist: DMatrix<f64>, measure: Option<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if dist.nrows() != n || dist.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} labels but a {}x{} distance matrix",
                dist.nrows(),
                dist.ncols()
            )));
        }
        if let Some(bad) = dist.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument(format!("distance {bad} is not finite")));
        }
        let measure = measure.unwrap_or_else(|| vec![1.0; n]);
        if measure.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} points but {} measure weights",
                measure.len()
            )));
        }
        if let Some(bad) = measure.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidArgument(format!("measure weight {bad} must be positive")));
        }
        Ok(FiniteMetricSpace { labels, dist, measure })
    }

    /// Euclidean distances between the given points.
    pub fn from_points(coords: &[Vec<f64>], measure: Option<Vec<f64>>) -> Result<Self> {
        if let Some(first) = coords.first() {
            let dim = first.len();
            if let Some((i, p)) = coords.iter().enumerate().find(|(_, p)| p.len() != dim) {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has dimension {} but point 0 has {dim}",
                    p.len()
                )));
            }
        }
        let n = coords.len();
        let dist = DMatrix::from_fn(n, n, |i, j| {
            coords[i]
                .iter()
                .zip(&coords[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        });
        let labels = (1..=n).map(|i| i.to_string()).collect();
        FiniteMetricSpace::new(labels, dist, measure)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn min_distance(&self) -> Option<f64> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.dist[(i, j)])
            .min_by(f64::total_cmp)
    }

    /// Lists every symmetry, diagonal, positivity and triangle defect.
    pub fn validate_metric(&self) -> MetricReport {
        let n = self.len();
        let d = &self.dist;
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let slack = 1e-12 * scale;
        let mut defects = Vec::new();
        for i in 0..n {
            if d[(i, i)] != 0.0 {
                defects.push(MetricDefect::NonZeroDiagonal { i, value: d[(i, i)] });
            }
            for j in i + 1..n {
                if (d[(i, j)] - d[(j, i)]).abs() > slack {
                    defects.push(MetricDefect::Asymmetric { i, j, dij: d[(i, j)], dji: d[(j, i)] });
                }
                for (a, b) in [(i, j), (j, i)] {
                    if d[(a, b)] <= 0.0 {
                        defects.push(MetricDefect::NonPositive { i: a, j: b, value: d[(a, b)] });
                    }
                }
            }
        }
        for x in 0..n {
            for z in x + 1..n {
                for via in 0..n {
                    if via == x || via == z {
                        continue;
                    }
                    let excess = d[(x, z)] - (d[(x, via)] + d[(via, z)]);
                    if excess > slack {
                        defects.push(MetricDefect::Triangle { x, via, z, excess });
                    }
                }
            }
        }
        MetricReport { defects }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn from_points_examples() {
        let two = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0]], None).unwrap();
        assert_eq!(two.dist()[(0, 1)], 1.0);
        let h = 3f64.sqrt() / 2.0;
        let tri = FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]], None).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((tri.dist()[(i, j)] - 1.0).abs() < 1e-15);
        }
        let sq = FiniteMetricSpace::from_points(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            None,
        )
        .unwrap();
        assert!((sq.dist()[(0, 2)] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(sq.measure(), &[1.0; 4]);
    }

    #[test]
    fn dimension_mismatch() {
        let r = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0, 2.0]], None);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        let r = FiniteMetricSpace::new(labelled(2), DMatrix::zeros(3, 3), None);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn triangle_violation_reported() {
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]);
        let s = FiniteMetricSpace::new(labelled(3), d, None).unwrap();
        let report = s.validate_metric();
        assert_eq!(report.defects.len(), 1);
        assert!(matches!(report.defects[0], MetricDefect::Triangle { x: 0, via: 1, z: 2, .. }));
    }

    #[test]
    fn asymmetry_reported() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        let s = FiniteMetricSpace::new(labelled(2), d, None).unwrap();
        let report = s.validate_metric();
        assert!(report.defects.iter().any(|e| matches!(e, MetricDefect::Asymmetric { i: 0, j: 1, .. })));
    }

    #[test]
    fn valid_space_has_empty_report() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0], vec![-1.0, 2.0]], None).unwrap();
        assert!(s.validate_metric().is_valid());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn euclidean_configurations_are_metrics(
                pts in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..8)
            ) {
                // coincident points would give a zero distance; those are rejected by the validator
                let s = FiniteMetricSpace::from_points(&pts, None).unwrap();
                let min = s.min_distance().unwrap_or(1.0);
                prop_assume!(min > 1e-9);
                prop_assert!(s.validate_metric().is_valid(), "{:?}", s.validate_metric());
            }
        }
    }
}
