use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    /// Ordering key (release ordinal or window start).
    pub index: i64,
    pub label: String,
    /// `None` marks an undefined observation.
    pub value: Option<f64>,
}

/// A named sequence of observations with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    points: Vec<Point>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Result<Self, StatsError> {
        let name = name.into();
        let invalid = |reason: String| StatsError::InvalidSeries {
            name: name.clone(),
            reason,
        };
        if let Some(w) = points.windows(2).find(|w| w[0].index >= w[1].index) {
            return Err(invalid(format!(
                "index {} does not increase to {}",
                w[0].index, w[1].index
            )));
        }
        if let Some(p) = points.iter().find(|p| p.value.is_some_and(|v| !v.is_finite())) {
            return Err(invalid(format!("non-finite value at index {}", p.index)));
        }
        Ok(Series { name, points })
    }

    /// Points indexed `0..` with labels equal to the index.
    pub fn from_values(name: impl Into<String>, values: &[f64]) -> Result<Self, StatsError> {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, v)| Point {
                index: i as i64,
                label: i.to_string(),
                value: Some(*v),
            })
            .collect();
        Series::new(name, points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Defined observations in index order.
    pub fn defined(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.points.iter().filter_map(|p| p.value.map(|v| (p, v)))
    }
}

/// Values of `x` and `y` at indices where both are defined, in index order.
pub fn align(x: &Series, y: &Series) -> (Vec<i64>, Vec<f64>, Vec<f64>) {
    let (mut idx, mut xs, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    let (a, b) = (x.points(), y.points());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].index.cmp(&b[j].index) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if let (Some(u), Some(v)) = (a[i].value, b[j].value) {
                    idx.push(a[i].index);
                    xs.push(u);
                    ys.push(v);
                }
                i += 1;
                j += 1;
            }
        }
    }
    (idx, xs, ys)
}
