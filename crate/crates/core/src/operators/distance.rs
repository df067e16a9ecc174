use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::BoxGeometry;
use crate::{par, Error, Result};

/// Source set of a distance field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistanceSource {
    /// Lattice ball `{x : |x| ≤ radius}`.
    Ball { radius: f64 },
    /// Explicit site indices.
    Sites { sites: Vec<usize> },
    /// Values supplied directly; only the Lipschitz property is assumed.
    Custom,
}

/// Site-wise distance `φ(x) = min_{y ∈ X} |x - y|`, or any supplied 1-Lipschitz field.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    geometry: BoxGeometry,
    values: Vec<f64>,
    source: DistanceSource,
}

impl DistanceField {
    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &DistanceSource {
        &self.source
    }

    pub fn at(&self, site: usize) -> f64 {
        self.values[site]
    }

    /// Wraps arbitrary per-site values (for instance a random 1-Lipschitz field).
    pub fn from_values(geometry: BoxGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.site_count() {
            return Err(Error::param(
                "values",
                format!("expected {} entries, got {}", geometry.site_count(), values.len()),
            ));
        }
        Ok(Self {
            geometry,
            values,
            source: DistanceSource::Custom,
        })
    }

    /// Largest `|φ(x) - φ(y)| - |x - y|` over all pairs, or over `samples`
    /// seeded random pairs when that is smaller than the pair count.
    pub fn lipschitz_excess(&self, samples: usize, seed: u64) -> f64 {
        let n = self.values.len();
        let excess = |i: usize, j: usize| (self.values[i] - self.values[j]).abs() - self.geometry.distance(i, j);
        if n * n <= samples {
            let rows: Vec<usize> = (0..n).collect();
            par::map(&rows, |&i| (0..n).map(|j| excess(i, j)).fold(f64::NEG_INFINITY, f64::max))
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| {
                    let i = (rng.next_u64() % n as u64) as usize;
                    let j = (rng.next_u64() % n as u64) as usize;
                    excess(i, j)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Exact distance to a source set by exhaustive minimization over source sites.
pub fn distance_field(geometry: BoxGeometry, source: DistanceSource) -> Result<DistanceField> {
    geometry.validate()?;
    let sites: Vec<usize> = match &source {
        DistanceSource::Ball { radius } => {
            if !(*radius >= 0.0) {
                return Err(Error::param("radius", format!("must be nonnegative, got {radius}")));
            }
            (0..geometry.site_count())
                .filter(|&i| geometry.norm_of(i) <= *radius)
                .collect()
        }
        DistanceSource::Sites { sites } => {
            if let Some(&bad) = sites.iter().find(|&&s| s >= geometry.site_count()) {
                return Err(Error::param("sites", format!("site {bad} lies outside the box")));
            }
            sites.clone()
        }
        DistanceSource::Custom => {
            return Err(Error::param("source", "custom fields are built with DistanceField::from_values"))
        }
    };
    if sites.is_empty() {
        return Err(Error::EmptySource);
    }
    let all: Vec<usize> = (0..geometry.site_count()).collect();
    let values = par::map(&all, |&x| {
        sites
            .iter()
            .map(|&y| geometry.distance(x, y))
            .fold(f64::INFINITY, f64::min)
    });
    Ok(DistanceField {
        geometry,
        values,
        source,
    })
}
