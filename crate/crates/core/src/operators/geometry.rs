use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Norm used for `|x|` and `|x - y|` on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormChoice {
    #[default]
    Euclidean,
    Sup,
    Taxicab,
}

impl NormChoice {
    pub fn name(self) -> &'static str {
        match self {
            NormChoice::Euclidean => "euclidean",
            NormChoice::Sup => "sup",
            NormChoice::Taxicab => "taxicab",
        }
    }

    /// Norm of an integer vector given by its components.
    pub fn of<I: IntoIterator<Item = i64>>(self, comps: I) -> f64 {
        match self {
            NormChoice::Euclidean => (comps.into_iter().map(|c| (c * c) as f64).sum::<f64>()).sqrt(),
            NormChoice::Sup => comps.into_iter().map(|c| c.abs()).max().unwrap_or(0) as f64,
            NormChoice::Taxicab => comps.into_iter().map(|c| c.abs()).sum::<i64>() as f64,
        }
    }
}

/// The box `{x ∈ Z^d : |x_i| ≤ L}` with a row-major site enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxGeometry {
    pub dimension: usize,
    pub half_width: usize,
    #[serde(default)]
    pub norm: NormChoice,
}

impl BoxGeometry {
    pub fn new(dimension: usize, half_width: usize, norm: NormChoice) -> Result<Self> {
        let g = Self {
            dimension,
            half_width,
            norm,
        };
        g.validate()?;
        Ok(g)
    }

    /// Euclidean box, the default norm.
    pub fn cube(dimension: usize, half_width: usize) -> Result<Self> {
        Self::new(dimension, half_width, NormChoice::Euclidean)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Geometry("dimension must be positive".into()));
        }
        if self.half_width == 0 {
            return Err(Error::Geometry("half-width must be positive".into()));
        }
        let side = 2 * self.half_width as u128 + 1;
        let count = (0..self.dimension).try_fold(1u128, |acc, _| acc.checked_mul(side));
        match count {
            Some(c) if c <= (1u128 << 32) => Ok(()),
            _ => Err(Error::Geometry(format!(
                "box with d={} L={} has too many sites",
                self.dimension, self.half_width
            ))),
        }
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    /// `(2L+1)^d`.
    pub fn site_count(&self) -> usize {
        self.side().pow(self.dimension as u32)
    }

    /// Coordinate of site `index` along `axis`.
    #[inline]
    pub fn coord(&self, index: usize, axis: usize) -> i64 {
        let side = self.side();
        let stride = side.pow((self.dimension - 1 - axis) as u32);
        ((index / stride) % side) as i64 - self.half_width as i64
    }

    pub fn coords(&self, index: usize) -> Vec<i64> {
        (0..self.dimension).map(|a| self.coord(index, a)).collect()
    }

    /// Flat index of a site, `None` outside the box.
    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.dimension {
            return None;
        }
        let l = self.half_width as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &c in coords {
            if c < -l || c > l {
                return None;
            }
            idx = idx * side + (c + l) as usize;
        }
        Some(idx)
    }

    /// Index of the origin.
    pub fn origin(&self) -> usize {
        self.index_of(&vec![0; self.dimension])
            .expect("origin lies in every box")
    }

    /// `|x|` of site `i` in the configured norm.
    #[inline]
    pub fn norm_of(&self, i: usize) -> f64 {
        self.norm.of((0..self.dimension).map(|a| self.coord(i, a)))
    }

    /// `|x - y|` between sites `i` and `j`.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.norm
            .of((0..self.dimension).map(|a| self.coord(i, a) - self.coord(j, a)))
    }

    /// `|x|` for every site.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.site_count()).map(|i| self.norm_of(i)).collect()
    }

    /// Largest `|x|` attained in the box.
    pub fn max_radius(&self) -> f64 {
        let l = self.half_width as i64;
        self.norm.of(std::iter::repeat_n(l, self.dimension))
    }
}
