use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::par;
use crate::quadrature::gauss_legendre;
use crate::{Error, Result, C64};

use super::resolvent::{solve_column, StaticHamiltonian};

/// Fewest quadrature nodes accepted per rectangle side.
pub const MIN_CONTOUR_NODES: usize = 16;

/// Quadrature rule applied on each side of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ContourRule {
    #[default]
    GaussLegendre,
    Trapezoid,
}

/// Rectangle `{|Im z| ≤ half_height, |Re z| ≤ half_width}` traversed counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSpec {
    pub half_height: f64,
    /// `None` means `‖H‖ + 1`.
    pub half_width: Option<f64>,
    pub nodes: usize,
    pub rule: ContourRule,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            half_height: 1.0,
            half_width: None,
            nodes: 512,
            rule: ContourRule::GaussLegendre,
        }
    }
}

impl ContourSpec {
    pub fn with_nodes(nodes: usize) -> Self {
        ContourSpec {
            nodes,
            ..Self::default()
        }
    }

    /// Checks the node count and that the rectangle strictly encloses `σ(H)`.
    pub fn validate(&self, h: &StaticHamiltonian) -> Result<()> {
        if self.nodes < MIN_CONTOUR_NODES {
            return Err(Error::param(
                "nodes",
                format!("{} nodes per side, need at least {MIN_CONTOUR_NODES}", self.nodes),
            ));
        }
        if !(self.half_height > 0.0 && self.half_height.is_finite()) {
            return Err(Error::param("half_height", "must be positive"));
        }
        let norm = h.norm()?;
        let a = self.width_for(norm);
        if !(a > norm) {
            return Err(Error::param(
                "half_width",
                format!("{a} does not enclose the spectrum (‖H‖ = {norm})"),
            ));
        }
        Ok(())
    }

    fn width_for(&self, norm: f64) -> f64 {
        self.half_width.unwrap_or(norm + 1.0)
    }

    /// Nodes `z_j` and weights `dz_j` such that `∮ f dz ≈ Σ f(z_j) dz_j`.
    pub fn nodes_for(&self, norm: f64, per_side: usize) -> Vec<(C64, C64)> {
        let a = self.width_for(norm);
        let b = self.half_height;
        let corners = [C64::new(-a, -b), C64::new(a, -b), C64::new(a, b), C64::new(-a, b)];
        let rule: Vec<(f64, f64)> = match self.rule {
            ContourRule::GaussLegendre => {
                let (x, w) = gauss_legendre(per_side);
                x.iter().zip(&w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
            }
            ContourRule::Trapezoid => {
                let h = 1.0 / per_side as f64;
                (0..=per_side)
                    .map(|j| {
                        let w = if j == 0 || j == per_side { 0.5 * h } else { h };
                        (j as f64 * h, w)
                    })
                    .collect()
            }
        };
        let mut out = Vec::with_capacity(4 * rule.len());
        for k in 0..4 {
            let (z0, z1) = (corners[k], corners[(k + 1) % 4]);
            let dz = z1 - z0;
            out.extend(rule.iter().map(|&(s, w)| (z0 + dz * s, dz * w)));
        }
        out
    }
}

/// Contour value and the change from halving the node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourValue {
    pub value: C64,
    pub error_estimate: f64,
}

/// `⟨e^{-itH}δ_x, δ_y⟩ = (1/2πi)∮ e^{-itz}⟨R(z)δ_x, δ_y⟩ dz`.
pub fn dunford_propagator(h: &StaticHamiltonian, t: f64, x: usize, y: usize, contour: &ContourSpec) -> Result<ContourValue> {
    if y >= h.site_count() {
        return Err(Error::param("y", format!("site {y} outside box")));
    }
    let fine = dunford_columns(h, x, &[t], contour)?;
    let coarse_spec = ContourSpec {
        nodes: contour.nodes / 2,
        ..contour.clone()
    };
    let coarse = columns_unchecked(h, x, &[t], &coarse_spec, h.norm()?)?;
    let value = fine[0][y];
    Ok(ContourValue {
        value,
        error_estimate: (value - coarse[0][y]).norm(),
    })
}

/// Columns `e^{-itH}δ_x` for every `t`, one resolvent solve per contour node.
pub fn dunford_columns(h: &StaticHamiltonian, x: usize, times: &[f64], contour: &ContourSpec) -> Result<Vec<Vec<C64>>> {
    if x >= h.site_count() {
        return Err(Error::param("x", format!("site {x} outside box")));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("t", "times must be finite"));
    }
    contour.validate(h)?;
    columns_unchecked(h, x, times, contour, h.norm()?)
}

fn columns_unchecked(
    h: &StaticHamiltonian,
    x: usize,
    times: &[f64],
    contour: &ContourSpec,
    norm: f64,
) -> Result<Vec<Vec<C64>>> {
    let nodes = contour.nodes_for(norm, contour.nodes);
    let solved: Vec<Result<Vec<C64>>> = par::map(&nodes, |&(z, _)| solve_column(h, z, x));
    let n = h.site_count();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; times.len()];
    let scale = C64::new(0.0, 2.0 * PI).inv();
    for (&(z, dz), col) in nodes.iter().zip(solved) {
        let col = col?;
        for (t, acc) in times.iter().zip(out.iter_mut()) {
            let f = (C64::new(0.0, -t) * z).exp() * dz * scale;
            for (a, c) in acc.iter_mut().zip(&col) {
                *a += f * c;
            }
        }
    }
    Ok(out)
}
