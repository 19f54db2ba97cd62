//! Spectral coordinates: the empirical coefficient vector, the candidate
//! basis vectors on an `h`-grid, and the certified grid error.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::hermite::{y_norm_gaussian_diff, HermiteContext};
use crate::preprocess::MetaSample;

pub const DEFAULT_J: usize = 30;
pub const DEFAULT_L: f64 = 6.5;
pub const DEFAULT_M: usize = 3000;

/// Sample means `θ̂_j = (1/n) Σ_i ψ_j(t_i) φ_{σ_Y²}(t_i)` for `j < J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector {
    pub coeffs: Vec<f64>,
    pub n_effective: usize,
}

impl ThetaVector {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// θ̂ for a sample at any stage. Pass a transformed sample unless raw
/// coordinates are intended.
pub fn compute_theta<S>(sample: &MetaSample<S>, ctx: &HermiteContext) -> Result<ThetaVector> {
    if sample.n() == 0 {
        return Err(Error::EmptySample);
    }
    let j = ctx.j_max();
    let mut sum = vec![0.0; j];
    let mut buf = vec![0.0; j];
    for t in sample.scores() {
        ctx.psi_weighted_into(t, &mut buf);
        for (s, b) in sum.iter_mut().zip(&buf) {
            *s += b;
        }
    }
    let n = sample.n();
    Ok(ThetaVector {
        coeffs: sum.into_iter().map(|s| s / n as f64).collect(),
        n_effective: n,
    })
}

/// `u_{x,j} = η_j χ_j(x) φ_{σ_Y²+1}(x)` for `j < J`.
pub fn basis_vector(x: f64, ctx: &HermiteContext) -> Vec<f64> {
    let mut out = vec![0.0; ctx.j_max()];
    ctx.chi_weighted_into(x, &mut out);
    for (j, v) in out.iter_mut().enumerate() {
        *v *= ctx.eta(j);
    }
    out
}

/// Bound on `|d_J(U, v) − d_J(Ũ, v)|` for a grid on `[−L, L]` with spacing
/// `delta`: the larger of the tail term at `L` and the half-spacing term.
pub fn grid_epsilon(l: f64, delta: f64, sigma_y2: f64) -> f64 {
    let tail = y_norm_gaussian_diff(l, f64::INFINITY, sigma_y2);
    let mesh = y_norm_gaussian_diff(1.0, 1.0 - 0.5 * delta, sigma_y2);
    tail.max(mesh)
}

/// Candidate vectors `u_x` on an evenly spaced grid plus the zero vector
/// (the `h = ∞` limit). Columns are stored contiguously, `J` values each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSet {
    j: usize,
    sigma_y2: f64,
    l: f64,
    delta: f64,
    epsilon: f64,
    grid: Vec<f64>,
    data: Vec<f64>,
}

impl BasisSet {
    /// `M` grid points spanning `[−L, L]` inclusive, so `δ = 2L/(M−1)`.
    pub fn build(ctx: &HermiteContext, l: f64, m: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(argument(format!("L must be positive, got {l}")));
        }
        if m < 2 {
            return Err(argument(format!("grid needs at least 2 points, got {m}")));
        }
        let delta = 2.0 * l / (m - 1) as f64;
        let grid: Vec<f64> = (0..m)
            .map(|i| if i == m - 1 { l } else { -l + i as f64 * delta })
            .collect();
        let j = ctx.j_max();
        let mut data: Vec<f64> = grid
            .par_iter()
            .flat_map_iter(|&x| basis_vector(x, ctx))
            .collect();
        data.extend(std::iter::repeat_n(0.0, j));
        Ok(Self {
            j,
            sigma_y2: ctx.sigma_y2(),
            l,
            delta,
            epsilon: grid_epsilon(l, delta, ctx.sigma_y2()),
            grid,
            data,
        })
    }

    /// Builds from explicit columns. No grid certificate applies, so `epsilon`
    /// is whatever the caller supplies.
    pub fn from_columns(columns: &[Vec<f64>], epsilon: f64) -> Result<Self> {
        let j = columns.first().map(Vec::len).unwrap_or(0);
        if j == 0 {
            return Err(argument("basis needs at least one non-empty column"));
        }
        if columns.iter().any(|c| c.len() != j) {
            return Err(Error::Dimension("columns differ in length".into()));
        }
        Ok(Self {
            j,
            sigma_y2: f64::NAN,
            l: f64::NAN,
            delta: f64::NAN,
            epsilon,
            grid: Vec::new(),
            data: columns.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.j
    }

    pub fn num_columns(&self) -> usize {
        self.data.len() / self.j
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.j..(c + 1) * self.j]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.j)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Grid size `M` (excluding the zero column).
    pub fn m(&self) -> usize {
        self.grid.len()
    }

    pub fn sigma_y2(&self) -> f64 {
        self.sigma_y2
    }

    /// Keeps the first `j` coordinates of every column.
    pub fn truncate(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.j {
            return Err(Error::Dimension(format!(
                "cannot truncate a {}-dimensional basis to {j}",
                self.j
            )));
        }
        let data = self.columns().flat_map(|c| c[..j].iter().copied()).collect();
        Ok(Self {
            j,
            data,
            grid: self.grid.clone(),
            ..*self
        })
    }

    /// Checks that the basis was built for `ctx`.
    pub fn check_context(&self, ctx: &HermiteContext) -> Result<()> {
        if self.j != ctx.j_max() {
            return Err(Error::Dimension(format!(
                "basis has J = {} but context has J = {}",
                self.j,
                ctx.j_max()
            )));
        }
        if !self.sigma_y2.is_nan() && self.sigma_y2 != ctx.sigma_y2() {
            return Err(Error::Dimension(format!(
                "basis has sigma_y2 = {} but context has {}",
                self.sigma_y2,
                ctx.sigma_y2()
            )));
        }
        Ok(())
    }

    /// Loads a cached basis for `(J, σ_Y², L, M)` from `dir`, building and
    /// storing it on a miss.
    pub fn cached(dir: &Path, ctx: &HermiteContext, l: f64, m: usize) -> Result<Self> {
        let path = dir.join(format!(
            "basis_J{}_s{}_L{}_M{}.json",
            ctx.j_max(),
            ctx.sigma_y2(),
            l,
            m
        ));
        if let Ok(bytes) = std::fs::read(&path) {
            match serde_json::from_slice::<BasisSet>(&bytes) {
                Ok(b) if b.j == ctx.j_max() && b.sigma_y2 == ctx.sigma_y2() && b.l == l && b.m() == m => {
                    return Ok(b)
                }
                _ => log::warn!("ignoring stale basis cache {}", path.display()),
            }
        }
        let basis = Self::build(ctx, l, m)?;
        let io_err = |source| Error::Io {
            path: path.clone(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(io_err)?;
        std::fs::write(&path, serde_json::to_vec(&basis)?).map_err(io_err)?;
        Ok(basis)
    }
}
