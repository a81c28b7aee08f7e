//! Synthetic data distributions and their discretization onto 2-D grids.
//!
//! Five families cover the lab's needs: three 2-D shapes (a noisy ring, a 240
//! degree arc of it, four Gaussian dots) used as "normal" manifolds, plus
//! diagonal Gaussians and axis-aligned uniform boxes of any dimension used as
//! latent, penalty, and anomaly distributions.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{csum, Tensor};

/// Radial standard deviation of the ring shapes.
pub const DEFAULT_RING_NOISE: f64 = 0.1;
/// Per-axis standard deviation of the four-dot clusters.
pub const DEFAULT_DOT_NOISE: f64 = 0.15;
/// Angular span of the arc shape: 240 degrees starting at angle 0.
pub const ARC_SPAN: f64 = 4.0 * PI / 3.0;
/// Cluster centers of the four-dot shape.
pub const DOT_CENTERS: [[f64; 2]; 4] = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistSpec {
    /// Unit circle with radial Gaussian noise.
    Loop { noise: f64 },
    /// 240-degree segment of the noisy unit circle.
    Arc { noise: f64 },
    /// Equal mixture of four isotropic Gaussians at (+-1, +-1).
    FourDot { noise: f64 },
    /// Diagonal Gaussian; `mean` and `var` are per-dimension.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    /// Axis-aligned uniform box.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
}

impl DistSpec {
    pub fn gaussian(dim: usize, mean: f64, var: f64) -> DistSpec {
        DistSpec::Gaussian {
            mean: vec![mean; dim],
            var: vec![var; dim],
        }
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64) -> DistSpec {
        DistSpec::Uniform {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DistSpec::Loop { .. } | DistSpec::Arc { .. } | DistSpec::FourDot { .. } => 2,
            DistSpec::Gaussian { mean, .. } => mean.len(),
            DistSpec::Uniform { lo, .. } => lo.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Dist(msg));
        match self {
            DistSpec::Loop { noise } | DistSpec::Arc { noise } | DistSpec::FourDot { noise } => {
                if !noise.is_finite() || *noise <= 0.0 {
                    return bad(format!("noise must be positive, got {noise}"));
                }
            }
            DistSpec::Gaussian { mean, var } => {
                if mean.is_empty() || mean.len() != var.len() {
                    return bad(format!(
                        "gaussian needs matching non-empty mean/var, got {}/{}",
                        mean.len(),
                        var.len()
                    ));
                }
                if mean.iter().any(|v| !v.is_finite()) {
                    return bad("gaussian mean must be finite".into());
                }
                if var.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                    return bad("gaussian variance must be positive".into());
                }
            }
            DistSpec::Uniform { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return bad(format!(
                        "uniform needs matching non-empty lo/hi, got {}/{}",
                        lo.len(),
                        hi.len()
                    ));
                }
                if lo.iter().chain(hi).any(|v| !v.is_finite()) {
                    return bad("uniform bounds must be finite".into());
                }
                if lo.iter().zip(hi).any(|(l, h)| l >= h) {
                    return bad("uniform needs lo < hi per dimension".into());
                }
            }
        }
        Ok(())
    }

    /// Draw `n` samples as an [n x dim] matrix.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Tensor> {
        self.validate()?;
        let dim = self.dim();
        let mut data = Vec::with_capacity(n * dim);
        match self {
            DistSpec::Loop { noise } | DistSpec::Arc { noise } => {
                let span = if matches!(self, DistSpec::Loop { .. }) {
                    TAU
                } else {
                    ARC_SPAN
                };
                for _ in 0..n {
                    let theta = rng.random_range(0.0..span);
                    let eps: f64 = rng.sample(StandardNormal);
                    let r = 1.0 + noise * eps;
                    data.push(r * theta.cos());
                    data.push(r * theta.sin());
                }
            }
            DistSpec::FourDot { noise } => {
                let comp = Normal::new(0.0, *noise).map_err(|e| Error::Dist(e.to_string()))?;
                for _ in 0..n {
                    let c = DOT_CENTERS[rng.random_range(0..4)];
                    data.push(c[0] + comp.sample(rng));
                    data.push(c[1] + comp.sample(rng));
                }
            }
            DistSpec::Gaussian { mean, var } => {
                let comps: Vec<Normal<f64>> = mean
                    .iter()
                    .zip(var)
                    .map(|(&m, &v)| Normal::new(m, v.sqrt()).map_err(|e| Error::Dist(e.to_string())))
                    .collect::<Result<_>>()?;
                for _ in 0..n {
                    for c in &comps {
                        data.push(c.sample(rng));
                    }
                }
            }
            DistSpec::Uniform { lo, hi } => {
                for _ in 0..n {
                    for (&l, &h) in lo.iter().zip(hi) {
                        data.push(rng.random_range(l..h));
                    }
                }
            }
        }
        Tensor::new(vec![n, dim], data)
    }

    /// Probability density at a point (2-D only for the shape families).
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.validate()?;
        if x.len() != self.dim() {
            return Err(Error::Shape(format!(
                "density: point dim {} != spec dim {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(match self {
            DistSpec::Loop { noise } => ring_density(x[0], x[1], *noise, TAU),
            DistSpec::Arc { noise } => {
                let mut theta = x[1].atan2(x[0]);
                if theta < 0.0 {
                    theta += TAU;
                }
                if theta <= ARC_SPAN {
                    ring_density(x[0], x[1], *noise, ARC_SPAN)
                } else {
                    0.0
                }
            }
            DistSpec::FourDot { noise } => {
                let v = noise * noise;
                // Summing the mixture components in sorted order makes the
                // density permutation-invariant, so mirrored points evaluate
                // bit-identically.
                let mut comps: Vec<f64> = DOT_CENTERS
                    .iter()
                    .map(|c| gaussian_pdf(x[0], c[0], v) * gaussian_pdf(x[1], c[1], v))
                    .collect();
                comps.sort_by(f64::total_cmp);
                0.25 * csum(comps)
            }
            DistSpec::Gaussian { mean, var } => {
                let mut d = 1.0;
                for ((&xi, &m), &v) in x.iter().zip(mean).zip(var) {
                    d *= gaussian_pdf(xi, m, v);
                }
                d
            }
            DistSpec::Uniform { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(&xi, (&l, &h))| xi >= l && xi <= h);
                if inside {
                    1.0 / lo.iter().zip(hi).map(|(l, h)| h - l).product::<f64>()
                } else {
                    0.0
                }
            }
        })
    }

    /// Cell-center densities over a 2-D grid, renormalized to a probability
    /// vector (row-major, y-major ordering). Errors if the spec is not 2-D or
    /// puts zero mass on the grid.
    pub fn density_on_grid(&self, grid: &Grid2D) -> Result<Vec<f64>> {
        if self.dim() != 2 {
            return Err(Error::Dist(format!(
                "density_on_grid needs a 2-D spec, got dim {}",
                self.dim()
            )));
        }
        let mut vals = Vec::with_capacity(grid.n_cells());
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let (x, y) = grid.cell_center(ix, iy);
                vals.push(self.density(&[x, y])?);
            }
        }
        let total = csum(vals.iter().copied());
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Dist(
                "distribution places no mass on the grid".into(),
            ));
        }
        for v in &mut vals {
            *v /= total;
        }
        Ok(vals)
    }
}

fn gaussian_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * var)).exp() / (TAU * var).sqrt()
}

/// Density of a ring: radius ~ N(1, sigma^2), angle uniform over `span`.
/// The 1/r factor is the polar-coordinates Jacobian.
fn ring_density(x: f64, y: f64, sigma: f64, span: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    if r < 1e-12 {
        return 0.0;
    }
    gaussian_pdf(r, 1.0, sigma * sigma) / (span * r)
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn vec_str(v: &[f64]) -> String {
            if v.iter().all(|x| x == &v[0]) {
                format!("{}", v[0])
            } else {
                v.iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(";")
            }
        }
        match self {
            DistSpec::Loop { noise } => write!(f, "loop(noise={noise})"),
            DistSpec::Arc { noise } => write!(f, "arc(noise={noise})"),
            DistSpec::FourDot { noise } => write!(f, "four-dot(noise={noise})"),
            DistSpec::Gaussian { mean, var } => write!(
                f,
                "gaussian(dim={},mean={},var={})",
                mean.len(),
                vec_str(mean),
                vec_str(var)
            ),
            DistSpec::Uniform { lo, hi } => write!(
                f,
                "uniform(dim={},lo={},hi={})",
                lo.len(),
                vec_str(lo),
                vec_str(hi)
            ),
        }
    }
}

/// Parse a spec string like `loop`, `arc(noise=0.2)`, `four-dot`,
/// `gaussian(dim=2,mean=0,var=1)` or `uniform(dim=2,lo=-1,hi=1)`.
/// Vector-valued parameters use semicolons: `mean=0;1.5`.
pub fn parse_spec(s: &str) -> Result<DistSpec> {
    let s = s.trim();
    let bad = |msg: String| Error::Dist(format!("{msg} in spec {s:?}"));
    let (kind, args) = match s.find('(') {
        None => (s, Vec::new()),
        Some(i) => {
            let inner = s[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| bad("missing closing paren".into()))?;
            let args = inner
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| {
                    p.split_once('=')
                        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                        .ok_or_else(|| bad(format!("expected key=value, got {p:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            (&s[..i], args)
        }
    };
    let mut noise = None;
    let mut dim = None;
    let mut fields: Vec<(String, Vec<f64>)> = Vec::new();
    for (k, v) in &args {
        match k.as_str() {
            "noise" => {
                noise = Some(v.parse::<f64>().map_err(|_| bad(format!("bad noise {v:?}")))?)
            }
            "dim" => {
                dim = Some(v.parse::<usize>().map_err(|_| bad(format!("bad dim {v:?}")))?)
            }
            "mean" | "var" | "lo" | "hi" => {
                let vals = v
                    .split(';')
                    .map(|p| p.trim().parse::<f64>().map_err(|_| bad(format!("bad {k} {p:?}"))))
                    .collect::<Result<Vec<f64>>>()?;
                fields.push((k.clone(), vals));
            }
            other => return Err(bad(format!("unknown parameter {other:?}"))),
        }
    }
    let field = |name: &str| fields.iter().find(|(k, _)| k == name).map(|(_, v)| v.clone());
    let expand = |name: &str, default: f64| -> Result<Vec<f64>> {
        let vals = field(name).unwrap_or_else(|| vec![default]);
        let d = dim.unwrap_or(vals.len().max(2));
        if vals.len() == 1 {
            Ok(vec![vals[0]; d])
        } else if vals.len() == d {
            Ok(vals)
        } else {
            Err(bad(format!("{name} has {} entries for dim {d}", vals.len())))
        }
    };
    let reject_fields = |allowed: &[&str]| -> Result<()> {
        for (k, _) in &fields {
            if !allowed.contains(&k.as_str()) {
                return Err(bad(format!("parameter {k:?} not valid for {kind}")));
            }
        }
        Ok(())
    };
    let spec = match kind {
        "loop" => {
            reject_fields(&[])?;
            DistSpec::Loop {
                noise: noise.unwrap_or(DEFAULT_RING_NOISE),
            }
        }
        "arc" => {
            reject_fields(&[])?;
            DistSpec::Arc {
                noise: noise.unwrap_or(DEFAULT_RING_NOISE),
            }
        }
        "four-dot" | "four_dot" => {
            reject_fields(&[])?;
            DistSpec::FourDot {
                noise: noise.unwrap_or(DEFAULT_DOT_NOISE),
            }
        }
        "gaussian" => {
            reject_fields(&["mean", "var"])?;
            DistSpec::Gaussian {
                mean: expand("mean", 0.0)?,
                var: expand("var", 1.0)?,
            }
        }
        "uniform" => {
            reject_fields(&["lo", "hi"])?;
            DistSpec::Uniform {
                lo: expand("lo", -1.0)?,
                hi: expand("hi", 1.0)?,
            }
        }
        other => return Err(bad(format!("unknown distribution {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

/// Uniform rectangular grid over a 2-D box. Cells are indexed (ix, iy) with
/// row-major (y-major) linearization: `idx = iy * nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, nx: usize, ny: usize) -> Result<Grid2D> {
        if ![x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite()) || x_lo >= x_hi || y_lo >= y_hi {
            return Err(Error::Config(format!(
                "grid needs finite lo < hi, got x [{x_lo}, {x_hi}], y [{y_lo}, {y_hi}]"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::Config("grid needs nx, ny >= 1".into()));
        }
        Ok(Grid2D {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            nx,
            ny,
        })
    }

    pub fn square(lo: f64, hi: f64, res: usize) -> Result<Grid2D> {
        Grid2D::new(lo, hi, lo, hi, res, res)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn x_center(&self, ix: usize) -> f64 {
        center(self.x_lo, self.x_hi, self.nx, ix)
    }

    pub fn y_center(&self, iy: usize) -> f64 {
        center(self.y_lo, self.y_hi, self.ny, iy)
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (self.x_center(ix), self.y_center(iy))
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        iy * self.nx + ix
    }

    /// All cell centers as an [n_cells x 2] matrix in index order.
    pub fn centers(&self) -> Tensor {
        let mut data = Vec::with_capacity(self.n_cells() * 2);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let (x, y) = self.cell_center(ix, iy);
                data.push(x);
                data.push(y);
            }
        }
        Tensor::new(vec![self.n_cells(), 2], data).expect("finite centers")
    }
}

/// Cell-center coordinate, written so that symmetric ranges produce exactly
/// mirror-symmetric centers in floating point: both endpoints enter through
/// integer-weighted products.
fn center(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    let a = (2 * (n - i) - 1) as f64;
    let b = (2 * i + 1) as f64;
    (lo * a + hi * b) / (2 * n) as f64
}
