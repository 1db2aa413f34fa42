//! Initial phase fields `u = q(d/ε)` from signed distances (negative inside).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::potential::q;
use crate::error::{Error, Result};
use crate::spectral::{read_field, GridSpec, RealField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Shape {
    /// Interval, disk or ball depending on the grid dimension.
    Disk { center: Vec<f64>, radius: f64 },
    /// 2-D ellipse with semi-axes along the coordinate axes.
    Ellipse { center: Vec<f64>, semi_axes: [f64; 2] },
    /// Union of shapes: the minimum of their distances.
    Union { shapes: Vec<Shape> },
    /// 3-D cylinder along `axis` through `center` (the two transverse
    /// coordinates), with radius `radius (1 + amplitude cos(2π s/wavelength))`.
    Tube {
        axis: usize,
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
        wavelength: f64,
    },
    /// Slab of the given thickness normal to `axis`, centred at
    /// `center[axis]`, joined with a ball of radius `bump_radius` at `center`.
    Plate {
        axis: usize,
        center: Vec<f64>,
        thickness: f64,
        bump_radius: f64,
    },
    /// Nodal values loaded from a field file.
    Raw { path: PathBuf },
}

fn check_len(what: &str, got: usize, d: usize) -> Result<()> {
    if got == d {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} has {got} coordinates on a {d}-d grid"
        )))
    }
}

impl Shape {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let d = grid.dim();
        match self {
            Shape::Disk { center, radius } => {
                check_len("disk center", center.len(), d)?;
                positive("disk radius", *radius)
            }
            Shape::Ellipse { center, semi_axes } => {
                check_len("ellipse center", center.len(), 2)?;
                check_len("ellipse", 2, d)?;
                positive("semi-axis", semi_axes[0])?;
                positive("semi-axis", semi_axes[1])
            }
            Shape::Union { shapes } => {
                if shapes.is_empty() {
                    return Err(Error::InvalidParameter("empty union".into()));
                }
                shapes.iter().try_for_each(|s| s.validate(grid))
            }
            Shape::Tube {
                axis,
                radius,
                amplitude,
                wavelength,
                ..
            } => {
                check_len("tube", 3, d)?;
                if *axis >= 3 {
                    return Err(Error::InvalidParameter(format!("tube axis {axis} out of range")));
                }
                positive("tube radius", *radius)?;
                positive("tube wavelength", *wavelength)?;
                if !(amplitude.abs() < 1.0) {
                    return Err(Error::InvalidParameter("tube amplitude must be in (-1, 1)".into()));
                }
                Ok(())
            }
            Shape::Plate {
                axis,
                center,
                thickness,
                bump_radius,
            } => {
                check_len("plate center", center.len(), d)?;
                if *axis >= d {
                    return Err(Error::InvalidParameter(format!("plate axis {axis} out of range")));
                }
                positive("plate thickness", *thickness)?;
                if *bump_radius < 0.0 {
                    return Err(Error::InvalidParameter("bump radius must be >= 0".into()));
                }
                Ok(())
            }
            Shape::Raw { .. } => Ok(()),
        }
    }

    /// Signed distance at `x`, with periodic minimum-image displacements.
    pub fn signed_distance(&self, grid: &GridSpec, x: &[f64]) -> f64 {
        let delta = |c: &[f64], axis: usize| grid.periodic_delta(axis, x[axis], c[axis]);
        match self {
            Shape::Disk { center, radius } => {
                let r2: f64 = (0..x.len()).map(|a| delta(center, a).powi(2)).sum();
                r2.sqrt() - radius
            }
            Shape::Ellipse { center, semi_axes } => {
                ellipse_signed_distance(semi_axes[0], semi_axes[1], delta(center, 0), delta(center, 1))
            }
            Shape::Union { shapes } => shapes
                .iter()
                .map(|s| s.signed_distance(grid, x))
                .fold(f64::INFINITY, f64::min),
            Shape::Tube {
                axis,
                center,
                radius,
                amplitude,
                wavelength,
            } => {
                let others: Vec<usize> = (0..3).filter(|a| a != axis).collect();
                let rho = (grid.periodic_delta(others[0], x[others[0]], center[0]).powi(2)
                    + grid.periodic_delta(others[1], x[others[1]], center[1]).powi(2))
                .sqrt();
                let s = x[*axis];
                let local = radius
                    * (1.0 + amplitude * (2.0 * std::f64::consts::PI * s / wavelength).cos());
                rho - local
            }
            Shape::Plate {
                axis,
                center,
                thickness,
                bump_radius,
            } => {
                let slab = delta(center, *axis).abs() - 0.5 * thickness;
                if *bump_radius > 0.0 {
                    let r2: f64 = (0..x.len()).map(|a| delta(center, a).powi(2)).sum();
                    slab.min(r2.sqrt() - bump_radius)
                } else {
                    slab
                }
            }
            Shape::Raw { .. } => f64::NAN,
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {v}")))
    }
}

/// Signed distance from `(y0, y1)` to the ellipse `(x/a)² + (y/b)² = 1`.
fn ellipse_signed_distance(a: f64, b: f64, y0: f64, y1: f64) -> f64 {
    let inside = (y0 / a).powi(2) + (y1 / b).powi(2) < 1.0;
    // Reduce to the first quadrant with the major axis first.
    let (e0, e1, p0, p1) = if a >= b {
        (a, b, y0.abs(), y1.abs())
    } else {
        (b, a, y1.abs(), y0.abs())
    };
    let d = point_ellipse_distance(e0, e1, p0, p1);
    if inside {
        -d
    } else {
        d
    }
}

/// Unsigned distance for `e0 ≥ e1 > 0`, `y0, y1 ≥ 0`, by bisection on the
/// Lagrange multiplier of the closest-point problem.
fn point_ellipse_distance(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let s = bisect_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            ((x0 - y0).powi(2) + (x1 - y1).powi(2)).sqrt()
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde0 = numer / denom;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).sqrt();
            ((x0 - y0).powi(2) + x1 * x1).sqrt()
        } else {
            (y0 - e0).abs()
        }
    }
}

fn bisect_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 {
        0.0
    } else {
        (n0 * n0 + z1 * z1).sqrt() - 1.0
    };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let g = (n0 / (s + r0)).powi(2) + (z1 / (s + 1.0)).powi(2) - 1.0;
        if g > 0.0 {
            s0 = s;
        } else if g < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// `u = q(d/ε)` sampled at the nodes, or the loaded field for [`Shape::Raw`].
pub fn initial_condition(shape: &Shape, grid: GridSpec, eps: f64) -> Result<RealField> {
    shape.validate(&grid)?;
    if let Shape::Raw { path } = shape {
        let (field, _) = read_field(path)?;
        grid.check_same(field.grid())?;
        return Ok(field);
    }
    Ok(RealField::from_fn(grid, |x| q(shape.signed_distance(&grid, x) / eps)))
}

/// Number of connected components of `{u > level}` under periodic
/// face-adjacency.
pub fn component_count(u: &RealField, level: f64) -> usize {
    let g = *u.grid();
    let d = g.dim();
    let inside: Vec<bool> = u.values().iter().map(|&v| v > level).collect();
    let mut seen = vec![false; inside.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..inside.len() {
        if !inside[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(cur) = stack.pop() {
            let idx = g.multi_index(cur);
            for a in 0..d {
                let n = g.shape()[a];
                for step in [1, n - 1] {
                    let mut nb = idx;
                    nb[a] = (idx[a] + step) % n;
                    let f = g.flat_index(&nb[..d]);
                    if inside[f] && !seen[f] {
                        seen[f] = true;
                        stack.push(f);
                    }
                }
            }
        }
    }
    count
}

/// Nodal values along `axis` through the grid line whose other coordinates
/// are `offset` (one entry per axis; the entry for `axis` itself is ignored).
pub fn profile_slice(u: &RealField, axis: usize, offset: &[f64]) -> Result<Vec<(f64, f64)>> {
    let g = *u.grid();
    let d = g.dim();
    if axis >= d || offset.len() != d {
        return Err(Error::InvalidParameter(format!(
            "slice along axis {axis} needs {d} offset coordinates"
        )));
    }
    let mut idx = [0usize; 3];
    for a in (0..d).filter(|&a| a != axis) {
        let pos = offset[a] / g.spacing(a);
        let i = pos.round();
        if (pos - i).abs() > 1e-9 || i < 0.0 || i as usize >= g.shape()[a] {
            return Err(Error::InvalidParameter(format!(
                "offset {} on axis {a} is not a grid coordinate",
                offset[a]
            )));
        }
        idx[a] = i as usize;
    }
    Ok((0..g.shape()[axis])
        .map(|i| {
            idx[axis] = i;
            (g.coordinate(axis, i), u.at(&idx[..d]))
        })
        .collect())
}
