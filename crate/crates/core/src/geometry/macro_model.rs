//! Macro patches and the per-cell mapping grid.
//!
//! A patch is a tensor grid of Bezier segments sharing control points at the
//! segment boundaries (the form a Bezier-extracted spline takes). Cells are
//! obtained by uniform subdivision of the segments.

use super::bezier::MacroMapping;
use crate::error::Error;

/// A macro patch: `segments[a]` Bezier segments of degree `degrees[a]` per
/// direction, backed by one shared homogeneous control net of
/// `segments[a] * degrees[a] + 1` points per direction.
#[derive(Debug, Clone)]
pub struct BezierPatch {
    dim: usize,
    degrees: [usize; 3],
    segments: [usize; 3],
    net: Vec<[f64; 4]>,
}

impl BezierPatch {
    pub fn from_net(
        dim: usize,
        degrees: [usize; 3],
        segments: [usize; 3],
        net: Vec<[f64; 4]>,
    ) -> Result<Self, Error> {
        let expected: usize = (0..dim).map(|a| segments[a] * degrees[a] + 1).product();
        if net.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "control net has {} points, expected {expected}",
                net.len()
            )));
        }
        if net.iter().any(|p| p[3] <= 0.0) {
            return Err(Error::InvalidInput("control weights must be positive".into()));
        }
        Ok(Self {
            dim,
            degrees,
            segments,
            net,
        })
    }

    /// Axis-aligned box `[lo, hi]`, one linear segment per direction.
    pub fn affine_box(dim: usize, lo: [f64; 3], hi: [f64; 3]) -> Self {
        let m = MacroMapping::affine_box(dim, lo, hi);
        let mut degrees = [0usize; 3];
        let mut segments = [1usize; 3];
        for a in 0..dim {
            degrees[a] = 1;
            segments[a] = 1;
        }
        for a in dim..3 {
            segments[a] = 1;
        }
        Self {
            dim,
            degrees,
            segments,
            net: m.control_points().to_vec(),
        }
    }

    /// Quarter annulus in 2D: rational quadratic in the angular direction
    /// (first parameter), linear in the radial direction (second parameter).
    ///
    /// The arc runs from the positive y-axis to the positive x-axis so the
    /// (angular, radial) parametrization has a positive Jacobian.
    pub fn quarter_annulus(r_inner: f64, r_outer: f64) -> Self {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        let arc = |r: f64| {
            [
                [0.0, r, 0.0, 1.0],
                [w * r, w * r, 0.0, w],
                [r, 0.0, 0.0, 1.0],
            ]
        };
        let mut net = Vec::with_capacity(6);
        net.extend_from_slice(&arc(r_inner));
        net.extend_from_slice(&arc(r_outer));
        Self {
            dim: 2,
            degrees: [2, 1, 0],
            segments: [1, 1, 1],
            net,
        }
    }

    /// Quarter annulus extruded along z.
    pub fn quarter_annulus_3d(r_inner: f64, r_outer: f64, thickness: f64) -> Self {
        let base = Self::quarter_annulus(r_inner, r_outer);
        let mut net = Vec::with_capacity(12);
        for z in [0.0, thickness] {
            for p in &base.net {
                // homogeneous z coordinate carries the weight
                net.push([p[0], p[1], z * p[3], p[3]]);
            }
        }
        Self {
            dim: 3,
            degrees: [2, 1, 1],
            segments: [1, 1, 1],
            net,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> [usize; 3] {
        self.segments
    }

    fn net_counts(&self) -> [usize; 3] {
        let mut c = [1usize; 3];
        for a in 0..self.dim {
            c[a] = self.segments[a] * self.degrees[a] + 1;
        }
        c
    }

    /// The Bezier mapping of one segment.
    fn segment_mapping(&self, seg: [usize; 3]) -> MacroMapping {
        let counts = self.net_counts();
        let mut sub = Vec::new();
        let d = self.dim;
        let sz = if d == 3 { self.degrees[2] + 1 } else { 1 };
        for c in 0..sz {
            for b in 0..=(if d >= 2 { self.degrees[1] } else { 0 }) {
                for a in 0..=self.degrees[0] {
                    let i0 = seg[0] * self.degrees[0] + a;
                    let i1 = if d >= 2 { seg[1] * self.degrees[1] + b } else { 0 };
                    let i2 = if d == 3 { seg[2] * self.degrees[2] + c } else { 0 };
                    sub.push(self.net[(i2 * counts[1] + i1) * counts[0] + i0]);
                }
            }
        }
        MacroMapping::from_homogeneous(self.dim, self.degrees, sub)
    }

    /// Evaluate the patch at global parameters in `[0,1]^d`.
    pub fn evaluate_global(&self, t: &[f64]) -> [f64; 3] {
        let mut seg = [0usize; 3];
        let mut local = [0.0f64; 3];
        for a in 0..self.dim {
            let s = (t[a] * self.segments[a] as f64).floor() as usize;
            let s = s.min(self.segments[a] - 1);
            seg[a] = s;
            local[a] = t[a] * self.segments[a] as f64 - s as f64;
        }
        let (x, _) = self.segment_mapping(seg).evaluate(&local);
        x
    }
}

/// Grid of per-cell mappings composing the lattice geometry.
#[derive(Debug, Clone)]
pub struct MacroModel {
    pub dim: usize,
    pub grid: [usize; 3],
    pub mappings: Vec<MacroMapping>,
}

impl MacroModel {
    pub fn n_cells(&self) -> usize {
        (0..self.dim).map(|a| self.grid[a]).product()
    }

    /// Lexicographic cell index (first axis fastest).
    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        (c[2] * self.grid[1] + c[1]) * self.grid[0] + c[0]
    }

    pub fn cell_coords(&self, s: usize) -> [usize; 3] {
        let mut rem = s;
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            c[a] = rem % self.grid[a];
            rem /= self.grid[a];
        }
        c
    }

    /// Face-sharing neighbour pairs `(s, s_next, axis)` with `s_next` the
    /// cell one step along `axis`.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.n_cells() {
            let c = self.cell_coords(s);
            for axis in 0..self.dim {
                if c[axis] + 1 < self.grid[axis] {
                    let mut c2 = c;
                    c2[axis] += 1;
                    out.push((s, self.cell_index(c2), axis));
                }
            }
        }
        out
    }
}

/// Subdivide a patch into a grid of per-cell Bezier mappings.
///
/// The grid must be a multiple of the patch's segment grid; each segment is
/// split uniformly in parameter space (Bezier extraction, exact for rational
/// patches). Every cell mapping is checked for a positive Jacobian and
/// shared faces are verified to coincide pointwise.
pub fn build_macro_model(patch: &BezierPatch, grid: [usize; 3]) -> Result<MacroModel, Error> {
    let d = patch.dim;
    for a in 0..d {
        if grid[a] == 0 || grid[a] % patch.segments[a] != 0 {
            return Err(Error::InvalidInput(format!(
                "cell grid {} must be a positive multiple of the patch segments {} along axis {a}",
                grid[a], patch.segments[a]
            )));
        }
    }

    let mut grid3 = [1usize; 3];
    grid3[..d].copy_from_slice(&grid[..d]);
    let per_seg: Vec<usize> = (0..d).map(|a| grid3[a] / patch.segments[a]).collect();

    let n: usize = grid3.iter().product();
    let mut mappings = Vec::with_capacity(n);
    for idx in 0..n {
        let mut rem = idx;
        let mut cell = [0usize; 3];
        for a in 0..d {
            cell[a] = rem % grid3[a];
            rem /= grid3[a];
        }
        let mut seg = [0usize; 3];
        let mut lo = [0.0f64; 3];
        let mut hi = [1.0f64; 3];
        for a in 0..d {
            seg[a] = cell[a] / per_seg[a];
            let within = cell[a] % per_seg[a];
            lo[a] = within as f64 / per_seg[a] as f64;
            hi[a] = (within + 1) as f64 / per_seg[a] as f64;
        }
        let m = patch.segment_mapping(seg).restricted(lo, hi);
        m.check_jacobian()?;
        mappings.push(m);
    }

    let model = MacroModel {
        dim: d,
        grid: grid3,
        mappings,
    };

    // shared faces must coincide pointwise
    let samples = 5usize;
    for (s, s2, axis) in model.adjacent_pairs() {
        let ma = &model.mappings[s];
        let mb = &model.mappings[s2];
        let total = samples.pow((d - 1) as u32);
        for k in 0..total {
            let mut rem = k;
            let mut xa = [0.0f64; 3];
            let mut xb = [0.0f64; 3];
            xa[axis] = 1.0;
            xb[axis] = 0.0;
            for a in 0..d {
                if a == axis {
                    continue;
                }
                let t = (rem % samples) as f64 / (samples - 1) as f64;
                rem /= samples;
                xa[a] = t;
                xb[a] = t;
            }
            let (pa, _) = ma.evaluate(&xa);
            let (pb, _) = mb.evaluate(&xb);
            let dist2: f64 = (0..d).map(|i| (pa[i] - pb[i]).powi(2)).sum();
            if dist2.sqrt() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "cells {s} and {s2} do not share face along axis {axis}: gap {:.3e}",
                    dist2.sqrt()
                )));
            }
        }
    }

    Ok(model)
}
