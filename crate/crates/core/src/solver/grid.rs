use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid in one or two dimensions.
///
/// Points are stored with axis 1 varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    sizes: Vec<usize>,
    lengths: Vec<f64>,
}

impl Grid {
    pub const MIN_SIZE: usize = 8;

    pub fn new(sizes: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > 2 {
            return Err(Error::Config(format!("grid dimension {} not in [1, 2]", sizes.len())));
        }
        if lengths.len() != sizes.len() {
            return Err(Error::Config(format!("{} sizes but {} lengths", sizes.len(), lengths.len())));
        }
        if let Some(s) = sizes.iter().find(|&&s| s < Self::MIN_SIZE) {
            return Err(Error::Config(format!("grid size {s} below the minimum of {}", Self::MIN_SIZE)));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Config(format!("grid length {l} must be positive and finite")));
        }
        Ok(Self { sizes, lengths })
    }

    /// `n` points per axis on `[0, length)` in every axis.
    pub fn uniform(n: usize, size: usize, length: f64) -> Result<Self> {
        Self::new(vec![size; n], vec![length; n])
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Spacing along 1-based `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis - 1] / self.sizes[axis - 1] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (1..=self.n()).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn points(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (1..=self.n()).map(|a| self.spacing(a)).product()
    }

    /// Integer index along each axis of flat point `p`.
    pub fn multi_index(&self, p: usize) -> Vec<usize> {
        let mut rest = p;
        self.sizes
            .iter()
            .map(|&s| {
                let i = rest % s;
                rest /= s;
                i
            })
            .collect()
    }

    pub fn coords(&self, p: usize) -> Vec<f64> {
        self.multi_index(p).iter().enumerate().map(|(a, &i)| i as f64 * self.spacing(a + 1)).collect()
    }

    fn stride(&self, axis: usize) -> usize {
        self.sizes[..axis - 1].iter().product()
    }

    /// Flat index of the point `offset` steps away along `axis`, plus the
    /// number of periods crossed (signed).
    pub fn neighbor(&self, p: usize, axis: usize, offset: isize) -> (usize, isize) {
        let size = self.sizes[axis - 1] as isize;
        let stride = self.stride(axis);
        let i = ((p / stride) % self.sizes[axis - 1]) as isize;
        let target = i + offset;
        let wraps = target.div_euclid(size);
        let j = target.rem_euclid(size);
        let q = (p as isize + (j - i) * stride as isize) as usize;
        (q, wraps)
    }
}

/// Multi-component field on a grid, stored point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub comps: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: &Grid, comps: usize) -> Self {
        Self { grid: grid.clone(), comps, values: vec![0.0; grid.points() * comps] }
    }

    pub fn from_fn(grid: &Grid, comps: usize, mut f: impl FnMut(usize, &mut [f64])) -> Self {
        let mut field = Self::zeros(grid, comps);
        for (p, chunk) in field.values.chunks_mut(comps.max(1)).enumerate() {
            f(p, chunk);
        }
        field
    }

    pub fn point(&self, p: usize) -> &[f64] {
        &self.values[p * self.comps..(p + 1) * self.comps]
    }

    pub fn point_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.values[p * self.comps..(p + 1) * self.comps]
    }

    /// One component as its own single-component field.
    pub fn component(&self, c: usize) -> GridField {
        GridField {
            grid: self.grid.clone(),
            comps: 1,
            values: self.values.iter().skip(c).step_by(self.comps).copied().collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &GridField) -> GridField {
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        GridField { grid: self.grid.clone(), comps: self.comps, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    /// Largest absolute difference, component-wise over all points.
    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Central-difference order of the spatial stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum StencilOrder {
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn order(self) -> usize {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }

    fn weights(self) -> &'static [(isize, f64)] {
        match self {
            StencilOrder::Second => &[(-1, -0.5), (1, 0.5)],
            StencilOrder::Fourth => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        }
    }
}

impl TryFrom<usize> for StencilOrder {
    type Error = Error;

    fn try_from(order: usize) -> Result<Self> {
        match order {
            2 => Ok(StencilOrder::Second),
            4 => Ok(StencilOrder::Fourth),
            other => Err(Error::Config(format!("unsupported stencil order {other} (use 2 or 4)"))),
        }
    }
}

impl From<StencilOrder> for usize {
    fn from(o: StencilOrder) -> usize {
        o.order()
    }
}

/// Periodic central difference `∂_axis` of every component.
pub fn derivative(field: &GridField, axis: usize, order: StencilOrder) -> Result<GridField> {
    derivative_shifted(field, axis, order, &[])
}

/// As [`derivative`], for fields that jump by `shifts[c]` per period along
/// `axis` (for instance the coordinate components of an embedding).
/// Missing entries of `shifts` count as zero.
pub fn derivative_shifted(field: &GridField, axis: usize, order: StencilOrder, shifts: &[f64]) -> Result<GridField> {
    let grid = &field.grid;
    if axis == 0 || axis > grid.n() {
        return Err(Error::Domain(format!("axis {axis} outside [1, {}]", grid.n())));
    }
    let comps = field.comps;
    let inv_dx = 1.0 / grid.spacing(axis);
    let weights = order.weights();
    let mut out = GridField::zeros(grid, comps);
    for p in 0..grid.points() {
        let dst = &mut out.values[p * comps..(p + 1) * comps];
        for &(offset, w) in weights {
            let (q, wraps) = grid.neighbor(p, axis, offset);
            let src = &field.values[q * comps..(q + 1) * comps];
            for c in 0..comps {
                let shift = shifts.get(c).copied().unwrap_or(0.0) * wraps as f64;
                dst[c] += w * (src[c] + shift);
            }
        }
        dst.iter_mut().for_each(|x| *x *= inv_dx);
    }
    Ok(out)
}

/// Sixth-difference filter: damps the grid-scale mode by the factor
/// `1 − strength` per application and leaves smooth modes nearly intact.
pub fn apply_filter(field: &mut GridField, strength: f64) {
    if strength == 0.0 {
        return;
    }
    const C: [(isize, f64); 7] = [(-3, 1.0), (-2, -6.0), (-1, 15.0), (0, -20.0), (1, 15.0), (2, -6.0), (3, 1.0)];
    let comps = field.comps;
    for axis in 1..=field.grid.n() {
        let src = field.values.clone();
        for p in 0..field.grid.points() {
            for &(offset, w) in &C {
                let (q, _) = field.grid.neighbor(p, axis, offset);
                for c in 0..comps {
                    field.values[p * comps + c] += strength / 64.0 * w * src[q * comps + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![4], vec![1.0]).is_err());
        assert!(Grid::new(vec![8, 8, 8], vec![1.0; 3]).is_err());
        assert!(Grid::new(vec![8], vec![0.0]).is_err());
        let g = Grid::new(vec![8, 16], vec![1.0, 2.0]).unwrap();
        assert_eq!(g.points(), 128);
        assert_eq!(g.multi_index(8 * 3 + 5), vec![5, 3]);
        assert_eq!(g.neighbor(7, 1, 1), (0, 1));
        assert_eq!(g.neighbor(0, 2, -1), (8 * 15, -1));
    }

    #[test]
    fn constant_field_has_zero_derivative() {
        let g = Grid::uniform(2, 8, 1.0).unwrap();
        let f = GridField::from_fn(&g, 2, |_, x| x.copy_from_slice(&[3.0, -1.5]));
        for axis in 1..=2 {
            for order in [StencilOrder::Second, StencilOrder::Fourth] {
                assert!(derivative(&f, axis, order).unwrap().values.iter().all(|x| *x == 0.0));
            }
        }
        assert!(derivative(&f, 3, StencilOrder::Second).is_err());
        assert!(StencilOrder::try_from(6).is_err());
    }

    #[test]
    fn second_order_sine_error_matches_taylor_bound() {
        let (n, l) = (64, 3.0);
        let g = Grid::uniform(1, n, l).unwrap();
        let k = 2.0 * PI / l;
        let f = GridField::from_fn(&g, 1, |p, x| x[0] = (k * g.coords(p)[0]).sin());
        let df = derivative(&f, 1, StencilOrder::Second).unwrap();
        let err = (0..n).map(|p| (df.values[p] - k * (k * g.coords(p)[0]).cos()).abs()).fold(0.0, f64::max);
        let dx = g.spacing(1);
        assert!(err <= k.powi(3) * dx * dx / 6.0 * 1.05, "{err}");
    }

    #[test]
    fn sawtooth_wraps_with_shift() {
        let g = Grid::uniform(1, 16, 16.0).unwrap();
        let f = GridField::from_fn(&g, 1, |p, x| x[0] = p as f64);
        let plain = derivative(&f, 1, StencilOrder::Second).unwrap();
        // interior slope 1, periodic jump of −16 only at the two wrap points
        for p in 1..15 {
            assert_eq!(plain.values[p], 1.0);
        }
        assert_eq!(plain.values[0], (1.0 - 15.0) / 2.0);
        let shifted = derivative_shifted(&f, 1, StencilOrder::Fourth, &[16.0]).unwrap();
        assert!(shifted.values.iter().all(|x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn filter_kills_nyquist_and_keeps_constants() {
        let g = Grid::uniform(1, 8, 1.0).unwrap();
        let mut f = GridField::from_fn(&g, 1, |p, x| x[0] = 2.0 + if p % 2 == 0 { 1.0 } else { -1.0 });
        apply_filter(&mut f, 1.0);
        assert!(f.values.iter().all(|x| (x - 2.0).abs() < 1e-14));
    }
}
