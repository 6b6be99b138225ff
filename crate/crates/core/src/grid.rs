//! Rasters shared by every stage: plain 2-D grids, label maps tied to a
//! pyramid level, and per-class score fields.
//!
//! Level `l` of a pyramid over an `H x W` base grid has `ceil(H / 2^l) x
//! ceil(W / 2^l)` pixels. Moving one level coarser keeps the top-left pixel
//! of every 2x2 block.

use crate::error::{Error, Result};

/// Tolerance on the per-pixel channel sum of a score field.
pub const SCORE_SUM_TOLERANCE: f32 = 1e-4;

/// Dimensions of pyramid level `level` over a `height x width` base grid.
pub fn level_dims(height: usize, width: usize, level: u32) -> (usize, usize) {
    let f = 1usize << level;
    (height.div_ceil(f), width.div_ceil(f))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {height}x{width} grid",
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Stride-2 top-left subsampling.
    pub fn subsample(&self) -> Self {
        let (h, w) = (self.height.div_ceil(2), self.width.div_ceil(2));
        let mut data = Vec::with_capacity(h * w);
        for y in 0..h {
            for x in 0..w {
                data.push(self.get(2 * y, 2 * x));
            }
        }
        Self {
            height: h,
            width: w,
            data,
        }
    }

    /// Nearest-neighbour x2 upsampling cropped to `height x width`.
    pub fn upsample_to(&self, height: usize, width: usize) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(self.get((y / 2).min(self.height - 1), (x / 2).min(self.width - 1)));
            }
        }
        Self { height, width, data }
    }
}

/// What the ids of a [`LabelMap`] mean.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelKind {
    /// Instance ids; 0 is background / no instance.
    Instances,
    /// Semantic class ids; 0 is the background stuff class.
    Classes,
}

/// A `u32` raster at one pyramid level.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelMap {
    pub level: u32,
    pub kind: LabelKind,
    pub grid: Grid<u32>,
}

impl LabelMap {
    pub fn new(level: u32, kind: LabelKind, grid: Grid<u32>) -> Self {
        Self { level, kind, grid }
    }

    pub fn instances(grid: Grid<u32>) -> Self {
        Self::new(0, LabelKind::Instances, grid)
    }

    pub fn classes(grid: Grid<u32>) -> Self {
        Self::new(0, LabelKind::Classes, grid)
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }

    pub fn width(&self) -> usize {
        self.grid.width()
    }

    /// The next coarser level by stride-2 subsampling.
    pub fn coarser(&self) -> Self {
        Self {
            level: self.level + 1,
            kind: self.kind,
            grid: self.grid.subsample(),
        }
    }

    /// Largest id present.
    pub fn max_id(&self) -> u32 {
        self.grid.as_slice().iter().copied().max().unwrap_or(0)
    }
}

/// Per-pixel class probability vectors, stored channel-major as `C x h x w`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassScores {
    pub level: u32,
    classes: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl ClassScores {
    pub fn from_vec(
        level: u32,
        classes: usize,
        height: usize,
        width: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "score field needs at least 2 classes, got {classes}"
            )));
        }
        if data.len() != classes * height * width {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {classes}x{height}x{width} score field",
                data.len()
            )));
        }
        Ok(Self {
            level,
            classes,
            height,
            width,
            data,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn score(&self, class: usize, pixel: usize) -> f32 {
        self.data[class * self.pixels() + pixel]
    }

    #[inline]
    pub fn set_score(&mut self, class: usize, pixel: usize, value: f32) {
        let n = self.pixels();
        self.data[class * n + pixel] = value;
    }

    /// Class vector at `pixel`, gathered across channels.
    pub fn distribution(&self, pixel: usize) -> Vec<f64> {
        (0..self.classes)
            .map(|c| self.score(c, pixel) as f64)
            .collect()
    }

    /// Per-pixel argmax; ties go to the smaller class id.
    pub fn argmax(&self) -> LabelMap {
        let n = self.pixels();
        let mut out = Vec::with_capacity(n);
        for p in 0..n {
            let mut best = 0usize;
            let mut best_score = self.score(0, p);
            for c in 1..self.classes {
                let s = self.score(c, p);
                if s > best_score {
                    best = c;
                    best_score = s;
                }
            }
            out.push(best as u32);
        }
        LabelMap::new(
            self.level,
            LabelKind::Classes,
            Grid::from_vec(self.height, self.width, out).expect("sized above"),
        )
    }

    /// Checks entries lie in `[0, 1]` and every pixel sums to one.
    pub fn validate(&self) -> Result<()> {
        for p in 0..self.pixels() {
            let mut sum = 0.0f32;
            for c in 0..self.classes {
                let s = self.score(c, p);
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::InvalidArgument(format!(
                        "score {s} at class {c}, pixel {p} outside [0, 1]"
                    )));
                }
                sum += s;
            }
            if (sum - 1.0).abs() > SCORE_SUM_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "scores at pixel {p} sum to {sum}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_dims_round_up() {
        assert_eq!(level_dims(128, 128, 0), (128, 128));
        assert_eq!(level_dims(100, 37, 1), (50, 19));
        assert_eq!(level_dims(100, 37, 3), (13, 5));
    }

    #[test]
    fn subsample_keeps_top_left() {
        let g = Grid::from_vec(3, 3, (0..9).collect()).unwrap();
        let s = g.subsample();
        assert_eq!((s.height(), s.width()), (2, 2));
        assert_eq!(s.as_slice(), &[0, 2, 6, 8]);
    }

    #[test]
    fn upsample_inverts_subsample_on_sample_sites() {
        let g = Grid::from_vec(2, 2, vec![1u32, 2, 3, 4]).unwrap();
        let up = g.upsample_to(3, 4);
        assert_eq!(up.as_slice(), &[1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4]);
        assert_eq!(up.subsample().as_slice(), &[1, 2, 3, 4]);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let s = ClassScores::from_vec(0, 3, 1, 2, vec![0.4, 0.2, 0.4, 0.2, 0.2, 0.6]).unwrap();
        assert_eq!(s.argmax().grid.as_slice(), &[0, 2]);
    }
}
