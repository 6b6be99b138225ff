use crate::affinity::WindowGeometry;
use crate::error::{Error, Result};
use crate::grid::level_dims;
use crate::tensor::Tensor;

/// Per-pixel affinities towards every window offset at one pyramid level,
/// stored channel-major as `r^2 x h x w`. Channels whose neighbour falls
/// outside the image are invalid and hold 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMap {
    pub level: u32,
    geometry: WindowGeometry,
    height: usize,
    width: usize,
    values: Vec<f32>,
    valid: Vec<bool>,
}

/// Validity implied by the image bounds alone.
pub fn geometric_validity(geometry: &WindowGeometry, height: usize, width: usize) -> Vec<bool> {
    let n = height * width;
    let mut valid = vec![false; geometry.channels() * n];
    for j in 0..geometry.channels() {
        for y in 0..height {
            for x in 0..width {
                valid[j * n + y * width + x] = geometry.neighbor(j, y, x, height, width).is_some();
            }
        }
    }
    valid
}

impl AffinityMap {
    /// Builds a map whose validity is derived from the image bounds.
    pub fn new(
        level: u32,
        geometry: WindowGeometry,
        height: usize,
        width: usize,
        values: Vec<f32>,
    ) -> Result<Self> {
        let valid = geometric_validity(&geometry, height, width);
        Self::with_validity(level, geometry, height, width, values, valid)
    }

    /// Builds a map with an explicit validity mask. Values under invalid
    /// channels are zeroed; valid values must lie in `[0, 1]`.
    pub fn with_validity(
        level: u32,
        geometry: WindowGeometry,
        height: usize,
        width: usize,
        mut values: Vec<f32>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        let expected = geometry.channels() * height * width;
        if values.len() != expected || valid.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "affinity map {}x{height}x{width} given {} values and {} mask entries",
                geometry.channels(),
                values.len(),
                valid.len()
            )));
        }
        for (i, (v, &ok)) in values.iter_mut().zip(&valid).enumerate() {
            if !ok {
                *v = 0.0;
            } else if !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidArgument(format!(
                    "affinity {v} at index {i} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            level,
            geometry,
            height,
            width,
            values,
            valid,
        })
    }

    pub fn geometry(&self) -> &WindowGeometry {
        &self.geometry
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

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn value(&self, channel: usize, pixel: usize) -> f32 {
        self.values[channel * self.pixels() + pixel]
    }

    #[inline]
    pub fn is_valid(&self, channel: usize, pixel: usize) -> bool {
        self.valid[channel * self.pixels() + pixel]
    }

    pub fn same_shape(&self, other: &AffinityMap) -> bool {
        self.geometry == other.geometry && self.height == other.height && self.width == other.width
    }

    /// A copy with every valid value replaced by `f(channel, pixel, value)`.
    pub fn map_valid(&self, mut f: impl FnMut(usize, usize, f32) -> f32) -> Result<Self> {
        let n = self.pixels();
        let values = self
            .values
            .iter()
            .zip(&self.valid)
            .enumerate()
            .map(|(i, (&v, &ok))| if ok { f(i / n, i % n, v) } else { 0.0 })
            .collect();
        Self::with_validity(
            self.level,
            self.geometry.clone(),
            self.height,
            self.width,
            values,
            self.valid.clone(),
        )
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::f32(
            &[self.geometry.channels(), self.height, self.width],
            self.values.clone(),
        )
        .expect("affinity dims always fit")
    }

    pub fn validity_tensor(&self) -> Tensor {
        Tensor::u32(
            &[self.geometry.channels(), self.height, self.width],
            self.valid.iter().map(|&v| v as u32).collect(),
        )
        .expect("affinity dims always fit")
    }

    /// Reads values (and optionally a validity mask) back from tensors.
    pub fn from_tensors(level: u32, values: Tensor, validity: Option<Tensor>) -> Result<Self> {
        let ([c, h, w], data) = values.into_f32_volume("affinity map")?;
        let r = (c as f64).sqrt().round() as usize;
        if r * r != c {
            return Err(Error::InvalidShape(format!(
                "{c} affinity channels is not a square window"
            )));
        }
        let geometry = WindowGeometry::new(r)?;
        match validity {
            None => Self::new(level, geometry, h, w, data),
            Some(mask) => {
                let (dims, mask) = mask.into_u32_volume("validity mask")?;
                if dims != [c, h, w] {
                    return Err(Error::ShapeMismatch(format!(
                        "validity mask {dims:?} vs affinity {:?}",
                        [c, h, w]
                    )));
                }
                let valid = mask.into_iter().map(|v| v != 0).collect();
                Self::with_validity(level, geometry, h, w, data, valid)
            }
        }
    }
}

/// Affinity maps from the finest level (0) to the coarsest.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityPyramid {
    levels: Vec<AffinityMap>,
}

impl AffinityPyramid {
    pub fn new(levels: Vec<AffinityMap>) -> Result<Self> {
        let Some(base) = levels.first() else {
            return Err(Error::InvalidArgument("empty affinity pyramid".into()));
        };
        let (h, w) = (base.height(), base.width());
        for (l, map) in levels.iter().enumerate() {
            let expected = level_dims(h, w, l as u32);
            if map.level != l as u32 || (map.height(), map.width()) != expected {
                return Err(Error::ShapeMismatch(format!(
                    "pyramid level {l} is {}x{} (level tag {}), expected {}x{}",
                    map.height(),
                    map.width(),
                    map.level,
                    expected.0,
                    expected.1
                )));
            }
        }
        Ok(Self { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn base_height(&self) -> usize {
        self.levels[0].height()
    }

    pub fn base_width(&self) -> usize {
        self.levels[0].width()
    }

    pub fn level(&self, l: usize) -> &AffinityMap {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[AffinityMap] {
        &self.levels
    }

    pub fn into_levels(self) -> Vec<AffinityMap> {
        self.levels
    }
}
