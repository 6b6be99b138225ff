use crate::error::{Error, Result};

/// The `r x r` neighbourhood sampled around every pixel. Channel `j` of an
/// affinity map holds the affinity towards `offsets[j]`; offsets run
/// row-major from `(-k, -k)` to `(k, k)` with `k = (r - 1) / 2`, so the
/// center `(0, 0)` is channel `(r^2 - 1) / 2` and the reverse of channel `j`
/// is channel `r^2 - 1 - j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowGeometry {
    r: usize,
    offsets: Vec<(i32, i32)>,
}

impl WindowGeometry {
    pub fn new(r: usize) -> Result<Self> {
        if r < 3 || r.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "window side must be odd and >= 3, got {r}"
            )));
        }
        let k = (r as i32 - 1) / 2;
        let offsets = (-k..=k)
            .flat_map(|dy| (-k..=k).map(move |dx| (dy, dx)))
            .collect();
        Ok(Self { r, offsets })
    }

    pub fn side(&self) -> usize {
        self.r
    }

    pub fn radius(&self) -> usize {
        (self.r - 1) / 2
    }

    pub fn channels(&self) -> usize {
        self.r * self.r
    }

    pub fn center(&self) -> usize {
        (self.channels() - 1) / 2
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    #[inline]
    pub fn offset(&self, channel: usize) -> (i32, i32) {
        self.offsets[channel]
    }

    #[inline]
    pub fn reverse(&self, channel: usize) -> usize {
        self.channels() - 1 - channel
    }

    /// Channels after the center: each unordered in-window pair is reached
    /// exactly once from its raster-earlier endpoint.
    pub fn forward_channels(&self) -> std::ops::Range<usize> {
        self.center() + 1..self.channels()
    }

    /// Neighbour of `(y, x)` along `channel`, if inside an `h x w` image.
    #[inline]
    pub fn neighbor(
        &self,
        channel: usize,
        y: usize,
        x: usize,
        h: usize,
        w: usize,
    ) -> Option<(usize, usize)> {
        let (dy, dx) = self.offsets[channel];
        let ny = y as i64 + dy as i64;
        let nx = x as i64 + dx as i64;
        (ny >= 0 && nx >= 0 && (ny as usize) < h && (nx as usize) < w)
            .then_some((ny as usize, nx as usize))
    }
}
