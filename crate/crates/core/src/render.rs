//! Deterministic PPM (P6) rendering of instance label maps.

use crate::grid::LabelMap;
use crate::rng::SplitMix64;

// Five lattices of 216 colors each; no level value is shared between
// lattices, so ids 1..=1080 get pairwise distinct colors.
const LEVELS: [[u8; 6]; 5] = [
    [40, 83, 126, 169, 212, 255],
    [48, 91, 134, 177, 220, 250],
    [56, 99, 142, 185, 228, 245],
    [64, 107, 150, 193, 236, 240],
    [72, 115, 158, 201, 232, 252],
];

/// Seeded id-to-color map. Id 0 is black; id `k + 1` picks lattice
/// `(k / 216) % 5` and cell `perm[k % 216]` of a 6x6x6 grid of levels,
/// where `perm` is a seeded shuffle of `0..216`.
pub struct Palette {
    perm: Vec<u32>,
}

impl Palette {
    pub fn new(seed: u64) -> Self {
        let mut perm: Vec<u32> = (0..216).collect();
        SplitMix64::new(seed).shuffle(&mut perm);
        Self { perm }
    }

    pub fn color(&self, id: u32) -> [u8; 3] {
        if id == 0 {
            return [0, 0, 0];
        }
        let k = id - 1;
        let levels = &LEVELS[((k / 216) % LEVELS.len() as u32) as usize];
        let cell = self.perm[(k % 216) as usize];
        [
            levels[(cell / 36) as usize],
            levels[((cell / 6) % 6) as usize],
            levels[(cell % 6) as usize],
        ]
    }
}

pub fn palette_color(id: u32, seed: u64) -> [u8; 3] {
    Palette::new(seed).color(id)
}

/// Binary PPM bytes of `labels`.
pub fn render_labels(labels: &LabelMap, palette_seed: u64) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", labels.width(), labels.height());
    let mut out = Vec::with_capacity(header.len() + 3 * labels.grid.len());
    out.extend_from_slice(header.as_bytes());
    let palette = Palette::new(palette_seed);
    for &id in labels.grid.as_slice() {
        out.extend_from_slice(&palette.color(id));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::collections::HashSet;

    #[test]
    fn background_renders_black() {
        let map = LabelMap::instances(Grid::filled(3, 4, 0));
        let bytes = render_labels(&map, 11);
        let header = b"P6\n4 3\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert!(bytes[header.len()..].iter().all(|&b| b == 0));
        assert_eq!(bytes.len(), header.len() + 36);
    }

    #[test]
    fn rendering_is_deterministic() {
        let map = LabelMap::instances(Grid::from_vec(2, 2, vec![0, 1, 2, 3]).unwrap());
        assert_eq!(render_labels(&map, 3), render_labels(&map, 3));
    }

    #[test]
    fn first_thousand_ids_are_distinct_and_not_black() {
        for seed in [0, 1, 42] {
            let palette = Palette::new(seed);
            let colors: HashSet<[u8; 3]> = (1..=1000).map(|id| palette.color(id)).collect();
            assert_eq!(colors.len(), 1000);
            assert!(!colors.contains(&[0, 0, 0]));
        }
    }
}
