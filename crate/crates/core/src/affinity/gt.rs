use crate::affinity::{AffinityMap, AffinityPyramid, WindowGeometry};
use crate::error::{Error, Result};
use crate::grid::LabelMap;

/// Binary same-instance affinities of one instance map.
pub fn gt_affinity_map(instances: &LabelMap, geometry: &WindowGeometry) -> Result<AffinityMap> {
    let (h, w) = (instances.height(), instances.width());
    let n = h * w;
    let ids = instances.grid.as_slice();
    let mut values = vec![0.0f32; geometry.channels() * n];
    let mut valid = vec![false; geometry.channels() * n];
    for j in 0..geometry.channels() {
        for y in 0..h {
            for x in 0..w {
                let p = y * w + x;
                if let Some((ny, nx)) = geometry.neighbor(j, y, x, h, w) {
                    valid[j * n + p] = true;
                    if ids[p] == ids[ny * w + nx] {
                        values[j * n + p] = 1.0;
                    }
                }
            }
        }
    }
    AffinityMap::with_validity(instances.level, geometry.clone(), h, w, values, valid)
}

/// Ground-truth pyramid with `levels` levels and an `r x r` window at every
/// level. Level `l` instance ids come from stride-2 top-left subsampling of
/// level `l - 1`. Background pairs count as the same instance.
pub fn gt_affinity_pyramid(instances: &LabelMap, levels: usize, r: usize) -> Result<AffinityPyramid> {
    if levels == 0 {
        return Err(Error::InvalidArgument("pyramid needs at least one level".into()));
    }
    if instances.level != 0 {
        return Err(Error::InvalidArgument(format!(
            "ground truth starts from level 0, got level {}",
            instances.level
        )));
    }
    let geometry = WindowGeometry::new(r)?;
    let mut maps = Vec::with_capacity(levels);
    let mut current = instances.clone();
    for l in 0..levels {
        if l > 0 {
            current = current.coarser();
        }
        maps.push(gt_affinity_map(&current, &geometry)?);
    }
    AffinityPyramid::new(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn halves(h: usize, w: usize) -> LabelMap {
        let mut g = Grid::filled(h, w, 1u32);
        for y in 0..h {
            for x in w / 2..w {
                g.set(y, x, 2);
            }
        }
        LabelMap::instances(g)
    }

    #[test]
    fn uniform_image_is_all_ones() {
        let map = LabelMap::instances(Grid::filled(9, 7, 3));
        let pyr = gt_affinity_pyramid(&map, 3, 3).unwrap();
        for level in pyr.levels() {
            for (v, ok) in level.values().iter().zip(level.validity()) {
                assert_eq!(*v, if *ok { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn boundary_column_cuts_three_offsets() {
        // Left half id 1 (columns 0..3), right half id 2 (columns 3..6).
        let map = halves(5, 6);
        let aff = gt_affinity_map(&map, &WindowGeometry::new(3).unwrap()).unwrap();
        let g = aff.geometry().clone();
        let (y, x) = (2, 2);
        let p = y * 6 + x;
        for j in 0..9 {
            let expected = if g.offset(j).1 == 1 { 0.0 } else { 1.0 };
            assert_eq!(aff.value(j, p), expected, "channel {j}");
            assert!(aff.is_valid(j, p));
        }
    }

    #[test]
    fn symmetric_binary_center_one() {
        let mut rng = crate::rng::SplitMix64::new(3);
        let ids: Vec<u32> = (0..11 * 13).map(|_| rng.below(4) as u32).collect();
        let map = LabelMap::instances(Grid::from_vec(11, 13, ids).unwrap());
        let pyr = gt_affinity_pyramid(&map, 3, 5).unwrap();
        for aff in pyr.levels() {
            let g = aff.geometry();
            let (h, w) = (aff.height(), aff.width());
            for y in 0..h {
                for x in 0..w {
                    let p = y * w + x;
                    assert_eq!(aff.value(g.center(), p), 1.0);
                    for j in 0..g.channels() {
                        let v = aff.value(j, p);
                        assert!(v == 0.0 || v == 1.0);
                        if let Some((ny, nx)) = g.neighbor(j, y, x, h, w) {
                            let q = ny * w + nx;
                            assert_eq!(v, aff.value(g.reverse(j), q));
                        } else {
                            assert!(!aff.is_valid(j, p));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coarse_levels_follow_subsampling() {
        let map = halves(8, 8);
        let pyr = gt_affinity_pyramid(&map, 4, 3).unwrap();
        assert_eq!(pyr.depth(), 4);
        let dims: Vec<_> = pyr.levels().iter().map(|m| (m.height(), m.width())).collect();
        assert_eq!(dims, vec![(8, 8), (4, 4), (2, 2), (1, 1)]);
        // At level 2 the 2x2 map is [[1, 2], [1, 2]].
        let l2 = pyr.level(2);
        let right = 5; // channel of offset (0, 1)
        assert_eq!(l2.value(right, 0), 0.0);
        assert_eq!(l2.value(7, 0), 1.0); // offset (1, 0)
    }
}
