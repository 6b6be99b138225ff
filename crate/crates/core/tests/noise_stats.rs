use afpy::affinity::gt_affinity_pyramid;
use afpy::synth::{generate_scene, perturb_affinity, perturb_scores, scores_from_classes, NoiseSpec, SceneSpec};

#[test]
fn flip_rate_matches_probability() {
    let scene = generate_scene(&SceneSpec { height: 220, width: 220, num_instances: 6, ..SceneSpec::default() }).unwrap();
    let gt = gt_affinity_pyramid(&scene.instances, 1, 5).unwrap().level(0).clone();
    let noisy = perturb_affinity(&gt, &NoiseSpec { flip_prob: 0.1, rng_seed: 17, ..NoiseSpec::default() }).unwrap();
    let (mut flips, mut total) = (0usize, 0usize);
    for (i, (&a, &b)) in gt.values().iter().zip(noisy.values()).enumerate() {
        if gt.validity()[i] {
            total += 1;
            flips += ((a > 0.5) != (b > 0.5)) as usize;
        }
    }
    assert!(total >= 1_000_000, "{total}");
    let rate = flips as f64 / total as f64;
    assert!((rate - 0.1).abs() <= 0.003, "{rate}");
}

#[test]
fn zero_noise_only_clamps() {
    let scene = generate_scene(&SceneSpec { height: 30, width: 30, ..SceneSpec::default() }).unwrap();
    let gt = gt_affinity_pyramid(&scene.instances, 1, 3).unwrap().level(0).clone();
    let noisy = perturb_affinity(&gt, &NoiseSpec::default()).unwrap();
    for (i, (&a, &b)) in gt.values().iter().zip(noisy.values()).enumerate() {
        if gt.validity()[i] {
            assert!((a - b).abs() <= 1e-3 + 1e-7);
        } else {
            assert_eq!(b, 0.0);
        }
    }
}

#[test]
fn semantic_corruption_rate_and_normalization() {
    let scene = generate_scene(&SceneSpec { height: 200, width: 200, ..SceneSpec::default() }).unwrap();
    let clean = scores_from_classes(&scene.classes, 3, 0.9).unwrap();
    let noisy = perturb_scores(&clean, &NoiseSpec { semantic_corrupt_prob: 0.2, rng_seed: 3, ..NoiseSpec::default() })
        .unwrap();
    let mut changed = 0;
    for p in 0..clean.pixels() {
        let d = noisy.distribution(p);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        changed += (d != clean.distribution(p)) as usize;
    }
    let rate = changed as f64 / clean.pixels() as f64;
    // 40000 Bernoulli(0.2) draws: standard deviation 0.002.
    assert!((rate - 0.2).abs() < 0.01, "{rate}");
}
