use super::{indicator, Dataset, DatasetMeta};
use crate::linalg::Matrix;
use crate::trainer::rng_from_seed;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

/// `sin(2x) / (2x)`.
pub fn sinc(x: f64) -> f64 {
    (2.0 * x).sin() / (2.0 * x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincConfig {
    /// Half-width of the multiplicative noise band, `y * (1 + u)` with `u` in `[-f, f]`.
    pub noise_fraction: f64,
    pub noisy_replicas: usize,
    pub seed: u64,
}

impl Default for SincConfig {
    fn default() -> Self {
        Self {
            noise_fraction: 0.2,
            noisy_replicas: 10,
            seed: 0,
        }
    }
}

/// Eight clean points at `x = 1..8` followed by `noisy_replicas` noisy copies.
pub fn gen_sinc(cfg: &SincConfig) -> Dataset {
    assert!(
        (0.0..1.0).contains(&cfg.noise_fraction),
        "noise_fraction must lie in [0, 1)"
    );
    let base: Vec<f64> = (1..=8).map(f64::from).collect();
    let mut rng = rng_from_seed(cfg.seed);
    let mut xs = base.clone();
    let mut ys: Vec<f64> = base.iter().map(|&x| sinc(x)).collect();
    for _ in 0..cfg.noisy_replicas {
        for &x in &base {
            let u = if cfg.noise_fraction > 0.0 {
                rng.random_range(-cfg.noise_fraction..=cfg.noise_fraction)
            } else {
                0.0
            };
            xs.push(x);
            ys.push(sinc(x) * (1.0 + u));
        }
    }
    let m = xs.len();
    Dataset {
        x: Matrix::from_vec(m, 1, xs),
        y: Matrix::from_vec(m, 1, ys),
        labels: None,
        class_names: None,
        meta: DatasetMeta {
            source: format!(
                "sinc noise_fraction={} noisy_replicas={}",
                cfg.noise_fraction, cfg.noisy_replicas
            ),
            seed: Some(cfg.seed),
            clean_rows: Some(8),
        },
    }
}

/// The four XOR points, the last one nudged off the lattice.
pub fn gen_xor() -> Dataset {
    let x = Matrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.001, 1.001]);
    let labels = vec![0, 0, 1, 1];
    let y = Matrix::from_iterator(4, 1, labels.iter().map(|&l| l as f64));
    Dataset {
        x,
        y,
        labels: Some(labels),
        class_names: Some(vec!["0".into(), "1".into()]),
        meta: DatasetMeta {
            source: "xor".into(),
            seed: None,
            clean_rows: None,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralConfig {
    pub points_per_arm: usize,
    pub arms: usize,
    pub noise_std: f64,
    pub turns: f64,
    pub max_radius: f64,
    pub seed: u64,
}

impl Default for SpiralConfig {
    fn default() -> Self {
        Self {
            points_per_arm: 500,
            arms: 3,
            noise_std: 0.02,
            turns: 1.5,
            max_radius: 1.0,
            seed: 0,
        }
    }
}

/// Interleaved Archimedean spirals, one class per arm. Rows are grouped by
/// arm and ordered by increasing parameter `t` within an arm.
pub fn gen_spiral(cfg: &SpiralConfig) -> Dataset {
    assert!(cfg.points_per_arm >= 1, "points_per_arm must be >= 1");
    assert!(cfg.arms >= 1, "arms must be >= 1");
    let mut rng = rng_from_seed(cfg.seed);
    let noise = if cfg.noise_std > 0.0 {
        Some(Normal::new(0.0, cfg.noise_std).expect("finite noise std"))
    } else {
        None
    };
    let m = cfg.points_per_arm * cfg.arms;
    let mut coords = Vec::with_capacity(2 * m);
    let mut labels = Vec::with_capacity(m);
    for arm in 0..cfg.arms {
        let offset = arm as f64 * 2.0 * PI / cfg.arms as f64;
        let mut ts: Vec<f64> = (0..cfg.points_per_arm)
            .map(|_| rng.random::<f64>())
            .collect();
        ts.sort_by(f64::total_cmp);
        for t in ts {
            let r = cfg.max_radius * t;
            let theta = 2.0 * PI * cfg.turns * t + offset;
            let (mut px, mut py) = (r * theta.cos(), r * theta.sin());
            if let Some(n) = &noise {
                px += n.sample(&mut rng);
                py += n.sample(&mut rng);
            }
            coords.push(px);
            coords.push(py);
            labels.push(arm);
        }
    }
    Dataset {
        x: Matrix::from_row_slice(m, 2, &coords),
        y: indicator(&labels, cfg.arms),
        labels: Some(labels),
        class_names: Some((0..cfg.arms).map(|a| a.to_string()).collect()),
        meta: DatasetMeta {
            source: format!(
                "spiral arms={} points_per_arm={} noise_std={} turns={} max_radius={}",
                cfg.arms, cfg.points_per_arm, cfg.noise_std, cfg.turns, cfg.max_radius
            ),
            seed: Some(cfg.seed),
            clean_rows: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_closed_forms() {
        assert!((sinc(1.0) - 0.4546487).abs() < 1e-7);
        assert!((sinc(8.0) - 16f64.sin() / 16.0).abs() < 1e-15);
        assert!((sinc(8.0) + 0.0179940).abs() < 1e-7);
    }

    #[test]
    fn sinc_layout_and_noise_band() {
        let cfg = SincConfig {
            seed: 3,
            ..SincConfig::default()
        };
        let d = gen_sinc(&cfg);
        assert_eq!(d.rows(), 88);
        assert_eq!(d.meta.clean_rows, Some(8));
        for i in 0..8 {
            assert_eq!(d.y[(i, 0)], sinc((i + 1) as f64));
        }
        for i in 8..88 {
            let clean = sinc(d.x[(i, 0)]);
            let rel = (d.y[(i, 0)] - clean) / clean;
            assert!(rel.abs() <= 0.2 + 1e-12, "row {i}: {rel}");
        }
        assert_eq!(gen_sinc(&cfg), d);
        let other = gen_sinc(&SincConfig { seed: 4, ..cfg });
        assert_ne!(other.y, d.y);
        assert_eq!(d.clean_subset().rows(), 8);
    }

    #[test]
    fn xor_verbatim() {
        let d = gen_xor();
        assert_eq!(d.x.shape(), (4, 2));
        assert_eq!(d.y.shape(), (4, 1));
        assert_eq!((d.x[(3, 0)], d.x[(3, 1)]), (0.001, 1.001));
        assert_eq!(d.labels, Some(vec![0, 0, 1, 1]));
    }

    #[test]
    fn spiral_defaults() {
        let d = gen_spiral(&SpiralConfig::default());
        assert_eq!(d.rows(), 1500);
        assert_eq!(d.y.ncols(), 3);
        assert_eq!(d.class_counts(), Some(vec![500, 500, 500]));
    }

    #[test]
    fn noiseless_arms_are_radially_monotone() {
        let d = gen_spiral(&SpiralConfig {
            noise_std: 0.0,
            points_per_arm: 200,
            ..SpiralConfig::default()
        });
        for arm in 0..3 {
            let radii: Vec<f64> = (arm * 200..(arm + 1) * 200)
                .map(|i| d.x.row(i).norm())
                .collect();
            assert!(radii.windows(2).all(|w| w[0] <= w[1]));
            assert!(radii[199] <= 1.0 + 1e-12);
        }
    }
}
