use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ManifoldSpec;
use crate::error::{Error, Result};

/// Frame vectors drawn per point.
pub const FRAME_SIZE: usize = 4;
const MIN_FRAME_NORM: f64 = 1e-3;

/// Seeded points and tangent frames. Identical seeds reproduce identical
/// sets bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
    pub frames: Vec<[Vec<f64>; FRAME_SIZE]>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn frame_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>().sqrt() >= MIN_FRAME_NORM {
            return v;
        }
    }
}

/// Draws `count` points uniformly from the spec's sampling box, each with
/// four tangent vectors whose components are uniform in [−1, 1].
pub fn sample(spec: &ManifoldSpec, count: usize, seed: u64) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::NoSamples);
    }
    for (i, (lo, hi)) in spec.sampling_box.iter().enumerate() {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::EmptyBox(i));
        }
    }
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut frames = Vec::with_capacity(count);
    for _ in 0..count {
        let p = spec
            .sampling_box
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..=hi))
            .collect();
        points.push(p);
        frames.push(std::array::from_fn(|_| frame_vector(&mut rng, n)));
    }
    Ok(SampleSet {
        seed,
        points,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use std::f64::consts::PI;

    #[test]
    fn deterministic() {
        let spec = catalog::builtin("cylinder_s2xr").unwrap().spec;
        let a = sample(&spec, 100, 7).unwrap();
        let b = sample(&spec, 100, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(&spec, 100, 8).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn respects_box_margins() {
        let spec = catalog::builtin("cylinder_s2xr").unwrap().spec;
        let s = sample(&spec, 500, 3).unwrap();
        for p in &s.points {
            assert!(p[0] >= 0.3 && p[0] <= PI - 0.3);
            assert!(spec.contains(p));
        }
        for f in &s.frames {
            for v in f {
                assert_eq!(v.len(), 3);
                assert!(v.iter().all(|x| (-1.0..=1.0).contains(x)));
                assert!(v.iter().map(|x| x * x).sum::<f64>() >= 1e-6);
            }
        }
    }

    #[test]
    fn zero_count_is_an_error() {
        let spec = catalog::builtin("euclidean3").unwrap().spec;
        assert!(matches!(sample(&spec, 0, 1), Err(Error::NoSamples)));
    }

    #[test]
    fn empty_box_is_an_error() {
        let mut spec = catalog::builtin("euclidean3").unwrap().spec;
        spec.sampling_box[2] = (1.0, 1.0);
        assert!(matches!(sample(&spec, 5, 1), Err(Error::EmptyBox(2))));
    }
}
