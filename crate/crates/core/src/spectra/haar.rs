use super::{ImageGrid, Result, SpectraError};

/// The three detail bands of one level, each `s x s` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Subbands {
    pub side: usize,
    pub lh: Vec<f64>,
    pub hl: Vec<f64>,
    pub hh: Vec<f64>,
}

/// Haar decomposition of an image. `details[0]` is the finest level (half the
/// image side), `details[levels - 1]` the coarsest; `low` is the remaining
/// LL block.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub side: usize,
    pub details: Vec<Subbands>,
    pub low: Vec<f64>,
}

impl WaveletPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn low_side(&self) -> usize {
        self.side >> self.details.len()
    }

    pub fn coefficient_count(&self) -> usize {
        self.low.len() + self.details.iter().map(|d| 3 * d.side * d.side).sum::<usize>()
    }

    /// Sum of squared coefficients.
    pub fn energy(&self) -> f64 {
        let mut sq: Vec<f64> = self.low.iter().map(|c| c * c).collect();
        for d in &self.details {
            sq.extend(d.lh.iter().chain(&d.hl).chain(&d.hh).map(|c| c * c));
        }
        crate::stats::pairwise_sum(&sq)
    }
}

/// Orthonormal Haar analysis down `levels` octaves.
///
/// Each 2x2 block `[a b; c d]` maps to
/// `LL = (a+b+c+d)/2`, `LH = (a-b+c-d)/2`, `HL = (a+b-c-d)/2`, `HH = (a-b-c+d)/2`.
pub fn forward_haar(image: &ImageGrid, levels: usize) -> Result<WaveletPyramid> {
    let max = image.levels();
    if levels > max {
        return Err(SpectraError::TooManyLevels { levels, max });
    }
    let mut low = image.values().to_vec();
    let mut s = image.side();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let h = s / 2;
        let mut ll = vec![0.0; h * h];
        let mut band = Subbands { side: h, lh: vec![0.0; h * h], hl: vec![0.0; h * h], hh: vec![0.0; h * h] };
        for i in 0..h {
            for j in 0..h {
                let a = low[2 * i * s + 2 * j];
                let b = low[2 * i * s + 2 * j + 1];
                let c = low[(2 * i + 1) * s + 2 * j];
                let d = low[(2 * i + 1) * s + 2 * j + 1];
                let k = i * h + j;
                ll[k] = 0.5 * (a + b + c + d);
                band.lh[k] = 0.5 * (a - b + c - d);
                band.hl[k] = 0.5 * (a + b - c - d);
                band.hh[k] = 0.5 * (a - b - c + d);
            }
        }
        details.push(band);
        low = ll;
        s = h;
    }
    Ok(WaveletPyramid { side: image.side(), details, low })
}

pub fn inverse_haar(pyramid: &WaveletPyramid) -> Result<ImageGrid> {
    let mut s = pyramid.low_side();
    let mut low = pyramid.low.clone();
    for band in pyramid.details.iter().rev() {
        let big = 2 * s;
        let mut out = vec![0.0; big * big];
        for i in 0..s {
            for j in 0..s {
                let k = i * s + j;
                let (ll, lh, hl, hh) = (low[k], band.lh[k], band.hl[k], band.hh[k]);
                out[2 * i * big + 2 * j] = 0.5 * (ll + lh + hl + hh);
                out[2 * i * big + 2 * j + 1] = 0.5 * (ll - lh + hl - hh);
                out[(2 * i + 1) * big + 2 * j] = 0.5 * (ll + lh - hl - hh);
                out[(2 * i + 1) * big + 2 * j + 1] = 0.5 * (ll - lh - hl + hh);
            }
        }
        low = out;
        s = big;
    }
    ImageGrid::new(s, low)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_image(side: usize, seed: u64) -> ImageGrid {
        let mut rng = crate::Seed::new(seed).rng();
        ImageGrid::new(side, (0..side * side).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn constant_image_collapses_to_one_coefficient() {
        let img = ImageGrid::new(8, vec![1.5; 64]).unwrap();
        let p = forward_haar(&img, 3).unwrap();
        assert_eq!(p.low, vec![1.5 * 8.0]);
        for d in &p.details {
            assert!(d.lh.iter().chain(&d.hl).chain(&d.hh).all(|&c| c == 0.0));
        }
    }

    #[test]
    fn round_trip_and_energy() {
        for levels in 0..=3 {
            let img = random_image(8, levels as u64);
            let p = forward_haar(&img, levels).unwrap();
            assert_eq!(p.coefficient_count(), 64);
            let back = inverse_haar(&p).unwrap();
            let err: f64 = img.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "{err}");
            assert!((p.energy() - img.energy()).abs() <= 1e-12 * img.energy());
        }
    }

    #[test]
    fn single_block_by_hand() {
        let img = ImageGrid::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = forward_haar(&img, 1).unwrap();
        assert_eq!(p.low, vec![5.0]);
        assert_eq!((p.details[0].lh[0], p.details[0].hl[0], p.details[0].hh[0]), (-1.0, -2.0, 0.0));
    }

    #[test]
    fn too_many_levels() {
        let img = ImageGrid::zeros(4).unwrap();
        assert!(matches!(forward_haar(&img, 3), Err(SpectraError::TooManyLevels { levels: 3, max: 2 })));
    }
}
