use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::image::{reflect_index, Image};
use super::kernel::KernelStack;
use crate::error::Result;

/// Separable Gaussian blur with reflect padding.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Result<Image> {
    let stack = KernelStack::with_default_size(sigma)?;
    let k = stack.kernel_1d(0);
    let r = stack.radius() as isize;
    let (w, h) = (img.width(), img.height());
    let horiz = Image::from_fn(w, h, |x, y| {
        k.iter().enumerate().map(|(n, c)| c * img.get(reflect_index(x as isize + n as isize - r, w), y)).sum()
    });
    Ok(Image::from_fn(w, h, |x, y| {
        k.iter().enumerate().map(|(n, c)| c * horiz.get(x, reflect_index(y as isize + n as isize - r, h))).sum()
    }))
}

/// Seeded Gaussian-filtered white noise rescaled to [0, 1].
pub fn smooth_noise(width: usize, height: usize, sigma: f64, seed: u64) -> Result<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = Image::zeros(width, height);
    for v in noise.data_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    Ok(gaussian_blur(&noise, sigma)?.normalized())
}
