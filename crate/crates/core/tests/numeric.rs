use diffinv::invariance::{jet_transform, Jet, LinearMap2};
use diffinv::numeric::*;
use diffinv::symbolic::{q, DerivSymbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sym(i: u8, j: u8) -> DerivSymbol {
    DerivSymbol::new(i, j)
}

/// E[Z^k] for Z ~ N(0, s^2).
fn gauss_moment(k: usize, s: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut r = 1.0;
    let mut n = k as i64 - 1;
    while n > 1 {
        r *= n as f64;
        n -= 2;
    }
    r * s.powi(k as i32)
}

fn falling(a: usize, i: usize) -> f64 {
    if i > a {
        return 0.0;
    }
    (a - i + 1..=a).map(|k| k as f64).product()
}

/// Physicists' Hermite polynomial from its explicit sum.
fn hermite_sum(n: usize, x: f64) -> f64 {
    (0..=n / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(n) / (factorial(k) * factorial(n - 2 * k)) * (2.0 * x).powi((n - 2 * k) as i32)
        })
        .sum()
}

#[test]
fn constant_patch_gives_exact_zero_jet() {
    for c in [0.0, 1.0, -3.25, 1e6 / 7.0] {
        let img = Image::from_fn(41, 41, |_, _| c);
        for sigma in [1.0, 2.5, 4.0] {
            let stack = KernelStack::new(sigma, 41).unwrap();
            let jet = local_jet(&img, 20, 20, &stack, Padding::None).unwrap();
            assert!(jet.values().iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn ramp_gives_sigma() {
    for sigma in [2.0, 3.0, 4.0] {
        let stack = KernelStack::new(sigma, 65).unwrap();
        let rx = Image::from_fn(65, 65, |x, _| x as f64);
        let jx = local_jet(&rx, 32, 32, &stack, Padding::None).unwrap();
        assert!((jx.get(sym(1, 0)).unwrap() - sigma).abs() < 1e-10);
        for s in DerivSymbol::all(4).into_iter().filter(|s| *s != sym(1, 0)) {
            assert!(jx.get(s).unwrap().abs() < 1e-10, "{s}");
        }
        let ry = Image::from_fn(65, 65, |_, y| 2.0 * y as f64);
        let jy = local_jet(&ry, 32, 32, &stack, Padding::None).unwrap();
        assert!((jy.get(sym(0, 1)).unwrap() - 2.0 * sigma).abs() < 1e-10);
    }
}

#[test]
fn polynomials_reproduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (x0, y0) = (30usize, 30usize);
    for sigma in [1.5, 2.5, 3.5] {
        let stack = KernelStack::new(sigma, 61).unwrap();
        let mut coeff = [[0.0f64; 5]; 5];
        for (a, row) in coeff.iter_mut().enumerate() {
            for (b, c) in row.iter_mut().enumerate() {
                if a + b <= 4 {
                    *c = rng.random_range(-1.0..1.0);
                }
            }
        }
        let scale = 10.0;
        let img = Image::from_fn(61, 61, |x, y| {
            let (u, v) = ((x as f64 - x0 as f64) / scale, (y as f64 - y0 as f64) / scale);
            let mut s = 0.0;
            for a in 0..5 {
                for b in 0..5 - a {
                    s += coeff[a][b] * u.powi(a as i32) * v.powi(b as i32);
                }
            }
            s
        });
        let jet = local_jet(&img, x0, y0, &stack, Padding::None).unwrap();
        for s in DerivSymbol::all(4) {
            let (i, j) = (s.i as usize, s.j as usize);
            // sigma^(i+j) d^i/dx^i d^j/dy^j of the Gaussian-smoothed polynomial
            let mut expect = 0.0;
            for a in 0..5 {
                for b in 0..5 - a {
                    expect += coeff[a][b] / scale.powi((a + b) as i32)
                        * falling(a, i)
                        * gauss_moment(a.saturating_sub(i), sigma)
                        * falling(b, j)
                        * gauss_moment(b.saturating_sub(j), sigma);
                }
            }
            expect *= sigma.powi((i + j) as i32);
            let got = *jet.get(s).unwrap();
            assert!((got - expect).abs() < 1e-8, "sigma {sigma} {s}: {got} vs {expect}");
        }
    }
}

#[test]
fn truncated_window_ramp() {
    // radius 32 cuts a sigma 12 Gaussian at 2.7 sigma, so the slope comes out about 6% low
    let sigma = 12.0;
    let stack = KernelStack::new(sigma, 65).unwrap();
    let ramp = Image::from_fn(65, 65, |x, _| x as f64);
    let got = *local_jet(&ramp, 32, 32, &stack, Padding::None).unwrap().get(sym(1, 0)).unwrap();
    let expect: f64 = (-32..=32)
        .map(|d: i32| {
            let t = d as f64 / sigma;
            t * t * (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
        })
        .sum();
    assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    assert!(got < 0.95 * sigma);
}

#[test]
fn separable_equals_direct_2d() {
    let img = smooth_noise(49, 49, 2.0, 3).unwrap();
    let (size, sigma) = (25usize, 3.0);
    let stack = KernelStack::new(sigma, size).unwrap();
    let (x0, y0) = (24usize, 20usize);
    let jet = local_jet(&img, x0, y0, &stack, Padding::None).unwrap();
    let r = (size / 2) as isize;
    let f0 = img.get(x0, y0);
    for s in DerivSymbol::all(4) {
        let k = gaussian_derivative_kernel(s.i as usize, s.j as usize, sigma, size).unwrap();
        let mut direct = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let kv = k[((dy + r) as usize) * size + (dx + r) as usize];
                let f = img.get((x0 as isize - dx) as usize, (y0 as isize - dy) as usize);
                direct += kv * (f - f0);
            }
        }
        assert!((direct - jet.get(s).unwrap()).abs() < 1e-12, "{s}");
    }
}

#[test]
fn footprint_overflow_rejected_unless_padded() {
    let img = smooth_noise(30, 30, 2.0, 1).unwrap();
    let stack = KernelStack::new(2.0, 17).unwrap();
    assert!(local_jet(&img, 3, 15, &stack, Padding::None).is_err());
    assert!(local_jet(&img, 3, 15, &stack, Padding::Reflect).is_ok());
    assert!(local_jet(&img, 8, 8, &stack, Padding::None).is_ok());
}

#[test]
fn quarter_turn_matches_jet_transform() {
    let f = smooth_noise(61, 61, 3.0, 11).unwrap();
    let c = 30isize;
    // (u, v) = (y, -x) about the centre, so h(u, v) = f(-v, u)
    let h = Image::from_fn(61, 61, |px, py| {
        let (u, v) = (px as isize - c, py as isize - c);
        f.get((c - v) as usize, (c + u) as usize)
    });
    let stack = KernelStack::new(4.0, 61).unwrap();
    let jf = local_jet(&f, 30, 30, &stack, Padding::None).unwrap();
    let jh = local_jet(&h, 30, 30, &stack, Padding::None).unwrap();
    let m = LinearMap2::rotation(q(0), q(1)).unwrap();
    let predicted = jet_transform(&jf, &m).unwrap();
    for (a, b) in predicted.values().iter().zip(jh.values()) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn kernel_is_weighted_hermite_product() {
    let sigma = 12.0;
    let stack = KernelStack::new(sigma / 2f64.sqrt(), 65).unwrap();
    let r = 32isize;
    for i in 0..=4usize {
        for j in 0..=4 - i {
            let (gi, gj) = (stack.raw_1d(i), stack.raw_1d(j));
            let mut peak: f64 = 0.0;
            let mut worst: f64 = 0.0;
            for (ny, dy) in (-r..=r).enumerate() {
                for (nx, dx) in (-r..=r).enumerate() {
                    let (x, y) = (dx as f64, dy as f64);
                    let sampled = gi[nx] * gj[ny];
                    let norm = |k: usize| (2f64.powi(k as i32) * factorial(k) * std::f64::consts::PI.sqrt() * sigma).sqrt();
                    let hx = (-x * x / (2.0 * sigma * sigma)).exp() * hermite_sum(i, x / sigma) / norm(i);
                    let hy = (-y * y / (2.0 * sigma * sigma)).exp() * hermite_sum(j, y / sigma) / norm(j);
                    let closed = (2f64.powi((i + j) as i32) * factorial(i) * factorial(j)).sqrt()
                        / (std::f64::consts::PI.sqrt() * sigma)
                        * (-1.0 / sigma).powi((i + j) as i32)
                        * hx
                        * hy
                        * (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
                    peak = peak.max(sampled.abs());
                    worst = worst.max((sampled - closed).abs());
                }
            }
            assert!(worst <= 1e-12 * peak, "({i},{j}) worst {worst:e} peak {peak:e}");
        }
    }
}

#[test]
fn gh_functions_match_explicit_sum() {
    for i in 0..=4 {
        for x in [-30.0f64, -7.5, 0.0, 3.0, 22.0] {
            let norm = (2f64.powi(i as i32) * factorial(i) * std::f64::consts::PI.sqrt() * 12.0).sqrt();
            let expect = (-x * x / 288.0).exp() * hermite_sum(i, x / 12.0) / norm;
            assert!((gh_function(i, x, 12.0) - expect).abs() < 1e-15);
        }
    }
}

#[test]
fn standardization() {
    let img = smooth_noise(33, 33, 2.0, 4).unwrap();
    let (s, flag) = standardize_patch(&img);
    assert!(!flag);
    let (s2, _) = standardize_patch(&s);
    for (a, b) in s.data().iter().zip(s2.data()) {
        assert!((a - b).abs() < 1e-12);
    }
    let (s3, _) = standardize_patch(&img.map(|v| 2.7 * v - 0.4));
    for (a, b) in s.data().iter().zip(s3.data()) {
        assert!((a - b).abs() < 1e-12);
    }
    let (z, flag) = standardize_patch(&Image::from_fn(9, 9, |_, _| 0.3));
    assert!(flag);
    assert!(z.data().iter().all(|&v| v == 0.0));
}

#[test]
fn zero_patch_zero_vector() {
    let cat = diffinv::catalog::catalog();
    let set = diffinv::catalog::select_set(4, 3, diffinv::catalog::SetKind::IR).unwrap();
    let fv = feature_vector(cat, &Image::zeros(65, 65), &set.members, &[12.0], Some(65), Padding::None).unwrap();
    assert_eq!(fv.values.len(), 34);
    assert!(fv.degenerate);
    assert!(fv.values.iter().all(|&v| v == 0.0));
}

#[test]
fn feature_map_matches_pointwise_jets() {
    let cat = diffinv::catalog::catalog();
    let img = smooth_noise(24, 20, 2.0, 9).unwrap();
    let ids = [1u32, 2, 3, 13];
    let fm = feature_map(cat, &img, &ids, 2.0, None).unwrap();
    assert_eq!(fm.maps.len(), 4);
    let stack = KernelStack::with_default_size(2.0).unwrap();
    for (x, y) in [(0usize, 0usize), (5, 19), (23, 7), (12, 10)] {
        let jet = local_jet(&img, x, y, &stack, Padding::Reflect).unwrap();
        for (k, id) in ids.iter().enumerate() {
            let v = cat.polynomial(*id).unwrap().eval(&jet).unwrap();
            assert!((fm.maps[k].get(x, y) - v).abs() < 1e-12);
        }
    }
}

#[test]
fn derived_identities_on_random_jets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..1000 {
        let v: Vec<f64> = (0..14).map(|_| rng.random_range(-2.0..2.0)).collect();
        let jet = Jet::from_values(4, v.clone()).unwrap();
        let f = derived_features(&jet);
        assert!((f.lambda1 + f.lambda2 - (v[2] + v[4])).abs() < 1e-10);
        assert!((f.lambda1 * f.lambda2 - (v[2] * v[4] - v[3] * v[3])).abs() < 1e-10);
        assert!(f.lambda1 >= f.lambda2);
    }
}

#[test]
fn rotated_pair_features_are_close() {
    // localized content, so the square window sees the same intensities after rotation
    let pat = |x: f64, y: f64| {
        ((0.1 * x).sin() * (0.07 * y + 0.5).cos() + (-((x - 5.0).powi(2) + (y + 3.0).powi(2)) / 200.0).exp())
            * (-(x * x + y * y) / 400.0).exp()
    };
    let (size, c) = (129usize, 64.0);
    let cat = diffinv::catalog::catalog();
    let ids = diffinv::catalog::select_set(4, 3, diffinv::catalog::SetKind::IR).unwrap().members;
    let ex = FeatureExtractor::new(cat, &ids, &[12.0], Some(size), Padding::None).unwrap();
    let a = Image::from_fn(size, size, |x, y| pat(x as f64 - c, y as f64 - c));
    let fa = ex.feature_vector(&a).unwrap().values;
    for deg in [10.0f64, 30.0, 45.0, 200.0] {
        let (s, co) = deg.to_radians().sin_cos();
        let b = Image::from_fn(size, size, |x, y| {
            let (u, v) = (x as f64 - c, y as f64 - c);
            pat(co * u - s * v, s * u + co * v)
        });
        let fb = ex.feature_vector(&b).unwrap().values;
        let d = diffinv::experiments::csd(&fa, &fb).unwrap();
        assert!(d < 0.05, "{deg} degrees: {d}");
    }
}
