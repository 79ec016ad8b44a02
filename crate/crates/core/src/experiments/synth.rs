use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numeric::{reflect_index, smooth_noise, Image, Pgm, PgmFormat};

pub const BASE_SIZE: usize = 512;
pub const BASE_TEXTURE_SIGMA: f64 = 3.0;
pub const PATCH_SIZE: usize = 65;
pub const GRID: usize = 8;
pub const SPACING: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Rotation,
    IntensityAffine,
    Translation,
    Scaling,
    Shear,
    GaussianNoise,
    PowerLaw,
}

impl Transform {
    pub const ALL: [Transform; 7] = [
        Transform::Rotation,
        Transform::IntensityAffine,
        Transform::Translation,
        Transform::Scaling,
        Transform::Shear,
        Transform::GaussianNoise,
        Transform::PowerLaw,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ranges {
    pub translation: (f64, f64),
    pub scale: (f64, f64),
    pub shear: (f64, f64),
    /// Standard deviation on intensities normalized to [0, 1].
    pub noise_sigma: (f64, f64),
    pub power: (f64, f64),
    pub intensity_gain: (f64, f64),
    pub intensity_offset: (f64, f64),
}

impl Default for Ranges {
    fn default() -> Self {
        Ranges {
            translation: (-10.0, 10.0),
            scale: (0.5, 1.5),
            shear: (0.0, 0.3),
            noise_sigma: (0.001, 0.005),
            power: (0.5, 2.0),
            intensity_gain: (0.5, 2.0),
            intensity_offset: (-0.5, 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Mirror the base image at its edges.
    #[default]
    Reflect,
    /// Fail when a warped patch needs pixels outside the base image.
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthDbSpec {
    pub instances: usize,
    pub transforms: Vec<Transform>,
    pub ranges: Ranges,
    pub seed: u64,
    pub boundary: Boundary,
    /// Draw rotations from the four quarter turns only, so no resampling happens.
    pub quarter_turns: bool,
    /// Number of grid cells per side used as classes (at most 8).
    pub grid: usize,
}

impl SynthDbSpec {
    pub fn new(transforms: &[Transform], instances: usize, seed: u64) -> Self {
        let mut t = transforms.to_vec();
        t.sort();
        t.dedup();
        SynthDbSpec {
            instances,
            transforms: t,
            ranges: Ranges::default(),
            seed,
            boundary: Boundary::Reflect,
            quarter_turns: false,
            grid: GRID,
        }
    }

    /// The eight standard transform combinations, numbered 1..=8.
    pub fn preset(n: usize, instances: usize, seed: u64) -> Result<Self> {
        use Transform::*;
        let t: &[Transform] = match n {
            1 => &[Rotation, IntensityAffine],
            2 => &[Rotation, IntensityAffine, Translation],
            3 => &[Rotation, IntensityAffine, Translation, Scaling],
            4 => &[Rotation, IntensityAffine, Translation, Shear],
            5 => &[Rotation, IntensityAffine, Translation, GaussianNoise],
            6 => &[Rotation, IntensityAffine, PowerLaw],
            7 => &[Rotation, IntensityAffine, Scaling, Shear, GaussianNoise, PowerLaw],
            8 => &Transform::ALL,
            _ => return Err(Error::Database(format!("no preset database {n}; expected 1..=8"))),
        };
        Ok(SynthDbSpec::new(t, instances, seed))
    }

    pub fn has(&self, t: Transform) -> bool {
        self.transforms.contains(&t)
    }

    pub fn classes(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for k1 in 1..=self.grid {
            for k2 in 1..=self.grid {
                v.push((k1, k2));
            }
        }
        v
    }
}

/// Parameters actually applied to one patch; disabled transforms hold identity values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchParams {
    /// Radians.
    pub rotation: f64,
    pub gain: f64,
    pub offset: f64,
    pub tx: f64,
    pub ty: f64,
    pub scale: f64,
    pub mx: f64,
    pub my: f64,
    pub noise_sigma: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchRecord {
    pub k1: usize,
    pub k2: usize,
    pub instance: usize,
    pub params: PatchParams,
    pub patch: Image,
}

#[derive(Debug, Clone)]
pub struct PatchDatabase {
    pub spec: SynthDbSpec,
    /// Class-major, instances ascending.
    pub records: Vec<PatchRecord>,
}

impl PatchDatabase {
    pub fn class_count(&self) -> usize {
        self.spec.grid * self.spec.grid
    }

    /// Dense class index in (k1, k2) lexicographic order.
    pub fn class_index(&self, k1: usize, k2: usize) -> usize {
        (k1 - 1) * self.spec.grid + (k2 - 1)
    }

    pub fn record(&self, class: usize, instance: usize) -> &PatchRecord {
        &self.records[class * self.spec.instances + instance - 1]
    }
}

/// Patch centre in 0-based pixel coordinates (the 1-based formula 64(k-1)+33).
pub fn grid_center(k: usize) -> usize {
    SPACING * (k - 1) + 32
}

pub fn default_base_image(seed: u64) -> Result<Image> {
    smooth_noise(BASE_SIZE, BASE_SIZE, BASE_TEXTURE_SIGMA, seed)
}

/// ChaCha8 stream keyed by sha256(seed, k1, k2, instance).
pub fn patch_rng(seed: u64, k1: usize, k2: usize, instance: usize) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((k1 as u64).to_le_bytes());
    h.update((k2 as u64).to_le_bytes());
    h.update((instance as u64).to_le_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Every parameter is drawn in a fixed order whether or not its transform is enabled,
/// so enabling one transform never perturbs the draws of another.
pub fn draw_params(spec: &SynthDbSpec, rng: &mut ChaCha8Rng) -> PatchParams {
    let r = &spec.ranges;
    let angle = uniform(rng, (0.0, 2.0 * PI));
    let quarter = rng.random_range(0..4u32);
    let gain = uniform(rng, r.intensity_gain);
    let offset = uniform(rng, r.intensity_offset);
    let tx = uniform(rng, r.translation);
    let ty = uniform(rng, r.translation);
    let scale = uniform(rng, r.scale);
    let mx = uniform(rng, r.shear);
    let my = uniform(rng, r.shear);
    let noise_sigma = uniform(rng, r.noise_sigma);
    let power = uniform(rng, r.power);
    let on = |t| spec.has(t);
    PatchParams {
        rotation: match (on(Transform::Rotation), spec.quarter_turns) {
            (false, _) => 0.0,
            (true, false) => angle,
            (true, true) => quarter as f64 * FRAC_PI_2,
        },
        gain: if on(Transform::IntensityAffine) { gain } else { 1.0 },
        offset: if on(Transform::IntensityAffine) { offset } else { 0.0 },
        tx: if on(Transform::Translation) { tx } else { 0.0 },
        ty: if on(Transform::Translation) { ty } else { 0.0 },
        scale: if on(Transform::Scaling) { scale } else { 1.0 },
        mx: if on(Transform::Shear) { mx } else { 0.0 },
        my: if on(Transform::Shear) { my } else { 0.0 },
        noise_sigma: if on(Transform::GaussianNoise) { noise_sigma } else { 0.0 },
        power: if on(Transform::PowerLaw) { power } else { 1.0 },
    }
}

/// Exact cosine and sine for multiples of a quarter turn.
fn cos_sin(angle: f64) -> (f64, f64) {
    let k = angle / FRAC_PI_2;
    if (k - k.round()).abs() < 1e-12 {
        match (k.round() as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        (angle.cos(), angle.sin())
    }
}

/// Linear part of the output-to-base map: scale * S * R^-1 with R = [[c, s], [-s, c]]
/// and S = [[1, mx], [my, 1]].
pub fn inverse_warp(p: &PatchParams) -> [[f64; 2]; 2] {
    let (c, s) = cos_sin(p.rotation);
    let rinv = [[c, -s], [s, c]];
    let sh = [[1.0, p.mx], [p.my, 1.0]];
    let mut m = [[0.0; 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = p.scale * (sh[i][0] * rinv[0][j] + sh[i][1] * rinv[1][j]);
        }
    }
    m
}

fn bilinear(base: &Image, x: f64, y: f64, boundary: Boundary) -> Option<f64> {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (xi, yi) = (x0 as isize, y0 as isize);
    let (w, h) = (base.width() as isize, base.height() as isize);
    let need_x1 = fx != 0.0;
    let need_y1 = fy != 0.0;
    if boundary == Boundary::Reject {
        let x_hi = if need_x1 { xi + 1 } else { xi };
        let y_hi = if need_y1 { yi + 1 } else { yi };
        if xi < 0 || yi < 0 || x_hi >= w || y_hi >= h {
            return None;
        }
    }
    let at = |xx: isize, yy: isize| base.get(reflect_index(xx, base.width()), reflect_index(yy, base.height()));
    let top = if need_x1 { at(xi, yi) * (1.0 - fx) + at(xi + 1, yi) * fx } else { at(xi, yi) };
    if !need_y1 {
        return Some(top);
    }
    let bottom = if need_x1 { at(xi, yi + 1) * (1.0 - fx) + at(xi + 1, yi + 1) * fx } else { at(xi, yi + 1) };
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Render one patch: geometric warp, then noise, power law and intensity affine.
pub fn render_patch(
    base: &Image,
    spec: &SynthDbSpec,
    k1: usize,
    k2: usize,
    instance: usize,
) -> Result<(PatchParams, Image)> {
    let mut rng = patch_rng(spec.seed, k1, k2, instance);
    let p = draw_params(spec, &mut rng);
    let m = inverse_warp(&p);
    let (cx, cy) = (grid_center(k1) as f64 + p.tx, grid_center(k2) as f64 + p.ty);
    let r = (PATCH_SIZE / 2) as f64;
    let mut out = Image::zeros(PATCH_SIZE, PATCH_SIZE);
    for v in 0..PATCH_SIZE {
        for u in 0..PATCH_SIZE {
            let (du, dv) = (u as f64 - r, v as f64 - r);
            let bx = cx + m[0][0] * du + m[0][1] * dv;
            let by = cy + m[1][0] * du + m[1][1] * dv;
            let s = bilinear(base, bx, by, spec.boundary).ok_or_else(|| Error::Patch {
                k1,
                k2,
                inst: instance,
                msg: format!("warp reaches ({bx:.2},{by:.2}) outside the base image"),
            })?;
            out.set(u, v, s);
        }
    }
    if p.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, p.noise_sigma).map_err(|e| Error::Database(e.to_string()))?;
        for s in out.data_mut() {
            *s += normal.sample(&mut rng);
        }
    }
    let out = out.map(|s| {
        let s = if p.power != 1.0 { s.max(0.0).powf(p.power) } else { s };
        p.gain * s + p.offset
    });
    Ok((p, out))
}

pub fn build_synth_db(spec: &SynthDbSpec, base: &Image) -> Result<PatchDatabase> {
    if spec.grid == 0 || spec.grid > GRID {
        return Err(Error::Database(format!("grid must be in 1..={GRID}")));
    }
    if spec.instances == 0 {
        return Err(Error::Database("at least one instance per class".into()));
    }
    // the outermost patches overhang a 512 image by one pixel; boundary mode decides
    let reach = grid_center(spec.grid);
    if base.width() <= reach || base.height() <= reach {
        return Err(Error::Database(format!(
            "base image {}x{} too small for a {}x{} grid",
            base.width(),
            base.height(),
            spec.grid,
            spec.grid
        )));
    }
    let jobs: Vec<(usize, usize, usize)> = spec
        .classes()
        .into_iter()
        .flat_map(|(k1, k2)| (1..=spec.instances).map(move |i| (k1, k2, i)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(k1, k2, instance)| {
            render_patch(base, spec, k1, k2, instance).map(|(params, patch)| PatchRecord {
                k1,
                k2,
                instance,
                params,
                patch,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PatchDatabase { spec: spec.clone(), records })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DbMeta {
    pub spec: SynthDbSpec,
    pub base: String,
    pub patch_size: usize,
    pub noise_convention: String,
    pub storage: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoredPatch {
    pub instance: usize,
    pub params: PatchParams,
    /// Intensity mapped to 0 and 65535 in the PGM.
    pub lo: f64,
    pub hi: f64,
}

fn class_dir(k1: usize, k2: usize) -> String {
    format!("c{k1}_{k2}")
}

/// Layout: meta.json, c<k1>_<k2>/i<instance>.pgm (16-bit) and c<k1>_<k2>/params.json.
pub fn write_db(db: &PatchDatabase, dir: &Path, base_desc: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let meta = DbMeta {
        spec: db.spec.clone(),
        base: base_desc.to_string(),
        patch_size: PATCH_SIZE,
        noise_convention: "gaussian noise sigma applies to base intensities normalized to [0,1]".into(),
        storage: "16-bit binary PGM, linear between per-patch lo and hi".into(),
    };
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    for chunk in db.records.chunks(db.spec.instances) {
        let (k1, k2) = (chunk[0].k1, chunk[0].k2);
        let cdir = dir.join(class_dir(k1, k2));
        std::fs::create_dir_all(&cdir)?;
        let mut stored = Vec::new();
        for rec in chunk {
            let (lo, hi) = rec.patch.min_max();
            Pgm::quantize(&rec.patch, lo, hi, u16::MAX)
                .write(&cdir.join(format!("i{}.pgm", rec.instance)), PgmFormat::Binary)?;
            stored.push(StoredPatch { instance: rec.instance, params: rec.params, lo, hi });
        }
        std::fs::write(cdir.join("params.json"), serde_json::to_string_pretty(&stored)? + "\n")?;
    }
    Ok(())
}

pub fn load_db(dir: &Path) -> Result<PatchDatabase> {
    let meta_text = std::fs::read_to_string(dir.join("meta.json"))
        .map_err(|e| Error::Database(format!("{}: {e}", dir.join("meta.json").display())))?;
    let meta: DbMeta = serde_json::from_str(&meta_text)?;
    let spec = meta.spec;
    let mut records = Vec::new();
    for (k1, k2) in spec.classes() {
        let cdir = dir.join(class_dir(k1, k2));
        let params_text = std::fs::read_to_string(cdir.join("params.json"))
            .map_err(|e| Error::Database(format!("{}: {e}", cdir.join("params.json").display())))?;
        let stored: Vec<StoredPatch> = serde_json::from_str(&params_text)?;
        if stored.len() != spec.instances {
            return Err(Error::Database(format!("class {k1}_{k2}: {} patches, expected {}", stored.len(), spec.instances)));
        }
        for (n, s) in stored.iter().enumerate() {
            if s.instance != n + 1 {
                return Err(Error::Database(format!("class {k1}_{k2}: instance {} out of order", s.instance)));
            }
            let pgm = Pgm::read(&cdir.join(format!("i{}.pgm", s.instance)))?;
            if pgm.width != PATCH_SIZE || pgm.height != PATCH_SIZE {
                return Err(Error::Patch { k1, k2, inst: s.instance, msg: "wrong patch size".into() });
            }
            records.push(PatchRecord { k1, k2, instance: s.instance, params: s.params, patch: pgm.dequantize(s.lo, s.hi) });
        }
    }
    Ok(PatchDatabase { spec, records })
}
