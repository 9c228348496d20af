//! Seeded image augmentation: crops, blur, noise, affine warps, contrast and
//! brightness, applied in a random order per replicate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::pixel::{file_stem, list_images, load_image, save_png, RasterImage};
use crate::rng::{keyed_stream, StreamRng};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AugmentStep {
    Crop,
    Blur,
    Noise,
    Affine,
    Contrast,
    Brightness,
}

impl AugmentStep {
    pub const ALL: [AugmentStep; 6] = [
        AugmentStep::Crop,
        AugmentStep::Blur,
        AugmentStep::Noise,
        AugmentStep::Affine,
        AugmentStep::Contrast,
        AugmentStep::Brightness,
    ];
}

impl fmt::Display for AugmentStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AugmentStep::Crop => "crop",
            AugmentStep::Blur => "blur",
            AugmentStep::Noise => "noise",
            AugmentStep::Affine => "affine",
            AugmentStep::Contrast => "contrast",
            AugmentStep::Brightness => "brightness",
        })
    }
}

impl FromStr for AugmentStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AugmentStep::ALL
            .into_iter()
            .find(|step| step.to_string() == s)
            .ok_or_else(|| Error::InvalidOption(format!("unknown augmentation step `{s}`")))
    }
}

/// Closed interval a parameter is drawn from uniformly.
pub type Interval = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationPlan {
    pub per_image: usize,
    pub seed: u64,
    pub steps: Vec<AugmentStep>,
    /// Fraction of each side kept by the crop.
    pub crop_keep: Interval,
    pub blur_sigma: Interval,
    pub noise_sigma: Interval,
    pub rotation_deg: Interval,
    pub shear_deg: Interval,
    /// Translation as a fraction of the width (x) or height (y).
    pub translation: Interval,
    pub scale: Interval,
    pub contrast: Interval,
    pub brightness: Interval,
}

impl AugmentationPlan {
    pub fn new(per_image: usize, seed: u64) -> Self {
        AugmentationPlan {
            per_image,
            seed,
            steps: AugmentStep::ALL.to_vec(),
            crop_keep: (0.9, 1.0),
            blur_sigma: (0.0, 2.0),
            noise_sigma: (0.0, 0.05),
            rotation_deg: (-15.0, 15.0),
            shear_deg: (-10.0, 10.0),
            translation: (-0.1, 0.1),
            scale: (0.9, 1.1),
            contrast: (0.8, 1.2),
            brightness: (-0.1, 0.1),
        }
    }

    /// Every step enabled but every range collapsed onto its no-op value.
    pub fn identity(seed: u64) -> Self {
        AugmentationPlan {
            crop_keep: (1.0, 1.0),
            blur_sigma: (0.0, 0.0),
            noise_sigma: (0.0, 0.0),
            rotation_deg: (0.0, 0.0),
            shear_deg: (0.0, 0.0),
            translation: (0.0, 0.0),
            scale: (1.0, 1.0),
            contrast: (1.0, 1.0),
            brightness: (0.0, 0.0),
            ..Self::new(1, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_image == 0 {
            return Err(Error::InvalidOption("per_image must be at least 1".into()));
        }
        let unique: BTreeSet<_> = self.steps.iter().collect();
        if unique.len() != self.steps.len() {
            return Err(Error::InvalidOption("augmentation steps must not repeat".into()));
        }
        let checks: [(&str, Interval, f64, f64); 9] = [
            ("crop_keep", self.crop_keep, f64::MIN_POSITIVE, 1.0),
            ("blur_sigma", self.blur_sigma, 0.0, 10.0),
            ("noise_sigma", self.noise_sigma, 0.0, 1.0),
            ("rotation_deg", self.rotation_deg, -180.0, 180.0),
            ("shear_deg", self.shear_deg, -45.0, 45.0),
            ("translation", self.translation, -1.0, 1.0),
            ("scale", self.scale, 0.1, 10.0),
            ("contrast", self.contrast, 0.0, 10.0),
            ("brightness", self.brightness, -1.0, 1.0),
        ];
        for (name, (lo, hi), min, max) in checks {
            if !(lo <= hi && lo >= min && hi <= max) {
                return Err(Error::InvalidOption(format!(
                    "{name} range [{lo}, {hi}] must be ordered and within [{min}, {max}]"
                )));
            }
        }
        Ok(())
    }
}

/// Parameters drawn for one step of one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepParams {
    Crop {
        keep_w: f64,
        keep_h: f64,
        x: f64,
        y: f64,
    },
    Blur {
        sigma: f64,
    },
    Noise {
        sigma: f64,
    },
    Affine {
        rotation_deg: f64,
        shear_deg: f64,
        tx: f64,
        ty: f64,
        scale: f64,
    },
    Contrast {
        factor: f64,
    },
    Brightness {
        delta: f64,
    },
}

impl fmt::Display for StepParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StepParams::Crop { keep_w, keep_h, x, y } => {
                write!(f, "crop(keep_w={keep_w:.6} keep_h={keep_h:.6} x={x:.6} y={y:.6})")
            }
            StepParams::Blur { sigma } => write!(f, "blur(sigma={sigma:.6})"),
            StepParams::Noise { sigma } => write!(f, "noise(sigma={sigma:.6})"),
            StepParams::Affine {
                rotation_deg,
                shear_deg,
                tx,
                ty,
                scale,
            } => write!(
                f,
                "affine(rotation={rotation_deg:.6} shear={shear_deg:.6} tx={tx:.6} ty={ty:.6} scale={scale:.6})"
            ),
            StepParams::Contrast { factor } => write!(f, "contrast(factor={factor:.6})"),
            StepParams::Brightness { delta } => write!(f, "brightness(delta={delta:.6})"),
        }
    }
}

fn draw(rng: &mut StreamRng, (lo, hi): Interval) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn sample_params(step: AugmentStep, plan: &AugmentationPlan, rng: &mut StreamRng) -> StepParams {
    match step {
        AugmentStep::Crop => StepParams::Crop {
            keep_w: draw(rng, plan.crop_keep),
            keep_h: draw(rng, plan.crop_keep),
            x: rng.random(),
            y: rng.random(),
        },
        AugmentStep::Blur => StepParams::Blur {
            sigma: draw(rng, plan.blur_sigma),
        },
        AugmentStep::Noise => StepParams::Noise {
            sigma: draw(rng, plan.noise_sigma),
        },
        AugmentStep::Affine => StepParams::Affine {
            rotation_deg: draw(rng, plan.rotation_deg),
            shear_deg: draw(rng, plan.shear_deg),
            tx: draw(rng, plan.translation),
            ty: draw(rng, plan.translation),
            scale: draw(rng, plan.scale),
        },
        AugmentStep::Contrast => StepParams::Contrast {
            factor: draw(rng, plan.contrast),
        },
        AugmentStep::Brightness => StepParams::Brightness {
            delta: draw(rng, plan.brightness),
        },
    }
}

/// Bilinear lookup with edge replication outside the image.
fn bilinear<T: Scalar>(img: &RasterImage<T>, x: f64, y: f64, c: usize) -> T {
    let (w, h) = (img.width(), img.height());
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (T::lit(x - x0 as f64), T::lit(y - y0 as f64));
    let one = T::one();
    let top = img.get(x0, y0, c) * (one - fx) + img.get(x1, y0, c) * fx;
    let bottom = img.get(x0, y1, c) * (one - fx) + img.get(x1, y1, c) * fx;
    top * (one - fy) + bottom * fy
}

/// Resamples the image, output pixel (x, y) reading source position `map(x, y)`.
fn warp<T: Scalar>(img: &RasterImage<T>, map: impl Fn(f64, f64) -> (f64, f64)) -> RasterImage<T> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut data = Vec::with_capacity(w * h * ch);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = map(x as f64, y as f64);
            for c in 0..ch {
                data.push(bilinear(img, sx, sy, c));
            }
        }
    }
    img.with_data(data)
}

fn gaussian_blur<T: Scalar>(img: &RasterImage<T>, sigma: f64) -> RasterImage<T> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    let kernel: Vec<T> = raw.iter().map(|v| T::lit(v / total)).collect();
    let (w, h, ch) = (img.width() as isize, img.height() as isize, img.channels());

    let pass = |src: &[T], horizontal: bool| -> Vec<T> {
        let mut out = vec![T::zero(); src.len()];
        for y in 0..h {
            for x in 0..w {
                for c in 0..ch {
                    let mut acc = T::zero();
                    for (k, &kv) in kernel.iter().enumerate() {
                        let off = k as isize - radius;
                        let (sx, sy) = if horizontal {
                            ((x + off).clamp(0, w - 1), y)
                        } else {
                            (x, (y + off).clamp(0, h - 1))
                        };
                        acc = acc + kv * src[((sy * w + sx) as usize) * ch + c];
                    }
                    out[((y * w + x) as usize) * ch + c] = acc;
                }
            }
        }
        out
    };
    let horizontal = pass(img.data(), true);
    img.with_data(pass(&horizontal, false))
}

/// Applies one step. Parameters at their no-op values return the image
/// unchanged, so a collapsed plan reproduces its input exactly.
pub fn apply_step<T: Scalar>(img: &RasterImage<T>, params: &StepParams, rng: &mut StreamRng) -> RasterImage<T> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    match *params {
        StepParams::Crop { keep_w, keep_h, x, y } => {
            if keep_w == 1.0 && keep_h == 1.0 {
                return img.clone();
            }
            let (cw, chh) = (keep_w * w, keep_h * h);
            let (ox, oy) = (x * (w - cw), y * (h - chh));
            warp(img, |px, py| {
                (ox + (px + 0.5) * cw / w - 0.5, oy + (py + 0.5) * chh / h - 0.5)
            })
        }
        StepParams::Blur { sigma } => {
            if sigma <= 0.0 {
                return img.clone();
            }
            gaussian_blur(img, sigma)
        }
        StepParams::Noise { sigma } => {
            if sigma <= 0.0 {
                return img.clone();
            }
            let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
            let data = img.data().iter().map(|&v| v + T::lit(normal.sample(rng))).collect();
            img.with_data(data)
        }
        StepParams::Affine {
            rotation_deg,
            shear_deg,
            tx,
            ty,
            scale,
        } => {
            if rotation_deg == 0.0 && shear_deg == 0.0 && tx == 0.0 && ty == 0.0 && scale == 1.0 {
                return img.clone();
            }
            // forward map about the centre: p' = c + t + scale·R(θ)·Shear(φ)·(p − c)
            let (sin, cos) = rotation_deg.to_radians().sin_cos();
            let shear = shear_deg.to_radians().tan();
            let (cx, cy) = ((w - 1.0) / 2.0, (h - 1.0) / 2.0);
            let (tx, ty) = (tx * w, ty * h);
            warp(img, |px, py| {
                let (dx, dy) = ((px - cx - tx) / scale, (py - cy - ty) / scale);
                // undo the rotation, then the shear
                let (rx, ry) = (cos * dx + sin * dy, -sin * dx + cos * dy);
                (cx + rx - shear * ry, cy + ry)
            })
        }
        StepParams::Contrast { factor } => {
            if factor == 1.0 {
                return img.clone();
            }
            let ch = img.channels();
            let pixels = T::from_usize(img.width() * img.height()).unwrap();
            let means: Vec<T> = (0..ch)
                .map(|c| img.data().iter().skip(c).step_by(ch).copied().sum::<T>() / pixels)
                .collect();
            let f = T::lit(factor);
            let data = img
                .data()
                .iter()
                .enumerate()
                .map(|(i, &v)| means[i % ch] + f * (v - means[i % ch]))
                .collect();
            img.with_data(data)
        }
        StepParams::Brightness { delta } => {
            if delta == 0.0 {
                return img.clone();
            }
            let d = T::lit(delta);
            img.with_data(img.data().iter().map(|&v| v + d).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub sample_id: String,
    pub group_id: String,
    pub step_order: Vec<AugmentStep>,
    pub params: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AugmentationManifest {
    pub rows: Vec<ManifestRow>,
}

impl AugmentationManifest {
    /// sample id → group id.
    pub fn groups(&self) -> BTreeMap<String, String> {
        self.rows
            .iter()
            .map(|r| (r.sample_id.clone(), r.group_id.clone()))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let wrap = |e: csv::Error| Error::io(path, e.into());
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        w.write_record(["sample_id", "group_id", "step_order", "params"])
            .map_err(wrap)?;
        for r in &self.rows {
            let order: Vec<String> = r.step_order.iter().map(|s| s.to_string()).collect();
            w.write_record([&r.sample_id, &r.group_id, &order.join("|"), &r.params])
                .map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
        let mut rows = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::MalformedCsv {
                line,
                message: e.to_string(),
            })?;
            if record.len() != 4 {
                return Err(Error::MalformedCsv {
                    line,
                    message: format!("expected 4 fields, found {}", record.len()),
                });
            }
            let step_order = if record[2].is_empty() {
                Vec::new()
            } else {
                record[2]
                    .split('|')
                    .map(AugmentStep::from_str)
                    .collect::<Result<_>>()
                    .map_err(|e| Error::MalformedCsv {
                        line,
                        message: e.to_string(),
                    })?
            };
            if !seen.insert(record[0].to_string()) {
                return Err(Error::DuplicateLabel(record[0].to_string()));
            }
            rows.push(ManifestRow {
                sample_id: record[0].to_string(),
                group_id: record[1].to_string(),
                step_order,
                params: record[3].to_string(),
            });
        }
        Ok(AugmentationManifest { rows })
    }
}

/// Draws the step order and parameters of one replicate and applies them.
pub fn augment_image<T: Scalar>(
    img: &RasterImage<T>,
    label: &str,
    replicate: usize,
    plan: &AugmentationPlan,
) -> (RasterImage<T>, Vec<AugmentStep>, Vec<StepParams>) {
    let mut rng = keyed_stream(plan.seed, label, replicate as u64);
    let mut order = plan.steps.clone();
    order.shuffle(&mut rng);
    let params: Vec<StepParams> = order.iter().map(|&s| sample_params(s, plan, &mut rng)).collect();
    let mut out = img.clone();
    for p in &params {
        out = apply_step(&out, p, &mut rng);
    }
    (out, order, params)
}

/// File name of replicate `j` of the image labelled `label`.
pub fn augmented_name(label: &str, replicate: usize) -> String {
    format!("{label}_aug{replicate:04}.png")
}

/// Writes `plan.per_image` augmented PNGs per source image into `out`, plus
/// `manifest.csv`. Output does not depend on thread scheduling.
pub fn augment_dataset(images: &Path, plan: &AugmentationPlan, out: &Path) -> Result<AugmentationManifest> {
    plan.validate()?;
    let paths = list_images(images)?;
    let labels: Vec<String> = paths.iter().map(|p| file_stem(p)).collect();
    crate::data::check_unique(&labels)?;
    let sources: Vec<RasterImage<f32>> = paths.par_iter().map(|p| load_image(p)).collect::<Result<_>>()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let jobs: Vec<(usize, usize)> = (0..paths.len())
        .flat_map(|i| (0..plan.per_image).map(move |j| (i, j)))
        .collect();
    let rows: Vec<ManifestRow> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (img, order, params) = augment_image(&sources[i], &labels[i], j, plan);
            let name = augmented_name(&labels[i], j);
            save_png(&img, &out.join(&name))?;
            let params: Vec<String> = params.iter().map(|p| p.to_string()).collect();
            Ok(ManifestRow {
                sample_id: name.trim_end_matches(".png").to_string(),
                group_id: labels[i].clone(),
                step_order: order,
                params: params.join(" "),
            })
        })
        .collect::<Result<_>>()?;
    let manifest = AugmentationManifest { rows };
    manifest.write_csv(&out.join("manifest.csv"))?;
    Ok(manifest)
}
