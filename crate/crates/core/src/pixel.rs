//! Image loading and k×k block aggregation into pixel feature vectors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{DynamicImage, ExtendedColorType, ImageFormat};
use rayon::prelude::*;

use crate::data::FeatureMatrix;
use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

/// Decoded image, row-major with interleaved channels, values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage<T> {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> RasterImage<T> {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ShapeMismatch("image dimensions must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::ShapeMismatch(format!("{channels} channels (expected 1 or 3)")));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch {
                expected: width * height * channels,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(Error::NonFinite {
                context: "pixel value outside [0, 1]",
            });
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every value set to `value`.
    pub fn filled(width: usize, height: usize, channels: usize, value: T) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Replaces the pixel data, clamping every value into [0, 1].
    pub(crate) fn with_data(&self, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        RasterImage {
            data: data.into_iter().map(|v| v.max(T::zero()).min(T::one())).collect(),
            ..*self
        }
    }
}

impl<T> RasterImage<T> {
    fn shape_of(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }
}

fn format_of(path: &Path) -> Result<ImageFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(ImageFormat::Png),
        "jpg" | "jpeg" => Ok(ImageFormat::Jpeg),
        _ => Err(Error::UnsupportedFormat(path.to_path_buf())),
    }
}

/// Decodes a PNG or JPEG. Grayscale stays single-channel, anything with
/// colour becomes RGB; alpha is dropped.
pub fn load_image<T: Scalar>(path: &Path) -> Result<RasterImage<T>> {
    let format = format_of(path)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = image::load_from_memory_with_format(&bytes, format).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(from_dynamic(&decoded))
}

fn from_dynamic<T: Scalar>(img: &DynamicImage) -> RasterImage<T> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let color = img.color();
    let wide = color.bytes_per_pixel() / color.channel_count() > 1;
    // integer samples divided in T, so 8-bit values load as exactly v/255
    let (channels, raw, full): (usize, Vec<u16>, f64) = match (color.has_color(), wide) {
        (true, true) => (3, img.to_rgb16().into_raw(), 65535.0),
        (false, true) => (1, img.to_luma16().into_raw(), 65535.0),
        (true, false) => (3, img.to_rgb8().into_raw().into_iter().map(u16::from).collect(), 255.0),
        (false, false) => (1, img.to_luma8().into_raw().into_iter().map(u16::from).collect(), 255.0),
    };
    let full = T::lit(full);
    let data = raw.into_iter().map(|v| T::from_u16(v).unwrap() / full).collect();
    RasterImage {
        width: w,
        height: h,
        channels,
        data,
    }
}

/// Writes an 8-bit PNG, rounding each value to the nearest of 256 levels.
pub fn save_png<T: Scalar>(image: &RasterImage<T>, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = image
        .data
        .iter()
        .map(|v| (v.to_f64_lossy().clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let color = if image.channels == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    };
    image::save_buffer_with_format(
        path,
        &bytes,
        image.width as u32,
        image.height as u32,
        color,
        ImageFormat::Png,
    )
    .map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregator {
    Min,
    Mean,
    Median,
    Max,
}

impl Aggregator {
    pub const ALL: [Aggregator; 4] = [Aggregator::Min, Aggregator::Mean, Aggregator::Median, Aggregator::Max];

    fn apply<T: Scalar>(self, values: &mut [T]) -> T {
        match self {
            Aggregator::Min => values.iter().copied().fold(T::infinity(), T::min),
            Aggregator::Max => values.iter().copied().fold(T::neg_infinity(), T::max),
            Aggregator::Mean => values.iter().copied().sum::<T>() / T::from_usize(values.len()).unwrap(),
            Aggregator::Median => {
                values.sort_by(|a, b| a.partial_cmp(b).expect("pixel values are finite"));
                let n = values.len();
                if n % 2 == 1 {
                    values[n / 2]
                } else {
                    (values[n / 2 - 1] + values[n / 2]) / T::lit(2.0)
                }
            }
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::Min => "min",
            Aggregator::Mean => "mean",
            Aggregator::Median => "median",
            Aggregator::Max => "max",
        })
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Aggregator::Min),
            "mean" => Ok(Aggregator::Mean),
            "median" => Ok(Aggregator::Median),
            "max" => Ok(Aggregator::Max),
            other => Err(Error::InvalidOption(format!("unknown aggregator `{other}`"))),
        }
    }
}

/// Length of the feature vector produced by [`block_downscale`].
pub fn downscaled_len(width: usize, height: usize, channels: usize, block: usize) -> usize {
    channels * width.div_ceil(block) * height.div_ceil(block)
}

/// Aggregates every `block`×`block` cell into one value per channel. Cells at
/// the right and bottom edges cover only the pixels that exist. Output is
/// channel-major: all cells of channel 0 (row-major), then channel 1, ...
pub fn block_downscale<T: Scalar>(image: &RasterImage<T>, block: usize, agg: Aggregator) -> Result<Vec<T>> {
    let (w, h, ch) = image.shape_of();
    if block == 0 || block > w.max(h) {
        return Err(Error::InvalidBlockSize {
            block,
            width: w,
            height: h,
        });
    }
    let (cw, chh) = (w.div_ceil(block), h.div_ceil(block));
    let mut out = Vec::with_capacity(ch * cw * chh);
    let mut cell = Vec::with_capacity(block * block);
    for c in 0..ch {
        for by in 0..chh {
            for bx in 0..cw {
                cell.clear();
                for y in by * block..((by + 1) * block).min(h) {
                    for x in bx * block..((bx + 1) * block).min(w) {
                        cell.push(image.get(x, y, c));
                    }
                }
                out.push(agg.apply(&mut cell));
            }
        }
    }
    Ok(out)
}

/// PNG and JPEG files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && format_of(&path).is_ok() {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(Error::EmptyInput);
    }
    paths.sort();
    Ok(paths)
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Block-aggregated pixel features for every image. The sample id is the
/// file stem; the group id is looked up in `groups` when given (e.g. from an
/// augmentation manifest) and otherwise equals the sample id.
pub fn pixel_features<T: Scalar>(
    images: &[PathBuf],
    block: usize,
    agg: Aggregator,
    groups: Option<&BTreeMap<String, String>>,
) -> Result<FeatureMatrix<T>> {
    if images.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows: Vec<Vec<T>> = images
        .par_iter()
        .map(|p| load_image::<T>(p).and_then(|img| block_downscale(&img, block, agg)))
        .collect::<Result<_>>()?;
    let k = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != k) {
        return Err(Error::ShapeMismatch(format!(
            "{} gives {} features, {} gives {k}",
            images[bad].display(),
            rows[bad].len(),
            images[0].display()
        )));
    }
    let sample_ids: Vec<String> = images.iter().map(|p| file_stem(p)).collect();
    let group_ids = match groups {
        None => sample_ids.clone(),
        Some(map) => sample_ids
            .iter()
            .map(|s| {
                map.get(s)
                    .cloned()
                    .ok_or_else(|| Error::LabelMismatch(format!("sample `{s}` has no group")))
            })
            .collect::<Result<_>>()?,
    };
    FeatureMatrix::new(sample_ids, group_ids, Matrix::from_rows(&rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, data: Vec<f64>) -> RasterImage<f64> {
        RasterImage::new(w, h, 1, data).unwrap()
    }

    #[test]
    fn single_block_examples() {
        let img = gray(2, 2, vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(block_downscale(&img, 2, Aggregator::Min).unwrap(), vec![0.1]);
        assert_eq!(block_downscale(&img, 2, Aggregator::Max).unwrap(), vec![0.4]);
        let mean = block_downscale(&img, 2, Aggregator::Mean).unwrap()[0];
        assert!((mean - 0.25).abs() < 1e-15);
        let median = block_downscale(&img, 2, Aggregator::Median).unwrap()[0];
        assert!((median - 0.25).abs() < 1e-15);
    }

    #[test]
    fn feature_lengths_for_300_pixel_images() {
        let img = RasterImage::filled(300, 300, 3, 0.5f32).unwrap();
        assert_eq!(block_downscale(&img, 24, Aggregator::Mean).unwrap().len(), 507);
        assert_eq!(block_downscale(&img, 12, Aggregator::Mean).unwrap().len(), 1875);
        assert_eq!(downscaled_len(300, 300, 3, 24), 507);
    }

    #[test]
    fn unit_block_is_a_channel_major_flatten() {
        // 2×1 RGB: pixel 0 = (0, .1, .2), pixel 1 = (.3, .4, .5)
        let img = RasterImage::new(2, 1, 3, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        for agg in Aggregator::ALL {
            assert_eq!(
                block_downscale(&img, 1, agg).unwrap(),
                vec![0.0, 0.3, 0.1, 0.4, 0.2, 0.5]
            );
        }
    }

    #[test]
    fn partial_edge_blocks_use_present_pixels() {
        // 3×1, k = 2: cells {0.2, 0.4} and {1.0}
        let img = gray(3, 1, vec![0.2, 0.4, 1.0]);
        let v = block_downscale(&img, 2, Aggregator::Mean).unwrap();
        assert!((v[0] - 0.3).abs() < 1e-15);
        assert_eq!(v[1], 1.0);
    }

    #[test]
    fn invalid_block_sizes() {
        let img = gray(3, 2, vec![0.0; 6]);
        assert!(matches!(
            block_downscale(&img, 0, Aggregator::Min),
            Err(Error::InvalidBlockSize { .. })
        ));
        assert!(matches!(
            block_downscale(&img, 4, Aggregator::Min),
            Err(Error::InvalidBlockSize { .. })
        ));
        assert_eq!(block_downscale(&img, 3, Aggregator::Min).unwrap().len(), 1);
    }

    #[test]
    fn png_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let black = dir.path().join("black.png");
        image::GrayImage::new(2, 2).save(&black).unwrap();
        let img: RasterImage<f64> = load_image(&black).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (2, 2, 1));
        assert!(img.data().iter().all(|&v| v == 0.0));

        let rgb = dir.path().join("rgb.jpg");
        image::RgbImage::from_pixel(300, 300, image::Rgb([200, 10, 90]))
            .save(&rgb)
            .unwrap();
        let img: RasterImage<f32> = load_image(&rgb).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (300, 300, 3));

        let bytes = std::fs::read(&black).unwrap();
        let truncated = dir.path().join("cut.png");
        std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_image::<f64>(&truncated), Err(Error::Decode { .. })));

        assert!(matches!(
            load_image::<f64>(&dir.path().join("x.gif")),
            Err(Error::UnsupportedFormat(_))
        ));

        let levels = gray(3, 1, vec![0.0, 128.0 / 255.0, 1.0]);
        let out = dir.path().join("levels.png");
        save_png(&levels, &out).unwrap();
        assert_eq!(load_image::<f64>(&out).unwrap(), levels);
    }

    #[test]
    fn features_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        for (name, v) in [("b", 10u8), ("a", 250u8)] {
            image::GrayImage::from_pixel(4, 4, image::Luma([v]))
                .save(dir.path().join(format!("{name}.png")))
                .unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "skip me").unwrap();
        let paths = list_images(dir.path()).unwrap();
        let f: FeatureMatrix<f64> = pixel_features(&paths, 2, Aggregator::Max, None).unwrap();
        assert_eq!(f.sample_ids(), ["a", "b"]);
        assert_eq!(f.group_ids(), ["a", "b"]);
        assert_eq!(f.k(), 4);
        assert!((f.values()[(1, 0)] - 10.0 / 255.0).abs() < 1e-7);
    }

    proptest! {
        #[test]
        fn aggregates_are_bounded_and_sized(
            w in 1usize..12,
            h in 1usize..12,
            k in 1usize..12,
            seed in any::<u64>(),
        ) {
            use rand::Rng;
            prop_assume!(k <= w.max(h));
            let mut rng = crate::rng::indexed_stream(seed, 0);
            let img = gray(w, h, (0..w * h).map(|_| rng.random_range(0.0..=1.0)).collect());
            let lo = block_downscale(&img, k, Aggregator::Min).unwrap();
            let hi = block_downscale(&img, k, Aggregator::Max).unwrap();
            let mean = block_downscale(&img, k, Aggregator::Mean).unwrap();
            let median = block_downscale(&img, k, Aggregator::Median).unwrap();
            prop_assert_eq!(lo.len(), downscaled_len(w, h, 1, k));
            for i in 0..lo.len() {
                prop_assert!(lo[i] <= median[i] && median[i] <= hi[i]);
                prop_assert!(lo[i] <= mean[i] + 1e-15 && mean[i] <= hi[i] + 1e-15);
            }
            if k >= w.max(h) {
                prop_assert_eq!(lo.len(), 1);
            }
        }

        #[test]
        fn constant_images_give_constant_features(v in 0.0f64..=1.0, k in 1usize..5) {
            let img = RasterImage::filled(5, 4, 3, v).unwrap();
            for agg in Aggregator::ALL {
                let out = block_downscale(&img, k, agg).unwrap();
                prop_assert!(out.iter().all(|&x| (x - v).abs() < 1e-15));
            }
        }
    }
}
