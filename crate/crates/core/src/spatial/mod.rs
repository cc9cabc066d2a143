//! Spatial naturalness: a from-scratch natural-scene-statistics score
//! (NIQE-style MVG distance to a pristine model) on the 1 fps spatial view,
//! rescaled into Q_S.

use crate::error::{Error, Result};
use crate::fusion::NormStats;
use crate::math::{self, eigen, filter};
use crate::media::{luma_bt601, VideoViews};
use ndarray::{Array1, Array2};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

/// Feature dimension: 18 per scale, two scales.
pub const FEATURE_DIM: usize = 36;

/// MSCN stabilizer on the 0–255 intensity scale.
const MSCN_C: f64 = 1.0;

/// Multivariate-Gaussian model of pristine patch features.
#[derive(Debug, Clone)]
pub struct PristineModel {
    pub mean: Array1<f64>,
    pub covariance: Array2<f64>,
    pub patch_size: usize,
    pub sharpness_threshold: f64,
}

/// Raw per-frame scores for one video's spatial view.
#[derive(Debug, Clone)]
pub struct NiqeRawScores {
    pub scores: Vec<f64>,
    pub source_indices: Vec<usize>,
}

/// Mean-subtracted contrast-normalized coefficients plus the local-deviation
/// field used for patch sharpness. Input is 0–255 luminance.
pub fn compute_mscn(img: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let taps = filter::gaussian_taps(7.0 / 6.0, 3);
    let mu = filter::sep_filter2d(img, &taps, &taps);
    let sq = img * img;
    let mu_sq = filter::sep_filter2d(&sq, &taps, &taps);
    let sigma = (&mu_sq - &(&mu * &mu)).mapv(|v| v.max(0.0).sqrt());
    let mscn = ndarray::Zip::from(img)
        .and(&mu)
        .and(&sigma)
        .map_collect(|&x, &m, &s| (x - m) / (s + MSCN_C));
    (mscn, sigma)
}

/// Asymmetric generalized Gaussian fit (moment matching).
#[derive(Debug, Clone, Copy)]
pub struct AggdFit {
    pub alpha: f64,
    pub sigma_left: f64,
    pub sigma_right: f64,
}

impl AggdFit {
    /// Mean parameter of the fitted AGGD.
    pub fn mean_param(&self) -> f64 {
        (self.sigma_right - self.sigma_left) * math::gamma(2.0 / self.alpha)
            / math::gamma(1.0 / self.alpha)
    }
}

const ALPHA_GRID_START: f64 = 0.2;
const ALPHA_GRID_STEP: f64 = 0.001;
const ALPHA_GRID_LEN: usize = 9801; // 0.2 ..= 10.0

fn alpha_ratio_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..ALPHA_GRID_LEN)
            .map(|i| {
                let a = ALPHA_GRID_START + i as f64 * ALPHA_GRID_STEP;
                let g2 = math::gamma(2.0 / a);
                g2 * g2 / (math::gamma(1.0 / a) * math::gamma(3.0 / a))
            })
            .collect()
    })
}

/// Fit the AGGD shape and left/right scale to a sample set.
pub fn fit_aggd(samples: &[f64]) -> Result<AggdFit> {
    if samples.len() < 2 {
        return Err(Error::Degenerate("AGGD fit needs at least 2 samples".into()));
    }
    let mut left_sq = 0.0;
    let mut left_n = 0usize;
    let mut right_sq = 0.0;
    let mut right_n = 0usize;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for &x in samples {
        if x < 0.0 {
            left_sq += x * x;
            left_n += 1;
        } else if x > 0.0 {
            right_sq += x * x;
            right_n += 1;
        }
        abs_sum += x.abs();
        sq_sum += x * x;
    }
    if left_n == 0 || right_n == 0 || sq_sum == 0.0 {
        return Err(Error::Degenerate(
            "AGGD fit needs mass on both sides of zero".into(),
        ));
    }
    let n = samples.len() as f64;
    let left_std = (left_sq / left_n as f64).sqrt();
    let right_std = (right_sq / right_n as f64).sqrt();
    if left_std == 0.0 || right_std == 0.0 {
        return Err(Error::Degenerate("AGGD fit: zero one-sided deviation".into()));
    }
    let gamma_hat = left_std / right_std;
    let r_hat = (abs_sum / n).powi(2) / (sq_sum / n);
    let r_hat_norm = r_hat * (gamma_hat.powi(3) + 1.0) * (gamma_hat + 1.0)
        / (gamma_hat * gamma_hat + 1.0).powi(2);

    let table = alpha_ratio_table();
    let mut best = 0usize;
    let mut best_err = f64::INFINITY;
    for (i, r) in table.iter().enumerate() {
        let err = (r - r_hat_norm) * (r - r_hat_norm);
        if err < best_err {
            best_err = err;
            best = i;
        }
    }
    let alpha = ALPHA_GRID_START + best as f64 * ALPHA_GRID_STEP;
    let conv = (math::gamma(1.0 / alpha) / math::gamma(3.0 / alpha)).sqrt();
    Ok(AggdFit {
        alpha,
        sigma_left: left_std * conv,
        sigma_right: right_std * conv,
    })
}

/// Shifted pairwise products of MSCN coefficients: H, V, D1, D2.
fn paired_products(mscn: &Array2<f64>) -> [Array2<f64>; 4] {
    let (h, w) = mscn.dim();
    let shifts: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];
    shifts.map(|(dy, dx)| {
        Array2::from_shape_fn((h, w), |(r, c)| {
            let rr = r as isize + dy;
            let cc = c as isize + dx;
            if rr >= 0 && rr < h as isize && cc >= 0 && cc < w as isize {
                mscn[(r, c)] * mscn[(rr as usize, cc as usize)]
            } else {
                0.0
            }
        })
    })
}

/// The 18 NSS features of one coefficient block: AGGD fit of the MSCN
/// coefficients (shape, mean scale) plus four fits of the paired products
/// (shape, mean parameter, left scale, right scale).
fn block_features(mscn_block: &Array2<f64>, products: &[Array2<f64>; 4]) -> Result<Vec<f64>> {
    let mut feats = Vec::with_capacity(18);
    let coeffs: Vec<f64> = mscn_block.iter().copied().collect();
    let fit = fit_aggd(&coeffs)?;
    feats.push(fit.alpha);
    feats.push((fit.sigma_left.powi(2) + fit.sigma_right.powi(2)) / 2.0);
    for prod in products {
        let vals: Vec<f64> = prod.iter().copied().collect();
        let fit = fit_aggd(&vals)?;
        feats.push(fit.alpha);
        feats.push(fit.mean_param());
        feats.push(fit.sigma_left);
        feats.push(fit.sigma_right);
    }
    Ok(feats)
}

/// 2x2 box average downsampling.
fn downsample_by2(img: &Array2<f64>) -> Array2<f64> {
    let (h, w) = img.dim();
    let (nh, nw) = (h / 2, w / 2);
    Array2::from_shape_fn((nh, nw), |(r, c)| {
        (img[(2 * r, 2 * c)]
            + img[(2 * r + 1, 2 * c)]
            + img[(2 * r, 2 * c + 1)]
            + img[(2 * r + 1, 2 * c + 1)])
            / 4.0
    })
}

struct PatchFeatures {
    features: Vec<Vec<f64>>, // per selected patch, 36-d
}

/// Per-patch 36-d features of an image, restricted to sharp patches.
fn image_patch_features(
    luma255: &Array2<f64>,
    patch_size: usize,
    sharpness_threshold: f64,
) -> Result<PatchFeatures> {
    let (h, w) = luma255.dim();
    if h < patch_size || w < patch_size {
        return Err(Error::FrameTooSmall {
            width: w,
            height: h,
            min: patch_size,
        });
    }
    let rows = h / patch_size;
    let cols = w / patch_size;
    let cropped = luma255.slice(ndarray::s![..rows * patch_size, ..cols * patch_size]);
    let cropped = cropped.to_owned();

    let (mscn1, sigma1) = compute_mscn(&cropped);
    let prod1 = paired_products(&mscn1);
    let half = downsample_by2(&cropped);
    let (mscn2, _) = compute_mscn(&half);
    let prod2 = paired_products(&mscn2);

    // patch sharpness: mean local deviation within the patch
    let mut sharpness = vec![0.0f64; rows * cols];
    for pr in 0..rows {
        for pc in 0..cols {
            let block = sigma1.slice(ndarray::s![
                pr * patch_size..(pr + 1) * patch_size,
                pc * patch_size..(pc + 1) * patch_size
            ]);
            sharpness[pr * cols + pc] = block.mean().unwrap_or(0.0);
        }
    }
    let peak = sharpness.iter().cloned().fold(f64::MIN, f64::max);
    let mut selected: Vec<usize> = (0..rows * cols)
        .filter(|&i| sharpness[i] > sharpness_threshold * peak)
        .collect();
    if selected.is_empty() {
        log::warn!("no patch passed the sharpness threshold; falling back to all patches");
        selected = (0..rows * cols).collect();
    }

    let ps2 = patch_size / 2;
    let mut features = Vec::new();
    for idx in selected {
        let (pr, pc) = (idx / cols, idx % cols);
        let b1 = mscn1
            .slice(ndarray::s![
                pr * patch_size..(pr + 1) * patch_size,
                pc * patch_size..(pc + 1) * patch_size
            ])
            .to_owned();
        let p1: [Array2<f64>; 4] = std::array::from_fn(|k| {
            prod1[k]
                .slice(ndarray::s![
                    pr * patch_size..(pr + 1) * patch_size,
                    pc * patch_size..(pc + 1) * patch_size
                ])
                .to_owned()
        });
        let b2 = mscn2
            .slice(ndarray::s![pr * ps2..(pr + 1) * ps2, pc * ps2..(pc + 1) * ps2])
            .to_owned();
        let p2: [Array2<f64>; 4] = std::array::from_fn(|k| {
            prod2[k]
                .slice(ndarray::s![pr * ps2..(pr + 1) * ps2, pc * ps2..(pc + 1) * ps2])
                .to_owned()
        });
        let (f1, f2) = match (block_features(&b1, &p1), block_features(&b2, &p2)) {
            (Ok(f1), Ok(f2)) => (f1, f2),
            _ => continue, // degenerate (flat) patch: skip
        };
        let mut f = f1;
        f.extend(f2);
        features.push(f);
    }
    if features.is_empty() {
        return Err(Error::Degenerate(
            "no patch produced a valid NSS feature vector".into(),
        ));
    }
    Ok(PatchFeatures { features })
}

fn sample_mean_cov(features: &[Vec<f64>]) -> (Array1<f64>, Array2<f64>) {
    let n = features.len();
    let d = FEATURE_DIM;
    let mut mean = Array1::<f64>::zeros(d);
    for f in features {
        for (i, v) in f.iter().enumerate() {
            mean[i] += v;
        }
    }
    mean.mapv_inplace(|v| v / n as f64);
    let mut cov = Array2::<f64>::zeros((d, d));
    for f in features {
        for i in 0..d {
            let di = f[i] - mean[i];
            for j in i..d {
                cov[(i, j)] += di * (f[j] - mean[j]);
            }
        }
    }
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    for i in 0..d {
        for j in i..d {
            cov[(i, j)] /= denom;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    (mean, cov)
}

/// NIQE-style raw score of one frame: MVG distance between the frame's
/// patch-feature distribution and the pristine model.
pub fn niqe_frame(frame: &image::RgbImage, model: &PristineModel) -> Result<f64> {
    let luma = luma_bt601(frame).mapv(|v| v * 255.0);
    niqe_luma(&luma, model)
}

/// Same as [`niqe_frame`] on a prepared 0–255 luminance plane.
pub fn niqe_luma(luma255: &Array2<f64>, model: &PristineModel) -> Result<f64> {
    let patches = image_patch_features(luma255, model.patch_size, model.sharpness_threshold)?;
    let (mean, cov) = sample_mean_cov(&patches.features);
    let pooled = (&model.covariance + &cov) / 2.0;
    let inv = eigen::pinv_psd(&pooled, 1e-10);
    let diff = &model.mean - &mean;
    let dist_sq = diff.dot(&inv.dot(&diff));
    Ok(dist_sq.max(0.0).sqrt())
}

/// Fit a pristine model from a corpus of images.
pub fn fit_pristine_model(
    images: impl IntoIterator<Item = Array2<f64>>,
    patch_size: usize,
    sharpness_threshold: f64,
) -> Result<PristineModel> {
    let mut all = Vec::new();
    for luma255 in images {
        match image_patch_features(&luma255, patch_size, sharpness_threshold) {
            Ok(p) => all.extend(p.features),
            Err(Error::FrameTooSmall { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if all.len() < FEATURE_DIM + 1 {
        return Err(Error::Degenerate(format!(
            "pristine fit needs more than {} patch samples, got {}",
            FEATURE_DIM,
            all.len()
        )));
    }
    let (mean, covariance) = sample_mean_cov(&all);
    Ok(PristineModel {
        mean,
        covariance,
        patch_size,
        sharpness_threshold,
    })
}

/// Raw scores for every frame of the spatial view.
pub fn niqe_video(views: &VideoViews, model: &PristineModel) -> Result<NiqeRawScores> {
    let mut scores = Vec::with_capacity(views.spatial.len());
    let mut source_indices = Vec::with_capacity(views.spatial.len());
    for sf in &views.spatial {
        scores.push(niqe_frame(&sf.frame, model)?);
        source_indices.push(sf.source_index);
    }
    Ok(NiqeRawScores {
        scores,
        source_indices,
    })
}

/// Q_S: per-frame Gaussian normalization + negative sigmoid rescaling,
/// averaged over the 1 fps frames. Decreasing in every raw score.
pub fn spatial_naturalness(raw: &NiqeRawScores, stats: &NormStats) -> Result<f64> {
    if stats.std <= 0.0 {
        return Err(Error::Degenerate(format!(
            "normalization std must be positive for `{}`",
            stats.index_name
        )));
    }
    let n: Vec<f64> = raw
        .scores
        .iter()
        .map(|&q| math::sigmoid(-(q - stats.mean) / stats.std))
        .collect();
    Ok(math::mean(&n))
}

/// Plain-text pristine model layout: header comment, patch size, threshold,
/// 36 mean values, then 36 covariance rows.
pub fn save_pristine_model(model: &PristineModel, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# bvqi pristine model v1")?;
    writeln!(f, "patch_size {}", model.patch_size)?;
    writeln!(f, "sharpness_threshold {}", model.sharpness_threshold)?;
    let fmt = |row: &[f64]| {
        row.iter()
            .map(|v| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(f, "mean {}", fmt(model.mean.as_slice().unwrap()))?;
    for r in 0..FEATURE_DIM {
        writeln!(f, "cov {}", fmt(model.covariance.row(r).as_slice().unwrap()))?;
    }
    Ok(())
}

pub fn load_pristine_model(path: &Path) -> Result<PristineModel> {
    let file = std::fs::File::open(path)?;
    let mut patch_size = None;
    let mut threshold = None;
    let mut mean = None;
    let mut cov_rows: Vec<Vec<f64>> = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(' ').ok_or_else(|| {
            Error::Config(format!("malformed pristine model line: {line}"))
        })?;
        let parse_row = |s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad float `{t}` in pristine model")))
                })
                .collect()
        };
        match key {
            "patch_size" => patch_size = rest.trim().parse::<usize>().ok(),
            "sharpness_threshold" => threshold = rest.trim().parse::<f64>().ok(),
            "mean" => mean = Some(parse_row(rest)?),
            "cov" => cov_rows.push(parse_row(rest)?),
            _ => {}
        }
    }
    let mean = mean.ok_or_else(|| Error::Config("pristine model missing mean".into()))?;
    if mean.len() != FEATURE_DIM || cov_rows.len() != FEATURE_DIM {
        return Err(Error::Config("pristine model has wrong dimensions".into()));
    }
    let mut covariance = Array2::<f64>::zeros((FEATURE_DIM, FEATURE_DIM));
    for (r, row) in cov_rows.iter().enumerate() {
        if row.len() != FEATURE_DIM {
            return Err(Error::Config("pristine covariance row has wrong length".into()));
        }
        for (c, v) in row.iter().enumerate() {
            covariance[(r, c)] = *v;
        }
    }
    Ok(PristineModel {
        mean: Array1::from(mean),
        covariance,
        patch_size: patch_size.ok_or_else(|| Error::Config("missing patch_size".into()))?,
        sharpness_threshold: threshold
            .ok_or_else(|| Error::Config("missing sharpness_threshold".into()))?,
    })
}

/// Fit a pristine model from procedurally generated natural images.
/// Deterministic for a fixed seed; used when no pristine corpus is at hand.
pub fn synthetic_pristine_model(patch_size: usize, image_count: usize, seed: u64) -> PristineModel {
    let images = (0..image_count).map(move |i| {
        let img = crate::synth::natural_image(
            (patch_size * 4) as u32,
            (patch_size * 3) as u32,
            seed.wrapping_add(i as u64),
        );
        luma_bt601(&img).mapv(|v| v * 255.0)
    });
    fit_pristine_model(images, patch_size, 0.75).expect("synthetic corpus is non-degenerate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn mscn_of_constant_image_is_zero() {
        let img = Array2::from_elem((32, 32), 128.0);
        let (mscn, _) = compute_mscn(&img);
        for v in mscn.iter() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn mscn_of_white_noise_has_unit_scale() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let normal = Normal::new(128.0, 40.0).unwrap();
        let img = Array2::from_shape_fn((128, 128), |_| {
            normal.sample(&mut rng).clamp(0.0, 255.0)
        });
        let (mscn, _) = compute_mscn(&img);
        let vals: Vec<f64> = mscn.iter().copied().collect();
        let std = crate::math::std_pop(&vals);
        assert!((std - 1.0).abs() < 0.1, "std {std}");
    }

    #[test]
    fn mscn_of_checkerboard_is_symmetric() {
        let img = Array2::from_shape_fn((64, 64), |(r, c)| if (r + c) % 2 == 0 { 200.0 } else { 55.0 });
        let (mscn, _) = compute_mscn(&img);
        let vals: Vec<f64> = mscn.iter().copied().collect();
        let m = crate::math::mean(&vals);
        let s = crate::math::std_pop(&vals);
        let skew = vals.iter().map(|v| ((v - m) / s).powi(3)).sum::<f64>() / vals.len() as f64;
        assert!(skew.abs() < 0.05, "skew {skew}");
    }

    #[test]
    fn aggd_recovers_gaussian_and_laplacian() {
        for seed in [1u64, 2, 3] {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, 1.0).unwrap();
            let gauss: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();
            let fit = fit_aggd(&gauss).unwrap();
            assert!((fit.alpha - 2.0).abs() < 0.1, "gaussian alpha {}", fit.alpha);
            assert!(
                (fit.sigma_left / fit.sigma_right - 1.0).abs() < 0.05,
                "asymmetry {} vs {}",
                fit.sigma_left,
                fit.sigma_right
            );

            // Laplacian via inverse CDF
            let lap: Vec<f64> = (0..100_000)
                .map(|_| {
                    let u: f64 = rand::Rng::gen_range(&mut rng, -0.5..0.5);
                    -u.signum() * (1.0 - 2.0 * u.abs()).ln()
                })
                .collect();
            let fit = fit_aggd(&lap).unwrap();
            assert!((fit.alpha - 1.0).abs() < 0.1, "laplacian alpha {}", fit.alpha);
        }
    }

    #[test]
    fn aggd_rejects_constant_samples() {
        assert!(fit_aggd(&[1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(fit_aggd(&[0.5]).is_err());
    }

    #[test]
    fn niqe_zero_for_model_matching_distribution() {
        // score is 0 when the frame's features equal the pristine mean;
        // approximate by scoring one of the corpus images against a model
        // fitted to that image alone
        let img = crate::synth::natural_image(256, 192, 9);
        let luma = luma_bt601(&img).mapv(|v| v * 255.0);
        let model = fit_pristine_model([luma.clone()], 64, 0.75).unwrap();
        // same image, same patches: mean feature identical, distance 0
        let score = niqe_luma(&luma, &model).unwrap();
        assert!(score < 1e-6, "self-score {score}");
    }

    #[test]
    fn niqe_increases_with_noise() {
        let model = synthetic_pristine_model(48, 12, 77);
        let img = crate::synth::natural_image(192, 144, 123);
        let mut wins = 0;
        let trials = 50;
        for seed in 0..trials {
            let noisy = crate::synth::add_gaussian_noise(&img, 25.0, seed);
            let clean_score = niqe_frame(&img, &model).unwrap();
            let noisy_score = niqe_frame(&noisy, &model).unwrap();
            if noisy_score > clean_score {
                wins += 1;
            }
        }
        assert!(wins * 10 >= trials * 9, "noisy larger in {wins}/{trials}");
    }

    #[test]
    fn spatial_naturalness_closed_forms() {
        let stats = NormStats::new("niqe", 10.0, 2.0, crate::fusion::StatsSource::EvaluationSet);
        let raw = NiqeRawScores {
            scores: vec![10.0],
            source_indices: vec![0],
        };
        assert_relative_eq!(
            spatial_naturalness(&raw, &stats).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        let raw = NiqeRawScores {
            scores: vec![12.0],
            source_indices: vec![0],
        };
        assert_relative_eq!(
            spatial_naturalness(&raw, &stats).unwrap(),
            1.0 / (1.0 + std::f64::consts::E),
            epsilon = 1e-12
        );
        let raw = NiqeRawScores {
            scores: vec![8.0, 8.0, 8.0],
            source_indices: vec![0, 1, 2],
        };
        assert_relative_eq!(
            spatial_naturalness(&raw, &stats).unwrap(),
            1.0 / (1.0 + (-1.0f64).exp()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_std_is_degenerate() {
        let stats = NormStats::new("niqe", 1.0, 0.0, crate::fusion::StatsSource::EvaluationSet);
        let raw = NiqeRawScores {
            scores: vec![1.0],
            source_indices: vec![0],
        };
        assert!(spatial_naturalness(&raw, &stats).is_err());
    }

    #[test]
    fn pristine_model_file_roundtrip() {
        let model = synthetic_pristine_model(48, 8, 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pristine.txt");
        save_pristine_model(&model, &path).unwrap();
        let loaded = load_pristine_model(&path).unwrap();
        assert_eq!(loaded.patch_size, model.patch_size);
        for i in 0..FEATURE_DIM {
            assert_relative_eq!(loaded.mean[i], model.mean[i], max_relative = 1e-12);
        }
        assert_relative_eq!(
            loaded.covariance[(3, 7)],
            model.covariance[(3, 7)],
            max_relative = 1e-12
        );
    }
}
