//! Temporal naturalness: simulated neural responses per frame (a divisively
//! normalized bandpass "LGN" domain and a Gabor-energy "V1" domain), the
//! curvature of the response trajectory over three-frame video-lets, and the
//! Gaussian-normalized rescaling into Q_T.

use crate::error::{Error, Result};
use crate::fusion::NormStats;
use crate::math::{self, filter};
use crate::media::luma_bt601;
use image::RgbImage;
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use rustfft::num_complex::Complex;

/// Epsilon floor applied to mean curvatures before the log.
pub const CURVATURE_FLOOR: f64 = 1e-8;

/// Divisive-normalization stabilizer for the LGN response.
const LGN_STABILIZER: f64 = 0.1;

/// Gabor bank layout: 4 orientations x 2 wavelengths.
pub const V1_ORIENTATIONS: [f64; 4] = [0.0, 45.0, 90.0, 135.0];
pub const V1_WAVELENGTHS: [f64; 2] = [4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseDomain {
    Lgn,
    V1,
}

/// Per-frame response vectors in one perceptual domain.
pub struct PerceptualTrajectory {
    pub domain: ResponseDomain,
    pub responses: Vec<Array1<f64>>,
}

impl PerceptualTrajectory {
    /// Mean curvature over the M-2 interior video-lets.
    pub fn mean_curvature(&self) -> Result<f64> {
        if self.responses.len() < 3 {
            return Err(Error::InsufficientFrames {
                required: 3,
                actual: self.responses.len(),
            });
        }
        let mut total = 0.0;
        for w in self.responses.windows(3) {
            total += trajectory_curvature(&w[0], &w[1], &w[2]);
        }
        Ok(total / (self.responses.len() - 2) as f64)
    }
}

/// LGN-like response: difference-of-Gaussians bandpass (center sigma 1,
/// surround sigma 2) divided by the local response energy plus a stabilizer.
/// Input is 0–1 luminance; a constant frame maps to the zero vector.
pub fn lgn_response_plane(luma: &Array2<f64>) -> Array1<f64> {
    let center = filter::gaussian_filter(luma, 1.0);
    let surround = filter::gaussian_filter(luma, 2.0);
    let dog = &center - &surround;
    let local_energy = filter::gaussian_filter(&(&dog * &dog), 2.0).mapv(|v| v.max(0.0).sqrt());
    let out = ndarray::Zip::from(&dog)
        .and(&local_energy)
        .map_collect(|&d, &e| d / (e + LGN_STABILIZER));
    Array1::from_iter(out.into_iter())
}

/// Convenience wrapper over an RGB frame.
pub fn lgn_response(frame: &RgbImage) -> Array1<f64> {
    lgn_response_plane(&luma_bt601(frame))
}

fn gabor_kernel(wavelength: f64, orientation_deg: f64) -> Array2<Complex<f64>> {
    let sigma = 0.56 * wavelength;
    let radius = (3.0 * sigma).ceil() as isize;
    let size = (2 * radius + 1) as usize;
    let theta = orientation_deg.to_radians();
    let (ct, st) = (theta.cos(), theta.sin());
    let mut k = Array2::<Complex<f64>>::default((size, size));
    for r in 0..size {
        for c in 0..size {
            let y = (r as isize - radius) as f64;
            let x = (c as isize - radius) as f64;
            let xr = x * ct + y * st;
            let yr = -x * st + y * ct;
            let env = (-(xr * xr + yr * yr) / (2.0 * sigma * sigma)).exp();
            let phase = 2.0 * std::f64::consts::PI * xr / wavelength;
            k[(r, c)] = Complex::new(env * phase.cos(), env * phase.sin());
        }
    }
    // zero the DC of the even component so flat regions produce no energy
    let dc = k.iter().map(|v| v.re).sum::<f64>() / (size * size) as f64;
    let gauss_sum: f64 = k
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let r = i / size;
            let c = i % size;
            let y = (r as isize - radius) as f64;
            let x = (c as isize - radius) as f64;
            let xr = x * ct + y * st;
            let yr = -x * st + y * ct;
            (-(xr * xr + yr * yr) / (2.0 * sigma * sigma)).exp()
        })
        .sum();
    let correction = dc * (size * size) as f64 / gauss_sum;
    for r in 0..size {
        for c in 0..size {
            let y = (r as isize - radius) as f64;
            let x = (c as isize - radius) as f64;
            let xr = x * ct + y * st;
            let yr = -x * st + y * ct;
            let env = (-(xr * xr + yr * yr) / (2.0 * sigma * sigma)).exp();
            k[(r, c)].re -= correction * env;
        }
    }
    // unit L2 norm per kernel keeps the channels comparable
    let norm = k.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    k.mapv_inplace(|v| v / norm);
    k
}

/// Precomputed Gabor bank for a fixed frame size.
pub struct V1Bank {
    bank: filter::FftFilterBank,
    plane_len: usize,
}

impl V1Bank {
    pub fn new(height: usize, width: usize) -> Self {
        let kernels: Vec<Array2<Complex<f64>>> = V1_WAVELENGTHS
            .iter()
            .flat_map(|&wl| V1_ORIENTATIONS.iter().map(move |&th| gabor_kernel(wl, th)))
            .collect();
        Self {
            bank: filter::FftFilterBank::new(height, width, &kernels),
            plane_len: height * width,
        }
    }

    /// Gabor energy (quadrature-pair magnitude) for every channel,
    /// concatenated into one flat vector.
    pub fn response_plane(&self, luma: &Array2<f64>) -> Array1<f64> {
        let responses = self.bank.apply(luma);
        let mut out = Array1::<f64>::zeros(self.plane_len * responses.len());
        for (ch, resp) in responses.iter().enumerate() {
            let base = ch * self.plane_len;
            for (i, v) in resp.iter().enumerate() {
                out[base + i] = v.norm();
            }
        }
        out
    }

    /// Per-channel energy (L2 norm of the channel block); used to probe
    /// orientation/scale selectivity.
    pub fn channel_energies(&self, luma: &Array2<f64>) -> Vec<f64> {
        let responses = self.bank.apply(luma);
        responses
            .iter()
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }
}

/// V1-like Gabor-energy response of a single frame.
pub fn v1_response(frame: &RgbImage) -> Array1<f64> {
    let luma = luma_bt601(frame);
    let (h, w) = luma.dim();
    V1Bank::new(h, w).response_plane(&luma)
}

/// Angle in [0, pi] between the two difference vectors of a three-frame
/// video-let. Zero-norm differences yield curvature 0 by convention.
pub fn trajectory_curvature(
    x_prev: &Array1<f64>,
    x_cur: &Array1<f64>,
    x_next: &Array1<f64>,
) -> f64 {
    let v1 = x_cur - x_prev;
    let v2 = x_next - x_cur;
    curvature_of_differences(&v1, &v2)
}

fn curvature_of_differences(v1: &Array1<f64>, v2: &Array1<f64>) -> f64 {
    let n1 = v1.dot(v1).sqrt();
    let n2 = v2.dot(v2).sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return 0.0;
    }
    (v1.dot(v2) / (n1 * n2)).clamp(-1.0, 1.0).acos()
}

/// Mean curvatures of both domains plus the combined raw index.
#[derive(Debug, Clone, Copy)]
pub struct TpqiBreakdown {
    pub lgn_mean_curvature: f64,
    pub v1_mean_curvature: f64,
    pub raw: f64,
}

fn combine(lgn_mean: f64, v1_mean: f64) -> f64 {
    0.5 * v1_mean.max(CURVATURE_FLOOR).ln() + 0.5 * lgn_mean.max(CURVATURE_FLOOR).ln()
}

/// Raw temporal naturalness of a temporal view (all frames, short side 270):
/// half the log of the mean V1 curvature plus half the log of the mean LGN
/// curvature, with an epsilon floor inside each log.
pub fn tpqi_raw(temporal_view: &[RgbImage]) -> Result<f64> {
    Ok(tpqi_breakdown(temporal_view)?.raw)
}

/// Same as [`tpqi_raw`] but exposing the per-domain mean curvatures.
///
/// Responses are computed in parallel chunks while the curvature reduction
/// runs sequentially, so memory stays bounded by the chunk size rather than
/// the clip length.
pub fn tpqi_breakdown(temporal_view: &[RgbImage]) -> Result<TpqiBreakdown> {
    let m = temporal_view.len();
    if m < 3 {
        return Err(Error::InsufficientFrames {
            required: 3,
            actual: m,
        });
    }
    let (w, h) = temporal_view[0].dimensions();
    let bank = V1Bank::new(h as usize, w as usize);

    let mut lgn_sum = 0.0;
    let mut v1_sum = 0.0;
    let mut prev: Option<(Array1<f64>, Array1<f64>)> = None; // x_{j-1}
    let mut prev_diff: Option<(Array1<f64>, Array1<f64>)> = None; // x_{j-1} - x_{j-2}

    const CHUNK: usize = 16;
    for chunk in temporal_view.chunks(CHUNK) {
        let responses: Vec<(Array1<f64>, Array1<f64>)> = chunk
            .par_iter()
            .map(|frame| {
                let luma = luma_bt601(frame);
                (lgn_response_plane(&luma), bank.response_plane(&luma))
            })
            .collect();
        for (lgn, v1) in responses {
            if let Some((prev_lgn, prev_v1)) = prev.take() {
                let d_lgn = &lgn - &prev_lgn;
                let d_v1 = &v1 - &prev_v1;
                if let Some((pd_lgn, pd_v1)) = prev_diff.take() {
                    lgn_sum += curvature_of_differences(&pd_lgn, &d_lgn);
                    v1_sum += curvature_of_differences(&pd_v1, &d_v1);
                }
                prev_diff = Some((d_lgn, d_v1));
            }
            prev = Some((lgn, v1));
        }
    }
    let count = (m - 2) as f64;
    let lgn_mean = lgn_sum / count;
    let v1_mean = v1_sum / count;
    Ok(TpqiBreakdown {
        lgn_mean_curvature: lgn_mean,
        v1_mean_curvature: v1_mean,
        raw: combine(lgn_mean, v1_mean),
    })
}

/// Q_T: Gaussian normalization and sigmoid rescaling of the raw score.
pub fn temporal_naturalness(raw: f64, stats: &NormStats) -> Result<f64> {
    if stats.std <= 0.0 {
        return Err(Error::Degenerate(format!(
            "normalization std must be positive for `{}`",
            stats.index_name
        )));
    }
    Ok(math::sigmoid(-(raw - stats.mean) / stats.std))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::StatsSource;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn constant_frame_has_zero_responses() {
        let frame = RgbImage::from_pixel(48, 40, image::Rgb([120, 120, 120]));
        let lgn = lgn_response(&frame);
        assert!(lgn.iter().all(|v| v.abs() < 1e-9), "lgn not zero");
        let v1 = v1_response(&frame);
        assert!(v1.iter().all(|v| v.abs() < 1e-7), "v1 not zero");
    }

    #[test]
    fn identical_frames_identical_responses() {
        let frame = crate::synth::natural_image(48, 40, 3);
        assert_eq!(lgn_response(&frame), lgn_response(&frame));
    }

    #[test]
    fn vertical_grating_drives_expected_channel() {
        // wavelength-4 vertical grating: luminance varies along x
        let luma = Array2::from_shape_fn((64, 64), |(_, c)| {
            0.5 + 0.5 * (2.0 * std::f64::consts::PI * c as f64 / 4.0).sin()
        });
        let bank = V1Bank::new(64, 64);
        let energies = bank.channel_energies(&luma);
        // channel order: wavelengths x orientations; 0 deg / wavelength 4 first
        let target = energies[0];
        for (i, e) in energies.iter().enumerate().skip(1) {
            assert!(
                target >= 2.0 * e,
                "channel {i} energy {e} too close to target {target}"
            );
        }
    }

    #[test]
    fn curvature_closed_forms() {
        let a = array![0.0, 0.0];
        let b = array![1.0, 0.0];
        let c = array![2.0, 0.0];
        assert_relative_eq!(trajectory_curvature(&a, &b, &c), 0.0, epsilon = 1e-9);

        let c_orth = array![1.0, 1.0];
        assert_relative_eq!(
            trajectory_curvature(&a, &b, &c_orth),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-9
        );

        // reversal: x_next == x_prev
        assert_relative_eq!(
            trajectory_curvature(&a, &b, &a),
            std::f64::consts::PI,
            epsilon = 1e-9
        );

        // degenerate: no motion
        assert_relative_eq!(trajectory_curvature(&a, &a, &b), 0.0);
    }

    #[test]
    fn curvature_is_scale_and_rotation_invariant() {
        let a = array![0.1, 0.4, -0.2];
        let b = array![0.5, 0.1, 0.3];
        let c = array![-0.2, 0.6, 0.9];
        let base = trajectory_curvature(&a, &b, &c);
        for scale in [0.25, 3.0, 1e4] {
            let got = trajectory_curvature(&(&a * scale), &(&b * scale), &(&c * scale));
            assert_relative_eq!(got, base, epsilon = 1e-9);
        }
        // orthogonal transform: permutation + sign flip
        let t = |v: &Array1<f64>| array![-v[2], v[0], v[1]];
        assert_relative_eq!(
            trajectory_curvature(&t(&a), &t(&b), &t(&c)),
            base,
            epsilon = 1e-12
        );
    }

    #[test]
    fn static_video_hits_the_floor() {
        let frame = crate::synth::natural_image(48, 40, 9);
        let frames = vec![frame; 5];
        let raw = tpqi_raw(&frames).unwrap();
        assert_relative_eq!(raw, CURVATURE_FLOOR.ln(), epsilon = 1e-9);
        assert_relative_eq!(raw, -18.420_680_743_952_367, epsilon = 1e-9);
    }

    #[test]
    fn unit_mean_curvature_gives_zero_raw() {
        assert_relative_eq!(combine(1.0, 1.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn too_few_frames_error() {
        let frame = crate::synth::natural_image(48, 40, 1);
        assert!(matches!(
            tpqi_raw(&[frame.clone(), frame]),
            Err(Error::InsufficientFrames { .. })
        ));
    }

    #[test]
    fn jittery_clip_curves_more_than_smooth_pan() {
        let smooth = crate::synth::synthetic_video(64, 48, 12, 10.0, 21);
        let shaky = crate::synth::synthetic_video_jittered(64, 48, 12, 10.0, 21, 4.0);
        let raw_smooth = tpqi_raw(smooth.frames()).unwrap();
        let raw_shaky = tpqi_raw(shaky.frames()).unwrap();
        assert!(
            raw_shaky > raw_smooth,
            "shaky {raw_shaky} <= smooth {raw_smooth}"
        );
    }

    #[test]
    fn temporal_naturalness_closed_forms() {
        let stats = NormStats::new("tpqi", -2.0, 0.5, StatsSource::EvaluationSet);
        assert_relative_eq!(temporal_naturalness(-2.0, &stats).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            temporal_naturalness(-1.5, &stats).unwrap(),
            1.0 / (1.0 + std::f64::consts::E),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            temporal_naturalness(-3.0, &stats).unwrap(),
            1.0 / (1.0 + (-2.0f64).exp()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn trajectory_type_matches_streaming_path() {
        let clip = crate::synth::synthetic_video(48, 40, 6, 10.0, 4);
        let lumas: Vec<Array2<f64>> = clip.frames().iter().map(luma_bt601).collect();
        let traj = PerceptualTrajectory {
            domain: ResponseDomain::Lgn,
            responses: lumas.iter().map(lgn_response_plane).collect(),
        };
        let lgn_mean = traj.mean_curvature().unwrap();
        let breakdown = tpqi_breakdown(clip.frames()).unwrap();
        assert_relative_eq!(lgn_mean, breakdown.lgn_mean_curvature, epsilon = 1e-9);
    }
}
