//! Video decoding and construction of the three index-specific views.
//!
//! Every index consumes the video differently:
//! - the semantic index reads `N` uniformly sampled frames at 224x224,
//! - the spatial index reads one full-resolution frame per second,
//! - the temporal index reads all frames resized to a short side of 270.

mod decode;
mod y4m;

pub use decode::{decode_video, DecodeOptions};

use crate::error::{Error, Result};
use image::imageops::FilterType;
use image::RgbImage;
use ndarray::{Array2, Array3};

/// Minimum side length accepted by `make_views`.
pub const MIN_FRAME_SIDE: usize = 32;

/// A decoded video: all frames in display order plus timing metadata.
#[derive(Clone)]
pub struct FrameSequence {
    frames: Vec<RgbImage>,
    fps: f64,
}

impl FrameSequence {
    /// Build a sequence, validating the type invariants (at least one frame,
    /// uniform dimensions, positive fps).
    pub fn new(frames: Vec<RgbImage>, fps: f64) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyVideo("<memory>".into()));
        }
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(Error::Decode {
                path: "<memory>".into(),
                reason: format!("invalid fps {fps}"),
            });
        }
        let dims = frames[0].dimensions();
        if frames.iter().any(|f| f.dimensions() != dims) {
            return Err(Error::Decode {
                path: "<memory>".into(),
                reason: "frames have mixed dimensions".into(),
            });
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[RgbImage] {
        &self.frames
    }

    /// Total frame count M.
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Overall duration in seconds (M / fps).
    pub fn duration_s(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    pub fn width(&self) -> usize {
        self.frames[0].width() as usize
    }

    pub fn height(&self) -> usize {
        self.frames[0].height() as usize
    }
}

/// View-construction constants. Defaults follow the reference setup:
/// 32 semantic frames at 224x224 and a temporal short side of 270.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ViewConfig {
    pub semantic_frames: usize,
    pub semantic_size: u32,
    pub temporal_short_side: u32,
}

impl Default for ViewConfig {
    fn default() -> Self {
        Self {
            semantic_frames: 32,
            semantic_size: 224,
            temporal_short_side: 270,
        }
    }
}

/// A full-resolution frame sampled for the spatial index, with its source
/// position in the decoded sequence.
#[derive(Clone)]
pub struct SpatialFrame {
    pub source_index: usize,
    pub frame: RgbImage,
}

/// The three per-video preprocessed views.
pub struct VideoViews {
    /// N frames at `semantic_size`^2, channel-first 0–1 floats.
    pub semantic: Vec<Array3<f32>>,
    /// One full-resolution frame per second of duration.
    pub spatial: Vec<SpatialFrame>,
    /// All M frames resized so the short side equals `temporal_short_side`.
    pub temporal: Vec<RgbImage>,
}

/// Uniform frame sampling: `idx_i = floor(i * m / n)`.
///
/// Deterministic, nondecreasing, covers the whole span; when `m < n`
/// indices repeat (nearest-index repetition).
pub fn sample_uniform_frames(m: usize, n: usize) -> Vec<usize> {
    assert!(m >= 1 && n >= 1);
    (0..n).map(|i| i * m / n).collect()
}

/// One frame per second: the first frame whose timestamp falls in second k,
/// for k = 0..ceil(duration). Clamped to the last frame for fractional tails.
pub fn spatial_frame_indices(m: usize, fps: f64) -> Vec<usize> {
    let duration = m as f64 / fps;
    let seconds = duration.ceil().max(1.0) as usize;
    (0..seconds)
        .map(|k| ((k as f64 * fps).ceil() as usize).min(m - 1))
        .collect()
}

/// Resize preserving aspect ratio so the short side equals `short`.
fn resize_short_side(frame: &RgbImage, short: u32) -> RgbImage {
    let (w, h) = frame.dimensions();
    if w.min(h) == short {
        return frame.clone();
    }
    let (nw, nh) = if h <= w {
        let nw = (w as f64 * short as f64 / h as f64).round() as u32;
        (nw.max(1), short)
    } else {
        let nh = (h as f64 * short as f64 / w as f64).round() as u32;
        (short, nh.max(1))
    };
    image::imageops::resize(frame, nw, nh, FilterType::CatmullRom)
}

/// Channel-first 0–1 float tensor from an RGB frame.
pub fn frame_to_float(frame: &RgbImage) -> Array3<f32> {
    let (w, h) = frame.dimensions();
    let mut out = Array3::<f32>::zeros((3, h as usize, w as usize));
    for (x, y, p) in frame.enumerate_pixels() {
        for ch in 0..3 {
            out[(ch, y as usize, x as usize)] = p.0[ch] as f32 / 255.0;
        }
    }
    out
}

/// ITU-R BT.601 luma in [0, 1].
pub fn luma_bt601(frame: &RgbImage) -> Array2<f64> {
    let (w, h) = frame.dimensions();
    let mut out = Array2::<f64>::zeros((h as usize, w as usize));
    for (x, y, p) in frame.enumerate_pixels() {
        let [r, g, b] = p.0;
        out[(y as usize, x as usize)] =
            (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64) / 255.0;
    }
    out
}

/// Build all three views. Pure: identical input bytes give identical views.
pub fn make_views(video: &FrameSequence, config: &ViewConfig) -> Result<VideoViews> {
    let (w, h) = (video.width(), video.height());
    if w < MIN_FRAME_SIDE || h < MIN_FRAME_SIDE {
        return Err(Error::FrameTooSmall {
            width: w,
            height: h,
            min: MIN_FRAME_SIDE,
        });
    }
    let m = video.frame_count();

    let semantic = sample_uniform_frames(m, config.semantic_frames)
        .into_iter()
        .map(|idx| {
            let resized = image::imageops::resize(
                &video.frames[idx],
                config.semantic_size,
                config.semantic_size,
                FilterType::CatmullRom,
            );
            frame_to_float(&resized)
        })
        .collect();

    let spatial = spatial_frame_indices(m, video.fps())
        .into_iter()
        .map(|idx| SpatialFrame {
            source_index: idx,
            frame: video.frames[idx].clone(),
        })
        .collect();

    let temporal = video
        .frames
        .iter()
        .map(|f| resize_short_side(f, config.temporal_short_side))
        .collect();

    Ok(VideoViews {
        semantic,
        spatial,
        temporal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn uniform_sampling_examples() {
        assert_eq!(sample_uniform_frames(32, 32), (0..32).collect::<Vec<_>>());
        assert_eq!(
            sample_uniform_frames(64, 32),
            (0..32).map(|i| 2 * i).collect::<Vec<_>>()
        );
        assert_eq!(sample_uniform_frames(5, 8), vec![0, 0, 1, 1, 2, 3, 3, 4]);
    }

    #[test]
    fn uniform_sampling_is_monotone() {
        for (m, n) in [(7, 13), (100, 32), (3, 3), (1, 5), (240, 32)] {
            let idx = sample_uniform_frames(m, n);
            assert_eq!(idx.len(), n);
            assert!(idx.windows(2).all(|w| w[0] <= w[1]));
            assert!(*idx.last().unwrap() < m);
        }
    }

    #[test]
    fn spatial_indices_first_frame_of_each_second() {
        assert_eq!(
            spatial_frame_indices(240, 30.0),
            vec![0, 30, 60, 90, 120, 150, 180, 210]
        );
        assert_eq!(spatial_frame_indices(5, 5.0), vec![0]);
        // fractional tail: 8.2 s at 30 fps
        assert_eq!(spatial_frame_indices(246, 30.0).len(), 9);
    }

    #[test]
    fn duration_metadata() {
        let seq = synth::synthetic_video(64, 48, 240, 30.0, 7);
        assert_eq!(seq.frame_count(), 240);
        assert!((seq.duration_s() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn views_shapes_and_constants() {
        let seq = synth::synthetic_video(96, 64, 50, 10.0, 3);
        let cfg = ViewConfig {
            semantic_frames: 8,
            semantic_size: 48,
            temporal_short_side: 40,
        };
        let views = make_views(&seq, &cfg).unwrap();
        assert_eq!(views.semantic.len(), 8);
        assert_eq!(views.semantic[0].dim(), (3, 48, 48));
        assert_eq!(views.spatial.len(), 5);
        assert_eq!(views.spatial[0].frame.dimensions(), (96, 64));
        assert_eq!(views.temporal.len(), 50);
        // short side 40, aspect 96:64 = 3:2 -> 60x40
        assert_eq!(views.temporal[0].dimensions(), (60, 40));
    }

    #[test]
    fn temporal_view_identity_when_short_side_matches() {
        let seq = synth::synthetic_video(40, 40, 3, 10.0, 1);
        let cfg = ViewConfig {
            semantic_frames: 2,
            semantic_size: 32,
            temporal_short_side: 40,
        };
        let views = make_views(&seq, &cfg).unwrap();
        assert_eq!(views.temporal[0], seq.frames()[0]);
    }

    #[test]
    fn temporal_view_preserves_aspect_ratio() {
        for (w, h) in [(1920u32, 1080u32), (711, 540), (302, 543)] {
            let frame = RgbImage::from_fn(w, h, |x, y| image::Rgb([(x % 256) as u8, (y % 256) as u8, 0]));
            let resized = resize_short_side(&frame, 270);
            assert_eq!(resized.width().min(resized.height()), 270);
            let orig = w as f64 / h as f64;
            let new = resized.width() as f64 / resized.height() as f64;
            assert!(
                (new - orig).abs() / orig <= 1.0 / 270.0,
                "aspect drift too large for {w}x{h}"
            );
        }
    }

    #[test]
    fn make_views_is_deterministic() {
        let seq = synth::synthetic_video(64, 48, 10, 10.0, 11);
        let cfg = ViewConfig {
            semantic_frames: 4,
            semantic_size: 32,
            temporal_short_side: 36,
        };
        let a = make_views(&seq, &cfg).unwrap();
        let b = make_views(&seq, &cfg).unwrap();
        assert_eq!(a.semantic[0], b.semantic[0]);
        assert_eq!(a.temporal[3], b.temporal[3]);
    }

    #[test]
    fn short_clip_padding_rule() {
        let seq = synth::synthetic_video(48, 48, 5, 5.0, 2);
        let views = make_views(
            &seq,
            &ViewConfig {
                semantic_frames: 32,
                semantic_size: 32,
                temporal_short_side: 40,
            },
        )
        .unwrap();
        assert_eq!(views.semantic.len(), 32);
        assert_eq!(views.spatial.len(), 1);
    }

    #[test]
    fn tiny_frames_rejected() {
        let seq = synth::synthetic_video(16, 16, 2, 10.0, 1);
        let err = make_views(&seq, &ViewConfig::default()).unwrap_err();
        assert!(matches!(err, Error::FrameTooSmall { .. }));
    }
}
