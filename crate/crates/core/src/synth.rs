//! Procedural test media: natural-looking still images, smoothly panning
//! clips, and monotone degradation operators (noise, blur, jitter).
//!
//! Used by the test suites, the synthetic benchmark fixtures, and the
//! default pristine-corpus builder.

use crate::media::FrameSequence;
use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Multi-octave value noise in [0,1] on a `w x h` grid.
fn value_noise(w: usize, h: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0f64; w * h];
    let mut amp_total = 0.0;
    for octave in 0..5u32 {
        let cells = 4usize << octave;
        let amp = 0.55f64.powi(octave as i32);
        amp_total += amp;
        let gw = cells + 2;
        let gh = cells + 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(octave as u64 * 0x9e37));
        let grid: Vec<f64> = (0..gw * gh).map(|_| rng.gen::<f64>()).collect();
        for y in 0..h {
            let fy = y as f64 / h as f64 * cells as f64;
            let y0 = fy.floor() as usize;
            let ty = fy - y0 as f64;
            for x in 0..w {
                let fx = x as f64 / w as f64 * cells as f64;
                let x0 = fx.floor() as usize;
                let tx = fx - x0 as f64;
                let g = |xx: usize, yy: usize| grid[yy * gw + xx];
                let v = g(x0, y0) * (1.0 - tx) * (1.0 - ty)
                    + g(x0 + 1, y0) * tx * (1.0 - ty)
                    + g(x0, y0 + 1) * (1.0 - tx) * ty
                    + g(x0 + 1, y0 + 1) * tx * ty;
                out[y * w + x] += amp * v;
            }
        }
    }
    for v in &mut out {
        *v /= amp_total;
    }
    out
}

/// A natural-looking synthetic photograph: smooth multi-scale texture, a
/// vertical luminance gradient and a few hard-edged shapes for sharpness.
pub fn natural_image(w: u32, h: u32, seed: u64) -> RgbImage {
    let (wu, hu) = (w as usize, h as usize);
    let noise = value_noise(wu, hu, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A);
    let tint: [f64; 3] = [
        0.8 + 0.4 * rng.gen::<f64>(),
        0.8 + 0.4 * rng.gen::<f64>(),
        0.8 + 0.4 * rng.gen::<f64>(),
    ];
    let mut img = RgbImage::new(w, h);
    for y in 0..hu {
        let grad = 0.25 + 0.5 * y as f64 / hu as f64;
        for x in 0..wu {
            let v = 0.65 * noise[y * wu + x] + 0.35 * grad;
            let px = [
                (255.0 * (v * tint[0]).clamp(0.0, 1.0)) as u8,
                (255.0 * (v * tint[1]).clamp(0.0, 1.0)) as u8,
                (255.0 * (v * tint[2]).clamp(0.0, 1.0)) as u8,
            ];
            img.put_pixel(x as u32, y as u32, Rgb(px));
        }
    }
    // hard-edged rectangles give the scene sharp structure
    for _ in 0..6 {
        let rw = rng.gen_range(w / 10..w / 3).max(2);
        let rh = rng.gen_range(h / 10..h / 3).max(2);
        let x0 = rng.gen_range(0..w - rw);
        let y0 = rng.gen_range(0..h - rh);
        let shade = rng.gen_range(30..226) as u8;
        let alpha = 0.6 + 0.4 * rng.gen::<f64>();
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                let p = img.get_pixel_mut(x, y);
                for ch in 0..3 {
                    p.0[ch] = ((1.0 - alpha) * p.0[ch] as f64 + alpha * shade as f64) as u8;
                }
            }
        }
    }
    img
}

/// Bilinear sample with clamp-to-edge.
fn sample_bilinear(img: &RgbImage, x: f64, y: f64) -> [u8; 3] {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let x = x.clamp(0.0, w - 1.0);
    let y = y.clamp(0.0, h - 1.0);
    let x0 = x.floor() as u32;
    let y0 = y.floor() as u32;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let (tx, ty) = (x - x0 as f64, y - y0 as f64);
    let mut out = [0u8; 3];
    for ch in 0..3 {
        let v = img.get_pixel(x0, y0).0[ch] as f64 * (1.0 - tx) * (1.0 - ty)
            + img.get_pixel(x1, y0).0[ch] as f64 * tx * (1.0 - ty)
            + img.get_pixel(x0, y1).0[ch] as f64 * (1.0 - tx) * ty
            + img.get_pixel(x1, y1).0[ch] as f64 * tx * ty;
        out[ch] = v.round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// A clip that pans smoothly across a larger natural image.
pub fn synthetic_video(w: u32, h: u32, frames: usize, fps: f64, seed: u64) -> FrameSequence {
    synthetic_video_jittered(w, h, frames, fps, seed, 0.0)
}

/// Panning clip with optional per-frame random displacement (camera shake).
pub fn synthetic_video_jittered(
    w: u32,
    h: u32,
    frames: usize,
    fps: f64,
    seed: u64,
    jitter_px: f64,
) -> FrameSequence {
    let margin = 32 + jitter_px.ceil() as u32;
    let scene = natural_image(w + 2 * margin, h + 2 * margin, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77AA);
    let pan_per_frame = 24.0 / frames.max(1) as f64;
    let out = (0..frames)
        .map(|i| {
            let (jx, jy) = if jitter_px > 0.0 {
                (
                    rng.gen_range(-jitter_px..=jitter_px),
                    rng.gen_range(-jitter_px..=jitter_px),
                )
            } else {
                (0.0, 0.0)
            };
            let ox = margin as f64 + i as f64 * pan_per_frame + jx;
            let oy = margin as f64 + i as f64 * pan_per_frame * 0.35 + jy;
            RgbImage::from_fn(w, h, |x, y| {
                Rgb(sample_bilinear(&scene, x as f64 + ox, y as f64 + oy))
            })
        })
        .collect();
    FrameSequence::new(out, fps).expect("synthetic video is valid")
}

/// Additive white Gaussian noise with the given standard deviation
/// (0–255 scale), clamped to the valid range.
pub fn add_gaussian_noise(img: &RgbImage, sigma: f64, seed: u64) -> RgbImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let mut out = img.clone();
    for p in out.pixels_mut() {
        for ch in 0..3 {
            let v = p.0[ch] as f64 + normal.sample(&mut rng);
            p.0[ch] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Gaussian blur; sigma 0 is the identity.
pub fn blur(img: &RgbImage, sigma: f64) -> RgbImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    image::imageops::blur(img, sigma as f32)
}

/// Joint monotone degradation of a whole clip: `severity` in [0,1] scales
/// noise, blur, and temporal jitter together.
pub fn degrade_video(video: &FrameSequence, severity: f64, seed: u64) -> FrameSequence {
    let noise_sigma = 35.0 * severity;
    let blur_sigma = 2.5 * severity;
    let jitter = 5.0 * severity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = video
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let shifted = if jitter > 0.0 {
                let dx = rng.gen_range(-jitter..=jitter);
                let dy = rng.gen_range(-jitter..=jitter);
                RgbImage::from_fn(f.width(), f.height(), |x, y| {
                    Rgb(sample_bilinear(f, x as f64 + dx, y as f64 + dy))
                })
            } else {
                f.clone()
            };
            let blurred = blur(&shifted, blur_sigma);
            add_gaussian_noise(&blurred, noise_sigma, seed ^ (i as u64 * 0x1234_5678 + 1))
        })
        .collect();
    FrameSequence::new(frames, video.fps()).expect("degraded video is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(natural_image(40, 30, 7), natural_image(40, 30, 7));
        let a = synthetic_video(32, 32, 4, 10.0, 3);
        let b = synthetic_video(32, 32, 4, 10.0, 3);
        assert_eq!(a.frames()[3], b.frames()[3]);
    }

    #[test]
    fn degradation_changes_pixels() {
        let v = synthetic_video(48, 48, 3, 10.0, 5);
        let d = degrade_video(&v, 0.8, 1);
        assert_ne!(v.frames()[0], d.frames()[0]);
        let clean = degrade_video(&v, 0.0, 1);
        assert_eq!(v.frames()[0], clean.frames()[0]);
    }
}
