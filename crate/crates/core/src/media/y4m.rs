//! Minimal YUV4MPEG2 reader/writer (8-bit 420/422/444/mono).

use crate::error::{Error, Result};
use image::{Rgb, RgbImage};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

#[derive(Clone, Copy, PartialEq)]
enum Chroma {
    C420,
    C422,
    C444,
    Mono,
}

fn clamp8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// BT.601 limited-range YCbCr to RGB.
fn yuv_to_rgb(y: u8, cb: u8, cr: u8) -> [u8; 3] {
    let y = 1.164_383_56 * (y as f64 - 16.0);
    let cb = cb as f64 - 128.0;
    let cr = cr as f64 - 128.0;
    [
        clamp8(y + 1.596_026_89 * cr),
        clamp8(y - 0.391_762_29 * cb - 0.812_967_65 * cr),
        clamp8(y + 2.017_232_1 * cb),
    ]
}

fn rgb_to_yuv(r: u8, g: u8, b: u8) -> [u8; 3] {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    [
        clamp8(16.0 + 65.481 * r + 128.553 * g + 24.966 * b),
        clamp8(128.0 - 37.797 * r - 74.203 * g + 112.0 * b),
        clamp8(128.0 + 112.0 * r - 93.786 * g - 18.214 * b),
    ]
}

fn read_line<R: BufRead>(reader: &mut R, path: &Path) -> Result<String> {
    let mut buf = Vec::new();
    reader.read_until(b'\n', &mut buf)?;
    if buf.pop() != Some(b'\n') {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: "truncated y4m header".into(),
        });
    }
    String::from_utf8(buf).map_err(|_| Error::Decode {
        path: path.to_path_buf(),
        reason: "non-utf8 y4m header".into(),
    })
}

/// Read a .y4m file into RGB frames plus its frame rate.
pub fn read_y4m(path: &Path) -> Result<(Vec<RgbImage>, f64)> {
    let file = std::fs::File::open(path)?;
    let mut reader = BufReader::new(file);
    let header = read_line(&mut reader, path)?;
    let mut parts = header.split(' ');
    if parts.next() != Some("YUV4MPEG2") {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: "missing YUV4MPEG2 signature".into(),
        });
    }
    let (mut w, mut h, mut fps) = (0usize, 0usize, 0.0f64);
    let mut chroma = Chroma::C420;
    for tok in parts {
        match tok.chars().next() {
            Some('W') => w = tok[1..].parse().unwrap_or(0),
            Some('H') => h = tok[1..].parse().unwrap_or(0),
            Some('F') => {
                if let Some((num, den)) = tok[1..].split_once(':') {
                    let num: f64 = num.parse().unwrap_or(0.0);
                    let den: f64 = den.parse().unwrap_or(1.0);
                    if den > 0.0 {
                        fps = num / den;
                    }
                }
            }
            Some('C') => {
                chroma = match &tok[1..] {
                    s if s.starts_with("420") => Chroma::C420,
                    "422" => Chroma::C422,
                    "444" => Chroma::C444,
                    "mono" => Chroma::Mono,
                    other => {
                        return Err(Error::Decode {
                            path: path.to_path_buf(),
                            reason: format!("unsupported chroma {other}"),
                        })
                    }
                }
            }
            _ => {} // interlacing/aspect/comments ignored
        }
    }
    if w == 0 || h == 0 || fps <= 0.0 {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: "incomplete y4m header".into(),
        });
    }
    let (cw, ch) = match chroma {
        Chroma::C420 => (w.div_ceil(2), h.div_ceil(2)),
        Chroma::C422 => (w.div_ceil(2), h),
        Chroma::C444 => (w, h),
        Chroma::Mono => (0, 0),
    };

    let mut frames = Vec::new();
    let mut y_plane = vec![0u8; w * h];
    let mut cb_plane = vec![0u8; cw * ch];
    let mut cr_plane = vec![0u8; cw * ch];
    loop {
        let mut marker = Vec::new();
        let n = reader.read_until(b'\n', &mut marker)?;
        if n == 0 {
            break;
        }
        if !marker.starts_with(b"FRAME") {
            return Err(Error::Decode {
                path: path.to_path_buf(),
                reason: "bad frame marker".into(),
            });
        }
        reader.read_exact(&mut y_plane).map_err(|_| Error::Decode {
            path: path.to_path_buf(),
            reason: "truncated frame payload".into(),
        })?;
        if chroma != Chroma::Mono {
            reader.read_exact(&mut cb_plane)?;
            reader.read_exact(&mut cr_plane)?;
        }
        let mut img = RgbImage::new(w as u32, h as u32);
        for yy in 0..h {
            for xx in 0..w {
                let yv = y_plane[yy * w + xx];
                let px = match chroma {
                    Chroma::Mono => {
                        let g = clamp8(1.164_383_56 * (yv as f64 - 16.0));
                        [g, g, g]
                    }
                    _ => {
                        let (cx, cy) = match chroma {
                            Chroma::C420 => (xx / 2, yy / 2),
                            Chroma::C422 => (xx / 2, yy),
                            _ => (xx, yy),
                        };
                        yuv_to_rgb(yv, cb_plane[cy * cw + cx], cr_plane[cy * cw + cx])
                    }
                };
                img.put_pixel(xx as u32, yy as u32, Rgb(px));
            }
        }
        frames.push(img);
    }
    if frames.is_empty() {
        return Err(Error::EmptyVideo(path.to_path_buf()));
    }
    Ok((frames, fps))
}

/// Write frames as a 4:4:4 .y4m file (used by fixtures and tests).
pub fn write_y4m(path: &Path, frames: &[RgbImage], fps_num: u32, fps_den: u32) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    let (w, h) = frames
        .first()
        .map(|f| f.dimensions())
        .ok_or_else(|| Error::EmptyVideo(path.to_path_buf()))?;
    writeln!(file, "YUV4MPEG2 W{w} H{h} F{fps_num}:{fps_den} Ip A1:1 C444")?;
    let plane_len = (w * h) as usize;
    let mut y = vec![0u8; plane_len];
    let mut cb = vec![0u8; plane_len];
    let mut cr = vec![0u8; plane_len];
    for frame in frames {
        writeln!(file, "FRAME")?;
        for (i, p) in frame.pixels().enumerate() {
            let [yv, cbv, crv] = rgb_to_yuv(p.0[0], p.0[1], p.0[2]);
            y[i] = yv;
            cb[i] = cbv;
            cr[i] = crv;
        }
        file.write_all(&y)?;
        file.write_all(&cb)?;
        file.write_all(&cr)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_444() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.y4m");
        let frames: Vec<RgbImage> = (0..3)
            .map(|i| crate::synth::natural_image(24, 16, i))
            .collect();
        write_y4m(&path, &frames, 30, 1).unwrap();
        let (decoded, fps) = read_y4m(&path).unwrap();
        assert_eq!(decoded.len(), 3);
        assert_eq!(fps, 30.0);
        assert_eq!(decoded[0].dimensions(), (24, 16));
        // limited-range YCbCr roundtrip is lossy but close
        let orig = frames[1].get_pixel(5, 5).0;
        let back = decoded[1].get_pixel(5, 5).0;
        for ch in 0..3 {
            assert!((orig[ch] as i32 - back[ch] as i32).abs() <= 3);
        }
    }

    #[test]
    fn garbage_is_a_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.y4m");
        std::fs::write(&path, b"not a video at all").unwrap();
        assert!(read_y4m(&path).is_err());
    }
}
