//! Video ingestion backends: image directories, YUV4MPEG2 files, and an
//! ffmpeg-pipe fallback for container formats when an ffmpeg binary is
//! available on the host.

use super::y4m;
use super::FrameSequence;
use crate::error::{Error, Result};
use image::RgbImage;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

/// Decoder knobs that cannot be derived from the input itself.
#[derive(Debug, Clone)]
pub struct DecodeOptions {
    /// Frame rate assumed for image directories (they carry no timing).
    pub image_dir_fps: f64,
    /// Explicit ffmpeg binary; `None` looks up `ffmpeg` on PATH.
    pub ffmpeg_path: Option<PathBuf>,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            image_dir_fps: 30.0,
            ffmpeg_path: None,
        }
    }
}

/// Decode a video into RGB frames with fps metadata.
///
/// Accepts a directory of numbered PNG/JPEG frames, a `.y4m` file, or any
/// container ffmpeg can read (requires ffmpeg on the host).
pub fn decode_video(path: &Path, opts: &DecodeOptions) -> Result<FrameSequence> {
    if path.is_dir() {
        return decode_image_dir(path, opts.image_dir_fps);
    }
    if !path.exists() {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: "file not found".into(),
        });
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("y4m") => {
            let (frames, fps) = y4m::read_y4m(path)?;
            FrameSequence::new(frames, fps)
        }
        Some("png") | Some("jpg") | Some("jpeg") => {
            // a still image is a one-frame video
            let img = image::open(path)?.into_rgb8();
            FrameSequence::new(vec![img], opts.image_dir_fps)
        }
        _ => decode_with_ffmpeg(path, opts),
    }
}

/// Natural-order comparison so `frame_2` sorts before `frame_10`.
fn natural_cmp(a: &str, b: &str) -> std::cmp::Ordering {
    let mut ai = a.chars().peekable();
    let mut bi = b.chars().peekable();
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return std::cmp::Ordering::Equal,
            (None, Some(_)) => return std::cmp::Ordering::Less,
            (Some(_), None) => return std::cmp::Ordering::Greater,
            (Some(ca), Some(cb)) => {
                if ca.is_ascii_digit() && cb.is_ascii_digit() {
                    let mut na = 0u64;
                    while let Some(c) = ai.peek().filter(|c| c.is_ascii_digit()) {
                        na = na * 10 + *c as u64 - '0' as u64;
                        ai.next();
                    }
                    let mut nb = 0u64;
                    while let Some(c) = bi.peek().filter(|c| c.is_ascii_digit()) {
                        nb = nb * 10 + *c as u64 - '0' as u64;
                        bi.next();
                    }
                    match na.cmp(&nb) {
                        std::cmp::Ordering::Equal => {}
                        ord => return ord,
                    }
                } else {
                    match ca.cmp(&cb) {
                        std::cmp::Ordering::Equal => {
                            ai.next();
                            bi.next();
                        }
                        ord => return ord,
                    }
                }
            }
        }
    }
}

fn decode_image_dir(dir: &Path, fps: f64) -> Result<FrameSequence> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()),
                Some(ref e) if e == "png" || e == "jpg" || e == "jpeg"
            )
        })
        .collect();
    if names.is_empty() {
        return Err(Error::EmptyVideo(dir.to_path_buf()));
    }
    names.sort_by(|a, b| {
        natural_cmp(
            a.file_name().unwrap_or_default().to_str().unwrap_or(""),
            b.file_name().unwrap_or_default().to_str().unwrap_or(""),
        )
    });
    let frames: Result<Vec<RgbImage>> = names
        .iter()
        .map(|p| Ok(image::open(p)?.into_rgb8()))
        .collect();
    FrameSequence::new(frames?, fps)
}

fn ffmpeg_binary(opts: &DecodeOptions) -> PathBuf {
    opts.ffmpeg_path.clone().unwrap_or_else(|| "ffmpeg".into())
}

fn probe_stream(path: &Path, opts: &DecodeOptions) -> Result<(usize, usize, f64)> {
    let ffprobe = opts
        .ffmpeg_path
        .as_ref()
        .and_then(|p| p.parent().map(|d| d.join("ffprobe")))
        .unwrap_or_else(|| "ffprobe".into());
    let out = Command::new(&ffprobe)
        .args([
            "-v",
            "error",
            "-select_streams",
            "v:0",
            "-show_entries",
            "stream=width,height,r_frame_rate",
            "-of",
            "csv=p=0",
        ])
        .arg(path)
        .output()
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: format!(
                "ffprobe unavailable ({e}); without ffmpeg only .y4m files and image directories are supported"
            ),
        })?;
    let text = String::from_utf8_lossy(&out.stdout);
    let fields: Vec<&str> = text.trim().split(',').collect();
    if fields.len() < 3 {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: format!("ffprobe could not parse stream info: {}", text.trim()),
        });
    }
    let width: usize = fields[0].parse().unwrap_or(0);
    let height: usize = fields[1].parse().unwrap_or(0);
    let fps = match fields[2].split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.parse().unwrap_or(0.0);
            let d: f64 = d.parse().unwrap_or(1.0);
            if d > 0.0 {
                n / d
            } else {
                0.0
            }
        }
        None => fields[2].parse().unwrap_or(0.0),
    };
    if width == 0 || height == 0 || fps <= 0.0 {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: "ffprobe returned invalid stream info".into(),
        });
    }
    Ok((width, height, fps))
}

fn decode_with_ffmpeg(path: &Path, opts: &DecodeOptions) -> Result<FrameSequence> {
    let (width, height, fps) = probe_stream(path, opts)?;
    let mut child = Command::new(ffmpeg_binary(opts))
        .args(["-v", "error", "-i"])
        .arg(path)
        .args(["-f", "rawvideo", "-pix_fmt", "rgb24", "-"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: format!(
                "ffmpeg unavailable ({e}); without ffmpeg only .y4m files and image directories are supported"
            ),
        })?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let frame_len = width * height * 3;
    let mut frames = Vec::new();
    let mut buf = vec![0u8; frame_len];
    loop {
        match read_exact_or_eof(&mut stdout, &mut buf)? {
            true => {
                let img = RgbImage::from_raw(width as u32, height as u32, buf.clone())
                    .expect("buffer length matches dimensions");
                frames.push(img);
            }
            false => break,
        }
    }
    let status = child.wait()?;
    if !status.success() && frames.is_empty() {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: "ffmpeg failed to decode".into(),
        });
    }
    if frames.is_empty() {
        return Err(Error::EmptyVideo(path.to_path_buf()));
    }
    FrameSequence::new(frames, fps)
}

/// Fill `buf` completely; Ok(false) on clean EOF at a frame boundary.
fn read_exact_or_eof<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = reader.read(&mut buf[filled..])?;
        if n == 0 {
            if filled == 0 {
                return Ok(false);
            }
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "truncated raw video stream",
            )));
        }
        filled += n;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_directory_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        for i in [1usize, 2, 10, 3] {
            crate::synth::natural_image(20, 14, i as u64)
                .save(dir.path().join(format!("frame_{i}.png")))
                .unwrap();
        }
        let seq = decode_video(dir.path(), &DecodeOptions::default()).unwrap();
        assert_eq!(seq.frame_count(), 4);
        assert_eq!(seq.fps(), 30.0);
        // natural order: frame_10 decodes last
        assert_eq!(seq.frames()[3], crate::synth::natural_image(20, 14, 10));
    }

    #[test]
    fn empty_directory_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            decode_video(dir.path(), &DecodeOptions::default()),
            Err(Error::EmptyVideo(_))
        ));
    }

    #[test]
    fn missing_file_errors() {
        assert!(decode_video(Path::new("/nonexistent/v.mp4"), &DecodeOptions::default()).is_err());
    }

    #[test]
    fn natural_ordering() {
        assert_eq!(natural_cmp("f2.png", "f10.png"), std::cmp::Ordering::Less);
        assert_eq!(natural_cmp("f10.png", "f2.png"), std::cmp::Ordering::Greater);
        assert_eq!(natural_cmp("a.png", "a.png"), std::cmp::Ordering::Equal);
    }
}
