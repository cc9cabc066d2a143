//! 2D filtering: separable convolution with replicate borders and an
//! FFT-based path for large non-separable (Gabor) kernels.

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Normalized 1-D Gaussian taps for the given sigma and radius.
pub fn gaussian_taps(sigma: f64, radius: usize) -> Vec<f64> {
    let mut taps: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|i| (-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Default truncation radius for a Gaussian: 3 sigma.
pub fn gaussian_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

fn clamp_idx(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Separable cross-correlation with replicate (clamp-to-edge) borders.
///
/// `taps_x` runs along columns, `taps_y` along rows; both must have odd length.
pub fn sep_filter2d(img: &Array2<f64>, taps_x: &[f64], taps_y: &[f64]) -> Array2<f64> {
    let (h, w) = img.dim();
    let rx = taps_x.len() / 2;
    let ry = taps_y.len() / 2;

    let mut tmp = Array2::<f64>::zeros((h, w));
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps_x.iter().enumerate() {
                let cc = clamp_idx(c as isize + k as isize - rx as isize, w);
                acc += t * img[(r, cc)];
            }
            tmp[(r, c)] = acc;
        }
    }
    let mut out = Array2::<f64>::zeros((h, w));
    for c in 0..w {
        for r in 0..h {
            let mut acc = 0.0;
            for (k, t) in taps_y.iter().enumerate() {
                let rr = clamp_idx(r as isize + k as isize - ry as isize, h);
                acc += t * tmp[(rr, c)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Gaussian smoothing with replicate borders.
pub fn gaussian_filter(img: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let taps = gaussian_taps(sigma, gaussian_radius(sigma));
    sep_filter2d(img, &taps, &taps)
}

/// Smallest size >= n whose factors are all 2, 3 or 5 (fast FFT length).
pub fn next_fast_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for f in [2, 3, 5] {
            while k % f == 0 {
                k /= f;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// In-place 2D FFT over a row-major buffer of `rows x cols`.
fn fft2_inplace(buf: &mut [Complex<f64>], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let row_fft = if inverse {
        planner.plan_fft_inverse(cols)
    } else {
        planner.plan_fft_forward(cols)
    };
    for r in 0..rows {
        row_fft.process(&mut buf[r * cols..(r + 1) * cols]);
    }
    let col_fft = if inverse {
        planner.plan_fft_inverse(rows)
    } else {
        planner.plan_fft_forward(rows)
    };
    let mut col = vec![Complex::default(); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = buf[r * cols + c];
        }
        col_fft.process(&mut col);
        for r in 0..rows {
            buf[r * cols + c] = col[r];
        }
    }
    if inverse {
        let scale = 1.0 / (rows * cols) as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

/// A bank of complex kernels pre-transformed for a fixed image size, applied
/// by cross-correlation with replicate borders. Used for the Gabor bank
/// where spatial convolution would dominate the runtime.
pub struct FftFilterBank {
    img_h: usize,
    img_w: usize,
    pad_y: usize,
    pad_x: usize,
    fft_h: usize,
    fft_w: usize,
    spectra: Vec<Vec<Complex<f64>>>,
}

impl FftFilterBank {
    /// Prepare the bank for images of `img_h x img_w`. All kernels must have
    /// odd dimensions.
    pub fn new(img_h: usize, img_w: usize, kernels: &[Array2<Complex<f64>>]) -> Self {
        let pad_y = kernels.iter().map(|k| k.dim().0 / 2).max().unwrap_or(0);
        let pad_x = kernels.iter().map(|k| k.dim().1 / 2).max().unwrap_or(0);
        let fft_h = next_fast_size(img_h + 2 * pad_y);
        let fft_w = next_fast_size(img_w + 2 * pad_x);
        let spectra = kernels
            .iter()
            .map(|k| {
                let (kh, kw) = k.dim();
                let (cy, cx) = (kh / 2, kw / 2);
                let mut buf = vec![Complex::default(); fft_h * fft_w];
                // Embed centered at the origin with wraparound; rows/cols are
                // flipped so that the multiply implements cross-correlation.
                for r in 0..kh {
                    for c in 0..kw {
                        let rr = (fft_h as isize + cy as isize - r as isize) as usize % fft_h;
                        let cc = (fft_w as isize + cx as isize - c as isize) as usize % fft_w;
                        buf[rr * fft_w + cc] = k[(r, c)];
                    }
                }
                fft2_inplace(&mut buf, fft_h, fft_w, false);
                buf
            })
            .collect();
        Self {
            img_h,
            img_w,
            pad_y,
            pad_x,
            fft_h,
            fft_w,
            spectra,
        }
    }

    pub fn kernel_count(&self) -> usize {
        self.spectra.len()
    }

    /// Cross-correlate `img` with every kernel; returns one complex response
    /// image per kernel.
    pub fn apply(&self, img: &Array2<f64>) -> Vec<Array2<Complex<f64>>> {
        assert_eq!(img.dim(), (self.img_h, self.img_w), "image size mismatch");
        let (h, w) = (self.img_h, self.img_w);
        let mut padded = vec![Complex::default(); self.fft_h * self.fft_w];
        // replicate-padded copy; area beyond the pad stays zero but never
        // wraps into the cropped output region
        for r in 0..h + 2 * self.pad_y {
            let sr = clamp_idx(r as isize - self.pad_y as isize, h);
            for c in 0..w + 2 * self.pad_x {
                let sc = clamp_idx(c as isize - self.pad_x as isize, w);
                padded[r * self.fft_w + c] = Complex::new(img[(sr, sc)], 0.0);
            }
        }
        fft2_inplace(&mut padded, self.fft_h, self.fft_w, false);

        self.spectra
            .iter()
            .map(|spec| {
                let mut prod: Vec<Complex<f64>> =
                    padded.iter().zip(spec.iter()).map(|(a, b)| a * b).collect();
                fft2_inplace(&mut prod, self.fft_h, self.fft_w, true);
                let mut out = Array2::<Complex<f64>>::default((h, w));
                for r in 0..h {
                    for c in 0..w {
                        out[(r, c)] = prod[(r + self.pad_y) * self.fft_w + c + self.pad_x];
                    }
                }
                out
            })
            .collect()
    }
}
