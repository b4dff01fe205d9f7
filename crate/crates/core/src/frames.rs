//! Haar synthesis frames: an orthogonal wavelet basis and an undecimated
//! (shift-invariant) tight frame.
//!
//! A frame here is the synthesis map `W` taking a coefficient vector to an
//! image; [`Frame::analysis`] applies the adjoint `W^H`. Both variants are
//! Parseval: `W W^H = I`, so `synthesis(analysis(x)) == x` and analysis
//! preserves the norm. The orthogonal variant is additionally square
//! (`coeff_dim == image_dim`), making it unitary.

use crate::error::{check_len, Error, Result};
use crate::parallel::for_each_chunk_mut;
use rustfft::num_complex::Complex64;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    /// Multi-level decimated Haar basis, standard quad layout.
    OrthogonalHaar,
    /// A-trous Haar frame; each level keeps full resolution and the taps are
    /// scaled so the whole cascade is a Parseval frame.
    UndecimatedHaar,
}

#[derive(Clone, Debug)]
pub struct Frame {
    kind: FrameKind,
    height: usize,
    width: usize,
    levels: usize,
}

impl Frame {
    pub fn orthogonal_haar(height: usize, width: usize, levels: usize) -> Result<Self> {
        Self::new(FrameKind::OrthogonalHaar, height, width, levels)
    }

    pub fn undecimated_haar(height: usize, width: usize, levels: usize) -> Result<Self> {
        Self::new(FrameKind::UndecimatedHaar, height, width, levels)
    }

    fn new(kind: FrameKind, height: usize, width: usize, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidParameter(
                "frame needs at least one level".into(),
            ));
        }
        if levels >= usize::BITS as usize {
            return Err(Error::InvalidParameter(format!("{levels} levels overflow")));
        }
        let block = 1usize << levels;
        if height == 0 || width == 0 || height % block != 0 || width % block != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid {height}x{width} not divisible by 2^{levels}"
            )));
        }
        Ok(Frame {
            kind,
            height,
            width,
            levels,
        })
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of image-domain samples (`height * width`).
    pub fn image_dim(&self) -> usize {
        self.height * self.width
    }

    /// Number of frame coefficients: equal to `image_dim` for the orthogonal
    /// basis, `image_dim * (3 * levels + 1)` for the undecimated frame.
    pub fn coeff_dim(&self) -> usize {
        match self.kind {
            FrameKind::OrthogonalHaar => self.image_dim(),
            FrameKind::UndecimatedHaar => self.image_dim() * (3 * self.levels + 1),
        }
    }

    /// Applies `W^H`: image (row-major `height * width`) to coefficients.
    pub fn analysis(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("frame analysis input", self.image_dim(), x.len())?;
        match self.kind {
            FrameKind::OrthogonalHaar => Ok(self.ortho_analysis(x)),
            FrameKind::UndecimatedHaar => Ok(self.udwt_analysis(x)),
        }
    }

    /// Applies `W`: coefficients to an image.
    pub fn synthesis(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("frame synthesis input", self.coeff_dim(), coeffs.len())?;
        match self.kind {
            FrameKind::OrthogonalHaar => Ok(self.ortho_synthesis(coeffs)),
            FrameKind::UndecimatedHaar => Ok(self.udwt_synthesis(coeffs)),
        }
    }

    // Decimated transform. At each level the top-left subgrid is replaced by
    // its one-step Haar transform, rows then columns, with taps 1/sqrt(2).
    fn ortho_analysis(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        let w = self.width;
        let mut tmp = vec![Complex64::default(); self.height.max(w)];
        for level in 0..self.levels {
            let sh = self.height >> level;
            let sw = self.width >> level;
            for i in 0..sh {
                let row = &mut buf[i * w..i * w + sw];
                haar_step_forward(row, 1, sw, &mut tmp);
            }
            for j in 0..sw {
                haar_step_forward(&mut buf[j..], w, sh, &mut tmp);
            }
        }
        buf
    }

    fn ortho_synthesis(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        let w = self.width;
        let mut tmp = vec![Complex64::default(); self.height.max(w)];
        for level in (0..self.levels).rev() {
            let sh = self.height >> level;
            let sw = self.width >> level;
            for j in 0..sw {
                haar_step_inverse(&mut buf[j..], w, sh, &mut tmp);
            }
            for i in 0..sh {
                let row = &mut buf[i * w..i * w + sw];
                haar_step_inverse(row, 1, sw, &mut tmp);
            }
        }
        buf
    }

    // Undecimated transform. Per level with hole spacing s = 2^level the 1-D
    // filters are l[k] = (a[k] + a[k+s]) / 2 and g[k] = (a[k] - a[k+s]) / 2
    // (indices mod n), applied along each axis; l^H l + g^H g = I per axis,
    // which is what makes the cascade Parseval without any extra band weights.
    fn udwt_analysis(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.image_dim();
        let mut out = vec![Complex64::default(); self.coeff_dim()];
        let mut approx = x.to_vec();
        for level in 0..self.levels {
            let s = 1usize << level;
            let lx = self.axis_pass(&approx, Axis::X, s, Tap::Low, Dir::Forward);
            let hx = self.axis_pass(&approx, Axis::X, s, Tap::High, Dir::Forward);
            let base = 3 * level * n;
            out[base..base + n]
                .copy_from_slice(&self.axis_pass(&hx, Axis::Y, s, Tap::Low, Dir::Forward));
            out[base + n..base + 2 * n]
                .copy_from_slice(&self.axis_pass(&lx, Axis::Y, s, Tap::High, Dir::Forward));
            out[base + 2 * n..base + 3 * n]
                .copy_from_slice(&self.axis_pass(&hx, Axis::Y, s, Tap::High, Dir::Forward));
            approx = self.axis_pass(&lx, Axis::Y, s, Tap::Low, Dir::Forward);
        }
        out[3 * self.levels * n..].copy_from_slice(&approx);
        out
    }

    fn udwt_synthesis(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.image_dim();
        let mut approx = coeffs[3 * self.levels * n..].to_vec();
        for level in (0..self.levels).rev() {
            let s = 1usize << level;
            let base = 3 * level * n;
            let hx_band = &coeffs[base..base + n];
            let hy_band = &coeffs[base + n..base + 2 * n];
            let hd_band = &coeffs[base + 2 * n..base + 3 * n];

            let ll = self.axis_pass(&approx, Axis::Y, s, Tap::Low, Dir::Adjoint);
            let hx = self.axis_pass(hx_band, Axis::Y, s, Tap::Low, Dir::Adjoint);
            let hy = self.axis_pass(hy_band, Axis::Y, s, Tap::High, Dir::Adjoint);
            let hd = self.axis_pass(hd_band, Axis::Y, s, Tap::High, Dir::Adjoint);

            let low_in = add(&ll, &hy);
            let high_in = add(&hx, &hd);
            let a = self.axis_pass(&low_in, Axis::X, s, Tap::Low, Dir::Adjoint);
            let b = self.axis_pass(&high_in, Axis::X, s, Tap::High, Dir::Adjoint);
            approx = add(&a, &b);
        }
        approx
    }

    /// One undecimated filter application along an axis: averages (or
    /// differences) each sample with its circular neighbour `s` away. The
    /// adjoint direction uses the neighbour `s` before instead of after.
    fn axis_pass(
        &self,
        src: &[Complex64],
        axis: Axis,
        s: usize,
        tap: Tap,
        dir: Dir,
    ) -> Vec<Complex64> {
        let (h, w) = (self.height, self.width);
        let mut out = vec![Complex64::default(); src.len()];
        let sign = match tap {
            Tap::Low => 1.0,
            Tap::High => -1.0,
        };
        for_each_chunk_mut(&mut out, w, |i, row| {
            for (j, slot) in row.iter_mut().enumerate() {
                let (ni, nj) = match (axis, dir) {
                    (Axis::X, Dir::Forward) => (i, (j + s) % w),
                    (Axis::X, Dir::Adjoint) => (i, (j + w - s) % w),
                    (Axis::Y, Dir::Forward) => ((i + s) % h, j),
                    (Axis::Y, Dir::Adjoint) => ((i + h - s) % h, j),
                };
                *slot = 0.5 * (src[i * w + j] + sign * src[ni * w + nj]);
            }
        });
        out
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy)]
enum Tap {
    Low,
    High,
}

#[derive(Clone, Copy)]
enum Dir {
    Forward,
    Adjoint,
}

fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// In-place 1-D Haar step over `len` strided samples: first half of the
/// output gets scaled sums of adjacent pairs, second half scaled differences.
fn haar_step_forward(buf: &mut [Complex64], stride: usize, len: usize, tmp: &mut [Complex64]) {
    let half = len / 2;
    for k in 0..half {
        let a = buf[2 * k * stride];
        let b = buf[(2 * k + 1) * stride];
        tmp[k] = (a + b) * FRAC_1_SQRT_2;
        tmp[half + k] = (a - b) * FRAC_1_SQRT_2;
    }
    for k in 0..len {
        buf[k * stride] = tmp[k];
    }
}

fn haar_step_inverse(buf: &mut [Complex64], stride: usize, len: usize, tmp: &mut [Complex64]) {
    let half = len / 2;
    for k in 0..half {
        let s = buf[k * stride];
        let d = buf[(half + k) * stride];
        tmp[2 * k] = (s + d) * FRAC_1_SQRT_2;
        tmp[2 * k + 1] = (s - d) * FRAC_1_SQRT_2;
    }
    for k in 0..len {
        buf[k * stride] = tmp[k];
    }
}
