//! Unitary 2-D discrete Fourier transforms and circulant spectra.
//!
//! `dft2`/`idft2` are scaled by `1/sqrt(h*w)` in each direction, so the pair
//! is unitary: norms are preserved and the inverse is the conjugate
//! transpose. Operator spectra, by contrast, come from the unnormalized
//! transform (see [`kernel_frequency_response`]), which is what makes
//! `conv(k, x) = idft2(spectrum .* dft2(x))` hold exactly.

use crate::error::{check_len, Error, Result};
use crate::image::{ComplexGrid, Kernel};
use crate::parallel::for_each_chunk_mut;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let direction = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            FftPlanner::new().plan_fft(len, direction)
        })
        .clone()
}

fn fft_rows(data: &mut [Complex64], width: usize, inverse: bool) {
    let fft = plan(width, inverse);
    for_each_chunk_mut(data, width, |_, row| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(row, &mut scratch);
    });
}

fn transpose(src: &[Complex64], height: usize, width: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); src.len()];
    for_each_chunk_mut(&mut out, height, |j, out_row| {
        for (i, slot) in out_row.iter_mut().enumerate() {
            *slot = src[i * width + j];
        }
    });
    out
}

/// Unnormalized separable 2-D FFT, in place over `data` (row-major `h x w`).
fn fft2_unscaled(data: &mut Vec<Complex64>, height: usize, width: usize, inverse: bool) {
    fft_rows(data, width, inverse);
    let mut t = transpose(data, height, width);
    fft_rows(&mut t, height, inverse);
    *data = transpose(&t, width, height);
}

fn scaled(grid: &ComplexGrid, inverse: bool) -> ComplexGrid {
    let (h, w) = (grid.height(), grid.width());
    let mut data = grid.data().to_vec();
    fft2_unscaled(&mut data, h, w, inverse);
    let scale = 1.0 / ((h * w) as f64).sqrt();
    for_each_chunk_mut(&mut data, w, |_, row| {
        for v in row.iter_mut() {
            *v *= scale;
        }
    });
    ComplexGrid::from_vec(h, w, data).expect("transform preserves element count")
}

/// Unitary forward 2-D DFT.
pub fn dft2(grid: &ComplexGrid) -> ComplexGrid {
    scaled(grid, false)
}

/// Unitary inverse 2-D DFT; `idft2(dft2(x)) == x` up to rounding.
pub fn idft2(grid: &ComplexGrid) -> ComplexGrid {
    scaled(grid, true)
}

/// Eigenvalues of circular convolution with `kernel` on an `h x w` grid,
/// laid out like `dft2` output. Entry `(p, q)` is the response to the
/// corresponding discrete frequency, so a unit-sum kernel has response 1 at
/// `(0, 0)`.
pub fn kernel_frequency_response(
    kernel: &Kernel,
    height: usize,
    width: usize,
) -> Result<ComplexGrid> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    if kernel.side() > height || kernel.side() > width {
        return Err(Error::InvalidParameter(format!(
            "kernel side {} exceeds grid {height}x{width}",
            kernel.side()
        )));
    }
    // Embed the kernel at the origin with circular wrap-around, then take the
    // unnormalized transform of the embedding.
    let mut data = vec![Complex64::default(); height * width];
    let r = kernel.radius() as isize;
    for di in -r..=r {
        for dj in -r..=r {
            let i = di.rem_euclid(height as isize) as usize;
            let j = dj.rem_euclid(width as isize) as usize;
            data[i * width + j] += Complex64::new(kernel.tap(di, dj), 0.0);
        }
    }
    fft2_unscaled(&mut data, height, width, false);
    ComplexGrid::from_vec(height, width, data)
}

/// Circular convolution of `x` with `kernel`, evaluated through the spectrum.
pub fn circular_convolve(kernel: &Kernel, x: &ComplexGrid) -> Result<ComplexGrid> {
    let spec = kernel_frequency_response(kernel, x.height(), x.width())?;
    let mut f = dft2(x);
    check_len("spectrum product", f.len(), spec.len())?;
    for (v, s) in f.data_mut().iter_mut().zip(spec.data()) {
        *v *= s;
    }
    Ok(idft2(&f))
}
