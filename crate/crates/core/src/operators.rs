//! Observation operators and their exact regularized Gram solves.
//!
//! Every operator class here can solve `(A^H A + mu I) x = r` in closed form:
//!
//! * circulant convolution `B = U^H D U` diagonalizes in the Fourier basis,
//! * pixel masks have a diagonal Gram matrix (1 on kept pixels, 0 elsewhere),
//! * partial Fourier sampling `M U` has a Gram matrix diagonal in frequency,
//! * frame-synthesis composites `B W` with a Parseval frame (`W W^H = I`) and
//!   a row-orthonormal-up-to-scale base (`B B^H` diagonal) reduce through the
//!   matrix inversion identity to
//!   `(1/mu) (I - W^H B^H (B B^H + mu I)^{-1} B W)`,
//!   whose middle factor is again diagonal in the right basis,
//! * dense operators fall back to an explicit LU factorization. This path is
//!   the reference the structured solves are tested against; it is never used
//!   by the benchmarks.

use crate::error::{check_len, Error, Result};
use crate::fft::{dft2, idft2, kernel_frequency_response};
use crate::frames::Frame;
use crate::image::{ComplexGrid, Kernel};
use rustfft::num_complex::Complex64;

/// Circular convolution on an `height x width` grid, held as its spectrum
/// (the eigenvalues of the circulant matrix, in `dft2` layout).
#[derive(Clone, Debug)]
pub struct ConvolutionOp {
    height: usize,
    width: usize,
    spectrum: Vec<Complex64>,
}

impl ConvolutionOp {
    pub fn from_kernel(kernel: &Kernel, height: usize, width: usize) -> Result<Self> {
        let spec = kernel_frequency_response(kernel, height, width)?;
        Ok(ConvolutionOp {
            height,
            width,
            spectrum: spec.into_vec(),
        })
    }

    pub fn from_spectrum(height: usize, width: usize, spectrum: Vec<Complex64>) -> Result<Self> {
        check_len("convolution spectrum", height * width, spectrum.len())?;
        Ok(ConvolutionOp {
            height,
            width,
            spectrum,
        })
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    fn filter(&self, x: &[Complex64], conjugate: bool) -> Result<Vec<Complex64>> {
        let grid = ComplexGrid::from_vec(self.height, self.width, x.to_vec())?;
        let mut f = dft2(&grid);
        for (v, d) in f.data_mut().iter_mut().zip(&self.spectrum) {
            *v *= if conjugate { d.conj() } else { *d };
        }
        Ok(idft2(&f).into_vec())
    }
}

/// Subsampling: keeps the listed coordinates of a `total`-dimensional vector.
#[derive(Clone, Debug)]
pub struct MaskOp {
    kept: Vec<usize>,
    total: usize,
}

impl MaskOp {
    /// `kept` must be strictly increasing and bounded by `total`.
    pub fn new(kept: Vec<usize>, total: usize) -> Result<Self> {
        if kept.is_empty() {
            return Err(Error::InvalidParameter("mask keeps no samples".into()));
        }
        for pair in kept.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidParameter(
                    "mask indices must be strictly increasing".into(),
                ));
            }
        }
        if *kept.last().unwrap() >= total {
            return Err(Error::InvalidParameter(format!(
                "mask index {} out of range for dimension {total}",
                kept.last().unwrap()
            )));
        }
        Ok(MaskOp { kept, total })
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn kept_count(&self) -> usize {
        self.kept.len()
    }

    /// Marks each coordinate as kept or dropped.
    pub fn flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.total];
        for &i in &self.kept {
            f[i] = true;
        }
        f
    }

    pub fn gather(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("mask input", self.total, x.len())?;
        Ok(self.kept.iter().map(|&i| x[i]).collect())
    }

    pub fn scatter(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("mask adjoint input", self.kept.len(), y.len())?;
        let mut out = vec![Complex64::default(); self.total];
        for (&i, &v) in self.kept.iter().zip(y) {
            out[i] = v;
        }
        Ok(out)
    }
}

/// Partial Fourier sampling: the composition `mask . dft2`.
#[derive(Clone, Debug)]
pub struct PartialFourierOp {
    height: usize,
    width: usize,
    mask: MaskOp,
}

/// Composition `base . synthesis`: the unknowns are frame coefficients.
#[derive(Clone, Debug)]
pub struct SynthesisOp {
    base: Box<LinearOp>,
    frame: Frame,
}

impl SynthesisOp {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn base(&self) -> &LinearOp {
        &self.base
    }
}

/// Explicit matrix, row-major `rows x cols`. Reference path for tests.
#[derive(Clone, Debug)]
pub struct DenseOp {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl DenseOp {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_len("dense entries", rows * cols, entries.len())?;
        Ok(DenseOp {
            rows,
            cols,
            entries,
        })
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| {
                self.entries[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, v)| a * v)
                    .sum()
            })
            .collect()
    }

    fn matvec_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.cols];
        for i in 0..self.rows {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * y[i];
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum LinearOp {
    Convolution(ConvolutionOp),
    Mask(MaskOp),
    PartialFourier(PartialFourierOp),
    Synthesis(SynthesisOp),
    Dense(DenseOp),
}

impl LinearOp {
    pub fn convolution(kernel: &Kernel, height: usize, width: usize) -> Result<Self> {
        Ok(LinearOp::Convolution(ConvolutionOp::from_kernel(
            kernel, height, width,
        )?))
    }

    pub fn convolution_from_spectrum(
        height: usize,
        width: usize,
        spectrum: Vec<Complex64>,
    ) -> Result<Self> {
        Ok(LinearOp::Convolution(ConvolutionOp::from_spectrum(
            height, width, spectrum,
        )?))
    }

    pub fn mask(mask: MaskOp) -> Self {
        LinearOp::Mask(mask)
    }

    /// Samples the listed frequency bins of the unitary 2-D DFT.
    pub fn partial_fourier(height: usize, width: usize, mask: MaskOp) -> Result<Self> {
        check_len("partial fourier mask", height * width, mask.total())?;
        Ok(LinearOp::PartialFourier(PartialFourierOp {
            height,
            width,
            mask,
        }))
    }

    /// Composes `base` with a Parseval synthesis frame. The base must be one
    /// of the structured classes; composing with a dense or another synthesis
    /// operator has no closed-form Gram solve and is rejected.
    pub fn synthesis(base: LinearOp, frame: Frame) -> Result<Self> {
        match base {
            LinearOp::Synthesis(_) | LinearOp::Dense(_) => {
                return Err(Error::Unsupported(
                    "synthesis composition requires a convolution, mask, or partial \
                     Fourier base"
                        .into(),
                ))
            }
            _ => {}
        }
        check_len("synthesis frame", base.in_dim(), frame.image_dim())?;
        Ok(LinearOp::Synthesis(SynthesisOp {
            base: Box::new(base),
            frame,
        }))
    }

    pub fn dense(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        Ok(LinearOp::Dense(DenseOp::new(rows, cols, entries)?))
    }

    pub fn in_dim(&self) -> usize {
        match self {
            LinearOp::Convolution(c) => c.height * c.width,
            LinearOp::Mask(m) => m.total,
            LinearOp::PartialFourier(p) => p.height * p.width,
            LinearOp::Synthesis(s) => s.frame.coeff_dim(),
            LinearOp::Dense(d) => d.cols,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            LinearOp::Convolution(c) => c.height * c.width,
            LinearOp::Mask(m) => m.kept.len(),
            LinearOp::PartialFourier(p) => p.mask.kept.len(),
            LinearOp::Synthesis(s) => s.base.out_dim(),
            LinearOp::Dense(d) => d.rows,
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("operator input", self.in_dim(), x.len())?;
        match self {
            LinearOp::Convolution(c) => c.filter(x, false),
            LinearOp::Mask(m) => m.gather(x),
            LinearOp::PartialFourier(p) => {
                let f = dft2(&ComplexGrid::from_vec(p.height, p.width, x.to_vec())?);
                p.mask.gather(f.data())
            }
            LinearOp::Synthesis(s) => s.base.apply(&s.frame.synthesis(x)?),
            LinearOp::Dense(d) => Ok(d.matvec(x)),
        }
    }

    pub fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("operator adjoint input", self.out_dim(), y.len())?;
        match self {
            LinearOp::Convolution(c) => c.filter(y, true),
            LinearOp::Mask(m) => m.scatter(y),
            LinearOp::PartialFourier(p) => {
                let full = p.mask.scatter(y)?;
                Ok(idft2(&ComplexGrid::from_vec(p.height, p.width, full)?).into_vec())
            }
            LinearOp::Synthesis(s) => s.frame.analysis(&s.base.adjoint(y)?),
            LinearOp::Dense(d) => Ok(d.matvec_adjoint(y)),
        }
    }

    /// Prepares the closed-form solver for `(A^H A + mu I) x = r`.
    pub fn gram_solver(&self, mu: f64) -> Result<GramSolver> {
        GramSolver::new(self, mu)
    }

    /// One-shot convenience around [`LinearOp::gram_solver`].
    pub fn solve_regularized_gram(&self, rhs: &[Complex64], mu: f64) -> Result<Vec<Complex64>> {
        self.gram_solver(mu)?.solve(rhs)
    }

    /// Materializes the operator column by column. Test and oracle use only.
    pub fn to_dense(&self) -> Result<DenseOp> {
        let (m, n) = (self.out_dim(), self.in_dim());
        let mut entries = vec![Complex64::default(); m * n];
        let mut e = vec![Complex64::default(); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.apply(&e)?;
            e[j] = Complex64::default();
            for i in 0..m {
                entries[i * n + j] = col[i];
            }
        }
        DenseOp::new(m, n, entries)
    }
}

/// Prepared exact solver for `(A^H A + mu I) x = r`.
pub struct GramSolver {
    mu: f64,
    in_dim: usize,
    plan: GramPlan,
}

enum GramPlan {
    /// `U^H diag(1 / (|d|^2 + mu)) U`
    ConvSpectral {
        height: usize,
        width: usize,
        inv: Vec<f64>,
    },
    /// Pixel-diagonal: `1/(1+mu)` on kept coordinates, `1/mu` elsewhere.
    Diagonal { scale: Vec<f64> },
    /// Same diagonal, conjugated by the unitary DFT.
    FourierDiagonal {
        height: usize,
        width: usize,
        scale: Vec<f64>,
    },
    /// `(1/mu) (I - W^H F W)` with `F` a pixel- or frequency-diagonal filter.
    SynthesisWoodbury { frame: Frame, filter: BaseFilter },
    /// LU factorization of the materialized Gram matrix.
    DenseLu { lu: Lu },
}

/// The filter `F = B^H (B B^H + mu I)^{-1} B` of the synthesis reduction.
enum BaseFilter {
    /// Convolution base: frequency gains `|d|^2 / (|d|^2 + mu)`.
    Spectral {
        height: usize,
        width: usize,
        gains: Vec<f64>,
    },
    /// Mask base: `1/(1+mu)` on kept pixels, 0 elsewhere.
    MaskScale { scale: Vec<f64> },
    /// Partial Fourier base: the mask filter conjugated by the DFT.
    FourierMaskScale {
        height: usize,
        width: usize,
        scale: Vec<f64>,
    },
}

impl GramSolver {
    fn new(op: &LinearOp, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gram solve needs mu > 0, got {mu}"
            )));
        }
        let plan = match op {
            LinearOp::Convolution(c) => GramPlan::ConvSpectral {
                height: c.height,
                width: c.width,
                inv: c.spectrum.iter().map(|d| 1.0 / (d.norm_sqr() + mu)).collect(),
            },
            LinearOp::Mask(m) => GramPlan::Diagonal {
                scale: diag_scale(&m.flags(), mu),
            },
            LinearOp::PartialFourier(p) => GramPlan::FourierDiagonal {
                height: p.height,
                width: p.width,
                scale: diag_scale(&p.mask.flags(), mu),
            },
            LinearOp::Synthesis(s) => {
                let filter = match s.base.as_ref() {
                    LinearOp::Convolution(c) => BaseFilter::Spectral {
                        height: c.height,
                        width: c.width,
                        gains: c
                            .spectrum
                            .iter()
                            .map(|d| d.norm_sqr() / (d.norm_sqr() + mu))
                            .collect(),
                    },
                    LinearOp::Mask(m) => BaseFilter::MaskScale {
                        scale: kept_scale(&m.flags(), mu),
                    },
                    LinearOp::PartialFourier(p) => BaseFilter::FourierMaskScale {
                        height: p.height,
                        width: p.width,
                        scale: kept_scale(&p.mask.flags(), mu),
                    },
                    LinearOp::Synthesis(_) | LinearOp::Dense(_) => {
                        return Err(Error::Unsupported(
                            "no closed-form Gram solve for this synthesis base".into(),
                        ))
                    }
                };
                GramPlan::SynthesisWoodbury {
                    frame: s.frame.clone(),
                    filter,
                }
            }
            LinearOp::Dense(d) => {
                let n = d.cols;
                // G = A^H A + mu I, built explicitly.
                let mut g = vec![Complex64::default(); n * n];
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = Complex64::default();
                        for k in 0..d.rows {
                            acc += d.entries[k * n + i].conj() * d.entries[k * n + j];
                        }
                        if i == j {
                            acc += mu;
                        }
                        g[i * n + j] = acc;
                    }
                }
                GramPlan::DenseLu {
                    lu: Lu::factor(n, g)?,
                }
            }
        };
        Ok(GramSolver {
            mu,
            in_dim: op.in_dim(),
            plan,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("gram solve rhs", self.in_dim, rhs.len())?;
        match &self.plan {
            GramPlan::ConvSpectral { height, width, inv } => {
                scaled_in_frequency(*height, *width, rhs, inv)
            }
            GramPlan::Diagonal { scale } => {
                Ok(rhs.iter().zip(scale).map(|(v, s)| v * s).collect())
            }
            GramPlan::FourierDiagonal {
                height,
                width,
                scale,
            } => scaled_in_frequency(*height, *width, rhs, scale),
            GramPlan::SynthesisWoodbury { frame, filter } => {
                let z = frame.synthesis(rhs)?;
                let fz = match filter {
                    BaseFilter::Spectral {
                        height,
                        width,
                        gains,
                    } => scaled_in_frequency(*height, *width, &z, gains)?,
                    BaseFilter::MaskScale { scale } => {
                        z.iter().zip(scale).map(|(v, s)| v * s).collect()
                    }
                    BaseFilter::FourierMaskScale {
                        height,
                        width,
                        scale,
                    } => scaled_in_frequency(*height, *width, &z, scale)?,
                };
                let back = frame.analysis(&fz)?;
                Ok(rhs
                    .iter()
                    .zip(&back)
                    .map(|(r, b)| (r - b) / self.mu)
                    .collect())
            }
            GramPlan::DenseLu { lu } => Ok(lu.solve(rhs)),
        }
    }
}

fn diag_scale(flags: &[bool], mu: f64) -> Vec<f64> {
    flags
        .iter()
        .map(|&kept| if kept { 1.0 / (1.0 + mu) } else { 1.0 / mu })
        .collect()
}

fn kept_scale(flags: &[bool], mu: f64) -> Vec<f64> {
    flags
        .iter()
        .map(|&kept| if kept { 1.0 / (1.0 + mu) } else { 0.0 })
        .collect()
}

/// Applies `U^H diag(scale) U` to a flat `height x width` vector.
fn scaled_in_frequency(
    height: usize,
    width: usize,
    x: &[Complex64],
    scale: &[f64],
) -> Result<Vec<Complex64>> {
    let mut f = dft2(&ComplexGrid::from_vec(height, width, x.to_vec())?);
    for (v, s) in f.data_mut().iter_mut().zip(scale) {
        *v *= *s;
    }
    Ok(idft2(&f).into_vec())
}

/// Complex LU factorization with partial pivoting, enough for the dense
/// reference path.
struct Lu {
    n: usize,
    f: Vec<Complex64>,
    piv: Vec<usize>,
}

impl Lu {
    fn factor(n: usize, mut a: Vec<Complex64>) -> Result<Lu> {
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut best = k;
            let mut best_mag = a[k * n + k].norm();
            for i in k + 1..n {
                let mag = a[i * n + k].norm();
                if mag > best_mag {
                    best = i;
                    best_mag = mag;
                }
            }
            if best_mag == 0.0 {
                return Err(Error::InvalidParameter(
                    "singular matrix in dense gram factorization".into(),
                ));
            }
            if best != k {
                for j in 0..n {
                    a.swap(k * n + j, best * n + j);
                }
                piv.swap(k, best);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let m = a[i * n + k] / pivot;
                a[i * n + k] = m;
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= m * akj;
                }
            }
        }
        Ok(Lu { n, f: a, piv })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let xj = x[j];
                x[i] -= self.f[i * n + j] * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let xj = x[j];
                x[i] -= self.f[i * n + j] * xj;
            }
            x[i] /= self.f[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::circular_convolve;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rc(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| rc(rng)).collect()
    }

    fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    fn rel_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den.max(1e-300)).sqrt()
    }

    fn random_kernel(rng: &mut ChaCha8Rng, side: usize) -> Kernel {
        let taps = (0..side * side).map(|_| rng.random::<f64>()).collect();
        Kernel::new(side, taps).unwrap().normalized().unwrap()
    }

    fn random_mask(rng: &mut ChaCha8Rng, total: usize, keep: usize) -> MaskOp {
        let mut idx: Vec<usize> = (0..total).collect();
        idx.shuffle(rng);
        let mut kept: Vec<usize> = idx[..keep].to_vec();
        kept.sort_unstable();
        MaskOp::new(kept, total).unwrap()
    }

    /// Every operator family on small dims, for sweep tests.
    fn op_zoo(rng: &mut ChaCha8Rng) -> Vec<(&'static str, LinearOp)> {
        let kernel = random_kernel(rng, 3);
        let conv = LinearOp::convolution(&kernel, 8, 8).unwrap();
        let mask = LinearOp::mask(random_mask(rng, 24, 13));
        let pf =
            LinearOp::partial_fourier(4, 6, random_mask(rng, 24, 9)).unwrap();
        let ortho = Frame::orthogonal_haar(8, 8, 2).unwrap();
        let udwt = Frame::undecimated_haar(8, 8, 1).unwrap();
        let img_mask = LinearOp::mask(random_mask(rng, 64, 40));
        let img_pf = LinearOp::partial_fourier(8, 8, random_mask(rng, 64, 30)).unwrap();
        let dense = LinearOp::dense(7, 5, random_vec(rng, 35)).unwrap();
        vec![
            ("conv", conv.clone()),
            ("mask", mask),
            ("partial_fourier", pf),
            ("synthesis_conv_ortho", LinearOp::synthesis(conv.clone(), ortho.clone()).unwrap()),
            ("synthesis_conv_udwt", LinearOp::synthesis(conv, udwt.clone()).unwrap()),
            ("synthesis_mask_udwt", LinearOp::synthesis(img_mask, udwt).unwrap()),
            ("synthesis_fourier_ortho", LinearOp::synthesis(img_pf, ortho).unwrap()),
            ("dense", dense),
        ]
    }

    #[test]
    fn convolution_apply_matches_spectral_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let kernel = random_kernel(&mut rng, 5);
        let op = LinearOp::convolution(&kernel, 8, 12).unwrap();
        let x = random_vec(&mut rng, 96);
        let grid = ComplexGrid::from_vec(8, 12, x.clone()).unwrap();
        let want = circular_convolve(&kernel, &grid).unwrap();
        let got = op.apply(&x).unwrap();
        assert!(rel_dist(&got, want.data()) < 1e-13);
    }

    #[test]
    fn mask_gathers_and_scatter_pads_with_zeros() {
        let m = MaskOp::new(vec![0, 2], 3).unwrap();
        let x = [1.0, 2.0, 3.0].map(|v| Complex64::new(v, 0.0));
        assert_eq!(m.gather(&x).unwrap(), vec![x[0], x[2]]);
        let y = [5.0, 7.0].map(|v| Complex64::new(v, 0.0));
        let back = m.scatter(&y).unwrap();
        assert_eq!(back, vec![y[0], Complex64::default(), y[1]]);
    }

    #[test]
    fn mask_rejects_bad_index_lists() {
        assert!(MaskOp::new(vec![], 4).is_err());
        assert!(MaskOp::new(vec![1, 1], 4).is_err());
        assert!(MaskOp::new(vec![2, 1], 4).is_err());
        assert!(MaskOp::new(vec![0, 4], 4).is_err());
    }

    #[test]
    fn adjoint_pairing_holds_for_every_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for (name, op) in op_zoo(&mut rng) {
            for _ in 0..25 {
                let x = random_vec(&mut rng, op.in_dim());
                let y = random_vec(&mut rng, op.out_dim());
                let lhs = dot(&op.apply(&x).unwrap(), &y);
                let rhs = dot(&x, &op.adjoint(&y).unwrap());
                assert!(
                    (lhs - rhs).norm() < 1e-10,
                    "adjoint identity failed for {name}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn gram_solve_matches_dense_lu_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (name, op) in op_zoo(&mut rng) {
            let dense = LinearOp::Dense(op.to_dense().unwrap());
            for &mu in &[0.01, 0.7, 10.0] {
                let rhs = random_vec(&mut rng, op.in_dim());
                let got = op.solve_regularized_gram(&rhs, mu).unwrap();
                let want = dense.solve_regularized_gram(&rhs, mu).unwrap();
                let err = rel_dist(&got, &want);
                assert!(
                    err < 1e-10,
                    "gram solve mismatch for {name} at mu={mu}: rel err {err}"
                );
            }
        }
    }

    #[test]
    fn gram_solve_satisfies_the_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for (name, op) in op_zoo(&mut rng) {
            let mu = 0.3;
            let rhs = random_vec(&mut rng, op.in_dim());
            let x = op.solve_regularized_gram(&rhs, mu).unwrap();
            let ax = op.apply(&x).unwrap();
            let gx: Vec<Complex64> = op
                .adjoint(&ax)
                .unwrap()
                .iter()
                .zip(&x)
                .map(|(a, b)| a + mu * b)
                .collect();
            let err = rel_dist(&gx, &rhs);
            assert!(err < 1e-10, "normal equations violated for {name}: {err}");
        }
    }

    #[test]
    fn dense_lu_matches_nalgebra() {
        use nalgebra::{Complex, DMatrix, DVector};
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..10 {
            let n = 9;
            let a = random_vec(&mut rng, n * n);
            let b = random_vec(&mut rng, n);
            let lu = Lu::factor(n, a.clone()).unwrap();
            let got = lu.solve(&b);
            let na = DMatrix::from_fn(n, n, |i, j| Complex::new(a[i * n + j].re, a[i * n + j].im));
            let nb = DVector::from_fn(n, |i, _| Complex::new(b[i].re, b[i].im));
            let want = na.lu().solve(&nb).expect("random matrix is invertible");
            let want: Vec<Complex64> = want.iter().map(|c| Complex64::new(c.re, c.im)).collect();
            assert!(rel_dist(&got, &want) < 1e-9);
        }
    }

    #[test]
    fn unsupported_compositions_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let frame = Frame::orthogonal_haar(4, 4, 1).unwrap();
        let dense = LinearOp::dense(4, 16, random_vec(&mut rng, 64)).unwrap();
        assert!(matches!(
            LinearOp::synthesis(dense, frame.clone()),
            Err(Error::Unsupported(_))
        ));
        let conv = LinearOp::convolution(&Kernel::identity(), 4, 4).unwrap();
        let syn = LinearOp::synthesis(conv.clone(), frame.clone()).unwrap();
        assert!(LinearOp::synthesis(syn, frame).is_err());
        let wrong_frame = Frame::orthogonal_haar(8, 8, 1).unwrap();
        assert!(LinearOp::synthesis(conv, wrong_frame).is_err());
    }

    #[test]
    fn gram_solver_rejects_nonpositive_mu() {
        let conv = LinearOp::convolution(&Kernel::identity(), 4, 4).unwrap();
        assert!(conv.gram_solver(0.0).is_err());
        assert!(conv.gram_solver(-1.0).is_err());
        assert!(conv.gram_solver(f64::NAN).is_err());
    }

    #[test]
    fn dimension_mismatches_are_reported() {
        let conv = LinearOp::convolution(&Kernel::identity(), 4, 4).unwrap();
        assert!(conv.apply(&vec![Complex64::default(); 15]).is_err());
        assert!(conv.adjoint(&vec![Complex64::default(); 15]).is_err());
        assert!(conv
            .solve_regularized_gram(&vec![Complex64::default(); 15], 1.0)
            .is_err());
    }

    #[test]
    fn identity_kernel_convolution_is_the_identity_map() {
        let op = LinearOp::convolution(&Kernel::identity(), 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let x = random_vec(&mut rng, 16);
        assert!(rel_dist(&op.apply(&x).unwrap(), &x) < 1e-13);
    }
}
