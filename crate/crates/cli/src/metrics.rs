//! Reconstruction quality metrics and their on-disk report format.

use recover_core::image::Image;
use recover_core::{Error, Result};
use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct Metrics {
    /// Mean squared error against the clean image.
    pub mse: f64,
    /// Improvement in SNR over the degraded image, in dB. Present only when
    /// the observation has an image-domain rendering (deblurring and
    /// inpainting; not partial Fourier). Positive infinity marks an exact
    /// recovery.
    pub isnr_db: Option<f64>,
    pub final_objective: Option<f64>,
    pub iterations: Option<usize>,
}

/// Compares an estimate against the clean image, and against the degraded
/// image when one exists in the pixel domain.
///
/// ISNR is 10 log10(||degraded - clean||^2 / ||estimate - clean||^2), so an
/// estimate identical to the degraded input scores exactly 0 dB and a
/// perfect estimate scores infinity.
pub fn compute_metrics(
    clean: &Image,
    degraded: Option<&Image>,
    estimate: &Image,
) -> Result<Metrics> {
    check_same_shape("metrics estimate shape", clean, estimate)?;
    let n = clean.len() as f64;
    let err: f64 = clean
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let mse = err / n;
    let isnr_db = match degraded {
        None => None,
        Some(deg) => {
            check_same_shape("metrics degraded shape", clean, deg)?;
            let base: f64 = clean
                .data()
                .iter()
                .zip(deg.data())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if err == 0.0 {
                Some(f64::INFINITY)
            } else {
                Some(10.0 * (base / err).log10())
            }
        }
    };
    Ok(Metrics {
        mse,
        isnr_db,
        final_objective: None,
        iterations: None,
    })
}

fn check_same_shape(context: &'static str, a: &Image, b: &Image) -> Result<()> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(Error::DimensionMismatch {
            context,
            expected: a.height() * a.width(),
            got: b.height() * b.width(),
        });
    }
    Ok(())
}

impl Metrics {
    /// Renders the `key = value` report written next to each estimate.
    /// Optional entries are omitted when absent rather than written as
    /// placeholders.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        writeln!(out, "mse = {:.10e}", self.mse).expect("string write");
        if let Some(isnr) = self.isnr_db {
            if isnr.is_infinite() {
                writeln!(out, "isnr_db = inf").expect("string write");
            } else {
                writeln!(out, "isnr_db = {isnr:.6}").expect("string write");
            }
        }
        if let Some(obj) = self.final_objective {
            writeln!(out, "final_objective = {obj:.10e}").expect("string write");
        }
        if let Some(iters) = self.iterations {
            writeln!(out, "iterations = {iters}").expect("string write");
        }
        out
    }
}
