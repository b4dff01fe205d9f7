//! Regularizers and their (possibly approximate) proximal maps.
//!
//! `prox(v, scale)` evaluates `argmin_x tau * phi(x) + (scale/2) ||x - v||^2`.
//! For `l1` and `l0` penalties this is an exact per-coordinate shrinkage with
//! effective threshold `tau / scale`; phases of complex entries are kept and
//! only moduli shrink. The isotropic total-variation prox has no closed form
//! and runs a fixed number of dual projection iterations instead, carrying
//! the dual variable across calls in [`ProxState`] so consecutive calls on
//! slowly-changing inputs keep refining the same dual point.

use crate::error::{check_len, Error, Result};
use crate::operators::LinearOp;
use crate::parallel::for_each_chunk_mut;
use rustfft::num_complex::Complex64;

/// Step size of the dual projection iteration; stable below 1/4.
const TV_DUAL_STEP: f64 = 0.248;

#[derive(Clone, Debug, PartialEq)]
pub enum RegularizerKind {
    /// Sum of complex moduli.
    L1,
    /// Count of nonzero entries.
    L0,
    /// Isotropic total variation of an `height x width` grid, forward
    /// differences with constant extension at the border.
    TvIso { height: usize, width: usize },
}

#[derive(Clone, Debug)]
pub struct Regularizer {
    kind: RegularizerKind,
    tau: f64,
    tv_inner_iters: usize,
}

impl Regularizer {
    pub fn l1(tau: f64) -> Result<Self> {
        Self::new(RegularizerKind::L1, tau, 1)
    }

    pub fn l0(tau: f64) -> Result<Self> {
        Self::new(RegularizerKind::L0, tau, 1)
    }

    pub fn tv_iso(tau: f64, height: usize, width: usize, inner_iters: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter("empty TV grid".into()));
        }
        if inner_iters == 0 {
            return Err(Error::InvalidParameter(
                "TV prox needs at least one inner iteration".into(),
            ));
        }
        Self::new(RegularizerKind::TvIso { height, width }, tau, inner_iters)
    }

    fn new(kind: RegularizerKind, tau: f64, tv_inner_iters: usize) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "regularization weight must be finite and nonnegative, got {tau}"
            )));
        }
        Ok(Regularizer {
            kind,
            tau,
            tv_inner_iters,
        })
    }

    pub fn kind(&self) -> &RegularizerKind {
        &self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tv_inner_iters(&self) -> usize {
        self.tv_inner_iters
    }

    fn dim(&self) -> Option<usize> {
        match self.kind {
            RegularizerKind::TvIso { height, width } => Some(height * width),
            _ => None,
        }
    }

    /// The bare penalty `phi(x)`, without the `tau` factor.
    pub fn value(&self, x: &[Complex64]) -> Result<f64> {
        if let Some(d) = self.dim() {
            check_len("regularizer input", d, x.len())?;
        }
        Ok(match self.kind {
            RegularizerKind::L1 => x.iter().map(|z| z.norm()).sum(),
            RegularizerKind::L0 => x.iter().filter(|z| z.norm_sqr() != 0.0).count() as f64,
            RegularizerKind::TvIso { height, width } => tv_value(x, height, width),
        })
    }

    /// Proximal map at penalty strength `tau / scale`.
    pub fn prox(&self, v: &[Complex64], scale: f64, state: &mut ProxState) -> Result<Vec<Complex64>> {
        Ok(self.prox_inner(v, scale, state, None)?)
    }

    /// Like [`Regularizer::prox`], also returning the inner objective
    /// `0.5 ||x - v||^2 + (tau/scale) * phi(x)` at each dual iterate for the
    /// TV kind (empty for the shrinkage kinds, which are exact).
    pub fn prox_traced(
        &self,
        v: &[Complex64],
        scale: f64,
        state: &mut ProxState,
    ) -> Result<(Vec<Complex64>, Vec<f64>)> {
        let mut trace = Vec::new();
        let x = self.prox_inner(v, scale, state, Some(&mut trace))?;
        Ok((x, trace))
    }

    fn prox_inner(
        &self,
        v: &[Complex64],
        scale: f64,
        state: &mut ProxState,
        trace: Option<&mut Vec<f64>>,
    ) -> Result<Vec<Complex64>> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "prox scale must be positive and finite, got {scale}"
            )));
        }
        if let Some(d) = self.dim() {
            check_len("prox input", d, v.len())?;
        }
        if self.tau == 0.0 {
            return Ok(v.to_vec());
        }
        let t = self.tau / scale;
        Ok(match self.kind {
            RegularizerKind::L1 => v.iter().map(|z| soft_threshold(*z, t)).collect(),
            RegularizerKind::L0 => {
                let keep_at = (2.0 * t).sqrt();
                v.iter()
                    .map(|z| {
                        if z.norm() >= keep_at {
                            *z
                        } else {
                            Complex64::default()
                        }
                    })
                    .collect()
            }
            RegularizerKind::TvIso { height, width } => {
                let dual = state.tv_dual(height * width);
                chambolle_projection(
                    v,
                    height,
                    width,
                    t,
                    self.tv_inner_iters,
                    dual,
                    trace,
                )
            }
        })
    }
}

fn soft_threshold(z: Complex64, t: f64) -> Complex64 {
    let m = z.norm();
    if m <= t {
        Complex64::default()
    } else {
        z * (1.0 - t / m)
    }
}

/// Carry-over state for inexact proximal maps. Fresh state starts the TV
/// dual variable at zero; a state reused across calls warm-starts it.
#[derive(Clone, Debug, Default)]
pub struct ProxState {
    p1: Vec<Complex64>,
    p2: Vec<Complex64>,
}

impl ProxState {
    pub fn new() -> Self {
        Self::default()
    }

    fn tv_dual(&mut self, n: usize) -> (&mut Vec<Complex64>, &mut Vec<Complex64>) {
        if self.p1.len() != n {
            self.p1 = vec![Complex64::default(); n];
            self.p2 = vec![Complex64::default(); n];
        }
        (&mut self.p1, &mut self.p2)
    }
}

/// Isotropic TV with forward differences and constant (Neumann) extension.
pub fn tv_value(x: &[Complex64], height: usize, width: usize) -> f64 {
    let idx = |i: usize, j: usize| i * width + j;
    let mut total = 0.0;
    for i in 0..height {
        for j in 0..width {
            let c = x[idx(i, j)];
            let d1 = if i + 1 < height {
                x[idx(i + 1, j)] - c
            } else {
                Complex64::default()
            };
            let d2 = if j + 1 < width {
                x[idx(i, j + 1)] - c
            } else {
                Complex64::default()
            };
            total += (d1.norm_sqr() + d2.norm_sqr()).sqrt();
        }
    }
    total
}

/// Divergence adjoint to the forward-difference gradient above.
fn divergence(p1: &[Complex64], p2: &[Complex64], height: usize, width: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); height * width];
    for_each_chunk_mut(&mut out, width, |i, row| {
        for (j, slot) in row.iter_mut().enumerate() {
            let mut d = Complex64::default();
            if i + 1 < height {
                d += p1[i * width + j];
            }
            if i > 0 {
                d -= p1[(i - 1) * width + j];
            }
            if j + 1 < width {
                d += p2[i * width + j];
            }
            if j > 0 {
                d -= p2[i * width + j - 1];
            }
            *slot = d;
        }
    });
    out
}

/// Dual projection iteration for the TV prox: repeatedly moves the dual field
/// `p` along the gradient of the dual objective and renormalizes so each
/// per-pixel 2-vector stays in the unit ball. The primal iterate is
/// `x = v - lambda * div(p)`.
fn chambolle_projection(
    v: &[Complex64],
    height: usize,
    width: usize,
    lambda: f64,
    iters: usize,
    (p1, p2): (&mut Vec<Complex64>, &mut Vec<Complex64>),
    mut trace: Option<&mut Vec<f64>>,
) -> Vec<Complex64> {
    let w = width;
    let primal = |p1: &[Complex64], p2: &[Complex64]| -> Vec<Complex64> {
        let div = divergence(p1, p2, height, width);
        v.iter().zip(&div).map(|(a, d)| a - lambda * d).collect()
    };
    let inner_objective = |x: &[Complex64]| -> f64 {
        let quad: f64 = x
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * 0.5;
        quad + lambda * tv_value(x, height, width)
    };
    if let Some(t) = trace.as_deref_mut() {
        t.push(inner_objective(&primal(p1, p2)));
    }
    let mut work = vec![Complex64::default(); v.len()];
    for _ in 0..iters {
        // work = div(p) - v / lambda
        let div = divergence(p1, p2, height, width);
        for_each_chunk_mut(&mut work, w, |i, row| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = div[i * w + j] - v[i * w + j] / lambda;
            }
        });
        let grad = |i: usize, j: usize| -> (Complex64, Complex64) {
            let c = work[i * w + j];
            let g1 = if i + 1 < height {
                work[(i + 1) * w + j] - c
            } else {
                Complex64::default()
            };
            let g2 = if j + 1 < width {
                work[i * w + j + 1] - c
            } else {
                Complex64::default()
            };
            (g1, g2)
        };
        for_each_chunk_mut(p1, w, |i, row| {
            for (j, slot) in row.iter_mut().enumerate() {
                let (g1, g2) = grad(i, j);
                let mag = (g1.norm_sqr() + g2.norm_sqr()).sqrt();
                *slot = (*slot + TV_DUAL_STEP * g1) / (1.0 + TV_DUAL_STEP * mag);
            }
        });
        for_each_chunk_mut(p2, w, |i, row| {
            for (j, slot) in row.iter_mut().enumerate() {
                let (g1, g2) = grad(i, j);
                let mag = (g1.norm_sqr() + g2.norm_sqr()).sqrt();
                *slot = (*slot + TV_DUAL_STEP * g2) / (1.0 + TV_DUAL_STEP * mag);
            }
        });
        if let Some(t) = trace.as_deref_mut() {
            t.push(inner_objective(&primal(p1, p2)));
        }
    }
    primal(p1, p2)
}

/// The composite objective `0.5 ||A x - y||^2 + tau * phi(x)`.
pub fn objective(
    op: &LinearOp,
    y: &[Complex64],
    reg: &Regularizer,
    x: &[Complex64],
) -> Result<f64> {
    check_len("objective data", op.out_dim(), y.len())?;
    let ax = op.apply(x)?;
    let fit: f64 = ax.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(0.5 * fit + reg.tau() * reg.value(x)?)
}
