//! Experiment description files: `key = value` lines, UTF-8.
//!
//! Keys match the [`ExperimentSpec`] field names. Blank lines and lines
//! starting with `#` are skipped. Each problem family accepts exactly its
//! relevant keys; anything else is rejected so a typo cannot silently turn
//! into a default.

use recover_core::{Error, Result};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    /// Deconvolution, unknowns are undecimated Haar frame coefficients,
    /// l1 penalty.
    DeblurFrame,
    /// Deconvolution over an orthogonal Haar basis, l1 penalty.
    DeblurOrtho,
    /// Deconvolution with isotropic TV.
    DeblurTv,
    /// Missing-pixel recovery with isotropic TV.
    InpaintTv,
    /// Partial Fourier (radial k-space) recovery with isotropic TV.
    MriTv,
}

impl ProblemKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "deblur-frame" => ProblemKind::DeblurFrame,
            "deblur-ortho" => ProblemKind::DeblurOrtho,
            "deblur-tv" => ProblemKind::DeblurTv,
            "inpaint-tv" => ProblemKind::InpaintTv,
            "mri-tv" => ProblemKind::MriTv,
            _ => {
                return Err(Error::Format(format!(
                    "unknown problem {s:?} (expected deblur-frame, deblur-ortho, \
                     deblur-tv, inpaint-tv, or mri-tv)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::DeblurFrame => "deblur-frame",
            ProblemKind::DeblurOrtho => "deblur-ortho",
            ProblemKind::DeblurTv => "deblur-tv",
            ProblemKind::InpaintTv => "inpaint-tv",
            ProblemKind::MriTv => "mri-tv",
        }
    }

    pub fn is_deblur(&self) -> bool {
        matches!(
            self,
            ProblemKind::DeblurFrame | ProblemKind::DeblurOrtho | ProblemKind::DeblurTv
        )
    }
}

/// Rows of the standard deconvolution benchmark table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlurId {
    B1,
    B2A,
    B2B,
    B3A,
    B3B,
}

impl BlurId {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "1" => BlurId::B1,
            "2A" => BlurId::B2A,
            "2B" => BlurId::B2B,
            "3A" => BlurId::B3A,
            "3B" => BlurId::B3B,
            _ => {
                return Err(Error::Format(format!(
                    "unknown blur_id {s:?} (expected 1, 2A, 2B, 3A, or 3B)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            BlurId::B1 => "1",
            BlurId::B2A => "2A",
            BlurId::B2B => "2B",
            BlurId::B3A => "3A",
            BlurId::B3B => "3B",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhantomKind {
    /// Standard ten-ellipse head phantom at the given square size.
    SheppLogan(usize),
    /// Deterministic synthetic grayscale test scene at the given square size.
    Scene(usize),
}

impl PhantomKind {
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, size) = s
            .rsplit_once('-')
            .ok_or_else(|| Error::Format(format!("bad phantom {s:?} (want name-size)")))?;
        let size: usize = size
            .parse()
            .map_err(|_| Error::Format(format!("bad phantom size in {s:?}")))?;
        match kind {
            "shepp-logan" => Ok(PhantomKind::SheppLogan(size)),
            "scene" => Ok(PhantomKind::Scene(size)),
            _ => Err(Error::Format(format!(
                "unknown phantom {kind:?} (expected shepp-logan or scene)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputSource {
    ImagePath(PathBuf),
    Phantom(PhantomKind),
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub problem: ProblemKind,
    pub blur_id: Option<BlurId>,
    pub noise_variance: Option<f64>,
    pub missing_fraction: Option<f64>,
    pub radial_lines: Option<usize>,
    /// Regularization weight; when absent the checked-in tuned default for
    /// this configuration is used.
    pub tau: Option<f64>,
    /// Splitting penalty; when absent, mu = 0.1 tau.
    pub mu: Option<f64>,
    pub seed: u64,
    pub source: InputSource,
}

impl ExperimentSpec {
    /// Parses the `key = value` format and validates field combinations.
    pub fn parse(text: &str) -> Result<Self> {
        let mut problem = None;
        let mut blur_id = None;
        let mut noise_variance = None;
        let mut missing_fraction = None;
        let mut radial_lines = None;
        let mut tau = None;
        let mut mu = None;
        let mut seed = None;
        let mut image_path: Option<PathBuf> = None;
        let mut phantom = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(Error::Format(format!("line {}: empty value", lineno + 1)));
            }
            let dup = |name: &str| Error::Format(format!("duplicate key {name}"));
            match key {
                "problem" => {
                    if problem.replace(ProblemKind::parse(value)?).is_some() {
                        return Err(dup(key));
                    }
                }
                "blur_id" => {
                    if blur_id.replace(BlurId::parse(value)?).is_some() {
                        return Err(dup(key));
                    }
                }
                "noise_variance" => {
                    if noise_variance.replace(parse_f64(key, value)?).is_some() {
                        return Err(dup(key));
                    }
                }
                "missing_fraction" => {
                    if missing_fraction.replace(parse_f64(key, value)?).is_some() {
                        return Err(dup(key));
                    }
                }
                "radial_lines" => {
                    let v: usize = value
                        .parse()
                        .map_err(|_| Error::Format(format!("bad radial_lines {value:?}")))?;
                    if radial_lines.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                "tau" => {
                    if tau.replace(parse_f64(key, value)?).is_some() {
                        return Err(dup(key));
                    }
                }
                "mu" => {
                    if mu.replace(parse_f64(key, value)?).is_some() {
                        return Err(dup(key));
                    }
                }
                "seed" => {
                    let v: u64 = value
                        .parse()
                        .map_err(|_| Error::Format(format!("bad seed {value:?}")))?;
                    if seed.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                "image_path" => {
                    if image_path.replace(PathBuf::from(value)).is_some() {
                        return Err(dup(key));
                    }
                }
                "phantom" => {
                    if phantom.replace(PhantomKind::parse(value)?).is_some() {
                        return Err(dup(key));
                    }
                }
                _ => {
                    return Err(Error::Format(format!(
                        "line {}: unknown key {key:?}",
                        lineno + 1
                    )))
                }
            }
        }

        let problem =
            problem.ok_or_else(|| Error::Format("missing required key `problem`".into()))?;
        let source = match (image_path, phantom) {
            (Some(p), None) => InputSource::ImagePath(p),
            (None, Some(ph)) => InputSource::Phantom(ph),
            (None, None) => {
                return Err(Error::Format(
                    "one of `image_path` or `phantom` is required".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Format(
                    "`image_path` and `phantom` are mutually exclusive".into(),
                ))
            }
        };

        let spec = ExperimentSpec {
            problem,
            blur_id,
            noise_variance,
            missing_fraction,
            radial_lines,
            tau,
            mu,
            seed: seed.unwrap_or(0),
            source,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let reject = |field: &str| {
            Err(Error::Format(format!(
                "key `{field}` does not apply to problem {}",
                self.problem.name()
            )))
        };
        if self.problem.is_deblur() {
            if self.blur_id.is_none() {
                return Err(Error::Format(
                    "deblurring problems require `blur_id`".into(),
                ));
            }
            if self.missing_fraction.is_some() {
                return reject("missing_fraction");
            }
            if self.radial_lines.is_some() {
                return reject("radial_lines");
            }
        }
        match self.problem {
            ProblemKind::InpaintTv => {
                if self.blur_id.is_some() {
                    return reject("blur_id");
                }
                if self.radial_lines.is_some() {
                    return reject("radial_lines");
                }
                match self.missing_fraction {
                    None => {
                        return Err(Error::Format(
                            "inpaint-tv requires `missing_fraction`".into(),
                        ))
                    }
                    Some(f) if !(0.0..1.0).contains(&f) => {
                        return Err(Error::Format(format!(
                            "missing_fraction must be in [0, 1), got {f}"
                        )))
                    }
                    _ => {}
                }
            }
            ProblemKind::MriTv => {
                if self.blur_id.is_some() {
                    return reject("blur_id");
                }
                if self.missing_fraction.is_some() {
                    return reject("missing_fraction");
                }
                match self.radial_lines {
                    None => return Err(Error::Format("mri-tv requires `radial_lines`".into())),
                    Some(0) => {
                        return Err(Error::Format("radial_lines must be at least 1".into()))
                    }
                    _ => {}
                }
            }
            _ => {}
        }
        if let Some(v) = self.noise_variance {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Format(format!(
                    "noise_variance must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [("tau", self.tau), ("mu", self.mu)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Format(format!(
                        "{name} must be finite and positive, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("bad {key} value {value:?}")))
}
