//! Hashed operators as formal complex mixtures of ordered products of
//! fractional unitary factors `exp(-i * fraction * s_axis * A_axis)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HashingFactor {
    /// Zero-based observable index.
    pub axis: usize,
    pub fraction: f64,
}

impl HashingFactor {
    pub fn new(axis: usize, fraction: f64) -> Self {
        Self { axis, fraction }
    }
}

/// `coefficient * prod_j exp(-i f_j s_{k_j} A_{k_j})`, leftmost factor first.
#[derive(Debug, Clone, PartialEq)]
pub struct HashingTerm {
    pub coefficient: Complex64,
    pub factors: Vec<HashingFactor>,
}

impl HashingTerm {
    pub fn new(coefficient: Complex64, factors: Vec<HashingFactor>) -> Self {
        Self {
            coefficient,
            factors,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashingSpec {
    n_axes: usize,
    terms: Vec<HashingTerm>,
}

impl HashingSpec {
    pub const TOLERANCE: f64 = 1e-12;

    /// Validates that every term spends a total fraction of one on every axis
    /// and that the coefficients sum to one, so that all parameters set to
    /// zero give the identity and all but one give `exp(-i s_k A_k)`.
    pub fn new(n_axes: usize, terms: Vec<HashingTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidHashing("no terms".into()));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (t, term) in terms.iter().enumerate() {
            let c = term.coefficient;
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidHashing(format!(
                    "term {t}: non-finite coefficient"
                )));
            }
            total += c;
            let mut spent = vec![0.0f64; n_axes];
            let mut seen = vec![false; n_axes];
            for f in &term.factors {
                if f.axis >= n_axes {
                    return Err(Error::InvalidHashing(format!(
                        "term {t}: axis {} out of range for {n_axes} axes",
                        f.axis
                    )));
                }
                if !f.fraction.is_finite() {
                    return Err(Error::InvalidHashing(format!(
                        "term {t}: non-finite fraction"
                    )));
                }
                spent[f.axis] += f.fraction;
                seen[f.axis] = true;
            }
            for k in 0..n_axes {
                if !seen[k] {
                    return Err(Error::InvalidHashing(format!(
                        "term {t}: axis {k} has no factor"
                    )));
                }
                if (spent[k] - 1.0).abs() > Self::TOLERANCE {
                    return Err(Error::InvalidHashing(format!(
                        "term {t}: fractions on axis {k} sum to {}",
                        spent[k]
                    )));
                }
            }
        }
        if (total - 1.0).norm() > Self::TOLERANCE {
            return Err(Error::InvalidHashing(format!(
                "coefficients sum to {total}, not 1"
            )));
        }
        Ok(Self { n_axes, terms })
    }

    pub fn n_axes(&self) -> usize {
        self.n_axes
    }

    pub fn terms(&self) -> &[HashingTerm] {
        &self.terms
    }

    /// `(1+alpha)/2 e^{-itB} e^{-isA} + (1-alpha)/2 e^{-isA} e^{-itB}` on the
    /// pair (A, B) = axes (0, 1).
    pub fn alpha(alpha: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            n_axes: 2,
            terms: vec![
                HashingTerm::new(
                    (one + alpha) * 0.5,
                    vec![HashingFactor::new(1, 1.0), HashingFactor::new(0, 1.0)],
                ),
                HashingTerm::new(
                    (one - alpha) * 0.5,
                    vec![HashingFactor::new(0, 1.0), HashingFactor::new(1, 1.0)],
                ),
            ],
        }
    }

    /// `e^{-i(1-kappa)sA/2} e^{-itB} e^{-i(1+kappa)sA/2}`.
    pub fn kappa(kappa: f64) -> Self {
        Self {
            n_axes: 2,
            terms: vec![HashingTerm::new(
                Complex64::new(1.0, 0.0),
                vec![
                    HashingFactor::new(0, 0.5 * (1.0 - kappa)),
                    HashingFactor::new(1, 1.0),
                    HashingFactor::new(0, 0.5 * (1.0 + kappa)),
                ],
            )],
        }
    }

    /// Plain ordered product `e^{-is_1A_1} ... e^{-is_nA_n}`.
    pub fn ordered_product(n_axes: usize) -> Self {
        Self {
            n_axes,
            terms: vec![HashingTerm::new(
                Complex64::new(1.0, 0.0),
                (0..n_axes).map(|k| HashingFactor::new(k, 1.0)).collect(),
            )],
        }
    }

    pub fn kirkwood_dirac() -> Self {
        Self::alpha(Complex64::new(1.0, 0.0))
    }

    pub fn anti_kirkwood_dirac() -> Self {
        Self::alpha(Complex64::new(-1.0, 0.0))
    }

    pub fn margenau_hill() -> Self {
        Self::alpha(Complex64::new(0.0, 0.0))
    }

    /// Named presets: `kd`, `anti-kd`, `mh`, `alpha:<complex>`, `kappa:<real>`.
    pub fn preset(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "kd" => return Ok(Self::kirkwood_dirac()),
            "anti-kd" => return Ok(Self::anti_kirkwood_dirac()),
            "mh" => return Ok(Self::margenau_hill()),
            _ => {}
        }
        if let Some(v) = name.strip_prefix("alpha:") {
            return Ok(Self::alpha(parse_complex(v)?));
        }
        if let Some(v) = name.strip_prefix("kappa:") {
            if v.contains('i') {
                return Err(Error::InvalidHashing(
                    "complex kappa is not supported".into(),
                ));
            }
            let k: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidHashing(format!("bad kappa value {v:?}")))?;
            if !k.is_finite() {
                return Err(Error::InvalidHashing(format!("bad kappa value {v:?}")));
            }
            return Ok(Self::kappa(k));
        }
        Err(Error::InvalidHashing(format!("unknown preset {name:?}")))
    }

    /// The hashing with the parameter of `axis` pinned to zero: every factor
    /// on that axis is removed and later axes shift down by one.
    pub fn reduced(&self, axis: usize) -> Result<Self> {
        if axis >= self.n_axes {
            return Err(Error::AxisOutOfRange {
                axis,
                n_axes: self.n_axes,
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| HashingTerm {
                coefficient: t.coefficient,
                factors: t
                    .factors
                    .iter()
                    .filter(|f| f.axis != axis)
                    .map(|f| HashingFactor {
                        axis: if f.axis > axis { f.axis - 1 } else { f.axis },
                        fraction: f.fraction,
                    })
                    .collect(),
            })
            .collect();
        Ok(Self {
            n_axes: self.n_axes - 1,
            terms,
        })
    }

    /// `#(-s)^dagger`: conjugated coefficients, reversed factor order.
    pub fn involution(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| HashingTerm {
                coefficient: t.coefficient.conj(),
                factors: t.factors.iter().rev().copied().collect(),
            })
            .collect();
        Self {
            n_axes: self.n_axes,
            terms,
        }
    }

    /// Number of projector products the spectral expansion needs, given the
    /// number of distinct eigenvalues of each observable.
    pub fn expansion_size(&self, spectrum_sizes: &[usize]) -> u128 {
        self.terms
            .iter()
            .filter(|t| t.coefficient != Complex64::new(0.0, 0.0))
            .map(|t| {
                t.factors
                    .iter()
                    .map(|f| spectrum_sizes[f.axis] as u128)
                    .product::<u128>()
            })
            .sum()
    }
}

/// Parses `0.3`, `-2i`, `i`, `0.3+0.7i`, `1e-3-2.5e-1i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidArgument(format!("cannot parse complex number {s:?}"));
    let real = |t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|_| bad())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => real(t),
        }
    };
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(real(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(real(&body[..k])?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}
