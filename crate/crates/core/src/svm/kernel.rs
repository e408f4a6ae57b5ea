use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::InvalidParam(format!("rbf gamma must be > 0, got {gamma}")))
            }
            _ => Ok(()),
        }
    }

    /// Row-major Gram matrix of `xs`.
    pub fn gram<X: AsRef<[f64]>>(&self, xs: &[X]) -> Vec<f64> {
        let n = xs.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.eval(xs[i].as_ref(), xs[j].as_ref());
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    }
}

/// Kernel choice before training; an RBF without gamma picks
/// `1 / (dims * variance of all training values)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf {
        #[serde(default)]
        gamma: Option<f64>,
    },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Rbf { gamma: None }
    }
}

impl KernelSpec {
    pub fn resolve<X: AsRef<[f64]>>(&self, xs: &[X]) -> Kernel {
        match *self {
            KernelSpec::Linear => Kernel::Linear,
            KernelSpec::Rbf { gamma: Some(gamma) } => Kernel::Rbf { gamma },
            KernelSpec::Rbf { gamma: None } => Kernel::Rbf { gamma: auto_gamma(xs) },
        }
    }
}

pub fn auto_gamma<X: AsRef<[f64]>>(xs: &[X]) -> f64 {
    let dims = xs.first().map_or(1, |x| x.as_ref().len()).max(1);
    let n = (xs.len() * dims) as f64;
    if n == 0.0 {
        return 1.0 / dims as f64;
    }
    let mean = xs.iter().flat_map(|x| x.as_ref()).sum::<f64>() / n;
    let var = xs
        .iter()
        .flat_map(|x| x.as_ref())
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    if var > 0.0 {
        1.0 / (dims as f64 * var)
    } else {
        1.0 / dims as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert_eq!(Kernel::Linear.eval(&[1.0, 2.0], &[3.0, -1.0]), 1.0);
        let k = Kernel::Rbf { gamma: 0.5 };
        assert_eq!(k.eval(&[1.0, 2.0], &[1.0, 2.0]), 1.0);
        assert!((k.eval(&[0.0], &[2.0]) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rbf_needs_positive_gamma() {
        assert!(Kernel::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(Kernel::Rbf { gamma: f64::NAN }.validate().is_err());
        assert!(Kernel::Linear.validate().is_ok());
    }

    #[test]
    fn auto_gamma_on_unit_variance() {
        let xs = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        assert!((auto_gamma(&xs) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn serde_shape() {
        let s = serde_json::to_string(&Kernel::Rbf { gamma: 0.05 }).unwrap();
        assert_eq!(s, r#"{"kind":"rbf","gamma":0.05}"#);
        let spec: KernelSpec = serde_json::from_str(r#"{"kind":"rbf"}"#).unwrap();
        assert_eq!(spec, KernelSpec::Rbf { gamma: None });
    }
}
