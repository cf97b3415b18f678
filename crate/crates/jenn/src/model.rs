//! Trained model: architecture, learned parameters, and normalization
//! statistics, plus a versioned plain-text serialization format.
//!
//! File layout (one record per line, `key: values`):
//!
//! ```text
//! jenn-model-v1
//! layer_sizes: 2,16,16,1
//! mu_x: ...        sigma_x: ...
//! mu_y: ...        sigma_y: ...
//! W1: <row-major>  b1: ...
//! ...
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces predictions bitwise.

use std::path::Path;

use ndarray::{Array1, Array2, Array3};

use crate::error::{JennError, Result};
use crate::normalize::{denormalize_prediction, normalize_inputs, NormalizationStats};
use crate::params::{Architecture, Parameters};
use crate::propagation::forward_with_partials;

pub const MODEL_FORMAT_HEADER: &str = "jenn-model-v1";

#[derive(Debug, Clone)]
pub struct Model {
    architecture: Architecture,
    parameters: Parameters,
    norm: NormalizationStats,
}

impl Model {
    pub fn new(
        architecture: Architecture,
        parameters: Parameters,
        norm: NormalizationStats,
    ) -> Result<Self> {
        if !parameters.matches(&architecture) {
            return Err(JennError::ShapeMismatch(
                "parameters do not match architecture".into(),
            ));
        }
        if norm.mu_x.len() != architecture.num_inputs()
            || norm.mu_y.len() != architecture.num_outputs()
        {
            return Err(JennError::ShapeMismatch(
                "normalization stats do not match architecture".into(),
            ));
        }
        Ok(Model { architecture, parameters, norm })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn parameters(&self) -> &Parameters {
        &self.parameters
    }

    pub fn norm(&self) -> &NormalizationStats {
        &self.norm
    }

    /// Predicts raw-unit outputs and Jacobians for raw-unit inputs
    /// `(n_x, m)`. Returns `(Y, J)` with shapes `(n_y, m)` and
    /// `(n_y, n_x, m)`.
    pub fn predict(&self, x_raw: &Array2<f64>) -> Result<(Array2<f64>, Array3<f64>)> {
        let x = normalize_inputs(x_raw, &self.norm)?;
        let cache = forward_with_partials(&self.architecture, &self.parameters, &x)?;
        denormalize_prediction(cache.output(), cache.output_partials(), &self.norm)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Model::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MODEL_FORMAT_HEADER);
        out.push('\n');
        let sizes: Vec<String> = self
            .architecture
            .layer_sizes()
            .iter()
            .map(|n| n.to_string())
            .collect();
        out.push_str(&format!("layer_sizes: {}\n", sizes.join(",")));
        push_floats(&mut out, "mu_x", self.norm.mu_x.iter());
        push_floats(&mut out, "sigma_x", self.norm.sigma_x.iter());
        push_floats(&mut out, "mu_y", self.norm.mu_y.iter());
        push_floats(&mut out, "sigma_y", self.norm.sigma_y.iter());
        for (l, (w, b)) in self
            .parameters
            .weights
            .iter()
            .zip(self.parameters.biases.iter())
            .enumerate()
        {
            push_floats(&mut out, &format!("W{}", l + 1), w.iter());
            push_floats(&mut out, &format!("b{}", l + 1), b.iter());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == MODEL_FORMAT_HEADER => {}
            other => {
                return Err(JennError::Parse(format!(
                    "unsupported model header {:?}, expected '{MODEL_FORMAT_HEADER}'",
                    other.unwrap_or("")
                )))
            }
        }
        let mut fields = std::collections::HashMap::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| JennError::Parse(format!("malformed model line '{line}'")))?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }
        let sizes: Vec<usize> = field(&fields, "layer_sizes")?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| JennError::Parse(format!("bad layer size '{s}'")))
            })
            .collect::<Result<_>>()?;
        let architecture = Architecture::new(sizes)?;

        let norm = NormalizationStats {
            mu_x: parse_vec(field(&fields, "mu_x")?)?,
            sigma_x: parse_vec(field(&fields, "sigma_x")?)?,
            mu_y: parse_vec(field(&fields, "mu_y")?)?,
            sigma_y: parse_vec(field(&fields, "sigma_y")?)?,
        };

        let sizes = architecture.layer_sizes().to_vec();
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 1..sizes.len() {
            let w_flat = parse_vec(field(&fields, &format!("W{l}"))?)?;
            if w_flat.len() != sizes[l] * sizes[l - 1] {
                return Err(JennError::Parse(format!(
                    "W{l} has {} entries, expected {}",
                    w_flat.len(),
                    sizes[l] * sizes[l - 1]
                )));
            }
            weights.push(
                Array2::from_shape_vec((sizes[l], sizes[l - 1]), w_flat.to_vec())
                    .expect("length checked above"),
            );
            let b = parse_vec(field(&fields, &format!("b{l}"))?)?;
            if b.len() != sizes[l] {
                return Err(JennError::Parse(format!(
                    "b{l} has {} entries, expected {}",
                    b.len(),
                    sizes[l]
                )));
            }
            biases.push(b);
        }
        Model::new(architecture, Parameters { weights, biases }, norm)
    }
}

fn push_floats<'a>(out: &mut String, key: &str, values: impl Iterator<Item = &'a f64>) {
    out.push_str(key);
    out.push_str(": ");
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        out.push_str(&format!("{v}"));
        first = false;
    }
    out.push('\n');
}

fn field<'a>(
    fields: &'a std::collections::HashMap<String, String>,
    key: &str,
) -> Result<&'a str> {
    fields
        .get(key)
        .map(|s| s.as_str())
        .ok_or_else(|| JennError::Parse(format!("model file missing field '{key}'")))
}

fn parse_vec(s: &str) -> Result<Array1<f64>> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| JennError::Parse(format!("bad float '{v}'")))
        })
        .collect::<Result<_>>()?;
    Ok(Array1::from_vec(vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::init_parameters;
    use ndarray::Array2;

    fn sample_model() -> Model {
        let arch = Architecture::new(vec![2, 5, 3, 1]).unwrap();
        let params = init_parameters(&arch, 99);
        let norm = NormalizationStats {
            mu_x: ndarray::array![0.5, -1.5],
            sigma_x: ndarray::array![2.0, 0.25],
            mu_y: ndarray::array![10.0],
            sigma_y: ndarray::array![3.5],
        };
        Model::new(arch, params, norm).unwrap()
    }

    #[test]
    fn text_round_trip_is_bitwise() {
        let model = sample_model();
        let restored = Model::from_text(&model.to_text()).unwrap();
        assert_eq!(model.parameters(), restored.parameters());
        assert_eq!(model.norm(), restored.norm());

        let x = Array2::from_shape_fn((2, 10), |(i, t)| 0.17 * t as f64 - 0.5 * i as f64);
        let (y0, j0) = model.predict(&x).unwrap();
        let (y1, j1) = restored.predict(&x).unwrap();
        assert_eq!(y0, y1);
        assert_eq!(j0, j1);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(Model::from_text("something-else\n").is_err());
    }

    #[test]
    fn rejects_truncated_file() {
        let model = sample_model();
        let text = model.to_text();
        let cut: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(Model::from_text(&cut).is_err());
    }

    #[test]
    fn identity_norm_predict_equals_forward() {
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        let params = init_parameters(&arch, 1);
        let norm = NormalizationStats::identity(2, 1);
        let model = Model::new(arch.clone(), params.clone(), norm).unwrap();
        let x = Array2::from_shape_fn((2, 4), |(i, t)| 0.3 * (i + t) as f64);
        let (y, j) = model.predict(&x).unwrap();
        let cache = forward_with_partials(&arch, &params, &x).unwrap();
        assert_eq!(&y, cache.output());
        assert_eq!(&j, cache.output_partials());
    }
}
