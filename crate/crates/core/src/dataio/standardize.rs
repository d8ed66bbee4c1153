use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numkernel::Tensor;

/// Standard deviations at or below this are treated as constant features.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-feature z-score transform fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation of each column; `std` is
    /// floored at [`STD_FLOOR`].
    pub fn fit(ds: &Dataset) -> Result<Self> {
        Self::fit_tensor(ds.x())
    }

    pub fn fit_tensor(x: &Tensor) -> Result<Self> {
        let (n, f) = x.dims2()?;
        if n < 2 {
            return Err(Error::Contract(format!(
                "standardizer needs at least 2 rows, got {n}"
            )));
        }
        let mut mean = vec![0.0; f];
        for row in x.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; f];
        for row in x.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|s| (s / n as f64).sqrt().max(STD_FLOOR)).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(Error::Shape(format!(
                "{} means but {} standard deviations",
                mean.len(),
                std.len()
            )));
        }
        if std.iter().any(|s| !(s.is_finite() && *s > 0.0)) || mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Contract("standardizer statistics must be finite with std > 0".into()));
        }
        Ok(Standardizer { mean, std })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    /// `(x − mean) / std`; columns whose fitted std hit the floor map to 0.
    pub fn transform(&self, x: &Tensor) -> Result<Tensor> {
        let (_, f) = x.dims2()?;
        if f != self.width() {
            return Err(Error::Shape(format!(
                "standardizer fitted on {} features, input has {}",
                self.width(),
                f
            )));
        }
        let mut out = x.clone();
        for row in out.data_mut().chunks_mut(f.max(1)) {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = if *s <= STD_FLOOR { 0.0 } else { (*v - m) / s };
            }
        }
        Ok(out)
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        Ok(ds.with_x(self.transform(ds.x())?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::FeatureManifest;
    use crate::numkernel::SeededRng;

    fn column_stats(x: &Tensor, col: usize) -> (f64, f64) {
        let (n, _) = x.dims2().unwrap();
        let vals: Vec<f64> = x.rows().map(|r| r[col]).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        (mean, var.sqrt())
    }

    #[test]
    fn own_data_is_centred_and_scaled() {
        let mut rng = SeededRng::new(1);
        let x = Tensor::new(vec![50, 4], (0..200).map(|i| rng.normal() * (i % 4 + 1) as f64 + 7.0).collect()).unwrap();
        let std = Standardizer::fit_tensor(&x).unwrap();
        let z = std.transform(&x).unwrap();
        for c in 0..4 {
            let (m, s) = column_stats(&z, c);
            assert!(m.abs() < 1e-9, "{m}");
            assert!((s - 1.0).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let x = Tensor::from_rows(&[vec![0.1, 1.0], vec![0.1, 2.0], vec![0.1, 3.0]]).unwrap();
        let std = Standardizer::fit_tensor(&x).unwrap();
        assert_eq!(std.std()[0], STD_FLOOR);
        let z = std.transform(&x).unwrap();
        assert!(z.rows().all(|r| r[0] == 0.0));
    }

    #[test]
    fn uses_training_statistics() {
        // Train rows centred at 0, test rows centred at 10: the test fold must
        // come out near +10/σ_train, not near 0.
        let m = FeatureManifest::default();
        let train: Vec<Vec<f64>> = (0..4).map(|i| vec![if i % 2 == 0 { -1.0 } else { 1.0 }; 45]).collect();
        let test: Vec<Vec<f64>> = (0..2).map(|i| vec![if i == 0 { 9.0 } else { 11.0 }; 45]).collect();
        let train = Dataset::new(Tensor::from_rows(&train).unwrap(), vec![0, 1, 0, 1], m.clone()).unwrap();
        let test = Dataset::new(Tensor::from_rows(&test).unwrap(), vec![0, 1], m).unwrap();
        let std = Standardizer::fit(&train).unwrap();
        let z = std.apply(&test).unwrap();
        assert_eq!(z.x().row(0)[0], 9.0);
        assert_eq!(z.x().row(1)[0], 11.0);
        assert_eq!(z.y(), test.y());
    }

    #[test]
    fn fit_needs_two_rows() {
        let x = Tensor::zeros(&[1, 3]);
        assert!(matches!(Standardizer::fit_tensor(&x), Err(Error::Contract(_))));
    }

    #[test]
    fn width_mismatch() {
        let std = Standardizer::from_parts(vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(std.transform(&Tensor::zeros(&[1, 3])).is_err());
        assert!(Standardizer::from_parts(vec![0.0], vec![0.0]).is_err());
    }
}
