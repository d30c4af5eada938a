//! Exact forward evaluation of feed-forward networks
//! `T_L ∘ σ ∘ T_{L−1} ∘ ⋯ ∘ σ ∘ T₁`.
//!
//! Affine layers accumulate left to right in double precision, so outputs
//! are bit-stable across runs and platforms.

mod expr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointCloud};

const TOY_DOCUMENT: &str = include_str!("../../fixtures/toy.json");
const HOPF_DOCUMENT: &str = include_str!("../../fixtures/hopf.json");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ActivationKind {
    Relu,
    LeakyRelu { alpha: f64 },
    Elu { alpha: f64 },
    Selu { lambda: f64, alpha: f64 },
}

impl ActivationKind {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ActivationKind::Relu => true,
            ActivationKind::LeakyRelu { alpha } => alpha > 0.0 && alpha < 1.0,
            ActivationKind::Elu { alpha } => alpha > 0.0,
            ActivationKind::Selu { lambda, alpha } => lambda > 0.0 && alpha > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("activation parameters out of range: {self:?}")))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        activation_eval(*self, x)
    }
}

pub fn activation_eval(k: ActivationKind, x: f64) -> f64 {
    match k {
        ActivationKind::Relu => x.max(0.0),
        ActivationKind::LeakyRelu { alpha } => {
            if x >= 0.0 {
                x
            } else {
                alpha * x
            }
        }
        ActivationKind::Elu { alpha } => {
            if x >= 0.0 {
                x
            } else {
                alpha * x.exp_m1()
            }
        }
        ActivationKind::Selu { lambda, alpha } => {
            if x >= 0.0 {
                lambda * x
            } else {
                lambda * (alpha * x.exp_m1())
            }
        }
    }
}

/// `y ↦ W y + b` with `W` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLayer {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl AffineLayer {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty {rows}×{cols} layer")));
        }
        if weights.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}×{cols} layer has {} weights",
                weights.len()
            )));
        }
        if bias.len() != rows {
            return Err(Error::Shape(format!(
                "{rows}×{cols} layer has {} biases",
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(AffineLayer {
            rows,
            cols,
            weights,
            bias,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        AffineLayer::new(n, n, w, vec![0.0; n]).expect("valid identity")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let mut acc = 0.0;
                for (w, xi) in self.row(r).iter().zip(x) {
                    acc += w * xi;
                }
                acc + self.bias[r]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    layers: Vec<AffineLayer>,
    activation: ActivationKind,
}

impl Network {
    pub fn new(layers: Vec<AffineLayer>, activation: ActivationKind) -> Result<Self> {
        activation.validate()?;
        if layers.is_empty() {
            return Err(Error::Shape("a network needs at least one layer".into()));
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[1].cols != w[0].rows {
                return Err(Error::Shape(format!(
                    "layer {} expects {} inputs but layer {} gives {}",
                    i + 2,
                    w[1].cols,
                    i + 1,
                    w[0].rows
                )));
            }
        }
        Ok(Network { layers, activation })
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").rows
    }

    /// `d₀, d₁, …, d_L`.
    pub fn shapes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.rows))
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} coordinates, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let last = self.layers.len() - 1;
        let mut y = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            y = layer.apply(&y);
            if i < last {
                for v in &mut y {
                    *v = self.activation.eval(*v);
                }
            }
        }
        Ok(y)
    }

    pub fn eval_point(&self, x: &Point) -> Result<Point> {
        Point::new(self.eval(x.coords())?)
    }

    /// Image of every sample; the guard is dropped since the network is not
    /// an isometry.
    pub fn eval_cloud(&self, c: &PointCloud) -> Result<PointCloud> {
        use rayon::prelude::*;
        if c.is_empty() {
            return Ok(PointCloud::empty(self.output_dim()));
        }
        let pts = c
            .points()
            .par_iter()
            .map(|p| self.eval_point(p))
            .collect::<Result<Vec<_>>>()?;
        PointCloud::new(pts, 0.0)
    }

    pub fn to_document(&self) -> WeightDocument {
        WeightDocument {
            activation: self.activation,
            layers: self
                .layers
                .iter()
                .map(|l| LayerDocument {
                    rows: l.rows,
                    cols: l.cols,
                    weights: l.weights.iter().map(|&v| Entry::Number(v)).collect(),
                    bias: l.bias.iter().map(|&v| Entry::Number(v)).collect(),
                })
                .collect(),
        }
    }
}

pub fn network_eval(n: &Network, x: &[f64]) -> Result<Vec<f64>> {
    n.eval(x)
}

/// Largest hidden-layer dimension.
pub fn network_width(n: &Network) -> Result<usize> {
    let shapes = n.shapes();
    if shapes.len() < 3 {
        return Err(Error::Shape("network has no hidden layer".into()));
    }
    Ok(shapes[1..shapes.len() - 1].iter().copied().max().expect("hidden layers"))
}

/// `max ‖Φ(x) − f(x)‖` over the samples.
pub fn sup_error<F>(n: &Network, reference: F, samples: &PointCloud) -> Result<f64>
where
    F: Fn(&Point) -> Result<Point>,
{
    let mut worst: f64 = 0.0;
    for x in samples.points() {
        let y = n.eval_point(x)?;
        let r = reference(x)?;
        if r.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: y.dim(),
                found: r.dim(),
            });
        }
        worst = worst.max(y.dist(&r));
    }
    Ok(worst)
}

/// A weight entry: a number, or a string holding a decimal or an
/// expression such as `"sqrt(6)/6"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Expr(String),
}

impl Entry {
    pub fn value(&self) -> Result<f64> {
        match self {
            Entry::Number(v) => Ok(*v),
            Entry::Expr(s) => expr::eval(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDocument {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<Entry>,
    pub bias: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightDocument {
    pub activation: ActivationKind,
    pub layers: Vec<LayerDocument>,
}

impl WeightDocument {
    pub fn build(&self) -> Result<Network> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let w = l.weights.iter().map(Entry::value).collect::<Result<Vec<_>>>()?;
                let b = l.bias.iter().map(Entry::value).collect::<Result<Vec<_>>>()?;
                AffineLayer::new(l.rows, l.cols, w, b)
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(layers, self.activation)
    }
}

/// Parses and validates a JSON weight document.
pub fn load_network(document: &str) -> Result<Network> {
    let doc: WeightDocument = serde_json::from_str(document)
        .map_err(|e| Error::Document(e.to_string()))?;
    doc.build()
}

/// Bundled weight sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    /// Width 3, leaky ReLU, ℝ² → ℝ², for the three toy classes.
    Toy,
    /// Width 4, ELU, ℝ³ → ℝ², for the Hopf link.
    Hopf,
}

impl Fixture {
    pub fn document(self) -> &'static str {
        match self {
            Fixture::Toy => TOY_DOCUMENT,
            Fixture::Hopf => HOPF_DOCUMENT,
        }
    }

    pub fn load(self) -> Network {
        load_network(self.document()).expect("bundled fixture is valid")
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "toy" => Some(Fixture::Toy),
            "hopf" => Some(Fixture::Hopf),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests;
