//! Multi-attribute signal synthesis, sample covariances, and the layer-wise
//! and node-wise unfolded covariances.
//!
//! A stacked signal of length `N*M` reshapes into an `N x M` matrix whose
//! column `m` is layer `m`'s block. This is the one place the Kronecker
//! ordering convention meets the data layout.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use std::path::Path;

use crate::csvio;
use crate::error::{Error, Result};
use crate::filters::{self, FilterSpec};
use crate::graph::{sym_evd, Graph};

/// A batch of observed stacked signals, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBatch {
    n: usize,
    m: usize,
    /// `S x (N*M)`, row `s` is observation `s` stacked layer-by-layer.
    samples: DMatrix<f64>,
    seed: Option<u64>,
}

impl SignalBatch {
    pub fn new(n: usize, m: usize, samples: DMatrix<f64>, seed: Option<u64>) -> Result<Self> {
        if samples.ncols() != n * m {
            return Err(Error::Shape {
                expected: format!("rows of length {}", n * m),
                found: format!("length {}", samples.ncols()),
            });
        }
        if samples.nrows() == 0 {
            return Err(Error::Degenerate("zero samples".into()));
        }
        if !samples.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("signal entry".into()));
        }
        Ok(SignalBatch {
            n,
            m,
            samples,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sample_count(&self) -> usize {
        self.samples.nrows()
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Attaches provenance: the seed of the generator that produced this
    /// batch. Not persisted by the CSV format.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Row `s` reshaped to `N x M`, column `m` = layer `m`.
    pub fn unfold_sample(&self, s: usize) -> DMatrix<f64> {
        let row: Vec<f64> = self.samples.row(s).iter().cloned().collect();
        DMatrix::from_column_slice(self.n, self.m, &row)
    }
}

/// Draws `s` signals through the filter: white standard-normal excitation,
/// white noise of variance `sigma2`. Per sample the excitation is drawn
/// first, then the noise, so batches with the same seed share a prefix:
/// the first `k` samples of a larger batch equal a smaller batch exactly.
pub fn synthesize<R: Rng + ?Sized>(
    spec: &FilterSpec,
    gc: &Graph,
    gg: &Graph,
    s: usize,
    sigma2: f64,
    rng: &mut R,
) -> Result<SignalBatch> {
    if s == 0 {
        return Err(Error::InvalidSize("need at least one sample".into()));
    }
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::Invalid(format!(
            "noise variance {sigma2} must be >= 0"
        )));
    }
    let (n, m) = (gg.n(), gc.n());
    let nm = n * m;
    let h = filters::materialize(spec, gc, gg)?;
    let sd = sigma2.sqrt();
    let mut out = DMatrix::zeros(s, nm);
    let mut x = DVector::zeros(nm);
    for si in 0..s {
        for v in x.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut y = &h * &x;
        if sd > 0.0 {
            for v in y.iter_mut() {
                let w: f64 = rng.sample(StandardNormal);
                *v += sd * w;
            }
        } else {
            // keep the stream layout identical whether or not noise is added
            for _ in 0..nm {
                let _: f64 = rng.sample(StandardNormal);
            }
        }
        out.row_mut(si).copy_from(&y.transpose());
    }
    SignalBatch::new(n, m, out, None)
}

/// Sample covariance of the batch plus both unfolded covariances. No mean
/// subtraction: the signal model is zero-mean.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    /// `NM x NM` full covariance.
    pub full: DMatrix<f64>,
    /// `M x M` layer-wise covariance, `(1/S) sum Y^T Y`.
    pub layer: DMatrix<f64>,
    /// `N x N` node-wise covariance, `(1/S) sum Y Y^T`.
    pub node: DMatrix<f64>,
    pub sample_count: usize,
}

/// Contracts a full `NM x NM` covariance into its layer (`M x M`) and node
/// (`N x N`) unfoldings by block trace / diagonal-block sum.
pub fn unfolded_from_full(
    full: &DMatrix<f64>,
    n: usize,
    m: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if full.nrows() != n * m || full.ncols() != n * m {
        return Err(Error::Shape {
            expected: format!("{0}x{0}", n * m),
            found: format!("{}x{}", full.nrows(), full.ncols()),
        });
    }
    let mut layer = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut acc = 0.0;
            for i in 0..n {
                acc += full[(a * n + i, b * n + i)];
            }
            layer[(a, b)] = acc;
        }
    }
    let mut node = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for mm in 0..m {
                acc += full[(mm * n + i, mm * n + j)];
            }
            node[(i, j)] = acc;
        }
    }
    let layer = (&layer + layer.transpose()) * 0.5;
    let node = (&node + node.transpose()) * 0.5;
    Ok((layer, node))
}

/// Full, layer-wise and node-wise sample covariances of a batch.
pub fn sample_covariances(batch: &SignalBatch) -> Result<CovarianceEstimate> {
    let s = batch.sample_count() as f64;
    let full = batch.samples().transpose() * batch.samples() / s;
    let full = (&full + full.transpose()) * 0.5;
    let (layer, node) = unfolded_from_full(&full, batch.n(), batch.m())?;
    Ok(CovarianceEstimate {
        full,
        layer,
        node,
        sample_count: batch.sample_count(),
    })
}

/// Noiseless population counterparts of the unfolded covariances, evaluated
/// in closed form from the factor eigendecompositions: the layer covariance
/// is `sum_i v_i^C (v_i^C)^T sum_j |h_ij|^2` and the node covariance swaps
/// the roles of the factors.
pub fn population_unfolded(
    spec: &FilterSpec,
    gc: &Graph,
    gg: &Graph,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let evd_c = sym_evd(gc.adj())?;
    let evd_g = sym_evd(gg.adj())?;
    let resp = filters::freq_response(spec, &evd_c.values, &evd_g.values)?;
    let (m, n) = (gc.n(), gg.n());
    let mut layer = DMatrix::zeros(m, m);
    for i in 0..m {
        let weight: f64 = (0..n).map(|j| resp.values[(i, j)].powi(2)).sum();
        let v = evd_c.vectors.column(i);
        layer += (v * v.transpose()) * weight;
    }
    let mut node = DMatrix::zeros(n, n);
    for j in 0..n {
        let weight: f64 = (0..m).map(|i| resp.values[(i, j)].powi(2)).sum();
        let v = evd_g.vectors.column(j);
        node += (v * v.transpose()) * weight;
    }
    Ok((layer, node))
}

/// Writes a batch as CSV: header `# N=<n> M=<m> S=<s>`, one sample per row,
/// floats in full round-trip precision.
pub fn write_batch<P: AsRef<Path>>(batch: &SignalBatch, path: P) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# N={} M={} S={}",
        batch.n(),
        batch.m(),
        batch.sample_count()
    );
    for s in 0..batch.sample_count() {
        for j in 0..batch.samples().ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", csvio::fmt_f64(batch.samples()[(s, j)]));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a batch written by [`write_batch`]. Errors carry 1-based line
/// numbers; the declared header dimensions are enforced.
pub fn read_batch<P: AsRef<Path>>(path: P) -> Result<SignalBatch> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header.trim();
    let rest = header.strip_prefix('#').ok_or(Error::Parse {
        line: 1,
        msg: "missing `# N=.. M=.. S=..` header".into(),
    })?;
    let mut n = None;
    let mut m = None;
    let mut s_decl = None;
    for tok in rest.split_whitespace() {
        let mut kv = tok.splitn(2, '=');
        match (kv.next(), kv.next()) {
            (Some("N"), Some(v)) => n = v.parse::<usize>().ok(),
            (Some("M"), Some(v)) => m = v.parse::<usize>().ok(),
            (Some("S"), Some(v)) => s_decl = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    let (n, m, s_decl) = match (n, m, s_decl) {
        (Some(n), Some(m), Some(s)) => (n, m, s),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("malformed header {header:?}"),
            });
        }
    };
    let width = n * m;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row = csvio::parse_row(line, lineno + 1)?;
        if row.len() != width {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected {} cells, found {}", width, row.len()),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "zero samples".into(),
        });
    }
    if rows.len() != s_decl {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "header declares S={} but file has {} rows",
                s_decl,
                rows.len()
            ),
        });
    }
    let samples = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
    SignalBatch::new(n, m, samples, None)
}
