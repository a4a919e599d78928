//! Graph representation, random and deterministic generators, the generalized
//! product interaction graph, and symmetric eigendecomposition services.
//!
//! Convention used throughout the crate: the coupling factor sits on the left
//! of every Kronecker product (`A^C (x) A^G`), so the product node `(m, i)`
//! lives at flat index `m*N + i`. All reshapes in `spectral` depend on this
//! single choice.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::csvio;
use crate::error::{Error, Result};

/// Undirected weighted graph stored as a dense symmetric adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    adj: DMatrix<f64>,
}

impl Graph {
    /// Wraps an adjacency matrix. The matrix must be square, exactly
    /// symmetric and finite. Nonzero diagonals are allowed here; the
    /// generators below always produce zero diagonals.
    pub fn from_adjacency(adj: DMatrix<f64>) -> Result<Self> {
        let n = adj.nrows();
        if adj.ncols() != n {
            return Err(Error::Shape {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", adj.nrows(), adj.ncols()),
            });
        }
        if !adj.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("adjacency entry".into()));
        }
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((adj[(i, j)] - adj[(j, i)]).abs());
            }
        }
        if worst > 0.0 {
            return Err(Error::NotSymmetric {
                found: worst,
                tol: 0.0,
            });
        }
        Ok(Graph { n, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adj(&self) -> &DMatrix<f64> {
        &self.adj
    }

    /// Row sums (weighted degrees).
    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n, (0..self.n).map(|i| self.adj.row(i).sum()))
    }

    /// Number of unordered pairs with nonzero weight.
    pub fn edge_count(&self) -> usize {
        let mut c = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.adj[(i, j)] != 0.0 {
                    c += 1;
                }
            }
        }
        c
    }

    /// Writes the upper triangle as CSV lines `i,j,weight` with 1-based
    /// indices, preceded by a `# n=<n>` header.
    pub fn write_edge_list<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "# n={}", self.n);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.adj[(i, j)] != 0.0 {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        i + 1,
                        j + 1,
                        csvio::fmt_f64(self.adj[(i, j)])
                    );
                }
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Reads an edge-list CSV written by [`Graph::write_edge_list`]. When the
    /// `# n=` header is missing the node count is inferred from the largest
    /// index seen.
    pub fn read_edge_list<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut n: Option<usize> = None;
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("n=") {
                    n = Some(v.trim().parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad node count {v:?}"),
                    })?);
                }
                continue;
            }
            let mut parts = line.split(',');
            let mut next = |what: &str| {
                parts.next().ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    msg: format!("missing {what}"),
                })
            };
            let i: usize = next("source index")?
                .trim()
                .parse()
                .map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: "bad source index".into(),
                })?;
            let j: usize = next("target index")?
                .trim()
                .parse()
                .map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: "bad target index".into(),
                })?;
            let w: f64 = next("weight")?.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: "bad weight".into(),
            })?;
            if i == 0 || j == 0 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "indices are 1-based".into(),
                });
            }
            edges.push((i - 1, j - 1, w));
        }
        let n = n.unwrap_or_else(|| {
            edges
                .iter()
                .map(|&(i, j, _)| i.max(j) + 1)
                .max()
                .unwrap_or(0)
        });
        let mut adj = DMatrix::zeros(n, n);
        for (lineno, &(i, j, w)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("index out of range for n={n}"),
                });
            }
            adj[(i, j)] = w;
            adj[(j, i)] = w;
        }
        Graph::from_adjacency(adj)
    }

    /// Writes the full adjacency matrix as dense CSV.
    pub fn write_dense<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        csvio::write_matrix(path, &self.adj)
    }

    /// Reads a dense CSV adjacency matrix.
    pub fn read_dense<P: AsRef<Path>>(path: P) -> Result<Self> {
        let m = csvio::read_matrix(path)?;
        Graph::from_adjacency(m)
    }
}

/// Coupling parameters of the generalized product graph: nonnegative weights
/// for the `I (x) A^G`, `A^C (x) I` and `A^C (x) A^G` terms, summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Gamma([f64; 3]);

impl Gamma {
    const SIMPLEX_TOL: f64 = 1e-12;

    pub fn new(g: [f64; 3]) -> Result<Self> {
        if g.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidGamma(g));
        }
        if ((g[0] + g[1] + g[2]) - 1.0).abs() > Self::SIMPLEX_TOL {
            return Err(Error::InvalidGamma(g));
        }
        Ok(Gamma(g))
    }

    /// The one-parameter family `(g1, 2*g1, 1 - 3*g1)` used by the experiment
    /// harness; valid for `g1` in `[0, 1/3]`.
    pub fn from_gamma1(g1: f64) -> Result<Self> {
        Gamma::new([g1, 2.0 * g1, 1.0 - 3.0 * g1])
    }

    pub fn cartesian_g(&self) -> f64 {
        self.0[0]
    }

    pub fn cartesian_c(&self) -> f64 {
        self.0[1]
    }

    pub fn kronecker(&self) -> f64 {
        self.0[2]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    /// Scalar counterpart of the interaction matrix: the eigenvalue of `A^I`
    /// at the factor eigenvalue pair `(lam_c, lam_g)`.
    pub fn pair_eigenvalue(&self, lam_c: f64, lam_g: f64) -> f64 {
        self.0[0] * lam_g + self.0[1] * lam_c + self.0[2] * lam_c * lam_g
    }
}

impl TryFrom<[f64; 3]> for Gamma {
    type Error = Error;
    fn try_from(g: [f64; 3]) -> Result<Self> {
        Gamma::new(g)
    }
}

impl From<Gamma> for [f64; 3] {
    fn from(g: Gamma) -> [f64; 3] {
        g.0
    }
}

/// The two factor graphs plus coupling parameters defining an interaction graph.
#[derive(Debug, Clone)]
pub struct InteractionGraphSpec {
    pub gc: Graph,
    pub gg: Graph,
    pub gamma: Gamma,
}

impl InteractionGraphSpec {
    pub fn new(gc: Graph, gg: Graph, gamma: Gamma) -> Self {
        InteractionGraphSpec { gc, gg, gamma }
    }
}

/// Dense Kronecker product `a (x) b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let v = a[(i, j)];
            if v == 0.0 {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = v * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Interaction adjacency from raw factor matrices:
/// `g1*(I (x) ag) + g2*(ac (x) I) + g3*(ac (x) ag)`.
pub fn interaction_matrix(ac: &DMatrix<f64>, ag: &DMatrix<f64>, gamma: Gamma) -> DMatrix<f64> {
    let m = ac.nrows();
    let n = ag.nrows();
    let [g1, g2, g3] = gamma.as_array();
    let mut out = kron(ac, ag) * g3;
    // I (x) ag: diagonal blocks
    for mm in 0..m {
        for i in 0..n {
            for j in 0..n {
                out[(mm * n + i, mm * n + j)] += g1 * ag[(i, j)];
            }
        }
    }
    // ac (x) I: block-diagonal pattern
    for a in 0..m {
        for b in 0..m {
            let v = ac[(a, b)];
            if v == 0.0 {
                continue;
            }
            for i in 0..n {
                out[(a * n + i, b * n + i)] += g2 * v;
            }
        }
    }
    out
}

/// The `NM`-node interaction graph of a spec.
pub fn build_interaction(spec: &InteractionGraphSpec) -> Graph {
    let adj = interaction_matrix(spec.gc.adj(), spec.gg.adj(), spec.gamma);
    // exact symmetry holds by construction from symmetric factors
    Graph::from_adjacency(adj).expect("interaction matrix of symmetric factors is symmetric")
}

/// Erdos-Renyi graph: every unordered pair present independently with
/// probability `p`, unit weights, zero diagonal.
pub fn gen_erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!(
            "edge probability {p} outside [0,1]"
        )));
    }
    let mut adj = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let u: f64 = rng.random();
            if u < p {
                adj[(i, j)] = 1.0;
                adj[(j, i)] = 1.0;
            }
        }
    }
    Ok(Graph { n, adj })
}

/// Core-periphery graph: the first `core_size` nodes form a clique, core and
/// periphery connect with probability `p_cp`, periphery pairs with `p_pp`.
/// Returns the graph plus the ground-truth core node set `0..core_size`.
pub fn gen_core_periphery<R: Rng + ?Sized>(
    n: usize,
    core_size: usize,
    p_cp: f64,
    p_pp: f64,
    rng: &mut R,
) -> Result<(Graph, Vec<usize>)> {
    if core_size >= n {
        return Err(Error::InvalidPartition(format!(
            "core size {core_size} must be smaller than node count {n}"
        )));
    }
    for p in [p_cp, p_pp] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Invalid(format!(
                "edge probability {p} outside [0,1]"
            )));
        }
    }
    let mut adj = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if i < core_size && j < core_size {
                1.0
            } else if i < core_size || j < core_size {
                p_cp
            } else {
                p_pp
            };
            let u: f64 = rng.random();
            if u < p {
                adj[(i, j)] = 1.0;
                adj[(j, i)] = 1.0;
            }
        }
    }
    Ok((Graph { n, adj }, (0..core_size).collect()))
}

/// Unweighted path 1-2-...-n.
pub fn gen_path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    let mut adj = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        adj[(i, i + 1)] = 1.0;
        adj[(i + 1, i)] = 1.0;
    }
    Ok(Graph { n, adj })
}

/// `1 / max_i sum_j a_ij`, or 1 for an empty graph so downstream filters stay
/// well-defined.
pub fn max_degree_scale(g: &Graph) -> f64 {
    let maxd = g.degrees().max();
    if maxd <= 0.0 {
        1.0
    } else {
        1.0 / maxd
    }
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted strictly
/// descending and a deterministic sign convention on the eigenvectors.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    /// Eigenvalues, descending.
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors, column k paired with `values[k]`.
    pub vectors: DMatrix<f64>,
}

impl EigDecomp {
    /// Smallest gap between consecutive (sorted) eigenvalues. Downstream
    /// estimators warn when this drops below `1e-6`: repeated covariance
    /// eigenvalues make eigenvector recovery ill-posed.
    pub fn min_gap(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return f64::INFINITY;
        }
        (0..n - 1)
            .map(|i| self.values[i] - self.values[i + 1])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Flips `v` so its largest-magnitude entry is positive; ties broken by
/// lowest index. Returns whether a flip happened.
pub(crate) fn fix_sign(v: &mut DVector<f64>) -> bool {
    let mut best = 0;
    for t in 1..v.len() {
        if v[t].abs() > v[best].abs() {
            best = t;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
        true
    } else {
        false
    }
}

/// Symmetric eigendecomposition. The input must be symmetric within `1e-10`
/// (it is symmetrized as `(A + A^T)/2` before decomposing); eigenvalues come
/// out descending and each eigenvector has its largest-magnitude entry
/// positive, so results are reproducible across runs.
pub fn sym_evd(matrix: &DMatrix<f64>) -> Result<EigDecomp> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Shape {
            expected: "square matrix".into(),
            found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
        });
    }
    if !matrix.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("eigendecomposition input".into()));
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    if worst > 1e-10 {
        return Err(Error::NotSymmetric {
            found: worst,
            tol: 1e-10,
        });
    }
    let sym = (matrix + matrix.transpose()) * 0.5;
    let se = sym.symmetric_eigen();

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        let x: f64 = se.eigenvalues[a];
        let y: f64 = se.eigenvalues[b];
        y.partial_cmp(&x).unwrap().then(a.cmp(&b))
    });
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        values[k] = se.eigenvalues[i];
        let mut v = se.eigenvectors.column(i).into_owned();
        fix_sign(&mut v);
        vectors.set_column(k, &v);
    }
    Ok(EigDecomp { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn erdos_renyi_probability_extremes() {
        let g0 = gen_erdos_renyi(3, 0.0, &mut rng(1)).unwrap();
        assert_eq!(g0.edge_count(), 0);
        let g1 = gen_erdos_renyi(3, 1.0, &mut rng(1)).unwrap();
        assert_eq!(g1.edge_count(), 3);
        for i in 0..3 {
            assert_eq!(g1.adj()[(i, i)], 0.0);
        }
    }

    #[test]
    fn erdos_renyi_mean_edge_count_matches_binomial() {
        // Expected edges for n=10, p=0.4: 0.4 * 45 = 18.
        let mut r = rng(7);
        let mut total = 0usize;
        let draws = 1000;
        for _ in 0..draws {
            total += gen_erdos_renyi(10, 0.4, &mut r).unwrap().edge_count();
        }
        let mean = total as f64 / draws as f64;
        assert!((mean - 18.0).abs() < 1.0, "mean {mean}");
    }

    #[test]
    fn erdos_renyi_rejects_small_graphs() {
        assert!(matches!(
            gen_erdos_renyi(1, 0.5, &mut rng(0)),
            Err(Error::InvalidSize(_))
        ));
    }

    #[test]
    fn core_periphery_core_is_complete() {
        let (g, core) = gen_core_periphery(12, 10, 0.3, 0.1, &mut rng(3)).unwrap();
        assert_eq!(core, (0..10).collect::<Vec<_>>());
        for i in 0..10 {
            for j in (i + 1)..10 {
                assert_eq!(g.adj()[(i, j)], 1.0);
            }
        }
    }

    #[test]
    fn core_periphery_zero_probabilities() {
        let (g, _) = gen_core_periphery(3, 1, 0.0, 0.0, &mut rng(3)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn core_periphery_periphery_edge_count_matches_binomial() {
        // periphery-periphery pairs for n=80, core=10: C(70,2) = 2415,
        // expected edges 0.05 * 2415 = 120.75
        let mut r = rng(11);
        let mut total = 0usize;
        let draws = 1000;
        for _ in 0..draws {
            let (g, _) = gen_core_periphery(80, 10, 0.2, 0.05, &mut r).unwrap();
            let mut pp = 0usize;
            for i in 10..80 {
                for j in (i + 1)..80 {
                    if g.adj()[(i, j)] != 0.0 {
                        pp += 1;
                    }
                }
            }
            total += pp;
        }
        let mean = total as f64 / draws as f64;
        assert!((mean - 120.75).abs() < 15.0, "mean {mean}");
    }

    #[test]
    fn core_periphery_rejects_bad_partition() {
        assert!(matches!(
            gen_core_periphery(5, 5, 0.2, 0.05, &mut rng(0)),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn path_graphs() {
        let p2 = gen_path(2).unwrap();
        assert_eq!(p2.edge_count(), 1);
        let p3 = gen_path(3).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 1., 0., 1., 0.]);
        assert_eq!(p3.adj(), &expect);
        let p4 = gen_path(4).unwrap();
        assert_eq!(p4.edge_count(), 3);
        let degs: Vec<f64> = p4.degrees().iter().cloned().collect();
        assert_eq!(degs, vec![1.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn generators_deterministic_under_seed() {
        let a = gen_erdos_renyi(20, 0.3, &mut rng(99)).unwrap();
        let b = gen_erdos_renyi(20, 0.3, &mut rng(99)).unwrap();
        assert_eq!(a.adj(), b.adj());
        let (c, _) = gen_core_periphery(20, 5, 0.2, 0.05, &mut rng(99)).unwrap();
        let (d, _) = gen_core_periphery(20, 5, 0.2, 0.05, &mut rng(99)).unwrap();
        assert_eq!(c.adj(), d.adj());
    }

    #[test]
    fn interaction_pure_kronecker_by_hand() {
        let swap = Graph::from_adjacency(DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.])).unwrap();
        let spec = InteractionGraphSpec::new(swap.clone(), swap, Gamma::new([0., 0., 1.]).unwrap());
        let ai = build_interaction(&spec);
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                0., 0., 0., 1., //
                0., 0., 1., 0., //
                0., 1., 0., 0., //
                1., 0., 0., 0.,
            ],
        );
        assert_eq!(ai.adj(), &expect);
    }

    #[test]
    fn interaction_supra_adjacency() {
        let swap = Graph::from_adjacency(DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.])).unwrap();
        let spec = InteractionGraphSpec::new(
            swap.clone(),
            swap.clone(),
            Gamma::new([0.5, 0.5, 0.]).unwrap(),
        );
        let ai = build_interaction(&spec);
        let i2 = DMatrix::identity(2, 2);
        let expect = (kron(&i2, swap.adj()) + kron(swap.adj(), &i2)) * 0.5;
        assert_eq!(ai.adj(), &expect);
    }

    #[test]
    fn interaction_strong_product_matches_triple_loop_oracle() {
        let mut r = rng(5);
        let gc = gen_erdos_renyi(3, 0.6, &mut r).unwrap();
        let gg = gen_erdos_renyi(4, 0.5, &mut r).unwrap();
        let gamma = Gamma::new([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let ai = build_interaction(&InteractionGraphSpec::new(gc.clone(), gg.clone(), gamma));

        // independent oracle: direct loops over (m,i),(m',i')
        let (m, n) = (3, 4);
        let mut oracle = DMatrix::zeros(m * n, m * n);
        for a in 0..m {
            for b in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        let same_layer = if a == b { 1.0 } else { 0.0 };
                        let same_node = if i == j { 1.0 } else { 0.0 };
                        oracle[(a * n + i, b * n + j)] = (same_layer * gg.adj()[(i, j)]
                            + gc.adj()[(a, b)] * same_node
                            + gc.adj()[(a, b)] * gg.adj()[(i, j)])
                            / 3.0;
                    }
                }
            }
        }
        assert!((ai.adj() - oracle).abs().max() < 1e-15);
    }

    #[test]
    fn gamma_validation() {
        assert!(Gamma::new([0.2, 0.2, 0.6]).is_ok());
        assert!(matches!(
            Gamma::new([0.5, 0.5, 0.5]),
            Err(Error::InvalidGamma(_))
        ));
        assert!(matches!(
            Gamma::new([-0.1, 0.5, 0.6]),
            Err(Error::InvalidGamma(_))
        ));
        assert!(Gamma::from_gamma1(0.0).is_ok());
        assert!(Gamma::from_gamma1(1.0 / 3.0).is_ok());
        assert!(Gamma::from_gamma1(0.4).is_err());
    }

    #[test]
    fn sym_evd_identity() {
        let evd = sym_evd(&DMatrix::identity(3, 3)).unwrap();
        for k in 0..3 {
            assert!((evd.values[k] - 1.0).abs() < 1e-12);
        }
        let gram = evd.vectors.transpose() * &evd.vectors;
        assert!((gram - DMatrix::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn sym_evd_two_by_two_analytic() {
        let m = DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]);
        let evd = sym_evd(&m).unwrap();
        assert!((evd.values[0] - 1.0).abs() < 1e-12);
        assert!((evd.values[1] + 1.0).abs() < 1e-12);
        let s = 1.0 / 2.0f64.sqrt();
        // sign convention: tie on magnitudes broken by lowest index -> first entry positive
        assert!((evd.vectors[(0, 0)] - s).abs() < 1e-12);
        assert!((evd.vectors[(1, 0)] - s).abs() < 1e-12);
        assert!((evd.vectors[(0, 1)] - s).abs() < 1e-12);
        assert!((evd.vectors[(1, 1)] + s).abs() < 1e-12);
    }

    #[test]
    fn sym_evd_reconstructs() {
        let mut r = rng(17);
        let raw = DMatrix::from_fn(5, 5, |_, _| r.random::<f64>() * 2.0 - 1.0);
        let m = (&raw + raw.transpose()) * 0.5;
        let evd = sym_evd(&m).unwrap();
        let recon = &evd.vectors * DMatrix::from_diagonal(&evd.values) * evd.vectors.transpose();
        assert!((recon - &m).norm() / m.norm() < 1e-10);
    }

    #[test]
    fn sym_evd_rejects_asymmetric_and_nonfinite() {
        let m = DMatrix::from_row_slice(2, 2, &[0., 1., 0.5, 0.]);
        assert!(matches!(sym_evd(&m), Err(Error::NotSymmetric { .. })));
        let m = DMatrix::from_row_slice(2, 2, &[0., f64::NAN, f64::NAN, 0.]);
        assert!(matches!(sym_evd(&m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn interaction_eigvecs_are_kronecker_columns() {
        // distinct-spectrum factors: every interaction eigenvector matches
        // some column of V^C (x) V^G up to sign.
        let gc = Graph::from_adjacency(DMatrix::from_row_slice(2, 2, &[0., 0.7, 0.7, 0.])).unwrap();
        let gg = gen_path(3).unwrap();
        let gamma = Gamma::new([0.25, 0.35, 0.4]).unwrap();
        let ai = build_interaction(&InteractionGraphSpec::new(gc.clone(), gg.clone(), gamma));
        let evd_i = sym_evd(ai.adj()).unwrap();
        let evd_c = sym_evd(gc.adj()).unwrap();
        let evd_g = sym_evd(gg.adj()).unwrap();
        let w = kron(&evd_c.vectors, &evd_g.vectors);
        for k in 0..6 {
            let col = evd_i.vectors.column(k);
            let best = (0..6)
                .map(|j| col.dot(&w.column(j)).abs())
                .fold(0.0f64, f64::max);
            assert!(best > 1.0 - 1e-8, "column {k}: best match {best}");
        }
    }

    #[test]
    fn interaction_eigenvalues_combination_rule() {
        let mut r = rng(23);
        for _ in 0..5 {
            let gc = gen_erdos_renyi(3, 0.7, &mut r).unwrap();
            let gg = gen_erdos_renyi(5, 0.5, &mut r).unwrap();
            let gamma = Gamma::new([0.2, 0.3, 0.5]).unwrap();
            let ai = build_interaction(&InteractionGraphSpec::new(gc.clone(), gg.clone(), gamma));
            let mut expect: Vec<f64> = Vec::new();
            let lc = sym_evd(gc.adj()).unwrap().values;
            let lg = sym_evd(gg.adj()).unwrap().values;
            for i in 0..3 {
                for j in 0..5 {
                    expect.push(gamma.pair_eigenvalue(lc[i], lg[j]));
                }
            }
            expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let got = sym_evd(ai.adj()).unwrap().values;
            for k in 0..15 {
                assert!((got[k] - expect[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn max_degree_scale_cases() {
        let k3 = gen_erdos_renyi(3, 1.0, &mut rng(0)).unwrap();
        assert_eq!(max_degree_scale(&k3), 0.5);
        let p3 = gen_path(3).unwrap();
        assert_eq!(max_degree_scale(&p3), 0.5);
        let empty = gen_erdos_renyi(3, 0.0, &mut rng(0)).unwrap();
        assert_eq!(max_degree_scale(&empty), 1.0);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = gen_erdos_renyi(8, 0.5, &mut rng(31)).unwrap();
        let dir = std::env::temp_dir().join("prodgraph_graph_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g.csv");
        g.write_edge_list(&path).unwrap();
        let back = Graph::read_edge_list(&path).unwrap();
        assert_eq!(g.adj(), back.adj());

        let dense = dir.join("g_dense.csv");
        g.write_dense(&dense).unwrap();
        let back = Graph::read_dense(&dense).unwrap();
        assert_eq!(g.adj(), back.adj());
    }

    #[test]
    fn edge_list_parse_errors_carry_line_numbers() {
        let dir = std::env::temp_dir().join("prodgraph_graph_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "# n=3\n1,2,1.0\n1,nope,1.0\n").unwrap();
        match Graph::read_edge_list(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
