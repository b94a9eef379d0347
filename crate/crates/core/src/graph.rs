//! Problem graph: nodes carrying local regression blocks, weighted undirected
//! edges, similarity kernels, and k-nearest-neighbor construction.
//!
//! Each node holds a local design/response block (for the patient pipeline a
//! single observation row) plus a scalar exposure used by the
//! inverse-exposure kernel. Edges carry strictly positive weights that scale
//! the coefficient-difference penalty between adjacent nodes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pairwise similarity kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `1 / (||f_i - f_j||_2 + eps_k)`.
    Euclidean,
    /// `(1 + pearson(f_i, f_j)) / 2`, floored at `eps_k`.
    Correlation,
    /// `1 / |w_i - w_j|` on scalar exposures, capped at `w_cap` for ties.
    InverseExposure,
}

/// How edge weights are computed when building a k-NN graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphWeighting {
    /// A pairwise kernel evaluated on node feature vectors.
    Pairwise(KernelKind),
    /// Inverse diffusion distance after `t` steps of a Gaussian-kernel
    /// random walk over all nodes.
    DiffusionMap,
}

/// Tunables shared by all kernels.
#[derive(Debug, Clone)]
pub struct KernelParams {
    /// Cap for the inverse-exposure kernel at (near-)ties.
    pub w_cap: f64,
    /// Floor / regularizer keeping weights strictly positive.
    pub eps_k: f64,
    /// Number of random-walk steps for the diffusion map.
    pub diffusion_t: usize,
    /// Gaussian bandwidth for the diffusion map; `None` uses the median
    /// pairwise distance.
    pub diffusion_bandwidth: Option<f64>,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            w_cap: 1e3,
            eps_k: 1e-6,
            diffusion_t: 1,
            diffusion_bandwidth: None,
        }
    }
}

/// Local data attached to one node.
#[derive(Debug, Clone)]
pub struct NodeData {
    pub node_id: usize,
    /// m_i x p design block.
    pub design: DMatrix<f64>,
    /// Length m_i response.
    pub response: DVector<f64>,
    /// Non-negative scalar exposure (e.g. cigarettes smoked per year).
    pub exposure: f64,
}

impl NodeData {
    pub fn new(
        node_id: usize,
        design: DMatrix<f64>,
        response: DVector<f64>,
        exposure: f64,
    ) -> Result<Self> {
        if design.nrows() != response.len() {
            return Err(Error::invalid(format!(
                "node {node_id}: design has {} rows but response has {} entries",
                design.nrows(),
                response.len()
            )));
        }
        if !exposure.is_finite() || exposure < 0.0 {
            return Err(Error::invalid(format!(
                "node {node_id}: exposure must be finite and non-negative, got {exposure}"
            )));
        }
        if design.iter().any(|v| !v.is_finite()) || response.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "node {node_id}: design/response must be finite"
            )));
        }
        Ok(NodeData {
            node_id,
            design,
            response,
            exposure,
        })
    }

    pub fn num_features(&self) -> usize {
        self.design.ncols()
    }

    /// Feature vector used by pairwise kernels: the column means of the
    /// local design block (the row itself when the node holds a single
    /// observation).
    pub fn feature_vector(&self) -> Vec<f64> {
        let m = self.design.nrows().max(1) as f64;
        (0..self.design.ncols())
            .map(|j| self.design.column(j).sum() / m)
            .collect()
    }
}

/// Undirected weighted edge between two distinct nodes.
///
/// Endpoints are stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, weight: f64) -> Result<Self> {
        if i == j {
            return Err(Error::invalid(format!("self-loop at node {i}")));
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::invalid(format!(
                "edge ({i},{j}): weight must be finite and positive, got {weight}"
            )));
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        Ok(Edge { a, b, weight })
    }
}

/// The problem graph: nodes with local data plus weighted undirected edges.
#[derive(Debug, Clone)]
pub struct ProblemGraph {
    nodes: Vec<NodeData>,
    edges: Vec<Edge>,
    /// Per node: (edge index, neighbor id) pairs.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl ProblemGraph {
    /// Builds a graph, validating node ids, feature-width consistency and
    /// edge uniqueness.
    pub fn new(nodes: Vec<NodeData>, edges: Vec<Edge>) -> Result<Self> {
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.node_id != i {
                return Err(Error::invalid(format!(
                    "node at position {i} has id {}; ids must be 0..n in order",
                    node.node_id
                )));
            }
        }
        if let Some(first) = nodes.first() {
            let p = first.num_features();
            for node in &nodes {
                if node.num_features() != p {
                    return Err(Error::invalid(format!(
                        "node {} has {} features, expected {p}",
                        node.node_id,
                        node.num_features()
                    )));
                }
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            if edge.a >= n || edge.b >= n {
                return Err(Error::invalid(format!(
                    "edge ({},{}) references a node outside 0..{n}",
                    edge.a, edge.b
                )));
            }
            if !seen.insert((edge.a, edge.b)) {
                return Err(Error::invalid(format!(
                    "duplicate edge ({},{})",
                    edge.a, edge.b
                )));
            }
            adjacency[edge.a].push((e, edge.b));
            adjacency[edge.b].push((e, edge.a));
        }
        Ok(ProblemGraph {
            nodes,
            edges,
            adjacency,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_features(&self) -> usize {
        self.nodes.first().map_or(0, NodeData::num_features)
    }

    pub fn node(&self, i: usize) -> &NodeData {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[NodeData] {
        &self.nodes
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Incident `(edge index, neighbor id)` pairs of node `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }
}

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{name} contains non-finite values")));
    }
    Ok(())
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::DegenerateKernel(
            "correlation kernel on a constant vector".into(),
        ));
    }
    Ok(cov / (va.sqrt() * vb.sqrt()))
}

/// Pairwise similarity weight between two feature vectors.
///
/// For [`KernelKind::InverseExposure`] the vectors are 1-dimensional
/// exposures and the weight is `1 / |w_i - w_j|`, capped at `w_cap` when the
/// gap falls below `1 / w_cap`.
pub fn kernel_weight(
    kind: KernelKind,
    features_i: &[f64],
    features_j: &[f64],
    params: &KernelParams,
) -> Result<f64> {
    if features_i.len() != features_j.len() {
        return Err(Error::invalid(format!(
            "feature vectors have lengths {} and {}",
            features_i.len(),
            features_j.len()
        )));
    }
    check_finite("features_i", features_i)?;
    check_finite("features_j", features_j)?;
    match kind {
        KernelKind::InverseExposure => {
            if features_i.len() != 1 {
                return Err(Error::invalid(
                    "inverse-exposure kernel expects 1-dimensional exposures",
                ));
            }
            let gap = (features_i[0] - features_j[0]).abs();
            if gap < 1.0 / params.w_cap {
                Ok(params.w_cap)
            } else {
                Ok(1.0 / gap)
            }
        }
        KernelKind::Euclidean => {
            let dist = features_i
                .iter()
                .zip(features_j)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok(1.0 / (dist + params.eps_k))
        }
        KernelKind::Correlation => {
            if features_i.len() < 2 {
                return Err(Error::DegenerateKernel(
                    "correlation kernel needs at least 2 features".into(),
                ));
            }
            let r = pearson(features_i, features_j)?;
            Ok(((1.0 + r) / 2.0).max(params.eps_k))
        }
    }
}

/// Squared diffusion distances between all pairs of rows of `features` after
/// `t` steps of the row-stochastic Gaussian-kernel random walk.
///
/// With kernel `K_ij = exp(-||x_i - x_j||^2 / (2 h^2))`, degrees
/// `d_i = sum_j K_ij` and transition matrix `P = D^-1 K`, the squared
/// diffusion distance is `sum_k (P^t_ik - P^t_jk)^2 / pi_k` where
/// `pi_k = d_k / sum(d)` is the stationary distribution.
fn diffusion_distance_sq(features: &DMatrix<f64>, t: usize, bandwidth: f64) -> Result<DMatrix<f64>> {
    let n = features.nrows();
    if !bandwidth.is_finite() || bandwidth <= 0.0 {
        return Err(Error::invalid(format!(
            "diffusion bandwidth must be positive, got {bandwidth}"
        )));
    }
    if t == 0 {
        return Err(Error::invalid("diffusion step count must be at least 1"));
    }
    let mut kernel = DMatrix::zeros(n, n);
    let mut any_positive_dist = false;
    for i in 0..n {
        for j in 0..n {
            let d2 = (features.row(i) - features.row(j)).norm_squared();
            if d2 > 0.0 {
                any_positive_dist = true;
            }
            kernel[(i, j)] = (-d2 / (2.0 * bandwidth * bandwidth)).exp();
        }
    }
    if !any_positive_dist {
        return Err(Error::DegenerateKernel(
            "all points identical: diffusion kernel is singular".into(),
        ));
    }
    let degrees: Vec<f64> = (0..n).map(|i| kernel.row(i).sum()).collect();
    let total_degree: f64 = degrees.iter().sum();
    let mut transition = kernel.clone();
    for i in 0..n {
        transition.row_mut(i).scale_mut(1.0 / degrees[i]);
    }
    let mut power = transition.clone();
    for _ in 1..t {
        power = &power * &transition;
    }
    let mut dist_sq = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for k in 0..n {
                let diff = power[(i, k)] - power[(j, k)];
                acc += diff * diff * total_degree / degrees[k];
            }
            dist_sq[(i, j)] = acc;
            dist_sq[(j, i)] = acc;
        }
    }
    Ok(dist_sq)
}

fn median_pairwise_distance(features: &DMatrix<f64>) -> f64 {
    let n = features.nrows();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push((features.row(i) - features.row(j)).norm());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if dists.is_empty() {
        0.0
    } else {
        dists[dists.len() / 2]
    }
}

/// Diffusion-map similarity between rows `i` and `j` of `features_all`:
/// `1 / (diffusion distance + eps_k)` after `t` random-walk steps.
pub fn diffusion_weight(
    features_all: &DMatrix<f64>,
    i: usize,
    j: usize,
    t: usize,
    bandwidth: f64,
    eps_k: f64,
) -> Result<f64> {
    let n = features_all.nrows();
    if i >= n || j >= n {
        return Err(Error::invalid(format!(
            "node index out of range: {i}, {j} with {n} rows"
        )));
    }
    if features_all.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("features contain non-finite values"));
    }
    let dist_sq = diffusion_distance_sq(features_all, t, bandwidth)?;
    Ok(1.0 / (dist_sq[(i, j)].sqrt() + eps_k))
}

/// Builds the symmetric k-nearest-neighbor graph: each node is connected to
/// its `k` largest-weight peers and the edge sets are merged by union, so
/// every node ends with degree at least `k`.
pub fn build_knn_graph(
    nodes: Vec<NodeData>,
    weighting: GraphWeighting,
    k: usize,
    params: &KernelParams,
) -> Result<ProblemGraph> {
    let n = nodes.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "k-NN graph needs at least 2 nodes, got {n}"
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "neighbor count must satisfy 1 <= k < n, got k={k}, n={n}"
        )));
    }

    let weights = pairwise_weights(&nodes, weighting, params)?;

    let mut edge_set = std::collections::BTreeSet::new();
    for i in 0..n {
        let mut candidates: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        candidates.sort_by(|&a, &b| {
            weights[(i, b)]
                .partial_cmp(&weights[(i, a)])
                .unwrap()
                .then(a.cmp(&b))
        });
        for &j in candidates.iter().take(k) {
            edge_set.insert((i.min(j), i.max(j)));
        }
    }
    let edges = edge_set
        .into_iter()
        .map(|(a, b)| Edge::new(a, b, weights[(a, b)]))
        .collect::<Result<Vec<_>>>()?;
    ProblemGraph::new(nodes, edges)
}

fn pairwise_weights(
    nodes: &[NodeData],
    weighting: GraphWeighting,
    params: &KernelParams,
) -> Result<DMatrix<f64>> {
    let n = nodes.len();
    let mut weights = DMatrix::zeros(n, n);
    match weighting {
        GraphWeighting::Pairwise(kind) => {
            let features: Vec<Vec<f64>> = nodes
                .iter()
                .map(|node| match kind {
                    KernelKind::InverseExposure => vec![node.exposure],
                    _ => node.feature_vector(),
                })
                .collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = kernel_weight(kind, &features[i], &features[j], params)?;
                    weights[(i, j)] = w;
                    weights[(j, i)] = w;
                }
            }
        }
        GraphWeighting::DiffusionMap => {
            let p = nodes[0].num_features();
            let mut features = DMatrix::zeros(n, p);
            for (i, node) in nodes.iter().enumerate() {
                let f = node.feature_vector();
                for (j, &v) in f.iter().enumerate() {
                    features[(i, j)] = v;
                }
            }
            let bandwidth = params
                .diffusion_bandwidth
                .unwrap_or_else(|| median_pairwise_distance(&features));
            let dist_sq = diffusion_distance_sq(&features, params.diffusion_t, bandwidth)?;
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = 1.0 / (dist_sq[(i, j)].sqrt() + params.eps_k);
                    weights[(i, j)] = w;
                    weights[(j, i)] = w;
                }
            }
        }
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    fn params() -> KernelParams {
        KernelParams::default()
    }

    fn node_with_exposure(id: usize, exposure: f64) -> NodeData {
        NodeData::new(
            id,
            DMatrix::from_row_slice(1, 2, &[exposure, 1.0]),
            DVector::from_vec(vec![0.0]),
            exposure,
        )
        .unwrap()
    }

    #[test]
    fn inverse_exposure_basic() {
        let w = kernel_weight(KernelKind::InverseExposure, &[30.0], &[20.0], &params()).unwrap();
        assert!((w - 0.1).abs() < 1e-12);
    }

    #[test]
    fn inverse_exposure_tie_caps() {
        let w = kernel_weight(KernelKind::InverseExposure, &[10.0], &[10.0], &params()).unwrap();
        assert_eq!(w, 1e3);
    }

    #[test]
    fn euclidean_zero_distance() {
        let w = kernel_weight(KernelKind::Euclidean, &[1.0, 2.0], &[1.0, 2.0], &params()).unwrap();
        assert!((w - 1e6).abs() < 1e-6);
    }

    #[test]
    fn correlation_constant_vector_is_degenerate() {
        let err = kernel_weight(
            KernelKind::Correlation,
            &[1.0, 1.0, 1.0],
            &[1.0, 2.0, 3.0],
            &params(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateKernel(_)));
    }

    #[test]
    fn non_finite_input_rejected() {
        let err =
            kernel_weight(KernelKind::Euclidean, &[f64::NAN, 0.0], &[0.0, 0.0], &params())
                .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn diffusion_identical_rows_hit_floor() {
        let features = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        let w = diffusion_weight(&features, 0, 1, 1, 1.0, 1e-6).unwrap();
        assert!((w - 1e6).abs() < 1e-3);
    }

    #[test]
    fn diffusion_symmetric_pair() {
        let features = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let w01 = diffusion_weight(&features, 0, 1, 1, 1.0, 1e-6).unwrap();
        let w10 = diffusion_weight(&features, 1, 0, 1, 1.0, 1e-6).unwrap();
        assert_eq!(w01, w10);
    }

    #[test]
    fn diffusion_all_identical_is_degenerate() {
        let features = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let err = diffusion_weight(&features, 0, 1, 1, 1.0, 1e-6).unwrap_err();
        assert!(matches!(err, Error::DegenerateKernel(_)));
    }

    /// Spectral route: with `S = D^-1/2 K D^-1/2 = U L U^T`, the squared
    /// diffusion distance equals
    /// `sum(d) * sum_l lambda_l^2t (u_l(i)/sqrt(d_i) - u_l(j)/sqrt(d_j))^2`.
    fn diffusion_weight_eigen_oracle(
        features: &DMatrix<f64>,
        i: usize,
        j: usize,
        t: usize,
        bandwidth: f64,
        eps_k: f64,
    ) -> f64 {
        let n = features.nrows();
        let mut kernel = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let d2 = (features.row(a) - features.row(b)).norm_squared();
                kernel[(a, b)] = (-d2 / (2.0 * bandwidth * bandwidth)).exp();
            }
        }
        let degrees: Vec<f64> = (0..n).map(|a| kernel.row(a).sum()).collect();
        let total: f64 = degrees.iter().sum();
        let mut sym = kernel;
        for a in 0..n {
            for b in 0..n {
                sym[(a, b)] /= (degrees[a] * degrees[b]).sqrt();
            }
        }
        let eig = SymmetricEigen::new(sym);
        let mut dist_sq = 0.0;
        for l in 0..n {
            let lam = eig.eigenvalues[l];
            let psi_i = eig.eigenvectors[(i, l)] / degrees[i].sqrt();
            let psi_j = eig.eigenvectors[(j, l)] / degrees[j].sqrt();
            dist_sq += total * lam.powi(2 * t as i32) * (psi_i - psi_j).powi(2);
        }
        1.0 / (dist_sq.max(0.0).sqrt() + eps_k)
    }

    #[test]
    fn diffusion_matches_eigen_oracle() {
        let features = DMatrix::from_row_slice(
            5,
            2,
            &[0.3, -1.2, 1.7, 0.4, -0.8, 0.9, 2.1, -0.3, -1.5, -1.1],
        );
        for t in [1usize, 2, 3] {
            for (i, j) in [(0usize, 1usize), (1, 3), (2, 4)] {
                let got = diffusion_weight(&features, i, j, t, 1.3, 1e-6).unwrap();
                let want = diffusion_weight_eigen_oracle(&features, i, j, t, 1.3, 1e-6);
                assert!(
                    (got - want).abs() < 1e-8,
                    "t={t} pair=({i},{j}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn knn_three_nodes_k2_is_triangle() {
        let nodes = vec![
            node_with_exposure(0, 0.0),
            node_with_exposure(1, 5.0),
            node_with_exposure(2, 9.0),
        ];
        let graph = build_knn_graph(
            nodes,
            GraphWeighting::Pairwise(KernelKind::InverseExposure),
            2,
            &params(),
        )
        .unwrap();
        assert_eq!(graph.num_edges(), 3);
        for i in 0..3 {
            assert_eq!(graph.degree(i), 2);
        }
    }

    #[test]
    fn knn_union_symmetrization() {
        let nodes = vec![
            node_with_exposure(0, 0.0),
            node_with_exposure(1, 1.0),
            node_with_exposure(2, 100.0),
        ];
        let graph = build_knn_graph(
            nodes,
            GraphWeighting::Pairwise(KernelKind::InverseExposure),
            1,
            &params(),
        )
        .unwrap();
        let pairs: Vec<(usize, usize)> = graph.edges().iter().map(|e| (e.a, e.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn knn_too_few_nodes() {
        let nodes = vec![node_with_exposure(0, 1.0)];
        let err = build_knn_graph(
            nodes,
            GraphWeighting::Pairwise(KernelKind::InverseExposure),
            1,
            &params(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn knn_degree_lower_bound() {
        let mut rng_state = 42u64;
        let mut next = || {
            // xorshift, plenty for test data
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state % 10_000) as f64 / 100.0
        };
        let nodes: Vec<NodeData> = (0..20).map(|i| node_with_exposure(i, next())).collect();
        let graph = build_knn_graph(
            nodes,
            GraphWeighting::Pairwise(KernelKind::InverseExposure),
            5,
            &params(),
        )
        .unwrap();
        for i in 0..20 {
            assert!(graph.degree(i) >= 5, "node {i} has degree {}", graph.degree(i));
        }
    }

    #[test]
    fn edge_rejects_self_loop_and_bad_weight() {
        assert!(Edge::new(3, 3, 1.0).is_err());
        assert!(Edge::new(0, 1, 0.0).is_err());
        assert!(Edge::new(0, 1, f64::NAN).is_err());
    }

    #[test]
    fn graph_rejects_duplicate_edges() {
        let nodes = vec![node_with_exposure(0, 0.0), node_with_exposure(1, 1.0)];
        let edges = vec![Edge::new(0, 1, 1.0).unwrap(), Edge::new(1, 0, 2.0).unwrap()];
        assert!(ProblemGraph::new(nodes, edges).is_err());
    }

    proptest! {
        #[test]
        fn kernel_symmetry(
            a in proptest::collection::vec(-50.0f64..50.0, 3),
            b in proptest::collection::vec(-50.0f64..50.0, 3),
        ) {
            let p = params();
            for kind in [KernelKind::Euclidean, KernelKind::Correlation] {
                let wab = kernel_weight(kind, &a, &b, &p);
                let wba = kernel_weight(kind, &b, &a, &p);
                match (wab, wba) {
                    (Ok(x), Ok(y)) => prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0)),
                    (Err(_), Err(_)) => {}
                    _ => prop_assert!(false, "asymmetric error behavior"),
                }
            }
            let wab = kernel_weight(KernelKind::InverseExposure, &a[..1], &b[..1], &p).unwrap();
            let wba = kernel_weight(KernelKind::InverseExposure, &b[..1], &a[..1], &p).unwrap();
            prop_assert_eq!(wab, wba);
        }

        #[test]
        fn kernel_positivity(
            a in proptest::collection::vec(-50.0f64..50.0, 4),
            b in proptest::collection::vec(-50.0f64..50.0, 4),
        ) {
            let p = params();
            if let Ok(w) = kernel_weight(KernelKind::Euclidean, &a, &b, &p) {
                prop_assert!(w > 0.0 && w <= 1.0 / p.eps_k);
            }
            if let Ok(w) = kernel_weight(KernelKind::Correlation, &a, &b, &p) {
                prop_assert!(w > 0.0 && w <= 1.0);
            }
            let w = kernel_weight(KernelKind::InverseExposure, &a[..1], &b[..1], &p).unwrap();
            prop_assert!(w > 0.0 && w <= p.w_cap);
        }

        #[test]
        fn knn_graph_invariants(
            exposures in proptest::collection::vec(0.0f64..100.0, 5..15),
            k in 1usize..4,
        ) {
            let n = exposures.len();
            prop_assume!(k < n);
            let nodes: Vec<NodeData> = exposures
                .iter()
                .enumerate()
                .map(|(i, &e)| node_with_exposure(i, e))
                .collect();
            let graph = build_knn_graph(
                nodes,
                GraphWeighting::Pairwise(KernelKind::InverseExposure),
                k,
                &params(),
            )
            .unwrap();
            let mut seen = std::collections::BTreeSet::new();
            for edge in graph.edges() {
                prop_assert!(edge.a < edge.b);
                prop_assert!(edge.weight > 0.0);
                prop_assert!(seen.insert((edge.a, edge.b)));
            }
            for i in 0..n {
                prop_assert!(graph.degree(i) >= k);
            }
        }
    }
}
