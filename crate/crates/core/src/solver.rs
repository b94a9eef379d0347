//! ADMM solver for graph-regularized regression with a combined L2+L1
//! penalty on coefficient differences across edges:
//!
//! ```text
//! min  sum_i f_i(x_i)
//!      + lambda (1-alpha) sum_(i,j) w_ij ||x_i - x_j||_2
//!      + lambda alpha     sum_(i,j) w_ij ||x_i - x_j||_1
//! ```
//!
//! with `f_i(x) = ||y_i - X_i x||^2 + mu ||x||^2`. Each iteration runs all
//! node updates (ridge-augmented least squares against the consensus
//! targets), then all edge updates ([`crate::prox::edge_prox`]), then the
//! scaled dual updates. Stopping follows the usual scaled-dual residual
//! rule: `eps_pri = sqrt(n p) eps_abs + eps_rel max(||x||, ||z||)` and
//! `eps_dual = sqrt(n p) eps_abs + eps_rel rho ||u||`, where the x and z
//! norms stack the per-edge-endpoint copies appearing in the constraint.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::graph::{NodeData, ProblemGraph};
use crate::prox::{edge_prox, EdgeProxParams};

/// Solver hyperparameters.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Overall edge penalty strength.
    pub lambda: f64,
    /// L1 fraction of the edge penalty, in [0, 1].
    pub alpha: f64,
    /// Ridge strength on each node's coefficients.
    pub mu: f64,
    /// ADMM penalty.
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 1.0,
            alpha: 0.5,
            mu: 0.0,
            rho: 1.0,
            eps_abs: 1e-5,
            eps_rel: 1e-4,
            max_iters: 5000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.lambda,
            self.alpha,
            self.mu,
            self.rho,
            self.eps_abs,
            self.eps_rel,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("solver config contains non-finite values"));
        }
        if self.lambda < 0.0 || self.mu < 0.0 {
            return Err(Error::invalid("lambda and mu must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.rho <= 0.0 || self.eps_abs <= 0.0 || self.eps_rel <= 0.0 {
            return Err(Error::invalid("rho, eps_abs, eps_rel must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Consensus copies and scaled duals attached to one edge.
///
/// `z_ij`/`u_ij` belong to the lower-indexed endpoint, `z_ji`/`u_ji` to the
/// higher-indexed one.
#[derive(Debug, Clone)]
pub struct EdgeState {
    pub z_ij: DVector<f64>,
    pub z_ji: DVector<f64>,
    pub u_ij: DVector<f64>,
    pub u_ji: DVector<f64>,
}

impl EdgeState {
    fn zeros(p: usize) -> Self {
        EdgeState {
            z_ij: DVector::zeros(p),
            z_ji: DVector::zeros(p),
            u_ij: DVector::zeros(p),
            u_ji: DVector::zeros(p),
        }
    }
}

/// Fit result: per-node coefficients plus convergence diagnostics. The final
/// edge states are kept so the solution can seed a warm start.
#[derive(Debug, Clone)]
pub struct Solution {
    pub coefficients: Vec<DVector<f64>>,
    pub iterations: usize,
    pub primal_residuals: Vec<f64>,
    pub dual_residuals: Vec<f64>,
    pub converged: bool,
    pub objective: f64,
    pub edge_states: Vec<EdgeState>,
}

/// Node loss `||y - X x||^2 + mu ||x||^2`.
pub fn node_objective(node: &NodeData, x: &DVector<f64>, mu: f64) -> Result<f64> {
    if x.len() != node.num_features() {
        return Err(Error::invalid(format!(
            "node {}: coefficient vector has length {}, expected {}",
            node.node_id,
            x.len(),
            node.num_features()
        )));
    }
    let residual = &node.response - &node.design * x;
    Ok(residual.norm_squared() + mu * x.norm_squared())
}

/// Full objective of the fit evaluated at the given coefficients.
pub fn objective_value(
    graph: &ProblemGraph,
    coefficients: &[DVector<f64>],
    config: &SolverConfig,
) -> Result<f64> {
    if coefficients.len() != graph.num_nodes() {
        return Err(Error::invalid("one coefficient vector per node expected"));
    }
    let mut total = 0.0;
    for (node, x) in graph.nodes().iter().zip(coefficients) {
        total += node_objective(node, x, config.mu)?;
    }
    for edge in graph.edges() {
        let diff = &coefficients[edge.a] - &coefficients[edge.b];
        total += config.lambda * (1.0 - config.alpha) * edge.weight * diff.norm();
        total += config.lambda * config.alpha * edge.weight * diff.abs().sum();
    }
    Ok(total)
}

fn node_system(node: &NodeData, ridge: f64) -> DMatrix<f64> {
    let p = node.num_features();
    let mut system = node.design.transpose() * &node.design * 2.0;
    for k in 0..p {
        system[(k, k)] += ridge;
    }
    system
}

fn factor_node(
    node: &NodeData,
    mu: f64,
    rho: f64,
    degree: usize,
) -> Result<Cholesky<f64, Dyn>> {
    let system = node_system(node, 2.0 * mu + rho * degree as f64);
    Cholesky::new(system).ok_or_else(|| Error::Singular {
        node: node.node_id,
        reason: format!("mu={mu}, degree={degree}, design rank-deficient"),
    })
}

/// Exact node update: minimizes
/// `f_i(x) + sum_j (rho/2) ||x - v_j||^2` over `x`, where each `v_j` is a
/// neighbor target `z_ij - u_ij`.
pub fn x_update(
    node: &NodeData,
    neighbor_targets: &[DVector<f64>],
    config: &SolverConfig,
) -> Result<DVector<f64>> {
    config.validate()?;
    let p = node.num_features();
    for v in neighbor_targets {
        if v.len() != p {
            return Err(Error::invalid(format!(
                "node {}: neighbor target has length {}, expected {p}",
                node.node_id,
                v.len()
            )));
        }
    }
    let chol = factor_node(node, config.mu, config.rho, neighbor_targets.len())?;
    let mut rhs = node.design.transpose() * &node.response * 2.0;
    for v in neighbor_targets {
        rhs += v * config.rho;
    }
    Ok(chol.solve(&rhs))
}

/// Runs ADMM on the graph, optionally warm-started from a previous solution
/// on the same graph.
pub fn admm_fit(
    graph: &ProblemGraph,
    config: &SolverConfig,
    warm: Option<&Solution>,
) -> Result<Solution> {
    config.validate()?;
    let n = graph.num_nodes();
    if n == 0 {
        return Err(Error::invalid("graph has no nodes"));
    }
    let p = graph.num_features();
    let n_edges = graph.num_edges();

    let mut x: Vec<DVector<f64>> = match warm {
        Some(sol) => {
            if sol.coefficients.len() != n || sol.edge_states.len() != n_edges {
                return Err(Error::invalid(
                    "warm start does not match the graph dimensions",
                ));
            }
            if sol
                .coefficients
                .iter()
                .any(|v| v.len() != p)
            {
                return Err(Error::invalid("warm-start coefficient width mismatch"));
            }
            sol.coefficients.clone()
        }
        None => (0..n).map(|_| DVector::zeros(p)).collect(),
    };
    let mut states: Vec<EdgeState> = match warm {
        Some(sol) => sol.edge_states.clone(),
        None => (0..n_edges).map(|_| EdgeState::zeros(p)).collect(),
    };

    let factors: Vec<Cholesky<f64, Dyn>> = graph
        .nodes()
        .iter()
        .map(|node| factor_node(node, config.mu, config.rho, graph.degree(node.node_id)))
        .collect::<Result<Vec<_>>>()?;
    let rhs_base: Vec<DVector<f64>> = graph
        .nodes()
        .iter()
        .map(|node| node.design.transpose() * &node.response * 2.0)
        .collect();

    let scale = ((n * p) as f64).sqrt();
    let mut primal_residuals = Vec::new();
    let mut dual_residuals = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=config.max_iters {
        iterations = iter;

        for i in 0..n {
            let mut rhs = rhs_base[i].clone();
            for &(e, _) in graph.neighbors(i) {
                let state = &states[e];
                let (z, u) = if graph.edge(e).a == i {
                    (&state.z_ij, &state.u_ij)
                } else {
                    (&state.z_ji, &state.u_ji)
                };
                rhs.axpy(config.rho, z, 1.0);
                rhs.axpy(-config.rho, u, 1.0);
            }
            x[i] = factors[i].solve(&rhs);
            if x[i].iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { iteration: iter });
            }
        }

        let mut primal_sq = 0.0;
        let mut dual_sq = 0.0;
        let mut x_stack_sq = 0.0;
        let mut z_stack_sq = 0.0;
        let mut u_stack_sq = 0.0;

        for (e, edge) in graph.edges().iter().enumerate() {
            let params = EdgeProxParams::new(
                config.rho,
                config.lambda * (1.0 - config.alpha) * edge.weight,
                config.lambda * config.alpha * edge.weight,
            )?;
            let a = &x[edge.a] + &states[e].u_ij;
            let b = &x[edge.b] + &states[e].u_ji;
            let (z_ij, z_ji) = edge_prox(&a, &b, &params)?;

            dual_sq += config.rho.powi(2)
                * ((&z_ij - &states[e].z_ij).norm_squared()
                    + (&z_ji - &states[e].z_ji).norm_squared());

            let state = &mut states[e];
            state.z_ij = z_ij;
            state.z_ji = z_ji;
            state.u_ij += &x[edge.a] - &state.z_ij;
            state.u_ji += &x[edge.b] - &state.z_ji;

            primal_sq += (&x[edge.a] - &state.z_ij).norm_squared()
                + (&x[edge.b] - &state.z_ji).norm_squared();
            x_stack_sq += x[edge.a].norm_squared() + x[edge.b].norm_squared();
            z_stack_sq += state.z_ij.norm_squared() + state.z_ji.norm_squared();
            u_stack_sq += state.u_ij.norm_squared() + state.u_ji.norm_squared();
        }

        let primal = primal_sq.sqrt();
        let dual = dual_sq.sqrt();
        primal_residuals.push(primal);
        dual_residuals.push(dual);

        let eps_pri =
            scale * config.eps_abs + config.eps_rel * x_stack_sq.sqrt().max(z_stack_sq.sqrt());
        let eps_dual = scale * config.eps_abs + config.eps_rel * config.rho * u_stack_sq.sqrt();
        if primal <= eps_pri && dual <= eps_dual {
            converged = true;
            break;
        }
    }

    let objective = objective_value(graph, &x, config)?;
    Ok(Solution {
        coefficients: x,
        iterations,
        primal_residuals,
        dual_residuals,
        converged,
        objective,
        edge_states: states,
    })
}
