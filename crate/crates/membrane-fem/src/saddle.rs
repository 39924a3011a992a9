//! Assembly and solution of the discrete constrained saddle-point systems:
//! the Lagrange-multiplier form with unknowns (u, w, lambda, p_bar, q_bar)
//! and the penalty form with unknowns (u, w, p_bar, q_bar).
//!
//! One monolithic symmetric indefinite sparse factorization per solve; mean
//! value constraints are imposed through explicit scalar multipliers so the
//! system stays square and symmetric.

use std::sync::Arc;

use crate::assembly::{
    assemble_mass, assemble_stiffness, form_matrix, mean_vector, point_eval_matrix, FormWeights,
    PointEvalMatrix,
};
use crate::error::{Error, Result};
use crate::ldl::{LdltFactor, LdltOptions};
use crate::space::{FEFunction, FESpace};
use crate::sparse::SparseSymMatrix;

/// Penalty parameters below this floor are rejected outright.
pub const EPSILON_FLOOR: f64 = 1e-14;

/// Penalty parameters below this threshold trigger a conditioning warning in
/// the diagnostics (the solve still proceeds; refinement usually recovers).
pub const EPSILON_WARN: f64 = 1e-10;

/// The penalty value that emulates hard constraints in the experiments.
pub const HARD_CONSTRAINT_EPSILON: f64 = 1e-8;

const SOLVE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConstraintMode {
    Lagrange,
    Penalty { epsilon: f64 },
}

/// Configuration of one constrained solve.
#[derive(Clone, Debug)]
pub struct SaddleConfig {
    pub mode: ConstraintMode,
    pub mean_constraint_u: bool,
    pub mean_constraint_w: bool,
    pub dirichlet: bool,
    pub constraint_points: Vec<[f64; 3]>,
    /// Constraint targets Z, one per constraint point.
    pub targets: Vec<f64>,
}

impl SaddleConfig {
    pub fn lagrange(points: Vec<[f64; 3]>, targets: Vec<f64>) -> Self {
        SaddleConfig {
            mode: ConstraintMode::Lagrange,
            mean_constraint_u: false,
            mean_constraint_w: false,
            dirichlet: false,
            constraint_points: points,
            targets,
        }
    }

    pub fn penalty(points: Vec<[f64; 3]>, targets: Vec<f64>, epsilon: f64) -> Self {
        SaddleConfig {
            mode: ConstraintMode::Penalty { epsilon },
            mean_constraint_u: false,
            mean_constraint_w: false,
            dirichlet: false,
            constraint_points: points,
            targets,
        }
    }

    /// Penalty preset that emulates hard constraints (epsilon = 1e-8).
    pub fn hard_constraint_emulation(points: Vec<[f64; 3]>, targets: Vec<f64>) -> Self {
        Self::penalty(points, targets, HARD_CONSTRAINT_EPSILON)
    }

    pub fn with_mean_constraints(mut self) -> Self {
        self.mean_constraint_u = true;
        self.mean_constraint_w = true;
        self
    }

    pub fn with_dirichlet(mut self) -> Self {
        self.dirichlet = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.constraint_points.len() != self.targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} constraint points but {} targets",
                self.constraint_points.len(),
                self.targets.len()
            )));
        }
        if let ConstraintMode::Penalty { epsilon } = self.mode {
            if epsilon < EPSILON_FLOOR {
                return Err(Error::EpsilonBelowFloor(epsilon));
            }
        }
        Ok(())
    }
}

/// The assembled bilinear forms of the splitting system.
#[derive(Clone, Debug)]
pub struct AssembledForms {
    pub c: SparseSymMatrix,
    pub b: SparseSymMatrix,
    pub m: SparseSymMatrix,
}

impl AssembledForms {
    /// Assembles stiffness and mass once and combines them with the given
    /// c-weights; b and m always use their canonical weights.
    pub fn new(space: &FESpace, c_weights: FormWeights) -> Result<Self> {
        let k = assemble_stiffness(space)?;
        let m = assemble_mass(space)?;
        let c = form_matrix(&k, &m, c_weights)?;
        let b = form_matrix(&k, &m, FormWeights::b())?;
        let m = form_matrix(&k, &m, FormWeights::m())?;
        Ok(AssembledForms { c, b, m })
    }

    fn eliminate(&self, mask: &[bool]) -> Self {
        AssembledForms {
            c: self.c.eliminate(mask),
            b: self.b.eliminate(mask),
            m: self.m.eliminate(mask),
        }
    }
}

/// Index layout of the assembled block matrix.
#[derive(Clone, Copy, Debug)]
pub struct BlockLayout {
    pub ndof: usize,
    pub num_constraints: usize,
    /// Offset of the lambda block (Lagrange mode only).
    pub lambda_offset: Option<usize>,
    pub p_bar_index: Option<usize>,
    pub q_bar_index: Option<usize>,
    pub dim: usize,
}

pub struct BlockSystem {
    pub matrix: SparseSymMatrix,
    pub rhs: Vec<f64>,
    pub layout: BlockLayout,
}

/// Solver diagnostics carried by every solution bundle.
#[derive(Clone, Debug)]
pub struct BundleDiagnostics {
    pub rel_residual: f64,
    pub refine_iterations: usize,
    pub regularized_pivots: usize,
    pub min_pivot_abs: f64,
    pub constraint_violation: f64,
    pub mean_violation_u: f64,
    pub mean_violation_w: f64,
    pub epsilon_warning: Option<String>,
}

/// Discrete solution of one constrained solve.
pub struct SolutionBundle {
    pub u: FEFunction,
    pub w: FEFunction,
    /// Lagrange multipliers (absent in penalty mode).
    pub lambda: Option<Vec<f64>>,
    pub p_bar: Option<f64>,
    pub q_bar: Option<f64>,
    /// (T u - Z) / epsilon, the a posteriori multiplier in penalty mode.
    pub multiplier_recovery: Option<Vec<f64>>,
    pub diagnostics: BundleDiagnostics,
}

/// Assembles the symmetric block matrix and right-hand side.
///
/// Lagrange layout (unknowns u, w, lambda, p_bar, q_bar):
/// rows [C B T^t a 0; B -M 0 0 a; T 0 0 0 0; a^t 0 0 0 0; 0 a^t 0 0 0],
/// rhs [F; G; Z; 0; 0]. Penalty layout omits the lambda block, replaces C by
/// C + (1/eps) T^t T and F by F + (1/eps) T^t Z. Blocks for absent
/// multipliers are omitted per config. The inputs must already have
/// Dirichlet rows eliminated when `dirichlet_mask` is given; the mask only
/// adds the decoupled unit diagonals.
pub fn assemble_block_system(
    forms: &AssembledForms,
    t: &PointEvalMatrix,
    a: Option<&[f64]>,
    f_load: &[f64],
    g_load: &[f64],
    config: &SaddleConfig,
    dirichlet_mask: Option<&[bool]>,
) -> Result<BlockSystem> {
    config.validate()?;
    let n = forms.c.dim();
    if forms.b.dim() != n || forms.m.dim() != n || t.ndof != n {
        return Err(Error::DimensionMismatch(
            "form and constraint dimensions disagree".to_string(),
        ));
    }
    if f_load.len() != n || g_load.len() != n {
        return Err(Error::DimensionMismatch(
            "load vector length != ndof".to_string(),
        ));
    }
    let num_points = t.num_points();
    let lambda_offset = match config.mode {
        ConstraintMode::Lagrange => Some(2 * n),
        ConstraintMode::Penalty { .. } => None,
    };
    let mut next = match lambda_offset {
        Some(off) => off + num_points,
        None => 2 * n,
    };
    let p_bar_index = config.mean_constraint_u.then(|| {
        let idx = next;
        next += 1;
        idx
    });
    let q_bar_index = config.mean_constraint_w.then(|| {
        let idx = next;
        next += 1;
        idx
    });
    let dim = next;
    if (config.mean_constraint_u || config.mean_constraint_w) && a.is_none() {
        return Err(Error::DimensionMismatch(
            "mean constraint requested without a mean vector".to_string(),
        ));
    }

    let mut triplets: Vec<(usize, usize, f64)> =
        Vec::with_capacity(forms.c.nnz_upper() + 2 * forms.b.nnz_upper() + forms.m.nnz_upper() + dim);
    // (u, u): C, plus the penalty term (1/eps) T^t T on constraint vertices.
    for (i, j, v) in forms.c.upper_entries() {
        triplets.push((i, j, v));
    }
    if let ConstraintMode::Penalty { epsilon } = config.mode {
        for &v in &t.rows {
            triplets.push((v, v, 1.0 / epsilon));
        }
    }
    // (u, w): the full B block sits strictly above the diagonal.
    for (i, j, v) in forms.b.upper_entries() {
        triplets.push((i, n + j, v));
        if i != j {
            triplets.push((j, n + i, v));
        }
    }
    // (w, w): -M.
    for (i, j, v) in forms.m.upper_entries() {
        triplets.push((n + i, n + j, -v));
    }
    // (u, lambda): T^t.
    if let Some(off) = lambda_offset {
        for (r, &v) in t.rows.iter().enumerate() {
            triplets.push((v, off + r, 1.0));
        }
    }
    // Mean-value multiplier columns.
    if let Some(p_idx) = p_bar_index {
        for (i, &ai) in a.unwrap().iter().enumerate() {
            if ai != 0.0 {
                triplets.push((i, p_idx, ai));
            }
        }
    }
    if let Some(q_idx) = q_bar_index {
        for (i, &ai) in a.unwrap().iter().enumerate() {
            if ai != 0.0 {
                triplets.push((n + i, q_idx, ai));
            }
        }
    }
    // Decoupled unit rows for eliminated Dirichlet dofs.
    if let Some(mask) = dirichlet_mask {
        for (i, &masked) in mask.iter().enumerate() {
            if masked {
                triplets.push((i, i, 1.0));
                triplets.push((n + i, n + i, 1.0));
            }
        }
    }
    // Structural diagonal for the factorization.
    for k in 0..dim {
        triplets.push((k, k, 0.0));
    }

    let matrix = SparseSymMatrix::from_triplets(dim, &triplets);

    let mut rhs = vec![0.0; dim];
    rhs[..n].copy_from_slice(f_load);
    rhs[n..2 * n].copy_from_slice(g_load);
    match config.mode {
        ConstraintMode::Lagrange => {
            let off = lambda_offset.unwrap();
            rhs[off..off + num_points].copy_from_slice(&config.targets);
        }
        ConstraintMode::Penalty { epsilon } => {
            for (r, &v) in t.rows.iter().enumerate() {
                rhs[v] += config.targets[r] / epsilon;
            }
        }
    }

    Ok(BlockSystem {
        matrix,
        rhs,
        layout: BlockLayout {
            ndof: n,
            num_constraints: num_points,
            lambda_offset,
            p_bar_index,
            q_bar_index,
            dim,
        },
    })
}

/// Solves the discrete Lagrange-multiplier problem.
pub fn solve_lagrange(
    forms: &AssembledForms,
    space: &Arc<FESpace>,
    f_load: &[f64],
    g_load: &[f64],
    config: &SaddleConfig,
) -> Result<SolutionBundle> {
    assert!(
        matches!(config.mode, ConstraintMode::Lagrange),
        "solve_lagrange requires Lagrange mode"
    );
    solve(forms, space, f_load, g_load, config)
}

/// Solves the discrete penalty problem and recovers the multiplier.
pub fn solve_penalty(
    forms: &AssembledForms,
    space: &Arc<FESpace>,
    f_load: &[f64],
    g_load: &[f64],
    config: &SaddleConfig,
) -> Result<SolutionBundle> {
    assert!(
        matches!(config.mode, ConstraintMode::Penalty { .. }),
        "solve_penalty requires Penalty mode"
    );
    solve(forms, space, f_load, g_load, config)
}

/// Builds the block system for a solve, applying Dirichlet elimination as
/// configured. Returns the system together with the point-evaluation
/// operator, the (eliminated) mean vector and the active mask.
pub fn prepare_system(
    forms: &AssembledForms,
    space: &FESpace,
    f_load: &[f64],
    g_load: &[f64],
    config: &SaddleConfig,
) -> Result<(BlockSystem, PointEvalMatrix, Option<Vec<f64>>, Option<Vec<bool>>)> {
    config.validate()?;
    let t = point_eval_matrix(space, &config.constraint_points)?;

    let mask = config.dirichlet.then(|| space.dirichlet_mask.clone());
    if let Some(mask) = &mask {
        for (&v, p) in t.rows.iter().zip(&config.constraint_points) {
            if mask[v] {
                return Err(Error::ConstraintOnBoundary(p[0], p[1], p[2]));
            }
        }
    }

    let needs_mean = config.mean_constraint_u || config.mean_constraint_w;
    let mut a = if needs_mean {
        Some(mean_vector(space)?)
    } else {
        None
    };

    let (forms_active, f_active, g_active);
    match &mask {
        Some(mask) => {
            forms_active = forms.eliminate(mask);
            let zero_at = |v: &[f64]| -> Vec<f64> {
                v.iter()
                    .enumerate()
                    .map(|(i, &x)| if mask[i] { 0.0 } else { x })
                    .collect()
            };
            f_active = zero_at(f_load);
            g_active = zero_at(g_load);
            if let Some(a_vec) = &mut a {
                for (i, &m) in mask.iter().enumerate() {
                    if m {
                        a_vec[i] = 0.0;
                    }
                }
            }
        }
        None => {
            forms_active = forms.clone();
            f_active = f_load.to_vec();
            g_active = g_load.to_vec();
        }
    }

    let system = assemble_block_system(
        &forms_active,
        &t,
        a.as_deref(),
        &f_active,
        &g_active,
        config,
        mask.as_deref(),
    )?;
    Ok((system, t, a, mask))
}

/// Mode-dispatching solve shared by both entry points.
pub fn solve(
    forms: &AssembledForms,
    space: &Arc<FESpace>,
    f_load: &[f64],
    g_load: &[f64],
    config: &SaddleConfig,
) -> Result<SolutionBundle> {
    let (system, t, a, mask) = prepare_system(forms, space, f_load, g_load, config)?;

    let factor = LdltFactor::new(&system.matrix, LdltOptions::default())?;
    let (x, diag) = factor.solve_refined(&system.matrix, &system.rhs);
    if !diag.rel_residual.is_finite() || diag.rel_residual > SOLVE_TOL {
        return Err(Error::ToleranceNotMet(
            diag.rel_residual,
            diag.refine_iterations,
            diag.regularized_pivots,
        ));
    }

    let n = system.layout.ndof;
    let mut u_coeffs = x[..n].to_vec();
    let mut w_coeffs = x[n..2 * n].to_vec();
    if let Some(mask) = &mask {
        // Masked entries are decoupled identity rows with zero rhs; pin them
        // to exact zeros.
        for (i, &m) in mask.iter().enumerate() {
            if m {
                u_coeffs[i] = 0.0;
                w_coeffs[i] = 0.0;
            }
        }
    }

    let lambda = system
        .layout
        .lambda_offset
        .map(|off| x[off..off + system.layout.num_constraints].to_vec());
    let p_bar = system.layout.p_bar_index.map(|i| x[i]);
    let q_bar = system.layout.q_bar_index.map(|i| x[i]);

    let t_u = t.apply(&u_coeffs);
    let constraint_violation = t_u
        .iter()
        .zip(&config.targets)
        .fold(0.0f64, |acc, (tu, z)| acc.max((tu - z).abs()));

    let (multiplier_recovery, epsilon_warning) = match config.mode {
        ConstraintMode::Penalty { epsilon } => {
            let recovery = t_u
                .iter()
                .zip(&config.targets)
                .map(|(tu, z)| (tu - z) / epsilon)
                .collect();
            let warning = (epsilon < EPSILON_WARN).then(|| {
                format!("epsilon {epsilon:.1e} is below the conditioning heuristic {EPSILON_WARN:.0e}")
            });
            (Some(recovery), warning)
        }
        ConstraintMode::Lagrange => {
            let znorm = config
                .targets
                .iter()
                .fold(0.0f64, |acc, z| acc.max(z.abs()));
            if constraint_violation > 1e-9 * (1.0 + znorm) {
                return Err(Error::ToleranceNotMet(
                    constraint_violation,
                    diag.refine_iterations,
                    diag.regularized_pivots,
                ));
            }
            (None, None)
        }
    };

    let (mean_violation_u, mean_violation_w) = match &a {
        Some(a_vec) => {
            let dot = |coeffs: &[f64]| -> f64 {
                a_vec.iter().zip(coeffs).map(|(ai, ci)| ai * ci).sum()
            };
            let total_area: f64 = a_vec.iter().sum();
            let check = |coeffs: &[f64], active: bool| -> Result<f64> {
                if !active {
                    return Ok(0.0);
                }
                let v: f64 = dot(coeffs);
                let scale = coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
                if v.abs() > 1e-9 * total_area * scale.max(1e-300) {
                    return Err(Error::ToleranceNotMet(v.abs(), 0, 0));
                }
                Ok(v.abs())
            };
            (
                check(&u_coeffs, config.mean_constraint_u)?,
                check(&w_coeffs, config.mean_constraint_w)?,
            )
        }
        None => (0.0, 0.0),
    };

    Ok(SolutionBundle {
        u: FEFunction::new(space.clone(), u_coeffs),
        w: FEFunction::new(space.clone(), w_coeffs),
        lambda,
        p_bar,
        q_bar,
        multiplier_recovery,
        diagnostics: BundleDiagnostics {
            rel_residual: diag.rel_residual,
            refine_iterations: diag.refine_iterations,
            regularized_pivots: diag.regularized_pivots,
            min_pivot_abs: diag.min_pivot_abs,
            constraint_violation,
            mean_violation_u,
            mean_violation_w,
            epsilon_warning,
        },
    })
}
