use membrane_fem::probes::residual_probe;
use membrane_fem::problems::{build_space, exact_fields, ProblemKind};
use membrane_fem::saddle::{AssembledForms, ConstraintMode};

fn main() {
    let problem = exact_fields(ProblemKind::Flat);
    for level in 1..=4 {
        let space = build_space(ProblemKind::Flat, level).unwrap();
        let forms = AssembledForms::new(&space, problem.c_weights).unwrap();
        let config = problem.config(&space.mesh, ConstraintMode::Lagrange);
        let (f, g) = problem.loads(&space, 4).unwrap();
        let r = residual_probe(&space, &forms, &config, &problem.u, &problem.w,
            &f, &g, problem.lambda_exact.as_ref().unwrap(), 0.0, 0.0).unwrap();
        println!("level {level}: residual {r:.6e}");
    }
}
