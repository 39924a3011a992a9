use membrane_fem::mesh::{build_disc_mesh, mesh_size};
use membrane_fem::norms::{eoc, fe_error_norm, lambda_error, NormKind};
use membrane_fem::problems::{build_space, exact_fields, ProblemKind};
use membrane_fem::saddle::{solve_lagrange, AssembledForms, ConstraintMode};

fn main() {
    let problem = exact_fields(ProblemKind::Flat);
    let mut prev: Option<(f64, f64, f64, f64, f64, f64)> = None;
    for level in 0..=6 {
        let t0 = std::time::Instant::now();
        let space = build_space(ProblemKind::Flat, level).unwrap();
        let h = mesh_size(&space.mesh).h;
        let forms = AssembledForms::new(&space, problem.c_weights).unwrap();
        let n = space.ndof;
        let config = problem.config(&space.mesh, ConstraintMode::Lagrange);
        let bundle = solve_lagrange(&forms, &space, &vec![0.0; n], &vec![0.0; n], &config).unwrap();
        let (_, l2_u) = fe_error_norm(&space, &bundle.u, &problem.u, NormKind::L2, 4).unwrap();
        let (_, h1_u) = fe_error_norm(&space, &bundle.u, &problem.u, NormKind::H1, 4).unwrap();
        let (_, l2_w) = fe_error_norm(&space, &bundle.w, &problem.w, NormKind::L2, 4).unwrap();
        let (_, w1p_w) = fe_error_norm(&space, &bundle.w, &problem.w, NormKind::W1p(4.0/3.0), 4).unwrap();
        let el = lambda_error(bundle.lambda.as_ref().unwrap(), problem.lambda_exact.as_ref().unwrap()).unwrap();
        print!("lvl {level} h={h:.5} n={n} L2u={l2_u:.4e} H1u={h1_u:.4e} L2w={l2_w:.4e} W1pw={w1p_w:.4e} lam={el:.4e}");
        if let Some((ph, p1, p2, p3, p4, p5)) = prev {
            print!(" | EOC {:.5} {:.5} {:.5} {:.5} {:.5}",
                eoc(p1, l2_u, ph, h).unwrap(), eoc(p2, h1_u, ph, h).unwrap(),
                eoc(p3, l2_w, ph, h).unwrap(), eoc(p4, w1p_w, ph, h).unwrap(),
                eoc(p5, el, ph, h).unwrap());
        }
        println!(" [{} ms] lam0={:.6}", t0.elapsed().as_millis(), bundle.lambda.as_ref().unwrap()[0]);
        prev = Some((h, l2_u, h1_u, l2_w, w1p_w, el));
    }
    println!("-8pi = {:.6}", -8.0*std::f64::consts::PI);
    let _ = build_disc_mesh(0).unwrap().validate().unwrap();
}
