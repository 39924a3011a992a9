use membrane_fem::mesh::{build_hexcap_sphere, mesh_size};
use membrane_fem::norms::{energy_norm, eoc, fe_error_norm, l2_norm, lambda_error, NormKind};
use membrane_fem::problems::{exact_fields, ProblemKind};
use membrane_fem::saddle::{solve, solve_lagrange, solve_penalty, AssembledForms, ConstraintMode};
use membrane_fem::space::FESpace;
use std::sync::Arc;

fn hexcap_space(level: usize) -> Arc<FESpace> {
    FESpace::new(build_hexcap_sphere(level, 1.0).unwrap())
}

fn main() {
    let problem = exact_fields(ProblemKind::Sphere);

    println!("=== penalty sweep on fixed level-5 mesh, eps = 0.2 * 2^-k ===");
    let space = hexcap_space(5);
    let forms = AssembledForms::new(&space, problem.c_weights).unwrap();
    let (f, g) = problem.loads(&space, 4).unwrap();
    let lag = solve_lagrange(&forms, &space, &f, &g,
        &problem.config(&space.mesh, ConstraintMode::Lagrange)).unwrap();
    let lambda_h = lag.lambda.clone().unwrap();
    println!("lambda_h = {:?}", lambda_h);
    let mut prev: Option<(f64, f64, f64, f64, f64, f64)> = None;
    for k in 0..5 {
        let eps = 0.2 * 0.5f64.powi(k);
        let t0 = std::time::Instant::now();
        let bundle = solve_penalty(&forms, &space, &f, &g,
            &problem.config(&space.mesh, ConstraintMode::Penalty { epsilon: eps })).unwrap();
        let (_, l2_u) = fe_error_norm(&space, &bundle.u, &problem.u, NormKind::L2, 4).unwrap();
        let (_, h1_u) = fe_error_norm(&space, &bundle.u, &problem.u, NormKind::H1, 4).unwrap();
        let (_, l2_w) = fe_error_norm(&space, &bundle.w, &problem.w, NormKind::L2, 4).unwrap();
        let (_, w1p_w) = fe_error_norm(&space, &bundle.w, &problem.w, NormKind::W1p(4.0/3.0), 4).unwrap();
        let el = lambda_error(bundle.multiplier_recovery.as_ref().unwrap(), &lambda_h).unwrap();
        print!("eps={eps:.5} L2u={l2_u:.4e} H1u={h1_u:.4e} L2w={l2_w:.4e} W1pw={w1p_w:.4e} lam={el:.4e}");
        if let Some((pe, p1, p2, p3, p4, p5)) = prev {
            print!(" | EOC {:.4} {:.4} {:.4} {:.4} {:.4}",
                eoc(p1, l2_u, pe, eps).unwrap(), eoc(p2, h1_u, pe, eps).unwrap(),
                eoc(p3, l2_w, pe, eps).unwrap(), eoc(p4, w1p_w, pe, eps).unwrap(),
                eoc(p5, el, pe, eps).unwrap());
        }
        println!(" [{} ms]", t0.elapsed().as_millis());
        prev = Some((eps, l2_u, h1_u, l2_w, w1p_w, el));
    }

    println!("=== criterion-9 slopes on level 3 ===");
    let space3 = hexcap_space(3);
    let forms3 = AssembledForms::new(&space3, problem.c_weights).unwrap();
    let (f3, g3) = problem.loads(&space3, 4).unwrap();
    let lag3 = solve_lagrange(&forms3, &space3, &f3, &g3,
        &problem.config(&space3.mesh, ConstraintMode::Lagrange)).unwrap();
    let lam3 = lag3.lambda.clone().unwrap();
    let mut lneps = Vec::new();
    let mut ln_h1diff = Vec::new();
    let mut ln_viol = Vec::new();
    let mut rec_errs = Vec::new();
    for k in 2..=5 {
        let eps = 10f64.powi(-k);
        let pen = solve_penalty(&forms3, &space3, &f3, &g3,
            &problem.config(&space3.mesh, ConstraintMode::Penalty { epsilon: eps })).unwrap();
        let diff: Vec<f64> = pen.u.coefficients.iter().zip(&lag3.u.coefficients).map(|(a,b)| a-b).collect();
        let h1 = energy_norm(&forms3.b, &diff);
        let tu: Vec<f64> = pen.multiplier_recovery.as_ref().unwrap().iter().map(|r| r*eps).collect();
        let viol = l2_norm(&tu);
        let rec_err = lambda_error(pen.multiplier_recovery.as_ref().unwrap(), &lam3).unwrap();
        println!("eps=1e-{k} h1diff={h1:.4e} viol={viol:.4e} recovery_err={rec_err:.4e}");
        lneps.push(eps.ln()); ln_h1diff.push(h1.ln()); ln_viol.push(viol.ln());
        rec_errs.push(rec_err);
    }
    let slope = |xs: &Vec<f64>, ys: &Vec<f64>| {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum(); let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x*x).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x,y)| x*y).sum();
        (n*sxy - sx*sy) / (n*sxx - sx*sx)
    };
    println!("slope h1diff = {:.4}, slope viol = {:.4}", slope(&lneps, &ln_h1diff), slope(&lneps, &ln_viol));
    println!("recovery errs monotone decreasing: {:?}", rec_errs);
    let pen12 = solve(&forms3, &space3, &f3, &g3,
        &problem.config(&space3.mesh, ConstraintMode::Penalty { epsilon: 1e-12 })).unwrap();
    let du: Vec<f64> = pen12.u.coefficients.iter().zip(&lag3.u.coefficients).map(|(a,b)| a-b).collect();
    let dw: Vec<f64> = pen12.w.coefficients.iter().zip(&lag3.w.coefficients).map(|(a,b)| a-b).collect();
    println!("eps=1e-12 rel H1 diff u = {:.3e}, w = {:.3e}",
        energy_norm(&forms3.b, &du) / energy_norm(&forms3.b, &lag3.u.coefficients),
        energy_norm(&forms3.b, &dw) / energy_norm(&forms3.b, &lag3.w.coefficients));

    println!("=== coupled sweep eps = C h^2, levels 1..5 ===");
    let h1 = mesh_size(&build_hexcap_sphere(1, 1.0).unwrap()).h;
    let c = 0.2 / (h1 * h1);
    println!("C = {c:.6}");
    let mut prev: Option<(f64, f64, f64, f64, f64)> = None;
    for level in 1..=5 {
        let space = hexcap_space(level);
        let h = mesh_size(&space.mesh).h;
        let eps = c * h * h;
        let forms = AssembledForms::new(&space, problem.c_weights).unwrap();
        let (f, g) = problem.loads(&space, 4).unwrap();
        let bundle = solve_penalty(&forms, &space, &f, &g,
            &problem.config(&space.mesh, ConstraintMode::Penalty { epsilon: eps })).unwrap();
        let (_, l2_u) = fe_error_norm(&space, &bundle.u, &problem.u, NormKind::L2, 4).unwrap();
        let (_, h1_u) = fe_error_norm(&space, &bundle.u, &problem.u, NormKind::H1, 4).unwrap();
        let (_, l2_w) = fe_error_norm(&space, &bundle.w, &problem.w, NormKind::L2, 4).unwrap();
        let (_, w1p_w) = fe_error_norm(&space, &bundle.w, &problem.w, NormKind::W1p(4.0/3.0), 4).unwrap();
        print!("lvl {level} h={h:.5} eps={eps:.6} L2u={l2_u:.4e} H1u={h1_u:.4e} L2w={l2_w:.4e} W1pw={w1p_w:.4e}");
        if let Some((ph, p1, p2, p3, p4)) = prev {
            print!(" | EOC {:.4} {:.4} {:.4} {:.4}",
                eoc(p1, l2_u, ph, h).unwrap(), eoc(p2, h1_u, ph, h).unwrap(),
                eoc(p3, l2_w, ph, h).unwrap(), eoc(p4, w1p_w, ph, h).unwrap());
        }
        println!();
        prev = Some((h, l2_u, h1_u, l2_w, w1p_w));
    }
}
