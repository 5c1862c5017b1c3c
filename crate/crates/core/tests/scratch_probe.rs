use std::time::Instant;
use tensorineq_core::grid::GridKind;
use tensorineq_core::spectra::*;

#[test]
#[ignore]
fn probe_spectra() {
    for name in [
        SpecName::DevDiv,
        SpecName::SymCurl,
        SpecName::DevSymCurl,
        SpecName::DevSymDevCurl,
        SpecName::SymDevCurl,
        SpecName::Maxwell,
        SpecName::DevSymGrad,
    ] {
        let spec = InequalitySpec::preset(name);
        let mut row = format!("{:>22}", spec.name);
        for res in [4usize, 6, 8] {
            let t0 = Instant::now();
            let (grid, part) = standard_setup(GridKind::Box, 3, res, spec.bc).unwrap();
            let mut opts = EstimateOpts::default();
            opts.method = if res <= 4 {
                SolveMethod::Dense
            } else {
                SolveMethod::Iterative
            };
            match estimate_constant(&spec, &grid, &part, &opts) {
                Ok(est) => {
                    row += &format!(
                        "  res{res}: l={:.6e} C={:?} it={} r={:.1e} ({:.1}s)",
                        est.lambda_min,
                        est.constant.map(|c| (c * 1000.0).round() / 1000.0),
                        est.iterations,
                        est.residual,
                        t0.elapsed().as_secs_f64()
                    );
                }
                Err(e) => {
                    row += &format!("  res{res}: ERR {e} ({:.1}s)", t0.elapsed().as_secs_f64());
                }
            }
        }
        println!("{row}");
    }
}

#[test]
#[ignore]
fn probe_dense_vs_iterative() {
    for name in [
        SpecName::DevDiv,
        SpecName::DevSymCurl,
        SpecName::DevSymDevCurl,
        SpecName::Maxwell,
    ] {
        let spec = InequalitySpec::preset(name);
        let (grid, part) = standard_setup(GridKind::Box, 3, 4, spec.bc).unwrap();
        let dense = oracle_lambda_min(&spec, &grid, &part).unwrap();
        let mut opts = EstimateOpts::default();
        opts.method = SolveMethod::Iterative;
        let t0 = Instant::now();
        let est = estimate_constant(&spec, &grid, &part, &opts).unwrap();
        println!(
            "{:>22}: dense={dense:.12e} iter={:.12e} rel={:.2e} it={} ({:.1}s)",
            spec.name,
            est.lambda_min,
            (est.lambda_min - dense).abs() / dense,
            est.iterations,
            t0.elapsed().as_secs_f64()
        );
    }
}

#[test]
#[ignore]
fn probe_halfdisk_devsymgrad() {
    let spec = InequalitySpec::preset(SpecName::DevSymGrad);
    for res in [16usize, 32, 64] {
        let t0 = Instant::now();
        let (grid, part) = standard_setup(GridKind::HalfDisk, 2, res, spec.bc).unwrap();
        let mut opts = EstimateOpts::default();
        opts.method = SolveMethod::Iterative;
        opts.tol = 1e-8;
        match estimate_constant(&spec, &grid, &part, &opts) {
            Ok(est) => println!(
                "halfdisk res{res}: l={:.6e} C={:?} it={} r={:.1e} ({:.1}s)",
                est.lambda_min,
                est.constant,
                est.iterations,
                est.residual,
                t0.elapsed().as_secs_f64()
            ),
            Err(e) => println!("halfdisk res{res}: ERR {e} ({:.1}s)", t0.elapsed().as_secs_f64()),
        }
    }
}

#[test]
#[ignore]
fn probe_helmholtz_curl_ratio() {
    use std::sync::Arc;
    use tensorineq_core::field::*;
    use tensorineq_core::grid::*;
    use tensorineq_core::helmholtz::*;
    use tensorineq_core::ops::*;
    for res in [7usize, 9, 13, 17] {
        let grid = Arc::new(Grid::unit_box(3, res).unwrap());
        let part = BoundaryPartition::box_split(&grid, &[Face::low(0)]).unwrap();
        let bump = ScalarField::from_fn(grid.clone(), |x| {
            (1.0 - x[0]) * x[1] * (1.0 - x[1]) * x[2] * (1.0 - x[2])
        });
        let s0 = TensorField::from_fn_scalar_id(&bump).unwrap();
        let CurlOutput::Tensor(t) = curl_tensor(&s0).unwrap() else { panic!() };
        let r = helmholtz_decompose(&t, &part, 1e-12).unwrap();
        println!(
            "res {res}: |R|/|T| = {:.4}, harmonic = {:.2e}",
            l2_norm(&r.gradient_part) / l2_norm(&t),
            r.harmonic_residual
        );
    }
}
