use std::f64::consts::PI;
use std::sync::Arc;

use dispersal_core::operators::{assemble_local, assemble_nonlocal};
use dispersal_core::spectral::{
    apply_period_map, perturbation_check, pev_criterion, principal_value, principal_value_from,
    PeriodMap,
};
use dispersal_core::{
    BoundaryCondition, CoefficientShape, DispersalOperator, Domain, Error, Field, Grid,
    KernelProfile, RateCalibration, StepperOptions, TimePeriodicCoefficient,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 1.0 / 128.0;

fn coef(shape: CoefficientShape) -> TimePeriodicCoefficient {
    TimePeriodicCoefficient::new(1.0, shape).unwrap()
}

fn map(op: &Arc<DispersalOperator>, shape: CoefficientShape) -> PeriodMap {
    PeriodMap::new(op.clone(), coef(shape), DT, StepperOptions::default()).unwrap()
}

fn both_kinds(domain: Domain, bc: BoundaryCondition, h: f64, delta: f64) -> Vec<Arc<DispersalOperator>> {
    let ghost = if bc == BoundaryCondition::Dirichlet { delta } else { 0.0 };
    let g = Arc::new(Grid::build(domain, h, ghost).unwrap());
    let k = KernelProfile::quartic(1).unwrap();
    vec![
        Arc::new(assemble_local(g.clone(), bc).unwrap()),
        Arc::new(assemble_nonlocal(g, &k, delta, bc, RateCalibration::Lattice).unwrap()),
    ]
}

fn neumann() -> Vec<Arc<DispersalOperator>> {
    both_kinds(Domain::interval(0.0, 1.0).unwrap(), BoundaryCondition::Neumann, 1.0 / 32.0, 0.2)
}

fn periodic() -> Vec<Arc<DispersalOperator>> {
    both_kinds(Domain::periodic_cell(&[2.0 * PI]).unwrap(), BoundaryCondition::Periodic, 2.0 * PI / 64.0, 0.5)
}

fn max_dev(f: &Field, c: f64) -> f64 {
    f.values().iter().map(|v| (v - c).abs()).fold(0.0, f64::max)
}

#[test]
fn period_map_examples() {
    for op in neumann() {
        let one = Field::constant(op.grid().clone(), 1.0);
        let out = apply_period_map(&map(&op, CoefficientShape::Const(0.0)), &one).unwrap();
        assert!(max_dev(&out, 1.0) <= 1e-13);
        let out = apply_period_map(&map(&op, CoefficientShape::Const(0.6)), &one).unwrap();
        assert!(max_dev(&out, 0.6f64.exp()) <= 1e-6);
    }
    for op in neumann().into_iter().chain(periodic()) {
        let one = Field::constant(op.grid().clone(), 1.0);
        let sine = CoefficientShape::TimeSine { c0: 0.0, c1: 1.0 };
        let out = apply_period_map(&map(&op, sine), &one).unwrap();
        assert!(max_dev(&out, 1.0) <= 1e-6);
    }
}

#[test]
fn period_map_is_linear_and_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for op in periodic() {
        let m = map(&op, CoefficientShape::TxProduct { c0: 0.5, c1: 1.0, k: 1.0 });
        let g = op.grid().clone();
        let u = Field::from_fn(g.clone(), |x| 1.0 + 0.5 * (2.0 * x[0]).sin());
        let v = Field::from_fn(g.clone(), |x| 0.3 + 0.2 * x[0].cos());
        let (alpha, beta) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let combo = Field::from_fn(g, |x| {
            alpha * (1.0 + 0.5 * (2.0 * x[0]).sin()) + beta * (0.3 + 0.2 * x[0].cos())
        });
        let (pu, pv, pc) = (
            apply_period_map(&m, &u).unwrap(),
            apply_period_map(&m, &v).unwrap(),
            apply_period_map(&m, &combo).unwrap(),
        );
        let scale = pc.sup_norm().max(1.0);
        for n in 0..pc.values().len() {
            let expect = alpha * pu.values()[n] + beta * pv.values()[n];
            assert!((pc.values()[n] - expect).abs() <= 1e-9 * scale);
        }
        assert!(pu.min_value() >= -1e-12 && pv.min_value() >= -1e-12);
    }
}

#[test]
fn principal_value_examples() {
    for op in neumann() {
        let r = principal_value(&map(&op, CoefficientShape::TimeSine { c0: 0.0, c1: 1.0 }), 1e-10, 1000).unwrap();
        assert!(r.lambda.abs() <= 1e-8, "{}", r.lambda);
    }
    for op in periodic() {
        let r = principal_value(&map(&op, CoefficientShape::Const(0.35)), 1e-10, 1000).unwrap();
        assert!((r.lambda - 0.35).abs() <= 1e-8);
    }
    let g = Arc::new(Grid::build(Domain::interval(0.0, PI).unwrap(), PI / 512.0, 0.0).unwrap());
    let op = Arc::new(assemble_local(g, BoundaryCondition::Dirichlet).unwrap());
    let m = PeriodMap::new(op, coef(CoefficientShape::Const(0.0)), 1e-3, StepperOptions::default()).unwrap();
    let r = principal_value(&m, 1e-9, 1000).unwrap();
    assert!((r.lambda + 1.0).abs() <= 2e-3, "{}", r.lambda);
    assert!(r.residual <= 1e-9);
    assert!(r.eigenfunction.min_value() >= 0.0);
    assert!((r.eigenfunction.sup_norm() - 1.0).abs() < 1e-15);
}

#[test]
fn too_few_iterations_is_reported() {
    let op = periodic().remove(1);
    let m = map(&op, CoefficientShape::TxProduct { c0: 0.0, c1: 1.0, k: 1.0 });
    assert!(matches!(principal_value(&m, 1e-12, 2), Err(Error::NoConvergence { iterations: 2, .. })));
}

#[test]
fn criterion_examples() {
    let g = Arc::new(Grid::build(Domain::interval(0.0, PI).unwrap(), PI / 128.0, 0.1).unwrap());
    let k = KernelProfile::quartic(1).unwrap();
    let op = Arc::new(assemble_nonlocal(g, &k, 0.1, BoundaryCondition::Dirichlet, RateCalibration::Lattice).unwrap());
    let m = map(&op, CoefficientShape::Const(0.0));
    assert!(pev_criterion(&m, -1.0, 14.0, 0.1));
    assert!(!pev_criterion(&m, -1401.0, 14.0, 0.1));

    let op = neumann().remove(1);
    let m = map(&op, CoefficientShape::Const(0.8));
    let r = principal_value(&m, 1e-10, 1000).unwrap();
    assert!(r.is_principal_eigenvalue);
    assert!(pev_criterion(&m, r.lambda, 14.0, 0.2));
}

#[test]
fn perturbation_examples() {
    for op in periodic() {
        let a1 = CoefficientShape::TxProduct { c0: 0.2, c1: 0.7, k: 1.0 };
        let c = 0.45;
        let check = perturbation_check(&map(&op, a1), &map(&op, a1.shifted(c)), 1e-8).unwrap();
        assert!(check.holds);
        assert!(((check.lambda2 - check.lambda1) - c).abs() <= 1e-7);
        assert!((check.coefficient_distance - c).abs() <= 1e-12);

        let same = perturbation_check(&map(&op, a1), &map(&op, a1), 1e-8).unwrap();
        assert!((same.lambda1 - same.lambda2).abs() <= 1e-8);

        let s = CoefficientShape::TimeSine { c0: 0.0, c1: 1.0 };
        let sc = CoefficientShape::TxProduct { c0: 0.0, c1: 1.0, k: 1.0 };
        assert!(perturbation_check(&map(&op, s), &map(&op, sc), 1e-8).unwrap().holds);
    }
}

#[test]
fn perturbation_rejects_mismatched_maps() {
    let n = neumann();
    let p = periodic();
    let r = perturbation_check(
        &map(&n[0], CoefficientShape::Const(0.0)),
        &map(&p[0], CoefficientShape::Const(0.0)),
        1e-8,
    );
    assert!(matches!(r, Err(Error::MismatchedOperators(_))));
}

#[test]
fn start_vector_does_not_matter() {
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for op in periodic() {
        let m = map(&op, CoefficientShape::TxProduct { c0: 0.5, c1: 1.0, k: 1.0 });
        let reference = principal_value(&m, tol, 10_000).unwrap().lambda;
        for _ in 0..5 {
            let g = op.grid().clone();
            let values: Vec<f64> = (0..g.node_count()).map(|_| rng.gen_range(0.1..2.0)).collect();
            let start = Field::new(g, values, 0.0).unwrap();
            let l = principal_value_from(&m, &start, tol, 10_000).unwrap().lambda;
            assert!((l - reference).abs() <= 10.0 * tol, "{l} vs {reference}");
        }
    }
}

#[test]
fn larger_coefficient_larger_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..5 {
        let op = &periodic()[i % 2];
        let (c0, c1) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let lower = CoefficientShape::TxProduct { c0, c1, k: 1.0 };
        // adding a nonnegative space-time bump keeps the pair ordered
        let bump = rng.gen_range(0.0..0.5);
        let upper = CoefficientShape::TxProduct { c0: c0 + bump, c1, k: 1.0 };
        let l1 = principal_value(&map(op, lower), 1e-10, 10_000).unwrap().lambda;
        let l2 = principal_value(&map(op, upper), 1e-10, 10_000).unwrap().lambda;
        assert!(l1 <= l2 + 1e-8);
    }
}

#[test]
fn eigen_residual_within_tolerance() {
    for op in neumann().into_iter().chain(periodic()) {
        let m = map(&op, CoefficientShape::SpaceCosine { c0: 0.1, c1: 0.5, k: 2.0 });
        let r = principal_value(&m, 1e-9, 10_000).unwrap();
        let image = apply_period_map(&m, &r.eigenfunction).unwrap();
        let rho = r.lambda.exp();
        let res = image
            .values()
            .iter()
            .zip(r.eigenfunction.values())
            .map(|(a, b)| (a - rho * b).abs())
            .fold(0.0, f64::max);
        assert!(res <= 1e-9 * r.eigenfunction.sup_norm() * 1.01, "{res}");
    }
}
