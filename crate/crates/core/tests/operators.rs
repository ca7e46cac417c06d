use std::f64::consts::PI;
use std::sync::Arc;

use dispersal_core::operators::{assemble_local, assemble_nonlocal, consistency_error};
use dispersal_core::report::{empirical_orders, strictly_decreasing};
use dispersal_core::{BoundaryCondition, Domain, Field, Grid, KernelProfile, RateCalibration};
use proptest::prelude::*;

fn cell(n: usize) -> Arc<Grid> {
    Arc::new(Grid::build(Domain::periodic_cell(&[2.0 * PI]).unwrap(), 2.0 * PI / n as f64, 0.0).unwrap())
}

fn quartic() -> KernelProfile {
    KernelProfile::quartic(1).unwrap()
}

#[test]
fn cosine_is_scaled_by_the_fourier_multiplier() {
    let g = cell(256);
    let delta = 0.5;
    let k = quartic();
    let op = assemble_nonlocal(g.clone(), &k, delta, BoundaryCondition::Periodic, RateCalibration::Lattice).unwrap();
    let u = Field::from_fn(g.clone(), |x| x[0].cos());
    let au = op.apply(&u).unwrap();

    // continuum oracle (C/δ²)(∫k_δ(z) cos z dz − 1) by fine Simpson quadrature
    let n = 20000;
    let hz = 2.0 * delta / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let z = -delta + i as f64 * hz;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * k.scaled(delta, &[z]) * z.cos();
    }
    let multiplier = 14.0 / (delta * delta) * (s * hz / 3.0 - 1.0);
    for node in 0..g.node_count() {
        let x = g.point(node)[0];
        assert!((au.values()[node] - multiplier * x.cos()).abs() < 1e-6, "x = {x}");
    }
}

#[test]
fn local_periodic_laplacian_on_sine() {
    let g = cell(256);
    let op = assemble_local(g.clone(), BoundaryCondition::Periodic).unwrap();
    let u = Field::from_fn(g.clone(), |x| x[0].sin());
    let target = Field::from_fn(g, |x| -x[0].sin());
    let err = dispersal_core::grid::sup_distance(&op.apply(&u).unwrap(), &target).unwrap();
    assert!(err < 1e-4, "{err}");
}

#[test]
fn consistency_vanishes_on_constants() {
    let k = quartic();
    let cases = [
        (Domain::interval(0.0, 1.0).unwrap(), BoundaryCondition::Neumann, 0.1),
        (Domain::periodic_cell(&[1.0]).unwrap(), BoundaryCondition::Periodic, 0.0),
    ];
    for (d, bc, ghost) in cases {
        let g = Arc::new(Grid::build(d, 1.0 / 128.0, ghost).unwrap());
        let nl = assemble_nonlocal(g.clone(), &k, 0.1, bc, RateCalibration::Lattice).unwrap();
        let l = assemble_local(g.clone(), bc).unwrap();
        let u = Field::constant(g, 2.5);
        assert_eq!(consistency_error(&nl, &l, &u).unwrap(), 0.0);
    }
}

#[test]
fn neumann_interior_consistency_is_second_order() {
    let g = Arc::new(Grid::build(Domain::interval(0.0, 1.0).unwrap(), 1.0 / 1024.0, 0.0).unwrap());
    let local = assemble_local(g.clone(), BoundaryCondition::Neumann).unwrap();
    let u = Field::from_fn(g.clone(), |x| (x[0] * (1.0 - x[0])).powi(2));
    let deltas = [0.2, 0.1, 0.05];
    let errors: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            let nl = assemble_nonlocal(g.clone(), &quartic(), d, BoundaryCondition::Neumann, RateCalibration::Lattice)
                .unwrap();
            consistency_error(&nl, &local, &u).unwrap()
        })
        .collect();
    assert!(strictly_decreasing(&errors), "{errors:?}");
    for p in empirical_orders(&deltas, &errors).into_iter().flatten() {
        assert!(p >= 1.5, "order {p}, errors {errors:?}");
    }
}

#[test]
fn two_dimensional_periodic_structure() {
    let g = Arc::new(Grid::build(Domain::periodic_cell(&[1.0, 1.0]).unwrap(), 1.0 / 32.0, 0.0).unwrap());
    let op = assemble_nonlocal(g.clone(), &KernelProfile::quartic(2).unwrap(), 0.15, BoundaryCondition::Periodic, RateCalibration::Lattice)
        .unwrap();
    assert_eq!(op.asymmetry(), 0.0);
    let one = Field::constant(g, 1.0);
    assert!(op.apply(&one).unwrap().values().iter().all(|&v| v == 0.0));
}

fn bc_strategy() -> impl Strategy<Value = BoundaryCondition> {
    prop_oneof![
        Just(BoundaryCondition::Dirichlet),
        Just(BoundaryCondition::Neumann),
        Just(BoundaryCondition::Periodic)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nonlocal_sign_structure_and_stencil_width(
        bc in bc_strategy(),
        cells in 32usize..160,
        ratio in 4.0f64..12.0,
        mollifier in any::<bool>(),
    ) {
        let h = 1.0 / cells as f64;
        let delta = ratio * h;
        prop_assume!(2.0 * delta < 1.0);
        let domain = if bc == BoundaryCondition::Periodic {
            Domain::periodic_cell(&[1.0]).unwrap()
        } else {
            Domain::interval(0.0, 1.0).unwrap()
        };
        let ghost = if bc == BoundaryCondition::Dirichlet { delta } else { 0.0 };
        let g = Arc::new(Grid::build(domain, h, ghost).unwrap());
        let k = if mollifier { KernelProfile::mollifier(1).unwrap() } else { quartic() };
        let op = assemble_nonlocal(g, &k, delta, bc, RateCalibration::Lattice).unwrap();
        let width = 2 * (delta / h).ceil() as usize + 1;
        for i in 0..op.dim() {
            let (cols, w) = op.row(i);
            prop_assert!(w.iter().all(|&v| v >= 0.0));
            prop_assert!(op.diagonal(i) <= 0.0);
            prop_assert!(cols.len() < width);
        }
        if bc != BoundaryCondition::Dirichlet {
            prop_assert_eq!(op.asymmetry(), 0.0);
        }
    }
}
