use std::sync::Arc;

use dispersal_core::grid::sup_distance;
use dispersal_core::{Domain, Field, Grid};
use proptest::collection::vec;
use proptest::prelude::*;

fn grid() -> Arc<Grid> {
    Arc::new(Grid::build(Domain::interval(0.0, 1.0).unwrap(), 1.0 / 16.0, 0.25).unwrap())
}

fn field(values: Vec<f64>) -> Field {
    Field::new(grid(), values, 0.0).unwrap()
}

#[test]
fn build_is_deterministic() {
    let d = Domain::bounded_box(&[0.0, -1.0], &[1.0, 1.0]).unwrap();
    let a = Grid::build(d.clone(), 0.125, 0.3).unwrap();
    let b = Grid::build(d, 0.125, 0.3).unwrap();
    assert_eq!(a.node_count(), b.node_count());
    for n in 0..a.node_count() {
        let (pa, pb) = (a.point(n), b.point(n));
        for k in 0..2 {
            assert_eq!(pa[k].to_bits(), pb[k].to_bits());
        }
        assert_eq!(a.role(n), b.role(n));
    }
}

#[test]
fn field_examples() {
    let g = Arc::new(Grid::build(Domain::interval(0.0, 1.0).unwrap(), 0.25, 0.0).unwrap());
    let x = Field::from_fn(g.clone(), |p| p[0]);
    assert_eq!(sup_distance(&x, &Field::constant(g.clone(), 0.0)).unwrap(), 1.0);
    let f = Field::constant(g.clone(), 2.0);
    let h = Field::constant(g, -1.0);
    assert_eq!(sup_distance(&f, &h).unwrap(), 3.0);
    assert_eq!(sup_distance(&f, &f).unwrap(), 0.0);
}

#[test]
fn ghosts_do_not_enter_the_distance() {
    let g = grid();
    let mut a = Field::constant(g.clone(), 0.0);
    let b = Field::constant(g.clone(), 0.0);
    let ghost = (0..g.node_count()).find(|&n| g.is_ghost(n)).unwrap();
    a.values_mut()[ghost] = 5.0;
    assert_eq!(sup_distance(&a, &b).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn sup_distance_is_a_metric(
        a in vec(-10.0f64..10.0, 25),
        b in vec(-10.0f64..10.0, 25),
        c in vec(-10.0f64..10.0, 25),
    ) {
        let (f, g, h) = (field(a), field(b), field(c));
        let fg = sup_distance(&f, &g).unwrap();
        prop_assert!(fg >= 0.0);
        prop_assert_eq!(fg, sup_distance(&g, &f).unwrap());
        prop_assert_eq!(sup_distance(&f, &f).unwrap(), 0.0);
        let fh = sup_distance(&f, &h).unwrap();
        let hg = sup_distance(&h, &g).unwrap();
        prop_assert!(fg <= fh + hg + 1e-12);
    }
}
