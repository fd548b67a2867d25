use eqsas::feasibility::{SolveOptions, VerdictKind};
use eqsas::io::{parse_grid, parse_system, qe_sample};
use num_traits::ToPrimitive;

/// Samples `system` over `grid` and checks that the decomposed and direct
/// verdicts agree with `sat(y)` at every grid point.
fn check(system: &str, grid: &str, sat: impl Fn(f64) -> bool) {
    let spec = parse_system(system).unwrap();
    let axes = parse_grid(grid, 1).unwrap();
    let table = qe_sample(&spec, &axes, &SolveOptions::default(), 2, true).unwrap();
    assert!(!table.rows.is_empty());
    for row in &table.rows {
        let y = row.params[0].to_f64().unwrap();
        let expected = sat(y);
        let direct = row.direct.unwrap();
        for kind in [row.decomposed, direct] {
            assert_ne!(kind, VerdictKind::Unknown, "y = {y}");
            assert_eq!(kind.is_sat(), expected, "y = {y}: {kind:?}");
        }
        assert_eq!(row.agrees(), Some(true), "y = {y}");
    }
}

#[test]
fn sphere_radius() {
    check("n = 4\nparams = 1\nsym: p2 - y1 = 0\n", "-2:2:0.25", |y| y >= 0.0);
}

#[test]
fn mean_inside_a_ball() {
    // p1^2 <= n p2 <= 4
    check("n = 4\nparams = 1\nsym: p1 - y1 = 0\nsym: 1 - p2 >= 0\n", "-3:3:0.25", |y| y.abs() <= 2.0);
}

#[test]
fn smallest_square_on_a_sphere() {
    // min x_i^2 is largest, 1/4, when all |x_i| = 1/2
    check("n = 4\nparams = 1\nsym: p2 - 1 = 0\nequ-template: x1^2 - y1 >= 0\n", "-1:1:0.125", |y| y <= 0.25);
}
