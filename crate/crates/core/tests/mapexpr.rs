mod common;

use std::f64::consts::PI;

use common::{cauchy_coeff, tan_family};
use proptest::prelude::*;
use vortex_core::{Complex64 as C, Error, MapExpr, I};

fn no_params() -> [(&'static str, C); 0] {
    []
}

fn tan_family_expr(a: f64) -> MapExpr {
    MapExpr::parse("a*(tan(i*z)+tan(i*z/2))", [("a", C::new(a, 0.0))]).unwrap()
}

#[test]
fn identity_parses_and_evaluates() {
    let e = MapExpr::parse("z", no_params()).unwrap();
    let z = C::new(0.3, 0.1);
    assert_eq!(e.eval(z).unwrap(), z);
    assert_eq!(e.eval(C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
    let t = e.taylor(C::new(0.0, 0.0), 3).unwrap();
    assert_eq!(t.coeffs(), &[0.0, 1.0, 0.0, 0.0].map(|x| C::new(x, 0.0)));
}

#[test]
fn strip_map_has_no_free_parameters() {
    let e = MapExpr::parse("tan(i*pi*z/4)", no_params()).unwrap();
    assert!(e.params().is_empty());
    assert_eq!(e.eval(C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
}

#[test]
fn tan_family_matches_real_function_oracle() {
    let e = tan_family_expr(0.6);
    for z in [C::new(0.2, 0.0), C::new(0.1, 0.15), C::new(-0.3, 0.05)] {
        let got = e.eval(z).unwrap();
        let want = tan_family(0.6, z);
        assert!((got - want).norm() <= 1e-12, "{z}: {got} vs {want}");
    }
}

#[test]
fn tan_maclaurin_coefficients() {
    let e = MapExpr::parse("tan(z)", no_params()).unwrap();
    let t = e.taylor(C::new(0.0, 0.0), 5).unwrap();
    let want = [0.0, 1.0, 0.0, 1.0 / 3.0, 0.0, 2.0 / 15.0];
    for (k, w) in want.iter().enumerate() {
        assert!((t.coeff(k) - w).norm() <= 1e-16, "c{k} = {}", t.coeff(k));
    }
}

#[test]
fn strip_taylor_is_critical() {
    let e = MapExpr::parse("tan(i*pi*z/4)", no_params()).unwrap();
    let t = e.taylor(C::new(0.0, 0.0), 3).unwrap();
    assert!((t.coeff(1) - I * PI / 4.0).norm() < 1e-15);
    assert!((t.coeff(3) + I * PI.powi(3) / 192.0).norm() < 1e-15);
    let f = |z: C| e.eval(z).unwrap();
    for k in [1, 3] {
        let oracle = cauchy_coeff(f, k, 0.5, 64);
        assert!((t.coeff(k) - oracle).norm() <= 1e-12 * oracle.norm());
    }
    let d1 = t.coeff(1).norm();
    let d3 = 6.0 * t.coeff(3).norm();
    assert!((2.0 * d1.powi(3) - d3).abs() <= 1e-14);
    assert!((d3 - PI.powi(3) / 32.0).abs() <= 1e-14);
}

#[test]
fn complex_step_first_derivative() {
    // -i phi is real on the real axis for the strip map.
    let e = MapExpr::parse("tan(i*pi*z/4)", no_params()).unwrap();
    let h = 1e-20;
    for x in [0.0, 0.3, -0.5] {
        let cs = (-I * e.eval(C::new(x, h)).unwrap()).im / h;
        let t = e.taylor(C::new(x, 0.0), 1).unwrap();
        assert!(((-I * t.coeff(1)).re - cs).abs() <= 1e-12 * cs.abs());
    }
}

#[test]
fn finite_differences_match_taylor_for_builtin_maps() {
    let maps = [
        MapExpr::identity(),
        MapExpr::parse("tan(i*pi*z/4)", no_params()).unwrap(),
        tan_family_expr(0.6),
        tan_family_expr(1.0),
    ];
    let h = 1e-4;
    for e in &maps {
        let f = |z: f64| e.eval(C::new(z, 0.0)).unwrap();
        let t = e.taylor(C::new(0.0, 0.0), 3).unwrap();
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d3 = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h.powi(3));
        let t1 = t.coeff(1);
        let t3 = 6.0 * t.coeff(3);
        assert!((d1 - t1).norm() <= 1e-6 * t1.norm(), "{e}");
        assert!((d3 - t3).norm() <= 1e-6 * t3.norm().max(1.0), "{e}");
    }
}

#[test]
fn taylor_polynomial_within_geometric_tail() {
    // phi maps into the unit disc, so |c_k| <= r^-k and the tail beyond
    // degree N at |z| <= r/4 is at most (1/4)^(N+1) * 4/3.
    let n = 12;
    let cases = [
        (tan_family_expr(1.0), 0.6),
        (MapExpr::parse("tan(i*pi*z/4)", no_params()).unwrap(), 1.0),
    ];
    for (e, r) in &cases {
        let t = e.taylor(C::new(0.0, 0.0), n).unwrap();
        let bound = 0.25f64.powi(n as i32 + 1) * 4.0 / 3.0;
        for j in 0..16 {
            let z = C::from_polar(r / 4.0, j as f64 * 0.4);
            let err = (e.eval(z).unwrap() - t.eval(z)).norm();
            assert!(err <= bound + 1e-15, "{e} at {z}: {err} > {bound}");
        }
    }
}

#[test]
fn syntax_errors_carry_offsets() {
    match MapExpr::parse("2z", no_params()) {
        Err(Error::Parse(p)) => assert_eq!(p.offset, 1),
        other => panic!("expected a parse error, got {other:?}"),
    }
    match MapExpr::parse("a*z+b", no_params()) {
        Err(Error::UnboundParams(names)) => assert_eq!(names, ["a", "b"]),
        other => panic!("expected unbound names, got {other:?}"),
    }
    assert!(matches!(
        MapExpr::parse("tan(", no_params()),
        Err(Error::Parse(_))
    ));
}

#[test]
fn pole_is_a_domain_error() {
    let e = MapExpr::parse("tan(z)", no_params()).unwrap();
    assert!(matches!(
        e.eval(C::new(PI / 2.0, 0.0)),
        Err(Error::Singular { .. })
    ));
    assert!(e.taylor(C::new(PI / 2.0, 0.0), 3).is_err());
}

const SOURCES: [&str; 8] = [
    "z",
    "tan(i*pi*z/4)",
    "a*(tan(i*z)+tan(i*z/2))",
    "z-z^3/3+z^5/5",
    "sin(z)*cos(z)",
    "exp(z)-1",
    "log(1+z)/(1-z/2)",
    "sqrt(1+z)-1+(1+z)^0.5",
];

fn parsed(k: usize) -> MapExpr {
    MapExpr::parse(SOURCES[k], [("a", C::new(0.8, 0.0))]).unwrap()
}

fn interior() -> impl Strategy<Value = C> {
    (0.0..0.3f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C::from_polar(r, t))
}

proptest! {
    #[test]
    fn printed_expression_evaluates_identically(k in 0..SOURCES.len(), z in interior()) {
        let e = parsed(k);
        let reparsed = MapExpr::parse(&e.to_string(), [("a", C::new(0.8, 0.0))]).unwrap();
        prop_assert_eq!(e.eval(z).unwrap(), reparsed.eval(z).unwrap());
    }

    #[test]
    fn taylor_is_linear(j in 0..SOURCES.len(), k in 0..SOURCES.len(), c in interior()) {
        let sum = MapExpr::parse(
            &format!("({})+({})", SOURCES[j], SOURCES[k]),
            [("a", C::new(0.8, 0.0))],
        ).unwrap();
        let lhs = sum.taylor(c, 8).unwrap();
        let rhs = &parsed(j).taylor(c, 8).unwrap() + &parsed(k).taylor(c, 8).unwrap();
        prop_assert_eq!(lhs.coeffs(), rhs.coeffs());
    }
}
