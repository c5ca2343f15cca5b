use cfrac::{Functional, GridFunction, KernelSet, NodeSystem};
use proptest::prelude::*;

fn cubic(c: [f64; 4]) -> impl Fn(f64) -> f64 {
    move |z| c[0] + z * (c[1] + z * (c[2] + z * c[3]))
}

fn cubic_integral(c: [f64; 4], a: f64, b: f64) -> f64 {
    let anti = |z: f64| z * (c[0] + z * (c[1] / 2.0 + z * (c[2] / 3.0 + z * c[3] / 4.0)));
    anti(b) - anti(a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ranges_add_up_and_cubics_are_exact(
        n in 8usize..80,
        c in prop::array::uniform4(-3.0f64..3.0),
        cuts in prop::array::uniform3(0.0f64..1.0),
    ) {
        let g = GridFunction::from_fn(n, cubic(c)).unwrap();
        let mut idx: Vec<usize> = cuts.iter().map(|t| (t * n as f64) as usize).collect();
        idx.sort_unstable();
        let (a, b, d) = (idx[0], idx[1], idx[2]);
        let whole = g.integrate_range(a, d).unwrap();
        let split = g.integrate_range(a, b).unwrap() + g.integrate_range(b, d).unwrap();
        prop_assert!((whole - split).abs() <= 1e-13 * (1.0 + whole.abs()));
        let exact = cubic_integral(c, a as f64 / n as f64, d as f64 / n as f64);
        prop_assert!((whole - exact).abs() <= 1e-12);
        let tail = g.tail_integral_table();
        prop_assert_eq!(tail.value(n), 0.0);
        prop_assert_eq!(tail.value(a), g.integrate_range(a, n).unwrap());
    }

    #[test]
    fn increments_match_function_differences(s0 in -2.0f64..2.0, t in -1.5f64..1.5) {
        let f = Functional::parse("exp(s/2) + s^3", 1).unwrap();
        let direct = f.f_at(s0 + t).unwrap() - f.f_at(s0).unwrap();
        prop_assert!((f.increment(s0, t).unwrap() - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn linear_functionals_interpolate_exactly(
        offsets in prop::array::uniform3(0.2f64..1.0),
        amps in prop::array::uniform3(-0.09f64..0.09),
    ) {
        let mut level = 0.0;
        let nodes: Vec<String> = offsets
            .iter()
            .zip(amps)
            .enumerate()
            .map(|(i, (d, a))| {
                level += d;
                format!("{level} + {a}*sin({}*z)", i + 1)
            })
            .collect();
        let ks = KernelSet::compute(NodeSystem::<f64>::from_exprs("s", &nodes, 64).unwrap()).unwrap();
        let report = ks.verify_interpolation();
        prop_assert!(report.failures.is_empty());
        prop_assert!(report.max_residual <= 1e-12, "{}", report.max_residual);
    }

    #[test]
    fn one_floor_reduction_is_the_divided_difference(x0 in -1.0f64..1.0, gap in 0.1f64..2.0, rate in 0.2f64..1.5) {
        let x1 = x0 + gap;
        let f = format!("exp({rate}*s)");
        let sys = NodeSystem::<f64>::from_exprs(&f, &[format!("{x0}"), format!("{x1}")], 512).unwrap();
        let r = KernelSet::compute(sys).unwrap().constant_node_reduction().unwrap();
        let dd = ((rate * x1).exp() - (rate * x0).exp()) / gap;
        prop_assert!((r.integrated[1] - dd).abs() <= 1e-10 * (1.0 + dd.abs()));
        prop_assert!(r.max_gap() <= 1e-10 * (1.0 + dd.abs()));
    }

    #[test]
    fn two_floor_quadratic_systems_interpolate(
        base in 0.5f64..2.0,
        d1 in 0.5f64..1.5,
        d2 in 0.5f64..1.5,
        wiggle in -0.1f64..0.1,
    ) {
        let nodes = [
            format!("{base} + {wiggle}*z"),
            format!("{} + {wiggle}*z*z", base + d1),
            format!("{}", base + d1 + d2),
        ];
        let ks = KernelSet::compute(NodeSystem::<f64>::from_exprs("s^2", &nodes, 256).unwrap()).unwrap();
        let report = ks.verify_interpolation();
        prop_assert!(report.failures.is_empty());
        prop_assert!(report.max_residual <= 1e-6, "{}", report.max_residual);
    }
}
