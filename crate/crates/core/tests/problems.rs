use exadam::harness::{run_experiment, ExperimentConfig, SchedulerConfig};
use exadam::numerics::{Rng, Vector};
use exadam::optim::{OptimizerConfig, OptimizerSpec};
use exadam::problems::{
    fd_gradient_check, fd_gradient_components, gaussian_clouds, quadratic_problem, rosenbrock,
    spiral, Batch, Dataset, Problem, ProblemSpec, SplitFractions, DEFAULT_FD_STEP,
};
use nalgebra::DMatrix;

fn random_point(rng: &mut Rng, center: &Vector, scale: f64) -> Vector {
    Vector::from_vec_unchecked(
        center
            .iter()
            .map(|c| c + scale * rng.standard_normal())
            .collect(),
    )
}

#[test]
fn quadratic_spectrum_matches_requested_condition() {
    for (dim, cond) in [(2, 10.0), (20, 100.0), (50, 1e4)] {
        let q = quadratic_problem(dim, cond, 1234).unwrap();
        let a = q.matrix();
        let m = DMatrix::from_row_slice(dim, dim, a.as_slice());
        assert!((&m - m.transpose()).amax() < 1e-12);
        let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert!(eig[0] > 0.0);
        let ratio = eig[dim - 1] / eig[0];
        assert!((ratio - cond).abs() <= 1e-8 * cond, "{dim}: {ratio}");
        let mut stated = q.eigenvalues().to_vec();
        stated.sort_by(f64::total_cmp);
        for (x, y) in eig.iter().zip(&stated) {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }
}

#[test]
fn analytic_gradients_match_central_differences() {
    let mut rng = Rng::new(5);
    let cases: [(Box<dyn Problem>, f64, f64); 3] = [
        (
            Box::new(quadratic_problem(20, 100.0, 3).unwrap()),
            1e-7,
            0.1,
        ),
        (Box::new(rosenbrock()), 1e-6, 0.5),
        (
            ProblemSpec::Logistic {
                n: 200,
                d: 5,
                separation: 2.0,
            }
            .build(3)
            .unwrap(),
            1e-5,
            0.1,
        ),
    ];
    for (problem, tol, scale) in &cases {
        let center = match problem.name().as_str() {
            "rosenbrock" => problem.initial_point(),
            _ => Vector::zeros(problem.dim()),
        };
        for _ in 0..20 {
            let theta = random_point(&mut rng, &center, *scale);
            let err =
                fd_gradient_check(problem.as_ref(), &theta, Batch::Full, DEFAULT_FD_STEP).unwrap();
            assert!(err < *tol, "{}: {err}", problem.name());
        }
    }
}

// Plain relative error is round-off bound for the network (some components
// are ~1e-8), so compare with the difference quotient's own noise allowed.
#[test]
fn network_gradient_matches_up_to_rounding_noise() {
    let problem = ProblemSpec::default_mlp().build(11).unwrap();
    let mut rng = Rng::new(6);
    let rows: Vec<usize> = (0..64).collect();
    for _ in 0..5 {
        let theta = random_point(&mut rng, &Vector::zeros(problem.dim()), 0.3);
        let comps =
            fd_gradient_components(problem.as_ref(), &theta, Batch::Rows(&rows), 1e-6).unwrap();
        for c in comps {
            let scale = c.analytic.abs().max(c.finite_difference.abs());
            let gap = (c.analytic - c.finite_difference).abs();
            assert!(gap <= 1e-5 * scale + c.roundoff, "{c:?}");
        }
    }
}

#[test]
fn convex_problems_satisfy_midpoint_inequality() {
    let mut rng = Rng::new(8);
    let problems = [
        ProblemSpec::Quadratic {
            dim: 10,
            condition_number: 1e3,
        }
        .build(1)
        .unwrap(),
        ProblemSpec::Logistic {
            n: 100,
            d: 4,
            separation: 1.0,
        }
        .build(1)
        .unwrap(),
    ];
    for p in &problems {
        for _ in 0..200 {
            let a = random_point(&mut rng, &Vector::zeros(p.dim()), 2.0);
            let b = random_point(&mut rng, &Vector::zeros(p.dim()), 2.0);
            let mid =
                Vector::from_vec_unchecked(a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect());
            let f = |x: &Vector| p.loss(x, Batch::Full).unwrap();
            let chord = 0.5 * (f(&a) + f(&b));
            assert!(f(&mid) <= chord * (1.0 + 1e-12), "{}", p.name());
        }
    }
}

fn trained_accuracy(separation: f64, d: usize) -> f64 {
    let cfg = ExperimentConfig {
        scheduler: SchedulerConfig {
            enabled: false,
            ..SchedulerConfig::default()
        },
        ..ExperimentConfig::new(
            ProblemSpec::Logistic {
                n: 1000,
                d,
                separation,
            },
            OptimizerSpec::Exadam(OptimizerConfig::default().with_alpha(0.05)),
            200,
            1234,
        )
    };
    let trace = run_experiment(&cfg).unwrap();
    trace.final_record().unwrap().val_accuracy.unwrap()
}

#[test]
fn logistic_accuracy_tracks_separation() {
    let overlapping = trained_accuracy(0.0, 20);
    assert!((overlapping - 0.5).abs() <= 0.12, "{overlapping}");
    let separated = trained_accuracy(4.0, 2);
    assert!(separated >= 0.95, "{separated}");
}

#[test]
fn splits_are_disjoint_and_cover_every_row() {
    for (n, seed) in [(10, 0), (101, 5), (1000, 1234)] {
        let data = gaussian_clouds(n, 3, 1.0, seed).unwrap();
        let s = data.split();
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.validation)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        assert_eq!(s.train.len(), (n as f64 * 0.9).round() as usize);
    }
}

#[test]
fn spiral_csv_round_trip_is_lossless() {
    let data = spiral(200, 0.1, 9).unwrap();
    let text = data.to_csv_string();
    let back = Dataset::read_csv(text.as_bytes(), SplitFractions::default(), 9).unwrap();
    assert_eq!(back, data);
    assert_eq!(back.to_csv_string(), text);
}

#[test]
fn same_seed_same_problem() {
    for spec in [
        ProblemSpec::default_mlp(),
        ProblemSpec::Quadratic {
            dim: 5,
            condition_number: 10.0,
        },
    ] {
        let a = spec.build(77).unwrap();
        let b = spec.build(77).unwrap();
        let c = spec.build(78).unwrap();
        let theta = a.initial_point();
        assert_eq!(theta, b.initial_point());
        let fa = a.loss(&theta, Batch::Full).unwrap();
        assert_eq!(fa.to_bits(), b.loss(&theta, Batch::Full).unwrap().to_bits());
        assert_ne!(fa, c.loss(&c.initial_point(), Batch::Full).unwrap());
    }
}
