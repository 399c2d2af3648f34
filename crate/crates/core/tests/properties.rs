use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wijsum_core::ideals::{
    filter_estimate, implication_suite, member_estimate, Membership, SuiteParams,
};
use wijsum_core::identities::{identity_residuals, random_trace};
use wijsum_core::index_methods::{Row, RowMatrix};
use wijsum_core::metric_sets::distance;
use wijsum_core::statistical::{bounded_split_check, c_lambda_stat_density, chebyshev_check};
use wijsum_core::transforms::{self, apply_row_matrix, StrongMethod};
use wijsum_core::{ClosedSet, DistanceTrace, Error, Ideal, IndexMethod, IndexSet, MetricPoint};

fn point(dim: usize) -> impl Strategy<Value = MetricPoint> {
    prop::collection::vec(-10.0..10.0f64, dim).prop_map(|c| MetricPoint::new(c).unwrap())
}

fn shape(dim: usize) -> impl Strategy<Value = ClosedSet> {
    prop_oneof![
        point(dim).prop_map(ClosedSet::singleton),
        prop::collection::vec(point(dim), 1..5).prop_map(|ps| ClosedSet::points(ps).unwrap()),
        (point(dim), 0.0..5.0f64).prop_map(|(c, r)| ClosedSet::ball(c, r).unwrap()),
        (point(dim), 0.0..5.0f64).prop_map(|(c, r)| ClosedSet::sphere(c, r).unwrap()),
        (point(dim), prop::collection::vec(0.0..4.0f64, dim)).prop_map(|(lo, w)| {
            let hi = lo.coords().iter().zip(&w).map(|(a, b)| a + b).collect();
            ClosedSet::axis_box(lo, MetricPoint::new(hi).unwrap()).unwrap()
        }),
        (point(dim), -5.0..5.0f64)
            .prop_filter("nonzero normal", |(n, _)| n.coords().iter().any(|c| c.abs() > 1e-3))
            .prop_map(|(n, b)| ClosedSet::hyperplane(n, b).unwrap()),
    ]
}

/// Points of `set`, used to check that `d(x, A)` is a lower bound.
fn members(set: &ClosedSet) -> Vec<Vec<f64>> {
    let on_sphere = |c: &MetricPoint, r: f64, scale: f64| {
        let d = c.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut v = c.coords().to_vec();
                v[i] += s * r * scale;
                out.push(v);
            }
        }
        out
    };
    match set {
        ClosedSet::Singleton(p) => vec![p.coords().to_vec()],
        ClosedSet::FinitePointSet(ps) => ps.iter().map(|p| p.coords().to_vec()).collect(),
        ClosedSet::Ball { center, radius } => {
            let mut v = on_sphere(center, *radius, 0.5);
            v.push(center.coords().to_vec());
            v
        }
        ClosedSet::Sphere { center, radius } => on_sphere(center, *radius, 1.0),
        ClosedSet::AxisBox { lo, hi } => {
            let mid: Vec<f64> = lo.coords().iter().zip(hi.coords()).map(|(a, b)| (a + b) / 2.0).collect();
            vec![lo.coords().to_vec(), hi.coords().to_vec(), mid]
        }
        ClosedSet::Hyperplane { normal, offset } => {
            let foot: Vec<f64> = normal.coords().iter().map(|n| n * offset).collect();
            vec![foot]
        }
        ClosedSet::Oracle(_) => Vec::new(),
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn index_set(n: usize) -> impl Strategy<Value = IndexSet> {
    prop::collection::vec(any::<bool>(), n).prop_map(move |bits| {
        IndexSet::from_fn(bits.len(), |i| bits[i - 1])
    })
}

fn sparse_set(n: usize) -> impl Strategy<Value = IndexSet> {
    prop::collection::vec(1..=n, 0..n / 40).prop_map(move |ix| IndexSet::from_indices(n, ix))
}

/// Strictly increasing lambda with gaps in 1..=gap_max.
fn lambda(terms: usize, gap_max: u64) -> impl Strategy<Value = IndexMethod> {
    prop::collection::vec(1..=gap_max, terms).prop_map(|gaps| {
        let mut acc = 0;
        let values = gaps
            .into_iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect();
        IndexMethod::from_values("random", values).unwrap()
    })
}

fn trace(seed: u64, n: usize, probes: usize) -> DistanceTrace {
    random_trace(&mut ChaCha8Rng::seed_from_u64(seed), n, probes, 10.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_one_lipschitz(set in shape(3), x in point(3), y in point(3)) {
        let dx = distance(&x, &set).unwrap();
        let dy = distance(&y, &set).unwrap();
        prop_assert!(dx >= 0.0);
        prop_assert!((dx - dy).abs() <= x.dist(&y) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn distance_is_a_lower_bound_over_members(set in shape(2), x in point(2)) {
        let d = distance(&x, &set).unwrap();
        for a in members(&set) {
            prop_assert!(d <= euclid(x.coords(), &a) + 1e-9, "{d} > |x - {a:?}|");
            // and members themselves sit at distance zero
            let on = distance(&MetricPoint::new(a.clone()).unwrap(), &set).unwrap();
            prop_assert!(on <= 1e-9, "member {a:?} at distance {on}");
        }
    }

    #[test]
    fn membership_is_monotone_under_subsets(t in index_set(400), mask in index_set(400)) {
        for ideal in [Ideal::fin(), Ideal::density_zero()] {
            let s = IndexSet::from_fn(400, |i| t.contains(i) && mask.contains(i));
            let big = member_estimate(&ideal, &t).status;
            let small = member_estimate(&ideal, &s).status;
            if big == Membership::InIdealConsistent {
                prop_assert_eq!(small, Membership::InIdealConsistent);
            }
            if small == Membership::NotInIdealConsistent {
                prop_assert_eq!(big, Membership::NotInIdealConsistent);
            }
        }
    }

    #[test]
    fn union_of_sparse_members_is_a_member(a in sparse_set(2000), b in sparse_set(2000)) {
        let dz = Ideal::density_zero();
        prop_assume!(member_estimate(&dz, &a).status == Membership::InIdealConsistent);
        prop_assume!(member_estimate(&dz, &b).status == Membership::InIdealConsistent);
        let u = a.union(&b);
        let m = member_estimate(&dz, &u);
        if m.full_density < dz.density_threshold && m.tail_density < dz.density_threshold {
            prop_assert_eq!(m.status, Membership::InIdealConsistent);
        }
    }

    #[test]
    fn filter_is_dual_to_ideal(s in index_set(300)) {
        for ideal in [Ideal::fin(), Ideal::density_zero()] {
            prop_assert_eq!(filter_estimate(&ideal, &s.complement()), member_estimate(&ideal, &s).status);
        }
    }

    #[test]
    fn identities_hold_for_random_lambda(seed in any::<u64>(), lam in lambda(60, 40)) {
        let n = *lam.values().last().unwrap() as usize;
        let t = trace(seed, n, 2);
        let r = identity_residuals(&t, &lam).unwrap();
        prop_assert!(r.max_residual() < 1e-12, "{r:?}");
        prop_assert_eq!(r.monotone_bound_violations, 0);
    }

    #[test]
    fn inequalities_hold(seed in any::<u64>(), eps in 0.1..6.0f64, p in 1.0..3.0f64, lam in lambda(40, 30)) {
        let n = *lam.values().last().unwrap() as usize;
        let t = trace(seed, n, 3);
        let strong = transforms::strong_mean(&t, StrongMethod::Clambda, &lam, p).unwrap();
        let dens = c_lambda_stat_density(&t, &lam, eps).unwrap();
        let alpha = strong.max_deviation.clone().unwrap();
        let cheb = chebyshev_check(&strong, &dens, eps, p).unwrap();
        let split = bounded_split_check(&strong, &dens, eps, p, &alpha).unwrap();
        prop_assert!(cheb.holds, "{}", cheb.min_slack);
        prop_assert!(split.holds, "{}", split.min_slack);
    }

    #[test]
    fn exact_containments_hold(seed in any::<u64>(), eps in 0.2..5.0f64, delta in 0.05..0.9f64, p in 1.0..3.0f64) {
        let t = trace(seed, 300, 2);
        let lam = IndexMethod::from_fn("n^2", 20, |n| n * n).unwrap();
        for ideal in [Ideal::fin(), Ideal::density_zero()] {
            let rep = implication_suite(&t, &lam, &ideal, &SuiteParams::new(eps, delta, p)).unwrap();
            prop_assert!(!rep.containments.is_empty());
            for c in &rep.containments {
                prop_assert!(c.holds, "{} {:?}", c.name, c.first_violation);
            }
            prop_assert_eq!(rep.containment_failures, 0);
        }
    }
}

/// `a_{n, n+1} = 1`: each row reaches one column past the diagonal.
struct Shift;

impl RowMatrix for Shift {
    fn label(&self) -> String {
        "shift".into()
    }
    fn row(&self, n: usize) -> wijsum_core::Result<Row> {
        Ok(Row {
            entries: vec![(n + 1, 1.0)],
        })
    }
}

#[test]
fn rows_past_the_series_horizon_are_rejected() {
    let t = trace(1, 50, 1);
    let c1 = transforms::c1(&t);
    match apply_row_matrix(&Shift, &c1) {
        Err(Error::SupportOverflow { row, support, horizon }) => {
            assert_eq!((row, support, horizon), (50, 51, 50));
        }
        other => panic!("expected SupportOverflow, got {other:?}"),
    }
}
