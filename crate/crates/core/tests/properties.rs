use mmrisk_core::bounds::DirichletSpec;
use mmrisk_core::dist::{missing_mass, sample_iid, Distribution, Sample};
use mmrisk_core::estimators::{dirichlet_bayes, good_turing, profile};
use mmrisk_core::montecarlo::RunningStats;
use mmrisk_core::risk::exact_bias_gt;
use proptest::prelude::*;

fn distribution() -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0f64..1.0, 1..40).prop_filter_map("all-zero weights", |w| {
        let total: f64 = w.iter().sum();
        (total > 0.0)
            .then(|| Distribution::explicit(w.iter().map(|x| x / total).collect()).unwrap())
    })
}

fn dist_and_sample() -> impl Strategy<Value = (Distribution, Sample)> {
    distribution().prop_flat_map(|d| {
        let k = d.support_size();
        (
            Just(d),
            prop::collection::vec(0..k, 1..60).prop_map(Sample::new),
        )
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #[test]
    fn missing_mass_is_a_probability((d, s) in dist_and_sample()) {
        let m = missing_mass(&d, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&m));
    }

    #[test]
    fn extending_a_sample_never_raises_missing_mass(
        (d, s) in dist_and_sample(),
        extra in prop::collection::vec(any::<prop::sample::Index>(), 1..10),
    ) {
        let before = missing_mass(&d, &s).unwrap();
        let mut longer = s.clone();
        for idx in extra {
            longer.push(idx.index(d.support_size()));
        }
        prop_assert!(missing_mass(&d, &longer).unwrap() <= before + 1e-15);
    }

    #[test]
    fn point_mass_leaves_nothing_missing(n in 1usize..50, seed in any::<u64>()) {
        let d = Distribution::uniform(1).unwrap();
        let s = sample_iid(&d, n, seed).unwrap();
        prop_assert_eq!(missing_mass(&d, &s).unwrap(), 0.0);
    }

    #[test]
    fn sampling_is_a_pure_function(k in 1usize..200, n in 1usize..100, seed in any::<u64>()) {
        let d = Distribution::zipf(k, 1.0).unwrap();
        let a = sample_iid(&d, n, seed).unwrap();
        prop_assert_eq!(&a, &sample_iid(&d, n, seed).unwrap());
        prop_assert!(a.symbols().iter().all(|&x| x < k));
    }

    #[test]
    fn profile_conserves_sample_length(symbols in prop::collection::vec(0usize..30, 1..80)) {
        let s = Sample::new(symbols);
        let p = profile(&s).unwrap();
        let total: usize = p.nonzero().map(|(i, f)| i * f).sum();
        prop_assert_eq!(total, s.len());
        prop_assert_eq!(p.phi(s.len() + 1), 0);
    }

    #[test]
    fn good_turing_is_singleton_fraction(symbols in prop::collection::vec(0usize..20, 1..50)) {
        let s = Sample::new(symbols.clone());
        let singletons = (0..20)
            .filter(|u| symbols.iter().filter(|&&x| x == *u).count() == 1)
            .count();
        prop_assert_eq!(good_turing(&s).unwrap(), singletons as f64 / symbols.len() as f64);
    }

    #[test]
    fn dirichlet_estimate_ignores_labels(
        symbols in prop::collection::vec(0usize..12, 1..40),
        shift in 0usize..12,
        alpha in 0.01f64..5.0,
    ) {
        let spec = DirichletSpec::new(12, alpha).unwrap();
        let relabeled = Sample::new(symbols.iter().map(|&x| (x + shift) % 12).collect());
        let a = dirichlet_bayes(&Sample::new(symbols), &spec).unwrap();
        let b = dirichlet_bayes(&relabeled, &spec).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn seeing_a_new_symbol_lowers_the_dirichlet_estimate(
        symbols in prop::collection::vec(0usize..6, 2..30),
        alpha in 0.01f64..5.0,
    ) {
        // Swap one occurrence of a repeated symbol for an unseen one.
        let spec = DirichletSpec::new(10, alpha).unwrap();
        let s = Sample::new(symbols.clone());
        let counts = s.counts();
        let repeated = counts.entries().iter().find(|&&(_, c)| c >= 2).map(|&(u, _)| u);
        prop_assume!(repeated.is_some());
        let repeated = repeated.unwrap();
        let pos = symbols.iter().position(|&x| x == repeated).unwrap();
        let mut swapped = symbols;
        swapped[pos] = 7;
        let before = dirichlet_bayes(&s, &spec).unwrap();
        let after = dirichlet_bayes(&Sample::new(swapped), &spec).unwrap();
        prop_assert!(after < before);
        prop_assert!(close(before - after, alpha / (10.0 * alpha + s.len() as f64), 1e-12));
    }

    #[test]
    fn bias_bounded_by_one_over_n(d in distribution(), n in 1usize..2000) {
        let b = exact_bias_gt(&d, n).unwrap();
        prop_assert!(b >= 0.0 && b <= 1.0 / n as f64);
    }

    #[test]
    fn running_stats_merge_matches_concatenation(
        xs in prop::collection::vec(-1e3f64..1e3, 0..50),
        ys in prop::collection::vec(-1e3f64..1e3, 0..50),
        zs in prop::collection::vec(-1e3f64..1e3, 0..50),
    ) {
        let a: RunningStats = xs.iter().copied().collect();
        let b: RunningStats = ys.iter().copied().collect();
        let c: RunningStats = zs.iter().copied().collect();
        let whole: RunningStats = xs.iter().chain(&ys).chain(&zs).copied().collect();

        let mut left = a;
        left.merge(&b);
        left.merge(&c);
        let mut bc = b;
        bc.merge(&c);
        let mut right = a;
        right.merge(&bc);
        let mut swapped = c;
        swapped.merge(&b);
        swapped.merge(&a);

        for m in [left, right, swapped] {
            prop_assert_eq!(m.count(), whole.count());
            prop_assert!((m.mean() - whole.mean()).abs() <= 1e-12 * whole.mean().abs().max(1.0));
            prop_assert!(close(m.m2(), whole.m2(), 1e-10) || whole.m2() < 1e-9);
            prop_assert!(m.variance() >= 0.0);
            if whole.count() > 0 {
                prop_assert_eq!(m.min(), whole.min());
                prop_assert_eq!(m.max(), whole.max());
            }
        }
    }
}
