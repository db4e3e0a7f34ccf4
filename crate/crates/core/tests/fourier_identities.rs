use proptest::prelude::*;

use permix::exact::{decompose_subsets_exact, to_f64};
use permix::fourier::{decompose_triple, parseval_remnant, secondterm_identity_check};
use permix::group::sampling::{
    random_group_function, random_mean_zero_function, random_subset, rng_from_seed,
};
use permix::group::{convolve_group, GroupFunction, GroupSpace, Permutation, UniformFunction};
use permix::mixing::{mixing_exact, ComputeBudget};

fn spaces() -> Vec<GroupSpace> {
    vec![
        GroupSpace::symmetric(4).unwrap(),
        GroupSpace::symmetric(5).unwrap(),
        GroupSpace::alternating(5).unwrap(),
        GroupSpace::alternating(6).unwrap(),
    ]
}

/// `(n-1) ∫∫ (f*g)(x) h(y) (fix(xy⁻¹) - 1)`: the σ-term through its character.
fn sigma_term_by_character(f: &GroupFunction, g: &GroupFunction, h: &GroupFunction) -> f64 {
    let s = f.space();
    let fg = convolve_group(f, g).unwrap();
    let elements: Vec<Permutation> = s.elements().collect();
    let inverses: Vec<Permutation> = elements.iter().map(|p| p.inverse()).collect();
    let mut sum = 0.0;
    for (rx, x) in elements.iter().enumerate() {
        for (ry, y_inv) in inverses.iter().enumerate() {
            let chi = x.compose(y_inv).fixed_points() as f64 - 1.0;
            sum += fg.value(rx) * h.value(ry) * chi;
        }
    }
    let order = s.order() as f64;
    (s.n() as f64 - 1.0) * sum / (order * order)
}

/// `#{(x, y) ∈ X × Y : xy ∈ Z}` by composing permutations.
fn brute_solutions(
    x: &[Permutation],
    y: &[Permutation],
    z: &std::collections::HashSet<Vec<usize>>,
) -> u64 {
    let mut count = 0;
    for a in x {
        for b in y {
            if z.contains(a.compose(b).images()) {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn sigma_term_matches_character_formula() {
    let mut rng = rng_from_seed(21);
    for s in spaces() {
        if s.order() > 120 {
            continue;
        }
        for _ in 0..3 {
            let (f, g, h) = (
                random_group_function(&s, &mut rng),
                random_group_function(&s, &mut rng),
                random_group_function(&s, &mut rng),
            );
            let d = decompose_triple(&f, &g, &h).unwrap();
            let oracle = sigma_term_by_character(&f, &g, &h);
            assert!(
                (d.sigma_term - oracle).abs() < 1e-12,
                "{}: {} vs {}",
                s.name(),
                d.sigma_term,
                oracle
            );
        }
    }
}

#[test]
fn indicator_totals_are_solution_counts() {
    for s in spaces() {
        for seed in 0..4 {
            let x = random_subset(&s, 0.3, seed).unwrap();
            let y = random_subset(&s, 0.5, seed + 10).unwrap();
            let z = random_subset(&s, 0.4, seed + 20).unwrap();
            let members = |set: &permix::group::GroupSubset| -> Vec<Permutation> {
                set.ranks().into_iter().map(|r| s.element(r)).collect()
            };
            let zset = members(&z)
                .into_iter()
                .map(|p| p.images().to_vec())
                .collect();
            let count = brute_solutions(&members(&x), &members(&y), &zset);
            let d = decompose_triple(&x.indicator(), &y.indicator(), &z.indicator()).unwrap();
            let order = s.order() as f64;
            assert_eq!((d.total * order * order).round() as u64, count);
            let report = mixing_exact(&x, &y, &z, None, ComputeBudget::default()).unwrap();
            assert_eq!(report.solutions, Some(count));
            if s.n() <= 6 {
                let exact = decompose_subsets_exact(&x, &y, &z).unwrap();
                assert_eq!(exact.solutions, count);
                assert!((to_f64(&exact.sigma_term) - d.sigma_term).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn three_terms_sum_to_total(seed: u64, which in 0usize..4) {
        let s = &spaces()[which];
        let mut rng = rng_from_seed(seed);
        let f = random_group_function(s, &mut rng);
        let g = random_group_function(s, &mut rng);
        let h = random_group_function(s, &mut rng);
        let d = decompose_triple(&f, &g, &h).unwrap();
        prop_assert!((d.main_term + d.sigma_term + d.remainder - d.total).abs() < 1e-12);
    }

    #[test]
    fn secondterm_identity(seed: u64, slot in 0usize..3, alternating: bool) {
        let s = if alternating { GroupSpace::alternating(5).unwrap() } else { GroupSpace::symmetric(4).unwrap() };
        let mut rng = rng_from_seed(seed);
        let mut fs: Vec<GroupFunction> = (0..3).map(|_| random_group_function(&s, &mut rng)).collect();
        fs[slot] = random_mean_zero_function(&s, &mut rng);
        let c = secondterm_identity_check(&fs[0], &fs[1], &fs[2]).unwrap();
        prop_assert!((c.lhs - c.rhs).abs() < 1e-12);
    }

    #[test]
    fn parseval_remnant_holds(seed: u64) {
        let s = GroupSpace::alternating(5).unwrap();
        let mut rng = rng_from_seed(seed);
        let f = random_mean_zero_function(&s, &mut rng);
        let r = parseval_remnant(&f).unwrap();
        prop_assert!(r.defect() >= -1e-12);
        prop_assert!((r.sigma_energy - r.pushforward_energy).abs() < 1e-12);
    }

    #[test]
    fn gowers_bound_on_alternating_groups(seed: u64, a in 0.05f64..0.95, b in 0.05f64..0.95, c in 0.05f64..0.95) {
        let s = GroupSpace::alternating(5).unwrap();
        let x = random_subset(&s, a, seed).unwrap();
        let y = random_subset(&s, b, seed ^ 1).unwrap();
        let z = random_subset(&s, c, seed ^ 2).unwrap();
        let r = mixing_exact(&x, &y, &z, None, ComputeBudget::default()).unwrap();
        prop_assert_eq!(r.m, Some(3));
        prop_assert_eq!(r.gowers_holds(), Some(true));
    }
}

#[test]
fn decomposition_of_uniform_function_is_all_main_term() {
    let s = GroupSpace::alternating(6).unwrap();
    let mut rng = rng_from_seed(3);
    let f = random_group_function(&s, &mut rng);
    let h = random_group_function(&s, &mut rng);
    let one = GroupFunction::constant(&s, 1.0);
    let d = decompose_triple(&f, &one, &h).unwrap();
    assert!(d.sigma_term.abs() < 1e-12);
    assert!(d.remainder.abs() < 1e-12);
    assert!(f.values().len() == s.order());
}
