use proptest::prelude::*;

use bkweights::algebra::{FqField, Series};
use bkweights::bkmod::{check_exact_sd, is_strongly_divisible, sub_quotient, twist_unramified, weights, weights_via_filtration, BKModule};
use bkweights::corpus::{
    random_conjugate, random_induced_submodule, random_irreducible_ambient, random_module, random_poly, random_sd_extension,
    random_sd_module, seeded,
};
use bkweights::induct::{induce, restrict, UnramifiedExtension};
use bkweights::inert::{character_conjugates, inert_enumerate, inert_member, InertDescription, TameCharacter, DEFAULT_BUDGET};
use bkweights::json::{parse, ModuleDoc};
use bkweights::sdinduced::{extract_module, inertial_data, is_sd_via_explicit};

fn small_field() -> impl Strategy<Value = (u32, usize)> {
    prop_oneof![Just((2u32, 1usize)), Just((2, 2)), Just((3, 1)), Just((3, 2)), Just((5, 1))]
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn series_ring_laws(seed: u64, prec in 1i64..30) {
        let f = FqField::new(3, 2).unwrap();
        let mut rng = seeded(seed);
        let mut s = || random_poly(&f, &mut rng, 0, prec + 2, 0.5, prec);
        let (a, b, c) = (s(), s(), s());
        prop_assert!(a.mul(&b).mul(&c).agrees_with(&a.mul(&b.mul(&c))));
        prop_assert!(a.mul(&b.add(&c)).agrees_with(&a.mul(&b).add(&a.mul(&c))));
        prop_assert!(a.mul(&b).agrees_with(&b.mul(&a)));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn inverse_of_product(seed: u64, prec in 1i64..25) {
        let f = FqField::new(5, 1).unwrap();
        let mut rng = seeded(seed);
        let unit = |rng: &mut _| Series::constant(&f, f.random_nonzero(rng), prec).add(&random_poly(&f, rng, 1, prec, 0.5, prec));
        let (a, b) = (unit(&mut rng), unit(&mut rng));
        let lhs = a.mul(&b).inverse(prec).unwrap();
        let rhs = a.inverse(prec).unwrap().mul(&b.inverse(prec).unwrap());
        prop_assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn both_weight_routes_agree(seed: u64, (p, m) in small_field(), n in 1usize..=3) {
        let f = FqField::new(p, m).unwrap();
        let m = random_module(&f, &mut seeded(seed), n, m, BKModule::default_precision(p, n));
        prop_assert_eq!(weights(&m).unwrap(), weights_via_filtration(&m).unwrap());
    }

    #[test]
    fn sd_and_weights_survive_base_change_and_twist(seed: u64, (p, m) in small_field(), n in 1usize..=3) {
        let f = FqField::new(p, m).unwrap();
        let mut rng = seeded(seed);
        let prec = BKModule::default_precision(p, n);
        let base = if seed % 2 == 0 { random_sd_module(&f, &mut rng, n, m, prec) } else { random_module(&f, &mut rng, n, m, prec) };
        let r = is_strongly_divisible(&base).unwrap();
        let c = is_strongly_divisible(&random_conjugate(&base, &mut rng, prec)).unwrap();
        prop_assert_eq!(&r.weights, &c.weights);
        prop_assert_eq!(r.strongly_divisible, c.strongly_divisible);
        let t = is_strongly_divisible(&twist_unramified(&base, f.random_nonzero(&mut rng)).unwrap()).unwrap();
        prop_assert_eq!(&r.weights, &t.weights);
        prop_assert_eq!(r.strongly_divisible, t.strongly_divisible);
        if let Some(cert) = &r.certificate {
            prop_assert!(cert.verify(&base).unwrap());
        }
    }

    #[test]
    fn weights_are_additive_on_sd_extensions(seed: u64, (p, m) in small_field(), r1 in 1usize..=2, r2 in 1usize..=2) {
        let f = FqField::new(p, m).unwrap();
        let e = random_sd_extension(&f, &mut seeded(seed), r1, r2, m, BKModule::default_precision(p, r1 + r2));
        let sq = sub_quotient(&e.middle, &e.sub).unwrap();
        let r = check_exact_sd(&sq.sub, &e.middle, &sq.quotient).unwrap();
        prop_assert!(r.middle_sd && r.sub_sd && r.quot_sd && r.weights_additive && r.strict);
    }

    #[test]
    fn json_round_trip(seed: u64, (p, m) in small_field(), n in 1usize..=3) {
        let f = FqField::new(p, m).unwrap();
        let module = random_module(&f, &mut seeded(seed), n, m, BKModule::default_precision(p, n));
        let text = serde_json::to_string(&ModuleDoc::of(&module)).unwrap();
        let back = parse::<ModuleDoc>(&text).unwrap().build().unwrap();
        prop_assert_eq!(back, module);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn induction_and_restriction_move_weights(seed: u64, p in prop_oneof![Just(2u32), Just(3)], n in 1usize..=2) {
        let ext = UnramifiedExtension::new(1, 2).unwrap();
        let f = FqField::new(p, 2).unwrap();
        let prec = BKModule::default_precision(p, 2 * n);
        let over_l = random_module(&f, &mut seeded(seed), n, 2, prec);
        let w = weights(&over_l).unwrap().0;
        let mut union: Vec<i64> = w.concat();
        union.sort();
        let down = induce(&ext, &over_l).unwrap();
        prop_assert_eq!(weights(&down).unwrap().0, vec![union.clone()]);
        let up = restrict(&ext, &down).unwrap();
        prop_assert_eq!(weights(&up).unwrap().0, vec![union.clone(), union]);
    }

    #[test]
    fn explicit_conditions_match_filtrations(seed: u64, p in prop_oneof![Just(3u32), Just(5)], fl in 2usize..=4, split in any::<bool>()) {
        let mut rng = seeded(seed);
        let fk = if fl == 4 && split { 2 } else { 1 };
        let ambient = random_irreducible_ambient(p, fk, fl, &mut rng).unwrap();
        let m = random_induced_submodule(&ambient, &mut rng, BKModule::default_precision(p, fl)).unwrap();
        let abstract_sd = is_strongly_divisible(&extract_module(&m).unwrap()).unwrap().strongly_divisible;
        prop_assert_eq!(is_sd_via_explicit(&m).unwrap(), abstract_sd);
        if abstract_sd {
            prop_assert!(inertial_data(&m).unwrap().consistent());
        }
    }

    #[test]
    fn inert_set_depends_on_conjugacy_class_only(e in 0i128..80, p in prop_oneof![Just(3u32), Just(5)]) {
        let level = 2;
        let chi = TameCharacter::new(p, level, e).unwrap();
        let base = inert_enumerate(&InertDescription::new(p, 1, vec![chi.clone()]).unwrap(), 0, p as i64, DEFAULT_BUDGET).unwrap();
        for c in character_conjugates(&chi, 1).unwrap() {
            let d = InertDescription::new(p, 1, vec![TameCharacter::new(p, level, c).unwrap()]).unwrap();
            prop_assert_eq!(&inert_enumerate(&d, 0, p as i64, DEFAULT_BUDGET).unwrap(), &base);
        }
    }

    #[test]
    fn shifting_weights_with_a_twist_keeps_membership(e1 in 0i128..24, e2 in 0i128..24, c in -3i64..=3) {
        let p = 5u32;
        let chars = |shift: i128| {
            vec![TameCharacter::new(p, 1, e1 + shift).unwrap(), TameCharacter::new(p, 2, e2 + shift * (1 + p as i128)).unwrap()]
        };
        let base = InertDescription::new(p, 1, chars(0)).unwrap();
        let twisted = InertDescription::new(p, 1, chars(c as i128)).unwrap();
        for t in inert_enumerate(&base, 0, p as i64, DEFAULT_BUDGET).unwrap() {
            prop_assert!(inert_member(&twisted, &t.shifted(c), None).unwrap().is_some());
        }
    }
}
