use higgs_dt::cli::{base_level, random_qt, random_series};
use higgs_dt::hall::{hn_expand, hn_factorize, LatticePoint, QuiverLattice};
use higgs_dt::partition::Partition;
use higgs_dt::ratfun::RatFun;
use higgs_dt::scalar::{rat, Coef, QSqrt, Scalar, SymbolicScalar, TowerCtx, TowerScalar};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn partition() -> impl Strategy<Value = Partition> {
    prop::collection::vec(1usize..7, 0..7).prop_map(Partition::new)
}

fn small_rat(rng: &mut StdRng) -> higgs_dt::scalar::Rat {
    rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

proptest! {
    #[test]
    fn conjugate_is_an_involution(p in partition()) {
        prop_assert_eq!(p.conjugate().conjugate(), p.clone());
        prop_assert_eq!(p.conjugate().weight(), p.weight());
    }

    #[test]
    fn arm_leg_sums(p in partition()) {
        let cells = p.cells();
        let arms: usize = cells.iter().map(|c| c.arm).sum();
        let legs: usize = cells.iter().map(|c| c.leg).sum();
        let n_conj: usize = p.parts().iter().map(|&l| l * (l - 1) / 2).sum();
        let n: usize = p.parts().iter().enumerate().map(|(i, &l)| i * l).sum();
        prop_assert_eq!(arms, n_conj);
        prop_assert_eq!(legs, n);
        let hooks: usize = cells.iter().map(|c| 2 * c.leg + 1).sum();
        prop_assert_eq!(hooks, p.pairing());
    }

    #[test]
    fn symbolic_exp_log(seed in any::<u64>(), rmax in 1usize..4, dmax in 0usize..4) {
        let ctx = SymbolicScalar::context(1);
        let mut rng = StdRng::seed_from_u64(seed);
        let v = SymbolicScalar::v(&ctx);
        let gen = |rng: &mut StdRng| v.scale(&small_rat(rng)).add(&SymbolicScalar::from_rat(&ctx, &small_rat(rng)));
        let f = random_series(&mut rng, &SymbolicScalar::zero(&ctx), rmax, dmax, gen);
        let g = random_series(&mut rng, &SymbolicScalar::zero(&ctx), rmax, dmax, gen);
        prop_assert_eq!(f.exp().unwrap().log().unwrap(), f.clone());
        prop_assert_eq!(f.add(&g).unwrap().exp().unwrap(), f.exp().unwrap().mul(&g.exp().unwrap()).unwrap());
    }

    #[test]
    fn tower_exp_log(seed in any::<u64>(), q in prop::sample::select(vec![2u64, 3, 5])) {
        let ctx = TowerCtx { q, depth: 3 };
        let mut rng = StdRng::seed_from_u64(seed);
        let gen = |rng: &mut StdRng| {
            TowerScalar::from_levels(q, (0..3).map(|_| QSqrt::new(small_rat(rng), small_rat(rng), q)).collect())
        };
        let f = random_series(&mut rng, &TowerScalar::zero(&ctx), 3, 2, gen);
        prop_assert_eq!(base_level(&f.exp().unwrap().log().unwrap()), base_level(&f));
    }

    #[test]
    fn hn_round_trip(seed in any::<u64>(), n in 1usize..4, g in 0usize..3, l in -2i64..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let one = TowerScalar::one(&TowerCtx { q: 3, depth: 1 });
        let lat = QuiverLattice::new(n, g, l).unwrap();
        let (rmax, dmax) = if n == 1 { (3, 3) } else { (2, 2) };
        let s = random_qt(&mut rng, lat, rmax, dmax, &one);
        prop_assert_eq!(hn_expand(&hn_factorize(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn skew_form_is_antisymmetric(a in prop::collection::vec((0i64..4, -3i64..4), 3), b in prop::collection::vec((0i64..4, -3i64..4), 3), l in -2i64..4) {
        let lat = QuiverLattice::new(3, 1, l).unwrap();
        let (a, b) = (LatticePoint(a), LatticePoint(b));
        prop_assert_eq!(lat.skew(&a, &b), -lat.skew(&b, &a));
        prop_assert_eq!(lat.skew(&a, &a), 0);
    }

    #[test]
    fn ratfun_display_parses_back(cs in prop::collection::vec(-5i64..6, 6)) {
        let ctx = SymbolicScalar::context(2);
        let v = RatFun::var(ctx.clone(), 0);
        let a = RatFun::var(ctx.clone(), 1);
        let c = |k: i64| RatFun::from_int(ctx.clone(), k);
        let num = &(&c(cs[0]) + &(&v * &c(cs[1]))) + &(&(&a * &a) * &c(cs[2]));
        let den = &(&c(1) + &(&v * &c(cs[3]))) + &(&(&v * &a) * &c(cs[4].max(1)));
        let x = &num / &den;
        prop_assert_eq!(RatFun::parse(&ctx, &x.to_string()).unwrap(), x);
    }
}
