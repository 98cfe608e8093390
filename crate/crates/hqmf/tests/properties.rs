use hqmf::boundary::{hyperbolic_plus, BoundaryData};
use hqmf::fpoly::FFamily;
use hqmf::hlattice::{disc_group, dual_basis, HermLattice};
use hqmf::qfield::{make_field, FieldElem, KElem, QuadField, Q};
use hqmf::torcoh::CohRing;
use hqmf::weilrep::{cmatmul, max_diff, unitarity_defect, WeilRep};
use num_traits::{One, Zero};
use proptest::prelude::*;

const DS: [i64; 5] = [1, 2, 3, 7, 11];

fn field() -> impl Strategy<Value = QuadField> {
    prop::sample::select(DS.to_vec()).prop_map(|d| make_field(d).unwrap())
}

fn elem(k: QuadField, r: i64) -> impl Strategy<Value = FieldElem> {
    (-r..=r, -r..=r).prop_map(move |(a, b)| k.elem_i(a, b))
}

fn vecs(k: QuadField, n: usize, m: usize, r: i64) -> impl Strategy<Value = Vec<Vec<FieldElem>>> {
    prop::collection::vec(prop::collection::vec(elem(k, r), n), m)
}

fn rat_elem(k: QuadField) -> impl Strategy<Value = FieldElem> {
    (-20i64..=20, -20i64..=20, 1i64..=6).prop_map(move |(a, b, den)| {
        let q = |x: i64| Q::new(x.into(), den.into());
        k.elem(q(a), q(b))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_arithmetic(k in field(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut r = || k.elem(Q::new(rng.gen_range(-30i64..=30).into(), rng.gen_range(1i64..=5).into()), Q::new(rng.gen_range(-30i64..=30).into(), rng.gen_range(1i64..=5).into()));
        let (x, y, z) = (r(), r(), r());
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!((&x * &y).conj(), &x.conj() * &y.conj());
        prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
        prop_assert_eq!(x.norm(), (&x * &x.conj()).a);
        prop_assert_eq!((&x + &x.conj()).a, x.trace());
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.inv().unwrap(), k.one());
            prop_assert!(x.norm() > Q::zero());
        }
        // the embedding in K = k(i) is a ring map
        prop_assert_eq!((&x * &y).to_ext(), x.to_ext() * y.to_ext());
        prop_assert_eq!(x.conj().to_ext(), x.to_ext().conj());
    }

    #[test]
    fn hermitian_form_is_sesquilinear(k in field(), a in rat_elem(make_field(1).unwrap()), xs in vecs(make_field(1).unwrap(), 3, 3, 4)) {
        // move the sampled d = 1 data into k by coordinates
        let mv = |x: &FieldElem| k.elem(x.a.clone(), x.b.clone());
        let a = mv(&a);
        let xs: Vec<Vec<FieldElem>> = xs.iter().map(|v| v.iter().map(mv).collect()).collect();
        let l = HermLattice::new(k, vec![
            vec![k.from_int(2), k.omega(), k.zero()],
            vec![k.omega().conj(), k.from_int(3), k.one()],
            vec![k.zero(), k.one(), k.from_int(2)],
        ], hqmf::hlattice::Definiteness::Positive);
        prop_assume!(l.is_ok());
        let l = l.unwrap();
        let (x, y, z) = (&xs[0], &xs[1], &xs[2]);
        let ax: Vec<FieldElem> = x.iter().map(|c| &a * c).collect();
        let ay: Vec<FieldElem> = y.iter().map(|c| &a * c).collect();
        let yz: Vec<FieldElem> = y.iter().zip(z).map(|(p, q)| p + q).collect();
        prop_assert_eq!(l.h(&ax, y), &a * &l.h(x, y));
        prop_assert_eq!(l.h(x, &ay), &a.conj() * &l.h(x, y));
        prop_assert_eq!(l.h(x, &yz), &l.h(x, y) + &l.h(x, z));
        prop_assert_eq!(l.h(y, x), l.h(x, y).conj());
        prop_assert!(l.h(x, x).is_rational());
        prop_assert_eq!(l.norm(x), l.h(x, x).a);
    }

    #[test]
    fn basis_values_scale_by_norm_of_det(k in prop::sample::select(vec![1i64, 3, 7]).prop_map(|d| make_field(d).unwrap()),
                                         seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut r = |b: i64| k.elem_i(rng.gen_range(-b..=b), rng.gen_range(-b..=b));
        let (n, g) = (3, 2);
        let fam = FFamily::identity(k, n).unwrap();
        let lam: Vec<Vec<FieldElem>> = (0..g).map(|_| (0..n).map(|_| r(3)).collect()).collect();
        let a: Vec<Vec<FieldElem>> = (0..g).map(|_| (0..g).map(|_| r(2)).collect()).collect();
        // (λA)_j = Σ_i A_ij λ_i
        let lam_a: Vec<Vec<FieldElem>> = (0..g)
            .map(|j| (0..n).map(|c| (0..g).fold(k.zero(), |s, i| &s + &(&a[i][j] * &lam[i][c]))).collect())
            .collect();
        let det = &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]);
        let before = fam.basis_values(g, &lam).unwrap();
        let after = fam.basis_values(g, &lam_a).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert_eq!(x.scale(&det.norm()), y.clone());
        }
    }

    #[test]
    fn sl2_commutator_on_random_polys(n in 2usize..=4, gsel in 0usize..4, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let g = 1 + gsel % (n - 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = make_field(1).unwrap();
        let fam = FFamily::diagonal(k, &vec![1; n]).unwrap();
        let mut p = fam.zero_poly(g);
        for c in p.coeffs.iter_mut() {
            *c = KElem::from_q(1, Q::from_integer(rng.gen_range(-5i64..=5).into()));
        }
        // [E, F] = H with E raising and F lowering
        let ef = fam.raise(&fam.lower(&p));
        let fe = fam.lower(&fam.raise(&p));
        prop_assert_eq!(ef.sub(&fe), p.scale_q(&Q::from_integer(fam.weight(g).into())));
    }

    #[test]
    fn f_quad_expansion_agrees(k in prop::sample::select(vec![1i64, 2, 3]).prop_map(|d| make_field(d).unwrap()),
                               diag in prop::collection::vec(1i64..=4, 1..=3), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = diag.len();
        let ring = CohRing::new(k, diag).unwrap();
        let x: Vec<FieldElem> = (0..n).map(|_| k.elem_i(rng.gen_range(-4..=4), rng.gen_range(-4..=4))).collect();
        let y: Vec<FieldElem> = (0..n).map(|_| k.elem_i(rng.gen_range(-4..=4), rng.gen_range(-4..=4))).collect();
        let a = k.elem_i(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let ax: Vec<FieldElem> = x.iter().map(|c| &a * c).collect();
        prop_assert_eq!(ring.f_quad(&x).unwrap(), ring.f_quad_expansion(&x).unwrap());
        // f(λ, μ) is additive in each slot and f(λ, λ) = f_quad(λ)
        let xy: Vec<FieldElem> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        prop_assert_eq!(ring.f_sesq(&xy, &y).unwrap(), ring.f_sesq(&x, &y).unwrap().add(&ring.f_sesq(&y, &y).unwrap()));
        prop_assert_eq!(ring.f_sesq(&x, &x).unwrap(), ring.f_quad(&x).unwrap());
        // quadratic scaling by the norm
        prop_assert_eq!(ring.f_quad(&ax).unwrap(), ring.f_quad(&x).unwrap().scale(&KElem::from_q(k.d, a.norm())));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coset_map_is_a_homomorphism(k in prop::sample::select(vec![1i64, 2, 3, 7]).prop_map(|d| make_field(d).unwrap()),
                                   diag in prop::collection::vec(1i64..=3, 1..=2), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let l = HermLattice::diagonal(k, &diag).unwrap();
        let dg = disc_group(&l).unwrap();
        let db = dual_basis(&l).unwrap().basis_matrix;
        let n = l.rank();
        let mut dual = || {
            let c: Vec<FieldElem> = (0..n).map(|_| k.elem_i(rng.gen_range(-5..=5), rng.gen_range(-5..=5))).collect();
            (0..n).map(|col| (0..n).fold(k.zero(), |s, r| &s + &(&c[r] * &db[r][col]))).collect::<Vec<FieldElem>>()
        };
        let (x, y) = (dual(), dual());
        prop_assert!(l.in_dual(&x));
        let sum: Vec<FieldElem> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let neg: Vec<FieldElem> = x.iter().map(|a| -a).collect();
        let (cx, cy) = (dg.coset_of(&x).unwrap(), dg.coset_of(&y).unwrap());
        prop_assert_eq!(dg.coset_of(&sum).unwrap(), dg.add(cx, cy));
        prop_assert_eq!(dg.coset_of(&neg).unwrap(), dg.neg(cx));
        // shifting by L keeps the coset
        let lat: Vec<FieldElem> = (0..n).map(|_| k.elem_i(rng.gen_range(-5..=5), rng.gen_range(-5..=5))).collect();
        let shifted: Vec<FieldElem> = x.iter().zip(&lat).map(|(a, b)| a + b).collect();
        prop_assert_eq!(dg.coset_of(&shifted).unwrap(), cx);
    }

    #[test]
    fn weil_generators_compose(k in prop::sample::select(vec![1i64, 3]).prop_map(|d| make_field(d).unwrap()),
                               a in 1i64..=3, b1 in -3i64..=3, b2 in -3i64..=3) {
        let l = HermLattice::diagonal(k, &[a]).unwrap();
        let wr = WeilRep::new(l, 1).unwrap();
        let b = |x: i64| vec![vec![k.from_int(x)]];
        let n1 = wr.rho_n(&b(b1)).unwrap();
        let n2 = wr.rho_n(&b(b2)).unwrap();
        let n12 = wr.rho_n(&b(b1 + b2)).unwrap();
        prop_assert!(max_diff(&cmatmul(&n1.to_complex(), &n2.to_complex()), &n12.to_complex()) < 1e-12);
        let w = wr.rho_w().unwrap();
        prop_assert!(unitarity_defect(&w) < 1e-10);
        prop_assert!(unitarity_defect(&n1.to_complex()) < 1e-12);
    }

    #[test]
    fn arrow_ignores_the_lift(d in prop::sample::select(vec![1i64, 3]), a in 1i64..=2, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = make_field(d).unwrap();
        let l = hyperbolic_plus(k, &[a]).unwrap();
        let n = l.rank();
        let mut e = vec![k.zero(); n];
        e[0] = k.one();
        let bd = BoundaryData::new(&l, &e).unwrap();
        let order = bd.dg_l.order();
        let nu = rng.gen_range(0..order);
        prop_assume!(bd.in_support(nu));
        let base = bd.arrow_up(nu).unwrap().unwrap();
        for _ in 0..4 {
            let shift: Vec<FieldElem> = (0..n).map(|_| k.elem_i(rng.gen_range(-4..=4), rng.gen_range(-4..=4))).collect();
            let x: Vec<FieldElem> = bd.dg_l.vectors[nu].iter().zip(&shift).map(|(p, q)| p + q).collect();
            prop_assert_eq!(bd.arrow_of_lift(&x).unwrap(), base);
        }
        // additive on the support
        let mu = rng.gen_range(0..order);
        if bd.in_support(mu) {
            let s = bd.dg_l.add(nu, mu);
            let lhs = bd.arrow_up(s).unwrap().unwrap();
            let rhs = bd.dg_m.add(base, bd.arrow_up(mu).unwrap().unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn unit_scaling_is_invisible() {
    // |det A|² = 1 for units, so basis values do not move
    let k = make_field(3).unwrap();
    let fam = FFamily::identity(k, 2).unwrap();
    let lam = vec![vec![k.elem_i(1, 2), k.elem_i(-1, 1)]];
    let before = fam.basis_values(1, &lam).unwrap();
    for (u, _) in k.units() {
        let moved = vec![lam[0].iter().map(|c| &u * c).collect::<Vec<_>>()];
        assert_eq!(fam.basis_values(1, &moved).unwrap(), before);
        assert!(u.norm().is_one());
    }
}
