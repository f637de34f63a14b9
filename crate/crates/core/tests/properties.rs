use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dyndist::battery::{random_dynamic, random_profile, random_sbv};
use dyndist::dynamic::{embed_regulated, jordan_decompose, sequential_representation};
use dyndist::{DynamicFn, PiecewisePoly, Poly, Profile, RegulatedFn, Side};

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 1..=max_len)
}

/// Random piecewise polynomial on `[-1, 1]` with breakpoints at `cuts`.
fn pw(cuts: Vec<f64>, polys: Vec<Vec<f64>>) -> PiecewisePoly {
    let mut breaks = vec![-1.0];
    let mut c = cuts;
    c.sort_by(|a, b| a.total_cmp(b));
    c.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    breaks.extend(c);
    breaks.push(1.0);
    let pieces = (0..breaks.len() - 1)
        .map(|i| Poly::new(polys[i % polys.len()].clone()))
        .collect();
    PiecewisePoly::from_local(breaks, pieces).unwrap()
}

fn arb_pw() -> impl Strategy<Value = PiecewisePoly> {
    (
        prop::collection::vec(-0.9..0.9f64, 0..4),
        prop::collection::vec(coeffs(4), 1..5),
    )
        .prop_map(|(c, p)| pw(c, p))
}

/// Composite Simpson rule on a fine uniform grid, avoiding breakpoint evaluation.
fn simpson(f: &PiecewisePoly, a: f64, b: f64) -> f64 {
    let cuts: Vec<f64> = std::iter::once(a)
        .chain(f.interior_breakpoints().iter().copied().filter(|t| *t > a && *t < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.windows(2)
        .map(|w| {
            let n = 200;
            let h = (w[1] - w[0]) / n as f64;
            let at = |k: usize| {
                let t = w[0] + h * k as f64;
                let side = if k == n { Side::Left } else { Side::Right };
                f.eval_side(t, side).unwrap()
            };
            let mut s = at(0) + at(n);
            for k in 1..n {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * at(k);
            }
            s * h / 3.0
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integral_is_additive(f in arb_pw(), a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64) {
        let lhs = f.integrate(a, c).unwrap();
        let rhs = f.integrate(a, b).unwrap() + f.integrate(b, c).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn integral_matches_quadrature(f in arb_pw()) {
        let exact = f.integrate_all();
        prop_assert!((exact - simpson(&f, -1.0, 1.0)).abs() <= 1e-9);
    }

    #[test]
    fn product_evaluates_pointwise(f in arb_pw(), g in arb_pw(), t in -1.0..1.0f64) {
        let fg = f.multiply(&g).unwrap();
        for side in [Side::Left, Side::Right] {
            if (t == -1.0 && side == Side::Left) || (t == 1.0 && side == Side::Right) {
                continue;
            }
            let want = f.eval_side(t, side).unwrap() * g.eval_side(t, side).unwrap();
            prop_assert!((fg.eval_side(t, side).unwrap() - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn rescale_is_substitution(p in coeffs(5), n in 1u32..2048, tau in -0.4..0.4f64, x in -0.5..0.5f64) {
        let on_j = PiecewisePoly::polynomial(-0.5, 0.5, Poly::new(p)).unwrap();
        let half = 0.5 / n as f64;
        let r = on_j.affine_rescale(n as f64, tau, tau - half, tau + half).unwrap();
        let t = tau + x / n as f64;
        let want = on_j.eval(x).unwrap();
        prop_assert!((r.eval(t).unwrap() - want).abs() <= 1e-9 * (1.0 + want.abs()));
        // in normalized coordinates the window carries the same coefficients for every n
        prop_assert!((r.max_abs_coeff() - on_j.max_abs_coeff()).abs() <= 1e-12 * (1.0 + on_j.max_abs_coeff()));
    }

    #[test]
    fn variation_dominates_partitions(f in arb_pw()) {
        let tv = f.total_variation();
        let samples = f.sample(1000);
        let brute: f64 = samples.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum();
        prop_assert!(brute <= tv + 1e-9);
        // the same partition refined by both one-sided limits at every breakpoint
        let mut pts: Vec<(f64, Side)> = samples.iter().map(|(t, _)| (*t, Side::Right)).collect();
        for b in f.interior_breakpoints() {
            pts.push((*b, Side::Left));
            pts.push((*b, Side::Right));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1 == Side::Right).cmp(&(b.1 == Side::Right))));
        let vals: Vec<f64> = pts
            .iter()
            .map(|(t, s)| f.eval_side(*t, if *t == 1.0 { Side::Left } else { *s }).unwrap())
            .collect();
        let refined: f64 = vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        prop_assert!(refined <= tv + 1e-9);
        prop_assert!(tv - refined <= 0.05 * (1.0 + tv));
    }

    #[test]
    fn jordan_reconstructs(f in arb_pw(), t in -0.99..0.99f64) {
        let g = RegulatedFn::new(f.clone());
        let parts = jordan_decompose(&g);
        prop_assert!(parts.continuous.is_continuous(1e-12));
        let steps: f64 = parts.jumps.iter().filter(|(tau, _)| *tau <= t).map(|(_, s)| s).sum();
        let want = f.eval_side(t, Side::Right).unwrap();
        prop_assert!((parts.continuous.eval_side(t, Side::Right).unwrap() + steps - want).abs() <= 1e-10);
    }

    #[test]
    fn embedding_is_multiplicative(f in arb_pw(), g in arb_pw()) {
        let (f, g) = (RegulatedFn::new(f), RegulatedFn::new(g));
        let lhs = embed_regulated(&f.multiply(&g).unwrap());
        let rhs = embed_regulated(&f).multiply(&embed_regulated(&g)).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn profiles_match_limits(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_dynamic(&mut rng, -1.0, 1.0, &[-0.3, 0.4]).unwrap();
        let g = random_sbv(&mut rng, -1.0, 1.0, &[-0.3, 0.4]).unwrap();
        for h in [f.clone(), g.clone(), f.multiply(&g).unwrap(), f.add(&g).unwrap()] {
            for (tau, p) in h.profiles() {
                let l = h.eval_side(*tau, Side::Left).unwrap();
                let r = h.eval_side(*tau, Side::Right).unwrap();
                prop_assert!((p.start() - l).abs() <= 1e-12 * (1.0 + l.abs()));
                prop_assert!((p.end() - r).abs() <= 1e-12 * (1.0 + r.abs()));
            }
        }
    }

    #[test]
    fn sequential_representation_scales_integrals(seed in any::<u64>(), e in 0u32..11) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = random_profile(&mut rng, 0.3, -1.2);
        let n = 1u32 << e;
        let f = sequential_representation(&beta, 0.1, n, -1.0, 1.0).unwrap();
        let want = beta.curve().integrate_all() / n as f64;
        prop_assert!((f.body().integrate_all() - want).abs() <= 1e-14);
        prop_assert!((f.eval_side(0.1, Side::Right).unwrap() - beta.curve().eval(0.0).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn curved_profile_norm() {
    // 2s² + s on J falls from 0 to −1/8 and rises to 1
    let beta = Profile::polynomial(Poly::new(vec![0.0, 1.0, 2.0])).unwrap();
    let theta = DynamicFn::heaviside(-1.0, 1.0, 0.0, beta.clone()).unwrap();
    assert!((beta.variation() - 1.25).abs() <= 1e-12);
    assert!((theta.sbv_norm() - 1.25).abs() <= 1e-12);
    let brute: f64 = (0..=10_000)
        .map(|k| -0.5 + k as f64 / 10_000.0)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| (beta.curve().eval(w[1]).unwrap() - beta.curve().eval(w[0]).unwrap()).abs())
        .sum();
    assert!((brute - 1.25).abs() <= 1e-9);
}
