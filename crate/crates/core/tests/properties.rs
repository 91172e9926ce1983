use brank::completion::{complete_tensor, extract_boundary, Pivot};
use brank::io::{poly_from_json, poly_to_json, tensor_from_json, tensor_to_json, AnyTensor};
use brank::poly::SparsePoly;
use brank::scalar::{rat, ratio};
use brank::tensor::random_rank;
use brank::words::{higman_embed, subs_witness};
use brank::{IncMap, Rational, SubsElement, Tensor, Word};
use num_traits::Zero;
use proptest::prelude::*;

fn word(n: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..n, 0..=max_len).prop_map(move |s| Word::from_symbols(n, &s).unwrap())
}

/// Elements of length `m` whose sets partition a random subset of `1..=3m`.
fn subs_element(m: usize) -> impl Strategy<Value = SubsElement> {
    prop::collection::vec(0..=m, 3 * m).prop_map(move |labels| {
        let mut sets = vec![Vec::new(); m];
        for (i, &l) in labels.iter().enumerate() {
            if l > 0 {
                sets[l - 1].push(i + 1);
            }
        }
        SubsElement::from_lists(&sets).unwrap()
    })
}

fn small_tensor() -> impl Strategy<Value = Tensor<Rational>> {
    prop::collection::vec(2usize..=3, 1..=4).prop_flat_map(|dims| {
        let len: usize = dims.iter().product();
        prop::collection::vec(-20i64..=20, len).prop_map(move |xs| Tensor::new(dims.clone(), xs.into_iter().map(rat).collect()).unwrap())
    })
}

proptest! {
    #[test]
    fn word_order_matches_numeric_value(a in word(3, 8), b in word(3, 8)) {
        prop_assert_eq!(a.cmp(&b), a.order_key().cmp(&b.order_key()));
    }

    #[test]
    fn subs_action_is_a_monoid_action(w in word(2, 4), s in subs_element(4), t in subs_element(12)) {
        let direct = t.act(&s.act(&w).unwrap()).unwrap();
        let product = t.mul(&s).unwrap().act(&w).unwrap();
        prop_assert_eq!(direct, product);
    }

    #[test]
    fn subs_product_is_associative(a in subs_element(1), b in subs_element(3), c in subs_element(9)) {
        let left = c.mul(&b.mul(&a).unwrap()).unwrap();
        let right = c.mul(&b).unwrap().mul(&a).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn increasing_maps_preserve_symbols(w in word(3, 6), extra in prop::collection::vec(1usize..3, 6)) {
        let mut next = 0;
        let values: Vec<usize> = extra.iter().map(|e| { next += e; next }).collect();
        let pi = IncMap::new(values).unwrap();
        let image = pi.act(&w).unwrap();
        for j in 1..=w.max_support() {
            prop_assert_eq!(image.get(pi.at(j)), w.get(j));
        }
        prop_assert_eq!(image.support().len(), w.support().len());
    }

    #[test]
    fn witnesses_are_valid_and_embeddings_match(a in word(3, 6), b in word(3, 9)) {
        if let Some(s) = subs_witness(&a, &b) {
            prop_assert!(s.is_increasing());
            prop_assert_eq!(s.act(&a).unwrap(), b.clone());
        }
        if let Some(pi) = higman_embed(&a, &b) {
            for j in 1..=a.max_support() {
                prop_assert_eq!(a.get(j), b.get(pi.at(j)));
            }
        }
    }

    #[test]
    fn flattening_keeps_entries(t in small_tensor(), mask in 1usize..16) {
        let p = t.order();
        let rows: Vec<usize> = (0..p).filter(|m| mask >> m & 1 == 1).collect();
        if !rows.is_empty() && rows.len() < p {
            let mut a = t.data().to_vec();
            let mut b = t.flatten(&rows).unwrap().into_data();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn embedding_then_projecting_is_identity(t in small_tensor()) {
        prop_assert_eq!(t.embed_tau().project_pi().unwrap(), t);
    }

    #[test]
    fn permuting_modes_is_invertible(t in small_tensor(), shift in 0usize..4) {
        let p = t.order();
        let perm: Vec<usize> = (0..p).map(|k| (k + shift) % p).collect();
        let mut inverse = vec![0; p];
        for (k, &q) in perm.iter().enumerate() {
            inverse[q] = k;
        }
        prop_assert_eq!(t.permute_modes(&perm).unwrap().permute_modes(&inverse).unwrap(), t);
    }

    #[test]
    fn contraction_is_linear(t in small_tensor(), a in -5i64..=5, b in -5i64..=5) {
        let d = t.dims()[0];
        let phi: Vec<Rational> = (0..d).map(|i| rat(i as i64 + 1)).collect();
        let psi: Vec<Rational> = (0..d).map(|i| rat(1 - i as i64)).collect();
        let mixed: Vec<Rational> = phi.iter().zip(&psi).map(|(x, y)| x * rat(a) + y * rat(b)).collect();
        if t.order() > 1 {
            let lhs = t.contract(0, &mixed).unwrap();
            let rhs = t.contract(0, &phi).unwrap().scale(&rat(a)).add(&t.contract(0, &psi).unwrap().scale(&rat(b))).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn tensor_json_round_trips(t in small_tensor(), den in 1i64..7) {
        let t = t.scale(&ratio(1, den));
        prop_assert_eq!(tensor_from_json(&tensor_to_json(&t)).unwrap(), AnyTensor::Rational(t));
    }

    #[test]
    fn polynomial_ring_laws(a in word(2, 3), b in word(2, 3), c in word(2, 3), k in -4i64..=4) {
        let (x, y, z) = (SparsePoly::var(a), SparsePoly::var(b), SparsePoly::var(c).scale(&rat(k)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        let f = x.mul(&y).sub(&z);
        prop_assert_eq!(poly_from_json(&poly_to_json(&f), 2).unwrap(), f);
    }

    #[test]
    fn completion_round_trips_rank_one(seed in 0u64..10_000) {
        let (t, _) = random_rank(&[2, 2, 2, 2, 2], 1, seed, 10).unwrap();
        let bin = |s: &str| Word::parse(2, s).unwrap();
        let pivot = Pivot::new(vec![bin("1")], vec![bin("01")], [1]).unwrap();
        prop_assume!(!t.get(&[1, 1, 0, 0, 0]).is_zero());
        let c = complete_tensor(&extract_boundary(&t, 2, false).unwrap(), &pivot).unwrap();
        prop_assert_eq!(c, t);
    }
}
