use gaussentangle::linalg::{det4, expm4, solve16, sym_eig4, Mat4};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Laplace expansion along the first row; independent of the LU path.
fn det_cofactor(m: &Mat4) -> f64 {
    let det3 = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let e = |r: usize, c: usize| m.0[r][cols[c]];
        e(1, 0) * (e(2, 1) * e(3, 2) - e(2, 2) * e(3, 1)) - e(1, 1) * (e(2, 0) * e(3, 2) - e(2, 2) * e(3, 0))
            + e(1, 2) * (e(2, 0) * e(3, 1) - e(2, 1) * e(3, 0))
    };
    (0..4)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m.0[0][j] * det3(j)
        })
        .sum()
}

/// Roots of det(m - xI) found by sign-change scanning and bisection.
fn char_poly_roots(m: &Mat4) -> Vec<f64> {
    let p = |x: f64| det_cofactor(&(*m - Mat4::identity() * x));
    let bound = (0..4)
        .map(|i| (0..4).map(|j| m.0[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let n = 20_000;
    let mut roots = Vec::new();
    let mut prev_x = -bound;
    let mut prev = p(prev_x);
    for k in 1..=n {
        let x = -bound + 2.0 * bound * k as f64 / n as f64;
        let v = p(x);
        if v == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            let (mut lo, mut hi, lo_pos) = (prev_x, x, prev > 0.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if (p(mid) > 0.0) == lo_pos {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_x = x;
        prev = v;
    }
    roots
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..4 {
        for j in i..4 {
            let v = rng.gen_range(-3.0..3.0);
            m.0[i][j] = v;
            m.0[j][i] = v;
        }
    }
    m
}

#[test]
fn det4_matches_cofactor_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let m = Mat4(std::array::from_fn(|_| {
            std::array::from_fn(|_| rng.gen_range(-2.0..2.0))
        }));
        let want = det_cofactor(&m);
        assert!((det4(&m) - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
}

#[test]
fn two_mode_squeezed_det_by_cofactor() {
    let r: f64 = 0.5;
    let (c, s) = (0.5 * r.cosh(), 0.5 * r.sinh());
    let sigma = Mat4([[c, 0.0, s, 0.0], [0.0, c, 0.0, -s], [s, 0.0, c, 0.0], [0.0, -s, 0.0, c]]);
    assert!((det_cofactor(&sigma) - 1.0 / 16.0).abs() < 1e-15);
    assert!((det4(&sigma) - 1.0 / 16.0).abs() < 1e-15);
}

#[test]
fn sym_eig4_matches_quartic_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for instance in 0..20 {
        let m = random_symmetric(&mut rng);
        let eig = sym_eig4(&m).unwrap();
        let roots = char_poly_roots(&m);
        assert_eq!(roots.len(), 4, "instance {instance}: roots {roots:?}");
        for (a, b) in eig.iter().zip(&roots) {
            assert!((a - b).abs() <= 1e-9, "instance {instance}: {eig:?} vs {roots:?}");
        }
    }
}

fn bounded_matrix(limit: f64) -> impl Strategy<Value = Mat4> {
    prop::array::uniform16(-limit..limit).prop_map(|v| Mat4::from_array(&v))
}

fn symmetric_matrix() -> impl Strategy<Value = Mat4> {
    prop::array::uniform16(-5.0..5.0f64).prop_map(|v| {
        let m = Mat4::from_array(&v);
        (m + m.transpose()) * 0.5
    })
}

proptest! {
    #[test]
    fn det_of_exponential_is_exp_trace(m in bounded_matrix(2.5)) {
        // ‖m‖₁ ≤ 10
        let e = expm4(&m).unwrap();
        let want = m.trace().exp();
        prop_assert!((det4(&e) - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn exponential_semigroup(m in bounded_matrix(0.5), t1 in 0.0..5.0f64, t2 in 0.0..5.0f64) {
        let lhs = expm4(&(m * t1)).unwrap() * expm4(&(m * t2)).unwrap();
        let rhs = expm4(&(m * (t1 + t2))).unwrap();
        prop_assert!((lhs - rhs).max_abs() <= 1e-10 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn eigenvalues_sum_and_product(m in symmetric_matrix()) {
        let eig = sym_eig4(&m).unwrap();
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((eig.iter().sum::<f64>() - m.trace()).abs() <= 1e-10 * m.max_abs().max(1.0));
        let det = det4(&m);
        let prod: f64 = eig.iter().product();
        prop_assert!((prod - det).abs() <= 1e-9 * det.abs().max(1.0));
    }

    #[test]
    fn solve16_residual(diag in prop::array::uniform16(1.0..4.0f64), off in prop::collection::vec(-0.2..0.2f64, 256), rhs in prop::array::uniform16(-1.0..1.0f64)) {
        let mut a = [[0.0; 16]; 16];
        for i in 0..16 {
            for j in 0..16 {
                a[i][j] = off[16 * i + j];
            }
            a[i][i] += diag[i];
        }
        let x = solve16(&a, &rhs).unwrap();
        let norm_b = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let res = (0..16)
            .map(|i| {
                let r = (0..16).map(|j| a[i][j] * x[j]).sum::<f64>() - rhs[i];
                r * r
            })
            .sum::<f64>()
            .sqrt();
        prop_assert!(res <= 1e-10 * norm_b.max(1e-300));
    }
}
