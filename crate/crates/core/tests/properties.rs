use proptest::prelude::*;
use underfit::model::{fit_minimal, soft_membership};
use underfit::nmu::{init_svd, reconstruction_residual};
use underfit::preference::{deflate_columns, Hypothesis, PreferenceMatrix};
use underfit::robustfit::mis::select_from_graph;
use underfit::robustfit::{kuiper_d_minus, misclassification_error, p_value, ConflictGraph, PValueKind};
use underfit::{extract_factors, solve_rank_one, DenseMatrix, ModelFamily, ModelParams, NmuConfig};

fn nonneg_matrix(max_dim: usize) -> impl Strategy<Value = DenseMatrix> {
    (2..=max_dim, 2..=max_dim).prop_flat_map(|(m, n)| {
        prop::collection::vec(0.0..1.0f64, m * n).prop_map(move |d| DenseMatrix::new(m, n, d).unwrap())
    })
}

fn quick() -> NmuConfig {
    NmuConfig {
        max_iters: 300,
        ..NmuConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rank_one_factor_is_feasible_and_normalized(a in nonneg_matrix(12)) {
        prop_assume!(a.max() > 0.0);
        let f = solve_rank_one(&a, init_svd(&a).unwrap(), &quick()).unwrap();
        prop_assert!((f.u.max() - 1.0).abs() < 1e-12);
        prop_assert!(f.u.iter().chain(f.v.iter()).all(|&x| x >= 0.0));
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                prop_assert!(a.get(i, j) - f.u[i] * f.v[j] >= -1e-9 * a.max());
            }
        }
    }

    #[test]
    fn zero_rows_and_columns_stay_zero(a in nonneg_matrix(10), zr in 0usize..10, zc in 0usize..10) {
        let (zr, zc) = (zr % a.rows(), zc % a.cols());
        let mut a = a;
        for j in 0..a.cols() { a.set(zr, j, 0.0); }
        for i in 0..a.rows() { a.set(i, zc, 0.0); }
        prop_assume!(a.max() > 0.0);
        let f = solve_rank_one(&a, init_svd(&a).unwrap(), &quick()).unwrap();
        prop_assert_eq!(f.u[zr], 0.0);
        prop_assert_eq!(f.v[zc], 0.0);
    }

    #[test]
    fn factors_never_explain_more_than_the_data(a in nonneg_matrix(10), rank in 1usize..4) {
        prop_assume!(a.max() > 0.0);
        let factors = extract_factors(&a, rank, &quick()).unwrap();
        let residual = reconstruction_residual(&a, &factors);
        prop_assert!(residual.min() >= -1e-6 * a.max());
        let explained: f64 = factors.iter().map(|f| f.outer().frobenius_norm().powi(2)).sum();
        prop_assert!(explained <= a.frobenius_norm().powi(2) * (1.0 + 1e-6));
    }

    #[test]
    fn residual_is_invariant_under_rigid_motion(
        p in prop::array::uniform2(-1.0..1.0f64), q in prop::array::uniform2(-1.0..1.0f64),
        x in prop::array::uniform2(-1.0..1.0f64), angle in 0.0..6.3f64, shift in prop::array::uniform2(-2.0..2.0f64),
    ) {
        prop_assume!((p[0] - q[0]).hypot(p[1] - q[1]) > 1e-3);
        let (c, s) = (angle.cos(), angle.sin());
        let mv = |z: [f64; 2]| [c * z[0] - s * z[1] + shift[0], s * z[0] + c * z[1] + shift[1]];
        let before = fit_minimal(ModelFamily::Line2D, &[p, q]).unwrap().residual(&x).unwrap();
        let after = fit_minimal(ModelFamily::Line2D, &[mv(p), mv(q)]).unwrap().residual(&mv(x)).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn soft_membership_decreases(d1 in 0.0..1.0f64, d2 in 0.0..1.0f64, sigma in 0.001..0.5f64) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (a, b) = (soft_membership(lo, sigma), soft_membership(hi, sigma));
        prop_assert!(a >= b);
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
    }

    #[test]
    fn minimal_circle_interpolates(pts in prop::array::uniform3(prop::array::uniform2(-1.0..1.0f64))) {
        let [a, b, c] = pts;
        let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        prop_assume!(area.abs() > 1e-2);
        let model = fit_minimal(ModelFamily::Circle2D, &pts).unwrap();
        for x in pts {
            prop_assert!(model.residual(&x).unwrap() < 1e-8);
        }
    }

    #[test]
    fn fundamental_matrix_is_singular(pts in prop::collection::vec(prop::array::uniform4(-1.0..1.0f64), 8)) {
        let Ok(model) = fit_minimal(ModelFamily::Fundamental, &pts) else { return Ok(()) };
        let f = model.matrix().unwrap();
        let det = f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1]) - f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0])
            + f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0]);
        let scale: f64 = f.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(det.abs() <= 1e-10 * scale.powi(3));
    }

    #[test]
    fn deflation_is_idempotent_and_shrinks(cols in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 6), 2..8),
                                           load in prop::collection::vec(0.0..1.0f64, 8)) {
        let n = cols.len();
        let pref = PreferenceMatrix {
            p: DenseMatrix::from_rows(&(0..6).map(|i| cols.iter().map(|c| c[i]).collect()).collect::<Vec<_>>()).unwrap(),
            hypotheses: vec![Hypothesis { params: ModelParams::line(0.0, 1.0, 0.0).unwrap(), sample_indices: vec![0, 1] }; n],
            sigma: 0.1,
            active: vec![true; n],
        };
        let mut v = load[..n].to_vec();
        v[0] = 1.0;
        let once = deflate_columns(&pref, &v).unwrap();
        let twice = deflate_columns(&once, &v).unwrap();
        prop_assert!(once.n_active() < pref.n_active());
        prop_assert_eq!(&once.active, &twice.active);
        prop_assert_eq!(once.p.data(), twice.p.data());
        prop_assert!(once.p.data().iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn p_value_falls_as_the_statistic_grows(d1 in 0.0..1.0f64, d2 in 0.0..1.0f64, m in 1usize..2000) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        for kind in [PValueKind::Kolmogorov, PValueKind::Smirnov] {
            prop_assert!(p_value(lo, m, kind) >= p_value(hi, m, kind));
            prop_assert!((0.0..=1.0).contains(&p_value(lo, m, kind)));
        }
    }

    #[test]
    fn d_minus_lies_in_unit_interval(values in prop::collection::vec(0.0..=1.0f64, 1..200)) {
        let d = kuiper_d_minus(&values);
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn misclassification_ignores_label_names(truth in prop::collection::vec(0usize..4, 1..60),
                                             pred in prop::collection::vec(0usize..4, 60),
                                             perm in Just([0usize, 3, 1, 2])) {
        let pred = &pred[..truth.len()];
        let renamed: Vec<usize> = pred.iter().map(|&l| perm[l]).collect();
        let a = misclassification_error(pred, &truth).unwrap();
        let b = misclassification_error(&renamed, &truth).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn selection_matches_brute_force(n in 1usize..11, edges in prop::collection::vec(any::<bool>(), 55),
                                     log_p in prop::collection::vec(-50.0..0.0f64, 10)) {
        let mut graph = ConflictGraph::new(n);
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                if edges[k] { graph.add_edge(a, b); }
                k += 1;
            }
        }
        let energy = vec![1.0; n];
        let chosen = select_from_graph(&graph, &log_p[..n], &energy);
        let independent = |s: u32| (0..n).all(|a| (0..n).all(|b| a == b || s >> a & 1 == 0 || s >> b & 1 == 0 || !graph.has_edge(a, b)));
        let maximal = |s: u32| (0..n).all(|a| s >> a & 1 == 1 || !independent(s | 1 << a));
        let mut best: Option<(f64, usize, Vec<usize>)> = None;
        for s in 1u32..1 << n {
            if !independent(s) || !maximal(s) { continue; }
            let set: Vec<usize> = (0..n).filter(|&a| s >> a & 1 == 1).collect();
            let score = set.iter().map(|&t| log_p[t]).sum::<f64>() / set.len() as f64;
            let key = (score, usize::MAX - set.len(), set);
            if best.as_ref().is_none_or(|b| key.0 < b.0 || (key.0 == b.0 && (key.1, &key.2) < (b.1, &b.2))) {
                best = Some(key);
            }
        }
        prop_assert_eq!(chosen, best.unwrap().2);
    }
}
