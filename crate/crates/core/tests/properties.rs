use proptest::prelude::*;

use oltae::estimator::{build_deltas, estimate_pose, Correspondence, Method, Pose};
use oltae::fixedpoint::{
    auto_scale, fx_add, fx_estimate_attitude, fx_mul, quantize_terms, to_fixed, Fixed32, FxStatus,
    ScaleConfig,
};
use oltae::hwsim::{core_run, RegisterFile};
use oltae::math::{cayley, inverse_cayley, Crp, Mat3, Vec3};
use oltae::scenario::{generate_scenario, ScenarioConfig};

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn crp() -> impl Strategy<Value = Crp> {
    vec3(2.0).prop_map(Crp)
}

/// 4..30 points with three spread-out anchors so the geometry stays well posed.
fn cloud() -> impl Strategy<Value = Vec<Vec3>> {
    prop::collection::vec(vec3(30.0), 1..27).prop_map(|mut rest| {
        let mut pts = vec![
            Vec3::new(25.0, 0.0, -3.0),
            Vec3::new(-4.0, 25.0, 2.0),
            Vec3::new(1.0, -2.0, 25.0),
        ];
        pts.append(&mut rest);
        pts
    })
}

fn pairs(points: &[Vec3], pose: &Pose, sigma: f64) -> Vec<Correspondence> {
    points
        .iter()
        .map(|a| Correspondence::new(*a, pose.apply(a), sigma).unwrap())
        .collect()
}

fn fx(raw: i32) -> Fixed32 {
    Fixed32::from_raw(raw)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fx_mul_commutes(a in any::<i32>(), b in any::<i32>()) {
        let mut s1 = FxStatus::default();
        let mut s2 = FxStatus::default();
        prop_assert_eq!(fx_mul(fx(a), fx(b), &mut s1), fx_mul(fx(b), fx(a), &mut s2));
        prop_assert_eq!(s1.saturation_count, s2.saturation_count);
    }

    #[test]
    fn fx_add_commutes_and_saturates(a in any::<i32>(), b in any::<i32>()) {
        let mut st = FxStatus::default();
        let sum = fx_add(fx(a), fx(b), &mut st);
        prop_assert_eq!(sum, fx_add(fx(b), fx(a), &mut FxStatus::default()));
        let exact = a as i64 + b as i64;
        let clamped = exact.clamp(i32::MIN as i64, i32::MAX as i64);
        prop_assert_eq!(sum.raw() as i64, clamped);
        prop_assert_eq!(st.saturation_count, (exact != clamped) as u64);
    }

    #[test]
    fn to_fixed_error_bounded(x in -32767.0f64..32767.0) {
        let mut st = FxStatus::default();
        let q = to_fixed(x, &mut st);
        prop_assert!((q.to_f64() - x).abs() <= Fixed32::EPSILON / 2.0);
        prop_assert!(st.trusted());
    }

    #[test]
    fn to_fixed_saturates_out_of_range(x in 32768.0f64..1e12, neg in any::<bool>()) {
        let x = if neg { -x } else { x };
        let mut st = FxStatus::default();
        let q = to_fixed(x, &mut st);
        prop_assert_eq!(q, if neg { Fixed32::MIN } else { Fixed32::MAX });
        prop_assert_eq!(st.saturation_count, 1);
    }

    #[test]
    fn cayley_is_a_rotation(q in crp()) {
        let r = cayley(&q);
        prop_assert!((r.transpose() * r - Mat3::IDENTITY).max_abs() < 1e-12);
        prop_assert!((r.det() - 1.0).abs() < 1e-12);
        let back = inverse_cayley(&r).unwrap();
        prop_assert!((back.0 - q.0).norm_inf() <= 1e-12 * (1.0 + q.0.norm_squared()));
    }

    #[test]
    fn cayley_inverse_is_negated_crp(q in crp()) {
        let r = cayley(&q);
        let r_inv = cayley(&Crp(-q.0));
        prop_assert!((r * r_inv - Mat3::IDENTITY).max_abs() < 1e-12);
    }

    #[test]
    fn noise_free_recovery(points in cloud(), q in vec3(1.0), t in vec3(100.0)) {
        let truth = Pose::new(Crp(q), t);
        let est = estimate_pose(&pairs(&points, &truth, 0.05), &Method::ClosedForm3x3).unwrap();
        prop_assert!((est.q_hat.0 - q).norm_inf() < 1e-9);
        prop_assert!((est.t_hat - t).norm_inf() < 1e-8);
    }

    #[test]
    fn uniform_weight_scale_is_irrelevant(points in cloud(), q in vec3(1.0), t in vec3(50.0), k in 0.01f64..100.0) {
        let truth = Pose::new(Crp(q), t);
        let mut c = pairs(&points, &truth, 1.0);
        // perturb so the estimate is not trivially exact
        for (i, p) in c.iter_mut().enumerate() {
            p.b.x += 0.01 * ((i * 7 % 5) as f64 - 2.0);
        }
        let a = estimate_pose(&c, &Method::ClosedForm3x3).unwrap();
        for p in c.iter_mut() {
            p.sigma *= k;
        }
        let b = estimate_pose(&c, &Method::ClosedForm3x3).unwrap();
        prop_assert!((a.q_hat.0 - b.q_hat.0).norm_inf() < 1e-12);
        prop_assert!((a.t_hat - b.t_hat).norm_inf() < 1e-10);
    }

    #[test]
    fn permutation_invariance(points in cloud(), q in vec3(1.0), t in vec3(50.0), rot in 0usize..30) {
        let truth = Pose::new(Crp(q), t);
        let mut c = pairs(&points, &truth, 0.1);
        for (i, p) in c.iter_mut().enumerate() {
            p.b.z -= 0.02 * ((i * 3 % 4) as f64);
        }
        let a = estimate_pose(&c, &Method::ClosedForm3x3).unwrap();
        let len = c.len();
        c.rotate_left(rot % len);
        c.reverse();
        let b = estimate_pose(&c, &Method::ClosedForm3x3).unwrap();
        prop_assert!((a.q_hat.0 - b.q_hat.0).norm_inf() < 1e-12);
        prop_assert!((a.t_hat - b.t_hat).norm_inf() < 1e-9);
    }

    #[test]
    fn three_by_three_matches_joint(points in cloud(), q in vec3(1.0), t in vec3(100.0), sigma in 0.01f64..0.2, noise in prop::collection::vec(vec3(1.0), 30)) {
        // equal only for uniform weights: the closed form centers on plain means
        let truth = Pose::new(Crp(q), t);
        let mut c = pairs(&points, &truth, sigma);
        for (p, n) in c.iter_mut().zip(&noise) {
            p.b += *n * sigma;
        }
        let a = estimate_pose(&c, &Method::ClosedForm3x3).unwrap();
        let b = estimate_pose(&c, &Method::Joint6x6).unwrap();
        prop_assert!((a.q_hat.0 - b.q_hat.0).norm_inf() < 1e-9);
        prop_assert!((a.t_hat - b.t_hat).norm_inf() < 1e-7);
        prop_assert!((a.info_matrix - b.info_matrix).max_abs() <= 1e-9 * a.info_matrix.max_abs());
    }

    #[test]
    fn core_model_is_bit_exact(points in cloud(), q in vec3(1.0), t in vec3(100.0), noise in prop::collection::vec(vec3(0.3), 30), sigma in 0.001f64..1.0) {
        let truth = Pose::new(Crp(q), t);
        let mut c = pairs(&points, &truth, sigma);
        for (p, n) in c.iter_mut().zip(&noise) {
            p.b += *n;
        }
        let deltas = build_deltas(&c).unwrap();
        let scales = auto_scale(&deltas).unwrap();
        let fixed = fx_estimate_attitude(&deltas, &scales).unwrap();
        let terms = quantize_terms(&deltas, &scales, &mut FxStatus::default());
        let (hw, _) = core_run(&RegisterFile::load(&terms)).unwrap();
        prop_assert_eq!(fixed.q_prime, hw);
    }

    #[test]
    fn core_model_is_bit_exact_when_saturating(points in cloud(), q in vec3(1.0), t in vec3(100.0), alpha in 0.05f64..2.0, beta in 0.05f64..8.0) {
        // manual scales well past the auto budget; results are garbage but
        // both implementations must produce the same garbage
        let truth = Pose::new(Crp(q), t);
        let deltas = build_deltas(&pairs(&points, &truth, 1.0)).unwrap();
        let scales = ScaleConfig::manual(alpha, beta).unwrap();
        let terms = quantize_terms(&deltas, &scales, &mut FxStatus::default());
        match (fx_estimate_attitude(&deltas, &scales), core_run(&RegisterFile::load(&terms))) {
            (Ok(fixed), Ok((hw, _))) => prop_assert_eq!(fixed.q_prime, hw),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            (a, b) => prop_assert!(false, "paths disagree: {:?} vs {:?}", a.map(|x| x.q_prime), b.map(|x| x.0)),
        }
    }
}

#[test]
fn scaling_self_consistency() {
    // (α, β) and (2α, 2β) keep α/β; the difference is quantization only
    let frames = generate_scenario(&ScenarioConfig::default()).unwrap();
    for f in &frames {
        let deltas = build_deltas(&f.correspondences).unwrap();
        let auto = auto_scale(&deltas).unwrap();
        let half = ScaleConfig::manual(auto.alpha / 2.0, auto.beta / 2.0).unwrap();
        let full = ScaleConfig::manual(auto.alpha, auto.beta).unwrap();
        let a = fx_estimate_attitude(&deltas, &half).unwrap();
        let b = fx_estimate_attitude(&deltas, &full).unwrap();
        assert!(a.status.trusted() && b.status.trusted());
        let dp = estimate_pose(&f.correspondences, &Method::ClosedForm3x3).unwrap();
        let scale = dp.q_hat.0.norm_inf();
        let diff = (a.q_hat.0 - b.q_hat.0).norm_inf();
        assert!(diff <= 1e-3 * scale, "frame {}: {diff:e} vs {scale:e}", f.frame_index);
    }
}

#[test]
fn more_headroom_means_smaller_deviation() {
    let frames = generate_scenario(&ScenarioConfig::default()).unwrap();
    let (mut coarse, mut fine) = (0.0_f64, 0.0_f64);
    for f in &frames {
        let deltas = build_deltas(&f.correspondences).unwrap();
        let auto = auto_scale(&deltas).unwrap();
        let dp = estimate_pose(&f.correspondences, &Method::ClosedForm3x3).unwrap();
        let small = ScaleConfig::manual(auto.alpha / 16.0, auto.beta / 16.0).unwrap();
        coarse = coarse.max((fx_estimate_attitude(&deltas, &small).unwrap().q_hat.0 - dp.q_hat.0).norm_inf());
        fine = fine.max((fx_estimate_attitude(&deltas, &auto).unwrap().q_hat.0 - dp.q_hat.0).norm_inf());
    }
    assert!(fine < coarse, "auto {fine:e} vs reduced headroom {coarse:e}");
}

#[test]
fn scenario_is_deterministic() {
    let cfg = ScenarioConfig::default();
    assert_eq!(generate_scenario(&cfg).unwrap(), generate_scenario(&cfg).unwrap());
}

#[test]
fn scenario_rotation_matches_rate() {
    let cfg = ScenarioConfig::default();
    for f in generate_scenario(&cfg).unwrap() {
        let r = f.truth_pose.unwrap().rotation();
        let angle = inverse_cayley(&r).unwrap().angle();
        assert!((angle - cfg.trajectory.angular_rate * cfg.trajectory.frame_dt).abs() < 1e-12);
    }
}
