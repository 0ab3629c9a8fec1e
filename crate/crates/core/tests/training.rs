use nonmodular::losses::{DeltaParams, LossFamily, LossSpec, Normalization};
use nonmodular::model::Sample;
use nonmodular::setfn::SetFunction;
use nonmodular::surrogates::CuttingPlane;
use nonmodular::trainer::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Four bags, p = 2, d = 2, separable by the first coordinate.
fn separable() -> Vec<Sample<f64>> {
    let bag = |id: &str, a: [f64; 2], b: [f64; 2], y: [i8; 2]| Sample::new(id, vec![a.to_vec(), b.to_vec()], y.to_vec()).unwrap();
    vec![
        bag("a", [2.0, 1.0], [-1.5, 0.5], [1, -1]),
        bag("b", [1.0, -1.0], [1.5, 2.0], [1, 1]),
        bag("c", [-2.0, 0.3], [-1.0, -1.0], [-1, -1]),
        bag("d", [-1.2, 1.0], [2.5, -0.4], [-1, 1]),
    ]
}

fn noisy(n: usize, p: usize, seed: u64) -> Vec<Sample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|b| {
            let y: Vec<i8> = (0..p).map(|j| if j == 0 || rng.random_bool(0.4) { 1 } else { -1 }).collect();
            let x = y
                .iter()
                .map(|&yj| vec![f64::from(yj) * 0.7 + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            Sample::new(format!("bag{b}"), x, y).unwrap()
        })
        .collect()
}

#[test]
fn separable_hamming_fixture() {
    let data = separable();
    let cfg = TrainerConfig { c: 100.0, kind: SurrogateKind::ZeroOne, ..Default::default() };
    let out = train_cutting_plane(&data, &LossFamily::Hamming, &cfg).unwrap();
    assert!(!out.trace.truncated);
    let last = out.trace.last().unwrap();
    assert!(last.max_violation <= cfg.epsilon);
    for s in &data {
        assert_eq!(predict(&out.model, &s.x).unwrap(), s.y);
    }
    let eval = evaluate(&out.model, &data, &[LossFamily::Hamming]).unwrap();
    assert_eq!(eval[0].mean, 0.0);
    assert!(last.gap >= -1e-8 && last.gap <= cfg.c * data.len() as f64 * cfg.epsilon, "gap {}", last.gap);
}

#[test]
fn huge_epsilon_stops_after_one_sweep() {
    let cfg = TrainerConfig { epsilon: 10.0, ..Default::default() };
    let out = train_cutting_plane(&separable(), &LossFamily::Hamming, &cfg).unwrap();
    assert_eq!(out.trace.iterations(), 1);
    assert_eq!(out.working_set.total_planes(), 0);
    assert!(out.model.w.iter().all(|w| *w == 0.0));
}

#[test]
fn initial_gap_is_c_times_risk() {
    // With no planes the gap at w = 0 is C Σ H_i(0).
    let data = separable();
    let cfg = TrainerConfig { c: 2.0, kind: SurrogateKind::ZeroOne, ..Default::default() };
    let targets = prepare_losses(&data, &LossFamily::Hamming, cfg.kind).unwrap();
    let model = nonmodular::model::LinearModel::zeros(cfg.mode, 2, None, false).unwrap();
    let ws = WorkingSet::new(data.len(), 2);
    let g = primal_dual_gap(&model, &ws, &data, &targets, &cfg).unwrap();
    assert_eq!(g.master, 0.0);
    assert_eq!(g.gap, 2.0 * 8.0);
}

#[test]
fn bd_equals_lovasz_for_submodular_loss() {
    let data = noisy(12, 4, 3);
    // l(A) = sqrt(|A|) is submodular.
    let concave = |y: &[i8]| LossSpec {
        name: "sqrt".into(),
        y: y.to_vec(),
        set_fn: SetFunction::symmetric((0..=y.len()).map(|k| (k as f64).sqrt()).collect()).unwrap(),
        params: nonmodular::losses::LossParams { alpha: None, normalization: Normalization::None, clamp_at_zero: false },
    };
    let run = |kind| {
        let targets = prepare_explicit(data.iter().map(|s| concave(&s.y)).collect(), kind).unwrap();
        train_with_losses(&data, &targets, &TrainerConfig { kind, ..Default::default() }).unwrap()
    };
    let (bd, lov) = (run(SurrogateKind::BD), run(SurrogateKind::Lovasz));
    assert_eq!(bd.trace.iterations(), lov.trace.iterations());
    for (a, b) in bd.model.w.iter().zip(&lov.model.w) {
        assert!((a - b).abs() <= 1e-8, "{:?} vs {:?}", bd.model.w, lov.model.w);
    }
}

#[test]
fn convergence_contract_across_surrogates() {
    let data = noisy(20, 5, 11);
    for kind in SurrogateKind::ALL {
        let family = if kind == SurrogateKind::Lovasz { LossFamily::Hamming } else { LossFamily::Dice };
        let cfg = TrainerConfig { kind, ..Default::default() };
        let out = train_cutting_plane(&data, &family, &cfg).unwrap();
        let t = &out.trace;
        assert!(!t.truncated, "{kind}");
        let last = t.last().unwrap();
        assert!(last.max_violation <= cfg.epsilon, "{kind}");
        assert!(last.gap <= cfg.c * data.len() as f64 * cfg.epsilon, "{kind}: gap {}", last.gap);
        for pair in t.rows.windows(2) {
            assert!(pair[1].master_obj >= pair[0].master_obj - 1e-9, "{kind}: master decreased");
        }
        for r in &t.rows {
            assert!(r.gap >= -1e-8, "{kind}: negative gap {}", r.gap);
            assert!(r.master_obj <= r.primal_obj + 1e-8);
        }
        // Stationarity and dual feasibility of the final master.
        let ws = &out.working_set;
        assert!(ws.is_dual_feasible(&cfg.c, &1e-12));
        let w = ws.weights();
        for (a, b) in w.iter().zip(&out.model.w) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn stored_planes_stay_minorants() {
    let data = noisy(10, 4, 5);
    let cfg = TrainerConfig { kind: SurrogateKind::BD, ..Default::default() };
    let targets = prepare_losses(&data, &LossFamily::Dice, cfg.kind).unwrap();
    let out = train_with_losses(&data, &targets, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut model = out.model.clone();
    for _ in 0..50 {
        model.w = (0..model.w.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
        for (i, (s, t)) in data.iter().zip(&targets).enumerate() {
            let h = model.scores(&s.x).unwrap();
            let value = surrogate_at(&h, t, cfg.kind, cfg.inference()).unwrap().value;
            for pl in out.working_set.planes(i) {
                let pl: &CuttingPlane<f64> = pl;
                assert!(value >= pl.eval(&model.w) - 1e-9);
            }
        }
    }
}

#[test]
fn delta_losses_train() {
    let data = noisy(10, 6, 21);
    for k in 1..=4 {
        let fam = LossFamily::Delta(DeltaParams::new(k).unwrap());
        let out = train_cutting_plane(&data, &fam, &TrainerConfig::default()).unwrap();
        assert!(!out.trace.truncated);
    }
}

#[test]
fn per_position_needs_fixed_size() {
    let mut data = noisy(3, 3, 1);
    data.push(Sample::new("odd", vec![vec![0.0, 1.0]], vec![1]).unwrap());
    let cfg = TrainerConfig { mode: nonmodular::model::WeightMode::PerPosition, kind: SurrogateKind::ZeroOne, ..Default::default() };
    assert!(train_cutting_plane(&data, &LossFamily::Hamming, &cfg).is_err());
    let shared = TrainerConfig { kind: SurrogateKind::ZeroOne, ..Default::default() };
    assert!(train_cutting_plane(&data, &LossFamily::Hamming, &shared).is_ok());
}
