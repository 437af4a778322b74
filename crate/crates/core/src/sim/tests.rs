use super::*;
use crate::dominant::residual_interference;
use crate::moments::laplace_interference;
use num_complex::Complex64;

fn small_cfg(n: usize) -> SimConfig {
    SimConfig {
        n_realizations: n,
        ..SimConfig::default()
    }
}

fn hand_realization(bs: Vec<Point>, ue: Vec<Point>) -> Realization {
    let n = bs.len();
    Realization {
        bs_points: bs,
        ue_points: ue,
        cell_areas: vec![1.0; n],
        typical_bs_index: 0,
        window_radius: 1e4,
        resampled: 0,
    }
}

#[test]
fn every_ue_is_served_by_its_nearest_bs() {
    let p = SystemParams::default();
    let cfg = small_cfg(1);
    for i in 0..5 {
        let (r, _) = sample_network(&p, &cfg, i).unwrap();
        assert_eq!(r.bs_points[r.typical_bs_index], [0.0, 0.0]);
        for (k, u) in r.ue_points.iter().enumerate() {
            let nearest = (0..r.bs_points.len())
                .min_by(|&a, &b| voronoi::dist(*u, r.bs_points[a]).total_cmp(&voronoi::dist(*u, r.bs_points[b])))
                .unwrap();
            assert_eq!(nearest, k);
            assert!(u[0].hypot(u[1]) <= r.window_radius);
        }
    }
}

#[test]
fn bs_count_is_poisson() {
    let p = SystemParams::default();
    let cfg = small_cfg(1);
    let n = 1000;
    let counts: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (sample_network(&p, &cfg, i).unwrap().0.bs_points.len() - 1) as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let expect = p.bs_density * PI * cfg.window_radius.powi(2);
    let se = (expect / n as f64).sqrt();
    assert!((mean - expect).abs() < 3.0 * se, "{mean} vs {expect}");
}

#[test]
fn pooled_link_length_is_rayleigh() {
    let p = SystemParams::default();
    let cfg = small_cfg(120);
    let pooled: Vec<(f64, f64)> = (0..cfg.n_realizations as u64)
        .into_par_iter()
        .map(|i| {
            let (r, _) = sample_network(&p, &cfg, i).unwrap();
            (0..r.bs_points.len())
                .filter(|&k| r.ue_points[k][0].hypot(r.ue_points[k][1]) <= cfg.interior_radius())
                .map(|k| (r.link_length(k), r.cell_areas[k]))
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    assert!(pooled.len() > 10_000);
    let mut sorted = pooled;
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = sorted.iter().map(|x| x.1).sum();
    let law = crate::model::serving_distance_law(&p);
    let mut acc = 0.0;
    let mut ks: f64 = 0.0;
    for (r, w) in &sorted {
        let f = law.cdf(*r);
        ks = ks.max((acc / total - f).abs());
        acc += w;
        ks = ks.max((acc / total - f).abs());
    }
    assert!(ks < 0.02, "KS {ks}");
}

#[test]
fn isolated_link_without_noise_always_succeeds() {
    let p = SystemParams::default().with_noise(0.0);
    let r = hand_realization(vec![[0.0, 0.0]], vec![[50.0, 0.0]]);
    assert_eq!(conditional_success(&r, 10.0, &p), 1.0);
}

#[test]
fn single_interferer_matches_closed_form() {
    let p = SystemParams::default().with_noise(0.0);
    let r = hand_realization(vec![[0.0, 0.0], [400.0, 0.0]], vec![[60.0, 20.0], [300.0, 90.0]]);
    let theta = 2.0;
    let x = p.rx_strength(60f64.hypot(20.0));
    let p1 = p.tx_power(100f64.hypot(90.0));
    let d1 = 300f64.hypot(90.0);
    let expect = 1.0 / (1.0 + theta * p1 * d1.powf(-4.0) / x);
    assert!((conditional_success(&r, theta, &p) - expect).abs() < 1e-14);
}

#[test]
fn fading_draws_agree_with_closed_form() {
    let p = SystemParams::default();
    let cfg = small_cfg(1);
    let thetas = [0.1, 1.0, 10.0];
    let (r, mut rng) = sample_network(&p, &cfg, 3).unwrap();
    let links: Vec<usize> = (0..r.bs_points.len())
        .filter(|&k| r.ue_points[k][0].hypot(r.ue_points[k][1]) <= cfg.interior_radius())
        .take(20)
        .collect();
    let mut close = 0;
    let mut total = 0;
    for &k in &links {
        let draws = r.link_success_by_fading(k, &thetas, &p, 10_000, &mut rng);
        for (t, d) in thetas.iter().zip(draws) {
            total += 1;
            if (r.link_success(k, *t, &p) - d).abs() < 0.02 {
                close += 1;
            }
        }
    }
    assert!(close as f64 >= 0.95 * total as f64, "{close}/{total}");
}

#[test]
fn empirical_meta_edges_and_shape() {
    let p = SystemParams::default();
    let gammas = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0];
    let m = empirical_meta(&p, &small_cfg(30), &[0.1, 1.0, 10.0], &gammas).unwrap();
    for (row, ci) in m.values.iter().zip(&m.ci_half_width) {
        assert_eq!(row[0], 1.0);
        assert_eq!(row[6], 0.0);
        assert!(row.windows(2).all(|w| w[1] <= w[0]));
        assert!(ci.iter().all(|c| c.is_finite() && *c >= 0.0));
    }
    for g in 0..gammas.len() {
        assert!(m.values[0][g] >= m.values[1][g] && m.values[1][g] >= m.values[2][g]);
    }
}

#[test]
fn deterministic_for_any_thread_count() {
    let p = SystemParams::default().with_compensation(0.8);
    let cfg = small_cfg(12);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_links(&p, &cfg, &[1.0]).unwrap())
    };
    assert_eq!(run(1), run(3));
    let other = sample_links(&p, &SimConfig { seed: 2, ..cfg }, &[1.0]).unwrap();
    assert_ne!(run(1), other);
}

#[test]
fn zeroth_empirical_moment_is_one() {
    let m = empirical_moment(&SystemParams::default(), &small_cfg(4), 1.0, 0.0).unwrap();
    assert_eq!(m.mean, 1.0);
    assert!(empirical_moment(&SystemParams::default(), &small_cfg(4), 1.0, -1.0).is_err());
}

#[test]
fn config_validation() {
    let p = SystemParams::default();
    assert!(SimConfig { n_realizations: 0, ..SimConfig::default() }.validate(&p).is_err());
    assert!(SimConfig { window_radius: 1000.0, ..SimConfig::default() }.validate(&p).is_err());
    assert!(SimConfig { estimator: Estimator::FadingDraws(0), ..SimConfig::default() }.validate(&p).is_err());
    assert!(SimConfig::default().validate(&p).is_ok());
}

#[test]
fn thinning_rate() {
    let p = SystemParams::default();
    let l = PI * p.bs_density;
    let mut rng = stream(9, 0);
    for d in [30.0, 150.0, 400.0] {
        let n = 100_000;
        let kept = (0..n).filter(|_| thinning_keeps(d, l, &mut rng)).count() as f64 / n as f64;
        let q = -(-l * d * d).exp_m1();
        assert!((kept - q).abs() < 4.0 * (q * (1.0 - q) / n as f64).sqrt() + 1e-12, "d {d}: {kept} vs {q}");
    }
}

#[test]
fn interference_laplace_oracle() {
    let p = SystemParams::default();
    let n = 10_000;
    let draws: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| sample_nonhomogeneous_interference(&p, None, &mut stream(21, i)).unwrap())
        .collect();
    for s in [1e8, 1e9, 1e10] {
        let v: Vec<f64> = draws.iter().map(|i| (-s * i).exp()).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let exact = laplace_interference(Complex64::new(s, 0.0), &p).unwrap().re;
        assert!((mean - exact).abs() < 3.0 * sd / (n as f64).sqrt(), "s {s:e}: {mean} vs {exact}");
    }
}

#[test]
fn residual_interference_oracle() {
    let p = SystemParams::default().with_compensation(0.8);
    let d1 = 250.0;
    let n = 10_000;
    let draws: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| sample_nonhomogeneous_interference(&p, Some(d1), &mut stream(22, i)).unwrap())
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let exact = residual_interference(d1, &p).unwrap();
    assert!((mean - exact).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean:e} vs {exact:e}");
}

#[test]
fn realization_dump() {
    let (r, _) = sample_network(&SystemParams::default(), &small_cfg(1), 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    r.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,x_m,y_m"));
    assert_eq!(text.lines().filter(|l| l.starts_with("bs,")).count(), r.bs_points.len());
    assert_eq!(text.lines().filter(|l| l.starts_with("ue,")).count(), r.ue_points.len());
}
