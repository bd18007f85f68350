use coherence_core::photonstats::{
    analytic_g2_zero, coincidence_histogram, g2_zero, g2_zero_std_error, simulate_photon_stream, solve_p2_for_g2,
    PhotonSource,
};
use coherence_core::rng::seeded;
use coherence_core::HbtConfig;

fn run(cfg: &HbtConfig, seed: u64) -> (f64, f64, coherence_core::CoincidenceHistogram) {
    let clicks = simulate_photon_stream(cfg, &mut seeded(seed)).unwrap();
    let h = coincidence_histogram(&clicks, cfg).unwrap();
    (g2_zero(&h).unwrap(), g2_zero_std_error(&h).unwrap(), h)
}

/// At η = 0.1 the central peak holds only ~470 coincidences, so the
/// counting error alone is ~4.6%; the estimate is checked against its own
/// standard error there and against the 5% band at η = 1.
#[test]
fn calibrated_stream_hits_target() {
    let cfg = HbtConfig {
        n_pulses: 10_000_000,
        ..Default::default()
    };
    let analytic = analytic_g2_zero(cfg.p1, cfg.p2).unwrap();
    assert!((analytic - 0.07).abs() < 1e-12);
    let (g, se, h) = run(&cfg, 1);
    assert!((g - analytic).abs() <= 3.0 * se, "{g} ± {se}");
    assert!((g - 0.07).abs() <= 0.01);
    assert!(h.central_area() < h.side_areas().iter().min().copied().unwrap());

    let bright = HbtConfig { eta: 1.0, ..cfg };
    let (g, se, _) = run(&bright, 1);
    assert!((g - analytic).abs() <= 0.05 * analytic, "{g} ± {se}");
}

#[test]
fn poissonian_source_gives_unity() {
    let cfg = HbtConfig {
        n_pulses: 2_000_000,
        source: PhotonSource::Poissonian,
        ..Default::default()
    };
    let (g, se, _) = run(&cfg, 2);
    assert!((g - 1.0).abs() < 3.0 * se, "{g} ± {se}");
    assert!((g - 1.0).abs() < 0.03);
}

#[test]
fn perfect_single_photons_never_coincide() {
    let cfg = HbtConfig {
        n_pulses: 1_000_000,
        p2: 0.0,
        ..Default::default()
    };
    let (g, _, h) = run(&cfg, 3);
    assert_eq!(h.central_area(), 0);
    assert_eq!(g, 0.0);
}

#[test]
fn side_peaks_are_flat() {
    let cfg = HbtConfig {
        n_pulses: 4_000_000,
        ..Default::default()
    };
    let (_, _, h) = run(&cfg, 4);
    let sides = h.side_areas();
    let mean = sides.iter().sum::<u64>() as f64 / sides.len() as f64;
    for s in sides {
        assert!((s as f64 - mean).abs() < 3.5 * mean.sqrt(), "{s} vs {mean}");
    }
}

#[test]
fn efficiency_does_not_change_g2() {
    let mut results = Vec::new();
    for (i, eta) in [0.05, 0.1, 0.2].into_iter().enumerate() {
        let cfg = HbtConfig {
            n_pulses: 10_000_000,
            eta,
            ..Default::default()
        };
        results.push(run(&cfg, 10 + i as u64));
    }
    for a in &results {
        for b in &results {
            let diff = (a.0 - b.0).abs();
            assert!(diff <= 3.0 * (a.1 * a.1 + b.1 * b.1).sqrt(), "{} vs {}", a.0, b.0);
        }
    }
}

#[test]
fn time_difference_histogram_shows_peaks_at_period_multiples() {
    let cfg = HbtConfig {
        n_pulses: 2_000_000,
        ..Default::default()
    };
    let (_, _, h) = run(&cfg, 5);
    let peak_bin = |t: f64| {
        h.centers_ns
            .iter()
            .position(|c| (c - t).abs() <= cfg.bin_ns / 2.0)
            .unwrap()
    };
    let side = h.counts[peak_bin(12.5)];
    let valley = h.counts[peak_bin(6.25)];
    assert!(side > 10 * valley.max(1));
    assert!(h.counts[peak_bin(0.0)] < side);
    assert_eq!(h.centers_ns.len(), h.counts.len());
}

#[test]
fn solver_rejects_unreachable_target() {
    // reachable only while g·p1 <= 1/4
    assert!(solve_p2_for_g2(0.9, 0.3).is_err());
}

#[test]
fn solver_round_trip() {
    for p1 in [0.1, 0.5, 0.8] {
        for g in [0.0, 0.01, 0.07, 0.2] {
            let p2 = solve_p2_for_g2(p1, g).unwrap();
            assert!((analytic_g2_zero(p1, p2).unwrap() - g).abs() < 1e-12);
        }
    }
}
