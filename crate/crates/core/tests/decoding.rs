use hhqec::circuit::build_memory_circuit;
use hhqec::decoder::dem::DemMechanism;
use hhqec::decoder::{
    build_dem, build_dem_with, min_distance, ml_decode_bruteforce, DetectorErrorModel, Matcher, MatchingGraph,
    Signature,
};
use hhqec::lattice::{build_layout, CodeDistance, PauliKind};
use hhqec::noise::{apply_noise, NoiseModel};
use hhqec::sim::frame::frame_sample;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn memory_dem(d: u32, basis: PauliKind, p: f64) -> (hhqec::circuit::Circuit, DetectorErrorModel) {
    let layout = build_layout(CodeDistance::new(d as i64).unwrap());
    let mc = build_memory_circuit(&layout, basis, d as usize).unwrap();
    let noisy = apply_noise(&mc.circuit, &NoiseModel::uniform(p)).unwrap();
    let dem = build_dem(&noisy).unwrap();
    (noisy, dem)
}

#[test]
fn circuit_distances() {
    let (_, dem) = memory_dem(3, PauliKind::Z, 1e-3);
    assert_eq!(min_distance(&dem, 3), Some(3));
    let (_, dem) = memory_dem(5, PauliKind::Z, 1e-3);
    assert_eq!(min_distance(&dem, 5), Some(5));
    // A Z error on a fold target while a weight-four stabilizer is folded
    // spreads to its vertical neighbour, so the column-shaped logical Z can
    // be completed by one fault fewer per two rows.
    let (_, dem) = memory_dem(3, PauliKind::X, 1e-3);
    assert_eq!(min_distance(&dem, 3), Some(2));
    let (_, dem) = memory_dem(5, PauliKind::X, 1e-3);
    assert_eq!(min_distance(&dem, 5), Some(3));
}

#[test]
fn detector_rates_match_dem() {
    let (noisy, _) = memory_dem(3, PauliKind::Z, 3e-3);
    let dem = build_dem_with(&noisy, false).unwrap();
    let shots = 100_000;
    let batch = frame_sample(&noisy, shots, 17).unwrap();
    let mut fired = vec![0usize; dem.num_detectors];
    for s in 0..shots {
        for d in batch.fired(s) {
            fired[d] += 1;
        }
    }
    let mut keep = vec![1.0f64; dem.num_detectors];
    for m in &dem.mechanisms {
        for &d in &m.signature.detectors {
            keep[d as usize] *= 1.0 - 2.0 * m.probability;
        }
    }
    for (d, &k) in keep.iter().enumerate() {
        let q = (1.0 - k) / 2.0;
        let sigma = (shots as f64 * q * (1.0 - q)).sqrt();
        let diff = (fired[d] as f64 - shots as f64 * q).abs();
        assert!(
            diff <= 5.0 * sigma.max(1.0),
            "detector {d}: {} vs {}",
            fired[d],
            shots as f64 * q
        );
    }
}

#[test]
fn sampled_logicals_match_dem_prediction() {
    // With no decoding, the raw observable flip rate is the XOR of all
    // mechanisms that flip it.
    let (noisy, _) = memory_dem(3, PauliKind::X, 2e-3);
    let dem = build_dem_with(&noisy, false).unwrap();
    let keep: f64 = dem
        .mechanisms
        .iter()
        .filter(|m| m.signature.observables & 1 == 1)
        .map(|m| 1.0 - 2.0 * m.probability)
        .product();
    let q = (1.0 - keep) / 2.0;
    let shots = 50_000;
    let batch = frame_sample(&noisy, shots, 3).unwrap();
    let flips = (0..shots).filter(|&s| batch.observable(s, 0)).count() as f64;
    let sigma = (shots as f64 * q * (1.0 - q)).sqrt();
    assert!((flips - shots as f64 * q).abs() < 5.0 * sigma);
}

/// Syndromes drawn half from circuit noise, half as uniform random subsets.
fn syndromes(noisy: &hhqec::circuit::Circuit, n: usize, count: usize, seed: u64) -> Vec<Vec<u32>> {
    let batch = frame_sample(noisy, count * 4, seed).unwrap();
    let mut out: Vec<Vec<u32>> = (0..batch.shots())
        .map(|s| batch.fired(s).into_iter().map(|d| d as u32).collect::<Vec<_>>())
        .filter(|v| !v.is_empty() && v.len() <= 14)
        .take(count / 2)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let k = rng.random_range(1..=12);
        let mut v: Vec<u32> = sample(&mut rng, n, k).into_iter().map(|d| d as u32).collect();
        v.sort_unstable();
        out.push(v);
    }
    out
}

#[test]
fn matching_weight_is_optimal() {
    for (d, p) in [(3u32, 0.02), (5, 0.008)] {
        let (noisy, dem) = memory_dem(d, PauliKind::Z, p);
        let m = Matcher::new(&MatchingGraph::from_dem(&dem));
        let cases = syndromes(&noisy, dem.num_detectors, 2000, d as u64);
        for s in &cases {
            let exact = m.decode_exhaustive(s).unwrap().weight;
            assert_eq!(m.decode_blossom(s).unwrap().weight, exact, "d={d} {s:?}");
            assert_eq!(m.decode(s).unwrap().weight, exact, "d={d} {s:?}");
        }
    }
}

#[test]
fn matching_equals_maximum_likelihood_on_a_chain() {
    // Boundary - D0 - D1 - D2 - D3 - Boundary with the observable on the
    // left boundary edge: every syndrome has exactly two explanations.
    let probs = [0.03, 0.11, 0.07, 0.02, 0.09];
    let sig = |dets: &[u32], obs: u64| Signature {
        detectors: dets.to_vec(),
        observables: obs,
    };
    let sigs = [
        sig(&[0], 1),
        sig(&[0, 1], 0),
        sig(&[1, 2], 0),
        sig(&[2, 3], 0),
        sig(&[3], 0),
    ];
    let dem = DetectorErrorModel {
        num_detectors: 4,
        num_observables: 1,
        mechanisms: sigs
            .iter()
            .zip(probs)
            .map(|(s, p)| DemMechanism {
                probability: p,
                signature: s.clone(),
                parts: vec![s.clone()],
            })
            .collect(),
    };
    let m = Matcher::new(&MatchingGraph::from_dem(&dem));
    for mask in 0u32..16 {
        let syn: Vec<u32> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
        let ml = ml_decode_bruteforce(&dem, &syn).unwrap();
        assert_eq!(m.decode(&syn).unwrap().observables, ml, "{syn:?}");
    }
}

#[test]
fn dem_round_trips_through_json() {
    let (_, dem) = memory_dem(3, PauliKind::X, 1e-3);
    let back = DetectorErrorModel::from_json(&dem.to_json()).unwrap();
    assert_eq!(back.num_detectors, dem.num_detectors);
    assert_eq!(back.mechanisms.len(), dem.mechanisms.len());
    for (a, b) in back.mechanisms.iter().zip(&dem.mechanisms) {
        assert_eq!(a.signature, b.signature);
        assert_eq!(a.parts, b.parts);
        assert!((a.probability - b.probability).abs() <= 1e-15 * b.probability);
    }
}

#[test]
fn decoding_suppresses_errors_below_threshold() {
    // Per-shot failure rates at p = 1e-3: larger codes fail less often.
    let rate = |d: u32, basis| {
        let (noisy, dem) = memory_dem(d, basis, 1e-3);
        let m = Matcher::new(&MatchingGraph::from_dem(&dem));
        let shots = 40_000;
        let b = frame_sample(&noisy, shots, 9).unwrap();
        let pred = m.decode_batch(&b).unwrap();
        (0..shots).filter(|&s| (pred[s] & 1 == 1) != b.observable(s, 0)).count()
    };
    for basis in [PauliKind::Z, PauliKind::X] {
        let (f3, f5) = (rate(3, basis), rate(5, basis));
        assert!(f3 > f5, "{basis:?}: d=3 {f3} vs d=5 {f5}");
    }
}
