//! Distributional checks of the synthetic workflow process against an
//! exact dynamic program over (phase, age-in-visit) states.
//!
//! The label process starts in phase 1 and spends `min_dwell + G` frames
//! per visit, `G` geometric with mean `mean_dwell - min_dwell`; on leaving,
//! the next phase follows the diagonal-masked transition row, and a phase
//! with no outgoing mass re-enters itself. That makes (phase, age) a
//! Markov chain whose per-frame hazard is 0 below `min_dwell` and
//! `1 / (1 + mean_dwell - min_dwell)` at or above it, so exact marginals
//! are computable and sampled paths must reproduce them.

use arst_core::synthdata::{sample_phase_path, WorkflowSpec};
use arst_core::numerics::SeededRng;

/// Per-frame phase marginals P(phase at t) for t < horizon, exact.
fn exact_marginals(spec: &WorkflowSpec, horizon: usize) -> Vec<Vec<f64>> {
    let c = spec.classes;
    let m = spec.min_dwell;
    let mean_excess = spec.mean_dwell - m as f64;
    let hazard = |age: usize| -> f64 {
        if age < m {
            0.0
        } else if mean_excess <= 0.0 {
            1.0 // constant dwell: always leave at exactly min_dwell frames
        } else {
            1.0 / (1.0 + mean_excess)
        }
    };
    // Masked, renormalized rows; None marks a phase that re-enters itself.
    let rows: Vec<Option<Vec<f64>>> = (0..c)
        .map(|i| {
            let mut w = spec.transition[i].clone();
            w[i] = 0.0;
            let total: f64 = w.iter().sum();
            (total > 0.0).then(|| w.iter().map(|&x| x / total).collect())
        })
        .collect();

    // occ[phase][age - 1] = P(in `phase` with `age` frames spent so far).
    let mut occ = vec![vec![0.0f64; horizon + 1]; c];
    occ[0][0] = 1.0;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        out.push(occ.iter().map(|ages| ages.iter().sum()).collect());
        let mut next = vec![vec![0.0f64; horizon + 1]; c];
        for (phase, ages) in occ.iter().enumerate() {
            for (a0, &mass) in ages.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let leave = hazard(a0 + 1);
                if leave < 1.0 {
                    next[phase][a0 + 1] += mass * (1.0 - leave);
                }
                if leave > 0.0 {
                    match &rows[phase] {
                        Some(row) => {
                            for (q, &p) in row.iter().enumerate() {
                                next[q][0] += mass * leave * p;
                            }
                        }
                        None => next[phase][0] += mass * leave,
                    }
                }
            }
        }
        occ = next;
    }
    out
}

/// Mean over frames 0..horizon of the per-frame marginals.
fn occupancy(marginals: &[Vec<f64>]) -> Vec<f64> {
    let c = marginals[0].len();
    let mut acc = vec![0.0f64; c];
    for row in marginals {
        for (a, &v) in acc.iter_mut().zip(row.iter()) {
            *a += v;
        }
    }
    let n = marginals.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

fn sampled_occupancy(
    spec: &WorkflowSpec,
    seed: u64,
    videos: usize,
    horizon: usize,
) -> Vec<f64> {
    let master = SeededRng::new(seed);
    let mut counts = vec![0u64; spec.classes];
    for i in 0..videos {
        let labels = sample_phase_path(spec, &mut master.derive(i as u64), horizon);
        assert!(labels.len() >= horizon, "path must cover the horizon");
        for &l in &labels[..horizon] {
            counts[l as usize - 1] += 1;
        }
    }
    let total = (videos * horizon) as f64;
    counts.iter().map(|&n| n as f64 / total).collect()
}

#[test]
fn sampled_phase_occupancy_matches_the_exact_chain() {
    let spec = WorkflowSpec::default();
    let horizon = 240;
    let exact = occupancy(&exact_marginals(&spec, horizon));
    assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let sampled = sampled_occupancy(&spec, 5000, 400, horizon);
    for (phase0, (&e, &s)) in exact.iter().zip(sampled.iter()).enumerate() {
        if e < 0.04 {
            continue; // too rare for a tight relative bound at this sample size
        }
        let rel = (s - e).abs() / e;
        assert!(
            rel <= 0.10,
            "phase {}: exact {e:.4}, sampled {s:.4}, rel err {rel:.3}",
            phase0 + 1
        );
    }
    // The absorbing tail phase must dominate late frames.
    let late = &exact_marginals(&spec, horizon)[horizon - 1];
    assert!(late[spec.classes - 1] > 0.5, "absorbing mass {late:?}");
}

#[test]
fn fast_cyclic_process_matches_the_exact_chain_tightly() {
    let spec = WorkflowSpec {
        classes: 3,
        transition: vec![
            vec![0.0, 0.8, 0.2],
            vec![0.3, 0.0, 0.7],
            vec![0.6, 0.4, 0.0],
        ],
        min_dwell: 3,
        mean_dwell: 5.0,
        ..WorkflowSpec::default()
    };
    spec.validate().unwrap();
    let horizon = 150;
    let exact = occupancy(&exact_marginals(&spec, horizon));
    let sampled = sampled_occupancy(&spec, 5100, 600, horizon);
    for (phase0, (&e, &s)) in exact.iter().zip(sampled.iter()).enumerate() {
        let rel = (s - e).abs() / e;
        assert!(
            rel <= 0.10,
            "phase {}: exact {e:.4}, sampled {s:.4}, rel err {rel:.3}",
            phase0 + 1
        );
    }
}

#[test]
fn constant_dwell_two_phase_cycle_is_deterministic_and_exact() {
    let spec = WorkflowSpec {
        classes: 2,
        transition: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        min_dwell: 4,
        mean_dwell: 4.0,
        ..WorkflowSpec::default()
    };
    spec.validate().unwrap();
    let horizon = 32;
    let marginals = exact_marginals(&spec, horizon);

    let mut rng = SeededRng::new(5200);
    let labels = sample_phase_path(&spec, &mut rng, horizon);
    for t in 0..horizon {
        let expected = if (t / 4) % 2 == 0 { 1u32 } else { 2u32 };
        assert_eq!(labels[t], expected, "frame {t}");
        // The chain must assign probability 1 to the same deterministic label.
        assert_eq!(marginals[t][expected as usize - 1], 1.0, "frame {t}");
    }
}
