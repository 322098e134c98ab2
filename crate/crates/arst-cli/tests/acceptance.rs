//! Acceptance suite: one test per shipping requirement, each printing a
//! single `[PASS]`/`[FAIL]` line with the measured value and its bound.
//!
//! Run in order with the lines visible:
//!
//! ```text
//! cargo test --test acceptance -- --test-threads=1 --nocapture
//! ```
//!
//! The end-to-end thresholds (a06, a07, a09) were pinned against the
//! seeds used here; changing a seed or fixture requires re-validating
//! the measured margins.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use arst_cli::commands::{cmd_sweep_w, train_on_videos};
use arst_core::formats::{write_dataset, RunConfig};
use arst_core::inference::{
    bench_latency, run_arst_stream, ArstStream, CciConfig, ScriptedModel, StreamModel,
    StreamResult,
};
use arst_core::metrics::eval_video;
use arst_core::model::{forward_teacher_forced, shifted_tokens, ModelConfig, ModelParams};
use arst_core::numerics::{check_gradients, Matrix, Parameterized, SeededRng};
use arst_core::synthdata::{gen_dataset, Split, SyntheticDataset};
use arst_core::training::cross_entropy;

/// Prints the verdict line for one requirement, then fails the test if
/// the requirement did not hold.
fn verdict(name: &str, ok: bool, detail: &str) {
    let tag = if ok { "[PASS]" } else { "[FAIL]" };
    println!("{tag} {name}: {detail}");
    assert!(ok, "{name}: {detail}");
}

fn tiny_config() -> ModelConfig {
    ModelConfig {
        d_model: 16,
        n_heads: 2,
        band_width: 2,
        classes: 3,
        d_feat: 8,
        d_ffn: Some(32),
        ..ModelConfig::desk()
    }
}

fn random_features(rng: &mut SeededRng, t: usize, d: usize) -> Matrix<f64> {
    let mut m = Matrix::zeros(t, d);
    for v in m.data_mut() {
        *v = rng.uniform(-1.0, 1.0);
    }
    m
}

fn random_labels(rng: &mut SeededRng, t: usize, classes: usize) -> Vec<u32> {
    (0..t)
        .map(|_| rng.next_below(classes as u64) as u32 + 1)
        .collect()
}

/// Stacked logits from pushing every frame through a fresh stream with
/// the same fed tokens the batch forward uses.
fn stream_logits(
    params: &ModelParams<f64>,
    cfg: &ModelConfig,
    features: &Matrix<f64>,
    labels: &[u32],
) -> Matrix<f64> {
    let tokens = shifted_tokens(labels);
    let mut stream = ArstStream::new(params, cfg).unwrap();
    let mut out = Matrix::zeros(features.rows(), cfg.classes);
    for t in 0..features.rows() {
        let step = stream.push_frame(features.row(t), tokens[t]).unwrap();
        out.row_mut(t).copy_from_slice(&step.logits);
    }
    out
}

/// Bit pattern of the batch logits at one position.
fn logit_row_bits(
    params: &ModelParams<f64>,
    cfg: &ModelConfig,
    features: &Matrix<f64>,
    labels: &[u32],
    t: usize,
) -> Vec<u64> {
    let logits = forward_teacher_forced(params, cfg, features, &shifted_tokens(labels)).unwrap();
    logits.row(t).iter().map(|v| v.to_bits()).collect()
}

#[test]
fn a01_full_model_gradients_match_finite_differences() {
    let start = Instant::now();
    let cfg = tiny_config();
    let frames = 6;
    let mut rng = SeededRng::new(101);
    let mut params = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
    let features = random_features(&mut rng, frames, cfg.d_feat);
    let labels = random_labels(&mut rng, frames, cfg.classes);
    let tokens = shifted_tokens(&labels);

    let report = check_gradients(
        &mut params,
        |p: &ModelParams<f64>| {
            let logits = forward_teacher_forced(p, &cfg, &features, &tokens)?;
            Ok(cross_entropy(&logits, &labels)?.0)
        },
        |p: &mut ModelParams<f64>| {
            p.zero_grads();
            let (logits, cache) =
                arst_core::model::forward_with_cache(p, &cfg, &features, &tokens)?;
            let (loss, dlogits) = cross_entropy(&logits, &labels)?;
            arst_core::model::backward(p, &cfg, &cache, &dlogits)?;
            Ok(loss)
        },
        1e-5,
    )
    .unwrap();

    let secs = start.elapsed().as_secs_f64();
    let ok = report.max_rel_err <= 1e-4
        && report.entries == params.parameter_count()
        && secs <= 60.0;
    verdict(
        "gradient check",
        ok,
        &format!(
            "max rel err {:.3e} over {} entries in {:.1} s (bounds 1e-4, 60 s); worst {}[{}]",
            report.max_rel_err, report.entries, secs, report.worst_param, report.worst_index
        ),
    );
}

#[test]
fn a02_streaming_decode_matches_teacher_forced_batch() {
    let cfg = tiny_config();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = SeededRng::new(9000 + seed);
        let params = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
        let t = 20 + rng.next_below(21) as usize;
        let features = random_features(&mut rng, t, cfg.d_feat);
        let labels = random_labels(&mut rng, t, cfg.classes);

        let batch =
            forward_teacher_forced(&params, &cfg, &features, &shifted_tokens(&labels)).unwrap();
        let streamed = stream_logits(&params, &cfg, &features, &labels);
        worst = worst.max(batch.max_abs_diff(&streamed).unwrap());
    }
    verdict(
        "teacher-forced vs step-by-step logits",
        worst <= 1e-6,
        &format!("max abs diff {worst:.3e} over 20 seeds (bound 1e-6)"),
    );
}

#[test]
fn a03_logits_are_bitwise_invariant_outside_the_receptive_field() {
    let cfg = tiny_config();
    let w = cfg.band_width;
    let trials = 50usize;
    let mut checked = [0usize; 3];

    // (a) Any perturbation strictly after position t leaves row t's bits
    // untouched: future frames and future fed tokens.
    for trial in 0..trials {
        let mut rng = SeededRng::new(9100 + trial as u64);
        let params = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
        let t_len = 12 + rng.next_below(12) as usize;
        let features = random_features(&mut rng, t_len, cfg.d_feat);
        let labels = random_labels(&mut rng, t_len, cfg.classes);
        let t = rng.next_below(t_len as u64 - 1) as usize;

        let before = logit_row_bits(&params, &cfg, &features, &labels, t);
        let mut features2 = features.clone();
        for i in (t + 1)..t_len {
            for v in features2.row_mut(i) {
                *v += 3.0;
            }
        }
        let mut labels2 = labels.clone();
        for l in labels2.iter_mut().skip(t) {
            *l = *l % cfg.classes as u32 + 1;
        }
        let after = logit_row_bits(&params, &cfg, &features2, &labels2, t);
        assert_eq!(before, after, "future perturbation leaked into row {t}");
        checked[0] += 1;
    }

    // (b) Feature rows before t-2W are outside the composed
    // encoder+cross-attention field.
    for trial in 0..trials {
        let mut rng = SeededRng::new(9200 + trial as u64);
        let params = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
        let t_len = 2 * w + 4 + rng.next_below(10) as usize;
        let features = random_features(&mut rng, t_len, cfg.d_feat);
        let labels = random_labels(&mut rng, t_len, cfg.classes);
        let t = (2 * w + 1) + rng.next_below((t_len - 2 * w - 1) as u64) as usize;

        let before = logit_row_bits(&params, &cfg, &features, &labels, t);
        let mut features2 = features.clone();
        for i in 0..(t - 2 * w) {
            for v in features2.row_mut(i) {
                *v = -*v + 0.5;
            }
        }
        let after = logit_row_bits(&params, &cfg, &features2, &labels, t);
        assert_eq!(before, after, "stale feature rows leaked into row {t}");
        checked[1] += 1;
    }

    // (c) Fed tokens before position t-W are outside the decoder band;
    // the token at position i is the label of frame i-1.
    for trial in 0..trials {
        let mut rng = SeededRng::new(9300 + trial as u64);
        let params = ModelParams::<f64>::init(&cfg, &mut rng).unwrap();
        let t_len = w + 4 + rng.next_below(10) as usize;
        let features = random_features(&mut rng, t_len, cfg.d_feat);
        let labels = random_labels(&mut rng, t_len, cfg.classes);
        let t = (w + 2) + rng.next_below((t_len - w - 2) as u64) as usize;

        let before = logit_row_bits(&params, &cfg, &features, &labels, t);
        let mut labels2 = labels.clone();
        for l in labels2.iter_mut().take(t - w - 1) {
            *l = *l % cfg.classes as u32 + 1;
        }
        let after = logit_row_bits(&params, &cfg, &features, &labels2, t);
        assert_eq!(before, after, "stale fed tokens leaked into row {t}");
        checked[2] += 1;
    }

    verdict(
        "receptive-field bit invariance",
        checked == [trials; 3],
        &format!(
            "{} future / {} stale-feature / {} stale-token trials all bit-identical",
            checked[0], checked[1], checked[2]
        ),
    );
}

#[test]
fn a04_cached_streaming_matches_full_prefix_recompute() {
    let cfg = tiny_config();
    let t_len = 300usize;
    let mut worst = 0.0f32;
    for seed in 0..10u64 {
        let mut rng = SeededRng::new(9400 + seed);
        let params = ModelParams::<f64>::init(&cfg, &mut rng)
            .unwrap()
            .cast::<f32>();
        let features = random_features(&mut rng, t_len, cfg.d_feat).cast::<f32>();
        let labels = random_labels(&mut rng, t_len, cfg.classes);
        let tokens = shifted_tokens(&labels);

        let mut stream = ArstStream::new(&params, &cfg).unwrap();
        for t in 0..t_len {
            let step = stream.push_frame(features.row(t), tokens[t]).unwrap();
            // Recompute the whole prefix from scratch and compare this row.
            let prefix_features = Matrix::from_vec(
                t + 1,
                cfg.d_feat,
                features.data()[..(t + 1) * cfg.d_feat].to_vec(),
            )
            .unwrap();
            let batch =
                forward_teacher_forced(&params, &cfg, &prefix_features, &tokens[..=t]).unwrap();
            for (a, b) in step.logits.iter().zip(batch.row(t)) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    verdict(
        "incremental vs full-prefix logits",
        worst <= 1e-5,
        &format!("max abs diff {worst:.3e} over 10 seeds at 300 frames (bound 1e-5)"),
    );
}

/// Reference implementation of the committing rule, written directly
/// against the label array (see tests/cci_properties.rs in arst-core for
/// the full property suite around it).
fn simulate_commits(script: &[u32], n: usize) -> (Vec<u32>, Vec<(usize, usize)>) {
    let total = script.len();
    let mut committed: Vec<u32> = Vec::with_capacity(total);
    let mut transitions = Vec::new();
    for t in 1..=total {
        let greedy = script[t - 1];
        let label = match committed.last() {
            Some(&prev) if greedy != prev => {
                let horizon = n.min(total - t);
                let confirmed = (1..=horizon).all(|j| script[t - 1 + j] == greedy);
                if confirmed {
                    transitions.push((t, horizon));
                    greedy
                } else {
                    prev
                }
            }
            _ => greedy,
        };
        committed.push(label);
    }
    (committed, transitions)
}

fn random_script(rng: &mut SeededRng, classes: usize, min_total: usize) -> Vec<u32> {
    let mut script = Vec::new();
    let mut phase = rng.next_below(classes as u64) as u32 + 1;
    while script.len() < min_total {
        let run = 1 + rng.next_below(8) as usize;
        script.extend(std::iter::repeat(phase).take(run));
        let mut next = rng.next_below(classes as u64) as u32 + 1;
        if next == phase {
            next = next % classes as u32 + 1;
        }
        phase = next;
    }
    script
}

fn decode_script(script: &[u32], classes: usize, n: usize) -> StreamResult<f64> {
    let mut model = ScriptedModel::new(script.to_vec(), classes).unwrap();
    let frames = Matrix::<f64>::zeros(script.len(), 1);
    let cci = CciConfig { enabled: true, n };
    arst_core::inference::run_stream(&mut model, &frames, &cci).unwrap()
}

#[test]
fn a05_confirmation_decoding_matches_the_reference_simulation() {
    let mut rng = SeededRng::new(9500);
    let mut streams = 0usize;
    let mut decodes = 0usize;
    for _ in 0..200 {
        let classes = 3 + rng.next_below(3) as usize;
        let min_total = 40 + rng.next_below(60) as usize;
        let script = random_script(&mut rng, classes, min_total);
        streams += 1;
        for n in [1usize, 2, 5, 10] {
            let (committed, transitions) = simulate_commits(&script, n);
            let result = decode_script(&script, classes, n);
            assert_eq!(result.committed, committed, "committed labels diverged");
            let got: Vec<(usize, usize)> = result
                .accepted_transitions
                .iter()
                .map(|r| (r.frame, r.delay))
                .collect();
            assert_eq!(got, transitions, "transition records diverged");
            decodes += 1;
        }
    }

    // Constructed flickers shorter than n+1 frames must never commit.
    let mut suppressed = 0usize;
    for case in 0..100u64 {
        let mut rng = SeededRng::new(9600 + case);
        let n = 1 + rng.next_below(10) as usize;
        let head = (n + 1) + rng.next_below(5) as usize;
        let blip = 1 + rng.next_below(n as u64) as usize;
        let tail = (n + 1) + rng.next_below(5) as usize;
        let mut script = vec![1u32; head];
        script.extend(std::iter::repeat(2u32).take(blip));
        script.extend(std::iter::repeat(1u32).take(tail));
        let result = decode_script(&script, 3, n);
        assert!(
            result.committed.iter().all(|&c| c == 1),
            "blip of {blip} frames committed with n={n}"
        );
        assert!(result.accepted_transitions.is_empty());
        suppressed += 1;
    }

    verdict(
        "confirmation decoding vs reference rule",
        streams == 200 && decodes == 800 && suppressed == 100,
        &format!(
            "{streams} random streams x n in {{1,2,5,10}} matched exactly; \
             {suppressed} constructed sub-horizon flickers all suppressed"
        ),
    );
}

/// The pinned end-to-end fixture: stock full-scale run configuration,
/// seed 7, 20 train / 4 val / 10 test videos of 180..=220 frames.
fn e2e_fixture() -> RunConfig {
    RunConfig::desk()
}

fn e2e_dataset(cfg: &RunConfig, hard_frame_rate: f64) -> SyntheticDataset {
    let mut spec = cfg.workflow.clone();
    spec.hard_frame_rate = hard_frame_rate;
    gen_dataset(
        &spec,
        cfg.seed,
        cfg.dataset.n_train,
        cfg.dataset.n_val,
        cfg.dataset.n_test,
        (cfg.dataset.t_min, cfg.dataset.t_max),
    )
    .unwrap()
}

struct DecodeStats {
    mean_accuracy: f64,
    mean_excess_transitions: f64,
}

/// Greedy or confirmation-gated decoding of the test split, averaged
/// across videos. Excess transitions per video are floored at zero.
fn decode_test_split(
    params: &ModelParams<f32>,
    cfg: &ModelConfig,
    data: &SyntheticDataset,
    cci: &CciConfig,
) -> DecodeStats {
    let mut accs = Vec::new();
    let mut excess = Vec::new();
    for video in data.split(Split::Test) {
        let out = run_arst_stream(params, cfg, cci, &video.features).unwrap();
        let ev = eval_video(&out.committed, &video.labels).unwrap();
        accs.push(ev.accuracy);
        let e = ev.pred_transitions as f64 - ev.gt_transitions as f64;
        excess.push(e.max(0.0));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    DecodeStats {
        mean_accuracy: mean(&accs),
        mean_excess_transitions: mean(&excess),
    }
}

#[test]
fn a06_synthetic_end_to_end_meets_accuracy_and_smoothing_targets() {
    let start = Instant::now();
    let cfg = e2e_fixture();
    let clean = e2e_dataset(&cfg, 0.0);
    let train_videos: Vec<_> = clean.split(Split::Train).collect();
    let (params, losses) = train_on_videos(&cfg, &train_videos, |_, _| Ok(())).unwrap();
    let train_secs = start.elapsed().as_secs_f64();
    let params32 = params.cast::<f32>();

    let greedy = CciConfig::disabled();
    let clean_stats = decode_test_split(&params32, &cfg.model, &clean, &greedy);

    // Same master seed with corruption switched on: every video keeps its
    // phase path and clean emissions, only the corrupted frames differ.
    let hard = e2e_dataset(&cfg, 0.05);
    let hard_greedy = decode_test_split(&params32, &cfg.model, &hard, &greedy);
    let confirmed = CciConfig {
        enabled: true,
        n: 10,
    };
    let hard_confirmed = decode_test_split(&params32, &cfg.model, &hard, &confirmed);

    let reduction = 1.0
        - hard_confirmed.mean_excess_transitions
            / hard_greedy.mean_excess_transitions.max(f64::MIN_POSITIVE);
    let acc_delta = hard_confirmed.mean_accuracy - hard_greedy.mean_accuracy;

    let ok = losses.len() == cfg.train.epochs
        && train_secs <= 600.0
        && clean_stats.mean_accuracy >= 0.90
        && hard_greedy.mean_excess_transitions > 0.0
        && reduction >= 0.30
        && acc_delta >= -0.01;
    verdict(
        "synthetic end-to-end",
        ok,
        &format!(
            "train {:.0} s/{} epochs (bound 600 s); clean accuracy {:.4} (bound 0.90); \
             corrupted excess transitions {:.2} -> {:.2}, reduction {:.0}% (bound 30%); \
             accuracy delta {:+.2} pp (bound -1 pp)",
            train_secs,
            losses.len(),
            clean_stats.mean_accuracy,
            hard_greedy.mean_excess_transitions,
            hard_confirmed.mean_excess_transitions,
            100.0 * reduction,
            100.0 * acc_delta
        ),
    );
}

#[test]
fn a07_band_width_sweep_shows_context_beats_self_only_attention() {
    // Corrupted observations make temporal context informative: a
    // self-only model cannot smooth over hard frames.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = e2e_fixture();
    cfg.workflow.hard_frame_rate = 0.05;
    let config_path = dir.path().join("sweep.json");
    cfg.save(&config_path).unwrap();
    let data_dir = dir.path().join("data");
    write_dataset(&data_dir, &e2e_dataset(&cfg, 0.05)).unwrap();

    let widths = [0usize, 2, 5, 10, 20];
    let rows = cmd_sweep_w(&data_dir, &config_path, &widths).unwrap();
    assert_eq!(rows.len(), widths.len());

    let self_only = rows.iter().find(|r| r.w == 0).unwrap().jaccard;
    let best_banded = rows
        .iter()
        .filter(|r| r.w != 0)
        .map(|r| r.jaccard)
        .fold(f64::MIN, f64::max);
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("W={} {:.4}", r.w, r.jaccard))
        .collect();
    verdict(
        "band-width sweep",
        best_banded > self_only,
        &format!(
            "jaccard by width [{}]; best banded {:.4} > self-only {:.4}",
            table.join(", "),
            best_banded,
            self_only
        ),
    );
}

/// Independent confusion-based reference for the per-video metrics:
/// per-phase tallies over phases present in the ground truth, zero
/// precision when a phase is never predicted, averages over those
/// phases only.
fn brute_force_eval(pred: &[u32], gt: &[u32]) -> (f64, f64, f64, f64) {
    let frames = gt.len();
    let correct = pred.iter().zip(gt).filter(|(p, g)| p == g).count();
    let accuracy = correct as f64 / frames as f64;

    let mut phases: Vec<u32> = gt.to_vec();
    phases.sort_unstable();
    phases.dedup();

    let (mut sp, mut sr, mut sj) = (0.0, 0.0, 0.0);
    for &phase in &phases {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for i in 0..frames {
            match (pred[i] == phase, gt[i] == phase) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        sp += if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        sr += tp as f64 / (tp + fn_) as f64;
        sj += tp as f64 / (tp + fp + fn_) as f64;
    }
    let k = phases.len() as f64;
    (accuracy, sp / k, sr / k, sj / k)
}

#[test]
fn a08_evaluation_matches_a_brute_force_reference() {
    // Hand-checked fixture first.
    let ev = eval_video(&[1, 2, 2, 2], &[1, 1, 2, 2]).unwrap();
    assert!((ev.accuracy - 0.75).abs() <= 1e-12);
    assert!((ev.avg_precision - 5.0 / 6.0).abs() <= 1e-12);
    assert!((ev.avg_recall - 0.75).abs() <= 1e-12);
    assert!((ev.avg_jaccard - 7.0 / 12.0).abs() <= 1e-12);

    let mut rng = SeededRng::new(9800);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let classes = 2 + rng.next_below(4) as usize;
        let frames = 1 + rng.next_below(40) as usize;
        let gt = random_labels(&mut rng, frames, classes);
        // Predictions may use phases the ground truth never shows.
        let pred = random_labels(&mut rng, frames, classes + 1);

        let ev = eval_video(&pred, &gt).unwrap();
        let (acc, prec, rec, jac) = brute_force_eval(&pred, &gt);
        worst = worst
            .max((ev.accuracy - acc).abs())
            .max((ev.avg_precision - prec).abs())
            .max((ev.avg_recall - rec).abs())
            .max((ev.avg_jaccard - jac).abs());
    }
    verdict(
        "evaluation vs brute-force reference",
        worst <= 1e-12,
        &format!("hand fixture exact; max abs diff {worst:.3e} over 100 random cases (bound 1e-12)"),
    );
}

#[test]
fn a09_streaming_latency_stays_flat_as_the_cache_grows() {
    let cfg = e2e_fixture().model;
    let mut rng = SeededRng::new(99).derive(1);
    let params = ModelParams::<f32>::init(&cfg, &mut rng).unwrap();
    let report = bench_latency(&params, &cfg, &CciConfig::disabled(), 2100, 123).unwrap();
    let early = report.early_mean_ms.unwrap();
    let late = report.late_mean_ms.unwrap();
    let ratio = late / early;
    verdict(
        "streaming latency growth",
        ratio <= 2.0,
        &format!(
            "mean latency {:.4} ms around frame 200 vs {:.4} ms around frame 2000, \
             ratio {:.2} (bound 2.0); throughput {:.0} fps vs {:.0} fps video rate",
            early, late, ratio, report.fps, report.reference_fps
        ),
    );
}

fn arst() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arst"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn arst");
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

/// Artifacts of one full pipeline run:
/// relative path -> bytes for files, plus the captured train stdout.
struct PipelineRun {
    files: Vec<(PathBuf, Vec<u8>)>,
    train_stdout: Vec<u8>,
    eval_stdout: Vec<u8>,
}

fn run_pipeline(root: &Path, config: &Path) -> PipelineRun {
    let data = root.join("data");
    let model = root.join("model.ckpt");
    let pred = root.join("pred.csv");
    let report = root.join("report.json");

    run_ok(arst().args(["gen", "--config"]).arg(config).arg("--out").arg(&data));
    let train = run_ok(
        arst()
            .args(["train", "--data"])
            .arg(&data)
            .arg("--config")
            .arg(config)
            .arg("--out-model")
            .arg(&model),
    );

    let mut feats: Vec<PathBuf> = std::fs::read_dir(data.join("test"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "feat"))
        .collect();
    feats.sort();
    let feat = feats.first().expect("a test video").clone();
    let labels = feat.with_extension("labels");

    run_ok(
        arst()
            .args(["infer", "--model"])
            .arg(&model)
            .arg("--features")
            .arg(&feat)
            .args(["--cci", "--n", "4", "--out"])
            .arg(&pred),
    );
    let eval = run_ok(
        arst()
            .args(["eval", "--pred"])
            .arg(&pred)
            .arg("--gt")
            .arg(&labels)
            .arg("--report")
            .arg(&report),
    );

    let files = walk(root)
        .into_iter()
        .map(|p| {
            let rel = p.strip_prefix(root).unwrap().to_path_buf();
            let bytes = std::fs::read(&p).unwrap();
            (rel, bytes)
        })
        .collect();
    PipelineRun {
        files,
        train_stdout: train.stdout,
        eval_stdout: eval.stdout,
    }
}

#[test]
fn a10_cli_pipeline_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    // Small fast configuration; determinism does not depend on scale.
    let mut cfg = RunConfig::desk();
    cfg.model.d_model = 16;
    cfg.model.n_heads = 2;
    cfg.model.d_ffn = Some(32);
    cfg.model.d_feat = 8;
    cfg.workflow.d_feat = 8;
    cfg.workflow.min_dwell = 5;
    cfg.workflow.mean_dwell = 8.0;
    cfg.train.epochs = 3;
    cfg.dataset.n_train = 2;
    cfg.dataset.n_val = 1;
    cfg.dataset.n_test = 1;
    cfg.dataset.t_min = 30;
    cfg.dataset.t_max = 40;
    let config = dir.path().join("run.json");
    cfg.save(&config).unwrap();

    let root_a = dir.path().join("a");
    let root_b = dir.path().join("b");
    std::fs::create_dir_all(&root_a).unwrap();
    std::fs::create_dir_all(&root_b).unwrap();
    let a = run_pipeline(&root_a, &config);
    let b = run_pipeline(&root_b, &config);

    let names_a: Vec<&PathBuf> = a.files.iter().map(|(p, _)| p).collect();
    let names_b: Vec<&PathBuf> = b.files.iter().map(|(p, _)| p).collect();
    assert_eq!(names_a, names_b, "pipeline file sets differ");
    let mut identical = 0usize;
    for ((pa, ba), (_, bb)) in a.files.iter().zip(b.files.iter()) {
        assert_eq!(ba, bb, "bytes differ for {}", pa.display());
        identical += 1;
    }
    assert_eq!(a.train_stdout, b.train_stdout, "train logs differ");
    assert_eq!(a.eval_stdout, b.eval_stdout, "eval reports differ");

    verdict(
        "pipeline rerun determinism",
        identical > 0,
        &format!(
            "{identical} artifact files plus train/eval stdout byte-identical across reruns"
        ),
    );
}
