use handtri::synth::{
    builtin_template, eval_nearest_mean, generate, synth_record, write_corpus, CorpusSpec,
};
use handtri::{
    process_video, Centroid, FrameDetections, SamplerConfig, VideoFeatureRecord, VideoStream,
};

fn video_seed(seed: u64, class: usize, i: usize) -> u64 {
    seed * 1_000_003 + class as u64 * 1000 + i as u64
}

fn records(
    per_class: usize,
    sigma: f64,
    seed: u64,
    cfg: &SamplerConfig,
    scale: f64,
) -> (Vec<VideoFeatureRecord>, Vec<VideoFeatureRecord>) {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in 0..5 {
        let t = builtin_template(c, sigma).unwrap();
        for i in 0..2 * per_class {
            let id = format!("{}_{i}", t.name);
            let frames = scaled(generate(&t, &id, video_seed(seed, c, i)), scale);
            let stream = VideoStream::from_frames(id, frames, 0).unwrap();
            let mut r = process_video(&stream, cfg, None).record;
            r.label = Some(t.name.to_owned());
            if i < per_class {
                train.push(r)
            } else {
                test.push(r)
            }
        }
    }
    (train, test)
}

fn scaled(mut frames: Vec<FrameDetections>, s: f64) -> Vec<FrameDetections> {
    for f in &mut frames {
        for d in &mut f.detections {
            d.bbox.x_min *= s;
            d.bbox.y_min *= s;
            d.bbox.x_max *= s;
            d.bbox.y_max *= s;
        }
    }
    frames
}

#[test]
fn same_seed_same_stream() {
    let t = builtin_template(0, 0.01).unwrap();
    assert_eq!(generate(&t, "a", 5), generate(&t, "a", 5));
}

#[test]
fn noiseless_circle_centroids_recovered() {
    let t = builtin_template(0, 0.0).unwrap();
    let stream = VideoStream::from_frames("c", generate(&t, "c", 3), 0).unwrap();
    let out = process_video(&stream, &SamplerConfig::default(), None);
    assert!(out.record.valid);
    for (f, &pad) in out.sampled.selected.iter().zip(&out.sampled.padding_mask) {
        if pad {
            continue;
        }
        let [face, h1, h2] = t.points(f.frame_index as usize);
        let close = |a: Centroid<f64>, b: Centroid<f64>| {
            (a.x - b.x).abs() <= 1e-12 && (a.y - b.y).abs() <= 1e-12
        };
        assert!(close(f.face, face));
        assert!(
            (close(f.hand1, h1) && close(f.hand2, h2))
                || (close(f.hand1, h2) && close(f.hand2, h1)),
            "frame {}",
            f.frame_index
        );
    }
}

#[test]
fn leading_static_frames_are_skipped() {
    for c in 0..5 {
        let mut t = builtin_template(c, 0.0).unwrap();
        t.rest_frames = 10;
        let stream = VideoStream::from_frames("r", generate(&t, "r", 1), 0).unwrap();
        let out = process_video(&stream, &SamplerConfig::default(), None);
        assert!(
            out.record.selected_indices.iter().all(|&i| i >= 10),
            "{}: {:?}",
            t.name,
            out.record.selected_indices
        );
    }
}

#[test]
fn corpus_passes_validation_and_yields_valid_records() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CorpusSpec {
        classes: 5,
        per_class: 12,
        sigma: 0.01,
        seed: 4,
    };
    let m = write_corpus(dir.path(), &spec).unwrap();
    assert_eq!(m.entries.len(), 60);
    assert!(m.validate().is_empty());
    let reloaded = handtri::manifest::Manifest::load(&dir.path().join("manifest.csv")).unwrap();
    assert_eq!(reloaded.entries, m.entries);

    let cfg = SamplerConfig::default();
    for e in &m.entries {
        let stream =
            VideoStream::read(&m.resolve(e), Some(&e.video_id), &Default::default()).unwrap();
        assert!(
            process_video(&stream, &cfg, None).record.valid,
            "{}",
            e.video_id
        );
    }

    let again = tempfile::tempdir().unwrap();
    write_corpus(again.path(), &spec).unwrap();
    for e in &m.entries {
        assert_eq!(
            std::fs::read(dir.path().join(&e.detections)).unwrap(),
            std::fs::read(again.path().join(&e.detections)).unwrap()
        );
    }
}

#[test]
fn corpus_rejects_bad_sizes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(write_corpus(
        dir.path(),
        &CorpusSpec {
            classes: 6,
            per_class: 10,
            sigma: 0.01,
            seed: 0
        }
    )
    .is_err());
    assert!(write_corpus(
        dir.path(),
        &CorpusSpec {
            classes: 5,
            per_class: 2,
            sigma: 0.01,
            seed: 0
        }
    )
    .is_err());
}

#[test]
fn dropout_of_nondominant_hand_keeps_records_usable() {
    let mut t = builtin_template(1, 0.01).unwrap();
    t.dropout = 0.3;
    let r = synth_record(&t, "d", 8, &SamplerConfig::default());
    assert!(r.valid);
    assert!(r.features.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn predictions_invariant_under_uniform_scaling() {
    // pixel thresholds follow the resolution, so the frame size scales too
    let cfg = SamplerConfig::default();
    let (train, test) = records(10, 0.01, 21, &cfg, 1.0);
    let base = eval_nearest_mean(&train, &test).unwrap();
    for s in [0.5, 0.8] {
        let cfg_s = SamplerConfig {
            source_frame_size: cfg.source_frame_size / s,
            ..cfg
        };
        let (train_s, test_s) = records(10, 0.01, 21, &cfg_s, s);
        let e = eval_nearest_mean(&train_s, &test_s).unwrap();
        assert_eq!(e.predictions, base.predictions, "scale {s}");
    }
}
