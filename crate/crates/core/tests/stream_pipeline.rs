use std::thread;
use std::time::Duration;

use fraudstream::models::{Family, HyperParams};
use fraudstream::stream::{
    directory_source, run_on_batches, run_streaming_pipeline, SlidingWindowSpec, StreamConfig, StreamingContext,
    END_MARKER,
};
use fraudstream::synthgen::{generate_batches, write_batch_files, GenSpec};
use fraudstream::RngSeed;

fn spec(n_records: usize) -> GenSpec {
    GenSpec { n_records, n_features: 4, seed: RngSeed(8), ..GenSpec::default() }
}

fn dt_config(ws: usize, sl: usize) -> StreamConfig {
    StreamConfig {
        window: SlidingWindowSpec::new(ws, sl).unwrap(),
        measure_latency: false,
        ..StreamConfig::new(Family::Dt, HyperParams::new().int("max_depth", 4))
    }
}

#[test]
fn windows_are_causal_and_counted() {
    let batches = generate_batches(&spec(20_000), 100).unwrap();
    for (ws, sl) in [(2, 1), (3, 1), (4, 2), (5, 3)] {
        let out = run_on_batches(batches.clone(), dt_config(ws, sl)).unwrap();
        let expected = (200 - ws) / sl + 1;
        assert_eq!(out.results.len(), expected, "ws {ws} sl {sl}");
        for (w, r) in out.results.iter().enumerate() {
            assert_eq!(r.window_id, w);
            let start = (w * sl) as u64;
            assert_eq!(r.train_batch_indices, (start..start + ws as u64 - 1).collect::<Vec<_>>());
            assert_eq!(r.test_batch_index, start + ws as u64 - 1);
        }
    }
}

#[test]
fn directory_stream_matches_replay() {
    let s = spec(6_000);
    let batches = generate_batches(&s, 500).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    let names = s.feature_names();
    let to_write = batches.clone();
    let writer = thread::spawn(move || {
        for (i, b) in to_write.iter().enumerate() {
            // Files are numbered from 1; write them one by one with pauses.
            let tmp = tempfile::tempdir().unwrap();
            write_batch_files(tmp.path(), &names, std::slice::from_ref(b)).unwrap();
            let src = tmp.path().join("batch_000001.csv");
            std::fs::rename(src, path.join(format!("batch_{:06}.csv", i + 1))).unwrap();
            thread::sleep(Duration::from_millis(20));
        }
        std::fs::write(path.join(END_MARKER), b"").unwrap();
    });
    let source = directory_source(dir.path(), "label", 5, 10_000).unwrap();
    let mut ctx = StreamingContext::new(Box::new(source), dt_config(2, 1));
    let live = run_streaming_pipeline(&mut ctx).unwrap();
    writer.join().unwrap();
    let replay = run_on_batches(batches, dt_config(2, 1)).unwrap();
    assert_eq!(live.results.len(), 11);
    let reports = |o: &fraudstream::stream::StreamOutcome| o.results.iter().map(|r| r.report).collect::<Vec<_>>();
    assert_eq!(reports(&live), reports(&replay));
}
