//! Property tests over the invariants the pipeline promises: lossless and
//! resynchronizing wire transport, normalized centroid weights, gate and
//! weight symmetry under channel permutation, translation equivariance of
//! the estimate, and exact dataset round-trips.

use proptest::prelude::*;

use palmsense::geometry::{PalmGeometry, Point2};
use palmsense::localization::{
    compute_activation, estimate_position, estimate_position_with_threshold,
};
use palmsense::types::{CalibrationProfile, LabeledSample, TactileFrame, CHANNEL_COUNT};
use palmsense::wire::{decode_stream, encode_frame, StreamDecoder, FRAME_LEN};

fn arb_channels() -> impl Strategy<Value = [u16; CHANNEL_COUNT]> {
    prop::array::uniform16(0u16..=4095)
}

fn arb_frame() -> impl Strategy<Value = TactileFrame> {
    (0u64..200_000, arb_channels())
        .prop_map(|(seq, channels)| TactileFrame::sampled(seq, channels).unwrap())
}

fn arb_profile() -> impl Strategy<Value = CalibrationProfile> {
    (
        prop::array::uniform16(10.0f64..4000.0),
        prop::array::uniform16(1.0f64..50.0),
    )
        .prop_map(|(baselines, scales)| {
            CalibrationProfile::new(baselines, scales, 100).unwrap()
        })
}

proptest! {
    #[test]
    fn wire_round_trip_is_lossless(frames in prop::collection::vec(arb_frame(), 0..40)) {
        // Encoding keeps only 16 sequence bits, so compare monotone streams.
        let mut bytes = Vec::new();
        let mut renumbered = Vec::new();
        for (i, mut f) in frames.into_iter().enumerate() {
            f.sequence = i as u64;
            f.timestamp = f.sequence as f64 / 200.0;
            bytes.extend_from_slice(&encode_frame(&f).unwrap());
            renumbered.push(f);
        }
        let (decoded, stats) = decode_stream(&bytes);
        prop_assert_eq!(decoded, renumbered);
        prop_assert_eq!(stats.frames_corrupted, 0);
        prop_assert_eq!(stats.bytes_skipped, 0);
    }

    #[test]
    fn wire_resyncs_through_garbage(
        frames in prop::collection::vec(arb_frame(), 1..10),
        garbage in prop::collection::vec(any::<u8>(), 0..200),
        chunk in 1usize..128,
    ) {
        // Garbage with sync bytes masked out cannot fake a frame start.
        let mut bytes: Vec<u8> = garbage
            .into_iter()
            .map(|b| if b == 0xAA { 0xAB } else { b })
            .collect();
        let mut expected = Vec::new();
        for (i, mut f) in frames.into_iter().enumerate() {
            f.sequence = i as u64;
            f.timestamp = f.sequence as f64 / 200.0;
            bytes.extend_from_slice(&encode_frame(&f).unwrap());
            expected.push(f);
        }
        let mut decoder = StreamDecoder::default();
        let mut decoded = Vec::new();
        for piece in bytes.chunks(chunk) {
            decoded.extend(decoder.push(piece));
        }
        prop_assert_eq!(decoded, expected);
    }

    #[test]
    fn decoder_survives_arbitrary_bytes(
        bytes in prop::collection::vec(any::<u8>(), 0..2000),
        cuts in prop::collection::vec(1usize..100, 0..40),
    ) {
        // Arbitrary input, arbitrary slicing: no panic, and the decoder
        // recovers completely once the wire goes quiet.
        let mut decoder = StreamDecoder::default();
        let mut offset = 0;
        for cut in cuts {
            let end = (offset + cut).min(bytes.len());
            decoder.push(&bytes[offset..end]);
            offset = end;
        }
        decoder.push(&bytes[offset..]);
        // A sync-free gap one frame long drains every stale candidate, so
        // the next genuine frame must come through exactly.
        decoder.push(&[0u8; FRAME_LEN]);
        let frame = TactileFrame::sampled(1, [7; CHANNEL_COUNT]).unwrap();
        let tail = decoder.push(&encode_frame(&frame).unwrap());
        prop_assert_eq!(tail.len(), 1);
        prop_assert_eq!(tail[0].channels, frame.channels);
    }

    #[test]
    fn centroid_weights_normalized_and_inside_hull_box(
        channels in arb_channels(),
        profile in arb_profile(),
        tau in 0.5f64..6.0,
    ) {
        let geometry = PalmGeometry::standard();
        let frame = TactileFrame::sampled(0, channels).unwrap();
        let estimate = estimate_position_with_threshold(&frame, &profile, &geometry, tau);
        prop_assert_eq!(estimate.activated.len(), estimate.weights.len());
        match estimate.position {
            None => prop_assert!(estimate.activated.is_empty()),
            Some(p) => {
                let total: f64 = estimate.weights.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                prop_assert!(estimate.weights.iter().all(|w| *w > 0.0));
                let xs: Vec<f64> = estimate
                    .activated
                    .iter()
                    .map(|&i| geometry.sensing_positions[i].x)
                    .collect();
                let ys: Vec<f64> = estimate
                    .activated
                    .iter()
                    .map(|&i| geometry.sensing_positions[i].y)
                    .collect();
                let eps = 1e-9;
                prop_assert!(p.x >= xs.iter().cloned().fold(f64::INFINITY, f64::min) - eps);
                prop_assert!(p.x <= xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + eps);
                prop_assert!(p.y >= ys.iter().cloned().fold(f64::INFINITY, f64::min) - eps);
                prop_assert!(p.y <= ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + eps);
            }
        }
    }

    #[test]
    fn activation_weights_lie_in_unit_interval(
        channels in arb_channels(),
        profile in arb_profile(),
    ) {
        let frame = TactileFrame::sampled(0, channels).unwrap();
        let activation = compute_activation(&frame, &profile, 3.0);
        for (i, w) in activation.weights.iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(w), "weight {i} = {w}");
        }
        // Activated channels clear the saturating-weight level of the gate.
        let floor = 1.0 - (-2.0 * 9.0f64).exp();
        for &i in &activation.activated {
            prop_assert!(activation.weights[i] >= floor - 1e-12);
        }
    }

    #[test]
    fn estimate_invariant_under_channel_permutation(
        channels in arb_channels(),
        profile in arb_profile(),
        swap in (0usize..16, 0usize..16),
    ) {
        // Swapping two channels and their electrode positions together is a
        // relabeling; the physical estimate cannot change.
        let base_geometry = PalmGeometry::standard();
        let frame = TactileFrame::sampled(0, channels).unwrap();
        let a = estimate_position(&frame, &profile, &base_geometry);

        let (i, j) = swap;
        let mut channels2 = channels;
        channels2.swap(i, j);
        let mut baselines = profile.baselines;
        baselines.swap(i, j);
        let mut scales = profile.noise_scales;
        scales.swap(i, j);
        let profile2 = CalibrationProfile::new(baselines, scales, 100).unwrap();
        let mut positions = base_geometry.sensing_positions.clone();
        positions.swap(i, j);
        let geometry2 = PalmGeometry::new(45.0, 45.0, 30.0, 30.0, positions).unwrap();
        let frame2 = TactileFrame::sampled(0, channels2).unwrap();
        let b = estimate_position(&frame2, &profile2, &geometry2);

        prop_assert_eq!(a.position.is_some(), b.position.is_some());
        if let (Some(pa), Some(pb)) = (a.position, b.position) {
            prop_assert!(pa.distance(&pb) < 1e-9);
        }
    }

    #[test]
    fn estimate_equivariant_under_translation(
        channels in arb_channels(),
        profile in arb_profile(),
        tx in -5.0f64..5.0,
        ty in -5.0f64..5.0,
    ) {
        // Same readings on a translated electrode layout shift the estimate
        // by exactly the translation.
        let positions: Vec<Point2> = PalmGeometry::standard()
            .sensing_positions
            .iter()
            .map(|p| Point2::new(p.x, p.y))
            .collect();
        let moved: Vec<Point2> = positions
            .iter()
            .map(|p| Point2::new(p.x + tx, p.y + ty))
            .collect();
        let big = |pts| PalmGeometry::new(60.0, 60.0, 44.0, 44.0, pts).unwrap();
        let frame = TactileFrame::sampled(0, channels).unwrap();
        let a = estimate_position(&frame, &profile, &big(positions));
        let b = estimate_position(&frame, &profile, &big(moved));
        match (a.position, b.position) {
            (None, None) => {}
            (Some(pa), Some(pb)) => {
                prop_assert!((pb.x - pa.x - tx).abs() < 1e-9);
                prop_assert!((pb.y - pa.y - ty).abs() < 1e-9);
            }
            other => prop_assert!(false, "detection changed: {other:?}"),
        }
    }

    #[test]
    fn dataset_csv_round_trip_is_exact(
        rows in prop::collection::vec(
            (
                prop::array::uniform16(0.0f64..4095.0),
                prop::array::uniform3(-50.0f64..50.0),
                prop::option::of((-22.0f64..22.0, -22.0f64..22.0)),
            ),
            1..30,
        ),
        with_positions in any::<bool>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("prop.csv");
        let samples: Vec<LabeledSample> = rows
            .into_iter()
            .map(|(tactile, force, pos)| LabeledSample {
                tactile,
                force,
                contact_position: if with_positions {
                    let (x, y) = pos.unwrap_or((0.125, -17.375));
                    Some(Point2::new(x, y))
                } else {
                    None
                },
            })
            .collect();
        palmsense::dataset::write_dataset(&samples, &path).unwrap();
        let back = palmsense::dataset::read_dataset(&path).unwrap();
        prop_assert_eq!(back, samples);
    }
}
