use proptest::prelude::*;

use sslart::art::{self, complement_code, ArtNetwork, ArtParams};
use sslart::ensemble::{compute_class_weights, train_ensemble, EnsembleConfig, Voting};
use sslart::mapfield::ArtmapModel;
use sslart::persist::{ModelDocument, StoredModel};
use sslart::rules::extract_rules;
use sslart::ssl::SslArtModel;
use sslart::{Member, SearchDepth, SemiSupervised};

const EPS: f64 = 1e-12;

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn samples(dim: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(unit(), dim), 1..max)
}

fn labeled(dim: usize, classes: usize, max: usize) -> impl Strategy<Value = Vec<(Vec<f64>, usize)>> {
    prop::collection::vec((prop::collection::vec(unit(), dim), 0..classes), 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_norm_equals_dimension(x in prop::collection::vec(unit(), 1..20)) {
        let a = complement_code(&x).unwrap();
        prop_assert!((a.norm() - x.len() as f64).abs() < 1e-12 * x.len() as f64);
        for i in 0..x.len() {
            prop_assert!((a.as_slice()[i] + a.as_slice()[x.len() + i] - 1.0).abs() < EPS);
        }
    }

    #[test]
    fn weights_only_shrink_and_respect_vigilance_floor(
        data in samples(3, 40),
        rho in 0.0..0.99f64,
        beta in prop_oneof![Just(1.0), 0.05..1.0f64],
    ) {
        let mut net = ArtNetwork::new(3, ArtParams::new(rho, 0.001, beta).unwrap()).unwrap();
        for x in &data {
            let before = net.clone();
            let j = net.learn(x).unwrap();
            for (old, new) in before.nodes().iter().zip(net.nodes()) {
                for (o, n) in old.weight.iter().zip(&new.weight) {
                    prop_assert!(n <= o);
                }
            }
            prop_assert!(net.nodes()[j].committed);
            prop_assert!(!net.nodes()[net.len() - 1].committed);
            prop_assert_eq!(net.nodes().iter().filter(|n| !n.committed).count(), 1);
        }
        for node in net.nodes().iter().filter(|n| n.committed) {
            prop_assert!(node.norm() >= rho * 3.0 - 1e-9, "|W| = {} < {}", node.norm(), rho * 3.0);
        }
    }

    #[test]
    fn repeat_presentation_is_stable(data in samples(2, 20), x in prop::collection::vec(unit(), 2), rho in 0.0..0.99f64) {
        let mut net = ArtNetwork::new(2, ArtParams::fast(rho).unwrap()).unwrap();
        for s in &data {
            net.learn(s).unwrap();
        }
        net.learn(&x).unwrap();
        let snapshot = net.clone();
        net.learn(&x).unwrap();
        prop_assert_eq!(net, snapshot);
    }

    #[test]
    fn training_is_deterministic(data in labeled(3, 3, 30), rho in 0.0..0.99f64) {
        let run = || {
            let mut m = SslArtModel::new(3, ArtParams::fast(rho).unwrap(), 3).unwrap();
            m.train_all(&data).unwrap();
            m.finalize_labels();
            m
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn otm_counts_are_conserved(unl in samples(2, 20), lab in labeled(2, 3, 30), rho in 0.0..0.99f64) {
        let mut m = SslArtModel::new(2, ArtParams::fast(rho).unwrap(), 3).unwrap();
        m.pretrain_unsupervised(&unl).unwrap();
        let stage1 = m.art_a().committed_count();
        m.train_all(&lab).unwrap();
        m.finalize_labels();
        prop_assert_eq!(m.otm().total(), lab.len() as u64);
        prop_assert!(m.art_a().committed_count() >= stage1);
        for j in 0..m.art_a().len() {
            let row = m.otm().row(j);
            prop_assert_eq!(m.node_label(j).is_some(), row.iter().sum::<u64>() > 0);
        }
    }

    #[test]
    fn oto_links_each_trained_node_to_one_class(lab in labeled(2, 3, 30), rho in 0.0..0.99f64) {
        let mut m = ArtmapModel::new(2, ArtParams::fast(rho).unwrap(), 3).unwrap();
        for (x, y) in &lab {
            let j = m.train_pair_oto(x, *y).unwrap();
            prop_assert_eq!(m.node_label(j), Some(*y));
        }
        for j in 0..m.art_a().committed_count() {
            prop_assert!(m.node_label(j).is_some());
        }
    }

    #[test]
    fn label_permutation_permutes_final_labels(lab in labeled(2, 3, 30), rho in 0.0..0.99f64) {
        let perm = [2usize, 0, 1];
        let mut a = SslArtModel::new(2, ArtParams::fast(rho).unwrap(), 3).unwrap();
        let mut b = a.clone();
        for (x, y) in &lab {
            a.learn_labeled(x, *y).unwrap();
            b.learn_labeled(x, perm[*y]).unwrap();
        }
        a.finalize_labels();
        b.finalize_labels();
        for j in 0..a.art_a().len() {
            let ev = a.class_evidence(j);
            let max = ev.iter().copied().max().unwrap_or(0);
            let tied = ev.iter().filter(|&&n| n == max).count() > 1;
            if !tied {
                prop_assert_eq!(b.node_label(j), a.node_label(j).map(|c| perm[c]));
            }
        }
    }

    #[test]
    fn deeper_search_never_lowers_coverage(unl in samples(2, 30), lab in labeled(2, 2, 10), test in samples(2, 30)) {
        let mut m = SslArtModel::new(2, ArtParams::fast(0.9).unwrap(), 2).unwrap();
        m.pretrain_unsupervised(&unl).unwrap();
        m.train_all(&lab).unwrap();
        m.finalize_labels();
        let covered = |t: usize| {
            test.iter().filter(|x| m.predict_with_depth(x, SearchDepth::top(t).unwrap()).unwrap().label.is_some()).count()
        };
        prop_assert!(covered(3) >= covered(2));
        prop_assert!(covered(2) >= covered(1));
        for x in &test {
            prop_assert!(m.predict_with_depth(x, SearchDepth::All).unwrap().label.is_some());
        }
    }

    #[test]
    fn rules_track_labeled_nodes(unl in samples(3, 30), lab in labeled(3, 3, 30), rho in 0.0..0.99f64, q in 2usize..8) {
        let mut m = SslArtModel::new(3, ArtParams::fast(rho).unwrap(), 3).unwrap();
        m.pretrain_unsupervised(&unl).unwrap();
        m.train_all(&lab).unwrap();
        m.finalize_labels();
        let before = m.clone();
        let rules = extract_rules(&m, q).unwrap();
        prop_assert_eq!(&m, &before);
        prop_assert_eq!(rules.len(), m.labeled_count());
        for r in &rules {
            let sum: f64 = r.confidences.iter().sum();
            prop_assert!((sum - 1.0).abs() < EPS);
            prop_assert!(r.confidences.iter().all(|&p| p >= 0.0));
            prop_assert_eq!(Some(r.consequent), m.node_label(r.source_node));
            let best = r.confidences.iter().cloned().fold(0.0, f64::max);
            prop_assert!((r.confidences[r.consequent] - best).abs() < EPS);
            for &(lo, hi) in &r.antecedents {
                prop_assert!(1 <= lo && lo <= hi && hi <= q);
            }
        }
    }

    #[test]
    fn documents_round_trip_exactly(unl in samples(3, 30), lab in labeled(3, 2, 20), rho in 0.0..0.99f64, beta in 0.05..1.0f64) {
        let params = ArtParams::new(rho, 0.001, beta).unwrap();
        let mut m = SslArtModel::new(3, params, 2).unwrap();
        m.pretrain_unsupervised(&unl).unwrap();
        m.train_all(&lab).unwrap();
        m.finalize_labels();
        let doc = ModelDocument::new(
            StoredModel::Single { member: Member::Otm(m) },
            vec!["a".into(), "b".into()],
            vec!["f1".into(), "f2".into(), "f3".into()],
        ).unwrap();
        let back = ModelDocument::<f64>::from_json(&doc.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, doc);
    }
}

#[test]
fn fig3_otm_labels_shared_node_by_majority() {
    // one pretrained node covering [0.4, 0.6]^2; three labeled samples inside it
    let mut m = SslArtModel::new(2, ArtParams::fast(0.6).unwrap(), 2).unwrap();
    m.pretrain_unsupervised(&[vec![0.4, 0.4], vec![0.6, 0.6]]).unwrap();
    assert_eq!(m.art_a().committed_count(), 1);
    let w = &m.art_a().nodes()[0].weight;
    for x in [[0.45, 0.5], [0.5, 0.55], [0.55, 0.45]] {
        let a = complement_code(&x).unwrap();
        assert!(art::vigilance_check(a.as_slice(), w, 0.6));
    }
    let before = m.art_a().nodes()[0].clone();
    m.learn_labeled(&[0.45, 0.5], 0).unwrap(); // the noisy sample
    m.learn_labeled(&[0.5, 0.55], 1).unwrap();
    m.learn_labeled(&[0.55, 0.45], 1).unwrap();
    m.finalize_labels();
    assert_eq!(m.art_a().committed_count(), 1);
    assert_eq!(m.art_a().nodes()[0], before);
    assert_eq!(m.class_evidence(0), vec![1, 2]);
    assert_eq!(m.node_label(0), Some(1));

    let mut oto = ArtmapModel::new(2, ArtParams::fast(0.6).unwrap(), 2).unwrap();
    oto.pretrain(&[vec![0.4, 0.4], vec![0.6, 0.6]]).unwrap();
    oto.train_pair_oto(&[0.45, 0.5], 0).unwrap();
    oto.train_pair_oto(&[0.5, 0.55], 1).unwrap();
    oto.train_pair_oto(&[0.55, 0.45], 1).unwrap();
    assert!(oto.art_a().committed_count() >= 2);
}

/// Small validation fixture: a perfect member, and weights from counted
/// recalls.
#[test]
fn class_weights_are_per_class_recall() {
    let mut m = SslArtModel::new(1, ArtParams::fast(0.95).unwrap(), 2).unwrap();
    m.learn_labeled(&[0.1], 0).unwrap();
    m.learn_labeled(&[0.9], 1).unwrap();
    m.finalize_labels();
    let mut validation: Vec<(Vec<f64>, usize)> = Vec::new();
    for i in 0..8 {
        validation.push((vec![0.05 + i as f64 * 0.01], 0));
    }
    // two class-0 samples sit next to the class-1 prototype
    validation.push((vec![0.85], 0));
    validation.push((vec![0.95], 0));
    for i in 0..5 {
        validation.push((vec![0.8 + i as f64 * 0.03], 1));
    }
    let w: Vec<f64> = compute_class_weights(&m, &validation, 2).unwrap();
    assert!((w[0] - 0.8).abs() < EPS);
    assert!((w[1] - 1.0).abs() < EPS);
    let w = compute_class_weights(&m, &validation[10..], 2).unwrap();
    assert_eq!(w[0], 0.0);

    // abstention counts as a miss
    let mut limited = SslArtModel::new(1, ArtParams::fast(0.95).unwrap(), 2).unwrap();
    limited.pretrain_unsupervised(&[vec![0.5]]).unwrap();
    limited.learn_labeled(&[0.1], 0).unwrap();
    limited.finalize_labels();
    limited.set_search_depth(SearchDepth::top(1).unwrap());
    let w: Vec<f64> = compute_class_weights(&limited, &[(vec![0.5], 0), (vec![0.1], 0)], 2).unwrap();
    assert!((w[0] - 0.5).abs() < EPS);
}

#[test]
fn ensemble_document_round_trip() {
    let mut labeled = Vec::new();
    let mut unlabeled = Vec::new();
    for i in 0..30 {
        let t = i as f64 / 60.0;
        labeled.push((vec![t, 1.0 - t], usize::from(i % 2 == 0)));
        unlabeled.push(vec![1.0 - t, t * 0.5]);
    }
    let cfg = EnsembleConfig { members: 3, voting: Voting::Majority, ..Default::default() };
    for mapping in [sslart::Mapping::Otm, sslart::Mapping::Oto] {
        let e = train_ensemble(&labeled, &unlabeled, &cfg, 9, || Member::new(mapping, 2, ArtParams::fast(0.8)?, 2)).unwrap();
        let doc = ModelDocument::new(
            StoredModel::Ensemble { ensemble: e },
            vec!["no".into(), "yes".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let text = doc.to_json().unwrap();
        let back = ModelDocument::<f64>::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json().unwrap(), text);
    }
}

#[test]
fn f32_networks_learn_too() {
    let mut net = sslart::ArtNetwork32::new(2, ArtParams::fast(0.9f32).unwrap()).unwrap();
    net.learn(&[0.1, 0.1]).unwrap();
    net.learn(&[0.9, 0.9]).unwrap();
    assert_eq!(net.committed_count(), 2);
    let mut m = sslart::SslArtModel32::new(2, ArtParams::fast(0.9f32).unwrap(), 2).unwrap();
    m.learn_labeled(&[0.2, 0.3], 1).unwrap();
    m.finalize_labels();
    assert_eq!(m.predict(&[0.2, 0.3]).unwrap().label, Some(1));
}
