mod common;

use std::collections::BTreeSet;

use coemap::corpus::{AuthorMention, DocType, Publication, Researcher, ResearcherId, UnitId};
use coemap::scoring::{cluster_fss, scientific_strength, FssScope};
use coemap::{run_pipeline, PipelineConfig};
use proptest::prelude::*;

fn configs() -> [PipelineConfig; 3] {
    [
        PipelineConfig::default(),
        common::dense(),
        PipelineConfig {
            fss_scope: FssScope::All,
            ..common::dense()
        },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_a_category_changes_nothing(seed in any::<u64>(), pick in any::<prop::sample::Index>(), exp in prop::sample::select(vec![-1, 1, 3])) {
        let data = common::data(seed);
        let category = data.categories[pick.index(data.categories.len())].id.clone();
        let scaled = common::scale_category(&data, &category, exp);
        let (a, b) = (common::corpus(data), common::corpus(scaled));
        for cfg in configs() {
            let ma = run_pipeline(&a, &cfg).unwrap();
            let mb = run_pipeline(&b, &cfg).unwrap();
            prop_assert_eq!(common::export(&ma, &a), common::export(&mb, &b));
        }
    }

    #[test]
    fn both_fss_formulations_agree(seed in any::<u64>()) {
        let c = common::corpus(common::data(seed));
        for cfg in configs() {
            let map = run_pipeline(&c, &cfg).unwrap();
            for rc in map.clusters() {
                let cl = &rc.cluster;
                let ma = &c.category(&cl.category).unwrap().macro_area;
                let mut per_member = 0.0;
                for r in &cl.members {
                    for p in map.authorships.publications_of(r) {
                        let publication = c.publication(p).unwrap();
                        if cfg.fss_scope == FssScope::Category
                            && !c.publication_categories(publication).contains(&cl.category)
                        {
                            continue;
                        }
                        if let Some(w) = map.weights.weight(p, ma) {
                            per_member += w / publication.mentions.len() as f64;
                        }
                    }
                }
                prop_assert!((per_member - cl.fss).abs() <= 1e-12 * cl.fss.max(1.0));
            }
        }
    }

    #[test]
    fn weights_and_scores_are_non_negative(seed in any::<u64>()) {
        let c = common::corpus(common::data(seed));
        let map = run_pipeline(&c, &common::dense()).unwrap();
        for p in c.publications().keys() {
            for w in map.weights.macro_area_weights(p).into_iter().flat_map(|m| m.values()) {
                prop_assert!(*w >= 0.0);
            }
        }
        for (_, _, s) in map.scores.iter() {
            prop_assert!(s >= 0.0);
        }
        for rc in map.clusters() {
            prop_assert!(rc.cluster.fss >= 0.0);
        }
    }

    #[test]
    fn ss_matches_direct_sum(seed in any::<u64>()) {
        let c = common::corpus(common::data(seed));
        let map = run_pipeline(&c, &PipelineConfig::default()).unwrap();
        for (r, m, s) in map.scores.iter() {
            let direct = scientific_strength(r, m, &map.authorships, &c).unwrap();
            prop_assert!((s - direct).abs() <= 1e-12 * s.max(1.0));
        }
    }

    #[test]
    fn another_paper_never_lowers_ss_or_fss(seed in any::<u64>(), who in any::<prop::sample::Index>(), journal in any::<prop::sample::Index>(), coauthors in 0usize..3) {
        let data = common::data(seed);
        let before_c = common::corpus(data.clone());
        let before = run_pipeline(&before_c, &common::dense()).unwrap();

        let r = &data.researchers[who.index(data.researchers.len())];
        let org = data.organizations.iter().find(|o| o.unit == r.unit).unwrap();
        let mut mentions = vec![AuthorMention::new(r.surname.clone(), r.initials.clone()).with_address(0)];
        for _ in 0..coauthors {
            mentions.push(AuthorMention::new("Outsider", "Z"));
        }
        let mut after_data = data.clone();
        after_data.publications.push(Publication {
            id: "PNEW".into(),
            year: 2002,
            journal: data.journals[journal.index(data.journals.len())].id.clone(),
            doc_type: DocType::Article,
            mentions,
            addresses: vec![format!("Dept of Science, {}", org.name)],
        });
        let after_c = common::corpus(after_data);
        let after = run_pipeline(&after_c, &common::dense()).unwrap();
        prop_assume!(after.authorships.authors_of(&"PNEW".into()).contains(&r.id));

        for (m, s) in before.scores.iter().filter(|(x, _, _)| **x == r.id).map(|(_, m, s)| (m, s)) {
            prop_assert!(after.scores.get(&r.id, m).unwrap() >= s);
        }
        for rc in before.clusters().filter(|rc| rc.cluster.members.contains(&r.id)) {
            let cl = &rc.cluster;
            let fss = cluster_fss(&cl.members, &cl.category, before.config.fss_scope, &after.authorships, &after_c, &after.weights).unwrap();
            prop_assert!(fss >= cl.fss);
        }
    }

    #[test]
    fn resolving_an_outsider_leaves_fss_unchanged(seed in any::<u64>()) {
        let data = common::data(seed);
        let before_c = common::corpus(data.clone());
        let before = run_pipeline(&before_c, &common::dense()).unwrap();

        // external co-authors have surnames no registered researcher uses
        let mut after_data = data.clone();
        for (i, s) in ["Smith", "Muller", "Dupont", "Garcia"].iter().enumerate() {
            after_data.researchers.push(Researcher {
                id: ResearcherId::new(format!("X{i}")),
                surname: s.to_string(),
                initials: "J".into(),
                unit: UnitId::org_only("UA"),
            });
        }
        let after_c = common::corpus(after_data);
        let after = run_pipeline(&after_c, &common::dense()).unwrap();
        let newcomers: BTreeSet<ResearcherId> = (0..4).map(|i| ResearcherId::new(format!("X{i}"))).collect();
        prop_assert_eq!(
            after.authorships.links().iter().filter(|l| !newcomers.contains(&l.researcher)).count(),
            before.authorships.links().len()
        );
        for rc in before.clusters() {
            let cl = &rc.cluster;
            let fss = cluster_fss(&cl.members, &cl.category, before.config.fss_scope, &after.authorships, &after_c, &after.weights).unwrap();
            prop_assert_eq!(fss.to_bits(), cl.fss.to_bits());
        }
    }
}
