use hb_core::model::KnowledgeConstraints;
use hb_core::pipeline::{build_catalog, ingest, CatalogPlan, DailyTable, DiscretizedDataset, IngestConfig};
use hb_core::synthetic::{iowa_like_panel, modal_yield_bin, yield_distribution, IowaLikeConfig, YIELD_MODE_PROB};

#[test]
fn yield_distribution_rows_are_normalized() {
    for s in 0..4 {
        for d in 0..4 {
            let p = yield_distribution(s, d);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(p[modal_yield_bin(s, d)], YIELD_MODE_PROB);
        }
    }
    // extreme drought classes lower the mode
    assert_eq!(modal_yield_bin(3, 0), 2);
    assert_eq!(modal_yield_bin(3, 1), 3);
    assert_eq!(modal_yield_bin(0, 3), 0);
}

#[test]
fn iowa_like_panel_flows_through_the_pipeline() {
    let cfg = IowaLikeConfig::default();
    let panel = iowa_like_panel(&cfg);
    assert_eq!(panel.annual.len(), 99 * 6);
    assert_eq!(panel.latent.len(), 99 * 6);

    // daily CSV round trip
    let mut buf = Vec::new();
    panel.daily.write_csv(&mut buf).unwrap();
    let daily = DailyTable::read_csv(buf.as_slice()).unwrap();
    assert_eq!(daily, panel.daily);

    let merged = ingest(&daily, &panel.recipe, Some(&panel.annual), &IngestConfig::default()).unwrap();
    assert_eq!(merged.len(), 99 * 6);
    assert_eq!(merged.columns().len(), 12);

    let kc = KnowledgeConstraints::from_file(panel.constraints.clone()).unwrap();
    let mut plan = CatalogPlan::new("Yield");
    plan.tiers = kc.tiers().clone();
    let catalog = build_catalog(&merged, &plan).unwrap();
    assert_eq!(catalog.len(), 12);
    assert_eq!(catalog.target().bins.edges(), [131.0, 149.0, 178.0]);
    let data = DiscretizedDataset::from_panel(&merged, &catalog).unwrap();
    assert_eq!(data.len(), 99 * 6);

    // the latent yield bin is the discretized yield
    let t = catalog.target_index();
    for (row, latent) in data.rows().iter().zip(&panel.latent) {
        assert_eq!(row.county_fips, latent.county_fips);
        assert_eq!(row.bins[t], Some(latent.yield_bin));
    }
}

#[test]
fn generator_is_seeded() {
    let a = iowa_like_panel(&IowaLikeConfig {
        counties: 5,
        ..IowaLikeConfig::default()
    });
    let b = iowa_like_panel(&IowaLikeConfig {
        counties: 5,
        ..IowaLikeConfig::default()
    });
    assert_eq!(a.annual, b.annual);
    assert_eq!(a.daily, b.daily);
}
