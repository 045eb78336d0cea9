use crate::inference::BayesNet;
use crate::model::{BinScheme, Cpt, Dag, VariableCatalog, VariableKind, VariableSpec};

use super::random::unit_scheme;

fn spec(name: &str, kind: VariableKind, tier: u32, bins: BinScheme) -> VariableSpec {
    VariableSpec {
        name: name.to_string(),
        kind,
        tier,
        bins,
    }
}

fn cpt(node: &str, parents: &[(&str, usize)], card: usize, rows: Vec<Vec<f64>>) -> Cpt {
    Cpt::new(
        node,
        parents.iter().map(|p| p.0.to_string()).collect(),
        parents.iter().map(|p| p.1).collect(),
        card,
        rows,
    )
    .expect("fixture CPT is valid")
}

/// Row putting `peak` on `mode` and spreading the rest evenly.
fn peaked(card: usize, mode: usize, peak: f64) -> Vec<f64> {
    let rest = (1.0 - peak) / (card - 1) as f64;
    (0..card).map(|k| if k == mode { peak } else { rest }).collect()
}

/// Six-node network with two v-structures and strong dependencies:
/// `A -> C <- B`, `C -> D -> E`, `C -> Y <- E`. Every edge is compelled, so
/// the equivalence class is this DAG alone.
pub fn ground_truth_six() -> BayesNet {
    let catalog = VariableCatalog::new(vec![
        spec("A", VariableKind::Raw, 1, unit_scheme(3)),
        spec("B", VariableKind::Raw, 1, unit_scheme(2)),
        spec("C", VariableKind::Raw, 2, unit_scheme(3)),
        spec("D", VariableKind::Raw, 3, unit_scheme(2)),
        spec("E", VariableKind::Raw, 4, unit_scheme(3)),
        spec("Y", VariableKind::Target, 5, unit_scheme(4)),
    ])
    .expect("fixture catalog");
    let dag = Dag::with_edges(
        ["A", "B", "C", "D", "E", "Y"],
        [("A", "C"), ("B", "C"), ("C", "D"), ("D", "E"), ("C", "Y"), ("E", "Y")],
    )
    .expect("fixture DAG");
    let mut c_rows = Vec::new();
    for a in 0..3 {
        for b in 0..2 {
            c_rows.push(peaked(3, (a + b) % 3, 0.8));
        }
    }
    let mut y_rows = Vec::new();
    for c in 0..3 {
        for e in 0..3 {
            y_rows.push(peaked(4, (c + e) % 4, 0.7));
        }
    }
    let cpts = vec![
        cpt("A", &[], 3, vec![vec![0.3, 0.4, 0.3]]),
        cpt("B", &[], 2, vec![vec![0.5, 0.5]]),
        cpt("C", &[("A", 3), ("B", 2)], 3, c_rows),
        cpt("D", &[("C", 3)], 2, vec![vec![0.9, 0.1], vec![0.15, 0.85], vec![0.75, 0.25]]),
        cpt("E", &[("D", 2)], 3, vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.2, 0.7]]),
        cpt("Y", &[("C", 3), ("E", 3)], 4, y_rows),
    ];
    BayesNet::new(catalog, dag, cpts).expect("fixture network")
}

/// Yield bin means used by the what-if fixture.
pub const WHATIF_YIELD_MEANS: [f64; 4] = [120.0, 140.0, 163.0, 190.0];

/// `CSR2 -> Yield <- PDSI` with a yield effect that rises with every CSR2
/// bin and peaks at the interior PDSI bins.
pub fn whatif_fixture() -> BayesNet {
    let scheme = |edges: Vec<f64>, means: Vec<f64>| {
        BinScheme::new(edges)
            .and_then(|s| s.with_bin_means(means))
            .expect("fixture scheme")
    };
    let yield_bins = BinScheme::non_negative(vec![131.0, 149.0, 178.0])
        .and_then(|s| s.with_bin_means(WHATIF_YIELD_MEANS.to_vec()))
        .expect("fixture scheme");
    let catalog = VariableCatalog::new(vec![
        spec(
            "CSR2",
            VariableKind::Raw,
            1,
            scheme(vec![50.0, 65.0, 80.0], vec![40.0, 58.0, 72.0, 88.0]),
        ),
        spec(
            "PDSI",
            VariableKind::Raw,
            1,
            scheme(vec![-2.0, 0.0, 2.0], vec![-3.0, -1.0, 1.0, 3.0]),
        ),
        spec("Yield", VariableKind::Target, 2, yield_bins),
    ])
    .expect("fixture catalog");
    let dag = Dag::with_edges(["CSR2", "PDSI", "Yield"], [("CSR2", "Yield"), ("PDSI", "Yield")])
        .expect("fixture DAG");
    const PDSI_SHIFT: [f64; 4] = [0.0, 1.2, 1.0, -0.1];
    let mut rows = Vec::new();
    for s in 0..4 {
        for shift in PDSI_SHIFT {
            let center = 0.8 * s as f64 + shift;
            let w: Vec<f64> = (0..4)
                .map(|k| (-(k as f64 - center).powi(2) / 0.8).exp())
                .collect();
            let z: f64 = w.iter().sum();
            rows.push(w.into_iter().map(|x| x / z).collect());
        }
    }
    let cpts = vec![
        cpt("CSR2", &[], 4, vec![vec![0.25; 4]]),
        cpt("PDSI", &[], 4, vec![vec![0.2, 0.3, 0.3, 0.2]]),
        cpt("Yield", &[("CSR2", 4), ("PDSI", 4)], 4, rows),
    ];
    BayesNet::new(catalog, dag, cpts).expect("fixture network")
}
