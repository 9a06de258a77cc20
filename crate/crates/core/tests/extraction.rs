mod common;

use imig_core::bench::{eigenstrain_geometry, thb_space, Field};
use imig_core::foreground::{decomposition_mesh, material_change_marker, CellKind, ForegroundBasis, ForegroundMesh};
use imig_core::hierarchy::ThbSpace;
use proptest::prelude::*;
use rand::Rng;

/// Quarter plate with a circular inclusion, background refined one level
/// along the interface.
fn refined_case(h: f64, p: usize, q: usize) -> (ForegroundMesh, ForegroundBasis, Field) {
    let s = eigenstrain_geometry(h, 1).unwrap();
    let marker = material_change_marker(&s.fields, &s.phases);
    let bg = s.background.refined(1, p, &marker).unwrap();
    let decomp = decomposition_mesh(&[&bg], 0, 1, &s.fields, &s.phases).unwrap();
    let mesh = ForegroundMesh::build(&decomp, &s.fields, &s.phases).unwrap();
    let basis = ForegroundBasis::new(&mesh, q).unwrap();
    let field = Field::build(thb_space(bg, p).unwrap(), &mesh, &basis).unwrap();
    (mesh, basis, field)
}

/// Background cells whose foreground cells are all untouched rectangles.
fn uncut_nodes(mesh: &ForegroundMesh, basis: &ForegroundBasis, field: &Field) -> Vec<usize> {
    let nb = field.space.mesh().n_cells();
    let mut cut = vec![false; nb];
    for (c, cell) in mesh.cells.iter().enumerate() {
        if cell.kind() != CellKind::Quad {
            cut[field.enriched.background_cell[c]] = true;
        }
    }
    (0..basis.n_nodes()).filter(|&j| !cut[field.enriched.background_cell[basis.node_cell[j]]]).collect()
}

fn column(field: &Field, j: usize) -> Vec<(usize, f64)> {
    let m = &field.extraction.matrix;
    (0..m.nrows).map(|r| (r, m.get(r, j))).filter(|e| e.1 != 0.0).collect()
}

#[test]
fn uncut_entries_are_background_values() {
    for p in 1..=2 {
        let (mesh, basis, field) = refined_case(0.625, p, p);
        let ext = &field.extraction;
        let mt = ext.matrix.transpose();
        let nodes = uncut_nodes(&mesh, &basis, &field);
        assert!(nodes.len() > basis.n_nodes() / 2);
        for &j in &nodes {
            let c = basis.node_cell[j];
            let x = basis.nodes[j];
            let mut want: Vec<(usize, f64)> = field
                .space
                .eval(x)
                .unwrap()
                .into_iter()
                .filter(|e| e.1.abs() > 1e-15)
                .map(|(k, v)| (ext.row_of[field.enriched.enriched_id(c, k).unwrap()].unwrap(), v))
                .collect();
            want.sort_by_key(|e| e.0);
            let (rows, vals) = mt.row(j);
            let got: Vec<(usize, f64)> =
                rows.iter().zip(vals).filter(|e| e.1.abs() > 1e-15).map(|(&r, &v)| (r, v)).collect();
            assert_eq!(got.len(), want.len(), "node {j}");
            for (g, w) in got.iter().zip(&want) {
                assert_eq!(g.0, w.0);
                assert!((g.1 - w.1).abs() < 1e-12);
            }
            let sum: f64 = column(&field, j).iter().map(|e| e.1).sum();
            assert!((sum - 1.0).abs() < 1e-12, "column {j} sums to {sum}");
        }
    }
}

#[test]
fn coefficients_interpolate_background_field() {
    let (mesh, basis, field) = refined_case(0.625, 2, 2);
    let ext = &field.extraction;
    let mut rng = common::rng(7);
    let d: Vec<f64> = (0..ext.n_rows()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nodal = ext.interpolate(&d).unwrap();
    for j in 0..basis.n_nodes() {
        let c = basis.node_cell[j];
        let b = field.enriched.background_cell[c];
        let mut v = 0.0;
        for e in field.space.eval_in_cell(b, basis.nodes[j]) {
            if let Some(r) = ext.row_of[field.enriched.enriched_id(c, e.function).unwrap()] {
                v += d[r] * e.value;
            }
        }
        assert!((nodal[j] - v).abs() < 1e-12);
    }
    // within a cell the interpolant is the background field wherever the
    // foreground space contains it
    let ones = ext.interpolate(&vec![1.0; ext.n_rows()]).unwrap();
    for j in uncut_nodes(&mesh, &basis, &field) {
        assert!((ones[j] - 1.0).abs() < 1e-12);
    }
    assert!(ext.interpolate(&d[1..]).is_err());
}

#[test]
fn vector_operator_interleaves_components() {
    let (_, _, field) = refined_case(1.25, 1, 1);
    let s = &field.extraction;
    let v = s.vector();
    assert_eq!(v.n_rows(), 2 * s.n_rows());
    assert_eq!(v.matrix.nnz(), 2 * s.matrix.nnz());
    for r in 0..s.n_rows() {
        let (cols, vals) = s.matrix.row(r);
        for (&c, &x) in cols.iter().zip(vals) {
            assert_eq!(v.matrix.get(2 * r, 2 * c), x);
            assert_eq!(v.matrix.get(2 * r + 1, 2 * c + 1), x);
            assert_eq!(v.matrix.get(2 * r, 2 * c + 1), 0.0);
        }
    }
}

fn build_bits(threads: usize) -> (Vec<u64>, Vec<usize>, Vec<usize>) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let (_, _, f) = refined_case(0.625, 2, 2);
        let m = f.extraction.matrix;
        (m.values.iter().map(|v| v.to_bits()).collect(), m.indices, f.extraction.row_ids)
    })
}

#[test]
fn construction_is_independent_of_thread_count() {
    assert_eq!(build_bits(1), build_bits(4));
}

#[test]
fn linear_background_gives_nodal_hats() {
    // p = q = 1 on a uniform background: an uncut rectangle is a background
    // cell and its nodes are the bilinear interpolation points
    let s = eigenstrain_geometry(0.625, 0).unwrap();
    let basis = ForegroundBasis::new(&s.mesh, 1).unwrap();
    let field = Field::build(thb_space(s.background.clone(), 1).unwrap(), &s.mesh, &basis).unwrap();
    let nodes = uncut_nodes(&s.mesh, &basis, &field);
    assert!(!nodes.is_empty());
    for j in nodes {
        let col = column(&field, j);
        assert_eq!(col.len(), 1, "node {j}: {col:?}");
        assert!((col[0].1 - 1.0).abs() < 1e-14);
    }
}

fn space_values(space: &ThbSpace, x: [f64; 2]) -> f64 {
    space.eval(x).unwrap().iter().map(|e| e.1).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn nodes_outside_cut_cells_reproduce_unity(p in 1usize..=2, extra in 0usize..=1) {
        let (mesh, basis, field) = refined_case(1.25, p, p + extra.min(2 - p));
        let ones = field.extraction.interpolate(&vec![1.0; field.dofs()]).unwrap();
        for j in uncut_nodes(&mesh, &basis, &field) {
            prop_assert!((ones[j] - space_values(&field.space, basis.nodes[j])).abs() < 1e-12);
        }
    }
}
