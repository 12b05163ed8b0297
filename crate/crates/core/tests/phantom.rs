use papsmix_core::phantom::{
    benchmark_seed, generate, phantom_method_configs, BenchmarkCase, DyeProfiles, NoiseDomain,
    PhantomSpec, Region,
};
use papsmix_core::solver::{total_variation, Method};
use papsmix_core::stain::ms_unmix;
use papsmix_core::Dye;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn h_support_matches_nucleus_mask_up_to_boundary() {
    let t = generate(&PhantomSpec::default().with_seed(4)).unwrap();
    let grid = t.grid();
    let h_support = t.abundance.plane(Dye::H).iter().filter(|v| **v > 0.0).count() as i64;
    let nuclei = t.nucleus_mask().iter().filter(|m| **m).count() as i64;
    let band = (0..grid.len())
        .filter(|i| {
            let (x, y) = ((i % grid.width) as f64, (i / grid.width) as f64);
            t.cells.iter().any(|c| {
                let d = ((x - c.cx).powi(2) + (y - c.cy).powi(2)).sqrt();
                (d - c.nucleus_radius).abs() < 0.5
            })
        })
        .count() as i64;
    assert!(nuclei > 0);
    assert!((h_support - nuclei).abs() <= band, "{h_support} vs {nuclei} (band {band})");
}

#[test]
fn abundance_is_piecewise_smooth() {
    let t = generate(&PhantomSpec::default()).unwrap();
    let grid = t.grid();
    let tv = total_variation(t.abundance.data(), 4, grid);
    let mut shuffled = t.abundance.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dye in Dye::ALL {
        shuffled.plane_mut(dye).shuffle(&mut rng);
    }
    let tv_shuffled = total_variation(shuffled.data(), 4, grid);
    assert!(tv.is_finite() && tv < 0.2 * tv_shuffled, "{tv} vs {tv_shuffled}");
}

#[test]
fn ms_unmix_recovers_noiseless_truth() {
    let t = generate(&PhantomSpec::default().noiseless()).unwrap();
    let est = ms_unmix(&t.ms_od, &t.ms_matrix).unwrap();
    for (a, b) in est.data().iter().zip(t.abundance.data()) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn mask_and_labels_follow_legh_fraction() {
    let spec = PhantomSpec {
        n_cells: 4,
        legh_fraction: 0.25,
        ..PhantomSpec::default()
    };
    let t = generate(&spec).unwrap();
    let legh = t.cells.iter().filter(|c| c.label == papsmix_core::analysis::Label::Legh).count();
    assert_eq!(legh, 1);
    for code in [Region::Background, Region::Nucleus, Region::EcCytoplasm, Region::LeghCytoplasm] {
        assert!(t.labels_mask.contains(&code.code()));
    }
}

#[test]
fn seed_changes_layout() {
    let a = generate(&PhantomSpec::default().with_seed(1)).unwrap();
    let b = generate(&PhantomSpec::default().with_seed(2)).unwrap();
    assert_ne!(a.cells, b.cells);
}

#[test]
fn intensity_domain_noise() {
    let spec = PhantomSpec {
        noise_domain: NoiseDomain::Intensity,
        ..PhantomSpec::default()
    };
    let t = generate(&spec).unwrap();
    assert!(t.rgb_od.data().iter().all(|v| v.is_finite() && *v >= 0.0));
    assert_ne!(t.rgb_od, t.rgb_matrix.render(&t.abundance));
}

#[test]
fn single_dye_phantom_is_recovered() {
    let spec = PhantomSpec {
        dye_profiles: DyeProfiles::single_dye(),
        ..PhantomSpec::default().noiseless()
    };
    let case = BenchmarkCase::new(&spec).unwrap();
    let row = case.score(Method::Proposed, &phantom_method_configs()).unwrap();
    assert!(row.eval.sre_db >= 30.0, "{}", row.eval.sre_db);
}

#[test]
fn benchmark_emits_one_row_per_method() {
    let spec = PhantomSpec {
        width: 32,
        height: 32,
        n_cells: 2,
        cytoplasm_radius_px: [7.0, 8.0],
        ..PhantomSpec::default()
    };
    let rows = benchmark_seed(&spec, &Method::ALL, &phantom_method_configs()).unwrap();
    assert_eq!(rows.len(), Method::ALL.len());
    assert!(rows.iter().all(|r| r.seed == 0));
    assert!(rows[0].iterations.is_none());
}
