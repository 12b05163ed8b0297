use papsmix::cube_io::{encode_msc, read_msc, sidecar_path};
use papsmix::load_cube;
use papsmix_core::{Grid, Role, SpectralCube};
use proptest::prelude::*;

fn write_cube(dir: &std::path::Path, name: &str, cube: &SpectralCube) -> std::path::PathBuf {
    let path = dir.join(name);
    let (data, side) = encode_msc(cube);
    std::fs::write(&path, data).unwrap();
    std::fs::write(sidecar_path(&path), side).unwrap();
    path
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn msc_round_trip_is_bit_exact(
        w in 1usize..9,
        h in 1usize..9,
        channels in 1usize..6,
        seed in any::<u64>(),
        role in prop_oneof![Just(Role::Intensity), Just(Role::OpticalDensity), Just(Role::Abundance)],
        labelled in any::<bool>(),
    ) {
        let n = w * h * channels;
        let mut state = seed | 1;
        let data: Vec<f64> = (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let v = f32::from_bits((state as u32) & 0x7f7f_ffff) as f64;
                if role != Role::Intensity && state >> 63 == 1 { -v } else { v }
            })
            .collect();
        let mut cube = SpectralCube::from_planes(Grid::new(w, h), channels, role, data).unwrap();
        if labelled {
            cube = cube
                .with_labels((0..channels).map(|c| format!("band{c}")).collect())
                .unwrap()
                .with_wavelengths((0..channels).map(|c| 440.0 + 20.0 * c as f64 + 0.1).collect())
                .unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = write_cube(dir.path(), "c.msc", &cube);
        let back = read_msc(&path).unwrap();
        prop_assert_eq!(back.data().len(), cube.data().len());
        for (a, b) in back.data().iter().zip(cube.data()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back, cube);
    }
}

#[test]
fn declared_planes_must_match_file() {
    let cube = SpectralCube::from_planes(Grid::new(2, 2), 13, Role::OpticalDensity, vec![0.5; 52]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_cube(dir.path(), "c.msc", &cube);
    let side = sidecar_path(&path);
    let text = std::fs::read_to_string(&side).unwrap().replace("\"channels\": 13", "\"channels\": 14");
    std::fs::write(&side, text).unwrap();
    let err = read_msc(&path).unwrap_err();
    assert!(err.to_string().contains("14 planes"), "{err}");
}

#[test]
fn malformed_sidecar_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.msc");
    std::fs::write(&path, [0u8; 16]).unwrap();
    std::fs::write(sidecar_path(&path), "{\"width\": 2").unwrap();
    let err = read_msc(&path).unwrap_err();
    assert!(err.to_string().contains("malformed header"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn png_dispatch_by_extension() {
    let cube = SpectralCube::from_planes(Grid::new(2, 2), 3, Role::Intensity, vec![1.0; 12]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.PNG");
    std::fs::write(&path, papsmix::raster::encode_rgb(&cube).unwrap()).unwrap();
    let back = load_cube(&path).unwrap();
    assert_eq!(back.role(), Role::Intensity);
    assert_eq!(back.data(), &[1.0; 12]);
}
