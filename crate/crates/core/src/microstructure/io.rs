//! Binary grid file, all integers and floats little-endian:
//!
//! | bytes        | content                              |
//! |--------------|--------------------------------------|
//! | 4            | magic `b"CNDA"`                      |
//! | 2            | version `u16` (= 1)                  |
//! | 1            | dimension `u8` (2 or 3)              |
//! | 1            | phase count K `u8`                   |
//! | 4 · dim      | shape, `u32` per axis                |
//! | 8 · K        | conductivities, `f64` per phase      |
//! | Π shape      | phase index `u8` per voxel, row-major |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GridError, VoxelGrid};

pub const GRID_MAGIC: [u8; 4] = *b"CNDA";
pub const GRID_VERSION: u16 = 1;

pub fn write_grid<W: Write>(g: &VoxelGrid, mut w: W) -> Result<(), GridError> {
    w.write_all(&GRID_MAGIC)?;
    w.write_all(&GRID_VERSION.to_le_bytes())?;
    w.write_all(&[g.dimension() as u8, g.conductivities().len() as u8])?;
    for &len in g.shape() {
        w.write_all(&(len as u32).to_le_bytes())?;
    }
    for &s in g.conductivities() {
        w.write_all(&s.to_le_bytes())?;
    }
    w.write_all(g.phase_index())?;
    w.flush()?;
    Ok(())
}

pub fn read_grid<R: Read>(mut r: R) -> Result<VoxelGrid, GridError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != GRID_MAGIC {
        return Err(GridError::Magic(magic));
    }
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let version = u16::from_le_bytes(b2);
    if version != GRID_VERSION {
        return Err(GridError::Version(version));
    }
    r.read_exact(&mut b2)?;
    let (dimension, k) = (b2[0] as usize, b2[1] as usize);
    if !(2..=3).contains(&dimension) {
        return Err(GridError::Dimension(dimension));
    }
    let mut shape = Vec::with_capacity(dimension);
    let mut b4 = [0u8; 4];
    for _ in 0..dimension {
        r.read_exact(&mut b4)?;
        shape.push(u32::from_le_bytes(b4) as usize);
    }
    let mut conductivities = Vec::with_capacity(k);
    let mut b8 = [0u8; 8];
    for _ in 0..k {
        r.read_exact(&mut b8)?;
        conductivities.push(f64::from_le_bytes(b8));
    }
    for (axis, &len) in shape.iter().enumerate() {
        if len < 2 || !len.is_power_of_two() || len > 1 << 16 {
            return Err(GridError::Shape { axis, len });
        }
    }
    let total: usize = shape.iter().product();
    let mut index = vec![0u8; total];
    r.read_exact(&mut index)?;
    VoxelGrid::new(shape, index, conductivities)
}

pub fn write_grid_file(g: &VoxelGrid, path: &Path) -> Result<(), GridError> {
    write_grid(g, BufWriter::new(File::create(path)?))
}

pub fn read_grid_file(path: &Path) -> Result<VoxelGrid, GridError> {
    read_grid(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microstructure::{generate_random, RandomMode};
    use crate::phases::PhaseSet;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_exact() {
        let g = VoxelGrid::new(vec![2, 4], vec![0, 1, 1, 0, 0, 0, 1, 1], vec![1.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_grid(&g, &mut buf).unwrap();
        let mut expect = b"CNDA".to_vec();
        expect.extend([1, 0, 2, 2]);
        expect.extend([2, 0, 0, 0, 4, 0, 0, 0]);
        expect.extend(1.0f64.to_le_bytes());
        expect.extend(4.0f64.to_le_bytes());
        expect.extend([0, 1, 1, 0, 0, 0, 1, 1]);
        assert_eq!(buf, expect);
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let g = VoxelGrid::uniform(vec![2, 2], 1.0).unwrap();
        let mut buf = Vec::new();
        write_grid(&g, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_grid(&bad[..]), Err(GridError::Magic(_))));
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(read_grid(&bad[..]), Err(GridError::Version(9))));
        assert!(matches!(read_grid(&buf[..buf.len() - 1]), Err(GridError::Io(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), three_d in any::<bool>(), log2 in 1u32..5) {
            let m = 1usize << log2;
            let shape = if three_d { vec![m, 2, m] } else { vec![m, 2 * m] };
            let ps = PhaseSet::from_pairs(shape.len(), &[0.3, 1.7, 9.1], &[0.25, 0.5, 0.25]).unwrap();
            let g = generate_random(&ps, &shape, seed, RandomMode::Iid).unwrap();
            let mut buf = Vec::new();
            write_grid(&g, &mut buf).unwrap();
            let back = read_grid(&buf[..]).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
