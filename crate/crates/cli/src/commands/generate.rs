use std::io::Write;

use conducta_core::microstructure::{
    generate_checkerboard, generate_laminate, generate_random, write_grid_file, RandomMode,
};

use super::load_phases;
use crate::format::num;
use crate::manifest::{manifest_path, RunManifest};
use crate::{CliError, GenerateArgs, GridKind};

pub(super) fn run(a: GenerateArgs, argv: &[String], stderr: &mut dyn Write) -> Result<(), CliError> {
    let ps = load_phases(&a.config, a.dim)?;
    let shape = vec![a.size; ps.dimension()];
    let g = match a.kind {
        GridKind::Laminate => generate_laminate(&ps, a.axis, &shape)?,
        GridKind::Checkerboard => {
            let p = ps.phases();
            if p.len() != 2 {
                return Err(CliError::Validation(format!(
                    "checkerboard needs exactly 2 phases, config has {}",
                    p.len()
                )));
            }
            generate_checkerboard(p[0].conductivity, p[1].conductivity, &shape)?
        }
        GridKind::Random => {
            let mode = match a.correlation_length {
                Some(correlation_length) => RandomMode::SmoothedNoise { correlation_length },
                None => RandomMode::Iid,
            };
            generate_random(&ps, &shape, a.seed, mode)?
        }
    };
    write_grid_file(&g, &a.out)?;

    let mut m = RunManifest::new("generate", argv);
    m.input(&a.config)
        .output(&a.out)
        .set("kind", format!("{:?}", a.kind).to_lowercase())
        .set("size", a.size)
        .set("dimension", ps.dimension());
    match a.kind {
        GridKind::Laminate => {
            m.set("axis", a.axis);
        }
        GridKind::Random => {
            m.seed = Some(a.seed);
            m.set("correlation_length", a.correlation_length.map_or("iid".into(), num));
        }
        GridKind::Checkerboard => {}
    }
    m.write(&manifest_path(&a.out))?;
    let _ = writeln!(stderr, "wrote {} ({} voxels)", a.out.display(), g.len());
    Ok(())
}
