//! ASCII STL export for built meshes, for inspection in external viewers.

use std::io::Write;
use std::path::Path;

use super::Geometry;
use crate::error::Result;

pub fn write_ascii_stl(geom: &Geometry, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let name: String = geom
        .label()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    writeln!(out, "solid {name}")?;
    for f in geom.facets() {
        let n = f.normal;
        writeln!(out, "  facet normal {:e} {:e} {:e}", n.x, n.y, n.z)?;
        writeln!(out, "    outer loop")?;
        for v in [f.v0, f.v1, f.v2] {
            writeln!(out, "      vertex {:e} {:e} {:e}", v.x, v.y, v.z)?;
        }
        writeln!(out, "    endloop")?;
        writeln!(out, "  endfacet")?;
    }
    writeln!(out, "endsolid {name}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PolygonPocketSpec, SurfaceAngle};

    #[test]
    fn stl_has_one_facet_block_per_triangle() {
        let spec = PolygonPocketSpec::new(
            3,
            1.0,
            SurfaceAngle::from_degrees(45.0).unwrap(),
            0.0,
        )
        .unwrap();
        let geom = spec.build().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pocket.stl");
        write_ascii_stl(&geom, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let blocks = text.matches("facet normal").count();
        assert_eq!(blocks, geom.facets().len());
        assert!(text.starts_with("solid "));
        assert!(text.trim_end().ends_with(&format!(
            "endsolid {}",
            geom.label()
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect::<String>()
        )));
    }
}
