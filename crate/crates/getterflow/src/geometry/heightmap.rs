//! Height-map pockets: a rectangular grid of surface heights (all at or
//! below the top plane) triangulated into a terrain mesh, laterally closed by
//! vertical walls along a hexagonal outline that tessellates the plane.
//!
//! Grid registration: sample `(row i, col j)` sits at `(j * cell_pitch,
//! i * cell_pitch)`; the hexagonal outline is centered on the grid center
//! with vertices at multiples of 60 degrees starting on the +x axis.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{regular_polygon, Facet, Footprint, Geometry, LateralRule, PolygonPocketSpec};
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Row-major grid of raw heights in mm (non-positive).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Grid> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidParameter(format!(
                "height grid must be at least 2x2, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "height grid data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        for (k, h) in data.iter().enumerate() {
            if !h.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite height at flat index {k}"
                )));
            }
            if *h > 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "height {h} at flat index {k} is above the top plane"
                )));
            }
        }
        Ok(Grid { rows, cols, data })
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    /// Deepest raw height (most negative), as a positive depth.
    pub fn max_depth(&self) -> f64 {
        -self.data.iter().cloned().fold(0.0, f64::min)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeightMap {
    pub grid: Grid,
    /// Lateral spacing of grid samples.
    pub cell_pitch: f64,
    /// Side length of the hexagonal boundary outline.
    pub hexagon_side: f64,
    /// Multiplier applied to raw heights when building the mesh.
    pub depth_scale: f64,
}

/// Sidecar metadata for 16-bit PGM ingestion: pixel value 0 maps to
/// `black_height_mm`, the maximum pixel value to `white_height_mm`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgmSidecar {
    pub cell_pitch: f64,
    pub hexagon_side: f64,
    pub depth_scale: f64,
    pub black_height_mm: f64,
    pub white_height_mm: f64,
}

impl HeightMap {
    pub fn new(grid: Grid, cell_pitch: f64, hexagon_side: f64, depth_scale: f64) -> Result<HeightMap> {
        if !(cell_pitch.is_finite() && cell_pitch > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cell_pitch must be positive, got {cell_pitch}"
            )));
        }
        if !(hexagon_side.is_finite() && hexagon_side > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hexagon_side must be positive, got {hexagon_side}"
            )));
        }
        if !(depth_scale.is_finite() && depth_scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "depth_scale must be positive, got {depth_scale}"
            )));
        }
        let map = HeightMap { grid, cell_pitch, hexagon_side, depth_scale };
        let (w, h) = map.extent();
        let slack = 1e-9 * map.hexagon_side;
        if 2.0 * map.hexagon_side > w + slack
            || 3.0f64.sqrt() * map.hexagon_side > h + slack
        {
            return Err(Error::InvalidParameter(format!(
                "hexagon outline (side {}) does not fit the grid extent {w} x {h}",
                map.hexagon_side
            )));
        }
        Ok(map)
    }

    /// Lateral extent covered by the grid.
    fn extent(&self) -> (f64, f64) {
        (
            (self.grid.cols - 1) as f64 * self.cell_pitch,
            (self.grid.rows - 1) as f64 * self.cell_pitch,
        )
    }

    fn center(&self) -> [f64; 2] {
        let (w, h) = self.extent();
        [w / 2.0, h / 2.0]
    }

    /// Hexagonal mouth outline in grid coordinates.
    pub fn outline(&self) -> Vec<[f64; 2]> {
        let c = self.center();
        regular_polygon(6, self.hexagon_side)
            .into_iter()
            .map(|[x, y]| [x + c[0], y + c[1]])
            .collect()
    }

    /// Total pocket depth after scaling.
    pub fn total_depth(&self) -> f64 {
        self.grid.max_depth() * self.depth_scale
    }

    /// Copy with `depth_scale` adjusted so that hexagon_side / total_depth
    /// equals `side_to_depth`. A flat map is returned unchanged (its depth is
    /// zero at any scale).
    pub fn stretched(&self, side_to_depth: f64) -> Result<HeightMap> {
        if !(side_to_depth.is_finite() && side_to_depth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "side_to_depth must be positive, got {side_to_depth}"
            )));
        }
        let raw = self.grid.max_depth();
        if raw == 0.0 {
            return Ok(self.clone());
        }
        let scale = self.hexagon_side / (side_to_depth * raw);
        HeightMap::new(self.grid.clone(), self.cell_pitch, self.hexagon_side, scale)
    }

    pub fn label(&self) -> String {
        format!(
            "heightmap {}x{} pitch={} hex_side={} depth_scale={}",
            self.grid.rows, self.grid.cols, self.cell_pitch, self.hexagon_side, self.depth_scale
        )
    }

    /// Triangulates the grid (two triangles per square, shared diagonal),
    /// scales heights, and closes the hexagonal boundary with vertical walls
    /// from the top plane down to the deepest point.
    pub fn build(&self) -> Result<Geometry> {
        let up = Vec3::new(0.0, 0.0, 1.0);
        let p = self.cell_pitch;
        let s = self.depth_scale;
        let mut facets: Vec<Facet> = Vec::new();
        for i in 0..self.grid.rows - 1 {
            for j in 0..self.grid.cols - 1 {
                let p00 = Vec3::new(j as f64 * p, i as f64 * p, self.grid.at(i, j) * s);
                let p10 =
                    Vec3::new((j + 1) as f64 * p, i as f64 * p, self.grid.at(i, j + 1) * s);
                let p11 = Vec3::new(
                    (j + 1) as f64 * p,
                    (i + 1) as f64 * p,
                    self.grid.at(i + 1, j + 1) * s,
                );
                let p01 =
                    Vec3::new(j as f64 * p, (i + 1) as f64 * p, self.grid.at(i + 1, j) * s);
                if let Some(f) = Facet::new(p00, p10, p11, up) {
                    facets.push(f);
                }
                if let Some(f) = Facet::new(p00, p11, p01, up) {
                    facets.push(f);
                }
            }
        }

        let outline = self.outline();
        let floor = -self.total_depth();
        if floor < 0.0 {
            // Curtain walls along the outline, top plane down to the floor.
            // Wall parts buried under the terrain are unreachable; the
            // curtain guarantees the mouth column is sealed sideways.
            let c = self.center();
            for i in 0..outline.len() {
                let [x0, y0] = outline[i];
                let [x1, y1] = outline[(i + 1) % outline.len()];
                let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
                let segments = (len / p).ceil().max(1.0) as usize;
                for k in 0..segments {
                    let f0 = k as f64 / segments as f64;
                    let f1 = (k + 1) as f64 / segments as f64;
                    let ax = x0 + (x1 - x0) * f0;
                    let ay = y0 + (y1 - y0) * f0;
                    let bx = x0 + (x1 - x0) * f1;
                    let by = y0 + (y1 - y0) * f1;
                    let mid_in = Vec3::new(
                        c[0] - (ax + bx) / 2.0,
                        c[1] - (ay + by) / 2.0,
                        0.0,
                    );
                    let a_top = Vec3::new(ax, ay, 0.0);
                    let b_top = Vec3::new(bx, by, 0.0);
                    let a_bot = Vec3::new(ax, ay, floor);
                    let b_bot = Vec3::new(bx, by, floor);
                    if let Some(f) = Facet::new(a_top, b_top, b_bot, mid_in) {
                        facets.push(f);
                    }
                    if let Some(f) = Facet::new(a_top, b_bot, a_bot, mid_in) {
                        facets.push(f);
                    }
                }
            }
        }

        Geometry::assemble(
            self.label(),
            facets,
            Footprint::Polygon(outline),
            LateralRule::ClosedWalls,
        )
    }

    /// Loads a CSV grid of heights in mm (one row per line, comma-separated).
    pub fn from_csv_grid(
        path: &Path,
        cell_pitch: f64,
        hexagon_side: f64,
        depth_scale: f64,
    ) -> Result<HeightMap> {
        let text = std::fs::read_to_string(path)?;
        let name = path.display().to_string();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for field in line.split(',') {
                let field = field.trim();
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    path: name.clone(),
                    line: lineno + 1,
                    message: format!("bad height value {field:?}"),
                })?;
                row.push(v);
            }
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::Parse {
                        path: name.clone(),
                        line: lineno + 1,
                        message: format!(
                            "row has {} columns, expected {}",
                            row.len(),
                            first.len()
                        ),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                path: name,
                line: 0,
                message: "empty height grid".into(),
            });
        }
        let cols = rows[0].len();
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        let grid = Grid::new(data.len() / cols, cols, data)?;
        HeightMap::new(grid, cell_pitch, hexagon_side, depth_scale)
    }

    /// Loads a 16-bit binary PGM (P5) plus its JSON sidecar.
    pub fn from_pgm(pgm_path: &Path, sidecar_path: &Path) -> Result<HeightMap> {
        let sidecar: PgmSidecar =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
        let mut raw = Vec::new();
        std::fs::File::open(pgm_path)?.read_to_end(&mut raw)?;
        let name = pgm_path.display().to_string();
        let parse_err = |message: String| Error::Parse { path: name.clone(), line: 0, message };

        let mut pos = 0usize;
        let mut token = |raw: &[u8]| -> Result<String> {
            // Skip whitespace and '#' comments between header tokens.
            loop {
                while pos < raw.len() && raw[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < raw.len() && raw[pos] == b'#' {
                    while pos < raw.len() && raw[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    break;
                }
            }
            let start = pos;
            while pos < raw.len() && !raw[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(parse_err("truncated PGM header".into()));
            }
            Ok(String::from_utf8_lossy(&raw[start..pos]).into_owned())
        };

        if token(&raw)? != "P5" {
            return Err(parse_err("not a binary PGM (P5) file".into()));
        }
        let cols: usize =
            token(&raw)?.parse().map_err(|_| parse_err("bad width".into()))?;
        let rows: usize =
            token(&raw)?.parse().map_err(|_| parse_err("bad height".into()))?;
        let maxval: u32 =
            token(&raw)?.parse().map_err(|_| parse_err("bad maxval".into()))?;
        if maxval == 0 || maxval > 65535 {
            return Err(parse_err(format!("unsupported maxval {maxval}")));
        }
        pos += 1; // single whitespace byte after maxval
        let two_byte = maxval > 255;
        let need = rows * cols * if two_byte { 2 } else { 1 };
        if raw.len() < pos + need {
            return Err(parse_err(format!(
                "pixel data truncated: need {need} bytes, have {}",
                raw.len().saturating_sub(pos)
            )));
        }
        let span = sidecar.white_height_mm - sidecar.black_height_mm;
        let mut data = Vec::with_capacity(rows * cols);
        for k in 0..rows * cols {
            let v = if two_byte {
                // Big-endian sample order per the PGM specification.
                u32::from(raw[pos + 2 * k]) << 8 | u32::from(raw[pos + 2 * k + 1])
            } else {
                u32::from(raw[pos + k])
            };
            data.push(sidecar.black_height_mm + span * v as f64 / maxval as f64);
        }
        let grid = Grid::new(rows, cols, data)?;
        HeightMap::new(grid, sidecar.cell_pitch, sidecar.hexagon_side, sidecar.depth_scale)
    }
}

/// Samples the analytic depth function of a hexagonal pocket onto a height
/// grid. Independent of the pocket mesh builder: heights come from signed
/// distances to the mouth outline, so the two geometry routes can be checked
/// against each other.
pub fn rasterize_polygon_pocket(spec: &PolygonPocketSpec, cell_pitch: f64) -> Result<HeightMap> {
    spec.validate()?;
    if spec.sides != 6 {
        return Err(Error::InvalidParameter(
            "height-map rasterization requires a hexagonal (6-sided) pocket".into(),
        ));
    }
    if !(cell_pitch.is_finite() && cell_pitch > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cell_pitch must be positive, got {cell_pitch}"
        )));
    }
    let s = spec.side_length;
    let cols = (2.0 * s / cell_pitch).ceil() as usize + 1;
    let rows = (3.0f64.sqrt() * s / cell_pitch).ceil() as usize + 1;
    let cx = (cols - 1) as f64 * cell_pitch / 2.0;
    let cy = (rows - 1) as f64 * cell_pitch / 2.0;
    let outline = regular_polygon(6, s);
    let depth = spec.realized_depth();
    let tan_theta = spec.theta.radians().tan();

    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let x = j as f64 * cell_pitch - cx;
            let y = i as f64 * cell_pitch - cy;
            // Signed inward distance to the hexagon: min over edge lines.
            let mut d_in = f64::INFINITY;
            for k in 0..outline.len() {
                let [x0, y0] = outline[k];
                let [x1, y1] = outline[(k + 1) % outline.len()];
                let ex = x1 - x0;
                let ey = y1 - y0;
                let len = (ex * ex + ey * ey).sqrt();
                // Outline is counter-clockwise, so the inward side is the
                // left of each edge.
                let d = (ex * (y - y0) - ey * (x - x0)) / len;
                d_in = d_in.min(d);
            }
            let z = if d_in <= 0.0 || spec.theta.is_flat() {
                0.0
            } else {
                (-d_in / tan_theta).max(-depth)
            };
            data.push(z.min(0.0));
        }
    }
    let grid = Grid::new(rows, cols, data)?;
    HeightMap::new(grid, cell_pitch, s, 1.0)
}
