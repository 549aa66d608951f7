//! Dielectric cross-sections of slot waveguides and slot-waveguide arrays.
//!
//! All lengths in this module are in nanometres. The lateral array direction
//! is `x`, the vertical direction is `y` and light propagates along `z`.
//!
//! Cross-sections are rasterized onto a uniform grid whose nodes sit at cell
//! centres. Interface cells are smoothed per field component: the permittivity
//! seen by `E_x` is the harmonic mean across interfaces normal to `x` and the
//! arithmetic mean across interfaces normal to `y`, and vice versa for `E_y`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Smallest padding accepted around a structure.
pub const MIN_PADDING_NM: f64 = 400.0;

/// Either a built-in name (`"diamond"`) or `{ name, refractive_index }`.
#[derive(Deserialize)]
#[serde(untagged)]
enum MaterialRepr {
    Name(String),
    #[serde(rename_all = "snake_case")]
    Custom { name: String, refractive_index: f64 },
}

impl TryFrom<MaterialRepr> for Material {
    type Error = String;

    fn try_from(r: MaterialRepr) -> Result<Self, String> {
        match r {
            MaterialRepr::Name(n) => Material::by_name(&n).ok_or_else(|| format!("unknown material `{n}` (built-in: diamond, GaP, air)")),
            MaterialRepr::Custom { name, refractive_index } => Material::new(name, refractive_index).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaterialRepr")]
pub struct Material {
    pub name: String,
    pub refractive_index: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, refractive_index: f64) -> Result<Self, GeometryError> {
        if !(refractive_index >= 1.0) || !refractive_index.is_finite() {
            return Err(GeometryError::InvalidIndex(refractive_index));
        }
        Ok(Self { name: name.into(), refractive_index })
    }

    pub fn diamond() -> Self {
        Self { name: "diamond".into(), refractive_index: 2.4 }
    }

    pub fn gap() -> Self {
        Self { name: "GaP".into(), refractive_index: 3.3 }
    }

    pub fn air() -> Self {
        Self { name: "air".into(), refractive_index: 1.0 }
    }

    /// Looks up one of the built-in materials by name (case-insensitive).
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "diamond" => Some(Self::diamond()),
            "gap" => Some(Self::gap()),
            "air" => Some(Self::air()),
            _ => None,
        }
    }

    pub fn permittivity(&self) -> f64 {
        self.refractive_index * self.refractive_index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrangement {
    /// One rod-slot-rod waveguide.
    Single,
    /// `N` rod-slot-rod waveguides separated by cladding gaps of width `w_G`.
    CladdingSeparated,
    /// `N` slots between `N + 1` rods, adjacent slots sharing a rod.
    SharedRod,
    /// `N` unslotted rods of width `w_R` separated by cladding gaps.
    SolidRod,
}

/// Geometry of a slot waveguide or slot-waveguide array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotArraySpec {
    pub arrangement: Arrangement,
    /// Slot width `w_s` (nm).
    pub slot_width: f64,
    /// Rod width `w_R` (nm).
    pub rod_width: f64,
    /// Rod height `h` (nm).
    pub height: f64,
    /// Number of guides `N`.
    pub guides: usize,
    /// Cladding gap `w_G` between neighbouring guides (nm).
    pub cladding_gap: f64,
    pub rod_material: Material,
    pub cladding_material: Material,
    /// Optional substrate filling the half-space below the rods.
    #[serde(default)]
    pub substrate: Option<Material>,
    /// Free-space wavelength (nm).
    pub wavelength: f64,
}

impl SlotArraySpec {
    /// A single diamond-air slot waveguide at 637 nm.
    pub fn single(slot_width: f64, rod_width: f64, height: f64, rod_material: Material) -> Self {
        Self {
            arrangement: Arrangement::Single,
            slot_width,
            rod_width,
            height,
            guides: 1,
            cladding_gap: 0.0,
            rod_material,
            cladding_material: Material::air(),
            substrate: None,
            wavelength: 637.0,
        }
    }

    pub fn cladding_separated(
        guides: usize,
        slot_width: f64,
        rod_width: f64,
        height: f64,
        cladding_gap: f64,
        rod_material: Material,
    ) -> Self {
        Self {
            arrangement: Arrangement::CladdingSeparated,
            guides,
            cladding_gap,
            ..Self::single(slot_width, rod_width, height, rod_material)
        }
    }

    pub fn shared_rod(guides: usize, slot_width: f64, rod_width: f64, height: f64, rod_material: Material) -> Self {
        Self {
            arrangement: Arrangement::SharedRod,
            guides,
            ..Self::single(slot_width, rod_width, height, rod_material)
        }
    }

    /// The paper-standard diamond-air slot {20, 140, 110} nm.
    pub fn diamond_slot() -> Self {
        Self::single(20.0, 140.0, 110.0, Material::diamond())
    }

    /// Cladding-separated diamond array with centre-to-centre pitch `pitch` (nm).
    pub fn diamond_array(guides: usize, pitch: f64) -> Self {
        let s = Self::diamond_slot();
        let gap = pitch - 2.0 * s.rod_width - s.slot_width;
        Self::cladding_separated(guides, s.slot_width, s.rod_width, s.height, gap, s.rod_material)
    }

    /// Centre-to-centre distance between neighbouring guides (nm).
    pub fn pitch(&self) -> f64 {
        match self.arrangement {
            Arrangement::Single | Arrangement::CladdingSeparated => {
                self.cladding_gap + 2.0 * self.rod_width + self.slot_width
            }
            Arrangement::SharedRod => self.rod_width + self.slot_width,
            Arrangement::SolidRod => self.cladding_gap + self.rod_width,
        }
    }

    /// Width of one rod-slot-rod unit, i.e. the footprint of a single guide.
    pub fn unit_width(&self) -> f64 {
        match self.arrangement {
            Arrangement::SolidRod => self.rod_width,
            _ => 2.0 * self.rod_width + self.slot_width,
        }
    }

    /// Total lateral extent of the high-index structure (nm).
    pub fn footprint_width(&self) -> f64 {
        let n = self.guides as f64;
        match self.arrangement {
            Arrangement::Single => self.unit_width(),
            Arrangement::CladdingSeparated | Arrangement::SolidRod => {
                n * self.unit_width() + (n - 1.0) * self.cladding_gap
            }
            Arrangement::SharedRod => (n + 1.0) * self.rod_width + n * self.slot_width,
        }
    }

    fn has_slot(&self) -> bool {
        self.arrangement != Arrangement::SolidRod
    }

    fn guide_count(&self) -> usize {
        match self.arrangement {
            Arrangement::Single => 1,
            _ => self.guides,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(GeometryError::NonPositive { name, value: v })
            }
        };
        positive("rod_width", self.rod_width)?;
        positive("height", self.height)?;
        positive("wavelength", self.wavelength)?;
        if self.has_slot() {
            positive("slot_width", self.slot_width)?;
        }
        if self.guides == 0 {
            return Err(GeometryError::NoGuides);
        }
        if self.guide_count() > 1 && self.arrangement != Arrangement::SharedRod {
            positive("cladding_gap", self.cladding_gap)?;
        }
        for m in [&self.rod_material, &self.cladding_material] {
            if !(m.refractive_index >= 1.0) {
                return Err(GeometryError::InvalidIndex(m.refractive_index));
            }
        }
        Ok(())
    }

    /// Slot centres along `x` (nm), left to right. Solid rods report rod centres.
    pub fn slot_centers(&self) -> Vec<f64> {
        let n = self.guide_count();
        let d = self.pitch();
        (0..n).map(|j| (j as f64 - (n as f64 - 1.0) / 2.0) * d).collect()
    }

    /// High-index rectangles of the whole structure, centred on the origin.
    pub fn rods(&self) -> Vec<Rect> {
        (0..self.guide_count()).flat_map(|j| self.rods_of_guide(j)).fold(Vec::new(), |mut acc, r| {
            // shared rods are emitted by both neighbours
            if !acc.iter().any(|q: &Rect| (q.x0 - r.x0).abs() < 1e-9 && (q.x1 - r.x1).abs() < 1e-9) {
                acc.push(r);
            }
            acc
        })
    }

    /// Rectangles that form guide `j` in isolation.
    pub fn rods_of_guide(&self, j: usize) -> Vec<Rect> {
        let eps = self.rod_material.permittivity();
        let (y0, y1) = (-self.height / 2.0, self.height / 2.0);
        let c = self.slot_centers()[j];
        let half_slot = self.slot_width / 2.0;
        let rect = |x0: f64, x1: f64| Rect { x0, x1, y0, y1, eps };
        match self.arrangement {
            Arrangement::SolidRod => vec![rect(c - self.rod_width / 2.0, c + self.rod_width / 2.0)],
            _ => vec![
                rect(c - half_slot - self.rod_width, c - half_slot),
                rect(c + half_slot, c + half_slot + self.rod_width),
            ],
        }
    }
}

/// Axis-aligned rectangle of uniform permittivity (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub eps: f64,
}

impl Rect {
    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Uniform rectangular grid of nodes at cell centres (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Physical coordinate of the domain centre.
    pub center: (f64, f64),
}

impl Grid {
    /// Grid of cells covering `[-width/2, width/2] x [-height/2, height/2]`.
    pub fn centered(width: f64, height: f64, dx: f64, dy: f64) -> Self {
        let nx = (width / dx).round().max(3.0) as usize;
        let ny = (height / dy).round().max(3.0) as usize;
        Self { nx, ny, dx, dy, center: (0.0, 0.0) }
    }

    // Node coordinates are computed relative to the centre so that mirror
    // images are exact negatives in floating point.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.center.0 + (i as f64 - (self.nx as f64 - 1.0) / 2.0) * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.center.1 + (j as f64 - (self.ny as f64 - 1.0) / 2.0) * self.dy
    }

    /// Physical coordinate of node `(0, 0)`.
    pub fn origin(&self) -> (f64, f64) {
        (self.x(0), self.y(0))
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x_last, y_last) = (self.x(self.nx - 1), self.y(self.ny - 1));
        let (x_first, y_first) = self.origin();
        let tol = 1e-9 * (self.dx + self.dy);
        x >= x_first - tol && x <= x_last + tol && y >= y_first - tol && y <= y_last + tol
    }

    /// Bilinear interpolation of a node-valued array. `None` outside the grid.
    pub fn interpolate(&self, values: &[f64], x: f64, y: f64) -> Option<f64> {
        if !self.contains(x, y) {
            return None;
        }
        let (x_first, y_first) = self.origin();
        let fx = ((x - x_first) / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((y - y_first) / self.dy).clamp(0.0, (self.ny - 1) as f64);
        let i0 = (fx.floor() as usize).min(self.nx - 2);
        let j0 = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
        let v = |i, j| values[self.idx(i, j)];
        Some(
            (1.0 - tx) * (1.0 - ty) * v(i0, j0)
                + tx * (1.0 - ty) * v(i0 + 1, j0)
                + (1.0 - tx) * ty * v(i0, j0 + 1)
                + tx * ty * v(i0 + 1, j0 + 1),
        )
    }
}

/// Rasterized permittivity of a cross-section.
///
/// `eps` lives on the grid nodes and is the permittivity seen by `E_x`. The
/// staggered arrays `eps_y` and `eps_z` feed the full-vector mode solver: `eps_y`
/// sits between nodes in both directions (`(nx-1) x (ny-1)`), `eps_z` between
/// nodes in `x` only, on the interior rows (`(nx-1) x (ny-2)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMap {
    pub grid: Grid,
    pub eps: Vec<f64>,
    pub eps_y: Vec<f64>,
    pub eps_z: Vec<f64>,
    /// Cladding refractive index.
    pub n_cl: f64,
    /// Largest material index present.
    pub n_max: f64,
    /// Slot (or rod) centres of the guides (nm); amplitudes are sampled there at `y = 0`.
    pub slot_centers: Vec<f64>,
    pub rects: Vec<Rect>,
}

impl IndexMap {
    /// Rasterizes `rects` in a cladding of permittivity `eps_cl` onto `grid`.
    pub fn rasterize(grid: Grid, rects: Vec<Rect>, eps_cl: f64, slot_centers: Vec<f64>) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let (dx, dy) = (grid.dx, grid.dy);
        let mut eps = vec![eps_cl; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                eps[grid.idx(i, j)] = cell_eps(&rects, eps_cl, grid.x(i), grid.y(j), dx, dy, Smoothing::NormalX);
            }
        }
        let mut eps_y = Vec::with_capacity((nx - 1) * (ny - 1));
        for i in 0..nx - 1 {
            for j in 0..ny - 1 {
                let (x, y) = (grid.x(i) + dx / 2.0, grid.y(j) + dy / 2.0);
                eps_y.push(cell_eps(&rects, eps_cl, x, y, dx, dy, Smoothing::NormalY));
            }
        }
        let mut eps_z = Vec::with_capacity((nx - 1) * (ny - 2));
        for i in 0..nx - 1 {
            for j in 1..ny - 1 {
                let (x, y) = (grid.x(i) + dx / 2.0, grid.y(j));
                eps_z.push(cell_eps(&rects, eps_cl, x, y, dx, dy, Smoothing::Tangential));
            }
        }
        let n_max = rects.iter().map(|r| r.eps).fold(eps_cl, f64::max).sqrt();
        Self { grid, eps, eps_y, eps_z, n_cl: eps_cl.sqrt(), n_max, slot_centers, rects }
    }

    #[inline]
    pub fn eps_at(&self, i: usize, j: usize) -> f64 {
        self.eps[self.grid.idx(i, j)]
    }

    pub fn index_at(&self, i: usize, j: usize) -> f64 {
        self.eps_at(i, j).sqrt()
    }

    /// Area (nm^2) of material denser than the cladding, counted per cell by
    /// the fraction `(eps - eps_cl) / (eps_rod - eps_cl)`.
    pub fn high_index_area(&self) -> f64 {
        let eps_cl = self.n_cl * self.n_cl;
        let eps_hi = self.n_max * self.n_max;
        if eps_hi <= eps_cl {
            return 0.0;
        }
        let frac: f64 = self.eps.iter().map(|&e| ((e - eps_cl) / (eps_hi - eps_cl)).clamp(0.0, 1.0)).sum();
        frac * self.grid.cell_area()
    }

    /// Exact area of the rasterized rectangles (nm^2).
    pub fn exact_high_index_area(&self) -> f64 {
        self.rects.iter().map(Rect::area).sum()
    }

    pub fn same_grid(&self, other: &IndexMap) -> bool {
        self.grid == other.grid
    }

    /// CSV dump with header `x_um,y_um,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_um,y_um,n\n");
        for i in 0..self.grid.nx {
            for j in 0..self.grid.ny {
                let _ = writeln!(out, "{},{},{}", self.grid.x(i) * 1e-3, self.grid.y(j) * 1e-3, self.index_at(i, j));
            }
        }
        out
    }
}

#[derive(Clone, Copy)]
enum Smoothing {
    /// Harmonic across x-normal interfaces, arithmetic across y-normal ones.
    NormalX,
    /// Harmonic across y-normal interfaces, arithmetic across x-normal ones.
    NormalY,
    /// Area-weighted arithmetic mean.
    Tangential,
}

/// Average permittivity of the cell of size `dx x dy` centred at `(xc, yc)`.
///
/// Rectangles must not overlap each other.
fn cell_eps(rects: &[Rect], eps_cl: f64, xc: f64, yc: f64, dx: f64, dy: f64, rule: Smoothing) -> f64 {
    let (xa, xb, ya, yb) = (xc - dx / 2.0, xc + dx / 2.0, yc - dy / 2.0, yc + dy / 2.0);
    let touching: Vec<&Rect> = rects
        .iter()
        .filter(|r| overlap(xa, xb, r.x0, r.x1) > 0.0 && overlap(ya, yb, r.y0, r.y1) > 0.0)
        .collect();
    if touching.is_empty() {
        return eps_cl;
    }
    match rule {
        Smoothing::Tangential => {
            eps_cl
                + touching
                    .iter()
                    .map(|r| overlap(xa, xb, r.x0, r.x1) * overlap(ya, yb, r.y0, r.y1) / (dx * dy) * (r.eps - eps_cl))
                    .sum::<f64>()
        }
        Smoothing::NormalX => layered_mean(&touching, eps_cl, (xa, xb), (ya, yb), |r| (r.x0, r.x1), |r| (r.y0, r.y1)),
        Smoothing::NormalY => layered_mean(&touching, eps_cl, (ya, yb), (xa, xb), |r| (r.y0, r.y1), |r| (r.x0, r.x1)),
    }
}

/// Harmonic mean along the `normal` axis of arithmetic means along the
/// `tangent` axis.
fn layered_mean(
    rects: &[&Rect],
    eps_cl: f64,
    normal: (f64, f64),
    tangent: (f64, f64),
    span_n: impl Fn(&Rect) -> (f64, f64),
    span_t: impl Fn(&Rect) -> (f64, f64),
) -> f64 {
    let (a, b) = normal;
    let mut cuts = vec![a, b];
    for r in rects {
        let (lo, hi) = span_n(r);
        cuts.extend([lo, hi].into_iter().filter(|&c| c > a && c < b));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let width_t = tangent.1 - tangent.0;
    let mut inv = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let mut col = eps_cl;
        for r in rects {
            let (lo, hi) = span_n(r);
            if mid > lo && mid < hi {
                let (t0, t1) = span_t(r);
                col += overlap(tangent.0, tangent.1, t0, t1) / width_t * (r.eps - eps_cl);
            }
        }
        inv += (w[1] - w[0]) / col;
    }
    (b - a) / inv
}

/// Grid resolution and padding used to rasterize a cross-section (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_step")]
    pub dx: f64,
    #[serde(default = "default_step")]
    pub dy: f64,
    #[serde(default = "default_padding")]
    pub padding: f64,
}

fn default_step() -> f64 {
    5.0
}

fn default_padding() -> f64 {
    500.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { dx: default_step(), dy: default_step(), padding: default_padding() }
    }
}

impl GridSpec {
    pub fn cross_section(&self, spec: &SlotArraySpec) -> Result<IndexMap, GeometryError> {
        build_cross_section(spec, self.dx, self.dy, self.padding)
    }

    pub fn guide_only(&self, spec: &SlotArraySpec, guide: usize) -> Result<IndexMap, GeometryError> {
        build_guide_only(spec, guide, self.dx, self.dy, self.padding)
    }
}

fn check_grid(dx: f64, dy: f64, padding: f64) -> Result<(), GeometryError> {
    for (name, v) in [("dx", dx), ("dy", dy), ("padding", padding)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(GeometryError::NonPositive { name, value: v });
        }
    }
    if padding < MIN_PADDING_NM {
        return Err(GeometryError::PaddingTooSmall { padding, min: MIN_PADDING_NM });
    }
    Ok(())
}

fn substrate_rect(spec: &SlotArraySpec, grid: &Grid) -> Option<Rect> {
    spec.substrate.as_ref().map(|m| Rect {
        x0: grid.x(0) - grid.dx,
        x1: grid.x(grid.nx - 1) + grid.dx,
        y0: grid.y(0) - grid.dy,
        y1: -spec.height / 2.0,
        eps: m.permittivity(),
    })
}

fn build(spec: &SlotArraySpec, rects: Vec<Rect>, dx: f64, dy: f64, padding: f64) -> Result<IndexMap, GeometryError> {
    spec.validate()?;
    check_grid(dx, dy, padding)?;
    if spec.has_slot() && dx > spec.slot_width / 4.0 + 1e-12 {
        return Err(GeometryError::UnderResolvedSlot { dx, slot_width: spec.slot_width });
    }
    if dy > spec.height / 4.0 + 1e-12 {
        return Err(GeometryError::UnderResolvedHeight { dy, height: spec.height });
    }
    let grid = Grid::centered(spec.footprint_width() + 2.0 * padding, spec.height + 2.0 * padding, dx, dy);
    let mut rects = rects;
    rects.extend(substrate_rect(spec, &grid));
    Ok(IndexMap::rasterize(grid, rects, spec.cladding_material.permittivity(), spec.slot_centers()))
}

/// Rasterizes the full cross-section of `spec`.
pub fn build_cross_section(spec: &SlotArraySpec, dx: f64, dy: f64, padding: f64) -> Result<IndexMap, GeometryError> {
    build(spec, spec.rods(), dx, dy, padding)
}

/// Rasterizes only guide `guide` of `spec`, on the same grid as the full cross-section.
pub fn build_guide_only(
    spec: &SlotArraySpec,
    guide: usize,
    dx: f64,
    dy: f64,
    padding: f64,
) -> Result<IndexMap, GeometryError> {
    if guide >= spec.slot_centers().len() {
        return Err(GeometryError::NoSuchGuide(guide));
    }
    build(spec, spec.rods_of_guide(guide), dx, dy, padding)
}

/// Unetched rectangular rod, the high-index section of a grating.
pub fn build_solid_guide(
    width: f64,
    height: f64,
    material: &Material,
    dx: f64,
    dy: f64,
    padding: f64,
) -> Result<IndexMap, GeometryError> {
    let spec = SlotArraySpec {
        arrangement: Arrangement::SolidRod,
        slot_width: 0.0,
        rod_width: width,
        height,
        guides: 1,
        cladding_gap: 0.0,
        rod_material: material.clone(),
        cladding_material: Material::air(),
        substrate: None,
        wavelength: 637.0,
    };
    build_cross_section(&spec, dx, dy, padding)
}

/// Slab of thickness `thickness` uniform in `x`, used to validate the solver
/// against the analytic slab dispersion relation.
pub fn build_slab(n_core: f64, n_clad: f64, thickness: f64, width: f64, dx: f64, dy: f64, padding: f64) -> IndexMap {
    let grid = Grid::centered(width, thickness + 2.0 * padding, dx, dy);
    let rect = Rect {
        x0: grid.x(0) - grid.dx,
        x1: grid.x(grid.nx - 1) + grid.dx,
        y0: -thickness / 2.0,
        y1: thickness / 2.0,
        eps: n_core * n_core,
    };
    IndexMap::rasterize(grid, vec![rect], n_clad * n_clad, vec![0.0])
}
