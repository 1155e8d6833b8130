//! Deterministic software rasterizer for arrow-marked prisms on a ground plane.
//!
//! One fixed perspective camera, one directional light, hard planar shadows
//! and a z-buffer. All arithmetic goes through `libm`, so identical scenes give
//! identical bytes on every platform.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ObjectId;
use crate::scene::{SceneGraph, SceneObject};

pub const IMAGE_WIDTH: u32 = 480;
pub const IMAGE_HEIGHT: u32 = 320;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
    #[error("invalid style: {0}")]
    InvalidStyle(&'static str),
    #[error("point lies behind the camera")]
    BehindCamera,
    #[error("object {0} projects entirely outside the frame")]
    OutOfFrame(ObjectId),
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.length())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraSpec {
    pub eye: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    /// Vertical field of view in degrees.
    pub vfov_deg: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self {
            eye: [0.0, -7.0, 6.0],
            look_at: [0.0, 0.0, 0.0],
            up: [0.0, 0.0, 1.0],
            vfov_deg: 35.0,
            width: IMAGE_WIDTH,
            height: IMAGE_HEIGHT,
        }
    }
}

impl CameraSpec {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width != IMAGE_WIDTH || self.height != IMAGE_HEIGHT {
            return Err(RenderError::InvalidCamera("image size must be 480x320"));
        }
        if !(self.vfov_deg > 10.0 && self.vfov_deg < 120.0) {
            return Err(RenderError::InvalidCamera("vertical fov must lie in (10, 120) degrees"));
        }
        let all = self.eye.iter().chain(&self.look_at).chain(&self.up);
        if !all.clone().all(|v| v.is_finite()) {
            return Err(RenderError::InvalidCamera("non-finite vector"));
        }
        let forward = Vec3::from_array(self.look_at) - Vec3::from_array(self.eye);
        if forward.length() == 0.0 {
            return Err(RenderError::InvalidCamera("eye coincides with look-at"));
        }
        if forward.cross(Vec3::from_array(self.up)).length() <= 1e-12 * forward.length() {
            return Err(RenderError::InvalidCamera("up vector parallel to view direction"));
        }
        Ok(())
    }
}

/// Camera basis, precomputed from a validated [`CameraSpec`].
#[derive(Clone, Copy, Debug)]
struct View {
    eye: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    tan_half: f64,
    aspect: f64,
    width: f64,
    height: f64,
}

const NEAR: f64 = 1e-6;

impl View {
    fn new(cam: &CameraSpec) -> Result<Self, RenderError> {
        cam.validate()?;
        let eye = Vec3::from_array(cam.eye);
        let forward = (Vec3::from_array(cam.look_at) - eye).normalized();
        let right = forward.cross(Vec3::from_array(cam.up)).normalized();
        let up = right.cross(forward);
        Ok(Self {
            eye,
            forward,
            right,
            up,
            tan_half: libm::tan(cam.vfov_deg.to_radians() / 2.0),
            aspect: cam.width as f64 / cam.height as f64,
            width: cam.width as f64,
            height: cam.height as f64,
        })
    }

    fn project(&self, p: Vec3) -> Result<Projected, RenderError> {
        let d = p - self.eye;
        let depth = d.dot(self.forward);
        if !(depth > NEAR) {
            return Err(RenderError::BehindCamera);
        }
        let xn = d.dot(self.right) / (depth * self.tan_half * self.aspect);
        let yn = d.dot(self.up) / (depth * self.tan_half);
        Ok(Projected {
            x: (xn + 1.0) * 0.5 * self.width,
            y: (1.0 - yn) * 0.5 * self.height,
            depth,
        })
    }

    /// Unnormalized direction of the ray through screen point `(sx, sy)`.
    fn ray(&self, sx: f64, sy: f64) -> Vec3 {
        let xn = sx / self.width * 2.0 - 1.0;
        let yn = 1.0 - sy / self.height * 2.0;
        self.forward + self.right * (xn * self.tan_half * self.aspect) + self.up * (yn * self.tan_half)
    }

    /// Intersection of the pixel ray with the horizontal plane at `z`.
    fn hit_plane(&self, sx: f64, sy: f64, z: f64) -> Option<Vec3> {
        let dir = self.ray(sx, sy);
        if dir.z == 0.0 {
            return None;
        }
        let t = (z - self.eye.z) / dir.z;
        (t > 0.0).then(|| self.eye + dir * t)
    }
}

/// Screen position (pixels, origin top-left, continuous) and view depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projected {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

pub fn project_point(camera: &CameraSpec, world: [f64; 3]) -> Result<Projected, RenderError> {
    View::new(camera)?.project(Vec3::from_array(world))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleConfig {
    pub facets: u32,
    pub prism_height: f64,
    pub body_rgb: [u8; 3],
    /// Lit, unshadowed ground color.
    pub ground_rgb: [u8; 3],
    /// Direction the light travels in; must point downward.
    pub light_dir: [f64; 3],
    pub ambient: f64,
    pub diffuse: f64,
    pub shadow_factor: f64,
    /// Arrow shaft width as a fraction of the object radius.
    pub shaft_width: f64,
}

impl Default for StyleConfig {
    fn default() -> Self {
        Self {
            facets: 24,
            prism_height: 0.6,
            body_rgb: [128, 128, 128],
            ground_rgb: [184, 184, 184],
            light_dir: [1.0, -0.3, -1.2],
            ambient: 0.45,
            diffuse: 0.6,
            shadow_factor: 0.55,
            shaft_width: 0.3,
        }
    }
}

impl StyleConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.facets < 3 {
            return Err(RenderError::InvalidStyle("prisms need at least 3 facets"));
        }
        if !(self.prism_height > 0.0 && self.prism_height.is_finite()) {
            return Err(RenderError::InvalidStyle("prism height must be positive"));
        }
        if !(self.light_dir[2] < 0.0) || !self.light_dir.iter().all(|v| v.is_finite()) {
            return Err(RenderError::InvalidStyle("light must travel downward"));
        }
        if !(0.0..=1.0).contains(&self.shadow_factor) {
            return Err(RenderError::InvalidStyle("shadow factor must lie in [0, 1]"));
        }
        if !(self.shaft_width > 0.0 && self.shaft_width < 0.9) {
            return Err(RenderError::InvalidStyle("shaft width must lie in (0, 0.9)"));
        }
        if !(self.ambient >= 0.0 && self.diffuse >= 0.0) {
            return Err(RenderError::InvalidStyle("negative lighting coefficient"));
        }
        Ok(())
    }

    pub fn shadow_rgb(&self) -> [u8; 3] {
        self.ground_rgb.map(|c| to_u8(c as f64 * self.shadow_factor))
    }

    fn light_toward(&self) -> Vec3 {
        (Vec3::from_array(self.light_dir) * -1.0).normalized()
    }
}

/// Row-major RGB8 pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderedImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl RenderedImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Option<Self> {
        (pixels.len() == width as usize * height as usize * 3).then_some(Self { width, height, pixels })
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// What ended up visible at a pixel. Object indices refer to
/// `SceneGraph::objects`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Surface {
    Ground,
    /// Ground in shadow; bit `i` set when object `i` casts onto this point.
    Shadow(u32),
    Side(u16),
    Top(u16),
    Arrow(u16),
}

#[derive(Clone, Debug)]
pub struct SurfaceMap {
    pub width: u32,
    pub height: u32,
    pub surfaces: Vec<Surface>,
}

impl SurfaceMap {
    pub fn at(&self, x: u32, y: u32) -> Surface {
        self.surfaces[y as usize * self.width as usize + x as usize]
    }
}

fn to_u8(v: f64) -> u8 {
    let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 255.0) };
    libm::round(c) as u8
}

/// Arrow decal in the object's local frame, in units of its radius:
/// `(forward, left)` vertices of the shaft rectangle and the head triangle.
fn arrow_polygons(shaft_width: f64) -> ([(f64, f64); 4], [(f64, f64); 3]) {
    let hw = shaft_width / 2.0;
    let shaft = [(-0.6, -hw), (0.1, -hw), (0.1, hw), (-0.6, hw)];
    let head = [(0.1, -0.45), (0.8, 0.0), (0.1, 0.45)];
    (shaft, head)
}

/// Point-in-convex-polygon for counterclockwise vertices, boundary inclusive.
fn inside_convex(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0
    })
}

/// Andrew's monotone chain; returns the hull counterclockwise.
pub fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Prism vertex rings at `z = 0` and `z = height`.
pub fn prism_rings(obj: &SceneObject, style: &StyleConfig) -> (Vec<Vec3>, Vec<Vec3>) {
    let k = style.facets as usize;
    let (cx, cy, h0) = (obj.pose.x(), obj.pose.y(), obj.pose.heading());
    let mut base = Vec::with_capacity(k);
    let mut top = Vec::with_capacity(k);
    for i in 0..k {
        let a = h0 + core::f64::consts::TAU * i as f64 / k as f64;
        let (s, c) = (libm::sin(a), libm::cos(a));
        let (x, y) = (cx + obj.radius * c, cy + obj.radius * s);
        base.push(Vec3::new(x, y, 0.0));
        top.push(Vec3::new(x, y, style.prism_height));
    }
    (base, top)
}

/// Ground-plane shadow outline of one prism, counterclockwise.
pub fn shadow_polygon(obj: &SceneObject, style: &StyleConfig) -> Vec<(f64, f64)> {
    let (base, top) = prism_rings(obj, style);
    let l = Vec3::from_array(style.light_dir);
    let mut pts: Vec<(f64, f64)> = base.iter().map(|v| (v.x, v.y)).collect();
    for v in &top {
        let t = -v.z / l.z;
        pts.push((v.x + t * l.x, v.y + t * l.y));
    }
    convex_hull(pts)
}

struct ShadowCaster {
    poly: Vec<(f64, f64)>,
    min: (f64, f64),
    max: (f64, f64),
}

impl ShadowCaster {
    fn new(poly: Vec<(f64, f64)>) -> Self {
        let mut min = (f64::INFINITY, f64::INFINITY);
        let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &poly {
            min = (min.0.min(x), min.1.min(y));
            max = (max.0.max(x), max.1.max(y));
        }
        Self { poly, min, max }
    }

    fn covers(&self, p: (f64, f64)) -> bool {
        p.0 >= self.min.0 && p.0 <= self.max.0 && p.1 >= self.min.1 && p.1 <= self.max.1 && inside_convex(&self.poly, p)
    }
}

#[derive(Clone, Copy)]
enum Face {
    Side { object: u16, normal: Vec3 },
    Top { object: u16 },
}

struct Raster {
    width: usize,
    height: usize,
    /// Reciprocal depth; larger is closer. Zero means empty.
    inv_depth: Vec<f64>,
    face: Vec<Option<Face>>,
}

impl Raster {
    fn triangle(&mut self, v: [Projected; 3], face: Face) {
        let area = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[1].y - v[0].y) * (v[2].x - v[0].x);
        if area == 0.0 || !area.is_finite() {
            return;
        }
        let min_x = v.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = v.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let min_y = v.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = v.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        if max_x < 0.0 || max_y < 0.0 || min_x >= self.width as f64 || min_y >= self.height as f64 {
            return;
        }
        let x0 = libm::floor(min_x).max(0.0) as usize;
        let y0 = libm::floor(min_y).max(0.0) as usize;
        let x1 = (libm::ceil(max_x) as usize).min(self.width - 1);
        let y1 = (libm::ceil(max_y) as usize).min(self.height - 1);
        let inv_area = 1.0 / area;
        let inv_z = [1.0 / v[0].depth, 1.0 / v[1].depth, 1.0 / v[2].depth];
        let edge = |a: Projected, b: Projected, px: f64, py: f64| (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
        for py in y0..=y1 {
            let sy = py as f64 + 0.5;
            for px in x0..=x1 {
                let sx = px as f64 + 0.5;
                let w0 = edge(v[1], v[2], sx, sy) * inv_area;
                let w1 = edge(v[2], v[0], sx, sy) * inv_area;
                let w2 = edge(v[0], v[1], sx, sy) * inv_area;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let iz = w0 * inv_z[0] + w1 * inv_z[1] + w2 * inv_z[2];
                let idx = py * self.width + px;
                if iz > self.inv_depth[idx] {
                    self.inv_depth[idx] = iz;
                    self.face[idx] = Some(face);
                }
            }
        }
    }
}

/// Renders `graph` and returns the image together with per-pixel surface labels.
pub fn render_layers(
    graph: &SceneGraph,
    camera: &CameraSpec,
    style: &StyleConfig,
) -> Result<(RenderedImage, SurfaceMap), RenderError> {
    style.validate()?;
    let view = View::new(camera)?;
    let (w, h) = (camera.width as usize, camera.height as usize);
    if graph.objects.len() > 32 {
        return Err(RenderError::InvalidStyle("at most 32 objects per scene"));
    }

    let mut raster = Raster {
        width: w,
        height: h,
        inv_depth: vec![0.0; w * h],
        face: vec![None; w * h],
    };

    for (i, obj) in graph.objects.iter().enumerate() {
        let (base, top) = prism_rings(obj, style);
        let pb = base.iter().map(|&v| view.project(v)).collect::<Result<Vec<_>, _>>()?;
        let pt = top.iter().map(|&v| view.project(v)).collect::<Result<Vec<_>, _>>()?;
        let visible = pb.iter().chain(&pt).any(|p| p.x >= 0.0 && p.x < w as f64 && p.y >= 0.0 && p.y < h as f64);
        if !visible {
            return Err(RenderError::OutOfFrame(obj.id));
        }
        let object = i as u16;
        let k = base.len();
        for j in 0..k {
            let n = (j + 1) % k;
            let mid = (base[j] + base[n]) * 0.5;
            let normal = Vec3::new(mid.x - obj.pose.x(), mid.y - obj.pose.y(), 0.0).normalized();
            let face = Face::Side { object, normal };
            raster.triangle([pb[j], pb[n], pt[n]], face);
            raster.triangle([pb[j], pt[n], pt[j]], face);
        }
        for j in 1..k - 1 {
            raster.triangle([pt[0], pt[j], pt[j + 1]], Face::Top { object });
        }
    }

    let casters: Vec<ShadowCaster> = graph
        .objects
        .iter()
        .map(|o| ShadowCaster::new(shadow_polygon(o, style)))
        .collect();
    let (shaft, head) = arrow_polygons(style.shaft_width);
    let light = style.light_toward();
    let shade = |n: Vec3| -> [u8; 3] {
        let k = style.ambient + style.diffuse * n.dot(light).max(0.0);
        style.body_rgb.map(|c| to_u8(c as f64 * k))
    };
    let top_rgb = shade(Vec3::new(0.0, 0.0, 1.0));
    let shadow_rgb = style.shadow_rgb();

    let mut pixels = vec![0u8; w * h * 3];
    let mut surfaces = vec![Surface::Ground; w * h];
    for py in 0..h {
        let sy = py as f64 + 0.5;
        for px in 0..w {
            let sx = px as f64 + 0.5;
            let idx = py * w + px;
            let (rgb, surface) = match raster.face[idx] {
                None => match view.hit_plane(sx, sy, 0.0) {
                    Some(g) => {
                        let mask = casters
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| c.covers((g.x, g.y)))
                            .fold(0u32, |m, (i, _)| m | (1 << i));
                        if mask == 0 {
                            (style.ground_rgb, Surface::Ground)
                        } else {
                            (shadow_rgb, Surface::Shadow(mask))
                        }
                    }
                    None => (style.ground_rgb, Surface::Ground),
                },
                Some(Face::Side { object, normal }) => (shade(normal), Surface::Side(object)),
                Some(Face::Top { object }) => {
                    let obj = &graph.objects[object as usize];
                    let on_arrow = view.hit_plane(sx, sy, style.prism_height).is_some_and(|p| {
                        let (s, c) = (libm::sin(obj.pose.heading()), libm::cos(obj.pose.heading()));
                        let (dx, dy) = ((p.x - obj.pose.x()) / obj.radius, (p.y - obj.pose.y()) / obj.radius);
                        let local = (c * dx + s * dy, -s * dx + c * dy);
                        inside_convex(&shaft, local) || inside_convex(&head, local)
                    });
                    if on_arrow {
                        (obj.color.rgb(), Surface::Arrow(object))
                    } else {
                        (top_rgb, Surface::Top(object))
                    }
                }
            };
            pixels[idx * 3..idx * 3 + 3].copy_from_slice(&rgb);
            surfaces[idx] = surface;
        }
    }

    Ok((
        RenderedImage {
            width: camera.width,
            height: camera.height,
            pixels,
        },
        SurfaceMap {
            width: camera.width,
            height: camera.height,
            surfaces,
        },
    ))
}

pub fn render_scene(graph: &SceneGraph, camera: &CameraSpec, style: &StyleConfig) -> Result<RenderedImage, RenderError> {
    render_layers(graph, camera, style).map(|(img, _)| img)
}
