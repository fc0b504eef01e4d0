//! Deterministic synthetic scenes and the forward (generative) versions of
//! the three correction models. These are the ground truth the fitters are
//! tested against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::debloom::bloom_feature;
use crate::error::{Error, Result};
use crate::raster::{Grid, PixelCoord, Window, WindowOffsets};
use crate::scalar::Scalar;

const MODULE: &str = "synth";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub row: usize,
    pub col: usize,
    pub intensity: f64,
}

/// Background-filled scene with point sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub ncols: usize,
    pub nrows: usize,
    #[serde(default)]
    pub sources: Vec<Source>,
    #[serde(default)]
    pub background: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Forward blooming applied on top of a generated scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BloomSpec {
    pub a: f64,
    pub b: f64,
    pub radius: usize,
    /// Standard deviation of Gaussian noise on bloomed cells; 0 disables it.
    #[serde(default)]
    pub noise_sigma: f64,
}

/// Scene document accepted by `synth --spec` and the pipeline's `synth` section.
/// On disk the scene fields and `bloom` share one flat object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FlatDocument", into = "FlatDocument")]
pub struct SynthDocument {
    pub scene: SceneSpec,
    pub bloom: Option<BloomSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatDocument {
    ncols: usize,
    nrows: usize,
    #[serde(default)]
    sources: Vec<Source>,
    #[serde(default)]
    background: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bloom: Option<BloomSpec>,
}

impl From<FlatDocument> for SynthDocument {
    fn from(f: FlatDocument) -> Self {
        Self {
            scene: SceneSpec {
                ncols: f.ncols,
                nrows: f.nrows,
                sources: f.sources,
                background: f.background,
                seed: f.seed,
            },
            bloom: f.bloom,
        }
    }
}

impl From<SynthDocument> for FlatDocument {
    fn from(d: SynthDocument) -> Self {
        Self {
            ncols: d.scene.ncols,
            nrows: d.scene.nrows,
            sources: d.scene.sources,
            background: d.scene.background,
            seed: d.scene.seed,
            bloom: d.bloom,
        }
    }
}

impl SynthDocument {
    pub fn render<T: Scalar>(&self) -> Result<Grid<T>> {
        let truth = gen_scene(&self.scene)?;
        match self.bloom {
            None => Ok(truth),
            Some(spec) => forward_bloom_with_noise(
                &truth,
                T::of(spec.a),
                T::of(spec.b),
                spec.radius,
                spec.noise_sigma,
                self.scene.seed,
            ),
        }
    }
}

pub fn gen_scene<T: Scalar>(spec: &SceneSpec) -> Result<Grid<T>> {
    if spec.ncols == 0 || spec.nrows == 0 {
        return Err(Error::invalid(MODULE, "scene dimensions must be positive"));
    }
    if !spec.background.is_finite() {
        return Err(Error::invalid(MODULE, "background must be finite"));
    }
    let mut cells = vec![T::of(spec.background); spec.ncols * spec.nrows];
    let mut placed = vec![false; cells.len()];
    for s in &spec.sources {
        if s.row >= spec.nrows || s.col >= spec.ncols {
            return Err(Error::OutOfBounds {
                row: s.row,
                col: s.col,
                ncols: spec.ncols,
                nrows: spec.nrows,
            });
        }
        if !(s.intensity.is_finite() && s.intensity > spec.background) {
            return Err(Error::invalid(
                MODULE,
                format!(
                    "source at ({}, {}) has intensity {} not above background {}",
                    s.row, s.col, s.intensity, spec.background
                ),
            ));
        }
        let i = s.row * spec.ncols + s.col;
        if placed[i] {
            return Err(Error::invalid(
                MODULE,
                format!("two sources at ({}, {})", s.row, s.col),
            ));
        }
        placed[i] = true;
        cells[i] = T::of(s.intensity);
    }
    Grid::new(spec.ncols, spec.nrows, cells, T::of(crate::raster::DEFAULT_NODATA))
}

/// Cells within Euclidean distance `radius` of some other lit (`> 0`) cell.
fn bloom_reach<T: Scalar>(truth: &Grid<T>, radius: usize) -> Result<Vec<bool>> {
    let offsets = WindowOffsets::<T>::new(Window::new(radius)?);
    let r = T::of_usize(radius);
    let mut reach = vec![false; truth.len()];
    for (c, v) in truth.valid_cells() {
        if v <= T::zero() {
            continue;
        }
        let (r0, c0) = (c.row as isize, c.col as isize);
        for off in offsets.iter().filter(|o| o.distance <= r) {
            let (rr, cc) = (r0 + off.drow, c0 + off.dcol);
            if rr >= 0 && cc >= 0 && (rr as usize) < truth.nrows() && (cc as usize) < truth.ncols() {
                reach[rr as usize * truth.ncols() + cc as usize] = true;
            }
        }
    }
    Ok(reach)
}

/// Generative blooming: every data cell within Euclidean distance `radius`
/// of a lit truth cell (other than itself) becomes
/// `truth + a * bloom_feature(truth) + b`; all other cells keep the truth.
pub fn forward_bloom<T: Scalar>(truth: &Grid<T>, a: T, b: T, radius: usize) -> Result<Grid<T>> {
    forward_bloom_with_noise(truth, a, b, radius, 0.0, 0)
}

/// [`forward_bloom`] plus seeded Gaussian noise on every bloomed cell,
/// drawn in row-major order.
pub fn forward_bloom_with_noise<T: Scalar>(
    truth: &Grid<T>,
    a: T,
    b: T,
    radius: usize,
    sigma: f64,
    seed: u64,
) -> Result<Grid<T>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(MODULE, format!("noise sigma must be >= 0, got {sigma}")));
    }
    let reach = bloom_reach(truth, radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma validated");
    let mut cells = truth.cells().to_vec();
    for (i, cell) in cells.iter_mut().enumerate() {
        if !reach[i] || truth.is_nodata(*cell) {
            continue;
        }
        let c = truth.coord(i);
        *cell += a * bloom_feature(truth, c, radius)? + b;
        if sigma > 0.0 {
            *cell += T::of(noise.sample(&mut rng));
        }
    }
    truth.with_cells(cells)
}

/// Generative saturation: `min(cap, a * ln(R) + b)`, floored at 0.
/// Zero radiance maps to 0; negative radiance is rejected.
pub fn forward_saturate<T: Scalar>(radiance: &Grid<T>, a: T, b: T, cap: T) -> Result<Grid<T>> {
    if let Some((c, v)) = radiance.valid_cells().find(|(_, v)| *v < T::zero()) {
        return Err(Error::invalid(
            MODULE,
            format!("negative radiance {v} at ({}, {})", c.row, c.col),
        ));
    }
    Ok(radiance.map_valid(|_, r| {
        if r == T::zero() {
            T::zero()
        } else {
            (a * r.ln() + b).min(cap).max(T::zero())
        }
    }))
}

/// Generative intercalibration: `a * (v + 1)^b - 1`, unclamped.
pub fn forward_intercal<T: Scalar>(grid: &Grid<T>, a: T, b: T) -> Result<Grid<T>> {
    if let Some((c, v)) = grid.valid_cells().find(|(_, v)| *v < T::zero()) {
        return Err(Error::invalid(
            MODULE,
            format!("negative DN {v} at ({}, {})", c.row, c.col),
        ));
    }
    Ok(grid.map_valid(|_, v| a * (v + T::one()).powf(b) - T::one()))
}

/// `count` sources with intensities uniform in `[lo, hi)`, pairwise
/// Chebyshev separation above `min_separation`, and at least `margin` cells
/// from the border. Deterministic in `seed`.
pub fn isolated_sources(
    ncols: usize,
    nrows: usize,
    count: usize,
    min_separation: usize,
    margin: usize,
    intensity: (f64, f64),
    seed: u64,
) -> Result<Vec<Source>> {
    if 2 * margin >= ncols || 2 * margin >= nrows {
        return Err(Error::invalid(MODULE, "margin leaves no room for sources"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Source> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::invalid(
                MODULE,
                format!("could not place {count} sources {min_separation} px apart"),
            ));
        }
        let row = rng.random_range(margin..nrows - margin);
        let col = rng.random_range(margin..ncols - margin);
        let far = out
            .iter()
            .all(|s| s.row.abs_diff(row).max(s.col.abs_diff(col)) > min_separation);
        if far {
            let v = rng.random_range(intensity.0..intensity.1);
            out.push(Source {
                row,
                col,
                intensity: v,
            });
        }
    }
    Ok(out)
}

/// Radiance-like field, log-uniform in `[lo, hi)` per cell.
pub fn log_uniform_field<T: Scalar>(ncols: usize, nrows: usize, lo: f64, hi: f64, seed: u64) -> Result<Grid<T>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid(MODULE, "log-uniform field needs 0 < lo < hi"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ll, lh) = (lo.ln(), hi.ln());
    Grid::from_fn(ncols, nrows, |_| T::of(rng.random_range(ll..lh).exp()))
}

/// Distance from `p` to the nearest listed source, in pixels.
pub fn nearest_source_distance(p: PixelCoord, sources: &[Source]) -> Option<f64> {
    sources
        .iter()
        .map(|s| {
            let dr = s.row as f64 - p.row as f64;
            let dc = s.col as f64 - p.col as f64;
            (dr * dr + dc * dc).sqrt()
        })
        .min_by(|a, b| a.total_cmp(b))
}
