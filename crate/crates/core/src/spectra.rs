//! Sampled spectra, frequency bands and band energies.
//!
//! A spectrum is a vector of magnitudes on a shared, strictly increasing
//! [`FrequencyGrid`]. The energy of a band `[lo, hi]` is the trapezoidal
//! integral of the spectrum over that interval; band endpoints that fall
//! between grid points are handled by linear interpolation, which makes the
//! rule exact for piecewise-linear spectra.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samples::Samples;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    A,
    B,
}

impl ClassLabel {
    pub const BOTH: [ClassLabel; 2] = [ClassLabel::A, ClassLabel::B];

    pub fn index(self) -> usize {
        match self {
            ClassLabel::A => 0,
            ClassLabel::B => 1,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::A => "A",
            ClassLabel::B => "B",
        })
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(ClassLabel::A),
            "B" | "b" => Ok(ClassLabel::B),
            other => Err(Error::InvalidParameter(format!(
                "unknown class label {other:?}"
            ))),
        }
    }
}

/// Strictly increasing frequencies (Hz), at least two of them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyGrid {
    freqs: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 frequencies, got {}",
                freqs.len()
            )));
        }
        if let Some(i) = freqs.iter().position(|f| !f.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite frequency at index {i}"
            )));
        }
        if let Some(i) = freqs.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "not strictly increasing at index {} ({} >= {})",
                i + 1,
                freqs[i],
                freqs[i + 1]
            )));
        }
        Ok(FrequencyGrid { freqs })
    }

    /// `count` points `start, start + step, ...`.
    pub fn uniform(start: f64, step: f64, count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| start + step * i as f64).collect())
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.freqs[0]
    }

    pub fn max(&self) -> f64 {
        self.freqs[self.freqs.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.max() - self.min()
    }

    /// Smallest distance between neighbouring grid points.
    pub fn min_spacing(&self) -> f64 {
        self.freqs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, band: &Band) -> bool {
        band.lo >= self.min() && band.hi <= self.max()
    }

    fn check_band(&self, band: &Band) -> Result<()> {
        if self.contains(band) {
            Ok(())
        } else {
            Err(Error::BandOutOfRange {
                lo: band.lo,
                hi: band.hi,
                min: self.min(),
                max: self.max(),
            })
        }
    }
}

/// One realization of a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Arc<FrequencyGrid>,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: Arc<FrequencyGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} values for a grid of {} frequencies",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(Spectrum { grid, values })
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation of the spectrum at `x`, which must lie in the grid range.
    pub fn value_at(&self, x: f64) -> f64 {
        let f = self.grid.freqs();
        let j = f.partition_point(|&g| g <= x);
        if j == 0 {
            return self.values[0];
        }
        if j == f.len() {
            return self.values[f.len() - 1];
        }
        let i = j - 1;
        let t = (x - f[i]) / (f[j] - f[i]);
        self.values[i] + t * (self.values[j] - self.values[i])
    }
}

/// Realizations of one class, all on the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSet {
    label: ClassLabel,
    grid: Arc<FrequencyGrid>,
    spectra: Vec<Spectrum>,
}

impl SpectrumSet {
    pub fn new(label: ClassLabel, grid: Arc<FrequencyGrid>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let spectra = rows
            .into_iter()
            .map(|r| Spectrum::new(grid.clone(), r))
            .collect::<Result<Vec<_>>>()?;
        Self::from_spectra(label, grid, spectra)
    }

    pub fn from_spectra(
        label: ClassLabel,
        grid: Arc<FrequencyGrid>,
        spectra: Vec<Spectrum>,
    ) -> Result<Self> {
        if spectra.is_empty() {
            return Err(Error::InvalidSpectrum(format!(
                "class {label} has no realizations"
            )));
        }
        if spectra.iter().any(|s| **s.grid() != *grid) {
            return Err(Error::InvalidSpectrum(
                "spectra of one set must share a grid".into(),
            ));
        }
        Ok(SpectrumSet {
            label,
            grid,
            spectra,
        })
    }

    pub fn label(&self) -> ClassLabel {
        self.label
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }
}

/// Closed frequency interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidBand(format!(
                "[{lo}, {hi}] needs finite lo < hi"
            )));
        }
        Ok(Band { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Length of `self ∩ other` (zero when they only touch).
    pub fn intersection(&self, other: &Band) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn contains_band(&self, other: &Band) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// `L` bands sorted by `lo` whose interiors do not overlap. Neighbouring
/// bands may share an endpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandSet {
    bands: Vec<Band>,
}

impl<'de> Deserialize<'de> for BandSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            bands: Vec<Band>,
        }
        let raw = Raw::deserialize(d)?;
        BandSet::new(raw.bands).map_err(serde::de::Error::custom)
    }
}

impl BandSet {
    /// Accepts bands in any order; they are stored sorted by `lo`.
    pub fn new(mut bands: Vec<Band>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidBand(
                "a band set needs at least one band".into(),
            ));
        }
        for b in &bands {
            Band::new(b.lo, b.hi)?;
        }
        bands.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in bands.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::InvalidBand(format!(
                    "bands [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(BandSet { bands })
    }

    /// Pairs consecutive values of `[lo_1, hi_1, lo_2, hi_2, ...]`.
    pub fn from_boundaries(boundaries: &[f64]) -> Result<Self> {
        if boundaries.is_empty() || boundaries.len() % 2 != 0 {
            return Err(Error::InvalidBand(format!(
                "need an even, non-zero number of boundaries, got {}",
                boundaries.len()
            )));
        }
        Self::new(
            boundaries
                .chunks_exact(2)
                .map(|c| Band { lo: c[0], hi: c[1] })
                .collect(),
        )
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn total_width(&self) -> f64 {
        self.bands.iter().map(Band::width).sum()
    }

    pub fn boundaries(&self) -> Vec<f64> {
        self.bands.iter().flat_map(|b| [b.lo, b.hi]).collect()
    }
}

impl fmt::Display for BandSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.bands.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "[{}, {}]", b.lo, b.hi)?;
        }
        f.write_str("}")
    }
}

/// One row of band energies per realization, rows in input order.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMatrix {
    values: Samples,
    labels: Vec<ClassLabel>,
}

impl EnergyMatrix {
    pub fn new(values: Samples, labels: Vec<ClassLabel>) -> Result<Self> {
        if values.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: labels.len(),
            });
        }
        Ok(EnergyMatrix { values, labels })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_bands(&self) -> usize {
        self.values.dim()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn label(&self, i: usize) -> ClassLabel {
        self.labels[i]
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn values(&self) -> &Samples {
        &self.values
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Rows of one class, in order.
    pub fn class_samples(&self, label: ClassLabel) -> Samples {
        let mut data = Vec::new();
        for (row, &l) in self.values.rows().zip(&self.labels) {
            if l == label {
                data.extend_from_slice(row);
            }
        }
        Samples::new(data, self.n_bands())
    }
}

/// Trapezoidal integral of `spectrum` over `band`.
pub fn band_energy(spectrum: &Spectrum, band: &Band) -> Result<f64> {
    spectrum.grid.check_band(band)?;
    Ok(integrate(spectrum, band))
}

fn integrate(spectrum: &Spectrum, band: &Band) -> f64 {
    let f = spectrum.grid.freqs();
    let s = &spectrum.values;
    // Grid points strictly inside (lo, hi).
    let start = f.partition_point(|&x| x <= band.lo);
    let end = f.partition_point(|&x| x < band.hi);
    let mut x0 = band.lo;
    let mut y0 = spectrum.value_at(band.lo);
    let mut acc = 0.0;
    for i in start..end {
        acc += 0.5 * (f[i] - x0) * (s[i] + y0);
        x0 = f[i];
        y0 = s[i];
    }
    acc + 0.5 * (band.hi - x0) * (spectrum.value_at(band.hi) + y0)
}

/// Band energies of every realization in `sets` (rows in input order).
pub fn energy_matrix(sets: &[SpectrumSet], bands: &BandSet) -> Result<EnergyMatrix> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InsufficientData("no spectrum sets".into()))?;
    let grid = first.grid();
    if sets
        .iter()
        .any(|s| s.grid() != grid && **s.grid() != **grid)
    {
        return Err(Error::InvalidSpectrum(
            "all spectrum sets must share one grid".into(),
        ));
    }
    for b in bands.bands() {
        grid.check_band(b)?;
    }
    let items: Vec<(&Spectrum, ClassLabel)> = sets
        .iter()
        .flat_map(|set| set.spectra().iter().map(move |s| (s, set.label())))
        .collect();
    let l = bands.len();
    let rows: Vec<f64> = items
        .par_iter()
        .flat_map_iter(|(s, _)| bands.bands().iter().map(move |b| integrate(s, b)))
        .collect();
    let labels = items.iter().map(|(_, label)| *label).collect();
    EnergyMatrix::new(Samples::new(rows, l), labels)
}

/// Turns an arbitrary vector of `2L` boundaries into a valid [`BandSet`] on
/// `grid`; see [`repair_within`].
pub fn repair_bandset(raw: &[f64], min_width: f64, grid: &FrequencyGrid) -> Result<BandSet> {
    repair_within(raw, min_width, grid.min(), grid.max())
}

/// Repair rule for search iterates: clip every value to `[lower, upper]`,
/// sort, pair consecutive values into intervals, widen any interval
/// narrower than `min_width` symmetrically about its centre, then slide
/// bands apart until no two overlap and all lie inside the range.
///
/// A boundary vector that already describes a valid band set (every band at
/// least `min_width` wide) comes back unchanged.
pub fn repair_within(raw: &[f64], min_width: f64, lower: f64, upper: f64) -> Result<BandSet> {
    if raw.is_empty() || raw.len() % 2 != 0 {
        return Err(Error::InvalidBand(format!(
            "need an even, non-zero number of boundaries, got {}",
            raw.len()
        )));
    }
    if let Some(i) = raw.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidBand(format!(
            "non-finite boundary at index {i}"
        )));
    }
    if !(min_width > 0.0 && min_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "min_width must be positive, got {min_width}"
        )));
    }
    let count = raw.len() / 2;
    let span = upper - lower;
    if !(span >= count as f64 * min_width) {
        return Err(Error::RangeTooNarrow {
            width: span,
            count,
            min_width,
        });
    }

    let mut v: Vec<f64> = raw.iter().map(|x| x.clamp(lower, upper)).collect();
    v.sort_by(f64::total_cmp);
    let mut bands: Vec<(f64, f64)> = v.chunks_exact(2).map(|c| (c[0], c[1])).collect();

    // Widths that fall short only by rounding in `upper - w` count as valid.
    let slack = 4.0 * f64::EPSILON * lower.abs().max(upper.abs()).max(min_width);
    let mut widened = false;
    for b in bands.iter_mut() {
        if b.1 - b.0 < min_width - slack {
            let mid = 0.5 * (b.0 + b.1);
            *b = place(mid - 0.5 * min_width, min_width, lower, upper);
            widened = true;
        }
    }
    if !widened && bands.windows(2).all(|w| w[1].0 >= w[0].1) {
        return BandSet::new(bands.into_iter().map(|(lo, hi)| Band { lo, hi }).collect());
    }

    // Widening can push the total past the range; shrink the excess over
    // min_width proportionally so a packing always exists.
    let total: f64 = bands.iter().map(|b| b.1 - b.0).sum();
    if total > span {
        let excess: f64 = bands.iter().map(|b| (b.1 - b.0 - min_width).max(0.0)).sum();
        let room = span - count as f64 * min_width;
        let scale = if excess > 0.0 { room / excess } else { 0.0 };
        for b in bands.iter_mut() {
            let w = min_width + (b.1 - b.0 - min_width).max(0.0) * scale;
            let mid = 0.5 * (b.0 + b.1);
            *b = place(mid - 0.5 * w, w, lower, upper);
        }
    }

    for i in 1..count {
        let prev_hi = bands[i - 1].1;
        if bands[i].0 < prev_hi {
            let w = bands[i].1 - bands[i].0;
            bands[i] = (prev_hi, prev_hi + w);
        }
    }
    if bands[count - 1].1 > upper {
        let w = bands[count - 1].1 - bands[count - 1].0;
        bands[count - 1] = (upper - w, upper);
        for i in (0..count - 1).rev() {
            let next_lo = bands[i + 1].0;
            if bands[i].1 > next_lo {
                let w = bands[i].1 - bands[i].0;
                bands[i] = (next_lo - w, next_lo);
            }
        }
        if bands[0].0 < lower {
            bands[0].0 = lower;
        }
    }
    BandSet::new(bands.into_iter().map(|(lo, hi)| Band { lo, hi }).collect())
}

/// Interval of width `w` starting at `lo`, shifted to fit `[lower, upper]`.
fn place(lo: f64, w: f64, lower: f64, upper: f64) -> (f64, f64) {
    if lo < lower {
        (lower, lower + w)
    } else if lo + w > upper {
        (upper - w, upper)
    } else {
        (lo, lo + w)
    }
}

/// Reads the spectrum CSV layout: first row is the frequency grid, each
/// following row one realization.
pub fn load_spectra_csv(path: impl AsRef<Path>, label: ClassLabel) -> Result<SpectrumSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_spectra_csv(file, label, path)
}

pub fn read_spectra_csv<R: Read>(reader: R, label: ClassLabel, path: &Path) -> Result<SpectrumSet> {
    let parse_err = |row: usize, col: Option<usize>, msg: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        col,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut grid: Option<Arc<FrequencyGrid>> = None;
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| parse_err(row, None, e.to_string()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let mut values = Vec::with_capacity(record.len());
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(row, Some(j + 1), format!("not a number: {cell:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(
                    row,
                    Some(j + 1),
                    format!("non-finite value {cell:?}"),
                ));
            }
            values.push(v);
        }
        match &grid {
            None => {
                if let Some(j) = values.windows(2).position(|w| w[0] >= w[1]) {
                    return Err(parse_err(
                        row,
                        Some(j + 2),
                        "frequency grid is not strictly increasing".into(),
                    ));
                }
                let g =
                    FrequencyGrid::new(values).map_err(|e| parse_err(row, None, e.to_string()))?;
                grid = Some(Arc::new(g));
            }
            Some(g) => {
                if values.len() != g.len() {
                    return Err(parse_err(
                        row,
                        None,
                        format!("expected {} columns, found {}", g.len(), values.len()),
                    ));
                }
                rows.push(values);
            }
        }
    }
    let grid = grid.ok_or_else(|| parse_err(1, None, "empty file".into()))?;
    if rows.is_empty() {
        return Err(parse_err(2, None, "no realization rows".into()));
    }
    SpectrumSet::new(label, grid, rows)
}

/// Writes `set` in the layout read by [`load_spectra_csv`], using the
/// shortest decimal form that round-trips each value.
pub fn write_spectra_csv(path: impl AsRef<Path>, set: &SpectrumSet) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_row(&mut w, set.grid().freqs()).map_err(|e| Error::io(path, e))?;
    for s in set.spectra() {
        write_row(&mut w, s.values()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_row<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{v}")?;
    }
    w.write_all(b"\n")
}
