//! Annual series, the GDP-versus-lights regression and its evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{fit_ols, mse, LinearFit};
use crate::scalar::Scalar;

/// Minimum number of aligned years for a GDP fit.
pub const MIN_TRAINING_YEARS: usize = 3;

/// Year-indexed values (sum of lights, GDP, boat counts, throughput...).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnualSeries<T> {
    entries: BTreeMap<i32, T>,
}

impl<T: Scalar> AnnualSeries<T> {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Builds a series, rejecting duplicate years and non-finite values.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i32, T)>) -> Result<Self> {
        let mut s = Self::new();
        for (year, value) in pairs {
            s.insert(year, value)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, year: i32, value: T) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Series(format!("non-finite value for year {year}")));
        }
        if self.entries.insert(year, value).is_some() {
            return Err(Error::Series(format!("duplicate year {year}")));
        }
        Ok(())
    }

    pub fn get(&self, year: i32) -> Option<T> {
        self.entries.get(&year).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.entries.keys().copied()
    }

    /// `(year, value)` in ascending year order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        self.entries.iter().map(|(&y, &v)| (y, v))
    }

    /// Entries with `year <= last`.
    pub fn until(&self, last: i32) -> Self {
        Self {
            entries: self.entries.range(..=last).map(|(&y, &v)| (y, v)).collect(),
        }
    }

    /// Entries with `year > last`.
    pub fn after(&self, last: i32) -> Self {
        Self {
            entries: self
                .entries
                .range(last.saturating_add(1)..)
                .map(|(&y, &v)| (y, v))
                .collect(),
        }
    }
}

/// Pairs values of the years both series share, ascending.
pub fn align<T: Scalar>(a: &AnnualSeries<T>, b: &AnnualSeries<T>) -> Result<Vec<(i32, T, T)>> {
    let out: Vec<_> = a
        .iter()
        .filter_map(|(y, va)| b.get(y).map(|vb| (y, va, vb)))
        .collect();
    if out.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(out)
}

/// `GDP = beta0 + beta1 * lights`.
#[derive(Debug, Clone, PartialEq)]
pub struct GdpModel<T> {
    pub fit: LinearFit<T>,
    pub training_years: Vec<i32>,
}

impl<T: Scalar> GdpModel<T> {
    /// Model from known coefficients, e.g. loaded from a model file.
    pub fn from_coefficients(beta0: T, beta1: T, r2: T) -> Self {
        Self {
            fit: LinearFit {
                slope: beta1,
                intercept: beta0,
                r2,
                residuals: Vec::new(),
                n: 0,
            },
            training_years: Vec::new(),
        }
    }

    pub fn beta0(&self) -> T {
        self.fit.intercept
    }

    pub fn beta1(&self) -> T {
        self.fit.slope
    }

    pub fn r2(&self) -> T {
        self.fit.r2
    }

    pub fn to_file(&self) -> GdpModelFile<T> {
        GdpModelFile {
            beta0: self.beta0(),
            beta1: self.beta1(),
            r2: self.r2(),
        }
    }
}

/// On-disk model document: `{"beta0":...,"beta1":...,"r2":...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdpModelFile<T> {
    pub beta0: T,
    pub beta1: T,
    pub r2: T,
}

impl<T: Scalar> From<GdpModelFile<T>> for GdpModel<T> {
    fn from(f: GdpModelFile<T>) -> Self {
        GdpModel::from_coefficients(f.beta0, f.beta1, f.r2)
    }
}

pub fn fit_gdp_model<T: Scalar>(lights: &AnnualSeries<T>, gdp: &AnnualSeries<T>) -> Result<GdpModel<T>> {
    let rows = align(lights, gdp)?;
    if rows.len() < MIN_TRAINING_YEARS {
        return Err(Error::TooFewSamples {
            module: "econometrics",
            needed: MIN_TRAINING_YEARS,
            got: rows.len(),
        });
    }
    let xs: Vec<T> = rows.iter().map(|r| r.1).collect();
    let ys: Vec<T> = rows.iter().map(|r| r.2).collect();
    let fit = fit_ols(&xs, &ys).map_err(|e| match e {
        Error::Degenerate { .. } => {
            Error::degenerate("econometrics", "light statistic is constant over the training years")
        }
        other => other,
    })?;
    Ok(GdpModel {
        fit,
        training_years: rows.iter().map(|r| r.0).collect(),
    })
}

pub fn predict_gdp<T: Scalar>(model: &GdpModel<T>, light: T) -> T {
    model.fit.predict(light)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow<T> {
    pub year: i32,
    pub actual: T,
    pub predicted: T,
    /// `actual - predicted`.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport<T> {
    pub rows: Vec<ReportRow<T>>,
    pub mse: T,
}

impl<T: Scalar> EvaluationReport<T> {
    /// `year,actual,predicted,residual` rows followed by `# mse=<value>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("year,actual,predicted,residual\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.year, r.actual, r.predicted, r.residual);
        }
        let _ = writeln!(out, "# mse={}", self.mse);
        out
    }
}

/// Predicts every year present in both series and scores against `gdp`.
pub fn evaluate<T: Scalar>(
    model: &GdpModel<T>,
    lights: &AnnualSeries<T>,
    gdp: &AnnualSeries<T>,
) -> Result<EvaluationReport<T>> {
    let predicted = AnnualSeries::from_pairs(
        lights.iter().map(|(y, l)| (y, predict_gdp(model, l))),
    )?;
    evaluate_predictions(gdp, &predicted)
}

/// Scores already-made predictions against actual values on shared years.
pub fn evaluate_predictions<T: Scalar>(
    actual: &AnnualSeries<T>,
    predicted: &AnnualSeries<T>,
) -> Result<EvaluationReport<T>> {
    let rows: Vec<ReportRow<T>> = align(actual, predicted)?
        .into_iter()
        .map(|(year, a, p)| ReportRow {
            year,
            actual: a,
            predicted: p,
            residual: a - p,
        })
        .collect();
    let a: Vec<T> = rows.iter().map(|r| r.actual).collect();
    let p: Vec<T> = rows.iter().map(|r| r.predicted).collect();
    let mse = mse(&a, &p)?;
    Ok(EvaluationReport { rows, mse })
}

/// Divides every value by the `base_year` value.
pub fn index_to_base<T: Scalar>(series: &AnnualSeries<T>, base_year: i32) -> Result<AnnualSeries<T>> {
    let base = series.get(base_year).ok_or(Error::MissingBaseYear(base_year))?;
    if base == T::zero() {
        return Err(Error::ZeroBase);
    }
    let mut entries = BTreeMap::new();
    for (y, v) in series.iter() {
        // Exact 1.0 at the base year regardless of rounding.
        let scaled = if y == base_year { T::one() } else { v / base };
        entries.insert(y, scaled);
    }
    Ok(AnnualSeries { entries })
}

/// Parses a `year,value` CSV document.
pub fn read_series_csv<T: Scalar>(text: &str) -> Result<AnnualSeries<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Series(format!("line 1: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "year" || &headers[1] != "value" {
        return Err(Error::Series(format!(
            "line 1: expected header 'year,value', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut series = AnnualSeries::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Series(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(Error::Series(format!("line {line}: expected 2 fields")));
        }
        let year: i32 = record[0]
            .parse()
            .map_err(|_| Error::Series(format!("line {line}: bad year '{}'", &record[0])))?;
        let value: T = record[1]
            .parse()
            .map_err(|_| Error::Series(format!("line {line}: bad value '{}'", &record[1])))?;
        series
            .insert(year, value)
            .map_err(|e| Error::Series(format!("line {line}: {e}")))?;
    }
    Ok(series)
}

pub fn write_series_csv<T: Scalar>(series: &AnnualSeries<T>) -> String {
    let mut out = String::from("year,value\n");
    for (y, v) in series.iter() {
        let _ = writeln!(out, "{y},{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(pairs: &[(i32, f64)]) -> AnnualSeries<f64> {
        AnnualSeries::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn align_examples() {
        assert!(matches!(
            align(&s(&[(2000, 1.0)]), &s(&[(2001, 2.0)])),
            Err(Error::EmptyIntersection)
        ));
        assert_eq!(
            align(&s(&[(2000, 1.0), (2001, 2.0)]), &s(&[(2001, 5.0)])).unwrap(),
            vec![(2001, 2.0, 5.0)]
        );
        let a = s(&[(1999, 1.0), (2000, 2.0)]);
        let b = s(&[(1999, 3.0), (2000, 4.0)]);
        assert_eq!(align(&a, &b).unwrap(), vec![(1999, 1.0, 3.0), (2000, 2.0, 4.0)]);
    }

    #[test]
    fn exact_linear_gdp() {
        let years = 2000..2005;
        let lights = AnnualSeries::from_pairs(years.clone().map(|y| (y, 10.0 + (y - 2000) as f64))).unwrap();
        let gdp = AnnualSeries::from_pairs(years.map(|y| (y, 3.0 * (10.0 + (y - 2000) as f64) + 7.0))).unwrap();
        let m = fit_gdp_model(&lights, &gdp).unwrap();
        assert!((m.beta1() - 3.0).abs() < 1e-12);
        assert!((m.beta0() - 7.0).abs() < 1e-12);
        assert_eq!(m.r2(), 1.0);
        assert_eq!(m.training_years, vec![2000, 2001, 2002, 2003, 2004]);

        let report = evaluate(&m, &lights, &gdp).unwrap();
        assert!(report.mse.abs() < 1e-9);
        assert!(report.rows.iter().all(|r| r.residual.abs() < 1e-9));
    }

    #[test]
    fn needs_three_years() {
        let lights = s(&[(2000, 1.0), (2001, 2.0)]);
        let gdp = s(&[(2000, 1.0), (2001, 2.0)]);
        assert!(matches!(
            fit_gdp_model(&lights, &gdp),
            Err(Error::TooFewSamples { needed: 3, got: 2, .. })
        ));
    }

    #[test]
    fn five_year_oracle() {
        // Same normal-equations oracle as the regression module.
        let pts: [(f64, f64); 5] = [(1.0, 2.1), (2.0, 3.9), (3.0, 6.2), (4.0, 8.1), (5.0, 9.8)];
        let lights = AnnualSeries::from_pairs((1992..).zip(pts.iter().map(|p| p.0))).unwrap();
        let gdp = AnnualSeries::from_pairs((1992..).zip(pts.iter().map(|p| p.1))).unwrap();
        let m = fit_gdp_model(&lights, &gdp).unwrap();
        assert!((m.beta1() - 1.96).abs() < 1e-12);
        assert!((m.beta0() - 0.14).abs() < 1e-12);
    }

    #[test]
    fn prediction_examples() {
        let id = GdpModel::from_coefficients(0.0, 1.0, 1.0);
        assert_eq!(predict_gdp(&id, 5.0), 5.0);
        let m = GdpModel::from_coefficients(7.0, 3.0, 1.0);
        assert_eq!(predict_gdp(&m, 10.0), 37.0);
        let (l1, l2) = (2.5, 4.25);
        assert_eq!(
            predict_gdp(&m, l1) + predict_gdp(&m, l2) - predict_gdp(&m, 0.0),
            predict_gdp(&m, l1 + l2)
        );
    }

    #[test]
    fn one_year_evaluation() {
        let actual = s(&[(2012, 295.09)]);
        let report = evaluate_predictions(&actual, &s(&[(2012, 227.37)])).unwrap();
        assert!((report.mse - 4585.9984).abs() < 1e-8);
        let report = evaluate_predictions(&actual, &s(&[(2012, 133.33)])).unwrap();
        assert!((report.mse - 26166.2976).abs() < 1e-7);
        assert!(evaluate_predictions(&actual, &s(&[(2013, 1.0)])).is_err());
    }

    #[test]
    fn report_csv_layout() {
        let r = evaluate_predictions(&s(&[(2011, 3.0), (2012, 5.0)]), &s(&[(2011, 2.0), (2012, 5.0)])).unwrap();
        assert_eq!(
            r.to_csv(),
            "year,actual,predicted,residual\n2011,3,2,1\n2012,5,5,0\n# mse=0.5\n"
        );
    }

    #[test]
    fn indexing_examples() {
        let idx = index_to_base(&s(&[(2017, 100.0), (2018, 120.0), (2019, 121.0)]), 2017).unwrap();
        assert_eq!(idx.get(2017), Some(1.0));
        assert!((idx.get(2018).unwrap() - 1.2).abs() < 1e-15);
        assert!((idx.get(2019).unwrap() - 1.21).abs() < 1e-15);

        let flat = index_to_base(&s(&[(2017, 7.0), (2018, 7.0)]), 2018).unwrap();
        assert!(flat.iter().all(|(_, v)| v == 1.0));

        assert!(matches!(
            index_to_base(&s(&[(2018, 1.0)]), 2017),
            Err(Error::MissingBaseYear(2017))
        ));
        assert!(matches!(
            index_to_base(&s(&[(2017, 0.0)]), 2017),
            Err(Error::ZeroBase)
        ));

        let once = index_to_base(&s(&[(2017, 3.0), (2018, 4.5), (2019, 0.1)]), 2017).unwrap();
        assert_eq!(index_to_base(&once, 2017).unwrap(), once);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let series = s(&[(2017, 1.5), (2018, 2.25)]);
        let text = write_series_csv(&series);
        assert_eq!(text, "year,value\n2017,1.5\n2018,2.25\n");
        assert_eq!(read_series_csv::<f64>(&text).unwrap(), series);

        assert!(read_series_csv::<f64>("yr,value\n2017,1\n").is_err());
        assert!(read_series_csv::<f64>("year,value\n2017,x\n").is_err());
        assert!(read_series_csv::<f64>("year,value\n2017,1\n2017,2\n").is_err());
        assert!(read_series_csv::<f64>("year,value\n2017,NaN\n").is_err());
    }

    #[test]
    fn train_test_split() {
        let series = s(&[(2010, 1.0), (2011, 2.0), (2012, 3.0)]);
        assert_eq!(series.until(2011).len(), 2);
        assert_eq!(series.after(2011).years().collect::<Vec<_>>(), vec![2012]);
    }
}
