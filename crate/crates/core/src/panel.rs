//! Monthly level panels `S(variable, good, month)`: loading, validation,
//! slicing, and the goods classification table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::invalid(format!("month {month} out of range")));
        }
        Ok(Self { year, month })
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(o: i64) -> Self {
        Self {
            year: o.div_euclid(12) as i32,
            month: (o.rem_euclid(12) + 1) as u32,
        }
    }

    /// The month `n` months later (negative moves back).
    pub fn offset(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: YearMonth) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad month '{s}', expected YYYY-MM"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year = y.parse::<i32>().map_err(|_| bad())?;
        let month = m.parse::<u32>().map_err(|_| bad())?;
        YearMonth::new(year, month).map_err(|_| bad())
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    Production,
    Shipment,
    Inventory,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::Production, Variable::Shipment, Variable::Inventory];

    pub fn index(self) -> usize {
        match self {
            Variable::Production => 0,
            Variable::Shipment => 1,
            Variable::Inventory => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::Production => "production",
            Variable::Shipment => "shipment",
            Variable::Inventory => "inventory",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "production" => Ok(Variable::Production),
            "shipment" => Ok(Variable::Shipment),
            "inventory" => Ok(Variable::Inventory),
            other => Err(Error::invalid(format!("unknown variable '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodDescriptor {
    pub id: u32,
    pub label: String,
    pub category: String,
}

impl GoodDescriptor {
    pub fn new(id: u32, label: impl Into<String>, category: impl Into<String>) -> Self {
        Self {
            id,
            label: label.into(),
            category: category.into(),
        }
    }

    /// Placeholder descriptors `1..=count` for data without a goods table.
    pub fn numbered(count: usize) -> Vec<Self> {
        (1..=count as u32)
            .map(|id| Self::new(id, format!("good {id}"), "unclassified"))
            .collect()
    }

    /// The 21 goods-type classes of the Japanese IIP.
    pub fn iip_goods() -> Vec<Self> {
        const TABLE: [(&str, &str); 21] = [
            ("Manufacturing Equipment", "Capital Goods"),
            ("Electricity", "Capital Goods"),
            ("Communication and Broadcasting", "Capital Goods"),
            ("Agriculture", "Capital Goods"),
            ("Construction", "Capital Goods"),
            ("Transport", "Capital Goods"),
            ("Offices", "Capital Goods"),
            ("Other Capital Goods", "Capital Goods"),
            ("Construction", "Construction Goods"),
            ("Engineering", "Construction Goods"),
            ("House Work", "Durable Consumer Goods"),
            ("Heating/Cooling Equipment", "Durable Consumer Goods"),
            ("Furniture & Furnishings", "Durable Consumer Goods"),
            ("Education & Amusement", "Durable Consumer Goods"),
            ("Motor Vehicles", "Durable Consumer Goods"),
            ("House Work", "Non-durable Consumer Goods"),
            ("Education & Amusement", "Non-durable Consumer Goods"),
            ("Clothing & Footwear", "Non-durable Consumer Goods"),
            ("Food & Beverage", "Non-durable Consumer Goods"),
            ("Mining & Manufacturing", "Producer Goods"),
            ("Others", "Producer Goods"),
        ];
        TABLE
            .iter()
            .enumerate()
            .map(|(i, (label, cat))| Self::new(i as u32 + 1, *label, *cat))
            .collect()
    }
}

fn check_goods(goods: &[GoodDescriptor]) -> Result<()> {
    if goods.is_empty() {
        return Err(Error::invalid("panel needs at least one good"));
    }
    for (i, g) in goods.iter().enumerate() {
        if g.id != i as u32 + 1 {
            return Err(Error::invalid(format!(
                "good ids must be contiguous from 1; position {} has id {}",
                i + 1,
                g.id
            )));
        }
    }
    Ok(())
}

/// Load a goods table with header `id,label,category`.
pub fn load_goods(path: impl AsRef<Path>) -> Result<Vec<GoodDescriptor>> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["id", "label", "category"] {
        return Err(Error::invalid(format!(
            "goods table header must be 'id,label,category', got '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut goods: Vec<GoodDescriptor> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    goods.sort_by_key(|g| g.id);
    check_goods(&goods)?;
    Ok(goods)
}

pub fn save_goods<W: Write>(goods: &[GoodDescriptor], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for g in goods {
        w.serialize(g)?;
    }
    w.flush().map_err(|e| Error::io("<goods>", e))?;
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PanelMeta {
    pub seasonally_adjusted: bool,
    /// Set when the panel is a prefix of a longer one: the original length.
    pub chopped_from: Option<usize>,
    /// Cells filled by gap interpolation, as `variable/good/YYYY-MM`.
    pub interpolated: Vec<String>,
}

/// Level panel with layout `levels[(variable · G + good) · N + month]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    start: YearMonth,
    n_months: usize,
    goods: Vec<GoodDescriptor>,
    levels: Vec<f64>,
    pub meta: PanelMeta,
}

/// Identifies one series of a panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesLabel {
    pub variable: Variable,
    pub good: u32,
}

impl fmt::Display for SeriesLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.variable, self.good)
    }
}

/// Series labels in panel order: all goods of production, then shipment, then inventory.
pub fn series_labels(n_goods: usize) -> Vec<SeriesLabel> {
    Variable::ALL
        .iter()
        .flat_map(|&variable| {
            (1..=n_goods as u32).map(move |good| SeriesLabel { variable, good })
        })
        .collect()
}

impl Panel {
    /// Build a panel from `series[variable·G + good][month]`.
    pub fn from_series(
        start: YearMonth,
        goods: Vec<GoodDescriptor>,
        series: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_goods(&goods)?;
        let g = goods.len();
        if series.len() != 3 * g {
            return Err(Error::invalid(format!(
                "expected {} series for {g} goods, got {}",
                3 * g,
                series.len()
            )));
        }
        let n = series[0].len();
        if n == 0 || series.iter().any(|s| s.len() != n) {
            return Err(Error::invalid("series must share a nonzero length"));
        }
        let labels = series_labels(g);
        for (s, label) in series.iter().zip(&labels) {
            for (t, &v) in s.iter().enumerate() {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::NonPositive {
                        variable: label.variable.to_string(),
                        good: label.good,
                        month: start.offset(t as i64).to_string(),
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            start,
            n_months: n,
            goods,
            levels: series.into_iter().flatten().collect(),
            meta: PanelMeta::default(),
        })
    }

    pub fn start_month(&self) -> YearMonth {
        self.start
    }

    pub fn end_month(&self) -> YearMonth {
        self.start.offset(self.n_months as i64 - 1)
    }

    pub fn n_months(&self) -> usize {
        self.n_months
    }

    pub fn goods(&self) -> &[GoodDescriptor] {
        &self.goods
    }

    pub fn n_goods(&self) -> usize {
        self.goods.len()
    }

    pub fn n_series(&self) -> usize {
        3 * self.goods.len()
    }

    pub fn labels(&self) -> Vec<SeriesLabel> {
        series_labels(self.goods.len())
    }

    pub fn month(&self, t: usize) -> YearMonth {
        self.start.offset(t as i64)
    }

    /// Series by flat index `variable · G + good_index`.
    pub fn series_at(&self, s: usize) -> &[f64] {
        &self.levels[s * self.n_months..(s + 1) * self.n_months]
    }

    pub fn series(&self, variable: Variable, good_index: usize) -> &[f64] {
        self.series_at(variable.index() * self.goods.len() + good_index)
    }

    /// Prefix panel of the first `s` months.
    pub fn chop(&self, s: usize) -> Result<Panel> {
        if s < 2 || s > self.n_months {
            return Err(Error::invalid(format!(
                "chop length {s} outside 2..={}",
                self.n_months
            )));
        }
        let series = (0..self.n_series())
            .map(|i| self.series_at(i)[..s].to_vec())
            .collect();
        let mut out = Panel::from_series(self.start, self.goods.clone(), series)?;
        out.meta = self.meta.clone();
        if s != self.n_months {
            out.meta.chopped_from = Some(self.meta.chopped_from.unwrap_or(self.n_months));
        }
        Ok(out)
    }

    /// `(prefix ending at boundary inclusive, full panel)`.
    pub fn split_in_sample(&self, boundary: YearMonth) -> Result<(Panel, Panel)> {
        let idx = self.start.months_until(boundary);
        if idx < 0 || idx >= self.n_months as i64 {
            return Err(Error::invalid(format!(
                "boundary {boundary} outside panel range {}..{}",
                self.start,
                self.end_month()
            )));
        }
        Ok((self.chop(idx as usize + 1)?, self.clone()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Fill interior gaps of at most two months by linear interpolation.
    pub interpolate_gaps: bool,
    pub seasonally_adjusted: bool,
    pub goods: Option<Vec<GoodDescriptor>>,
}

#[derive(Debug, Deserialize)]
struct Row {
    date: String,
    variable: String,
    good: u32,
    value: f64,
}

pub const PANEL_HEADER: [&str; 4] = ["date", "variable", "good", "value"];

pub fn load_panel(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Panel> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    read_panel(file, opts)
}

/// Parse the long-format panel CSV (`date,variable,good,value`).
pub fn read_panel<R: Read>(input: R, opts: &LoadOptions) -> Result<Panel> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != PANEL_HEADER {
        return Err(Error::invalid(format!(
            "panel header must be 'date,variable,good,value', got '{}'",
            header.join(",")
        )));
    }

    let mut cells: BTreeMap<(Variable, u32, YearMonth), f64> = BTreeMap::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        let month: YearMonth = row.date.parse()?;
        let variable: Variable = row.variable.parse()?;
        if !(row.value > 0.0) || !row.value.is_finite() {
            return Err(Error::NonPositive {
                variable: variable.to_string(),
                good: row.good,
                month: month.to_string(),
                value: row.value,
            });
        }
        if cells.insert((variable, row.good, month), row.value).is_some() {
            return Err(Error::DuplicateCell {
                variable: variable.to_string(),
                good: row.good,
                month: month.to_string(),
            });
        }
    }
    if cells.is_empty() {
        return Err(Error::invalid("panel file has no data rows"));
    }

    let good_ids: BTreeSet<u32> = cells.keys().map(|k| k.1).collect();
    let n_goods = good_ids.len();
    if good_ids.iter().copied().ne(1..=n_goods as u32) {
        return Err(Error::invalid(format!(
            "good ids must be contiguous from 1, found {good_ids:?}"
        )));
    }
    let goods = match &opts.goods {
        Some(table) => {
            if table.len() != n_goods {
                return Err(Error::LabelMismatch(format!(
                    "goods table has {} entries, data has {n_goods} goods",
                    table.len()
                )));
            }
            table.clone()
        }
        None => GoodDescriptor::numbered(n_goods),
    };

    let first = cells.keys().map(|k| k.2).min().unwrap();
    let last = cells.keys().map(|k| k.2).max().unwrap();
    let n = first.months_until(last) as usize + 1;

    let mut meta = PanelMeta {
        seasonally_adjusted: opts.seasonally_adjusted,
        ..PanelMeta::default()
    };
    let mut series = Vec::with_capacity(3 * n_goods);
    for label in series_labels(n_goods) {
        let values: Vec<Option<f64>> = (0..n)
            .map(|t| cells.get(&(label.variable, label.good, first.offset(t as i64))).copied())
            .collect();
        let present: Vec<usize> = values
            .iter()
            .enumerate()
            .filter_map(|(t, v)| v.map(|_| t))
            .collect();
        let missing_at = |t: usize| Error::MissingCell {
            variable: label.variable.to_string(),
            good: label.good,
            month: first.offset(t as i64).to_string(),
        };
        let (Some(&s_first), Some(&s_last)) = (present.first(), present.last()) else {
            return Err(missing_at(0));
        };
        if s_first != 0 || s_last != n - 1 {
            return Err(Error::RaggedRange {
                series: label.to_string(),
                first: first.offset(s_first as i64).to_string(),
                last: first.offset(s_last as i64).to_string(),
                panel_first: first.to_string(),
                panel_last: last.to_string(),
            });
        }
        let mut filled = Vec::with_capacity(n);
        let mut t = 0;
        while t < n {
            match values[t] {
                Some(v) => {
                    filled.push(v);
                    t += 1;
                }
                None => {
                    // interior gap [t, end); both neighbours exist because the range is full
                    let end = (t..n).find(|&u| values[u].is_some()).unwrap();
                    let gap = end - t;
                    if !opts.interpolate_gaps || gap > 2 {
                        return Err(missing_at(t));
                    }
                    let lo = values[t - 1].unwrap();
                    let hi = values[end].unwrap();
                    for u in t..end {
                        let frac = (u - (t - 1)) as f64 / (gap + 1) as f64;
                        filled.push(lo + frac * (hi - lo));
                        meta.interpolated
                            .push(format!("{label}/{}", first.offset(u as i64)));
                    }
                    t = end;
                }
            }
        }
        series.push(filled);
    }

    let mut panel = Panel::from_series(first, goods, series)?;
    panel.meta = meta;
    Ok(panel)
}

/// Decimal text with 12 significant digits, trailing zeros trimmed.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Write the panel in the long CSV schema, 12 significant digits per value.
pub fn write_panel<W: Write>(panel: &Panel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PANEL_HEADER)?;
    for t in 0..panel.n_months() {
        let date = panel.month(t).to_string();
        for (s, label) in panel.labels().iter().enumerate() {
            w.write_record([
                date.as_str(),
                label.variable.name(),
                &label.good.to_string(),
                &format_sig12(panel.series_at(s)[t]),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<panel>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_csv(n_goods: u32, months: usize) -> String {
        let start = YearMonth::new(1988, 1).unwrap();
        let mut s = String::from("date,variable,good,value\n");
        for t in 0..months {
            for v in Variable::ALL {
                for g in 1..=n_goods {
                    let val = 100.0 + t as f64 + g as f64 * 0.5 + v.index() as f64;
                    s.push_str(&format!("{},{},{g},{val}\n", start.offset(t as i64), v));
                }
            }
        }
        s
    }

    #[test]
    fn year_month_parsing_and_offsets() {
        let m: YearMonth = "2007-12".parse().unwrap();
        assert_eq!(m.offset(1).to_string(), "2008-01");
        assert_eq!(m.offset(-12).to_string(), "2006-12");
        assert_eq!(
            YearMonth::new(1988, 1).unwrap().months_until(YearMonth::new(2007, 12).unwrap()),
            239
        );
        assert!("2007-13".parse::<YearMonth>().is_err());
        assert!("07-01".parse::<YearMonth>().is_err());
    }

    #[test]
    fn loads_full_panel() {
        let p = read_panel(sample_csv(21, 240).as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(p.n_months(), 240);
        assert_eq!(p.n_goods(), 21);
        assert_eq!(p.end_month().to_string(), "2007-12");
        assert_eq!(p.series(Variable::Shipment, 2)[3], 100.0 + 3.0 + 1.5 + 1.0);
    }

    #[test]
    fn accepts_crlf_and_comments() {
        let csv = format!("# produced elsewhere\n{}", sample_csv(2, 5).replace('\n', "\r\n"));
        let p = read_panel(csv.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!((p.n_goods(), p.n_months()), (2, 5));
    }

    #[test]
    fn duplicate_row_rejected() {
        let mut csv = sample_csv(2, 5);
        csv.push_str("1988-03,shipment,2,10.0\n");
        let err = read_panel(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DuplicateCell { good: 2, .. }), "{err}");
    }

    #[test]
    fn missing_cell_named() {
        let csv: String = sample_csv(2, 6)
            .lines()
            .filter(|l| *l != "1988-03,inventory,1,104.5")
            .map(|l| format!("{l}\n"))
            .collect();
        let err = read_panel(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        match err {
            Error::MissingCell {
                variable,
                good,
                month,
            } => {
                assert_eq!((variable.as_str(), good, month.as_str()), ("inventory", 1, "1988-03"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn short_gap_interpolated_when_enabled() {
        let csv: String = sample_csv(2, 6)
            .lines()
            .filter(|l| *l != "1988-03,inventory,1,104.5")
            .map(|l| format!("{l}\n"))
            .collect();
        let opts = LoadOptions {
            interpolate_gaps: true,
            ..Default::default()
        };
        let p = read_panel(csv.as_bytes(), &opts).unwrap();
        assert!((p.series(Variable::Inventory, 0)[2] - 104.5).abs() < 1e-12);
        assert_eq!(p.meta.interpolated, vec!["inventory/1/1988-03".to_string()]);
    }

    #[test]
    fn long_gap_still_rejected() {
        let drop = ["1988-02,production,1,", "1988-03,production,1,", "1988-04,production,1,"];
        let csv: String = sample_csv(1, 8)
            .lines()
            .filter(|l| !drop.iter().any(|d| l.starts_with(d)))
            .map(|l| format!("{l}\n"))
            .collect();
        let opts = LoadOptions {
            interpolate_gaps: true,
            ..Default::default()
        };
        assert!(matches!(
            read_panel(csv.as_bytes(), &opts),
            Err(Error::MissingCell { .. })
        ));
    }

    #[test]
    fn ragged_range_rejected() {
        let csv: String = sample_csv(2, 6)
            .lines()
            .filter(|l| !l.starts_with("1988-06,shipment,2,"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            read_panel(csv.as_bytes(), &LoadOptions::default()),
            Err(Error::RaggedRange { .. })
        ));
    }

    #[test]
    fn non_positive_rejected() {
        let mut csv = sample_csv(1, 3);
        csv = csv.replace("1988-02,shipment,1,102.5", "1988-02,shipment,1,0");
        assert!(matches!(
            read_panel(csv.as_bytes(), &LoadOptions::default()),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn bad_header_rejected() {
        let csv = "month,variable,good,value\n1988-01,production,1,1.0\n";
        assert!(read_panel(csv.as_bytes(), &LoadOptions::default()).is_err());
    }

    #[test]
    fn chop_behaviour() {
        let p = read_panel(sample_csv(21, 240).as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(p.chop(240).unwrap(), p);
        let c = p.chop(234).unwrap();
        assert_eq!(c.n_months(), 234);
        assert_eq!(c.meta.chopped_from, Some(240));
        assert_eq!(c.series_at(5), &p.series_at(5)[..234]);
        assert!(p.chop(1).is_err());
        assert!(p.chop(241).is_err());
    }

    #[test]
    fn split_behaviour() {
        let p = read_panel(sample_csv(2, 258).as_bytes(), &LoadOptions::default()).unwrap();
        let (a, b) = p.split_in_sample(YearMonth::new(2007, 12).unwrap()).unwrap();
        assert_eq!((a.n_months(), b.n_months()), (240, 258));
        let (_, b) = p.split_in_sample(p.end_month()).unwrap();
        assert_eq!(b, p);
        assert!(p.split_in_sample(YearMonth::new(1987, 12).unwrap()).is_err());
        assert!(p.split_in_sample(p.end_month().offset(1)).is_err());
    }

    #[test]
    fn iip_goods_table_shape() {
        let g = GoodDescriptor::iip_goods();
        assert_eq!(g.len(), 21);
        assert!(check_goods(&g).is_ok());
        assert_eq!(g[14].label, "Motor Vehicles");
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(100.0), "100");
        assert_eq!(format_sig12(0.0413926851582), "0.0413926851582");
        assert_eq!(format_sig12(98.7654321098765), "98.7654321099");
        assert_eq!(format_sig12(-1.5), "-1.5");
    }
}
