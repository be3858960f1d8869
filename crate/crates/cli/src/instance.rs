//! Line-oriented instance files: `key = value`, one instance per file,
//! with referenced base instances imported by path.
//!
//! ```text
//! # a curve instance
//! kind = curve
//! points = [1, 2, 3, 4]
//! coeffs = geometric(1/2, 1/2)
//! truncation = 64
//! flag = point(0)
//! ```
//!
//! Unknown keys are rejected with their line number. All numbers are exact
//! rationals in `a/b` or integer form.

use crate::expr::{parse_element, parse_scalar, VarContext};
use anyhow::{anyhow, bail, Context, Result};
use okounkov_core::{
    curve_section_ring, explicit_monomial, generated, parity_monomial, polytope_monomial,
    subalgebra_rescale, tail_family, CoeffRule, CurveLocus, Flag, GradedAlgebraModel,
    InfiniteDivisorSpec, ModelKind, RationalFunction, Scalar, SliceRule,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug)]
pub struct ParsedInstance {
    pub name: String,
    pub model: Arc<GradedAlgebraModel>,
    pub flag: Option<Flag>,
    /// Soft findings from the parse-time validation pass (for example
    /// closure failures of a non-algebra family). Hard failures abort the
    /// parse instead.
    pub warnings: Vec<String>,
}

struct RawEntry {
    line: usize,
    value: String,
    used: std::cell::Cell<bool>,
}

struct RawFile {
    path: PathBuf,
    entries: Vec<(String, RawEntry)>,
}

impl RawFile {
    fn get(&self, key: &str) -> Option<&RawEntry> {
        self.entries.iter().find_map(|(k, e)| {
            if k == key {
                e.used.set(true);
                Some(e)
            } else {
                None
            }
        })
    }

    fn get_all(&self, key: &str) -> Vec<&RawEntry> {
        self.entries
            .iter()
            .filter_map(|(k, e)| {
                if k == key {
                    e.used.set(true);
                    Some(e)
                } else {
                    None
                }
            })
            .collect()
    }

    fn require(&self, key: &str) -> Result<&RawEntry> {
        self.get(key)
            .ok_or_else(|| anyhow!("{}: missing key `{key}`", self.path.display()))
    }

    fn unused_key(&self) -> Option<(&str, usize)> {
        self.entries
            .iter()
            .find(|(_, e)| !e.used.get())
            .map(|(k, e)| (k.as_str(), e.line))
    }
}

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "points",
    "coeffs",
    "require_convergent",
    "slice",
    "vertices",
    "base",
    "generator",
    "k",
    "truncation",
    "flag",
];

fn read_raw(path: &Path) -> Result<RawFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read instance file {}", path.display()))?;
    let mut entries = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "{}:{line_no}: expected `key = value`, found `{line}`",
                path.display()
            );
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            bail!("{}:{line_no}: unknown key `{key}`", path.display());
        }
        entries.push((
            key,
            RawEntry {
                line: line_no,
                value: value.trim().to_string(),
                used: std::cell::Cell::new(false),
            },
        ));
    }
    Ok(RawFile {
        path: path.to_path_buf(),
        entries,
    })
}

fn err_at(raw: &RawFile, entry: &RawEntry, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("{}:{}: {msg}", raw.path.display(), entry.line)
}

/// Split a bracketed comma list `[a, b, c]` into item strings; nested
/// brackets and parentheses stay intact.
fn split_list(s: &str) -> Result<Vec<String>> {
    let s = s.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| anyhow!("expected a bracketed list, found `{s}`"))?;
    split_level(inner, ',')
}

fn split_level(inner: &str, sep: char) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '[' | '(' => {
                depth += 1;
                cur.push(c);
            }
            ']' | ')' => {
                depth -= 1;
                if depth < 0 {
                    bail!("unbalanced brackets in `{inner}`");
                }
                cur.push(c);
            }
            c if c == sep && depth == 0 => {
                out.push(cur.trim().to_string());
                cur = String::new();
            }
            c => cur.push(c),
        }
    }
    if depth != 0 {
        bail!("unbalanced brackets in `{inner}`");
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    Ok(out)
}

/// `name(arg1, arg2, ...)` -> (name, args)
fn split_call(s: &str) -> Option<(String, Vec<String>)> {
    let s = s.trim();
    let open = s.find('(')?;
    if !s.ends_with(')') {
        return None;
    }
    let name = s[..open].trim().to_string();
    let inner = &s[open + 1..s.len() - 1];
    let args = split_level(inner, ',').ok()?;
    Some((name, args))
}

fn parse_locus(s: &str) -> Result<CurveLocus> {
    if s.trim() == "inf" {
        Ok(CurveLocus::Infinity)
    } else {
        Ok(CurveLocus::Finite(parse_scalar(s)?))
    }
}

fn parse_flag(value: &str) -> Result<Flag> {
    let (name, args) = split_call(value)
        .ok_or_else(|| anyhow!("expected `point(...)` or `coordinate(...)`, found `{value}`"))?;
    match name.as_str() {
        "point" => {
            if args.len() != 1 {
                bail!("point(...) takes one argument");
            }
            Ok(Flag::CurvePoint(parse_locus(&args[0])?))
        }
        "coordinate" => {
            if args.is_empty() || args.len() > 2 {
                bail!("coordinate(center) or coordinate(center, order=[..])");
            }
            let center: Vec<Scalar> = split_list(&args[0])?
                .iter()
                .map(|s| parse_scalar(s))
                .collect::<Result<_>>()?;
            let order: Vec<usize> = if args.len() == 2 {
                let order_arg = args[1]
                    .strip_prefix("order")
                    .and_then(|t| t.trim_start().strip_prefix('='))
                    .ok_or_else(|| anyhow!("second coordinate argument must be `order=[..]`"))?;
                split_list(order_arg.trim())?
                    .iter()
                    .map(|s| {
                        let i: usize = s.parse().map_err(|_| anyhow!("bad order index `{s}`"))?;
                        if i == 0 {
                            bail!("order indices are 1-based");
                        }
                        Ok(i - 1)
                    })
                    .collect::<Result<_>>()?
            } else {
                (0..center.len()).collect()
            };
            Ok(Flag::Coordinate { order, center })
        }
        other => bail!("unknown flag kind `{other}`"),
    }
}

fn parse_curve(raw: &RawFile, truncation: u32) -> Result<Arc<GradedAlgebraModel>> {
    let points_entry = raw.require("points")?;
    let points: Vec<CurveLocus> = split_list(&points_entry.value)
        .map_err(|e| err_at(raw, points_entry, e))?
        .iter()
        .map(|s| parse_locus(s))
        .collect::<Result<_>>()
        .map_err(|e| err_at(raw, points_entry, e))?;
    let coeffs_entry = raw.require("coeffs")?;
    let cv = coeffs_entry.value.trim();
    let require_convergent = match raw.get("require_convergent") {
        None => false,
        Some(e) => match e.value.trim() {
            "true" => true,
            "false" => false,
            other => return Err(err_at(raw, e, format!("expected true or false, got `{other}`"))),
        },
    };
    let (support, rule): (Vec<(CurveLocus, Scalar)>, Option<CoeffRule>) = if cv.starts_with('[') {
        let coeffs: Vec<Scalar> = split_list(cv)
            .map_err(|e| err_at(raw, coeffs_entry, e))?
            .iter()
            .map(|s| parse_scalar(s))
            .collect::<Result<_>>()
            .map_err(|e| err_at(raw, coeffs_entry, e))?;
        if coeffs.len() != points.len() {
            return Err(err_at(
                raw,
                coeffs_entry,
                format!("{} coefficients for {} points", coeffs.len(), points.len()),
            ));
        }
        (points.into_iter().zip(coeffs).collect(), None)
    } else {
        let (name, args) = split_call(cv)
            .ok_or_else(|| err_at(raw, coeffs_entry, "expected a list or a rule call"))?;
        let params: Vec<Scalar> = args
            .iter()
            .map(|s| parse_scalar(s))
            .collect::<Result<_>>()
            .map_err(|e| err_at(raw, coeffs_entry, e))?;
        let rule = match (name.as_str(), params.as_slice()) {
            ("geometric", [scale, ratio]) => CoeffRule::Geometric {
                scale: scale.clone(),
                ratio: ratio.clone(),
            },
            ("inverse_squares", [scale]) => CoeffRule::InverseSquares {
                scale: scale.clone(),
            },
            ("harmonic", [scale]) => CoeffRule::Harmonic {
                scale: scale.clone(),
            },
            _ => {
                return Err(err_at(
                    raw,
                    coeffs_entry,
                    format!("unknown coefficient rule `{name}` or wrong arity"),
                ))
            }
        };
        if require_convergent && !rule.summable() {
            return Err(err_at(
                raw,
                coeffs_entry,
                "divergent coefficient mass but require_convergent = true",
            ));
        }
        let support = points
            .into_iter()
            .enumerate()
            .map(|(i, p)| (p, rule.coeff(i as u64 + 1)))
            .collect();
        (support, Some(rule))
    };
    let name = raw
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "curve".to_string());
    curve_section_ring(InfiniteDivisorSpec { support, rule }, truncation, &name)
        .map_err(|e| anyhow!("{}: {e}", raw.path.display()))
}

fn parse_monomial(raw: &RawFile, truncation: u32) -> Result<Arc<GradedAlgebraModel>> {
    let slice_entry = raw.require("slice")?;
    let sv = slice_entry.value.trim();
    if sv == "parity" {
        return Ok(parity_monomial(truncation));
    }
    let (name, args) =
        split_call(sv).ok_or_else(|| err_at(raw, slice_entry, "expected a slice rule"))?;
    match name.as_str() {
        "polytope" => {
            if args.len() != 1 {
                return Err(err_at(raw, slice_entry, "polytope([[..], [..], ...])"));
            }
            let vertices: Vec<Vec<Scalar>> = split_list(&args[0])
                .map_err(|e| err_at(raw, slice_entry, e))?
                .iter()
                .map(|v| {
                    split_list(v)?
                        .iter()
                        .map(|s| parse_scalar(s))
                        .collect::<Result<Vec<Scalar>>>()
                })
                .collect::<Result<_>>()
                .map_err(|e| err_at(raw, slice_entry, e))?;
            polytope_monomial(vertices, truncation)
                .map_err(|e| anyhow!("{}: {e}", raw.path.display()))
        }
        "explicit" => {
            // explicit(1: [[0], [1]]; 2: [[0]])
            let inner = args.join(",");
            let mut slices: BTreeMap<u32, Vec<Vec<i64>>> = BTreeMap::new();
            for part in split_level(&inner, ';').map_err(|e| err_at(raw, slice_entry, e))? {
                let (deg, list) = part
                    .split_once(':')
                    .ok_or_else(|| err_at(raw, slice_entry, "expected `degree: [[..]]`"))?;
                let deg: u32 = deg
                    .trim()
                    .parse()
                    .map_err(|_| err_at(raw, slice_entry, "bad degree"))?;
                let vecs: Vec<Vec<i64>> = split_list(list.trim())
                    .map_err(|e| err_at(raw, slice_entry, e))?
                    .iter()
                    .map(|v| {
                        split_list(v)?
                            .iter()
                            .map(|s| {
                                s.parse::<i64>().map_err(|_| anyhow!("bad exponent `{s}`"))
                            })
                            .collect::<Result<Vec<i64>>>()
                    })
                    .collect::<Result<_>>()
                    .map_err(|e| err_at(raw, slice_entry, e))?;
                slices.insert(deg, vecs);
            }
            explicit_monomial(slices, truncation)
                .map_err(|e| anyhow!("{}: {e}", raw.path.display()))
        }
        other => Err(err_at(raw, slice_entry, format!("unknown slice rule `{other}`"))),
    }
}

/// Parse an instance file into a validated model and optional flag choice.
pub fn parse_instance(path: &Path) -> Result<ParsedInstance> {
    let raw = read_raw(path)?;
    let kind_entry = raw.require("kind")?;
    let truncation: u32 = {
        let e = raw.require("truncation")?;
        e.value
            .trim()
            .parse()
            .map_err(|_| err_at(&raw, e, "truncation must be a positive integer"))?
    };
    let model: Arc<GradedAlgebraModel> = match kind_entry.value.trim() {
        "curve" => {
            // a bare rule with no explicit points is a tail family
            if raw.get("points").is_none() {
                let e = raw.require("coeffs")?;
                let (name, args) = split_call(e.value.trim())
                    .ok_or_else(|| err_at(&raw, e, "expected a coefficient rule"))?;
                let params: Vec<Scalar> = args
                    .iter()
                    .map(|s| parse_scalar(s))
                    .collect::<Result<_>>()
                    .map_err(|er| err_at(&raw, e, er))?;
                let require_convergent = raw
                    .get("require_convergent")
                    .map(|e| e.value.trim() == "true")
                    .unwrap_or(false);
                tail_family(&name, &params, truncation, require_convergent)
                    .map_err(|er| anyhow!("{}: {er}", raw.path.display()))?
            } else {
                parse_curve(&raw, truncation)?
            }
        }
        "monomial" => parse_monomial(&raw, truncation)?,
        "generated" => {
            let base_entry = raw.require("base")?;
            let base_path = raw
                .path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(base_entry.value.trim());
            let base = parse_instance(&base_path)?;
            let ctx = VarContext {
                nvars: base.model.nvars(),
            };
            let mut generators: Vec<(u32, RationalFunction)> = Vec::new();
            for e in raw.get_all("generator") {
                let (deg, expr) = e
                    .value
                    .split_once(':')
                    .ok_or_else(|| err_at(&raw, e, "expected `degree : element`"))?;
                let deg: u32 = deg
                    .trim()
                    .parse()
                    .map_err(|_| err_at(&raw, e, "bad generator degree"))?;
                let el = parse_element(expr.trim(), &ctx).map_err(|er| err_at(&raw, e, er))?;
                generators.push((deg, el));
            }
            if generators.is_empty() {
                return Err(err_at(&raw, base_entry, "generated instance with no generators"));
            }
            generated(base.model, generators, truncation)
                .map_err(|e| anyhow!("{}: {e}", raw.path.display()))?
        }
        "rescale" => {
            let base_entry = raw.require("base")?;
            let base_path = raw
                .path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(base_entry.value.trim());
            let base = parse_instance(&base_path)?;
            let k_entry = raw.require("k")?;
            let k: u32 = k_entry
                .value
                .trim()
                .parse()
                .map_err(|_| err_at(&raw, k_entry, "k must be a positive integer"))?;
            subalgebra_rescale(&base.model, k)
                .map_err(|e| anyhow!("{}: {e}", raw.path.display()))?
        }
        other => return Err(err_at(&raw, kind_entry, format!("unknown kind `{other}`"))),
    };
    let flag = match raw.get("flag") {
        None => None,
        Some(e) => {
            let f = parse_flag(&e.value).map_err(|er| err_at(&raw, e, er))?;
            f.validate_for(model.nvars())
                .map_err(|er| err_at(&raw, e, er))?;
            validate_flag_choice(&model, &f).map_err(|er| err_at(&raw, e, er))?;
            Some(f)
        }
    };
    if let Some((key, line)) = raw.unused_key() {
        bail!(
            "{}:{line}: key `{key}` is not valid for kind `{}`",
            raw.path.display(),
            kind_entry.value.trim()
        );
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "instance".to_string());
    // structural validation pass: a broken unit piece is a hard failure,
    // anything else becomes a warning so non-algebra families (the parity
    // instance) still reach the diagnostics
    let report = okounkov_core::validate_model(&model, 0, 0)
        .map_err(|e| anyhow!("{}: validation failed: {e}", path.display()))?;
    if !report.unit_piece.passed() {
        bail!(
            "{}: the degree-zero piece is not the one-dimensional space of constants",
            path.display()
        );
    }
    let mut warnings = Vec::new();
    for (m1, m2, check) in report.closure_failures() {
        if let okounkov_core::algebra::CheckOutcome::Fail { witness } = check {
            warnings.push(format!(
                "closure fails at degrees ({m1}, {m2}): {witness}"
            ));
        }
    }
    let tail_zeros = report.tail_zero_degrees();
    if !tail_zeros.is_empty() {
        warnings.push(format!("zero pieces at large degrees {tail_zeros:?}"));
    }
    Ok(ParsedInstance {
        name,
        model,
        flag,
        warnings,
    })
}

/// Reject flag choices that collide with the instance's finitely many
/// constraints: curve flags at support points, coordinate centers on a
/// denominator locus. Rejection keeps runs deterministic; no perturbation
/// is attempted.
pub fn validate_flag_choice(model: &GradedAlgebraModel, flag: &Flag) -> Result<()> {
    match (model.kind(), flag) {
        (ModelKind::CurveSectionRing { divisor }, Flag::CurvePoint(locus)) => {
            if divisor.support.iter().any(|(p, _)| p == locus) {
                bail!("flag point {locus} lies in the instance support; pick a point off the support");
            }
            Ok(())
        }
        (ModelKind::LaurentMonomial { rule }, Flag::Coordinate { center, .. }) => {
            let negative_vars: Vec<usize> = match rule {
                SliceRule::Parity => Vec::new(),
                SliceRule::Polytope { vertices } => (0..center.len())
                    .filter(|&i| vertices.iter().any(|v| v[i].is_negative()))
                    .collect(),
                SliceRule::Explicit { slices } => (0..center.len())
                    .filter(|&i| {
                        slices
                            .values()
                            .flat_map(|s| s.iter())
                            .any(|v| v[i] < 0)
                    })
                    .collect(),
            };
            for i in negative_vars {
                if center[i].is_zero() {
                    bail!(
                        "coordinate center component {} must be nonzero: the instance has poles \
                         along that hyperplane",
                        i + 1
                    );
                }
            }
            Ok(())
        }
        (ModelKind::Generated { ambient, .. }, f) => validate_flag_choice(ambient, f),
        (ModelKind::Rescale { base, .. }, f) => validate_flag_choice(base, f),
        _ => Ok(()),
    }
}

/// Default flag for analyses that need one and no flag key was given.
pub fn default_flag(model: &GradedAlgebraModel) -> Result<Flag> {
    if model.is_curve() {
        let inf = Flag::at_infinity();
        if validate_flag_choice(model, &inf).is_ok() {
            return Ok(inf);
        }
        for q in 0..i64::MAX {
            let f = Flag::at_point(Scalar::from_int(q));
            if validate_flag_choice(model, &f).is_ok() {
                return Ok(f);
            }
        }
        unreachable!("finitely many support points")
    } else {
        let origin = Flag::coordinate_origin(model.nvars());
        if validate_flag_choice(model, &origin).is_ok() {
            Ok(origin)
        } else {
            bail!("no default flag applies: declare one in the instance file")
        }
    }
}
