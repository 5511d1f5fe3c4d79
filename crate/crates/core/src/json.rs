//! JSON wire formats (concrete `f64` types): intervals as `[lo, hi]`, step
//! functions as value-tagged piece lists, expressions as prefix-notation
//! arrays, plus round-trippable encodings for exponents, certificates, and
//! witnesses so every verdict can be re-validated from its serialized form.

use serde_json::{json, Map, Value};

use crate::carrier;
use crate::dss::{DssCertificate, DssStatus, DssVerdict, EmbeddingProblem, NotDssWitness};
use crate::error::{Error, Result};
use crate::expr;
use crate::modular::PwFun;
use crate::series;
use crate::{
    Carrier, ExponentFunction, ExprNode, ExprPiecewise, Interval, IntervalSet, SequenceExpr,
    StepFunction, TailFamily, TailPrefix,
};

fn bad(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(format!("{what}: expected a number, got {v}")))
}

fn as_obj<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| bad(format!("{what}: expected an object, got {v}")))
}

fn as_arr<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what}: expected an array, got {v}")))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    m.get(key)
        .ok_or_else(|| bad(format!("{what}: missing field \"{key}\"")))
}

// ---------- intervals ----------

pub fn interval_to_json(iv: &Interval) -> Value {
    json!([iv.lo(), iv.hi()])
}

pub fn interval_from_json(v: &Value) -> Result<Interval> {
    let a = as_arr(v, "interval")?;
    if a.len() != 2 {
        return Err(bad(format!("interval: expected [lo, hi], got {v}")));
    }
    Interval::new(as_f64(&a[0], "interval lo")?, as_f64(&a[1], "interval hi")?)
}

pub fn interval_set_to_json(set: &IntervalSet) -> Value {
    Value::Array(set.intervals().iter().map(interval_to_json).collect())
}

pub fn interval_set_from_json(v: &Value) -> Result<IntervalSet> {
    let a = as_arr(v, "interval set")?;
    let ivs = a.iter().map(interval_from_json).collect::<Result<Vec<_>>>()?;
    IntervalSet::new(ivs)
}

// ---------- step functions ----------

pub fn step_to_json(f: &StepFunction) -> Value {
    let pieces: Vec<Value> = f
        .pieces()
        .iter()
        .map(|(set, value)| json!({"set": interval_set_to_json(set), "value": value}))
        .collect();
    json!({ "pieces": pieces })
}

pub fn step_from_json(v: &Value) -> Result<StepFunction> {
    let m = as_obj(v, "step function")?;
    let pieces = as_arr(field(m, "pieces", "step function")?, "step pieces")?;
    let mut out = Vec::with_capacity(pieces.len());
    for p in pieces {
        let pm = as_obj(p, "step piece")?;
        let set = interval_set_from_json(field(pm, "set", "step piece")?)?;
        let value = as_f64(field(pm, "value", "step piece")?, "step value")?;
        out.push((set, value));
    }
    StepFunction::from_pieces(out)
}

// ---------- expressions over x ----------

pub fn expr_node_to_json(e: &ExprNode) -> Value {
    match e {
        expr::ExprNode::Const(c) => json!(c),
        expr::ExprNode::X => json!("x"),
        expr::ExprNode::Ln(a) => json!(["ln", expr_node_to_json(a)]),
        expr::ExprNode::Add(a, b) => json!(["add", expr_node_to_json(a), expr_node_to_json(b)]),
        expr::ExprNode::Sub(a, b) => json!(["sub", expr_node_to_json(a), expr_node_to_json(b)]),
        expr::ExprNode::Mul(a, b) => json!(["mul", expr_node_to_json(a), expr_node_to_json(b)]),
        expr::ExprNode::Div(a, b) => json!(["div", expr_node_to_json(a), expr_node_to_json(b)]),
        expr::ExprNode::Pow(a, b) => json!(["pow", expr_node_to_json(a), expr_node_to_json(b)]),
    }
}

pub fn expr_node_from_json(v: &Value) -> Result<ExprNode> {
    if let Some(c) = v.as_f64() {
        return Ok(ExprNode::constant(c));
    }
    if let Some(s) = v.as_str() {
        if s == "x" {
            return Ok(ExprNode::x());
        }
        return Err(bad(format!("expression: unknown symbol \"{s}\"")));
    }
    let a = as_arr(v, "expression")?;
    let op = a
        .first()
        .and_then(|o| o.as_str())
        .ok_or_else(|| bad(format!("expression: missing operator in {v}")))?;
    let arity = |n: usize| -> Result<()> {
        if a.len() == n + 1 {
            Ok(())
        } else {
            Err(bad(format!("expression: \"{op}\" expects {n} operands")))
        }
    };
    match op {
        "ln" => {
            arity(1)?;
            Ok(ExprNode::ln(expr_node_from_json(&a[1])?))
        }
        "add" | "sub" | "mul" | "div" | "pow" => {
            arity(2)?;
            let x = expr_node_from_json(&a[1])?;
            let y = expr_node_from_json(&a[2])?;
            Ok(match op {
                "add" => ExprNode::add(x, y),
                "sub" => ExprNode::sub(x, y),
                "mul" => ExprNode::mul(x, y),
                "div" => ExprNode::div(x, y),
                _ => ExprNode::pow(x, y),
            })
        }
        _ => Err(bad(format!("expression: unknown operator \"{op}\""))),
    }
}

pub fn expr_piecewise_to_json(f: &ExprPiecewise) -> Value {
    let pieces: Vec<Value> = f
        .pieces()
        .iter()
        .map(|(iv, node)| json!({"interval": interval_to_json(iv), "expr": expr_node_to_json(node)}))
        .collect();
    json!({ "pieces": pieces })
}

pub fn expr_piecewise_from_json(v: &Value) -> Result<ExprPiecewise> {
    let m = as_obj(v, "expression function")?;
    let pieces = as_arr(field(m, "pieces", "expression function")?, "expr pieces")?;
    let mut out = Vec::with_capacity(pieces.len());
    for p in pieces {
        let pm = as_obj(p, "expr piece")?;
        let iv = interval_from_json(field(pm, "interval", "expr piece")?)?;
        let node = expr_node_from_json(field(pm, "expr", "expr piece")?)?;
        out.push((iv, node));
    }
    ExprPiecewise::new(out)
}

// ---------- sequence expressions over n ----------

pub fn seq_expr_to_json(e: &SequenceExpr) -> Value {
    use crate::seq_expr::SequenceExpr as S;
    match e {
        S::Const(c) => json!(c),
        S::N => json!("n"),
        S::Ln(a) => json!(["ln", seq_expr_to_json(a)]),
        S::Add(a, b) => json!(["add", seq_expr_to_json(a), seq_expr_to_json(b)]),
        S::Sub(a, b) => json!(["sub", seq_expr_to_json(a), seq_expr_to_json(b)]),
        S::Mul(a, b) => json!(["mul", seq_expr_to_json(a), seq_expr_to_json(b)]),
        S::Div(a, b) => json!(["div", seq_expr_to_json(a), seq_expr_to_json(b)]),
        S::Pow(a, b) => json!(["pow", seq_expr_to_json(a), seq_expr_to_json(b)]),
    }
}

pub fn seq_expr_from_json(v: &Value) -> Result<SequenceExpr> {
    if let Some(c) = v.as_f64() {
        return Ok(SequenceExpr::constant(c));
    }
    if let Some(s) = v.as_str() {
        if s == "n" {
            return Ok(SequenceExpr::n());
        }
        return Err(bad(format!("sequence expression: unknown symbol \"{s}\"")));
    }
    let a = as_arr(v, "sequence expression")?;
    let op = a
        .first()
        .and_then(|o| o.as_str())
        .ok_or_else(|| bad(format!("sequence expression: missing operator in {v}")))?;
    match op {
        "ln" => {
            if a.len() != 2 {
                return Err(bad("sequence expression: \"ln\" expects 1 operand"));
            }
            Ok(SequenceExpr::ln(seq_expr_from_json(&a[1])?))
        }
        "add" | "sub" | "mul" | "div" | "pow" => {
            if a.len() != 3 {
                return Err(bad(format!(
                    "sequence expression: \"{op}\" expects 2 operands"
                )));
            }
            let x = seq_expr_from_json(&a[1])?;
            let y = seq_expr_from_json(&a[2])?;
            Ok(match op {
                "add" => SequenceExpr::add(x, y),
                "sub" => SequenceExpr::sub(x, y),
                "mul" => SequenceExpr::mul(x, y),
                "div" => SequenceExpr::div(x, y),
                _ => SequenceExpr::pow(x, y),
            })
        }
        _ => Err(bad(format!(
            "sequence expression: unknown operator \"{op}\""
        ))),
    }
}

// ---------- carriers and exponents ----------

fn tail_prefix_to_json(p: &TailPrefix) -> Value {
    match p {
        crate::tail::TailPrefix::Step(f) => {
            let mut v = step_to_json(f);
            v["kind"] = json!("step");
            v
        }
        crate::tail::TailPrefix::Expr(f) => {
            let mut v = expr_piecewise_to_json(f);
            v["kind"] = json!("expr");
            v
        }
    }
}

fn tail_prefix_from_json(v: &Value) -> Result<TailPrefix> {
    let m = as_obj(v, "tail prefix")?;
    match field(m, "kind", "tail prefix")?.as_str() {
        Some("step") => Ok(crate::tail::TailPrefix::Step(step_from_json(v)?)),
        Some("expr") => Ok(crate::tail::TailPrefix::Expr(expr_piecewise_from_json(v)?)),
        other => Err(bad(format!("tail prefix: unknown kind {other:?}"))),
    }
}

pub fn tail_to_json(t: &TailFamily) -> Value {
    json!({
        "prefix": tail_prefix_to_json(t.prefix()),
        "x_n": seq_expr_to_json(t.endpoints()),
        "v_n": seq_expr_to_json(t.values()),
        "n0": t.n0(),
    })
}

pub fn tail_from_json(v: &Value) -> Result<TailFamily> {
    let m = as_obj(v, "tail family")?;
    let prefix = tail_prefix_from_json(field(m, "prefix", "tail family")?)?;
    let endpoints = seq_expr_from_json(field(m, "x_n", "tail family")?)?;
    let values = seq_expr_from_json(field(m, "v_n", "tail family")?)?;
    let n0 = field(m, "n0", "tail family")?
        .as_u64()
        .ok_or_else(|| bad("tail family: n0 must be a nonnegative integer"))?;
    TailFamily::new(prefix, endpoints, values, n0)
}

pub fn carrier_to_json(c: &Carrier) -> Value {
    match c {
        carrier::Carrier::Step(f) => {
            let mut v = step_to_json(f);
            v["kind"] = json!("step");
            v
        }
        carrier::Carrier::Expr(f) => {
            let mut v = expr_piecewise_to_json(f);
            v["kind"] = json!("expr");
            v
        }
        carrier::Carrier::Tail(t) => {
            let mut v = tail_to_json(t);
            v["kind"] = json!("tail");
            v
        }
    }
}

pub fn carrier_from_json(v: &Value) -> Result<Carrier> {
    let m = as_obj(v, "carrier")?;
    match field(m, "kind", "carrier")?.as_str() {
        Some("step") => Ok(carrier::Carrier::Step(step_from_json(v)?)),
        Some("expr") => Ok(carrier::Carrier::Expr(expr_piecewise_from_json(v)?)),
        Some("tail") => Ok(carrier::Carrier::Tail(tail_from_json(v)?)),
        other => Err(bad(format!("carrier: unknown kind {other:?}"))),
    }
}

pub fn exponent_to_json(p: &ExponentFunction) -> Value {
    carrier_to_json(p.carrier())
}

pub fn exponent_from_json(v: &Value) -> Result<ExponentFunction> {
    ExponentFunction::new(carrier_from_json(v)?)
}

// ---------- measurable functions (norm/modular inputs) ----------

pub fn pwfun_to_json(f: &PwFun<f64>) -> Value {
    match f {
        PwFun::Step(s) => {
            let mut v = step_to_json(s);
            v["kind"] = json!("step");
            v
        }
        PwFun::Expr(e) => {
            let mut v = expr_piecewise_to_json(e);
            v["kind"] = json!("expr");
            v
        }
    }
}

pub fn pwfun_from_json(v: &Value) -> Result<PwFun<f64>> {
    let m = as_obj(v, "function")?;
    // untagged step inputs are accepted for convenience
    match m.get("kind").and_then(|k| k.as_str()) {
        Some("step") | None => Ok(PwFun::Step(step_from_json(v)?)),
        Some("expr") => Ok(PwFun::Expr(expr_piecewise_from_json(v)?)),
        Some(other) => Err(bad(format!("function: unknown kind \"{other}\""))),
    }
}

// ---------- series certificates ----------

pub fn series_cert_to_json(c: &series::Certificate<f64>) -> Value {
    match c {
        series::Certificate::Comparison { s, c, n_start, window } => json!({
            "type": "comparison", "s": s, "c": c, "n_start": n_start, "window": window,
        }),
        series::Certificate::Geometric { ratio, n_start, window } => json!({
            "type": "geometric", "ratio": ratio, "n_start": n_start, "window": window,
        }),
        series::Certificate::HarmonicLower { c, n_start, window } => json!({
            "type": "harmonic_lower", "c": c, "n_start": n_start, "window": window,
        }),
    }
}

pub fn series_cert_from_json(v: &Value) -> Result<series::Certificate<f64>> {
    let m = as_obj(v, "series certificate")?;
    let what = "series certificate";
    let n_start = field(m, "n_start", what)?
        .as_u64()
        .ok_or_else(|| bad("series certificate: n_start must be an integer"))?;
    let window = field(m, "window", what)?
        .as_u64()
        .ok_or_else(|| bad("series certificate: window must be an integer"))?;
    match field(m, "type", what)?.as_str() {
        Some("comparison") => Ok(series::Certificate::Comparison {
            s: as_f64(field(m, "s", what)?, "s")?,
            c: as_f64(field(m, "c", what)?, "c")?,
            n_start,
            window,
        }),
        Some("geometric") => Ok(series::Certificate::Geometric {
            ratio: as_f64(field(m, "ratio", what)?, "ratio")?,
            n_start,
            window,
        }),
        Some("harmonic_lower") => Ok(series::Certificate::HarmonicLower {
            c: as_f64(field(m, "c", what)?, "c")?,
            n_start,
            window,
        }),
        other => Err(bad(format!("series certificate: unknown type {other:?}"))),
    }
}

// ---------- inclusion problems, certificates, witnesses, verdicts ----------

pub fn problem_to_json(prob: &EmbeddingProblem<f64>) -> Value {
    json!({ "p": exponent_to_json(&prob.p), "q": exponent_to_json(&prob.q) })
}

pub fn problem_from_json(v: &Value) -> Result<EmbeddingProblem<f64>> {
    let m = as_obj(v, "inclusion problem")?;
    Ok(EmbeddingProblem::new(
        exponent_from_json(field(m, "p", "inclusion problem")?)?,
        exponent_from_json(field(m, "q", "inclusion problem")?)?,
    ))
}

pub fn dss_cert_to_json(c: &DssCertificate<f64>) -> Value {
    match c {
        DssCertificate::UniformGap { delta } => json!({"kind": "uniform_gap", "delta": delta}),
        DssCertificate::DisjointRanges => json!({"kind": "disjoint_ranges"}),
        DssCertificate::DyadicSum { x_gen, series } => json!({
            "kind": "dyadic_sum",
            "x_gen": seq_expr_to_json(x_gen),
            "series": series_cert_to_json(series),
        }),
        DssCertificate::LevelSetSum { r_gen, series } => json!({
            "kind": "level_set_sum",
            "r_gen": seq_expr_to_json(r_gen),
            "series": series_cert_to_json(series),
        }),
    }
}

pub fn dss_cert_from_json(v: &Value) -> Result<DssCertificate<f64>> {
    let m = as_obj(v, "certificate")?;
    match field(m, "kind", "certificate")?.as_str() {
        Some("uniform_gap") => Ok(DssCertificate::UniformGap {
            delta: as_f64(field(m, "delta", "certificate")?, "delta")?,
        }),
        Some("disjoint_ranges") => Ok(DssCertificate::DisjointRanges),
        Some("dyadic_sum") => Ok(DssCertificate::DyadicSum {
            x_gen: seq_expr_from_json(field(m, "x_gen", "certificate")?)?,
            series: series_cert_from_json(field(m, "series", "certificate")?)?,
        }),
        Some("level_set_sum") => Ok(DssCertificate::LevelSetSum {
            r_gen: seq_expr_from_json(field(m, "r_gen", "certificate")?)?,
            series: series_cert_from_json(field(m, "series", "certificate")?)?,
        }),
        other => Err(bad(format!("certificate: unknown kind {other:?}"))),
    }
}

pub fn witness_to_json(w: &NotDssWitness<f64>) -> Value {
    json!({
        "r": w.r,
        "x_seq": w.x_seq,
        "sets": w.sets.iter().map(interval_set_to_json).collect::<Vec<_>>(),
        "s_seq": w.s_seq.iter().map(step_to_json).collect::<Vec<_>>(),
        "equiv_constant": w.equiv_constant,
    })
}

pub fn witness_from_json(v: &Value) -> Result<NotDssWitness<f64>> {
    let m = as_obj(v, "witness")?;
    let x_seq = as_arr(field(m, "x_seq", "witness")?, "witness x_seq")?
        .iter()
        .map(|x| as_f64(x, "witness x"))
        .collect::<Result<Vec<_>>>()?;
    let sets = as_arr(field(m, "sets", "witness")?, "witness sets")?
        .iter()
        .map(interval_set_from_json)
        .collect::<Result<Vec<_>>>()?;
    let s_seq = as_arr(field(m, "s_seq", "witness")?, "witness s_seq")?
        .iter()
        .map(step_from_json)
        .collect::<Result<Vec<_>>>()?;
    Ok(NotDssWitness {
        r: as_f64(field(m, "r", "witness")?, "witness r")?,
        x_seq,
        sets,
        s_seq,
        equiv_constant: as_f64(field(m, "equiv_constant", "witness")?, "equiv_constant")?,
    })
}

pub fn status_str(s: DssStatus) -> &'static str {
    match s {
        DssStatus::Dss => "DSS",
        DssStatus::NotDss => "NOT_DSS",
        DssStatus::Unknown => "UNKNOWN",
    }
}

pub fn verdict_to_json(v: &DssVerdict<f64>) -> Value {
    json!({
        "status": status_str(v.status),
        "certificate": v.certificate.as_ref().map(dss_cert_to_json),
        "witness": v.witness.as_ref().map(witness_to_json),
        "diagnostics": v.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step::Cell;

    #[test]
    fn step_round_trip() {
        let f = StepFunction::from_cells(vec![
            Cell { lo: 0.0, hi: 0.25, value: 2.0 },
            Cell { lo: 0.5, hi: 1.0, value: -1.5 },
        ])
        .unwrap();
        let v = step_to_json(&f);
        let g = step_from_json(&v).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn expr_round_trip_matches_prefix_notation() {
        // (1 - x)^2
        let v: Value = serde_json::from_str(r#"["pow", ["sub", 1, "x"], 2]"#).unwrap();
        let node = expr_node_from_json(&v).unwrap();
        assert!((node.eval(0.5).unwrap() - 0.25).abs() < 1e-15);
        let back = expr_node_to_json(&node);
        assert_eq!(expr_node_from_json(&back).unwrap(), node);
    }

    #[test]
    fn seq_expr_round_trip() {
        let e = SequenceExpr::sub(
            SequenceExpr::constant(1.0),
            SequenceExpr::pow(
                SequenceExpr::div(SequenceExpr::constant(1.0), SequenceExpr::n()),
                SequenceExpr::sub(SequenceExpr::n(), SequenceExpr::constant(1.0)),
            ),
        );
        let v = seq_expr_to_json(&e);
        assert_eq!(seq_expr_from_json(&v).unwrap(), e);
    }

    #[test]
    fn exponent_kinds_round_trip() {
        let step = ExponentFunction::new(carrier::Carrier::Step(
            StepFunction::constant(2.0).unwrap(),
        ))
        .unwrap();
        let v = exponent_to_json(&step);
        assert_eq!(v["kind"], "step");
        let back = exponent_from_json(&v).unwrap();
        assert_eq!(back.carrier(), step.carrier());
    }

    #[test]
    fn series_certificates_round_trip() {
        let certs = [
            series::Certificate::Comparison { s: 2.0, c: 1.0, n_start: 1, window: 1000 },
            series::Certificate::Geometric { ratio: 0.5, n_start: 3, window: 1000 },
            series::Certificate::HarmonicLower { c: 1.0, n_start: 1, window: 1000 },
        ];
        for c in certs {
            let v = series_cert_to_json(&c);
            assert_eq!(series_cert_from_json(&v).unwrap(), c);
        }
    }

    #[test]
    fn dss_certificate_round_trip() {
        let c = DssCertificate::DyadicSum {
            x_gen: crate::dss::default_x_gen(),
            series: series::Certificate::Geometric { ratio: 0.9, n_start: 1, window: 1000 },
        };
        let v = dss_cert_to_json(&c);
        assert_eq!(dss_cert_from_json(&v).unwrap(), c);
    }

    #[test]
    fn malformed_inputs_are_rejected_with_diagnostics() {
        let v: Value = serde_json::from_str(r#"{"pieces": [{"value": 1.0}]}"#).unwrap();
        let err = step_from_json(&v).unwrap_err();
        assert!(err.to_string().contains("set"), "{err}");
        let v: Value = serde_json::from_str(r#"["hypot", 1, 2]"#).unwrap();
        assert!(expr_node_from_json(&v).is_err());
    }
}
