//! Run reports printed by the command-line harness.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

/// Command echo, parameters, results and checks in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub parameters: Vec<(String, Value)>,
    /// Float results carry the tolerance they are meaningful to.
    pub results: Vec<(String, Value, Option<f64>)>,
    pub checks: Vec<Check>,
    pub wall_time: f64,
}

/// Rounds away noise below 1e-12 so reruns print identically.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < 1e-12 {
        return "0".into();
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    r.to_string()
}

fn format_tolerance(t: f64) -> String {
    if t == 0.0 {
        "0".into()
    } else {
        format!("{t:e}")
    }
}

fn format_value(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().unwrap()),
        Value::String(s) => s.clone(),
        Value::Array(a) => {
            let sep = if a.iter().any(Value::is_array) { ";" } else { "," };
            a.iter().map(format_value).collect::<Vec<_>>().join(sep)
        }
        other => other.to_string(),
    }
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            parameters: Vec::new(),
            results: Vec::new(),
            checks: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.parameters.push((key.into(), v.into()));
    }

    /// Exact result (integers, labels, flags).
    pub fn exact(&mut self, key: &str, v: impl Into<Value>) {
        self.results.push((key.into(), v.into(), None));
    }

    pub fn float(&mut self, key: &str, v: f64, tolerance: f64) {
        self.results.push((key.into(), json!(v), Some(tolerance)));
    }

    /// Records a `value < tolerance` check and returns whether it passed.
    pub fn check_below(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        let passed = value < tolerance;
        self.checks.push(Check {
            name: name.into(),
            passed,
            value,
            tolerance,
        });
        passed
    }

    /// Records an exact equality check.
    pub fn check_equal(&mut self, name: &str, got: f64, want: f64) -> bool {
        let passed = got == want;
        self.checks.push(Check {
            name: name.into(),
            passed,
            value: (got - want).abs(),
            tolerance: 0.0,
        });
        passed
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command = {}\n", self.command);
        for (k, v) in &self.parameters {
            out += &format!("param.{k} = {}\n", format_value(v));
        }
        for (k, v, tol) in &self.results {
            out += &format!("{k} = {}\n", format_value(v));
            if let Some(t) = tol {
                out += &format!("{k}.tolerance = {}\n", format_tolerance(*t));
            }
        }
        for c in &self.checks {
            out += &format!("check.{} = {}\n", c.name, if c.passed { "pass" } else { "fail" });
            out += &format!("check.{}.value = {}\n", c.name, format_float(c.value));
            out += &format!("check.{}.tolerance = {}\n", c.name, format_tolerance(c.tolerance));
        }
        out += &format!("status = {}\n", if self.passed() { "pass" } else { "fail" });
        out += &format!("wall_time_s = {:.3}\n", self.wall_time);
        out
    }

    /// Single JSON object; map keys are sorted.
    pub fn to_json(&self) -> Value {
        let params: Map<String, Value> = self.parameters.iter().cloned().collect();
        let results: Map<String, Value> = self
            .results
            .iter()
            .map(|(k, v, t)| match t {
                Some(t) => (k.clone(), json!({ "value": v, "tolerance": t })),
                None => (k.clone(), v.clone()),
            })
            .collect();
        let checks: Map<String, Value> = self
            .checks
            .iter()
            .map(|c| {
                (
                    c.name.clone(),
                    json!({ "passed": c.passed, "value": c.value, "tolerance": c.tolerance }),
                )
            })
            .collect();
        json!({
            "command": self.command,
            "parameters": params,
            "results": results,
            "checks": checks,
            "status": if self.passed() { "pass" } else { "fail" },
            "wall_time_s": self.wall_time,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(0.49999999999999994), "0.5");
        assert_eq!(format_float(-3e-16), "0");
        assert_eq!(format_float(2.0), "2");
    }

    #[test]
    fn text_and_json() {
        let mut r = RunReport::new("fsym");
        r.param("group", "Z2");
        r.float("pentagon_residual", 0.0, 1e-9);
        r.check_below("pentagon", 0.0, 1e-9);
        let t = r.to_text();
        assert!(t.contains("pentagon_residual = 0\n"));
        assert!(t.contains("check.pentagon = pass\n"));
        let j = r.to_json();
        assert_eq!(j["results"]["pentagon_residual"]["tolerance"], json!(1e-9));
        assert_eq!(j["status"], json!("pass"));
    }
}
