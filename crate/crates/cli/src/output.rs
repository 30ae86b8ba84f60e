//! Output sinks and the human-readable table views.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use agentstab_core::logic::{Atom, Interpretation};
use agentstab_core::runtime::{Trace, Verdict};
use agentstab_core::scenarios::Scenario;
use agentstab_core::system::MultiAgentSystem;
use serde_json::Value;

use crate::Failure;

pub fn open(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn io_failure(e: io::Error) -> Failure {
    Failure::input(format!("write failed: {e}"))
}

pub fn record(w: &mut dyn Write, v: &Value) -> Result<(), Failure> {
    writeln!(w, "{v}").map_err(io_failure)
}

pub fn set(atoms: &BTreeSet<Atom>) -> String {
    Interpretation::from(atoms.clone()).to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// One block per point; the model column shows the scenario's output
/// predicates when it declares any.
pub fn trace_table(
    w: &mut dyn Write,
    sys: &MultiAgentSystem,
    sc: &Scenario,
    trace: &Trace,
    v: &Verdict,
) -> io::Result<()> {
    let label = if sc.outputs.is_empty() { "M" } else { "OUT" };
    for k in 0..trace.len() {
        match k {
            0 => writeln!(w, "point 0  initial")?,
            _ => writeln!(w, "point {k}  {}", trace.events()[k - 1])?,
        }
        for (i, a) in sys.agents().iter().enumerate() {
            let s = trace.state(k).agent(i);
            let model = trace.model(k, i);
            let shown = match sc.output_projection(&a.id, model) {
                Ok(out) if !sc.outputs.is_empty() => set(&out),
                _ => model.to_string(),
            };
            writeln!(
                w,
                "  {:<6} EDB {}  IN {}  {label} {shown}",
                a.id.as_str(),
                set(&s.edb),
                set(&s.input)
            )?;
        }
    }
    writeln!(w)?;
    verdict_table(w, sc, trace, v)
}

/// The verdict summary; models are cut down to output predicates when the
/// scenario declares any.
pub fn verdict_table(
    w: &mut dyn Write,
    sc: &Scenario,
    trace: &Trace,
    v: &Verdict,
) -> io::Result<()> {
    let shown = |m: &Interpretation| {
        if sc.outputs.is_empty() {
            m.to_string()
        } else {
            set(&m
                .iter()
                .filter(|a| sc.outputs.contains(&a.predicate))
                .cloned()
                .collect())
        }
    };
    let rows = [
        ("status", v.status.as_str().to_string()),
        ("points", trace.len().to_string()),
        ("rounds", trace.rounds().len().to_string()),
        ("quiescence point", trace.quiescence_point().to_string()),
        ("fixpoint point", opt(v.fixpoint)),
        ("rounds to fixpoint", opt(v.rounds_to_fixpoint)),
        ("strongly convergent", v.strongly_convergent.to_string()),
        (
            "convergence model",
            opt(v.convergence_model.as_ref().map(shown)),
        ),
        ("stabilized EDB", set(&v.stabilized_edb)),
        (
            "reference model",
            opt(v.reference_model.as_ref().map(shown)),
        ),
        (
            "weakly stabilizing witnessed",
            v.weakly_stabilizing_witnessed.to_string(),
        ),
    ];
    for (k, val) in rows {
        writeln!(w, "{k:<29} {val}")?;
    }
    if !v.non_convergent.is_empty() {
        writeln!(
            w,
            "{:<29} {}",
            "non-convergent atoms",
            set(&v.non_convergent)
        )?;
    }
    if let Some(e) = &v.reference_error {
        writeln!(w, "{:<29} {e}", "reference error")?;
    }
    if let Some(d) = &v.divergence {
        let samples: Vec<String> = d.samples.iter().map(|(p, x)| format!("{x}@{p}")).collect();
        writeln!(
            w,
            "{:<29} {} at {}: {}",
            "divergence",
            d.family,
            d.agent,
            samples.join(" ")
        )?;
    }
    Ok(())
}

/// Left-aligned columns sized to their widest cell.
pub fn columns(w: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            width[i] = width[i].max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, n)| format!("{c:<n$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    writeln!(w, "{}", line(header.to_vec()))?;
    for r in rows {
        writeln!(w, "{}", line(r.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}
