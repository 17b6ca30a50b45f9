use std::io::Write;

use crate::digraph::Subnet;
use crate::engine::Trace;
use crate::error::Result;
use crate::oracle::SaddleReport;

use super::metrics::MetricsSeries;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per agent and frame: `k,agent,subnet,s0,..,stepsize`. When the
/// subnets' state dimensions differ the shorter states leave trailing cells
/// empty.
pub fn write_trace_csv<W: Write>(w: &mut W, trace: &Trace) -> Result<()> {
    let width = trace.dim(Subnet::First).max(trace.dim(Subnet::Second));
    let mut header = String::from("k,agent,subnet");
    for d in 0..width {
        header.push_str(&format!(",s{d}"));
    }
    writeln!(w, "{header},stepsize")?;
    for k in 0..trace.len() {
        for subnet in [Subnet::First, Subnet::Second] {
            for i in 0..trace.n(subnet) {
                let s = trace.state(k, subnet, i);
                let mut line = format!("{k},{i},{subnet}");
                for d in 0..width {
                    line.push(',');
                    if let Some(v) = s.get(d) {
                        line.push_str(&num(*v));
                    }
                }
                writeln!(w, "{line},{}", num(trace.stepsize(k, subnet, i)))?;
            }
        }
    }
    Ok(())
}

pub fn write_metrics_csv<W: Write>(w: &mut W, m: &MetricsSeries) -> Result<()> {
    writeln!(w, "k,h1,h2,nash_error,saddle_residual")?;
    for r in &m.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.k,
            num(r.h1),
            num(r.h2),
            num(r.nash_error),
            num(r.saddle_residual)
        )?;
    }
    Ok(())
}

/// Long format `k,series,value`: every agent state component (`x1`, `y2`,
/// with `_d` appended when the dimension exceeds 1) when a trace is given,
/// then the enabled metrics.
pub fn write_plot_csv<W: Write>(w: &mut W, trace: Option<&Trace>, m: &MetricsSeries) -> Result<()> {
    writeln!(w, "k,series,value")?;
    let names: Vec<(Subnet, usize, usize, String)> = match trace {
        Some(t) => [Subnet::First, Subnet::Second]
            .into_iter()
            .flat_map(|subnet| {
                let (n, dim) = (t.n(subnet), t.dim(subnet));
                let letter = if subnet == Subnet::First { 'x' } else { 'y' };
                (0..n).flat_map(move |i| {
                    (0..dim).map(move |d| {
                        let name = if dim == 1 {
                            format!("{letter}{}", i + 1)
                        } else {
                            format!("{letter}{}_{d}", i + 1)
                        };
                        (subnet, i, d, name)
                    })
                })
            })
            .collect(),
        None => Vec::new(),
    };
    for r in &m.rows {
        if let Some(t) = trace {
            for (subnet, i, d, name) in &names {
                writeln!(w, "{},{name},{}", r.k, num(t.state(r.k, *subnet, *i)[*d]))?;
            }
        }
        for (name, v) in [
            ("h1", r.h1),
            ("h2", r.h2),
            ("nash_error", r.nash_error),
            ("saddle_residual", r.saddle_residual),
            ("stepsize_max", r.stepsize_max),
        ] {
            if !v.is_nan() {
                writeln!(w, "{},{name},{}", r.k, num(v))?;
            }
        }
    }
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

/// `key,value` lines. Vectors are space separated.
pub fn write_saddle_report<W: Write>(w: &mut W, r: &SaddleReport) -> Result<()> {
    writeln!(w, "key,value")?;
    writeln!(w, "x_star,{}", join(&r.x_star))?;
    writeln!(w, "y_star,{}", join(&r.y_star))?;
    writeln!(w, "value,{}", num(r.value))?;
    if let Some(g) = r.minimax_gap {
        writeln!(w, "minimax_gap,{}", num(g))?;
    }
    if let Some(res) = r.grid_resolution {
        writeln!(w, "grid_resolution,{res}")?;
    }
    if let Some(c) = r.cell_width {
        writeln!(w, "cell_width,{}", num(c))?;
    }
    writeln!(w, "tie_value_spread,{}", num(r.tie_value_spread))?;
    Ok(())
}
