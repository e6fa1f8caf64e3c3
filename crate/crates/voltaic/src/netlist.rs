//! Line-oriented netlist format for nonlinear resistive networks.
//!
//! ```text
//! # comment
//! NODES <n>        required first directive
//! GROUND <idx>     required, exactly once
//! R  <j> <k> <g>   resistor, conductance g > 0
//! D  <j> <k>       diode, constraint v_j <= v_k
//! VS <j> <k> <v0>  voltage source, v_j = v_k + v0
//! CS <j> <k> <i0>  current source, signed current i0 flowing j -> k
//! ```
//!
//! Tokens are whitespace-separated; node indices are 0-based decimal
//! integers; `#` starts a comment anywhere on a line.

use std::error::Error;
use std::fmt;

use crate::circuit::{CircuitError, CircuitGraph, CurrentSource, Diode, Resistor, VoltageSource};

/// Netlist parsing failure.
#[derive(Debug, Clone, PartialEq)]
pub enum NetlistError {
    /// Malformed line: wrong directive, token count, or unparseable number.
    Syntax { line: usize, message: String },
    /// The first directive must be `NODES <n>`.
    MissingNodes,
    /// `GROUND` appeared more than once.
    DuplicateGround { line: usize },
    /// No `GROUND` directive.
    MissingGround,
    /// A node index on this line is outside `[0, n_nodes)`.
    DanglingNode { line: usize, node: usize, n_nodes: usize },
    /// The assembled branch lists violate a network invariant.
    Invalid(CircuitError),
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetlistError::Syntax { line, message } => write!(f, "line {line}: {message}"),
            NetlistError::MissingNodes => write!(f, "netlist must start with a NODES directive"),
            NetlistError::DuplicateGround { line } => write!(f, "line {line}: duplicate GROUND"),
            NetlistError::MissingGround => write!(f, "netlist has no GROUND directive"),
            NetlistError::DanglingNode { line, node, n_nodes } => {
                write!(f, "line {line}: node index {node} out of range for {n_nodes} nodes")
            }
            NetlistError::Invalid(e) => write!(f, "invalid network: {e}"),
        }
    }
}

impl Error for NetlistError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            NetlistError::Invalid(e) => Some(e),
            _ => None,
        }
    }
}

impl From<CircuitError> for NetlistError {
    fn from(e: CircuitError) -> Self {
        NetlistError::Invalid(e)
    }
}

/// Parses netlist text into a validated [`CircuitGraph`].
pub fn parse_netlist(text: &str) -> Result<CircuitGraph, NetlistError> {
    let mut n_nodes: Option<usize> = None;
    let mut ground: Option<usize> = None;
    let mut resistors = Vec::new();
    let mut current_sources = Vec::new();
    let mut voltage_sources = Vec::new();
    let mut diodes = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let syntax = |message: String| NetlistError::Syntax { line, message };

        let parse_index = |tok: &str| -> Result<usize, NetlistError> {
            tok.parse::<usize>()
                .map_err(|_| syntax(format!("expected node index, found `{tok}`")))
        };
        let parse_value = |tok: &str| -> Result<f64, NetlistError> {
            tok.parse::<f64>()
                .map_err(|_| syntax(format!("expected number, found `{tok}`")))
        };
        let expect_args = |n: usize| -> Result<(), NetlistError> {
            if tokens.len() != n + 1 {
                Err(syntax(format!(
                    "{} takes {} argument(s), found {}",
                    tokens[0],
                    n,
                    tokens.len() - 1
                )))
            } else {
                Ok(())
            }
        };

        if n_nodes.is_none() {
            if tokens[0] != "NODES" {
                return Err(NetlistError::MissingNodes);
            }
            expect_args(1)?;
            let n = parse_index(tokens[1])?;
            if n == 0 {
                return Err(syntax("NODES must be positive".to_string()));
            }
            n_nodes = Some(n);
            continue;
        }
        let n = n_nodes.unwrap();
        let check_index = |tok: &str| -> Result<usize, NetlistError> {
            let node = parse_index(tok)?;
            if node >= n {
                Err(NetlistError::DanglingNode { line, node, n_nodes: n })
            } else {
                Ok(node)
            }
        };

        match tokens[0] {
            "NODES" => return Err(syntax("duplicate NODES directive".to_string())),
            "GROUND" => {
                expect_args(1)?;
                if ground.is_some() {
                    return Err(NetlistError::DuplicateGround { line });
                }
                ground = Some(check_index(tokens[1])?);
            }
            "R" => {
                expect_args(3)?;
                let a = check_index(tokens[1])?;
                let b = check_index(tokens[2])?;
                let conductance = parse_value(tokens[3])?;
                if !(conductance > 0.0) {
                    return Err(syntax(format!("conductance must be > 0, found {conductance}")));
                }
                resistors.push(Resistor { a, b, conductance });
            }
            "D" => {
                expect_args(2)?;
                let anode = check_index(tokens[1])?;
                let cathode = check_index(tokens[2])?;
                diodes.push(Diode { anode, cathode });
            }
            "VS" => {
                expect_args(3)?;
                let plus = check_index(tokens[1])?;
                let minus = check_index(tokens[2])?;
                let volts = parse_value(tokens[3])?;
                voltage_sources.push(VoltageSource { plus, minus, volts });
            }
            "CS" => {
                expect_args(3)?;
                let from = check_index(tokens[1])?;
                let to = check_index(tokens[2])?;
                let amps = parse_value(tokens[3])?;
                current_sources.push(CurrentSource { from, to, amps });
            }
            other => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }

    let n_nodes = n_nodes.ok_or(NetlistError::MissingNodes)?;
    let ground = ground.ok_or(NetlistError::MissingGround)?;
    Ok(CircuitGraph::new(
        n_nodes,
        ground,
        resistors,
        current_sources,
        voltage_sources,
        diodes,
    )?)
}

/// Renders a network back into netlist text. Numbers are printed with the
/// shortest representation that parses back to the identical `f64`, so
/// parse -> serialize -> parse is the identity.
pub fn serialize_netlist(graph: &CircuitGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("NODES {}\n", graph.n_nodes()));
    out.push_str(&format!("GROUND {}\n", graph.ground()));
    for vs in graph.voltage_sources() {
        out.push_str(&format!("VS {} {} {}\n", vs.plus, vs.minus, vs.volts));
    }
    for r in graph.resistors() {
        out.push_str(&format!("R {} {} {}\n", r.a, r.b, r.conductance));
    }
    for cs in graph.current_sources() {
        out.push_str(&format!("CS {} {} {}\n", cs.from, cs.to, cs.amps));
    }
    for d in graph.diodes() {
        out.push_str(&format!("D {} {}\n", d.anode, d.cathode));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_resistor() {
        let g = parse_netlist("NODES 2\nGROUND 0\nR 0 1 2.0").unwrap();
        assert_eq!(g.resistors().len(), 1);
        assert_eq!(g.resistors()[0].conductance, 2.0);
    }

    #[test]
    fn rejects_vs_loop() {
        let err = parse_netlist("NODES 3\nGROUND 0\nVS 0 1 1.0\nVS 1 2 1.0\nVS 2 0 1.0")
            .unwrap_err();
        assert_eq!(err, NetlistError::Invalid(CircuitError::VoltageSourceCycle));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# header\nNODES 2 # two nodes\n\nGROUND 0\nR 0 1 1.5 # load\n";
        let g = parse_netlist(text).unwrap();
        assert_eq!(g.n_nodes(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_netlist("NODES 2\nGROUND 0\nR 0 1").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Syntax { line: 3, message: "R takes 3 argument(s), found 2".into() }
        );
    }

    #[test]
    fn rejects_dangling_node() {
        let err = parse_netlist("NODES 2\nGROUND 0\nR 0 5 1.0").unwrap_err();
        assert_eq!(err, NetlistError::DanglingNode { line: 3, node: 5, n_nodes: 2 });
    }

    #[test]
    fn rejects_duplicate_ground() {
        let err = parse_netlist("NODES 2\nGROUND 0\nGROUND 1\nR 0 1 1.0").unwrap_err();
        assert_eq!(err, NetlistError::DuplicateGround { line: 3 });
    }

    #[test]
    fn rejects_missing_nodes_directive() {
        assert_eq!(parse_netlist("GROUND 0\n").unwrap_err(), NetlistError::MissingNodes);
        assert_eq!(parse_netlist("").unwrap_err(), NetlistError::MissingNodes);
    }

    #[test]
    fn rejects_nonpositive_conductance() {
        assert!(matches!(
            parse_netlist("NODES 2\nGROUND 0\nR 0 1 -2").unwrap_err(),
            NetlistError::Syntax { line: 3, .. }
        ));
    }

    #[test]
    fn round_trips_exactly() {
        let text = "NODES 5\nGROUND 1\nVS 0 1 0.1\nVS 2 0 -3.25\nR 1 3 0.7071067811865476\nR 3 4 2\nCS 4 3 -0.125\nD 3 4\nD 0 3\n";
        let g = parse_netlist(text).unwrap();
        let round = parse_netlist(&serialize_netlist(&g)).unwrap();
        assert_eq!(g, round);
    }
}
