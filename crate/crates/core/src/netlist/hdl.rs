//! VHDL and Verilog text for a netlist. Each file carries behavioural
//! definitions of the three primitives it instantiates, so it simulates
//! without a vendor library.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Driver, NetId, Netlist, Node};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HdlDialect {
    Vhdl,
    Verilog,
}

impl std::str::FromStr for HdlDialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vhdl" | "vhd" => Ok(HdlDialect::Vhdl),
            "verilog" | "v" => Ok(HdlDialect::Verilog),
            other => Err(Error::Unsupported(format!("HDL dialect {other}"))),
        }
    }
}

const VERILOG_PRIMITIVES: &str = "\
module lut6_2 #(parameter [63:0] INIT = 64'h0) (
  input I0, input I1, input I2, input I3, input I4, input I5,
  output O6, output O5
);
  assign O6 = INIT[{I5, I4, I3, I2, I1, I0}];
  assign O5 = INIT[{1'b0, I4, I3, I2, I1, I0}];
endmodule

module carry_cell (input S, input DI, input CI, output O, output CO);
  assign O = S ^ CI;
  assign CO = S ? CI : DI;
endmodule

module muxf7 (input I0, input I1, input S, output O);
  assign O = S ? I1 : I0;
endmodule
";

const VHDL_PRIMITIVES: &str = "\
library ieee;
use ieee.std_logic_1164.all;
use ieee.numeric_std.all;

entity lut6_2 is
  generic (INIT : std_logic_vector(63 downto 0));
  port (I0, I1, I2, I3, I4, I5 : in std_logic; O6, O5 : out std_logic);
end entity;

architecture behav of lut6_2 is
  signal sel : std_logic_vector(5 downto 0);
begin
  sel <= I5 & I4 & I3 & I2 & I1 & I0;
  O6 <= INIT(to_integer(unsigned(sel)));
  O5 <= INIT(to_integer(unsigned(sel(4 downto 0))));
end architecture;

library ieee;
use ieee.std_logic_1164.all;

entity carry_cell is
  port (S, DI, CI : in std_logic; O, CO : out std_logic);
end entity;

architecture behav of carry_cell is
begin
  O <= S xor CI;
  CO <= CI when S = '1' else DI;
end architecture;

library ieee;
use ieee.std_logic_1164.all;

entity muxf7 is
  port (I0, I1, S : in std_logic; O : out std_logic);
end entity;

architecture behav of muxf7 is
begin
  O <= I1 when S = '1' else I0;
end architecture;
";

struct Names<'a> {
    nl: &'a Netlist,
    vhdl: bool,
}

impl Names<'_> {
    fn net(&self, id: NetId) -> String {
        let net = &self.nl.nets[id as usize];
        let (open, close) = if self.vhdl { ('(', ')') } else { ('[', ']') };
        match net.driver {
            Driver::InputX { bit } => format!("x{open}{bit}{close}"),
            Driver::InputY { bit } => format!("y{open}{bit}{close}"),
            _ => format!("n_{}", net.name),
        }
    }

    fn internal(&self) -> impl Iterator<Item = (NetId, String)> + '_ {
        self.nl
            .nets
            .iter()
            .enumerate()
            .filter(|(_, n)| !matches!(n.driver, Driver::InputX { .. } | Driver::InputY { .. }))
            .map(|(i, _)| (i as NetId, self.net(i as NetId)))
    }
}

/// LUT pins I0..I5 with unused inputs tied low, I5 tied high in dual mode.
fn lut_pins(nl: &Netlist, inputs: &[NetId], dual: bool) -> [NetId; 6] {
    let zero = const_net(nl, false);
    let one = const_net(nl, true);
    let mut pins = [zero; 6];
    pins[..inputs.len()].copy_from_slice(inputs);
    if dual {
        pins[5] = one;
    }
    pins
}

fn const_net(nl: &Netlist, value: bool) -> NetId {
    nl.nets
        .iter()
        .position(|n| n.driver == Driver::Const { value })
        .expect("netlists carry both constants") as NetId
}

pub fn emit_hdl(nl: &Netlist, dialect: HdlDialect) -> String {
    match dialect {
        HdlDialect::Verilog => verilog(nl),
        HdlDialect::Vhdl => vhdl(nl),
    }
}

fn verilog(nl: &Netlist) -> String {
    let names = Names { nl, vhdl: false };
    let b = &nl.board;
    let mut s = String::new();
    let _ = writeln!(s, "// {} multiplier, {} LUTs, {} carry cells", b, nl.lut_count(), nl.carry_count());
    s.push_str(VERILOG_PRIMITIVES);
    let _ = writeln!(
        s,
        "\nmodule {} (input [{}:0] x, input [{}:0] y, output [{}:0] p);",
        nl.name,
        b.w_x - 1,
        b.w_y - 1,
        nl.p.len().max(1) - 1
    );
    for (id, name) in names.internal() {
        match nl.nets[id as usize].driver {
            Driver::Const { value } => {
                let _ = writeln!(s, "  wire {name} = 1'b{};", value as u8);
            }
            _ => {
                let _ = writeln!(s, "  wire {name};");
            }
        }
    }
    for (i, node) in nl.nodes.iter().enumerate() {
        match node {
            Node::Lut { inputs, init, o6, o5 } => {
                let pins = lut_pins(nl, inputs, o5.is_some());
                let _ = write!(s, "  lut6_2 #(.INIT(64'h{init:016X})) u{i} (");
                for (k, pin) in pins.iter().enumerate() {
                    let _ = write!(s, ".I{k}({}), ", names.net(*pin));
                }
                let o5 = o5.map(|n| names.net(n)).unwrap_or_default();
                let _ = writeln!(s, ".O6({}), .O5({o5}));", names.net(*o6));
            }
            Node::Mux7 { i0, i1, sel, o } => {
                let _ = writeln!(
                    s,
                    "  muxf7 u{i} (.I0({}), .I1({}), .S({}), .O({}));",
                    names.net(*i0),
                    names.net(*i1),
                    names.net(*sel),
                    names.net(*o)
                );
            }
            Node::Carry { s: sum, di, ci, o, co } => {
                let _ = writeln!(
                    s,
                    "  carry_cell u{i} (.S({}), .DI({}), .CI({}), .O({}), .CO({}));",
                    names.net(*sum),
                    names.net(*di),
                    names.net(*ci),
                    names.net(*o),
                    names.net(*co)
                );
            }
        }
    }
    for (i, &net) in nl.p.iter().enumerate() {
        let _ = writeln!(s, "  assign p[{i}] = {};", names.net(net));
    }
    s.push_str("endmodule\n");
    s
}

fn vhdl(nl: &Netlist) -> String {
    let names = Names { nl, vhdl: true };
    let b = &nl.board;
    let mut s = String::new();
    let _ = writeln!(s, "-- {} multiplier, {} LUTs, {} carry cells", b, nl.lut_count(), nl.carry_count());
    s.push_str(VHDL_PRIMITIVES);
    let _ = writeln!(
        s,
        "\nlibrary ieee;\nuse ieee.std_logic_1164.all;\n\nentity {} is\n  port (\n    x : in std_logic_vector({} downto 0);\n    y : in std_logic_vector({} downto 0);\n    p : out std_logic_vector({} downto 0)\n  );\nend entity;\n\narchitecture netlist of {} is",
        nl.name,
        b.w_x - 1,
        b.w_y - 1,
        nl.p.len().max(1) - 1,
        nl.name
    );
    for (_, name) in names.internal() {
        let _ = writeln!(s, "  signal {name} : std_logic;");
    }
    s.push_str("begin\n");
    for (id, name) in names.internal() {
        if let Driver::Const { value } = nl.nets[id as usize].driver {
            let _ = writeln!(s, "  {name} <= '{}';", value as u8);
        }
    }
    for (i, node) in nl.nodes.iter().enumerate() {
        match node {
            Node::Lut { inputs, init, o6, o5 } => {
                let pins = lut_pins(nl, inputs, o5.is_some());
                let _ = write!(s, "  u{i} : entity work.lut6_2 generic map (INIT => x\"{init:016X}\") port map (");
                for (k, pin) in pins.iter().enumerate() {
                    let _ = write!(s, "I{k} => {}, ", names.net(*pin));
                }
                let o5 = o5.map(|n| names.net(n)).unwrap_or_else(|| "open".into());
                let _ = writeln!(s, "O6 => {}, O5 => {o5});", names.net(*o6));
            }
            Node::Mux7 { i0, i1, sel, o } => {
                let _ = writeln!(
                    s,
                    "  u{i} : entity work.muxf7 port map (I0 => {}, I1 => {}, S => {}, O => {});",
                    names.net(*i0),
                    names.net(*i1),
                    names.net(*sel),
                    names.net(*o)
                );
            }
            Node::Carry { s: sum, di, ci, o, co } => {
                let _ = writeln!(
                    s,
                    "  u{i} : entity work.carry_cell port map (S => {}, DI => {}, CI => {}, O => {}, CO => {});",
                    names.net(*sum),
                    names.net(*di),
                    names.net(*ci),
                    names.net(*o),
                    names.net(*co)
                );
            }
        }
    }
    for (i, &net) in nl.p.iter().enumerate() {
        let _ = writeln!(s, "  p({i}) <= {};", names.net(net));
    }
    s.push_str("end architecture;\n");
    s
}

/// INIT words of the LUT instances in emitted HDL of either dialect, in
/// instance order.
pub fn parse_inits(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let hex = if let Some(i) = line.find("#(.INIT(64'h") {
            &line[i + 12..]
        } else if let Some(i) = line.find("generic map (INIT => x\"") {
            &line[i + 23..]
        } else {
            continue;
        };
        let digits: String = hex.chars().take_while(|c| c.is_ascii_hexdigit()).collect();
        if digits.len() != 16 {
            return Err(Error::Format(format!("malformed INIT in: {line}")));
        }
        out.push(u64::from_str_radix(&digits, 16).map_err(|e| Error::Format(e.to_string()))?);
    }
    Ok(out)
}
