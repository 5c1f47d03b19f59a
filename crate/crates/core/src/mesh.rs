//! Cycle-accurate mesh simulator for polar encoding and SC decoding.
//!
//! Nodes `1..=N` sit on a `rows × cols` grid in raster order. Messages route
//! vertically first, then horizontally, one hop per `t_route` cycles; the
//! receiver spends `t_parity` cycles on its update. Energy is counted as
//! `node_area × active node-cycles`, from which `q` is derived.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gf2::reverse_bits;
use crate::polarcode::{check_combine, variable_combine, ErasureWord, PolarCode, ScOutcome, Sym};

const MAX_LEVEL: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictPolicy {
    Fail,
    Record,
}

/// How each encoding stage is split into send-back phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSplit {
    /// Even rows, then odd rows.
    Parity,
    /// Rows `≡ 0, 2, 1, 3 (mod 4)` in that order.
    Mod4,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub n: u32,
    pub rows: usize,
    pub cols: usize,
    pub t_route: u64,
    pub t_parity: u64,
    pub node_area: u64,
    pub conflict_policy: ConflictPolicy,
    pub row_split: RowSplit,
}

impl MeshConfig {
    /// Near-square grid `2^⌈n/2⌉ × 2^⌊n/2⌋` with the default timing and area.
    pub fn new(n: u32) -> Result<Self> {
        if !(1..=MAX_LEVEL).contains(&n) {
            return invalid(format!("mesh level must be in 1..={MAX_LEVEL}, got {n}"));
        }
        let log_n = n as u64;
        Ok(MeshConfig {
            n,
            rows: 1 << n.div_ceil(2),
            cols: 1 << (n / 2),
            t_route: log_n,
            t_parity: 1,
            node_area: log_n * log_n,
            conflict_policy: ConflictPolicy::Fail,
            row_split: RowSplit::Parity,
        })
    }

    pub fn with_timing(mut self, t_route: u64, t_parity: u64) -> Self {
        self.t_route = t_route;
        self.t_parity = t_parity;
        self
    }

    pub fn block_length(&self) -> usize {
        1 << self.n
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEVEL).contains(&self.n) {
            return invalid(format!("mesh level must be in 1..={MAX_LEVEL}, got {}", self.n));
        }
        if self.rows.checked_mul(self.cols).is_none_or(|c| c < self.block_length()) {
            return invalid(format!(
                "{}x{} grid cannot hold {} nodes",
                self.rows,
                self.cols,
                self.block_length()
            ));
        }
        if self.t_route == 0 || self.t_parity == 0 {
            return invalid("t_route and t_parity must be at least 1");
        }
        Ok(())
    }

    pub fn area(&self) -> u64 {
        (self.rows * self.cols) as u64 * self.node_area
    }
}

/// 1-based `(row, col)` of node `i` in raster order.
pub fn raster_position(i: usize, cfg: &MeshConfig) -> Result<(usize, usize)> {
    if i == 0 || i > cfg.rows * cfg.cols || i > cfg.block_length() {
        return invalid(format!("node {i} outside 1..={}", cfg.block_length()));
    }
    let row = i.div_ceil(cfg.cols);
    Ok((row, i - (row - 1) * cfg.cols))
}

fn manhattan(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// Grid positions visited by a message, origin first, target last.
fn route(from: (usize, usize), to: (usize, usize)) -> Vec<(usize, usize)> {
    let mut path = Vec::with_capacity(manhattan(from, to) + 1);
    let (mut r, mut c) = from;
    path.push((r, c));
    while r != to.0 {
        r = if r > to.0 { r - 1 } else { r + 1 };
        path.push((r, c));
    }
    while c != to.1 {
        c = if c > to.1 { c - 1 } else { c + 1 };
        path.push((r, c));
    }
    path
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Phase {
    pub stage: u32,
    /// Senders are on rows `r` with `r mod modulus == residue`.
    pub modulus: usize,
    pub residue: usize,
    pub senders: Vec<usize>,
    pub offset: usize,
}

impl Phase {
    pub fn row_parity(&self) -> usize {
        self.residue % 2
    }
}

/// Stage `j` sends from every node whose bit `n−j` of `i−1` is set to node
/// `i − 2^{n−j}`, split into row-class phases (even rows first).
pub fn encode_schedule(n: u32, cfg: &MeshConfig) -> Result<Vec<Phase>> {
    if n != cfg.n {
        return invalid(format!("schedule level {n} does not match mesh level {}", cfg.n));
    }
    cfg.validate()?;
    let classes: &[(usize, usize)] = match cfg.row_split {
        RowSplit::Parity => &[(2, 0), (2, 1)],
        RowSplit::Mod4 => &[(4, 0), (4, 2), (4, 1), (4, 3)],
    };
    let size = cfg.block_length();
    let mut phases = Vec::new();
    for stage in 1..=n {
        let bit = n - stage;
        for &(modulus, residue) in classes {
            let senders = (1..=size)
                .filter(|&i| (i - 1) >> bit & 1 == 1)
                .filter(|&i| i.div_ceil(cfg.cols) % modulus == residue)
                .collect();
            phases.push(Phase {
                stage,
                modulus,
                residue,
                senders,
                offset: 1 << bit,
            });
        }
    }
    Ok(phases)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Send,
    Hop,
    Recv,
    Xor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub cycle: u64,
    pub node: usize,
    pub event: EventKind,
}

/// One JSON object per line.
pub fn write_trace(events: &[TraceEvent], mut out: impl Write) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e).map_err(|e| Error::Io(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub block_length: usize,
    pub rate: f64,
    pub cycles: u64,
    pub area: u64,
    pub active_node_cycles: u64,
    pub q: f64,
    pub energy: u64,
    pub messages_sent: u64,
    pub max_hops: usize,
    pub conflicts: u64,
}

pub const SIM_CSV_HEADER: &str = "N,R,T,A,q,E,messages,conflicts";

impl SimReport {
    fn finish(cfg: &MeshConfig, rate: f64, cycles: u64, active: u64, messages: u64, max_hops: usize, conflicts: u64) -> Self {
        let q = if cycles == 0 {
            0.0
        } else {
            active as f64 / (cfg.block_length() as f64 * cycles as f64)
        };
        SimReport {
            block_length: cfg.block_length(),
            rate,
            cycles,
            area: cfg.area(),
            active_node_cycles: active,
            q,
            energy: cfg.node_area * active,
            messages_sent: messages,
            max_hops,
            conflicts,
        }
    }

    /// `E = q·A·T`, checked in integers: `E·N·T = active·A·T`.
    pub fn energy_identity_holds(&self) -> bool {
        let lhs = self.energy as u128 * self.block_length as u128 * self.cycles as u128;
        let rhs = self.active_node_cycles as u128 * self.area as u128 * self.cycles as u128;
        lhs == rhs
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.block_length,
            self.rate,
            self.cycles,
            self.area,
            self.q,
            self.energy,
            self.messages_sent,
            self.conflicts
        )
    }
}

struct Flight {
    sender: usize,
    path: Vec<(usize, usize)>,
}

/// Co-residency conflicts among messages launched together: two messages at
/// one node at the same hop-step. A message is resident from its launch until
/// it reaches its target.
fn co_residency(flights: &[Flight], mut on_conflict: impl FnMut(usize, (usize, usize), usize, usize) -> Result<()>) -> Result<u64> {
    let max_hops = flights.iter().map(|f| f.path.len() - 1).max().unwrap_or(0);
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut count = 0;
    for step in 0..=max_hops {
        seen.clear();
        for (k, f) in flights.iter().enumerate() {
            if let Some(&pos) = f.path.get(step) {
                if let Some(&other) = seen.get(&pos) {
                    count += 1;
                    on_conflict(step, pos, flights[other].sender, f.sender)?;
                } else {
                    seen.insert(pos, k);
                }
            }
        }
    }
    Ok(count)
}

fn flights(cfg: &MeshConfig, senders: &[usize], offset: usize) -> Result<Vec<Flight>> {
    senders
        .iter()
        .map(|&i| {
            if i <= offset {
                return invalid(format!("sender {i} has no target at offset {offset}"));
            }
            Ok(Flight {
                sender: i,
                path: route(raster_position(i, cfg)?, raster_position(i - offset, cfg)?),
            })
        })
        .collect()
}

/// Co-residency conflicts of one constant send-back phase: every sender `i`
/// messages node `i − m` at the same time.
pub fn check_constant_sendback(cfg: &MeshConfig, senders: &[usize], m: usize) -> Result<u64> {
    cfg.validate()?;
    if m == 0 {
        return invalid("send-back offset must be at least 1");
    }
    let fl = flights(cfg, senders, m)?;
    co_residency(&fl, |_, _, _, _| Ok(()))
}

fn node_at(cfg: &MeshConfig, pos: (usize, usize)) -> usize {
    (pos.0 - 1) * cfg.cols + pos.1
}

/// Distinct active `(cycle, node)` pairs, collected one phase at a time.
struct Activity {
    phase_len: u64,
    marks: Vec<bool>,
    nodes: usize,
    total: u64,
}

impl Activity {
    fn new(nodes: usize) -> Self {
        Activity {
            phase_len: 0,
            marks: Vec::new(),
            nodes,
            total: 0,
        }
    }

    fn start(&mut self, phase_len: u64) {
        self.phase_len = phase_len;
        self.marks.clear();
        self.marks.resize(phase_len as usize * self.nodes, false);
    }

    fn mark(&mut self, from: u64, len: u64, node: usize) {
        for c in from..from + len {
            let slot = &mut self.marks[c as usize * self.nodes + node - 1];
            if !*slot {
                *slot = true;
                self.total += 1;
            }
        }
    }
}

pub struct EncodeRun {
    pub codeword: Vec<u8>,
    pub report: SimReport,
    pub trace: Vec<TraceEvent>,
}

/// Runs the staged send-back encoder on the mesh.
pub fn simulate_encode(code: &PolarCode, info: &[u8], cfg: &MeshConfig) -> Result<(Vec<u8>, SimReport)> {
    let run = run_encode(code, info, cfg, false)?;
    Ok((run.codeword, run.report))
}

/// As [`simulate_encode`], also recording every send, hop, receive and XOR.
pub fn simulate_encode_traced(code: &PolarCode, info: &[u8], cfg: &MeshConfig) -> Result<EncodeRun> {
    run_encode(code, info, cfg, true)
}

fn run_encode(code: &PolarCode, info: &[u8], cfg: &MeshConfig, tracing: bool) -> Result<EncodeRun> {
    if code.level() != cfg.n {
        return invalid(format!("code level {} does not match mesh level {}", code.level(), cfg.n));
    }
    let u = code.assemble(info)?;
    let n = cfg.n;
    let mut value: Vec<u8> = (0..cfg.block_length()).map(|k| u[reverse_bits(k, n)]).collect();
    let mut trace = Vec::new();
    let mut activity = Activity::new(cfg.rows * cfg.cols);
    let (mut clock, mut messages, mut max_hops, mut conflicts) = (0u64, 0u64, 0usize, 0u64);

    for phase in encode_schedule(n, cfg)? {
        if phase.senders.is_empty() {
            continue;
        }
        let fl = flights(cfg, &phase.senders, phase.offset)?;
        let start = clock;
        conflicts += co_residency(&fl, |step, pos, first, second| match cfg.conflict_policy {
            ConflictPolicy::Record => Ok(()),
            ConflictPolicy::Fail => Err(Error::Conflict {
                cycle: start + step as u64 * cfg.t_route,
                node: node_at(cfg, pos),
                first,
                second,
            }),
        })?;
        let hops = fl.iter().map(|f| f.path.len() - 1).max().unwrap_or(0);
        let phase_len = hops as u64 * cfg.t_route + cfg.t_parity;
        activity.start(phase_len);
        for f in &fl {
            let h = f.path.len() - 1;
            for (k, &pos) in f.path[..h].iter().enumerate() {
                activity.mark(k as u64 * cfg.t_route, cfg.t_route, node_at(cfg, pos));
            }
            let target = f.sender - phase.offset;
            let arrive = h as u64 * cfg.t_route;
            activity.mark(arrive, cfg.t_parity, target);
            if tracing {
                trace.push(TraceEvent { cycle: start, node: f.sender, event: EventKind::Send });
                for (k, &pos) in f.path.iter().enumerate().take(h).skip(1) {
                    trace.push(TraceEvent {
                        cycle: start + k as u64 * cfg.t_route,
                        node: node_at(cfg, pos),
                        event: EventKind::Hop,
                    });
                }
                trace.push(TraceEvent { cycle: start + arrive, node: target, event: EventKind::Recv });
                trace.push(TraceEvent { cycle: start + arrive, node: target, event: EventKind::Xor });
            }
        }
        // All messages of a phase launch from the values held before it.
        for &i in &phase.senders {
            value[i - phase.offset - 1] ^= value[i - 1];
        }
        messages += fl.len() as u64;
        max_hops = max_hops.max(hops);
        clock += phase_len;
    }
    trace.sort_by_key(|e| (e.cycle, e.node));
    let report = SimReport::finish(cfg, code.rate(), clock, activity.total, messages, max_hops, conflicts);
    Ok(EncodeRun {
        codeword: value,
        report,
        trace,
    })
}

pub struct DecodeRun {
    pub outcome: ScOutcome,
    pub report: SimReport,
    pub trace: Vec<TraceEvent>,
}

struct SerialDecoder<'a> {
    cfg: &'a MeshConfig,
    frozen_bits: Vec<Option<u8>>,
    syms: Vec<Vec<Sym>>,
    sums: Vec<Vec<u8>>,
    u_hat: Vec<u8>,
    clock: u64,
    active: u64,
    messages: u64,
    max_hops: usize,
    trace: Option<Vec<TraceEvent>>,
}

impl SerialDecoder<'_> {
    /// Moves one message between positions (0-based) and lets the receiver compute.
    fn message(&mut self, from: usize, to: usize) {
        let a = raster_position(from + 1, self.cfg).expect("position on grid");
        let b = raster_position(to + 1, self.cfg).expect("position on grid");
        let path = route(a, b);
        let h = path.len() - 1;
        if let Some(trace) = self.trace.as_mut() {
            let t = self.cfg.t_route;
            trace.push(TraceEvent { cycle: self.clock, node: from + 1, event: EventKind::Send });
            for (k, &pos) in path.iter().enumerate().take(h).skip(1) {
                trace.push(TraceEvent {
                    cycle: self.clock + k as u64 * t,
                    node: node_at(self.cfg, pos),
                    event: EventKind::Hop,
                });
            }
            let arrive = self.clock + h as u64 * t;
            trace.push(TraceEvent { cycle: arrive, node: to + 1, event: EventKind::Recv });
            trace.push(TraceEvent { cycle: arrive, node: to + 1, event: EventKind::Xor });
        }
        let span = h as u64 * self.cfg.t_route + self.cfg.t_parity;
        self.clock += span;
        self.active += span;
        self.messages += 1;
        self.max_hops = self.max_hops.max(h);
    }

    /// Subtree over positions `offset..offset + 2^level`; position `p` lives on node `p + 1`.
    fn node(&mut self, level: usize, offset: usize, root: bool) -> std::result::Result<(), usize> {
        if level == 0 {
            let bit = match self.frozen_bits[offset] {
                Some(b) => b,
                None => self.syms[0][offset].bit().ok_or(offset + 1)?,
            };
            self.sums[0][offset] = bit;
            self.u_hat.push(bit);
            return Ok(());
        }
        let half = 1 << (level - 1);
        for i in offset..offset + half {
            self.message(i + half, i);
            self.syms[level - 1][i] = check_combine(self.syms[level][i], self.syms[level][i + half]);
        }
        self.node(level - 1, offset, false)?;
        for i in offset..offset + half {
            self.message(i, i + half);
            self.syms[level - 1][i + half] =
                variable_combine(self.syms[level][i], self.syms[level][i + half], self.sums[level - 1][i]);
        }
        self.node(level - 1, offset + half, false)?;
        for i in offset..offset + half {
            if !root {
                self.message(i + half, i);
            }
            self.sums[level][i] = self.sums[level - 1][i] ^ self.sums[level - 1][i + half];
            self.sums[level][i + half] = self.sums[level - 1][i + half];
        }
        Ok(())
    }
}

/// Serial depth-first SC decoding on the mesh: one message in flight at a time.
pub fn simulate_decode(code: &PolarCode, received: &ErasureWord, cfg: &MeshConfig) -> Result<(ScOutcome, SimReport)> {
    let run = run_decode(code, received, cfg, false)?;
    Ok((run.outcome, run.report))
}

pub fn simulate_decode_traced(code: &PolarCode, received: &ErasureWord, cfg: &MeshConfig) -> Result<DecodeRun> {
    run_decode(code, received, cfg, true)
}

fn run_decode(code: &PolarCode, received: &ErasureWord, cfg: &MeshConfig, tracing: bool) -> Result<DecodeRun> {
    cfg.validate()?;
    if code.level() != cfg.n {
        return invalid(format!("code level {} does not match mesh level {}", code.level(), cfg.n));
    }
    let size = cfg.block_length();
    if received.len() != size {
        return invalid(format!("received word has length {}, expected {size}", received.len()));
    }
    let n = cfg.n as usize;
    let mut frozen_bits = vec![None; size];
    for (&f, &b) in code.frozen().members().iter().zip(code.frozen_values()) {
        frozen_bits[f - 1] = Some(b);
    }
    let mut dec = SerialDecoder {
        cfg,
        frozen_bits,
        syms: vec![vec![Sym::Erased; size]; n + 1],
        sums: vec![vec![0; size]; n + 1],
        u_hat: Vec::with_capacity(size),
        clock: 0,
        active: 0,
        messages: 0,
        max_hops: 0,
        trace: tracing.then(Vec::new),
    };
    for k in 0..size {
        dec.syms[n][k] = received.0[reverse_bits(k, cfg.n)];
    }
    let outcome = match dec.node(n, 0, true) {
        Ok(()) => ScOutcome::Decoded(code.info_of(&dec.u_hat)),
        Err(index) => ScOutcome::Failure { index },
    };
    let report = SimReport::finish(cfg, code.rate(), dec.clock, dec.active, dec.messages, dec.max_hops, 0);
    Ok(DecodeRun {
        outcome,
        report,
        trace: dec.trace.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarcode::{construct_zero_frozen, encode, sc_decode};

    #[test]
    fn raster_examples() {
        let cfg = MeshConfig::new(4).unwrap();
        assert_eq!(raster_position(1, &cfg).unwrap(), (1, 1));
        assert_eq!(raster_position(5, &cfg).unwrap(), (2, 1));
        assert_eq!(raster_position(16, &cfg).unwrap(), (4, 4));
        assert!(raster_position(0, &cfg).is_err());
        assert!(raster_position(17, &cfg).is_err());
    }

    #[test]
    fn odd_level_grid_is_tall() {
        let cfg = MeshConfig::new(3).unwrap();
        assert_eq!((cfg.rows, cfg.cols), (4, 2));
        assert_eq!(cfg.t_route, 3);
        assert_eq!(cfg.node_area, 9);
    }

    #[test]
    fn schedule_examples() {
        let s = encode_schedule(2, &MeshConfig::new(2).unwrap()).unwrap();
        let stage1: Vec<usize> = s.iter().filter(|p| p.stage == 1).flat_map(|p| p.senders.clone()).collect();
        assert_eq!(s[0].offset, 2);
        assert_eq!(stage1, [3, 4]);
        let s = encode_schedule(3, &MeshConfig::new(3).unwrap()).unwrap();
        let mut stage1: Vec<usize> = s.iter().filter(|p| p.stage == 1).flat_map(|p| p.senders.clone()).collect();
        stage1.sort();
        assert_eq!(stage1, [5, 6, 7, 8]);
        assert_eq!(s[0].offset, 4);
    }

    #[test]
    fn n4_unit_timing() {
        let cfg = MeshConfig::new(2).unwrap().with_timing(1, 1);
        let code = construct_zero_frozen(2, 0.5, 2).unwrap();
        let (x, r) = simulate_encode(&code, &[1, 0], &cfg).unwrap();
        assert_eq!(x, encode(&code, &[1, 0]).unwrap());
        assert_eq!(r.cycles, 6);
        assert_eq!(r.messages_sent, 4);
        assert_eq!(r.conflicts, 0);
        assert!(r.energy_identity_holds());
    }

    #[test]
    fn two_bit_decode_message_count() {
        let cfg = MeshConfig::new(1).unwrap();
        let code = construct_zero_frozen(1, 0.5, 2).unwrap();
        let x = encode(&code, &[1, 1]).unwrap();
        let (out, r) = simulate_decode(&code, &ErasureWord::from_bits(&x), &cfg).unwrap();
        assert_eq!(out, ScOutcome::Decoded(vec![1, 1]));
        assert!(r.messages_sent <= 8);
        assert_eq!(r.active_node_cycles, r.cycles);
    }

    #[test]
    fn decode_failure_matches_reference() {
        let cfg = MeshConfig::new(3).unwrap();
        let code = construct_zero_frozen(3, 0.5, 4).unwrap();
        let y = ErasureWord(vec![Sym::Erased; 8]);
        let (out, _) = simulate_decode(&code, &y, &cfg).unwrap();
        assert_eq!(out, sc_decode(&code, &y).unwrap());
    }

    #[test]
    fn mixed_parity_can_conflict() {
        // Node 5 climbs to (1,1) in the step node 2 arrives there.
        let cfg = MeshConfig::new(4).unwrap();
        assert_eq!(check_constant_sendback(&cfg, &[2, 5], 1).unwrap(), 1);
        assert_eq!(check_constant_sendback(&cfg, &[5, 6, 7, 8, 13, 14], 1).unwrap(), 0);
        assert!(check_constant_sendback(&cfg, &[1], 1).is_err());
    }

    #[test]
    fn trace_lines_are_json() {
        let cfg = MeshConfig::new(2).unwrap();
        let code = construct_zero_frozen(2, 0.5, 2).unwrap();
        let run = simulate_encode_traced(&code, &[1, 1], &cfg).unwrap();
        let mut buf = Vec::new();
        write_trace(&run.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().contains("\"event\":\"send\""));
        assert_eq!(text.lines().filter(|l| l.contains("xor")).count(), 4);
    }
}
