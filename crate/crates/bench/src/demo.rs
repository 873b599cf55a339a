//! Step-by-step trace of one parallel comparison on a four-key node.

use std::fmt::Write;

use fusion_core::{CompressedTrie, FusionNode, KeySet, NodeConfig, Strategy, Width};

use crate::error::{BenchError, Result};

pub const KEYS: [u64; 4] = [0b1101_1111, 0b1110_0000, 0b1110_0001, 0b1111_1110];
pub const QUERY: u64 = 0b1110_0111;

const SKETCHES: [u64; 4] = [0b011, 0b100, 0b101, 0b110];
const NODE_WORD: u64 = 48350;
const QUERY_WORD: u64 = 21845;
const DIFFERENCE: u64 = 26505;
const MASKED: u64 = 136;
const MSB: u32 = 7;

/// 8-bit keys packed four to a 16-bit word with 4-bit blocks.
pub fn demo_config() -> NodeConfig {
    NodeConfig::new(Width::W8, 4, Strategy::Exact, Width::W16).expect("4 blocks of 4 bits fit 16")
}

fn check<T: PartialEq + std::fmt::Display>(name: &'static str, got: T, expected: T) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(BenchError::GoldenMismatch {
            name,
            got: got.to_string(),
            expected: expected.to_string(),
        })
    }
}

fn label(k: u64) -> char {
    KEYS.iter().position(|&s| s == k).map_or('?', |i| (b'a' + i as u8) as char)
}

/// Renders the trace and fails on the first intermediate that deviates.
pub fn demo_walkthrough() -> Result<String> {
    walkthrough(&KEYS, QUERY)
}

pub fn walkthrough(keys: &[u64], x: u64) -> Result<String> {
    let config = demo_config();
    let set = KeySet::new(keys.to_vec(), Width::W8)?;
    let node = FusionNode::build(&set, config)?;
    let trie = CompressedTrie::build(&set);
    let mut out = String::new();
    let o = &mut out;

    writeln!(o, "keys").unwrap();
    for &k in set.as_slice() {
        writeln!(o, "  {} = {k:08b} = {k}", label(k)).unwrap();
    }
    writeln!(o, "  (d is printed as 245 in some sources; 11111110 is 254)").unwrap();
    let bits = trie.relevant_bits();
    let names: Vec<String> = bits.bits().iter().map(|b| format!("b{b}")).collect();
    writeln!(o, "relevant bits: {}", names.join(", ")).unwrap();

    writeln!(o, "sketches").unwrap();
    for (i, &k) in set.as_slice().iter().enumerate() {
        let sk = node.scheme().sketch(k);
        writeln!(o, "  sk({}) = {:03b}", label(k), sk.bits).unwrap();
        check("sketch", sk.bits, SKETCHES[i])?;
    }

    let w = node.node_word();
    writeln!(o, "w_node = {} = {}", node.format_blocks(w.packed), w.packed).unwrap();
    check("w_node", w.packed, NODE_WORD)?;

    let trace = node.compare_trace(x);
    writeln!(o, "x = {x:08b} = {x}, sk(x) = {:03b}", trace.sketch).unwrap();
    writeln!(o, "w_q = {} = {}", node.format_blocks(trace.query_word), trace.query_word).unwrap();
    check("w_q", trace.query_word, QUERY_WORD)?;
    writeln!(
        o,
        "w_node - w_q = {} = {}",
        node.format_blocks(trace.difference),
        trace.difference
    )
    .unwrap();
    check("w_node - w_q", trace.difference, DIFFERENCE)?;
    writeln!(o, "AND leading bits = {} = {}", node.format_blocks(trace.masked), trace.masked).unwrap();
    check("masked", trace.masked, MASKED)?;
    let msb = trace.msb.ok_or(BenchError::GoldenMismatch {
        name: "msb",
        got: "none".into(),
        expected: MSB.to_string(),
    })?;
    writeln!(o, "msb = b{msb}, {} keys have a smaller sketch", trace.sketch_rank).unwrap();
    check("msb", msb, MSB)?;

    let selected = node.node_trs(x);
    writeln!(o, "trs(x) = {} = {selected:08b}", label(selected)).unwrap();
    check("selected key", selected, KEYS[2])?;
    writeln!(o, "rank(x) = {}", node.node_rank(x)).unwrap();
    Ok(out)
}

/// The example's compressed trie in DOT.
pub fn demo_dot() -> Result<String> {
    let set = KeySet::new(KEYS.to_vec(), Width::W8)?;
    Ok(CompressedTrie::build(&set).to_dot())
}
