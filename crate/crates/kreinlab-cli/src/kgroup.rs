//! `kreinlab kgroup`: reduce a point scenario step by step, print the
//! trace, and end with the bare group descriptor on the last line.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use kreinlab::twistkit::{
    clifford_absorb, kgroup_point, reduce_data, FiniteGroupData, GroupChoice, Phase,
    PointScenario, SignMap, TwistData, TwistError,
};

use crate::docs::{save_json, TwistDocument};
use crate::error::CliError;

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Trivial,
    Z2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    /// constant +1
    Trivial,
    /// the identity character g -> g on the sign group
    Id,
}

impl From<SignArg> for SignMap {
    fn from(s: SignArg) -> SignMap {
        match s {
            SignArg::Trivial => SignMap::Trivial,
            SignArg::Id => SignMap::Id,
        }
    }
}

#[derive(Args)]
pub struct KgroupArgs {
    /// residual symmetry group of the scenario
    #[arg(long, value_enum, ignore_case = true, default_value = "trivial")]
    group: GroupArg,
    /// linearity character: id marks the nontrivial element anti-linear
    #[arg(long, value_enum, ignore_case = true, default_value = "trivial")]
    varpi: SignArg,
    /// metric character: id marks the nontrivial element metric-reversing
    #[arg(long, value_enum, ignore_case = true, default_value = "trivial")]
    wp: SignArg,
    /// parity character: id marks the nontrivial element odd
    #[arg(long, value_enum, ignore_case = true, default_value = "trivial")]
    c: SignArg,
    /// number of positive-square Clifford generators
    #[arg(long, default_value_t = 0)]
    r: usize,
    /// number of negative-square Clifford generators
    #[arg(long, default_value_t = 0)]
    s: usize,
    /// write the fully reduced twist document to this path
    #[arg(long)]
    dump: Option<PathBuf>,
}

fn fmt_phase(p: Phase) -> String {
    let z = p.value();
    if z.im == 0.0 && z.re == 1.0 {
        "1".into()
    } else if z.im == 0.0 && z.re == -1.0 {
        "-1".into()
    } else if z.re == 0.0 && z.im == 1.0 {
        "i".into()
    } else if z.re == 0.0 && z.im == -1.0 {
        "-i".into()
    } else {
        format!("{:+.6e}{:+.6e}i", z.re, z.im)
    }
}

fn sign_vec(map: SignMap, order: usize) -> Vec<i8> {
    match map {
        SignMap::Trivial => vec![1; order],
        SignMap::Id => (0..order).map(|g| if g == 0 { 1 } else { -1 }).collect(),
    }
}

fn print_twist(t: &TwistData) {
    let n = t.group().order();
    let width = (0..n).map(|g| t.group().label(g).len()).max().unwrap_or(1).max(4);
    print!("  tau {:w$}", "", w = width);
    for h in 0..n {
        print!(" {:>w$}", t.group().label(h), w = width);
    }
    println!();
    for g in 0..n {
        print!("      {:>w$}", t.group().label(g), w = width);
        for h in 0..n {
            print!(" {:>w$}", fmt_phase(t.tau(g, h)), w = width);
        }
        println!();
    }
    let chars: Vec<String> = (0..n)
        .map(|g| format!("{}:({:+},{:+},{:+})", t.group().label(g), t.varpi(g), t.wp(g), t.c(g)))
        .collect();
    println!("  characters (varpi, wp, c): {}", chars.join("  "));
}

pub fn run(args: &KgroupArgs) -> Result<i32, CliError> {
    let sc = PointScenario {
        group: match args.group {
            GroupArg::Trivial => GroupChoice::Trivial,
            GroupArg::Z2 => GroupChoice::Z2,
        },
        varpi: args.varpi.into(),
        wp: args.wp.into(),
        c: args.c.into(),
        r: args.r,
        s: args.s,
    };

    // the descriptor comes from kgroup_point; the trace below replays the
    // same public reduction steps for inspection
    let computation = kgroup_point(&sc).map_err(|e| match e {
        TwistError::UnsupportedScenario(msg) => CliError::Unsupported(msg),
        other => CliError::Internal(other.to_string()),
    })?;

    let group = match sc.group {
        GroupChoice::Trivial => FiniteGroupData::trivial(),
        GroupChoice::Z2 => FiniteGroupData::cyclic2(),
    };
    let order = group.order();
    let mut twist = TwistData::untwisted(group);
    twist.set_wp(sign_vec(sc.wp, order));
    twist.set_c(sign_vec(sc.c, order));

    println!("scenario: group order {order}, r = {}, s = {}", args.r, args.s);
    let mut t = reduce_data(&twist).map_err(|e| CliError::Internal(e.to_string()))?;
    println!("metric reduction: order {} -> {}", order, t.group().order());
    print_twist(&t);

    let mut sig = (sc.r, sc.s);
    let mut step = 0;
    while sig.0 + sig.1 > 0 {
        let kind = if sig.1 > 0 { "negative-square" } else { "positive-square" };
        let (next, rest) =
            clifford_absorb(&t, sig).map_err(|e| CliError::Internal(e.to_string()))?;
        step += 1;
        println!(
            "absorb step {step}: {kind} generator, order {} -> {}, remaining (r, s) = ({}, {})",
            t.group().order(),
            next.group().order(),
            rest.0,
            rest.1
        );
        t = next;
        sig = rest;
    }
    if step > 0 {
        print_twist(&t);
    }
    if let Some(path) = &args.dump {
        let meta = serde_json::json!({
            "scenario": { "r": args.r, "s": args.s },
        });
        let doc = TwistDocument::from_twist(&t, Some(meta));
        // a document that would not reload is a bug, not an output
        doc.to_twist()
            .map_err(|e| CliError::Internal(format!("dump failed its reload check: {e}")))?;
        save_json(path, &doc)?;
        println!("dumped reduced twist to {}", path.display());
    }

    println!(
        "module: dimension {}, qubits {}, metric sectors {}",
        computation.module_dim, computation.qubits, computation.sectors
    );
    println!(
        "odd extension: {}",
        if computation.extendable {
            "exists (class is trivial)"
        } else {
            "none (class generates freely)"
        }
    );
    println!("{}", computation.descriptor);
    Ok(0)
}
