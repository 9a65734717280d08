//! Exact algebra of similarities, multiindices and addresses.
//!
//! ```bash
//! cargo run --example address_algebra
//! ```

use fractopo::{eval_address, systems, word_relation, Address, Word};

fn main() -> fractopo::Result<()> {
    let gasket = systems::gasket();

    // composing words multiplies ratios and chains the maps
    let word = Word::parse("12")?;
    let map = gasket.compose(&word)?;
    println!(
        "S_12 on the gasket: ratio {}, rotation {}, shift {}",
        map.ratio(),
        map.rotation(),
        map.shift()
    );

    // fixed points of composed maps
    for text in ["1", "2", "3", "12", "123"] {
        let w = Word::parse(text)?;
        let fix = gasket.compose(&w)?.fixed_point()?;
        println!("fix(S_{text}) = {fix}");
    }

    // eventually periodic addresses evaluate through the index map
    let midpoint_a = Address::new(Word::parse("1")?, Word::parse("2")?)?;
    let midpoint_b = Address::new(Word::parse("2")?, Word::parse("1")?)?;
    println!(
        "pi({midpoint_a}) = {}, pi({midpoint_b}) = {}",
        eval_address(&gasket, &midpoint_a)?,
        eval_address(&gasket, &midpoint_b)?
    );

    // canonicalization: "12 (2)^inf" is the same infinite word as "1 (2)^inf"
    let raw = Address::new(Word::parse("12")?, Word::parse("2")?)?;
    println!("canonical form of 12(2)^inf: {raw}");

    // word relations
    for (u, v) in [("1", "12"), ("12", "13"), ("21", "21")] {
        println!(
            "{u} vs {v}: {:?}",
            word_relation(&Word::parse(u)?, &Word::parse(v)?)
        );
    }
    Ok(())
}
