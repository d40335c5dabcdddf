//! Parses shot sentences and prints what they mean.
//!
//! ```text
//! cargo run --example psl_parse -- "MCU on A 34left high in 4s"
//! ```

use cinedrone::psl::{format, parse};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let inputs = if args.is_empty() {
        vec![
            "MS on A 34left screencenter".to_string(),
            "ms ON A front at 0.5 m/s".to_string(),
            "MS on A screenleft and B screenright in 6s".to_string(),
            "MS on A frnt".to_string(),
            "MS on A pan left".to_string(),
        ]
    } else {
        args
    };

    for text in inputs {
        println!("> {text}");
        match parse(&text) {
            Ok(s) => {
                println!("  size {:?}, pace {:?}", s.size, s.pace);
                for c in &s.subjects {
                    println!("  subject {}: profile {:?}, vertical {:?}, screen {:?}", c.actor_id, c.profile, c.vertical, c.screen);
                }
                println!("  canonical: {}", format(&s));
            }
            Err(e) => {
                println!("  {}^", " ".repeat(e.position));
                println!("  error at column {}: {e}", e.position + 1);
            }
        }
    }
}
