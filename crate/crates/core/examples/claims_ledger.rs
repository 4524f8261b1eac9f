//! Recomputes the claim ledger and prints one line per claim.

use ncpgeom::claims::{run_ledger, LedgerOptions};

fn main() -> ncpgeom::Result<()> {
    let start = std::time::Instant::now();
    let records = run_ledger(&LedgerOptions::default())?;
    for r in &records {
        println!(
            "{:<36} {:>12} {:>22} {:<11} {}",
            r.claim_id,
            r.paper_value.map(|v| format!("{v:.6}")).unwrap_or_default(),
            format!("{:.9e}", r.computed),
            r.status,
            r.note
        );
    }
    eprintln!("{} claims in {:.2?}", records.len(), start.elapsed());
    Ok(())
}
