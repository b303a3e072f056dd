#![no_main]

use gfk_cli::csvio::{parse_table, results_csv, summary_csv, Table};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = parse_table(text) {
            let cells = table.cells();
            let _ = gfk_cli::report::render_svg(&cells);
            // re-serialized tables parse again
            let text = match &table {
                Table::Results(rows) => results_csv(rows),
                Table::Summary(cells) => summary_csv(cells),
            };
            parse_table(&text).expect("serialized table parses");
        }
    }
});
