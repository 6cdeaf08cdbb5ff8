//! Serve the bundled German-credit fixture. Open the printed address, or:
//!
//!     curl -s localhost:8080/api/explanations/fig1/view?filter=rule

use std::path::Path;

use fiper_server::Store;

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/german_credit");
    let port: u16 = std::env::args().nth(1).map_or(Ok(8080), |p| p.parse())?;
    let store = Store::load_dir(&dir)?;
    for b in store.bundles() {
        eprintln!(
            "explanation {:<14} http://127.0.0.1:{port}/api/explanations/{}/svg",
            b.id, b.id
        );
    }
    fiper_server::cli::serve(store, ([127, 0, 0, 1], port).into(), None).await
}
