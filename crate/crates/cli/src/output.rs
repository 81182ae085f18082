use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::Args;

pub const TOOL: &str = "vde";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance written at the top of every output file. Output paths are not
/// part of the configuration, so the same run written elsewhere is
/// byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Value,
    pub config_sha256: String,
    pub config: Value,
}

impl Header {
    pub fn new(args: &Args, profile_source: &str) -> Self {
        let config = json!({
            "args": args,
            "profile_sha256": hex::encode(Sha256::digest(profile_source.as_bytes())),
        });
        let canonical = serde_json::to_string(&config).expect("config serializes");
        Header {
            tool: TOOL,
            version: VERSION,
            command: serde_json::to_value(args.command).expect("command serializes"),
            config_sha256: hex::encode(Sha256::digest(canonical.as_bytes())),
            config,
        }
    }

    pub fn comment_lines(&self) -> String {
        format!(
            "# tool: {} {}\n# command: {}\n# config_sha256: {}\n# config: {}\n",
            self.tool,
            self.version,
            self.command.as_str().unwrap_or_default(),
            self.config_sha256,
            self.config
        )
    }
}

pub fn json_document(header: &Header, result: impl Serialize) -> String {
    let doc = json!({ "header": header, "result": result });
    let mut text = serde_json::to_string_pretty(&doc).expect("result serializes");
    text.push('\n');
    text
}

/// `#` header, then `# key: value` summary lines, then the table body.
pub fn table_document(header: &Header, summary: &[(&str, String)], body: &str) -> String {
    let mut text = header.comment_lines();
    for (k, v) in summary {
        text.push_str(&format!("# {k}: {v}\n"));
    }
    text.push_str(body);
    text
}
