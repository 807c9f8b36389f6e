//! OpenAI-compatible chat-completions responder. The key is read from the
//! environment; nothing in the offline path touches this module.

use std::time::Duration;

use ctxscope_core::chat::ResponseProvider;
use ctxscope_core::corpus::ItemId;
use ctxscope_core::{CoreError, Result};
use serde_json::{json, Value};

pub const API_KEY_VAR: &str = "CTXSCOPE_API_KEY";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "gpt-4o";

const INSTRUCTIONS: &str = "Answer using only the context below. Each context section starts with a line \
[[item:ID]]. Cite every item you use by writing its id in square brackets, for example [I000123].";

#[derive(Debug, Clone)]
pub struct RemoteResponder {
    pub endpoint: String,
    pub model: String,
    api_key: String,
    timeout: Duration,
}

impl RemoteResponder {
    pub fn from_env(endpoint: &str, model: &str) -> Result<Self> {
        let api_key = std::env::var(API_KEY_VAR)
            .map_err(|_| CoreError::Config(format!("{API_KEY_VAR} must be set for the remote provider")))?;
        Ok(RemoteResponder {
            endpoint: endpoint.to_owned(),
            model: model.to_owned(),
            api_key,
            timeout: Duration::from_secs(60),
        })
    }

    fn fail(&self, message: String, retryable: bool) -> CoreError {
        CoreError::Provider {
            provider: "remote".into(),
            message,
            retryable,
        }
    }
}

impl ResponseProvider for RemoteResponder {
    fn name(&self) -> &str {
        "remote"
    }

    fn respond(&self, system_prompt: &str, prompt: &str, rendered_context: &str) -> Result<(String, Vec<ItemId>)> {
        let body = json!({
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": format!("{system_prompt}\n\n{INSTRUCTIONS}\n\n{rendered_context}")},
                {"role": "user", "content": prompt},
            ],
        });
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| self.fail(e.to_string(), false))?;
        let resp = client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| self.fail(e.to_string(), true))?;
        let status = resp.status();
        if !status.is_success() {
            let retryable = status.is_server_error() || status.as_u16() == 429;
            return Err(self.fail(format!("upstream returned {status}"), retryable));
        }
        let value: Value = resp.json().map_err(|e| self.fail(format!("bad response body: {e}"), false))?;
        let text = value["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| self.fail("response has no message content".into(), false))?
            .to_owned();
        let citations = extract_citations(&text);
        Ok((text, citations))
    }
}

/// Ids written as `[I000123]`, first occurrence order, deduplicated.
pub fn extract_citations(text: &str) -> Vec<ItemId> {
    let mut out: Vec<ItemId> = Vec::new();
    for piece in text.split('[').skip(1) {
        let Some((inner, _)) = piece.split_once(']') else { continue };
        let inner = inner.trim().trim_start_matches("item:");
        let valid = inner.len() > 1 && inner.starts_with('I') && inner[1..].bytes().all(|b| b.is_ascii_digit());
        if valid && !out.iter().any(|c| c.0 == inner) {
            out.push(ItemId(inner.to_owned()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn citations_parsed_in_order() {
        let got = extract_citations("Budget rose [I000004]. See [I000002] and [I000004], not [x] or [I12a].");
        assert_eq!(got, vec![ItemId("I000004".into()), ItemId("I000002".into())]);
    }

    #[test]
    fn sentinel_style_accepted() {
        assert_eq!(extract_citations("[[item:I000001]]"), vec![ItemId("I000001".into())]);
    }
}
