use ctxscope_wasm::DemoCore;
use serde_json::Value;

fn demo() -> DemoCore {
    DemoCore::build(3, 30, 300).unwrap()
}

#[test]
fn topics_and_layout() {
    let d = demo();
    let topics: Value = serde_json::from_str(&d.topics()).unwrap();
    assert_eq!(topics.as_array().unwrap().len(), 7);
    let collapsed: Value = serde_json::from_str(&d.layout(-1).unwrap()).unwrap();
    assert_eq!(collapsed["placements"].as_array().unwrap().len(), 300);
    assert!(collapsed["expanded_topic"].is_null());
    let expanded: Value = serde_json::from_str(&d.layout(4).unwrap()).unwrap();
    assert_eq!(expanded["expanded_topic"], 4);
    assert!(d.layout(12).is_err());
}

#[test]
fn retrieval_counts_match_hits() {
    let d = demo();
    let r: Value = serde_json::from_str(&d.retrieve("marketing campaign launch", 0.5).unwrap()).unwrap();
    let hits = r["hits"].as_array().unwrap();
    assert_eq!(hits.len(), 50);
    let counted: u64 = r["topic_counts"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(counted, 50);
    assert!(d.retrieve("   ", 0.5).is_err());
    assert!(d.retrieve("x", 2.0).is_err());
}
