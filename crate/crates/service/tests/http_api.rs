use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use opprog_core::categorize::CategoryLexicon;
use opprog_core::datakit::{validate_record, ProblemRecord};
use opprog_core::evalkit::MatchConfig;
use opprog_core::opcore::{ConstTable, OpRegistry};
use opprog_core::Category;
use opprog_service::{build_platform, router, Platform, ServiceConfig};

fn problems() -> Vec<ProblemRecord> {
    let opts = |v: [&str; 5]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        ProblemRecord {
            id: "avg".into(),
            problem: "a student scored 85 , 89 , 80 and 95 out of 100 in 4 tests . what is the average score ?".into(),
            rationale: String::new(),
            options: opts(["a ) 85", "b ) 86.5", "c ) 87.25", "d ) 88", "e ) 89.75"]),
            correct: 'c',
            category: Some(Category::General),
            program: None,
        },
        ProblemRecord {
            id: "circle".into(),
            problem: "find the area of a circle whose radius is 7 cm .".into(),
            rationale: String::new(),
            options: opts(["a ) 144", "b ) 154", "c ) 164", "d ) 174", "e ) 184"]),
            correct: 'b',
            category: None,
            program: None,
        },
    ]
}

fn platform() -> Platform {
    Platform::new(
        problems(),
        OpRegistry::shipped(),
        ConstTable::shipped(),
        CategoryLexicon::shipped(),
        MatchConfig::default(),
        0.8,
    )
}

struct Api {
    state: Arc<Mutex<Platform>>,
}

impl Api {
    fn new(p: Platform) -> Self {
        Api {
            state: Arc::new(Mutex::new(p)),
        }
    }

    async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json");
        let req = match body {
            Some(b) => req.body(Body::from(b.to_string())).unwrap(),
            None => req.body(Body::empty()).unwrap(),
        };
        let resp = router(self.state.clone()).oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let v = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, v)
    }
}

fn error_code(v: &Value) -> &str {
    v["error"]["code"].as_str().unwrap_or("")
}

#[tokio::test]
async fn average_annotation_flow() {
    let api = Api::new(platform());
    let (st, s) = api
        .call(
            "POST",
            "/sessions",
            Some(json!({"problem_id": "avg", "annotator": "ann"})),
        )
        .await;
    assert_eq!(st, StatusCode::CREATED);
    let sid = s["session_id"].as_str().unwrap().to_string();
    let values: Vec<f64> = s["valid_args"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["value"].as_f64().unwrap())
        .collect();
    for v in [85.0, 89.0, 80.0, 95.0, 100.0, 4.0] {
        assert!(values.contains(&v));
    }
    let steps = [
        ("add", ["n0", "n1"]),
        ("add", ["#0", "n2"]),
        ("add", ["#1", "n3"]),
        ("divide", ["#2", "n5"]),
    ];
    let mut last = Value::Null;
    for (op, args) in steps {
        let (st, s) = api
            .call(
                "POST",
                &format!("/sessions/{sid}/ops"),
                Some(json!({"op": op, "args": args})),
            )
            .await;
        assert_eq!(st, StatusCode::OK, "{s}");
        last = s;
    }
    let stack: Vec<f64> = last["history"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["value"].as_f64().unwrap())
        .collect();
    assert_eq!(stack, vec![174.0, 254.0, 349.0, 87.25]);
    assert_eq!(last["valid_args"].as_array().unwrap().last().unwrap()["arg"], "#3");

    let (_, verdict) = api.call("POST", &format!("/sessions/{sid}/submit"), None).await;
    assert_eq!(verdict["accepted"], true);
    let tid = verdict["task_id"].as_str().unwrap().to_string();

    let (_, none) = api.call("GET", "/validation/next?annotator=ann", None).await;
    assert!(none["task"].is_null());
    let (_, next) = api.call("GET", "/validation/next?annotator=v1", None).await;
    assert_eq!(next["task"]["task"]["task_id"], tid.as_str());
    assert_eq!(next["task"]["steps"][3]["value"], 87.25);

    let vote = |who: &str, valid: bool| json!({"annotator": who, "valid": valid});
    let (st, t) = api
        .call("POST", &format!("/validation/{tid}/vote"), Some(vote("v1", true)))
        .await;
    assert_eq!((st, t["resolution"].as_str()), (StatusCode::OK, Some("pending")));
    let (st, t) = api
        .call("POST", &format!("/validation/{tid}/vote"), Some(vote("v1", true)))
        .await;
    assert_eq!((st, error_code(&t)), (StatusCode::CONFLICT, "duplicate_vote"));
    let (_, t) = api
        .call("POST", &format!("/validation/{tid}/vote"), Some(vote("v2", true)))
        .await;
    assert_eq!(t["resolution"], "accepted");

    let p = api.state.lock().unwrap();
    for r in p.persisted_records() {
        assert!(validate_record(&r, p.registry(), p.consts(), p.gate()).is_valid());
    }
}

#[tokio::test]
async fn errors_are_coded() {
    let api = Api::new(platform());
    let (st, e) = api
        .call("POST", "/sessions", Some(json!({"problem_id": "missing"})))
        .await;
    assert_eq!((st, error_code(&e)), (StatusCode::NOT_FOUND, "unknown_problem"));
    let (st, e) = api.call("POST", "/sessions", Some(json!({"nope": 1}))).await;
    assert_eq!((st, error_code(&e)), (StatusCode::BAD_REQUEST, "bad_request"));
    let (_, s) = api.call("POST", "/sessions", Some(json!({"problem_id": "avg"}))).await;
    let sid = s["session_id"].as_str().unwrap();
    let ops = format!("/sessions/{sid}/ops");
    let (st, e) = api
        .call("POST", &ops, Some(json!({"op": "add", "args": ["n0", 87.25]})))
        .await;
    assert_eq!(
        (st, error_code(&e)),
        (StatusCode::UNPROCESSABLE_ENTITY, "invalid_argument")
    );
    let (_, e) = api.call("POST", &ops, Some(json!({"op": "fly", "args": ["n0"]}))).await;
    assert_eq!(error_code(&e), "unknown_operation");
    let (_, _) = api
        .call("POST", &ops, Some(json!({"op": "subtract", "args": ["n0", "n0"]})))
        .await;
    let (_, e) = api
        .call("POST", &ops, Some(json!({"op": "divide", "args": ["n0", "#0"]})))
        .await;
    assert_eq!(error_code(&e), "domain_error");
    let (_, s) = api.call("GET", &format!("/sessions/{sid}"), None).await;
    assert_eq!(s["history"].as_array().unwrap().len(), 1);
    let (_, _) = api.call("POST", &format!("/sessions/{sid}/undo"), None).await;
    let (st, e) = api.call("POST", &format!("/sessions/{sid}/undo"), None).await;
    assert_eq!(
        (st, error_code(&e)),
        (StatusCode::UNPROCESSABLE_ENTITY, "empty_history")
    );
    let (st, e) = api.call("GET", "/sessions/s99", None).await;
    assert_eq!((st, error_code(&e)), (StatusCode::NOT_FOUND, "unknown_session"));
    let (st, _) = api.call("GET", "/validation/next", None).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn constant_only_session_is_gated() {
    let api = Api::new(platform());
    let (_, s) = api.call("POST", "/sessions", Some(json!({"problem_id": "avg"}))).await;
    let sid = s["session_id"].as_str().unwrap();
    api.call(
        "POST",
        &format!("/sessions/{sid}/ops"),
        Some(json!({"op": "multiply", "args": ["const_100", "const_1"]})),
    )
    .await;
    let (st, v) = api.call("POST", &format!("/sessions/{sid}/submit"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["accepted"], false);
    assert_eq!(v["rejection"]["code"], "no_problem_number");
}

#[tokio::test]
async fn geometry_problem_gets_its_palette() {
    let api = Api::new(platform());
    let (_, s) = api
        .call("POST", "/sessions", Some(json!({"problem_id": "circle"})))
        .await;
    assert_eq!(s["category"], "geometry");
    let palette: Vec<&str> = s["op_palette"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(palette.contains(&"circle_area") && palette.contains(&"add"));
    assert!(s["valid_args"]
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a["arg"] == "const_pi"));
    let (_, p) = api.call("GET", "/problems/circle", None).await;
    assert_eq!(p["numbers"], json!([7.0]));
    let (_, r) = api.call("GET", "/registry", None).await;
    assert_eq!(r["operations"].as_array().unwrap().len(), 58);
    assert!(r["operations"][0]["hint"]["formula"].is_string());
}

#[tokio::test]
async fn trust_over_http() {
    let api = Api::new(platform());
    for correct in [true, false, false] {
        api.call("POST", "/annotators/x/test-answers", Some(json!({"correct": correct})))
            .await;
    }
    let (_, a) = api.call("GET", "/annotators/x", None).await;
    assert_eq!(a["trusted"], false);
    let (st, e) = api.call("GET", "/validation/next?annotator=x", None).await;
    assert_eq!((st, error_code(&e)), (StatusCode::FORBIDDEN, "untrusted_annotator"));
}

#[test]
fn event_log_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("problems.json");
    opprog_core::datakit::save_dataset(&problems(), &data).unwrap();
    let cfg = ServiceConfig {
        problems: Some(data),
        event_log: Some(dir.path().join("events.jsonl")),
        ..ServiceConfig::default()
    };
    let (sid, tid) = {
        let mut p = build_platform(&cfg).unwrap();
        let sid = p.create_session("avg", "ann").unwrap().session_id.clone();
        for (op, a, b) in [
            ("add", "n0", "n1"),
            ("add", "#0", "n2"),
            ("add", "#1", "n3"),
            ("divide", "#2", "n5"),
        ] {
            p.apply_operation(&sid, op, &[a.parse().unwrap(), b.parse().unwrap()])
                .unwrap();
        }
        let tid = p.submit(&sid).unwrap().task_id.unwrap();
        p.cast_vote(&tid, "v1", true).unwrap();
        (sid, tid)
    };
    let mut p = build_platform(&cfg).unwrap();
    assert_eq!(p.session(&sid).unwrap().history.len(), 4);
    assert_eq!(p.task(&tid).unwrap().votes.len(), 1);
    assert_eq!(p.events().len(), 7);
    let next = p.create_session("circle", "ann").unwrap().session_id.clone();
    assert_eq!(next, "s2");
}
