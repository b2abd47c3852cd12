// SPDX-License-Identifier: Apache-2.0

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread::JoinHandle;

use rtlanneal::pipelines::backend::{generate, BackendError, GenParams, WireBackend, WireConfig};
use rtlanneal::Role;

struct Seen {
    headers: Vec<String>,
    body: serde_json::Value,
}

/// Answers one request with `status` and `reply`, returning what it saw.
fn stub(status: u16, reply: &'static str) -> (String, JoinHandle<Seen>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}/gen", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut headers = Vec::new();
        let mut len = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let line = line.trim_end().to_string();
            if line.is_empty() {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            headers.push(line);
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
            reply.len()
        )
        .unwrap();
        Seen {
            headers,
            body: serde_json::from_slice(&body).unwrap(),
        }
    });
    (endpoint, handle)
}

fn config(endpoint: &str, extra: &str) -> WireConfig {
    toml::from_str(&format!("endpoint = \"{endpoint}\"\nmodel = \"m1\"\ntimeout_s = 5\nbackoff_ms = 1\n{extra}")).unwrap()
}

fn call(backend: &mut WireBackend) -> Result<String, BackendError> {
    let params = GenParams { max_length: 256, temperature: 0.0, seed: 11 };
    generate(backend, Role::Critique, 3, "sys", "usr", params)
}

#[test]
fn request_shape_and_response_path() {
    let (endpoint, server) = stub(200, r#"{"output":{"items":[{"text":"hello"}]}}"#);
    let cfg = config(
        &endpoint,
        "response_path = \"output.items.0.text\"\n[request_fields]\nmax_length = \"max_new_tokens\"\nseed = \"\"\n",
    );
    let mut backend = WireBackend::with_token(cfg, Some("tok".into()));
    assert_eq!(call(&mut backend).unwrap(), "hello");
    let seen = server.join().unwrap();
    assert!(seen.headers.iter().any(|h| h.eq_ignore_ascii_case("authorization: Bearer tok")));
    assert_eq!(seen.body["model"], "m1");
    assert_eq!(seen.body["max_new_tokens"], 256);
    assert_eq!(seen.body["messages"][0]["content"], "sys");
    assert_eq!(seen.body["messages"][1]["role"], "user");
    assert!(seen.body.get("seed").is_none());
}

#[test]
fn error_status_is_reported() {
    let (endpoint, server) = stub(503, r#"{"error":"busy"}"#);
    let mut backend = WireBackend::with_token(config(&endpoint, ""), None);
    match call(&mut backend) {
        Err(BackendError::Status { status, body }) => {
            assert_eq!(status, 503);
            assert!(body.contains("busy"));
        }
        other => panic!("unexpected {other:?}"),
    }
    let seen = server.join().unwrap();
    assert!(!seen.headers.iter().any(|h| h.to_ascii_lowercase().starts_with("authorization")));
}

#[test]
fn missing_text_is_malformed() {
    let (endpoint, server) = stub(200, r#"{"choices":[]}"#);
    let mut backend = WireBackend::with_token(config(&endpoint, ""), None);
    assert!(matches!(call(&mut backend), Err(BackendError::Malformed(_))));
    server.join().unwrap();
}

#[test]
fn unreachable_endpoint_retries_then_fails() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = config(&format!("http://127.0.0.1:{port}/gen"), "max_retries = 2\n");
    let mut backend = WireBackend::with_token(cfg, None);
    match call(&mut backend) {
        Err(BackendError::Transport { attempts, .. }) => assert_eq!(attempts, 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn missing_auth_variable_is_a_config_error() {
    let cfg = config("http://127.0.0.1:1/gen", "auth_env = \"RTLANNEAL_TEST_UNSET_TOKEN\"\n");
    assert!(matches!(WireBackend::new(cfg), Err(BackendError::Config(_))));
}
