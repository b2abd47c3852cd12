// SPDX-License-Identifier: Apache-2.0

//! Talks to a chat-completion endpoint. A tiny local server stands in for
//! the real service; it answers every request with a fixed module.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use rtlanneal::pipelines::backend::{generate, GenParams, WireBackend, WireConfig};
use rtlanneal::Role;

fn serve_once(listener: &TcpListener) -> std::io::Result<String> {
    let (stream, _) = listener.accept()?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut len = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        if line.trim().is_empty() {
            break;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap_or(0);
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body)?;
    let reply = r#"{"choices":[{"message":{"content":"```verilog\nmodule top(input clk);\nendmodule\n```"}}]}"#;
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
        reply.len()
    )?;
    Ok(String::from_utf8_lossy(&body).into_owned())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let endpoint = format!("http://{}/v1/chat/completions", listener.local_addr()?);
    let server = std::thread::spawn(move || serve_once(&listener));

    let cfg: WireConfig = toml::from_str(&format!(
        "endpoint = \"{endpoint}\"\nmodel = \"local-model\"\ntimeout_s = 5\nmax_retries = 0\n"
    ))?;
    let mut backend = WireBackend::with_token(cfg, None);
    let params = GenParams { seed: 7, ..GenParams::default() };
    let text = generate(&mut backend, Role::Generator, 0, "You write Verilog.", "A clocked top module.", params)?;
    let request = server.join().expect("server thread")?;
    println!("request body: {request}");
    println!("response text:\n{text}");
    Ok(())
}
