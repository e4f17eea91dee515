//! A blocking HTTP/1.1 server on 127.0.0.1 that answers from a
//! `litrepo::mock::Fixture`, for exercising the real network transport.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use litrepo::http::HttpRequest;
use litrepo::mock::Fixture;

pub struct LocalServer {
    listener: Option<TcpListener>,
    base: String,
    seen: Arc<Mutex<Vec<HttpRequest>>>,
}

impl LocalServer {
    pub fn bind() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind local port");
        let base = format!("http://{}", listener.local_addr().unwrap());
        Self {
            listener: Some(listener),
            base,
            seen: Arc::new(Mutex::new(Vec::new())),
        }
    }

    pub fn url(&self) -> &str {
        &self.base
    }

    pub fn requests(&self) -> Vec<HttpRequest> {
        self.seen.lock().unwrap().clone()
    }

    /// Starts answering in a background thread. The server lives until the
    /// test process exits.
    pub fn serve(&mut self, fixture: Arc<dyn Fixture>) {
        let listener = self.listener.take().expect("serve called twice");
        let base = self.base.clone();
        let seen = self.seen.clone();
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let fixture = fixture.clone();
                let base = base.clone();
                let seen = seen.clone();
                thread::spawn(move || {
                    let _ = handle(stream, &base, fixture.as_ref(), &seen);
                });
            }
        });
    }
}

fn handle(
    stream: TcpStream,
    base: &str,
    fixture: &dyn Fixture,
    seen: &Mutex<Vec<HttpRequest>>,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
    let mut request = HttpRequest::get(format!("{base}{path}"));
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line.trim().is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            request.headers.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    seen.lock().unwrap().push(request.clone());

    let mut stream = stream;
    let Ok(response) = fixture.respond(&request) else {
        // simulated transport failure: drop the connection
        return Ok(());
    };
    let mut head = format!("HTTP/1.1 {} X\r\n", response.status);
    for (k, v) in &response.headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str(&format!(
        "Content-Length: {}\r\nConnection: close\r\n\r\n",
        response.body.len()
    ));
    stream.write_all(head.as_bytes())?;
    stream.write_all(response.body.as_bytes())?;
    stream.flush()
}
