#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::{Arc, OnceLock};
use std::thread::JoinHandle;

use esr_cli::cli::glyph_dataset;
use esr_cli::service::{serve, AppState};
use esr_core::corpus::{generate_glyphs, GeneratorConfig};
use esr_core::net::{init_random, train_backprop};
use esr_core::{MlpModel, TrainConfig};
use tokio::sync::oneshot;

pub struct HttpResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: String,
}

/// Minimal HTTP/1.1 client: one request per connection.
pub fn http(addr: SocketAddr, method: &str, path: &str, body: Option<&str>) -> HttpResponse {
    let mut stream = TcpStream::connect(addr).expect("connect");
    let body = body.unwrap_or("");
    let request = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(request.as_bytes()).expect("send");
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).expect("receive");
    let raw = String::from_utf8(raw).expect("utf-8 response");
    let (head, rest) = raw.split_once("\r\n\r\n").expect("header terminator");
    let status = head.split(' ').nth(1).and_then(|s| s.parse().ok()).expect("status code");
    let header = |name: &str| {
        head.lines()
            .skip(1)
            .filter_map(|l| l.split_once(':'))
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.trim().to_string())
    };
    let body = if header("transfer-encoding").is_some_and(|v| v.eq_ignore_ascii_case("chunked")) {
        dechunk(rest)
    } else {
        rest.to_string()
    };
    HttpResponse {
        status,
        content_type: header("content-type"),
        body,
    }
}

fn dechunk(mut rest: &str) -> String {
    let mut out = String::new();
    loop {
        let (size, tail) = rest.split_once("\r\n").expect("chunk size");
        let n = usize::from_str_radix(size.trim(), 16).expect("hex chunk size");
        if n == 0 {
            return out;
        }
        out.push_str(&tail[..n]);
        rest = &tail[n + 2..];
    }
}

/// A service running on an ephemeral port in a background thread.
pub struct Server {
    pub addr: SocketAddr,
    pub state: Arc<AppState>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl Server {
    pub fn start(state: AppState) -> Server {
        let state = Arc::new(state);
        let (stop, stopped) = oneshot::channel::<()>();
        let (ready_tx, ready_rx) = std::sync::mpsc::channel();
        let shared = Arc::clone(&state);
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().expect("runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.expect("bind");
                ready_tx.send(listener.local_addr().unwrap()).unwrap();
                serve(listener, shared, async {
                    let _ = stopped.await;
                })
                .await
                .expect("serve");
            });
        });
        let addr = ready_rx.recv().expect("server address");
        Server {
            addr,
            state,
            stop: Some(stop),
            thread: Some(thread),
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// A model fitted to the 26 clean templates, so clean template traces come
/// back right. Defaults need about 20 000 epochs on so few samples; a faster
/// schedule gets there in a few seconds. Trained once per test binary.
pub fn small_model() -> MlpModel {
    static MODEL: OnceLock<MlpModel> = OnceLock::new();
    MODEL
        .get_or_init(|| {
            let cfg = GeneratorConfig { samples_per_class: 1, ..GeneratorConfig::default() }.clean();
            let data = glyph_dataset(&generate_glyphs(&cfg).glyphs).unwrap();
            let train = TrainConfig { learning_rate: 0.3, momentum: 0.9, max_epochs: 8000, ..TrainConfig::default() };
            train_backprop(&init_random(&train), &data, &train).unwrap().0
        })
        .clone()
}
