//! Session server: line-delimited JSON over TCP, or the same frames over a
//! websocket when the client opens with an HTTP upgrade.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Sender};
use std::sync::Arc;
use std::thread;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use holotunnel::protocol::{
    EngineConfig, LogDirection, ProtocolSession, SessionLogRecord, Throttle, TrajectoryLibrary, WireMessage,
};
use tungstenite::Message;

use crate::config::Config;

struct Shared {
    library: Arc<TrajectoryLibrary>,
    engine: EngineConfig,
    rate_hz: f64,
    burst: f64,
    log: Option<Sender<SessionLogRecord>>,
    next_session: AtomicU64,
}

/// Binds, reports the bound address on stdout and serves until killed.
pub fn serve(cfg: &Config) -> anyhow::Result<()> {
    let listener = TcpListener::bind((cfg.server.host.as_str(), cfg.server.port))
        .with_context(|| format!("binding {}:{}", cfg.server.host, cfg.server.port))?;
    let log = cfg.server.log.as_deref().map(spawn_log_writer).transpose()?;
    let shared = Arc::new(Shared {
        library: Arc::new(cfg.library()?),
        engine: cfg.engine.clone(),
        rate_hz: cfg.server.rate_hz,
        burst: cfg.server.burst,
        log,
        next_session: AtomicU64::new(1),
    });
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                eprintln!("accept failed: {e}");
                continue;
            }
        };
        let shared = Arc::clone(&shared);
        thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            if let Err(e) = handle_connection(stream, shared) {
                eprintln!("{peer}: {e}");
            }
        });
    }
    Ok(())
}

/// Single consumer appending every session's records to one file.
fn spawn_log_writer(path: &Path) -> anyhow::Result<Sender<SessionLogRecord>> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening log {}", path.display()))?;
    let (tx, rx) = mpsc::channel::<SessionLogRecord>();
    thread::spawn(move || {
        let mut w = BufWriter::new(file);
        while let Ok(first) = rx.recv() {
            let mut next = Some(first);
            while let Some(r) = next {
                let line = serde_json::to_string(&r).expect("log records serialize");
                if writeln!(w, "{line}").is_err() {
                    return;
                }
                next = rx.try_recv().ok();
            }
            if w.flush().is_err() {
                return;
            }
        }
    });
    Ok(tx)
}

fn wall_clock_ms() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64() * 1000.0)
}

/// One client's engine, log sequence and pacing.
struct Conversation {
    engine: ProtocolSession,
    shared: Arc<Shared>,
    session: u64,
    seq: u64,
    throttle: Throttle,
    opened: Instant,
}

impl Conversation {
    fn new(shared: Arc<Shared>) -> Self {
        Self {
            engine: ProtocolSession::new(Arc::clone(&shared.library), shared.engine.clone()),
            session: shared.next_session.fetch_add(1, Ordering::Relaxed),
            throttle: Throttle::new(shared.rate_hz, shared.burst),
            shared,
            seq: 0,
            opened: Instant::now(),
        }
    }

    fn log(&mut self, dir: LogDirection, msg: &WireMessage) {
        if let Some(tx) = &self.shared.log {
            let _ = tx.send(SessionLogRecord {
                session: self.session,
                seq: self.seq,
                dir,
                ts_ms: wall_clock_ms(),
                msg: msg.clone(),
            });
        }
        self.seq += 1;
    }

    /// Handles one inbound line and returns the reply lines.
    fn on_line(&mut self, line: &str) -> Vec<String> {
        if line.trim().is_empty() {
            return Vec::new();
        }
        let wait = self.throttle.delay(self.opened.elapsed());
        if !wait.is_zero() {
            thread::sleep(wait);
        }
        let msg = match WireMessage::parse_line(line) {
            Ok(m) => m,
            // nothing to replay, so neither side goes to the log
            Err(e) => return vec![e.to_line()],
        };
        self.log(LogDirection::In, &msg);
        let replies = self.engine.handle(msg);
        replies
            .iter()
            .map(|r| {
                self.log(LogDirection::Out, r);
                r.to_line()
            })
            .collect()
    }
}

fn handle_connection(stream: TcpStream, shared: Arc<Shared>) -> anyhow::Result<()> {
    stream.set_nodelay(true)?;
    if opens_with_http_get(&stream)? {
        serve_websocket(stream, shared)
    } else {
        serve_lines(stream, shared)
    }
}

fn opens_with_http_get(stream: &TcpStream) -> std::io::Result<bool> {
    let mut buf = [0u8; 4];
    loop {
        let n = stream.peek(&mut buf)?;
        if n == 0 || buf[..n] != b"GET "[..n] {
            return Ok(false);
        }
        if n == 4 {
            return Ok(true);
        }
        thread::sleep(std::time::Duration::from_millis(1));
    }
}

fn serve_lines(stream: TcpStream, shared: Arc<Shared>) -> anyhow::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut conv = Conversation::new(shared);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        let line = String::from_utf8_lossy(&buf);
        for out in conv.on_line(line.trim_end_matches(['\n', '\r'])) {
            writer.write_all(out.as_bytes())?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
    }
}

fn serve_websocket(stream: TcpStream, shared: Arc<Shared>) -> anyhow::Result<()> {
    let mut ws = tungstenite::accept(stream).map_err(|e| anyhow::anyhow!("websocket handshake: {e}"))?;
    let mut conv = Conversation::new(shared);
    loop {
        let text = match ws.read() {
            Ok(Message::Text(t)) => t.to_string(),
            Ok(Message::Binary(b)) => String::from_utf8_lossy(&b).into_owned(),
            Ok(Message::Close(_)) | Err(tungstenite::Error::ConnectionClosed) => return Ok(()),
            Ok(_) => continue,
            Err(e) => return Err(e.into()),
        };
        for line in text.lines() {
            for out in conv.on_line(line) {
                ws.send(Message::text(out))?;
            }
        }
    }
}
