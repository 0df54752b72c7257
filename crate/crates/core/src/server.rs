//! Read-only network access to one language database.
//!
//! One request per line, answered against a snapshot taken at start:
//!
//! ```text
//! PING             -> PONG
//! RELATIONS        -> OK <n>, one relation name per line, "."
//! QUERY <text>     -> OK <n>, one delimited row per line, "."
//! anything else    -> ERR 400 <message>
//! bad query        -> ERR 422 <diagnostic>
//! ```
//!
//! Row lines use the storage record encoding.  A line that begins with "."
//! is sent with one extra leading ".", so the lone "." terminator is never
//! ambiguous; clients strip it again.

use std::io::{self, BufRead, BufReader, BufWriter, ErrorKind, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use thiserror::Error;

use crate::query::{parse_query_unchecked, run_query, ResultTable};
use crate::storage::{decode_line, Database, Value};

pub const DEFAULT_PORT: u16 = 4242;
pub const ERR_BAD_REQUEST: u16 = 400;
pub const ERR_BAD_QUERY: u16 = 422;

const POLL: Duration = Duration::from_millis(100);

fn stuff(line: &str) -> String {
    if line.starts_with('.') {
        format!(".{line}")
    } else {
        line.to_string()
    }
}

fn one_line(message: &str) -> String {
    message.replace(['\r', '\n'], " ")
}

/// The complete response block for one request line.
pub fn respond(db: &Database, request: &str) -> String {
    let request = request.strip_suffix('\r').unwrap_or(request);
    let block = |lines: Vec<String>| {
        let mut out = format!("OK {}\n", lines.len());
        for l in lines {
            out.push_str(&stuff(&l));
            out.push('\n');
        }
        out.push_str(".\n");
        out
    };
    let (verb, rest) = request.split_once(' ').unwrap_or((request, ""));
    match verb {
        "PING" if rest.is_empty() => "PONG\n".to_string(),
        "RELATIONS" if rest.is_empty() => block(db.schema().relations().iter().map(|r| r.name.clone()).collect()),
        "QUERY" if rest.trim_start().starts_with('\\') => {
            format!("ERR {ERR_BAD_REQUEST} read-only server: commands are not accepted\n")
        }
        "QUERY" => match run_query(db, rest) {
            Ok(table) => block(table.delimited_lines()),
            Err(e) => format!("ERR {ERR_BAD_QUERY} {}\n", one_line(&e.to_string())),
        },
        _ => format!("ERR {ERR_BAD_REQUEST} unknown request {:?}\n", one_line(verb)),
    }
}

fn serve_connection(db: &Database, stream: TcpStream, stop: &AtomicBool) -> io::Result<()> {
    stream.set_read_timeout(Some(POLL))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut line = Vec::new();
    loop {
        match reader.read_until(b'\n', &mut line) {
            Ok(0) => return Ok(()),
            Ok(_) if line.ends_with(b"\n") => {
                line.pop();
                let response = match std::str::from_utf8(&line) {
                    Ok(text) => respond(db, text),
                    Err(_) => format!("ERR {ERR_BAD_REQUEST} request is not valid UTF-8\n"),
                };
                writer.write_all(response.as_bytes())?;
                writer.flush()?;
                line.clear();
            }
            // partial line at end of stream
            Ok(_) => return Ok(()),
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted) => {
                if stop.load(Ordering::SeqCst) {
                    return Ok(());
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// A running server; dropping it without [`ServerHandle::shutdown`] leaves
/// the service threads running.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: JoinHandle<()>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting, lets in-flight responses finish and joins every
    /// connection thread.
    pub fn shutdown(self) {
        self.stop.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
        let _ = self.accept.join();
    }
}

/// Binds `addr` and serves `db` until shut down.
pub fn serve(db: Database, addr: impl ToSocketAddrs) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    let addr = listener.local_addr()?;
    let db = Arc::new(db);
    let stop = Arc::new(AtomicBool::new(false));
    let connections: Arc<Mutex<Vec<JoinHandle<()>>>> = Arc::default();
    let accept = {
        let stop = Arc::clone(&stop);
        thread::spawn(move || {
            for stream in listener.incoming() {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let (db, stop) = (Arc::clone(&db), Arc::clone(&stop));
                let handle = thread::spawn(move || {
                    let _ = serve_connection(&db, stream, &stop);
                });
                let mut live = connections.lock().expect("connection list");
                live.retain(|h| !h.is_finished());
                live.push(handle);
            }
            let live = std::mem::take(&mut *connections.lock().expect("connection list"));
            for h in live {
                let _ = h.join();
            }
        })
    };
    Ok(ServerHandle { addr, stop, accept })
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("server error {code}: {message}")]
    Server { code: u16, message: String },
}

/// A connection that can carry any number of requests.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Client, ClientError> {
        let stream = TcpStream::connect(addr)?;
        Ok(Client {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
        })
    }

    fn read_line(&mut self) -> Result<String, ClientError> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 || !line.ends_with('\n') {
            return Err(ClientError::Protocol("connection closed mid-response".into()));
        }
        line.pop();
        Ok(line)
    }

    fn request(&mut self, line: &str) -> Result<String, ClientError> {
        self.writer.write_all(format!("{line}\n").as_bytes())?;
        self.writer.flush()?;
        let first = self.read_line()?;
        if let Some(rest) = first.strip_prefix("ERR ") {
            let (code, message) = rest.split_once(' ').unwrap_or((rest, ""));
            let code = code
                .parse()
                .map_err(|_| ClientError::Protocol(format!("bad error line {first:?}")))?;
            return Err(ClientError::Server {
                code,
                message: message.to_string(),
            });
        }
        Ok(first)
    }

    fn block(&mut self, line: &str) -> Result<Vec<String>, ClientError> {
        let first = self.request(line)?;
        let n: usize = first
            .strip_prefix("OK ")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| ClientError::Protocol(format!("expected OK line, got {first:?}")))?;
        let mut lines = Vec::with_capacity(n);
        loop {
            let l = self.read_line()?;
            if l == "." {
                break;
            }
            lines.push(l.strip_prefix('.').map(str::to_string).unwrap_or(l));
        }
        if lines.len() != n {
            return Err(ClientError::Protocol(format!("announced {n} lines, got {}", lines.len())));
        }
        Ok(lines)
    }

    pub fn ping(&mut self) -> Result<(), ClientError> {
        match self.request("PING")?.as_str() {
            "PONG" => Ok(()),
            other => Err(ClientError::Protocol(format!("expected PONG, got {other:?}"))),
        }
    }

    pub fn relations(&mut self) -> Result<Vec<String>, ClientError> {
        self.block("RELATIONS")
    }

    /// Runs a query remotely.  Cells come back as strings holding the
    /// rendering of the server's values, in the server's row order.
    pub fn query(&mut self, text: &str) -> Result<ResultTable, ClientError> {
        let text = text.replace(['\r', '\n'], " ");
        let lines = self.block(&format!("QUERY {text}"))?;
        let header = parse_query_unchecked(&text)
            .map_err(|e| ClientError::Protocol(format!("server answered an unparsable query: {e}")))?
            .projection;
        let mut rows = Vec::with_capacity(lines.len());
        for l in lines {
            let fields = decode_line(&l).map_err(ClientError::Protocol)?;
            if fields.len() != header.len() {
                return Err(ClientError::Protocol(format!("row {l:?} does not have {} fields", header.len())));
            }
            rows.push(fields.into_iter().map(Value::Str).collect());
        }
        Ok(ResultTable { header, rows })
    }
}

impl Drop for Client {
    fn drop(&mut self) {
        let _ = self.writer.shutdown(Shutdown::Both);
    }
}

/// One-shot query over a fresh connection.
pub fn remote_query(addr: impl ToSocketAddrs, text: &str) -> Result<ResultTable, ClientError> {
    Client::connect(addr)?.query(text)
}
