use std::io::{BufRead, BufReader, Write};
use std::net::{Ipv4Addr, SocketAddr, TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use super::faults::CompiledRules;
use super::{FaultBehavior, FaultRule, SimError};

/// A running fixture server. Dropping the handle stops it.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://127.0.0.1:<port><path>`
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    /// Stop accepting connections and wait for the accept loop to exit.
    /// Requests already being served finish on their own threads.
    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        if let Some(thread) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect_timeout(&self.addr, Duration::from_secs(1));
            let _ = thread.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_now();
    }
}

/// Serve `site_dir` on 127.0.0.1. Port 0 picks a free port.
///
/// Fault rules are checked in order against the request path (query
/// ignored) and the first match applies; unmatched paths are served from
/// disk with a media type guessed from the extension.
pub fn serve_fixture(
    site_dir: &Path,
    faults: &[FaultRule],
    port: u16,
) -> Result<ServerHandle, SimError> {
    if !site_dir.is_dir() {
        return Err(SimError::NotADirectory(site_dir.display().to_string()));
    }
    let rules = Arc::new(CompiledRules::new(faults)?);
    let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, port))
        .map_err(|source| SimError::Bind { port, source })?;
    let addr = listener
        .local_addr()
        .map_err(|source| SimError::Bind { port, source })?;
    let stop = Arc::new(AtomicBool::new(false));
    let root = Arc::new(site_dir.to_path_buf());

    let thread = {
        let stop = Arc::clone(&stop);
        std::thread::spawn(move || {
            for conn in listener.incoming() {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = conn else { continue };
                let root = Arc::clone(&root);
                let rules = Arc::clone(&rules);
                std::thread::spawn(move || {
                    if let Err(e) = handle(stream, &root, &rules) {
                        tracing::debug!("fixture connection: {e}");
                    }
                });
            }
        })
    };
    tracing::info!("serving {} on {addr}", site_dir.display());
    Ok(ServerHandle {
        addr,
        stop,
        thread: Some(thread),
    })
}

fn reason(code: u16) -> &'static str {
    match code {
        200 => "OK",
        301 => "Moved Permanently",
        302 => "Found",
        400 => "Bad Request",
        403 => "Forbidden",
        404 => "Not Found",
        405 => "Method Not Allowed",
        410 => "Gone",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        502 => "Bad Gateway",
        503 => "Service Unavailable",
        504 => "Gateway Timeout",
        _ => "Status",
    }
}

fn respond(
    stream: &mut TcpStream,
    code: u16,
    content_type: &str,
    body: &[u8],
) -> std::io::Result<()> {
    let head = format!(
        "HTTP/1.1 {code} {}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        reason(code),
        body.len()
    );
    let mut out = head.into_bytes();
    out.extend_from_slice(body);
    stream.write_all(&out)?;
    stream.flush()
}

/// Map a request path onto a file below `root`, refusing anything that
/// would climb out of it.
fn resolve(root: &Path, path: &str) -> Option<PathBuf> {
    let rel = path.trim_start_matches('/');
    let mut out = root.to_path_buf();
    for c in Path::new(rel).components() {
        match c {
            Component::Normal(part) => out.push(part),
            Component::CurDir => {}
            _ => return None,
        }
    }
    if out.is_dir() {
        out.push("index.html");
    }
    Some(out)
}

fn handle(mut stream: TcpStream, root: &Path, rules: &CompiledRules) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(10)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 || header.trim_end().is_empty() {
            break;
        }
    }

    let mut parts = request_line.split_whitespace();
    let (Some(method), Some(target)) = (parts.next(), parts.next()) else {
        return respond(&mut stream, 400, "text/plain", b"bad request\n");
    };
    if method != "GET" {
        return respond(&mut stream, 405, "text/plain", b"only GET is supported\n");
    }
    let path = target.split(['?', '#']).next().unwrap_or("/");

    match rules.lookup(path) {
        Some(FaultBehavior::Drop) => return Ok(()),
        Some(FaultBehavior::Status(code)) => {
            return respond(&mut stream, code, "text/plain", b"fault injected\n")
        }
        Some(FaultBehavior::DelayMs(ms)) => std::thread::sleep(Duration::from_millis(ms)),
        None => {}
    }

    match resolve(root, path).and_then(|file| Some((std::fs::read(&file).ok()?, file))) {
        Some((body, file)) => {
            let mime = mime_guess::from_path(&file).first_or_octet_stream();
            respond(&mut stream, 200, mime.essence_str(), &body)
        }
        None => respond(&mut stream, 404, "text/plain", b"not found\n"),
    }
}

#[cfg(test)]
mod tests {
    use std::io::Read;

    use super::*;

    fn get(addr: SocketAddr, target: &str) -> Vec<u8> {
        let mut s = TcpStream::connect(addr).unwrap();
        write!(
            s,
            "GET {target} HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n"
        )
        .unwrap();
        let mut out = Vec::new();
        let _ = s.read_to_end(&mut out);
        out
    }

    #[test]
    fn serves_files_faults_and_traversal() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("index.html"), "<p>hi</p>").unwrap();
        std::fs::write(dir.path().join("a.css"), "b{}").unwrap();
        let server = serve_fixture(
            dir.path(),
            &[
                FaultRule::new("/gone.css", FaultBehavior::Status(404)),
                FaultRule::new("/a.css", FaultBehavior::Drop),
            ],
            0,
        )
        .unwrap();
        let addr = server.addr();

        let root = String::from_utf8(get(addr, "/?q=1")).unwrap();
        assert!(root.starts_with("HTTP/1.1 200 OK\r\n"), "{root}");
        assert!(root.contains("Content-Type: text/html\r\n"));
        assert!(root.ends_with("<p>hi</p>"));

        assert!(get(addr, "/gone.css").starts_with(b"HTTP/1.1 404"));
        assert!(get(addr, "/a.css").is_empty());
        assert!(get(addr, "/nope").starts_with(b"HTTP/1.1 404"));
        assert!(get(addr, "/../etc/passwd").starts_with(b"HTTP/1.1 404"));

        server.shutdown();
        assert!(TcpStream::connect(addr).is_err() || get(addr, "/").is_empty());
    }

    #[test]
    fn busy_port_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let first = serve_fixture(dir.path(), &[], 0).unwrap();
        let err = serve_fixture(dir.path(), &[], first.port()).err().unwrap();
        assert!(matches!(err, SimError::Bind { .. }), "{err}");
    }
}
