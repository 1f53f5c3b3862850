use std::io::{self, BufRead, Write};
use std::net::TcpListener;
use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use tungstenite::Message;

use super::protocol::Outbound;
use super::{Session, FRAME_INTERVAL_MS};

/// Milliseconds since the clock was started.
#[derive(Clone, Copy, Debug)]
pub struct Clock(Instant);

impl Clock {
    pub fn start() -> Self {
        Clock(Instant::now())
    }

    pub fn now_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1000.0
    }
}

fn write_all(out: &mut impl Write, messages: impl IntoIterator<Item = Outbound>) -> io::Result<()> {
    for m in messages {
        writeln!(out, "{}", m.to_line())?;
    }
    out.flush()
}

/// Serves newline-delimited messages from `input` until it closes. Frames
/// that are held back by coalescing are flushed once their interval ends.
pub fn serve_stdio<R, W>(session: &mut Session, input: R, output: &mut W) -> io::Result<()>
where
    R: BufRead + Send + 'static,
    W: Write,
{
    let clock = Clock::start();
    write_all(output, [session.full_frame(clock.now_ms())])?;
    let (tx, rx) = mpsc::channel::<io::Result<String>>();
    thread::spawn(move || {
        for line in input.lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    loop {
        let wait = session
            .next_deadline()
            .map_or(Duration::from_secs(3600), |d| {
                Duration::from_secs_f64(((d - clock.now_ms()).max(0.0)) / 1000.0)
            });
        match rx.recv_timeout(wait) {
            Ok(line) => {
                let line = line?;
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let out = session.handle_line(&line, clock.now_ms());
                write_all(output, out)?;
            }
            Err(RecvTimeoutError::Timeout) => write_all(output, session.poll(clock.now_ms()))?,
            Err(RecvTimeoutError::Disconnected) => {
                return write_all(output, session.flush(clock.now_ms()));
            }
        }
    }
}

/// Serves one client at a time over a WebSocket, each text message holding
/// one or more newline-delimited messages. The session survives reconnects;
/// every new client first receives a full frame. Stops after `max_clients`
/// connections when given.
pub fn serve_websocket(
    session: &mut Session,
    listener: &TcpListener,
    max_clients: Option<usize>,
) -> io::Result<()> {
    let clock = Clock::start();
    let mut served = 0;
    for stream in listener.incoming() {
        let stream = stream?;
        served += 1;
        match tungstenite::accept(stream) {
            Ok(mut ws) => {
                ws.get_ref()
                    .set_read_timeout(Some(Duration::from_secs_f64(FRAME_INTERVAL_MS / 1000.0)))?;
                let _ = client_loop(session, &mut ws, &clock);
            }
            Err(e) => eprintln!("websocket handshake failed: {e}"),
        }
        if max_clients.is_some_and(|m| served >= m) {
            break;
        }
    }
    Ok(())
}

fn client_loop<S: io::Read + Write>(
    session: &mut Session,
    ws: &mut tungstenite::WebSocket<S>,
    clock: &Clock,
) -> tungstenite::Result<()> {
    let send =
        |ws: &mut tungstenite::WebSocket<S>, msgs: Vec<Outbound>| -> tungstenite::Result<()> {
            for m in msgs {
                ws.send(Message::text(m.to_line()))?;
            }
            Ok(())
        };
    let first = session.full_frame(clock.now_ms());
    send(ws, vec![first])?;
    loop {
        match ws.read() {
            Ok(Message::Text(text)) => {
                for line in text.as_str().lines().filter(|l| !l.trim().is_empty()) {
                    let out = session.handle_line(line, clock.now_ms());
                    send(ws, out)?;
                }
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(
                    e.kind(),
                    io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                ) =>
            {
                let due = session.poll(clock.now_ms()).into_iter().collect();
                send(ws, due)?;
            }
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => {
                return Ok(())
            }
            Err(e) => return Err(e),
        }
    }
}
