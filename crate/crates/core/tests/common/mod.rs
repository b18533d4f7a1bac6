//! Test-only oracles and an in-process HTTP mock.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use idleprobe::clock::Clock;
use idleprobe::lifecycle::{Millis, ProviderPolicy, RecycleRule};

/// Straight-line reference for the platform lifecycle: tracks only
/// (created, last served, cap) and answers warm/cold per request.
pub fn oracle_warm(policy: &ProviderPolicy, times: &[Millis], seed: u64) -> Vec<bool> {
    let idle = policy.idle_timeout.as_millis();
    let mut out = Vec::with_capacity(times.len());
    let mut created: Option<u64> = None;
    let mut last_served = 0u64;
    let mut cap = 0u64;
    let mut instances = 0u64;
    let mut previous_arrival: Option<u64> = None;
    for t in times.iter().map(|t| t.as_millis()) {
        let warm = match created {
            Some(c) => t - last_served <= idle && t - c <= cap,
            None => false,
        };
        if warm {
            last_served = t;
        } else {
            let gap = previous_arrival.map(|p| t - p);
            cap = match &policy.recycle_rule {
                RecycleRule::StaticCap { cap } => cap.as_millis(),
                RecycleRule::EmpiricalCap { lifetimes } => {
                    let len = lifetimes.len() as u64;
                    let i = ((seed % len + instances) % len) as usize;
                    lifetimes[i].as_millis()
                }
                RecycleRule::PatternCap { rules, default_cap } => {
                    let mut chosen = default_cap.as_millis();
                    if let Some(g) = gap {
                        for r in rules {
                            if r.interval_low.as_millis() <= g && g <= r.interval_high.as_millis() {
                                chosen = r.cap.as_millis();
                                break;
                            }
                        }
                    }
                    chosen
                }
            };
            instances += 1;
            created = Some(t);
            last_served = t;
        }
        previous_arrival = Some(t);
        out.push(warm);
    }
    out
}

/// Largest whole-minute gap after which a second request is still warm on a
/// fresh platform, found by trying every gap.
pub fn oracle_idle_minutes(policy: &ProviderPolicy) -> u64 {
    (1..=24 * 60).filter(|g| oracle_warm(policy, &[Millis::ZERO, Millis::from_minutes(*g)], 0)[1]).max().unwrap_or(0)
}

/// Virtual time shared between a test clock and a mock server thread.
#[derive(Clone, Default)]
pub struct SharedClock {
    now: Arc<AtomicU64>,
}

impl SharedClock {
    pub fn handle(&self) -> Arc<AtomicU64> {
        self.now.clone()
    }
}

impl Clock for SharedClock {
    fn now(&self) -> Millis {
        Millis::new(self.now.load(Ordering::SeqCst))
    }

    fn wait_until(&mut self, t: Millis) {
        self.now.fetch_max(t.as_millis(), Ordering::SeqCst);
    }
}

pub struct MockRequest {
    pub method: String,
    pub path: String,
    pub body: Vec<u8>,
}

pub struct MockResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl MockResponse {
    pub fn json(status: u16, body: serde_json::Value) -> Self {
        MockResponse { status, headers: vec![], body: body.to_string().into_bytes() }
    }
}

pub struct MockServer {
    pub url: String,
    addr: std::net::SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

fn read_request(stream: &mut TcpStream) -> std::io::Result<MockRequest> {
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some((k, v)) = header.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                content_length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; content_length];
    reader.read_exact(&mut body)?;
    Ok(MockRequest { method, path, body })
}

impl MockServer {
    pub fn start<F>(handler: F) -> Self
    where
        F: Fn(&MockRequest) -> MockResponse + Send + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let stop = Arc::new(AtomicBool::new(false));
        let stop_flag = stop.clone();
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if stop_flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(mut stream) = stream else { continue };
                let Ok(req) = read_request(&mut stream) else { continue };
                let resp = handler(&req);
                let mut head = format!(
                    "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n",
                    resp.status,
                    resp.body.len()
                );
                for (k, v) in &resp.headers {
                    head.push_str(&format!("{k}: {v}\r\n"));
                }
                head.push_str("\r\n");
                let _ = stream.write_all(head.as_bytes());
                let _ = stream.write_all(&resp.body);
                let _ = stream.flush();
            }
        });
        MockServer { url: format!("http://{addr}/invoke"), addr, stop, handle: Some(handle) }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

pub fn policy(idle: Millis, recycle_rule: RecycleRule) -> ProviderPolicy {
    use idleprobe::lifecycle::{LatencyModel, LatencyPair};
    let pair = LatencyPair { cold: Millis::new(1200), warm: Millis::new(80) };
    ProviderPolicy {
        name: "custom".into(),
        idle_timeout: idle,
        recycle_rule,
        latency: LatencyModel { fib: pair, hello: pair, jitter: Millis::ZERO },
    }
}

pub fn sim_prober(
    policy: ProviderPolicy,
    seed: u64,
) -> idleprobe::Prober<idleprobe::adapter::SimAdapter, idleprobe::VirtualClock> {
    let sim = idleprobe::Simulator::new(policy, seed).unwrap();
    idleprobe::Prober::new(idleprobe::adapter::SimAdapter::new(sim), idleprobe::VirtualClock::new())
}

/// Lifetimes observed by polling a fresh platform every `interval`, measured
/// from the first to the last warm response of each fully observed instance.
pub fn oracle_lifetimes(policy: &ProviderPolicy, interval: Millis, polls: u64, seed: u64) -> Vec<u64> {
    let times: Vec<Millis> = (0..polls).map(|k| interval.saturating_mul(k)).collect();
    let warm = oracle_warm(policy, &times, seed);
    let mut out = Vec::new();
    let mut start: Option<u64> = None;
    let mut last = 0;
    for (t, w) in times.iter().zip(&warm) {
        let t = t.as_millis();
        if !w {
            if let Some(s) = start {
                out.push(last - s);
            }
            start = Some(t);
        }
        last = t;
    }
    out
}
