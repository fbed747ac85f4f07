//! Client side of the segmentation wire protocol against a scripted server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use image::{DynamicImage, GrayImage, RgbImage};
use slz_core::segmentation::{
    decode_png, encode_png, remote_segment, SegmentationError, SegmentationRequest, SegmentationResponse,
    ServiceClient,
};

struct Reply {
    status: u16,
    body: String,
    delay: Duration,
}

/// Serves a single request, returning the received body through the channel.
fn serve_once(reply: Reply) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0usize;
        let mut line = String::new();
        let mut request_line = String::new();
        reader.read_line(&mut request_line).unwrap();
        loop {
            line.clear();
            reader.read_line(&mut line).unwrap();
            if line.trim().is_empty() {
                break;
            }
            if let Some((k, v)) = line.split_once(':') {
                if k.eq_ignore_ascii_case("content-length") {
                    len = v.trim().parse().unwrap();
                }
            }
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        let _ = tx.send(format!("{}\n{}", request_line.trim(), String::from_utf8(body).unwrap()));
        thread::sleep(reply.delay);
        let mut stream = stream;
        let _ = write!(
            stream,
            "HTTP/1.1 {} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
            reply.status,
            reply.body.len(),
            reply.body
        );
    });
    (url, rx)
}

fn heatmap_reply(img: GrayImage) -> Reply {
    let body = serde_json::to_string(&SegmentationResponse {
        heatmap: encode_png(&DynamicImage::ImageLuma8(img)),
        model: "mock".into(),
        latency_ms: 1.5,
    })
    .unwrap();
    Reply {
        status: 200,
        body,
        delay: Duration::ZERO,
    }
}

fn client(url: &str, timeout_ms: u64) -> ServiceClient {
    ServiceClient::new(url, Duration::from_millis(timeout_ms))
}

fn prompts() -> Vec<String> {
    vec!["grass".into(), "field".into()]
}

#[test]
fn full_white_heatmap_is_all_safe_and_request_is_well_formed() {
    let (url, rx) = serve_once(heatmap_reply(GrayImage::from_pixel(8, 6, image::Luma([255]))));
    let img = RgbImage::from_pixel(8, 6, image::Rgb([10, 200, 10]));
    let raw = remote_segment(&client(&url, 2000), &img, &prompts(), 0.5).unwrap();
    assert_eq!(raw.mask.dims(), (8, 6));
    assert!(raw.mask.as_slice().iter().all(|&b| b));

    let received = rx.recv().unwrap();
    let (request_line, body) = received.split_once('\n').unwrap();
    assert!(request_line.starts_with("POST /v1/segment "), "{request_line}");
    let req: SegmentationRequest = serde_json::from_str(body).unwrap();
    assert_eq!(req.prompts, prompts());
    assert_eq!(req.threshold, 0.5);
    assert_eq!(decode_png(&req.image).unwrap().to_rgb8(), img);
}

#[test]
fn threshold_is_applied_client_side() {
    // 100/255 is about 0.39: above 0.3, below 0.5.
    for (threshold, expect) in [(0.3, true), (0.5, false)] {
        let (url, _rx) = serve_once(heatmap_reply(GrayImage::from_pixel(4, 4, image::Luma([100]))));
        let img = RgbImage::new(4, 4);
        let raw = remote_segment(&client(&url, 2000), &img, &prompts(), threshold).unwrap();
        assert!(raw.mask.as_slice().iter().all(|&b| b == expect), "threshold {threshold}");
    }
}

#[test]
fn mismatched_heatmap_dimensions_are_a_protocol_error() {
    let (url, _rx) = serve_once(heatmap_reply(GrayImage::new(5, 5)));
    let err = remote_segment(&client(&url, 2000), &RgbImage::new(8, 6), &prompts(), 0.5).unwrap_err();
    assert!(matches!(err, SegmentationError::Protocol(_)), "{err:?}");
}

#[test]
fn error_statuses_and_timeouts_are_distinguished() {
    let img = RgbImage::new(4, 4);
    let (url, _rx) = serve_once(Reply {
        status: 400,
        body: r#"{"error":"prompts must be non-empty"}"#.into(),
        delay: Duration::ZERO,
    });
    let err = remote_segment(&client(&url, 2000), &img, &[], 0.5).unwrap_err();
    assert!(matches!(&err, SegmentationError::BadRequest(b) if b.contains("non-empty")), "{err:?}");

    let (url, _rx) = serve_once(Reply {
        status: 503,
        body: "{}".into(),
        delay: Duration::ZERO,
    });
    let err = remote_segment(&client(&url, 2000), &img, &prompts(), 0.5).unwrap_err();
    assert!(matches!(err, SegmentationError::NotReady), "{err:?}");

    let (url, _rx) = serve_once(Reply {
        status: 500,
        body: "{}".into(),
        delay: Duration::ZERO,
    });
    let err = remote_segment(&client(&url, 2000), &img, &prompts(), 0.5).unwrap_err();
    assert!(matches!(err, SegmentationError::Http(500)), "{err:?}");

    let (url, _rx) = serve_once(Reply {
        status: 200,
        body: "{}".into(),
        delay: Duration::from_millis(1500),
    });
    let err = remote_segment(&client(&url, 200), &img, &prompts(), 0.5).unwrap_err();
    assert!(matches!(err, SegmentationError::Unavailable(_)), "{err:?}");
}

#[test]
fn connection_refused_is_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = remote_segment(&client(&format!("http://127.0.0.1:{port}"), 500), &RgbImage::new(2, 2), &prompts(), 0.5)
        .unwrap_err();
    assert!(matches!(err, SegmentationError::Unavailable(_)), "{err:?}");
}

/// Recorded request/response pair shared with the service's contract test.
#[test]
fn recorded_fixture_round_trips() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let req: SegmentationRequest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("segment_request.json")).unwrap()).unwrap();
    let resp_text = std::fs::read_to_string(dir.join("segment_response.json")).unwrap();
    let resp: SegmentationResponse = serde_json::from_str(&resp_text).unwrap();
    let image = decode_png(&req.image).unwrap().to_rgb8();

    let (url, rx) = serve_once(Reply {
        status: 200,
        body: resp_text,
        delay: Duration::ZERO,
    });
    let raw = remote_segment(&client(&url, 2000), &image, &req.prompts, req.threshold).unwrap();
    let sent: SegmentationRequest = serde_json::from_str(rx.recv().unwrap().split_once('\n').unwrap().1).unwrap();
    assert_eq!(sent.prompts, req.prompts);
    assert_eq!(sent.threshold, req.threshold);
    assert_eq!(decode_png(&sent.image).unwrap().to_rgb8(), image);

    let heat = decode_png(&resp.heatmap).unwrap().to_luma8();
    assert_eq!(heat.dimensions(), image.dimensions());
    let expect: Vec<bool> = heat.as_raw().iter().map(|&p| p as f64 >= req.threshold * 255.0).collect();
    assert_eq!(raw.mask.as_slice(), expect.as_slice());
}
