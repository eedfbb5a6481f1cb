use std::time::Duration;

use patchknn_client::{Client, ClientError, NeighborsQuery};
use patchknn_core::image::decode;
use patchknn_core::wire::BuildStatus;
use patchknn_core::{synth, Metric, PatchGrid, SearchMethod};
use patchknn_service::{router, serve, ServiceConfig};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

struct Server {
    client: Client,
    _stop: oneshot::Sender<()>,
}

async fn start(config: ServiceConfig) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop, stopped) = oneshot::channel::<()>();
    let app = router(&config).unwrap();
    tokio::spawn(async move {
        serve(listener, app, async {
            let _ = stopped.await;
        })
        .await
        .unwrap();
    });
    Server {
        client: Client::new(&format!("http://{addr}/")),
        _stop: stop,
    }
}

const WAIT: Duration = Duration::from_secs(60);

#[tokio::test]
async fn round_trip_against_live_server() {
    let server = start(ServiceConfig::default()).await;
    let client = &server.client;
    client.health().await.unwrap();

    let img = synth::textured_image(48, 40, 11);
    let up = client
        .upload(img.encode_png().unwrap(), 8, &[])
        .await
        .unwrap();
    let meta = client.wait_ready(&up.image_id, WAIT).await.unwrap();
    assert_eq!(meta.status, BuildStatus::Ready);
    assert_eq!(meta.n_patches, 41 * 33);

    let kd = client
        .neighbors(
            &up.image_id,
            &NeighborsQuery::new(20, 15, 5, SearchMethod::KdTree),
        )
        .await
        .unwrap();
    assert_eq!(kd.result.neighbors.len(), 5);
    assert_eq!(
        (kd.result.neighbors[0].x, kd.result.neighbors[0].y),
        (20, 15)
    );

    let mut brute = NeighborsQuery::new(20, 15, 5, SearchMethod::Brute);
    brute.metric = Some(Metric::Euclidean);
    let brute = client.neighbors(&up.image_id, &brute).await.unwrap();
    assert_eq!(brute.result.ids(), kd.result.ids());

    let mut excl = NeighborsQuery::new(20, 15, 5, SearchMethod::Brute);
    excl.exclude_self = true;
    let excl = client.neighbors(&up.image_id, &excl).await.unwrap();
    assert_eq!(excl.result.metric, Metric::Cosine);
    assert!(excl
        .result
        .neighbors
        .iter()
        .all(|n| n.id != kd.result.query_id));

    let grid = PatchGrid::new(img, 8).unwrap();
    let png = client.patch_png(&up.image_id, 7).await.unwrap();
    assert_eq!(
        decode(&png).unwrap().to_luma8().into_raw(),
        grid.view(7).unwrap().to_vec()
    );
}

#[tokio::test]
async fn feature_overrides_are_forwarded() {
    let server = start(ServiceConfig::default()).await;
    let img = synth::textured_image(16, 16, 1).encode_png().unwrap();
    let bad = vec![("glcm_levels".to_string(), "0".to_string())];
    let err = server
        .client
        .upload(img.clone(), 4, &bad)
        .await
        .unwrap_err();
    assert_eq!(err.status().map(|s| s.as_u16()), Some(422));

    let good = vec![("glcm_levels".to_string(), "8".to_string())];
    let up = server.client.upload(img, 4, &good).await.unwrap();
    server.client.wait_ready(&up.image_id, WAIT).await.unwrap();
}

#[tokio::test]
async fn service_errors_surface_as_api_errors() {
    let server = start(ServiceConfig {
        max_upload_bytes: 64,
        ..ServiceConfig::default()
    })
    .await;
    let client = &server.client;

    match client.meta("missing").await.unwrap_err() {
        ClientError::Api { status, body } => {
            assert_eq!(status, 404);
            assert_eq!(body.error, "unknown_image");
        }
        other => panic!("unexpected {other:?}"),
    }
    let err = client.upload(vec![1; 1000], 8, &[]).await.unwrap_err();
    assert_eq!(err.status().map(|s| s.as_u16()), Some(413));
    let err = client.upload(b"junk".to_vec(), 8, &[]).await.unwrap_err();
    assert_eq!(err.status().map(|s| s.as_u16()), Some(400));
    assert!(matches!(
        client.wait_ready("missing", WAIT).await,
        Err(ClientError::Api { status: 404, .. })
    ));
}

#[tokio::test]
async fn unreachable_server_is_http_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let client = Client::new(&format!("http://{addr}"));
    assert!(matches!(client.health().await, Err(ClientError::Http(_))));
}
