mod args;
mod error;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use patchknn_client::{Client, NeighborsQuery};
use patchknn_core::config::parse_key_values;
use patchknn_core::features::feature_vector;
use patchknn_core::image::{self, annotate, to_grayscale, RgbImage, OUTLINE_COLOR};
use patchknn_core::store::{load_index, save_index};
use patchknn_core::{
    BenchOptions, FeatureParams, PatchGrid, PatchIndex, QueryRequest, QueryResult, FEATURE_NAMES,
    N_FEATURES,
};
use patchknn_service::ServiceConfig;
use serde_json::json;
use tracing_subscriber::EnvFilter;

use args::{
    BenchArgs, Cli, Command, FeatureArgs, FeaturesArgs, IndexArgs, QueryArgs, ServeArgs, SourceArgs,
};
use error::{CliError, Result};

const DEFAULT_PATCH_SIZE: usize = 32;
const LOG_ENV: &str = "PATCHKNN_LOG";

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = EnvFilter::try_from_env(LOG_ENV).unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();

    let outcome = match cli.command {
        Command::Index(a) => cmd_index(a),
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Features(a) => cmd_features(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Feature overrides as `(key, value)` settings: config file first, then flags.
fn feature_settings(args: &FeatureArgs) -> Result<Vec<(String, String)>> {
    let mut settings = Vec::new();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
        settings.extend(parse_key_values(&text)?);
    }
    let flags = [
        ("lbp_points", args.lbp_points.map(|v| v.to_string())),
        ("lbp_radius", args.lbp_radius.map(|v| v.to_string())),
        ("glcm_offset", args.glcm_offset.clone()),
        ("glcm_levels", args.glcm_levels.map(|v| v.to_string())),
        ("gabor_lambda", args.gabor_lambda.map(|v| v.to_string())),
        ("gabor_theta", args.gabor_theta.map(|v| v.to_string())),
        ("gabor_sigma", args.gabor_sigma.map(|v| v.to_string())),
        ("gabor_gamma", args.gabor_gamma.map(|v| v.to_string())),
        ("gabor_psi", args.gabor_psi.map(|v| v.to_string())),
    ];
    settings.extend(
        flags
            .into_iter()
            .filter_map(|(k, v)| Some((k.to_string(), v?))),
    );
    Ok(settings)
}

fn feature_params(args: &FeatureArgs) -> Result<FeatureParams> {
    let mut params = FeatureParams::default();
    for (key, value) in feature_settings(args)? {
        params.apply_setting(&key, &value)?;
    }
    params.validate()?;
    Ok(params)
}

fn load_grid(path: &Path, patch_size: usize) -> Result<PatchGrid> {
    let img = image::open(path)?;
    Ok(PatchGrid::new(to_grayscale(&img)?, patch_size)?)
}

fn write_json(value: &impl serde::Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    }
    print_stdout(&text)
}

/// Prints one line to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_stdout(text: &str) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::io("writing stdout", e))
        }
        _ => Ok(()),
    }
}

fn cmd_index(args: IndexArgs) -> Result<()> {
    let params = feature_params(&args.features)?;
    let start = Instant::now();
    let grid = load_grid(&args.image, args.patch_size)?;
    let index = PatchIndex::build(&grid, &params)?;
    save_index(&args.out, index.matrix(), &index.meta())?;
    print_stdout(&format!(
        "patches: {}, features: {}\nelapsed: {:.3} s",
        index.matrix().n_rows(),
        N_FEATURES,
        start.elapsed().as_secs_f64()
    ))
}

/// An index plus, when an image was given, its color raster for drawing.
struct Source {
    index: PatchIndex,
    raster: Option<RgbImage>,
}

fn load_source(args: &SourceArgs) -> Result<Source> {
    let decoded = args.image.as_deref().map(image::open).transpose()?;
    let index = match &args.index {
        Some(path) => {
            let (matrix, meta) = load_index(path)?;
            if let Some(p) = args.patch_size.filter(|&p| p != meta.patch_size) {
                return Err(CliError::Usage(format!(
                    "--patch-size {p} does not match the index patch size {}",
                    meta.patch_size
                )));
            }
            if let Some(img) = &decoded {
                let (h, w) = (img.height() as usize, img.width() as usize);
                if (h, w) != (meta.height, meta.width) {
                    return Err(CliError::Usage(format!(
                        "image is {h}x{w} but the index was built for {}x{}",
                        meta.height, meta.width
                    )));
                }
            }
            PatchIndex::from_matrix(meta, matrix)?
        }
        None => {
            let img = decoded
                .as_ref()
                .expect("clap requires --image without --index");
            let grid = PatchGrid::new(
                to_grayscale(img)?,
                args.patch_size.unwrap_or(DEFAULT_PATCH_SIZE),
            )?;
            PatchIndex::build(&grid, &feature_params(&args.features)?)?
        }
    };
    Ok(Source {
        index,
        raster: decoded.map(|img| img.to_rgb8()),
    })
}

fn cmd_query(args: QueryArgs) -> Result<()> {
    if args.out_image.is_some() && args.source.image.is_none() {
        return Err(CliError::Usage(
            "--out-image needs --image to draw on".into(),
        ));
    }
    let (result, raster, patch_size) = match &args.server {
        Some(url) => query_remote(&args, url)?,
        None => {
            let source = load_source(&args.source)?;
            let meta = source.index.meta();
            let (gx, gy) = meta.clamp_to_grid(args.x, args.y)?;
            if (gx, gy) != (args.x, args.y) {
                tracing::info!(
                    x = args.x,
                    y = args.y,
                    gx,
                    gy,
                    "click clamped onto the patch grid"
                );
            }
            let request = QueryRequest {
                patch_id: meta.patch_id(gx, gy)?,
                k: args.k,
                method: args.method,
                metric: args.metric,
                exclude_self: args.exclude_self,
            };
            (
                source.index.query(&request)?,
                source.raster,
                meta.patch_size,
            )
        }
    };
    if let (Some(path), Some(raster)) = (&args.out_image, &raster) {
        let drawn = annotate(raster, &result.rects(patch_size), OUTLINE_COLOR);
        image::save_png(path, &drawn)?;
    }
    write_json(&result, args.out_json.as_deref())
}

fn query_remote(args: &QueryArgs, url: &str) -> Result<(QueryResult, Option<RgbImage>, usize)> {
    let path = args
        .source
        .image
        .as_deref()
        .ok_or_else(|| CliError::Usage("--server needs --image to upload".into()))?;
    let bytes =
        std::fs::read(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let raster = image::decode(&bytes)?.to_rgb8();
    let settings = feature_settings(&args.source.features)?;
    let patch_size = args.source.patch_size.unwrap_or(DEFAULT_PATCH_SIZE);
    let client = Client::new(url);
    let mut query = NeighborsQuery::new(args.x, args.y, args.k, args.method);
    query.metric = args.metric;
    query.exclude_self = args.exclude_self;

    let runtime = runtime()?;
    let response = runtime.block_on(async {
        let upload = client.upload(bytes, patch_size, &settings).await?;
        client
            .wait_ready(&upload.image_id, Duration::from_secs(args.server_timeout))
            .await?;
        client.neighbors(&upload.image_id, &query).await
    })?;
    Ok((response.result, Some(raster), patch_size))
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Runtime::new().map_err(|e| CliError::io("starting async runtime", e))
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let source = load_source(&args.source)?;
    let meta = source.index.meta();
    let query_id = match (args.query_id, args.x, args.y) {
        (Some(id), _, _) => id,
        (None, Some(x), Some(y)) => {
            let (gx, gy) = meta.clamp_to_grid(x, y)?;
            meta.patch_id(gx, gy)?
        }
        _ => meta.patch_id(meta.grid_height() / 2, meta.grid_width() / 2)?,
    };
    let options = BenchOptions {
        repeats: args.repeats,
        curve: !args.no_curve,
    };
    let report = source.index.benchmark(query_id, args.k, options)?;
    write_json(&report, args.out_json.as_deref())
}

fn cmd_features(args: FeaturesArgs) -> Result<()> {
    let params = feature_params(&args.features)?;
    let grid = load_grid(&args.image, args.patch_size)?;
    let (gx, gy) = grid.meta().clamp_to_grid(args.x, args.y)?;
    let id = grid.patch_id(gx, gy)?;
    let vector = feature_vector(&grid.view(id)?, &params)?;
    if args.json {
        let named: serde_json::Map<String, serde_json::Value> = vector
            .named()
            .map(|(name, v)| (name.to_string(), json!(v)))
            .collect();
        let body = json!({
            "patch_id": id,
            "x": gx,
            "y": gy,
            "patch_size": args.patch_size,
            "names": FEATURE_NAMES,
            "values": vector.values(),
            "features": named,
        });
        return write_json(&body, None);
    }
    let mut text = format!("patch {id} at ({gx}, {gy}), size {}", args.patch_size);
    for (name, value) in vector.named() {
        text.push_str(&format!("\n{name}: {value}"));
    }
    print_stdout(&text)
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let config = ServiceConfig {
        max_sessions: args.max_sessions,
        max_upload_bytes: args.max_upload_bytes,
        cors_origin: args.cors_origin,
    };
    let app = patchknn_service::router(&config).map_err(|e| CliError::Usage(e.detail))?;
    let runtime = runtime()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.bind.as_str(), args.port))
            .await
            .map_err(|e| CliError::io(format!("binding {}:{}", args.bind, args.port), e))?;
        let addr = listener
            .local_addr()
            .map_err(|e| CliError::io("reading bound address", e))?;
        print_stdout(&format!("listening on http://{addr}"))?;
        tracing::info!(%addr, "service started");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        patchknn_service::serve(listener, app, shutdown)
            .await
            .map_err(|e| CliError::io("serving", e))
    })
}
