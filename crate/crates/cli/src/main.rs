//! Command-line driver: rendering, classification, structural solves, ray
//! tracing, bud and quadruplet probes, boundary tracing and the verification
//! suites.
//!
//! Exit codes: 0 success, 1 argument/validation error, 2 numerical failure
//! (diverged solve, stalled continuation, failing verify property).

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;
use tanplane::classify::{classify, symmetry_images, Classification, DEFAULT_BUDGET};
use tanplane::render::{
    dynamic_colormap, parameter_colormap, render_dynamic_plane, render_parameter_plane,
    render_parameter_plane_supersampled, write_grid_csv, write_ppm, write_rgb_ppm, Region,
};
use tanplane::shell::{
    find_bud, period_one_boundary_point, quadruplet, trace_internal_ray, trace_unit_h_boundary,
    Half,
};
use tanplane::solve::{capture_center, virtual_center, ComponentCode};
use tanplane::verify;

#[derive(Parser)]
#[command(name = "tanplane", version, about = "Parameter-plane toolkit for λ·tan z²")]
struct Cli {
    /// Worker threads for rendering and batch work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ViewArgs {
    /// Viewport center as re,im.
    #[arg(long, default_value = "0,0", value_parser = parse_complex)]
    center: Complex64,
    /// Viewport size as WxH in plane units.
    #[arg(long, default_value = "6x6", value_parser = parse_size)]
    size: (f64, f64),
    /// Pixels along each edge (square output).
    #[arg(long, default_value_t = 512)]
    px: usize,
    /// Iteration budget per pixel.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Render the parameter plane classification to a PPM image.
    RenderParam {
        #[command(flatten)]
        view: ViewArgs,
        /// Output PPM path.
        #[arg(long)]
        out: PathBuf,
        /// Also write the verdict grid as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// 2×2 supersampling for presentation images (not for verdict grids).
        #[arg(long)]
        supersample: bool,
    },
    /// Render a dynamic plane for one parameter.
    RenderDyn {
        /// Parameter λ as re,im.
        #[arg(long, value_parser = parse_complex)]
        lambda: Complex64,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify one parameter and its symmetry orbit.
    Classify {
        #[arg(long, value_parser = parse_complex)]
        lambda: Complex64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Capture centers for a range of base indices.
    Centers {
        /// Order of the centers (number of steps to reach 0).
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Base index range a..b (inclusive).
        #[arg(long, default_value = "1..5", value_parser = parse_range)]
        k_range: (i32, i32),
        /// Explicit code k,j1,j2,... (overrides --k-range for a single solve).
        #[arg(long)]
        code: Option<String>,
    },
    /// Virtual centers (pre-pole parameters) for a range of pole indices.
    VirtualCenters {
        /// Cycle period p of the attached components (order of the code + 1).
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value = "1..5", value_parser = parse_range)]
        k_range: (i32, i32),
        /// Arctangent branch for the order ≥ 3 seeds.
        #[arg(long, default_value_t = 2)]
        branch: i32,
    },
    /// Trace an internal ray from a shell parameter toward its virtual center.
    Ray {
        #[arg(long, value_parser = parse_complex)]
        lambda: Complex64,
        /// Internal argument α of the ray.
        #[arg(long)]
        alpha: f64,
        /// Stop once the multiplier modulus reaches this value.
        #[arg(long, default_value_t = 1e-4)]
        r_stop: f64,
        /// Maximum continuation steps.
        #[arg(long, default_value_t = 2000)]
        steps: usize,
    },
    /// Find a bud of the period-one component at internal argument q/p.
    Buds {
        /// Numerator of the internal argument.
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Denominator of the internal argument (bud period multiplier).
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long, default_value_t = 0.2)]
        search_radius: f64,
    },
    /// Probe the quadruplet of shell components around a virtual center.
    Quadruplets {
        /// The virtual center λ* as re,im.
        #[arg(long, value_parser = parse_complex)]
        center: Complex64,
        /// Cycle period of the quadruplet components.
        #[arg(long, default_value_t = 2)]
        period: usize,
        #[arg(long, default_value_t = 0.02)]
        radius: f64,
    },
    /// Trace the |H(u)| = 1 boundary curve and its parameter-plane image.
    Boundary {
        #[arg(long, default_value_t = 0.0)]
        x_min: f64,
        #[arg(long, default_value_t = 4.0)]
        x_max: f64,
        #[arg(long, default_value_t = 81)]
        steps: usize,
        /// upper or lower half of the u-plane.
        #[arg(long, default_value = "lower")]
        half: String,
        /// Optional CSV output path (x, y, re(λ), im(λ), t).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and print JSON-line reports.
    Verify {
        /// Suite name or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        /// Sample count for randomized properties.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// RNG seed, recorded in every report line.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected re,im: {s}"))?;
    Ok(Complex64::new(
        re.trim().parse().map_err(|e| format!("bad re: {e}"))?,
        im.trim().parse().map_err(|e| format!("bad im: {e}"))?,
    ))
}

fn parse_size(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s
        .split_once('x')
        .ok_or_else(|| format!("expected WxH: {s}"))?;
    let w: f64 = w.trim().parse().map_err(|e| format!("bad width: {e}"))?;
    let h: f64 = h.trim().parse().map_err(|e| format!("bad height: {e}"))?;
    if w <= 0.0 || h <= 0.0 {
        return Err("size must be positive".into());
    }
    Ok((w, h))
}

fn parse_range(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a..b: {s}"))?;
    let a: i32 = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let b: i32 = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    if a > b {
        return Err("empty range".into());
    }
    Ok((a, b))
}

fn parse_code(s: &str) -> Result<Vec<i32>, String> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|e| format!("bad code entry: {e}")))
        .collect()
}

fn describe(c: &Classification) -> String {
    match c {
        Classification::CaptureDepth(d) => format!("capture depth={d}"),
        Classification::Shell { period, multiplier } => format!(
            "shell period={period} multiplier={:.12}{}{:.12}i |multiplier|={:.12}",
            multiplier.re,
            if multiplier.im < 0.0 { "-" } else { "+" },
            multiplier.im.abs(),
            multiplier.norm()
        ),
        Classification::Unresolved(r) => format!("unresolved ({r:?})"),
    }
}

fn run(cli: Cli) -> Result<(), (u8, String)> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err((1, "--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| (1, format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::RenderParam { view, out, csv, supersample } => {
            let region = Region::new(view.center, view.size.0, view.size.1);
            if supersample {
                let rgb = render_parameter_plane_supersampled(
                    region,
                    view.px,
                    view.px,
                    view.budget,
                    parameter_colormap,
                );
                write_rgb_ppm(view.px, view.px, &rgb, &out).map_err(|e| (1, e.to_string()))?;
                if let Some(csv_path) = csv {
                    // verdict grids always come from pixel-center sampling
                    let raster = render_parameter_plane(region, view.px, view.px, view.budget);
                    write_grid_csv(&raster, &csv_path).map_err(|e| (1, e.to_string()))?;
                }
            } else {
                let raster = render_parameter_plane(region, view.px, view.px, view.budget);
                write_ppm(&raster, parameter_colormap, &out).map_err(|e| (1, e.to_string()))?;
                if let Some(csv_path) = csv {
                    write_grid_csv(&raster, &csv_path).map_err(|e| (1, e.to_string()))?;
                }
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::RenderDyn { lambda, view, out } => {
            if lambda.norm_sqr() == 0.0 {
                return Err((1, "λ must be nonzero".into()));
            }
            let region = Region::new(view.center, view.size.0, view.size.1);
            let raster = render_dynamic_plane(lambda, region, view.px, view.px, view.budget);
            write_ppm(&raster, dynamic_colormap, &out).map_err(|e| (1, e.to_string()))?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Classify { lambda, budget } => {
            if lambda.norm_sqr() == 0.0 {
                return Err((1, "λ must be nonzero".into()));
            }
            println!("λ = {lambda}: {}", describe(&classify(lambda, budget)));
            for member in symmetry_images(lambda).members.iter().skip(1) {
                println!("  {member}: {}", describe(&classify(*member, budget)));
            }
            Ok(())
        }
        Command::Centers { order, k_range, code } => {
            let codes: Vec<ComponentCode> = if let Some(raw) = code {
                let raw = parse_code(&raw).map_err(|e| (1, e))?;
                if raw.is_empty() {
                    return Err((1, "empty code".into()));
                }
                vec![ComponentCode::pre_zero(raw[0], &raw[1..])]
            } else {
                if order == 0 {
                    return Err((1, "--order must be ≥ 1".into()));
                }
                (k_range.0..=k_range.1)
                    .filter(|k| *k != 0)
                    .map(|k| {
                        let branches = vec![2; order - 1];
                        ComponentCode::pre_zero(k, &branches)
                    })
                    .collect()
            };
            println!("code root residual iterations");
            for code in codes {
                match capture_center(&code) {
                    Ok(r) => println!(
                        "{:?} {}+{}i {:.3e} {}",
                        code.base_index, r.root.re, r.root.im, r.residual, r.iterations
                    ),
                    Err(e) => return Err((2, format!("code {code:?}: {e}"))),
                }
            }
            Ok(())
        }
        Command::VirtualCenters { order, k_range, branch } => {
            if order < 2 {
                return Err((1, "--order must be ≥ 2".into()));
            }
            println!("k root residual");
            for k in k_range.0..=k_range.1 {
                if k == 0 {
                    continue;
                }
                let branches = vec![branch; order - 2];
                let code = ComponentCode::pre_pole(k, &branches);
                match virtual_center(&code, order) {
                    Ok(r) => println!("{k} {}+{}i {:.3e}", r.root.re, r.root.im, r.residual),
                    Err(e) => return Err((2, format!("k={k}: {e}"))),
                }
            }
            Ok(())
        }
        Command::Ray { lambda, alpha, r_stop, steps } => {
            if !(r_stop > 0.0 && r_stop < 1.0) {
                return Err((1, "--r-stop must lie in (0,1)".into()));
            }
            let ray = trace_internal_ray(lambda, alpha, r_stop, steps)
                .map_err(|e| (2, e.to_string()))?;
            println!("r,re,im,period,mod_multiplier");
            for pt in &ray {
                println!(
                    "{},{},{},{},{}",
                    pt.r,
                    pt.lambda.re,
                    pt.lambda.im,
                    pt.cycle.period,
                    pt.cycle.multiplier.norm()
                );
            }
            Ok(())
        }
        Command::Buds { q, p, search_radius } => {
            if p < 2 || q == 0 || q >= p {
                return Err((1, "need 0 < q < p and p ≥ 2".into()));
            }
            let alpha = q as f64 / p as f64;
            let b = period_one_boundary_point(alpha).map_err(|e| (2, e.to_string()))?;
            println!("boundary point at argument {q}/{p}: {}", b.lambda);
            match find_bud(b.lambda, p, q, 1, search_radius) {
                Some(lam) => {
                    println!("bud parameter: {lam}");
                    println!("verdict: {}", describe(&classify(lam, DEFAULT_BUDGET)));
                    Ok(())
                }
                None => Err((2, "no bud found in the search disk".into())),
            }
        }
        Command::Quadruplets { center, period, radius } => {
            let reps = quadruplet(center, period, radius);
            println!("tracts found: {}", reps.len());
            for (tract, lam) in &reps {
                println!("tract {}: λ = {lam}", tract.quadrant);
            }
            if reps.len() == 4 {
                Ok(())
            } else {
                Err((2, "fewer than four tracts represented".into()))
            }
        }
        Command::Boundary { x_min, x_max, steps, half, out } => {
            let half = match half.as_str() {
                "upper" => Half::Upper,
                "lower" => Half::Lower,
                other => return Err((1, format!("bad half: {other}"))),
            };
            if steps < 2 {
                return Err((1, "--steps must be ≥ 2".into()));
            }
            let samples =
                trace_unit_h_boundary(x_min, x_max, steps, half).map_err(|e| (2, e.to_string()))?;
            let mut text = String::from("x,y,re,im,t\n");
            for s in &samples {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.u.re, s.u.im, s.lambda.re, s.lambda.im, s.t
                ));
            }
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| (1, e.to_string()))?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Verify { suite, samples, seed } => {
            let reports = if suite == "all" {
                verify::run_all(samples, seed)
            } else {
                verify::run_suite(&suite, samples, seed).ok_or_else(|| {
                    (
                        1,
                        format!("unknown suite {suite}; known: {:?} or all", verify::SUITES),
                    )
                })?
            };
            let mut failures = 0;
            for r in &reports {
                println!("{}", serde_json::to_string(r).unwrap());
                if !r.pass {
                    failures += 1;
                }
            }
            if failures > 0 {
                Err((2, format!("{failures} properties failed")))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    // die quietly when the reader closes the pipe (classify | head)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    // argument errors exit 1; help and version stay successful
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
