#include "commands.hpp"
#include "json_config.hpp"

#include "peelkit/codec.hpp"
#include "peelkit/dataset.hpp"
#include "peelkit/error.hpp"
#include "peelkit/fusion.hpp"
#include "peelkit/io_util.hpp"
#include "peelkit/mesh_io.hpp"
#include "peelkit/metrics.hpp"
#include "peelkit/objectives.hpp"
#include "peelkit/parallel.hpp"
#include "peelkit/peel_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace peelkit::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::size_t threads = 0;
  std::uint64_t seed = 0;
};

void write_text(const std::string& out, const std::string& text) {
  if (out.empty()) {
    fmt::print("{}", text);
  } else {
    write_file_atomic(out, text);
  }
}

// --- encode ---------------------------------------------------------------

struct EncodeOptions {
  std::string mesh;
  std::string camera;
  std::size_t layers = kDefaultLayers;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::string out;
  std::string png_prefix;
  std::vector<double> png_range;
};

void run_encode(const EncodeOptions& o, const GlobalOptions& g) {
  const TriangleMesh mesh = read_mesh(o.mesh);
  PinholeCamera camera = read_camera(o.camera);
  if (o.width != 0 || o.height != 0) {
    camera = camera.resized(o.width != 0 ? o.width : camera.width(), o.height != 0 ? o.height : camera.height());
  }
  const PeeledMapStack stack = encode_peeled(mesh, camera, o.layers, g.threads);
  write_peel(o.out, stack);
  if (!o.png_prefix.empty()) {
    double lo = 0.0;
    double hi = 1.0;
    if (o.png_range.size() == 2) {
      lo = o.png_range[0];
      hi = o.png_range[1];
    } else if (stack.nonzero_count() > 0) {
      lo = std::numeric_limits<double>::infinity();
      hi = 0.0;
      for (float d : stack.depth_data()) {
        if (d > 0.0f) {
          lo = std::min<double>(lo, d);
          hi = std::max<double>(hi, d);
        }
      }
      if (hi <= lo) {
        hi = lo + 1.0;
      }
    }
    export_depth_png(stack, o.png_prefix, lo, hi);
  }
  fmt::print(
      "encoded {} faces into {}x{}x{} ({} surface samples) -> {}\n",
      mesh.face_count(),
      stack.width(),
      stack.height(),
      stack.layers(),
      stack.nonzero_count(),
      o.out);
}

// --- decode ---------------------------------------------------------------

struct DecodeOptions {
  std::string peel;
  std::string out;
};

void run_decode(const DecodeOptions& o) {
  const ColoredPointCloud cloud = decode_pointcloud(read_peel(o.peel));
  write_point_cloud(o.out, cloud);
  fmt::print("decoded {} points -> {}\n", cloud.size(), o.out);
}

// --- fuse -----------------------------------------------------------------

struct FuseOptions {
  std::string smpl;
  std::string rd;
  std::string pred;
  std::string out;
};

void run_fuse(const FuseOptions& o, const GlobalOptions& g) {
  const PeeledMapStack fused = fuse_maps(read_peel(o.smpl), read_rd(o.rd), read_peel(o.pred), g.threads);
  write_peel(o.out, fused);
  fmt::print("fused {} surface samples -> {}\n", fused.nonzero_count(), o.out);
}

// --- rd-gt ----------------------------------------------------------------

struct RdOptions {
  std::string smpl;
  std::string clothed;
  double rd_limit = kDefaultRdLimit;
  std::string out;
};

void run_rd_gt(const RdOptions& o) {
  const ResidualDeformationStack rd = compute_rd_gt(read_peel(o.smpl), read_peel(o.clothed), o.rd_limit);
  write_rd(o.out, rd);
  fmt::print("{} valid offsets -> {}\n", rd.valid_count(), o.out);
}

// --- losses ---------------------------------------------------------------

struct LossOptions {
  std::string pred_peel;
  std::string gt_peel;
  std::string pred_rd;
  std::string gt_rd;
  std::string smpl;
  LossWeights weights;
  std::string out;
};

void run_losses(const LossOptions& o) {
  const PeeledMapStack pred_peel = read_peel(o.pred_peel);
  const PeeledMapStack gt_peel = read_peel(o.gt_peel);
  const ResidualDeformationStack pred_rd = read_rd(o.pred_rd);
  const ResidualDeformationStack gt_rd = read_rd(o.gt_rd);
  const PeeledMapStack smpl = read_peel(o.smpl);
  write_text(o.out, format_loss_json(total_loss({pred_peel, gt_peel, pred_rd, gt_rd, smpl}, o.weights)));
}

// --- metrics --------------------------------------------------------------

struct MetricOptions {
  std::string pred;
  std::string gt_mesh;
  std::size_t gt_samples = 20000;
  std::size_t subsample = 0;
  std::string out;
};

void run_metrics(const MetricOptions& o, const GlobalOptions& g) {
  const TriangleMesh gt_mesh = read_mesh(o.gt_mesh);
  const std::string ext = lower_extension(o.pred);
  MetricReport report;
  if (ext == ".peel") {
    if (o.subsample > 0) {
      throw Error(ErrorKind::InvalidArgument, "--subsample applies to .ply predictions only");
    }
    report = evaluate_peeled(read_peel(o.pred), gt_mesh, g.threads);
  } else if (ext == ".ply") {
    ColoredPointCloud prediction = read_point_cloud(o.pred);
    if (o.subsample > 0) {
      prediction = subsample_uniform(prediction, o.subsample, g.seed);
    }
    report = evaluate_reconstruction(prediction, gt_mesh, sample_surface(gt_mesh, o.gt_samples, g.seed), g.threads);
  } else {
    throw Error(ErrorKind::Format, fmt::format("prediction '{}' must be a .peel or .ply file", o.pred));
  }
  write_text(o.out, format_metric_json(report));
}

// --- dataset --------------------------------------------------------------

struct DatasetOptions {
  std::string body;
  std::string garment;
  std::string smpl;
  std::string camera;
  std::vector<double> yaws;
  std::string out_dir;
  std::size_t layers = kDefaultLayers;
  double rd_limit = kDefaultRdLimit;
  SubtractionConfig subtraction;
};

void run_dataset(const DatasetOptions& o, const GlobalOptions& g) {
  o.subtraction.validate();
  const TriangleMesh body = read_mesh(o.body);
  const TriangleMesh garment = read_mesh(o.garment);
  const TriangleMesh smpl = o.smpl.empty() ? body : read_mesh(o.smpl);
  const PinholeCamera camera = read_camera(o.camera);
  const TriangleMesh clothed = subtract_body(body, garment, o.subtraction, g.threads);
  GroundTruthOptions options;
  options.layers = o.layers;
  options.rd_limit = o.rd_limit;
  options.threads = g.threads;
  const auto views = make_ground_truth(clothed, smpl, camera, o.yaws, options);
  const fs::path manifest = write_ground_truth(views, o.out_dir);
  fmt::print(
      "kept {} of {} body faces; {} views -> {}\n",
      clothed.face_count() - garment.face_count(),
      body.face_count(),
      views.size(),
      manifest.string());
}

// --- subsample ------------------------------------------------------------

struct SubsampleOptions {
  std::string in;
  std::string out;
  std::size_t count = 20000;
};

void run_subsample(const SubsampleOptions& o, const GlobalOptions& g) {
  const ColoredPointCloud cloud = subsample_uniform(read_point_cloud(o.in), o.count, g.seed);
  write_point_cloud(o.out, cloud);
  fmt::print("kept {} points -> {}\n", cloud.size(), o.out);
}

} // namespace

int run(int argc, char** argv) {
  CLI::App app{"Peeled depth map encoding, fusion, losses, metrics and dataset generation.", "peelkit"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the command-line flags; flags given directly win");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--threads", global.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", global.seed, "Seed for sampling")->capture_default_str();

  const auto positive_layers = CLI::Range(std::size_t{1}, std::size_t{65535});
  std::function<void()> action;

  EncodeOptions encode;
  auto* encode_cmd = app.add_subcommand("encode", "Ray-trace a mesh into a peeled depth stack");
  encode_cmd->add_option("--mesh", encode.mesh, "Input mesh (.obj or .ply)")->required();
  encode_cmd->add_option("--camera", encode.camera, "Camera JSON")->required();
  encode_cmd->add_option("--layers", encode.layers, "Peeled layers")->check(positive_layers)->capture_default_str();
  encode_cmd->add_option("--width", encode.width, "Override image width, keeping the field of view")
      ->check(CLI::PositiveNumber);
  encode_cmd->add_option("--height", encode.height, "Override image height, keeping the field of view")
      ->check(CLI::PositiveNumber);
  encode_cmd->add_option("--out", encode.out, "Output .peel file")->required();
  encode_cmd->add_option("--png-prefix", encode.png_prefix, "Also write <prefix>_layer<i>.png previews");
  encode_cmd->add_option("--png-range", encode.png_range, "Depth range mapped onto the PNG scale (min max)")
      ->expected(2);
  encode_cmd->callback([&] { action = [&] { run_encode(encode, global); }; });

  DecodeOptions decode;
  auto* decode_cmd = app.add_subcommand("decode", "Back-project a peeled stack into a point cloud");
  decode_cmd->add_option("--peel", decode.peel, "Input .peel file")->required();
  decode_cmd->add_option("--out", decode.out, "Output .ply point cloud")->required();
  decode_cmd->callback([&] { action = [&] { run_decode(decode); }; });

  FuseOptions fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse prior depths, residual offsets and predicted depths");
  fuse_cmd->add_option("--smpl", fuse.smpl, "Prior .peel stack")->required();
  fuse_cmd->add_option("--rd", fuse.rd, "Residual offset .peel stack")->required();
  fuse_cmd->add_option("--pred", fuse.pred, "Predicted .peel stack")->required();
  fuse_cmd->add_option("--out", fuse.out, "Output .peel file")->required();
  fuse_cmd->callback([&] { action = [&] { run_fuse(fuse, global); }; });

  RdOptions rd;
  auto* rd_cmd = app.add_subcommand("rd-gt", "Residual offsets from prior depths to clothed depths");
  rd_cmd->add_option("--smpl", rd.smpl, "Prior .peel stack")->required();
  rd_cmd->add_option("--clothed", rd.clothed, "Clothed .peel stack")->required();
  rd_cmd->add_option("--rd-limit", rd.rd_limit, "Clamp offsets to +/- this many meters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rd_cmd->add_option("--out", rd.out, "Output residual .peel file")->required();
  rd_cmd->callback([&] { action = [&] { run_rd_gt(rd); }; });

  LossOptions losses;
  auto* loss_cmd = app.add_subcommand("losses", "Evaluate the weighted map losses");
  loss_cmd->add_option("--pred-peel", losses.pred_peel, "Predicted .peel stack (with RGB)")->required();
  loss_cmd->add_option("--gt-peel", losses.gt_peel, "Ground-truth .peel stack (with RGB)")->required();
  loss_cmd->add_option("--pred-rd", losses.pred_rd, "Predicted residual .peel stack")->required();
  loss_cmd->add_option("--gt-rd", losses.gt_rd, "Ground-truth residual .peel stack")->required();
  loss_cmd->add_option("--smpl", losses.smpl, "Prior .peel stack")->required();
  loss_cmd->add_option("--lambda-rd", losses.weights.lambda_rd, "Residual loss weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  loss_cmd->add_option("--lambda-rgb", losses.weights.lambda_rgb, "RGB loss weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  loss_cmd->add_option("--lambda-sm", losses.weights.lambda_sm, "Smoothness loss weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  loss_cmd->add_option("--out", losses.out, "Output JSON (stdout if omitted)");
  loss_cmd->callback([&] { action = [&] { run_losses(losses); }; });

  MetricOptions metrics;
  auto* metric_cmd = app.add_subcommand("metrics", "Chamfer and point-to-surface distance against a mesh");
  metric_cmd->add_option("--pred", metrics.pred, "Prediction: .peel stack or .ply point cloud")->required();
  metric_cmd->add_option("--gt-mesh", metrics.gt_mesh, "Ground-truth mesh (.obj or .ply)")->required();
  metric_cmd
      ->add_option("--gt-samples", metrics.gt_samples, "Surface samples on the ground truth for .ply predictions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  metric_cmd->add_option("--subsample", metrics.subsample, "Randomly keep this many points of a .ply prediction (0 = all)")
      ->capture_default_str();
  metric_cmd->add_option("--out", metrics.out, "Output JSON (stdout if omitted)");
  metric_cmd->callback([&] { action = [&] { run_metrics(metrics, global); }; });

  DatasetOptions dataset;
  auto* dataset_cmd = app.add_subcommand("dataset", "Subtract the body from a garment and write ground-truth views");
  dataset_cmd->add_option("--body", dataset.body, "Body mesh")->required();
  dataset_cmd->add_option("--garment", dataset.garment, "Garment mesh")->required();
  dataset_cmd->add_option("--smpl", dataset.smpl, "Prior mesh (defaults to the body)");
  dataset_cmd->add_option("--camera", dataset.camera, "Camera JSON")->required();
  dataset_cmd->add_option("--yaw", dataset.yaws, "Extra yaw angles in degrees, e.g. 45,60,-45")->delimiter(',');
  dataset_cmd->add_option("--out-dir", dataset.out_dir, "Output directory")->required();
  dataset_cmd->add_option("--layers", dataset.layers, "Peeled layers")->check(positive_layers)->capture_default_str();
  dataset_cmd->add_option("--rd-limit", dataset.rd_limit, "Clamp offsets to +/- this many meters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dataset_cmd->add_option("--rays-per-face", dataset.subtraction.rays_per_face, "Interior rays per garment face")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dataset_cmd
      ->add_option("--max-interior-distance", dataset.subtraction.max_interior_distance, "Interior ray reach in meters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dataset_cmd->callback([&] { action = [&] { run_dataset(dataset, global); }; });

  SubsampleOptions subsample;
  auto* subsample_cmd = app.add_subcommand("subsample", "Uniformly subsample a point cloud");
  subsample_cmd->add_option("--in", subsample.in, "Input .ply point cloud")->required();
  subsample_cmd->add_option("--out", subsample.out, "Output .ply point cloud")->required();
  subsample_cmd->add_option("--count", subsample.count, "Points to keep")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  subsample_cmd->callback([&] { action = [&] { run_subsample(subsample, global); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    app.exit(e);
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    global.threads = resolve_threads(global.threads);
    if (action) {
      action();
    }
    return kExitOk;
  } catch (const Error& e) {
    fmt::print(stderr, "peelkit: {}\n", e.what());
    return e.is_io() ? kExitIo : kExitInvalid;
  } catch (const std::exception& e) {
    fmt::print(stderr, "peelkit: {}\n", e.what());
    return kExitInvalid;
  }
}

} // namespace peelkit::cli
