#include "dmpj/experiment.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace dmpj {
namespace fs = std::filesystem;

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RMatrix laplacian_eigenvectors(const Graph& g) {
  const Eigen::SelfAdjointEigenSolver<RMatrix> es(build_gso(g, GsoKind::laplacian));
  return es.eigenvectors();  // ascending eigenvalues
}

void scale_to_rms(TimeVaryingSignal& x, double amplitude) {
  const double rms = x.norm() / std::sqrt(static_cast<double>(x.size()));
  if (rms > 0.0) x *= amplitude / rms;
}

template <typename E>
struct Names {
  E value;
  std::string_view name;
};

template <typename E, std::size_t K>
E parse_enum(const std::array<Names<E>, K>& table, const std::string& s, const char* what) {
  for (const auto& e : table) {
    if (e.name == s) return e.value;
  }
  fail(ErrorCode::InvalidArgument, std::string("unknown ") + what + " '" + s + "'");
}

template <typename E, std::size_t K>
std::string_view enum_name(const std::array<Names<E>, K>& table, E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "unknown";
}

constexpr std::array<Names<Task>, 2> kTasks{{{Task::denoise, "denoise"}, {Task::deblur, "deblur"}}};
constexpr std::array<Names<Engine>, 2> kEngines{{{Engine::gd, "gd"}, {Engine::net, "net"}}};
constexpr std::array<Names<TransformChoice>, 3> kTransforms{{{TransformChoice::jfrft, "jfrft"},
                                                             {TransformChoice::dmpjfrft_i_i, "dmpjfrft_i_i"},
                                                             {TransformChoice::dmpjfrft_i_ii, "dmpjfrft_i_ii"}}};
constexpr std::array<Names<DataSource>, 3> kSources{{{DataSource::synthetic, "synthetic"},
                                                     {DataSource::csv_signals, "csv_signals"},
                                                     {DataSource::pgm_video, "pgm_video"}}};
constexpr std::array<Names<SyntheticKind>, 3> kSynthetic{{{SyntheticKind::smooth_graph, "smooth_graph"},
                                                          {SyntheticKind::bandlimited_joint, "bandlimited_joint"},
                                                          {SyntheticKind::random, "random"}}};

// Runs one stage, prefixing any error with the stage name.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.detail());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string(name) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::Io, std::string(name) + ": " + e.what());
  }
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  MetricReport m;
  if (reports.empty()) return m;
  const auto count = static_cast<double>(reports.size());
  bool all_psnr = true;
  bool all_ssim = true;
  double psnr = 0.0;
  double ss = 0.0;
  for (const auto& r : reports) {
    m.mse += r.mse;
    m.snr_db += r.snr_db;
    if (r.psnr_db) psnr += *r.psnr_db; else all_psnr = false;
    if (r.ssim) ss += *r.ssim; else all_ssim = false;
  }
  m.mse /= count;
  m.snr_db /= count;
  if (all_psnr) m.psnr_db = psnr / count;
  if (all_ssim) m.ssim = ss / count;
  return m;
}

bool is_real(const CMatrix& m) { return (m.imag().array() == 0.0).all(); }

// Noise level giving the requested input SNR for a signal of this power.
double sigma_for_snr(const CMatrix& x, double snr_db_target) {
  const double power = x.squaredNorm() / static_cast<double>(x.size());
  const double per_part = is_real(x) ? 1.0 : 2.0;
  return std::sqrt(power / (per_part * std::pow(10.0, snr_db_target / 10.0)));
}

struct Dataset {
  Graph graph;
  std::vector<TimeVaryingSignal> clean;
  std::vector<TimeVaryingSignal> corrupted;
  // pgm_video only
  int height = 0;
  int width = 0;
  int n_patches = 0;
  int n_windows = 0;
  std::vector<Image> clean_frames;
};

Dataset load_and_degrade(const ExperimentConfig& cfg) {
  Dataset d;
  const int seg = cfg.segment_length;
  if (cfg.data_source == DataSource::pgm_video) {
    std::vector<Image> frames;
    stage("load", [&] {
      require(!cfg.frame_paths.empty(), ErrorCode::InvalidArgument, "pgm_video needs frame paths");
      for (const auto& p : cfg.frame_paths) frames.push_back(read_pgm(p));
      d.graph = knn_graph(grid_coordinates(cfg.patch), cfg.knn);
      return 0;
    });
    d.height = static_cast<int>(frames.front().rows());
    d.width = static_cast<int>(frames.front().cols());
    std::vector<Image> bad = stage("degrade", [&] {
      double sigma = cfg.sigma;
      if (cfg.input_snr_db) {
        double power = 0.0;
        for (const auto& f : frames) power += f.squaredNorm() / static_cast<double>(f.size());
        sigma = std::sqrt(power / static_cast<double>(frames.size()) / std::pow(10.0, *cfg.input_snr_db / 10.0));
      }
      std::vector<Image> out;
      for (std::size_t k = 0; k < frames.size(); ++k) {
        Image f = frames[k];
        if (cfg.task == Task::deblur) {
          f = gaussian_blur_image(f, cfg.optimizer.blur_kernel_size, cfg.optimizer.blur_sigma);
        }
        if (sigma > 0.0) {
          f = degrade(f.cast<cplx>(), Degradation::noise(sigma), derive_seed(cfg.seed, k)).real();
        }
        out.push_back(std::move(f));
      }
      return out;
    });
    stage("segment", [&] {
      const auto clean_p = patchify(frames, cfg.patch);
      const auto bad_p = patchify(bad, cfg.patch);
      d.n_patches = static_cast<int>(clean_p.size());
      for (std::size_t p = 0; p < clean_p.size(); ++p) {
        auto cs = segment(clean_p[p], seg);
        auto bs = segment(bad_p[p], seg);
        d.n_windows = static_cast<int>(cs.size());
        for (std::size_t w = 0; w < cs.size(); ++w) {
          d.clean.push_back(std::move(cs[w]));
          d.corrupted.push_back(std::move(bs[w]));
        }
      }
      return 0;
    });
    d.clean_frames.assign(frames.begin(), frames.begin() + static_cast<std::ptrdiff_t>(d.n_windows) * seg);
    return d;
  }

  TimeVaryingSignal series = stage("load", [&]() -> TimeVaryingSignal {
    if (cfg.data_source == DataSource::synthetic) {
      SyntheticData s = gen_synthetic(cfg.n, cfg.series_length, cfg.synthetic_kind, cfg.seed, cfg.synthetic);
      d.graph = std::move(s.graph);
      return s.signal;
    }
    require(!cfg.signal_path.empty() && !cfg.graph_path.empty(), ErrorCode::InvalidArgument,
            "csv_signals needs signal and graph paths");
    d.graph = read_adjacency_csv(cfg.graph_path);
    TimeVaryingSignal x = read_signal_csv(cfg.signal_path);
    require(x.rows() == d.graph.n_vertices(), ErrorCode::ShapeMismatch,
            "signal has " + std::to_string(x.rows()) + " rows but the graph has " +
                std::to_string(d.graph.n_vertices()) + " vertices");
    return x;
  });
  d.clean = stage("segment", [&] { return segment(series, seg); });
  stage("degrade", [&] {
    std::optional<RMatrix> blur;
    if (cfg.task == Task::deblur) blur = graph_blur_operator(d.graph, cfg.blur_weight);
    for (std::size_t k = 0; k < d.clean.size(); ++k) {
      TimeVaryingSignal y = d.clean[k];
      if (blur) y = degrade(y, Degradation::blur(*blur), 0);
      const double sigma = cfg.input_snr_db ? sigma_for_snr(d.clean[k], *cfg.input_snr_db) : cfg.sigma;
      if (sigma > 0.0) y = degrade(y, Degradation::noise(sigma), derive_seed(cfg.seed, k));
      d.corrupted.push_back(std::move(y));
    }
    return 0;
  });
  return d;
}

void write_outputs(const ExperimentConfig& cfg, ResultRecord& r, const Dataset& d,
                   const std::vector<TimeVaryingSignal>& restored, const std::vector<std::size_t>& eval_index) {
  const fs::path& out = cfg.out_dir;
  fs::create_directories(out);

  {
    std::ofstream f(out / "metrics.csv");
    f << "signal,input_mse,input_snr_db,output_mse,output_snr_db,input_psnr_db,output_psnr_db\n";
    for (std::size_t k = 0; k < r.input_metrics.size(); ++k) {
      const auto& a = r.input_metrics[k];
      const auto& b = r.output_metrics[k];
      f << eval_index[k] << ',' << format_real(a.mse) << ',' << format_real(a.snr_db) << ',' << format_real(b.mse)
        << ',' << format_real(b.snr_db) << ',' << (a.psnr_db ? format_real(*a.psnr_db) : "") << ','
        << (b.psnr_db ? format_real(*b.psnr_db) : "") << '\n';
    }
    require(f.good(), ErrorCode::Io, "cannot write metrics.csv");
  }

  r.loss_trace_path = out / "loss_trace.csv";
  {
    std::ofstream f(r.loss_trace_path);
    if (cfg.engine == Engine::gd) {
      f << "signal,epoch,loss\n";
      for (std::size_t s = 0; s < r.loss_traces.size(); ++s) {
        for (std::size_t e = 0; e < r.loss_traces[s].size(); ++e) f << s << ',' << e << ',' << format_real(r.loss_traces[s][e]) << '\n';
      }
    } else {
      f << "epoch,loss\n";
      for (const auto& h : r.history) f << h.epoch << ',' << format_real(h.train_loss) << '\n';
    }
    require(f.good(), ErrorCode::Io, "cannot write loss_trace.csv");
  }

  if (cfg.engine == Engine::net) {
    std::ofstream f(out / "history.csv");
    f << "epoch,train_loss,val_mse,val_snr\n";
    for (const auto& h : r.history) {
      f << h.epoch << ',' << format_real(h.train_loss) << ',' << format_real(h.val_mse) << ',' << format_real(h.val_snr)
        << '\n';
    }
    if (r.trained) write_json(out / "checkpoint.json", checkpoint_to_json(*r.trained, d.graph.hash()));
  }

  if (cfg.data_source == DataSource::pgm_video) {
    const int seg = cfg.segment_length;
    std::vector<TimeVaryingSignal> joined(static_cast<std::size_t>(d.n_patches));
    for (int p = 0; p < d.n_patches; ++p) {
      TimeVaryingSignal s(static_cast<Index>(cfg.patch) * cfg.patch, static_cast<Index>(d.n_windows) * seg);
      for (int w = 0; w < d.n_windows; ++w) {
        s.middleCols(static_cast<Index>(w) * seg, seg) = restored[static_cast<std::size_t>(p * d.n_windows + w)];
      }
      joined[static_cast<std::size_t>(p)] = std::move(s);
    }
    const auto frames = unpatchify(joined, d.height, d.width, cfg.patch, d.n_windows * seg);
    for (std::size_t k = 0; k < frames.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "restored_%04zu.pgm", k);
      write_pgm(out / name, to_image(frames[k].cast<cplx>()));
    }
  } else {
    const Index n = d.clean.front().rows();
    const Index t = d.clean.front().cols();
    CMatrix all(n, t * static_cast<Index>(restored.size()));
    CMatrix bad(n, t * static_cast<Index>(restored.size()));
    for (std::size_t k = 0; k < restored.size(); ++k) {
      all.middleCols(static_cast<Index>(k) * t, t) = restored[k];
      bad.middleCols(static_cast<Index>(k) * t, t) = d.corrupted[k];
    }
    write_signal_csv(out / "restored.csv", all);
    write_signal_csv(out / "corrupted.csv", bad);
    write_adjacency_csv(out / "graph.csv", d.graph);
  }

  write_json(out / "results.json", to_json(r));
}

}  // namespace

std::string_view to_string(SyntheticKind kind) { return enum_name(kSynthetic, kind); }

std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name) {
  for (const auto& e : kSynthetic) {
    if (e.name == name) return e.value;
  }
  return std::nullopt;
}

std::string_view to_string(Task v) { return enum_name(kTasks, v); }
std::string_view to_string(Engine v) { return enum_name(kEngines, v); }
std::string_view to_string(TransformChoice v) { return enum_name(kTransforms, v); }
std::string_view to_string(DataSource v) { return enum_name(kSources, v); }

ModelKind model_kind(TransformChoice choice) {
  switch (choice) {
    case TransformChoice::jfrft: return {TransformType::I, TransformType::I, true};
    case TransformChoice::dmpjfrft_i_i: return {TransformType::I, TransformType::I, false};
    case TransformChoice::dmpjfrft_i_ii: return {TransformType::I, TransformType::II, false};
  }
  fail(ErrorCode::InvalidArgument, "unknown transform choice");
}

SyntheticData gen_synthetic(int n, int t, SyntheticKind kind, std::uint64_t seed, const SyntheticOptions& options) {
  require(n >= 2 && t >= 1, ErrorCode::InvalidArgument, "synthetic data needs n >= 2 and t >= 1");
  require(options.amplitude > 0.0 && std::isfinite(options.amplitude), ErrorCode::InvalidArgument,
          "amplitude must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  RMatrix points(n, 2);
  for (Index i = 0; i < n; ++i) {
    points(i, 0) = unit(rng);
    points(i, 1) = unit(rng);
  }
  SyntheticData out{TimeVaryingSignal::Zero(n, t), knn_graph(points, std::clamp(options.knn, 1, n - 1))};
  TimeVaryingSignal& x = out.signal;

  switch (kind) {
    case SyntheticKind::smooth_graph: {
      const RMatrix u = laplacian_eigenvectors(out.graph);
      const int band = std::min(n, options.bandwidth > 0 ? options.bandwidth : std::max(1, n / 4));
      for (int k = 0; k < band; ++k) {
        const double amp = normal(rng) / (1.0 + k);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        const double freq = 0.5 * unit(rng);  // radians per step
        for (int s = 0; s < t; ++s) x.col(s) += (amp * std::cos(freq * s + phase)) * u.col(k).cast<cplx>();
      }
      break;
    }
    case SyntheticKind::bandlimited_joint: {
      const RMatrix u = laplacian_eigenvectors(out.graph);
      const Index total = static_cast<Index>(n) * t;
      const Index support = std::min<Index>(total, options.support > 0 ? options.support : std::max<Index>(1, total / 8));
      std::vector<Index> cells(static_cast<std::size_t>(total));
      std::iota(cells.begin(), cells.end(), Index{0});
      std::shuffle(cells.begin(), cells.end(), rng);
      CMatrix spec = CMatrix::Zero(n, t);
      for (Index k = 0; k < support; ++k) {
        const Index c = cells[static_cast<std::size_t>(k)];
        cplx v(normal(rng), normal(rng));
        if (std::abs(v) < 1e-3) v = 1.0;
        spec(c % n, c / n) = v;
      }
      // spec = U^T X F^T, so X = U spec conj(F)
      x = u.cast<cplx>() * spec * dft_matrix(t).conjugate();
      break;
    }
    case SyntheticKind::random:
      for (Index j = 0; j < t; ++j) {
        for (Index i = 0; i < n; ++i) x(i, j) = normal(rng);
      }
      break;
  }
  scale_to_rms(x, options.amplitude);
  return out;
}

std::vector<TimeVaryingSignal> segment(const TimeVaryingSignal& series, int length) {
  require(length >= 1, ErrorCode::InvalidArgument, "segment length must be positive");
  std::vector<TimeVaryingSignal> out;
  for (Index start = 0; start + length <= series.cols(); start += length) out.push_back(series.middleCols(start, length));
  return out;
}

void ExperimentConfig::validate() const {
  require(n >= 2, ErrorCode::InvalidArgument, "n must be >= 2");
  require(series_length >= 1, ErrorCode::InvalidArgument, "series_length must be >= 1");
  require(segment_length >= 1, ErrorCode::InvalidArgument, "segment_length must be >= 1");
  require(std::isfinite(sigma) && sigma >= 0.0, ErrorCode::InvalidArgument, "sigma must be >= 0");
  require(!input_snr_db || std::isfinite(*input_snr_db), ErrorCode::InvalidArgument, "input_snr_db must be finite");
  require(blur_weight >= 0.0 && blur_weight <= 1.0, ErrorCode::InvalidArgument, "blur_weight must lie in [0, 1]");
  require(patch >= 1 && knn >= 1, ErrorCode::InvalidArgument, "patch and knn must be positive");
  require(optimizer.epochs >= 0 && optimizer.gamma > 0.0, ErrorCode::InvalidArgument,
          "optimizer needs epochs >= 0 and gamma > 0");
  require(optimizer.blur_kernel_size >= 1 && optimizer.blur_kernel_size % 2 == 1 && optimizer.blur_sigma > 0.0,
          ErrorCode::InvalidArgument, "blur kernel size must be odd and blur sigma positive");
  train.validate();
  require(split.test > 0.0 && split.test < 1.0 && split.val > 0.0 && split.val < 1.0, ErrorCode::InvalidArgument,
          "split ratios must lie in (0, 1)");
}

json to_json(const ExperimentConfig& c) {
  json j = {{"task", to_string(c.task)},
            {"engine", to_string(c.engine)},
            {"gso", to_string(c.gso)},
            {"transform", to_string(c.transform)},
            {"data_source", to_string(c.data_source)},
            {"n", c.n},
            {"series_length", c.series_length},
            {"synthetic_kind", to_string(c.synthetic_kind)},
            {"synthetic",
             {{"bandwidth", c.synthetic.bandwidth},
              {"support", c.synthetic.support},
              {"amplitude", c.synthetic.amplitude},
              {"knn", c.synthetic.knn}}},
            {"signal_path", c.signal_path.string()},
            {"graph_path", c.graph_path.string()},
            {"frame_paths", json::array()},
            {"patch", c.patch},
            {"knn", c.knn},
            {"segment_length", c.segment_length},
            {"sigma", c.sigma},
            {"input_snr_db", c.input_snr_db ? json(*c.input_snr_db) : json(nullptr)},
            {"blur_weight", c.blur_weight},
            {"optimizer", to_json(c.optimizer)},
            {"train", to_json(c.train)},
            {"split", {{"test", c.split.test}, {"val", c.split.val}}},
            {"seed", c.seed},
            {"out_dir", c.out_dir.string()}};
  for (const auto& p : c.frame_paths) j["frame_paths"].push_back(p.string());
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig c) {
  require(j.is_object(), ErrorCode::InvalidArgument, "experiment config must be a JSON object");
  static const std::vector<std::string> known = {
      "task",  "engine", "gso",       "transform",      "data_source", "n",           "series_length",
      "synthetic_kind", "synthetic", "signal_path", "graph_path", "frame_paths", "patch", "knn",
      "segment_length", "sigma", "input_snr_db", "blur_weight", "optimizer", "train", "split", "seed", "out_dir"};
  for (const auto& item : j.items()) {
    require(std::find(known.begin(), known.end(), item.key()) != known.end(), ErrorCode::InvalidArgument,
            "unknown config key '" + item.key() + "'");
  }
  try {
    if (j.contains("task")) c.task = parse_enum(kTasks, j["task"].get<std::string>(), "task");
    if (j.contains("engine")) c.engine = parse_enum(kEngines, j["engine"].get<std::string>(), "engine");
    if (j.contains("gso")) {
      const auto g = parse_gso_kind(j["gso"].get<std::string>());
      require(g.has_value(), ErrorCode::InvalidArgument, "unknown gso '" + j["gso"].get<std::string>() + "'");
      c.gso = *g;
    }
    if (j.contains("transform")) c.transform = parse_enum(kTransforms, j["transform"].get<std::string>(), "transform");
    if (j.contains("data_source")) {
      c.data_source = parse_enum(kSources, j["data_source"].get<std::string>(), "data_source");
    }
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("series_length")) c.series_length = j["series_length"].get<int>();
    if (j.contains("synthetic_kind")) {
      c.synthetic_kind = parse_enum(kSynthetic, j["synthetic_kind"].get<std::string>(), "synthetic_kind");
    }
    if (j.contains("synthetic")) {
      const json& s = j["synthetic"];
      c.synthetic.bandwidth = s.value("bandwidth", c.synthetic.bandwidth);
      c.synthetic.support = s.value("support", c.synthetic.support);
      c.synthetic.amplitude = s.value("amplitude", c.synthetic.amplitude);
      c.synthetic.knn = s.value("knn", c.synthetic.knn);
    }
    if (j.contains("signal_path")) c.signal_path = j["signal_path"].get<std::string>();
    if (j.contains("graph_path")) c.graph_path = j["graph_path"].get<std::string>();
    if (j.contains("frame_paths")) {
      c.frame_paths.clear();
      for (const auto& p : j["frame_paths"]) c.frame_paths.emplace_back(p.get<std::string>());
    }
    if (j.contains("patch")) c.patch = j["patch"].get<int>();
    if (j.contains("knn")) c.knn = j["knn"].get<int>();
    if (j.contains("segment_length")) c.segment_length = j["segment_length"].get<int>();
    if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
    if (j.contains("input_snr_db")) {
      c.input_snr_db = j["input_snr_db"].is_null() ? std::nullopt : std::optional<double>(j["input_snr_db"].get<double>());
    }
    if (j.contains("blur_weight")) c.blur_weight = j["blur_weight"].get<double>();
    if (j.contains("optimizer")) c.optimizer = optimizer_config_from_json(j["optimizer"], c.optimizer);
    if (j.contains("train")) c.train = train_config_from_json(j["train"], c.train);
    if (j.contains("split")) {
      c.split.test = j["split"].value("test", c.split.test);
      c.split.val = j["split"].value("val", c.split.val);
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("bad config value: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::InvalidArgument, e.detail());
  }
  return c;
}

json to_json(const ResultRecord& r) {
  json in = json::array();
  json outm = json::array();
  for (const auto& m : r.input_metrics) in.push_back(to_json(m));
  for (const auto& m : r.output_metrics) outm.push_back(to_json(m));
  json j = {{"config", to_json(r.config)},
            {"input_metrics", std::move(in)},
            {"output_metrics", std::move(outm)},
            {"mean_input", to_json(r.mean_input)},
            {"mean_output", to_json(r.mean_output)},
            {"wall_seconds", r.wall_seconds},
            {"loss_trace_path", r.loss_trace_path.string()}};
  if (!r.history.empty()) {
    json h = json::array();
    for (const auto& e : r.history) {
      h.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_mse", e.val_mse}, {"val_snr", e.val_snr}});
    }
    j["history"] = std::move(h);
    j["best_epoch"] = r.best_epoch;
  }
  return j;
}

ResultRecord run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  stage("config", [&] {
    cfg.validate();
    return 0;
  });

  ResultRecord r;
  r.config = cfg;
  Dataset d = load_and_degrade(cfg);
  require(!d.clean.empty(), ErrorCode::TooFewSamples,
          "segment: no complete segment of length " + std::to_string(cfg.segment_length));

  const TransformBases bases = stage("transform", [&] {
    return TransformBases(graph_spectrum(d.graph, cfg.gso), cfg.segment_length);
  });
  const ModelKind kind = model_kind(cfg.transform);

  std::vector<TimeVaryingSignal> restored(d.clean.size());
  std::vector<std::size_t> eval_index;
  if (cfg.engine == Engine::gd) {
    stage("filter", [&] {
      for (std::size_t k = 0; k < d.clean.size(); ++k) {
        GdResult g = gd_filter(d.corrupted[k], d.clean[k], cfg.optimizer, bases, kind);
        restored[k] = reconstruct(d.corrupted[k], g.model, bases);
        r.loss_traces.push_back(std::move(g.loss_trace));
        eval_index.push_back(k);
      }
      return 0;
    });
  } else {
    stage("train", [&] {
      require(d.clean.size() >= 5, ErrorCode::TooFewSamples,
              "engine=net needs at least 5 segments, got " + std::to_string(d.clean.size()));
      std::vector<SamplePair> pairs;
      for (std::size_t k = 0; k < d.clean.size(); ++k) pairs.push_back({d.clean[k], d.corrupted[k]});
      const DatasetSplit split = split_dataset(std::move(pairs), cfg.split, cfg.seed);
      TrainConfig tc = cfg.train;
      const TrainResult tr = train(split, tc, bases, kind);
      r.history = tr.history;
      r.best_epoch = tr.best_epoch;
      r.trained = tr.best;
      std::vector<double> trace;
      for (const auto& h : tr.history) trace.push_back(h.train_loss);
      r.loss_traces.push_back(std::move(trace));
      for (std::size_t k = 0; k < d.clean.size(); ++k) restored[k] = infer(tr.best, d.corrupted[k], bases);
      eval_index = split.test_index;
      return 0;
    });
  }

  stage("evaluate", [&] {
    const bool video = cfg.data_source == DataSource::pgm_video;
    for (std::size_t k : eval_index) {
      MetricReport a = signal_report(d.clean[k], d.corrupted[k]);
      MetricReport b = signal_report(d.clean[k], restored[k]);
      if (video) {
        a.psnr_db = psnr_from_mse(a.mse);
        b.psnr_db = psnr_from_mse(b.mse);
      }
      r.input_metrics.push_back(a);
      r.output_metrics.push_back(b);
    }
    r.mean_input = mean_report(r.input_metrics);
    r.mean_output = mean_report(r.output_metrics);
    return 0;
  });

  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!cfg.out_dir.empty()) {
    stage("write", [&] {
      write_outputs(cfg, r, d, restored, eval_index);
      return 0;
    });
  }
  return r;
}

std::vector<CompareRow> compare_transforms(const ExperimentConfig& base, const CompareGrid& grid) {
  std::vector<CompareRow> rows;
  std::vector<std::optional<double>> sigmas;
  for (double s : grid.sigmas) sigmas.emplace_back(s);
  if (sigmas.empty()) sigmas.emplace_back(std::nullopt);
  for (GsoKind gso : grid.gsos) {
    for (const auto& sigma : sigmas) {
      for (TransformChoice tr : grid.transforms) {
        ExperimentConfig cfg = base;
        cfg.gso = gso;
        cfg.transform = tr;
        cfg.out_dir.clear();
        if (sigma) {
          cfg.sigma = *sigma;
          cfg.input_snr_db.reset();
        }
        const ResultRecord r = run_experiment(cfg);
        CompareRow row{gso, cfg.sigma, tr, r.mean_input.snr_db, r.mean_output.snr_db, 0.0};
        if (!r.loss_traces.empty() && !r.loss_traces.front().empty()) row.first_loss = r.loss_traces.front().front();
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "gso,sigma,transform,input_snr_db,output_snr_db,first_loss\n";
  for (const auto& r : rows) {
    out << to_string(r.gso) << ',' << format_real(r.sigma) << ',' << to_string(r.transform) << ','
        << format_real(r.input_snr_db) << ',' << format_real(r.output_snr_db) << ',' << format_real(r.first_loss) << '\n';
  }
  return out.str();
}

}  // namespace dmpj
