// dmpj command-line front end.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

#include "dmpj/experiment.hpp"
#include "dmpj/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace dmpj;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

// Flags shared by the experiment-driven subcommands. Values that were given
// on the command line are layered over the --config file.
struct ExperimentFlags {
  std::string config;
  std::string task, gso, transform, data_source, synthetic_kind;
  std::optional<int> n, series_length, patch, knn, segment_length, epochs, batch;
  std::optional<double> sigma, input_snr_db, blur_weight, gamma, lr, amplitude;
  std::optional<std::uint64_t> seed;
  std::string signal, graph, out;
  std::vector<std::string> frames;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
    app->add_option("--task", task, "denoise | deblur");
    app->add_option("--gso", gso, "graph shift operator");
    app->add_option("--transform", transform, "jfrft | dmpjfrft_i_i | dmpjfrft_i_ii");
    app->add_option("--data-source", data_source, "synthetic | csv_signals | pgm_video");
    app->add_option("--synthetic-kind", synthetic_kind, "smooth_graph | bandlimited_joint | random");
    app->add_option("--n", n, "vertices of the synthetic graph");
    app->add_option("--series-length", series_length, "columns of the synthetic series");
    app->add_option("--amplitude", amplitude, "RMS amplitude of synthetic signals");
    app->add_option("--signal", signal, "N x L signal CSV");
    app->add_option("--graph", graph, "N x N adjacency CSV");
    app->add_option("--frames", frames, "PGM frames in temporal order");
    app->add_option("--patch", patch, "patch side for video");
    app->add_option("--knn", knn, "neighbors of the patch graph");
    app->add_option("--segment-length", segment_length, "columns per signal");
    app->add_option("--sigma", sigma, "noise standard deviation");
    app->add_option("--input-snr-db", input_snr_db, "choose sigma to hit this input SNR");
    app->add_option("--blur-weight", blur_weight, "graph diffusion blur strength");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--gamma", gamma, "gradient descent step");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--batch", batch, "mini-batch size");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--out", out, "output directory");
  }

  ExperimentConfig resolve(Engine forced) const {
    ExperimentConfig base;
    if (!config.empty()) base = experiment_config_from_json(read_json(config));
    json over = json::object();
    auto put = [&](const char* key, const auto& v) {
      if (v) over[key] = *v;
    };
    auto put_str = [&](const char* key, const std::string& v) {
      if (!v.empty()) over[key] = v;
    };
    put_str("task", task);
    put_str("gso", gso);
    put_str("transform", transform);
    put_str("data_source", data_source);
    put_str("synthetic_kind", synthetic_kind);
    put("n", n);
    put("series_length", series_length);
    put("patch", patch);
    put("knn", knn);
    put("segment_length", segment_length);
    put("sigma", sigma);
    put("input_snr_db", input_snr_db);
    put("blur_weight", blur_weight);
    put("seed", seed);
    put_str("signal_path", signal);
    put_str("graph_path", graph);
    put_str("out_dir", out);
    if (!frames.empty()) over["frame_paths"] = frames;
    if (amplitude) over["synthetic"] = {{"amplitude", *amplitude}};
    over["engine"] = std::string(to_string(forced));
    ExperimentConfig c = experiment_config_from_json(over, base);
    if (epochs) (forced == Engine::gd ? c.optimizer.epochs : c.train.epochs) = *epochs;
    if (gamma) c.optimizer.gamma = *gamma;
    if (lr) c.train.lr = *lr;
    if (batch) c.train.batch = *batch;
    if (seed) {
      c.optimizer.seed = *seed;
      c.train.seed = *seed;
    }
    if (!signal.empty() && data_source.empty()) c.data_source = DataSource::csv_signals;
    if (!frames.empty() && data_source.empty()) c.data_source = DataSource::pgm_video;
    c.validate();
    return c;
  }
};

void print_summary(const ResultRecord& r) {
  json s = {{"signals", r.output_metrics.size()},
            {"mean_input", to_json(r.mean_input)},
            {"mean_output", to_json(r.mean_output)},
            {"wall_seconds", r.wall_seconds}};
  if (!r.config.out_dir.empty()) s["out_dir"] = r.config.out_dir.string();
  std::cout << s.dump(2) << '\n';
}

TransformType parse_type_flag(const std::string& s) {
  if (s == "I" || s == "i" || s == "1") return TransformType::I;
  if (s == "II" || s == "ii" || s == "2") return TransformType::II;
  fail(ErrorCode::InvalidArgument, "transform type must be I or II, got '" + s + "'");
}

GsoKind parse_gso_flag(const std::string& s) {
  const auto g = parse_gso_kind(s);
  require(g.has_value(), ErrorCode::InvalidArgument, "unknown gso '" + s + "'");
  return *g;
}

bool is_pgm(const std::string& path) { return fs::path(path).extension() == ".pgm"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic multiple-parameter joint time-vertex fractional Fourier transforms"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic time-varying graph signal");
  int gen_n = 16, gen_t = 60, gen_knn = 4;
  std::uint64_t gen_seed = 0;
  double gen_amp = 1.0;
  std::string gen_kind = "smooth_graph", gen_out;
  gen->add_option("--n", gen_n, "vertices");
  gen->add_option("--series-length,--t", gen_t, "time steps");
  gen->add_option("--synthetic-kind,--kind", gen_kind, "smooth_graph | bandlimited_joint | random");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--amplitude", gen_amp, "RMS amplitude");
  gen->add_option("--knn", gen_knn, "neighbors per vertex");
  gen->add_option("--out", gen_out, "output directory")->required();

  // transform
  auto* tf = app.add_subcommand("transform", "apply a DMPJFRFT to a signal");
  std::string tf_signal, tf_graph, tf_gso = "laplacian", tf_orders, tf_out, tf_gtype = "I", tf_dtype = "I";
  double tf_alpha = 1.0, tf_beta = 1.0;
  bool tf_inverse = false, tf_export = false;
  tf->add_option("--signal", tf_signal, "N x T signal CSV")->required()->check(CLI::ExistingFile);
  tf->add_option("--graph", tf_graph, "N x N adjacency CSV")->required()->check(CLI::ExistingFile);
  tf->add_option("--gso", tf_gso, "graph shift operator");
  tf->add_option("--alpha", tf_alpha, "uniform graph order");
  tf->add_option("--beta", tf_beta, "uniform time order");
  tf->add_option("--orders", tf_orders, "JSON with graph_orders (N x T) and time_orders (T)")
      ->check(CLI::ExistingFile);
  tf->add_option("--g-type", tf_gtype, "I | II");
  tf->add_option("--d-type", tf_dtype, "I | II");
  tf->add_flag("--inverse", tf_inverse, "apply the inverse transform");
  tf->add_flag("--export-operator", tf_export, "also write operator.json");
  tf->add_option("--out", tf_out, "output directory")->required();

  // filter-gd, train, compare
  ExperimentFlags gd_flags, train_flags, cmp_flags;
  auto* fgd = app.add_subcommand("filter-gd", "per-signal gradient-descent filtering");
  gd_flags.attach(fgd);
  auto* tr = app.add_subcommand("train", "train a shared filter on a train/val/test split");
  train_flags.attach(tr);
  auto* cmp = app.add_subcommand("compare", "SNR table over GSOs, noise levels and transforms");
  cmp_flags.attach(cmp);
  std::vector<std::string> cmp_gsos{"laplacian"}, cmp_transforms{"jfrft", "dmpjfrft_i_i"};
  std::vector<double> cmp_sigmas;
  cmp->add_option("--gsos", cmp_gsos, "GSO kinds");
  cmp->add_option("--sigmas", cmp_sigmas, "noise levels (default: the base config)");
  cmp->add_option("--transforms", cmp_transforms, "transform choices");

  // infer
  auto* inf = app.add_subcommand("infer", "restore signals with a trained checkpoint");
  std::string inf_ckpt, inf_signal, inf_graph, inf_gso = "laplacian", inf_out;
  inf->add_option("--checkpoint", inf_ckpt, "checkpoint.json from train")->required()->check(CLI::ExistingFile);
  inf->add_option("--signal", inf_signal, "corrupted N x L signal CSV")->required()->check(CLI::ExistingFile);
  inf->add_option("--graph", inf_graph, "N x N adjacency CSV")->required()->check(CLI::ExistingFile);
  inf->add_option("--gso", inf_gso, "graph shift operator used in training");
  inf->add_option("--out", inf_out, "output directory")->required();

  // metrics
  auto* met = app.add_subcommand("metrics", "compare an estimate with a reference (CSV or PGM)");
  std::string met_ref, met_est, met_out;
  met->add_option("--reference", met_ref, "reference file")->required()->check(CLI::ExistingFile);
  met->add_option("--estimate", met_est, "estimate file")->required()->check(CLI::ExistingFile);
  met->add_option("--out", met_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*gen) {
      const auto kind = parse_synthetic_kind(gen_kind);
      require(kind.has_value(), ErrorCode::InvalidArgument, "unknown synthetic kind '" + gen_kind + "'");
      SyntheticOptions opts;
      opts.amplitude = gen_amp;
      opts.knn = gen_knn;
      const SyntheticData d = gen_synthetic(gen_n, gen_t, *kind, gen_seed, opts);
      fs::create_directories(gen_out);
      write_signal_csv(fs::path(gen_out) / "signal.csv", d.signal);
      write_adjacency_csv(fs::path(gen_out) / "graph.csv", d.graph);
      write_json(fs::path(gen_out) / "results.json",
                 {{"n", gen_n}, {"t", gen_t}, {"kind", gen_kind}, {"seed", gen_seed}, {"graph_hash", d.graph.hash()}});
      std::cout << "wrote " << (fs::path(gen_out) / "signal.csv").string() << '\n';
    } else if (*tf) {
      const Graph g = read_adjacency_csv(tf_graph);
      const CMatrix x = read_signal_csv(tf_signal);
      OrderParams p = OrderParams::uniform(x.rows(), x.cols(), tf_alpha, tf_beta, parse_type_flag(tf_gtype),
                                           parse_type_flag(tf_dtype));
      if (!tf_orders.empty()) {
        const json j = read_json(tf_orders);
        const auto a = j.at("graph_orders").get<std::vector<std::vector<double>>>();
        require(static_cast<Index>(a.size()) == x.rows(), ErrorCode::ShapeMismatch, "graph_orders must have N rows");
        for (Index i = 0; i < x.rows(); ++i) {
          require(static_cast<Index>(a[static_cast<std::size_t>(i)].size()) == x.cols(), ErrorCode::ShapeMismatch,
                  "graph_orders must have T columns");
          for (Index t = 0; t < x.cols(); ++t) p.graph_orders(i, t) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
        }
        const auto b = j.at("time_orders").get<std::vector<double>>();
        p.time_orders = Eigen::Map<const RVector>(b.data(), static_cast<Index>(b.size()));
      }
      const TransformBases bases(graph_spectrum(g, parse_gso_flag(tf_gso)), static_cast<int>(x.cols()));
      const JointOperator op = tf_inverse ? dmpjfrft_inverse_operator(p, bases) : dmpjfrft_operator(p, bases);
      fs::create_directories(tf_out);
      write_signal_csv(fs::path(tf_out) / "transformed.csv", op.apply(x));
      if (tf_export) write_json(fs::path(tf_out) / "operator.json", operator_to_json(op));
      std::cout << "wrote " << (fs::path(tf_out) / "transformed.csv").string() << '\n';
    } else if (*fgd) {
      print_summary(run_experiment(gd_flags.resolve(Engine::gd)));
    } else if (*tr) {
      const ResultRecord r = run_experiment(train_flags.resolve(Engine::net));
      print_summary(r);
      std::cout << "best epoch " << r.best_epoch << '\n';
    } else if (*cmp) {
      const ExperimentConfig base = cmp_flags.resolve(Engine::gd);
      CompareGrid grid;
      for (const auto& s : cmp_gsos) grid.gsos.push_back(parse_gso_flag(s));
      grid.sigmas = cmp_sigmas;
      for (const auto& s : cmp_transforms) {
        grid.transforms.push_back(experiment_config_from_json({{"transform", s}}).transform);
      }
      const std::string table = compare_csv(compare_transforms(base, grid));
      if (!base.out_dir.empty()) {
        fs::create_directories(base.out_dir);
        std::ofstream(base.out_dir / "compare.csv") << table;
      }
      std::cout << table;
    } else if (*inf) {
      std::uint64_t hash = 0;
      const FilterModel model = checkpoint_from_json(read_json(inf_ckpt), &hash);
      const Graph g = read_adjacency_csv(inf_graph);
      require(g.hash() == hash, ErrorCode::InvalidArgument, "graph does not match the checkpoint");
      const CMatrix series = read_signal_csv(inf_signal);
      require(series.rows() == model.n(), ErrorCode::ShapeMismatch, "signal rows do not match the checkpoint");
      const TransformBases bases(graph_spectrum(g, parse_gso_flag(inf_gso)), static_cast<int>(model.t()));
      const auto segs = segment(series, static_cast<int>(model.t()));
      require(!segs.empty(), ErrorCode::InvalidArgument, "signal is shorter than one segment");
      CMatrix restored(series.rows(), model.t() * static_cast<Index>(segs.size()));
      for (std::size_t k = 0; k < segs.size(); ++k) {
        restored.middleCols(static_cast<Index>(k) * model.t(), model.t()) = infer(model, segs[k], bases);
      }
      fs::create_directories(inf_out);
      write_signal_csv(fs::path(inf_out) / "restored.csv", restored);
      std::cout << "wrote " << (fs::path(inf_out) / "restored.csv").string() << '\n';
    } else if (*met) {
      MetricReport r;
      if (is_pgm(met_ref)) {
        r = image_report(read_pgm(met_ref), read_pgm(met_est));
      } else {
        r = signal_report(read_signal_csv(met_ref), read_signal_csv(met_est));
      }
      const json j = to_json(r);
      if (!met_out.empty()) {
        fs::create_directories(met_out);
        write_json(fs::path(met_out) / "results.json", j);
        std::ofstream csv(fs::path(met_out) / "metrics.csv");
        csv << "mse,snr_db,psnr_db,ssim\n"
            << format_real(r.mse) << ',' << format_real(r.snr_db) << ',' << (r.psnr_db ? format_real(*r.psnr_db) : "")
            << ',' << (r.ssim ? format_real(*r.ssim) : "") << '\n';
      }
      std::cout << j.dump(2) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? kNumericalError : kConfigError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
