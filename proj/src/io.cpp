#include "dmpj/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dmpj {
namespace fs = std::filesystem;

namespace {

std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_real(double value) { return shortest(value); }

namespace {

double parse_double(std::string_view s, const std::string& context) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty(), ErrorCode::Parse,
          "cannot parse number '" + std::string(s) + "' in " + context);
  return v;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::vector<std::vector<std::string>> read_csv_cells(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!rows.empty()) {
      require(cells.size() == rows.front().size(), ErrorCode::Parse,
              path.string() + ": ragged row " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(cells));
  }
  require(!rows.empty(), ErrorCode::Parse, path.string() + ": empty CSV");
  return rows;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::Parse, "bad hash '" + s + "'");
  return v;
}

template <typename T, typename F>
void read_field(const json& j, const char* name, T& field, F&& convert) {
  if (j.contains(name)) field = convert(j.at(name));
}

template <typename T>
void read_field(const json& j, const char* name, T& field) {
  if (j.contains(name)) field = j.at(name).get<T>();
}

TransformType parse_type(const std::string& s) {
  if (s == "I") return TransformType::I;
  if (s == "II") return TransformType::II;
  fail(ErrorCode::Parse, "unknown transform type '" + s + "'");
}

RMatrix real_matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty(), ErrorCode::Parse, "expected a nonempty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.at(0).size());
  RMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    require(static_cast<Index>(j.at(r).size()) == cols, ErrorCode::Parse, "ragged matrix rows");
    for (Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

json real_matrix_to_json(const RMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

cplx complex_from_json(const json& j) {
  require(j.is_array() && j.size() == 2, ErrorCode::Parse, "expected [re, im]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

std::string format_complex(cplx value) {
  const double im = value.imag();
  std::string out = shortest(value.real());
  out += (std::signbit(im) ? "-" : "+");
  out += shortest(std::abs(im));
  out += "i";
  return out;
}

cplx parse_complex(const std::string& text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  }
  require(!s.empty(), ErrorCode::Parse, "empty complex literal");
  const char last = s.back();
  if (last != 'i' && last != 'j') return {parse_double(s, "complex literal"), 0.0};
  s.pop_back();
  // split at the last sign that is not part of an exponent
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_part = [](std::string_view v) {
    if (v.empty() || v == "+") return 1.0;
    if (v == "-") return -1.0;
    return parse_double(v, "complex literal");
  };
  if (split == std::string::npos) return {0.0, imag_part(s)};
  return {parse_double(std::string_view(s).substr(0, split), "complex literal"),
          imag_part(std::string_view(s).substr(split))};
}

CMatrix read_signal_csv(const fs::path& path) {
  const auto cells = read_csv_cells(path);
  CMatrix m(static_cast<Index>(cells.size()), static_cast<Index>(cells.front().size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = parse_complex(cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
  }
  return m;
}

void write_signal_csv(const fs::path& path, const CMatrix& signal) {
  std::ofstream out = open_out(path);
  for (Index r = 0; r < signal.rows(); ++r) {
    for (Index c = 0; c < signal.cols(); ++c) out << (c ? "," : "") << format_complex(signal(r, c));
    out << '\n';
  }
  require(out.good(), ErrorCode::Io, "write failed: " + path.string());
}

RMatrix read_real_csv(const fs::path& path) {
  const auto cells = read_csv_cells(path);
  RMatrix m(static_cast<Index>(cells.size()), static_cast<Index>(cells.front().size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      m(r, c) = parse_double(cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)], path.string());
    }
  }
  return m;
}

void write_real_csv(const fs::path& path, const RMatrix& m) {
  std::ofstream out = open_out(path);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << shortest(m(r, c));
    out << '\n';
  }
  require(out.good(), ErrorCode::Io, "write failed: " + path.string());
}

Graph read_adjacency_csv(const fs::path& path, bool directed) { return Graph(read_real_csv(path), directed); }

void write_adjacency_csv(const fs::path& path, const Graph& graph) { write_real_csv(path, graph.adjacency()); }

Image read_pgm(const fs::path& path) {
  std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
  auto token = [&]() {
    std::string t;
    char ch = 0;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!t.empty()) break;
        continue;
      }
      t += ch;
    }
    require(!t.empty(), ErrorCode::Parse, path.string() + ": truncated PGM header");
    return t;
  };
  const std::string magic = token();
  require(magic == "P5" || magic == "P2", ErrorCode::Parse, path.string() + ": not a P5/P2 PGM");
  const int width = std::stoi(token());
  const int height = std::stoi(token());
  const int maxval = std::stoi(token());
  require(width > 0 && height > 0, ErrorCode::Parse, path.string() + ": bad PGM size");
  require(maxval > 0 && maxval <= 255, ErrorCode::Parse, path.string() + ": only 8-bit PGM is supported");
  const double scale = 255.0 / maxval;

  Image img(height, width);
  if (magic == "P5") {
    std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    require(in.gcount() == static_cast<std::streamsize>(buf.size()), ErrorCode::Parse,
            path.string() + ": truncated PGM data");
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) img(r, c) = buf[static_cast<std::size_t>(r) * width + c] * scale;
    }
  } else {
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) img(r, c) = std::stoi(token()) * scale;
    }
  }
  return img;
}

void write_pgm(const fs::path& path, const Image& image, bool binary) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out << (binary ? "P5" : "P2") << '\n' << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) {
      const double v = std::isfinite(image(r, c)) ? std::clamp(std::round(image(r, c)), 0.0, 255.0) : 0.0;
      const auto byte = static_cast<unsigned char>(v);
      if (binary) {
        out.put(static_cast<char>(byte));
      } else {
        out << static_cast<int>(byte) << (c + 1 == image.cols() ? '\n' : ' ');
      }
    }
  }
  require(out.good(), ErrorCode::Io, "write failed: " + path.string());
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json& j) {
  require(j.is_array(), ErrorCode::Parse, "expected an array of rows");
  if (j.empty()) return CMatrix(0, 0);
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.at(0).size());
  CMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    require(static_cast<Index>(j.at(r).size()) == cols, ErrorCode::Parse, "ragged matrix rows");
    for (Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(j.at(r).at(c));
  }
  return m;
}

json vector_to_json(const CVector& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back({v(k).real(), v(k).imag()});
  return out;
}

CVector vector_from_json(const json& j) {
  require(j.is_array(), ErrorCode::Parse, "expected an array of [re, im] pairs");
  CVector v(static_cast<Index>(j.size()));
  for (Index k = 0; k < v.size(); ++k) v(k) = complex_from_json(j.at(k));
  return v;
}

json to_json(const OptimizerConfig& c) {
  return {{"gamma", c.gamma},           {"epochs", c.epochs}, {"init_order", c.init_order},
          {"init_filter", c.init_filter}, {"seed", c.seed},     {"sigma", c.sigma},
          {"blur_kernel_size", c.blur_kernel_size}, {"blur_sigma", c.blur_sigma}};
}

OptimizerConfig optimizer_config_from_json(const json& j, OptimizerConfig base) {
  require(j.is_object(), ErrorCode::Parse, "optimizer config must be an object");
  read_field(j, "gamma", base.gamma);
  read_field(j, "epochs", base.epochs);
  read_field(j, "init_order", base.init_order);
  read_field(j, "init_filter", base.init_filter);
  read_field(j, "seed", base.seed);
  read_field(j, "sigma", base.sigma);
  read_field(j, "blur_kernel_size", base.blur_kernel_size);
  read_field(j, "blur_sigma", base.blur_sigma);
  return base;
}

json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"epochs", c.epochs},
          {"batch", c.batch},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"seed", c.seed},
          {"group_size", c.group_size},
          {"init_order", c.init_order},
          {"init_filter", c.init_filter},
          {"shuffle", c.shuffle},
          {"optimizer", c.optimizer == OptimizerKind::adam ? "adam" : "plain_gd"}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
  require(j.is_object(), ErrorCode::Parse, "train config must be an object");
  read_field(j, "lr", base.lr);
  read_field(j, "epochs", base.epochs);
  read_field(j, "batch", base.batch);
  read_field(j, "adam_beta1", base.adam_beta1);
  read_field(j, "adam_beta2", base.adam_beta2);
  read_field(j, "adam_eps", base.adam_eps);
  read_field(j, "seed", base.seed);
  read_field(j, "group_size", base.group_size);
  read_field(j, "init_order", base.init_order);
  read_field(j, "init_filter", base.init_filter);
  read_field(j, "shuffle", base.shuffle);
  read_field(j, "optimizer", base.optimizer, [](const json& v) {
    const auto s = v.get<std::string>();
    if (s == "adam") return OptimizerKind::adam;
    if (s == "plain_gd") return OptimizerKind::plain_gd;
    fail(ErrorCode::Parse, "unknown optimizer '" + s + "'");
  });
  return base;
}

namespace {
// JSON has no infinity; exact reconstructions are written as the string "inf".
json db_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
double db_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInfinityDb;
    if (s == "-inf") return -kInfinityDb;
    fail(ErrorCode::Parse, "bad dB value '" + s + "'");
  }
  return j.get<double>();
}
}  // namespace

json to_json(const MetricReport& r) {
  json j = {{"mse", r.mse}, {"snr_db", db_to_json(r.snr_db)}};
  if (r.psnr_db) j["psnr_db"] = db_to_json(*r.psnr_db);
  if (r.ssim) j["ssim"] = *r.ssim;
  return j;
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  r.mse = j.at("mse").get<double>();
  r.snr_db = db_from_json(j.at("snr_db"));
  if (j.contains("psnr_db")) r.psnr_db = db_from_json(j.at("psnr_db"));
  if (j.contains("ssim")) r.ssim = j.at("ssim").get<double>();
  return r;
}

json checkpoint_to_json(const FilterModel& model, std::uint64_t graph_hash) {
  return {{"format", "dmpj-checkpoint"},
          {"version", 1},
          {"n", model.n()},
          {"t", model.t()},
          {"g_type", std::string(to_string(model.params.g_type))},
          {"d_type", std::string(to_string(model.params.d_type))},
          {"tied_orders", model.tied_orders},
          {"step", model.step},
          {"graph_hash", hex64(graph_hash)},
          {"graph_orders", real_matrix_to_json(model.params.graph_orders)},
          {"time_orders", std::vector<double>(model.params.time_orders.data(),
                                              model.params.time_orders.data() + model.params.time_orders.size())},
          {"h_diag", vector_to_json(model.h_diag)}};
}

FilterModel checkpoint_from_json(const json& j, std::uint64_t* graph_hash) {
  require(j.is_object() && j.value("format", "") == "dmpj-checkpoint", ErrorCode::Parse, "not a dmpj checkpoint");
  FilterModel m;
  m.params.g_type = parse_type(j.at("g_type").get<std::string>());
  m.params.d_type = parse_type(j.at("d_type").get<std::string>());
  m.tied_orders = j.value("tied_orders", false);
  m.step = j.value("step", 0L);
  m.params.graph_orders = real_matrix_from_json(j.at("graph_orders"));
  const auto b = j.at("time_orders").get<std::vector<double>>();
  m.params.time_orders = Eigen::Map<const RVector>(b.data(), static_cast<Index>(b.size()));
  m.h_diag = vector_from_json(j.at("h_diag"));
  m.validate();
  if (graph_hash) *graph_hash = parse_hex64(j.at("graph_hash").get<std::string>());
  return m;
}

json operator_to_json(const JointOperator& op) {
  json blocks = json::array();
  for (const auto& b : op.blocks) blocks.push_back(matrix_to_json(b));
  json j = {{"n", op.n},
            {"t", op.t},
            {"composition", op.composition == JointOperator::Composition::graph_then_time ? "graph_then_time"
                                                                                           : "time_then_graph"},
            {"blocks", std::move(blocks)},
            {"time_factor", matrix_to_json(op.time_factor)}};
  if (op.materialized) j["dense"] = matrix_to_json(*op.materialized);
  return j;
}

json to_json(const SpectralBasis& basis) {
  return {{"vectors", matrix_to_json(basis.vectors)},
          {"values", vector_to_json(basis.values)},
          {"inverse_vectors", matrix_to_json(basis.inverse_vectors)},
          {"condition", basis.condition},
          {"unitary", basis.unitary},
          {"hermite_index", basis.hermite_index},
          {"phase_index", basis.phase_index}};
}

SpectralBasis spectral_basis_from_json(const json& j) {
  SpectralBasis b;
  b.vectors = matrix_from_json(j.at("vectors"));
  b.values = vector_from_json(j.at("values"));
  b.inverse_vectors = matrix_from_json(j.at("inverse_vectors"));
  b.condition = j.value("condition", 1.0);
  b.unitary = j.value("unitary", false);
  b.hermite_index = j.value("hermite_index", std::vector<int>{});
  b.phase_index = j.value("phase_index", std::vector<int>{});
  require(b.vectors.rows() == b.values.size() && b.vectors.cols() == b.values.size() &&
              b.inverse_vectors.rows() == b.values.size() && b.inverse_vectors.cols() == b.values.size(),
          ErrorCode::Parse, "spectral basis has inconsistent sizes");
  return b;
}

SpectrumCache::SpectrumCache(fs::path file) : file_(std::move(file)) {}

std::string SpectrumCache::key(GsoKind kind, std::uint64_t graph_hash, int steps) {
  return std::string(to_string(kind)) + ":" + hex64(graph_hash) + ":" + std::to_string(steps);
}

GraphSpectrum SpectrumCache::get_or_compute(const Graph& graph, GsoKind kind, int steps) {
  const std::string k = key(kind, graph.hash(), steps);
  json doc = json::object();
  if (fs::exists(file_)) {
    doc = read_json(file_);
    if (doc.contains(k)) {
      GraphSpectrum s;
      s.gft = matrix_from_json(doc.at(k).at("gft"));
      s.basis = spectral_basis_from_json(doc.at(k).at("basis"));
      return s;
    }
  }
  GraphSpectrum s = graph_spectrum(graph, kind);
  doc[k] = {{"gft", matrix_to_json(s.gft)}, {"basis", to_json(s.basis)}};
  write_json(file_, doc);
  return s;
}

json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  require(out.good(), ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace dmpj
