#include "rrm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "rrm/errors.hpp"
#include "rrm/rng.hpp"

namespace rrm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& mat) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  if (rows == 0) return {};
  const auto cols = j.at(0).size();
  Eigen::MatrixXd mat(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          j.at(i).at(k).get<double>();
    }
  }
  return mat;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

json mpnn_to_json(const Mpnn& net) {
  json dims = json::array();
  dims.push_back(net.input_dim());
  for (const auto& layer : net.layers()) dims.push_back(layer.w_self.cols());
  return {{"dims", dims}, {"params", vector_to_json(net.flatten())}};
}

Mpnn mpnn_from_json(const json& j) {
  Mpnn net = Mpnn::create(j.at("dims").get<std::vector<int>>(), 0);
  net.unflatten(vector_from_json(j.at("params")));
  return net;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string dataset_digest(const RunConfig& cfg) {
  json j = cfg.to_json();
  // Only the fields that determine dataset contents.
  json relevant = {{"seed", cfg.seed},
                   {"geometry", j.at("geometry")},
                   {"train_size", cfg.train.train_size},
                   {"test_size", cfg.train.test_size}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(relevant.dump())));
  return buf;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StateError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw StateError("JSON parse error in " + path + ": " + e.what());
  }
  return j;
}

std::string split_filename(const std::string& split, int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.json", split.c_str(), idx);
  return buf;
}

}  // namespace

bool generate_dataset(const RunConfig& cfg, const std::string& dir) {
  const std::string digest = dataset_digest(cfg);
  const fs::path root(dir);
  const fs::path manifest_path = root / "manifest.json";

  if (fs::exists(manifest_path)) {
    const json manifest = read_json_file(manifest_path.string());
    if (manifest.value("digest", "") == digest) return false;  // replay: no-op
    throw ConfigError("dataset directory " + dir +
                      " holds a different dataset (manifest digest mismatch)");
  }
  if (fs::exists(root) && !fs::is_empty(root))
    throw ConfigError("dataset directory " + dir +
                      " is not empty and has no manifest; refusing to overwrite");
  fs::create_directories(root);

  json files = json::array();
  auto emit = [&](const std::string& split, std::uint64_t split_tag, int count) {
    for (int i = 0; i < count; ++i) {
      GeometryConfig geo = cfg.geometry;
      geo.seed = Rng::substream(cfg.seed, {100, split_tag, static_cast<std::uint64_t>(i)})
                     .next_u64();
      const NetworkRealization real = generate_realization(geo);
      const std::string name = split_filename(split, i);
      save_realization_json(real, (root / name).string());
      files.push_back(name);
    }
  };
  emit("train", 0, cfg.train.train_size);
  emit("test", 1, cfg.train.test_size);

  json manifest = {{"digest", digest},
                   {"seed", cfg.seed},
                   {"num_users", cfg.geometry.num_users},
                   {"train_size", cfg.train.train_size},
                   {"test_size", cfg.train.test_size},
                   {"files", files}};
  write_json_file(manifest, manifest_path.string());
  return true;
}

std::vector<NetworkRealization> load_dataset(const std::string& dir,
                                             const std::string& split) {
  const fs::path root(dir);
  const json manifest = read_json_file((root / "manifest.json").string());
  const int count = split == "train" ? manifest.at("train_size").get<int>()
                                     : manifest.at("test_size").get<int>();
  std::vector<NetworkRealization> dataset;
  dataset.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    dataset.push_back(load_realization_json((root / split_filename(split, i)).string()));
  }
  return dataset;
}

void save_realization_json(const NetworkRealization& real, const std::string& path) {
  json j = {{"seed", real.seed},
            {"num_users", real.size()},
            {"tx_positions", matrix_to_json(real.tx_positions)},
            {"rx_positions", matrix_to_json(real.rx_positions)},
            {"long_term_gain", matrix_to_json(real.long_term_gain)}};
  write_json_file(j, path);
}

NetworkRealization load_realization_json(const std::string& path) {
  const json j = read_json_file(path);
  NetworkRealization real;
  real.seed = j.at("seed").get<std::uint64_t>();
  real.tx_positions = matrix_from_json(j.at("tx_positions"));
  real.rx_positions = matrix_from_json(j.at("rx_positions"));
  real.long_term_gain = matrix_from_json(j.at("long_term_gain"));
  return real;
}

json policy_to_json(const PolicyNet& policy) {
  return {{"net", mpnn_to_json(policy.net)},
          {"ref_gain_log10", policy.norm.ref_gain_log10},
          {"scale_decades", policy.norm.scale_decades},
          {"p_max_watts", policy.p_max_watts},
          {"mu_scale", policy.mu_scale}};
}

PolicyNet policy_from_json(const json& j) {
  PolicyNet policy;
  policy.net = mpnn_from_json(j.at("net"));
  policy.norm.ref_gain_log10 = j.at("ref_gain_log10").get<double>();
  policy.norm.scale_decades = j.at("scale_decades").get<double>();
  policy.p_max_watts = j.at("p_max_watts").get<double>();
  policy.mu_scale = j.at("mu_scale").get<double>();
  return policy;
}

json regressor_to_json(const RegressorNet& regressor) {
  return {{"net", mpnn_to_json(regressor.net)},
          {"ref_gain_log10", regressor.norm.ref_gain_log10},
          {"scale_decades", regressor.norm.scale_decades}};
}

RegressorNet regressor_from_json(const json& j) {
  RegressorNet regressor;
  regressor.net = mpnn_from_json(j.at("net"));
  regressor.norm.ref_gain_log10 = j.at("ref_gain_log10").get<double>();
  regressor.norm.scale_decades = j.at("scale_decades").get<double>();
  return regressor;
}

namespace {

json dist_to_json(const DualDistribution& dist) {
  json support = json::array();
  for (const auto& v : dist.support) support.push_back(vector_to_json(v));
  return {{"mode", dist.mode == DualDistribution::Mode::kInitial ? "initial" : "empirical"},
          {"num_users", dist.num_users},
          {"support", support}};
}

DualDistribution dist_from_json(const json& j) {
  DualDistribution dist;
  dist.mode = j.at("mode").get<std::string>() == "initial"
                  ? DualDistribution::Mode::kInitial
                  : DualDistribution::Mode::kEmpirical;
  dist.num_users = j.at("num_users").get<int>();
  for (const auto& v : j.at("support")) dist.support.push_back(vector_from_json(v));
  return dist;
}

}  // namespace

void save_checkpoint(Trainer& trainer, const std::vector<TrainLogRow>& log,
                     const std::string& path) {
  Trainer& t = trainer;
  json buffer_epochs = json::array();
  for (const auto& epoch : t.buffer().raw()) {
    json nets = json::array();
    for (const auto& tails : epoch) {
      json iterates = json::array();
      for (const auto& mu : tails) iterates.push_back(vector_to_json(mu));
      nets.push_back(std::move(iterates));
    }
    buffer_epochs.push_back(std::move(nets));
  }
  json targets = json::array();
  for (const auto& v : t.regressor_targets()) targets.push_back(vector_to_json(v));

  json log_rows = json::array();
  for (const auto& row : log) {
    log_rows.push_back({{"epoch", row.epoch},
                        {"mean_lagrangian", row.mean_lagrangian},
                        {"mean_utility", row.mean_utility},
                        {"mean_penalty", row.mean_penalty},
                        {"mu_bar_mean", row.mu_bar_mean},
                        {"mu_bar_min", row.mu_bar_min},
                        {"grad_norm", row.grad_norm}});
  }

  json j = {{"epoch", t.epoch()},
            {"policy", policy_to_json(t.policy())},
            {"regressor", regressor_to_json(t.regressor())},
            {"dist", dist_to_json(t.distribution())},
            {"buffer", buffer_epochs},
            {"targets", targets},
            {"adam",
             {{"m", vector_to_json(t.adam_m())},
              {"v", vector_to_json(t.adam_v())},
              {"steps", t.adam_steps()}}},
            {"log", log_rows}};
  write_json_file(j, path);
}

void load_checkpoint(Trainer& trainer, std::vector<TrainLogRow>& log,
                     const std::string& path) {
  const json j = read_json_file(path);
  trainer.set_epoch(j.at("epoch").get<int>());
  trainer.policy() = policy_from_json(j.at("policy"));
  trainer.regressor() = regressor_from_json(j.at("regressor"));
  trainer.distribution() = dist_from_json(j.at("dist"));

  std::deque<std::vector<std::vector<Eigen::VectorXd>>> epochs;
  for (const auto& epoch : j.at("buffer")) {
    std::vector<std::vector<Eigen::VectorXd>> nets;
    for (const auto& tails : epoch) {
      std::vector<Eigen::VectorXd> iterates;
      for (const auto& mu : tails) iterates.push_back(vector_from_json(mu));
      nets.push_back(std::move(iterates));
    }
    epochs.push_back(std::move(nets));
  }
  trainer.buffer().restore(std::move(epochs));

  trainer.regressor_targets().clear();
  for (const auto& v : j.at("targets"))
    trainer.regressor_targets().push_back(vector_from_json(v));

  const json& adam = j.at("adam");
  trainer.adam_m() = vector_from_json(adam.at("m"));
  trainer.adam_v() = vector_from_json(adam.at("v"));
  trainer.adam_steps() = adam.at("steps").get<long>();

  // NaN serializes as JSON null (mu_bar columns before the buffer fills).
  auto num = [](const json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  log.clear();
  for (const auto& row : j.at("log")) {
    log.push_back({row.at("epoch").get<int>(), num(row.at("mean_lagrangian")),
                   num(row.at("mean_utility")), num(row.at("mean_penalty")),
                   num(row.at("mu_bar_mean")), num(row.at("mu_bar_min")),
                   num(row.at("grad_norm"))});
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_train_log_csv(const std::vector<TrainLogRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StateError("cannot write file: " + path);
  out << "epoch,mean_lagrangian,mean_utility,mean_penalty,mu_bar_mean,mu_bar_min,grad_norm\n";
  for (const auto& row : rows) {
    out << row.epoch << ',' << format_double(row.mean_lagrangian) << ','
        << format_double(row.mean_utility) << ',' << format_double(row.mean_penalty) << ','
        << format_double(row.mu_bar_mean) << ',' << format_double(row.mu_bar_min) << ','
        << format_double(row.grad_norm) << '\n';
  }
}

void write_regressor_log_csv(const std::vector<RegressorLogRow>& rows,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StateError("cannot write file: " + path);
  out << "epoch,mse,lr\n";
  for (const auto& row : rows) {
    out << row.epoch << ',' << format_double(row.mse) << ',' << format_double(row.lr)
        << '\n';
  }
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StateError("cannot write file: " + path);
  out << "method,num_users,f_min,mean,min,p5,transient_length\n";
  for (const auto& row : rows) {
    out << row.method << ',' << row.num_users << ',' << format_double(row.f_min) << ','
        << format_double(row.mean) << ',' << format_double(row.min) << ','
        << format_double(row.p5) << ',' << format_double(row.transient_length) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateError("cannot open file: " + path);
  std::string line;
  std::vector<MetricsRow> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw StateError("malformed metrics CSV row in " + path);
    rows.push_back({f[0], std::stoi(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                    std::stod(f[5]), std::stod(f[6])});
  }
  return rows;
}

void write_evolution_csv(const std::vector<EvolutionRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StateError("cannot write file: " + path);
  out << "method,t,mean,min,p5\n";
  for (const auto& row : rows) {
    out << row.method << ',' << row.t << ',' << format_double(row.mean) << ','
        << format_double(row.min) << ',' << format_double(row.p5) << '\n';
  }
}

std::vector<EvolutionRow> read_evolution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateError("cannot open file: " + path);
  std::string line;
  std::vector<EvolutionRow> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw StateError("malformed evolution CSV row in " + path);
    rows.push_back({f[0], std::stoi(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
  }
  return rows;
}

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series) {
  if (series.empty()) throw StateError("write_svg_chart: no series");
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size())
      throw StateError("write_svg_chart: empty or mismatched series '" + s.label + "'");
  }

  double x_min = series[0].x[0], x_max = x_min, y_min = series[0].y[0], y_max = y_min;
  for (const auto& s : series) {
    for (double v : s.x) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : s.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double width = 760, height = 480;
  const double left = 70, right = width - 170, top = 50, bottom = height - 55;
  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
  auto sy = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b"};
  const int num_colors = 6;

  std::ofstream out(path);
  if (!out) throw StateError("cannot write file: " + path);
  char buf[128];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (left + (right - left) / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-size=\"16\">" << title << "</text>\n";

  // axes
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                left, bottom, right, bottom);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                left, bottom, left, top);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"12\">%s</text>\n",
                left + (right - left) / 2, height - 12.0, x_label.c_str());
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"18\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"12\" "
                "transform=\"rotate(-90 18 %.2f)\">%s</text>\n",
                top + (bottom - top) / 2, top + (bottom - top) / 2, y_label.c_str());
  out << buf;
  // tick labels at the range ends
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"10\">%g</text>\n",
                left, bottom + 16, x_min);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"10\">%g</text>\n",
                right, bottom + 16, x_max);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" font-size=\"10\">%g</text>\n",
                left - 6, bottom + 4, y_min);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" font-size=\"10\">%g</text>\n",
                left - 6, top + 4, y_max);
  out << buf;

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % num_colors];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(series[s].x[i]), sy(series[s].y[i]));
      out << buf;
    }
    out << "\"/>\n";
    // legend entry
    const double ly = top + 18.0 * static_cast<double>(s);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/>\n",
                  right + 12, ly, right + 40, ly, color);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" class=\"legend\">%s</text>\n",
                  right + 46, ly + 4, series[s].label.c_str());
    out << buf;
  }
  out << "</svg>\n";
}

}  // namespace rrm
