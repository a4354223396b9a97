#include "specbound/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specbound/errors.hpp"
#include "specbound/rng.hpp"

namespace specbound {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

// bit-exact decimal rendering (17 significant digits)
std::string exact(double v) { return fmt("%.17g", v); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw format_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw format_error("write failed: " + path);
}

std::string norm_order_name(NormOrder p) {
  switch (p) {
    case NormOrder::l1: return "l1";
    case NormOrder::l2: return "l2";
    case NormOrder::linf: return "linf";
  }
  return "?";
}

}  // namespace

std::string sci(double v) { return fmt("%.5e", v); }

Dataset gen_blobs(int k, int n, int m, double separation, double norm_bound,
                  std::uint64_t seed) {
  if (k < 2) throw usage_error("gen_blobs: k must be >= 2");
  if (n < 1) throw usage_error("gen_blobs: n must be >= 1");
  if (m < k) throw usage_error("gen_blobs: m must be >= k");
  if (norm_bound <= 0.0) throw usage_error("gen_blobs: B must be > 0");
  if (separation < 0.0) throw usage_error("gen_blobs: separation must be >= 0");

  const double center_radius = 0.7 * norm_bound;
  if (separation > 2.0 * center_radius)
    throw usage_error(
        "gen_blobs: separation too large to fit centers in the B-ball");

  auto center_gen = rng::stream(seed, "blob-centers");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vector> centers;
  const int max_attempts = 5000;
  for (int attempt = 0; attempt < max_attempts && (int)centers.size() < k;
       ++attempt) {
    Vector c(n);
    for (int i = 0; i < n; ++i) c[i] = gauss(center_gen);
    double nn = c.norm();
    if (nn == 0.0) continue;
    c *= center_radius * std::pow(unif(center_gen), 1.0 / n) / nn;
    bool ok = true;
    for (const auto& prev : centers)
      if ((c - prev).norm() < separation) { ok = false; break; }
    if (ok) centers.push_back(std::move(c));
  }
  if ((int)centers.size() < k)
    throw usage_error(
        "gen_blobs: could not place " + std::to_string(k) +
        " centers at separation " + exact(separation) + " inside the B-ball");

  const double spread =
      separation > 0.0 ? separation / 8.0 : norm_bound / 10.0;
  Dataset data;
  data.input_dim = n;
  data.num_classes = k;
  data.norm_bound = norm_bound;
  for (int s = 0; s < m; ++s) {
    int cls = s % k;
    auto gen = rng::stream(seed, "blob-sample", static_cast<std::uint64_t>(s));
    Vector x = centers[cls];
    for (int i = 0; i < n; ++i) x[i] += spread * gauss(gen);
    double nn = x.norm();
    if (nn > norm_bound) x *= norm_bound / nn;
    data.xs.push_back(std::move(x));
    data.ys.push_back(cls);
  }
  validate(data);
  return data;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path,
                        const char* field, long offset) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in)
    throw format_error(path + ": truncated while reading " + field +
                       " at byte offset " + std::to_string(offset));
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int max_count, double b_scale) {
  if (b_scale <= 0.0) throw usage_error("load_idx: B scale must be > 0");
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw format_error("cannot open: " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw format_error("cannot open: " + labels_path);

  std::uint32_t img_magic = read_be32(img, images_path, "magic", 0);
  if (img_magic != 0x00000803)
    throw format_error(images_path + ": bad magic number at offset 0 (got " +
                       std::to_string(img_magic) + ", want 2051)");
  std::uint32_t count = read_be32(img, images_path, "count", 4);
  std::uint32_t rows = read_be32(img, images_path, "rows", 8);
  std::uint32_t cols = read_be32(img, images_path, "cols", 12);

  std::uint32_t lab_magic = read_be32(lab, labels_path, "magic", 0);
  if (lab_magic != 0x00000801)
    throw format_error(labels_path + ": bad magic number at offset 0 (got " +
                       std::to_string(lab_magic) + ", want 2049)");
  std::uint32_t lab_count = read_be32(lab, labels_path, "count", 4);
  if (lab_count != count)
    throw format_error(labels_path + ": label count " +
                       std::to_string(lab_count) + " does not match image count " +
                       std::to_string(count) + " (field count, offset 4)");

  std::uint32_t take = count;
  if (max_count > 0 && static_cast<std::uint32_t>(max_count) < take)
    take = static_cast<std::uint32_t>(max_count);

  const int n = static_cast<int>(rows * cols);
  Dataset data;
  data.input_dim = n;
  data.num_classes = 10;
  std::vector<unsigned char> pix(n);
  int max_label = 0;
  for (std::uint32_t s = 0; s < take; ++s) {
    img.read(reinterpret_cast<char*>(pix.data()), n);
    if (!img)
      throw format_error(images_path + ": truncated pixel data for image " +
                         std::to_string(s) + " at byte offset " +
                         std::to_string(16 + static_cast<long>(s) * n));
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = pix[i] / 255.0;
    char y;
    lab.read(&y, 1);
    if (!lab)
      throw format_error(labels_path + ": truncated label data at byte offset " +
                         std::to_string(8 + static_cast<long>(s)));
    data.xs.push_back(std::move(x));
    data.ys.push_back(static_cast<unsigned char>(y));
    max_label = std::max(max_label, data.ys.back());
  }
  data.num_classes = std::max(10, max_label + 1);

  double max_norm = 0.0;
  for (const auto& x : data.xs) max_norm = std::max(max_norm, x.norm());
  if (max_norm > 0.0)
    for (auto& x : data.xs) x *= b_scale / max_norm;
  data.norm_bound = b_scale;
  validate(data);
  return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
  validate(data);
  std::ostringstream out;
  out << "# specbound-dataset-v1 k=" << data.num_classes
      << " n=" << data.input_dim << " B=" << exact(data.norm_bound) << "\n";
  out << "label";
  for (int i = 0; i < data.input_dim; ++i) out << ",x" << i;
  out << "\n";
  for (int s = 0; s < data.size(); ++s) {
    out << data.ys[s];
    for (int i = 0; i < data.input_dim; ++i)
      out << "," << exact(data.xs[s][i]);
    out << "\n";
  }
  write_file(path, out.str());
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# specbound-dataset-v1", 0) != 0)
    throw format_error(path + ": missing specbound-dataset-v1 metadata line");
  Dataset data;
  {
    std::istringstream meta(line);
    std::string tok;
    while (meta >> tok) {
      if (tok.rfind("k=", 0) == 0) data.num_classes = std::stoi(tok.substr(2));
      else if (tok.rfind("n=", 0) == 0) data.input_dim = std::stoi(tok.substr(2));
      else if (tok.rfind("B=", 0) == 0) data.norm_bound = std::stod(tok.substr(2));
    }
  }
  if (!std::getline(in, line))
    throw format_error(path + ": missing header row");
  long row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ','))
      throw format_error(path + ": empty row " + std::to_string(row));
    Vector x(data.input_dim);
    int label;
    try {
      label = std::stoi(cell);
      for (int i = 0; i < data.input_dim; ++i) {
        if (!std::getline(ss, cell, ','))
          throw format_error(path + ": row " + std::to_string(row) +
                             " has too few columns");
        x[i] = std::stod(cell);
      }
    } catch (const std::invalid_argument&) {
      throw format_error(path + ": non-numeric cell in row " +
                         std::to_string(row));
    }
    data.xs.push_back(std::move(x));
    data.ys.push_back(label);
    ++row;
  }
  validate(data);
  return data;
}

void save_network(const Network& net, const std::string& path) {
  std::ostringstream out;
  out << "{\n  \"format\": \"specbound-net-v1\",\n  \"kind\": \""
      << (net.kind() == NetworkKind::feedforward ? "feedforward" : "resnet")
      << "\",\n  \"activation\": \"relu\",\n  \"layers\": [\n";
  for (int l = 0; l < net.depth(); ++l) {
    const Matrix& w = net.layer(l);
    out << "    {\"rows\": " << w.rows() << ", \"cols\": " << w.cols()
        << ", \"data\": [";
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (r != 0 || c != 0) out << ", ";
        out << exact(w(r, c));  // row-major
      }
    out << "]}" << (l + 1 < net.depth() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  write_file(path, out.str());
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path + ": invalid JSON: " + e.what());
  }
  if (!doc.contains("format") || doc["format"] != "specbound-net-v1")
    throw format_error(path + ": missing or wrong \"format\" field");
  if (!doc.contains("kind") || !doc["kind"].is_string())
    throw format_error(path + ": missing \"kind\" field");
  std::string kind_name = doc["kind"];
  NetworkKind kind;
  if (kind_name == "feedforward") kind = NetworkKind::feedforward;
  else if (kind_name == "resnet") kind = NetworkKind::resnet;
  else throw format_error(path + ": unknown kind \"" + kind_name + "\"");
  if (!doc.contains("layers") || !doc["layers"].is_array() ||
      doc["layers"].empty())
    throw format_error(path + ": missing \"layers\" array");

  std::vector<Matrix> layers;
  int index = 0;
  for (const auto& jl : doc["layers"]) {
    std::string where = path + ": layers[" + std::to_string(index) + "]";
    if (!jl.contains("rows") || !jl.contains("cols") || !jl.contains("data"))
      throw format_error(where + ": needs rows, cols, data");
    long rows = jl["rows"], cols = jl["cols"];
    if (rows < 1 || cols < 1)
      throw format_error(where + ": rows/cols must be positive");
    const auto& jd = jl["data"];
    if (!jd.is_array() || static_cast<long>(jd.size()) != rows * cols)
      throw format_error(where + ".data: expected " +
                         std::to_string(rows * cols) + " entries, got " +
                         std::to_string(jd.size()));
    Matrix w(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) {
        const auto& cell = jd[r * cols + c];
        if (!cell.is_number())
          throw format_error(where + ".data: non-numeric entry");
        w(r, c) = cell.get<double>();
      }
    if (!w.allFinite())
      throw format_error(where + ".data: non-finite entry");
    layers.push_back(std::move(w));
    ++index;
  }
  try {
    return Network(kind, std::move(layers));
  } catch (const usage_error& e) {
    throw format_error(path + ": " + e.what());
  }
}

std::string provenance_json(const Provenance& prov) {
  std::ostringstream out;
  out << "{\"seed\": " << prov.seed << ", \"tool_version\": \""
      << prov.tool_version << "\", \"constant_convention\": \""
      << prov.constant_convention << "\", \"union_bound\": "
      << (prov.union_bound ? "true" : "false") << "}";
  return out.str();
}

std::string report_json(const BoundReport& r) {
  std::ostringstream out;
  out << "{\"type\": \"bound\", \"theorem_tag\": \"" << to_string(r.theorem_tag)
      << "\", \"bound_value\": " << sci(r.bound_value)
      << ", \"phi\": " << sci(r.phi) << ", \"beta\": " << sci(r.beta)
      << ", \"sigma\": " << sci(r.sigma) << ", \"kl_upper\": " << sci(r.kl_upper)
      << ", \"magnitude\": " << sci(r.magnitude);
  if (r.c_fgm) out << ", \"c_fgm\": " << sci(*r.c_fgm);
  out << ", \"depth\": " << r.depth << ", \"width\": " << r.width
      << ", \"per_layer\": [";
  for (std::size_t i = 0; i < r.per_layer.size(); ++i) {
    if (i) out << ", ";
    out << "{\"spectral\": " << sci(r.per_layer[i].first)
        << ", \"frobenius\": " << sci(r.per_layer[i].second) << "}";
  }
  out << "], \"inputs\": {\"B\": " << sci(r.inputs.norm_bound)
      << ", \"epsilon\": " << sci(r.inputs.epsilon)
      << ", \"gamma\": " << sci(r.inputs.gamma)
      << ", \"delta\": " << sci(r.inputs.delta) << ", \"m\": " << r.inputs.m
      << ", \"p\": \"" << norm_order_name(r.inputs.p)
      << "\", \"n\": " << r.inputs.input_dim;
  if (r.inputs.kappa) out << ", \"kappa\": " << sci(*r.inputs.kappa);
  if (r.inputs.magnitude_cap) out << ", \"D\": " << sci(*r.inputs.magnitude_cap);
  out << ", \"union_bound\": " << (r.inputs.union_bound ? "true" : "false")
      << "}}";
  return out.str();
}

std::string report_json(const SuiteSummary& s) {
  std::ostringstream out;
  out << "{\"type\": \"suite\", \"name\": \"" << s.name
      << "\", \"trials\": " << s.trials << ", \"violations\": " << s.violations
      << ", \"inconclusive\": " << s.inconclusive
      << ", \"min_slack\": " << sci(s.min_slack) << ", \"slack_histogram\": {";
  bool first = true;
  for (const auto& [bucket, count] : s.slack_histogram) {
    if (!first) out << ", ";
    out << "\"" << bucket << "\": " << count;
    first = false;
  }
  out << "}}";
  return out.str();
}

namespace {

std::string wrap_json(const std::string& fragment, const Provenance& prov) {
  return "{\"schema\": \"specbound-report-v1\", \"provenance\": " +
         provenance_json(prov) + ", \"report\": " + fragment + "}\n";
}

}  // namespace

std::string report_csv(const BoundReport& r, const Provenance& prov) {
  std::ostringstream out;
  out << "theorem_tag,bound_value,phi,beta,sigma,kl_upper,magnitude,c_fgm,"
         "depth,width,B,epsilon,gamma,delta,m,p,n,union_bound,"
         "constant_convention,seed\n";
  out << to_string(r.theorem_tag) << "," << sci(r.bound_value) << ","
      << sci(r.phi) << "," << sci(r.beta) << "," << sci(r.sigma) << ","
      << sci(r.kl_upper) << "," << sci(r.magnitude) << ","
      << (r.c_fgm ? sci(*r.c_fgm) : "") << "," << r.depth << "," << r.width
      << "," << sci(r.inputs.norm_bound) << "," << sci(r.inputs.epsilon) << ","
      << sci(r.inputs.gamma) << "," << sci(r.inputs.delta) << "," << r.inputs.m
      << "," << norm_order_name(r.inputs.p) << "," << r.inputs.input_dim << ","
      << (r.inputs.union_bound ? "true" : "false") << ","
      << prov.constant_convention << "," << prov.seed << "\n";
  return out.str();
}

std::string report_csv(const SuiteSummary& s, const Provenance& prov) {
  std::ostringstream out;
  out << "name,trials,violations,inconclusive,min_slack,constant_convention,"
         "seed\n";
  out << s.name << "," << s.trials << "," << s.violations << ","
      << s.inconclusive << "," << sci(s.min_slack) << ","
      << prov.constant_convention << "," << prov.seed << "\n";
  return out.str();
}

void write_report(const BoundReport& report, const std::string& path,
                  ReportFormat format, const Provenance& prov) {
  write_file(path, format == ReportFormat::json
                       ? wrap_json(report_json(report), prov)
                       : report_csv(report, prov));
}

void write_report(const SuiteSummary& summary, const std::string& path,
                  ReportFormat format, const Provenance& prov) {
  write_file(path, format == ReportFormat::json
                       ? wrap_json(report_json(summary), prov)
                       : report_csv(summary, prov));
}

void save_history(const TrainHistory& history, const std::string& path) {
  std::ostringstream out;
  out << "epoch,loss,error,margin_median,phi";
  int layers = history.epochs.empty()
                   ? 0
                   : static_cast<int>(history.epochs.front().per_layer.size());
  for (int l = 1; l <= layers; ++l)
    out << ",spectral_" << l << ",frobenius_" << l;
  out << "\n";
  for (const auto& rec : history.epochs) {
    out << rec.epoch << "," << sci(rec.loss) << "," << sci(rec.error) << ","
        << sci(rec.margin_median) << "," << sci(rec.phi);
    for (const auto& [s, f] : rec.per_layer)
      out << "," << sci(s) << "," << sci(f);
    out << "\n";
  }
  write_file(path, out.str());
}

}  // namespace specbound
