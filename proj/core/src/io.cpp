#include "matinfo/io.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace matinfo {

namespace {

using json = nlohmann::ordered_json;

// --- base64 -----------------------------------------------------------------

constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const unsigned v = bytes[i] << 16 | bytes[i + 1] << 8 | bytes[i + 2];
    out.push_back(kBase64Alphabet[v >> 18]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(kBase64Alphabet[(v >> 6) & 63]);
    out.push_back(kBase64Alphabet[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const unsigned v = bytes[i] << 16;
    out.push_back(kBase64Alphabet[v >> 18]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    const unsigned v = bytes[i] << 16 | bytes[i + 1] << 8;
    out.push_back(kBase64Alphabet[v >> 18]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(kBase64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kBase64Alphabet[i])] = i;

  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  unsigned buffer = 0;
  int bits = 0;
  for (const char c : text) {
    if (c == '=') break;
    const int v = lookup[static_cast<unsigned char>(c)];
    if (v < 0) throw ParseError("invalid base64 character");
    buffer = buffer << 6 | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((buffer >> bits) & 0xFF));
    }
  }
  return out;
}

// Doubles as explicit little-endian bytes, independent of host order.
std::vector<unsigned char> doubles_to_le_bytes(const double* data, std::size_t count) {
  std::vector<unsigned char> bytes(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t u = std::bit_cast<std::uint64_t>(data[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(u >> (8 * b));
  }
  return bytes;
}

void le_bytes_to_doubles(const std::vector<unsigned char>& bytes, double* out,
                         std::size_t count) {
  if (bytes.size() < count * 8) throw ParseError("payload shorter than declared shape");
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t u = 0;
    for (int b = 7; b >= 0; --b) u = u << 8 | bytes[i * 8 + b];
    out[i] = std::bit_cast<double>(u);
  }
}

// --- npy --------------------------------------------------------------------

constexpr char kNpyMagic[] = "\x93NUMPY";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Extracts the value substring of `key` from the npy header dict.
std::string header_field(const std::string& header, const std::string& key) {
  const std::size_t at = header.find("'" + key + "'");
  if (at == std::string::npos) throw ParseError("npy header misses key " + key);
  std::size_t colon = header.find(':', at);
  if (colon == std::string::npos) throw ParseError("malformed npy header");
  std::size_t start = colon + 1;
  while (start < header.size() && std::isspace(static_cast<unsigned char>(header[start]))) {
    ++start;
  }
  std::size_t end = start;
  int depth = 0;
  while (end < header.size()) {
    const char c = header[end];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if ((c == ',' || c == '}') && depth == 0) break;
    ++end;
  }
  return header.substr(start, end - start);
}

}  // namespace

Eigen::MatrixXd read_npy(const std::string& path) {
  const std::string raw = read_file(path);
  if (raw.size() < 10 || raw.compare(0, 6, kNpyMagic) != 0) {
    throw ParseError(path + ": not an npy file");
  }
  const unsigned char major = raw[6];
  if (major != 1) throw ParseError(path + ": unsupported npy version");
  const std::size_t header_len =
      static_cast<unsigned char>(raw[8]) | static_cast<unsigned char>(raw[9]) << 8;
  if (raw.size() < 10 + header_len) throw ParseError(path + ": truncated npy header");
  const std::string header = raw.substr(10, header_len);

  const std::string descr = header_field(header, "descr");
  const std::string fortran = header_field(header, "fortran_order");
  const std::string shape = header_field(header, "shape");

  const bool f8 = descr.find("<f8") != std::string::npos;
  const bool f4 = descr.find("<f4") != std::string::npos;
  if (!f8 && !f4) throw ParseError(path + ": dtype must be <f4 or <f8, got " + descr);
  if (fortran.find("False") == std::string::npos) {
    throw ParseError(path + ": fortran_order must be False");
  }

  long rows = 0, cols = 0;
  if (std::sscanf(shape.c_str(), "(%ld, %ld)", &rows, &cols) != 2 &&
      std::sscanf(shape.c_str(), "(%ld,%ld)", &rows, &cols) != 2) {
    throw ParseError(path + ": shape must be 2-D, got " + shape);
  }
  if (rows < 1 || cols < 1) throw ParseError(path + ": empty shape");

  const std::size_t item = f8 ? 8 : 4;
  const std::size_t expected = static_cast<std::size_t>(rows) * cols * item;
  const std::string payload = raw.substr(10 + header_len);
  if (payload.size() < expected) throw ParseError(path + ": truncated npy payload");

  Eigen::MatrixXd m(rows, cols);
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      const std::size_t at = (static_cast<std::size_t>(i) * cols + j) * item;
      if (f8) {
        std::uint64_t u = 0;
        for (int b = 7; b >= 0; --b) u = u << 8 | bytes[at + b];
        m(i, j) = std::bit_cast<double>(u);
      } else {
        std::uint32_t u = 0;
        for (int b = 3; b >= 0; --b) u = u << 8 | bytes[at + b];
        m(i, j) = static_cast<double>(std::bit_cast<float>(u));
      }
    }
  }
  return m;
}

void write_npy(const std::string& path, const Eigen::MatrixXd& m) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(m.rows()) + ", " + std::to_string(m.cols()) + "), }";
  const std::size_t unpadded = 10 + header.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  header.append(padded - unpadded, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out.write(kNpyMagic, 6);
  out.put(1);
  out.put(0);
  const std::size_t len = header.size();
  out.put(static_cast<char>(len & 0xFF));
  out.put(static_cast<char>((len >> 8) & 0xFF));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<double> row_major(static_cast<std::size_t>(m.rows()) * m.cols());
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      row_major[static_cast<std::size_t>(i) * m.cols() + j] = m(i, j);
    }
  }
  const std::vector<unsigned char> bytes = doubles_to_le_bytes(row_major.data(), row_major.size());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<double> row;
    bool numeric = true;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size() || !std::isfinite(v)) {
          numeric = false;
          break;
        }
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {  // single header row
        first = false;
        continue;
      }
      throw ParseError(path + ": non-numeric cell outside header row");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path + ": ragged csv row");
    }
    rows.push_back(std::move(row));
    first = false;
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.front().size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".npy") == 0) {
    return read_npy(path);
  }
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return read_csv(path).transpose();  // file rows are samples
  }
  throw ParseError(path + ": expected a .npy or .csv file");
}

std::vector<int> read_labels(const std::string& path) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  Eigen::MatrixXd m = csv ? read_csv(path) : read_npy(path);
  if (m.rows() != 1 && m.cols() != 1) {
    throw ParseError(path + ": labels must be a single row or column");
  }
  const Eigen::VectorXd flat =
      m.rows() == 1 ? Eigen::VectorXd(m.row(0).transpose()) : Eigen::VectorXd(m.col(0));
  std::vector<int> labels(flat.size());
  for (long i = 0; i < flat.size(); ++i) {
    const double rounded = std::round(flat[i]);
    if (std::abs(flat[i] - rounded) > 1e-9 || rounded < 0) {
      throw ParseError(path + ": labels must be nonnegative integers");
    }
    labels[i] = static_cast<int>(rounded);
  }
  return labels;
}

std::string metric_record_to_jsonl(const MetricRecord& record) {
  json j;
  j["step"] = record.step;
  j["split"] = to_string(record.split);
  j["h_feat"] = record.h_feat;
  j["h_weights"] = record.h_weights;
  j["mi"] = record.mi;
  j["mir"] = record.mir;
  j["hdr"] = record.hdr;
  j["accuracy"] = record.accuracy;
  j["loss"] = record.loss;
  return j.dump();
}

std::vector<MetricRecord> read_metrics_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<MetricRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(path + ": bad JSONL line");
    MetricRecord r;
    r.step = j.at("step").get<long>();
    r.split = j.at("split").get<std::string>() == "train" ? Split::train : Split::test;
    r.h_feat = j.at("h_feat").get<double>();
    r.h_weights = j.at("h_weights").get<double>();
    r.mi = j.at("mi").get<double>();
    r.mir = j.at("mir").get<double>();
    r.hdr = j.at("hdr").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    r.loss = j.at("loss").get<double>();
    records.push_back(r);
  }
  return records;
}

std::string nc_report_to_json(const NcReport& report) {
  json j;
  j["classes"] = report.classes;
  j["nc1_residual"] = report.nc1_residual;
  j["nc2_residual"] = report.nc2_residual;
  j["nc3_residual"] = report.nc3_residual;
  j["hdr_observed"] = report.hdr_observed;
  j["mir_observed"] = report.mir_observed;
  j["mir_target"] = report.mir_target;
  j["hdr_target"] = report.hdr_target;
  return j.dump(2);
}

namespace {

json dataset_to_json(const DatasetSpec& spec) {
  json j;
  if (spec.kind == DatasetSpec::Kind::blobs) {
    j["kind"] = "blobs";
    j["classes"] = spec.blobs.classes;
    j["input_dim"] = spec.blobs.input_dim;
    j["n_per_class"] = spec.blobs.n_per_class;
    j["separation"] = spec.blobs.separation;
    j["noise_sigma"] = spec.blobs.noise_sigma;
  } else {
    j["kind"] = "modadd";
    j["modulus"] = spec.modadd.modulus;
    j["train_fraction"] = spec.modadd.train_fraction;
  }
  return j;
}

DatasetSpec dataset_from_json(const json& j) {
  DatasetSpec spec;
  if (j.at("kind") == "blobs") {
    spec.kind = DatasetSpec::Kind::blobs;
    spec.blobs.classes = j.at("classes").get<int>();
    spec.blobs.input_dim = j.at("input_dim").get<int>();
    spec.blobs.n_per_class = j.at("n_per_class").get<int>();
    spec.blobs.separation = j.at("separation").get<double>();
    spec.blobs.noise_sigma = j.at("noise_sigma").get<double>();
  } else {
    spec.kind = DatasetSpec::Kind::modadd;
    spec.modadd.modulus = j.at("modulus").get<int>();
    spec.modadd.train_fraction = j.at("train_fraction").get<double>();
  }
  return spec;
}

const char* loss_name(LossKind loss) {
  switch (loss) {
    case LossKind::ce: return "ce";
    case LossKind::ce_mi: return "ce+mi";
    case LossKind::ce_hd: return "ce+hd";
    case LossKind::ce_cma: return "ce+cma";
  }
  return "ce";
}

LossKind loss_from_name(const std::string& name) {
  if (name == "ce") return LossKind::ce;
  if (name == "ce+mi") return LossKind::ce_mi;
  if (name == "ce+hd") return LossKind::ce_hd;
  if (name == "ce+cma") return LossKind::ce_cma;
  throw ParseError("unknown loss " + name);
}

json config_to_json(const TrainConfig& cfg) {
  json j;
  j["dataset"] = dataset_to_json(cfg.dataset);
  j["loss"] = loss_name(cfg.loss);
  j["lambda"] = cfg.lambda;
  j["temperature"] = cfg.temperature;
  j["optimizer"] = cfg.optimizer == OptimizerKind::sgd ? "sgd" : "adamw";
  j["lr0"] = cfg.lr0;
  j["momentum"] = cfg.momentum;
  j["weight_decay"] = cfg.weight_decay;
  j["batch_size"] = cfg.batch_size;
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  j["data_seed"] = cfg.data_seed;
  j["hidden_dims"] = cfg.hidden_dims;
  j["head"] = cfg.head == HeadKind::linear ? "linear" : "cosine";
  j["eval_every"] = cfg.eval_every;
  j["eval_batch"] = cfg.eval_batch;
  j["info_grad_to_weights"] = cfg.info_grad_to_weights;
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.dataset = dataset_from_json(j.at("dataset"));
  cfg.loss = loss_from_name(j.at("loss").get<std::string>());
  cfg.lambda = j.at("lambda").get<double>();
  cfg.temperature = j.at("temperature").get<double>();
  cfg.optimizer = j.at("optimizer") == "sgd" ? OptimizerKind::sgd : OptimizerKind::adamw;
  cfg.lr0 = j.at("lr0").get<double>();
  cfg.momentum = j.at("momentum").get<double>();
  cfg.weight_decay = j.at("weight_decay").get<double>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.steps = j.at("steps").get<long>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.data_seed = j.at("data_seed").get<std::uint64_t>();
  cfg.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
  cfg.head = j.at("head") == "linear" ? HeadKind::linear : HeadKind::cosine;
  cfg.eval_every = j.at("eval_every").get<long>();
  cfg.eval_batch = j.at("eval_batch").get<int>();
  cfg.info_grad_to_weights = j.at("info_grad_to_weights").get<bool>();
  return cfg;
}

json matrix_layer(const std::string& name, const Eigen::MatrixXd& m) {
  std::vector<double> row_major(static_cast<std::size_t>(m.rows()) * m.cols());
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      row_major[static_cast<std::size_t>(i) * m.cols() + j] = m(i, j);
    }
  }
  json j;
  j["name"] = name;
  j["shape"] = {m.rows(), m.cols()};
  j["data"] = base64_encode(doubles_to_le_bytes(row_major.data(), row_major.size()));
  return j;
}

Eigen::MatrixXd layer_matrix(const json& j, long rows, long cols) {
  std::vector<double> row_major(static_cast<std::size_t>(rows) * cols);
  le_bytes_to_doubles(base64_decode(j.at("data").get<std::string>()), row_major.data(),
                      row_major.size());
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j2 = 0; j2 < cols; ++j2) {
      m(i, j2) = row_major[static_cast<std::size_t>(i) * cols + j2];
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  json j;
  j["format"] = "matinfo-checkpoint-v1";
  json arch;
  arch["input_dim"] = checkpoint.params.arch.input_dim;
  arch["hidden_dims"] = checkpoint.params.arch.hidden_dims;
  arch["classes"] = checkpoint.params.arch.classes;
  arch["activation"] = "relu";
  arch["head"] = checkpoint.params.arch.head == HeadKind::linear ? "linear" : "cosine";
  j["architecture"] = arch;

  json layers = json::array();
  const std::size_t n = checkpoint.params.weights.size();
  for (std::size_t l = 0; l < n; ++l) {
    const std::string base = l + 1 == n ? "head" : "fc" + std::to_string(l + 1);
    layers.push_back(matrix_layer(base + ".weight", checkpoint.params.weights[l]));
    layers.push_back(matrix_layer(base + ".bias", checkpoint.params.biases[l]));
  }
  j["layers"] = layers;
  j["config"] = config_to_json(checkpoint.config);
  j["step"] = checkpoint.step;
  j["rng_digest"] = checkpoint.rng_digest;

  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": not valid JSON");
  if (j.value("format", "") != "matinfo-checkpoint-v1") {
    throw ParseError(path + ": unknown checkpoint format");
  }

  Checkpoint ckpt;
  const json& arch = j.at("architecture");
  ckpt.params.arch.input_dim = arch.at("input_dim").get<int>();
  ckpt.params.arch.hidden_dims = arch.at("hidden_dims").get<std::vector<int>>();
  ckpt.params.arch.classes = arch.at("classes").get<int>();
  ckpt.params.arch.head = arch.at("head") == "linear" ? HeadKind::linear : HeadKind::cosine;

  const json& layers = j.at("layers");
  for (std::size_t l = 0; l * 2 + 1 < layers.size(); ++l) {
    const json& w = layers[l * 2];
    const json& b = layers[l * 2 + 1];
    const auto wshape = w.at("shape").get<std::vector<long>>();
    const auto bshape = b.at("shape").get<std::vector<long>>();
    ckpt.params.weights.push_back(layer_matrix(w, wshape.at(0), wshape.at(1)));
    ckpt.params.biases.push_back(
        Eigen::VectorXd(layer_matrix(b, bshape.at(0), bshape.at(1)).col(0)));
  }
  ckpt.config = config_from_json(j.at("config"));
  ckpt.step = j.at("step").get<long>();
  ckpt.rng_digest = j.at("rng_digest").get<std::string>();
  return ckpt;
}

}  // namespace matinfo
